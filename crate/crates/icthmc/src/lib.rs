//! Imprecise continuous-time hidden Markov chains: sets of continuous-time
//! Markov chains described by a rate-matrix set and a credal set of initial
//! distributions, observed through a state-conditional output model.
//!
//! The crate computes tight lower and upper bounds on the posterior
//! expectation of a function of the hidden state at a query time, given a
//! finite sequence of observations, by solving the generalised Bayes' rule
//! with a bisection over shifted product expectations. Independent reference
//! implementations live in [`oracle`].
//!
//! Start from [`Icthmc`] and [`updated_lower_expectation`], or from the
//! runnable programs in `examples/`.

// Negated comparisons like `!(x >= 0.0)` are deliberate: they also reject
// NaN, which `x < 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod inference;
pub mod model;
pub mod oracle;
pub mod outputs;
pub mod propagation;
pub mod ratesets;

pub use error::{Error, Result};
pub use inference::{solve_gbr, GbrEvaluator, GbrRegime, UpdatedExpectation};
pub use outputs::{
    likelihood_vector, Observation, ObservationKind, ObservationPayload, ObservationSequence,
    OutputModel,
};
pub use propagation::{CredalSet, PropagationConfig};
pub use ratesets::{RateMatrix, RateMatrixSet, StateFunction, StateSpace};

/// A complete model: hidden-state dynamics plus the observation channel.
#[derive(Debug, Clone)]
pub struct Icthmc {
    pub states: StateSpace,
    pub rates: RateMatrixSet,
    pub initial: CredalSet,
    pub output: OutputModel,
}

impl Icthmc {
    pub fn new(
        states: StateSpace,
        rates: RateMatrixSet,
        initial: CredalSet,
        output: OutputModel,
    ) -> Result<Self> {
        let n = states.size();
        if rates.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: rates.dim(),
            });
        }
        if initial.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: initial.dim(),
            });
        }
        if output.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: output.dim(),
            });
        }
        Ok(Self {
            states,
            rates,
            initial,
            output,
        })
    }

    pub fn dim(&self) -> usize {
        self.states.size()
    }
}

/// What to compute: the expectation of `f` of the hidden state at
/// `target_time`, bracketed to within `tolerance`.
#[derive(Debug, Clone)]
pub struct Query {
    pub target_time: f64,
    pub f: StateFunction,
    pub tolerance: f64,
}

impl Query {
    pub fn new(target_time: f64, f: StateFunction, tolerance: f64) -> Result<Self> {
        if !(target_time >= 0.0) || !target_time.is_finite() {
            return Err(Error::InvalidInput(format!(
                "invalid target time {target_time}"
            )));
        }
        if !(tolerance > 0.0) {
            return Err(Error::InvalidInput(format!(
                "tolerance must be positive, got {tolerance}"
            )));
        }
        Ok(Self {
            target_time,
            f,
            tolerance,
        })
    }
}

/// Updated lower and upper expectation of the query function given the
/// observation sequence: maps each observation to a likelihood vector over
/// the hidden states and solves the generalised Bayes' rule.
pub fn updated_lower_expectation(
    model: &Icthmc,
    observations: &ObservationSequence,
    query: &Query,
    cfg: &PropagationConfig,
) -> Result<UpdatedExpectation> {
    if query.f.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: query.f.len(),
        });
    }
    let factors = observations
        .observations()
        .iter()
        .map(|o| likelihood_vector(&model.output, o))
        .collect::<Result<Vec<_>>>()?;
    solve_gbr(
        &model.rates,
        &model.initial,
        &observations.times(),
        &factors,
        query.target_time,
        &query.f,
        query.tolerance,
        cfg,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo_model() -> Icthmc {
        let states = StateSpace::new(vec!["healthy".into(), "sick".into()]).unwrap();
        let rates = RateMatrixSet::interval_rows(
            vec![vec![0.0, 0.1], vec![0.4, 0.0]],
            vec![vec![0.0, 0.3], vec![0.8, 0.0]],
        )
        .unwrap();
        let initial = CredalSet::vacuous(2);
        let output = OutputModel::categorical(
            vec!["ok".into(), "fever".into()],
            vec![vec![0.9, 0.1], vec![0.3, 0.7]],
        )
        .unwrap();
        Icthmc::new(states, rates, initial, output).unwrap()
    }

    #[test]
    fn dimension_mismatches_are_rejected() {
        let m = demo_model();
        let bad = CredalSet::vacuous(3);
        assert!(matches!(
            Icthmc::new(m.states.clone(), m.rates.clone(), bad, m.output.clone()),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 3
            })
        ));
    }

    #[test]
    fn end_to_end_updating_tightens_the_vacuous_interval() {
        let model = demo_model();
        let obs = ObservationSequence::new(vec![Observation::new(
            0.5,
            ObservationPayload::PointSymbol("fever".into()),
        )
        .unwrap()])
        .unwrap();
        // Indicator of the sick state at the observation time.
        let query = Query::new(0.5, StateFunction::new(vec![0.0, 1.0]).unwrap(), 1e-6).unwrap();
        let cfg = PropagationConfig::default();
        let out = updated_lower_expectation(&model, &obs, &query, &cfg).unwrap();
        assert!(out.lower > 0.0 && out.upper < 1.0);
        assert!(out.lower <= out.upper + 2.0 * out.tolerance);
        assert_eq!(out.regime, GbrRegime::AllPositive);
    }
}
