//! Lower expectations of functions on a single time point.
//!
//! Conditional lower expectations over a horizon are computed by iterating
//! `f + step * Q_lower(f)` with adaptive step doubling; unconditional values
//! combine the propagated function with a vertex minimisation over the
//! initial credal set.

use crate::error::{Error, Result};
use crate::ratesets::{RateMatrixSet, StateFunction};

/// Convex set of initial distributions, represented by its vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct CredalSet {
    vertices: Vec<Vec<f64>>,
}

impl CredalSet {
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidModel("credal set must be non-empty".into()));
        }
        let n = vertices[0].len();
        for (k, p) in vertices.iter().enumerate() {
            if p.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: p.len(),
                });
            }
            if p.iter().any(|&v| !v.is_finite() || v < 0.0) {
                return Err(Error::InvalidModel(format!(
                    "credal vertex {k} has a negative or non-finite mass"
                )));
            }
            let total: f64 = p.iter().sum();
            if (total - 1.0).abs() > 1e-12 * n as f64 {
                return Err(Error::InvalidModel(format!(
                    "credal vertex {k} sums to {total}, not 1"
                )));
            }
        }
        Ok(Self { vertices })
    }

    /// The vacuous credal set: every degenerate mass function.
    pub fn vacuous(n: usize) -> Self {
        let vertices = (0..n)
            .map(|x| {
                let mut p = vec![0.0; n];
                p[x] = 1.0;
                p
            })
            .collect();
        Self { vertices }
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    /// Minimum of the expectation of `h` over the vertices; the infimum over
    /// the convex hull is attained there.
    pub fn lower_expectation(&self, h: &StateFunction) -> Result<f64> {
        if h.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: h.len(),
            });
        }
        Ok(self
            .vertices
            .iter()
            .map(|p| h.dot(p))
            .fold(f64::INFINITY, f64::min))
    }

    pub fn upper_expectation(&self, h: &StateFunction) -> Result<f64> {
        Ok(-self.lower_expectation(&h.negated())?)
    }
}

/// Numerical control for the horizon propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationConfig {
    /// Target accuracy; the doubling loop stops when two successive full
    /// computations differ by at most half of this in sup norm.
    pub tolerance: f64,
    /// Maximum number of step-count doublings before giving up.
    pub max_refinements: u32,
    /// Multiplier on the safety-floor step count for the initial run.
    pub initial_steps_factor: f64,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            max_refinements: 40,
            initial_steps_factor: 2.0,
        }
    }
}

impl PropagationConfig {
    pub fn with_tolerance(tolerance: f64) -> Self {
        Self {
            tolerance,
            ..Self::default()
        }
    }
}

/// Result of an adaptive propagation run.
#[derive(Debug, Clone)]
pub struct Propagated {
    pub values: StateFunction,
    /// Step count of the accepted run.
    pub steps: u64,
    /// Sup-norm gap between the last two runs.
    pub gap: f64,
}

/// One full Euler run with a fixed step count.
pub fn propagate_lower_fixed(
    qset: &RateMatrixSet,
    f: &StateFunction,
    horizon: f64,
    steps: u64,
) -> Result<StateFunction> {
    if horizon == 0.0 || steps == 0 {
        return Ok(f.clone());
    }
    let step = horizon / steps as f64;
    let mut current = f.clone();
    for _ in 0..steps {
        let rate = qset.lower_rate_apply(&current)?;
        current = StateFunction::new(
            current
                .values()
                .iter()
                .zip(rate.values())
                .map(|(v, r)| v + step * r)
                .collect(),
        )?;
    }
    Ok(current)
}

/// Step count at which `step * norm_bound <= 1/2` holds, scaled by the
/// configured initial factor.
fn initial_steps(qset: &RateMatrixSet, horizon: f64, cfg: &PropagationConfig) -> u64 {
    let floor = 2.0 * horizon * qset.norm_bound();
    ((floor * cfg.initial_steps_factor).ceil() as u64).max(1)
}

/// Conditional lower expectation of `f` at the end of `horizon`, i.e. the
/// vector `x -> lower E[f(X_{t+horizon}) | X_t = x]`, via adaptive step
/// doubling.
pub fn conditional_lower_expectation(
    qset: &RateMatrixSet,
    f: &StateFunction,
    horizon: f64,
    cfg: &PropagationConfig,
) -> Result<Propagated> {
    if !(horizon >= 0.0) {
        return Err(Error::InvalidInput(format!("negative horizon {horizon}")));
    }
    if horizon == 0.0 {
        return Ok(Propagated {
            values: f.clone(),
            steps: 0,
            gap: 0.0,
        });
    }
    let mut steps = initial_steps(qset, horizon, cfg);
    let mut previous = propagate_lower_fixed(qset, f, horizon, steps)?;
    let mut gap = f64::INFINITY;
    for _ in 0..cfg.max_refinements {
        steps *= 2;
        let current = propagate_lower_fixed(qset, f, horizon, steps)?;
        gap = current.sup_distance(&previous);
        if gap <= cfg.tolerance / 2.0 {
            return Ok(Propagated {
                values: current,
                steps,
                gap,
            });
        }
        previous = current;
    }
    Err(Error::Convergence {
        refinements: cfg.max_refinements,
        steps,
        gap,
        target: cfg.tolerance / 2.0,
    })
}

/// Conjugate upper variant.
pub fn conditional_upper_expectation(
    qset: &RateMatrixSet,
    f: &StateFunction,
    horizon: f64,
    cfg: &PropagationConfig,
) -> Result<Propagated> {
    let run = conditional_lower_expectation(qset, &f.negated(), horizon, cfg)?;
    Ok(Propagated {
        values: run.values.negated(),
        steps: run.steps,
        gap: run.gap,
    })
}

/// Lower expectation of `f(X_t)` unconditionally: propagate over `[0, t]`
/// and minimise over the initial credal set.
pub fn unconditional_lower_expectation(
    qset: &RateMatrixSet,
    mset: &CredalSet,
    f: &StateFunction,
    t: f64,
    cfg: &PropagationConfig,
) -> Result<f64> {
    let run = conditional_lower_expectation(qset, f, t, cfg)?;
    mset.lower_expectation(&run.values)
}
