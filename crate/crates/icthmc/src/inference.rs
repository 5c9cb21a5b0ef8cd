//! Updated lower and upper expectations via the generalised Bayes' rule.
//!
//! The observation likelihoods and the target function are merged into a
//! single ordered list of per-time factors. A backward recursion computes the
//! pair of auxiliary functions whose credal expectations give the lower and
//! upper expectation of the product, and a bisection over the shift `mu`
//! locates the maximum root of `G(mu)`, which is the updated lower
//! expectation.

use crate::error::{Error, Result};
use crate::propagation::{
    conditional_lower_expectation, conditional_upper_expectation, propagate_lower_fixed, CredalSet,
    PropagationConfig,
};
use crate::ratesets::{RateMatrixSet, StateFunction};

/// Values of `G` within this magnitude of zero are treated as zero when
/// probing the regime.
pub const ZERO_GUARD: f64 = 1e-12;

/// Which of the three qualitative shapes `G` has, keyed on the signs of the
/// lower and upper expectation of the likelihood product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GbrRegime {
    /// The observation has positive lower probability/density: `G` is
    /// strictly decreasing with a unique root.
    AllPositive,
    /// Zero lower but positive upper probability/density: `G` is zero up to
    /// its maximum root and decreasing beyond it.
    SomePositive,
    /// Zero upper probability/density: `G` is identically zero and the
    /// update is undefined.
    AllZero,
}

impl std::fmt::Display for GbrRegime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::AllPositive => "AllPositive",
            Self::SomePositive => "SomePositive",
            Self::AllZero => "AllZero",
        })
    }
}

/// Result of an updated-expectation computation.
#[derive(Debug, Clone)]
pub struct UpdatedExpectation {
    pub lower: f64,
    pub upper: f64,
    pub regime: GbrRegime,
    /// Bisection iterations of the costlier of the two runs.
    pub iterations: u32,
    pub tolerance: f64,
}

/// Upper bound on the bisection iteration count for a target bracket `eps`
/// on a function with range `[fmin, fmax]`.
pub fn bisection_iteration_bound(fmin: f64, fmax: f64, eps: f64) -> u32 {
    ((fmax - fmin + 2.0) / eps).log2().ceil() as u32 + 2
}

/// Merge the target factor `f - mu` at time `s` into the per-time factor
/// list: inserted as a new factor if `s` is a new time point, multiplied into
/// the existing factor otherwise.
pub fn merge_target(
    times: &[f64],
    factors: &[StateFunction],
    s: f64,
    f: &StateFunction,
    mu: f64,
) -> (Vec<f64>, Vec<StateFunction>) {
    let shifted = f.shifted(-mu);
    let mut out_times = times.to_vec();
    let mut out_factors = factors.to_vec();
    match times.iter().position(|&t| t == s) {
        Some(i) => out_factors[i] = shifted.hadamard(&factors[i]),
        None => {
            let i = times.partition_point(|&t| t < s);
            out_times.insert(i, s);
            out_factors.insert(i, shifted);
        }
    }
    (out_times, out_factors)
}

/// Backward sweep over the factor list. `propagate(segment, horizon, gp, gm)`
/// must return the conditional lower expectation of `gp` and the conditional
/// upper expectation of `gm` over the segment.
type SegmentPropagator<'a> = dyn FnMut(usize, f64, &StateFunction, &StateFunction) -> Result<(StateFunction, StateFunction)>
    + 'a;

fn sweep_transform(
    times: &[f64],
    factors: &[StateFunction],
    propagate: &mut SegmentPropagator<'_>,
) -> Result<(StateFunction, StateFunction)> {
    let n = factors.len();
    if n == 0 || times.len() != n {
        return Err(Error::InvalidInput(
            "factor list must be non-empty and aligned with its time points".into(),
        ));
    }
    let mut gp = factors[n - 1].clone();
    let mut gm = gp.clone();
    for i in (0..n - 1).rev() {
        let horizon = times[i + 1] - times[i];
        if !(horizon > 0.0) {
            return Err(Error::InvalidInput(format!(
                "time points must be strictly increasing ({} then {})",
                times[i],
                times[i + 1]
            )));
        }
        let (lo, hi) = propagate(i, horizon, &gp, &gm)?;
        let g = &factors[i];
        let mut next_gp = Vec::with_capacity(g.len());
        let mut next_gm = Vec::with_capacity(g.len());
        for x in 0..g.len() {
            if g[x] >= 0.0 {
                next_gp.push(g[x] * lo[x]);
                next_gm.push(g[x] * hi[x]);
            } else {
                next_gp.push(g[x] * hi[x]);
                next_gm.push(g[x] * lo[x]);
            }
        }
        gp = StateFunction::new(next_gp)?;
        gm = StateFunction::new(next_gm)?;
    }
    Ok((gp, gm))
}

/// Backward recursion computing the pair of auxiliary functions at the first
/// time point: the conditional lower and upper expectation of the product of
/// the per-time factors, as functions of the state at that time.
pub fn backward_product_transform(
    qset: &RateMatrixSet,
    times: &[f64],
    factors: &[StateFunction],
    cfg: &PropagationConfig,
) -> Result<(StateFunction, StateFunction)> {
    sweep_transform(times, factors, &mut |_seg, horizon, gp, gm| {
        let lo = conditional_lower_expectation(qset, gp, horizon, cfg)?;
        let hi = conditional_upper_expectation(qset, gm, horizon, cfg)?;
        Ok((lo.values, hi.values))
    })
}

/// Lower and upper expectation of the product of the per-time factors, with
/// the initial credal minimisation applied after propagating the auxiliary
/// functions from the first time point back to zero.
pub fn evaluate_g(
    qset: &RateMatrixSet,
    mset: &CredalSet,
    times: &[f64],
    factors: &[StateFunction],
    cfg: &PropagationConfig,
) -> Result<(f64, f64)> {
    let (gp, gm) = backward_product_transform(qset, times, factors, cfg)?;
    let t0 = times[0];
    if t0 > 0.0 {
        let lo = conditional_lower_expectation(qset, &gp, t0, cfg)?;
        let hi = conditional_upper_expectation(qset, &gm, t0, cfg)?;
        Ok((
            mset.lower_expectation(&lo.values)?,
            mset.upper_expectation(&hi.values)?,
        ))
    } else {
        Ok((mset.lower_expectation(&gp)?, mset.upper_expectation(&gm)?))
    }
}

/// One slot of the merged factor list.
#[derive(Debug, Clone)]
enum Slot {
    /// Fixed observation likelihood.
    Factor(StateFunction),
    /// The target time: `f - mu`, multiplied into an existing likelihood if
    /// the target coincides with an observation time.
    Target { base: Option<StateFunction> },
}

/// Repeated evaluation of `G(mu)` for one inference problem.
///
/// Step counts for every propagation segment are fixed once, during
/// calibration at the two regime probes (taking the larger of the adaptive
/// counts). With frozen counts every subsequent evaluation is a pointwise
/// minimum of functions linear in `mu`, so the sampled `G` is monotone and
/// concave up to rounding, not just up to the propagation tolerance.
pub struct GbrEvaluator<'a> {
    qset: &'a RateMatrixSet,
    mset: &'a CredalSet,
    times: Vec<f64>,
    slots: Vec<Slot>,
    /// Per-segment frozen step counts; the last entry is the segment from
    /// the first time point back to zero.
    seg_steps: Option<Vec<u64>>,
}

impl<'a> GbrEvaluator<'a> {
    pub fn new(
        qset: &'a RateMatrixSet,
        mset: &'a CredalSet,
        obs_times: &[f64],
        factors: &[StateFunction],
        s: f64,
    ) -> Result<Self> {
        if obs_times.len() != factors.len() {
            return Err(Error::InvalidInput(
                "observation times and factors must align".into(),
            ));
        }
        if !(s >= 0.0) {
            return Err(Error::InvalidInput(format!("invalid target time {s}")));
        }
        let mut times = Vec::with_capacity(obs_times.len() + 1);
        let mut slots = Vec::with_capacity(obs_times.len() + 1);
        let mut placed = false;
        for (&t, g) in obs_times.iter().zip(factors) {
            if t == s {
                slots.push(Slot::Target {
                    base: Some(g.clone()),
                });
                placed = true;
            } else {
                if !placed && t > s {
                    times.push(s);
                    slots.push(Slot::Target { base: None });
                    placed = true;
                }
                slots.push(Slot::Factor(g.clone()));
            }
            times.push(t);
        }
        if !placed {
            times.push(s);
            slots.push(Slot::Target { base: None });
        }
        Ok(Self {
            qset,
            mset,
            times,
            slots,
            seg_steps: None,
        })
    }

    fn factors_for(&self, f: &StateFunction, mu: f64) -> Vec<StateFunction> {
        let shifted = f.shifted(-mu);
        self.slots
            .iter()
            .map(|slot| match slot {
                Slot::Factor(g) => g.clone(),
                Slot::Target { base: Some(g) } => shifted.hadamard(g),
                Slot::Target { base: None } => shifted.clone(),
            })
            .collect()
    }

    /// Number of propagation segments, including the final one back to zero.
    fn segment_count(&self) -> usize {
        self.times.len() - 1 + usize::from(self.times[0] > 0.0)
    }

    /// Adaptive evaluation recording the accepted step count per segment.
    fn evaluate_adaptive(
        &self,
        f: &StateFunction,
        mu: f64,
        cfg: &PropagationConfig,
    ) -> Result<((f64, f64), Vec<u64>)> {
        let factors = self.factors_for(f, mu);
        let mut steps = vec![0u64; self.segment_count()];
        let (gp, gm) = sweep_transform(&self.times, &factors, &mut |seg, horizon, gp, gm| {
            let lo = conditional_lower_expectation(self.qset, gp, horizon, cfg)?;
            let hi = conditional_upper_expectation(self.qset, gm, horizon, cfg)?;
            steps[seg] = lo.steps.max(hi.steps);
            Ok((lo.values, hi.values))
        })?;
        let t0 = self.times[0];
        let value = if t0 > 0.0 {
            let lo = conditional_lower_expectation(self.qset, &gp, t0, cfg)?;
            let hi = conditional_upper_expectation(self.qset, &gm, t0, cfg)?;
            *steps.last_mut().unwrap() = lo.steps.max(hi.steps);
            (
                self.mset.lower_expectation(&lo.values)?,
                self.mset.upper_expectation(&hi.values)?,
            )
        } else {
            (
                self.mset.lower_expectation(&gp)?,
                self.mset.upper_expectation(&gm)?,
            )
        };
        Ok((value, steps))
    }

    /// Calibrate the frozen step counts at the two exterior probes and return
    /// the lower component of `G` there, as `(G(min f - 1), G(max f + 1))`.
    pub fn calibrate(&mut self, f: &StateFunction, cfg: &PropagationConfig) -> Result<(f64, f64)> {
        let (at_high, steps_high) = self.evaluate_adaptive(f, f.max() + 1.0, cfg)?;
        let (at_low, steps_low) = self.evaluate_adaptive(f, f.min() - 1.0, cfg)?;
        self.seg_steps = Some(
            steps_high
                .iter()
                .zip(&steps_low)
                .map(|(&a, &b)| a.max(b))
                .collect(),
        );
        Ok((at_low.0, at_high.0))
    }

    /// Frozen-step evaluation of `(G_lower(mu), G_upper(mu))`.
    pub fn evaluate(&self, f: &StateFunction, mu: f64) -> Result<(f64, f64)> {
        let seg_steps = self
            .seg_steps
            .as_ref()
            .ok_or_else(|| Error::Internal("evaluator used before calibration".into()))?;
        let factors = self.factors_for(f, mu);
        let (gp, gm) = sweep_transform(&self.times, &factors, &mut |seg, horizon, gp, gm| {
            let lo = propagate_lower_fixed(self.qset, gp, horizon, seg_steps[seg])?;
            let hi =
                propagate_lower_fixed(self.qset, &gm.negated(), horizon, seg_steps[seg])?.negated();
            Ok((lo, hi))
        })?;
        let t0 = self.times[0];
        if t0 > 0.0 {
            let steps = *seg_steps.last().unwrap();
            let lo = propagate_lower_fixed(self.qset, &gp, t0, steps)?;
            let hi = propagate_lower_fixed(self.qset, &gm.negated(), t0, steps)?.negated();
            Ok((
                self.mset.lower_expectation(&lo)?,
                self.mset.upper_expectation(&hi)?,
            ))
        } else {
            Ok((
                self.mset.lower_expectation(&gp)?,
                self.mset.upper_expectation(&gm)?,
            ))
        }
    }

    /// Merged time points, including the target time.
    pub fn merged_times(&self) -> &[f64] {
        &self.times
    }
}

/// Bisection for the maximum root of `G` over `[min f, max f]`.
fn bisect(evaluator: &GbrEvaluator, f: &StateFunction, eps: f64) -> Result<(f64, u32)> {
    let mut lo = f.min();
    let mut hi = f.max();
    let at_hi = evaluator.evaluate(f, hi)?.0;
    if at_hi >= -ZERO_GUARD {
        return Ok((hi, 0));
    }
    let mut iterations = 0;
    while hi - lo >= eps {
        let mid = 0.5 * (lo + hi);
        if evaluator.evaluate(f, mid)?.0 >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok((lo, iterations))
}

/// Updated lower and upper expectation of `f` at time `s` given non-negative
/// likelihood factors at the observation times, via regime probing and
/// bisection.
#[allow(clippy::too_many_arguments)]
pub fn solve_gbr(
    qset: &RateMatrixSet,
    mset: &CredalSet,
    times: &[f64],
    factors: &[StateFunction],
    s: f64,
    f: &StateFunction,
    epsilon: f64,
    cfg: &PropagationConfig,
) -> Result<UpdatedExpectation> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidInput(format!(
            "tolerance must be positive, got {epsilon}"
        )));
    }
    for (i, g) in factors.iter().enumerate() {
        if g.min() < 0.0 {
            return Err(Error::InvalidInput(format!(
                "likelihood factor {i} has a negative entry"
            )));
        }
    }
    // Factors are scaled to unit maximum: the root of G is invariant and the
    // probes stay clear of the zero guard even for tiny densities. An
    // all-zero factor forces a zero product, hence an undefined update.
    let mut scaled = Vec::with_capacity(factors.len());
    for g in factors {
        let m = g.max();
        if m == 0.0 {
            return Err(Error::UpdateUndefined);
        }
        scaled.push(g.scaled(1.0 / m));
    }

    let cfg = PropagationConfig {
        tolerance: epsilon,
        ..cfg.clone()
    };
    let mut evaluator = GbrEvaluator::new(qset, mset, times, &scaled, s)?;
    let (at_low_probe, at_high_probe) = evaluator.calibrate(f, &cfg)?;

    // For mu beyond max f, G < 0 exactly when the product has positive upper
    // expectation; for mu below min f, G > 0 exactly when it has positive
    // lower expectation.
    let regime = if at_high_probe >= -ZERO_GUARD {
        if at_low_probe <= ZERO_GUARD {
            return Err(Error::UpdateUndefined);
        }
        return Err(Error::Internal(
            "G is positive at the low probe but non-negative at the high probe".into(),
        ));
    } else if at_low_probe > ZERO_GUARD {
        GbrRegime::AllPositive
    } else {
        GbrRegime::SomePositive
    };

    let (lower, it_lower) = bisect(&evaluator, f, epsilon)?;
    let negated = f.negated();
    let (neg_upper, it_upper) = bisect(&evaluator, &negated, epsilon)?;
    let upper = -neg_upper;

    Ok(UpdatedExpectation {
        lower,
        upper,
        regime,
        iterations: it_lower.max(it_upper),
        tolerance: epsilon,
    })
}

/// Sampled lower curve `mu -> G_lower(mu)` over `[min f - 1, max f + 1]`,
/// with `samples` evenly spaced points. When the observations have zero
/// upper probability under every model the column is identically zero.
#[allow(clippy::too_many_arguments)]
pub fn gbr_curve(
    qset: &RateMatrixSet,
    mset: &CredalSet,
    times: &[f64],
    factors: &[StateFunction],
    s: f64,
    f: &StateFunction,
    samples: usize,
    cfg: &PropagationConfig,
) -> Result<Vec<(f64, f64)>> {
    if samples < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 samples, got {samples}"
        )));
    }
    let lo = f.min() - 1.0;
    let hi = f.max() + 1.0;
    let step = (hi - lo) / (samples - 1) as f64;
    let mus: Vec<f64> = (0..samples).map(|i| lo + i as f64 * step).collect();

    for (i, g) in factors.iter().enumerate() {
        if g.min() < 0.0 {
            return Err(Error::InvalidInput(format!(
                "likelihood factor {i} has a negative entry"
            )));
        }
    }
    let mut scaled = Vec::with_capacity(factors.len());
    let mut all_zero = false;
    for g in factors {
        let m = g.max();
        if m == 0.0 {
            all_zero = true;
            break;
        }
        scaled.push(g.scaled(1.0 / m));
    }
    if !all_zero {
        let mut evaluator = GbrEvaluator::new(qset, mset, times, &scaled, s)?;
        let (at_low_probe, at_high_probe) = evaluator.calibrate(f, cfg)?;
        if !(at_high_probe >= -ZERO_GUARD && at_low_probe <= ZERO_GUARD) {
            return mus
                .into_iter()
                .map(|mu| evaluator.evaluate(f, mu).map(|(g_lo, _)| (mu, g_lo)))
                .collect();
        }
    }
    Ok(mus.into_iter().map(|mu| (mu, 0.0)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::matrix_exponential_apply;
    use crate::ratesets::RateMatrix;

    fn sf(values: &[f64]) -> StateFunction {
        StateFunction::new(values.to_vec()).unwrap()
    }

    fn singleton_symmetric() -> (RateMatrix, RateMatrixSet) {
        let q = RateMatrix::new(vec![vec![-1.0, 1.0], vec![1.0, -1.0]]).unwrap();
        let set = RateMatrixSet::singleton(&q);
        (q, set)
    }

    #[test]
    fn merge_inserts_and_multiplies() {
        let f = sf(&[2.0, 3.0]);
        let g1 = sf(&[0.5, 0.5]);
        let g2 = sf(&[0.1, 0.9]);
        // Insertion between existing points.
        let (t, g) = merge_target(&[1.0, 2.0], &[g1.clone(), g2.clone()], 1.5, &f, 1.0);
        assert_eq!(t, vec![1.0, 1.5, 2.0]);
        assert_eq!(g[1].values(), &[1.0, 2.0]);
        // Merge into an existing point.
        let (t, g) = merge_target(&[1.0, 2.0], &[g1.clone(), g2], 2.0, &f, 1.0);
        assert_eq!(t, vec![1.0, 2.0]);
        assert_eq!(g[1].values(), &[0.1, 1.8]);
        // Target alone.
        let (t, g) = merge_target(&[], &[], 0.7, &f, 0.0);
        assert_eq!(t, vec![0.7]);
        assert_eq!(g[0].values(), &[2.0, 3.0]);
    }

    #[test]
    fn backward_transform_base_case() {
        let (_, set) = singleton_symmetric();
        let g0 = sf(&[0.3, 0.8]);
        let cfg = PropagationConfig::default();
        let (gp, gm) =
            backward_product_transform(&set, &[1.0], std::slice::from_ref(&g0), &cfg).unwrap();
        assert_eq!(gp.values(), g0.values());
        assert_eq!(gm.values(), g0.values());
    }

    #[test]
    fn backward_transform_two_points_precise() {
        let (q, set) = singleton_symmetric();
        let cfg = PropagationConfig::default();
        let g0 = sf(&[0.3, 0.8]);
        let g1 = sf(&[0.6, 0.2]);
        let (gp, gm) =
            backward_product_transform(&set, &[0.5, 1.25], &[g0.clone(), g1.clone()], &cfg)
                .unwrap();
        let inner = matrix_exponential_apply(&q, &g1, 0.75);
        for x in 0..2 {
            let expect = g0[x] * inner[x];
            assert!((gp[x] - expect).abs() <= cfg.tolerance + 1e-8);
            assert!((gm[x] - expect).abs() <= cfg.tolerance + 1e-8);
        }
    }

    #[test]
    fn backward_transform_sign_branch_precise() {
        let (q, set) = singleton_symmetric();
        let cfg = PropagationConfig::default();
        let g0 = sf(&[1.0, -1.0]);
        let g1 = sf(&[0.6, 0.2]);
        let (gp, gm) =
            backward_product_transform(&set, &[0.0, 0.9], &[g0.clone(), g1.clone()], &cfg).unwrap();
        // Precise model: both branches collapse to the plain nested value.
        let inner = matrix_exponential_apply(&q, &g1, 0.9);
        for x in 0..2 {
            let expect = g0[x] * inner[x];
            assert!((gp[x] - expect).abs() <= 2.0 * cfg.tolerance + 1e-8);
            assert!((gm[x] - expect).abs() <= 2.0 * cfg.tolerance + 1e-8);
        }
    }

    #[test]
    fn evaluate_g_constants_and_annihilator() {
        let (_, set) = singleton_symmetric();
        let m = CredalSet::vacuous(2);
        let cfg = PropagationConfig::default();
        let ones = StateFunction::constant(2, 1.0);
        let (lo, hi) =
            evaluate_g(&set, &m, &[0.4, 1.0], &[ones.clone(), ones.clone()], &cfg).unwrap();
        assert!((lo - 1.0).abs() <= 2.0 * cfg.tolerance);
        assert!((hi - 1.0).abs() <= 2.0 * cfg.tolerance);

        let zero = StateFunction::constant(2, 0.0);
        let (lo, hi) = evaluate_g(&set, &m, &[0.4, 1.0], &[ones, zero], &cfg).unwrap();
        assert!(lo.abs() <= 1e-12 && hi.abs() <= 1e-12);
    }

    #[test]
    fn precise_gbr_matches_bayes() {
        // Two states, symmetric unit-rate chain, single observation factor at
        // t = 0.5, query at s = 0.5 as well: the update reduces to a plain
        // Bayes posterior expectation.
        let (q, set) = singleton_symmetric();
        let m = CredalSet::new(vec![vec![0.4, 0.6]]).unwrap();
        let g = sf(&[0.9, 0.2]);
        let f = sf(&[1.0, -1.0]);
        let cfg = PropagationConfig::default();
        let eps = 1e-7;
        let out = solve_gbr(
            &set,
            &m,
            &[0.5],
            std::slice::from_ref(&g),
            0.5,
            &f,
            eps,
            &cfg,
        )
        .unwrap();

        // Oracle: propagate the initial pmf with the matrix exponential and
        // apply Bayes' rule at t = 0.5.
        let basis0 = sf(&[1.0, 0.0]);
        let col0 = matrix_exponential_apply(&q, &basis0, 0.5);
        let p_half = [
            0.4 * col0[0] + 0.6 * col0[1],
            0.4 * (1.0 - col0[0]) + 0.6 * (1.0 - col0[1]),
        ];
        let den: f64 = (0..2).map(|x| p_half[x] * g[x]).sum();
        let num: f64 = (0..2).map(|x| p_half[x] * g[x] * f[x]).sum();
        let bayes = num / den;
        assert_eq!(out.regime, GbrRegime::AllPositive);
        assert!((out.lower - bayes).abs() <= 2.0 * eps + 1e-6);
        assert!((out.upper - bayes).abs() <= 2.0 * eps + 1e-6);
        assert!(out.lower <= out.upper + 2.0 * out.tolerance);
        assert!(out.iterations <= bisection_iteration_bound(f.min(), f.max(), eps));
    }

    #[test]
    fn sure_event_reduces_to_unconditional() {
        let set = RateMatrixSet::interval_rows(
            vec![vec![0.0, 0.4], vec![0.3, 0.0]],
            vec![vec![0.0, 1.1], vec![0.9, 0.0]],
        )
        .unwrap();
        let m = CredalSet::new(vec![vec![0.5, 0.5], vec![0.9, 0.1]]).unwrap();
        let f = sf(&[2.0, -0.5]);
        let ones = StateFunction::constant(2, 1.0);
        let cfg = PropagationConfig::default();
        let eps = 1e-6;
        let out = solve_gbr(
            &set,
            &m,
            &[0.3, 0.8],
            &[ones.clone(), ones],
            1.2,
            &f,
            eps,
            &cfg,
        )
        .unwrap();
        let unconditional =
            crate::propagation::unconditional_lower_expectation(&set, &m, &f, 1.2, &cfg).unwrap();
        assert!((out.lower - unconditional).abs() <= 3.0 * eps + 1e-6);
    }

    #[test]
    fn zero_factor_is_undefined() {
        let (_, set) = singleton_symmetric();
        let m = CredalSet::vacuous(2);
        let f = sf(&[1.0, -1.0]);
        let zero = StateFunction::constant(2, 0.0);
        let cfg = PropagationConfig::default();
        match solve_gbr(&set, &m, &[0.5], &[zero], 1.0, &f, 1e-6, &cfg) {
            Err(Error::UpdateUndefined) => {}
            other => panic!("expected undefined update, got {other:?}"),
        }
    }

    #[test]
    fn zero_density_point_counterexample() {
        // Binary chain, vacuous initial set, a single point observation at
        // time zero whose density vector is (1/2, 0), f = (1, -1): every
        // surviving precise model conditions on the first state, so the
        // update is exactly 1 even though min f = -1.
        let (_, set) = singleton_symmetric();
        let m = CredalSet::vacuous(2);
        let f = sf(&[1.0, -1.0]);
        let phi = sf(&[0.5, 0.0]);
        let cfg = PropagationConfig::default();
        let out = solve_gbr(&set, &m, &[0.0], &[phi], 0.0, &f, 1e-6, &cfg).unwrap();
        assert_eq!(out.regime, GbrRegime::SomePositive);
        assert!((out.lower - 1.0).abs() <= 1e-12);
        assert!((out.upper - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn conjugacy_of_lower_and_upper() {
        let set = RateMatrixSet::interval_rows(
            vec![vec![0.0, 0.4], vec![0.3, 0.0]],
            vec![vec![0.0, 1.1], vec![0.9, 0.0]],
        )
        .unwrap();
        let m = CredalSet::vacuous(2);
        let f = sf(&[1.5, -0.5]);
        let g = sf(&[0.7, 0.4]);
        let cfg = PropagationConfig::default();
        let eps = 1e-6;
        let out = solve_gbr(
            &set,
            &m,
            &[0.4],
            std::slice::from_ref(&g),
            0.9,
            &f,
            eps,
            &cfg,
        )
        .unwrap();
        let neg = solve_gbr(&set, &m, &[0.4], &[g], 0.9, &f.negated(), eps, &cfg).unwrap();
        assert!((out.lower + neg.upper).abs() <= 1e-12);
        assert!((out.upper + neg.lower).abs() <= 1e-12);
    }
}
