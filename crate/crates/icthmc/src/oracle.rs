//! Independent reference computations used to cross-check the main solver.
//!
//! Everything here is deliberately slow and direct: matrix exponentials via
//! uniformization, product expectations for a single piecewise-constant
//! precise chain, and brute-force enumeration of grid-discretised members of
//! a rate-matrix set. None of it shares code with the propagation or
//! inference routines it is meant to validate.

use crate::error::{Error, Result};
use crate::inference::merge_target;
use crate::propagation::CredalSet;
use crate::ratesets::{RateMatrix, RateMatrixSet, StateFunction};
use statrs::function::gamma::ln_gamma;

/// Default cap on the number of grid processes the brute-force enumeration
/// will visit.
pub const DEFAULT_ENUMERATION_GUARD: u128 = 100_000;

/// Tolerance for matching observation times against piece boundaries.
const BOUNDARY_TOLERANCE: f64 = 1e-9;

/// `exp(Q t) f` via uniformization: Poisson-weighted powers of the
/// sub-stochastic jump matrix `I + Q / lambda`. Weights are evaluated in log
/// space so large `lambda t` does not underflow, and the series is truncated
/// once the remaining Poisson mass cannot move the result by more than
/// `1e-13 * sup|f|`.
pub fn matrix_exponential_apply(q: &RateMatrix, f: &StateFunction, t: f64) -> StateFunction {
    assert!(t >= 0.0, "negative horizon {t}");
    let lambda = q.max_diagonal_magnitude();
    let lt = lambda * t;
    if lt == 0.0 {
        return f.clone();
    }
    let norm = f.sup_norm().max(1.0);
    let n = f.len();
    let mut power = f.values().to_vec();
    let mut sum = vec![0.0; n];
    let mut cumulative = 0.0;
    let mut k: u64 = 0;
    loop {
        let log_w = k as f64 * lt.ln() - lt - ln_gamma(k as f64 + 1.0);
        let w = log_w.exp();
        for x in 0..n {
            sum[x] += w * power[x];
        }
        cumulative += w;
        if (1.0 - cumulative) * norm < 1e-13 {
            break;
        }
        // power <- (I + Q / lambda) power
        let applied = q
            .apply(&StateFunction::new(power.clone()).expect("finite intermediate"))
            .expect("dimensions fixed");
        for x in 0..n {
            power[x] += applied[x] / lambda;
        }
        k += 1;
        assert!(k < 10_000_000, "uniformization series failed to converge");
    }
    StateFunction::new(sum).expect("finite series")
}

/// Dense `exp(Q t)`, column by column.
pub fn matrix_exponential(q: &RateMatrix, t: f64) -> Vec<Vec<f64>> {
    let n = q.dim();
    let mut out = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut basis = vec![0.0; n];
        basis[j] = 1.0;
        let col = matrix_exponential_apply(q, &StateFunction::new(basis).unwrap(), t);
        for x in 0..n {
            out[x][j] = col[x];
        }
    }
    out
}

/// A single precise chain with a piecewise-constant generator on `[0, T]`.
#[derive(Debug, Clone)]
pub struct PiecewiseProcess {
    pieces: Vec<(RateMatrix, f64)>,
}

impl PiecewiseProcess {
    pub fn new(pieces: Vec<(RateMatrix, f64)>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidInput(
                "process needs at least one piece".into(),
            ));
        }
        let dim = pieces[0].0.dim();
        for (q, dt) in &pieces {
            if q.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: q.dim(),
                });
            }
            if !(*dt > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "piece duration {dt} must be positive"
                )));
            }
        }
        Ok(Self { pieces })
    }

    pub fn homogeneous(q: RateMatrix, duration: f64) -> Result<Self> {
        Self::new(vec![(q, duration)])
    }

    pub fn dim(&self) -> usize {
        self.pieces[0].0.dim()
    }

    pub fn total_duration(&self) -> f64 {
        self.pieces.iter().map(|(_, dt)| dt).sum()
    }

    fn boundaries(&self) -> Vec<f64> {
        let mut b = Vec::with_capacity(self.pieces.len() + 1);
        b.push(0.0);
        for (_, dt) in &self.pieces {
            b.push(b.last().unwrap() + dt);
        }
        b
    }
}

/// `E[prod_i g_i(X_{t_i})]` for one precise piecewise-constant chain, by
/// backward propagation with exact matrix exponentials. Every `t_i` must
/// fall on a piece boundary.
pub fn precise_product_expectation(
    process: &PiecewiseProcess,
    initial: &[f64],
    times: &[f64],
    factors: &[StateFunction],
) -> Result<f64> {
    let n = process.dim();
    if initial.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: initial.len(),
        });
    }
    if times.len() != factors.len() {
        return Err(Error::InvalidInput("times and factors must align".into()));
    }
    let boundaries = process.boundaries();
    // Map each observation time to its boundary index.
    let mut at_boundary: Vec<Vec<usize>> = vec![Vec::new(); boundaries.len()];
    for (i, &t) in times.iter().enumerate() {
        let tol = BOUNDARY_TOLERANCE * t.abs().max(1.0);
        match boundaries.iter().position(|&b| (b - t).abs() <= tol) {
            Some(j) => at_boundary[j].push(i),
            None => {
                return Err(Error::InvalidInput(format!(
                    "time {t} does not fall on a piece boundary"
                )))
            }
        }
    }
    let mut h = vec![1.0; n];
    let multiply = |h: &mut Vec<f64>, ids: &[usize]| {
        for &i in ids {
            for x in 0..n {
                h[x] *= factors[i][x];
            }
        }
    };
    multiply(&mut h, &at_boundary[boundaries.len() - 1]);
    for (p, (q, dt)) in process.pieces.iter().enumerate().rev() {
        let m = matrix_exponential(q, *dt);
        let mut next = vec![0.0; n];
        for x in 0..n {
            next[x] = (0..n).map(|j| m[x][j] * h[j]).sum();
        }
        h = next;
        multiply(&mut h, &at_boundary[p]);
    }
    Ok((0..n).map(|x| initial[x] * h[x]).sum())
}

/// Posterior expectation of `f(X_s)` for one precise chain and initial mass
/// function, as the ratio of two product expectations. `None` when the
/// denominator (the probability/density of the observations) is not
/// positive.
pub fn precise_updated_expectation(
    process: &PiecewiseProcess,
    initial: &[f64],
    times: &[f64],
    factors: &[StateFunction],
    s: f64,
    f: &StateFunction,
) -> Result<Option<f64>> {
    let (mtimes, num_factors) = merge_target(times, factors, s, f, 0.0);
    let target_idx = mtimes.iter().position(|&t| t == s).expect("target merged");
    let mut den_factors = num_factors.clone();
    den_factors[target_idx] = match times.iter().position(|&t| t == s) {
        Some(i) => factors[i].clone(),
        None => StateFunction::constant(f.len(), 1.0),
    };
    let den = precise_product_expectation(process, initial, &mtimes, &den_factors)?;
    if den <= 0.0 {
        return Ok(None);
    }
    let num = precise_product_expectation(process, initial, &mtimes, &num_factors)?;
    Ok(Some(num / den))
}

enum Op {
    /// Multiply both carried vectors by the factor at this merged time index
    /// (numerator and denominator variants differ at the target time).
    Mul(usize),
    /// One grid piece of the given segment: apply a member's exponential.
    Piece(usize),
}

struct BruteForce<'a> {
    ops: Vec<Op>,
    num_factors: &'a [StateFunction],
    den_factors: &'a [StateFunction],
    /// `exp_cache[segment][member]` is the dense exponential over one grid
    /// piece of that segment.
    exp_cache: Vec<Vec<Vec<Vec<f64>>>>,
    vertices: &'a [Vec<f64>],
    n: usize,
    /// `scratch[k]` holds the (numerator, denominator) vectors after the
    /// backward ops `0..k` have been applied.
    scratch: Vec<(Vec<f64>, Vec<f64>)>,
    best_lo: f64,
    best_hi: f64,
    any: bool,
}

impl BruteForce<'_> {
    fn run(&mut self, k: usize) {
        if k == self.ops.len() {
            let (num, den) = &self.scratch[k];
            for v in self.vertices {
                let d: f64 = (0..self.n).map(|x| v[x] * den[x]).sum();
                if d > 0.0 {
                    let ratio = (0..self.n).map(|x| v[x] * num[x]).sum::<f64>() / d;
                    self.best_lo = self.best_lo.min(ratio);
                    self.best_hi = self.best_hi.max(ratio);
                    self.any = true;
                }
            }
            return;
        }
        match self.ops[k] {
            Op::Mul(i) => {
                let (head, tail) = self.scratch.split_at_mut(k + 1);
                let (num, den) = &head[k];
                let out = &mut tail[0];
                for x in 0..self.n {
                    out.0[x] = self.num_factors[i][x] * num[x];
                    out.1[x] = self.den_factors[i][x] * den[x];
                }
                self.run(k + 1);
            }
            Op::Piece(seg) => {
                for member in 0..self.exp_cache[seg].len() {
                    {
                        let (head, tail) = self.scratch.split_at_mut(k + 1);
                        let (num, den) = &head[k];
                        let out = &mut tail[0];
                        let m = &self.exp_cache[seg][member];
                        #[allow(clippy::needless_range_loop)]
                        for x in 0..self.n {
                            out.0[x] = (0..self.n).map(|j| m[x][j] * num[j]).sum();
                            out.1[x] = (0..self.n).map(|j| m[x][j] * den[j]).sum();
                        }
                    }
                    self.run(k + 1);
                }
            }
        }
    }
}

/// Brute-force lower and upper updated expectation: enumerate every process
/// that holds one member matrix constant on each grid piece (each segment
/// between consecutive time points, and the stretch back to zero, is split
/// into `pieces_per_segment` equal pieces), combined with every vertex of
/// the initial credal set, and take the extreme posterior ratios.
///
/// Fails with [`Error::EnumerationGuard`] when the number of grid processes
/// exceeds `guard`, and with [`Error::UpdateUndefined`] when no enumerated
/// model gives the observations positive probability.
#[allow(clippy::too_many_arguments)]
pub fn brute_force_updated_lower(
    qset: &RateMatrixSet,
    mset: &CredalSet,
    times: &[f64],
    factors: &[StateFunction],
    s: f64,
    f: &StateFunction,
    pieces_per_segment: usize,
    guard: u128,
) -> Result<(f64, f64)> {
    let n = qset.dim();
    if pieces_per_segment == 0 {
        return Err(Error::InvalidInput(
            "need at least one piece per segment".into(),
        ));
    }
    let (mtimes, num_factors) = merge_target(times, factors, s, f, 0.0);
    let target_idx = mtimes.iter().position(|&t| t == s).expect("target merged");
    let mut den_factors = num_factors.clone();
    den_factors[target_idx] = match times.iter().position(|&t| t == s) {
        Some(i) => factors[i].clone(),
        None => StateFunction::constant(n, 1.0),
    };

    // Segment lengths: the stretch back to zero first, then the gaps between
    // consecutive merged time points; zero-length stretches are dropped.
    let mut segment_lengths = Vec::new();
    if mtimes[0] > 0.0 {
        segment_lengths.push(mtimes[0]);
    }
    for w in mtimes.windows(2) {
        segment_lengths.push(w[1] - w[0]);
    }
    let members = qset.enumerate_members();
    let total_pieces = segment_lengths.len() * pieces_per_segment;
    let count = (members.len() as u128)
        .checked_pow(total_pieces as u32)
        .unwrap_or(u128::MAX);
    if count > guard {
        return Err(Error::EnumerationGuard { count, guard });
    }

    let exp_cache: Vec<Vec<Vec<Vec<f64>>>> = segment_lengths
        .iter()
        .map(|&len| {
            let dt = len / pieces_per_segment as f64;
            members.iter().map(|q| matrix_exponential(q, dt)).collect()
        })
        .collect();

    // Backward op list: factors at the later times first, pieces in between.
    let has_leading = mtimes[0] > 0.0;
    let seg_of_gap = |i: usize| i + usize::from(has_leading);
    let m = mtimes.len();
    let mut ops = Vec::with_capacity(total_pieces + m - 1);
    for i in (0..m - 1).rev() {
        for _ in 0..pieces_per_segment {
            ops.push(Op::Piece(seg_of_gap(i)));
        }
        ops.push(Op::Mul(i));
    }
    if has_leading {
        for _ in 0..pieces_per_segment {
            ops.push(Op::Piece(0));
        }
    }

    let mut scratch = vec![(vec![0.0; n], vec![0.0; n]); ops.len() + 1];
    scratch[0] = (
        num_factors[m - 1].values().to_vec(),
        den_factors[m - 1].values().to_vec(),
    );
    let mut search = BruteForce {
        ops,
        num_factors: &num_factors,
        den_factors: &den_factors,
        exp_cache,
        vertices: mset.vertices(),
        n,
        scratch,
        best_lo: f64::INFINITY,
        best_hi: f64::NEG_INFINITY,
        any: false,
    };
    search.run(0);
    if !search.any {
        return Err(Error::UpdateUndefined);
    }
    Ok((search.best_lo, search.best_hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::solve_gbr;
    use crate::propagation::PropagationConfig;

    fn sf(values: &[f64]) -> StateFunction {
        StateFunction::new(values.to_vec()).unwrap()
    }

    fn symmetric() -> RateMatrix {
        RateMatrix::new(vec![vec![-1.0, 1.0], vec![1.0, -1.0]]).unwrap()
    }

    #[test]
    fn exponential_matches_closed_form() {
        // For the symmetric unit-rate binary chain the semigroup relaxes f
        // towards its mean at rate exp(-2t).
        let q = symmetric();
        let f = sf(&[2.0, -0.4]);
        for &t in &[0.0, 0.3, 1.7, 40.0] {
            let out = matrix_exponential_apply(&q, &f, t);
            let mean = 0.5 * (f[0] + f[1]);
            let decay = (-2.0 * t).exp();
            for x in 0..2 {
                let expect = mean + (f[x] - mean) * decay;
                assert!(
                    (out[x] - expect).abs() < 1e-11,
                    "t={t} x={x}: {} vs {expect}",
                    out[x]
                );
            }
        }
    }

    #[test]
    fn exponential_rows_are_stochastic() {
        let q = RateMatrix::new(vec![
            vec![-2.0, 1.5, 0.5],
            vec![0.2, -0.7, 0.5],
            vec![1.0, 2.0, -3.0],
        ])
        .unwrap();
        let m = matrix_exponential(&q, 0.8);
        for row in &m {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-11);
            assert!(row.iter().all(|&p| p >= -1e-13));
        }
    }

    #[test]
    fn product_expectation_single_factor() {
        let q = symmetric();
        let f = sf(&[1.0, -1.0]);
        let process = PiecewiseProcess::homogeneous(q.clone(), 0.6).unwrap();
        let value =
            precise_product_expectation(&process, &[0.7, 0.3], &[0.6], std::slice::from_ref(&f))
                .unwrap();
        let propagated = matrix_exponential_apply(&q, &f, 0.6);
        let expect = 0.7 * propagated[0] + 0.3 * propagated[1];
        assert!((value - expect).abs() < 1e-12);
    }

    #[test]
    fn piecewise_splitting_is_consistent() {
        let q = symmetric();
        let f = sf(&[0.4, 1.3]);
        let g = sf(&[0.9, 0.1]);
        let single = PiecewiseProcess::new(vec![(q.clone(), 0.5), (q.clone(), 0.5)]).unwrap();
        let split =
            PiecewiseProcess::new(vec![(q.clone(), 0.25), (q.clone(), 0.25), (q, 0.5)]).unwrap();
        let args: (&[f64], &[f64]) = (&[0.5, 0.5], &[0.5, 1.0]);
        let a =
            precise_product_expectation(&single, args.0, args.1, &[g.clone(), f.clone()]).unwrap();
        let b = precise_product_expectation(&split, args.0, args.1, &[g, f]).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn updated_expectation_is_bayes() {
        let q = symmetric();
        let process = PiecewiseProcess::homogeneous(q.clone(), 0.5).unwrap();
        let g = sf(&[0.9, 0.2]);
        let f = sf(&[1.0, -1.0]);
        let initial = [0.4, 0.6];
        let value = precise_updated_expectation(
            &process,
            &initial,
            &[0.5],
            std::slice::from_ref(&g),
            0.5,
            &f,
        )
        .unwrap()
        .unwrap();
        // Direct Bayes at t = 0.5.
        let e0 = matrix_exponential_apply(&q, &sf(&[1.0, 0.0]), 0.5);
        let p = [
            initial[0] * e0[0] + initial[1] * e0[1],
            initial[0] * (1.0 - e0[0]) + initial[1] * (1.0 - e0[1]),
        ];
        let den: f64 = (0..2).map(|x| p[x] * g[x]).sum();
        let num: f64 = (0..2).map(|x| p[x] * g[x] * f[x]).sum();
        assert!((value - num / den).abs() < 1e-12);
    }

    #[test]
    fn zero_denominator_yields_none() {
        let q = symmetric();
        let process = PiecewiseProcess::homogeneous(q, 0.5).unwrap();
        let zero = StateFunction::constant(2, 0.0);
        let f = sf(&[1.0, -1.0]);
        let out =
            precise_updated_expectation(&process, &[0.5, 0.5], &[0.5], &[zero], 0.5, &f).unwrap();
        assert!(out.is_none());
    }

    #[test]
    fn brute_force_singleton_reduces_to_precise() {
        let q = symmetric();
        let set = RateMatrixSet::singleton(&q);
        let m = CredalSet::new(vec![vec![0.4, 0.6]]).unwrap();
        let g = sf(&[0.9, 0.2]);
        let f = sf(&[1.0, -1.0]);
        let (lo, hi) = brute_force_updated_lower(
            &set,
            &m,
            &[0.5],
            std::slice::from_ref(&g),
            1.0,
            &f,
            3,
            1_000,
        )
        .unwrap();
        let process = PiecewiseProcess::new(vec![(q.clone(), 0.5), (q, 0.5)]).unwrap();
        let precise = precise_updated_expectation(&process, &[0.4, 0.6], &[0.5], &[g], 1.0, &f)
            .unwrap()
            .unwrap();
        assert!((lo - precise).abs() < 1e-10);
        assert!((hi - precise).abs() < 1e-10);
    }

    #[test]
    fn brute_force_brackets_the_solver() {
        // One degenerate row keeps the corner count at two, so twelve grid
        // pieces stay well inside the enumeration guard.
        let set = RateMatrixSet::interval_rows(
            vec![vec![0.0, 0.4], vec![0.3, 0.0]],
            vec![vec![0.0, 0.9], vec![0.3, 0.0]],
        )
        .unwrap();
        let m = CredalSet::vacuous(2);
        let g = sf(&[0.8, 0.3]);
        let f = sf(&[1.0, 0.0]);
        let cfg = PropagationConfig::default();
        let solved = solve_gbr(
            &set,
            &m,
            &[0.4],
            std::slice::from_ref(&g),
            0.9,
            &f,
            1e-5,
            &cfg,
        )
        .unwrap();
        let (lo, hi) =
            brute_force_updated_lower(&set, &m, &[0.4], &[g], 0.9, &f, 6, 100_000).unwrap();
        // Grid processes are a subset of all consistent processes, so the
        // brute-force extremes sit inside the solved interval, up to grid
        // and bisection error.
        assert!(lo >= solved.lower - 5e-3, "{lo} vs {}", solved.lower);
        assert!(hi <= solved.upper + 5e-3, "{hi} vs {}", solved.upper);
        assert!((lo - solved.lower).abs() < 2e-2);
        assert!((hi - solved.upper).abs() < 2e-2);
    }

    #[test]
    fn guard_rejects_large_enumerations() {
        let set = RateMatrixSet::interval_rows(
            vec![vec![0.0, 0.4], vec![0.3, 0.0]],
            vec![vec![0.0, 0.9], vec![0.8, 0.0]],
        )
        .unwrap();
        let m = CredalSet::vacuous(2);
        let g = sf(&[0.8, 0.3]);
        let f = sf(&[1.0, 0.0]);
        match brute_force_updated_lower(&set, &m, &[0.4], &[g], 0.9, &f, 10, 100) {
            Err(Error::EnumerationGuard { count, guard }) => {
                assert!(count > guard);
            }
            other => panic!("expected guard error, got {other:?}"),
        }
    }
}
