//! Rate matrices, rate-matrix sets and the lower transition rate operator.
//!
//! A rate-matrix set describes the dynamic uncertainty of the chain. Two
//! representations are supported: a finite list of candidate rows per state
//! (the set is the convex hull of all row assemblies) and per-entry interval
//! bounds on the off-diagonal rates. Both have separately specified rows, so
//! the lower transition rate operator decomposes into independent per-state
//! minimisations.

use crate::error::{Error, Result};

/// Relative tolerance for a supplied diagonal that disagrees with the negated
/// off-diagonal row sum. Larger deviations are modelling errors and rejected.
const DIAGONAL_TOLERANCE: f64 = 1e-9;

/// Ordered set of distinct state names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    labels: Vec<String>,
}

impl StateSpace {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidModel("state space must be non-empty".into()));
        }
        for (i, a) in labels.iter().enumerate() {
            if labels[..i].contains(a) {
                return Err(Error::InvalidModel(format!("duplicate state name {a:?}")));
            }
        }
        Ok(Self { labels })
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// A real-valued function on the state space, stored as a vector indexed by
/// state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateFunction {
    values: Vec<f64>,
}

impl StateFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput(
                "state function must be non-empty".into(),
            ));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite value {v}")));
        }
        Ok(Self { values })
    }

    pub fn constant(len: usize, value: f64) -> Self {
        Self {
            values: vec![value; len],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn negated(&self) -> Self {
        Self {
            values: self.values.iter().map(|v| -v).collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn shifted(&self, offset: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v + offset).collect(),
        }
    }

    /// Componentwise product.
    pub fn hadamard(&self, other: &Self) -> Self {
        Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        }
    }

    pub fn dot(&self, weights: &[f64]) -> f64 {
        self.values.iter().zip(weights).map(|(v, w)| v * w).sum()
    }
}

impl std::ops::Index<usize> for StateFunction {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

fn validate_row(row: &[f64], state: usize) -> Result<Vec<f64>> {
    let n = row.len();
    let mut max_abs: f64 = 1.0;
    for (j, &v) in row.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::InvalidModel(format!(
                "row {state}: non-finite entry at column {j}"
            )));
        }
        if j != state && v < 0.0 {
            return Err(Error::InvalidModel(format!(
                "row {state}: negative off-diagonal rate {v} at column {j}"
            )));
        }
        max_abs = max_abs.max(v.abs());
    }
    let off_sum: f64 = (0..n).filter(|&j| j != state).map(|j| row[j]).sum();
    let implied_diag = -off_sum;
    if (row[state] - implied_diag).abs() > DIAGONAL_TOLERANCE * max_abs {
        return Err(Error::InvalidModel(format!(
            "row {state}: row does not sum to zero (diagonal {} vs implied {})",
            row[state], implied_diag
        )));
    }
    // Store the recomputed diagonal so the row sums to zero exactly.
    let mut out = row.to_vec();
    out[state] = implied_diag;
    Ok(out)
}

/// A single rate matrix: non-negative off-diagonal entries, zero row sums.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix {
    rows: Vec<Vec<f64>>,
}

impl RateMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidModel("rate matrix must be non-empty".into()));
        }
        let rows = rows
            .into_iter()
            .enumerate()
            .map(|(i, row)| {
                if row.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: row.len(),
                    });
                }
                validate_row(&row, i)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { rows })
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.rows[i][j]
    }

    /// Plain matrix-vector product `Qf`.
    pub fn apply(&self, f: &StateFunction) -> Result<StateFunction> {
        if f.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: f.len(),
            });
        }
        StateFunction::new(self.rows.iter().map(|row| f.dot(row)).collect())
    }

    /// Largest diagonal magnitude, the uniformization rate.
    pub fn max_diagonal_magnitude(&self) -> f64 {
        (0..self.dim()).fold(0.0, |m, i| m.max(self.rows[i][i].abs()))
    }
}

/// A set of rate matrices with separately specified rows.
#[derive(Debug, Clone, PartialEq)]
pub enum RateMatrixSet {
    /// Per state, a non-empty list of candidate rows; the set is the convex
    /// hull of every matrix assembled by picking one candidate row per state.
    GeneratorRows { rows: Vec<Vec<Vec<f64>>> },
    /// Per off-diagonal entry, bounds `[lower, upper]`; the diagonal is
    /// implied by the zero row sum and never stored. Diagonal positions of
    /// the bound matrices are ignored.
    IntervalRows {
        lower: Vec<Vec<f64>>,
        upper: Vec<Vec<f64>>,
    },
}

impl RateMatrixSet {
    pub fn generator_rows(rows: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidModel(
                "rate-matrix set must be non-empty".into(),
            ));
        }
        let rows = rows
            .into_iter()
            .enumerate()
            .map(|(state, candidates)| {
                if candidates.is_empty() {
                    return Err(Error::InvalidModel(format!(
                        "state {state} has no candidate rows"
                    )));
                }
                candidates
                    .into_iter()
                    .map(|row| {
                        if row.len() != n {
                            return Err(Error::DimensionMismatch {
                                expected: n,
                                got: row.len(),
                            });
                        }
                        validate_row(&row, state)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::GeneratorRows { rows })
    }

    pub fn interval_rows(lower: Vec<Vec<f64>>, upper: Vec<Vec<f64>>) -> Result<Self> {
        let n = lower.len();
        if n == 0 {
            return Err(Error::InvalidModel(
                "rate-matrix set must be non-empty".into(),
            ));
        }
        if upper.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: upper.len(),
            });
        }
        let mut lo = Vec::with_capacity(n);
        let mut hi = Vec::with_capacity(n);
        for i in 0..n {
            if lower[i].len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: lower[i].len(),
                });
            }
            if upper[i].len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: upper[i].len(),
                });
            }
            let mut lrow = vec![0.0; n];
            let mut urow = vec![0.0; n];
            for j in 0..n {
                if i == j {
                    continue;
                }
                let (l, u) = (lower[i][j], upper[i][j]);
                if !l.is_finite() || !u.is_finite() {
                    return Err(Error::InvalidModel(format!(
                        "non-finite rate bound at ({i},{j})"
                    )));
                }
                if l < 0.0 {
                    return Err(Error::InvalidModel(format!(
                        "negative lower rate bound {l} at ({i},{j})"
                    )));
                }
                if l > u {
                    return Err(Error::InvalidModel(format!(
                        "empty rate interval [{l},{u}] at ({i},{j})"
                    )));
                }
                lrow[j] = l;
                urow[j] = u;
            }
            lo.push(lrow);
            hi.push(urow);
        }
        Ok(Self::IntervalRows {
            lower: lo,
            upper: hi,
        })
    }

    /// The singleton set containing exactly one rate matrix.
    pub fn singleton(q: &RateMatrix) -> Self {
        Self::GeneratorRows {
            rows: q.rows().iter().map(|row| vec![row.clone()]).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::GeneratorRows { rows } => rows.len(),
            Self::IntervalRows { lower, .. } => lower.len(),
        }
    }

    fn check_dim(&self, f: &StateFunction) -> Result<()> {
        if f.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: f.len(),
            });
        }
        Ok(())
    }

    /// The lower transition rate operator: per state, the infimum of `(Qf)(x)`
    /// over the set. For candidate rows the infimum over the convex hull is
    /// attained at a candidate; for interval rows the separable linear
    /// objective is minimised entrywise, taking the lower bound whenever
    /// `f(x') >= f(x)` and the upper bound otherwise.
    pub fn lower_rate_apply(&self, f: &StateFunction) -> Result<StateFunction> {
        self.check_dim(f)?;
        let g = match self {
            Self::GeneratorRows { rows } => rows
                .iter()
                .map(|candidates| {
                    candidates
                        .iter()
                        .map(|row| f.dot(row))
                        .fold(f64::INFINITY, f64::min)
                })
                .collect(),
            Self::IntervalRows { lower, upper } => {
                let n = self.dim();
                (0..n)
                    .map(|x| {
                        (0..n)
                            .filter(|&y| y != x)
                            .map(|y| {
                                let d = f[y] - f[x];
                                let q = if d >= 0.0 { lower[x][y] } else { upper[x][y] };
                                q * d
                            })
                            .sum()
                    })
                    .collect()
            }
        };
        StateFunction::new(g)
    }

    /// Conjugate upper operator: `-lower_rate_apply(-f)`.
    pub fn upper_rate_apply(&self, f: &StateFunction) -> Result<StateFunction> {
        Ok(self.lower_rate_apply(&f.negated())?.negated())
    }

    /// Twice the largest achievable diagonal magnitude over the set. An upper
    /// bound on the operator's Lipschitz constant, used for step-size control.
    pub fn norm_bound(&self) -> f64 {
        let max_diag = match self {
            Self::GeneratorRows { rows } => {
                rows.iter()
                    .enumerate()
                    .fold(0.0f64, |m, (state, candidates)| {
                        candidates.iter().fold(m, |m, row| m.max(row[state].abs()))
                    })
            }
            Self::IntervalRows { upper, .. } => {
                let n = self.dim();
                (0..n).fold(0.0f64, |m, x| {
                    m.max((0..n).filter(|&y| y != x).map(|y| upper[x][y]).sum())
                })
            }
        };
        2.0 * max_diag
    }

    /// Number of explicitly enumerable members (row assemblies or box
    /// corners). Degenerate intervals contribute a single choice.
    pub fn member_count(&self) -> u128 {
        match self {
            Self::GeneratorRows { rows } => rows.iter().fold(1u128, |c, candidates| {
                c.saturating_mul(candidates.len() as u128)
            }),
            Self::IntervalRows { lower, upper } => {
                let n = self.dim();
                let mut c = 1u128;
                for x in 0..n {
                    for y in 0..n {
                        if x != y && lower[x][y] < upper[x][y] {
                            c = c.saturating_mul(2);
                        }
                    }
                }
                c
            }
        }
    }

    /// Explicit enumeration of the generator assemblies / box corners.
    pub fn enumerate_members(&self) -> Vec<RateMatrix> {
        match self {
            Self::GeneratorRows { rows } => {
                let mut members = vec![Vec::new()];
                for candidates in rows {
                    let mut next = Vec::with_capacity(members.len() * candidates.len());
                    for partial in &members {
                        for row in candidates {
                            let mut m = partial.clone();
                            m.push(row.clone());
                            next.push(m);
                        }
                    }
                    members = next;
                }
                members
                    .into_iter()
                    .map(|rows| RateMatrix { rows })
                    .collect()
            }
            Self::IntervalRows { lower, upper } => {
                let n = self.dim();
                let free: Vec<(usize, usize)> = (0..n)
                    .flat_map(|x| (0..n).map(move |y| (x, y)))
                    .filter(|&(x, y)| x != y && lower[x][y] < upper[x][y])
                    .collect();
                let mut members = Vec::with_capacity(1 << free.len());
                for mask in 0u64..(1u64 << free.len()) {
                    let mut rows: Vec<Vec<f64>> = lower.clone();
                    for (bit, &(x, y)) in free.iter().enumerate() {
                        if mask >> bit & 1 == 1 {
                            rows[x][y] = upper[x][y];
                        }
                    }
                    for (x, row) in rows.iter_mut().enumerate() {
                        row[x] = -(0..n).filter(|&y| y != x).map(|y| row[y]).sum::<f64>();
                    }
                    members.push(RateMatrix { rows });
                }
                members
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_state_singleton() -> RateMatrixSet {
        let q = RateMatrix::new(vec![vec![-1.0, 1.0], vec![2.0, -2.0]]).unwrap();
        RateMatrixSet::singleton(&q)
    }

    fn two_state_intervals() -> RateMatrixSet {
        RateMatrixSet::interval_rows(
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![vec![0.0, 2.0], vec![3.0, 0.0]],
        )
        .unwrap()
    }

    #[test]
    fn singleton_lower_is_matrix_vector_product() {
        let f = StateFunction::new(vec![1.0, 0.0]).unwrap();
        let g = two_state_singleton().lower_rate_apply(&f).unwrap();
        assert_eq!(g.values(), &[-1.0, 2.0]);
    }

    #[test]
    fn constants_annihilate() {
        let f = StateFunction::constant(2, 3.5);
        for set in [two_state_singleton(), two_state_intervals()] {
            let g = set.lower_rate_apply(&f).unwrap();
            assert!(g.sup_norm() <= 1e-12);
        }
    }

    #[test]
    fn interval_lower_matches_corner_enumeration() {
        let set = two_state_intervals();
        let f = StateFunction::new(vec![1.0, 0.0]).unwrap();
        let g = set.lower_rate_apply(&f).unwrap();
        assert_eq!(g.values(), &[-2.0, 1.0]);
        let h = set.upper_rate_apply(&f).unwrap();
        assert_eq!(h.values(), &[-1.0, 3.0]);
        // Brute-force check over the four corners.
        for x in 0..2 {
            let best = set
                .enumerate_members()
                .iter()
                .map(|q| q.apply(&f).unwrap()[x])
                .fold(f64::INFINITY, f64::min);
            assert!((g[x] - best).abs() < 1e-12);
        }
    }

    #[test]
    fn norm_bounds() {
        assert_eq!(two_state_singleton().norm_bound(), 4.0);
        assert_eq!(two_state_intervals().norm_bound(), 6.0);
        let zero = RateMatrix::new(vec![vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(RateMatrixSet::singleton(&zero).norm_bound(), 0.0);
    }

    #[test]
    fn bad_rows_rejected() {
        assert!(RateMatrix::new(vec![vec![-1.0, 0.5], vec![1.0, -1.0]]).is_err());
        assert!(RateMatrix::new(vec![vec![-1.0, -1.0], vec![1.0, -1.0]]).is_err());
        // Round-off in the supplied diagonal is tolerated and repaired.
        let q = RateMatrix::new(vec![vec![-1.0 + 1e-12, 1.0], vec![1.0, -1.0]]).unwrap();
        assert_eq!(q.entry(0, 0), -1.0);
    }

    #[test]
    fn member_count_skips_degenerate_intervals() {
        let set = RateMatrixSet::interval_rows(
            vec![vec![0.0, 1.0], vec![2.0, 0.0]],
            vec![vec![0.0, 1.0], vec![3.0, 0.0]],
        )
        .unwrap();
        assert_eq!(set.member_count(), 2);
        assert_eq!(set.enumerate_members().len(), 2);
    }

    fn arb_interval_set(n: usize) -> impl Strategy<Value = RateMatrixSet> {
        proptest::collection::vec(proptest::collection::vec((0.0..2.0f64, 0.0..2.0f64), n), n)
            .prop_map(move |bounds| {
                let mut lower = vec![vec![0.0; n]; n];
                let mut upper = vec![vec![0.0; n]; n];
                for x in 0..n {
                    for y in 0..n {
                        if x != y {
                            let (a, b) = bounds[x][y];
                            lower[x][y] = a.min(b);
                            upper[x][y] = a.max(b);
                        }
                    }
                }
                RateMatrixSet::interval_rows(lower, upper).unwrap()
            })
    }

    proptest! {
        #[test]
        fn operator_axioms(set in arb_interval_set(3),
                           f in proptest::collection::vec(-5.0..5.0f64, 3),
                           g in proptest::collection::vec(-5.0..5.0f64, 3),
                           c in -10.0..10.0f64,
                           lambda in 0.0..4.0f64) {
            let f = StateFunction::new(f).unwrap();
            let g = StateFunction::new(g).unwrap();

            // Translation invariance.
            let lf = set.lower_rate_apply(&f).unwrap();
            let lshift = set.lower_rate_apply(&f.shifted(c)).unwrap();
            prop_assert!(lf.sup_distance(&lshift) <= 1e-12 * (1.0 + c.abs()));

            // Non-negative homogeneity.
            let lscaled = set.lower_rate_apply(&f.scaled(lambda)).unwrap();
            prop_assert!(lscaled.sup_distance(&lf.scaled(lambda)) <= 1e-9);

            // Superadditivity.
            let sum = StateFunction::new(
                f.values().iter().zip(g.values()).map(|(a, b)| a + b).collect(),
            ).unwrap();
            let lsum = set.lower_rate_apply(&sum).unwrap();
            let lg = set.lower_rate_apply(&g).unwrap();
            for x in 0..3 {
                prop_assert!(lsum[x] >= lf[x] + lg[x] - 1e-10);
            }

            // Conjugacy.
            let upper = set.upper_rate_apply(&f).unwrap();
            let conj = set.lower_rate_apply(&f.negated()).unwrap().negated();
            prop_assert_eq!(upper.values(), conj.values());

            // Envelope dominance with corner attainment.
            let members = set.enumerate_members();
            for x in 0..3 {
                let best = members.iter()
                    .map(|q| q.apply(&f).unwrap()[x])
                    .fold(f64::INFINITY, f64::min);
                prop_assert!(lf[x] <= best + 1e-10);
                prop_assert!((lf[x] - best).abs() <= 1e-10);
            }
        }
    }
}
