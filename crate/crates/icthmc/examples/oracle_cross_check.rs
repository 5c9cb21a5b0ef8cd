//! Cross-checking the solver against brute-force enumeration.
//!
//! The oracle enumerates every process that holds an extreme member matrix
//! constant on each grid piece; its minimum posterior converges to the
//! solver's lower expectation from above as the grid refines.

use icthmc::inference::solve_gbr;
use icthmc::oracle::brute_force_updated_lower;
use icthmc::propagation::{CredalSet, PropagationConfig};
use icthmc::ratesets::{RateMatrixSet, StateFunction};

fn main() {
    // One imprecise row keeps the enumeration tiny: two corner matrices.
    let qset = RateMatrixSet::interval_rows(
        vec![vec![0.0, 0.2], vec![0.5, 0.0]],
        vec![vec![0.0, 0.9], vec![0.5, 0.0]],
    )
    .unwrap();
    let mset = CredalSet::vacuous(2);
    let times = vec![0.5];
    let factors = vec![StateFunction::new(vec![0.8, 0.3]).unwrap()];
    let f = StateFunction::new(vec![1.0, 0.0]).unwrap();
    let s = 0.5;
    let cfg = PropagationConfig::default();

    let solved = solve_gbr(&qset, &mset, &times, &factors, s, &f, 1e-6, &cfg).unwrap();
    println!("solver lower: {:.8}", solved.lower);

    println!("{:>5}  {:>12}  {:>10}", "grid", "oracle lower", "gap");
    for m in [1usize, 2, 4, 8, 16] {
        let (lo, _) =
            brute_force_updated_lower(&qset, &mset, &times, &factors, s, &f, m, 100_000).unwrap();
        println!("{m:>5}  {lo:>12.8}  {:>10.3e}", lo - solved.lower);
    }
}
