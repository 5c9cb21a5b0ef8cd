//! The lower transition rate operator on interval and candidate-row sets.

use icthmc::ratesets::{RateMatrixSet, StateFunction};

fn main() {
    // Off-diagonal rate bounds for a two-state chain.
    let set = RateMatrixSet::interval_rows(
        vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        vec![vec![0.0, 2.0], vec![3.0, 0.0]],
    )
    .unwrap();

    let f = StateFunction::new(vec![1.0, -1.0]).unwrap();
    let lower = set.lower_rate_apply(&f).unwrap();
    let upper = set.upper_rate_apply(&f).unwrap();
    println!("f            = {:?}", f.values());
    println!("lower Q f    = {:?}", lower.values());
    println!("upper Q f    = {:?}", upper.values());
    println!("norm bound   = {}", set.norm_bound());

    // The infimum is attained at a corner of the interval set: compare with
    // explicit enumeration of the extreme members.
    println!("members      = {}", set.member_count());
    for (i, q) in set.enumerate_members().iter().enumerate() {
        println!("  member {i}: Qf = {:?}", q.apply(&f).unwrap().values());
    }

    // Candidate rows per state work the same way.
    let rows = RateMatrixSet::generator_rows(vec![
        vec![vec![-1.0, 1.0], vec![-2.0, 2.0]],
        vec![vec![3.0, -3.0]],
    ])
    .unwrap();
    println!(
        "row set: lower Q f = {:?}",
        rows.lower_rate_apply(&f).unwrap().values()
    );
}
