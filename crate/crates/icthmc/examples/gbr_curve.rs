//! Sampling the curve whose maximum root is the updated lower expectation.
//!
//! The updated lower expectation of `f` is the largest `mu` with
//! `G(mu) >= 0`, where `G` shifts the target by `mu` and takes the lower
//! expectation of the product with the observation likelihoods. The curve is
//! continuous, non-increasing, and concave; this prints it alongside the
//! solved root.

use icthmc::inference::{gbr_curve, solve_gbr};
use icthmc::propagation::{CredalSet, PropagationConfig};
use icthmc::ratesets::{RateMatrixSet, StateFunction};

fn main() {
    let qset = RateMatrixSet::interval_rows(
        vec![vec![0.0, 0.4], vec![0.3, 0.0]],
        vec![vec![0.0, 1.1], vec![0.9, 0.0]],
    )
    .unwrap();
    let mset = CredalSet::vacuous(2);
    let times = vec![0.5];
    let factors = vec![StateFunction::new(vec![0.9, 0.2]).unwrap()];
    let f = StateFunction::new(vec![1.0, -1.0]).unwrap();
    let s = 1.0;
    let cfg = PropagationConfig::default();

    let out = solve_gbr(&qset, &mset, &times, &factors, s, &f, 1e-6, &cfg).unwrap();
    println!(
        "updated expectation in [{:.6}, {:.6}] ({}, {} bisection iterations)",
        out.lower, out.upper, out.regime, out.iterations
    );

    println!("mu,G_lower(mu)");
    for (mu, g) in gbr_curve(&qset, &mset, &times, &factors, s, &f, 21, &cfg).unwrap() {
        let marker = if g >= 0.0 {
            " <= root is right of here"
        } else {
            ""
        };
        println!("{mu:+.3},{g:+.6}{marker}");
    }
}
