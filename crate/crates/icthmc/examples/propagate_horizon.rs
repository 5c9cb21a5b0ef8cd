//! Conditional and unconditional lower expectations over a time horizon.

use icthmc::propagation::{
    conditional_lower_expectation, conditional_upper_expectation, unconditional_lower_expectation,
    CredalSet, PropagationConfig,
};
use icthmc::ratesets::{RateMatrixSet, StateFunction};

fn main() {
    let set = RateMatrixSet::interval_rows(
        vec![vec![0.0, 0.4], vec![0.3, 0.0]],
        vec![vec![0.0, 1.1], vec![0.9, 0.0]],
    )
    .unwrap();
    let f = StateFunction::new(vec![1.0, 0.0]).unwrap();
    let cfg = PropagationConfig::default();

    println!("horizon  lower(per state)          upper(per state)");
    for horizon in [0.0, 0.25, 0.5, 1.0, 2.0, 4.0] {
        let lo = conditional_lower_expectation(&set, &f, horizon, &cfg).unwrap();
        let hi = conditional_upper_expectation(&set, &f, horizon, &cfg).unwrap();
        println!(
            "{horizon:<7}  [{:.6}, {:.6}]      [{:.6}, {:.6}]   ({} steps)",
            lo.values[0], lo.values[1], hi.values[0], hi.values[1], lo.steps
        );
    }

    // Folding in an initial credal set gives a single number per horizon.
    let m = CredalSet::new(vec![vec![0.9, 0.1], vec![0.6, 0.4]]).unwrap();
    let v = unconditional_lower_expectation(&set, &m, &f, 1.0, &cfg).unwrap();
    println!("unconditional lower at t=1: {v:.6}");
}
