//! Spectral-gap bound formulas, first from raw numbers and then from table
//! estimates.

use geospec::bounds::{self, GapInputs, InputSlacks};
use geospec::thermo::{self, PressureOptions};
use geospec::{forms, geodesics, octagon_group, HarmonicForm};

fn main() {
    let r = bounds::gap_bounds(2.0, 3.6, 1.8).unwrap();
    print!("{}", r.to_text());
    for beta in [0.25, 1e-2, 1e-4] {
        println!(
            "beta {beta:<7} A = {:.6}  A_press = {:.6}",
            bounds::admissible_a(beta, 2.0, 1.8),
            bounds::admissible_a_press(beta, 2.0, 3.6)
        );
    }

    let table = geodesics::enumerate(&octagon_group(), [0; 32], 10.0).expect("enumerate");
    let form = HarmonicForm::new(vec![2.0, 0.0, 0.0, 0.0]);
    let t = thermo::largest_certified_t(&table, 0.5);
    let opts = PressureOptions { halfwidth: 0.5, correction: true };
    let p1 = thermo::pressure_estimate_with(&table, &form, t, &opts).unwrap();
    let p2 = thermo::pressure_estimate_with(&table, &form.scaled(2.0), t, &opts).unwrap();
    let snorm = forms::stable_norm_lb(&table, &form).unwrap();
    let inputs = GapInputs {
        pr1: p1.value,
        pr2: p2.value,
        snorm,
        slacks: InputSlacks { pr1: p1.slack, pr2: p2.slack, snorm: 0.0 },
    };
    println!("\nomega = 2 e1 on the octagon, L = 10");
    match bounds::gap_report(inputs, false) {
        Ok(r) => print!("{}", r.to_text()),
        Err(e) => println!("inputs rejected: {e}"),
    }
    if let Some(w) = bounds::nonque_witness(&table, &form).unwrap() {
        println!("witness {} (length {:.4})", w.canon, w.length);
    }
}
