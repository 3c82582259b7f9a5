//! Pressure of `s·e₁` against `s`, next to the stable-norm line.

use geospec::thermo::{self, PressureOptions};
use geospec::{forms, geodesics, octagon_group, HarmonicForm};

fn main() {
    let table = geodesics::enumerate(&octagon_group(), [0; 32], 10.0).expect("enumerate");
    let e1 = HarmonicForm::basis(4, 0);
    let snorm = forms::stable_norm_lb(&table, &e1).unwrap();
    let opts = PressureOptions { halfwidth: 0.5, correction: true };
    let scan = thermo::pressure_limit_scan(&table, &e1, &[0.0, 0.5, 1.0, 2.0, 3.0, 4.0], &opts).unwrap();

    println!("stable norm lower bound {snorm:.6}");
    println!("{:>5} {:>10} {:>10} {:>10} {:>8}", "s", "Pr", "slack", "Pr - s|w|", "delta");
    for p in scan {
        let d = thermo::critical_exponent_with(&table, &e1.scaled(p.scale), &opts).unwrap();
        println!(
            "{:>5} {:>10.5} {:>10.5} {:>10.5} {:>8.4}",
            p.scale, p.pressure.value, p.pressure.slack, p.excess, d.value
        );
    }
}
