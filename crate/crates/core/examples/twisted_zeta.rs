//! Truncated `log Z(s, ω)` to the right of the estimated abscissa.

use geospec::bounds;
use geospec::thermo;
use geospec::{geodesics, octagon_group, HarmonicForm};
use num_complex::Complex64;

fn main() {
    let table = geodesics::enumerate(&octagon_group(), [0; 32], 9.0).expect("enumerate");
    let form = HarmonicForm::new(vec![0.5, 0.0, -0.25, 0.0]);
    let d = thermo::critical_exponent_estimate(&table, &form).unwrap();
    let abscissa = d.value + d.slack;
    println!("abscissa {abscissa:.4}");
    let grid: Vec<Complex64> = [0.5, 1.0, 2.0]
        .iter()
        .flat_map(|re| [0.0, 3.0, 10.0].map(|im| Complex64::new(abscissa + re, im)))
        .collect();
    let values = bounds::zeta_grid(&table, &form, &grid, bounds::DEFAULT_K_MAX, abscissa).unwrap();
    bounds::write_zeta_csv(&values, std::io::stdout().lock()).unwrap();
}
