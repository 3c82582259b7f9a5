//! `I(t, σ)` by both methods, against its diagonal restriction.

use geospec::traceformula::{self, AverageMethod};
use geospec::{geodesics, octagon_group, HarmonicForm};

fn main() {
    let table = geodesics::enumerate(&octagon_group(), [0; 32], 9.0).expect("enumerate");
    let form = HarmonicForm::new(vec![0.3, -0.2, 0.0, 0.1]);
    println!("{:>4} {:>5} {:>14} {:>10} {:>14}", "t", "sigma", "I", "rel gap", "diagonal");
    for t in [4.0, 5.0, 6.0, 7.0, 8.0] {
        let diag = traceformula::diagonal_bound(&table, &form, t).unwrap();
        for sigma in [0.5, 2.0, 8.0] {
            let a = traceformula::gaussian_average(&table, &form, t, sigma, AverageMethod::Direct).unwrap();
            let b = traceformula::gaussian_average(&table, &form, t, sigma, AverageMethod::Quadrature).unwrap();
            println!("{t:>4} {sigma:>5} {a:>14.6e} {:>10.1e} {diag:>14.6e}", (a - b).abs() / a);
        }
    }
}
