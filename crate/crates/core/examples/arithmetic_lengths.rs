//! Lengths `log x_m` of the arithmetic spectrum and the `L(m)` sums of a
//! small quaternion subgroup.

use geospec::surfaces::{self, ArithmeticModel, Model};
use geospec::traceformula;
use geospec::{geodesics, length_from_trace, HarmonicForm};

fn main() {
    for m in 2..=8u64 {
        let x = surfaces::xm(m).unwrap().value();
        let l = length_from_trace(2.0 * m as f64).unwrap().value();
        println!("m = {m}: log x_m = {x:.12}  from trace {l:.12}");
    }

    let arith = ArithmeticModel::new(2, 5, &[[2, 2, 1, 1], [3, 3, 0, 1]], false).expect("model");
    let model = Model::Arithmetic(arith.clone());
    let table = geodesics::enumerate_arithmetic(&arith, model.digest(), 7.0, 8).expect("enumerate");
    let form = HarmonicForm::new(vec![0.2, -0.1]);
    println!("\n{} classes ({}); L(m):", table.len(), arith.spectrum_label());
    for m in 2.. {
        if surfaces::xm(m).unwrap().value() > table.cutoff_l {
            break;
        }
        let lm = traceformula::arithmetic_lm(&table, &model, &form, m).unwrap();
        println!("  m = {m}: {:.6e} over {} classes", lm.value, lm.count);
    }
}
