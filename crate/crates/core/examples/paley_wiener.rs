//! Envelope constants of the two test-function families and a look at
//! `|ĝ(r)|` along the real axis.

use geospec::traceformula::{self, SymmetrizedG};

fn main() {
    for g in [SymmetrizedG::bump(0.5, 3.0), SymmetrizedG::bump(0.25, 5.0), SymmetrizedG::modulated(4.0, 2.0)] {
        for points in [200, 400, 800] {
            let fit = traceformula::paley_wiener_fit(&g, 3, points);
            println!("{:?} points {points}: C = {:.4} at r = {:.3}", g.f, fit.constant, fit.argmax);
        }
        for r in [0.0, 1.0, 5.0, 20.0] {
            println!("    |g^({r})| = {:.6e}", traceformula::fourier_hat_real(&g, r).norm());
        }
    }
}
