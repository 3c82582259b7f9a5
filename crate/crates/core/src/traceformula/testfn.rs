//! Test functions and their Fourier transforms.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::numeric::{gauss_legendre, integrate_complex, KahanSum};

/// `e^{−1/x}` for `x > 0`, else 0.
fn flat(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// Base bump `φ(s) = exp(1 − 1/(1 − s²))` on `(−1, 1)`.
pub fn bump(s: f64) -> f64 {
    let u = 1.0 - s * s;
    if u > 0.0 {
        std::f64::consts::E * flat(u)
    } else {
        0.0
    }
}

/// Smooth step: 0 for `x ≤ 0`, 1 for `x ≥ 1`.
pub fn smooth_step(x: f64) -> f64 {
    let a = flat(x);
    let b = flat(1.0 - x);
    if a + b == 0.0 {
        return if x >= 1.0 { 1.0 } else { 0.0 };
    }
    a / (a + b)
}

/// Even plateau: 1 on `[−1/2, 1/2]`, smooth shoulders, support `(−1, 1)`.
pub fn plateau(s: f64) -> f64 {
    let a = s.abs();
    if a <= 0.5 {
        1.0
    } else if a >= 1.0 {
        0.0
    } else {
        smooth_step(2.0 * (1.0 - a))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestFunction {
    /// `φ((s − d)/ε)`, supported in `(d − ε, d + ε)`.
    BumpScaled { eps: f64, d: f64 },
    /// `e^{isξ} ψ(s − t)`, supported in `(t − 1, t + 1)`.
    Modulated { t: f64, xi: f64 },
}

impl TestFunction {
    pub fn eval(&self, s: f64) -> Complex64 {
        match *self {
            TestFunction::BumpScaled { eps, d } => Complex64::new(bump((s - d) / eps), 0.0),
            TestFunction::Modulated { t, xi } => Complex64::from_polar(plateau(s - t), s * xi),
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match *self {
            TestFunction::BumpScaled { eps, d } => (d - eps, d + eps),
            TestFunction::Modulated { t, .. } => (t - 1.0, t + 1.0),
        }
    }

    /// `∫ e^{−irs} f(s) ds` over the support.
    pub fn transform(&self, r: Complex64) -> Complex64 {
        let (lo, hi) = self.support();
        let radius = lo.abs().max(hi.abs());
        let tol = 1e-11 * (radius * r.im.abs()).exp();
        integrate_complex(|s| (-Complex64::i() * r * s).exp() * self.eval(s), lo, hi, tol, 1e-13).value
    }
}

fn gl20() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(20))
}

/// `∫_{−1}^{1} cos(us) p(s) ds` for even `p` supported in `[−1, 1]`, by
/// composite Gauss–Legendre with a panel per period.
pub fn cosine_transform(p: fn(f64) -> f64, u: f64) -> f64 {
    let (x, w) = gl20();
    let panels = (u.abs() / (2.0 * PI)).ceil() as usize + 8;
    let h = 1.0 / panels as f64;
    let mut acc = KahanSum::new();
    for k in 0..panels {
        let c = (k as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(w) {
            let s = c + 0.5 * h * xi;
            acc.add((u * s).cos() * p(s) * wi);
        }
    }
    acc.value() * h
}

/// Transform of the base bump, `φ̂(r) = ∫_{−1}^{1} e^{−irs} φ(s) ds`.
pub fn bump_hat(r: Complex64) -> Complex64 {
    let tol = 1e-12 * r.im.abs().exp();
    integrate_complex(|s| (-Complex64::i() * r * s).exp() * bump(s), -1.0, 1.0, tol, 1e-13).value
}

/// `g(s) = f(s) + f(−s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetrizedG {
    pub f: TestFunction,
}

impl SymmetrizedG {
    pub fn new(f: TestFunction) -> Self {
        SymmetrizedG { f }
    }

    pub fn bump(eps: f64, d: f64) -> Self {
        SymmetrizedG::new(TestFunction::BumpScaled { eps, d })
    }

    pub fn modulated(t: f64, xi: f64) -> Self {
        SymmetrizedG::new(TestFunction::Modulated { t, xi })
    }

    pub fn eval(&self, s: f64) -> Complex64 {
        self.f.eval(s) + self.f.eval(-s)
    }

    /// Radius `T` of the smallest interval `[−T, T]` containing the support.
    pub fn support_radius(&self) -> f64 {
        let (lo, hi) = self.f.support();
        lo.abs().max(hi.abs())
    }

    /// Frequency around which `ĝ` is concentrated, and its spread.
    /// `∫ |g|`.
    pub fn l1_norm(&self) -> f64 {
        match self.f {
            TestFunction::BumpScaled { eps, .. } => 2.0 * eps * cosine_transform(bump, 0.0),
            TestFunction::Modulated { .. } => 2.0 * cosine_transform(plateau, 0.0),
        }
    }

    pub(crate) fn frequency_profile(&self) -> (f64, f64) {
        match self.f {
            TestFunction::BumpScaled { eps, .. } => (0.0, 1.0 / eps),
            TestFunction::Modulated { xi, .. } => (xi.abs(), 1.0),
        }
    }
}

/// `ĝ(r) = ∫ e^{−irs} g(s) ds`.
pub fn fourier_hat(g: &SymmetrizedG, r: Complex64) -> Complex64 {
    if r.im == 0.0 {
        return fourier_hat_real(g, r.re);
    }
    g.f.transform(r) + g.f.transform(-r)
}

/// `ĝ(r)` for real `r`.
pub fn fourier_hat_real(g: &SymmetrizedG, r: f64) -> Complex64 {
    match g.f {
        TestFunction::BumpScaled { eps, d } => {
            Complex64::new(2.0 * eps * cosine_transform(bump, eps * r) * (d * r).cos(), 0.0)
        }
        // f̂(r) = e^{−i(r−ξ)t} ψ̂(r − ξ)
        TestFunction::Modulated { t, xi } => {
            Complex64::from_polar(cosine_transform(plateau, r - xi), -(r - xi) * t)
                + Complex64::from_polar(cosine_transform(plateau, r + xi), (r + xi) * t)
        }
    }
}
