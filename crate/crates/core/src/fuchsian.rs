//! Möbius-matrix algebra for Fuchsian groups.
//!
//! Elements are 2×2 matrices of determinant one, identified with their
//! negatives (PSL(2,ℝ)). Two backings exist: plain `f64` matrices, and exact
//! quaternion-type matrices
//!
//! ```text
//! [ α      β·√p ]
//! [ β̄·√p   ᾱ    ]      α, β ∈ ℤ[√n]
//! ```
//!
//! whose entries are carried as [`QuadInt`]s with arbitrary-width components.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FuchsianError {
    #[error("element with |trace| = {0} is not hyperbolic")]
    NonHyperbolic(f64),
    #[error("backing mismatch: {0}")]
    BackingMismatch(&'static str),
    #[error("determinant {0} deviates from 1")]
    BadDeterminant(f64),
    #[error("exact value does not fit in a double")]
    Overflow,
}

/// `a + b√n` with arbitrary-width integer components.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuadInt {
    pub a: BigInt,
    pub b: BigInt,
    pub n: u64,
}

impl QuadInt {
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>, n: u64) -> Self {
        QuadInt { a: a.into(), b: b.into(), n }
    }

    pub fn zero(n: u64) -> Self {
        Self::new(0, 0, n)
    }

    pub fn one(n: u64) -> Self {
        Self::new(1, 0, n)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Galois conjugate `a − b√n`.
    pub fn conj(&self) -> Self {
        QuadInt { a: self.a.clone(), b: -&self.b, n: self.n }
    }

    /// Field norm `a² − n b²`.
    pub fn norm(&self) -> BigInt {
        &self.a * &self.a - BigInt::from(self.n) * &self.b * &self.b
    }

    /// Nearest double to `a + b√n`.
    ///
    /// When the two parts have opposite signs the sum is rewritten as
    /// `(a² − n b²) / (a − b√n)` so that no cancellation occurs.
    pub fn to_f64(&self) -> Result<f64, FuchsianError> {
        let a = big_to_f64(&self.a)?;
        let b = big_to_f64(&self.b)?;
        let root = (self.n as f64).sqrt();
        let direct = a + b * root;
        if self.a.is_zero() || self.b.is_zero() || self.a.sign() == self.b.sign() {
            return Ok(direct);
        }
        let norm = big_to_f64(&self.norm())?;
        let denom = a - b * root;
        let v = norm / denom;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(FuchsianError::Overflow)
        }
    }

    fn check_ring(&self, other: &Self) {
        assert_eq!(self.n, other.n, "QuadInt ring mismatch: √{} vs √{}", self.n, other.n);
    }
}

fn big_to_f64(x: &BigInt) -> Result<f64, FuchsianError> {
    match x.to_f64() {
        Some(v) if v.is_finite() => Ok(v),
        _ => Err(FuchsianError::Overflow),
    }
}

impl Add for &QuadInt {
    type Output = QuadInt;
    fn add(self, rhs: &QuadInt) -> QuadInt {
        self.check_ring(rhs);
        QuadInt { a: &self.a + &rhs.a, b: &self.b + &rhs.b, n: self.n }
    }
}

impl Sub for &QuadInt {
    type Output = QuadInt;
    fn sub(self, rhs: &QuadInt) -> QuadInt {
        self.check_ring(rhs);
        QuadInt { a: &self.a - &rhs.a, b: &self.b - &rhs.b, n: self.n }
    }
}

impl Mul for &QuadInt {
    type Output = QuadInt;
    fn mul(self, rhs: &QuadInt) -> QuadInt {
        self.check_ring(rhs);
        let n = BigInt::from(self.n);
        QuadInt {
            a: &self.a * &rhs.a + n * &self.b * &rhs.b,
            b: &self.a * &rhs.b + &self.b * &rhs.a,
            n: self.n,
        }
    }
}

impl Mul<&QuadInt> for &BigInt {
    type Output = QuadInt;
    fn mul(self, rhs: &QuadInt) -> QuadInt {
        QuadInt { a: self * &rhs.a, b: self * &rhs.b, n: rhs.n }
    }
}

impl Neg for &QuadInt {
    type Output = QuadInt;
    fn neg(self) -> QuadInt {
        QuadInt { a: -&self.a, b: -&self.b, n: self.n }
    }
}

impl fmt::Display for QuadInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:+}√{}", self.a, self.b, self.n)
    }
}

/// A 2×2 real matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };

    /// Builds a matrix and checks `|det − 1| ≤ 1e−12`.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, FuchsianError> {
        let m = Mat2 { a, b, c, d };
        let det = m.det();
        if (det - 1.0).abs() > 1e-12 {
            return Err(FuchsianError::BadDeterminant(det));
        }
        Ok(m)
    }

    pub const fn new_unchecked(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// Inverse of a determinant-one matrix.
    pub fn inverse(&self) -> Mat2 {
        Mat2 { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn abs_trace(&self) -> f64 {
        self.trace().abs()
    }

    /// Half the squared Frobenius norm; equals `cosh d(i, M·i)` in the upper
    /// half-plane.
    pub fn cosh_displacement(&self) -> f64 {
        0.5 * (self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d)
    }

    /// Rescales so the determinant is exactly one up to rounding.
    pub fn normalized(&self) -> Mat2 {
        let s = self.det().abs().sqrt().recip();
        Mat2 { a: self.a * s, b: self.b * s, c: self.c * s, d: self.d * s }
    }

    /// Entrywise distance to `±other`.
    pub fn psl_distance(&self, other: &Mat2) -> f64 {
        let plus = (self.a - other.a)
            .abs()
            .max((self.b - other.b).abs())
            .max((self.c - other.c).abs())
            .max((self.d - other.d).abs());
        let minus = (self.a + other.a)
            .abs()
            .max((self.b + other.b).abs())
            .max((self.c + other.c).abs())
            .max((self.d + other.d).abs());
        plus.min(minus)
    }

    /// Rotation by `theta` about `i` in the upper half-plane.
    pub fn rotation(theta: f64) -> Mat2 {
        let (s, c) = (0.5 * theta).sin_cos();
        Mat2 { a: c, b: -s, c: s, d: c }
    }

    /// Translation by hyperbolic distance `dist` along the geodesic through
    /// `i` in direction angle zero.
    pub fn translation(dist: f64) -> Mat2 {
        let e = (0.5 * dist).exp();
        Mat2 { a: e, b: 0.0, c: 0.0, d: e.recip() }
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    #[inline]
    fn mul(self, r: Mat2) -> Mat2 {
        Mat2 {
            a: self.a * r.a + self.b * r.c,
            b: self.a * r.b + self.b * r.d,
            c: self.c * r.a + self.d * r.c,
            d: self.c * r.b + self.d * r.d,
        }
    }
}

/// Exact element `[[α, β√p], [β̄√p, ᾱ]]` with `αᾱ − p ββ̄ = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuaternionMatrix {
    pub alpha: QuadInt,
    pub beta: QuadInt,
    pub p: u64,
}

impl QuaternionMatrix {
    pub fn identity(n: u64, p: u64) -> Self {
        QuaternionMatrix { alpha: QuadInt::one(n), beta: QuadInt::zero(n), p }
    }

    /// Reduced norm `αᾱ − p ββ̄` (the determinant).
    pub fn det(&self) -> BigInt {
        self.alpha.norm() - BigInt::from(self.p) * self.beta.norm()
    }

    /// Exact trace `2·Re α = 2a`.
    pub fn trace(&self) -> BigInt {
        BigInt::from(2) * &self.alpha.a
    }

    pub fn inverse(&self) -> Self {
        QuaternionMatrix { alpha: self.alpha.conj(), beta: -&self.beta, p: self.p }
    }

    /// Representative of `±self` with a fixed sign convention.
    pub fn psl_normalized(&self) -> Self {
        let first = [&self.alpha.a, &self.alpha.b, &self.beta.a, &self.beta.b]
            .into_iter()
            .find(|x| !x.is_zero())
            .expect("zero matrix");
        if first.is_negative() {
            QuaternionMatrix { alpha: -&self.alpha, beta: -&self.beta, p: self.p }
        } else {
            self.clone()
        }
    }

    pub fn to_float(&self) -> Result<Mat2, FuchsianError> {
        let sp = (self.p as f64).sqrt();
        Ok(Mat2 {
            a: self.alpha.to_f64()?,
            b: self.beta.to_f64()? * sp,
            c: self.beta.conj().to_f64()? * sp,
            d: self.alpha.conj().to_f64()?,
        })
    }

    fn mul_exact(&self, r: &QuaternionMatrix) -> Result<QuaternionMatrix, FuchsianError> {
        if self.p != r.p || self.alpha.n != r.alpha.n {
            return Err(FuchsianError::BackingMismatch("exact elements over different (n, p)"));
        }
        let p = BigInt::from(self.p);
        // [[α1, β1√p],[β̄1√p, ᾱ1]]·[[α2, β2√p],[β̄2√p, ᾱ2]]
        let alpha = &(&self.alpha * &r.alpha) + &(&p * &(&self.beta * &r.beta.conj()));
        let beta = &(&self.alpha * &r.beta) + &(&self.beta * &r.alpha.conj());
        Ok(QuaternionMatrix { alpha, beta, p: self.p })
    }
}

/// A group element with exact or floating backing.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupElement {
    Exact(QuaternionMatrix),
    Float(Mat2),
}

impl GroupElement {
    pub fn is_exact(&self) -> bool {
        matches!(self, GroupElement::Exact(_))
    }

    pub fn to_float(&self) -> Result<Mat2, FuchsianError> {
        match self {
            GroupElement::Exact(q) => q.to_float(),
            GroupElement::Float(m) => Ok(*m),
        }
    }

    pub fn inverse(&self) -> GroupElement {
        match self {
            GroupElement::Exact(q) => GroupElement::Exact(q.inverse()),
            GroupElement::Float(m) => GroupElement::Float(m.inverse()),
        }
    }

    /// `|trace|` as a double (PSL convention).
    pub fn abs_trace(&self) -> Result<f64, FuchsianError> {
        match self {
            GroupElement::Exact(q) => Ok(big_to_f64(&q.trace().abs())?),
            GroupElement::Float(m) => Ok(m.abs_trace()),
        }
    }

    pub fn length(&self) -> Result<LengthValue, FuchsianError> {
        length_from_trace(self.abs_trace()?)
    }
}

/// Matrix product. Exact × exact stays exact; anything involving a float
/// backing is computed in floating point.
pub fn mul(g: &GroupElement, h: &GroupElement) -> Result<GroupElement, FuchsianError> {
    match (g, h) {
        (GroupElement::Exact(x), GroupElement::Exact(y)) => Ok(GroupElement::Exact(x.mul_exact(y)?)),
        _ => Ok(GroupElement::Float(g.to_float()? * h.to_float()?)),
    }
}

/// Matrix product that refuses to fall back to floating point.
pub fn mul_exact(g: &GroupElement, h: &GroupElement) -> Result<GroupElement, FuchsianError> {
    match (g, h) {
        (GroupElement::Exact(x), GroupElement::Exact(y)) => Ok(GroupElement::Exact(x.mul_exact(y)?)),
        _ => Err(FuchsianError::BackingMismatch("exact product requested from a float input")),
    }
}

/// Hyperbolic translation length.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LengthValue(f64);

impl LengthValue {
    pub fn new(value: f64) -> Option<Self> {
        (value > 0.0 && value.is_finite()).then_some(LengthValue(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for LengthValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `arccosh(1 + excess)` with one Newton polish step.
///
/// Taking the excess `x − 1` as input keeps full relative accuracy near the
/// parabolic boundary.
pub fn arccosh_from_excess(excess: f64) -> f64 {
    debug_assert!(excess >= 0.0);
    let x = 1.0 + excess;
    let mut y = (excess + (excess * (x + 1.0)).sqrt()).ln_1p();
    // f(y) = cosh y − x = 2 sinh²(y/2) − excess
    let sh = (0.5 * y).sinh();
    let f = 2.0 * sh * sh - excess;
    let df = y.sinh();
    if df > 0.0 {
        y -= f / df;
    }
    y
}

pub fn arccosh(x: f64) -> f64 {
    arccosh_from_excess(x - 1.0)
}

/// Translation length `2·arccosh(|t|/2)` of an element with trace `t`.
pub fn length_from_trace(t: f64) -> Result<LengthValue, FuchsianError> {
    let at = t.abs();
    if !(at > 2.0) || !at.is_finite() {
        return Err(FuchsianError::NonHyperbolic(at));
    }
    let len = 2.0 * arccosh_from_excess(0.5 * (at - 2.0));
    LengthValue::new(len).ok_or(FuchsianError::NonHyperbolic(at))
}

/// Trace of `g^k` from the trace of `g` (Chebyshev recursion).
pub fn power_trace(t: f64, k: u32) -> f64 {
    assert!(k >= 1, "power_trace needs k ≥ 1");
    let (mut prev, mut cur) = (2.0, t);
    for _ in 1..k {
        let next = t * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn sample() -> QuaternionMatrix {
        // (a, b, c, d) = (2, 2, 1, 1), n = 2, p = 5
        QuaternionMatrix { alpha: QuadInt::new(2, 2, 2), beta: QuadInt::new(1, 1, 2), p: 5 }
    }

    #[test]
    fn exact_element_has_unit_determinant() {
        assert_eq!(sample().det(), BigInt::from(1));
    }

    #[test]
    fn identity_and_inverse_products() {
        let g = GroupElement::Exact(sample());
        let id = GroupElement::Exact(QuaternionMatrix::identity(2, 5));
        assert_eq!(mul(&id, &g).unwrap(), g);
        let e = mul(&g, &g.inverse()).unwrap();
        assert_eq!(e, id);

        let f = GroupElement::Float(g.to_float().unwrap());
        let fe = mul(&f, &f.inverse()).unwrap().to_float().unwrap();
        assert!(fe.psl_distance(&Mat2::IDENTITY) < 1e-12);
    }

    #[test]
    fn square_trace_follows_cayley_hamilton() {
        let g = GroupElement::Exact(sample());
        let g2 = mul(&g, &g).unwrap();
        match &g2 {
            GroupElement::Exact(q) => assert_eq!(q.trace(), BigInt::from(14)),
            _ => panic!("exact product lost exactness"),
        }
        assert_eq!(power_trace(4.0, 2), 14.0);
    }

    #[test]
    fn mixed_backing_falls_back_to_float() {
        let g = GroupElement::Exact(sample());
        let f = GroupElement::Float(Mat2::IDENTITY);
        assert!(!mul(&g, &f).unwrap().is_exact());
        assert!(matches!(mul_exact(&g, &f), Err(FuchsianError::BackingMismatch(_))));
    }

    #[test]
    fn length_examples() {
        let l = length_from_trace(4.0).unwrap().value();
        assert_relative_eq!(l, 2.633_915_793_849_634, max_relative = 1e-14);
        assert_relative_eq!(l, (7.0 + 4.0 * 3f64.sqrt()).ln(), max_relative = 1e-14);
        assert_relative_eq!(length_from_trace(2.0 * 1f64.cosh()).unwrap().value(), 2.0, max_relative = 1e-14);
        assert_relative_eq!(length_from_trace(-4.0).unwrap().value(), l);
        let eps = 2f64.powi(-40);
        let tiny = length_from_trace(2.0 + eps).unwrap().value();
        assert!(tiny > 0.0 && tiny < 1e-5);
        // 2·arccosh(1 + x) = 2·√(2x)·(1 − x/12 + …)
        assert_relative_eq!(tiny, 2.0 * eps.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn non_hyperbolic_traces_are_rejected() {
        for t in [0.0, 1.5, 2.0, -2.0] {
            assert!(matches!(length_from_trace(t), Err(FuchsianError::NonHyperbolic(_))));
        }
        assert!(length_from_trace(f64::NAN).is_err());
    }

    #[test]
    fn power_trace_examples() {
        assert_eq!(power_trace(3.0, 2), 7.0);
        assert_eq!(power_trace(5.5, 1), 5.5);
        // explicit cube of a trace-4 matrix
        let m = Mat2::new(2.0, 3.0, 1.0, 2.0).unwrap();
        let cube = m * m * m;
        assert_eq!(cube.trace(), 52.0);
        assert_eq!(power_trace(4.0, 3), 52.0);
    }

    #[test]
    fn to_float_avoids_cancellation() {
        // 99 − 70√2 ≈ 0.00505
        let q = QuadInt::new(99, -70, 2);
        let want = 1.0 / (99.0 + 70.0 * 2f64.sqrt());
        assert_relative_eq!(q.to_f64().unwrap(), want, max_relative = 1e-15);
    }

    #[test]
    fn bad_determinant_is_rejected() {
        assert!(matches!(Mat2::new(2.0, 0.0, 0.0, 1.0), Err(FuchsianError::BadDeterminant(_))));
    }

    proptest! {
        #[test]
        fn power_length_is_additive(t in 2.001f64..50.0, k in 1u32..12) {
            let lk = length_from_trace(power_trace(t, k)).unwrap().value();
            let l1 = length_from_trace(t).unwrap().value();
            prop_assert!((lk - k as f64 * l1).abs() <= 1e-10 * k as f64);
        }

        #[test]
        fn trace_is_cyclic(x in proptest::array::uniform4(-3.0f64..3.0), y in proptest::array::uniform4(-3.0f64..3.0)) {
            let norm = |v: [f64; 4]| {
                let det = v[0] * v[3] - v[1] * v[2];
                prop_assume!(det.abs() > 0.1);
                let m = Mat2::new_unchecked(v[0], v[1], v[2], v[3]);
                let m = if det < 0.0 { Mat2::new_unchecked(-v[0], v[1], -v[2], v[3]) } else { m };
                Ok(m.normalized())
            };
            let g = norm(x)?;
            let h = norm(y)?;
            prop_assert!(((g * h).trace() - (h * g).trace()).abs() <= 1e-12 * (1.0 + (g * h).trace().abs()));
        }

        #[test]
        fn exact_product_matches_float(word in proptest::collection::vec(0usize..4, 0..7)) {
            // (2,2,1,1) and (3,2,0,0) both satisfy the norm form for n = 2, p = 5
            let g = sample();
            let h = QuaternionMatrix { alpha: QuadInt::new(3, 2, 2), beta: QuadInt::zero(2), p: 5 };
            let letters = [g.clone(), h.clone(), g.inverse(), h.inverse()];
            let mut e = QuaternionMatrix::identity(2, 5);
            let mut f = Mat2::IDENTITY;
            for &i in &word {
                e = e.mul_exact(&letters[i]).unwrap();
                f = f * letters[i].to_float().unwrap();
            }
            let ef = e.to_float().unwrap();
            for (x, y) in [(ef.a, f.a), (ef.b, f.b), (ef.c, f.c), (ef.d, f.d)] {
                prop_assert!((x - y).abs() <= 1e-10 * x.abs().max(1.0));
            }
        }
    }
}
