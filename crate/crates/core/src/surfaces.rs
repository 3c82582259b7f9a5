//! Concrete surface models.
//!
//! * [`octagon_group`]: the genus-2 surface glued from the regular hyperbolic
//!   octagon with interior angles π/4 along the side pattern `a b A B c d C D`.
//! * [`ArithmeticModel`]: elements of the quaternion groups Γ(n, p), i.e.
//!   matrices `[[a+b√n, (c+d√n)√p], [(c−d√n)√p, a−b√n]]` with
//!   `a² − b²n − c²p + d²np = 1`.

use std::f64::consts::PI;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::fuchsian::{self, FuchsianError, GroupElement, LengthValue, Mat2, QuadInt, QuaternionMatrix};
use crate::geodesics::word::Word;

#[derive(Debug, Error)]
pub enum SurfaceError {
    #[error("({a}, {b}, {c}, {d}) violates the norm form: a² − b²n − c²p + d²np = {value}")]
    NotInGroup { a: i64, b: i64, c: i64, d: i64, value: i64 },
    #[error("bad parameters: {0}")]
    BadParameters(String),
    #[error("relator check failed: deviation {0:e} from ±identity")]
    RelatorCheck(f64),
    #[error(transparent)]
    Fuchsian(#[from] FuchsianError),
}

/// A cocompact surface group given by side pairings of a Dirichlet domain
/// centred at `i`.
#[derive(Debug, Clone)]
pub struct SurfacePresentation {
    pub genus: u32,
    pub generators: Vec<Mat2>,
    pub relator: Word,
    /// Gauss–Bonnet area 4π(g − 1).
    pub volume: f64,
    /// Shortest length seen in an enumerated table; empirical.
    pub systole_lb: Option<f64>,
    /// Radius of the smallest disc about `i` containing the fundamental domain.
    pub domain_radius: f64,
    /// Distance from `i` to each side of the fundamental domain.
    pub inradius: f64,
}

impl SurfacePresentation {
    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    /// Largest entrywise deviation of the evaluated relator from ±identity.
    pub fn relator_defect(&self) -> f64 {
        self.relator.evaluate(&self.generators).psl_distance(&Mat2::IDENTITY)
    }

    pub fn with_systole(mut self, systole: Option<f64>) -> Self {
        self.systole_lb = systole;
        self
    }

    pub fn descriptor(&self) -> ModelDescriptor {
        ModelDescriptor::Octagon {
            genus: self.genus,
            generators: Some(
                self.generators
                    .iter()
                    .map(|m| [m.a, m.b, m.c, m.d].map(|x| format!("{x:.17e}")))
                    .collect(),
            ),
        }
    }
}

/// The regular-octagon genus-2 surface with relator `[a,b][c,d]`.
///
/// Side `k` of the octagon is perpendicular to the ray from `i` at angle
/// `kπ/4`. The generators pair sides (2→0), (1→3), (6→4), (5→7); each pairing
/// rotates the source side opposite the target and then translates across by
/// twice the inradius.
pub fn octagon_group() -> SurfacePresentation {
    // regular 8-gon with angle π/4: cosh(inradius) = cot(π/8), cosh(R) = cot²(π/8)
    let cot = 1.0 / (PI / 8.0).tan();
    let inradius = fuchsian::arccosh(cot);
    let domain_radius = fuchsian::arccosh(cot * cot);
    let theta = |k: usize| k as f64 * PI / 4.0;
    let pairing = |from: usize, to: usize| {
        let ti = theta(to);
        let push = Mat2::rotation(ti) * Mat2::translation(2.0 * inradius) * Mat2::rotation(-ti);
        (push * Mat2::rotation(ti - theta(from) + PI)).normalized()
    };
    let generators = vec![pairing(2, 0), pairing(1, 3), pairing(6, 4), pairing(5, 7)];
    let model = SurfacePresentation {
        genus: 2,
        generators,
        relator: "abABcdCD".parse().expect("static relator"),
        volume: 4.0 * PI,
        systole_lb: None,
        domain_radius,
        inradius,
    };
    let defect = model.relator_defect();
    assert!(defect < 1e-8, "octagon relator check failed: {defect:e}");
    model
}

/// Elements of Γ(n, p) declared by the user.
#[derive(Debug, Clone)]
pub struct ArithmeticModel {
    pub n: i64,
    pub p: i64,
    pub generators: Vec<QuaternionMatrix>,
    pub quadruples: Vec<[i64; 4]>,
    /// Whether the user asserts the generators generate all of Γ(n, p).
    pub certified_generation: bool,
}

impl ArithmeticModel {
    pub fn new(n: i64, p: i64, quadruples: &[[i64; 4]], certified_generation: bool) -> Result<Self, SurfaceError> {
        check_parameters(n, p)?;
        let generators = quadruples
            .iter()
            .map(|&[a, b, c, d]| match arithmetic_element(a, b, c, d, n, p)? {
                GroupElement::Exact(q) => Ok(q),
                GroupElement::Float(_) => unreachable!(),
            })
            .collect::<Result<Vec<_>, SurfaceError>>()?;
        Ok(ArithmeticModel { n, p, generators, quadruples: quadruples.to_vec(), certified_generation })
    }

    /// Output label for spectra computed from this generator set.
    pub fn spectrum_label(&self) -> &'static str {
        if self.certified_generation {
            "full spectrum"
        } else {
            "subgroup spectrum"
        }
    }

    pub fn float_generators(&self) -> Result<Vec<Mat2>, FuchsianError> {
        self.generators.iter().map(|g| g.to_float()).collect()
    }

    pub fn descriptor(&self) -> ModelDescriptor {
        ModelDescriptor::Arithmetic {
            n: self.n,
            p: self.p,
            generators: self.quadruples.clone(),
            certified_generation: self.certified_generation,
        }
    }
}

fn is_prime(p: i64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

fn is_squarefree(n: i64) -> bool {
    n >= 1 && (2..).take_while(|d| d * d <= n).all(|d| n % (d * d) != 0)
}

fn pow_mod(mut b: i64, mut e: i64, m: i64) -> i64 {
    let mut r = 1i64;
    b = b.rem_euclid(m);
    while e > 0 {
        if e & 1 == 1 {
            r = (r as i128 * b as i128 % m as i128) as i64;
        }
        b = (b as i128 * b as i128 % m as i128) as i64;
        e >>= 1;
    }
    r
}

fn check_parameters(n: i64, p: i64) -> Result<(), SurfaceError> {
    if !is_prime(p) || p % 4 != 1 {
        return Err(SurfaceError::BadParameters(format!("p = {p} must be a prime ≡ 1 mod 4")));
    }
    if !is_squarefree(n) {
        return Err(SurfaceError::BadParameters(format!("n = {n} must be a positive squarefree integer")));
    }
    if n % p == 0 || pow_mod(n, (p - 1) / 2, p) != p - 1 {
        return Err(SurfaceError::BadParameters(format!("n = {n} is not a quadratic non-residue mod {p}")));
    }
    Ok(())
}

/// The exact element of Γ(n, p) with integer coordinates `(a, b, c, d)`.
pub fn arithmetic_element(a: i64, b: i64, c: i64, d: i64, n: i64, p: i64) -> Result<GroupElement, SurfaceError> {
    check_parameters(n, p)?;
    let big = |x: i64| BigInt::from(x);
    let form = big(a) * big(a) - big(b) * big(b) * big(n) - big(c) * big(c) * big(p) + big(d) * big(d) * big(n) * big(p);
    if form != BigInt::from(1) {
        let value = i64::try_from(&form).unwrap_or(i64::MAX);
        return Err(SurfaceError::NotInGroup { a, b, c, d, value });
    }
    let n = n as u64;
    Ok(GroupElement::Exact(QuaternionMatrix { alpha: QuadInt::new(a, b, n), beta: QuadInt::new(c, d, n), p: p as u64 }))
}

/// `log x_m` with `x_m = 2m² − 1 + 2m√(m² − 1)`: the length of a trace-`2m`
/// element.
pub fn xm(m: u64) -> Result<LengthValue, SurfaceError> {
    if m < 2 {
        return Err(SurfaceError::BadParameters(format!("x_m needs m ≥ 2, got {m}")));
    }
    let m = m as f64;
    let x = 2.0 * m * m - 1.0 + 2.0 * m * (m * m - 1.0).sqrt();
    Ok(LengthValue::new(x.ln()).expect("x_m > 1"))
}

/// JSON model block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelDescriptor {
    Octagon {
        #[serde(default = "default_genus")]
        genus: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        generators: Option<Vec<[String; 4]>>,
    },
    Arithmetic {
        n: i64,
        p: i64,
        generators: Vec<[i64; 4]>,
        #[serde(default)]
        certified_generation: bool,
    },
}

fn default_genus() -> u32 {
    2
}

/// A built model.
#[derive(Debug, Clone)]
pub enum Model {
    Octagon(SurfacePresentation),
    Arithmetic(ArithmeticModel),
}

impl Model {
    pub fn from_descriptor(d: &ModelDescriptor) -> Result<Model, SurfaceError> {
        match d {
            ModelDescriptor::Octagon { genus, generators } => {
                if *genus != 2 {
                    return Err(SurfaceError::BadParameters(format!("octagon model has genus 2, not {genus}")));
                }
                let model = octagon_group();
                if let Some(given) = generators {
                    check_declared_generators(&model, given)?;
                }
                Ok(Model::Octagon(model))
            }
            ModelDescriptor::Arithmetic { n, p, generators, certified_generation } => {
                Ok(Model::Arithmetic(ArithmeticModel::new(*n, *p, generators, *certified_generation)?))
            }
        }
    }

    pub fn descriptor(&self) -> ModelDescriptor {
        match self {
            Model::Octagon(s) => s.descriptor(),
            Model::Arithmetic(a) => a.descriptor(),
        }
    }

    /// SHA-256 of the canonical descriptor JSON.
    pub fn digest(&self) -> [u8; 32] {
        descriptor_digest(&self.descriptor())
    }

    /// Dimension of the homology pairing (number of generators).
    pub fn rank(&self) -> usize {
        match self {
            Model::Octagon(s) => s.rank(),
            Model::Arithmetic(a) => a.generators.len(),
        }
    }

    pub fn volume(&self) -> Option<f64> {
        match self {
            Model::Octagon(s) => Some(s.volume),
            Model::Arithmetic(_) => None,
        }
    }

    pub fn is_arithmetic(&self) -> bool {
        matches!(self, Model::Arithmetic(_))
    }
}

pub fn descriptor_digest(d: &ModelDescriptor) -> [u8; 32] {
    let json = serde_json::to_string(d).expect("descriptor serializes");
    Sha256::digest(json.as_bytes()).into()
}

fn check_declared_generators(model: &SurfacePresentation, given: &[[String; 4]]) -> Result<(), SurfaceError> {
    if given.len() != model.generators.len() {
        return Err(SurfaceError::BadParameters(format!(
            "expected {} generator matrices, got {}",
            model.generators.len(),
            given.len()
        )));
    }
    for (g, m) in given.iter().zip(&model.generators) {
        let vals = g
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|e| SurfaceError::BadParameters(format!("{s:?}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let declared = Mat2::new_unchecked(vals[0], vals[1], vals[2], vals[3]);
        let dev = declared.psl_distance(m);
        if dev > 1e-9 {
            return Err(SurfaceError::BadParameters(format!("declared generator deviates by {dev:e}")));
        }
    }
    Ok(())
}
