//! Finite-dimensional `l_p` spaces: norms, norming functionals, the
//! compatible semi-inner-product and smooth-point tests.
//!
//! The exponent is a runtime value. `p = 1` and `p = inf` take dedicated
//! polyhedral branches; for `1 < p < inf` the space is smooth and the norming
//! functional of `x` is `sign(x_i) |x_i|^(p-1) / ||x||^(p-1)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

/// An exponent `p` in `[1, inf]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Exponent(f64);

impl Exponent {
    pub const ONE: Exponent = Exponent(1.0);
    pub const TWO: Exponent = Exponent(2.0);
    pub const INFINITY: Exponent = Exponent(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidExponent(p));
        }
        Ok(Exponent(p))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_one(self) -> bool {
        self.0 == 1.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// True for `1 < p < inf`, where the unit sphere is smooth and strictly convex.
    pub fn is_smooth(self) -> bool {
        !self.is_one() && !self.is_infinite()
    }

    /// The conjugate exponent `q` with `1/p + 1/q = 1`.
    pub fn conjugate(self) -> Exponent {
        if self.is_one() {
            Exponent::INFINITY
        } else if self.is_infinite() {
            Exponent::ONE
        } else {
            Exponent(self.0 / (self.0 - 1.0))
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_matches('"');
        match t.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Exponent::INFINITY),
            other => other
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("cannot parse exponent {s:?}")))
                .and_then(Exponent::new),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        let parsed = match Raw::deserialize(deserializer)? {
            Raw::Num(v) => Exponent::new(v),
            Raw::Str(s) => s.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

/// A finite-dimensional `l_p^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub p: Exponent,
    pub dim: usize,
}

impl NormSpec {
    pub fn new(p: Exponent, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Self { p, dim })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Vector {
    coords: Vec<f64>,
    space: NormSpec,
}

impl Vector {
    pub fn new(coords: Vec<f64>, space: NormSpec) -> Result<Self> {
        if coords.len() != space.dim {
            return Err(Error::DimensionMismatch {
                expected: space.dim,
                found: coords.len(),
            });
        }
        Ok(Self { coords, space })
    }

    /// Convenience constructor inferring the dimension from `coords`.
    pub fn in_lp(coords: Vec<f64>, p: Exponent) -> Result<Self> {
        let space = NormSpec::new(p, coords.len())?;
        Ok(Self { coords, space })
    }

    /// The basis vector `e_i` (zero-based index).
    pub fn basis(space: NormSpec, i: usize) -> Result<Self> {
        if i >= space.dim {
            return Err(Error::DimensionMismatch {
                expected: space.dim,
                found: i + 1,
            });
        }
        let mut coords = vec![0.0; space.dim];
        coords[i] = 1.0;
        Ok(Self { coords, space })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn space(&self) -> NormSpec {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim
    }

    pub fn p(&self) -> Exponent {
        self.space.p
    }

    pub fn norm(&self) -> f64 {
        lp_norm(&self.coords, self.space.p)
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0.0)
    }

    pub fn scaled(&self, c: f64) -> Vector {
        Vector {
            coords: self.coords.iter().map(|v| c * v).collect(),
            space: self.space,
        }
    }

    /// `self + lambda * other`; the caller guarantees matching spaces.
    pub(crate) fn axpy(&self, lambda: f64, other: &Vector) -> Vec<f64> {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a + lambda * b)
            .collect()
    }

    pub(crate) fn check_same_space(&self, other: &Vector) -> Result<()> {
        if self.space.dim != other.space.dim {
            return Err(Error::DimensionMismatch {
                expected: self.space.dim,
                found: other.space.dim,
            });
        }
        if self.space.p != other.space.p {
            return Err(Error::SpaceMismatch);
        }
        Ok(())
    }
}

/// `||x||_p` of a raw coordinate slice.
pub fn lp_norm(x: &[f64], p: Exponent) -> f64 {
    let p = p.value();
    if p == 1.0 {
        x.iter().map(|v| v.abs()).sum()
    } else if p == 2.0 {
        x.iter().map(|v| v * v).sum::<f64>().sqrt()
    } else if p.is_infinite() {
        x.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else {
        // Scale by the largest entry so large p cannot overflow.
        let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if m == 0.0 {
            return 0.0;
        }
        let s: f64 = x.iter().map(|v| (v.abs() / m).powf(p)).sum();
        m * s.powf(1.0 / p)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A dual vector `f` (an element of `l_q`) with `||f||_q = 1` and
/// `f(x) = ||x||` for its base point `x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormingFunctional {
    pub coeffs: Vec<f64>,
    /// Whether the base point is smooth, i.e. this is the only norming functional.
    pub unique: bool,
}

impl NormingFunctional {
    pub fn apply(&self, y: &[f64]) -> f64 {
        dot(&self.coeffs, y)
    }

    pub fn sup_distance(&self, other: &NormingFunctional) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothnessVerdict {
    pub smooth: bool,
    /// The canonical functional when smooth; two distinct functionals otherwise.
    pub witnesses: Vec<NormingFunctional>,
}

pub fn norm(x: &Vector) -> f64 {
    x.norm()
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Indices where `|x_i|` is maximal, up to a relative tolerance.
pub(crate) fn maximal_indices(x: &[f64], rel_tol: f64) -> Vec<usize> {
    let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    x.iter()
        .enumerate()
        .filter(|(_, v)| v.abs() >= m * (1.0 - rel_tol))
        .map(|(i, _)| i)
        .collect()
}

/// Indices of coordinates that vanish relative to `||x||_inf`.
pub(crate) fn vanishing_indices(x: &[f64], rel_tol: f64) -> Vec<usize> {
    let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    x.iter()
        .enumerate()
        .filter(|(_, v)| v.abs() <= m * rel_tol)
        .map(|(i, _)| i)
        .collect()
}

/// Canonical norming functional of a nonzero raw vector in `l_p`.
///
/// `p = inf` averages the sign functionals over all maximal coordinates;
/// `p = 1` uses `sign(x_i)` with zero on vanishing coordinates.
pub(crate) fn canonical_functional(x: &[f64], p: Exponent, rel_tol: f64) -> Vec<f64> {
    if p.is_infinite() {
        let idx = maximal_indices(x, rel_tol);
        let w = 1.0 / idx.len() as f64;
        let mut f = vec![0.0; x.len()];
        for i in idx {
            f[i] = sign(x[i]) * w;
        }
        f
    } else if p.is_one() {
        let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        x.iter()
            .map(|&v| if v.abs() <= m * rel_tol { 0.0 } else { sign(v) })
            .collect()
    } else {
        let n = lp_norm(x, p);
        let e = p.value() - 1.0;
        x.iter().map(|&v| sign(v) * (v.abs() / n).powf(e)).collect()
    }
}

/// The unit vector `u` of `l_p` with `z . u = ||z||_q`, for `z` in the dual `l_q`.
///
/// This is the norming functional of `z` read back in `l_p`, so the same
/// canonical selection applies on the polyhedral endpoints.
pub(crate) fn norming_direction(z: &[f64], p: Exponent, rel_tol: f64) -> Vec<f64> {
    canonical_functional(z, p.conjugate(), rel_tol)
}

pub fn duality_map(x: &Vector, tol: &Tolerances) -> Result<NormingFunctional> {
    if x.is_zero() {
        return Err(Error::ZeroVector);
    }
    let coeffs = canonical_functional(x.coords(), x.p(), tol.formula);
    let unique = smooth_flag(x.coords(), x.p(), tol.formula);
    Ok(NormingFunctional { coeffs, unique })
}

fn smooth_flag(x: &[f64], p: Exponent, rel_tol: f64) -> bool {
    if p.is_infinite() {
        maximal_indices(x, rel_tol).len() == 1
    } else if p.is_one() {
        vanishing_indices(x, rel_tol).is_empty()
    } else {
        true
    }
}

/// The semi-inner-product `[y, x] = ||x|| f_x(y)` built on the canonical
/// norming functional; `[y, 0] = 0`.
pub fn sip(y: &Vector, x: &Vector, tol: &Tolerances) -> Result<f64> {
    y.check_same_space(x)?;
    Ok(sip_raw(y.coords(), x.coords(), x.p(), tol.formula))
}

pub(crate) fn sip_raw(y: &[f64], x: &[f64], p: Exponent, rel_tol: f64) -> f64 {
    if x.iter().all(|&v| v == 0.0) {
        return 0.0;
    }
    if p == Exponent::TWO {
        return dot(x, y);
    }
    let f = canonical_functional(x, p, rel_tol);
    lp_norm(x, p) * dot(&f, y)
}

pub fn is_smooth_point(x: &Vector, tol: &Tolerances) -> Result<SmoothnessVerdict> {
    if x.is_zero() {
        return Err(Error::ZeroVector);
    }
    let p = x.p();
    let c = x.coords();
    let canonical = NormingFunctional {
        coeffs: canonical_functional(c, p, tol.formula),
        unique: true,
    };
    if p.is_infinite() {
        let idx = maximal_indices(c, tol.formula);
        if idx.len() > 1 {
            let pick = |i: usize| {
                let mut f = vec![0.0; c.len()];
                f[i] = sign(c[i]);
                NormingFunctional {
                    coeffs: f,
                    unique: false,
                }
            };
            return Ok(SmoothnessVerdict {
                smooth: false,
                witnesses: vec![pick(idx[0]), pick(idx[1])],
            });
        }
    } else if p.is_one() {
        let zeros = vanishing_indices(c, tol.formula);
        if let Some(&j) = zeros.first() {
            let mut f = canonical.coeffs.clone();
            let mut g = canonical.coeffs.clone();
            f[j] = 1.0;
            g[j] = -1.0;
            return Ok(SmoothnessVerdict {
                smooth: false,
                witnesses: vec![
                    NormingFunctional {
                        coeffs: f,
                        unique: false,
                    },
                    NormingFunctional {
                        coeffs: g,
                        unique: false,
                    },
                ],
            });
        }
    }
    Ok(SmoothnessVerdict {
        smooth: true,
        witnesses: vec![canonical],
    })
}
