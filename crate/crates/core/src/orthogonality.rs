//! Birkhoff-James orthogonality and its one-sided and approximate variants.
//!
//! Every predicate reduces to minimizing the convex map `l -> ||x + l y||`
//! over a line or half-line. Outside `|l| <= 2||x||/||y||` the map exceeds
//! `||x||`, so searching `|l| <= 8||x||/||y||` never misses a violation.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::minimize::{golden_section, ScalarMin};
use crate::sampling::{gaussian_vec, substream};
use crate::space::{
    dot, is_smooth_point, lp_norm, maximal_indices, sip_raw, vanishing_indices, Exponent,
    NormingFunctional, Vector,
};
use crate::tolerance::Tolerances;

const BRACKET_FACTOR: f64 = 8.0;
const MAX_EVALS: usize = 240;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrthogonalityVerdict {
    pub orthogonal: bool,
    /// `inf_l ||x + l y||`
    pub min_value: f64,
    pub minimizer: f64,
    /// A norming functional of `x` annihilating `y`, when one exists.
    pub certificate: Option<NormingFunctional>,
    /// `[y, x]` in smooth spaces, where orthogonality is `[y, x] = 0`.
    pub sip_value: Option<f64>,
    pub sip_agrees: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirectionalClass {
    pub eps: f64,
    pub in_plus: bool,
    pub in_minus: bool,
    pub plus_min: f64,
    pub minus_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RightAdditivityReport {
    pub passes: bool,
    pub counterexample: Option<(Vec<f64>, Vec<f64>)>,
    pub pairs_tested: usize,
    pub point_smooth: bool,
    /// `passes` coincides with smoothness of the base point.
    pub agrees_with_smoothness: bool,
}

pub(crate) fn line_min(x: &[f64], y: &[f64], p: Exponent, lo: f64, hi: f64) -> ScalarMin {
    let mut buf = vec![0.0; x.len()];
    golden_section(
        |l| {
            for ((b, a), d) in buf.iter_mut().zip(x).zip(y) {
                *b = a + l * d;
            }
            lp_norm(&buf, p)
        },
        lo,
        hi,
        &[0.0],
        MAX_EVALS,
    )
}

fn bracket(x: &[f64], y: &[f64], p: Exponent) -> f64 {
    BRACKET_FACTOR * lp_norm(x, p) / lp_norm(y, p)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidEpsilon(eps));
    }
    Ok(())
}

/// Norming functional of `x` with the smallest `|f(y)|`; exact on the
/// polyhedral faces of `l_1` and `l_inf`.
fn annihilating_functional(x: &[f64], y: &[f64], p: Exponent, rel_tol: f64) -> Vec<f64> {
    let sgn = |v: f64| if v > 0.0 { 1.0 } else if v < 0.0 { -1.0 } else { 0.0 };
    if p.is_infinite() {
        // Norming set is the convex hull of sign(x_i) e_i over maximal i.
        let idx = maximal_indices(x, rel_tol);
        let vals: Vec<(usize, f64)> = idx.iter().map(|&i| (i, sgn(x[i]) * y[i])).collect();
        let (imin, vmin) = vals.iter().cloned().fold((idx[0], f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        let (imax, vmax) = vals.iter().cloned().fold((idx[0], f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
        let mut f = vec![0.0; x.len()];
        if vmin <= 0.0 && vmax >= 0.0 && vmax > vmin {
            let t = vmax / (vmax - vmin);
            f[imin] += t * sgn(x[imin]);
            f[imax] += (1.0 - t) * sgn(x[imax]);
        } else if vmin > 0.0 {
            f[imin] = sgn(x[imin]);
        } else {
            f[imax] = sgn(x[imax]);
        }
        f
    } else if p.is_one() {
        // Free coordinates t_i in [-1, 1] wherever x_i vanishes.
        let zeros = vanishing_indices(x, rel_tol);
        let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut f: Vec<f64> = x
            .iter()
            .map(|&v| if v.abs() <= m * rel_tol { 0.0 } else { sgn(v) })
            .collect();
        let fixed = dot(&f, y);
        let slack: f64 = zeros.iter().map(|&i| y[i].abs()).sum();
        if slack > 0.0 {
            let c = (fixed / slack).clamp(-1.0, 1.0);
            for &i in &zeros {
                f[i] = -c * sgn(y[i]);
            }
        }
        f
    } else {
        crate::space::canonical_functional(x, p, rel_tol)
    }
}

pub fn bj_orthogonal(x: &Vector, y: &Vector, tol: &Tolerances) -> Result<OrthogonalityVerdict> {
    x.check_same_space(y)?;
    if x.is_zero() {
        return Err(Error::ZeroVector);
    }
    let p = x.p();
    let xn = x.norm();
    let smooth_space = p.is_smooth();
    if y.is_zero() {
        let f = crate::space::canonical_functional(x.coords(), p, tol.formula);
        return Ok(OrthogonalityVerdict {
            orthogonal: true,
            min_value: xn,
            minimizer: 0.0,
            certificate: Some(NormingFunctional {
                coeffs: f,
                unique: crate::space::duality_map(x, tol)?.unique,
            }),
            sip_value: smooth_space.then_some(0.0),
            sip_agrees: smooth_space.then_some(true),
        });
    }
    let r = bracket(x.coords(), y.coords(), p);
    let m = line_min(x.coords(), y.coords(), p, -r, r);
    let orthogonal = m.value >= xn - tol.orthogonality * xn;

    let certificate = if orthogonal {
        let f = annihilating_functional(x.coords(), y.coords(), p, tol.formula);
        let yn = y.norm();
        let ok = dot(&f, y.coords()).abs() <= tol.formula * (1.0 + yn)
            && (dot(&f, x.coords()) - xn).abs() <= tol.formula * (1.0 + xn);
        ok.then(|| NormingFunctional {
            coeffs: f,
            unique: crate::space::duality_map(x, tol).map(|d| d.unique).unwrap_or(false),
        })
    } else {
        None
    };

    let (sip_value, sip_agrees) = if smooth_space {
        let s = sip_raw(y.coords(), x.coords(), p, tol.formula);
        let thresh = tol.orthogonality.sqrt() * xn * y.norm();
        (Some(s), Some((s.abs() <= thresh) == orthogonal))
    } else {
        (None, None)
    };

    Ok(OrthogonalityVerdict {
        orthogonal,
        min_value: m.value,
        minimizer: m.argmin,
        certificate,
        sip_value,
        sip_agrees,
    })
}

/// `x` is approximately eps-orthogonal to `y`: `||x + l y|| >= sqrt(1 - eps^2) ||x||` for all `l`.
pub fn approx_bj(x: &Vector, y: &Vector, eps: f64, tol: &Tolerances) -> Result<bool> {
    check_eps(eps)?;
    x.check_same_space(y)?;
    if x.is_zero() {
        return Err(Error::ZeroVector);
    }
    if y.is_zero() {
        return Ok(true);
    }
    let xn = x.norm();
    let r = bracket(x.coords(), y.coords(), x.p());
    let m = line_min(x.coords(), y.coords(), x.p(), -r, r);
    Ok(m.value >= (1.0 - eps * eps).sqrt() * xn - tol.orthogonality * xn)
}

pub fn directional_class(
    x: &Vector,
    y: &Vector,
    eps: f64,
    tol: &Tolerances,
) -> Result<DirectionalClass> {
    check_eps(eps)?;
    x.check_same_space(y)?;
    if x.is_zero() {
        return Err(Error::ZeroVector);
    }
    let xn = x.norm();
    if y.is_zero() {
        return Ok(DirectionalClass {
            eps,
            in_plus: true,
            in_minus: true,
            plus_min: xn,
            minus_min: xn,
        });
    }
    let r = bracket(x.coords(), y.coords(), x.p());
    let plus = line_min(x.coords(), y.coords(), x.p(), 0.0, r);
    let minus = line_min(x.coords(), y.coords(), x.p(), -r, 0.0);
    let threshold = (1.0 - eps * eps).sqrt() * xn - tol.orthogonality * xn;
    Ok(DirectionalClass {
        eps,
        in_plus: plus.value >= threshold,
        in_minus: minus.value >= threshold,
        plus_min: plus.value,
        minus_min: minus.value,
    })
}

/// Solves `g(y) = 0`, `f(y) = c` with the least Euclidean norm.
pub(crate) fn two_constraint_solution(f: &[f64], g: &[f64], c: f64) -> Option<Vec<f64>> {
    let (ff, fg, gg) = (dot(f, f), dot(f, g), dot(g, g));
    let det = ff * gg - fg * fg;
    if det.abs() <= 1e-14 * ff * gg {
        return None;
    }
    // y = a f + b g with [ff fg; fg gg][a; b] = [c; 0]
    let a = c * gg / det;
    let b = -c * fg / det;
    Some(f.iter().zip(g).map(|(fi, gi)| a * fi + b * gi).collect())
}

/// Projects `v` onto the kernel of `h` along `x` (requires `h(x) != 0`).
fn kernel_projection(v: &[f64], h: &[f64], x: &[f64]) -> Vec<f64> {
    let c = dot(h, v) / dot(h, x);
    v.iter().zip(x).map(|(a, b)| a - c * b).collect()
}

/// Searches for `y, z` with `x _|_ y`, `x _|_ z` but not `x _|_ (y + z)`.
///
/// Non-smooth points are attacked constructively first: with two distinct
/// norming functionals `f != g` pick `y` in `ker g` with `f(y) = ||x||` and
/// `z = x - y in ker f`, so `y + z = x`. Random pairs drawn from kernels of
/// norming functionals follow.
pub fn right_additivity_probe(
    x: &Vector,
    sample_count: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<RightAdditivityReport> {
    if x.is_zero() {
        return Err(Error::ZeroVector);
    }
    let verdict = is_smooth_point(x, tol)?;
    let space = x.space();
    let xn = x.norm();
    let mut tested = 0usize;
    let mut counterexample = None;

    let mut try_pair = |y: Vec<f64>, z: Vec<f64>, counterexample: &mut Option<(Vec<f64>, Vec<f64>)>| -> Result<()> {
        let yv = Vector::new(y, space)?;
        let zv = Vector::new(z, space)?;
        if !bj_orthogonal(x, &yv, tol)?.orthogonal || !bj_orthogonal(x, &zv, tol)?.orthogonal {
            return Ok(());
        }
        tested += 1;
        let sum = Vector::new(yv.axpy(1.0, &zv), space)?;
        if !bj_orthogonal(x, &sum, tol)?.orthogonal && counterexample.is_none() {
            *counterexample = Some((yv.into_coords(), zv.into_coords()));
        }
        Ok(())
    };

    if !verdict.smooth {
        let f = &verdict.witnesses[0].coeffs;
        let g = &verdict.witnesses[1].coeffs;
        if let Some(y) = two_constraint_solution(f, g, xn) {
            let z: Vec<f64> = x.coords().iter().zip(&y).map(|(a, b)| a - b).collect();
            try_pair(y, z, &mut counterexample)?;
        }
    }

    let mut rng = substream(seed, 0);
    for _ in 0..sample_count {
        let pick = |rng: &mut crate::sampling::SeededRng| -> Vec<f64> {
            if verdict.smooth {
                verdict.witnesses[0].coeffs.clone()
            } else {
                let t: f64 = rand::Rng::random_range(rng, 0.0..=1.0);
                verdict.witnesses[0]
                    .coeffs
                    .iter()
                    .zip(&verdict.witnesses[1].coeffs)
                    .map(|(a, b)| t * a + (1.0 - t) * b)
                    .collect()
            }
        };
        let h1 = pick(&mut rng);
        let h2 = pick(&mut rng);
        let y = kernel_projection(&gaussian_vec(&mut rng, x.dim()), &h1, x.coords());
        let z = kernel_projection(&gaussian_vec(&mut rng, x.dim()), &h2, x.coords());
        try_pair(y, z, &mut counterexample)?;
    }

    let passes = counterexample.is_none();
    Ok(RightAdditivityReport {
        passes,
        counterexample,
        pairs_tested: tested,
        point_smooth: verdict.smooth,
        agrees_with_smoothness: passes == verdict.smooth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64], p: f64) -> Vector {
        Vector::in_lp(c.to_vec(), Exponent::new(p).unwrap()).unwrap()
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn zero_direction_is_orthogonal() {
        for p in [1.0, 2.0, f64::INFINITY] {
            let r = bj_orthogonal(&v(&[1.0, 2.0], p), &v(&[0.0, 0.0], p), &tol()).unwrap();
            assert!(r.orthogonal);
        }
    }

    #[test]
    fn zero_base_is_rejected() {
        assert_eq!(
            bj_orthogonal(&v(&[0.0, 0.0], 2.0), &v(&[1.0, 0.0], 2.0), &tol()),
            Err(Error::ZeroVector)
        );
    }

    #[test]
    fn euclidean_axes() {
        let r = bj_orthogonal(&v(&[1.0, 0.0], 2.0), &v(&[0.0, 1.0], 2.0), &tol()).unwrap();
        assert!(r.orthogonal);
        assert!(r.minimizer.abs() < 1e-7);
        assert_eq!(r.sip_agrees, Some(true));
        assert!(r.certificate.is_some());
    }

    #[test]
    fn sup_norm_corner() {
        // grid oracle: max(|1+l|, |1-l|) on [-4, 4] bottoms out at 1 for l = 0
        let r = bj_orthogonal(
            &v(&[1.0, 1.0], f64::INFINITY),
            &v(&[1.0, -1.0], f64::INFINITY),
            &tol(),
        )
        .unwrap();
        assert!(r.orthogonal);
        assert!((r.min_value - 1.0).abs() < 1e-12);
        assert!(r.minimizer.abs() < 1e-9);
        let cert = r.certificate.unwrap();
        assert!(cert.apply(&[1.0, -1.0]).abs() < 1e-12);
        assert!((cert.apply(&[1.0, 1.0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn l1_certificate_uses_free_coordinates() {
        // x = (1, 0) in l_1: norming functionals (1, t), |t| <= 1.
        let r = bj_orthogonal(&v(&[1.0, 0.0], 1.0), &v(&[0.5, 1.0], 1.0), &tol()).unwrap();
        assert!(r.orthogonal);
        let cert = r.certificate.unwrap();
        assert_eq!(cert.coeffs, vec![1.0, -0.5]);
        let r = bj_orthogonal(&v(&[1.0, 0.0], 1.0), &v(&[2.0, 1.0], 1.0), &tol()).unwrap();
        assert!(!r.orthogonal);
    }

    #[test]
    fn approximate_orthogonality() {
        // min over l of ||(1 - l, l)||_2 is 1/sqrt(2)
        let x = v(&[1.0, 0.0], 2.0);
        let y = v(&[-1.0, 1.0], 2.0);
        assert!(approx_bj(&x, &y, 0.8, &tol()).unwrap());
        assert!(!approx_bj(&x, &y, 0.3, &tol()).unwrap());
        assert_eq!(
            approx_bj(&x, &y, 0.0, &tol()).unwrap(),
            bj_orthogonal(&x, &y, &tol()).unwrap().orthogonal
        );
        assert!(approx_bj(&x, &y, 1.0, &tol()).is_err());
        assert!(approx_bj(&x, &y, -0.1, &tol()).is_err());
    }

    #[test]
    fn directional_examples() {
        let x = v(&[1.0, 0.0], 2.0);
        let c = directional_class(&x, &v(&[1.0, 0.0], 2.0), 0.0, &tol()).unwrap();
        assert!(c.in_plus && !c.in_minus);
        let c = directional_class(&x, &v(&[-1.0, 1.0], 2.0), 0.8, &tol()).unwrap();
        assert!(c.in_plus);
        assert!((c.plus_min - 0.5f64.sqrt()).abs() < 1e-9);
        let c = directional_class(&x, &v(&[0.0, 1.0], 2.0), 0.0, &tol()).unwrap();
        assert!(c.in_plus && c.in_minus);
    }

    #[test]
    fn sup_norm_right_additivity_fails() {
        let p = f64::INFINITY;
        let x = v(&[1.0, 1.0], p);
        let y = v(&[2.0, -1.0], p);
        let z = v(&[-1.0, 2.0], p);
        assert!(bj_orthogonal(&x, &y, &tol()).unwrap().orthogonal);
        assert!(bj_orthogonal(&x, &z, &tol()).unwrap().orthogonal);
        let s = v(&[1.0, 1.0], p);
        assert!(!bj_orthogonal(&x, &s, &tol()).unwrap().orthogonal);

        let report = right_additivity_probe(&x, 20, 1, &tol()).unwrap();
        assert!(!report.passes);
        assert!(!report.point_smooth);
        assert!(report.agrees_with_smoothness);
        let (cy, cz) = report.counterexample.unwrap();
        let cy = v(&cy, p);
        let cz = v(&cz, p);
        assert!(bj_orthogonal(&x, &cy, &tol()).unwrap().orthogonal);
        assert!(bj_orthogonal(&x, &cz, &tol()).unwrap().orthogonal);
        let sum = v(&cy.axpy(1.0, &cz), p);
        assert!(!bj_orthogonal(&x, &sum, &tol()).unwrap().orthogonal);
    }

    #[test]
    fn l1_axis_point_fails_right_additivity() {
        let report = right_additivity_probe(&v(&[1.0, 0.0, 0.0], 1.0), 10, 2, &tol()).unwrap();
        assert!(!report.passes);
        assert!(report.agrees_with_smoothness);
    }

    #[test]
    fn smooth_points_pass_right_additivity() {
        for (c, p) in [
            (vec![1.0, 2.0, -0.5], 2.0),
            (vec![0.3, -1.0], 1.5),
            (vec![1.0, 0.2, 0.1], f64::INFINITY),
            (vec![1.0, -0.2], 1.0),
        ] {
            let report = right_additivity_probe(&v(&c, p), 25, 9, &tol()).unwrap();
            assert!(report.passes, "p = {p}");
            assert!(report.point_smooth);
            assert!(report.agrees_with_smoothness);
            assert!(report.pairs_tested > 0);
        }
    }
}
