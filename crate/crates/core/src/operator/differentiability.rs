//! Directional derivatives of `A -> ||T + A||` and the `M_T(delta)`
//! localization behind Frechet differentiability.

use serde::Serialize;

use super::attainment::norm_attainment_set;
use super::norm::{check_nonzero, norm_with_warm, op_norm};
use super::smoothness::{smoothness_decide_with, Verdict};
use super::MatrixOperator;
use crate::error::{Error, Result};
use crate::sampling::{gaussian_matrix, rng, sphere_point, substream};
use crate::space::lp_norm;
use crate::tolerance::Tolerances;

pub const DEFAULT_H_SCHEDULE: [f64; 5] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];
const TWO_SIDED_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateauxEstimate {
    pub h: Vec<f64>,
    /// `(||T + hA|| - ||T||) / h`
    pub right_quotients: Vec<f64>,
    /// `(||T|| - ||T - hA||) / h`
    pub left_quotients: Vec<f64>,
    pub right: f64,
    pub left: f64,
    pub two_sided: Option<f64>,
}

/// Richardson step on the last two quotients, cancelling the first-order
/// term of `q(h) = D + c h + O(h^2)`.
fn extrapolate(h: &[f64], q: &[f64]) -> f64 {
    let k = q.len();
    if k < 2 {
        return q[0];
    }
    let rho = h[k - 2] / h[k - 1];
    (rho * q[k - 1] - q[k - 2]) / (rho - 1.0)
}

pub fn gateaux_derivative(
    t: &MatrixOperator,
    a: &MatrixOperator,
    schedule: &[f64],
    tol: &Tolerances,
    seed: u64,
) -> Result<GateauxEstimate> {
    t.check_same_spaces(a)?;
    check_nonzero(t)?;
    let mut h: Vec<f64> = schedule.to_vec();
    if h.is_empty() || h.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidArgument("step sizes must be positive".into()));
    }
    h.sort_by(|a, b| b.total_cmp(a));
    h.dedup();
    let base = op_norm(t, tol, seed);
    let warm = base.maximizers.clone();
    let n0 = base.value;
    let mut right_quotients = Vec::with_capacity(h.len());
    let mut left_quotients = Vec::with_capacity(h.len());
    for &s in &h {
        let plus = norm_with_warm(&t.plus(s, a)?, tol, seed, &warm);
        let minus = norm_with_warm(&t.plus(-s, a)?, tol, seed, &warm);
        right_quotients.push((plus - n0) / s);
        left_quotients.push((n0 - minus) / s);
    }
    let right = extrapolate(&h, &right_quotients);
    let left = extrapolate(&h, &left_quotients);
    let scale = norm_with_warm(a, tol, seed, &[]).max(1.0);
    let two_sided = ((right - left).abs() <= TWO_SIDED_TOL * scale).then_some(0.5 * (right + left));
    Ok(GateauxEstimate {
        h,
        right_quotients,
        left_quotients,
        right,
        left,
        two_sided,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrechetRow {
    pub h: f64,
    /// `sup_A |(||T + hA|| - ||T||)/h - D_A|` over the unit directions, both signs of `h`.
    pub sup_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrechetTable {
    pub rows: Vec<FrechetRow>,
    pub directions: usize,
    /// Deviations never increase as `h` shrinks.
    pub monotone: bool,
}

/// Deviation table over caller-supplied directions (normalized here).
pub fn frechet_deviation_table(
    t: &MatrixOperator,
    schedule: &[f64],
    directions: &[MatrixOperator],
    tol: &Tolerances,
    seed: u64,
) -> Result<FrechetTable> {
    check_nonzero(t)?;
    let mut h: Vec<f64> = schedule.to_vec();
    if h.is_empty() || h.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidArgument("step sizes must be positive".into()));
    }
    h.sort_by(|a, b| b.total_cmp(a));
    let base = op_norm(t, tol, seed);
    let warm = base.maximizers.clone();
    let mut sup = vec![0.0f64; h.len()];
    for a in directions {
        t.check_same_spaces(a)?;
        let na = norm_with_warm(a, tol, seed, &[]);
        if na == 0.0 {
            continue;
        }
        let a = a.scaled(1.0 / na);
        let d = gateaux_derivative(t, &a, &DEFAULT_H_SCHEDULE, tol, seed)?;
        let reference = d.two_sided.unwrap_or(d.right);
        for (i, &s) in h.iter().enumerate() {
            let plus = norm_with_warm(&t.plus(s, &a)?, tol, seed, &warm);
            let minus = norm_with_warm(&t.plus(-s, &a)?, tol, seed, &warm);
            let dev = ((plus - base.value) / s - reference)
                .abs()
                .max(((base.value - minus) / s - reference).abs());
            sup[i] = sup[i].max(dev);
        }
    }
    let rows: Vec<FrechetRow> = h
        .iter()
        .zip(&sup)
        .map(|(&h, &sup_deviation)| FrechetRow { h, sup_deviation })
        .collect();
    let monotone = rows.windows(2).all(|w| w[1].sup_deviation <= w[0].sup_deviation);
    Ok(FrechetTable {
        rows,
        directions: directions.len(),
        monotone,
    })
}

/// Random unit directions drawn from one stream, so a smaller count is a
/// prefix of a larger one. Requires a smooth `T`.
pub fn frechet_uniformity_probe(
    t: &MatrixOperator,
    schedule: &[f64],
    direction_count: usize,
    tol: &Tolerances,
    seed: u64,
) -> Result<FrechetTable> {
    let report = smoothness_decide_with(t, tol, seed, 0)?;
    if report.verdict != Verdict::Smooth {
        return Err(Error::NotSmooth(
            report.violated.unwrap_or_else(|| "operator is not smooth".into()),
        ));
    }
    let mut r = rng(seed);
    let directions = (0..direction_count)
        .map(|_| MatrixOperator::new(&gaussian_matrix(&mut r, t.rows(), t.cols()), t.p(), t.r()))
        .collect::<Result<Vec<_>>>()?;
    frechet_deviation_table(t, schedule, &directions, tol, seed)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Localization {
    pub eps: f64,
    pub x0: Vec<f64>,
    /// `delta` with `M_T(delta)` inside the `eps`-balls around `+-x0`.
    pub delta: Option<f64>,
    pub verified: bool,
    pub samples: usize,
    /// A unit vector far from `+-x0` whose image norm is too large.
    pub violating_sample: Option<Vec<f64>>,
    pub violating_value: Option<f64>,
}

/// Requires `M_T = {+-x0}`.
pub fn mt_delta_localization(
    t: &MatrixOperator,
    eps: f64,
    samples: usize,
    tol: &Tolerances,
    seed: u64,
) -> Result<Localization> {
    let m = norm_attainment_set(t, tol, seed)?;
    if !m.singleton_pair {
        return Err(Error::NotSingletonPair {
            pairs: m.maximizers.len(),
            near_degenerate: m.near_degenerate,
        });
    }
    mt_delta_localization_at(t, &m.maximizers[0], eps, samples, tol, seed)
}

/// Audit form with caller-chosen `x0`. `delta` is half the margin seen on a
/// first batch of sphere samples and is then checked on a second batch.
pub fn mt_delta_localization_at(
    t: &MatrixOperator,
    x0: &[f64],
    eps: f64,
    samples: usize,
    tol: &Tolerances,
    seed: u64,
) -> Result<Localization> {
    check_nonzero(t)?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidEpsilon(eps));
    }
    if x0.len() != t.cols() {
        return Err(Error::DimensionMismatch {
            expected: t.cols(),
            found: x0.len(),
        });
    }
    let p = t.p();
    let nx = lp_norm(x0, p);
    if nx == 0.0 {
        return Err(Error::ZeroVector);
    }
    let x0: Vec<f64> = x0.iter().map(|v| v / nx).collect();
    let norm = op_norm(t, tol, seed).value;
    let delta_min = 1e-9 * norm;
    let dist = |x: &[f64]| {
        let dm: Vec<f64> = x.iter().zip(&x0).map(|(a, b)| a - b).collect();
        let dp: Vec<f64> = x.iter().zip(&x0).map(|(a, b)| a + b).collect();
        lp_norm(&dm, p).min(lp_norm(&dp, p))
    };
    let worst_far = |stream: u64| -> Option<(Vec<f64>, f64)> {
        let mut r = substream(seed, stream);
        let mut worst: Option<(Vec<f64>, f64)> = None;
        for _ in 0..samples {
            let x = sphere_point(&mut r, t.cols(), p);
            if dist(&x) < eps {
                continue;
            }
            let v = t.image_norm(&x);
            if worst.as_ref().is_none_or(|w| v > w.1) {
                worst = Some((x, v));
            }
        }
        worst
    };
    let mut out = Localization {
        eps,
        x0: x0.clone(),
        delta: None,
        verified: false,
        samples,
        violating_sample: None,
        violating_value: None,
    };
    let delta = match worst_far(0) {
        None => norm,
        Some((x, v)) => {
            let margin = norm - v;
            if margin < delta_min {
                out.violating_sample = Some(x);
                out.violating_value = Some(v);
                return Ok(out);
            }
            0.5 * margin
        }
    };
    out.delta = Some(delta);
    match worst_far(1) {
        Some((x, v)) if v > norm - delta => {
            out.violating_sample = Some(x);
            out.violating_value = Some(v);
        }
        _ => out.verified = true,
    }
    Ok(out)
}
