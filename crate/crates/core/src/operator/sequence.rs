//! Norming sequences `||T x_k|| -> ||T||` and cluster points of `[A x_k, T x_k]`.

use serde::Serialize;

use super::attainment::norm_attainment_set;
use super::norm::{ascent_path, check_nonzero};
use super::MatrixOperator;
use crate::error::{Error, Result};
use crate::sampling::{gaussian_vec, rng, sphere_point};
use crate::space::{lp_norm, sip_raw};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceMode {
    /// Iterates of the monotone fixed-point ascent.
    Ascent,
    /// Maximizers perturbed by shrinking noise, with alternating signs and
    /// (when `M_T` has several pairs) alternating clusters.
    Perturbed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormingSequence {
    pub mode: Option<SequenceMode>,
    pub vectors: Vec<Vec<f64>>,
    /// `||T x_k||`, nondecreasing.
    pub values: Vec<f64>,
    pub norm_value: f64,
    /// `||T|| - ||T x_last||`
    pub final_gap: f64,
}

fn finish(mode: Option<SequenceMode>, vectors: Vec<Vec<f64>>, t: &MatrixOperator, norm_value: f64) -> NormingSequence {
    let values: Vec<f64> = vectors.iter().map(|x| t.image_norm(x)).collect();
    let last = values.last().copied().unwrap_or(0.0);
    NormingSequence {
        mode,
        vectors,
        values,
        norm_value,
        final_gap: (norm_value - last).max(0.0),
    }
}

/// The constant sequence at `x0` (normalized).
pub fn constant_sequence(t: &MatrixOperator, x0: &[f64], length: usize, tol: &Tolerances, seed: u64) -> Result<NormingSequence> {
    let m = norm_attainment_set(t, tol, seed)?;
    let n = lp_norm(x0, t.p());
    if n == 0.0 {
        return Err(Error::ZeroVector);
    }
    let x: Vec<f64> = x0.iter().map(|v| v / n).collect();
    Ok(finish(None, vec![x; length.max(1)], t, m.norm_value))
}

const PERTURB_START_GAP: f64 = 1e-2;
const PERTURB_RATIO: f64 = 0.5;

pub fn norming_sequence_gen(
    t: &MatrixOperator,
    length: usize,
    mode: SequenceMode,
    tol: &Tolerances,
    seed: u64,
) -> Result<NormingSequence> {
    check_nonzero(t)?;
    if length == 0 {
        return Err(Error::InvalidArgument("sequence length must be positive".into()));
    }
    let m = norm_attainment_set(t, tol, seed)?;
    let norm = m.norm_value;
    let vectors = match mode {
        SequenceMode::Ascent => ascent_vectors(t, length, norm, &m.maximizers[0], tol, seed),
        SequenceMode::Perturbed => perturbed_vectors(t, length, norm, &m.maximizers, seed),
    };
    Ok(finish(Some(mode), vectors, t, norm))
}

fn ascent_vectors(
    t: &MatrixOperator,
    length: usize,
    norm: f64,
    best: &[f64],
    tol: &Tolerances,
    seed: u64,
) -> Vec<Vec<f64>> {
    let (n, p) = (t.cols(), t.p());
    let mut r = rng(seed);
    let mut path = ascent_path(t, sphere_point(&mut r, n, p), tol, length.saturating_sub(1));
    let converged = |path: &[(Vec<f64>, f64)]| {
        path.last().is_some_and(|(_, v)| *v >= norm * (1.0 - tol.optimizer))
    };
    if !converged(&path) {
        // Stalled at a lower critical point; restart next to a maximizer.
        let g = gaussian_vec(&mut r, n);
        let gn = lp_norm(&g, p);
        let start: Vec<f64> = best.iter().zip(&g).map(|(b, gi)| b + 0.3 * gi / gn).collect();
        let sn = lp_norm(&start, p);
        let start = start.iter().map(|v| v / sn).collect();
        path = ascent_path(t, start, tol, length.saturating_sub(1));
    }
    let mut out: Vec<Vec<f64>> = path.into_iter().map(|(x, _)| x).collect();
    out.truncate(length);
    while out.len() < length {
        let last = out.last().expect("non-empty").clone();
        out.push(last);
    }
    out
}

/// `x_k = (-1)^k normalize(m_(k mod c) + s_k w_k)` with `s_k` chosen by
/// bisection so the gap `||T|| - ||T x_k||` is about `g0 * 0.5^k`, never
/// larger than the previous gap.
fn perturbed_vectors(
    t: &MatrixOperator,
    length: usize,
    norm: f64,
    maximizers: &[Vec<f64>],
    seed: u64,
) -> Vec<Vec<f64>> {
    let (n, p) = (t.cols(), t.p());
    let c = maximizers.len().min(2);
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(length);
    let mut prev_gap = f64::INFINITY;
    for k in 0..length {
        let base = &maximizers[k % c];
        let w = gaussian_vec(&mut r, n);
        let wn = lp_norm(&w, p);
        let point = |s: f64| -> Vec<f64> {
            let v: Vec<f64> = base.iter().zip(&w).map(|(b, wi)| b + s * wi / wn).collect();
            let vn = lp_norm(&v, p);
            v.iter().map(|x| x / vn).collect()
        };
        let gap_at = |s: f64| (norm - t.image_norm(&point(s))).max(0.0);
        let target = (PERTURB_START_GAP * norm * PERTURB_RATIO.powi(k as i32)).min(prev_gap);
        let mut s = 0.0;
        if target > 0.0 && gap_at(1.0) > target {
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if gap_at(mid) > target {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            s = lo;
        } else if target > 0.0 {
            s = 1.0;
        }
        let mut x = point(s);
        let mut g = gap_at(s);
        if g > prev_gap {
            x = point(0.0);
            g = gap_at(0.0);
        }
        prev_gap = g;
        if k % 2 == 1 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
        out.push(x);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsequentialSip {
    /// `[A x_k, T x_k]` for every term.
    pub values: Vec<f64>,
    /// Cluster means over the tail half.
    pub cluster_points: Vec<f64>,
    pub all_zero: bool,
    pub zero_tolerance: f64,
}

/// Cluster points of `[A x_k, T x_k]` over the tail of a norming sequence.
pub fn subsequential_sip_test(
    t: &MatrixOperator,
    a: &MatrixOperator,
    seq: &NormingSequence,
    tol: &Tolerances,
) -> Result<SubsequentialSip> {
    t.check_same_spaces(a)?;
    let threshold = tol.optimizer * seq.norm_value;
    if seq.final_gap > threshold {
        return Err(Error::NotNorming {
            gap: seq.final_gap,
            threshold,
        });
    }
    let values: Vec<f64> = seq
        .vectors
        .iter()
        .map(|x| sip_raw(&a.apply(x), &t.apply(x), t.r(), tol.formula))
        .collect();
    let tail_start = values.len() / 2;
    let mut tail: Vec<f64> = values[tail_start..].to_vec();
    tail.sort_by(f64::total_cmp);
    let mut cluster_points = Vec::new();
    let mut group: Vec<f64> = Vec::new();
    for v in tail {
        if let Some(&last) = group.last() {
            if v - last > tol.cluster {
                cluster_points.push(group.iter().sum::<f64>() / group.len() as f64);
                group.clear();
            }
        }
        group.push(v);
    }
    if !group.is_empty() {
        cluster_points.push(group.iter().sum::<f64>() / group.len() as f64);
    }
    let scale = seq
        .vectors
        .iter()
        .map(|x| lp_norm(&a.apply(x), a.r()))
        .fold(0.0f64, f64::max);
    let zero_tolerance = tol.optimizer * (1.0 + seq.norm_value * scale);
    let all_zero = cluster_points.iter().all(|c| c.abs() <= zero_tolerance);
    Ok(SubsequentialSip {
        values,
        cluster_points,
        all_zero,
        zero_tolerance,
    })
}
