//! Operator norms `||T||_{p -> r}` and their maximizers.
//!
//! Exact routes cover `p = 1` (best column), `p = inf` with at most 20
//! columns (vertex enumeration), `r = inf` (best row in the dual norm),
//! `r = 1` with at most 20 rows (sign enumeration) and `p = r = 2` (SVD).
//! Everything else goes through a multistart fixed-point ascent.

use nalgebra::DMatrix;
use serde::Serialize;

use super::{cluster_pm, MatrixOperator};
use crate::error::{Error, Result};
use crate::sampling::{gaussian_vec, rng, sphere_point};
use crate::space::{canonical_functional, lp_norm, norming_direction, Exponent};
use crate::tolerance::Tolerances;

pub(crate) const ENUMERATION_LIMIT: usize = 20;
const ASCENT_MAX_ITERS: usize = 5000;
const ASCENT_STEP_TOL: f64 = 1e-13;
/// Relative value gain below which a small step counts as converged.
const ASCENT_GAIN_TOL: f64 = 1e-15;
const ASCENT_GAIN_STEP: f64 = 1e-4;
/// Looser gain tolerance when only a value accurate to about `1e-9` is needed.
const VALUE_GAIN_TOL: f64 = 1e-12;
const EXTRAPOLATION_PERIOD: usize = 5;
const COARSE_RANDOM_STARTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    ColumnMax,
    VertexEnumeration,
    RowDual,
    SignEnumeration,
    Spectral,
    Multistart,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorNorm {
    pub value: f64,
    /// One oriented representative per `+-` cluster of near-maximizers.
    pub maximizers: Vec<Vec<f64>>,
    /// `||T x||` at each representative.
    pub maximizer_values: Vec<f64>,
    pub method: NormMethod,
    /// Some accepted cluster is below the best value by more than rounding.
    pub near_degenerate: bool,
}

impl OperatorNorm {
    pub fn singleton_pair(&self) -> bool {
        self.maximizers.len() == 1
    }
}

pub fn op_norm(t: &MatrixOperator, tol: &Tolerances, seed: u64) -> OperatorNorm {
    op_norm_warm(t, tol, seed, &[])
}

/// Just the value. Cheaper on the spectral route.
pub fn op_norm_value(t: &MatrixOperator, tol: &Tolerances, seed: u64) -> f64 {
    norm_with_warm(t, tol, seed, &[])
}

/// Value plus the best point, reusing `warm` as extra ascent starts.
pub(crate) fn value_warm(
    t: &MatrixOperator,
    tol: &Tolerances,
    seed: u64,
    warm: &[Vec<f64>],
) -> (f64, Vec<f64>) {
    let (cands, _) = candidates(t, tol, seed, warm, ASCENT_GAIN_TOL);
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for (x, v) in cands {
        if v > best.0 {
            best = (v, x);
        }
    }
    best
}

/// `||T||` to roughly `1e-9` relative accuracy, for line searches.
pub(crate) fn norm_coarse(t: &MatrixOperator, tol: &Tolerances, seed: u64, warm: &[Vec<f64>]) -> f64 {
    if t.p() == Exponent::TWO && t.r() == Exponent::TWO {
        return spectral_norm(t.entries());
    }
    let (cands, _) = candidates(t, tol, seed, warm, VALUE_GAIN_TOL);
    cands.iter().fold(0.0f64, |m, c| m.max(c.1))
}

/// `||T||`, seeding the ascent with `warm` where the route needs one.
pub(crate) fn norm_with_warm(t: &MatrixOperator, tol: &Tolerances, seed: u64, warm: &[Vec<f64>]) -> f64 {
    if t.p() == Exponent::TWO && t.r() == Exponent::TWO {
        spectral_norm(t.entries())
    } else {
        value_warm(t, tol, seed, warm).0
    }
}

pub(crate) fn op_norm_warm(
    t: &MatrixOperator,
    tol: &Tolerances,
    seed: u64,
    warm: &[Vec<f64>],
) -> OperatorNorm {
    let (cands, method) = candidates(t, tol, seed, warm, ASCENT_GAIN_TOL);
    let best = cands.iter().fold(0.0f64, |m, c| m.max(c.1));
    if best == 0.0 {
        // zero operator: every unit vector attains
        let n = t.cols();
        let maximizers: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect();
        return OperatorNorm {
            value: 0.0,
            maximizer_values: vec![0.0; maximizers.len()],
            maximizers,
            method,
            near_degenerate: false,
        };
    }
    let accepted: Vec<(Vec<f64>, f64)> = cands
        .into_iter()
        .filter(|(_, v)| *v >= best * (1.0 - tol.optimizer))
        .collect();
    let clusters = cluster_pm(&accepted, tol.cluster);
    let near_degenerate = clusters.len() > 1
        && clusters.iter().any(|c| c.value < best * (1.0 - 1e-12));
    OperatorNorm {
        value: best,
        maximizer_values: clusters.iter().map(|c| c.value).collect(),
        maximizers: clusters.into_iter().map(|c| c.representative).collect(),
        method,
        near_degenerate,
    }
}

pub(crate) fn choose_method(t: &MatrixOperator) -> NormMethod {
    let (p, r) = (t.p(), t.r());
    if p.is_one() {
        NormMethod::ColumnMax
    } else if p.is_infinite() && t.cols() <= ENUMERATION_LIMIT {
        NormMethod::VertexEnumeration
    } else if r.is_infinite() {
        NormMethod::RowDual
    } else if r.is_one() && t.rows() <= ENUMERATION_LIMIT {
        NormMethod::SignEnumeration
    } else if p == Exponent::TWO && r == Exponent::TWO {
        NormMethod::Spectral
    } else {
        NormMethod::Multistart
    }
}

type Candidates = Vec<(Vec<f64>, f64)>;

fn candidates(
    t: &MatrixOperator,
    tol: &Tolerances,
    seed: u64,
    warm: &[Vec<f64>],
    gain_tol: f64,
) -> (Candidates, NormMethod) {
    let method = choose_method(t);
    let c = match method {
        NormMethod::ColumnMax => column_candidates(t),
        NormMethod::VertexEnumeration => vertex_candidates(t, tol),
        NormMethod::RowDual => row_candidates(t, tol),
        NormMethod::SignEnumeration => sign_candidates(t, tol),
        NormMethod::Spectral => spectral_candidates(t, tol, seed),
        NormMethod::Multistart => multistart_candidates(t, tol, seed, warm, gain_tol),
    };
    (c, method)
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

fn column_candidates(t: &MatrixOperator) -> Candidates {
    let n = t.cols();
    (0..n)
        .map(|j| {
            let e = unit(n, j);
            let v = t.image_norm(&e);
            (e, v)
        })
        .collect()
}

/// Sign vectors with a fixed first coordinate, walked in Gray-code order.
fn vertex_candidates(t: &MatrixOperator, tol: &Tolerances) -> Candidates {
    let (m, n) = (t.rows(), t.cols());
    let r = t.r();
    let a = t.entries();
    let mut x = vec![1.0; n];
    let mut y = t.apply(&x);
    let total = 1usize << (n - 1);
    let mut values = Vec::with_capacity(total);
    values.push(lp_norm(&y, r));
    for k in 1..total {
        // bit that changes between gray(k-1) and gray(k), shifted past coordinate 0
        let j = k.trailing_zeros() as usize + 1;
        x[j] = -x[j];
        for i in 0..m {
            y[i] += 2.0 * x[j] * a[(i, j)];
        }
        values.push(lp_norm(&y, r));
    }
    let best = values.iter().fold(0.0f64, |b, &v| b.max(v));
    let mut out = Vec::new();
    let mut x = vec![1.0; n];
    for (k, &v) in values.iter().enumerate() {
        if k > 0 {
            let j = k.trailing_zeros() as usize + 1;
            x[j] = -x[j];
        }
        if v >= best * (1.0 - tol.optimizer) {
            // recompute exactly rather than trusting the running update
            out.push((x.clone(), t.image_norm(&x)));
        }
    }
    out
}

fn row_candidates(t: &MatrixOperator, tol: &Tolerances) -> Candidates {
    let q = t.p().conjugate();
    let a = t.entries();
    (0..t.rows())
        .filter_map(|i| {
            let row: Vec<f64> = a.row(i).iter().copied().collect();
            if lp_norm(&row, q) == 0.0 {
                return None;
            }
            Some(norming_direction(&row, t.p(), tol.formula))
        })
        .flat_map(|x| sup_face_vertices(t.p(), x))
        .map(|x| {
            let v = t.image_norm(&x);
            (x, v)
        })
        .collect()
}

/// For `p = inf` a direction with zero coordinates lies inside a face of the
/// cube, and the face vertex with those coordinates set to one attains the
/// same pairing. Returning both keeps a non-trivial face from passing as a
/// single pair.
fn sup_face_vertices(p: Exponent, x: Vec<f64>) -> Vec<Vec<f64>> {
    if p.is_infinite() && x.iter().any(|&v| v == 0.0) {
        let filled = x.iter().map(|&v| if v == 0.0 { 1.0 } else { v }).collect();
        vec![x, filled]
    } else {
        vec![x]
    }
}

/// `||T||_{p -> 1} = max over sign vectors s of ||T^T s||_q`.
fn sign_candidates(t: &MatrixOperator, tol: &Tolerances) -> Candidates {
    let (m, n) = (t.rows(), t.cols());
    let q = t.p().conjugate();
    let a = t.entries();
    let mut s = vec![1.0; m];
    let mut z = t.transpose_apply(&s);
    let total = 1usize << (m - 1);
    let mut values = Vec::with_capacity(total);
    values.push(lp_norm(&z, q));
    for k in 1..total {
        let i = k.trailing_zeros() as usize + 1;
        s[i] = -s[i];
        for j in 0..n {
            z[j] += 2.0 * s[i] * a[(i, j)];
        }
        values.push(lp_norm(&z, q));
    }
    let best = values.iter().fold(0.0f64, |b, &v| b.max(v));
    let mut out = Vec::new();
    let mut s = vec![1.0; m];
    for (k, &v) in values.iter().enumerate() {
        if k > 0 {
            let i = k.trailing_zeros() as usize + 1;
            s[i] = -s[i];
        }
        if v > 0.0 && v >= best * (1.0 - tol.optimizer) {
            let z = t.transpose_apply(&s);
            let x = norming_direction(&z, t.p(), tol.formula);
            for x in sup_face_vertices(t.p(), x) {
                let val = t.image_norm(&x);
                out.push((x, val));
            }
        }
    }
    out
}

pub(crate) fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    a.singular_values().iter().fold(0.0f64, |m, &s| m.max(s))
}

/// Right singular vectors for the top singular value. A repeated top value
/// yields several independent directions from its eigenspace.
fn spectral_candidates(t: &MatrixOperator, tol: &Tolerances, seed: u64) -> Candidates {
    let n = t.cols();
    let svd = t.entries().clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors were requested");
    let sv = svd.singular_values;
    let s1 = sv.iter().fold(0.0f64, |m, &s| m.max(s));
    if s1 == 0.0 {
        return vec![(unit(n, 0), 0.0)];
    }
    let top: Vec<Vec<f64>> = (0..sv.len())
        .filter(|&i| sv[i] >= s1 * (1.0 - tol.optimizer))
        .map(|i| v_t.row(i).iter().copied().collect())
        .collect();
    let mut out: Candidates = top
        .iter()
        .map(|v| (v.clone(), t.image_norm(v)))
        .collect();
    if top.len() > 1 {
        let project = |g: &[f64]| -> Vec<f64> {
            let mut p = vec![0.0; n];
            for v in &top {
                let c: f64 = v.iter().zip(g).map(|(a, b)| a * b).sum();
                for (pi, vi) in p.iter_mut().zip(v) {
                    *pi += c * vi;
                }
            }
            p
        };
        let push = |p: Vec<f64>, out: &mut Candidates| {
            let nrm = lp_norm(&p, Exponent::TWO);
            if nrm > 1e-8 {
                let x: Vec<f64> = p.iter().map(|v| v / nrm).collect();
                let val = t.image_norm(&x);
                out.push((x, val));
            }
        };
        for i in 0..n {
            push(project(&unit(n, i)), &mut out);
        }
        let mut r = rng(seed);
        for _ in 0..4 {
            let g = gaussian_vec(&mut r, n);
            push(project(&g), &mut out);
        }
    }
    out
}

/// One step of the fixed-point map `x -> dir_p(T^T f_{Tx})`. It never
/// decreases `||Tx||`: `||T x'|| >= f_{Tx}(T x') = ||T^T f_{Tx}||_q >= ||Tx||`.
pub(crate) fn ascent_step(t: &MatrixOperator, x: &[f64], tol: &Tolerances) -> Option<Vec<f64>> {
    let y = t.apply(x);
    if y.iter().all(|&v| v == 0.0) {
        return None;
    }
    let f = canonical_functional(&y, t.r(), tol.formula);
    let z = t.transpose_apply(&f);
    if z.iter().all(|&v| v == 0.0) {
        return None;
    }
    Some(norming_direction(&z, t.p(), tol.formula))
}

/// Iterates of the ascent map from `x0`, stopping at a fixed point.
pub(crate) fn ascent_path(
    t: &MatrixOperator,
    x0: Vec<f64>,
    tol: &Tolerances,
    max_iters: usize,
) -> Vec<(Vec<f64>, f64)> {
    ascent_path_with(t, x0, tol, max_iters, ASCENT_GAIN_TOL, false)
}

fn ascent_path_with(
    t: &MatrixOperator,
    x0: Vec<f64>,
    tol: &Tolerances,
    max_iters: usize,
    gain_tol: f64,
    extrapolate: bool,
) -> Vec<(Vec<f64>, f64)> {
    let v0 = t.image_norm(&x0);
    let mut path = vec![(x0, v0)];
    for _ in 0..max_iters {
        let (x, v) = path.last().expect("path starts non-empty");
        let Some(mut next) = ascent_step(t, x, tol) else {
            break;
        };
        let mut nv = t.image_norm(&next);
        let step = x
            .iter()
            .zip(&next)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if nv < *v {
            break;
        }
        if extrapolate && path.len() % EXTRAPOLATION_PERIOD == 0 && step > ASCENT_STEP_TOL {
            // Push along the drift of the last few iterates while the value
            // keeps rising. Fast modes have died out over the window, so
            // the drift follows the slow one.
            let anchor = &path[path.len() - EXTRAPOLATION_PERIOD].0;
            let drift: Vec<f64> = next.iter().zip(anchor).map(|(a, b)| a - b).collect();
            let mut alpha = 1.0;
            for _ in 0..40 {
                let mut y: Vec<f64> = next.iter().zip(&drift).map(|(a, d)| a + alpha * d).collect();
                let s = lp_norm(&y, t.p());
                if s == 0.0 {
                    break;
                }
                y.iter_mut().for_each(|c| *c /= s);
                let yv = t.image_norm(&y);
                if yv <= nv {
                    break;
                }
                (next, nv) = (y, yv);
                alpha *= 2.0;
            }
        }
        let gain = nv - v;
        path.push((next, nv));
        if step <= ASCENT_STEP_TOL || (gain <= gain_tol * nv && step <= ASCENT_GAIN_STEP) {
            break;
        }
    }
    path
}

fn multistart_candidates(
    t: &MatrixOperator,
    tol: &Tolerances,
    seed: u64,
    warm: &[Vec<f64>],
    gain_tol: f64,
) -> Candidates {
    let n = t.cols();
    let p = t.p();
    let mut starts: Vec<Vec<f64>> = warm
        .iter()
        .filter(|w| w.len() == n && lp_norm(w, p) > 0.0)
        .map(|w| {
            let s = lp_norm(w, p);
            w.iter().map(|v| v / s).collect()
        })
        .collect();
    starts.extend((0..n).map(|i| unit(n, i)));
    let mut r = rng(seed);
    // Coarse line-search evaluations lean on the warm start and the axes.
    let random = if gain_tol >= VALUE_GAIN_TOL {
        COARSE_RANDOM_STARTS
    } else {
        (8 + 2 * n).min(40)
    };
    starts.extend((0..random).map(|_| sphere_point(&mut r, n, p)));
    starts
        .into_iter()
        .map(|x0| {
            let path = ascent_path_with(t, x0, tol, ASCENT_MAX_ITERS, gain_tol, true);
            path.into_iter().next_back().expect("non-empty path")
        })
        .collect()
}

pub(crate) fn check_nonzero(t: &MatrixOperator) -> Result<()> {
    if t.is_zero() {
        Err(Error::ZeroOperator)
    } else {
        Ok(())
    }
}
