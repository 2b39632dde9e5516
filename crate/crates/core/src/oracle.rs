//! Brute-force grid oracles, used to audit the fast paths.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::citation::Citation;
use crate::error::{Error, Result};
use crate::operator::{op_norm, MatrixOperator};
use crate::orthogonality::{bj_orthogonal, directional_class};
use crate::report::{Report, RunConfig};
use crate::sampling::{gaussian_vec, substream, uniform_matrix};
use crate::space::{canonical_functional, dot, is_smooth_point, lp_norm, Exponent, Vector};

/// Largest domain dimension the sphere grid handles.
pub const SPHERE_GRID_MAX_DIM: usize = 3;

const ZOOM_ROUNDS: usize = 3;
const ZOOM_POINTS: usize = 401;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaGridMin {
    pub global: f64,
    /// Minimum over `lambda >= 0`.
    pub plus: f64,
    /// Minimum over `lambda <= 0`.
    pub minus: f64,
    pub argmin: f64,
}

fn odd(n: usize) -> usize {
    n.max(3) | 1
}

/// Minimizes `||x + l y||` on an odd grid over `|l| <= 10 ||x|| / ||y||`
/// (so `l = 0` is a node), then zooms around the best node of each half.
pub fn lambda_grid_min(x: &[f64], y: &[f64], p: Exponent, points: usize) -> LambdaGridMin {
    let xn = lp_norm(x, p);
    let yn = lp_norm(y, p);
    if yn == 0.0 {
        return LambdaGridMin {
            global: xn,
            plus: xn,
            minus: xn,
            argmin: 0.0,
        };
    }
    let r = 10.0 * xn / yn;
    let g = odd(points);
    let mid = g / 2;
    let step = r / mid as f64;
    let mut buf = vec![0.0; x.len()];
    let mut f = |l: f64| {
        for i in 0..x.len() {
            buf[i] = x[i] + l * y[i];
        }
        lp_norm(&buf, p)
    };
    let (mut best_minus, mut best_plus) = ((f(0.0), 0.0), (f(0.0), 0.0));
    for j in 0..g {
        let l = (j as f64 - mid as f64) * step;
        let v = f(l);
        if j <= mid && v < best_minus.0 {
            best_minus = (v, l);
        }
        if j >= mid && v < best_plus.0 {
            best_plus = (v, l);
        }
    }
    let mut zoom = |(mut v, mut c): (f64, f64), lo: f64, hi: f64| {
        let mut w = step;
        for _ in 0..ZOOM_ROUNDS {
            let a = (c - w).max(lo);
            let b = (c + w).min(hi);
            let h = (b - a) / (ZOOM_POINTS - 1) as f64;
            for k in 0..ZOOM_POINTS {
                let l = a + h * k as f64;
                let fv = f(l);
                if fv < v {
                    v = fv;
                    c = l;
                }
            }
            w = 2.0 * h;
        }
        (v, c)
    };
    let minus = zoom(best_minus, -r, 0.0);
    let plus = zoom(best_plus, 0.0, r);
    let (global, argmin) = if plus.0 < minus.0 { plus } else { minus };
    LambdaGridMin {
        global,
        plus: plus.0,
        minus: minus.0,
        argmin,
    }
}

/// Unit-sphere points of `l_p^n` (`n <= 3`) from the radial projection of a
/// cube-surface grid. Only the faces `c[axis] = +1` are kept, so callers must
/// maximize even functions. Edges and face centres are grid nodes.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    n: usize,
    p: Exponent,
    k: usize,
    points: Vec<f64>,
}

impl SphereGrid {
    pub fn new(n: usize, p: Exponent, points: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        if n > SPHERE_GRID_MAX_DIM {
            return Err(Error::OracleTooLarge {
                dim: n,
                max: SPHERE_GRID_MAX_DIM,
            });
        }
        let k = match n {
            1 => 1,
            2 => odd(points / 2),
            _ => odd(((points / 3) as f64).sqrt() as usize),
        };
        let mut grid = Self {
            n,
            p,
            k,
            points: Vec::new(),
        };
        let per_face = if n == 3 { k * k } else { k };
        let mut pts = Vec::with_capacity(n * n * per_face);
        for axis in 0..n {
            for idx in 0..per_face {
                let (u, w) = grid.face_coords(idx);
                pts.extend(grid.project(axis, u, w));
            }
        }
        grid.points = pts;
        Ok(grid)
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn coord(&self, j: usize) -> f64 {
        if self.k == 1 {
            0.0
        } else {
            -1.0 + 2.0 * j as f64 / (self.k - 1) as f64
        }
    }

    fn face_coords(&self, idx: usize) -> (f64, f64) {
        if self.n == 3 {
            (self.coord(idx / self.k), self.coord(idx % self.k))
        } else {
            (self.coord(idx), 0.0)
        }
    }

    fn project(&self, axis: usize, u: f64, w: f64) -> Vec<f64> {
        let mut c = vec![0.0; self.n];
        c[axis] = 1.0;
        let mut others = (0..self.n).filter(|&i| i != axis);
        if let Some(i) = others.next() {
            c[i] = u;
        }
        if let Some(i) = others.next() {
            c[i] = w;
        }
        let s = lp_norm(&c, self.p);
        c.iter_mut().for_each(|v| *v /= s);
        c
    }

    /// Best value of the even function `f` over the grid, refined by zooming
    /// in on the best node's face.
    pub fn maximize<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> (f64, Vec<f64>) {
        let mut best = (f64::NEG_INFINITY, 0usize);
        for (i, x) in self.points.chunks_exact(self.n).enumerate() {
            let v = f(x);
            if v > best.0 {
                best = (v, i);
            }
        }
        let (mut bv, i) = best;
        let mut bx = self.points[i * self.n..(i + 1) * self.n].to_vec();
        if self.n == 1 {
            return (bv, bx);
        }
        let per_face = self.len() / self.n;
        let axis = i / per_face;
        let (mut bu, mut bw) = self.face_coords(i % per_face);
        let mut radius = 2.0 / (self.k - 1) as f64;
        let zk = if self.n == 2 { ZOOM_POINTS } else { 41 };
        let zw = if self.n == 3 { zk } else { 1 };
        for _ in 0..ZOOM_ROUNDS {
            let (ua, ub) = ((bu - radius).max(-1.0), (bu + radius).min(1.0));
            let (wa, wb) = ((bw - radius).max(-1.0), (bw + radius).min(1.0));
            let (cu, cw) = (bu, bw);
            for a in 0..zk {
                let u = ua + (ub - ua) * a as f64 / (zk - 1) as f64;
                for b in 0..zw {
                    let w = if self.n == 3 {
                        wa + (wb - wa) * b as f64 / (zk - 1) as f64
                    } else {
                        cw
                    };
                    let x = self.project(axis, u, w);
                    let v = f(&x);
                    if v > bv {
                        (bv, bx, bu, bw) = (v, x, u, w);
                    }
                }
            }
            if (bu, bw) == (cu, cw) {
                radius *= 4.0 / (zk - 1) as f64;
            }
        }
        (bv, bx)
    }
}

/// `||T||` by exhaustive search over a domain sphere grid built for `T`.
pub fn op_norm_grid(t: &MatrixOperator, points: usize) -> Result<f64> {
    let grid = SphereGrid::new(t.cols(), t.p(), points)?;
    op_norm_on_grid(t, &grid)
}

/// `||T||` on a prebuilt grid, which must match `T`'s domain.
pub fn op_norm_on_grid(t: &MatrixOperator, grid: &SphereGrid) -> Result<f64> {
    if grid.n != t.cols() || grid.p != t.p() {
        return Err(Error::SpaceMismatch);
    }
    let (rows, cols) = (t.rows(), t.cols());
    let r = t.r();
    let e = t.entries();
    let mut img = vec![0.0; rows];
    let (v, _) = grid.maximize(|x| {
        for (i, out) in img.iter_mut().enumerate() {
            *out = (0..cols).map(|j| e[(i, j)] * x[j]).sum();
        }
        lp_norm(&img, r)
    });
    Ok(v)
}

/// Smoothness by one-sided difference quotients along each coordinate axis.
/// A convex function is differentiable exactly where its partials exist.
pub fn smooth_point_fd(x: &[f64], p: Exponent) -> bool {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return false;
    }
    let h = 1e-10 * scale;
    let base = lp_norm(x, p);
    let mut buf = x.to_vec();
    for i in 0..x.len() {
        buf[i] = x[i] + h;
        let right = (lp_norm(&buf, p) - base) / h;
        buf[i] = x[i] - h;
        let left = (base - lp_norm(&buf, p)) / h;
        buf[i] = x[i];
        if (right - left).abs() > 1e-2 {
            return false;
        }
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleTarget {
    BjOrthogonal,
    OpNorm,
    IsSmoothPoint,
}

impl std::str::FromStr for OracleTarget {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "bj_orthogonal" => Ok(Self::BjOrthogonal),
            "op_norm" => Ok(Self::OpNorm),
            "is_smooth_point" => Ok(Self::IsSmoothPoint),
            _ => Err(Error::InvalidArgument(format!(
                "unknown oracle target '{s}' (expected bj_orthogonal, op_norm or is_smooth_point)"
            ))),
        }
    }
}

/// Oracle inputs. Explicit instances win over `count` random draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleInputs {
    #[serde(default = "default_p")]
    pub p: Exponent,
    #[serde(default)]
    pub r: Option<Exponent>,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default)]
    pub rows: Option<usize>,
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub pairs: Option<Vec<(Vec<f64>, Vec<f64>)>>,
    #[serde(default)]
    pub operators: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default)]
    pub vectors: Option<Vec<Vec<f64>>>,
}

fn default_p() -> Exponent {
    Exponent::TWO
}

fn default_dim() -> usize {
    2
}

impl Default for OracleInputs {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields default")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleOutcome {
    pub target: OracleTarget,
    pub instances: usize,
    /// Disagreeing verdicts (or relative error for `op_norm`).
    pub max_discrepancy: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub worst_instance: Option<usize>,
}

/// `x` with a random partner drawn as: free, annihilated by the canonical
/// functional of `x`, or annihilated and then nudged along `x`.
fn orth_pair<R: Rng>(rng: &mut R, n: usize, p: Exponent, kind: usize) -> (Vec<f64>, Vec<f64>) {
    let x = gaussian_vec(rng, n);
    let v = gaussian_vec(rng, n);
    if kind == 0 {
        return (x, v);
    }
    let f = canonical_functional(&x, p, 1e-9);
    let c = dot(&f, &v) / dot(&f, &x);
    let mut y: Vec<f64> = v.iter().zip(&x).map(|(a, b)| a - c * b).collect();
    if kind == 2 {
        let eta = rng.random_range(1e-3..1e-2) * lp_norm(&y, p) / lp_norm(&x, p);
        for (yi, xi) in y.iter_mut().zip(&x) {
            *yi += eta * xi;
        }
    }
    (x, y)
}

/// A vector with a forced tie in magnitude and a forced zero, half the time.
fn smooth_probe_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut x = gaussian_vec(rng, n);
    if n >= 2 && rng.random_bool(0.5) {
        let i = rng.random_range(0..n);
        let j = (i + 1 + rng.random_range(0..n - 1)) % n;
        if rng.random_bool(0.5) {
            x[j] = x[i].abs() * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let m = x[i].abs();
            for (k, v) in x.iter_mut().enumerate() {
                if k != i && k != j {
                    *v = v.clamp(-0.9 * m, 0.9 * m);
                }
            }
        } else {
            x[j] = 0.0;
        }
    }
    x
}

pub fn run_oracle(target: OracleTarget, inputs: &OracleInputs, config: &RunConfig) -> Result<(Report, OracleOutcome)> {
    config.validate()?;
    let tol = &config.tolerances;
    let p = inputs.p;
    let mut worst = (0.0f64, None);
    let mut record = |i: usize, d: f64| {
        if d > worst.0 {
            worst = (d, Some(i));
        }
    };
    let (instances, tolerance, citations) = match target {
        OracleTarget::BjOrthogonal => {
            let eps = inputs.eps.unwrap_or(0.0);
            let pairs: Vec<(Vec<f64>, Vec<f64>)> = match &inputs.pairs {
                Some(v) => v.clone(),
                None => {
                    check_dim(inputs.dim)?;
                    let mut rng = substream(config.seed, 0);
                    (0..inputs.count.unwrap_or(100))
                        .map(|i| orth_pair(&mut rng, inputs.dim, p, i % 3))
                        .collect()
                }
            };
            for (i, (x, y)) in pairs.iter().enumerate() {
                let xv = Vector::in_lp(x.clone(), p)?;
                let yv = Vector::in_lp(y.clone(), p)?;
                check_dim(xv.dim())?;
                let fast = bj_orthogonal(&xv, &yv, tol)?;
                let dc = directional_class(&xv, &yv, eps, tol)?;
                let g = lambda_grid_min(x, y, p, config.grid_density);
                let xn = xv.norm();
                let orth = g.global >= xn - tol.orthogonality * xn;
                let thr = (1.0 - eps * eps).sqrt() * xn - tol.orthogonality * xn;
                let miss = [
                    orth != fast.orthogonal,
                    (g.plus >= thr) != dc.in_plus,
                    (g.minus >= thr) != dc.in_minus,
                ];
                record(i, miss.iter().filter(|m| **m).count() as f64);
            }
            (pairs.len(), 0.0, vec![Citation::Plumbing])
        }
        OracleTarget::OpNorm => {
            let r = inputs.r.unwrap_or(p);
            let ops: Vec<Vec<Vec<f64>>> = match &inputs.operators {
                Some(v) => v.clone(),
                None => {
                    check_dim(inputs.dim)?;
                    let rows = inputs.rows.unwrap_or(inputs.dim);
                    let mut rng = substream(config.seed, 1);
                    (0..inputs.count.unwrap_or(50))
                        .map(|_| uniform_matrix(&mut rng, rows, inputs.dim))
                        .collect()
                }
            };
            let mut grid: Option<SphereGrid> = None;
            for (i, e) in ops.iter().enumerate() {
                let t = MatrixOperator::new(e, p, r)?;
                check_dim(t.cols())?;
                let fast = op_norm(&t, tol, config.seed).value;
                if grid.as_ref().is_none_or(|g| g.n != t.cols()) {
                    grid = Some(SphereGrid::new(t.cols(), p, config.grid_density)?);
                }
                let grid = op_norm_on_grid(&t, grid.as_ref().expect("built above"))?;
                let rel = if grid > 0.0 {
                    (fast - grid).abs() / grid
                } else {
                    fast.abs()
                };
                record(i, rel);
            }
            (ops.len(), 1e-4, vec![Citation::Plumbing])
        }
        OracleTarget::IsSmoothPoint => {
            let vectors: Vec<Vec<f64>> = match &inputs.vectors {
                Some(v) => v.clone(),
                None => {
                    check_dim(inputs.dim)?;
                    let mut rng = substream(config.seed, 2);
                    (0..inputs.count.unwrap_or(100))
                        .map(|_| smooth_probe_vector(&mut rng, inputs.dim))
                        .collect()
                }
            };
            for (i, x) in vectors.iter().enumerate() {
                let xv = Vector::in_lp(x.clone(), p)?;
                check_dim(xv.dim())?;
                let fast = is_smooth_point(&xv, tol)?.smooth;
                record(i, f64::from(u8::from(fast != smooth_point_fd(x, p))));
            }
            (vectors.len(), 0.0, vec![Citation::SemiInnerProduct])
        }
    };
    let outcome = OracleOutcome {
        target,
        instances,
        max_discrepancy: worst.0,
        tolerance,
        passed: worst.0 <= tolerance,
        worst_instance: worst.1,
    };
    let echo = serde_json::json!({
        "target": target,
        "inputs": inputs,
        "seed": config.seed,
        "grid_density": config.grid_density,
        "tolerances": config.tolerances,
    });
    let report = Report::new("oracle", &echo, &outcome, citations)?;
    Ok((report, outcome))
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::ZeroDimension)
    } else if n > SPHERE_GRID_MAX_DIM {
        Err(Error::OracleTooLarge {
            dim: n,
            max: SPHERE_GRID_MAX_DIM,
        })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(p: f64) -> Exponent {
        Exponent::new(p).unwrap()
    }

    #[test]
    fn lambda_grid_finds_known_minima() {
        // p=2: min over l of ||(1,0) + l(1,1)|| = 1/sqrt 2 at l = -1/2.
        let g = lambda_grid_min(&[1.0, 0.0], &[1.0, 1.0], Exponent::TWO, 10_001);
        assert!((g.global - 0.5f64.sqrt()).abs() < 1e-9);
        assert!((g.argmin + 0.5).abs() < 1e-6);
        assert_eq!(g.plus, 1.0);
        let g = lambda_grid_min(&[1.0, 0.0], &[0.0, 1.0], Exponent::TWO, 1001);
        assert_eq!(g.global, 1.0);
    }

    #[test]
    fn sphere_grid_matches_closed_forms() {
        let t = MatrixOperator::new(&[vec![1.0, 1.0], vec![1.0, 1.0]], Exponent::TWO, Exponent::TWO).unwrap();
        assert!((op_norm_grid(&t, 100_000).unwrap() - 2.0).abs() < 1e-9);
        let t = MatrixOperator::new(
            &[vec![1.0, 2.0, 0.0], vec![0.0, 1.0, -1.0], vec![3.0, 0.0, 1.0]],
            Exponent::ONE,
            Exponent::TWO,
        )
        .unwrap();
        // Column-max formula.
        let expect = 10.0f64.sqrt();
        assert!((op_norm_grid(&t, 30_000).unwrap() - expect).abs() < 1e-12);
        let big = MatrixOperator::diagonal(&[1.0; 4], Exponent::TWO, Exponent::TWO).unwrap();
        assert!(matches!(op_norm_grid(&big, 1000), Err(Error::OracleTooLarge { dim: 4, .. })));
    }

    #[test]
    fn finite_differences_flag_kinks() {
        assert!(!smooth_point_fd(&[1.0, 1.0, 1.0], Exponent::INFINITY));
        assert!(!smooth_point_fd(&[1.0, 0.0], Exponent::ONE));
        assert!(smooth_point_fd(&[1.0, 0.0], e(1.5)));
        assert!(smooth_point_fd(&[1.0, 0.5], Exponent::INFINITY));
        assert!(smooth_point_fd(&[1.0, -0.5, 2.0], Exponent::ONE));
    }

    #[test]
    fn oracle_runs_agree() {
        let mut cfg = RunConfig::default();
        cfg.grid_density = 20_001;
        let inputs = OracleInputs {
            p: e(3.0),
            count: Some(30),
            ..OracleInputs::default()
        };
        let (_, o) = run_oracle(OracleTarget::BjOrthogonal, &inputs, &cfg).unwrap();
        assert!(o.passed, "{o:?}");
        let inputs = OracleInputs {
            p: Exponent::INFINITY,
            dim: 3,
            vectors: Some(vec![vec![1.0, 1.0, 1.0], vec![-1.0, 1.0, -1.0], vec![1.0, 0.5, 0.2]]),
            ..OracleInputs::default()
        };
        let (_, o) = run_oracle(OracleTarget::IsSmoothPoint, &inputs, &cfg).unwrap();
        assert!(o.passed);
        let inputs = OracleInputs {
            p: e(1.5),
            count: Some(5),
            ..OracleInputs::default()
        };
        let (_, o) = run_oracle(OracleTarget::OpNorm, &inputs, &cfg).unwrap();
        assert!(o.passed, "{o:?}");
        let inputs = OracleInputs {
            dim: 4,
            ..OracleInputs::default()
        };
        assert!(run_oracle(OracleTarget::OpNorm, &inputs, &cfg).is_err());
    }
}
