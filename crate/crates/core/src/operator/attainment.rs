use serde::Serialize;

use super::norm::{check_nonzero, op_norm, NormMethod};
use super::{cluster_pm, MatrixOperator};
use crate::error::{Error, Result};
use crate::sampling::{rng, sphere_point};
use crate::tolerance::Tolerances;

/// `M_T` (when `delta` is `None`) or a sampled picture of `M_T(delta)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormAttainmentSet {
    pub norm_value: f64,
    /// Unit vectors; for `M_T` one representative per `+-` cluster.
    pub maximizers: Vec<Vec<f64>>,
    pub delta: Option<f64>,
    pub singleton_pair: bool,
    pub near_degenerate: bool,
    pub method: NormMethod,
}

pub fn norm_attainment_set(t: &MatrixOperator, tol: &Tolerances, seed: u64) -> Result<NormAttainmentSet> {
    check_nonzero(t)?;
    let n = op_norm(t, tol, seed);
    Ok(NormAttainmentSet {
        norm_value: n.value,
        singleton_pair: n.maximizers.len() == 1,
        maximizers: n.maximizers,
        delta: None,
        near_degenerate: n.near_degenerate,
        method: n.method,
    })
}

/// Membership in `M_T(delta) = {x in S_X : ||T x|| > ||T|| - delta}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MtDelta {
    pub norm_value: f64,
    pub delta: f64,
    /// Sampled members together with the maximizers of `M_T`.
    pub set: NormAttainmentSet,
}

impl MtDelta {
    /// `x` is normalized first; the zero vector is never a member.
    pub fn contains(&self, t: &MatrixOperator, x: &[f64]) -> bool {
        let nx = crate::space::lp_norm(x, t.p());
        if nx == 0.0 {
            return false;
        }
        t.image_norm(x) / nx > self.norm_value - self.delta
    }
}

const MEMBER_SAMPLES: usize = 2000;

pub fn m_t_delta(t: &MatrixOperator, delta: f64, tol: &Tolerances, seed: u64) -> Result<MtDelta> {
    check_nonzero(t)?;
    let base = op_norm(t, tol, seed);
    if !(delta > 0.0 && delta < base.value) {
        return Err(Error::InvalidDelta {
            delta,
            norm: base.value,
        });
    }
    let threshold = base.value - delta;
    let mut r = rng(seed);
    let mut members = base.maximizers.clone();
    for _ in 0..MEMBER_SAMPLES {
        let x = sphere_point(&mut r, t.cols(), t.p());
        if t.image_norm(&x) > threshold {
            members.push(x);
        }
    }
    let pts: Vec<(Vec<f64>, f64)> = members
        .iter()
        .map(|x| (x.clone(), t.image_norm(x)))
        .collect();
    let singleton_pair = cluster_pm(&pts, tol.cluster).len() == 1;
    Ok(MtDelta {
        norm_value: base.value,
        delta,
        set: NormAttainmentSet {
            norm_value: base.value,
            maximizers: members,
            delta: Some(delta),
            singleton_pair,
            near_degenerate: base.near_degenerate,
            method: base.method,
        },
    })
}
