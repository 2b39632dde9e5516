//! Smoothness of operators through norm attainment, with transfer audits.

use nalgebra::DMatrix;
use serde::Serialize;

use super::attainment::{norm_attainment_set, NormAttainmentSet};
use super::norm::{check_nonzero, norm_coarse, norm_with_warm, spectral_norm};
use super::MatrixOperator;
use crate::citation::Citation;
use crate::error::{Error, Result};
use crate::minimize::golden_section;
use crate::orthogonality::{bj_orthogonal, two_constraint_solution};
use crate::sampling::{gaussian_matrix, substream};
use crate::space::{canonical_functional, dot, is_smooth_point, lp_norm, sip_raw, Exponent, Vector};
use crate::tolerance::Tolerances;

const TRANSFER_BRACKET: f64 = 4.0;
const TRANSFER_EVALS: usize = 50;
const DEFAULT_AUDIT_SAMPLES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Smooth,
    NotSmooth,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditOrigin {
    /// `A = B - (f(B x0) / f(T x0)) T`, so that `T x0 _|_ A x0`.
    Kernel,
    Random,
    /// Built to break transfer or the semi-inner-product test.
    Constructed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferOutcome {
    pub x0: Vec<f64>,
    /// `T _|_ A` decided from `min_l ||T + l A||`.
    pub t_perp_a: bool,
    /// `T x0 _|_ A x0` in the codomain.
    pub image_perp: bool,
    pub consistent: bool,
    pub min_value: f64,
    pub minimizer: f64,
    pub norm_value: f64,
    /// `[A x0, T x0]`
    pub sip_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferRecord {
    pub origin: AuditOrigin,
    pub a: MatrixOperator,
    pub outcome: TransferOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorSmoothnessReport {
    pub verdict: Verdict,
    pub norm_value: f64,
    pub attainment: NormAttainmentSet,
    pub x0: Vec<f64>,
    pub image: Vec<f64>,
    pub image_smooth: bool,
    pub violated: Option<String>,
    pub counterexample: Option<TransferRecord>,
    pub transfer_audit: Vec<TransferRecord>,
    pub citations: Vec<Citation>,
}

impl OperatorSmoothnessReport {
    /// Some audited or constructed `A` separates `T _|_ A` from `T x0 _|_ A x0`.
    pub fn transfer_counterexample_found(&self) -> bool {
        self.transfer_audit
            .iter()
            .chain(self.counterexample.iter())
            .any(|r| !r.outcome.consistent)
    }
}

/// Decides `T _|_ A` by minimizing `l -> ||T + l A||` on `|l| <= 4||T||/||A||`.
fn operator_line_min(
    t: &MatrixOperator,
    a: &MatrixOperator,
    tol: &Tolerances,
    seed: u64,
    warm: &[Vec<f64>],
) -> (bool, f64, f64, f64) {
    let nt = norm_with_warm(t, tol, seed, warm);
    let na = norm_with_warm(a, tol, seed, &[]);
    if na == 0.0 {
        return (true, nt, 0.0, nt);
    }
    let half = TRANSFER_BRACKET * nt / na;
    let m = golden_section(
        |l| {
            let s = t.plus(l, a).expect("shapes checked by caller");
            norm_coarse(&s, tol, seed, warm)
        },
        -half,
        half,
        &[0.0],
        TRANSFER_EVALS,
    );
    let value = m.value.min(nt);
    (value >= nt * (1.0 - tol.optimizer), value, m.argmin, nt)
}

/// Audit form: compares `T _|_ A` with `T x0 _|_ A x0` at a caller-chosen `x0`.
pub fn transfer_test_at(
    t: &MatrixOperator,
    a: &MatrixOperator,
    x0: &[f64],
    tol: &Tolerances,
    seed: u64,
) -> Result<TransferOutcome> {
    t.check_same_spaces(a)?;
    check_nonzero(t)?;
    if x0.len() != t.cols() {
        return Err(Error::DimensionMismatch {
            expected: t.cols(),
            found: x0.len(),
        });
    }
    let (t_perp_a, min_value, minimizer, norm_value) =
        operator_line_min(t, a, tol, seed, &[x0.to_vec()]);
    let tx = t.apply(x0);
    let ax = a.apply(x0);
    if tx.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroVector);
    }
    let image_perp = bj_orthogonal(
        &Vector::new(tx.clone(), t.codomain())?,
        &Vector::new(ax.clone(), t.codomain())?,
        tol,
    )?
    .orthogonal;
    Ok(TransferOutcome {
        x0: x0.to_vec(),
        t_perp_a,
        image_perp,
        consistent: t_perp_a == image_perp,
        min_value,
        minimizer,
        norm_value,
        sip_value: sip_raw(&ax, &tx, t.r(), tol.formula),
    })
}

/// Requires `M_T = {+-x0}`; uses that `x0`.
pub fn orthogonality_transfer_test(
    t: &MatrixOperator,
    a: &MatrixOperator,
    tol: &Tolerances,
    seed: u64,
) -> Result<TransferOutcome> {
    t.check_same_spaces(a)?;
    let m = norm_attainment_set(t, tol, seed)?;
    if !m.singleton_pair {
        return Err(Error::NotSingletonPair {
            pairs: m.maximizers.len(),
            near_degenerate: m.near_degenerate,
        });
    }
    transfer_test_at(t, a, &m.maximizers[0], tol, seed)
}

fn rank_one(u: &[f64], phi: &[f64], like: &MatrixOperator) -> Result<MatrixOperator> {
    let m = DMatrix::from_fn(u.len(), phi.len(), |i, j| u[i] * phi[j]);
    MatrixOperator::from_matrix(m, like.domain(), like.codomain())
}

/// `A z = phi1(z) T x1 - phi2(z) T x2` with `phi_i(x_j) = delta_ij`. Then
/// `||T + l A|| >= max(|1 + l| ||T x1||, |1 - l| ||T x2||)`, so `T _|_ A`,
/// while `A x1 = T x1` is not orthogonal to `T x1`.
fn two_maximizer_counterexample(
    t: &MatrixOperator,
    x1: &[f64],
    x2: &[f64],
) -> Result<Option<MatrixOperator>> {
    let (Some(phi1), Some(phi2)) = (
        two_constraint_solution(x1, x2, 1.0),
        two_constraint_solution(x2, x1, 1.0),
    ) else {
        return Ok(None);
    };
    let (tx1, tx2) = (t.apply(x1), t.apply(x2));
    let a1 = rank_one(&tx1, &phi1, t)?;
    let a2 = rank_one(&tx2, &phi2, t)?;
    Ok(Some(a1.plus(-1.0, &a2)?))
}

/// With norming functionals `f != g` of `T x0`, `A z = psi(z) w` where
/// `g(w) = 0`, `f(w) = ||T x0||` and `psi` norms `x0`. Transfer gives
/// `T _|_ A`, yet `[A x0, T x0]` need not vanish.
fn nonsmooth_image_counterexample(
    t: &MatrixOperator,
    x0: &[f64],
    f: &[f64],
    g: &[f64],
    tol: &Tolerances,
) -> Result<Option<MatrixOperator>> {
    let y = t.apply(x0);
    let Some(w) = two_constraint_solution(f, g, lp_norm(&y, t.r())) else {
        return Ok(None);
    };
    let psi = canonical_functional(x0, t.p(), tol.formula);
    Ok(Some(rank_one(&w, &psi, t)?))
}

pub fn smoothness_decide(t: &MatrixOperator, tol: &Tolerances, seed: u64) -> Result<OperatorSmoothnessReport> {
    smoothness_decide_with(t, tol, seed, DEFAULT_AUDIT_SAMPLES)
}

pub fn smoothness_decide_with(
    t: &MatrixOperator,
    tol: &Tolerances,
    seed: u64,
    audit_samples: usize,
) -> Result<OperatorSmoothnessReport> {
    let attainment = norm_attainment_set(t, tol, seed)?;
    let norm_value = attainment.norm_value;
    let x0 = attainment.maximizers[0].clone();
    let image = t.apply(&x0);
    let image_vec = Vector::new(image.clone(), t.codomain())?;
    let image_verdict = is_smooth_point(&image_vec, tol)?;
    let mut report = OperatorSmoothnessReport {
        verdict: Verdict::Smooth,
        norm_value,
        attainment,
        x0: x0.clone(),
        image: image.clone(),
        image_smooth: image_verdict.smooth,
        violated: None,
        counterexample: None,
        transfer_audit: Vec::new(),
        citations: vec![
            Citation::AttainmentCharacterization,
            Citation::OrthogonalityTransfer,
        ],
    };

    if !report.attainment.singleton_pair {
        report.verdict = Verdict::NotSmooth;
        let pairs = report.attainment.maximizers.len();
        report.violated = Some(format!(
            "norm attained on {pairs} distinct +- pairs{}",
            if report.attainment.near_degenerate {
                " (near-degenerate)"
            } else {
                ""
            }
        ));
        let x2 = report.attainment.maximizers[1].clone();
        if let Some(a) = two_maximizer_counterexample(t, &x0, &x2)? {
            let outcome = transfer_test_at(t, &a, &x0, tol, seed)?;
            report.counterexample = Some(TransferRecord {
                origin: AuditOrigin::Constructed,
                a,
                outcome,
            });
        }
        return Ok(report);
    }

    if !image_verdict.smooth {
        report.verdict = Verdict::NotSmooth;
        report.violated = Some("image of the maximizer is not a smooth point".into());
        report.citations.push(Citation::NormingSequenceSip);
        let f = &image_verdict.witnesses[0].coeffs;
        let g = &image_verdict.witnesses[1].coeffs;
        if let Some(a) = nonsmooth_image_counterexample(t, &x0, f, g, tol)? {
            let outcome = transfer_test_at(t, &a, &x0, tol, seed)?;
            report.counterexample = Some(TransferRecord {
                origin: AuditOrigin::Constructed,
                a,
                outcome,
            });
        }
        return Ok(report);
    }

    let f = canonical_functional(&image, t.r(), tol.formula);
    let fy = dot(&f, &image);
    for k in 0..audit_samples {
        let mut r = substream(seed, k as u64);
        let b = MatrixOperator::new(&gaussian_matrix(&mut r, t.rows(), t.cols()), t.p(), t.r())?;
        let (origin, a) = if k % 3 == 2 {
            (AuditOrigin::Random, b)
        } else {
            let c = dot(&f, &b.apply(&x0)) / fy;
            (AuditOrigin::Kernel, b.plus(-c, t)?)
        };
        if a.is_zero() {
            continue;
        }
        let outcome = transfer_test_at(t, &a, &x0, tol, seed)?;
        report.transfer_audit.push(TransferRecord { origin, a, outcome });
    }
    if report.transfer_counterexample_found() {
        report.verdict = Verdict::Undetermined;
        report.violated = Some("transfer audit disagrees with the attainment test".into());
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HilbertRestriction {
    pub x0: Vec<f64>,
    pub norm_value: f64,
    /// `||T||` restricted to the orthogonal complement of `x0`.
    pub restricted_norm: f64,
    pub strict: bool,
}

/// Orthonormal basis of the complement of `x0` by Gram-Schmidt on
/// `x0, e_1, ..., e_n`.
fn complement_basis(x0: &[f64]) -> Vec<Vec<f64>> {
    let n = x0.len();
    let nx = lp_norm(x0, Exponent::TWO);
    let mut basis = vec![x0.iter().map(|v| v / nx).collect::<Vec<f64>>()];
    for i in 0..n {
        if basis.len() == n {
            break;
        }
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &v);
                v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= c * bi);
            }
        }
        let nv = lp_norm(&v, Exponent::TWO);
        if nv > 1e-8 {
            basis.push(v.iter().map(|x| x / nv).collect());
        }
    }
    basis.remove(0);
    basis
}

pub fn hilbert_h0_test_at(t: &MatrixOperator, x0: &[f64], tol: &Tolerances) -> Result<HilbertRestriction> {
    if t.p() != Exponent::TWO || t.r() != Exponent::TWO {
        return Err(Error::NotHilbert {
            p: t.p().value(),
            r: t.r().value(),
        });
    }
    check_nonzero(t)?;
    if x0.len() != t.cols() {
        return Err(Error::DimensionMismatch {
            expected: t.cols(),
            found: x0.len(),
        });
    }
    if lp_norm(x0, Exponent::TWO) == 0.0 {
        return Err(Error::ZeroVector);
    }
    let norm_value = spectral_norm(t.entries());
    let basis = complement_basis(x0);
    let restricted_norm = if basis.is_empty() {
        0.0
    } else {
        let q = DMatrix::from_fn(t.cols(), basis.len(), |i, j| basis[j][i]);
        spectral_norm(&(t.entries() * q))
    };
    Ok(HilbertRestriction {
        x0: x0.to_vec(),
        norm_value,
        restricted_norm,
        strict: restricted_norm < norm_value * (1.0 - tol.optimizer),
    })
}

pub fn hilbert_h0_test(t: &MatrixOperator, tol: &Tolerances, seed: u64) -> Result<HilbertRestriction> {
    if t.p() != Exponent::TWO || t.r() != Exponent::TWO {
        return Err(Error::NotHilbert {
            p: t.p().value(),
            r: t.r().value(),
        });
    }
    let m = norm_attainment_set(t, tol, seed)?;
    if !m.singleton_pair {
        return Err(Error::NotSingletonPair {
            pairs: m.maximizers.len(),
            near_degenerate: m.near_degenerate,
        });
    }
    hilbert_h0_test_at(t, &m.maximizers[0], tol)
}
