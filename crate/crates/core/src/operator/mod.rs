//! Dense operators between finite-dimensional `l_p` spaces.
//!
//! Every finite-dimensional operator is compact and its domain is reflexive,
//! so the smoothness decision here is exact up to how well the norm
//! attainment set is resolved: `M_T = {+-x0}` together with a smooth image
//! `T x0` characterizes smooth `T`.

mod attainment;
mod differentiability;
mod norm;
mod sequence;
mod smoothness;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{lp_norm, Exponent, NormSpec, Vector};

pub use attainment::{m_t_delta, norm_attainment_set, MtDelta, NormAttainmentSet};
pub use differentiability::{
    frechet_deviation_table, frechet_uniformity_probe, gateaux_derivative, mt_delta_localization,
    mt_delta_localization_at, FrechetRow, FrechetTable, GateauxEstimate, Localization,
    DEFAULT_H_SCHEDULE,
};
pub use norm::{op_norm, op_norm_value, NormMethod, OperatorNorm};
pub use sequence::{
    constant_sequence, norming_sequence_gen, subsequential_sip_test, NormingSequence,
    SequenceMode, SubsequentialSip,
};
pub use smoothness::{
    hilbert_h0_test, hilbert_h0_test_at, orthogonality_transfer_test, smoothness_decide,
    smoothness_decide_with, transfer_test_at, HilbertRestriction, OperatorSmoothnessReport,
    TransferOutcome, TransferRecord, Verdict,
};

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixOperator {
    entries: DMatrix<f64>,
    domain: NormSpec,
    codomain: NormSpec,
}

/// JSON shape `{entries: [[...]], p, r}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixInput {
    pub entries: Vec<Vec<f64>>,
    pub p: Exponent,
    pub r: Exponent,
}

impl MatrixOperator {
    /// Row-major entries mapping `l_p^cols` into `l_r^rows`.
    pub fn new(rows: &[Vec<f64>], p: Exponent, r: Exponent) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, |row| row.len());
        if m == 0 || n == 0 {
            return Err(Error::ZeroDimension);
        }
        if let Some(bad) = rows.iter().find(|row| row.len() != n) {
            return Err(Error::ShapeMismatch {
                rows: m,
                cols: bad.len(),
                expected_rows: m,
                expected_cols: n,
            });
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("matrix entries must be finite".into()));
        }
        let entries = DMatrix::from_fn(m, n, |i, j| rows[i][j]);
        Ok(Self {
            entries,
            domain: NormSpec::new(p, n)?,
            codomain: NormSpec::new(r, m)?,
        })
    }

    pub fn from_matrix(entries: DMatrix<f64>, domain: NormSpec, codomain: NormSpec) -> Result<Self> {
        if entries.ncols() != domain.dim || entries.nrows() != codomain.dim {
            return Err(Error::ShapeMismatch {
                rows: entries.nrows(),
                cols: entries.ncols(),
                expected_rows: codomain.dim,
                expected_cols: domain.dim,
            });
        }
        Ok(Self {
            entries,
            domain,
            codomain,
        })
    }

    pub fn diagonal(diag: &[f64], p: Exponent, r: Exponent) -> Result<Self> {
        let n = diag.len();
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { diag[i] } else { 0.0 }).collect())
            .collect();
        Self::new(&rows, p, r)
    }

    pub fn from_input(input: &MatrixInput) -> Result<Self> {
        Self::new(&input.entries, input.p, input.r)
    }

    pub fn to_input(&self) -> MatrixInput {
        MatrixInput {
            entries: self.rows_vec(),
            p: self.domain.p,
            r: self.codomain.p,
        }
    }

    pub fn rows_vec(&self) -> Vec<Vec<f64>> {
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.entries[(i, j)]).collect())
            .collect()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn domain(&self) -> NormSpec {
        self.domain
    }

    pub fn codomain(&self) -> NormSpec {
        self.codomain
    }

    pub fn p(&self) -> Exponent {
        self.domain.p
    }

    pub fn r(&self) -> Exponent {
        self.codomain.p
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&v| v == 0.0)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let (m, n) = self.entries.shape();
        let mut y = vec![0.0; m];
        for j in 0..n {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            for (i, yi) in y.iter_mut().enumerate() {
                *yi += self.entries[(i, j)] * xj;
            }
        }
        y
    }

    pub fn transpose_apply(&self, y: &[f64]) -> Vec<f64> {
        let (m, n) = self.entries.shape();
        (0..n)
            .map(|j| (0..m).map(|i| self.entries[(i, j)] * y[i]).sum())
            .collect()
    }

    pub fn apply_vector(&self, x: &Vector) -> Result<Vector> {
        if x.space() != self.domain {
            return Err(Error::DimensionMismatch {
                expected: self.domain.dim,
                found: x.dim(),
            });
        }
        Vector::new(self.apply(x.coords()), self.codomain)
    }

    /// `||T x||_r`
    pub fn image_norm(&self, x: &[f64]) -> f64 {
        lp_norm(&self.apply(x), self.codomain.p)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            entries: &self.entries * c,
            ..self.clone()
        }
    }

    /// `self + lambda * other`
    pub fn plus(&self, lambda: f64, other: &MatrixOperator) -> Result<Self> {
        self.check_same_spaces(other)?;
        Ok(Self {
            entries: &self.entries + &other.entries * lambda,
            ..self.clone()
        })
    }

    /// Same entries, new exponents.
    pub fn with_exponents(&self, p: Exponent, r: Exponent) -> Self {
        Self {
            entries: self.entries.clone(),
            domain: NormSpec { p, dim: self.cols() },
            codomain: NormSpec { p: r, dim: self.rows() },
        }
    }

    pub(crate) fn check_same_spaces(&self, other: &MatrixOperator) -> Result<()> {
        if self.entries.shape() != other.entries.shape() {
            return Err(Error::ShapeMismatch {
                rows: other.rows(),
                cols: other.cols(),
                expected_rows: self.rows(),
                expected_cols: self.cols(),
            });
        }
        if self.domain != other.domain || self.codomain != other.codomain {
            return Err(Error::SpaceMismatch);
        }
        Ok(())
    }
}

impl Serialize for MatrixOperator {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_input().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MatrixOperator {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let input = MatrixInput::deserialize(deserializer)?;
        MatrixOperator::from_input(&input).map_err(serde::de::Error::custom)
    }
}

/// Unit vectors identified up to sign and Euclidean distance `radius`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cluster {
    pub representative: Vec<f64>,
    pub value: f64,
    pub members: usize,
}

fn euclid_dist_pm(a: &[f64], b: &[f64]) -> f64 {
    let (mut dm, mut dp) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dm += (x - y) * (x - y);
        dp += (x + y) * (x + y);
    }
    dm.min(dp).sqrt()
}

/// Flips `x` so that its first non-negligible coordinate is positive.
pub(crate) fn orient(mut x: Vec<f64>) -> Vec<f64> {
    let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if let Some(first) = x.iter().find(|v| v.abs() > 1e-9 * m) {
        if *first < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
    }
    x
}

/// Greedy +- clustering, visiting candidates by decreasing value so each
/// representative is the best point of its cluster.
pub(crate) fn cluster_pm(points: &[(Vec<f64>, f64)], radius: f64) -> Vec<Cluster> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[b].1.total_cmp(&points[a].1).then(a.cmp(&b)));
    let mut clusters: Vec<Cluster> = Vec::new();
    for i in order {
        let (x, v) = &points[i];
        match clusters
            .iter_mut()
            .find(|c| euclid_dist_pm(&c.representative, x) < radius)
        {
            Some(c) => c.members += 1,
            None => clusters.push(Cluster {
                representative: orient(x.clone()),
                value: *v,
                members: 1,
            }),
        }
    }
    clusters
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_and_shapes() {
        let t = MatrixOperator::new(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]], Exponent::TWO, Exponent::ONE)
            .unwrap();
        assert_eq!((t.rows(), t.cols()), (2, 3));
        assert_eq!(t.apply(&[1.0, 0.0, -1.0]), vec![-2.0, -2.0]);
        assert_eq!(t.transpose_apply(&[1.0, 1.0]), vec![5.0, 7.0, 9.0]);
        assert!(MatrixOperator::new(&[vec![1.0], vec![1.0, 2.0]], Exponent::TWO, Exponent::TWO).is_err());
        assert!(MatrixOperator::new(&[], Exponent::TWO, Exponent::TWO).is_err());
    }

    #[test]
    fn json_round_trip() {
        let json = r#"{"entries": [[1, 0], [0, 0.5]], "p": "inf", "r": 3}"#;
        let t: MatrixOperator = serde_json::from_str(json).unwrap();
        assert!(t.p().is_infinite());
        assert_eq!(t.r().value(), 3.0);
        let back: MatrixOperator = serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn plus_requires_matching_spaces() {
        let t = MatrixOperator::diagonal(&[1.0, 0.5], Exponent::TWO, Exponent::TWO).unwrap();
        let a = MatrixOperator::diagonal(&[0.0, 1.0], Exponent::TWO, Exponent::TWO).unwrap();
        assert_eq!(t.plus(2.0, &a).unwrap().rows_vec(), vec![vec![1.0, 0.0], vec![0.0, 2.5]]);
        let b = a.with_exponents(Exponent::ONE, Exponent::TWO);
        assert_eq!(t.plus(1.0, &b), Err(Error::SpaceMismatch));
    }

    #[test]
    fn clustering_merges_antipodes() {
        let s = 0.5f64.sqrt();
        let pts = vec![
            (vec![1.0, 0.0], 1.0),
            (vec![-1.0, 1e-5], 1.0),
            (vec![0.0, 1.0], 0.9),
            (vec![s, s], 0.95),
        ];
        let c = cluster_pm(&pts, 1e-3);
        assert_eq!(c.len(), 3);
        assert_eq!(c[0].members, 2);
        assert!(c[0].representative[0] > 0.0);
        assert_eq!(c[1].value, 0.95);
    }
}
