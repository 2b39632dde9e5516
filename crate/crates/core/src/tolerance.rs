use serde::{Deserialize, Serialize};

/// Numerical tolerances shared by every decision procedure.
///
/// `formula` applies to closed-form identities, `optimizer` to quantities
/// produced by iterative maximization, `cluster` to the radius under which two
/// unit vectors (or two sequence values) are treated as one point, and
/// `orthogonality` is the relative slack in `min ||x + l y|| >= ||x||`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub formula: f64,
    pub optimizer: f64,
    pub cluster: f64,
    pub orthogonality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            formula: 1e-9,
            optimizer: 1e-6,
            cluster: 1e-3,
            orthogonality: 1e-7,
        }
    }
}

impl Tolerances {
    pub fn is_valid(&self) -> bool {
        [self.formula, self.optimizer, self.cluster, self.orthogonality]
            .iter()
            .all(|t| t.is_finite() && *t > 0.0)
    }
}
