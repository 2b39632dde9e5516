//! Result tags attached to every verdict in a report.

use serde::Serialize;

/// Each variant serializes to the short tag used in JSON reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Citation {
    /// Semi-inner-product axioms and norm compatibility.
    #[serde(rename = "Def-1.1")]
    SemiInnerProduct,
    /// `[A x_n, T x_n] -> 0` along norming sequences of a smooth `T`.
    #[serde(rename = "Thm-2.1")]
    NormingSequenceSip,
    /// Smooth iff `M_T = {+-x0}` with `T x0` smooth (reflexive domain, compact `T`).
    #[serde(rename = "Thm-2.2")]
    AttainmentCharacterization,
    /// Hilbert case: smooth iff the norm restricted to `x0`'s complement is strictly smaller.
    #[serde(rename = "Thm-2.3")]
    HilbertComplement,
    /// `T _|_ A` iff `T x0 _|_ A x0` when `M_T = {+-x0}`.
    #[serde(rename = "Thm-3.4")]
    OrthogonalityTransfer,
    /// Norming sequences with convergent subsequences give smoothness.
    #[serde(rename = "Thm-3.5")]
    CompactNormingSufficiency,
    /// Smoothness forces `x0` into the closed span of every norming sequence.
    #[serde(rename = "Thm-3.7")]
    SpanClosureNecessity,
    /// Frechet differentiability through `M_T(delta)` localization.
    #[serde(rename = "Thm-3.8")]
    FrechetLocalization,
    /// Diagonal symbol with tail `1 - 1/n`.
    #[serde(rename = "Ex-1")]
    ApproachingTailExample,
    /// Diagonal symbol with tail `1/2`.
    #[serde(rename = "Ex-2")]
    SeparatedTailExample,
    /// Numerical plumbing with no mathematical result behind it.
    #[serde(rename = "plumbing")]
    Plumbing,
}

impl Citation {
    pub fn tag(self) -> &'static str {
        match self {
            Citation::SemiInnerProduct => "Def-1.1",
            Citation::NormingSequenceSip => "Thm-2.1",
            Citation::AttainmentCharacterization => "Thm-2.2",
            Citation::HilbertComplement => "Thm-2.3",
            Citation::OrthogonalityTransfer => "Thm-3.4",
            Citation::CompactNormingSufficiency => "Thm-3.5",
            Citation::SpanClosureNecessity => "Thm-3.7",
            Citation::FrechetLocalization => "Thm-3.8",
            Citation::ApproachingTailExample => "Ex-1",
            Citation::SeparatedTailExample => "Ex-2",
            Citation::Plumbing => "plumbing",
        }
    }

    pub const ALL: [Citation; 11] = [
        Citation::SemiInnerProduct,
        Citation::NormingSequenceSip,
        Citation::AttainmentCharacterization,
        Citation::HilbertComplement,
        Citation::OrthogonalityTransfer,
        Citation::CompactNormingSufficiency,
        Citation::SpanClosureNecessity,
        Citation::FrechetLocalization,
        Citation::ApproachingTailExample,
        Citation::SeparatedTailExample,
        Citation::Plumbing,
    ];
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serialized_tags_match() {
        for c in Citation::ALL {
            assert_eq!(serde_json::to_string(&c).unwrap(), format!("\"{}\"", c.tag()));
        }
    }
}
