//! Diagonal operators `T e_n = d_n e_n` on `l_p`, `1 < p < inf`, analysed
//! exactly from a rational symbol.
//!
//! For `n` beyond every real root of the tail's numerator, denominator and
//! derivative numerator, the tail is strictly monotone (or constant) and of
//! fixed sign. Everything before that point is evaluated in exact
//! arithmetic, so the supremum, its maximizers and the tail limit are exact.

mod rational;
mod span;
mod symbol;

use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::citation::Citation;
use crate::error::{Error, Result};
use crate::operator::MatrixOperator;
use crate::space::Exponent;

pub use rational::{Poly, RatFn, Q};
pub use span::{span_closure_test, IndexSet, SequenceComponent, SpanVerdict};
pub use symbol::{parse_expr, parse_symbol, Symbol};

use rational::{q_int, q_to_f64};

/// Head lengths beyond this are refused rather than evaluated.
pub const HEAD_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalOperator {
    symbol: Symbol,
    p: Exponent,
    /// Indices `1..=head_end` are tabulated; the tail beyond is monotone.
    head_end: u64,
    tail_shape: TailShape,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailShape {
    Constant,
    /// `|d_n|` strictly increases towards its limit past the head.
    Increasing,
    /// `|d_n|` strictly decreases towards its limit past the head.
    Decreasing,
}

impl DiagonalOperator {
    pub fn new(symbol: Symbol, p: Exponent) -> Result<Self> {
        if !p.is_smooth() {
            return Err(Error::InvalidArgument(format!(
                "diagonal operators need 1 < p < inf, got p = {p}"
            )));
        }
        let tail = &symbol.tail;
        if tail.limit().is_none() {
            return Err(Error::UnboundedSymbol(symbol.source.clone()));
        }
        let mut bound = q_int(1);
        for poly in [tail.num().clone(), tail.den().clone(), tail.derivative_numerator()] {
            if let Some(b) = poly.root_bound() {
                if b > bound {
                    bound = b;
                }
            }
        }
        let mut head_end = bound.ceil().to_integer().to_u64().unwrap_or(u64::MAX);
        if let Some((&last, _)) = symbol.overrides.iter().next_back() {
            head_end = head_end.max(last);
        }
        // one extra tail term so the first tail index never ties the head
        head_end = head_end.saturating_add(1);
        if head_end > HEAD_LIMIT {
            return Err(Error::UnsupportedSymbol(format!(
                "{} needs {head_end} head terms (limit {HEAD_LIMIT})",
                symbol.source
            )));
        }
        for n in 1..=head_end {
            if !symbol.overrides.contains_key(&n) && tail.eval(&q_int(n as i64)).is_none() {
                return Err(Error::UnsupportedSymbol(format!("tail has a pole at n = {n}")));
            }
        }
        let tail_shape = if tail.is_constant() {
            TailShape::Constant
        } else {
            let probe = q_int(head_end as i64 + 1);
            let v = tail.eval(&probe).expect("no poles past the head");
            let lim = tail.limit().expect("bounded");
            if v.abs() < lim.abs() {
                TailShape::Increasing
            } else {
                TailShape::Decreasing
            }
        };
        Ok(Self {
            symbol,
            p,
            head_end,
            tail_shape,
        })
    }

    pub fn parse(src: &str, p: Exponent) -> Result<Self> {
        Self::new(parse_symbol(src)?, p)
    }

    pub fn symbol(&self) -> &Symbol {
        &self.symbol
    }

    pub fn p(&self) -> Exponent {
        self.p
    }

    pub fn head_end(&self) -> u64 {
        self.head_end
    }

    pub fn tail_shape(&self) -> TailShape {
        self.tail_shape
    }

    /// Exact `d_n`, `n >= 1`.
    pub fn entry(&self, n: u64) -> Q {
        assert!(n >= 1, "indices start at 1");
        match self.symbol.overrides.get(&n) {
            Some(v) => v.clone(),
            None => self
                .symbol
                .tail
                .eval(&q_int(n as i64))
                .expect("poles are rejected at construction"),
        }
    }

    pub fn entry_f64(&self, n: u64) -> f64 {
        q_to_f64(&self.entry(n))
    }

    /// `lim |d_n|`
    pub fn tail_limit(&self) -> Q {
        self.symbol.tail.limit().expect("bounded").abs()
    }

    /// The first `n` diagonal entries.
    pub fn truncate(&self, n: usize) -> Vec<f64> {
        (1..=n as u64).map(|i| self.entry_f64(i)).collect()
    }

    /// The `N x N` truncation as an operator `l_p^N -> l_p^N`.
    pub fn truncation(&self, n: usize) -> Result<MatrixOperator> {
        MatrixOperator::diagonal(&self.truncate(n), self.p, self.p)
    }

    /// `sup |d_n|` over `n` outside `skip`, with whether it is attained there.
    fn sup_excluding(&self, skip: &[u64]) -> (Q, bool) {
        let mut best = Q::zero();
        let mut attained = false;
        for n in 1..=self.head_end {
            if skip.contains(&n) {
                continue;
            }
            let v = self.entry(n).abs();
            if v > best || !attained && v == best {
                best = v;
                attained = true;
            }
        }
        let lim = self.tail_limit();
        let tail_max = match self.tail_shape {
            TailShape::Decreasing => Some(self.entry(self.head_end + 1).abs()),
            TailShape::Constant => Some(lim.clone()),
            TailShape::Increasing => None,
        };
        match tail_max {
            Some(v) if v > best => (v, true),
            Some(v) if v == best => (best, true),
            _ if lim > best => (lim, false),
            _ => (best, attained),
        }
    }
}

/// Maximizing indices: a finite list plus, for a constant tail at the
/// supremum, every index from some point on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ArgmaxSet {
    pub indices: Vec<u64>,
    pub cofinite_from: Option<u64>,
}

impl ArgmaxSet {
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty() && self.cofinite_from.is_none()
    }

    pub fn single(&self) -> Option<u64> {
        match (self.indices.as_slice(), self.cofinite_from) {
            ([k], None) => Some(*k),
            _ => None,
        }
    }

    pub fn contains(&self, n: u64) -> bool {
        self.indices.contains(&n) || self.cofinite_from.is_some_and(|f| n >= f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagonalSpectrumSummary {
    pub sup_value: f64,
    /// Exact `sup`, as `a` or `a/b`.
    pub sup_exact: String,
    pub argmax: ArgmaxSet,
    pub limsup_tail: f64,
    pub limsup_exact: String,
    pub attained: bool,
    pub tail_shape: TailShape,
    pub head_end: u64,
}

fn q_string(q: &Q) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn exact_sup_and_argmax(d: &DiagonalOperator) -> (Q, ArgmaxSet) {
    let (sup, _) = d.sup_excluding(&[]);
    let indices: Vec<u64> = (1..=d.head_end).filter(|&n| d.entry(n).abs() == sup).collect();
    let mut cofinite_from = None;
    match d.tail_shape {
        TailShape::Constant if d.tail_limit() == sup => {
            cofinite_from = Some(d.head_end + 1);
        }
        _ => {}
    }
    (
        sup,
        ArgmaxSet {
            indices,
            cofinite_from,
        },
    )
}

pub fn diag_norm(d: &DiagonalOperator) -> DiagonalSpectrumSummary {
    let (sup, argmax) = exact_sup_and_argmax(d);
    let lim = d.tail_limit();
    DiagonalSpectrumSummary {
        sup_value: q_to_f64(&sup),
        sup_exact: q_string(&sup),
        attained: !argmax.is_empty(),
        argmax,
        limsup_tail: q_to_f64(&lim),
        limsup_exact: q_string(&lim),
        tail_shape: d.tail_shape,
        head_end: d.head_end,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagonalMt {
    pub attained: bool,
    /// `M_T` is the set of unit vectors supported on these indices.
    pub support: ArgmaxSet,
    pub singleton_pair: bool,
    pub description: String,
}

/// `||Tx||^p = sum |d_i|^p |x_i|^p` reaches `sup^p` on the unit sphere iff
/// `x` is supported on the maximizing indices.
pub fn diag_mt(d: &DiagonalOperator) -> DiagonalMt {
    let s = diag_norm(d);
    if s.sup_value == 0.0 {
        return DiagonalMt {
            attained: true,
            support: ArgmaxSet {
                indices: Vec::new(),
                cofinite_from: Some(1),
            },
            singleton_pair: false,
            description: "zero operator: every unit vector".into(),
        };
    }
    let description = if !s.attained {
        "empty: the supremum is not attained".to_string()
    } else {
        let mut parts: Vec<String> = s.argmax.indices.iter().map(u64::to_string).collect();
        if let Some(f) = s.argmax.cofinite_from {
            parts.push(format!("n >= {f}"));
        }
        match s.argmax.single() {
            Some(k) => format!("{{+-e_{k}}}"),
            None => format!("unit vectors supported on {{{}}}", parts.join(", ")),
        }
    };
    DiagonalMt {
        attained: s.attained,
        singleton_pair: s.argmax.single().is_some(),
        support: s.argmax,
        description,
    }
}

/// Basis norming sequences of `T`.
pub fn canonical_norming_sequences(d: &DiagonalOperator) -> Vec<SequenceComponent> {
    let s = diag_norm(d);
    let mut out: Vec<SequenceComponent> = s
        .argmax
        .indices
        .iter()
        .map(|&k| SequenceComponent::Constant { index: k })
        .collect();
    if let Some(f) = s.argmax.cofinite_from {
        out.push(SequenceComponent::Basis {
            indices: IndexSet::tail(f, Vec::new()),
        });
    } else if d.tail_limit() == exact_sup_and_argmax(d).0 && s.sup_value > 0.0 {
        // |d_n| -> sup along every index the tail formula governs; maximizers
        // are left out so the sequence never touches them
        let skip = |n: &u64| d.symbol.overrides.contains_key(n) || s.argmax.indices.contains(n);
        let from = (1..).find(|n| !skip(n)).expect("finitely many exclusions");
        let mut except: Vec<u64> = d.symbol.overrides.keys().copied().collect();
        except.extend(s.argmax.indices.iter().copied());
        except.retain(|&k| k > from);
        except.sort_unstable();
        except.dedup();
        out.push(SequenceComponent::Basis {
            indices: IndexSet::tail(from, except),
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Concentration {
    pub head_index: u64,
    pub sup_value: f64,
    /// `sup` over all other indices, tail limit included.
    pub runner_up: f64,
    pub gap: f64,
    pub gap_exact: String,
    pub certificate: bool,
}

impl Concentration {
    /// For unit `y` with `||Ty|| >= v`: `|y_head|^p >= (v^p - s^p) / (sup^p - s^p)`,
    /// from `||Ty||^p <= |y_head|^p sup^p + s^p (1 - |y_head|^p)`.
    pub fn head_mass_lower_bound(&self, v: f64, p: Exponent) -> f64 {
        if !self.certificate {
            return 0.0;
        }
        let p = p.value();
        let (sp, rp) = (self.sup_value.powf(p), self.runner_up.powf(p));
        ((v.powf(p) - rp) / (sp - rp)).clamp(0.0, 1.0).powf(1.0 / p)
    }
}

pub fn norming_sequence_concentration(d: &DiagonalOperator, head_index: u64) -> Result<Concentration> {
    let (sup, argmax) = exact_sup_and_argmax(d);
    if argmax.single() != Some(head_index) {
        return Err(Error::InvalidArgument(format!(
            "index {head_index} is not the unique maximizer"
        )));
    }
    let (s, _) = d.sup_excluding(&[head_index]);
    let gap = &sup - &s;
    Ok(Concentration {
        head_index,
        sup_value: q_to_f64(&sup),
        runner_up: q_to_f64(&s),
        gap: q_to_f64(&gap),
        gap_exact: q_string(&gap),
        certificate: gap > Q::zero(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagonalVerdict {
    Smooth,
    NotSmooth,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagonalSmoothnessReport {
    pub symbol: String,
    pub p: Exponent,
    pub verdict: DiagonalVerdict,
    pub reason: String,
    pub summary: DiagonalSpectrumSummary,
    pub mt: DiagonalMt,
    pub concentration: Option<Concentration>,
    /// A norming sequence whose closed span misses the maximizer.
    pub witness_sequence: Option<SequenceComponent>,
    pub span_verdict: Option<SpanVerdict>,
    pub citations: Vec<Citation>,
    pub static_facts: Vec<String>,
}

pub fn diag_smoothness(d: &DiagonalOperator) -> DiagonalSmoothnessReport {
    let summary = diag_norm(d);
    let mt = diag_mt(d);
    let static_facts = vec![
        format!("l_{} is reflexive", d.p),
        format!("l_{} has the Kadets-Klee property", d.p),
        format!("every nonzero vector of l_{} is a smooth point", d.p),
    ];
    let mut report = DiagonalSmoothnessReport {
        symbol: d.symbol.source.clone(),
        p: d.p,
        verdict: DiagonalVerdict::Undetermined,
        reason: String::new(),
        summary,
        mt,
        concentration: None,
        witness_sequence: None,
        span_verdict: None,
        citations: Vec::new(),
        static_facts,
    };
    if report.summary.sup_value == 0.0 {
        report.verdict = DiagonalVerdict::NotSmooth;
        report.reason = "zero operator attains its norm everywhere".into();
        report.citations = vec![Citation::AttainmentCharacterization];
        return report;
    }
    if !report.summary.attained {
        report.reason = "supremum not attained, so M_T is empty".into();
        report.citations = vec![Citation::AttainmentCharacterization];
        return report;
    }
    let Some(k) = report.summary.argmax.single() else {
        report.verdict = DiagonalVerdict::NotSmooth;
        report.reason = format!("M_T is {}, not a single pair", report.mt.description);
        report.citations = vec![Citation::AttainmentCharacterization];
        return report;
    };
    let c = norming_sequence_concentration(d, k).expect("unique maximizer checked above");
    if c.certificate {
        report.verdict = DiagonalVerdict::Smooth;
        report.reason = format!(
            "M_T = {{+-e_{k}}}, T e_{k} is smooth, and the gap {} forces every norming sequence towards +-e_{k}",
            c.gap_exact
        );
        report.citations = vec![
            Citation::CompactNormingSufficiency,
            Citation::AttainmentCharacterization,
        ];
    } else {
        let witness = canonical_norming_sequences(d)
            .into_iter()
            .find(|s| !matches!(s, SequenceComponent::Constant { .. }));
        match witness {
            Some(seq) => {
                let verdict = span_closure_test(k, std::slice::from_ref(&seq));
                if verdict == SpanVerdict::NotInSpan {
                    report.verdict = DiagonalVerdict::NotSmooth;
                    report.reason = format!(
                        "the norming sequence {} has a closed span missing e_{k}",
                        seq.describe()
                    );
                    report.citations = vec![Citation::SpanClosureNecessity];
                } else {
                    report.reason = "gap is zero but no separating norming sequence was found".into();
                    report.citations = vec![Citation::SpanClosureNecessity];
                }
                report.span_verdict = Some(verdict);
                report.witness_sequence = Some(seq);
            }
            None => {
                // a runner-up equal to sup that is attained would have made the argmax larger
                report.reason = "gap is zero but no basis norming sequence avoids the maximizer".into();
                report.citations = vec![Citation::SpanClosureNecessity];
            }
        }
    }
    report.concentration = Some(c);
    report
}

/// The two reference symbols.
pub const APPROACHING_TAIL_SYMBOL: &str = "override{1:1}; tail: 1 - 1/n";
pub const SEPARATED_TAIL_SYMBOL: &str = "override{1:1}; tail: 1/2";

#[cfg(test)]
mod tests {
    use super::*;

    fn op(src: &str) -> DiagonalOperator {
        DiagonalOperator::parse(src, Exponent::TWO).unwrap()
    }

    #[test]
    fn approaching_tail() {
        let d = op(APPROACHING_TAIL_SYMBOL);
        let s = diag_norm(&d);
        assert_eq!(s.sup_exact, "1");
        assert_eq!(s.argmax.indices, vec![1]);
        assert_eq!(s.limsup_exact, "1");
        assert!(s.attained);
        let mt = diag_mt(&d);
        assert!(mt.singleton_pair);
        let c = norming_sequence_concentration(&d, 1).unwrap();
        assert_eq!(c.gap, 0.0);
        assert!(!c.certificate);
        let seqs = canonical_norming_sequences(&d);
        assert!(seqs.contains(&SequenceComponent::Basis {
            indices: IndexSet::tail(2, vec![])
        }));
        let r = diag_smoothness(&d);
        assert_eq!(r.verdict, DiagonalVerdict::NotSmooth);
        assert_eq!(r.citations, vec![Citation::SpanClosureNecessity]);
    }

    #[test]
    fn separated_tail() {
        for p in [1.5, 2.0, 3.0, 7.0] {
            let d = DiagonalOperator::parse(SEPARATED_TAIL_SYMBOL, Exponent::new(p).unwrap()).unwrap();
            let s = diag_norm(&d);
            assert_eq!(s.sup_exact, "1");
            assert_eq!(s.limsup_exact, "1/2");
            let c = norming_sequence_concentration(&d, 1).unwrap();
            assert_eq!(c.gap_exact, "1/2");
            assert!(c.certificate);
            let r = diag_smoothness(&d);
            assert_eq!(r.verdict, DiagonalVerdict::Smooth);
            assert!(r.citations.contains(&Citation::CompactNormingSufficiency));
        }
        let seqs = canonical_norming_sequences(&op(SEPARATED_TAIL_SYMBOL));
        assert_eq!(seqs, vec![SequenceComponent::Constant { index: 1 }]);
    }

    #[test]
    fn constant_and_unattained_symbols() {
        let d = op("tail: -3/4");
        let s = diag_norm(&d);
        assert_eq!(s.sup_exact, "3/4");
        assert_eq!(s.argmax.cofinite_from, Some(d.head_end() + 1));
        assert!(s.argmax.contains(1) && s.argmax.contains(10_000));
        assert_eq!(diag_smoothness(&d).verdict, DiagonalVerdict::NotSmooth);

        let d = op("tail: 1 - 1/n");
        let s = diag_norm(&d);
        assert!(!s.attained);
        assert_eq!(s.sup_exact, "1");
        assert!(!diag_mt(&d).attained);
        assert_eq!(diag_smoothness(&d).verdict, DiagonalVerdict::Undetermined);
    }

    #[test]
    fn two_index_argmax() {
        let d = op("override{1:1, 2:1}; tail: 0");
        let mt = diag_mt(&d);
        assert!(!mt.singleton_pair);
        assert_eq!(mt.support.indices, vec![1, 2]);
        assert_eq!(diag_smoothness(&d).verdict, DiagonalVerdict::NotSmooth);
        assert!(norming_sequence_concentration(&d, 1).is_err());
    }

    #[test]
    fn rational_tail_with_interior_maximum() {
        // n / (n^2 + 4) peaks at n = 2 with value 1/4
        let d = op("tail: n / (n^2 + 4)");
        let s = diag_norm(&d);
        assert_eq!(s.sup_exact, "1/4");
        assert_eq!(s.argmax.indices, vec![2]);
        assert_eq!(s.limsup_exact, "0");
        let c = norming_sequence_concentration(&d, 2).unwrap();
        // runner-up n = 1 and n = 3 give 1/5 and 3/13
        assert_eq!(c.gap_exact, "1/52");
        assert_eq!(diag_smoothness(&d).verdict, DiagonalVerdict::Smooth);
    }

    #[test]
    fn rejects_bad_symbols() {
        assert!(matches!(
            DiagonalOperator::parse("tail: n", Exponent::TWO),
            Err(Error::UnboundedSymbol(_))
        ));
        assert!(matches!(
            DiagonalOperator::parse("tail: 1/(n - 3)", Exponent::TWO),
            Err(Error::UnsupportedSymbol(_))
        ));
        assert!(DiagonalOperator::parse("override{3:0}; tail: 1/(n - 3)", Exponent::TWO).is_ok());
        assert!(matches!(
            DiagonalOperator::parse("tail: 1", Exponent::ONE),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn truncations() {
        let d = op(SEPARATED_TAIL_SYMBOL);
        assert_eq!(d.truncate(3), vec![1.0, 0.5, 0.5]);
        let t = d.truncation(4).unwrap();
        assert_eq!(t.rows(), 4);
    }

    #[test]
    fn head_mass_bound() {
        let d = op(SEPARATED_TAIL_SYMBOL);
        let c = norming_sequence_concentration(&d, 1).unwrap();
        assert_eq!(c.head_mass_lower_bound(1.0, Exponent::TWO), 1.0);
        assert_eq!(c.head_mass_lower_bound(0.5, Exponent::TWO), 0.0);
    }
}
