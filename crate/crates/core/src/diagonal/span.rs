//! Closed spans of symbolic vector sequences in `l_p`, `1 < p < inf`.
//!
//! The fragment: basis vectors `e_j` over an index set, and perturbations
//! `v_k = normalize(e_b + c(k) e_k)` with `c` rational and `k` ranging over
//! an index set. `e_b` lies in the closed span of infinitely many `v_k`
//! exactly when `sum |c(k)|^(-q) = inf` (Holder with the conjugate `q`),
//! i.e. when `deg c <= 0`; once `e_b` is there, every `e_k` with
//! `c(k) != 0` follows.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::rational::{q_int, RatFn};
use super::symbol::parse_expr;

/// `finite` together with `{n >= tail_from} \ except`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSet {
    #[serde(default)]
    pub finite: Vec<u64>,
    #[serde(default)]
    pub tail_from: Option<u64>,
    #[serde(default)]
    pub except: Vec<u64>,
}

impl IndexSet {
    pub fn finite(mut v: Vec<u64>) -> Self {
        v.sort_unstable();
        v.dedup();
        IndexSet {
            finite: v,
            tail_from: None,
            except: Vec::new(),
        }
    }

    pub fn tail(from: u64, mut except: Vec<u64>) -> Self {
        except.sort_unstable();
        except.dedup();
        IndexSet {
            finite: Vec::new(),
            tail_from: Some(from),
            except,
        }
    }

    pub fn contains(&self, n: u64) -> bool {
        self.finite.contains(&n) || self.tail_from.is_some_and(|f| n >= f && !self.except.contains(&n))
    }

    pub fn is_infinite(&self) -> bool {
        self.tail_from.is_some()
    }

    pub fn intersects(&self, other: &IndexSet) -> bool {
        (self.is_infinite() && other.is_infinite())
            || self.finite.iter().any(|&n| other.contains(n))
            || other.finite.iter().any(|&n| self.contains(n))
    }

    /// `self` without the indices in `drop`.
    fn without(&self, drop: &[u64]) -> IndexSet {
        let mut out = self.clone();
        out.finite.retain(|n| !drop.contains(n));
        if out.tail_from.is_some() {
            out.except.extend(drop.iter().copied());
            out.except.sort_unstable();
            out.except.dedup();
        }
        out
    }

    /// Some index with at most `limit` as upper bound of the search.
    fn finite_members_up_to(&self, limit: u64) -> Vec<u64> {
        (1..=limit).filter(|&n| self.contains(n)).collect()
    }

    fn describe(&self) -> String {
        let mut parts: Vec<String> = self.finite.iter().map(u64::to_string).collect();
        if let Some(f) = self.tail_from {
            if self.except.is_empty() {
                parts.push(format!("n >= {f}"));
            } else {
                let ex: Vec<String> = self.except.iter().map(u64::to_string).collect();
                parts.push(format!("n >= {f} except {}", ex.join(", ")));
            }
        }
        format!("{{{}}}", parts.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SequenceComponent {
    /// `e_index` repeated.
    Constant { index: u64 },
    /// `e_n` for `n` in `indices`, in increasing order.
    Basis { indices: IndexSet },
    /// `normalize(e_base + c(k) e_k)` for `k` in `moving`; `coeff` is an
    /// expression in `k` (or `n`).
    Perturbed {
        base: u64,
        coeff: String,
        moving: IndexSet,
    },
    /// Anything else; never decided.
    Opaque { description: String },
}

impl SequenceComponent {
    pub fn describe(&self) -> String {
        match self {
            SequenceComponent::Constant { index } => format!("e_{index} (constant)"),
            SequenceComponent::Basis { indices } => format!("e_n, n in {}", indices.describe()),
            SequenceComponent::Perturbed { base, coeff, moving } => {
                format!("normalize(e_{base} + ({coeff}) e_k), k in {}", moving.describe())
            }
            SequenceComponent::Opaque { description } => description.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum SpanVerdict {
    InSpan,
    NotInSpan,
    Undecidable { reason: String },
}

struct Perturbation {
    base: u64,
    coeff: RatFn,
    /// Moving indices with `k != base` and `c(k) != 0`.
    moving: IndexSet,
    /// Some term equals `e_base` up to scale.
    hits_base: bool,
}

fn undecidable(reason: impl Into<String>) -> SpanVerdict {
    SpanVerdict::Undecidable {
        reason: reason.into(),
    }
}

/// Positive-integer indices in `set` where `c` vanishes or has a pole.
fn special_points(c: &RatFn, set: &IndexSet) -> (Vec<u64>, Vec<u64>) {
    let bound = |p: &super::rational::Poly| {
        p.root_bound()
            .map(|b| b.ceil().to_integer().try_into().unwrap_or(u64::MAX))
            .unwrap_or(0u64)
    };
    let zero_bound = bound(c.num());
    let pole_bound = bound(c.den());
    let zeros = if c.num().is_zero() {
        Vec::new()
    } else {
        set.finite_members_up_to(zero_bound.min(1_000_000))
            .into_iter()
            .filter(|&n| c.num().eval(&q_int(n as i64)).is_zero())
            .collect()
    };
    let poles = set
        .finite_members_up_to(pole_bound.min(1_000_000))
        .into_iter()
        .filter(|&n| c.den().eval(&q_int(n as i64)).is_zero())
        .collect();
    (zeros, poles)
}

/// Decides `e_x0` in the closed span of all terms of all components.
pub fn span_closure_test(x0: u64, seq: &[SequenceComponent]) -> SpanVerdict {
    let mut known: Vec<IndexSet> = Vec::new();
    let mut perturbations: Vec<Perturbation> = Vec::new();
    let mut opaque = None;
    for comp in seq {
        match comp {
            SequenceComponent::Constant { index } => known.push(IndexSet::finite(vec![*index])),
            SequenceComponent::Basis { indices } => known.push(indices.clone()),
            SequenceComponent::Perturbed { base, coeff, moving } => {
                let c = match parse_expr(coeff) {
                    Ok(c) => c,
                    Err(e) => return undecidable(format!("coefficient '{coeff}': {e}")),
                };
                if c.num().is_zero() {
                    // every term is e_base
                    if moving.is_infinite() || !moving.finite.is_empty() {
                        known.push(IndexSet::finite(vec![*base]));
                    }
                    continue;
                }
                let (zeros, poles) = special_points(&c, moving);
                if let Some(k) = poles.first() {
                    return undecidable(format!("coefficient has a pole at k = {k}"));
                }
                let mut hits_base = !zeros.is_empty();
                if moving.contains(*base) {
                    let v = c.eval(&q_int(*base as i64)).expect("poles excluded");
                    // e_base + c e_base vanishes only when c = -1
                    if v != -q_int(1) {
                        hits_base = true;
                    }
                }
                let mut drop = zeros;
                drop.push(*base);
                perturbations.push(Perturbation {
                    base: *base,
                    moving: moving.without(&drop),
                    hits_base,
                    coeff: c,
                });
            }
            SequenceComponent::Opaque { description } => {
                opaque.get_or_insert_with(|| description.clone());
            }
        }
    }

    let in_known = |known: &[IndexSet], n: u64| known.iter().any(|s| s.contains(n));
    let meets_known = |known: &[IndexSet], set: &IndexSet| known.iter().any(|s| s.intersects(set));
    let mut active = vec![false; perturbations.len()];
    loop {
        let mut changed = false;
        for (i, pt) in perturbations.iter().enumerate() {
            if active[i] {
                continue;
            }
            let base_reached = pt.hits_base
                || in_known(&known, pt.base)
                || (pt.moving.is_infinite() && pt.coeff.relative_degree().is_some_and(|d| d <= 0))
                || meets_known(&known, &pt.moving);
            if base_reached {
                active[i] = true;
                known.push(IndexSet::finite(vec![pt.base]));
                known.push(pt.moving.clone());
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    if in_known(&known, x0) {
        return SpanVerdict::InSpan;
    }
    if let Some(d) = opaque {
        return undecidable(format!("component outside the fragment: {d}"));
    }
    let inactive: Vec<&Perturbation> = perturbations
        .iter()
        .zip(&active)
        .filter(|(_, a)| !**a)
        .map(|(p, _)| p)
        .collect();
    for (i, a) in inactive.iter().enumerate() {
        for b in &inactive[i + 1..] {
            if a.moving.intersects(&b.moving) || a.moving.contains(b.base) || b.moving.contains(a.base) {
                return undecidable("perturbed components share coordinates");
            }
        }
    }
    SpanVerdict::NotInSpan
}
