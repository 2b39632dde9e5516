//! One-dimensional convex minimization.

/// Result of a bracketed scalar minimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMin {
    pub argmin: f64,
    pub value: f64,
    pub evaluations: usize,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the minimum of a unimodal `f` on `[lo, hi]`.
///
/// Besides the interior probes, both endpoints and every point in `extra`
/// that lies inside the bracket are evaluated, and the smallest value seen is
/// returned. For convex `f` this is never worse than the plain search.
pub fn golden_section<F>(mut f: F, lo: f64, hi: f64, extra: &[f64], max_evals: usize) -> ScalarMin
where
    F: FnMut(f64) -> f64,
{
    let mut best = ScalarMin {
        argmin: lo,
        value: f(lo),
        evaluations: 1,
    };
    let consider = |x: f64, v: f64, best: &mut ScalarMin| {
        best.evaluations += 1;
        if v < best.value {
            best.value = v;
            best.argmin = x;
        }
    };
    if hi > lo {
        let v = f(hi);
        consider(hi, v, &mut best);
    }
    for &x in extra {
        if x >= lo && x <= hi {
            let v = f(x);
            consider(x, v, &mut best);
        }
    }

    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    consider(x1, f1, &mut best);
    consider(x2, f2, &mut best);
    let scale = lo.abs().max(hi.abs()).max(1e-300);
    while best.evaluations < max_evals && (b - a) > 1e-15 * scale {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
            consider(x1, f1, &mut best);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
            consider(x2, f2, &mut best);
        }
    }
    best
}
