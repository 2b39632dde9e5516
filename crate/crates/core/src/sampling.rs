//! Seeded random draws. Every sampler derives its stream from an explicit
//! seed so results do not depend on call order elsewhere.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::space::{lp_norm, Exponent};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// An independent stream for sub-task `index` of a run seeded with `seed`.
pub fn substream(seed: u64, index: u64) -> SeededRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index.wrapping_add(1));
    r
}

pub fn gaussian_vec<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// A random point on the unit sphere of `l_p^n` (Gaussian direction, `l_p` normalized).
pub fn sphere_point<R: Rng + ?Sized>(rng: &mut R, n: usize, p: Exponent) -> Vec<f64> {
    loop {
        let g = gaussian_vec(rng, n);
        let nrm = lp_norm(&g, p);
        if nrm > 1e-12 {
            return g.into_iter().map(|v| v / nrm).collect();
        }
    }
}

/// Entries uniform in `[-1, 1]`, row-major.
pub fn uniform_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.random_range(-1.0..=1.0)).collect())
        .collect()
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..rows).map(|_| gaussian_vec(rng, cols)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_points_have_unit_norm() {
        let mut r = rng(7);
        for p in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
            let p = Exponent::new(p).unwrap();
            for _ in 0..20 {
                let x = sphere_point(&mut r, 3, p);
                assert!((lp_norm(&x, p) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn substreams_are_deterministic_and_distinct() {
        let a: Vec<f64> = gaussian_vec(&mut substream(3, 0), 4);
        let b: Vec<f64> = gaussian_vec(&mut substream(3, 0), 4);
        let c: Vec<f64> = gaussian_vec(&mut substream(3, 1), 4);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
