//! Seeded random deformations with coefficients on a fixed rational lattice.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::harmonic::HarmonicField;
use crate::poly::PolyFn;
use crate::scalar::{ratio, GaussianRational};

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Lattice point (a + ib)/den with a, b ∈ [−k, k].
pub fn lattice(rng: &mut Rng64, k: i64, den: i64) -> GaussianRational {
    let a = rng.random_range(-k..=k);
    let b = rng.random_range(-k..=k);
    GaussianRational::new(ratio(a, den), ratio(b, den))
}

/// All (p, q, m) with p+q ≤ n accepted by `keep`.
pub fn indices<F: Fn(u32, u32) -> bool>(n: u32, keep: F) -> Vec<(u32, u32, i32)> {
    let mut v = Vec::new();
    for d in 0..=n {
        for p in 0..=d {
            let q = d - p;
            if keep(p, q) {
                for m in -(q as i32)..=p as i32 {
                    v.push((p, q, m));
                }
            }
        }
    }
    v
}

/// A field with `terms` nonzero lattice coefficients on indices drawn from `keep`.
pub fn sparse_field<F: Fn(u32, u32) -> bool>(
    rng: &mut Rng64,
    n: u32,
    terms: usize,
    den: i64,
    keep: F,
) -> HarmonicField<GaussianRational> {
    let idx = indices(n, keep);
    let mut f = HarmonicField::zero(n);
    if idx.is_empty() {
        return f;
    }
    while f.len() < terms.min(idx.len()) {
        let (p, q, m) = idx[rng.random_range(0..idx.len())];
        let mut c = lattice(rng, 3, den);
        if c == GaussianRational::from_ints(0, 0) {
            c = GaussianRational::frac(1, den);
        }
        f.set(p, q, m, c);
    }
    f
}

/// Sparse polynomial of degree ≤ n (monomials z^a w^b z̄^c w̄^d, canonicalized).
pub fn sparse_poly(rng: &mut Rng64, n: u32, terms: usize, den: i64) -> PolyFn {
    let mut u = PolyFn::zero();
    for _ in 0..terms {
        let d = rng.random_range(0..=n);
        let mut e = [0u32; 4];
        for _ in 0..d {
            e[rng.random_range(0..4)] += 1;
        }
        u = u.add(&PolyFn::monomial(e, lattice(rng, 3, den)));
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let a = sparse_field(&mut rng(7), 4, 5, 4, |_, _| true);
        let b = sparse_field(&mut rng(7), 4, 5, 4, |_, _| true);
        assert_eq!(a, b);
        assert_eq!(a.len(), 5);
        let c = sparse_field(&mut rng(8), 4, 5, 4, |_, q| q <= 1);
        assert!(c.iter().all(|((_, q, _), _)| q <= 1));
    }
}
