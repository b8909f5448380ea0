//! Truncated power series in a formal parameter t with polynomial coefficients.

use crate::algebra::FnAlgebra;
use crate::error::{CrError, Result};
use crate::harmonic::{to_harmonic, HarmonicField};
use crate::poly::Poly;
use crate::scalar::{GaussianRational, Scalar};

/// Σ_{k ≤ K} c_k t^k.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet<S: Scalar> {
    pub coeffs: Vec<Poly<S>>,
}

impl<S: Scalar> Jet<S> {
    pub fn zero(order: usize) -> Self {
        Jet {
            coeffs: vec![Poly::zero(); order + 1],
        }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &Poly<S> {
        &self.coeffs[k]
    }

    /// t·u + t²·v + … from the given coefficients (index 0 is the constant term).
    pub fn from_coeffs(order: usize, cs: Vec<Poly<S>>) -> Self {
        let mut j = Jet::zero(order);
        for (k, c) in cs.into_iter().enumerate().take(order + 1) {
            j.coeffs[k] = c;
        }
        j
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    fn map(&self, f: impl Fn(&Poly<S>) -> Poly<S>) -> Self {
        Jet {
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    /// Evaluates the series at a numeric t.
    pub fn at(&self, t: f64) -> Poly<num_complex::Complex64> {
        let mut out = Poly::zero();
        let mut tk = 1.0;
        for c in &self.coeffs {
            out = out.add(&c.to_c64().scale(&num_complex::Complex64::new(tk, 0.0)));
            tk *= t;
        }
        out
    }
}

impl Jet<GaussianRational> {
    /// Harmonic decomposition of every coefficient.
    pub fn to_harmonic(&self) -> Vec<HarmonicField<GaussianRational>> {
        self.coeffs.iter().map(to_harmonic).collect()
    }
}

/// Jet arithmetic truncated at a fixed order.
#[derive(Clone, Debug)]
pub struct JetAlgebra<S: Scalar> {
    pub order: usize,
    _s: std::marker::PhantomData<S>,
}

impl<S: Scalar> JetAlgebra<S> {
    pub fn new(order: usize) -> Self {
        JetAlgebra {
            order,
            _s: std::marker::PhantomData,
        }
    }
}

impl<S: Scalar> FnAlgebra for JetAlgebra<S> {
    type F = Jet<S>;

    fn constant(&self, c: &GaussianRational) -> Jet<S> {
        let mut j = Jet::zero(self.order);
        j.coeffs[0] = Poly::constant(S::from_gq(c));
        j
    }

    fn add(&self, a: &Jet<S>, b: &Jet<S>) -> Jet<S> {
        Jet {
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(x, y)| x.add(y))
                .collect(),
        }
    }

    fn sub(&self, a: &Jet<S>, b: &Jet<S>) -> Jet<S> {
        Jet {
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(x, y)| x.sub(y))
                .collect(),
        }
    }

    fn mul(&self, a: &Jet<S>, b: &Jet<S>) -> Jet<S> {
        let k = self.order;
        let mut out = Jet::zero(k);
        for i in 0..=k {
            if a.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..=(k - i) {
                if b.coeffs[j].is_zero() {
                    continue;
                }
                out.coeffs[i + j] = out.coeffs[i + j].add(&a.coeffs[i].mul(&b.coeffs[j]));
            }
        }
        out
    }

    fn scale(&self, a: &Jet<S>, c: &GaussianRational) -> Jet<S> {
        let s = S::from_gq(c);
        a.map(|p| p.scale(&s))
    }

    fn conj(&self, a: &Jet<S>) -> Jet<S> {
        a.map(|p| p.conj())
    }

    fn z1(&self, a: &Jet<S>) -> Jet<S> {
        a.map(|p| p.z1())
    }

    fn z1bar(&self, a: &Jet<S>) -> Jet<S> {
        a.map(|p| p.z1bar())
    }

    fn reeb(&self, a: &Jet<S>) -> Jet<S> {
        a.map(|p| p.reeb())
    }

    /// y₀ = 1/c₀, y_n = −y₀ Σ_{k≥1} c_k y_{n−k}; needs c₀ a nonzero constant.
    fn recip(&self, a: &Jet<S>) -> Result<Jet<S>> {
        let c0 = &a.coeffs[0];
        if c0.degree() != 0 || c0.is_zero() {
            return Err(CrError::JetNotInvertible);
        }
        let y0 = S::one() / c0.coeff([0, 0, 0, 0]);
        let mut y = Jet::zero(self.order);
        y.coeffs[0] = Poly::constant(y0.clone());
        for n in 1..=self.order {
            let mut s = Poly::zero();
            for k in 1..=n {
                if !a.coeffs[k].is_zero() && !y.coeffs[n - k].is_zero() {
                    s = s.add(&a.coeffs[k].mul(&y.coeffs[n - k]));
                }
            }
            y.coeffs[n] = s.scale(&(-y0.clone()));
        }
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::PolyFn;

    #[test]
    fn geometric_series() {
        let alg = JetAlgebra::<GaussianRational>::new(4);
        let zb = PolyFn::z().mul(&PolyFn::wbar());
        // h = 1 − t²|zw̄|²
        let phi = Jet::from_coeffs(4, vec![PolyFn::zero(), zb]);
        let h = alg.sub(
            &alg.constant(&GaussianRational::from_int(1)),
            &alg.mul(&phi, &alg.conj(&phi)),
        );
        let hi = alg.recip(&h).unwrap();
        let prod = alg.mul(&h, &hi);
        assert_eq!(prod, alg.constant(&GaussianRational::from_int(1)));
        assert!(hi.coeff(1).is_zero() && hi.coeff(3).is_zero());
    }

    #[test]
    fn non_invertible() {
        let alg = JetAlgebra::<GaussianRational>::new(2);
        let phi = Jet::from_coeffs(2, vec![PolyFn::z()]);
        assert!(alg.recip(&phi).is_err());
    }
}
