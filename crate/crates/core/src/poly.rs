//! Polynomials in z, w, z̄, w̄ restricted to the unit sphere, kept in the canonical form
//! where no monomial contains both z and z̄.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;

use crate::scalar::{GaussianRational, Scalar};

/// Exponents (a, b, c, d) of z^a w^b z̄^c w̄^d.
pub type Exps = [u32; 4];

#[inline]
fn pack(e: Exps) -> u32 {
    debug_assert!(e.iter().all(|&x| x < 256), "exponent overflow {e:?}");
    (e[0] << 24) | (e[1] << 16) | (e[2] << 8) | e[3]
}

#[inline]
fn unpack(k: u32) -> Exps {
    [k >> 24, (k >> 16) & 0xff, (k >> 8) & 0xff, k & 0xff]
}

fn binomial(n: u32, k: u32) -> i64 {
    let mut r: i64 = 1;
    for j in 0..k as i64 {
        r = r * (n as i64 - j) / (j + 1);
    }
    r
}

/// Canonical-form polynomial function on S³.
#[derive(Clone, PartialEq, Debug)]
pub struct Poly<S: Scalar> {
    terms: BTreeMap<u32, S>,
}

/// Exact polynomial function.
pub type PolyFn = Poly<GaussianRational>;

/// Accumulator for raw monomial sums; flushed into canonical form.
struct Acc<S: Scalar> {
    map: HashMap<u32, S>,
}

impl<S: Scalar> Acc<S> {
    fn new() -> Self {
        Acc {
            map: HashMap::new(),
        }
    }

    fn push_canonical(&mut self, e: Exps, c: S) {
        match self.map.entry(pack(e)) {
            std::collections::hash_map::Entry::Occupied(mut o) => *o.get_mut() += c,
            std::collections::hash_map::Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    /// zz̄ ↦ 1 − ww̄ applied min(a,c) times in closed form.
    fn push(&mut self, e: Exps, c: S) {
        let m = e[0].min(e[2]);
        if m == 0 {
            self.push_canonical(e, c);
            return;
        }
        for j in 0..=m {
            let mut b = binomial(m, j);
            if j % 2 == 1 {
                b = -b;
            }
            let ej = [e[0] - m, e[1] + j, e[2] - m, e[3] + j];
            self.push_canonical(ej, c.clone() * S::from_int(b));
        }
    }

    fn finish(self) -> Poly<S> {
        Poly {
            terms: self.map.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }
}

impl<S: Scalar> Default for Poly<S> {
    fn default() -> Self {
        Poly::zero()
    }
}

impl<S: Scalar> Poly<S> {
    pub fn zero() -> Self {
        Poly {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: S) -> Self {
        Poly::monomial([0, 0, 0, 0], c)
    }

    pub fn one() -> Self {
        Poly::constant(S::one())
    }

    /// c·z^a w^b z̄^c w̄^d, reduced.
    pub fn monomial(e: Exps, c: S) -> Self {
        let mut acc = Acc::new();
        acc.push(e, c);
        acc.finish()
    }

    pub fn z() -> Self {
        Poly::monomial([1, 0, 0, 0], S::one())
    }
    pub fn w() -> Self {
        Poly::monomial([0, 1, 0, 0], S::one())
    }
    pub fn zbar() -> Self {
        Poly::monomial([0, 0, 1, 0], S::one())
    }
    pub fn wbar() -> Self {
        Poly::monomial([0, 0, 0, 1], S::one())
    }

    /// Reduces an arbitrary monomial sum to canonical form.
    pub fn reduce_to_canonical<I: IntoIterator<Item = (Exps, S)>>(raw: I) -> Self {
        let mut acc = Acc::new();
        for (e, c) in raw {
            acc.push(e, c);
        }
        acc.finish()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Exps, &S)> + '_ {
        self.terms.iter().map(|(&k, c)| (unpack(k), c))
    }

    pub fn coeff(&self, e: Exps) -> S {
        self.terms.get(&pack(e)).cloned().unwrap_or_else(S::zero)
    }

    /// Largest a+b+c+d over stored monomials.
    pub fn degree(&self) -> usize {
        self.terms()
            .map(|(e, _)| e.iter().sum::<u32>() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut t = self.terms.clone();
        for (k, c) in &o.terms {
            let v = t.entry(*k).or_insert_with(S::zero);
            *v += c.clone();
            if v.is_zero() {
                t.remove(k);
            }
        }
        Poly { terms: t }
    }

    pub fn neg(&self) -> Self {
        Poly {
            terms: self.terms.iter().map(|(k, c)| (*k, -c.clone())).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, s: &S) -> Self {
        if s.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (*k, c.clone() * s.clone()))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut acc = Acc::new();
        for (e1, c1) in self.terms() {
            for (e2, c2) in o.terms() {
                let e = [e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2], e1[3] + e2[3]];
                acc.push(e, c1.clone() * c2.clone());
            }
        }
        acc.finish()
    }

    /// Complex conjugate: (a,b,c,d) ↦ (c,d,a,b).
    pub fn conj(&self) -> Self {
        Poly {
            terms: self
                .terms()
                .map(|(e, c)| (pack([e[2], e[3], e[0], e[1]]), c.conj()))
                .collect(),
        }
    }

    /// Z₁ = w̄∂_z − z̄∂_w.
    pub fn z1(&self) -> Self {
        let mut acc = Acc::new();
        for ([a, b, c, d], k) in self.terms() {
            if a > 0 {
                acc.push([a - 1, b, c, d + 1], k.clone() * S::from_int(a as i64));
            }
            if b > 0 {
                acc.push([a, b - 1, c + 1, d], -(k.clone() * S::from_int(b as i64)));
            }
        }
        acc.finish()
    }

    /// Z₁̄ = w∂_z̄ − z∂_w̄.
    pub fn z1bar(&self) -> Self {
        let mut acc = Acc::new();
        for ([a, b, c, d], k) in self.terms() {
            if c > 0 {
                acc.push([a, b + 1, c - 1, d], k.clone() * S::from_int(c as i64));
            }
            if d > 0 {
                acc.push([a + 1, b, c, d - 1], -(k.clone() * S::from_int(d as i64)));
            }
        }
        acc.finish()
    }

    /// T = i(z∂_z + w∂_w) − i(z̄∂_z̄ + w̄∂_w̄).
    pub fn reeb(&self) -> Self {
        Poly {
            terms: self
                .terms()
                .filter(|(e, _)| e[0] + e[1] != e[2] + e[3])
                .map(|(e, k)| {
                    let n = e[0] as i64 + e[1] as i64 - e[2] as i64 - e[3] as i64;
                    (pack(e), k.clone() * S::imag_unit() * S::from_int(n))
                })
                .collect(),
        }
    }

    /// ∫ u θ∧dθ as a multiple of π².
    pub fn integrate(&self) -> S {
        let mut s = S::zero();
        for ([a, b, c, d], k) in self.terms() {
            if a == c && b == d {
                s += k.clone() * S::from_gq(&GaussianRational::real(monomial_integral(a, b)));
            }
        }
        s
    }

    /// ⟨u, v⟩ = ∫ u v̄ θ∧dθ, as a multiple of π².
    pub fn inner(&self, o: &Self) -> S {
        self.mul(&o.conj()).integrate()
    }

    /// Torus weight (a−c, b−d) of every monomial, grouped.
    pub fn split_by_weight(&self) -> BTreeMap<(i32, i32), Poly<S>> {
        let mut out: BTreeMap<(i32, i32), Poly<S>> = BTreeMap::new();
        for (k, c) in &self.terms {
            let e = unpack(*k);
            let wt = (e[0] as i32 - e[2] as i32, e[1] as i32 - e[3] as i32);
            out.entry(wt).or_default().terms.insert(*k, c.clone());
        }
        out
    }

    pub fn eval(&self, z: Complex64, w: Complex64) -> Complex64 {
        let (zb, wb) = (z.conj(), w.conj());
        let mut s = Complex64::new(0.0, 0.0);
        for ([a, b, c, d], k) in self.terms() {
            s += k.to_c64() * z.powu(a) * w.powu(b) * zb.powu(c) * wb.powu(d);
        }
        s
    }

    pub fn map<T: Scalar, F: Fn(&S) -> T>(&self, f: F) -> Poly<T> {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (*k, f(c)))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        }
    }

    pub fn to_c64(&self) -> Poly<Complex64> {
        self.map(|c| c.to_c64())
    }

    /// Sum of |coefficient| (float); a crude size measure.
    pub fn coeff_l1(&self) -> f64 {
        self.terms.values().map(|c| c.to_c64().norm()).sum()
    }
}

/// ∫ z^a w^b z̄^a w̄^b θ∧dθ / π² = 4·a!·b!/(a+b+1)!.
pub fn monomial_integral(a: u32, b: u32) -> BigRational {
    let fact = |n: u32| -> BigInt {
        (1..=n as u64).fold(BigInt::from(1u32), |acc, k| acc * BigInt::from(k))
    };
    BigRational::new(BigInt::from(4) * fact(a) * fact(b), fact(a + b + 1))
}

impl fmt::Display for Poly<GaussianRational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for ([a, b, c, d], k) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({k})")?;
            for (n, v) in [(a, "z"), (b, "w"), (c, "zb"), (d, "wb")] {
                match n {
                    0 => {}
                    1 => write!(f, "*{v}")?,
                    _ => write!(f, "*{v}^{n}")?,
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    type P = PolyFn;

    fn gq(n: i64) -> GaussianRational {
        GaussianRational::from_int(n)
    }

    #[test]
    fn sphere_relation() {
        let zz = P::z().mul(&P::zbar());
        assert_eq!(zz, P::one().sub(&P::w().mul(&P::wbar())));
        let s = zz.add(&P::w().mul(&P::wbar()));
        assert_eq!(s, P::one());
    }

    #[test]
    fn reduce_example() {
        // z²z̄w = zw − zw²w̄
        let lhs = P::monomial([2, 1, 1, 0], gq(1));
        let rhs = P::monomial([1, 1, 0, 0], gq(1)).sub(&P::monomial([1, 2, 0, 1], gq(1)));
        assert_eq!(lhs, rhs);
        let (z, w) = (Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8));
        let raw = z * z * z.conj() * w;
        assert!((lhs.eval(z, w) - raw).norm() < 1e-12);
    }

    #[test]
    fn frame_operators() {
        assert_eq!(P::z().z1(), P::wbar());
        assert_eq!(P::w().z1(), P::zbar().neg());
        assert!(P::one().z1().is_zero());
        assert_eq!(P::z().reeb(), P::z().scale(&GaussianRational::i()));
        assert_eq!(P::z().z1bar(), P::zero());
        assert_eq!(P::zbar().z1bar(), P::w());
        // Z₁̄Z₁ z = −z.
        assert_eq!(P::z().z1().z1bar(), P::z().neg());
    }

    #[test]
    fn integrals() {
        assert_eq!(P::one().integrate(), gq(4));
        assert_eq!(P::z().integrate(), gq(0));
        let zz = P::z().mul(&P::zbar());
        assert_eq!(zz.integrate(), gq(2));
        assert_eq!(P::z().inner(&P::z()), gq(2));
        assert_eq!(P::z().inner(&P::w()), gq(0));
        assert_eq!(monomial_integral(1, 1), ratio(2, 3));
        // Non-canonical monomial formula agrees with reduce-then-integrate.
        for a in 0..4 {
            for b in 0..4 {
                let m = P::monomial([a, b, a, b], gq(1));
                assert_eq!(
                    m.integrate(),
                    GaussianRational::real(monomial_integral(a, b))
                );
            }
        }
    }

    #[test]
    fn conj_involution() {
        let p = P::monomial([2, 1, 0, 3], GaussianRational::from_ints(1, 2)).add(&P::zbar());
        assert_eq!(p.conj().conj(), p);
        assert_eq!(p.z1().conj(), p.conj().z1bar());
    }
}
