//! Bigraded spherical harmonics H_{p,q}: explicit basis, exact projection, ladder constants.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::poly::{Poly, PolyFn};
use crate::scalar::{GaussianRational, Scalar};

/// (p, q, m) index of a basis vector.
pub type Idx = (u32, u32, i32);

/// Eigenvalue 2pq + p + q of the (positive) sublaplacian on H_{p,q}.
pub fn sublaplacian_eigenvalue(p: u32, q: u32) -> i64 {
    let (p, q) = (p as i64, q as i64);
    2 * p * q + p + q
}

/// Torus weight (a−c, b−d) shared by every monomial of e_{p,q,m}.
pub fn basis_weight(p: u32, q: u32, m: i32) -> (i32, i32) {
    (m, p as i32 - m - q as i32)
}

/// Exponents of the representative monomial of e_{p,q,m}.
pub fn representative(p: u32, q: u32, m: i32) -> [u32; 4] {
    assert!(
        m >= -(q as i32) && m <= p as i32,
        "m={m} out of range for ({p},{q})"
    );
    if m >= 0 {
        [m as u32, p - m as u32, 0, q]
    } else {
        [0, p, (-m) as u32, (q as i32 + m) as u32]
    }
}

/// Positive sublaplacian on a polynomial: −(Z₁Z₁̄ + Z₁̄Z₁).
pub fn sublaplacian_poly<S: Scalar>(u: &Poly<S>) -> Poly<S> {
    u.z1bar().z1().add(&u.z1().z1bar()).neg()
}

/// Candidate p-values for the weight class (j, k) up to total degree `deg`.
fn class_candidates(j: i32, k: i32, deg: usize) -> Vec<u32> {
    let pmin = 0.max(j).max(k).max(j + k);
    let mut v = Vec::new();
    let mut p = pmin;
    while 2 * p - j - k <= deg as i32 {
        v.push(p as u32);
        p += 1;
    }
    v
}

/// Lagrange basis polynomial coefficients (ascending powers) for node `i` among `nodes`.
fn lagrange_coeffs(nodes: &[i64], i: usize) -> Vec<BigRational> {
    let mut c = vec![BigRational::one()];
    let xi = nodes[i];
    for (k, &xk) in nodes.iter().enumerate() {
        if k == i {
            continue;
        }
        let den = BigRational::from_integer((xi - xk).into());
        let mut next = vec![BigRational::zero(); c.len() + 1];
        for (d, a) in c.iter().enumerate() {
            next[d + 1] += a / &den;
            next[d] -= a * BigRational::from_integer(xk.into()) / &den;
        }
        c = next;
    }
    c
}

/// Splits a polynomial living in a single weight class (j, k) into its H_{p,q} components.
fn split_class<S: Scalar>(u: &Poly<S>, j: i32, k: i32) -> Vec<(u32, Poly<S>)> {
    let cands = class_candidates(j, k, u.degree());
    if cands.len() == 1 {
        return vec![(cands[0], u.clone())];
    }
    let lambdas: Vec<i64> = cands
        .iter()
        .map(|&p| sublaplacian_eigenvalue(p, (p as i32 - j - k) as u32))
        .collect();
    let mut krylov = vec![u.clone()];
    for _ in 1..cands.len() {
        let next = sublaplacian_poly(krylov.last().unwrap());
        krylov.push(next);
    }
    let mut out = Vec::new();
    for (i, &p) in cands.iter().enumerate() {
        let coeffs = lagrange_coeffs(&lambdas, i);
        let mut piece = Poly::zero();
        for (c, v) in coeffs.iter().zip(&krylov) {
            if !c.is_zero() {
                piece = piece.add(&v.scale(&S::from_gq(&GaussianRational::real(c.clone()))));
            }
        }
        if !piece.is_zero() {
            out.push((p, piece));
        }
    }
    out
}

struct Tables {
    basis: HashMap<Idx, Arc<PolyFn>>,
    norms: HashMap<Idx, BigRational>,
    ladder: HashMap<Idx, (GaussianRational, GaussianRational)>,
}

fn tables() -> &'static Mutex<Tables> {
    static T: OnceLock<Mutex<Tables>> = OnceLock::new();
    T.get_or_init(|| {
        Mutex::new(Tables {
            basis: HashMap::new(),
            norms: HashMap::new(),
            ladder: HashMap::new(),
        })
    })
}

/// Basis vector e_{p,q,m}: the H_{p,q} projection of its representative monomial.
pub fn basis_vector(p: u32, q: u32, m: i32) -> Arc<PolyFn> {
    if let Some(e) = tables().lock().unwrap().basis.get(&(p, q, m)) {
        return e.clone();
    }
    let e = Arc::new(basis_closed_form(p, q, m));
    tables().lock().unwrap().basis.insert((p, q, m), e.clone());
    e
}

/// e_{p,q,m} = z^j w^k π_n(|w|²) (conjugated factors for negative j, k), π_n the monic
/// orthogonal polynomial for the weight (1−s)^{|j|} s^{|k|} on [0, 1], i.e. a rescaled
/// Jacobi polynomial P_n^{(|k|,|j|)}(1 − 2s).
fn basis_closed_form(p: u32, q: u32, m: i32) -> PolyFn {
    let (j, k) = basis_weight(p, q, m);
    let (aj, ak) = (j.unsigned_abs(), k.unsigned_abs());
    let n = (p + q - aj - ak) / 2;
    let mut mono = [0u32; 4];
    if j >= 0 {
        mono[0] = aj
    } else {
        mono[2] = aj
    }
    if k >= 0 {
        mono[1] = ak
    } else {
        mono[3] = ak
    }
    let (alpha, beta) = (ak as i64, aj as i64);
    let n_ = n as i64;
    // c_i = (−n)_i (n+α+β+1)_i / ((α+1)_i i!)
    let mut c = vec![BigRational::one()];
    for i in 0..n_ {
        let f = crate::scalar::ratio(
            (i - n_) * (n_ + alpha + beta + 1 + i),
            (alpha + 1 + i) * (i + 1),
        );
        let next = c.last().unwrap() * f;
        c.push(next);
    }
    let lead = c[n as usize].clone();
    let mut e = PolyFn::zero();
    for (i, ci) in c.into_iter().enumerate() {
        let i = i as u32;
        let ex = [mono[0], mono[1] + i, mono[2], mono[3] + i];
        e = e.add(&PolyFn::monomial(ex, GaussianRational::real(ci / &lead)));
    }
    e
}

/// Basis vector by the exact eigensplit of the representative monomial (reference route).
pub fn basis_vector_by_projection(p: u32, q: u32, m: i32) -> PolyFn {
    let r = PolyFn::monomial(representative(p, q, m), GaussianRational::one());
    let (j, k) = basis_weight(p, q, m);
    split_class(&r, j, k)
        .into_iter()
        .find(|(pp, _)| *pp == p)
        .map(|(_, e)| e)
        .expect("representative has a nonzero top component")
}

/// All basis vectors of H_{p,q}, ordered by m from −q to p.
pub fn harmonic_basis(p: u32, q: u32) -> Vec<Arc<PolyFn>> {
    (-(q as i32)..=p as i32)
        .map(|m| basis_vector(p, q, m))
        .collect()
}

/// ⟨e, e⟩/π² for e = e_{p,q,m}, from ∫|z|^{2a}|w|^{2b} = 4a!b!/(a+b+1)!.
pub fn basis_norm_sqr(p: u32, q: u32, m: i32) -> BigRational {
    if let Some(n) = tables().lock().unwrap().norms.get(&(p, q, m)) {
        return n.clone();
    }
    let e = basis_vector(p, q, m);
    let (j, k) = basis_weight(p, q, m);
    let (aj, ak) = (j.unsigned_abs(), k.unsigned_abs());
    // e = mono · Σ c_i s^i; |e|² = |z|^{2|j|} |w|^{2|k|} Σ c_i c_l s^{i+l}
    let cs: Vec<(u32, BigRational)> = e
        .terms()
        .map(|(x, c)| (x[3] - if k < 0 { ak } else { 0 }, c.re.clone()))
        .collect();
    let mut n = BigRational::zero();
    for (i, ci) in &cs {
        for (l, cl) in &cs {
            n += ci * cl * crate::poly::monomial_integral(aj, ak + i + l);
        }
    }
    tables().lock().unwrap().norms.insert((p, q, m), n.clone());
    n
}

/// The coefficient c with u = c·e when u is known to be a multiple of e.
fn multiple_of<S: Scalar>(u: &Poly<S>, e: &PolyFn) -> S {
    let (exps, ce) = e.terms().next().expect("nonzero basis vector");
    u.coeff(exps) / S::from_gq(ce)
}

/// (α, β) with Z₁e_{p,q,m} = α·e_{p−1,q+1,m−1} and Z₁̄e_{p,q,m} = β·e_{p+1,q−1,m+1}.
pub fn ladder(p: u32, q: u32, m: i32) -> (GaussianRational, GaussianRational) {
    if let Some(l) = tables().lock().unwrap().ladder.get(&(p, q, m)) {
        return l.clone();
    }
    let e = basis_vector(p, q, m);
    let alpha = if p == 0 || m - 1 < -(q as i32 + 1) {
        GaussianRational::zero()
    } else {
        multiple_of(&e.z1(), &basis_vector(p - 1, q + 1, m - 1))
    };
    let beta = if q == 0 || m + 1 > p as i32 + 1 {
        GaussianRational::zero()
    } else {
        multiple_of(&e.z1bar(), &basis_vector(p + 1, q - 1, m + 1))
    };
    tables()
        .lock()
        .unwrap()
        .ladder
        .insert((p, q, m), (alpha.clone(), beta.clone()));
    (alpha, beta)
}

/// Projection of u onto H_{p,q}.
pub fn project_pq<S: Scalar>(u: &Poly<S>, p: u32, q: u32) -> Poly<S> {
    let mut out = Poly::zero();
    for ((j, k), part) in u.split_by_weight() {
        if p as i32 - q as i32 != j + k {
            continue;
        }
        for (pp, piece) in split_class(&part, j, k) {
            if pp == p {
                out = out.add(&piece);
            }
        }
    }
    out
}

/// Coefficient map over the basis e_{p,q,m}, truncated at total degree N.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicField<S: Scalar> {
    pub truncation: u32,
    coeffs: BTreeMap<Idx, S>,
}

pub fn valid_index(p: u32, q: u32, m: i32) -> bool {
    m >= -(q as i32) && m <= p as i32
}

impl<S: Scalar> HarmonicField<S> {
    pub fn zero(truncation: u32) -> Self {
        HarmonicField {
            truncation,
            coeffs: BTreeMap::new(),
        }
    }

    /// Single basis vector c·e_{p,q,m}.
    pub fn basis(truncation: u32, p: u32, q: u32, m: i32, c: S) -> Self {
        let mut f = HarmonicField::zero(truncation);
        f.set(p, q, m, c);
        f
    }

    pub fn get(&self, p: u32, q: u32, m: i32) -> S {
        self.coeffs.get(&(p, q, m)).cloned().unwrap_or_else(S::zero)
    }

    /// Stores a coefficient, dropping zeros. Indices beyond the truncation are discarded.
    pub fn set(&mut self, p: u32, q: u32, m: i32, c: S) {
        assert!(valid_index(p, q, m), "invalid basis index ({p},{q},{m})");
        if p + q > self.truncation || c.is_zero() {
            self.coeffs.remove(&(p, q, m));
        } else {
            self.coeffs.insert((p, q, m), c);
        }
    }

    pub fn add_to(&mut self, p: u32, q: u32, m: i32, c: S) {
        let v = self.get(p, q, m) + c;
        self.set(p, q, m, v);
    }

    pub fn iter(&self) -> impl Iterator<Item = (Idx, &S)> + '_ {
        self.coeffs.iter().map(|(k, v)| (*k, v))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Nonzero (p, q) blocks.
    pub fn blocks(&self) -> Vec<(u32, u32)> {
        let mut v: Vec<(u32, u32)> = self.coeffs.keys().map(|&(p, q, _)| (p, q)).collect();
        v.dedup();
        v
    }

    pub fn block(&self, p: u32, q: u32) -> Self {
        self.filter(|pp, qq| pp == p && qq == q)
    }

    pub fn filter<F: Fn(u32, u32) -> bool>(&self, keep: F) -> Self {
        HarmonicField {
            truncation: self.truncation,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(k, _)| keep(k.0, k.1))
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        }
    }

    pub fn with_truncation(&self, n: u32) -> Self {
        let mut f = self.filter(|p, q| p + q <= n);
        f.truncation = n;
        f
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut f = self.clone();
        f.truncation = self.truncation.max(o.truncation);
        for (&(p, q, m), c) in &o.coeffs {
            f.add_to(p, q, m, c.clone());
        }
        f
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-S::one()))
    }

    pub fn scale(&self, s: &S) -> Self {
        self.map_blocks(|_, _| s.clone())
    }

    /// Multiplies block (p,q) by f(p,q).
    pub fn map_blocks<F: Fn(u32, u32) -> S>(&self, f: F) -> Self {
        let mut out = HarmonicField::zero(self.truncation);
        for (&(p, q, m), c) in &self.coeffs {
            out.set(p, q, m, c.clone() * f(p, q));
        }
        out
    }

    /// conj(u)_{q,p,−m} = conj(u_{p,q,m}).
    pub fn conj(&self) -> Self {
        let mut out = HarmonicField::zero(self.truncation);
        for (&(p, q, m), c) in &self.coeffs {
            out.set(q, p, -m, c.conj());
        }
        out
    }

    pub fn z1(&self) -> Self {
        let mut out = HarmonicField::zero(self.truncation);
        for (&(p, q, m), c) in &self.coeffs {
            if p > 0 {
                let (a, _) = ladder(p, q, m);
                out.add_to(p - 1, q + 1, m - 1, c.clone() * S::from_gq(&a));
            }
        }
        out
    }

    pub fn z1bar(&self) -> Self {
        let mut out = HarmonicField::zero(self.truncation);
        for (&(p, q, m), c) in &self.coeffs {
            if q > 0 {
                let (_, b) = ladder(p, q, m);
                out.add_to(p + 1, q - 1, m + 1, c.clone() * S::from_gq(&b));
            }
        }
        out
    }

    pub fn reeb(&self) -> Self {
        self.map_blocks(|p, q| S::imag_unit() * S::from_int(p as i64 - q as i64))
    }

    /// Multiplies block (p,q) by the positive eigenvalue 2pq+p+q.
    pub fn sublaplacian(&self) -> Self {
        self.map_blocks(|p, q| S::from_int(sublaplacian_eigenvalue(p, q)))
    }

    /// ‖u_{p,q}‖²/π² per block.
    pub fn block_norms_sqr(&self) -> BTreeMap<(u32, u32), f64> {
        let mut out = BTreeMap::new();
        for (&(p, q, m), c) in &self.coeffs {
            let n = crate::scalar::rational_to_f64(&basis_norm_sqr(p, q, m));
            *out.entry((p, q)).or_insert(0.0) += c.to_c64().norm_sqr() * n;
        }
        out
    }

    /// L² norm (π included).
    pub fn l2_norm(&self) -> f64 {
        fs_norm(self, 0.0)
    }

    pub fn to_c64(&self) -> HarmonicField<num_complex::Complex64> {
        let mut out = HarmonicField::zero(self.truncation);
        for (&(p, q, m), c) in &self.coeffs {
            out.set(p, q, m, c.to_c64());
        }
        out
    }

    /// Largest p+q with a nonzero coefficient.
    pub fn max_degree(&self) -> u32 {
        self.coeffs
            .keys()
            .map(|&(p, q, _)| p + q)
            .max()
            .unwrap_or(0)
    }

    /// Polynomial Σ c·e_{p,q,m}.
    pub fn to_poly(&self) -> Poly<S> {
        let mut out = Poly::zero();
        for (&(p, q, m), c) in &self.coeffs {
            let e = basis_vector(p, q, m).map(|k| S::from_gq(k));
            out = out.add(&e.scale(c));
        }
        out
    }
}

impl HarmonicField<GaussianRational> {
    /// ⟨u,u⟩/π², exact.
    pub fn norm_sqr_exact(&self) -> BigRational {
        self.coeffs
            .iter()
            .map(|(&(p, q, m), c)| c.norm_sqr() * basis_norm_sqr(p, q, m))
            .fold(BigRational::zero(), |a, b| a + b)
    }

    /// ‖u_{p,q}‖²/π² per block, exact.
    pub fn block_norms_exact(&self) -> BTreeMap<(u32, u32), BigRational> {
        let mut out = BTreeMap::new();
        for (&(p, q, m), c) in &self.coeffs {
            *out.entry((p, q)).or_insert_with(BigRational::zero) +=
                c.norm_sqr() * basis_norm_sqr(p, q, m);
        }
        out
    }

    /// ⟨u,v⟩/π², exact.
    pub fn inner_exact(&self, o: &Self) -> GaussianRational {
        let mut s = GaussianRational::zero();
        for (&(p, q, m), c) in &self.coeffs {
            let d = o.get(p, q, m);
            if !d.is_zero() {
                s += (c * &d.conjugate()).scale(&basis_norm_sqr(p, q, m));
            }
        }
        s
    }
}

/// Exact decomposition of a polynomial. The truncation is the polynomial degree.
pub fn to_harmonic<S: Scalar>(u: &Poly<S>) -> HarmonicField<S> {
    let mut out = HarmonicField::zero(u.degree() as u32);
    for ((j, k), part) in u.split_by_weight() {
        for (p, piece) in split_class(&part, j, k) {
            let q = (p as i32 - j - k) as u32;
            let c = multiple_of(&piece, &basis_vector(p, q, j));
            out.set(p, q, j, c);
        }
    }
    out
}

pub fn from_harmonic<S: Scalar>(f: &HarmonicField<S>) -> Poly<S> {
    f.to_poly()
}

/// ‖u‖_s = (Σ (1+p+q+2pq)^s ‖u_{p,q}‖²)^{1/2}, π included.
pub fn fs_norm<S: Scalar>(u: &HarmonicField<S>, s: f64) -> f64 {
    let mut acc = 0.0;
    for ((p, q), n) in u.block_norms_sqr() {
        acc += (1.0 + sublaplacian_eigenvalue(p, q) as f64).powf(s) * n;
    }
    acc.sqrt() * std::f64::consts::PI
}

/// Truncated projection by exact inner products ⟨u,e⟩/⟨e,e⟩ (cross-check for `to_harmonic`).
pub fn project_by_inner_products(u: &PolyFn, n: u32) -> HarmonicField<GaussianRational> {
    let mut out = HarmonicField::zero(n);
    for d in 0..=n {
        for p in 0..=d {
            let q = d - p;
            for m in -(q as i32)..=p as i32 {
                let e = basis_vector(p, q, m);
                let c = u.inner(&e).scale(&basis_norm_sqr(p, q, m).recip());
                out.set(p, q, m, c);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn gq(n: i64) -> GaussianRational {
        GaussianRational::from_int(n)
    }

    #[test]
    fn closed_form_matches_projection() {
        for d in 0..=8u32 {
            for p in 0..=d {
                let q = d - p;
                for m in -(q as i32)..=p as i32 {
                    let e = basis_vector(p, q, m);
                    assert_eq!(*e, basis_vector_by_projection(p, q, m), "({p},{q},{m})");
                    assert_eq!(basis_norm_sqr(p, q, m), e.inner(&e).re);
                }
            }
        }
    }

    #[test]
    fn low_degree_basis() {
        let b = harmonic_basis(1, 0);
        assert_eq!(b.len(), 2);
        assert_eq!(*b[0], PolyFn::w());
        assert_eq!(*b[1], PolyFn::z());
        let zw = PolyFn::z().mul(&PolyFn::wbar());
        assert_eq!(*basis_vector(1, 1, 1), zw);
    }

    #[test]
    fn projection_example() {
        let u = PolyFn::one().sub(&PolyFn::monomial([0, 1, 0, 1], gq(2)));
        assert_eq!(project_pq(&u, 1, 1), u);
        assert!(project_pq(&u, 0, 0).is_zero());
        assert_eq!(sublaplacian_poly(&u), u.scale(&gq(4)));
        assert_eq!(project_pq(&PolyFn::z(), 1, 0), PolyFn::z());
    }

    #[test]
    fn dims_and_orthogonality() {
        for p in 0..=4u32 {
            for q in 0..=(4 - p) {
                let b = harmonic_basis(p, q);
                assert_eq!(b.len() as u32, p + q + 1);
                for (i, e) in b.iter().enumerate() {
                    assert!(!e.is_zero());
                    assert_eq!(
                        sublaplacian_poly(e),
                        e.scale(&gq(sublaplacian_eigenvalue(p, q)))
                    );
                    for f in b.iter().skip(i + 1) {
                        assert!(e.inner(f).is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn ladder_relations() {
        for p in 0..=5u32 {
            for q in 0..=(5 - p) {
                for m in -(q as i32)..=p as i32 {
                    let e = basis_vector(p, q, m);
                    let (a, b) = ladder(p, q, m);
                    if p > 0 {
                        assert_eq!(e.z1(), basis_vector(p - 1, q + 1, m - 1).scale(&a));
                        // Z₁̄Z₁ = −p(q+1)
                        assert_eq!(e.z1().z1bar(), e.scale(&gq(-((p * (q + 1)) as i64))));
                    } else {
                        assert!(e.z1().is_zero());
                    }
                    if q > 0 {
                        assert_eq!(e.z1bar(), basis_vector(p + 1, q - 1, m + 1).scale(&b));
                    } else {
                        assert!(e.z1bar().is_zero());
                    }
                    assert_eq!(e.conj(), *basis_vector(q, p, -m));
                }
            }
        }
    }

    #[test]
    fn roundtrip_and_inner_product_projection() {
        let u = PolyFn::monomial(
            [2, 1, 0, 2],
            GaussianRational::new(ratio(1, 3), ratio(2, 1)),
        )
        .add(&PolyFn::monomial([0, 0, 1, 3], gq(-5)))
        .add(&PolyFn::constant(gq(7)));
        let h = to_harmonic(&u);
        assert_eq!(from_harmonic(&h), u);
        let h2 = project_by_inner_products(&u, u.degree() as u32);
        assert_eq!(h.with_truncation(u.degree() as u32), h2);
    }

    #[test]
    fn norms() {
        let mut f = HarmonicField::<GaussianRational>::zero(4);
        f.set(1, 0, 1, gq(1));
        assert_eq!(f.norm_sqr_exact(), ratio(2, 1));
        let s = fs_norm(&f, 0.0);
        assert!((s - (2.0f64).sqrt() * std::f64::consts::PI).abs() < 1e-12);
    }
}
