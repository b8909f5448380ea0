//! Linearized Cartan and obstruction operators at the round sphere, the deformation spaces,
//! and the eigenvalue bound scans.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::harmonic::{basis_vector, sublaplacian_eigenvalue, HarmonicField};
use crate::poly::{Poly, PolyFn};
use crate::scalar::{ratio, GaussianRational, Scalar};

fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Eigenvalue of Z₁²Z₁̄² on H_{p,q}: (p+1)(p+2)(q−1)q.
pub fn kappa(p: u32, q: u32) -> i64 {
    let (p, q) = (p as i64, q as i64);
    (p + 1) * (p + 2) * (q - 1) * q
}

/// ∇₀ acts on deformation tensors in H_{p,q} by i·σ, σ = p − q + 4.
pub fn nabla0_weight(p: u32, q: u32) -> i64 {
    p as i64 - q as i64 + 4
}

/// Scalar by which D𝒬 maps H_{p,q} to itself (the ū term, which leaves the block unless
/// q = p + 4, is excluded). With σ = p − q + 4 this is κ/6 + σ² − (2/3)q(p+1)σ − σ.
pub fn dq_same_block_scalar(p: u32, q: u32) -> BigRational {
    let s = big(nabla0_weight(p, q));
    let k = big(kappa(p, q)) * ratio(1, 6);
    let mix = big(q as i64 * (p as i64 + 1)) * ratio(2, 3) * &s;
    k + &s * &s - mix - s
}

/// P₁D𝒬 on 𝔇′_BE block (p, q), q ≥ p+4: the same-block scalar, plus κ/6 on the critical diagonal.
pub fn p1dq_eigenvalue(p: u32, q: u32) -> Option<BigRational> {
    if q < p + 4 {
        return None;
    }
    let mut v = dq_same_block_scalar(p, q);
    if q == p + 4 {
        v += big(kappa(p, q)) * ratio(1, 6);
    }
    Some(v)
}

/// D𝒬 scalar on 𝔇₀⊥ blocks (q ∈ {0, 1}).
pub fn dq_d0perp_scalar(p: u32, q: u32) -> Option<BigRational> {
    (q <= 1).then(|| dq_same_block_scalar(p, q))
}

/// The tabulated scalars as commonly quoted: (p+4)(p+3) on H_{p,0}, (1/3)(p+3)(5p+8) on H_{p,1},
/// and for q > p+4 the expression κ/6 + r² − (2/3)(p+1)q·r + r with r = q−p−4.
pub mod quoted {
    use super::*;

    pub fn dq_p0(p: u32) -> BigRational {
        big((p as i64 + 4) * (p as i64 + 3))
    }

    pub fn dq_p1(p: u32) -> BigRational {
        big((p as i64 + 3) * (5 * p as i64 + 8)) * ratio(1, 3)
    }

    /// Rejects q < p+4.
    pub fn p1dq_eigenvalue(p: u32, q: u32) -> Option<BigRational> {
        if q < p + 4 {
            return None;
        }
        let k = big(kappa(p, q));
        if q == p + 4 {
            return Some(k * ratio(1, 3));
        }
        let r = big(q as i64 - p as i64 - 4);
        let pq = big((p as i64 + 1) * q as i64);
        Some(k * ratio(1, 6) + &r * &r - ratio(2, 3) * pq * &r + r)
    }

    /// Σ (p+4)²(p+3)‖u_{p,0}‖² + (1/3)(p+3)²(5p+8)‖u_{p,1}‖² per unit block norm.
    pub fn quadratic_form_weight(p: u32, q: u32) -> Option<BigRational> {
        match q {
            0 => Some(dq_p0(p) * big(p as i64 + 4)),
            1 => Some(dq_p1(p) * big(p as i64 + 3)),
            _ => None,
        }
    }
}

/// Weight of block (p, q) in ∫D𝒬(u)·i·conj(∇₀u): D𝒬 scalar times σ.
pub fn quadratic_form_weight(p: u32, q: u32) -> Option<BigRational> {
    dq_d0perp_scalar(p, q).map(|l| l * big(nabla0_weight(p, q)))
}

fn nabla0_field<S: Scalar>(u: &HarmonicField<S>) -> HarmonicField<S> {
    u.map_blocks(|p, q| S::imag_unit() * S::from_int(nabla0_weight(p, q)))
}

fn c<S: Scalar>(re: (i64, i64), im: (i64, i64)) -> S {
    S::from_gq(&GaussianRational::new(ratio(re.0, re.1), ratio(im.0, im.1)))
}

/// D𝒬u = (1/6)Z₁²Z₁̄²u + (1/6)Z₁⁴ū − ∇₀²u − (2i/3)Z₁Z₁̄∇₀u + i∇₀u, blockwise through the
/// ladder constants.
pub fn dq_apply<S: Scalar>(u: &HarmonicField<S>) -> HarmonicField<S> {
    let n0 = nabla0_field(u);
    let t1 = u.z1bar().z1bar().z1().z1().scale(&c((1, 6), (0, 1)));
    let t2 = u.conj().z1().z1().z1().z1().scale(&c((1, 6), (0, 1)));
    let t3 = nabla0_field(&n0).scale(&c((-1, 1), (0, 1)));
    let t4 = n0.z1bar().z1().scale(&c((0, 1), (-2, 3)));
    let t5 = n0.scale(&S::imag_unit());
    t1.add(&t2).add(&t3).add(&t4).add(&t5)
}

fn nabla0_poly<S: Scalar>(u: &Poly<S>) -> Poly<S> {
    u.reeb().add(&u.scale(&c((0, 1), (4, 1))))
}

/// The same operator composed from the polynomial frame operators.
pub fn dq_apply_poly<S: Scalar>(u: &Poly<S>) -> Poly<S> {
    let n0 = nabla0_poly(u);
    let t1 = u.z1bar().z1bar().z1().z1().scale(&c((1, 6), (0, 1)));
    let t2 = u.conj().z1().z1().z1().z1().scale(&c((1, 6), (0, 1)));
    let t3 = nabla0_poly(&n0).neg();
    let t4 = n0.z1bar().z1().scale(&c((0, 1), (-2, 3)));
    let t5 = n0.scale(&S::imag_unit());
    t1.add(&t2).add(&t3).add(&t4).add(&t5)
}

/// D𝒪 = Z₁̄²D𝒬.
pub fn do_apply<S: Scalar>(u: &HarmonicField<S>) -> HarmonicField<S> {
    dq_apply(u).z1bar().z1bar()
}

pub fn do_apply_poly<S: Scalar>(u: &Poly<S>) -> Poly<S> {
    dq_apply_poly(u).z1bar().z1bar()
}

/// Divides block (p, q) by 1 + p + q + 2pq.
pub fn resolvent_sublaplacian<S: Scalar>(u: &HarmonicField<S>) -> HarmonicField<S> {
    u.map_blocks(|p, q| S::one() / S::from_int(1 + sublaplacian_eigenvalue(p, q)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum SpaceTag {
    D0,
    D0perp,
    DBE,
    DBEprime,
    H1O,
    H2O,
    ImDO,
}

impl std::str::FromStr for SpaceTag {
    type Err = crate::error::CrError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "D0" => SpaceTag::D0,
            "D0perp" => SpaceTag::D0perp,
            "DBE" => SpaceTag::DBE,
            "DBEprime" => SpaceTag::DBEprime,
            "H1O" => SpaceTag::H1O,
            "H2O" => SpaceTag::H2O,
            "Im_DO" | "ImDO" => SpaceTag::ImDO,
            _ => return Err(crate::error::CrError::Parse(format!("unknown space {s:?}"))),
        })
    }
}

/// Real part (u + ū)/2 of a scalar function.
pub fn real_part<S: Scalar>(u: &HarmonicField<S>) -> HarmonicField<S> {
    u.add(&u.conj()).scale(&c((1, 2), (0, 1)))
}

/// Orthogonal projection onto the real part of Z₁̄²φ on every critical block (p, p+4).
fn critical_reality<S: Scalar>(u: &HarmonicField<S>) -> HarmonicField<S> {
    let mut out = u.filter(|p, q| q != p + 4);
    for (p, q) in u.blocks() {
        if q != p + 4 {
            continue;
        }
        let v = real_part(&u.block(p, q).z1bar().z1bar());
        let back = v.z1().z1().scale(&(S::one() / S::from_int(kappa(p, q))));
        out = out.add(&back);
    }
    out
}

pub fn project<S: Scalar>(space: SpaceTag, u: &HarmonicField<S>) -> HarmonicField<S> {
    match space {
        SpaceTag::D0 => u.filter(|_, q| q >= 2),
        SpaceTag::D0perp | SpaceTag::H1O => u.filter(|_, q| q <= 1),
        SpaceTag::DBE => u.filter(|p, q| q >= p + 4),
        SpaceTag::DBEprime => critical_reality(&u.filter(|p, q| q >= p + 4)),
        SpaceTag::H2O => real_part(&u.filter(|p, q| p.min(q) <= 1)),
        SpaceTag::ImDO => real_part(&u.filter(|p, q| p >= 2 && q >= 2)),
    }
}

/// Membership with the L² distance to the space.
pub fn membership<S: Scalar>(space: SpaceTag, u: &HarmonicField<S>) -> (bool, f64) {
    let r = u.sub(&project(space, u)).l2_norm();
    let tol = 1e-12 * (1.0 + u.l2_norm());
    (r <= tol, r)
}

/// Exact version: zero residual.
pub fn is_member_exact(space: SpaceTag, u: &HarmonicField<GaussianRational>) -> bool {
    project(space, u) == *u
}

/// ℒ⁻¹ for ℒ = P_Im∘D𝒪 restricted to 𝔇′_BE, blockwise: for a real f with p, q ≥ 2 blocks,
/// returns the unique u ∈ 𝔇′_BE with P_Im D𝒪u = f.
pub fn l_inverse<S: Scalar>(f: &HarmonicField<S>, truncation: u32) -> HarmonicField<S> {
    let mut out = HarmonicField::zero(truncation);
    for (pp, qq) in f.blocks() {
        if pp < 2 || qq < pp {
            continue;
        }
        let (p, q) = (pp - 2, qq + 2);
        if p + q > truncation {
            continue;
        }
        let lam = p1dq_eigenvalue(p, q).expect("q ≥ p+4");
        let k = kappa(p, q);
        let blk = f.block(pp, qq).z1().z1();
        // Off the diagonal, P_Im halves λZ₁̄²u and the conjugate of Z₁̄²Z₁⁴ū/6 restores
        // the other half, because λ = κ(p+2, q−2)/6 there.
        let denom = S::from_gq(&GaussianRational::real(lam * big(k)));
        out = out.add(&blk.scale(&(S::one() / denom)));
    }
    out
}

/// ℒu = P_Im D𝒪u.
pub fn l_apply<S: Scalar>(u: &HarmonicField<S>) -> HarmonicField<S> {
    project(SpaceTag::ImDO, &do_apply(u))
}

/// Real basis of 𝔇′_BE with p+q ≤ n: e and i·e on non-critical blocks, Z₁²v/κ for a real
/// basis v of H_{a,a} on the critical blocks.
pub fn dbe_prime_basis(n: u32) -> Vec<HarmonicField<GaussianRational>> {
    let mut out = Vec::new();
    let one = GaussianRational::from_int(1);
    let i = GaussianRational::i();
    for p in 0..=n {
        for q in (p + 4)..=n.saturating_sub(p) {
            if p + q > n {
                break;
            }
            if q > p + 4 {
                for m in -(q as i32)..=p as i32 {
                    out.push(HarmonicField::basis(n, p, q, m, one.clone()));
                    out.push(HarmonicField::basis(n, p, q, m, i.clone()));
                }
            } else {
                let a = p + 2;
                let k = GaussianRational::frac(1, kappa(p, q));
                for v in real_basis_diagonal(a, n) {
                    out.push(v.z1().z1().scale(&k));
                }
            }
        }
    }
    out
}

/// Real-valued basis of H_{a,a}: e₀, e_m + e_{−m}, i(e_m − e_{−m}).
fn real_basis_diagonal(a: u32, n: u32) -> Vec<HarmonicField<GaussianRational>> {
    let one = GaussianRational::from_int(1);
    let i = GaussianRational::i();
    let mut v = vec![HarmonicField::basis(n, a, a, 0, one.clone())];
    for m in 1..=a as i32 {
        let e = HarmonicField::basis(n, a, a, m, one.clone());
        let f = HarmonicField::basis(n, a, a, -m, one.clone());
        v.push(e.add(&f));
        v.push(e.sub(&f).scale(&i));
    }
    v
}

/// Trivial directions i·Z₁²f for real f of degree ≤ n (as fields of degree ≤ n).
pub fn trivial_directions(n: u32) -> Vec<HarmonicField<GaussianRational>> {
    let i = GaussianRational::i();
    let one = GaussianRational::from_int(1);
    let mut out = Vec::new();
    for d in 0..=n {
        for p in 0..=d {
            let q = d - p;
            if p < 2 || q > p {
                continue;
            }
            for m in -(q as i32)..=p as i32 {
                let e = HarmonicField::basis(n, p, q, m, one.clone());
                for f in [real_part(&e), real_part(&e.scale(&i))] {
                    if f.is_zero() {
                        continue;
                    }
                    let u = f.z1().z1().scale(&i);
                    if !u.is_zero() {
                        out.push(u);
                    }
                }
            }
        }
    }
    out
}

/// Ratio scan over 0 ≤ p ≤ p_max, p+4 ≤ q ≤ q_max.
#[derive(Clone, Debug, Serialize)]
pub struct BoundScan {
    pub name: String,
    pub lower_bound: String,
    pub min_ratio: String,
    pub min_ratio_f64: f64,
    pub argmin: (u32, u32),
    pub max_ratio: String,
    pub max_ratio_f64: f64,
    pub argmax: (u32, u32),
    pub count: usize,
    pub violations: Vec<(u32, u32)>,
}

impl BoundScan {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.count > 0
    }
}

fn scan<F: Fn(u32, u32) -> BigRational>(
    name: &str,
    p_max: u32,
    q_max: u32,
    lower: BigRational,
    num: F,
) -> BoundScan {
    let mut min: Option<(BigRational, (u32, u32))> = None;
    let mut max: Option<(BigRational, (u32, u32))> = None;
    let mut violations = Vec::new();
    let mut count = 0;
    for p in 0..=p_max {
        for q in (p + 4)..=q_max {
            let d = big(1 + sublaplacian_eigenvalue(p, q));
            let r = num(p, q) / (&d * &d);
            count += 1;
            if r < lower || !r.is_positive() {
                violations.push((p, q));
            }
            if min.as_ref().is_none_or(|(m, _)| r < *m) {
                min = Some((r.clone(), (p, q)));
            }
            if max.as_ref().is_none_or(|(m, _)| r > *m) {
                max = Some((r, (p, q)));
            }
        }
    }
    let (mn, amin) = min.unwrap_or((BigRational::zero(), (0, 0)));
    let (mx, amax) = max.unwrap_or((BigRational::zero(), (0, 0)));
    BoundScan {
        name: name.to_string(),
        lower_bound: crate::scalar::format_rational(&lower),
        min_ratio: crate::scalar::format_rational(&mn),
        min_ratio_f64: crate::scalar::rational_to_f64(&mn),
        argmin: amin,
        max_ratio: crate::scalar::format_rational(&mx),
        max_ratio_f64: crate::scalar::rational_to_f64(&mx),
        argmax: amax,
        count,
        violations,
    }
}

/// P₁D𝒬 eigenvalue over (1+Δ_b)², checked against 1/48.
pub fn bound_scan_p1dq(p_max: u32, q_max: u32) -> BoundScan {
    scan("P1DQ/(1+Lb)^2", p_max, q_max, ratio(1, 48), |p, q| {
        p1dq_eigenvalue(p, q).unwrap()
    })
}

/// Same scan with the quoted (tabulated) numerator.
pub fn bound_scan_p1dq_quoted(p_max: u32, q_max: u32) -> BoundScan {
    scan(
        "quoted P1DQ/(1+Lb)^2",
        p_max,
        q_max,
        ratio(1, 48),
        |p, q| quoted::p1dq_eigenvalue(p, q).unwrap(),
    )
}

/// (p+1)(p+2)(q−1)q/(1+Δ_b)², checked for strict positivity.
pub fn bound_scan_kappa(p_max: u32, q_max: u32) -> BoundScan {
    scan(
        "kappa/(1+Lb)^2",
        p_max,
        q_max,
        BigRational::zero(),
        |p, q| big(kappa(p, q)),
    )
}

/// Exact rank of a family of fields over ℝ (coordinates = real and imaginary parts).
pub fn real_rank(fields: &[HarmonicField<GaussianRational>]) -> usize {
    let mut keys: Vec<(u32, u32, i32)> = fields
        .iter()
        .flat_map(|f| f.iter().map(|(k, _)| k))
        .collect();
    keys.sort();
    keys.dedup();
    let mut rows: Vec<Vec<BigRational>> = fields
        .iter()
        .map(|f| {
            keys.iter()
                .flat_map(|&(p, q, m)| {
                    let v = f.get(p, q, m);
                    [v.re, v.im]
                })
                .collect()
        })
        .collect();
    let ncols = 2 * keys.len();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(piv) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, piv);
        let pv = rows[rank][col].clone();
        for r in 0..rows.len() {
            if r != rank && !rows[r][col].is_zero() {
                let f = &rows[r][col] / &pv;
                for c2 in col..ncols {
                    let d = &f * &rows[rank][c2];
                    rows[r][c2] -= d;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Real dimension of the real functions supported on the blocks {(p,q),(q,p)} with p ≤ q.
pub fn real_dim_pair(p: u32, q: u32) -> usize {
    let d = (p + q + 1) as usize;
    if p == q {
        d
    } else {
        2 * d
    }
}

/// The basis vector e_{p,q,m} as a field truncated at n.
pub fn unit_basis(n: u32, p: u32, q: u32, m: i32) -> HarmonicField<GaussianRational> {
    HarmonicField::basis(n, p, q, m, GaussianRational::from_int(1))
}

/// D𝒬 of a basis vector, composed in polynomial form.
pub fn dq_of_basis_poly(p: u32, q: u32, m: i32) -> PolyFn {
    dq_apply_poly(&basis_vector(p, q, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::to_harmonic;

    type G = GaussianRational;

    #[test]
    fn quoted_examples() {
        assert_eq!(quoted::p1dq_eigenvalue(0, 5).unwrap(), ratio(16, 3));
        assert_eq!(quoted::p1dq_eigenvalue(0, 4).unwrap(), big(8));
        assert_eq!(quoted::p1dq_eigenvalue(1, 5).unwrap(), big(40));
        assert!(quoted::p1dq_eigenvalue(1, 4).is_none());
        assert_eq!(quoted::dq_p1(0), big(8));
    }

    #[test]
    fn derived_scalars() {
        for p in 0..10 {
            assert_eq!(dq_d0perp_scalar(p, 0).unwrap(), quoted::dq_p0(p));
            assert_eq!(
                dq_d0perp_scalar(p, 1).unwrap(),
                big(((p + 3) * (p + 4)) as i64) * ratio(1, 3)
            );
            assert_eq!(
                p1dq_eigenvalue(p, p + 4).unwrap(),
                quoted::p1dq_eigenvalue(p, p + 4).unwrap()
            );
            for q in (p + 5)..(p + 12) {
                // Same-block scalar factors as (1/6)(q−2)(q−3)(p+3)(p+4).
                let f = big(((q - 2) * (q - 3) * (p + 3) * (p + 4)) as i64) * ratio(1, 6);
                assert_eq!(p1dq_eigenvalue(p, q).unwrap(), f);
            }
        }
        assert_eq!(p1dq_eigenvalue(0, 5).unwrap(), big(12));
    }

    #[test]
    fn dq_field_matches_poly_composition() {
        for (p, q, m) in [(2, 0, 1), (1, 1, 0), (0, 4, -2), (1, 5, 1), (3, 2, -1)] {
            let f = dq_apply(&unit_basis(12, p, q, m));
            let g = to_harmonic(&dq_of_basis_poly(p, q, m));
            assert_eq!(f, g.with_truncation(12));
        }
    }

    #[test]
    fn spaces() {
        let mut u = HarmonicField::<G>::zero(8);
        u.set(2, 0, 1, G::from_ints(1, 2));
        u.set(1, 1, 0, G::from_int(3));
        u.set(0, 5, -2, G::from_ints(0, 1));
        u.set(1, 5, 0, G::from_ints(2, -1));
        let a = project(SpaceTag::D0perp, &u);
        let b = project(SpaceTag::D0, &u);
        assert_eq!(a.add(&b), u);
        assert!(is_member_exact(SpaceTag::D0perp, &a));
        let be = project(SpaceTag::DBEprime, &u);
        assert!(is_member_exact(SpaceTag::DBEprime, &be));
        assert_eq!(project(SpaceTag::DBEprime, &be), be);
        let v = be.block(1, 5).z1bar().z1bar();
        assert_eq!(v, v.conj());
    }

    #[test]
    fn resolvent() {
        let u = unit_basis(4, 1, 1, 0);
        assert_eq!(resolvent_sublaplacian(&u), u.scale(&G::frac(1, 5)));
        let w = unit_basis(4, 2, 1, 0).add(&u);
        let r = resolvent_sublaplacian(&w);
        assert_eq!(r.add(&r.sublaplacian()), w);
    }

    #[test]
    fn l_inverse_roundtrip() {
        let n = 10;
        let mut f = HarmonicField::<G>::zero(n);
        f.set(2, 2, 0, G::from_int(3));
        f.set(2, 4, 1, G::from_ints(1, 2));
        f.set(3, 3, 2, G::from_ints(1, 1));
        let f = project(SpaceTag::ImDO, &f);
        let u = l_inverse(&f, n);
        assert!(is_member_exact(SpaceTag::DBEprime, &u));
        assert_eq!(l_apply(&u), f);
    }

    #[test]
    fn scans_small() {
        let s = bound_scan_p1dq(20, 40);
        assert!(s.passed(), "{s:?}");
        assert_eq!(bound_scan_kappa(10, 20).violations.len(), 0);
    }
}
