use proptest::prelude::*;

use crobs_core::harmonic::{sublaplacian_eigenvalue, sublaplacian_poly};
use crobs_core::io::{field_from_json, field_to_json};
use crobs_core::linear::{self, SpaceTag};
use crobs_core::random;
use crobs_core::{from_harmonic, to_harmonic, GaussianRational, HarmonicField, PolyFn, Scalar};

type G = GaussianRational;

fn field(max_degree: u32) -> impl Strategy<Value = HarmonicField<G>> {
    (any::<u64>(), 1usize..6).prop_map(move |(seed, terms)| {
        random::sparse_field(&mut random::rng(seed), max_degree, terms, 6, |_, _| true)
    })
}

fn poly(max_degree: u32) -> impl Strategy<Value = PolyFn> {
    (any::<u64>(), 1usize..5).prop_map(move |(seed, terms)| {
        random::sparse_poly(&mut random::rng(seed), max_degree, terms, 5)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn json_round_trip(u in field(6)) {
        let text = serde_json::to_string(&field_to_json(&u)).unwrap();
        prop_assert_eq!(field_from_json(&text).unwrap(), u);
    }

    #[test]
    fn harmonic_round_trip(u in field(5)) {
        prop_assert_eq!(to_harmonic(&from_harmonic(&u)).with_truncation(u.truncation), u);
    }

    #[test]
    fn ladder_relations(u in field(6)) {
        // Z̄Z₁ = −p(q+1) and Z₁Z̄ = −q(p+1) on H_{p,q}
        let a = u.z1().z1bar();
        let b = u.z1bar().z1();
        prop_assert_eq!(a, u.map_blocks(|p, q| G::from_int(-((p * (q + 1)) as i64))));
        prop_assert_eq!(b, u.map_blocks(|p, q| G::from_int(-((q * (p + 1)) as i64))));
    }

    #[test]
    fn sublaplacian_cross_check(u in field(6)) {
        let direct = u.sublaplacian();
        let via_poly = to_harmonic(&sublaplacian_poly(&u.to_poly())).with_truncation(u.truncation);
        prop_assert_eq!(&direct, &via_poly);
        let eig = u.map_blocks(|p, q| G::from_int(sublaplacian_eigenvalue(p, q)));
        prop_assert_eq!(direct, eig);
    }

    #[test]
    fn leibniz(f in poly(3), g in poly(3)) {
        let fg = f.mul(&g);
        prop_assert_eq!(fg.z1(), f.z1().mul(&g).add(&f.mul(&g.z1())));
        prop_assert_eq!(fg.z1bar(), f.z1bar().mul(&g).add(&f.mul(&g.z1bar())));
        prop_assert_eq!(fg.reeb(), f.reeb().mul(&g).add(&f.mul(&g.reeb())));
    }

    #[test]
    fn conjugation(f in poly(4), u in field(5)) {
        prop_assert_eq!(f.z1().conj(), f.conj().z1bar());
        prop_assert_eq!(f.conj().conj(), f.clone());
        prop_assert_eq!(u.z1().conj(), u.conj().z1bar());
        prop_assert_eq!(from_harmonic(&u.conj()), from_harmonic(&u).conj());
    }

    #[test]
    fn integral_of_conjugate(f in poly(4)) {
        prop_assert_eq!(f.conj().integrate(), f.integrate().conjugate());
    }

    #[test]
    fn do_kills_d0perp(u in field(6)) {
        let v = linear::project(SpaceTag::D0perp, &u);
        prop_assert!(linear::do_apply(&v).is_zero());
    }

    #[test]
    fn do_is_real_on_dbe_prime(u in field(8)) {
        let v = linear::project(SpaceTag::DBEprime, &u.with_truncation(8));
        let w = linear::do_apply(&v);
        prop_assert_eq!(linear::real_part(&w), w.clone());
        prop_assert!(linear::is_member_exact(SpaceTag::ImDO, &w));
    }

    #[test]
    fn l_inverse_right_inverse(u in field(10)) {
        let f = linear::project(SpaceTag::ImDO, &u.with_truncation(10));
        let psi = linear::l_inverse(&f, 12);
        prop_assert!(psi.iter().all(|((p, q, _), _)| q >= p + 4));
        prop_assert_eq!(linear::l_apply(&psi).with_truncation(10), f);
    }

    #[test]
    fn projections_idempotent(u in field(6)) {
        for s in [SpaceTag::D0perp, SpaceTag::DBEprime, SpaceTag::ImDO, SpaceTag::H2O] {
            let p = linear::project(s, &u);
            prop_assert_eq!(linear::project(s, &p), p.clone());
            prop_assert!(linear::is_member_exact(s, &p));
        }
    }
}
