//! JSON reports of a deformed structure on either backend.

use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::FnAlgebra;
use crate::error::Result;
use crate::geometry::{deformed_structure, DeformedStructure};
use crate::grid::{GridAlgebra, GridFn, GridSpec};
use crate::harmonic::{project_by_inner_products, HarmonicField};
use crate::io::{field_to_json, field_to_json_f64, FieldJson};
use crate::jet::{Jet, JetAlgebra};
use crate::poly::PolyFn;
use crate::scalar::{format_rational, GaussianRational};
use crate::solvers::Backend;

type G = GaussianRational;

/// Pointwise summary of a grid function; means are over the sphere.
#[derive(Clone, Debug, Serialize)]
pub struct GridStats {
    pub max_abs: f64,
    pub mean_re: f64,
    pub mean_im: f64,
    pub rms: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct InvariantReport {
    pub name: String,
    /// Degree ≤ N projection; one entry per power of t on the jet backend.
    pub coefficients: Vec<FieldJson>,
    pub stats: Option<GridStats>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComputeReport {
    pub backend: Backend,
    pub truncation: u32,
    pub jet_order: Option<usize>,
    pub grid: Option<GridSpec>,
    pub invariants: Vec<InvariantReport>,
    /// ∫Õ/π², per power of t on the jet backend.
    pub obstruction_integral: Vec<String>,
    /// ∫(Õ − i·φ̄,₀·Q̃₁^{1̄}/(1−|φ|²))/π², per power of t on the jet backend.
    pub identity_residual: Vec<String>,
}

fn named<F>(s: &DeformedStructure<F>) -> Vec<(&'static str, &F)> {
    vec![
        ("h_tilde", &s.h_tilde),
        ("A11", &s.a11),
        ("A1bar_up1", &s.a_bar_up),
        ("omega0", &s.omega0),
        ("omega1", &s.omega1),
        ("omega1bar", &s.omega1bar),
        ("R_tilde", &s.r_tilde),
        ("Q11", &s.q11),
        ("Q1_up1bar", &s.q1_up),
        ("Q_up1bar1bar", &s.q_upup),
        ("O_tilde", &s.o_tilde),
    ]
}

/// Exact report for φ(t) = t·φ, expanded to order K.
pub fn compute_jet(phi: &HarmonicField<G>, order: usize, n: u32) -> Result<ComputeReport> {
    let alg = JetAlgebra::<G>::new(order);
    let jet = Jet::from_coeffs(order, vec![PolyFn::zero(), phi.to_poly()]);
    let s = deformed_structure(&alg, &jet)?;
    let invariants = named(&s)
        .into_iter()
        .map(|(name, f)| InvariantReport {
            name: name.into(),
            coefficients: (0..=order)
                .map(|k| field_to_json(&project_by_inner_products(f.coeff(k), n)))
                .collect(),
            stats: None,
        })
        .collect();
    let diff = alg.sub(&s.o_tilde, &s.identity_rhs);
    let per_order = |j: &Jet<G>| {
        (0..=order)
            .map(|k| format_rational(&j.coeff(k).integrate().re))
            .collect()
    };
    Ok(ComputeReport {
        backend: Backend::Jet,
        truncation: n,
        jet_order: Some(order),
        grid: None,
        invariants,
        obstruction_integral: per_order(&s.o_tilde),
        identity_residual: per_order(&diff),
    })
}

fn stats(alg: &GridAlgebra, f: &GridFn) -> GridStats {
    let mean = alg.basis.integrate(f) / 4.0;
    let sq = alg.basis.integrate(&alg.mul(f, &alg.conj(f))).re / 4.0;
    GridStats {
        max_abs: f.max_abs(),
        mean_re: mean.re,
        mean_im: mean.im,
        rms: sq.max(0.0).sqrt(),
    }
}

/// Pointwise evaluation; fails on the first node with |φ| ≥ 1.
pub fn compute_grid(
    phi: &HarmonicField<Complex64>,
    spec: GridSpec,
    n: u32,
) -> Result<ComputeReport> {
    let alg = GridAlgebra::new(spec);
    let g = alg.from_field(phi)?;
    let s = deformed_structure(&alg, &g)?;
    let invariants = named(&s)
        .into_iter()
        .map(|(name, f)| InvariantReport {
            name: name.into(),
            coefficients: vec![field_to_json_f64(&alg.basis.project(f, n as usize))],
            stats: Some(stats(&alg, f)),
        })
        .collect();
    let o = alg.basis.integrate(&s.o_tilde);
    let r = o - alg.basis.integrate(&s.identity_rhs);
    Ok(ComputeReport {
        backend: Backend::Grid,
        truncation: n,
        jet_order: None,
        grid: Some(spec),
        invariants,
        obstruction_integral: vec![format!("{:e}", o.re)],
        identity_residual: vec![format!("{:e}", r.norm())],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn find<'a>(r: &'a ComputeReport, name: &str) -> &'a InvariantReport {
        r.invariants.iter().find(|i| i.name == name).unwrap()
    }

    #[test]
    fn sphere() {
        let r = compute_jet(&HarmonicField::zero(4), 2, 4).unwrap();
        let rt = &find(&r, "R_tilde").coefficients[0].coefficients;
        assert_eq!(rt.len(), 1);
        assert_eq!((rt[0].p, rt[0].q, rt[0].re.as_str()), (0, 0, "2"));
        assert!(find(&r, "O_tilde")
            .coefficients
            .iter()
            .all(|c| c.coefficients.is_empty()));
        assert!(find(&r, "Q11")
            .coefficients
            .iter()
            .all(|c| c.coefficients.is_empty()));
        assert!(r.obstruction_integral.iter().all(|s| s == "0"));

        let g = compute_grid(&HarmonicField::zero(4), GridSpec::for_bandwidth(12), 4).unwrap();
        let st = find(&g, "R_tilde").stats.clone().unwrap();
        assert!((st.mean_re - 2.0).abs() < 1e-12 && st.mean_im.abs() < 1e-12);
        assert!(find(&g, "O_tilde").stats.clone().unwrap().max_abs < 1e-12);
    }

    #[test]
    fn grid_guard() {
        let mut phi = HarmonicField::zero(4);
        phi.set(0, 0, 0, Complex64::new(1.5, 0.0));
        let e = compute_grid(&phi, GridSpec::for_bandwidth(12), 4)
            .unwrap_err()
            .to_string();
        assert!(e.contains("grid node"), "{e}");
    }
}
