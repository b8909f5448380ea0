//! Fixed-point partial solver, Kuranishi map, second-order quadratic form and rigidity
//! certificates.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{CrError, Result};
use crate::geometry::{deformed_structure, DeformedStructure};
use crate::grid::{GridAlgebra, GridFn, GridSpec};
use crate::harmonic::{basis_norm_sqr, fs_norm, project_by_inner_products, HarmonicField};
use crate::io::{field_to_json, field_to_json_f64, FieldJson};
use crate::jet::{Jet, JetAlgebra};
use crate::linear::{self, l_apply, l_inverse, project, resolvent_sublaplacian, SpaceTag};
use crate::poly::PolyFn;
use crate::scalar::{format_rational, rational_to_f64, GaussianRational, Scalar};

type G = GaussianRational;
type Field = HarmonicField<Complex64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Jet,
    #[default]
    Grid,
}

impl std::str::FromStr for Backend {
    type Err = CrError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jet" => Ok(Backend::Jet),
            "grid" => Ok(Backend::Grid),
            _ => Err(CrError::Parse(format!("unknown backend {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveConfig {
    pub truncation: u32,
    pub backend: Backend,
    pub tol: f64,
    pub max_iter: usize,
    /// Contraction ratios above this are flagged in the report.
    pub safety: f64,
    /// Largest admissible max |φ₀| over the grid nodes.
    pub scale_cap: f64,
    pub grid: Option<GridSpec>,
    pub jet_order: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            truncation: 8,
            backend: Backend::Grid,
            tol: 1e-12,
            max_iter: 200,
            safety: 0.5,
            scale_cap: 0.25,
            grid: None,
            jet_order: 3,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.truncation < 4 {
            return Err(CrError::Invalid(format!(
                "truncation {} < 4",
                self.truncation
            )));
        }
        if !(self.tol > 0.0) {
            return Err(CrError::Invalid("tolerance must be positive".into()));
        }
        if self.jet_order < 1 {
            return Err(CrError::Invalid("jet order must be at least 1".into()));
        }
        Ok(())
    }

    /// Grid used by the solver: the configured one, else bandwidth 3N+4.
    pub fn grid_spec(&self) -> GridSpec {
        self.grid
            .unwrap_or_else(|| GridSpec::for_bandwidth(3 * self.truncation as usize + 4))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub converged: bool,
    pub diverged: bool,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    /// ψ; one entry on the grid backend, the t^k coefficients on the jet backend.
    pub psi: Vec<FieldJson>,
    pub psi_norm: f64,
    pub kuranishi: Option<Vec<FieldJson>>,
    pub kuranishi_norm: Option<f64>,
    /// ∫𝒪(ψ+φ₀)θ∧dθ/π².
    pub obstruction_integral: Option<f64>,
    pub contraction_ratio: f64,
    pub contraction_within_safety: bool,
    pub variant: String,
    pub backend: Backend,
    pub truncation: u32,
    pub tol: f64,
}

/// Solver state carried between the solve and the Kuranishi evaluation (grid backend).
#[derive(Clone, Debug)]
pub struct GridSolution {
    pub psi: Field,
    pub obstruction: Field,
    pub integral: f64,
    pub report: SolveReport,
}

/// Inner product ⟨u,v⟩/π² of floating-point fields.
pub fn inner_c64(u: &Field, v: &Field) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for ((p, q, m), c) in u.iter() {
        let d = v.get(p, q, m);
        if d != Complex64::new(0.0, 0.0) {
            s += c * d.conj() * rational_to_f64(&basis_norm_sqr(p, q, m));
        }
    }
    s
}

/// Obstruction data of φ on a grid: the degree-≤N projection of Õ and ∫Õ/π².
pub struct GridObstruction {
    pub structure: DeformedStructure<GridFn>,
    pub projected: Field,
    pub integral: Complex64,
}

pub fn grid_obstruction(phi: &Field, alg: &GridAlgebra, n: u32) -> Result<GridObstruction> {
    let g = alg.from_field(phi)?;
    let structure = deformed_structure(alg, &g)?;
    if !structure.o_tilde.is_finite() {
        return Err(CrError::Invalid("non-finite obstruction density".into()));
    }
    let projected = alg.basis.project(&structure.o_tilde, n as usize);
    let integral = alg.basis.integrate(&structure.o_tilde);
    Ok(GridObstruction {
        structure,
        projected,
        integral,
    })
}

fn check_d0perp(phi: &Field) -> Result<()> {
    let (ok, r) = linear::membership(SpaceTag::D0perp, phi);
    if !ok {
        return Err(CrError::NotInSpace {
            space: "D0perp".into(),
            residual: r,
        });
    }
    Ok(())
}

fn check_scale(phi: &Field, alg: &GridAlgebra, cap: f64) -> Result<()> {
    let m = alg.from_field(phi)?.max_abs();
    if m > cap {
        return Err(CrError::Invalid(format!(
            "max |phi0| = {m:e} exceeds the scale cap {cap:e}"
        )));
    }
    Ok(())
}

/// Frozen-linearization iteration f ← f − P_Im 𝒪(ℒ⁻¹f + φ₀) on the grid, started at `init`.
pub fn partial_solve_grid(
    phi0: &Field,
    cfg: &SolveConfig,
    init: Option<&Field>,
) -> Result<GridSolution> {
    cfg.validate()?;
    check_d0perp(phi0)?;
    let n = cfg.truncation;
    let phi0 = phi0.with_truncation(n);
    let alg = GridAlgebra::new(cfg.grid_spec());
    check_scale(&phi0, &alg, cfg.scale_cap)?;

    let residual_of = |f: &Field| -> Result<(Field, GridObstruction, Field)> {
        let psi = l_inverse(f, n);
        let ob = grid_obstruction(&psi.add(&phi0), &alg, n)?;
        let fval = project(SpaceTag::ImDO, &ob.projected);
        Ok((psi, ob, fval))
    };

    let mut f = init
        .map(|f| project(SpaceTag::ImDO, f))
        .unwrap_or_else(|| HarmonicField::zero(n));
    let mut history = Vec::new();
    let mut ratio: f64 = 0.0;
    let mut prev_step: Option<f64> = None;
    let mut increases = 0;
    let mut diverged = false;
    let mut converged = false;
    let mut last;
    loop {
        let (psi, ob, fval) = residual_of(&f)?;
        let r = fval.l2_norm();
        if let Some(&prev) = history.last() {
            if r > prev {
                increases += 1;
            } else {
                increases = 0;
            }
        }
        history.push(r);
        last = (psi, ob);
        if r <= cfg.tol {
            converged = true;
            break;
        }
        if increases >= 5 || !r.is_finite() {
            diverged = true;
            break;
        }
        if history.len() >= cfg.max_iter {
            break;
        }
        let step = fval.l2_norm();
        if let Some(ps) = prev_step {
            if ps > 0.0 {
                ratio = ratio.max(step / ps);
            }
        }
        prev_step = Some(step);
        f = f.sub(&fval);
    }
    let (psi, ob) = last;
    let kur = project(SpaceTag::H2O, &ob.projected);
    let report = SolveReport {
        converged,
        diverged,
        iterations: history.len(),
        residual_history: history,
        psi: vec![field_to_json_f64(&psi)],
        psi_norm: psi.l2_norm(),
        kuranishi: Some(vec![field_to_json_f64(&kur)]),
        kuranishi_norm: Some(kur.l2_norm()),
        obstruction_integral: Some(ob.integral.re),
        contraction_ratio: ratio,
        contraction_within_safety: ratio <= cfg.safety,
        variant: "frozen-linearization".into(),
        backend: Backend::Grid,
        truncation: n,
        tol: cfg.tol,
    };
    Ok(GridSolution {
        psi,
        obstruction: kur,
        integral: ob.integral.re,
        report,
    })
}

/// Formal solve for φ₀(t) = t·φ₀: each pass fixes one more order of ψ(t). The residual is the
/// largest L² norm among the t^k coefficients of P_Im 𝒪, and is exactly zero on convergence.
pub fn partial_solve_jet(
    phi0: &HarmonicField<G>,
    cfg: &SolveConfig,
) -> Result<(Vec<HarmonicField<G>>, SolveReport)> {
    cfg.validate()?;
    if !linear::is_member_exact(SpaceTag::D0perp, phi0) {
        return Err(CrError::NotInSpace {
            space: "D0perp".into(),
            residual: phi0.sub(&project(SpaceTag::D0perp, phi0)).l2_norm(),
        });
    }
    let n = cfg.truncation;
    let k = cfg.jet_order;
    let alg = JetAlgebra::<G>::new(k);
    let phi0p = phi0.with_truncation(n).to_poly();
    let mut psi: Vec<HarmonicField<G>> = vec![HarmonicField::zero(n); k + 1];
    let mut history = Vec::new();
    let mut converged = false;
    let mut last_ob: Vec<PolyFn> = Vec::new();
    for _ in 0..=k {
        let mut cs: Vec<PolyFn> = psi.iter().map(|f| f.to_poly()).collect();
        cs[1] = cs[1].add(&phi0p);
        let ds = deformed_structure(&alg, &Jet::from_coeffs(k, cs))?;
        let residuals: Vec<HarmonicField<G>> = ds
            .o_tilde
            .coeffs
            .iter()
            .map(|c| project(SpaceTag::ImDO, &project_by_inner_products(c, n)))
            .collect();
        let r = residuals.iter().map(|f| f.l2_norm()).fold(0.0, f64::max);
        history.push(r);
        last_ob = ds.o_tilde.coeffs.clone();
        if residuals.iter().all(|f| f.is_zero()) {
            converged = true;
            break;
        }
        for (slot, f) in psi.iter_mut().zip(&residuals) {
            *slot = slot.sub(&l_inverse(f, n));
        }
    }
    let kur: Vec<HarmonicField<G>> = last_ob
        .iter()
        .map(|c| project(SpaceTag::H2O, &project_by_inner_products(c, n)))
        .collect();
    let integral: f64 = last_ob
        .iter()
        .map(|c| rational_to_f64(&c.integrate().re))
        .sum();
    let report = SolveReport {
        converged,
        diverged: false,
        iterations: history.len(),
        residual_history: history,
        psi: psi.iter().map(field_to_json).collect(),
        psi_norm: psi.iter().map(|f| f.l2_norm()).fold(0.0, f64::max),
        kuranishi_norm: Some(kur.iter().map(|f| f.l2_norm()).fold(0.0, f64::max)),
        kuranishi: Some(kur.iter().map(field_to_json).collect()),
        obstruction_integral: Some(integral),
        contraction_ratio: 0.0,
        contraction_within_safety: true,
        variant: "frozen-linearization, formal in t".into(),
        backend: Backend::Jet,
        truncation: n,
        tol: cfg.tol,
    };
    Ok((psi, report))
}

/// Ψ(φ₀) = P_{H²} 𝒪(ψ+φ₀) after a converged grid solve.
pub fn kuranishi(phi0: &Field, cfg: &SolveConfig) -> Result<GridSolution> {
    let sol = partial_solve_grid(phi0, cfg, None)?;
    if !sol.report.converged {
        return Err(CrError::Diverged {
            iterations: sol.report.iterations,
            residual: sol
                .report
                .residual_history
                .last()
                .copied()
                .unwrap_or(f64::NAN),
        });
    }
    Ok(sol)
}

/// Per-block weight of the second-order quadratic form.
#[derive(Clone, Debug, Serialize)]
pub struct QuadraticForm {
    /// Σ λ(p,q)(p−q+4)‖u_{p,q}‖²/π² with the operator's own block scalars.
    pub value: String,
    pub value_f64: f64,
    /// Same sum with the quoted H_{p,1} weight (1/3)(p+3)²(5p+8).
    pub quoted_value: String,
    /// ∫D𝒬(u)·i·conj(∇₀u)/π² evaluated directly from D𝒬 in harmonic form.
    pub pairing: String,
    pub pairing_agrees: bool,
    /// ‖u‖₃²/π².
    pub fs3_sqr: f64,
    pub ratio_to_fs3: f64,
}

pub fn rigidity_quadratic_form(u: &HarmonicField<G>) -> Result<QuadraticForm> {
    if !linear::is_member_exact(SpaceTag::D0perp, u) {
        return Err(CrError::NotInSpace {
            space: "D0perp".into(),
            residual: u.sub(&project(SpaceTag::D0perp, u)).l2_norm(),
        });
    }
    let mut value = BigRational::zero();
    let mut quoted = BigRational::zero();
    for ((p, q), n) in u.block_norms_exact() {
        value += linear::quadratic_form_weight(p, q).expect("q ≤ 1") * &n;
        quoted += linear::quoted::quadratic_form_weight(p, q).expect("q ≤ 1") * &n;
    }
    let n0 = u.map_blocks(|p, q| G::i() * G::from_int(linear::nabla0_weight(p, q)));
    let pairing = linear::dq_apply(u).inner_exact(&n0.scale(&-G::i()));
    let fs3 = fs_norm(u, 3.0).powi(2) / std::f64::consts::PI.powi(2);
    let vf = rational_to_f64(&value);
    Ok(QuadraticForm {
        value: format_rational(&value),
        value_f64: vf,
        quoted_value: format_rational(&quoted),
        pairing_agrees: pairing == G::real(value.clone()),
        pairing: pairing.to_string(),
        fs3_sqr: fs3,
        ratio_to_fs3: if fs3 > 0.0 { vf / fs3 } else { 0.0 },
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SecondOrder {
    /// t² coefficient of ∫Õ/π² for φ = t·u + (t²/2)·ü.
    pub value: String,
    /// Same with ü = 0.
    pub value_without_uddot: String,
    pub independent_of_uddot: bool,
    pub imaginary_part_zero: bool,
    pub quadratic_form: QuadraticForm,
}

fn t2_integral(u: &HarmonicField<G>, uddot: Option<&HarmonicField<G>>) -> Result<G> {
    let alg = JetAlgebra::<G>::new(2);
    let mut cs = vec![PolyFn::zero(), u.to_poly()];
    cs.push(
        uddot
            .map(|f| f.to_poly().scale(&G::frac(1, 2)))
            .unwrap_or_else(PolyFn::zero),
    );
    let ds = deformed_structure(&alg, &Jet::from_coeffs(2, cs))?;
    Ok(ds.o_tilde.coeff(2).integrate())
}

pub fn second_order_obstruction(
    u: &HarmonicField<G>,
    uddot: Option<&HarmonicField<G>>,
) -> Result<SecondOrder> {
    let qf = rigidity_quadratic_form(u)?;
    let with = t2_integral(u, uddot)?;
    let without = if uddot.is_some() {
        t2_integral(u, None)?
    } else {
        with.clone()
    };
    Ok(SecondOrder {
        value: format_rational(&with.re),
        value_without_uddot: format_rational(&without.re),
        independent_of_uddot: with == without,
        imaginary_part_zero: with.im.is_zero(),
        quadratic_form: qf,
    })
}

/// Exact t² coefficient of ∫Õ/π².
pub fn second_order_value(u: &HarmonicField<G>, uddot: Option<&HarmonicField<G>>) -> Result<G> {
    t2_integral(u, uddot)
}

#[derive(Clone, Debug, Serialize)]
pub struct RigidityReport {
    /// ‖P_Im 𝒪(φ)‖ (degree ≤ N).
    pub image_residual: f64,
    /// ∫𝒪(φ)θ∧dθ/π².
    pub obstruction_integral: f64,
    pub eps_fs3: f64,
    pub p1_ratio: f64,
    /// Re⟨(1+Δ_b)⁻¹Z₁²(P_Im𝒪(φ) − ℒP₁φ), P₁φ⟩/π².
    pub pairing: f64,
    pub not_obstruction_flat: bool,
    pub tol: f64,
}

/// φ ∈ 𝔇′_BE ⊕ 𝔇₀⊥ on the grid.
pub fn rigidity_certificate(phi: &Field, cfg: &SolveConfig) -> Result<RigidityReport> {
    cfg.validate()?;
    let n = cfg.truncation;
    let phi = phi.with_truncation(n);
    let p1 = project(SpaceTag::DBEprime, &phi);
    let p2 = project(SpaceTag::D0perp, &phi);
    let r = phi.sub(&p1).sub(&p2).l2_norm();
    if r > 1e-12 * (1.0 + phi.l2_norm()) {
        return Err(CrError::NotInSpace {
            space: "DBEprime + D0perp".into(),
            residual: r,
        });
    }
    let alg = GridAlgebra::new(cfg.grid_spec());
    let ob = grid_obstruction(&phi, &alg, n)?;
    let pim = project(SpaceTag::ImDO, &ob.projected);
    let a = pim.l2_norm();
    let b = ob.integral.re;
    let eps = fs_norm(&phi, 3.0);
    let rem = pim.sub(&l_apply(&p1));
    let pairing = inner_c64(&resolvent_sublaplacian(&rem.z1().z1()), &p1).re;
    Ok(RigidityReport {
        image_residual: a,
        obstruction_integral: b,
        eps_fs3: eps,
        p1_ratio: if eps > 0.0 {
            fs_norm(&p1, 3.0) / eps
        } else {
            0.0
        },
        pairing,
        not_obstruction_flat: a > cfg.tol || b.abs() > cfg.tol,
        tol: cfg.tol,
    })
}

/// Grid evaluation of the obstruction integral, for scaling studies.
pub fn obstruction_integral_grid(phi: &Field, spec: GridSpec) -> Result<f64> {
    let alg = GridAlgebra::new(spec);
    let g = alg.from_field(phi)?;
    let ds = deformed_structure(&alg, &g)?;
    Ok(alg.basis.integrate(&ds.o_tilde).re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::unit_basis;

    #[test]
    fn quadratic_form_values() {
        let u = unit_basis(8, 0, 0, 0);
        let q = rigidity_quadratic_form(&u).unwrap();
        // ‖1‖² = 4π²
        assert_eq!(q.value, "192");
        assert!(q.pairing_agrees);
        let v = unit_basis(8, 0, 1, 0);
        let q = rigidity_quadratic_form(&v).unwrap();
        assert!(q.pairing_agrees);
        assert!(q.value_f64 > 0.0);
        assert!(rigidity_quadratic_form(&unit_basis(8, 0, 4, 0)).is_err());
    }

    #[test]
    fn second_order_matches_form() {
        for (p, q, m) in [(0, 0, 0), (2, 0, 1), (1, 1, 0)] {
            let u = unit_basis(8, p, q, m);
            let mut ud = HarmonicField::zero(8);
            ud.set(0, 4, -1, G::from_ints(1, 2));
            ud.set(1, 0, 0, G::frac(1, 3));
            let s = second_order_obstruction(&u, Some(&ud)).unwrap();
            assert!(s.independent_of_uddot && s.imaginary_part_zero);
            assert_eq!(s.value, s.quadratic_form.value, "({p},{q},{m})");
        }
    }

    #[test]
    fn zero_deformation() {
        let cfg = SolveConfig {
            grid: Some(GridSpec::for_bandwidth(16)),
            ..Default::default()
        };
        let sol = partial_solve_grid(&HarmonicField::zero(8), &cfg, None).unwrap();
        assert!(sol.report.converged);
        assert_eq!(sol.report.iterations, 1);
        assert_eq!(sol.psi.l2_norm(), 0.0);
        let (psi, rep) = partial_solve_jet(
            &HarmonicField::zero(8),
            &SolveConfig {
                jet_order: 2,
                ..cfg
            },
        )
        .unwrap();
        assert!(rep.converged && psi.iter().all(|f| f.is_zero()));
    }

    #[test]
    fn rejects_outside_d0perp() {
        let cfg = SolveConfig::default();
        let u = unit_basis(8, 0, 4, 0).to_c64();
        assert!(partial_solve_grid(&u, &cfg, None).is_err());
        let big = unit_basis(8, 0, 0, 0).to_c64();
        assert!(partial_solve_grid(&big, &cfg, None).is_err());
    }
}
