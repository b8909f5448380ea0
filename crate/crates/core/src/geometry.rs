//! Pseudohermitian data of the deformed structure Z̃₁ = Z₁ + φZ₁̄ with θ fixed.

use crate::algebra::FnAlgebra;
use crate::error::Result;
use crate::scalar::{ratio, GaussianRational};

fn gq(re: i64, im: i64) -> GaussianRational {
    GaussianRational::from_ints(re, im)
}

fn frac(n: i64, d: i64) -> GaussianRational {
    GaussianRational::frac(n, d)
}

/// i·n/d
fn ifrac(n: i64, d: i64) -> GaussianRational {
    GaussianRational::new(ratio(0, 1), ratio(n, d))
}

/// A tensor component with index type (a, b): a = #lower 1 − #upper 1, b = #lower 1̄ − #upper 1̄.
#[derive(Clone, Debug)]
pub struct Tensor<F> {
    pub val: F,
    pub a: i32,
    pub b: i32,
}

impl<F> Tensor<F> {
    pub fn new(val: F, a: i32, b: i32) -> Self {
        Tensor { val, a, b }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dir {
    Reeb,
    One,
    OneBar,
}

/// Tanaka–Webster connection form ω̃₁¹ = ω₀θ + ω₁θ̃¹ + ω_{1̄}θ̃^{1̄}.
#[derive(Clone, Debug)]
pub struct Connection<F> {
    pub omega0: F,
    pub omega1: F,
    pub omega1bar: F,
}

/// Deformation data plus the connection; supplies Z̃ and ∇̃.
pub struct Frame<'a, A: FnAlgebra> {
    pub alg: &'a A,
    pub phi: A::F,
    pub phibar: A::F,
    pub h: A::F,
    pub h_inv: A::F,
    pub conn: Connection<A::F>,
    conn_bar: Connection<A::F>,
}

impl<'a, A: FnAlgebra> Frame<'a, A> {
    pub fn new(alg: &'a A, phi: &A::F) -> Result<Self> {
        let phibar = alg.conj(phi);
        let mod2 = alg.mul(phi, &phibar);
        let h = alg.sub(&alg.constant(&gq(1, 0)), &mod2);
        let h_inv = alg.recip(&h)?;
        let mut f = Frame {
            alg,
            phi: phi.clone(),
            phibar,
            h,
            h_inv,
            conn: Connection {
                omega0: alg.zero(),
                omega1: alg.zero(),
                omega1bar: alg.zero(),
            },
            conn_bar: Connection {
                omega0: alg.zero(),
                omega1: alg.zero(),
                omega1bar: alg.zero(),
            },
        };
        f.conn = f.connection_components(&mod2);
        f.conn_bar = Connection {
            omega0: alg.conj(&f.conn.omega0),
            omega1: alg.conj(&f.conn.omega1),
            omega1bar: alg.conj(&f.conn.omega1bar),
        };
        Ok(f)
    }

    /// φ,₀ = (T + 4i)φ in the round structure.
    pub fn phi_0(&self) -> A::F {
        let a = self.alg;
        a.add(&a.reeb(&self.phi), &a.scale(&self.phi, &gq(0, 4)))
    }

    /// φ̄,₀ = (T − 4i)φ̄.
    pub fn phibar_0(&self) -> A::F {
        let a = self.alg;
        a.add(&a.reeb(&self.phibar), &a.scale(&self.phibar, &gq(0, -4)))
    }

    /// (Z̃₁f, Z̃₁̄f).
    pub fn zt_pair(&self, f: &A::F) -> (A::F, A::F) {
        let a = self.alg;
        let (z1, z1b) = a.z1_pair(f);
        (
            a.add(&z1, &a.mul(&self.phi, &z1b)),
            a.add(&z1b, &a.mul(&self.phibar, &z1)),
        )
    }

    pub fn zt1(&self, f: &A::F) -> A::F {
        self.zt_pair(f).0
    }

    pub fn zt1bar(&self, f: &A::F) -> A::F {
        self.zt_pair(f).1
    }

    /// Z₁ = (Z̃₁ − φZ̃₁̄)/(1 − |φ|²).
    pub fn recover_z1(&self, f: &A::F) -> A::F {
        let a = self.alg;
        let (t1, t1b) = self.zt_pair(f);
        a.mul(&a.sub(&t1, &a.mul(&self.phi, &t1b)), &self.h_inv)
    }

    fn connection_components(&self, mod2: &A::F) -> Connection<A::F> {
        let a = self.alg;
        let omega0 = a.sub(
            &a.constant(&gq(0, -2)),
            &a.mul(&a.mul(&self.phibar, &self.phi_0()), &self.h_inv),
        );
        let omega1 = a.z1bar(&self.phi);
        let omega1bar = a.neg(&a.add(&a.z1(&self.phibar), &a.mul(&self.zt1bar(mod2), &self.h_inv)));
        Connection {
            omega0,
            omega1,
            omega1bar,
        }
    }

    /// ∇̃ in direction `dir`.
    pub fn nabla(&self, t: &Tensor<A::F>, dir: Dir) -> Tensor<A::F> {
        let a = self.alg;
        let (deriv, w, wb) = match dir {
            Dir::Reeb => (a.reeb(&t.val), &self.conn.omega0, &self.conn_bar.omega0),
            Dir::One => (
                self.zt1(&t.val),
                &self.conn.omega1,
                &self.conn_bar.omega1bar,
            ),
            Dir::OneBar => (
                self.zt1bar(&t.val),
                &self.conn.omega1bar,
                &self.conn_bar.omega1,
            ),
        };
        let mut out = deriv;
        if t.a != 0 {
            out = a.sub(&out, &a.scale(&a.mul(w, &t.val), &gq(t.a as i64, 0)));
        }
        if t.b != 0 {
            out = a.sub(&out, &a.scale(&a.mul(wb, &t.val), &gq(t.b as i64, 0)));
        }
        let (da, db) = match dir {
            Dir::Reeb => (0, 0),
            Dir::One => (1, 0),
            Dir::OneBar => (0, 1),
        };
        Tensor::new(out, t.a + da, t.b + db)
    }

    /// Raises one index with h̃^{11̄}: a lower 1̄ becomes an upper 1 (or lower 1 becomes upper 1̄).
    pub fn raise(&self, t: &Tensor<A::F>) -> Tensor<A::F> {
        Tensor::new(self.alg.mul(&t.val, &self.h_inv), t.a - 1, t.b - 1)
    }

    pub fn lower(&self, t: &Tensor<A::F>) -> Tensor<A::F> {
        Tensor::new(self.alg.mul(&t.val, &self.h), t.a + 1, t.b + 1)
    }

    /// Scalar curvature from the closed-form expression in φ and its round derivatives.
    pub fn scalar_curvature(&self) -> A::F {
        let a = self.alg;
        let (phi, phib) = (&self.phi, &self.phibar);
        let mod2 = a.mul(phi, phib);
        let (z1_phib, _) = a.z1_pair(phib);
        let (_, z1b_phi) = a.z1_pair(phi);
        let (zt1_m, zt1b_m) = self.zt_pair(&mod2);
        let mut s = a.scale(&a.mul(phib, &self.phi_0()), &gq(0, -1));
        s = a.sub(&s, &a.z1(&z1_phib));
        s = a.sub(&s, &a.mul(phi, &a.z1bar(&z1_phib)));
        s = a.sub(&s, &a.z1bar(&z1b_phi));
        s = a.sub(&s, &a.mul(phib, &a.z1(&z1b_phi)));
        let hi2 = a.mul(&self.h_inv, &self.h_inv);
        s = a.sub(&s, &a.mul(&a.mul(&zt1_m, &zt1b_m), &hi2));
        s = a.sub(&s, &a.mul(&self.zt1(&zt1b_m), &self.h_inv));
        a.add_const(&a.mul(&self.h_inv, &s), &gq(2, 0))
    }

    /// Scalar curvature from the structure equation dω̃₁¹ = R̃h̃ θ̃¹∧θ̃^{1̄} mod θ (independent route).
    pub fn scalar_curvature_structure_eq(&self) -> A::F {
        let a = self.alg;
        let c = &self.conn;
        let mut s = a.scale(&a.mul(&self.h, &c.omega0), &gq(0, 1));
        s = a.sub(&s, &self.zt1bar(&c.omega1));
        s = a.add(&s, &self.zt1(&c.omega1bar));
        s = a.add(&s, &a.mul(&c.omega1, &c.omega1bar));
        s = a.sub(&s, &a.mul(&c.omega1bar, &self.conn_bar.omega1bar));
        a.mul(&s, &self.h_inv)
    }
}

/// Everything computed for one deformation.
#[derive(Clone, Debug)]
pub struct DeformedStructure<F> {
    pub h_tilde: F,
    pub h_inv: F,
    pub a11: F,
    /// Ã_{1̄}^{1}
    pub a_bar_up: F,
    pub omega0: F,
    pub omega1: F,
    pub omega1bar: F,
    pub r_tilde: F,
    pub q11: F,
    /// Q̃₁^{1̄}
    pub q1_up: F,
    /// Q̃^{1̄1̄}
    pub q_upup: F,
    pub o_tilde: F,
    /// Integrand i·φ̄,₀·Q̃₁^{1̄}/(1−|φ|²) whose integral equals ∫Õ.
    pub identity_rhs: F,
}

/// Which expression feeds R̃ into the Cartan tensor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CurvatureRoute {
    /// dω̃₁¹ including the ω̃ ∧ dθ̃ terms.
    #[default]
    StructureEquation,
    /// The closed-form expression without the quadratic connection terms.
    ClosedForm,
}

/// Runs the full pipeline on one backend.
pub fn deformed_structure<A: FnAlgebra>(alg: &A, phi: &A::F) -> Result<DeformedStructure<A::F>> {
    deformed_structure_with(alg, phi, CurvatureRoute::default())
}

pub fn deformed_structure_with<A: FnAlgebra>(
    alg: &A,
    phi: &A::F,
    route: CurvatureRoute,
) -> Result<DeformedStructure<A::F>> {
    let fr = Frame::new(alg, phi)?;
    let a = alg;
    let phi_0 = fr.phi_0();
    let phibar_0 = fr.phibar_0();
    let a11 = a.neg(&phi_0);
    let a_bar_up = a.neg(&a.mul(&phibar_0, &fr.h_inv));
    let r = match route {
        CurvatureRoute::StructureEquation => fr.scalar_curvature_structure_eq(),
        CurvatureRoute::ClosedForm => fr.scalar_curvature(),
    };

    let rt = Tensor::new(r.clone(), 0, 0);
    let at = Tensor::new(a11.clone(), 2, 0);
    let d11r = fr.nabla(&fr.nabla(&rt, Dir::One), Dir::One);
    let d0a = fr.nabla(&at, Dir::Reeb);
    let raised = fr.raise(&fr.nabla(&at, Dir::OneBar));
    let d1d1a = fr.nabla(&raised, Dir::One);
    let mut q11 = a.scale(&d11r.val, &frac(-1, 6));
    q11 = a.add(&q11, &a.scale(&a.mul(&r, &a11), &ifrac(-1, 2)));
    q11 = a.add(&q11, &d0a.val);
    q11 = a.add(&q11, &a.scale(&d1d1a.val, &ifrac(2, 3)));

    let q = Tensor::new(q11.clone(), 2, 0);
    let q1_up = fr.raise(&q);
    let q_upup = fr.raise(&q1_up);
    let div2 = fr.nabla(&fr.nabla(&q_upup, Dir::OneBar), Dir::OneBar);
    debug_assert_eq!((div2.a, div2.b), (0, 0));
    let abar11 = a.conj(&a11);
    let o = a.sub(&div2.val, &a.scale(&a.mul(&abar11, &q_upup.val), &gq(0, 1)));

    let identity_rhs = a.scale(&a.mul(&a.mul(&phibar_0, &q1_up.val), &fr.h_inv), &gq(0, 1));
    Ok(DeformedStructure {
        h_tilde: fr.h.clone(),
        h_inv: fr.h_inv.clone(),
        a11,
        a_bar_up,
        omega0: fr.conn.omega0.clone(),
        omega1: fr.conn.omega1.clone(),
        omega1bar: fr.conn.omega1bar.clone(),
        r_tilde: r,
        q11,
        q1_up: q1_up.val,
        q_upup: q_upup.val,
        o_tilde: o,
        identity_rhs,
    })
}
