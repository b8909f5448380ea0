//! Quadrature grid in Hopf coordinates z = cos η e^{iξ₁}, w = sin η e^{iξ₂}.
//!
//! Gauss–Legendre in x = cos 2η (the volume is uniform in x) and the trapezoid rule in ξ₁, ξ₂.
//! Functions are projected onto e_{p,q,m} by FFT in ξ followed by quadrature in η against the
//! real η-profile of each basis vector.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::algebra::FnAlgebra;
use crate::error::{CrError, Result};
use crate::harmonic::{basis_norm_sqr, basis_vector, ladder, HarmonicField};
use crate::poly::Poly;
use crate::scalar::{rational_to_f64, GaussianRational, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct GridSpec {
    pub n_eta: usize,
    pub n_xi: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            n_eta: 16,
            n_xi: 33,
        }
    }
}

impl GridSpec {
    pub fn new(n_eta: usize, n_xi: usize) -> Result<Self> {
        if n_eta == 0 || n_xi < 3 {
            return Err(CrError::Invalid(format!(
                "grid too small: n_eta={n_eta}, n_xi={n_xi}"
            )));
        }
        Ok(GridSpec { n_eta, n_xi })
    }

    /// Largest p+q whose basis vectors are resolved without aliasing.
    pub fn bandwidth(&self) -> usize {
        (2 * self.n_eta - 1).min((self.n_xi - 1) / 2)
    }

    /// Smallest grid with the given bandwidth.
    pub fn for_bandwidth(l: usize) -> Self {
        GridSpec {
            n_eta: (l + 2) / 2,
            n_xi: 2 * l + 1,
        }
    }

    pub fn len(&self) -> usize {
        self.n_eta * self.n_xi * self.n_xi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { t } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (t * pn - pm) / (t * t - 1.0);
            let dt = pn / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -t;
        x[n - 1 - i] = t;
        let wi = 2.0 / ((1.0 - t * t) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Basis vector data resolved on a grid.
struct Mode {
    p: u32,
    q: u32,
    m: i32,
    norm: f64,
    profile: Vec<f64>,
}

/// Quadrature data and η-profiles for one grid spec.
pub struct GridBasis {
    pub spec: GridSpec,
    pub x: Vec<f64>,
    pub weights: Vec<f64>,
    cos_eta: Vec<f64>,
    sin_eta: Vec<f64>,
    /// (j, k) → modes of that torus weight with p+q ≤ bandwidth.
    modes: HashMap<(i32, i32), Vec<Mode>>,
    weight_list: Vec<(i32, i32)>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for GridBasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GridBasis({:?})", self.spec)
    }
}

/// Jacobi polynomial P_n^{(α,β)}(x) by the three-term recurrence.
pub fn jacobi(n: usize, alpha: f64, beta: f64, x: f64) -> f64 {
    let mut p0 = 1.0;
    if n == 0 {
        return p0;
    }
    let mut p1 = (alpha + 1.0) + (alpha + beta + 2.0) * (x - 1.0) / 2.0;
    for k in 2..=n {
        let k = k as f64;
        let s = 2.0 * k + alpha + beta;
        let a = 2.0 * k * (k + alpha + beta) * (s - 2.0);
        let b = (s - 1.0) * (s * (s - 2.0) * x + alpha * alpha - beta * beta);
        let c = 2.0 * (k + alpha - 1.0) * (k + beta - 1.0) * s;
        let p2 = (b * p1 - c * p0) / a;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// η-profile of e_{p,q,m}: cos^{|j|}η sin^{|k|}η times a multiple of P_n^{(|k|,|j|)}(cos 2η).
/// The multiple is fixed from the exact coefficients at η = 0, avoiding the cancellation
/// that summing the monomial expansion suffers at high degree.
fn profile_of(
    e: &Poly<GaussianRational>,
    p: u32,
    q: u32,
    m: i32,
    x: &[f64],
    c: &[f64],
    s: &[f64],
) -> Vec<f64> {
    let (j, k) = (m, p as i32 - m - q as i32);
    let (aj, ak) = (j.unsigned_abs(), k.unsigned_abs());
    let n = ((p + q - aj - ak) / 2) as usize;
    let lead: f64 = e
        .terms()
        .filter(|(x, _)| x[1].min(x[3]) == 0)
        .map(|(_, kf)| rational_to_f64(&kf.re))
        .sum();
    let (alpha, beta) = (ak as f64, aj as f64);
    let mut binom = 1.0;
    for i in 1..=n {
        binom = binom * (n as f64 + alpha - (i as f64 - 1.0)) / i as f64;
    }
    let scale = lead / binom;
    x.iter()
        .zip(c.iter().zip(s))
        .map(|(&xi, (&ci, &si))| {
            scale * ci.powi(aj as i32) * si.powi(ak as i32) * jacobi(n, alpha, beta, xi)
        })
        .collect()
}

/// Profile by direct summation of the monomial expansion (reference for tests).
#[cfg(test)]
fn profile_direct(e: &Poly<GaussianRational>, c: &[f64], s: &[f64]) -> Vec<f64> {
    let terms: Vec<([u32; 4], f64)> = e
        .terms()
        .map(|(x, k)| (x, rational_to_f64(&k.re)))
        .collect();
    c.iter()
        .zip(s)
        .map(|(&ci, &si)| {
            terms
                .iter()
                .map(|(x, k)| k * ci.powi((x[0] + x[2]) as i32) * si.powi((x[1] + x[3]) as i32))
                .sum()
        })
        .collect()
}

impl GridBasis {
    fn build(spec: GridSpec) -> Self {
        let (x, weights) = gauss_legendre(spec.n_eta);
        let cos_eta: Vec<f64> = x.iter().map(|&t| ((1.0 + t) / 2.0).sqrt()).collect();
        let sin_eta: Vec<f64> = x.iter().map(|&t| ((1.0 - t) / 2.0).sqrt()).collect();
        let l = spec.bandwidth() as u32;
        let mut idx = Vec::new();
        for d in 0..=l {
            for p in 0..=d {
                let q = d - p;
                for m in -(q as i32)..=p as i32 {
                    idx.push((p, q, m));
                }
            }
        }
        let built: Vec<Mode> = idx
            .par_iter()
            .map(|&(p, q, m)| {
                let e = basis_vector(p, q, m);
                Mode {
                    p,
                    q,
                    m,
                    norm: rational_to_f64(&basis_norm_sqr(p, q, m)),
                    profile: profile_of(&e, p, q, m, &x, &cos_eta, &sin_eta),
                }
            })
            .collect();
        let mut modes: HashMap<(i32, i32), Vec<Mode>> = HashMap::new();
        for md in built {
            let wt = (md.m, md.p as i32 - md.m - md.q as i32);
            modes.entry(wt).or_default().push(md);
        }
        let mut weight_list: Vec<(i32, i32)> = modes.keys().copied().collect();
        weight_list.sort();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(spec.n_xi);
        let ifft = planner.plan_fft_inverse(spec.n_xi);
        GridBasis {
            spec,
            x,
            weights,
            cos_eta,
            sin_eta,
            modes,
            weight_list,
            fft,
            ifft,
        }
    }

    /// Shared, lazily built basis for a spec.
    pub fn get(spec: GridSpec) -> Arc<GridBasis> {
        static CACHE: OnceLock<Mutex<HashMap<GridSpec, Arc<GridBasis>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(b) = cache.lock().unwrap().get(&spec) {
            return b.clone();
        }
        let b = Arc::new(GridBasis::build(spec));
        cache.lock().unwrap().entry(spec).or_insert(b).clone()
    }

    fn n(&self) -> usize {
        self.spec.n_xi
    }

    fn freq_index(&self, m: i32) -> usize {
        m.rem_euclid(self.n() as i32) as usize
    }

    /// (z, w) at node (i, j, k).
    pub fn node(&self, i: usize, j: usize, k: usize) -> (Complex64, Complex64) {
        let n = self.n() as f64;
        let (x1, x2) = (2.0 * PI * j as f64 / n, 2.0 * PI * k as f64 / n);
        (
            Complex64::from_polar(self.cos_eta[i], x1),
            Complex64::from_polar(self.sin_eta[i], x2),
        )
    }

    /// Per-layer 2-d DFT: c[i][(a,b)] = n⁻² Σ f e^{−i(aξ₁+bξ₂)}.
    fn forward(&self, values: &[Complex64]) -> Vec<Vec<Complex64>> {
        let n = self.n();
        let scale = 1.0 / (n * n) as f64;
        values
            .par_chunks(n * n)
            .map(|layer| {
                let mut a = layer.to_vec();
                for row in a.chunks_mut(n) {
                    self.fft.process(row);
                }
                let mut col = vec![Complex64::new(0.0, 0.0); n];
                for k in 0..n {
                    for j in 0..n {
                        col[j] = a[j * n + k];
                    }
                    self.fft.process(&mut col);
                    for j in 0..n {
                        a[j * n + k] = col[j] * scale;
                    }
                }
                a
            })
            .collect()
    }

    fn inverse(&self, layers: Vec<Vec<Complex64>>) -> Vec<Complex64> {
        let n = self.n();
        let out: Vec<Vec<Complex64>> = layers
            .into_par_iter()
            .map(|mut a| {
                for row in a.chunks_mut(n) {
                    self.ifft.process(row);
                }
                let mut col = vec![Complex64::new(0.0, 0.0); n];
                for k in 0..n {
                    for j in 0..n {
                        col[j] = a[j * n + k];
                    }
                    self.ifft.process(&mut col);
                    for j in 0..n {
                        a[j * n + k] = col[j];
                    }
                }
                a
            })
            .collect();
        out.concat()
    }

    /// Coefficients of g on e_{p,q,m}, p+q ≤ n.
    pub fn project(&self, g: &GridFn, n: usize) -> HarmonicField<Complex64> {
        let spec = self.forward(&g.values);
        let mut out = HarmonicField::zero(n as u32);
        for wt in &self.weight_list {
            let (a, b) = (self.freq_index(wt.0), self.freq_index(wt.1));
            let col: Vec<Complex64> = spec.iter().map(|layer| layer[a * self.n() + b]).collect();
            for md in &self.modes[wt] {
                if (md.p + md.q) as usize > n {
                    continue;
                }
                let mut s = Complex64::new(0.0, 0.0);
                for i in 0..self.spec.n_eta {
                    s += col[i] * (self.weights[i] * md.profile[i]);
                }
                out.set(md.p, md.q, md.m, s * (2.0 / md.norm));
            }
        }
        out
    }

    /// Values of Σ c·e_{p,q,m}.
    pub fn evaluate(&self, f: &HarmonicField<Complex64>) -> Result<GridFn> {
        let l = self.spec.bandwidth() as u32;
        if f.max_degree() > l {
            return Err(CrError::Aliasing {
                degree: f.max_degree() as usize,
                bandwidth: l as usize,
            });
        }
        let n = self.n();
        let mut layers = vec![vec![Complex64::new(0.0, 0.0); n * n]; self.spec.n_eta];
        for ((p, q, m), c) in f.iter() {
            let (j, k) = (m, p as i32 - m - q as i32);
            let md = self.modes[&(j, k)]
                .iter()
                .find(|md| md.p == p && md.q == q)
                .expect("mode in range");
            let slot = self.freq_index(j) * n + self.freq_index(k);
            for (i, layer) in layers.iter_mut().enumerate() {
                layer[slot] += *c * md.profile[i];
            }
        }
        Ok(GridFn {
            spec: self.spec,
            values: self.inverse(layers),
        })
    }

    /// ∫ g θ∧dθ / π².
    pub fn integrate(&self, g: &GridFn) -> Complex64 {
        let n = self.n();
        let mut s = Complex64::new(0.0, 0.0);
        for (i, layer) in g.values.chunks(n * n).enumerate() {
            let mut l = Complex64::new(0.0, 0.0);
            for v in layer {
                l += v;
            }
            s += l * self.weights[i];
        }
        s * (2.0 / (n * n) as f64)
    }

    /// Direct evaluation of a polynomial at the nodes. Fails above the bandwidth.
    pub fn sample<S: Scalar>(&self, u: &Poly<S>) -> Result<GridFn> {
        let l = self.spec.bandwidth();
        if u.degree() > l {
            return Err(CrError::Aliasing {
                degree: u.degree(),
                bandwidth: l,
            });
        }
        Ok(self.sample_unchecked(u))
    }

    pub fn sample_unchecked<S: Scalar>(&self, u: &Poly<S>) -> GridFn {
        let n = self.n();
        let uc = u.to_c64();
        let values: Vec<Complex64> = (0..self.spec.len())
            .into_par_iter()
            .map(|idx| {
                let (i, j, k) = (idx / (n * n), (idx / n) % n, idx % n);
                let (z, w) = self.node(i, j, k);
                uc.eval(z, w)
            })
            .collect();
        GridFn {
            spec: self.spec,
            values,
        }
    }
}

/// Function values at the grid nodes, laid out as [η][ξ₁][ξ₂].
#[derive(Clone, Debug, PartialEq)]
pub struct GridFn {
    pub spec: GridSpec,
    pub values: Vec<Complex64>,
}

impl GridFn {
    pub fn constant(spec: GridSpec, c: Complex64) -> Self {
        GridFn {
            spec,
            values: vec![c; spec.len()],
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.values
            .iter()
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }

    fn zip(&self, o: &GridFn, f: impl Fn(Complex64, Complex64) -> Complex64 + Sync) -> GridFn {
        GridFn {
            spec: self.spec,
            values: self
                .values
                .iter()
                .zip(&o.values)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    fn map(&self, f: impl Fn(Complex64) -> Complex64) -> GridFn {
        GridFn {
            spec: self.spec,
            values: self.values.iter().map(|a| f(*a)).collect(),
        }
    }
}

pub fn grid_sample<S: Scalar>(u: &Poly<S>, spec: GridSpec) -> Result<GridFn> {
    GridBasis::get(spec).sample(u)
}

pub fn grid_project(g: &GridFn, n: usize) -> Result<HarmonicField<Complex64>> {
    let l = g.spec.bandwidth();
    if n > l {
        return Err(CrError::Aliasing {
            degree: n,
            bandwidth: l,
        });
    }
    Ok(GridBasis::get(g.spec).project(g, n))
}

/// Spectral backend. Derivatives project onto p+q ≤ bandwidth, apply the exact ladder
/// constants and evaluate; products are pointwise.
#[derive(Clone, Debug)]
pub struct GridAlgebra {
    pub basis: Arc<GridBasis>,
}

impl GridAlgebra {
    pub fn new(spec: GridSpec) -> Self {
        GridAlgebra {
            basis: GridBasis::get(spec),
        }
    }

    pub fn spec(&self) -> GridSpec {
        self.basis.spec
    }

    pub fn from_field(&self, f: &HarmonicField<Complex64>) -> Result<GridFn> {
        self.basis.evaluate(f)
    }

    fn bandwidth(&self) -> usize {
        self.basis.spec.bandwidth()
    }

    fn apply_ladder(&self, f: &HarmonicField<Complex64>, lower: bool) -> HarmonicField<Complex64> {
        let l = self.bandwidth() as u32;
        let mut out = HarmonicField::zero(l);
        for ((p, q, m), c) in f.iter() {
            let (a, b) = ladder(p, q, m);
            if lower && p > 0 {
                out.add_to(p - 1, q + 1, m - 1, *c * a.to_c64());
            } else if !lower && q > 0 {
                out.add_to(p + 1, q - 1, m + 1, *c * b.to_c64());
            }
        }
        out
    }
}

impl FnAlgebra for GridAlgebra {
    type F = GridFn;

    fn constant(&self, c: &GaussianRational) -> GridFn {
        GridFn::constant(self.spec(), c.to_c64())
    }
    fn add(&self, a: &GridFn, b: &GridFn) -> GridFn {
        a.zip(b, |x, y| x + y)
    }
    fn sub(&self, a: &GridFn, b: &GridFn) -> GridFn {
        a.zip(b, |x, y| x - y)
    }
    fn mul(&self, a: &GridFn, b: &GridFn) -> GridFn {
        a.zip(b, |x, y| x * y)
    }
    fn scale(&self, a: &GridFn, c: &GaussianRational) -> GridFn {
        let c = c.to_c64();
        a.map(|x| x * c)
    }
    fn conj(&self, a: &GridFn) -> GridFn {
        a.map(|x| x.conj())
    }
    fn z1(&self, a: &GridFn) -> GridFn {
        self.z1_pair(a).0
    }
    fn z1bar(&self, a: &GridFn) -> GridFn {
        self.z1_pair(a).1
    }
    fn z1_pair(&self, a: &GridFn) -> (GridFn, GridFn) {
        let f = self.basis.project(a, self.bandwidth());
        let lo = self.apply_ladder(&f, true);
        let hi = self.apply_ladder(&f, false);
        (
            self.basis.evaluate(&lo).expect("in band"),
            self.basis.evaluate(&hi).expect("in band"),
        )
    }
    fn reeb(&self, a: &GridFn) -> GridFn {
        let f = self.basis.project(a, self.bandwidth());
        self.basis.evaluate(&f.reeb()).expect("in band")
    }
    /// Pointwise inverse of h = 1 − |φ|²; rejects nodes where h ≤ 0.
    fn recip(&self, a: &GridFn) -> Result<GridFn> {
        let n = self.spec().n_xi;
        for (idx, v) in a.values.iter().enumerate() {
            if !(v.re > 0.0) || !v.re.is_finite() {
                return Err(CrError::NotStrictlyPseudoconvex {
                    i: idx / (n * n),
                    j: (idx / n) % n,
                    k: idx % n,
                    modulus: (1.0 - v.re).max(0.0).sqrt(),
                });
            }
        }
        Ok(a.map(|x| 1.0 / x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::to_harmonic;
    use crate::poly::PolyFn;

    #[test]
    fn jacobi_profiles_match_direct_sum() {
        let (x, _) = gauss_legendre(7);
        let c: Vec<f64> = x.iter().map(|&t| ((1.0 + t) / 2.0).sqrt()).collect();
        let s: Vec<f64> = x.iter().map(|&t| ((1.0 - t) / 2.0).sqrt()).collect();
        for (p, q, m) in [
            (0, 0, 0),
            (1, 1, 0),
            (3, 2, -1),
            (2, 4, 2),
            (5, 0, 1),
            (0, 6, -3),
        ] {
            let e = basis_vector(p, q, m);
            let a = profile_of(&e, p, q, m, &x, &c, &s);
            let b = profile_direct(&e, &c, &s);
            for (u, v) in a.iter().zip(&b) {
                assert!(
                    (u - v).abs() < 1e-10 * (1.0 + v.abs()),
                    "({p},{q},{m}): {u} vs {v}"
                );
            }
        }
    }

    #[test]
    fn quadrature_rule() {
        let (x, w) = gauss_legendre(5);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let m8: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((m8 - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn integrals_match_exact() {
        let b = GridBasis::get(GridSpec::default());
        let one = b.sample(&PolyFn::one()).unwrap();
        assert!((b.integrate(&one) - Complex64::new(4.0, 0.0)).norm() < 1e-13);
        let zz = b.sample(&PolyFn::z().mul(&PolyFn::zbar())).unwrap();
        assert!((b.integrate(&zz) - Complex64::new(2.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn project_z() {
        let spec = GridSpec::default();
        let f = grid_project(&grid_sample(&PolyFn::z(), spec).unwrap(), 10).unwrap();
        for ((p, q, m), c) in f.iter() {
            let expect = if (p, q, m) == (1, 0, 1) { 1.0 } else { 0.0 };
            assert!(
                (c - Complex64::new(expect, 0.0)).norm() < 1e-12,
                "{p} {q} {m} {c}"
            );
        }
        assert!(grid_sample(
            &PolyFn::monomial([20, 0, 0, 0], GaussianRational::from_int(1)),
            spec
        )
        .is_err());
    }

    #[test]
    fn roundtrip_degree6() {
        let spec = GridSpec::for_bandwidth(12);
        let u = PolyFn::monomial([3, 1, 0, 2], GaussianRational::from_ints(1, -2)).add(
            &PolyFn::monomial([0, 2, 2, 1], GaussianRational::frac(3, 7)),
        );
        let exact = to_harmonic(&u).to_c64();
        let g = grid_project(&grid_sample(&u, spec).unwrap(), 12).unwrap();
        let diff = g.sub(&exact.with_truncation(12));
        assert!(diff.iter().all(|(_, c)| c.norm() < 1e-10));
    }

    #[test]
    fn spectral_derivatives() {
        let alg = GridAlgebra::new(GridSpec::default());
        let u =
            PolyFn::monomial([2, 1, 0, 1], GaussianRational::from_ints(2, 1)).add(&PolyFn::zbar());
        let g = alg.basis.sample(&u).unwrap();
        for (lhs, rhs) in [
            (alg.z1(&g), u.z1()),
            (alg.z1bar(&g), u.z1bar()),
            (alg.reeb(&g), u.reeb()),
        ] {
            let r = alg.basis.sample(&rhs).unwrap();
            let err = alg.sub(&lhs, &r).max_abs();
            assert!(err < 1e-12, "{err}");
        }
    }

    #[test]
    fn recip_guard() {
        let alg = GridAlgebra::new(GridSpec::new(4, 9).unwrap());
        let h = alg
            .basis
            .sample(
                &PolyFn::one().sub(
                    &PolyFn::z()
                        .mul(&PolyFn::zbar())
                        .scale(&GaussianRational::from_int(2)),
                ),
            )
            .unwrap();
        match alg.recip(&h) {
            Err(CrError::NotStrictlyPseudoconvex { modulus, .. }) => assert!(modulus >= 1.0),
            other => panic!("expected rejection, got {other:?}"),
        }
    }
}
