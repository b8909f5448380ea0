//! Function algebras on S³ that carry the frame derivations. The deformed-geometry pipeline is
//! written once against [`FnAlgebra`] and runs on either backend.

use crate::error::Result;
use crate::scalar::GaussianRational;

pub trait FnAlgebra {
    type F: Clone + Send + Sync;

    fn constant(&self, c: &GaussianRational) -> Self::F;
    fn add(&self, a: &Self::F, b: &Self::F) -> Self::F;
    fn sub(&self, a: &Self::F, b: &Self::F) -> Self::F;
    fn mul(&self, a: &Self::F, b: &Self::F) -> Self::F;
    fn scale(&self, a: &Self::F, c: &GaussianRational) -> Self::F;
    fn conj(&self, a: &Self::F) -> Self::F;
    fn z1(&self, a: &Self::F) -> Self::F;
    fn z1bar(&self, a: &Self::F) -> Self::F;
    fn reeb(&self, a: &Self::F) -> Self::F;
    /// Multiplicative inverse; fails where the backend cannot invert.
    fn recip(&self, a: &Self::F) -> Result<Self::F>;

    /// (Z₁a, Z₁̄a); backends may share work between the two.
    fn z1_pair(&self, a: &Self::F) -> (Self::F, Self::F) {
        (self.z1(a), self.z1bar(a))
    }

    fn zero(&self) -> Self::F {
        self.constant(&GaussianRational::from_ints(0, 0))
    }

    fn neg(&self, a: &Self::F) -> Self::F {
        self.scale(a, &GaussianRational::from_ints(-1, 0))
    }

    fn add_const(&self, a: &Self::F, c: &GaussianRational) -> Self::F {
        self.add(a, &self.constant(c))
    }
}
