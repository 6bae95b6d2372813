//! Isotropic linear elasticity.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// How the in-plane Lamé coefficients are derived from `(E, nu)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlaneAssumption {
    #[default]
    PlaneStrain,
    PlaneStress,
}

/// Symmetric 2x2 tensor stored as `(xx, yy, xy)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SymTensor2<T> {
    pub xx: T,
    pub yy: T,
    pub xy: T,
}

impl<T: Scalar> SymTensor2<T> {
    pub fn new(xx: T, yy: T, xy: T) -> Self {
        Self { xx, yy, xy }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn identity() -> Self {
        Self::new(T::one(), T::one(), T::zero())
    }

    pub fn trace(&self) -> T {
        self.xx + self.yy
    }

    /// Full contraction `A : B`.
    pub fn contract(&self, other: &Self) -> T {
        self.xx * other.xx + self.yy * other.yy + T::two() * self.xy * other.xy
    }

    pub fn scale(&self, a: T) -> Self {
        Self::new(self.xx * a, self.yy * a, self.xy * a)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.xx + other.xx, self.yy + other.yy, self.xy + other.xy)
    }
}

/// Symmetric part of a displacement gradient `grad[i][j] = d u_i / d x_j`.
pub fn strain<T: Scalar>(grad: [[T; 2]; 2]) -> SymTensor2<T> {
    SymTensor2::new(
        grad[0][0],
        grad[1][1],
        (grad[0][1] + grad[1][0]) * T::half(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialModel<T> {
    pub young: T,
    pub poisson: T,
    pub lambda: T,
    pub mu: T,
    pub assumption: PlaneAssumption,
}

/// `(lambda, mu)` from Young's modulus and Poisson ratio (3D formulas).
pub fn lame_from_engineering<T: Scalar>(young: T, poisson: T) -> Result<(T, T)> {
    if !(young > T::zero()) {
        return Err(Error::InvalidMaterial(format!(
            "Young's modulus must be positive, got {young}"
        )));
    }
    if !(poisson >= T::zero() && poisson < T::half()) {
        return Err(Error::InvalidMaterial(format!(
            "Poisson ratio must lie in [0, 0.5), got {poisson}"
        )));
    }
    let one = T::one();
    let mu = young / (T::two() * (one + poisson));
    let lambda = young * poisson / ((one + poisson) * (one - T::two() * poisson));
    Ok((lambda, mu))
}

impl<T: Scalar> MaterialModel<T> {
    pub fn new(young: T, poisson: T, assumption: PlaneAssumption) -> Result<Self> {
        let (mut lambda, mu) = lame_from_engineering(young, poisson)?;
        if assumption == PlaneAssumption::PlaneStress {
            lambda = T::two() * lambda * mu / (lambda + T::two() * mu);
        }
        Ok(Self {
            young,
            poisson,
            lambda,
            mu,
            assumption,
        })
    }

    /// Material given directly by its Lamé pair; `young`/`poisson` are back-computed.
    pub fn from_lame(lambda: T, mu: T) -> Result<Self> {
        if !(mu > T::zero()) || !(lambda >= T::zero()) {
            return Err(Error::InvalidMaterial(format!(
                "need mu > 0 and lambda >= 0, got lambda={lambda}, mu={mu}"
            )));
        }
        let young = mu * (T::lit(3.0) * lambda + T::two() * mu) / (lambda + mu);
        let poisson = lambda / (T::two() * (lambda + mu));
        Ok(Self {
            young,
            poisson,
            lambda,
            mu,
            assumption: PlaneAssumption::PlaneStrain,
        })
    }

    /// `sigma = lambda tr(eps) I + 2 mu eps`.
    pub fn stress(&self, eps: &SymTensor2<T>) -> SymTensor2<T> {
        let l = self.lambda * eps.trace();
        let m2 = T::two() * self.mu;
        SymTensor2::new(l + m2 * eps.xx, l + m2 * eps.yy, m2 * eps.xy)
    }

    pub fn energy_density(&self, eps: &SymTensor2<T>) -> T {
        self.stress(eps).contract(eps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn lame_values() {
        let (l, m) = lame_from_engineering(200.0f64, 0.3).unwrap();
        assert_relative_eq!(m, 200.0 / 2.6, epsilon = 1e-12);
        assert_relative_eq!(l, 60.0 / (1.3 * 0.4), epsilon = 1e-12);
        assert!((m - 76.9231).abs() < 1e-4);
        assert!((l - 115.3846).abs() < 1e-4);
        assert_eq!(lame_from_engineering(1.0, 0.0).unwrap(), (0.0, 0.5));
        for nu in [0.0, 0.1, 0.25, 0.49] {
            let (_, m) = lame_from_engineering(2.0 * (1.0 + nu), nu).unwrap();
            assert_relative_eq!(m, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn rejects_incompressible_and_bad_modulus() {
        assert!(lame_from_engineering(200.0, 0.5).is_err());
        assert!(lame_from_engineering(200.0, 0.6).is_err());
        assert!(lame_from_engineering(0.0, 0.3).is_err());
        assert!(MaterialModel::from_lame(1.0, 0.0).is_err());
    }

    #[test]
    fn plane_stress_switch() {
        let strain = MaterialModel::new(200.0, 0.3, PlaneAssumption::PlaneStrain).unwrap();
        let stress = MaterialModel::new(200.0, 0.3, PlaneAssumption::PlaneStress).unwrap();
        assert_eq!(strain.mu, stress.mu);
        // plane stress lambda = E nu / (1 - nu^2)
        assert_relative_eq!(stress.lambda, 200.0 * 0.3 / (1.0 - 0.09), epsilon = 1e-12);
    }

    #[test]
    fn strain_examples() {
        assert_eq!(strain([[1.0, 0.0], [0.0, 1.0]]), SymTensor2::identity());
        assert_eq!(
            strain([[0.0, 1.0], [0.0, 0.0]]),
            SymTensor2::new(0.0, 0.0, 0.5)
        );
        assert_eq!(strain([[0.0, 1.0], [-1.0, 0.0]]), SymTensor2::zero());
    }

    #[test]
    fn stress_examples() {
        let m = MaterialModel::from_lame(1.0, 1.0).unwrap();
        assert_eq!(
            m.stress(&SymTensor2::identity()),
            SymTensor2::new(4.0, 4.0, 0.0)
        );
        assert_eq!(m.stress(&SymTensor2::zero()), SymTensor2::zero());
        let m = MaterialModel::from_lame(5.0, 3.0).unwrap();
        assert_eq!(
            m.stress(&SymTensor2::new(0.0, 0.0, 1.0)),
            SymTensor2::new(0.0, 0.0, 6.0)
        );
        let m32 = MaterialModel::<f32>::from_lame(1.0, 1.0).unwrap();
        assert_eq!(m32.stress(&SymTensor2::identity()).xx, 4.0f32);
    }

    #[test]
    fn rigid_motions_are_stress_free() {
        let m = MaterialModel::new(200.0, 0.3, PlaneAssumption::PlaneStrain).unwrap();
        for w in [-2.0, 0.3, 7.0] {
            let eps = strain([[0.0, w], [-w, 0.0]]);
            assert_eq!(m.stress(&eps), SymTensor2::zero());
        }
    }

    fn tensor() -> impl Strategy<Value = SymTensor2<f64>> {
        (-10.0..10.0f64, -10.0..10.0f64, -10.0..10.0f64)
            .prop_map(|(a, b, c)| SymTensor2::new(a, b, c))
    }

    proptest! {
        #[test]
        fn stress_is_linear(e1 in tensor(), e2 in tensor(), a in -5.0..5.0f64, b in -5.0..5.0f64,
                            lam in 0.0..300.0f64, mu in 0.1..300.0f64) {
            let m = MaterialModel::from_lame(lam, mu).unwrap();
            let lhs = m.stress(&e1.scale(a).add(&e2.scale(b)));
            let rhs = m.stress(&e1).scale(a).add(&m.stress(&e2).scale(b));
            let tol = 1e-9 * (1.0 + lam + mu) * 100.0;
            prop_assert!((lhs.xx - rhs.xx).abs() < tol);
            prop_assert!((lhs.yy - rhs.yy).abs() < tol);
            prop_assert!((lhs.xy - rhs.xy).abs() < tol);
        }

        #[test]
        fn energy_density_coercive(e in tensor(), lam in 0.0..300.0f64, mu in 0.1..300.0f64) {
            let m = MaterialModel::from_lame(lam, mu).unwrap();
            let w = m.energy_density(&e);
            let bound = 2.0 * mu * e.contract(&e);
            prop_assert!(w >= bound * (1.0 - 1e-12) - 1e-12);
            if e.contract(&e) > 1e-12 {
                prop_assert!(w > 0.0);
            }
        }
    }
}
