//! SLD Cramér–Rao machinery and classical Fisher information of Gaussian
//! measurements. The weight matrix is the identity throughout.

use nalgebra::{DMatrix, DVector, Matrix3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{self, GaussianDistribution, GendyneMeasurement, Quadrature};
use crate::model::{Model, ModelPoint};

pub const STRUCTURE_TOL: f64 = 1e-12;
pub const PSD_FLOOR: f64 = -1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FisherKind {
    Classical,
    Quantum,
}

/// A 3×3 (classical or quantum) Fisher information matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FisherMatrix {
    entries: Matrix3<f64>,
    kind: FisherKind,
}

impl FisherMatrix {
    /// Checks symmetry and positive semidefiniteness, both relative to the
    /// largest entry.
    pub fn new(entries: Matrix3<f64>, kind: FisherKind) -> Result<Self> {
        let scale = entries.amax().max(1.0);
        let asym = (entries - entries.transpose()).amax();
        if asym > STRUCTURE_TOL * scale {
            return Err(Error::InvalidParameter(format!("Fisher matrix not symmetric (defect {asym:.3e})")));
        }
        let sym = (entries + entries.transpose()) * 0.5;
        let min = sym.symmetric_eigenvalues().min();
        if min < PSD_FLOOR * scale {
            return Err(Error::InvalidParameter(format!("Fisher matrix not PSD (min eigenvalue {min:.3e})")));
        }
        Ok(Self { entries: sym, kind })
    }

    pub fn diagonal(d: [f64; 3], kind: FisherKind) -> Result<Self> {
        Self::new(Matrix3::from_diagonal(&d.into()), kind)
    }

    pub fn entries(&self) -> &Matrix3<f64> {
        &self.entries
    }

    pub fn kind(&self) -> FisherKind {
        self.kind
    }

    pub fn inverse(&self) -> Result<Matrix3<f64>> {
        self.entries.cholesky().map(|c| c.inverse()).ok_or(Error::Singular)
    }

    /// `Tr[F⁻¹]`, the scalar Cramér–Rao bound with identity weights.
    pub fn inverse_trace(&self) -> Result<f64> {
        Ok(self.inverse()?.trace())
    }
}

/// Antisymmetric Uhlmann curvature matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UhlmannMatrix {
    entries: Matrix3<f64>,
}

impl UhlmannMatrix {
    pub fn new(entries: Matrix3<f64>) -> Result<Self> {
        let scale = entries.amax().max(1.0);
        let defect = (entries + entries.transpose()).amax();
        if defect > STRUCTURE_TOL * scale {
            return Err(Error::InvalidParameter(format!(
                "Uhlmann matrix not antisymmetric (defect {defect:.3e})"
            )));
        }
        Ok(Self { entries: (entries - entries.transpose()) * 0.5 })
    }

    pub fn entries(&self) -> &Matrix3<f64> {
        &self.entries
    }
}

/// Fisher information of a Gaussian outcome distribution,
/// `F = ∂x̄ᵀ Σ⁻¹ ∂x̄ + ½ Tr[Σ⁻¹ ∂Σ Σ⁻¹ ∂Σ]`, with `Σ⁻¹` taken on the
/// observed quadratures only.
///
/// `d_sigma` holds the derivatives of `Σ` itself (not of `σ`).
pub fn gaussian_fisher(
    d_mean: &[DVector<f64>],
    dist: &GaussianDistribution,
    d_sigma: &[DMatrix<f64>],
) -> Result<FisherMatrix> {
    if d_mean.len() != 3 || d_sigma.len() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, actual: d_mean.len().min(d_sigma.len()) });
    }
    let n = dist.mean().len();
    if let Some(bad) = d_mean.iter().find(|v| v.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, actual: bad.len() });
    }
    if let Some(bad) = d_sigma.iter().find(|m| m.nrows() != n || m.ncols() != n) {
        return Err(Error::DimensionMismatch { expected: n, actual: bad.nrows() });
    }
    let inv = dist.inverse_on_support()?;
    let weighted: Vec<DMatrix<f64>> = d_sigma.iter().map(|ds| &inv * ds).collect();
    let f = Matrix3::from_fn(|mu, nu| {
        let mean_term = d_mean[mu].dot(&(&inv * &d_mean[nu]));
        let cov_term = 0.5 * (&weighted[mu] * &weighted[nu]).trace();
        mean_term + cov_term
    });
    FisherMatrix::new(f, FisherKind::Classical)
}

/// Fisher information of `m` on the model at `p`, via [`gaussian_fisher`].
pub fn measurement_fisher(p: &ModelPoint, m: &GendyneMeasurement) -> Result<FisherMatrix> {
    let state = gaussian::model_gaussian(p)?;
    let dist = gaussian::gendyne_distribution(&state, m)?;
    let derivs = gaussian::model_derivatives(p);
    let d_sigma: Vec<DMatrix<f64>> = derivs.d_cov.iter().map(|d| d * 0.5).collect();
    gaussian_fisher(&derivs.d_mean, &dist, &d_sigma)
}

/// Closed-form QFI matrix; independent of the displacement.
pub fn qfi_matrix(p: &ModelPoint) -> FisherMatrix {
    let r = p.r();
    let d = match p.model() {
        Model::SingleMode => [4.0 * (-2.0 * r).exp(), 4.0 * (2.0 * r).exp(), 2.0],
        Model::TwoMode => {
            let c = 4.0 * (2.0 * r).cosh();
            [c, c, 4.0]
        }
    };
    FisherMatrix::diagonal(d, FisherKind::Quantum).expect("closed-form QFI is positive definite")
}

/// SLD Cramér–Rao bound `C^S = Tr[Q⁻¹]`.
pub fn sld_crb(p: &ModelPoint) -> f64 {
    let r = p.r();
    match p.model() {
        Model::SingleMode => (1.0 + (2.0 * r).cosh()) / 2.0,
        Model::TwoMode => 0.25 + 0.5 / (2.0 * r).cosh(),
    }
}

/// Uhlmann curvature; the same constant matrix for both models.
pub fn uhlmann_matrix(_p: &ModelPoint) -> UhlmannMatrix {
    UhlmannMatrix { entries: Matrix3::new(0.0, 4.0, 0.0, -4.0, 0.0, 0.0, 0.0, 0.0, 0.0) }
}

/// Asymptotic incompatibility `R = ‖iQ⁻¹D‖_∞`.
///
/// `Q⁻¹D` is similar to the antisymmetric `Q^{-1/2} D Q^{-1/2}`, so its
/// spectrum is purely imaginary and `R` is the largest eigenvalue modulus.
pub fn quantumness(q: &FisherMatrix, d: &UhlmannMatrix) -> Result<f64> {
    let q_inv = q.inverse()?;
    let product = q_inv * d.entries();
    let r = product.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(r)
}

/// General-dyne FI on the single-mode model with `σ_m = diag(z, 1/z)`.
pub fn gendyne_fisher_single(r: f64, z: f64) -> Result<FisherMatrix> {
    check_z(z)?;
    let e2 = (2.0 * r).exp();
    let f11 = 4.0 / (e2 + z);
    let f22 = 4.0 / (1.0 / e2 + 1.0 / z);
    let f33 = 2.0 * (e2 * e2 + z * z) / ((e2 + z) * (e2 + z));
    FisherMatrix::diagonal([f11, f22, f33], FisherKind::Classical)
}

/// `Tr[F_gen⁻¹]` in closed form.
pub fn gendyne_precision_single(r: f64, z: f64) -> Result<f64> {
    check_z(z)?;
    let e2 = (2.0 * r).exp();
    Ok(0.25 * (2.0 + 1.0 / e2 + z + 1.0 / z + e2 * (1.0 + 4.0 * z / (e2 * e2 + z * z))))
}

/// Heterodyne precision `2cosh⁴r / cosh 2r`.
pub fn heterodyne_precision(r: f64) -> f64 {
    2.0 * r.cosh().powi(4) / (2.0 * r).cosh()
}

/// Double-homodyne detection after the beam splitter: `p` on the first mode,
/// `q` on the second.
pub fn double_homodyne_measurement() -> GendyneMeasurement {
    GendyneMeasurement::homodyne(&[Quadrature::P, Quadrature::Q])
}

/// FI of double-homodyne detection on the two-mode model,
/// `diag(2e^{2r}, 2e^{2r}, 4)`.
pub fn double_homodyne_fisher_two(r: f64) -> Result<FisherMatrix> {
    let p = ModelPoint::two(0.0, 0.0, r)?;
    measurement_fisher(&p, &double_homodyne_measurement())
}

/// `Tr[F⁻¹]` of double homodyne, `1/4 + e^{−2r}`.
pub fn double_homodyne_precision(r: f64) -> Result<f64> {
    double_homodyne_fisher_two(r)?.inverse_trace()
}

fn check_z(z: f64) -> Result<()> {
    if z > 0.0 && z.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("general-dyne squeezing z must be positive, got {z}")))
    }
}
