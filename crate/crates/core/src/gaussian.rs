//! Phase-space description of Gaussian states and general-dyne measurements.
//!
//! Quadratures are ordered `(q₁, p₁, q₂, p₂, …)` with `ħ = 1` and the vacuum
//! covariance normalised to the identity.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, complexify};
use crate::model::{Model, ModelPoint};

pub const SYMMETRY_TOL: f64 = 1e-12;
pub const PHYSICALITY_FLOOR: f64 = -1e-10;
pub const PURITY_TOL: f64 = 1e-10;

/// `Ω = ⊕ [[0, 1], [−1, 0]]` over `d` modes.
pub fn symplectic_form(d: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * d, 2 * d);
    for j in 0..d {
        omega[(2 * j, 2 * j + 1)] = 1.0;
        omega[(2 * j + 1, 2 * j)] = -1.0;
    }
    omega
}

/// Covariance of `S(r)|0⟩`: `diag(e^{2r}, e^{−2r})`.
pub fn squeezed_vacuum_cov(r: f64) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_vec(vec![(2.0 * r).exp(), (-2.0 * r).exp()]))
}

/// Covariance of the two-mode squeezed vacuum `S₂(r)|00⟩`.
pub fn two_mode_squeezed_cov(r: f64) -> DMatrix<f64> {
    let c = (2.0 * r).cosh();
    let s = (2.0 * r).sinh();
    DMatrix::from_row_slice(
        4,
        4,
        &[
            c, 0.0, s, 0.0, //
            0.0, c, 0.0, -s, //
            s, 0.0, c, 0.0, //
            0.0, -s, 0.0, c,
        ],
    )
}

/// Symplectic matrix of the balanced beam splitter `a → (a+b)/√2`, `b → (b−a)/√2`.
pub fn balanced_bs_symplectic() -> DMatrix<f64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_row_slice(
        4,
        4,
        &[
            h, 0.0, h, 0.0, //
            0.0, h, 0.0, h, //
            -h, 0.0, h, 0.0, //
            0.0, -h, 0.0, h,
        ],
    )
}

/// Diagnostics of a candidate covariance matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovarianceReport {
    pub symmetry_defect: f64,
    /// Smallest eigenvalue of `σ + iΩ`.
    pub min_physical_eigenvalue: f64,
    /// Symplectic eigenvalues, ascending, one per mode.
    pub symplectic_eigenvalues: Vec<f64>,
}

impl CovarianceReport {
    pub fn is_valid(&self) -> bool {
        self.symmetry_defect <= SYMMETRY_TOL && self.min_physical_eigenvalue >= PHYSICALITY_FLOOR
    }

    pub fn is_pure(&self) -> bool {
        self.is_valid() && self.symplectic_eigenvalues.iter().all(|nu| (nu - 1.0).abs() <= PURITY_TOL)
    }
}

pub fn validate_covariance(cov: &DMatrix<f64>) -> Result<CovarianceReport> {
    let n = cov.nrows();
    if !cov.is_square() {
        return Err(Error::DimensionMismatch { expected: n, actual: cov.ncols() });
    }
    if n == 0 || n % 2 != 0 {
        return Err(Error::InvalidParameter(format!("covariance dimension {n} is not a positive even number")));
    }
    let d = n / 2;
    let omega = symplectic_form(d);
    let symmetry_defect = linalg::symmetry_defect(cov);

    let sym = (cov + cov.transpose()) * 0.5;
    let physical = complexify(&sym) + omega.map(|v| Complex64::new(0.0, v));
    let min_physical_eigenvalue = linalg::hermitian_eigenvalues(&physical)?[0];

    Ok(CovarianceReport {
        symmetry_defect,
        min_physical_eigenvalue,
        symplectic_eigenvalues: symplectic_eigenvalues(&sym),
    })
}

/// Moduli of the eigenvalues of `Ωσ`, which come in `±iν` pairs.
fn symplectic_eigenvalues(cov: &DMatrix<f64>) -> Vec<f64> {
    let d = cov.nrows() / 2;
    let m = symplectic_form(d) * cov;
    let mut moduli: Vec<f64> = m.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    moduli.sort_by(f64::total_cmp);
    moduli.chunks(2).map(|pair| 0.5 * (pair[0] + pair[1])).collect()
}

/// A Gaussian state, characterised by first moments and covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    modes: usize,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let report = validate_covariance(&cov)?;
        if mean.len() != cov.nrows() {
            return Err(Error::DimensionMismatch { expected: cov.nrows(), actual: mean.len() });
        }
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite first moments".into()));
        }
        if report.symmetry_defect > SYMMETRY_TOL {
            return Err(Error::InvalidParameter(format!(
                "covariance not symmetric (defect {:.3e})",
                report.symmetry_defect
            )));
        }
        if report.min_physical_eigenvalue < PHYSICALITY_FLOOR {
            return Err(Error::InvalidParameter(format!(
                "covariance violates the uncertainty principle (min eigenvalue of σ + iΩ = {:.3e})",
                report.min_physical_eigenvalue
            )));
        }
        Ok(Self { modes: cov.nrows() / 2, mean, cov })
    }

    pub fn vacuum(modes: usize) -> Self {
        Self {
            modes,
            mean: DVector::zeros(2 * modes),
            cov: DMatrix::identity(2 * modes, 2 * modes),
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn report(&self) -> CovarianceReport {
        validate_covariance(&self.cov).expect("validated at construction")
    }

    pub fn is_pure(&self) -> bool {
        self.report().is_pure()
    }

    /// Image of the state under the symplectic map `S`: `r̄ → S r̄`, `σ → S σ Sᵀ`.
    pub fn transformed(&self, s: &DMatrix<f64>) -> Result<Self> {
        if s.nrows() != self.cov.nrows() || !s.is_square() {
            return Err(Error::DimensionMismatch { expected: self.cov.nrows(), actual: s.nrows() });
        }
        let cov = s * &self.cov * s.transpose();
        let cov = (&cov + cov.transpose()) * 0.5;
        Self::new(s * &self.mean, cov)
    }
}

/// `D(α)S(r)|0⟩`: mean `√2 (θ₁, θ₂)`, covariance `diag(e^{2r}, e^{−2r})`.
pub fn single_mode_model_gaussian(p: &ModelPoint) -> Result<GaussianState> {
    if p.model() != Model::SingleMode {
        return Err(Error::WrongModel { expected: "single-mode" });
    }
    let [t1, t2, r] = p.theta();
    let s2 = std::f64::consts::SQRT_2;
    GaussianState::new(DVector::from_vec(vec![s2 * t1, s2 * t2]), squeezed_vacuum_cov(r))
}

/// The two-mode model before the beam splitter: `(D(α) ⊗ I) S₂(r)|00⟩`.
pub fn two_mode_model_gaussian_unrotated(p: &ModelPoint) -> Result<GaussianState> {
    if p.model() != Model::TwoMode {
        return Err(Error::WrongModel { expected: "two-mode" });
    }
    let [t1, t2, r] = p.theta();
    let s2 = std::f64::consts::SQRT_2;
    GaussianState::new(DVector::from_vec(vec![s2 * t1, s2 * t2, 0.0, 0.0]), two_mode_squeezed_cov(r))
}

/// The two-mode model after the balanced beam splitter, a product of
/// orthogonally squeezed single-mode states: mean `(θ₁, θ₂, −θ₁, −θ₂)`,
/// covariance `diag(e^{2r}, e^{−2r}, e^{−2r}, e^{2r})`.
pub fn two_mode_model_gaussian(p: &ModelPoint) -> Result<GaussianState> {
    if p.model() != Model::TwoMode {
        return Err(Error::WrongModel { expected: "two-mode" });
    }
    let [t1, t2, r] = p.theta();
    let (up, down) = ((2.0 * r).exp(), (-2.0 * r).exp());
    GaussianState::new(
        DVector::from_vec(vec![t1, t2, -t1, -t2]),
        DMatrix::from_diagonal(&DVector::from_vec(vec![up, down, down, up])),
    )
}

/// Phase-space state of the model in the frame where measurements act
/// (after the beam splitter for the two-mode model).
pub fn model_gaussian(p: &ModelPoint) -> Result<GaussianState> {
    match p.model() {
        Model::SingleMode => single_mode_model_gaussian(p),
        Model::TwoMode => two_mode_model_gaussian(p),
    }
}

/// Parameter derivatives of the first moments and covariance of [`model_gaussian`].
#[derive(Debug, Clone)]
pub struct ModelDerivatives {
    pub d_mean: Vec<DVector<f64>>,
    pub d_cov: Vec<DMatrix<f64>>,
}

pub fn model_derivatives(p: &ModelPoint) -> ModelDerivatives {
    let r = p.r();
    let (up, down) = ((2.0 * r).exp(), (-2.0 * r).exp());
    match p.model() {
        Model::SingleMode => {
            let s2 = std::f64::consts::SQRT_2;
            ModelDerivatives {
                d_mean: vec![
                    DVector::from_vec(vec![s2, 0.0]),
                    DVector::from_vec(vec![0.0, s2]),
                    DVector::zeros(2),
                ],
                d_cov: vec![
                    DMatrix::zeros(2, 2),
                    DMatrix::zeros(2, 2),
                    DMatrix::from_diagonal(&DVector::from_vec(vec![2.0 * up, -2.0 * down])),
                ],
            }
        }
        Model::TwoMode => ModelDerivatives {
            d_mean: vec![
                DVector::from_vec(vec![1.0, 0.0, -1.0, 0.0]),
                DVector::from_vec(vec![0.0, 1.0, 0.0, -1.0]),
                DVector::zeros(4),
            ],
            d_cov: vec![
                DMatrix::zeros(4, 4),
                DMatrix::zeros(4, 4),
                DMatrix::from_diagonal(&DVector::from_vec(vec![
                    2.0 * up,
                    -2.0 * down,
                    -2.0 * down,
                    2.0 * up,
                ])),
            ],
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Quadrature {
    Q,
    P,
}

/// How a single mode is detected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ModeDetection {
    /// Finite general-dyne covariance block.
    General,
    /// Ideal homodyne of the given quadrature, the `z → 0` limit. The
    /// conjugate quadrature carries infinite measurement noise and is
    /// dropped from the outcome statistics.
    Homodyne(Quadrature),
}

/// An ideal general-dyne measurement, possibly with homodyne modes.
#[derive(Debug, Clone, PartialEq)]
pub struct GendyneMeasurement {
    /// Finite part of `σ_m`. For homodyne modes the block is zero: the
    /// measured quadrature has vanishing noise and the conjugate one is not
    /// observed.
    cov: DMatrix<f64>,
    modes: Vec<ModeDetection>,
}

impl GendyneMeasurement {
    /// Measurement with a finite, pure covariance `σ_m`.
    pub fn gendyne(cov: DMatrix<f64>) -> Result<Self> {
        let d = cov.nrows() / 2;
        Self::with_modes(cov, vec![ModeDetection::General; d])
    }

    pub fn heterodyne(modes: usize) -> Self {
        Self {
            cov: DMatrix::identity(2 * modes, 2 * modes),
            modes: vec![ModeDetection::General; modes],
        }
    }

    /// Single-mode `σ_m = diag(z, 1/z)`.
    pub fn single_mode_squeezed(z: f64) -> Result<Self> {
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::InvalidParameter(format!("general-dyne squeezing z must be positive, got {z}")));
        }
        Self::gendyne(DMatrix::from_diagonal(&DVector::from_vec(vec![z, 1.0 / z])))
    }

    /// Homodyne detection of one quadrature per mode.
    pub fn homodyne(quadratures: &[Quadrature]) -> Self {
        let n = 2 * quadratures.len();
        Self {
            cov: DMatrix::zeros(n, n),
            modes: quadratures.iter().map(|&q| ModeDetection::Homodyne(q)).collect(),
        }
    }

    /// Mixed measurement. General-mode blocks must form a pure covariance and
    /// must not couple to homodyne modes.
    pub fn with_modes(cov: DMatrix<f64>, modes: Vec<ModeDetection>) -> Result<Self> {
        if !cov.is_square() || cov.nrows() != 2 * modes.len() {
            return Err(Error::DimensionMismatch { expected: 2 * modes.len(), actual: cov.nrows() });
        }
        let general: Vec<usize> = modes
            .iter()
            .enumerate()
            .filter(|(_, m)| **m == ModeDetection::General)
            .flat_map(|(j, _)| [2 * j, 2 * j + 1])
            .collect();
        let mut cov = cov;
        for i in 0..cov.nrows() {
            for j in 0..cov.ncols() {
                let inside = general.contains(&i) && general.contains(&j);
                if !inside {
                    if cov[(i, j)] != 0.0 {
                        return Err(Error::IllPosedHomodyne(format!(
                            "σ_m couples a homodyne mode at entry ({i}, {j})"
                        )));
                    }
                    cov[(i, j)] = 0.0;
                }
            }
        }
        if !general.is_empty() {
            let block = DMatrix::from_fn(general.len(), general.len(), |i, j| cov[(general[i], general[j])]);
            let report = validate_covariance(&block)?;
            if !report.is_pure() {
                return Err(Error::InvalidParameter(format!(
                    "general-dyne covariance must be pure, symplectic eigenvalues {:?}",
                    report.symplectic_eigenvalues
                )));
            }
        }
        Ok(Self { cov, modes })
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn modes(&self) -> &[ModeDetection] {
        &self.modes
    }

    /// Quadrature indices that are not observed.
    pub fn unobserved(&self) -> Vec<usize> {
        self.modes
            .iter()
            .enumerate()
            .filter_map(|(j, m)| match m {
                ModeDetection::General => None,
                ModeDetection::Homodyne(Quadrature::Q) => Some(2 * j + 1),
                ModeDetection::Homodyne(Quadrature::P) => Some(2 * j),
            })
            .collect()
    }
}

/// Outcome distribution of a general-dyne measurement on a Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianDistribution {
    mean: DVector<f64>,
    sigma_cap: DMatrix<f64>,
    unobserved: Vec<usize>,
}

impl GaussianDistribution {
    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    /// `Σ = (σ + σ_m)/2`, using only the finite part of `σ_m`. Entries on
    /// unobserved quadratures are meaningless.
    pub fn sigma_cap(&self) -> &DMatrix<f64> {
        &self.sigma_cap
    }

    /// Quadratures whose variance diverges in the homodyne limit.
    pub fn unobserved(&self) -> &[usize] {
        &self.unobserved
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.mean.len()).filter(|i| !self.unobserved.contains(i)).collect()
    }

    /// `Σ⁻¹` restricted to the observed quadratures, zero elsewhere: the
    /// exact `z → 0` limit of the inverse.
    pub fn inverse_on_support(&self) -> Result<DMatrix<f64>> {
        linalg::inverse_on_support(&self.sigma_cap, &self.support())
            .map_err(|_| Error::IllPosedHomodyne("Σ is singular on the observed quadratures".into()))
    }
}

pub fn gendyne_distribution(state: &GaussianState, m: &GendyneMeasurement) -> Result<GaussianDistribution> {
    if m.cov.nrows() != state.cov.nrows() {
        return Err(Error::DimensionMismatch { expected: state.cov.nrows(), actual: m.cov.nrows() });
    }
    Ok(GaussianDistribution {
        mean: state.mean.clone(),
        sigma_cap: (&state.cov + &m.cov) * 0.5,
        unobserved: m.unobserved(),
    })
}
