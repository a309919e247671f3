//! Holevo Cramér–Rao bound for the pure single- and two-mode models.
//!
//! For pure models the minimization over locally-unbiased observables `X_j`
//! can be restricted to the span of the state and its derivatives, and only
//! the matrix elements `⟨ψ|X_j|b_i⟩` against the other basis vectors enter
//! `Z_{jk} = ⟨ψ|X_j X_k|ψ⟩`. The single-mode basis is
//! `{e₀, e₁, e₂}` with `e_n = D(α)S(r)|n⟩`; the two-mode one is
//! `{λ₁, …, λ₅} = {e₀f₀, e₀f₁, e₁f₀, e₀f₂, e₂f₀}` in the beam-splitter frame.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds;
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{Model, ModelPoint};
use crate::optimize::{bisect_root, golden_section, NelderMead};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Free real parameters of the locally-unbiased X family: `(β, γ, δ)` for the
/// single-mode model, `x₁ … x₁₅` for the two-mode model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubspaceFreeParams {
    model: Model,
    values: Vec<f64>,
}

impl SubspaceFreeParams {
    pub fn new(model: Model, values: Vec<f64>) -> Result<Self> {
        let expected = model.free_param_count();
        if values.len() != expected {
            return Err(Error::WrongLength { expected, actual: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite free parameter".into()));
        }
        Ok(Self { model, values })
    }

    pub fn zeros(model: Model) -> Self {
        Self { model, values: vec![0.0; model.free_param_count()] }
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// `Z_{jk} = Tr[ρ X_j X_k]`, Hermitian by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZMatrix(Matrix3<Complex64>);

impl ZMatrix {
    pub fn new(m: Matrix3<Complex64>) -> Result<Self> {
        let dm = DMatrix::from_fn(3, 3, |i, j| m[(i, j)]);
        let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let defect = linalg::hermiticity_defect(&dm);
        if defect > 1e-12 * scale {
            return Err(Error::NotHermitian { defect });
        }
        Ok(Self(m))
    }

    pub fn entries(&self) -> &Matrix3<Complex64> {
        &self.0
    }

    pub fn real_part(&self) -> Matrix3<f64> {
        self.0.map(|z| z.re)
    }

    pub fn imag_part(&self) -> Matrix3<f64> {
        self.0.map(|z| z.im)
    }
}

/// Elements `⟨ψ|X_j|b_i⟩` for the non-ψ basis vectors `b_i`, as a `3 × k`
/// matrix (`k = 2` single mode, `k = 4` two mode). Rows are `X₁, X₂, X₃`.
pub fn first_row_elements(r: f64, fp: &SubspaceFreeParams) -> DMatrix<Complex64> {
    let x = &fp.values;
    let (er, e2r) = (r.exp(), (2.0 * r).exp());
    match fp.model {
        Model::SingleMode => {
            let (beta, gamma, delta) = (x[0], x[1], x[2]);
            DMatrix::from_row_slice(
                3,
                2,
                &[
                    c(er / 2.0, 0.0),
                    c(0.0, beta),
                    c(0.0, -1.0 / (2.0 * er)),
                    c(0.0, gamma),
                    c(0.0, 0.0),
                    c(FRAC_1_SQRT_2, delta),
                ],
            )
        }
        Model::TwoMode => {
            let h = FRAC_1_SQRT_2;
            DMatrix::from_row_slice(
                3,
                4,
                &[
                    // X₁ on λ₂ … λ₅
                    c(x[0], e2r * x[1]),
                    c(er * h + e2r * x[0], x[1]),
                    c(x[2], x[3]),
                    c(x[2], x[4]),
                    // X₂: the imaginary part on λ₂ couples to x₇, which is
                    // what the ∂₂ constraint requires.
                    c(x[5], er * h + e2r * x[6]),
                    c(e2r * x[5], x[6]),
                    c(x[7], x[8]),
                    c(x[7], x[9]),
                    // X₃
                    c(x[10], e2r * x[11]),
                    c(e2r * x[10], x[11]),
                    c(x[12], x[13]),
                    c(x[12] + h, x[14]),
                ],
            )
        }
    }
}

/// Coefficients of `|∂_μψ⟩` in the subspace basis, one row per parameter.
/// Column 0 is the component along `|ψ⟩` itself.
pub fn derivative_coefficients(p: &ModelPoint) -> DMatrix<Complex64> {
    let [t1, t2, r] = p.theta();
    let (er, emr) = (r.exp(), (-r).exp());
    let h = FRAC_1_SQRT_2;
    match p.model() {
        Model::SingleMode => DMatrix::from_row_slice(
            3,
            3,
            &[
                c(0.0, -t2),
                c(emr, 0.0),
                c(0.0, 0.0),
                c(0.0, t1),
                c(0.0, er),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(h, 0.0),
            ],
        ),
        Model::TwoMode => DMatrix::from_row_slice(
            3,
            5,
            &[
                c(0.0, -t2),
                c(-er * h, 0.0),
                c(emr * h, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.0, t1),
                c(0.0, -emr * h),
                c(0.0, er * h),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(-h, 0.0),
                c(h, 0.0),
            ],
        ),
    }
}

/// Largest deviation of `Tr[(∂_jρ) X_k]` from `δ_{jk}`. The condition
/// `Tr[ρ X_j] = 0` holds exactly because `⟨ψ|X_j|ψ⟩` is fixed to zero.
pub fn locally_unbiased_residual(p: &ModelPoint, fp: &SubspaceFreeParams) -> Result<f64> {
    check_model(p, fp)?;
    let v = first_row_elements(p.r(), fp);
    let coeffs = derivative_coefficients(p);
    let mut worst: f64 = 0.0;
    for j in 0..3 {
        for k in 0..3 {
            let inner: Complex64 = (0..v.ncols()).map(|i| v[(k, i)] * coeffs[(j, i + 1)]).sum();
            let target = if j == k { 1.0 } else { 0.0 };
            worst = worst.max((2.0 * inner.re - target).abs());
        }
    }
    Ok(worst)
}

fn z_from_elements(v: &DMatrix<Complex64>) -> Matrix3<Complex64> {
    Matrix3::from_fn(|j, k| (0..v.ncols()).map(|i| v[(j, i)] * v[(k, i)].conj()).sum())
}

pub fn z_matrix_single(r: f64, fp: &SubspaceFreeParams) -> Result<ZMatrix> {
    if fp.model != Model::SingleMode {
        return Err(Error::WrongLength { expected: 3, actual: fp.values.len() });
    }
    ZMatrix::new(z_from_elements(&first_row_elements(r, fp)))
}

pub fn z_matrix_two(r: f64, fp: &SubspaceFreeParams) -> Result<ZMatrix> {
    if fp.model != Model::TwoMode {
        return Err(Error::WrongLength { expected: 15, actual: fp.values.len() });
    }
    ZMatrix::new(z_from_elements(&first_row_elements(r, fp)))
}

pub fn z_matrix(r: f64, fp: &SubspaceFreeParams) -> Result<ZMatrix> {
    match fp.model {
        Model::SingleMode => z_matrix_single(r, fp),
        Model::TwoMode => z_matrix_two(r, fp),
    }
}

/// `h = Tr[Re Z] + ‖Im Z‖₁`, with the trace norm from a Hermitian eigensolver.
pub fn h_value(z: &ZMatrix) -> f64 {
    let im = DMatrix::from_fn(3, 3, |i, j| I * z.0[(i, j)].im);
    let norm = linalg::trace_norm_hermitian(&im).expect("Im Z of a Hermitian Z is antisymmetric");
    z.real_part().trace() + norm
}

/// Allocation-free objective used by the minimizer: `Tr[Re Z]` plus the
/// (optionally smoothed) closed-form trace norm of the antisymmetric `Im Z`.
fn h_objective(model: Model, r: f64, x: &[f64], eps: f64) -> f64 {
    let (er, e2r) = (r.exp(), (2.0 * r).exp());
    let h = FRAC_1_SQRT_2;
    let mut v = [[Complex64::new(0.0, 0.0); 4]; 3];
    match model {
        Model::SingleMode => {
            v[0][0] = c(er / 2.0, 0.0);
            v[0][1] = c(0.0, x[0]);
            v[1][0] = c(0.0, -1.0 / (2.0 * er));
            v[1][1] = c(0.0, x[1]);
            v[2][1] = c(h, x[2]);
        }
        Model::TwoMode => {
            v[0] = [c(x[0], e2r * x[1]), c(er * h + e2r * x[0], x[1]), c(x[2], x[3]), c(x[2], x[4])];
            v[1] = [c(x[5], er * h + e2r * x[6]), c(e2r * x[5], x[6]), c(x[7], x[8]), c(x[7], x[9])];
            v[2] = [c(x[10], e2r * x[11]), c(e2r * x[10], x[11]), c(x[12], x[13]), c(x[12] + h, x[14])];
        }
    }
    let trace: f64 = v.iter().flatten().map(|z| z.norm_sqr()).sum();
    let cross = |j: usize, k: usize| -> f64 { v[j].iter().zip(&v[k]).map(|(a, b)| (a * b.conj()).im).sum() };
    let im = Matrix3::new(
        0.0,
        cross(0, 1),
        cross(0, 2),
        -cross(0, 1),
        0.0,
        cross(1, 2),
        -cross(0, 2),
        -cross(1, 2),
        0.0,
    );
    trace + linalg::antisymmetric3_trace_norm_smoothed(&im, eps)
}

/// Settings of the multi-start minimization of `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinimizerConfig {
    pub restarts: usize,
    /// Convergence tolerance on the function value.
    pub tol: f64,
    /// Evaluation budget of each simplex run.
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for MinimizerConfig {
    fn default() -> Self {
        Self { restarts: 24, tol: 1e-10, max_iter: 40_000, seed: 0 }
    }
}

impl MinimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts < 1 {
            return Err(Error::InvalidParameter("at least one restart is required".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.max_iter < 10 {
            return Err(Error::InvalidParameter("max_iter must be at least 10".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HcrbEstimate {
    pub value: f64,
    pub argmin: SubspaceFreeParams,
    /// Restarts whose final simplex met the tolerance.
    pub converged_restarts: usize,
    pub evals: usize,
}

/// Trace-norm smoothing schedule. The kink of `‖Im Z‖₁` at `Im Z = 0` is
/// where the two-mode optimum sits; plain simplex search stalls on it, while
/// a warm-started continuation `ε → 0` converges to the exact minimum.
const SMOOTHING: [f64; 10] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 0.0];
const POLISH_ROUNDS: usize = 6;

struct RestartOutcome {
    x: Vec<f64>,
    fx: f64,
    converged: bool,
    evals: usize,
}

fn run_restart(model: Model, r: f64, x0: Vec<f64>, cfg: &MinimizerConfig) -> RestartOutcome {
    let nm = NelderMead { max_evals: cfg.max_iter, fatol: cfg.tol * 1e-3, xatol: 1e-12 };
    let mut x = x0;
    let mut evals = 0;
    let mut converged = false;
    let mut step = 0.5;
    for (stage, &eps) in SMOOTHING.iter().enumerate() {
        let last = stage + 1 == SMOOTHING.len();
        let mut fx = h_objective(model, r, &x, eps);
        for _ in 0..POLISH_ROUNDS {
            let m = nm.minimize(|y| h_objective(model, r, y, eps), &x, step);
            evals += m.evals;
            let improvement = fx - m.fx;
            let moved = x.iter().zip(&m.x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            x = m.x;
            fx = m.fx;
            step = (10.0 * moved).clamp(1e-6, 0.5);
            if m.converged && improvement <= cfg.tol {
                converged = last;
                break;
            }
        }
    }
    let fx = h_objective(model, r, &x, 0.0);
    RestartOutcome { x, fx, converged, evals }
}

/// Multi-start minimization of `h ∘ Z` over the free parameters. Restarts
/// are drawn uniformly from `[−2, 2]ⁿ` from a seeded stream, so the result
/// is a deterministic function of `(p, cfg)`.
pub fn minimize_h(p: &ModelPoint, cfg: &MinimizerConfig) -> Result<HcrbEstimate> {
    cfg.validate()?;
    let model = p.model();
    let n = model.free_param_count();
    let r = p.r();

    let mut best: Option<RestartOutcome> = None;
    let mut converged_restarts = 0;
    let mut evals = 0;
    for k in 0..cfg.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(k as u64);
        let x0: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..=2.0)).collect();
        let outcome = run_restart(model, r, x0, cfg);
        evals += outcome.evals;
        if !outcome.converged {
            continue;
        }
        converged_restarts += 1;
        let better = match &best {
            None => true,
            Some(b) if outcome.fx < b.fx - cfg.tol => true,
            Some(b) if (outcome.fx - b.fx).abs() <= cfg.tol => norm(&outcome.x) < norm(&b.x),
            Some(_) => false,
        };
        if better {
            best = Some(outcome);
        }
    }

    let best = best.ok_or_else(|| {
        Error::NonConvergence(format!("none of {} restarts met tol = {:e}", cfg.restarts, cfg.tol))
    })?;
    Ok(HcrbEstimate {
        value: best.fx,
        argmin: SubspaceFreeParams { model, values: best.x },
        converged_restarts,
        evals,
    })
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Closed-form HCRB: `(cosh 2r + 2)/2` for the single-mode model. The
/// two-mode value `1/4 + e^{−2r}` is the double-homodyne precision, which
/// the numerical minimum reproduces but which is not derived analytically;
/// see [`hcrb_closed_is_derived`].
pub fn hcrb_closed(p: &ModelPoint) -> f64 {
    let r = p.r();
    match p.model() {
        Model::SingleMode => ((2.0 * r).cosh() + 2.0) / 2.0,
        Model::TwoMode => 0.25 + (-2.0 * r).exp(),
    }
}

/// Whether [`hcrb_closed`] is an analytic result (single mode) or an
/// expression inferred from numerics (two mode).
pub fn hcrb_closed_is_derived(model: Model) -> bool {
    model == Model::SingleMode
}

/// `f(z, r)`: general-dyne precision minus the single-mode HCRB.
pub fn gendyne_gap(z: f64, r: f64) -> Result<f64> {
    let p = ModelPoint::single(0.0, 0.0, r)?;
    Ok(bounds::gendyne_precision_single(r, z)? - hcrb_closed(&p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GendyneOptimum {
    pub z_opt: f64,
    pub f_opt: f64,
}

pub const LOG_Z_BRACKET: (f64, f64) = (-6.0, 6.0);
pub const LOG_Z_TOL: f64 = 1e-8;

/// `∂f/∂u` at `z = e^u`. With `v = u − 2r` the precision reads
/// `¼(2 + 2cosh 2r + 2cosh u + 2 sech v)`, whose slope is
/// `½(sinh u − sech v tanh v) = cosh(u − r) sinh r + ½ sinh v tanh² v`.
/// The second form has no cancellation near the root.
fn gendyne_gap_log_slope(z: f64, r: f64) -> f64 {
    let u = z.ln();
    let v = u - 2.0 * r;
    (u - r).cosh() * r.sinh() + 0.5 * v.sinh() * v.tanh().powi(2)
}

/// Best general-dyne measurement at squeezing `r`: golden-section search of
/// `f(e^u, r)` over `u ∈ [−6, 6]`. Near `r = 0` the gap is quartic in `u`,
/// so the bracket is then refined by bisecting on the sign of `∂f/∂u`.
pub fn optimal_gendyne(r: f64) -> Result<GendyneOptimum> {
    ModelPoint::single(0.0, 0.0, r)?;
    let (lo, hi) = LOG_Z_BRACKET;
    let (u, _) = golden_section(|u| gendyne_gap(u.exp(), r).unwrap_or(f64::INFINITY), lo, hi, LOG_Z_TOL);
    if (u - lo).abs() < 1e-6 || (hi - u).abs() < 1e-6 {
        return Err(Error::NonConvergence(format!("z_opt search hit the bracket edge at ln z = {u}")));
    }
    let width = 0.05;
    let u = bisect_root(|v| gendyne_gap_log_slope(v.exp(), r), u - width, u + width, 1e-14).unwrap_or(u);
    let f_opt = gendyne_gap(u.exp(), r)?;
    if !f_opt.is_finite() {
        return Err(Error::NonConvergence(format!("non-finite gap at ln z = {u}")));
    }
    Ok(GendyneOptimum { z_opt: u.exp(), f_opt })
}

fn check_model(p: &ModelPoint, fp: &SubspaceFreeParams) -> Result<()> {
    if p.model() != fp.model {
        return Err(Error::WrongLength { expected: p.model().free_param_count(), actual: fp.values.len() });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn single_fp(b: f64, g: f64, d: f64) -> SubspaceFreeParams {
        SubspaceFreeParams::new(Model::SingleMode, vec![b, g, d]).unwrap()
    }

    /// The printed single-mode Z, with the (3,1) entry made Hermitian.
    fn printed_single_z(r: f64, b: f64, g: f64, d: f64) -> Matrix3<Complex64> {
        let s = FRAC_1_SQRT_2;
        Matrix3::new(
            c((2.0 * r).exp() / 4.0 + b * b, 0.0),
            c(b * g, 0.25),
            c(b * d, b * s),
            c(b * g, -0.25),
            c((-2.0 * r).exp() / 4.0 + g * g, 0.0),
            c(g * d, g * s),
            c(b * d, -b * s),
            c(g * d, -g * s),
            c(0.5 + d * d, 0.0),
        )
    }

    fn printed_single_h(r: f64, b: f64, g: f64, d: f64) -> f64 {
        ((2.0 * r).cosh() + 1.0) / 2.0 + b * b + g * g + d * d + 0.5 * (1.0 + 8.0 * b * b + 8.0 * g * g).sqrt()
    }

    #[test]
    fn single_z_at_origin() {
        let r: f64 = 0.5;
        let z = z_matrix_single(r, &single_fp(0.0, 0.0, 0.0)).unwrap();
        let e = z.entries();
        assert_relative_eq!(e[(0, 0)].re, r.exp().powi(2) / 4.0, epsilon = 1e-15);
        assert_relative_eq!(e[(1, 1)].re, (-2.0 * r).exp() / 4.0, epsilon = 1e-15);
        assert_relative_eq!(e[(2, 2)].re, 0.5, epsilon = 1e-15);
        assert_relative_eq!(e[(0, 1)].im, 0.25, epsilon = 1e-15);
        assert_relative_eq!(e[(0, 1)].re, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn single_z_entry() {
        let z = z_matrix_single(0.3, &single_fp(0.2, 0.0, 0.0)).unwrap();
        assert_relative_eq!(z.entries()[(0, 0)].re, 0.6f64.exp() / 4.0 + 0.04, epsilon = 1e-15);
    }

    #[test]
    fn h_matches_closed_expression() {
        let r = 0.0;
        let got = h_value(&z_matrix_single(r, &single_fp(0.1, 0.2, 0.3)).unwrap());
        assert_relative_eq!(got, printed_single_h(r, 0.1, 0.2, 0.3), epsilon = 1e-13);
        for r in [0.0, 0.4, 1.3] {
            let h0 = h_value(&z_matrix_single(r, &single_fp(0.0, 0.0, 0.0)).unwrap());
            assert_relative_eq!(h0, hcrb_closed(&ModelPoint::single(0.0, 0.0, r).unwrap()), epsilon = 1e-13);
        }
    }

    #[test]
    fn h_of_real_diagonal() {
        let z = ZMatrix::new(Matrix3::from_diagonal(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)].into())).unwrap();
        assert_eq!(h_value(&z), 6.0);
    }

    #[test]
    fn two_mode_z_at_origin() {
        // At x = 0, r = 0 the three X operators live on disjoint basis
        // vectors (λ₃, λ₂ and λ₅), so Z is diag(½, ½, ½).
        let z = z_matrix_two(0.0, &SubspaceFreeParams::zeros(Model::TwoMode)).unwrap();
        let e = z.entries();
        for j in 0..3 {
            assert_relative_eq!(e[(j, j)].re, 0.5, epsilon = 1e-15);
        }
        assert_relative_eq!(e[(0, 1)].norm(), 0.0, epsilon = 1e-15);
        assert_relative_eq!(h_value(&z), 1.5, epsilon = 1e-15);
    }

    #[test]
    fn wrong_lengths_are_rejected() {
        assert!(matches!(
            SubspaceFreeParams::new(Model::TwoMode, vec![0.0; 3]),
            Err(Error::WrongLength { expected: 15, actual: 3 })
        ));
        assert!(z_matrix_two(0.1, &single_fp(0.0, 0.0, 0.0)).is_err());
        assert!(z_matrix_single(0.1, &SubspaceFreeParams::zeros(Model::TwoMode)).is_err());
    }

    #[test]
    fn objective_matches_generic_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for model in [Model::SingleMode, Model::TwoMode] {
            for _ in 0..50 {
                let x: Vec<f64> = (0..model.free_param_count()).map(|_| rng.random_range(-2.0..2.0)).collect();
                let r = rng.random_range(0.0..1.5);
                let fp = SubspaceFreeParams::new(model, x.clone()).unwrap();
                let generic = h_value(&z_matrix(r, &fp).unwrap());
                assert_relative_eq!(h_objective(model, r, &x, 0.0), generic, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn minimize_single_mode_at_zero_squeezing() {
        let p = ModelPoint::single(0.0, 0.0, 0.0).unwrap();
        let est = minimize_h(&p, &MinimizerConfig { restarts: 4, ..Default::default() }).unwrap();
        assert_relative_eq!(est.value, 1.5, epsilon = 1e-10);
        assert!(est.argmin.values().iter().all(|v| v.abs() < 1e-5), "{:?}", est.argmin);
    }

    #[test]
    fn minimize_two_mode_small_grid() {
        for r in [0.0, 0.5] {
            let p = ModelPoint::two(0.0, 0.0, r).unwrap();
            let est = minimize_h(&p, &MinimizerConfig { restarts: 3, ..Default::default() }).unwrap();
            assert_relative_eq!(est.value, 0.25 + (-2.0 * r).exp(), epsilon = 1e-6);
        }
    }

    #[test]
    fn minimize_is_deterministic() {
        let p = ModelPoint::two(0.1, 0.2, 0.3).unwrap();
        let cfg = MinimizerConfig { restarts: 2, seed: 11, ..Default::default() };
        assert_eq!(minimize_h(&p, &cfg).unwrap(), minimize_h(&p, &cfg).unwrap());
    }

    #[test]
    fn starved_minimizer_reports_failure() {
        let p = ModelPoint::two(0.0, 0.0, 0.5).unwrap();
        let cfg = MinimizerConfig { restarts: 2, max_iter: 10, ..Default::default() };
        assert!(matches!(minimize_h(&p, &cfg), Err(Error::NonConvergence(_))));
        assert!(MinimizerConfig { restarts: 0, ..Default::default() }.validate().is_err());
        assert!(MinimizerConfig { tol: 0.0, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn closed_forms() {
        let s = |r| ModelPoint::single(0.0, 0.0, r).unwrap();
        let t = |r| ModelPoint::two(0.0, 0.0, r).unwrap();
        assert_relative_eq!(hcrb_closed(&s(1.0)), 2.88109, epsilon = 1e-5);
        assert_relative_eq!(hcrb_closed(&s(0.0)), 1.5);
        assert_relative_eq!(hcrb_closed(&t(1.0)), 0.385335, epsilon = 1e-6);
        assert!(hcrb_closed_is_derived(Model::SingleMode));
        assert!(!hcrb_closed_is_derived(Model::TwoMode));
    }

    #[test]
    fn gendyne_gap_values() {
        assert_relative_eq!(gendyne_gap(1.0, 0.0).unwrap(), 0.5, epsilon = 1e-14);
        assert!(gendyne_gap(1.0, 2.0).unwrap() < 0.02);
        assert!(gendyne_gap(0.0, 1.0).is_err());
    }

    #[test]
    fn optimal_gendyne_at_zero_squeezing() {
        let opt = optimal_gendyne(0.0).unwrap();
        assert!((opt.z_opt - 1.0).abs() < 1e-12, "{opt:?}");
        assert_relative_eq!(opt.f_opt, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn log_slope_matches_finite_difference() {
        for (z, r) in [(0.3, 0.0), (1.7, 0.8), (0.6, 2.0)] {
            let h: f64 = 1e-6;
            let fd = (gendyne_gap(z * h.exp(), r).unwrap() - gendyne_gap(z * (-h).exp(), r).unwrap()) / (2.0 * h);
            assert!((fd - gendyne_gap_log_slope(z, r)).abs() < 1e-8);
        }
    }

    #[test]
    fn optimal_gendyne_matches_dense_scan() {
        for r in [0.3, 1.0, 2.2] {
            let opt = optimal_gendyne(r).unwrap();
            let scan_min = (0..=24_000)
                .map(|i| gendyne_gap((-6.0 + 12.0 * i as f64 / 24_000.0).exp(), r).unwrap())
                .fold(f64::INFINITY, f64::min);
            assert!(opt.f_opt <= scan_min + 1e-12);
            assert!(scan_min - opt.f_opt < 1e-7);
        }
    }

    proptest! {
        #[test]
        fn single_z_matches_printed_matrix(r in 0.0..1.5f64, b in -2.0..2.0f64, g in -2.0..2.0f64, d in -2.0..2.0f64) {
            let z = z_matrix_single(r, &single_fp(b, g, d)).unwrap();
            let diff = (z.entries() - printed_single_z(r, b, g, d)).iter().map(|v| v.norm()).fold(0.0, f64::max);
            prop_assert!(diff < 1e-12);
            prop_assert!((h_value(&z) - printed_single_h(r, b, g, d)).abs() < 1e-11);
        }

        #[test]
        fn locally_unbiased_both_models(
            r in 0.0..1.5f64,
            t1 in -1.0..1.0f64,
            t2 in -1.0..1.0f64,
            xs in proptest::collection::vec(-2.0..2.0f64, 15),
        ) {
            let single = SubspaceFreeParams::new(Model::SingleMode, xs[..3].to_vec()).unwrap();
            let p = ModelPoint::single(t1, t2, r).unwrap();
            prop_assert!(locally_unbiased_residual(&p, &single).unwrap() < 1e-10);

            let two = SubspaceFreeParams::new(Model::TwoMode, xs.clone()).unwrap();
            let p = ModelPoint::two(t1, t2, r).unwrap();
            prop_assert!(locally_unbiased_residual(&p, &two).unwrap() < 1e-10);
        }

        #[test]
        fn z_structure_and_holevo_above_sld(r in 0.0..1.5f64, xs in proptest::collection::vec(-2.0..2.0f64, 15)) {
            for fp in [
                SubspaceFreeParams::new(Model::SingleMode, xs[..3].to_vec()).unwrap(),
                SubspaceFreeParams::new(Model::TwoMode, xs.clone()).unwrap(),
            ] {
                let z = z_matrix(r, &fp).unwrap();
                let re = z.real_part();
                prop_assert!(re.symmetric_eigenvalues().min() > -1e-12);
                prop_assert!((0..3).all(|i| z.entries()[(i, i)].im.abs() < 1e-15 && z.entries()[(i, i)].re >= 0.0));
                let p = ModelPoint::new(fp.model(), [0.0, 0.0, r]).unwrap();
                prop_assert!(h_value(&z) >= bounds::sld_crb(&p) - 1e-12);
            }
        }
    }
}
