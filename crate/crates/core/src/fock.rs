//! Truncated Fock-space oracle.
//!
//! States are built by exponentiating the displacement, squeezing,
//! two-mode squeezing and beam-splitter generators directly, and derivatives
//! are taken by central finite differences. Nothing here uses the closed
//! forms of [`crate::bounds`] or [`crate::hcrb`], so the two can be checked
//! against each other.
//!
//! Two-mode vectors are stored row-major with mode 1 as the slow index:
//! `|n⟩ ⊗ |m⟩ ↦ n·N + m`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use nalgebra::{DMatrix, DVector, Matrix3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{Model, ModelPoint};

type CVec = DVector<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative size of the last Taylor term kept by the exponentials.
const TAYLOR_CUTOFF: f64 = 1e-18;
const TAYLOR_MAX_TERMS: usize = 200;

/// Dense single-mode annihilation operator on `{|0⟩, …, |N−1⟩}`.
pub fn mode_lowering_matrix(n: usize) -> Result<DMatrix<Complex64>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("Fock truncation must be at least 2, got {n}")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| if j == i + 1 { Complex64::new((j as f64).sqrt(), 0.0) } else { ZERO }))
}

/// `exp(G)` for an anti-Hermitian `G` by scaling and squaring of a Taylor series.
pub fn unitary_from_generator(g: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    if !g.is_square() {
        return Err(Error::DimensionMismatch { expected: g.nrows(), actual: g.ncols() });
    }
    let defect = (g + g.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if defect > linalg::HERMITIAN_TOL {
        return Err(Error::NotAntiHermitian { defect });
    }
    let n = g.nrows();
    let norm = (0..n).map(|j| g.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = g / Complex64::new(2f64.powi(squarings as i32), 0.0);

    let mut result = DMatrix::<Complex64>::identity(n, n);
    let mut term = DMatrix::<Complex64>::identity(n, n);
    for k in 1..=TAYLOR_MAX_TERMS {
        term = &scaled * term / Complex64::new(k as f64, 0.0);
        result += &term;
        if term.iter().map(|z| z.norm()).fold(0.0, f64::max) < TAYLOR_CUTOFF {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    Ok(result)
}

/// Sparse operator in compressed-row form.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl SparseOperator {
    fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, Complex64)>) -> Self {
        triplets.retain(|t| t.2 != ZERO);
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0; dim + 1];
        for &(i, _, _) in &triplets {
            row_ptr[i + 1] += 1;
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            dim,
            row_ptr,
            cols: triplets.iter().map(|t| t.1).collect(),
            vals: triplets.iter().map(|t| t.2).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, x: &CVec) -> CVec {
        let mut y = CVec::zeros(self.dim);
        for i in 0..self.dim {
            let mut acc = ZERO;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            y[i] = acc;
        }
        y
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        let mut sums = vec![0.0; self.dim];
        for (c, v) in self.cols.iter().zip(&self.vals) {
            sums[*c] += v.norm();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    pub fn adjoint(&self) -> Self {
        let triplets = (0..self.dim)
            .flat_map(|i| (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, k)))
            .map(|(i, k)| (self.cols[k], i, self.vals[k].conj()))
            .collect();
        Self::from_triplets(self.dim, triplets)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.cols[k])] += self.vals[k];
            }
        }
        m
    }

    /// `exp(G)·v`, stepping so that each Taylor series has `‖Δt·G‖₁ ≤ 1`.
    pub fn exp_apply(&self, v: &CVec) -> CVec {
        let steps = self.norm1().ceil().max(1.0) as usize;
        let dt = 1.0 / steps as f64;
        let mut x = v.clone();
        for _ in 0..steps {
            let scale = x.norm();
            let mut term = x.clone();
            for k in 1..=TAYLOR_MAX_TERMS {
                term = self.apply(&term) * Complex64::new(dt / k as f64, 0.0);
                x += &term;
                if term.norm() <= TAYLOR_CUTOFF * scale {
                    break;
                }
            }
        }
        x
    }
}

/// Single-mode ladder terms `(row, col, value)` of `a` on N levels.
fn lowering_terms(n: usize) -> Vec<(usize, usize, f64)> {
    (1..n).map(|k| (k - 1, k, (k as f64).sqrt())).collect()
}

fn adjoint_terms(t: &[(usize, usize, f64)]) -> Vec<(usize, usize, f64)> {
    t.iter().map(|&(i, j, v)| (j, i, v)).collect()
}

fn lowering_squared_terms(n: usize) -> Vec<(usize, usize, f64)> {
    (2..n).map(|k| (k - 2, k, ((k * (k - 1)) as f64).sqrt())).collect()
}

/// `Σ c·A` for single-mode operators given by real ladder terms.
fn single_mode_op(n: usize, parts: &[(Complex64, Vec<(usize, usize, f64)>)]) -> SparseOperator {
    let triplets =
        parts.iter().flat_map(|(c, t)| t.iter().map(move |&(i, j, v)| (i, j, c * v))).collect();
    SparseOperator::from_triplets(n, triplets)
}

/// `Σ c·(A ⊗ B)` on two modes of N levels each.
fn two_mode_op(
    n: usize,
    parts: &[(Complex64, Vec<(usize, usize, f64)>, Vec<(usize, usize, f64)>)],
) -> SparseOperator {
    let mut triplets = Vec::new();
    for (c, a, b) in parts {
        for &(i1, j1, v1) in a {
            for &(i2, j2, v2) in b {
                triplets.push((i1 * n + i2, j1 * n + j2, c * (v1 * v2)));
            }
        }
    }
    SparseOperator::from_triplets(n * n, triplets)
}

fn identity_terms(n: usize) -> Vec<(usize, usize, f64)> {
    (0..n).map(|k| (k, k, 1.0)).collect()
}

/// Generator of `D(α) = exp(α a† − α* a)`.
pub fn displacement_generator(n: usize, alpha: Complex64) -> SparseOperator {
    let a = lowering_terms(n);
    single_mode_op(n, &[(alpha, adjoint_terms(&a)), (-alpha.conj(), a)])
}

/// Generator of `S(r) = exp(½(r a†² − r a²))` for real `r`.
pub fn squeezing_generator(n: usize, r: f64) -> SparseOperator {
    let a2 = lowering_squared_terms(n);
    let h = Complex64::new(r / 2.0, 0.0);
    single_mode_op(n, &[(h, adjoint_terms(&a2)), (-h, a2)])
}

/// Generator of `S₂(r) = exp(r(a†b† − ab))`.
pub fn two_mode_squeezing_generator(n: usize, r: f64) -> SparseOperator {
    let a = lowering_terms(n);
    let rc = Complex64::new(r, 0.0);
    two_mode_op(n, &[(rc, adjoint_terms(&a), adjoint_terms(&a)), (-rc, a.clone(), a)])
}

/// Generator of the displacement of mode 1 alone, `D(α) ⊗ I`.
pub fn mode1_displacement_generator(n: usize, alpha: Complex64) -> SparseOperator {
    let a = lowering_terms(n);
    let id = identity_terms(n);
    two_mode_op(n, &[(alpha, adjoint_terms(&a), id.clone()), (-alpha.conj(), a, id)])
}

/// Generator of the balanced beam splitter, `(π/4)(a† b − a b†)`.
pub fn beam_splitter_generator(n: usize) -> SparseOperator {
    let a = lowering_terms(n);
    let t = Complex64::new(FRAC_PI_4, 0.0);
    two_mode_op(n, &[(-t, a.clone(), adjoint_terms(&a)), (t, adjoint_terms(&a), a)])
}

/// Truncation settings of the oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    /// Fock levels per mode.
    pub n: usize,
    /// Largest weight allowed on the last 10% of levels of any mode.
    pub tail_tol: f64,
    /// Central finite-difference step.
    pub fd_step: f64,
}

pub const DEFAULT_TAIL_TOL: f64 = 1e-10;
pub const DEFAULT_FD_STEP: f64 = 1e-5;
pub const DEFAULT_N_SINGLE: usize = 200;
pub const DEFAULT_N_TWO: usize = 100;
/// Levels per mode for the beam-splitter check. The truncated exponentials
/// err by roughly the amplitude at the cutoff, so a `1e-8` residual needs a
/// tail far below `tail_tol`.
pub const DEFAULT_N_FACTORIZATION: usize = 260;

impl TruncationPolicy {
    pub fn new(n: usize, tail_tol: f64, fd_step: f64) -> Result<Self> {
        if n < 20 {
            return Err(Error::InvalidParameter(format!("truncation N must be at least 20, got {n}")));
        }
        if !(tail_tol > 0.0 && tail_tol < 1.0) {
            return Err(Error::InvalidParameter(format!("tail tolerance must lie in (0, 1), got {tail_tol}")));
        }
        if !(fd_step > 0.0 && fd_step.is_finite()) {
            return Err(Error::InvalidParameter(format!("finite-difference step must be positive, got {fd_step}")));
        }
        Ok(Self { n, tail_tol, fd_step })
    }

    pub fn with_n(n: usize) -> Result<Self> {
        Self::new(n, DEFAULT_TAIL_TOL, DEFAULT_FD_STEP)
    }

    pub fn for_model(model: Model) -> Self {
        let n = match model {
            Model::SingleMode => DEFAULT_N_SINGLE,
            Model::TwoMode => DEFAULT_N_TWO,
        };
        Self { n, tail_tol: DEFAULT_TAIL_TOL, fd_step: DEFAULT_FD_STEP }
    }

    pub fn factorization_default() -> Self {
        Self { n: DEFAULT_N_FACTORIZATION, ..Self::for_model(Model::TwoMode) }
    }

    /// First level counted as tail.
    fn tail_start(&self) -> usize {
        (self.n * 9).div_ceil(10)
    }
}

/// A normalized state of one or two truncated modes.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    n: usize,
    modes: usize,
    amplitudes: CVec,
}

impl FockVector {
    /// Validates the length, the norm and the tail weight against `policy`.
    pub fn new(amplitudes: CVec, modes: usize, policy: &TruncationPolicy) -> Result<Self> {
        let n = policy.n;
        let expected = match modes {
            1 => n,
            2 => n * n,
            _ => return Err(Error::InvalidParameter(format!("{modes} modes are not supported"))),
        };
        if amplitudes.len() != expected {
            return Err(Error::DimensionMismatch { expected, actual: amplitudes.len() });
        }
        let v = Self { n, modes, amplitudes };
        let tail = v.tail_weight(policy.tail_start());
        if tail >= policy.tail_tol {
            return Err(Error::TruncationBudget { tail, tol: policy.tail_tol, n });
        }
        let norm2 = v.amplitudes.norm_squared();
        if norm2 < 1.0 - policy.tail_tol || norm2 > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(format!("state norm² {norm2} outside the truncation budget")));
        }
        Ok(v)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amplitudes
    }

    /// Weight on levels `≥ start` of any mode.
    pub fn tail_weight(&self, start: usize) -> f64 {
        let n = self.n;
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(k, _)| match self.modes {
                1 => *k >= start,
                _ => k / n >= start || k % n >= start,
            })
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &CVec) -> Complex64 {
        self.amplitudes.dotc(other)
    }
}

/// `D(α) S(r) |k⟩` for real `r`, which may be negative.
pub fn displaced_squeezed_number_state(
    alpha: Complex64,
    r: f64,
    k: usize,
    policy: &TruncationPolicy,
) -> Result<FockVector> {
    let n = policy.n;
    if k >= n {
        return Err(Error::InvalidParameter(format!("level {k} outside truncation {n}")));
    }
    let mut v = CVec::zeros(n);
    v[k] = ONE;
    let v = squeezing_generator(n, r).exp_apply(&v);
    let v = displacement_generator(n, alpha).exp_apply(&v);
    FockVector::new(v, 1, policy)
}

fn two_mode_raw(alpha: Complex64, r: f64, n: usize) -> CVec {
    let mut v = CVec::zeros(n * n);
    v[0] = ONE;
    let v = two_mode_squeezing_generator(n, r).exp_apply(&v);
    mode1_displacement_generator(n, alpha).exp_apply(&v)
}

/// The model state: `D(α)S(r)|0⟩` or `(D(α) ⊗ I) S₂(r)|00⟩`.
pub fn model_state(p: &ModelPoint, policy: &TruncationPolicy) -> Result<FockVector> {
    match p.model() {
        Model::SingleMode => displaced_squeezed_number_state(p.alpha(), p.r(), 0, policy),
        Model::TwoMode => FockVector::new(two_mode_raw(p.alpha(), p.r(), policy.n), 2, policy),
    }
}

/// `|a⟩ ⊗ |b⟩`
pub fn kron(a: &CVec, b: &CVec) -> CVec {
    let n = b.len();
    CVec::from_fn(a.len() * n, |k, _| a[k / n] * b[k % n])
}

fn beam_split(v: &CVec, n: usize) -> CVec {
    beam_splitter_generator(n).exp_apply(v)
}

/// The beam-splitter frame basis vectors `e_k = D(α/√2)S(r)|k⟩` and
/// `f_k = D(−α/√2)S(−r)|k⟩` for `k = 0, 1, 2`.
fn factor_bases(p: &ModelPoint, policy: &TruncationPolicy) -> Result<(Vec<CVec>, Vec<CVec>)> {
    let half = p.alpha() * FRAC_1_SQRT_2;
    let mut e = Vec::new();
    let mut f = Vec::new();
    for k in 0..3 {
        e.push(displaced_squeezed_number_state(half, p.r(), k, policy)?.amplitudes);
        f.push(displaced_squeezed_number_state(-half, -p.r(), k, policy)?.amplitudes);
    }
    Ok((e, f))
}

/// `‖U_BS|ψ_θ⟩ − D(α/√2)S(r)|0⟩ ⊗ D(−α/√2)S(−r)|0⟩‖` for the two-mode model.
pub fn bs_factorization_check(p: &ModelPoint, policy: &TruncationPolicy) -> Result<f64> {
    if p.model() != Model::TwoMode {
        return Err(Error::WrongModel { expected: "two-mode" });
    }
    let psi = model_state(p, policy)?;
    let rotated = FockVector::new(beam_split(&psi.amplitudes, policy.n), 2, policy)?;
    let (e, f) = factor_bases(p, policy)?;
    Ok((rotated.amplitudes - kron(&e[0], &f[0])).norm())
}

/// A state with its finite-difference parameter derivatives.
#[derive(Debug, Clone)]
pub struct FockDerivatives {
    pub state: FockVector,
    pub d: [CVec; 3],
}

/// Central differences `(|ψ(θ + h e_μ)⟩ − |ψ(θ − h e_μ)⟩) / 2h`. At `r < h`
/// the squeezing derivative falls back to a forward difference of step `h`
/// and `2h`, which keeps the `O(h²)` error.
pub fn fd_derivatives(p: &ModelPoint, policy: &TruncationPolicy) -> Result<FockDerivatives> {
    let state = model_state(p, policy)?;
    let h = policy.fd_step;
    let mut d: [CVec; 3] = Default::default();
    for (mu, slot) in d.iter_mut().enumerate() {
        let at = |delta: f64| -> Result<CVec> { Ok(model_state(&p.shifted(mu, delta), policy)?.amplitudes) };
        *slot = if mu == 2 && p.r() < h {
            let (f1, f2) = (at(h)?, at(2.0 * h)?);
            (f1 * Complex64::new(4.0, 0.0) - f2 - state.amplitudes.clone() * Complex64::new(3.0, 0.0))
                / Complex64::new(2.0 * h, 0.0)
        } else {
            (at(h)? - at(-h)?) / Complex64::new(2.0 * h, 0.0)
        };
    }
    Ok(FockDerivatives { state, d })
}

/// Finite-difference derivatives of the two-mode model carried to the
/// beam-splitter frame, `U_BS|∂_μψ⟩`.
pub fn fd_derivatives_beam_split(p: &ModelPoint, policy: &TruncationPolicy) -> Result<FockDerivatives> {
    if p.model() != Model::TwoMode {
        return Err(Error::WrongModel { expected: "two-mode" });
    }
    let raw = fd_derivatives(p, policy)?;
    let n = policy.n;
    let state = FockVector::new(beam_split(&raw.state.amplitudes, n), 2, policy)?;
    let d = [beam_split(&raw.d[0], n), beam_split(&raw.d[1], n), beam_split(&raw.d[2], n)];
    Ok(FockDerivatives { state, d })
}

/// Derivatives expanded in the derivative-subspace basis.
#[derive(Debug, Clone)]
pub struct SubspaceProjection {
    /// Row μ holds the components of `|∂_μψ⟩`; columns follow
    /// `{e₀, e₁, e₂}` or `{λ₁, …, λ₅} = {e₀f₀, e₀f₁, e₁f₀, e₀f₂, e₂f₀}`.
    pub coeffs: DMatrix<Complex64>,
    /// Largest norm of a derivative's component outside the subspace.
    pub outside_norm: f64,
    /// `‖|ψ⟩ − |e₀⟩‖` or `‖U_BS|ψ⟩ − |λ₁⟩‖`.
    pub state_residual: f64,
}

pub fn subspace_projection(p: &ModelPoint, policy: &TruncationPolicy) -> Result<SubspaceProjection> {
    let (basis, derivs) = match p.model() {
        Model::SingleMode => {
            let basis = (0..3)
                .map(|k| Ok(displaced_squeezed_number_state(p.alpha(), p.r(), k, policy)?.amplitudes))
                .collect::<Result<Vec<_>>>()?;
            (basis, fd_derivatives(p, policy)?)
        }
        Model::TwoMode => {
            let (e, f) = factor_bases(p, policy)?;
            let basis = vec![
                kron(&e[0], &f[0]),
                kron(&e[0], &f[1]),
                kron(&e[1], &f[0]),
                kron(&e[0], &f[2]),
                kron(&e[2], &f[0]),
            ];
            (basis, fd_derivatives_beam_split(p, policy)?)
        }
    };
    let coeffs = DMatrix::from_fn(3, basis.len(), |mu, i| basis[i].dotc(&derivs.d[mu]));
    let mut outside_norm: f64 = 0.0;
    for mu in 0..3 {
        let mut rest = derivs.d[mu].clone();
        for (i, b) in basis.iter().enumerate() {
            rest -= b * coeffs[(mu, i)];
        }
        outside_norm = outside_norm.max(rest.norm());
    }
    let state_residual = (derivs.state.amplitudes() - &basis[0]).norm();
    Ok(SubspaceProjection { coeffs, outside_norm, state_residual })
}

/// `Q_{μν} = 4 Re G_{μν}` and `D_{μν} = 4 Im G_{μν}` with
/// `G_{μν} = ⟨∂_μψ|∂_νψ⟩ − ⟨∂_μψ|ψ⟩⟨ψ|∂_νψ⟩`, from finite differences.
pub fn oracle_qfi_uhlmann(p: &ModelPoint, policy: &TruncationPolicy) -> Result<(Matrix3<f64>, Matrix3<f64>)> {
    let fd = fd_derivatives(p, policy)?;
    let psi = fd.state.amplitudes();
    let overlaps: Vec<Complex64> = fd.d.iter().map(|d| psi.dotc(d)).collect();
    let g = Matrix3::from_fn(|mu, nu| fd.d[mu].dotc(&fd.d[nu]) - overlaps[mu].conj() * overlaps[nu]);
    Ok((g.map(|z| 4.0 * z.re), g.map(|z| 4.0 * z.im)))
}

/// Largest Frobenius residual of `(L_μρ + ρL_μ)/2 − ∂_μρ` over μ, with
/// `L_μ = 2(|ψ⟩⟨∂_μψ| + |∂_μψ⟩⟨ψ|)` and all operators formed densely.
pub fn sld_lyapunov_residual(p: &ModelPoint, policy: &TruncationPolicy) -> Result<f64> {
    if p.model() != Model::SingleMode {
        return Err(Error::WrongModel { expected: "single-mode" });
    }
    let fd = fd_derivatives(p, policy)?;
    let psi = fd.state.amplitudes();
    let rho = psi * psi.adjoint();
    let two = Complex64::new(2.0, 0.0);
    let mut worst: f64 = 0.0;
    for d in &fd.d {
        let d_rho = d * psi.adjoint() + psi * d.adjoint();
        let sld = &d_rho * two;
        let lhs = (&sld * &rho + &rho * &sld) / two;
        worst = worst.max((lhs - d_rho).norm());
    }
    Ok(worst)
}

/// Phase-space moments of a Fock state in the convention of
/// [`crate::gaussian`]: the mean of `x̂ = (a + a†)/√2`, `p̂ = (a − a†)/(i√2)`
/// and the covariance in vacuum-noise units, so that the vacuum has `σ = I`.
pub fn quadrature_moments(v: &FockVector) -> (DVector<f64>, DMatrix<f64>) {
    let n = v.n;
    let lowering: Vec<SparseOperator> = match v.modes {
        1 => vec![single_mode_op(n, &[(ONE, lowering_terms(n))])],
        _ => vec![
            two_mode_op(n, &[(ONE, lowering_terms(n), identity_terms(n))]),
            two_mode_op(n, &[(ONE, identity_terms(n), lowering_terms(n))]),
        ],
    };
    let psi = &v.amplitudes;
    let mut quads: Vec<CVec> = Vec::new();
    for a in &lowering {
        let a_psi = a.apply(psi);
        let adag_psi = a.adjoint().apply(psi);
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        quads.push((&a_psi + &adag_psi) * s);
        quads.push((&a_psi - &adag_psi) * (s / I));
    }
    let mean = DVector::from_iterator(quads.len(), quads.iter().map(|q| psi.dotc(q).re));
    let centered: Vec<CVec> =
        quads.iter().zip(mean.iter()).map(|(q, m)| q - psi * Complex64::new(*m, 0.0)).collect();
    let cov = DMatrix::from_fn(quads.len(), quads.len(), |k, l| 2.0 * centered[k].dotc(&centered[l]).re);
    (mean, cov)
}

/// Quadrature moments of the model state in the frame where measurements
/// act, after the beam splitter for the two-mode model.
pub fn model_quadrature_moments(p: &ModelPoint, policy: &TruncationPolicy) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let psi = model_state(p, policy)?;
    match p.model() {
        Model::SingleMode => Ok(quadrature_moments(&psi)),
        Model::TwoMode => {
            let rotated = FockVector::new(beam_split(psi.amplitudes(), policy.n), 2, policy)?;
            Ok(quadrature_moments(&rotated))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn policy(n: usize) -> TruncationPolicy {
        TruncationPolicy::with_n(n).unwrap()
    }

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    #[test]
    fn lowering_matrix() {
        let a = mode_lowering_matrix(3).unwrap();
        let expected = [[0.0, 1.0, 0.0], [0.0, 0.0, 2f64.sqrt()], [0.0, 0.0, 0.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(a[(i, j)], Complex64::new(expected[i][j], 0.0));
            }
        }
        assert!(mode_lowering_matrix(1).is_err());
    }

    #[test]
    fn commutator_defect_sits_in_the_corner() {
        let n = 12;
        let a = mode_lowering_matrix(n).unwrap();
        let comm = &a * a.adjoint() - a.adjoint() * &a;
        for i in 0..n {
            for j in 0..n {
                let expected = match (i == j, i == n - 1) {
                    (true, false) => 1.0,
                    (true, true) => 1.0 - n as f64,
                    _ => 0.0,
                };
                assert_relative_eq!(comm[(i, j)].re, expected, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn lowering_acts_on_one_photon() {
        let a = mode_lowering_matrix(5).unwrap();
        let mut one = CVec::zeros(5);
        one[1] = ONE;
        let out = a * one;
        assert_eq!(out[0], ONE);
        assert_eq!(out.iter().filter(|z| **z != ZERO).count(), 1);
    }

    #[test]
    fn zero_generator_gives_identity() {
        let u = unitary_from_generator(&DMatrix::zeros(6, 6)).unwrap();
        assert_eq!(u, DMatrix::identity(6, 6));
    }

    #[test]
    fn non_anti_hermitian_generator_is_rejected() {
        let g = DMatrix::from_element(2, 2, ONE);
        assert!(matches!(unitary_from_generator(&g), Err(Error::NotAntiHermitian { .. })));
    }

    #[test]
    fn dense_displacement_matches_coherent_series() {
        let n = 40;
        let alpha = 0.3;
        let g = displacement_generator(n, Complex64::new(alpha, 0.0)).to_dense();
        let u = unitary_from_generator(&g).unwrap();
        let unitarity = (&u * u.adjoint() - DMatrix::identity(n, n)).norm();
        assert!(unitarity < 1e-9, "{unitarity}");
        for k in 0..n {
            let expected = (-alpha * alpha / 2.0).exp() * alpha.powi(k as i32) / factorial(k as u32).sqrt();
            assert!((u[(k, 0)] - Complex64::new(expected, 0.0)).norm() < 1e-12, "level {k}");
        }
    }

    #[test]
    fn sparse_and_dense_exponentials_agree() {
        let n = 30;
        let g = squeezing_generator(n, 0.4);
        let dense = unitary_from_generator(&g.to_dense()).unwrap();
        let mut v = CVec::zeros(n);
        v[3] = ONE;
        let diff = (dense * &v - g.exp_apply(&v)).norm();
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn generators_are_anti_hermitian() {
        let n = 8;
        let gens = [
            displacement_generator(n, Complex64::new(0.3, -0.4)),
            squeezing_generator(n, 0.7),
            two_mode_squeezing_generator(n, 0.5),
            mode1_displacement_generator(n, Complex64::new(-0.2, 0.9)),
            beam_splitter_generator(n),
        ];
        for g in gens {
            let d = g.to_dense();
            assert!((&d + d.adjoint()).norm() < 1e-14);
        }
    }

    #[test]
    fn squeezed_vacuum_has_only_even_levels() {
        let v = displaced_squeezed_number_state(ZERO, 0.4, 0, &policy(60)).unwrap();
        for k in (1..60).step_by(2) {
            assert!(v.amplitudes()[k].norm() < 1e-15);
        }
        // ⟨2|S(r)|0⟩ = tanh r / (√2 cosh^{1/2} r)
        let expected = 0.4f64.tanh() / (2f64.sqrt() * 0.4f64.cosh().sqrt());
        assert_relative_eq!(v.amplitudes()[2].re, expected, epsilon = 1e-13);
    }

    #[test]
    fn vacuum_point_is_vacuum() {
        let v = model_state(&ModelPoint::single(0.0, 0.0, 0.0).unwrap(), &policy(30)).unwrap();
        assert_eq!(v.amplitudes()[0], ONE);
        assert_relative_eq!(v.amplitudes().norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn model_state_is_orthogonal_to_e2() {
        let pol = policy(120);
        let p = ModelPoint::single(0.3, -0.2, 0.6).unwrap();
        let psi = model_state(&p, &pol).unwrap();
        let e2 = displaced_squeezed_number_state(p.alpha(), 0.6, 2, &pol).unwrap();
        assert!(psi.inner(e2.amplitudes()).norm() < 1e-13);
    }

    #[test]
    fn two_mode_schmidt_coefficients() {
        let n = 40;
        let v = model_state(&ModelPoint::two(0.0, 0.0, 0.5).unwrap(), &policy(n)).unwrap();
        let t = 0.5f64.tanh();
        for k in 0..n {
            for m in 0..n {
                let amp = v.amplitudes()[k * n + m];
                let expected = if k == m { t.powi(k as i32) / 0.5f64.cosh() } else { 0.0 };
                assert!((amp - Complex64::new(expected, 0.0)).norm() < 1e-12, "({k},{m})");
            }
        }
    }

    #[test]
    fn truncation_budget_is_enforced() {
        let err = model_state(&ModelPoint::single(0.0, 0.0, 1.2).unwrap(), &policy(20)).unwrap_err();
        assert!(matches!(err, Error::TruncationBudget { n: 20, .. }));
        assert!(TruncationPolicy::with_n(19).is_err());
    }

    #[test]
    fn beam_splitter_factorizes_the_model() {
        let pol = policy(120);
        assert!(bs_factorization_check(&ModelPoint::two(0.0, 0.0, 0.0).unwrap(), &pol).unwrap() < 1e-14);
        let res = bs_factorization_check(&ModelPoint::two(0.5, 0.5, 0.8).unwrap(), &pol).unwrap();
        assert!(res < 1e-8, "{res}");
    }

    #[test]
    fn single_mode_derivatives_match_expansion() {
        let pol = policy(60);
        let proj = subspace_projection(&ModelPoint::single(0.0, 0.0, 0.0).unwrap(), &pol).unwrap();
        assert!((proj.coeffs[(2, 2)] - Complex64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-9);

        let proj = subspace_projection(&ModelPoint::single(0.3, 0.7, 0.5).unwrap(), &policy(120)).unwrap();
        assert!((proj.coeffs[(0, 1)] - Complex64::new((-0.5f64).exp(), 0.0)).norm() < 1e-9);
        assert!(proj.outside_norm < 1e-8);
    }

    #[test]
    fn two_mode_derivative_in_factored_basis() {
        let proj = subspace_projection(&ModelPoint::two(0.2, 0.1, 0.4).unwrap(), &policy(60)).unwrap();
        let expected = I * 0.4f64.exp() * FRAC_1_SQRT_2;
        assert!((proj.coeffs[(1, 2)] - expected).norm() < 1e-8, "{}", proj.coeffs);
        assert!(proj.state_residual < 1e-10);
    }

    #[test]
    fn qfi_at_vacuum() {
        let (q, d) = oracle_qfi_uhlmann(&ModelPoint::single(0.0, 0.0, 0.0).unwrap(), &policy(40)).unwrap();
        let expected = Matrix3::from_diagonal(&nalgebra::Vector3::new(4.0, 4.0, 2.0));
        assert!((q - expected).abs().max() < 1e-6, "{q}");
        assert_relative_eq!(d[(0, 1)], 4.0, epsilon = 1e-6);
    }

    #[test]
    fn lyapunov_equation_holds() {
        let res = sld_lyapunov_residual(&ModelPoint::single(0.2, -0.1, 0.3).unwrap(), &policy(60)).unwrap();
        assert!(res < 1e-6, "{res}");
        assert!(sld_lyapunov_residual(&ModelPoint::two(0.0, 0.0, 0.1).unwrap(), &policy(30)).is_err());
    }

    #[test]
    fn vacuum_quadratures() {
        let (mean, cov) = model_quadrature_moments(&ModelPoint::single(0.0, 0.0, 0.0).unwrap(), &policy(20)).unwrap();
        assert!(mean.norm() < 1e-15);
        assert!((cov - DMatrix::identity(2, 2)).norm() < 1e-14);
    }
}
