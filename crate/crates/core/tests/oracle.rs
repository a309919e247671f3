//! Cross-checks of the closed forms against the truncated Fock-space oracle.

use gausshcrb::bounds::{qfi_matrix, uhlmann_matrix};
use gausshcrb::fock::{self, TruncationPolicy};
use gausshcrb::gaussian::model_gaussian;
use gausshcrb::hcrb::derivative_coefficients;
use gausshcrb::{Model, ModelPoint};
use nalgebra::Matrix3;

const R_GRID: [f64; 6] = [0.0, 0.25, 0.5, 0.75, 1.0, 1.25];
const ALPHAS: [(f64, f64); 2] = [(0.0, 0.0), (0.3, 0.7)];

fn max_abs(m: Matrix3<f64>) -> f64 {
    m.abs().max()
}

#[test]
fn single_mode_qfi_and_curvature_match_oracle() {
    let pol = TruncationPolicy::for_model(Model::SingleMode);
    for r in R_GRID {
        for (t1, t2) in ALPHAS {
            let p = ModelPoint::single(t1, t2, r).unwrap();
            let (q, d) = fock::oracle_qfi_uhlmann(&p, &pol).unwrap();
            assert!(max_abs(q - qfi_matrix(&p).entries()) < 1e-6, "Q at {p:?}: {q}");
            assert!(max_abs(d - uhlmann_matrix(&p).entries()) < 1e-6, "D at {p:?}: {d}");
        }
    }
}

#[test]
fn two_mode_qfi_and_curvature_match_oracle() {
    let pol = TruncationPolicy::for_model(Model::TwoMode);
    for r in [0.0, 0.7, 1.25] {
        for (t1, t2) in ALPHAS {
            let p = ModelPoint::two(t1, t2, r).unwrap();
            let (q, d) = fock::oracle_qfi_uhlmann(&p, &pol).unwrap();
            assert!(max_abs(q - qfi_matrix(&p).entries()) < 1e-6, "Q at {p:?}: {q}");
            assert!(max_abs(d - uhlmann_matrix(&p).entries()) < 1e-6, "D at {p:?}: {d}");
        }
    }
}

#[test]
fn oracle_qfi_does_not_depend_on_displacement() {
    let pol = TruncationPolicy::for_model(Model::SingleMode);
    let r = 0.6;
    let (q0, d0) = fock::oracle_qfi_uhlmann(&ModelPoint::single(0.0, 0.0, r).unwrap(), &pol).unwrap();
    for (t1, t2) in [(0.5, 0.0), (-0.4, 0.9), (1.0, -1.0)] {
        let (q, d) = fock::oracle_qfi_uhlmann(&ModelPoint::single(t1, t2, r).unwrap(), &pol).unwrap();
        assert!(max_abs(q - q0) < 1e-6);
        assert!(max_abs(d - d0) < 1e-6);
    }
}

#[test]
fn derivative_expansion_matches_oracle_projection() {
    let points = [
        ModelPoint::single(0.0, 0.0, 0.0).unwrap(),
        ModelPoint::single(0.3, 0.7, 0.5).unwrap(),
        ModelPoint::single(-0.6, 0.2, 1.1).unwrap(),
        ModelPoint::two(0.2, 0.1, 0.4).unwrap(),
        ModelPoint::two(-0.5, 0.3, 0.9).unwrap(),
    ];
    for p in points {
        let pol = match p.model() {
            Model::SingleMode => TruncationPolicy::for_model(p.model()),
            Model::TwoMode => TruncationPolicy::with_n(160).unwrap(),
        };
        let proj = fock::subspace_projection(&p, &pol).unwrap();
        let expected = derivative_coefficients(&p);
        let diff = (&proj.coeffs - &expected).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-8, "{p:?}: {diff:e}\n{}\n{}", proj.coeffs, expected);
        assert!(proj.outside_norm < 1e-8, "{p:?}: derivative leaves the subspace by {:e}", proj.outside_norm);
        assert!(proj.state_residual < 1e-10);
    }
}

#[test]
fn beam_splitter_factorization_grid() {
    let pol = TruncationPolicy::factorization_default();
    for theta in [[0.0, 0.0, 0.5], [0.5, 0.5, 0.8], [1.0, 0.0, 1.2], [0.0, -0.7, 0.3]] {
        let p = ModelPoint::new(Model::TwoMode, theta).unwrap();
        let res = fock::bs_factorization_check(&p, &pol).unwrap();
        assert!(res < 1e-8, "{theta:?}: {res:e}");
    }
}

#[test]
fn sld_reconstruction_solves_lyapunov_equation() {
    let pol = TruncationPolicy::for_model(Model::SingleMode);
    for theta in [[0.0, 0.0, 0.0], [0.4, -0.3, 0.7], [1.0, 0.5, 1.2]] {
        let res = fock::sld_lyapunov_residual(&ModelPoint::new(Model::SingleMode, theta).unwrap(), &pol).unwrap();
        assert!(res < 1e-6, "{theta:?}: {res:e}");
    }
}

/// Settles the displacement sign convention: the phase-space moments of the
/// Fock states, after the beam splitter for two modes, equal the Gaussian
/// description used by the measurement formulas.
#[test]
fn phase_space_moments_match_gaussian_description() {
    for p in [
        ModelPoint::single(0.3, -0.4, 0.6).unwrap(),
        ModelPoint::two(0.3, -0.4, 0.6).unwrap(),
        ModelPoint::two(-0.8, 0.2, 0.1).unwrap(),
    ] {
        let pol = TruncationPolicy::for_model(p.model());
        let (mean, cov) = fock::model_quadrature_moments(&p, &pol).unwrap();
        let g = model_gaussian(&p).unwrap();
        assert!((&mean - g.mean()).amax() < 1e-9, "{p:?}: mean {mean} vs {}", g.mean());
        assert!((&cov - g.cov()).amax() < 1e-8, "{p:?}: cov {cov} vs {}", g.cov());
    }
}

#[test]
fn truncation_at_twenty_levels_fails_for_strong_squeezing() {
    let pol = TruncationPolicy::with_n(20).unwrap();
    let err = fock::model_state(&ModelPoint::single(0.0, 0.0, 1.2).unwrap(), &pol).unwrap_err();
    assert!(matches!(err, gausshcrb::Error::TruncationBudget { .. }));
}
