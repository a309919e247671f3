use std::fmt::Write;

use gausshcrb::bounds::{qfi_matrix, uhlmann_matrix};
use gausshcrb::fock::{self, TruncationPolicy};
use gausshcrb::hcrb::derivative_coefficients;
use gausshcrb::{Model, ModelPoint};

use crate::error::{CliError, CliResult};
use crate::format::sig12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Check {
    All,
    Qfi,
    Derivatives,
    Bs,
    Lyapunov,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModelChoice {
    Single,
    Two,
    Both,
}

impl ModelChoice {
    fn includes(self, m: Model) -> bool {
        matches!((self, m), (ModelChoice::Both, _) | (ModelChoice::Single, Model::SingleMode) | (ModelChoice::Two, Model::TwoMode))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub model: ModelChoice,
    pub check: Check,
    /// Overrides every default truncation.
    pub trunc: Option<usize>,
    pub r_max: f64,
    pub tail_tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { model: ModelChoice::Both, check: Check::All, trunc: None, r_max: 1.25, tail_tol: fock::DEFAULT_TAIL_TOL }
    }
}

pub const QFI_TOL: f64 = 1e-6;
pub const DERIVATIVE_TOL: f64 = 1e-8;
pub const BS_TOL: f64 = 1e-8;
pub const LYAPUNOV_TOL: f64 = 1e-6;
const ALPHAS: [(f64, f64); 2] = [(0.0, 0.0), (0.3, 0.7)];

/// One line of the verification report.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    /// Set when the check could not be evaluated at all.
    pub error: Option<String>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.max_deviation < self.tolerance
    }
}

struct Runner<'a> {
    opts: &'a VerifyOptions,
    outcomes: Vec<CheckOutcome>,
}

impl Runner<'_> {
    fn policy(&self, default_n: usize) -> CliResult<TruncationPolicy> {
        TruncationPolicy::new(self.opts.trunc.unwrap_or(default_n), self.opts.tail_tol, fock::DEFAULT_FD_STEP)
            .map_err(|e| CliError::BadArgs(e.to_string()))
    }

    fn record<F>(&mut self, name: String, tolerance: f64, points: &[ModelPoint], mut deviation: F)
    where
        F: FnMut(&ModelPoint) -> gausshcrb::Result<f64>,
    {
        let mut worst: f64 = 0.0;
        let mut error = None;
        for p in points {
            match deviation(p) {
                Ok(d) => worst = worst.max(d),
                Err(e) => {
                    error = Some(format!("at θ = {:?}: {e}", p.theta()));
                    break;
                }
            }
        }
        self.outcomes.push(CheckOutcome { name, max_deviation: worst, tolerance, error });
    }
}

fn r_grid(r_max: f64) -> Vec<f64> {
    let mut rs: Vec<f64> = (0..).map(|i| 0.25 * i as f64).take_while(|r| *r <= r_max + 1e-12).collect();
    if rs.last().is_none_or(|last| (last - r_max).abs() > 1e-12) {
        rs.push(r_max);
    }
    rs
}

fn matrix_deviation(a: &nalgebra::Matrix3<f64>, b: &nalgebra::Matrix3<f64>) -> f64 {
    (a - b).abs().max()
}

pub fn run_verify(opts: &VerifyOptions) -> CliResult<Vec<CheckOutcome>> {
    if !(opts.r_max >= 0.0 && opts.r_max.is_finite()) {
        return Err(CliError::BadArgs(format!("--r-max must be non-negative, got {}", opts.r_max)));
    }
    let mut run = Runner { opts, outcomes: Vec::new() };
    let wants = |c: Check| opts.check == Check::All || opts.check == c;
    let rs = r_grid(opts.r_max);

    for model in [Model::SingleMode, Model::TwoMode] {
        if !opts.model.includes(model) {
            continue;
        }
        let grid: Vec<ModelPoint> = rs
            .iter()
            .flat_map(|&r| ALPHAS.iter().map(move |&(t1, t2)| ModelPoint::new(model, [t1, t2, r]).unwrap()))
            .collect();
        let name = model.name();

        if wants(Check::Qfi) {
            let pol = run.policy(TruncationPolicy::for_model(model).n)?;
            run.record(format!("qfi+uhlmann {name}"), QFI_TOL, &grid, |p| {
                let (q, d) = fock::oracle_qfi_uhlmann(p, &pol)?;
                Ok(matrix_deviation(&q, qfi_matrix(p).entries()).max(matrix_deviation(&d, uhlmann_matrix(p).entries())))
            });
        }
        if wants(Check::Derivatives) {
            let default_n = if model == Model::SingleMode { fock::DEFAULT_N_SINGLE } else { 160 };
            let pol = run.policy(default_n)?;
            let points: Vec<ModelPoint> = [[0.0, 0.0, 0.0], [0.3, 0.7, 0.5], [0.2, 0.1, 0.4], [-0.5, 0.3, 0.9]]
                .iter()
                .filter(|t| t[2] <= opts.r_max)
                .map(|t| ModelPoint::new(model, *t).unwrap())
                .collect();
            run.record(format!("derivatives {name}"), DERIVATIVE_TOL, &points, |p| {
                let proj = fock::subspace_projection(p, &pol)?;
                let diff = (&proj.coeffs - derivative_coefficients(p)).iter().map(|z| z.norm()).fold(0.0, f64::max);
                Ok(diff.max(proj.outside_norm))
            });
        }
        if model == Model::SingleMode && wants(Check::Lyapunov) {
            let pol = run.policy(fock::DEFAULT_N_SINGLE)?;
            run.record(format!("sld-lyapunov {name}"), LYAPUNOV_TOL, &grid, |p| fock::sld_lyapunov_residual(p, &pol));
        }
        if model == Model::TwoMode && wants(Check::Bs) {
            let pol = run.policy(fock::DEFAULT_N_FACTORIZATION)?;
            let points: Vec<ModelPoint> = [[0.0, 0.0, 0.5], [0.5, 0.5, 0.8], [1.0, 0.0, 1.2]]
                .iter()
                .map(|t| ModelPoint::two(t[0], t[1], t[2]).unwrap())
                .collect();
            run.record("beam-splitter two".into(), BS_TOL, &points, |p| fock::bs_factorization_check(p, &pol));
        }
    }
    if run.outcomes.is_empty() {
        return Err(CliError::BadArgs("no check applies to the selected model".into()));
    }
    Ok(run.outcomes)
}

pub fn render(outcomes: &[CheckOutcome]) -> String {
    let mut out = String::new();
    for o in outcomes {
        let status = if o.passed() { "PASS" } else { "FAIL" };
        let _ = write!(out, "{status} {:<22} max_dev={} tol={}", o.name, sig12(o.max_deviation), sig12(o.tolerance));
        if let Some(e) = &o.error {
            let _ = write!(out, " error: {e}");
        }
        out.push('\n');
    }
    let failed = outcomes.iter().filter(|o| !o.passed()).count();
    let _ = writeln!(out, "{} of {} checks passed", outcomes.len() - failed, outcomes.len());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_ends_at_r_max() {
        assert_eq!(r_grid(1.25), vec![0.0, 0.25, 0.5, 0.75, 1.0, 1.25]);
        assert_eq!(r_grid(1.2), vec![0.0, 0.25, 0.5, 0.75, 1.0, 1.2]);
        assert_eq!(r_grid(0.0), vec![0.0]);
    }

    #[test]
    fn tiny_truncation_fails_tail_budget() {
        let opts = VerifyOptions {
            model: ModelChoice::Single,
            check: Check::Qfi,
            trunc: Some(20),
            r_max: 1.2,
            ..Default::default()
        };
        let outcomes = run_verify(&opts).unwrap();
        assert!(outcomes.iter().any(|o| !o.passed()));
        assert!(outcomes[0].error.as_deref().unwrap().contains("truncation budget"));
    }
}
