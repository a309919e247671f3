use serde::Serialize;

use crate::bounds;
use crate::error::{Error, Result};
use crate::hcrb::{self, GendyneOptimum, MinimizerConfig};
use crate::model::{Model, ModelPoint};

/// Slack allowed on the ordering `C^S ≤ C^H ≤ 2 C^S` for numerical values.
pub const ORDERING_SLACK: f64 = 1e-9;

/// All bounds for one model point, with weight matrix `W = I`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub point: ModelPoint,
    /// SLD Cramér–Rao bound `Tr[Q⁻¹]`.
    pub c_s: f64,
    /// Holevo bound from the numerical minimization.
    pub c_h: f64,
    /// Closed-form Holevo bound, for comparison with `c_h`.
    pub c_h_closed: f64,
    /// Asymptotic incompatibility `‖iQ⁻¹D‖_∞`.
    pub r_quantumness: f64,
    pub gendyne_best: Option<GendyneOptimum>,
    pub heterodyne: Option<f64>,
    pub double_homodyne: Option<f64>,
}

impl BoundsReport {
    /// Checks positivity and the ordering `C^S ≤ C^H ≤ 2 C^S`.
    pub fn validate(&self) -> Result<()> {
        let values = [Some(self.c_s), Some(self.c_h), self.heterodyne, self.double_homodyne];
        if values.iter().flatten().any(|v| !(*v > 0.0)) {
            return Err(Error::InvalidParameter("bounds must be positive".into()));
        }
        if self.c_h < self.c_s - ORDERING_SLACK || self.c_h > 2.0 * self.c_s + ORDERING_SLACK {
            return Err(Error::InvalidParameter(format!(
                "ordering C^S ≤ C^H ≤ 2C^S violated: C^S = {}, C^H = {}",
                self.c_s, self.c_h
            )));
        }
        if !(0.0..=1.0 + 1e-10).contains(&self.r_quantumness) {
            return Err(Error::InvalidParameter(format!("R = {} outside [0, 1]", self.r_quantumness)));
        }
        Ok(())
    }
}

pub fn bounds_report(p: &ModelPoint, cfg: &MinimizerConfig) -> Result<BoundsReport> {
    let r = p.r();
    let estimate = hcrb::minimize_h(p, cfg)?;
    let q = bounds::qfi_matrix(p);
    let (gendyne_best, heterodyne, double_homodyne) = match p.model() {
        Model::SingleMode => (Some(hcrb::optimal_gendyne(r)?), Some(bounds::heterodyne_precision(r)), None),
        Model::TwoMode => (None, None, Some(bounds::double_homodyne_precision(r)?)),
    };
    let report = BoundsReport {
        point: *p,
        c_s: bounds::sld_crb(p),
        c_h: estimate.value,
        c_h_closed: hcrb::hcrb_closed(p),
        r_quantumness: bounds::quantumness(&q, &bounds::uhlmann_matrix(p))?,
        gendyne_best,
        heterodyne,
        double_homodyne,
    };
    report.validate()?;
    Ok(report)
}
