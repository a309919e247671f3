use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which statistical model a point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// `D(α) S(r) |0⟩`
    SingleMode,
    /// `(D(α) ⊗ I) S₂(r) |00⟩`
    TwoMode,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::SingleMode => "single",
            Model::TwoMode => "two",
        }
    }

    /// Number of free real parameters of the locally-unbiased X family.
    pub fn free_param_count(self) -> usize {
        match self {
            Model::SingleMode => 3,
            Model::TwoMode => 15,
        }
    }
}

impl std::str::FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" | "single_mode" | "single-mode" => Ok(Model::SingleMode),
            "two" | "two_mode" | "two-mode" => Ok(Model::TwoMode),
            other => Err(Error::InvalidParameter(format!("unknown model '{other}'"))),
        }
    }
}

/// A point `θ = (Re α, Im α, r)` of one of the two statistical models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelPoint {
    model: Model,
    theta: [f64; 3],
}

impl ModelPoint {
    pub fn new(model: Model, theta: [f64; 3]) -> Result<Self> {
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite parameter in {theta:?}")));
        }
        if theta[2] < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "squeezing r must be non-negative, got {}",
                theta[2]
            )));
        }
        Ok(Self { model, theta })
    }

    pub fn single(theta1: f64, theta2: f64, r: f64) -> Result<Self> {
        Self::new(Model::SingleMode, [theta1, theta2, r])
    }

    pub fn two(theta1: f64, theta2: f64, r: f64) -> Result<Self> {
        Self::new(Model::TwoMode, [theta1, theta2, r])
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn theta(&self) -> [f64; 3] {
        self.theta
    }

    pub fn alpha(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.theta[0], self.theta[1])
    }

    pub fn r(&self) -> f64 {
        self.theta[2]
    }

    /// Copy of this point with parameter `mu` shifted by `delta`. The
    /// shifted point may have negative `r`, which is fine for finite
    /// differences around `r = 0`.
    pub(crate) fn shifted(&self, mu: usize, delta: f64) -> Self {
        let mut theta = self.theta;
        theta[mu] += delta;
        Self { model: self.model, theta }
    }
}
