//! Versioned JSON form of a fit, optionally carrying its Wald intervals.
//!
//! Schema version 1:
//!
//! ```text
//! schema_version  integer, currently 1
//! n, p            integers
//! lambda          penalty level of the fit
//! tuning          "bic", "heuristic" or "fixed" (optional)
//! alpha, beta     arrays of length n
//! mu              number
//! gamma           array of length p
//! support         0-based indices into the concatenation (alpha, beta)
//! objective       NLL / N + lambda * (|alpha|_1 + |beta|_1)
//! kkt_residual    sup-norm of the KKT violation
//! iters           solver iterations
//! converged       kkt_residual <= tol_kkt
//! inference       optional: level, se[], ci[][2], sigma_xi[][], theta_xi[][]
//!                 for the coordinates (mu, gamma_1, ..., gamma_p)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Result, SrgmError};
use crate::inference::InferenceReport;
use crate::model::Theta;
use crate::solver::FitResult;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceSection {
    pub level: f64,
    pub se: Vec<f64>,
    pub ci: Vec<[f64; 2]>,
    pub sigma_xi: Vec<Vec<f64>>,
    pub theta_xi: Vec<Vec<f64>>,
}

impl From<&InferenceReport> for InferenceSection {
    fn from(r: &InferenceReport) -> Self {
        InferenceSection {
            level: r.level,
            se: r.se.clone(),
            ci: r.ci.clone(),
            sigma_xi: r.sigma_xi.clone(),
            theta_xi: r.theta_xi.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDocument {
    pub schema_version: u32,
    pub n: usize,
    pub p: usize,
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tuning: Option<String>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub mu: f64,
    pub gamma: Vec<f64>,
    pub support: Vec<usize>,
    pub objective: f64,
    pub kkt_residual: f64,
    pub iters: usize,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inference: Option<InferenceSection>,
}

impl FitDocument {
    pub fn new(fit: &FitResult, inference: Option<&InferenceReport>) -> Self {
        let t = &fit.theta_hat;
        FitDocument {
            schema_version: SCHEMA_VERSION,
            n: t.n(),
            p: t.p(),
            lambda: fit.lambda,
            tuning: None,
            alpha: t.alpha.clone(),
            beta: t.beta.clone(),
            mu: t.mu,
            gamma: t.gamma.clone(),
            support: fit.support.clone(),
            objective: fit.objective,
            kkt_residual: fit.kkt_residual,
            iters: fit.iters,
            converged: fit.converged,
            inference: inference.map(InferenceSection::from),
        }
    }

    pub fn theta(&self) -> Result<Theta> {
        Theta::new(
            self.alpha.clone(),
            self.beta.clone(),
            self.mu,
            self.gamma.clone(),
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: FitDocument = serde_json::from_str(text)
            .map_err(|e| SrgmError::parse(e.line(), e.to_string()))?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(SrgmError::InvalidInput(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                doc.schema_version
            )));
        }
        if doc.alpha.len() != doc.n || doc.beta.len() != doc.n || doc.gamma.len() != doc.p {
            return Err(SrgmError::InvalidInput(
                "array lengths disagree with n and p".into(),
            ));
        }
        Ok(doc)
    }
}
