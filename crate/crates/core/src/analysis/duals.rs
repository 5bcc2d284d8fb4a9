use serde::{Deserialize, Serialize};

use crate::model::{ModelError, QpProblem, Role, RowName, VariableLayout, QUOTA_ROW, RPS_ROW};
use crate::qp::Solution;

/// Multipliers of the scheduling QP under their model names.
///
/// Signs follow the Lagrangian documented in [`crate::qp`], under which the
/// stationarity conditions read, per hour,
///
/// ```text
/// P_c:  −λ_G + r·μ + ω/η_c + γ̄ − γ̲ = 0
/// P_d:   λ_G − η_d·ω       + γ̄ − γ̲ = 0
/// R:    −π_R − λ_R         + γ̄ − γ̲ = 0
/// R_0:  −λ_R − μ               − γ̲ = 0
/// C:    −π_C + λ_C         + γ̄ − γ̲ = 0
/// C_0:  −λ_C + δ               − γ̲ = 0
/// g:    2a·g + b + λ_G + K·λ_C + γ̄ − γ̲ = 0
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedDuals {
    pub lambda_g: Vec<f64>,
    pub lambda_r: Vec<f64>,
    pub lambda_c: Vec<f64>,
    /// SoC dynamics
    pub omega: Vec<f64>,
    /// REC and CER inventory dynamics
    pub nu_r: Vec<f64>,
    pub nu_c: Vec<f64>,
    pub mu: f64,
    pub delta: f64,
    layout: VariableLayout,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl NamedDuals {
    pub fn extract(problem: &QpProblem, sol: &Solution) -> Result<Self, ModelError> {
        let layout = problem.layout;
        let t_len = layout.horizon();
        if sol.eq_duals.len() != problem.eq_rows.len()
            || sol.ineq_duals.len() != problem.in_rows.len()
            || sol.x.len() != layout.n()
        {
            return Err(ModelError::Dimension(
                "solution does not match the problem layout".into(),
            ));
        }
        let eq = |name: RowName| sol.eq_duals[name.eq_index().expect("equality row")];
        let series = |f: fn(usize) -> RowName| (0..t_len).map(|t| eq(f(t))).collect::<Vec<f64>>();
        Ok(Self {
            lambda_g: series(RowName::Power),
            lambda_r: series(RowName::RecBalance),
            lambda_c: series(RowName::CerBalance),
            omega: series(RowName::Storage),
            nu_r: series(RowName::RecInventory),
            nu_c: series(RowName::CerInventory),
            mu: sol.ineq_duals[RPS_ROW],
            delta: sol.ineq_duals[QUOTA_ROW],
            layout,
            lower: sol.lower_duals.clone(),
            upper: sol.upper_duals.clone(),
        })
    }

    /// Multiplier of the lower bound on `role` at zero-based hour `t`.
    pub fn gamma_lower(&self, t: usize, role: Role) -> f64 {
        self.lower[self.layout.index(t, role)]
    }

    pub fn gamma_upper(&self, t: usize, role: Role) -> f64 {
        self.upper[self.layout.index(t, role)]
    }

    pub fn horizon(&self) -> usize {
        self.layout.horizon()
    }
}
