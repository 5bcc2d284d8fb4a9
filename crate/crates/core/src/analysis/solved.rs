use thiserror::Error;

use super::NamedDuals;
use crate::model::{
    assemble_qp, find_conflict, recover_plan, DispatchPlan, ModelError, QpProblem, ValidatedModel,
};
use crate::qp::{
    kkt_residuals, relative_residuals, solve_qp, RelativeResiduals, Solution, SolveError,
    SolveStatus, SolverSettings,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolveError),
    #[error("model is infeasible: {0}")]
    Infeasible(String),
    #[error("solver stopped at the iteration limit ({0} iterations)")]
    IterationLimit(usize),
    #[error("invalid parameter grid: {0}")]
    Grid(String),
}

impl AnalysisError {
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            AnalysisError::Infeasible(_) | AnalysisError::Solver(SolveError::Infeasible(_))
        )
    }
}

/// An optimal solve together with everything derived from it.
#[derive(Debug, Clone)]
pub struct SolvedModel {
    pub model: ValidatedModel,
    pub problem: QpProblem,
    pub solution: Solution,
    pub duals: NamedDuals,
    /// Plan exactly as solved, simultaneous charge/discharge not removed.
    pub raw_plan: DispatchPlan,
    /// Reported plan, netted when the storage is lossless.
    pub plan: DispatchPlan,
    pub residuals: RelativeResiduals,
}

impl SolvedModel {
    pub fn objective(&self) -> f64 {
        self.solution.objective
    }
}

pub fn solve_model(
    model: &ValidatedModel,
    settings: &SolverSettings,
) -> Result<SolvedModel, AnalysisError> {
    solve_problem(model, assemble_qp(model), settings)
}

/// Solves an already assembled (possibly modified) problem of `model`.
pub fn solve_problem(
    model: &ValidatedModel,
    problem: QpProblem,
    settings: &SolverSettings,
) -> Result<SolvedModel, AnalysisError> {
    let solution = solve_qp(&problem.qp, settings)?;
    match solution.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible => {
            let why = find_conflict(model).unwrap_or_else(|| {
                "constraints conflict (no single aggregate cause identified)".into()
            });
            return Err(AnalysisError::Infeasible(why));
        }
        SolveStatus::IterationLimit => {
            return Err(AnalysisError::IterationLimit(solution.iterations))
        }
    }
    SolvedModel::from_solution(model, problem, solution)
}

impl SolvedModel {
    /// Wraps a solution obtained elsewhere (for instance read back from
    /// disk) without re-solving. Residuals are recomputed from scratch.
    pub fn from_solution(
        model: &ValidatedModel,
        problem: QpProblem,
        solution: Solution,
    ) -> Result<Self, AnalysisError> {
        let duals = NamedDuals::extract(&problem, &solution)?;
        let raw_plan = recover_plan(&solution.x, &problem.layout, false)?;
        let plan = recover_plan(&solution.x, &problem.layout, model.config().ess.lossless())?;
        let abs = kkt_residuals(&problem.qp, &solution)?;
        let residuals = relative_residuals(&problem.qp, &solution.x, solution.objective, &abs);
        Ok(SolvedModel {
            model: model.clone(),
            problem,
            solution,
            duals,
            raw_plan,
            plan,
            residuals,
        })
    }
}
