//! Domain types and assembly of the tri-market scheduling QP.
//!
//! Per hour the plant decides TG output `g`, electricity/REC/CER trades
//! `G`, `R`, `C` (positive = sale), storage flows `P_c`, `P_d` and SoC `Q`,
//! net inventory flows `x_R`, `x_C` (withdraw − deposit) with levels `I_R`,
//! `I_C`, retired RECs `R_0` and quota draw `C_0`.

mod assemble;
mod layout;
mod params;
mod plan;
mod validate;

pub use assemble::{
    assemble_qp, find_conflict, QpProblem, RowName, QUOTA_ROW, ROWS_PER_HOUR, RPS_ROW,
};
pub use layout::{Role, VariableLayout};
pub use params::{
    EssParams, InventoryParams, MarketData, PolicyParams, TgParams, TradeCaps, VppConfig,
};
pub use plan::{recover_plan, DispatchPlan, PLAN_COLUMNS};
pub use validate::{is_daily_blocked, validate_config, ModelError, ValidatedModel};
