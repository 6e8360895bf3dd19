//! Built-in transmission schemes and the numeric executor.

mod builders;
mod executor;

pub use builders::{
    build_mat, build_tdma, build_x1, build_x2, build_x3, build_x4, build_x5, build_zf,
    builtin_catalog, mat_rounds, resolve_scheme,
};
pub use executor::{
    execute_episode, ExecutionPlan, GroupRate, LedgerEntry, ReceivedTerm, ReceivedTermBreakdown,
    SinrLedger, SlotReception, TermRole,
};
