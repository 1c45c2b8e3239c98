//! Finite-scale measurements behind the convergence results: tail
//! quantities, sampled rectangle sups, the η search and the divergence run.

pub mod eta;
pub mod lemmas;
pub mod probe;
pub mod remark;
pub mod tail;

pub use eta::{eta_search, EtaConfig, EtaResult};
pub use lemmas::{
    lemma1_quantity, lemma2_quantities, lemma3_check, Lemma2Values, Lemma3Params, Lemma3Result, Measured,
};
pub use probe::{
    interior_grid, theorem7_bound, theorem7_bound_check, uniform_tail_probe, ProbeConfig, ProbeTraceRow, Theorem7Report,
};
pub use remark::{remark2_divergence, remark2_lower_bound, Remark2Report, Remark2Row};
pub use tail::{band_nonincreasing, dyadic_schedule, TailReport, TailRules, TailVerdict};
