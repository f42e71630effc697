//! Per-instance certificates and assumption checks.

mod doc;
mod rip;
mod theorem1;
mod theorem2;

pub use doc::{check_doc, DocCertificate};
pub use rip::{estimate_rip, normalize_columns, RipEstimate, RipMethod, EXHAUSTIVE_LIMIT};
pub use theorem1::{
    check_rip_conditions, check_theorem1_assumptions, required_separation, AssumptionReport, RipConditions, ENVELOPE_HORIZON,
};
pub use theorem2::{check_theorem2_conditions, lag_matrix, theorem2_closed_form, Theorem2Report};
