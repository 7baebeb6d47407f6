//! The call-by-value mirror: two-sorted value/term syntax, CBV reduction
//! relations, complete development and the standardization pipeline.

pub mod par;
pub mod srs;
pub mod step;
pub mod syntax;

pub use par::{
    cdev_join_cbv, commute_par_left_cbv, invert_lm_cbv, join_multi_cbv, left_eval_cbv,
    refl_derivation_cbv, replay_derivation_cbv, step_par_cbv, subst_par_cbv,
    swap_derivation_cbv, validate_chain_cbv, LmInversionV, ParDerivationV, ReplayV,
};
pub use srs::{
    absorb_into_srs_cbv, is_srs_cbv, srs_to_trace_cbv, standardize_cbv, zip_app_cbv, SrsErrorV,
    SrsProverV,
};
pub use step::{
    cdev_cbv, cdev_value_cbv, delta_to_unsorted, reduce_at_cbv, step_cbv, step_left_cbv,
    step_left_cbv_with_path, TraceV,
};
pub use syntax::{from_unsorted, DeltaTableV, NotAnAbstractionV, TermV, ValueV};
