//! Call-by-name reduction: step relations, labeled parallel derivations,
//! complete developments, confluence joins and standardization.

pub mod par;
pub mod srs;
pub mod step;

pub use par::{
    cdev_join, commute_par_left, invert_lm, join_multi, refl_derivation, replay_derivation,
    step_par, subst_par, swap_derivation, validate_chain, DerivationError, LmInversion,
    ParDerivation, Replay,
};
pub use srs::{absorb_into_srs, is_srs, srs_to_trace, standardize, zip_app, SrsError, SrsProver};
pub use step::{
    cdev, reduce_at, step_cbn, step_left, step_left_with_path, CdevFsw, Dir, RedexKind,
    RedexPath, Trace, TraceError,
};
