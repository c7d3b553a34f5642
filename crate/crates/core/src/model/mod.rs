//! Physical model: sensor channel, pointer apparatus, interaction,
//! postselection and readout.

mod apparatus;
mod postselection;
mod povm;
mod scheme;
mod sensor;

pub use apparatus::{joint_jet, joint_state, MaKind, MaModel, DEFAULT_COUPLING};
pub use postselection::{
    postselect, postselect_low_rank, LowRankComponent, LowRankState, Mode, ModeEnsemble, ModeLabel, ModeState,
    PostselectionSpec, DEGENERATE_WEIGHT,
};
pub use povm::{outcome_distribution, OutcomeJet, Povm, CLIP_TOL, SUM_TOL};
pub use scheme::{EffectiveMode, EffectiveOutcome, EffectivePovm, Measurement, Scheme, FD_STEP};
pub use sensor::{sensor_state, SensorEigenpair, SensorFamily, SensorModel, PARAM_NAMES};
