//! Bundled instances.

use crate::mdp::ValidatedMdp;

/// Three states, three actions each; rewards in `[0, 9]`.
pub const THREE_STATE_JSON: &str = include_str!("../data/three_state.json");

pub fn three_state() -> ValidatedMdp {
    ValidatedMdp::from_json(THREE_STATE_JSON).expect("bundled instance is valid")
}
