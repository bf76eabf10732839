//! Seeded random instances.
//!
//! The stream is SplitMix64 (Steele, Lea & Flood constants). Uniform variates
//! take the top 53 bits: `u = (x >> 11) · 2⁻⁵³ ∈ [0, 1)`. For each state in
//! order and each action in order, the generator draws `|S|` exponential
//! variates `−ln(1 − u)` and normalizes them into the transition row, then one
//! more uniform for the reward `10·u`. Any implementation following these
//! steps reproduces the same instances from the same seed.

use indexmap::IndexMap;

use crate::mdp::MdpSpec;

/// SplitMix64 pseudo-random stream.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform on `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_exponential(&mut self) -> f64 {
        -(1.0 - self.next_f64()).ln()
    }
}

/// Independent seed for sub-stream `stream` of `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    SplitMix64::new(seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15)).next_u64()
}

pub const REWARD_SCALE: f64 = 10.0;

/// Random instance with states `s1..sN`, actions `a1..aK` in every state,
/// simplex-uniform transition rows and rewards uniform on `[0, 10)`.
pub fn gen_random_mdp(n_states: usize, n_actions: usize, seed: u64) -> MdpSpec {
    assert!(
        n_states >= 1 && n_actions >= 1,
        "instance needs a state and an action"
    );
    let mut rng = SplitMix64::new(seed);
    let states: Vec<String> = (1..=n_states).map(|i| format!("s{i}")).collect();
    let actions: Vec<String> = (1..=n_actions).map(|i| format!("a{i}")).collect();
    let mut transition = IndexMap::new();
    let mut reward = IndexMap::new();
    for s in &states {
        let mut rows = IndexMap::new();
        let mut rews = IndexMap::new();
        for a in &actions {
            let draws: Vec<f64> = (0..n_states).map(|_| rng.next_exponential()).collect();
            let total: f64 = draws.iter().sum();
            let row: IndexMap<String, f64> = states
                .iter()
                .zip(&draws)
                .map(|(to, x)| (to.clone(), x / total))
                .collect();
            rows.insert(a.clone(), row);
            rews.insert(a.clone(), REWARD_SCALE * rng.next_f64());
        }
        transition.insert(s.clone(), rows);
        reward.insert(s.clone(), rews);
    }
    MdpSpec {
        actions: states
            .iter()
            .map(|s| (s.clone(), actions.clone()))
            .collect(),
        states,
        transition,
        reward,
    }
}
