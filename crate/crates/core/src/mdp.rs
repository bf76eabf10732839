//! Problem instances: the JSON instance format, validation into a dense
//! indexed model, deterministic policies and their induced reward processes.
//!
//! State and action identifiers are strings in files and dense indices
//! everywhere else. Rewards are taken as excess rewards; use
//! [`ValidatedMdp::subtract_reward`] to remove a risk-free level first.

use std::collections::HashSet;
use std::fmt;

use indexmap::IndexMap;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Allowed deviation of a transition row sum from 1.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Default cap on the number of enumerated deterministic policies.
pub const DEFAULT_POLICY_CAP: u64 = 10_000_000;

/// An instance as written in a JSON file. Not yet checked for stochasticity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MdpSpec {
    pub states: Vec<String>,
    pub actions: IndexMap<String, Vec<String>>,
    /// `transition[s][a][s']`; omitted destinations have probability 0.
    pub transition: IndexMap<String, IndexMap<String, IndexMap<String, f64>>>,
    pub reward: IndexMap<String, IndexMap<String, f64>>,
}

/// Decode an instance document. Errors carry the JSON path of the offending node.
pub fn parse_mdp(text: &str) -> Result<MdpSpec> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Json {
        path: e.path().to_string(),
        message: e.into_inner().to_string(),
    })
}

impl MdpSpec {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialization cannot fail")
    }
}

/// A validated, immutable instance with dense indexing.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedMdp {
    state_ids: Vec<String>,
    action_ids: Vec<Vec<String>>,
    // offsets[s]..offsets[s + 1] are the (s, a) pair indices of state s
    offsets: Vec<usize>,
    // row-major: transitions[pair * n + s']
    transitions: Vec<f64>,
    rewards: Vec<f64>,
    r_min: f64,
    r_max: f64,
}

fn check_unique<'a>(ids: impl IntoIterator<Item = &'a String>, what: &str) -> Result<()> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::Validation(format!("duplicate {what} `{id}`")));
        }
    }
    Ok(())
}

/// Check an instance and build its dense representation.
pub fn validate(spec: &MdpSpec) -> Result<ValidatedMdp> {
    if spec.states.is_empty() {
        return Err(Error::Validation("state list is empty".into()));
    }
    check_unique(&spec.states, "state")?;
    let n = spec.states.len();
    let index: IndexMap<&str, usize> = spec
        .states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();

    for (table, keys) in [
        ("actions", spec.actions.keys().collect::<Vec<_>>()),
        ("transition", spec.transition.keys().collect()),
        ("reward", spec.reward.keys().collect()),
    ] {
        if let Some(unknown) = keys.into_iter().find(|k| !index.contains_key(k.as_str())) {
            return Err(Error::Validation(format!(
                "`{table}` names unknown state `{unknown}`"
            )));
        }
    }

    let mut action_ids = Vec::with_capacity(n);
    let mut offsets = vec![0];
    let mut transitions = Vec::new();
    let mut rewards = Vec::new();

    for s in &spec.states {
        let acts = spec
            .actions
            .get(s)
            .ok_or_else(|| Error::EmptyActionSet(s.clone()))?;
        if acts.is_empty() {
            return Err(Error::EmptyActionSet(s.clone()));
        }
        check_unique(acts, &format!("action of state `{s}`"))?;
        let trans = spec.transition.get(s);
        let rew = spec.reward.get(s);
        for listed in [
            trans.map(|t| t.keys().collect::<Vec<_>>()),
            rew.map(|r| r.keys().collect()),
        ]
        .into_iter()
        .flatten()
        .flatten()
        {
            if !acts.contains(listed) {
                return Err(Error::Validation(format!(
                    "state `{s}` has data for unlisted action `{listed}`"
                )));
            }
        }

        for a in acts {
            let row = trans.and_then(|t| t.get(a)).ok_or_else(|| {
                Error::Validation(format!("missing transition row for ({s}, {a})"))
            })?;
            let reward = *rew
                .and_then(|r| r.get(a))
                .ok_or_else(|| Error::Validation(format!("missing reward for ({s}, {a})")))?;
            if !reward.is_finite() {
                return Err(Error::Validation(format!(
                    "reward for ({s}, {a}) is not finite"
                )));
            }

            let mut dense = vec![0.0; n];
            for (to, &p) in row {
                let j = *index.get(to.as_str()).ok_or_else(|| {
                    Error::Validation(format!(
                        "transition row ({s}, {a}) names unknown state `{to}`"
                    ))
                })?;
                if !p.is_finite() {
                    return Err(Error::Validation(format!(
                        "probability ({s}, {a}) -> {to} is not finite"
                    )));
                }
                if p < 0.0 {
                    return Err(Error::NegativeProbability {
                        state: s.clone(),
                        action: a.clone(),
                        to: to.clone(),
                        value: p,
                    });
                }
                dense[j] = p;
            }
            let sum: f64 = dense.iter().sum();
            // summation round-off on top of the authoring tolerance
            if (sum - 1.0).abs() > ROW_SUM_TOL + n as f64 * f64::EPSILON {
                return Err(Error::RowSum {
                    state: s.clone(),
                    action: a.clone(),
                    sum,
                });
            }
            transitions.extend_from_slice(&dense);
            rewards.push(reward);
        }
        action_ids.push(acts.clone());
        offsets.push(rewards.len());
    }

    let r_min = rewards.iter().copied().fold(f64::INFINITY, f64::min);
    let r_max = rewards.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(ValidatedMdp {
        state_ids: spec.states.clone(),
        action_ids,
        offsets,
        transitions,
        rewards,
        r_min,
        r_max,
    })
}

impl ValidatedMdp {
    pub fn from_json(text: &str) -> Result<Self> {
        validate(&parse_mdp(text)?)
    }

    pub fn n_states(&self) -> usize {
        self.state_ids.len()
    }

    pub fn n_actions(&self, s: usize) -> usize {
        self.offsets[s + 1] - self.offsets[s]
    }

    pub fn max_actions(&self) -> usize {
        (0..self.n_states())
            .map(|s| self.n_actions(s))
            .max()
            .unwrap_or(0)
    }

    /// Number of (state, action) pairs.
    pub fn n_pairs(&self) -> usize {
        self.rewards.len()
    }

    pub fn pair_index(&self, s: usize, a: usize) -> usize {
        debug_assert!(a < self.n_actions(s));
        self.offsets[s] + a
    }

    pub fn transition_row(&self, s: usize, a: usize) -> &[f64] {
        let n = self.n_states();
        let k = self.pair_index(s, a);
        &self.transitions[k * n..(k + 1) * n]
    }

    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.rewards[self.pair_index(s, a)]
    }

    /// Rewards of all pairs, in pair-index order.
    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    /// `(r_min, r_max)` over all pairs.
    pub fn reward_bounds(&self) -> (f64, f64) {
        (self.r_min, self.r_max)
    }

    pub fn state_ids(&self) -> &[String] {
        &self.state_ids
    }

    pub fn action_ids(&self, s: usize) -> &[String] {
        &self.action_ids[s]
    }

    /// `∏ |A(s)|`, as a float so that huge spaces do not overflow.
    pub fn policy_count(&self) -> f64 {
        (0..self.n_states())
            .map(|s| self.n_actions(s) as f64)
            .product()
    }

    /// Same instance with every reward replaced by `f(r)`.
    pub fn map_rewards(&self, f: impl Fn(f64) -> f64) -> Self {
        let rewards: Vec<f64> = self.rewards.iter().map(|&r| f(r)).collect();
        let r_min = rewards.iter().copied().fold(f64::INFINITY, f64::min);
        let r_max = rewards.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self {
            rewards,
            r_min,
            r_max,
            ..self.clone()
        }
    }

    /// Remove a risk-free reward level so that rewards become excess rewards.
    pub fn subtract_reward(&self, risk_free: f64) -> Self {
        self.map_rewards(|r| r - risk_free)
    }

    /// Check that `d` picks an admissible action in every state.
    pub fn check_policy(&self, d: &Policy) -> Result<()> {
        if d.len() != self.n_states() {
            return Err(Error::InvalidPolicy(format!(
                "policy covers {} states, instance has {}",
                d.len(),
                self.n_states()
            )));
        }
        for (s, &a) in d.actions().iter().enumerate() {
            if a >= self.n_actions(s) {
                return Err(Error::InvalidPolicy(format!(
                    "action index {a} out of range for state `{}`",
                    self.state_ids[s]
                )));
            }
        }
        Ok(())
    }

    /// The policy choosing the first listed action everywhere.
    pub fn first_policy(&self) -> Policy {
        Policy::new(vec![0; self.n_states()])
    }

    /// Parse `a1,a1,a2` (action ids in state order).
    pub fn parse_policy(&self, text: &str) -> Result<Policy> {
        let text = text.trim().trim_start_matches('(').trim_end_matches(')');
        let names: Vec<&str> = text.split(',').map(str::trim).collect();
        if names.len() != self.n_states() {
            return Err(Error::InvalidPolicy(format!(
                "`{text}` lists {} actions, instance has {} states",
                names.len(),
                self.n_states()
            )));
        }
        let choice = names
            .iter()
            .enumerate()
            .map(|(s, name)| {
                self.action_ids[s]
                    .iter()
                    .position(|a| a == name)
                    .ok_or_else(|| {
                        Error::InvalidPolicy(format!(
                            "`{name}` is not an action of state `{}`",
                            self.state_ids[s]
                        ))
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Policy::new(choice))
    }

    /// Render a policy with the original action identifiers, e.g. `(a1,a1,a2)`.
    pub fn format_policy(&self, d: &Policy) -> String {
        let names: Vec<&str> = d
            .actions()
            .iter()
            .enumerate()
            .map(|(s, &a)| self.action_ids[s][a].as_str())
            .collect();
        format!("({})", names.join(","))
    }

    /// Back to the file representation.
    pub fn to_spec(&self) -> MdpSpec {
        let mut actions = IndexMap::new();
        let mut transition = IndexMap::new();
        let mut reward = IndexMap::new();
        for (s, sid) in self.state_ids.iter().enumerate() {
            actions.insert(sid.clone(), self.action_ids[s].clone());
            let mut rows = IndexMap::new();
            let mut rews = IndexMap::new();
            for (a, aid) in self.action_ids[s].iter().enumerate() {
                let row: IndexMap<String, f64> = self
                    .transition_row(s, a)
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| p != 0.0)
                    .map(|(j, &p)| (self.state_ids[j].clone(), p))
                    .collect();
                rows.insert(aid.clone(), row);
                rews.insert(aid.clone(), self.reward(s, a));
            }
            transition.insert(sid.clone(), rows);
            reward.insert(sid.clone(), rews);
        }
        MdpSpec {
            states: self.state_ids.clone(),
            actions,
            transition,
            reward,
        }
    }
}

/// A stationary deterministic policy: one action index per state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Policy(Vec<usize>);

impl Policy {
    pub fn new(choice: Vec<usize>) -> Self {
        Policy(choice)
    }

    pub fn actions(&self) -> &[usize] {
        &self.0
    }

    pub fn action(&self, s: usize) -> usize {
        self.0[s]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn set(&mut self, s: usize, a: usize) {
        self.0[s] = a;
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|a| format!("a{}", a + 1)).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// The Markov reward process induced by a deterministic policy.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovRewardProcess {
    pub p: DMatrix<f64>,
    pub r: DVector<f64>,
}

impl MarkovRewardProcess {
    pub fn n_states(&self) -> usize {
        self.r.len()
    }

    /// Strong connectivity of the transition graph (edges where `P > 0`).
    pub fn is_irreducible(&self) -> bool {
        let n = self.n_states();
        let reach = |forward: bool| {
            let mut seen = vec![false; n];
            let mut stack = vec![0];
            seen[0] = true;
            while let Some(i) = stack.pop() {
                for j in 0..n {
                    let w = if forward {
                        self.p[(i, j)]
                    } else {
                        self.p[(j, i)]
                    };
                    if w > 0.0 && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            seen.into_iter().all(|b| b)
        };
        reach(true) && reach(false)
    }
}

/// Induced chain and reward vector of `d`.
pub fn restrict(mdp: &ValidatedMdp, d: &Policy) -> MarkovRewardProcess {
    restrict_with(mdp, d, mdp.rewards())
}

/// Like [`restrict`] but reading rewards from a pair-indexed table.
pub(crate) fn restrict_with(
    mdp: &ValidatedMdp,
    d: &Policy,
    rewards: &[f64],
) -> MarkovRewardProcess {
    let n = mdp.n_states();
    let p = DMatrix::from_fn(n, n, |s, j| mdp.transition_row(s, d.action(s))[j]);
    let r = DVector::from_fn(n, |s, _| rewards[mdp.pair_index(s, d.action(s))]);
    MarkovRewardProcess { p, r }
}

/// Iterator over all deterministic policies, last state varying fastest.
#[derive(Debug, Clone)]
pub struct PolicyIter {
    sizes: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl Iterator for PolicyIter {
    type Item = Policy;

    fn next(&mut self) -> Option<Policy> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut carried = true;
        for s in (0..succ.len()).rev() {
            succ[s] += 1;
            if succ[s] < self.sizes[s] {
                carried = false;
                break;
            }
            succ[s] = 0;
        }
        if !carried {
            self.next = Some(succ);
        }
        Some(Policy::new(current))
    }
}

/// All `∏ |A(s)|` policies in lexicographic order of action indices.
pub fn enumerate_policies(mdp: &ValidatedMdp, cap: u64) -> Result<PolicyIter> {
    let count = mdp.policy_count();
    if count > cap as f64 {
        return Err(Error::PolicyCountOverflow { count, cap });
    }
    Ok(PolicyIter {
        sizes: (0..mdp.n_states()).map(|s| mdp.n_actions(s)).collect(),
        next: Some(vec![0; mdp.n_states()]),
    })
}
