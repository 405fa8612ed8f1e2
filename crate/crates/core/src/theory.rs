//! Instantiation of the interval universe for a fixed number of stages.
//!
//! Each kind of variable gets its own contiguous id range. Flow and split
//! ids are numbered stage-major and copy ids copy-major, so the tables for
//! `n - 1` stages (or `k - 1` copies) are prefixes of the tables for `n`.

use std::collections::HashMap;

use thiserror::Error;

use crate::domain::{validate_domain, Diagnostic, Domain};
use crate::interval::Time;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TheoryError {
    #[error("the number of stages must be at least 1")]
    NoStages,
    #[error("the copy cap must be at least 1")]
    NoCopies,
    #[error("horizon too small: {horizon} < {stages} stages")]
    HorizonTooSmall { horizon: Time, stages: u32 },
    #[error("invalid domain: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidDomain(Vec<Diagnostic>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActionKind {
    /// Index into `Domain::skills`.
    Skill(usize),
    /// Index into `Domain::temporal_actions`.
    Temporal(usize),
}

/// A skill or temporal action bound to one actor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundAction {
    pub kind: ActionKind,
    pub name: String,
    pub actor: u32,
}

impl GroundAction {
    pub fn label(&self) -> String {
        format!("{}#{}", self.name, self.actor)
    }
}

/// Ids of the integer variables owned by one action copy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CopyIds {
    pub left: usize,
    pub right: usize,
    pub start: usize,
    pub end: usize,
}

/// Default copy cap: one fewer than the number of stages, but at least 1.
pub fn default_copy_cap(n: u32) -> u32 {
    n.saturating_sub(1).max(1)
}

/// Default horizon: every stage wide enough for the longest effect delay.
pub fn default_horizon(d: &Domain, n: u32) -> Time {
    n as Time * d.max_duration()
}

/// Ground actions in canonical order: skills by declaration and actor, then
/// temporal actions by declaration and actor.
pub fn ground_actions(d: &Domain) -> Vec<GroundAction> {
    let mut out = Vec::new();
    for (i, s) in d.skills.iter().enumerate() {
        for actor in d.skill_actors(s) {
            out.push(GroundAction {
                kind: ActionKind::Skill(i),
                name: s.name.clone(),
                actor,
            });
        }
    }
    for (i, t) in d.temporal_actions.iter().enumerate() {
        for actor in d.temporal_action_actors(t) {
            out.push(GroundAction {
                kind: ActionKind::Temporal(i),
                name: t.name.clone(),
                actor,
            });
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct TheoryShape {
    domain: Domain,
    n: u32,
    copies: u32,
    horizon: Time,
    actions: Vec<GroundAction>,
    action_index: HashMap<(String, u32), usize>,
    fluent_index: HashMap<String, usize>,
}

/// Builds the shape for `n` stages, copy cap `k` (clamped to the admissible
/// range) and horizon `h`.
pub fn instantiate(d: &Domain, n: u32, k: u32, h: Time) -> Result<TheoryShape, TheoryError> {
    if n == 0 {
        return Err(TheoryError::NoStages);
    }
    if k == 0 {
        return Err(TheoryError::NoCopies);
    }
    if h < n as Time {
        return Err(TheoryError::HorizonTooSmall {
            horizon: h,
            stages: n,
        });
    }
    let diags = validate_domain(d);
    if !diags.is_empty() {
        return Err(TheoryError::InvalidDomain(diags));
    }
    let actions = ground_actions(d);
    let action_index = actions
        .iter()
        .enumerate()
        .map(|(i, a)| ((a.name.clone(), a.actor), i))
        .collect();
    let fluent_index = d
        .fluents
        .iter()
        .enumerate()
        .map(|(i, f)| (f.name.clone(), i))
        .collect();
    Ok(TheoryShape {
        domain: d.clone(),
        n,
        copies: k.min(default_copy_cap(n)),
        horizon: h,
        actions,
        action_index,
        fluent_index,
    })
}

impl TheoryShape {
    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Effective number of copies per action.
    pub fn copies(&self) -> u32 {
        self.copies
    }

    pub fn horizon(&self) -> Time {
        self.horizon
    }

    pub fn actions(&self) -> &[GroundAction] {
        &self.actions
    }

    pub fn num_fluents(&self) -> usize {
        self.domain.fluents.len()
    }

    pub fn fluent_id(&self, name: &str) -> Option<usize> {
        self.fluent_index.get(name).copied()
    }

    pub fn action_id(&self, name: &str, actor: u32) -> Option<usize> {
        self.action_index.get(&(name.to_string(), actor)).copied()
    }

    pub fn num_flow_ids(&self) -> usize {
        4 * self.num_fluents() * self.n as usize
    }

    pub fn num_use_ids(&self) -> usize {
        self.actions.len() * self.copies as usize
    }

    pub fn num_boundary_ids(&self) -> usize {
        self.n as usize + 1
    }

    pub fn num_split_ids(&self) -> usize {
        self.num_fluents() * self.n as usize
    }

    pub fn num_copy_int_ids(&self) -> usize {
        4 * self.num_use_ids()
    }

    /// Flow variable `φ_vw^t` for fluent `f`, stage `t` in `1..=n`.
    pub fn flow(&self, f: usize, t: u32, v: bool, w: bool) -> usize {
        debug_assert!(f < self.num_fluents() && (1..=self.n).contains(&t));
        ((t as usize - 1) * self.num_fluents() + f) * 4 + 2 * v as usize + w as usize
    }

    /// Use variable of copy `k` in `1..=copies` of action `a`.
    pub fn use_id(&self, a: usize, k: u32) -> usize {
        debug_assert!(a < self.actions.len() && (1..=self.copies).contains(&k));
        (k as usize - 1) * self.actions.len() + a
    }

    pub fn copy_ids(&self, a: usize, k: u32) -> CopyIds {
        let base = 4 * self.use_id(a, k);
        CopyIds {
            left: base,
            right: base + 1,
            start: base + 2,
            end: base + 3,
        }
    }

    /// Timestamp `b_t`, `t` in `0..=n`.
    pub fn boundary(&self, t: u32) -> usize {
        debug_assert!(t <= self.n);
        t as usize
    }

    /// Split point of fluent `f` in stage `t`.
    pub fn split(&self, f: usize, t: u32) -> usize {
        debug_assert!(f < self.num_fluents() && (1..=self.n).contains(&t));
        (t as usize - 1) * self.num_fluents() + f
    }
}
