//! Plans, timing diagrams, decoding of solver assignments and the outer
//! search over the number of stages.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{validate_domain, Cost, Diagnostic, Domain};
use crate::encoder::{cost_scale, encode, Layout, ObjectiveKind};
use crate::interval::{History, Interval, Time};
use crate::model::Assignment;
use crate::solver::{solve, SolveResult, SolverConfig};
use crate::theory::{default_copy_cap, default_horizon, instantiate, TheoryError, TheoryShape};

/// One fluent TQA: the value of `fluent` on part `part` of stage `stage`.
/// Constant stages carry a single part-1 entry covering the whole stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluentEntry {
    pub fluent: String,
    pub stage: u32,
    pub part: u8,
    pub value: bool,
    pub start: Time,
    pub end: Time,
}

/// One used action copy over `[start, end)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionEntry {
    pub action: String,
    pub actor: u32,
    pub copy: u32,
    pub start: Time,
    pub end: Time,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Plan {
    pub n: u32,
    pub boundaries: Vec<Time>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<Cost>,
    pub fluents: Vec<FluentEntry>,
    pub actions: Vec<ActionEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("malformed plan document at {path}: {message}")]
    Syntax { path: String, message: String },
    #[error("malformed plan: {0}")]
    Structure(String),
}

impl Plan {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    pub fn from_json(text: &str) -> Result<Plan, PlanError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| PlanError::Syntax {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }

    /// Final time point `b_N`.
    pub fn end_time(&self) -> Time {
        self.boundaries.last().copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub value: bool,
    pub interval: Interval,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FluentTimeline {
    pub fluent: String,
    pub segments: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionBar {
    pub action: String,
    pub actor: u32,
    pub copy: u32,
    pub interval: Interval,
}

/// Maximal constant-truth segments per fluent plus the action intervals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimingDiagram {
    pub boundaries: Vec<Time>,
    pub fluents: Vec<FluentTimeline>,
    pub actions: Vec<ActionBar>,
}

fn merge(pieces: impl IntoIterator<Item = (bool, Time, Time)>) -> Vec<Segment> {
    let mut out: Vec<Segment> = Vec::new();
    for (value, l, r) in pieces {
        match out.last_mut() {
            Some(last) if last.value == value && last.interval.r() == l => {
                last.interval = Interval::new(last.interval.l(), r).expect("non-empty");
            }
            _ => out.push(Segment {
                value,
                interval: Interval::new(l, r).expect("non-empty"),
            }),
        }
    }
    out
}

impl TimingDiagram {
    /// Builds the diagram from plan entries. Each fluent's entries must tile
    /// `[0, b_N)` without gaps or overlaps.
    pub fn from_plan(p: &Plan) -> Result<TimingDiagram, PlanError> {
        let end = p.end_time();
        let mut order: Vec<&str> = Vec::new();
        let mut by_fluent: BTreeMap<&str, Vec<&FluentEntry>> = BTreeMap::new();
        for e in &p.fluents {
            if e.start >= e.end {
                return Err(PlanError::Structure(format!(
                    "fluent entry {} [{}, {}) is empty",
                    e.fluent, e.start, e.end
                )));
            }
            if !by_fluent.contains_key(e.fluent.as_str()) {
                order.push(&e.fluent);
            }
            by_fluent.entry(&e.fluent).or_default().push(e);
        }
        let mut fluents = Vec::new();
        for name in order {
            let mut es = by_fluent.remove(name).unwrap();
            es.sort_by_key(|e| e.start);
            let mut at = 0;
            for e in &es {
                if e.start != at {
                    return Err(PlanError::Structure(format!(
                        "entries of {name} do not tile the plan: expected start {at}, found {}",
                        e.start
                    )));
                }
                at = e.end;
            }
            if at != end {
                return Err(PlanError::Structure(format!(
                    "entries of {name} end at {at}, plan ends at {end}"
                )));
            }
            fluents.push(FluentTimeline {
                fluent: name.to_string(),
                segments: merge(es.iter().map(|e| (e.value, e.start, e.end))),
            });
        }
        let mut actions = Vec::new();
        for a in &p.actions {
            let interval = Interval::new(a.start, a.end).map_err(|_| {
                PlanError::Structure(format!(
                    "action {}#{} copy {} has empty interval [{}, {})",
                    a.action, a.actor, a.copy, a.start, a.end
                ))
            })?;
            actions.push(ActionBar {
                action: a.action.clone(),
                actor: a.actor,
                copy: a.copy,
                interval,
            });
        }
        Ok(TimingDiagram {
            boundaries: p.boundaries.clone(),
            fluents,
            actions,
        })
    }

    /// Re-derives maximal segments from a per-tick history.
    pub fn from_history(h: &History, boundaries: Vec<Time>, actions: Vec<ActionBar>) -> Self {
        let fluents = h
            .atoms()
            .iter()
            .map(|atom| {
                let row = h.row(atom).unwrap();
                FluentTimeline {
                    fluent: atom.clone(),
                    segments: merge(
                        row.iter()
                            .enumerate()
                            .map(|(t, &v)| (v, t as Time, t as Time + 1)),
                    ),
                }
            })
            .collect();
        TimingDiagram {
            boundaries,
            fluents,
            actions,
        }
    }

    pub fn end_time(&self) -> Time {
        self.boundaries.last().copied().unwrap_or(0)
    }

    pub fn history(&self) -> History {
        let mut h = History::new(
            self.fluents.iter().map(|f| f.fluent.clone()),
            self.end_time(),
        );
        for f in &self.fluents {
            for s in &f.segments {
                h.assign(&f.fluent, s.interval, s.value)
                    .expect("segments lie inside the plan");
            }
        }
        h
    }

    pub fn timeline(&self, fluent: &str) -> Option<&FluentTimeline> {
        self.fluents.iter().find(|f| f.fluent == fluent)
    }

    /// Text rendering: one row per fluent (`#` true, `.` false) and per
    /// action (`=` while running), with stage boundaries marked on top.
    pub fn render(&self) -> String {
        let end = self.end_time() as usize;
        let labels: Vec<String> = self
            .fluents
            .iter()
            .map(|f| f.fluent.clone())
            .chain(
                self.actions
                    .iter()
                    .map(|a| format!("{}#{}/{}", a.action, a.actor, a.copy)),
            )
            .collect();
        let width = labels.iter().map(String::len).max().unwrap_or(0).max(5);
        let mut out = String::new();
        let mut ruler = vec![' '; end + 1];
        for &b in &self.boundaries {
            if (b as usize) <= end {
                ruler[b as usize] = '|';
            }
        }
        let _ = writeln!(
            out,
            "{:width$} {}",
            "stage",
            ruler.iter().collect::<String>()
        );
        for f in &self.fluents {
            let mut row = vec!['.'; end];
            for s in f.segments.iter().filter(|s| s.value) {
                for t in s.interval.points() {
                    row[t as usize] = '#';
                }
            }
            let _ = writeln!(
                out,
                "{:width$} {}",
                f.fluent,
                row.iter().collect::<String>()
            );
        }
        for a in &self.actions {
            let mut row = vec![' '; end];
            for t in a.interval.points() {
                row[t as usize] = '=';
            }
            let label = format!("{}#{}/{}", a.action, a.actor, a.copy);
            let _ = writeln!(
                out,
                "{label:width$} {}",
                row.iter().collect::<String>().trim_end()
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("fluent {fluent} has {count} true flow variables in stage {stage}")]
    FlowInvariant {
        fluent: String,
        stage: u32,
        count: usize,
    },
    #[error("split of {fluent} in stage {stage} is not inside the stage")]
    Split { fluent: String, stage: u32 },
    #[error("used copy {copy} of {action} has an empty interval")]
    EmptyAction { action: String, copy: u32 },
}

/// Reads a plan off a satisfying assignment of `encode(shape, _)`.
pub fn decode(shape: &TheoryShape, a: &Assignment) -> Result<(Plan, TimingDiagram), DecodeError> {
    let lay = Layout::new(shape);
    let d = shape.domain();
    let n = shape.n();
    let boundaries: Vec<Time> = (0..=n)
        .map(|t| a.ints[lay.boundary(t) as usize] as Time)
        .collect();
    let mut fluents = Vec::new();
    for (f, fl) in d.fluents.iter().enumerate() {
        for t in 1..=n {
            let on: Vec<(bool, bool)> =
                [(false, false), (false, true), (true, false), (true, true)]
                    .into_iter()
                    .filter(|&(v, w)| a.bools[lay.flow(f, t, v, w) as usize])
                    .collect();
            if on.len() != 1 {
                return Err(DecodeError::FlowInvariant {
                    fluent: fl.name.clone(),
                    stage: t,
                    count: on.len(),
                });
            }
            let (v, w) = on[0];
            let (lo, hi) = (boundaries[t as usize - 1], boundaries[t as usize]);
            let entry = |part, value, start, end| FluentEntry {
                fluent: fl.name.clone(),
                stage: t,
                part,
                value,
                start,
                end,
            };
            if v == w {
                fluents.push(entry(1, w, lo, hi));
            } else {
                let s = a.ints[lay.split(f, t) as usize] as Time;
                if !(lo < s && s < hi) {
                    return Err(DecodeError::Split {
                        fluent: fl.name.clone(),
                        stage: t,
                    });
                }
                fluents.push(entry(0, v, lo, s));
                fluents.push(entry(1, w, s, hi));
            }
        }
    }
    let mut actions = Vec::new();
    for k in 1..=shape.copies() {
        for (ai, act) in shape.actions().iter().enumerate() {
            if !a.bools[lay.use_var(ai, k) as usize] {
                continue;
            }
            let cv = lay.copy(ai, k);
            let (start, end) = (
                a.ints[cv.start as usize] as Time,
                a.ints[cv.end as usize] as Time,
            );
            if start >= end {
                return Err(DecodeError::EmptyAction {
                    action: act.label(),
                    copy: k,
                });
            }
            actions.push(ActionEntry {
                action: act.name.clone(),
                actor: act.actor,
                copy: k,
                start,
                end,
            });
        }
    }
    actions.sort_by(|x, y| {
        (x.start, x.end, &x.action, x.actor, x.copy)
            .cmp(&(y.start, y.end, &y.action, y.actor, y.copy))
    });
    let plan = Plan {
        n,
        boundaries,
        objective: None,
        fluents,
        actions,
    };
    let diagram = TimingDiagram::from_plan(&plan).expect("decoded entries tile the plan");
    Ok((plan, diagram))
}

/// Converts a scaled objective value back to plan units.
pub fn objective_value(shape: &TheoryShape, kind: ObjectiveKind, raw: i64) -> Option<Cost> {
    match kind {
        ObjectiveKind::None => None,
        ObjectiveKind::Makespan => Some(Cost::integer(raw)),
        ObjectiveKind::Costs => Some(Cost(Ratio::new(raw, cost_scale(shape)))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Limits {
    pub max_n: u32,
    /// Copy cap; `None` uses `max(1, N - 1)` at every probe.
    pub copy_cap: Option<u32>,
    /// Horizon; `None` uses the domain default for each probe.
    pub horizon: Option<Time>,
    /// Wall-clock budget for the whole search.
    pub time_budget: Option<Duration>,
    /// Probe N = 1, 2, 4, ... instead of every N. The N found is then not
    /// guaranteed to be minimal.
    pub geometric: bool,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_n: 20,
            copy_cap: None,
            horizon: None,
            time_budget: Some(Duration::from_secs(300)),
            geometric: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeStatus {
    Sat,
    Unsat,
    Limit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub n: u32,
    pub copies: u32,
    pub horizon: Time,
    pub bool_vars: usize,
    pub int_vars: usize,
    pub constraints: usize,
    pub nodes: u64,
    pub wall_ms: u128,
    pub status: ProbeStatus,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Found {
        plan: Plan,
        diagram: TimingDiagram,
        n: u32,
        /// The objective (if any) was proven optimal at this N.
        optimal: bool,
        /// Every smaller N was probed and refuted.
        minimal_n: bool,
        /// The solver assignment the plan was decoded from.
        assignment: Assignment,
    },
    ExhaustedN,
    ResourceLimit {
        n: u32,
        reason: String,
        incumbent: Option<Plan>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchReport {
    pub outcome: SearchOutcome,
    pub probes: Vec<ProbeRecord>,
}

impl SearchReport {
    pub fn nodes(&self) -> u64 {
        self.probes.iter().map(|p| p.nodes).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("invalid domain: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidDomain(Vec<Diagnostic>),
    #[error("max_n must be at least 1")]
    NoStages,
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error("decoding failed: {0}")]
    Decode(#[from] DecodeError),
}

/// Values of N probed in order.
pub fn probe_sequence(max_n: u32, geometric: bool) -> Vec<u32> {
    if !geometric {
        return (1..=max_n).collect();
    }
    let mut out = Vec::new();
    let mut n = 1u32;
    while n < max_n {
        out.push(n);
        n = n.saturating_mul(2);
    }
    out.push(max_n);
    out
}

/// Instantiates and encodes the probe for `n` under `limits`.
pub fn probe_shape(d: &Domain, n: u32, limits: &Limits) -> Result<TheoryShape, TheoryError> {
    let k = limits.copy_cap.unwrap_or_else(|| default_copy_cap(n));
    let h = limits.horizon.unwrap_or_else(|| default_horizon(d, n));
    instantiate(d, n, k, h)
}

/// Probes N in order and returns the first satisfiable theory, decoded.
/// With an objective, optimization happens at that first N only.
pub fn find_plan(
    d: &Domain,
    objective: ObjectiveKind,
    limits: &Limits,
    cfg: &SolverConfig,
) -> Result<SearchReport, SearchError> {
    let diags = validate_domain(d);
    if !diags.is_empty() {
        return Err(SearchError::InvalidDomain(diags));
    }
    if limits.max_n == 0 {
        return Err(SearchError::NoStages);
    }
    let started = Instant::now();
    let mut probes = Vec::new();
    let seq = probe_sequence(limits.max_n, limits.geometric);
    for (idx, &n) in seq.iter().enumerate() {
        if limits.horizon.is_some_and(|h| h < n as Time) {
            break;
        }
        let shape = probe_shape(d, n, limits)?;
        let model = encode(&shape, objective);
        let mut pcfg = cfg.clone();
        if let Some(total) = limits.time_budget {
            let left = total.saturating_sub(started.elapsed());
            pcfg.time_budget = Some(pcfg.time_budget.map_or(left, |t| t.min(left)));
        }
        let out = solve(&model, &pcfg).expect("encoder emits well-formed models");
        let status = match out.result {
            SolveResult::Sat { .. } => ProbeStatus::Sat,
            SolveResult::Unsat => ProbeStatus::Unsat,
            SolveResult::ResourceLimit { .. } => ProbeStatus::Limit,
        };
        probes.push(ProbeRecord {
            n,
            copies: shape.copies(),
            horizon: shape.horizon(),
            bool_vars: model.bools.len(),
            int_vars: model.ints.len(),
            constraints: model.constraints.len(),
            nodes: out.stats.nodes,
            wall_ms: out.stats.elapsed.as_millis(),
            status,
        });
        match out.result {
            SolveResult::Sat {
                assignment,
                objective: raw,
            } => {
                let (mut plan, diagram) = decode(&shape, &assignment)?;
                plan.objective = raw.and_then(|v| objective_value(&shape, objective, v));
                let minimal_n = seq[..idx].iter().copied().eq(1..n);
                return Ok(SearchReport {
                    outcome: SearchOutcome::Found {
                        plan,
                        diagram,
                        n,
                        optimal: objective != ObjectiveKind::None,
                        minimal_n,
                        assignment,
                    },
                    probes,
                });
            }
            SolveResult::Unsat => {}
            SolveResult::ResourceLimit { reason, incumbent } => {
                let incumbent = match incumbent {
                    Some((a, v)) => {
                        let (mut plan, _) = decode(&shape, &a)?;
                        plan.objective = objective_value(&shape, objective, v);
                        Some(plan)
                    }
                    None => None,
                };
                return Ok(SearchReport {
                    outcome: SearchOutcome::ResourceLimit {
                        n,
                        reason,
                        incumbent,
                    },
                    probes,
                });
            }
        }
    }
    Ok(SearchReport {
        outcome: SearchOutcome::ExhaustedN,
        probes,
    })
}
