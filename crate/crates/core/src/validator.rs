//! Semantic plan checking against interval-logic semantics, and a bounded
//! model enumerator built on the same rules. Nothing here looks at the
//! constraint encoding.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{validate_domain, Diagnostic, Domain, Skill, SkillKind, TemporalRel};
use crate::interval::{allen_relation, holds_composite, AllenRelation, Composite, Interval, Time};
use crate::search::{ActionEntry, FluentEntry, Plan, TimingDiagram};
use crate::theory::{ground_actions, ActionKind, GroundAction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleId {
    Structure,
    UnknownSymbol,
    /// (a) initial state.
    Initial,
    /// (a) terminal condition.
    Terminal,
    /// (b) every change is justified.
    Frame,
    /// (c) the skill's temporal constraints.
    ActionAxiom,
    /// (d) interfering fluents never hold together.
    Interference,
    /// (e) delays last exactly their duration, timers at least one tick.
    Duration,
    /// (f) occurrences of one action by one actor are disjoint.
    NonOverlap,
    TemporalAction,
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuleId::Structure => "structure",
            RuleId::UnknownSymbol => "unknown symbol",
            RuleId::Initial => "a/initial",
            RuleId::Terminal => "a/terminal",
            RuleId::Frame => "b/frame",
            RuleId::ActionAxiom => "c/action-axiom",
            RuleId::Interference => "d/interference",
            RuleId::Duration => "e/duration",
            RuleId::NonOverlap => "f/non-overlap",
            RuleId::TemporalAction => "temporal-action",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: RuleId,
    pub atoms: Vec<String>,
    pub intervals: Vec<Interval>,
    pub explanation: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.rule, self.atoms.join(", "))?;
        if !self.intervals.is_empty() {
            let ivs: Vec<String> = self.intervals.iter().map(|i| i.to_string()).collect();
            write!(f, " @ {}", ivs.join(" "))?;
        }
        write!(f, ": {}", self.explanation)
    }
}

fn violation(
    rule: RuleId,
    atoms: &[&str],
    intervals: &[Interval],
    explanation: impl Into<String>,
) -> Violation {
    Violation {
        rule,
        atoms: atoms.iter().map(|s| s.to_string()).collect(),
        intervals: intervals.to_vec(),
        explanation: explanation.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Valid,
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub verdict: Verdict,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        ValidationReport {
            verdict: if violations.is_empty() {
                Verdict::Valid
            } else {
                Verdict::Invalid
            },
            violations,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.verdict == Verdict::Valid
    }

    pub fn has(&self, rule: RuleId) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }

    pub fn to_text(&self) -> String {
        let mut out = match self.verdict {
            Verdict::Valid => "valid\n".to_string(),
            Verdict::Invalid => format!("invalid: {} violation(s)\n", self.violations.len()),
        };
        for v in &self.violations {
            out.push_str(&format!("  {v}\n"));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Skills able to justify a rise or a fall of each fluent.
#[derive(Debug, Clone)]
pub struct FrameTable {
    raisers: HashMap<String, BTreeSet<String>>,
    lowerers: HashMap<String, BTreeSet<String>>,
}

impl FrameTable {
    pub fn new(d: &Domain) -> Self {
        let mut raisers: HashMap<String, BTreeSet<String>> = HashMap::new();
        let mut lowerers: HashMap<String, BTreeSet<String>> = HashMap::new();
        for s in &d.skills {
            for f in d.effective_raises(s) {
                raisers.entry(f).or_default().insert(s.name.clone());
            }
            for f in d.effective_lowers(s) {
                lowerers.entry(f).or_default().insert(s.name.clone());
            }
        }
        FrameTable { raisers, lowerers }
    }

    pub fn justifies(&self, skill: &str, fluent: &str, rising: bool) -> bool {
        let table = if rising {
            &self.raisers
        } else {
            &self.lowerers
        };
        table.get(fluent).is_some_and(|s| s.contains(skill))
    }
}

/// `row` extended by one tick on either side: index 0 is time -1 (the
/// initial value), index `T + 1` is time `T` (goal membership).
pub fn extended_row(row: &[bool], init: bool, goal: bool) -> Vec<bool> {
    let mut ext = Vec::with_capacity(row.len() + 2);
    ext.push(init);
    ext.extend_from_slice(row);
    ext.push(goal);
    ext
}

/// Maximal run of `true` in `ext` containing index `i`.
fn true_run(ext: &[bool], i: usize) -> Option<Interval> {
    if !*ext.get(i)? {
        return None;
    }
    let mut l = i;
    while l > 0 && ext[l - 1] {
        l -= 1;
    }
    let mut r = i + 1;
    while r < ext.len() && ext[r] {
        r += 1;
    }
    Interval::new(l as Time, r as Time).ok()
}

fn changes_inside(ext: &[bool], a: Interval, rising: bool) -> usize {
    // Ticks p with S < p < E, shifted by one.
    ((a.l() + 1)..a.r())
        .filter(|&p| {
            let p = p as usize + 1;
            ext[p] == rising && ext[p - 1] != rising
        })
        .count()
}

/// Checks one temporal constraint between a fluent (given as an extended
/// row) and an action interval. Returns the reason on failure.
pub fn check_relation(rel: TemporalRel, ext: &[bool], action: Interval) -> Result<(), String> {
    let (s, e) = (action.l() as usize, action.r() as usize);
    if e + 1 >= ext.len() {
        return Err("action ends after the plan".into());
    }
    // Action interval in extended coordinates.
    let a = Interval::new(s as Time + 1, e as Time + 1).expect("non-singular");
    match rel {
        TemporalRel::Contains => match true_run(ext, s) {
            Some(x) if allen_relation(x, a) == AllenRelation::Contains => Ok(()),
            _ => Err("fluent does not hold strictly around the action".into()),
        },
        TemporalRel::OverlappedBy => {
            let rises = changes_inside(ext, action, true);
            if rises != 1 {
                return Err(format!(
                    "expected exactly one rise inside the action, found {rises}"
                ));
            }
            match true_run(ext, e) {
                Some(x) if allen_relation(a, x) == AllenRelation::Overlaps => Ok(()),
                _ => Err("fluent does not rise inside the action and outlast it".into()),
            }
        }
        TemporalRel::Overlaps => {
            let falls = changes_inside(ext, action, false);
            if falls != 1 {
                return Err(format!(
                    "expected exactly one fall inside the action, found {falls}"
                ));
            }
            if ext[e] {
                return Err("fluent still holds at the last tick of the action".into());
            }
            match true_run(ext, s) {
                Some(x) if allen_relation(x, a) == AllenRelation::Overlaps => Ok(()),
                _ => Err("fluent does not hold before the action and fall inside it".into()),
            }
        }
        TemporalRel::Equals => {
            if e < s + 3 {
                return Err("action too short for a one-tick inset on both sides".into());
            }
            let want = Interval::new(a.l() + 1, a.r() - 1).unwrap();
            match true_run(ext, s + 2) {
                Some(x) if allen_relation(x, want) == AllenRelation::Equal => Ok(()),
                _ => Err("resource does not hold exactly one tick inside the action".into()),
            }
        }
    }
}

/// Rules (a), (b) and (c) for a single fluent given its row over
/// `[0, T)` and the skill occurrences of the plan.
pub fn fluent_violations(
    d: &Domain,
    frame: &FrameTable,
    fluent: &str,
    row: &[bool],
    skills: &[(&Skill, Interval)],
) -> Vec<Violation> {
    let mut out = Vec::new();
    let init = d.init.contains(fluent);
    let goal = d.goal.contains(fluent);
    let end = row.len();
    if end == 0 {
        return out;
    }
    if row[0] != init {
        out.push(violation(
            RuleId::Initial,
            &[fluent],
            &[],
            format!("value at time 0 must be {init}"),
        ));
    }
    if goal && !row[end - 1] {
        out.push(violation(
            RuleId::Terminal,
            &[fluent],
            &[],
            format!("goal fluent is false at the final tick {}", end - 1),
        ));
    }
    for p in 1..end {
        if row[p] == row[p - 1] {
            continue;
        }
        let rising = row[p];
        let p = p as Time;
        let covered = skills
            .iter()
            .any(|(s, iv)| iv.l() < p && p < iv.r() && frame.justifies(&s.name, fluent, rising));
        if !covered {
            out.push(violation(
                RuleId::Frame,
                &[fluent],
                &[],
                format!(
                    "{} at time {p} is not strictly inside an action that {} it",
                    if rising { "rise" } else { "fall" },
                    if rising { "raises" } else { "lowers" }
                ),
            ));
        }
    }
    let ext = extended_row(row, init, goal);
    for (s, iv) in skills {
        for c in s.constraints.iter().filter(|c| c.fluent == fluent) {
            if let Err(why) = check_relation(c.rel, &ext, *iv) {
                out.push(violation(
                    RuleId::ActionAxiom,
                    &[&s.name, fluent],
                    &[*iv],
                    format!("{} {}: {why}", c.rel, fluent),
                ));
            }
        }
    }
    out
}

fn true_segments(row: &[bool]) -> Vec<Interval> {
    let mut out = Vec::new();
    let mut t = 0;
    while t < row.len() {
        if row[t] {
            let l = t;
            while t < row.len() && row[t] {
                t += 1;
            }
            out.push(Interval::new(l as Time, t as Time).unwrap());
        } else {
            t += 1;
        }
    }
    out
}

/// Rule (d) for one pair of rows.
pub fn interference_violation(p: &str, q: &str, rp: &[bool], rq: &[bool]) -> Option<Violation> {
    for x in true_segments(rp) {
        for y in true_segments(rq) {
            if !holds_composite(Composite::Disjoint, x, y) {
                return Some(violation(
                    RuleId::Interference,
                    &[p, q],
                    &[x, y],
                    "interfering fluents hold at the same time",
                ));
            }
        }
    }
    None
}

fn structure(p: &Plan, d: &Domain, out: &mut Vec<Violation>) {
    let b = &p.boundaries;
    if b.len() != p.n as usize + 1 || p.n == 0 {
        out.push(violation(
            RuleId::Structure,
            &[],
            &[],
            format!(
                "expected {} boundaries for n = {}, found {}",
                p.n + 1,
                p.n,
                b.len()
            ),
        ));
        return;
    }
    if b[0] != 0 || b.windows(2).any(|w| w[0] >= w[1]) {
        out.push(violation(
            RuleId::Structure,
            &[],
            &[],
            "boundaries must start at 0 and increase strictly",
        ));
        return;
    }
    let mut per_stage: BTreeMap<(&str, u32), Vec<&FluentEntry>> = BTreeMap::new();
    for e in &p.fluents {
        if d.fluent(&e.fluent).is_none() {
            out.push(violation(
                RuleId::UnknownSymbol,
                &[&e.fluent],
                &[],
                "fluent is not declared",
            ));
            continue;
        }
        if e.stage == 0 || e.stage > p.n || e.part > 1 {
            out.push(violation(
                RuleId::Structure,
                &[&e.fluent],
                &[],
                format!("stage {} part {} does not exist", e.stage, e.part),
            ));
            continue;
        }
        let (lo, hi) = (b[e.stage as usize - 1], b[e.stage as usize]);
        if e.start < lo || e.end > hi || e.start >= e.end {
            out.push(violation(
                RuleId::Structure,
                &[&e.fluent],
                &[],
                format!(
                    "entry [{}, {}) is not inside stage {} [{lo}, {hi})",
                    e.start, e.end, e.stage
                ),
            ));
            continue;
        }
        per_stage.entry((&e.fluent, e.stage)).or_default().push(e);
    }
    for f in &d.fluents {
        let mut last: Option<bool> = None;
        for t in 1..=p.n {
            let Some(es) = per_stage.get_mut(&(f.name.as_str(), t)) else {
                out.push(violation(
                    RuleId::Structure,
                    &[&f.name],
                    &[],
                    format!("no entry for stage {t}"),
                ));
                break;
            };
            es.sort_by_key(|e| e.start);
            let values: Vec<bool> = es.iter().map(|e| e.value).collect();
            let changes = values.windows(2).filter(|w| w[0] != w[1]).count();
            if changes > 1 {
                out.push(violation(
                    RuleId::Structure,
                    &[&f.name],
                    &[],
                    format!("more than one change in stage {t}"),
                ));
            }
            if last.is_some_and(|v| v != values[0]) {
                out.push(violation(
                    RuleId::Structure,
                    &[&f.name],
                    &[],
                    format!("value changes at the boundary of stage {t}"),
                ));
            }
            last = values.last().copied();
        }
    }
    let bset: BTreeSet<Time> = b.iter().copied().collect();
    for a in &p.actions {
        if !bset.contains(&a.start) || !bset.contains(&a.end) || a.start >= a.end {
            out.push(violation(
                RuleId::Structure,
                &[&a.action],
                &[],
                format!("interval [{}, {}) is not a union of stages", a.start, a.end),
            ));
        }
    }
}

fn actor_allowed(d: &Domain, a: &ActionEntry) -> Option<bool> {
    if let Some(s) = d.skill(&a.action) {
        return Some(d.skill_actors(s).contains(&a.actor));
    }
    d.temporal_action(&a.action)
        .map(|t| d.temporal_action_actors(t).contains(&a.actor))
}

/// Checks a plan against the domain and reports every violated rule.
pub fn validate_plan(d: &Domain, p: &Plan) -> ValidationReport {
    let mut out = Vec::new();
    structure(p, d, &mut out);
    for a in &p.actions {
        match actor_allowed(d, a) {
            None => out.push(violation(
                RuleId::UnknownSymbol,
                &[&a.action],
                &[],
                "action is not declared",
            )),
            Some(false) => out.push(violation(
                RuleId::UnknownSymbol,
                &[&a.action],
                &[],
                format!("actor {} cannot run it", a.actor),
            )),
            Some(true) => {}
        }
    }
    if !out.is_empty() {
        return ValidationReport::from_violations(out);
    }
    let diagram = match TimingDiagram::from_plan(p) {
        Ok(dg) => dg,
        Err(e) => {
            out.push(violation(RuleId::Structure, &[], &[], e.to_string()));
            return ValidationReport::from_violations(out);
        }
    };
    let h = diagram.history();
    let frame = FrameTable::new(d);
    let skills: Vec<(&Skill, Interval)> = diagram
        .actions
        .iter()
        .filter_map(|a| d.skill(&a.action).map(|s| (s, a.interval)))
        .collect();
    for f in &d.fluents {
        let row = h.row(&f.name).expect("every fluent has a timeline");
        out.extend(fluent_violations(d, &frame, &f.name, row, &skills));
    }
    for (i, j) in d.interference_pairs() {
        let (p_, q_) = (&d.fluents[i].name, &d.fluents[j].name);
        if let Some(v) = interference_violation(p_, q_, h.row(p_).unwrap(), h.row(q_).unwrap()) {
            out.push(v);
        }
    }
    for (s, iv) in &skills {
        let ok = match s.kind {
            SkillKind::Delay => Some(iv.size()) == s.duration,
            SkillKind::Timer => iv.size() >= 1,
        };
        if !ok {
            out.push(violation(
                RuleId::Duration,
                &[&s.name],
                &[*iv],
                format!("lasts {} ticks", iv.size()),
            ));
        }
    }
    let mut by_action: BTreeMap<(&str, u32), Vec<Interval>> = BTreeMap::new();
    for a in &diagram.actions {
        by_action
            .entry((&a.action, a.actor))
            .or_default()
            .push(a.interval);
    }
    for ((name, actor), ivs) in &by_action {
        for x in 0..ivs.len() {
            for y in x + 1..ivs.len() {
                if !holds_composite(Composite::Disjoint, ivs[x], ivs[y]) {
                    out.push(violation(
                        RuleId::NonOverlap,
                        &[name],
                        &[ivs[x], ivs[y]],
                        format!("two occurrences by actor {actor} overlap"),
                    ));
                }
            }
        }
    }
    temporal_actions(d, &diagram, &mut out);
    ValidationReport::from_violations(out)
}

fn temporal_actions(d: &Domain, dg: &TimingDiagram, out: &mut Vec<Violation>) {
    let mut claimed = vec![false; dg.actions.len()];
    for ta in dg
        .actions
        .iter()
        .filter(|a| d.temporal_action(&a.action).is_some())
    {
        let t = d.temporal_action(&ta.action).unwrap();
        let mut at = ta.interval.l();
        let mut ok = true;
        for (pos, comp) in t.skills.iter().enumerate() {
            let found = dg.actions.iter().enumerate().find(|(i, a)| {
                !claimed[*i] && a.action == *comp && a.actor == ta.actor && a.interval.l() == at
            });
            match found {
                Some((i, a)) => {
                    claimed[i] = true;
                    at = a.interval.r();
                }
                None => {
                    ok = false;
                    out.push(violation(
                        RuleId::TemporalAction,
                        &[&ta.action, comp],
                        &[ta.interval],
                        format!("component {} does not start at {at}", pos + 1),
                    ));
                    break;
                }
            }
        }
        if ok && at != ta.interval.r() {
            out.push(violation(
                RuleId::TemporalAction,
                &[&ta.action],
                &[ta.interval],
                format!("components end at {at}"),
            ));
        }
    }
    for (i, a) in dg.actions.iter().enumerate() {
        if !claimed[i] && d.owner_of(&a.action).is_some() {
            out.push(violation(
                RuleId::TemporalAction,
                &[&a.action],
                &[a.interval],
                "component runs outside its temporal action",
            ));
        }
    }
}

/// Default candidate limit of [`enumerate_models`].
pub const ENUMERATION_GUARD: u64 = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerateError {
    #[error("candidate space of {0} exceeds the enumeration guard")]
    GuardExceeded(u64),
    #[error("invalid arguments: {0}")]
    Arguments(String),
    #[error("invalid domain: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidDomain(Vec<Diagnostic>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Enumeration {
    Sat(Plan),
    Unsat,
}

impl Enumeration {
    pub fn is_sat(&self) -> bool {
        matches!(self, Enumeration::Sat(_))
    }
}

/// Strictly increasing boundary vectors `0 = b_0 < ... < b_n <= h`.
fn boundary_vectors(n: u32, h: Time) -> Vec<Vec<Time>> {
    fn go(n: u32, h: Time, cur: &mut Vec<Time>, out: &mut Vec<Vec<Time>>) {
        if cur.len() == n as usize + 1 {
            out.push(cur.clone());
            return;
        }
        let last = *cur.last().unwrap();
        let remaining = n as Time + 1 - cur.len() as Time;
        for next in last + 1..=h - (remaining - 1) {
            cur.push(next);
            go(n, h, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if h >= n as Time {
        go(n, h, &mut vec![0], &mut out);
    }
    out
}

/// Stage ranges `[l, r)` of the copies of one ground action.
type CopyConfig = Vec<(u32, u32)>;

/// Ordered lists of at most `k` disjoint stage ranges `[l, r)`.
fn copy_configs(n: u32, k: u32) -> Vec<CopyConfig> {
    fn go(n: u32, k: u32, from: u32, cur: &mut CopyConfig, out: &mut Vec<CopyConfig>) {
        out.push(cur.clone());
        if cur.len() == k as usize {
            return;
        }
        for l in from..=n {
            for r in l + 1..=n + 1 {
                cur.push((l, r));
                go(n, k, r, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(n, k, 1, &mut Vec::new(), &mut out);
    out
}

/// Per-stage fluent behaviour: `(v, w, split)`.
type Timeline = Vec<(bool, bool, Time)>;

fn timelines(b: &[Time], init: bool) -> Vec<Timeline> {
    fn go(b: &[Time], t: usize, v: bool, cur: &mut Timeline, out: &mut Vec<Timeline>) {
        if t == b.len() {
            out.push(cur.clone());
            return;
        }
        let (lo, hi) = (b[t - 1], b[t]);
        cur.push((v, v, lo));
        go(b, t + 1, v, cur, out);
        cur.pop();
        for s in lo + 1..hi {
            cur.push((v, !v, s));
            go(b, t + 1, !v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(b, 1, init, &mut Vec::new(), &mut out);
    out
}

fn count_timelines(b: &[Time]) -> u64 {
    // Each stage is either constant or changes at one of width - 1 splits.
    b.windows(2).map(|w| w[1] - w[0]).product::<u64>()
}

fn timeline_row(tl: &Timeline, b: &[Time]) -> Vec<bool> {
    let mut row = Vec::with_capacity(*b.last().unwrap() as usize);
    for (t, &(v, w, s)) in tl.iter().enumerate() {
        for x in b[t]..b[t + 1] {
            row.push(if x < s { v } else { w });
        }
    }
    row
}

fn action_ok(d: &Domain, g: &GroundAction, b: &[Time], cfg: &[(u32, u32)]) -> bool {
    match g.kind {
        ActionKind::Skill(i) => {
            let s = &d.skills[i];
            cfg.iter().all(|&(l, r)| {
                let len = b[r as usize - 1] - b[l as usize - 1];
                match s.kind {
                    SkillKind::Delay => Some(len) == s.duration,
                    SkillKind::Timer => len >= 1,
                }
            })
        }
        ActionKind::Temporal(_) => true,
    }
}

fn build_plan(
    n: u32,
    b: &[Time],
    d: &Domain,
    acts: &[GroundAction],
    configs: &[&CopyConfig],
    tls: &[&Timeline],
) -> Plan {
    let mut fluents = Vec::new();
    for (f, tl) in d.fluents.iter().zip(tls) {
        for (t, &(v, w, s)) in tl.iter().enumerate() {
            let (lo, hi) = (b[t], b[t + 1]);
            let e = |part, value, start, end| FluentEntry {
                fluent: f.name.clone(),
                stage: t as u32 + 1,
                part,
                value,
                start,
                end,
            };
            if v == w {
                fluents.push(e(1, v, lo, hi));
            } else {
                fluents.push(e(0, v, lo, s));
                fluents.push(e(1, w, s, hi));
            }
        }
    }
    let mut actions = Vec::new();
    for (g, cfg) in acts.iter().zip(configs) {
        for (k, &(l, r)) in cfg.iter().enumerate() {
            actions.push(ActionEntry {
                action: g.name.clone(),
                actor: g.actor,
                copy: k as u32 + 1,
                start: b[l as usize - 1],
                end: b[r as usize - 1],
            });
        }
    }
    Plan {
        n,
        boundaries: b.to_vec(),
        objective: None,
        fluents,
        actions,
    }
}

/// Decides whether the bounded universe with `n` stages, at most `k`
/// copies per action (clamped like the theory) and horizon `h` admits a
/// valid plan, by enumerating candidate plans and filtering them with the
/// validator's rules.
pub fn enumerate_models(
    d: &Domain,
    n: u32,
    k: u32,
    h: Time,
) -> Result<Enumeration, EnumerateError> {
    enumerate_models_with_guard(d, n, k, h, ENUMERATION_GUARD)
}

pub fn enumerate_models_with_guard(
    d: &Domain,
    n: u32,
    k: u32,
    h: Time,
    guard: u64,
) -> Result<Enumeration, EnumerateError> {
    if n == 0 || k == 0 || h < n as Time {
        return Err(EnumerateError::Arguments(format!(
            "n = {n}, k = {k}, h = {h}"
        )));
    }
    let diags = validate_domain(d);
    if !diags.is_empty() {
        return Err(EnumerateError::InvalidDomain(diags));
    }
    let k = k.min(crate::theory::default_copy_cap(n));
    let acts = ground_actions(d);
    let configs = copy_configs(n, k);
    let bvecs = boundary_vectors(n, h);

    let mut total: u64 = 0;
    let mut per_b: Vec<Vec<Vec<&CopyConfig>>> = Vec::with_capacity(bvecs.len());
    for b in &bvecs {
        let allowed: Vec<Vec<&CopyConfig>> = acts
            .iter()
            .map(|g| configs.iter().filter(|c| action_ok(d, g, b, c)).collect())
            .collect();
        let combos = allowed
            .iter()
            .fold(1u64, |acc, v| acc.saturating_mul(v.len() as u64));
        let fl = count_timelines(b).saturating_mul(d.fluents.len() as u64);
        total = total.saturating_add(combos.saturating_mul(1 + fl));
        per_b.push(allowed);
    }
    if total > guard {
        return Err(EnumerateError::GuardExceeded(total));
    }

    let frame = FrameTable::new(d);
    let pairs = d.interference_pairs();
    for (b, allowed) in bvecs.iter().zip(&per_b) {
        let fluent_tls: Vec<Vec<(Timeline, Vec<bool>)>> = d
            .fluents
            .iter()
            .map(|f| {
                timelines(b, d.init.contains(&f.name))
                    .into_iter()
                    .map(|tl| {
                        let row = timeline_row(&tl, b);
                        (tl, row)
                    })
                    .collect()
            })
            .collect();
        let mut idx = vec![0usize; acts.len()];
        if allowed.iter().any(Vec::is_empty) {
            continue;
        }
        loop {
            let chosen: Vec<&CopyConfig> = idx.iter().zip(allowed).map(|(&i, v)| v[i]).collect();
            if let Some(plan) = try_combo(d, &frame, &pairs, n, b, &acts, &chosen, &fluent_tls) {
                return Ok(Enumeration::Sat(plan));
            }
            // Odometer over the per-action choices.
            let mut pos = 0;
            loop {
                if pos == idx.len() {
                    break;
                }
                idx[pos] += 1;
                if idx[pos] < allowed[pos].len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos == idx.len() {
                break;
            }
        }
    }
    Ok(Enumeration::Unsat)
}

#[allow(clippy::too_many_arguments)]
fn try_combo(
    d: &Domain,
    frame: &FrameTable,
    pairs: &[(usize, usize)],
    n: u32,
    b: &[Time],
    acts: &[GroundAction],
    chosen: &[&CopyConfig],
    fluent_tls: &[Vec<(Timeline, Vec<bool>)>],
) -> Option<Plan> {
    // Action-only rules first, via the validator on a fluent-free plan.
    let skeleton = build_plan(n, b, d, acts, chosen, &[]);
    let dg = TimingDiagram::from_plan(&skeleton).ok()?;
    let mut v = Vec::new();
    temporal_actions(d, &dg, &mut v);
    if !v.is_empty() {
        return None;
    }
    let skills: Vec<(&Skill, Interval)> = dg
        .actions
        .iter()
        .filter_map(|a| d.skill(&a.action).map(|s| (s, a.interval)))
        .collect();
    let candidates: Vec<Vec<usize>> = d
        .fluents
        .iter()
        .zip(fluent_tls)
        .map(|(f, tls)| {
            tls.iter()
                .enumerate()
                .filter(|(_, (_, row))| {
                    fluent_violations(d, frame, &f.name, row, &skills).is_empty()
                })
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    if candidates.iter().any(Vec::is_empty) {
        return None;
    }
    let mut pick = vec![0usize; d.fluents.len()];
    if !assign_fluents(0, d, pairs, fluent_tls, &candidates, &mut pick) {
        return None;
    }
    let tls: Vec<&Timeline> = pick
        .iter()
        .enumerate()
        .map(|(f, &i)| &fluent_tls[f][i].0)
        .collect();
    let plan = build_plan(n, b, d, acts, chosen, &tls);
    validate_plan(d, &plan).is_valid().then_some(plan)
}

fn assign_fluents(
    f: usize,
    d: &Domain,
    pairs: &[(usize, usize)],
    tls: &[Vec<(Timeline, Vec<bool>)>],
    cands: &[Vec<usize>],
    pick: &mut Vec<usize>,
) -> bool {
    if f == cands.len() {
        return true;
    }
    for &c in &cands[f] {
        let row = &tls[f][c].1;
        let clash = pairs.iter().any(|&(p, q)| {
            let other = if p == f && q < f {
                q
            } else if q == f && p < f {
                p
            } else {
                return false;
            };
            interference_violation(
                &d.fluents[f].name,
                &d.fluents[other].name,
                row,
                &tls[other][pick[other]].1,
            )
            .is_some()
        });
        if clash {
            continue;
        }
        pick[f] = c;
        if assign_fluents(f + 1, d, pairs, tls, cands, pick) {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Fluent;
    use std::collections::BTreeSet;

    fn set(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn simple() -> Domain {
        Domain {
            fluents: vec![Fluent::ordinary("g")],
            actors: 1,
            skills: vec![Skill::delay("a", 2).raising("g")],
            interference: vec![],
            temporal_actions: vec![],
            init: BTreeSet::new(),
            goal: set(&["g"]),
        }
    }

    fn fe(fluent: &str, stage: u32, part: u8, value: bool, start: Time, end: Time) -> FluentEntry {
        FluentEntry {
            fluent: fluent.into(),
            stage,
            part,
            value,
            start,
            end,
        }
    }

    fn act(action: &str, start: Time, end: Time) -> ActionEntry {
        ActionEntry {
            action: action.into(),
            actor: 1,
            copy: 1,
            start,
            end,
        }
    }

    fn simple_plan() -> Plan {
        Plan {
            n: 1,
            boundaries: vec![0, 2],
            objective: None,
            fluents: vec![fe("g", 1, 0, false, 0, 1), fe("g", 1, 1, true, 1, 2)],
            actions: vec![act("a", 0, 2)],
        }
    }

    #[test]
    fn simple_plan_is_valid() {
        let r = validate_plan(&simple(), &simple_plan());
        assert!(r.is_valid(), "{}", r.to_text());
    }

    #[test]
    fn unjustified_rise() {
        let mut p = simple_plan();
        p.actions.clear();
        let r = validate_plan(&simple(), &p);
        assert!(r.has(RuleId::Frame));
        assert!(!r.is_valid());
    }

    #[test]
    fn wrong_duration_and_unknown_symbols() {
        let mut p = simple_plan();
        p.boundaries = vec![0, 3];
        p.fluents = vec![fe("g", 1, 0, false, 0, 1), fe("g", 1, 1, true, 1, 3)];
        p.actions = vec![act("a", 0, 3)];
        assert!(validate_plan(&simple(), &p).has(RuleId::Duration));
        let mut q = simple_plan();
        q.actions.push(act("zzz", 0, 2));
        assert!(validate_plan(&simple(), &q).has(RuleId::UnknownSymbol));
        let mut q = simple_plan();
        q.fluents.push(fe("nope", 1, 1, false, 0, 2));
        assert!(validate_plan(&simple(), &q).has(RuleId::UnknownSymbol));
    }

    #[test]
    fn initial_and_terminal() {
        let mut p = simple_plan();
        p.fluents = vec![fe("g", 1, 1, true, 0, 2)];
        assert!(validate_plan(&simple(), &p).has(RuleId::Initial));
        p.fluents = vec![fe("g", 1, 1, false, 0, 2)];
        assert!(validate_plan(&simple(), &p).has(RuleId::Terminal));
    }

    #[test]
    fn structure_rules() {
        let mut p = simple_plan();
        p.boundaries = vec![1, 2];
        assert!(validate_plan(&simple(), &p).has(RuleId::Structure));
        let mut p = simple_plan();
        p.actions = vec![act("a", 0, 1)];
        assert!(validate_plan(&simple(), &p).has(RuleId::Structure));
    }

    #[test]
    fn relation_rules_on_rows() {
        let a = Interval::new(2, 5).unwrap();
        // Row over [0, 8): true on [1, 6).
        let row: Vec<bool> = (0..8).map(|t| (1..6).contains(&t)).collect();
        let ext = extended_row(&row, false, false);
        assert!(check_relation(TemporalRel::Contains, &ext, a).is_ok());
        // Touching the endpoint is not strict containment.
        let row2: Vec<bool> = (0..8).map(|t| (2..6).contains(&t)).collect();
        assert!(
            check_relation(TemporalRel::Contains, &extended_row(&row2, false, false), a).is_err()
        );
        // Rises at 3 inside [2, 5) and holds past 5.
        let row3: Vec<bool> = (0..8).map(|t| t >= 3).collect();
        assert!(check_relation(
            TemporalRel::OverlappedBy,
            &extended_row(&row3, false, true),
            a
        )
        .is_ok());
        assert!(
            check_relation(TemporalRel::Overlaps, &extended_row(&row3, false, true), a).is_err()
        );
        // Holds before 2, falls at 4.
        let row4: Vec<bool> = (0..8).map(|t| t < 4).collect();
        assert!(
            check_relation(TemporalRel::Overlaps, &extended_row(&row4, true, false), a).is_ok()
        );
        // Equals: true exactly on [3, 4).
        let row5: Vec<bool> = (0..8).map(|t| t == 3).collect();
        assert!(check_relation(TemporalRel::Equals, &extended_row(&row5, false, false), a).is_ok());
        let row6: Vec<bool> = (0..8).map(|t| (3..5).contains(&t)).collect();
        assert!(
            check_relation(TemporalRel::Equals, &extended_row(&row6, false, false), a).is_err()
        );
    }

    #[test]
    fn interference_detected() {
        let rp = [false, true, true, false];
        let rq = [false, false, true, true];
        assert!(interference_violation("p", "q", &rp, &rq).is_some());
        let rq2 = [false, false, false, true];
        assert!(interference_violation("p", "q", &rp, &rq2).is_none());
    }

    #[test]
    fn enumeration_examples() {
        let e = enumerate_models(&simple(), 1, 1, 2).unwrap();
        let Enumeration::Sat(p) = e else {
            panic!("expected a model")
        };
        assert!(validate_plan(&simple(), &p).is_valid());
        let mut d = simple();
        d.skills[0].raises.clear();
        for n in 1..=3 {
            assert_eq!(
                enumerate_models(&d, n, 1, 2 * n as Time).unwrap(),
                Enumeration::Unsat
            );
        }
    }

    #[test]
    fn enumeration_guard() {
        assert!(matches!(
            enumerate_models_with_guard(&simple(), 3, 2, 6, 10),
            Err(EnumerateError::GuardExceeded(_))
        ));
        assert!(enumerate_models(&simple(), 0, 1, 2).is_err());
    }

    #[test]
    fn helper_counts() {
        assert_eq!(boundary_vectors(2, 4).len(), 6);
        assert_eq!(copy_configs(2, 1).len(), 4);
        let b = [0, 2, 5];
        assert_eq!(timelines(&b, false).len() as u64, count_timelines(&b));
    }
}
