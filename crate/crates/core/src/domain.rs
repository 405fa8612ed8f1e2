//! Planning domains: fluents, skills (precondition timers and effect
//! delays), interference, actors, temporal actions and the initial and
//! terminal conditions.
//!
//! Domains are read from a JSON document. In strict mode every object is
//! checked for unknown keys before deserialization, and errors carry the
//! path of the offending field.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{path}: unknown key `{key}`")]
    UnknownKey { path: String, key: String },
    #[error("{path}: duration required for delay skill `{skill}`")]
    DurationRequired { path: String, skill: String },
    #[error("duplicate {what} name `{name}`")]
    Duplicate { what: &'static str, name: String },
    #[error("{path}: reference to undeclared {what} `{name}`")]
    Dangling {
        path: String,
        what: &'static str,
        name: String,
    },
    #[error("unknown skill `{0}`")]
    UnknownSkill(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FluentRole {
    #[default]
    Ordinary,
    Resource,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fluent {
    pub name: String,
    #[serde(default)]
    pub role: FluentRole,
}

impl Fluent {
    pub fn ordinary(name: impl Into<String>) -> Self {
        Fluent {
            name: name.into(),
            role: FluentRole::Ordinary,
        }
    }

    pub fn resource(name: impl Into<String>) -> Self {
        Fluent {
            name: name.into(),
            role: FluentRole::Resource,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SkillKind {
    /// Precondition timer: waits, applies no input, lasts at least one tick.
    Timer,
    /// Effect delay: drives the system for exactly `duration` ticks.
    Delay,
}

/// Temporal relation required between a fluent TQA and the action TQA,
/// read as "fluent REL action".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TemporalRel {
    /// The fluent holds strictly around the action.
    #[serde(rename = "contains")]
    Contains,
    /// The action overlaps the fluent: the fluent rises once inside the
    /// action and still holds when it ends.
    #[serde(rename = "overlapped_by")]
    OverlappedBy,
    /// The fluent overlaps the action: it holds before the action starts
    /// and falls once inside it.
    #[serde(rename = "overlaps")]
    Overlaps,
    /// The resource holds exactly over the action, inset by one tick at
    /// either end.
    #[serde(rename = "equals")]
    Equals,
}

impl fmt::Display for TemporalRel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TemporalRel::Contains => "contains",
            TemporalRel::OverlappedBy => "overlapped_by",
            TemporalRel::Overlaps => "overlaps",
            TemporalRel::Equals => "equals",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConstraintSpec {
    pub fluent: String,
    pub rel: TemporalRel,
}

impl ConstraintSpec {
    pub fn new(fluent: impl Into<String>, rel: TemporalRel) -> Self {
        ConstraintSpec {
            fluent: fluent.into(),
            rel,
        }
    }
}

/// Non-negative rational skill cost. Written as an integer when whole,
/// otherwise as a `"p/q"` string; decimals are accepted on input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cost(pub Ratio<i64>);

impl Cost {
    pub fn integer(v: i64) -> Self {
        Cost(Ratio::from_integer(v))
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }
}

impl Default for Cost {
    fn default() -> Self {
        Cost::integer(1)
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl FromStr for Cost {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || format!("invalid cost `{s}`");
        if let Some((p, q)) = s.split_once('/') {
            let p: i64 = p.trim().parse().map_err(|_| bad())?;
            let q: i64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0 {
                return Err(bad());
            }
            return Ok(Cost(Ratio::new(p, q)));
        }
        if let Some((int, frac)) = s.split_once('.') {
            let digits = frac.len() as u32;
            if digits > 12 || !frac.chars().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            let scale = 10i64.pow(digits);
            let neg = int.starts_with('-');
            let int: i64 = if int.is_empty() || int == "-" {
                0
            } else {
                int.parse().map_err(|_| bad())?
            };
            let frac: i64 = if frac.is_empty() {
                0
            } else {
                frac.parse().map_err(|_| bad())?
            };
            let numer = int.abs() * scale + frac;
            return Ok(Cost(Ratio::new(if neg { -numer } else { numer }, scale)));
        }
        s.parse::<i64>().map(Cost::integer).map_err(|_| bad())
    }
}

impl Serialize for Cost {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.denom() == 1 {
            s.serialize_i64(self.numer())
        } else {
            s.serialize_str(&self.to_string())
        }
    }
}

impl<'de> Deserialize<'de> for Cost {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        match Value::deserialize(d)? {
            Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(Cost::integer(i))
                } else {
                    // Shortest round-trip decimal rendering of the float.
                    n.to_string().parse().map_err(D::Error::custom)
                }
            }
            Value::String(s) => s.parse().map_err(D::Error::custom),
            other => Err(D::Error::custom(format!(
                "expected a number or a \"p/q\" string, found {other}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skill {
    pub name: String,
    pub kind: SkillKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<u64>,
    #[serde(default)]
    pub cost: Cost,
    /// Actors allowed to execute the skill; all actors when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actors: Option<Vec<u32>>,
    #[serde(default)]
    pub constraints: Vec<ConstraintSpec>,
    #[serde(default)]
    pub raises: BTreeSet<String>,
}

impl Skill {
    pub fn delay(name: impl Into<String>, duration: u64) -> Self {
        Skill {
            name: name.into(),
            kind: SkillKind::Delay,
            duration: Some(duration),
            cost: Cost::default(),
            actors: None,
            constraints: Vec::new(),
            raises: BTreeSet::new(),
        }
    }

    pub fn timer(name: impl Into<String>) -> Self {
        Skill {
            name: name.into(),
            kind: SkillKind::Timer,
            duration: None,
            cost: Cost::default(),
            actors: None,
            constraints: Vec::new(),
            raises: BTreeSet::new(),
        }
    }

    pub fn with_constraint(mut self, fluent: &str, rel: TemporalRel) -> Self {
        self.constraints.push(ConstraintSpec::new(fluent, rel));
        self
    }

    pub fn raising(mut self, fluent: &str) -> Self {
        self.raises.insert(fluent.to_string());
        self
    }

    pub fn with_cost(mut self, cost: Cost) -> Self {
        self.cost = cost;
        self
    }

    /// Resources this skill is bound to by an equality constraint.
    pub fn equal_resources(&self) -> impl Iterator<Item = &str> {
        self.constraints
            .iter()
            .filter(|c| c.rel == TemporalRel::Equals)
            .map(|c| c.fluent.as_str())
    }
}

/// A named sequence of skills executed back to back by one actor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemporalAction {
    pub name: String,
    pub skills: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Domain {
    pub fluents: Vec<Fluent>,
    #[serde(default = "one")]
    pub actors: u32,
    pub skills: Vec<Skill>,
    #[serde(default)]
    pub interference: Vec<(String, String)>,
    #[serde(default)]
    pub temporal_actions: Vec<TemporalAction>,
    #[serde(default)]
    pub init: BTreeSet<String>,
    #[serde(default)]
    pub goal: BTreeSet<String>,
}

fn one() -> u32 {
    1
}

const TOP_KEYS: &[&str] = &[
    "fluents",
    "actors",
    "skills",
    "interference",
    "temporal_actions",
    "init",
    "goal",
];
const FLUENT_KEYS: &[&str] = &["name", "role"];
const SKILL_KEYS: &[&str] = &[
    "name",
    "kind",
    "duration",
    "cost",
    "actors",
    "constraints",
    "raises",
];
const CONSTRAINT_KEYS: &[&str] = &["fluent", "rel"];
const TEMPORAL_ACTION_KEYS: &[&str] = &["name", "skills"];

fn check_keys(value: &Value, path: &str, allowed: &[&str]) -> Result<(), DomainError> {
    if let Value::Object(map) = value {
        if let Some(key) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(DomainError::UnknownKey {
                path: if path.is_empty() {
                    "$".into()
                } else {
                    path.into()
                },
                key: key.clone(),
            });
        }
    }
    Ok(())
}

fn check_array_keys(
    value: &Value,
    key: &str,
    allowed: &[&str],
    nested: Option<(&str, &[&str])>,
) -> Result<(), DomainError> {
    let Some(Value::Array(items)) = value.get(key) else {
        return Ok(());
    };
    for (i, item) in items.iter().enumerate() {
        let path = format!("{key}[{i}]");
        check_keys(item, &path, allowed)?;
        if let Some((inner, inner_allowed)) = nested {
            if let Some(Value::Array(sub)) = item.get(inner) {
                for (j, s) in sub.iter().enumerate() {
                    check_keys(s, &format!("{path}.{inner}[{j}]"), inner_allowed)?;
                }
            }
        }
    }
    Ok(())
}

fn check_unknown_keys(value: &Value) -> Result<(), DomainError> {
    check_keys(value, "", TOP_KEYS)?;
    check_array_keys(value, "fluents", FLUENT_KEYS, None)?;
    check_array_keys(
        value,
        "skills",
        SKILL_KEYS,
        Some(("constraints", CONSTRAINT_KEYS)),
    )?;
    check_array_keys(value, "temporal_actions", TEMPORAL_ACTION_KEYS, None)
}

/// Parses a domain document in strict mode (unknown keys are errors).
pub fn parse_domain(text: &str) -> Result<Domain, DomainError> {
    parse_domain_with(text, true)
}

pub fn parse_domain_with(text: &str, strict: bool) -> Result<Domain, DomainError> {
    let value: Value = serde_json::from_str(text).map_err(|e| DomainError::Schema {
        path: "$".into(),
        message: e.to_string(),
    })?;
    if strict {
        check_unknown_keys(&value)?;
    }
    let domain: Domain = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        DomainError::Schema {
            path,
            message: e.into_inner().to_string(),
        }
    })?;
    check_references(&domain)?;
    Ok(domain)
}

fn check_references(d: &Domain) -> Result<(), DomainError> {
    for (i, s) in d.skills.iter().enumerate() {
        if s.kind == SkillKind::Delay && s.duration.is_none() {
            return Err(DomainError::DurationRequired {
                path: format!("skills[{i}].duration"),
                skill: s.name.clone(),
            });
        }
    }
    let mut fluents = BTreeSet::new();
    for f in &d.fluents {
        if !fluents.insert(f.name.as_str()) {
            return Err(DomainError::Duplicate {
                what: "fluent",
                name: f.name.clone(),
            });
        }
    }
    let mut actions = BTreeSet::new();
    for name in d
        .skills
        .iter()
        .map(|s| &s.name)
        .chain(d.temporal_actions.iter().map(|t| &t.name))
    {
        if !actions.insert(name.as_str()) {
            return Err(DomainError::Duplicate {
                what: "action",
                name: name.clone(),
            });
        }
    }
    let dangling = |path: String, what, name: &str| DomainError::Dangling {
        path,
        what,
        name: name.to_string(),
    };
    for (i, s) in d.skills.iter().enumerate() {
        for f in &s.raises {
            if !fluents.contains(f.as_str()) {
                return Err(dangling(format!("skills[{i}].raises"), "fluent", f));
            }
        }
        for (j, c) in s.constraints.iter().enumerate() {
            if !fluents.contains(c.fluent.as_str()) {
                return Err(dangling(
                    format!("skills[{i}].constraints[{j}].fluent"),
                    "fluent",
                    &c.fluent,
                ));
            }
        }
    }
    for (i, (a, b)) in d.interference.iter().enumerate() {
        for f in [a, b] {
            if !fluents.contains(f.as_str()) {
                return Err(dangling(format!("interference[{i}]"), "fluent", f));
            }
        }
    }
    for (key, set) in [("init", &d.init), ("goal", &d.goal)] {
        for f in set {
            if !fluents.contains(f.as_str()) {
                return Err(dangling(key.to_string(), "fluent", f));
            }
        }
    }
    let skills: BTreeSet<&str> = d.skills.iter().map(|s| s.name.as_str()).collect();
    for (i, t) in d.temporal_actions.iter().enumerate() {
        for s in &t.skills {
            if !skills.contains(s.as_str()) {
                return Err(dangling(
                    format!("temporal_actions[{i}].skills"),
                    "skill",
                    s,
                ));
            }
        }
    }
    Ok(())
}

impl Domain {
    /// Serializes to the canonical pretty-printed document.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("domain serializes")
    }

    pub fn fluent(&self, name: &str) -> Option<&Fluent> {
        self.fluents.iter().find(|f| f.name == name)
    }

    pub fn is_resource(&self, name: &str) -> bool {
        self.fluent(name)
            .is_some_and(|f| f.role == FluentRole::Resource)
    }

    pub fn skill(&self, name: &str) -> Option<&Skill> {
        self.skills.iter().find(|s| s.name == name)
    }

    pub fn temporal_action(&self, name: &str) -> Option<&TemporalAction> {
        self.temporal_actions.iter().find(|t| t.name == name)
    }

    /// The temporal action a skill belongs to, if any.
    pub fn owner_of(&self, skill: &str) -> Option<&TemporalAction> {
        self.temporal_actions
            .iter()
            .find(|t| t.skills.iter().any(|s| s == skill))
    }

    pub fn interferes(&self, a: &str, b: &str) -> bool {
        self.interference
            .iter()
            .any(|(x, y)| (x == a && y == b) || (x == b && y == a))
    }

    /// Interfering pairs, deduplicated and oriented by declaration order of
    /// the fluents.
    pub fn interference_pairs(&self) -> Vec<(usize, usize)> {
        let index: BTreeMap<&str, usize> = self
            .fluents
            .iter()
            .enumerate()
            .map(|(i, f)| (f.name.as_str(), i))
            .collect();
        let mut pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
        for (a, b) in &self.interference {
            if let (Some(&i), Some(&j)) = (index.get(a.as_str()), index.get(b.as_str())) {
                if i != j {
                    pairs.insert((i.min(j), i.max(j)));
                }
            }
        }
        pairs.into_iter().collect()
    }

    /// Actors allowed to run `skill`, in increasing order.
    pub fn skill_actors(&self, skill: &Skill) -> Vec<u32> {
        match &skill.actors {
            Some(list) => {
                let set: BTreeSet<u32> = list.iter().copied().collect();
                set.into_iter().collect()
            }
            None => (1..=self.actors).collect(),
        }
    }

    /// Actors able to run every component of a temporal action.
    pub fn temporal_action_actors(&self, t: &TemporalAction) -> Vec<u32> {
        (1..=self.actors)
            .filter(|a| {
                t.skills.iter().all(|s| {
                    self.skill(s)
                        .is_some_and(|sk| self.skill_actors(sk).contains(a))
                })
            })
            .collect()
    }

    /// Fluents whose rise the skill can justify: declared raises plus
    /// resources it is equal to.
    pub fn effective_raises(&self, skill: &Skill) -> BTreeSet<String> {
        let mut out = skill.raises.clone();
        out.extend(skill.equal_resources().map(str::to_string));
        out
    }

    /// Fluents whose fall the skill can justify: the derived lowers relation
    /// plus resources it is equal to.
    pub fn effective_lowers(&self, skill: &Skill) -> BTreeSet<String> {
        let mut out = lowers_of(self, skill);
        out.extend(skill.equal_resources().map(str::to_string));
        out
    }

    /// Largest effect-delay duration, at least 1.
    pub fn max_duration(&self) -> u64 {
        self.skills
            .iter()
            .filter_map(|s| s.duration)
            .max()
            .unwrap_or(1)
            .max(1)
    }
}

fn lowers_of(d: &Domain, skill: &Skill) -> BTreeSet<String> {
    let raised = d.effective_raises(skill);
    d.fluents
        .iter()
        .filter(|f| {
            raised
                .iter()
                .any(|r| *r != f.name && d.interferes(&f.name, r))
        })
        .map(|f| f.name.clone())
        .collect()
}

/// The fluents a skill lowers: every fluent interfering with one the skill
/// raises.
pub fn lowers(d: &Domain, skill: &str) -> Result<BTreeSet<String>, DomainError> {
    let s = d
        .skill(skill)
        .ok_or_else(|| DomainError::UnknownSkill(skill.to_string()))?;
    Ok(lowers_of(d, s))
}

/// Which structural assumption a diagnostic refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    /// Effect delays have a positive integer duration.
    PositiveDuration,
    /// Skills split into timers and delays; timers carry no duration.
    SkillKinds,
    UniqueNames,
    UndeclaredSymbol,
    /// Equality constraints only bind resource fluents.
    ResourceEquality,
    /// Initial and terminal conditions mention ordinary fluents only.
    InitGoal,
    /// Interference is irreflexive.
    Irreflexivity,
    TemporalAction,
    Actors,
    Cost,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::PositiveDuration => "positive integer durations",
            Rule::SkillKinds => "timer/delay partition",
            Rule::UniqueNames => "unique names",
            Rule::UndeclaredSymbol => "undeclared symbol",
            Rule::ResourceEquality => "equality on resources only",
            Rule::InitGoal => "initial/terminal conditions on ordinary fluents",
            Rule::Irreflexivity => "irreflexivity of interference",
            Rule::TemporalAction => "temporal action shape",
            Rule::Actors => "actors",
            Rule::Cost => "non-negative cost",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub rule: Rule,
    pub subject: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {}", self.rule, self.subject, self.message)
    }
}

/// Checks every domain invariant and returns one diagnostic per violation.
pub fn validate_domain(d: &Domain) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |rule, subject: &str, message: String| {
        out.push(Diagnostic {
            rule,
            subject: subject.to_string(),
            message,
        })
    };

    let mut seen = BTreeSet::new();
    for f in &d.fluents {
        if !seen.insert(&f.name) {
            push(Rule::UniqueNames, &f.name, "fluent declared twice".into());
        }
    }
    let mut seen = BTreeSet::new();
    for name in d
        .skills
        .iter()
        .map(|s| &s.name)
        .chain(d.temporal_actions.iter().map(|t| &t.name))
    {
        if !seen.insert(name) {
            push(Rule::UniqueNames, name, "action name declared twice".into());
        }
    }
    if d.actors == 0 {
        push(
            Rule::Actors,
            "actors",
            "at least one actor is required".into(),
        );
    }

    for s in &d.skills {
        match (s.kind, s.duration) {
            (SkillKind::Delay, None) => push(
                Rule::PositiveDuration,
                &s.name,
                "effect delay without a duration".into(),
            ),
            (SkillKind::Delay, Some(0)) => push(
                Rule::PositiveDuration,
                &s.name,
                "effect delay duration must be a positive integer".into(),
            ),
            (SkillKind::Timer, Some(_)) => push(
                Rule::SkillKinds,
                &s.name,
                "precondition timer must not declare a fixed duration".into(),
            ),
            _ => {}
        }
        if s.cost.0 < Ratio::from_integer(0) {
            push(Rule::Cost, &s.name, format!("negative cost {}", s.cost));
        }
        if let Some(list) = &s.actors {
            if list.is_empty() {
                push(Rule::Actors, &s.name, "empty actor list".into());
            }
            for a in list {
                if *a == 0 || *a > d.actors {
                    push(
                        Rule::Actors,
                        &s.name,
                        format!("actor {a} outside 1..={}", d.actors),
                    );
                }
            }
        }
        for f in &s.raises {
            if d.fluent(f).is_none() {
                push(
                    Rule::UndeclaredSymbol,
                    &s.name,
                    format!("raises undeclared fluent `{f}`"),
                );
            }
        }
        for c in &s.constraints {
            match d.fluent(&c.fluent) {
                None => push(
                    Rule::UndeclaredSymbol,
                    &s.name,
                    format!("constraint on undeclared fluent `{}`", c.fluent),
                ),
                Some(f) if c.rel == TemporalRel::Equals && f.role != FluentRole::Resource => push(
                    Rule::ResourceEquality,
                    &s.name,
                    format!("equality constraint on ordinary fluent `{}`", c.fluent),
                ),
                _ => {}
            }
        }
    }

    for (key, set) in [("init", &d.init), ("goal", &d.goal)] {
        for f in set {
            match d.fluent(f) {
                None => push(
                    Rule::UndeclaredSymbol,
                    key,
                    format!("undeclared fluent `{f}`"),
                ),
                Some(fl) if fl.role == FluentRole::Resource => push(
                    Rule::InitGoal,
                    key,
                    format!("resource fluent `{f}` in {key}"),
                ),
                _ => {}
            }
        }
    }

    for (a, b) in &d.interference {
        for f in [a, b] {
            if d.fluent(f).is_none() {
                push(
                    Rule::UndeclaredSymbol,
                    "interference",
                    format!("undeclared fluent `{f}`"),
                );
            }
        }
        if a == b {
            push(
                Rule::Irreflexivity,
                "interference",
                format!("fluent `{a}` interferes with itself"),
            );
        }
    }

    let mut owner: BTreeMap<&str, &str> = BTreeMap::new();
    for t in &d.temporal_actions {
        if t.skills.is_empty() {
            push(Rule::TemporalAction, &t.name, "empty skill sequence".into());
        }
        for s in &t.skills {
            if d.skill(s).is_none() {
                push(
                    Rule::UndeclaredSymbol,
                    &t.name,
                    format!("undeclared skill `{s}`"),
                );
            }
            if let Some(prev) = owner.insert(s, &t.name) {
                push(
                    Rule::TemporalAction,
                    &t.name,
                    format!("skill `{s}` already used by temporal action `{prev}`"),
                );
            }
        }
        if !t.skills.is_empty() && d.temporal_action_actors(t).is_empty() {
            push(
                Rule::TemporalAction,
                &t.name,
                "no actor can run every component".into(),
            );
        }
    }
    out
}
