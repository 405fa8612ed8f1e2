//! Cushing-gadget benchmark domains.
//!
//! One gadget has three effect delays: `a1` equals resource `r1`, `a2`
//! equals resource `r2` while `r1` overlaps it, and `a3` runs inside both
//! resources and raises the gadget's goal fluent. Type II stacks gadgets:
//! the `a3` of level `j` equals a resource `r3` that must contain the `a1`
//! of level `j + 1`. Type III additionally chains the stacks in generation
//! order through sequencing fluents.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Domain, Fluent, Skill, TemporalRel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BenchType {
    I,
    II,
    III,
}

impl fmt::Display for BenchType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BenchType::I => "I",
            BenchType::II => "II",
            BenchType::III => "III",
        })
    }
}

impl FromStr for BenchType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "I" | "1" => Ok(BenchType::I),
            "II" | "2" => Ok(BenchType::II),
            "III" | "3" => Ok(BenchType::III),
            other => Err(format!(
                "unknown benchmark type '{other}' (expected I, II or III)"
            )),
        }
    }
}

/// Durations of the innermost gadget. Outer levels are derived so that
/// each nested gadget fits inside the enclosing `a3` with one-tick insets.
///
/// | skill | default |
/// |-------|---------|
/// | a1    | 8       |
/// | a2    | 6       |
/// | a3    | 2       |
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetDurations {
    pub a1: u64,
    pub a2: u64,
    pub a3: u64,
}

impl Default for GadgetDurations {
    fn default() -> Self {
        GadgetDurations {
            a1: 8,
            a2: 6,
            a3: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetSpec {
    pub kind: BenchType,
    pub copies: u32,
    pub height: Option<u32>,
    #[serde(default)]
    pub durations: GadgetDurations,
}

impl GadgetSpec {
    pub fn type_i(copies: u32) -> Self {
        GadgetSpec {
            kind: BenchType::I,
            copies,
            height: None,
            durations: GadgetDurations::default(),
        }
    }

    pub fn stacked(kind: BenchType, copies: u32, height: u32) -> Self {
        GadgetSpec {
            kind,
            copies,
            height: Some(height),
            durations: GadgetDurations::default(),
        }
    }

    /// Identifier used for file names and run records.
    pub fn instance_id(&self) -> String {
        match self.height {
            Some(h) => format!("gadget-{}-m{}-h{}", self.kind, self.copies, h),
            None => format!("gadget-{}-m{}", self.kind, self.copies),
        }
    }

    fn levels(&self) -> u32 {
        self.height.unwrap_or(1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BenchError {
    #[error("copies must be at least 1")]
    NoCopies,
    #[error("type I takes no height")]
    UnexpectedHeight,
    #[error("type {0} needs a height in 2..=8")]
    BadHeight(BenchType),
    #[error("durations must be positive")]
    ZeroDuration,
}

/// Durations `(a1, a2, a3)` of level `j` (1 = outermost) of an `h`-level
/// stack.
pub fn level_durations(d: GadgetDurations, height: u32, j: u32) -> (u64, u64, u64) {
    let mut a3 = d.a3;
    for _ in j..height {
        // The level below needs its a1 plus a two-tick margin on each side.
        a3 = a3 + (d.a1 - d.a3) + 4;
    }
    (a3 + (d.a1 - d.a3), a3 + (d.a2 - d.a3), a3)
}

fn tag(spec: &GadgetSpec, stack: u32, level: u32) -> String {
    match spec.kind {
        BenchType::I => format!("c{stack}"),
        _ => format!("s{stack}l{level}"),
    }
}

pub fn gen_cushing(spec: &GadgetSpec) -> Result<Domain, BenchError> {
    if spec.copies == 0 {
        return Err(BenchError::NoCopies);
    }
    match (spec.kind, spec.height) {
        (BenchType::I, Some(_)) => return Err(BenchError::UnexpectedHeight),
        (BenchType::II | BenchType::III, h) if !h.is_some_and(|h| (2..=8).contains(&h)) => {
            return Err(BenchError::BadHeight(spec.kind))
        }
        _ => {}
    }
    let dur = spec.durations;
    if dur.a1 == 0 || dur.a2 == 0 || dur.a3 == 0 || dur.a1 < dur.a3 || dur.a2 < dur.a3 {
        return Err(BenchError::ZeroDuration);
    }
    let h = spec.levels();
    let mut fluents = Vec::new();
    let mut skills = Vec::new();
    let mut goal = BTreeSet::new();
    for s in 1..=spec.copies {
        for j in 1..=h {
            let t = tag(spec, s, j);
            let (d1, d2, d3) = level_durations(dur, h, j);
            let (r1, r2, g) = (format!("r1_{t}"), format!("r2_{t}"), format!("g_{t}"));
            fluents.push(Fluent::resource(&r1));
            fluents.push(Fluent::resource(&r2));
            fluents.push(Fluent::ordinary(&g));
            goal.insert(g.clone());
            let mut a1 =
                Skill::delay(format!("a1_{t}"), d1).with_constraint(&r1, TemporalRel::Equals);
            let a2 = Skill::delay(format!("a2_{t}"), d2)
                .with_constraint(&r2, TemporalRel::Equals)
                .with_constraint(&r1, TemporalRel::Overlaps);
            let mut a3 = Skill::delay(format!("a3_{t}"), d3)
                .with_constraint(&r1, TemporalRel::Contains)
                .with_constraint(&r2, TemporalRel::Contains)
                .raising(&g);
            if j > 1 {
                a1 = a1.with_constraint(
                    &format!("r3_{}", tag(spec, s, j - 1)),
                    TemporalRel::Contains,
                );
            }
            if j < h {
                let r3 = format!("r3_{t}");
                fluents.push(Fluent::resource(&r3));
                a3 = a3.with_constraint(&r3, TemporalRel::Equals);
            }
            if spec.kind == BenchType::III && j == 1 {
                if s < spec.copies {
                    let q = format!("seq_{s}");
                    a1 = a1
                        .with_constraint(&q, TemporalRel::OverlappedBy)
                        .raising(&q);
                }
                if s > 1 {
                    a1 = a1.with_constraint(&format!("seq_{}", s - 1), TemporalRel::Contains);
                }
            }
            skills.push(a1);
            skills.push(a2);
            skills.push(a3);
        }
        if spec.kind == BenchType::III && s < spec.copies {
            let q = format!("seq_{s}");
            fluents.push(Fluent::ordinary(&q));
            goal.insert(q);
        }
    }
    Ok(Domain {
        fluents,
        actors: 1,
        skills,
        interference: vec![],
        temporal_actions: vec![],
        init: BTreeSet::new(),
        goal,
    })
}

/// Smallest number of stages admitting a plan for Type I and II
/// instances: five distinct action endpoints per level, minus one.
pub fn expected_min_stages(spec: &GadgetSpec) -> Option<u32> {
    match spec.kind {
        BenchType::I => Some(4),
        BenchType::II => Some(5 * spec.levels() - 1),
        BenchType::III => None,
    }
}
