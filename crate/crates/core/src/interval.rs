//! Allen interval algebra over the non-negative integers, temporally
//! qualified assertions (TQAs) and model checking of interval-logic
//! sentences against finite histories.
//!
//! All intervals are half-open, `[l, r)`, and non-singular.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A time point. Time starts at 0.
pub type Time = u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntervalError {
    #[error("singular interval [{l}, {r}): left bound must be below right bound")]
    Singular { l: Time, r: Time },
    #[error("cut {cut} is not strictly inside [{l}, {r})")]
    CutOutsideInterior { cut: Time, l: Time, r: Time },
    #[error("cuts must be strictly increasing")]
    CutsNotIncreasing,
    #[error("history too short: interval ends at {end} but history covers [0, {horizon})")]
    HistoryTooShort { end: Time, horizon: Time },
    #[error("atom `{0}` is not declared in the history")]
    UnknownAtom(String),
    #[error("interval variable `{0}` is unbound")]
    UnboundInterval(String),
}

/// Half-open interval `[l, r)` with `l < r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "(Time, Time)", into = "(Time, Time)")]
pub struct Interval {
    l: Time,
    r: Time,
}

impl Interval {
    pub fn new(l: Time, r: Time) -> Result<Self, IntervalError> {
        if l < r {
            Ok(Interval { l, r })
        } else {
            Err(IntervalError::Singular { l, r })
        }
    }

    #[inline]
    pub fn l(&self) -> Time {
        self.l
    }

    #[inline]
    pub fn r(&self) -> Time {
        self.r
    }

    #[inline]
    pub fn size(&self) -> Time {
        self.r - self.l
    }

    #[inline]
    pub fn contains_point(&self, t: Time) -> bool {
        self.l <= t && t < self.r
    }

    pub fn points(&self) -> std::ops::Range<Time> {
        self.l..self.r
    }

    /// The Allen relation that holds from `self` to `other`.
    pub fn relation(&self, other: &Interval) -> AllenRelation {
        allen_relation(*self, *other)
    }
}

impl TryFrom<(Time, Time)> for Interval {
    type Error = IntervalError;
    fn try_from((l, r): (Time, Time)) -> Result<Self, Self::Error> {
        Interval::new(l, r)
    }
}

impl From<Interval> for (Time, Time) {
    fn from(i: Interval) -> Self {
        (i.l, i.r)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.l, self.r)
    }
}

/// The thirteen basic relations of Allen's interval algebra, read as
/// "x REL y".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AllenRelation {
    Equal,
    Before,
    After,
    Meets,
    MetBy,
    Contains,
    During,
    Starts,
    StartedBy,
    Finishes,
    FinishedBy,
    Overlaps,
    OverlappedBy,
}

impl AllenRelation {
    pub const ALL: [AllenRelation; 13] = [
        AllenRelation::Equal,
        AllenRelation::Before,
        AllenRelation::After,
        AllenRelation::Meets,
        AllenRelation::MetBy,
        AllenRelation::Contains,
        AllenRelation::During,
        AllenRelation::Starts,
        AllenRelation::StartedBy,
        AllenRelation::Finishes,
        AllenRelation::FinishedBy,
        AllenRelation::Overlaps,
        AllenRelation::OverlappedBy,
    ];

    /// The relation obtained by swapping the arguments.
    pub fn inverse(self) -> AllenRelation {
        use AllenRelation::*;
        match self {
            Equal => Equal,
            Before => After,
            After => Before,
            Meets => MetBy,
            MetBy => Meets,
            Contains => During,
            During => Contains,
            Starts => StartedBy,
            StartedBy => Starts,
            Finishes => FinishedBy,
            FinishedBy => Finishes,
            Overlaps => OverlappedBy,
            OverlappedBy => Overlaps,
        }
    }

    /// Whether this relation holds between `x` and `y`, evaluated directly
    /// from the bound conditions.
    pub fn holds(self, x: Interval, y: Interval) -> bool {
        use AllenRelation::*;
        let (lx, rx, ly, ry) = (x.l, x.r, y.l, y.r);
        match self {
            Equal => lx == ly && rx == ry,
            Meets => rx == ly,
            Before => rx < ly,
            Contains => lx < ly && ry < rx,
            Starts => lx == ly && rx < ry,
            Finishes => rx == ry && lx > ly,
            Overlaps => lx < ly && ly < rx && rx < ry,
            After | MetBy | During | StartedBy | FinishedBy | OverlappedBy => {
                self.inverse().holds(y, x)
            }
        }
    }
}

impl fmt::Display for AllenRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Computes the unique Allen relation from `x` to `y`.
pub fn allen_relation(x: Interval, y: Interval) -> AllenRelation {
    use std::cmp::Ordering as O;
    use AllenRelation::*;
    if x.r < y.l {
        return Before;
    }
    if y.r < x.l {
        return After;
    }
    if x.r == y.l {
        return Meets;
    }
    if y.r == x.l {
        return MetBy;
    }
    match (x.l.cmp(&y.l), x.r.cmp(&y.r)) {
        (O::Equal, O::Equal) => Equal,
        (O::Equal, O::Less) => Starts,
        (O::Equal, O::Greater) => StartedBy,
        (O::Greater, O::Equal) => Finishes,
        (O::Less, O::Equal) => FinishedBy,
        (O::Less, O::Greater) => Contains,
        (O::Greater, O::Less) => During,
        (O::Less, O::Less) => Overlaps,
        (O::Greater, O::Greater) => OverlappedBy,
    }
}

/// Disjunctive relations used by the planning axioms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Composite {
    /// `x` and `y` share no time point.
    Disjoint,
    /// `y` is a (non-strict) subinterval of `x`.
    Subinterval,
}

pub fn holds_composite(rel: Composite, x: Interval, y: Interval) -> bool {
    match rel {
        Composite::Disjoint => x.r <= y.l || y.r <= x.l,
        Composite::Subinterval => x.l <= y.l && y.r <= x.r,
    }
}

/// A temporally qualified assertion: `atom` has truth value `polarity`
/// throughout `interval`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Tqa {
    pub atom: String,
    pub polarity: bool,
    pub interval: Interval,
}

impl Tqa {
    pub fn new(atom: impl Into<String>, polarity: bool, interval: Interval) -> Self {
        Tqa {
            atom: atom.into(),
            polarity,
            interval,
        }
    }
}

impl fmt::Display for Tqa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.polarity {
            write!(f, "{}@{}", self.atom, self.interval)
        } else {
            write!(f, "(not {})@{}", self.atom, self.interval)
        }
    }
}

/// Splits a TQA at the given cut points into a chain of adjacent TQAs over
/// the same atom and polarity.
pub fn decompose(tqa: &Tqa, cuts: &[Time]) -> Result<Vec<Tqa>, IntervalError> {
    let (l, r) = (tqa.interval.l, tqa.interval.r);
    if cuts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(IntervalError::CutsNotIncreasing);
    }
    if let Some(&cut) = cuts.iter().find(|&&c| c <= l || c >= r) {
        return Err(IntervalError::CutOutsideInterior { cut, l, r });
    }
    let mut bounds = Vec::with_capacity(cuts.len() + 2);
    bounds.push(l);
    bounds.extend_from_slice(cuts);
    bounds.push(r);
    bounds
        .windows(2)
        .map(|w| {
            Ok(Tqa {
                atom: tqa.atom.clone(),
                polarity: tqa.polarity,
                interval: Interval::new(w[0], w[1])?,
            })
        })
        .collect()
}

/// Truth values for a fixed set of atoms over the prefix `[0, horizon)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct History {
    horizon: Time,
    index: HashMap<String, usize>,
    atoms: Vec<String>,
    rows: Vec<Vec<bool>>,
}

impl History {
    /// A history where every declared atom is false everywhere.
    pub fn new<I, S>(atoms: I, horizon: Time) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let atoms: Vec<String> = atoms.into_iter().map(Into::into).collect();
        let index = atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();
        let rows = vec![vec![false; horizon as usize]; atoms.len()];
        History {
            horizon,
            index,
            atoms,
            rows,
        }
    }

    pub fn horizon(&self) -> Time {
        self.horizon
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn row(&self, atom: &str) -> Option<&[bool]> {
        self.index.get(atom).map(|&i| self.rows[i].as_slice())
    }

    pub fn get(&self, t: Time, atom: &str) -> Result<bool, IntervalError> {
        let row = self
            .row(atom)
            .ok_or_else(|| IntervalError::UnknownAtom(atom.to_string()))?;
        row.get(t as usize)
            .copied()
            .ok_or(IntervalError::HistoryTooShort {
                end: t + 1,
                horizon: self.horizon,
            })
    }

    /// Sets `atom` to `value` on every point of `interval`.
    pub fn assign(
        &mut self,
        atom: &str,
        interval: Interval,
        value: bool,
    ) -> Result<(), IntervalError> {
        if interval.r > self.horizon {
            return Err(IntervalError::HistoryTooShort {
                end: interval.r,
                horizon: self.horizon,
            });
        }
        let &i = self
            .index
            .get(atom)
            .ok_or_else(|| IntervalError::UnknownAtom(atom.to_string()))?;
        for t in interval.points() {
            self.rows[i][t as usize] = value;
        }
        Ok(())
    }
}

/// Whether `h` satisfies `tqa`: the atom has the TQA's polarity at every
/// point of its interval.
pub fn check_tqa(h: &History, tqa: &Tqa) -> Result<bool, IntervalError> {
    if tqa.interval.r > h.horizon {
        return Err(IntervalError::HistoryTooShort {
            end: tqa.interval.r,
            horizon: h.horizon,
        });
    }
    let row = h
        .row(&tqa.atom)
        .ok_or_else(|| IntervalError::UnknownAtom(tqa.atom.clone()))?;
    Ok(row[tqa.interval.l as usize..tqa.interval.r as usize]
        .iter()
        .all(|&v| v == tqa.polarity))
}

/// A relation atom between two named intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RelationAtom {
    Basic(AllenRelation),
    Composite(Composite),
}

/// Quantifier-free interval-logic sentence over named interval variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sentence {
    And(Vec<Sentence>),
    Or(Vec<Sentence>),
    Holds {
        atom: String,
        polarity: bool,
        interval: String,
    },
    Relation {
        rel: RelationAtom,
        x: String,
        y: String,
    },
}

impl Sentence {
    pub fn holds(atom: &str, interval: &str) -> Sentence {
        Sentence::Holds {
            atom: atom.into(),
            polarity: true,
            interval: interval.into(),
        }
    }

    pub fn holds_not(atom: &str, interval: &str) -> Sentence {
        Sentence::Holds {
            atom: atom.into(),
            polarity: false,
            interval: interval.into(),
        }
    }

    pub fn rel(rel: AllenRelation, x: &str, y: &str) -> Sentence {
        Sentence::Relation {
            rel: RelationAtom::Basic(rel),
            x: x.into(),
            y: y.into(),
        }
    }

    pub fn composite(rel: Composite, x: &str, y: &str) -> Sentence {
        Sentence::Relation {
            rel: RelationAtom::Composite(rel),
            x: x.into(),
            y: y.into(),
        }
    }
}

/// Evaluates `sentence` under the interval assignment `bindings` and
/// history `h`. Every interval variable is resolved before evaluation, so an
/// unbound name is reported even if a short-circuit would skip it.
pub fn check_sentence(
    h: &History,
    bindings: &BTreeMap<String, Interval>,
    sentence: &Sentence,
) -> Result<bool, IntervalError> {
    check_bound(bindings, sentence)?;
    eval(h, bindings, sentence)
}

fn check_bound(
    bindings: &BTreeMap<String, Interval>,
    sentence: &Sentence,
) -> Result<(), IntervalError> {
    let lookup = |name: &String| {
        bindings
            .get(name)
            .map(|_| ())
            .ok_or_else(|| IntervalError::UnboundInterval(name.clone()))
    };
    match sentence {
        Sentence::And(parts) | Sentence::Or(parts) => {
            parts.iter().try_for_each(|p| check_bound(bindings, p))
        }
        Sentence::Holds { interval, .. } => lookup(interval),
        Sentence::Relation { x, y, .. } => {
            lookup(x)?;
            lookup(y)
        }
    }
}

fn eval(
    h: &History,
    bindings: &BTreeMap<String, Interval>,
    sentence: &Sentence,
) -> Result<bool, IntervalError> {
    match sentence {
        Sentence::And(parts) => {
            for p in parts {
                if !eval(h, bindings, p)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Sentence::Or(parts) => {
            for p in parts {
                if eval(h, bindings, p)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Sentence::Holds {
            atom,
            polarity,
            interval,
        } => check_tqa(
            h,
            &Tqa {
                atom: atom.clone(),
                polarity: *polarity,
                interval: bindings[interval],
            },
        ),
        Sentence::Relation { rel, x, y } => {
            let (x, y) = (bindings[x], bindings[y]);
            Ok(match rel {
                RelationAtom::Basic(r) => allen_relation(x, y) == *r,
                RelationAtom::Composite(c) => holds_composite(*c, x, y),
            })
        }
    }
}
