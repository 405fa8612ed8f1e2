//! Translation of an instantiated theory into a constraint model.
//!
//! Variable layout is fixed by the shape: Booleans are the flow variables,
//! then the use variables, then the stage-coverage literals `c`; integers
//! are the boundaries, then split points, then the per-copy `l, r, S, E`.
//! Auxiliary literals and the makespan variable come last.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::domain::{SkillKind, TemporalRel};
use crate::model::{group, Cmp, Constraint, CspModel, Lit, Objective, Var};
use crate::theory::{ActionKind, TheoryShape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveKind {
    #[default]
    None,
    Makespan,
    Costs,
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ObjectiveKind::None => "none",
            ObjectiveKind::Makespan => "makespan",
            ObjectiveKind::Costs => "costs",
        })
    }
}

impl FromStr for ObjectiveKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(ObjectiveKind::None),
            "makespan" => Ok(ObjectiveKind::Makespan),
            "costs" | "sum-of-costs" => Ok(ObjectiveKind::Costs),
            other => Err(format!("unknown objective '{other}'")),
        }
    }
}

/// Integer variables of one action copy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CopyVars {
    pub left: u32,
    pub right: u32,
    pub start: u32,
    pub end: u32,
}

/// Maps theory indices to model variable ids.
#[derive(Debug, Clone, Copy)]
pub struct Layout<'a> {
    shape: &'a TheoryShape,
}

impl<'a> Layout<'a> {
    pub fn new(shape: &'a TheoryShape) -> Self {
        Layout { shape }
    }

    pub fn shape(&self) -> &'a TheoryShape {
        self.shape
    }

    pub fn flow(&self, f: usize, t: u32, v: bool, w: bool) -> u32 {
        self.shape.flow(f, t, v, w) as u32
    }

    pub fn use_var(&self, a: usize, k: u32) -> u32 {
        (self.shape.num_flow_ids() + self.shape.use_id(a, k)) as u32
    }

    /// Literal `c_{a,k,t}`: the copy is used and spans stage `t`.
    pub fn covers(&self, a: usize, k: u32, t: u32) -> u32 {
        let s = self.shape;
        let base = s.num_flow_ids() + s.num_use_ids();
        (base + s.use_id(a, k) * s.n() as usize + (t as usize - 1)) as u32
    }

    pub fn num_base_bools(&self) -> usize {
        let s = self.shape;
        s.num_flow_ids() + s.num_use_ids() * (1 + s.n() as usize)
    }

    pub fn boundary(&self, t: u32) -> u32 {
        self.shape.boundary(t) as u32
    }

    pub fn split(&self, f: usize, t: u32) -> u32 {
        (self.shape.num_boundary_ids() + self.shape.split(f, t)) as u32
    }

    pub fn copy(&self, a: usize, k: u32) -> CopyVars {
        let off = self.shape.num_boundary_ids() + self.shape.num_split_ids();
        let c = self.shape.copy_ids(a, k);
        CopyVars {
            left: (off + c.left) as u32,
            right: (off + c.right) as u32,
            start: (off + c.start) as u32,
            end: (off + c.end) as u32,
        }
    }

    pub fn num_base_ints(&self) -> usize {
        let s = self.shape;
        s.num_boundary_ids() + s.num_split_ids() + s.num_copy_int_ids()
    }
}

/// Factor turning the rational skill costs into integers.
pub fn cost_scale(shape: &TheoryShape) -> i64 {
    shape
        .domain()
        .skills
        .iter()
        .fold(1i64, |acc, s| acc.lcm(s.cost.0.denom()))
}

/// Integer objective coefficient of one use of skill action `a`.
pub fn scaled_cost(shape: &TheoryShape, a: usize) -> i64 {
    match shape.actions()[a].kind {
        ActionKind::Skill(i) => {
            let c = shape.domain().skills[i].cost.0 * Ratio::from_integer(cost_scale(shape));
            debug_assert!(c.is_integer());
            c.to_integer()
        }
        ActionKind::Temporal(_) => 0,
    }
}

fn b(v: u32) -> Var {
    Var::Bool(v)
}

fn i(v: u32) -> Var {
    Var::Int(v)
}

/// Builds the model one constraint family at a time.
pub struct Encoder<'a> {
    lay: Layout<'a>,
    model: CspModel,
    makespan: Option<u32>,
}

impl<'a> Encoder<'a> {
    /// Declares every base variable; emits no constraints.
    pub fn new(shape: &'a TheoryShape) -> Self {
        let lay = Layout::new(shape);
        let d = shape.domain();
        let n = shape.n();
        let h = shape.horizon() as i64;
        let mut m = CspModel::new();
        for t in 1..=n {
            for f in &d.fluents {
                for vw in ["00", "01", "10", "11"] {
                    m.new_bool(&format!("flow.{}.{t}.{vw}", f.name), group::FLOW);
                }
            }
        }
        for k in 1..=shape.copies() {
            for a in shape.actions() {
                m.new_bool(&format!("use.{}.{k}", a.label()), group::ACTION);
            }
        }
        for k in 1..=shape.copies() {
            for a in shape.actions() {
                for t in 1..=n {
                    m.new_bool(&format!("c.{}.{k}.{t}", a.label()), group::AUX);
                }
            }
        }
        for t in 0..=n {
            m.new_int(&format!("b.{t}"), 0, h, group::TIME);
        }
        for t in 1..=n {
            for f in &d.fluents {
                m.new_int(&format!("s.{}.{t}", f.name), 0, h, group::TIME);
            }
        }
        let np1 = n as i64 + 1;
        for k in 1..=shape.copies() {
            for a in shape.actions() {
                let lab = a.label();
                m.new_int(&format!("l.{lab}.{k}"), 1, np1, group::ACTION);
                m.new_int(&format!("r.{lab}.{k}"), 0, np1, group::ACTION);
                m.new_int(&format!("S.{lab}.{k}"), 0, h, group::TIME);
                m.new_int(&format!("E.{lab}.{k}"), 0, h, group::TIME);
            }
        }
        debug_assert_eq!(m.bools.len(), lay.num_base_bools());
        debug_assert_eq!(m.ints.len(), lay.num_base_ints());
        Encoder {
            lay,
            model: m,
            makespan: None,
        }
    }

    pub fn layout(&self) -> Layout<'a> {
        self.lay
    }

    pub fn model(&self) -> &CspModel {
        &self.model
    }

    fn shape(&self) -> &'a TheoryShape {
        self.lay.shape
    }

    fn fl(&self, f: usize, t: u32, v: bool, w: bool) -> Lit {
        Lit::Pos(self.lay.flow(f, t, v, w))
    }

    fn copies(&self) -> Vec<(usize, u32)> {
        let s = self.shape();
        (1..=s.copies())
            .flat_map(|k| (0..s.actions().len()).map(move |a| (a, k)))
            .collect()
    }

    /// Initial, goal and conservation rows, exactly-one per stage, and the
    /// placement of split points.
    pub fn emit_flow(&mut self) {
        let s = self.shape();
        let d = s.domain();
        let n = s.n();
        for (f, fl) in d.fluents.iter().enumerate() {
            let flow = |t, v, w| b(self.lay.flow(f, t, v, w));
            let init = d.init.contains(&fl.name);
            self.model.linear(
                vec![(1, flow(1, init, false)), (1, flow(1, init, true))],
                Cmp::Eq,
                1,
            );
            if d.goal.contains(&fl.name) {
                self.model.linear(
                    vec![(1, flow(n, false, true)), (1, flow(n, true, true))],
                    Cmp::Eq,
                    1,
                );
            }
            for t in 1..n {
                for w in [false, true] {
                    self.model.linear(
                        vec![
                            (1, flow(t, false, w)),
                            (1, flow(t, true, w)),
                            (-1, flow(t + 1, w, false)),
                            (-1, flow(t + 1, w, true)),
                        ],
                        Cmp::Eq,
                        0,
                    );
                }
            }
            for t in 1..=n {
                self.model.add(Constraint::ExactlyOne(
                    [(false, false), (false, true), (true, false), (true, true)]
                        .iter()
                        .map(|&(v, w)| self.fl(f, t, v, w))
                        .collect(),
                ));
                let sp = i(self.lay.split(f, t));
                let lo = i(self.lay.boundary(t - 1));
                let hi = i(self.lay.boundary(t));
                for v in [false, true] {
                    let change = self.fl(f, t, v, !v);
                    self.model
                        .implies_linear(vec![change], vec![(1, sp), (-1, lo)], Cmp::Ge, 1);
                    self.model
                        .implies_linear(vec![change], vec![(1, sp), (-1, hi)], Cmp::Le, -1);
                    let flat = self.fl(f, t, v, v);
                    self.model
                        .implies_linear(vec![flat], vec![(1, sp), (-1, lo)], Cmp::Eq, 0);
                }
            }
        }
    }

    /// Copy structure, symmetry breaking, timestamp channelling, durations
    /// and the boundary chain.
    pub fn emit_action_structure(&mut self) {
        let s = self.shape();
        let d = s.domain();
        let n = s.n() as i64;
        for (a, k) in self.copies() {
            let u = self.lay.use_var(a, k);
            let cv = self.lay.copy(a, k);
            let (l, r, st, en) = (i(cv.left), i(cv.right), i(cv.start), i(cv.end));
            self.model
                .implies_linear(vec![Lit::Pos(u)], vec![(1, l), (-1, r)], Cmp::Le, -1);
            for (x, v) in [(l, n + 1), (r, 0), (st, 0), (en, 0)] {
                self.model
                    .implies_linear(vec![Lit::Neg(u)], vec![(1, x)], Cmp::Eq, v);
            }
            if k > 1 {
                let prev = self.lay.use_var(a, k - 1);
                self.model.clause(vec![Lit::Neg(u), Lit::Pos(prev)]);
                let pr = i(self.lay.copy(a, k - 1).right);
                self.model
                    .implies_linear(vec![Lit::Pos(u)], vec![(1, pr), (-1, l)], Cmp::Le, 0);
            }
            for t in 1..=s.n() {
                let bt = i(self.lay.boundary(t - 1));
                self.model.implies_linear(
                    vec![Lit::Eq(cv.left, t as i64)],
                    vec![(1, st), (-1, bt)],
                    Cmp::Eq,
                    0,
                );
            }
            for t in 2..=s.n() + 1 {
                let bt = i(self.lay.boundary(t - 1));
                self.model.implies_linear(
                    vec![Lit::Eq(cv.right, t as i64)],
                    vec![(1, en), (-1, bt)],
                    Cmp::Eq,
                    0,
                );
            }
            if let ActionKind::Skill(si) = s.actions()[a].kind {
                let sk = &d.skills[si];
                let span = vec![(1, en), (-1, st)];
                match sk.kind {
                    SkillKind::Delay => {
                        let delta = sk.duration.unwrap_or(1) as i64;
                        self.model
                            .implies_linear(vec![Lit::Pos(u)], span.clone(), Cmp::Eq, delta)
                    }
                    SkillKind::Timer => {
                        self.model
                            .implies_linear(vec![Lit::Pos(u)], span.clone(), Cmp::Ge, 1)
                    }
                }
                if sk.equal_resources().next().is_some() {
                    self.model
                        .implies_linear(vec![Lit::Pos(u)], span, Cmp::Ge, 2);
                    self.model
                        .implies_linear(vec![Lit::Pos(u)], vec![(1, r), (-1, l)], Cmp::Ge, 2);
                }
            }
        }
        self.model
            .linear(vec![(1, i(self.lay.boundary(0)))], Cmp::Eq, 0);
        for t in 1..=s.n() {
            self.model.linear(
                vec![
                    (1, i(self.lay.boundary(t))),
                    (-1, i(self.lay.boundary(t - 1))),
                ],
                Cmp::Ge,
                1,
            );
        }
        self.model.linear(
            vec![(1, i(self.lay.boundary(s.n())))],
            Cmp::Le,
            s.horizon() as i64,
        );
    }

    /// Stage coverage literals and the Contains / OverlappedBy / Overlaps
    /// families.
    pub fn emit_tc_constraints(&mut self) {
        let s = self.shape();
        let d = s.domain();
        let n = s.n();
        for (a, k) in self.copies() {
            let u = self.lay.use_var(a, k);
            let cv = self.lay.copy(a, k);
            for t in 1..=n {
                self.model.add(Constraint::IffConj {
                    lit: Lit::Pos(self.lay.covers(a, k, t)),
                    conj: vec![
                        Lit::Pos(u),
                        Lit::Le(cv.left, t as i64),
                        Lit::Ge(cv.right, t as i64 + 1),
                    ],
                });
            }
            let ActionKind::Skill(si) = s.actions()[a].kind else {
                continue;
            };
            for spec in &d.skills[si].constraints {
                let f = s.fluent_id(&spec.fluent).expect("validated fluent");
                let init = d.init.contains(&spec.fluent);
                let goal = d.goal.contains(&spec.fluent);
                match spec.rel {
                    TemporalRel::Contains => {
                        self.true_before_start(a, k, f, init);
                        for t in 2..=n {
                            self.model.clause(vec![
                                Lit::Ne(cv.right, t as i64),
                                self.fl(f, t, true, false),
                                self.fl(f, t, true, true),
                            ]);
                        }
                        if !goal {
                            self.model.clause(vec![Lit::Le(cv.right, n as i64)]);
                        }
                        for t in 1..=n {
                            self.model.clause(vec![
                                Lit::Neg(self.lay.covers(a, k, t)),
                                self.fl(f, t, true, true),
                            ]);
                        }
                    }
                    TemporalRel::OverlappedBy => {
                        self.one_change_inside(a, k, f, false);
                        self.ends_with(a, k, f, true);
                        if !goal {
                            self.model.clause(vec![Lit::Le(cv.right, n as i64)]);
                        }
                    }
                    TemporalRel::Overlaps => {
                        self.true_before_start(a, k, f, init);
                        self.one_change_inside(a, k, f, true);
                        self.ends_with(a, k, f, false);
                    }
                    TemporalRel::Equals => {}
                }
            }
        }
    }

    /// The fluent holds at the tick before the copy starts.
    fn true_before_start(&mut self, a: usize, k: u32, f: usize, init: bool) {
        let cv = self.lay.copy(a, k);
        for t in 2..=self.shape().n() {
            self.model.clause(vec![
                Lit::Ne(cv.left, t as i64),
                self.fl(f, t - 1, false, true),
                self.fl(f, t - 1, true, true),
            ]);
        }
        if !init {
            self.model.clause(vec![Lit::Ge(cv.left, 2)]);
        }
    }

    /// Exactly one rise (or fall) of the fluent within the spanned stages.
    fn one_change_inside(&mut self, a: usize, k: u32, f: usize, fall: bool) {
        let u = self.lay.use_var(a, k);
        let mut terms = vec![(-1, b(u))];
        let tag = if fall { "fall" } else { "rise" };
        let fname = self.shape().domain().fluents[f].name.clone();
        let label = self.shape().actions()[a].label();
        for t in 1..=self.shape().n() {
            let g = self
                .model
                .new_bool(&format!("g.{tag}.{fname}.{label}.{k}.{t}"), group::AUX);
            self.model.add(Constraint::IffConj {
                lit: Lit::Pos(g),
                conj: vec![
                    self.fl(f, t, fall, !fall),
                    Lit::Pos(self.lay.covers(a, k, t)),
                ],
            });
            terms.push((1, b(g)));
        }
        self.model.linear(terms, Cmp::Eq, 0);
    }

    /// The fluent has value `value` at the last tick of the copy.
    fn ends_with(&mut self, a: usize, k: u32, f: usize, value: bool) {
        let cv = self.lay.copy(a, k);
        for t in 2..=self.shape().n() + 1 {
            self.model.clause(vec![
                Lit::Ne(cv.right, t as i64),
                self.fl(f, t - 1, false, value),
                self.fl(f, t - 1, true, value),
            ]);
        }
    }

    /// Temporal-action chaining and resource equality.
    pub fn emit_operational(&mut self) {
        let s = self.shape();
        let d = s.domain();
        let n = s.n();
        for (a, k) in self.copies() {
            let act = &s.actions()[a];
            let u = self.lay.use_var(a, k);
            let cv = self.lay.copy(a, k);
            match act.kind {
                ActionKind::Temporal(ti) => {
                    let comps: Vec<usize> = d.temporal_actions[ti]
                        .skills
                        .iter()
                        .map(|sk| s.action_id(sk, act.actor).expect("component grounded"))
                        .collect();
                    for &c in &comps {
                        self.model.linear(
                            vec![(1, b(u)), (-1, b(self.lay.use_var(c, k)))],
                            Cmp::Eq,
                            0,
                        );
                    }
                    let first = self.lay.copy(comps[0], k);
                    let last = self.lay.copy(*comps.last().unwrap(), k);
                    let mut eqs = vec![(first.left, cv.left), (last.right, cv.right)];
                    for w in comps.windows(2) {
                        eqs.push((self.lay.copy(w[0], k).right, self.lay.copy(w[1], k).left));
                    }
                    for (x, y) in eqs {
                        self.model.implies_linear(
                            vec![Lit::Pos(u)],
                            vec![(1, i(x)), (-1, i(y))],
                            Cmp::Eq,
                            0,
                        );
                    }
                }
                ActionKind::Skill(si) => {
                    let sk = &d.skills[si];
                    if let Some(owner) = d.owner_of(&sk.name) {
                        if s.action_id(&owner.name, act.actor).is_none() {
                            self.model.clause(vec![Lit::Neg(u)]);
                        }
                    }
                    for res in sk.equal_resources() {
                        let f = s.fluent_id(res).expect("validated fluent");
                        for t in 1..=n {
                            let bt = i(self.lay.boundary(t - 1));
                            let sp = i(self.lay.split(f, t));
                            let at = Lit::Eq(cv.left, t as i64);
                            self.model
                                .clause(vec![at.negate(), self.fl(f, t, false, true)]);
                            self.model.implies_linear(
                                vec![at],
                                vec![(1, sp), (-1, bt)],
                                Cmp::Eq,
                                1,
                            );
                        }
                        for t in 2..=n + 1 {
                            let bt = i(self.lay.boundary(t - 1));
                            let sp = i(self.lay.split(f, t - 1));
                            let at = Lit::Eq(cv.right, t as i64);
                            self.model
                                .clause(vec![at.negate(), self.fl(f, t - 1, true, false)]);
                            self.model.implies_linear(
                                vec![at],
                                vec![(1, sp), (-1, bt)],
                                Cmp::Eq,
                                -1,
                            );
                        }
                        for t in 2..n {
                            self.model.clause(vec![
                                Lit::Neg(self.lay.covers(a, k, t)),
                                Lit::Ge(cv.left, t as i64),
                                Lit::Le(cv.right, t as i64 + 1),
                                self.fl(f, t, true, true),
                            ]);
                        }
                    }
                }
            }
        }
    }

    /// Frame axioms, interference ordering and the Boolean interference
    /// cuts.
    pub fn emit_frame_and_interference(&mut self) {
        let s = self.shape();
        let d = s.domain();
        let n = s.n();
        let mut raisers: Vec<Vec<usize>> = vec![Vec::new(); d.fluents.len()];
        let mut lowerers: Vec<Vec<usize>> = vec![Vec::new(); d.fluents.len()];
        for (a, act) in s.actions().iter().enumerate() {
            if let ActionKind::Skill(si) = act.kind {
                let sk = &d.skills[si];
                for f in d.effective_raises(sk) {
                    raisers[s.fluent_id(&f).unwrap()].push(a);
                }
                for f in d.effective_lowers(sk) {
                    lowerers[s.fluent_id(&f).unwrap()].push(a);
                }
            }
        }
        for f in 0..d.fluents.len() {
            for t in 1..=n {
                for (fall, justifiers) in [(false, &raisers[f]), (true, &lowerers[f])] {
                    let mut clause = vec![Lit::Neg(self.lay.flow(f, t, fall, !fall))];
                    for k in 1..=s.copies() {
                        for &a in justifiers {
                            clause.push(Lit::Pos(self.lay.covers(a, k, t)));
                        }
                    }
                    self.model.clause(clause);
                }
            }
        }
        for (p, q) in d.interference_pairs() {
            for t in 1..=n {
                let (sp, sq) = (i(self.lay.split(p, t)), i(self.lay.split(q, t)));
                self.model.implies_linear(
                    vec![self.fl(p, t, false, true), self.fl(q, t, true, false)],
                    vec![(1, sq), (-1, sp)],
                    Cmp::Le,
                    0,
                );
                self.model.implies_linear(
                    vec![self.fl(q, t, false, true), self.fl(p, t, true, false)],
                    vec![(1, sp), (-1, sq)],
                    Cmp::Le,
                    0,
                );
                for v in [false, true] {
                    for w in [false, true] {
                        let fl = |f, x, y| b(self.lay.flow(f, t, x, y));
                        self.model.linear(
                            vec![(1, fl(p, v, true)), (1, fl(q, w, true))],
                            Cmp::Le,
                            1,
                        );
                        self.model.linear(
                            vec![(1, fl(p, true, v)), (1, fl(q, true, w))],
                            Cmp::Le,
                            1,
                        );
                    }
                }
            }
        }
    }

    pub fn emit_objective(&mut self, kind: ObjectiveKind) {
        let s = self.shape();
        match kind {
            ObjectiveKind::None => self.model.objective = None,
            ObjectiveKind::Costs => {
                let mut terms = Vec::new();
                for (a, k) in self.copies() {
                    let c = scaled_cost(s, a);
                    if c != 0 {
                        terms.push((c, b(self.lay.use_var(a, k))));
                    }
                }
                self.model.objective = Some(Objective { terms });
            }
            ObjectiveKind::Makespan => {
                let delta = self
                    .model
                    .new_int("makespan", 0, s.horizon() as i64, group::TIME);
                for (a, k) in self.copies() {
                    let u = self.lay.use_var(a, k);
                    let en = self.lay.copy(a, k).end;
                    self.model.implies_linear(
                        vec![Lit::Pos(u)],
                        vec![(1, i(delta)), (-1, i(en))],
                        Cmp::Ge,
                        0,
                    );
                }
                self.makespan = Some(delta);
                self.model.objective = Some(Objective {
                    terms: vec![(1, i(delta))],
                });
            }
        }
    }

    pub fn finish(self) -> CspModel {
        self.model
    }
}

/// Encodes the theory: every constraint family in a fixed order, then the
/// objective.
pub fn encode(shape: &TheoryShape, kind: ObjectiveKind) -> CspModel {
    let mut e = Encoder::new(shape);
    e.emit_flow();
    e.emit_action_structure();
    e.emit_tc_constraints();
    e.emit_operational();
    e.emit_frame_and_interference();
    e.emit_objective(kind);
    e.finish()
}
