//! Backtracking finite-domain solver with bounds propagation and
//! branch-and-bound, plus an exhaustive enumeration oracle.

use std::collections::VecDeque;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{Assignment, Cmp, Constraint, CspModel, Lit, ModelError, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Branching {
    /// Booleans then integers, each by id.
    DeclarationOrder,
    /// Action placement first, then fluent flows, auxiliaries and timestamps.
    #[default]
    ActionsFirst,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    pub time_budget: Option<Duration>,
    pub node_budget: Option<u64>,
    pub branching: Branching,
    /// 0 keeps the fixed value order (false first, lower half first);
    /// any other value randomizes Boolean value order reproducibly.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            time_budget: Some(Duration::from_secs(300)),
            node_budget: None,
            branching: Branching::ActionsFirst,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    Sat {
        assignment: Assignment,
        objective: Option<i64>,
    },
    Unsat,
    ResourceLimit {
        reason: String,
        incumbent: Option<(Assignment, i64)>,
    },
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveResult::Sat { .. })
    }

    pub fn objective(&self) -> Option<i64> {
        match self {
            SolveResult::Sat { objective, .. } => *objective,
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolveStats {
    pub nodes: u64,
    pub solutions: u64,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOutcome {
    pub result: SolveResult,
    pub stats: SolveStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Eq,
    Ne,
    Le,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct ULit {
    var: u32,
    op: Op,
    val: i64,
}

impl ULit {
    fn negate(self) -> ULit {
        let (op, val) = match self.op {
            Op::Eq => (Op::Ne, self.val),
            Op::Ne => (Op::Eq, self.val),
            Op::Le => (Op::Ge, self.val + 1),
            Op::Ge => (Op::Le, self.val - 1),
        };
        ULit { op, val, ..self }
    }
}

const NO_LO: i64 = i64::MIN;
const NO_HI: i64 = i64::MAX;

#[derive(Debug, Clone)]
struct LinProp {
    terms: Vec<(i64, u32)>,
    lo: i64,
    hi: i64,
}

#[derive(Debug, Clone)]
enum Prop {
    Clause(Vec<ULit>),
    Lin(LinProp),
    Iff { lit: ULit, conj: Vec<ULit> },
    One(Vec<ULit>),
    Imp { premise: Vec<ULit>, then: Box<Prop> },
}

struct Conflict;

type PResult = Result<(), Conflict>;

fn floor_div(p: i64, q: i64) -> i64 {
    if q > 0 {
        p.div_euclid(q)
    } else {
        (-p).div_euclid(-q)
    }
}

fn ceil_div(p: i64, q: i64) -> i64 {
    -floor_div(-p, q)
}

struct Compiler {
    n_bools: u32,
}

impl Compiler {
    fn idx(&self, v: Var) -> u32 {
        match v {
            Var::Bool(b) => b,
            Var::Int(i) => self.n_bools + i,
        }
    }

    fn lit(&self, l: Lit) -> ULit {
        let (var, op, val) = match l {
            Lit::Pos(b) => (b, Op::Ge, 1),
            Lit::Neg(b) => (b, Op::Le, 0),
            Lit::Eq(x, v) => (self.n_bools + x, Op::Eq, v),
            Lit::Ne(x, v) => (self.n_bools + x, Op::Ne, v),
            Lit::Le(x, v) => (self.n_bools + x, Op::Le, v),
            Lit::Ge(x, v) => (self.n_bools + x, Op::Ge, v),
        };
        ULit { var, op, val }
    }

    fn terms(&self, terms: &[(i64, Var)]) -> Vec<(i64, u32)> {
        let mut out: Vec<(i64, u32)> = Vec::with_capacity(terms.len());
        for &(c, v) in terms {
            let x = self.idx(v);
            match out.iter_mut().find(|t| t.1 == x) {
                Some(t) => t.0 += c,
                None => out.push((c, x)),
            }
        }
        out.retain(|t| t.0 != 0);
        out
    }

    fn prop(&self, c: &Constraint) -> Prop {
        let lits = |ls: &[Lit]| ls.iter().map(|&l| self.lit(l)).collect::<Vec<_>>();
        match c {
            Constraint::Clause(ls) => Prop::Clause(lits(ls)),
            Constraint::ExactlyOne(ls) => Prop::One(lits(ls)),
            Constraint::Linear(lin) => {
                let (lo, hi) = match lin.cmp {
                    Cmp::Le => (NO_LO, lin.rhs),
                    Cmp::Ge => (lin.rhs, NO_HI),
                    Cmp::Eq => (lin.rhs, lin.rhs),
                };
                Prop::Lin(LinProp {
                    terms: self.terms(&lin.terms),
                    lo,
                    hi,
                })
            }
            Constraint::IffConj { lit, conj } => Prop::Iff {
                lit: self.lit(*lit),
                conj: lits(conj),
            },
            Constraint::Implies { premise, then } => Prop::Imp {
                premise: lits(premise),
                then: Box::new(self.prop(then)),
            },
        }
    }
}

fn prop_vars(p: &Prop, out: &mut Vec<u32>) {
    match p {
        Prop::Clause(ls) | Prop::One(ls) => out.extend(ls.iter().map(|l| l.var)),
        Prop::Lin(l) => out.extend(l.terms.iter().map(|t| t.1)),
        Prop::Iff { lit, conj } => {
            out.push(lit.var);
            out.extend(conj.iter().map(|l| l.var));
        }
        Prop::Imp { premise, then } => {
            out.extend(premise.iter().map(|l| l.var));
            prop_vars(then, out);
        }
    }
}

struct Engine {
    lo: Vec<i64>,
    hi: Vec<i64>,
    trail: Vec<(u32, i64, i64)>,
    props: Vec<Prop>,
    watches: Vec<Vec<u32>>,
    queue: VecDeque<u32>,
    queued: Vec<bool>,
}

impl Engine {
    fn new(lo: Vec<i64>, hi: Vec<i64>, props: Vec<Prop>) -> Self {
        let mut watches = vec![Vec::new(); lo.len()];
        let mut vars = Vec::new();
        for (i, p) in props.iter().enumerate() {
            vars.clear();
            prop_vars(p, &mut vars);
            vars.sort_unstable();
            vars.dedup();
            for &v in &vars {
                watches[v as usize].push(i as u32);
            }
        }
        let n = props.len();
        Engine {
            lo,
            hi,
            trail: Vec::new(),
            props,
            watches,
            queue: VecDeque::new(),
            queued: vec![false; n],
        }
    }

    fn enqueue(&mut self, p: u32) {
        if !self.queued[p as usize] {
            self.queued[p as usize] = true;
            self.queue.push_back(p);
        }
    }

    fn clear_queue(&mut self) {
        while let Some(p) = self.queue.pop_front() {
            self.queued[p as usize] = false;
        }
    }

    fn undo_to(&mut self, len: usize) {
        while self.trail.len() > len {
            let (v, lo, hi) = self.trail.pop().unwrap();
            self.lo[v as usize] = lo;
            self.hi[v as usize] = hi;
        }
    }

    fn set_bounds(&mut self, v: u32, lo: i64, hi: i64) -> PResult {
        let i = v as usize;
        let (olo, ohi) = (self.lo[i], self.hi[i]);
        let nlo = lo.max(olo);
        let nhi = hi.min(ohi);
        if nlo > nhi {
            return Err(Conflict);
        }
        if nlo != olo || nhi != ohi {
            self.trail.push((v, olo, ohi));
            self.lo[i] = nlo;
            self.hi[i] = nhi;
            for k in 0..self.watches[i].len() {
                let p = self.watches[i][k];
                self.enqueue(p);
            }
        }
        Ok(())
    }

    fn status(&self, l: ULit) -> Option<bool> {
        let (lo, hi) = (self.lo[l.var as usize], self.hi[l.var as usize]);
        match l.op {
            Op::Eq => {
                if lo == hi && lo == l.val {
                    Some(true)
                } else if l.val < lo || l.val > hi {
                    Some(false)
                } else {
                    None
                }
            }
            Op::Ne => self.status(ULit { op: Op::Eq, ..l }).map(|b| !b),
            Op::Le => {
                if hi <= l.val {
                    Some(true)
                } else if lo > l.val {
                    Some(false)
                } else {
                    None
                }
            }
            Op::Ge => {
                if lo >= l.val {
                    Some(true)
                } else if hi < l.val {
                    Some(false)
                } else {
                    None
                }
            }
        }
    }

    fn make_true(&mut self, l: ULit) -> PResult {
        let (lo, hi) = (self.lo[l.var as usize], self.hi[l.var as usize]);
        match l.op {
            Op::Eq => self.set_bounds(l.var, l.val, l.val),
            Op::Le => self.set_bounds(l.var, NO_LO, l.val),
            Op::Ge => self.set_bounds(l.var, l.val, NO_HI),
            Op::Ne => {
                if lo == hi && lo == l.val {
                    Err(Conflict)
                } else if lo == l.val {
                    self.set_bounds(l.var, lo + 1, hi)
                } else if hi == l.val {
                    self.set_bounds(l.var, lo, hi - 1)
                } else {
                    Ok(())
                }
            }
        }
    }

    fn lin_range(&self, lin: &LinProp) -> (i64, i64) {
        let mut smin = 0i64;
        let mut smax = 0i64;
        for &(a, x) in &lin.terms {
            let (lo, hi) = (self.lo[x as usize], self.hi[x as usize]);
            if a > 0 {
                smin += a * lo;
                smax += a * hi;
            } else {
                smin += a * hi;
                smax += a * lo;
            }
        }
        (smin, smax)
    }

    fn violated(&self, p: &Prop) -> bool {
        match p {
            Prop::Clause(ls) => ls.iter().all(|&l| self.status(l) == Some(false)),
            Prop::Lin(lin) => {
                let (smin, smax) = self.lin_range(lin);
                smin > lin.hi || smax < lin.lo
            }
            _ => false,
        }
    }

    fn run_clause(&mut self, ls: &[ULit]) -> PResult {
        let mut open = None;
        let mut count = 0;
        for &l in ls {
            match self.status(l) {
                Some(true) => return Ok(()),
                Some(false) => {}
                None => {
                    count += 1;
                    open = Some(l);
                }
            }
        }
        match (count, open) {
            (0, _) => Err(Conflict),
            (1, Some(l)) => self.make_true(l),
            _ => Ok(()),
        }
    }

    fn run_one(&mut self, ls: &[ULit]) -> PResult {
        let trues = ls.iter().filter(|&&l| self.status(l) == Some(true)).count();
        if trues > 1 {
            return Err(Conflict);
        }
        if trues == 1 {
            for &l in ls {
                if self.status(l).is_none() {
                    self.make_true(l.negate())?;
                }
            }
            return Ok(());
        }
        self.run_clause(ls)
    }

    fn run_lin(&mut self, lin: &LinProp) -> PResult {
        let (smin, smax) = self.lin_range(lin);
        if smin > lin.hi || smax < lin.lo {
            return Err(Conflict);
        }
        for &(a, x) in &lin.terms {
            let (lo, hi) = (self.lo[x as usize], self.hi[x as usize]);
            let (tmin, tmax) = if a > 0 {
                (a * lo, a * hi)
            } else {
                (a * hi, a * lo)
            };
            if lin.hi != NO_HI {
                let slack = lin.hi - (smin - tmin);
                if a > 0 {
                    self.set_bounds(x, NO_LO, floor_div(slack, a))?;
                } else {
                    self.set_bounds(x, ceil_div(slack, a), NO_HI)?;
                }
            }
            if lin.lo != NO_LO {
                let need = lin.lo - (smax - tmax);
                if a > 0 {
                    self.set_bounds(x, ceil_div(need, a), NO_HI)?;
                } else {
                    self.set_bounds(x, NO_LO, floor_div(need, a))?;
                }
            }
        }
        Ok(())
    }

    fn run_iff(&mut self, lit: ULit, conj: &[ULit]) -> PResult {
        let mut all_true = true;
        let mut open = None;
        let mut n_open = 0;
        for &l in conj {
            match self.status(l) {
                Some(false) => return self.make_true(lit.negate()),
                Some(true) => {}
                None => {
                    all_true = false;
                    n_open += 1;
                    open = Some(l);
                }
            }
        }
        if all_true {
            return self.make_true(lit);
        }
        match self.status(lit) {
            Some(true) => {
                for &l in conj {
                    self.make_true(l)?;
                }
                Ok(())
            }
            Some(false) if n_open == 1 => self.make_true(open.unwrap().negate()),
            _ => Ok(()),
        }
    }

    fn run(&mut self, p: &Prop) -> PResult {
        match p {
            Prop::Clause(ls) => self.run_clause(ls),
            Prop::One(ls) => self.run_one(ls),
            Prop::Lin(lin) => self.run_lin(lin),
            Prop::Iff { lit, conj } => self.run_iff(*lit, conj),
            Prop::Imp { premise, then } => {
                let mut open = None;
                let mut n_open = 0;
                for &l in premise {
                    match self.status(l) {
                        Some(false) => return Ok(()),
                        Some(true) => {}
                        None => {
                            n_open += 1;
                            open = Some(l);
                        }
                    }
                }
                if n_open == 0 {
                    self.run(then)
                } else if n_open == 1 && self.violated(then) {
                    self.make_true(open.unwrap().negate())
                } else {
                    Ok(())
                }
            }
        }
    }

    fn propagate(&mut self) -> PResult {
        while let Some(p) = self.queue.pop_front() {
            self.queued[p as usize] = false;
            // Props are immutable apart from the objective bound, which is
            // only changed between propagation rounds.
            let prop = std::mem::replace(&mut self.props[p as usize], Prop::Clause(Vec::new()));
            let r = self.run(&prop);
            self.props[p as usize] = prop;
            if r.is_err() {
                self.clear_queue();
                return r;
            }
        }
        Ok(())
    }
}

struct Frame {
    trail_len: usize,
    lit: ULit,
    right: bool,
    scan: usize,
}

fn assignment_of(m: &CspModel, lo: &[i64]) -> Assignment {
    let nb = m.bools.len();
    Assignment {
        bools: lo[..nb].iter().map(|&v| v != 0).collect(),
        ints: lo[nb..].to_vec(),
    }
}

/// Solves `m`. With an objective the returned assignment is optimal unless
/// the result is a resource limit.
pub fn solve(m: &CspModel, cfg: &SolverConfig) -> Result<SolveOutcome, ModelError> {
    m.validate()?;
    let started = Instant::now();
    let nb = m.bools.len() as u32;
    let comp = Compiler { n_bools: nb };
    let mut lo: Vec<i64> = vec![0; nb as usize];
    let mut hi: Vec<i64> = vec![1; nb as usize];
    lo.extend(m.ints.iter().map(|d| d.lo));
    hi.extend(m.ints.iter().map(|d| d.hi));
    let mut props: Vec<Prop> = m.constraints.iter().map(|c| comp.prop(c)).collect();
    let obj_prop = m.objective.as_ref().map(|o| {
        props.push(Prop::Lin(LinProp {
            terms: comp.terms(&o.terms),
            lo: NO_LO,
            hi: NO_HI,
        }));
        props.len() as u32 - 1
    });
    let mut eng = Engine::new(lo, hi, props);

    let mut order: Vec<u32> = (0..eng.lo.len() as u32).collect();
    if cfg.branching == Branching::ActionsFirst {
        let group = |v: u32| {
            if v < nb {
                m.bools[v as usize].group
            } else {
                m.ints[(v - nb) as usize].group
            }
        };
        order.sort_by_key(|&v| (group(v), v));
    }
    let mut rng = (cfg.seed != 0).then(|| ChaCha8Rng::seed_from_u64(cfg.seed));

    let mut stats = SolveStats::default();
    let mut incumbent: Option<(Assignment, i64)> = None;
    let finish = |result, mut stats: SolveStats| {
        stats.elapsed = started.elapsed();
        Ok(SolveOutcome { result, stats })
    };

    for p in 0..eng.props.len() as u32 {
        eng.enqueue(p);
    }
    if eng.propagate().is_err() {
        return finish(SolveResult::Unsat, stats);
    }

    let mut stack: Vec<Frame> = Vec::new();
    let mut scan = 0usize;
    loop {
        stats.nodes += 1;
        let limit = if cfg.node_budget.is_some_and(|b| stats.nodes > b) {
            Some("node budget exhausted")
        } else if stats.nodes % 256 == 0 && cfg.time_budget.is_some_and(|t| started.elapsed() >= t)
        {
            Some("time budget exhausted")
        } else {
            None
        };
        if let Some(reason) = limit {
            return finish(
                SolveResult::ResourceLimit {
                    reason: reason.into(),
                    incumbent,
                },
                stats,
            );
        }

        while scan < order.len() && {
            let v = order[scan] as usize;
            eng.lo[v] == eng.hi[v]
        } {
            scan += 1;
        }

        let mut need_backtrack = false;
        if scan == order.len() {
            let a = assignment_of(m, &eng.lo);
            if let Some(v) = m.first_violation(&a) {
                panic!("solver produced an assignment violating the model: {v}");
            }
            stats.solutions += 1;
            match (&m.objective, obj_prop) {
                (Some(obj), Some(op)) => {
                    let value = obj.value(&a);
                    incumbent = Some((a, value));
                    if let Prop::Lin(l) = &mut eng.props[op as usize] {
                        l.hi = value - 1;
                    }
                    need_backtrack = true;
                }
                _ => {
                    return finish(
                        SolveResult::Sat {
                            assignment: a,
                            objective: None,
                        },
                        stats,
                    )
                }
            }
        } else {
            let v = order[scan];
            let (vlo, vhi) = (eng.lo[v as usize], eng.hi[v as usize]);
            let lit = if v < nb {
                let high_first = rng.as_mut().is_some_and(|r| r.random::<bool>());
                if high_first {
                    ULit {
                        var: v,
                        op: Op::Ge,
                        val: 1,
                    }
                } else {
                    ULit {
                        var: v,
                        op: Op::Le,
                        val: 0,
                    }
                }
            } else {
                ULit {
                    var: v,
                    op: Op::Le,
                    val: vlo + (vhi - vlo) / 2,
                }
            };
            stack.push(Frame {
                trail_len: eng.trail.len(),
                lit,
                right: false,
                scan,
            });
            if eng.make_true(lit).is_err() || eng.propagate().is_err() {
                need_backtrack = true;
            }
        }

        if need_backtrack {
            let mut resumed = false;
            while let Some(f) = stack.last_mut() {
                let (len, lit, right, fscan) = (f.trail_len, f.lit, f.right, f.scan);
                eng.undo_to(len);
                eng.clear_queue();
                if right {
                    stack.pop();
                    continue;
                }
                f.right = true;
                if let Some(op) = obj_prop {
                    eng.enqueue(op);
                }
                if eng.make_true(lit.negate()).is_ok() && eng.propagate().is_ok() {
                    scan = fscan;
                    resumed = true;
                    break;
                }
            }
            if !resumed {
                let result = match incumbent.take() {
                    Some((assignment, value)) => SolveResult::Sat {
                        assignment,
                        objective: Some(value),
                    },
                    None => SolveResult::Unsat,
                };
                return finish(result, stats);
            }
        }
    }
}

/// Default node limit of the enumeration oracle.
pub const BRUTE_FORCE_NODE_LIMIT: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BruteForceError {
    #[error("enumeration guard exceeded after {0} nodes")]
    GuardExceeded(u64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Exhaustive enumeration without propagation. Each constraint is checked
/// as soon as all of its variables are assigned. Rejects the model once
/// more than [`BRUTE_FORCE_NODE_LIMIT`] partial assignments are visited.
pub fn brute_force_solve(m: &CspModel) -> Result<SolveResult, BruteForceError> {
    brute_force_solve_with_limit(m, BRUTE_FORCE_NODE_LIMIT)
}

pub fn brute_force_solve_with_limit(
    m: &CspModel,
    limit: u64,
) -> Result<SolveResult, BruteForceError> {
    m.validate()?;
    let nb = m.bools.len();
    let n = m.num_vars();
    let idx = |v: Var| match v {
        Var::Bool(b) => b as usize,
        Var::Int(i) => nb + i as usize,
    };
    let dom = |v: usize| -> (i64, i64) {
        if v < nb {
            (0, 1)
        } else {
            (m.ints[v - nb].lo, m.ints[v - nb].hi)
        }
    };

    let mut scopes: Vec<Vec<usize>> = Vec::with_capacity(m.constraints.len());
    let mut buf = Vec::new();
    for c in &m.constraints {
        buf.clear();
        c.vars(&mut buf);
        let mut s: Vec<usize> = buf.iter().map(|&v| idx(v)).collect();
        s.sort_unstable();
        s.dedup();
        scopes.push(s);
    }
    let order = enumeration_order(n, &scopes, dom);
    let mut pos = vec![0usize; n];
    for (p, &v) in order.iter().enumerate() {
        pos[v] = p;
    }
    let mut check_at: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut a = Assignment {
        bools: vec![false; nb],
        ints: m.ints.iter().map(|d| d.lo).collect(),
    };
    for (ci, s) in scopes.iter().enumerate() {
        match s.iter().map(|&v| pos[v]).max() {
            Some(p) => check_at[p].push(ci),
            None => {
                if !m.constraints[ci].holds(&a) {
                    return Ok(SolveResult::Unsat);
                }
            }
        }
    }

    let mut st = Enumeration {
        m,
        order: &order,
        check_at: &check_at,
        nb,
        nodes: 0,
        limit,
        best: None,
    };
    let stop = st.go(0, &mut a, &dom)?;
    Ok(match st.best {
        Some((assignment, objective)) => {
            debug_assert!(stop || m.objective.is_some());
            SolveResult::Sat {
                assignment,
                objective,
            }
        }
        None => SolveResult::Unsat,
    })
}

/// Greedy static order: prefer variables that complete constraints, then
/// variables connected to already placed ones, then small domains.
fn enumeration_order(
    n: usize,
    scopes: &[Vec<usize>],
    dom: impl Fn(usize) -> (i64, i64),
) -> Vec<usize> {
    let mut by_var: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (ci, s) in scopes.iter().enumerate() {
        for &v in s {
            by_var[v].push(ci);
        }
    }
    let mut remaining: Vec<usize> = scopes.iter().map(Vec::len).collect();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best: Option<((usize, usize, i64), usize)> = None;
        for v in 0..n {
            if placed[v] {
                continue;
            }
            let mut completes = 0;
            let mut touches = 0;
            for &ci in &by_var[v] {
                if remaining[ci] == 1 {
                    completes += 1;
                }
                if remaining[ci] < scopes[ci].len() {
                    touches += 1;
                }
            }
            let (lo, hi) = dom(v);
            let key = (completes, touches, -(hi - lo));
            if best.is_none_or(|(k, _)| key > k) {
                best = Some((key, v));
            }
        }
        let (_, v) = best.unwrap();
        placed[v] = true;
        for &ci in &by_var[v] {
            remaining[ci] -= 1;
        }
        order.push(v);
    }
    order
}

struct Enumeration<'a> {
    m: &'a CspModel,
    order: &'a [usize],
    check_at: &'a [Vec<usize>],
    nb: usize,
    nodes: u64,
    limit: u64,
    best: Option<(Assignment, Option<i64>)>,
}

impl Enumeration<'_> {
    /// Returns `Ok(true)` once the search can stop.
    fn go(
        &mut self,
        depth: usize,
        a: &mut Assignment,
        dom: &impl Fn(usize) -> (i64, i64),
    ) -> Result<bool, BruteForceError> {
        if depth == self.order.len() {
            match &self.m.objective {
                None => {
                    self.best = Some((a.clone(), None));
                    return Ok(true);
                }
                Some(obj) => {
                    let value = obj.value(a);
                    if self.best.as_ref().is_none_or(|(_, b)| Some(value) < *b) {
                        self.best = Some((a.clone(), Some(value)));
                    }
                    return Ok(false);
                }
            }
        }
        let v = self.order[depth];
        let (lo, hi) = dom(v);
        for val in lo..=hi {
            self.nodes += 1;
            if self.nodes > self.limit {
                return Err(BruteForceError::GuardExceeded(self.nodes));
            }
            if v < self.nb {
                a.bools[v] = val != 0;
            } else {
                a.ints[v - self.nb] = val;
            }
            if self.check_at[depth]
                .iter()
                .all(|&ci| self.m.constraints[ci].holds(a))
                && self.go(depth + 1, a, dom)?
            {
                return Ok(true);
            }
        }
        Ok(false)
    }
}
