//! Finite-domain constraint models and their canonical text dump.
//!
//! The dump is line oriented:
//!
//! ```text
//! dateline-model 1
//! bool <id> <group> <name>
//! int <id> <group> <lo> <hi> <name>
//! c <constraint>
//! minimize <term>...
//! ```
//!
//! Constraints use a prefix notation. Literals are `b3`, `!b3`,
//! `(= i2 4)`, `(!= i2 4)`, `(<= i2 4)` and `(>= i2 4)`; linear terms are
//! `(coef var)`:
//!
//! ```text
//! (clause b1 !b2 (<= i0 3))
//! (lin <= 5 (2 i0) (-1 b3))
//! (imp (b1 (= i2 1)) (lin = 0 (1 i5) (-1 i0)))
//! (iff b7 (b1 (<= i2 1)))
//! (one b0 b1 b2)
//! ```

use std::fmt::{self, Write as _};

use thiserror::Error;

pub const HEADER: &str = "dateline-model 1";

/// Branching groups used by the solver's default heuristic.
pub mod group {
    pub const ACTION: u8 = 0;
    pub const FLOW: u8 = 1;
    pub const AUX: u8 = 2;
    pub const TIME: u8 = 3;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    Bool(u32),
    Int(u32),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Bool(b) => write!(f, "b{b}"),
            Var::Int(i) => write!(f, "i{i}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lit {
    Pos(u32),
    Neg(u32),
    Eq(u32, i64),
    Ne(u32, i64),
    Le(u32, i64),
    Ge(u32, i64),
}

impl Lit {
    pub fn negate(self) -> Lit {
        match self {
            Lit::Pos(b) => Lit::Neg(b),
            Lit::Neg(b) => Lit::Pos(b),
            Lit::Eq(x, v) => Lit::Ne(x, v),
            Lit::Ne(x, v) => Lit::Eq(x, v),
            Lit::Le(x, v) => Lit::Ge(x, v + 1),
            Lit::Ge(x, v) => Lit::Le(x, v - 1),
        }
    }

    pub fn var(self) -> Var {
        match self {
            Lit::Pos(b) | Lit::Neg(b) => Var::Bool(b),
            Lit::Eq(x, _) | Lit::Ne(x, _) | Lit::Le(x, _) | Lit::Ge(x, _) => Var::Int(x),
        }
    }

    pub fn eval(self, a: &Assignment) -> bool {
        match self {
            Lit::Pos(b) => a.bools[b as usize],
            Lit::Neg(b) => !a.bools[b as usize],
            Lit::Eq(x, v) => a.ints[x as usize] == v,
            Lit::Ne(x, v) => a.ints[x as usize] != v,
            Lit::Le(x, v) => a.ints[x as usize] <= v,
            Lit::Ge(x, v) => a.ints[x as usize] >= v,
        }
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lit::Pos(b) => write!(f, "b{b}"),
            Lit::Neg(b) => write!(f, "!b{b}"),
            Lit::Eq(x, v) => write!(f, "(= i{x} {v})"),
            Lit::Ne(x, v) => write!(f, "(!= i{x} {v})"),
            Lit::Le(x, v) => write!(f, "(<= i{x} {v})"),
            Lit::Ge(x, v) => write!(f, "(>= i{x} {v})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cmp {
    Le,
    Eq,
    Ge,
}

impl Cmp {
    fn symbol(self) -> &'static str {
        match self {
            Cmp::Le => "<=",
            Cmp::Eq => "=",
            Cmp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Linear {
    pub terms: Vec<(i64, Var)>,
    pub cmp: Cmp,
    pub rhs: i64,
}

impl Linear {
    pub fn new(terms: Vec<(i64, Var)>, cmp: Cmp, rhs: i64) -> Self {
        Linear { terms, cmp, rhs }
    }

    pub fn value(&self, a: &Assignment) -> i64 {
        self.terms.iter().map(|&(c, v)| c * a.value(v)).sum()
    }

    pub fn holds(&self, a: &Assignment) -> bool {
        let lhs = self.value(a);
        match self.cmp {
            Cmp::Le => lhs <= self.rhs,
            Cmp::Eq => lhs == self.rhs,
            Cmp::Ge => lhs >= self.rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Constraint {
    /// Disjunction of literals; the empty clause is false.
    Clause(Vec<Lit>),
    Linear(Linear),
    /// The conjunction of `premise` implies `then` (a clause or linear row).
    Implies {
        premise: Vec<Lit>,
        then: Box<Constraint>,
    },
    /// `lit` holds exactly when every literal of `conj` holds.
    IffConj {
        lit: Lit,
        conj: Vec<Lit>,
    },
    ExactlyOne(Vec<Lit>),
}

impl Constraint {
    pub fn holds(&self, a: &Assignment) -> bool {
        match self {
            Constraint::Clause(lits) => lits.iter().any(|l| l.eval(a)),
            Constraint::Linear(lin) => lin.holds(a),
            Constraint::Implies { premise, then } => {
                !premise.iter().all(|l| l.eval(a)) || then.holds(a)
            }
            Constraint::IffConj { lit, conj } => lit.eval(a) == conj.iter().all(|l| l.eval(a)),
            Constraint::ExactlyOne(lits) => lits.iter().filter(|l| l.eval(a)).count() == 1,
        }
    }

    /// Every variable mentioned, in order of appearance (may repeat).
    pub fn vars(&self, out: &mut Vec<Var>) {
        match self {
            Constraint::Clause(lits) | Constraint::ExactlyOne(lits) => {
                out.extend(lits.iter().map(|l| l.var()))
            }
            Constraint::Linear(lin) => out.extend(lin.terms.iter().map(|t| t.1)),
            Constraint::Implies { premise, then } => {
                out.extend(premise.iter().map(|l| l.var()));
                then.vars(out);
            }
            Constraint::IffConj { lit, conj } => {
                out.push(lit.var());
                out.extend(conj.iter().map(|l| l.var()));
            }
        }
    }
}

fn write_lits(out: &mut String, lits: &[Lit]) {
    for l in lits {
        write!(out, " {l}").unwrap();
    }
}

fn write_terms(out: &mut String, terms: &[(i64, Var)]) {
    for (c, v) in terms {
        write!(out, " ({c} {v})").unwrap();
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        match self {
            Constraint::Clause(lits) => {
                s.push_str("(clause");
                write_lits(&mut s, lits);
                s.push(')');
            }
            Constraint::Linear(lin) => {
                write!(s, "(lin {} {}", lin.cmp.symbol(), lin.rhs).unwrap();
                write_terms(&mut s, &lin.terms);
                s.push(')');
            }
            Constraint::Implies { premise, then } => {
                s.push_str("(imp (");
                let mut inner = String::new();
                write_lits(&mut inner, premise);
                s.push_str(inner.trim_start());
                write!(s, ") {then})").unwrap();
            }
            Constraint::IffConj { lit, conj } => {
                write!(s, "(iff {lit} (").unwrap();
                let mut inner = String::new();
                write_lits(&mut inner, conj);
                s.push_str(inner.trim_start());
                s.push_str("))");
            }
            Constraint::ExactlyOne(lits) => {
                s.push_str("(one");
                write_lits(&mut s, lits);
                s.push(')');
            }
        }
        f.write_str(&s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoolDecl {
    pub name: String,
    pub group: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntDecl {
    pub name: String,
    pub lo: i64,
    pub hi: i64,
    pub group: u8,
}

/// Minimization target.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Objective {
    pub terms: Vec<(i64, Var)>,
}

impl Objective {
    pub fn value(&self, a: &Assignment) -> i64 {
        self.terms.iter().map(|&(c, v)| c * a.value(v)).sum()
    }
}

/// Values for every variable of a model.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Assignment {
    pub bools: Vec<bool>,
    pub ints: Vec<i64>,
}

impl Assignment {
    pub fn value(&self, v: Var) -> i64 {
        match v {
            Var::Bool(b) => self.bools[b as usize] as i64,
            Var::Int(i) => self.ints[i as usize],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("constraint {index}: undeclared variable {var}")]
    UndeclaredVar { index: usize, var: Var },
    #[error("objective: undeclared variable {0}")]
    UndeclaredObjectiveVar(Var),
    #[error("variable i{id} has empty bounds [{lo}, {hi}]")]
    EmptyBounds { id: u32, lo: i64, hi: i64 },
    #[error("constraint {index}: implication must conclude a clause or a linear row")]
    NestedImplication { index: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct CspModel {
    pub bools: Vec<BoolDecl>,
    pub ints: Vec<IntDecl>,
    pub constraints: Vec<Constraint>,
    pub objective: Option<Objective>,
}

fn clean_name(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_whitespace() || c == '(' || c == ')' {
                '_'
            } else {
                c
            }
        })
        .collect()
}

impl CspModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn new_bool(&mut self, name: &str, group: u8) -> u32 {
        self.bools.push(BoolDecl {
            name: clean_name(name),
            group,
        });
        self.bools.len() as u32 - 1
    }

    pub fn new_int(&mut self, name: &str, lo: i64, hi: i64, group: u8) -> u32 {
        self.ints.push(IntDecl {
            name: clean_name(name),
            lo,
            hi,
            group,
        });
        self.ints.len() as u32 - 1
    }

    pub fn add(&mut self, c: Constraint) {
        self.constraints.push(c);
    }

    pub fn clause(&mut self, lits: Vec<Lit>) {
        self.add(Constraint::Clause(lits));
    }

    pub fn linear(&mut self, terms: Vec<(i64, Var)>, cmp: Cmp, rhs: i64) {
        self.add(Constraint::Linear(Linear::new(terms, cmp, rhs)));
    }

    pub fn implies(&mut self, premise: Vec<Lit>, then: Constraint) {
        self.add(Constraint::Implies {
            premise,
            then: Box::new(then),
        });
    }

    pub fn implies_linear(
        &mut self,
        premise: Vec<Lit>,
        terms: Vec<(i64, Var)>,
        cmp: Cmp,
        rhs: i64,
    ) {
        self.implies(premise, Constraint::Linear(Linear::new(terms, cmp, rhs)));
    }

    pub fn num_vars(&self) -> usize {
        self.bools.len() + self.ints.len()
    }

    /// Checks that every referenced variable is declared and bounds are
    /// non-empty.
    pub fn validate(&self) -> Result<(), ModelError> {
        for (id, d) in self.ints.iter().enumerate() {
            if d.lo > d.hi {
                return Err(ModelError::EmptyBounds {
                    id: id as u32,
                    lo: d.lo,
                    hi: d.hi,
                });
            }
        }
        let declared = |v: Var| match v {
            Var::Bool(b) => (b as usize) < self.bools.len(),
            Var::Int(i) => (i as usize) < self.ints.len(),
        };
        let mut vars = Vec::new();
        for (index, c) in self.constraints.iter().enumerate() {
            if let Constraint::Implies { then, .. } = c {
                if !matches!(**then, Constraint::Clause(_) | Constraint::Linear(_)) {
                    return Err(ModelError::NestedImplication { index });
                }
            }
            vars.clear();
            c.vars(&mut vars);
            if let Some(&var) = vars.iter().find(|v| !declared(**v)) {
                return Err(ModelError::UndeclaredVar { index, var });
            }
        }
        if let Some(obj) = &self.objective {
            if let Some(&(_, v)) = obj.terms.iter().find(|t| !declared(t.1)) {
                return Err(ModelError::UndeclaredObjectiveVar(v));
            }
        }
        Ok(())
    }

    /// Index of the first constraint violated by `a`, if any. Bounds are
    /// checked as well.
    pub fn first_violation(&self, a: &Assignment) -> Option<String> {
        if a.bools.len() != self.bools.len() || a.ints.len() != self.ints.len() {
            return Some("assignment size mismatch".into());
        }
        for (i, d) in self.ints.iter().enumerate() {
            if a.ints[i] < d.lo || a.ints[i] > d.hi {
                return Some(format!("i{i} = {} outside [{}, {}]", a.ints[i], d.lo, d.hi));
            }
        }
        self.constraints
            .iter()
            .position(|c| !c.holds(a))
            .map(|i| format!("constraint {i}: {}", self.constraints[i]))
    }

    pub fn satisfies(&self, a: &Assignment) -> bool {
        self.first_violation(a).is_none()
    }

    /// Canonical text dump.
    pub fn export(&self) -> String {
        let mut out = String::new();
        out.push_str(HEADER);
        out.push('\n');
        for (i, b) in self.bools.iter().enumerate() {
            writeln!(out, "bool {i} {} {}", b.group, b.name).unwrap();
        }
        for (i, d) in self.ints.iter().enumerate() {
            writeln!(out, "int {i} {} {} {} {}", d.group, d.lo, d.hi, d.name).unwrap();
        }
        for c in &self.constraints {
            writeln!(out, "c {c}").unwrap();
        }
        if let Some(obj) = &self.objective {
            let mut s = String::from("minimize");
            write_terms(&mut s, &obj.terms);
            out.push_str(&s);
            out.push('\n');
        }
        out
    }

    /// Parses a canonical dump.
    pub fn parse(text: &str) -> Result<CspModel, ModelError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == HEADER => {}
            _ => {
                return Err(ModelError::Parse {
                    line: 1,
                    message: format!("expected header `{HEADER}`"),
                })
            }
        }
        let mut m = CspModel::new();
        for (i, line) in lines {
            let line_no = i + 1;
            let err = |message: String| ModelError::Parse {
                line: line_no,
                message,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (head, rest) = line.split_once(' ').unwrap_or((line, ""));
            match head {
                "bool" => {
                    let parts: Vec<&str> = rest.splitn(3, ' ').collect();
                    if parts.len() != 3 {
                        return Err(err("malformed bool declaration".into()));
                    }
                    let id: usize = parts[0].parse().map_err(|_| err("bad id".into()))?;
                    if id != m.bools.len() {
                        return Err(err(format!("expected bool id {}", m.bools.len())));
                    }
                    let group = parts[1].parse().map_err(|_| err("bad group".into()))?;
                    m.bools.push(BoolDecl {
                        name: parts[2].to_string(),
                        group,
                    });
                }
                "int" => {
                    let parts: Vec<&str> = rest.splitn(5, ' ').collect();
                    if parts.len() != 5 {
                        return Err(err("malformed int declaration".into()));
                    }
                    let id: usize = parts[0].parse().map_err(|_| err("bad id".into()))?;
                    if id != m.ints.len() {
                        return Err(err(format!("expected int id {}", m.ints.len())));
                    }
                    let group = parts[1].parse().map_err(|_| err("bad group".into()))?;
                    let lo = parts[2]
                        .parse()
                        .map_err(|_| err("bad lower bound".into()))?;
                    let hi = parts[3]
                        .parse()
                        .map_err(|_| err("bad upper bound".into()))?;
                    m.ints.push(IntDecl {
                        name: parts[4].to_string(),
                        lo,
                        hi,
                        group,
                    });
                }
                "c" => {
                    let sx = Sexp::parse(rest).map_err(err)?;
                    m.constraints.push(constraint_from(&sx).map_err(err)?);
                }
                "minimize" => {
                    let sx = Sexp::parse(&format!("({rest})")).map_err(err)?;
                    let Sexp::List(items) = sx else {
                        return Err(err("bad objective".into()));
                    };
                    let terms = items
                        .iter()
                        .map(term_from)
                        .collect::<Result<_, _>>()
                        .map_err(err)?;
                    m.objective = Some(Objective { terms });
                }
                other => return Err(err(format!("unknown directive `{other}`"))),
            }
        }
        m.validate()?;
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

impl Sexp {
    fn parse(text: &str) -> Result<Sexp, String> {
        let mut tokens = Vec::new();
        let mut cur = String::new();
        for ch in text.chars() {
            match ch {
                '(' | ')' => {
                    if !cur.is_empty() {
                        tokens.push(std::mem::take(&mut cur));
                    }
                    tokens.push(ch.to_string());
                }
                c if c.is_whitespace() => {
                    if !cur.is_empty() {
                        tokens.push(std::mem::take(&mut cur));
                    }
                }
                c => cur.push(c),
            }
        }
        if !cur.is_empty() {
            tokens.push(cur);
        }
        let mut pos = 0;
        let sx = Self::read(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err("trailing tokens".into());
        }
        Ok(sx)
    }

    fn read(tokens: &[String], pos: &mut usize) -> Result<Sexp, String> {
        let tok = tokens.get(*pos).ok_or("unexpected end of input")?;
        *pos += 1;
        match tok.as_str() {
            "(" => {
                let mut items = Vec::new();
                loop {
                    match tokens.get(*pos).map(String::as_str) {
                        Some(")") => {
                            *pos += 1;
                            return Ok(Sexp::List(items));
                        }
                        Some(_) => items.push(Self::read(tokens, pos)?),
                        None => return Err("unbalanced parentheses".into()),
                    }
                }
            }
            ")" => Err("unexpected `)`".into()),
            a => Ok(Sexp::Atom(a.to_string())),
        }
    }
}

fn parse_index(s: &str, prefix: char) -> Result<u32, String> {
    s.strip_prefix(prefix)
        .and_then(|r| r.parse().ok())
        .ok_or_else(|| format!("expected {prefix}<id>, found `{s}`"))
}

fn var_from(s: &str) -> Result<Var, String> {
    if s.starts_with('b') {
        parse_index(s, 'b').map(Var::Bool)
    } else {
        parse_index(s, 'i').map(Var::Int)
    }
}

fn int_from(s: &Sexp) -> Result<i64, String> {
    match s {
        Sexp::Atom(a) => a
            .parse()
            .map_err(|_| format!("expected integer, found `{a}`")),
        _ => Err("expected integer".into()),
    }
}

fn lit_from(s: &Sexp) -> Result<Lit, String> {
    match s {
        Sexp::Atom(a) => match a.strip_prefix('!') {
            Some(rest) => parse_index(rest, 'b').map(Lit::Neg),
            None => parse_index(a, 'b').map(Lit::Pos),
        },
        Sexp::List(items) => {
            let [Sexp::Atom(op), Sexp::Atom(x), v] = items.as_slice() else {
                return Err("malformed literal".into());
            };
            let x = parse_index(x, 'i')?;
            let v = int_from(v)?;
            Ok(match op.as_str() {
                "=" => Lit::Eq(x, v),
                "!=" => Lit::Ne(x, v),
                "<=" => Lit::Le(x, v),
                ">=" => Lit::Ge(x, v),
                other => return Err(format!("unknown literal operator `{other}`")),
            })
        }
    }
}

fn term_from(s: &Sexp) -> Result<(i64, Var), String> {
    match s {
        Sexp::List(items) => match items.as_slice() {
            [c, Sexp::Atom(v)] => Ok((int_from(c)?, var_from(v)?)),
            _ => Err("malformed term".into()),
        },
        _ => Err("expected term".into()),
    }
}

fn lit_list(s: &Sexp) -> Result<Vec<Lit>, String> {
    match s {
        Sexp::List(items) => items.iter().map(lit_from).collect(),
        _ => Err("expected literal list".into()),
    }
}

fn constraint_from(s: &Sexp) -> Result<Constraint, String> {
    let Sexp::List(items) = s else {
        return Err("expected constraint".into());
    };
    let Some(Sexp::Atom(head)) = items.first() else {
        return Err("missing constraint tag".into());
    };
    let args = &items[1..];
    match head.as_str() {
        "clause" => Ok(Constraint::Clause(
            args.iter().map(lit_from).collect::<Result<_, _>>()?,
        )),
        "one" => Ok(Constraint::ExactlyOne(
            args.iter().map(lit_from).collect::<Result<_, _>>()?,
        )),
        "lin" => {
            let [Sexp::Atom(cmp), rhs, terms @ ..] = args else {
                return Err("malformed linear row".into());
            };
            let cmp = match cmp.as_str() {
                "<=" => Cmp::Le,
                "=" => Cmp::Eq,
                ">=" => Cmp::Ge,
                other => return Err(format!("unknown comparator `{other}`")),
            };
            Ok(Constraint::Linear(Linear {
                terms: terms.iter().map(term_from).collect::<Result<_, _>>()?,
                cmp,
                rhs: int_from(rhs)?,
            }))
        }
        "imp" => {
            let [premise, then] = args else {
                return Err("malformed implication".into());
            };
            Ok(Constraint::Implies {
                premise: lit_list(premise)?,
                then: Box::new(constraint_from(then)?),
            })
        }
        "iff" => {
            let [lit, conj] = args else {
                return Err("malformed reification".into());
            };
            Ok(Constraint::IffConj {
                lit: lit_from(lit)?,
                conj: lit_list(conj)?,
            })
        }
        other => Err(format!("unknown constraint tag `{other}`")),
    }
}
