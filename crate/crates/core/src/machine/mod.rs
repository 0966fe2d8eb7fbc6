//! Finite-state, pushdown and tape machines over register operations.

pub mod format;
pub mod pdm_cfg;

use std::collections::{BTreeSet, HashSet, VecDeque};

use crate::action::{Action, Kind, Op, Role};
use crate::error::{Error, Result};
use crate::lang::fsa::Fsa;
use crate::value::Value;

pub use pdm_cfg::pdm_to_cfg;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fsm {
    pub states: Vec<String>,
    pub init: usize,
    pub trans: Vec<(usize, Option<Op>, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PdmRule {
    pub from: usize,
    pub top: usize,
    pub label: Option<Op>,
    pub to: usize,
    /// Replacement for the top symbol, topmost first.
    pub push: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pdm {
    pub states: Vec<String>,
    pub stack: Vec<String>,
    pub init: usize,
    pub bottom: usize,
    pub rules: Vec<PdmRule>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dir {
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TmTrans {
    Tape { from: usize, read: u16, write: u16, dir: Dir, to: usize },
    Reg { from: usize, op: Op, to: usize },
}

/// A tape machine; the tape starts blank and symbol 0 is the blank `_`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tm {
    pub states: Vec<String>,
    pub tape: Vec<String>,
    pub init: usize,
    pub trans: Vec<TmTrans>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Machine {
    Fsm(Fsm),
    Pdm(Pdm),
    Tm(Tm),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MachineKind {
    Fsm,
    Pdm,
    Tm,
}

/// A machine configuration. PDM stacks keep their top at the end.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Config {
    Fsm(usize),
    Pdm(usize, Vec<usize>),
    Tm(usize, Vec<u16>, usize),
}

impl Config {
    pub fn state(&self) -> usize {
        match self {
            Config::Fsm(q) | Config::Pdm(q, _) | Config::Tm(q, _, _) => *q,
        }
    }
}

/// Bounds used when stepping configurations explicitly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub stack_depth: usize,
    /// Internal configurations explored per register operation.
    pub internal_steps: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { stack_depth: 16, internal_steps: 10_000 }
    }
}

/// Register moves reachable through internal steps, and whether a limit cut
/// the search short.
#[derive(Clone, Debug, Default)]
pub struct Successors {
    pub moves: Vec<(Op, Config)>,
    pub bound_hit: bool,
}

fn extend_op(label: &Option<Op>) -> Vec<Option<Op>> {
    match label {
        Some(op) if op.kind == Kind::Write => vec![
            *label,
            Some(Op { kind: Kind::FirstWrite, value: op.value }),
            Some(Op { kind: Kind::UselessWrite, value: op.value }),
        ],
        _ => vec![*label],
    }
}

impl Fsm {
    pub fn new(states: Vec<String>, init: usize) -> Self {
        Fsm { states, init, trans: Vec::new() }
    }

    /// As an LTS (every state accepting) over `alphabet`.
    pub fn lts(&self, role: Role, alphabet: BTreeSet<Action>) -> Fsa<Action> {
        let n = self.states.len();
        let mut a = Fsa { alphabet, init: self.init, accepting: vec![true; n], edges: vec![Vec::new(); n] };
        for (p, l, q) in &self.trans {
            a.add_edge(*p, l.map(|op| op.with_role(role)), *q);
        }
        a
    }

    /// Wraps as a pushdown machine with a single stack symbol that is never
    /// popped.
    pub fn to_pdm(&self) -> Pdm {
        Pdm {
            states: self.states.clone(),
            stack: vec!["Z".into()],
            init: self.init,
            bottom: 0,
            rules: self
                .trans
                .iter()
                .map(|(p, l, q)| PdmRule { from: *p, top: 0, label: *l, to: *q, push: vec![0] })
                .collect(),
        }
    }

    pub fn is_deterministic(&self) -> bool {
        for (i, (p1, l1, q1)) in self.trans.iter().enumerate() {
            for (p2, l2, q2) in &self.trans[i + 1..] {
                if p1 != p2 || q1 == q2 {
                    continue;
                }
                let ok = matches!((l1, l2), (Some(a), Some(b))
                    if a.kind == Kind::Read && b.kind == Kind::Read && a.value != b.value);
                if !ok {
                    return false;
                }
            }
        }
        true
    }
}

impl Pdm {
    /// Sum of `|push| + 5` over rules.
    pub fn size(&self) -> usize {
        self.rules.iter().map(|r| r.push.len() + 5).sum()
    }
}

impl Tm {
    fn tape_moves(&self, q: usize, tape: &[u16], head: usize) -> Vec<Config> {
        let mut out = Vec::new();
        let cell = tape.get(head).copied().unwrap_or(0);
        for t in &self.trans {
            if let TmTrans::Tape { from, read, write, dir, to } = t {
                if *from != q || *read != cell {
                    continue;
                }
                let mut tape = tape.to_vec();
                if head >= tape.len() {
                    tape.resize(head + 1, 0);
                }
                tape[head] = *write;
                let mut head = head;
                match dir {
                    Dir::Left => {
                        if head == 0 {
                            tape.insert(0, 0);
                        } else {
                            head -= 1;
                        }
                    }
                    Dir::Right => head += 1,
                }
                out.push(canonical_tape(*to, tape, head));
            }
        }
        out
    }
}

fn canonical_tape(q: usize, mut tape: Vec<u16>, mut head: usize) -> Config {
    while tape.len() > head + 1 && tape.last() == Some(&0) {
        tape.pop();
    }
    let lead = tape.iter().take(head).take_while(|&&c| c == 0).count();
    tape.drain(..lead);
    head -= lead;
    if tape.len() == head + 1 && tape[head] == 0 {
        tape.pop();
    }
    Config::Tm(q, tape, head)
}

impl Machine {
    pub fn kind(&self) -> MachineKind {
        match self {
            Machine::Fsm(_) => MachineKind::Fsm,
            Machine::Pdm(_) => MachineKind::Pdm,
            Machine::Tm(_) => MachineKind::Tm,
        }
    }

    pub fn state_names(&self) -> &[String] {
        match self {
            Machine::Fsm(m) => &m.states,
            Machine::Pdm(m) => &m.states,
            Machine::Tm(m) => &m.states,
        }
    }

    pub fn num_states(&self) -> usize {
        self.state_names().len()
    }

    /// Every register operation on a transition.
    pub fn ops(&self) -> BTreeSet<Op> {
        match self {
            Machine::Fsm(m) => m.trans.iter().filter_map(|t| t.1).collect(),
            Machine::Pdm(m) => m.rules.iter().filter_map(|r| r.label).collect(),
            Machine::Tm(m) => m
                .trans
                .iter()
                .filter_map(|t| match t {
                    TmTrans::Reg { op, .. } => Some(*op),
                    _ => None,
                })
                .collect(),
        }
    }

    pub fn values(&self) -> BTreeSet<Value> {
        self.ops().into_iter().map(|o| o.value).collect()
    }

    pub fn writes(&self, v: Value) -> bool {
        self.ops().iter().any(|o| o.kind.is_write() && o.value == v)
    }

    /// Adds first-write and useless-write copies of every write. Only
    /// contributors have these actions.
    pub fn extend(&self, role: Role) -> Result<Machine> {
        if role == Role::Leader {
            return Err(Error::invalid("only contributor machines can be extended"));
        }
        Ok(match self {
            Machine::Fsm(m) => {
                let mut out = m.clone();
                out.trans = m.trans.iter().flat_map(|(p, l, q)| extend_op(l).into_iter().map(move |l| (*p, l, *q))).collect();
                Machine::Fsm(out)
            }
            Machine::Pdm(m) => {
                let mut out = m.clone();
                out.rules = m
                    .rules
                    .iter()
                    .flat_map(|r| extend_op(&r.label).into_iter().map(move |l| PdmRule { label: l, ..r.clone() }))
                    .collect();
                Machine::Pdm(out)
            }
            Machine::Tm(m) => {
                let mut out = m.clone();
                out.trans = m
                    .trans
                    .iter()
                    .flat_map(|t| match t {
                        TmTrans::Reg { from, op, to } => extend_op(&Some(*op))
                            .into_iter()
                            .map(|o| TmTrans::Reg { from: *from, op: o.unwrap(), to: *to })
                            .collect::<Vec<_>>(),
                        other => vec![other.clone()],
                    })
                    .collect();
                Machine::Tm(out)
            }
        })
    }

    pub fn as_pdm(&self) -> Option<Pdm> {
        match self {
            Machine::Fsm(m) => Some(m.to_pdm()),
            Machine::Pdm(m) => Some(m.clone()),
            Machine::Tm(_) => None,
        }
    }

    pub fn initial(&self) -> Config {
        match self {
            Machine::Fsm(m) => Config::Fsm(m.init),
            Machine::Pdm(m) => Config::Pdm(m.init, vec![m.bottom]),
            Machine::Tm(m) => Config::Tm(m.init, Vec::new(), 0),
        }
    }

    /// One step: silent successors and register-labelled successors.
    /// Pushes beyond `stack_depth` are dropped and reported.
    pub fn step(&self, c: &Config, stack_depth: usize) -> (Vec<Config>, Vec<(Op, Config)>, bool) {
        let mut silent = Vec::new();
        let mut labelled = Vec::new();
        let mut hit = false;
        match (self, c) {
            (Machine::Fsm(m), Config::Fsm(q)) => {
                for (p, l, t) in &m.trans {
                    if p == q {
                        match l {
                            None => silent.push(Config::Fsm(*t)),
                            Some(op) => labelled.push((*op, Config::Fsm(*t))),
                        }
                    }
                }
            }
            (Machine::Pdm(m), Config::Pdm(q, stack)) => {
                if let Some(&top) = stack.last() {
                    for r in &m.rules {
                        if r.from != *q || r.top != top {
                            continue;
                        }
                        let mut s = stack[..stack.len() - 1].to_vec();
                        s.extend(r.push.iter().rev());
                        if s.len() > stack_depth {
                            hit = true;
                            continue;
                        }
                        let next = Config::Pdm(r.to, s);
                        match r.label {
                            None => silent.push(next),
                            Some(op) => labelled.push((op, next)),
                        }
                    }
                }
            }
            (Machine::Tm(m), Config::Tm(q, tape, head)) => {
                silent = m.tape_moves(*q, tape, *head);
                for t in &m.trans {
                    if let TmTrans::Reg { from, op, to } = t {
                        if from == q {
                            labelled.push((*op, Config::Tm(*to, tape.clone(), *head)));
                        }
                    }
                }
            }
            _ => panic!("configuration does not belong to this machine"),
        }
        (silent, labelled, hit)
    }

    /// Register moves available after any number of silent steps.
    pub fn successors(&self, c: &Config, limits: Limits) -> Successors {
        let mut out = Successors::default();
        let mut seen: HashSet<Config> = HashSet::from([c.clone()]);
        let mut queue = VecDeque::from([c.clone()]);
        let mut moves = BTreeSet::new();
        while let Some(cur) = queue.pop_front() {
            let (silent, labelled, hit) = self.step(&cur, limits.stack_depth);
            out.bound_hit |= hit;
            moves.extend(labelled);
            for n in silent {
                if seen.contains(&n) {
                    continue;
                }
                if seen.len() >= limits.internal_steps {
                    out.bound_hit = true;
                    continue;
                }
                seen.insert(n.clone());
                queue.push_back(n);
            }
        }
        out.moves = moves.into_iter().collect();
        out
    }

    /// Is `word` (of operations) a trace of the machine? Explicit search,
    /// so the answer is `None` when a limit was hit before acceptance.
    pub fn accepts_ops(&self, word: &[Op], limits: Limits) -> Option<bool> {
        let mut cur: BTreeSet<Config> = BTreeSet::from([self.initial()]);
        let mut hit = false;
        for op in word {
            let mut next = BTreeSet::new();
            for c in &cur {
                let s = self.successors(c, limits);
                hit |= s.bound_hit;
                for (o, n) in s.moves {
                    if o == *op {
                        next.insert(n);
                    }
                }
            }
            if next.is_empty() {
                return if hit { None } else { Some(false) };
            }
            cur = next;
        }
        Some(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::ValueTable;

    fn two_writes() -> (ValueTable, Fsm) {
        let mut vt = ValueTable::new();
        let g = vt.intern("g");
        let mut m = Fsm::new(vec!["a".into(), "b".into(), "c".into()], 0);
        m.trans.push((0, Some(Op::write(g)), 1));
        m.trans.push((1, Some(Op::read(g)), 2));
        m.trans.push((2, Some(Op::write(crate::value::HASH)), 0));
        (vt, m)
    }

    #[test]
    fn extension_triples_writes() {
        let (_, m) = two_writes();
        let e = Machine::Fsm(m.clone()).extend(Role::Contributor).unwrap();
        let Machine::Fsm(e) = e else { unreachable!() };
        assert_eq!(e.trans.len(), m.trans.len() + 4);
        assert!(Machine::Fsm(m).extend(Role::Leader).is_err());
    }

    #[test]
    fn no_writes_extension_is_identity() {
        let mut vt = ValueTable::new();
        let g = vt.intern("g");
        let mut m = Fsm::new(vec!["a".into()], 0);
        m.trans.push((0, Some(Op::read(g)), 0));
        let e = Machine::Fsm(m.clone()).extend(Role::Contributor).unwrap();
        assert_eq!(e, Machine::Fsm(m));
    }

    #[test]
    fn pdm_counter_steps() {
        let mut vt = ValueTable::new();
        let a = vt.intern("a");
        let pdm = Pdm {
            states: vec!["p".into()],
            stack: vec!["Z".into(), "A".into()],
            init: 0,
            bottom: 0,
            rules: vec![
                PdmRule { from: 0, top: 0, label: Some(Op::write(a)), to: 0, push: vec![1, 0] },
                PdmRule { from: 0, top: 1, label: Some(Op::write(a)), to: 0, push: vec![1, 1] },
            ],
        };
        let m = Machine::Pdm(pdm);
        let limits = Limits { stack_depth: 3, internal_steps: 100 };
        assert_eq!(m.accepts_ops(&[Op::write(a); 2], limits), Some(true));
        assert_eq!(m.accepts_ops(&[Op::write(a); 3], limits), None);
    }

    #[test]
    fn tm_walks_then_writes() {
        let mut vt = ValueTable::new();
        let g = vt.intern("g");
        // move right three times, then write g
        let tm = Tm {
            states: (0..5).map(|i| format!("s{i}")).collect(),
            tape: vec!["_".into(), "1".into()],
            init: 0,
            trans: vec![
                TmTrans::Tape { from: 0, read: 0, write: 1, dir: Dir::Right, to: 1 },
                TmTrans::Tape { from: 1, read: 0, write: 1, dir: Dir::Right, to: 2 },
                TmTrans::Tape { from: 2, read: 0, write: 1, dir: Dir::Left, to: 3 },
                TmTrans::Reg { from: 3, op: Op::write(g), to: 4 },
            ],
        };
        let m = Machine::Tm(tm);
        let s = m.successors(&m.initial(), Limits::default());
        assert_eq!(s.moves.len(), 1);
        assert_eq!(s.moves[0].1, Config::Tm(4, vec![1, 1, 1], 1));
        let tight = Limits { stack_depth: 0, internal_steps: 2 };
        assert!(m.successors(&m.initial(), tight).bound_hit);
    }

    #[test]
    fn determinism_predicate() {
        let (_, m) = two_writes();
        assert!(m.is_deterministic());
        let mut vt = ValueTable::new();
        let g = vt.intern("g");
        let mut n = Fsm::new(vec!["a".into(), "b".into(), "c".into()], 0);
        n.trans.push((0, Some(Op::read(g)), 1));
        n.trans.push((0, Some(Op::read(g)), 2));
        assert!(!n.is_deterministic());
    }
}
