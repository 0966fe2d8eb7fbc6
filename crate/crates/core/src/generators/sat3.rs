//! Networks that can write `#` exactly when a CNF formula is satisfiable.
//!
//! Per variable `x`, the leader writes `bit-x`; contributors that read it
//! write `propose-x-is-0` then `propose-x-is-1`. The leader reads one of the
//! two and answers `commit-x-is-b`. Contributors that read the commit answer
//! every later `get-value-of-x` with `x-is-b`; the others are stuck.
//!
//! Clauses are checked in order, literal by literal: the leader asks for the
//! variable and either moves to the next clause (literal true) or to the
//! next literal (literal false). A clause whose literals are all false
//! leaves the leader stuck. After the last clause the leader writes `done`,
//! and a contributor that reads `done` writes `#`.

use crate::action::Op;
use crate::generators::cnf::CnfFormula;
use crate::machine::{Fsm, Machine};
use crate::network::NetworkInstance;
use crate::value::{Value, ValueTable, HASH};

struct Builder {
    m: Fsm,
}

impl Builder {
    fn new() -> Self {
        Builder { m: Fsm::new(Vec::new(), 0) }
    }

    fn state(&mut self, name: String) -> usize {
        self.m.states.push(name);
        self.m.states.len() - 1
    }

    fn edge(&mut self, p: usize, op: Op, q: usize) {
        self.m.trans.push((p, Some(op), q));
    }
}

struct Vars {
    bit: Value,
    propose: [Value; 2],
    commit: [Value; 2],
    get: Value,
    is: [Value; 2],
}

/// The leader and contributor for `f`; both are deterministic.
pub fn gen_3sat(f: &CnfFormula) -> NetworkInstance {
    let mut vt = ValueTable::new();
    let vars: Vec<Vars> = (1..=f.vars)
        .map(|i| Vars {
            bit: vt.intern(&format!("bit-x{i}")),
            propose: [0, 1].map(|b| vt.intern(&format!("propose-x{i}-is-{b}"))),
            commit: [0, 1].map(|b| vt.intern(&format!("commit-x{i}-is-{b}"))),
            get: vt.intern(&format!("get-value-of-x{i}")),
            is: [0, 1].map(|b| vt.intern(&format!("x{i}-is-{b}"))),
        })
        .collect();
    let done = vt.intern("done");

    let mut d = Builder::new();
    let mut cur = d.state("start".into());
    for (i, v) in vars.iter().enumerate() {
        let asked = d.state(format!("asked-x{}", i + 1));
        let next = d.state(format!("assigned-x{}", i + 1));
        d.edge(cur, Op::write(v.bit), asked);
        for b in 0..2 {
            let heard = d.state(format!("heard-x{}-is-{b}", i + 1));
            d.edge(asked, Op::read(v.propose[b]), heard);
            d.edge(heard, Op::write(v.commit[b]), next);
        }
        cur = next;
    }
    for (j, clause) in f.clauses.iter().enumerate() {
        let next = d.state(format!("clause-{}-ok", j + 1));
        for (k, &lit) in clause.iter().enumerate() {
            let v = &vars[lit.unsigned_abs() as usize - 1];
            let wait = d.state(format!("clause-{}-lit-{}", j + 1, k + 1));
            d.edge(cur, Op::write(v.get), wait);
            let good = usize::from(lit > 0);
            d.edge(wait, Op::read(v.is[good]), next);
            if k + 1 < clause.len() {
                let more = d.state(format!("clause-{}-try-{}", j + 1, k + 2));
                d.edge(wait, Op::read(v.is[1 - good]), more);
                cur = more;
            }
        }
        cur = next;
    }
    let end = d.state("end".into());
    d.edge(cur, Op::write(done), end);

    let mut c = Builder::new();
    let c0 = c.state("idle".into());
    for (i, v) in vars.iter().enumerate() {
        let n = i + 1;
        let woke = c.state(format!("woke-x{n}"));
        let half = c.state(format!("proposed-x{n}-is-0"));
        let wait = c.state(format!("proposed-x{n}"));
        c.edge(c0, Op::read(v.bit), woke);
        c.edge(woke, Op::write(v.propose[0]), half);
        c.edge(half, Op::write(v.propose[1]), wait);
        for b in 0..2 {
            let knows = c.state(format!("knows-x{n}-is-{b}"));
            let asked = c.state(format!("asked-x{n}-is-{b}"));
            c.edge(wait, Op::read(v.commit[b]), knows);
            c.edge(knows, Op::read(v.get), asked);
            c.edge(asked, Op::write(v.is[b]), knows);
        }
    }
    let told = c.state("told".into());
    let fin = c.state("wrote".into());
    c.edge(c0, Op::read(done), told);
    c.edge(told, Op::write(HASH), fin);

    NetworkInstance::new(vt, Machine::Fsm(d.m), Machine::Fsm(c.m)).expect("plain labels only")
}
