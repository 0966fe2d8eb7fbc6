//! Explicit exploration of an FSM leader against one simulator per value,
//! for every first-write sequence at once.
//!
//! Any simulator move can be repeated by a copy, so each simulator is kept as
//! the set of nodes some copy has reached, and the sets only grow. On top of
//! that:
//!
//! - reads are taken as soon as they are enabled;
//! - a useless write is placed just before the next write, so its target
//!   node waits ("pending") until then;
//! - a value some simulator has first-written can be written again by a copy
//!   of that simulator whenever someone wants to read it.
//!
//! So the store only matters while it holds a leader value that no
//! contributor can rewrite. `Release` gives it up.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::action::{Action, Kind, Op, Role};
use crate::error::{Error, Result};
use crate::lang::Fsa;
use crate::machine::Fsm;
use crate::network::{emit, replay, NetworkInstance, Step, Verdict, Who, Witness, REPLAY_LIMITS};
use crate::value::{Value, HASH};

use super::sims::{sim_alphabet, simple_paths};
use super::{unsafe_verdict, VerifyOptions};

/// The store holds nothing a contributor cannot rewrite.
const FREE: u16 = u16::MAX;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }
    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn clear(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }
    fn is_empty(&self) -> bool {
        self.0.iter().all(|w| *w == 0)
    }
    /// `self ⊆ a ∪ b`
    fn within(&self, a: &Bits, b: &Bits) -> bool {
        self.0.iter().zip(&a.0).zip(&b.0).all(|((x, a), b)| x & !(a | b) == 0)
    }
}

/// One simulator; its nodes are numbered from `base` in the shared node
/// space, and moves are given after silent closure.
struct Sim {
    value: usize,
    base: usize,
    moves: Vec<Vec<(Action, u32)>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct St {
    q: u32,
    store: u16,
    written: Bits,
    active: Bits,
    pending: Bits,
}

impl St {
    fn covered_by(&self, o: &St) -> bool {
        self.active.within(&o.active, &o.active) && self.pending.within(&o.pending, &o.active)
    }
}

#[derive(Clone, Copy, Debug)]
enum Move {
    Leader(Op, u32),
    Release,
}

/// Witness bookkeeping along one replayed path.
#[derive(Clone, Copy, Debug)]
enum Entry {
    Leader(Action),
    /// Global node reached from `parent` by `action`.
    Add { node: usize, parent: usize, action: Action },
    Pull(Value),
}

#[derive(Default)]
struct Log {
    entries: Vec<Entry>,
    /// Useless writes held back until the next write.
    waiting: Vec<Entry>,
    /// Readable store value in the concrete run.
    holds: Option<Value>,
}

impl Log {
    fn write(&mut self, e: Entry, v: Value) {
        self.entries.append(&mut self.waiting);
        self.entries.push(e);
        self.holds = Some(v);
    }

    fn pull(&mut self, v: Value) {
        if self.holds != Some(v) {
            self.write(Entry::Pull(v), v);
        }
    }
}

struct Ctx {
    index: HashMap<Value, usize>,
    domain: Vec<Value>,
    leader: Vec<Vec<(Op, u32)>>,
    sims: Vec<Sim>,
    nodes: usize,
}

fn closure_moves<L: Copy>(n: usize, edges: impl Fn(usize) -> Vec<(Option<L>, usize)>) -> Vec<Vec<(L, u32)>> {
    (0..n)
        .map(|s| {
            let mut seen = HashSet::from([s]);
            let mut stack = vec![s];
            let mut out = Vec::new();
            while let Some(p) = stack.pop() {
                for (l, t) in edges(p) {
                    match l {
                        None => {
                            if seen.insert(t) {
                                stack.push(t);
                            }
                        }
                        Some(a) => out.push((a, t as u32)),
                    }
                }
            }
            out
        })
        .collect()
}

impl Ctx {
    fn new(net: &NetworkInstance, d: &Fsm, c_ext: &Fsm, opts: &VerifyOptions) -> Result<Self> {
        let domain = net.domain.clone();
        let index: HashMap<Value, usize> = domain.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let mut by_state: Vec<Vec<(Option<Op>, usize)>> = vec![Vec::new(); d.states.len()];
        for (p, l, q) in &d.trans {
            by_state[*p].push((*l, *q));
        }
        let leader = closure_moves(d.states.len(), |s| by_state[s].clone());
        let mut sims = Vec::new();
        let mut nodes = 0;
        for (i, &g) in domain.iter().enumerate() {
            if !net.contributor.writes(g) {
                continue;
            }
            let z: Fsa<Action> = simple_paths(c_ext, g, sim_alphabet(&domain, g), opts.state_cap)?;
            if z.is_empty() {
                continue;
            }
            let moves = closure_moves(z.num_states(), |s| z.edges[s].clone());
            sims.push(Sim { value: i, base: nodes, moves });
            nodes += z.num_states();
            if nodes > opts.state_cap {
                return Err(Error::Resource { what: "simulator nodes", limit: opts.state_cap });
            }
        }
        Ok(Ctx { index, domain, leader, sims, nodes })
    }

    fn start(&self, q: usize) -> St {
        let mut active = Bits::new(self.nodes);
        for s in &self.sims {
            active.set(s.base);
        }
        St { q: q as u32, store: FREE, written: Bits::new(self.domain.len()), active, pending: Bits::new(self.nodes) }
    }

    fn readable(&self, s: &St, v: usize) -> bool {
        s.store as usize == v || (s.store == FREE && s.written.get(v))
    }

    fn any_written(&self, s: &St) -> Option<usize> {
        (0..self.domain.len()).find(|&v| s.written.get(v))
    }

    /// Takes every enabled read and useless write. While the store holds
    /// nothing irreplaceable, also makes every possible first write and
    /// wakes pending nodes.
    fn close(&self, s: &mut St, mut log: Option<&mut Log>) {
        loop {
            let mut changed = false;
            for sim in &self.sims {
                if s.written.get(sim.value) {
                    continue;
                }
                for local in 0..sim.moves.len() {
                    let n = sim.base + local;
                    let (act, pend) = (s.active.get(n), s.pending.get(n));
                    if !act && !pend {
                        continue;
                    }
                    for &(a, t) in &sim.moves[local] {
                        let t = sim.base + t as usize;
                        if s.active.get(t) {
                            continue;
                        }
                        let v = self.index[&a.value];
                        let add = Entry::Add { node: t, parent: n, action: a };
                        match a.kind {
                            Kind::Read if act && self.readable(s, v) => {
                                s.active.set(t);
                                s.pending.clear(t);
                                if let Some(l) = log.as_deref_mut() {
                                    l.waiting.retain(|e| !matches!(e, Entry::Add { node, .. } if *node == t));
                                    l.pull(a.value);
                                    l.entries.push(add);
                                }
                            }
                            Kind::UselessWrite if s.written.get(v) && !s.pending.get(t) => {
                                s.pending.set(t);
                                if let Some(l) = log.as_deref_mut() {
                                    l.waiting.push(add);
                                }
                            }
                            _ => continue,
                        }
                        changed = true;
                    }
                }
            }
            if s.store == FREE {
                for sim in &self.sims {
                    if s.written.get(sim.value) {
                        continue;
                    }
                    let fire = (0..sim.moves.len()).find_map(|local| {
                        let n = sim.base + local;
                        let f = sim.moves[local].iter().find(|(a, _)| a.kind == Kind::FirstWrite)?;
                        s.active.get(n).then_some((n, *f))
                    });
                    if let Some((n, (a, t))) = fire {
                        if let Some(l) = log.as_deref_mut() {
                            l.write(Entry::Add { node: sim.base + t as usize, parent: n, action: a }, a.value);
                        }
                        s.written.set(sim.value);
                        self.wake(s);
                        self.forget(s, sim);
                        changed = true;
                    }
                }
            }
            if s.store == FREE && !s.pending.is_empty() {
                if let Some(v) = self.any_written(s) {
                    self.wake(s);
                    if let Some(l) = log.as_deref_mut() {
                        let v = self.domain[v];
                        l.write(Entry::Pull(v), v);
                    }
                    changed = true;
                }
            }
            if !changed {
                return;
            }
        }
    }

    fn wake(&self, s: &mut St) {
        for (a, p) in s.active.0.iter_mut().zip(s.pending.0.iter_mut()) {
            *a |= *p;
            *p = 0;
        }
    }

    fn forget(&self, s: &mut St, sim: &Sim) {
        for n in sim.base..sim.base + sim.moves.len() {
            s.active.clear(n);
            s.pending.clear(n);
        }
    }

    fn moves(&self, s: &St, out: &mut Vec<Move>) {
        for &(op, q2) in &self.leader[s.q as usize] {
            if op.kind == Kind::Read && !self.readable(s, self.index[&op.value]) {
                continue;
            }
            out.push(Move::Leader(op, q2));
        }
        if s.store != FREE {
            out.push(Move::Release);
        }
    }

    fn apply(&self, s: &St, m: Move, mut log: Option<&mut Log>) -> St {
        let mut t = s.clone();
        match m {
            Move::Leader(op, q2) => {
                t.q = q2;
                let v = self.index[&op.value];
                let a = op.with_role(Role::Leader);
                if op.kind == Kind::Read {
                    if t.store as usize != v {
                        t.store = FREE;
                        if let Some(l) = log.as_deref_mut() {
                            l.pull(op.value);
                        }
                    }
                    if let Some(l) = log.as_deref_mut() {
                        l.entries.push(Entry::Leader(a));
                    }
                } else {
                    t.store = if t.written.get(v) { FREE } else { v as u16 };
                    self.wake(&mut t);
                    if let Some(l) = log.as_deref_mut() {
                        l.write(Entry::Leader(a), op.value);
                    }
                }
            }
            Move::Release => t.store = FREE,
        }
        self.close(&mut t, log);
        t
    }
}

/// One process per simulator node reached; a node's step is made by the
/// processes of every node below it. Later writes are copies of the first
/// writer.
fn trace_of(net: &NetworkInstance, ctx: &Ctx, entries: &[Entry]) -> (Vec<Action>, Option<Vec<Step>>) {
    let roots: HashSet<usize> = ctx.sims.iter().map(|s| s.base).collect();
    let mut parent: HashMap<usize, usize> = HashMap::new();
    for e in entries {
        if let Entry::Add { node, parent: p, .. } = e {
            parent.insert(*node, *p);
        }
    }
    let mut below: HashMap<usize, Vec<usize>> = HashMap::new();
    for &n in parent.keys() {
        let mut cur = n;
        loop {
            below.entry(cur).or_default().push(n);
            match parent.get(&cur) {
                Some(&p) if !roots.contains(&p) => cur = p,
                _ => break,
            }
        }
    }
    let mut pid: HashMap<usize, usize> = HashMap::new();
    let mut first: HashMap<Value, usize> = HashMap::new();
    let mut word = Vec::new();
    let mut who = Vec::new();
    for e in entries {
        match *e {
            Entry::Leader(a) => {
                word.push(a);
                who.push(Who::Leader);
            }
            Entry::Pull(v) => {
                let Some(&w) = first.get(&v) else { return (word, None) };
                word.push(Action::wc(v));
                who.push(Who::Copy(w));
            }
            Entry::Add { node, action, .. } => {
                let mut under = below.get(&node).cloned().unwrap_or_default();
                under.sort_unstable();
                for m in under {
                    if action.kind == Kind::FirstWrite && m != node {
                        continue;
                    }
                    let k = pid.len();
                    let p = *pid.entry(m).or_insert(k);
                    if action.kind == Kind::FirstWrite {
                        first.insert(action.value, p);
                    }
                    word.push(action);
                    who.push(Who::Proc(p));
                }
            }
        }
    }
    let trace = emit(&word, &who);
    let ok = replay(net, &trace, REPLAY_LIMITS).is_ok();
    (word, ok.then_some(trace))
}

/// Explores `D ∥ S^E ∥ ⧢_g S_g` for an FSM leader and FSM contributor.
pub(super) fn explore_product(net: &NetworkInstance, d: &Fsm, c_ext: &Fsm, opts: &VerifyOptions) -> Result<Verdict> {
    let ctx = Ctx::new(net, d, c_ext, opts)?;
    if !ctx.sims.iter().any(|s| ctx.domain[s.value] == HASH) {
        let mut v = Verdict::safe(true);
        v.stat("simulators", ctx.sims.len());
        return Ok(v);
    }
    let hash = ctx.index[&HASH];
    let mut start = ctx.start(d.init);
    ctx.close(&mut start, None);
    let key = |s: &St| (s.q, s.store, s.written.clone());
    let mut nodes: Vec<(St, usize, Option<Move>)> = vec![(start.clone(), 0, None)];
    let mut ids: HashMap<(u32, u16, Bits), Vec<usize>> = HashMap::from([(key(&start), vec![0])]);
    let mut dead = vec![false];
    let mut queue = VecDeque::from([0usize]);
    let mut moves = Vec::new();
    if start.written.get(hash) {
        return Ok(found(net, &ctx, d, &nodes, 0));
    }
    while let Some(id) = queue.pop_front() {
        if dead[id] {
            continue;
        }
        moves.clear();
        ctx.moves(&nodes[id].0, &mut moves);
        for &m in &moves {
            let t = ctx.apply(&nodes[id].0, m, None);
            let same = ids.entry(key(&t)).or_default();
            if same.iter().any(|&o| t.covered_by(&nodes[o].0)) {
                continue;
            }
            same.retain(|&o| {
                let gone = nodes[o].0.covered_by(&t);
                dead[o] |= gone;
                !gone
            });
            if nodes.len() >= opts.state_cap {
                return Err(Error::Resource { what: "product states", limit: opts.state_cap });
            }
            same.push(nodes.len());
            let hit = t.written.get(hash);
            nodes.push((t, id, Some(m)));
            dead.push(false);
            if hit {
                return Ok(found(net, &ctx, d, &nodes, nodes.len() - 1));
            }
            queue.push_back(nodes.len() - 1);
        }
    }
    let mut v = Verdict::safe(true);
    v.stat("product_states", nodes.len());
    v.stat("simulators", ctx.sims.len());
    Ok(v)
}

/// Replays the moves leading to `id`, recording who does what.
fn found(net: &NetworkInstance, ctx: &Ctx, d: &Fsm, nodes: &[(St, usize, Option<Move>)], id: usize) -> Verdict {
    let mut path = Vec::new();
    let mut cur = id;
    while let (_, p, Some(b)) = &nodes[cur] {
        path.push(*b);
        cur = *p;
    }
    path.reverse();
    let mut log = Log::default();
    let mut s = ctx.start(d.init);
    ctx.close(&mut s, Some(&mut log));
    for mv in path {
        s = ctx.apply(&s, mv, Some(&mut log));
    }
    let end = log.entries.iter().position(|e| matches!(e, Entry::Add { action, .. } if action.value == HASH && action.kind == Kind::FirstWrite));
    log.entries.truncate(end.map_or(log.entries.len(), |e| e + 1));
    let (word, trace) = trace_of(net, ctx, &log.entries);
    let tau: Vec<Value> = word.iter().filter(|b| b.kind == Kind::FirstWrite).map(|b| b.value).collect();
    let mut v = match trace {
        Some(trace) => Verdict::unsafe_with(Witness { tau, word, trace: Some(trace) }),
        None => unsafe_verdict(net, tau, word),
    };
    v.stat("product_states", nodes.len());
    v
}
