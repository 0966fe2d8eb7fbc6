//! Set abstraction of the contributor population.
//!
//! Any contributor move can be repeated by a fresh copy that shadows the
//! mover, so the reachable contributor configurations only ever accumulate.
//! A state is (leader, store value, set of contributor configurations), and a
//! state whose set is contained in an explored one with the same leader and
//! value adds nothing.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::hash::Hash;

use crate::action::{Kind, Op, Role};
use crate::error::{Error, Result};
use crate::machine::{Config, Machine, MachineKind};
use crate::network::{NetworkInstance, Step, Verdict};
use crate::value::{Value, HASH};

use super::{finish, ExploreOptions};

trait Moves {
    type D: Clone + Eq + Hash;
    type C: Clone + Ord + Hash;
    fn leader(&mut self, d: &Self::D) -> Vec<(Op, Self::D)>;
    fn contributor(&mut self, c: &Self::C) -> Vec<(Op, Self::C)>;
}

#[derive(Clone, Debug)]
enum Move<C> {
    Leader(Op),
    Contributor(C, Op, C),
}

struct Node<D, C> {
    d: D,
    value: Option<Value>,
    set: BTreeSet<C>,
    parent: Option<(usize, Vec<Move<C>>)>,
    dead: bool,
}

struct Outcome<C> {
    moves: Option<Vec<Move<C>>>,
    nodes: usize,
}

fn enabled(op: Op, value: Option<Value>) -> bool {
    op.kind != Kind::Read || value == Some(op.value)
}

/// Adds every contributor move that leaves the store value unchanged.
fn close<M: Moves>(m: &mut M, value: Option<Value>, set: &mut BTreeSet<M::C>, log: &mut Vec<Move<M::C>>) {
    loop {
        let mut added = Vec::new();
        for c in set.iter() {
            for (op, c2) in m.contributor(c) {
                if value == Some(op.value) && !set.contains(&c2) && !added.iter().any(|(_, _, x)| *x == c2) {
                    added.push((c.clone(), op, c2));
                }
            }
        }
        if added.is_empty() {
            return;
        }
        for (c, op, c2) in added {
            set.insert(c2.clone());
            log.push(Move::Contributor(c, op, c2));
        }
    }
}

fn hash_move<M: Moves>(m: &mut M, set: &BTreeSet<M::C>) -> Option<Move<M::C>> {
    for c in set {
        for (op, c2) in m.contributor(c) {
            if op.kind.is_write() && op.value == HASH {
                return Some(Move::Contributor(c.clone(), op, c2));
            }
        }
    }
    None
}

fn run<M: Moves>(m: &mut M, d0: M::D, c0: M::C, cap: usize) -> Result<Outcome<M::C>> {
    let mut nodes: Vec<Node<M::D, M::C>> = Vec::new();
    let mut index: HashMap<(M::D, Option<Value>), Vec<usize>> = HashMap::new();
    let mut queue = VecDeque::new();
    let mut pending = vec![(d0, None, BTreeSet::from([c0]), None::<(usize, Vec<Move<M::C>>)>)];
    loop {
        for (d, value, mut set, parent) in pending.drain(..) {
            let mut log = parent.as_ref().map(|p| p.1.clone()).unwrap_or_default();
            close(m, value, &mut set, &mut log);
            let key = (d.clone(), value);
            let bucket = index.entry(key).or_default();
            if bucket.iter().any(|&i| nodes[i].set.is_superset(&set)) {
                continue;
            }
            bucket.retain(|&i| {
                if set.is_superset(&nodes[i].set) {
                    nodes[i].dead = true;
                    false
                } else {
                    true
                }
            });
            if nodes.len() >= cap {
                return Err(Error::Resource { what: "abstract states", limit: cap });
            }
            let id = nodes.len();
            bucket.push(id);
            let parent = parent.map(|p| (p.0, log));
            let found = hash_move(m, &set);
            nodes.push(Node { d, value, set, parent, dead: false });
            if let Some(last) = found {
                let mut path = vec![last];
                let mut cur = id;
                while let Some((p, log)) = &nodes[cur].parent {
                    path.extend(log.iter().rev().cloned());
                    cur = *p;
                }
                path.reverse();
                return Ok(Outcome { moves: Some(path), nodes: nodes.len() });
            }
            queue.push_back(id);
        }
        let Some(id) = queue.pop_front() else { break };
        if nodes[id].dead {
            continue;
        }
        let (d, value, set) = (nodes[id].d.clone(), nodes[id].value, nodes[id].set.clone());
        for (op, d2) in m.leader(&d) {
            if enabled(op, value) {
                let v2 = if op.kind.is_write() { Some(op.value) } else { value };
                pending.push((d2, v2, set.clone(), Some((id, vec![Move::Leader(op)]))));
            }
        }
        for c in &set {
            for (op, c2) in m.contributor(c) {
                if op.kind.is_write() && Some(op.value) != value {
                    let mut s2 = set.clone();
                    s2.insert(c2.clone());
                    pending.push((d.clone(), Some(op.value), s2, Some((id, vec![Move::Contributor(c.clone(), op, c2)]))));
                }
            }
        }
    }
    Ok(Outcome { moves: None, nodes: nodes.len() })
}

/// Replaces the abstract run by a concrete one. Going backwards, each
/// contributor move is made by as many processes as are needed in its
/// target afterwards; going forwards, those processes are picked.
fn concretize<C: Clone + Ord + Hash>(moves: &[Move<C>], c0: &C) -> Vec<Step> {
    let mut demand: HashMap<C, usize> = HashMap::new();
    let mut batch = vec![0; moves.len()];
    for (i, mv) in moves.iter().enumerate().rev() {
        if let Move::Contributor(s, _, t) = mv {
            if s == t {
                batch[i] = 1;
                let e = demand.entry(s.clone()).or_default();
                *e = (*e).max(1);
            } else {
                let x = demand.remove(t).unwrap_or(0).max(1);
                batch[i] = x;
                *demand.entry(s.clone()).or_default() += x;
            }
        }
    }
    let n = demand.get(c0).copied().unwrap_or(0);
    debug_assert!(demand.iter().all(|(c, &k)| c == c0 || k == 0));
    let mut at: Vec<C> = vec![c0.clone(); n];
    let mut steps = Vec::new();
    for (i, mv) in moves.iter().enumerate() {
        match mv {
            Move::Leader(op) => steps.push(Step { process: 0, action: op.with_role(Role::Leader) }),
            Move::Contributor(s, op, t) => {
                let mut left = batch[i];
                for (j, c) in at.iter_mut().enumerate() {
                    if left == 0 {
                        break;
                    }
                    if c == s {
                        *c = t.clone();
                        left -= 1;
                        steps.push(Step { process: j + 1, action: op.with_role(Role::Contributor) });
                    }
                }
                debug_assert_eq!(left, 0);
            }
        }
    }
    steps
}

struct Plain<'a> {
    net: &'a NetworkInstance,
    opts: ExploreOptions,
    cache: HashMap<(bool, Config), Vec<(Op, Config)>>,
    bound_hit: bool,
}

impl Plain<'_> {
    fn moves(&mut self, leader: bool, c: &Config) -> Vec<(Op, Config)> {
        if let Some(m) = self.cache.get(&(leader, c.clone())) {
            return m.clone();
        }
        let m: &Machine = if leader { &self.net.leader } else { &self.net.contributor };
        let s = m.successors(c, self.opts.limits);
        self.bound_hit |= s.bound_hit;
        self.cache.insert((leader, c.clone()), s.moves.clone());
        s.moves
    }
}

impl Moves for Plain<'_> {
    type D = Config;
    type C = Config;
    fn leader(&mut self, d: &Config) -> Vec<(Op, Config)> {
        self.moves(true, d)
    }
    fn contributor(&mut self, c: &Config) -> Vec<(Op, Config)> {
        self.moves(false, c)
    }
}

/// Every process may make at most `k` register operations.
struct Counted<'a> {
    inner: Plain<'a>,
    k: usize,
}

impl Moves for Counted<'_> {
    type D = (Config, usize);
    type C = (Config, usize);
    fn leader(&mut self, d: &(Config, usize)) -> Vec<(Op, (Config, usize))> {
        if d.1 >= self.k {
            return Vec::new();
        }
        self.inner.moves(true, &d.0).into_iter().map(|(o, c)| (o, (c, d.1 + 1))).collect()
    }
    fn contributor(&mut self, c: &(Config, usize)) -> Vec<(Op, (Config, usize))> {
        if c.1 >= self.k {
            return Vec::new();
        }
        self.inner.moves(false, &c.0).into_iter().map(|(o, x)| (o, (x, c.1 + 1))).collect()
    }
}

/// Decides safety of an FSM leader with FSM contributors, for any number
/// of contributors.
pub fn saturate_fsm(net: &NetworkInstance, opts: ExploreOptions) -> Result<Verdict> {
    if net.kind_pair() != (MachineKind::Fsm, MachineKind::Fsm) {
        return Err(Error::invalid("saturation needs an FSM leader and FSM contributors"));
    }
    let mut p = Plain { net, opts, cache: HashMap::new(), bound_hit: false };
    let c0 = net.contributor.initial();
    let out = run(&mut p, net.leader.initial(), c0.clone(), opts.state_cap)?;
    let mut v = match out.moves {
        Some(moves) => finish(concretize(&moves, &c0)),
        None => Verdict::safe(true),
    };
    v.stat("abstract_states", out.nodes);
    Ok(v)
}

/// Safety when the leader and every contributor make at most `k` register
/// operations each, for any number of contributors.
pub fn bounded_safety_oracle(net: &NetworkInstance, k: usize, opts: ExploreOptions) -> Result<Verdict> {
    let mut m = Counted { inner: Plain { net, opts, cache: HashMap::new(), bound_hit: false }, k };
    let c0 = (net.contributor.initial(), 0);
    let out = run(&mut m, (net.leader.initial(), 0), c0.clone(), opts.state_cap)?;
    let mut v = match out.moves {
        Some(moves) => {
            let steps = concretize(&moves, &c0);
            finish(steps)
        }
        None => Verdict::safe(!m.inner.bound_hit),
    };
    v.stat("abstract_states", out.nodes);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{replay, REPLAY_LIMITS};
    use crate::oracle::explore_bounded;

    fn net(d: &str, c: &str) -> NetworkInstance {
        NetworkInstance::from_sources(d, c).unwrap()
    }

    fn check(n: &NetworkInstance, v: &Verdict) {
        if let Some(w) = &v.witness {
            replay(n, w.trace.as_ref().unwrap(), REPLAY_LIMITS).unwrap();
        }
    }

    #[test]
    fn basic_examples() {
        let o = ExploreOptions::default();
        let n = net("fsm\nstates a\ninit a\n", "fsm\nstates c0 c1\ninit c0\nc0 w(#) c1\n");
        assert!(saturate_fsm(&n, o).unwrap().is_unsafe());
        let n = net("fsm\nstates a\ninit a\na w(g) a\n", "fsm\nstates c0\ninit c0\nc0 r(g) c0\n");
        assert!(!saturate_fsm(&n, o).unwrap().is_unsafe());
        let n = net("fsm\nstates a b\ninit a\na w(g) b\n", "fsm\nstates c0 c1 c2\ninit c0\nc0 r(g) c1\nc1 w(#) c2\n");
        let v = saturate_fsm(&n, o).unwrap();
        assert!(v.is_unsafe());
        check(&n, &v);
    }

    #[test]
    fn two_contributor_states_at_once() {
        // one contributor must sit in `s` holding `x` while another
        // answers; the leader waits for both tokens
        let d = "fsm\nstates a b c d\ninit a\na w(go) b\nb r(x) c\nc r(y) d\nd w(fin) d\n";
        let c = "fsm\nstates c0 s t u v\ninit c0\nc0 r(go) s\ns w(x) t\nc0 r(x) u\nu w(y) u\nt r(fin) v\nv w(#) v\n";
        let n = net(d, c);
        let o = ExploreOptions::default();
        let v = saturate_fsm(&n, o).unwrap();
        assert!(v.is_unsafe());
        check(&n, &v);
        assert!(explore_bounded(&n, 2, 12, o).unwrap().is_unsafe());
        assert!(!explore_bounded(&n, 1, 12, o).unwrap().is_unsafe());
    }

    #[test]
    fn copies_are_concretized() {
        // the leader needs to see x twice with a change in between
        let d = "fsm\nstates a b c d e\ninit a\na w(g) b\nb r(x) c\nc w(g) d\nd r(x) e\ne w(done) e\n";
        let c = "fsm\nstates c0 c1 c2 c3 c4\ninit c0\nc0 r(g) c1\nc1 w(x) c2\nc0 r(done) c3\nc3 w(#) c4\n";
        let n = net(d, c);
        let v = saturate_fsm(&n, ExploreOptions::default()).unwrap();
        assert!(v.is_unsafe());
        let t = v.witness.as_ref().unwrap().trace.as_ref().unwrap();
        assert!(t.iter().map(|s| s.process).max().unwrap() >= 3);
        check(&n, &v);
    }

    #[test]
    fn bounded_zero_is_safe() {
        let n = net("fsm\nstates a\ninit a\n", "fsm\nstates c0 c1\ninit c0\nc0 w(#) c1\n");
        let o = ExploreOptions::default();
        assert!(!bounded_safety_oracle(&n, 0, o).unwrap().is_unsafe());
        assert!(bounded_safety_oracle(&n, 1, o).unwrap().is_unsafe());
    }

    #[test]
    fn relay_needs_three_steps() {
        // a contributor must read, write, and then write #
        let n = net(
            "fsm\nstates a b\ninit a\na w(g) b\n",
            "fsm\nstates c0 c1 c2 c3\ninit c0\nc0 r(g) c1\nc1 w(h) c2\nc2 w(#) c3\n",
        );
        let o = ExploreOptions::default();
        assert!(!bounded_safety_oracle(&n, 2, o).unwrap().is_unsafe());
        let v = bounded_safety_oracle(&n, 3, o).unwrap();
        assert!(v.is_unsafe());
        check(&n, &v);
    }
}
