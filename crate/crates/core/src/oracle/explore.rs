use std::collections::{HashMap, VecDeque};

use crate::action::{Kind, Op, Role};
use crate::error::{Error, Result};
use crate::machine::Config;
use crate::network::{NetworkInstance, Step, Verdict};
use crate::value::{Value, HASH};

use super::{finish, ExploreOptions};

#[derive(Clone, PartialEq, Eq, Hash)]
struct State {
    leader: Config,
    value: Option<Value>,
    /// Sorted, so equal populations coincide.
    contributors: Vec<Config>,
}

struct Edge {
    parent: usize,
    role: Role,
    op: Op,
    from: Config,
    to: Config,
}

/// Breadth-first search of the network with `k` contributors, up to `depth`
/// register operations in total.
pub fn explore_bounded(net: &NetworkInstance, k: usize, depth: usize, opts: ExploreOptions) -> Result<Verdict> {
    if k == 0 || depth == 0 {
        return Err(Error::invalid("explore_bounded needs k >= 1 and depth >= 1"));
    }
    let c0 = net.contributor.initial();
    let start = State { leader: net.leader.initial(), value: None, contributors: vec![c0.clone(); k] };
    let mut nodes: Vec<(State, usize, Option<Edge>)> = vec![(start.clone(), 0, None)];
    let mut ids: HashMap<State, usize> = HashMap::from([(start, 0)]);
    let mut queue = VecDeque::from([0usize]);
    let mut complete = true;
    let mut cache: HashMap<(bool, Config), Vec<(Op, Config)>> = HashMap::new();
    let mut succ = |leader: bool, c: &Config, complete: &mut bool| -> Vec<(Op, Config)> {
        cache
            .entry((leader, c.clone()))
            .or_insert_with(|| {
                let m = if leader { &net.leader } else { &net.contributor };
                let s = m.successors(c, opts.limits);
                if s.bound_hit {
                    *complete = false;
                }
                s.moves
            })
            .clone()
    };
    while let Some(id) = queue.pop_front() {
        let (state, d, _) = &nodes[id];
        let (state, d) = (state.clone(), *d);
        let mut next: Vec<(State, Edge)> = Vec::new();
        for (op, to) in succ(true, &state.leader, &mut complete) {
            if op.kind == Kind::Read && state.value != Some(op.value) {
                continue;
            }
            let mut s = state.clone();
            s.leader = to.clone();
            if op.kind.is_write() {
                s.value = Some(op.value);
            }
            next.push((s, Edge { parent: id, role: Role::Leader, op, from: state.leader.clone(), to }));
        }
        for (i, c) in state.contributors.iter().enumerate() {
            if i > 0 && state.contributors[i - 1] == *c {
                continue;
            }
            for (op, to) in succ(false, c, &mut complete) {
                if op.kind == Kind::Read && state.value != Some(op.value) {
                    continue;
                }
                let edge = Edge { parent: id, role: Role::Contributor, op, from: c.clone(), to: to.clone() };
                if op.kind.is_write() && op.value == HASH && d < depth {
                    return Ok(unsafe_verdict(net, k, &nodes, edge));
                }
                let mut s = state.clone();
                s.contributors[i] = to;
                s.contributors.sort();
                if op.kind.is_write() {
                    s.value = Some(op.value);
                }
                next.push((s, edge));
            }
        }
        if d >= depth {
            complete &= next.is_empty();
            continue;
        }
        for (s, e) in next {
            if ids.contains_key(&s) {
                continue;
            }
            if nodes.len() >= opts.state_cap {
                return Err(Error::Resource { what: "explored states", limit: opts.state_cap });
            }
            ids.insert(s.clone(), nodes.len());
            queue.push_back(nodes.len());
            nodes.push((s, d + 1, Some(e)));
        }
    }
    let mut v = Verdict::safe(complete);
    v.stat("states", nodes.len());
    Ok(v)
}

fn unsafe_verdict(net: &NetworkInstance, k: usize, nodes: &[(State, usize, Option<Edge>)], last: Edge) -> Verdict {
    let mut edges = vec![&last];
    let mut cur = last.parent;
    while let Some(e) = &nodes[cur].2 {
        edges.push(e);
        cur = e.parent;
    }
    edges.reverse();
    let mut pop = vec![net.contributor.initial(); k];
    let mut steps = Vec::new();
    for e in edges {
        let process = match e.role {
            Role::Leader => 0,
            Role::Contributor => {
                let j = pop.iter().position(|c| *c == e.from).expect("moved contributor exists");
                pop[j] = e.to.clone();
                j + 1
            }
        };
        steps.push(Step { process, action: e.op.with_role(e.role) });
    }
    let mut v = finish(steps);
    v.stat("states", nodes.len());
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::Limits;
    use crate::network::{replay, REPLAY_LIMITS};

    fn net(d: &str, c: &str) -> NetworkInstance {
        NetworkInstance::from_sources(d, c).unwrap()
    }

    const IDLE: &str = "fsm\nstates a\ninit a\n";

    #[test]
    fn direct_hash_writer() {
        let n = net(IDLE, "fsm\nstates c0 c1\ninit c0\nc0 w(#) c1\n");
        let v = explore_bounded(&n, 1, 1, ExploreOptions::default()).unwrap();
        assert!(v.is_unsafe());
    }

    #[test]
    fn reader_is_safe() {
        let n = net("fsm\nstates a\ninit a\na w(g) a\n", "fsm\nstates c0\ninit c0\nc0 r(g) c0\n");
        let v = explore_bounded(&n, 2, 6, ExploreOptions::default()).unwrap();
        assert!(!v.is_unsafe());
    }

    #[test]
    fn leader_enables_writer() {
        let n = net("fsm\nstates a b\ninit a\na w(g) b\n", "fsm\nstates c0 c1 c2\ninit c0\nc0 r(g) c1\nc1 w(#) c2\n");
        let v = explore_bounded(&n, 1, 3, ExploreOptions::default()).unwrap();
        let w = v.witness.unwrap();
        let g = n.values.get("g").unwrap();
        let t = w.trace.unwrap();
        let acts: Vec<_> = t.iter().map(|s| s.action).collect();
        assert_eq!(acts, vec![crate::action::Action::wd(g), crate::action::Action::rc(g), crate::action::Action::wc(HASH)]);
        replay(&n, &t, REPLAY_LIMITS).unwrap();
        assert!(!explore_bounded(&n, 1, 2, ExploreOptions::default()).unwrap().is_unsafe());
    }

    #[test]
    fn depth_cut_is_reported() {
        let n = net("fsm\nstates a\ninit a\na w(g) a\n", "fsm\nstates c0\ninit c0\nc0 r(g) c0\n");
        let v = explore_bounded(&n, 1, 1, ExploreOptions::default()).unwrap();
        assert!(!v.complete);
    }

    #[test]
    fn limits_on_stack_are_flagged() {
        let n = net(IDLE, "pdm\nstates p\ninit p Z\np Z eps p A,Z\np A eps p A,A\n");
        let opts = ExploreOptions { limits: Limits { stack_depth: 4, internal_steps: 100 }, ..Default::default() };
        let v = explore_bounded(&n, 1, 2, opts).unwrap();
        assert!(!v.is_unsafe() && !v.complete);
    }
}
