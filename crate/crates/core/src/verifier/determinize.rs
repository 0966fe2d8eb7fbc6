//! Removing choice from finite-state networks without changing safety.
//!
//! A machine is deterministic when two transitions leaving a state with
//! different targets are reads of different values. [`determinize`] first
//! runs a subset construction (safety depends only on trace languages), then
//! turns every remaining write choice into a read of a fresh token followed
//! by the write. Contributors gain a token-writer cycle entered by reading
//! `nd`, which the leader writes once before anything else. Since the initial
//! register value cannot be read, that first write hides nothing.
//!
//! [`read_pair_gadget`] is the textbook construction for a pair of leader reads.
//! It is kept for comparison: the leader's delayed write-back of `g` can
//! revive `g` after a contributor overwrote it, so it is not sound in
//! general (see the tests).

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::action::{Kind, Op};
use crate::error::{Error, Result};
use crate::machine::{Fsm, Machine};
use crate::network::NetworkInstance;
use crate::value::Value;

struct Names(HashSet<String>);

impl Names {
    fn of(m: &Fsm) -> Self {
        Names(m.states.iter().cloned().collect())
    }

    fn fresh(&mut self, base: String) -> String {
        let mut name = base.clone();
        let mut i = 1;
        while !self.0.insert(name.clone()) {
            name = format!("{base}.{i}");
            i += 1;
        }
        name
    }
}

fn closure(m: &Fsm, set: &mut BTreeSet<usize>) {
    let mut stack: Vec<usize> = set.iter().copied().collect();
    while let Some(p) = stack.pop() {
        for &(a, l, b) in &m.trans {
            if a == p && l.is_none() && set.insert(b) {
                stack.push(b);
            }
        }
    }
}

/// Reachable subsets, no silent moves, one target per operation.
fn subsets(m: &Fsm) -> Fsm {
    let mut start = BTreeSet::from([m.init]);
    closure(m, &mut start);
    let mut ids: BTreeMap<BTreeSet<usize>, usize> = BTreeMap::from([(start.clone(), 0)]);
    let mut sets = vec![start];
    let mut trans = Vec::new();
    let mut i = 0;
    while i < sets.len() {
        let mut next: BTreeMap<Op, BTreeSet<usize>> = BTreeMap::new();
        for &(a, l, b) in &m.trans {
            if let (true, Some(op)) = (sets[i].contains(&a), l) {
                next.entry(op).or_default().insert(b);
            }
        }
        for (op, mut t) in next {
            closure(m, &mut t);
            let id = *ids.entry(t.clone()).or_insert_with(|| {
                sets.push(t);
                sets.len() - 1
            });
            trans.push((i, Some(op), id));
        }
        i += 1;
    }
    let mut names = Names(HashSet::new());
    let states = sets
        .iter()
        .map(|s| names.fresh(s.iter().map(|&q| m.states[q].as_str()).collect::<Vec<_>>().join("+")))
        .collect();
    Fsm { states, init: 0, trans }
}

/// States with a write whose transitions do not all share one target.
fn choice_states(m: &Fsm) -> BTreeSet<usize> {
    let mut targets: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    let mut writes = BTreeSet::new();
    for &(p, l, q) in &m.trans {
        targets.entry(p).or_default().insert(q);
        if l.is_some_and(|o| o.kind != Kind::Read) {
            writes.insert(p);
        }
    }
    writes.into_iter().filter(|p| targets[p].len() > 1).collect()
}

fn writes_at(m: &Fsm, p: usize) -> usize {
    m.trans.iter().filter(|t| t.0 == p && t.1.is_some_and(|o| o.kind != Kind::Read)).count()
}

/// The `j`-th write leaving a choice state becomes `r(tokens[j])` then the write.
fn gate_writes(m: &mut Fsm, choice: &BTreeSet<usize>, tokens: &[Value]) {
    let mut names = Names::of(m);
    let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
    let mut out = Vec::new();
    for &(p, l, q) in &m.trans.clone() {
        match l {
            Some(op) if op.kind != Kind::Read && choice.contains(&p) => {
                let j = seen.entry(p).or_insert(0);
                let mid = names.fresh(format!("{}~{}", m.states[p], *j + 1));
                m.states.push(mid);
                let x = m.states.len() - 1;
                out.push((p, Some(Op::read(tokens[*j])), x));
                out.push((x, Some(op), q));
                *j += 1;
            }
            _ => out.push((p, l, q)),
        }
    }
    m.trans = out;
}

fn fsm_pair(net: &NetworkInstance) -> Result<(&Fsm, &Fsm)> {
    match (&net.leader, &net.contributor) {
        (Machine::Fsm(d), Machine::Fsm(c)) => Ok((d, c)),
        _ => Err(Error::invalid("determinization needs two finite-state machines")),
    }
}

/// A deterministic pair with the same safety verdict. Already deterministic
/// pairs are returned unchanged.
pub fn determinize(net: &NetworkInstance) -> Result<NetworkInstance> {
    let (d, c) = fsm_pair(net)?;
    if is_deterministic_pair(net) {
        return Ok(net.clone());
    }
    let mut d = subsets(d);
    let mut c = subsets(c);
    let dc = choice_states(&d);
    // the contributor's entry state also gets the writer branch, so its
    // writes are always gated
    let mut cc = choice_states(&c);
    if writes_at(&c, c.init) > 0 {
        cc.insert(c.init);
    }
    let m = dc.iter().map(|&p| writes_at(&d, p)).chain(cc.iter().map(|&p| writes_at(&c, p))).max().unwrap_or(0);
    let mut vt = net.values.clone();
    if m == 0 {
        return NetworkInstance::new(vt, Machine::Fsm(d), Machine::Fsm(c));
    }
    let nd = vt.fresh("nd");
    let tokens: Vec<Value> = (1..=m).map(|j| vt.fresh(&format!("tok{j}"))).collect();

    gate_writes(&mut d, &dc, &tokens);
    let mut names = Names::of(&d);
    d.states.push(names.fresh("start".into()));
    let s = d.states.len() - 1;
    d.trans.push((s, Some(Op::write(nd)), d.init));
    d.init = s;

    let mut names = Names::of(&c);
    let first = c.states.len();
    for j in 0..m {
        c.states.push(names.fresh(format!("writer{}", j + 1)));
    }
    for j in 0..m {
        c.trans.push((first + j, Some(Op::write(tokens[j])), first + (j + 1) % m));
    }
    c.states.push(names.fresh("start".into()));
    let s = c.states.len() - 1;
    let copied: Vec<_> = c.trans.iter().filter(|t| t.0 == c.init).map(|&(_, l, q)| (s, l, q)).collect();
    c.trans.extend(copied);
    c.trans.push((s, Some(Op::read(nd)), first));
    if cc.remove(&c.init) {
        cc.insert(s);
        if choice_states(&c).contains(&c.init) {
            cc.insert(c.init);
        }
    }
    c.init = s;
    gate_writes(&mut c, &cc, &tokens);
    NetworkInstance::new(vt, Machine::Fsm(d), Machine::Fsm(c))
}

/// Replaces each leader pair `(q, r(g), q')`, `(q, r(g), q'')` by
/// `q -r(g)-> q1 -w(nd)-> q2`, `q2 -r(0)-> q3 -w(g)-> q'`,
/// `q2 -r(1)-> q4 -w(g)-> q''`, and gives the contributor the loop
/// `c0 -r(nd)-> c^ -w(0)-> c~ -w(1)-> c0`. Other choice is left alone.
pub fn read_pair_gadget(net: &NetworkInstance) -> Result<NetworkInstance> {
    let (d, c) = fsm_pair(net)?;
    let (mut d, mut c) = (d.clone(), c.clone());
    let mut vt = net.values.clone();
    let mut fresh: Option<[Value; 3]> = None;
    let mut names = Names::of(&d);
    while let Some((i, j)) = read_pair(&d) {
        let [nd, zero, one] = *fresh.get_or_insert_with(|| [vt.fresh("nd"), vt.fresh("0"), vt.fresh("1")]);
        let (q, op, q1) = d.trans[i];
        let q2 = d.trans[j].2;
        let g = op.expect("read").value;
        let base = d.states.len();
        for k in 1..=4 {
            d.states.push(names.fresh(format!("{}^{k}", d.states[q])));
        }
        let [n1, n2, n3, n4] = [base, base + 1, base + 2, base + 3];
        d.trans.remove(j);
        d.trans.remove(i);
        d.trans.extend([
            (q, Some(Op::read(g)), n1),
            (n1, Some(Op::write(nd)), n2),
            (n2, Some(Op::read(zero)), n3),
            (n3, Some(Op::write(g)), q1),
            (n2, Some(Op::read(one)), n4),
            (n4, Some(Op::write(g)), q2),
        ]);
    }
    if let Some([nd, zero, one]) = fresh {
        let mut names = Names::of(&c);
        let hat = c.states.len();
        c.states.push(names.fresh(format!("{}^", c.states[c.init])));
        c.states.push(names.fresh(format!("{}~", c.states[c.init])));
        c.trans.extend([
            (c.init, Some(Op::read(nd)), hat),
            (hat, Some(Op::write(zero)), hat + 1),
            (hat + 1, Some(Op::write(one)), c.init),
        ]);
    }
    NetworkInstance::new(vt, Machine::Fsm(d), Machine::Fsm(c))
}

fn read_pair(d: &Fsm) -> Option<(usize, usize)> {
    for (i, &(p, l, q)) in d.trans.iter().enumerate() {
        let Some(op) = l.filter(|o| o.kind == Kind::Read) else { continue };
        if let Some(j) = d.trans.iter().enumerate().skip(i + 1).position(|(_, t)| t.0 == p && t.1 == Some(op) && t.2 != q) {
            return Some((i, i + 1 + j));
        }
    }
    None
}

/// Both machines satisfy the determinism condition. For pushdown machines
/// it is checked per state and top symbol; tape machines never qualify.
pub fn is_deterministic_pair(net: &NetworkInstance) -> bool {
    fn det(m: &Machine) -> bool {
        match m {
            Machine::Fsm(f) => f.is_deterministic(),
            Machine::Pdm(p) => {
                let rules: Vec<_> = p.rules.iter().collect();
                rules.iter().enumerate().all(|(i, a)| {
                    rules[i + 1..].iter().all(|b| {
                        a.from != b.from
                            || a.top != b.top
                            || (a.to == b.to && a.push == b.push)
                            || matches!((a.label, b.label), (Some(x), Some(y))
                                if x.kind == Kind::Read && y.kind == Kind::Read && x.value != y.value)
                    })
                })
            }
            Machine::Tm(_) => false,
        }
    }
    det(&net.leader) && det(&net.contributor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_random_network, Sizes};
    use crate::machine::MachineKind;
    use crate::verifier::{verify_fsm_fsm, VerifyOptions};

    fn net(d: &str, c: &str) -> NetworkInstance {
        NetworkInstance::from_sources(d, c).unwrap()
    }

    fn unsafe_(n: &NetworkInstance) -> bool {
        verify_fsm_fsm(n, &VerifyOptions::default()).unwrap().is_unsafe()
    }

    #[test]
    fn deterministic_input_is_kept() {
        let n = net("fsm\nstates a b\ninit a\na w(x) b\n", "fsm\nstates c d\ninit c\nc r(x) d\nd w(#) c\n");
        assert!(is_deterministic_pair(&n));
        assert_eq!(determinize(&n).unwrap(), n);
    }

    #[test]
    fn write_choice_is_gated() {
        let d = "fsm\nstates a b c\ninit a\na w(x) b\na w(y) c\na r(z) c\n";
        let c = "fsm\nstates c0 c1 c2\ninit c0\nc0 r(x) c1\nc1 w(z) c2\nc0 r(y) c2\nc2 w(#) c0\nc0 eps c2\n";
        let n = net(d, c);
        assert!(!is_deterministic_pair(&n));
        let m = determinize(&n).unwrap();
        assert!(is_deterministic_pair(&m), "{:?}", m);
        assert_eq!(unsafe_(&n), unsafe_(&m));
    }

    #[test]
    fn random_pairs_keep_their_verdict() {
        let s = Sizes { states: 3, values: 2, transitions: 6, ..Sizes::default() };
        for seed in 0..40 {
            let n = gen_random_network(seed, (MachineKind::Fsm, MachineKind::Fsm), &s, &s).unwrap();
            let m = determinize(&n).unwrap();
            assert!(is_deterministic_pair(&m), "seed {seed}");
            assert_eq!(unsafe_(&n), unsafe_(&m), "seed {seed}");
        }
    }

    // the leader writes g once; a contributor needs to read g, then h, then g
    const REVIVE_D: &str = "fsm\nstates l0 l1 l2 l3\ninit l0\nl0 w(g) l1\nl1 r(g) l2\nl1 r(g) l3\n";
    const REVIVE_C: &str = "fsm\nstates c0 c1 c2 c3 c4 c5 c6\ninit c0\nc0 r(g) c1\nc1 r(h) c2\nc2 r(g) c3\nc3 w(#) c4\nc0 r(g) c5\nc5 w(h) c6\n";

    #[test]
    fn gadget_sizes() {
        let n = net(REVIVE_D, REVIVE_C);
        let m = read_pair_gadget(&n).unwrap();
        assert_eq!(m.leader.num_states(), n.leader.num_states() + 4);
        assert_eq!(m.contributor.num_states(), n.contributor.num_states() + 2);
        assert_eq!(m.values.len(), n.values.len() + 3);
        let Machine::Fsm(d) = &m.leader else { unreachable!() };
        assert!(d.is_deterministic());
    }

    #[test]
    fn gadget_write_back_revives_a_value() {
        let n = net(REVIVE_D, REVIVE_C);
        assert!(!unsafe_(&n));
        assert!(unsafe_(&read_pair_gadget(&n).unwrap()));
        let m = determinize(&n).unwrap();
        assert!(is_deterministic_pair(&m));
        assert!(!unsafe_(&m));
    }
}
