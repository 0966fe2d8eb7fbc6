//! The shared register as an LTS, in its plain, extended and leader forms,
//! plus first-write bookkeeping.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::action::{alphabet_of, Action, Kind, Role};
use crate::error::{Error, Result};
use crate::lang::fsa::Fsa;
use crate::value::Value;

pub type Lts = Fsa<Action>;

const READ_WRITE: [Kind; 2] = [Kind::Read, Kind::Write];
const EXTENDED: [Kind; 4] = [Kind::Read, Kind::Write, Kind::FirstWrite, Kind::UselessWrite];

/// `G(r_d, w_d, r_c, w_c)`.
pub fn plain_alphabet(values: &[Value]) -> BTreeSet<Action> {
    let mut a = alphabet_of(Role::Leader, &READ_WRITE, values.iter().copied());
    a.extend(alphabet_of(Role::Contributor, &READ_WRITE, values.iter().copied()));
    a
}

/// `G(r_d, w_d, r_c, w_c, f_c, u_c)`.
pub fn extended_alphabet(values: &[Value]) -> BTreeSet<Action> {
    let mut a = alphabet_of(Role::Leader, &READ_WRITE, values.iter().copied());
    a.extend(contributor_alphabet(values));
    a
}

/// `G(r_c, w_c, f_c, u_c)`.
pub fn contributor_alphabet(values: &[Value]) -> BTreeSet<Action> {
    alphabet_of(Role::Contributor, &EXTENDED, values.iter().copied())
}

/// `G(r_d, w_d, f_c, w_c)`.
pub fn leader_store_alphabet(values: &[Value]) -> BTreeSet<Action> {
    let mut a = alphabet_of(Role::Leader, &READ_WRITE, values.iter().copied());
    a.extend(alphabet_of(Role::Contributor, &[Kind::Write, Kind::FirstWrite], values.iter().copied()));
    a
}

fn check_values(values: &[Value]) -> Result<()> {
    if values.is_empty() {
        Err(Error::invalid("the value set is empty"))
    } else {
        Ok(())
    }
}

/// The plain store. State 0 is the initial value `g0`; state `i + 1` holds
/// `values[i]`.
pub fn build_store(values: &[Value]) -> Result<Lts> {
    check_values(values)?;
    let mut s = Fsa::new(plain_alphabet(values));
    s.accepting[0] = true;
    for _ in values {
        s.add_state(true);
    }
    for (i, &g) in values.iter().enumerate() {
        for role in [Role::Leader, Role::Contributor] {
            s.add_edge(i + 1, Some(Action::new(role, Kind::Read, g)), i + 1);
            for from in 0..=values.len() {
                s.add_edge(from, Some(Action::new(role, Kind::Write, g)), i + 1);
            }
        }
    }
    Ok(s)
}

/// A state `(g, W, b)` of the extended store; `value` is `None` for `g0`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ExtState {
    pub value: Option<Value>,
    pub written: BTreeSet<Value>,
    pub useless: bool,
}

impl ExtState {
    pub fn step(&self, a: Action) -> Option<ExtState> {
        let g = a.value;
        let mut next = self.clone();
        match (a.role, a.kind) {
            (_, Kind::Read) => {
                if self.value != Some(g) || self.useless {
                    return None;
                }
                return Some(next);
            }
            (Role::Leader, Kind::Write) => {}
            (Role::Contributor, Kind::FirstWrite) => {
                if !next.written.insert(g) {
                    return None;
                }
            }
            (Role::Contributor, Kind::Write | Kind::UselessWrite) => {
                if !self.written.contains(&g) {
                    return None;
                }
            }
            _ => return None,
        }
        next.value = Some(g);
        next.useless = a.kind == Kind::UselessWrite;
        Some(next)
    }

    /// The leader-store step: no useless flag, no contributor reads.
    pub fn leader_step(&self, a: Action) -> Option<ExtState> {
        match (a.role, a.kind) {
            (Role::Contributor, Kind::Read | Kind::UselessWrite) => None,
            _ => self.step(a),
        }
    }
}

fn explore<S: Clone + Eq + std::hash::Hash>(
    alphabet: BTreeSet<Action>,
    init: S,
    step: impl Fn(&S, Action) -> Option<S>,
    accepting: impl Fn(&S) -> bool,
) -> (Lts, Vec<S>) {
    let letters: Vec<Action> = alphabet.iter().copied().collect();
    let mut fsa = Fsa::new(alphabet);
    fsa.accepting[0] = accepting(&init);
    let mut ids: HashMap<S, usize> = HashMap::from([(init.clone(), 0)]);
    let mut states = vec![init.clone()];
    let mut queue = VecDeque::from([init]);
    while let Some(s) = queue.pop_front() {
        let src = ids[&s];
        for &a in &letters {
            if let Some(t) = step(&s, a) {
                let dst = match ids.get(&t) {
                    Some(&d) => d,
                    None => {
                        let d = fsa.add_state(accepting(&t));
                        ids.insert(t.clone(), d);
                        states.push(t.clone());
                        queue.push_back(t);
                        d
                    }
                };
                fsa.edges[src].push((Some(a), dst));
            }
        }
    }
    (fsa, states)
}

/// The extended store, restricted to its reachable states.
pub fn build_extended_store(values: &[Value]) -> Result<Lts> {
    check_values(values)?;
    Ok(explore(extended_alphabet(values), ExtState::default(), |s, a| s.step(a), |_| true).0)
}

/// The leader store over `G(r_d, w_d, f_c, w_c)`.
pub fn build_leader_store(values: &[Value]) -> Result<Lts> {
    check_values(values)?;
    Ok(explore(leader_store_alphabet(values), ExtState::default(), |s, a| s.leader_step(a), |_| true).0)
}

/// Store state when the first-write order is fixed to `tau`: the write
/// record is the prefix `tau[..progress]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TauState {
    pub value: Option<Value>,
    pub progress: usize,
    pub useless: bool,
}

impl TauState {
    pub fn step(&self, tau: &[Value], a: Action, leader_only: bool) -> Option<TauState> {
        let g = a.value;
        let mut next = self.clone();
        match (a.role, a.kind) {
            (Role::Contributor, Kind::Read | Kind::UselessWrite) if leader_only => return None,
            (_, Kind::Read) => {
                return (self.value == Some(g) && !self.useless).then_some(next);
            }
            (Role::Leader, Kind::Write) => {}
            (Role::Contributor, Kind::FirstWrite) => {
                if tau.get(self.progress) != Some(&g) {
                    return None;
                }
                next.progress += 1;
            }
            (Role::Contributor, Kind::Write | Kind::UselessWrite) => {
                if !tau[..self.progress].contains(&g) {
                    return None;
                }
            }
            _ => return None,
        }
        next.value = Some(g);
        next.useless = a.kind == Kind::UselessWrite;
        Some(next)
    }
}

/// `L(S^E) ∩ P_tau`, with states (value, progress, useless flag).
pub fn tau_store(values: &[Value], tau: &[Value]) -> Lts {
    let init = TauState { value: None, progress: 0, useless: false };
    explore(extended_alphabet(values), init, |s, a| s.step(tau, a, false), |s| s.progress == tau.len()).0
}

/// `L(S^E_D) ∩ P_tau`.
pub fn tau_leader_store(values: &[Value], tau: &[Value]) -> Lts {
    let init = TauState { value: None, progress: 0, useless: false };
    explore(leader_store_alphabet(values), init, |s, a| s.step(tau, a, true), |s| s.progress == tau.len()).0
}

/// `(Σ \ G(f_c))* ⧢ tau` over `alphabet`.
pub fn p_tau_automaton(alphabet: BTreeSet<Action>, tau: &[Value]) -> Lts {
    let mut a = Fsa::new(alphabet.clone());
    for _ in tau {
        a.add_state(false);
    }
    a.accepting[tau.len()] = true;
    for i in 0..=tau.len() {
        for &l in &alphabet {
            if l.kind != Kind::FirstWrite {
                a.edges[i].push((Some(l), i));
            } else if i < tau.len() && l.value == tau[i] {
                a.edges[i].push((Some(l), i + 1));
            }
        }
    }
    a
}

/// All repetition-free sequences over `values`, shortest first; with
/// `require_hash`, only those ending in `#`.
pub fn enumerate_tau(values: &[Value], require_hash: bool) -> Vec<Vec<Value>> {
    fn go(values: &[Value], cur: &mut Vec<Value>, out: &mut Vec<Vec<Value>>) {
        out.push(cur.clone());
        for &v in values {
            if !cur.contains(&v) {
                cur.push(v);
                go(values, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(values, &mut Vec::new(), &mut out);
    if require_hash {
        out.retain(|t| t.last() == Some(&crate::value::HASH));
    }
    out.sort_by_key(|t| t.len());
    out
}

/// Tags contributor writes of a plain trace as first writes (first
/// contributor write of the value) or useless writes (the next store
/// action is a write). First writes take precedence.
pub fn classify_trace(t: &[Action]) -> Vec<Action> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(t.len());
    for (i, &a) in t.iter().enumerate() {
        if a.role != Role::Contributor || a.kind != Kind::Write {
            out.push(a);
            continue;
        }
        if seen.insert(a.value) {
            out.push(Action::fc(a.value));
        } else if t.get(i + 1).is_some_and(|n| n.kind.is_write()) {
            out.push(Action::uc(a.value));
        } else {
            out.push(a);
        }
    }
    out
}

pub fn erase_trace(t: &[Action]) -> Vec<Action> {
    t.iter().map(|a| a.erase()).collect()
}

/// Runs `t` through the extended store.
pub fn extended_store_accepts(t: &[Action]) -> bool {
    let mut s = ExtState::default();
    for &a in t {
        match s.step(a) {
            Some(n) => s = n,
            None => return false,
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::{ValueTable, HASH};

    fn table(names: &[&str]) -> (ValueTable, Vec<Value>) {
        let mut vt = ValueTable::new();
        let mut vs = vec![HASH];
        for n in names {
            vs.push(vt.intern(n));
        }
        (vt, vs)
    }

    #[test]
    fn no_read_initially() {
        let mut vt = ValueTable::new();
        let g1 = vt.intern("g1");
        let s = build_store(&[g1]).unwrap();
        let init_moves: BTreeSet<Action> = s.edges[0].iter().filter_map(|e| e.0).collect();
        assert_eq!(init_moves, BTreeSet::from([Action::wd(g1), Action::wc(g1)]));
        assert!(s.accepts(&[Action::wc(g1), Action::rd(g1), Action::rc(g1)]));
        assert!(build_store(&[]).is_err());
    }

    #[test]
    fn read_before_write_rejected() {
        let mut vt = ValueTable::new();
        let g1 = vt.intern("g1");
        let g2 = vt.intern("g2");
        let s = build_store(&[g1, g2]).unwrap();
        assert!(!s.accepts(&[Action::rd(g1)]));
    }

    #[test]
    fn extended_store_rules() {
        let (_, v) = table(&["g1", "g2"]);
        let (g1, g2) = (v[1], v[2]);
        let s = build_extended_store(&v).unwrap();
        assert!(!s.accepts(&[Action::fc(g1), Action::fc(g1)]));
        assert!(!s.accepts(&[Action::fc(g1), Action::uc(g1), Action::rd(g1)]));
        assert!(s.accepts(&[Action::fc(g1), Action::wc(g1), Action::rd(g1), Action::fc(g2), Action::wc(g2)]));
        // 3 values: 1 + 3 * 2^3 * 2 reachable (minus unreachable combinations)
        assert!(s.num_states() <= 1 + 3 * 8 * 2);
    }

    #[test]
    fn leader_store_rules() {
        let (_, v) = table(&["g"]);
        let g = v[1];
        let s = build_leader_store(&v).unwrap();
        assert!(!s.accepts(&[Action::wc(g)]));
        assert!(s.accepts(&[Action::fc(g), Action::rd(g), Action::wc(g)]));
        assert!(s.alphabet.iter().all(|a| !matches!((a.role, a.kind), (Role::Contributor, Kind::Read | Kind::UselessWrite))));
    }

    #[test]
    fn leader_store_is_projection() {
        let (_, v) = table(&["g1", "g2"]);
        let ext = build_extended_store(&v).unwrap();
        let lead = build_leader_store(&v).unwrap();
        let sigma_d = leader_store_alphabet(&v);
        let projected: BTreeSet<Vec<Action>> = ext
            .enumerate_words(6)
            .into_iter()
            .map(|w| w.into_iter().filter(|a| sigma_d.contains(a)).collect())
            .collect();
        let direct = lead.enumerate_words(6);
        // every projected word of length <= 6 is a leader-store word, and
        // every leader-store word is its own projection
        for w in &projected {
            assert!(lead.accepts(w), "{w:?}");
        }
        for w in &direct {
            assert!(ext.accepts(w), "{w:?}");
        }
    }

    #[test]
    fn tau_counts() {
        let (_, v) = table(&[]);
        assert_eq!(enumerate_tau(&v, true), vec![vec![HASH]]);
        let (_, v) = table(&["g"]);
        assert_eq!(enumerate_tau(&v, false).len(), 5);
        assert!(enumerate_tau(&v, true).iter().all(|t| t.last() == Some(&HASH)));
    }

    #[test]
    fn p_tau_behaviour() {
        let (_, v) = table(&["g"]);
        let g = v[1];
        let sigma = extended_alphabet(&v);
        let p = p_tau_automaton(sigma.clone(), &[]);
        assert!(p.accepts(&[Action::wd(g), Action::rc(g)]));
        assert!(!p.accepts(&[Action::fc(g)]));
        let p = p_tau_automaton(sigma, &[HASH]);
        assert!(p.accepts(&[Action::fc(HASH)]));
        assert!(!p.accepts(&[Action::fc(HASH), Action::fc(HASH)]));
        assert_eq!(p.num_states(), 2);
    }

    #[test]
    fn tau_store_matches_intersection() {
        let (_, v) = table(&["g"]);
        let g = v[1];
        let tau = [g, HASH];
        let direct = tau_store(&v, &tau);
        let ext = build_extended_store(&v).unwrap();
        let p = p_tau_automaton(extended_alphabet(&v), &tau);
        let inter = ext.product_sync(&p, 100_000).unwrap();
        assert_eq!(direct.enumerate_words(4), inter.enumerate_words(4));
    }

    #[test]
    fn classify_example() {
        let (_, v) = table(&["g1", "g2", "g3"]);
        let (g1, g2, g3) = (v[1], v[2], v[3]);
        let t = [Action::wd(g1), Action::wc(g2), Action::wc(g3), Action::rd(g3), Action::wc(g2), Action::wc(g1)];
        let c = classify_trace(&t);
        assert_eq!(c[1], Action::fc(g2));
        assert_eq!(c[4], Action::uc(g2));
        assert_eq!(c[5], Action::fc(g1));
        assert_eq!(erase_trace(&c), t.to_vec());
        assert!(extended_store_accepts(&c));
        assert_eq!(classify_trace(&[Action::wc(g1)]), vec![Action::fc(g1)]);
        assert_eq!(classify_trace(&[Action::wc(g1), Action::wc(g1)]), vec![Action::fc(g1), Action::wc(g1)]);
    }
}
