//! Network instances, verdicts and witnesses.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::Serialize;

use crate::action::{Action, Kind, Role};
use crate::error::{Error, Result};
use crate::machine::format::parse_machine;
use crate::machine::{Config, Limits, Machine, MachineKind};
use crate::value::{Value, ValueTable, HASH};

/// A leader and a contributor machine sharing one value table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkInstance {
    pub values: ValueTable,
    pub leader: Machine,
    pub contributor: Machine,
    /// The value set: every value used by a machine, plus `#`.
    pub domain: Vec<Value>,
    /// Names of interned values that no machine uses.
    pub pruned: Vec<String>,
}

impl NetworkInstance {
    pub fn new(values: ValueTable, leader: Machine, contributor: Machine) -> Result<Self> {
        for (m, who) in [(&leader, "leader"), (&contributor, "contributor")] {
            if m.ops().iter().any(|o| matches!(o.kind, Kind::FirstWrite | Kind::UselessWrite)) {
                return Err(Error::invalid(format!("{who} machine uses first/useless writes; only `r` and `w` are allowed")));
            }
        }
        let mut used: BTreeSet<Value> = leader.values();
        used.extend(contributor.values());
        used.insert(HASH);
        let pruned = values.values().filter(|v| !used.contains(v)).map(|v| values.name(v).to_string()).collect();
        Ok(NetworkInstance { values, leader, contributor, domain: used.into_iter().collect(), pruned })
    }

    /// Parses both machine files into one value table.
    pub fn from_sources(leader: &str, contributor: &str) -> Result<Self> {
        let mut vt = ValueTable::new();
        let d = parse_machine(leader, &mut vt).map_err(|e| e.context("leader"))?;
        let c = parse_machine(contributor, &mut vt).map_err(|e| e.context("contributor"))?;
        Self::new(vt, d, c)
    }

    pub fn kind_pair(&self) -> (MachineKind, MachineKind) {
        (self.leader.kind(), self.contributor.kind())
    }

    /// Without a contributor write of `#` every network is safe.
    pub fn hash_written(&self) -> bool {
        self.contributor.writes(HASH)
    }

    pub fn name(&self, v: Value) -> &str {
        self.values.name(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Safe,
    Unsafe,
}

/// One action of a concrete network trace; process 0 is the leader.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Step {
    pub process: usize,
    pub action: Action,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub tau: Vec<Value>,
    /// The word found by the procedure, over the extended alphabet.
    pub word: Vec<Action>,
    /// The same run with explicit processes, when one could be built.
    pub trace: Option<Vec<Step>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub status: Status,
    pub witness: Option<Witness>,
    /// False when a bound cut the search, so `Safe` only holds up to it.
    pub complete: bool,
    pub stats: BTreeMap<String, usize>,
}

impl Verdict {
    pub fn safe(complete: bool) -> Self {
        Verdict { status: Status::Safe, witness: None, complete, stats: BTreeMap::new() }
    }

    pub fn unsafe_with(w: Witness) -> Self {
        Verdict { status: Status::Unsafe, witness: Some(w), complete: true, stats: BTreeMap::new() }
    }

    pub fn is_unsafe(&self) -> bool {
        self.status == Status::Unsafe
    }

    pub fn stat(&mut self, key: &str, n: usize) {
        *self.stats.entry(key.to_string()).or_default() += n;
    }

    pub fn report(&self, net: &NetworkInstance, procedure: &str) -> serde_json::Value {
        let show = |a: &Action| a.show(&net.values);
        let w = self.witness.as_ref();
        serde_json::json!({
            "procedure": procedure,
            "status": self.status,
            "complete": self.complete,
            "tau": w.map(|w| w.tau.iter().map(|v| net.name(*v)).collect::<Vec<_>>()),
            "word": w.map(|w| w.word.iter().map(show).collect::<Vec<_>>()),
            "trace": w.and_then(|w| w.trace.as_ref()).map(|t| t
                .iter()
                .map(|s| serde_json::json!({ "process": s.process, "action": show(&s.action) }))
                .collect::<Vec<_>>()),
            "pruned_values": net.pruned,
            "stats": self.stats,
        })
    }
}

/// Limits generous enough to replay witnesses of desk-sized instances.
pub const REPLAY_LIMITS: Limits = Limits { stack_depth: 256, internal_steps: 100_000 };

const SEARCH_BUDGET: usize = 200_000;

#[derive(Clone, Copy, Debug)]
pub(crate) enum Who {
    Leader,
    Proc(usize),
    /// A fresh copy of the process that made the first write of the value.
    Copy(usize),
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Proc {
    config: Config,
    retired: bool,
}

/// Turns an extended word into a concrete trace ending in the first
/// contributor write of `#`.
///
/// Contributor reads, useless writes and first writes are assigned to
/// processes by search; every later `w_c(g)` is made by a new process that
/// copies the first writer of `g` step for step and then writes.
pub fn concretize(net: &NetworkInstance, word: &[Action], limits: Limits) -> Option<Vec<Step>> {
    let end = word
        .iter()
        .position(|a| a.role == Role::Contributor && a.kind != Kind::Read && a.value == HASH)?;
    let word = &word[..=end];
    let mut search = Search {
        net,
        word,
        limits,
        seen: HashSet::new(),
        budget: SEARCH_BUDGET,
        who: Vec::with_capacity(word.len()),
        writer: HashMap::new(),
    };
    let procs = Vec::new();
    if !search.go(0, procs) {
        return None;
    }
    Some(emit(word, &search.who))
}

struct Search<'a> {
    net: &'a NetworkInstance,
    word: &'a [Action],
    limits: Limits,
    seen: HashSet<(usize, Vec<Proc>)>,
    budget: usize,
    who: Vec<Who>,
    writer: HashMap<Value, usize>,
}

impl Search<'_> {
    fn go(&mut self, pos: usize, procs: Vec<Proc>) -> bool {
        if pos == self.word.len() {
            return true;
        }
        if self.budget == 0 {
            return false;
        }
        self.budget -= 1;
        let mut key = procs.clone();
        key.sort();
        if !self.seen.insert((pos, key)) {
            return false;
        }
        let a = self.word[pos];
        if a.role == Role::Leader {
            self.who.push(Who::Leader);
            if self.go(pos + 1, procs) {
                return true;
            }
            self.who.pop();
            return false;
        }
        if a.kind == Kind::Write {
            let Some(&i) = self.writer.get(&a.value) else { return false };
            self.who.push(Who::Copy(i));
            if self.go(pos + 1, procs) {
                return true;
            }
            self.who.pop();
            return false;
        }
        let op = a.erase().op();
        let mut tried: HashSet<Config> = HashSet::new();
        let fresh = Proc { config: self.net.contributor.initial(), retired: false };
        for i in 0..=procs.len() {
            let cur = if i < procs.len() { &procs[i] } else { &fresh };
            if cur.retired || !tried.insert(cur.config.clone()) {
                continue;
            }
            let moves = self.net.contributor.successors(&cur.config, self.limits).moves;
            let nexts: BTreeSet<Config> = moves.into_iter().filter(|(o, _)| *o == op).map(|(_, c)| c).collect();
            for n in nexts {
                let mut ps = procs.clone();
                let p = Proc { config: n, retired: a.kind == Kind::FirstWrite };
                if i < ps.len() {
                    ps[i] = p;
                } else {
                    ps.push(p);
                }
                if a.kind == Kind::FirstWrite {
                    self.writer.insert(a.value, i);
                }
                self.who.push(Who::Proc(i));
                if self.go(pos + 1, ps) {
                    return true;
                }
                self.who.pop();
                if a.kind == Kind::FirstWrite {
                    self.writer.remove(&a.value);
                }
            }
        }
        false
    }
}

pub(crate) fn emit(word: &[Action], who: &[Who]) -> Vec<Step> {
    let procs = who.iter().filter_map(|w| if let Who::Proc(i) = w { Some(*i + 1) } else { None }).max().unwrap_or(0);
    let mut copies: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut next_id = procs + 1;
    let mut copy_at = vec![0; word.len()];
    for (pos, w) in who.iter().enumerate() {
        if let Who::Copy(i) = w {
            copies.entry(*i).or_default().push(next_id);
            copy_at[pos] = next_id;
            next_id += 1;
        }
    }
    let mut out = Vec::new();
    for (pos, (&a, w)) in word.iter().zip(who).enumerate() {
        match *w {
            Who::Leader => out.push(Step { process: 0, action: a }),
            Who::Proc(i) => {
                out.push(Step { process: i + 1, action: a.erase() });
                if a.kind != Kind::FirstWrite {
                    for &c in copies.get(&i).map_or(&[][..], Vec::as_slice) {
                        out.push(Step { process: c, action: a.erase() });
                    }
                }
            }
            Who::Copy(_) => out.push(Step { process: copy_at[pos], action: a }),
        }
    }
    out
}

/// Checks a concrete trace against the plain network semantics: the store
/// accepts it, every process follows its machine, and it ends with a
/// contributor writing `#`.
pub fn replay(net: &NetworkInstance, trace: &[Step], limits: Limits) -> std::result::Result<(), String> {
    let last = trace.last().ok_or("empty trace")?;
    if last.process == 0 || last.action != Action::wc(HASH) {
        return Err("trace does not end with a contributor writing #".into());
    }
    let mut value: Option<Value> = None;
    let mut per: BTreeMap<usize, Vec<crate::action::Op>> = BTreeMap::new();
    for (i, s) in trace.iter().enumerate() {
        let role = if s.process == 0 { Role::Leader } else { Role::Contributor };
        if s.action.role != role || !matches!(s.action.kind, Kind::Read | Kind::Write) {
            return Err(format!("step {i}: action does not fit process {}", s.process));
        }
        match s.action.kind {
            Kind::Read if value != Some(s.action.value) => {
                return Err(format!("step {i}: read of a value the store does not hold"));
            }
            Kind::Write => value = Some(s.action.value),
            _ => {}
        }
        per.entry(s.process).or_default().push(s.action.op());
    }
    for (p, ops) in per {
        let m = if p == 0 { &net.leader } else { &net.contributor };
        match m.accepts_ops(&ops, limits) {
            Some(true) => {}
            Some(false) => return Err(format!("process {p} does not follow its machine")),
            None => return Err(format!("process {p}: replay limit hit")),
        }
    }
    Ok(())
}

/// The extended word must be a store trace that holds a contributor write
/// of `#` (as `f_c(#)` or `w_c(#)`).
pub fn check_word(word: &[Action]) -> bool {
    crate::store::extended_store_accepts(word)
        && word.iter().any(|a| a.role == Role::Contributor && a.kind != Kind::Read && a.value == HASH)
}

/// Builds the witness for `word`, attaching a concrete trace when one
/// replays.
pub fn witness(net: &NetworkInstance, tau: Vec<Value>, word: Vec<Action>) -> Witness {
    let trace = concretize(net, &word, REPLAY_LIMITS).filter(|t| replay(net, t, REPLAY_LIMITS).is_ok());
    Witness { tau, word, trace }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net(d: &str, c: &str) -> NetworkInstance {
        NetworkInstance::from_sources(d, c).unwrap()
    }

    #[test]
    fn domain_and_pruning() {
        let n = net("fsm\nstates a\ninit a\na w(g) a\n", "fsm\nstates c\ninit c\nc r(h) c\n");
        assert_eq!(n.domain.len(), 3);
        assert!(n.pruned.is_empty());
        assert!(!n.hash_written());
        let mut vt = ValueTable::new();
        vt.intern("unused");
        let m = crate::machine::format::parse_machine("fsm\nstates a\ninit a\n", &mut vt).unwrap();
        let n = NetworkInstance::new(vt, m.clone(), m).unwrap();
        assert_eq!(n.pruned, vec!["unused".to_string()]);
        assert_eq!(n.domain, vec![HASH]);
    }

    #[test]
    fn extended_labels_are_rejected() {
        let e = NetworkInstance::from_sources("fsm\nstates a\ninit a\na f(g) a\n", "fsm\nstates c\ninit c\n");
        assert!(e.is_err());
    }

    #[test]
    fn copycat_concretization() {
        // one contributor path r(g) w(x) w(#); the word uses x twice
        let n = net(
            "fsm\nstates a b c\ninit a\na w(g) b\nb w(g) b\nb r(x) c\n",
            "fsm\nstates c0 c1 c2 c3\ninit c0\nc0 r(g) c1\nc1 w(x) c2\nc0 r(x) c3\nc3 w(#) c3\n",
        );
        let g = n.values.get("g").unwrap();
        let x = n.values.get("x").unwrap();
        let word = vec![
            Action::wd(g),
            Action::rc(g),
            Action::fc(x),
            Action::rd(x),
            Action::rc(x),
            Action::fc(HASH),
        ];
        assert!(check_word(&word));
        let t = concretize(&n, &word, REPLAY_LIMITS).unwrap();
        replay(&n, &t, REPLAY_LIMITS).unwrap();
        let word2 = vec![
            Action::wd(g),
            Action::rc(g),
            Action::fc(x),
            Action::wd(g),
            Action::wc(x),
            Action::rc(x),
            Action::fc(HASH),
        ];
        let t = concretize(&n, &word2, REPLAY_LIMITS).unwrap();
        replay(&n, &t, REPLAY_LIMITS).unwrap();
        // the copy duplicates r(g) right after the original
        assert_eq!(t.iter().filter(|s| s.action == Action::rc(g)).count(), 2);
    }

    #[test]
    fn replay_rejects_bad_traces() {
        let n = net("fsm\nstates a\ninit a\n", "fsm\nstates c d\ninit c\nc w(#) d\n");
        let ok = [Step { process: 1, action: Action::wc(HASH) }];
        assert!(replay(&n, &ok, REPLAY_LIMITS).is_ok());
        let twice = [ok[0], ok[0]];
        assert!(replay(&n, &twice, REPLAY_LIMITS).is_err());
        let read = [Step { process: 1, action: Action::rc(HASH) }, ok[0]];
        assert!(replay(&n, &read, REPLAY_LIMITS).is_err());
    }
}
