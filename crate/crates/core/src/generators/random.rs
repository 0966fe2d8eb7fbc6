//! Seeded random machines for differential testing.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::action::Op;
use crate::error::{Error, Result};
use crate::machine::{Fsm, Machine, MachineKind, Pdm, PdmRule};
use crate::network::NetworkInstance;
use crate::value::{Value, ValueTable, HASH};

/// Shape of a random machine.
///
/// Values are `Value(1)..=Value(values)`, each used by some transition.
/// With `hash_write`, one extra transition writes `#`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sizes {
    pub states: usize,
    pub values: usize,
    pub transitions: usize,
    /// Ignored for finite-state machines.
    pub stack_symbols: usize,
    pub hash_write: bool,
    /// Chance that a transition beyond the required ones is silent.
    pub silent: f64,
    /// Chance that a labelled transition reads rather than writes.
    pub reads: f64,
}

impl Default for Sizes {
    fn default() -> Self {
        Sizes { states: 4, values: 3, transitions: 8, stack_symbols: 2, hash_write: false, silent: 0.1, reads: 0.5 }
    }
}

impl Sizes {
    fn check(&self) -> Result<()> {
        let need = self.states.saturating_sub(1).max(self.values + usize::from(self.hash_write));
        if self.states == 0 || self.transitions < need {
            return Err(Error::invalid(format!(
                "{} transitions cannot connect {} states and use {} values",
                self.transitions, self.states, self.values
            )));
        }
        Ok(())
    }
}

/// `(from, label, to)` triples: a spanning chain so every state has an
/// incoming edge from a lower state, required labels placed first.
fn skeleton(rng: &mut ChaCha8Rng, s: &Sizes) -> Vec<(usize, Option<Op>, usize)> {
    let mut labels: Vec<Option<Op>> = (1..=s.values)
        .map(|v| {
            let v = Value(v as u16);
            Some(if rng.gen_bool(s.reads) { Op::read(v) } else { Op::write(v) })
        })
        .collect();
    if s.hash_write {
        labels.push(Some(Op::write(HASH)));
    }
    while labels.len() < s.transitions {
        let l = if s.values == 0 || rng.gen_bool(s.silent) {
            None
        } else {
            let v = Value(rng.gen_range(1..=s.values) as u16);
            Some(if rng.gen_bool(s.reads) { Op::read(v) } else { Op::write(v) })
        };
        labels.push(l);
    }
    labels.shuffle(rng);
    labels
        .into_iter()
        .enumerate()
        .map(|(i, l)| {
            if i + 1 < s.states {
                (rng.gen_range(0..=i), l, i + 1)
            } else {
                (rng.gen_range(0..s.states), l, rng.gen_range(0..s.states))
            }
        })
        .collect()
}

pub fn gen_random_fsm(seed: u64, sizes: &Sizes) -> Result<Fsm> {
    sizes.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = Fsm::new((0..sizes.states).map(|i| format!("s{i}")).collect(), 0);
    m.trans = skeleton(&mut rng, sizes);
    Ok(m)
}

pub fn gen_random_pdm(seed: u64, sizes: &Sizes) -> Result<Pdm> {
    sizes.check()?;
    if sizes.stack_symbols == 0 {
        return Err(Error::invalid("a pushdown machine needs a stack symbol"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = sizes.stack_symbols;
    let rules = skeleton(&mut rng, sizes)
        .into_iter()
        .map(|(from, label, to)| {
            let top = rng.gen_range(0..k);
            let push = match rng.gen_range(0..4) {
                0 => Vec::new(),
                1 => vec![top],
                2 => vec![rng.gen_range(0..k), top],
                _ => vec![rng.gen_range(0..k)],
            };
            PdmRule { from, top, label, to, push }
        })
        .collect();
    Ok(Pdm {
        states: (0..sizes.states).map(|i| format!("s{i}")).collect(),
        stack: (0..k).map(|i| if i == 0 { "Z".into() } else { format!("A{i}") }).collect(),
        init: 0,
        bottom: 0,
        rules,
    })
}

/// A leader and a `#`-writing contributor over values `v1..vN`, where `N`
/// is the larger of the two value counts.
pub fn gen_random_network(
    seed: u64,
    kinds: (MachineKind, MachineKind),
    leader: &Sizes,
    contributor: &Sizes,
) -> Result<NetworkInstance> {
    let mut vt = ValueTable::new();
    for i in 1..=leader.values.max(contributor.values) {
        vt.intern(&format!("v{i}"));
    }
    let contributor = Sizes { hash_write: true, ..*contributor };
    let make = |seed: u64, kind: MachineKind, s: &Sizes| -> Result<Machine> {
        match kind {
            MachineKind::Fsm => gen_random_fsm(seed, s).map(Machine::Fsm),
            MachineKind::Pdm => gen_random_pdm(seed, s).map(Machine::Pdm),
            MachineKind::Tm => Err(Error::invalid("no random tape machines")),
        }
    };
    let d = make(seed.wrapping_mul(2), kinds.0, leader)?;
    let c = make(seed.wrapping_mul(2).wrapping_add(1), kinds.1, &contributor)?;
    NetworkInstance::new(vt, d, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn seeded_and_sized() {
        let s = Sizes { states: 6, values: 4, transitions: 11, stack_symbols: 3, hash_write: true, silent: 0.2, reads: 0.5 };
        for seed in 0..30 {
            let a = gen_random_fsm(seed, &s).unwrap();
            assert_eq!(a, gen_random_fsm(seed, &s).unwrap());
            assert_eq!((a.states.len(), a.trans.len()), (6, 11));
            let used: BTreeSet<Value> = a.trans.iter().filter_map(|t| t.1.map(|o| o.value)).collect();
            assert_eq!(used, (0..=4).map(Value).collect());
            assert!(a.trans.iter().any(|t| t.1 == Some(Op::write(HASH))));
            let p = gen_random_pdm(seed, &s).unwrap();
            assert_eq!(p, gen_random_pdm(seed, &s).unwrap());
            assert_eq!((p.states.len(), p.rules.len(), p.stack.len()), (6, 11, 3));
        }
    }

    #[test]
    fn too_few_transitions() {
        let s = Sizes { states: 5, values: 2, transitions: 3, ..Sizes::default() };
        assert!(gen_random_fsm(1, &s).is_err());
    }

    #[test]
    fn network_uses_all_values() {
        let s = Sizes::default();
        let n = gen_random_network(3, (MachineKind::Fsm, MachineKind::Pdm), &s, &s).unwrap();
        assert!(n.hash_written());
        assert_eq!(n.domain.len(), 4);
        assert!(n.pruned.is_empty());
    }
}
