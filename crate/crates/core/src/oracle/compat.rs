use std::collections::{HashMap, VecDeque};
use std::hash::Hash;

use crate::action::{Action, Role};
use crate::store::{ExtState, TauState};
use crate::value::Value;

/// Is `u ∥ L(S^E) ∥ (v_1 ⧢ ... ⧢ v_k)` non-empty? When `tau` is given the
/// interleaving must also have `tau` as its first-write sequence. Returns an
/// interleaving on success.
pub fn check_compatibility(u: &[Action], m: &[Vec<Action>], tau: Option<&[Value]>) -> Option<Vec<Action>> {
    if u.iter().any(|a| a.role != Role::Leader) || m.iter().flatten().any(|a| a.role != Role::Contributor) {
        return None;
    }
    match tau {
        None => search(u, m, ExtState::default(), |s, a| s.step(a), |_| true),
        Some(t) => search(
            u,
            m,
            TauState { value: None, progress: 0, useless: false },
            |s, a| s.step(t, a, false),
            |s| s.progress == t.len(),
        ),
    }
}

fn search<S: Clone + Eq + Hash>(
    u: &[Action],
    m: &[Vec<Action>],
    init: S,
    step: impl Fn(&S, Action) -> Option<S>,
    done: impl Fn(&S) -> bool,
) -> Option<Vec<Action>> {
    // position 0 is u, the others are the words of m
    let words: Vec<&[Action]> = std::iter::once(u).chain(m.iter().map(Vec::as_slice)).collect();
    let start = (vec![0usize; words.len()], init);
    let mut parent: HashMap<(Vec<usize>, S), Option<((Vec<usize>, S), Action)>> = HashMap::from([(start.clone(), None)]);
    let mut queue = VecDeque::from([start]);
    while let Some(cur) = queue.pop_front() {
        let (pos, s) = &cur;
        if pos.iter().zip(&words).all(|(p, w)| *p == w.len()) && done(s) {
            let mut out = Vec::new();
            let mut at = cur.clone();
            while let Some(Some((prev, a))) = parent.get(&at) {
                out.push(*a);
                at = prev.clone();
            }
            out.reverse();
            return Some(out);
        }
        for (i, w) in words.iter().enumerate() {
            // equal words at equal positions are interchangeable
            if (1..i).any(|j| words[j] == *w && pos[j] == pos[i]) {
                continue;
            }
            let Some(&a) = w.get(pos[i]) else { continue };
            let Some(s2) = step(s, a) else { continue };
            let mut p2 = pos.clone();
            p2[i] += 1;
            let next = (p2, s2);
            if !parent.contains_key(&next) {
                parent.insert(next.clone(), Some((cur.clone(), a)));
                queue.push_back(next);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::ValueTable;

    #[test]
    fn examples() {
        let mut vt = ValueTable::new();
        let g1 = vt.intern("g1");
        let g2 = vt.intern("g2");
        let u = [Action::rd(g1)];
        let m = vec![vec![Action::fc(g1), Action::fc(g2)]];
        let w = check_compatibility(&u, &m, None).unwrap();
        assert_eq!(w, vec![Action::fc(g1), Action::rd(g1), Action::fc(g2)]);
        assert!(check_compatibility(&u, &m, Some(&[g1, g2])).is_some());
        assert!(check_compatibility(&u, &m, Some(&[g2, g1])).is_none());
        assert!(check_compatibility(&u, &[], None).is_none());
        assert!(check_compatibility(&[], &[vec![Action::rc(g1)]], None).is_none());
    }

    #[test]
    fn useless_write_blocks_read() {
        let mut vt = ValueTable::new();
        let g = vt.intern("g");
        let h = vt.intern("h");
        let u = [Action::wd(h), Action::rd(g)];
        let plain = vec![vec![Action::fc(g), Action::rc(h), Action::wc(g)]];
        assert!(check_compatibility(&u, &plain, None).is_some());
        let useless = vec![vec![Action::fc(g), Action::rc(h), Action::uc(g)]];
        assert!(check_compatibility(&u, &useless, None).is_none());
    }
}
