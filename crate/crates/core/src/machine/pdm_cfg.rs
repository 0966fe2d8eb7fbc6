//! Grammars for pushdown trace languages.
//!
//! Traces end anywhere, while the triple construction describes runs that
//! empty the stack. A fresh halt state `h` bridges the two: from every
//! final state the machine may move silently to `h`, and `h` pops anything.
//! A pop into a final state may also stand for a move to `h`, which covers
//! traces that end with an empty stack.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::action::Op;
use crate::lang::cfg::{Cfg, Sym};
use crate::lang::fsa::Letter;
use crate::machine::{Pdm, PdmRule};

/// Splits rules pushing more than two symbols into chains of silent rules.
fn binarize(p: &Pdm) -> (usize, Vec<PdmRule>) {
    let mut n = p.states.len();
    let mut out = Vec::new();
    for r in &p.rules {
        if r.push.len() <= 2 {
            out.push(r.clone());
            continue;
        }
        // Rewrite A into B1..Bm by growing from the bottom of the pushed word.
        let m = r.push.len();
        let mut from = r.from;
        let mut top = r.top;
        let mut label = r.label;
        for j in (1..m).rev() {
            let to = if j == 1 { r.to } else { n };
            if j != 1 {
                n += 1;
            }
            let push = vec![r.push[j - 1], r.push[j]];
            out.push(PdmRule { from, top, label, to, push });
            from = to;
            top = r.push[j - 1];
            label = None;
        }
    }
    (n, out)
}

/// A grammar for the words labelling runs from the initial configuration
/// that end in a state marked in `finals` (every state when `None`).
pub fn pdm_to_cfg<L: Letter>(
    p: &Pdm,
    finals: Option<&[bool]>,
    alphabet: BTreeSet<L>,
    label: impl Fn(Op) -> L,
) -> Cfg<L> {
    let (n, rules) = binarize(p);
    let h = n;
    let is_final = |q: usize| q < p.states.len() && finals.is_none_or(|f| f[q]);
    let mut by_key: HashMap<(usize, usize), Vec<&PdmRule>> = HashMap::new();
    for r in &rules {
        by_key.entry((r.from, r.top)).or_default().push(r);
    }
    let state_name = |q: usize| {
        if q == h {
            "h".to_string()
        } else if q < p.states.len() {
            p.states[q].clone()
        } else {
            format!("t{q}")
        }
    };
    let root = (p.init, p.bottom, h);
    let name = |t: (usize, usize, usize)| format!("[{},{},{}]", state_name(t.0), p.stack[t.1], state_name(t.2));
    let mut g = Cfg::new(alphabet, &name(root));
    let mut ids: HashMap<(usize, usize, usize), usize> = HashMap::from([(root, 0)]);
    let mut queue = VecDeque::from([root]);
    while let Some(t) = queue.pop_front() {
        let (q, a, q2) = t;
        let lhs = ids[&t];
        let mut prods: Vec<(Option<Op>, Vec<(usize, usize, usize)>)> = Vec::new();
        if q2 == h && (q == h || is_final(q)) {
            prods.push((None, vec![]));
        }
        if let Some(rs) = by_key.get(&(q, a)) {
            for r in rs {
                match r.push.as_slice() {
                    [] => {
                        // a pop may also end the trace, even on an empty stack
                        if r.to == q2 || (q2 == h && is_final(r.to)) {
                            prods.push((r.label, vec![]));
                        }
                    }
                    [b] => prods.push((r.label, vec![(r.to, *b, q2)])),
                    [b, c] => {
                        for mid in 0..=h {
                            prods.push((r.label, vec![(r.to, *b, mid), (mid, *c, q2)]));
                        }
                    }
                    _ => unreachable!("binarized"),
                }
            }
        }
        for (l, vars) in prods {
            let mut rhs = Vec::new();
            if let Some(op) = l {
                rhs.push(Sym::T(label(op)));
            }
            for v in vars {
                let id = *ids.entry(v).or_insert_with(|| {
                    queue.push_back(v);
                    g.add_var(name(v))
                });
                rhs.push(Sym::V(id));
            }
            g.add_prod(lhs, rhs);
        }
    }
    g.trim()
}
