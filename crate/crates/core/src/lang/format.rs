//! Text format for automata and grammars over string letters.
//!
//! ```text
//! fsa
//! alphabet a b
//! states q0 q1
//! init q0
//! acc q1
//! q0 a q1
//! q1 eps q0
//! ```
//!
//! ```text
//! cfg
//! alphabet a b
//! vars S A B
//! axiom S
//! prod S -> A B
//! prod A -> a
//! prod B -> b
//! prod S ->
//! ```
//!
//! In a grammar, any right-hand-side token naming a declared variable is a
//! variable; every other token must be a declared letter.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::lang::cfg::{Cfg, Sym};
use crate::lang::fsa::Fsa;
use crate::text::{eol, lines, Tok};

fn header<'a>(ls: &'a [Vec<Tok<'a>>], want: &str) -> Result<&'a [Vec<Tok<'a>>]> {
    match ls.first() {
        Some(l) if l.len() == 1 && l[0].text == want => Ok(&ls[1..]),
        Some(l) => Err(l[0].err(format!("expected header `{want}`"))),
        None => Err(Error::parse(1, 1, format!("empty input, expected header `{want}`"))),
    }
}

pub fn parse_fsa(src: &str) -> Result<Fsa<String>> {
    let ls = lines(src);
    let body = header(&ls, "fsa")?;
    let mut alphabet = BTreeSet::new();
    let mut states: HashMap<&str, usize> = HashMap::new();
    let mut names: Vec<&str> = Vec::new();
    let mut init = None;
    let mut acc = Vec::new();
    let mut edges = Vec::new();
    for l in body {
        match l[0].text {
            "alphabet" => alphabet.extend(l[1..].iter().map(|t| t.text.to_string())),
            "states" => {
                for t in &l[1..] {
                    if states.insert(t.text, names.len()).is_some() {
                        return Err(t.err(format!("duplicate state `{}`", t.text)));
                    }
                    names.push(t.text);
                }
            }
            "init" => match l.as_slice() {
                [_, q] => init = Some(*q),
                _ => return Err(eol(l, "expected `init <state>`")),
            },
            "acc" => acc.extend(l[1..].iter().copied()),
            _ => match l.as_slice() {
                [p, a, q] => edges.push((*p, *a, *q)),
                _ => return Err(l[0].err("expected `<state> <letter|eps> <state>`")),
            },
        }
    }
    let state = |t: &Tok<'_>| states.get(t.text).copied().ok_or_else(|| t.err(format!("unknown state `{}`", t.text)));
    let init = init.ok_or_else(|| Error::parse(1, 1, "missing `init` line"))?;
    if names.is_empty() {
        return Err(init.err("missing `states` line"));
    }
    let mut fsa = Fsa {
        alphabet,
        init: state(&init)?,
        accepting: vec![false; names.len()],
        edges: vec![Vec::new(); names.len()],
    };
    for t in &acc {
        fsa.accepting[state(t)?] = true;
    }
    for (p, a, q) in edges {
        let label = if a.text == "eps" {
            None
        } else if fsa.alphabet.contains(a.text) {
            Some(a.text.to_string())
        } else {
            return Err(a.err(format!("letter `{}` is not in the alphabet", a.text)));
        };
        let (p, q) = (state(&p)?, state(&q)?);
        fsa.add_edge(p, label, q);
    }
    Ok(fsa)
}

pub fn write_fsa(a: &Fsa<String>) -> String {
    let mut s = String::from("fsa\n");
    let _ = writeln!(s, "alphabet {}", a.alphabet.iter().cloned().collect::<Vec<_>>().join(" "));
    let _ = writeln!(s, "states {}", (0..a.num_states()).map(|i| format!("q{i}")).collect::<Vec<_>>().join(" "));
    let _ = writeln!(s, "init q{}", a.init);
    let acc: Vec<String> = a.accepting_states().map(|i| format!("q{i}")).collect();
    if !acc.is_empty() {
        let _ = writeln!(s, "acc {}", acc.join(" "));
    }
    for (p, out) in a.edges.iter().enumerate() {
        for (l, q) in out {
            let _ = writeln!(s, "q{p} {} q{q}", l.as_deref().unwrap_or("eps"));
        }
    }
    s
}

pub fn parse_cfg(src: &str) -> Result<Cfg<String>> {
    let ls = lines(src);
    let body = header(&ls, "cfg")?;
    let mut alphabet = BTreeSet::new();
    let mut vars: Vec<&str> = Vec::new();
    let mut axiom = None;
    let mut prods = Vec::new();
    for l in body {
        match l[0].text {
            "alphabet" => alphabet.extend(l[1..].iter().map(|t| t.text.to_string())),
            "vars" => vars.extend(l[1..].iter().map(|t| t.text)),
            "axiom" => match l.as_slice() {
                [_, x] => axiom = Some(*x),
                _ => return Err(eol(l, "expected `axiom <var>`")),
            },
            "prod" => {
                if l.len() < 3 || l[2].text != "->" {
                    return Err(l[0].err("expected `prod <var> -> <symbols>`"));
                }
                prods.push((l[1], &l[3..]));
            }
            _ => return Err(l[0].err(format!("unexpected `{}`", l[0].text))),
        }
    }
    let axiom = axiom.ok_or_else(|| Error::parse(1, 1, "missing `axiom` line"))?;
    if !vars.contains(&axiom.text) {
        vars.insert(0, axiom.text);
    }
    let mut order: Vec<&str> = vec![axiom.text];
    order.extend(vars.iter().copied().filter(|v| *v != axiom.text));
    let mut g = Cfg::new(alphabet, axiom.text);
    let mut ids = HashMap::from([(axiom.text, 0usize)]);
    for v in &order[1..] {
        if ids.contains_key(v) {
            continue;
        }
        ids.insert(v, g.add_var(*v));
    }
    for (lhs, rhs) in prods {
        let x = *ids.get(lhs.text).ok_or_else(|| lhs.err(format!("unknown variable `{}`", lhs.text)))?;
        let mut syms = Vec::new();
        for t in rhs {
            if let Some(&v) = ids.get(t.text) {
                syms.push(Sym::V(v));
            } else if g.alphabet.contains(t.text) {
                syms.push(Sym::T(t.text.to_string()));
            } else {
                return Err(t.err(format!("`{}` is neither a variable nor a letter", t.text)));
            }
        }
        g.add_prod(x, syms);
    }
    Ok(g)
}

pub fn write_cfg(g: &Cfg<String>) -> String {
    let mut s = String::from("cfg\n");
    let _ = writeln!(s, "alphabet {}", g.alphabet.iter().cloned().collect::<Vec<_>>().join(" "));
    let _ = writeln!(s, "vars {}", g.var_names.join(" "));
    let _ = writeln!(s, "axiom {}", g.var_names[g.axiom]);
    for p in &g.productions {
        let rhs: Vec<&str> = p
            .rhs
            .iter()
            .map(|x| match x {
                Sym::T(a) => a.as_str(),
                Sym::V(v) => g.var_names[*v].as_str(),
            })
            .collect();
        let _ = writeln!(s, "prod {} -> {}", g.var_names[p.lhs], rhs.join(" "));
    }
    s
}

/// Renames variables to `X0, X1, ...` so that names are valid tokens.
pub fn plain_names(g: &Cfg<String>) -> Cfg<String> {
    let mut out = g.clone();
    for (i, n) in out.var_names.iter_mut().enumerate() {
        *n = format!("X{i}");
    }
    out
}
