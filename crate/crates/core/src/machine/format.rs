//! Machine files.
//!
//! ```text
//! pdm
//! states p q
//! init p Z
//! p Z w(a) p A,Z
//! p A eps q A
//! q A r(b) q -
//! ```
//!
//! Labels are `r(v)`, `w(v)` or `eps`; extended machines may also use
//! `f(v)` and `u(v)`. Pushed words list stack symbols topmost first,
//! separated by commas, with `-` for the empty word. An optional
//! `stack A B ...` line fixes the order of stack symbols, and for tape
//! machines an optional `tape _ a b ...` line does the same for tape
//! symbols (`_` is always the blank). Tape lines read
//! `q tape c c' L|R q'`.

use std::collections::HashMap;
use std::fmt::Write;

use crate::action::{Kind, Op};
use crate::error::{Error, Result};
use crate::machine::{Dir, Fsm, Machine, Pdm, PdmRule, Tm, TmTrans};
use crate::text::{eol, lines, Tok};
use crate::value::ValueTable;

/// Parses `eps` or `k(v)`.
pub fn parse_label(t: &Tok<'_>, values: &mut ValueTable) -> Result<Option<Op>> {
    if t.text == "eps" {
        return Ok(None);
    }
    Ok(Some(parse_op(t, values)?))
}

pub fn parse_op(t: &Tok<'_>, values: &mut ValueTable) -> Result<Op> {
    let s = t.text;
    let bad = || t.err(format!("expected `r(v)`, `w(v)`, `f(v)`, `u(v)` or `eps`, found `{s}`"));
    let (k, rest) = s.split_at(s.char_indices().nth(1).map_or(s.len(), |(i, _)| i));
    let kind = match k {
        "r" => Kind::Read,
        "w" => Kind::Write,
        "f" => Kind::FirstWrite,
        "u" => Kind::UselessWrite,
        _ => return Err(bad()),
    };
    let inner = rest.strip_prefix('(').and_then(|r| r.strip_suffix(')')).ok_or_else(bad)?;
    if inner.is_empty() || inner.contains(['(', ')']) {
        return Err(bad());
    }
    Ok(Op { kind, value: values.intern(inner) })
}

pub fn show_label(l: &Option<Op>, values: &ValueTable) -> String {
    l.map_or_else(|| "eps".to_string(), |op| op.show(values))
}

struct Names<'a> {
    index: HashMap<&'a str, usize>,
    names: Vec<String>,
}

impl<'a> Names<'a> {
    fn new() -> Self {
        Names { index: HashMap::new(), names: Vec::new() }
    }

    fn declare(&mut self, t: &Tok<'a>) -> Result<usize> {
        if self.index.contains_key(t.text) {
            return Err(t.err(format!("`{}` declared twice", t.text)));
        }
        Ok(self.get_or_add(t.text))
    }

    fn get_or_add(&mut self, s: &'a str) -> usize {
        let n = self.names.len();
        *self.index.entry(s).or_insert_with(|| {
            self.names.push(s.to_string());
            n
        })
    }

    fn get(&self, t: &Tok<'_>, what: &str) -> Result<usize> {
        self.index.get(t.text).copied().ok_or_else(|| t.err(format!("unknown {what} `{}`", t.text)))
    }
}

pub fn parse_machine(src: &str, values: &mut ValueTable) -> Result<Machine> {
    let ls = lines(src);
    let Some(head) = ls.first() else {
        return Err(Error::parse(1, 1, "empty machine file, expected `fsm`, `pdm` or `tm`"));
    };
    if head.len() != 1 {
        return Err(eol(&head[..1], "header takes no arguments"));
    }
    let kind = head[0].text;
    if !matches!(kind, "fsm" | "pdm" | "tm") {
        return Err(head[0].err(format!("expected `fsm`, `pdm` or `tm`, found `{kind}`")));
    }
    let mut states = Names::new();
    let mut stack = Names::new();
    let mut tape = Names::new();
    tape.get_or_add("_");
    let mut init: Option<&[Tok<'_>]> = None;
    let mut body = Vec::new();
    for l in &ls[1..] {
        match l[0].text {
            "states" => {
                for t in &l[1..] {
                    states.declare(t)?;
                }
            }
            "stack" if kind == "pdm" => {
                for t in &l[1..] {
                    stack.declare(t)?;
                }
            }
            "tape" if kind == "tm" && l.len() != 6 => {
                for t in &l[1..] {
                    if t.text != "_" {
                        tape.declare(t)?;
                    }
                }
            }
            "init" => init = Some(&l[1..]),
            _ => body.push(l),
        }
    }
    let init = init.ok_or_else(|| Error::parse(head[0].line, 1, "missing `init` line"))?;
    if states.names.is_empty() {
        return Err(Error::parse(head[0].line, 1, "missing `states` line"));
    }
    match kind {
        "fsm" => {
            let [q0] = init else {
                return Err(init.first().map_or_else(|| Error::parse(1, 1, "bad init"), |t| t.err("expected `init <state>`")));
            };
            let mut m = Fsm::new(Vec::new(), states.get(q0, "state")?);
            for l in body {
                let [p, a, q] = l.as_slice() else {
                    return Err(l[0].err("expected `<state> <label> <state>`"));
                };
                m.trans.push((states.get(p, "state")?, parse_label(a, values)?, states.get(q, "state")?));
            }
            m.states = states.names;
            Ok(Machine::Fsm(m))
        }
        "pdm" => {
            let [q0, z] = init else {
                return Err(init.first().map_or_else(|| Error::parse(1, 1, "bad init"), |t| t.err("expected `init <state> <stack symbol>`")));
            };
            let init_state = states.get(q0, "state")?;
            let bottom = stack.get_or_add(z.text);
            let mut rules = Vec::new();
            for l in body {
                let [p, a, lab, q, gamma] = l.as_slice() else {
                    return Err(l[0].err("expected `<state> <symbol> <label> <state> <symbols|->`"));
                };
                let top = stack.get_or_add(a.text);
                let push = if gamma.text == "-" {
                    Vec::new()
                } else {
                    gamma.text.split(',').map(|s| stack.get_or_add(s)).collect()
                };
                if gamma.text.split(',').any(str::is_empty) {
                    return Err(gamma.err("empty stack symbol"));
                }
                rules.push(PdmRule {
                    from: states.get(p, "state")?,
                    top,
                    label: parse_label(lab, values)?,
                    to: states.get(q, "state")?,
                    push,
                });
            }
            Ok(Machine::Pdm(Pdm { states: states.names, stack: stack.names, init: init_state, bottom, rules }))
        }
        _ => {
            let [q0] = init else {
                return Err(init.first().map_or_else(|| Error::parse(1, 1, "bad init"), |t| t.err("expected `init <state>`")));
            };
            let mut m = Tm { states: Vec::new(), tape: Vec::new(), init: states.get(q0, "state")?, trans: Vec::new() };
            for l in body {
                match l.as_slice() {
                    [p, a, q] => m.trans.push(TmTrans::Reg {
                        from: states.get(p, "state")?,
                        op: parse_op(a, values)?,
                        to: states.get(q, "state")?,
                    }),
                    [p, kw, c, c2, d, q] if kw.text == "tape" => {
                        let dir = match d.text {
                            "L" => Dir::Left,
                            "R" => Dir::Right,
                            _ => return Err(d.err("expected `L` or `R`")),
                        };
                        m.trans.push(TmTrans::Tape {
                            from: states.get(p, "state")?,
                            read: tape.get_or_add(c.text) as u16,
                            write: tape.get_or_add(c2.text) as u16,
                            dir,
                            to: states.get(q, "state")?,
                        });
                    }
                    _ => return Err(l[0].err("expected `<state> <op> <state>` or `<state> tape <c> <c'> L|R <state>`")),
                }
            }
            m.states = states.names;
            m.tape = tape.names;
            Ok(Machine::Tm(m))
        }
    }
}

pub fn write_machine(m: &Machine, values: &ValueTable) -> String {
    let mut s = String::new();
    match m {
        Machine::Fsm(f) => {
            let _ = writeln!(s, "fsm\nstates {}\ninit {}", f.states.join(" "), f.states[f.init]);
            for (p, l, q) in &f.trans {
                let _ = writeln!(s, "{} {} {}", f.states[*p], show_label(l, values), f.states[*q]);
            }
        }
        Machine::Pdm(p) => {
            let _ = writeln!(s, "pdm\nstates {}\nstack {}\ninit {} {}", p.states.join(" "), p.stack.join(" "), p.states[p.init], p.stack[p.bottom]);
            for r in &p.rules {
                let push = if r.push.is_empty() {
                    "-".to_string()
                } else {
                    r.push.iter().map(|&x| p.stack[x].as_str()).collect::<Vec<_>>().join(",")
                };
                let _ = writeln!(s, "{} {} {} {} {}", p.states[r.from], p.stack[r.top], show_label(&r.label, values), p.states[r.to], push);
            }
        }
        Machine::Tm(t) => {
            let _ = writeln!(s, "tm\nstates {}\ntape {}\ninit {}", t.states.join(" "), t.tape.join(" "), t.states[t.init]);
            for tr in &t.trans {
                match tr {
                    TmTrans::Reg { from, op, to } => {
                        let _ = writeln!(s, "{} {} {}", t.states[*from], op.show(values), t.states[*to]);
                    }
                    TmTrans::Tape { from, read, write, dir, to } => {
                        let d = if *dir == Dir::Left { "L" } else { "R" };
                        let _ = writeln!(s, "{} tape {} {} {d} {}", t.states[*from], t.tape[*read as usize], t.tape[*write as usize], t.states[*to]);
                    }
                }
            }
        }
    }
    s
}
