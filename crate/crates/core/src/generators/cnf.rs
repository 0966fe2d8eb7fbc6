//! CNF formulas and the DIMACS format.

use std::fmt::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::text::lines;

/// Clauses are lists of non-zero literals; `-v` negates variable `v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfFormula {
    pub vars: usize,
    pub clauses: Vec<Vec<i32>>,
}

impl CnfFormula {
    pub fn new(vars: usize, clauses: Vec<Vec<i32>>) -> Result<Self> {
        for (i, c) in clauses.iter().enumerate() {
            if c.is_empty() {
                return Err(Error::invalid(format!("clause {} is empty", i + 1)));
            }
            if let Some(l) = c.iter().find(|l| **l == 0 || l.unsigned_abs() as usize > vars) {
                return Err(Error::invalid(format!("clause {}: literal {l} out of range 1..={vars}", i + 1)));
            }
        }
        Ok(CnfFormula { vars, clauses })
    }

    /// `p cnf V C` header, clauses terminated by `0`, `c` comment lines.
    pub fn parse_dimacs(src: &str) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut clauses = Vec::new();
        let mut cur: Vec<i32> = Vec::new();
        let mut last = (1, 1);
        for line in lines(src) {
            let first = &line[0];
            if first.text.starts_with('c') {
                continue;
            }
            if first.text == "%" {
                break;
            }
            if first.text == "p" {
                if header.is_some() {
                    return Err(first.err("second `p` line"));
                }
                let f = |i: usize| -> Result<usize> {
                    let t = line.get(i).ok_or_else(|| first.err("expected `p cnf <vars> <clauses>`"))?;
                    t.text.parse().map_err(|_| t.err(format!("expected a number, found `{}`", t.text)))
                };
                if line.get(1).map(|t| t.text) != Some("cnf") {
                    return Err(line.get(1).unwrap_or(first).err("expected `cnf`"));
                }
                header = Some((f(2)?, f(3)?));
                continue;
            }
            let Some((vars, _)) = header else {
                return Err(first.err("clause before the `p cnf` line"));
            };
            for t in &line {
                let l: i32 = t.text.parse().map_err(|_| t.err(format!("expected a literal, found `{}`", t.text)))?;
                if l.unsigned_abs() as usize > vars {
                    return Err(t.err(format!("literal {l} exceeds the declared {vars} variables")));
                }
                last = (t.line, t.column);
                if l == 0 {
                    if cur.is_empty() {
                        return Err(t.err("empty clause"));
                    }
                    clauses.push(std::mem::take(&mut cur));
                } else {
                    cur.push(l);
                }
            }
        }
        let Some((vars, count)) = header else {
            return Err(Error::parse(1, 1, "missing `p cnf` line"));
        };
        if !cur.is_empty() {
            clauses.push(cur);
        }
        if clauses.len() != count {
            return Err(Error::parse(last.0, last.1, format!("header declares {count} clauses, found {}", clauses.len())));
        }
        CnfFormula::new(vars, clauses)
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.vars, self.clauses.len());
        for c in &self.clauses {
            for l in c {
                write!(out, "{l} ").unwrap();
            }
            out.push_str("0\n");
        }
        out
    }

    /// `assignment[v - 1]` is the value of variable `v`.
    pub fn eval(&self, assignment: &[bool]) -> bool {
        self.clauses
            .iter()
            .all(|c| c.iter().any(|&l| assignment[l.unsigned_abs() as usize - 1] == (l > 0)))
    }

    /// Tries all assignments.
    pub fn brute_force_sat(&self) -> Option<Vec<bool>> {
        assert!(self.vars < 32, "brute force over {} variables", self.vars);
        (0u32..1 << self.vars)
            .map(|bits| (0..self.vars).map(|i| bits >> i & 1 == 1).collect::<Vec<_>>())
            .find(|a| self.eval(a))
    }

    /// Uniform random 3-literal clauses over distinct variables (when there
    /// are at least three).
    pub fn random_3cnf(seed: u64, vars: usize, clauses: usize) -> Self {
        assert!(vars >= 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cs = (0..clauses)
            .map(|_| {
                let mut c: Vec<i32> = Vec::new();
                while c.len() < 3 {
                    let v = rng.gen_range(1..=vars) as i32;
                    if vars >= 3 && c.iter().any(|l| l.abs() == v) {
                        continue;
                    }
                    c.push(if rng.gen_bool(0.5) { v } else { -v });
                }
                c
            })
            .collect();
        CnfFormula { vars, clauses: cs }
    }
}
