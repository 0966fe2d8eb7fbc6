//! Grammars and automata: emptiness, bounded-index derivations, subword
//! supports and the synchronized product.
//!
//! `cargo run --example lang_toolkit`

use nonatomic_nets::lang::format::{parse_cfg, parse_fsa, plain_names, write_cfg, write_fsa};
use nonatomic_nets::lang::{bowtie, enumerate_k_index, k_index_nonempty, support_fsa};
use nonatomic_nets::subword::subword_leq;

const NESTED: &str = "\
cfg
alphabet a b
vars S A B
axiom S
prod S -> A B
prod A -> a
prod B -> b
";

const PUMP: &str = "\
cfg
alphabet a b
vars S A
axiom S
prod S -> A S
prod S -> b
prod A -> a
";

const A_THEN_B: &str = "\
fsa
alphabet a b
states p q r
init p
acc r
p a q
q a q
q b r
";

fn show(words: impl IntoIterator<Item = Vec<String>>) -> String {
    let w: Vec<String> = words.into_iter().map(|w| if w.is_empty() { "eps".into() } else { w.concat() }).collect();
    w.join(" ")
}

fn main() {
    let g = parse_cfg(NESTED).unwrap();
    println!("S -> A B: empty {}", g.is_empty());
    for k in 1..=2 {
        println!("  index {k}: nonempty {}, words {}", k_index_nonempty(&g, k).unwrap(), show(enumerate_k_index(&g, k, 4)));
    }

    let p = parse_cfg(PUMP).unwrap();
    let sup = support_fsa(&p.to_cnf(), 10_000).unwrap();
    println!("\nsupport of a*b ({} states):\n{}", sup.num_states(), write_fsa(&sup));
    let small = sup.enumerate_words(3);
    for w in p.enumerate_words(5) {
        let below = small.iter().filter(|v| subword_leq(v, &w)).min_by_key(|v| v.len()).expect("support covers every word");
        println!("  {} above {}", show([w.clone()]), show([below.clone()]));
    }

    let a = parse_fsa(A_THEN_B).unwrap();
    let prod = plain_names(&bowtie(&p.to_cnf(), &a));
    println!("\nproduct with a+b:\n{}", write_cfg(&prod));
    println!("words: {}", show(prod.enumerate_words(5)));
}
