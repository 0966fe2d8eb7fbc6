//! Language algebra: automata, grammars, bounded-index derivations.

pub mod bowtie;
pub mod cfg;
pub mod format;
pub mod fsa;
pub mod kindex;
pub mod scc;
pub mod support;

pub use bowtie::bowtie;
pub use cfg::{Cfg, CnfGrammar, Production, Sym, VarId};
pub use fsa::{Fsa, Letter, StateId};
pub use kindex::{cover_index, enumerate_k_index, k_index_nonempty, k_index_word};
pub use support::support_fsa;
