//! Instance factories: the 3SAT reduction and random machines.

pub mod cnf;
mod random;
mod sat3;

pub use cnf::CnfFormula;
pub use random::{gen_random_fsm, gen_random_network, gen_random_pdm, Sizes};
pub use sat3::gen_3sat;
