//! Explicit-state engines used as ground truth for the verifiers.

mod compat;
mod explore;
mod saturate;

pub use compat::check_compatibility;
pub use explore::explore_bounded;
pub use saturate::{bounded_safety_oracle, saturate_fsm};

use crate::action::{Action, Kind, Role};
use crate::machine::Limits;
use crate::network::{Step, Verdict, Witness};
use crate::store::classify_trace;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExploreOptions {
    pub limits: Limits,
    pub state_cap: usize,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        ExploreOptions { limits: Limits::default(), state_cap: 2_000_000 }
    }
}

/// An unsafe verdict for a concrete trace that ends in `w_c(#)`.
fn finish(steps: Vec<Step>) -> Verdict {
    let plain: Vec<Action> = steps.iter().map(|s| s.action).collect();
    let word = classify_trace(&plain);
    let tau = word.iter().filter(|a| a.role == Role::Contributor && a.kind == Kind::FirstWrite).map(|a| a.value).collect();
    Verdict::unsafe_with(Witness { tau, word, trace: Some(steps) })
}
