//! Register actions: role x kind x value.

use std::fmt;

use serde::Serialize;

use crate::value::{Value, ValueTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Role {
    Leader,
    Contributor,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Kind {
    Read,
    Write,
    FirstWrite,
    UselessWrite,
}

impl Kind {
    pub fn is_read(self) -> bool {
        self == Kind::Read
    }

    /// Any of the three contributor write flavours, or a plain write.
    pub fn is_write(self) -> bool {
        !self.is_read()
    }

    fn letter(self) -> char {
        match self {
            Kind::Read => 'r',
            Kind::Write => 'w',
            Kind::FirstWrite => 'f',
            Kind::UselessWrite => 'u',
        }
    }
}

/// A role-free register operation, as written in machine files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Op {
    pub kind: Kind,
    pub value: Value,
}

impl Op {
    pub fn read(value: Value) -> Self {
        Op { kind: Kind::Read, value }
    }

    pub fn write(value: Value) -> Self {
        Op { kind: Kind::Write, value }
    }

    pub fn with_role(self, role: Role) -> Action {
        Action {
            role,
            kind: self.kind,
            value: self.value,
        }
    }

    pub fn show(&self, values: &ValueTable) -> String {
        format!("{}({})", self.kind.letter(), values.name(self.value))
    }
}

/// A letter of a network alphabet: `r_d(g)`, `w_c(g)`, `f_c(g)`, ...
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Action {
    pub role: Role,
    pub kind: Kind,
    pub value: Value,
}

impl Action {
    pub fn new(role: Role, kind: Kind, value: Value) -> Self {
        debug_assert!(
            role == Role::Contributor || matches!(kind, Kind::Read | Kind::Write),
            "first/useless writes are contributor-only"
        );
        Action { role, kind, value }
    }

    pub fn rd(value: Value) -> Self {
        Action::new(Role::Leader, Kind::Read, value)
    }
    pub fn wd(value: Value) -> Self {
        Action::new(Role::Leader, Kind::Write, value)
    }
    pub fn rc(value: Value) -> Self {
        Action::new(Role::Contributor, Kind::Read, value)
    }
    pub fn wc(value: Value) -> Self {
        Action::new(Role::Contributor, Kind::Write, value)
    }
    pub fn fc(value: Value) -> Self {
        Action::new(Role::Contributor, Kind::FirstWrite, value)
    }
    pub fn uc(value: Value) -> Self {
        Action::new(Role::Contributor, Kind::UselessWrite, value)
    }

    pub fn op(self) -> Op {
        Op {
            kind: self.kind,
            value: self.value,
        }
    }

    /// Replaces first and useless writes by plain writes.
    pub fn erase(self) -> Action {
        match self.kind {
            Kind::FirstWrite | Kind::UselessWrite => Action { kind: Kind::Write, ..self },
            _ => self,
        }
    }

    pub fn show(&self, values: &ValueTable) -> String {
        let role = match self.role {
            Role::Leader => 'd',
            Role::Contributor => 'c',
        };
        format!("{}_{}({})", self.kind.letter(), role, values.name(self.value))
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let role = match self.role {
            Role::Leader => 'd',
            Role::Contributor => 'c',
        };
        write!(f, "{}_{}({})", self.kind.letter(), role, self.value.0)
    }
}

/// `G(kinds)` for one role: every action with one of `kinds` over `values`.
pub fn alphabet_of(
    role: Role,
    kinds: &[Kind],
    values: impl IntoIterator<Item = Value> + Clone,
) -> std::collections::BTreeSet<Action> {
    let mut out = std::collections::BTreeSet::new();
    for &kind in kinds {
        for v in values.clone() {
            out.insert(Action { role, kind, value: v });
        }
    }
    out
}
