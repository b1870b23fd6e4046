//! Error classes and their exit codes.

use std::fmt;

use orbitshift::deform::DeformError;
use orbitshift::field::FieldError;
use orbitshift::flow::FlowError;
use orbitshift::io::IoError;
use orbitshift::shift::ShiftError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// Unreadable or malformed input, bad flags.
    Input,
    /// Field or numerics violate an invariant (not a TC, no return, ...).
    Invariant,
    NotOrbitPreserving,
    /// Local-diffeomorphism criterion or injectivity fails.
    Criterion,
}

impl Kind {
    pub fn code(self) -> u8 {
        match self {
            Kind::Input => 2,
            Kind::Invariant => 3,
            Kind::NotOrbitPreserving => 4,
            Kind::Criterion => 5,
        }
    }
}

#[derive(Debug)]
pub struct Fail {
    pub kind: Kind,
    pub msg: String,
}

impl Fail {
    pub fn input(msg: impl Into<String>) -> Self {
        Self { kind: Kind::Input, msg: msg.into() }
    }

    pub fn invariant(msg: impl Into<String>) -> Self {
        Self { kind: Kind::Invariant, msg: msg.into() }
    }

    pub fn criterion(msg: impl Into<String>) -> Self {
        Self { kind: Kind::Criterion, msg: msg.into() }
    }
}

impl fmt::Display for Fail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.msg)
    }
}

pub type Res<T> = Result<T, Fail>;

impl From<std::io::Error> for Fail {
    fn from(e: std::io::Error) -> Self {
        Fail::input(e.to_string())
    }
}

impl From<IoError> for Fail {
    fn from(e: IoError) -> Self {
        Fail::input(e.to_string())
    }
}

impl From<FieldError> for Fail {
    fn from(e: FieldError) -> Self {
        match e {
            FieldError::NoConvergence { .. } => Fail::invariant(e.to_string()),
            _ => Fail::input(e.to_string()),
        }
    }
}

impl From<FlowError> for Fail {
    fn from(e: FlowError) -> Self {
        match e {
            FlowError::BadTolerance(_) | FlowError::BadLevels => Fail::input(e.to_string()),
            _ => Fail::invariant(e.to_string()),
        }
    }
}

impl From<ShiftError> for Fail {
    fn from(e: ShiftError) -> Self {
        match e {
            ShiftError::Flow(f) => f.into(),
            ShiftError::NotOrbitPreserving { .. } => Fail { kind: Kind::NotOrbitPreserving, msg: e.to_string() },
            ShiftError::Expr(_) | ShiftError::BadMapSpec(_) | ShiftError::BadGrid(_) | ShiftError::OriginNotFixed => {
                Fail::input(e.to_string())
            }
            _ => Fail::invariant(e.to_string()),
        }
    }
}

impl From<DeformError> for Fail {
    fn from(e: DeformError) -> Self {
        match e {
            DeformError::Shift(s) => s.into(),
            DeformError::Flow(f) => f.into(),
            DeformError::BadProfile { .. } | DeformError::BadCollar(_) => Fail::input(e.to_string()),
            DeformError::NotInjectiveOnUb { .. } | DeformError::CriterionViolated { .. } => Fail::criterion(e.to_string()),
            _ => Fail::invariant(e.to_string()),
        }
    }
}
