// NaN-rejecting guards are written as negated comparisons.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod expr;
pub mod field;
pub mod geom;
pub mod jet;
pub mod ode;
pub mod flow;
pub mod cover;
pub mod shift;
pub mod deform;
pub mod io;
pub mod plot;
pub mod verify;
