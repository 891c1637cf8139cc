// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod energy;
pub mod expr;
mod grid;
pub mod numeric;
pub mod optimize;
pub mod pipeline;
pub mod quality;
pub mod spaces;
pub mod weights;
