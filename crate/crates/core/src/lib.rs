// NaN must fail every window check, hence `!(x <= bound)` throughout
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod function_space;
pub mod kernel;
pub mod operators;
pub mod quadrature;
pub mod smoothness;
pub mod special_fn;
