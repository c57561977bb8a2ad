#![allow(dead_code, clippy::needless_range_loop)]

pub mod galerkin;
pub mod pencil_oracle;
pub mod sublevel_oracle;
pub mod triangle_rule;
