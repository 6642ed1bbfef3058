#![allow(dead_code)]

pub mod footprint_oracle;
pub mod h_oracle;
pub mod rs_oracle;
