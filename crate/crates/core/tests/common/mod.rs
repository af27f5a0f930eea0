#![allow(dead_code)]

pub mod faddeev_oracle;
pub mod quad;
pub mod setup;
