#![allow(dead_code)]

pub mod families;
pub mod qe;
pub mod rect;
pub mod sums;
