//! Small crate used as a dependency pool.

pub mod geom;

/// Largest accepted input.
pub const LIMIT: i32 = 1000;

pub static GREETING: &str = "hi";

pub type Score = i64;

#[macro_export]
macro_rules! square {
    ($x:expr) => {
        $x * $x
    };
}

/// Clamps `v` into `[lo, hi]`.
pub fn clamp(v: i32, lo: i32, hi: i32) -> i32 {
    if v < lo {
        lo
    } else if v > hi {
        hi
    } else {
        v
    }
}

pub enum Mode {
    Fast,
    Slow { delay: u32 },
}

pub trait Area {
    fn area(&self) -> f64;
}

extern "C" {
    fn abs(x: i32) -> i32;
}

mod inner {
    pub fn helper() -> u8 {
        7
    }
}
