//! Programs and instances shared by the benchmarks in `benches/`.

use dlsb::eval::EDBInstance;
use dlsb::{parse_program, Constant, Program};

pub const TC: &str = include_str!("../../../programs/tc.dl");
pub const TIGHT: &str = include_str!("../../../programs/tight.dl");
pub const TRIANGLE: &str = include_str!("../../../programs/triangle.dl");
pub const BUYS: &str = include_str!("../../../programs/buys.dl");
pub const REACH_FROM: &str = include_str!("../../../programs/reach_from.dl");

pub fn program(text: &str) -> Program {
    parse_program(text).expect("bundled programs parse")
}

/// `e(0,1), e(1,2), ..., e(n-1,n)`.
pub fn path(n: i64) -> EDBInstance {
    let mut d = EDBInstance::new();
    for i in 0..n {
        d.insert("e", vec![Constant::Int(i), Constant::Int(i + 1)]).unwrap();
    }
    d
}

/// Every `e(x,y,z)` with values below `n` and `x < y`.
pub fn ternary(n: i64) -> EDBInstance {
    let mut d = EDBInstance::new();
    for x in 0..n {
        for y in x + 1..n {
            for z in 0..n {
                d.insert("e", vec![Constant::Int(x), Constant::Int(y), Constant::Int(z)]).unwrap();
            }
        }
    }
    d
}
