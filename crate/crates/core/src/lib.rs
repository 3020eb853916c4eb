pub mod bridge;
pub mod cfg;
pub mod frontend;
pub mod harness;
pub mod interp;
pub mod smt;
pub mod testcase;
pub mod translator;
pub mod typing;
