//! Bracket calculus, Carnot-Carathéodory distances and ball-box gauges for
//! distributions of planes with polynomial frames.

pub mod calc;
pub mod structures;
pub mod involutivity;
pub mod flows;
pub mod metrics;
pub mod tangency;
pub mod acceptance;
pub mod stats;
