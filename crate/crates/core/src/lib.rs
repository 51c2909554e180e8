pub mod automata;
pub mod ea;
pub mod efa;
pub mod lab;
