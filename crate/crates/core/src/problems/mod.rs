//! Problem generators, instance parsers and QUBO formulations.

mod gka;
mod mkp;
mod qap;
mod tokens;
mod trivial;

pub use gka::gka_style_random;
pub use mkp::{mkp_check, mkp_parse, mkp_to_qubo, write_mkp, MkpInstance, MkpQubo};
pub use qap::{
    qap_brute_force, qap_check, qap_constraints, qap_parse, qap_to_qubo, qap_variable, write_qap,
    QapInstance,
};
pub use trivial::{trivial_integer, trivial_ising};

/// Feasibility and objective of a decoded solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Check {
    pub feasible: bool,
    pub objective: f64,
}
