//! Temporal planning over interval-logic theories: domains, a bounded
//! dateline encoding into finite-domain constraint models, a backtracking
//! solver, plan decoding and an independent semantic validator.

pub mod benchgen;
pub mod domain;
pub mod encoder;
pub mod interval;
pub mod model;
pub mod search;
pub mod solver;
pub mod theory;
pub mod validator;
