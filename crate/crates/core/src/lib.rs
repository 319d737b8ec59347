//! Elliptic curves over Q, newform congruences and visibility checks.

pub mod arith;
pub mod curve;
pub mod hecke;
pub mod ingest;
pub mod gate;
pub mod ledger;
