//! Submonoid membership in groups `Y ⋊ Z^n` over finitely presented
//! `F_p[X^±]`-modules, solved by reduction to knapsack and S-unit equations
//! whose solution sets are represented as base-`p` digit automata.

pub mod cli;
pub mod digitset;
pub mod gb;
pub mod group;
pub mod laurent;
pub mod lattice;
pub mod lp;
pub mod modcalc;
pub mod oracle;
pub mod ratfun;
pub mod reduction;
pub mod sunit;
pub mod upoly;
