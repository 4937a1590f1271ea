//! Arbitrage checkers and price system builders for finite scenario tree
//! markets under proportional transaction costs and model uncertainty.
//!
//! A market lives on a finite event tree. Uncertainty about the real-world
//! dynamics is expressed nodewise: each interior node carries a finite family
//! of transition kernels, and the admissible models are all products of
//! convex combinations picked node by node. Everything downstream is phrased
//! quasi-surely, i.e. relative to the union of the kernel supports rather
//! than a single reference measure.
//!
//! Two market formats are supported:
//!
//! * two assets quoted as bid/ask processes ([`bidask`], [`arbitrage`],
//!   [`cps`]), with no-arbitrage certified by a martingale price process
//!   evolving inside the spread, and
//! * d assets described by solvency cones ([`cone`], [`cone_market`],
//!   [`scps`]), with the strict no-arbitrage property certified by an exact
//!   martingale selector of the interiors of the dual cones.
//!
//! Both certification routes run a backward tightening pass over the tree
//! followed by a forward extension pass, and every numeric step is exact:
//! all quantities are arbitrary precision rationals, all solver verdicts
//! carry witnesses that re-verify by substitution.

pub mod arbitrage;
pub mod bidask;
pub mod cone;
pub mod cone_market;
pub mod cps;
pub mod gen;
pub mod harness;
pub mod instances;
pub mod io;
pub mod lp;
pub mod rational;
pub mod scps;
pub mod tree;
