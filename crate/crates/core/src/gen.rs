//! Seeded random instances for the equivalence harness.
//!
//! Sizes stay deliberately small: the harness runs every checker and
//! builder on every extreme model of every instance, and the point is
//! coverage of structural cases (polar branches, frictionless nodes,
//! flat cones), not stress. Everything derives from the seed through
//! one fixed-order walk of the tree, so a seed names its instance
//! reproducibly across runs and platforms.

use crate::bidask::BidAskProcess;
use crate::cone::PolyCone;
use crate::cone_market::ConeMarket;
use crate::io::{Instance, Mode};
use crate::rational::Rational;
use crate::tree::{Kernel, NodeId, PriorFamily, ScenarioTree};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// Size caps for generated instances. `dim` only matters in cones
/// mode; bid-ask instances are two-asset by nature.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenParams {
    pub mode: Mode,
    pub depth: usize,
    pub max_children: usize,
    pub max_kernels: usize,
    pub dim: usize,
}

impl GenParams {
    pub fn bidask(depth: usize) -> Self {
        GenParams { mode: Mode::Bidask2d, depth, max_children: 2, max_kernels: 2, dim: 2 }
    }

    pub fn cones(depth: usize, dim: usize) -> Self {
        GenParams { mode: Mode::Cones, depth, max_children: 2, max_kernels: 2, dim }
    }

    fn validate(&self) {
        assert!(self.depth <= 3, "depth capped at 3");
        assert!((1..=3).contains(&self.max_children), "child count capped at 3");
        assert!((1..=2).contains(&self.max_kernels), "kernel count capped at 2");
        assert!((2..=3).contains(&self.dim), "dimension capped at 3");
    }
}

/// Deterministic pseudo-random instance for the seed. No reference
/// measure is attached; consumers enumerate extreme models themselves.
pub fn gen_instance(seed: u64, params: &GenParams) -> Instance {
    params.validate();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tree = gen_tree(&mut rng, params);
    match params.mode {
        Mode::Bidask2d => {
            let mut bid = BTreeMap::new();
            let mut ask = BTreeMap::new();
            for node in tree.all_nodes() {
                let (b, a) = gen_quote(&mut rng);
                bid.insert(node.clone(), b);
                ask.insert(node, a);
            }
            let market =
                BidAskProcess::new(&tree, bid, ask).expect("quotes ordered by construction");
            Instance::Bidask { tree, market, measure: None }
        }
        Mode::Cones => {
            let cones = tree
                .all_nodes()
                .into_iter()
                .map(|node| (node, gen_cone(&mut rng, params.dim)))
                .collect();
            let market = ConeMarket::new(&tree, params.dim, cones)
                .expect("orthant generators appended by construction");
            Instance::Cones { tree, market, measure: None }
        }
    }
}

fn gen_tree(rng: &mut ChaCha8Rng, params: &GenParams) -> ScenarioTree {
    let mut children = BTreeMap::new();
    let mut families = BTreeMap::new();
    let mut frontier = vec![NodeId::root()];
    for _ in 0..params.depth {
        let mut next = Vec::new();
        for node in frontier {
            let count = rng.gen_range(1..=params.max_children);
            let kernels = (0..rng.gen_range(1..=params.max_kernels))
                .map(|_| gen_kernel(rng, count))
                .collect();
            children.insert(node.clone(), count);
            families.insert(node.clone(), PriorFamily::new(kernels).expect("nonempty"));
            next.extend((0..count).map(|c| node.child(c)));
        }
        frontier = next;
    }
    ScenarioTree::new(params.depth, children, families).expect("consistent by construction")
}

/// Integer weights normalized by their sum, so denominators never
/// exceed 4 * arity. Zero weights are kept: they make polar children.
fn gen_kernel(rng: &mut ChaCha8Rng, arity: usize) -> Kernel {
    loop {
        let raw: Vec<i64> = (0..arity).map(|_| rng.gen_range(0..=4)).collect();
        let sum: i64 = raw.iter().sum();
        if sum == 0 {
            continue;
        }
        let weights = raw.into_iter().map(|a| Rational::new(a.into(), sum.into())).collect();
        return Kernel::new(weights).expect("weights sum to one");
    }
}

/// Positive bid, ask at or above it; a quarter of the nodes come out
/// frictionless to exercise the spread-free paths.
fn gen_quote(rng: &mut ChaCha8Rng) -> (Rational, Rational) {
    let denom = rng.gen_range(1..=4i64);
    let lo = rng.gen_range(1..=12i64);
    let spread = if rng.gen_bool(0.25) { 0 } else { rng.gen_range(1..=4i64) };
    (Rational::new(lo.into(), denom.into()), Rational::new((lo + spread).into(), denom.into()))
}

/// The orthant generators plus a few random integer directions, so the
/// cone always contains the orthant and all entries stay integral.
fn gen_cone(rng: &mut ChaCha8Rng, dim: usize) -> PolyCone {
    let mut gens = Vec::new();
    for i in 0..dim {
        let mut unit = vec![Rational::from_integer(0.into()); dim];
        unit[i] = Rational::from_integer(1.into());
        gens.push(unit);
    }
    for _ in 0..rng.gen_range(0..=dim) {
        loop {
            let extra: Vec<i64> = (0..dim).map(|_| rng.gen_range(-3..=3i64)).collect();
            if extra.iter().any(|&v| v != 0) {
                gens.push(extra.into_iter().map(|v| Rational::from_integer(v.into())).collect());
                break;
            }
        }
    }
    PolyCone::from_generators(dim, gens).expect("dimensions agree")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    #[test]
    fn same_seed_reproduces_the_instance() {
        for params in [GenParams::bidask(2), GenParams::cones(2, 3)] {
            let first = gen_instance(11, &params);
            let second = gen_instance(11, &params);
            assert_eq!(first, second);
            assert_eq!(first.to_file().to_json(), second.to_file().to_json());
        }
        assert_ne!(gen_instance(1, &GenParams::bidask(2)), gen_instance(2, &GenParams::bidask(2)));
    }

    #[test]
    fn quoted_spreads_are_ordered_and_small() {
        for seed in 0..50 {
            let instance = gen_instance(seed, &GenParams::bidask(2));
            let Instance::Bidask { tree, market, .. } = instance else { unreachable!() };
            for node in tree.all_nodes() {
                assert!(market.bid(&node).is_positive());
                assert!(market.bid(&node) <= market.ask(&node));
                assert!(market.bid(&node).denom() <= &64.into());
                assert!(market.ask(&node).denom() <= &64.into());
            }
        }
    }

    #[test]
    fn generated_cones_contain_the_orthant_canonically() {
        for seed in 0..30 {
            let instance = gen_instance(seed, &GenParams::cones(1, 2));
            let Instance::Cones { tree, market, .. } = instance else { unreachable!() };
            for node in tree.all_nodes() {
                let cone = market.cone(&node);
                assert!(PolyCone::orthant(2).is_subset(cone).unwrap());
                let rebuilt = PolyCone::from_generators(2, cone.generators().to_vec()).unwrap();
                assert_eq!(&rebuilt, cone);
            }
        }
    }

    #[test]
    fn trees_respect_the_size_caps() {
        let params =
            GenParams { mode: Mode::Bidask2d, depth: 3, max_children: 3, max_kernels: 2, dim: 2 };
        for seed in 0..30 {
            let instance = gen_instance(seed, &params);
            let tree = instance.tree();
            assert_eq!(tree.depth(), 3);
            for node in tree.all_nodes() {
                if tree.is_leaf(&node) {
                    continue;
                }
                assert!(tree.child_count(&node).unwrap() <= 3);
                let family = tree.family(&node).unwrap();
                assert!(family.kernels().len() <= 2);
                for kernel in family.kernels() {
                    for w in kernel.weights() {
                        assert!(w.denom() <= &64.into());
                    }
                }
            }
        }
    }
}
