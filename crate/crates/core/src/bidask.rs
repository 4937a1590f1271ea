//! Bid/ask quote processes and the backward tightening pass.
//!
//! The market quotes one risky asset against cash: selling earns the bid,
//! buying pays the ask, both strictly positive with `bid <= ask`. The
//! tightening pass shrinks each node's quote interval to the prices a
//! martingale lying inside the spread could still take, working backwards
//! from the leaves through the charged child sets. An empty interval at a
//! non-polar node is recorded as a violation; viability of the whole
//! market is exactly the absence of violations.

use crate::rational::Rational;
use crate::tree::{NodeId, ScenarioTree};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MarketError {
    #[error("{0}")]
    Coverage(String),
    #[error("bid exceeds ask at {0}")]
    Crossed(NodeId),
    #[error("non-positive bid at {0}")]
    NonPositive(NodeId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BidAskProcess {
    bid: BTreeMap<NodeId, Rational>,
    ask: BTreeMap<NodeId, Rational>,
}

impl BidAskProcess {
    pub fn new(
        tree: &ScenarioTree,
        bid: BTreeMap<NodeId, Rational>,
        ask: BTreeMap<NodeId, Rational>,
    ) -> Result<Self, MarketError> {
        let nodes = tree.all_nodes();
        for node in &nodes {
            let b = bid
                .get(node)
                .ok_or_else(|| MarketError::Coverage(format!("missing bid at {node}")))?;
            let a = ask
                .get(node)
                .ok_or_else(|| MarketError::Coverage(format!("missing ask at {node}")))?;
            if b <= &Rational::from_integer(0.into()) {
                return Err(MarketError::NonPositive(node.clone()));
            }
            if b > a {
                return Err(MarketError::Crossed(node.clone()));
            }
        }
        if bid.len() != nodes.len() || ask.len() != nodes.len() {
            return Err(MarketError::Coverage("quotes at nodes outside the tree".into()));
        }
        Ok(BidAskProcess { bid, ask })
    }

    /// Frictionless process: bid and ask coincide at every node.
    pub fn frictionless(
        tree: &ScenarioTree,
        price: BTreeMap<NodeId, Rational>,
    ) -> Result<Self, MarketError> {
        Self::new(tree, price.clone(), price)
    }

    pub fn bid(&self, node: &NodeId) -> &Rational {
        self.bid.get(node).expect("quoted node")
    }

    pub fn ask(&self, node: &NodeId) -> &Rational {
        self.ask.get(node).expect("quoted node")
    }

    pub fn bids(&self) -> &BTreeMap<NodeId, Rational> {
        &self.bid
    }

    pub fn asks(&self) -> &BTreeMap<NodeId, Rational> {
        &self.ask
    }
}

/// Result of the tightening pass: per-node price bounds and the non-polar
/// nodes where they cross.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModifiedProcess {
    lower: BTreeMap<NodeId, Rational>,
    upper: BTreeMap<NodeId, Rational>,
    violations: Vec<NodeId>,
}

impl ModifiedProcess {
    pub fn lower(&self, node: &NodeId) -> &Rational {
        self.lower.get(node).expect("modified node")
    }

    pub fn upper(&self, node: &NodeId) -> &Rational {
        self.upper.get(node).expect("modified node")
    }

    pub fn violations(&self) -> &[NodeId] {
        &self.violations
    }

    /// True when every non-polar node keeps a nonempty price interval.
    pub fn is_viable(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn midpoint(&self, node: &NodeId) -> Rational {
        (self.lower(node) + self.upper(node)) / Rational::from_integer(2.into())
    }
}

/// Backward pass over the tree. Leaves keep their quotes. An interior
/// node's lower bound is its bid raised to the smallest lower bound among
/// charged children, and its upper bound is its ask lowered to the largest
/// upper bound among them; uncharged children never constrain a price.
pub fn backward_modify(tree: &ScenarioTree, market: &BidAskProcess) -> ModifiedProcess {
    let mut lower: BTreeMap<NodeId, Rational> = BTreeMap::new();
    let mut upper: BTreeMap<NodeId, Rational> = BTreeMap::new();
    let mut violations = Vec::new();

    for t in (0..=tree.depth()).rev() {
        for node in tree.nodes_at(t) {
            if tree.is_leaf(&node) {
                lower.insert(node.clone(), market.bid(&node).clone());
                upper.insert(node.clone(), market.ask(&node).clone());
                continue;
            }
            let charged = tree.charged_children(&node).expect("interior node");
            let mut child_min: Option<Rational> = None;
            let mut child_max: Option<Rational> = None;
            for &c in &charged {
                let child = node.child(c);
                let lo = &lower[&child];
                let hi = &upper[&child];
                child_min = Some(match child_min {
                    Some(m) => m.min(lo.clone()),
                    None => lo.clone(),
                });
                child_max = Some(match child_max {
                    Some(m) => m.max(hi.clone()),
                    None => hi.clone(),
                });
            }
            let lo = market.bid(&node).clone().max(child_min.expect("charged child exists"));
            let hi = market.ask(&node).clone().min(child_max.expect("charged child exists"));
            if lo > hi && !tree.is_polar(&node) {
                violations.push(node.clone());
            }
            lower.insert(node.clone(), lo);
            upper.insert(node.clone(), hi);
        }
    }
    violations.sort();
    ModifiedProcess { lower, upper, violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use crate::tree::{Kernel, PriorFamily};
    use std::collections::BTreeMap;

    fn quotes(
        pairs: &[(&NodeId, i64, i64)],
    ) -> (BTreeMap<NodeId, Rational>, BTreeMap<NodeId, Rational>) {
        let mut bid = BTreeMap::new();
        let mut ask = BTreeMap::new();
        for (node, b, a) in pairs {
            bid.insert((*node).clone(), int(*b));
            ask.insert((*node).clone(), int(*a));
        }
        (bid, ask)
    }

    #[test]
    fn construction_enforces_order_and_positivity() {
        let tree = ScenarioTree::single_path(1);
        let root = NodeId::root();
        let leaf = root.child(0);

        let (bid, ask) = quotes(&[(&root, 2, 1), (&leaf, 1, 1)]);
        assert!(matches!(BidAskProcess::new(&tree, bid, ask), Err(MarketError::Crossed(_))));

        let (bid, ask) = quotes(&[(&root, 0, 1), (&leaf, 1, 1)]);
        assert!(matches!(BidAskProcess::new(&tree, bid, ask), Err(MarketError::NonPositive(_))));

        let (bid, _) = quotes(&[(&root, 1, 1)]);
        let (_, ask) = quotes(&[(&root, 1, 1), (&leaf, 1, 1)]);
        assert!(matches!(BidAskProcess::new(&tree, bid, ask), Err(MarketError::Coverage(_))));
    }

    #[test]
    fn tightening_squeezes_a_frictionless_binary_step() {
        let family = PriorFamily::new(vec![Kernel::delta(2, 0), Kernel::delta(2, 1)]).unwrap();
        let tree = ScenarioTree::one_period(family);
        let root = NodeId::root();
        let (bid, ask) = quotes(&[(&root, 2, 2), (&root.child(0), 1, 1), (&root.child(1), 3, 3)]);
        let market = BidAskProcess::new(&tree, bid, ask).unwrap();
        let modified = backward_modify(&tree, &market);

        assert!(modified.is_viable());
        assert_eq!(modified.lower(&root), &int(2));
        assert_eq!(modified.upper(&root), &int(2));
        assert_eq!(modified.lower(&root.child(0)), &int(1));
        assert_eq!(modified.upper(&root.child(1)), &int(3));
    }

    #[test]
    fn crossing_at_a_reachable_node_is_flagged() {
        // Root price 1 but every reachable tomorrow price is at least 2:
        // buying today and selling tomorrow wins under any model.
        let family = PriorFamily::new(vec![Kernel::delta(2, 0), Kernel::delta(2, 1)]).unwrap();
        let tree = ScenarioTree::one_period(family);
        let root = NodeId::root();
        let (bid, ask) = quotes(&[(&root, 1, 1), (&root.child(0), 2, 2), (&root.child(1), 3, 3)]);
        let market = BidAskProcess::new(&tree, bid, ask).unwrap();
        let modified = backward_modify(&tree, &market);

        assert_eq!(modified.violations(), std::slice::from_ref(&root));
        assert!(!modified.is_viable());
        assert_eq!(modified.lower(&root), &int(2));
        assert_eq!(modified.upper(&root), &int(1));
    }

    #[test]
    fn crossings_on_polar_branches_are_ignored() {
        // Child 1 is never charged; the crossing below it must not count.
        let mut children = BTreeMap::new();
        let mut families = BTreeMap::new();
        children.insert(NodeId::root(), 2);
        families.insert(NodeId::root(), PriorFamily::singleton(Kernel::delta(2, 0)));
        for i in 0..2 {
            let n = NodeId::root().child(i);
            children.insert(n.clone(), 1);
            families.insert(n, PriorFamily::singleton(Kernel::delta(1, 0)));
        }
        let tree = ScenarioTree::new(2, children, families).unwrap();
        let root = NodeId::root();
        let (bid, ask) = quotes(&[
            (&root, 1, 1),
            (&root.child(0), 1, 1),
            (&root.child(1), 1, 1),
            (&root.child(0).child(0), 1, 1),
            (&root.child(1).child(0), 5, 5),
        ]);
        let market = BidAskProcess::new(&tree, bid, ask).unwrap();
        let modified = backward_modify(&tree, &market);

        // The polar node's interval crosses (lower 5, upper 1) silently.
        assert_eq!(modified.lower(&root.child(1)), &int(5));
        assert_eq!(modified.upper(&root.child(1)), &int(1));
        assert!(modified.is_viable());
    }

    #[test]
    fn uncharged_children_do_not_tighten() {
        // Family charges child 0 only; child 1's wild quote is irrelevant.
        let family = PriorFamily::singleton(Kernel::delta(2, 0));
        let tree = ScenarioTree::one_period(family);
        let root = NodeId::root();
        let (bid, ask) =
            quotes(&[(&root, 2, 2), (&root.child(0), 2, 2), (&root.child(1), 100, 100)]);
        let market = BidAskProcess::new(&tree, bid, ask).unwrap();
        let modified = backward_modify(&tree, &market);

        assert!(modified.is_viable());
        assert_eq!(modified.lower(&root), &int(2));
        assert_eq!(modified.upper(&root), &int(2));
    }

    #[test]
    fn spreads_absorb_moves_that_break_frictionless_quotes() {
        // Same drift as the flagged case, but a wide spread at the root
        // keeps a price system alive.
        let family = PriorFamily::new(vec![Kernel::delta(2, 0), Kernel::delta(2, 1)]).unwrap();
        let tree = ScenarioTree::one_period(family);
        let root = NodeId::root();
        let (bid, ask) = quotes(&[(&root, 1, 4), (&root.child(0), 2, 2), (&root.child(1), 3, 3)]);
        let market = BidAskProcess::new(&tree, bid, ask).unwrap();
        let modified = backward_modify(&tree, &market);

        assert!(modified.is_viable());
        assert_eq!(modified.lower(&root), &int(2));
        assert_eq!(modified.upper(&root), &int(3));
        assert_eq!(modified.midpoint(&root), rat(5, 2));
    }
}
