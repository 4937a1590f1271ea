//! Canonical worked markets used across tests, docs, and the shipped
//! instance files. Each returns a tree plus its quote process; the
//! interesting behavior is noted on the constructor.

use crate::bidask::BidAskProcess;
use crate::rational::{int, rat, Rational};
use crate::tree::{Kernel, NodeId, PriorFamily, ScenarioTree};
use std::collections::BTreeMap;

fn deterministic_quotes(quotes: &[(Rational, Rational)]) -> (ScenarioTree, BidAskProcess) {
    let depth = quotes.len() - 1;
    let tree = ScenarioTree::single_path(depth);
    let mut bid = BTreeMap::new();
    let mut ask = BTreeMap::new();
    for (t, (b, a)) in quotes.iter().enumerate() {
        let node = NodeId::from_path(vec![0; t]);
        bid.insert(node.clone(), b.clone());
        ask.insert(node, a.clone());
    }
    let market = BidAskProcess::new(&tree, bid, ask).expect("ordered quotes");
    (tree, market)
}

/// Two-period deterministic market with spreads (1,3), (2,4), (7/2,5).
/// Each single period is viable on its own, yet buying at time 0 and
/// selling at time 2 clears the round-trip cost: viability is not a
/// period-local property.
pub fn cross_period_trend() -> (ScenarioTree, BidAskProcess) {
    deterministic_quotes(&[(int(1), int(3)), (int(2), int(4)), (rat(7, 2), int(5))])
}

/// One-period frictionless binary market: price 2 today, then 1 or 3.
/// The prior family lists the two point kernels, so each branch alone
/// admits arbitrage while the family as a whole does not.
pub fn binary_frictionless() -> (ScenarioTree, BidAskProcess) {
    let family =
        PriorFamily::new(vec![Kernel::delta(2, 0), Kernel::delta(2, 1)]).expect("two kernels");
    let tree = ScenarioTree::one_period(family);
    let root = NodeId::root();
    let mut price = BTreeMap::new();
    price.insert(root.clone(), int(2));
    price.insert(root.child(0), int(1));
    price.insert(root.child(1), int(3));
    let market = BidAskProcess::frictionless(&tree, price).expect("positive prices");
    (tree, market)
}

/// One-period market that is frictionless today (bid = ask = 1) and
/// spread (1,2) tomorrow. Buying today costs exactly what selling
/// tomorrow at the bid returns, so positions can be moved into the
/// future for free: the dual cone at time 0 degenerates to a ray.
pub fn frictionless_entry() -> (ScenarioTree, BidAskProcess) {
    deterministic_quotes(&[(int(1), int(1)), (int(1), int(2))])
}

/// One-period market whose spread shifts from (1,3) to (2,4). Holding
/// cash against a short position can be insolvent today yet certainly
/// solvent tomorrow, while no trading strategy profits from it.
pub fn shifted_spread() -> (ScenarioTree, BidAskProcess) {
    deterministic_quotes(&[(int(1), int(3)), (int(2), int(4))])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn quote_shapes_match_their_descriptions() {
        let (tree, market) = cross_period_trend();
        assert_eq!(tree.depth(), 2);
        let leaf = NodeId::from_path(vec![0, 0]);
        assert_eq!(market.bid(&leaf), &rat(7, 2));
        assert_eq!(market.ask(&leaf), &int(5));

        let (tree, market) = binary_frictionless();
        assert_eq!(tree.depth(), 1);
        assert_eq!(market.bid(&NodeId::root()), market.ask(&NodeId::root()));
        assert_eq!(market.ask(&NodeId::root().child(1)), &int(3));

        let (_, market) = frictionless_entry();
        assert_eq!(market.bid(&NodeId::root()), &int(1));
        assert_eq!(market.ask(&NodeId::root().child(0)), &int(2));

        let (_, market) = shifted_spread();
        assert_eq!(market.bid(&NodeId::root().child(0)), &int(2));
    }
}
