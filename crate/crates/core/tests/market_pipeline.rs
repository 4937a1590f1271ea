//! A branching two-period market driven end to end through the public
//! API: viability checks, interval tightening, certificates under every
//! extreme model, the cone view of the same quotes, and a JSON detour.

use ftap_core::arbitrage::check_na;
use ftap_core::bidask::{backward_modify, BidAskProcess};
use ftap_core::cone_market::{check_efficient_friction, check_nas, ConeMarket};
use ftap_core::cps::{construct_cps, verify_cps, verify_iiprime};
use ftap_core::harness::extreme_measures;
use ftap_core::io::{Instance, InstanceFile};
use ftap_core::rational::{int, rat};
use ftap_core::scps::{construct_scps, verify_scps};
use ftap_core::tree::{Kernel, NodeId, PriorFamily, ScenarioTree};
use std::collections::BTreeMap;

/// Two periods, two branches per node. The root model is ambiguous
/// between an up leaning and a down leaning kernel, the left child is
/// a fair coin, the right child is ambiguous between its two branches.
/// Quotes are wide enough that every model admits a martingale.
fn branching_market() -> (ScenarioTree, BidAskProcess) {
    let root = NodeId::root();
    let up = |a, b| Kernel::new(vec![rat(a, 4), rat(b, 4)]).expect("weights sum to one");
    let mut families = BTreeMap::new();
    families.insert(root.clone(), PriorFamily::new(vec![up(3, 1), up(1, 3)]).expect("two kernels"));
    families.insert(root.child(0), PriorFamily::new(vec![up(2, 2)]).expect("one kernel"));
    families.insert(
        root.child(1),
        PriorFamily::new(vec![Kernel::delta(2, 0), Kernel::delta(2, 1)]).expect("two kernels"),
    );
    let children = families.keys().map(|node| (node.clone(), 2)).collect();
    let tree = ScenarioTree::new(2, children, families).expect("consistent shape");

    let quotes: &[(&[usize], i64, i64)] = &[
        (&[], 3, 6),
        (&[0], 2, 5),
        (&[1], 4, 7),
        (&[0, 0], 1, 4),
        (&[0, 1], 3, 6),
        (&[1, 0], 3, 6),
        (&[1, 1], 5, 8),
    ];
    let mut bid = BTreeMap::new();
    let mut ask = BTreeMap::new();
    for (path, b, a) in quotes {
        let node = NodeId::from_path(path.to_vec());
        bid.insert(node.clone(), int(*b));
        ask.insert(node, int(*a));
    }
    let market = BidAskProcess::new(&tree, bid, ask).expect("ordered quotes");
    (tree, market)
}

#[test]
fn interval_tightening_stays_inside_the_quotes() {
    let (tree, market) = branching_market();
    let modified = backward_modify(&tree, &market);
    assert!(modified.is_viable());

    let expected: &[(&[usize], (i64, i64))] = &[
        (&[], (3, 6)),
        (&[0], (2, 5)),
        (&[1], (4, 7)),
        (&[0, 0], (1, 4)),
        (&[0, 1], (3, 6)),
        (&[1, 0], (3, 6)),
        (&[1, 1], (5, 8)),
    ];
    for (path, (lo, hi)) in expected {
        let node = NodeId::from_path(path.to_vec());
        assert_eq!(modified.lower(&node), &int(*lo), "lower at {node}");
        assert_eq!(modified.upper(&node), &int(*hi), "upper at {node}");
        assert!(market.bid(&node) <= modified.lower(&node));
        assert!(modified.upper(&node) <= market.ask(&node));
    }
}

#[test]
fn every_extreme_model_gets_a_verified_certificate() {
    let (tree, market) = branching_market();
    assert!(check_na(&tree, &market).holds());
    let modified = backward_modify(&tree, &market);

    let models = extreme_measures(&tree);
    assert_eq!(models.len(), 4, "two root kernels times two right kernels");
    for p in &models {
        let cert = construct_cps(&tree, &market, p).expect("viable market");
        assert!(verify_cps(&tree, &market, &cert, p).ok());
        assert!(verify_iiprime(&tree, &modified, &cert).ok());
        for (node, price) in &cert.prices {
            assert!(market.bid(node) <= price && price <= market.ask(node));
        }
    }
}

#[test]
fn the_cone_view_prices_the_same_quotes_strictly() {
    let (tree, quotes) = branching_market();
    let market = ConeMarket::from_bidask(&tree, &quotes);
    assert!(check_nas(&tree, &market).holds());
    assert!(check_efficient_friction(&tree, market.cones()).holds());

    for p in &extreme_measures(&tree) {
        let cert = construct_scps(&tree, &market, p).expect("strictly viable");
        assert!(verify_scps(&tree, &market, &cert, p).ok());
        for (node, z) in &cert.prices {
            let ratio = z[1].clone() / z[0].clone();
            assert!(
                quotes.bid(node) <= &ratio && &ratio <= quotes.ask(node),
                "ratio {ratio} leaves the spread at {node}"
            );
        }
    }
}

#[test]
fn raising_the_root_bid_breaks_every_model() {
    let (tree, market) = branching_market();
    let mut bid = market.bids().clone();
    let mut ask = market.asks().clone();
    bid.insert(NodeId::root(), int(8));
    ask.insert(NodeId::root(), int(9));
    let market = BidAskProcess::new(&tree, bid, ask).expect("still ordered");

    assert!(!check_na(&tree, &market).holds());
    let modified = backward_modify(&tree, &market);
    assert_eq!(modified.violations(), &[NodeId::root()]);
    for p in &extreme_measures(&tree) {
        assert!(construct_cps(&tree, &market, p).is_err());
    }
}

#[test]
fn the_instance_survives_a_json_detour() {
    let (tree, market) = branching_market();
    let text = InstanceFile::from_bidask(&tree, &market, None).to_json();
    let rebuilt = InstanceFile::from_json(&text).expect("parses").build().expect("validates");
    let Instance::Bidask { tree: tree2, market: market2, .. } = rebuilt else {
        panic!("mode preserved")
    };
    assert_eq!(tree, tree2);
    assert_eq!(market.bids(), market2.bids());
    assert_eq!(market.asks(), market2.asks());
    assert!(check_na(&tree2, &market2).holds());
    assert_eq!(InstanceFile::from_bidask(&tree2, &market2, None).to_json(), text);
}
