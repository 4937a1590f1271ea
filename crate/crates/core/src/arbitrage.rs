//! Quasi-sure arbitrage detection for the two-asset market.
//!
//! A strategy posts buy and sell orders at each node; the money leg pays
//! the ask when buying and earns the bid when selling, with free disposal
//! allowed. The detector maximizes the total terminal wealth over all
//! self-financing strategies whose terminal claims are nonnegative at
//! every reachable leaf. The feasible set is a cone, so the optimum is
//! either zero (no arbitrage) or unbounded; in the latter case a boxed
//! re-solve turns the improving ray into a finite witness strategy.

use crate::bidask::BidAskProcess;
use crate::lp::{self, Constraint, LpOutcome, LpProblem, Relation, Sense};
use crate::rational::{format_rational, Rational};
use crate::tree::{NodeId, ScenarioTree, TreeMeasure};
use num_traits::Zero;
use std::collections::BTreeMap;
use thiserror::Error;

/// Orders placed at one node. `money` is the cash-leg increment, which
/// must not exceed what the orders generate at the quoted prices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trade {
    pub buy: Rational,
    pub sell: Rational,
    pub money: Rational,
}

impl Trade {
    /// Trade whose money leg is exactly the order proceeds.
    pub fn tight(market: &BidAskProcess, node: &NodeId, buy: Rational, sell: Rational) -> Self {
        let money = -&buy * market.ask(node) + &sell * market.bid(node);
        Trade { buy, sell, money }
    }

    pub fn stock(&self) -> Rational {
        &self.buy - &self.sell
    }
}

/// Node-indexed trades; nodes without an entry trade nothing. Positions
/// start at zero and accumulate along each path.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Strategy2D {
    trades: BTreeMap<NodeId, Trade>,
}

impl Strategy2D {
    pub fn new(trades: BTreeMap<NodeId, Trade>) -> Self {
        Strategy2D { trades }
    }

    pub fn trades(&self) -> &BTreeMap<NodeId, Trade> {
        &self.trades
    }

    /// Every order and money leg scaled by `c`; scaling preserves
    /// self-financing because the constraints are homogeneous.
    pub fn scale(&self, c: &Rational) -> Self {
        let trades = self
            .trades
            .iter()
            .map(|(n, t)| {
                (n.clone(), Trade { buy: c * &t.buy, sell: c * &t.sell, money: c * &t.money })
            })
            .collect();
        Strategy2D { trades }
    }
}

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error("negative order size at {0}")]
    NegativeOrder(NodeId),
    #[error("money leg exceeds order proceeds at {0}")]
    NotSelfFinancing(NodeId),
    #[error("trade at a node outside the tree: {0}")]
    UnknownNode(NodeId),
}

/// Runs the strategy along every path and returns the terminal claim
/// `(money, stock)` per leaf. Fails on the first node, in path order,
/// where an order is negative or the money leg outruns the proceeds.
pub fn evaluate_strategy(
    tree: &ScenarioTree,
    market: &BidAskProcess,
    strategy: &Strategy2D,
) -> Result<BTreeMap<NodeId, (Rational, Rational)>, StrategyError> {
    for (node, trade) in strategy.trades() {
        if !tree.contains(node) {
            return Err(StrategyError::UnknownNode(node.clone()));
        }
        if trade.buy < Rational::zero() || trade.sell < Rational::zero() {
            return Err(StrategyError::NegativeOrder(node.clone()));
        }
        let proceeds = -&trade.buy * market.ask(node) + &trade.sell * market.bid(node);
        if trade.money > proceeds {
            return Err(StrategyError::NotSelfFinancing(node.clone()));
        }
    }
    let mut claims = BTreeMap::new();
    for leaf in tree.leaves() {
        let mut money = Rational::zero();
        let mut stock = Rational::zero();
        for node in leaf.prefixes() {
            if let Some(trade) = strategy.trades().get(&node) {
                money += &trade.money;
                stock += trade.stock();
            }
        }
        claims.insert(leaf, (money, stock));
    }
    Ok(claims)
}

/// Which component of a terminal claim is strictly positive.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Component {
    Money,
    Stock,
}

/// A certified arbitrage: the strategy's claims are nonnegative at every
/// reachable leaf, strictly positive in `component` at `leaf`, and the
/// measure (assembled from family kernels) charges that leaf.
#[derive(Clone, Debug)]
pub struct ArbitrageWitness {
    pub strategy: Strategy2D,
    pub leaf: NodeId,
    pub component: Component,
    pub measure: TreeMeasure,
}

#[derive(Clone, Debug)]
pub enum NaReport {
    Holds,
    Fails(Box<ArbitrageWitness>),
}

impl NaReport {
    pub fn holds(&self) -> bool {
        matches!(self, NaReport::Holds)
    }
}

struct NaProblem {
    vars: BTreeMap<NodeId, usize>,
    leaves: Vec<NodeId>,
}

impl NaProblem {
    /// Variables are buy/sell pairs at reachable nodes only: trades under
    /// an uncharged edge influence no reachable leaf.
    fn build(tree: &ScenarioTree, market: &BidAskProcess) -> (Self, LpProblem) {
        let mut vars = BTreeMap::new();
        for node in tree.all_nodes() {
            if !tree.is_polar(&node) {
                let next = vars.len() * 2;
                vars.insert(node, next);
            }
        }
        let n = vars.len() * 2;
        let leaves: Vec<NodeId> = tree.leaves().into_iter().filter(|l| !tree.is_polar(l)).collect();

        let mut rows = Vec::new();
        let mut objective = vec![Rational::zero(); n];
        for leaf in &leaves {
            let mut money = vec![Rational::zero(); n];
            let mut stock = vec![Rational::zero(); n];
            for node in leaf.prefixes() {
                let base = vars[&node];
                money[base] = -market.ask(&node);
                money[base + 1] = market.bid(&node).clone();
                stock[base] = Rational::from_integer(1.into());
                stock[base + 1] = Rational::from_integer((-1).into());
            }
            for j in 0..n {
                objective[j] += &money[j] + &stock[j];
            }
            rows.push(Constraint::new(money, Relation::Ge, Rational::zero()));
            rows.push(Constraint::new(stock, Relation::Ge, Rational::zero()));
        }
        let problem = LpProblem {
            sense: Sense::Maximize,
            objective,
            constraints: rows,
            bounds: vec![(Some(Rational::zero()), None); n],
        };
        (NaProblem { vars, leaves }, problem)
    }

    fn strategy(&self, market: &BidAskProcess, point: &[Rational]) -> Strategy2D {
        let mut trades = BTreeMap::new();
        for (node, &base) in &self.vars {
            let buy = point[base].clone();
            let sell = point[base + 1].clone();
            if buy.is_zero() && sell.is_zero() {
                continue;
            }
            trades.insert(node.clone(), Trade::tight(market, node, buy, sell));
        }
        Strategy2D::new(trades)
    }
}

/// A measure reaching `leaf` with positive probability: on the path it
/// picks the lowest-index family kernel charging the next edge, elsewhere
/// the uniform mixture. Both choices lie in the family hulls.
fn charging_measure(tree: &ScenarioTree, leaf: &NodeId) -> TreeMeasure {
    let path = leaf.path();
    let mut kernels = BTreeMap::new();
    for node in tree.interior_nodes() {
        let family = tree.family(&node).expect("interior node");
        let depth = node.time();
        let on_path = depth < path.len() && node.path() == &path[..depth];
        let kernel = if on_path {
            let step = path[depth];
            family
                .kernels()
                .iter()
                .find(|k| !k.weight(step).is_zero())
                .expect("edge on a reachable path is charged")
                .clone()
        } else {
            family.uniform_mixture()
        };
        kernels.insert(node, kernel);
    }
    TreeMeasure::new(kernels)
}

/// Decides quasi-sure no-arbitrage by exact linear programming. The
/// verdict fails exactly when the wealth-maximization LP is unbounded;
/// the returned witness is re-verified before it is handed out.
pub fn check_na(tree: &ScenarioTree, market: &BidAskProcess) -> NaReport {
    let (shape, problem) = NaProblem::build(tree, market);
    match lp::solve(&problem).expect("well-formed arbitrage program") {
        LpOutcome::Optimal { value, .. } => {
            assert!(value.is_zero(), "conic optimum must be zero, got {}", format_rational(&value));
            NaReport::Holds
        }
        LpOutcome::Infeasible { .. } => unreachable!("the zero strategy is always feasible"),
        LpOutcome::Unbounded { .. } => {
            let one = Rational::from_integer(1.into());
            let boxed = LpProblem {
                bounds: vec![(Some(Rational::zero()), Some(one)); problem.bounds.len()],
                ..problem
            };
            let point = match lp::solve(&boxed).expect("boxed arbitrage program") {
                LpOutcome::Optimal { point, value } => {
                    assert!(value > Rational::zero(), "scaled ray must stay profitable");
                    point
                }
                _ => unreachable!("boxed program is feasible and bounded"),
            };
            let strategy = shape.strategy(market, &point);
            let claims = evaluate_strategy(tree, market, &strategy)
                .expect("witness strategy is self-financing");
            let (leaf, component) = shape
                .leaves
                .iter()
                .find_map(|leaf| {
                    let (money, stock) = &claims[leaf];
                    if money > &Rational::zero() {
                        Some((leaf.clone(), Component::Money))
                    } else if stock > &Rational::zero() {
                        Some((leaf.clone(), Component::Stock))
                    } else {
                        None
                    }
                })
                .expect("positive optimum yields a profitable leaf");
            let measure = charging_measure(tree, &leaf);
            NaReport::Fails(Box::new(ArbitrageWitness { strategy, leaf, component, measure }))
        }
    }
}

/// One-period restriction of the market at an interior node: the node
/// becomes the root, its children the leaves, quotes carried over.
pub fn one_period_submarket(
    tree: &ScenarioTree,
    market: &BidAskProcess,
    node: &NodeId,
) -> (ScenarioTree, BidAskProcess) {
    let family = tree.family(node).expect("interior node").clone();
    let sub = ScenarioTree::one_period(family);
    let root = NodeId::root();
    let mut bid = BTreeMap::new();
    let mut ask = BTreeMap::new();
    bid.insert(root.clone(), market.bid(node).clone());
    ask.insert(root.clone(), market.ask(node).clone());
    for c in 0..tree.child_count(node).expect("interior node") {
        let child = node.child(c);
        bid.insert(root.child(c), market.bid(&child).clone());
        ask.insert(root.child(c), market.ask(&child).clone());
    }
    let sub_market = BidAskProcess::new(&sub, bid, ask).expect("quotes carried over");
    (sub, sub_market)
}

/// Direct sign enumeration for one-period markets: an arbitrage exists
/// iff a fixed long or short position gains quasi-surely with a strict
/// gain somewhere. Used as an independent oracle against `check_na`.
pub fn one_period_enumeration(tree: &ScenarioTree, market: &BidAskProcess) -> bool {
    assert_eq!(tree.depth(), 1, "enumeration covers one-period markets only");
    let root = NodeId::root();
    let charged = tree.charged_children(&root).expect("interior root");
    let long = charged.iter().all(|&c| market.bid(&root.child(c)) >= market.ask(&root))
        && charged.iter().any(|&c| market.bid(&root.child(c)) > market.ask(&root));
    let short = charged.iter().all(|&c| market.ask(&root.child(c)) <= market.bid(&root))
        && charged.iter().any(|&c| market.ask(&root.child(c)) < market.bid(&root));
    long || short
}
