//! Forward construction of strictly consistent price systems.
//!
//! The cone-market counterpart of the interval builder: given a market
//! whose tightened dual cones are full dimensional wherever the family
//! charges, the builder walks the tree from the root and splits the
//! running price vector across the charged children, one period at a
//! time. The output is a measure Q charging every reachable branch, a
//! price field Z that is an exact Q-martingale and sits strictly inside
//! the tightened dual cone at every node Q reaches, and the family
//! mixture dominating Q. Strict interiority is witnessed by a recorded
//! margin at each of those nodes, so a verifier can recheck the whole
//! certificate without rerunning any optimization.
//!
//! The split itself is one linear program per node. With parent price z
//! and charged children c, it looks for vectors w_c summing to z and a
//! common slack t with a(w_c) >= t for every defining halfspace a of the
//! child's tightened dual cone, normals scaled to unit 1-norm so the
//! slack means the same thing on every row. The child price is then
//! Z(c) = w_c / q(c) under the uniform kernel q on the charged set, and
//! the sum constraint turns into the martingale identity. A maximal t
//! that is still zero means some child cone cannot absorb its share of
//! z strictly, and no such price system exists through that node.

use crate::cone::PolyCone;
use crate::cone_market::{backward_modify_cones, check_efficient_friction, ConeMarket, EfReport};
use crate::cps::VerifyReport;
use crate::lp::{self, Constraint, LpOutcome, LpProblem, Relation, Sense};
use crate::rational::{format_rational, Rational};
use crate::tree::{Kernel, NodeId, ScenarioTree, TreeMeasure};
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Why no strictly consistent price system exists for a market.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ScpsError {
    /// The tightened dual cone at the node is not full dimensional, so
    /// no price can sit strictly inside it.
    #[error("no strict price system: tightened dual cone is flat at {0}")]
    FlatDual(NodeId),
    /// The split program found no strictly interior division of the
    /// parent price across the charged children.
    #[error("no strict price system: no interior split of the price at {0}")]
    Stalled(NodeId),
}

/// One forward step: the kernel on the children, a price for each
/// charged child, and the slack the split achieved.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScpsExtension {
    pub kernel: Kernel,
    pub child_prices: BTreeMap<usize, Vec<Rational>>,
    pub slack: Rational,
}

/// Splits `price` across the charged children so that each share lands
/// strictly inside the corresponding dual cone in `child_duals`, which
/// lists one cone per child in child order. The kernel is uniform on
/// the charged set and the returned prices are the shares rescaled by
/// it, so the kernel expectation of the child prices reproduces `price`
/// exactly. Fails when even the best split leaves some share on a cone
/// boundary.
pub fn extend_scps_node(
    node: &NodeId,
    price: &[Rational],
    child_duals: &[&PolyCone],
    charged: &BTreeSet<usize>,
) -> Result<ScpsExtension, ScpsError> {
    let dim = price.len();
    let arity = child_duals.len();
    let order: Vec<usize> = charged.iter().copied().collect();
    let vars = order.len() * dim + 1;
    let slack_var = vars - 1;

    let mut constraints = Vec::new();
    for (block, &c) in order.iter().enumerate() {
        for normal in child_duals[c].halfspaces() {
            let scale: Rational = normal.iter().map(|v| v.abs()).sum();
            let mut coeffs = vec![Rational::zero(); vars];
            for (j, a) in normal.iter().enumerate() {
                coeffs[block * dim + j] = a / &scale;
            }
            coeffs[slack_var] = -Rational::one();
            constraints.push(Constraint::new(coeffs, Relation::Ge, Rational::zero()));
        }
    }
    for j in 0..dim {
        let mut coeffs = vec![Rational::zero(); vars];
        for block in 0..order.len() {
            coeffs[block * dim + j] = Rational::one();
        }
        constraints.push(Constraint::new(coeffs, Relation::Eq, price[j].clone()));
    }

    let mut objective = vec![Rational::zero(); vars];
    objective[slack_var] = Rational::one();
    let mut bounds = vec![(None, None); vars];
    bounds[slack_var] = (None, Some(Rational::one()));

    let problem = LpProblem { sense: Sense::Maximize, objective, constraints, bounds };
    let LpOutcome::Optimal { point, value } = lp::solve(&problem).expect("well formed split")
    else {
        // The slack can always retreat to an arbitrarily negative value
        // and it is capped above, so the program is feasible and bounded.
        unreachable!("split program is feasible and bounded");
    };
    if !value.is_positive() {
        return Err(ScpsError::Stalled(node.clone()));
    }

    let kernel = Kernel::uniform_on(arity, charged);
    let count = Rational::from_integer(order.len().into());
    let child_prices = order
        .iter()
        .enumerate()
        .map(|(block, &c)| {
            let share = &point[block * dim..(block + 1) * dim];
            (c, share.iter().map(|v| v * &count).collect())
        })
        .collect();
    Ok(ScpsExtension { kernel, child_prices, slack: value })
}

/// The output of the forward construction: the measure Q, the price
/// field Z, the family mixture dominating Q, and the interiority margin
/// of Z at every node Q reaches.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScpsCertificate {
    pub measure: TreeMeasure,
    pub prices: BTreeMap<NodeId, Vec<Rational>>,
    pub dominating: TreeMeasure,
    pub slacks: BTreeMap<NodeId, Rational>,
}

/// Builds a strictly consistent price system for the market, or reports
/// the node where none can exist. The reference model `p` must live in
/// the family hulls; the constructed measure dominates it by charging
/// every reachable child uniformly. Polar subtrees get filler prices
/// from their own dual cones so the certificate covers the whole tree,
/// but nothing is claimed about them.
pub fn construct_scps(
    tree: &ScenarioTree,
    market: &ConeMarket,
    p: &TreeMeasure,
) -> Result<ScpsCertificate, ScpsError> {
    tree.validate_measure(p).expect("reference model must live in the family hulls");
    let modified = backward_modify_cones(tree, market);
    if let EfReport::Fails(nodes) = check_efficient_friction(tree, modified.cones()) {
        return Err(ScpsError::FlatDual(nodes[0].clone()));
    }

    let root = NodeId::root();
    let mut prices = BTreeMap::new();
    let mut kernels = BTreeMap::new();
    prices.insert(root.clone(), modified.dual(&root).interior_point().point);

    for node in tree.all_nodes() {
        if tree.is_leaf(&node) {
            continue;
        }
        let arity = tree.child_count(&node).expect("interior node");
        let charged = tree.charged_children(&node).expect("interior node");
        kernels.insert(node.clone(), Kernel::uniform_on(arity, &charged));

        let filler = |c: usize| {
            let child = node.child(c);
            let point = modified.dual(&child).interior_point().point;
            (child, point)
        };
        if tree.is_polar(&node) {
            prices.extend((0..arity).map(filler));
            continue;
        }
        let parent_price = prices[&node].clone();
        let duals: Vec<&PolyCone> = (0..arity).map(|c| modified.dual(&node.child(c))).collect();
        let ext = extend_scps_node(&node, &parent_price, &duals, &charged)?;
        for (c, z) in ext.child_prices {
            prices.insert(node.child(c), z);
        }
        prices.extend((0..arity).filter(|c| !charged.contains(c)).map(filler));
    }

    let mut slacks = BTreeMap::new();
    for node in tree.all_nodes() {
        if tree.is_polar(&node) {
            continue;
        }
        let margin = dual_margin(modified.dual(&node), &prices[&node]);
        assert!(margin.is_positive(), "constructed price lost interiority at {node}");
        slacks.insert(node, margin);
    }

    let measure = TreeMeasure::new(kernels);
    let dominating = tree
        .dominated_by_family(&measure)
        .expect("uniform kernel on the charged children stays dominated");
    debug_assert!(tree.dominates(&measure, p));
    Ok(ScpsCertificate { measure, prices, dominating, slacks })
}

/// Rechecks a certificate against the market from scratch: coverage,
/// strict interiority with the recorded margins, positivity, the exact
/// martingale identity under the certificate's own measure, and the
/// domination chain from the family mixture down to the reference
/// model. Nodes the measure never reaches are skipped.
pub fn verify_scps(
    tree: &ScenarioTree,
    market: &ConeMarket,
    cert: &ScpsCertificate,
    p: &TreeMeasure,
) -> VerifyReport {
    let mut report = VerifyReport::default();
    for node in tree.all_nodes() {
        match cert.prices.get(&node) {
            Some(z) if z.len() == market.dim() => {}
            Some(_) => report.flag(format!("price dimension mismatch at {node}")),
            None => report.flag(format!("no price recorded at {node}")),
        }
        if tree.is_leaf(&node) {
            continue;
        }
        let arity = tree.child_count(&node).expect("interior node");
        match cert.measure.kernel(&node) {
            Some(k) if k.arity() == arity => {}
            Some(_) => report.flag(format!("kernel arity mismatch at {node}")),
            None => report.flag(format!("no kernel recorded at {node}")),
        }
        match cert.dominating.kernel(&node) {
            Some(k) if k.arity() == arity => {}
            _ => report.flag(format!("dominating witness incomplete at {node}")),
        }
    }
    if !report.ok() {
        return report;
    }

    let modified = backward_modify_cones(tree, market);
    for node in tree.all_nodes() {
        if !cert.measure.charges(&node) {
            continue;
        }
        let price = &cert.prices[&node];
        let dual = modified.dual(&node);
        if !dual.strictly_contains(price) {
            report.flag(format!("price at {node} is not strictly inside the tightened dual cone"));
        }
        if price.iter().any(|z| !z.is_positive()) {
            report.flag(format!("price at {node} leaves the open orthant"));
        }
        match cert.slacks.get(&node) {
            Some(s) if s.is_positive() && *s == dual_margin(dual, price) => {}
            Some(_) => report.flag(format!("recorded margin is wrong at {node}")),
            None => report.flag(format!("no margin recorded at {node}")),
        }
        if !tree.is_leaf(&node) {
            let kernel = cert.measure.kernel(&node).expect("coverage checked");
            let expected = vector_expectation(kernel, &node, &cert.prices, market.dim());
            if &expected != price {
                report.flag(format!(
                    "martingale gap at {node}: expectation {} vs price {}",
                    fmt_vec(&expected),
                    fmt_vec(price)
                ));
            }
        }
    }

    if !tree.dominates(&cert.measure, p) {
        report.flag("constructed measure does not dominate the reference model".into());
    }
    if tree.dominated_by_family(&cert.measure).is_none() {
        report.flag("constructed measure charges unreachable children".into());
    } else {
        if !tree.dominates(&cert.dominating, &cert.measure) {
            report.flag("dominating witness does not dominate the constructed measure".into());
        }
        if tree.validate_measure(&cert.dominating).is_err() {
            report.flag("dominating witness leaves the family hulls".into());
        }
    }
    report
}

/// Smallest value of the cone's defining inequalities at `x`, normals
/// scaled to unit 1-norm. Positive exactly when `x` is strictly inside.
fn dual_margin(cone: &PolyCone, x: &[Rational]) -> Rational {
    cone.halfspaces()
        .iter()
        .map(|normal| {
            let scale: Rational = normal.iter().map(|v| v.abs()).sum();
            normal.iter().zip(x).map(|(a, v)| a * v).sum::<Rational>() / scale
        })
        .min()
        .unwrap_or_else(Rational::one)
}

fn vector_expectation(
    kernel: &Kernel,
    node: &NodeId,
    prices: &BTreeMap<NodeId, Vec<Rational>>,
    dim: usize,
) -> Vec<Rational> {
    let mut acc = vec![Rational::zero(); dim];
    for c in 0..kernel.arity() {
        let weight = kernel.weight(c);
        if weight.is_zero() {
            continue;
        }
        for (slot, z) in acc.iter_mut().zip(&prices[&node.child(c)]) {
            *slot += weight * z;
        }
    }
    acc
}

fn fmt_vec(x: &[Rational]) -> String {
    let parts: Vec<String> = x.iter().map(format_rational).collect();
    format!("({})", parts.join(", "))
}
