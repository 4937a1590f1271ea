//! Forward construction of consistent price systems.
//!
//! Given a viable market (no crossed intervals after the backward pass)
//! and a reference model P, the builder walks the tree from the root and
//! extends the price one period at a time, producing a measure Q that
//! dominates P, a price process S̃ that is an exact Q-martingale inside
//! the tightened intervals, and a weight process λ recording how close
//! each step had to hug the interval ends. The weight run structure is a
//! checkable property of its own: once λ hits 0 the lower bound stays
//! flat until λ leaves 0 again, and symmetrically at 1.

use crate::bidask::{backward_modify, BidAskProcess, ModifiedProcess};
use crate::rational::{format_rational, rat, Rational};
use crate::tree::{Kernel, NodeId, ScenarioTree, TreeMeasure};
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// How a node's price relates to the reachable price range one step out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtensionCase {
    /// Node is unreachable or its interval is crossed; filler values only.
    Vacuous,
    /// Price sits on the smallest reachable lower bound, strictly below
    /// the largest upper bound.
    AtLower,
    /// Mirror image: price on the largest reachable upper bound.
    AtUpper,
    /// Every reachable child interval collapses onto the price.
    Pinched,
    /// Price strictly between the extreme bounds; a two-kernel mix keeps
    /// the martingale identity with room on both sides.
    Interior,
}

impl ExtensionCase {
    pub fn as_str(self) -> &'static str {
        match self {
            ExtensionCase::Vacuous => "vacuous",
            ExtensionCase::AtLower => "at_lower",
            ExtensionCase::AtUpper => "at_upper",
            ExtensionCase::Pinched => "pinched",
            ExtensionCase::Interior => "interior",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "vacuous" => ExtensionCase::Vacuous,
            "at_lower" => ExtensionCase::AtLower,
            "at_upper" => ExtensionCase::AtUpper,
            "pinched" => ExtensionCase::Pinched,
            "interior" => ExtensionCase::Interior,
            _ => return None,
        })
    }
}

impl fmt::Display for ExtensionCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
pub enum CpsError {
    #[error("no-arbitrage violated at {node}: {detail}")]
    NaViolated { node: NodeId, detail: String },
    #[error("not an interior point")]
    NotInterior,
    #[error("price outside the viable interval at {0}")]
    PriceOutOfRange(NodeId),
}

/// The two tilted kernels behind an interior extension, with their
/// signed expectation gaps and the mixing weight that cancels them.
#[derive(Clone, Debug)]
pub struct PairSelection {
    pub toward_upper: Kernel,
    pub toward_lower: Kernel,
    /// `E[upper]` under `toward_upper`, minus the price; positive.
    pub gain: Rational,
    /// `E[lower]` under `toward_lower`, minus the price; negative.
    pub loss: Rational,
    /// `loss / (loss - gain)`, strictly between 0 and 1.
    pub weight: Rational,
}

/// Tilt `u` toward the point mass at `target` until the expectation of
/// `values` crosses `s` in the direction given by `want_above`. The tilt
/// sizes 1/2, 3/4, 7/8, ... always terminate because the target's value
/// lies strictly on the far side of `s`.
fn tilt_until(
    u: &Kernel,
    target: usize,
    values: &[Rational],
    s: &Rational,
    want_above: bool,
) -> (Kernel, Rational) {
    let delta = Kernel::delta(u.arity(), target);
    let mut alpha = rat(1, 2);
    loop {
        let q = delta.mix(u, &alpha);
        let e = q.expectation(values);
        if (want_above && &e > s) || (!want_above && &e < s) {
            return (q, e);
        }
        alpha = (Rational::one() + alpha) / Rational::from_integer(2.into());
    }
}

/// Deterministic choice of the interior-extension pair at a node whose
/// price `s` lies strictly between the extreme reachable bounds. Both
/// kernels are supported on exactly the reachable children.
pub fn select_pair(
    tree: &ScenarioTree,
    node: &NodeId,
    s: &Rational,
    lower: &[Rational],
    upper: &[Rational],
) -> Result<PairSelection, CpsError> {
    let charged = tree.charged_children(node).expect("interior node");
    let a = charged.iter().map(|&c| &lower[c]).min().expect("reachable child");
    let b = charged.iter().map(|&c| &upper[c]).max().expect("reachable child");
    if !(a < s && s < b) {
        return Err(CpsError::NotInterior);
    }
    let arity = lower.len();
    let u = Kernel::uniform_on(arity, &charged);
    let highest = charged
        .iter()
        .copied()
        .reduce(|best, c| if upper[c] > upper[best] { c } else { best })
        .expect("reachable child");
    let lowest = charged
        .iter()
        .copied()
        .reduce(|best, c| if lower[c] < lower[best] { c } else { best })
        .expect("reachable child");

    let (toward_upper, e_up) = tilt_until(&u, highest, upper, s, true);
    let (toward_lower, e_down) = tilt_until(&u, lowest, lower, s, false);
    let gain = e_up - s;
    let loss = e_down - s;
    let weight = &loss / (&loss - &gain);
    debug_assert!(
        (&weight * &gain + (Rational::one() - &weight) * &loss).is_zero(),
        "mixing weight must cancel the expectation gaps"
    );
    debug_assert_eq!(toward_upper.support(), charged);
    debug_assert_eq!(toward_lower.support(), charged);
    Ok(PairSelection { toward_upper, toward_lower, gain, loss, weight })
}

/// One-step extension outcome at a node: the transition kernel of Q, the
/// weight, and the next-period prices (indexed by child).
#[derive(Clone, Debug)]
pub struct NodeExtension {
    pub case: ExtensionCase,
    pub kernel: Kernel,
    pub weight: Rational,
    pub child_prices: Vec<Rational>,
}

/// Extends the price `s` at one node. Boundary cases pin next-period
/// prices to the touching bound and assert the bound is flat across all
/// reachable children; a failed assertion is an arbitrage symptom and is
/// reported as such. Children the kernel does not charge receive the
/// interval midpoint, which the martingale identity never sees.
pub fn extend_node(
    tree: &ScenarioTree,
    node: &NodeId,
    s: &Rational,
    modified: &ModifiedProcess,
    p: &Kernel,
) -> Result<NodeExtension, CpsError> {
    let x = modified.lower(node);
    let y = modified.upper(node);
    let arity = tree.child_count(node).expect("interior node");
    let lower: Vec<Rational> = (0..arity).map(|c| modified.lower(&node.child(c)).clone()).collect();
    let upper: Vec<Rational> = (0..arity).map(|c| modified.upper(&node.child(c)).clone()).collect();
    let midpoints: Vec<Rational> =
        (0..arity).map(|c| (&lower[c] + &upper[c]) / Rational::from_integer(2.into())).collect();

    if x > y {
        return Ok(NodeExtension {
            case: ExtensionCase::Vacuous,
            kernel: p.clone(),
            weight: rat(1, 2),
            child_prices: midpoints,
        });
    }
    if s < x || s > y {
        return Err(CpsError::PriceOutOfRange(node.clone()));
    }
    let charged = tree.charged_children(node).expect("interior node");
    let a = charged.iter().map(|&c| &lower[c]).min().expect("reachable child").clone();
    let b = charged.iter().map(|&c| &upper[c]).max().expect("reachable child").clone();

    let flat_bound = |bound: &[Rational], which: &str| -> Result<(), CpsError> {
        for &c in &charged {
            if &bound[c] != s {
                return Err(CpsError::NaViolated {
                    node: node.clone(),
                    detail: format!(
                        "{which} bound {} at child {c} differs from the pinned price {}",
                        format_rational(&bound[c]),
                        format_rational(s)
                    ),
                });
            }
        }
        Ok(())
    };

    match (&a == s, &b == s) {
        (true, true) => {
            flat_bound(&lower, "lower")?;
            flat_bound(&upper, "upper")?;
            Ok(NodeExtension {
                case: ExtensionCase::Pinched,
                kernel: p.clone(),
                weight: rat(1, 2),
                child_prices: midpoints,
            })
        }
        (true, false) => {
            flat_bound(&lower, "lower")?;
            let child_prices =
                (0..arity)
                    .map(|c| {
                        if p.weight(c).is_zero() {
                            midpoints[c].clone()
                        } else {
                            lower[c].clone()
                        }
                    })
                    .collect();
            Ok(NodeExtension {
                case: ExtensionCase::AtLower,
                kernel: p.clone(),
                weight: Rational::zero(),
                child_prices,
            })
        }
        (false, true) => {
            flat_bound(&upper, "upper")?;
            let child_prices =
                (0..arity)
                    .map(|c| {
                        if p.weight(c).is_zero() {
                            midpoints[c].clone()
                        } else {
                            upper[c].clone()
                        }
                    })
                    .collect();
            Ok(NodeExtension {
                case: ExtensionCase::AtUpper,
                kernel: p.clone(),
                weight: Rational::one(),
                child_prices,
            })
        }
        (false, false) => {
            let pair = select_pair(tree, node, s, &lower, &upper)?;
            let kernel = pair.toward_upper.mix(&pair.toward_lower, &pair.weight);
            let co_weight = Rational::one() - &pair.weight;
            let child_prices = (0..arity)
                .map(|c| {
                    let q = kernel.weight(c);
                    if q.is_zero() {
                        return midpoints[c].clone();
                    }
                    (&pair.weight * pair.toward_upper.weight(c) * &upper[c]
                        + &co_weight * pair.toward_lower.weight(c) * &lower[c])
                        / q
                })
                .collect();
            Ok(NodeExtension {
                case: ExtensionCase::Interior,
                kernel,
                weight: pair.weight,
                child_prices,
            })
        }
    }
}

/// A consistent price system with its construction trace: the measure Q,
/// the price process, the weight process, the per-node case record, and
/// an admissible measure dominating Q.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CpsCertificate {
    pub measure: TreeMeasure,
    pub prices: BTreeMap<NodeId, Rational>,
    pub weights: BTreeMap<NodeId, Rational>,
    pub cases: BTreeMap<NodeId, ExtensionCase>,
    pub dominating: TreeMeasure,
}

/// Builds a consistent price system dominating `p`, or reports the node
/// whose diagnostics rule one out. `p` is trusted to be admissible;
/// callers holding untrusted input should run `validate_measure` first.
pub fn construct_cps(
    tree: &ScenarioTree,
    market: &BidAskProcess,
    p: &TreeMeasure,
) -> Result<CpsCertificate, CpsError> {
    let modified = backward_modify(tree, market);
    if let Some(node) = modified.violations().first() {
        return Err(CpsError::NaViolated {
            node: node.clone(),
            detail: format!(
                "price interval crossed: lower {} exceeds upper {}",
                format_rational(modified.lower(node)),
                format_rational(modified.upper(node))
            ),
        });
    }

    let root = NodeId::root();
    let mut prices = BTreeMap::new();
    let s0 = if modified.lower(&root) < modified.upper(&root) {
        modified.midpoint(&root)
    } else {
        modified.lower(&root).clone()
    };
    prices.insert(root, s0);

    let mut weights = BTreeMap::new();
    let mut cases = BTreeMap::new();
    let mut kernels = BTreeMap::new();
    // Lexicographic node order visits parents before children, so the
    // price at each node is in place before its own extension runs.
    for node in tree.all_nodes() {
        if tree.is_leaf(&node) {
            continue;
        }
        let pk = p.kernel(&node).expect("measure covers interior nodes");
        let ext = if tree.is_polar(&node) {
            let arity = tree.child_count(&node).expect("interior node");
            NodeExtension {
                case: ExtensionCase::Vacuous,
                kernel: pk.clone(),
                weight: rat(1, 2),
                child_prices: (0..arity).map(|c| modified.midpoint(&node.child(c))).collect(),
            }
        } else {
            extend_node(tree, &node, &prices[&node], &modified, pk)?
        };
        for (c, price) in ext.child_prices.into_iter().enumerate() {
            prices.insert(node.child(c), price);
        }
        weights.insert(node.clone(), ext.weight);
        cases.insert(node.clone(), ext.case);
        kernels.insert(node.clone(), ext.kernel);
    }
    let measure = TreeMeasure::new(kernels);
    let dominating = tree
        .dominated_by_family(&measure)
        .expect("extension kernels charge only reachable children");
    Ok(CpsCertificate { measure, prices, weights, cases, dominating })
}

/// Violation list from a certificate check; empty means the certificate
/// stands.
#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    violations: Vec<String>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violations(&self) -> &[String] {
        &self.violations
    }

    pub(crate) fn flag(&mut self, message: String) {
        self.violations.push(message);
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            return write!(f, "certificate verified");
        }
        writeln!(f, "{} violation(s):", self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  {v}")?;
        }
        Ok(())
    }
}

/// Re-checks a certificate from scratch against the market: coverage,
/// exact martingale identities, price-range membership wherever Q puts
/// mass, domination of `p`, admissibility of the dominating witness, and
/// weight/case agreement. Never panics on foreign certificates.
pub fn verify_cps(
    tree: &ScenarioTree,
    market: &BidAskProcess,
    cert: &CpsCertificate,
    p: &TreeMeasure,
) -> VerifyReport {
    let mut report = VerifyReport::default();
    for node in tree.all_nodes() {
        if !cert.prices.contains_key(&node) {
            report.flag(format!("no price recorded at {node}"));
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
        if !cert.weights.contains_key(&node) {
            report.flag(format!("no weight recorded at {node}"));
        }
        if !cert.cases.contains_key(&node) {
            report.flag(format!("no case recorded at {node}"));
        }
        match cert.dominating.kernel(&node) {
            Some(k) if k.arity() == arity => {}
            _ => report.flag(format!("dominating witness incomplete at {node}")),
        }
    }
    if !report.ok() {
        return report;
    }

    let modified = backward_modify(tree, market);
    for node in tree.all_nodes() {
        if !cert.measure.charges(&node) {
            continue;
        }
        let price = &cert.prices[&node];
        if price < market.bid(&node) || price > market.ask(&node) {
            report.flag(format!(
                "price {} leaves the quoted spread at {node}",
                format_rational(price)
            ));
        }
        if price < modified.lower(&node) || price > modified.upper(&node) {
            report.flag(format!(
                "price {} leaves the tightened interval at {node}",
                format_rational(price)
            ));
        }
        if !tree.is_leaf(&node) {
            let kernel = cert.measure.kernel(&node).expect("coverage checked");
            let child_prices: Vec<Rational> =
                (0..kernel.arity()).map(|c| cert.prices[&node.child(c)].clone()).collect();
            let expected = kernel.expectation(&child_prices);
            if &expected != price {
                report.flag(format!(
                    "martingale gap at {node}: expectation {} vs price {}",
                    format_rational(&expected),
                    format_rational(price)
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

    for (node, case) in &cert.cases {
        let weight = &cert.weights[node];
        let in_unit = &Rational::zero() <= weight && weight <= &Rational::one();
        if !in_unit {
            report.flag(format!("weight outside [0, 1] at {node}"));
            continue;
        }
        // The per-case weight sets leave 0 and 1 to the boundary cases
        // alone, so this also checks the reverse directions: weight 0
        // only ever comes with AtLower, weight 1 only with AtUpper.
        let consistent = match case {
            ExtensionCase::AtLower => weight.is_zero(),
            ExtensionCase::AtUpper => weight.is_one(),
            ExtensionCase::Pinched | ExtensionCase::Vacuous => weight == &rat(1, 2),
            ExtensionCase::Interior => weight > &Rational::zero() && weight < &Rational::one(),
        };
        if !consistent {
            report.flag(format!(
                "weight {} contradicts case {case} at {node}",
                format_rational(weight)
            ));
        }
    }
    report
}

/// Checks the weight-run structure of a certificate along every
/// reachable leaf path: wherever the weight enters 0 the tightened lower
/// bound collapses onto the upper one and stays flat until the weight
/// leaves 0 (including the exit step), mirrored at 1; and next-period
/// prices sit on the matching bound, or strictly inside a nondegenerate
/// interval, at every step the measure charges.
pub fn verify_iiprime(
    tree: &ScenarioTree,
    modified: &ModifiedProcess,
    cert: &CpsCertificate,
) -> VerifyReport {
    let mut report = VerifyReport::default();
    let horizon = tree.depth();
    for leaf in tree.leaves() {
        if tree.is_polar(&leaf) {
            continue;
        }
        let path = leaf.prefixes();
        let mut weights = Vec::with_capacity(horizon);
        for node in &path[..horizon] {
            match cert.weights.get(node) {
                Some(w) => weights.push(w.clone()),
                None => {
                    report.flag(format!("no weight recorded at {node}"));
                }
            }
        }
        if weights.len() < horizon {
            continue;
        }

        let mut check_runs = |target: &Rational, flat_on_lower: bool| {
            let bound = |node: &NodeId| {
                if flat_on_lower {
                    modified.lower(node)
                } else {
                    modified.upper(node)
                }
            };
            let mut t = 0;
            while t < horizon {
                if &weights[t] != target {
                    t += 1;
                    continue;
                }
                let entry = &path[t];
                if modified.lower(entry) != modified.upper(entry) {
                    report.flag(format!(
                        "interval not collapsed at {entry} where the weight enters {}",
                        format_rational(target)
                    ));
                }
                let mut end = t;
                while end < horizon && &weights[end] == target {
                    end += 1;
                }
                // The flat stretch covers the exit step (or the leaf).
                for node in &path[t..=end.min(horizon)] {
                    if bound(node) != bound(entry) {
                        report.flag(format!(
                            "bound moves from {} to {} inside a weight-{} run at {node}",
                            format_rational(bound(entry)),
                            format_rational(bound(node)),
                            format_rational(target)
                        ));
                    }
                }
                t = end;
            }
        };
        check_runs(&Rational::zero(), true);
        check_runs(&Rational::one(), false);

        let mut charged_so_far = true;
        for t in 0..horizon {
            let node = &path[t];
            let child = &path[t + 1];
            let kernel = match cert.measure.kernel(node) {
                Some(k) => k,
                None => break,
            };
            charged_so_far = charged_so_far && !kernel.weight(child.path()[t]).is_zero();
            if !charged_so_far {
                break;
            }
            let price = match cert.prices.get(child) {
                Some(s) => s,
                None => continue,
            };
            let (lo, hi) = (modified.lower(child), modified.upper(child));
            let w = &weights[t];
            if w.is_zero() {
                if price != lo {
                    report.flag(format!(
                        "price {} off the lower bound {} after a zero weight at {child}",
                        format_rational(price),
                        format_rational(lo)
                    ));
                }
            } else if w.is_one() {
                if price != hi {
                    report.flag(format!(
                        "price {} off the upper bound {} after a unit weight at {child}",
                        format_rational(price),
                        format_rational(hi)
                    ));
                }
            } else if lo < hi && !(lo < price && price < hi) {
                report.flag(format!(
                    "price {} not strictly inside [{}, {}] at {child}",
                    format_rational(price),
                    format_rational(lo),
                    format_rational(hi)
                ));
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;
    use crate::rational::int;
    use crate::tree::PriorFamily;

    fn delta_measure(tree: &ScenarioTree) -> TreeMeasure {
        TreeMeasure::from_selector(tree, |_| 0).unwrap()
    }

    /// Smallest tilt size in the 1/2, 3/4, 7/8, ... ladder that pushes
    /// the expectation strictly past `s`, found by brute force.
    fn grid_oracle(
        u: &Kernel,
        target: usize,
        values: &[Rational],
        s: &Rational,
        above: bool,
    ) -> Kernel {
        let delta = Kernel::delta(u.arity(), target);
        let mut alpha = rat(1, 2);
        for _ in 0..64 {
            let q = delta.mix(u, &alpha);
            let e = q.expectation(values);
            if (above && &e > s) || (!above && &e < s) {
                return q;
            }
            alpha = (Rational::one() + alpha) / int(2);
        }
        panic!("oracle failed to terminate");
    }

    #[test]
    fn pair_on_the_binary_market_matches_hand_values() {
        let (tree, _) = instances::binary_frictionless();
        let values = [int(1), int(3)];
        let s = int(2);
        let pair = select_pair(&tree, &NodeId::root(), &s, &values, &values).unwrap();

        assert_eq!(pair.toward_upper.weights(), &[rat(1, 4), rat(3, 4)]);
        assert_eq!(pair.toward_lower.weights(), &[rat(3, 4), rat(1, 4)]);
        assert_eq!(pair.toward_upper.expectation(&values), rat(5, 2));
        assert_eq!(pair.toward_lower.expectation(&values), rat(3, 2));
        assert_eq!(pair.gain, rat(1, 2));
        assert_eq!(pair.loss, rat(-1, 2));
        assert_eq!(pair.weight, rat(1, 2));

        let u = Kernel::uniform_on(2, &tree.charged_children(&NodeId::root()).unwrap());
        assert_eq!(pair.toward_upper, grid_oracle(&u, 1, &values, &s, true));
        assert_eq!(pair.toward_lower, grid_oracle(&u, 0, &values, &s, false));
    }

    #[test]
    fn pair_on_a_single_child_degenerates_to_the_point_mass() {
        let (tree, _) = instances::shifted_spread();
        let pair = select_pair(&tree, &NodeId::root(), &rat(5, 2), &[int(2)], &[int(4)]).unwrap();
        assert_eq!(pair.toward_upper.weights(), &[int(1)]);
        assert_eq!(pair.toward_lower.weights(), &[int(1)]);
        assert_eq!(pair.gain, rat(3, 2));
        assert_eq!(pair.loss, rat(-1, 2));
        assert_eq!(pair.weight, rat(1, 4));
    }

    #[test]
    fn symmetric_values_give_the_symmetric_weight() {
        let family = PriorFamily::new(vec![Kernel::delta(2, 0), Kernel::delta(2, 1)]).unwrap();
        let tree = ScenarioTree::one_period(family);
        let values = [int(2), int(4)];
        let pair = select_pair(&tree, &NodeId::root(), &int(3), &values, &values).unwrap();
        assert_eq!(pair.weight, rat(1, 2));
        assert_eq!(pair.gain, rat(1, 2));
        assert_eq!(pair.loss, rat(-1, 2));
    }

    #[test]
    fn boundary_prices_are_rejected_by_pair_selection() {
        let (tree, _) = instances::shifted_spread();
        let err = select_pair(&tree, &NodeId::root(), &int(2), &[int(2)], &[int(4)]).unwrap_err();
        assert!(matches!(err, CpsError::NotInterior));
    }

    #[test]
    fn interior_extension_on_the_shifted_spread() {
        let (tree, market) = instances::shifted_spread();
        let modified = backward_modify(&tree, &market);
        let p = Kernel::delta(1, 0);
        let ext = extend_node(&tree, &NodeId::root(), &rat(5, 2), &modified, &p).unwrap();
        assert_eq!(ext.case, ExtensionCase::Interior);
        assert_eq!(ext.weight, rat(1, 4));
        assert_eq!(ext.kernel.weights(), &[int(1)]);
        assert_eq!(ext.child_prices, vec![rat(5, 2)]);
    }

    #[test]
    fn interior_extension_on_the_binary_market() {
        let (tree, market) = instances::binary_frictionless();
        let modified = backward_modify(&tree, &market);
        let p = Kernel::delta(2, 0);
        let ext = extend_node(&tree, &NodeId::root(), &int(2), &modified, &p).unwrap();
        assert_eq!(ext.case, ExtensionCase::Interior);
        assert_eq!(ext.kernel.weights(), &[rat(1, 2), rat(1, 2)]);
        assert_eq!(ext.child_prices, vec![int(1), int(3)]);
        assert_eq!(ext.kernel.expectation(&ext.child_prices), int(2));
    }

    #[test]
    fn collapsed_intervals_extend_by_pinning() {
        let tree = ScenarioTree::single_path(1);
        let mut price = BTreeMap::new();
        price.insert(NodeId::root(), int(3));
        price.insert(NodeId::root().child(0), int(3));
        let market = BidAskProcess::frictionless(&tree, price).unwrap();
        let modified = backward_modify(&tree, &market);
        let ext =
            extend_node(&tree, &NodeId::root(), &int(3), &modified, &Kernel::delta(1, 0)).unwrap();
        assert_eq!(ext.case, ExtensionCase::Pinched);
        assert_eq!(ext.weight, rat(1, 2));
        assert_eq!(ext.child_prices, vec![int(3)]);
    }

    #[test]
    fn certificate_on_the_shifted_spread_pins_the_midpoint_martingale() {
        let (tree, market) = instances::shifted_spread();
        let p = delta_measure(&tree);
        let cert = construct_cps(&tree, &market, &p).unwrap();

        let child = NodeId::root().child(0);
        assert_eq!(cert.prices[&NodeId::root()], rat(5, 2));
        assert_eq!(cert.prices[&child], rat(5, 2));
        assert_eq!(cert.weights[&NodeId::root()], rat(1, 4));
        assert_eq!(cert.cases[&NodeId::root()], ExtensionCase::Interior);
        assert_eq!(cert.measure, p);
        assert_eq!(cert.dominating, p);

        assert!(verify_cps(&tree, &market, &cert, &p).ok());
        let modified = backward_modify(&tree, &market);
        assert!(verify_iiprime(&tree, &modified, &cert).ok());
    }

    #[test]
    fn certificate_on_the_binary_market_dominates_each_branch() {
        let (tree, market) = instances::binary_frictionless();
        for branch in 0..2 {
            let p = TreeMeasure::from_selector(&tree, |_| branch).unwrap();
            let cert = construct_cps(&tree, &market, &p).unwrap();
            assert_eq!(
                cert.measure.kernel(&NodeId::root()).unwrap().weights(),
                &[rat(1, 2), rat(1, 2)]
            );
            assert_eq!(cert.prices[&NodeId::root()], int(2));
            assert_eq!(cert.prices[&NodeId::root().child(0)], int(1));
            assert_eq!(cert.prices[&NodeId::root().child(1)], int(3));
            assert_eq!(cert.weights[&NodeId::root()], rat(1, 2));
            assert!(tree.dominates(&cert.measure, &p));
            assert!(verify_cps(&tree, &market, &cert, &p).ok());
        }
    }

    #[test]
    fn crossed_market_reports_the_flagged_node() {
        let (tree, market) = instances::cross_period_trend();
        let p = delta_measure(&tree);
        match construct_cps(&tree, &market, &p) {
            Err(CpsError::NaViolated { node, detail }) => {
                assert_eq!(node, NodeId::root());
                assert!(detail.contains("7/2"), "unexpected detail: {detail}");
            }
            other => panic!("expected a crossed-interval failure, got {other:?}"),
        }
    }

    #[test]
    fn tampered_price_breaks_the_martingale_identity() {
        let (tree, market) = instances::shifted_spread();
        let p = delta_measure(&tree);
        let mut cert = construct_cps(&tree, &market, &p).unwrap();
        cert.prices.insert(NodeId::root().child(0), int(3));
        let report = verify_cps(&tree, &market, &cert, &p);
        assert!(!report.ok());
        assert!(report.violations().iter().any(|v| v.contains("martingale gap")));
    }

    #[test]
    fn tampered_measure_fails_only_the_martingale_check() {
        let (tree, market) = instances::binary_frictionless();
        let p = TreeMeasure::from_selector(&tree, |_| 0).unwrap();
        let mut cert = construct_cps(&tree, &market, &p).unwrap();
        let mut kernels = cert.measure.kernels().clone();
        kernels.insert(NodeId::root(), Kernel::delta(2, 0));
        cert.measure = TreeMeasure::new(kernels);

        let report = verify_cps(&tree, &market, &cert, &p);
        assert_eq!(report.violations().len(), 1, "violations: {report}");
        assert!(report.violations()[0].contains("martingale gap"));
    }

    #[test]
    fn flat_lower_bound_run_is_constructed_and_checked() {
        // Frictionless entry at 1, then spread (1,2) twice: the weight
        // stays at zero and the lower bound stays flat to the horizon.
        let tree = ScenarioTree::single_path(2);
        let nodes: Vec<NodeId> = (0..3).map(|t| NodeId::from_path(vec![0; t])).collect();
        let mut bid = BTreeMap::new();
        let mut ask = BTreeMap::new();
        for (t, node) in nodes.iter().enumerate() {
            bid.insert(node.clone(), int(1));
            ask.insert(node.clone(), if t == 0 { int(1) } else { int(2) });
        }
        let market = BidAskProcess::new(&tree, bid, ask).unwrap();
        let p = delta_measure(&tree);
        let cert = construct_cps(&tree, &market, &p).unwrap();

        for node in &nodes[..2] {
            assert_eq!(cert.cases[node], ExtensionCase::AtLower);
            assert_eq!(cert.weights[node], int(0));
        }
        for node in &nodes {
            assert_eq!(cert.prices[node], int(1));
        }
        assert!(verify_cps(&tree, &market, &cert, &p).ok());
        let modified = backward_modify(&tree, &market);
        assert!(verify_iiprime(&tree, &modified, &cert).ok());

        // Pretending the first step was interior demands strict price
        // interiority that a bound-hugging price cannot deliver.
        let mut bad = cert.clone();
        bad.weights.insert(nodes[1].clone(), rat(1, 2));
        let report = verify_iiprime(&tree, &modified, &bad);
        assert!(!report.ok());
        assert!(report.violations().iter().any(|v| v.contains("strictly inside")));
    }

    #[test]
    fn flat_upper_bound_run_mirrors_the_lower_one() {
        let tree = ScenarioTree::single_path(2);
        let nodes: Vec<NodeId> = (0..3).map(|t| NodeId::from_path(vec![0; t])).collect();
        let mut bid = BTreeMap::new();
        let mut ask = BTreeMap::new();
        for (t, node) in nodes.iter().enumerate() {
            bid.insert(node.clone(), if t == 0 { int(2) } else { int(1) });
            ask.insert(node.clone(), int(2));
        }
        let market = BidAskProcess::new(&tree, bid, ask).unwrap();
        let p = delta_measure(&tree);
        let cert = construct_cps(&tree, &market, &p).unwrap();

        for node in &nodes[..2] {
            assert_eq!(cert.cases[node], ExtensionCase::AtUpper);
            assert_eq!(cert.weights[node], int(1));
        }
        for node in &nodes {
            assert_eq!(cert.prices[node], int(2));
        }
        assert!(verify_cps(&tree, &market, &cert, &p).ok());
        let modified = backward_modify(&tree, &market);
        assert!(verify_iiprime(&tree, &modified, &cert).ok());
    }

    #[test]
    fn unreachable_subtree_gets_filler_values_without_harm() {
        // Child 1 is uncharged and its subtree has a crossed interval;
        // construction must still succeed and verify.
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
        let mut price = BTreeMap::new();
        for node in tree.all_nodes() {
            price.insert(node.clone(), int(1));
        }
        price.insert(NodeId::from_path(vec![1, 0]), int(5));
        let market = BidAskProcess::frictionless(&tree, price).unwrap();
        let p = delta_measure(&tree);

        let cert = construct_cps(&tree, &market, &p).unwrap();
        assert_eq!(cert.cases[&NodeId::from_path(vec![1])], ExtensionCase::Vacuous);
        assert_eq!(cert.cases[&NodeId::root()], ExtensionCase::Pinched);
        assert!(verify_cps(&tree, &market, &cert, &p).ok());
        let modified = backward_modify(&tree, &market);
        assert!(verify_iiprime(&tree, &modified, &cert).ok());
    }

    #[test]
    fn interior_prices_are_genuine_convex_combinations() {
        let (tree, market) = instances::binary_frictionless();
        let modified = backward_modify(&tree, &market);
        let pair =
            select_pair(&tree, &NodeId::root(), &int(2), &[int(1), int(3)], &[int(1), int(3)])
                .unwrap();
        let mix = pair.toward_upper.mix(&pair.toward_lower, &pair.weight);
        for c in 0..2 {
            let bound = &pair.weight * pair.toward_upper.weight(c);
            assert!(&bound <= mix.weight(c), "weight sandwich fails at child {c}");
        }
        let _ = modified;
    }
}
