//! Markets described by per-node solvency cones.
//!
//! A position vector counts holdings in each asset; the node's cone holds
//! the positions that can be liquidated to zero there, and always contains
//! the nonnegative orthant. The backward recursion intersects each node's
//! dual cone with the hull of its charged children's, mirroring the
//! two-asset interval tightening one level up in generality. Three
//! checkers probe the market: exclusion of second-kind arbitrage (a
//! position solvent tomorrow under every model but not today), efficient
//! friction (full-dimensional dual cones), and strict no-arbitrage (no
//! attainable position that is solvent without being a riskless swap).

use crate::bidask::BidAskProcess;
use crate::cone::PolyCone;
use crate::lp::{self, Constraint, LpOutcome, LpProblem, Relation, Sense};
use crate::rational::{format_rational, Rational};
use crate::tree::{NodeId, ScenarioTree};
use num_traits::Zero;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConeMarketError {
    #[error("cone coverage: {0}")]
    Coverage(String),
    #[error("cone at {0} has the wrong dimension")]
    Dimension(NodeId),
    #[error("cone at {0} does not contain the nonnegative orthant")]
    OrthantEscapes(NodeId),
}

/// Per-node solvency cones over a scenario tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeMarket {
    dim: usize,
    cones: BTreeMap<NodeId, PolyCone>,
}

impl ConeMarket {
    pub fn new(
        tree: &ScenarioTree,
        dim: usize,
        cones: BTreeMap<NodeId, PolyCone>,
    ) -> Result<Self, ConeMarketError> {
        for node in tree.all_nodes() {
            let Some(cone) = cones.get(&node) else {
                return Err(ConeMarketError::Coverage(format!("no cone at {node}")));
            };
            if cone.dim() != dim {
                return Err(ConeMarketError::Dimension(node));
            }
            if !PolyCone::orthant(dim).is_subset(cone).expect("dims checked") {
                return Err(ConeMarketError::OrthantEscapes(node));
            }
        }
        if cones.len() != tree.all_nodes().len() {
            return Err(ConeMarketError::Coverage(format!(
                "{} cones for {} nodes",
                cones.len(),
                tree.all_nodes().len()
            )));
        }
        Ok(ConeMarket { dim, cones })
    }

    /// Two-asset solvency cones from quoted prices: money and stock are
    /// freely disposable, a unit of stock can be bought for the ask and
    /// sold for the bid.
    pub fn from_bidask(tree: &ScenarioTree, market: &BidAskProcess) -> Self {
        let one = Rational::from_integer(1.into());
        let cones = tree
            .all_nodes()
            .into_iter()
            .map(|node| {
                let gens = vec![
                    vec![one.clone(), Rational::zero()],
                    vec![Rational::zero(), one.clone()],
                    vec![market.ask(&node).clone(), -one.clone()],
                    vec![-one.clone(), &one / market.bid(&node)],
                ];
                let cone = PolyCone::from_generators(2, gens).expect("two-dimensional quotes");
                (node, cone)
            })
            .collect();
        ConeMarket { dim: 2, cones }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cone(&self, node: &NodeId) -> &PolyCone {
        &self.cones[node]
    }

    pub fn cones(&self) -> &BTreeMap<NodeId, PolyCone> {
        &self.cones
    }
}

/// Result of the backward dual recursion. Every node keeps its tightened
/// dual and primal cone; interior nodes also record the hull of their
/// charged children's duals and its own dual, the cone of transfers that
/// stay solvent in every charged scenario one step ahead.
#[derive(Clone, Debug)]
pub struct ModifiedConeMarket {
    dim: usize,
    duals: BTreeMap<NodeId, PolyCone>,
    cones: BTreeMap<NodeId, PolyCone>,
    hulls: BTreeMap<NodeId, PolyCone>,
    transfers: BTreeMap<NodeId, PolyCone>,
}

impl ModifiedConeMarket {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Tightened dual cone at the node.
    pub fn dual(&self, node: &NodeId) -> &PolyCone {
        &self.duals[node]
    }

    /// Tightened solvency cone at the node.
    pub fn cone(&self, node: &NodeId) -> &PolyCone {
        &self.cones[node]
    }

    pub fn cones(&self) -> &BTreeMap<NodeId, PolyCone> {
        &self.cones
    }

    pub fn duals(&self) -> &BTreeMap<NodeId, PolyCone> {
        &self.duals
    }

    /// Hull of the charged children's tightened duals; interior nodes only.
    pub fn hull(&self, node: &NodeId) -> Option<&PolyCone> {
        self.hulls.get(node)
    }

    /// Transfers solvent at every charged child; interior nodes only.
    pub fn safe_transfers(&self, node: &NodeId) -> Option<&PolyCone> {
        self.transfers.get(node)
    }
}

/// Backward tightening pass. Leaves keep their dual cone; an interior
/// node intersects its dual with the hull of the charged children's
/// tightened duals, so a price direction survives only if it remains
/// available in some charged scenario at every later stage.
pub fn backward_modify_cones(tree: &ScenarioTree, cm: &ConeMarket) -> ModifiedConeMarket {
    let mut duals: BTreeMap<NodeId, PolyCone> = BTreeMap::new();
    let mut cones = BTreeMap::new();
    let mut hulls = BTreeMap::new();
    let mut transfers = BTreeMap::new();
    for node in tree.all_nodes().into_iter().rev() {
        let own = cm.cone(&node).dualize();
        let tightened = match tree.charged_children(&node) {
            Err(_) => own,
            Ok(charged) => {
                let mut hull = PolyCone::zero(cm.dim());
                for c in charged {
                    hull = hull.sum(&duals[&node.child(c)]).expect("equal dims");
                }
                transfers.insert(node.clone(), hull.dualize());
                let tight = own.intersect(&hull).expect("equal dims");
                hulls.insert(node.clone(), hull);
                tight
            }
        };
        cones.insert(node.clone(), tightened.dualize());
        duals.insert(node, tightened);
    }
    ModifiedConeMarket { dim: cm.dim(), duals, cones, hulls, transfers }
}

/// A position solvent at every charged child of `node` yet not solvent
/// at the node itself; `ray` escapes the node's cone strictly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Na2Witness {
    pub node: NodeId,
    pub ray: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Na2Report {
    Holds,
    Fails(Vec<Na2Witness>),
}

impl Na2Report {
    pub fn holds(&self) -> bool {
        matches!(self, Na2Report::Holds)
    }
}

/// Nodewise exclusion of second-kind arbitrage for the supplied cone
/// assignment: at every non-polar interior node, anything solvent at all
/// charged children must already be solvent at the node.
pub fn check_na2(tree: &ScenarioTree, cones: &BTreeMap<NodeId, PolyCone>) -> Na2Report {
    let mut failures = Vec::new();
    for node in tree.all_nodes() {
        if tree.is_polar(&node) {
            continue;
        }
        let Ok(charged) = tree.charged_children(&node) else {
            continue;
        };
        let mut tomorrow: Option<PolyCone> = None;
        for c in charged {
            let child = &cones[&node.child(c)];
            tomorrow = Some(match tomorrow {
                None => child.clone(),
                Some(acc) => acc.intersect(child).expect("equal dims"),
            });
        }
        let tomorrow = tomorrow.expect("charged set is nonempty");
        let today = &cones[&node];
        if let Some(ray) = tomorrow.escape_ray(today).expect("equal dims") {
            assert!(tomorrow.contains(&ray) && !today.contains(&ray));
            failures.push(Na2Witness { node, ray });
        }
    }
    if failures.is_empty() {
        Na2Report::Holds
    } else {
        Na2Report::Fails(failures)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EfReport {
    Holds,
    Fails(Vec<NodeId>),
}

impl EfReport {
    pub fn holds(&self) -> bool {
        matches!(self, EfReport::Holds)
    }
}

/// Efficient friction for the supplied cone assignment: the dual cone
/// must be full dimensional at every non-polar node, equivalently the
/// cone contains no line.
pub fn check_efficient_friction(
    tree: &ScenarioTree,
    cones: &BTreeMap<NodeId, PolyCone>,
) -> EfReport {
    let flat: Vec<NodeId> = tree
        .all_nodes()
        .into_iter()
        .filter(|node| !tree.is_polar(node))
        .filter(|node| !cones[node].dualize().interior_point().full_dim)
        .collect();
    if flat.is_empty() {
        EfReport::Holds
    } else {
        EfReport::Fails(flat)
    }
}

/// An attainable position that is solvent at horizon `time` without
/// being a riskless swap: `transfers` lists the throwaway at each
/// contributing node, `positions` the accumulated holdings at the
/// horizon nodes, and `node` a horizon node whose position leaves the
/// lineality space of its cone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NasWitness {
    pub time: usize,
    pub transfers: BTreeMap<NodeId, Vec<Rational>>,
    pub positions: BTreeMap<NodeId, Vec<Rational>>,
    pub node: NodeId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NasReport {
    Holds,
    Fails(Box<NasWitness>),
}

impl NasReport {
    pub fn holds(&self) -> bool {
        matches!(self, NasReport::Holds)
    }
}

/// Variable layout for one strict no-arbitrage program: per contributing
/// node, one coefficient for each generator of its cone.
struct NasProblem {
    vars: Vec<(NodeId, usize)>,
    base: BTreeMap<NodeId, usize>,
}

impl NasProblem {
    /// Transfers are nonpositive combinations of the node's own cone
    /// generators; the accumulated position must satisfy the horizon
    /// cone's halfspaces, and the objective rewards positions that a
    /// relative-interior dual functional can see, which is exactly what
    /// membership in the lineality space forbids.
    fn build(tree: &ScenarioTree, cm: &ConeMarket, time: usize) -> (Self, Vec<NodeId>, LpProblem) {
        let mut vars = Vec::new();
        let mut base = BTreeMap::new();
        let mut total = 0usize;
        for node in tree.all_nodes() {
            if node.time() <= time && !tree.is_polar(&node) {
                let arity = cm.cone(&node).generators().len();
                base.insert(node.clone(), total);
                vars.push((node, arity));
                total += arity;
            }
        }
        let horizon = tree.non_polar_nodes_at(time);

        let mut objective = vec![Rational::zero(); total];
        let mut constraints = Vec::new();
        for m in &horizon {
            let functional = cm.cone(m).dualize().interior_point().point;
            let mut rows: Vec<Vec<Rational>> =
                cm.cone(m).halfspaces().iter().map(|_| vec![Rational::zero(); total]).collect();
            for anc in m.prefixes() {
                let Some(&start) = base.get(&anc) else {
                    continue;
                };
                for (i, g) in cm.cone(&anc).generators().iter().enumerate() {
                    objective[start + i] = &objective[start + i] - dot(&functional, g);
                    for (row, a) in rows.iter_mut().zip(cm.cone(m).halfspaces()) {
                        row[start + i] = -dot(a, g);
                    }
                }
            }
            for row in rows {
                constraints.push(Constraint::new(row, Relation::Ge, Rational::zero()));
            }
        }
        let problem = LpProblem {
            sense: Sense::Maximize,
            objective,
            constraints,
            bounds: vec![(Some(Rational::zero()), None); total],
        };
        (NasProblem { vars, base }, horizon, problem)
    }

    fn transfers(&self, cm: &ConeMarket, point: &[Rational]) -> BTreeMap<NodeId, Vec<Rational>> {
        let mut out = BTreeMap::new();
        for (node, arity) in &self.vars {
            let start = self.base[node];
            let mut xi = vec![Rational::zero(); cm.dim()];
            for (i, g) in cm.cone(node).generators().iter().enumerate().take(*arity) {
                for (x, gj) in xi.iter_mut().zip(g) {
                    *x = &*x - &(&point[start + i] * gj);
                }
            }
            out.insert(node.clone(), xi);
        }
        out
    }
}

/// Strict no-arbitrage: for every horizon, the only attainable positions
/// that are solvent everywhere are riskless swaps. The feasible set is a
/// cone, so the optimum is either zero or unbounded; a bounded re-solve
/// of an unbounded program produces the finite witness.
pub fn check_nas(tree: &ScenarioTree, cm: &ConeMarket) -> NasReport {
    for time in 0..=tree.depth() {
        let (shape, horizon, problem) = NasProblem::build(tree, cm, time);
        match lp::solve(&problem).expect("well-formed solvency program") {
            LpOutcome::Optimal { value, .. } => {
                assert!(
                    value.is_zero(),
                    "conic optimum must be zero, got {}",
                    format_rational(&value)
                );
            }
            LpOutcome::Infeasible { .. } => unreachable!("the zero transfer is always feasible"),
            LpOutcome::Unbounded { .. } => {
                let one = Rational::from_integer(1.into());
                let boxed = LpProblem {
                    bounds: vec![(Some(Rational::zero()), Some(one)); problem.bounds.len()],
                    ..problem
                };
                let point = match lp::solve(&boxed).expect("boxed solvency program") {
                    LpOutcome::Optimal { point, value } => {
                        assert!(value > Rational::zero(), "scaled ray must stay profitable");
                        point
                    }
                    _ => unreachable!("boxed program is feasible and bounded"),
                };
                let transfers = shape.transfers(cm, &point);
                let mut positions = BTreeMap::new();
                let mut culprit = None;
                for m in &horizon {
                    let mut f = vec![Rational::zero(); cm.dim()];
                    for anc in m.prefixes() {
                        if let Some(xi) = transfers.get(&anc) {
                            for (fi, x) in f.iter_mut().zip(xi) {
                                *fi = &*fi + x;
                            }
                        }
                    }
                    assert!(cm.cone(m).contains(&f), "witness must be solvent at {m}");
                    let functional = cm.cone(m).dualize().interior_point().point;
                    if culprit.is_none() && dot(&functional, &f) > Rational::zero() {
                        culprit = Some(m.clone());
                    }
                    positions.insert(m.clone(), f);
                }
                let node = culprit.expect("positive objective names a horizon node");
                for (n, xi) in &transfers {
                    let back: Vec<Rational> = xi.iter().map(|x| -x).collect();
                    assert!(cm.cone(n).contains(&back), "transfer at {n} must be a throwaway");
                }
                return NasReport::Fails(Box::new(NasWitness { time, transfers, positions, node }));
            }
        }
    }
    NasReport::Holds
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
