//! Finite scenario trees with nodewise prior families.
//!
//! A node is addressed by its path of child indices from the root. Each
//! interior node carries a finite set of transition kernels; the admissible
//! one-step transitions at that node are the convex hull of the set. A child
//! edge is *charged* when some listed kernel gives it positive weight, and a
//! node is *polar* when some edge on its path is uncharged: polar nodes are
//! null under every admissible model and all quasi-sure statements ignore
//! them.

use crate::lp::{self, Constraint, LpOutcome, LpProblem, Relation, Sense};
use crate::rational::Rational;
use num_traits::{One, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(Vec<usize>);

impl NodeId {
    pub fn root() -> Self {
        NodeId(Vec::new())
    }

    pub fn from_path(path: Vec<usize>) -> Self {
        NodeId(path)
    }

    pub fn child(&self, index: usize) -> Self {
        let mut path = self.0.clone();
        path.push(index);
        NodeId(path)
    }

    pub fn parent(&self) -> Option<(NodeId, usize)> {
        let mut path = self.0.clone();
        path.pop().map(|last| (NodeId(path), last))
    }

    /// Depth in the tree; the root sits at time zero.
    pub fn time(&self) -> usize {
        self.0.len()
    }

    pub fn path(&self) -> &[usize] {
        &self.0
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    /// All prefixes from the root to this node, inclusive.
    pub fn prefixes(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.0.len() + 1);
        for l in 0..=self.0.len() {
            out.push(NodeId(self.0[..l].to_vec()));
        }
        out
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "root");
        }
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join("."))
    }
}

impl fmt::Debug for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NodeId({self})")
    }
}

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("node {0} has no children")]
    NoChildren(NodeId),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("{0}")]
    Invalid(String),
}

/// One-step transition law: a weight per child, exact, nonnegative,
/// summing to one. Zero weights are allowed and meaningful.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Kernel {
    weights: Vec<Rational>,
}

impl Kernel {
    pub fn new(weights: Vec<Rational>) -> Result<Self, TreeError> {
        if weights.is_empty() {
            return Err(TreeError::Invalid("kernel over zero children".into()));
        }
        let mut sum = Rational::zero();
        for (i, w) in weights.iter().enumerate() {
            if w < &Rational::zero() {
                return Err(TreeError::Invalid(format!("kernel weight {i} is negative")));
            }
            sum += w;
        }
        if !sum.is_one() {
            return Err(TreeError::Invalid(format!(
                "kernel sums to {}",
                crate::rational::format_rational(&sum)
            )));
        }
        Ok(Kernel { weights })
    }

    pub fn delta(arity: usize, index: usize) -> Self {
        let mut weights = vec![Rational::zero(); arity];
        weights[index] = Rational::one();
        Kernel { weights }
    }

    /// Equal weight on the given children, zero elsewhere.
    pub fn uniform_on(arity: usize, support: &BTreeSet<usize>) -> Self {
        assert!(!support.is_empty());
        let share = Rational::new(1.into(), (support.len() as i64).into());
        let mut weights = vec![Rational::zero(); arity];
        for &i in support {
            weights[i] = share.clone();
        }
        Kernel { weights }
    }

    pub fn arity(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, child: usize) -> &Rational {
        &self.weights[child]
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn support(&self) -> BTreeSet<usize> {
        self.weights.iter().enumerate().filter(|(_, w)| !w.is_zero()).map(|(i, _)| i).collect()
    }

    /// Pointwise convex combination `t * self + (1 - t) * other`.
    pub fn mix(&self, other: &Kernel, t: &Rational) -> Kernel {
        assert_eq!(self.arity(), other.arity());
        let s = Rational::one() - t;
        let weights =
            self.weights.iter().zip(&other.weights).map(|(a, b)| t * a + &s * b).collect();
        Kernel { weights }
    }

    pub fn expectation(&self, values: &[Rational]) -> Rational {
        assert_eq!(values.len(), self.arity());
        let mut acc = Rational::zero();
        for (w, v) in self.weights.iter().zip(values) {
            if !w.is_zero() {
                acc += w * v;
            }
        }
        acc
    }
}

/// The finite list of extreme kernels at a node; the admissible one-step
/// laws are their convex hull, which is never materialised.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PriorFamily {
    kernels: Vec<Kernel>,
}

impl PriorFamily {
    pub fn new(kernels: Vec<Kernel>) -> Result<Self, TreeError> {
        if kernels.is_empty() {
            return Err(TreeError::Invalid("empty prior family".into()));
        }
        let arity = kernels[0].arity();
        if kernels.iter().any(|k| k.arity() != arity) {
            return Err(TreeError::Invalid("family kernels of mixed arity".into()));
        }
        Ok(PriorFamily { kernels })
    }

    pub fn singleton(kernel: Kernel) -> Self {
        PriorFamily { kernels: vec![kernel] }
    }

    pub fn kernels(&self) -> &[Kernel] {
        &self.kernels
    }

    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Union of the kernel supports.
    pub fn charged(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for k in &self.kernels {
            out.extend(k.support());
        }
        out
    }

    /// Equal-weight average of the listed kernels. Its support is exactly
    /// the charged set, which makes it a universal dominating kernel.
    pub fn uniform_mixture(&self) -> Kernel {
        let m = Rational::new(1.into(), (self.kernels.len() as i64).into());
        let arity = self.kernels[0].arity();
        let mut weights = vec![Rational::zero(); arity];
        for k in &self.kernels {
            for (i, w) in k.weights.iter().enumerate() {
                if !w.is_zero() {
                    weights[i] += &m * w;
                }
            }
        }
        Kernel { weights }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScenarioTree {
    depth: usize,
    children: BTreeMap<NodeId, usize>,
    families: BTreeMap<NodeId, PriorFamily>,
}

impl ScenarioTree {
    /// `children` and `families` must cover exactly the interior nodes
    /// (every node at time < depth), with matching arities.
    pub fn new(
        depth: usize,
        children: BTreeMap<NodeId, usize>,
        families: BTreeMap<NodeId, PriorFamily>,
    ) -> Result<Self, TreeError> {
        let tree = ScenarioTree { depth, children, families };
        let mut stack = vec![NodeId::root()];
        let mut seen = 0usize;
        while let Some(node) = stack.pop() {
            if node.time() == depth {
                if tree.children.contains_key(&node) {
                    return Err(TreeError::Invalid(format!("leaf {node} listed as interior")));
                }
                continue;
            }
            seen += 1;
            let count = *tree
                .children
                .get(&node)
                .ok_or_else(|| TreeError::Invalid(format!("missing child count at {node}")))?;
            if count == 0 {
                return Err(TreeError::Invalid(format!("node {node} has zero children")));
            }
            let family = tree
                .families
                .get(&node)
                .ok_or_else(|| TreeError::Invalid(format!("missing prior family at {node}")))?;
            if family.kernels()[0].arity() != count {
                return Err(TreeError::Invalid(format!(
                    "family arity mismatch at {node}: {} kernels weights vs {count} children",
                    family.kernels()[0].arity()
                )));
            }
            for i in 0..count {
                stack.push(node.child(i));
            }
        }
        if seen != tree.children.len() || seen != tree.families.len() {
            return Err(TreeError::Invalid("unreachable interior nodes listed".into()));
        }
        Ok(tree)
    }

    /// Single-branch tree: one child per interior node, one deterministic
    /// kernel. Useful for markets driven purely by the quote process.
    pub fn single_path(depth: usize) -> Self {
        let mut children = BTreeMap::new();
        let mut families = BTreeMap::new();
        for t in 0..depth {
            let node = NodeId::from_path(vec![0; t]);
            children.insert(node.clone(), 1);
            families.insert(node, PriorFamily::singleton(Kernel::delta(1, 0)));
        }
        ScenarioTree { depth, children, families }
    }

    /// One period, `arity` children, with the given family at the root.
    pub fn one_period(family: PriorFamily) -> Self {
        let arity = family.kernels()[0].arity();
        let mut children = BTreeMap::new();
        let mut families = BTreeMap::new();
        children.insert(NodeId::root(), arity);
        families.insert(NodeId::root(), family);
        ScenarioTree { depth: 1, children, families }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn is_leaf(&self, node: &NodeId) -> bool {
        node.time() == self.depth
    }

    pub fn child_count(&self, node: &NodeId) -> Result<usize, TreeError> {
        self.children.get(node).copied().ok_or_else(|| TreeError::NoChildren(node.clone()))
    }

    pub fn family(&self, node: &NodeId) -> Result<&PriorFamily, TreeError> {
        self.families.get(node).ok_or_else(|| TreeError::NoChildren(node.clone()))
    }

    pub fn contains(&self, node: &NodeId) -> bool {
        let mut cur = NodeId::root();
        for &step in node.path() {
            match self.children.get(&cur) {
                Some(&count) if step < count => cur = cur.child(step),
                _ => return false,
            }
        }
        true
    }

    /// Every node in depth-first order (lexicographic in path).
    pub fn all_nodes(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![NodeId::root()];
        while let Some(node) = stack.pop() {
            if let Some(&count) = self.children.get(&node) {
                for i in (0..count).rev() {
                    stack.push(node.child(i));
                }
            }
            out.push(node);
        }
        out.sort();
        out
    }

    pub fn nodes_at(&self, time: usize) -> Vec<NodeId> {
        self.all_nodes().into_iter().filter(|n| n.time() == time).collect()
    }

    pub fn interior_nodes(&self) -> Vec<NodeId> {
        self.children.keys().cloned().collect()
    }

    pub fn leaves(&self) -> Vec<NodeId> {
        self.nodes_at(self.depth)
    }

    /// Children reached with positive weight by at least one listed kernel.
    pub fn charged_children(&self, node: &NodeId) -> Result<BTreeSet<usize>, TreeError> {
        Ok(self.family(node)?.charged())
    }

    /// A node is polar when some edge on its root path is uncharged;
    /// such nodes are null under every admissible model.
    pub fn is_polar(&self, node: &NodeId) -> bool {
        let mut cur = NodeId::root();
        for &step in node.path() {
            let charged = self.families[&cur].charged();
            if !charged.contains(&step) {
                return true;
            }
            cur = cur.child(step);
        }
        false
    }

    pub fn non_polar_nodes_at(&self, time: usize) -> Vec<NodeId> {
        self.nodes_at(time).into_iter().filter(|n| !self.is_polar(n)).collect()
    }

    /// Nodewise absolute continuity on a finite tree: `p` is dominated by
    /// `q` iff at every node reached with positive `p` probability, the
    /// support of `p`'s kernel is contained in the support of `q`'s.
    pub fn dominates(&self, q: &TreeMeasure, p: &TreeMeasure) -> bool {
        let mut stack = vec![NodeId::root()];
        while let Some(node) = stack.pop() {
            if self.is_leaf(&node) {
                continue;
            }
            let pk = &p.kernels[&node];
            let qk = &q.kernels[&node];
            for child in pk.support() {
                if qk.weight(child).is_zero() {
                    return false;
                }
                stack.push(node.child(child));
            }
        }
        true
    }

    /// Checks that `q` charges only family-charged edges; on success
    /// returns the nodewise uniform-mixture measure, which dominates `q`
    /// and lies in the admissible class by construction.
    pub fn dominated_by_family(&self, q: &TreeMeasure) -> Option<TreeMeasure> {
        let mut stack = vec![NodeId::root()];
        while let Some(node) = stack.pop() {
            if self.is_leaf(&node) {
                continue;
            }
            let charged = self.families[&node].charged();
            for child in q.kernels[&node].support() {
                if !charged.contains(&child) {
                    return None;
                }
                stack.push(node.child(child));
            }
        }
        let kernels = self.families.iter().map(|(n, f)| (n.clone(), f.uniform_mixture())).collect();
        Some(TreeMeasure { kernels, declared_outside: BTreeSet::new() })
    }

    /// Exact feasibility of `kernel = sum_i a_i * family_i` with `a` a
    /// probability vector, decided by linear programming.
    pub fn in_convex_hull(&self, node: &NodeId, kernel: &Kernel) -> Result<bool, TreeError> {
        let family = self.family(node)?;
        let arity = family.kernels()[0].arity();
        if kernel.arity() != arity {
            return Err(TreeError::Invalid(format!(
                "kernel arity {} vs {} children at {node}",
                kernel.arity(),
                arity
            )));
        }
        let m = family.len();
        let mut constraints = Vec::with_capacity(arity + 1);
        constraints.push(Constraint::new(vec![Rational::one(); m], Relation::Eq, Rational::one()));
        for c in 0..arity {
            let coeffs = family.kernels().iter().map(|k| k.weight(c).clone()).collect();
            constraints.push(Constraint::new(coeffs, Relation::Eq, kernel.weight(c).clone()));
        }
        let problem = LpProblem {
            sense: Sense::Minimize,
            objective: vec![Rational::zero(); m],
            constraints,
            bounds: vec![(Some(Rational::zero()), None); m],
        };
        match lp::solve(&problem).expect("well-formed hull feasibility problem") {
            LpOutcome::Optimal { .. } => Ok(true),
            LpOutcome::Infeasible { .. } => Ok(false),
            LpOutcome::Unbounded { .. } => unreachable!("zero objective cannot be unbounded"),
        }
    }

    /// A measure is admissible when it has a kernel of the right arity at
    /// every interior node, each lying in the family hull unless the node
    /// is declared outside.
    pub fn validate_measure(&self, m: &TreeMeasure) -> Result<(), TreeError> {
        for node in self.interior_nodes() {
            let k = m
                .kernels
                .get(&node)
                .ok_or_else(|| TreeError::Invalid(format!("measure missing kernel at {node}")))?;
            if k.arity() != self.child_count(&node)? {
                return Err(TreeError::Invalid(format!("measure arity mismatch at {node}")));
            }
            if !m.declared_outside.contains(&node) && !self.in_convex_hull(&node, k)? {
                return Err(TreeError::Invalid(format!(
                    "measure kernel at {node} lies outside the family hull"
                )));
            }
        }
        if m.kernels.len() != self.children.len() {
            return Err(TreeError::Invalid("measure kernels at non-tree nodes".into()));
        }
        Ok(())
    }
}

/// A fully specified model: one kernel per interior node. Kernels normally
/// lie in the family hulls; counterexample measures can mark nodes as
/// deliberately outside so validation skips them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeMeasure {
    kernels: BTreeMap<NodeId, Kernel>,
    declared_outside: BTreeSet<NodeId>,
}

impl TreeMeasure {
    pub fn new(kernels: BTreeMap<NodeId, Kernel>) -> Self {
        TreeMeasure { kernels, declared_outside: BTreeSet::new() }
    }

    pub fn with_outside(kernels: BTreeMap<NodeId, Kernel>, outside: BTreeSet<NodeId>) -> Self {
        TreeMeasure { kernels, declared_outside: outside }
    }

    /// Picks the `select(node)`-th listed kernel at every interior node.
    pub fn from_selector(
        tree: &ScenarioTree,
        mut select: impl FnMut(&NodeId) -> usize,
    ) -> Result<Self, TreeError> {
        let mut kernels = BTreeMap::new();
        for node in tree.interior_nodes() {
            let family = tree.family(&node)?;
            let idx = select(&node);
            let kernel = family
                .kernels()
                .get(idx)
                .ok_or_else(|| {
                    TreeError::Invalid(format!(
                        "kernel index {idx} out of range at {node} ({} listed)",
                        family.len()
                    ))
                })?
                .clone();
            kernels.insert(node, kernel);
        }
        Ok(TreeMeasure { kernels, declared_outside: BTreeSet::new() })
    }

    pub fn kernel(&self, node: &NodeId) -> Option<&Kernel> {
        self.kernels.get(node)
    }

    pub fn kernels(&self) -> &BTreeMap<NodeId, Kernel> {
        &self.kernels
    }

    pub fn declared_outside(&self) -> &BTreeSet<NodeId> {
        &self.declared_outside
    }

    /// Product of the one-step weights along the root path.
    pub fn path_probability(&self, node: &NodeId) -> Rational {
        let mut acc = Rational::one();
        let mut cur = NodeId::root();
        for &step in node.path() {
            let k = &self.kernels[&cur];
            acc *= k.weight(step);
            if acc.is_zero() {
                return acc;
            }
            cur = cur.child(step);
        }
        acc
    }

    pub fn charges(&self, node: &NodeId) -> bool {
        !self.path_probability(node).is_zero()
    }
}
