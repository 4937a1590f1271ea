//! Exact polyhedral convex-cone arithmetic in small dimension.
//!
//! A cone is carried in both descriptions at once: a list of generators
//! (the cone is their nonnegative span) and a list of inner normals (the
//! cone is where every normal has nonnegative inner product). Both lists
//! are canonical: the lineality space contributes a reduced-echelon basis
//! as plus/minus pairs, the pointed remainder contributes its extreme
//! rays, and every vector is scaled to coprime integers without touching
//! its sign pattern. Equal cones therefore have identical field values,
//! and the derived `PartialEq` decides cone equality. Dualization is a
//! swap of the two lists.

use crate::lp::{self, Constraint, LpOutcome, LpProblem, Relation, Sense};
use crate::rational::{format_rational, Rational};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConeError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
}

#[derive(Clone, PartialEq, Eq)]
pub struct PolyCone {
    dim: usize,
    generators: Vec<Vec<Rational>>,
    halfspaces: Vec<Vec<Rational>>,
}

/// Output of the slack-maximization probe. When `full_dim` holds the
/// point satisfies every halfspace strictly and `slack` is the attained
/// margin against 1-norm-normalized normals; otherwise the point lies in
/// the relative interior and the margin is measured within the span.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InteriorPoint {
    pub point: Vec<Rational>,
    pub slack: Rational,
    pub full_dim: bool,
}

impl PolyCone {
    pub fn from_generators(dim: usize, gens: Vec<Vec<Rational>>) -> Result<Self, ConeError> {
        check_dims(dim, &gens)?;
        let rays: Vec<Vec<Rational>> = gens.iter().filter_map(|g| canon_ray(g)).collect();
        let halfspaces = canon_from_constraints(dim, &rays);
        let generators = canon_from_constraints(dim, &halfspaces);
        Ok(PolyCone { dim, generators, halfspaces })
    }

    pub fn from_halfspaces(dim: usize, normals: Vec<Vec<Rational>>) -> Result<Self, ConeError> {
        check_dims(dim, &normals)?;
        let rows: Vec<Vec<Rational>> = normals.iter().filter_map(|a| canon_ray(a)).collect();
        let generators = canon_from_constraints(dim, &rows);
        let halfspaces = canon_from_constraints(dim, &generators);
        Ok(PolyCone { dim, generators, halfspaces })
    }

    pub fn orthant(dim: usize) -> Self {
        let gens = (0..dim).map(|i| unit(dim, i)).collect();
        Self::from_generators(dim, gens).expect("orthant generators are well formed")
    }

    pub fn full(dim: usize) -> Self {
        let mut gens = Vec::new();
        for i in 0..dim {
            gens.push(unit(dim, i));
            gens.push(negate(&unit(dim, i)));
        }
        Self::from_generators(dim, gens).expect("space generators are well formed")
    }

    pub fn zero(dim: usize) -> Self {
        Self::from_generators(dim, Vec::new()).expect("empty generator list is well formed")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Vec<Rational>] {
        &self.generators
    }

    pub fn halfspaces(&self) -> &[Vec<Rational>] {
        &self.halfspaces
    }

    /// The dual cone: all vectors with nonnegative inner product against
    /// this one. Generators and normals trade places, so this is free.
    pub fn dualize(&self) -> Self {
        PolyCone {
            dim: self.dim,
            generators: self.halfspaces.clone(),
            halfspaces: self.generators.clone(),
        }
    }

    /// Conic Minkowski sum, the nonnegative span of both generator lists.
    pub fn sum(&self, other: &PolyCone) -> Result<Self, ConeError> {
        self.check_dim(other)?;
        let mut gens = self.generators.clone();
        gens.extend(other.generators.iter().cloned());
        Self::from_generators(self.dim, gens)
    }

    pub fn intersect(&self, other: &PolyCone) -> Result<Self, ConeError> {
        self.check_dim(other)?;
        let mut rows = self.halfspaces.clone();
        rows.extend(other.halfspaces.iter().cloned());
        Self::from_halfspaces(self.dim, rows)
    }

    /// Basis of the largest linear subspace inside the cone.
    pub fn lineality(&self) -> Vec<Vec<Rational>> {
        nullspace_basis(self.dim, &self.halfspaces)
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        assert_eq!(x.len(), self.dim, "point dimension mismatch");
        self.halfspaces.iter().all(|a| !dot(a, x).is_negative())
    }

    /// Membership in the topological interior. A cone that is not full
    /// dimensional carries opposite normal pairs, which no point can beat
    /// strictly, so this correctly rejects everything for such cones.
    pub fn strictly_contains(&self, x: &[Rational]) -> bool {
        assert_eq!(x.len(), self.dim, "point dimension mismatch");
        self.halfspaces.iter().all(|a| dot(a, x).is_positive())
    }

    /// First generator of `self` outside `other`, if any.
    pub fn excluded_generator(&self, other: &PolyCone) -> Result<Option<Vec<Rational>>, ConeError> {
        self.check_dim(other)?;
        for g in &self.generators {
            if !other.contains(g) {
                return Ok(Some(g.clone()));
            }
        }
        Ok(None)
    }

    pub fn is_subset(&self, other: &PolyCone) -> Result<bool, ConeError> {
        Ok(self.excluded_generator(other)?.is_none())
    }

    /// A ray of `self` strictly outside `other`, when one exists. The
    /// first violated normal of `other` carves the escaping wedge out of
    /// `self`; summing the wedge's generators lands strictly inside it,
    /// away from the boundary where the two cones touch, which makes the
    /// returned direction a more representative violation than any single
    /// extreme ray.
    pub fn escape_ray(&self, other: &PolyCone) -> Result<Option<Vec<Rational>>, ConeError> {
        self.check_dim(other)?;
        for a in &other.halfspaces {
            if !self.generators.iter().any(|g| dot(a, g).is_negative()) {
                continue;
            }
            let cap = PolyCone::from_halfspaces(self.dim, vec![negate(a)])?;
            let wedge = self.intersect(&cap)?;
            let mut total = vec![Rational::zero(); self.dim];
            for g in &wedge.generators {
                for (t, x) in total.iter_mut().zip(g) {
                    *t = &*t + x;
                }
            }
            let ray = canon_ray(&total).expect("escaping wedge has a strict violator");
            debug_assert!(wedge.contains(&ray) && !other.contains(&ray));
            return Ok(Some(ray));
        }
        Ok(None)
    }

    /// Slack-maximizing point. Stage one asks for a uniform strict margin
    /// against all normals inside the unit box; a positive optimum proves
    /// the cone full dimensional. Otherwise the normals that annihilate
    /// every generator are pinned to equality and the margin is maximized
    /// over the remaining ones, which lands in the relative interior.
    pub fn interior_point(&self) -> InteriorPoint {
        let (point, slack) = self.slack_lp(None);
        if slack.is_positive() {
            return InteriorPoint { point, slack, full_dim: true };
        }
        let implicit: Vec<bool> = self
            .halfspaces
            .iter()
            .map(|a| self.generators.iter().all(|g| dot(a, g).is_zero()))
            .collect();
        let (point, slack) = self.slack_lp(Some(&implicit));
        debug_assert!(!slack.is_negative(), "relative interior slack must not be negative");
        InteriorPoint { point, slack, full_dim: false }
    }

    /// Shared body of the interior probe: variables are the point and one
    /// slack, each normal contributes a margin row (or an equality row
    /// when marked implicit), and the unit box keeps the program bounded.
    fn slack_lp(&self, implicit: Option<&[bool]>) -> (Vec<Rational>, Rational) {
        let d = self.dim;
        let mut constraints = Vec::new();
        for (i, a) in self.halfspaces.iter().enumerate() {
            if implicit.is_some_and(|m| m[i]) {
                let mut coeffs = a.clone();
                coeffs.push(Rational::zero());
                constraints.push(Constraint::new(coeffs, Relation::Eq, Rational::zero()));
            } else {
                let mut coeffs = one_norm_unit(a);
                coeffs.push(-Rational::one());
                constraints.push(Constraint::new(coeffs, Relation::Ge, Rational::zero()));
            }
        }
        let mut objective = vec![Rational::zero(); d];
        objective.push(Rational::one());
        let mut bounds = vec![(Some(-Rational::one()), Some(Rational::one())); d];
        bounds.push((None, Some(Rational::one())));
        let problem = LpProblem { sense: Sense::Maximize, objective, constraints, bounds };
        match lp::solve(&problem).expect("well-formed slack program") {
            LpOutcome::Optimal { mut point, value } => {
                point.truncate(d);
                (point, value)
            }
            other => unreachable!("slack program is feasible and bounded, got {other:?}"),
        }
    }

    fn check_dim(&self, other: &PolyCone) -> Result<(), ConeError> {
        if self.dim != other.dim {
            return Err(ConeError::DimMismatch { left: self.dim, right: other.dim });
        }
        Ok(())
    }
}

impl fmt::Debug for PolyCone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |vs: &[Vec<Rational>]| {
            vs.iter()
                .map(|v| {
                    let parts: Vec<String> = v.iter().map(format_rational).collect();
                    format!("({})", parts.join(", "))
                })
                .collect::<Vec<_>>()
                .join(" ")
        };
        write!(
            f,
            "PolyCone(dim {}, gens [{}], normals [{}])",
            self.dim,
            join(&self.generators),
            join(&self.halfspaces)
        )
    }
}

fn check_dims(dim: usize, vectors: &[Vec<Rational>]) -> Result<(), ConeError> {
    for v in vectors {
        if v.len() != dim {
            return Err(ConeError::DimMismatch { left: dim, right: v.len() });
        }
    }
    Ok(())
}

fn unit(dim: usize, i: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); dim];
    v[i] = Rational::one();
    v
}

fn negate(v: &[Rational]) -> Vec<Rational> {
    v.iter().map(|x| -x).collect()
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn one_norm_unit(v: &[Rational]) -> Vec<Rational> {
    let norm: Rational = v.iter().map(|x| x.abs()).sum();
    v.iter().map(|x| x / &norm).collect()
}

/// Positive rescaling to the coprime integer representative; `None` for
/// the zero vector. Directions are preserved, which is the only scaling a
/// ray admits.
fn canon_ray(v: &[Rational]) -> Option<Vec<Rational>> {
    if v.iter().all(|x| x.is_zero()) {
        return None;
    }
    let mut denom = BigInt::one();
    for x in v {
        denom = denom.lcm(x.denom());
    }
    let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&denom / x.denom())).collect();
    let mut g = BigInt::zero();
    for n in &ints {
        g = g.gcd(n);
    }
    Some(ints.into_iter().map(|n| Rational::from_integer(n / &g)).collect())
}

/// Canonical representative of a line through the origin: coprime
/// integers with positive leading entry. Sign flips are fine here since
/// the span is symmetric.
fn canon_direction(v: &[Rational]) -> Option<Vec<Rational>> {
    let ray = canon_ray(v)?;
    let leading = ray.iter().find(|x| !x.is_zero()).expect("canonical ray is nonzero");
    if leading.is_negative() {
        return Some(negate(&ray));
    }
    Some(ray)
}

/// Reduced row echelon form; returns the surviving rows and pivot columns.
fn rref(mut rows: Vec<Vec<Rational>>, width: usize) -> (Vec<Vec<Rational>>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..width {
        let Some(row) = (rank..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, row);
        let lead = rows[rank][col].clone();
        for x in rows[rank].iter_mut() {
            *x = &*x / &lead;
        }
        let pivot = rows[rank].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != rank && !row[col].is_zero() {
                let factor = row[col].clone();
                for (x, p) in row.iter_mut().zip(&pivot) {
                    *x = &*x - p * &factor;
                }
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rows.truncate(rank);
    (rows, pivots)
}

/// Canonical basis of the common nullspace of the rows: one vector per
/// free column of the echelon form, rescaled to coprime integers. The
/// echelon form is unique for the row space, so equal spaces give equal
/// bases.
fn nullspace_basis(width: usize, rows: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let (reduced, pivots) = rref(rows.to_vec(), width);
    let pivot_cols: BTreeSet<usize> = pivots.iter().copied().collect();
    let mut basis = Vec::new();
    for free in 0..width {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut v = vec![Rational::zero(); width];
        v[free] = Rational::one();
        for (r, &col) in pivots.iter().enumerate() {
            v[col] = -reduced[r][free].clone();
        }
        basis.push(canon_direction(&v).expect("free column vector is nonzero"));
    }
    basis.sort();
    basis
}

/// Exact membership of `x` in the nonnegative span of `rays`.
fn in_cone(dim: usize, rays: &[&Vec<Rational>], x: &[Rational]) -> bool {
    if rays.is_empty() {
        return x.iter().all(|v| v.is_zero());
    }
    let constraints = (0..dim)
        .map(|j| {
            let coeffs = rays.iter().map(|r| r[j].clone()).collect();
            Constraint::new(coeffs, Relation::Eq, x[j].clone())
        })
        .collect();
    let problem = LpProblem {
        sense: Sense::Minimize,
        objective: vec![Rational::zero(); rays.len()],
        constraints,
        bounds: vec![(Some(Rational::zero()), None); rays.len()],
    };
    matches!(
        lp::solve(&problem).expect("well-formed membership program"),
        LpOutcome::Optimal { .. }
    )
}

/// Drop every ray the others already span. On a pointed cone this leaves
/// exactly the extreme rays; on intermediate sets it merely keeps the
/// refinement small.
fn prune(dim: usize, rays: BTreeSet<Vec<Rational>>) -> BTreeSet<Vec<Rational>> {
    let mut kept: Vec<Vec<Rational>> = rays.into_iter().collect();
    let mut i = 0;
    while i < kept.len() {
        let others: Vec<&Vec<Rational>> =
            kept.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, r)| r).collect();
        if !others.is_empty() && in_cone(dim, &others, &kept[i]) {
            kept.remove(i);
        } else {
            i += 1;
        }
    }
    kept.into_iter().collect()
}

/// Double description: rays spanning the set cut out by the constraint
/// rows, starting from the whole space. Each insertion keeps the rays on
/// the good side, those on the hyperplane, and one crossing combination
/// per good/bad pair; pruning after every round contains the growth.
fn dd_rays(dim: usize, constraints: &[Vec<Rational>]) -> BTreeSet<Vec<Rational>> {
    let mut rays: BTreeSet<Vec<Rational>> = BTreeSet::new();
    for i in 0..dim {
        rays.insert(unit(dim, i));
        rays.insert(negate(&unit(dim, i)));
    }
    for a in constraints {
        let mut plus: Vec<(Vec<Rational>, Rational)> = Vec::new();
        let mut minus: Vec<(Vec<Rational>, Rational)> = Vec::new();
        let mut next: BTreeSet<Vec<Rational>> = BTreeSet::new();
        for r in &rays {
            let d = dot(a, r);
            if d.is_positive() {
                next.insert(r.clone());
                plus.push((r.clone(), d));
            } else if d.is_negative() {
                minus.push((r.clone(), d));
            } else {
                next.insert(r.clone());
            }
        }
        if minus.is_empty() {
            continue;
        }
        for (p, dp) in &plus {
            for (n, dn) in &minus {
                let crossing: Vec<Rational> = (0..dim).map(|j| dp * &n[j] - dn * &p[j]).collect();
                if let Some(c) = canon_ray(&crossing) {
                    next.insert(c);
                }
            }
        }
        rays = prune(dim, next);
    }
    rays
}

/// Canonical generator list of `{x : <c, x> >= 0 for all rows c}`. The
/// lineality space is the common nullspace of the rows; restricting to
/// its orthogonal complement leaves a pointed cone whose extreme rays
/// are unique, and the basis re-enters as plus/minus pairs.
fn canon_from_constraints(dim: usize, rows: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let line = nullspace_basis(dim, rows);
    let mut cut = rows.to_vec();
    for b in &line {
        cut.push(b.clone());
        cut.push(negate(b));
    }
    let mut out = prune(dim, dd_rays(dim, &cut));
    for b in &line {
        out.insert(b.clone());
        out.insert(negate(b));
    }
    out.into_iter().collect()
}
