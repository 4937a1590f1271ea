//! Exact rational linear programming.
//!
//! Dense two-phase tableau simplex with Bland's rule, so every run
//! terminates and identical inputs take identical pivot paths. All three
//! outcomes carry witnesses that re-verify by exact substitution:
//! an optimal point with its value, an improving recession ray, or a
//! Farkas infeasibility certificate over the constraint rows and bounds.
//!
//! Problems are stated over free variables with optional lower/upper
//! bounds and mixed `<=`/`==`/`>=` rows. Internally lower bounds are
//! shifted away, unbounded-below variables are split, upper bounds become
//! rows, and artificial variables seed phase one. Witnesses are mapped
//! back to the caller's coordinates before being returned.

use crate::rational::Rational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn new(coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> Self {
        Constraint { coeffs, relation, rhs }
    }
}

/// Bounds are per variable: `(lower, upper)`, either side optional.
#[derive(Clone, Debug)]
pub struct LpProblem {
    pub sense: Sense,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<(Option<Rational>, Option<Rational>)>,
}

/// Multipliers proving the row system inconsistent: summing
/// `row_multipliers[i] * row_i` plus `lower_multipliers[j] * (x_j >= l_j)`
/// plus `upper_multipliers[j] * (x_j <= u_j)` cancels every variable while
/// the combined right hand side stays strictly positive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FarkasCertificate {
    pub row_multipliers: Vec<Rational>,
    pub lower_multipliers: Vec<Rational>,
    pub upper_multipliers: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { point: Vec<Rational>, value: Rational },
    Unbounded { ray: Vec<Rational> },
    Infeasible { farkas: FarkasCertificate },
}

#[derive(Debug, Error)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

impl LpProblem {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(LpError::Dimension(format!(
                "{} bounds for {} variables",
                self.bounds.len(),
                n
            )));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(LpError::Dimension(format!(
                    "constraint {} has {} coefficients for {} variables",
                    i,
                    c.coeffs.len(),
                    n
                )));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[Rational]) -> Rational {
        dot(&self.objective, x)
    }

    /// Exact feasibility of a candidate point.
    pub fn check_point(&self, x: &[Rational]) -> bool {
        if x.len() != self.num_vars() {
            return false;
        }
        for c in &self.constraints {
            let lhs = dot(&c.coeffs, x);
            let ok = match c.relation {
                Relation::Le => lhs <= c.rhs,
                Relation::Eq => lhs == c.rhs,
                Relation::Ge => lhs >= c.rhs,
            };
            if !ok {
                return false;
            }
        }
        for (j, (lo, hi)) in self.bounds.iter().enumerate() {
            if let Some(l) = lo {
                if &x[j] < l {
                    return false;
                }
            }
            if let Some(u) = hi {
                if &x[j] > u {
                    return false;
                }
            }
        }
        true
    }

    /// A ray certifies unboundedness when it lies in the recession cone of
    /// the feasible region and strictly improves the objective.
    pub fn check_ray(&self, d: &[Rational]) -> bool {
        if d.len() != self.num_vars() {
            return false;
        }
        for c in &self.constraints {
            let lhs = dot(&c.coeffs, d);
            let ok = match c.relation {
                Relation::Le => !lhs.is_positive(),
                Relation::Eq => lhs.is_zero(),
                Relation::Ge => !lhs.is_negative(),
            };
            if !ok {
                return false;
            }
        }
        for (j, (lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_some() && d[j].is_negative() {
                return false;
            }
            if hi.is_some() && d[j].is_positive() {
                return false;
            }
        }
        let gain = dot(&self.objective, d);
        match self.sense {
            Sense::Maximize => gain.is_positive(),
            Sense::Minimize => gain.is_negative(),
        }
    }

    pub fn check_farkas(&self, cert: &FarkasCertificate) -> bool {
        let n = self.num_vars();
        if cert.row_multipliers.len() != self.constraints.len()
            || cert.lower_multipliers.len() != n
            || cert.upper_multipliers.len() != n
        {
            return false;
        }
        for (c, y) in self.constraints.iter().zip(&cert.row_multipliers) {
            let ok = match c.relation {
                Relation::Le => !y.is_positive(),
                Relation::Eq => true,
                Relation::Ge => !y.is_negative(),
            };
            if !ok {
                return false;
            }
        }
        let mut combined = vec![Rational::zero(); n];
        let mut rhs = Rational::zero();
        for (c, y) in self.constraints.iter().zip(&cert.row_multipliers) {
            for (j, a) in c.coeffs.iter().enumerate() {
                combined[j] += y * a;
            }
            rhs += y * &c.rhs;
        }
        for (j, (lo, hi)) in self.bounds.iter().enumerate() {
            let lm = &cert.lower_multipliers[j];
            let um = &cert.upper_multipliers[j];
            match lo {
                Some(l) => {
                    if lm.is_negative() {
                        return false;
                    }
                    rhs += lm * l;
                }
                None => {
                    if !lm.is_zero() {
                        return false;
                    }
                }
            }
            match hi {
                Some(u) => {
                    if um.is_positive() {
                        return false;
                    }
                    rhs += um * u;
                }
                None => {
                    if !um.is_zero() {
                        return false;
                    }
                }
            }
            combined[j] += lm;
            combined[j] += um;
        }
        combined.iter().all(Zero::is_zero) && rhs.is_positive()
    }
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Rational::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += x * y;
        }
    }
    acc
}

/// How an original variable appears among the nonnegative internal columns.
#[derive(Clone, Debug)]
enum VarRepr {
    /// `x = lower + col`
    Shifted { col: usize, lower: Rational },
    /// `x = pos - neg`
    Split { pos: usize, neg: usize },
}

/// Origin of an internal equality row, for mapping duals back.
#[derive(Clone, Copy, Debug)]
enum RowOrigin {
    User(usize),
    Upper(usize),
}

struct Standardized {
    reprs: Vec<VarRepr>,
    origins: Vec<RowOrigin>,
    flipped: Vec<bool>,
    /// Internal rows as equality rows over structural columns, rhs last.
    rows: Vec<Vec<Rational>>,
    n_struct: usize,
}

fn standardize(p: &LpProblem) -> Standardized {
    let n = p.num_vars();
    let mut reprs = Vec::with_capacity(n);
    let mut n_struct = 0usize;
    for (lo, _) in &p.bounds {
        match lo {
            Some(l) => {
                reprs.push(VarRepr::Shifted { col: n_struct, lower: l.clone() });
                n_struct += 1;
            }
            None => {
                reprs.push(VarRepr::Split { pos: n_struct, neg: n_struct + 1 });
                n_struct += 2;
            }
        }
    }

    // Internal rows: user constraints first, then one row per upper bound.
    let mut raw: Vec<(Vec<Rational>, Relation, Rational, RowOrigin)> = Vec::new();
    for (i, c) in p.constraints.iter().enumerate() {
        let mut coeffs = vec![Rational::zero(); n_struct];
        let mut rhs = c.rhs.clone();
        for (j, a) in c.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            match &reprs[j] {
                VarRepr::Shifted { col, lower } => {
                    coeffs[*col] += a;
                    rhs -= a * lower;
                }
                VarRepr::Split { pos, neg } => {
                    coeffs[*pos] += a;
                    coeffs[*neg] -= a;
                }
            }
        }
        raw.push((coeffs, c.relation, rhs, RowOrigin::User(i)));
    }
    for (j, (_, hi)) in p.bounds.iter().enumerate() {
        if let Some(u) = hi {
            let mut coeffs = vec![Rational::zero(); n_struct];
            let rhs = match &reprs[j] {
                VarRepr::Shifted { col, lower } => {
                    coeffs[*col] = Rational::one();
                    u - lower
                }
                VarRepr::Split { pos, neg } => {
                    coeffs[*pos] = Rational::one();
                    coeffs[*neg] = -Rational::one();
                    u.clone()
                }
            };
            raw.push((coeffs, Relation::Le, rhs, RowOrigin::Upper(j)));
        }
    }

    // Append slack columns, flip rows to nonnegative rhs.
    let n_slack = raw.iter().filter(|r| r.1 != Relation::Eq).count();
    let total = n_struct + n_slack;
    let mut rows = Vec::with_capacity(raw.len());
    let mut origins = Vec::with_capacity(raw.len());
    let mut flipped = Vec::with_capacity(raw.len());
    let mut slack_at = n_struct;
    for (coeffs, rel, rhs, origin) in raw {
        let mut row = coeffs;
        row.resize(total, Rational::zero());
        match rel {
            Relation::Le => {
                row[slack_at] = Rational::one();
                slack_at += 1;
            }
            Relation::Ge => {
                row[slack_at] = -Rational::one();
                slack_at += 1;
            }
            Relation::Eq => {}
        }
        row.push(rhs);
        let flip = row[total].is_negative();
        if flip {
            for v in row.iter_mut() {
                *v = -std::mem::take(v);
            }
        }
        rows.push(row);
        origins.push(origin);
        flipped.push(flip);
    }

    Standardized { reprs, origins, flipped, rows, n_struct: total }
}

struct Tableau {
    /// rows x (cols + 1); last entry of each row is the rhs.
    a: Vec<Vec<Rational>>,
    /// cols + 1; reduced costs, last entry is minus the objective value.
    obj: Vec<Rational>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.a[r][c].clone();
        debug_assert!(!piv.is_zero());
        for v in self.a[r].iter_mut() {
            *v /= &piv;
        }
        for i in 0..self.a.len() {
            if i == r {
                continue;
            }
            let factor = self.a[i][c].clone();
            if factor.is_zero() {
                continue;
            }
            for j in 0..=self.cols {
                let t = &self.a[r][j] * &factor;
                self.a[i][j] -= t;
            }
        }
        let factor = self.obj[c].clone();
        if !factor.is_zero() {
            for j in 0..=self.cols {
                let t = &self.a[r][j] * &factor;
                self.obj[j] -= t;
            }
        }
        self.basis[r] = c;
    }

    /// Bland: entering column is the lowest-index negative reduced cost,
    /// leaving row breaks ratio ties by lowest basic column. `None` entering
    /// means optimal; `Err(col)` from the ratio test means unbounded in col.
    fn run(&mut self, allowed: usize) -> Result<(), usize> {
        loop {
            let enter = (0..allowed).find(|&j| self.obj[j].is_negative());
            let Some(c) = enter else {
                return Ok(());
            };
            let mut best: Option<(Rational, usize)> = None;
            for r in 0..self.a.len() {
                if self.a[r][c].is_positive() {
                    let ratio = &self.a[r][self.cols] / &self.a[r][c];
                    let replace = match &best {
                        None => true,
                        Some((cur, row)) => {
                            ratio < *cur || (ratio == *cur && self.basis[r] < self.basis[*row])
                        }
                    };
                    if replace {
                        best = Some((ratio, r));
                    }
                }
            }
            match best {
                Some((_, r)) => self.pivot(r, c),
                None => return Err(c),
            }
        }
    }
}

pub fn solve(p: &LpProblem) -> Result<LpOutcome, LpError> {
    p.validate()?;
    let std_form = standardize(p);
    let m = std_form.rows.len();
    let n_struct = std_form.n_struct;
    let cols = n_struct + m; // artificials appended

    let mut a = Vec::with_capacity(m);
    for (r, row) in std_form.rows.iter().enumerate() {
        let mut full = row[..n_struct].to_vec();
        full.resize(cols, Rational::zero());
        full[n_struct + r] = Rational::one();
        full.push(row[n_struct].clone());
        a.push(full);
    }
    let basis: Vec<usize> = (0..m).map(|r| n_struct + r).collect();

    // Phase one: minimise the sum of artificials. Reduced costs start as
    // 1 on artificial columns, then basic columns are eliminated.
    let mut obj = vec![Rational::zero(); cols + 1];
    for entry in &mut obj[n_struct..cols] {
        *entry = Rational::one();
    }
    let mut t = Tableau { a, obj, basis, cols };
    for r in 0..m {
        let row = t.a[r].clone();
        for (entry, x) in t.obj.iter_mut().zip(&row) {
            *entry -= x;
        }
    }
    t.run(t.cols).expect("phase one is bounded below by zero");

    let phase1_value = -t.obj[t.cols].clone();
    if phase1_value.is_positive() {
        return Ok(LpOutcome::Infeasible { farkas: extract_farkas(p, &std_form, &t) });
    }

    // Drive artificials out of the basis; rows that cannot pivot on a
    // structural column are redundant and dropped.
    let mut r = 0;
    while r < t.a.len() {
        if t.basis[r] >= n_struct {
            match (0..n_struct).find(|&j| !t.a[r][j].is_zero()) {
                Some(j) => t.pivot(r, j),
                None => {
                    t.a.remove(r);
                    t.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }
    for row in t.a.iter_mut() {
        let rhs = row.pop().expect("rhs");
        row.truncate(n_struct);
        row.push(rhs);
    }
    t.cols = n_struct;

    // Phase two over the structural columns.
    let mut cost = vec![Rational::zero(); n_struct];
    for (j, c) in p.objective.iter().enumerate() {
        let signed = match p.sense {
            Sense::Minimize => c.clone(),
            Sense::Maximize => -c.clone(),
        };
        if signed.is_zero() {
            continue;
        }
        match &std_form.reprs[j] {
            VarRepr::Shifted { col, .. } => cost[*col] += &signed,
            VarRepr::Split { pos, neg } => {
                cost[*pos] += &signed;
                cost[*neg] -= &signed;
            }
        }
    }
    t.obj = cost.clone();
    t.obj.push(Rational::zero());
    for r in 0..t.a.len() {
        let cb = cost[t.basis[r]].clone();
        if cb.is_zero() {
            continue;
        }
        let row = t.a[r].clone();
        for (entry, x) in t.obj.iter_mut().zip(&row) {
            *entry -= x * &cb;
        }
    }

    match t.run(t.cols) {
        Ok(()) => {
            let mut internal = vec![Rational::zero(); n_struct];
            for (r, &b) in t.basis.iter().enumerate() {
                internal[b] = t.a[r][t.cols].clone();
            }
            let point = map_point(&std_form, &internal);
            let value = p.objective_value(&point);
            debug_assert!(p.check_point(&point), "optimal point fails substitution");
            Ok(LpOutcome::Optimal { point, value })
        }
        Err(col) => {
            let mut dir = vec![Rational::zero(); n_struct];
            dir[col] = Rational::one();
            for (r, &b) in t.basis.iter().enumerate() {
                if b < n_struct {
                    dir[b] = -t.a[r][col].clone();
                }
            }
            let ray = map_direction(&std_form, &dir);
            debug_assert!(p.check_ray(&ray), "unbounded ray fails substitution");
            Ok(LpOutcome::Unbounded { ray })
        }
    }
}

fn map_point(s: &Standardized, internal: &[Rational]) -> Vec<Rational> {
    s.reprs
        .iter()
        .map(|r| match r {
            VarRepr::Shifted { col, lower } => lower + &internal[*col],
            VarRepr::Split { pos, neg } => &internal[*pos] - &internal[*neg],
        })
        .collect()
}

fn map_direction(s: &Standardized, internal: &[Rational]) -> Vec<Rational> {
    s.reprs
        .iter()
        .map(|r| match r {
            VarRepr::Shifted { col, .. } => internal[*col].clone(),
            VarRepr::Split { pos, neg } => &internal[*pos] - &internal[*neg],
        })
        .collect()
}

/// Reads the phase-one duals off the artificial columns, undoes row flips,
/// and folds upper-bound rows and lower-bound shifts into bound multipliers.
fn extract_farkas(p: &LpProblem, s: &Standardized, t: &Tableau) -> FarkasCertificate {
    let n_struct = t.cols - t.a.len();
    let mut duals = Vec::with_capacity(t.a.len());
    for r in 0..t.a.len() {
        // Artificial reduced cost is 1 - y_r.
        let y = Rational::one() - &t.obj[n_struct + r];
        duals.push(if s.flipped[r] { -y } else { y });
    }

    let n = p.num_vars();
    let mut row_multipliers = vec![Rational::zero(); p.constraints.len()];
    let mut upper_multipliers = vec![Rational::zero(); n];
    for (r, origin) in s.origins.iter().enumerate() {
        match origin {
            RowOrigin::User(i) => row_multipliers[*i] = duals[r].clone(),
            RowOrigin::Upper(j) => upper_multipliers[*j] = duals[r].clone(),
        }
    }
    let mut lower_multipliers = vec![Rational::zero(); n];
    for (j, repr) in s.reprs.iter().enumerate() {
        if let VarRepr::Shifted { .. } = repr {
            let mut acc = upper_multipliers[j].clone();
            for (i, c) in p.constraints.iter().enumerate() {
                if !c.coeffs[j].is_zero() {
                    acc += &row_multipliers[i] * &c.coeffs[j];
                }
            }
            lower_multipliers[j] = -acc;
        }
    }
    let cert = FarkasCertificate { row_multipliers, lower_multipliers, upper_multipliers };
    debug_assert!(p.check_farkas(&cert), "farkas certificate fails substitution");
    cert
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn bounded_nonneg(n: usize) -> Vec<(Option<Rational>, Option<Rational>)> {
        vec![(Some(int(0)), None); n]
    }

    #[test]
    fn maximizes_over_a_triangle() {
        // max x + y subject to x + 2y <= 4, 3x + y <= 6, x,y >= 0.
        let p = LpProblem {
            sense: Sense::Maximize,
            objective: vec![int(1), int(1)],
            constraints: vec![
                Constraint::new(vec![int(1), int(2)], Relation::Le, int(4)),
                Constraint::new(vec![int(3), int(1)], Relation::Le, int(6)),
            ],
            bounds: bounded_nonneg(2),
        };
        match solve(&p).unwrap() {
            LpOutcome::Optimal { point, value } => {
                assert_eq!(point, vec![rat(8, 5), rat(6, 5)]);
                assert_eq!(value, rat(14, 5));
                assert!(p.check_point(&point));
            }
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn reports_unbounded_with_improving_ray() {
        // max x with x >= y, nothing above.
        let p = LpProblem {
            sense: Sense::Maximize,
            objective: vec![int(1), int(0)],
            constraints: vec![Constraint::new(vec![int(1), int(-1)], Relation::Ge, int(0))],
            bounds: bounded_nonneg(2),
        };
        match solve(&p).unwrap() {
            LpOutcome::Unbounded { ray } => assert!(p.check_ray(&ray)),
            other => panic!("expected unbounded, got {other:?}"),
        }
    }

    #[test]
    fn certifies_infeasibility() {
        // x >= 3 and x <= 1.
        let p = LpProblem {
            sense: Sense::Maximize,
            objective: vec![int(0)],
            constraints: vec![
                Constraint::new(vec![int(1)], Relation::Ge, int(3)),
                Constraint::new(vec![int(1)], Relation::Le, int(1)),
            ],
            bounds: vec![(None, None)],
        };
        match solve(&p).unwrap() {
            LpOutcome::Infeasible { farkas } => assert!(p.check_farkas(&farkas)),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn infeasibility_through_bounds() {
        // x + y = 1 with x, y <= 1/4.
        let p = LpProblem {
            sense: Sense::Minimize,
            objective: vec![int(0), int(0)],
            constraints: vec![Constraint::new(vec![int(1), int(1)], Relation::Eq, int(1))],
            bounds: vec![(Some(int(0)), Some(rat(1, 4))), (Some(int(0)), Some(rat(1, 4)))],
        };
        match solve(&p).unwrap() {
            LpOutcome::Infeasible { farkas } => assert!(p.check_farkas(&farkas)),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn handles_free_variables_and_equalities() {
        // min x - y subject to x + y = 2, x - y = 1, both free.
        let p = LpProblem {
            sense: Sense::Minimize,
            objective: vec![int(1), int(-1)],
            constraints: vec![
                Constraint::new(vec![int(1), int(1)], Relation::Eq, int(2)),
                Constraint::new(vec![int(1), int(-1)], Relation::Eq, int(1)),
            ],
            bounds: vec![(None, None), (None, None)],
        };
        match solve(&p).unwrap() {
            LpOutcome::Optimal { point, value } => {
                assert_eq!(point, vec![rat(3, 2), rat(1, 2)]);
                assert_eq!(value, int(1));
            }
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn honors_shifted_lower_bounds() {
        // min x + y with x >= 2, y >= -3, x + y >= 0.
        let p = LpProblem {
            sense: Sense::Minimize,
            objective: vec![int(1), int(1)],
            constraints: vec![Constraint::new(vec![int(1), int(1)], Relation::Ge, int(0))],
            bounds: vec![(Some(int(2)), None), (Some(int(-3)), None)],
        };
        match solve(&p).unwrap() {
            LpOutcome::Optimal { point, value } => {
                assert_eq!(value, int(0));
                assert!(p.check_point(&point));
            }
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn degenerate_cone_has_zero_optimum() {
        // max x + y subject to x <= y, y <= x, x + y <= 0, x,y >= 0:
        // the only feasible point is the origin.
        let p = LpProblem {
            sense: Sense::Maximize,
            objective: vec![int(1), int(1)],
            constraints: vec![
                Constraint::new(vec![int(1), int(-1)], Relation::Le, int(0)),
                Constraint::new(vec![int(-1), int(1)], Relation::Le, int(0)),
                Constraint::new(vec![int(1), int(1)], Relation::Le, int(0)),
            ],
            bounds: bounded_nonneg(2),
        };
        match solve(&p).unwrap() {
            LpOutcome::Optimal { point, value } => {
                assert_eq!(point, vec![int(0), int(0)]);
                assert_eq!(value, int(0));
            }
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn identical_inputs_take_identical_paths() {
        let p = LpProblem {
            sense: Sense::Maximize,
            objective: vec![int(2), int(3), int(1)],
            constraints: vec![
                Constraint::new(vec![int(1), int(1), int(1)], Relation::Le, int(10)),
                Constraint::new(vec![int(1), int(2), int(0)], Relation::Le, int(8)),
                Constraint::new(vec![int(0), int(1), int(3)], Relation::Ge, int(1)),
            ],
            bounds: bounded_nonneg(3),
        };
        let a = solve(&p).unwrap();
        let b = solve(&p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_malformed_dimensions() {
        let p = LpProblem {
            sense: Sense::Maximize,
            objective: vec![int(1)],
            constraints: vec![Constraint::new(vec![int(1), int(2)], Relation::Le, int(1))],
            bounds: vec![(None, None)],
        };
        assert!(solve(&p).is_err());
    }
}
