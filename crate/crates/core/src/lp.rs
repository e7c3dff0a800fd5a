//! Exact rational linear programming.
//!
//! A dense two-phase primal simplex with Bland's pivoting rule. Every outcome
//! carries a certificate that can be checked by re-substitution with
//! [`certify`]: optimal solutions come with dual multipliers and zero duality
//! gap, unbounded problems with a feasible point and an improving ray, and
//! infeasible problems with a Farkas multiplier vector.
//!
//! Dual multipliers are reported in the convention of the problem's own sense.
//! For a maximization they satisfy `y_i >= 0` on `<=` rows, `y_i <= 0` on `>=`
//! rows and `A^T y + z >= c` on nonnegative variables; for a minimization every
//! inequality flips. `z` holds the multipliers of finite upper bounds.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::num::{dot, zero, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LowerBound {
    NonNegative,
    Free,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarBounds {
    pub lower: LowerBound,
    pub upper: Option<Rational>,
}

impl Default for VarBounds {
    fn default() -> Self {
        VarBounds {
            lower: LowerBound::NonNegative,
            upper: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpProblem {
    pub sense: Sense,
    pub objective: Vec<Rational>,
    pub matrix: Vec<Vec<Rational>>,
    pub relations: Vec<Relation>,
    pub rhs: Vec<Rational>,
    pub bounds: Vec<VarBounds>,
}

impl LpProblem {
    /// Problem with `objective.len()` nonnegative variables and no rows.
    pub fn new(sense: Sense, objective: Vec<Rational>) -> Self {
        let n = objective.len();
        LpProblem {
            sense,
            objective,
            matrix: Vec::new(),
            relations: Vec::new(),
            rhs: Vec::new(),
            bounds: vec![VarBounds::default(); n],
        }
    }

    /// Pure feasibility problem over `n` nonnegative variables.
    pub fn feasibility(n: usize) -> Self {
        Self::new(Sense::Maximize, vec![zero(); n])
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.matrix.len()
    }

    pub fn add_row(&mut self, row: Vec<Rational>, relation: Relation, rhs: Rational) -> &mut Self {
        self.matrix.push(row);
        self.relations.push(relation);
        self.rhs.push(rhs);
        self
    }

    pub fn set_free(&mut self, var: usize) -> &mut Self {
        self.bounds[var].lower = LowerBound::Free;
        self
    }

    pub fn set_upper(&mut self, var: usize, upper: Rational) -> &mut Self {
        self.bounds[var].upper = Some(upper);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.objective.len();
        if self.relations.len() != self.matrix.len() || self.rhs.len() != self.matrix.len() {
            return Err(Error::Dimension(format!(
                "{} rows, {} relations, {} right-hand sides",
                self.matrix.len(),
                self.relations.len(),
                self.rhs.len()
            )));
        }
        if self.bounds.len() != n {
            return Err(Error::Dimension(format!(
                "{} variables but {} bounds",
                n,
                self.bounds.len()
            )));
        }
        if let Some((i, row)) = self.matrix.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::Dimension(format!(
                "row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        Ok(())
    }

    /// Objective written as a maximization.
    fn max_objective(&self) -> Vec<Rational> {
        match self.sense {
            Sense::Maximize => self.objective.clone(),
            Sense::Minimize => self.objective.iter().map(|c| -c).collect(),
        }
    }

    pub fn objective_at(&self, x: &[Rational]) -> Rational {
        dot(&self.objective, x)
    }

    /// Exact feasibility check of a point.
    pub fn is_feasible_point(&self, x: &[Rational]) -> bool {
        if x.len() != self.num_vars() {
            return false;
        }
        let bounds_ok =
            self.bounds.iter().zip(x).all(|(b, v)| {
                (b.lower == LowerBound::Free || !v.is_negative()) && b.upper.as_ref().is_none_or(|u| v <= u)
            });
        bounds_ok
            && self
                .matrix
                .iter()
                .zip(&self.relations)
                .zip(&self.rhs)
                .all(|((row, rel), b)| holds(&dot(row, x), *rel, b))
    }
}

fn holds(lhs: &Rational, rel: Relation, rhs: &Rational) -> bool {
    match rel {
        Relation::Le => lhs <= rhs,
        Relation::Eq => lhs == rhs,
        Relation::Ge => lhs >= rhs,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Optimum {
    pub primal: Vec<Rational>,
    /// One multiplier per constraint row.
    pub dual: Vec<Rational>,
    /// One multiplier per variable; zero where there is no finite upper bound.
    pub bound_dual: Vec<Rational>,
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnboundedRay {
    pub point: Vec<Rational>,
    pub ray: Vec<Rational>,
}

/// Multipliers `(y, z)` with `y^T b + z^T u < 0` while `y^T A + z` is
/// nonnegative on nonnegative variables and zero on free ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FarkasCertificate {
    pub row_multipliers: Vec<Rational>,
    pub bound_multipliers: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal(Optimum),
    Unbounded(UnboundedRay),
    Infeasible(FarkasCertificate),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Unbounded,
    Infeasible,
}

impl LpOutcome {
    pub fn status(&self) -> LpStatus {
        match self {
            LpOutcome::Optimal(_) => LpStatus::Optimal,
            LpOutcome::Unbounded(_) => LpStatus::Unbounded,
            LpOutcome::Infeasible(_) => LpStatus::Infeasible,
        }
    }

    pub fn optimum(&self) -> Option<&Optimum> {
        match self {
            LpOutcome::Optimal(opt) => Some(opt),
            _ => None,
        }
    }

    pub fn value(&self) -> Option<&Rational> {
        self.optimum().map(|o| &o.value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility {
    Feasible(Vec<Rational>),
    Infeasible(FarkasCertificate),
}

pub fn solve(problem: &LpProblem) -> Result<LpOutcome> {
    problem.validate()?;
    let mut tab = Tableau::standard_form(problem);
    if let Some(cert) = tab.phase_one() {
        return Ok(LpOutcome::Infeasible(tab.farkas(cert)));
    }
    Ok(tab.phase_two(problem))
}

/// Phase one only: a feasible point or a Farkas certificate.
pub fn feasible(problem: &LpProblem) -> Result<Feasibility> {
    problem.validate()?;
    let mut tab = Tableau::standard_form(problem);
    match tab.phase_one() {
        Some(cert) => Ok(Feasibility::Infeasible(tab.farkas(cert))),
        None => Ok(Feasibility::Feasible(tab.primal())),
    }
}

// Column kinds in the standard-form tableau.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Column {
    Positive(usize),
    Negative(usize),
    Slack,
    Artificial,
}

/// Standard form `A' x' = b'`, `x' >= 0`, `b' >= 0`. Row `i` of `A'` is
/// `sign[i]` times original row `i` (constraint rows first, then one row per
/// finite upper bound) plus its slack.
struct Tableau {
    n_orig: usize,
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    columns: Vec<Column>,
    basis: Vec<usize>,
    // column that held e_i in the initial tableau, so B^-1 e_i is readable later
    identity: Vec<usize>,
    sign: Vec<bool>,
    // per original row index in the standard rows; bound rows map back to variables
    bound_var: Vec<Option<usize>>,
    cost: Vec<Rational>,
    value: Rational,
    phase_costs: Vec<Rational>,
}

struct Phase1Failed;

impl Tableau {
    fn standard_form(p: &LpProblem) -> Self {
        let n = p.num_vars();
        let mut columns = Vec::new();
        let mut pos_col = vec![0; n];
        let mut neg_col = vec![None; n];
        for j in 0..n {
            pos_col[j] = columns.len();
            columns.push(Column::Positive(j));
            if p.bounds[j].lower == LowerBound::Free {
                neg_col[j] = Some(columns.len());
                columns.push(Column::Negative(j));
            }
        }

        // (coefficients over original variables, relation, rhs, bound variable)
        let mut raw: Vec<(Vec<(usize, Rational)>, Relation, Rational, Option<usize>)> = Vec::new();
        for ((row, rel), b) in p.matrix.iter().zip(&p.relations).zip(&p.rhs) {
            let entries = row
                .iter()
                .enumerate()
                .filter(|(_, a)| !a.is_zero())
                .map(|(j, a)| (j, a.clone()))
                .collect();
            raw.push((entries, *rel, b.clone(), None));
        }
        for (j, bound) in p.bounds.iter().enumerate() {
            if let Some(u) = &bound.upper {
                raw.push((
                    vec![(j, Rational::from_integer(1.into()))],
                    Relation::Le,
                    u.clone(),
                    Some(j),
                ));
            }
        }

        let m = raw.len();
        let mut slack_col = vec![None; m];
        for (i, (_, rel, _, _)) in raw.iter().enumerate() {
            if *rel != Relation::Eq {
                slack_col[i] = Some(columns.len());
                columns.push(Column::Slack);
            }
        }

        let mut sign = vec![false; m];
        let mut identity = vec![0; m];
        let mut needs_artificial = vec![false; m];
        for (i, (_, rel, b, _)) in raw.iter().enumerate() {
            // zero-rhs `>=` rows flip too, so their slack can start in the basis
            sign[i] = b.is_negative() || (b.is_zero() && *rel == Relation::Ge);
            // after flipping, a slack whose coefficient is +1 can start in the basis
            let slack_positive = match rel {
                Relation::Le => !sign[i],
                Relation::Ge => sign[i],
                Relation::Eq => false,
            };
            if slack_positive {
                identity[i] = slack_col[i].unwrap();
            } else {
                needs_artificial[i] = true;
            }
        }
        for i in 0..m {
            if needs_artificial[i] {
                identity[i] = columns.len();
                columns.push(Column::Artificial);
            }
        }

        let width = columns.len();
        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        for (i, (entries, rel, b, _)) in raw.iter().enumerate() {
            let mut row = vec![zero(); width];
            for (j, a) in entries {
                row[pos_col[*j]] = a.clone();
                if let Some(nc) = neg_col[*j] {
                    row[nc] = -a;
                }
            }
            if let Some(s) = slack_col[i] {
                row[s] = match rel {
                    Relation::Le => Rational::from_integer(1.into()),
                    _ => Rational::from_integer((-1).into()),
                };
            }
            let mut b = b.clone();
            if sign[i] {
                for v in row.iter_mut() {
                    *v = -&*v;
                }
                b = -b;
            }
            if needs_artificial[i] {
                row[identity[i]] = Rational::from_integer(1.into());
            }
            rows.push(row);
            rhs.push(b);
        }

        Tableau {
            n_orig: n,
            rows,
            rhs,
            basis: identity.clone(),
            identity,
            sign,
            bound_var: raw.iter().map(|r| r.3).collect(),
            columns,
            cost: vec![zero(); width],
            value: zero(),
            phase_costs: vec![zero(); width],
        }
    }

    fn width(&self) -> usize {
        self.columns.len()
    }

    fn is_artificial(&self, j: usize) -> bool {
        self.columns[j] == Column::Artificial
    }

    /// Installs a maximization objective over standard columns and prices out the basis.
    fn set_costs(&mut self, costs: Vec<Rational>) {
        let mut reduced = costs.clone();
        let mut value = zero();
        for (k, &bj) in self.basis.iter().enumerate() {
            let cb = &costs[bj];
            if cb.is_zero() {
                continue;
            }
            for (j, a) in self.rows[k].iter().enumerate() {
                if !a.is_zero() {
                    reduced[j] -= cb * a;
                }
            }
            value += cb * &self.rhs[k];
        }
        self.cost = reduced;
        self.value = value;
        self.phase_costs = costs;
    }

    fn pivot(&mut self, r: usize, s: usize) {
        let piv = self.rows[r][s].clone();
        if piv != Rational::from_integer(1.into()) {
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v /= &piv;
                }
            }
            self.rhs[r] /= &piv;
        }
        let prow = self.rows[r].clone();
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][s].clone();
            if f.is_zero() {
                continue;
            }
            for (v, p) in self.rows[i].iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
            self.rhs[i] -= &f * &prhs;
        }
        let f = self.cost[s].clone();
        if !f.is_zero() {
            for (v, p) in self.cost.iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
            self.value += &f * &prhs;
        }
        self.basis[r] = s;
    }

    /// Bland's rule primal simplex on the current costs. Returns the entering
    /// column of an unbounded direction, or `None` at optimality.
    fn iterate(&mut self, allow_artificial: bool) -> Option<usize> {
        loop {
            let entering =
                (0..self.width()).find(|&j| self.cost[j].is_positive() && (allow_artificial || !self.is_artificial(j)));
            let s = entering?;
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][s];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &leave {
                    None => true,
                    Some((r, best)) => ratio < *best || (ratio == *best && self.basis[i] < self.basis[*r]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, s),
                None => return Some(s),
            }
        }
    }

    fn phase_one(&mut self) -> Option<Phase1Failed> {
        if !self.columns.contains(&Column::Artificial) {
            return None;
        }
        let costs = self
            .columns
            .iter()
            .map(|c| match c {
                Column::Artificial => Rational::from_integer((-1).into()),
                _ => zero(),
            })
            .collect();
        self.set_costs(costs);
        // phase one is bounded above by zero, so no unbounded exit
        let _ = self.iterate(true);
        if self.value.is_negative() {
            return Some(Phase1Failed);
        }
        for r in 0..self.rows.len() {
            if !self.is_artificial(self.basis[r]) {
                continue;
            }
            if let Some(j) = (0..self.width()).find(|&j| !self.is_artificial(j) && !self.rows[r][j].is_zero()) {
                self.pivot(r, j);
            }
        }
        None
    }

    /// Dual values `y' = c_B B^-1` of the standard rows for the installed costs.
    fn standard_duals(&self) -> Vec<Rational> {
        self.identity
            .iter()
            .map(|&col| &self.phase_costs[col] - &self.cost[col])
            .collect()
    }

    /// Splits standard-row duals into constraint-row and bound multipliers in the
    /// orientation of the original rows.
    fn split_duals(&self, standard: Vec<Rational>) -> (Vec<Rational>, Vec<Rational>) {
        let mut rows = Vec::new();
        let mut bounds = vec![zero(); self.n_orig];
        for (i, y) in standard.into_iter().enumerate() {
            let y = if self.sign[i] { -y } else { y };
            match self.bound_var[i] {
                Some(j) => bounds[j] = y,
                None => rows.push(y),
            }
        }
        (rows, bounds)
    }

    fn farkas(&self, _: Phase1Failed) -> FarkasCertificate {
        let (row_multipliers, bound_multipliers) = self.split_duals(self.standard_duals());
        FarkasCertificate {
            row_multipliers,
            bound_multipliers,
        }
    }

    fn column_values(&self) -> Vec<Rational> {
        let mut vals = vec![zero(); self.width()];
        for (k, &bj) in self.basis.iter().enumerate() {
            vals[bj] = self.rhs[k].clone();
        }
        vals
    }

    fn to_original(&self, vals: &[Rational]) -> Vec<Rational> {
        let mut x = vec![zero(); self.n_orig];
        for (j, c) in self.columns.iter().enumerate() {
            match c {
                Column::Positive(v) => x[*v] += &vals[j],
                Column::Negative(v) => x[*v] -= &vals[j],
                _ => {}
            }
        }
        x
    }

    fn primal(&self) -> Vec<Rational> {
        self.to_original(&self.column_values())
    }

    fn phase_two(&mut self, p: &LpProblem) -> LpOutcome {
        let c = p.max_objective();
        let costs = self
            .columns
            .iter()
            .map(|col| match col {
                Column::Positive(j) => c[*j].clone(),
                Column::Negative(j) => -&c[*j],
                _ => zero(),
            })
            .collect();
        self.set_costs(costs);
        if let Some(s) = self.iterate(false) {
            let mut dir = vec![zero(); self.width()];
            dir[s] = Rational::from_integer(1.into());
            for (k, &bj) in self.basis.iter().enumerate() {
                if !self.rows[k][s].is_zero() {
                    dir[bj] = -&self.rows[k][s];
                }
            }
            return LpOutcome::Unbounded(UnboundedRay {
                point: self.primal(),
                ray: self.to_original(&dir),
            });
        }
        let (mut dual, mut bound_dual) = self.split_duals(self.standard_duals());
        let mut value = self.value.clone();
        if p.sense == Sense::Minimize {
            dual.iter_mut().for_each(|y| *y = -&*y);
            bound_dual.iter_mut().for_each(|z| *z = -&*z);
            value = -value;
        }
        LpOutcome::Optimal(Optimum {
            primal: self.primal(),
            dual,
            bound_dual,
            value,
        })
    }
}

/// Re-verifies an outcome's certificate against the problem by exact substitution.
pub fn certify(p: &LpProblem, outcome: &LpOutcome) -> std::result::Result<(), String> {
    p.validate().map_err(|e| e.to_string())?;
    let n = p.num_vars();
    match outcome {
        LpOutcome::Optimal(opt) => {
            if !p.is_feasible_point(&opt.primal) {
                return Err("optimal primal is infeasible".into());
            }
            if p.objective_at(&opt.primal) != opt.value {
                return Err("reported value differs from c·x".into());
            }
            let flip = p.sense == Sense::Minimize;
            let neg = |v: &Rational| if flip { -v } else { v.clone() };
            let y: Vec<Rational> = opt.dual.iter().map(neg).collect();
            let z: Vec<Rational> = opt.bound_dual.iter().map(neg).collect();
            check_multiplier_signs(p, &y, &z)?;
            let c = p.max_objective();
            let aty = transpose_apply(p, &y, &z);
            for j in 0..n {
                let slackness = &aty[j] - &c[j];
                let ok = match p.bounds[j].lower {
                    LowerBound::NonNegative => !slackness.is_negative(),
                    LowerBound::Free => slackness.is_zero(),
                };
                if !ok {
                    return Err(format!("dual constraint for variable {j} violated"));
                }
            }
            let dual_value = dual_objective(p, &y, &z);
            let primal_value = dot(&c, &opt.primal);
            if dual_value != primal_value {
                return Err(format!("duality gap {primal_value} vs {dual_value}"));
            }
            Ok(())
        }
        LpOutcome::Unbounded(u) => {
            if !p.is_feasible_point(&u.point) {
                return Err("unbounded witness point is infeasible".into());
            }
            if u.ray.len() != n {
                return Err("ray has wrong length".into());
            }
            for j in 0..n {
                let d = &u.ray[j];
                if p.bounds[j].lower == LowerBound::NonNegative && d.is_negative() {
                    return Err(format!("ray leaves lower bound of variable {j}"));
                }
                if p.bounds[j].upper.is_some() && d.is_positive() {
                    return Err(format!("ray leaves upper bound of variable {j}"));
                }
            }
            for (row, rel) in p.matrix.iter().zip(&p.relations) {
                if !holds(&dot(row, &u.ray), *rel, &zero()) {
                    return Err("ray is not a recession direction".into());
                }
            }
            if !dot(&p.max_objective(), &u.ray).is_positive() {
                return Err("ray does not improve the objective".into());
            }
            Ok(())
        }
        LpOutcome::Infeasible(cert) => {
            let (y, z) = (&cert.row_multipliers, &cert.bound_multipliers);
            check_multiplier_signs(p, y, z)?;
            let aty = transpose_apply(p, y, z);
            for j in 0..n {
                let ok = match p.bounds[j].lower {
                    LowerBound::NonNegative => !aty[j].is_negative(),
                    LowerBound::Free => aty[j].is_zero(),
                };
                if !ok {
                    return Err(format!("Farkas combination fails on variable {j}"));
                }
            }
            if !dual_objective(p, y, z).is_negative() {
                return Err("Farkas right-hand side is not negative".into());
            }
            Ok(())
        }
    }
}

fn check_multiplier_signs(p: &LpProblem, y: &[Rational], z: &[Rational]) -> std::result::Result<(), String> {
    if y.len() != p.num_rows() || z.len() != p.num_vars() {
        return Err("multiplier vector has wrong length".into());
    }
    for (i, (rel, yi)) in p.relations.iter().zip(y).enumerate() {
        let ok = match rel {
            Relation::Le => !yi.is_negative(),
            Relation::Ge => !yi.is_positive(),
            Relation::Eq => true,
        };
        if !ok {
            return Err(format!("multiplier {i} has the wrong sign"));
        }
    }
    for (j, zj) in z.iter().enumerate() {
        if zj.is_negative() || (p.bounds[j].upper.is_none() && !zj.is_zero()) {
            return Err(format!("bound multiplier {j} invalid"));
        }
    }
    Ok(())
}

fn transpose_apply(p: &LpProblem, y: &[Rational], z: &[Rational]) -> Vec<Rational> {
    let mut out = z.to_vec();
    for (row, yi) in p.matrix.iter().zip(y) {
        if yi.is_zero() {
            continue;
        }
        for (o, a) in out.iter_mut().zip(row) {
            if !a.is_zero() {
                *o += yi * a;
            }
        }
    }
    out
}

fn dual_objective(p: &LpProblem, y: &[Rational], z: &[Rational]) -> Rational {
    let mut v = dot(&p.rhs, y);
    for (b, zj) in p.bounds.iter().zip(z) {
        if let Some(u) = &b.upper {
            v += u * zj;
        }
    }
    v
}
