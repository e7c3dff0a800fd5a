//! Finitely generated cones and semi-solid sets, and their gauges.
//!
//! Every set question is answered by a single exact LP.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::lattice::{RandomVariable, SampleSpace};
use crate::lp::{self, Feasibility, LpOutcome, LpProblem, Relation, Sense};
use crate::num::{one, zero, Rational};

/// A value in `[0, +∞]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Gauge {
    Finite(Rational),
    Infinite,
}

impl Gauge {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Gauge::Finite(v) => Some(v),
            Gauge::Infinite => None,
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Gauge::Finite(v) => v.is_positive(),
            Gauge::Infinite => true,
        }
    }

    pub fn scale(&self, alpha: &Rational) -> Gauge {
        match self {
            Gauge::Finite(v) => Gauge::Finite(v * alpha),
            Gauge::Infinite if alpha.is_zero() => Gauge::Finite(zero()),
            Gauge::Infinite => Gauge::Infinite,
        }
    }
}

impl PartialOrd for Gauge {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Gauge {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Gauge::Finite(a), Gauge::Finite(b)) => a.cmp(b),
            (Gauge::Finite(_), Gauge::Infinite) => Ordering::Less,
            (Gauge::Infinite, Gauge::Finite(_)) => Ordering::Greater,
            (Gauge::Infinite, Gauge::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Gauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gauge::Finite(v) => f.write_str(&crate::num::format_rational(v)),
            Gauge::Infinite => f.write_str("inf"),
        }
    }
}

fn check_members(space: &Arc<SampleSpace>, vectors: &[RandomVariable]) -> Result<()> {
    if vectors.iter().any(|v| v.space() != space) {
        return Err(Error::SpaceMismatch);
    }
    Ok(())
}

/// `{Σ λ_g g : λ >= 0}`, minus the nonnegative orthant when `includes_neg_orthant`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyhedralCone {
    space: Arc<SampleSpace>,
    generators: Vec<RandomVariable>,
    includes_neg_orthant: bool,
}

impl PolyhedralCone {
    pub fn new(space: &Arc<SampleSpace>, generators: Vec<RandomVariable>, includes_neg_orthant: bool) -> Result<Self> {
        check_members(space, &generators)?;
        Ok(PolyhedralCone {
            space: Arc::clone(space),
            generators,
            includes_neg_orthant,
        })
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    pub fn generators(&self) -> &[RandomVariable] {
        &self.generators
    }

    pub fn includes_neg_orthant(&self) -> bool {
        self.includes_neg_orthant
    }

    /// The same generators with `-V₊` added.
    pub fn minus_orthant(&self) -> Self {
        PolyhedralCone {
            includes_neg_orthant: true,
            ..self.clone()
        }
    }

    /// Coefficients `λ >= 0` with `Σ λ_g g >= x` (or `= x` without the orthant),
    /// if any exist.
    pub fn decompose(&self, x: &RandomVariable) -> Result<Option<Vec<Rational>>> {
        if x.space() != &self.space {
            return Err(Error::SpaceMismatch);
        }
        let k = self.generators.len();
        let mut p = LpProblem::feasibility(k);
        let rel = if self.includes_neg_orthant {
            Relation::Ge
        } else {
            Relation::Eq
        };
        for (w, xw) in x.values().iter().enumerate() {
            let row = self.generators.iter().map(|g| g.values()[w].clone()).collect();
            p.add_row(row, rel, xw.clone());
        }
        Ok(match lp::feasible(&p)? {
            Feasibility::Feasible(lambda) => Some(lambda),
            Feasibility::Infeasible(_) => None,
        })
    }

    pub fn contains(&self, x: &RandomVariable) -> Result<bool> {
        Ok(self.decompose(x)?.is_some())
    }
}

pub fn cone_member(cone: &PolyhedralCone, x: &RandomVariable) -> Result<bool> {
    cone.contains(x)
}

/// The convex, semi-solid set
/// `{x >= 0 : x <= Σ λ_g g + Σ μ_r r, λ, μ >= 0, Σ λ_g <= 1}`.
///
/// Without rays this is the downward closure in `V₊` of the convex hull of
/// `{0}` and the generators. Rays are nonnegative recession directions; a set
/// with a nonzero ray contains a whole half-line and is unbounded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemiSolidSet {
    space: Arc<SampleSpace>,
    generators: Vec<RandomVariable>,
    rays: Vec<RandomVariable>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Boundedness {
    pub bounded: bool,
    /// `sup_{x in B} ‖x‖_∞` when bounded.
    pub linf_bound: Option<Rational>,
}

impl SemiSolidSet {
    pub fn new(space: &Arc<SampleSpace>, generators: Vec<RandomVariable>) -> Result<Self> {
        Self::with_rays(space, generators, Vec::new())
    }

    pub fn with_rays(
        space: &Arc<SampleSpace>,
        generators: Vec<RandomVariable>,
        rays: Vec<RandomVariable>,
    ) -> Result<Self> {
        check_members(space, &generators)?;
        check_members(space, &rays)?;
        if generators.iter().chain(&rays).any(|g| !g.is_nonneg()) {
            return Err(Error::Contract("semi-solid set generators must be nonnegative".into()));
        }
        Ok(SemiSolidSet {
            space: Arc::clone(space),
            generators,
            rays,
        })
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    pub fn generators(&self) -> &[RandomVariable] {
        &self.generators
    }

    pub fn rays(&self) -> &[RandomVariable] {
        &self.rays
    }

    /// Rows `Σ λ_g g_w + Σ μ_r r_w >= x_w` over variables `(λ, μ)`.
    fn domination_rows(&self, p: &mut LpProblem, x: &RandomVariable) {
        for (w, xw) in x.values().iter().enumerate() {
            let row = self
                .generators
                .iter()
                .chain(&self.rays)
                .map(|g| g.values()[w].clone())
                .collect();
            p.add_row(row, Relation::Ge, xw.clone());
        }
    }

    fn budget_row(&self) -> Vec<Rational> {
        let mut row = vec![one(); self.generators.len()];
        row.resize(self.generators.len() + self.rays.len(), zero());
        row
    }

    /// `x ∈ scale · B`.
    pub fn contains_scaled(&self, x: &RandomVariable, scale: &Rational) -> Result<bool> {
        if x.space() != &self.space {
            return Err(Error::SpaceMismatch);
        }
        if !scale.is_positive() {
            return Err(Error::Contract("scale must be positive".into()));
        }
        if !x.is_nonneg() {
            return Ok(false);
        }
        let mut p = LpProblem::feasibility(self.generators.len() + self.rays.len());
        self.domination_rows(&mut p, x);
        p.add_row(self.budget_row(), Relation::Le, scale.clone());
        Ok(matches!(lp::feasible(&p)?, Feasibility::Feasible(_)))
    }

    pub fn contains(&self, x: &RandomVariable) -> Result<bool> {
        self.contains_scaled(x, &one())
    }

    /// The gauge `inf {α > 0 : x ∈ αB}`; attained whenever finite.
    pub fn minkowski(&self, x: &RandomVariable) -> Result<Gauge> {
        if x.space() != &self.space {
            return Err(Error::SpaceMismatch);
        }
        if !x.is_nonneg() {
            return Ok(Gauge::Infinite);
        }
        let mut p = LpProblem::new(Sense::Minimize, self.budget_row());
        self.domination_rows(&mut p, x);
        Ok(match lp::solve(&p)? {
            LpOutcome::Optimal(opt) => Gauge::Finite(opt.value),
            LpOutcome::Infeasible(_) => Gauge::Infinite,
            LpOutcome::Unbounded(_) => unreachable!("gauge LP is bounded below by zero"),
        })
    }

    /// Exact `ℓ∞` bound. Bounded iff every ray is zero; the supremum of a
    /// convex norm over the polytope sits at a vertex, i.e. at a generator.
    pub fn is_bounded(&self) -> Boundedness {
        if self.rays.iter().any(|r| !r.is_zero()) {
            return Boundedness {
                bounded: false,
                linf_bound: None,
            };
        }
        let bound = self
            .generators
            .iter()
            .map(RandomVariable::linf_norm)
            .max()
            .unwrap_or_else(zero);
        Boundedness {
            bounded: true,
            linf_bound: Some(bound),
        }
    }

    /// `sup_{x in B} ‖x‖²_2`, or `None` when unbounded.
    pub fn sup_l2_squared(&self) -> Option<Rational> {
        if !self.is_bounded().bounded {
            return None;
        }
        Some(
            self.generators
                .iter()
                .map(RandomVariable::l2_norm_squared)
                .max()
                .unwrap_or_else(zero),
        )
    }

    /// `⋂_{α>0} αB = {0}`, decided through the gauge of each outcome indicator.
    pub fn zero_set_trivial(&self) -> Result<bool> {
        for w in 0..self.space.len() {
            let e = RandomVariable::indicator(&self.space, w);
            if !self.minkowski(&e)?.is_positive() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

pub fn semisolid_member(b: &SemiSolidSet, x: &RandomVariable, scale: &Rational) -> Result<bool> {
    b.contains_scaled(x, scale)
}

pub fn minkowski(b: &SemiSolidSet, x: &RandomVariable) -> Result<Gauge> {
    b.minkowski(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, ratio};

    fn rv(space: &Arc<SampleSpace>, v: &[Rational]) -> RandomVariable {
        RandomVariable::new(space, v.to_vec()).unwrap()
    }

    fn counterexample(n: usize) -> SemiSolidSet {
        let s = SampleSpace::uniform(n).unwrap();
        let gens = (0..n)
            .map(|k| RandomVariable::indicator(&s, k).scale(&int(k as i64 + 1)))
            .collect();
        SemiSolidSet::new(&s, gens).unwrap()
    }

    #[test]
    fn cone_membership() {
        let s = SampleSpace::uniform(2).unwrap();
        let cone = PolyhedralCone::new(&s, vec![rv(&s, &[int(1), int(-1)])], true).unwrap();
        assert!(cone.contains(&rv(&s, &[int(1), int(-2)])).unwrap());
        assert!(!cone.contains(&rv(&s, &[int(1), int(0)])).unwrap());
        assert!(cone.contains(&RandomVariable::zero(&s)).unwrap());
        let bare = PolyhedralCone::new(&s, vec![rv(&s, &[int(1), int(-1)])], false).unwrap();
        assert!(!bare.contains(&rv(&s, &[int(1), int(-2)])).unwrap());
        assert!(bare.contains(&RandomVariable::zero(&s)).unwrap());
    }

    #[test]
    fn outside_point_has_farkas_certificate() {
        // (1,0) = λ(1,-1) - w needs λ >= 1 and -λ >= w_2 >= 0 at once
        let s = SampleSpace::uniform(2).unwrap();
        let mut p = LpProblem::feasibility(1);
        p.add_row(vec![int(1)], Relation::Ge, int(1))
            .add_row(vec![int(-1)], Relation::Ge, int(0));
        let Feasibility::Infeasible(cert) = lp::feasible(&p).unwrap() else {
            panic!()
        };
        lp::certify(&p, &LpOutcome::Infeasible(cert)).unwrap();
        let cone = PolyhedralCone::new(&s, vec![rv(&s, &[int(1), int(-1)])], true).unwrap();
        assert_eq!(cone.decompose(&rv(&s, &[int(1), int(0)])).unwrap(), None);
    }

    #[test]
    fn semisolid_membership() {
        let s = SampleSpace::uniform(2).unwrap();
        let b = SemiSolidSet::new(&s, vec![rv(&s, &[int(1), int(1)])]).unwrap();
        let half = rv(&s, &[ratio(1, 2), ratio(1, 2)]);
        assert!(b.contains_scaled(&half, &one()).unwrap());
        assert!(!b.contains_scaled(&half, &ratio(1, 4)).unwrap());
        assert!(!b.contains(&rv(&s, &[int(-1), int(0)])).unwrap());
        assert!(b.contains_scaled(&half, &int(0)).is_err());
    }

    #[test]
    fn gauge_values() {
        let b = counterexample(3);
        let s = b.space().clone();
        assert_eq!(b.minkowski(&RandomVariable::zero(&s)).unwrap(), Gauge::Finite(zero()));
        assert_eq!(
            b.minkowski(&RandomVariable::indicator(&s, 1)).unwrap(),
            Gauge::Finite(ratio(1, 2))
        );
        assert_eq!(
            b.minkowski(&rv(&s, &[int(1), int(1), int(0)])).unwrap(),
            Gauge::Finite(ratio(3, 2))
        );
        assert_eq!(
            b.minkowski(&rv(&s, &[int(-1), int(0), int(0)])).unwrap(),
            Gauge::Infinite
        );
    }

    #[test]
    fn boundedness() {
        let s = SampleSpace::uniform(2).unwrap();
        let b = SemiSolidSet::new(&s, vec![rv(&s, &[int(1), int(1)])]).unwrap();
        assert_eq!(b.is_bounded().linf_bound, Some(int(1)));
        let empty = SemiSolidSet::new(&s, vec![]).unwrap();
        assert_eq!(empty.is_bounded().linf_bound, Some(int(0)));
        let big = counterexample(100);
        assert_eq!(big.is_bounded().linf_bound, Some(int(100)));
        assert_eq!(big.sup_l2_squared(), Some(int(10000)));
        let rayed = SemiSolidSet::with_rays(&s, vec![], vec![rv(&s, &[int(1), int(0)])]).unwrap();
        assert!(!rayed.is_bounded().bounded);
        assert_eq!(rayed.sup_l2_squared(), None);
    }

    #[test]
    fn zero_set() {
        let s = SampleSpace::uniform(2).unwrap();
        let b = SemiSolidSet::new(&s, vec![rv(&s, &[int(1), int(1)])]).unwrap();
        assert_eq!(
            b.minkowski(&RandomVariable::indicator(&s, 0)).unwrap(),
            Gauge::Finite(one())
        );
        assert!(b.zero_set_trivial().unwrap());
        let partial = SemiSolidSet::new(&s, vec![rv(&s, &[int(1), int(0)])]).unwrap();
        assert_eq!(
            partial.minkowski(&RandomVariable::indicator(&s, 1)).unwrap(),
            Gauge::Infinite
        );
        assert!(partial.zero_set_trivial().unwrap());
    }

    #[test]
    fn negative_generators_rejected() {
        let s = SampleSpace::uniform(2).unwrap();
        assert!(SemiSolidSet::new(&s, vec![rv(&s, &[int(1), int(-1)])]).is_err());
    }

    #[test]
    fn gauge_ordering() {
        assert!(Gauge::Finite(int(5)) < Gauge::Infinite);
        assert!(Gauge::Finite(ratio(1, 3)) < Gauge::Finite(ratio(1, 2)));
        assert_eq!(Gauge::Infinite.scale(&int(0)), Gauge::Finite(zero()));
    }
}
