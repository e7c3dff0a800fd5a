//! Separating functionals for cones that contain `-V₊`.
//!
//! A functional on a finite space is a coefficient vector acting by the dot
//! product. Separation at a single target is one feasibility LP. A strictly
//! positive separator is assembled by averaging the `ℓ¹`-normalized separators
//! of every outcome indicator; if some indicator cannot be separated it lies in
//! the cone and is returned as the obstruction.

use std::sync::Arc;

use num_traits::Signed;

use crate::cone::PolyhedralCone;
use crate::error::{Error, Result};
use crate::lattice::{RandomVariable, SampleSpace};
use crate::lp::{self, Feasibility, LpProblem, Relation};
use crate::market::Measure;
use crate::num::{dot, int, one, sum, zero, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Functional {
    space: Arc<SampleSpace>,
    coefficients: Vec<Rational>,
}

impl Functional {
    pub fn new(space: &Arc<SampleSpace>, coefficients: Vec<Rational>) -> Result<Self> {
        if coefficients.len() != space.len() {
            return Err(Error::Dimension(format!(
                "{} coefficients for {} outcomes",
                coefficients.len(),
                space.len()
            )));
        }
        Ok(Functional {
            space: Arc::clone(space),
            coefficients,
        })
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    pub fn coefficients(&self) -> &[Rational] {
        &self.coefficients
    }

    pub fn apply(&self, x: &RandomVariable) -> Rational {
        dot(&self.coefficients, x.values())
    }

    pub fn is_positive(&self) -> bool {
        self.coefficients.iter().all(|c| !c.is_negative())
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.coefficients.iter().all(Signed::is_positive)
    }

    pub fn l1_norm(&self) -> Rational {
        self.coefficients.iter().fold(zero(), |acc, c| acc + c.abs())
    }

    /// `true` iff `x'(g) <= 0` for every generator of the cone.
    pub fn separates(&self, cone: &PolyhedralCone) -> bool {
        cone.generators().iter().all(|g| !self.apply(g).is_positive())
            && (!cone.includes_neg_orthant() || self.is_positive())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparationReport {
    pub functional: Functional,
    pub verified_on: usize,
    pub normalization: Rational,
}

fn require_orthant(cone: &PolyhedralCone) -> Result<()> {
    if cone.includes_neg_orthant() {
        Ok(())
    } else {
        Err(Error::Contract("separation needs a cone containing -V₊".into()))
    }
}

fn report(cone: &PolyhedralCone, functional: Functional, normalization: Rational) -> Result<SeparationReport> {
    if !functional.separates(cone) {
        return Err(Error::Witness("functional is positive on a generator".into()));
    }
    Ok(SeparationReport {
        functional,
        verified_on: cone.generators().len(),
        normalization,
    })
}

/// `c >= 0` with `c·g <= 0` on all generators and `c·target = 1`, or `None` when
/// the target lies in the cone.
pub fn separate_at(cone: &PolyhedralCone, target: &RandomVariable) -> Result<Option<SeparationReport>> {
    require_orthant(cone)?;
    if target.space() != cone.space() {
        return Err(Error::SpaceMismatch);
    }
    if !target.is_nonneg() || target.is_zero() {
        return Err(Error::Contract("separation target must lie in V₊ \\ {0}".into()));
    }
    let n = cone.space().len();
    let mut p = LpProblem::feasibility(n);
    for g in cone.generators() {
        p.add_row(g.values().to_vec(), Relation::Le, zero());
    }
    p.add_row(target.values().to_vec(), Relation::Eq, one());
    match lp::feasible(&p)? {
        Feasibility::Infeasible(_) => Ok(None),
        Feasibility::Feasible(c) => {
            let f = Functional::new(cone.space(), c)?;
            if f.apply(target) != one() {
                return Err(Error::Witness("separator does not normalize the target".into()));
            }
            Ok(Some(report(cone, f, one())?))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StrictSeparation {
    Found(SeparationReport),
    /// Outcome whose indicator lies in the cone.
    Violated {
        outcome: usize,
        direction: RandomVariable,
    },
}

/// Average of the per-indicator separators, each scaled to unit `ℓ¹` norm.
pub fn strict_separator(cone: &PolyhedralCone) -> Result<StrictSeparation> {
    require_orthant(cone)?;
    let space = cone.space();
    let n = space.len();
    let mut acc = vec![zero(); n];
    for w in 0..n {
        let e = RandomVariable::indicator(space, w);
        let Some(rep) = separate_at(cone, &e)? else {
            return Ok(StrictSeparation::Violated {
                outcome: w,
                direction: e,
            });
        };
        let norm = rep.functional.l1_norm();
        for (a, c) in acc.iter_mut().zip(rep.functional.coefficients()) {
            *a += c / &norm;
        }
    }
    let count = int(n as i64);
    let coeffs = acc.into_iter().map(|a| a / &count).collect();
    let f = Functional::new(space, coeffs)?;
    if !f.is_strictly_positive() {
        return Err(Error::Witness("averaged separator is not strictly positive".into()));
    }
    let normalization = f.l1_norm();
    Ok(StrictSeparation::Found(report(cone, f, normalization)?))
}

/// `(Q, c)` with `f(x) = c · E_Q[x]`: `q = coeff / Σ coeff`, `c = Σ coeff`.
pub fn functional_to_measure(f: &Functional) -> Result<(Measure, Rational)> {
    if !f.is_strictly_positive() {
        return Err(Error::Contract("functional must be strictly positive".into()));
    }
    let scale = sum(f.coefficients());
    let q = Measure::new(f.space(), f.coefficients().iter().map(|c| c / &scale).collect())?;
    for w in 0..f.space().len() {
        let e = RandomVariable::indicator(f.space(), w);
        if f.apply(&e) != &scale * q.expectation(&e) {
            return Err(Error::Witness("measure does not represent the functional".into()));
        }
    }
    Ok((q, scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::ratio;

    fn rv(s: &Arc<SampleSpace>, v: &[Rational]) -> RandomVariable {
        RandomVariable::new(s, v.to_vec()).unwrap()
    }

    #[test]
    fn separates_orthant_at_indicator() {
        let s = SampleSpace::uniform(2).unwrap();
        let cone = PolyhedralCone::new(&s, vec![], true).unwrap();
        let rep = separate_at(&cone, &RandomVariable::indicator(&s, 0)).unwrap().unwrap();
        assert_eq!(rep.functional.coefficients()[0], one());
        assert!(rep.functional.is_positive());
    }

    #[test]
    fn separates_half_plane() {
        let s = SampleSpace::uniform(2).unwrap();
        let g = rv(&s, &[int(1), int(-1)]);
        let cone = PolyhedralCone::new(&s, vec![g.clone()], true).unwrap();
        let target = rv(&s, &[int(1), int(1)]);
        let rep = separate_at(&cone, &target).unwrap().unwrap();
        assert_eq!(rep.functional.apply(&target), one());
        assert!(!rep.functional.apply(&g).is_positive());
        // the hand-computed separator is accepted too
        let hand = Functional::new(&s, vec![ratio(1, 3), ratio(2, 3)]).unwrap();
        assert_eq!(hand.apply(&g), ratio(-1, 3));
        assert!(hand.separates(&cone));
    }

    #[test]
    fn target_inside_cone() {
        let s = SampleSpace::uniform(2).unwrap();
        let cone = PolyhedralCone::new(&s, vec![RandomVariable::indicator(&s, 0)], true).unwrap();
        assert_eq!(separate_at(&cone, &RandomVariable::indicator(&s, 0)).unwrap(), None);
    }

    #[test]
    fn bad_targets_are_contract_violations() {
        let s = SampleSpace::uniform(2).unwrap();
        let cone = PolyhedralCone::new(&s, vec![], true).unwrap();
        assert!(separate_at(&cone, &RandomVariable::zero(&s)).is_err());
        assert!(separate_at(&cone, &rv(&s, &[int(1), int(-1)])).is_err());
        let bare = PolyhedralCone::new(&s, vec![], false).unwrap();
        assert!(strict_separator(&bare).is_err());
    }

    #[test]
    fn strict_separators() {
        let s = SampleSpace::uniform(3).unwrap();
        let orthant = PolyhedralCone::new(&s, vec![], true).unwrap();
        let StrictSeparation::Found(rep) = strict_separator(&orthant).unwrap() else {
            panic!()
        };
        assert!(rep.functional.is_strictly_positive());

        let s2 = SampleSpace::uniform(2).unwrap();
        let g = rv(&s2, &[int(1), int(-1)]);
        let half = PolyhedralCone::new(&s2, vec![g], true).unwrap();
        let StrictSeparation::Found(rep) = strict_separator(&half).unwrap() else {
            panic!()
        };
        let c = rep.functional.coefficients();
        assert!(c[0].is_positive() && c[0] <= c[1]);

        let inside = PolyhedralCone::new(&s2, vec![RandomVariable::indicator(&s2, 1)], true).unwrap();
        match strict_separator(&inside).unwrap() {
            StrictSeparation::Violated { outcome, direction } => {
                assert_eq!(outcome, 1);
                assert_eq!(direction, RandomVariable::indicator(&s2, 1));
            }
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn functional_measures() {
        let s = SampleSpace::uniform(2).unwrap();
        let (q, c) = functional_to_measure(&Functional::new(&s, vec![int(1), int(1)]).unwrap()).unwrap();
        assert_eq!(q.weights(), &[ratio(1, 2), ratio(1, 2)]);
        assert_eq!(c, int(2));
        let (q, c) = functional_to_measure(&Functional::new(&s, vec![int(1), int(2)]).unwrap()).unwrap();
        assert_eq!(q.weights(), &[ratio(1, 3), ratio(2, 3)]);
        assert_eq!(c, int(3));
        assert_eq!(q.density(), vec![ratio(2, 3), ratio(4, 3)]);
        assert!(functional_to_measure(&Functional::new(&s, vec![int(1), int(0)]).unwrap()).is_err());
    }
}
