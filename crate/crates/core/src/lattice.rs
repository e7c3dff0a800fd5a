//! Random variables on a finite sample space as a vector lattice.
//!
//! All outcomes carry strictly positive probability, so almost-sure order and
//! equality are componentwise and no quotient by null sets is needed.

use std::fmt;
use std::sync::Arc;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::num::{max_abs, one, sum, zero, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSpace {
    outcomes: Vec<String>,
    probabilities: Vec<Rational>,
}

impl SampleSpace {
    pub fn new(outcomes: Vec<String>, probabilities: Vec<Rational>) -> Result<Arc<Self>> {
        if outcomes.is_empty() {
            return Err(Error::InvalidSpace("no outcomes".into()));
        }
        if outcomes.len() != probabilities.len() {
            return Err(Error::InvalidSpace(format!(
                "{} outcomes but {} probabilities",
                outcomes.len(),
                probabilities.len()
            )));
        }
        for (i, id) in outcomes.iter().enumerate() {
            if outcomes[..i].contains(id) {
                return Err(Error::InvalidSpace(format!("duplicate outcome `{id}`")));
            }
        }
        if let Some((id, p)) = outcomes.iter().zip(&probabilities).find(|(_, p)| !p.is_positive()) {
            return Err(Error::InvalidSpace(format!(
                "outcome `{id}` has non-positive probability {p}"
            )));
        }
        let total = sum(&probabilities);
        if total != one() {
            return Err(Error::InvalidSpace(format!("probabilities sum to {total}")));
        }
        Ok(Arc::new(SampleSpace {
            outcomes,
            probabilities,
        }))
    }

    /// Uniform space with outcomes named `w0, w1, ...`.
    pub fn uniform(n: usize) -> Result<Arc<Self>> {
        let p = Rational::new(1.into(), (n.max(1) as i64).into());
        Self::new((0..n).map(|i| format!("w{i}")).collect(), vec![p; n])
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn probabilities(&self) -> &[Rational] {
        &self.probabilities
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.outcomes.iter().position(|o| o == id)
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct RandomVariable {
    space: Arc<SampleSpace>,
    values: Vec<Rational>,
}

impl fmt::Debug for RandomVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.values.iter().map(crate::num::format_rational))
            .finish()
    }
}

fn same_space(a: &Arc<SampleSpace>, b: &Arc<SampleSpace>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

impl RandomVariable {
    pub fn new(space: &Arc<SampleSpace>, values: Vec<Rational>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::Dimension(format!(
                "{} values for {} outcomes",
                values.len(),
                space.len()
            )));
        }
        Ok(RandomVariable {
            space: Arc::clone(space),
            values,
        })
    }

    pub fn zero(space: &Arc<SampleSpace>) -> Self {
        Self::constant(space, zero())
    }

    pub fn constant(space: &Arc<SampleSpace>, c: Rational) -> Self {
        RandomVariable {
            space: Arc::clone(space),
            values: vec![c; space.len()],
        }
    }

    /// The indicator `e_w` of a single outcome.
    pub fn indicator(space: &Arc<SampleSpace>, outcome: usize) -> Self {
        let mut values = vec![zero(); space.len()];
        values[outcome] = one();
        RandomVariable {
            space: Arc::clone(space),
            values,
        }
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Rational> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn check(&self, other: &Self) -> Result<()> {
        if same_space(&self.space, &other.space) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&Rational, &Rational) -> Rational) -> Result<Self> {
        self.check(other)?;
        Ok(RandomVariable {
            space: Arc::clone(&self.space),
            values: self.values.iter().zip(&other.values).map(|(a, b)| f(a, b)).collect(),
        })
    }

    fn map(&self, f: impl Fn(&Rational) -> Rational) -> Self {
        RandomVariable {
            space: Arc::clone(&self.space),
            values: self.values.iter().map(f).collect(),
        }
    }

    pub fn sup(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.max(b).clone())
    }

    pub fn inf(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.min(b).clone())
    }

    pub fn abs(&self) -> Self {
        self.map(|a| a.abs())
    }

    /// `x ∨ 0`
    pub fn pos_part(&self) -> Self {
        self.map(|a| if a.is_positive() { a.clone() } else { zero() })
    }

    /// `(-x) ∨ 0`
    pub fn neg_part(&self) -> Self {
        self.map(|a| if a.is_negative() { -a } else { zero() })
    }

    pub fn leq(&self, other: &Self) -> Result<bool> {
        self.check(other)?;
        Ok(self.values.iter().zip(&other.values).all(|(a, b)| a <= b))
    }

    pub fn is_nonneg(&self) -> bool {
        self.values.iter().all(|v| !v.is_negative())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Zero::is_zero)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, alpha: &Rational) -> Self {
        self.map(|a| a * alpha)
    }

    pub fn neg(&self) -> Self {
        self.map(|a| -a)
    }

    /// Expectation under the space's own probabilities.
    pub fn expectation(&self) -> Rational {
        crate::num::dot(&self.values, self.space.probabilities())
    }

    pub fn linf_norm(&self) -> Rational {
        max_abs(&self.values)
    }

    pub fn l2_norm_squared(&self) -> Rational {
        self.values.iter().fold(zero(), |acc, v| acc + v * v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, ratio};
    use proptest::prelude::*;

    fn space2() -> Arc<SampleSpace> {
        SampleSpace::uniform(2).unwrap()
    }

    fn rv(space: &Arc<SampleSpace>, v: &[Rational]) -> RandomVariable {
        RandomVariable::new(space, v.to_vec()).unwrap()
    }

    #[test]
    fn lattice_operations_componentwise() {
        let s = space2();
        let x = rv(&s, &[int(1), int(-2)]);
        let y = RandomVariable::zero(&s);
        assert_eq!(x.sup(&y).unwrap().values(), &[int(1), int(0)]);
        assert_eq!(x.inf(&y).unwrap().values(), &[int(0), int(-2)]);
        assert_eq!(x.abs().values(), &[int(1), int(2)]);
        assert_eq!(x.pos_part().values(), &[int(1), int(0)]);
        assert_eq!(x.neg_part().values(), &[int(0), int(2)]);
    }

    #[test]
    fn order_and_positivity() {
        let s = space2();
        assert!(rv(&s, &[int(0), int(0)]).leq(&rv(&s, &[int(1), int(0)])).unwrap());
        assert!(!rv(&s, &[int(1), int(0)]).leq(&rv(&s, &[int(0), int(1)])).unwrap());
        let z = rv(&s, &[int(0), int(0)]);
        assert!(z.is_nonneg() && z.is_zero());
        let a = rv(&s, &[ratio(1, 3), int(0)]);
        assert!(a.is_nonneg() && !a.is_zero());
        assert!(!rv(&s, &[int(1), ratio(-1, 7)]).is_nonneg());
    }

    #[test]
    fn mismatched_spaces_are_rejected() {
        let a = RandomVariable::zero(&space2());
        let b = RandomVariable::zero(&SampleSpace::uniform(3).unwrap());
        assert!(matches!(a.sup(&b), Err(Error::SpaceMismatch)));
        assert!(matches!(a.leq(&b), Err(Error::SpaceMismatch)));
    }

    #[test]
    fn invalid_spaces() {
        let ids = |n: usize| (0..n).map(|i| i.to_string()).collect::<Vec<_>>();
        assert!(SampleSpace::new(ids(2), vec![int(1), int(0)]).is_err());
        assert!(SampleSpace::new(ids(2), vec![ratio(1, 2), ratio(1, 3)]).is_err());
        assert!(SampleSpace::new(vec!["a".into(), "a".into()], vec![ratio(1, 2); 2]).is_err());
        assert!(SampleSpace::new(vec![], vec![]).is_err());
    }

    fn small() -> impl Strategy<Value = Rational> {
        (-20i64..=20, 1i64..=20).prop_map(|(n, d)| ratio(n, d))
    }

    fn triple() -> impl Strategy<Value = (Vec<Rational>, Vec<Rational>, Vec<Rational>)> {
        (1usize..6).prop_flat_map(|n| {
            (
                proptest::collection::vec(small(), n),
                proptest::collection::vec(small(), n),
                proptest::collection::vec(small(), n),
            )
        })
    }

    proptest! {
        #[test]
        fn lattice_identities((x, y, z) in triple(), alpha in (1i64..=20, 1i64..=20)) {
            let s = SampleSpace::uniform(x.len()).unwrap();
            let (x, y, z) = (rv(&s, &x), rv(&s, &y), rv(&s, &z));
            prop_assert_eq!(x.abs(), x.pos_part().add(&x.neg_part()).unwrap());
            prop_assert_eq!(x.clone(), x.pos_part().sub(&x.neg_part()).unwrap());
            prop_assert!(x.pos_part().inf(&x.neg_part()).unwrap().is_zero());
            prop_assert_eq!(
                x.sup(&y).unwrap().add(&x.inf(&y).unwrap()).unwrap(),
                x.add(&y).unwrap()
            );
            prop_assert!(x.leq(&x.sup(&y).unwrap()).unwrap());
            prop_assert!(x.leq(&x).unwrap());
            if x.leq(&y).unwrap() && y.leq(&x).unwrap() {
                prop_assert_eq!(&x, &y);
            }
            if x.leq(&y).unwrap() && y.leq(&z).unwrap() {
                prop_assert!(x.leq(&z).unwrap());
            }
            if x.leq(&y).unwrap() {
                let a = ratio(alpha.0, alpha.1);
                prop_assert!(x.add(&z).unwrap().leq(&y.add(&z).unwrap()).unwrap());
                prop_assert!(x.scale(&a).leq(&y.scale(&a)).unwrap());
            }
        }
    }
}
