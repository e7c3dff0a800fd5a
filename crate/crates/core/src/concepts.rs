//! The named no-arbitrage concepts, each decided by its own route, with the
//! finite-state collapse asserted on every call.

use serde::Serialize;

use crate::cone::Gauge;
use crate::error::{Error, Result};
use crate::lattice::RandomVariable;
use crate::market::{self, EmmSearch, MarketModel, Measure};
use crate::num::{int, one, zero};
use crate::separation::{self, StrictSeparation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConceptVerdicts {
    pub na: bool,
    pub na1: bool,
    pub nupbr: bool,
    /// No free lunch with vanishing risk; `𝒦₀ - V₊` is polyhedral, hence closed.
    pub nfl_equiv: bool,
    pub emm_exists: bool,
    pub separator_exists: bool,
}

impl ConceptVerdicts {
    pub fn all(&self) -> [(&'static str, bool); 6] {
        [
            ("na", self.na),
            ("na1", self.na1),
            ("nupbr", self.nupbr),
            ("nfl_equiv", self.nfl_equiv),
            ("emm_exists", self.emm_exists),
            ("separator_exists", self.separator_exists),
        ]
    }

    pub fn agree(&self) -> bool {
        let v = self.all();
        v.iter().all(|(_, b)| *b == v[0].1)
    }
}

/// Verdicts computed independently:
/// NA by the gain LP, NA₁ by indicator superreplication prices, NUPBR by the
/// boundedness LP, EMM by the max-min martingale LP, the separator by averaging
/// per-indicator separators of `𝒦₀ - V₊`, and NFL by checking that no outcome
/// indicator belongs to the closed cone `𝒦₀ - V₊`.
pub fn compute_verdicts(model: &MarketModel) -> Result<ConceptVerdicts> {
    let cone = market::payoff_cone(model, true);
    let mut nfl = true;
    for w in 0..model.space().len() {
        if cone.contains(&RandomVariable::indicator(model.space(), w))? {
            nfl = false;
            break;
        }
    }
    let separator_exists = match separation::strict_separator(&cone)? {
        StrictSeparation::Found(rep) => {
            let (q, _) = separation::functional_to_measure(&rep.functional)?;
            market::verify_emm(model, &q)?;
            true
        }
        StrictSeparation::Violated { .. } => false,
    };
    Ok(ConceptVerdicts {
        na: market::check_na(model)?.holds(),
        na1: market::check_na1(model)?,
        nupbr: market::check_nupbr(model)?,
        nfl_equiv: nfl,
        emm_exists: matches!(market::find_emm(model)?, EmmSearch::Found(_)),
        separator_exists,
    })
}

/// All six verdicts; disagreement is an error carrying the verdicts.
pub fn full_verdict(model: &MarketModel) -> Result<ConceptVerdicts> {
    let v = compute_verdicts(model)?;
    if !v.agree() {
        return Err(Error::Disagreement(Box::new(v)));
    }
    Ok(v)
}

/// `B` has finite expectation under `Q`.
pub fn emm_budget_check(model: &MarketModel, q: &Measure) -> Result<bool> {
    Ok(market::emm_budget(model, q)? != Gauge::Infinite)
}

/// `x ∈ ⋂_{α>0} B_α` decided two ways: the gauge is zero, and membership in
/// `B_α` down the grid `α = 2^-k` closed off by membership in `B₀`, which is the
/// exact limit because the graph `{(α, x) : x ∈ B_α}` is a closed polyhedron.
pub fn in_zero_set(model: &MarketModel, x: &RandomVariable) -> Result<(bool, bool)> {
    let by_gauge = market::market_gauge(model, x)? == Gauge::Finite(zero());
    let mut alpha = one();
    let mut by_grid = true;
    for _ in 0..16 {
        if !market::budget_member(model, x, &alpha)? {
            by_grid = false;
            break;
        }
        alpha /= int(2);
    }
    let by_grid = by_grid && market::budget_member(model, x, &zero())?;
    Ok((by_gauge, by_grid))
}
