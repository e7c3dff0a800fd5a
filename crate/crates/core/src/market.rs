//! Finite filtered markets in discrete time.
//!
//! A market is a finite sample space, a filtration given by successively finer
//! partitions, and nonnegative adapted price paths. Strategies are predictable:
//! the holding over period `t` is one number per cell of the partition at
//! `t - 1`. Every decider reduces to an LP over the coefficients of the
//! elementary strategies (one unit of one asset over one period on one cell).

use std::sync::Arc;

use num_traits::{Signed, Zero};

use crate::cone::{Gauge, PolyhedralCone};
use crate::error::{Error, Result};
use crate::lattice::{RandomVariable, SampleSpace};
use crate::lp::{self, LpOutcome, LpProblem, Relation, Sense};
use crate::num::{dot, one, sum, zero, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Filtration {
    space: Arc<SampleSpace>,
    partitions: Vec<Vec<Vec<usize>>>,
    cell_of: Vec<Vec<usize>>,
}

impl Filtration {
    /// `partitions[t]` lists the cells (outcome indices) of the partition at time `t`.
    pub fn new(space: &Arc<SampleSpace>, partitions: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        let n = space.len();
        let bad = |msg: String| Err(Error::InvalidFiltration(msg));
        if partitions.len() < 2 {
            return bad("need at least one trading period (two partitions)".into());
        }
        let mut cell_of = Vec::with_capacity(partitions.len());
        for (t, cells) in partitions.iter().enumerate() {
            let mut owner = vec![usize::MAX; n];
            for (c, cell) in cells.iter().enumerate() {
                if cell.is_empty() {
                    return bad(format!("empty cell {c} at time {t}"));
                }
                for &w in cell {
                    if w >= n {
                        return bad(format!("outcome index {w} out of range at time {t}"));
                    }
                    if owner[w] != usize::MAX {
                        return bad(format!("outcome `{}` appears twice at time {t}", space.outcomes()[w]));
                    }
                    owner[w] = c;
                }
            }
            if let Some(w) = owner.iter().position(|&c| c == usize::MAX) {
                return bad(format!(
                    "outcome `{}` missing from partition at time {t}",
                    space.outcomes()[w]
                ));
            }
            cell_of.push(owner);
        }
        if partitions[0].len() != 1 {
            return bad("partition at time 0 must be trivial".into());
        }
        if partitions.last().unwrap().len() != n {
            return bad("partition at the final time must separate all outcomes".into());
        }
        for t in 1..partitions.len() {
            for (c, cell) in partitions[t].iter().enumerate() {
                let parent = cell_of[t - 1][cell[0]];
                if cell.iter().any(|&w| cell_of[t - 1][w] != parent) {
                    return bad(format!("cell {c} at time {t} straddles cells of time {}", t - 1));
                }
            }
        }
        Ok(Filtration {
            space: Arc::clone(space),
            partitions,
            cell_of,
        })
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    /// Number of trading periods `T`.
    pub fn periods(&self) -> usize {
        self.partitions.len() - 1
    }

    pub fn partition(&self, t: usize) -> &[Vec<usize>] {
        &self.partitions[t]
    }

    pub fn partitions(&self) -> &[Vec<Vec<usize>>] {
        &self.partitions
    }

    pub fn cell_of(&self, t: usize, outcome: usize) -> usize {
        self.cell_of[t][outcome]
    }

    pub fn is_measurable(&self, t: usize, x: &RandomVariable) -> bool {
        self.partitions[t]
            .iter()
            .all(|cell| cell.iter().all(|&w| x.values()[w] == x.values()[cell[0]]))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Asset {
    pub name: String,
    /// Prices at `t = 0..=T`.
    pub path: Vec<RandomVariable>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarketModel {
    filtration: Filtration,
    assets: Vec<Asset>,
}

/// One unit of `asset` held over period `period` (1-based) on `cell` of the
/// partition at `period - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Elementary {
    pub period: usize,
    pub asset: usize,
    pub cell: usize,
}

impl MarketModel {
    pub fn new(filtration: Filtration, assets: Vec<Asset>) -> Result<Self> {
        let space = filtration.space();
        if assets.is_empty() {
            return Err(Error::InvalidModel("market has no assets".into()));
        }
        for asset in &assets {
            if asset.path.len() != filtration.periods() + 1 {
                return Err(Error::InvalidModel(format!(
                    "asset `{}` has {} prices, expected {}",
                    asset.name,
                    asset.path.len(),
                    filtration.periods() + 1
                )));
            }
            for (t, x) in asset.path.iter().enumerate() {
                if x.space() != space {
                    return Err(Error::SpaceMismatch);
                }
                if !x.is_nonneg() {
                    return Err(Error::InvalidModel(format!(
                        "asset `{}` has a negative price at time {t}",
                        asset.name
                    )));
                }
                if !filtration.is_measurable(t, x) {
                    return Err(Error::InvalidModel(format!(
                        "asset `{}` is not adapted at time {t}",
                        asset.name
                    )));
                }
            }
        }
        Ok(MarketModel { filtration, assets })
    }

    /// Single-period market with trivial then discrete information; each asset is
    /// `(name, initial price, terminal prices)`.
    pub fn one_period(space: &Arc<SampleSpace>, assets: Vec<(&str, Rational, Vec<Rational>)>) -> Result<Self> {
        let n = space.len();
        let filtration = Filtration::new(space, vec![vec![(0..n).collect()], (0..n).map(|w| vec![w]).collect()])?;
        let assets = assets
            .into_iter()
            .map(|(name, s0, st)| {
                Ok(Asset {
                    name: name.to_string(),
                    path: vec![RandomVariable::constant(space, s0), RandomVariable::new(space, st)?],
                })
            })
            .collect::<Result<Vec<_>>>()?;
        MarketModel::new(filtration, assets)
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        self.filtration.space()
    }

    pub fn filtration(&self) -> &Filtration {
        &self.filtration
    }

    pub fn assets(&self) -> &[Asset] {
        &self.assets
    }

    pub fn periods(&self) -> usize {
        self.filtration.periods()
    }

    pub fn elementary_strategies(&self) -> Vec<Elementary> {
        let mut out = Vec::new();
        for period in 1..=self.periods() {
            for asset in 0..self.assets.len() {
                for cell in 0..self.filtration.partition(period - 1).len() {
                    out.push(Elementary { period, asset, cell });
                }
            }
        }
        out
    }

    /// Terminal gain of an elementary strategy: `1_cell · (X_t - X_{t-1})`.
    pub fn elementary_gain(&self, e: Elementary) -> RandomVariable {
        let path = &self.assets[e.asset].path;
        let (now, before) = (path[e.period].values(), path[e.period - 1].values());
        let values = (0..self.space().len())
            .map(|w| {
                if self.filtration.cell_of(e.period - 1, w) == e.cell {
                    &now[w] - &before[w]
                } else {
                    zero()
                }
            })
            .collect();
        RandomVariable::new(self.space(), values).expect("gain has one value per outcome")
    }

    /// Elementary strategies with a nonzero gain, paired with that gain.
    fn active_gains(&self) -> Vec<(Elementary, RandomVariable)> {
        self.elementary_strategies()
            .into_iter()
            .map(|e| (e, self.elementary_gain(e)))
            .filter(|(_, g)| !g.is_zero())
            .collect()
    }
}

/// Predictable holdings: `holdings[t - 1][asset][cell]` for `t = 1..=T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Strategy {
    holdings: Vec<Vec<Vec<Rational>>>,
}

impl Strategy {
    pub fn zero(model: &MarketModel) -> Self {
        let holdings = (1..=model.periods())
            .map(|t| {
                let cells = model.filtration().partition(t - 1).len();
                vec![vec![zero(); cells]; model.assets().len()]
            })
            .collect();
        Strategy { holdings }
    }

    pub fn from_holdings(holdings: Vec<Vec<Vec<Rational>>>) -> Self {
        Strategy { holdings }
    }

    pub fn holdings(&self) -> &[Vec<Vec<Rational>>] {
        &self.holdings
    }

    pub fn get(&self, e: Elementary) -> &Rational {
        &self.holdings[e.period - 1][e.asset][e.cell]
    }

    pub fn set(&mut self, e: Elementary, v: Rational) {
        self.holdings[e.period - 1][e.asset][e.cell] = v;
    }

    fn check_shape(&self, model: &MarketModel) -> Result<()> {
        let ok = self.holdings.len() == model.periods()
            && self.holdings.iter().enumerate().all(|(t, per_asset)| {
                per_asset.len() == model.assets().len()
                    && per_asset
                        .iter()
                        .all(|cells| cells.len() == model.filtration().partition(t).len())
            });
        if ok {
            Ok(())
        } else {
            Err(Error::Dimension("strategy shape does not match the market".into()))
        }
    }

    pub fn combine(&self, a: &Rational, other: &Strategy, b: &Rational) -> Strategy {
        let holdings = self
            .holdings
            .iter()
            .zip(&other.holdings)
            .map(|(x, y)| {
                x.iter()
                    .zip(y)
                    .map(|(u, v)| u.iter().zip(v).map(|(p, q)| a * p + b * q).collect())
                    .collect()
            })
            .collect();
        Strategy { holdings }
    }
}

/// `Σ_t ξ_t · (X_t - X_{t-1})`, pathwise.
pub fn terminal_gain(model: &MarketModel, strategy: &Strategy) -> Result<RandomVariable> {
    strategy.check_shape(model)?;
    let space = model.space();
    let mut values = vec![zero(); space.len()];
    for period in 1..=model.periods() {
        for (i, asset) in model.assets().iter().enumerate() {
            let (now, before) = (asset.path[period].values(), asset.path[period - 1].values());
            for (w, v) in values.iter_mut().enumerate() {
                let h = &strategy.holdings[period - 1][i][model.filtration().cell_of(period - 1, w)];
                if !h.is_zero() {
                    *v += h * (&now[w] - &before[w]);
                }
            }
        }
    }
    RandomVariable::new(space, values)
}

/// `±` the elementary gains. With `minus_orthant` the cone is `𝒦₀ - V₊`.
pub fn payoff_cone(model: &MarketModel, minus_orthant: bool) -> PolyhedralCone {
    let mut gens = Vec::new();
    for e in model.elementary_strategies() {
        let g = model.elementary_gain(e);
        gens.push(g.neg());
        gens.push(g);
    }
    PolyhedralCone::new(model.space(), gens, minus_orthant).expect("gains share the model space")
}

/// Free strategy variables over the active elementary strategies, placed at
/// `offset..offset + k` of an LP row.
struct GainSystem {
    active: Vec<(Elementary, RandomVariable)>,
}

impl GainSystem {
    fn new(model: &MarketModel) -> Self {
        GainSystem {
            active: model.active_gains(),
        }
    }

    fn len(&self) -> usize {
        self.active.len()
    }

    /// Coefficients of `gain_w(ξ)` in the strategy variables.
    fn row(&self, w: usize) -> impl Iterator<Item = Rational> + '_ {
        self.active.iter().map(move |(_, g)| g.values()[w].clone())
    }

    fn free(&self, p: &mut LpProblem, offset: usize) {
        for k in 0..self.len() {
            p.set_free(offset + k);
        }
    }

    fn strategy(&self, model: &MarketModel, coeffs: &[Rational]) -> Strategy {
        let mut s = Strategy::zero(model);
        for ((e, _), c) in self.active.iter().zip(coeffs) {
            s.set(*e, c.clone());
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arbitrage {
    pub strategy: Strategy,
    pub payoff: RandomVariable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NaCheck {
    Holds,
    Fails(Arbitrage),
}

impl NaCheck {
    pub fn holds(&self) -> bool {
        matches!(self, NaCheck::Holds)
    }
}

pub fn verify_arbitrage(model: &MarketModel, arb: &Arbitrage) -> Result<()> {
    let payoff = terminal_gain(model, &arb.strategy)?;
    if payoff != arb.payoff {
        return Err(Error::Witness("arbitrage payoff does not match its strategy".into()));
    }
    if !payoff.is_nonneg() || payoff.is_zero() {
        return Err(Error::Witness(format!(
            "arbitrage payoff {payoff:?} is not in V₊ \\ {{0}}"
        )));
    }
    Ok(())
}

/// NA holds iff `max Σ_w gain_w(ξ)` over `0 <= gain(ξ) <= 1` is zero.
pub fn check_na(model: &MarketModel) -> Result<NaCheck> {
    let sys = GainSystem::new(model);
    let n = model.space().len();
    let objective = (0..sys.len()).map(|k| sum(sys.active[k].1.values())).collect();
    let mut p = LpProblem::new(Sense::Maximize, objective);
    sys.free(&mut p, 0);
    for w in 0..n {
        let row: Vec<Rational> = sys.row(w).collect();
        p.add_row(row.clone(), Relation::Ge, zero());
        p.add_row(row, Relation::Le, one());
    }
    let opt = match lp::solve(&p)? {
        LpOutcome::Optimal(opt) => opt,
        other => {
            return Err(Error::Inconsistent(format!(
                "NA program is feasible and bounded, solver said {:?}",
                other.status()
            )))
        }
    };
    if opt.value.is_zero() {
        return Ok(NaCheck::Holds);
    }
    let strategy = sys.strategy(model, &opt.primal);
    let payoff = terminal_gain(model, &strategy)?;
    let arb = Arbitrage { strategy, payoff };
    verify_arbitrage(model, &arb)?;
    Ok(NaCheck::Fails(arb))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Measure {
    space: Arc<SampleSpace>,
    weights: Vec<Rational>,
}

impl Measure {
    pub fn new(space: &Arc<SampleSpace>, weights: Vec<Rational>) -> Result<Self> {
        if weights.len() != space.len() {
            return Err(Error::Dimension(format!(
                "{} weights for {} outcomes",
                weights.len(),
                space.len()
            )));
        }
        if weights.iter().any(Signed::is_negative) {
            return Err(Error::Contract("measure weights must be nonnegative".into()));
        }
        if sum(&weights) != one() {
            return Err(Error::Contract("measure weights must sum to 1".into()));
        }
        Ok(Measure {
            space: Arc::clone(space),
            weights,
        })
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    /// Equivalent to the reference probability iff every weight is positive.
    pub fn is_equivalent(&self) -> bool {
        self.weights.iter().all(Signed::is_positive)
    }

    pub fn expectation(&self, x: &RandomVariable) -> Rational {
        dot(&self.weights, x.values())
    }

    /// `dQ/dP` per outcome.
    pub fn density(&self) -> Vec<Rational> {
        self.weights
            .iter()
            .zip(self.space.probabilities())
            .map(|(q, p)| q / p)
            .collect()
    }
}

/// One martingale equation `E_Q[1_cell (X_t - X_{t-1})] = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MartingaleResidual {
    pub strategy: Elementary,
    pub residual: Rational,
}

pub fn martingale_residuals(model: &MarketModel, q: &Measure) -> Vec<MartingaleResidual> {
    model
        .elementary_strategies()
        .into_iter()
        .map(|e| MartingaleResidual {
            strategy: e,
            residual: q.expectation(&model.elementary_gain(e)),
        })
        .collect()
}

pub fn verify_emm(model: &MarketModel, q: &Measure) -> Result<()> {
    if q.space() != model.space() {
        return Err(Error::SpaceMismatch);
    }
    if !q.is_equivalent() {
        return Err(Error::Witness("measure is not equivalent".into()));
    }
    if let Some(r) = martingale_residuals(model, q).iter().find(|r| !r.residual.is_zero()) {
        return Err(Error::Witness(format!(
            "martingale equation fails for {:?}: residual {}",
            r.strategy, r.residual
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EmmSearch {
    Found(Measure),
    None(Arbitrage),
}

/// EMM with the largest possible minimum weight, or the arbitrage that rules one out.
pub fn find_emm(model: &MarketModel) -> Result<EmmSearch> {
    let sys = GainSystem::new(model);
    let n = model.space().len();
    // variables: q_0..q_{n-1}, m
    let mut objective = vec![zero(); n + 1];
    objective[n] = one();
    let mut p = LpProblem::new(Sense::Maximize, objective);
    for w in 0..n {
        let mut row = vec![zero(); n + 1];
        row[w] = one();
        row[n] = -one();
        p.add_row(row, Relation::Ge, zero());
    }
    let mut total = vec![one(); n + 1];
    total[n] = zero();
    p.add_row(total, Relation::Eq, one());
    for (_, g) in &sys.active {
        let mut row = g.values().to_vec();
        row.push(zero());
        p.add_row(row, Relation::Eq, zero());
    }
    if let LpOutcome::Optimal(opt) = lp::solve(&p)? {
        if opt.value.is_positive() {
            let q = Measure::new(model.space(), opt.primal[..n].to_vec())?;
            verify_emm(model, &q)?;
            return Ok(EmmSearch::Found(q));
        }
    }
    match check_na(model)? {
        NaCheck::Fails(arb) => Ok(EmmSearch::None(arb)),
        NaCheck::Holds => Err(Error::Inconsistent(
            "no equivalent martingale measure although NA holds".into(),
        )),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Superreplication {
    pub price: Rational,
    pub strategy: Strategy,
}

/// `min {α >= 0 : α + gain(ξ) >= payoff}`. Under NA this equals
/// `max_Q E_Q[payoff]` over martingale measures.
pub fn superreplication_price(model: &MarketModel, payoff: &RandomVariable) -> Result<Superreplication> {
    if payoff.space() != model.space() {
        return Err(Error::SpaceMismatch);
    }
    if !payoff.is_nonneg() {
        return Err(Error::Contract("payoff must be nonnegative".into()));
    }
    let sys = GainSystem::new(model);
    // variables: α, ξ
    let mut objective = vec![zero(); sys.len() + 1];
    objective[0] = one();
    let mut p = LpProblem::new(Sense::Minimize, objective);
    sys.free(&mut p, 1);
    for (w, x) in payoff.values().iter().enumerate() {
        let row = std::iter::once(one()).chain(sys.row(w)).collect();
        p.add_row(row, Relation::Ge, x.clone());
    }
    let opt = match lp::solve(&p)? {
        LpOutcome::Optimal(opt) => opt,
        other => {
            return Err(Error::Inconsistent(format!(
                "superreplication program is feasible and bounded, solver said {:?}",
                other.status()
            )))
        }
    };
    let strategy = sys.strategy(model, &opt.primal[1..]);
    let wealth = terminal_gain(model, &strategy)?.add(&RandomVariable::constant(model.space(), opt.value.clone()))?;
    if !payoff.leq(&wealth)? {
        return Err(Error::Witness(
            "superreplicating strategy does not dominate the payoff".into(),
        ));
    }
    Ok(Superreplication {
        price: opt.value,
        strategy,
    })
}

/// The market's gauge `p_B` on all of `V`: the superreplication price on `V₊`, `+∞` elsewhere.
pub fn market_gauge(model: &MarketModel, x: &RandomVariable) -> Result<Gauge> {
    if !x.is_nonneg() {
        return Ok(Gauge::Infinite);
    }
    Ok(Gauge::Finite(superreplication_price(model, x)?.price))
}

/// `x ∈ B_α = (𝒦_α - V₊) ∩ V₊` with `𝒦_α = α + 𝒦₀`; `α = 0` gives `B₀`.
pub fn budget_member(model: &MarketModel, x: &RandomVariable, alpha: &Rational) -> Result<bool> {
    if x.space() != model.space() {
        return Err(Error::SpaceMismatch);
    }
    if alpha.is_negative() {
        return Err(Error::Contract("initial wealth must be nonnegative".into()));
    }
    if !x.is_nonneg() {
        return Ok(false);
    }
    let sys = GainSystem::new(model);
    let mut p = LpProblem::feasibility(sys.len());
    sys.free(&mut p, 0);
    for (w, xw) in x.values().iter().enumerate() {
        p.add_row(sys.row(w).collect(), Relation::Ge, xw - alpha);
    }
    Ok(matches!(lp::feasible(&p)?, lp::Feasibility::Feasible(_)))
}

/// NA₁: every outcome indicator has a strictly positive superreplication price.
pub fn check_na1(model: &MarketModel) -> Result<bool> {
    for w in 0..model.space().len() {
        let e = RandomVariable::indicator(model.space(), w);
        if !superreplication_price(model, &e)?.price.is_positive() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `max Σ_w c_w x_w` over `B = {0 <= x <= 1 + gain(ξ)}` in variables `(x, ξ)`.
fn budget_program(model: &MarketModel, weights: &[Rational]) -> Result<(LpOutcome, GainSystem)> {
    let sys = GainSystem::new(model);
    let n = model.space().len();
    let mut objective = weights.to_vec();
    objective.resize(n + sys.len(), zero());
    let mut p = LpProblem::new(Sense::Maximize, objective);
    sys.free(&mut p, n);
    for w in 0..n {
        let mut row = vec![zero(); n];
        row[w] = one();
        row.extend(sys.row(w).map(|g| -g));
        p.add_row(row, Relation::Le, one());
    }
    let out = lp::solve(&p)?;
    if let LpOutcome::Infeasible(_) = out {
        return Err(Error::Inconsistent("x = 0, ξ = 0 is always in B".into()));
    }
    Ok((out, sys))
}

fn sup_over_budget(model: &MarketModel, weights: &[Rational]) -> Result<Gauge> {
    Ok(match budget_program(model, weights)?.0 {
        LpOutcome::Optimal(opt) => Gauge::Finite(opt.value),
        _ => Gauge::Infinite,
    })
}

/// `sup_{x in B} Σ_w x_w`.
pub fn budget_bound(model: &MarketModel) -> Result<Gauge> {
    sup_over_budget(model, &vec![one(); model.space().len()])
}

/// NUPBR: `B` is bounded.
pub fn check_nupbr(model: &MarketModel) -> Result<bool> {
    Ok(budget_bound(model)? != Gauge::Infinite)
}

/// When `B` is unbounded, the strategy part of the recession ray. Its gain
/// dominates the ray's nonzero payoff part, so it is an arbitrage.
pub fn unbounded_budget_direction(model: &MarketModel) -> Result<Option<Arbitrage>> {
    let n = model.space().len();
    let (out, sys) = budget_program(model, &vec![one(); n])?;
    let LpOutcome::Unbounded(u) = out else {
        return Ok(None);
    };
    let strategy = sys.strategy(model, &u.ray[n..]);
    let payoff = terminal_gain(model, &strategy)?;
    let arb = Arbitrage { strategy, payoff };
    verify_arbitrage(model, &arb)?;
    Ok(Some(arb))
}

/// `sup_{x in B} E_Q[x]`; exactly 1 when `Q` is an EMM.
pub fn emm_budget(model: &MarketModel, q: &Measure) -> Result<Gauge> {
    if q.space() != model.space() {
        return Err(Error::SpaceMismatch);
    }
    if !q.is_equivalent() {
        return Err(Error::Contract("emm_budget needs an equivalent measure".into()));
    }
    sup_over_budget(model, q.weights())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, ratio};

    fn binomial(up: Rational, down: Rational) -> MarketModel {
        let s = SampleSpace::uniform(2).unwrap();
        MarketModel::one_period(&s, vec![("S", int(1), vec![up, down])]).unwrap()
    }

    fn trinomial() -> MarketModel {
        let s = SampleSpace::uniform(3).unwrap();
        MarketModel::one_period(&s, vec![("S", int(1), vec![int(2), int(1), ratio(1, 2)])]).unwrap()
    }

    fn constant() -> MarketModel {
        let s = SampleSpace::uniform(2).unwrap();
        MarketModel::one_period(&s, vec![("C", int(1), vec![int(1), int(1)])]).unwrap()
    }

    fn two_period() -> MarketModel {
        let s = SampleSpace::uniform(4).unwrap();
        let f = Filtration::new(
            &s,
            vec![
                vec![vec![0, 1, 2, 3]],
                vec![vec![0, 1], vec![2, 3]],
                (0..4).map(|w| vec![w]).collect(),
            ],
        )
        .unwrap();
        let rv = |v: Vec<Rational>| RandomVariable::new(&s, v).unwrap();
        let path = vec![
            RandomVariable::constant(&s, int(4)),
            rv(vec![int(8), int(8), int(2), int(2)]),
            rv(vec![int(16), int(4), int(4), int(1)]),
        ];
        MarketModel::new(f, vec![Asset { name: "S".into(), path }]).unwrap()
    }

    #[test]
    fn binomial_gain() {
        let m = binomial(int(2), ratio(1, 2));
        assert!(terminal_gain(&m, &Strategy::zero(&m)).unwrap().is_zero());
        let mut s = Strategy::zero(&m);
        s.set(
            Elementary {
                period: 1,
                asset: 0,
                cell: 0,
            },
            one(),
        );
        assert_eq!(terminal_gain(&m, &s).unwrap().values(), &[int(1), ratio(-1, 2)]);
    }

    #[test]
    fn cone_generators() {
        let m = binomial(int(2), ratio(1, 2));
        let cone = payoff_cone(&m, false);
        let gens: Vec<_> = cone.generators().iter().map(|g| g.values().to_vec()).collect();
        assert_eq!(gens, vec![vec![int(-1), ratio(1, 2)], vec![int(1), ratio(-1, 2)]]);
        assert_eq!(payoff_cone(&two_period(), true).generators().len(), 6);
        assert!(payoff_cone(&constant(), false).generators().iter().all(|g| g.is_zero()));
    }

    #[test]
    fn no_arbitrage_decisions() {
        assert!(check_na(&binomial(int(2), ratio(1, 2))).unwrap().holds());
        assert!(check_na(&constant()).unwrap().holds());
        let dom = binomial(int(2), ratio(3, 2));
        let NaCheck::Fails(arb) = check_na(&dom).unwrap() else {
            panic!("dominance model is arbitrage-free?")
        };
        // the only arbitrages are long positions in the asset
        assert!(arb
            .strategy
            .get(Elementary {
                period: 1,
                asset: 0,
                cell: 0
            })
            .is_positive());
        verify_arbitrage(&dom, &arb).unwrap();
    }

    #[test]
    fn binomial_emm() {
        let m = binomial(int(2), ratio(1, 2));
        let EmmSearch::Found(q) = find_emm(&m).unwrap() else {
            panic!()
        };
        assert_eq!(q.weights(), &[ratio(1, 3), ratio(2, 3)]);
        assert_eq!(q.density(), vec![ratio(2, 3), ratio(4, 3)]);
    }

    #[test]
    fn trinomial_emm_resubstitutes() {
        let m = trinomial();
        let EmmSearch::Found(q) = find_emm(&m).unwrap() else {
            panic!()
        };
        let w = q.weights();
        assert_eq!(&w[0] * int(2) + &w[1] + &w[2] * ratio(1, 2), one());
        assert!(q.is_equivalent());
    }

    #[test]
    fn dominance_has_no_emm() {
        let m = binomial(int(2), ratio(3, 2));
        assert!(matches!(find_emm(&m).unwrap(), EmmSearch::None(_)));
    }

    #[test]
    fn two_period_emm_is_conditional_martingale() {
        let m = two_period();
        let EmmSearch::Found(q) = find_emm(&m).unwrap() else {
            panic!()
        };
        verify_emm(&m, &q).unwrap();
        // up-factor 2, down-factor 1/2 everywhere: q_up = 1/3 on every node
        assert_eq!(q.weights(), &[ratio(1, 9), ratio(2, 9), ratio(2, 9), ratio(4, 9)]);
    }

    #[test]
    fn superreplication_examples() {
        let m = binomial(int(2), ratio(1, 2));
        let s = m.space().clone();
        let call = RandomVariable::new(&s, vec![int(1), int(0)]).unwrap();
        let sr = superreplication_price(&m, &call).unwrap();
        assert_eq!(sr.price, ratio(1, 3));
        assert_eq!(
            sr.strategy.get(Elementary {
                period: 1,
                asset: 0,
                cell: 0
            }),
            &ratio(2, 3)
        );
        assert_eq!(
            superreplication_price(&m, &RandomVariable::zero(&s)).unwrap().price,
            zero()
        );
        let st = m.assets()[0].path[1].clone();
        assert_eq!(superreplication_price(&m, &st).unwrap().price, one());
        let neg = RandomVariable::new(&s, vec![int(-1), int(0)]).unwrap();
        assert!(matches!(superreplication_price(&m, &neg), Err(Error::Contract(_))));
    }

    #[test]
    fn first_kind_concepts() {
        let good = binomial(int(2), ratio(1, 2));
        assert!(check_na1(&good).unwrap() && check_nupbr(&good).unwrap());
        let dom = binomial(int(2), ratio(3, 2));
        assert!(!check_na1(&dom).unwrap());
        assert!(!check_nupbr(&dom).unwrap());
        let arb = unbounded_budget_direction(&dom).unwrap().unwrap();
        verify_arbitrage(&dom, &arb).unwrap();
        assert_eq!(unbounded_budget_direction(&good).unwrap(), None);
        let c = constant();
        assert!(check_na1(&c).unwrap() && check_nupbr(&c).unwrap());
    }

    #[test]
    fn budget_under_measures() {
        let m = binomial(int(2), ratio(1, 2));
        let s = m.space().clone();
        let emm = Measure::new(&s, vec![ratio(1, 3), ratio(2, 3)]).unwrap();
        assert_eq!(emm_budget(&m, &emm).unwrap(), Gauge::Finite(one()));
        let half = Measure::new(&s, vec![ratio(1, 2), ratio(1, 2)]).unwrap();
        // ξ ranges over [-1, 2]; E_Q[1 + ξ ΔS] = 1 + ξ/4 peaks at ξ = 2
        assert_eq!(emm_budget(&m, &half).unwrap(), Gauge::Finite(ratio(3, 2)));
        let c = constant();
        let any = Measure::new(c.space(), vec![ratio(1, 5), ratio(4, 5)]).unwrap();
        assert_eq!(emm_budget(&c, &any).unwrap(), Gauge::Finite(one()));
    }

    #[test]
    fn budget_sets_scale() {
        let m = binomial(int(2), ratio(1, 2));
        let s = m.space().clone();
        let x = RandomVariable::new(&s, vec![int(3), int(0)]).unwrap();
        // price of (3, 0) is 1
        assert!(budget_member(&m, &x, &one()).unwrap());
        assert!(!budget_member(&m, &x, &ratio(99, 100)).unwrap());
        assert!(budget_member(&m, &x.scale(&ratio(1, 2)), &ratio(1, 2)).unwrap());
        assert!(!budget_member(&m, &x, &zero()).unwrap());
    }

    #[test]
    fn invalid_models_are_rejected() {
        let s = SampleSpace::uniform(2).unwrap();
        assert!(Filtration::new(&s, vec![vec![vec![0, 1]]]).is_err());
        assert!(Filtration::new(&s, vec![vec![vec![0], vec![1]], vec![vec![0], vec![1]]]).is_err());
        assert!(Filtration::new(&s, vec![vec![vec![0, 1]], vec![vec![0, 1]]]).is_err());
        assert!(Filtration::new(&s, vec![vec![vec![0, 1]], vec![vec![0]]]).is_err());
        let s4 = SampleSpace::uniform(4).unwrap();
        let bad = Filtration::new(
            &s4,
            vec![
                vec![vec![0, 1, 2, 3]],
                vec![vec![0, 1], vec![2, 3]],
                vec![vec![0, 2], vec![1], vec![3]],
            ],
        );
        assert!(bad.is_err());
        assert!(MarketModel::one_period(&s, vec![("S", int(1), vec![int(-1), int(2)])]).is_err());
        let f = Filtration::new(&s, vec![vec![vec![0, 1]], vec![vec![0], vec![1]]]).unwrap();
        let unadapted = Asset {
            name: "S".into(),
            path: vec![
                RandomVariable::new(&s, vec![int(1), int(2)]).unwrap(),
                RandomVariable::new(&s, vec![int(1), int(2)]).unwrap(),
            ],
        };
        assert!(MarketModel::new(f, vec![unadapted]).is_err());
    }
}
