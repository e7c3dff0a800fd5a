//! Randomized verification of the structural properties of semi-solid sets and
//! their gauges, and the truncated sequence-space example in which the zero set
//! stays trivial while the norm of the set grows without bound.
//!
//! Random instances use small rationals: numerators in `0..=20` (or `-20..=20`
//! where signs are allowed) and denominators in `1..=20`, drawn from a
//! `ChaCha8` stream seeded by the caller.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cone::{Gauge, SemiSolidSet};
use crate::error::{Error, Result};
use crate::lattice::{RandomVariable, SampleSpace};
use crate::market::{self, Asset, Filtration, MarketModel, Strategy};
use crate::num::{format_rational, int, one, ratio, zero, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterexampleConfig {
    pub truncation: usize,
}

/// `B = co({0} ∪ {f_k})` with `f_k = k e_k` on `N` outcomes.
pub fn build_counterexample(cfg: CounterexampleConfig) -> Result<SemiSolidSet> {
    let n = cfg.truncation;
    if n == 0 {
        return Err(Error::Contract("truncation must be at least 1".into()));
    }
    let space = SampleSpace::uniform(n)?;
    let gens = (0..n)
        .map(|k| RandomVariable::indicator(&space, k).scale(&int(k as i64 + 1)))
        .collect();
    SemiSolidSet::new(&space, gens)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CounterexampleReport {
    pub truncation: usize,
    #[serde(serialize_with = "ser_rational")]
    pub sup_l2_norm_squared: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub linf_bound: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub min_indicator_minkowski: Rational,
    pub zero_set_trivial: bool,
}

fn ser_rational<S: serde::Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(q))
}

pub fn counterexample_report(cfg: CounterexampleConfig) -> Result<CounterexampleReport> {
    let b = build_counterexample(cfg)?;
    let bounds = b.is_bounded();
    let mut min_gauge = Gauge::Infinite;
    for k in 0..cfg.truncation {
        let g = b.minkowski(&RandomVariable::indicator(b.space(), k))?;
        if g < min_gauge {
            min_gauge = g;
        }
    }
    let Gauge::Finite(min_indicator_minkowski) = min_gauge else {
        return Err(Error::Inconsistent(
            "every indicator is dominated by a generator".into(),
        ));
    };
    Ok(CounterexampleReport {
        truncation: cfg.truncation,
        sup_l2_norm_squared: b.sup_l2_squared().expect("no rays"),
        linf_bound: bounds.linf_bound.expect("no rays"),
        min_indicator_minkowski,
        zero_set_trivial: b.zero_set_trivial()?,
    })
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Rational with numerator in `lo..=hi` and denominator in `1..=20`.
pub fn random_rational<R: Rng>(rng: &mut R, lo: i64, hi: i64) -> Rational {
    ratio(rng.gen_range(lo..=hi), rng.gen_range(1..=20))
}

pub fn random_nonneg<R: Rng>(rng: &mut R, space: &Arc<SampleSpace>) -> RandomVariable {
    let values = (0..space.len())
        .map(|_| {
            if rng.gen_bool(0.25) {
                zero()
            } else {
                random_rational(rng, 0, 20)
            }
        })
        .collect();
    RandomVariable::new(space, values).expect("sized to the space")
}

pub fn random_space<R: Rng>(rng: &mut R, n: usize) -> Arc<SampleSpace> {
    let weights: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=20)).collect();
    let total: i64 = weights.iter().sum();
    SampleSpace::new(
        (0..n).map(|i| format!("w{i}")).collect(),
        weights.iter().map(|&w| ratio(w, total)).collect(),
    )
    .expect("positive weights summing to one")
}

/// Random semi-solid set on `1..=5` outcomes with up to four generators and,
/// one time in four, a recession ray.
pub fn random_semisolid<R: Rng>(rng: &mut R) -> SemiSolidSet {
    let n = rng.gen_range(1..=5);
    let space = random_space(rng, n);
    let gens = (0..rng.gen_range(0..=4)).map(|_| random_nonneg(rng, &space)).collect();
    let rays = if rng.gen_bool(0.25) {
        vec![random_nonneg(rng, &space)]
    } else {
        Vec::new()
    };
    SemiSolidSet::with_rays(&space, gens, rays).expect("nonnegative generators")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MarketShape {
    pub max_periods: usize,
    pub max_outcomes: usize,
    pub max_assets: usize,
}

impl Default for MarketShape {
    fn default() -> Self {
        MarketShape {
            max_periods: 3,
            max_outcomes: 8,
            max_assets: 2,
        }
    }
}

/// Random tree market. Each node branches into one to three children within
/// the outcome budget. Seven nodes in ten are calm (see below); elsewhere a
/// child price repeats its parent's with probability 1/4 and is otherwise a
/// fresh rational in `(0, 20]`.
pub fn random_market<R: Rng>(rng: &mut R, shape: MarketShape) -> MarketModel {
    let periods = rng.gen_range(1..=shape.max_periods);
    // levels[t] = for each node at time t, its parent index at t-1
    let mut parents: Vec<Vec<usize>> = vec![vec![usize::MAX]];
    for t in 1..=periods {
        let prev = parents[t - 1].len();
        let mut level = Vec::new();
        for node in 0..prev {
            let remaining_nodes = prev - node - 1;
            let budget = shape.max_outcomes - level.len() - remaining_nodes;
            let children = rng.gen_range(1..=3.min(budget).max(1));
            level.extend(std::iter::repeat_n(node, children));
        }
        parents.push(level);
    }
    let n = parents[periods].len();
    let space = random_space(rng, n);

    // ancestor of each leaf at each time
    let mut ancestor = vec![vec![0usize; n]; periods + 1];
    for w in 0..n {
        let mut node = w;
        for t in (0..=periods).rev() {
            ancestor[t][w] = node;
            if t > 0 {
                node = parents[t][node];
            }
        }
    }
    let partitions = (0..=periods)
        .map(|t| {
            (0..parents[t].len())
                .map(|node| (0..n).filter(|&w| ancestor[t][w] == node).collect())
                .collect()
        })
        .collect();
    let filtration = Filtration::new(&space, partitions).expect("tree partitions are nested");

    // A calm node is arbitrage-free on its own: the first asset's first two
    // children straddle the parent and every other price repeats it.
    let calm: Vec<Vec<bool>> = parents[..periods]
        .iter()
        .map(|level| level.iter().map(|_| rng.gen_bool(0.7)).collect())
        .collect();
    let assets = (0..rng.gen_range(1..=shape.max_assets))
        .map(|i| {
            let mut node_prices: Vec<Vec<Rational>> = vec![vec![random_rational(rng, 1, 20)]];
            for t in 1..=periods {
                let prev = &node_prices[t - 1];
                let mut level: Vec<Rational> = parents[t]
                    .iter()
                    .map(|&p| {
                        if calm[t - 1][p] || rng.gen_bool(0.25) {
                            prev[p].clone()
                        } else {
                            random_rational(rng, 1, 20)
                        }
                    })
                    .collect();
                if i == 0 {
                    for (p, parent) in prev.iter().enumerate() {
                        let kids: Vec<usize> = (0..level.len()).filter(|&c| parents[t][c] == p).collect();
                        if !calm[t - 1][p] || kids.len() < 2 {
                            continue;
                        }
                        let up = sample_where(rng, |x| x > parent);
                        let down = sample_where(rng, |x| x < parent);
                        if let (Some(up), Some(down)) = (up, down) {
                            level[kids[0]] = up;
                            level[kids[1]] = down;
                            for &c in &kids[2..] {
                                level[c] = random_rational(rng, 1, 20);
                            }
                        }
                    }
                }
                node_prices.push(level);
            }
            let path = (0..=periods)
                .map(|t| {
                    let values = (0..n).map(|w| node_prices[t][ancestor[t][w]].clone()).collect();
                    RandomVariable::new(&space, values).expect("sized to the space")
                })
                .collect();
            Asset {
                name: format!("X{}", i + 1),
                path,
            }
        })
        .collect();
    MarketModel::new(filtration, assets).expect("generated market is valid")
}

fn sample_where<R: Rng>(rng: &mut R, accept: impl Fn(&Rational) -> bool) -> Option<Rational> {
    (0..64).map(|_| random_rational(rng, 1, 20)).find(|x| accept(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LemmaSuiteConfig {
    pub seed: u64,
    pub instances: usize,
    /// Replace the scaled-membership test with one that ignores the budget, to
    /// confirm the suite notices.
    pub inject_fault: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub instance: usize,
    pub property: &'static str,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    pub seed: u64,
    pub instances: usize,
    pub checks: BTreeMap<&'static str, usize>,
    pub violations: usize,
    pub first_violation: Option<Violation>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

struct Suite {
    fault: bool,
    instance: usize,
    checks: BTreeMap<&'static str, usize>,
    violations: usize,
    first: Option<Violation>,
}

fn show(x: &RandomVariable) -> String {
    let parts: Vec<String> = x.values().iter().map(format_rational).collect();
    format!("({})", parts.join(", "))
}

impl Suite {
    fn check(&mut self, property: &'static str, ok: bool, detail: impl FnOnce() -> String) {
        *self.checks.entry(property).or_default() += 1;
        if !ok {
            self.violations += 1;
            if self.first.is_none() {
                self.first = Some(Violation {
                    instance: self.instance,
                    property,
                    detail: detail(),
                });
            }
        }
    }

    fn member(&self, b: &SemiSolidSet, x: &RandomVariable, scale: &Rational) -> Result<bool> {
        if self.fault {
            return Ok(x.is_nonneg() && b.minkowski(x)? != Gauge::Infinite);
        }
        b.contains_scaled(x, scale)
    }

    /// A point of `B` together with a point below it.
    fn sample_member<R: Rng>(rng: &mut R, b: &SemiSolidSet) -> (RandomVariable, RandomVariable) {
        let space = b.space();
        let mut x = RandomVariable::zero(space);
        let mut budget = one();
        for g in b.generators() {
            let lam = &budget * random_rational(rng, 0, 20) / int(20);
            budget -= &lam;
            x = x.add(&g.scale(&lam)).expect("same space");
        }
        for r in b.rays() {
            x = x.add(&r.scale(&random_rational(rng, 0, 20))).expect("same space");
        }
        let below = RandomVariable::new(
            space,
            x.values()
                .iter()
                .map(|v| v * random_rational(rng, 0, 20) / int(20))
                .collect(),
        )
        .expect("same space");
        (x, below)
    }

    fn semisolid_instance<R: Rng>(&mut self, rng: &mut R, b: &SemiSolidSet) -> Result<()> {
        let space = b.space().clone();
        let zero_x = RandomVariable::zero(&space);
        let p0 = b.minkowski(&zero_x)?;
        self.check("gauge_vanishes_at_zero", p0 == Gauge::Finite(zero()), || {
            format!("p(0) = {p0}")
        });

        let (x, below) = Self::sample_member(rng, b);
        let (y, _) = Self::sample_member(rng, b);
        let x_in = self.member(b, &x, &one())?;
        self.check("sampled_points_are_members", x_in, || format!("x = {}", show(&x)));
        let below_in = self.member(b, &below, &one())?;
        self.check("semi_solid", below_in, || {
            format!("x = {} in B but {} below it is not", show(&x), show(&below))
        });
        let t = random_rational(rng, 0, 20) / int(20);
        let mix = x.scale(&t).add(&y.scale(&(one() - &t)))?;
        let mix_in = self.member(b, &mix, &one())?;
        self.check("convex", mix_in, || format!("{} = combination of members", show(&mix)));

        // gauge at most one on B, monotone below a member, homogeneous
        let px = b.minkowski(&x)?;
        self.check("gauge_at_most_one_on_set", px <= Gauge::Finite(one()), || {
            format!("p({}) = {px}", show(&x))
        });
        let pb = b.minkowski(&below)?;
        self.check("gauge_monotone", pb <= px, || {
            format!("p({}) = {pb} > p({}) = {px}", show(&below), show(&x))
        });
        let a = random_rational(rng, 0, 20);
        let pax = b.minkowski(&x.scale(&a))?;
        self.check("gauge_homogeneous", pax == px.scale(&a), || {
            format!(
                "p({} * {}) = {pax}, expected {}",
                format_rational(&a),
                show(&x),
                px.scale(&a)
            )
        });

        // arbitrary nonnegative points: gauge at least one off B, sublevel sets
        for _ in 0..3 {
            let z = random_nonneg(rng, &space).scale(&random_rational(rng, 1, 20));
            let pz = b.minkowski(&z)?;
            let z_in = self.member(b, &z, &one())?;
            if !z_in {
                self.check("gauge_at_least_one_off_set", pz >= Gauge::Finite(one()), || {
                    format!("z = {} not in B but p(z) = {pz}", show(&z))
                });
            }
            let alpha = ratio(rng.gen_range(1..=19), 20);
            let scaled_in = self.member(b, &z, &alpha)?;
            let sub = pz <= Gauge::Finite(alpha.clone());
            self.check("sublevel_sets_are_scaled_copies", scaled_in == sub, || {
                format!(
                    "z = {}, alpha = {}: z in alpha*B is {scaled_in}, p(z) = {pz}",
                    show(&z),
                    format_rational(&alpha)
                )
            });
            let direct = b.contains_scaled(&z, &alpha)?;
            let rescaled = b.contains(&z.scale(&(one() / &alpha)))?;
            self.check("scaled_copy_membership", direct == rescaled, || {
                format!("z = {}, alpha = {}", show(&z), format_rational(&alpha))
            });
            // boundary point z / p(z) has gauge exactly one and lies in B
            if let Gauge::Finite(v) = &pz {
                if v.is_positive() {
                    let edge = z.scale(&(one() / v));
                    let edge_in = self.member(b, &edge, &one())?;
                    let pe = b.minkowski(&edge)?;
                    self.check("gauge_boundary", edge_in && pe == Gauge::Finite(one()), || {
                        format!("edge {} has p = {pe}, member = {edge_in}", show(&edge))
                    });
                }
            }
        }

        // the zero set is trivial exactly when no ray survives
        let structural = b.rays().iter().all(RandomVariable::is_zero);
        let by_gauge = b.zero_set_trivial()?;
        self.check("zero_set_trivial_iff_positive_gauge", structural == by_gauge, || {
            format!("rays {:?}, gauge route says {by_gauge}", b.rays())
        });
        Ok(())
    }

    fn market_instance<R: Rng>(&mut self, rng: &mut R, model: &MarketModel) -> Result<()> {
        let space = model.space().clone();

        // B_α = αB
        for _ in 0..2 {
            let x = random_nonneg(rng, &space);
            let alpha = random_rational(rng, 1, 20);
            let direct = market::budget_member(model, &x, &alpha)?;
            let rescaled = market::budget_member(model, &x.scale(&(one() / &alpha)), &one())?;
            self.check("budget_sets_scale", direct == rescaled, || {
                format!("x = {}, alpha = {}", show(&x), format_rational(&alpha))
            });
        }

        // a point of B from a random strategy, shrunk until its wealth is nonnegative
        let mut strategy = random_strategy(rng, model);
        let mut wealth = one_plus_gain(model, &strategy)?;
        while !wealth.is_nonneg() {
            strategy = strategy.combine(&ratio(1, 2), &Strategy::zero(model), &zero());
            wealth = one_plus_gain(model, &strategy)?;
        }
        let below = RandomVariable::new(
            &space,
            wealth
                .values()
                .iter()
                .map(|v| v * random_rational(rng, 0, 20) / int(20))
                .collect(),
        )?;
        self.check(
            "market_budget_semi_solid",
            market::budget_member(model, &below, &one())?,
            || format!("{} below wealth {}", show(&below), show(&wealth)),
        );
        let pw = market::market_gauge(model, &wealth)?;
        self.check("market_gauge_at_most_one", pw <= Gauge::Finite(one()), || {
            format!("p({}) = {pw}", show(&wealth))
        });
        let pb = market::market_gauge(model, &below)?;
        self.check("market_gauge_monotone", pb <= pw, || {
            format!("p({}) = {pb} > {pw}", show(&below))
        });
        let a = random_rational(rng, 0, 20);
        let pa = market::market_gauge(model, &wealth.scale(&a))?;
        self.check("market_gauge_homogeneous", pa == pw.scale(&a), || {
            format!("p({} wealth) = {pa}", format_rational(&a))
        });

        // positive gauge on indicators exactly when B₀ is trivial
        let na = market::check_na(model)?;
        let na1 = market::check_na1(model)?;
        self.check("positive_gauge_iff_no_arbitrage", na1 == na.holds(), || {
            format!("na1 = {na1}, na = {}", na.holds())
        });

        // B₀ lies in every B_α: points under an arbitrage payoff have gauge zero
        if let market::NaCheck::Fails(arb) = &na {
            let c = random_rational(rng, 1, 20);
            let x = arb.payoff.scale(&c);
            let (by_gauge, by_grid) = crate::concepts::in_zero_set(model, &x)?;
            self.check("zero_budget_inside_all_budgets", by_gauge && by_grid, || {
                format!("arbitrage payoff {}: gauge {by_gauge}, grid {by_grid}", show(&x))
            });
        }
        let x = random_nonneg(rng, &space);
        let (by_gauge, by_grid) = crate::concepts::in_zero_set(model, &x)?;
        self.check("zero_set_is_gauge_kernel", by_gauge == by_grid, || {
            format!("x = {}: gauge {by_gauge}, grid {by_grid}", show(&x))
        });
        Ok(())
    }
}

fn one_plus_gain(model: &MarketModel, s: &Strategy) -> Result<RandomVariable> {
    market::terminal_gain(model, s)?.add(&RandomVariable::constant(model.space(), one()))
}

pub fn random_strategy<R: Rng>(rng: &mut R, model: &MarketModel) -> Strategy {
    let mut s = Strategy::zero(model);
    for e in model.elementary_strategies() {
        s.set(e, random_rational(rng, -20, 20));
    }
    s
}

/// Runs the property checks on `instances` random semi-solid sets and markets.
pub fn verify_lemma_suite(cfg: LemmaSuiteConfig) -> Result<LemmaReport> {
    if cfg.instances == 0 {
        return Err(Error::Contract("need at least one instance".into()));
    }
    let mut rng = rng(cfg.seed);
    let mut suite = Suite {
        fault: cfg.inject_fault,
        instance: 0,
        checks: BTreeMap::new(),
        violations: 0,
        first: None,
    };
    for i in 0..cfg.instances {
        suite.instance = i;
        let b = random_semisolid(&mut rng);
        suite.semisolid_instance(&mut rng, &b)?;
        let shape = MarketShape {
            max_periods: 2,
            max_outcomes: 6,
            max_assets: 2,
        };
        let model = random_market(&mut rng, shape);
        suite.market_instance(&mut rng, &model)?;
    }
    Ok(LemmaReport {
        seed: cfg.seed,
        instances: cfg.instances,
        checks: suite.checks,
        violations: suite.violations,
        first_violation: suite.first,
    })
}
