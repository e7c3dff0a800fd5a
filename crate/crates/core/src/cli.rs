//! Command-line front end.
//!
//! Exit codes: 0 the property holds, 1 it fails (a witness is reported),
//! 2 bad input or a violated precondition, 3 an internal inconsistency.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::concepts;
use crate::cone::Gauge;
use crate::error::Error;
use crate::format::{self, FormatError};
use crate::lab::{self, CounterexampleConfig, LemmaSuiteConfig};
use crate::lattice::{RandomVariable, SampleSpace};
use crate::market::{self, Arbitrage, Elementary, EmmSearch, MarketModel, Measure, NaCheck, Strategy};
use crate::num::{format_rational, Rational};
use crate::separation::{self, Functional, StrictSeparation};

pub const EXIT_HOLDS: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "noarb",
    version,
    about = "Exact no-arbitrage analysis of finite-state markets"
)]
struct Cli {
    /// Print a JSON report instead of a table
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide NA, NA1, NUPBR, or all concepts at once
    Check { property: Property, market: PathBuf },
    /// Find an equivalent martingale measure
    Emm { market: PathBuf },
    /// Superreplication price of a payoff
    Price { market: PathBuf, payoff: PathBuf },
    /// Truncated unbounded semi-solid set with trivial zero set
    Counterexample {
        #[arg(long)]
        n: usize,
    },
    /// Run the randomized property suite for gauges and budget sets
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        instances: usize,
        /// Inject a fault and expect the suite to catch it
        #[arg(long)]
        self_test: bool,
    },
    /// Separate a cone containing -V+ from a target or from every outcome
    Separate {
        cone: PathBuf,
        /// Comma-separated rationals in outcome order
        #[arg(long, allow_hyphen_values = true)]
        target: Option<String>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Property {
    Na,
    Na1,
    Nupbr,
    All,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    Input(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Witness(_) | Error::Inconsistent(_) | Error::Disagreement(_) => Failure::Internal(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

struct Report {
    code: i32,
    body: Value,
    note: Option<String>,
}

type Outcome = Result<Report, Failure>;

pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Output {
                    code: EXIT_HOLDS,
                    stdout: text,
                    stderr: String::new(),
                },
                _ => Output {
                    code: EXIT_INPUT,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    let outcome = match &cli.command {
        Command::Check { property, market } => load_market(market).and_then(|m| check(*property, &m)),
        Command::Emm { market } => load_market(market).and_then(|m| emm(&m)),
        Command::Price { market, payoff } => load_market(market).and_then(|m| price(&m, payoff)),
        Command::Counterexample { n } => counterexample(*n),
        Command::Verify {
            seed,
            instances,
            self_test,
        } => verify(*seed, *instances, *self_test),
        Command::Separate { cone, target } => separate(cone, target.as_deref()),
    };
    match outcome {
        Ok(r) => Output {
            code: r.code,
            stdout: render(&r.body, cli.json),
            stderr: r.note.map(|n| format!("{n}\n")).unwrap_or_default(),
        },
        Err(f) => {
            let (code, kind, message) = match f {
                Failure::Input(m) => (EXIT_INPUT, "input", m),
                Failure::Internal(m) => (EXIT_INTERNAL, "internal", m),
            };
            let stdout = if cli.json {
                render(
                    &json!({"error": {"kind": kind, "message": message}, "exact": true}),
                    true,
                )
            } else {
                String::new()
            };
            Output {
                code,
                stdout,
                stderr: format!("error: {message}\n"),
            }
        }
    }
}

fn render(body: &Value, as_json: bool) -> String {
    if as_json {
        let mut s = serde_json::to_string_pretty(body).expect("plain data");
        s.push('\n');
        return s;
    }
    let mut rows = Vec::new();
    flatten("", body, &mut rows);
    let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    rows.iter().map(|(k, v)| format!("{k:width$}  {v}\n")).collect()
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) if !m.is_empty() => {
            for (k, x) in m {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, x, rows);
            }
        }
        Value::Array(a) if !a.is_empty() => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, rows);
            }
        }
        Value::Object(_) => rows.push((prefix.to_string(), "{}".into())),
        Value::Array(_) => rows.push((prefix.to_string(), "[]".into())),
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

fn located(path: &Path, e: FormatError) -> Failure {
    Failure::Input(format!("{}: {e}", path.display()))
}

fn load_market(path: &Path) -> Result<MarketModel, Failure> {
    format::parse_market(&read(path)?).map_err(|e| located(path, e))
}

fn report(code: i32, command: &str, payload: Value, verdicts: Value, witnesses: Value) -> Report {
    let mut body = match payload {
        Value::Object(m) => m,
        _ => Map::new(),
    };
    body.insert("command".into(), command.into());
    body.insert("verdicts".into(), verdicts);
    body.insert("witnesses".into(), witnesses);
    body.insert("exact".into(), true.into());
    Report {
        code,
        body: Value::Object(body),
        note: None,
    }
}

fn q(x: &Rational) -> Value {
    Value::String(format_rational(x))
}

fn keyed(space: &SampleSpace, values: &[Rational]) -> Value {
    Value::Object(space.outcomes().iter().cloned().zip(values.iter().map(q)).collect())
}

fn rv(x: &RandomVariable) -> Value {
    keyed(x.space(), x.values())
}

fn cell_ids(model: &MarketModel, e: Elementary) -> Vec<String> {
    let ids = model.space().outcomes();
    model.filtration().partition(e.period - 1)[e.cell]
        .iter()
        .map(|&w| ids[w].clone())
        .collect()
}

/// Nonzero holdings, one entry per period, asset and cell.
fn strategy_json(model: &MarketModel, s: &Strategy) -> Value {
    let entries = model
        .elementary_strategies()
        .into_iter()
        .filter(|e| !num_traits::Zero::is_zero(s.get(*e)))
        .map(|e| {
            json!({
                "period": e.period,
                "asset": model.assets()[e.asset].name,
                "cell": cell_ids(model, e),
                "holding": q(s.get(e)),
            })
        })
        .collect();
    Value::Array(entries)
}

fn arbitrage_json(model: &MarketModel, arb: &Arbitrage) -> Result<Value, Failure> {
    market::verify_arbitrage(model, arb)?;
    Ok(json!({"strategy": strategy_json(model, &arb.strategy), "payoff": rv(&arb.payoff)}))
}

fn measure_json(model: &MarketModel, m: &Measure) -> Result<Value, Failure> {
    market::verify_emm(model, m)?;
    Ok(keyed(model.space(), m.weights()))
}

fn functional_json(f: &Functional) -> Value {
    keyed(f.space(), f.coefficients())
}

fn holds_code(holds: bool) -> i32 {
    if holds {
        EXIT_HOLDS
    } else {
        EXIT_FAILS
    }
}

fn emm_or_internal(model: &MarketModel) -> Result<Measure, Failure> {
    match market::find_emm(model)? {
        EmmSearch::Found(m) => Ok(m),
        EmmSearch::None(_) => Err(Failure::Internal("no martingale measure although NA holds".into())),
    }
}

fn check(property: Property, model: &MarketModel) -> Outcome {
    let (name, holds, witnesses) = match property {
        Property::Na => match market::check_na(model)? {
            NaCheck::Holds => (
                "na",
                true,
                json!({"emm": measure_json(model, &emm_or_internal(model)?)?}),
            ),
            NaCheck::Fails(arb) => ("na", false, json!({"arbitrage": arbitrage_json(model, &arb)?})),
        },
        Property::Na1 => check_na1(model)?,
        Property::Nupbr => match market::budget_bound(model)? {
            Gauge::Finite(v) => ("nupbr", true, json!({"budget_bound": q(&v)})),
            Gauge::Infinite => {
                let arb = market::unbounded_budget_direction(model)?
                    .ok_or_else(|| Failure::Internal("unbounded budget set without a recession direction".into()))?;
                ("nupbr", false, json!({"arbitrage": arbitrage_json(model, &arb)?}))
            }
        },
        Property::All => return check_all(model),
    };
    let mut verdicts = Map::new();
    verdicts.insert(name.into(), holds.into());
    Ok(report(
        holds_code(holds),
        "check",
        json!({"property": name, "holds": holds}),
        Value::Object(verdicts),
        witnesses,
    ))
}

fn check_na1(model: &MarketModel) -> Result<(&'static str, bool, Value), Failure> {
    let space = model.space();
    let mut prices = Vec::with_capacity(space.len());
    for w in 0..space.len() {
        let e = RandomVariable::indicator(space, w);
        let sup = market::superreplication_price(model, &e)?;
        if !num_traits::Signed::is_positive(&sup.price) {
            let payoff = market::terminal_gain(model, &sup.strategy)?;
            let arb = Arbitrage {
                strategy: sup.strategy,
                payoff,
            };
            let witness = json!({
                "outcome": space.outcomes()[w],
                "superreplication_price": q(&sup.price),
                "arbitrage": arbitrage_json(model, &arb)?,
            });
            return Ok(("na1", false, witness));
        }
        prices.push(sup.price);
    }
    Ok(("na1", true, json!({"indicator_prices": keyed(space, &prices)})))
}

fn check_all(model: &MarketModel) -> Outcome {
    let v = concepts::compute_verdicts(model)?;
    let verdicts: Map<String, Value> = v.all().iter().map(|(k, b)| (k.to_string(), Value::Bool(*b))).collect();
    let payload = json!({"property": "all", "holds": v.na && v.agree(), "collapse": v.agree()});
    if !v.agree() {
        let mut r = report(EXIT_INTERNAL, "check", payload, Value::Object(verdicts), json!({}));
        r.note = Some("error: no-arbitrage concepts disagree on a finite market".into());
        return Ok(r);
    }
    let cone = market::payoff_cone(model, true);
    let witnesses = if v.na {
        let StrictSeparation::Found(sep) = separation::strict_separator(&cone)? else {
            return Err(Failure::Internal("separator vanished between calls".into()));
        };
        json!({
            "emm": measure_json(model, &emm_or_internal(model)?)?,
            "separator": functional_json(&sep.functional),
        })
    } else {
        let NaCheck::Fails(arb) = market::check_na(model)? else {
            return Err(Failure::Internal("arbitrage vanished between calls".into()));
        };
        let mut w = Map::new();
        w.insert("arbitrage".into(), arbitrage_json(model, &arb)?);
        if let StrictSeparation::Violated { direction, .. } = separation::strict_separator(&cone)? {
            w.insert("violating_direction".into(), rv(&direction));
        }
        Value::Object(w)
    };
    Ok(report(
        holds_code(v.na),
        "check",
        payload,
        Value::Object(verdicts),
        witnesses,
    ))
}

fn emm(model: &MarketModel) -> Outcome {
    match market::find_emm(model)? {
        EmmSearch::Found(m) => {
            let residuals: Vec<Value> = market::martingale_residuals(model, &m)
                .iter()
                .map(|r| {
                    json!({
                        "period": r.strategy.period,
                        "asset": model.assets()[r.strategy.asset].name,
                        "cell": cell_ids(model, r.strategy),
                        "residual": q(&r.residual),
                    })
                })
                .collect();
            let payload = json!({
                "measure": measure_json(model, &m)?,
                "density": keyed(model.space(), &m.density()),
                "martingale_residuals": residuals,
            });
            Ok(report(
                EXIT_HOLDS,
                "emm",
                payload,
                json!({"emm_exists": true}),
                json!({}),
            ))
        }
        EmmSearch::None(arb) => Ok(report(
            EXIT_FAILS,
            "emm",
            json!({"measure": "none"}),
            json!({"emm_exists": false}),
            json!({"arbitrage": arbitrage_json(model, &arb)?}),
        )),
    }
}

fn price(model: &MarketModel, payoff_path: &Path) -> Outcome {
    let payoff = format::parse_payoff(&read(payoff_path)?, model.space()).map_err(|e| located(payoff_path, e))?;
    let sup = market::superreplication_price(model, &payoff)?;
    let wealth = market::terminal_gain(model, &sup.strategy)?
        .add(&RandomVariable::constant(model.space(), sup.price.clone()))?;
    if !payoff.leq(&wealth)? {
        return Err(Failure::Internal(
            "superreplicating strategy does not dominate the payoff".into(),
        ));
    }
    let mut witnesses = Map::new();
    witnesses.insert(
        "superreplication".into(),
        json!({"strategy": strategy_json(model, &sup.strategy), "terminal_wealth": rv(&wealth)}),
    );
    let na = match market::check_na(model)? {
        NaCheck::Holds => true,
        NaCheck::Fails(arb) => {
            witnesses.insert("arbitrage".into(), arbitrage_json(model, &arb)?);
            false
        }
    };
    let payload = json!({"payoff": rv(&payoff), "price": q(&sup.price)});
    Ok(report(
        holds_code(na),
        "price",
        payload,
        json!({"na": na}),
        Value::Object(witnesses),
    ))
}

fn counterexample(n: usize) -> Outcome {
    let r = lab::counterexample_report(CounterexampleConfig { truncation: n })?;
    let payload = serde_json::to_value(&r).expect("plain data");
    let verdicts = json!({"bounded": true, "zero_set_trivial": r.zero_set_trivial});
    Ok(report(
        holds_code(r.zero_set_trivial),
        "counterexample",
        payload,
        verdicts,
        json!({}),
    ))
}

fn verify(seed: u64, instances: usize, self_test: bool) -> Outcome {
    let r = lab::verify_lemma_suite(LemmaSuiteConfig {
        seed,
        instances,
        inject_fault: self_test,
    })?;
    let payload = json!({
        "seed": r.seed,
        "instances": r.instances,
        "checks": r.checks,
        "violations": r.violations,
        "self_test": self_test,
    });
    let witnesses = json!({"first_violation": r.first_violation});
    let code = match (self_test, r.passed()) {
        (false, true) => EXIT_HOLDS,
        (_, false) => EXIT_FAILS,
        (true, true) => EXIT_INTERNAL,
    };
    let mut rep = report(code, "verify", payload, json!({"passed": r.passed()}), witnesses);
    if code == EXIT_INTERNAL {
        rep.note = Some("error: injected fault went undetected".into());
    }
    Ok(rep)
}

fn separate(cone_path: &Path, target: Option<&str>) -> Outcome {
    let cone = format::parse_cone(&read(cone_path)?).map_err(|e| located(cone_path, e))?;
    let generators = cone.generators().len();
    match target {
        Some(text) => {
            let t = format::parse_vector(text, cone.space()).map_err(|e| Failure::Input(format!("--target: {e}")))?;
            match separation::separate_at(&cone, &t)? {
                Some(rep) => Ok(report(
                    EXIT_HOLDS,
                    "separate",
                    json!({
                        "target": rv(&t),
                        "functional": functional_json(&rep.functional),
                        "value_at_target": q(&rep.functional.apply(&t)),
                        "verified_on": rep.verified_on,
                    }),
                    json!({"separator_exists": true}),
                    json!({}),
                )),
                None => {
                    let coeffs = cone
                        .decompose(&t)?
                        .ok_or_else(|| Failure::Internal("target neither separated nor in the cone".into()))?;
                    let mut combo = RandomVariable::zero(cone.space());
                    for (g, l) in cone.generators().iter().zip(&coeffs) {
                        combo = combo.add(&g.scale(l))?;
                    }
                    let covered = if cone.includes_neg_orthant() {
                        t.leq(&combo)?
                    } else {
                        combo == t
                    };
                    if !covered || coeffs.iter().any(num_traits::Signed::is_negative) {
                        return Err(Failure::Internal(
                            "cone combination does not reproduce the target".into(),
                        ));
                    }
                    Ok(report(
                        EXIT_FAILS,
                        "separate",
                        json!({"target": rv(&t), "functional": "none"}),
                        json!({"separator_exists": false}),
                        json!({"cone_combination": coeffs.iter().map(q).collect::<Vec<_>>(), "generators": generators}),
                    ))
                }
            }
        }
        None => match separation::strict_separator(&cone)? {
            StrictSeparation::Found(rep) => Ok(report(
                EXIT_HOLDS,
                "separate",
                json!({
                    "functional": functional_json(&rep.functional),
                    "normalization": q(&rep.normalization),
                    "verified_on": rep.verified_on,
                }),
                json!({"separator_exists": true, "strictly_positive": rep.functional.is_strictly_positive()}),
                json!({}),
            )),
            StrictSeparation::Violated { outcome, direction } => Ok(report(
                EXIT_FAILS,
                "separate",
                json!({"functional": "none"}),
                json!({"separator_exists": false}),
                json!({
                    "outcome": cone.space().outcomes()[outcome],
                    "violating_direction": rv(&direction),
                }),
            )),
        },
    }
}
