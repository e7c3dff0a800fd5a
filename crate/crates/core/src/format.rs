//! JSON file formats for markets, payoffs and cones.
//!
//! All numbers travel as strings (`"p/q"` or integers). Paths and payoffs are
//! keyed by outcome id. Errors carry the line and column of the offending text
//! when it can be found.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cone::PolyhedralCone;
use crate::lattice::{RandomVariable, SampleSpace};
use crate::market::{Asset, Filtration, MarketModel};
use crate::num::{format_rational, parse_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormatError {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            _ => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for FormatError {}

/// Position of the first occurrence of `needle`, 1-based.
fn locate(text: &str, needle: &str) -> Option<(usize, usize)> {
    let at = text.find(needle)?;
    let before = &text[..at];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(at, |nl| at - nl - 1) + 1;
    Some((line, column))
}

struct Source<'a> {
    text: &'a str,
}

impl Source<'_> {
    /// Error anchored at the quoted string `anchor`, or at the first backticked
    /// name in the message when no anchor is given.
    fn error(&self, anchor: Option<&str>, message: String) -> FormatError {
        let from_message = || {
            let start = message.find('`')? + 1;
            let len = message[start..].find('`')?;
            Some(message[start..start + len].to_string())
        };
        let anchor = anchor.map(str::to_string).or_else(from_message);
        let pos = anchor.and_then(|a| locate(self.text, &format!("\"{a}\"")));
        FormatError {
            line: pos.map(|p| p.0),
            column: pos.map(|p| p.1),
            message,
        }
    }

    fn rational(&self, s: &str) -> Result<Rational, FormatError> {
        parse_rational(s).map_err(|e| self.error(Some(s), e.to_string()))
    }

    fn parse<'de, T: Deserialize<'de>>(&self, text: &'de str) -> Result<T, FormatError> {
        serde_json::from_str(text).map_err(|e| FormatError {
            line: Some(e.line()),
            column: Some(e.column()),
            message: strip_position(&e.to_string()),
        })
    }

    fn space(&self, outcomes: &[OutcomeEntry]) -> Result<Arc<SampleSpace>, FormatError> {
        let probs = outcomes
            .iter()
            .map(|o| self.rational(&o.prob))
            .collect::<Result<Vec<_>, _>>()?;
        SampleSpace::new(outcomes.iter().map(|o| o.id.clone()).collect(), probs)
            .map_err(|e| self.error(Some("outcomes"), e.to_string()))
    }

    fn index(&self, space: &SampleSpace, id: &str) -> Result<usize, FormatError> {
        space
            .index_of(id)
            .ok_or_else(|| self.error(Some(id), format!("unknown outcome id `{id}`")))
    }

    /// Values keyed by every outcome id, exactly once.
    fn keyed(
        &self,
        space: &Arc<SampleSpace>,
        entries: &BTreeMap<String, String>,
        what: &str,
    ) -> Result<RandomVariable, FormatError> {
        let mut values = vec![None; space.len()];
        for (id, v) in entries {
            values[self.index(space, id)?] = Some(self.rational(v)?);
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(w, v)| {
                v.ok_or_else(|| {
                    self.error(
                        Some(what),
                        format!("{what} has no value for outcome `{}`", space.outcomes()[w]),
                    )
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RandomVariable::new(space, values).expect("one value per outcome"))
    }
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutcomeEntry {
    pub id: String,
    pub prob: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetEntry {
    pub name: String,
    pub path: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketFile {
    pub outcomes: Vec<OutcomeEntry>,
    /// Per time, the cells of the partition as lists of outcome ids.
    pub filtration: Vec<Vec<Vec<String>>>,
    pub assets: Vec<AssetEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayoffFile {
    pub payoff: BTreeMap<String, String>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeFile {
    pub outcomes: Vec<OutcomeEntry>,
    pub generators: Vec<BTreeMap<String, String>>,
    #[serde(default = "yes")]
    pub includes_neg_orthant: bool,
}

pub fn parse_market(text: &str) -> Result<MarketModel, FormatError> {
    let src = Source { text };
    let file: MarketFile = src.parse(text)?;
    let space = src.space(&file.outcomes)?;
    let partitions = file
        .filtration
        .iter()
        .map(|cells| {
            cells
                .iter()
                .map(|cell| cell.iter().map(|id| src.index(&space, id)).collect())
                .collect()
        })
        .collect::<Result<Vec<Vec<Vec<usize>>>, _>>()?;
    let filtration = Filtration::new(&space, partitions).map_err(|e| src.error(Some("filtration"), e.to_string()))?;
    let steps = filtration.periods() + 1;
    let mut assets = Vec::with_capacity(file.assets.len());
    for a in &file.assets {
        let mut by_time = vec![BTreeMap::new(); steps];
        for (id, prices) in &a.path {
            if prices.len() != steps {
                return Err(src.error(
                    Some(&a.name),
                    format!(
                        "asset `{}` has {} prices for outcome `{id}`, expected {steps}",
                        a.name,
                        prices.len()
                    ),
                ));
            }
            for (t, p) in prices.iter().enumerate() {
                by_time[t].insert(id.clone(), p.clone());
            }
        }
        if a.path.is_empty() {
            return Err(src.error(Some(&a.name), format!("asset `{}` has an empty path", a.name)));
        }
        let path = by_time
            .iter()
            .map(|entries| src.keyed(&space, entries, &a.name))
            .collect::<Result<Vec<_>, _>>()?;
        assets.push(Asset {
            name: a.name.clone(),
            path,
        });
    }
    MarketModel::new(filtration, assets).map_err(|e| src.error(None, e.to_string()))
}

pub fn market_to_file(model: &MarketModel) -> MarketFile {
    let space = model.space();
    let ids = space.outcomes();
    MarketFile {
        outcomes: ids
            .iter()
            .zip(space.probabilities())
            .map(|(id, p)| OutcomeEntry {
                id: id.clone(),
                prob: format_rational(p),
            })
            .collect(),
        filtration: model
            .filtration()
            .partitions()
            .iter()
            .map(|cells| {
                cells
                    .iter()
                    .map(|cell| cell.iter().map(|&w| ids[w].clone()).collect())
                    .collect()
            })
            .collect(),
        assets: model
            .assets()
            .iter()
            .map(|a| AssetEntry {
                name: a.name.clone(),
                path: ids
                    .iter()
                    .enumerate()
                    .map(|(w, id)| {
                        (
                            id.clone(),
                            a.path.iter().map(|x| format_rational(&x.values()[w])).collect(),
                        )
                    })
                    .collect(),
            })
            .collect(),
    }
}

pub fn write_market(model: &MarketModel) -> String {
    let mut s = serde_json::to_string_pretty(&market_to_file(model)).expect("plain data");
    s.push('\n');
    s
}

/// Payoff on the market's outcomes; every outcome needs a value.
pub fn parse_payoff(text: &str, space: &Arc<SampleSpace>) -> Result<RandomVariable, FormatError> {
    let src = Source { text };
    let file: PayoffFile = src.parse(text)?;
    src.keyed(space, &file.payoff, "payoff")
}

pub fn parse_cone(text: &str) -> Result<PolyhedralCone, FormatError> {
    let src = Source { text };
    let file: ConeFile = src.parse(text)?;
    let space = src.space(&file.outcomes)?;
    let gens = file
        .generators
        .iter()
        .map(|g| src.keyed(&space, g, "generators"))
        .collect::<Result<Vec<_>, _>>()?;
    PolyhedralCone::new(&space, gens, file.includes_neg_orthant).map_err(|e| src.error(None, e.to_string()))
}

/// Comma-separated rationals in outcome order.
pub fn parse_vector(text: &str, space: &Arc<SampleSpace>) -> Result<RandomVariable, FormatError> {
    let plain = |message: String| FormatError {
        line: None,
        column: None,
        message,
    };
    let values = text
        .split(',')
        .map(|s| parse_rational(s.trim()).map_err(|e| plain(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    RandomVariable::new(space, values).map_err(|e| plain(e.to_string()))
}
