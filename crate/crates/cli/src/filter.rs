//! `--conditions` selection.
//!
//! A comma-separated list; a condition is kept when it matches any item:
//!
//! * `all`
//! * `3`: position in the configured grid, from 0
//! * `v=20`, `mu=0.3`: every condition with that speed or friction
//! * `20:0.3`: one speed/friction pair

use yawreg_core::vehicle::OperatingCondition;

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq)]
enum Item {
    All,
    Index(usize),
    Speed(f64),
    Friction(f64),
    Pair(f64, f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionFilter {
    items: Vec<Item>,
}

const MATCH_TOL: f64 = 1e-9;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= MATCH_TOL * a.abs().max(b.abs()).max(1.0)
}

fn number(s: &str, whole: &str) -> CliResult<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| CliError::Invalid(format!("--conditions: cannot read `{whole}`")))
}

impl ConditionFilter {
    pub fn all() -> Self {
        Self { items: vec![Item::All] }
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let mut items = Vec::new();
        for raw in text.split(',') {
            let tok = raw.trim();
            let item = if tok.is_empty() {
                return Err(CliError::Invalid("--conditions: empty item".into()));
            } else if tok.eq_ignore_ascii_case("all") {
                Item::All
            } else if let Some(v) = tok.strip_prefix("v=") {
                Item::Speed(number(v, tok)?)
            } else if let Some(m) = tok.strip_prefix("mu=") {
                Item::Friction(number(m, tok)?)
            } else if let Some((v, m)) = tok.split_once(':') {
                Item::Pair(number(v, tok)?, number(m, tok)?)
            } else {
                Item::Index(
                    tok.parse()
                        .map_err(|_| CliError::Invalid(format!("--conditions: cannot read `{tok}`")))?,
                )
            };
            items.push(item);
        }
        Ok(Self { items })
    }

    fn matches(&self, index: usize, oc: &OperatingCondition) -> bool {
        self.items.iter().any(|it| match *it {
            Item::All => true,
            Item::Index(i) => i == index,
            Item::Speed(v) => close(v, oc.v()),
            Item::Friction(m) => close(m, oc.mu()),
            Item::Pair(v, m) => close(v, oc.v()) && close(m, oc.mu()),
        })
    }

    /// Positions of the selected conditions; an empty selection is an error.
    pub fn select(&self, conditions: &[OperatingCondition]) -> CliResult<Vec<usize>> {
        if let Some(Item::Index(i)) = self.items.iter().find(|it| matches!(it, Item::Index(i) if *i >= conditions.len())) {
            return Err(CliError::Invalid(format!(
                "--conditions: index {i} out of range (grid has {})",
                conditions.len()
            )));
        }
        let picked: Vec<usize> = conditions
            .iter()
            .enumerate()
            .filter(|(i, oc)| self.matches(*i, oc))
            .map(|(i, _)| i)
            .collect();
        if picked.is_empty() {
            return Err(CliError::Invalid("--conditions selects no operating condition".into()));
        }
        Ok(picked)
    }
}
