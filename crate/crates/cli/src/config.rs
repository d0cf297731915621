//! Experiment configuration: `key = value` lines with one `[family.N]`
//! section per family member (TOML syntax).
//!
//! Defaults:
//!
//! | key | default |
//! |---|---|
//! | `mode` | `"construct-run"` (also `"max-fixture"`, `"oracle"`) |
//! | `width` | 4096 |
//! | `steps` | 20000 |
//! | `trials` | 1 |
//! | `seed` | 0 |
//! | `star_density` | 0.05 |
//! | `stride` | 25 |
//! | `transient` | 100 |
//! | `queries` | `[]` |
//! | `out` | `"out"` |
//! | `diagram` | `false` |
//! | `inner_speed` | `"1/2"` (one of `1/2`, `1/3`, `1/4`) |
//! | `workspace_constant` | 4 |
//! | `rule` | `"max"` (or `"eca-N"`, N in 0..=255) |
//! | `word` | `"0"` |
//! | `time` | 1 |
//!
//! A family member is either a preset (`kind = "fibonacci"`, `"thue-morse"`,
//! `"even-shift"`), a substitution (`kind = "substitution"`, `rules = ["a ->
//! ab", "b -> a"]`, `seed = "a"`) or a sofic graph (`kind = "sofic"`, `states
//! = 2`, `start = 0`, `edges = ["0 0 0", "0 1 1", "1 1 0"]`, each edge being
//! `from label to`).

use std::collections::BTreeMap;
use std::path::PathBuf;

use mulimit::construction::ConstructionParams;
use mulimit::generators::{FamilySpec, LabeledEdge, SoficGraph, SubshiftSpec, Substitution};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    ConstructRun,
    MaxFixture,
    Oracle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rules: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub width: usize,
    pub steps: u64,
    pub trials: usize,
    pub seed: u64,
    pub star_density: f64,
    pub stride: u64,
    pub transient: u64,
    pub queries: Vec<String>,
    pub out: PathBuf,
    pub diagram: bool,
    pub inner_speed: String,
    pub workspace_constant: usize,
    pub rule: String,
    pub word: String,
    pub time: usize,
    pub family: BTreeMap<String, MemberConfig>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mode: Mode::ConstructRun,
            width: 4096,
            steps: 20_000,
            trials: 1,
            seed: 0,
            star_density: 0.05,
            stride: 25,
            transient: 100,
            queries: Vec::new(),
            out: PathBuf::from("out"),
            diagram: false,
            inner_speed: "1/2".to_string(),
            workspace_constant: 4,
            rule: "max".to_string(),
            word: "0".to_string(),
            time: 1,
            family: BTreeMap::new(),
        }
    }
}

fn invalid(field: &str, message: impl Into<String>) -> CliError {
    CliError::Validation { field: field.to_string(), message: message.into() }
}

/// 1-based line of byte `offset` in `text`.
fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    let config: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Parse {
        line: e.span().map(|s| line_of(text, s.start)).unwrap_or(0),
        message: e.message().to_string(),
    })?;
    config.validate()?;
    Ok(config)
}

/// Renders a configuration that `parse_config` reads back unchanged.
pub fn render_config(config: &ExperimentConfig) -> String {
    toml::to_string(config).expect("configuration serializes")
}

fn single_char(field: &str, s: &str) -> Result<char, CliError> {
    let mut chars = s.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(invalid(field, format!("expected one symbol, got {s:?}"))),
    }
}

fn member_spec(key: &str, m: &MemberConfig) -> Result<SubshiftSpec, CliError> {
    let field = |name: &str| format!("family.{key}.{name}");
    let require = |value: bool, name: &str| {
        if value {
            Ok(())
        } else {
            Err(invalid(&field(name), format!("required for kind {:?}", m.kind)))
        }
    };
    let reject = |present: bool, name: &str| {
        if present {
            Err(invalid(&field(name), format!("not allowed for kind {:?}", m.kind)))
        } else {
            Ok(())
        }
    };
    let preset = |spec: SubshiftSpec| -> Result<SubshiftSpec, CliError> {
        reject(m.rules.is_some(), "rules")?;
        reject(m.seed.is_some(), "seed")?;
        reject(m.states.is_some(), "states")?;
        reject(m.start.is_some(), "start")?;
        reject(m.edges.is_some(), "edges")?;
        Ok(spec)
    };
    let spec = match m.kind.as_str() {
        "fibonacci" => preset(SubshiftSpec::fibonacci())?,
        "thue-morse" => preset(SubshiftSpec::thue_morse())?,
        "even-shift" => preset(SubshiftSpec::even_shift())?,
        "substitution" => {
            reject(m.states.is_some(), "states")?;
            reject(m.start.is_some(), "start")?;
            reject(m.edges.is_some(), "edges")?;
            require(m.rules.is_some(), "rules")?;
            require(m.seed.is_some(), "seed")?;
            let mut rules = BTreeMap::new();
            for r in m.rules.as_ref().unwrap() {
                let (lhs, rhs) = r
                    .split_once("->")
                    .ok_or_else(|| invalid(&field("rules"), format!("{r:?} is not `x -> image`")))?;
                let lhs = single_char(&field("rules"), lhs.trim())?;
                if rules.insert(lhs, rhs.trim().to_string()).is_some() {
                    return Err(invalid(&field("rules"), format!("two rules for {lhs:?}")));
                }
            }
            let seed = single_char(&field("seed"), m.seed.as_ref().unwrap())?;
            SubshiftSpec::Substitution(Substitution { rules, seed })
        }
        "sofic" => {
            reject(m.rules.is_some(), "rules")?;
            reject(m.seed.is_some(), "seed")?;
            require(m.states.is_some(), "states")?;
            require(m.edges.is_some(), "edges")?;
            let mut edges = Vec::new();
            for e in m.edges.as_ref().unwrap() {
                let parts: Vec<&str> = e.split_whitespace().collect();
                let bad = || invalid(&field("edges"), format!("{e:?} is not `from label to`"));
                let [from, label, to] = parts[..] else { return Err(bad()) };
                edges.push(LabeledEdge {
                    from: from.parse().map_err(|_| bad())?,
                    label: single_char(&field("edges"), label)?,
                    to: to.parse().map_err(|_| bad())?,
                });
            }
            SubshiftSpec::SoficTransitive(SoficGraph {
                states: m.states.unwrap(),
                edges,
                start: m.start.unwrap_or(0),
            })
        }
        other => return Err(invalid(&field("kind"), format!("unknown kind {other:?}"))),
    };
    spec.validate().map_err(|e| invalid(&field("kind"), e.to_string()))?;
    Ok(spec)
}

impl ExperimentConfig {
    /// Family members in numeric section order.
    pub fn family_spec(&self) -> Result<FamilySpec, CliError> {
        let mut keyed = Vec::new();
        for (key, m) in &self.family {
            let n: u32 = key
                .parse()
                .map_err(|_| invalid(&format!("family.{key}"), "section index must be a number"))?;
            keyed.push((n, member_spec(key, m)?));
        }
        keyed.sort_by_key(|(n, _)| *n);
        FamilySpec::new(keyed.into_iter().map(|(_, s)| s).collect())
            .map_err(|e| invalid("family", e.to_string()))
    }

    /// Inner-signal period `p` for `inner_speed = 1/p`.
    pub fn counter_period(&self) -> Result<u16, CliError> {
        let p = self
            .inner_speed
            .trim()
            .strip_prefix("1/")
            .and_then(|d| d.trim().parse::<u16>().ok())
            .filter(|p| (2..=4).contains(p));
        p.ok_or_else(|| invalid("inner_speed", "must be 1/2, 1/3 or 1/4"))
    }

    pub fn construction_params(&self) -> Result<ConstructionParams, CliError> {
        let mut params = ConstructionParams::new(self.family_spec()?);
        params.counter_period = self.counter_period()?;
        params.workspace_constant = self.workspace_constant;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.trials == 0 {
            return Err(invalid("trials", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.star_density) {
            return Err(invalid("star_density", format!("{} is outside [0, 1]", self.star_density)));
        }
        if self.stride == 0 {
            return Err(invalid("stride", "must be positive"));
        }
        if self.workspace_constant == 0 {
            return Err(invalid("workspace_constant", "must be positive"));
        }
        self.counter_period()?;
        match self.mode {
            Mode::Oracle => {
                crate::commands::oracle_rule(&self.rule)?;
                if self.word.is_empty() {
                    return Err(invalid("word", "must be nonempty"));
                }
            }
            Mode::MaxFixture | Mode::ConstructRun => {
                let radius = if self.mode == Mode::MaxFixture { 1 } else { 2 };
                if self.width < 2 * radius + 1 {
                    return Err(invalid("width", format!("must be at least {}", 2 * radius + 1)));
                }
                if self.queries.is_empty() {
                    return Err(invalid("queries", "at least one query word is needed"));
                }
                if self.queries.iter().any(|q| q.is_empty() || q.chars().count() > self.width) {
                    return Err(invalid("queries", "query words must be nonempty and fit the window"));
                }
                if self.mode == Mode::ConstructRun {
                    self.construction_params()?;
                }
            }
        }
        Ok(())
    }

    /// Checks that only matter when densities are classified.
    pub fn validate_run(&self) -> Result<(), CliError> {
        self.validate()?;
        if self.transient >= self.steps {
            return Err(invalid("transient", "must be smaller than steps"));
        }
        Ok(())
    }
}
