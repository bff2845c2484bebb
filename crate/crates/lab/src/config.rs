//! Strict `key = value` experiment configuration.
//!
//! One assignment per line; `#` starts a comment. Every experiment has a fixed
//! key schema: unknown keys, duplicates, missing required keys and values of
//! the wrong type are all reported together, with line numbers.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

/// Environment variable that overrides the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "POSLAB_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Experiment {
    Tails,
    Project,
    Fragility,
    Causality,
    Minloc,
    Commutator,
    Belljump,
    Jointclick,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Self::Tails,
        Self::Project,
        Self::Fragility,
        Self::Causality,
        Self::Minloc,
        Self::Commutator,
        Self::Belljump,
        Self::Jointclick,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Tails => "tails",
            Self::Project => "project",
            Self::Fragility => "fragility",
            Self::Causality => "causality",
            Self::Minloc => "minloc",
            Self::Commutator => "commutator",
            Self::Belljump => "belljump",
            Self::Jointclick => "jointclick",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }

    pub fn summary(self) -> &'static str {
        match self {
            Self::Tails => "tail profile and decay-rate fit of a Newton-Wigner state",
            Self::Project => "positive-energy projection of a compact bump",
            Self::Fragility => "negative-energy fraction created by a local potential",
            Self::Causality => "light-cone leakage of a freely evolved compact state",
            Self::Minloc => "minimal mass outside a region over positive-energy states",
            Self::Commutator => "detector commutator norms along a ladder of gaps",
            Self::Belljump => "Bell-type jump process ensemble against |psi|^2",
            Self::Jointclick => "joint two-region detection probability versus coupling",
        }
    }

    pub fn schema(self) -> &'static [ParamSpec] {
        use Fallback::*;
        use Kind::*;
        const MASS: ParamSpec = ParamSpec::new("mass", Float, Given("1"));
        const LENGTH: ParamSpec = ParamSpec::new("length", Float, Given("40"));
        const POINTS: ParamSpec = ParamSpec::new("points", Int, Given("1024"));
        const STEP: ParamSpec = ParamSpec::new("time_step", Float, Derived);
        match self {
            Self::Tails => {
                const S: &[ParamSpec] = &[
                    MASS,
                    LENGTH,
                    POINTS,
                    ParamSpec::new("center", Float, Given("0")),
                    ParamSpec::new("window_start", Float, Given("5")),
                    ParamSpec::new("window_end", Float, Given("10")),
                    ParamSpec::new("cutoff_fraction", Float, Given("0.125")),
                ];
                S
            }
            Self::Project => {
                const S: &[ParamSpec] = &[
                    MASS,
                    LENGTH,
                    POINTS,
                    ParamSpec::new("bump_center", Float, Given("0")),
                    ParamSpec::new("bump_radius", Float, Required),
                ];
                S
            }
            Self::Fragility => {
                const S: &[ParamSpec] = &[
                    MASS,
                    LENGTH,
                    POINTS,
                    STEP,
                    ParamSpec::new("strengths", FloatList, Required),
                    ParamSpec::new("potential", Text, Given("box")),
                    ParamSpec::new("potential_center", Float, Given("0")),
                    ParamSpec::new("potential_width", Float, Given("1")),
                    ParamSpec::new("packet_center", Float, Given("0")),
                    ParamSpec::new("packet_width", Float, Given("2")),
                    ParamSpec::new("packet_momentum", Float, Given("0")),
                    ParamSpec::new("total_time", Float, Given("2")),
                    ParamSpec::new("fit_max_strength", Float, Given("0.1")),
                ];
                S
            }
            Self::Causality => {
                const S: &[ParamSpec] = &[
                    MASS,
                    LENGTH,
                    POINTS,
                    ParamSpec::new("bump_center", Float, Given("0")),
                    ParamSpec::new("bump_radius", Float, Required),
                    ParamSpec::new("time", Float, Required),
                    ParamSpec::new("support_threshold", Float, Given("1e-8")),
                ];
                S
            }
            Self::Minloc => {
                const S: &[ParamSpec] = &[
                    MASS,
                    ParamSpec::new("length", Float, Given("16")),
                    ParamSpec::new("points", Int, Given("64")),
                    ParamSpec::new("region_center", Float, Given("0")),
                    ParamSpec::new("region_half_width", Float, Required),
                    ParamSpec::new("shrink_levels", Int, Given("2")),
                ];
                S
            }
            Self::Commutator => {
                const S: &[ParamSpec] = &[
                    MASS,
                    ParamSpec::new("length", Float, Given("32")),
                    ParamSpec::new("points", Int, Given("128")),
                    ParamSpec::new("gaps", FloatList, Required),
                    ParamSpec::new("region_width", Float, Given("2")),
                ];
                S
            }
            Self::Belljump => {
                const S: &[ParamSpec] = &[
                    ParamSpec::new("sites", Int, Required),
                    ParamSpec::new("max_particles", Int, Required),
                    ParamSpec::new("hopping", Float, Given("1")),
                    ParamSpec::new("coupling", Float, Required),
                    ParamSpec::new("source_site", Int, Given("0")),
                    ParamSpec::new("total_time", Float, Required),
                    ParamSpec::new("time_step", Float, Given("0.001")),
                    ParamSpec::new("trajectories", Int, Required),
                    ParamSpec::new("logged_trajectories", Int, Given("100")),
                    ParamSpec::new("packet_center", Float, Given("3")),
                    ParamSpec::new("packet_width", Float, Given("1")),
                    ParamSpec::new("packet_momentum", Float, Given("1")),
                ];
                S
            }
            Self::Jointclick => {
                const S: &[ParamSpec] = &[
                    ParamSpec::new("sites", Int, Required),
                    ParamSpec::new("max_particles", Int, Required),
                    ParamSpec::new("hopping", Float, Given("1")),
                    ParamSpec::new("couplings", FloatList, Required),
                    ParamSpec::new("source_site", Int, Given("0")),
                    ParamSpec::new("total_time", Float, Required),
                    ParamSpec::new("region_a", Sites, Required),
                    ParamSpec::new("region_b", Sites, Required),
                    ParamSpec::new("trajectories", Int, Given("0")),
                    ParamSpec::new("time_step", Float, Given("0.001")),
                    ParamSpec::new("packet_center", Float, Given("3")),
                    ParamSpec::new("packet_width", Float, Given("1")),
                    ParamSpec::new("packet_momentum", Float, Given("1")),
                ];
                S
            }
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Keys accepted by every experiment.
pub const COMMON_KEYS: [&str; 3] = ["experiment", "seed", "output_dir"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Float,
    Int,
    Text,
    /// Comma-separated floats.
    FloatList,
    /// Semicolon-separated lattice site indices.
    Sites,
}

impl Kind {
    fn describe(self) -> &'static str {
        match self {
            Self::Float => "a number",
            Self::Int => "a non-negative integer",
            Self::Text => "a word",
            Self::FloatList => "a comma-separated list of numbers",
            Self::Sites => "a semicolon-separated list of site indices",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fallback {
    Required,
    Given(&'static str),
    /// Optional; computed from other parameters when absent.
    Derived,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamSpec {
    pub key: &'static str,
    pub kind: Kind,
    pub default: Fallback,
}

impl ParamSpec {
    pub const fn new(key: &'static str, kind: Kind, default: Fallback) -> Self {
        Self { key, kind, default }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(u64),
    Text(String),
    FloatList(Vec<f64>),
    Sites(Vec<usize>),
}

impl Value {
    fn parse(kind: Kind, raw: &str) -> Option<Self> {
        match kind {
            Kind::Float => parse_float(raw).map(Self::Float),
            Kind::Int => raw.parse().ok().map(Self::Int),
            Kind::Text => (!raw.is_empty() && !raw.contains(char::is_whitespace))
                .then(|| Self::Text(raw.to_string())),
            Kind::FloatList => raw
                .split(',')
                .map(|s| parse_float(s.trim()))
                .collect::<Option<Vec<_>>>()
                .map(Self::FloatList),
            Kind::Sites => raw
                .split(';')
                .map(|s| s.trim().parse().ok())
                .collect::<Option<Vec<_>>>()
                .map(Self::Sites),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Self::Float(x) => serde_json::json!(x),
            Self::Int(n) => serde_json::json!(n),
            Self::Text(s) => serde_json::json!(s),
            Self::FloatList(v) => serde_json::json!(v),
            Self::Sites(v) => serde_json::json!(v),
        }
    }
}

fn parse_float(raw: &str) -> Option<f64> {
    raw.parse::<f64>().ok().filter(|x| x.is_finite())
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: Vec<String>, sep: &str| v.join(sep);
        match self {
            Self::Float(x) => write!(f, "{x}"),
            Self::Int(n) => write!(f, "{n}"),
            Self::Text(s) => f.write_str(s),
            Self::FloatList(v) => {
                f.write_str(&join(v.iter().map(|x| x.to_string()).collect(), ", "))
            }
            Self::Sites(v) => f.write_str(&join(v.iter().map(|x| x.to_string()).collect(), ";")),
        }
    }
}

/// One problem found while parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Issue {
    Syntax {
        line: usize,
        text: String,
    },
    MissingExperiment,
    UnknownExperiment {
        line: usize,
        name: String,
    },
    UnknownKey {
        line: usize,
        key: String,
    },
    DuplicateKey {
        key: String,
        first: usize,
        second: usize,
    },
    MissingKey {
        key: String,
    },
    TypeMismatch {
        line: usize,
        key: String,
        expected: &'static str,
        found: String,
    },
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Syntax { line, text } => {
                write!(f, "line {line}: expected `key = value`, found {text:?}")
            }
            Self::MissingExperiment => f.write_str("missing `experiment` key"),
            Self::UnknownExperiment { line, name } => {
                write!(f, "line {line}: unknown experiment {name:?}")
            }
            Self::UnknownKey { line, key } => write!(f, "line {line}: unknown key `{key}`"),
            Self::DuplicateKey { key, first, second } => {
                write!(f, "duplicate key `{key}` on lines {first} and {second}")
            }
            Self::MissingKey { key } => write!(f, "missing required key `{key}`"),
            Self::TypeMismatch {
                line,
                key,
                expected,
                found,
            } => write!(
                f,
                "line {line}: `{key}` must be {expected}, found {found:?}"
            ),
        }
    }
}

/// All problems found in a config file.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ConfigError {
    pub issues: Vec<Issue>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self.issues.iter().map(|i| i.to_string()).collect();
        f.write_str(&lines.join("\n"))
    }
}

/// A validated configuration with defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub output_dir: PathBuf,
    params: BTreeMap<&'static str, Option<Value>>,
}

impl ExperimentConfig {
    fn lookup(&self, key: &str) -> Option<&Value> {
        self.params
            .get(key)
            .unwrap_or_else(|| panic!("`{key}` is not a parameter of {}", self.experiment))
            .as_ref()
    }

    pub fn f64(&self, key: &str) -> f64 {
        match self.lookup(key) {
            Some(Value::Float(x)) => *x,
            other => panic!("`{key}` is not a float: {other:?}"),
        }
    }

    pub fn opt_f64(&self, key: &str) -> Option<f64> {
        self.lookup(key).map(|_| self.f64(key))
    }

    pub fn usize(&self, key: &str) -> usize {
        match self.lookup(key) {
            Some(Value::Int(n)) => *n as usize,
            other => panic!("`{key}` is not an integer: {other:?}"),
        }
    }

    pub fn text(&self, key: &str) -> &str {
        match self.lookup(key) {
            Some(Value::Text(s)) => s,
            other => panic!("`{key}` is not text: {other:?}"),
        }
    }

    pub fn list(&self, key: &str) -> &[f64] {
        match self.lookup(key) {
            Some(Value::FloatList(v)) => v,
            other => panic!("`{key}` is not a list: {other:?}"),
        }
    }

    pub fn sites(&self, key: &str) -> &[usize] {
        match self.lookup(key) {
            Some(Value::Sites(v)) => v,
            other => panic!("`{key}` is not a site list: {other:?}"),
        }
    }

    /// Replaces the output directory from [`OUTPUT_DIR_ENV`] when set.
    pub fn apply_env_override(&mut self) {
        if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV) {
            if !dir.is_empty() {
                self.output_dir = PathBuf::from(dir);
            }
        }
    }

    /// Every parameter with its effective value (`"auto"` for derived ones).
    pub fn echo(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        map.insert("experiment".into(), self.experiment.name().into());
        map.insert("seed".into(), self.seed.into());
        for (k, v) in &self.params {
            map.insert(
                (*k).into(),
                v.as_ref().map_or_else(|| "auto".into(), Value::to_json),
            );
        }
        serde_json::Value::Object(map)
    }
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut issues = Vec::new();
    // key -> (line, raw value)
    let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            issues.push(Issue::Syntax {
                line,
                text: content.to_string(),
            });
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || key.contains(char::is_whitespace) {
            issues.push(Issue::Syntax {
                line,
                text: content.to_string(),
            });
            continue;
        }
        if let Some((first, _)) = entries.get(key) {
            issues.push(Issue::DuplicateKey {
                key: key.to_string(),
                first: *first,
                second: line,
            });
            continue;
        }
        entries.insert(key.to_string(), (line, value.to_string()));
    }

    let experiment = match entries.get("experiment") {
        None => {
            issues.push(Issue::MissingExperiment);
            None
        }
        Some((line, name)) => {
            let e = Experiment::from_name(name);
            if e.is_none() {
                issues.push(Issue::UnknownExperiment {
                    line: *line,
                    name: name.clone(),
                });
            }
            e
        }
    };
    let Some(experiment) = experiment else {
        return Err(ConfigError { issues });
    };

    let mut seed = 0;
    if let Some((line, raw)) = entries.get("seed") {
        match raw.parse::<u64>() {
            Ok(s) => seed = s,
            Err(_) => issues.push(Issue::TypeMismatch {
                line: *line,
                key: "seed".into(),
                expected: Kind::Int.describe(),
                found: raw.clone(),
            }),
        }
    }
    let output_dir = match entries.get("output_dir") {
        Some((_, raw)) if !raw.is_empty() => PathBuf::from(raw),
        _ => PathBuf::from("poslab-out").join(experiment.name()),
    };

    let schema = experiment.schema();
    for (key, (line, _)) in &entries {
        if !COMMON_KEYS.contains(&key.as_str()) && !schema.iter().any(|p| p.key == key) {
            issues.push(Issue::UnknownKey {
                line: *line,
                key: key.clone(),
            });
        }
    }
    let mut params = BTreeMap::new();
    for param in schema {
        let value = match (entries.get(param.key), param.default) {
            (Some((line, raw)), _) => match Value::parse(param.kind, raw) {
                Some(v) => Some(v),
                None => {
                    issues.push(Issue::TypeMismatch {
                        line: *line,
                        key: param.key.into(),
                        expected: param.kind.describe(),
                        found: raw.clone(),
                    });
                    None
                }
            },
            (None, Fallback::Required) => {
                issues.push(Issue::MissingKey {
                    key: param.key.into(),
                });
                None
            }
            (None, Fallback::Given(d)) => {
                Some(Value::parse(param.kind, d).expect("schema defaults parse"))
            }
            (None, Fallback::Derived) => None,
        };
        params.insert(param.key, value);
    }

    if issues.is_empty() {
        Ok(ExperimentConfig {
            experiment,
            seed,
            output_dir,
            params,
        })
    } else {
        issues.sort_by_key(issue_line);
        Err(ConfigError { issues })
    }
}

fn issue_line(issue: &Issue) -> usize {
    match issue {
        Issue::Syntax { line, .. }
        | Issue::UnknownExperiment { line, .. }
        | Issue::UnknownKey { line, .. }
        | Issue::TypeMismatch { line, .. } => *line,
        Issue::DuplicateKey { second, .. } => *second,
        Issue::MissingExperiment | Issue::MissingKey { .. } => usize::MAX,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_lacks_experiment() {
        assert_eq!(
            parse_config("").unwrap_err().issues,
            vec![Issue::MissingExperiment]
        );
        assert_eq!(
            parse_config("# nothing\n\n").unwrap_err().issues,
            vec![Issue::MissingExperiment]
        );
    }

    #[test]
    fn minloc_echoes_defaults() {
        let cfg = parse_config("experiment = minloc\nregion_half_width = 1.1\n").unwrap();
        assert_eq!(cfg.experiment, Experiment::Minloc);
        assert_eq!(cfg.usize("points"), 64);
        assert_eq!(cfg.f64("length"), 16.0);
        assert_eq!(cfg.f64("region_half_width"), 1.1);
        let echo = cfg.echo();
        assert_eq!(echo["shrink_levels"], 2);
        assert_eq!(echo["seed"], 0);
    }

    #[test]
    fn duplicate_names_both_lines() {
        let err = parse_config("experiment = tails\ncenter = 0\n\ncenter = 1\n").unwrap_err();
        assert_eq!(
            err.issues,
            vec![Issue::DuplicateKey {
                key: "center".into(),
                first: 2,
                second: 4
            }]
        );
        assert!(err.to_string().contains("lines 2 and 4"));
    }

    #[test]
    fn issues_are_itemized() {
        let text =
            "experiment = fragility\nstrengths = 0.1, x\nbogus = 3\npoints = -4\nthis line\n";
        let err = parse_config(text).unwrap_err();
        assert_eq!(err.issues.len(), 4, "{err}");
        assert!(matches!(err.issues[0], Issue::TypeMismatch { line: 2, .. }));
        assert!(matches!(err.issues[1], Issue::UnknownKey { line: 3, .. }));
        assert!(matches!(err.issues[2], Issue::TypeMismatch { line: 4, .. }));
        assert!(matches!(err.issues[3], Issue::Syntax { line: 5, .. }));
    }

    #[test]
    fn unknown_experiment_and_missing_keys() {
        let err = parse_config("experiment = plot").unwrap_err();
        assert!(matches!(
            err.issues[0],
            Issue::UnknownExperiment { line: 1, .. }
        ));
        let err = parse_config("experiment = causality\nbump_radius = 2").unwrap_err();
        assert_eq!(err.issues, vec![Issue::MissingKey { key: "time".into() }]);
    }

    #[test]
    fn typed_values() {
        let cfg = parse_config(
            "experiment = jointclick # trailing comment\nsites = 8\nmax_particles = 2\n\
             couplings = 0.1,0.2\ntotal_time = 1\nregion_a = 0;1\nregion_b = 4; 5\nseed = 99\n",
        )
        .unwrap();
        assert_eq!(cfg.list("couplings"), &[0.1, 0.2]);
        assert_eq!(cfg.sites("region_b"), &[4, 5]);
        assert_eq!(cfg.seed, 99);
        assert!(parse_config("experiment = tails\nseed = -1").is_err());
        assert!(parse_config("experiment = tails\nmass = nan").is_err());
    }
}
