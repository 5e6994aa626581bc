//! Experiment configuration files.
//!
//! Configs are JSON objects. Every key is optional except `kind`; unknown
//! keys are rejected. The resolved configuration (defaults filled in) is
//! echoed into every output file and parses back to the same spec.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::{ChannelConfig, ChannelFamily};
use crate::entanglement::{CutPolicy, DEFAULT_NORMALIZED_FLOOR};
use crate::qstate::{GhzSpec, Parity};
use crate::sampling::DEFAULT_HISTOGRAM_BINS;
use crate::{Error, Result};

pub const DEFAULT_MAX_QUBITS: usize = 10;
pub const DEFAULT_SEED: u64 = 20_240_601;
/// Dephasing probability of the fig3 experiment unless overridden.
pub const FIG3_DEFAULT_P: f64 = 0.3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Bound,
    Evolve,
    Sample,
    Fig1,
    Fig2,
    Fig3,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Bound => "bound",
            ExperimentKind::Evolve => "evolve",
            ExperimentKind::Sample => "sample",
            ExperimentKind::Fig1 => "fig1",
            ExperimentKind::Fig2 => "fig2",
            ExperimentKind::Fig3 => "fig3",
        }
    }
}

/// Number of Haar samples per register size.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleSchedule {
    /// 2000 (N ≤ 7), 500 (N = 8, 9), 100 (N ≥ 10).
    Desk,
    /// Large-scale runs: 10000 (N ≤ 7), 5000 (8–10), 1560 (11), 100 (12), 10 (13), 1 (14+).
    Full,
    /// Explicit sizes keyed by N (as a string in JSON).
    Explicit(BTreeMap<String, usize>),
}

impl SampleSchedule {
    pub fn size_for(&self, num_qubits: usize) -> Result<usize> {
        Ok(match self {
            SampleSchedule::Desk => match num_qubits {
                0..=7 => 2000,
                8 | 9 => 500,
                _ => 100,
            },
            SampleSchedule::Full => match num_qubits {
                0..=7 => 10_000,
                8..=10 => 5000,
                11 => 1560,
                12 => 100,
                13 => 10,
                _ => 1,
            },
            SampleSchedule::Explicit(map) => {
                *map.get(&num_qubits.to_string()).ok_or_else(|| {
                    Error::Config(format!(
                        "`sample_schedule` has no entry for N = {num_qubits}"
                    ))
                })?
            }
        })
    }
}

/// Generalized GHZ state parameters as written in config files. Complex
/// numbers are `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GhzConfig {
    #[serde(default)]
    pub label_k: u64,
    #[serde(default = "default_parity")]
    pub parity: Parity,
    #[serde(default = "default_amplitude")]
    pub alpha: Complex64,
    #[serde(default = "default_amplitude")]
    pub beta: Complex64,
}

fn default_parity() -> Parity {
    Parity::Plus
}

fn default_amplitude() -> Complex64 {
    Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
}

impl GhzConfig {
    pub fn balanced() -> Self {
        GhzConfig {
            label_k: 0,
            parity: Parity::Plus,
            alpha: default_amplitude(),
            beta: default_amplitude(),
        }
    }

    pub fn build(&self, num_qubits: usize) -> Result<GhzSpec> {
        GhzSpec::new(num_qubits, self.label_k, self.parity, self.alpha, self.beta)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialStateConfig {
    Haar,
    Ghz(GhzConfig),
    /// Path to a state snapshot (`.json` or binary).
    File(PathBuf),
}

/// One value or a list of values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// Raw config as read from disk.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ExperimentKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_qubits: Option<OneOrMany<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cut_policy: Option<CutPolicy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_schedule: Option<SampleSchedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<InitialStateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub histogram_bins: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalized_floor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_qubits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

/// Validated experiment with every default resolved.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub num_qubits: Vec<usize>,
    pub p_grid: Vec<f64>,
    pub channel: ChannelConfig,
    pub cut_policy: CutPolicy,
    pub seed: u64,
    pub sample_schedule: SampleSchedule,
    /// Overrides the schedule for every N when set.
    pub sample_size: Option<usize>,
    pub initial_state: InitialStateConfig,
    pub histogram_bins: usize,
    pub normalized_floor: f64,
    pub max_qubits: usize,
    pub output_dir: PathBuf,
    /// Worker threads; `None` uses the rayon default. Not part of the echo.
    pub threads: Option<usize>,
}

/// The default p grid: 0 to 1 in steps of 0.05.
pub fn default_p_grid() -> Vec<f64> {
    (0..=20).map(|i| i as f64 / 20.0).collect()
}

/// 1-based line of the first occurrence of `"key"` in the source, if any.
fn line_of(src: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    src.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
}

fn key_error(src: &str, key: &str, msg: impl std::fmt::Display) -> Error {
    match line_of(src, key) {
        Some(line) => Error::Config(format!("`{key}` (line {line}): {msg}")),
        None => Error::Config(format!("`{key}`: {msg}")),
    }
}

pub fn parse_config(path: &Path) -> Result<ExperimentSpec> {
    let src = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&src)
}

pub fn parse_config_str(src: &str) -> Result<ExperimentSpec> {
    let raw: ExperimentConfig = if src.trim().is_empty() {
        ExperimentConfig::default()
    } else {
        serde_json::from_str(src)
            .map_err(|e| Error::Config(format!("{e} (line {}, column {})", e.line(), e.column())))?
    };
    resolve(raw, src)
}

fn check_p(src: &str, key: &str, p: f64) -> Result<()> {
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return Err(key_error(
            src,
            key,
            format!("probability {p} outside [0, 1]"),
        ));
    }
    Ok(())
}

fn resolve(raw: ExperimentConfig, src: &str) -> Result<ExperimentSpec> {
    let kind = raw
        .kind
        .ok_or_else(|| Error::Config("missing required key `kind`".into()))?;

    let num_qubits = match &raw.num_qubits {
        Some(n) => n.to_vec(),
        None => match kind {
            ExperimentKind::Fig1 | ExperimentKind::Fig2 => (2..=6).collect(),
            ExperimentKind::Fig3 => (2..=10).collect(),
            _ => vec![4],
        },
    };
    if num_qubits.is_empty() {
        return Err(key_error(src, "num_qubits", "list is empty"));
    }
    for &n in &num_qubits {
        if n < 2 {
            return Err(key_error(src, "num_qubits", format!("N = {n} is below 2")));
        }
    }

    let default_family = match kind {
        ExperimentKind::Fig3 => ChannelFamily::Dephasing,
        _ => ChannelFamily::Depolarizing,
    };
    let channel = raw
        .channel
        .clone()
        .unwrap_or_else(|| ChannelConfig::new(default_family));
    if let Some(p) = channel.p {
        check_p(src, "p", p)?;
    }
    channel
        .validate()
        .map_err(|e| key_error(src, "channel", e))?;
    match (kind, channel.family) {
        (ExperimentKind::Fig1 | ExperimentKind::Fig2, f) if f != ChannelFamily::Depolarizing => {
            return Err(key_error(
                src,
                "family",
                format!("{} requires the depolarizing channel", kind.name()),
            ));
        }
        (ExperimentKind::Fig3, f) if f != ChannelFamily::Dephasing => {
            return Err(key_error(
                src,
                "family",
                "fig3 requires the dephasing channel",
            ));
        }
        _ => {}
    }

    let p_grid = if let Some(grid) = &raw.p_grid {
        grid.clone()
    } else if let Some(p) = raw.p {
        vec![p]
    } else if let Some(p) = channel.p {
        vec![p]
    } else if kind == ExperimentKind::Fig3 {
        vec![FIG3_DEFAULT_P]
    } else {
        default_p_grid()
    };
    let grid_key = if raw.p_grid.is_some() { "p_grid" } else { "p" };
    if p_grid.is_empty() {
        return Err(key_error(src, grid_key, "p grid is empty"));
    }
    for (i, &p) in p_grid.iter().enumerate() {
        check_p(src, grid_key, p)?;
        if i > 0 && p <= p_grid[i - 1] {
            return Err(key_error(
                src,
                grid_key,
                "values must be strictly increasing",
            ));
        }
    }

    let cut_policy = raw.cut_policy.unwrap_or(match kind {
        ExperimentKind::Fig2 | ExperimentKind::Fig3 => CutPolicy::LeastBalanced,
        ExperimentKind::Evolve => CutPolicy::All,
        _ => CutPolicy::MostBalanced,
    });
    match (kind, cut_policy) {
        (ExperimentKind::Fig1, CutPolicy::MostBalanced)
        | (ExperimentKind::Fig2 | ExperimentKind::Fig3, CutPolicy::LeastBalanced) => {}
        (ExperimentKind::Fig1 | ExperimentKind::Fig2 | ExperimentKind::Fig3, _) => {
            return Err(key_error(
                src,
                "cut_policy",
                format!("{} uses a fixed cut policy", kind.name()),
            ));
        }
        _ => {}
    }

    if let Some(0) = raw.sample_size {
        return Err(key_error(src, "sample_size", "must be at least 1"));
    }
    let sample_schedule = raw.sample_schedule.clone().unwrap_or(SampleSchedule::Desk);
    if let SampleSchedule::Explicit(map) = &sample_schedule {
        for (k, &v) in map {
            if k.parse::<usize>().is_err() {
                return Err(key_error(
                    src,
                    "sample_schedule",
                    format!("key {k:?} is not an integer"),
                ));
            }
            if v == 0 {
                return Err(key_error(
                    src,
                    "sample_schedule",
                    format!("size for N = {k} must be at least 1"),
                ));
            }
        }
        if raw.sample_size.is_none() {
            for &n in &num_qubits {
                sample_schedule
                    .size_for(n)
                    .map_err(|e| key_error(src, "sample_schedule", e))?;
            }
        }
    }

    let initial_state = match raw.initial_state.clone() {
        Some(s) => s,
        None if kind == ExperimentKind::Evolve => {
            return Err(key_error(
                src,
                "initial_state",
                "evolve needs an explicit initial state (`ghz` or `file`)",
            ))
        }
        None => InitialStateConfig::Haar,
    };
    match (&initial_state, kind) {
        (InitialStateConfig::Haar, ExperimentKind::Evolve) => {
            return Err(key_error(
                src,
                "initial_state",
                "evolve needs `ghz` or `file`",
            ));
        }
        (
            InitialStateConfig::File(_),
            ExperimentKind::Sample
            | ExperimentKind::Fig1
            | ExperimentKind::Fig2
            | ExperimentKind::Fig3,
        ) => {
            return Err(key_error(
                src,
                "initial_state",
                "sampling experiments take `haar` or `ghz`",
            ));
        }
        (InitialStateConfig::Ghz(g), _) => {
            for &n in &num_qubits {
                g.build(n).map_err(|e| key_error(src, "initial_state", e))?;
            }
        }
        _ => {}
    }

    let histogram_bins = raw.histogram_bins.unwrap_or(DEFAULT_HISTOGRAM_BINS);
    if histogram_bins == 0 {
        return Err(key_error(src, "histogram_bins", "must be at least 1"));
    }
    let normalized_floor = raw.normalized_floor.unwrap_or(DEFAULT_NORMALIZED_FLOOR);
    if !(normalized_floor >= 0.0) || !normalized_floor.is_finite() {
        return Err(key_error(
            src,
            "normalized_floor",
            "must be finite and nonnegative",
        ));
    }
    let max_qubits = raw.max_qubits.unwrap_or(DEFAULT_MAX_QUBITS);
    if max_qubits < 2 {
        return Err(key_error(src, "max_qubits", "must be at least 2"));
    }
    if let Some(0) = raw.threads {
        return Err(key_error(src, "threads", "must be at least 1"));
    }

    Ok(ExperimentSpec {
        kind,
        num_qubits,
        p_grid,
        channel,
        cut_policy,
        seed: raw.seed.unwrap_or(DEFAULT_SEED),
        sample_schedule,
        sample_size: raw.sample_size,
        initial_state,
        histogram_bins,
        normalized_floor,
        max_qubits,
        output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from("out")),
        threads: raw.threads,
    })
}

impl ExperimentSpec {
    /// Resolved config as a raw config. Threads and the output directory are
    /// left out so that the echo does not depend on where or how a run happens.
    pub fn to_config(&self) -> ExperimentConfig {
        ExperimentConfig {
            kind: Some(self.kind),
            num_qubits: Some(OneOrMany::Many(self.num_qubits.clone())),
            p_grid: Some(self.p_grid.clone()),
            p: None,
            channel: Some(self.channel.clone()),
            cut_policy: Some(self.cut_policy),
            seed: Some(self.seed),
            sample_schedule: Some(self.sample_schedule.clone()),
            sample_size: self.sample_size,
            initial_state: Some(self.initial_state.clone()),
            histogram_bins: Some(self.histogram_bins),
            normalized_floor: Some(self.normalized_floor),
            max_qubits: Some(self.max_qubits),
            output_dir: None,
            threads: None,
        }
    }

    /// Single-line JSON echo embedded in outputs.
    pub fn echo_json(&self) -> String {
        serde_json::to_string(&self.to_config()).expect("config serialization cannot fail")
    }

    pub fn sample_size_for(&self, num_qubits: usize) -> Result<usize> {
        match self.sample_size {
            Some(s) => Ok(s),
            None => self.sample_schedule.size_for(num_qubits),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_requires_kind() {
        let err = parse_config_str("").unwrap_err();
        assert!(
            matches!(&err, Error::Config(m) if m.contains("kind")),
            "{err}"
        );
        let err = parse_config_str("{}").unwrap_err();
        assert!(err.to_string().contains("kind"));
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let spec = parse_config_str(r#"{"kind": "fig1"}"#).unwrap();
        assert_eq!(spec.num_qubits, vec![2, 3, 4, 5, 6]);
        assert_eq!(spec.p_grid.len(), 21);
        assert_eq!(spec.p_grid[1], 0.05);
        assert_eq!(spec.p_grid[20], 1.0);
        assert_eq!(spec.channel.family, ChannelFamily::Depolarizing);
        assert_eq!(spec.cut_policy, CutPolicy::MostBalanced);
        assert_eq!(spec.max_qubits, DEFAULT_MAX_QUBITS);

        let spec = parse_config_str(r#"{"kind": "fig3"}"#).unwrap();
        assert_eq!(spec.p_grid, vec![0.3]);
        assert_eq!(spec.channel.family, ChannelFamily::Dephasing);
        assert_eq!(spec.cut_policy, CutPolicy::LeastBalanced);
        assert_eq!(spec.num_qubits, (2..=10).collect::<Vec<_>>());
    }

    #[test]
    fn out_of_range_p_names_key_and_line() {
        let src = "{\n  \"kind\": \"sample\",\n  \"p\": 1.5\n}";
        let err = parse_config_str(src).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("`p`") && msg.contains("line 3"), "{msg}");
        assert_eq!(err.exit_code(), 2);

        let src = r#"{"kind": "sample", "channel": {"family": "dephasing", "p": -0.2}}"#;
        assert!(parse_config_str(src)
            .unwrap_err()
            .to_string()
            .contains("`p`"));

        let src = r#"{"kind": "sample", "p_grid": [0.0, 0.5, 0.4]}"#;
        assert!(parse_config_str(src)
            .unwrap_err()
            .to_string()
            .contains("p_grid"));
    }

    #[test]
    fn unknown_and_malformed_keys_rejected() {
        let err = parse_config_str("{\n\"kind\": \"fig1\",\n\"bogus\": 1\n}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bogus") && msg.contains("line 3"), "{msg}");
        let err = parse_config_str("{\"kind\": \"fig9\"}").unwrap_err();
        assert!(err.to_string().contains("fig9"));
        let err = parse_config_str("{\"kind\": \"fig1\",").unwrap_err();
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn experiment_constraints() {
        assert!(
            parse_config_str(r#"{"kind": "fig1", "channel": {"family": "dephasing"}}"#).is_err()
        );
        assert!(parse_config_str(r#"{"kind": "fig2", "cut_policy": "most_balanced"}"#).is_err());
        assert!(parse_config_str(r#"{"kind": "evolve"}"#).is_err());
        assert!(parse_config_str(r#"{"kind": "evolve", "initial_state": "haar"}"#).is_err());
        assert!(parse_config_str(r#"{"kind": "sample", "num_qubits": 1}"#).is_err());
        assert!(parse_config_str(
            r#"{"kind": "evolve", "initial_state": {"ghz": {"alpha": [1.0, 0.0], "beta": [0.0, 0.0]}}}"#
        )
        .is_err());
        assert!(parse_config_str(
            r#"{"kind": "sample", "sample_schedule": {"explicit": {"3": 10}}, "num_qubits": [3, 4]}"#
        )
        .is_err());
        let spec = parse_config_str(
            r#"{"kind": "evolve", "num_qubits": 3, "initial_state": {"ghz": {"label_k": 2}}}"#,
        )
        .unwrap();
        assert_eq!(spec.num_qubits, vec![3]);
        assert_eq!(spec.cut_policy, CutPolicy::All);
    }

    #[test]
    fn schedules() {
        let d = SampleSchedule::Desk;
        assert_eq!(d.size_for(2).unwrap(), 2000);
        assert_eq!(d.size_for(7).unwrap(), 2000);
        assert_eq!(d.size_for(9).unwrap(), 500);
        assert_eq!(d.size_for(10).unwrap(), 100);
        let p = SampleSchedule::Full;
        assert_eq!(p.size_for(7).unwrap(), 10_000);
        assert_eq!(p.size_for(10).unwrap(), 5000);
        assert_eq!(p.size_for(11).unwrap(), 1560);
        assert_eq!(p.size_for(14).unwrap(), 1);
    }

    #[test]
    fn fig3_config_round_trips_through_echo() {
        let src = r#"{
            "kind": "fig3",
            "num_qubits": [2, 3, 4, 5],
            "p": 0.3,
            "seed": 99,
            "sample_schedule": "full",
            "histogram_bins": 20,
            "output_dir": "results/fig3"
        }"#;
        let spec = parse_config_str(src).unwrap();
        let mut echoed = parse_config_str(&spec.echo_json()).unwrap();
        assert_eq!(echoed.output_dir, PathBuf::from("out"));
        echoed.output_dir = spec.output_dir.clone();
        assert_eq!(spec, echoed);
        assert_eq!(echoed.echo_json(), spec.echo_json());
    }
}
