//! Experiment runners behind the CLI subcommands.

use std::path::PathBuf;

use serde_json::json;

use crate::bounds::{
    bound_dephasing, bound_depolarizing, bound_thermal_state_dependent, bound_thermal_uniform,
    BoundFamily, BoundQuery,
};
use crate::channels::{apply_local, BathOccupation, ChannelConfig, ChannelFamily};
use crate::entanglement::{
    enumerate_cuts, max_negativity, negativity, normalize_against, Bipartition, CutPolicy,
    Normalized,
};
use crate::qstate::{
    density_from_pure, make_generalized_ghz, DensityMatrix, GhzSpec, StateSnapshot,
    MAX_SUPPORTED_QUBITS,
};
use crate::sampling::{run_sample, InitialState, SampleConfig, SampleStats};
use crate::{Error, Result};

use super::config::{ExperimentKind, ExperimentSpec, InitialStateConfig};
use super::output::{metadata, write_tables, Cell, Table, TOOL_VERSION};

/// Tables plus JSON summaries produced by one experiment.
#[derive(Clone, Debug, Default)]
pub struct ExperimentOutput {
    pub tables: Vec<Table>,
    pub summaries: Vec<(String, serde_json::Value)>,
}

impl ExperimentOutput {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

/// Rough memory need of one dense N-qubit run: two density matrices plus
/// the eigensolver's working copy, 16 bytes per complex entry.
pub fn estimated_bytes(num_qubits: usize) -> u128 {
    3 * 16 * (1u128 << (2 * num_qubits))
}

/// Refuses register sizes above the configured cap.
pub fn check_resources(spec: &ExperimentSpec) -> Result<()> {
    for &n in &spec.num_qubits {
        if n > spec.max_qubits || n > MAX_SUPPORTED_QUBITS {
            let gib = estimated_bytes(n) as f64 / (1u64 << 30) as f64;
            return Err(Error::Resource(format!(
                "N = {n} exceeds the qubit cap of {} (dense matrices need about {gib:.2} GiB per worker: 2 x 16 x 4^N bytes plus eigensolver workspace); raise `max_qubits` (hard limit {MAX_SUPPORTED_QUBITS}) if the memory is available",
                spec.max_qubits.min(MAX_SUPPORTED_QUBITS)
            )));
        }
    }
    Ok(())
}

/// Runs `f` on a rayon pool with `threads` workers (default pool if None).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Resource(format!("cannot start {t} worker threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    check_resources(spec)?;
    with_threads(spec.threads, || match spec.kind {
        ExperimentKind::Bound => run_bound(spec).map(|tables| ExperimentOutput {
            tables,
            summaries: vec![],
        }),
        ExperimentKind::Evolve => run_evolve(spec).map(|tables| ExperimentOutput {
            tables,
            summaries: vec![],
        }),
        ExperimentKind::Sample => run_sample_experiment(spec),
        ExperimentKind::Fig1 | ExperimentKind::Fig2 => run_figure(spec),
        ExperimentKind::Fig3 => run_fig3(spec).map(|tables| ExperimentOutput {
            tables,
            summaries: vec![],
        }),
    })?
}

/// Writes every table as CSV and every summary as JSON into `dir`.
pub fn write_output(
    spec: &ExperimentSpec,
    out: &ExperimentOutput,
    dir: &std::path::Path,
) -> Result<Vec<PathBuf>> {
    let meta = metadata(spec.seed, &spec.echo_json());
    let mut paths = write_tables(dir, &out.tables, &meta)?;
    for (name, value) in &out.summaries {
        let path = dir.join(format!("{name}.json"));
        let text = serde_json::to_string_pretty(value).expect("summary serialization cannot fail");
        std::fs::write(&path, text + "\n")?;
        paths.push(path);
    }
    Ok(paths)
}

fn bath_of(channel: &ChannelConfig) -> Option<BathOccupation> {
    match channel.family {
        ChannelFamily::Thermal if channel.is_diffusive() => Some(BathOccupation::Diffusive),
        ChannelFamily::Thermal => Some(BathOccupation::Finite(channel.nbar.unwrap_or(0.0))),
        _ => None,
    }
}

fn bath_cell(bath: Option<BathOccupation>) -> Cell {
    match bath {
        None => Cell::Text(String::new()),
        Some(BathOccupation::Finite(n)) => Cell::Float(n),
        Some(BathOccupation::Diffusive) => Cell::Text("inf".into()),
    }
}

/// Multiplier of the bound matching the channel family: on E(ρ) for
/// depolarizing/dephasing, on E_max (state-independent form) for thermal.
fn family_multiplier(channel: &ChannelConfig, num_qubits: usize, p: f64) -> Result<f64> {
    match channel.family {
        ChannelFamily::Depolarizing => bound_depolarizing(num_qubits, p),
        ChannelFamily::Dephasing => bound_dephasing(num_qubits, p),
        ChannelFamily::Thermal => bound_thermal_uniform(
            num_qubits,
            bath_of(channel).expect("thermal channel has a bath"),
            p,
        ),
        ChannelFamily::Custom => Err(Error::domain("no bound for custom channels")),
    }
}

fn ghz_for(spec: &ExperimentSpec, n: usize) -> Result<Option<GhzSpec>> {
    match &spec.initial_state {
        InitialStateConfig::Ghz(g) => g.build(n).map(Some),
        _ => Ok(None),
    }
}

/// Closed-form multipliers for every family on the (N, p) grid.
pub fn run_bound(spec: &ExperimentSpec) -> Result<Vec<Table>> {
    let mut t = Table::new(
        "bound",
        &[
            "family",
            "num_qubits",
            "p",
            "nbar",
            "kappa",
            "scales",
            "multiplier",
        ],
    );
    let baths = match bath_of(&spec.channel) {
        Some(b) => vec![b],
        None => vec![
            BathOccupation::Finite(0.0),
            BathOccupation::Finite(1.0),
            BathOccupation::Diffusive,
        ],
    };
    for &n in &spec.num_qubits {
        let ghz = ghz_for(spec, n)?;
        for &p in &spec.p_grid {
            let mut queries = vec![BoundQuery::new(BoundFamily::DepolarizingGhzDiag, n, p)];
            if n == 2 {
                queries.push(BoundQuery::new(BoundFamily::DepolarizingTwoQubitAny, n, p));
            }
            queries.push(BoundQuery::new(BoundFamily::Dephasing, n, p));
            for &bath in &baths {
                if let Some(g) = &ghz {
                    queries.push(
                        BoundQuery::new(BoundFamily::ThermalStateDependent, n, p)
                            .with_bath(bath)
                            .with_state(g.alpha(), g.beta(), g.kappa()),
                    );
                }
                queries.push(BoundQuery::new(BoundFamily::ThermalUniform, n, p).with_bath(bath));
            }
            for q in queries {
                let m = q.evaluate()?;
                t.push(vec![
                    q.family.name().into(),
                    n.into(),
                    p.into(),
                    bath_cell(q.bath),
                    q.kappa
                        .map(|k| Cell::Int(k as i64))
                        .unwrap_or(Cell::Text(String::new())),
                    if q.family.scales_max_entanglement() {
                        "E_max"
                    } else {
                        "E"
                    }
                    .into(),
                    m.into(),
                ]);
            }
        }
    }
    Ok(vec![t])
}

fn load_initial(spec: &ExperimentSpec, n: usize) -> Result<(DensityMatrix, Option<GhzSpec>)> {
    match &spec.initial_state {
        InitialStateConfig::Ghz(g) => {
            let ghz = g.build(n)?;
            Ok((density_from_pure(&make_generalized_ghz(&ghz)), Some(ghz)))
        }
        InitialStateConfig::File(path) => {
            let bytes = std::fs::read(path).map_err(|e| {
                Error::Config(format!("cannot read initial state {}: {e}", path.display()))
            })?;
            let snap = if bytes.starts_with(b"GHZS") {
                StateSnapshot::from_bytes(&bytes)?
            } else {
                let text = String::from_utf8(bytes).map_err(|_| {
                    Error::Config(format!(
                        "{} is neither JSON nor a binary snapshot",
                        path.display()
                    ))
                })?;
                StateSnapshot::from_json(&text)?
            };
            Ok((snap.to_density()?, None))
        }
        InitialStateConfig::Haar => Err(Error::Config(
            "evolve needs a GHZ spec or a state file".into(),
        )),
    }
}

/// Negativity trajectory of one explicit initial state per register size.
/// A file state fixes its own register size, so `num_qubits` is ignored.
pub fn run_evolve(spec: &ExperimentSpec) -> Result<Vec<Table>> {
    let sizes: Vec<usize> = match spec.initial_state {
        InitialStateConfig::File(_) => vec![0],
        _ => spec.num_qubits.clone(),
    };
    let mut tables = Vec::new();
    for n in sizes {
        let (rho0, ghz) = load_initial(spec, n)?;
        let n = rho0.num_qubits();
        if n > spec.max_qubits {
            return Err(Error::Resource(format!(
                "state file has {n} qubits, above the cap of {}",
                spec.max_qubits
            )));
        }
        let cuts = enumerate_cuts(n, spec.cut_policy)?;
        let initial: Vec<f64> = cuts
            .iter()
            .map(|c| negativity(&rho0, c).map(|r| r.value))
            .collect::<Result<_>>()?;
        let mut t = Table::new(
            format!("evolve_N{n}"),
            &[
                "p",
                "cut_mask",
                "negativity",
                "normalized_negativity",
                "eigenvalue_floor",
                "bound_multiplier",
                "bound_value",
            ],
        );
        for &p in &spec.p_grid {
            let rho = apply_local(&rho0, &spec.channel.build_at(p)?)?;
            for (cut, &n0) in cuts.iter().zip(&initial) {
                let res = negativity(&rho, cut)?;
                let normalized = if n0 > spec.normalized_floor {
                    res.value / n0
                } else {
                    f64::NAN
                };
                let (mult, value) = match (spec.channel.family, &ghz) {
                    (ChannelFamily::Thermal, Some(g)) => {
                        let m = bound_thermal_state_dependent(
                            g.alpha(),
                            g.beta(),
                            g.kappa(),
                            n,
                            bath_of(&spec.channel).expect("thermal"),
                            p,
                        )?;
                        (m, m * max_negativity(cut))
                    }
                    (ChannelFamily::Thermal, None) => {
                        let m = family_multiplier(&spec.channel, n, p)?;
                        (m, m * max_negativity(cut))
                    }
                    _ => {
                        let m = family_multiplier(&spec.channel, n, p)?;
                        (m, m * n0)
                    }
                };
                t.push(vec![
                    p.into(),
                    cut.side_a_mask().into(),
                    res.value.into(),
                    normalized.into(),
                    res.eigenvalue_floor.into(),
                    mult.into(),
                    value.into(),
                ]);
            }
        }
        tables.push(t);
    }
    Ok(tables)
}

fn sample_config(spec: &ExperimentSpec, n: usize, policy: CutPolicy) -> Result<SampleConfig> {
    let mut cfg = SampleConfig::new(
        n,
        spec.sample_size_for(n)?,
        spec.channel.clone(),
        spec.p_grid.clone(),
    );
    cfg.cut_policy = policy;
    cfg.seed = spec.seed;
    cfg.normalized_floor = spec.normalized_floor;
    cfg.histogram_bins = spec.histogram_bins;
    cfg.initial = match ghz_for(spec, n)? {
        Some(g) => InitialState::Ghz(g),
        None => InitialState::Haar,
    };
    Ok(cfg)
}

fn histogram_table(name: String, stats: &SampleStats) -> Table {
    let mut t = Table::new(name, &["p", "cut_mask", "bin_lo", "bin_hi", "count"]);
    for pt in &stats.points {
        let h = &pt.histogram;
        for (i, &count) in h.counts.iter().enumerate() {
            t.push(vec![
                pt.p.into(),
                pt.cut_mask.into(),
                h.edges[i].into(),
                h.edges[i + 1].into(),
                count.into(),
            ]);
        }
    }
    t
}

fn summary(spec: &ExperimentSpec, stats: &SampleStats) -> serde_json::Value {
    json!({
        "version": TOOL_VERSION,
        "seed": spec.seed,
        "config": spec.to_config(),
        "stats": stats,
    })
}

/// Monte-Carlo statistics for every N with the configured cut policy.
pub fn run_sample_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let mut out = ExperimentOutput::default();
    for &n in &spec.num_qubits {
        let cfg = sample_config(spec, n, spec.cut_policy)?;
        let stats = run_sample(&cfg)?;
        let excluded: std::collections::BTreeMap<u64, u64> = stats
            .cuts
            .iter()
            .map(|c| (c.cut_mask, c.excluded_count))
            .collect();
        let mut t = Table::new(
            format!("sample_N{n}"),
            &[
                "p",
                "cut_mask",
                "count",
                "excluded",
                "mean",
                "std_dev",
                "std_error",
                "min",
                "max",
                "bound_multiplier",
            ],
        );
        for pt in &stats.points {
            t.push(vec![
                pt.p.into(),
                pt.cut_mask.into(),
                pt.count.into(),
                excluded[&pt.cut_mask].into(),
                pt.mean.into(),
                pt.std_dev.into(),
                pt.std_error().into(),
                pt.min.into(),
                pt.max.into(),
                family_multiplier(&spec.channel, n, pt.p)?.into(),
            ]);
        }
        out.tables.push(t);
        out.tables
            .push(histogram_table(format!("sample_N{n}_hist"), &stats));
        out.summaries
            .push((format!("sample_N{n}"), summary(spec, &stats)));
    }
    Ok(out)
}

/// Normalized negativity of the balanced GHZ state along the p grid.
fn ghz_curve(spec: &ExperimentSpec, n: usize, cut: &Bipartition) -> Result<Vec<f64>> {
    let rho0 = density_from_pure(&make_generalized_ghz(&GhzSpec::balanced(n)?));
    let n0 = negativity(&rho0, cut)?.value;
    spec.p_grid
        .iter()
        .map(|&p| {
            let rho = apply_local(&rho0, &spec.channel.build_at(p)?)?;
            match normalize_against(&rho, n0, cut, spec.normalized_floor)? {
                Normalized::Value(r) => Ok(r.normalized.unwrap_or(f64::NAN)),
                Normalized::Undefined { .. } => Ok(f64::NAN),
            }
        })
        .collect()
}

/// Depolarizing decay across the most (fig1) or least (fig2) balanced cut:
/// bound, balanced-GHZ curve and Haar-sample statistics per N.
pub fn run_figure(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let mut out = ExperimentOutput::default();
    let tag = spec.kind.name();
    for &n in &spec.num_qubits {
        let cfg = sample_config(spec, n, spec.cut_policy)?;
        let cut = enumerate_cuts(n, spec.cut_policy)?[0];
        let ghz = ghz_curve(spec, n, &cut)?;
        let stats = run_sample(&SampleConfig {
            initial: InitialState::Haar,
            ..cfg
        })?;
        let excluded = stats.cuts[0].excluded_count;
        let mut t = Table::new(
            format!("{tag}_N{n}"),
            &[
                "p",
                "bound",
                "ghz_normalized",
                "sample_mean",
                "sample_std_error",
                "sample_std_dev",
                "sample_min",
                "sample_max",
                "sample_count",
                "excluded",
            ],
        );
        for (pt, g) in stats.points.iter().zip(&ghz) {
            t.push(vec![
                pt.p.into(),
                bound_depolarizing(n, pt.p)?.into(),
                (*g).into(),
                pt.mean.into(),
                pt.std_error().into(),
                pt.std_dev.into(),
                pt.min.into(),
                pt.max.into(),
                pt.count.into(),
                excluded.into(),
            ]);
        }
        out.tables.push(t);
        out.tables
            .push(histogram_table(format!("{tag}_N{n}_hist"), &stats));
    }
    Ok(out)
}

pub fn run_fig1(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    if spec.kind != ExperimentKind::Fig1 {
        return Err(Error::Config("run_fig1 needs a fig1 spec".into()));
    }
    run_figure(spec)
}

pub fn run_fig2(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    if spec.kind != ExperimentKind::Fig2 {
        return Err(Error::Config("run_fig2 needs a fig2 spec".into()));
    }
    run_figure(spec)
}

/// Mean normalized negativity versus N under dephasing at fixed p across
/// the least-balanced cut, with the (1 − p)^N bound.
pub fn run_fig3(spec: &ExperimentSpec) -> Result<Vec<Table>> {
    let mut t = Table::new(
        "fig3",
        &[
            "num_qubits",
            "p",
            "sample_size",
            "count",
            "mean",
            "std_error",
            "std_dev",
            "min",
            "max",
            "bound",
        ],
    );
    let mut hist = Table::new(
        "fig3_hist",
        &["num_qubits", "p", "bin_lo", "bin_hi", "count"],
    );
    for &n in &spec.num_qubits {
        let cfg = sample_config(spec, n, CutPolicy::LeastBalanced)?;
        let stats = run_sample(&SampleConfig {
            initial: InitialState::Haar,
            ..cfg
        })?;
        for pt in &stats.points {
            t.push(vec![
                n.into(),
                pt.p.into(),
                stats.sample_size.into(),
                pt.count.into(),
                pt.mean.into(),
                pt.std_error().into(),
                pt.std_dev.into(),
                pt.min.into(),
                pt.max.into(),
                bound_dephasing(n, pt.p)?.into(),
            ]);
            for (i, &count) in pt.histogram.counts.iter().enumerate() {
                hist.push(vec![
                    n.into(),
                    pt.p.into(),
                    pt.histogram.edges[i].into(),
                    pt.histogram.edges[i + 1].into(),
                    count.into(),
                ]);
            }
        }
    }
    Ok(vec![t, hist])
}
