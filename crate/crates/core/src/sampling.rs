//! Seeded Haar-random states and Monte-Carlo statistics of normalized
//! negativity.
//!
//! Every sample owns an independent ChaCha stream selected by
//! `(seed, sample_index)`, and per-sample results are reduced in index
//! order, so the statistics do not depend on how many worker threads ran.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::apply_local;
use crate::channels::ChannelConfig;
use crate::entanglement::{
    enumerate_cuts, negativity, Bipartition, CutPolicy, DEFAULT_NORMALIZED_FLOOR,
};
use crate::linalg::CMatrix;
use crate::qstate::{density_from_pure, make_generalized_ghz, DensityMatrix, GhzSpec, PureState};
use crate::{Error, Result};

pub const DEFAULT_HISTOGRAM_BINS: usize = 50;
/// Histogram range is this factor times the largest observed value.
pub const HISTOGRAM_HEADROOM: f64 = 1.05;
/// Fraction of failed samples above which a run aborts.
pub const MAX_FAILURE_FRACTION: f64 = 0.01;

/// Independent random stream for one sample.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Haar-uniform pure state: i.i.d. complex Gaussian amplitudes, normalized.
pub fn haar_random_pure<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> Result<PureState> {
    if num_qubits == 0 {
        return Err(Error::domain("number of qubits must be at least 1"));
    }
    let amps: Vec<Complex64> = (0..1usize << num_qubits)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        })
        .collect();
    PureState::normalized(num_qubits, amps)
}

/// Random mixed state G G† / tr(G G†) from a 2^N × `rank` complex Ginibre
/// matrix. Used to exercise bounds on mixed inputs.
pub fn random_mixed<R: Rng + ?Sized>(
    num_qubits: usize,
    rank: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    let dim = 1usize << num_qubits;
    if rank == 0 || rank > dim {
        return Err(Error::domain(format!("rank {rank} outside 1..={dim}")));
    }
    let g: Vec<Complex64> = (0..dim * rank)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let mut m = CMatrix::zeros(dim);
    for r in 0..dim {
        for c in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..rank {
                acc += g[r * rank + k] * g[c * rank + k].conj();
            }
            m.set(r, c, acc);
        }
    }
    let tr = m.trace().re;
    DensityMatrix::from_trusted(num_qubits, m.scale(Complex64::new(1.0 / tr, 0.0)))
}

/// Equal-width histogram over `[0, range_max]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Bins `values` into `num_bins` equal bins on `[0, range_max]`. A value on
/// an interior edge goes to the higher bin; `range_max` itself goes to the
/// last bin. Values beyond the range are clamped into the end bins so the
/// counts always partition the input.
pub fn histogram(values: &[f64], num_bins: usize, range_max: f64) -> Result<Histogram> {
    if num_bins == 0 {
        return Err(Error::domain("histogram needs at least one bin"));
    }
    if !(range_max > 0.0) || !range_max.is_finite() {
        return Err(Error::domain(format!(
            "histogram range {range_max} must be positive"
        )));
    }
    let bins = num_bins as f64;
    let edges = (0..=num_bins)
        .map(|i| range_max * i as f64 / bins)
        .collect::<Vec<_>>();
    let mut counts = vec![0u64; num_bins];
    for &v in values {
        let mut bin = if v <= 0.0 {
            0
        } else {
            (v * bins / range_max).floor() as usize
        };
        // Correct for rounding against the stored edges.
        if bin < num_bins && v < edges[bin] {
            bin -= 1;
        } else if bin + 1 < num_bins && v >= edges[bin + 1] {
            bin += 1;
        }
        counts[bin.min(num_bins - 1)] += 1;
    }
    Ok(Histogram { edges, counts })
}

/// Initial-state ensemble of a sampling run.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialState {
    Haar,
    /// The same generalized GHZ state for every sample (no sampling noise).
    Ghz(GhzSpec),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleConfig {
    pub num_qubits: usize,
    pub sample_size: usize,
    pub channel: ChannelConfig,
    pub p_grid: Vec<f64>,
    pub cut_policy: CutPolicy,
    pub seed: u64,
    pub normalized_floor: f64,
    pub histogram_bins: usize,
    pub initial: InitialState,
}

impl SampleConfig {
    pub fn new(
        num_qubits: usize,
        sample_size: usize,
        channel: ChannelConfig,
        p_grid: Vec<f64>,
    ) -> Self {
        SampleConfig {
            num_qubits,
            sample_size,
            channel,
            p_grid,
            cut_policy: CutPolicy::MostBalanced,
            seed: 0,
            normalized_floor: DEFAULT_NORMALIZED_FLOOR,
            histogram_bins: DEFAULT_HISTOGRAM_BINS,
            initial: InitialState::Haar,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_qubits < 2 {
            return Err(Error::domain("sampling needs at least 2 qubits"));
        }
        if self.sample_size == 0 {
            return Err(Error::domain("sample_size must be at least 1"));
        }
        if self.p_grid.is_empty() {
            return Err(Error::domain("p grid is empty"));
        }
        for (i, &p) in self.p_grid.iter().enumerate() {
            if p.is_nan() || !(0.0..=1.0).contains(&p) {
                return Err(Error::domain(format!("p grid value {p} outside [0, 1]")));
            }
            if i > 0 && p <= self.p_grid[i - 1] {
                return Err(Error::domain("p grid must be strictly increasing"));
            }
        }
        if !(self.normalized_floor >= 0.0) {
            return Err(Error::domain("normalized_floor must be nonnegative"));
        }
        if self.histogram_bins == 0 {
            return Err(Error::domain("histogram_bins must be at least 1"));
        }
        if let InitialState::Ghz(spec) = &self.initial {
            if spec.num_qubits() != self.num_qubits {
                return Err(Error::domain(
                    "GHZ initial state has the wrong number of qubits",
                ));
            }
        }
        self.channel.validate()
    }
}

/// Statistics of the normalized negativity at one (p, cut).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointStats {
    pub p: f64,
    pub cut_mask: u64,
    pub count: u64,
    pub mean: f64,
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
    pub histogram: Histogram,
}

impl PointStats {
    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.std_dev / (self.count as f64).sqrt()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutSummary {
    pub cut_mask: u64,
    /// Samples whose initial negativity was below the floor.
    pub excluded_count: u64,
    pub mean_initial_negativity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub num_qubits: usize,
    pub sample_size: usize,
    pub seed: u64,
    pub cuts: Vec<CutSummary>,
    /// Ordered by p, then by cut.
    pub points: Vec<PointStats>,
    /// Samples dropped because a numerical routine failed.
    pub failed_count: u64,
}

impl SampleStats {
    pub fn point(&self, p: f64, cut_mask: u64) -> Option<&PointStats> {
        self.points
            .iter()
            .find(|s| s.p == p && s.cut_mask == cut_mask)
    }
}

/// Per-sample result: for every cut, the initial negativity and the
/// normalized values along the p grid (None if excluded).
struct SampleOutcome {
    initial: Vec<f64>,
    normalized: Vec<Option<Vec<f64>>>,
}

fn initial_state(config: &SampleConfig, index: u64) -> Result<DensityMatrix> {
    match &config.initial {
        InitialState::Haar => {
            let mut rng = substream(config.seed, index);
            Ok(density_from_pure(&haar_random_pure(
                config.num_qubits,
                &mut rng,
            )?))
        }
        InitialState::Ghz(spec) => Ok(density_from_pure(&make_generalized_ghz(spec))),
    }
}

fn run_one(config: &SampleConfig, cuts: &[Bipartition], index: u64) -> Result<SampleOutcome> {
    let rho0 = initial_state(config, index)?;
    let initial = cuts
        .iter()
        .map(|cut| negativity(&rho0, cut).map(|r| r.value))
        .collect::<Result<Vec<_>>>()?;
    let included: Vec<bool> = initial
        .iter()
        .map(|&v| v > config.normalized_floor)
        .collect();
    let mut normalized: Vec<Option<Vec<f64>>> = included
        .iter()
        .map(|&ok| ok.then(|| Vec::with_capacity(config.p_grid.len())))
        .collect();
    if included.iter().any(|&b| b) {
        for &p in &config.p_grid {
            // Every channel family is the identity at p = 0.
            if p == 0.0 {
                for series in normalized.iter_mut().flatten() {
                    series.push(1.0);
                }
                continue;
            }
            let rho = apply_local(&rho0, &config.channel.build_at(p)?)?;
            for ((cut, series), &n0) in cuts.iter().zip(normalized.iter_mut()).zip(&initial) {
                if let Some(series) = series {
                    series.push(negativity(&rho, cut)?.value / n0);
                }
            }
        }
    }
    Ok(SampleOutcome {
        initial,
        normalized,
    })
}

/// Runs the Monte-Carlo experiment on the current rayon pool.
pub fn run_sample(config: &SampleConfig) -> Result<SampleStats> {
    config.validate()?;
    let cuts = enumerate_cuts(config.num_qubits, config.cut_policy)?;
    let outcomes: Vec<Result<SampleOutcome>> = (0..config.sample_size as u64)
        .into_par_iter()
        .map(|i| run_one(config, &cuts, i))
        .collect();

    let mut failed = 0u64;
    let mut ok = Vec::with_capacity(outcomes.len());
    let mut first_failure = None;
    for o in outcomes {
        match o {
            Ok(o) => ok.push(o),
            Err(Error::Numeric(msg)) => {
                failed += 1;
                first_failure.get_or_insert(msg);
            }
            Err(e) => return Err(e),
        }
    }
    if failed as f64 > MAX_FAILURE_FRACTION * config.sample_size as f64 {
        return Err(Error::Numeric(format!(
            "{failed} of {} samples failed numerically (first: {})",
            config.sample_size,
            first_failure.unwrap_or_default()
        )));
    }

    let mut cut_summaries = Vec::with_capacity(cuts.len());
    for (ci, cut) in cuts.iter().enumerate() {
        let excluded = ok.iter().filter(|o| o.normalized[ci].is_none()).count() as u64;
        let n = ok.len().max(1) as f64;
        let mean_initial = ok.iter().map(|o| o.initial[ci]).sum::<f64>() / n;
        cut_summaries.push(CutSummary {
            cut_mask: cut.side_a_mask(),
            excluded_count: excluded,
            mean_initial_negativity: mean_initial,
        });
    }

    let mut points = Vec::with_capacity(config.p_grid.len() * cuts.len());
    for (pi, &p) in config.p_grid.iter().enumerate() {
        for (ci, cut) in cuts.iter().enumerate() {
            let values: Vec<f64> = ok
                .iter()
                .filter_map(|o| o.normalized[ci].as_ref().map(|s| s[pi]))
                .collect();
            points.push(point_stats(
                p,
                cut.side_a_mask(),
                &values,
                config.histogram_bins,
            )?);
        }
    }

    Ok(SampleStats {
        num_qubits: config.num_qubits,
        sample_size: config.sample_size,
        seed: config.seed,
        cuts: cut_summaries,
        points,
        failed_count: failed,
    })
}

fn point_stats(p: f64, cut_mask: u64, values: &[f64], bins: usize) -> Result<PointStats> {
    let count = values.len() as u64;
    if values.is_empty() {
        return Ok(PointStats {
            p,
            cut_mask,
            count,
            mean: f64::NAN,
            std_dev: f64::NAN,
            min: f64::NAN,
            max: f64::NAN,
            histogram: histogram(&[], bins, 1.0)?,
        });
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = if max > 0.0 {
        HISTOGRAM_HEADROOM * max
    } else {
        1.0
    };
    Ok(PointStats {
        p,
        cut_mask,
        count,
        mean: mean.clamp(min, max),
        std_dev: var.sqrt(),
        min,
        max,
        histogram: histogram(values, bins, range)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::ChannelFamily;

    #[test]
    fn haar_norm_and_determinism() {
        for n in 1..=5 {
            let a = haar_random_pure(n, &mut substream(7, 3)).unwrap();
            let b = haar_random_pure(n, &mut substream(7, 3)).unwrap();
            assert_eq!(a, b);
            let norm: f64 = a.amplitudes().iter().map(|z| z.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
        let a = haar_random_pure(3, &mut substream(7, 3)).unwrap();
        let b = haar_random_pure(3, &mut substream(7, 4)).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn histogram_conventions() {
        let h = histogram(&[0.42], 10, 1.0).unwrap();
        assert_eq!(h.total(), 1);
        assert_eq!(h.counts[4], 1);

        let h = histogram(&[0.05, 0.15, 0.25], 10, 1.0).unwrap();
        assert_eq!(&h.counts[..3], &[1, 1, 1]);
        assert_eq!(h.total(), 3);

        let h = histogram(&[0.5, 1.0, 0.0], 4, 1.0).unwrap();
        assert_eq!(h.counts, vec![1, 0, 1, 1]);

        // Interior edges go up, including ones that are inexact in binary.
        let h = histogram(&[0.3, 0.7], 10, 1.0).unwrap();
        assert_eq!(h.counts[3], 1);
        assert_eq!(h.counts[7], 1);

        let h = histogram(&[], 5, 1.0).unwrap();
        assert_eq!(h.counts, vec![0; 5]);
        assert!(histogram(&[0.1], 0, 1.0).is_err());
    }

    #[test]
    fn random_mixed_is_density_matrix() {
        let rho = random_mixed(2, 3, &mut substream(1, 0)).unwrap();
        rho.validate().unwrap();
        assert!(rho.purity() < 1.0);
    }

    #[test]
    fn zero_grid_is_identity() {
        let mut cfg = SampleConfig::new(
            3,
            20,
            ChannelConfig::new(ChannelFamily::Depolarizing),
            vec![0.0],
        );
        cfg.seed = 11;
        let stats = run_sample(&cfg).unwrap();
        let pt = &stats.points[0];
        assert_eq!(pt.mean, 1.0);
        assert_eq!(pt.std_dev, 0.0);
        assert_eq!(pt.min, 1.0);
        assert_eq!(pt.count, 20);
        assert_eq!(pt.histogram.total(), 20);
    }

    #[test]
    fn config_validation() {
        let ch = ChannelConfig::new(ChannelFamily::Dephasing);
        assert!(SampleConfig::new(3, 0, ch.clone(), vec![0.1])
            .validate()
            .is_err());
        assert!(SampleConfig::new(3, 5, ch.clone(), vec![0.2, 0.1])
            .validate()
            .is_err());
        assert!(SampleConfig::new(3, 5, ch.clone(), vec![0.2, 1.2])
            .validate()
            .is_err());
        assert!(SampleConfig::new(1, 5, ch.clone(), vec![0.2])
            .validate()
            .is_err());
        assert!(SampleConfig::new(3, 5, ch, vec![0.0, 0.5])
            .validate()
            .is_ok());
    }

    #[test]
    fn ghz_override_dephasing_closed_form() {
        let n = 4;
        let mut cfg = SampleConfig::new(
            n,
            3,
            ChannelConfig::new(ChannelFamily::Dephasing),
            vec![0.0, 0.2, 0.5, 0.9],
        );
        cfg.initial = InitialState::Ghz(GhzSpec::balanced(n).unwrap());
        cfg.cut_policy = CutPolicy::All;
        let stats = run_sample(&cfg).unwrap();
        for pt in &stats.points {
            let want = (1.0 - pt.p).powi(n as i32);
            assert!(
                (pt.mean - want).abs() < 1e-9,
                "p={} mean={} want={want}",
                pt.p,
                pt.mean
            );
            assert!(pt.std_dev < 1e-12);
        }
    }
}
