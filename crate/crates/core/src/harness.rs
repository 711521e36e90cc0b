//! Monte Carlo experiments: uniform counterexample search, perturbed
//! boundary-state scatter, the pure-state check with arbitrary bases, and the
//! asymmetric Werner sweep.
//!
//! Every sample draws from its own ChaCha stream keyed by
//! `(master_seed, mode, dim index, sample index)`, and records reach the sink
//! in index order, so the output is a pure function of the configuration and
//! does not depend on the worker count.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::{evaluate, residual_uncertainty, BasisQuadruple, VIOLATION_THRESHOLD};
use crate::error::{Error, Result};
use crate::linalg::Subsystem;
use crate::measurement::{conjugate_basis, PauliAxis, ProjectiveBasis};
use crate::states::{
    asymmetric_werner, boundary_mixture, haar_unitary, perturb, random_density_matrix,
    random_pure_state, BoundaryFamily, BoundaryMixtureSpec, DensityMatrix, WernerParams,
};

/// Pure-state runs use the tighter threshold; the inequality is a theorem there.
pub const PURE_VIOLATION_THRESHOLD: f64 = -1e-9;

const CHUNK: u64 = 4096;
const MAX_SAMPLE_INDEX: u64 = 1 << 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SearchMode {
    Uniform,
    BoundaryPerturb,
    PureStates,
}

impl SearchMode {
    fn stream_tag(self) -> u64 {
        match self {
            SearchMode::Uniform => 1,
            SearchMode::BoundaryPerturb => 2,
            SearchMode::PureStates => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SearchMode::Uniform => "uniform",
            SearchMode::BoundaryPerturb => "boundary-perturb",
            SearchMode::PureStates => "pure-states",
        }
    }

    /// Gap below which a sample counts as a counterexample.
    pub fn violation_threshold(self) -> f64 {
        match self {
            SearchMode::PureStates => PURE_VIOLATION_THRESHOLD,
            _ => VIOLATION_THRESHOLD,
        }
    }

    /// Dimensions sampled when none are given.
    pub fn default_dims(self) -> Vec<(usize, usize)> {
        match self {
            SearchMode::Uniform => vec![(2, 2), (2, 3), (3, 3), (2, 4), (3, 4), (4, 4)],
            SearchMode::BoundaryPerturb => vec![(2, 2), (3, 3), (4, 4)],
            SearchMode::PureStates => vec![(2, 2), (4, 4)],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub mode: SearchMode,
    pub dims: Vec<(usize, usize)>,
    /// `None` selects [`SearchConfig::default_samples`] per dimension.
    pub samples_per_dim: Option<u64>,
    pub master_seed: u64,
    /// Perturbation strengths are drawn log-uniformly from this range.
    pub epsilon_range: (f64, f64),
    pub lambda_grid: usize,
    /// Worker threads; `0` lets rayon choose.
    pub workers: usize,
}

impl SearchConfig {
    pub fn new(mode: SearchMode) -> Self {
        Self {
            mode,
            dims: mode.default_dims(),
            samples_per_dim: None,
            master_seed: 0,
            epsilon_range: (1e-3, 1.0),
            lambda_grid: 101,
            workers: 0,
        }
    }

    /// 10⁵ samples while both local dimensions are at most 3, 10⁴ otherwise.
    pub fn default_samples(dim_a: usize, dim_b: usize) -> u64 {
        if dim_a.max(dim_b) <= 3 {
            100_000
        } else {
            10_000
        }
    }

    pub fn samples_for(&self, dim_a: usize, dim_b: usize) -> u64 {
        self.samples_per_dim
            .unwrap_or_else(|| Self::default_samples(dim_a, dim_b))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ConfigInvalid(msg));
        if self.dims.is_empty() {
            return bad("no dimensions given".into());
        }
        if self.dims.len() >= 1 << 16 {
            return bad("too many dimension pairs".into());
        }
        for &(m, n) in &self.dims {
            if m < 2 || n < 2 {
                return bad(format!("dimensions {m}x{n} must both be ≥ 2"));
            }
            if self.mode == SearchMode::BoundaryPerturb && m != n {
                return Err(Error::NonSquareDim(m, n));
            }
            let s = self.samples_for(m, n);
            if s == 0 || s > MAX_SAMPLE_INDEX {
                return bad(format!("sample count {s} out of range"));
            }
        }
        let (lo, hi) = self.epsilon_range;
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return bad(format!(
                "epsilon range ({lo}, {hi}) must satisfy 0 < low < high"
            ));
        }
        if self.lambda_grid < 2 {
            return bad("lambda grid needs at least 2 points".into());
        }
        Ok(())
    }
}

/// The random stream for one sample.
pub fn sample_rng(
    master_seed: u64,
    mode: SearchMode,
    dim_index: usize,
    sample_index: u64,
) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream((mode.stream_tag() << 56) | ((dim_index as u64) << 40) | sample_index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFamily {
    Uniform,
    Pure,
    Boundary(BoundaryFamily),
}

impl SampleFamily {
    pub fn tag(self) -> &'static str {
        match self {
            SampleFamily::Uniform => "uniform",
            SampleFamily::Pure => "pure",
            SampleFamily::Boundary(f) => f.tag(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub dim_a: usize,
    pub dim_b: usize,
    pub index: u64,
    pub family: SampleFamily,
    pub epsilon: Option<f64>,
    pub lambda: Option<f64>,
    pub mi_sum: f64,
    pub qmi: f64,
    pub gap: f64,
    /// Residual uncertainties with respect to a mutually unbiased pair on each
    /// side (for pure-state runs: each random `Q` with its Fourier conjugate).
    pub residual_a: f64,
    pub residual_b: f64,
    pub witness_fired: bool,
    /// When the witness fired: whether the flagged side really has negative
    /// conditional entropy. Always `true` otherwise.
    pub witness_confirmed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlagKind {
    Counterexample,
    NoiseNegative,
}

impl FlagKind {
    pub fn tag(self) -> &'static str {
        match self {
            FlagKind::Counterexample => "counterexample",
            FlagKind::NoiseNegative => "noise-negative",
        }
    }
}

/// State and bases of a sample whose gap came out negative.
#[derive(Debug, Clone)]
pub struct FlaggedSample {
    pub kind: FlagKind,
    pub state: DensityMatrix,
    pub bases: BasisQuadruple,
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub record: SampleRecord,
    pub flagged: Option<Box<FlaggedSample>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimSummary {
    pub dim_a: usize,
    pub dim_b: usize,
    pub samples: u64,
    pub min_gap: f64,
    pub max_qmi: f64,
    pub counterexamples: u64,
    pub noise_negatives: u64,
    pub mean_residual_a: f64,
    pub min_residual_a: f64,
    pub min_residual_b: f64,
    pub witness_positive: u64,
    pub witness_unconfirmed: u64,
}

impl DimSummary {
    fn empty(dim_a: usize, dim_b: usize) -> Self {
        Self {
            dim_a,
            dim_b,
            samples: 0,
            min_gap: f64::INFINITY,
            max_qmi: f64::NEG_INFINITY,
            counterexamples: 0,
            noise_negatives: 0,
            mean_residual_a: 0.0,
            min_residual_a: f64::INFINITY,
            min_residual_b: f64::INFINITY,
            witness_positive: 0,
            witness_unconfirmed: 0,
        }
    }
}

/// Streaming per-dimension aggregate. Residual sums are accumulated in index
/// order so the mean is reproducible.
struct Accumulator {
    summary: DimSummary,
    residual_sum: f64,
    threshold: f64,
}

impl Accumulator {
    fn new(dim_a: usize, dim_b: usize, threshold: f64) -> Self {
        Self {
            summary: DimSummary::empty(dim_a, dim_b),
            residual_sum: 0.0,
            threshold,
        }
    }

    fn push(&mut self, r: &SampleRecord) {
        let s = &mut self.summary;
        s.samples += 1;
        s.min_gap = s.min_gap.min(r.gap);
        s.max_qmi = s.max_qmi.max(r.qmi);
        if r.gap < self.threshold {
            s.counterexamples += 1;
        } else if r.gap < 0.0 {
            s.noise_negatives += 1;
        }
        s.min_residual_a = s.min_residual_a.min(r.residual_a);
        s.min_residual_b = s.min_residual_b.min(r.residual_b);
        if r.witness_fired {
            s.witness_positive += 1;
            if !r.witness_confirmed {
                s.witness_unconfirmed += 1;
            }
        }
        self.residual_sum += r.residual_a;
    }

    fn finish(mut self) -> DimSummary {
        if self.summary.samples > 0 {
            self.summary.mean_residual_a = self.residual_sum / self.summary.samples as f64;
        }
        self.summary
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchSummary {
    pub mode: SearchMode,
    pub master_seed: u64,
    pub per_dim: Vec<DimSummary>,
    pub wall_clock_secs: f64,
}

impl SearchSummary {
    pub fn counterexamples(&self) -> u64 {
        self.per_dim.iter().map(|d| d.counterexamples).sum()
    }

    pub fn samples(&self) -> u64 {
        self.per_dim.iter().map(|d| d.samples).sum()
    }

    pub fn min_gap(&self) -> f64 {
        self.per_dim
            .iter()
            .map(|d| d.min_gap)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Immutable per-dimension context shared by the workers.
struct DimContext<'a> {
    cfg: &'a SearchConfig,
    dim_index: usize,
    dim_a: usize,
    dim_b: usize,
    fixed_bases: BasisQuadruple,
}

fn flag_for(gap: f64, threshold: f64) -> Option<FlagKind> {
    if gap < threshold {
        Some(FlagKind::Counterexample)
    } else if gap < 0.0 {
        Some(FlagKind::NoiseNegative)
    } else {
        None
    }
}

#[allow(clippy::too_many_arguments)]
fn finish_sample(
    ctx: &DimContext<'_>,
    index: u64,
    family: SampleFamily,
    epsilon: Option<f64>,
    lambda: Option<f64>,
    rho: DensityMatrix,
    bases: BasisQuadruple,
    residuals: Option<(f64, f64)>,
) -> Result<Sample> {
    let report = evaluate(&rho, &bases)?;
    let (residual_a, residual_b) = residuals.unwrap_or((report.residual_a, report.residual_b));
    let w = report.entanglement_witness;
    let witness_confirmed = !w.fired || report.conditional_entropy(w.side) < 1e-9;
    let record = SampleRecord {
        dim_a: ctx.dim_a,
        dim_b: ctx.dim_b,
        index,
        family,
        epsilon,
        lambda,
        mi_sum: report.mi_sum,
        qmi: report.qmi,
        gap: report.gap,
        residual_a,
        residual_b,
        witness_fired: w.fired,
        witness_confirmed,
    };
    let flagged = flag_for(report.gap, ctx.cfg.mode.violation_threshold()).map(|kind| {
        Box::new(FlaggedSample {
            kind,
            state: rho,
            bases,
        })
    });
    Ok(Sample { record, flagged })
}

fn uniform_sample(ctx: &DimContext<'_>, index: u64) -> Result<Sample> {
    let mut rng = sample_rng(ctx.cfg.master_seed, ctx.cfg.mode, ctx.dim_index, index);
    let rho = random_density_matrix(ctx.dim_a, ctx.dim_b, &mut rng);
    finish_sample(
        ctx,
        index,
        SampleFamily::Uniform,
        None,
        None,
        rho,
        ctx.fixed_bases.clone(),
        None,
    )
}

fn boundary_sample(ctx: &DimContext<'_>, index: u64) -> Result<Sample> {
    let cfg = ctx.cfg;
    let family = BoundaryFamily::ALL[(index % 2) as usize];
    let grid = cfg.lambda_grid as u64;
    let lambda = ((index / 2) % grid) as f64 / (grid - 1) as f64;
    let mut rng = sample_rng(cfg.master_seed, cfg.mode, ctx.dim_index, index);
    let (lo, hi) = cfg.epsilon_range;
    let u: f64 = rng.random();
    let epsilon = (lo.ln() + u * (hi.ln() - lo.ln())).exp();
    let base = boundary_mixture(BoundaryMixtureSpec {
        family,
        lambda,
        n: ctx.dim_a,
    })?;
    let rho = perturb(&base, epsilon, &mut rng)?;
    finish_sample(
        ctx,
        index,
        SampleFamily::Boundary(family),
        Some(epsilon),
        Some(lambda),
        rho,
        ctx.fixed_bases.clone(),
        None,
    )
}

fn pure_sample(ctx: &DimContext<'_>, index: u64) -> Result<Sample> {
    let mut rng = sample_rng(ctx.cfg.master_seed, ctx.cfg.mode, ctx.dim_index, index);
    let rho = random_pure_state(ctx.dim_a, ctx.dim_b, &mut rng);
    let mut haar = |d: usize| ProjectiveBasis::new(haar_unitary(d, &mut rng));
    let (qa, ra) = (haar(ctx.dim_a)?, haar(ctx.dim_a)?);
    let (qb, rb) = (haar(ctx.dim_b)?, haar(ctx.dim_b)?);
    let residuals = (
        residual_uncertainty(&rho, Subsystem::A, &qa, &conjugate_basis(&qa))?,
        residual_uncertainty(&rho, Subsystem::B, &qb, &conjugate_basis(&qb))?,
    );
    let bases = BasisQuadruple::arbitrary(qa, ra, qb, rb)?;
    finish_sample(
        ctx,
        index,
        SampleFamily::Pure,
        None,
        None,
        rho,
        bases,
        Some(residuals),
    )
}

/// Runs `cfg`, handing every sample to `sink` in (dimension, index) order.
pub fn run_search(
    cfg: &SearchConfig,
    mut sink: impl FnMut(&Sample) -> Result<()>,
) -> Result<SearchSummary> {
    cfg.validate()?;
    let started = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::ConfigInvalid(format!("worker pool: {e}")))?;
    let sample_fn: fn(&DimContext<'_>, u64) -> Result<Sample> = match cfg.mode {
        SearchMode::Uniform => uniform_sample,
        SearchMode::BoundaryPerturb => boundary_sample,
        SearchMode::PureStates => pure_sample,
    };

    let mut per_dim = Vec::with_capacity(cfg.dims.len());
    for (dim_index, &(dim_a, dim_b)) in cfg.dims.iter().enumerate() {
        let ctx = DimContext {
            cfg,
            dim_index,
            dim_a,
            dim_b,
            fixed_bases: BasisQuadruple::computational_fourier(dim_a, dim_b),
        };
        let total = cfg.samples_for(dim_a, dim_b);
        let mut acc = Accumulator::new(dim_a, dim_b, cfg.mode.violation_threshold());
        let mut start = 0;
        while start < total {
            let end = (start + CHUNK).min(total);
            let chunk: Vec<Result<Sample>> = pool.install(|| {
                (start..end)
                    .into_par_iter()
                    .map(|i| sample_fn(&ctx, i))
                    .collect()
            });
            for sample in chunk {
                let sample = sample?;
                acc.push(&sample.record);
                sink(&sample)?;
            }
            start = end;
        }
        per_dim.push(acc.finish());
    }

    Ok(SearchSummary {
        mode: cfg.mode,
        master_seed: cfg.master_seed,
        per_dim,
        wall_clock_secs: started.elapsed().as_secs_f64(),
    })
}

fn require_mode(cfg: &SearchConfig, mode: SearchMode) -> Result<()> {
    if cfg.mode != mode {
        return Err(Error::ConfigInvalid(format!(
            "expected mode {}, got {}",
            mode.name(),
            cfg.mode.name()
        )));
    }
    Ok(())
}

/// Random mixed states evaluated against the computational/Fourier bases.
pub fn run_uniform_search(
    cfg: &SearchConfig,
    sink: impl FnMut(&Sample) -> Result<()>,
) -> Result<SearchSummary> {
    require_mode(cfg, SearchMode::Uniform)?;
    run_search(cfg, sink)
}

/// Saturating mixtures perturbed by random joint unitaries.
pub fn run_boundary_perturbation(
    cfg: &SearchConfig,
    sink: impl FnMut(&Sample) -> Result<()>,
) -> Result<SearchSummary> {
    require_mode(cfg, SearchMode::BoundaryPerturb)?;
    run_search(cfg, sink)
}

/// Haar pure states against four independent Haar bases.
pub fn run_pure_state_check(
    cfg: &SearchConfig,
    sink: impl FnMut(&Sample) -> Result<()>,
) -> Result<SearchSummary> {
    require_mode(cfg, SearchMode::PureStates)?;
    run_search(cfg, sink)
}

/// Runs `cfg` and collects every record in memory.
pub fn collect_search(cfg: &SearchConfig) -> Result<(Vec<SampleRecord>, SearchSummary)> {
    let mut records = Vec::new();
    let summary = run_search(cfg, |s| {
        records.push(s.record.clone());
        Ok(())
    })?;
    Ok((records, summary))
}

/// One grid point of the Werner sweep, evaluated with `σ_x`/`σ_y` on both
/// sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WernerSweepRecord {
    pub eta: f64,
    pub qmi: f64,
    pub cqc_sum: f64,
    pub berta_bound: f64,
    pub residual_a: f64,
}

pub fn run_werner_sweep(p: f64, eta_grid: usize) -> Result<Vec<WernerSweepRecord>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::ConfigInvalid(format!("p={p} outside [0, 1]")));
    }
    if eta_grid < 2 {
        return Err(Error::ConfigInvalid(
            "eta grid needs at least 2 points".into(),
        ));
    }
    let bases = BasisQuadruple::pauli(PauliAxis::X, PauliAxis::Y)?;
    (0..eta_grid)
        .map(|k| {
            let eta = k as f64 / (eta_grid - 1) as f64;
            let r = evaluate(&asymmetric_werner(WernerParams::new(p, eta)?)?, &bases)?;
            Ok(WernerSweepRecord {
                eta,
                qmi: r.qmi,
                cqc_sum: r.mi_sum,
                berta_bound: r.berta_bound_a,
                residual_a: r.residual_a,
            })
        })
        .collect()
}
