//! Monte Carlo experiments: success-rate sweeps over `p / p*`, paired flag
//! comparisons and RMSE comparisons of the Gaussian variant against
//! per-user and per-item averages.
//!
//! Trial `t` of grid point `k` uses seed `base_seed + k * stride + t`, for
//! instance generation and recovery alike, so rows are reproducible and
//! paired across flags.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DeltaPair, DenseMatrix, HierarchyConfig, Partition};
use crate::recovery::{
    phase_errors, recover, recover_gaussian, PhaseErrors, RecoveryOptions, RefineFlag,
};
use crate::synth::{
    column_pattern, gen_gaussian_instance, gen_gaussian_means, gen_hsbm_graph, gen_partition,
    generate_instance, ColumnSectionProfile, GaussianObservation, GraphParams, InstanceSpec,
    ObservationParams, ProfileMode,
};
use crate::theory::{p_star_232, GraphInfo, PStar};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

pub const SWEEP_HEADER: &str = "p_over_pstar,trials,successes,success_rate,ci_low,ci_high";
pub const FLAGS_HEADER: &str = "flag,p_over_pstar,trials,successes,success_rate,ci_low,ci_high";
pub const RMSE_HEADER: &str = "method,p,sigma2,rmse";

/// Edge probabilities, either absolute or as multiples of `ln n / n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum GraphSpec {
    Absolute { alpha: f64, beta: f64, gamma: f64 },
    Tilde { alpha: f64, beta: f64, gamma: f64 },
}

impl GraphSpec {
    pub fn resolve(&self, n: usize) -> Result<GraphParams> {
        match *self {
            GraphSpec::Absolute { alpha, beta, gamma } => GraphParams::new(alpha, beta, gamma),
            GraphSpec::Tilde { alpha, beta, gamma } => GraphParams::from_tilde(n, alpha, beta, gamma),
        }
    }
}

fn default_stride() -> u64 {
    1_000_000
}

fn default_mode() -> ProfileMode {
    ProfileMode::Exact
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub n: usize,
    pub m: usize,
    pub graph: GraphSpec,
    pub theta: f64,
    /// Column-pattern probabilities; uniform when absent.
    #[serde(default)]
    pub profile: Option<[f64; 8]>,
    #[serde(default = "default_mode")]
    pub mode: ProfileMode,
    /// Distances used for `p*`; derived from the profile when absent.
    #[serde(default)]
    pub deltas: Option<DeltaPair>,
    /// Grid of `p / p*`.
    pub multipliers: Vec<f64>,
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_stride")]
    pub stride: u64,
    #[serde(default)]
    pub flag: RefineFlag,
    /// Refinement sweeps; `ceil(log2 n)` when absent.
    #[serde(default)]
    pub iterations: Option<usize>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.multipliers.iter().any(|&k| !(k >= 0.0) || !k.is_finite()) {
            return Err(Error::InvalidConfig("multipliers must be finite and >= 0".into()));
        }
        if self.multipliers.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidConfig("multipliers must be sorted".into()));
        }
        if self.stride < self.trials as u64 {
            return Err(Error::InvalidConfig(format!(
                "stride {} is smaller than trials {}; seeds would overlap",
                self.stride, self.trials
            )));
        }
        self.profile()?;
        self.graph.resolve(self.n)?;
        Ok(())
    }

    pub fn config(&self) -> Result<HierarchyConfig> {
        HierarchyConfig::standard(self.n, self.m)
    }

    pub fn profile(&self) -> Result<ColumnSectionProfile> {
        match self.profile {
            None => Ok(ColumnSectionProfile::uniform()),
            Some(tau) => ColumnSectionProfile::new(tau),
        }
    }

    pub fn deltas(&self) -> Result<DeltaPair> {
        match self.deltas {
            Some(d) => Ok(d),
            None => Ok(profile_deltas(&self.profile()?)),
        }
    }

    pub fn p_star(&self) -> Result<PStar> {
        let graph = self.graph.resolve(self.n)?;
        p_star_232(self.n, self.m, self.theta, &GraphInfo::from(&graph), &self.deltas()?)
    }

    pub fn seed(&self, point: usize, trial: usize) -> u64 {
        self.base_seed
            .wrapping_add((point as u64).wrapping_mul(self.stride))
            .wrapping_add(trial as u64)
    }

    fn point(&self, multiplier: f64, p_star: f64) -> Result<InstanceSpec> {
        Ok(InstanceSpec {
            config: self.config()?,
            graph: self.graph.resolve(self.n)?,
            observation: ObservationParams::new((multiplier * p_star).min(1.0), self.theta)?,
            profile: self.profile()?,
            mode: self.mode,
        })
    }
}

/// Population distances implied by a column profile: the probability mass
/// of patterns separating each pair of slots, minimized within and across
/// clusters.
pub fn profile_deltas(profile: &ColumnSectionProfile) -> DeltaPair {
    let pats: Vec<[u8; 6]> = (0..8).map(column_pattern).collect();
    let dist = |s: usize, t: usize| -> f64 {
        (0..8).filter(|&l| pats[l][s] != pats[l][t]).map(|l| profile.tau[l]).sum()
    };
    let mut dg = f64::INFINITY;
    let mut dc = f64::INFINITY;
    for s in 0..6 {
        for t in (s + 1)..6 {
            if s / 3 == t / 3 {
                dg = dg.min(dist(s, t));
            } else {
                dc = dc.min(dist(s, t));
            }
        }
    }
    DeltaPair {
        delta_g: dg,
        delta_c: dc,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub seed: u64,
    /// False when instance generation was degenerate; such trials are
    /// excluded from rates.
    pub valid: bool,
    pub success: bool,
    pub errors: Option<PhaseErrors>,
    /// Entries of the estimate that differ from the truth.
    pub wrong_entries: usize,
    pub message: Option<String>,
    pub wall_seconds: f64,
}

pub fn run_trial(spec: &InstanceSpec, options: &RecoveryOptions, seed: u64) -> TrialOutcome {
    let start = Instant::now();
    let mut out = TrialOutcome {
        seed,
        valid: false,
        success: false,
        errors: None,
        wrong_entries: 0,
        message: None,
        wall_seconds: 0.0,
    };
    let inst = match generate_instance(spec, seed) {
        Ok(i) => i,
        Err(e) => {
            out.message = Some(e.to_string());
            out.wall_seconds = start.elapsed().as_secs_f64();
            return out;
        }
    };
    out.valid = true;
    let opts = RecoveryOptions { seed, ..*options };
    match recover(&inst.observations, &inst.graph, &spec.config, &opts) {
        Ok(res) => {
            let wrong = inst
                .matrix
                .as_slice()
                .iter()
                .zip(res.matrix.as_slice())
                .filter(|(a, b)| a != b)
                .count();
            out.success = res.matrix == inst.matrix;
            debug_assert_eq!(out.success, wrong == 0);
            out.wrong_entries = wrong;
            out.errors = Some(phase_errors(&res, &inst.partition));
        }
        Err(e) => {
            out.wrong_entries = inst.matrix.as_slice().len();
            out.message = Some(e.to_string());
        }
    }
    out.wall_seconds = start.elapsed().as_secs_f64();
    out
}

/// Wilson score interval at 95%; `(0, 1)` without trials.
pub fn wilson(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let ph = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (ph + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (ph * (1.0 - ph) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub multiplier: f64,
    pub p: f64,
    /// Valid trials.
    pub trials: usize,
    pub successes: usize,
    pub invalid: usize,
    pub success_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl SweepRow {
    fn from_outcomes(multiplier: f64, p: f64, outcomes: &[TrialOutcome]) -> Self {
        let trials = outcomes.iter().filter(|o| o.valid).count();
        let successes = outcomes.iter().filter(|o| o.valid && o.success).count();
        let (ci_low, ci_high) = wilson(successes, trials);
        Self {
            multiplier,
            p,
            trials,
            successes,
            invalid: outcomes.len() - trials,
            success_rate: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
            ci_low,
            ci_high,
        }
    }

    fn csv_fields(&self) -> String {
        format!(
            "{},{},{},{:.6},{:.6},{:.6}",
            self.multiplier, self.trials, self.successes, self.success_rate, self.ci_low, self.ci_high
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub p_star: f64,
    pub flag: RefineFlag,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{SWEEP_HEADER}\n");
        for r in &self.rows {
            let _ = writeln!(out, "{}", r.csv_fields());
        }
        out
    }
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j.max(1))
                .build()
                .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs every trial of every grid point. Outcomes are collected in trial
/// order, so the result does not depend on scheduling.
pub fn sweep_outcomes(
    spec: &SweepSpec,
    flag: RefineFlag,
    jobs: Option<usize>,
) -> Result<(f64, Vec<(f64, f64, Vec<TrialOutcome>)>)> {
    spec.validate()?;
    let p_star = spec.p_star()?.value;
    let options = RecoveryOptions {
        flag,
        iterations: spec.iterations,
        seed: 0,
    };
    let points = spec
        .multipliers
        .iter()
        .map(|&k| Ok((k, spec.point(k, p_star)?)))
        .collect::<Result<Vec<_>>>()?;
    let tasks: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|k| (0..spec.trials).map(move |t| (k, t)))
        .collect();
    let outcomes: Vec<TrialOutcome> = with_pool(jobs, || {
        tasks
            .par_iter()
            .map(|&(k, t)| run_trial(&points[k].1, &options, spec.seed(k, t)))
            .collect()
    })?;
    let mut chunks = outcomes.chunks(spec.trials);
    let table = points
        .iter()
        .map(|(k, inst)| (*k, inst.observation.p, chunks.next().unwrap_or_default().to_vec()))
        .collect();
    Ok((p_star, table))
}

pub fn sweep(spec: &SweepSpec, jobs: Option<usize>) -> Result<SweepTable> {
    let (p_star, points) = sweep_outcomes(spec, spec.flag, jobs)?;
    Ok(SweepTable {
        p_star,
        flag: spec.flag,
        rows: points
            .iter()
            .map(|(k, p, o)| SweepRow::from_outcomes(*k, *p, o))
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlagComparison {
    pub p_star: f64,
    pub groups_only: Vec<SweepRow>,
    pub groups_and_vectors: Vec<SweepRow>,
}

impl FlagComparison {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{FLAGS_HEADER}\n");
        for (flag, rows) in [(0, &self.groups_only), (1, &self.groups_and_vectors)] {
            for r in rows {
                let _ = writeln!(out, "{flag},{}", r.csv_fields());
            }
        }
        out
    }
}

/// Both refinement flags on the same seeds, hence the same instances.
pub fn compare_flags(spec: &SweepSpec, jobs: Option<usize>) -> Result<FlagComparison> {
    let rows = |flag| -> Result<(f64, Vec<SweepRow>)> {
        let (p_star, points) = sweep_outcomes(spec, flag, jobs)?;
        Ok((
            p_star,
            points
                .iter()
                .map(|(k, p, o)| SweepRow::from_outcomes(*k, *p, o))
                .collect(),
        ))
    };
    let (p_star, groups_only) = rows(RefineFlag::GroupsOnly)?;
    let (_, groups_and_vectors) = rows(RefineFlag::GroupsAndVectors)?;
    Ok(FlagComparison {
        p_star,
        groups_only,
        groups_and_vectors,
    })
}

fn default_mean_span() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub n: usize,
    pub m: usize,
    pub graph: GraphSpec,
    pub p: f64,
    pub sigma2: f64,
    /// Group means are drawn from `[mean_lo, mean_lo + mean_span]`.
    #[serde(default)]
    pub mean_lo: f64,
    #[serde(default = "default_mean_span")]
    pub mean_span: f64,
    #[serde(default)]
    pub flag: RefineFlag,
    #[serde(default)]
    pub iterations: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RmseMethod {
    Proposed,
    UserAverage,
    ItemAverage,
}

impl RmseMethod {
    pub const ALL: [RmseMethod; 3] = [RmseMethod::Proposed, RmseMethod::UserAverage, RmseMethod::ItemAverage];

    pub fn label(self) -> &'static str {
        match self {
            RmseMethod::Proposed => "proposed",
            RmseMethod::UserAverage => "user_average",
            RmseMethod::ItemAverage => "item_average",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmseRow {
    pub method: RmseMethod,
    pub rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmseTable {
    pub p: f64,
    pub sigma2: f64,
    pub seed: u64,
    /// Entries the RMSE was taken over.
    pub evaluated: usize,
    pub rows: Vec<RmseRow>,
}

impl RmseTable {
    pub fn rmse(&self, method: RmseMethod) -> f64 {
        self.rows
            .iter()
            .find(|r| r.method == method)
            .map_or(f64::NAN, |r| r.rmse)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{RMSE_HEADER}\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{:.6}", r.method.label(), self.p, self.sigma2, r.rmse);
        }
        out
    }
}

/// Row-mean and column-mean predictors with a global-mean fallback.
pub fn average_predictions(obs: &GaussianObservation) -> (DenseMatrix<f64>, DenseMatrix<f64>) {
    let (n, m) = (obs.n, obs.m);
    let mut rs = vec![(0.0, 0usize); n];
    let mut cs = vec![(0.0, 0usize); m];
    for &(r, c, v) in &obs.entries {
        rs[r].0 += v;
        rs[r].1 += 1;
        cs[c].0 += v;
        cs[c].1 += 1;
    }
    let global = if obs.entries.is_empty() {
        0.0
    } else {
        obs.entries.iter().map(|e| e.2).sum::<f64>() / obs.entries.len() as f64
    };
    let mean = |(s, k): (f64, usize)| if k == 0 { global } else { s / k as f64 };
    let mut user = DenseMatrix::zeros(n, m);
    let mut item = DenseMatrix::zeros(n, m);
    for r in 0..n {
        for c in 0..m {
            user.set(r, c, mean(rs[r]));
            item.set(r, c, mean(cs[c]));
        }
    }
    (user, item)
}

/// RMSE over the cells not in `obs`; over every cell when all are observed.
pub fn rmse_unobserved(
    truth: &DenseMatrix<f64>,
    pred: &DenseMatrix<f64>,
    obs: &GaussianObservation,
) -> (f64, usize) {
    let mut observed = vec![false; truth.rows() * truth.cols()];
    for &(r, c, _) in &obs.entries {
        observed[r * truth.cols() + c] = true;
    }
    let all = observed.iter().all(|&o| o);
    let mut sse = 0.0;
    let mut k = 0usize;
    for (i, (&t, &p)) in truth.as_slice().iter().zip(pred.as_slice()).enumerate() {
        if all || !observed[i] {
            sse += (t - p).powi(2);
            k += 1;
        }
    }
    (if k == 0 { 0.0 } else { (sse / k as f64).sqrt() }, k)
}

pub fn rmse_eval(spec: &GaussianSpec, seed: u64) -> Result<RmseTable> {
    let config = HierarchyConfig::standard(spec.n, spec.m)?;
    let graph_params = spec.graph.resolve(spec.n)?;
    let part: Partition = gen_partition(&config, seed)?;
    let graph = gen_hsbm_graph(&part, &graph_params, seed)?;
    let means = gen_gaussian_means(&config, spec.mean_lo, spec.mean_span, seed);
    let (obs, truth) = gen_gaussian_instance(&config, &part, &means, spec.sigma2, spec.p, seed)?;
    let options = RecoveryOptions {
        flag: spec.flag,
        iterations: spec.iterations,
        seed,
    };
    let proposed = recover_gaussian(&obs, &graph, &config, &options)?;
    let (user, item) = average_predictions(&obs);
    let (r_prop, evaluated) = rmse_unobserved(&truth, &proposed.matrix, &obs);
    let (r_user, _) = rmse_unobserved(&truth, &user, &obs);
    let (r_item, _) = rmse_unobserved(&truth, &item, &obs);
    Ok(RmseTable {
        p: spec.p,
        sigma2: spec.sigma2,
        seed,
        evaluated,
        rows: vec![
            RmseRow { method: RmseMethod::Proposed, rmse: r_prop },
            RmseRow { method: RmseMethod::UserAverage, rmse: r_user },
            RmseRow { method: RmseMethod::ItemAverage, rmse: r_item },
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> SweepSpec {
        SweepSpec {
            n: 60,
            m: 20,
            graph: GraphSpec::Absolute {
                alpha: 1.0,
                beta: 0.5,
                gamma: 0.0,
            },
            theta: 0.0,
            profile: None,
            mode: ProfileMode::Exact,
            deltas: None,
            multipliers: vec![0.0, 100.0],
            trials: 4,
            base_seed: 7,
            stride: 1000,
            flag: RefineFlag::GroupsAndVectors,
            iterations: None,
        }
    }

    #[test]
    fn wilson_reference_values() {
        // 8 of 10: center (0.8 + 0.19207) / 1.38415
        let (lo, hi) = wilson(8, 10);
        assert!((lo - 0.4901624).abs() < 1e-6, "{lo}");
        assert!((hi - 0.9433178).abs() < 1e-6, "{hi}");
        let (lo, hi) = wilson(0, 20);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.1611252).abs() < 1e-6, "{hi}");
        assert_eq!(wilson(0, 0), (0.0, 1.0));
    }

    #[test]
    fn uniform_profile_distances() {
        let d = profile_deltas(&ColumnSectionProfile::uniform());
        assert_eq!((d.delta_g, d.delta_c), (0.5, 0.5));
    }

    #[test]
    fn seeds_follow_the_documented_layout() {
        let s = small_spec();
        assert_eq!(s.seed(0, 0), 7);
        assert_eq!(s.seed(2, 3), 7 + 2000 + 3);
    }

    #[test]
    fn zero_and_saturated_points() {
        let table = sweep(&small_spec(), Some(1)).unwrap();
        assert_eq!(table.rows[0].successes, 0);
        assert_eq!(table.rows[1].p, 1.0);
        assert_eq!(table.rows[1].successes, 4);
        let csv = table.to_csv();
        assert!(csv.starts_with(SWEEP_HEADER));
        assert_eq!(csv.lines().count(), 3);
        assert_eq!(csv, sweep(&small_spec(), None).unwrap().to_csv());
    }

    #[test]
    fn rejects_bad_specs() {
        let mut s = small_spec();
        s.multipliers = vec![1.0, 0.5];
        assert!(sweep(&s, None).is_err());
        let mut s = small_spec();
        s.trials = 0;
        assert!(sweep(&s, None).is_err());
    }

    #[test]
    fn noiseless_gaussian_is_exact() {
        let spec = GaussianSpec {
            n: 60,
            m: 20,
            graph: GraphSpec::Absolute {
                alpha: 1.0,
                beta: 0.5,
                gamma: 0.0,
            },
            p: 1.0,
            sigma2: 0.0,
            mean_lo: 0.0,
            mean_span: 10.0,
            flag: RefineFlag::GroupsAndVectors,
            iterations: None,
        };
        let t = rmse_eval(&spec, 1).unwrap();
        assert!(t.rmse(RmseMethod::Proposed) < 1e-12);
        assert_eq!(t.evaluated, 60 * 20);
    }
}
