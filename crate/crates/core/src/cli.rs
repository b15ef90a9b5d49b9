//! Command-line interface.
//!
//! Exit codes: 0 on success, 1 for I/O and parse failures, 2 for domain and
//! validation failures (including argument errors).

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{compare_flags, rmse_eval, sweep, GaussianSpec, GraphSpec, RmseMethod, SweepSpec};
use crate::io;
use crate::model::{DeltaPair, HierarchyConfig, SideGraph};
use crate::oracle::{exhaustive_mle, neg_log_likelihood, Candidate, MleOptions, TruthParams};
use crate::recovery::{cluster_errors, misclassified, recover, RecoveryOptions, RefineFlag};
use crate::synth::{
    generate_instance, ColumnSectionProfile, GraphParams, InstanceSpec, ObservationParams,
    ProfileMode,
};
use crate::theory::{
    format_sig, p_star_232, p_star_general, regime_map, GraphInfo, RegimeGrid,
};

#[derive(Debug, Parser)]
#[command(name = "hiermc", version, about = "Matrix completion with hierarchical graph side information")]
pub struct Cli {
    /// Base seed; overrides HIERMC_SEED.
    #[arg(long, global = true, env = "HIERMC_SEED")]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Threshold p*, its active term and the regime.
    Theory(TheoryArgs),
    /// Write a synthetic instance to a directory.
    Generate(GenerateArgs),
    /// Run the recovery pipeline on files.
    Recover(RecoverArgs),
    /// Success rate over a grid of p / p*.
    Sweep(SweepArgs),
    /// Paired success rates for both refinement flags.
    CompareFlags(SweepArgs),
    /// RMSE of the Gaussian variant against average baselines.
    Rmse(RmseArgs),
    /// Exhaustive maximum-likelihood audit of a tiny instance.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GraphArgs {
    #[arg(long, requires_all = ["beta", "gamma"], conflicts_with_all = ["alpha_tilde", "beta_tilde", "gamma_tilde"])]
    pub alpha: Option<f64>,
    #[arg(long, requires = "alpha")]
    pub beta: Option<f64>,
    #[arg(long, requires = "alpha")]
    pub gamma: Option<f64>,
    /// alpha = alpha_tilde * ln(n) / n
    #[arg(long, requires_all = ["beta_tilde", "gamma_tilde"])]
    pub alpha_tilde: Option<f64>,
    #[arg(long, requires = "alpha_tilde")]
    pub beta_tilde: Option<f64>,
    #[arg(long, requires = "alpha_tilde")]
    pub gamma_tilde: Option<f64>,
}

impl GraphArgs {
    fn spec(&self) -> Option<GraphSpec> {
        match (self.alpha, self.beta, self.gamma, self.alpha_tilde, self.beta_tilde, self.gamma_tilde) {
            (Some(alpha), Some(beta), Some(gamma), ..) => Some(GraphSpec::Absolute { alpha, beta, gamma }),
            (.., Some(alpha), Some(beta), Some(gamma)) => Some(GraphSpec::Tilde { alpha, beta, gamma }),
            _ => None,
        }
    }

    fn required(&self) -> Result<GraphSpec> {
        self.spec().ok_or_else(|| {
            Error::InvalidConfig("graph parameters required: --alpha/--beta/--gamma or the -tilde forms".into())
        })
    }
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub theta: f64,
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Separation measures given directly (default 0 when no graph is given).
    #[arg(long, conflicts_with_all = ["alpha", "alpha_tilde"])]
    pub i_g: Option<f64>,
    #[arg(long, conflicts_with_all = ["alpha", "alpha_tilde"])]
    pub i_c1: Option<f64>,
    #[arg(long, conflicts_with_all = ["alpha", "alpha_tilde"])]
    pub i_c2: Option<f64>,
    #[arg(long)]
    pub delta_g: f64,
    #[arg(long)]
    pub delta_c: f64,
    /// Evaluate the general form at (c, g, r, q) instead of (2, 3, 2, 2).
    #[arg(long, num_args = 4, value_names = ["C", "G", "R", "Q"])]
    pub general: Option<Vec<usize>>,
    /// Also write the regime map as CSV.
    #[arg(long)]
    pub regime_map: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    pub i_g_max: f64,
    #[arg(long, default_value_t = 0.02)]
    pub i_c2_max: f64,
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
    /// Cross-cluster edge probability used to rebuild the map's graphs.
    #[arg(long = "map-gamma", default_value_t = 0.01)]
    pub map_gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum ModeArg {
    Sampled,
    Exact,
}

impl From<ModeArg> for ProfileMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Sampled => ProfileMode::Sampled,
            ModeArg::Exact => ProfileMode::Exact,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub theta: f64,
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Eight comma-separated pattern proportions; uniform by default.
    #[arg(long, value_delimiter = ',', num_args = 8)]
    pub profile: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "sampled")]
    pub mode: ModeArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RecoverArgs {
    /// Directory written by `generate`; supplies graph, observations and sizes.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[arg(long, required_unless_present = "instance")]
    pub graph: Option<PathBuf>,
    #[arg(long, required_unless_present = "instance")]
    pub observations: Option<PathBuf>,
    #[arg(long, required_unless_present = "instance")]
    pub n: Option<usize>,
    #[arg(long, required_unless_present = "instance")]
    pub m: Option<usize>,
    /// Ground-truth matrix; enables the success line.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Ground-truth partition; enables per-phase error counts.
    #[arg(long)]
    pub truth_partition: Option<PathBuf>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub flag: u8,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// JSON sweep specification.
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads; rayon's default when absent.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RmseArgs {
    #[arg(long, default_value_t = 600)]
    pub n: usize,
    #[arg(long, default_value_t = 200)]
    pub m: usize,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub sigma2: f64,
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, default_value_t = 0.0)]
    pub mean_lo: f64,
    #[arg(long, default_value_t = 10.0)]
    pub mean_span: f64,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub flag: u8,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Directory written by `generate`; supplies files and true parameters.
    #[arg(long)]
    pub instance: PathBuf,
    /// Largest number of candidates to enumerate.
    #[arg(long, default_value_t = 10_000_000)]
    pub cap: u128,
    /// Restrict the search to candidates with these distances.
    #[arg(long, num_args = 2, value_names = ["DELTA_G", "DELTA_C"])]
    pub restrict_delta: Option<Vec<f64>>,
    /// Also score the pipeline's output against the oracle minimum.
    #[arg(long)]
    pub with_pipeline: bool,
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let seed = cli.seed;
    match cli.command {
        Command::Theory(a) => cmd_theory(&a, out),
        Command::Generate(a) => cmd_generate(&a, seed.unwrap_or(0), out),
        Command::Recover(a) => cmd_recover(&a, seed.unwrap_or(0), out),
        Command::Sweep(a) => cmd_sweep(&a, seed, false, out),
        Command::CompareFlags(a) => cmd_sweep(&a, seed, true, out),
        Command::Rmse(a) => cmd_rmse(&a, seed.unwrap_or(0), out),
        Command::Oracle(a) => cmd_oracle(&a, seed.unwrap_or(0), out),
    }
}

fn emit(out: &mut dyn Write, line: impl AsRef<str>) -> Result<()> {
    writeln!(out, "{}", line.as_ref()).map_err(|e| Error::io("<stdout>", e))
}

fn command_line() -> String {
    std::env::args().collect::<Vec<_>>().join(" ")
}

fn cmd_theory(a: &TheoryArgs, out: &mut dyn Write) -> Result<()> {
    let deltas = DeltaPair::new(a.delta_g, a.delta_c)?;
    let info = match a.graph.spec() {
        Some(g) => GraphInfo::from(&g.resolve(a.n)?),
        None => GraphInfo {
            i_g: a.i_g.unwrap_or(0.0),
            i_c1: a.i_c1.unwrap_or(0.0),
            i_c2: a.i_c2.unwrap_or(0.0),
        },
    };
    let ps = match &a.general {
        Some(v) => {
            let q = u32::try_from(v[3]).map_err(|_| Error::Domain("q out of range".into()))?;
            p_star_general(v[0], v[1], v[2], q, a.n, a.m, a.theta, &info, &deltas)?
        }
        None => p_star_232(a.n, a.m, a.theta, &info, &deltas)?,
    };
    emit(out, format!("p_star={} regime={}", format_sig(ps.value, 6), ps.regime.kind))?;
    emit(out, format!("prefactor={}", format_sig(ps.prefactor, 6)))?;
    emit(
        out,
        format!(
            "active_term={} tie={} out_of_range={} raw={}",
            ps.regime.active_term,
            ps.regime.is_tie,
            ps.out_of_range,
            format_sig(ps.raw, 6)
        ),
    )?;
    emit(
        out,
        format!(
            "terms={},{},{}",
            format_sig(ps.terms[0], 6),
            format_sig(ps.terms[1], 6),
            format_sig(ps.terms[2], 6)
        ),
    )?;
    if let Some(path) = &a.regime_map {
        let grid = RegimeGrid {
            i_g_max: a.i_g_max,
            i_c2_max: a.i_c2_max,
            steps: a.steps,
        };
        let cells = regime_map(&grid, a.n, a.m, a.theta, &deltas, a.map_gamma)?;
        let mut csv = String::from("I_g,I_c2,regime,p_star\n");
        for c in &cells {
            let (label, ps) = match c.regime {
                Some(k) => (k.label(), format_sig(c.p_star, 6)),
                None => ("infeasible", String::new()),
            };
            csv.push_str(&format!("{},{},{label},{ps}\n", c.i_g, c.i_c2));
        }
        io::write_text(path, &csv)?;
        emit(out, format!("regime_map={} cells={}", path.display(), cells.len()))?;
    }
    Ok(())
}

fn profile_from(v: &Option<Vec<f64>>) -> Result<ColumnSectionProfile> {
    match v {
        None => Ok(ColumnSectionProfile::uniform()),
        Some(v) => {
            let tau: [f64; 8] = v
                .as_slice()
                .try_into()
                .map_err(|_| Error::InvalidConfig("profile needs 8 values".into()))?;
            ColumnSectionProfile::new(tau)
        }
    }
}

/// Instance record stored as `manifest.json` by `generate`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct InstanceRecord {
    spec: InstanceSpec,
    seed: u64,
}

fn read_instance_record(dir: &Path) -> Result<InstanceRecord> {
    let path = dir.join("manifest.json");
    let text = io::read_text(&path)?;
    let v: serde_json::Value = serde_json::from_str(&text)?;
    let spec = serde_json::from_value(v["spec"].clone())?;
    let seed = v["seed"].as_u64().unwrap_or(0);
    Ok(InstanceRecord { spec, seed })
}

fn cmd_generate(a: &GenerateArgs, seed: u64, out: &mut dyn Write) -> Result<()> {
    let config = HierarchyConfig::standard(a.n, a.m)?;
    let spec = InstanceSpec {
        config,
        graph: a.graph.required()?.resolve(a.n)?,
        observation: ObservationParams::new(a.p, a.theta)?,
        profile: profile_from(&a.profile)?,
        mode: a.mode.into(),
    };
    let inst = generate_instance(&spec, seed)?;
    let dir = &a.out;
    io::write_text(&dir.join("graph.txt"), &io::format_edge_list(&inst.graph))?;
    io::write_text(&dir.join("observations.txt"), &io::format_triplets(&inst.observations))?;
    io::write_text(&dir.join("truth.txt"), &io::format_binary_matrix(&inst.matrix))?;
    io::write_text(&dir.join("partition.txt"), &io::format_partition(&inst.partition))?;
    io::Manifest::new(command_line(), seed, &spec).write(&dir.join("manifest.json"))?;
    emit(
        out,
        format!(
            "wrote={} n={} m={} edges={} observed={} delta_g={} delta_c={}",
            dir.display(),
            a.n,
            a.m,
            inst.graph.edge_count(),
            inst.observations.len(),
            format_sig(inst.deltas.delta_g, 6),
            format_sig(inst.deltas.delta_c, 6)
        ),
    )
}

fn cmd_recover(a: &RecoverArgs, seed: u64, out: &mut dyn Write) -> Result<()> {
    let (graph_path, obs_path, n, m) = match &a.instance {
        Some(dir) => {
            let rec = read_instance_record(dir)?;
            (
                a.graph.clone().unwrap_or_else(|| dir.join("graph.txt")),
                a.observations.clone().unwrap_or_else(|| dir.join("observations.txt")),
                a.n.unwrap_or(rec.spec.config.n),
                a.m.unwrap_or(rec.spec.config.m),
            )
        }
        None => (
            a.graph.clone().expect("required by clap"),
            a.observations.clone().expect("required by clap"),
            a.n.expect("required by clap"),
            a.m.expect("required by clap"),
        ),
    };
    let config = HierarchyConfig::standard(n, m)?;
    let graph = io::read_edge_list(&graph_path, n)?;
    let obs = io::read_triplets(&obs_path, n, m)?;
    let options = RecoveryOptions {
        flag: RefineFlag::from_bit(a.flag)?,
        iterations: a.iterations,
        seed,
    };
    let res = recover(&obs, &graph, &config, &options)?;
    let mut kv: Vec<(String, String)> = Vec::new();
    if let Some(path) = &a.truth {
        let truth = io::read_binary_matrix(path)?;
        if (truth.rows(), truth.cols()) != (n, m) {
            return Err(Error::Dimension(format!(
                "truth is {}x{}, expected {n}x{m}",
                truth.rows(),
                truth.cols()
            )));
        }
        let wrong = truth
            .as_slice()
            .iter()
            .zip(res.matrix.as_slice())
            .filter(|(x, y)| x != y)
            .count();
        kv.push(("success".into(), (wrong == 0).to_string()));
        kv.push(("wrong_entries".into(), wrong.to_string()));
    }
    if let Some(path) = &a.truth_partition {
        let truth = io::read_partition(path, 2, 3)?;
        if truth.n() != n {
            return Err(Error::Dimension(format!("truth partition has {} users, expected {n}", truth.n())));
        }
        let d = &res.diagnostics;
        kv.push(("phase1_misclassified".into(), cluster_errors(&d.clusters, &truth).to_string()));
        kv.push(("phase2_misclassified".into(), misclassified(&d.initial_groups, &truth).to_string()));
        kv.push(("final_misclassified".into(), misclassified(&res.partition, &truth).to_string()));
    }
    let d = &res.diagnostics;
    kv.push(("alpha_hat".into(), format_sig(d.params.alpha_hat, 6)));
    kv.push(("beta_hat".into(), format_sig(d.params.beta_hat, 6)));
    kv.push(("theta_hat".into(), format_sig(d.params.theta_hat, 6)));
    kv.push(("flag".into(), a.flag.to_string()));
    kv.push(("iterations".into(), d.iterations.to_string()));
    kv.push((
        "moves".into(),
        d.moves.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(","),
    ));
    kv.push(("warnings".into(), d.warnings.len().to_string()));
    for w in &d.warnings {
        eprintln!("warning: {w}");
    }
    let line = kv.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ");
    emit(out, line)?;
    if let Some(dir) = &a.out {
        io::write_text(&dir.join("matrix.txt"), &io::format_binary_matrix(&res.matrix))?;
        io::write_text(&dir.join("partition.txt"), &io::format_partition(&res.partition))?;
        io::write_text(&dir.join("diagnostics.txt"), &io::format_kv(&kv))?;
        let record = serde_json::json!({
            "n": n,
            "m": m,
            "graph": graph_path,
            "observations": obs_path,
            "options": options,
        });
        io::Manifest::new(command_line(), seed, record).write(&dir.join("manifest.json"))?;
    }
    Ok(())
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn cmd_sweep(a: &SweepArgs, seed: Option<u64>, flags: bool, out: &mut dyn Write) -> Result<()> {
    let mut spec: SweepSpec = serde_json::from_str(&io::read_text(&a.spec)?)?;
    if let Some(s) = seed {
        spec.base_seed = s;
    }
    let (csv, summary) = if flags {
        let cmp = compare_flags(&spec, a.jobs)?;
        let gap: Vec<String> = cmp
            .groups_only
            .iter()
            .zip(&cmp.groups_and_vectors)
            .map(|(z, o)| format!("{:.4}", o.success_rate - z.success_rate))
            .collect();
        (cmp.to_csv(), format!("p_star={} rate_gap={}", format_sig(cmp.p_star, 6), gap.join(",")))
    } else {
        let table = sweep(&spec, a.jobs)?;
        let rates: Vec<String> = table.rows.iter().map(|r| format!("{:.4}", r.success_rate)).collect();
        let invalid: usize = table.rows.iter().map(|r| r.invalid).sum();
        (
            table.to_csv(),
            format!("p_star={} rates={} invalid={invalid}", format_sig(table.p_star, 6), rates.join(",")),
        )
    };
    io::write_text(&a.out, &csv)?;
    io::Manifest::new(command_line(), spec.base_seed, &spec).write(&manifest_path(&a.out))?;
    emit(out, format!("wrote={} {summary}", a.out.display()))
}

fn cmd_rmse(a: &RmseArgs, seed: u64, out: &mut dyn Write) -> Result<()> {
    if a.trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    let spec = GaussianSpec {
        n: a.n,
        m: a.m,
        graph: a.graph.required()?,
        p: a.p,
        sigma2: a.sigma2,
        mean_lo: a.mean_lo,
        mean_span: a.mean_span,
        flag: RefineFlag::from_bit(a.flag)?,
        iterations: None,
    };
    let mut csv = String::new();
    let mut wins = 0;
    for t in 0..a.trials {
        let table = rmse_eval(&spec, seed.wrapping_add(t as u64))?;
        let text = table.to_csv();
        if t == 0 {
            csv.push_str(&text);
        } else {
            csv.extend(text.lines().skip(1).map(|l| format!("{l}\n")));
        }
        let prop = table.rmse(RmseMethod::Proposed);
        if prop < table.rmse(RmseMethod::UserAverage) && prop < table.rmse(RmseMethod::ItemAverage) {
            wins += 1;
        }
    }
    io::write_text(&a.out, &csv)?;
    io::Manifest::new(command_line(), seed, serde_json::json!({"spec": spec, "trials": a.trials}))
        .write(&manifest_path(&a.out))?;
    emit(out, format!("wrote={} proposed_best={wins}/{}", a.out.display(), a.trials))
}

fn cmd_oracle(a: &OracleArgs, seed: u64, out: &mut dyn Write) -> Result<()> {
    let rec = read_instance_record(&a.instance)?;
    let config = rec.spec.config.clone();
    let (n, m) = (config.n, config.m);
    let graph: SideGraph = io::read_edge_list(&a.instance.join("graph.txt"), n)?;
    let obs = io::read_triplets(&a.instance.join("observations.txt"), n, m)?;
    let GraphParams { alpha, beta, gamma } = rec.spec.graph;
    let params = TruthParams::new(alpha, beta, gamma, rec.spec.observation.theta)?;
    let options = MleOptions {
        cap: a.cap,
        restrict_delta: match &a.restrict_delta {
            Some(v) => Some(DeltaPair::new(v[0], v[1])?),
            None => None,
        },
    };
    let mle = exhaustive_mle(&obs, &graph, &params, &config, &options)?;
    let mut kv = vec![
        format!("candidates={}", mle.candidates),
        format!("min_l={}", format_sig(mle.min_l, 10)),
        format!("tie={}", mle.tie),
    ];
    let truth_path = a.instance.join("truth.txt");
    if truth_path.exists() {
        let truth = io::read_binary_matrix(&truth_path)?;
        kv.push(format!("mle_is_truth={}", truth == mle.candidate.matrix()));
        let part = io::read_partition(&a.instance.join("partition.txt"), 2, 3)?;
        // the truth's own likelihood, rebuilt from its matrix rows
        let mut vectors = vec![vec![0u8; m]; 6];
        for u in 0..n {
            vectors[part.slot_of(u)] = truth.row(u).to_vec();
        }
        let model = crate::model::RatingModel::new(config.clone(), vectors)?;
        let l_truth = neg_log_likelihood(&Candidate::new(part, model)?, &obs, &graph, &params)?;
        kv.push(format!("truth_l={}", format_sig(l_truth, 10)));
    }
    if a.with_pipeline {
        let res = recover(&obs, &graph, &config, &RecoveryOptions { seed, ..Default::default() })?;
        let l = neg_log_likelihood(&Candidate::new(res.partition, res.vectors)?, &obs, &graph, &params)?;
        kv.push(format!("pipeline_l={}", format_sig(l, 10)));
    }
    if let Some(d) = mle.deltas {
        kv.push(format!("mle_delta_g={} mle_delta_c={}", format_sig(d.delta_g, 6), format_sig(d.delta_c, 6)));
    }
    emit(out, kv.join(" "))
}
