//! Seeded generators for ground-truth instances: rating vectors, user
//! partitions, hierarchical SBM graphs and the erasure/flip rating channel.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    materialize_matrix, BinaryMatrix, DeltaPair, DenseMatrix, Entry, HierarchyConfig,
    Observation, Partition, RatingModel, SideGraph,
};
use crate::rng::{substream, Purpose};

/// Edge probabilities of the hierarchical SBM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphParams {
    /// Same group.
    pub alpha: f64,
    /// Same cluster, different groups.
    pub beta: f64,
    /// Different clusters.
    pub gamma: f64,
}

impl GraphParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain(format!("{name}={v} outside [0, 1]")));
            }
        }
        if !(alpha >= beta && beta >= gamma) {
            return Err(Error::Domain(format!(
                "edge probabilities must satisfy alpha >= beta >= gamma, got ({alpha}, {beta}, {gamma})"
            )));
        }
        Ok(Self { alpha, beta, gamma })
    }

    /// `alpha = alpha_tilde * ln(n) / n`, likewise for beta and gamma.
    pub fn from_tilde(n: usize, alpha_t: f64, beta_t: f64, gamma_t: f64) -> Result<Self> {
        let scale = (n as f64).ln() / n as f64;
        Self::new(alpha_t * scale, beta_t * scale, gamma_t * scale)
    }
}

/// Observation probability and flip probability of the rating channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservationParams {
    pub p: f64,
    pub theta: f64,
}

impl ObservationParams {
    pub fn new(p: f64, theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("p={p} outside [0, 1]")));
        }
        if !(0.0..0.5).contains(&theta) {
            return Err(Error::Domain(format!("theta={theta} outside [0, 1/2)")));
        }
        Ok(Self { p, theta })
    }
}

/// Proportions of the eight column patterns `b1 b2 b3`, indexed by
/// `4 b1 + 2 b2 + b3`. A column of pattern `b1 b2 b3` gives cluster 0 the
/// group values `(1, b1, 1^b1)` and cluster 1 the values `(b2, b3, b2^b3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnSectionProfile {
    pub tau: [f64; 8],
}

impl ColumnSectionProfile {
    pub fn new(tau: [f64; 8]) -> Result<Self> {
        if tau.iter().any(|&t| !(t >= 0.0)) {
            return Err(Error::Domain("column-section proportions must be >= 0".into()));
        }
        let total: f64 = tau.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "column-section proportions sum to {total}, expected 1"
            )));
        }
        Ok(Self { tau })
    }

    pub fn uniform() -> Self {
        Self { tau: [0.125; 8] }
    }

    /// Pattern counts `floor(tau * m)` topped up by largest remainder
    /// (ties toward the lower pattern index).
    pub fn exact_counts(&self, m: usize) -> [usize; 8] {
        let raw: Vec<f64> = self.tau.iter().map(|t| t * m as f64).collect();
        let mut counts = [0usize; 8];
        for (c, r) in counts.iter_mut().zip(&raw) {
            *c = r.floor() as usize;
        }
        let assigned: usize = counts.iter().sum();
        let mut order: Vec<usize> = (0..8).collect();
        order.sort_by(|&a, &b| {
            let ra = raw[a] - raw[a].floor();
            let rb = raw[b] - raw[b].floor();
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        for &l in order.iter().take(m.saturating_sub(assigned)) {
            counts[l] += 1;
        }
        counts
    }
}

/// Group values of one column for pattern index `l`, in slot order.
pub fn column_pattern(l: usize) -> [u8; 6] {
    let b1 = ((l >> 2) & 1) as u8;
    let b2 = ((l >> 1) & 1) as u8;
    let b3 = (l & 1) as u8;
    [1, b1, 1 ^ b1, b2, b3, b2 ^ b3]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileMode {
    /// Every column draws its pattern independently from the profile.
    #[default]
    Sampled,
    /// Deterministic pattern counts, shuffled across columns.
    Exact,
}

pub fn gen_rating_model(
    config: &HierarchyConfig,
    profile: &ColumnSectionProfile,
    mode: ProfileMode,
    seed: u64,
) -> Result<RatingModel> {
    if !config.is_standard() {
        return Err(Error::Unsupported(format!(
            "rating-vector generation needs (c, g, r, q) = (2, 3, 2, 2), got ({}, {}, {}, {})",
            config.c, config.g, config.r, config.q
        )));
    }
    let mut rng = substream(seed, Purpose::Ratings);
    let patterns: Vec<usize> = match mode {
        ProfileMode::Sampled => {
            let dist = WeightedIndex::new(profile.tau)
                .map_err(|e| Error::Domain(format!("column-section profile: {e}")))?;
            (0..config.m).map(|_| dist.sample(&mut rng)).collect()
        }
        ProfileMode::Exact => {
            let counts = profile.exact_counts(config.m);
            let mut p: Vec<usize> = counts
                .iter()
                .enumerate()
                .flat_map(|(l, &k)| std::iter::repeat_n(l, k))
                .collect();
            p.shuffle(&mut rng);
            p
        }
    };
    let mut vectors = vec![vec![0u8; config.m]; 6];
    for (col, &l) in patterns.iter().enumerate() {
        for (slot, v) in column_pattern(l).into_iter().enumerate() {
            vectors[slot][col] = v;
        }
    }
    let model = RatingModel::new(config.clone(), vectors)?;
    model.validate()?;
    Ok(model)
}

/// Shuffles the slot labels implied by `config.group_sizes` over the users.
pub fn gen_partition(config: &HierarchyConfig, seed: u64) -> Result<Partition> {
    config.validate()?;
    let mut slots: Vec<usize> = config
        .group_sizes
        .iter()
        .enumerate()
        .flat_map(|(s, &k)| std::iter::repeat_n(s, k))
        .collect();
    slots.shuffle(&mut substream(seed, Purpose::Partition));
    Partition::from_slots(config.c, config.g, &slots)
}

pub fn gen_hsbm_graph(part: &Partition, params: &GraphParams, seed: u64) -> Result<SideGraph> {
    let params = GraphParams::new(params.alpha, params.beta, params.gamma)?;
    let mut rng = substream(seed, Purpose::Graph);
    let n = part.n();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let prob = if part.cluster_of(u) != part.cluster_of(v) {
                params.gamma
            } else if part.group_of(u) != part.group_of(v) {
                params.beta
            } else {
                params.alpha
            };
            if rng.random::<f64>() < prob {
                edges.push((u, v));
            }
        }
    }
    SideGraph::new(n, edges)
}

/// Erasure/flip channel on a binary matrix. Observation and flip events use
/// separate substreams.
pub fn sample_observations(
    matrix: &BinaryMatrix,
    params: &ObservationParams,
    seed: u64,
) -> Result<Observation> {
    let params = ObservationParams::new(params.p, params.theta)?;
    let mut mask = substream(seed, Purpose::ObservationMask);
    let mut flip = substream(seed, Purpose::ObservationFlip);
    let mut entries = Vec::new();
    for row in 0..matrix.rows() {
        for col in 0..matrix.cols() {
            if mask.random::<f64>() < params.p {
                let mut value = matrix.get(row, col);
                if flip.random::<f64>() < params.theta {
                    value ^= 1;
                }
                entries.push(Entry { row, col, value });
            }
        }
    }
    Observation::new(matrix.rows(), matrix.cols(), entries)
}

/// Full specification of a synthetic binary instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub config: HierarchyConfig,
    pub graph: GraphParams,
    pub observation: ObservationParams,
    pub profile: ColumnSectionProfile,
    #[serde(default)]
    pub mode: ProfileMode,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub partition: Partition,
    pub model: RatingModel,
    pub deltas: DeltaPair,
    pub matrix: BinaryMatrix,
    pub graph: SideGraph,
    pub observations: Observation,
}

pub fn generate_instance(spec: &InstanceSpec, seed: u64) -> Result<Instance> {
    let partition = gen_partition(&spec.config, seed)?;
    let model = gen_rating_model(&spec.config, &spec.profile, spec.mode, seed)?;
    let deltas = model.validate()?;
    let matrix = materialize_matrix(&model, &partition)?;
    let graph = gen_hsbm_graph(&partition, &spec.graph, seed)?;
    let observations = sample_observations(&matrix, &spec.observation, seed)?;
    Ok(Instance {
        partition,
        model,
        deltas,
        matrix,
        graph,
        observations,
    })
}

/// Sparse real-valued observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianObservation {
    pub n: usize,
    pub m: usize,
    /// `(row, col, value)` sorted by `(row, col)`.
    pub entries: Vec<(usize, usize, f64)>,
}

impl GaussianObservation {
    pub fn by_row(&self) -> Vec<Vec<(usize, f64)>> {
        let mut rows = vec![Vec::new(); self.n];
        for &(r, c, v) in &self.entries {
            rows[r].push((c, v));
        }
        rows
    }
}

/// Real-valued group means on `[0, lo + span]`: per cluster, the first two
/// group vectors are uniform and the remaining ones are their average.
pub fn gen_gaussian_means(config: &HierarchyConfig, lo: f64, span: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = substream(seed, Purpose::GaussianMeans);
    let mut means = Vec::with_capacity(config.slots());
    for _ in 0..config.c {
        let v1: Vec<f64> = (0..config.m).map(|_| lo + span * rng.random::<f64>()).collect();
        let v2: Vec<f64> = (0..config.m).map(|_| lo + span * rng.random::<f64>()).collect();
        let mix: Vec<f64> = v1.iter().zip(&v2).map(|(a, b)| 0.5 * (a + b)).collect();
        means.push(v1);
        if config.g > 1 {
            means.push(v2);
        }
        for _ in 2..config.g {
            means.push(mix.clone());
        }
    }
    means
}

/// Samples each entry with probability `p` and adds `N(0, sigma2)` noise to
/// the group mean. Returns the observations and the noiseless truth.
pub fn gen_gaussian_instance(
    config: &HierarchyConfig,
    part: &Partition,
    group_means: &[Vec<f64>],
    sigma2: f64,
    p: f64,
    seed: u64,
) -> Result<(GaussianObservation, DenseMatrix<f64>)> {
    if !(sigma2 >= 0.0) {
        return Err(Error::Domain(format!("sigma2={sigma2} must be >= 0")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("p={p} outside [0, 1]")));
    }
    if group_means.len() != config.slots() || group_means.iter().any(|v| v.len() != config.m) {
        return Err(Error::Dimension("group means do not match config".into()));
    }
    if part.n() != config.n {
        return Err(Error::Dimension("partition size does not match config".into()));
    }
    let noise = Normal::new(0.0, sigma2.sqrt())
        .map_err(|e| Error::Domain(format!("noise distribution: {e}")))?;
    let mut mask = substream(seed, Purpose::ObservationMask);
    let mut rng = substream(seed, Purpose::GaussianNoise);
    let mut truth = DenseMatrix::zeros(config.n, config.m);
    let mut entries = Vec::new();
    for row in 0..config.n {
        let mean = &group_means[part.slot_of(row)];
        for (col, &mu) in mean.iter().enumerate() {
            truth.set(row, col, mu);
            if mask.random::<f64>() < p {
                entries.push((row, col, mu + noise.sample(&mut rng)));
            }
        }
    }
    Ok((
        GaussianObservation {
            n: config.n,
            m: config.m,
            entries,
        },
        truth,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::compute_deltas;

    fn four_sigma(p: f64, trials: usize) -> f64 {
        4.0 * (p * (1.0 - p) / trials as f64).sqrt()
    }

    #[test]
    fn uniform_profile_concentrates_deltas() {
        let cfg = HierarchyConfig::standard(6, 10_000).unwrap();
        let model =
            gen_rating_model(&cfg, &ColumnSectionProfile::uniform(), ProfileMode::Sampled, 3)
                .unwrap();
        let d = compute_deltas(&model).unwrap();
        assert!((d.delta_g - 0.5).abs() <= 0.03, "{d:?}");
        assert!((d.delta_c - 0.5).abs() <= 0.03, "{d:?}");
        assert!(model.is_xor_closed());
    }

    #[test]
    fn exact_uniform_profile_hits_half() {
        let cfg = HierarchyConfig::standard(6, 200).unwrap();
        let model =
            gen_rating_model(&cfg, &ColumnSectionProfile::uniform(), ProfileMode::Exact, 9)
                .unwrap();
        let d = compute_deltas(&model).unwrap();
        assert_eq!(d, DeltaPair { delta_g: 0.5, delta_c: 0.5 });
    }

    #[test]
    fn exact_counts_use_largest_remainder() {
        let p = ColumnSectionProfile::new([0.3, 0.3, 0.4, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(p.exact_counts(7), [2, 2, 3, 0, 0, 0, 0, 0]);
        assert_eq!(ColumnSectionProfile::uniform().exact_counts(10).iter().sum::<usize>(), 10);
    }

    #[test]
    fn single_pattern_profile_is_degenerate() {
        let mut tau = [0.0; 8];
        tau[0] = 1.0;
        let profile = ColumnSectionProfile::new(tau).unwrap();
        let cfg = HierarchyConfig::standard(6, 20).unwrap();
        let err = gen_rating_model(&cfg, &profile, ProfileMode::Sampled, 1).unwrap_err();
        assert!(matches!(err, Error::Degenerate(_)));
    }

    #[test]
    fn rating_model_requires_standard_config() {
        let cfg = HierarchyConfig::balanced(6, 4, 2, 3, 1, 2).unwrap();
        assert!(matches!(
            gen_rating_model(&cfg, &ColumnSectionProfile::uniform(), ProfileMode::Sampled, 0),
            Err(Error::Unsupported(_))
        ));
        assert!(ColumnSectionProfile::new([0.5; 8]).is_err());
    }

    #[test]
    fn generators_are_deterministic() {
        let cfg = HierarchyConfig::standard(60, 30).unwrap();
        let prof = ColumnSectionProfile::uniform();
        let a = gen_rating_model(&cfg, &prof, ProfileMode::Sampled, 5).unwrap();
        let b = gen_rating_model(&cfg, &prof, ProfileMode::Sampled, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(gen_partition(&cfg, 5).unwrap(), gen_partition(&cfg, 5).unwrap());
        let part = gen_partition(&cfg, 5).unwrap();
        let gp = GraphParams::new(0.5, 0.2, 0.1).unwrap();
        assert_eq!(
            gen_hsbm_graph(&part, &gp, 5).unwrap(),
            gen_hsbm_graph(&part, &gp, 5).unwrap()
        );
    }

    #[test]
    fn partition_respects_sizes() {
        let one = HierarchyConfig::standard(6, 1).unwrap();
        let part = gen_partition(&one, 11).unwrap();
        let mut slots: Vec<usize> = (0..6).map(|u| part.slot_of(u)).collect();
        slots.sort_unstable();
        assert_eq!(slots, vec![0, 1, 2, 3, 4, 5]);
        let two = HierarchyConfig::standard(12, 1).unwrap();
        assert_eq!(gen_partition(&two, 2).unwrap().slot_sizes(), vec![2; 6]);
    }

    #[test]
    fn graph_extremes() {
        let cfg = HierarchyConfig::standard(12, 1).unwrap();
        let part = gen_partition(&cfg, 0).unwrap();
        let full = gen_hsbm_graph(&part, &GraphParams::new(1.0, 1.0, 1.0).unwrap(), 0).unwrap();
        assert_eq!(full.edge_count(), 66);
        let none = gen_hsbm_graph(&part, &GraphParams::new(0.0, 0.0, 0.0).unwrap(), 0).unwrap();
        assert_eq!(none.edge_count(), 0);
        assert!(GraphParams::new(0.1, 0.2, 0.0).is_err());
    }

    #[test]
    fn hsbm_edge_frequencies() {
        let cfg = HierarchyConfig::standard(600, 1).unwrap();
        let part = gen_partition(&cfg, 21).unwrap();
        let gp = GraphParams::new(0.2, 0.1, 0.05).unwrap();
        let graph = gen_hsbm_graph(&part, &gp, 21).unwrap();
        let mut pairs = [0usize; 3];
        let mut edges = [0usize; 3];
        for u in 0..600 {
            for v in (u + 1)..600 {
                let kind = if part.cluster_of(u) != part.cluster_of(v) {
                    2
                } else if part.group_of(u) != part.group_of(v) {
                    1
                } else {
                    0
                };
                pairs[kind] += 1;
                edges[kind] += usize::from(graph.has_edge(u, v));
            }
        }
        for (k, prob) in [gp.alpha, gp.beta, gp.gamma].into_iter().enumerate() {
            let freq = edges[k] as f64 / pairs[k] as f64;
            assert!((freq - prob).abs() <= four_sigma(prob, pairs[k]), "{k}: {freq}");
        }
    }

    #[test]
    fn channel_extremes() {
        let m = DenseMatrix::from_rows(vec![vec![0, 1, 1], vec![1, 0, 0]]).unwrap();
        let full = sample_observations(&m, &ObservationParams::new(1.0, 0.0).unwrap(), 4).unwrap();
        assert_eq!(full.len(), 6);
        assert!(full.entries().iter().all(|e| e.value == m.get(e.row, e.col)));
        let none = sample_observations(&m, &ObservationParams::new(0.0, 0.0).unwrap(), 4).unwrap();
        assert!(none.is_empty());
        assert!(ObservationParams::new(0.5, 0.5).is_err());
    }

    #[test]
    fn channel_rates() {
        let (n, m) = (400, 500);
        let mut rows = vec![vec![0u8; m]; n];
        for (r, row) in rows.iter_mut().enumerate() {
            for (c, x) in row.iter_mut().enumerate() {
                *x = ((r * 7 + c * 3) % 2) as u8;
            }
        }
        let mat = DenseMatrix::from_rows(rows).unwrap();
        let obs = sample_observations(&mat, &ObservationParams::new(0.3, 0.1).unwrap(), 8).unwrap();
        let nm = n * m;
        let rate = obs.len() as f64 / nm as f64;
        assert!((rate - 0.3).abs() <= four_sigma(0.3, nm));
        let flips = obs
            .entries()
            .iter()
            .filter(|e| e.value != mat.get(e.row, e.col))
            .count();
        let flip_rate = flips as f64 / obs.len() as f64;
        assert!((flip_rate - 0.1).abs() <= four_sigma(0.1, obs.len()));
    }

    #[test]
    fn gaussian_instance() {
        let cfg = HierarchyConfig::standard(600, 200).unwrap();
        let part = gen_partition(&cfg, 1).unwrap();
        let means = gen_gaussian_means(&cfg, 0.0, 10.0, 1);
        let (obs, truth) = gen_gaussian_instance(&cfg, &part, &means, 0.0, 1.0, 1).unwrap();
        assert_eq!(obs.entries.len(), 600 * 200);
        assert!(obs.entries.iter().all(|&(r, c, v)| v == truth.get(r, c)));

        let (noisy, truth) = gen_gaussian_instance(&cfg, &part, &means, 0.5, 1.0, 2).unwrap();
        let n = noisy.entries.len() as f64;
        let mean: f64 =
            noisy.entries.iter().map(|&(r, c, v)| v - truth.get(r, c)).sum::<f64>() / n;
        assert!(mean.abs() <= 4.0 * 0.5f64.sqrt() / n.sqrt());
        assert!(gen_gaussian_instance(&cfg, &part, &means, 0.5, 0.08, 3).is_ok());
        assert!(gen_gaussian_instance(&cfg, &part, &means, -1.0, 0.08, 3).is_err());
    }
}
