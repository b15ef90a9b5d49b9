//! The four-phase recovery pipeline: graph bisection into clusters,
//! spectral grouping, rating-vector decoding and local refinement, plus the
//! real-valued Gaussian variant.

mod decode;
mod gaussian;
mod spectral;

pub use decode::{
    decode_column, edge_densities, estimate_params, graph_log_weight, phase3_vectors,
    phase4_refine, EstimatedParams, RefineFlag, RefineOutput, PROB_FLOOR,
};
pub use gaussian::{group_means, recover_gaussian, GaussianRecovery, SIGMA2_FLOOR};
pub use spectral::{
    connected_components, kmeans, phase1_cluster, phase2_group, spectral_embedding,
    ClusterLabels, GROUP_POWER_MAX_ITERS, GROUP_POWER_TOL, KMEANS_MAX_ITERS, KMEANS_RESTARTS,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    map_y_to_z, materialize_matrix, BinaryMatrix, HierarchyConfig, Observation, Partition,
    RatingModel, SideGraph,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecoveryOptions {
    pub flag: RefineFlag,
    /// Refinement sweeps; `None` means `ceil(log2 n)`.
    pub iterations: Option<usize>,
    /// Seed for the spectral phases.
    pub seed: u64,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        Self {
            flag: RefineFlag::GroupsAndVectors,
            iterations: None,
            seed: 0,
        }
    }
}

pub fn default_iterations(n: usize) -> usize {
    if n <= 1 {
        1
    } else {
        (n as f64).log2().ceil() as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    /// Cluster labels after the bisection phase.
    pub clusters: Vec<usize>,
    /// Groups after the spectral grouping phase.
    pub initial_groups: Partition,
    pub params: EstimatedParams,
    pub iterations: usize,
    pub moves: Vec<usize>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub partition: Partition,
    pub vectors: RatingModel,
    pub matrix: BinaryMatrix,
    pub diagnostics: Diagnostics,
}

/// Phases 1 and 2: clusters from the graph, then groups inside each cluster.
pub(crate) fn initial_partition(
    graph: &SideGraph,
    config: &HierarchyConfig,
    seed: u64,
    warnings: &mut Vec<String>,
) -> Result<(Vec<usize>, Partition)> {
    let clusters = phase1_cluster(graph, config.c, seed)?;
    warnings.extend(clusters.warnings.iter().cloned());
    let mut group_of = vec![0usize; config.n];
    for x in 0..config.c {
        let members: Vec<usize> = (0..config.n).filter(|&u| clusters.labels[u] == x).collect();
        let labels = phase2_group(graph, &members, config.g, seed)?;
        for (&u, l) in members.iter().zip(labels) {
            group_of[u] = l;
        }
    }
    let part = Partition::new(config.c, config.g, clusters.labels.clone(), group_of)?;
    Ok((clusters.labels, part))
}

fn check_inputs(n: usize, m: usize, graph: &SideGraph, config: &HierarchyConfig) -> Result<()> {
    if config.q != 2 {
        return Err(Error::UnsupportedField(config.q));
    }
    if (config.c, config.g) != (2, 3) {
        return Err(Error::Unsupported(format!(
            "recovery needs (c, g) = (2, 3), got ({}, {})",
            config.c, config.g
        )));
    }
    if n != config.n || m != config.m || graph.n() != config.n {
        return Err(Error::Dimension(format!(
            "observations {n}x{m}, graph on {} vertices, config {}x{}",
            graph.n(),
            config.n,
            config.m
        )));
    }
    Ok(())
}

pub fn recover(
    obs: &Observation,
    graph: &SideGraph,
    config: &HierarchyConfig,
    options: &RecoveryOptions,
) -> Result<RecoveryResult> {
    check_inputs(obs.n(), obs.m(), graph, config)?;
    let mut warnings = Vec::new();
    let (clusters, initial_groups) = initial_partition(graph, config, options.seed, &mut warnings)?;
    let z = map_y_to_z(obs, config.q)?;
    let vectors0 = phase3_vectors(&z, &initial_groups, config)?;
    let params = estimate_params(obs, graph, &initial_groups, &vectors0, &mut warnings);
    let iterations = options.iterations.unwrap_or_else(|| default_iterations(config.n));
    let refined = phase4_refine(
        options.flag,
        iterations,
        obs,
        &z,
        graph,
        &initial_groups,
        &vectors0,
        &params,
    )?;
    warnings.extend(refined.warnings);
    let matrix = materialize_matrix(&refined.vectors, &refined.groups)?;
    Ok(RecoveryResult {
        partition: refined.groups,
        vectors: refined.vectors,
        matrix,
        diagnostics: Diagnostics {
            clusters,
            initial_groups,
            params,
            iterations,
            moves: refined.moves,
            warnings,
        },
    })
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// Users on the wrong side of the bisection, minimized over label swaps.
pub fn cluster_errors(estimate: &[usize], truth: &Partition) -> usize {
    let c = truth.clusters();
    permutations(c)
        .iter()
        .map(|perm| {
            estimate
                .iter()
                .enumerate()
                .filter(|&(u, &x)| perm.get(x).copied() != Some(truth.cluster_of(u)))
                .count()
        })
        .min()
        .unwrap_or(0)
}

/// Users whose (cluster, group) differs from the truth, minimized over
/// cluster relabelings and, independently per cluster, group relabelings.
pub fn misclassified(estimate: &Partition, truth: &Partition) -> usize {
    let (c, g) = (truth.clusters(), truth.groups());
    let group_perms = permutations(g);
    permutations(c)
        .iter()
        .map(|cperm| {
            (0..c)
                .map(|x| {
                    let users: Vec<usize> =
                        (0..estimate.n()).filter(|&u| estimate.cluster_of(u) == x).collect();
                    group_perms
                        .iter()
                        .map(|gperm| {
                            users
                                .iter()
                                .filter(|&&u| {
                                    cperm[x] != truth.cluster_of(u)
                                        || gperm[estimate.group_of(u)] != truth.group_of(u)
                                })
                                .count()
                        })
                        .min()
                        .unwrap_or(0)
                })
                .sum::<usize>()
        })
        .min()
        .unwrap_or(0)
}

/// Misclassification counts of each phase against a known truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseErrors {
    pub clustering: usize,
    pub initial_grouping: usize,
    pub final_grouping: usize,
}

pub fn phase_errors(result: &RecoveryResult, truth: &Partition) -> PhaseErrors {
    PhaseErrors {
        clustering: cluster_errors(&result.diagnostics.clusters, truth),
        initial_grouping: misclassified(&result.diagnostics.initial_groups, truth),
        final_grouping: misclassified(&result.partition, truth),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{
        generate_instance, ColumnSectionProfile, GraphParams, InstanceSpec, ObservationParams,
        ProfileMode,
    };

    #[test]
    fn misclassification_ignores_relabeling() {
        let truth = Partition::from_slots(2, 3, &[0, 0, 1, 1, 2, 3, 4, 5]).unwrap();
        let relabeled = Partition::from_slots(2, 3, &[5, 5, 3, 3, 4, 0, 2, 1]).unwrap();
        assert_eq!(misclassified(&relabeled, &truth), 0);
        let one_off = Partition::from_slots(2, 3, &[5, 3, 3, 3, 4, 0, 2, 1]).unwrap();
        assert_eq!(misclassified(&one_off, &truth), 1);
        assert_eq!(cluster_errors(&[1, 1, 1, 1, 1, 0, 0, 0], &truth), 0);
    }

    #[test]
    fn default_iteration_count() {
        assert_eq!(default_iterations(600), 10);
        assert_eq!(default_iterations(6), 3);
        assert_eq!(default_iterations(512), 9);
    }

    #[test]
    fn noiseless_ideal_graph_is_exact() {
        let spec = InstanceSpec {
            config: HierarchyConfig::standard(120, 40).unwrap(),
            graph: GraphParams::new(1.0, 0.5, 0.0).unwrap(),
            observation: ObservationParams::new(1.0, 0.0).unwrap(),
            profile: ColumnSectionProfile::uniform(),
            mode: ProfileMode::Exact,
        };
        let inst = generate_instance(&spec, 3).unwrap();
        let out = recover(&inst.observations, &inst.graph, &spec.config, &Default::default())
            .unwrap();
        assert_eq!(out.matrix, inst.matrix);
        assert_eq!(out.matrix, materialize_matrix(&out.vectors, &out.partition).unwrap());
        assert_eq!(phase_errors(&out, &inst.partition).final_grouping, 0);
    }

    #[test]
    fn rejects_unsupported_shapes() {
        let cfg = HierarchyConfig::balanced(6, 2, 3, 2, 2, 2).unwrap();
        let obs = Observation::new(6, 2, vec![]).unwrap();
        assert!(matches!(
            recover(&obs, &SideGraph::empty(6), &cfg, &Default::default()),
            Err(Error::Unsupported(_))
        ));
    }
}
