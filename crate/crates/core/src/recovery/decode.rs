//! Rating-vector decoding, parameter estimation and local refinement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DenseMatrix, HierarchyConfig, Observation, Partition, RatingModel, SideGraph};

/// Lower clamp for probability estimates entering log-weights.
pub const PROB_FLOOR: f64 = 1e-4;

/// Decodes the three group vectors of every cluster column by column.
///
/// With `d_i` the sum of the group's `Z` entries in the column, the group
/// with the largest `d_i` (lowest index on ties) gets 0 and the other two
/// share a value: 0 when their sums add up to `>= 0`, 1 otherwise. Every
/// decoded column of a cluster therefore has even parity.
pub fn phase3_vectors(
    z: &DenseMatrix<i8>,
    groups: &Partition,
    config: &HierarchyConfig,
) -> Result<RatingModel> {
    if config.q != 2 {
        return Err(Error::UnsupportedField(config.q));
    }
    if config.g != 3 || groups.groups() != 3 {
        return Err(Error::Unsupported("vector decoding needs three groups per cluster".into()));
    }
    if z.rows() != groups.n() || z.cols() != config.m || groups.clusters() != config.c {
        return Err(Error::Dimension(format!(
            "Z is {}x{}, partition has {} users in {} clusters, config m={} c={}",
            z.rows(),
            z.cols(),
            groups.n(),
            groups.clusters(),
            config.m,
            config.c
        )));
    }
    let m = config.m;
    let mut sums = vec![0i64; config.slots() * m];
    for r in 0..z.rows() {
        let base = groups.slot_of(r) * m;
        for (c, &v) in z.row(r).iter().enumerate() {
            sums[base + c] += i64::from(v);
        }
    }
    let mut vectors = vec![vec![0u8; m]; config.slots()];
    for x in 0..config.c {
        for c in 0..m {
            let d = [
                sums[(3 * x) * m + c],
                sums[(3 * x + 1) * m + c],
                sums[(3 * x + 2) * m + c],
            ];
            let bits = decode_column(d);
            for (i, b) in bits.into_iter().enumerate() {
                vectors[3 * x + i][c] = b;
            }
        }
    }
    RatingModel::new(config.clone(), vectors)
}

/// One column of the three-group decoder.
pub fn decode_column(d: [i64; 3]) -> [u8; 3] {
    let mut j = 0;
    for i in 1..3 {
        if d[i] > d[j] {
            j = i;
        }
    }
    let rest: i64 = (0..3).filter(|&i| i != j).map(|i| d[i]).sum();
    let other = u8::from(rest < 0);
    let mut out = [other; 3];
    out[j] = 0;
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatedParams {
    /// Within-group edge density of the estimated groups (0 without pairs).
    pub alpha_hat: f64,
    /// Cross-group, same-cluster edge density.
    pub beta_hat: f64,
    /// Disagreement rate, clamped to `[PROB_FLOOR, 1/2 - PROB_FLOOR]`.
    pub theta_hat: f64,
    /// `ln((1 - theta) / theta)`.
    pub rating_weight: f64,
    /// `ln((1 - beta) alpha / ((1 - alpha) beta))` on clamped estimates, or 0
    /// when `alpha_hat <= beta_hat`.
    pub graph_weight: f64,
}

/// Graph weight of the refinement score from raw edge densities.
pub fn graph_log_weight(alpha_hat: f64, beta_hat: f64) -> f64 {
    if alpha_hat <= beta_hat {
        return 0.0;
    }
    let a = alpha_hat.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
    let b = beta_hat.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
    (((1.0 - b) * a) / ((1.0 - a) * b)).ln()
}

/// Edge densities within groups and across groups of the same cluster.
pub fn edge_densities(graph: &SideGraph, groups: &Partition) -> (f64, f64) {
    let sizes = groups.slot_sizes();
    let gcount = groups.groups();
    let mut within_pairs = 0usize;
    let mut across_pairs = 0usize;
    for x in 0..groups.clusters() {
        let s = &sizes[x * gcount..(x + 1) * gcount];
        for i in 0..gcount {
            within_pairs += s[i] * s[i].saturating_sub(1) / 2;
            for j in (i + 1)..gcount {
                across_pairs += s[i] * s[j];
            }
        }
    }
    let (mut within, mut across) = (0usize, 0usize);
    for &(u, v) in graph.edges() {
        if groups.cluster_of(u) == groups.cluster_of(v) {
            if groups.group_of(u) == groups.group_of(v) {
                within += 1;
            } else {
                across += 1;
            }
        }
    }
    let ratio = |e: usize, p: usize| if p == 0 { 0.0 } else { e as f64 / p as f64 };
    (ratio(within, within_pairs), ratio(across, across_pairs))
}

pub fn estimate_params(
    obs: &Observation,
    graph: &SideGraph,
    groups: &Partition,
    vectors: &RatingModel,
    warnings: &mut Vec<String>,
) -> EstimatedParams {
    let (alpha_hat, beta_hat) = edge_densities(graph, groups);
    let theta_hat = if obs.is_empty() {
        warnings.push("no observed entries: theta estimate set to its floor".into());
        PROB_FLOOR
    } else {
        let wrong = obs
            .entries()
            .iter()
            .filter(|e| {
                let v = vectors.vector(groups.cluster_of(e.row), groups.group_of(e.row));
                e.value != v[e.col]
            })
            .count();
        (wrong as f64 / obs.len() as f64).clamp(PROB_FLOOR, 0.5 - PROB_FLOOR)
    };
    EstimatedParams {
        alpha_hat,
        beta_hat,
        theta_hat,
        rating_weight: ((1.0 - theta_hat) / theta_hat).ln(),
        graph_weight: graph_log_weight(alpha_hat, beta_hat),
    }
}

/// Refinement mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RefineFlag {
    /// Refine groups only; vectors stay as decoded initially.
    GroupsOnly,
    /// Re-decode the vectors after every sweep.
    #[default]
    GroupsAndVectors,
}

impl RefineFlag {
    pub fn from_bit(bit: u8) -> Result<Self> {
        match bit {
            0 => Ok(RefineFlag::GroupsOnly),
            1 => Ok(RefineFlag::GroupsAndVectors),
            b => Err(Error::Domain(format!("refinement flag must be 0 or 1, got {b}"))),
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            RefineFlag::GroupsOnly => 0,
            RefineFlag::GroupsAndVectors => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefineOutput {
    pub groups: Partition,
    pub vectors: RatingModel,
    /// Users whose group changed, per sweep.
    pub moves: Vec<usize>,
    pub warnings: Vec<String>,
}

/// Synchronous local refinement. In every sweep each user moves to the
/// group of its own cluster maximizing
/// `matches * rating_weight + edges * graph_weight`, where `matches` counts
/// observed entries agreeing with the group vector and `edges` the user's
/// neighbours in that group at the previous sweep. Ties keep the lowest
/// group index. Clusters never change.
#[allow(clippy::too_many_arguments)]
pub fn phase4_refine(
    flag: RefineFlag,
    sweeps: usize,
    obs: &Observation,
    z: &DenseMatrix<i8>,
    graph: &SideGraph,
    groups: &Partition,
    vectors: &RatingModel,
    params: &EstimatedParams,
) -> Result<RefineOutput> {
    let config = vectors.config().clone();
    let gcount = groups.groups();
    let rows = obs.by_row();
    let mut current = groups.clone();
    let mut vecs = vectors.clone();
    let mut moves = Vec::with_capacity(sweeps);
    let mut warnings = Vec::new();
    let mut emptied = false;
    for _ in 0..sweeps {
        let mut next = current.group_labels().to_vec();
        let mut edge_counts = vec![0usize; gcount];
        for (r, label) in next.iter_mut().enumerate() {
            let x = current.cluster_of(r);
            edge_counts.iter_mut().for_each(|e| *e = 0);
            for &w in graph.neighbors(r) {
                if current.cluster_of(w) == x {
                    edge_counts[current.group_of(w)] += 1;
                }
            }
            let mut best = 0;
            let mut best_score = f64::NEG_INFINITY;
            for (i, &edges) in edge_counts.iter().enumerate() {
                let v = vecs.vector(x, i);
                let matches = rows[r].iter().filter(|&&(c, y)| v[c] == y).count();
                let score =
                    matches as f64 * params.rating_weight + edges as f64 * params.graph_weight;
                if score > best_score {
                    best_score = score;
                    best = i;
                }
            }
            *label = best;
        }
        let moved = next
            .iter()
            .zip(current.group_labels())
            .filter(|(a, b)| a != b)
            .count();
        moves.push(moved);
        current = Partition::new(
            current.clusters(),
            gcount,
            current.cluster_labels().to_vec(),
            next,
        )?;
        if !emptied && current.slot_sizes().contains(&0) {
            emptied = true;
            warnings.push("refinement emptied a group".into());
        }
        if flag == RefineFlag::GroupsAndVectors {
            vecs = phase3_vectors(z, &current, &config)?;
        }
    }
    Ok(RefineOutput {
        groups: current,
        vectors: vecs,
        moves,
        warnings,
    })
}
