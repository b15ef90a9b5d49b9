use std::collections::HashMap;

use super::decode::{edge_densities, graph_log_weight};
use super::{default_iterations, initial_partition, RecoveryOptions};
use crate::error::{Error, Result};
use crate::model::{DenseMatrix, HierarchyConfig, Partition, SideGraph};
use crate::synth::GaussianObservation;

/// Smallest residual variance used to form `lambda`.
pub const SIGMA2_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianRecovery {
    pub partition: Partition,
    /// Group means in slot order (`cluster * g + group`).
    pub means: Vec<Vec<f64>>,
    pub matrix: DenseMatrix<f64>,
    pub sigma2_hat: f64,
    /// Rating-term scale `1 / (2 sigma2_hat)`.
    pub lambda: f64,
    pub graph_weight: f64,
    pub iterations: usize,
    pub moves: Vec<usize>,
    pub warnings: Vec<String>,
}

/// Per-group per-item means; items a group never observed fall back to the
/// item's global mean, and unobserved items to the overall mean.
pub fn group_means(
    rows: &[Vec<(usize, f64)>],
    part: &Partition,
    m: usize,
) -> Vec<Vec<f64>> {
    let slots = part.clusters() * part.groups();
    let mut sum = vec![vec![0.0; m]; slots];
    let mut cnt = vec![vec![0usize; m]; slots];
    let mut item_sum = vec![0.0; m];
    let mut item_cnt = vec![0usize; m];
    for (r, row) in rows.iter().enumerate() {
        let s = part.slot_of(r);
        for &(c, v) in row {
            sum[s][c] += v;
            cnt[s][c] += 1;
            item_sum[c] += v;
            item_cnt[c] += 1;
        }
    }
    let total: usize = item_cnt.iter().sum();
    let overall = if total == 0 { 0.0 } else { item_sum.iter().sum::<f64>() / total as f64 };
    let item_mean: Vec<f64> = (0..m)
        .map(|c| if item_cnt[c] == 0 { overall } else { item_sum[c] / item_cnt[c] as f64 })
        .collect();
    (0..slots)
        .map(|s| {
            (0..m)
                .map(|c| if cnt[s][c] == 0 { item_mean[c] } else { sum[s][c] / cnt[s][c] as f64 })
                .collect()
        })
        .collect()
}

fn residual_variance(rows: &[Vec<(usize, f64)>], part: &Partition, means: &[Vec<f64>]) -> f64 {
    let mut sse = 0.0;
    let mut count = 0usize;
    for (r, row) in rows.iter().enumerate() {
        let mu = &means[part.slot_of(r)];
        for &(c, v) in row {
            sse += (v - mu[c]).powi(2);
            count += 1;
        }
    }
    if count == 0 {
        0.0
    } else {
        sse / count as f64
    }
}

/// Real-valued pipeline: the same graph phases, group-mean estimation and a
/// refinement that scores group `i` for user `r` as
/// `-rmse(r, i) * m_obs(r) * lambda + edges(r, i) * graph_weight`.
pub fn recover_gaussian(
    obs: &GaussianObservation,
    graph: &SideGraph,
    config: &HierarchyConfig,
    options: &RecoveryOptions,
) -> Result<GaussianRecovery> {
    if obs.n != config.n || obs.m != config.m || graph.n() != config.n {
        return Err(Error::Dimension(format!(
            "observations {}x{}, graph on {} vertices, config {}x{}",
            obs.n,
            obs.m,
            graph.n(),
            config.n,
            config.m
        )));
    }
    let mut seen = HashMap::new();
    for &(r, c, v) in &obs.entries {
        if r >= obs.n || c >= obs.m || !v.is_finite() {
            return Err(Error::Domain(format!("bad observation ({r}, {c}, {v})")));
        }
        if seen.insert((r, c), ()).is_some() {
            return Err(Error::Domain(format!("duplicate observation ({r}, {c})")));
        }
    }
    let mut warnings = Vec::new();
    let (_, groups0) = initial_partition(graph, config, options.seed, &mut warnings)?;
    let rows = obs.by_row();
    let mut means = group_means(&rows, &groups0, config.m);
    let sigma2_hat = residual_variance(&rows, &groups0, &means);
    let lambda = 1.0 / (2.0 * sigma2_hat.max(SIGMA2_FLOOR));
    let (alpha_hat, beta_hat) = edge_densities(graph, &groups0);
    let graph_weight = graph_log_weight(alpha_hat, beta_hat);
    let iterations = options.iterations.unwrap_or_else(|| default_iterations(config.n));
    let gcount = config.g;

    let mut current = groups0;
    let mut moves = Vec::with_capacity(iterations);
    let mut emptied = false;
    for _ in 0..iterations {
        let mut next = current.group_labels().to_vec();
        let mut edges = vec![0usize; gcount];
        for (r, label) in next.iter_mut().enumerate() {
            let x = current.cluster_of(r);
            edges.iter_mut().for_each(|e| *e = 0);
            for &w in graph.neighbors(r) {
                if current.cluster_of(w) == x {
                    edges[current.group_of(w)] += 1;
                }
            }
            let m_obs = rows[r].len() as f64;
            let mut best = 0;
            let mut best_score = f64::NEG_INFINITY;
            for (i, &e) in edges.iter().enumerate() {
                let mu = &means[x * gcount + i];
                let rmse = if rows[r].is_empty() {
                    0.0
                } else {
                    (rows[r].iter().map(|&(c, v)| (v - mu[c]).powi(2)).sum::<f64>() / m_obs)
                        .sqrt()
                };
                let score = -rmse * m_obs * lambda + e as f64 * graph_weight;
                if score > best_score {
                    best = i;
                    best_score = score;
                }
            }
            *label = best;
        }
        let moved = next
            .iter()
            .zip(current.group_labels())
            .filter(|(a, b)| a != b)
            .count();
        current = Partition::new(config.c, gcount, current.cluster_labels().to_vec(), next)?;
        moves.push(moved);
        if !emptied && current.slot_sizes().contains(&0) {
            emptied = true;
            warnings.push("a group became empty during refinement".into());
        }
        if options.flag == super::RefineFlag::GroupsAndVectors {
            means = group_means(&rows, &current, config.m);
        }
    }

    let mut matrix = DenseMatrix::zeros(config.n, config.m);
    for r in 0..config.n {
        for (c, &v) in means[current.slot_of(r)].iter().enumerate() {
            matrix.set(r, c, v);
        }
    }
    Ok(GaussianRecovery {
        partition: current,
        means,
        matrix,
        sigma2_hat,
        lambda,
        graph_weight,
        iterations,
        moves,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_of_two_observations() {
        let part = Partition::from_slots(2, 3, &[0, 0, 1, 2, 3, 4, 5]).unwrap();
        let mut rows = vec![Vec::new(); 7];
        rows[0].push((0, 3.0));
        rows[1].push((0, 5.0));
        let means = group_means(&rows, &part, 2);
        assert_eq!(means[0][0], 4.0);
        // no data for slot 1 item 0: global item mean; item 1: overall mean
        assert_eq!(means[1][0], 4.0);
        assert_eq!(means[1][1], 4.0);
    }
}
