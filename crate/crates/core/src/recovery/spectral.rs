//! Graph-only phases: spectral bisection into clusters and spectral
//! embedding plus k-means into groups.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::model::SideGraph;
use crate::rng::{substream, Purpose, Rng};

/// Subspace-iteration settings for the group embedding.
pub const GROUP_POWER_TOL: f64 = 1e-6;
pub const GROUP_POWER_MAX_ITERS: usize = 300;
pub const KMEANS_RESTARTS: usize = 5;
pub const KMEANS_MAX_ITERS: usize = 100;

const CLUSTER_POWER_TOL: f64 = 1e-9;
const CLUSTER_POWER_MAX_ITERS: usize = 2000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterLabels {
    pub labels: Vec<usize>,
    pub warnings: Vec<String>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

fn remove_component(v: &mut [f64], u: &[f64]) {
    let c = dot(v, u);
    v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
}

pub fn connected_components(graph: &SideGraph) -> usize {
    let n = graph.n();
    let mut seen = vec![false; n];
    let mut count = 0;
    let mut stack = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        count += 1;
        seen[s] = true;
        stack.push(s);
        while let Some(u) = stack.pop() {
            for &v in graph.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    count
}

/// Splits the users into two clusters (labels are defined up to swap).
///
/// Second eigenvector of the lazy normalized adjacency `(I + D^-1/2 A D^-1/2) / 2`
/// by power iteration with the known top eigenvector `D^1/2 1` deflated, sign
/// split, then one synchronous majority-neighbour pass.
pub fn phase1_cluster(graph: &SideGraph, k: usize, seed: u64) -> Result<ClusterLabels> {
    let n = graph.n();
    if k != 2 {
        return Err(Error::Unsupported(format!("cluster recovery supports k = 2, got {k}")));
    }
    if n < k {
        return Err(Error::InvalidConfig(format!("{n} users cannot form {k} clusters")));
    }
    let mut warnings = Vec::new();
    if graph.edge_count() == 0 {
        warnings.push("empty graph: clusters assigned by index".to_string());
        let half = n.div_ceil(2);
        return Ok(ClusterLabels {
            labels: (0..n).map(|u| usize::from(u >= half)).collect(),
            warnings,
        });
    }
    let components = connected_components(graph);
    if components > k {
        warnings.push(format!("graph has {components} connected components, more than {k}"));
    }

    let inv_sqrt_deg: Vec<f64> = (0..n)
        .map(|u| match graph.degree(u) {
            0 => 0.0,
            d => 1.0 / (d as f64).sqrt(),
        })
        .collect();
    let mut top: Vec<f64> = (0..n).map(|u| (graph.degree(u) as f64).sqrt()).collect();
    normalize(&mut top);

    let mut rng = substream(seed, Purpose::Clustering);
    let mut x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    remove_component(&mut x, &top);
    normalize(&mut x);
    let mut y = vec![0.0; n];
    for _ in 0..CLUSTER_POWER_MAX_ITERS {
        for u in 0..n {
            let s: f64 = graph
                .neighbors(u)
                .iter()
                .map(|&v| x[v] * inv_sqrt_deg[v])
                .sum();
            y[u] = 0.5 * (x[u] + inv_sqrt_deg[u] * s);
        }
        remove_component(&mut y, &top);
        if normalize(&mut y) == 0.0 {
            break;
        }
        let diff: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        std::mem::swap(&mut x, &mut y);
        if diff < CLUSTER_POWER_TOL {
            break;
        }
    }

    let mut labels: Vec<usize> = x.iter().map(|&v| usize::from(v < 0.0)).collect();
    let ones = labels.iter().sum::<usize>();
    if ones == 0 || ones == n {
        warnings.push("sign split produced one cluster; splitting at the median".into());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
        for (rank, &u) in order.iter().enumerate() {
            labels[u] = usize::from(rank >= n / 2);
        }
    }

    let prev = labels.clone();
    for (u, label) in labels.iter_mut().enumerate() {
        let mut counts = [0usize; 2];
        for &v in graph.neighbors(u) {
            counts[prev[v]] += 1;
        }
        if counts[0] != counts[1] {
            *label = usize::from(counts[1] > counts[0]);
        }
    }
    Ok(ClusterLabels { labels, warnings })
}

/// Orthonormalizes the columns of the row-major `rows x cols` matrix in
/// place (modified Gram-Schmidt). Columns that collapse are redrawn.
fn orthonormalize(x: &mut [f64], rows: usize, cols: usize, rng: &mut Rng) {
    for k in 0..cols {
        for _attempt in 0..8 {
            for j in 0..k {
                let c: f64 = (0..rows).map(|r| x[r * cols + k] * x[r * cols + j]).sum();
                for r in 0..rows {
                    x[r * cols + k] -= c * x[r * cols + j];
                }
            }
            let norm: f64 = (0..rows).map(|r| x[r * cols + k].powi(2)).sum::<f64>().sqrt();
            if norm > 1e-12 {
                for r in 0..rows {
                    x[r * cols + k] /= norm;
                }
                break;
            }
            for r in 0..rows {
                x[r * cols + k] = rng.random::<f64>() - 0.5;
            }
        }
    }
}

/// Top-`dim` eigenvector embedding of the adjacency restricted to `members`
/// (row-major, one row per member).
pub fn spectral_embedding(
    graph: &SideGraph,
    members: &[usize],
    dim: usize,
    rng: &mut Rng,
) -> Vec<f64> {
    let size = members.len();
    let mut local = vec![usize::MAX; graph.n()];
    for (i, &u) in members.iter().enumerate() {
        local[u] = i;
    }
    let adj: Vec<Vec<usize>> = members
        .iter()
        .map(|&u| {
            graph
                .neighbors(u)
                .iter()
                .filter_map(|&v| (local[v] != usize::MAX).then_some(local[v]))
                .collect()
        })
        .collect();
    // A + d_max I is positive semidefinite, so the dominant subspace is the
    // top algebraic one.
    let shift = adj.iter().map(Vec::len).max().unwrap_or(0) as f64;

    let mut x: Vec<f64> = (0..size * dim).map(|_| rng.random::<f64>() - 0.5).collect();
    orthonormalize(&mut x, size, dim, rng);
    if shift == 0.0 {
        return x;
    }
    let mut y = vec![0.0; size * dim];
    for _ in 0..GROUP_POWER_MAX_ITERS {
        for i in 0..size {
            for k in 0..dim {
                let s: f64 = adj[i].iter().map(|&j| x[j * dim + k]).sum();
                y[i * dim + k] = s + shift * x[i * dim + k];
            }
        }
        orthonormalize(&mut y, size, dim, rng);
        // residual of projecting the old basis onto the new subspace
        let mut resid = 0.0;
        for k in 0..dim {
            let coef: Vec<f64> = (0..dim)
                .map(|j| (0..size).map(|i| x[i * dim + k] * y[i * dim + j]).sum())
                .collect();
            for i in 0..size {
                let proj: f64 = (0..dim).map(|j| coef[j] * y[i * dim + j]).sum();
                resid += (x[i * dim + k] - proj).powi(2);
            }
        }
        std::mem::swap(&mut x, &mut y);
        if resid.sqrt() < GROUP_POWER_TOL {
            break;
        }
    }
    x
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd's k-means with k-means++ seeding; best of `restarts` runs by
/// inertia, earliest run on ties.
pub fn kmeans(points: &[f64], dim: usize, k: usize, restarts: usize, rng: &mut Rng) -> Vec<usize> {
    let count = points.len() / dim;
    let point = |i: usize| &points[i * dim..(i + 1) * dim];
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..restarts.max(1) {
        let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
        centers.push(point(rng.random_range(0..count)).to_vec());
        let mut d2: Vec<f64> = (0..count).map(|i| sq_dist(point(i), &centers[0])).collect();
        while centers.len() < k {
            let total: f64 = d2.iter().sum();
            let next = if total > 0.0 {
                let mut target = rng.random::<f64>() * total;
                let mut pick = count - 1;
                for (i, &d) in d2.iter().enumerate() {
                    if d > 0.0 && target < d {
                        pick = i;
                        break;
                    }
                    target -= d;
                }
                pick
            } else {
                rng.random_range(0..count)
            };
            centers.push(point(next).to_vec());
            for (i, d) in d2.iter_mut().enumerate() {
                *d = d.min(sq_dist(point(i), centers.last().unwrap()));
            }
        }

        let mut labels = vec![0usize; count];
        for iter in 0..KMEANS_MAX_ITERS {
            let mut changed = false;
            for i in 0..count {
                let mut arg = 0;
                let mut low = f64::INFINITY;
                for (c, center) in centers.iter().enumerate() {
                    let d = sq_dist(point(i), center);
                    if d < low {
                        low = d;
                        arg = c;
                    }
                }
                if labels[i] != arg {
                    labels[i] = arg;
                    changed = true;
                }
            }
            if !changed && iter > 0 {
                break;
            }
            let mut sums = vec![vec![0.0; dim]; k];
            let mut sizes = vec![0usize; k];
            for i in 0..count {
                sizes[labels[i]] += 1;
                for (s, x) in sums[labels[i]].iter_mut().zip(point(i)) {
                    *s += x;
                }
            }
            for c in 0..k {
                if sizes[c] > 0 {
                    centers[c] = sums[c].iter().map(|s| s / sizes[c] as f64).collect();
                } else {
                    // re-seed an empty cluster at the point farthest from its center
                    let far = (0..count)
                        .max_by(|&a, &b| {
                            sq_dist(point(a), &centers[labels[a]])
                                .total_cmp(&sq_dist(point(b), &centers[labels[b]]))
                        })
                        .unwrap_or(0);
                    centers[c] = point(far).to_vec();
                    labels[far] = c;
                }
            }
        }
        let inertia: f64 = (0..count).map(|i| sq_dist(point(i), &centers[labels[i]])).sum();
        if best.as_ref().is_none_or(|(b, _)| inertia < *b) {
            best = Some((inertia, labels));
        }
    }
    best.map(|(_, l)| l).unwrap_or_default()
}

/// Splits `members` (users of one cluster) into `g` groups. Labels are
/// returned in the order of `members`.
pub fn phase2_group(graph: &SideGraph, members: &[usize], g: usize, seed: u64) -> Result<Vec<usize>> {
    if g < 2 {
        return Err(Error::InvalidConfig(format!("group count g={g} must be at least 2")));
    }
    if members.len() < g {
        return Err(Error::InvalidConfig(format!(
            "cluster of {} users cannot form {g} groups",
            members.len()
        )));
    }
    let mut rng = substream(seed ^ members[0] as u64, Purpose::Clustering);
    let embedding = spectral_embedding(graph, members, g, &mut rng);
    Ok(kmeans(&embedding, g, g, KMEANS_RESTARTS, &mut rng))
}
