//! Exact likelihood of candidate (partition, vectors) pairs and exhaustive
//! maximum-likelihood search on tiny instances.
//!
//! For a candidate matrix `X` the negative log-likelihood kept here is
//!
//! ```text
//! L(X) = ln((1-theta)/theta) * Lambda(Y, X)
//!      + sum over mu in {alpha, beta, gamma} of ln((1-mu)/mu) * e_mu - ln(1-mu) * |P_mu|
//! ```
//!
//! and `exp(-L(X) + log_offset(..))` is the joint probability of the graph
//! and the observed values given `X` and the observed positions, where the
//! offset is `|Omega| ln p + (nm - |Omega|) ln(1-p) + |Omega| ln(1-theta)`.
//! Boundary parameters use `0 * ln 0 = 0`, so impossible events give
//! `L = +inf` instead of NaN.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    compute_deltas, materialize_matrix, BinaryMatrix, DeltaPair, HierarchyConfig, Observation,
    Partition, RatingModel, SideGraph,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub partition: Partition,
    pub vectors: RatingModel,
}

impl Candidate {
    pub fn new(partition: Partition, vectors: RatingModel) -> Result<Self> {
        let cfg = vectors.config();
        if partition.n() != cfg.n {
            return Err(Error::Dimension(format!(
                "partition has {} users, vectors expect n={}",
                partition.n(),
                cfg.n
            )));
        }
        if (cfg.g, cfg.q) == (3, 2) && !vectors.is_xor_closed() {
            return Err(Error::Degenerate("candidate vectors are not xor-closed".into()));
        }
        materialize_matrix(&vectors, &partition)?;
        Ok(Self { partition, vectors })
    }

    pub fn matrix(&self) -> BinaryMatrix {
        materialize_matrix(&self.vectors, &self.partition).expect("checked in Candidate::new")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PairCounts {
    pub p_alpha: u64,
    pub p_beta: u64,
    pub p_gamma: u64,
    pub e_alpha: u64,
    pub e_beta: u64,
    pub e_gamma: u64,
}

pub fn count_pairs_and_edges(part: &Partition, graph: &SideGraph) -> Result<PairCounts> {
    if part.n() != graph.n() {
        return Err(Error::Dimension(format!(
            "partition has {} users, graph {} vertices",
            part.n(),
            graph.n()
        )));
    }
    let mut pc = PairCounts::default();
    let n = part.n();
    for u in 0..n {
        for v in (u + 1)..n {
            let edge = u64::from(graph.has_edge(u, v));
            if part.cluster_of(u) != part.cluster_of(v) {
                pc.p_gamma += 1;
                pc.e_gamma += edge;
            } else if part.group_of(u) != part.group_of(v) {
                pc.p_beta += 1;
                pc.e_beta += edge;
            } else {
                pc.p_alpha += 1;
                pc.e_alpha += edge;
            }
        }
    }
    Ok(pc)
}

/// `|P_alpha|, |P_beta|, |P_gamma|` when all `c g` groups have `s` users.
pub fn equal_size_pair_sizes(c: usize, g: usize, s: usize) -> (u64, u64, u64) {
    let (c, g, s) = (c as u64, g as u64, s as u64);
    let choose2 = |k: u64| k * k.saturating_sub(1) / 2;
    (c * g * choose2(s), c * choose2(g) * s * s, choose2(c) * (g * s) * (g * s))
}

pub fn count_disagreements(obs: &Observation, x: &BinaryMatrix) -> Result<usize> {
    if obs.n() != x.rows() || obs.m() != x.cols() {
        return Err(Error::Dimension(format!(
            "observations are {}x{}, matrix {}x{}",
            obs.n(),
            obs.m(),
            x.rows(),
            x.cols()
        )));
    }
    Ok(obs
        .entries()
        .iter()
        .filter(|e| e.value != x.get(e.row, e.col))
        .count())
}

/// Generating parameters assumed known by the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub theta: f64,
}

impl TruthParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, theta: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain(format!("{name}={v} outside [0, 1]")));
            }
        }
        if !(0.0..=0.5).contains(&theta) {
            return Err(Error::Domain(format!("theta={theta} outside [0, 1/2]")));
        }
        Ok(Self {
            alpha,
            beta,
            gamma,
            theta,
        })
    }
}

/// `k ln x` with `0 ln 0 = 0`.
fn xlogy(k: f64, x: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        k * x.ln()
    }
}

/// `-ln` of `mu^e (1-mu)^(pairs-e)`.
fn pair_term(mu: f64, e: u64, pairs: u64) -> f64 {
    -(xlogy(e as f64, mu) + xlogy((pairs - e) as f64, 1.0 - mu))
}

/// Rating part of `L` for `lambda` disagreements.
fn rating_term(theta: f64, lambda: usize) -> f64 {
    if lambda == 0 {
        0.0
    } else if theta == 0.0 {
        f64::INFINITY
    } else {
        ((1.0 - theta) / theta).ln() * lambda as f64
    }
}

fn graph_term(params: &TruthParams, pc: &PairCounts) -> f64 {
    pair_term(params.alpha, pc.e_alpha, pc.p_alpha)
        + pair_term(params.beta, pc.e_beta, pc.p_beta)
        + pair_term(params.gamma, pc.e_gamma, pc.p_gamma)
}

pub fn neg_log_likelihood(
    cand: &Candidate,
    obs: &Observation,
    graph: &SideGraph,
    params: &TruthParams,
) -> Result<f64> {
    let lambda = count_disagreements(obs, &cand.matrix())?;
    let pc = count_pairs_and_edges(&cand.partition, graph)?;
    Ok(rating_term(params.theta, lambda) + graph_term(params, &pc))
}

/// Log of the candidate-independent factor `p^|Omega| (1-p)^(nm-|Omega|) (1-theta)^|Omega|`.
pub fn log_offset(observed: usize, n: usize, m: usize, p: f64, theta: f64) -> f64 {
    let k = observed as f64;
    xlogy(k, p) + xlogy((n * m - observed) as f64, 1.0 - p) + xlogy(k, 1.0 - theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleOptions {
    /// Largest number of candidates the search may visit.
    pub cap: u128,
    /// Keep only candidates whose `(delta_g, delta_c)` equal this pair.
    pub restrict_delta: Option<DeltaPair>,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            cap: 10_000_000,
            restrict_delta: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MleResult {
    pub candidate: Candidate,
    pub min_l: f64,
    /// Another candidate with a different matrix reaches `min_l`.
    pub tie: bool,
    /// Candidates visited.
    pub candidates: u128,
    /// Delta pair of the winner, `None` when degenerate.
    pub deltas: Option<DeltaPair>,
}

const TIE_REL: f64 = 1e-9;

fn near(a: f64, b: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= TIE_REL * a.abs().max(b.abs()).max(1.0)
}

fn multinomial(sizes: &[usize]) -> Option<u128> {
    let mut out: u128 = 1;
    let mut k: u128 = 0;
    for &s in sizes {
        for i in 1..=s as u128 {
            k += 1;
            out = out.checked_mul(k)? / i;
        }
    }
    Some(out)
}

/// All label sequences with `sizes[s]` copies of each label `s`, in
/// lexicographic order.
fn labeled_partitions(sizes: &[usize]) -> Vec<Vec<usize>> {
    fn rec(left: &mut Vec<usize>, cur: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for s in 0..left.len() {
            if left[s] > 0 {
                left[s] -= 1;
                cur.push(s);
                rec(left, cur, n, out);
                cur.pop();
                left[s] += 1;
            }
        }
    }
    let n = sizes.iter().sum();
    let mut out = Vec::new();
    rec(&mut sizes.to_vec(), &mut Vec::with_capacity(n), n, &mut out);
    out
}

/// Bit `m-1-c` of the integer holds column `c`, so integer order is
/// lexicographic order on vectors.
fn unpack(bits: u64, m: usize) -> Vec<u8> {
    (0..m).map(|c| ((bits >> (m - 1 - c)) & 1) as u8).collect()
}

fn cluster_vectors(index: u64, m: usize) -> [u64; 3] {
    let v1 = index >> m;
    let v2 = index & ((1u64 << m) - 1);
    [v1, v2, v1 ^ v2]
}

/// Exhaustive MLE over all labeled partitions with the configured group
/// sizes and all `(v_1, v_2)` pairs per cluster (`v_3 = v_1 ^ v_2`).
///
/// Enumeration order: partitions in lexicographic order of the per-user
/// slot labels; within a partition, the per-cluster pair index
/// `v_1 * 2^m + v_2` as a mixed-radix number with cluster 0 most
/// significant. The first minimizer in this order is returned.
pub fn exhaustive_mle(
    obs: &Observation,
    graph: &SideGraph,
    params: &TruthParams,
    config: &HierarchyConfig,
    options: &MleOptions,
) -> Result<MleResult> {
    if (config.g, config.r, config.q) != (3, 2, 2) {
        return Err(Error::Unsupported(
            "exhaustive search needs (g, r, q) = (3, 2, 2)".into(),
        ));
    }
    let (n, m, c) = (config.n, config.m, config.c);
    if obs.n() != n || obs.m() != m || graph.n() != n {
        return Err(Error::Dimension("observations or graph do not match config".into()));
    }
    let too_large = |candidates| Error::TooLarge {
        candidates,
        cap: options.cap,
    };
    if 2 * m * c >= 128 || m >= 32 {
        return Err(too_large(u128::MAX));
    }
    let per_cluster = 1u64 << (2 * m);
    let total = multinomial(&config.group_sizes)
        .and_then(|p| p.checked_mul(1u128 << (2 * m * c)))
        .ok_or_else(|| too_large(u128::MAX))?;
    if total > options.cap {
        return Err(too_large(total));
    }

    // observed positions and values per user, packed like the vectors
    let mut mask = vec![0u64; n];
    let mut vals = vec![0u64; n];
    for e in obs.entries() {
        let bit = 1u64 << (m - 1 - e.col);
        mask[e.row] |= bit;
        if e.value == 1 {
            vals[e.row] |= bit;
        }
    }

    let mut best: Option<(f64, Vec<usize>, Vec<u64>)> = None;
    let mut tie = false;
    let mut visited: u128 = 0;
    for labels in labeled_partitions(&config.group_sizes) {
        let part = Partition::from_slots(c, 3, &labels)?;
        let gterm = graph_term(params, &count_pairs_and_edges(&part, graph)?);
        // disagreements of each cluster under each vector pair
        let lambda: Vec<Vec<usize>> = (0..c)
            .map(|x| {
                (0..per_cluster)
                    .map(|idx| {
                        let v = cluster_vectors(idx, m);
                        (0..n)
                            .filter(|&u| part.cluster_of(u) == x)
                            .map(|u| ((v[part.group_of(u)] ^ vals[u]) & mask[u]).count_ones() as usize)
                            .sum()
                    })
                    .collect()
            })
            .collect();
        let mut idx = vec![0u64; c];
        loop {
            visited += 1;
            let keep = match options.restrict_delta {
                None => true,
                Some(d) => candidate_deltas(config, &idx)
                    .is_some_and(|cd| near(cd.delta_g, d.delta_g) && near(cd.delta_c, d.delta_c)),
            };
            if keep {
                let dis: usize = (0..c).map(|x| lambda[x][idx[x] as usize]).sum();
                let l = rating_term(params.theta, dis) + gterm;
                match &best {
                    None => best = Some((l, labels.clone(), idx.clone())),
                    Some((bl, bl_labels, bl_idx)) => {
                        if near(l, *bl) {
                            if !tie && !same_matrix(m, &labels, &idx, bl_labels, bl_idx) {
                                tie = true;
                            }
                        } else if l < *bl {
                            best = Some((l, labels.clone(), idx.clone()));
                            tie = false;
                        }
                    }
                }
            }
            // odometer, last cluster fastest
            let mut k = c;
            loop {
                if k == 0 {
                    break;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < per_cluster {
                    break;
                }
                idx[k] = 0;
                if k == 0 {
                    k = usize::MAX;
                    break;
                }
            }
            if k == usize::MAX {
                break;
            }
        }
    }

    let (min_l, labels, idx) = best.ok_or_else(|| {
        Error::Degenerate("no candidate satisfies the delta restriction".into())
    })?;
    let vectors = vectors_for(config, &idx)?;
    let deltas = compute_deltas(&vectors).ok();
    Ok(MleResult {
        candidate: Candidate::new(Partition::from_slots(c, 3, &labels)?, vectors)?,
        min_l,
        tie,
        candidates: visited,
        deltas,
    })
}

fn vectors_for(config: &HierarchyConfig, idx: &[u64]) -> Result<RatingModel> {
    let vectors = idx
        .iter()
        .flat_map(|&k| cluster_vectors(k, config.m).map(|v| unpack(v, config.m)))
        .collect();
    RatingModel::new(config.clone(), vectors)
}

fn candidate_deltas(config: &HierarchyConfig, idx: &[u64]) -> Option<DeltaPair> {
    compute_deltas(&vectors_for(config, idx).ok()?).ok()
}

fn same_matrix(m: usize, la: &[usize], ia: &[u64], lb: &[usize], ib: &[u64]) -> bool {
    let row = |labels: &[usize], idx: &[u64], u: usize| {
        let s = labels[u];
        cluster_vectors(idx[s / 3], m)[s % 3]
    };
    (0..la.len()).all(|u| row(la, ia, u) == row(lb, ib, u))
}
