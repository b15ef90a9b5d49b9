//! Domain types shared by every other module.
//!
//! All indices are 0-based: users `0..n`, items `0..m`, clusters `0..c` and
//! groups `0..g` within a cluster. A (cluster, group) pair is flattened to
//! the slot index `cluster * g + group` wherever a single index is needed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Problem dimensions and group sizes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HierarchyConfig {
    pub n: usize,
    pub m: usize,
    pub c: usize,
    pub g: usize,
    pub r: usize,
    pub q: u32,
    /// User count of each slot `cluster * g + group`.
    pub group_sizes: Vec<usize>,
}

impl HierarchyConfig {
    pub fn new(
        n: usize,
        m: usize,
        c: usize,
        g: usize,
        r: usize,
        q: u32,
        group_sizes: Vec<usize>,
    ) -> Result<Self> {
        let config = Self {
            n,
            m,
            c,
            g,
            r,
            q,
            group_sizes,
        };
        config.validate()?;
        Ok(config)
    }

    /// `(c, g, r, q)` with `n` users spread as evenly as possible; the first
    /// `n mod (c g)` slots receive one extra user.
    pub fn balanced(n: usize, m: usize, c: usize, g: usize, r: usize, q: u32) -> Result<Self> {
        let slots = c * g;
        if slots == 0 {
            return Err(Error::InvalidConfig("c and g must be at least 1".into()));
        }
        let base = n / slots;
        let extra = n % slots;
        let sizes = (0..slots).map(|s| base + usize::from(s < extra)).collect();
        Self::new(n, m, c, g, r, q, sizes)
    }

    /// The two-cluster, three-group, rank-two binary setting.
    pub fn standard(n: usize, m: usize) -> Result<Self> {
        Self::balanced(n, m, 2, 3, 2, 2)
    }

    pub fn slots(&self) -> usize {
        self.c * self.g
    }

    pub fn is_standard(&self) -> bool {
        (self.c, self.g, self.r, self.q) == (2, 3, 2, 2)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::InvalidConfig("n and m must be positive".into()));
        }
        if self.c < 1 {
            return Err(Error::InvalidConfig("c must be at least 1".into()));
        }
        if self.r < 1 || self.r > self.g {
            return Err(Error::InvalidConfig(format!(
                "rank r={} must satisfy 1 <= r <= g={}",
                self.r, self.g
            )));
        }
        if self.q < 2 {
            return Err(Error::InvalidConfig(format!("q={} must be at least 2", self.q)));
        }
        if self.group_sizes.len() != self.slots() {
            return Err(Error::InvalidConfig(format!(
                "expected {} group sizes, got {}",
                self.slots(),
                self.group_sizes.len()
            )));
        }
        if self.group_sizes.contains(&0) {
            return Err(Error::InvalidConfig("every group needs at least one user".into()));
        }
        let total: usize = self.group_sizes.iter().sum();
        if total != self.n {
            return Err(Error::InvalidConfig(format!(
                "group sizes sum to {total}, expected n={}",
                self.n
            )));
        }
        Ok(())
    }
}

/// Per-user cluster and group labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    clusters: usize,
    groups: usize,
    cluster_of: Vec<usize>,
    group_of: Vec<usize>,
}

impl Partition {
    pub fn new(
        clusters: usize,
        groups: usize,
        cluster_of: Vec<usize>,
        group_of: Vec<usize>,
    ) -> Result<Self> {
        if cluster_of.len() != group_of.len() {
            return Err(Error::Dimension(format!(
                "{} cluster labels vs {} group labels",
                cluster_of.len(),
                group_of.len()
            )));
        }
        if let Some(u) = cluster_of.iter().position(|&x| x >= clusters) {
            return Err(Error::InvalidConfig(format!(
                "user {u} has cluster {} outside 0..{clusters}",
                cluster_of[u]
            )));
        }
        if let Some(u) = group_of.iter().position(|&i| i >= groups) {
            return Err(Error::InvalidConfig(format!(
                "user {u} has group {} outside 0..{groups}",
                group_of[u]
            )));
        }
        Ok(Self {
            clusters,
            groups,
            cluster_of,
            group_of,
        })
    }

    /// Builds a partition from flattened slot labels `cluster * groups + group`.
    pub fn from_slots(clusters: usize, groups: usize, slots: &[usize]) -> Result<Self> {
        let cluster_of = slots.iter().map(|&s| s / groups).collect();
        let group_of = slots.iter().map(|&s| s % groups).collect();
        Self::new(clusters, groups, cluster_of, group_of)
    }

    pub fn n(&self) -> usize {
        self.cluster_of.len()
    }

    pub fn clusters(&self) -> usize {
        self.clusters
    }

    pub fn groups(&self) -> usize {
        self.groups
    }

    pub fn cluster_of(&self, user: usize) -> usize {
        self.cluster_of[user]
    }

    pub fn group_of(&self, user: usize) -> usize {
        self.group_of[user]
    }

    pub fn slot_of(&self, user: usize) -> usize {
        self.cluster_of[user] * self.groups + self.group_of[user]
    }

    pub fn cluster_labels(&self) -> &[usize] {
        &self.cluster_of
    }

    pub fn group_labels(&self) -> &[usize] {
        &self.group_of
    }

    pub fn slot_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.clusters * self.groups];
        for u in 0..self.n() {
            sizes[self.slot_of(u)] += 1;
        }
        sizes
    }

    pub fn cluster_members(&self, cluster: usize) -> Vec<usize> {
        (0..self.n()).filter(|&u| self.cluster_of[u] == cluster).collect()
    }

    pub fn members(&self, cluster: usize, group: usize) -> Vec<usize> {
        (0..self.n())
            .filter(|&u| self.cluster_of[u] == cluster && self.group_of[u] == group)
            .collect()
    }

    /// Checks the partition against a configuration's dimensions and sizes.
    pub fn check_against(&self, config: &HierarchyConfig) -> Result<()> {
        if self.n() != config.n || self.clusters != config.c || self.groups != config.g {
            return Err(Error::Dimension(format!(
                "partition (n={}, c={}, g={}) does not match config (n={}, c={}, g={})",
                self.n(),
                self.clusters,
                self.groups,
                config.n,
                config.c,
                config.g
            )));
        }
        if self.slot_sizes() != config.group_sizes {
            return Err(Error::InvalidConfig(
                "partition group sizes differ from config".into(),
            ));
        }
        Ok(())
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Copy + Default> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::default(); rows * cols],
        }
    }
}

impl<T: Copy> DenseMatrix<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }
}

pub type BinaryMatrix = DenseMatrix<u8>;

/// One rating vector per (cluster, group) slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingModel {
    config: HierarchyConfig,
    vectors: Vec<Vec<u8>>,
}

impl RatingModel {
    /// Checks shapes and alphabet only; see [`RatingModel::validate`] for the
    /// structural checks applied to ground-truth models.
    pub fn new(config: HierarchyConfig, vectors: Vec<Vec<u8>>) -> Result<Self> {
        if vectors.len() != config.slots() {
            return Err(Error::Dimension(format!(
                "expected {} rating vectors, got {}",
                config.slots(),
                vectors.len()
            )));
        }
        for (s, v) in vectors.iter().enumerate() {
            if v.len() != config.m {
                return Err(Error::Dimension(format!(
                    "vector {s} has length {}, expected m={}",
                    v.len(),
                    config.m
                )));
            }
            if v.iter().any(|&x| u32::from(x) >= config.q) {
                return Err(Error::Domain(format!("vector {s} has a value outside F_{}", config.q)));
            }
        }
        Ok(Self { config, vectors })
    }

    pub fn config(&self) -> &HierarchyConfig {
        &self.config
    }

    pub fn vector(&self, cluster: usize, group: usize) -> &[u8] {
        &self.vectors[cluster * self.config.g + group]
    }

    pub fn vectors(&self) -> &[Vec<u8>] {
        &self.vectors
    }

    /// `v_1 ^ v_2 ^ v_3 == 0` entrywise in every cluster. Only meaningful for
    /// three groups over F_2.
    pub fn is_xor_closed(&self) -> bool {
        if self.config.g != 3 || self.config.q != 2 {
            return false;
        }
        (0..self.config.c).all(|x| {
            let (a, b, c) = (self.vector(x, 0), self.vector(x, 1), self.vector(x, 2));
            a.iter().zip(b).zip(c).all(|((&a, &b), &c)| a ^ b ^ c == 0)
        })
    }

    /// Ground-truth validity: XOR closure for the (g, r, q) = (3, 2, 2) case
    /// and strictly positive `delta_g` and `delta_c`.
    pub fn validate(&self) -> Result<DeltaPair> {
        let cfg = &self.config;
        if (cfg.g, cfg.r, cfg.q) == (3, 2, 2) && !self.is_xor_closed() {
            return Err(Error::Degenerate("rating vectors violate v3 = v1 xor v2".into()));
        }
        let deltas = compute_deltas(self)?;
        if cfg.c > 1 && deltas.delta_c == 0.0 {
            return Err(Error::Degenerate(
                "two clusters share a rating vector (delta_c = 0)".into(),
            ));
        }
        Ok(deltas)
    }
}

/// Normalized minimum Hamming distances within and across clusters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaPair {
    pub delta_g: f64,
    pub delta_c: f64,
}

impl DeltaPair {
    pub fn new(delta_g: f64, delta_c: f64) -> Result<Self> {
        for (name, d) in [("delta_g", delta_g), ("delta_c", delta_c)] {
            if !(0.0..=1.0).contains(&d) {
                return Err(Error::Domain(format!("{name}={d} outside [0, 1]")));
            }
        }
        Ok(Self { delta_g, delta_c })
    }
}

/// Sparse observed entries over F_q, sorted by (row, col).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    n: usize,
    m: usize,
    entries: Vec<Entry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Entry {
    pub row: usize,
    pub col: usize,
    pub value: u8,
}

impl Observation {
    pub fn new(n: usize, m: usize, mut entries: Vec<Entry>) -> Result<Self> {
        entries.sort_unstable();
        for e in &entries {
            if e.row >= n || e.col >= m {
                return Err(Error::Dimension(format!(
                    "entry ({}, {}) outside {n}x{m}",
                    e.row, e.col
                )));
            }
        }
        if let Some(w) = entries
            .windows(2)
            .find(|w| (w[0].row, w[0].col) == (w[1].row, w[1].col))
        {
            return Err(Error::InvalidConfig(format!(
                "duplicate observation at ({}, {})",
                w[0].row, w[0].col
            )));
        }
        Ok(Self { n, m, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Observed `(col, value)` pairs of every row.
    pub fn by_row(&self) -> Vec<Vec<(usize, u8)>> {
        let mut rows = vec![Vec::new(); self.n];
        for e in &self.entries {
            rows[e.row].push((e.col, e.value));
        }
        rows
    }
}

/// Undirected simple graph on `n` vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SideGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl SideGraph {
    /// Edges may be given in either orientation; they are stored as `u < v`
    /// and sorted. Self-loops and repeated pairs are rejected.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut canon = Vec::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::InvalidConfig(format!("self-loop at vertex {u}")));
            }
            if u >= n || v >= n {
                return Err(Error::Dimension(format!("edge ({u}, {v}) outside 0..{n}")));
            }
            canon.push((u.min(v), u.max(v)));
        }
        canon.sort_unstable();
        if let Some(w) = canon.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig(format!(
                "duplicate edge ({}, {})",
                w[0].0, w[0].1
            )));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &canon {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for nb in &mut adjacency {
            nb.sort_unstable();
        }
        Ok(Self {
            n,
            edges: canon,
            adjacency,
        })
    }

    pub fn empty(n: usize) -> Self {
        Self {
            n,
            edges: Vec::new(),
            adjacency: vec![Vec::new(); n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adjacency[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adjacency[u].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u != v && self.adjacency[u].binary_search(&v).is_ok()
    }
}

/// Maps observations to `{+1, -1, 0}`: value 0 becomes +1, value 1 becomes
/// -1 and unobserved entries 0. XOR of ratings becomes multiplication.
pub fn map_y_to_z(obs: &Observation, q: u32) -> Result<DenseMatrix<i8>> {
    if q != 2 {
        return Err(Error::UnsupportedField(q));
    }
    let mut z = DenseMatrix::zeros(obs.n(), obs.m());
    for e in obs.entries() {
        let s = match e.value {
            0 => 1,
            1 => -1,
            v => return Err(Error::Domain(format!("binary observation has value {v}"))),
        };
        z.set(e.row, e.col, s);
    }
    Ok(z)
}

/// Sign encoding of a single binary symbol.
pub fn to_sign(bit: u8) -> i8 {
    if bit == 0 {
        1
    } else {
        -1
    }
}

pub fn hamming(u: &[u8], v: &[u8]) -> Result<usize> {
    if u.len() != v.len() {
        return Err(Error::Dimension(format!(
            "hamming distance of lengths {} and {}",
            u.len(),
            v.len()
        )));
    }
    Ok(u.iter().zip(v).filter(|(a, b)| a != b).count())
}

/// `delta_g` is the minimum over clusters and distinct group pairs;
/// `delta_c` the minimum over all vector pairs of distinct clusters (every
/// unordered cluster pair when `c > 2`). With a single cluster `delta_c` is
/// reported as 1.
///
/// Fails when two groups of one cluster share a vector; `delta_c = 0` is
/// returned as-is and rejected later by [`RatingModel::validate`].
pub fn compute_deltas(model: &RatingModel) -> Result<DeltaPair> {
    let cfg = model.config();
    let m = cfg.m as f64;
    let mut intra = usize::MAX;
    let mut inter = usize::MAX;
    for x in 0..cfg.c {
        for i in 0..cfg.g {
            for j in (i + 1)..cfg.g {
                intra = intra.min(hamming(model.vector(x, i), model.vector(x, j))?);
            }
            for y in (x + 1)..cfg.c {
                for j in 0..cfg.g {
                    inter = inter.min(hamming(model.vector(x, i), model.vector(y, j))?);
                }
            }
        }
    }
    if intra == 0 {
        return Err(Error::Degenerate(
            "two groups of one cluster share a rating vector (delta_g = 0)".into(),
        ));
    }
    let delta_g = if intra == usize::MAX { 1.0 } else { intra as f64 / m };
    let delta_c = if inter == usize::MAX { 1.0 } else { inter as f64 / m };
    Ok(DeltaPair { delta_g, delta_c })
}

/// Stacks `v[cluster_of(u)][group_of(u)]` for every user `u`.
pub fn materialize_matrix(model: &RatingModel, part: &Partition) -> Result<BinaryMatrix> {
    let cfg = model.config();
    if part.clusters() != cfg.c || part.groups() != cfg.g {
        return Err(Error::Dimension(format!(
            "partition labels (c={}, g={}) do not match model (c={}, g={})",
            part.clusters(),
            part.groups(),
            cfg.c,
            cfg.g
        )));
    }
    let rows = (0..part.n())
        .map(|u| model.vector(part.cluster_of(u), part.group_of(u)).to_vec())
        .collect::<Vec<_>>();
    if rows.is_empty() {
        return Ok(DenseMatrix::zeros(0, cfg.m));
    }
    DenseMatrix::from_rows(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bits(s: &str) -> Vec<u8> {
        s.bytes().map(|b| b - b'0').collect()
    }

    fn model_from(strs: [&str; 6]) -> Result<RatingModel> {
        let m = strs[0].len();
        let cfg = HierarchyConfig::standard(6, m)?;
        RatingModel::new(cfg, strs.iter().map(|s| bits(s)).collect())
    }

    #[test]
    fn z_mapping_values() {
        let obs = Observation::new(
            2,
            2,
            vec![
                Entry { row: 0, col: 0, value: 0 },
                Entry { row: 1, col: 1, value: 1 },
            ],
        )
        .unwrap();
        let z = map_y_to_z(&obs, 2).unwrap();
        assert_eq!(z.get(0, 0), 1);
        assert_eq!(z.get(1, 1), -1);
        assert_eq!(z.get(0, 1), 0);
        assert_eq!(z.get(1, 0), 0);
        assert!(matches!(map_y_to_z(&obs, 3), Err(Error::UnsupportedField(3))));
    }

    #[test]
    fn z_mapping_is_a_homomorphism() {
        for a in 0..2u8 {
            for b in 0..2u8 {
                assert_eq!(to_sign(a ^ b), to_sign(a) * to_sign(b));
            }
        }
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming(&bits("0011"), &bits("1100")).unwrap(), 4);
        assert_eq!(hamming(&bits("0011"), &bits("0011")).unwrap(), 0);
        assert_eq!(hamming(&bits("0011"), &bits("1111")).unwrap(), 2);
        assert!(matches!(hamming(&bits("01"), &bits("011")), Err(Error::Dimension(_))));
    }

    #[test]
    fn deltas_of_hand_built_model() {
        // A: d = 4, 2, 2; B: d = 2, 1, 1.
        let model = model_from(["0011", "1100", "1111", "0001", "0100", "0101"]).unwrap();
        assert!(model.is_xor_closed());
        let d = compute_deltas(&model).unwrap();
        assert_eq!(d.delta_g, 0.25);
        // 0011 vs 0001 differ in one place.
        assert_eq!(d.delta_c, 0.25);
        assert!(model.validate().is_ok());
    }

    #[test]
    fn repeated_vector_within_cluster_is_degenerate() {
        let model = model_from(["0011", "1100", "1111", "0000", "0101", "0101"]).unwrap();
        assert!(matches!(compute_deltas(&model), Err(Error::Degenerate(_))));
    }

    #[test]
    fn shared_vector_sets_give_zero_delta_c() {
        let model = model_from(["0011", "1100", "1111", "0011", "1100", "1111"]).unwrap();
        assert_eq!(compute_deltas(&model).unwrap().delta_c, 0.0);
        assert!(matches!(model.validate(), Err(Error::Degenerate(_))));
    }

    #[test]
    fn deltas_invariant_under_relabeling() {
        let a = model_from(["0011", "1100", "1111", "0001", "0100", "0101"]).unwrap();
        let b = model_from(["0100", "0101", "0001", "1111", "0011", "1100"]).unwrap();
        assert_eq!(compute_deltas(&a).unwrap(), compute_deltas(&b).unwrap());
    }

    #[test]
    fn materialize_stacks_vectors() {
        let model = model_from(["01", "10", "11", "00", "10", "10"]).unwrap();
        let part = Partition::from_slots(2, 3, &[0, 1, 2, 3, 4, 5]).unwrap();
        let mat = materialize_matrix(&model, &part).unwrap();
        for u in 0..6 {
            assert_eq!(mat.row(u), model.vectors()[u].as_slice());
        }
        let perm = [5, 3, 0, 1, 4, 2];
        let permuted = Partition::from_slots(2, 3, &perm).unwrap();
        let pm = materialize_matrix(&model, &permuted).unwrap();
        for (u, &s) in perm.iter().enumerate() {
            assert_eq!(pm.row(u), mat.row(s));
        }
        let shared = Partition::from_slots(2, 3, &[0, 0, 1, 2, 3, 4]).unwrap();
        let sm = materialize_matrix(&model, &shared).unwrap();
        assert_eq!(sm.row(0), sm.row(1));
    }

    #[test]
    fn config_validation() {
        assert!(HierarchyConfig::new(6, 2, 2, 3, 4, 2, vec![1; 6]).is_err());
        assert!(HierarchyConfig::new(6, 2, 2, 3, 2, 1, vec![1; 6]).is_err());
        assert!(HierarchyConfig::new(7, 2, 2, 3, 2, 2, vec![1; 6]).is_err());
        assert!(HierarchyConfig::new(6, 2, 2, 3, 2, 2, vec![2, 0, 1, 1, 1, 1]).is_err());
        let cfg = HierarchyConfig::standard(10, 3).unwrap();
        assert_eq!(cfg.group_sizes, vec![2, 2, 2, 2, 1, 1]);
    }

    #[test]
    fn graph_rejects_loops_and_duplicates() {
        assert!(SideGraph::new(3, [(1, 1)]).is_err());
        assert!(SideGraph::new(3, [(0, 1), (1, 0)]).is_err());
        let g = SideGraph::new(3, [(2, 0), (1, 0)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 2)]);
        assert!(g.has_edge(2, 0));
        assert!(!g.has_edge(1, 2));
    }

    #[test]
    fn observation_rejects_duplicates() {
        let e = Entry { row: 0, col: 0, value: 1 };
        assert!(Observation::new(1, 1, vec![e, e]).is_err());
        assert!(Observation::new(1, 1, vec![Entry { row: 1, col: 0, value: 0 }]).is_err());
    }

    proptest! {
        #[test]
        fn hamming_triangle_inequality(
            a in prop::collection::vec(0u8..2, 16),
            b in prop::collection::vec(0u8..2, 16),
            c in prop::collection::vec(0u8..2, 16),
        ) {
            let ab = hamming(&a, &b).unwrap();
            let bc = hamming(&b, &c).unwrap();
            let ac = hamming(&a, &c).unwrap();
            prop_assert!(ac <= ab + bc);
            prop_assert_eq!(ab, hamming(&b, &a).unwrap());
        }
    }
}
