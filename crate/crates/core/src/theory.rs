//! Closed-form sample-complexity thresholds and regime classification.
//!
//! Logarithms are natural throughout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DeltaPair;
use crate::synth::{GraphParams, ObservationParams};

/// Graph separation measures and the rating-channel rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoMeasures {
    /// `(sqrt(alpha) - sqrt(beta))^2`, separability of groups.
    pub i_g: f64,
    /// `(sqrt(alpha) - sqrt(gamma))^2`.
    pub i_c1: f64,
    /// `(sqrt(beta) - sqrt(gamma))^2`.
    pub i_c2: f64,
    /// `p (sqrt(1 - theta) - sqrt(theta))^2`.
    pub i_r: f64,
}

pub fn hellinger(a: f64, b: f64) -> f64 {
    let d = a.sqrt() - b.sqrt();
    d * d
}

pub fn info_measures(graph: &GraphParams, obs: &ObservationParams) -> InfoMeasures {
    InfoMeasures {
        i_g: hellinger(graph.alpha, graph.beta),
        i_c1: hellinger(graph.alpha, graph.gamma),
        i_c2: hellinger(graph.beta, graph.gamma),
        i_r: obs.p * hellinger(1.0 - obs.theta, obs.theta),
    }
}

/// Graph measures only, for threshold queries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphInfo {
    pub i_g: f64,
    pub i_c1: f64,
    pub i_c2: f64,
}

impl From<InfoMeasures> for GraphInfo {
    fn from(i: InfoMeasures) -> Self {
        Self {
            i_g: i.i_g,
            i_c1: i.i_c1,
            i_c2: i.i_c2,
        }
    }
}

impl From<&GraphParams> for GraphInfo {
    fn from(g: &GraphParams) -> Self {
        Self {
            i_g: hellinger(g.alpha, g.beta),
            i_c1: hellinger(g.alpha, g.gamma),
            i_c2: hellinger(g.beta, g.gamma),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeKind {
    PerfectClusteringGrouping,
    GroupingLimited,
    ClusteringLimited,
}

impl RegimeKind {
    pub fn label(self) -> &'static str {
        match self {
            RegimeKind::PerfectClusteringGrouping => "perfect-clustering-grouping",
            RegimeKind::GroupingLimited => "grouping-limited",
            RegimeKind::ClusteringLimited => "clustering-limited",
        }
    }

    fn from_term(term: usize) -> Self {
        match term {
            1 => RegimeKind::PerfectClusteringGrouping,
            2 => RegimeKind::GroupingLimited,
            _ => RegimeKind::ClusteringLimited,
        }
    }
}

impl std::fmt::Display for RegimeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Regime {
    pub kind: RegimeKind,
    /// 1-based index of the active max term.
    pub active_term: usize,
    pub is_tie: bool,
}

/// A threshold evaluation: the three bracket terms, the prefactor and the
/// resulting probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PStar {
    pub prefactor: f64,
    /// Bracket terms before the prefactor; negative values are kept.
    pub terms: [f64; 3],
    /// `prefactor * max(terms)`.
    pub raw: f64,
    /// `raw` clamped to `[0, 1]`.
    pub value: f64,
    pub out_of_range: bool,
    pub regime: Regime,
}

/// `1 / (sqrt(1 - theta) - sqrt(theta / (q - 1)))^2`.
pub fn prefactor(theta: f64, q: u32) -> Result<f64> {
    if q < 2 {
        return Err(Error::Domain(format!("q={q} must be at least 2")));
    }
    let qm1 = f64::from(q - 1);
    let limit = qm1 / f64::from(q);
    if !(0.0..limit).contains(&theta) {
        return Err(Error::Domain(format!("theta={theta} outside [0, {limit})")));
    }
    let d = (1.0 - theta).sqrt() - (theta / qm1).sqrt();
    Ok(1.0 / (d * d))
}

fn check_deltas(deltas: &DeltaPair) -> Result<()> {
    if !(deltas.delta_g > 0.0) || !(deltas.delta_c > 0.0) {
        return Err(Error::Degenerate(format!(
            "delta_g={} and delta_c={} must both be positive",
            deltas.delta_g, deltas.delta_c
        )));
    }
    if deltas.delta_g > 1.0 || deltas.delta_c > 1.0 {
        return Err(Error::Domain("deltas must not exceed 1".into()));
    }
    Ok(())
}

fn check_dims(n: usize, m: usize) -> Result<()> {
    if n == 0 || m == 0 {
        return Err(Error::Domain("n and m must be positive".into()));
    }
    Ok(())
}

fn finish(prefactor: f64, terms: [f64; 3]) -> PStar {
    let regime = classify_terms(&terms);
    let raw = prefactor * terms[regime.active_term - 1];
    PStar {
        prefactor,
        terms,
        raw,
        value: raw.clamp(0.0, 1.0),
        out_of_range: raw > 1.0,
        regime,
    }
}

fn nearly_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

fn classify_terms(terms: &[f64; 3]) -> Regime {
    let mut best = 0;
    for k in 1..3 {
        if terms[k] > terms[best] && !nearly_equal(terms[k], terms[best]) {
            best = k;
        }
    }
    let is_tie = (0..3).any(|k| k != best && nearly_equal(terms[k], terms[best]));
    Regime {
        kind: RegimeKind::from_term(best + 1),
        active_term: best + 1,
        is_tie,
    }
}

/// Threshold for general `(c, g, r, q)`.
#[allow(clippy::too_many_arguments)]
pub fn p_star_general(
    c: usize,
    g: usize,
    r: usize,
    q: u32,
    n: usize,
    m: usize,
    theta: f64,
    info: &GraphInfo,
    deltas: &DeltaPair,
) -> Result<PStar> {
    if c < 1 || r < 1 || r > g {
        return Err(Error::Domain(format!("need c >= 1 and 1 <= r <= g, got c={c}, g={g}, r={r}")));
    }
    check_dims(n, m)?;
    check_deltas(deltas)?;
    let pre = prefactor(theta, q)?;
    let (nf, mf) = (n as f64, m as f64);
    let gc = (g * c) as f64;
    let ln_n = nf.ln();
    let t1 = gc / (g - r + 1) as f64 * mf.ln() / nf;
    let t2 = (ln_n - nf * info.i_g / gc) / (mf * deltas.delta_g);
    let t3 = (ln_n - nf * info.i_c1 / gc - nf * info.i_c2 / (gc / (g - 1) as f64))
        / (mf * deltas.delta_c);
    Ok(finish(pre, [t1, t2, t3]))
}

/// Coefficient `g c / (g - r + 1)` of the first bracket term.
pub fn coupon_coefficient(c: usize, g: usize, r: usize) -> f64 {
    (g * c) as f64 / (g - r + 1) as f64
}

/// Threshold for the two-cluster, three-group, rank-two binary setting.
pub fn p_star_232(
    n: usize,
    m: usize,
    theta: f64,
    info: &GraphInfo,
    deltas: &DeltaPair,
) -> Result<PStar> {
    check_dims(n, m)?;
    check_deltas(deltas)?;
    if !(0.0..0.5).contains(&theta) {
        return Err(Error::Domain(format!("theta={theta} outside [0, 1/2)")));
    }
    let d = (1.0 - theta).sqrt() - theta.sqrt();
    let pre = 1.0 / (d * d);
    let (nf, mf) = (n as f64, m as f64);
    let ln_n = nf.ln();
    let t1 = 3.0 * mf.ln() / nf;
    let t2 = (ln_n - nf * info.i_g / 6.0) / (mf * deltas.delta_g);
    let t3 = (ln_n - nf * info.i_c1 / 6.0 - nf * info.i_c2 / 3.0) / (mf * deltas.delta_c);
    Ok(finish(pre, [t1, t2, t3]))
}

pub fn classify_regime(
    n: usize,
    m: usize,
    theta: f64,
    info: &GraphInfo,
    deltas: &DeltaPair,
) -> Result<Regime> {
    Ok(p_star_232(n, m, theta, info, deltas)?.regime)
}

/// Six-cluster comparison baseline: the hierarchy flattened to six
/// independent clusters with minimum distance `delta_c`, evaluated through
/// [`p_star_general`] with `(c, g, r) = (6, 1, 1)`. Approximate: not every
/// parameter of the flattened comparison is pinned down.
pub fn p_star_flat_baseline(
    n: usize,
    m: usize,
    theta: f64,
    i_sep: f64,
    delta_c: f64,
) -> Result<PStar> {
    let info = GraphInfo {
        i_g: i_sep,
        i_c1: i_sep,
        i_c2: 0.0,
    };
    p_star_general(6, 1, 1, 2, n, m, theta, &info, &DeltaPair { delta_g: delta_c, delta_c })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeCell {
    pub i_g: f64,
    pub i_c2: f64,
    /// `None` when the reconstructed edge probabilities leave `[0, 1]`.
    pub regime: Option<RegimeKind>,
    pub p_star: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeGrid {
    pub i_g_max: f64,
    pub i_c2_max: f64,
    /// Points per axis, endpoints included.
    pub steps: usize,
}

/// Labels a regular `(I_g, I_c2)` grid. Edge probabilities are rebuilt as
/// `beta = (sqrt(gamma) + sqrt(I_c2))^2`, `alpha = (sqrt(beta) + sqrt(I_g))^2`
/// and `I_c1` follows from `(alpha, gamma)`.
#[allow(clippy::too_many_arguments)]
pub fn regime_map(
    grid: &RegimeGrid,
    n: usize,
    m: usize,
    theta: f64,
    deltas: &DeltaPair,
    gamma: f64,
) -> Result<Vec<RegimeCell>> {
    if grid.steps == 0 || !grid.i_g_max.is_finite() || !grid.i_c2_max.is_finite() {
        return Err(Error::Domain("regime grid must be finite and non-empty".into()));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Domain(format!("gamma={gamma} outside [0, 1]")));
    }
    let axis = |max: f64, k: usize| {
        if grid.steps == 1 {
            max
        } else {
            max * k as f64 / (grid.steps - 1) as f64
        }
    };
    let mut cells = Vec::with_capacity(grid.steps * grid.steps);
    for a in 0..grid.steps {
        let i_c2 = axis(grid.i_c2_max, a);
        for b in 0..grid.steps {
            let i_g = axis(grid.i_g_max, b);
            let beta = (gamma.sqrt() + i_c2.sqrt()).powi(2);
            let alpha = (beta.sqrt() + i_g.sqrt()).powi(2);
            if alpha > 1.0 || beta > 1.0 {
                cells.push(RegimeCell {
                    i_g,
                    i_c2,
                    regime: None,
                    p_star: f64::NAN,
                });
                continue;
            }
            let info = GraphInfo {
                i_g,
                i_c1: hellinger(alpha, gamma),
                i_c2,
            };
            let ps = p_star_232(n, m, theta, &info, deltas)?;
            cells.push(RegimeCell {
                i_g,
                i_c2,
                regime: Some(ps.regime.kind),
                p_star: ps.value,
            });
        }
    }
    Ok(cells)
}

/// Formats `x` with `digits` significant digits, trailing zeros removed.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}
