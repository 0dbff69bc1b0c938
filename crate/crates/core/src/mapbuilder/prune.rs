//! Percentile thresholding, per-term link caps and weight normalization.
//!
//! Caps are computed once on the complete graph and the survival rule is
//! applied to every link independently, so the result does not depend on
//! the order in which nodes or links are visited.

use super::graph::{Link, TermGraph};
use crate::error::{Error, Result};

/// Nearest-rank percentile: the smallest value `v` in `values` such that the
/// fraction of values `<= v` is at least `p`. `p = 0` gives the minimum.
pub fn percentile_threshold(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("percentile {p} outside [0, 1]")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let frac = |rank: usize| rank as f64 / n as f64;
    // first guess, then correct for floating-point error in p * n
    let mut rank = ((p * n as f64).ceil() as usize).clamp(1, n);
    while rank > 1 && frac(rank - 1) >= p {
        rank -= 1;
    }
    while rank < n && frac(rank) < p {
        rank += 1;
    }
    Ok(sorted[rank - 1])
}

/// The quantities the survival rule needs, computed from a complete graph.
#[derive(Debug, Clone)]
pub struct PruneRule {
    pub threshold: f64,
    /// Per node, the `cap`-th largest raw similarity among its links.
    pub caps: Vec<f64>,
}

impl PruneRule {
    pub fn new(graph: &TermGraph, p: f64, cap: usize) -> Result<Self> {
        let n = graph.nodes().len();
        if n < 2 {
            return Err(Error::invalid("pruning needs at least 2 nodes"));
        }
        if !graph.is_complete() {
            return Err(Error::invalid("pruning expects a complete graph"));
        }
        if cap < 1 || cap > n - 1 {
            return Err(Error::invalid(format!(
                "link cap {cap} outside [1, {}]",
                n - 1
            )));
        }
        let raws: Vec<f64> = graph.links().iter().map(|l| l.raw).collect();
        let threshold = percentile_threshold(&raws, p)?;
        let caps = graph
            .adjacency()
            .into_iter()
            .map(|adj| {
                let mut w: Vec<f64> = adj.iter().map(|&(_, li)| raws[li]).collect();
                w.sort_by(|a, b| b.total_cmp(a));
                w[cap - 1]
            })
            .collect();
        Ok(PruneRule { threshold, caps })
    }

    pub fn survives(&self, link: &Link) -> bool {
        link.raw >= self.threshold
            && link.raw >= self.caps[link.source]
            && link.raw >= self.caps[link.target]
    }
}

/// Keeps a link `(u, v)` iff its raw similarity is at least the `p`
/// percentile of all raw similarities and at least the `cap`-th largest
/// similarity of both `u` and `v` in the complete graph.
pub fn prune(graph: &TermGraph, p: f64, cap: usize) -> Result<TermGraph> {
    let rule = PruneRule::new(graph, p, cap)?;
    Ok(graph.filter_links(|l| rule.survives(l)))
}

/// Prunes at the relaxed `base_p` and flags the links that also survive at
/// the strict `p` as primary.
pub fn prune_layers(graph: &TermGraph, base_p: f64, p: f64, cap: usize) -> Result<TermGraph> {
    if base_p > p {
        return Err(Error::invalid(format!(
            "base percentile {base_p} exceeds percentile {p}"
        )));
    }
    let strict = PruneRule::new(graph, p, cap)?;
    let relaxed = PruneRule {
        threshold: percentile_threshold(
            &graph.links().iter().map(|l| l.raw).collect::<Vec<_>>(),
            base_p,
        )?,
        caps: strict.caps.clone(),
    };
    let mut out = graph.filter_links(|l| relaxed.survives(l));
    for l in out.links_mut() {
        l.primary = strict.survives(l);
    }
    Ok(out)
}

/// Min-max scales raw similarities of the surviving links into `[0, 1]`.
/// A degenerate range (one link, or all equal) gives every link weight 1.
pub fn normalize(graph: &TermGraph) -> Result<TermGraph> {
    if graph.links().is_empty() {
        return Err(Error::EmptyGraph);
    }
    let (lo, hi) = graph
        .links()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), l| {
            (lo.min(l.raw), hi.max(l.raw))
        });
    let mut out = graph.clone();
    for l in out.links_mut() {
        l.weight = Some(if hi > lo { (l.raw - lo) / (hi - lo) } else { 1.0 });
    }
    Ok(out)
}
