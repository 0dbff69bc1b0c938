//! Topic communities by weighted label propagation.
//!
//! Every node starts in its own community. Nodes are visited in a seeded
//! random order and each adopts the label carrying the largest total link
//! weight among its neighbors (smallest label on ties), until nothing
//! changes or the iteration budget runs out.
//!
//! A term can lean toward more than one community: besides its primary
//! label, each node lists every neighboring label that holds at least
//! `membership_threshold` of its incident weight.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::mapbuilder::TermGraph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommunityParams {
    pub seed: u64,
    pub max_iters: usize,
    pub membership_threshold: f64,
}

impl Default for CommunityParams {
    fn default() -> Self {
        CommunityParams {
            seed: 1,
            max_iters: 100,
            membership_threshold: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Membership {
    pub community: u32,
    pub strength: f64,
}

/// Community labels aligned with the graph's node order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommunityAssignment {
    pub primary: Vec<u32>,
    /// Per node, strongest first.
    pub memberships: Vec<Vec<Membership>>,
    pub iterations: usize,
    pub converged: bool,
}

impl CommunityAssignment {
    pub fn community_count(&self) -> usize {
        self.primary.iter().max().map_or(0, |&m| m as usize + 1)
    }

    /// Node indices per community id.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.community_count()];
        for (node, &c) in self.primary.iter().enumerate() {
            out[c as usize].push(node);
        }
        out
    }
}

/// Incident link weight per neighboring label, in label order.
fn label_weights(
    adj: &[(usize, f64)],
    labels: &[usize],
) -> BTreeMap<usize, f64> {
    let mut w = BTreeMap::new();
    for &(nb, weight) in adj {
        if weight > 0.0 {
            *w.entry(labels[nb]).or_insert(0.0) += weight;
        }
    }
    w
}

/// Runs label propagation on `graph`, using normalized link weights (raw
/// similarity where a link has no weight yet).
pub fn detect_communities(graph: &TermGraph, params: &CommunityParams) -> CommunityAssignment {
    let n = graph.nodes().len();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for l in graph.links() {
        let w = l.weight.unwrap_or(l.raw);
        adj[l.source].push((l.target, w));
        adj[l.target].push((l.source, w));
    }

    let mut labels: Vec<usize> = (0..n).collect();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < params.max_iters {
        iterations += 1;
        order.shuffle(&mut rng);
        let mut changed = false;
        for &u in &order {
            let weights = label_weights(&adj[u], &labels);
            // BTreeMap iterates labels ascending, so the first maximum wins ties
            let best = weights
                .iter()
                .fold(None::<(usize, f64)>, |best, (&l, &w)| match best {
                    Some((_, bw)) if bw >= w => best,
                    _ => Some((l, w)),
                });
            if let Some((l, _)) = best {
                if l != labels[u] {
                    labels[u] = l;
                    changed = true;
                }
            }
        }
        if !changed {
            converged = true;
            break;
        }
    }

    // contiguous ids: larger communities first, then by first member
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (u, &l) in labels.iter().enumerate() {
        groups.entry(l).or_default().push(u);
    }
    let mut ranked: Vec<(usize, Vec<usize>)> = groups.into_iter().collect();
    ranked.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.1[0].cmp(&b.1[0])));
    let mut id_of = vec![0u32; n];
    for (id, (label, _)) in ranked.iter().enumerate() {
        id_of[*label] = id as u32;
    }
    let primary: Vec<u32> = labels.iter().map(|&l| id_of[l]).collect();

    let memberships = (0..n)
        .map(|u| {
            let weights = label_weights(&adj[u], &labels);
            let total: f64 = weights.values().sum();
            let own = primary[u];
            if total <= 0.0 {
                return vec![Membership {
                    community: own,
                    strength: 1.0,
                }];
            }
            let mut ms: Vec<Membership> = weights
                .into_iter()
                .map(|(l, w)| Membership {
                    community: id_of[l],
                    strength: w / total,
                })
                .filter(|m| m.community == own || m.strength >= params.membership_threshold)
                .collect();
            if !ms.iter().any(|m| m.community == own) {
                // label kept from an earlier pass that no neighbor carries
                ms.push(Membership {
                    community: own,
                    strength: 0.0,
                });
            }
            ms.sort_by(|a, b| {
                b.strength
                    .total_cmp(&a.strength)
                    .then((a.community != own).cmp(&(b.community != own)))
                    .then(a.community.cmp(&b.community))
            });
            ms
        })
        .collect();

    CommunityAssignment {
        primary,
        memberships,
        iterations,
        converged,
    }
}
