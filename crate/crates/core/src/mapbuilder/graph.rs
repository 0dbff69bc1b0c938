use std::collections::HashSet;

use rayon::prelude::*;

use crate::embedding::EmbeddingModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub term: String,
    pub freq: u64,
}

/// Undirected link between two node indices. `source` always names the
/// lexicographically smaller term.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub source: usize,
    pub target: usize,
    pub raw: f64,
    /// Normalized strength in `[0, 1]`, set by [`super::normalize`].
    pub weight: Option<f64>,
    /// Whether the link survives at the strict percentile, as opposed to
    /// only the relaxed export layer.
    pub primary: bool,
}

/// Weighted undirected graph over terms.
#[derive(Debug, Clone, PartialEq)]
pub struct TermGraph {
    nodes: Vec<Node>,
    links: Vec<Link>,
}

impl TermGraph {
    /// Checks the graph invariants and puts links in canonical order:
    /// endpoints sorted by term, links sorted by `(source, target)` term.
    pub fn new(nodes: Vec<Node>, links: Vec<Link>) -> Result<Self> {
        let mut seen_terms = HashSet::with_capacity(nodes.len());
        for n in &nodes {
            if !seen_terms.insert(n.term.as_str()) {
                return Err(Error::invalid(format!("duplicate node {:?}", n.term)));
            }
        }
        let mut g = TermGraph { nodes, links };
        let mut seen = HashSet::with_capacity(g.links.len());
        for l in &mut g.links {
            if l.source >= g.nodes.len() || l.target >= g.nodes.len() {
                return Err(Error::invalid("link endpoint is not a node"));
            }
            if l.source == l.target {
                return Err(Error::invalid(format!(
                    "self-link on {:?}",
                    g.nodes[l.source].term
                )));
            }
            if g.nodes[l.source].term > g.nodes[l.target].term {
                std::mem::swap(&mut l.source, &mut l.target);
            }
            if !seen.insert((l.source, l.target)) {
                return Err(Error::invalid(format!(
                    "duplicate link {:?} - {:?}",
                    g.nodes[l.source].term, g.nodes[l.target].term
                )));
            }
        }
        g.sort_links();
        Ok(g)
    }

    fn sort_links(&mut self) {
        let nodes = &self.nodes;
        self.links.sort_by(|a, b| {
            (&nodes[a.source].term, &nodes[a.target].term)
                .cmp(&(&nodes[b.source].term, &nodes[b.target].term))
        });
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn term(&self, i: usize) -> &str {
        &self.nodes[i].term
    }

    pub fn node_index(&self, term: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.term == term)
    }

    pub fn is_complete(&self) -> bool {
        let n = self.nodes.len();
        self.links.len() == n * n.saturating_sub(1) / 2
    }

    /// Same nodes, only the links for which `keep` holds.
    pub fn filter_links(&self, mut keep: impl FnMut(&Link) -> bool) -> TermGraph {
        TermGraph {
            nodes: self.nodes.clone(),
            links: self.links.iter().filter(|l| keep(l)).cloned().collect(),
        }
    }

    pub(crate) fn links_mut(&mut self) -> &mut [Link] {
        &mut self.links
    }

    /// Sets node frequencies from a lookup; terms it doesn't know get 1.
    pub fn set_frequencies(&mut self, freq: impl Fn(&str) -> Option<u64>) {
        for n in &mut self.nodes {
            n.freq = freq(&n.term).unwrap_or(1).max(1);
        }
    }

    /// Per-node adjacency lists of `(neighbor, link index)`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for (i, l) in self.links.iter().enumerate() {
            adj[l.source].push((l.target, i));
            adj[l.target].push((l.source, i));
        }
        adj
    }
}

/// Complete graph over `terms` with each link's raw weight set to the
/// cosine similarity of its endpoints. Node frequencies start at 1.
pub fn build_complete_similarity<S: AsRef<str> + Sync>(
    model: &EmbeddingModel,
    terms: &[S],
) -> Result<TermGraph> {
    if terms.len() < 2 {
        return Err(Error::invalid("need at least 2 terms"));
    }
    let rows: Vec<usize> = terms
        .iter()
        .map(|t| model.index_of(t.as_ref()))
        .collect::<Result<_>>()?;
    let nodes: Vec<Node> = terms
        .iter()
        .map(|t| Node {
            term: t.as_ref().to_string(),
            freq: 1,
        })
        .collect();
    let n = rows.len();
    let links: Vec<Link> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let rows = &rows;
            (i + 1..n).map(move |j| Link {
                source: i,
                target: j,
                raw: crate::embedding::dot(model.unit_row(rows[i]), model.unit_row(rows[j])),
                weight: None,
                primary: false,
            })
        })
        .collect();
    TermGraph::new(nodes, links)
}
