//! TopicMap JSON.
//!
//! The layout is fixed, down to key order and number formatting, so the same
//! map always serializes to the same bytes:
//!
//! ```text
//! {"meta":{"vectorSize":..,"contextSize":..,"epochs":..,"terms":..,"percentile":..,
//!   "cap":..,"basePercentile":..,"seed":..,"corpus":{"documents":..,"tokens":..,"vocab":..}},
//!  "nodes":[{"id":..,"freq":..,"community":..|null}],
//!  "links":[{"source":..,"target":..,"raw":..,"weight":..,"primary":..}]}
//! ```
//!
//! Nodes are ordered by descending frequency then term, links by their
//! endpoint terms, and every real is printed with six decimals.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use super::graph::{Link, Node, TermGraph};
use super::MapParams;
use crate::embedding::TrainParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CorpusMeta {
    pub documents: u64,
    pub tokens: u64,
    pub vocab: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicMap {
    pub graph: TermGraph,
    pub map_params: MapParams,
    pub train_params: TrainParams,
    /// Community id per node, aligned with `graph.nodes()`.
    pub communities: Option<Vec<u32>>,
    pub corpus: CorpusMeta,
}

fn real(out: &mut String, v: f64) {
    let s = format!("{v:.6}");
    out.push_str(if s == "-0.000000" { "0.000000" } else { &s });
}

fn string(out: &mut String, s: &str) {
    out.push_str(&serde_json::to_string(s).expect("strings always serialize"));
}

impl TopicMap {
    /// Node indices in export order.
    pub fn node_order(&self) -> Vec<usize> {
        let nodes = self.graph.nodes();
        let mut order: Vec<usize> = (0..nodes.len()).collect();
        order.sort_by(|&a, &b| {
            nodes[b]
                .freq
                .cmp(&nodes[a].freq)
                .then_with(|| nodes[a].term.cmp(&nodes[b].term))
        });
        order
    }

    pub fn to_json(&self) -> String {
        let g = &self.graph;
        let mut o = String::with_capacity(64 * (g.nodes().len() + g.links().len()) + 256);
        let m = &self.map_params;
        let t = &self.train_params;
        let c = &self.corpus;
        write!(
            o,
            "{{\"meta\":{{\"vectorSize\":{},\"contextSize\":{},\"epochs\":{},\"terms\":{},\"percentile\":",
            t.vector_size, t.context, t.epochs, m.terms
        )
        .unwrap();
        real(&mut o, m.percentile);
        write!(o, ",\"cap\":{},\"basePercentile\":", m.cap).unwrap();
        real(&mut o, m.base_percentile);
        write!(
            o,
            ",\"seed\":{},\"corpus\":{{\"documents\":{},\"tokens\":{},\"vocab\":{}}}}},\"nodes\":[",
            t.seed, c.documents, c.tokens, c.vocab
        )
        .unwrap();

        for (k, i) in self.node_order().into_iter().enumerate() {
            if k > 0 {
                o.push(',');
            }
            let n = &g.nodes()[i];
            o.push_str("{\"id\":");
            string(&mut o, &n.term);
            write!(o, ",\"freq\":{},\"community\":", n.freq).unwrap();
            match &self.communities {
                Some(cs) => write!(o, "{}", cs[i]).unwrap(),
                None => o.push_str("null"),
            }
            o.push('}');
        }
        o.push_str("],\"links\":[");
        for (k, l) in g.links().iter().enumerate() {
            if k > 0 {
                o.push(',');
            }
            o.push_str("{\"source\":");
            string(&mut o, g.term(l.source));
            o.push_str(",\"target\":");
            string(&mut o, g.term(l.target));
            o.push_str(",\"raw\":");
            real(&mut o, l.raw);
            o.push_str(",\"weight\":");
            real(&mut o, l.weight.unwrap_or(l.raw));
            write!(o, ",\"primary\":{}}}", l.primary).unwrap();
        }
        o.push_str("]}");
        o
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(Error::at_path(path))
    }

    pub fn from_json(text: &str) -> Result<TopicMap> {
        let file: MapFile = serde_json::from_str(text)?;
        let mut index = HashMap::with_capacity(file.nodes.len());
        let mut nodes = Vec::with_capacity(file.nodes.len());
        let mut communities = Vec::with_capacity(file.nodes.len());
        for (i, n) in file.nodes.into_iter().enumerate() {
            if n.freq < 1 {
                return Err(Error::MalformedMap(format!("node {:?} has freq 0", n.id)));
            }
            index.insert(n.id.clone(), i);
            nodes.push(Node {
                term: n.id,
                freq: n.freq,
            });
            communities.push(n.community);
        }
        let lookup = |t: &str| {
            index
                .get(t)
                .copied()
                .ok_or_else(|| Error::MalformedMap(format!("link endpoint {t:?} is not a node")))
        };
        let links = file
            .links
            .into_iter()
            .map(|l| {
                if !(0.0..=1.0).contains(&l.weight) {
                    return Err(Error::MalformedMap(format!(
                        "weight {} outside [0, 1]",
                        l.weight
                    )));
                }
                Ok(Link {
                    source: lookup(&l.source)?,
                    target: lookup(&l.target)?,
                    raw: l.raw,
                    weight: Some(l.weight),
                    primary: l.primary,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let graph = TermGraph::new(nodes, links).map_err(|e| Error::MalformedMap(e.to_string()))?;

        let communities = if communities.iter().all(Option::is_none) {
            None
        } else if communities.iter().all(Option::is_some) {
            Some(communities.into_iter().map(Option::unwrap).collect())
        } else {
            return Err(Error::MalformedMap(
                "community ids must be set on all nodes or none".into(),
            ));
        };

        let m = file.meta;
        Ok(TopicMap {
            graph,
            map_params: MapParams {
                terms: m.terms,
                percentile: m.percentile,
                cap: m.cap,
                base_percentile: m.base_percentile,
            },
            train_params: TrainParams {
                vector_size: m.vector_size,
                context: m.context_size,
                epochs: m.epochs,
                seed: m.seed,
                ..TrainParams::default()
            },
            communities,
            corpus: CorpusMeta {
                documents: m.corpus.documents,
                tokens: m.corpus.tokens,
                vocab: m.corpus.vocab,
            },
        })
    }

    pub fn load(path: &Path) -> Result<TopicMap> {
        let text = fs::read_to_string(path).map_err(Error::at_path(path))?;
        Self::from_json(&text)
    }

    /// Smallest raw similarity among exported links: the floor of the base
    /// layer.
    pub fn base_threshold(&self) -> Option<f64> {
        self.graph
            .links()
            .iter()
            .map(|l| l.raw)
            .min_by(f64::total_cmp)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MapFile {
    meta: MetaFile,
    nodes: Vec<NodeFile>,
    links: Vec<LinkFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct MetaFile {
    vector_size: usize,
    context_size: usize,
    epochs: usize,
    terms: usize,
    percentile: f64,
    cap: usize,
    base_percentile: f64,
    seed: u64,
    corpus: CorpusFile,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CorpusFile {
    documents: u64,
    tokens: u64,
    vocab: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeFile {
    id: String,
    freq: u64,
    community: Option<u32>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkFile {
    source: String,
    target: String,
    raw: f64,
    weight: f64,
    primary: bool,
}
