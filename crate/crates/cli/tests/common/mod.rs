#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

pub fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_topicmap"));
    c.env("RUST_LOG", "warn");
    c
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

/// `<workspace>/data`, or `$TOPICMAP_DATA`.
pub fn data_dir() -> PathBuf {
    std::env::var_os("TOPICMAP_DATA")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data"))
}

/// Writes one document per line.
pub fn write_lines(path: &Path, docs: &[topicmap::corpus::RawDocument]) {
    let text: Vec<&str> = docs.iter().map(|d| d.text.as_str()).collect();
    std::fs::write(path, text.join("\n") + "\n").unwrap();
}

fn keys(v: &Value) -> Vec<&str> {
    v.as_object().map(|o| o.keys().map(String::as_str).collect()).unwrap_or_default()
}

fn uint(v: &Value, what: &str) -> Result<u64, String> {
    v.as_u64().ok_or_else(|| format!("{what} is not a non-negative integer: {v}"))
}

fn real(v: &Value, what: &str) -> Result<f64, String> {
    v.as_f64().ok_or_else(|| format!("{what} is not a number: {v}"))
}

/// Checks a map file against the TopicMap layout: exact keys in order,
/// value types and ranges, node and link ordering, and six-decimal reals.
pub fn validate_map(text: &str) -> Result<(), String> {
    let v: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if keys(&v) != ["meta", "nodes", "links"] {
        return Err(format!("top-level keys {:?}", keys(&v)));
    }
    let meta = &v["meta"];
    let meta_keys = [
        "vectorSize", "contextSize", "epochs", "terms", "percentile", "cap", "basePercentile", "seed",
        "corpus",
    ];
    if keys(meta) != meta_keys {
        return Err(format!("meta keys {:?}", keys(meta)));
    }
    for k in ["vectorSize", "contextSize", "epochs", "terms", "cap", "seed"] {
        uint(&meta[k], k)?;
    }
    let p = real(&meta["percentile"], "percentile")?;
    let base = real(&meta["basePercentile"], "basePercentile")?;
    if !(0.0 < base && base <= p && p < 1.0) {
        return Err(format!("percentiles {base} / {p}"));
    }
    if keys(&meta["corpus"]) != ["documents", "tokens", "vocab"] {
        return Err(format!("corpus keys {:?}", keys(&meta["corpus"])));
    }
    for k in ["documents", "tokens", "vocab"] {
        uint(&meta["corpus"][k], k)?;
    }

    let nodes = v["nodes"].as_array().ok_or("nodes is not an array")?;
    let mut ids = std::collections::HashSet::new();
    let mut prev: Option<(u64, &str)> = None;
    let mut with_community = 0;
    for n in nodes {
        if keys(n) != ["id", "freq", "community"] {
            return Err(format!("node keys {:?}", keys(n)));
        }
        let id = n["id"].as_str().ok_or("node id is not a string")?;
        let freq = uint(&n["freq"], "freq")?;
        if id.is_empty() || freq < 1 {
            return Err(format!("node {id:?} freq {freq}"));
        }
        if !ids.insert(id) {
            return Err(format!("duplicate node {id:?}"));
        }
        match &n["community"] {
            Value::Null => {}
            c => {
                uint(c, "community")?;
                with_community += 1;
            }
        }
        if let Some((pf, pid)) = prev {
            if pf < freq || (pf == freq && pid >= id) {
                return Err(format!("nodes out of order at {id:?}"));
            }
        }
        prev = Some((freq, id));
    }
    if with_community != 0 && with_community != nodes.len() {
        return Err("community ids set on only some nodes".into());
    }

    let links = v["links"].as_array().ok_or("links is not an array")?;
    let mut prev: Option<(&str, &str)> = None;
    for l in links {
        if keys(l) != ["source", "target", "raw", "weight", "primary"] {
            return Err(format!("link keys {:?}", keys(l)));
        }
        let s = l["source"].as_str().ok_or("source is not a string")?;
        let t = l["target"].as_str().ok_or("target is not a string")?;
        if !ids.contains(s) || !ids.contains(t) || s >= t {
            return Err(format!("bad link {s:?} - {t:?}"));
        }
        let raw = real(&l["raw"], "raw")?;
        let w = real(&l["weight"], "weight")?;
        if !(-1.0..=1.0).contains(&raw) || !(0.0..=1.0).contains(&w) {
            return Err(format!("link {s}-{t} raw {raw} weight {w}"));
        }
        l["primary"].as_bool().ok_or("primary is not a boolean")?;
        if let Some(pl) = prev {
            if pl >= (s, t) {
                return Err(format!("links out of order at {s}-{t}"));
            }
        }
        prev = Some((s, t));
    }

    // every real is printed with exactly six decimals
    for key in ["\"percentile\":", "\"basePercentile\":", "\"raw\":", "\"weight\":"] {
        for (at, _) in text.match_indices(key) {
            let rest = &text[at + key.len()..];
            let end = rest.find([',', '}']).ok_or("unterminated number")?;
            let num = &rest[..end];
            let decimals = num.split_once('.').map(|(_, d)| d.len());
            if decimals != Some(6) {
                return Err(format!("{key} {num} is not printed with six decimals"));
            }
        }
    }
    Ok(())
}
