use std::collections::HashSet;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use log::info;
use topicmap::clusters::{detect_communities, CommunityParams};
use topicmap::corpus::{self, load_documents, stopwords, tokenize_all, Document, PhraseModel, PhraseParams};
use topicmap::embedding::{
    evaluate_analogies, load_model, load_questions, save_model, suggest_vector_size, train as train_model,
    TrainParams,
};
use topicmap::mapbuilder::{build_map, map_from_model, BuildConfig, MapParams, TopicMap};
use topicmap_server::{ServeState, DEFAULT_PORT};

use crate::args::{
    BuildCmd, CommunitiesCmd, CommunityArgs, CorpusArgs, EvalCmd, MapArgs, ServeCmd, SuggestCmd, TrainArgs,
    TrainCmd,
};

fn required<'a, T>(value: &'a Option<T>, flag: &str) -> Result<&'a T> {
    value.as_ref().ok_or_else(|| anyhow!("missing --{flag}"))
}

fn existing(path: &Path) -> Result<&Path> {
    if !path.exists() {
        bail!("{}: no such file or directory", path.display());
    }
    Ok(path)
}

fn train_params(a: &TrainArgs) -> Result<TrainParams> {
    let d = TrainParams::default();
    let p = TrainParams {
        vector_size: a.vector_size.unwrap_or(d.vector_size),
        context: a.context.unwrap_or(d.context),
        epochs: a.epochs.unwrap_or(d.epochs),
        negatives: a.negatives.unwrap_or(d.negatives),
        subsample: a.subsample.unwrap_or(d.subsample),
        initial_lr: a.learning_rate.unwrap_or(d.initial_lr),
        min_count: a.min_count.unwrap_or(d.min_count),
        seed: a.seed.unwrap_or(d.seed),
        workers: a.workers.unwrap_or(d.workers),
    };
    p.validate()?;
    Ok(p)
}

fn phrase_params(a: &CorpusArgs) -> Result<Option<PhraseParams>> {
    if a.no_phrases {
        if a.phrase_threshold.is_some() || a.phrase_discount.is_some() {
            bail!("--no-phrases conflicts with --phrase-threshold and --phrase-discount");
        }
        return Ok(None);
    }
    let d = PhraseParams::default();
    let p = PhraseParams {
        discount: a.phrase_discount.unwrap_or(d.discount),
        threshold: a.phrase_threshold.unwrap_or(d.threshold),
    };
    if !(p.discount >= 0.0 && p.threshold.is_finite()) {
        bail!("phrase discount must be >= 0 and threshold finite");
    }
    Ok(Some(p))
}

fn map_params(a: &MapArgs) -> Result<MapParams> {
    let d = MapParams::default();
    let percentile = a.percentile.unwrap_or(d.percentile);
    let p = MapParams {
        terms: a.terms.unwrap_or(d.terms),
        percentile,
        cap: a.cap.unwrap_or(d.cap),
        base_percentile: a.base_percentile.unwrap_or(d.base_percentile.min(percentile)),
    };
    p.validate()?;
    Ok(p)
}

fn community_params(a: &CommunityArgs, seed: u64) -> Result<CommunityParams> {
    let d = CommunityParams::default();
    let p = CommunityParams {
        seed,
        max_iters: a.max_iters.unwrap_or(d.max_iters),
        membership_threshold: a.membership_threshold.unwrap_or(d.membership_threshold),
    };
    if p.max_iters < 1 || !(0.0..=1.0).contains(&p.membership_threshold) {
        bail!("--max-iters must be >= 1 and --membership-threshold in [0, 1]");
    }
    Ok(p)
}

fn load_stopwords(a: &MapArgs) -> Result<HashSet<String>> {
    Ok(match (&a.stopwords, a.no_stopwords) {
        (Some(_), true) => bail!("--stopwords conflicts with --no-stopwords"),
        (Some(path), false) => stopwords::load(path)?,
        (None, true) => HashSet::new(),
        (None, false) => stopwords::english(),
    })
}

fn read_corpus(path: &Path) -> Result<Vec<corpus::RawDocument>> {
    let t = Instant::now();
    let docs = load_documents(path)?;
    info!("read {} documents from {} in {:.1?}", docs.len(), path.display(), t.elapsed());
    Ok(docs)
}

pub fn train(cmd: TrainCmd) -> Result<()> {
    let input = existing(required(&cmd.corpus.input, "input")?)?;
    let out = required(&cmd.model_out, "model-out")?;
    let params = train_params(&cmd.train)?;
    let phrases = phrase_params(&cmd.corpus)?;

    let start = Instant::now();
    let mut docs = tokenize_all(&read_corpus(input)?);
    if let Some(p) = phrases {
        let model = PhraseModel::learn(&docs, p);
        info!("learned {} phrases", model.len());
        docs = model.apply_all(&docs);
    }
    let model = train_model(&docs, &params)?;
    save_model(&model, out)?;
    let meta = model.meta().expect("freshly trained");
    println!("vocab {}", meta.vocab.len());
    println!("tokens {}", meta.vocab.total_tokens);
    println!("time {:.1}s", start.elapsed().as_secs_f64());
    Ok(())
}

pub fn eval(cmd: EvalCmd) -> Result<()> {
    let model_path = existing(required(&cmd.model, "model")?)?;
    let questions = existing(required(&cmd.questions, "questions")?)?;
    let sections = load_questions(questions)?;
    let model = load_model(model_path)?;
    let report = evaluate_analogies(&model, &sections);
    for s in &report.sections {
        println!(
            "{} {:.4} ({}/{}, skipped {})",
            s.name,
            s.accuracy(),
            s.correct,
            s.attempted,
            s.skipped
        );
    }
    println!("total {:.4}", report.accuracy());
    println!("attempted {}", report.attempted);
    println!("skipped {}", report.skipped);
    println!("chance {:.6}", report.chance);
    Ok(())
}

/// Tokenizes `docs`, merging phrases learned on them.
fn prepare(docs: &[corpus::RawDocument], phrases: Option<PhraseParams>) -> Vec<Document> {
    let tokens = tokenize_all(docs);
    match phrases {
        Some(p) => PhraseModel::learn(&tokens, p).apply_all(&tokens),
        None => tokens,
    }
}

pub fn build(cmd: BuildCmd) -> Result<()> {
    let out = required(&cmd.out, "out")?;
    let mut train = train_params(&cmd.train)?;
    let map = map_params(&cmd.map)?;
    let phrases = phrase_params(&cmd.corpus)?;
    let communities = if cmd.no_communities {
        None
    } else {
        Some(community_params(&cmd.communities, train.seed)?)
    };
    let stopwords = load_stopwords(&cmd.map)?;
    let input = cmd.corpus.input.as_deref().map(existing).transpose()?;
    let counts = cmd.map.counts_input.as_deref().map(existing).transpose()?;
    let model_path = cmd.model.as_deref().map(existing).transpose()?;
    if input.is_none() && (model_path.is_none() || counts.is_none()) {
        bail!("missing --input");
    }

    let start = Instant::now();
    let (topic_map, warnings) = match model_path {
        Some(path) => {
            let model = load_model(path)?;
            train.vector_size = model.dim();
            let config = BuildConfig { train, map, phrases, stopwords, communities };
            let docs = read_corpus(counts.or(input).expect("checked above"))?;
            map_from_model(&model, &prepare(&docs, phrases), &config)?
        }
        None => {
            let config = BuildConfig { train, map, phrases, stopwords, communities };
            let training = read_corpus(input.expect("checked above"))?;
            let counted = counts.map(read_corpus).transpose()?;
            let built = build_map(&training, counted.as_deref(), &config)?;
            if let Some(path) = &cmd.model_out {
                save_model(&built.model, path)?;
            }
            (built.map, built.warnings)
        }
    };
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    topic_map.save(out)?;
    let g = &topic_map.graph;
    println!("terms {}", g.nodes().len());
    println!("links {}", g.links().len());
    println!("primary {}", g.links().iter().filter(|l| l.primary).count());
    if let Some(c) = &topic_map.communities {
        println!("communities {}", c.iter().max().map_or(0, |m| m + 1));
    }
    println!("time {:.1}s", start.elapsed().as_secs_f64());
    Ok(())
}

pub fn suggest_v(cmd: SuggestCmd) -> Result<()> {
    let v = suggest_vector_size(
        *required(&cmd.ref_v, "ref-v")?,
        *required(&cmd.ref_vocab, "ref-vocab")?,
        *required(&cmd.vocab, "vocab")?,
    )?;
    println!("{v}");
    Ok(())
}

pub fn communities(cmd: CommunitiesCmd) -> Result<()> {
    let path = existing(required(&cmd.map, "map")?)?;
    let params = community_params(&cmd.communities, cmd.seed.unwrap_or(1))?;
    let mut map = TopicMap::load(path)?;
    let primary = map.graph.filter_links(|l| l.primary);
    let found = detect_communities(&primary, &params);
    if !found.converged {
        eprintln!("warning: no fixed point after {} iterations", found.iterations);
    }

    let g = &map.graph;
    for (id, members) in found.members().iter().enumerate() {
        let mut terms: Vec<&str> = members.iter().map(|&i| g.term(i)).collect();
        terms.sort_by_key(|t| std::cmp::Reverse(g.nodes()[g.node_index(t).unwrap()].freq));
        println!("{id}\t{}\t{}", members.len(), terms.join(" "));
    }
    for (i, ms) in found.memberships.iter().enumerate() {
        if ms.len() > 1 {
            let parts: Vec<String> = ms
                .iter()
                .map(|m| format!("{}:{:.2}", m.community, m.strength))
                .collect();
            println!("overlap\t{}\t{}", g.term(i), parts.join(" "));
        }
    }

    if let Some(out) = &cmd.out {
        map.communities = Some(found.primary);
        map.save(out).with_context(|| format!("writing {}", out.display()))?;
    }
    Ok(())
}

pub fn serve(cmd: ServeCmd) -> Result<()> {
    let map = existing(required(&cmd.map, "map")?)?;
    let model = cmd.model.as_deref().map(existing).transpose()?;
    let host = cmd.host.as_deref().unwrap_or("127.0.0.1");
    let addr: SocketAddr = format!("{host}:{}", cmd.port.unwrap_or(DEFAULT_PORT))
        .parse()
        .with_context(|| format!("bad --host {host:?}"))?;
    let ui_dir: Option<PathBuf> = cmd.ui_dir.clone();
    if let Some(dir) = &ui_dir {
        existing(dir)?;
    }
    let state = ServeState::load(map, model)?;
    tokio::runtime::Runtime::new()?.block_on(topicmap_server::serve(state, addr, ui_dir))?;
    Ok(())
}
