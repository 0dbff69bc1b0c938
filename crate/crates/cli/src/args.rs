use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

/// Build topic maps from a text corpus: train word vectors, link the most
/// frequent terms by similarity, prune, detect communities and serve the
/// result to a browser.
#[derive(Debug, Parser)]
#[command(name = "topicmap", version)]
pub struct Cli {
    /// JSON file of default flag values, keyed by long flag name
    /// (e.g. {"vector-size": 100}). Flags given on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train word vectors and write them as a text model file.
    Train(TrainCmd),
    /// Score a model on an analogy question file.
    Eval(EvalCmd),
    /// Build a topic map JSON from a corpus (or an existing model).
    Build(Box<BuildCmd>),
    /// Scale a reference vector size to another vocabulary size.
    SuggestV(SuggestCmd),
    /// Recompute communities on an existing topic map.
    Communities(CommunitiesCmd),
    /// Serve a topic map and model over HTTP.
    Serve(ServeCmd),
}

/// Per-group merge of command-line values over config-file values.
pub trait Merge {
    fn merge(&mut self, config: Self);
}

macro_rules! merge_fields {
    ($ty:ty { $($opt:ident),* } { $($flag:ident),* }) => {
        impl Merge for $ty {
            fn merge(&mut self, config: Self) {
                $(if self.$opt.is_none() { self.$opt = config.$opt; })*
                $(self.$flag |= config.$flag;)*
            }
        }
    };
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct CorpusArgs {
    /// Directory of .txt documents, or a file with one document per line.
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Skip bigram phrase detection.
    #[arg(long)]
    pub no_phrases: bool,
    /// Minimum phrase score for merging two adjacent terms [default: 100].
    #[arg(long, value_name = "SCORE")]
    pub phrase_threshold: Option<f64>,
    /// Count subtracted from bigram counts when scoring phrases [default: 5].
    #[arg(long, value_name = "COUNT")]
    pub phrase_discount: Option<f64>,
}
merge_fields!(CorpusArgs { input, phrase_threshold, phrase_discount } { no_phrases });

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct TrainArgs {
    /// Dimensions per word vector [default: 250].
    #[arg(long, value_name = "V")]
    pub vector_size: Option<usize>,
    /// Maximum context window radius [default: 12].
    #[arg(long, value_name = "C")]
    pub context: Option<usize>,
    /// Passes over the corpus [default: 5].
    #[arg(long, value_name = "E")]
    pub epochs: Option<usize>,
    /// Negative samples per context word [default: 5].
    #[arg(long)]
    pub negatives: Option<usize>,
    /// Drop terms seen fewer times than this [default: 5].
    #[arg(long)]
    pub min_count: Option<u64>,
    /// Frequent-word subsampling; 0 turns it off [default: 1e-4].
    #[arg(long)]
    pub subsample: Option<f64>,
    /// Initial learning rate [default: 0.025].
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Seed for all randomness [default: 1].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Training threads; only 1 gives reproducible output [default: 1].
    #[arg(long)]
    pub workers: Option<usize>,
}
merge_fields!(TrainArgs {
    vector_size, context, epochs, negatives, min_count, subsample, learning_rate, seed, workers
} {});

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct MapArgs {
    /// Corpus whose term frequencies pick and size the mapped terms,
    /// e.g. a foreground collection inside a larger training corpus.
    #[arg(long, value_name = "PATH")]
    pub counts_input: Option<PathBuf>,
    /// Stopword file, one word per line [default: built-in English list].
    #[arg(long, value_name = "FILE", conflicts_with = "no_stopwords")]
    pub stopwords: Option<PathBuf>,
    /// Keep stopwords.
    #[arg(long)]
    pub no_stopwords: bool,
    /// Number of most frequent terms to map [default: 500].
    #[arg(long, value_name = "N")]
    pub terms: Option<usize>,
    /// Similarity percentile (fraction) a link must reach [default: 0.985].
    #[arg(long, value_name = "P")]
    pub percentile: Option<f64>,
    /// Relaxed percentile of the exported base layer [default: min(0.95, P)].
    #[arg(long, value_name = "P")]
    pub base_percentile: Option<f64>,
    /// Maximum links per term [default: 12].
    #[arg(long, value_name = "L")]
    pub cap: Option<usize>,
}
merge_fields!(MapArgs {
    counts_input, stopwords, terms, percentile, base_percentile, cap
} { no_stopwords });

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct CommunityArgs {
    /// Label propagation passes before giving up on convergence [default: 100].
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Share of a term's link weight that makes a secondary membership [default: 0.3].
    #[arg(long, value_name = "SHARE")]
    pub membership_threshold: Option<f64>,
}
merge_fields!(CommunityArgs { max_iters, membership_threshold } {});

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct TrainCmd {
    #[command(flatten)]
    #[serde(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub train: TrainArgs,
    /// Where to write the model.
    #[arg(long, value_name = "FILE")]
    pub model_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct EvalCmd {
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    /// Analogy questions (": section" headers, four words per line).
    #[arg(long, value_name = "FILE")]
    pub questions: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct BuildCmd {
    #[command(flatten)]
    #[serde(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub train: TrainArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub map: MapArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub communities: CommunityArgs,
    /// Leave community ids null.
    #[arg(long)]
    pub no_communities: bool,
    /// Use this model instead of training one.
    #[arg(long, value_name = "FILE", conflicts_with = "model_out")]
    pub model: Option<PathBuf>,
    /// Also save the trained model.
    #[arg(long, value_name = "FILE")]
    pub model_out: Option<PathBuf>,
    /// Where to write the map JSON.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct SuggestCmd {
    /// Vector size that worked on the reference corpus.
    #[arg(long)]
    pub ref_v: Option<u64>,
    /// Vocabulary size of the reference corpus.
    #[arg(long)]
    pub ref_vocab: Option<u64>,
    /// Vocabulary size of the new corpus.
    #[arg(long)]
    pub vocab: Option<u64>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct CommunitiesCmd {
    #[arg(long, value_name = "FILE")]
    pub map: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub communities: CommunityArgs,
    /// [default: 1]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the map with the new community ids here.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct ServeCmd {
    #[arg(long, value_name = "FILE")]
    pub map: Option<PathBuf>,
    /// Model for neighborhood and compound queries.
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    /// [default: 8787]
    #[arg(long)]
    pub port: Option<u16>,
    /// [default: 127.0.0.1]
    #[arg(long)]
    pub host: Option<String>,
    /// Directory with a built explorer UI to serve at /.
    #[arg(long, value_name = "DIR")]
    pub ui_dir: Option<PathBuf>,
}

merge_fields!(EvalCmd { model, questions } {});
merge_fields!(SuggestCmd { ref_v, ref_vocab, vocab } {});
merge_fields!(ServeCmd { map, model, port, host, ui_dir } {});

impl Merge for TrainCmd {
    fn merge(&mut self, c: Self) {
        self.corpus.merge(c.corpus);
        self.train.merge(c.train);
        if self.model_out.is_none() {
            self.model_out = c.model_out;
        }
    }
}

impl Merge for BuildCmd {
    fn merge(&mut self, c: Self) {
        self.corpus.merge(c.corpus);
        self.train.merge(c.train);
        self.map.merge(c.map);
        self.communities.merge(c.communities);
        self.no_communities |= c.no_communities;
        if self.model.is_none() {
            self.model = c.model;
        }
        if self.model_out.is_none() {
            self.model_out = c.model_out;
        }
        if self.out.is_none() {
            self.out = c.out;
        }
    }
}

impl Merge for CommunitiesCmd {
    fn merge(&mut self, c: Self) {
        self.communities.merge(c.communities);
        if self.map.is_none() {
            self.map = c.map;
        }
        if self.seed.is_none() {
            self.seed = c.seed;
        }
        if self.out.is_none() {
            self.out = c.out;
        }
    }
}
