// SPDX-License-Identifier: Apache-2.0

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Args;
use momentburst::baselines::{delta_series, BaselineMethod, SliceCounts};
use momentburst::classify::{
    build_training_set, grid_search, self_train, train_adaboost, GridSpec, LabeledExample, TrainingStream,
};
use momentburst::detect::{read_detection_log, score_series, write_detection_log};
use momentburst::eval::{evaluate_series, summary_json, EventSeries};
use momentburst::features::{feature_csv_header, scan_windows, write_feature_rows, FEATURE_COUNT};
use momentburst::ingest::replay_file;
use momentburst::synth::{generate, write_files};
use momentburst::{
    AverageMode, BoostParams, BurstSpec, FeatureConfig, FeatureFamily, GroundTruth, Message, ModelFile, ScorePoint,
    SeedLexicon, StopWords, StreamConfig, SynthConfig, TrainingConfig, TrainingSet,
};

use crate::config::{missing, ConfigFile};
use crate::{CliError, Command, Common};

type Res<T> = Result<T, CliError>;

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Generator settings as JSON; flags override individual fields.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Where to write the ground-truth CSV.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Stream length in seconds.
    #[arg(long)]
    pub duration: Option<i64>,
    /// Messages per second.
    #[arg(long)]
    pub rate: Option<u32>,
    #[arg(long)]
    pub vocab_size: Option<usize>,
    /// Planted burst as `start:length:intensity:tok|tok[:volume_boost]`,
    /// times in seconds from the stream start. Repeatable.
    #[arg(long)]
    pub burst: Vec<String>,
}

/// Where labelled examples come from: a saved training set, or streams with
/// ground truth plus seed and stop-word lists.
#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Saved labelled examples (CSV).
    #[arg(long)]
    pub training_set: Option<PathBuf>,
    /// Ground truth per `--input`, same order. Repeatable.
    #[arg(long)]
    pub truth: Vec<PathBuf>,
    /// Exact seed tokens for positives, one per line. Defaults to --lexicon.
    #[arg(long)]
    pub seeds: Option<PathBuf>,
    /// Stop words for negatives; defaults to the shipped English and Spanish lists.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Windows sampled per stream for negatives.
    #[arg(long)]
    pub negative_windows: Option<usize>,
    /// Also write the labelled examples to this CSV.
    #[arg(long)]
    pub save_training_set: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Grid-search result whose best cells set the base-learner parameters.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub n_trees: Option<usize>,
    #[arg(long)]
    pub max_features: Option<usize>,
    #[arg(long)]
    pub svm_c: Option<f64>,
    #[arg(long)]
    pub svm_gamma: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Feature family to leave out. Repeatable.
    #[arg(long)]
    pub exclude: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub folds: Option<usize>,
    /// SVM cost exponents `lo:hi` (powers of two).
    #[arg(long, allow_hyphen_values = true)]
    pub svm_c_exp: Option<String>,
    /// SVM gamma exponents `lo:hi`.
    #[arg(long, allow_hyphen_values = true)]
    pub svm_gamma_exp: Option<String>,
    /// Forest size exponents `lo:hi`.
    #[arg(long, allow_hyphen_values = true)]
    pub trees_exp: Option<String>,
    /// Features-per-split exponents `lo:hi`.
    #[arg(long, allow_hyphen_values = true)]
    pub features_exp: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SelfTrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Minimum score for an unlabelled vector to become a positive.
    #[arg(long)]
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct BaselineArgs {
    /// `rawburst` or `tokenburst`.
    #[arg(long)]
    pub method: Option<String>,
    /// `prior` (mean of the k slices before t) or `literal` (k slices ending at t).
    #[arg(long)]
    pub average: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Ground truth CSV per series, same order. Repeatable.
    #[arg(long)]
    pub truth: Vec<PathBuf>,
    /// Detection log (JSON lines) or baseline Δ CSV. Repeatable.
    #[arg(long)]
    pub series: Vec<PathBuf>,
    /// Name reported in the summary.
    #[arg(long)]
    pub method: Option<String>,
    /// Composite ROC CSV.
    #[arg(long)]
    pub roc: Option<PathBuf>,
    /// Summary JSON; stdout when unset.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AblateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub folds: Option<usize>,
}

/// Resolved view over flags and the config file.
struct Ctx<'a> {
    common: &'a Common,
    file: &'a ConfigFile,
}

impl Ctx<'_> {
    fn stream(&self) -> Res<StreamConfig> {
        let d = StreamConfig::default();
        let s = StreamConfig {
            delta: self.file.pick_or("delta", self.common.delta, d.delta)?,
            omega: self.file.pick_or("omega", self.common.omega, d.omega)?,
            k: self.file.pick_or("k", self.common.k, d.k)?,
            t0: None,
        };
        s.validate()?;
        Ok(s)
    }

    fn features(&self, stream: &StreamConfig) -> Res<FeatureConfig> {
        let mut f = FeatureConfig::for_stream(stream);
        f.min_count = self.file.pick_or("min_count", self.common.min_count, f.min_count)?;
        Ok(f)
    }

    fn tau(&self) -> Res<i64> {
        let tau = self.file.pick_or("tau", self.common.tau, 2)?;
        if tau < 0 {
            return Err(CliError::Usage(format!("--tau must be >= 0, got {tau}")));
        }
        Ok(tau)
    }

    fn seed(&self) -> Res<u64> {
        self.file.pick_or("rng_seed", self.common.rng_seed, 0)
    }

    fn inputs(&self) -> Vec<PathBuf> {
        self.file.paths("input", &self.common.input)
    }

    fn single_input(&self) -> Res<PathBuf> {
        let mut v = self.inputs();
        match v.len() {
            0 => Err(missing("input")),
            1 => Ok(v.remove(0)),
            n => Err(CliError::Usage(format!("expected one --input, got {n}"))),
        }
    }

    fn output(&self) -> Res<Option<PathBuf>> {
        self.file.pick("output", self.common.output.clone())
    }

    fn model_path(&self) -> Res<PathBuf> {
        self.file.require("model", self.common.model.clone())
    }

    fn lexicon_path(&self) -> Res<Option<PathBuf>> {
        self.file.pick("lexicon", self.common.lexicon.clone())
    }

    fn boost(&self, m: &ModelArgs) -> Res<BoostParams> {
        let mut p = BoostParams::default().with_seed(self.seed()?);
        if let Some(path) = &m.params {
            let text = read_text(path)?;
            let grid: momentburst::classify::GridSearchResult =
                serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            p = grid.best_params(&p);
        }
        p.forest.n_trees = self.file.pick_or("n_trees", m.n_trees, p.forest.n_trees)?;
        p.forest.max_features = self.file.pick_or("max_features", m.max_features, p.forest.max_features)?;
        p.svm.c = self.file.pick_or("svm_c", m.svm_c, p.svm.c)?;
        p.svm.gamma = self.file.pick_or("svm_gamma", m.svm_gamma, p.svm.gamma)?;
        if p.forest.n_trees == 0 || p.forest.max_features == 0 || p.svm.c <= 0.0 || p.svm.gamma <= 0.0 {
            return Err(CliError::Usage("tree count, features per split, svm c and gamma must be positive".into()));
        }
        Ok(p)
    }

    /// Labelled examples from `--training-set`, or built from the input
    /// streams and their ground truth.
    fn training_set(&self, d: &DataArgs) -> Res<TrainingSet> {
        let set = if let Some(path) = self.file.pick("training_set", d.training_set.clone())? {
            let f = File::open(&path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
            TrainingSet::read_csv(BufReader::new(f))?
        } else {
            let inputs = self.inputs();
            let truths = self.file.paths("truth", &d.truth);
            if inputs.is_empty() {
                return Err(CliError::Usage("missing --training-set, or --input with --truth to build one".into()));
            }
            if truths.len() != inputs.len() {
                return Err(CliError::Usage(format!(
                    "need one --truth per --input ({} inputs, {} truths)",
                    inputs.len(),
                    truths.len()
                )));
            }
            let seeds_path = match self.file.pick("seeds", d.seeds.clone())? {
                Some(p) => p,
                None => self.lexicon_path()?.ok_or_else(|| missing("seeds"))?,
            };
            let seeds = word_list(&read_text(&seeds_path)?);
            if seeds.is_empty() {
                return Err(CliError::Data(format!("{}: no seed tokens", seeds_path.display())));
            }
            let stopwords = match self.file.pick("stopwords", d.stopwords.clone())? {
                Some(p) => StopWords::parse(&read_text(&p)?),
                None => StopWords::english_spanish(),
            };
            let stream = self.stream()?;
            let defaults = TrainingConfig::default();
            let cfg = TrainingConfig {
                stream,
                features: self.features(&stream)?,
                tau: self.tau()?,
                negative_windows: self.file.pick_or(
                    "negative_windows",
                    d.negative_windows,
                    defaults.negative_windows,
                )?,
                seed: self.seed()?,
            };
            let mut loaded = Vec::with_capacity(inputs.len());
            for (input, truth) in inputs.iter().zip(&truths) {
                loaded.push((load_stream(input)?, load_truth(truth)?));
            }
            let streams: Vec<TrainingStream<'_>> =
                loaded.iter().map(|(m, t)| TrainingStream { messages: m, truth: t }).collect();
            build_training_set(&streams, &seeds, &stopwords, &cfg)?
        };
        eprintln!("training set: {} positive, {} negative", set.positives(), set.negatives());
        if let Some(path) = &d.save_training_set {
            set.write_csv(create(path)?)?;
        }
        Ok(set)
    }
}

pub fn dispatch(command: &Command, common: &Common, file: &ConfigFile) -> Res<()> {
    let ctx = Ctx { common, file };
    match command {
        Command::Synth(a) => synth(&ctx, a),
        Command::Features => features(&ctx),
        Command::Train(a) => train(&ctx, a),
        Command::Gridsearch(a) => gridsearch(&ctx, a),
        Command::Selftrain(a) => selftrain(&ctx, a),
        Command::Detect => detect(&ctx),
        Command::Baseline(a) => baseline(&ctx, a),
        Command::Eval(a) => eval(&ctx, a),
        Command::Ablate(a) => ablate(&ctx, a),
    }
}

fn read_text(path: &Path) -> Res<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))
}

fn create(path: &Path) -> Res<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

/// File when a path is given, stdout otherwise.
fn sink(path: Option<&Path>) -> Res<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn finish(mut w: Box<dyn Write>) -> Res<()> {
    w.flush().map_err(|e| CliError::Data(format!("write failed: {e}")))
}

/// One token per line; blank lines and `#` comments skipped.
fn word_list(text: &str) -> Vec<String> {
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(str::to_string).collect()
}

fn load_stream(path: &Path) -> Res<Vec<Message>> {
    let (messages, stats) = replay_file(path)?;
    eprintln!("{}: {stats}", path.display());
    Ok(messages)
}

fn load_truth(path: &Path) -> Res<GroundTruth> {
    Ok(GroundTruth::read_csv_file(path)?)
}

fn parse_burst(s: &str) -> Res<BurstSpec> {
    let bad = || CliError::Usage(format!("--burst `{s}`: expected start:length:intensity:tok|tok[:volume_boost]"));
    let parts: Vec<&str> = s.split(':').collect();
    if !(4..=5).contains(&parts.len()) {
        return Err(bad());
    }
    Ok(BurstSpec {
        start: parts[0].parse().map_err(|_| bad())?,
        length: parts[1].parse().map_err(|_| bad())?,
        intensity: parts[2].parse().map_err(|_| bad())?,
        tokens: parts[3].split('|').filter(|t| !t.is_empty()).map(str::to_string).collect(),
        volume_boost: parts.get(4).map_or(Ok(1.0), |v| v.parse()).map_err(|_| bad())?,
    })
}

fn synth(ctx: &Ctx<'_>, a: &SynthArgs) -> Res<()> {
    let mut cfg = match &a.spec {
        Some(p) => SynthConfig::from_json(&read_text(p)?)?,
        None => SynthConfig::default(),
    };
    if let Some(seed) = ctx.file.pick("rng_seed", ctx.common.rng_seed)? {
        cfg.seed = seed;
    }
    if let Some(delta) = ctx.file.pick("delta", ctx.common.delta)? {
        cfg.delta = delta;
    }
    cfg.duration = a.duration.unwrap_or(cfg.duration);
    cfg.rate = a.rate.unwrap_or(cfg.rate);
    cfg.vocab_size = a.vocab_size.unwrap_or(cfg.vocab_size);
    if !a.burst.is_empty() {
        cfg.bursts = a.burst.iter().map(|b| parse_burst(b)).collect::<Res<_>>()?;
    }
    let out = ctx.output()?.ok_or_else(|| missing("output"))?;
    let truth = ctx.file.require("truth", a.truth.clone())?;
    let (messages, gt) = generate(&cfg)?;
    write_files(&messages, &gt, &out, &truth)?;
    eprintln!("synth: {} messages, {} moments", messages.len(), gt.moments.len());
    Ok(())
}

fn features(ctx: &Ctx<'_>) -> Res<()> {
    let stream = ctx.stream()?;
    let fcfg = ctx.features(&stream)?;
    let messages = load_stream(&ctx.single_input()?)?;
    let mut w = csv::Writer::from_writer(sink(ctx.output()?.as_deref())?);
    w.write_record(feature_csv_header()).map_err(data)?;
    scan_windows(&messages, stream, &fcfg, |_, cands, normalized| {
        write_feature_rows(&mut w, cands, normalized).map_err(|e| momentburst::Error::InvalidInput(e.to_string()))
    })?;
    finish(w.into_inner().map_err(|e| CliError::Data(e.to_string()))?)
}

fn data(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

fn family_columns(names: &[String]) -> Res<Vec<usize>> {
    let mut drop = Vec::new();
    for n in names {
        let fam = FeatureFamily::ALL.iter().find(|f| f.name() == n.as_str()).ok_or_else(|| {
            let known: Vec<&str> = FeatureFamily::ALL.iter().map(|f| f.name()).collect();
            CliError::Usage(format!("--exclude `{n}`: expected one of {}", known.join(", ")))
        })?;
        drop.extend_from_slice(fam.columns());
    }
    let keep: Vec<usize> = (0..FEATURE_COUNT).filter(|c| !drop.contains(c)).collect();
    if keep.is_empty() {
        return Err(CliError::Usage("--exclude removes every feature".into()));
    }
    Ok(keep)
}

fn train(ctx: &Ctx<'_>, a: &TrainArgs) -> Res<()> {
    let model_path = ctx.model_path()?;
    let columns = family_columns(&a.exclude)?;
    let params = ctx.boost(&a.model)?;
    let stream = ctx.stream()?;
    let fcfg = ctx.features(&stream)?;
    let set = ctx.training_set(&a.data)?;
    let ensemble = train_adaboost(&set.dataset().select_columns(&columns), &params)?;
    ModelFile::new(stream, fcfg, columns, ensemble).save(&model_path)?;
    eprintln!("model written to {}", model_path.display());
    Ok(())
}

fn exp_range(flag: &str, v: Option<&String>, default: (i32, i32)) -> Res<(i32, i32)> {
    let Some(v) = v else {
        return Ok(default);
    };
    let bad = || CliError::Usage(format!("--{flag} `{v}`: expected lo:hi"));
    let (lo, hi) = v.split_once(':').ok_or_else(bad)?;
    let r = (lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?);
    if r.0 > r.1 {
        return Err(bad());
    }
    Ok(r)
}

fn gridsearch(ctx: &Ctx<'_>, a: &GridArgs) -> Res<()> {
    let pow2 = |(lo, hi): (i32, i32)| (lo..=hi).map(|x| 2f64.powi(x)).collect::<Vec<f64>>();
    let ipow2 = |(lo, hi): (i32, i32)| -> Res<Vec<usize>> {
        if lo < 0 || hi > 30 {
            return Err(CliError::Usage("integer grid exponents must lie in 0..=30".into()));
        }
        Ok((lo..=hi).map(|x| 1usize << x).collect())
    };
    let grid = GridSpec {
        svm_c: pow2(exp_range("svm-c-exp", a.svm_c_exp.as_ref(), (-2, 10))?),
        svm_gamma: pow2(exp_range("svm-gamma-exp", a.svm_gamma_exp.as_ref(), (-2, 10))?),
        forest_trees: ipow2(exp_range("trees-exp", a.trees_exp.as_ref(), (0, 10))?)?,
        forest_features: ipow2(exp_range("features-exp", a.features_exp.as_ref(), (1, 12))?)?,
    };
    let folds = ctx.file.pick_or("folds", a.folds, 10)?;
    let base = ctx.boost(&a.model)?;
    let set = ctx.training_set(&a.data)?;
    let result = grid_search(&grid, &set.dataset(), folds, &base, ctx.seed()?)?;
    eprintln!(
        "best svm {:?} auc {:.4}; best forest {:?} auc {:.4}",
        result.svm.params, result.svm.mean_auc, result.forest.params, result.forest.mean_auc
    );
    let mut w = sink(ctx.output()?.as_deref())?;
    let json = serde_json::to_string_pretty(&result).expect("grid result serializes");
    writeln!(w, "{json}").map_err(data)?;
    finish(w)
}

fn selftrain(ctx: &Ctx<'_>, a: &SelfTrainArgs) -> Res<()> {
    let model = ModelFile::load(ctx.model_path()?)?;
    if model.columns != (0..FEATURE_COUNT).collect::<Vec<_>>() {
        return Err(CliError::Usage("self-training needs a model trained on every feature column".into()));
    }
    let out = ctx.output()?.ok_or_else(|| missing("output"))?;
    let theta = ctx.file.pick_or("theta", a.theta, 0.9)?;
    if !(0.0..=1.0).contains(&theta) {
        return Err(CliError::Usage(format!("--theta must lie in [0, 1], got {theta}")));
    }
    let training_path = ctx.file.require("training_set", a.data.training_set.clone())?;
    let f = File::open(&training_path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", training_path.display())))?;
    let set = TrainingSet::read_csv(BufReader::new(f))?;
    let inputs = ctx.inputs();
    if inputs.is_empty() {
        return Err(missing("input"));
    }
    let mut unlabeled = Vec::new();
    for p in &inputs {
        let messages = load_stream(p)?;
        unlabeled.extend(momentburst::classify::training::collect_unlabeled(&messages, model.stream, &model.features)?);
    }
    let params = ctx.boost(&a.model)?;
    let (examples, ensemble): (Vec<LabeledExample>, _) =
        self_train(&model.ensemble, &set.examples, &unlabeled, theta, &params)?;
    eprintln!("self-training: {} examples after expansion", examples.len());
    if let Some(p) = &a.data.save_training_set {
        TrainingSet { examples }.write_csv(create(p)?)?;
    }
    ModelFile::new(model.stream, model.features, model.columns, ensemble).save(&out)?;
    Ok(())
}

fn detect(ctx: &Ctx<'_>) -> Res<()> {
    let model = ModelFile::load(ctx.model_path()?)?;
    let rho = ctx.file.pick_or("rho", ctx.common.rho, 2)?;
    if rho < 1 {
        return Err(CliError::Usage("--rho must be >= 1".into()));
    }
    let messages = load_stream(&ctx.single_input()?)?;
    let series = score_series(&model, &messages, None)?;
    let flagged = series.iter().filter(|e| e.bursty.count() >= rho).count();
    eprintln!("detect: {} windows, {flagged} flagged at rho={rho}", series.len());
    let mut w = sink(ctx.output()?.as_deref())?;
    write_detection_log(&series, rho, &mut w)?;
    finish(w)
}

fn baseline(ctx: &Ctx<'_>, a: &BaselineArgs) -> Res<()> {
    let method: String = ctx.file.require("method", a.method.clone())?;
    let method = match method.to_ascii_lowercase().as_str() {
        "rawburst" => BaselineMethod::RawBurst,
        "tokenburst" => BaselineMethod::TokenBurst,
        other => return Err(CliError::Usage(format!("--method `{other}`: expected rawburst or tokenburst"))),
    };
    let average: String = ctx.file.pick_or("average", a.average.clone(), "prior".into())?;
    let average = match average.as_str() {
        "prior" => AverageMode::Prior,
        "literal" => AverageMode::Literal,
        other => return Err(CliError::Usage(format!("--average `{other}`: expected prior or literal"))),
    };
    let lexicon = match ctx.lexicon_path()? {
        Some(p) => SeedLexicon::load(p)?,
        None => SeedLexicon::combined(),
    };
    let stream = ctx.stream()?;
    let messages = load_stream(&ctx.single_input()?)?;
    let counts = SliceCounts::tally(&messages, &stream, &lexicon);
    let series = delta_series(method, &counts, stream.k, average);
    let w = sink(ctx.output()?.as_deref())?;
    series.write_csv(w)?;
    Ok(())
}

fn read_series(path: &Path, k: usize) -> Res<Vec<ScorePoint>> {
    let f = File::open(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    Ok(if is_csv {
        momentburst::DeltaSeries::read_csv(BufReader::new(f), BaselineMethod::RawBurst, k)?.score_points()
    } else {
        read_detection_log(BufReader::new(f))?
    })
}

fn eval(ctx: &Ctx<'_>, a: &EvalArgs) -> Res<()> {
    let series_paths = ctx.file.paths("series", &a.series);
    let truth_paths = ctx.file.paths("truth", &a.truth);
    if series_paths.is_empty() {
        return Err(missing("series"));
    }
    if truth_paths.is_empty() {
        return Err(missing("truth"));
    }
    if truth_paths.len() != series_paths.len() {
        return Err(CliError::Usage(format!(
            "need one --truth per --series ({} series, {} truths)",
            series_paths.len(),
            truth_paths.len()
        )));
    }
    let stream = ctx.stream()?;
    let tau = ctx.tau()?;
    let mut events = Vec::new();
    for (s, t) in series_paths.iter().zip(&truth_paths) {
        let name = s.file_stem().map_or_else(|| s.display().to_string(), |n| n.to_string_lossy().into_owned());
        events.push(EventSeries::new(name, read_series(s, stream.k)?, &load_truth(t)?, stream.delta, tau));
    }
    let method: String = ctx.file.pick_or("method", a.method.clone(), "detector".into())?;
    let report = evaluate_series(&method, &events)?;
    eprintln!("{method}: composite auc {:.4}", report.composite.auc);
    if let Some(p) = ctx.file.pick("roc", a.roc.clone())? {
        report.composite.write_csv(create(&p)?)?;
    }
    let mut w = sink(ctx.file.pick("summary", a.summary.clone())?.as_deref())?;
    let json = serde_json::to_string_pretty(&summary_json(&[report])).expect("summary serializes");
    writeln!(w, "{json}").map_err(data)?;
    finish(w)
}

fn ablate(ctx: &Ctx<'_>, a: &AblateArgs) -> Res<()> {
    let folds = ctx.file.pick_or("folds", a.folds, 10)?;
    let params = ctx.boost(&a.model)?;
    let set = ctx.training_set(&a.data)?;
    let report = momentburst::eval::ablate(&set.dataset(), &params, folds, ctx.seed()?)?;
    for r in &report.rows {
        eprintln!("{:<20} auc {:.4} diff {:+.4}", r.excluded.as_deref().unwrap_or("none"), r.mean_auc, r.difference);
    }
    report.write_csv(sink(ctx.output()?.as_deref())?)?;
    Ok(())
}
