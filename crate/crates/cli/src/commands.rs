use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter};
use std::path::Path;

use anyhow::Context;
use relwsd::bayes::{Priors, SenseModel};
use relwsd::corpus::{filter_corpus, CorpusStats, FilterConfig, HarvestConfig, Token};
use relwsd::eval::{evaluate, load_test_cases, EvalConfig, SenseMapping};
use relwsd::features::{extract, FeatureConfig};
use relwsd::graph::LexGraph;
use relwsd::parallel::{with_threads, Execution};
use relwsd::relatives::{relatives_by_sense, summarize_relatives, Strategy};
use relwsd::synth::{plateau_shape, size_sweep, Generator, SynthSpec};
use relwsd::train::{train_corpus, TrainConfig, WordPlan};
use relwsd::Sentence;
use serde::{Deserialize, Serialize};

use crate::args::*;
use crate::manifest::{self, HashingReader, Recorder};
use crate::{CliError, Outcome};

/// Plateau tolerance reported with every sweep.
const PLATEAU_TOLERANCE: f64 = 0.005;

pub fn run(command: &Command) -> Result<Outcome, CliError> {
    if let Command::Replay(a) = command {
        return replay(a);
    }
    let run = command.run_args().expect("non-replay commands carry run flags");
    check_inputs(command)?;
    std::fs::create_dir_all(&run.out).with_context(|| format!("creating {}", run.out.display()))?;
    let exec = execution(run.jobs);
    let out = run.out.clone();
    with_threads(run.jobs, || {
        let mut rec = Recorder::default();
        let outcome = match command {
            Command::Relatives(a) => relatives(a, &mut rec),
            Command::Filter(a) => filter(a, exec, &mut rec),
            Command::Train(a) => train(a, exec, &mut rec),
            Command::Classify(a) => classify(a, &mut rec),
            Command::Evaluate(a) => evaluate_cmd(a, exec, &mut rec),
            Command::Synth(a) => synth(a, exec, &mut rec),
            Command::Sweep(a) => sweep(a, exec, &mut rec),
            Command::Replay(_) => unreachable!(),
        }?;
        rec.write_manifest(&out, command).context("writing manifest")?;
        Ok(outcome)
    })
}

fn execution(jobs: usize) -> Execution {
    if jobs <= 1 {
        return Execution::Sequential;
    }
    if !Execution::available() {
        log::warn!("built without parallel support; --jobs {jobs} runs sequentially");
        return Execution::Sequential;
    }
    Execution::Parallel
}

fn check_inputs(command: &Command) -> Result<(), CliError> {
    let paths: Vec<&Path> = match command {
        Command::Relatives(a) => vec![&a.wordnet],
        Command::Filter(a) => vec![&a.corpus],
        Command::Train(a) => vec![&a.wordnet, &a.corpus],
        Command::Classify(a) => vec![&a.models, &a.input],
        Command::Evaluate(a) => vec![&a.wordnet, &a.models, &a.mapping, &a.test],
        Command::Synth(_) | Command::Sweep(_) | Command::Replay(_) => vec![],
    };
    for p in paths {
        if !p.exists() {
            return Err(CliError::MissingInput(p.display().to_string()));
        }
    }
    Ok(())
}

fn level(l: u8) -> Result<Strategy, CliError> {
    Strategy::from_level(l).ok_or_else(|| CliError::Config(format!("strategy level {l} is not in 1..=6")))
}

fn load_graph(path: &Path, rec: &mut Recorder) -> Result<LexGraph, CliError> {
    rec.input("wordnet", path).context("reading wordnet")?;
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    LexGraph::load(BufReader::new(file)).map_err(|e| CliError::Malformed(anyhow::anyhow!("{}: {e}", path.display())))
}

fn filter_config(f: &FilterFlags) -> FilterConfig {
    FilterConfig {
        min_chars: f.min_chars,
        min_words: f.min_words,
        min_pos_classes: f.min_pos_classes,
    }
}

fn train_config(m: &ModelFlags) -> Result<TrainConfig, CliError> {
    let mut features: FeatureConfig = m
        .features
        .parse()
        .map_err(|e| CliError::Config(format!("--features: {e}")))?;
    features.punct_lemmas = !m.no_punct_lemmas;
    if let Some(g) = &m.genders {
        features.gender_values = g
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
    }
    if !(m.alpha > 0.0 && m.alpha.is_finite()) {
        return Err(CliError::Config(format!("--alpha must be positive, got {}", m.alpha)));
    }
    Ok(TrainConfig {
        level: level(m.level)?,
        features,
        alpha: m.alpha,
        min_count: m.min_count,
        filter: filter_config(&m.filter),
        harvest: HarvestConfig {
            min_matches: m.harvest_min,
        },
    })
}

fn json_line<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("values serialize") + "\n"
}

fn pretty<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("values serialize");
    v.push(b'\n');
    v
}

fn relatives(a: &RelativesArgs, rec: &mut Recorder) -> Result<Outcome, CliError> {
    let graph = load_graph(&a.wordnet, rec)?;
    let level = level(a.level)?;
    let mut lines = String::new();
    for w in &a.words {
        let by_sense = relatives_by_sense(&graph, w, level).map_err(|e| CliError::Config(e.to_string()))?;
        for (sense, rels) in by_sense {
            for r in rels {
                #[derive(Serialize)]
                struct Line<'a> {
                    word: &'a str,
                    sense: u32,
                    pattern: String,
                    multiword: bool,
                    origin: Strategy,
                }
                lines += &json_line(&Line {
                    word: &r.target_lemma,
                    sense,
                    pattern: r.pattern.to_string(),
                    multiword: r.multiword(),
                    origin: r.origin,
                });
            }
        }
    }
    let words: Vec<&str> = a.words.iter().map(String::as_str).collect();
    let summary = summarize_relatives(&graph, &words, level).map_err(|e| CliError::Config(e.to_string()))?;
    for (w, n) in &summary.per_word {
        println!("{w}\t{n}");
    }
    println!("mean\t{:.2}", summary.mean);
    rec.output(&a.run.out, "relatives.jsonl", "relatives", lines.as_bytes())?;
    rec.output(&a.run.out, "summary.json", "summary", &pretty(&summary))?;
    Ok(Outcome::Complete)
}

fn open_hashed(path: &Path) -> Result<HashingReader<File>, CliError> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(HashingReader::new(file))
}

fn finish_hashed(reader: HashingReader<File>, role: &str, path: &Path, rec: &mut Recorder) -> Result<(), CliError> {
    let (bytes, sha) = reader.finish().with_context(|| format!("reading {}", path.display()))?;
    rec.input_digest(role, path, bytes, sha);
    Ok(())
}

fn report_stats(stats: &CorpusStats) {
    log::info!(
        "{} documents ({} skipped), {} of {} sentences qualified",
        stats.documents,
        stats.malformed,
        stats.qualified,
        stats.sentences
    );
}

fn filter(a: &FilterArgs, exec: Execution, rec: &mut Recorder) -> Result<Outcome, CliError> {
    let mut hashed = open_hashed(&a.corpus)?;
    let target = "filtered.jsonl";
    let out = BufWriter::new(File::create(a.run.out.join(target)).context("creating filtered corpus")?);
    let stats = filter_corpus(
        BufReader::with_capacity(1 << 20, &mut hashed),
        out,
        &filter_config(&a.filter),
        exec,
    )
    .context("filtering corpus")?;
    finish_hashed(hashed, "corpus", &a.corpus, rec)?;
    report_stats(&stats);
    rec.existing_output(&a.run.out, target, "corpus")?;
    rec.output(&a.run.out, "stats.json", "stats", &pretty(&stats))?;
    Ok(Outcome::Complete)
}

/// File name of a word's model inside the models directory.
pub fn model_file(lemma: &str) -> String {
    let safe: String = lemma
        .chars()
        .map(|c| {
            if c.is_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("models/{safe}.json")
}

fn train(a: &TrainArgs, exec: Execution, rec: &mut Recorder) -> Result<Outcome, CliError> {
    let cfg = train_config(&a.model)?;
    let graph = load_graph(&a.wordnet, rec)?;
    let plans = a
        .words
        .iter()
        .map(|w| WordPlan::new(&graph, w, cfg.level))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let mut hashed = open_hashed(&a.corpus)?;
    let (models, stats) = train_corpus(BufReader::with_capacity(1 << 20, &mut hashed), &plans, &cfg, exec)
        .map_err(|e| CliError::Internal(anyhow::anyhow!("training: {e}")))?;
    finish_hashed(hashed, "corpus", &a.corpus, rec)?;
    report_stats(&stats);
    for m in &models {
        log::info!(
            "{}: {} occurrences, {} feature keys",
            m.target_lemma(),
            m.total_occurrences(),
            m.vocabulary_size()
        );
        let mut buf = Vec::new();
        m.save(&mut buf).context("serializing model")?;
        rec.output(&a.run.out, &model_file(m.target_lemma()), "model", &buf)?;
    }
    rec.output(&a.run.out, "stats.json", "stats", &pretty(&stats))?;
    Ok(Outcome::Complete)
}

/// Loads every `*.json` model under `dir` (or `dir/models`), keyed by word.
fn load_models(dir: &Path, rec: &mut Recorder) -> Result<HashMap<String, SenseModel>, CliError> {
    let dir = if dir.join("models").is_dir() {
        dir.join("models")
    } else {
        dir.to_path_buf()
    };
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let mut models = HashMap::new();
    for f in files {
        rec.input("model", &f).context("reading model")?;
        let m = SenseModel::load(BufReader::new(File::open(&f).context("opening model")?))
            .map_err(|e| CliError::Malformed(anyhow::anyhow!("{}: {e}", f.display())))?;
        models.insert(m.target_lemma().to_string(), m);
    }
    Ok(models)
}

fn parse_priors(spec: &str, rec: &mut Recorder) -> Result<(Priors, BTreeMap<String, Priors>), CliError> {
    match spec {
        "empirical" => Ok((Priors::Empirical, BTreeMap::new())),
        "uniform" => Ok((Priors::Uniform, BTreeMap::new())),
        path => {
            let p = Path::new(path);
            if !p.exists() {
                return Err(CliError::MissingInput(path.to_string()));
            }
            rec.input("priors", p).context("reading priors")?;
            let text = std::fs::read_to_string(p).context("reading priors")?;
            let table: BTreeMap<String, BTreeMap<u32, f64>> =
                serde_json::from_str(&text).map_err(|e| CliError::Malformed(anyhow::anyhow!("{path}: {e}")))?;
            let by_word = table
                .into_iter()
                .map(|(w, p)| (w.to_lowercase(), Priors::Explicit(p)))
                .collect();
            // words missing from the file have no usable prior
            Ok((Priors::Explicit(BTreeMap::new()), by_word))
        }
    }
}

#[derive(Deserialize)]
struct ClassifyRecord {
    word: String,
    span_start: usize,
    tokens: Vec<Token>,
}

#[derive(Serialize)]
struct Prediction {
    line: usize,
    word: String,
    span_start: usize,
    sense: Option<u32>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    scores: BTreeMap<u32, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn classify(a: &ClassifyArgs, rec: &mut Recorder) -> Result<Outcome, CliError> {
    let models = load_models(&a.models, rec)?;
    let (priors, by_word) = parse_priors(&a.priors.priors, rec)?;
    rec.input("input", &a.input).context("reading input")?;
    let reader = BufReader::new(File::open(&a.input).context("opening input")?);
    let mut out = String::new();
    let mut partial = false;
    for (n, line) in reader.lines().enumerate() {
        let line = line.context("reading input")?;
        if line.trim().is_empty() {
            continue;
        }
        let r: ClassifyRecord =
            serde_json::from_str(&line).map_err(|e| CliError::Malformed(anyhow::anyhow!("line {}: {e}", n + 1)))?;
        if r.span_start >= r.tokens.len() {
            return Err(CliError::Malformed(anyhow::anyhow!(
                "line {}: span outside the sentence",
                n + 1
            )));
        }
        let word = r.word.trim().to_lowercase();
        let mut p = Prediction {
            line: n + 1,
            word: word.clone(),
            span_start: r.span_start,
            sense: None,
            scores: BTreeMap::new(),
            error: None,
        };
        match models.get(&word) {
            None => p.error = Some("no model".into()),
            Some(m) => {
                let sentence = Sentence::new(r.tokens);
                let features = m.features.clone().unwrap_or_default();
                let x = extract(&sentence, r.span_start, r.span_start, &features);
                let scored = if a.priors.standard {
                    m.score_standard(&x, by_word.get(&word).unwrap_or(&priors))
                } else {
                    Ok(m.score_modified(&x))
                };
                match scored {
                    Ok(s) => {
                        p.sense = Some(s.chosen);
                        p.scores = s.senses.iter().copied().zip(s.log_scores.iter().copied()).collect();
                    }
                    Err(e) => p.error = Some(e.to_string()),
                }
            }
        }
        partial |= p.error.is_some();
        out += &json_line(&p);
    }
    rec.output(&a.run.out, "predictions.jsonl", "predictions", out.as_bytes())?;
    Ok(if partial { Outcome::Partial } else { Outcome::Complete })
}

fn evaluate_cmd(a: &EvaluateArgs, exec: Execution, rec: &mut Recorder) -> Result<Outcome, CliError> {
    let graph = load_graph(&a.wordnet, rec)?;
    let models = load_models(&a.models, rec)?;
    rec.input("mapping", &a.mapping).context("reading mapping")?;
    let mapping = SenseMapping::load(BufReader::new(File::open(&a.mapping).context("opening mapping")?))
        .map_err(|e| CliError::Malformed(anyhow::anyhow!("{}: {e}", a.mapping.display())))?;
    rec.input("test", &a.test).context("reading test set")?;
    let cases = load_test_cases(BufReader::new(File::open(&a.test).context("opening test set")?))
        .map_err(|e| CliError::Malformed(anyhow::anyhow!("{}: {e}", a.test.display())))?;
    let (priors, priors_by_word) = parse_priors(&a.priors, rec)?;
    let cfg = EvalConfig {
        seed: a.seed,
        priors,
        priors_by_word,
        similarity_first_sense_only: a.similarity_first_sense,
        ..EvalConfig::default()
    };
    let report = evaluate(&models, &mapping, &cases, &graph, &cfg, exec);
    let tsv = report.to_tsv();
    print!("{tsv}");
    for s in &report.skipped {
        log::warn!("skipped `{}` ({} cases): {}", s.word, s.cases, s.reason);
    }
    rec.output(&a.run.out, "report.tsv", "report", tsv.as_bytes())?;
    rec.output(&a.run.out, "report.json", "report", report.to_json().as_bytes())?;
    Ok(if report.skipped.is_empty() {
        Outcome::Complete
    } else {
        Outcome::Partial
    })
}

fn weights(flag: &Option<String>, senses: usize, name: &str) -> Result<Vec<f64>, CliError> {
    match flag {
        None => Ok(vec![1.0; senses]),
        Some(s) => s
            .split(':')
            .map(|w| w.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Config(format!("--{name} `{s}`: {e}"))),
    }
}

fn synth_spec(f: &SpecFlags) -> Result<SynthSpec, CliError> {
    Ok(SynthSpec {
        target: f.target.clone(),
        senses: f.senses,
        relatives_per_sense: f.relatives_per_sense,
        signature_size: f.signature_size,
        overlap: f.overlap,
        context_words: f.context_words,
        relative_rate: f.relative_rate,
        target_rate: f.target_rate,
        sentences_per_doc: f.sentences_per_doc,
        train_prior: weights(&f.prior, f.senses, "prior")?,
        test_prior: weights(&f.test_prior, f.senses, "test-prior")?,
        documents: f.documents,
        test_cases: f.test_cases,
        seed: f.seed,
        ..SynthSpec::default()
    })
}

fn synth_error(e: relwsd::synth::SynthError) -> CliError {
    use relwsd::synth::SynthError::*;
    match e {
        Infeasible(_) | BadSizes(_) | SizeTooLarge { .. } => CliError::Config(e.to_string()),
        other => CliError::Internal(other.into()),
    }
}

fn synth(a: &SynthArgs, exec: Execution, rec: &mut Recorder) -> Result<Outcome, CliError> {
    let g = Generator::new(synth_spec(&a.spec)?).map_err(synth_error)?;
    let out = &a.run.out;
    let corpus = BufWriter::with_capacity(
        1 << 20,
        File::create(out.join("corpus.jsonl")).context("creating corpus")?,
    );
    g.write_corpus(corpus, exec).context("writing corpus")?;
    rec.existing_output(out, "corpus.jsonl", "corpus")?;
    let mut test = Vec::new();
    g.write_test_cases(&mut test, exec).context("writing test set")?;
    rec.output(out, "test.jsonl", "test", &test)?;
    let mut wn = Vec::new();
    g.write_wordnet(&mut wn).context("writing wordnet")?;
    rec.output(out, "wordnet.jsonl", "wordnet", &wn)?;
    rec.output(
        out,
        "mapping.jsonl",
        "mapping",
        g.lexicon.mapping().to_jsonl().as_bytes(),
    )?;
    rec.output(out, "spec.json", "spec", &pretty(&g.spec))?;
    Ok(Outcome::Complete)
}

fn sweep(a: &SweepArgs, exec: Execution, rec: &mut Recorder) -> Result<Outcome, CliError> {
    let sizes = a
        .sizes
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Config(format!("--sizes `{}`: {e}", a.sizes)))?;
    let spec = synth_spec(&a.spec)?;
    let cfg = train_config(&a.model)?;
    let rows = size_sweep(&spec, &sizes, &cfg, exec).map_err(synth_error)?;
    let shape = plateau_shape(&rows, PLATEAU_TOLERANCE);
    let mut tsv = String::from("documents\toccurrences\taccuracy\n");
    for r in &rows {
        let _ = writeln!(tsv, "{}\t{}\t{:.6}", r.documents, r.occurrences, r.accuracy);
    }
    print!("{tsv}");
    #[derive(Serialize)]
    struct Sweep<'a> {
        rows: &'a [relwsd::synth::SweepRow],
        plateau_tolerance: f64,
        plateau: relwsd::synth::PlateauShape,
    }
    rec.output(&a.run.out, "sweep.tsv", "sweep", tsv.as_bytes())?;
    let doc = Sweep {
        rows: &rows,
        plateau_tolerance: PLATEAU_TOLERANCE,
        plateau: shape,
    };
    rec.output(&a.run.out, "sweep.json", "sweep", &pretty(&doc))?;
    Ok(Outcome::Complete)
}

fn replay(a: &ReplayArgs) -> Result<Outcome, CliError> {
    if !a.manifest.exists() {
        return Err(CliError::MissingInput(a.manifest.display().to_string()));
    }
    let m = manifest::load(&a.manifest).map_err(|e| CliError::Malformed(e.context("reading manifest")))?;
    for input in &m.inputs {
        if !input.path.exists() {
            return Err(CliError::MissingInput(input.path.display().to_string()));
        }
        let (_, sha) = manifest::digest_file(&input.path).context("digesting input")?;
        if sha != input.sha256 {
            return Err(CliError::Malformed(anyhow::anyhow!(
                "{} changed since the recorded run",
                input.path.display()
            )));
        }
    }
    let mut command = m.command.clone();
    match command.run_args_mut() {
        Some(r) => r.out = a.out.clone(),
        None => return Err(CliError::Config("a manifest cannot record a replay".into())),
    }
    log::info!(
        "replaying `{}` (config {})",
        serde_json::to_string(&command).unwrap_or_default(),
        m.config_hash
    );
    run(&command)
}
