//! One function per subcommand. Each reads its inputs from the resolved config,
//! writes into the output directory and reports what it touched for the manifest.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use napss_core::assembler::{assemble_input, generate_all, AssembledInput, EchoAdapter, RemoteSimplifier, Simplifier};
use napss_core::corpus::{import_cochrane, load_corpus, Corpus};
use napss_core::metrics::{evaluate_corpus, EvalInstance, ExternalSemanticScorer, MetricError, SemanticScorer};
use napss_core::narrative::{build_prompt, parse_conllu_documents, read_conllu, DepParse, NarrativePrompt};
use napss_core::remote::JsonClient;
use napss_core::sentmatch::{build_summary_dataset, LabeledSentenceDataset};
use napss_core::summarizer::{
    evaluate_classifier, extract_summary, train_classifier, ExternalScorer, ExtractiveSummary, OracleScorer,
    SentenceScorer, SentenceScorerModel, SummarizerError,
};
use napss_core::Split;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{AdapterChoice, RunConfig, ScorerChoice};
use crate::error::{CliError, ResultExt};
use crate::files;

/// What a step read and wrote, plus lines for the terminal and manifest details.
#[derive(Debug, Default)]
pub struct StepOutput {
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub messages: Vec<String>,
    pub details: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PromptRecord {
    pub doc_id: String,
    pub prompt: NarrativePrompt,
}

/// One generation with the exact input that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub doc_id: String,
    pub generated_pls: String,
    pub model_tag: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncated: Option<bool>,
    pub input: AssembledInput,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub doc_id: String,
    pub error: String,
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), CliError> {
    let ctx = || format!("writing {}", path.display());
    let mut out = BufWriter::new(File::create(path).data(ctx())?);
    for item in items {
        serde_json::to_writer(&mut out, item).data(ctx())?;
        out.write_all(b"\n").data(ctx())?;
    }
    out.flush().data(ctx())
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let file = File::open(path).data(format!("reading {}", path.display()))?;
    let mut items = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.data(format!("reading {}", path.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        items.push(serde_json::from_str(&line).data(format!("{} line {}", path.display(), n + 1))?);
    }
    Ok(items)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    fs::write(path, text + "\n").data(format!("writing {}", path.display()))
}

fn load_corpus_checked(config: &RunConfig) -> Result<(Corpus, PathBuf), CliError> {
    let path = config.corpus_path()?.to_path_buf();
    config.require_existing([("corpus", path.as_path())])?;
    let corpus = load_corpus(&path).data("loading corpus")?;
    Ok((corpus, path))
}

fn load_dataset(path: &Path) -> Result<LabeledSentenceDataset, CliError> {
    LabeledSentenceDataset::load(path).data(format!("loading dataset {}", path.display()))
}

fn ratio(x: f64) -> String {
    format!("{x:.4}")
}

pub fn import(config: &RunConfig, dir: &Path) -> Result<StepOutput, CliError> {
    config.require_existing([("Cochrane directory", dir)])?;
    let corpus = import_cochrane(dir).data("importing corpus")?;
    let out = config.out_file(files::CORPUS);
    corpus.save(&out).data("writing corpus")?;
    let c = corpus.split_counts();
    Ok(StepOutput {
        inputs: vec![dir.to_path_buf()],
        outputs: vec![out.clone()],
        messages: vec![format!(
            "imported {} pairs (train {}, dev {}, test {}) into {}",
            c.total(),
            c.train,
            c.dev,
            c.test,
            out.display()
        )],
        details: Value::Null,
    })
}

pub fn build_dataset(config: &RunConfig) -> Result<StepOutput, CliError> {
    let (corpus, corpus_path) = load_corpus_checked(config)?;
    let dataset = build_summary_dataset(&corpus);
    let out = config.dataset_path();
    dataset.save(&out).data("writing dataset")?;
    let stats = dataset.stats();
    let stats_path = config.out_file(files::DATASET_STATS);
    write_json(&stats_path, &stats)?;
    let mut messages: Vec<String> = Split::ALL
        .iter()
        .map(|&s| {
            let st = stats.get(s);
            format!(
                "{:<5} documents={} sentences={} positives={} positive_ratio={}",
                s.as_str(),
                st.documents,
                st.sentences,
                st.positives,
                ratio(st.positive_ratio)
            )
        })
        .collect();
    let long = corpus.pairs.iter().filter(|p| p.exceeds_token_bound).count();
    messages.push(format!("skipped={} over_token_bound={long}", stats.skipped));
    Ok(StepOutput {
        inputs: vec![corpus_path],
        outputs: vec![out, stats_path],
        messages,
        details: json!({ "stats": stats }),
    })
}

pub fn train(config: &RunConfig) -> Result<StepOutput, CliError> {
    let dataset_path = config.dataset_path();
    config.require_existing([("dataset", dataset_path.as_path())])?;
    let dataset = load_dataset(&dataset_path)?;
    let model = train_classifier(&dataset, &config.train_params()).data("training sentence scorer")?;
    let model_path = config.model_path();
    model.save(&model_path).data("writing model")?;
    let train = evaluate_classifier(&model, dataset.split_documents(Split::Train), config.threshold);
    let dev = evaluate_classifier(&model, dataset.split_documents(Split::Dev), config.threshold);
    let report_path = config.out_file(files::TRAIN_REPORT);
    write_json(&report_path, &json!({ "train": train, "dev": dev }))?;
    let mut messages = vec![format!(
        "train examples={} accuracy={} f1={}",
        train.examples,
        ratio(train.accuracy),
        ratio(train.f1)
    )];
    messages.push(if dev.examples == 0 {
        "dev   no sentences to evaluate".to_string()
    } else {
        format!(
            "dev   examples={} accuracy={} f1={} majority_baseline={}",
            dev.examples,
            ratio(dev.accuracy),
            ratio(dev.f1),
            ratio(dev.majority_baseline)
        )
    });
    Ok(StepOutput {
        inputs: vec![dataset_path],
        outputs: vec![model_path, report_path],
        messages,
        details: json!({ "train": train, "dev": dev }),
    })
}

fn scorer(config: &RunConfig, inputs: &mut Vec<PathBuf>) -> Result<Box<dyn SentenceScorer>, CliError> {
    Ok(match &config.scorer {
        ScorerChoice::Model => {
            let path = config.model_path();
            config.require_existing([("model", path.as_path())])?;
            inputs.push(path.clone());
            Box::new(SentenceScorerModel::load(&path).data("loading model")?)
        }
        ScorerChoice::Oracle => {
            let path = config.dataset_path();
            config.require_existing([("dataset", path.as_path())])?;
            inputs.push(path.clone());
            Box::new(OracleScorer::from_dataset(&load_dataset(&path)?))
        }
        ScorerChoice::External(endpoint) => {
            Box::new(ExternalScorer::new(JsonClient::new(endpoint.clone(), config.transport())))
        }
    })
}

fn pool(config: &RunConfig) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(config.max_in_flight)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

pub fn extract(config: &RunConfig) -> Result<StepOutput, CliError> {
    let (corpus, corpus_path) = load_corpus_checked(config)?;
    let mut inputs = vec![corpus_path];
    let scorer = scorer(config, &mut inputs)?;
    let docs: Vec<_> = corpus.split(config.split).collect();
    if docs.is_empty() {
        return Err(CliError::data(format!("split {} has no documents", config.split)));
    }
    let results: Vec<Result<ExtractiveSummary, (String, SummarizerError)>> = pool(config)?.install(|| {
        docs.par_iter()
            .map(|pair| {
                extract_summary(&pair.id, &pair.abstract_sentences(), scorer.as_ref(), config.threshold)
                    .map_err(|e| (pair.id.clone(), e))
            })
            .collect()
    });
    let mut summaries = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(s) => summaries.push(s),
            Err((id, e @ SummarizerError::Transport(_))) => {
                return Err(CliError::Adapter(anyhow::Error::new(e).context(format!("scoring document {id}"))))
            }
            Err((id, e)) => return Err(CliError::Data(anyhow::Error::new(e).context(format!("extracting document {id}")))),
        }
    }
    let out = config.out_file(files::SUMMARIES);
    write_jsonl(&out, &summaries)?;
    let selected: usize = summaries.iter().map(|s| s.selected.len()).sum();
    let total: usize = summaries.iter().map(|s| s.scores.len()).sum();
    Ok(StepOutput {
        inputs,
        outputs: vec![out],
        messages: vec![format!(
            "extracted {} summaries from split {} ({selected} of {total} sentences selected)",
            summaries.len(),
            config.split
        )],
        details: Value::Null,
    })
}

/// Parses keyed by document id, from a directory of `<doc_id>.conllu` files or a
/// single file with `# newdoc id = ...` markers.
fn load_parses(path: &Path, ids: &[&str]) -> Result<HashMap<String, Vec<DepParse>>, CliError> {
    let mut map = HashMap::new();
    if path.is_dir() {
        for id in ids {
            let file = path.join(format!("{id}.conllu"));
            if !file.exists() {
                return Err(CliError::data(format!("no parses for document {id} (expected {})", file.display())));
            }
            map.insert(id.to_string(), read_conllu(&file).data(format!("document {id}"))?);
        }
        return Ok(map);
    }
    let text = fs::read_to_string(path).data(format!("reading {}", path.display()))?;
    for doc in parse_conllu_documents(&text).data(format!("parsing {}", path.display()))? {
        let id = doc.doc_id.ok_or_else(|| {
            CliError::data(format!("{}: sentences before the first `# newdoc id` line", path.display()))
        })?;
        if map.insert(id.clone(), doc.parses).is_some() {
            return Err(CliError::data(format!("{}: document {id} appears twice", path.display())));
        }
    }
    Ok(map)
}

pub fn prompt(config: &RunConfig) -> Result<StepOutput, CliError> {
    let (corpus, corpus_path) = load_corpus_checked(config)?;
    let parses_path = config.parses_path()?.to_path_buf();
    config.require_existing([("parses", parses_path.as_path())])?;
    let ids: Vec<&str> = corpus.split(config.split).map(|p| p.id.as_str()).collect();
    if ids.is_empty() {
        return Err(CliError::data(format!("split {} has no documents", config.split)));
    }
    let parses = load_parses(&parses_path, &ids)?;
    let mut records = Vec::with_capacity(ids.len());
    for id in &ids {
        let doc = parses
            .get(*id)
            .ok_or_else(|| CliError::data(format!("no parses for document {id}")))?;
        let prompt = build_prompt(doc).data(format!("building prompt for {id}"))?;
        records.push(PromptRecord {
            doc_id: id.to_string(),
            prompt,
        });
    }
    let out = config.out_file(files::PROMPTS);
    write_jsonl(&out, &records)?;
    Ok(StepOutput {
        inputs: vec![corpus_path, parses_path],
        outputs: vec![out],
        messages: vec![format!("built {} narrative prompts", records.len())],
        details: Value::Null,
    })
}

pub fn assemble(config: &RunConfig) -> Result<StepOutput, CliError> {
    let summaries_path = config.out_file(files::SUMMARIES);
    let prompts_path = config.out_file(files::PROMPTS);
    config.require_existing([("summaries", summaries_path.as_path()), ("prompts", prompts_path.as_path())])?;
    let summaries: Vec<ExtractiveSummary> = read_jsonl(&summaries_path)?;
    let prompts: HashMap<String, NarrativePrompt> = read_jsonl::<PromptRecord>(&prompts_path)?
        .into_iter()
        .map(|r| (r.doc_id, r.prompt))
        .collect();
    let mut inputs = Vec::with_capacity(summaries.len());
    for s in &summaries {
        let prompt = prompts
            .get(&s.doc_id)
            .ok_or_else(|| CliError::data(format!("no prompt for document {}", s.doc_id)))?;
        inputs.push(assemble_input(prompt, s, config.budget).data(format!("assembling document {}", s.doc_id))?);
    }
    let out = config.out_file(files::INPUTS);
    write_jsonl(&out, &inputs)?;
    let cut = inputs
        .iter()
        .filter(|i| i.dropped_sentences + i.dropped_phrases > 0)
        .count();
    Ok(StepOutput {
        inputs: vec![summaries_path, prompts_path],
        outputs: vec![out],
        messages: vec![format!(
            "assembled {} inputs under a {}-token budget ({cut} truncated)",
            inputs.len(),
            config.budget
        )],
        details: Value::Null,
    })
}

pub fn simplify(config: &RunConfig) -> Result<StepOutput, CliError> {
    let inputs_path = config.out_file(files::INPUTS);
    config.require_existing([("assembled inputs", inputs_path.as_path())])?;
    let inputs: Vec<AssembledInput> = read_jsonl(&inputs_path)?;
    let simplifier: Box<dyn Simplifier> = match &config.adapter_url {
        AdapterChoice::Echo => Box::new(EchoAdapter),
        AdapterChoice::Remote(endpoint) => Box::new(RemoteSimplifier::new(
            JsonClient::new(endpoint.clone(), config.transport()),
            &config.hash()[..16],
        )),
    };
    let results = generate_all(&inputs, simplifier.as_ref(), &config.decode_params(), config.max_in_flight);
    let mut generations = Vec::new();
    let mut failures = Vec::new();
    let mut latency = serde_json::Map::new();
    for (input, result) in inputs.iter().zip(results) {
        match result {
            Ok(g) => {
                latency.insert(g.doc_id.clone(), json!(g.latency_ms));
                generations.push(GenerationRecord {
                    doc_id: g.doc_id,
                    generated_pls: g.generated_pls,
                    model_tag: g.model_tag,
                    truncated: g.truncated,
                    input: input.clone(),
                });
            }
            Err(e) => failures.push(FailureRecord {
                doc_id: input.doc_id.clone(),
                error: e.to_string(),
            }),
        }
    }
    let out = config.out_file(files::GENERATIONS);
    let fail_path = config.out_file(files::FAILURES);
    write_jsonl(&out, &generations)?;
    write_jsonl(&fail_path, &failures)?;
    if !inputs.is_empty() && generations.is_empty() {
        return Err(CliError::Adapter(anyhow::anyhow!(
            "all {} generations failed; first error: {}",
            failures.len(),
            failures[0].error
        )));
    }
    let mut messages = vec![format!("generated {} outputs with {}", generations.len(), simplifier.tag())];
    if !failures.is_empty() {
        messages.push(format!("{} documents failed, see {}", failures.len(), fail_path.display()));
    }
    Ok(StepOutput {
        inputs: vec![inputs_path],
        outputs: vec![out, fail_path],
        messages,
        details: json!({ "failed": failures.len(), "latency_ms": latency }),
    })
}

fn is_transport(e: &MetricError) -> bool {
    match e {
        MetricError::Transport(_) => true,
        MetricError::Document { source, .. } => is_transport(source),
        _ => false,
    }
}

pub fn evaluate(config: &RunConfig) -> Result<StepOutput, CliError> {
    let (corpus, corpus_path) = load_corpus_checked(config)?;
    let gen_path = config.out_file(files::GENERATIONS);
    config.require_existing([("generations", gen_path.as_path())])?;
    let generations: Vec<GenerationRecord> = read_jsonl(&gen_path)?;
    let items = generations
        .into_iter()
        .map(|g| {
            let pair = corpus
                .get(&g.doc_id)
                .ok_or_else(|| CliError::data(format!("generation for {} has no corpus entry", g.doc_id)))?;
            Ok(EvalInstance {
                doc_id: g.doc_id,
                source: pair.abstract_text.clone(),
                candidate: g.generated_pls,
                references: vec![pair.pls_text.clone()],
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let semantic = config
        .semantic_endpoint()?
        .map(|e| ExternalSemanticScorer::new(JsonClient::new(e, config.transport())));
    let scorer = semantic.as_ref().map(|s| s as &dyn SemanticScorer);
    let report = evaluate_corpus(&items, scorer).map_err(|e| {
        if is_transport(&e) {
            CliError::Adapter(anyhow::Error::new(e).context("semantic scorer"))
        } else {
            CliError::Data(anyhow::Error::new(e).context("evaluating generations"))
        }
    })?;
    report.save(&config.out, files::METRICS_STEM).data("writing metric report")?;
    let m = &report.mean;
    Ok(StepOutput {
        inputs: vec![corpus_path, gen_path],
        outputs: vec![
            config.out_file(&format!("{}.json", files::METRICS_STEM)),
            config.out_file(&format!("{}.csv", files::METRICS_STEM)),
        ],
        messages: vec![format!(
            "documents={} fk={:.2} ari={:.2} rouge1={:.2} rouge2={:.2} rougeL={:.2} bleu={:.2} sari={:.2}",
            m.documents, m.fk, m.ari, m.rouge1_f, m.rouge2_f, m.rouge_l_f, m.bleu, m.sari
        )],
        details: Value::Null,
    })
}
