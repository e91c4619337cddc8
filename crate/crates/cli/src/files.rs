//! Fixed file names inside an output directory.

pub const CORPUS: &str = "corpus.jsonl";
pub const DATASET: &str = "dataset.jsonl";
pub const DATASET_STATS: &str = "dataset_stats.json";
pub const MODEL: &str = "model.json";
pub const TRAIN_REPORT: &str = "train_report.json";
pub const SUMMARIES: &str = "summaries.jsonl";
pub const PROMPTS: &str = "prompts.jsonl";
pub const INPUTS: &str = "inputs.jsonl";
pub const GENERATIONS: &str = "generations.jsonl";
pub const FAILURES: &str = "failures.jsonl";
pub const METRICS_STEM: &str = "metrics";
pub const MANIFEST: &str = "manifest.json";
pub const LOCK: &str = ".napss.lock";
