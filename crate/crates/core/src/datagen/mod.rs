//! Seeded dataset generators and their JSONL serialization.
//!
//! Every sample's target is produced by the matching oracle at generation
//! time, and every random choice flows from `(master seed, split, index)`
//! through [`crate::seed::derive`], so a `(spec, seed)` pair regenerates a
//! byte-identical dataset.

pub mod connectivity;
pub mod er;
pub mod family;
pub mod substructure;

pub use connectivity::gen_connectivity_sample;
pub use er::{gen_er_graph, EdgeTier, ErProvenance};
pub use family::{gen_family_tree, gen_kinship_sample, FamilyRecord, Gender};
pub use substructure::gen_substructure_sample;

use std::io::{BufRead, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypergraph::{GraphError, GraphJson, Hypergraph, TaskTarget};
use crate::oracles::{
    connectivity_oracle, kinship_oracle, substructure_oracle, KinshipRelation, OracleError,
    SubstructureKind,
};
use crate::seed;
use crate::tensor::{Tensor, TensorError};

pub const ORACLE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DatagenError {
    #[error("could not generate a {task} sample after {retries} retries (seed {seed})")]
    GenerationFailed {
        task: String,
        seed: u64,
        retries: usize,
    },
    #[error("unknown task id {0:?}")]
    UnknownTask(String),
    #[error("task {task} requires n >= {min}, got {n}")]
    GraphTooSmall {
        task: String,
        min: usize,
        n: usize,
    },
    #[error("sample file line {line}: {message}")]
    BadSampleFile { line: usize, message: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Every generable task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "k")]
pub enum TaskKind {
    Link3,
    Link4,
    Triangle,
    Clique4,
    Grandparent,
    Uncle,
    /// All-pairs connectivity, optionally bounded to `k` hops.
    Connectivity(Option<usize>),
}

impl TaskKind {
    pub fn parse(id: &str) -> Result<Self, DatagenError> {
        Ok(match id {
            "link3" | "3link" => TaskKind::Link3,
            "link4" | "4link" => TaskKind::Link4,
            "triangle" => TaskKind::Triangle,
            "clique4" | "4clique" => TaskKind::Clique4,
            "grandparent" => TaskKind::Grandparent,
            "uncle" => TaskKind::Uncle,
            "connectivity" => TaskKind::Connectivity(None),
            other => {
                if let Some(k) = other.strip_prefix("connectivity") {
                    let k: usize = k
                        .trim_start_matches('-')
                        .parse()
                        .map_err(|_| DatagenError::UnknownTask(other.to_string()))?;
                    TaskKind::Connectivity(Some(k))
                } else {
                    return Err(DatagenError::UnknownTask(other.to_string()));
                }
            }
        })
    }

    pub fn label(&self) -> String {
        match self {
            TaskKind::Link3 => "link3".into(),
            TaskKind::Link4 => "link4".into(),
            TaskKind::Triangle => "triangle".into(),
            TaskKind::Clique4 => "clique4".into(),
            TaskKind::Grandparent => "grandparent".into(),
            TaskKind::Uncle => "uncle".into(),
            TaskKind::Connectivity(None) => "connectivity".into(),
            TaskKind::Connectivity(Some(k)) => format!("connectivity{k}"),
        }
    }

    /// Arity of the task's output tensor.
    pub fn target_arity(&self) -> usize {
        match self {
            TaskKind::Link3 | TaskKind::Link4 | TaskKind::Triangle | TaskKind::Clique4 => 0,
            TaskKind::Grandparent | TaskKind::Uncle | TaskKind::Connectivity(_) => 2,
        }
    }

    pub fn substructure(&self) -> Option<SubstructureKind> {
        match self {
            TaskKind::Link3 => Some(SubstructureKind::Link3),
            TaskKind::Link4 => Some(SubstructureKind::Link4),
            TaskKind::Triangle => Some(SubstructureKind::Triangle),
            TaskKind::Clique4 => Some(SubstructureKind::Clique4),
            _ => None,
        }
    }

    pub fn kinship(&self) -> Option<KinshipRelation> {
        match self {
            TaskKind::Grandparent => Some(KinshipRelation::Grandparent),
            TaskKind::Uncle => Some(KinshipRelation::Uncle),
            _ => None,
        }
    }
}

/// Generator options beyond the task itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenOptions {
    /// Fix the edge tier instead of drawing it uniformly per sample.
    pub tier: Option<EdgeTier>,
    /// Allow the component-duplication path (fires with probability 1/2).
    pub duplicate: bool,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions {
            tier: None,
            duplicate: true,
        }
    }
}

/// What to generate: task, size, split sizes, master seed, options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub task: TaskKind,
    pub n: usize,
    pub train: usize,
    pub val: usize,
    pub test: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub options: GenOptions,
}

impl DatasetSpec {
    /// Paper split sizes: 800 / 100 / 300.
    pub fn new(task: TaskKind, n: usize, master_seed: u64) -> Self {
        DatasetSpec {
            task,
            n,
            train: 800,
            val: 100,
            test: 300,
            master_seed,
            options: GenOptions::default(),
        }
    }

    pub fn with_sizes(mut self, train: usize, val: usize, test: usize) -> Self {
        self.train = train;
        self.val = val;
        self.test = test;
        self
    }
}

/// One labeled instance plus the generator trace that produced it.
#[derive(Debug, Clone)]
pub struct Sample {
    pub graph: Hypergraph,
    pub target: TaskTarget,
    pub provenance: serde_json::Value,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub spec: DatasetSpec,
    pub train: Vec<Sample>,
    pub val: Vec<Sample>,
    pub test: Vec<Sample>,
}

impl Dataset {
    pub fn split(&self, name: &str) -> &[Sample] {
        match name {
            "train" => &self.train,
            "val" => &self.val,
            "test" => &self.test,
            other => panic!("unknown split {other}"),
        }
    }
}

/// Generates one sample of a task at `(n, seed)`. Substructure tasks read
/// `want_positive` to keep labels balanced by alternation.
pub fn gen_sample(
    task: TaskKind,
    n: usize,
    want_positive: bool,
    sample_seed: u64,
    options: &GenOptions,
) -> Result<Sample, DatagenError> {
    if let Some(kind) = task.substructure() {
        return gen_substructure_sample(kind, n, want_positive, sample_seed, options);
    }
    if let Some(relation) = task.kinship() {
        return gen_kinship_sample(relation, n, sample_seed);
    }
    let TaskKind::Connectivity(k) = task else {
        unreachable!("every task is covered above")
    };
    gen_connectivity_sample(n, k, sample_seed, options)
}

/// Generates the full train/val/test dataset for a spec.
pub fn generate(spec: &DatasetSpec) -> Result<Dataset, DatagenError> {
    let mut splits = Vec::new();
    for (name, count) in [
        ("train", spec.train),
        ("val", spec.val),
        ("test", spec.test),
    ] {
        let stream = format!("{}/{}", spec.task.label(), name);
        let mut samples = Vec::with_capacity(count);
        for index in 0..count {
            let sample_seed = seed::derive(spec.master_seed, &stream, index as u64);
            let want_positive = index % 2 == 0;
            samples.push(gen_sample(
                spec.task,
                spec.n,
                want_positive,
                sample_seed,
                &spec.options,
            )?);
        }
        splits.push(samples);
    }
    let test = splits.pop().unwrap();
    let val = splits.pop().unwrap();
    let train = splits.pop().unwrap();
    Ok(Dataset {
        spec: spec.clone(),
        train,
        val,
        test,
    })
}

/// Recomputes the matching oracle on a sample's input graph and checks it
/// reproduces the stored target exactly.
pub fn verify_sample(task: TaskKind, sample: &Sample) -> Result<bool, DatagenError> {
    let expected: Tensor = if let Some(kind) = task.substructure() {
        Tensor::scalar(if substructure_oracle(kind, &sample.graph) {
            1.0
        } else {
            0.0
        })
    } else if let Some(relation) = task.kinship() {
        let record = family::record_from_graph(&sample.graph)?;
        kinship_oracle(relation, &record)?
    } else {
        let TaskKind::Connectivity(k) = task else {
            unreachable!()
        };
        connectivity_oracle(&sample.graph, k)
    };
    Ok(expected == *sample.target.values())
}

/// Balanced query mask over ordered off-diagonal pairs: all of the minority
/// label plus an equally sized downsample of the majority. `None` when one
/// class is empty.
pub(crate) fn balanced_pair_mask(oracle: &Tensor, rng: &mut impl Rng) -> Option<Tensor> {
    let n = oracle.shape()[0];
    let mut positives = Vec::new();
    let mut negatives = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            if oracle.data()[u * n + v] != 0.0 {
                positives.push(u * n + v);
            } else {
                negatives.push(u * n + v);
            }
        }
    }
    if positives.is_empty() || negatives.is_empty() {
        return None;
    }
    let m = positives.len().min(negatives.len());
    positives.shuffle(rng);
    negatives.shuffle(rng);
    let mut mask = vec![0.0; n * n];
    for &p in positives.iter().take(m).chain(negatives.iter().take(m)) {
        mask[p] = 1.0;
    }
    Some(Tensor::new(vec![n, n], mask).expect("mask volume"))
}

// --- JSONL serialization -------------------------------------------------

#[derive(Serialize, Deserialize)]
struct TargetJson {
    arity: usize,
    values: Vec<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mask: Option<Vec<u8>>,
}

#[derive(Serialize, Deserialize)]
struct SampleJson {
    graph: GraphJson,
    target: TargetJson,
    provenance: serde_json::Value,
}

/// Sidecar manifest describing how a dataset file was produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub spec: DatasetSpec,
    pub oracle_version: u32,
    pub counts: Vec<(String, usize)>,
}

fn sample_to_json(sample: &Sample) -> SampleJson {
    SampleJson {
        graph: sample.graph.to_json(),
        target: TargetJson {
            arity: sample.target.arity(),
            values: sample
                .target
                .values()
                .data()
                .iter()
                .map(|&v| v as u8)
                .collect(),
            mask: sample
                .target
                .mask()
                .map(|m| m.data().iter().map(|&v| v as u8).collect()),
        },
        provenance: sample.provenance.clone(),
    }
}

fn sample_from_json(json: SampleJson) -> Result<Sample, DatagenError> {
    let graph = Hypergraph::from_json(&json.graph)?;
    let n = graph.n();
    let arity = json.target.arity;
    let shape = vec![n; arity];
    let values = Tensor::new(
        shape.clone(),
        json.target.values.iter().map(|&v| v as f64).collect(),
    )?;
    let mask = json
        .target
        .mask
        .map(|m| Tensor::new(shape, m.iter().map(|&v| v as f64).collect()))
        .transpose()?;
    let target = TaskTarget::new(n, arity, values, mask)?;
    Ok(Sample {
        graph,
        target,
        provenance: json.provenance,
    })
}

/// One sample per line.
pub fn write_jsonl(path: &Path, samples: &[Sample]) -> Result<(), DatagenError> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    for sample in samples {
        serde_json::to_writer(&mut file, &sample_to_json(sample))?;
        file.write_all(b"\n")?;
    }
    file.flush()?;
    Ok(())
}

pub fn read_jsonl(path: &Path) -> Result<Vec<Sample>, DatagenError> {
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut samples = Vec::new();
    for (index, line) in file.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let json: SampleJson =
            serde_json::from_str(&line).map_err(|e| DatagenError::BadSampleFile {
                line: index + 1,
                message: e.to_string(),
            })?;
        samples.push(sample_from_json(json)?);
    }
    Ok(samples)
}

/// Writes `<stem>_{train,val,test}.jsonl` plus `<stem>.manifest.json`.
pub fn write_dataset(dir: &Path, stem: &str, dataset: &Dataset) -> Result<(), DatagenError> {
    std::fs::create_dir_all(dir)?;
    let mut counts = Vec::new();
    for (name, samples) in [
        ("train", &dataset.train),
        ("val", &dataset.val),
        ("test", &dataset.test),
    ] {
        write_jsonl(&dir.join(format!("{stem}_{name}.jsonl")), samples)?;
        counts.push((name.to_string(), samples.len()));
    }
    let manifest = DatasetManifest {
        spec: dataset.spec.clone(),
        oracle_version: ORACLE_VERSION,
        counts,
    };
    let text = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(dir.join(format!("{stem}.manifest.json")), text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn task_ids_round_trip() {
        for id in [
            "link3",
            "link4",
            "triangle",
            "clique4",
            "grandparent",
            "uncle",
            "connectivity",
            "connectivity4",
        ] {
            let task = TaskKind::parse(id).unwrap();
            assert_eq!(task.label(), id);
        }
        assert!(TaskKind::parse("maxflow").is_err());
    }

    #[test]
    fn generation_is_deterministic_end_to_end() {
        let spec = DatasetSpec::new(TaskKind::Triangle, 8, 3).with_sizes(6, 2, 2);
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        let dir = std::env::temp_dir().join("relnn-determinism-test");
        std::fs::create_dir_all(&dir).unwrap();
        write_dataset(&dir, "a", &a).unwrap();
        write_dataset(&dir, "b", &b).unwrap();
        let bytes_a = std::fs::read(dir.join("a_train.jsonl")).unwrap();
        let bytes_b = std::fs::read(dir.join("b_train.jsonl")).unwrap();
        assert_eq!(bytes_a, bytes_b);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn samples_round_trip_through_jsonl() {
        let spec = DatasetSpec::new(TaskKind::Connectivity(Some(4)), 8, 5).with_sizes(4, 1, 1);
        let data = generate(&spec).unwrap();
        let dir = std::env::temp_dir().join("relnn-jsonl-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("split.jsonl");
        write_jsonl(&path, &data.train).unwrap();
        let reloaded = read_jsonl(&path).unwrap();
        assert_eq!(reloaded.len(), data.train.len());
        for (a, b) in data.train.iter().zip(&reloaded) {
            assert_eq!(a.graph, b.graph);
            assert_eq!(a.target, b.target);
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn every_emitted_sample_passes_oracle_verification() {
        for task in [
            TaskKind::Triangle,
            TaskKind::Link3,
            TaskKind::Connectivity(Some(4)),
            TaskKind::Grandparent,
        ] {
            let spec = DatasetSpec::new(task, 10, 7).with_sizes(4, 1, 1);
            let data = generate(&spec).unwrap();
            for sample in data.train.iter().chain(&data.val).chain(&data.test) {
                assert!(
                    verify_sample(task, sample).unwrap(),
                    "stored target diverges from oracle for {task:?}"
                );
            }
        }
    }
}
