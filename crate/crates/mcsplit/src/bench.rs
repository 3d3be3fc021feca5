//! Benchmark harness: instance manifests, per-run CSV records and cactus
//! curves (instances solved within each time threshold).

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use mcsplit_core::oracle::verify;
use mcsplit_core::{Graph, Status};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::deadline::Deadline;
use crate::engine::{run_engine, EngineSpec};
use crate::format::{read_graph, Format};

/// Environment variable naming the directory manifest paths are relative to.
pub const DATASET_ROOT_VAR: &str = "MCS_DATASET_ROOT";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Optimal,
    Timeout,
    Cancelled,
    Error,
}

impl From<Status> for RunStatus {
    fn from(s: Status) -> RunStatus {
        match s {
            Status::Optimal => RunStatus::Optimal,
            Status::Timeout => RunStatus::Timeout,
            Status::Cancelled => RunStatus::Cancelled,
        }
    }
}

/// One (instance, engine) run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub pair_id: String,
    pub category: String,
    pub n_g: Option<usize>,
    pub n_h: Option<usize>,
    pub engine: String,
    pub status: RunStatus,
    /// Absent exactly when `status` is `error`.
    pub size: Option<usize>,
    pub wall_seconds: f64,
    pub cpu_seconds: f64,
    pub recursions: u64,
    pub seed: Option<u64>,
}

/// Where an instance comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum PairSource {
    Loaded { g: Graph, h: Graph },
    Files { g: PathBuf, h: PathBuf, format: Format },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub id: String,
    pub category: String,
    pub source: PairSource,
}

impl Instance {
    pub fn loaded(id: impl Into<String>, category: impl Into<String>, g: Graph, h: Graph) -> Instance {
        Instance { id: id.into(), category: category.into(), source: PairSource::Loaded { g, h } }
    }

    fn load(&self) -> Result<(Graph, Graph), String> {
        match &self.source {
            PairSource::Loaded { g, h } => Ok((g.clone(), h.clone())),
            PairSource::Files { g, h, format } => {
                let read = |p: &Path| read_graph(p, *format).map_err(|e| format!("{}: {e}", p.display()));
                Ok((read(g)?, read(h)?))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuiteOptions {
    /// Per-instance, per-engine wall-clock budget.
    pub budget: Duration,
    /// Run distinct instances on this many threads; 1 keeps timings clean.
    pub concurrency: usize,
}

impl SuiteOptions {
    pub fn sequential(budget: Duration) -> SuiteOptions {
        SuiteOptions { budget, concurrency: 1 }
    }
}

/// Process CPU time (user plus system).
pub fn cpu_time() -> Duration {
    let mut usage = std::mem::MaybeUninit::<libc::rusage>::zeroed();
    // SAFETY: getrusage fills the struct it is given; RUSAGE_SELF is always valid.
    let rc = unsafe { libc::getrusage(libc::RUSAGE_SELF, usage.as_mut_ptr()) };
    if rc != 0 {
        return Duration::ZERO;
    }
    // SAFETY: initialised by the successful call above.
    let usage = unsafe { usage.assume_init() };
    let tv = |t: libc::timeval| Duration::new(t.tv_sec as u64, t.tv_usec as u32 * 1000);
    tv(usage.ru_utime) + tv(usage.ru_stime)
}

fn run_one(
    instance: &Instance,
    pair: &Result<(Graph, Graph), String>,
    spec: &EngineSpec,
    budget: Duration,
) -> InstanceRecord {
    let mut record = InstanceRecord {
        pair_id: instance.id.clone(),
        category: instance.category.clone(),
        n_g: None,
        n_h: None,
        engine: spec.id.clone(),
        status: RunStatus::Error,
        size: None,
        wall_seconds: 0.0,
        cpu_seconds: 0.0,
        recursions: 0,
        seed: spec.heuristics.restarts,
    };
    let Ok((g, h)) = pair else { return record };
    record.n_g = Some(g.n());
    record.n_h = Some(h.n());
    let cpu = cpu_time();
    let wall = Instant::now();
    let outcome = run_engine(g, h, spec, &Deadline::new(Some(budget)));
    record.wall_seconds = wall.elapsed().as_secs_f64();
    record.cpu_seconds = cpu_time().saturating_sub(cpu).as_secs_f64();
    if let Ok(r) = outcome {
        if verify(g, h, &r.mapping) == Ok(true) {
            record.status = r.status.into();
            record.size = Some(r.size());
            record.recursions = r.stats.recursions;
            record.seed = r.seed.or(record.seed);
        }
    }
    record
}

/// One record per (instance, engine), instance-major. Unloadable instances
/// and failed or unverifiable runs become `error` records.
pub fn run_suite(instances: &[Instance], engines: &[EngineSpec], options: SuiteOptions) -> Vec<InstanceRecord> {
    let run_instance = |inst: &Instance| -> Vec<InstanceRecord> {
        let pair = inst.load();
        engines.iter().map(|spec| run_one(inst, &pair, spec, options.budget)).collect()
    };
    if options.concurrency <= 1 {
        return instances.iter().flat_map(run_instance).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Vec<InstanceRecord>>>> = Mutex::new(vec![None; instances.len()]);
    std::thread::scope(|s| {
        for _ in 0..options.concurrency.min(instances.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(inst) = instances.get(i) else { break };
                let records = run_instance(inst);
                slots.lock().unwrap()[i] = Some(records);
            });
        }
    });
    slots.into_inner().unwrap().into_iter().flatten().flatten().collect()
}

/// One point of a cactus curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CactusPoint {
    pub engine: String,
    pub seconds: f64,
    pub solved: usize,
}

/// Per engine, the sorted solve times of its optimal runs against the
/// running count.
pub fn emit_cactus(records: &[InstanceRecord]) -> Vec<CactusPoint> {
    let mut times: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.status == RunStatus::Optimal) {
        times.entry(&r.engine).or_default().push(r.wall_seconds);
    }
    let mut out = Vec::new();
    for (engine, mut ts) in times {
        ts.sort_by(f64::total_cmp);
        out.extend(ts.into_iter().enumerate().map(|(i, seconds)| CactusPoint {
            engine: engine.to_string(),
            seconds,
            solved: i + 1,
        }));
    }
    out
}

/// Number of optimal runs per engine.
pub fn solved_counts(records: &[InstanceRecord]) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for r in records {
        let c = out.entry(r.engine.clone()).or_insert(0);
        if r.status == RunStatus::Optimal {
            *c += 1;
        }
    }
    out
}

pub fn write_records<W: Write>(w: W, records: &[InstanceRecord]) -> Result<(), BenchError> {
    let mut csv = csv::Writer::from_writer(w);
    for r in records {
        csv.serialize(r)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(r: R) -> Result<Vec<InstanceRecord>, BenchError> {
    Ok(csv::Reader::from_reader(r).deserialize().collect::<Result<_, _>>()?)
}

pub fn write_cactus<W: Write>(w: W, points: &[CactusPoint]) -> Result<(), BenchError> {
    let mut csv = csv::Writer::from_writer(w);
    for p in points {
        csv.serialize(p)?;
    }
    csv.flush()?;
    Ok(())
}

/// Parses a manifest: one `file_g file_h category` triple per line, blank
/// lines and `#` comments ignored. Relative paths resolve against `root`.
pub fn parse_manifest(text: &str, root: &Path, format: Format) -> Result<Vec<Instance>, BenchError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [g, h, category] = fields.as_slice() else {
            return Err(BenchError::Manifest { line: i + 1, message: "expected `file_g file_h category`".into() });
        };
        let stem = |p: &str| Path::new(p).file_name().map_or_else(|| p.to_string(), |s| s.to_string_lossy().into());
        out.push(Instance {
            id: format!("{}~{}", stem(g), stem(h)),
            category: category.to_string(),
            source: PairSource::Files { g: root.join(g), h: root.join(h), format },
        });
    }
    Ok(out)
}

/// Dataset root: the environment variable when set, else `fallback`.
pub fn dataset_root(fallback: &Path) -> PathBuf {
    std::env::var_os(DATASET_ROOT_VAR).map_or_else(|| fallback.to_path_buf(), PathBuf::from)
}
