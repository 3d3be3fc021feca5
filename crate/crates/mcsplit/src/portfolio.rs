//! Racing several engine configurations on one instance.
//!
//! Each engine runs on its own thread (or child process) with its own
//! cancellation flag. Results arrive on one channel; the first engine to
//! finish with a proven optimum wins and the others are cancelled. Engines
//! that do not acknowledge within the grace period are counted as watchdog
//! violations and abandoned.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{mpsc, Arc};
use std::time::{Duration, Instant};

use mcsplit_core::{Graph, Mapping, SolveResult, Status};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::deadline::Deadline;
use crate::engine::{run_engine, EngineSpec, SpecError};

pub const DEFAULT_STAGE1_BUDGET: Duration = Duration::from_secs(5);
pub const DEFAULT_GRACE: Duration = Duration::from_secs(1);

const ENGINE_STACK: usize = 256 << 20;
const POLL: Duration = Duration::from_millis(2);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    RaceAll,
    /// Stage-1 engines race for `stage1_budget`; on a miss they are cancelled
    /// and stage-2 engines race for the rest of the budget.
    Staged {
        stage1_budget: Duration,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum Isolation {
    #[default]
    InProcess,
    /// Runs each engine as `program run-engine`, exchanging JSON on stdio.
    Subprocess { program: PathBuf },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PortfolioConfig {
    pub specs: Vec<EngineSpec>,
    pub mode: Mode,
    pub budget: Duration,
    pub grace: Duration,
    /// Broadcast incumbent sizes between in-process engines.
    pub share_incumbent: bool,
    pub isolation: Isolation,
}

impl PortfolioConfig {
    pub fn race_all(specs: Vec<EngineSpec>, budget: Duration) -> PortfolioConfig {
        PortfolioConfig {
            specs,
            mode: Mode::RaceAll,
            budget,
            grace: DEFAULT_GRACE,
            share_incumbent: false,
            isolation: Isolation::InProcess,
        }
    }

    pub fn staged(specs: Vec<EngineSpec>, stage1_budget: Duration, budget: Duration) -> PortfolioConfig {
        PortfolioConfig { mode: Mode::Staged { stage1_budget }, ..PortfolioConfig::race_all(specs, budget) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineStatus {
    Finished,
    Cancelled,
    Timeout,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineReport {
    pub id: String,
    pub stage: u8,
    pub status: EngineStatus,
    pub size: Option<usize>,
    pub wall: Duration,
    pub recursions: u64,
    pub error: Option<String>,
    /// Delay between the cancel request and the engine's answer.
    pub cancel_ack: Option<Duration>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PortfolioResult {
    pub winner: Option<String>,
    pub status: Status,
    pub size: usize,
    pub mapping: Mapping,
    pub engines: Vec<EngineReport>,
    pub wall: Duration,
    /// Engines that failed to acknowledge cancellation within the grace period.
    pub grace_violations: usize,
}

#[derive(Debug, Error)]
pub enum PortfolioError {
    #[error("a portfolio needs at least one engine")]
    NoSpecs,
    #[error("engine `{id}`: {source}")]
    Spec { id: String, source: SpecError },
    #[error("every engine failed: {0:?}")]
    AllFailed(Vec<(String, String)>),
    #[error("portfolio config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

struct Stage {
    reports: Vec<EngineReport>,
    winner: Option<(String, SolveResult)>,
    best: Option<SolveResult>,
    violations: usize,
}

type Message = (usize, Result<SolveResult, String>, Instant);

#[allow(clippy::too_many_arguments)]
fn launch(
    i: usize,
    spec: EngineSpec,
    g: Arc<Graph>,
    h: Arc<Graph>,
    budget: Duration,
    cancel: Arc<AtomicBool>,
    shared: Option<Arc<AtomicUsize>>,
    isolation: &Isolation,
    tx: mpsc::Sender<Message>,
) {
    let isolation = isolation.clone();
    let failed = tx.clone();
    let spawned =
        std::thread::Builder::new().name(format!("portfolio-{}", spec.id)).stack_size(ENGINE_STACK).spawn(move || {
            let result = match isolation {
                Isolation::InProcess => {
                    let mut control = Deadline::new(Some(budget)).with_cancel(cancel);
                    if let Some(best) = shared {
                        control = control.with_shared_best(best);
                    }
                    run_engine(&g, &h, &spec, &control).map_err(|e| e.to_string())
                }
                Isolation::Subprocess { program } => run_subprocess(&program, &g, &h, &spec, budget, &cancel),
            };
            let _ = tx.send((i, result, Instant::now()));
        });
    if let Err(e) = spawned {
        let _ = failed.send((i, Err(format!("cannot spawn engine thread: {e}")), Instant::now()));
    }
}

fn race(g: &Arc<Graph>, h: &Arc<Graph>, specs: &[EngineSpec], budget: Duration, config: &PortfolioConfig) -> Stage {
    let (tx, rx) = mpsc::channel::<Message>();
    let flags: Vec<Arc<AtomicBool>> = specs.iter().map(|_| Arc::default()).collect();
    let shared = config.share_incumbent.then(|| Arc::new(AtomicUsize::new(0)));
    let started = Instant::now();
    for (i, spec) in specs.iter().enumerate() {
        let own = spec.budget().map_or(budget, |b| b.min(budget));
        launch(
            i,
            spec.clone(),
            Arc::clone(g),
            Arc::clone(h),
            own,
            Arc::clone(&flags[i]),
            shared.clone(),
            &config.isolation,
            tx.clone(),
        );
    }
    drop(tx);

    let mut reports: Vec<Option<EngineReport>> = vec![None; specs.len()];
    let mut winner: Option<(String, SolveResult)> = None;
    let mut best: Option<SolveResult> = None;
    let mut cancelled_at: Option<Instant> = None;
    let mut violations = 0;
    let mut pending = specs.len();
    while pending > 0 {
        let msg = match cancelled_at {
            None => rx.recv().ok(),
            Some(c) => rx.recv_timeout(config.grace.saturating_sub(c.elapsed())).ok(),
        };
        let Some((i, result, at)) = msg else { break };
        pending -= 1;
        let spec = &specs[i];
        let cancel_ack = cancelled_at.map(|c| at.saturating_duration_since(c));
        let report = match result {
            Ok(r) => {
                let status = match r.status {
                    Status::Optimal => EngineStatus::Finished,
                    Status::Timeout => EngineStatus::Timeout,
                    Status::Cancelled => EngineStatus::Cancelled,
                };
                let report = EngineReport {
                    id: spec.id.clone(),
                    stage: spec.stage,
                    status,
                    size: Some(r.size()),
                    wall: at.saturating_duration_since(started),
                    recursions: r.stats.recursions,
                    error: None,
                    cancel_ack,
                };
                if best.as_ref().is_none_or(|b| r.size() > b.size()) {
                    best = Some(r.clone());
                }
                if status == EngineStatus::Finished && winner.is_none() {
                    winner = Some((spec.id.clone(), r));
                    for (j, f) in flags.iter().enumerate() {
                        if j != i {
                            f.store(true, Ordering::Release);
                        }
                    }
                    cancelled_at = Some(Instant::now());
                }
                report
            }
            Err(e) => EngineReport {
                id: spec.id.clone(),
                stage: spec.stage,
                status: EngineStatus::Error,
                size: None,
                wall: at.saturating_duration_since(started),
                recursions: 0,
                error: Some(e),
                cancel_ack,
            },
        };
        if report.cancel_ack.is_some_and(|a| a > config.grace) {
            violations += 1;
        }
        reports[i] = Some(report);
    }
    let reports = reports
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            r.unwrap_or_else(|| {
                violations += 1;
                EngineReport {
                    id: specs[i].id.clone(),
                    stage: specs[i].stage,
                    status: EngineStatus::Cancelled,
                    size: None,
                    wall: started.elapsed(),
                    recursions: 0,
                    error: Some("no acknowledgement within the grace period".into()),
                    cancel_ack: None,
                }
            })
        })
        .collect();
    Stage { reports, winner, best, violations }
}

/// Races `config.specs` on `(g, h)`.
pub fn run_portfolio(g: &Graph, h: &Graph, config: &PortfolioConfig) -> Result<PortfolioResult, PortfolioError> {
    if config.specs.is_empty() {
        return Err(PortfolioError::NoSpecs);
    }
    for s in &config.specs {
        s.validate().map_err(|source| PortfolioError::Spec { id: s.id.clone(), source })?;
    }
    let start = Instant::now();
    let (g, h) = (Arc::new(g.clone()), Arc::new(h.clone()));
    let mut stages = Vec::new();
    match config.mode {
        Mode::RaceAll => stages.push(race(&g, &h, &config.specs, config.budget, config)),
        Mode::Staged { stage1_budget } => {
            let (first, second): (Vec<EngineSpec>, Vec<EngineSpec>) =
                config.specs.iter().cloned().partition(|s| s.stage == 1);
            if !stage1_budget.is_zero() && !first.is_empty() {
                stages.push(race(&g, &h, &first, stage1_budget.min(config.budget), config));
            }
            if stages.iter().all(|s| s.winner.is_none()) && !second.is_empty() {
                let rest = config.budget.saturating_sub(start.elapsed());
                stages.push(race(&g, &h, &second, rest, config));
            }
        }
    }

    let mut engines = Vec::new();
    let mut winner = None;
    let mut best: Option<SolveResult> = None;
    let mut violations = 0;
    for s in stages {
        engines.extend(s.reports);
        violations += s.violations;
        if winner.is_none() {
            winner = s.winner;
        }
        if let Some(b) = s.best {
            if best.as_ref().is_none_or(|x| b.size() > x.size()) {
                best = Some(b);
            }
        }
    }
    if engines.iter().all(|e| e.status == EngineStatus::Error) {
        return Err(PortfolioError::AllFailed(
            engines.into_iter().map(|e| (e.id, e.error.unwrap_or_default())).collect(),
        ));
    }
    let (winner_id, status, mapping) = match winner {
        // with shared sizes a cancelled engine may hold the larger mapping
        Some((id, r)) => {
            let mapping = match best {
                Some(b) if b.size() > r.size() => b.mapping,
                _ => r.mapping,
            };
            (Some(id), Status::Optimal, mapping)
        }
        None => (None, Status::Timeout, best.map(|b| b.mapping).unwrap_or_default()),
    };
    Ok(PortfolioResult {
        winner: winner_id,
        status,
        size: mapping.len(),
        mapping,
        engines,
        wall: start.elapsed(),
        grace_violations: violations,
    })
}

/// Request read by the `run-engine` subcommand on stdin.
#[derive(Debug, Serialize, Deserialize)]
pub struct EngineRequest {
    pub g: Graph,
    pub h: Graph,
    pub spec: EngineSpec,
    pub budget: Duration,
}

/// Reply written by the `run-engine` subcommand on stdout.
#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineReply {
    Result(SolveResult),
    Error(String),
}

/// Body of the `run-engine` subcommand.
pub fn serve_engine_request(input: &str) -> EngineReply {
    let req: EngineRequest = match serde_json::from_str(input) {
        Ok(r) => r,
        Err(e) => return EngineReply::Error(format!("bad request: {e}")),
    };
    if let Err(e) = req.g.validate().and_then(|_| req.h.validate()) {
        return EngineReply::Error(e.to_string());
    }
    match run_engine(&req.g, &req.h, &req.spec, &Deadline::new(Some(req.budget))) {
        Ok(r) => EngineReply::Result(r),
        Err(e) => EngineReply::Error(e.to_string()),
    }
}

fn run_subprocess(
    program: &Path,
    g: &Graph,
    h: &Graph,
    spec: &EngineSpec,
    budget: Duration,
    cancel: &AtomicBool,
) -> Result<SolveResult, String> {
    let request = EngineRequest { g: g.clone(), h: h.clone(), spec: spec.clone(), budget };
    let body = serde_json::to_vec(&request).map_err(|e| e.to_string())?;
    let mut child = Command::new(program)
        .arg("run-engine")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| format!("cannot start {}: {e}", program.display()))?;
    let mut stdin = child.stdin.take().expect("piped stdin");
    let writer = std::thread::spawn(move || stdin.write_all(&body));
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = std::thread::spawn(move || {
        let mut out = String::new();
        stdout.read_to_string(&mut out).map(|_| out)
    });
    loop {
        if cancel.load(Ordering::Acquire) {
            let _ = child.kill();
            let _ = child.wait();
            return Ok(SolveResult {
                mapping: Mapping::new(),
                status: Status::Cancelled,
                stats: Default::default(),
                elapsed: Duration::ZERO,
                seed: None,
            });
        }
        match child.try_wait() {
            Ok(Some(_)) => break,
            Ok(None) => std::thread::sleep(POLL),
            Err(e) => return Err(e.to_string()),
        }
    }
    let _ = writer.join();
    let out = reader.join().map_err(|_| "reader panicked".to_string())?.map_err(|e| e.to_string())?;
    match serde_json::from_str::<EngineReply>(&out) {
        Ok(EngineReply::Result(r)) => Ok(r),
        Ok(EngineReply::Error(e)) => Err(e),
        Err(e) => Err(format!("unreadable engine output: {e}")),
    }
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ModeName {
    RaceAll,
    Staged,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum IsolationName {
    InProcess,
    Subprocess,
}

/// TOML layout of a portfolio file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PortfolioFile {
    budget: Option<f64>,
    mode: Option<ModeName>,
    stage1_budget: Option<f64>,
    grace: Option<f64>,
    #[serde(default)]
    share_incumbent: bool,
    isolation: Option<IsolationName>,
    program: Option<PathBuf>,
    #[serde(rename = "engine")]
    engines: Vec<EngineSpec>,
}

fn seconds(s: f64) -> Result<Duration, PortfolioError> {
    Duration::try_from_secs_f64(s).map_err(|e| PortfolioError::Config(e.to_string()))
}

impl PortfolioConfig {
    /// Parses a TOML portfolio file; `budget` is used when the file has none.
    pub fn from_toml(text: &str, budget: Duration) -> Result<PortfolioConfig, PortfolioError> {
        let file: PortfolioFile = toml::from_str(text).map_err(|e| PortfolioError::Config(e.to_string()))?;
        let mode = match file.mode.unwrap_or(ModeName::RaceAll) {
            ModeName::RaceAll => Mode::RaceAll,
            ModeName::Staged => Mode::Staged {
                stage1_budget: file.stage1_budget.map(seconds).transpose()?.unwrap_or(DEFAULT_STAGE1_BUDGET),
            },
        };
        let isolation = match file.isolation.unwrap_or(IsolationName::InProcess) {
            IsolationName::InProcess => Isolation::InProcess,
            IsolationName::Subprocess => Isolation::Subprocess {
                program: match file.program {
                    Some(p) => p,
                    None => std::env::current_exe()?,
                },
            },
        };
        Ok(PortfolioConfig {
            specs: file.engines,
            mode,
            budget: file.budget.map(seconds).transpose()?.unwrap_or(budget),
            grace: file.grace.map(seconds).transpose()?.unwrap_or(DEFAULT_GRACE),
            share_incumbent: file.share_incumbent,
            isolation,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::EngineKind;
    use mcsplit_core::{solve, Unlimited};

    fn pair() -> (Graph, Graph) {
        (Graph::random(8, 0.5, 4), Graph::random(9, 0.4, 5))
    }

    #[test]
    fn single_spec_wins() {
        let (g, h) = pair();
        let cfg = PortfolioConfig::race_all(vec![EngineSpec::new(EngineKind::Recursive)], Duration::from_secs(10));
        let r = run_portfolio(&g, &h, &cfg).unwrap();
        assert_eq!(r.winner.as_deref(), Some("recursive"));
        assert_eq!(r.size, solve(&g, &h, &Unlimited).unwrap().size());
        assert_eq!(r.engines.len(), 1);
    }

    #[test]
    fn zero_budget_engine_loses() {
        let (g, h) = pair();
        let specs = vec![
            EngineSpec::new(EngineKind::Recursive).with_id("starved").with_budget(0.0),
            EngineSpec::new(EngineKind::Iterative),
        ];
        let r = run_portfolio(&g, &h, &PortfolioConfig::race_all(specs, Duration::from_secs(10))).unwrap();
        assert_eq!(r.winner.as_deref(), Some("iterative"));
        assert_eq!(r.size, solve(&g, &h, &Unlimited).unwrap().size());
        assert_eq!(r.engines[0].status, EngineStatus::Timeout);
    }

    #[test]
    fn all_timeouts() {
        let (g, h) = pair();
        let specs = vec![EngineSpec::new(EngineKind::Recursive)];
        let r = run_portfolio(&g, &h, &PortfolioConfig::race_all(specs, Duration::ZERO)).unwrap();
        assert_eq!(r.status, Status::Timeout);
        assert!(r.winner.is_none());
    }

    #[test]
    fn empty_and_invalid_portfolios() {
        let (g, h) = pair();
        assert!(matches!(
            run_portfolio(&g, &h, &PortfolioConfig::race_all(vec![], Duration::from_secs(1))),
            Err(PortfolioError::NoSpecs)
        ));
        let mut bad = EngineSpec::new(EngineKind::Parallel);
        bad.heuristics.goal_directed = true;
        assert!(matches!(
            run_portfolio(&g, &h, &PortfolioConfig::race_all(vec![bad], Duration::from_secs(1))),
            Err(PortfolioError::Spec { .. })
        ));
    }

    #[test]
    fn all_errors_aggregate() {
        let g = Graph::random(4, 0.5, 1);
        let d = Graph::random_directed(4, 0.5, 1);
        let specs = vec![EngineSpec::new(EngineKind::Recursive), EngineSpec::new(EngineKind::Iterative)];
        let r = run_portfolio(&g, &d, &PortfolioConfig::race_all(specs, Duration::from_secs(1)));
        assert!(matches!(r, Err(PortfolioError::AllFailed(v)) if v.len() == 2));
    }

    #[test]
    fn staged_zero_skips_stage_one() {
        let (g, h) = pair();
        let specs = vec![
            EngineSpec::new(EngineKind::Recursive).with_stage(1),
            EngineSpec::new(EngineKind::Iterative).with_stage(2),
        ];
        let r =
            run_portfolio(&g, &h, &PortfolioConfig::staged(specs, Duration::ZERO, Duration::from_secs(10))).unwrap();
        assert_eq!(r.winner.as_deref(), Some("iterative"));
        assert_eq!(r.engines.len(), 1);
    }

    #[test]
    fn staged_stage_one_can_win() {
        let (g, h) = pair();
        let specs = vec![
            EngineSpec::new(EngineKind::Recursive).with_stage(1),
            EngineSpec::new(EngineKind::Iterative).with_stage(2),
        ];
        let cfg = PortfolioConfig::staged(specs, Duration::from_secs(5), Duration::from_secs(10));
        let r = run_portfolio(&g, &h, &cfg).unwrap();
        assert_eq!(r.winner.as_deref(), Some("recursive"));
        assert_eq!(r.engines.len(), 1);
    }

    #[test]
    fn shared_incumbent_keeps_optimum() {
        for seed in 0..5 {
            let g = Graph::random(9, 0.5, seed);
            let h = Graph::random(9, 0.5, seed + 50);
            let specs = ["recursive", "iterative", "parallel"].map(|n| EngineSpec::preset(n).unwrap()).to_vec();
            let mut cfg = PortfolioConfig::race_all(specs, Duration::from_secs(10));
            cfg.share_incumbent = true;
            let r = run_portfolio(&g, &h, &cfg).unwrap();
            assert_eq!(r.size, solve(&g, &h, &Unlimited).unwrap().size());
        }
    }

    #[test]
    fn toml_config() {
        let text = r#"
            budget = 3.0
            mode = "staged"
            stage1_budget = 0.5
            grace = 0.25

            [[engine]]
            id = "seq"
            engine = "recursive"
            order = "degree_desc"
            stage = 1

            [[engine]]
            id = "par"
            engine = "parallel"
            workers = 2
            budget = 2.0
        "#;
        let cfg = PortfolioConfig::from_toml(text, Duration::from_secs(99)).unwrap();
        assert_eq!(cfg.budget, Duration::from_secs(3));
        assert_eq!(cfg.mode, Mode::Staged { stage1_budget: Duration::from_millis(500) });
        assert_eq!(cfg.grace, Duration::from_millis(250));
        assert_eq!(cfg.specs.len(), 2);
        assert_eq!(cfg.specs[0].stage, 1);
        assert_eq!(cfg.specs[1].stage, 2);
        assert_eq!(cfg.specs[1].heuristics.workers, Some(2));
        assert!(
            PortfolioConfig::from_toml("colour = 1\n[[engine]]\nid='x'\nengine='recursive'\n", Duration::ZERO).is_err()
        );
    }

    #[test]
    fn engine_request_round_trip() {
        let (g, h) = pair();
        let req = EngineRequest { g, h, spec: EngineSpec::new(EngineKind::Iterative), budget: Duration::from_secs(5) };
        match serve_engine_request(&serde_json::to_string(&req).unwrap()) {
            EngineReply::Result(r) => assert!(r.is_optimal()),
            EngineReply::Error(e) => panic!("{e}"),
        }
        assert!(matches!(serve_engine_request("{}"), EngineReply::Error(_)));
    }
}
