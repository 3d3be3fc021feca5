//! Engine configurations shared by the CLI, the portfolio and the bench
//! harness.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use mcsplit_core::heuristics::{
    solve_ordered, solve_with_bound_jump, solve_with_restarts, DeadEndPolicy, Jump, OrderStrategy, RestartConfig,
};
use mcsplit_core::{
    solve, solve_goal_directed, solve_iterative, Control, Graph, IterativeConfig, SolveError, SolveResult,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::parallel::{solve_parallel, ParallelConfig, DEFAULT_PART_LEVEL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    Recursive,
    Parallel,
    Iterative,
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EngineKind::Recursive => "recursive",
            EngineKind::Parallel => "parallel",
            EngineKind::Iterative => "iterative",
        })
    }
}

/// Optional behaviour layered on an engine.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Heuristics {
    pub goal_directed: bool,
    pub order: Option<OrderStrategy>,
    /// Dead-end policy: the bound-jump trigger, or the restart trigger.
    pub deadend: Option<DeadEndPolicy>,
    pub jump: Option<Jump>,
    /// Restart seed; enables randomised restarts.
    pub restarts: Option<u64>,
    pub workers: Option<usize>,
    pub part_level: Option<usize>,
    pub wide: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineSpec {
    pub id: String,
    pub engine: EngineKind,
    #[serde(default, flatten)]
    pub heuristics: Heuristics,
    /// Own budget in seconds, capped by the overall one.
    #[serde(default)]
    pub budget: Option<f64>,
    /// Stage of a staged portfolio.
    #[serde(default = "default_stage")]
    pub stage: u8,
}

fn default_stage() -> u8 {
    2
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpecError {
    #[error("unknown engine `{0}`")]
    UnknownEngine(String),
    #[error("{flag} applies to the recursive engine only")]
    RecursiveOnly { flag: &'static str },
    #[error("{0} and {1} cannot be combined")]
    Conflict(&'static str, &'static str),
    #[error("a dead-end policy needs bound jumping or restarts")]
    IdleDeadEnd,
    #[error("worker count must be at least 1")]
    NoWorkers,
    #[error("stage must be 1 or 2, found {0}")]
    Stage(u8),
}

impl EngineSpec {
    pub fn new(engine: EngineKind) -> EngineSpec {
        EngineSpec { id: engine.to_string(), engine, heuristics: Heuristics::default(), budget: None, stage: 2 }
    }

    pub fn with_id(mut self, id: impl Into<String>) -> EngineSpec {
        self.id = id.into();
        self
    }

    pub fn with_heuristics(mut self, heuristics: Heuristics) -> EngineSpec {
        self.heuristics = heuristics;
        self
    }

    pub fn with_budget(mut self, seconds: f64) -> EngineSpec {
        self.budget = Some(seconds);
        self
    }

    pub fn with_stage(mut self, stage: u8) -> EngineSpec {
        self.stage = stage;
        self
    }

    /// Named presets: `recursive`, `goal_directed`, `parallel`, `iterative`,
    /// `bound_jump` and `restarts`.
    pub fn preset(name: &str) -> Result<EngineSpec, SpecError> {
        let name = name.replace('-', "_");
        let h = Heuristics::default();
        let spec = match name.as_str() {
            "recursive" => EngineSpec::new(EngineKind::Recursive),
            "parallel" => EngineSpec::new(EngineKind::Parallel),
            "iterative" => EngineSpec::new(EngineKind::Iterative),
            "goal_directed" => {
                EngineSpec::new(EngineKind::Recursive).with_heuristics(Heuristics { goal_directed: true, ..h })
            }
            "bound_jump" => EngineSpec::new(EngineKind::Recursive).with_heuristics(Heuristics {
                deadend: Some(DeadEndPolicy::default()),
                jump: Some(Jump::PlusOne),
                ..h
            }),
            "restarts" => EngineSpec::new(EngineKind::Recursive).with_heuristics(Heuristics { restarts: Some(0), ..h }),
            _ => return Err(SpecError::UnknownEngine(name)),
        };
        Ok(spec.with_id(name))
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        let h = &self.heuristics;
        if !matches!(self.stage, 1 | 2) {
            return Err(SpecError::Stage(self.stage));
        }
        if h.workers == Some(0) {
            return Err(SpecError::NoWorkers);
        }
        if self.engine != EngineKind::Recursive {
            for (set, flag) in [
                (h.goal_directed, "goal-directed search"),
                (h.deadend.is_some(), "a dead-end policy"),
                (h.jump.is_some(), "bound jumping"),
                (h.restarts.is_some(), "restarts"),
            ] {
                if set {
                    return Err(SpecError::RecursiveOnly { flag });
                }
            }
        }
        let modes = [
            (h.goal_directed, "goal-directed search"),
            (h.jump.is_some(), "bound jumping"),
            (h.restarts.is_some(), "restarts"),
        ];
        let on: Vec<&'static str> = modes.iter().filter(|m| m.0).map(|m| m.1).collect();
        if on.len() > 1 {
            return Err(SpecError::Conflict(on[0], on[1]));
        }
        if h.deadend.is_some() && h.jump.is_none() && h.restarts.is_none() {
            return Err(SpecError::IdleDeadEnd);
        }
        Ok(())
    }

    pub fn budget(&self) -> Option<Duration> {
        self.budget.map(|s| Duration::from_secs_f64(s.max(0.0)))
    }

    pub fn parallel_config(&self) -> ParallelConfig {
        ParallelConfig {
            workers: self.heuristics.workers.unwrap_or_else(crate::parallel::default_workers),
            part_level: self.heuristics.part_level.unwrap_or(DEFAULT_PART_LEVEL),
            ..ParallelConfig::default()
        }
    }
}

impl FromStr for EngineSpec {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<EngineSpec, SpecError> {
        EngineSpec::preset(s)
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Runs one engine configuration on `(g, h)`.
pub fn run_engine<C: Control + ?Sized>(
    g: &Graph,
    h: &Graph,
    spec: &EngineSpec,
    control: &C,
) -> Result<SolveResult, EngineError> {
    spec.validate()?;
    let run = |g: &Graph, h: &Graph| -> Result<SolveResult, SolveError> {
        let heur = &spec.heuristics;
        match spec.engine {
            EngineKind::Parallel => solve_parallel(g, h, spec.parallel_config(), control),
            EngineKind::Iterative => {
                let config = IterativeConfig { wide: heur.wide, ..IterativeConfig::default() };
                solve_iterative(g, h, config, control)
            }
            EngineKind::Recursive => {
                if let Some(seed) = heur.restarts {
                    let config = match heur.deadend {
                        Some(policy) => RestartConfig { seed, policy: Some(policy) },
                        None => RestartConfig::doubling(seed),
                    };
                    solve_with_restarts(g, h, config, control)
                } else if let Some(jump) = heur.jump {
                    solve_with_bound_jump(g, h, heur.deadend.unwrap_or_default(), jump, control)
                } else if heur.goal_directed {
                    solve_goal_directed(g, h, control)
                } else {
                    solve(g, h, control)
                }
            }
        }
    };
    let result = match spec.heuristics.order {
        Some(strategy) => solve_ordered(g, h, strategy, run)?,
        None => run(g, h)?,
    };
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use mcsplit_core::Unlimited;

    #[test]
    fn presets_validate_and_agree() {
        let g = Graph::random(8, 0.5, 9);
        let h = Graph::random(7, 0.3, 10);
        let sizes: Vec<usize> = ["recursive", "goal_directed", "parallel", "iterative", "bound_jump", "restarts"]
            .iter()
            .map(|n| run_engine(&g, &h, &EngineSpec::preset(n).unwrap(), &Unlimited).unwrap().size())
            .collect();
        assert!(sizes.windows(2).all(|w| w[0] == w[1]), "{sizes:?}");
    }

    #[test]
    fn invalid_combinations() {
        let mut s = EngineSpec::new(EngineKind::Iterative);
        s.heuristics.restarts = Some(1);
        assert_eq!(s.validate(), Err(SpecError::RecursiveOnly { flag: "restarts" }));
        let mut s = EngineSpec::new(EngineKind::Recursive);
        s.heuristics.deadend = Some(DeadEndPolicy::Absolute(5));
        assert_eq!(s.validate(), Err(SpecError::IdleDeadEnd));
        s.heuristics.jump = Some(Jump::Doubling);
        s.heuristics.goal_directed = true;
        assert!(matches!(s.validate(), Err(SpecError::Conflict(..))));
        assert!(EngineSpec::preset("quantum").is_err());
    }

    #[test]
    fn ordering_maps_back() {
        let g = Graph::random(8, 0.4, 1);
        let h = Graph::random(8, 0.6, 2);
        let mut spec = EngineSpec::new(EngineKind::Recursive);
        spec.heuristics.order = Some(OrderStrategy::BlockTriangular);
        let r = run_engine(&g, &h, &spec, &Unlimited).unwrap();
        assert_eq!(mcsplit_core::oracle::verify(&g, &h, &r.mapping), Ok(true));
        assert_eq!(r.size(), solve(&g, &h, &Unlimited).unwrap().size());
    }
}
