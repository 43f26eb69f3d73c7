//! Online schedulers behind one trait: Greedy and the three-candidate
//! scheduler `Alg`, plus derivation and validation of Alg's constants.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Job, JobSequence, PrefixStats, ScheduleState};

/// `Q(x) = 4x^3 - 14x^2 + 16x - 7`, the polynomial whose unique real root is
/// the target competitive ratio.
pub fn poly_q(x: f64) -> f64 {
    ((4.0 * x - 14.0) * x + 16.0) * x - 7.0
}

/// The unique real root of `Q`, computed from the closed form and polished
/// with Newton steps rather than hardcoded as a decimal literal.
pub fn competitive_ratio() -> f64 {
    let s = 87.0_f64.sqrt();
    let mut c = (7.0 + (28.0 - 3.0 * s).cbrt() + (28.0 + 3.0 * s).cbrt()) / 6.0;
    for _ in 0..8 {
        let dq = (12.0 * c - 28.0) * c + 16.0;
        c -= poly_q(c) / dq;
    }
    c
}

/// Rule for the reluctance parameter h.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HRule {
    /// `h = floor(cbrt(m))`, clamped to at least 1. The default.
    CubeRoot,
    /// `h = floor(ln m)`, clamped to at least 1.
    Log,
    Explicit(usize),
}

impl Default for HRule {
    fn default() -> Self {
        HRule::CubeRoot
    }
}

impl HRule {
    pub fn h_for(self, m: usize) -> usize {
        let h = match self {
            HRule::CubeRoot => integer_cbrt(m),
            HRule::Log => (m as f64).ln().floor() as usize,
            HRule::Explicit(h) => h,
        };
        h.max(1)
    }
}

fn integer_cbrt(m: usize) -> usize {
    let mut r = (m as f64).cbrt().round() as usize;
    while r > 0 && r * r * r > m {
        r -= 1;
    }
    while (r + 1) * (r + 1) * (r + 1) <= m {
        r += 1;
    }
    r
}

/// Derived constants of the three-candidate scheduler for a machine count m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgConfig {
    pub m: usize,
    pub h: usize,
    pub c: f64,
    /// Rank of the heavily loaded candidate, `ceil((2c-3) m) + h`.
    pub i: usize,
    /// Steepness rank, `2i - m`.
    pub k: usize,
    /// Imbalance factor `2(c-1)/(2c-3)`.
    pub alpha: f64,
}

impl AlgConfig {
    /// Derive and validate the constants; rejects machine counts where the
    /// three candidate ranks i, m-h, m would collide, reporting the smallest
    /// machine count the rule supports.
    pub fn derive(m: usize, rule: HRule) -> Result<Self> {
        if m == 0 {
            return Err(Error::BadMachineCount { m, min: 1 });
        }
        let c = competitive_ratio();
        let h = rule.h_for(m);
        let i = ((2.0 * c - 3.0) * m as f64).ceil() as usize + h;
        let valid = 2 * i > m && i + h < m;
        if !valid {
            return Err(Error::ConfigInvalid {
                m,
                h,
                i,
                min_valid_m: min_valid_m(rule),
            });
        }
        let k = 2 * i - m;
        debug_assert!(1 <= k && k <= i);
        Ok(AlgConfig {
            m,
            h,
            c,
            i,
            k,
            alpha: 2.0 * (c - 1.0) / (2.0 * c - 3.0),
        })
    }

    /// Rank of the intermediate candidate, the (h+1)-st least loaded machine.
    pub fn mid_rank(&self) -> usize {
        self.m - self.h
    }
}

/// Smallest machine count for which `AlgConfig::derive` succeeds under the
/// given rule, found by scanning (validity is not monotone near the bottom,
/// so this is the first workable m, computed at runtime).
pub fn min_valid_m(rule: HRule) -> usize {
    let c = competitive_ratio();
    (1..=1_000_000)
        .find(|&m| {
            let h = rule.h_for(m);
            let i = ((2.0 * c - 3.0) * m as f64).ceil() as usize + h;
            2 * i > m && i + h < m
        })
        .expect("a valid machine count exists")
}

/// A schedule is steep when `l_k >= alpha * L_{i+1}`; flat otherwise.
pub fn is_steep(state: &ScheduleState, cfg: &AlgConfig) -> bool {
    let l_k = state.load_at_rank(cfg.k).expect("k is a valid rank");
    let tail_avg = state.suffix_average(cfg.i + 1).expect("i+1 is a valid rank");
    !(l_k < cfg.alpha * tail_avg)
}

/// One probed candidate: the machine's load before placement and whether the
/// safety check `load + p <= c * O^t` accepted it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateCheck {
    pub rank: usize,
    pub load_before: f64,
    pub accepted: bool,
}

/// Where a scheduler wants the incoming job, with enough detail to audit the
/// decision afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub rank: usize,
    /// `None` for schedulers without a steep/flat notion.
    pub steep: Option<bool>,
    pub checks: Vec<CandidateCheck>,
}

/// Per-step record of an online run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepTrace {
    pub t: usize,
    pub job_id: usize,
    pub p: f64,
    pub steep: Option<bool>,
    pub o_t: f64,
    pub checks: Vec<CandidateCheck>,
    pub chosen_rank: usize,
    pub chosen_machine: usize,
    pub makespan: f64,
}

/// An online scheduler: a pure decision rule over the current schedule and
/// the statistics of the jobs revealed so far.
pub trait Scheduler: Send + Sync {
    fn name(&self) -> &str;

    /// Pick a rank for `job`. `stats` already includes the incoming job;
    /// `state` holds the earlier placements only.
    fn decide(&self, state: &ScheduleState, stats: &PrefixStats, job: &Job) -> Result<Decision>;
}

/// Always the least loaded machine.
#[derive(Debug, Clone, Copy, Default)]
pub struct Greedy;

impl Scheduler for Greedy {
    fn name(&self) -> &str {
        "greedy"
    }

    fn decide(&self, state: &ScheduleState, _stats: &PrefixStats, _job: &Job) -> Result<Decision> {
        Ok(Decision {
            rank: state.m(),
            steep: None,
            checks: Vec::new(),
        })
    }
}

/// The three-candidate scheduler. On a steep schedule the job goes to the
/// least loaded machine. On a flat schedule the ranks i, m-h, m are probed in
/// that order; the first whose resulting load stays within `c * O^t` wins,
/// with rank m as the unconditional fallback.
#[derive(Debug, Clone, Copy)]
pub struct Alg {
    cfg: AlgConfig,
}

impl Alg {
    pub fn new(cfg: AlgConfig) -> Self {
        Alg { cfg }
    }

    pub fn config(&self) -> &AlgConfig {
        &self.cfg
    }
}

impl Scheduler for Alg {
    fn name(&self) -> &str {
        "alg"
    }

    fn decide(&self, state: &ScheduleState, stats: &PrefixStats, job: &Job) -> Result<Decision> {
        let cfg = &self.cfg;
        debug_assert_eq!(state.m(), cfg.m);
        debug_assert!(
            stats.t() == state.jobs_placed() + 1,
            "observe must run before every placement"
        );
        if is_steep(state, cfg) {
            return Ok(Decision {
                rank: cfg.m,
                steep: Some(true),
                checks: Vec::new(),
            });
        }
        let cap = cfg.c * stats.lower_bound();
        let mut checks = Vec::with_capacity(2);
        for rank in [cfg.i, cfg.mid_rank()] {
            let load = state.load_at_rank(rank)?;
            let accepted = load + job.p <= cap;
            checks.push(CandidateCheck {
                rank,
                load_before: load,
                accepted,
            });
            if accepted {
                return Ok(Decision {
                    rank,
                    steep: Some(false),
                    checks,
                });
            }
        }
        Ok(Decision {
            rank: cfg.m,
            steep: Some(false),
            checks,
        })
    }
}

/// Result of one online run: the final makespan, the machine each job ended
/// on (indexed by job id), the per-step traces, and the final sorted loads.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub makespan: f64,
    pub assignment: Vec<usize>,
    pub traces: Vec<StepTrace>,
    pub sorted_loads: Vec<f64>,
}

/// Process the jobs in the given order. The prefix statistics are updated
/// *before* each placement so the scheduler's lower bound `O^t` already
/// covers the incoming job; the interface makes that ordering impossible to
/// skip.
pub fn run_online(scheduler: &dyn Scheduler, seq: &JobSequence) -> Result<RunOutcome> {
    let m = seq.m();
    let mut state = ScheduleState::new(m)?;
    let mut stats = PrefixStats::new(m)?;
    let mut traces = Vec::with_capacity(seq.n());
    let mut assignment = vec![usize::MAX; seq.n()];
    for (pos, job) in seq.jobs().iter().enumerate() {
        stats.observe(job)?;
        let o_t = stats.lower_bound();
        let decision = scheduler.decide(&state, &stats, job)?;
        let machine = state.machine_at_rank(decision.rank)?;
        state.assign(decision.rank, job)?;
        assignment[job.id] = machine;
        traces.push(StepTrace {
            t: pos + 1,
            job_id: job.id,
            p: job.p,
            steep: decision.steep,
            o_t,
            checks: decision.checks,
            chosen_rank: decision.rank,
            chosen_machine: machine,
            makespan: state.makespan(),
        });
    }
    Ok(RunOutcome {
        makespan: state.makespan(),
        assignment,
        traces,
        sorted_loads: state.sorted_loads(),
    })
}

/// Serialize traces as JSON lines, one step per line.
pub fn traces_to_jsonl(traces: &[StepTrace]) -> String {
    let mut out = String::new();
    for tr in traces {
        out.push_str(&serde_json::to_string(tr).expect("trace serialization cannot fail"));
        out.push('\n');
    }
    out
}

pub type SchedulerFactory = Arc<dyn Fn(&JobSequence) -> Result<Box<dyn Scheduler>> + Send + Sync>;

/// Schedulers selectable by name; plug-ins register a factory under a name.
pub struct SchedulerRegistry {
    builders: BTreeMap<String, SchedulerFactory>,
}

impl SchedulerRegistry {
    pub fn empty() -> Self {
        SchedulerRegistry {
            builders: BTreeMap::new(),
        }
    }

    /// Registry with "greedy" and "alg" (the latter deriving its constants
    /// from the sequence's machine count under `rule`).
    pub fn with_defaults(rule: HRule) -> Self {
        let mut reg = Self::empty();
        reg.register("greedy", Arc::new(|_seq| Ok(Box::new(Greedy) as Box<dyn Scheduler>)));
        reg.register(
            "alg",
            Arc::new(move |seq: &JobSequence| {
                let cfg = AlgConfig::derive(seq.m(), rule)?;
                Ok(Box::new(Alg::new(cfg)) as Box<dyn Scheduler>)
            }),
        );
        reg
    }

    pub fn register(&mut self, name: &str, factory: SchedulerFactory) {
        self.builders.insert(name.to_string(), factory);
    }

    pub fn build(&self, name: &str, seq: &JobSequence) -> Result<Box<dyn Scheduler>> {
        let factory = self
            .builders
            .get(name)
            .ok_or_else(|| Error::UnknownScheduler(name.to_string()))?;
        factory(seq)
    }

    pub fn names(&self) -> Vec<&str> {
        self.builders.keys().map(|s| s.as_str()).collect()
    }
}

impl Default for SchedulerRegistry {
    fn default() -> Self {
        Self::with_defaults(HRule::default())
    }
}
