//! Input families: the lower-bound constructions, the classic Greedy
//! adversarial input, random proper sequences, and the unit-job probe.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algorithms::Scheduler;
use crate::error::{Error, Result};
use crate::model::{classify_plain, Job, JobSequence, Plainness, PrefixStats, ScheduleState};
use crate::seeds::{stream_rng, StreamKind};

/// How many fresh draws `random_proper` attempts before giving up.
pub const PROPER_RETRIES: usize = 64;

/// Sampling distribution for random sequences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dist {
    Uniform { lo: f64, hi: f64 },
    TwoPoint { lo: f64, hi: f64, prob_hi: f64 },
    ParetoTruncated { shape: f64, scale: f64, cap: f64 },
}

impl Dist {
    /// Parse a compact spec: "uniform:LO,HI", "two-point:LO,HI,PROB" or
    /// "pareto:SHAPE,SCALE,CAP".
    pub fn parse(spec: &str) -> Result<Self> {
        let bad = || Error::BadDistribution(format!("cannot parse '{spec}'"));
        let (kind, rest) = spec.split_once(':').ok_or_else(bad)?;
        let nums: Vec<f64> = rest
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let dist = match (kind, nums.as_slice()) {
            ("uniform", [lo, hi]) => Dist::Uniform { lo: *lo, hi: *hi },
            ("two-point", [lo, hi, p]) => Dist::TwoPoint {
                lo: *lo,
                hi: *hi,
                prob_hi: *p,
            },
            ("pareto", [shape, scale, cap]) => Dist::ParetoTruncated {
                shape: *shape,
                scale: *scale,
                cap: *cap,
            },
            _ => return Err(bad()),
        };
        dist.validate()?;
        Ok(dist)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::BadDistribution(msg));
        match *self {
            Dist::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || hi < lo {
                    return bad(format!("uniform({lo}, {hi})"));
                }
            }
            Dist::TwoPoint { lo, hi, prob_hi } => {
                if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || hi < lo {
                    return bad(format!("two_point({lo}, {hi})"));
                }
                if !(0.0..=1.0).contains(&prob_hi) {
                    return bad(format!("two_point probability {prob_hi}"));
                }
            }
            Dist::ParetoTruncated { shape, scale, cap } => {
                if !(shape > 0.0 && scale > 0.0 && cap >= scale)
                    || !shape.is_finite()
                    || !cap.is_finite()
                {
                    return bad(format!("pareto_truncated({shape}, {scale}, {cap})"));
                }
            }
        }
        Ok(())
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            Dist::Uniform { lo, hi } => {
                if lo == hi {
                    lo
                } else {
                    rng.random_range(lo..hi)
                }
            }
            Dist::TwoPoint { lo, hi, prob_hi } => {
                if rng.random::<f64>() < prob_hi {
                    hi
                } else {
                    lo
                }
            }
            Dist::ParetoTruncated { shape, scale, cap } => {
                // inverse CDF of a Pareto(shape, scale) truncated at cap
                let tail = (scale / cap).powf(shape);
                let u: f64 = rng.random();
                scale / (1.0 - u * (1.0 - tail)).powf(1.0 / shape)
            }
        }
    }
}

/// Input family plus its parameters; the machine count lives in `GenSpec`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `r * m` unit jobs.
    UniformR { r: usize },
    /// `4m - 4` unit jobs followed by one job of size 4; optimum 4.
    LbFourThirds,
    /// `2m - 2` unit jobs followed by one job of size 2; optimum 2.
    LbThreeHalves,
    /// `m(m-1)` unit jobs followed by one job of size m.
    GreedyAdversarial,
    /// `n` i.i.d. draws, redrawn until the sequence classifies as proper.
    RandomProper { n: usize, dist: Option<Dist> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    #[serde(flatten)]
    pub family: Family,
    pub m: usize,
}

impl GenSpec {
    pub fn label(&self) -> &'static str {
        match self.family {
            Family::UniformR { .. } => "uniform_r",
            Family::LbFourThirds => "lb_four_thirds",
            Family::LbThreeHalves => "lb_three_halves",
            Family::GreedyAdversarial => "greedy_adversarial",
            Family::RandomProper { .. } => "random_proper",
        }
    }
}

/// `r * m` jobs of processing time 1.
pub fn uniform_jobs(r: usize, m: usize) -> Result<JobSequence> {
    if r < 1 {
        return Err(Error::BadGenerator(format!("need r >= 1, got {r}")));
    }
    if m < 2 {
        return Err(Error::BadMachineCount { m, min: 2 });
    }
    JobSequence::from_times(m, &vec![1.0; r * m])
}

/// `4m - 4` unit jobs and one job of size 4 (in that order). The interesting
/// regime is m >= 8; smaller machine counts are allowed.
pub fn lb_four_thirds(m: usize) -> Result<JobSequence> {
    if m < 2 {
        return Err(Error::BadMachineCount { m, min: 2 });
    }
    let mut times = vec![1.0; 4 * m - 4];
    times.push(4.0);
    JobSequence::from_times(m, &times)
}

/// `2m - 2` unit jobs and one job of size 2 (in that order).
pub fn lb_three_halves(m: usize) -> Result<JobSequence> {
    if m < 2 {
        return Err(Error::BadMachineCount { m, min: 2 });
    }
    let mut times = vec![1.0; 2 * m - 2];
    times.push(2.0);
    JobSequence::from_times(m, &times)
}

/// `m(m-1)` unit jobs and one job of size m: in this order Greedy ends at
/// `2 - 1/m` times the optimum.
pub fn greedy_adversarial(m: usize) -> Result<JobSequence> {
    if m < 2 {
        return Err(Error::BadMachineCount { m, min: 2 });
    }
    let mut times = vec![1.0; m * (m - 1)];
    times.push(m as f64);
    JobSequence::from_times(m, &times)
}

/// A two-point distribution whose rare large value tracks `n/m`, so draws of
/// `n` jobs on `m` machines land in the proper regime with good probability.
pub fn default_proper_dist(m: usize, n: usize) -> Dist {
    Dist::TwoPoint {
        lo: 1.0,
        hi: (n as f64 / m as f64).max(1.5),
        prob_hi: 2.0 / n as f64,
    }
}

/// Draw `n` i.i.d. processing times and redraw (up to `PROPER_RETRIES`) until
/// the sequence is proper. Deterministic given the seed.
pub fn random_proper(m: usize, n: usize, dist: Option<Dist>, seed: u64) -> Result<JobSequence> {
    if m < 1 {
        return Err(Error::BadMachineCount { m, min: 1 });
    }
    if n <= m {
        return Err(Error::NotEnoughJobs { n, m });
    }
    let dist = dist.unwrap_or_else(|| default_proper_dist(m, n));
    dist.validate()?;
    let c = crate::algorithms::competitive_ratio();
    let mut rng = stream_rng(seed, StreamKind::Generate, 0);
    for _ in 0..PROPER_RETRIES {
        let times: Vec<f64> = (0..n).map(|_| dist.sample(&mut rng)).collect();
        let seq = JobSequence::from_times(m, &times)?;
        if classify_plain(&seq, c) == Plainness::Proper {
            return Ok(seq);
        }
    }
    Err(Error::NotProperAfterRetries {
        m,
        n,
        retries: PROPER_RETRIES,
    })
}

/// Instantiate a generation spec with the experiment seed.
pub fn generate(spec: &GenSpec, seed: u64) -> Result<JobSequence> {
    match spec.family {
        Family::UniformR { r } => uniform_jobs(r, spec.m),
        Family::LbFourThirds => lb_four_thirds(spec.m),
        Family::LbThreeHalves => lb_three_halves(spec.m),
        Family::GreedyAdversarial => greedy_adversarial(spec.m),
        Family::RandomProper { n, dist } => random_proper(spec.m, n, dist, seed),
    }
}

/// Outcome of the unit-job probe: either the scheduler kept assigning to
/// least loaded machines through `r_max` full rounds, or it deviated first
/// during round `r + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeOutcome {
    AtLeast(usize),
    Exactly(usize),
}

impl std::fmt::Display for ProbeOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProbeOutcome::AtLeast(r) => write!(f, ">= {r}"),
            ProbeOutcome::Exactly(r) => write!(f, "{r}"),
        }
    }
}

/// Feed unit jobs in rounds of m and report the largest `r <= r_max` such
/// that every one of the first `r * m` jobs landed on a machine that was
/// least loaded at the time (least by load value, not by identity, so any
/// zero-load machine counts).
pub fn probe_r(scheduler: &dyn Scheduler, m: usize, r_max: usize) -> Result<ProbeOutcome> {
    if m < 2 {
        return Err(Error::BadMachineCount { m, min: 2 });
    }
    if r_max < 1 {
        return Err(Error::BadGenerator(format!("need r_max >= 1, got {r_max}")));
    }
    let mut state = ScheduleState::new(m)?;
    let mut stats = PrefixStats::new(m)?;
    for t in 0..r_max * m {
        let job = Job::new(t, 1.0)?;
        stats.observe(&job)?;
        let min_before = state.min_load();
        let decision = scheduler.decide(&state, &stats, &job)?;
        let machine = state.machine_at_rank(decision.rank)?;
        if state.loads()[machine] != min_before {
            return Ok(ProbeOutcome::Exactly(t / m));
        }
        state.assign(decision.rank, &job)?;
    }
    Ok(ProbeOutcome::AtLeast(r_max))
}
