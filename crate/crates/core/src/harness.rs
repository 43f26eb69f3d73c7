//! Random-order experiment engine: permutation generation and enumeration,
//! expected-makespan measurement, ratio reports and tail probabilities.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::{run_online, Scheduler};
use crate::error::{Error, Result};
use crate::model::JobSequence;
use crate::opt_oracle::{exact_opt, lpt_upper_bound, opt_lower_bound, OptKind, OracleLimits};
use crate::seeds::{stream_rng, StreamKind};

/// Permutation enumeration is capped at this many positions by default.
pub const PERMUTATION_CAP: usize = 9;

/// Default cap on distinct value arrangements in exact mode.
pub const ARRANGEMENT_CAP: u128 = 1_000_000;

/// z for two-sided 95% intervals.
const Z95: f64 = 1.959963984540054;

/// Uniform random permutation of the sequence (Fisher-Yates under the hood),
/// deterministic per seed.
pub fn permute(seq: &JobSequence, seed: u64) -> JobSequence {
    let mut rng = stream_rng(seed, StreamKind::Permute, 0);
    let mut idx: Vec<usize> = (0..seq.n()).collect();
    idx.shuffle(&mut rng);
    seq.permuted_by(&idx).expect("a shuffle is a permutation")
}

/// Lexicographic iterator over index permutations. On a sorted start this
/// yields each distinct arrangement of a multiset exactly once.
struct Lexicographic {
    items: Vec<usize>,
    state: IterState,
}

enum IterState {
    Fresh,
    Running,
    Done,
}

impl Lexicographic {
    fn over(n: usize) -> Self {
        Lexicographic {
            items: (0..n).collect(),
            state: IterState::Fresh,
        }
    }

    fn advance<T: PartialOrd>(items: &mut [usize], key: impl Fn(usize) -> T) -> bool {
        let n = items.len();
        if n < 2 {
            return false;
        }
        let mut i = n - 1;
        while i > 0 && key(items[i - 1]) >= key(items[i]) {
            i -= 1;
        }
        if i == 0 {
            return false;
        }
        let mut j = n - 1;
        while key(items[j]) <= key(items[i - 1]) {
            j -= 1;
        }
        items.swap(i - 1, j);
        items[i..].reverse();
        true
    }
}

impl Iterator for Lexicographic {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        match self.state {
            IterState::Fresh => {
                self.state = IterState::Running;
                Some(self.items.clone())
            }
            IterState::Running => {
                if Self::advance(&mut self.items, |x| x) {
                    Some(self.items.clone())
                } else {
                    self.state = IterState::Done;
                    None
                }
            }
            IterState::Done => None,
        }
    }
}

/// All `n!` orders of the sequence (positions are distinguishable, so
/// duplicate processing times still contribute distinct permutations).
pub fn enumerate_permutations(
    seq: &JobSequence,
) -> Result<impl Iterator<Item = JobSequence> + '_> {
    enumerate_permutations_capped(seq, PERMUTATION_CAP)
}

pub fn enumerate_permutations_capped(
    seq: &JobSequence,
    cap: usize,
) -> Result<impl Iterator<Item = JobSequence> + '_> {
    let n = seq.n();
    if n > cap {
        return Err(Error::EnumerationTooLarge { n, cap });
    }
    Ok(Lexicographic::over(n).map(move |perm| {
        seq.permuted_by(&perm)
            .expect("enumeration yields permutations")
    }))
}

/// How the random-order expectation is taken.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RomMode {
    /// Enumerate every distinct arrangement of the processing-time multiset
    /// (equal weights; identical values collapse, so e.g. a sequence of
    /// `n - 1` equal jobs plus one other has only n arrangements).
    Exact { max_arrangements: u128 },
    /// Sample random permutations; trial `t` uses its own derived stream.
    MonteCarlo { trials: u64, seed: u64 },
}

impl RomMode {
    pub fn exact() -> Self {
        RomMode::Exact {
            max_arrangements: ARRANGEMENT_CAP,
        }
    }

    pub fn mc(trials: u64, seed: u64) -> Self {
        RomMode::MonteCarlo { trials, seed }
    }
}

/// Certified optimum information attached to a report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptBounds {
    pub lo: f64,
    pub hi: f64,
    pub kind: OptKind,
    pub node_count: u64,
}

impl OptBounds {
    pub fn is_exact(&self) -> bool {
        self.kind == OptKind::Exact
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioInterval {
    pub lo: f64,
    pub hi: f64,
}

/// Random-order outcome summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RomStats {
    pub runs: u64,
    pub mean: f64,
    pub std_error: f64,
    pub min: f64,
    pub max: f64,
    pub exact: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub opt: Option<OptBounds>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<RatioInterval>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail: Option<f64>,
}

/// Tail estimate `P[makespan >= threshold * OPT]`. With exact OPT the two
/// bounds coincide; with an OPT interval the tail is only known to lie
/// between them. The Wilson interval covers sampling noise of `hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailStats {
    pub lo: f64,
    pub hi: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub samples: u64,
}

/// Makespans of all runs demanded by `mode`, in deterministic order.
fn collect_makespans(
    scheduler: &dyn Scheduler,
    seq: &JobSequence,
    mode: RomMode,
) -> Result<(Vec<f64>, bool)> {
    match mode {
        RomMode::Exact { max_arrangements } => {
            let times = seq.processing_times();
            let count = count_arrangements(&times);
            match count {
                Some(c) if c <= max_arrangements => {}
                Some(c) => {
                    return Err(Error::TooManyArrangements {
                        count: c,
                        cap: max_arrangements,
                    })
                }
                None => {
                    return Err(Error::TooManyArrangements {
                        count: u128::MAX,
                        cap: max_arrangements,
                    })
                }
            }
            let mut sorted = times;
            sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
            let mut arrangements = vec![sorted.clone()];
            let mut idx: Vec<usize> = (0..sorted.len()).collect();
            while Lexicographic::advance(&mut idx, |x| sorted[x]) {
                arrangements.push(idx.iter().map(|&x| sorted[x]).collect());
            }
            let m = seq.m();
            let makespans = arrangements
                .par_iter()
                .map(|values| {
                    let arranged = JobSequence::from_times(m, values)?;
                    Ok(run_online(scheduler, &arranged)?.makespan)
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok((makespans, true))
        }
        RomMode::MonteCarlo { trials, seed } => {
            if trials == 0 {
                return Err(Error::NoTrials);
            }
            let makespans = (0..trials)
                .into_par_iter()
                .map(|trial| {
                    let mut rng = stream_rng(seed, StreamKind::Trial, trial);
                    let mut idx: Vec<usize> = (0..seq.n()).collect();
                    idx.shuffle(&mut rng);
                    let permuted = seq.permuted_by(&idx)?;
                    Ok(run_online(scheduler, &permuted)?.makespan)
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok((makespans, false))
        }
    }
}

/// Expected makespan over random arrival orders. Exact mode averages over
/// every distinct arrangement; Monte-Carlo mode reports a standard error.
pub fn rom_expected_makespan(
    scheduler: &dyn Scheduler,
    seq: &JobSequence,
    mode: RomMode,
) -> Result<RomStats> {
    let (makespans, exact) = collect_makespans(scheduler, seq, mode)?;
    let runs = makespans.len() as u64;
    let mean = pairwise_sum(&makespans) / runs as f64;
    let std_error = if exact || runs < 2 {
        0.0
    } else {
        let sq: Vec<f64> = makespans.iter().map(|x| (x - mean) * (x - mean)).collect();
        (pairwise_sum(&sq) / (runs as f64 - 1.0)).sqrt() / (runs as f64).sqrt()
    };
    let min = makespans.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = makespans.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(RomStats {
        runs,
        mean,
        std_error,
        min,
        max,
        exact,
        opt: None,
        ratio: None,
        tail: None,
    })
}

/// Optimum bounds for ratio reporting: the exact value when the instance is
/// small enough, otherwise the certified interval [lower bound, LPT].
pub fn opt_bounds(seq: &JobSequence, limits: &OracleLimits) -> OptBounds {
    let lb = opt_lower_bound(seq);
    match exact_opt(seq, limits) {
        Ok(res) if res.kind == OptKind::Exact => OptBounds {
            lo: res.value,
            hi: res.value,
            kind: OptKind::Exact,
            node_count: res.node_count,
        },
        Ok(res) => OptBounds {
            lo: lb,
            hi: res.value,
            kind: OptKind::UpperBound,
            node_count: res.node_count,
        },
        Err(_) => OptBounds {
            lo: lb,
            hi: lpt_upper_bound(seq),
            kind: OptKind::LowerBound,
            node_count: 0,
        },
    }
}

/// Fraction of arrival orders whose makespan reaches `threshold * OPT`.
pub fn tail_probability(
    scheduler: &dyn Scheduler,
    seq: &JobSequence,
    threshold: f64,
    mode: RomMode,
    opt: &OptBounds,
) -> Result<TailStats> {
    let (makespans, _) = collect_makespans(scheduler, seq, mode)?;
    let samples = makespans.len() as u64;
    // makespan >= thr * opt.hi certainly clears thr * OPT; makespan below
    // thr * opt.lo certainly does not
    let hits_hi = makespans.iter().filter(|&&x| x >= threshold * opt.lo).count() as u64;
    let hits_lo = makespans.iter().filter(|&&x| x >= threshold * opt.hi).count() as u64;
    let (wilson_lo, wilson_hi) = wilson_interval(hits_hi, samples, Z95);
    Ok(TailStats {
        lo: hits_lo as f64 / samples as f64,
        hi: hits_hi as f64 / samples as f64,
        wilson_lo,
        wilson_hi,
        samples,
    })
}

/// Expected makespan plus optimum bounds and the ratio interval
/// `[mean / opt_hi, mean / opt_lo]`.
pub fn ratio_report(
    scheduler: &dyn Scheduler,
    seq: &JobSequence,
    mode: RomMode,
    limits: &OracleLimits,
) -> Result<RomStats> {
    let mut stats = rom_expected_makespan(scheduler, seq, mode)?;
    let opt = opt_bounds(seq, limits);
    stats.ratio = Some(RatioInterval {
        lo: stats.mean / opt.hi,
        hi: stats.mean / opt.lo,
    });
    stats.opt = Some(opt);
    Ok(stats)
}

/// Number of distinct arrangements of the multiset, `n! / prod(mult_v!)`;
/// `None` once the running value overflows u128.
pub fn count_arrangements(values: &[f64]) -> Option<u128> {
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let mut count: u128 = 1;
    let mut placed: u128 = 0;
    let mut run_start = 0;
    for idx in 0..=sorted.len() {
        let run_ended = idx == sorted.len() || (idx > run_start && sorted[idx] != sorted[run_start]);
        if run_ended {
            let mult = (idx - run_start) as u128;
            // multiply by C(placed + mult, mult)
            for j in 1..=mult {
                count = count.checked_mul(placed + j)?;
                count /= j;
            }
            placed += mult;
            run_start = idx;
        }
    }
    Some(count)
}

/// Summation by halving; the result does not depend on chunking of the
/// callers, which keeps reported means stable across thread counts.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::Greedy;
    use crate::generators::{lb_four_thirds, lb_three_halves, uniform_jobs};
    use crate::model::JobSequence;

    fn seq(m: usize, times: &[f64]) -> JobSequence {
        JobSequence::from_times(m, times).unwrap()
    }

    #[test]
    fn permute_is_deterministic_and_identity_on_singletons() {
        let s = seq(2, &[4.0]);
        assert_eq!(permute(&s, 0), s);
        let s = seq(2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(permute(&s, 42), permute(&s, 42));
    }

    #[test]
    fn permute_is_uniform_over_small_orders() {
        // 60000 samples over 3! = 6 orders; each frequency within 3 sigma
        let s = seq(2, &[1.0, 2.0, 3.0]);
        let mut counts = std::collections::HashMap::new();
        for t in 0..60_000u64 {
            let p = permute(&s, t);
            let key: Vec<u64> = p.jobs().iter().map(|j| j.p as u64).collect();
            *counts.entry(key).or_insert(0u64) += 1;
        }
        assert_eq!(counts.len(), 6);
        let expect = 10_000.0;
        let sigma = (60_000.0_f64 * (1.0 / 6.0) * (5.0 / 6.0)).sqrt();
        for (_, c) in counts {
            assert!((c as f64 - expect).abs() <= 3.0 * sigma, "count {c}");
        }
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_permutations(&seq(2, &[1.0])).unwrap().count(), 1);
        assert_eq!(
            enumerate_permutations(&seq(2, &[1.0, 2.0, 3.0]))
                .unwrap()
                .count(),
            6
        );
        // duplicate values still enumerate by position
        assert_eq!(
            enumerate_permutations(&seq(2, &[5.0, 5.0, 5.0]))
                .unwrap()
                .count(),
            6
        );
        assert!(enumerate_permutations(&seq(2, &[0.5; 10])).is_err());
    }

    #[test]
    fn arrangement_counts() {
        assert_eq!(count_arrangements(&[1.0, 1.0, 1.0]), Some(1));
        assert_eq!(count_arrangements(&[1.0, 1.0, 4.0]), Some(3));
        assert_eq!(count_arrangements(&[1.0, 2.0, 3.0]), Some(6));
        let lb43 = lb_four_thirds(8).unwrap();
        assert_eq!(count_arrangements(&lb43.processing_times()), Some(29));
    }

    #[test]
    fn identical_jobs_collapse_to_one_run() {
        let s = uniform_jobs(2, 3).unwrap();
        let stats = rom_expected_makespan(&Greedy, &s, RomMode::exact()).unwrap();
        assert_eq!(stats.runs, 1);
        assert_eq!(stats.mean, 2.0);
        assert_eq!(stats.std_error, 0.0);
        assert!(stats.exact);
    }

    #[test]
    fn greedy_expected_makespan_on_the_four_thirds_family() {
        let s = lb_four_thirds(8).unwrap();
        let stats = rom_expected_makespan(&Greedy, &s, RomMode::exact()).unwrap();
        assert_eq!(stats.runs, 29);
        assert!((stats.mean - (39.0 / 29.0 + 4.0)).abs() <= 1e-12);
    }

    #[test]
    fn single_job_rom_is_its_processing_time() {
        let s = seq(3, &[2.25]);
        let stats = rom_expected_makespan(&Greedy, &s, RomMode::exact()).unwrap();
        assert_eq!(stats.mean, 2.25);
    }

    #[test]
    fn collapse_agrees_with_full_enumeration_on_mixed_duplicates() {
        for times in [
            vec![1.0, 1.0, 2.0, 2.0, 3.0],
            vec![1.0, 1.0, 1.0, 5.0],
            vec![2.0, 2.0, 2.0, 2.0, 2.0, 7.0],
            vec![0.5, 1.5, 1.5, 2.5, 0.5, 1.5],
        ] {
            let s = seq(2, &times);
            let collapsed = rom_expected_makespan(&Greedy, &s, RomMode::exact()).unwrap();
            let mut total = 0.0;
            let mut count = 0u64;
            for p in enumerate_permutations(&s).unwrap() {
                total += run_online(&Greedy, &p).unwrap().makespan;
                count += 1;
            }
            let full = total / count as f64;
            assert!(
                (collapsed.mean - full).abs() <= 1e-12,
                "times={times:?} collapsed={} full={}",
                collapsed.mean,
                full
            );
        }
    }

    #[test]
    fn mc_matches_exact_within_four_standard_errors() {
        let s = seq(2, &[1.0, 2.0, 3.0, 4.0, 0.5, 1.5]);
        let exact = rom_expected_makespan(&Greedy, &s, RomMode::exact()).unwrap();
        let mc = rom_expected_makespan(&Greedy, &s, RomMode::mc(50_000, 11)).unwrap();
        assert!(mc.std_error > 0.0);
        assert!(
            (mc.mean - exact.mean).abs() <= 4.0 * mc.std_error,
            "mc={} exact={} stderr={}",
            mc.mean,
            exact.mean,
            mc.std_error
        );
    }

    #[test]
    fn mc_is_deterministic_per_seed() {
        let s = seq(3, &[1.0, 2.0, 3.0, 4.0, 5.0]);
        let a = rom_expected_makespan(&Greedy, &s, RomMode::mc(500, 3)).unwrap();
        let b = rom_expected_makespan(&Greedy, &s, RomMode::mc(500, 3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tail_at_threshold_one_is_certain() {
        let s = seq(2, &[1.0, 2.0, 3.0]);
        let opt = opt_bounds(&s, &Default::default());
        let tail = tail_probability(&Greedy, &s, 1.0, RomMode::exact(), &opt).unwrap();
        assert_eq!(tail.lo, 1.0);
        assert_eq!(tail.hi, 1.0);
    }

    #[test]
    fn tail_on_identical_jobs_is_zero_or_one() {
        let s = uniform_jobs(2, 2).unwrap();
        let opt = opt_bounds(&s, &Default::default());
        let t = tail_probability(&Greedy, &s, 1.5, RomMode::exact(), &opt).unwrap();
        assert!(t.hi == 0.0 || t.hi == 1.0);
    }

    #[test]
    fn greedy_tail_on_the_three_halves_family() {
        for m in 2..=10 {
            let s = lb_three_halves(m).unwrap();
            let opt = opt_bounds(
                &s,
                &OracleLimits {
                    max_n: 32,
                    ..Default::default()
                },
            );
            assert!(opt.is_exact());
            assert_eq!(opt.lo, 2.0);
            let t = tail_probability(&Greedy, &s, 1.5, RomMode::exact(), &opt).unwrap();
            let expect = (m - 1) as f64 / (2 * m - 1) as f64;
            assert_eq!(t.hi, expect, "m={m}");
            assert_eq!(t.lo, expect, "m={m}");
        }
    }

    #[test]
    fn ratio_report_is_at_least_one() {
        let s = seq(3, &[1.0, 2.0, 3.0, 4.0]);
        let stats = ratio_report(&Greedy, &s, RomMode::exact(), &Default::default()).unwrap();
        let ratio = stats.ratio.unwrap();
        assert!(ratio.lo >= 1.0 - 1e-12);
        assert!(ratio.hi >= ratio.lo);
        // single job: ratio exactly 1
        let s = seq(3, &[2.0]);
        let stats = ratio_report(&Greedy, &s, RomMode::exact(), &Default::default()).unwrap();
        assert_eq!(stats.ratio.unwrap().lo, 1.0);
        assert_eq!(stats.ratio.unwrap().hi, 1.0);
    }

    #[test]
    fn oversized_exact_instances_fall_back_to_bounds() {
        let s = lb_four_thirds(20).unwrap(); // n = 77 > max_n
        let opt = opt_bounds(&s, &Default::default());
        assert!(!opt.is_exact());
        assert!(opt.lo <= opt.hi);
        assert_eq!(opt.lo, 4.0);
        assert_eq!(opt.hi, 4.0); // LPT happens to close the gap here
    }

    #[test]
    fn wilson_interval_behaves() {
        let (lo, hi) = wilson_interval(50, 100, Z95);
        assert!(lo < 0.5 && 0.5 < hi);
        let (lo, hi) = wilson_interval(0, 100, Z95);
        assert!(lo < 1e-9);
        assert!(hi < 0.05);
        let (lo, hi) = wilson_interval(100, 100, Z95);
        assert!(lo > 0.95);
        assert!(hi > 0.999 && hi <= 1.0);
    }

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499_500.0);
    }
}
