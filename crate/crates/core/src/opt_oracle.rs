//! Optimum-makespan machinery: a certified lower bound, an LPT upper bound,
//! and exact optimum search by depth-first branch-and-bound for desk-scale
//! instances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Job, JobSequence, ScheduleState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptKind {
    Exact,
    LowerBound,
    UpperBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub value: f64,
    pub kind: OptKind,
    pub node_count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleLimits {
    pub max_n: usize,
    pub node_budget: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_n: 24,
            node_budget: 50_000_000,
        }
    }
}

/// `max(L, p_max, 2 P_{m+1})`: the average load, the largest job, and twice
/// the (m+1)-st largest job are all certified lower bounds on the optimum.
pub fn opt_lower_bound(seq: &JobSequence) -> f64 {
    let stats = seq.stats();
    stats
        .l
        .max(stats.p_max)
        .max(2.0 * stats.p(seq.m() + 1))
}

/// Makespan of longest-processing-time-first list scheduling; an upper bound
/// on the optimum and the incumbent seed for the exact search.
pub fn lpt_upper_bound(seq: &JobSequence) -> f64 {
    let mut order: Vec<&Job> = seq.jobs().iter().collect();
    order.sort_by(|a, b| b.p.partial_cmp(&a.p).unwrap().then(a.id.cmp(&b.id)));
    let mut state = ScheduleState::new(seq.m()).expect("valid machine count");
    for job in order {
        state.assign(seq.m(), job).expect("rank m is always valid");
    }
    state.makespan()
}

trait Load:
    Copy + PartialOrd + std::ops::Add<Output = Self> + std::ops::Sub<Output = Self>
{
    const ZERO: Self;
    /// The gap-capacity prune needs exact arithmetic; it stays off for the
    /// float fallback, whose comparisons are only ulp-accurate.
    const USE_CAPACITY: bool;
    /// Largest value a strict improvement over `best` may reach: one step
    /// below in the integers, `best` itself in the reals.
    fn refute_target(best: Self) -> Self;
}

impl Load for f64 {
    const ZERO: f64 = 0.0;
    const USE_CAPACITY: bool = false;
    fn refute_target(best: f64) -> f64 {
        best
    }
}

impl Load for u64 {
    const ZERO: u64 = 0;
    const USE_CAPACITY: bool = true;
    fn refute_target(best: u64) -> u64 {
        best - 1
    }
}

/// Depth-first search over machine choices for jobs in non-increasing size
/// order. Two dominance rules keep the tree small, both justified by the
/// lexicographically smallest optimal assignment vector: at any node only
/// the lowest-index machine of each load value is branched on, and a job
/// equal to its predecessor never goes on a lower machine index than the
/// predecessor did.
struct Search<T: Load> {
    jobs: Vec<T>,
    /// suffix_total[i] = total size of jobs[i..].
    suffix_total: Vec<T>,
    /// Smallest job overall (jobs are sorted, so also the smallest left).
    p_min: T,
    m: usize,
    loads: Vec<T>,
    best: T,
    global_lb: T,
    nodes: u64,
    budget: u64,
    exhausted: bool,
    done: bool,
}

impl<T: Load> Search<T> {
    fn record(&mut self, makespan: T) {
        if makespan < self.best {
            self.best = makespan;
            if !(self.best > self.global_lb) {
                self.done = true;
            }
        }
    }

    fn dfs(&mut self, idx: usize, current_max: T, floor: usize) {
        if self.exhausted || self.done {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return;
        }
        if idx == self.jobs.len() {
            self.record(current_max);
            return;
        }
        if !(current_max < self.best) {
            return;
        }
        let p = self.jobs[idx];
        // the machine receiving the next job ends at least at min_load + p,
        // and the remaining volume must fit into the gaps under the target
        // load; gaps too small for the smallest remaining job are dead
        let target = T::refute_target(self.best);
        let mut min_load = self.loads[0];
        let mut usable = T::ZERO;
        for &load in &self.loads {
            if load < min_load {
                min_load = load;
            }
            if T::USE_CAPACITY && !(load + self.p_min > target) {
                usable = usable + (target - load);
            }
        }
        if !(min_load + p < self.best) {
            return;
        }
        if T::USE_CAPACITY && self.suffix_total[idx] > usable {
            return;
        }
        // the last job goes on the least loaded machine it may use
        if idx + 1 == self.jobs.len() {
            let mut least = None;
            for &load in &self.loads[floor..] {
                if least.map_or(true, |l| load < l) {
                    least = Some(load);
                }
            }
            if let Some(least) = least {
                let landed = least + p;
                self.record(if landed > current_max { landed } else { current_max });
            }
            return;
        }
        let mut order: Vec<usize> = (0..self.m).collect();
        order.sort_by(|&a, &b| {
            self.loads[a]
                .partial_cmp(&self.loads[b])
                .unwrap()
                .then(a.cmp(&b))
        });
        let same_as_next = idx + 1 < self.jobs.len() && !(self.jobs[idx + 1] < p);
        let mut last_tried: Option<T> = None;
        for &machine in &order {
            if machine < floor {
                continue;
            }
            let load = self.loads[machine];
            if last_tried == Some(load) {
                continue;
            }
            last_tried = Some(load);
            let new_load = load + p;
            let new_max = if new_load > current_max { new_load } else { current_max };
            if !(new_max < self.best) {
                continue;
            }
            self.loads[machine] = new_load;
            let next_floor = if same_as_next { machine } else { 0 };
            self.dfs(idx + 1, new_max, next_floor);
            self.loads[machine] = load;
            if self.exhausted || self.done {
                return;
            }
        }
    }
}

/// Smallest power-of-two scale mapping every processing time to an exact
/// 64-bit integer, when one exists. Sums of such inputs are exact in either
/// representation, so the integer search returns bit-identical optima, and
/// minimality makes the ceiling of the volume bound as sharp as possible.
fn dyadic_ints(jobs: &[f64]) -> Option<(Vec<u64>, f64)> {
    let limit = (1u64 << 40) as f64;
    let mut scale = 1.0_f64;
    for &p in jobs {
        while (p * scale).fract() != 0.0 {
            scale *= 2.0;
            if scale > limit {
                return None;
            }
        }
    }
    let ints = jobs
        .iter()
        .map(|&p| {
            let scaled = p * scale;
            if scaled <= limit {
                Some(scaled as u64)
            } else {
                None
            }
        })
        .collect::<Option<Vec<u64>>>()?;
    Some((ints, scale))
}

/// Exact minimum makespan by branch-and-bound. Jobs are considered in
/// non-increasing size order; the LPT schedule seeds the incumbent; nodes
/// are pruned by the incumbent, the certified lower bound, and symmetry over
/// machines with identical load. If the node budget runs out the best
/// incumbent is returned as an upper bound.
pub fn exact_opt(seq: &JobSequence, limits: &OracleLimits) -> Result<OptResult> {
    let n = seq.n();
    if n > limits.max_n {
        return Err(Error::InstanceTooLarge {
            n,
            max_n: limits.max_n,
        });
    }
    let m = seq.m();
    let mut jobs = seq.processing_times();
    jobs.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
    let incumbent = lpt_upper_bound(seq);
    let global_lb = opt_lower_bound(seq);
    if incumbent <= global_lb {
        return Ok(OptResult {
            value: incumbent,
            kind: OptKind::Exact,
            node_count: 0,
        });
    }

    // integer fast path: sums are exact in both representations, and the
    // ceiling of the volume bound often meets the optimum, which lets the
    // search stop at the first optimal incumbent instead of refuting
    if let Some((ints, scale)) = dyadic_ints(&jobs) {
        let total: u64 = ints.iter().sum();
        let int_lb = total
            .div_ceil(m as u64)
            .max(ints[0])
            .max(if n > m { 2 * ints[m] } else { 0 });
        let mut suffix_total = vec![0u64; n + 1];
        for i in (0..n).rev() {
            suffix_total[i] = suffix_total[i + 1] + ints[i];
        }
        let p_min = *ints.last().expect("n >= 1");
        let mut search = Search::<u64> {
            jobs: ints,
            suffix_total,
            p_min,
            m,
            loads: vec![0; m],
            best: (incumbent * scale).round() as u64,
            global_lb: int_lb,
            nodes: 0,
            budget: limits.node_budget,
            exhausted: false,
            done: false,
        };
        search.dfs(0, 0, 0);
        return Ok(OptResult {
            value: search.best as f64 / scale,
            kind: if search.exhausted {
                OptKind::UpperBound
            } else {
                OptKind::Exact
            },
            node_count: search.nodes,
        });
    }

    let p_min = *jobs.last().expect("n >= 1");
    let mut search = Search::<f64> {
        jobs,
        suffix_total: Vec::new(),
        p_min,
        m,
        loads: vec![0.0; m],
        best: incumbent,
        global_lb,
        nodes: 0,
        budget: limits.node_budget,
        exhausted: false,
        done: false,
    };
    search.dfs(0, 0.0, 0);
    Ok(OptResult {
        value: search.best,
        kind: if search.exhausted {
            OptKind::UpperBound
        } else {
            OptKind::Exact
        },
        node_count: search.nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(m: usize, times: &[f64]) -> JobSequence {
        JobSequence::from_times(m, times).unwrap()
    }

    /// Independent oracle: full m^n enumeration, no pruning.
    fn brute_force_opt(s: &JobSequence) -> f64 {
        fn rec(jobs: &[f64], loads: &mut [f64]) -> f64 {
            match jobs.split_first() {
                None => loads.iter().cloned().fold(0.0, f64::max),
                Some((&p, rest)) => {
                    let mut best = f64::INFINITY;
                    for i in 0..loads.len() {
                        loads[i] += p;
                        best = best.min(rec(rest, loads));
                        loads[i] -= p;
                    }
                    best
                }
            }
        }
        let times = s.processing_times();
        rec(&times, &mut vec![0.0; s.m()])
    }

    #[test]
    fn lower_bound_examples() {
        assert_eq!(opt_lower_bound(&seq(2, &[3.0, 3.0, 3.0])), 6.0);
        assert_eq!(opt_lower_bound(&seq(3, &[5.0])), 5.0);
        // m+1 equal jobs force two on one machine
        let s = seq(4, &[2.0; 5]);
        assert_eq!(opt_lower_bound(&s), 4.0);
        assert_eq!(exact_opt(&s, &Default::default()).unwrap().value, 4.0);
    }

    #[test]
    fn lpt_examples() {
        // the classic instance where LPT is suboptimal: {3,2,2} vs {3,2},
        // makespan 7 against the optimum 6
        let s = seq(2, &[3.0, 3.0, 2.0, 2.0, 2.0]);
        assert_eq!(lpt_upper_bound(&s), 7.0);
        assert_eq!(exact_opt(&s, &Default::default()).unwrap().value, 6.0);
        assert_eq!(lpt_upper_bound(&seq(3, &[4.5])), 4.5);
        assert_eq!(lpt_upper_bound(&seq(5, &[1.0, 2.0, 3.0])), 3.0);
    }

    #[test]
    fn exact_examples() {
        assert_eq!(
            exact_opt(&seq(2, &[4.0, 1.0, 1.0, 1.0, 1.0]), &Default::default())
                .unwrap()
                .value,
            4.0
        );
        assert_eq!(
            exact_opt(&seq(2, &[3.0, 3.0, 3.0]), &Default::default())
                .unwrap()
                .value,
            6.0
        );
    }

    #[test]
    fn exact_handles_the_four_thirds_family() {
        // 4m-4 unit jobs plus one job of size 4: optimum 4
        let s = crate::generators::lb_four_thirds(8).unwrap();
        let r = exact_opt(&s, &OracleLimits { max_n: 32, ..Default::default() }).unwrap();
        assert_eq!(r.kind, OptKind::Exact);
        assert_eq!(r.value, 4.0);
    }

    #[test]
    fn rejects_oversized_instances() {
        let s = seq(2, &[1.0; 25]);
        assert!(matches!(
            exact_opt(&s, &Default::default()),
            Err(Error::InstanceTooLarge { n: 25, max_n: 24 })
        ));
    }

    #[test]
    fn budget_exhaustion_degrades_to_upper_bound() {
        let times: Vec<f64> = (0..14).map(|i| 1.0 + (i as f64) * 0.37).collect();
        let s = seq(4, &times);
        let r = exact_opt(
            &s,
            &OracleLimits {
                max_n: 24,
                node_budget: 3,
            },
        )
        .unwrap();
        assert_eq!(r.kind, OptKind::UpperBound);
        assert!(r.value >= exact_opt(&s, &Default::default()).unwrap().value);
    }

    #[test]
    fn matches_brute_force_on_small_instances() {
        let mut state = 42u64;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for round in 0..60 {
            let m = 2 + round % 4;
            let n = 2 + (round * 7) % 8;
            let times: Vec<f64> = (0..n).map(|_| (next() * 8.0).round() / 4.0 + 0.25).collect();
            let s = seq(m, &times);
            let exact = exact_opt(&s, &Default::default()).unwrap();
            assert_eq!(exact.kind, OptKind::Exact);
            let brute = brute_force_opt(&s);
            assert_eq!(exact.value, brute, "m={m} jobs={times:?}");
        }
    }

    #[test]
    fn bound_sandwich_and_permutation_invariance() {
        let mut state = 7u64;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for round in 0..40 {
            let m = 2 + round % 5;
            let n = 3 + (round * 5) % 14;
            let times: Vec<f64> = (0..n).map(|_| next() * 3.0 + 0.1).collect();
            let s = seq(m, &times);
            let lb = opt_lower_bound(&s);
            let ub = lpt_upper_bound(&s);
            let opt = exact_opt(&s, &Default::default()).unwrap().value;
            assert!(lb <= opt + 1e-12);
            assert!(opt <= ub + 1e-12);
            // classic LPT guarantee
            assert!(ub <= (4.0 / 3.0 - 1.0 / (3.0 * m as f64)) * opt + 1e-9);

            let rev: Vec<usize> = (0..n).rev().collect();
            let permuted = s.permuted_by(&rev).unwrap();
            assert_eq!(exact_opt(&permuted, &Default::default()).unwrap().value, opt);
        }
    }
}
