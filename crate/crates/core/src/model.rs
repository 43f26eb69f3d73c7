//! Core data model: jobs, job sequences, schedule state with a maintained
//! sorted-load order, and the running prefix statistics a scheduler can
//! legally see while jobs arrive online.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A job: its position in the original input order and its processing time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub id: usize,
    pub p: f64,
}

impl Job {
    pub fn new(id: usize, p: f64) -> Result<Self> {
        validate_processing_time(p)?;
        Ok(Job { id, p })
    }
}

pub(crate) fn validate_processing_time(p: f64) -> Result<()> {
    if !p.is_finite() || p < 0.0 {
        return Err(Error::InvalidProcessingTime(p));
    }
    Ok(())
}

/// Non-negative finite floats order the same as their bit patterns.
fn order_bits(p: f64) -> u64 {
    if p == 0.0 {
        0
    } else {
        p.to_bits()
    }
}

/// Jobs in arrival order plus the machine count they are meant for.
///
/// Job ids always form the set `{0, .., n-1}`; a permuted sequence keeps the
/// original ids, so quantities defined on the base input (the set of the j
/// largest jobs, the average load L) are identical for every permutation.
#[derive(Debug, Clone, PartialEq)]
pub struct JobSequence {
    m: usize,
    jobs: Vec<Job>,
}

#[derive(Serialize, Deserialize)]
struct JobSequenceFile {
    m: usize,
    processing_times: Vec<f64>,
}

impl JobSequence {
    /// Build a base sequence: job `t` gets id `t`.
    pub fn from_times(m: usize, times: &[f64]) -> Result<Self> {
        let jobs = times
            .iter()
            .enumerate()
            .map(|(id, &p)| Job::new(id, p))
            .collect::<Result<Vec<_>>>()?;
        Self::from_jobs(m, jobs)
    }

    /// Build a sequence from explicit jobs, e.g. a permuted order.
    pub fn from_jobs(m: usize, jobs: Vec<Job>) -> Result<Self> {
        if m == 0 {
            return Err(Error::BadMachineCount { m, min: 1 });
        }
        if jobs.is_empty() {
            return Err(Error::EmptySequence);
        }
        let n = jobs.len();
        let mut seen = vec![false; n];
        for job in &jobs {
            validate_processing_time(job.p)?;
            if job.id >= n || seen[job.id] {
                return Err(Error::BadJobIds);
            }
            seen[job.id] = true;
        }
        Ok(JobSequence { m, jobs })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.jobs.len()
    }

    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    pub fn processing_times(&self) -> Vec<f64> {
        self.jobs.iter().map(|j| j.p).collect()
    }

    /// Reorder by `perm`: position `t` of the result holds job `perm[t]`.
    pub fn permuted_by(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        if perm.len() != n {
            return Err(Error::BadPermutation);
        }
        let mut seen = vec![false; n];
        let mut jobs = Vec::with_capacity(n);
        for &src in perm {
            if src >= n || seen[src] {
                return Err(Error::BadPermutation);
            }
            seen[src] = true;
            jobs.push(self.jobs[src]);
        }
        Ok(JobSequence { m: self.m, jobs })
    }

    /// Whole-sequence statistics (identical for every permutation).
    pub fn stats(&self) -> SequenceStats {
        // L is accumulated in ascending id order so that permutations of the
        // same input agree bit for bit.
        let mut by_id: Vec<(usize, f64)> = self.jobs.iter().map(|j| (j.id, j.p)).collect();
        by_id.sort_unstable_by_key(|&(id, _)| id);
        let total: f64 = by_id.iter().map(|&(_, p)| p).sum();
        let mut sorted_desc: Vec<f64> = by_id.iter().map(|&(_, p)| p).collect();
        sorted_desc.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
        let l = total / self.m as f64;
        let p_max = sorted_desc[0];
        let r = if p_max > 0.0 {
            Some((l / p_max).min(p_max / l))
        } else {
            None
        };
        SequenceStats {
            l,
            p_max,
            sorted_desc,
            r,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&JobSequenceFile {
            m: self.m,
            processing_times: self.processing_times(),
        })
        .expect("serializing a job sequence cannot fail")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: JobSequenceFile =
            serde_json::from_str(s).map_err(|e| Error::InvalidInput(e.to_string()))?;
        Self::from_times(file.m, &file.processing_times)
            .map_err(|e| Error::InvalidInput(e.to_string()))
    }

    /// CSV form: a `# m=<count>` line, an `id,p` header, one row per job.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# m={}\nid,p\n", self.m);
        for job in &self.jobs {
            out.push_str(&format!("{},{}\n", job.id, job.p));
        }
        out
    }

    pub fn from_csv_str(s: &str) -> Result<Self> {
        let mut m: Option<usize> = None;
        let mut times = Vec::new();
        let mut saw_header = false;
        for (lineno, raw) in s.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(v) = rest.strip_prefix("m=") {
                    m = Some(v.trim().parse().map_err(|_| {
                        Error::InvalidInput(format!("bad machine count on line {}", lineno + 1))
                    })?);
                }
                continue;
            }
            if !saw_header {
                if line != "id,p" {
                    return Err(Error::InvalidInput(format!(
                        "expected header 'id,p', got '{line}'"
                    )));
                }
                saw_header = true;
                continue;
            }
            let (id_s, p_s) = line.split_once(',').ok_or_else(|| {
                Error::InvalidInput(format!("expected 'id,p' row on line {}", lineno + 1))
            })?;
            let id: usize = id_s.trim().parse().map_err(|_| {
                Error::InvalidInput(format!("bad id on line {}", lineno + 1))
            })?;
            if id != times.len() {
                return Err(Error::InvalidInput(format!(
                    "ids must be consecutive from 0; got {id} on line {}",
                    lineno + 1
                )));
            }
            let p: f64 = p_s.trim().parse().map_err(|_| {
                Error::InvalidInput(format!("bad processing time on line {}", lineno + 1))
            })?;
            validate_processing_time(p).map_err(|e| Error::InvalidInput(e.to_string()))?;
            times.push(p);
        }
        let m = m.ok_or_else(|| Error::InvalidInput("missing '# m=<count>' line".into()))?;
        Self::from_times(m, &times).map_err(|e| Error::InvalidInput(e.to_string()))
    }
}

/// Whole-sequence statistics: average load `L`, the largest processing time,
/// the descending multiset of sizes, and `R = min(L/p_max, p_max/L)`.
#[derive(Debug, Clone)]
pub struct SequenceStats {
    pub l: f64,
    pub p_max: f64,
    sorted_desc: Vec<f64>,
    /// `None` when every job is zero.
    pub r: Option<f64>,
}

impl SequenceStats {
    /// Processing time of the j-th largest job (1-based); 0 when j > n.
    pub fn p(&self, j: usize) -> f64 {
        assert!(j >= 1, "ranks are 1-based");
        self.sorted_desc.get(j - 1).copied().unwrap_or(0.0)
    }

    pub fn sorted_desc(&self) -> &[f64] {
        &self.sorted_desc
    }
}

/// `R(J) = min(L/p_max, p_max/L)`; errors on an all-zero sequence.
pub fn ratio_r(seq: &JobSequence) -> Result<f64> {
    seq.stats().r.ok_or(Error::DegenerateAllZero)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Plainness {
    Plain,
    Proper,
}

impl Plainness {
    pub fn is_proper(self) -> bool {
        self == Plainness::Proper
    }
}

/// A sequence is plain when `n <= m` or `R(J) <= c - 1`; the classification
/// does not depend on the order of the jobs. All-zero sequences count as
/// plain (R is undefined but such inputs are trivially scheduled).
pub fn classify_plain(seq: &JobSequence, c: f64) -> Plainness {
    if seq.n() <= seq.m() {
        return Plainness::Plain;
    }
    match seq.stats().r {
        None => Plainness::Plain,
        Some(r) => {
            if r <= c - 1.0 {
                Plainness::Plain
            } else {
                Plainness::Proper
            }
        }
    }
}

/// Per-machine loads with a maintained non-increasing order.
///
/// Machines with equal load are ordered by ascending machine id, so every
/// rank lookup, tie-break, and replay is deterministic. Rank 1 is the most
/// loaded machine, rank m the least loaded.
#[derive(Debug, Clone)]
pub struct ScheduleState {
    m: usize,
    loads: Vec<f64>,
    order: Vec<usize>,
    assignment: Vec<(usize, usize)>,
    total: f64,
}

impl ScheduleState {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::BadMachineCount { m, min: 1 });
        }
        Ok(ScheduleState {
            m,
            loads: vec![0.0; m],
            order: (0..m).collect(),
            assignment: Vec::new(),
            total: 0.0,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of jobs placed so far.
    pub fn jobs_placed(&self) -> usize {
        self.assignment.len()
    }

    /// Loads by machine id (not by rank).
    pub fn loads(&self) -> &[f64] {
        &self.loads
    }

    /// Loads in rank order: `sorted_loads()[j-1]` is the load at rank j.
    pub fn sorted_loads(&self) -> Vec<f64> {
        self.order.iter().map(|&mp| self.loads[mp]).collect()
    }

    pub fn load_at_rank(&self, rank: usize) -> Result<f64> {
        self.machine_at_rank(rank).map(|mp| self.loads[mp])
    }

    pub fn machine_at_rank(&self, rank: usize) -> Result<usize> {
        if rank == 0 || rank > self.m {
            return Err(Error::RankOutOfRange { rank, m: self.m });
        }
        Ok(self.order[rank - 1])
    }

    /// Average load of the `m - j + 1` least loaded machines.
    pub fn suffix_average(&self, j: usize) -> Result<f64> {
        if j == 0 || j > self.m {
            return Err(Error::RankOutOfRange { rank: j, m: self.m });
        }
        let tail = &self.order[j - 1..];
        let sum: f64 = tail.iter().map(|&mp| self.loads[mp]).sum();
        Ok(sum / tail.len() as f64)
    }

    pub fn makespan(&self) -> f64 {
        self.loads[self.order[0]]
    }

    pub fn min_load(&self) -> f64 {
        self.loads[self.order[self.m - 1]]
    }

    /// Total processing time assigned so far, accumulated in placement order.
    pub fn total_assigned(&self) -> f64 {
        self.total
    }

    /// `(job id, machine id)` pairs in placement order.
    pub fn assignment(&self) -> &[(usize, usize)] {
        &self.assignment
    }

    /// Place `job` on the machine currently at `rank` and re-establish the
    /// sorted order.
    pub fn assign(&mut self, rank: usize, job: &Job) -> Result<()> {
        validate_processing_time(job.p)?;
        let machine = self.machine_at_rank(rank)?;
        self.loads[machine] += job.p;
        self.total += job.p;
        self.assignment.push((job.id, machine));

        // The updated machine only moves toward rank 1. Find its new slot
        // among the machines ahead of it and rotate it into place.
        let idx = rank - 1;
        let load = self.loads[machine];
        let dest = self.order[..idx].partition_point(|&other| {
            self.loads[other] > load || (self.loads[other] == load && other < machine)
        });
        self.order[dest..=idx].rotate_right(1);
        Ok(())
    }
}

/// Running statistics over the jobs revealed so far, updated *before* each
/// placement so that the certified lower bound already covers the incoming
/// job.
#[derive(Debug, Clone)]
pub struct PrefixStats {
    m: usize,
    t: usize,
    total: f64,
    p_max: f64,
    top: BinaryHeap<Reverse<u64>>,
}

impl PrefixStats {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::BadMachineCount { m, min: 1 });
        }
        Ok(PrefixStats {
            m,
            t: 0,
            total: 0.0,
            p_max: 0.0,
            top: BinaryHeap::with_capacity(m + 2),
        })
    }

    /// Account for the next arriving job.
    pub fn observe(&mut self, job: &Job) -> Result<()> {
        validate_processing_time(job.p)?;
        self.t += 1;
        self.total += job.p;
        if job.p > self.p_max {
            self.p_max = job.p;
        }
        self.top.push(Reverse(order_bits(job.p)));
        if self.top.len() > self.m + 1 {
            self.top.pop();
        }
        Ok(())
    }

    /// Jobs seen so far.
    pub fn t(&self) -> usize {
        self.t
    }

    /// Average load `L^t = (1/m) * sum of the first t processing times`.
    pub fn l_avg(&self) -> f64 {
        self.total / self.m as f64
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    /// Processing time of the (m+1)-st largest job seen so far; 0 while
    /// fewer than m+1 jobs have arrived.
    pub fn p_m_plus_1(&self) -> f64 {
        if self.top.len() == self.m + 1 {
            f64::from_bits(self.top.peek().expect("non-empty").0)
        } else {
            0.0
        }
    }

    /// The up-to-(m+1) largest processing times seen so far, descending.
    pub fn top_jobs(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.top.iter().map(|r| f64::from_bits(r.0)).collect();
        v.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
        v
    }

    /// The certified lower bound `O^t = max(L^t, p_max^t, 2 P_{m+1}^t)` on
    /// the optimum makespan of the jobs seen so far (and hence of the whole
    /// input).
    pub fn lower_bound(&self) -> f64 {
        self.l_avg().max(self.p_max).max(2.0 * self.p_m_plus_1())
    }
}
