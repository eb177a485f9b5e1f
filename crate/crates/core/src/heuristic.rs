//! Upper-bound heuristics: NEH construction and a first-improvement
//! insertion local search.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::instance::{Instance, Job, Schedule, Time};

/// Limits for [`insertion_local_search`]. At least one should be set; with
/// neither the search runs until a local optimum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchBudget {
    /// Passes over the permutation.
    pub max_iterations: Option<u64>,
    pub time: Option<Duration>,
}

impl SearchBudget {
    pub fn iterations(n: u64) -> Self {
        SearchBudget {
            max_iterations: Some(n),
            time: None,
        }
    }

    pub fn time(limit: Duration) -> Self {
        SearchBudget {
            max_iterations: None,
            time: Some(limit),
        }
    }
}

/// Makespans of inserting `job` at each position `0..=seq.len()` of `seq`,
/// in `O(|seq| m)` using head and tail completion tables.
pub fn insertion_makespans(inst: &Instance, seq: &[Job], job: Job) -> Vec<Time> {
    let (k, m) = (seq.len(), inst.machines());
    // head[i][j]: completion of the first i jobs on machine j
    let mut head = vec![0 as Time; (k + 1) * m];
    for i in 1..=k {
        let row = inst.row(seq[i - 1] as usize);
        for j in 0..m {
            let up = if j > 0 { head[i * m + j - 1] } else { 0 };
            head[i * m + j] = up.max(head[(i - 1) * m + j]) + row[j] as Time;
        }
    }
    // tail[i][j]: time from the start of job i on machine j to the end,
    // for the jobs i..k
    let mut tail = vec![0 as Time; (k + 1) * m];
    for i in (0..k).rev() {
        let row = inst.row(seq[i] as usize);
        for j in (0..m).rev() {
            let down = if j + 1 < m { tail[i * m + j + 1] } else { 0 };
            tail[i * m + j] = down.max(tail[(i + 1) * m + j]) + row[j] as Time;
        }
    }
    let p = inst.row(job as usize);
    let mut out = Vec::with_capacity(k + 1);
    let mut f = vec![0 as Time; m];
    for pos in 0..=k {
        let mut cmax = 0;
        for j in 0..m {
            let up = if j > 0 { f[j - 1] } else { 0 };
            f[j] = up.max(head[pos * m + j]) + p[j] as Time;
            cmax = cmax.max(f[j] + tail[pos * m + j]);
        }
        out.push(cmax);
    }
    out
}

/// Jobs by decreasing total processing time (ties to the lower index), each
/// inserted at the earliest position minimizing the partial makespan.
pub fn neh(inst: &Instance) -> Schedule {
    let n = inst.jobs();
    let mut order: Vec<Job> = (0..n as Job).collect();
    let total = |j: Job| inst.row(j as usize).iter().map(|&p| p as Time).sum::<Time>();
    order.sort_by(|&a, &b| total(b).cmp(&total(a)).then(a.cmp(&b)));
    let mut seq: Vec<Job> = Vec::with_capacity(n);
    for job in order {
        let costs = insertion_makespans(inst, &seq, job);
        let best = costs.iter().copied().min().unwrap_or(0);
        let pos = costs.iter().position(|&c| c == best).unwrap_or(0);
        seq.insert(pos, job);
    }
    let cmax = inst.makespan_unchecked(&seq);
    Schedule {
        perm: seq,
        cmax: Some(cmax),
    }
}

/// Remove-and-reinsert hill climbing. Each pass visits the jobs in
/// permutation order, starting at a rotation drawn from `rng_seed`; a job
/// moves only when a position strictly improves the makespan, ties between
/// equally good positions being broken at random. Stops at a local optimum
/// or when the budget runs out. Never returns a worse schedule.
pub fn insertion_local_search(
    inst: &Instance,
    seed: &Schedule,
    budget: SearchBudget,
    rng_seed: u64,
) -> Schedule {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut perm = seed.perm.clone();
    let mut cmax = inst.makespan_unchecked(&perm);
    let n = perm.len();
    if n < 2 {
        return Schedule {
            perm,
            cmax: Some(cmax),
        };
    }
    let mut passes = 0u64;
    loop {
        if budget.max_iterations.is_some_and(|max| passes >= max) {
            break;
        }
        passes += 1;
        let jobs: Vec<Job> = {
            let r = rng.gen_range(0..n);
            perm[r..].iter().chain(&perm[..r]).copied().collect()
        };
        let mut improved = false;
        for job in jobs {
            if budget.time.is_some_and(|t| started.elapsed() >= t) {
                return Schedule {
                    perm,
                    cmax: Some(cmax),
                };
            }
            let from = perm.iter().position(|&j| j == job).expect("job in permutation");
            perm.remove(from);
            let costs = insertion_makespans(inst, &perm, job);
            let best = *costs.iter().min().expect("at least one position");
            if best < cmax {
                let ties: Vec<usize> = (0..costs.len()).filter(|&i| costs[i] == best).collect();
                let pos = *ties.choose(&mut rng).expect("non-empty");
                perm.insert(pos, job);
                cmax = best;
                improved = true;
            } else {
                perm.insert(from, job);
            }
        }
        if !improved {
            break;
        }
    }
    Schedule {
        perm,
        cmax: Some(cmax),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_jobs() -> Instance {
        Instance::from_rows(vec![vec![2, 3], vec![4, 1]], "two").unwrap()
    }

    #[test]
    fn insertion_costs_match_full_evaluation() {
        let inst = Instance::from_rows(
            vec![vec![3, 1, 4], vec![1, 5, 9], vec![2, 6, 5], vec![3, 5, 8]],
            "small",
        )
        .unwrap();
        let seq = [2, 0, 3];
        let costs = insertion_makespans(&inst, &seq, 1);
        for (pos, &c) in costs.iter().enumerate() {
            let mut p = seq.to_vec();
            p.insert(pos, 1);
            assert_eq!(c, inst.makespan(&p).unwrap());
        }
    }

    #[test]
    fn neh_small_cases() {
        let one = Instance::from_rows(vec![vec![4, 2]], "one").unwrap();
        assert_eq!(neh(&one).perm, vec![0]);
        let s = neh(&two_jobs());
        assert_eq!(s.perm, vec![0, 1]);
        assert_eq!(s.cmax, Some(7));
    }

    #[test]
    fn local_optimum_is_fixed_point() {
        let inst = two_jobs();
        let seed = Schedule::evaluated(&inst, vec![0, 1]).unwrap();
        let out = insertion_local_search(&inst, &seed, SearchBudget::default(), 3);
        assert_eq!(out, seed);
    }

    #[test]
    fn budget_zero_returns_seed() {
        let inst = two_jobs();
        let seed = Schedule::evaluated(&inst, vec![1, 0]).unwrap();
        let out = insertion_local_search(&inst, &seed, SearchBudget::iterations(0), 3);
        assert_eq!(out, seed);
        let out = insertion_local_search(&inst, &seed, SearchBudget::iterations(1), 3);
        assert_eq!(out.cmax, Some(7));
    }
}
