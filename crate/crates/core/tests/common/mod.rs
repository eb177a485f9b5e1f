#![allow(dead_code)]

use pfsp_core::instance::{Instance, Job, Time};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_instance(rng: &mut impl Rng, n: usize, m: usize) -> Instance {
    let rows = (0..n)
        .map(|_| (0..m).map(|_| rng.gen_range(1..=99)).collect())
        .collect();
    Instance::from_rows(rows, "random").unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Heap's algorithm over all permutations of `items`.
pub fn for_each_permutation(items: &mut [Job], mut visit: impl FnMut(&[Job])) {
    let n = items.len();
    let mut c = vec![0usize; n];
    visit(items);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(c[i], i);
            }
            visit(items);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Completion-time table evaluated from scratch, independent of the crate.
pub fn makespan_oracle(inst: &Instance, perm: &[Job]) -> Time {
    let m = inst.machines();
    let mut c = vec![vec![0u64; m]; perm.len()];
    for (pos, &j) in perm.iter().enumerate() {
        for k in 0..m {
            let above = if k > 0 { c[pos][k - 1] } else { 0 };
            let left = if pos > 0 { c[pos - 1][k] } else { 0 };
            c[pos][k] = above.max(left) + inst.time(j as usize, k) as u64;
        }
    }
    c.last().map(|r| r[m - 1]).unwrap_or(0)
}

pub fn brute_force(inst: &Instance) -> (Time, Vec<Job>) {
    let mut items: Vec<Job> = (0..inst.jobs() as Job).collect();
    let mut best = (Time::MAX, Vec::new());
    for_each_permutation(&mut items, |p| {
        let c = makespan_oracle(inst, p);
        if c < best.0 {
            best = (c, p.to_vec());
        }
    });
    best
}

/// Minimum makespan over all completions of a prefix/suffix pair.
pub fn best_completion(inst: &Instance, prefix: &[Job], free: &[Job], suffix: &[Job]) -> (Time, Time) {
    let mut free = free.to_vec();
    let mut lo = Time::MAX;
    let mut hi = 0;
    for_each_permutation(&mut free, |mid| {
        let perm: Vec<Job> = prefix.iter().chain(mid).chain(suffix).copied().collect();
        let c = makespan_oracle(inst, &perm);
        lo = lo.min(c);
        hi = hi.max(c);
    });
    (lo, hi)
}
