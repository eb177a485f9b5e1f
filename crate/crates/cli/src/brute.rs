//! Exhaustive enumeration, the reference oracle for small instances.

use pfsp_core::instance::{Instance, Job, Time};

pub const MAX_JOBS: usize = 10;

/// Minimum makespan over all `n!` schedules and the first permutation (in
/// lexicographic order) attaining it. Shares completion times along common
/// prefixes, so each schedule costs `O(m)`.
pub fn brute_force(inst: &Instance) -> (Time, Vec<Job>) {
    let (n, m) = (inst.jobs(), inst.machines());
    let mut front = vec![0 as Time; (n + 1) * m];
    let mut used = vec![false; n];
    let mut perm = Vec::with_capacity(n);
    let mut best = (Time::MAX, Vec::new());
    descend(inst, m, &mut front, &mut used, &mut perm, &mut best);
    best
}

fn descend(
    inst: &Instance,
    m: usize,
    front: &mut [Time],
    used: &mut [bool],
    perm: &mut Vec<Job>,
    best: &mut (Time, Vec<Job>),
) {
    let depth = perm.len();
    if depth == used.len() {
        let cmax = front[depth * m + m - 1];
        if cmax < best.0 {
            *best = (cmax, perm.clone());
        }
        return;
    }
    for j in 0..used.len() {
        if used[j] {
            continue;
        }
        let row = inst.row(j);
        let (done, next) = front.split_at_mut((depth + 1) * m);
        let prev = &done[depth * m..];
        let mut left = 0;
        for k in 0..m {
            left = left.max(prev[k]) + row[k] as Time;
            next[k] = left;
        }
        used[j] = true;
        perm.push(j as Job);
        descend(inst, m, front, used, perm, best);
        perm.pop();
        used[j] = false;
    }
}
