//! One-machine lower bound, incremental child evaluation and the MinMin
//! branching rule.
//!
//! A subproblem fixes a prefix `sigma1` and a suffix `sigma2`; the bound is
//! `max_k front[k] + remain[k] + tail[k]` where `front` is the completion
//! front of the prefix, `tail` the time-to-finish of the suffix (computed by
//! scheduling it backwards on reversed machines) and `remain` the free
//! workload per machine.
//!
//! Nodes with a single free job have exactly one completion. They are
//! bounded by that completion's makespan, which keeps the bound exact on the
//! last tree level and lets the search treat them as leaves.

use crate::error::{Error, Result};
use crate::instance::{check_permutation, extend_front, Duration, Instance, Job, Time};

/// Which end of the partial schedule receives the next job.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Direction {
    #[default]
    Forward,
    Backward,
}

/// `[perm, d1, d2]`: `perm[..d1]` is the prefix, `perm[n - d2..]` the suffix,
/// the middle holds the free jobs in no particular order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subproblem {
    pub perm: Vec<Job>,
    pub d1: usize,
    pub d2: usize,
}

impl Subproblem {
    pub fn root(n: usize) -> Self {
        Subproblem {
            perm: (0..n as Job).collect(),
            d1: 0,
            d2: 0,
        }
    }

    pub fn new(perm: Vec<Job>, d1: usize, d2: usize) -> Result<Self> {
        let sub = Subproblem { perm, d1, d2 };
        sub.validate(sub.perm.len())?;
        Ok(sub)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        check_permutation(&self.perm, n)
            .map_err(|e| Error::InvalidSubproblem(e.to_string()))?;
        if self.d1 + self.d2 > n {
            return Err(Error::InvalidSubproblem(format!(
                "depths {} + {} exceed {n} jobs",
                self.d1, self.d2
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn prefix(&self) -> &[Job] {
        &self.perm[..self.d1]
    }

    pub fn suffix(&self) -> &[Job] {
        &self.perm[self.perm.len() - self.d2..]
    }

    pub fn free(&self) -> &[Job] {
        &self.perm[self.d1..self.perm.len() - self.d2]
    }

    pub fn free_count(&self) -> usize {
        self.perm.len() - self.d1 - self.d2
    }

    /// At most one free job: the node is a complete schedule.
    pub fn is_leaf(&self) -> bool {
        self.free_count() <= 1
    }

    /// Child obtained by fixing the `idx`-th free job at the given end.
    pub fn child(&self, idx: usize, dir: Direction) -> Subproblem {
        let mut perm = self.perm.clone();
        let n = perm.len();
        match dir {
            Direction::Forward => {
                let job = perm.remove(self.d1 + idx);
                perm.insert(self.d1, job);
                Subproblem {
                    perm,
                    d1: self.d1 + 1,
                    d2: self.d2,
                }
            }
            Direction::Backward => {
                let last_free = n - self.d2 - 1;
                // keep the remaining free jobs in their original order
                let job = perm.remove(self.d1 + idx);
                perm.insert(last_free, job);
                Subproblem {
                    perm,
                    d1: self.d1,
                    d2: self.d2 + 1,
                }
            }
        }
    }
}

/// Per-machine quantities shared by a node and all of its children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundTables {
    /// Completion time of the last prefix job on each machine.
    pub front: Vec<Time>,
    /// Minimal time from starting the suffix on machine `k` to the end.
    pub tail: Vec<Time>,
    /// Free workload per machine.
    pub remain: Vec<Time>,
}

/// Prepends one job to a tail in place (mirror image of `extend_front`).
#[inline]
fn extend_tail(tail: &mut [Time], row: &[Duration]) {
    let mut next = 0;
    for (t, &p) in tail.iter_mut().zip(row).rev() {
        next = next.max(*t) + p as Time;
        *t = next;
    }
}

#[inline]
fn max_sum3(a: &[Time], b: &[Time], c: &[Time]) -> Time {
    a.iter()
        .zip(b)
        .zip(c)
        .map(|((x, y), z)| x + y + z)
        .max()
        .unwrap_or(0)
}

#[inline]
fn max_sum2(a: &[Time], b: &[Time]) -> Time {
    a.iter().zip(b).map(|(x, y)| x + y).max().unwrap_or(0)
}

pub fn bound_tables(inst: &Instance, sub: &Subproblem) -> BoundTables {
    let m = inst.machines();
    let mut front = vec![0; m];
    for &j in sub.prefix() {
        extend_front(&mut front, inst.row(j as usize));
    }
    let mut tail = vec![0; m];
    for &j in sub.suffix().iter().rev() {
        extend_tail(&mut tail, inst.row(j as usize));
    }
    let mut remain = vec![0; m];
    for &j in sub.free() {
        for (r, &p) in remain.iter_mut().zip(inst.row(j as usize)) {
            *r += p as Time;
        }
    }
    BoundTables { front, tail, remain }
}

/// The four-step bound from precomputed tables.
pub fn lb1_from_tables(tables: &BoundTables) -> Time {
    max_sum3(&tables.front, &tables.remain, &tables.tail)
}

pub fn lb1(inst: &Instance, sub: &Subproblem) -> Time {
    if sub.is_leaf() {
        // the middle of perm already is the unique completion
        return inst.makespan_unchecked(&sub.perm);
    }
    lb1_from_tables(&bound_tables(inst, sub))
}

/// Bounds of all forward and backward children, indexed like `sub.free()`.
/// O(m) per child.
pub fn children_bounds(
    inst: &Instance,
    sub: &Subproblem,
    tables: &BoundTables,
) -> Result<(Vec<Time>, Vec<Time>)> {
    let free = sub.free();
    let m = inst.machines();
    let mut fwd = Vec::with_capacity(free.len());
    let mut bwd = Vec::with_capacity(free.len());
    let mut front = vec![0; m];
    let mut tail = vec![0; m];
    let mut remain = vec![0; m];

    match free.len() {
        0 => return Err(Error::NoFreeJobs),
        1 => {
            // both children are the same complete schedule
            let row = inst.row(free[0] as usize);
            front.copy_from_slice(&tables.front);
            extend_front(&mut front, row);
            fwd.push(max_sum2(&front, &tables.tail));
            tail.copy_from_slice(&tables.tail);
            extend_tail(&mut tail, row);
            bwd.push(max_sum2(&tables.front, &tail));
        }
        2 => {
            // each child has one completion
            for (idx, &j) in free.iter().enumerate() {
                let other = inst.row(free[1 - idx] as usize);
                let row = inst.row(j as usize);

                front.copy_from_slice(&tables.front);
                extend_front(&mut front, row);
                extend_front(&mut front, other);
                fwd.push(max_sum2(&front, &tables.tail));

                front.copy_from_slice(&tables.front);
                extend_front(&mut front, other);
                tail.copy_from_slice(&tables.tail);
                extend_tail(&mut tail, row);
                bwd.push(max_sum2(&front, &tail));
            }
        }
        _ => {
            for &j in free {
                let row = inst.row(j as usize);
                for ((r, &total), &p) in remain.iter_mut().zip(&tables.remain).zip(row) {
                    *r = total - p as Time;
                }
                front.copy_from_slice(&tables.front);
                extend_front(&mut front, row);
                fwd.push(max_sum3(&front, &remain, &tables.tail));

                tail.copy_from_slice(&tables.tail);
                extend_tail(&mut tail, row);
                bwd.push(max_sum3(&tables.front, &remain, &tail));
            }
        }
    }
    Ok((fwd, bwd))
}

/// The branching decision for one node plus the bounds that justified it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub direction: Direction,
    /// Bounds of the children in the chosen direction, in free-job order.
    pub child_lb: Vec<Time>,
    /// `child_lb[i] >= incumbent`.
    pub pruned: Vec<bool>,
}

impl Decomposition {
    pub fn from_bounds(fwd: Vec<Time>, bwd: Vec<Time>, incumbent: Time) -> Decomposition {
        let direction = min_min(&fwd, &bwd);
        let child_lb = match direction {
            Direction::Forward => fwd,
            Direction::Backward => bwd,
        };
        let pruned = child_lb.iter().map(|&lb| lb >= incumbent).collect();
        Decomposition {
            direction,
            child_lb,
            pruned,
        }
    }

    pub fn kept(&self) -> usize {
        self.pruned.iter().filter(|&&p| !p).count()
    }
}

/// Picks the child set in which the overall smallest bound occurs less
/// often; ties go to the larger bound sum, then to forward.
pub fn min_min(fwd: &[Time], bwd: &[Time]) -> Direction {
    let Some(&min) = fwd.iter().chain(bwd).min() else {
        return Direction::Forward;
    };
    let count = |v: &[Time]| v.iter().filter(|&&x| x == min).count();
    let (cf, cb) = (count(fwd), count(bwd));
    if cb < cf {
        return Direction::Backward;
    }
    if cf < cb {
        return Direction::Forward;
    }
    let (sf, sb): (Time, Time) = (fwd.iter().sum(), bwd.iter().sum());
    if sb > sf {
        Direction::Backward
    } else {
        Direction::Forward
    }
}

pub fn decompose(inst: &Instance, sub: &Subproblem, incumbent: Time) -> Result<Decomposition> {
    let tables = bound_tables(inst, sub);
    let (fwd, bwd) = children_bounds(inst, sub, &tables)?;
    Ok(Decomposition::from_bounds(fwd, bwd, incumbent))
}
