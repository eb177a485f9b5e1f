//! Integer-Vector-Matrix depth-first search state.
//!
//! Row `l` of the matrix lists the jobs that may be scheduled at tree level
//! `l` (level 0 fixes the first job). The vector holds, per level, the index
//! of the selected cell; read as a factoradic number it is the position of
//! the search in `[0, n!)`. Pruned cells are stored as the bitwise
//! complement of the job so that job 0 can be flagged too.

use std::cmp::Ordering;

use crate::bound::{decompose, Decomposition, Direction, Subproblem};
use crate::error::{Error, Result};
use crate::factoradic::{cmp_padded, digits_to_decimal, BigCount, Endpoint, Factoradic};
use crate::instance::{Instance, Job, Time};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IvmState {
    Empty,
    Active,
    Initializing,
}

#[derive(Debug, Clone)]
pub struct Ivm {
    n: usize,
    /// Current level, -1 above the root's children.
    level: isize,
    pos: Vec<u32>,
    /// Row-major `n x n`; row `l` uses its first `n - l` cells.
    matrix: Vec<i32>,
    dir: Vec<Direction>,
    end: Endpoint,
    state: IvmState,
}

#[inline]
fn job_of(cell: i32) -> Job {
    if cell < 0 {
        !cell as Job
    } else {
        cell as Job
    }
}

impl Ivm {
    /// An empty explorer state for `n` jobs.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "IVM needs at least one job");
        let mut matrix = vec![0; n * n];
        for (j, cell) in matrix[..n].iter_mut().enumerate() {
            *cell = j as i32;
        }
        Ivm {
            n,
            level: -1,
            pos: vec![0; n],
            matrix,
            dir: vec![Direction::Forward; n],
            end: Endpoint::Total,
            state: IvmState::Empty,
        }
    }

    pub fn jobs(&self) -> usize {
        self.n
    }

    pub fn state(&self) -> IvmState {
        self.state
    }

    pub fn is_active(&self) -> bool {
        self.state == IvmState::Active
    }

    pub fn level(&self) -> isize {
        self.level
    }

    /// Deepest level that is decomposed further; nodes below it are leaves.
    pub fn leaf_level(&self) -> isize {
        self.n.saturating_sub(2) as isize
    }

    pub fn at_leaf(&self) -> bool {
        self.level >= self.leaf_level()
    }

    pub fn end(&self) -> &Endpoint {
        &self.end
    }

    /// Shrinks the owned interval from the right (the stolen half leaves).
    pub fn set_end(&mut self, end: Endpoint) {
        self.end = end;
    }

    pub fn clear(&mut self) {
        self.state = IvmState::Empty;
        self.level = -1;
        self.pos.fill(0);
    }

    #[inline]
    fn cell(&self, level: usize, idx: usize) -> i32 {
        self.matrix[level * self.n + idx]
    }

    #[inline]
    fn row(&self, level: usize) -> &[i32] {
        &self.matrix[level * self.n..level * self.n + self.n - level]
    }

    fn flag(&mut self, level: usize, idx: usize) {
        let c = &mut self.matrix[level * self.n + idx];
        if *c >= 0 {
            *c = !*c;
        }
    }

    pub fn is_pruned(&self, level: usize, idx: usize) -> bool {
        self.cell(level, idx) < 0
    }

    /// Digits of the current position above and at the current level.
    pub fn position_prefix(&self) -> &[u32] {
        &self.pos[..(self.level + 1).max(0) as usize]
    }

    /// Current position, zero-padded below the current level.
    pub fn position(&self) -> Factoradic {
        let mut digits = vec![0; self.n];
        let prefix = self.position_prefix();
        digits[..prefix.len()].copy_from_slice(prefix);
        Factoradic::new(digits).expect("position digits stay within their radix")
    }

    pub fn position_decimal(&self) -> BigCount {
        digits_to_decimal(self.position_prefix(), self.n)
    }

    /// Length of `[position, end)`, zero when inactive.
    pub fn remaining(&self) -> BigCount {
        if !self.is_active() {
            return BigCount::zero();
        }
        self.end.to_decimal(self.n).saturating_sub(&self.position_decimal())
    }

    fn past_end(&self) -> bool {
        match &self.end {
            Endpoint::Total => false,
            Endpoint::At(e) => cmp_padded(self.position_prefix(), e.digits()) != Ordering::Less,
        }
    }

    /// Moves to the deepest leftmost unpruned cell at or after the current
    /// one, backtracking over exhausted rows. Returns false, leaving the IVM
    /// empty, once the tree or the interval is exhausted.
    pub fn select_next(&mut self) -> bool {
        if self.state != IvmState::Active {
            return false;
        }
        loop {
            if self.level < 0 {
                self.state = IvmState::Empty;
                return false;
            }
            let l = self.level as usize;
            let row_len = self.n - l;
            while (self.pos[l] as usize) < row_len && self.is_pruned(l, self.pos[l] as usize) {
                self.pos[l] += 1;
            }
            if self.pos[l] as usize == row_len {
                self.pos[l] = 0;
                self.level -= 1;
                if self.level >= 0 {
                    self.pos[self.level as usize] += 1;
                }
                continue;
            }
            if self.past_end() {
                self.state = IvmState::Empty;
                return false;
            }
            return true;
        }
    }

    /// Marks the selected cell as visited and normalises the position so
    /// that every digit stays within its radix.
    pub fn consume(&mut self) {
        if self.level < 0 {
            return;
        }
        self.pos[self.level as usize] += 1;
        while self.level >= 0 {
            let l = self.level as usize;
            if (self.pos[l] as usize) < self.n - l {
                return;
            }
            self.pos[l] = 0;
            self.level -= 1;
            if self.level >= 0 {
                self.pos[self.level as usize] += 1;
            }
        }
        self.state = IvmState::Empty;
    }

    /// Subproblem designated by the current level and position.
    pub fn decode(&self) -> Subproblem {
        let n = self.n;
        if self.level < 0 {
            return Subproblem::root(n);
        }
        let top = self.level as usize;
        let mut perm = Vec::with_capacity(n);
        let mut suffix = Vec::new();
        for l in 0..=top {
            let job = job_of(self.cell(l, self.pos[l] as usize));
            match self.dir[l] {
                Direction::Forward => perm.push(job),
                Direction::Backward => suffix.push(job),
            }
        }
        let d1 = perm.len();
        let d2 = suffix.len();
        let selected = self.pos[top] as usize;
        perm.extend(
            self.row(top)
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != selected)
                .map(|(_, &c)| job_of(c)),
        );
        perm.extend(suffix.iter().rev());
        Subproblem { perm, d1, d2 }
    }

    /// Fills the next row with the free jobs of the selected node, flags
    /// pruned children and descends one level.
    pub fn branch(&mut self, dec: &Decomposition) -> Result<()> {
        let next = (self.level + 1) as usize;
        if next >= self.n {
            return Err(Error::BranchAtLeaf);
        }
        let width = self.n - next;
        if dec.pruned.len() != width {
            return Err(Error::LengthMismatch(dec.pruned.len(), width));
        }
        let n = self.n;
        if self.level >= 0 {
            let l = self.level as usize;
            let selected = self.pos[l] as usize;
            let (upper, lower) = self.matrix.split_at_mut(next * n);
            let parent = &upper[l * n..l * n + n - l];
            let child = &mut lower[..width];
            let mut k = 0;
            for (i, &c) in parent.iter().enumerate() {
                if i != selected {
                    child[k] = job_of(c) as i32;
                    k += 1;
                }
            }
        } else {
            for (j, c) in self.matrix[..n].iter_mut().enumerate() {
                *c = j as i32;
            }
        }
        for (i, &p) in dec.pruned.iter().enumerate() {
            if p {
                self.flag(next, i);
            }
        }
        self.dir[next] = dec.direction;
        self.level = next as isize;
        self.pos[next] = 0;
        debug_assert!(self.rows_consistent());
        Ok(())
    }

    /// Starts exploring `[a, b)`: replays the path to `a` level by level,
    /// decomposing each node on it with the given incumbent and flagging the
    /// cells left of the path. Returns the number of decomposed nodes.
    pub fn init_at(
        &mut self,
        a: &Factoradic,
        b: &Endpoint,
        inst: &Instance,
        incumbent: Time,
    ) -> Result<u64> {
        if a.len() != self.n {
            return Err(Error::LengthMismatch(a.len(), self.n));
        }
        if let Endpoint::At(end) = b {
            if a.compare(end)? == Ordering::Greater {
                return Err(Error::BadInterval(format!("start {a} after end {end}")));
            }
        }
        self.clear();
        self.end = b.clone();
        if !a.lt_endpoint(b) {
            return Ok(0);
        }
        self.state = IvmState::Initializing;

        let root = decompose(inst, &Subproblem::root(self.n), incumbent)?;
        self.branch(&root)?;
        let mut decomposed = 1;
        loop {
            let l = self.level as usize;
            let digit = a.digits()[l];
            self.pos[l] = digit;
            for idx in 0..digit as usize {
                self.flag(l, idx);
            }
            if self.is_pruned(l, digit as usize) || self.at_leaf() {
                break;
            }
            let dec = decompose(inst, &self.decode(), incumbent)?;
            self.branch(&dec)?;
            decomposed += 1;
        }
        self.state = IvmState::Active;
        Ok(decomposed)
    }

    /// Every row holds distinct jobs not selected on the levels above.
    pub fn rows_consistent(&self) -> bool {
        let top = self.level;
        if top < 0 {
            return true;
        }
        let mut used = vec![false; self.n];
        for l in 0..=top as usize {
            let mut seen = vec![false; self.n];
            for &c in self.row(l) {
                let j = job_of(c) as usize;
                if j >= self.n || seen[j] || used[j] {
                    return false;
                }
                seen[j] = true;
            }
            if self.pos[l] as usize >= self.n - l {
                return false;
            }
            used[job_of(self.cell(l, self.pos[l] as usize)) as usize] = true;
        }
        true
    }
}
