//! Depth-first exploration of intervals by a pool of IVM explorers.
//!
//! The pool runs in rounds: every active explorer performs up to `batch`
//! steps, then all explorers meet at a synchronisation point where the
//! activity level is sampled and, if fewer than 80% of them are active, a
//! work-stealing phase hands the right half of large intervals to idle
//! explorers.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::bound::decompose;
use crate::error::{Error, Result};
use crate::factoradic::{BigCount, Endpoint, Factoradic};
use crate::instance::{Instance, Job, Schedule, Time};
use crate::ivm::{Ivm, IvmState};
use crate::workunit::{normalize, Interval};

/// Best makespan known to the pool, shared by all explorers.
///
/// The value only ever decreases. It may be lowered without a schedule
/// (bound received from elsewhere); `best` keeps the best schedule this
/// process found itself.
#[derive(Debug)]
pub struct Incumbent {
    value: AtomicU64,
    best: Mutex<Option<(Time, Vec<Job>)>>,
}

impl Incumbent {
    pub fn new(initial: Time) -> Self {
        Incumbent {
            value: AtomicU64::new(initial),
            best: Mutex::new(None),
        }
    }

    #[inline]
    pub fn value(&self) -> Time {
        self.value.load(Ordering::Acquire)
    }

    /// Records `perm` if `cmax` beats the current value.
    pub fn try_improve(&self, cmax: Time, perm: &[Job]) -> bool {
        let mut best = self.best.lock().unwrap();
        if cmax >= self.value() {
            return false;
        }
        self.value.fetch_min(cmax, Ordering::AcqRel);
        *best = Some((cmax, perm.to_vec()));
        true
    }

    /// Lowers the bound without a schedule.
    pub fn lower_to(&self, value: Time) -> bool {
        self.value.fetch_min(value, Ordering::AcqRel) > value
    }

    pub fn best(&self) -> Option<(Time, Vec<Job>)> {
        self.best.lock().unwrap().clone()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutcome {
    Decomposed,
    /// A complete schedule that did not beat the incumbent.
    Leaf(Vec<Job>),
    ImprovedBest(Schedule),
    Exhausted,
}

/// One select / bound / branch cycle. `prune_below` is the threshold used
/// for pruning children (`Time::MAX` disables pruning).
pub fn explore_step(
    ivm: &mut Ivm,
    inst: &Instance,
    incumbent: Time,
    prune_below: Time,
) -> Result<StepOutcome> {
    if !ivm.select_next() {
        return Ok(StepOutcome::Exhausted);
    }
    let sub = ivm.decode();
    if ivm.at_leaf() {
        ivm.consume();
        let cmax = inst.makespan_unchecked(&sub.perm);
        if cmax < incumbent {
            return Ok(StepOutcome::ImprovedBest(Schedule {
                perm: sub.perm,
                cmax: Some(cmax),
            }));
        }
        return Ok(StepOutcome::Leaf(sub.perm));
    }
    let dec = decompose(inst, &sub, prune_below)?;
    ivm.branch(&dec)?;
    Ok(StepOutcome::Decomposed)
}

/// Splits `[a, b)` at its midpoint computed on the digit vectors.
/// Refused when shorter than `max(2, min_len)`.
pub fn split_right_half(
    a: &Factoradic,
    b: &Endpoint,
    min_len: &BigCount,
) -> Result<Factoradic> {
    let n = a.len();
    let len = b.to_decimal(n).saturating_sub(&a.to_decimal());
    if len < BigCount::from(2) || len < *min_len {
        return Err(Error::TooSmall);
    }
    Factoradic::midpoint(a, b)
}

/// Decimal form of `split_right_half`: `(victim keeps, thief gets)`.
pub fn steal_right_half(
    iv: &Interval,
    n: usize,
    min_len: &BigCount,
) -> Result<(Interval, Interval)> {
    if iv.is_empty() {
        return Err(Error::TooSmall);
    }
    let a = Factoradic::from_decimal(&iv.a, n)?;
    let b = Endpoint::from_decimal(&iv.b, n)?;
    let mid = split_right_half(&a, &b, min_len)?.to_decimal();
    Ok((
        Interval::new(iv.a.clone(), mid.clone()),
        Interval::new(mid, iv.b.clone()),
    ))
}

#[derive(Debug, Clone)]
pub struct PoolConfig {
    /// Number of explorers `K`.
    pub explorers: usize,
    /// OS threads running the explorers.
    pub threads: usize,
    /// Steps per explorer between synchronisation points.
    pub batch: usize,
    /// With pruning off every leaf of the interval is visited.
    pub prune: bool,
    /// Record every decoded leaf permutation.
    pub census: bool,
    /// Sample per-explorer activity this often.
    pub timeline_every: Option<Duration>,
}

impl Default for PoolConfig {
    fn default() -> Self {
        let explorers = default_explorers();
        PoolConfig {
            explorers,
            threads: default_threads(explorers),
            batch: 1024,
            prune: true,
            census: false,
            timeline_every: None,
        }
    }
}

impl PoolConfig {
    pub fn with_explorers(explorers: usize) -> Self {
        PoolConfig {
            explorers,
            threads: default_threads(explorers),
            ..PoolConfig::default()
        }
    }
}

fn hardware_threads() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

/// Twice the hardware threads.
pub fn default_explorers() -> usize {
    hardware_threads() * 2
}

pub fn default_threads(explorers: usize) -> usize {
    explorers.clamp(1, hardware_threads())
}

/// `min(8!, ceil(n! / 4K))`.
pub fn min_steal_length(n: usize, explorers: usize) -> BigCount {
    let cap = BigCount::factorial(8);
    let quarter = BigCount::from(4 * explorers as u64);
    let total = BigCount::factorial(n);
    let share = BigCount((&total.0 + &quarter.0 - 1u32) / &quarter.0);
    share.min(cap)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PoolStats {
    pub decomposed: u64,
    pub leaves: u64,
    pub improvements: u64,
    pub steals: u64,
    pub steal_phases: u64,
    pub rounds: u64,
}

/// One row of the activity timeline.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivitySample {
    pub timestamp_ms: u64,
    pub explorer: usize,
    pub active: bool,
    /// `log2` of the remaining interval length, `-inf` when empty.
    pub interval_log2: f64,
}

pub fn timeline_csv(samples: &[ActivitySample]) -> String {
    let mut out = String::from("timestamp_ms,explorer_id,active,interval_length_log2\n");
    for s in samples {
        let len = if s.interval_log2.is_finite() {
            format!("{:.3}", s.interval_log2)
        } else {
            String::new()
        };
        out.push_str(&format!(
            "{},{},{},{}\n",
            s.timestamp_ms, s.explorer, s.active as u8, len
        ));
    }
    out
}

#[derive(Debug, Clone)]
struct Explorer {
    ivm: Ivm,
    decomposed: u64,
    leaves: u64,
    improvements: u64,
    census: Vec<Vec<Job>>,
}

impl Explorer {
    fn run_batch(
        &mut self,
        inst: &Instance,
        incumbent: &Incumbent,
        steps: usize,
        prune: bool,
        census: bool,
    ) -> Result<()> {
        for _ in 0..steps {
            let best = incumbent.value();
            let threshold = if prune { best } else { Time::MAX };
            match explore_step(&mut self.ivm, inst, best, threshold)? {
                StepOutcome::Exhausted => break,
                StepOutcome::Decomposed => self.decomposed += 1,
                StepOutcome::Leaf(perm) => {
                    self.leaves += 1;
                    if census {
                        self.census.push(perm);
                    }
                }
                StepOutcome::ImprovedBest(s) => {
                    self.leaves += 1;
                    let cmax = s.cmax.expect("evaluated");
                    if incumbent.try_improve(cmax, &s.perm) {
                        self.improvements += 1;
                    }
                    if census {
                        self.census.push(s.perm);
                    }
                }
            }
        }
        Ok(())
    }

}

/// `K` explorers sharing one instance and one incumbent.
pub struct ExplorerPool {
    inst: Arc<Instance>,
    config: PoolConfig,
    explorers: Vec<Explorer>,
    incumbent: Arc<Incumbent>,
    min_steal: BigCount,
    threads: Option<rayon::ThreadPool>,
    stats: PoolStats,
    steals_since_checkpoint: u64,
    timeline: Vec<ActivitySample>,
    started: Instant,
    last_sample: Option<Instant>,
}

impl ExplorerPool {
    pub fn new(inst: Arc<Instance>, config: PoolConfig, incumbent: Arc<Incumbent>) -> Result<Self> {
        if config.explorers == 0 {
            return Err(Error::TooManyIntervals {
                got: 0,
                capacity: 0,
            });
        }
        let n = inst.jobs();
        let threads = if config.threads > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(config.threads)
                    .build()
                    .map_err(|e| Error::Io(e.to_string()))?,
            )
        } else {
            None
        };
        let explorers = (0..config.explorers)
            .map(|_| Explorer {
                ivm: Ivm::new(n),
                decomposed: 0,
                leaves: 0,
                improvements: 0,
                census: Vec::new(),
            })
            .collect();
        Ok(ExplorerPool {
            min_steal: min_steal_length(n, config.explorers),
            inst,
            config,
            explorers,
            incumbent,
            threads,
            stats: PoolStats::default(),
            steals_since_checkpoint: 0,
            timeline: Vec::new(),
            started: Instant::now(),
            last_sample: None,
        })
    }

    pub fn instance(&self) -> &Arc<Instance> {
        &self.inst
    }

    pub fn incumbent(&self) -> &Arc<Incumbent> {
        &self.incumbent
    }

    pub fn config(&self) -> &PoolConfig {
        &self.config
    }

    pub fn capacity(&self) -> usize {
        self.explorers.len()
    }

    pub fn set_min_steal(&mut self, len: BigCount) {
        self.min_steal = len;
    }

    pub fn active_count(&self) -> usize {
        self.explorers.iter().filter(|e| e.ivm.is_active()).count()
    }

    pub fn is_exhausted(&self) -> bool {
        self.active_count() == 0
    }

    pub fn states(&self) -> Vec<IvmState> {
        self.explorers.iter().map(|e| e.ivm.state()).collect()
    }

    pub fn stats(&self) -> PoolStats {
        let mut s = self.stats.clone();
        for e in &self.explorers {
            s.decomposed += e.decomposed;
            s.leaves += e.leaves;
            s.improvements += e.improvements;
        }
        s
    }

    pub fn steals_since_checkpoint(&self) -> u64 {
        self.steals_since_checkpoint
    }

    pub fn reset_steal_counter(&mut self) {
        self.steals_since_checkpoint = 0;
    }

    pub fn timeline(&self) -> &[ActivitySample] {
        &self.timeline
    }

    /// Decoded leaves of every explorer since the pool was created.
    pub fn take_census(&mut self) -> Vec<Vec<Job>> {
        self.explorers
            .iter_mut()
            .flat_map(|e| std::mem::take(&mut e.census))
            .collect()
    }

    /// Replaces the pool's work: one interval per explorer, the rest idle.
    pub fn assign(&mut self, intervals: &[Interval]) -> Result<()> {
        if intervals.len() > self.explorers.len() {
            return Err(Error::TooManyIntervals {
                got: intervals.len(),
                capacity: self.explorers.len(),
            });
        }
        let n = self.inst.jobs();
        let best = self.prune_threshold();
        for (i, e) in self.explorers.iter_mut().enumerate() {
            match intervals.get(i) {
                Some(iv) => {
                    let a = Factoradic::from_decimal(&iv.a, n)?;
                    let b = Endpoint::from_decimal(&iv.b, n)?;
                    e.decomposed += e.ivm.init_at(&a, &b, &self.inst, best)?;
                }
                None => e.ivm.clear(),
            }
        }
        Ok(())
    }

    fn prune_threshold(&self) -> Time {
        if self.config.prune {
            self.incumbent.value()
        } else {
            Time::MAX
        }
    }

    /// Remaining `[position, end)` of every active explorer, normalized.
    pub fn snapshot(&self) -> Vec<Interval> {
        let n = self.inst.jobs();
        let list = self
            .explorers
            .iter()
            .filter(|e| e.ivm.is_active())
            .map(|e| Interval::new(e.ivm.position_decimal(), e.ivm.end().to_decimal(n)))
            .collect();
        normalize(list).expect("positions never pass their end")
    }

    /// Runs one batch on every explorer, then the synchronisation point.
    pub fn run_round(&mut self) -> Result<()> {
        let inst = &*self.inst;
        let incumbent = &*self.incumbent;
        let (steps, prune, census) = (self.config.batch, self.config.prune, self.config.census);
        let run = |e: &mut Explorer| {
            if e.ivm.is_active() {
                e.run_batch(inst, incumbent, steps, prune, census)
            } else {
                Ok(())
            }
        };
        match &self.threads {
            Some(pool) => pool.install(|| {
                self.explorers
                    .par_iter_mut()
                    .with_max_len(1)
                    .map(run)
                    .collect::<Result<Vec<()>>>()
            })?,
            None => self.explorers.iter_mut().map(run).collect::<Result<Vec<()>>>()?,
        };
        self.stats.rounds += 1;
        self.sample_timeline(false);

        let k = self.explorers.len();
        let active = self.active_count();
        if active > 0 && active * 5 < k * 4 {
            self.steal_phase()?;
        }
        Ok(())
    }

    fn sample_timeline(&mut self, force: bool) {
        let Some(every) = self.config.timeline_every else {
            return;
        };
        let now = Instant::now();
        if !force && self.last_sample.is_some_and(|t| now.duration_since(t) < every) {
            return;
        }
        self.last_sample = Some(now);
        let ts = now.duration_since(self.started).as_millis() as u64;
        for (i, e) in self.explorers.iter().enumerate() {
            self.timeline.push(ActivitySample {
                timestamp_ms: ts,
                explorer: i,
                active: e.ivm.is_active(),
                interval_log2: e.ivm.remaining().log2(),
            });
        }
    }

    /// Pairs idle explorers with large active intervals and splits those.
    /// Returns the number of successful steals.
    pub fn steal_phase(&mut self) -> Result<usize> {
        let k = self.explorers.len();
        let remaining: Vec<BigCount> = self.explorers.iter().map(|e| e.ivm.remaining()).collect();
        let total = remaining.iter().fold(BigCount::zero(), |acc, r| &acc + r);
        if total.is_zero() {
            return Ok(0);
        }
        self.stats.steal_phases += 1;
        let kk = BigCount::from(k as u64);
        // remaining > total / K without dividing
        let eligible: Vec<bool> = self
            .explorers
            .iter()
            .zip(&remaining)
            .map(|(e, r)| {
                e.ivm.is_active() && BigCount(&r.0 * &kk.0) > total && *r > self.min_steal
            })
            .collect();

        let pairs = match hypercube_dimension(k) {
            Some(dim) => hypercube_pairs(&self.states(), &eligible, dim),
            None => largest_first_pairs(&self.states(), &eligible, &remaining),
        };

        let mut steals = 0;
        let best = self.prune_threshold();
        for (thief, victim) in pairs {
            let v = &self.explorers[victim].ivm;
            let end = v.end().clone();
            let mid = match split_right_half(&v.position(), &end, &self.min_steal) {
                Ok(mid) => mid,
                Err(Error::TooSmall) => continue,
                Err(e) => return Err(e),
            };
            self.explorers[victim].ivm.set_end(Endpoint::At(mid.clone()));
            let t = &mut self.explorers[thief];
            t.decomposed += t.ivm.init_at(&mid, &end, &self.inst, best)?;
            steals += 1;
        }
        self.stats.steals += steals as u64;
        self.steals_since_checkpoint += steals as u64;
        Ok(steals)
    }

    /// Runs rounds until no explorer is active.
    pub fn run_to_completion(&mut self) -> Result<()> {
        while !self.is_exhausted() {
            self.run_round()?;
        }
        self.sample_timeline(true);
        Ok(())
    }

    /// Completes each active explorer's current node by ordering its free
    /// jobs as in the incumbent schedule (or by index without one) and
    /// returns the best `capacity` distinct schedules, best first.
    pub fn promote_solutions(&self, capacity: usize) -> Vec<Schedule> {
        let n = self.inst.jobs();
        let rank: Vec<usize> = match self.incumbent.best() {
            Some((_, perm)) => {
                let mut rank = vec![0; n];
                for (i, &j) in perm.iter().enumerate() {
                    rank[j as usize] = i;
                }
                rank
            }
            None => (0..n).collect(),
        };
        let mut out: Vec<Schedule> = self
            .explorers
            .iter()
            .filter(|e| e.ivm.is_active())
            .map(|e| {
                let sub = e.ivm.decode();
                promote(&self.inst, &sub.perm, sub.d1, sub.d2, &rank)
            })
            .collect();
        out.sort_by_key(|s| (s.cmax, s.perm.clone()));
        out.dedup_by(|a, b| a.perm == b.perm);
        out.truncate(capacity);
        out
    }
}

/// Fills the free middle of `perm` in increasing `rank` order.
pub fn promote(inst: &Instance, perm: &[Job], d1: usize, d2: usize, rank: &[usize]) -> Schedule {
    let mut perm = perm.to_vec();
    let n = perm.len();
    perm[d1..n - d2].sort_by_key(|&j| rank[j as usize]);
    let cmax = inst.makespan_unchecked(&perm);
    Schedule {
        perm,
        cmax: Some(cmax),
    }
}

/// `Some(c)` when `k = 4^c`.
fn hypercube_dimension(k: usize) -> Option<u32> {
    if k.is_power_of_two() && k.trailing_zeros() % 2 == 0 {
        Some(k.trailing_zeros() / 2)
    } else {
        None
    }
}

/// Victim selection on the 4-ary hypercube over explorer indices: in round
/// `(i, j)` every still-idle explorer polls the index whose base-4 digit `i`
/// is decreased by `j` (mod 4). A victim is taken at most once per phase and
/// explorers that received work in this phase are not victims.
fn hypercube_pairs(states: &[IvmState], eligible: &[bool], dim: u32) -> Vec<(usize, usize)> {
    let k = states.len();
    let mut idle: Vec<bool> = states.iter().map(|&s| s == IvmState::Empty).collect();
    let mut claimed = vec![false; k];
    let mut pairs = Vec::new();
    for digit in 0..dim {
        let weight = 4usize.pow(digit);
        for offset in 1..4 {
            for thief in 0..k {
                if !idle[thief] {
                    continue;
                }
                let d = (thief / weight) % 4;
                let victim = thief - d * weight + ((d + 4 - offset) % 4) * weight;
                if eligible[victim] && !claimed[victim] {
                    claimed[victim] = true;
                    idle[thief] = false;
                    pairs.push((thief, victim));
                }
            }
        }
    }
    pairs
}

/// Fallback for `K` not a power of 4: idle explorers in index order take the
/// largest unclaimed eligible interval, ties to the lower index.
fn largest_first_pairs(
    states: &[IvmState],
    eligible: &[bool],
    remaining: &[BigCount],
) -> Vec<(usize, usize)> {
    let mut victims: Vec<usize> = (0..states.len()).filter(|&i| eligible[i]).collect();
    victims.sort_by(|&x, &y| remaining[y].cmp(&remaining[x]).then(x.cmp(&y)));
    let thieves = (0..states.len()).filter(|&i| states[i] == IvmState::Empty);
    thieves.zip(victims).collect()
}

/// Result of a complete pool exploration.
#[derive(Debug, Clone)]
pub struct PoolOutcome {
    /// Final incumbent value (the initial bound if nothing better was found).
    pub best_value: Time,
    /// Best schedule found by the pool, if any beat the initial bound.
    pub best: Option<Schedule>,
    pub stats: PoolStats,
    pub timeline: Vec<ActivitySample>,
    pub census: Vec<Vec<Job>>,
    pub elapsed: Duration,
}

impl PoolOutcome {
    pub fn improved(&self) -> bool {
        self.best.is_some()
    }
}

/// Explores `intervals` to exhaustion with the given initial upper bound.
pub fn pool_run(
    inst: Arc<Instance>,
    config: PoolConfig,
    initial_ub: Time,
    intervals: &[Interval],
) -> Result<PoolOutcome> {
    let started = Instant::now();
    let incumbent = Arc::new(Incumbent::new(initial_ub));
    let mut pool = ExplorerPool::new(inst, config, incumbent.clone())?;
    let intervals = normalize(intervals.to_vec())?;
    pool.assign(&intervals)?;
    pool.run_to_completion()?;
    Ok(PoolOutcome {
        best_value: incumbent.value(),
        best: incumbent.best().map(|(cmax, perm)| Schedule {
            perm,
            cmax: Some(cmax),
        }),
        stats: pool.stats(),
        timeline: pool.timeline().to_vec(),
        census: pool.take_census(),
        elapsed: started.elapsed(),
    })
}
