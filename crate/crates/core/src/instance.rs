//! Flow-shop instances, schedule evaluation and the Taillard benchmark generator.

use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Processing time of one operation.
pub type Duration = u32;
/// Completion times and makespans.
pub type Time = u64;
/// Job index, 0-based.
pub type Job = u32;

/// Row order of the processing-time matrix in a text file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Layout {
    /// One row per job, `m` values each.
    #[default]
    JobMajor,
    /// One row per machine, `n` values each (the published Taillard files).
    MachineMajor,
}

/// An `n` jobs by `m` machines permutation flow-shop instance.
#[derive(Clone, PartialEq, Eq)]
pub struct Instance {
    jobs: usize,
    machines: usize,
    /// Job-major: `times[j * machines + k]`.
    times: Vec<Duration>,
    label: String,
}

impl fmt::Debug for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Instance")
            .field("label", &self.label)
            .field("jobs", &self.jobs)
            .field("machines", &self.machines)
            .finish()
    }
}

impl Instance {
    /// Builds an instance from one row of machine durations per job.
    pub fn from_rows(rows: Vec<Vec<Duration>>, label: impl Into<String>) -> Result<Self> {
        let jobs = rows.len();
        if jobs == 0 {
            return Err(Error::InvalidInstance("instance needs at least one job".into()));
        }
        let machines = rows[0].len();
        if machines == 0 {
            return Err(Error::InvalidInstance("instance needs at least one machine".into()));
        }
        let mut times = Vec::with_capacity(jobs * machines);
        for (j, row) in rows.iter().enumerate() {
            if row.len() != machines {
                return Err(Error::DimensionMismatch(format!(
                    "job {j} has {} durations, expected {machines}",
                    row.len()
                )));
            }
            times.extend_from_slice(row);
        }
        Ok(Instance {
            jobs,
            machines,
            times,
            label: label.into(),
        })
    }

    pub fn jobs(&self) -> usize {
        self.jobs
    }

    pub fn machines(&self) -> usize {
        self.machines
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    #[inline]
    pub fn time(&self, job: usize, machine: usize) -> Duration {
        self.times[job * self.machines + machine]
    }

    /// Durations of `job` on machines `0..m`.
    #[inline]
    pub fn row(&self, job: usize) -> &[Duration] {
        &self.times[job * self.machines..(job + 1) * self.machines]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Duration]> {
        self.times.chunks_exact(self.machines)
    }

    /// Same instance with each job's machine order reversed.
    pub fn reversed_machines(&self) -> Instance {
        let rows = self
            .rows()
            .map(|r| r.iter().rev().copied().collect())
            .collect();
        Instance::from_rows(rows, format!("{}-reversed", self.label)).expect("same shape")
    }

    /// Parses whitespace-separated integers. The first non-empty line starts
    /// with `n m`; further tokens on that line are ignored (seed, bounds).
    pub fn parse(text: &str, layout: Layout, label: impl Into<String>) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .enumerate()
            .filter(|(_, l)| !l.is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Parse("empty instance file".into()))?;
        let mut head = header.split_whitespace().map(parse_int);
        let n = head
            .next()
            .ok_or_else(|| Error::Parse("missing job count".into()))??;
        let m = head
            .next()
            .ok_or_else(|| Error::Parse("missing machine count".into()))??;
        if n < 1 || m < 1 {
            return Err(Error::InvalidInstance(format!("bad dimensions {n} x {m}")));
        }
        let (n, m) = (n as usize, m as usize);
        let (row_count, row_len) = match layout {
            Layout::JobMajor => (n, m),
            Layout::MachineMajor => (m, n),
        };

        let mut matrix = Vec::with_capacity(row_count);
        for (lineno, line) in lines {
            let row = line
                .split_whitespace()
                .map(parse_int)
                .collect::<Result<Vec<i64>>>()?;
            if row.len() != row_len {
                return Err(Error::DimensionMismatch(format!(
                    "line {}: {} values, expected {row_len}",
                    lineno + 1,
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|&&v| v < 0) {
                return Err(Error::InvalidInstance(format!(
                    "line {}: negative processing time {v}",
                    lineno + 1
                )));
            }
            let row = row
                .into_iter()
                .map(|v| {
                    Duration::try_from(v)
                        .map_err(|_| Error::InvalidInstance(format!("processing time {v} too large")))
                })
                .collect::<Result<Vec<_>>>()?;
            matrix.push(row);
        }
        if matrix.len() != row_count {
            return Err(Error::DimensionMismatch(format!(
                "{} rows, expected {row_count}",
                matrix.len()
            )));
        }

        let rows = match layout {
            Layout::JobMajor => matrix,
            Layout::MachineMajor => (0..n)
                .map(|j| (0..m).map(|k| matrix[k][j]).collect())
                .collect(),
        };
        Instance::from_rows(rows, label)
    }

    pub fn load(path: impl AsRef<Path>, layout: Layout) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Instance::parse(&text, layout, label)
    }

    /// Renders the instance in the given layout, header line `n m`.
    pub fn to_text(&self, layout: Layout) -> String {
        let mut out = format!("{} {}\n", self.jobs, self.machines);
        let line = |vals: &mut dyn Iterator<Item = Duration>| {
            vals.map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
        };
        match layout {
            Layout::JobMajor => {
                for r in self.rows() {
                    out.push_str(&line(&mut r.iter().copied()));
                    out.push('\n');
                }
            }
            Layout::MachineMajor => {
                for k in 0..self.machines {
                    out.push_str(&line(&mut (0..self.jobs).map(|j| self.time(j, k))));
                    out.push('\n');
                }
            }
        }
        out
    }

    /// Makespan of a complete permutation, validated.
    pub fn makespan(&self, perm: &[Job]) -> Result<Time> {
        check_permutation(perm, self.jobs)?;
        Ok(self.makespan_unchecked(perm))
    }

    /// Makespan by the completion-time recursion; `perm` is trusted.
    pub fn makespan_unchecked(&self, perm: &[Job]) -> Time {
        let mut completion = vec![0 as Time; self.machines];
        for &j in perm {
            extend_front(&mut completion, self.row(j as usize));
        }
        completion[self.machines - 1]
    }

    /// `max_k sum_j p[j][k]`, a lower bound on every makespan.
    pub fn machine_load_bound(&self) -> Time {
        (0..self.machines)
            .map(|k| (0..self.jobs).map(|j| self.time(j, k) as Time).sum())
            .max()
            .unwrap_or(0)
    }

    /// `max_j sum_k p[j][k]`, a lower bound on every makespan.
    pub fn job_length_bound(&self) -> Time {
        self.rows()
            .map(|r| r.iter().map(|&v| v as Time).sum())
            .max()
            .unwrap_or(0)
    }
}

/// Appends one job to a completion-time front in place.
#[inline]
pub(crate) fn extend_front(front: &mut [Time], row: &[Duration]) {
    let mut prev = 0;
    for (c, &p) in front.iter_mut().zip(row) {
        prev = prev.max(*c) + p as Time;
        *c = prev;
    }
}

fn parse_int(tok: &str) -> Result<i64> {
    tok.parse::<i64>()
        .map_err(|_| Error::Parse(format!("not an integer: {tok:?}")))
}

pub(crate) fn check_permutation(perm: &[Job], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::NotPermutation(format!(
            "length {} for {n} jobs",
            perm.len()
        )));
    }
    let mut seen = vec![false; n];
    for &j in perm {
        let j = j as usize;
        if j >= n || std::mem::replace(&mut seen[j], true) {
            return Err(Error::NotPermutation(format!("job {j} out of range or repeated")));
        }
    }
    Ok(())
}

/// A permutation schedule with its makespan once evaluated.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Schedule {
    pub perm: Vec<Job>,
    pub cmax: Option<Time>,
}

impl Schedule {
    pub fn new(perm: Vec<Job>) -> Self {
        Schedule { perm, cmax: None }
    }

    pub fn evaluated(inst: &Instance, perm: Vec<Job>) -> Result<Self> {
        let cmax = inst.makespan(&perm)?;
        Ok(Schedule {
            perm,
            cmax: Some(cmax),
        })
    }

    /// 1-based job list, as printed in the benchmark literature.
    pub fn one_based(&self) -> String {
        self.perm
            .iter()
            .map(|j| (j + 1).to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

const LCG_MODULUS: i64 = 2_147_483_647;
const LCG_MULTIPLIER: i64 = 16_807;
const LCG_QUOTIENT: i64 = 127_773; // modulus / multiplier
const LCG_REMAINDER: i64 = 2_836; // modulus % multiplier

/// Minimal standard generator in Schrage's form, as used by the published
/// benchmark generator.
struct Lehmer(i64);

impl Lehmer {
    fn next_unit(&mut self) -> f64 {
        let k = self.0 / LCG_QUOTIENT;
        self.0 = LCG_MULTIPLIER * (self.0 % LCG_QUOTIENT) - k * LCG_REMAINDER;
        if self.0 < 0 {
            self.0 += LCG_MODULUS;
        }
        self.0 as f64 / LCG_MODULUS as f64
    }

    fn uniform(&mut self, low: u32, high: u32) -> u32 {
        low + (self.next_unit() * (high - low + 1) as f64) as u32
    }
}

/// Taillard's generator: durations uniform in `[1, 99]`, drawn machine by
/// machine. Seed must lie in `[1, 2^31 - 2]`.
pub fn generate_taillard(jobs: usize, machines: usize, seed: u32) -> Result<Instance> {
    if seed == 0 || seed as i64 >= LCG_MODULUS {
        return Err(Error::SeedOutOfRange(seed));
    }
    if jobs == 0 || machines == 0 {
        return Err(Error::InvalidInstance(format!("bad dimensions {jobs} x {machines}")));
    }
    let mut rng = Lehmer(seed as i64);
    let mut rows = vec![vec![0; machines]; jobs];
    for k in 0..machines {
        for row in rows.iter_mut() {
            row[k] = rng.uniform(1, 99);
        }
    }
    Instance::from_rows(rows, format!("taillard-{jobs}x{machines}-{seed}"))
}

/// Published time seeds of named benchmark instances.
pub fn taillard_seed(name: &str) -> Option<(usize, usize, u32)> {
    const SEEDS: &[(&str, usize, usize, u32)] = &[
        ("ta001", 20, 5, 873_654_221),
        ("ta002", 20, 5, 379_008_056),
        ("ta003", 20, 5, 1_866_992_158),
        ("ta004", 20, 5, 216_771_124),
        ("ta005", 20, 5, 495_070_989),
        ("ta021", 20, 20, 479_340_445),
        ("ta022", 20, 20, 268_827_376),
        ("ta023", 20, 20, 1_958_948_863),
        ("ta056", 50, 20, 450_926_852),
    ];
    let key = name.to_ascii_lowercase();
    SEEDS
        .iter()
        .find(|(n, ..)| *n == key)
        .map(|&(_, j, m, s)| (j, m, s))
}
