//! Half-open intervals of `[0, n!)` and work units made of several of them.

use std::fmt;

use crate::error::{Error, Result};
use crate::factoradic::BigCount;

/// `[a, b)` in decimal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interval {
    pub a: BigCount,
    pub b: BigCount,
}

impl Interval {
    pub fn new(a: impl Into<BigCount>, b: impl Into<BigCount>) -> Self {
        Interval {
            a: a.into(),
            b: b.into(),
        }
    }

    /// `[0, n!)`.
    pub fn full(n: usize) -> Self {
        Interval {
            a: BigCount::zero(),
            b: BigCount::factorial(n),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.a >= self.b
    }

    pub fn len(&self) -> BigCount {
        self.b.saturating_sub(&self.a)
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        Interval {
            a: self.a.clone().max(other.a.clone()),
            b: self.b.clone().min(other.b.clone()),
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.a, self.b)
    }
}

/// Canonical interval list: empty intervals dropped, sorted by start,
/// overlapping intervals merged. Intervals that merely touch stay separate.
pub fn normalize(mut list: Vec<Interval>) -> Result<Vec<Interval>> {
    if let Some(bad) = list.iter().find(|iv| iv.a > iv.b) {
        return Err(Error::BadInterval(bad.to_string()));
    }
    list.retain(|iv| !iv.is_empty());
    list.sort();
    let mut out: Vec<Interval> = Vec::with_capacity(list.len());
    for iv in list {
        match out.last_mut() {
            Some(last) if iv.a < last.b => {
                if iv.b > last.b {
                    last.b = iv.b;
                }
            }
            _ => out.push(iv),
        }
    }
    Ok(out)
}

pub fn is_normalized(list: &[Interval]) -> bool {
    list.iter().all(|iv| !iv.is_empty()) && list.windows(2).all(|w| w[0].b <= w[1].a)
}

/// Intersection of two normalized lists in `O(|a| + |b|)`.
pub fn intersect_units(a: &[Interval], b: &[Interval]) -> Vec<Interval> {
    debug_assert!(is_normalized(a) && is_normalized(b));
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        let piece = a[i].intersect(&b[j]);
        if !piece.is_empty() {
            out.push(piece);
        }
        if a[i].b < b[j].b {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

/// Total length of a normalized list.
pub fn unit_size(list: &[Interval]) -> BigCount {
    list.iter().fold(BigCount::zero(), |acc, iv| &acc + &iv.len())
}

/// A set of disjoint intervals assigned to one worker.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkUnit {
    pub id: u64,
    pub intervals: Vec<Interval>,
    /// Most intervals the owner can explore at once.
    pub kmax: usize,
    /// Split since the owner last reported.
    pub modified: bool,
}

impl WorkUnit {
    pub fn new(id: u64, intervals: Vec<Interval>, kmax: usize) -> Result<Self> {
        Ok(WorkUnit {
            id,
            intervals: normalize(intervals)?,
            kmax,
            modified: false,
        })
    }

    pub fn size(&self) -> BigCount {
        unit_size(&self.intervals)
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Hands the right halves of the first `min(kmax, splittable)` intervals
    /// of length at least 2 to a new list and keeps the left halves.
    pub fn split(&mut self, requester_kmax: usize) -> Vec<Interval> {
        let two = BigCount::from(2);
        let mut taken = Vec::new();
        for iv in self.intervals.iter_mut() {
            if taken.len() >= requester_kmax {
                break;
            }
            if iv.len() < two {
                continue;
            }
            let mid = iv.a.midpoint(&iv.b);
            taken.push(Interval {
                a: mid.clone(),
                b: std::mem::replace(&mut iv.b, mid),
            });
        }
        if !taken.is_empty() {
            self.modified = true;
        }
        taken
    }
}
