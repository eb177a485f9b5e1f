mod common;

use std::collections::HashSet;
use std::sync::Arc;

use common::{brute_force, random_instance, rng};
use pfsp_core::bound::lb1;
use pfsp_core::bound::Subproblem;
use pfsp_core::explorer::{explore_step, pool_run, ExplorerPool, Incumbent, PoolConfig, StepOutcome};
use pfsp_core::factoradic::{BigCount, Endpoint, Factoradic};
use pfsp_core::instance::{Instance, Job, Time};
use pfsp_core::ivm::Ivm;
use pfsp_core::workunit::Interval;
use rand::Rng;

/// Every leaf reached by one IVM over `[a, b)`, without pruning.
fn ivm_census(inst: &Instance, a: u64, b: u64) -> (Vec<Vec<Job>>, u64) {
    let n = inst.jobs();
    let mut ivm = Ivm::new(n);
    let a = Factoradic::from_decimal(&BigCount::from(a), n).unwrap();
    let b = Endpoint::from_decimal(&BigCount::from(b), n).unwrap();
    let mut nodes = ivm.init_at(&a, &b, inst, Time::MAX).unwrap();
    let mut leaves = Vec::new();
    loop {
        match explore_step(&mut ivm, inst, 0, Time::MAX).unwrap() {
            StepOutcome::Exhausted => break,
            StepOutcome::Leaf(p) => leaves.push(p),
            StepOutcome::Decomposed => nodes += 1,
            StepOutcome::ImprovedBest(_) => unreachable!("incumbent 0 cannot be beaten"),
        }
        assert!(ivm.rows_consistent());
    }
    (leaves, nodes)
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

#[test]
fn full_interval_visits_every_permutation_once() {
    let mut r = rng(10);
    for n in 1..=7 {
        let inst = random_instance(&mut r, n, 3);
        let (leaves, _) = ivm_census(&inst, 0, factorial(n));
        let set: HashSet<_> = leaves.iter().cloned().collect();
        assert_eq!(leaves.len() as u64, factorial(n), "n = {n}");
        assert_eq!(set.len(), leaves.len());
    }
}

#[test]
fn partitions_cover_exactly() {
    let mut r = rng(11);
    for _ in 0..40 {
        let n = r.gen_range(3..=7);
        let inst = random_instance(&mut r, n, 4);
        let total = factorial(n);
        let mut cuts: Vec<u64> = (0..r.gen_range(1..6)).map(|_| r.gen_range(0..=total)).collect();
        cuts.extend([0, total]);
        cuts.sort();
        let mut all = Vec::new();
        for w in cuts.windows(2).filter(|w| w[0] < w[1]) {
            let (leaves, _) = ivm_census(&inst, w[0], w[1]);
            all.extend(leaves);
        }
        let set: HashSet<_> = all.iter().cloned().collect();
        assert_eq!(all.len() as u64, total);
        assert_eq!(set.len() as u64, total);
    }
}

#[test]
fn full_census_at_eight_jobs() {
    let mut r = rng(12);
    let inst = random_instance(&mut r, 8, 2);
    let (leaves, _) = ivm_census(&inst, 0, factorial(8));
    let set: HashSet<_> = leaves.into_iter().collect();
    assert_eq!(set.len() as u64, factorial(8));
}

#[test]
fn replay_is_deterministic() {
    let mut r = rng(13);
    for _ in 0..50 {
        let n = r.gen_range(3..=9);
        let inst = random_instance(&mut r, n, 3);
        let a = BigCount::from(r.gen_range(0..factorial(n)));
        let af = Factoradic::from_decimal(&a, n).unwrap();
        let mut x = Ivm::new(n);
        let mut y = Ivm::new(n);
        let ub = r.gen_range(100..600);
        let nx = x.init_at(&af, &Endpoint::Total, &inst, ub).unwrap();
        let ny = y.init_at(&af, &Endpoint::Total, &inst, ub).unwrap();
        assert_eq!(nx, ny);
        assert!(nx as usize <= n);
        assert_eq!(x.position_prefix(), y.position_prefix());
        assert_eq!(x.level(), y.level());
        // the replay stops at a pruned ancestor of `a` or at `a` itself
        let l = x.position_prefix().len();
        assert_eq!(x.position_prefix(), &af.digits()[..l]);
        if x.position_decimal() != a {
            assert!(x.is_pruned(l - 1, af.digits()[l - 1] as usize));
        }
        assert_eq!(x.decode(), y.decode());
    }
}

#[test]
fn single_explorer_finds_optimum() {
    let mut r = rng(14);
    for _ in 0..30 {
        let n = r.gen_range(2..=8);
        let m = r.gen_range(2..=5);
        let inst = Arc::new(random_instance(&mut r, n, m));
        let (opt, _) = brute_force(&inst);
        let mut config = PoolConfig::with_explorers(1);
        config.batch = 64;
        let out = pool_run(inst.clone(), config, Time::MAX, &[Interval::full(n)]).unwrap();
        assert_eq!(out.best_value, opt);
        let best = out.best.unwrap();
        assert_eq!(inst.makespan(&best.perm).unwrap(), opt);
    }
}

#[test]
fn optimal_bound_gives_no_improvement() {
    let mut r = rng(15);
    for _ in 0..20 {
        let n = r.gen_range(3..=8);
        let inst = Arc::new(random_instance(&mut r, n, 4));
        let (opt, _) = brute_force(&inst);
        for k in [1, 4] {
            let out = pool_run(inst.clone(), PoolConfig::with_explorers(k), opt, &[Interval::full(n)])
                .unwrap();
            assert!(!out.improved());
            assert_eq!(out.best_value, opt);
            let out = pool_run(
                inst.clone(),
                PoolConfig::with_explorers(k),
                opt + 1,
                &[Interval::full(n)],
            )
            .unwrap();
            assert_eq!(out.best_value, opt);
        }
    }
}

#[test]
fn pool_census_is_exact_for_every_pool_size() {
    let mut r = rng(16);
    for n in [5, 6, 7] {
        let inst = Arc::new(random_instance(&mut r, n, 3));
        for k in [1, 2, 4, 8, 16] {
            let config = PoolConfig {
                explorers: k,
                threads: 1,
                batch: 16,
                prune: false,
                census: true,
                timeline_every: None,
            };
            let out = pool_run(inst.clone(), config, Time::MAX, &[Interval::full(n)]).unwrap();
            let set: HashSet<_> = out.census.iter().cloned().collect();
            assert_eq!(out.census.len() as u64, factorial(n), "n={n} K={k}");
            assert_eq!(set.len() as u64, factorial(n));
        }
    }
}

#[test]
fn node_count_overhead_is_bounded() {
    // with a fixed incumbent the tree is fixed: splitting only adds replays
    let mut r = rng(17);
    for _ in 0..10 {
        let n = r.gen_range(6..=8);
        let inst = Arc::new(random_instance(&mut r, n, 5));
        let (opt, _) = brute_force(&inst);
        let ub = opt + 1;
        let run = |k: usize| {
            let config = PoolConfig {
                explorers: k,
                threads: 1,
                batch: 8,
                prune: true,
                census: false,
                timeline_every: None,
            };
            let inc = Arc::new(Incumbent::new(ub));
            let mut pool = ExplorerPool::new(inst.clone(), config, inc.clone()).unwrap();
            pool.set_min_steal(BigCount::from(2));
            pool.assign(&[Interval::full(n)]).unwrap();
            // keep the tree fixed: never let improvements tighten pruning
            assert_eq!(inc.value(), ub);
            pool.run_to_completion().unwrap();
            pool.stats()
        };
        let base = run(1);
        for k in [2, 4, 8] {
            let s = run(k);
            let intervals = s.steals + 1;
            assert!(
                s.decomposed <= base.decomposed + intervals * n as u64,
                "K={k}: {} vs {} with {} intervals",
                s.decomposed,
                base.decomposed,
                intervals
            );
            assert!(s.decomposed + intervals * n as u64 >= base.decomposed);
        }
    }
}

#[test]
fn every_node_on_optimal_path_passes_bound() {
    let mut r = rng(18);
    let inst = random_instance(&mut r, 7, 4);
    let (opt, perm) = brute_force(&inst);
    for d1 in 0..=7 {
        let sub = Subproblem::new(perm.clone(), d1, 0).unwrap();
        assert!(lb1(&inst, &sub) <= opt);
    }
}

#[test]
fn snapshot_of_partial_interval() {
    let mut r = rng(19);
    let inst = Arc::new(random_instance(&mut r, 4, 3));
    let config = PoolConfig {
        explorers: 2,
        threads: 1,
        batch: 1,
        prune: false,
        census: false,
        timeline_every: None,
    };
    let mut pool = ExplorerPool::new(inst, config, Arc::new(Incumbent::new(Time::MAX))).unwrap();
    pool.assign(&[Interval::new(5u64, 24u64)]).unwrap();
    assert_eq!(pool.snapshot(), vec![Interval::new(5u64, 24u64)]);
}
