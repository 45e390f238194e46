//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Criteria 4-7 share a single run of the default benchmark matrix.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use labhh::bench::{self, BenchmarkConfig, BenchmarkRun, Method, Report, Solver, Variant};
use labhh::construction::multi_start_nn;
use labhh::controller::{Context, LinUcb};
use labhh::instance::{distance_matrix, DistanceMatrix};
use labhh::landscape::mst_total_weight;
use labhh::metrics::{convergence_auc, final_gap};
use labhh::search::{run, RunConfig, TracePoint};
use labhh::tour::{apply_move, check_permutation, move_delta, random_move, tour_length};
use labhh::{generate, Family, Operator, Tour};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_tour(dm: &DistanceMatrix, rng: &mut ChaCha8Rng) -> Tour {
    use rand::seq::SliceRandom;
    let mut order: Vec<usize> = (0..dm.n()).collect();
    order.shuffle(rng);
    Tour::new(order, dm).unwrap()
}

fn random_op(rng: &mut ChaCha8Rng) -> Operator {
    Operator::ALL[rng.random_range(0..4)]
}

/// 1. Permutation preservation and delta soundness.
fn correctness_invariants() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let sizes = [10usize, 50, 200];

    let mut applied = 0usize;
    let mut perm_ok = true;
    let mut cache_err: f64 = 0.0;
    for (k, &n) in sizes.iter().enumerate() {
        let inst = generate(Family::ALL[k], n, 100 + k as u64).unwrap();
        let dm = distance_matrix(&inst);
        let mut tour = random_tour(&dm, &mut rng);
        let steps = if k == 0 { 333_334 } else { 333_333 };
        for s in 0..steps {
            let m = random_move(random_op(&mut rng), n, &mut rng);
            let d = move_delta(&tour, m, &dm).unwrap();
            tour.apply_in_place(m, d, &dm);
            applied += 1;
            if s % 10_000 == 0 || s + 1 == steps {
                perm_ok &= check_permutation(tour.order(), n).is_ok();
                let exact = tour_length(tour.order(), &dm).unwrap();
                cache_err = cache_err.max((tour.length() - exact).abs() / exact.max(1.0));
            }
        }
    }

    let mut worst: f64 = 0.0;
    let mut sampled = 0usize;
    for (k, &n) in sizes.iter().enumerate() {
        let inst = generate(Family::ALL[k + 2], n, 200 + k as u64).unwrap();
        let dm = distance_matrix(&inst);
        let per_size = if k == 0 { 33_334 } else { 33_333 };
        let mut tour = random_tour(&dm, &mut rng);
        for s in 0..per_size {
            if s % 1000 == 0 {
                tour = random_tour(&dm, &mut rng);
            }
            let m = random_move(random_op(&mut rng), n, &mut rng);
            let d = move_delta(&tour, m, &dm).unwrap();
            let after = apply_move(&tour, m, &dm).unwrap();
            let recomputed = tour_length(after.order(), &dm).unwrap() - tour_length(tour.order(), &dm).unwrap();
            worst = worst.max((d - recomputed).abs() / tour.length().max(1.0));
            sampled += 1;
            if rng.random_bool(0.5) {
                tour = after;
            }
        }
    }
    let elapsed = started.elapsed();
    let pass = applied == 1_000_000
        && perm_ok
        && cache_err < 1e-9
        && sampled == 100_000
        && worst < 1e-9
        && elapsed < Duration::from_secs(60);
    outcome(
        pass,
        format!(
            "{applied} applications, permutations intact: {perm_ok}, cached-length drift {cache_err:.1e}; \
             {sampled} deltas, max relative error {worst:.1e}; {:.1} s (limit 60 s)",
            elapsed.as_secs_f64()
        ),
    )
}

/// Kruskal with union-find over all pairs.
fn kruskal(dm: &DistanceMatrix) -> f64 {
    let n = dm.n();
    let mut edges: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            edges.push((dm.get(i, j), i, j));
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut total = 0.0;
    for (w, i, j) in edges {
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        if a != b {
            parent[a] = b;
            total += w;
        }
    }
    total
}

/// Optimum by enumerating every order that starts at site 0, with the count
/// of orders visited.
fn exhaustive_optimum(dm: &DistanceMatrix) -> (f64, usize) {
    fn permute(k: usize, order: &mut [usize], dm: &DistanceMatrix, best: &mut f64, visited: &mut usize) {
        let n = order.len();
        if k == n {
            let len: f64 = (0..n).map(|i| dm.get(order[i], order[(i + 1) % n])).sum();
            *best = best.min(len);
            *visited += 1;
            return;
        }
        for j in k..n {
            order.swap(k, j);
            permute(k + 1, order, dm, best, visited);
            order.swap(k, j);
        }
    }
    let mut order: Vec<usize> = (0..dm.n()).collect();
    let (mut best, mut visited) = (f64::INFINITY, 0);
    permute(1, &mut order, dm, &mut best, &mut visited);
    (best, visited)
}

/// 2. MST and small-instance optimality oracles.
fn oracle_equivalence() -> Outcome {
    let started = Instant::now();
    let mut worst_mst: f64 = 0.0;
    for k in 0..100u64 {
        let family = Family::ALL[(k % 5) as usize];
        let n = 2 + (k as usize % 31);
        let dm = distance_matrix(&generate(family, n, 1000 + k).unwrap());
        worst_mst = worst_mst.max((mst_total_weight(&dm).unwrap() - kruskal(&dm)).abs());
    }
    let mut solved = 0;
    for k in 0..20u64 {
        let inst = generate(Family::ALL[(k % 5) as usize], 8, 500 + k).unwrap();
        let (opt, visited) = exhaustive_optimum(&distance_matrix(&inst));
        assert_eq!(visited, 5040, "7! orders with site 0 fixed");
        let cfg = RunConfig { budget: 5000, seed: 1, ..RunConfig::default() };
        let r = run(&inst, &cfg).unwrap();
        if r.best_length <= opt * (1.0 + 1e-9) {
            solved += 1;
        }
    }
    let elapsed = started.elapsed();
    let pass = worst_mst < 1e-9 && solved >= 18 && elapsed < Duration::from_secs(120);
    outcome(
        pass,
        format!(
            "Prim vs Kruskal max difference {worst_mst:.1e} over 100 instances; LA-BHH optimal on {solved}/20 \
             (need 18); {:.1} s (limit 120 s)",
            elapsed.as_secs_f64()
        ),
    )
}

/// Closed-form ridge estimate for an arm pulled `pulls` times with context
/// `z` and reward sum `sum`: `A = I + m zz^T`, `b = S z`, so
/// `theta^T z = S |z|^2 / (1 + m |z|^2)`.
fn ridge_mean(sum: f64, pulls: u64, zz: f64) -> f64 {
    sum * zz / (1.0 + pulls as f64 * zz)
}

/// 3. Two-arm synthetic bandit.
fn controller_sanity() -> Outcome {
    let z = Context::from_slice(&[1.0, 0.3, 0.7, 0.1, 0.5, 0.2, 0.9, 0.4, 0.0, 0.6, 0.8, 0.25, 0.05]);
    let zz: f64 = z.as_slice().iter().map(|x| x * x).sum();
    let means = [0.8, 0.2];

    let mut bandit = LinUcb::new(2, z.dim(), 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut env = ChaCha8Rng::seed_from_u64(4);
    let mut late_best = 0;
    for t in 0..5000 {
        let a = bandit.select(&z, &mut rng).unwrap();
        let r = if env.random_bool(means[a]) { 1.0 } else { 0.0 };
        bandit.update(a, &z, r).unwrap();
        if t >= 4000 && a == 0 {
            late_best += 1;
        }
    }

    let mut greedy = LinUcb::new(2, z.dim(), 0.0);
    let mut sums = [0.0; 2];
    let mut pulls = [0u64; 2];
    let mut mismatches = 0;
    let mut greedy_late = 0;
    for t in 0..5000 {
        let a = greedy.select(&z, &mut rng).unwrap();
        let est = [ridge_mean(sums[0], pulls[0], zz), ridge_mean(sums[1], pulls[1], zz)];
        let top = est[0].max(est[1]);
        let tol = 1e-12 * top.abs().max(1e-300);
        if (est[a] - top).abs() > tol {
            mismatches += 1;
        }
        let r = if env.random_bool(means[a]) { 1.0 } else { 0.0 };
        greedy.update(a, &z, r).unwrap();
        sums[a] += r;
        pulls[a] += 1;
        if t >= 4000 && a == 0 {
            greedy_late += 1;
        }
    }
    let share = late_best as f64 / 1000.0;
    let pass = share > 0.9 && mismatches == 0;
    outcome(
        pass,
        format!(
            "alpha=1 better-arm share {share:.3} over the last 1000 steps (need > 0.9); alpha=0 selections \
             differing from the closed-form ridge argmax: {mismatches}/5000, late share {:.3}",
            greedy_late as f64 / 1000.0
        ),
    )
}

fn non_increasing(trace: &[TracePoint]) -> bool {
    trace.windows(2).all(|w| w[1].best_length <= w[0].best_length && w[1].iteration >= w[0].iteration)
}

/// 4. Greedy runs never end above the multi-start NN tour.
fn greedy_dominance(run: &BenchmarkRun) -> Outcome {
    let nn: Vec<f64> = run
        .instances
        .iter()
        .map(|i| multi_start_nn(&distance_matrix(i)).unwrap().length())
        .collect();
    let mut checked = 0;
    let mut violations = 0;
    let mut unsorted = 0;
    for r in &run.runs {
        if !non_increasing(&r.result.trace) {
            unsorted += 1;
        }
        if r.solver.uses_greedy_acceptance() {
            checked += 1;
            if r.result.best_length > nn[r.instance] || r.result.initial_length != nn[r.instance] {
                violations += 1;
            }
        }
    }
    outcome(
        violations == 0 && unsorted == 0 && checked > 0,
        format!(
            "{checked} greedy runs, {violations} above the NN start; {unsorted} of {} traces not non-increasing",
            run.runs.len()
        ),
    )
}

fn summary<'a>(report: &'a Report, label: &str) -> &'a bench::Summary {
    report.by_method.iter().find(|s| s.method == label).expect("method in report")
}

/// 5. Method ordering on the regenerated suite.
fn directional_table(report: &Report, elapsed: Duration) -> Outcome {
    let la = summary(report, "labhh");
    let rnd = summary(report, "random-hh");
    let nn = summary(report, "nn");
    let ucb = summary(report, "ucb-hh");
    let pass = la.mean_gap < rnd.mean_gap
        && la.mean_gap < nn.mean_gap
        && la.mean_auc < rnd.mean_auc
        && la.mean_gap <= ucb.mean_gap + 0.005
        && elapsed < Duration::from_secs(30 * 60);
    outcome(
        pass,
        format!(
            "gap LA-BHH {:.4} vs Random-HH {:.4}, NN {:.4}, UCB-HH {:.4}; AUC LA-BHH {:.4} vs Random-HH {:.4}; \
             matrix {:.0} s",
            la.mean_gap,
            rnd.mean_gap,
            nn.mean_gap,
            ucb.mean_gap,
            la.mean_auc,
            rnd.mean_auc,
            elapsed.as_secs_f64()
        ),
    )
}

/// 6. Ablation ordering.
fn directional_ablation(report: &Report, elapsed: Duration) -> Outcome {
    let full = report.ablation.iter().find(|r| r.variant == "full").expect("full row");
    let mut variants: Vec<_> = report.ablation.iter().filter(|r| r.variant != "full").collect();
    variants.sort_by(|a, b| b.mean_auc.total_cmp(&a.mean_auc));
    let rank = variants.iter().position(|r| r.variant == Variant::NoTwoOpt.name()).expect("variant") + 1;
    let no_learning = variants.iter().find(|r| r.variant == Variant::NoLearning.name()).expect("variant");
    let pass = variants.len() == 9
        && rank <= 2
        && no_learning.mean_auc > full.mean_auc
        && elapsed < Duration::from_secs(60 * 60);
    let order: Vec<String> = variants.iter().map(|r| format!("{} {:.4}", r.variant, r.mean_auc)).collect();
    outcome(
        pass,
        format!(
            "w/o 2-opt is AUC rank {rank} of {} (need <= 2); w/o learning {:.4} vs full {:.4}; worst-first: {}",
            variants.len(),
            no_learning.mean_auc,
            full.mean_auc,
            order.join(", ")
        ),
    )
}

/// 7. Metric identities on synthetic traces and on the benchmark rows.
fn metric_checks(run: &BenchmarkRun, report: &Report) -> Outcome {
    let mut worst_flat: f64 = 0.0;
    for (g, budget) in [(0.0, 1usize), (0.037, 20_000), (0.2, 7), (1.5, 1003)] {
        let reference = 3.25;
        let step = (budget / 500).max(1);
        let mut trace: Vec<TracePoint> = (0..=budget)
            .step_by(step)
            .map(|i| TracePoint { iteration: i, best_length: reference * (1.0 + g) })
            .collect();
        if trace.last().unwrap().iteration != budget {
            trace.push(TracePoint { iteration: budget, best_length: reference * (1.0 + g) });
        }
        let gap = final_gap(reference * (1.0 + g), reference).unwrap();
        worst_flat = worst_flat.max((convergence_auc(&trace, reference, budget).unwrap() - gap).abs());
    }
    for r in report.rows.iter().filter(|r| r.method == Method::Nn.name()) {
        worst_flat = worst_flat.max((r.auc - r.final_gap).abs());
    }

    let mut min_gap_nonzero = 0;
    for inst in &run.instances {
        let min = report
            .rows
            .iter()
            .filter(|r| r.instance_id == inst.id)
            .map(|r| r.final_gap)
            .fold(f64::INFINITY, f64::min);
        if min != 0.0 {
            min_gap_nonzero += 1;
        }
    }

    let mut worst_share: f64 = 0.0;
    let labels: Vec<String> = run.config.solvers().iter().filter(|s| s.is_hyper_heuristic()).map(|s| s.label()).collect();
    for label in &labels {
        let total: f64 = report.operator_usage.iter().filter(|u| &u.method == label).map(|u| u.share).sum();
        worst_share = worst_share.max((total - 1.0).abs());
    }
    let pass = worst_flat <= 1e-12 && min_gap_nonzero == 0 && worst_share <= 1e-9 && !labels.is_empty();
    outcome(
        pass,
        format!(
            "flat-trace |AUC - gap| max {worst_flat:.1e}; instances whose minimum gap is not 0: {min_gap_nonzero}/{}; \
             operator shares off 1 by at most {worst_share:.1e} over {} methods",
            run.instances.len(),
            labels.len()
        ),
    )
}

/// 8. Single default-budget run at n = 200.
fn runtime_order() -> Outcome {
    let inst = generate(Family::Uniform, 200, 42).unwrap();
    let started = Instant::now();
    let r = run(&inst, &RunConfig::default()).unwrap();
    let elapsed = started.elapsed();
    outcome(
        elapsed < Duration::from_secs(10) && r.budget == 20_000,
        format!(
            "n=200, T={} LA-BHH run in {:.3} s including setup (limit 10 s)",
            r.budget,
            elapsed.as_secs_f64()
        ),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut report_line = |id: u32, name: &'static str, o: Outcome| {
        println!("{} {id}. {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((id, name, o));
    };

    report_line(1, "correctness invariants", correctness_invariants());
    report_line(2, "oracle equivalence", oracle_equivalence());
    report_line(3, "controller sanity", controller_sanity());

    let cfg = BenchmarkConfig::default();
    let started = Instant::now();
    let (bench_run, report) = bench::run_benchmark(&cfg).expect("benchmark matrix");
    let elapsed = started.elapsed();
    println!(
        "     benchmark pool: {} instances, {} runs ({} methods + {} variants x {} seeds) in {:.1} s",
        bench_run.instances.len(),
        bench_run.runs.len(),
        cfg.methods.len(),
        cfg.variants.len(),
        cfg.seeds.len(),
        elapsed.as_secs_f64()
    );
    let primary = report
        .rows
        .iter()
        .filter(|r| r.method.parse::<Solver>().map(|s| matches!(s, Solver::Method(_))).unwrap_or(false))
        .count();
    println!("     primary rows: {primary} (45 x 8 x 3 = 1080)");

    report_line(4, "greedy dominance", greedy_dominance(&bench_run));
    report_line(5, "directional method ordering", directional_table(&report, elapsed));
    report_line(6, "directional ablation", directional_ablation(&report, elapsed));
    report_line(7, "metric unit checks", metric_checks(&bench_run, &report));
    report_line(8, "runtime order of magnitude", runtime_order());

    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!();
    if failed.is_empty() {
        println!("acceptance: {} of {} criteria passed", results.len(), results.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAILED criteria {failed:?}");
        ExitCode::FAILURE
    }
}
