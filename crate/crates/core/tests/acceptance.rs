//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with a
//! nonzero status if any criterion fails.

use std::time::{Duration, Instant};

use chaos_stein::graph::{
    asymptotic_normality_check, ln_variance_asymptotic, subgraph_count_kernels, variance_exact,
    GraphSpec, PRule, SubgraphProfile,
};
use chaos_stein::montecarlo::{count_copies, rng_for, sample_gnp, scaling_study, BitGraph, Counter, ScalingConfig};
use chaos_stein::sampling::random_kernel;
use chaos_stein::verify::{
    bound_grid, closed_form_families, closed_form_mismatch, core_suite, kernels_suite,
    multiplication_residual, SuiteReport, VerifyConfig,
};
use chaos_stein::{Functional, OutcomeSpace, SymmetricKernel};
use rand::Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn run(id: &str, title: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    println!(
        "criterion {id:<3} {} {title}: {} [{:.1}s]",
        if out.passed { "PASS" } else { "FAIL" },
        out.detail,
        start.elapsed().as_secs_f64()
    );
    out.passed
}

fn summarize(reports: &[SuiteReport], names: &[&str]) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for name in names {
        let mut trials = 0;
        let mut failures = 0;
        let mut worst = f64::NEG_INFINITY;
        for r in reports {
            let c = r.check(name).expect("check present");
            trials += c.trials;
            failures += c.failures;
            worst = worst.max(c.max_residual);
        }
        ok &= failures == 0 && trials > 0;
        parts.push(format!("{name} {failures}/{trials} fail, max {worst:.1e}"));
    }
    (ok, parts.join("; "))
}

/// `I_n(f)` by summing over every ordered tuple of distinct coordinates.
fn brute_multiple_integral(space: OutcomeSpace, f: &SymmetricKernel) -> Functional {
    let n = f.order();
    let m = space.m();
    Functional::from_fn(space, |w| {
        let y: Vec<f64> = (0..m)
            .map(|k| if w >> k & 1 == 1 { space.y_plus() } else { space.y_minus() })
            .collect();
        let mut total = 0.0;
        let mut tuple = vec![0u32; n];
        fn rec(d: usize, tuple: &mut [u32], m: usize, f: &SymmetricKernel, y: &[f64], acc: f64, total: &mut f64) {
            if d == tuple.len() {
                *total += f.get(tuple) * acc;
                return;
            }
            for i in 0..m as u32 {
                if tuple[..d].contains(&i) {
                    continue;
                }
                tuple[d] = i;
                rec(d + 1, tuple, m, f, y, acc * y[i as usize], total);
            }
        }
        rec(0, &mut tuple, m, f, &y, 1.0, &mut total);
        total
    })
}

fn criterion_1() -> Outcome {
    let mut reports = Vec::new();
    for m in [6, 10, 12] {
        for (i, p) in [0.2, 0.5, 0.7].into_iter().enumerate() {
            let cfg = VerifyConfig { m, p, seed: 1000 + 10 * m as u64 + i as u64, trials: 200 };
            reports.push(core_suite(&cfg).expect("core suite runs"));
        }
    }
    let (ok, detail) = summarize(
        &reports,
        &[
            "isometry",
            "product rule",
            "gradient on chaos",
            "covariance identity",
            "duality",
            "divergence two routes",
            "chaos round trip",
            "L after L^-1",
            "semigroup property",
        ],
    );
    // direct ordered-tuple sums against the subset evaluation
    let mut oracle_worst: f64 = 0.0;
    let mut rng = rng_for(99, 0);
    for p in [0.2, 0.7] {
        let space = OutcomeSpace::new(6, p).unwrap();
        for n in 0..=4 {
            let f = random_kernel(n, 6, 8, &mut rng);
            let direct = brute_multiple_integral(space, &f);
            oracle_worst = oracle_worst.max(f.evaluate(space).unwrap().sup_distance(&direct).unwrap());
        }
    }
    Outcome {
        passed: ok && oracle_worst < 1e-10,
        detail: format!("{detail}; tuple-sum oracle max {oracle_worst:.1e}"),
    }
}

fn criterion_2() -> Outcome {
    let mut reports = Vec::new();
    for (i, (m, p)) in [(10, 0.3), (8, 0.5), (8, 0.8)].into_iter().enumerate() {
        let cfg = VerifyConfig { m, p, seed: 2000 + i as u64, trials: 200 };
        reports.push(kernels_suite(&cfg).expect("kernels suite runs"));
    }
    let (ok, detail) = summarize(
        &reports,
        &[
            "Stein bound",
            "contraction bound l<k",
            "contraction bound l=k",
            "Skorokhod isometry",
            "Skorokhod bound",
            "Mehler bound",
        ],
    );
    Outcome { passed: ok, detail }
}

fn criterion_3() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    let mut rng = rng_for(3000, 0);
    for p in [0.3, 0.5] {
        let space = OutcomeSpace::new(10, p).unwrap();
        for n in 0..=6usize {
            for m in 0..=(6 - n) {
                for density in [4, 40] {
                    let f = random_kernel(n, 10, density, &mut rng);
                    let g = random_kernel(m, 10, density, &mut rng);
                    worst = worst.max(multiplication_residual(space, &f, &g).unwrap());
                    pairs += 1;
                }
            }
        }
    }
    Outcome {
        passed: worst < 1e-10,
        detail: format!("{pairs} kernel pairs, max pointwise residual {worst:.2e}"),
    }
}

/// Canonical form of a small edge list: the lexicographically least sorted
/// edge list over all relabellings of its vertices.
fn canonical(edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut verts: Vec<usize> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
    verts.sort_unstable();
    verts.dedup();
    let k = verts.len();
    let local: Vec<(usize, usize)> = edges
        .iter()
        .map(|&(a, b)| (verts.binary_search(&a).unwrap(), verts.binary_search(&b).unwrap()))
        .collect();
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best: Option<Vec<(usize, usize)>> = None;
    fn heap(i: usize, perm: &mut Vec<usize>, local: &[(usize, usize)], best: &mut Option<Vec<(usize, usize)>>) {
        if i <= 1 {
            let mut e: Vec<(usize, usize)> = local
                .iter()
                .map(|&(a, b)| {
                    let (x, y) = (perm[a], perm[b]);
                    (x.min(y), x.max(y))
                })
                .collect();
            e.sort_unstable();
            if best.as_ref().is_none_or(|b| e < *b) {
                *best = Some(e);
            }
            return;
        }
        for j in 0..i {
            heap(i - 1, perm, local, best);
            let swap = if i % 2 == 0 { j } else { 0 };
            perm.swap(swap, i - 1);
        }
    }
    heap(k, &mut perm, &local, &mut best);
    best.unwrap_or_default()
}

/// Copies of `pattern` in `host` by enumerating `e_G`-edge subsets of the
/// host, pruned once they span more than `v_G` vertices.
fn brute_count(host: &[(usize, usize)], pattern: &GraphSpec) -> u64 {
    let target_edges: Vec<(usize, usize)> =
        pattern.edges().iter().map(|&(a, b)| (a as usize, b as usize)).collect();
    let target = canonical(&target_edges);
    let (e, v) = (pattern.edge_count(), pattern.vertex_count());
    fn rec(
        host: &[(usize, usize)],
        start: usize,
        chosen: &mut Vec<(usize, usize)>,
        verts: u64,
        e: usize,
        v: usize,
        target: &[(usize, usize)],
        count: &mut u64,
    ) {
        if verts.count_ones() as usize > v {
            return;
        }
        if chosen.len() == e {
            if verts.count_ones() as usize == v && canonical(chosen) == target {
                *count += 1;
            }
            return;
        }
        for i in start..host.len() {
            let (a, b) = host[i];
            chosen.push((a, b));
            rec(host, i + 1, chosen, verts | 1 << a | 1 << b, e, v, target, count);
            chosen.pop();
        }
    }
    let mut count = 0;
    rec(host, 0, &mut Vec::new(), 0, e, v, &target, &mut count);
    count
}

fn criterion_4() -> Outcome {
    let patterns = [
        GraphSpec::single_edge(),
        GraphSpec::path(2),
        GraphSpec::star(3),
        GraphSpec::triangle(),
    ];
    let mut worst_point: f64 = 0.0;
    let mut worst_var: f64 = 0.0;
    let mut cases = 0;
    for g in &patterns {
        for n in g.vertex_count().max(2)..=5 {
            let edges = n * (n - 1) / 2;
            for p in [0.2, 0.5, 0.7] {
                let space = OutcomeSpace::new(edges, p).unwrap();
                // enumerated count of the pattern on every outcome
                let counts = Functional::from_fn(space, |w| {
                    let host: Vec<(usize, usize)> = (0..edges)
                        .filter(|&i| w >> i & 1 == 1)
                        .map(|i| edge_of_index(i))
                        .collect();
                    brute_count(&host, g) as f64
                });
                let (mean, var) = (counts.expect(), counts.variance());
                let target = counts.map(|x| (x - mean) / var.sqrt());
                let chaos = subgraph_count_kernels(g, n, p).unwrap();
                let recon = chaos.evaluate_direct(space).unwrap();
                worst_point = worst_point.max(recon.sup_distance(&target).unwrap());
                let iso_var = chaos.variance() * var;
                let exact = variance_exact(g, n, p).unwrap();
                worst_var = worst_var.max((iso_var - exact).abs() / exact).max((exact - var).abs() / var);
                cases += 1;
            }
        }
    }
    Outcome {
        passed: worst_point < 1e-9 && worst_var < 1e-9,
        detail: format!("{cases} cases, max pointwise {worst_point:.2e}, max relative variance error {worst_var:.2e}"),
    }
}

fn edge_of_index(i: usize) -> (usize, usize) {
    let mut v = 1;
    while v * (v + 1) / 2 <= i {
        v += 1;
    }
    (i - v * (v - 1) / 2, v)
}

fn criterion_5() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut points = 0;
    let mut branch_mismatches = 0;
    for (family, graph) in closed_form_families() {
        let profile = SubgraphProfile::exact(&graph).unwrap();
        for (n, p) in bound_grid(graph.vertex_count()) {
            let d = closed_form_mismatch(family, &profile, n, p).unwrap();
            if d.is_infinite() {
                branch_mismatches += 1;
            } else {
                worst = worst.max(d);
            }
            points += 1;
        }
    }
    Outcome {
        passed: branch_mismatches == 0 && worst < 1e-12,
        detail: format!("{points} grid points, {branch_mismatches} branch mismatches, max log difference {worst:.2e}"),
    }
}

fn criterion_6() -> Outcome {
    let ns = [10, 15, 20, 25, 30, 35, 40];
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    let mut drift: f64 = 0.0;
    let mut over = Vec::new();
    for (name, g) in [("triangle", GraphSpec::triangle()), ("C4", GraphSpec::cycle(4))] {
        let profile = SubgraphProfile::exact(&g).unwrap();
        for p in [0.1, 0.3, 0.5, 0.8] {
            let log_ratio = |n: usize| variance_exact(&g, n, p).unwrap().ln() - ln_variance_asymptotic(&profile, n, p);
            for &n in &ns {
                let r = log_ratio(n).exp();
                lo = lo.min(r);
                hi = hi.max(r);
            }
            for n in [10, 15, 20] {
                let d = (log_ratio(2 * n) - log_ratio(n)).abs();
                drift = drift.max(d);
                if d > 0.5 {
                    over.push(format!("{name} p={p} n={n}->{}: {d:.3}", 2 * n));
                }
            }
        }
    }
    Outcome {
        passed: lo >= 1e-2 && hi <= 1e2 && drift <= 0.5,
        detail: format!(
            "ratio range [{lo:.3}, {hi:.3}], max log-ratio drift per doubling {drift:.3}; over 0.5: [{}]",
            over.join(", ")
        ),
    }
}

fn criterion_7() -> Outcome {
    let triangle = GraphSpec::triangle();
    let runs = [
        ("a", 0.0, 0.5, vec![16, 32, 64, 128], 7_001u64),
        ("b", 0.7, 1.0, vec![32, 64, 128, 256], 7_002u64),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (tag, alpha, c, n_list, seed) in runs {
        let start = Instant::now();
        let study = scaling_study(
            &triangle,
            &ScalingConfig { alpha, c, n_list, reps: 20_000, seed, counter: None },
        )
        .unwrap();
        let elapsed = start.elapsed();
        let pass = (study.fitted_slope - study.predicted_slope).abs() <= 0.3 && elapsed < Duration::from_secs(600);
        ok &= pass;
        let dks: Vec<String> = study.points.iter().map(|pt| format!("{:.4}", pt.dk_hat)).collect();
        parts.push(format!(
            "({tag}) alpha={alpha} slope {:.3} vs {:.3}, dk=[{}], {:.1}s",
            study.fitted_slope,
            study.predicted_slope,
            dks.join(" "),
            elapsed.as_secs_f64()
        ));
    }
    parts.push("constants of the bound are unknown; only exponents are compared".into());
    Outcome { passed: ok, detail: parts.join("; ") }
}

fn criterion_8() -> Outcome {
    let ns: Vec<usize> = (0..8).map(|i| 100 << i).collect();
    let tri = GraphSpec::triangle();
    let k4 = GraphSpec::complete(4);
    let sampled = |f: &dyn Fn(f64) -> f64| PRule::Sampled(ns.iter().map(|&n| f(n as f64)).collect());
    // (pattern, rule, normal): n p^beta -> inf and n^2 (1-p) -> inf
    let cases: Vec<(&str, GraphSpec, PRule, bool)> = vec![
        ("triangle n^-0.9", tri.clone(), PRule::Power { c: 1.0, alpha: 0.9 }, true),
        ("triangle n^-1.1", tri.clone(), PRule::Power { c: 1.0, alpha: 1.1 }, false),
        ("triangle 2/n", tri.clone(), PRule::Power { c: 2.0, alpha: 1.0 }, false),
        ("triangle p=0.5", tri.clone(), PRule::Power { c: 0.5, alpha: 0.0 }, true),
        ("triangle 1-n^-3", tri.clone(), PRule::NearOne { c: 1.0, gamma: 3.0 }, false),
        ("triangle 1-n^-2", tri.clone(), PRule::NearOne { c: 1.0, gamma: 2.0 }, false),
        ("triangle 1-n^-1.5", tri.clone(), PRule::NearOne { c: 1.0, gamma: 1.5 }, true),
        ("K4 n^-0.6", k4.clone(), PRule::Power { c: 1.0, alpha: 0.6 }, true),
        ("K4 n^-0.7", k4.clone(), PRule::Power { c: 1.0, alpha: 0.7 }, false),
        ("K4 n^-2/3", k4.clone(), PRule::Power { c: 1.0, alpha: 2.0 / 3.0 }, false),
        ("K4 1-n^-2.5", k4.clone(), PRule::NearOne { c: 1.0, gamma: 2.5 }, false),
        ("path2 n^-1.4", GraphSpec::path(2), PRule::Power { c: 1.0, alpha: 1.4 }, true),
        ("path2 n^-1.6", GraphSpec::path(2), PRule::Power { c: 1.0, alpha: 1.6 }, false),
        ("star3 2n^-1.3", GraphSpec::star(3), PRule::Power { c: 2.0, alpha: 1.3 }, true),
        ("edge n^-1.9", GraphSpec::single_edge(), PRule::Power { c: 1.0, alpha: 1.9 }, true),
        ("edge n^-2.1", GraphSpec::single_edge(), PRule::Power { c: 1.0, alpha: 2.1 }, false),
        ("C4 n^-0.5", GraphSpec::cycle(4), PRule::Power { c: 1.0, alpha: 0.5 }, true),
        ("C5 1-n^-1/2", GraphSpec::cycle(5), PRule::NearOne { c: 0.5, gamma: 1.0 }, true),
        ("triangle sampled 5/n", tri.clone(), sampled(&|n| 5.0 / n), false),
        ("triangle sampled n^-1/2", tri.clone(), sampled(&|n| n.powf(-0.5)), true),
        ("triangle sampled 1-1/n^2", tri.clone(), sampled(&|n| 1.0 - 1.0 / (n * n)), false),
        ("K4 sampled log n/n^0.6", k4.clone(), sampled(&|n| n.ln() * n.powf(-2.0 / 3.0)), true),
    ];
    let mut wrong = Vec::new();
    for (name, g, rule, expected) in &cases {
        let profile = SubgraphProfile::exact(g).unwrap();
        let verdict = asymptotic_normality_check(&profile, &ns, rule).unwrap();
        if verdict.normal != *expected {
            wrong.push(*name);
        }
    }
    Outcome {
        passed: wrong.is_empty(),
        detail: format!("{} cases, disagreements: {:?}", cases.len(), wrong),
    }
}

fn criterion_9() -> Outcome {
    let templates = [
        GraphSpec::triangle(),
        GraphSpec::path(3),
        GraphSpec::star(3),
        GraphSpec::cycle(4),
        GraphSpec::complete(4),
    ];
    let counters = [Counter::TriangleFast, Counter::CliqueFast, Counter::CycleFast, Counter::Generic];
    let mut mismatches = 0;
    let mut comparisons = 0;
    let mut rng = rng_for(9000, 0);
    for trial in 0..100u64 {
        let n = rng.random_range(4..=12usize);
        let p = rng.random_range(0.15..0.65);
        let host: BitGraph = sample_gnp(n, p, &mut rng_for(9001, trial)).unwrap();
        let edges = host.edges();
        for g in &templates {
            let oracle = brute_count(&edges, g);
            for counter in counters {
                if let Ok(c) = count_copies(&host, g, counter) {
                    comparisons += 1;
                    if c != oracle {
                        mismatches += 1;
                    }
                }
            }
        }
    }
    Outcome {
        passed: mismatches == 0,
        detail: format!("{comparisons} counter/oracle comparisons on 100 random graphs, {mismatches} mismatches"),
    }
}

fn main() {
    // `cargo test` passes harness flags; listing must not run the suite
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: Vec<(&str, &str, fn() -> Outcome)> = vec![
        ("1", "operator identities", criterion_1),
        ("2", "inequalities", criterion_2),
        ("3", "multiplication formula", criterion_3),
        ("4", "subgraph count reconstruction", criterion_4),
        ("5", "closed forms vs general bound", criterion_5),
        ("6", "variance equivalence", criterion_6),
        ("7", "Monte Carlo scaling", criterion_7),
        ("8", "normality threshold", criterion_8),
        ("9", "counter equivalence", criterion_9),
    ];
    let mut failed = Vec::new();
    for (id, title, f) in criteria {
        if !run(id, title, f) {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
