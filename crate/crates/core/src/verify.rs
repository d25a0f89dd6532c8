//! Randomized identity and inequality suites over the exact operators.
//!
//! Each check records how many trials it ran, how many failed and the worst
//! residual seen. Identities report `|lhs - rhs|`; inequalities `lhs <= rhs`
//! report `lhs - rhs`, so a nonpositive residual means the bound held.

use std::fmt;

use rand::Rng;

use crate::bernoulli::{Functional, OutcomeSpace};
use crate::error::{Error, Result};
use crate::graph::{
    closed_form_ln_bound, count_functional, ln_variance_asymptotic, standardized_count_functional,
    subgraph_count_kernels, variance_exact, Family, GraphBoundReport, GraphSpec, SubgraphProfile,
    DEFAULT_DENSE_CUTOFF,
};
use crate::kernel::{contract, contract_unrestricted, factorial, multiply_chaos, SymmetricKernel};
use crate::montecarlo::rng_for;
use crate::sampling::{random_chaos_sum, random_functional, random_kernel, random_process};

/// Tolerance for pointwise and moment identities.
pub const IDENTITY_TOLERANCE: f64 = 1e-10;

/// Relative slack allowed on inequalities for rounding.
pub const INEQUALITY_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Core,
    Kernels,
    Graph,
}

impl Suite {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "core" => Ok(Suite::Core),
            "kernels" => Ok(Suite::Kernels),
            "graph" => Ok(Suite::Graph),
            other => Err(Error::InvalidArgument(format!(
                "unknown suite `{other}` (expected core, kernels or graph)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Core => "core",
            Suite::Kernels => "kernels",
            Suite::Graph => "graph",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub trials: usize,
    pub failures: usize,
    pub max_residual: f64,
    pub tolerance: f64,
}

impl Check {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            trials: 0,
            failures: 0,
            max_residual: f64::NEG_INFINITY,
            tolerance,
        }
    }

    /// Records `|lhs - rhs|` against the absolute tolerance.
    fn identity(&mut self, residual: f64) {
        self.trials += 1;
        self.max_residual = self.max_residual.max(residual);
        if !(residual <= self.tolerance) {
            self.failures += 1;
        }
    }

    /// Records `lhs <= rhs` up to relative slack.
    fn bound(&mut self, lhs: f64, rhs: f64) {
        self.trials += 1;
        self.max_residual = self.max_residual.max(lhs - rhs);
        if !(lhs <= rhs + self.tolerance * (1.0 + rhs.abs())) {
            self.failures += 1;
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.trials > 0
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<28} {} {}/{} max residual {:.3e} (tol {:.0e})",
            self.name,
            if self.passed() { "PASS" } else { "FAIL" },
            self.trials - self.failures,
            self.trials,
            self.max_residual,
            self.tolerance
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        write!(
            f,
            "suite {}: {}",
            self.suite.name(),
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyConfig {
    /// Number of Bernoulli coordinates.
    pub m: usize,
    pub p: f64,
    pub seed: u64,
    pub trials: usize,
}

pub fn run_suite(suite: Suite, config: &VerifyConfig) -> Result<SuiteReport> {
    match suite {
        Suite::Core => core_suite(config),
        Suite::Kernels => kernels_suite(config),
        Suite::Graph => graph_suite(),
    }
}

fn max_abs_diff(a: &Functional, b: &Functional) -> Result<f64> {
    a.sup_distance(b)
}

/// Isometry, product rule, gradient on chaos, covariance identity, duality,
/// chaos round trip, `L L^{-1}` and the semigroup property.
pub fn core_suite(config: &VerifyConfig) -> Result<SuiteReport> {
    let space = OutcomeSpace::new(config.m, config.p)?;
    let tol = IDENTITY_TOLERANCE;
    let mut iso = Check::new("isometry", tol);
    let mut prod = Check::new("product rule", tol);
    let mut grad = Check::new("gradient on chaos", tol);
    let mut cov = Check::new("covariance identity", tol);
    let mut dual = Check::new("duality", tol);
    let mut div = Check::new("divergence two routes", tol);
    let mut round = Check::new("chaos round trip", tol);
    let mut inv = Check::new("L after L^-1", tol);
    let mut semi = Check::new("semigroup property", tol);
    let spq = space.sqrt_pq();

    for t in 0..config.trials {
        let mut rng = rng_for(config.seed, t as u64);
        let m = config.m;

        let n1 = rng.random_range(1..=3usize);
        let n2 = if rng.random_bool(0.5) { n1 } else { rng.random_range(1..=3usize) };
        let f = random_kernel(n1, m, 6, &mut rng);
        let g = random_kernel(n2, m, 6, &mut rng);
        let (if_, ig) = (f.evaluate(space)?, g.evaluate(space)?);
        let rhs = if n1 == n2 { factorial(n1) * f.inner(&g) } else { 0.0 };
        iso.identity((if_.expect_product(&ig)? - rhs).abs());

        let di = if_.finite_difference();
        let mut worst: f64 = 0.0;
        for k in 0..m {
            let expected = f.section(k as u32).evaluate(space)?.scale(n1 as f64);
            worst = worst.max(max_abs_diff(di.row(k), &expected)?);
        }
        grad.identity(worst);

        let a = random_functional(space, &mut rng);
        let b = random_functional(space, &mut rng);
        let (da, db) = (a.finite_difference(), b.finite_difference());
        let dab = a.mul(&b)?.finite_difference();
        let mut worst: f64 = 0.0;
        for k in 0..m {
            let (dak, dbk) = (da.row(k), db.row(k));
            let expected = Functional::from_fn(space, |w| {
                let x = space.coordinate(w, k);
                a.value(w) * dbk.value(w) + b.value(w) * dak.value(w)
                    - x / spq * dak.value(w) * dbk.value(w)
            });
            worst = worst.max(max_abs_diff(dab.row(k), &expected)?);
        }
        prod.identity(worst);

        let centered = a.map(|v| v - a.expect());
        let lhs = b.expect_product(&centered)?;
        let rhs = db.inner(&a.ou_inverse().finite_difference())?.expect();
        cov.identity((lhs + rhs).abs());

        let u = random_process(space, &mut rng);
        let delta = u.divergence();
        let lhs = u.pair_with(&da)?.expect();
        dual.identity((lhs - a.expect_product(&delta)?).abs());
        div.identity(max_abs_diff(&delta, &u.divergence_by_chaos())?);

        let back = a.chaos_coefficients().reconstruct();
        let projection = a.chaos_project();
        let mut worst = max_abs_diff(&back, &a)?.max(max_abs_diff(&projection.evaluate(space)?, &a)?);
        // the direct sum is quadratic in 2^m, so it runs on every eighth trial
        if t % 8 == 0 {
            worst = worst.max(max_abs_diff(&projection.evaluate_direct(space)?, &a)?);
        }
        round.identity(worst);

        let lli = a.ou_inverse().ou_apply();
        let lil = a.ou_apply().ou_inverse();
        inv.identity(max_abs_diff(&lli, &centered)?.max(max_abs_diff(&lil, &centered)?));

        let (s, r) = (rng.random_range(0.0..2.0), rng.random_range(0.0..2.0));
        let two_step = a.semigroup(s)?.semigroup(r)?;
        semi.identity(max_abs_diff(&two_step, &a.semigroup(s + r)?)?);
    }
    Ok(SuiteReport {
        suite: Suite::Core,
        checks: vec![iso, prod, grad, cov, dual, div, round, inv, semi],
    })
}

/// Multiplication formula, both contraction inequalities, the Stein bound,
/// the Skorokhod isometry and bound, and the Mehler moment bounds.
pub fn kernels_suite(config: &VerifyConfig) -> Result<SuiteReport> {
    let space = OutcomeSpace::new(config.m, config.p)?;
    let m = config.m;
    let mut mult = Check::new("multiplication formula", IDENTITY_TOLERANCE);
    let mut strict = Check::new("contraction bound l<k", INEQUALITY_SLACK);
    let mut diag = Check::new("contraction bound l=k", INEQUALITY_SLACK);
    let mut stein = Check::new("Stein bound", INEQUALITY_SLACK);
    let mut skor_eq = Check::new("Skorokhod isometry", IDENTITY_TOLERANCE);
    let mut skor = Check::new("Skorokhod bound", INEQUALITY_SLACK);
    let mut mehler = Check::new("Mehler bound", INEQUALITY_SLACK);

    for t in 0..config.trials {
        let mut rng = rng_for(config.seed, t as u64);

        let n1 = rng.random_range(1..=5usize);
        let n2 = rng.random_range(1..=(6 - n1));
        let f = random_kernel(n1, m, 5, &mut rng);
        let g = random_kernel(n2, m, 5, &mut rng);
        mult.identity(multiplication_residual(space, &f, &g)?);

        let a = random_kernel(rng.random_range(1..=3usize), m, 6, &mut rng);
        let b = random_kernel(rng.random_range(1..=3usize), m, 6, &mut rng);
        let (na, nb) = (a.order(), b.order());
        for k in 1..=na.min(nb) {
            for l in 0..k {
                let lhs = contract(&a, &b, k, l)?.norm_sq();
                let rhs = 0.5 * contract(&a, &a, na, l + na - k)?.norm_sq()
                    + 0.5 * contract(&b, &b, nb, l + nb - k)?.norm_sq();
                strict.bound(lhs, rhs);
            }
        }
        for k in 0..=na.min(nb) {
            let lhs = contract(&a, &b, k, k)?.norm_sq();
            let rhs = 0.5 * contract_unrestricted(&a, &a, na - k, na - k)?.norm_sq()
                + 0.5 * contract_unrestricted(&b, &b, nb - k, nb - k)?.norm_sq();
            diag.bound(lhs, rhs);
        }

        let chaos = random_chaos_sum(m, rng.random_range(1..=3usize), 6, &mut rng);
        let big_f = chaos.evaluate(space)?;
        let terms = big_f.stein_bound()?;
        stein.bound(big_f.kolmogorov_to_normal(), terms.total);

        let u = random_process(space, &mut rng);
        let (lhs, norm, cross, diagonal) = skorokhod_terms(&u)?;
        skor_eq.identity((lhs - (norm + cross - diagonal)).abs());
        skor.bound(lhs, norm + cross);

        let x = random_functional(space, &mut rng);
        let dx = x.finite_difference();
        let dl = x.ou_inverse().finite_difference();
        for alpha in [1, 2, 4] {
            for k in 0..m {
                let lhs = dl.row(k).map(|v| v.abs().powi(alpha)).expect();
                let rhs = dx.row(k).map(|v| v.abs().powi(alpha)).expect();
                mehler.bound(lhs, rhs);
            }
        }
    }
    Ok(SuiteReport {
        suite: Suite::Kernels,
        checks: vec![mult, strict, diag, stein, skor_eq, skor, mehler],
    })
}

/// `max |I_n(f) I_m(g) - sum_s I_{n+m-s}(h_s)|` over all outcomes.
pub fn multiplication_residual(space: OutcomeSpace, f: &SymmetricKernel, g: &SymmetricKernel) -> Result<f64> {
    let lhs = f.evaluate(space)?.mul(&g.evaluate(space)?)?;
    let mut rhs = Functional::constant(space, 0.0);
    for h in multiply_chaos(f, g, space.p())? {
        rhs = rhs.add(&h.evaluate(space)?)?;
    }
    lhs.sup_distance(&rhs)
}

/// `(E[delta(u)^2], E||u||^2, E sum_{k != l} D_k u_l D_l u_k, E sum_k (D_k u_k)^2)`.
pub fn skorokhod_terms(u: &crate::bernoulli::SimpleProcess) -> Result<(f64, f64, f64, f64)> {
    let delta = u.divergence();
    let lhs = delta.expect_product(&delta)?;
    let norm: f64 = u.rows().iter().map(|r| r.expect_product(r)).sum::<Result<f64>>()?;
    let grads: Vec<_> = u.rows().iter().map(Functional::finite_difference).collect();
    let m = u.rows().len();
    let mut cross = 0.0;
    let mut diagonal = 0.0;
    for k in 0..m {
        for l in 0..m {
            // D_k u_l is row k of the gradient of u_l
            let term = grads[l].row(k).expect_product(grads[k].row(l))?;
            if k == l {
                diagonal += term;
            } else {
                cross += term;
            }
        }
    }
    Ok((lhs, norm, cross, diagonal))
}

/// Removes edge `i` and any vertex left isolated; `None` if no edge remains.
pub fn delete_edge(graph: &GraphSpec, i: usize) -> Option<GraphSpec> {
    let edges: Vec<(u32, u32)> = graph
        .edges()
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &e)| e)
        .collect();
    if edges.is_empty() {
        return None;
    }
    let mut relabel = vec![u32::MAX; graph.vertex_count()];
    let mut next = 0;
    for &(u, v) in &edges {
        for x in [u, v] {
            if relabel[x as usize] == u32::MAX {
                relabel[x as usize] = next;
                next += 1;
            }
        }
    }
    let edges = edges
        .into_iter()
        .map(|(u, v)| (relabel[u as usize], relabel[v as usize]))
        .collect();
    Some(GraphSpec::new(next as usize, edges).expect("relabelled subgraph is valid"))
}

/// Patterns used by the reconstruction checks.
pub fn reconstruction_patterns() -> Vec<(&'static str, GraphSpec)> {
    vec![
        ("edge", GraphSpec::single_edge()),
        ("path2", GraphSpec::path(2)),
        ("triangle", GraphSpec::triangle()),
        ("path3", GraphSpec::path(3)),
        ("star3", GraphSpec::star(3)),
    ]
}

/// `(max pointwise residual, |kernel variance - 1|, relative error of the
/// exact variance against enumeration)` for one pattern and size.
pub fn reconstruction_residuals(graph: &GraphSpec, n: usize, p: f64) -> Result<(f64, f64, f64)> {
    let m = n * (n - 1) / 2;
    let space = OutcomeSpace::new(m, p)?;
    let chaos = subgraph_count_kernels(graph, n, p)?;
    let target = standardized_count_functional(graph, n, p, m)?;
    let pointwise = chaos.evaluate_direct(space)?.sup_distance(&target)?;
    let var_exact = variance_exact(graph, n, p)?;
    let var_enum = count_functional(graph, n, p, m)?.variance();
    Ok((
        pointwise,
        (chaos.variance() - 1.0).abs(),
        (var_exact - var_enum).abs() / var_enum,
    ))
}

/// Reconstruction, exact variance, closed forms against the general bound,
/// the variance rewrite of the bound and profile monotonicity.
pub fn graph_suite() -> Result<SuiteReport> {
    let mut recon = Check::new("count reconstruction", 1e-9);
    let mut iso = Check::new("kernel isometry variance", 1e-9);
    let mut var = Check::new("exact variance", 1e-9);
    let mut closed = Check::new("closed form agreement", 1e-12);
    let mut rewrite = Check::new("variance rewrite of bound", 1e-12);
    let mut mono = Check::new("profile monotonicity", 0.0);

    for (_, g) in reconstruction_patterns() {
        for n in g.vertex_count().max(2)..=5 {
            for p in [0.2, 0.5, 0.7] {
                let (pointwise, iso_err, var_err) = reconstruction_residuals(&g, n, p)?;
                recon.identity(pointwise);
                iso.identity(iso_err);
                var.identity(var_err);
            }
        }
    }

    for (family, graph) in closed_form_families() {
        let profile = SubgraphProfile::exact(&graph)?;
        for (n, p) in bound_grid(graph.vertex_count()) {
            closed.identity(closed_form_mismatch(family, &profile, n, p)?);
            let r = GraphBoundReport::from_profile(&profile, n, p)?;
            let (v, e) = (graph.vertex_count() as f64, graph.edge_count() as f64);
            let ln_rhs = 0.5 * ln_variance_asymptotic(&profile, n, p)
                - (1.0 - p).ln()
                - v * (n as f64).ln()
                - e * p.ln();
            rewrite.identity((r.ln_bound - ln_rhs).abs());
        }
    }

    let mut shapes: Vec<GraphSpec> = closed_form_families().into_iter().map(|(_, g)| g).collect();
    shapes.push(GraphSpec::parse("5 6\n0 1\n1 2\n2 0\n2 3\n3 4\n4 2\n").expect("bowtie"));
    for g in shapes {
        let prof = SubgraphProfile::exact(&g)?;
        let sorted = prof.pairs().collect::<Vec<_>>().windows(2).all(|w| w[0].1 <= w[1].1);
        let ends = prof.vmin(1) == 2 && prof.vmin(g.edge_count()) == g.vertex_count();
        mono.identity(if sorted && ends { 0.0 } else { 1.0 });
        for i in 0..g.edge_count() {
            if let Some(h) = delete_edge(&g, i) {
                let sub = SubgraphProfile::exact(&h)?;
                let ok = sub.pairs().all(|(e, v)| v >= prof.vmin(e));
                mono.identity(if ok { 0.0 } else { 1.0 });
            }
        }
    }

    Ok(SuiteReport {
        suite: Suite::Graph,
        checks: vec![recon, iso, var, closed, rewrite, mono],
    })
}

/// The families with closed-form rate tables, each with its pattern graph.
pub fn closed_form_families() -> Vec<(Family, GraphSpec)> {
    let mut out = Vec::new();
    for r in [3, 4, 5] {
        out.push((Family::Cycle(r), GraphSpec::cycle(r)));
    }
    for r in [3, 4] {
        out.push((Family::Complete(r), GraphSpec::complete(r)));
    }
    for r in [2, 3, 4] {
        out.push((Family::Tree(r), GraphSpec::path(r)));
        out.push((Family::Tree(r), GraphSpec::star(r)));
    }
    out
}

/// 200 points: 10 sizes from `v` to `10^6` times 20 probabilities spanning
/// `n^{-1.5}` to `0.99`, including every threshold of the tables.
pub fn bound_grid(v: usize) -> Vec<(usize, f64)> {
    let mut out = Vec::with_capacity(200);
    for i in 0..10 {
        let n = ((v.max(3) as f64) * (1e6f64 / v.max(3) as f64).powf(i as f64 / 9.0)).round() as usize;
        let nf = n as f64;
        let mut ps: Vec<f64> = (0..14)
            .map(|j| nf.powf(-1.5 + 1.5 * j as f64 / 13.0).min(0.99))
            .collect();
        // thresholds of the cycle, complete and tree tables, and the dense cutoff
        ps.extend([
            nf.powf(-0.5),
            nf.powf(-2.0 / 3.0),
            nf.powf(-0.75),
            nf.powf(-0.4),
            1.0 / nf,
            DEFAULT_DENSE_CUTOFF,
        ]);
        out.extend(ps.into_iter().map(|p| (n, p)));
    }
    out
}

/// `|ln closed form - ln general bound|`, or infinity when the branches differ.
pub fn closed_form_mismatch(family: Family, profile: &SubgraphProfile, n: usize, p: f64) -> Result<f64> {
    let (regime, ln_closed) = closed_form_ln_bound(family, n, p, DEFAULT_DENSE_CUTOFF)?;
    let general = GraphBoundReport::from_profile(profile, n, p)?;
    if general.regime != regime {
        return Ok(f64::INFINITY);
    }
    Ok((general.ln_bound - ln_closed).abs())
}
