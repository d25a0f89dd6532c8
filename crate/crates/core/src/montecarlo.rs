//! Monte Carlo harness: `G(n, p)` sampling, subgraph counting, empirical
//! Kolmogorov distances and log-log scaling fits.
//!
//! Replication `r` of seed `s` always draws from the ChaCha8 stream `r` of
//! key `s`, so results do not depend on scheduling or thread count.

use std::io::{self, Write};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{
    asymptotic_normality_check, mean_count, predicted_slope, variance_exact, GraphBoundReport,
    GraphSpec, PRule, SubgraphProfile,
};
use crate::normal::std_normal_cdf;
use crate::par::{self, Execution};

/// Minimum number of replications for a Kolmogorov estimate.
pub const MIN_REPS: usize = 100;

/// Default number of replications.
pub const DEFAULT_REPS: usize = 20_000;

/// Confidence level of the reported DKW radius.
pub const DKW_DELTA: f64 = 0.05;

/// Below this edge probability the sampler skips geometrically between edges.
const GEOMETRIC_CUTOFF: f64 = 0.25;

/// Simple undirected graph on `0..n` with one bitset row per vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitGraph {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BitGraph {
    pub fn empty(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        Self {
            n,
            words,
            bits: vec![0; n * words],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for v in 1..n {
            for u in 0..v {
                g.add_edge(u, v);
            }
        }
        g
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Self::empty(n);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert!(u != v && u < self.n && v < self.n);
        self.bits[u * self.words + v / 64] |= 1 << (v % 64);
        self.bits[v * self.words + u / 64] |= 1 << (u % 64);
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.bits[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    pub fn row(&self, u: usize) -> &[u64] {
        &self.bits[u * self.words..(u + 1) * self.words]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.row(u).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|u| self.degree(u)).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v`, ordered by `v` then `u`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for v in 1..self.n {
            for u in 0..v {
                if self.has_edge(u, v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    fn all_vertices(&self) -> Vec<u64> {
        let mut mask = vec![u64::MAX; self.words];
        let tail = self.n % 64;
        if tail != 0 {
            mask[self.words - 1] = (1u64 << tail) - 1;
        }
        if self.n == 0 {
            mask[0] = 0;
        }
        mask
    }
}

fn popcount_and(a: &[u64], b: &[u64]) -> u64 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones() as u64).sum()
}

fn for_each_bit<F: FnMut(usize)>(set: &[u64], mut f: F) {
    for (w, &word) in set.iter().enumerate() {
        let mut bits = word;
        while bits != 0 {
            f(w * 64 + bits.trailing_zeros() as usize);
            bits &= bits - 1;
        }
    }
}

/// The generator for replication `rep` of `seed`.
pub fn rng_for(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

/// Draws `G(n, p)`: each pair of `0..n` is an edge independently with
/// probability `p`.
pub fn sample_gnp<R: RngCore>(n: usize, p: f64, rng: &mut R) -> Result<BitGraph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!("G(n, p) needs n >= 2, got {n}")));
    }
    if p == 1.0 {
        return Ok(BitGraph::complete(n));
    }
    let mut g = BitGraph::empty(n);
    if p == 0.0 {
        return Ok(g);
    }
    let total = n * (n - 1) / 2;
    let place = |index: usize, g: &mut BitGraph| {
        let mut v = ((1.0 + (1.0 + 8.0 * index as f64).sqrt()) / 2.0) as usize;
        while v * (v - 1) / 2 > index {
            v -= 1;
        }
        while (v + 1) * v / 2 <= index {
            v += 1;
        }
        g.add_edge(index - v * (v - 1) / 2, v);
    };
    if p < GEOMETRIC_CUTOFF {
        let log_q = (-p).ln_1p();
        let mut index: usize = 0;
        loop {
            let u: f64 = 1.0 - rng.random::<f64>();
            let skip = (u.ln() / log_q).floor();
            if skip >= (total - index) as f64 {
                break;
            }
            index += skip as usize;
            place(index, &mut g);
            index += 1;
            if index >= total {
                break;
            }
        }
    } else {
        // P(x < t) = t / 2^64 = p up to 2^-64
        let threshold = (p * 18_446_744_073_709_551_616.0) as u64;
        for v in 1..n {
            for u in 0..v {
                if rng.next_u64() < threshold {
                    g.add_edge(u, v);
                }
            }
        }
    }
    Ok(g)
}

/// Algorithm used by [`count_copies`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Counter {
    /// Triangles via popcounts of common neighbourhoods.
    TriangleFast,
    /// Complete patterns via ordered clique extension.
    CliqueFast,
    /// Cycles of length 3, 4, 5 via closed-walk traces; longer cycles fall
    /// back to the generic counter.
    CycleFast,
    /// Injective homomorphisms divided by the automorphism count.
    Generic,
}

impl Counter {
    /// The fastest counter compatible with the pattern.
    pub fn auto(pattern: &GraphSpec) -> Self {
        if *pattern == GraphSpec::triangle() {
            Counter::TriangleFast
        } else if pattern.is_complete() {
            Counter::CliqueFast
        } else if pattern.is_cycle() && pattern.vertex_count() <= 5 {
            Counter::CycleFast
        } else {
            Counter::Generic
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Counter::TriangleFast => "triangle-fast",
            Counter::CliqueFast => "clique-fast",
            Counter::CycleFast => "cycle-fast",
            Counter::Generic => "generic",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "triangle-fast" => Ok(Counter::TriangleFast),
            "clique-fast" => Ok(Counter::CliqueFast),
            "cycle-fast" => Ok(Counter::CycleFast),
            "generic" => Ok(Counter::Generic),
            other => Err(Error::InvalidArgument(format!("unknown counter `{other}`"))),
        }
    }

    fn check(self, pattern: &GraphSpec) -> Result<()> {
        let ok = match self {
            Counter::TriangleFast => *pattern == GraphSpec::triangle(),
            Counter::CliqueFast => pattern.is_complete(),
            Counter::CycleFast => pattern.is_cycle(),
            Counter::Generic => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::IncompatibleCounter {
                counter: self.name(),
            })
        }
    }
}

/// Number of edge sets of `host` forming a copy of `pattern`.
pub fn count_copies(host: &BitGraph, pattern: &GraphSpec, counter: Counter) -> Result<u64> {
    counter.check(pattern)?;
    if host.vertex_count() < pattern.vertex_count() {
        return Ok(0);
    }
    Ok(match counter {
        Counter::TriangleFast => count_triangles(host),
        Counter::CliqueFast => count_cliques(host, pattern.vertex_count()),
        Counter::CycleFast => match pattern.vertex_count() {
            3..=5 => count_short_cycles(host, pattern.vertex_count()),
            _ => count_generic(host, pattern),
        },
        Counter::Generic => count_generic(host, pattern),
    })
}

fn count_triangles(g: &BitGraph) -> u64 {
    let mut total = 0;
    for v in 1..g.n {
        for u in 0..v {
            if g.has_edge(u, v) {
                total += popcount_and(g.row(u), g.row(v));
            }
        }
    }
    total / 3
}

fn count_cliques(g: &BitGraph, r: usize) -> u64 {
    fn extend(g: &BitGraph, cand: &[u64], depth: usize, r: usize) -> u64 {
        if depth == r {
            return 1;
        }
        if depth + 1 == r {
            return cand.iter().map(|w| w.count_ones() as u64).sum();
        }
        let mut total = 0;
        let mut next = vec![0u64; cand.len()];
        for_each_bit(cand, |v| {
            // keep only neighbours after v so each clique is built once
            let row = g.row(v);
            for (w, slot) in next.iter_mut().enumerate() {
                let after = if w < v / 64 {
                    0
                } else if w == v / 64 {
                    !((2u64 << (v % 64)).wrapping_sub(1))
                } else {
                    u64::MAX
                };
                *slot = cand[w] & row[w] & after;
            }
            total += extend(g, &next, depth + 1, r);
        });
        total
    }
    extend(g, &g.all_vertices(), 0, r)
}

/// `C_3 = tr A^3 / 6`,
/// `C_4 = (tr A^4 - 2m - 4 sum_i C(d_i, 2)) / 8`,
/// `C_5 = (tr A^5 - 5 tr A^3 - 5 sum_i (d_i - 2) (A^3)_ii) / 10`.
fn count_short_cycles(g: &BitGraph, r: usize) -> u64 {
    let n = g.n;
    let mut a2 = vec![0i64; n * n];
    for i in 0..n {
        for j in i..n {
            let c = popcount_and(g.row(i), g.row(j)) as i64;
            a2[i * n + j] = c;
            a2[j * n + i] = c;
        }
    }
    let deg: Vec<i64> = (0..n).map(|i| g.degree(i) as i64).collect();
    let a3_diag: Vec<i64> = (0..n)
        .map(|i| {
            let mut s = 0;
            for_each_bit(g.row(i), |j| s += a2[i * n + j]);
            s
        })
        .collect();
    let tr3: i64 = a3_diag.iter().sum();
    let value = match r {
        3 => tr3 / 6,
        4 => {
            let tr4: i64 = a2.iter().map(|x| x * x).sum();
            let m: i64 = deg.iter().sum::<i64>() / 2;
            let pairs: i64 = deg.iter().map(|d| d * (d - 1) / 2).sum();
            (tr4 - 2 * m - 4 * pairs) / 8
        }
        5 => {
            // tr A^5 = sum_{i,j} (A^2)_ij (A^3)_ji, (A^3)_ji = sum_{k ~ i} (A^2)_jk
            let mut tr5 = 0i64;
            for i in 0..n {
                let mut a3_col = vec![0i64; n];
                for_each_bit(g.row(i), |k| {
                    for j in 0..n {
                        a3_col[j] += a2[j * n + k];
                    }
                });
                for j in 0..n {
                    tr5 += a2[i * n + j] * a3_col[j];
                }
            }
            let corr: i64 = (0..n).map(|i| (deg[i] - 2) * a3_diag[i]).sum();
            (tr5 - 5 * tr3 - 5 * corr) / 10
        }
        _ => unreachable!("short cycles only"),
    };
    value as u64
}

fn count_generic(g: &BitGraph, pattern: &GraphSpec) -> u64 {
    let v = pattern.vertex_count();
    let adj = pattern.adjacency();
    // order pattern vertices so that each one, where possible, has an
    // already placed neighbour
    let mut order = Vec::with_capacity(v);
    let mut placed = 0u64;
    while order.len() < v {
        let next = (0..v)
            .filter(|&i| placed >> i & 1 == 0)
            .max_by_key(|&i| ((adj[i] & placed).count_ones(), adj[i].count_ones(), usize::MAX - i))
            .expect("unplaced vertex");
        order.push(next);
        placed |= 1 << next;
    }
    let back: Vec<Vec<usize>> = order
        .iter()
        .enumerate()
        .map(|(pos, &x)| (0..pos).filter(|&q| adj[x] >> order[q] & 1 == 1).collect())
        .collect();

    struct Search<'a> {
        g: &'a BitGraph,
        back: &'a [Vec<usize>],
        image: Vec<usize>,
        used: Vec<u64>,
        scratch: Vec<Vec<u64>>,
        all: Vec<u64>,
    }
    fn rec(s: &mut Search<'_>, depth: usize) -> u64 {
        if depth == s.back.len() {
            return 1;
        }
        let mut cand = std::mem::take(&mut s.scratch[depth]);
        cand.copy_from_slice(&s.all);
        for &q in &s.back[depth] {
            let row = s.g.row(s.image[q]);
            for (c, r) in cand.iter_mut().zip(row) {
                *c &= r;
            }
        }
        for (c, u) in cand.iter_mut().zip(&s.used) {
            *c &= !u;
        }
        let mut total = 0;
        for w in 0..cand.len() {
            let mut bits = cand[w];
            while bits != 0 {
                let x = w * 64 + bits.trailing_zeros() as usize;
                bits &= bits - 1;
                s.image[depth] = x;
                s.used[x / 64] |= 1 << (x % 64);
                total += rec(s, depth + 1);
                s.used[x / 64] &= !(1 << (x % 64));
            }
        }
        s.scratch[depth] = cand;
        total
    }
    let words = g.words;
    let mut search = Search {
        g,
        back: &back,
        image: vec![0; v],
        used: vec![0; words],
        scratch: vec![vec![0; words]; v],
        all: g.all_vertices(),
    };
    rec(&mut search, 0) / pattern.automorphism_count()
}

/// Replication settings for [`simulate_counts`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleConfig {
    pub n: usize,
    pub p: f64,
    pub reps: usize,
    pub seed: u64,
    pub counter: Counter,
}

impl SampleConfig {
    pub fn new(pattern: &GraphSpec, n: usize, p: f64, reps: usize, seed: u64) -> Self {
        Self {
            n,
            p,
            reps,
            seed,
            counter: Counter::auto(pattern),
        }
    }
}

/// Pattern counts of `reps` independent draws of `G(n, p)`, indexed by
/// replication.
pub fn simulate_counts(pattern: &GraphSpec, config: &SampleConfig) -> Result<Vec<u64>> {
    simulate_counts_with(Execution::default(), pattern, config)
}

pub fn simulate_counts_with(
    exec: Execution,
    pattern: &GraphSpec,
    config: &SampleConfig,
) -> Result<Vec<u64>> {
    config.counter.check(pattern)?;
    if !(0.0..=1.0).contains(&config.p) {
        return Err(Error::InvalidProbability(config.p));
    }
    if config.n < pattern.vertex_count() {
        return Err(Error::TooFewVertices {
            n: config.n,
            vertices: pattern.vertex_count(),
        });
    }
    par::map_range(exec, config.reps, |rep| {
        let mut rng = rng_for(config.seed, rep as u64);
        let g = sample_gnp(config.n, config.p, &mut rng)?;
        count_copies(&g, pattern, config.counter)
    })
    .into_iter()
    .collect()
}

/// Source of the mean and variance used to standardize counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MomentMode {
    /// Combinatorial `E N_G` and the exact variance.
    Exact,
    /// Sample mean and unbiased sample variance.
    Sample,
}

impl MomentMode {
    pub fn name(self) -> &'static str {
        match self {
            MomentMode::Exact => "exact-moments",
            MomentMode::Sample => "sample-moments",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Standardized {
    pub values: Vec<f64>,
    pub mean: f64,
    pub sd: f64,
    pub mode: MomentMode,
}

/// `(N - mean) / sd` for each sample.
pub fn standardize_counts(
    samples: &[u64],
    pattern: &GraphSpec,
    n: usize,
    p: f64,
    mode: MomentMode,
) -> Result<Standardized> {
    let (mean, var) = match mode {
        MomentMode::Exact => (mean_count(pattern, n, p), variance_exact(pattern, n, p)?),
        MomentMode::Sample => {
            if samples.len() < 2 {
                return Err(Error::ZeroVariance);
            }
            let len = samples.len() as f64;
            let mean = samples.iter().map(|&x| x as f64).sum::<f64>() / len;
            let ss: f64 = samples.iter().map(|&x| (x as f64 - mean).powi(2)).sum();
            (mean, ss / (len - 1.0))
        }
    };
    if !(var > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let sd = var.sqrt();
    Ok(Standardized {
        values: samples.iter().map(|&x| (x as f64 - mean) / sd).collect(),
        mean,
        sd,
        mode,
    })
}

/// Exact moments when the variance is computable, sample moments otherwise.
pub fn default_moment_mode(pattern: &GraphSpec, n: usize, p: f64) -> MomentMode {
    if p > 0.0 && p < 1.0 && variance_exact(pattern, n, p).is_ok() {
        MomentMode::Exact
    } else {
        MomentMode::Sample
    }
}

/// `sqrt(ln(2 / delta) / (2 reps))`.
pub fn dkw_radius(reps: usize, delta: f64) -> f64 {
    ((2.0 / delta).ln() / (2.0 * reps as f64)).sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalDistance {
    pub reps: usize,
    /// `sup_x |F_hat(x) - Phi(x)|`.
    pub dk_hat: f64,
    /// Radius at level [`DKW_DELTA`].
    pub dkw_radius: f64,
}

/// Kolmogorov distance between the empirical law of `values` and `N(0, 1)`,
/// checking both one-sided limits of the ECDF at each atom.
pub fn empirical_dk(values: &[f64]) -> Result<EmpiricalDistance> {
    if values.len() < MIN_REPS {
        return Err(Error::TooFewReps {
            reps: values.len(),
            min: MIN_REPS,
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let len = sorted.len() as f64;
    let mut sup: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let phi = std_normal_cdf(x);
        sup = sup
            .max((i as f64 / len - phi).abs())
            .max((j as f64 / len - phi).abs());
        i = j;
    }
    Ok(EmpiricalDistance {
        reps: values.len(),
        dk_hat: sup,
        dkw_radius: dkw_radius(values.len(), DKW_DELTA),
    })
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let len = x.len() as f64;
    let mx = x.iter().sum::<f64>() / len;
    let my = y.iter().sum::<f64>() / len;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingPoint {
    pub n: usize,
    pub p: f64,
    pub reps: usize,
    pub dk_hat: f64,
    pub dkw_radius: f64,
    pub moments: MomentMode,
    /// `ln(1 - p)` and `ln min_H n^{v_H} p^{e_H}`; the bound is
    /// `exp(-(a + b) / 2)`.
    pub ln_one_minus_p: f64,
    pub ln_min_term: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingStudy {
    pub alpha: f64,
    pub c: f64,
    pub points: Vec<ScalingPoint>,
    /// Least-squares slope of `ln dk_hat` against `ln n`.
    pub fitted_slope: f64,
    pub predicted_slope: f64,
}

/// Parameters of a scaling study along `p = c n^{-alpha}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingConfig {
    pub alpha: f64,
    pub c: f64,
    pub n_list: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    pub counter: Option<Counter>,
}

pub fn scaling_study(pattern: &GraphSpec, config: &ScalingConfig) -> Result<ScalingStudy> {
    scaling_study_with(Execution::default(), pattern, config)
}

pub fn scaling_study_with(
    exec: Execution,
    pattern: &GraphSpec,
    config: &ScalingConfig,
) -> Result<ScalingStudy> {
    let ns = &config.n_list;
    if ns.len() < 4 {
        return Err(Error::InvalidArgument(format!(
            "a slope fit needs at least 4 sizes, got {}",
            ns.len()
        )));
    }
    if ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("n list must be strictly increasing".into()));
    }
    let profile = SubgraphProfile::compute(pattern, true)?;
    let rule = PRule::Power {
        c: config.c,
        alpha: config.alpha,
    };
    let verdict = asymptotic_normality_check(&profile, ns, &rule)?;
    if !verdict.np_beta_diverges {
        return Err(Error::NonNormalRegime {
            alpha: config.alpha,
            threshold: verdict.alpha_threshold,
        });
    }
    let counter = config.counter.unwrap_or_else(|| Counter::auto(pattern));
    let mut points = Vec::with_capacity(ns.len());
    for (i, &n) in ns.iter().enumerate() {
        let p = rule.at(n, i);
        let sample = SampleConfig {
            n,
            p,
            reps: config.reps,
            // distinct, reproducible key per grid point
            seed: config.seed.wrapping_add((i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            counter,
        };
        let counts = simulate_counts_with(exec, pattern, &sample)?;
        let mode = default_moment_mode(pattern, n, p);
        let std = standardize_counts(&counts, pattern, n, p, mode)?;
        let dk = empirical_dk(&std.values)?;
        let report = GraphBoundReport::from_profile(&profile, n, p)?;
        points.push(ScalingPoint {
            n,
            p,
            reps: config.reps,
            dk_hat: dk.dk_hat,
            dkw_radius: dk.dkw_radius,
            moments: mode,
            ln_one_minus_p: (1.0 - p).ln(),
            ln_min_term: report.ln_min_term,
            bound: report.bound,
        });
    }
    let x: Vec<f64> = points.iter().map(|pt| (pt.n as f64).ln()).collect();
    let y: Vec<f64> = points.iter().map(|pt| pt.dk_hat.ln()).collect();
    Ok(ScalingStudy {
        alpha: config.alpha,
        c: config.c,
        fitted_slope: fit_slope(&x, &y),
        predicted_slope: predicted_slope(&profile, config.alpha),
        points,
    })
}

/// Shortest round-trip float format with 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// `rep,count,standardized` rows.
pub fn write_simulate_csv<W: Write + ?Sized>(out: &mut W, counts: &[u64], standardized: &[f64]) -> io::Result<()> {
    writeln!(out, "rep,count,standardized")?;
    for (rep, (c, z)) in counts.iter().zip(standardized).enumerate() {
        writeln!(out, "{rep},{c},{}", format_float(*z))?;
    }
    Ok(())
}

/// One row per grid point, then a `fit` row with the fitted slope in the
/// `dk_hat` column and the predicted slope in the last column.
pub fn write_scaling_csv<W: Write + ?Sized>(out: &mut W, study: &ScalingStudy) -> io::Result<()> {
    writeln!(out, "n,p,reps,dk_hat,dkw_radius,bound_parts_log,predicted_slope")?;
    let predicted = format_float(study.predicted_slope);
    for pt in &study.points {
        writeln!(
            out,
            "{},{},{},{},{},{};{},{}",
            pt.n,
            format_float(pt.p),
            pt.reps,
            format_float(pt.dk_hat),
            format_float(pt.dkw_radius),
            format_float(pt.ln_one_minus_p),
            format_float(pt.ln_min_term),
            predicted
        )?;
    }
    writeln!(
        out,
        "fit,,,{},,,{}",
        format_float(study.fitted_slope),
        predicted
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_probabilities() {
        let mut rng = rng_for(1, 0);
        assert_eq!(sample_gnp(20, 0.0, &mut rng).unwrap().edge_count(), 0);
        assert_eq!(sample_gnp(20, 1.0, &mut rng).unwrap().edge_count(), 190);
        assert!(sample_gnp(1, 0.5, &mut rng).is_err());
    }

    #[test]
    fn edge_frequency_in_binomial_band() {
        for p in [0.3, 0.05] {
            let mut rng = rng_for(11, 0);
            let n = 150;
            let trials = 20;
            let pairs = (n * (n - 1) / 2 * trials) as f64;
            let edges: usize = (0..trials)
                .map(|_| sample_gnp(n, p, &mut rng).unwrap().edge_count())
                .sum();
            let sigma = (pairs * p * (1.0 - p)).sqrt();
            assert!((edges as f64 - pairs * p).abs() < 3.0 * sigma, "p={p}");
        }
    }

    #[test]
    fn complete_graph_counts() {
        let k5 = BitGraph::complete(5);
        assert_eq!(count_copies(&k5, &GraphSpec::triangle(), Counter::TriangleFast).unwrap(), 10);
        let k6 = BitGraph::complete(6);
        for counter in [Counter::CycleFast, Counter::Generic] {
            assert_eq!(count_copies(&k6, &GraphSpec::cycle(4), counter).unwrap(), 45);
        }
        assert_eq!(count_copies(&k6, &GraphSpec::cycle(5), Counter::CycleFast).unwrap(), 72);
        assert_eq!(count_copies(&k6, &GraphSpec::complete(4), Counter::CliqueFast).unwrap(), 15);
        assert!(matches!(
            count_copies(&k6, &GraphSpec::path(2), Counter::TriangleFast),
            Err(Error::IncompatibleCounter { .. })
        ));
    }

    #[test]
    fn fast_counters_agree_across_word_boundaries() {
        let mut rng = rng_for(3, 0);
        let g = sample_gnp(70, 0.2, &mut rng).unwrap();
        let generic = count_copies(&g, &GraphSpec::triangle(), Counter::Generic).unwrap();
        assert_eq!(count_copies(&g, &GraphSpec::triangle(), Counter::TriangleFast).unwrap(), generic);
        assert_eq!(count_copies(&g, &GraphSpec::triangle(), Counter::CliqueFast).unwrap(), generic);
        assert_eq!(count_copies(&g, &GraphSpec::triangle(), Counter::CycleFast).unwrap(), generic);
        let c4 = GraphSpec::cycle(4);
        assert_eq!(
            count_copies(&g, &c4, Counter::CycleFast).unwrap(),
            count_copies(&g, &c4, Counter::Generic).unwrap()
        );
    }

    #[test]
    fn point_mass_has_distance_one_half() {
        let d = empirical_dk(&vec![0.0; 500]).unwrap();
        assert!((d.dk_hat - 0.5).abs() < 1e-15);
        assert!(matches!(empirical_dk(&[0.0; 99]), Err(Error::TooFewReps { .. })));
    }

    #[test]
    fn constant_samples_have_zero_variance() {
        let r = standardize_counts(&[4; 200], &GraphSpec::triangle(), 10, 0.5, MomentMode::Sample);
        assert_eq!(r, Err(Error::ZeroVariance));
    }

    #[test]
    fn dkw_radius_at_default_reps() {
        assert!((dkw_radius(DEFAULT_REPS, DKW_DELTA) - 0.0096).abs() < 1e-4);
    }

    #[test]
    fn slope_of_exact_power_law() {
        let x: Vec<f64> = [16.0f64, 32.0, 64.0].iter().map(|v| v.ln()).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.75 * v).collect();
        assert!((fit_slope(&x, &y) + 0.75).abs() < 1e-12);
    }
}
