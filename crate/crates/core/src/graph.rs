//! Pattern graphs, subgraph profiles and the Kolmogorov bounds for
//! standardized subgraph counts in `G(n, p)`.
//!
//! Every rate in this module depends on the graph only through its
//! [`SubgraphProfile`]: for each edge count `e`, the fewest vertices spanned
//! by `e` edges of the pattern. All large powers `n^a p^b` are handled as
//! `a ln n + b ln p`.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::path::Path;

use crate::bernoulli::{Functional, OutcomeSpace};
use crate::error::{Error, Result};
use crate::kernel::{factorial, ChaosSum, SymmetricKernel};
use crate::par::{self, Execution};

/// Largest pattern accepted by the exhaustive subgraph profile.
pub const EXHAUSTIVE_MAX_VERTICES: usize = 24;

/// Default budget for enumerating copies of a pattern in `K_n`.
pub const DEFAULT_COPY_BUDGET: u128 = 1_000_000;

/// Default budget for embeddings visited by [`variance_exact`].
pub const DEFAULT_EMBEDDING_BUDGET: u128 = 50_000_000;

/// Split between the dense and moderate regimes of the closed-form rates.
pub const DEFAULT_DENSE_CUTOFF: f64 = 0.5;

/// Log-space tolerance used to break ties between bound branches.
const TIE_TOLERANCE: f64 = 1e-12;

/// A finite simple graph without isolated vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphSpec {
    vertices: usize,
    edges: Vec<(u32, u32)>,
}

impl GraphSpec {
    /// Validates and normalizes the edge list (each edge stored as `u < v`).
    pub fn new(vertices: usize, edges: Vec<(u32, u32)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut normalized = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if a == b {
                return Err(Error::MalformedGraph(format!("loop at vertex {a}")));
            }
            let (u, v) = (a.min(b), a.max(b));
            if v as usize >= vertices {
                return Err(Error::MalformedGraph(format!(
                    "edge ({a}, {b}) uses a vertex outside 0..{vertices}"
                )));
            }
            if !seen.insert((u, v)) {
                return Err(Error::MalformedGraph(format!("duplicate edge ({u}, {v})")));
            }
            normalized.push((u, v));
        }
        if vertices > 64 {
            return Err(Error::MalformedGraph(format!(
                "{vertices} vertices; patterns are limited to 64"
            )));
        }
        let mut touched = vec![false; vertices];
        for &(u, v) in &normalized {
            touched[u as usize] = true;
            touched[v as usize] = true;
        }
        if let Some(i) = touched.iter().position(|&t| !t) {
            return Err(Error::IsolatedVertex(i));
        }
        Ok(Self {
            vertices,
            edges: normalized,
        })
    }

    /// Parses the text format: a header line `v e`, then `e` lines `u v`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::MalformedGraph("empty graph file".into()))?;
        let (v, e) = parse_pair(header)?;
        let mut edges = Vec::with_capacity(e);
        for _ in 0..e {
            let line = lines
                .next()
                .ok_or_else(|| Error::MalformedGraph(format!("expected {e} edge lines")))?;
            let (a, b) = parse_pair(line)?;
            edges.push((a as u32, b as u32));
        }
        if let Some(extra) = lines.next() {
            return Err(Error::MalformedGraph(format!("unexpected line `{extra}`")));
        }
        Self::new(v, edges)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::MalformedGraph(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.vertices, self.edges.len());
        for (u, v) in &self.edges {
            s.push_str(&format!("{u} {v}\n"));
        }
        s
    }

    pub fn single_edge() -> Self {
        Self::path(1)
    }

    pub fn triangle() -> Self {
        Self::cycle(3)
    }

    /// Cycle on `r >= 3` vertices.
    pub fn cycle(r: usize) -> Self {
        assert!(r >= 3, "cycles need at least three vertices");
        let edges = (0..r).map(|i| (i as u32, ((i + 1) % r) as u32)).collect();
        Self::new(r, edges).expect("cycle is valid")
    }

    /// Complete graph on `r >= 2` vertices.
    pub fn complete(r: usize) -> Self {
        assert!(r >= 2);
        let mut edges = Vec::new();
        for v in 1..r as u32 {
            for u in 0..v {
                edges.push((u, v));
            }
        }
        Self::new(r, edges).expect("complete graph is valid")
    }

    /// Path with `r >= 1` edges.
    pub fn path(r: usize) -> Self {
        assert!(r >= 1);
        let edges = (0..r as u32).map(|i| (i, i + 1)).collect();
        Self::new(r + 1, edges).expect("path is valid")
    }

    /// Star with `r >= 1` leaves.
    pub fn star(r: usize) -> Self {
        assert!(r >= 1);
        let edges = (1..=r as u32).map(|i| (0, i)).collect();
        Self::new(r + 1, edges).expect("star is valid")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Neighbourhoods as bitmasks.
    pub fn adjacency(&self) -> Vec<u64> {
        let mut adj = vec![0u64; self.vertices];
        for &(u, v) in &self.edges {
            adj[u as usize] |= 1 << v;
            adj[v as usize] |= 1 << u;
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency()
            .iter()
            .map(|a| a.count_ones() as usize)
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        let adj = self.adjacency();
        let mut seen = 1u64;
        let mut frontier = 1u64;
        while frontier != 0 {
            let v = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let fresh = adj[v] & !seen;
            seen |= fresh;
            frontier |= fresh;
        }
        seen.count_ones() as usize == self.vertices
    }

    pub fn is_complete(&self) -> bool {
        self.edge_count() == self.vertices * (self.vertices - 1) / 2
    }

    pub fn is_cycle(&self) -> bool {
        self.vertices >= 3
            && self.edge_count() == self.vertices
            && self.degrees().iter().all(|&d| d == 2)
            && self.is_connected()
    }

    pub fn is_tree(&self) -> bool {
        self.edge_count() + 1 == self.vertices && self.is_connected()
    }

    /// Number of automorphisms, by backtracking over vertex bijections.
    pub fn automorphism_count(&self) -> u64 {
        let adj = self.adjacency();
        let mut count = 0;
        let mut image = vec![u32::MAX; self.vertices];
        let mut used = 0u64;
        fn rec(
            v: usize,
            adj: &[u64],
            image: &mut [u32],
            used: &mut u64,
            count: &mut u64,
        ) {
            if v == adj.len() {
                *count += 1;
                return;
            }
            for w in 0..adj.len() {
                if *used >> w & 1 == 1 || adj[w].count_ones() != adj[v].count_ones() {
                    continue;
                }
                let ok = (0..v).all(|u| {
                    (adj[v] >> u & 1) == (adj[w] >> image[u] & 1)
                });
                if ok {
                    image[v] = w as u32;
                    *used |= 1 << w;
                    rec(v + 1, adj, image, used, count);
                    *used &= !(1 << w);
                }
            }
        }
        rec(0, &adj, &mut image, &mut used, &mut count);
        count
    }
}

fn parse_pair(line: &str) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace();
    let mut next = || -> Result<usize> {
        it.next()
            .ok_or_else(|| Error::MalformedGraph(format!("expected two integers in `{line}`")))?
            .parse::<usize>()
            .map_err(|e| Error::MalformedGraph(format!("`{line}`: {e}")))
    };
    let a = next()?;
    let b = next()?;
    if it.next().is_some() {
        return Err(Error::MalformedGraph(format!("trailing tokens in `{line}`")));
    }
    Ok((a, b))
}

/// Canonical numbering of the edges of `K_n`: `{u < v} -> v(v-1)/2 + u`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeIndexing {
    n: usize,
}

impl EdgeIndexing {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn vertices(&self) -> usize {
        self.n
    }

    /// `C(n, 2)`.
    pub fn len(&self) -> usize {
        self.n * self.n.saturating_sub(1) / 2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, a: u32, b: u32) -> u32 {
        debug_assert!(a != b && (a.max(b) as usize) < self.n);
        let (u, v) = (a.min(b), a.max(b));
        v * (v - 1) / 2 + u
    }

    pub fn edge(&self, index: u32) -> (u32, u32) {
        let mut v = ((1.0 + (1.0 + 8.0 * index as f64).sqrt()) / 2.0) as u32;
        while v * (v - 1) / 2 > index {
            v -= 1;
        }
        while (v + 1) * v / 2 <= index {
            v += 1;
        }
        (index - v * (v - 1) / 2, v)
    }
}

/// `vmin(e)`: the fewest non-isolated vertices over `e`-edge subgraphs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgraphProfile {
    vertices: usize,
    /// `vmin[e - 1]` for `e = 1..=e_G`.
    vmin: Vec<usize>,
    exact: bool,
}

impl SubgraphProfile {
    /// Exact profile. A set of `k` vertices supports `e` edges iff its induced
    /// subgraph has at least `e` edges, so `vmin(e)` is the least `k` whose
    /// densest `k`-vertex induced subgraph has `e` edges.
    pub fn exact(graph: &GraphSpec) -> Result<Self> {
        if graph.vertex_count() > EXHAUSTIVE_MAX_VERTICES {
            return Err(Error::ExhaustiveTooLarge {
                vertices: graph.vertex_count(),
                max: EXHAUSTIVE_MAX_VERTICES,
            });
        }
        let best = densest_by_size(graph);
        Ok(Self::from_densest(graph, &best, true))
    }

    /// Upper bound on `vmin` from greedy min-degree peeling; exact for many
    /// regular and tree patterns but not in general.
    pub fn approximate(graph: &GraphSpec) -> Self {
        let adj = graph.adjacency();
        let v = graph.vertex_count();
        let mut alive: u64 = if v == 64 { u64::MAX } else { (1u64 << v) - 1 };
        let mut best = vec![0usize; v + 1];
        let mut edges = graph.edge_count();
        for size in (1..=v).rev() {
            best[size] = edges;
            let (victim, deg) = (0..v)
                .filter(|&i| alive >> i & 1 == 1)
                .map(|i| (i, (adj[i] & alive).count_ones() as usize))
                .min_by_key(|&(i, d)| (d, i))
                .expect("nonempty");
            alive &= !(1 << victim);
            edges -= deg;
        }
        Self::from_densest(graph, &best, false)
    }

    /// Exact when the pattern is small enough, otherwise an error unless
    /// `approx` is set.
    pub fn compute(graph: &GraphSpec, approx: bool) -> Result<Self> {
        match Self::exact(graph) {
            Err(Error::ExhaustiveTooLarge { .. }) if approx => Ok(Self::approximate(graph)),
            other => other,
        }
    }

    fn from_densest(graph: &GraphSpec, best: &[usize], exact: bool) -> Self {
        let vmin = (1..=graph.edge_count())
            .map(|e| {
                // at least ceil((1 + sqrt(1 + 8e)) / 2) vertices carry e edges
                let lower = ((1.0 + (1.0 + 8.0 * e as f64).sqrt()) / 2.0 - 1e-9).ceil() as usize;
                (lower.max(2)..=graph.vertex_count())
                    .find(|&k| best[k] >= e)
                    .unwrap_or(graph.vertex_count())
            })
            .collect();
        Self {
            vertices: graph.vertex_count(),
            vmin,
            exact,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.vmin.len()
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    /// `vmin(e)` for `1 <= e <= e_G`.
    pub fn vmin(&self, e: usize) -> usize {
        self.vmin[e - 1]
    }

    /// `(e, vmin(e))` for every edge count.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.vmin.iter().enumerate().map(|(i, &v)| (i + 1, v))
    }

    /// `beta = max_H e_H / v_H` as a reduced fraction.
    pub fn beta(&self) -> (usize, usize) {
        let (mut num, mut den) = (0, 1);
        for (e, v) in self.pairs() {
            if e * den > num * v {
                num = e;
                den = v;
            }
        }
        let g = gcd(num, den);
        (num / g, den / g)
    }

    pub fn beta_value(&self) -> f64 {
        let (a, b) = self.beta();
        a as f64 / b as f64
    }

    /// `(e*, ln min_H n^{v_H} p^{e_H})`; ties go to the larger edge count.
    pub fn min_term(&self, n: f64, p: f64) -> (usize, f64) {
        let (ln_n, ln_p) = (n.ln(), p.ln());
        let logs: Vec<f64> = self
            .pairs()
            .map(|(e, v)| v as f64 * ln_n + e as f64 * ln_p)
            .collect();
        let min = logs.iter().copied().fold(f64::INFINITY, f64::min);
        let e = logs
            .iter()
            .rposition(|&x| x <= min + TIE_TOLERANCE)
            .expect("nonempty profile")
            + 1;
        (e, logs[e - 1])
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

/// `best[k]`: the largest number of edges induced by `k` vertices.
fn densest_by_size(graph: &GraphSpec) -> Vec<usize> {
    let adj = graph.adjacency();
    let v = graph.vertex_count();
    let mut best = vec![0usize; v + 1];
    fn rec(i: usize, chosen: u64, size: usize, edges: usize, adj: &[u64], best: &mut [usize]) {
        if i == adj.len() {
            if edges > best[size] {
                best[size] = edges;
            }
            return;
        }
        let gained = (adj[i] & chosen).count_ones() as usize;
        rec(i + 1, chosen | 1 << i, size + 1, edges + gained, adj, best);
        rec(i + 1, chosen, size, edges, adj, best);
    }
    rec(0, 0, 0, 0, &adj, &mut best);
    best
}

/// Distinct labelled copies of the pattern on its own vertex set `0..v`,
/// each as a sorted list of vertex pairs.
pub fn labeled_copies(graph: &GraphSpec) -> Vec<Vec<(u32, u32)>> {
    let v = graph.vertex_count();
    let mut perm: Vec<u32> = (0..v as u32).collect();
    let mut seen = BTreeSet::new();
    permute(&mut perm, 0, &mut |p| {
        let mut edges: Vec<(u32, u32)> = graph
            .edges()
            .iter()
            .map(|&(a, b)| {
                let (x, y) = (p[a as usize], p[b as usize]);
                (x.min(y), x.max(y))
            })
            .collect();
        edges.sort_unstable();
        seen.insert(edges);
    });
    seen.into_iter().collect()
}

fn permute<F: FnMut(&[u32])>(perm: &mut [u32], k: usize, f: &mut F) {
    if k == perm.len() {
        f(perm);
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        permute(perm, k + 1, f);
        perm.swap(k, i);
    }
}

fn binomial_u128(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Number of copies of the pattern in `K_n`: `C(n, v_G) v_G! / |Aut G|`.
pub fn copy_count(graph: &GraphSpec, n: usize) -> u128 {
    let v = graph.vertex_count();
    let aut = graph.automorphism_count() as u128;
    let labeled = (1..=v as u128).product::<u128>() / aut;
    binomial_u128(n, v) * labeled
}

/// `E[N_G] = #copies * p^{e_G}`.
pub fn mean_count(graph: &GraphSpec, n: usize, p: f64) -> f64 {
    copy_count(graph, n) as f64 * p.powi(graph.edge_count() as i32)
}

fn for_each_combination<F: FnMut(&[u32])>(n: usize, k: usize, f: &mut F) {
    fn rec<F: FnMut(&[u32])>(n: u32, k: usize, start: u32, cur: &mut Vec<u32>, f: &mut F) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if ((n - i) as usize) < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(n, k, i + 1, cur, f);
            cur.pop();
        }
    }
    rec(n as u32, k, 0, &mut Vec::with_capacity(k), f);
}

/// All copies of the pattern in `K_n` as sorted lists of edge indices
/// (see [`EdgeIndexing`]).
pub fn copies_in_kn(graph: &GraphSpec, n: usize, budget: u128) -> Result<Vec<Vec<u32>>> {
    let v = graph.vertex_count();
    if n < v {
        return Err(Error::TooFewVertices { n, vertices: v });
    }
    let count = copy_count(graph, n);
    if count > budget {
        return Err(Error::BudgetExceeded {
            what: "copies in K_n",
            count,
            budget,
        });
    }
    let labeled = labeled_copies(graph);
    let idx = EdgeIndexing::new(n);
    let mut out = Vec::with_capacity(count as usize);
    for_each_combination(n, v, &mut |subset| {
        for copy in &labeled {
            let mut e: Vec<u32> = copy
                .iter()
                .map(|&(a, b)| idx.index(subset[a as usize], subset[b as usize]))
                .collect();
            e.sort_unstable();
            out.push(e);
        }
    });
    Ok(out)
}

fn sorted_overlap(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut s) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                s += 1;
                i += 1;
                j += 1;
            }
        }
    }
    s
}

/// Exact `Var N_G` by symmetry of `K_n`: every copy has the same
/// neighbourhood of overlapping copies, so
/// `Var = #copies * sum_{C' : |C cap C'| = s >= 1} (p^{2e-s} - p^{2e})`
/// for one fixed copy `C`.
pub fn variance_exact(graph: &GraphSpec, n: usize, p: f64) -> Result<f64> {
    variance_exact_with_budget(graph, n, p, DEFAULT_EMBEDDING_BUDGET)
}

pub fn variance_exact_with_budget(graph: &GraphSpec, n: usize, p: f64, budget: u128) -> Result<f64> {
    check_probability(p)?;
    let v = graph.vertex_count();
    if n < v {
        return Err(Error::TooFewVertices { n, vertices: v });
    }
    let e = graph.edge_count();
    let falling: u128 = (0..v - 2).map(|i| (n - 2 - i) as u128).product();
    let work = (e * e * 2) as u128 * falling;
    if work > budget {
        return Err(Error::BudgetExceeded {
            what: "embeddings for the exact variance",
            count: work,
            budget,
        });
    }
    let idx = EdgeIndexing::new(n);
    let mut fixed: Vec<u32> = graph.edges().iter().map(|&(a, b)| idx.index(a, b)).collect();
    fixed.sort_unstable();

    let overlapping = overlapping_copies(graph, n, &fixed);
    let base = p.powi(2 * e as i32);
    let mut sum = 0.0;
    for copy in &overlapping {
        let s = sorted_overlap(&fixed, copy);
        sum += p.powi((2 * e - s) as i32) - base;
    }
    Ok(copy_count(graph, n) as f64 * sum)
}

/// Copies of the pattern sharing at least one edge with `fixed`, the copy
/// embedded by the identity on vertices `0..v`.
fn overlapping_copies(graph: &GraphSpec, n: usize, fixed: &[u32]) -> BTreeSet<Vec<u32>> {
    let v = graph.vertex_count();
    let idx = EdgeIndexing::new(n);
    let mut out = BTreeSet::new();
    let mut image = vec![u32::MAX; v];
    let mut used = vec![false; n];
    for &(x, y) in graph.edges() {
        for &(a, b) in graph.edges() {
            for (s, t) in [(a, b), (b, a)] {
                image.iter_mut().for_each(|i| *i = u32::MAX);
                image[s as usize] = x;
                image[t as usize] = y;
                used[x as usize] = true;
                used[y as usize] = true;
                extend_embedding(graph, &idx, &mut image, &mut used, 0, &mut |copy| {
                    debug_assert!(sorted_overlap(fixed, copy) >= 1);
                    out.insert(copy.to_vec());
                });
                used[x as usize] = false;
                used[y as usize] = false;
            }
        }
    }
    out
}

fn extend_embedding<F: FnMut(&[u32])>(
    graph: &GraphSpec,
    idx: &EdgeIndexing,
    image: &mut [u32],
    used: &mut [bool],
    from: usize,
    f: &mut F,
) {
    let Some(i) = (from..image.len()).find(|&i| image[i] == u32::MAX) else {
        let mut copy: Vec<u32> = graph
            .edges()
            .iter()
            .map(|&(a, b)| idx.index(image[a as usize], image[b as usize]))
            .collect();
        copy.sort_unstable();
        f(&copy);
        return;
    };
    for w in 0..used.len() {
        if used[w] {
            continue;
        }
        used[w] = true;
        image[i] = w as u32;
        extend_embedding(graph, idx, image, used, i + 1, f);
        image[i] = u32::MAX;
        used[w] = false;
    }
}

/// `Var N_G` as the full double sum over pairs of copies; quadratic in the
/// number of copies, intended as a cross-check at small `n`.
pub fn variance_pair_sum(graph: &GraphSpec, n: usize, p: f64) -> Result<f64> {
    check_probability(p)?;
    let copies = copies_in_kn(graph, n, DEFAULT_COPY_BUDGET)?;
    let e = graph.edge_count();
    let base = p.powi(2 * e as i32);
    let copies = &copies;
    Ok(par::block_sum(Execution::default(), copies.len(), |i| {
        let mut acc = 0.0;
        for other in copies {
            let s = sorted_overlap(&copies[i], other);
            if s > 0 {
                acc += p.powi((2 * e - s) as i32) - base;
            }
        }
        acc
    }))
}

/// `(1 - p) max_H n^{2 v_G - v_H} p^{2 e_G - e_H}`, as a natural logarithm.
pub fn ln_variance_asymptotic(profile: &SubgraphProfile, n: usize, p: f64) -> f64 {
    let (_, ln_min) = profile.min_term(n as f64, p);
    let (v, e) = (profile.vertex_count() as f64, profile.edge_count() as f64);
    (1.0 - p).ln() + 2.0 * v * (n as f64).ln() + 2.0 * e * p.ln() - ln_min
}

pub fn variance_asymptotic(profile: &SubgraphProfile, n: usize, p: f64) -> f64 {
    ln_variance_asymptotic(profile, n, p).exp()
}

/// Chaos kernels of the standardized count `(N_G - E N_G) / sqrt(Var N_G)`:
///
/// ```text
/// f_k(b_1..b_k) = q^{k/2} p^{e_G - k/2} g_k(b) / ((e_G - k)! k! sqrt(Var N_G))
/// ```
///
/// where `g_k(b) = (e_G - k)! * #{copies containing the edges b}` counts the
/// edge sequences completing `b` to a copy.
pub fn subgraph_count_kernels(graph: &GraphSpec, n: usize, p: f64) -> Result<ChaosSum> {
    check_probability(p)?;
    let copies = copies_in_kn(graph, n, DEFAULT_COPY_BUDGET)?;
    let var = variance_exact(graph, n, p)?;
    let e = graph.edge_count();
    let mut containing: Vec<BTreeMap<Vec<u32>, u64>> = vec![BTreeMap::new(); e + 1];
    for copy in &copies {
        for mask in 1u32..(1 << e) {
            let subset: Vec<u32> = (0..e)
                .filter(|&i| mask >> i & 1 == 1)
                .map(|i| copy[i])
                .collect();
            *containing[subset.len()].entry(subset).or_insert(0) += 1;
        }
    }
    let q = 1.0 - p;
    let sd = var.sqrt();
    let mut kernels = Vec::with_capacity(e);
    for (k, counts) in containing.into_iter().enumerate().skip(1) {
        let g_factor = factorial(e - k);
        let prefactor = q.powf(k as f64 / 2.0) * p.powf(e as f64 - k as f64 / 2.0)
            / (factorial(e - k) * factorial(k) * sd);
        let mut kernel = SymmetricKernel::zero(k);
        for (tuple, c) in counts {
            kernel.insert_sorted(tuple, prefactor * g_factor * c as f64);
        }
        kernels.push(kernel);
    }
    ChaosSum::new(0.0, kernels)
}

/// `N_G` on the Bernoulli space of the `C(n, 2)` edge indicators of `K_n`
/// (bit set iff the edge is present).
pub fn count_functional(graph: &GraphSpec, n: usize, p: f64, max_m: usize) -> Result<Functional> {
    let m = EdgeIndexing::new(n).len();
    let space = OutcomeSpace::with_cap(m, p, max_m)?;
    let masks: Vec<u64> = copies_in_kn(graph, n, DEFAULT_COPY_BUDGET)?
        .iter()
        .map(|c| c.iter().fold(0u64, |acc, &i| acc | 1 << i))
        .collect();
    Ok(Functional::from_fn(space, move |w| {
        let w = w as u64;
        masks.iter().filter(|&&c| w & c == c).count() as f64
    }))
}

/// `(N_G - E N_G) / sqrt(Var N_G)` with moments taken from the enumerated
/// distribution itself.
pub fn standardized_count_functional(
    graph: &GraphSpec,
    n: usize,
    p: f64,
    max_m: usize,
) -> Result<Functional> {
    let count = count_functional(graph, n, p, max_m)?;
    let (mean, var) = (count.expect(), count.variance());
    if var <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let sd = var.sqrt();
    Ok(count.map(|x| (x - mean) / sd))
}

fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidProbability(p))
    }
}

/// Branch of the Kolmogorov bound selected by the minimizing subgraph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// Single-edge minimizer and `p` above the dense cutoff: `1/(n sqrt(1-p))`.
    Dense,
    /// Single-edge minimizer, `p` at most the cutoff: `1/(n sqrt(p))`.
    Moderate,
    /// Minimizer with `v` vertices and `e > 1` edges: `(n^v p^e)^{-1/2}`.
    Sparse { vertices: usize, edges: usize },
}

impl Regime {
    fn classify(vertices: usize, edges: usize, p: f64, dense_cutoff: f64) -> Self {
        if edges == 1 {
            if p > dense_cutoff {
                Regime::Dense
            } else {
                Regime::Moderate
            }
        } else {
            Regime::Sparse { vertices, edges }
        }
    }
}

fn half_power(k: usize) -> String {
    if k % 2 == 0 {
        format!("{}", k / 2)
    } else {
        format!("{k}/2")
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Regime::Dense => write!(f, "1/(n*sqrt(1-p))"),
            Regime::Moderate => write!(f, "1/(n*sqrt(p))"),
            Regime::Sparse { vertices, edges } if vertices == edges => {
                write!(f, "(np)^{{-{}}}", half_power(edges))
            }
            Regime::Sparse { vertices, edges } => write!(
                f,
                "n^{{-{}}} p^{{-{}}}",
                half_power(vertices),
                half_power(edges)
            ),
        }
    }
}

/// The Kolmogorov bound `((1 - p) min_H n^{v_H} p^{e_H})^{-1/2}` (up to a
/// constant depending only on the pattern) and the quantities behind it.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphBoundReport {
    pub n: usize,
    pub p: f64,
    pub ln_variance_asymptotic: f64,
    pub variance_asymptotic: f64,
    pub variance_exact: Option<f64>,
    /// `(v_H, e_H)` of the minimizing subgraph.
    pub min_subgraph: (usize, usize),
    pub ln_min_term: f64,
    pub ln_bound: f64,
    pub bound: f64,
    pub regime: Regime,
}

impl GraphBoundReport {
    pub fn from_profile(profile: &SubgraphProfile, n: usize, p: f64) -> Result<Self> {
        Self::with_cutoff(profile, n, p, DEFAULT_DENSE_CUTOFF)
    }

    pub fn with_cutoff(profile: &SubgraphProfile, n: usize, p: f64, dense_cutoff: f64) -> Result<Self> {
        check_probability(p)?;
        if n < profile.vertex_count() {
            return Err(Error::TooFewVertices {
                n,
                vertices: profile.vertex_count(),
            });
        }
        let (e_star, ln_min_term) = profile.min_term(n as f64, p);
        let v_star = profile.vmin(e_star);
        let ln_bound = -0.5 * ((1.0 - p).ln() + ln_min_term);
        let ln_var = ln_variance_asymptotic(profile, n, p);
        Ok(Self {
            n,
            p,
            ln_variance_asymptotic: ln_var,
            variance_asymptotic: ln_var.exp(),
            variance_exact: None,
            min_subgraph: (v_star, e_star),
            ln_min_term,
            ln_bound,
            bound: ln_bound.exp(),
            regime: Regime::classify(v_star, e_star, p, dense_cutoff),
        })
    }
}

/// Bound report for a pattern, with the exact variance filled in when the
/// embedding budget allows.
pub fn kolmogorov_bound_graph(graph: &GraphSpec, n: usize, p: f64) -> Result<GraphBoundReport> {
    let profile = SubgraphProfile::exact(graph)?;
    let mut report = GraphBoundReport::from_profile(&profile, n, p)?;
    report.variance_exact = variance_exact(graph, n, p).ok();
    Ok(report)
}

/// Pattern families with closed-form rate tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// Cycle on `r >= 3` vertices.
    Cycle(usize),
    /// Complete graph on `r >= 3` vertices.
    Complete(usize),
    /// Tree with `r >= 1` edges; the representative pattern is a path.
    Tree(usize),
}

impl Family {
    pub fn parse(name: &str, size: usize) -> Result<Self> {
        let family = match name {
            "cycle" => Family::Cycle(size),
            "complete" => Family::Complete(size),
            "tree" => Family::Tree(size),
            other => return Err(Error::InvalidFamily(format!("unknown family `{other}`"))),
        };
        family.validate()?;
        Ok(family)
    }

    fn validate(self) -> Result<()> {
        match self {
            Family::Cycle(r) | Family::Complete(r) if r < 3 => Err(Error::InvalidFamily(format!(
                "{self:?}: size must be at least 3"
            ))),
            Family::Tree(0) => Err(Error::InvalidFamily("trees need at least one edge".into())),
            _ => Ok(()),
        }
    }

    pub fn graph(self) -> Result<GraphSpec> {
        self.validate()?;
        Ok(match self {
            Family::Cycle(r) => GraphSpec::cycle(r),
            Family::Complete(r) => GraphSpec::complete(r),
            Family::Tree(r) => GraphSpec::path(r),
        })
    }

    pub fn vertex_count(self) -> usize {
        match self {
            Family::Cycle(r) | Family::Complete(r) => r,
            Family::Tree(r) => r + 1,
        }
    }

    /// `(v, e, threshold exponent t)`: below `p = n^{-t}` the whole pattern
    /// minimizes `n^{v_H} p^{e_H}`, above it a single edge does.
    fn sparse_branch(self) -> (usize, usize, f64) {
        match self {
            Family::Cycle(r) => (r, r, (r as f64 - 2.0) / (r as f64 - 1.0)),
            Family::Complete(r) => (r, r * (r - 1) / 2, 2.0 / (r as f64 + 1.0)),
            Family::Tree(r) => (r + 1, r, 1.0),
        }
    }
}

/// Closed-form bound for cycles, complete graphs
/// and trees, with the same dense cutoff as [`GraphBoundReport`].
pub fn closed_form_bound(family: Family, n: usize, p: f64) -> Result<(Regime, f64)> {
    let (regime, ln_bound) = closed_form_ln_bound(family, n, p, DEFAULT_DENSE_CUTOFF)?;
    Ok((regime, ln_bound.exp()))
}

pub fn closed_form_ln_bound(family: Family, n: usize, p: f64, dense_cutoff: f64) -> Result<(Regime, f64)> {
    family.validate()?;
    check_probability(p)?;
    if n < family.vertex_count() {
        return Err(Error::TooFewVertices {
            n,
            vertices: family.vertex_count(),
        });
    }
    let (v, e, t) = family.sparse_branch();
    let (ln_n, ln_p) = ((n as f64).ln(), p.ln());
    let (regime, ln_min) = if ln_p <= -t * ln_n + TIE_TOLERANCE {
        (Regime::Sparse { vertices: v, edges: e }, v as f64 * ln_n + e as f64 * ln_p)
    } else {
        (
            Regime::classify(2, 1, p, dense_cutoff),
            2.0 * ln_n + ln_p,
        )
    };
    Ok((regime, -0.5 * ((1.0 - p).ln() + ln_min)))
}

/// Edge-probability sequences `p_n` for the normality criterion.
#[derive(Clone, Debug, PartialEq)]
pub enum PRule {
    /// `p_n = c n^{-alpha}` with `alpha >= 0`.
    Power { c: f64, alpha: f64 },
    /// `p_n = 1 - c n^{-gamma}` with `gamma > 0`.
    NearOne { c: f64, gamma: f64 },
    /// Explicit values `p_n`, aligned with the `n` sequence.
    Sampled(Vec<f64>),
}

impl PRule {
    pub fn at(&self, n: usize, index: usize) -> f64 {
        let nf = n as f64;
        match self {
            PRule::Power { c, alpha } => c * nf.powf(-alpha),
            PRule::NearOne { c, gamma } => 1.0 - c * nf.powf(-gamma),
            PRule::Sampled(ps) => ps[index],
        }
    }
}

/// Whether `n p^beta -> infinity` and `n^2 (1 - p) -> infinity`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalityVerdict {
    pub np_beta_diverges: bool,
    pub n2_complement_diverges: bool,
    pub normal: bool,
    /// `1 / beta`, the largest admissible exponent for `p = c n^{-alpha}`.
    pub alpha_threshold: f64,
    pub last_np_beta: f64,
    pub last_n2_complement: f64,
}

/// A sampled sequence is taken to diverge when it is nondecreasing over its
/// second half and ends at least twice as large as it starts.
fn sampled_diverges(values: &[f64]) -> bool {
    if values.len() < 2 {
        return false;
    }
    let tail = &values[values.len() / 2..];
    let nondecreasing = tail.windows(2).all(|w| w[1] >= w[0]);
    nondecreasing && values[values.len() - 1] >= 2.0 * values[0]
}

pub fn asymptotic_normality_check(
    profile: &SubgraphProfile,
    n_sequence: &[usize],
    rule: &PRule,
) -> Result<NormalityVerdict> {
    let (bn, bd) = profile.beta();
    let beta = bn as f64 / bd as f64;
    let threshold = bd as f64 / bn as f64;
    if let PRule::Sampled(ps) = rule {
        if ps.len() != n_sequence.len() {
            return Err(Error::InvalidArgument(
                "sampled p values must match the n sequence".into(),
            ));
        }
    }
    let ps: Vec<f64> = n_sequence
        .iter()
        .enumerate()
        .map(|(i, &n)| rule.at(n, i))
        .collect();
    if let Some(&bad) = ps.iter().find(|&&p| !(p > 0.0 && p < 1.0)) {
        return Err(Error::InvalidProbability(bad));
    }
    let np_beta: Vec<f64> = n_sequence
        .iter()
        .zip(&ps)
        .map(|(&n, &p)| n as f64 * p.powf(beta))
        .collect();
    let n2c: Vec<f64> = n_sequence
        .iter()
        .zip(&ps)
        .map(|(&n, &p)| (n as f64).powi(2) * (1.0 - p))
        .collect();
    let (a, b) = match *rule {
        // n p^beta = c^beta n^{1 - alpha beta}; 1 - p -> 1 (alpha > 0) or 1 - c.
        PRule::Power { alpha, .. } => (alpha * (bn as f64) < bd as f64, true),
        // p -> 1 so n p^beta ~ n; n^2 (1 - p) = c n^{2 - gamma}.
        PRule::NearOne { gamma, .. } => (gamma > 0.0, gamma < 2.0),
        PRule::Sampled(_) => (sampled_diverges(&np_beta), sampled_diverges(&n2c)),
    };
    Ok(NormalityVerdict {
        np_beta_diverges: a,
        n2_complement_diverges: b,
        normal: a && b,
        alpha_threshold: threshold,
        last_np_beta: np_beta.last().copied().unwrap_or(f64::NAN),
        last_n2_complement: n2c.last().copied().unwrap_or(f64::NAN),
    })
}

/// Predicted log-log slope in `n` of the bound along `p = c n^{-alpha}`:
/// `-min_H (v_H - alpha e_H) / 2`.
pub fn predicted_slope(profile: &SubgraphProfile, alpha: f64) -> f64 {
    let m = profile
        .pairs()
        .map(|(e, v)| v as f64 - alpha * e as f64)
        .fold(f64::INFINITY, f64::min);
    -0.5 * m
}

/// Copies of the pattern as edge-index sets, deduplicated; exposed for
/// diagnostics on small `n`.
pub fn copy_set(graph: &GraphSpec, n: usize) -> Result<HashSet<Vec<u32>>> {
    Ok(copies_in_kn(graph, n, DEFAULT_COPY_BUDGET)?.into_iter().collect())
}
