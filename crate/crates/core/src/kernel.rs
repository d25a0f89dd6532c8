//! Sparse symmetric kernels, contractions and the multiplication formula.
//!
//! A [`SymmetricKernel`] of order `n` is stored on strictly increasing index
//! tuples; its value on any permutation of a tuple is the same and it vanishes
//! on diagonals. Norms and inner products are taken over *ordered* tuples, so
//! `||f||^2 = n! * sum_sorted f^2`.

use std::collections::{BTreeMap, HashMap};

use crate::bernoulli::{eval_multiple_integral, ChaosCoefficients, Functional, OutcomeSpace};
use crate::error::{Error, Result};

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricKernel {
    order: usize,
    entries: BTreeMap<Vec<u32>, f64>,
}

impl SymmetricKernel {
    pub fn zero(order: usize) -> Self {
        Self {
            order,
            entries: BTreeMap::new(),
        }
    }

    /// Order-0 kernel with value `c`.
    pub fn constant(c: f64) -> Self {
        let mut k = Self::zero(0);
        k.insert_sorted(Vec::new(), c);
        k
    }

    /// Kernel with value 1 on the given index set.
    pub fn indicator(indices: &[u32]) -> Result<Self> {
        Self::from_entries(indices.len(), vec![(indices.to_vec(), 1.0)])
    }

    /// Builds a kernel from `(tuple, value)` pairs. Tuples may be given in any
    /// order; a later pair for the same index set overwrites an earlier one.
    pub fn from_entries<I>(order: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        let mut k = Self::zero(order);
        for (mut t, v) in entries {
            t.sort_unstable();
            if t.len() != order || t.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidTuple(t));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite);
            }
            k.insert_sorted(t, v);
        }
        Ok(k)
    }

    /// Inserts a value on an already sorted, repetition-free tuple.
    pub(crate) fn insert_sorted(&mut self, tuple: Vec<u32>, value: f64) {
        debug_assert_eq!(tuple.len(), self.order);
        if value == 0.0 {
            self.entries.remove(&tuple);
        } else {
            self.entries.insert(tuple, value);
        }
    }

    fn add_sorted(&mut self, tuple: Vec<u32>, value: f64) {
        *self.entries.entry(tuple).or_insert(0.0) += value;
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.entries.iter().map(|(t, &v)| (t.as_slice(), v))
    }

    /// Value at an arbitrary (ordered) index tuple; zero on diagonals.
    pub fn get(&self, tuple: &[u32]) -> f64 {
        if tuple.len() != self.order {
            return 0.0;
        }
        let mut t = tuple.to_vec();
        t.sort_unstable();
        if t.windows(2).any(|w| w[0] == w[1]) {
            return 0.0;
        }
        self.entries.get(&t).copied().unwrap_or(0.0)
    }

    /// One past the largest index in the support, `None` when no index appears.
    pub fn support_bound(&self) -> Option<usize> {
        self.entries
            .keys()
            .filter_map(|t| t.last())
            .max()
            .map(|&i| i as usize + 1)
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = Self::zero(self.order);
        for (t, &v) in &self.entries {
            out.insert_sorted(t.clone(), c * v);
        }
        out
    }

    /// `sum f^2` over ordered tuples.
    pub fn norm_sq(&self) -> f64 {
        factorial(self.order) * self.entries.values().map(|v| v * v).sum::<f64>()
    }

    /// `<f, g>` over ordered tuples; zero for different orders.
    pub fn inner(&self, other: &Self) -> f64 {
        if self.order != other.order {
            return 0.0;
        }
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let s: f64 = small
            .entries
            .iter()
            .filter_map(|(t, v)| large.entries.get(t).map(|w| v * w))
            .sum();
        factorial(self.order) * s
    }

    /// The order `n - 1` kernel `f(*, k)`; zero for order-0 kernels.
    pub fn section(&self, k: u32) -> Self {
        let mut out = Self::zero(self.order.saturating_sub(1));
        if self.order == 0 {
            return out;
        }
        for (t, &v) in &self.entries {
            if let Ok(pos) = t.binary_search(&k) {
                let mut rest = t.clone();
                rest.remove(pos);
                out.insert_sorted(rest, v);
            }
        }
        out
    }

    /// `I_n(f)` on the given outcome space.
    pub fn evaluate(&self, space: OutcomeSpace) -> Result<Functional> {
        eval_multiple_integral(space, self)
    }

    /// Dense dump lines `k i1 .. ik value` in increasing tuple order, with
    /// values printed to 17 significant digits.
    pub fn dump_lines(&self) -> Vec<String> {
        self.entries
            .iter()
            .map(|(t, v)| {
                let mut line = self.order.to_string();
                for i in t {
                    line.push(' ');
                    line.push_str(&i.to_string());
                }
                line.push(' ');
                line.push_str(&format!("{v:.16e}"));
                line
            })
            .collect()
    }
}

/// `F = c + sum_k I_k(f_k)` with kernels of distinct increasing positive orders.
#[derive(Clone, Debug, PartialEq)]
pub struct ChaosSum {
    constant: f64,
    kernels: Vec<SymmetricKernel>,
}

impl ChaosSum {
    pub fn new(constant: f64, kernels: Vec<SymmetricKernel>) -> Result<Self> {
        let ok = kernels.iter().all(|k| k.order() >= 1)
            && kernels.windows(2).all(|w| w[0].order() < w[1].order());
        if !ok {
            return Err(Error::InvalidChaosOrders);
        }
        Ok(Self { constant, kernels })
    }

    pub fn zero() -> Self {
        Self {
            constant: 0.0,
            kernels: Vec::new(),
        }
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn kernels(&self) -> &[SymmetricKernel] {
        &self.kernels
    }

    pub fn kernel(&self, order: usize) -> Option<&SymmetricKernel> {
        self.kernels.iter().find(|k| k.order() == order)
    }

    pub fn max_order(&self) -> usize {
        self.kernels.last().map_or(0, |k| k.order())
    }

    /// `Var F = sum_k k! ||f_k||^2`.
    pub fn variance(&self) -> f64 {
        self.kernels
            .iter()
            .map(|k| factorial(k.order()) * k.norm_sq())
            .sum()
    }

    /// `F` on every outcome, through the dense coefficients
    /// `c(S) = |S|! f_{|S|}(S)` and one inverse transform, `O(m 2^m)`.
    pub fn evaluate(&self, space: OutcomeSpace) -> Result<Functional> {
        let mut coeffs = vec![0.0; space.len()];
        coeffs[0] = self.constant;
        for k in &self.kernels {
            if let Some(bound) = k.support_bound() {
                if bound > space.m() {
                    return Err(Error::KernelIndexOutOfRange {
                        index: (bound - 1) as u32,
                        m: space.m(),
                    });
                }
            }
            let nfact = factorial(k.order());
            for (t, v) in k.iter() {
                let mask = t.iter().fold(0usize, |acc, &i| acc | 1 << i);
                coeffs[mask] += nfact * v;
            }
        }
        Ok(ChaosCoefficients::from_vec(space, coeffs)?.reconstruct())
    }

    /// Sum of the direct evaluations of each `I_n(f_n)`.
    pub fn evaluate_direct(&self, space: OutcomeSpace) -> Result<Functional> {
        let mut acc = Functional::constant(space, self.constant);
        for k in &self.kernels {
            acc = acc.add(&eval_multiple_integral(space, k)?)?;
        }
        Ok(acc)
    }
}

/// Raw (unsymmetrized) contraction `f *_k^l g`.
///
/// The output arguments come in three groups: the `k - l` shared free
/// indices, the `n - k` remaining arguments of `f` and the `m - k` remaining
/// arguments of `g`. The value depends only on the set in each group, so an
/// entry is keyed by the concatenation of the three sorted groups and stands
/// for `(k-l)! (n-k)! (m-k)!` ordered tuples.
#[derive(Clone, Debug, PartialEq)]
pub struct ContractionResult {
    shared: usize,
    left: usize,
    right: usize,
    diagonal_removed: bool,
    entries: BTreeMap<Vec<u32>, f64>,
}

impl ContractionResult {
    /// Number of free arguments, `n + m - k - l`.
    pub fn arity(&self) -> usize {
        self.shared + self.left + self.right
    }

    /// Sizes of the (shared, left-only, right-only) argument groups.
    pub fn groups(&self) -> (usize, usize, usize) {
        (self.shared, self.left, self.right)
    }

    /// Whether the output-diagonal indicator was applied.
    pub fn diagonal_removed(&self) -> bool {
        self.diagonal_removed
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn multiplicity(&self) -> f64 {
        factorial(self.shared) * factorial(self.left) * factorial(self.right)
    }

    /// Value at an ordered output tuple `(shared.., left.., right..)`.
    pub fn value_at(&self, tuple: &[u32]) -> f64 {
        if tuple.len() != self.arity() {
            return 0.0;
        }
        let (a, b) = (self.shared, self.shared + self.left);
        let mut key = Vec::with_capacity(tuple.len());
        for group in [&tuple[..a], &tuple[a..b], &tuple[b..]] {
            let mut g = group.to_vec();
            g.sort_unstable();
            if g.windows(2).any(|w| w[0] == w[1]) {
                return 0.0;
            }
            key.extend(g);
        }
        self.entries.get(&key).copied().unwrap_or(0.0)
    }

    /// Squared norm over ordered output tuples.
    pub fn norm_sq(&self) -> f64 {
        self.multiplicity() * self.entries.values().map(|v| v * v).sum::<f64>()
    }

    /// Symmetrization in all `n + m - k - l` arguments. Entries whose groups
    /// overlap (only present without the diagonal indicator) are dropped.
    pub fn symmetrize(&self) -> SymmetricKernel {
        let arity = self.arity();
        let weight = self.multiplicity() / factorial(arity);
        let mut out = SymmetricKernel::zero(arity);
        for (key, &v) in &self.entries {
            let mut t = key.clone();
            t.sort_unstable();
            if t.windows(2).any(|w| w[0] == w[1]) {
                continue;
            }
            out.add_sorted(t, weight * v);
        }
        out.entries.retain(|_, v| *v != 0.0);
        out
    }
}

fn for_each_subset<F: FnMut(&[u32], &[u32])>(items: &[u32], size: usize, f: &mut F) {
    fn rec<F: FnMut(&[u32], &[u32])>(
        items: &[u32],
        size: usize,
        start: usize,
        chosen: &mut Vec<u32>,
        rest: &mut Vec<u32>,
        f: &mut F,
    ) {
        if chosen.len() == size {
            let before = rest.len();
            rest.extend_from_slice(&items[start..]);
            f(chosen, rest);
            rest.truncate(before);
            return;
        }
        if items.len() - start < size - chosen.len() {
            return;
        }
        chosen.push(items[start]);
        rec(items, size, start + 1, chosen, rest, f);
        chosen.pop();
        rest.push(items[start]);
        rec(items, size, start + 1, chosen, rest, f);
        rest.pop();
    }
    rec(items, size, 0, &mut Vec::new(), &mut Vec::new(), f);
}

fn contract_impl(
    f: &SymmetricKernel,
    g: &SymmetricKernel,
    k: usize,
    l: usize,
    remove_diagonal: bool,
) -> Result<ContractionResult> {
    let (n, m) = (f.order(), g.order());
    if l > k || k > n.min(m) {
        return Err(Error::InvalidContraction { n, m, k, l });
    }
    // Bucket the entries of g by the k-subset shared with f.
    let mut buckets: HashMap<Vec<u32>, Vec<(Vec<u32>, f64)>> = HashMap::new();
    for (t, v) in g.iter() {
        for_each_subset(t, k, &mut |shared, rest| {
            buckets
                .entry(shared.to_vec())
                .or_default()
                .push((rest.to_vec(), v));
        });
    }
    let lfact = factorial(l);
    let mut entries: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
    for (t, fv) in f.iter() {
        for_each_subset(t, k, &mut |shared, left| {
            let Some(bucket) = buckets.get(shared) else {
                return;
            };
            // l summed indices, k - l free shared indices
            for_each_subset(shared, l, &mut |_summed, free| {
                for (right, gv) in bucket {
                    if remove_diagonal && left.iter().any(|i| right.binary_search(i).is_ok()) {
                        continue;
                    }
                    let mut key = Vec::with_capacity(free.len() + left.len() + right.len());
                    key.extend_from_slice(free);
                    key.extend_from_slice(left);
                    key.extend_from_slice(right);
                    *entries.entry(key).or_insert(0.0) += lfact * fv * gv;
                }
            });
        });
    }
    entries.retain(|_, v| *v != 0.0);
    Ok(ContractionResult {
        shared: k - l,
        left: n - k,
        right: m - k,
        diagonal_removed: remove_diagonal,
        entries,
    })
}

/// `f *_k^l g`: `k` arguments identified, `l` of them summed, with the
/// indicator of distinct output arguments applied.
pub fn contract(
    f: &SymmetricKernel,
    g: &SymmetricKernel,
    k: usize,
    l: usize,
) -> Result<ContractionResult> {
    contract_impl(f, g, k, l, true)
}

/// Same as [`contract`] without the output-diagonal indicator.
pub fn contract_unrestricted(
    f: &SymmetricKernel,
    g: &SymmetricKernel,
    k: usize,
    l: usize,
) -> Result<ContractionResult> {
    contract_impl(f, g, k, l, false)
}

/// `||f *_k^l g||^2` over ordered output tuples.
pub fn contraction_norm_sq(
    f: &SymmetricKernel,
    g: &SymmetricKernel,
    k: usize,
    l: usize,
) -> Result<f64> {
    Ok(contract(f, g, k, l)?.norm_sq())
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Kernels `h_s`, `s = 0..=2 min(n, m)`, of
/// `I_n(f) I_m(g) = sum_s I_{n+m-s}(h_s)`, where
///
/// ```text
/// h_s = sum_{ceil(s/2) <= i <= min(s, n, m)}
///         i! C(n,i) C(m,i) C(i, s-i) ((q-p)/sqrt(pq))^{2i-s} sym(f *_i^{s-i} g)
/// ```
///
/// The returned vector is indexed by `s`; entry `s` has order `n + m - s`.
pub fn multiply_chaos(f: &SymmetricKernel, g: &SymmetricKernel, p: f64) -> Result<Vec<SymmetricKernel>> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidProbability(p));
    }
    let q = 1.0 - p;
    let skew = (q - p) / (p * q).sqrt();
    let (n, m) = (f.order(), g.order());
    let smax = 2 * n.min(m);
    let mut out = Vec::with_capacity(smax + 1);
    for s in 0..=smax {
        let mut h = SymmetricKernel::zero(n + m - s);
        for i in s.div_ceil(2)..=s.min(n).min(m) {
            let coef = factorial(i)
                * binomial(n, i)
                * binomial(m, i)
                * binomial(i, s - i)
                * skew.powi((2 * i - s) as i32);
            if coef == 0.0 {
                continue;
            }
            let sym = contract(f, g, i, s - i)?.symmetrize();
            for (t, v) in sym.iter() {
                h.add_sorted(t.to_vec(), coef * v);
            }
        }
        h.entries.retain(|_, v| *v != 0.0);
        out.push(h);
    }
    Ok(out)
}

/// The contraction functional
///
/// ```text
/// R_F = sum_{0 <= l < i <= n} (pq)^{l-i} ||f_i *_i^l f_i||^2
///     + sum_{1 <= l < i <= n} (||f_l *_l^l f_i||^2 + ||f_i *_l^l f_i||^2)
/// ```
///
/// Missing orders count as zero kernels; the constant term is ignored.
pub fn r_quantity(chaos: &ChaosSum, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidProbability(p));
    }
    let pq = p * (1.0 - p);
    let top = chaos.max_order();
    let mut r = 0.0;
    for i in 1..=top {
        let Some(fi) = chaos.kernel(i) else { continue };
        for l in 0..i {
            r += pq.powi(l as i32 - i as i32) * contraction_norm_sq(fi, fi, i, l)?;
        }
        for l in 1..i {
            r += contraction_norm_sq(fi, fi, l, l)?;
            if let Some(fl) = chaos.kernel(l) {
                r += contraction_norm_sq(fl, fi, l, l)?;
            }
        }
    }
    Ok(r)
}

/// `(|1 - Var F|, sqrt(R_F))`; the Kolmogorov distance to the normal law is
/// bounded by a constant depending only on the top order times their sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundParts {
    pub variance_gap: f64,
    pub sqrt_r: f64,
}

pub fn chaos_bound_parts(chaos: &ChaosSum, p: f64) -> Result<BoundParts> {
    Ok(BoundParts {
        variance_gap: (1.0 - chaos.variance()).abs(),
        sqrt_r: r_quantity(chaos, p)?.sqrt(),
    })
}
