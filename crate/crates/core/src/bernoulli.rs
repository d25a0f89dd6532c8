//! Exact random functionals on the finite Bernoulli space `{-1, +1}^m`.
//!
//! An outcome is an integer bitmask: bit `k` is set iff `X_k = +1`. A
//! [`Functional`] stores one real value per outcome, so every operator of the
//! discrete Malliavin calculus (gradient, divergence, Ornstein-Uhlenbeck
//! operator and semigroup) is evaluated exactly by enumeration.

use crate::error::{Error, Result};
use crate::kernel::{ChaosSum, SymmetricKernel};
use crate::normal::std_normal_cdf;
use crate::par::{self, Execution};

/// Default cap on the number of coordinates, i.e. a `2^24` value table.
pub const MAX_COORDINATES: usize = 24;

/// Hard limit for [`OutcomeSpace::with_cap`]; outcomes are indexed by `usize`.
const HARD_CAP: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OutcomeSpace {
    m: usize,
    p: f64,
}

impl OutcomeSpace {
    pub fn new(m: usize, p: f64) -> Result<Self> {
        Self::with_cap(m, p, MAX_COORDINATES)
    }

    pub fn with_cap(m: usize, p: f64, cap: usize) -> Result<Self> {
        let cap = cap.min(HARD_CAP);
        if m == 0 {
            return Err(Error::InvalidArgument(
                "an outcome space needs at least one coordinate".into(),
            ));
        }
        if m > cap {
            return Err(Error::SpaceTooLarge { m, cap });
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidProbability(p));
        }
        Ok(Self { m, p })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        1.0 - self.p
    }

    pub fn sqrt_pq(&self) -> f64 {
        (self.p * self.q()).sqrt()
    }

    /// Number of outcomes, `2^m`.
    pub fn len(&self) -> usize {
        1usize << self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `Y_k` on outcomes with `X_k = +1`, i.e. `sqrt(q/p)`.
    pub fn y_plus(&self) -> f64 {
        (self.q() / self.p).sqrt()
    }

    /// `Y_k` on outcomes with `X_k = -1`, i.e. `-sqrt(p/q)`.
    pub fn y_minus(&self) -> f64 {
        -(self.p / self.q()).sqrt()
    }

    /// `P(omega) = p^{#(+1)} q^{#(-1)}` indexed by the number of `+1` coordinates.
    pub fn weights_by_popcount(&self) -> Vec<f64> {
        let q = self.q();
        (0..=self.m)
            .map(|k| self.p.powi(k as i32) * q.powi((self.m - k) as i32))
            .collect()
    }

    pub fn probability(&self, outcome: usize) -> f64 {
        let k = outcome.count_ones() as i32;
        self.p.powi(k) * self.q().powi(self.m as i32 - k)
    }

    /// The coordinate `X_k(omega)` as `+1.0` or `-1.0`.
    pub fn coordinate(&self, outcome: usize, k: usize) -> f64 {
        if outcome >> k & 1 == 1 {
            1.0
        } else {
            -1.0
        }
    }

    fn check_index(&self, k: usize) -> Result<()> {
        if k >= self.m {
            Err(Error::IndexOutOfRange {
                index: k,
                len: self.m,
            })
        } else {
            Ok(())
        }
    }
}

/// A real random variable on an [`OutcomeSpace`], one value per outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct Functional {
    space: OutcomeSpace,
    values: Vec<f64>,
}

impl Functional {
    pub fn new(space: OutcomeSpace, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::LengthMismatch {
                expected: space.len(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { space, values })
    }

    pub fn from_fn<F>(space: OutcomeSpace, f: F) -> Self
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        let values = par::map_range(Execution::default(), space.len(), f);
        Self { space, values }
    }

    pub fn constant(space: OutcomeSpace, c: f64) -> Self {
        Self {
            space,
            values: vec![c; space.len()],
        }
    }

    /// The raw coordinate `X_k`.
    pub fn coordinate(space: OutcomeSpace, k: usize) -> Result<Self> {
        space.check_index(k)?;
        Ok(Self::from_fn(space, move |w| space.coordinate(w, k)))
    }

    /// The centered, normalized coordinate `Y_k = (q - p + X_k) / (2 sqrt(pq))`.
    pub fn y_variable(space: OutcomeSpace, k: usize) -> Result<Self> {
        space.check_index(k)?;
        let (yp, ym) = (space.y_plus(), space.y_minus());
        Ok(Self::from_fn(space, move |w| {
            if w >> k & 1 == 1 {
                yp
            } else {
                ym
            }
        }))
    }

    pub fn space(&self) -> &OutcomeSpace {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn value(&self, outcome: usize) -> f64 {
        self.values[outcome]
    }

    fn check_same_space(&self, other: &Functional) -> Result<()> {
        if self.space != other.space {
            Err(Error::SpaceMismatch)
        } else {
            Ok(())
        }
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Functional {
        Functional {
            space: self.space,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with<F: Fn(f64, f64) -> f64>(&self, other: &Functional, f: F) -> Result<Functional> {
        self.check_same_space(other)?;
        Ok(Functional {
            space: self.space,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Functional) -> Result<Functional> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Functional) -> Result<Functional> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Functional) -> Result<Functional> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> Functional {
        self.map(|v| c * v)
    }

    /// Largest pointwise absolute difference.
    pub fn sup_distance(&self, other: &Functional) -> Result<f64> {
        self.check_same_space(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// `E[F] = sum_omega P(omega) F(omega)`.
    pub fn expect(&self) -> f64 {
        self.expect_with(Execution::default())
    }

    pub fn expect_with(&self, exec: Execution) -> f64 {
        let w = self.space.weights_by_popcount();
        let values = &self.values;
        par::block_sum(exec, values.len(), |i| {
            w[i.count_ones() as usize] * values[i]
        })
    }

    /// `E[F G]`.
    pub fn expect_product(&self, other: &Functional) -> Result<f64> {
        self.check_same_space(other)?;
        let w = self.space.weights_by_popcount();
        let (a, b) = (&self.values, &other.values);
        Ok(par::block_sum(Execution::default(), a.len(), |i| {
            w[i.count_ones() as usize] * a[i] * b[i]
        }))
    }

    pub fn variance(&self) -> f64 {
        let mean = self.expect();
        let w = self.space.weights_by_popcount();
        let values = &self.values;
        par::block_sum(Execution::default(), values.len(), |i| {
            let d = values[i] - mean;
            w[i.count_ones() as usize] * d * d
        })
    }

    /// `D_k F(omega) = sqrt(pq) (F(omega_+^k) - F(omega_-^k))` for every `k`.
    pub fn finite_difference(&self) -> DiscreteGradient {
        let s = self.space.sqrt_pq();
        let rows = (0..self.space.m)
            .map(|k| {
                let bit = 1usize << k;
                let values = &self.values;
                Functional::from_fn(self.space, move |w| {
                    s * (values[w | bit] - values[w & !bit])
                })
            })
            .collect();
        DiscreteGradient {
            space: self.space,
            rows,
        }
    }

    /// Dense coefficients `c(S) = E[F prod_{i in S} Y_i]` of the chaos expansion.
    pub fn chaos_coefficients(&self) -> ChaosCoefficients {
        let mut coeffs = self.values.clone();
        forward_transform(&self.space, &mut coeffs);
        ChaosCoefficients {
            space: self.space,
            coeffs,
        }
    }

    /// Chaos decomposition `F = sum_n I_n(f_n)` with
    /// `f_n(t) = E[F prod_{i in t} Y_i] / n!` on sorted tuples `t`.
    pub fn chaos_project(&self) -> ChaosSum {
        self.chaos_coefficients().to_chaos_sum()
    }

    /// `L F = -sum_n n I_n(f_n)`.
    pub fn ou_apply(&self) -> Functional {
        let mut c = self.chaos_coefficients();
        c.scale_by_order(|n| -(n as f64));
        c.reconstruct()
    }

    /// `L^{-1} F = -sum_{n >= 1} I_n(f_n) / n`, applied to `F - E[F]`.
    pub fn ou_inverse(&self) -> Functional {
        let mut c = self.chaos_coefficients();
        c.scale_by_order(|n| if n == 0 { 0.0 } else { -1.0 / n as f64 });
        c.reconstruct()
    }

    /// `P_t F = sum_n e^{-nt} I_n(f_n)`.
    pub fn semigroup(&self, t: f64) -> Result<Functional> {
        if !(t >= 0.0) {
            return Err(Error::NegativeTime(t));
        }
        let mut c = self.chaos_coefficients();
        c.scale_by_order(|n| (-(n as f64) * t).exp());
        Ok(c.reconstruct())
    }

    /// Distinct values of `F` in increasing order with their probabilities.
    pub fn distribution(&self) -> Vec<(f64, f64)> {
        let w = self.space.weights_by_popcount();
        let mut atoms: Vec<(f64, f64)> = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, w[i.count_ones() as usize]))
            .collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (v, p) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += p,
                _ => merged.push((v, p)),
            }
        }
        merged
    }

    /// Exact `sup_x |P(F <= x) - Phi(x)|`.
    pub fn kolmogorov_to_normal(&self) -> f64 {
        let mut below = 0.0;
        let mut sup: f64 = 0.0;
        for (a, prob) in self.distribution() {
            let phi = std_normal_cdf(a);
            let at = below + prob;
            sup = sup.max((below - phi).abs()).max((at - phi).abs());
            below = at;
        }
        sup
    }

    /// The four terms of the Stein bound for a centered `F`; see [`TermReport`].
    pub fn stein_bound(&self) -> Result<TermReport> {
        self.stein_bound_with_tolerance(1e-10)
    }

    pub fn stein_bound_with_tolerance(&self, tol: f64) -> Result<TermReport> {
        let mean = self.expect();
        if mean.abs() >= tol {
            return Err(Error::NotCentered(mean));
        }
        let space = self.space;
        let spq = space.sqrt_pq();
        let pq = spq * spq;
        let second_moment = self.expect_product(self)?;

        let grad = self.finite_difference();
        let inv = self.ou_inverse();
        let grad_inv = inv.finite_difference();

        // <DF, -DL^{-1}F>
        let gamma = grad.inner(&grad_inv)?.scale(-1.0);
        let gamma_var = gamma.variance().max(0.0);

        let mut fourth = 0.0;
        let mut mixed = 0.0;
        for (dk, dlk) in grad.rows.iter().zip(&grad_inv.rows) {
            fourth += dk.map(|v| v.powi(4)).expect();
            let f_dl = self.mul(dlk)?;
            mixed += f_dl.expect_product(&f_dl)?;
        }

        let variance_gap = (1.0 - second_moment).abs();
        let gamma_term = gamma_var.sqrt();
        let fourth_moment_term =
            fourth.sqrt() * (second_moment.sqrt() + mixed.sqrt()) / (2.0 * spq);

        // E[<D 1_{F>x}, DF |DL^{-1}F|>] is a nonnegative step function of x:
        // along coordinate k the pair (omega_-, omega_+) contributes
        // P(rest) pq |F_+ - F_-| |D_k L^{-1}F| for x in [min, max).
        let mut events: Vec<(f64, f64)> = Vec::new();
        let q = space.q();
        for (k, dlk) in grad_inv.rows.iter().enumerate() {
            let bit = 1usize << k;
            for w in 0..space.len() {
                if w & bit != 0 {
                    continue;
                }
                let a = self.values[w];
                let b = self.values[w | bit];
                if a == b {
                    continue;
                }
                let rest = space.probability(w) / q;
                let weight = rest * pq * (b - a).abs() * dlk.values[w].abs();
                if weight == 0.0 {
                    continue;
                }
                events.push((a.min(b), weight));
                events.push((a.max(b), -weight));
            }
        }
        events.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut level = 0.0;
        let mut sup: f64 = 0.0;
        let mut i = 0;
        while i < events.len() {
            let x = events[i].0;
            while i < events.len() && events[i].0 == x {
                level += events[i].1;
                i += 1;
            }
            sup = sup.max(level);
        }
        let indicator_term = sup / spq;

        Ok(TermReport {
            variance_gap,
            gamma_term,
            fourth_moment_term,
            indicator_term,
            total: variance_gap + gamma_term + fourth_moment_term + indicator_term,
        })
    }
}

/// Terms of the Kolmogorov bound for a centered functional `F`:
///
/// ```text
/// d_K(F, N) <= |1 - E[F^2]|
///            + sqrt(Var <DF, -DL^{-1}F>)
///            + (2 sqrt(pq))^{-1} sqrt(sum_k E[(D_k F)^4])
///                 (sqrt(E[F^2]) + sqrt(sum_k E[(F D_k L^{-1}F)^2]))
///            + (pq)^{-1/2} sup_x E[<D 1_{F > x}, DF |DL^{-1}F|>]
/// ```
///
/// Each field already includes its coefficient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TermReport {
    pub variance_gap: f64,
    pub gamma_term: f64,
    pub fourth_moment_term: f64,
    pub indicator_term: f64,
    pub total: f64,
}

/// `DF = (D_0 F, ..., D_{m-1} F)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteGradient {
    space: OutcomeSpace,
    rows: Vec<Functional>,
}

impl DiscreteGradient {
    pub fn space(&self) -> &OutcomeSpace {
        &self.space
    }

    pub fn rows(&self) -> &[Functional] {
        &self.rows
    }

    pub fn row(&self, k: usize) -> &Functional {
        &self.rows[k]
    }

    /// Pointwise `<DF, DG> = sum_k D_k F D_k G`.
    pub fn inner(&self, other: &DiscreteGradient) -> Result<Functional> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        let mut acc = Functional::constant(self.space, 0.0);
        for (a, b) in self.rows.iter().zip(&other.rows) {
            for ((s, x), y) in acc.values.iter_mut().zip(&a.values).zip(&b.values) {
                *s += x * y;
            }
        }
        Ok(acc)
    }

    pub fn into_process(self) -> SimpleProcess {
        SimpleProcess {
            space: self.space,
            rows: self.rows,
        }
    }
}

/// A process `u = (u_0, ..., u_{m-1})` of functionals on a common space.
#[derive(Clone, Debug, PartialEq)]
pub struct SimpleProcess {
    space: OutcomeSpace,
    rows: Vec<Functional>,
}

impl SimpleProcess {
    pub fn new(space: OutcomeSpace, rows: Vec<Functional>) -> Result<Self> {
        if rows.len() != space.m() {
            return Err(Error::LengthMismatch {
                expected: space.m(),
                got: rows.len(),
            });
        }
        if rows.iter().any(|r| r.space != space) {
            return Err(Error::SpaceMismatch);
        }
        Ok(Self { space, rows })
    }

    pub fn space(&self) -> &OutcomeSpace {
        &self.space
    }

    pub fn rows(&self) -> &[Functional] {
        &self.rows
    }

    /// Pointwise `<DF, u>`.
    pub fn pair_with(&self, grad: &DiscreteGradient) -> Result<Functional> {
        grad.inner(&DiscreteGradient {
            space: self.space,
            rows: self.rows.clone(),
        })
    }

    /// Divergence `delta(u)`, the unique functional with
    /// `E[F delta(u)] = E[<DF, u>]` for every `F`.
    ///
    /// Solving the duality pair by pair along coordinate `k` gives
    /// `delta(u) = sum_k Y_k E_k[u_k]`, where `E_k` integrates out `X_k`.
    pub fn divergence(&self) -> Functional {
        let space = self.space;
        let (p, q) = (space.p(), space.q());
        let (yp, ym) = (space.y_plus(), space.y_minus());
        let rows = &self.rows;
        Functional::from_fn(space, move |w| {
            let mut acc = 0.0;
            for (k, u) in rows.iter().enumerate() {
                let bit = 1usize << k;
                let avg = q * u.values[w & !bit] + p * u.values[w | bit];
                acc += if w & bit != 0 { yp } else { ym } * avg;
            }
            acc
        })
    }

    /// Divergence by chaos symmetrization: with `u_k = sum_n I_n(f_{n+1}(*, k))`,
    /// `delta(u) = sum_n I_{n+1}(symmetrized f_{n+1})`.
    pub fn divergence_by_chaos(&self) -> Functional {
        let space = self.space;
        let mut total = vec![0.0; space.len()];
        for (k, u) in self.rows.iter().enumerate() {
            let bit = 1usize << k;
            let c = u.chaos_coefficients();
            for (s, &v) in c.coeffs.iter().enumerate() {
                if s & bit == 0 {
                    total[s | bit] += v;
                }
            }
        }
        ChaosCoefficients {
            space,
            coeffs: total,
        }
        .reconstruct()
    }
}

/// Dense chaos coefficients `c(S) = E[F Y^S]` indexed by subset bitmask `S`.
///
/// `F = sum_S c(S) prod_{i in S} Y_i`; the kernel of order `|S|` takes the
/// value `c(S) / |S|!` on the sorted tuple `S`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChaosCoefficients {
    space: OutcomeSpace,
    coeffs: Vec<f64>,
}

impl ChaosCoefficients {
    pub fn from_vec(space: OutcomeSpace, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.len() {
            return Err(Error::LengthMismatch {
                expected: space.len(),
                got: coeffs.len(),
            });
        }
        Ok(Self { space, coeffs })
    }

    pub fn space(&self) -> &OutcomeSpace {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn scale_by_order<F: Fn(usize) -> f64>(&mut self, f: F) {
        let factors: Vec<f64> = (0..=self.space.m).map(f).collect();
        for (s, c) in self.coeffs.iter_mut().enumerate() {
            *c *= factors[s.count_ones() as usize];
        }
    }

    pub fn reconstruct(&self) -> Functional {
        let mut values = self.coeffs.clone();
        inverse_transform(&self.space, &mut values);
        Functional {
            space: self.space,
            values,
        }
    }

    pub fn to_chaos_sum(&self) -> ChaosSum {
        let m = self.space.m;
        let mut factorial = vec![1.0f64; m + 1];
        for n in 1..=m {
            factorial[n] = factorial[n - 1] * n as f64;
        }
        let mut kernels: Vec<SymmetricKernel> = (1..=m).map(SymmetricKernel::zero).collect();
        for (s, &c) in self.coeffs.iter().enumerate().skip(1) {
            if c == 0.0 {
                continue;
            }
            let n = s.count_ones() as usize;
            let tuple: Vec<u32> = (0..m as u32).filter(|&i| s >> i & 1 == 1).collect();
            kernels[n - 1].insert_sorted(tuple, c / factorial[n]);
        }
        kernels.retain(|k| !k.is_empty());
        ChaosSum::new(self.coeffs[0], kernels).expect("orders are increasing by construction")
    }
}

fn forward_transform(space: &OutcomeSpace, v: &mut [f64]) {
    let (p, q, s) = (space.p(), space.q(), space.sqrt_pq());
    butterfly(space.m, v, move |a, b| (q * a + p * b, s * (b - a)));
}

fn inverse_transform(space: &OutcomeSpace, v: &mut [f64]) {
    let (yp, ym) = (space.y_plus(), space.y_minus());
    butterfly(space.m, v, move |a0, a1| (a0 + a1 * ym, a0 + a1 * yp));
}

/// Applies a 2x2 map to every pair `(v[w], v[w | 1 << k])`, for each `k`.
fn butterfly<F>(m: usize, v: &mut [f64], f: F)
where
    F: Fn(f64, f64) -> (f64, f64) + Sync + Send + Copy,
{
    let exec = if v.len() >= 1 << 14 {
        Execution::default()
    } else {
        Execution::Sequential
    };
    for k in 0..m {
        let half = 1usize << k;
        let chunk = (half << 1).max(1 << 12).min(v.len());
        par::for_each_chunk_mut(exec, v, chunk, move |block| {
            for base in (0..block.len()).step_by(half << 1) {
                for i in base..base + half {
                    let (x, y) = f(block[i], block[i + half]);
                    block[i] = x;
                    block[i + half] = y;
                }
            }
        });
    }
}

/// `I_n(f) = sum over ordered off-diagonal tuples of f(i_1..i_n) Y_{i_1}...Y_{i_n}`,
/// evaluated directly on every outcome.
pub fn eval_multiple_integral(space: OutcomeSpace, f: &SymmetricKernel) -> Result<Functional> {
    if let Some(bound) = f.support_bound() {
        if bound > space.m() {
            return Err(Error::KernelIndexOutOfRange {
                index: (bound - 1) as u32,
                m: space.m(),
            });
        }
    }
    let order = f.order();
    let nfact: f64 = (1..=order).map(|i| i as f64).product();
    let entries: Vec<(u64, f64)> = f
        .iter()
        .map(|(t, v)| (t.iter().fold(0u64, |acc, &i| acc | 1 << i), nfact * v))
        .collect();
    let (yp, ym) = (space.y_plus(), space.y_minus());
    let mut ypow = vec![0.0; order + 1];
    for (j, slot) in ypow.iter_mut().enumerate() {
        *slot = yp.powi(j as i32) * ym.powi((order - j) as i32);
    }
    Ok(Functional::from_fn(space, move |w| {
        let mut acc = 0.0;
        for &(mask, v) in &entries {
            let plus = (mask & w as u64).count_ones() as usize;
            acc += v * ypow[plus];
        }
        acc
    }))
}
