//! Numerical kernels: the binomial deviation normalizer `xi`, KL divergences
//! and their level-set inversions, a nested golden-section maximizer for the
//! two-moment risk surface, and a projected-gradient solver for box-and-
//! equality constrained quadratic programs.
//!
//! Everything here is deterministic: no randomness, fixed iteration budgets,
//! and bisection/golden-section tolerances pinned as constants. All bound
//! computations in the crate reduce to these four primitives.

use std::cell::Cell;

use crate::error::{Error, Result};

/// Absolute tolerance for the KL level-set bisections.
const BISECTION_TOL: f64 = 1e-9;
/// Maximum bisection iterations (worst case narrows the unit interval to
/// below 1e-18, so the tolerance always wins first).
const BISECTION_MAX_ITER: u32 = 60;
/// Interval tolerance for golden-section searches.
const GOLDEN_TOL: f64 = 1e-12;
const GOLDEN_MAX_ITER: u32 = 300;
/// The open constraint `2e + d < 1` is realized as `2e + d <= 1 - OPEN_MARGIN`.
const FC_OPEN_MARGIN: f64 = 1e-12;
/// Largest sample size accepted by [`xi`]; the term table is O(m).
const XI_MAX_M: u64 = 10_000_000;

// ---------------------------------------------------------------------------
// xi: sum over k of C(m,k) (k/m)^k (1 - k/m)^(m-k)
// ---------------------------------------------------------------------------

/// Compensated (Neumaier) running sum.
#[derive(Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        self.compensation += if self.sum.abs() >= x.abs() {
            (self.sum - t) + x
        } else {
            (x - t) + self.sum
        };
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// `ln k!` for `k = 0..=max`, by compensated accumulation of `ln i`.
///
/// Exact for `k <= 2` and accurate to a few ulps on the log scale elsewhere,
/// which keeps the small-m values of [`xi`] bit-exact where they have short
/// closed forms.
fn ln_factorials(max: usize) -> Vec<f64> {
    let mut table = vec![0.0; max + 1];
    let mut acc = CompensatedSum::default();
    for (i, slot) in table.iter_mut().enumerate().skip(2) {
        acc.add((i as f64).ln());
        *slot = acc.value();
    }
    table
}

/// Binomial deviation normalizer:
/// `xi(m) = sum_{k=0}^{m} C(m,k) (k/m)^k ((m-k)/m)^(m-k)` with `0^0 = 1`.
///
/// Satisfies `sqrt(m) <= xi(m) <= 2 sqrt(m)`; `xi(1) = 2`, `xi(2) = 2.5`.
/// Terms are evaluated in the log domain to avoid overflow and summed in
/// descending magnitude.
pub fn xi(m: u64) -> Result<f64> {
    if m == 0 {
        return Err(Error::ZeroSampleSize);
    }
    if m > XI_MAX_M {
        return Err(Error::ParameterOutOfRange {
            name: "m",
            value: m as f64,
            range: "[1, 10^7]",
        });
    }
    let mm = m as usize;
    let mf = m as f64;
    let lf = ln_factorials(mm);
    let mut terms = Vec::with_capacity(mm + 1);
    for k in 0..=mm {
        let kf = k as f64;
        let mut ln_term = lf[mm] - lf[k] - lf[mm - k];
        if k > 0 {
            ln_term += kf * (kf / mf).ln();
        }
        if k < mm {
            ln_term += (mf - kf) * ((mf - kf) / mf).ln();
        }
        terms.push(ln_term.exp());
    }
    terms.sort_by(|a, b| b.total_cmp(a));
    Ok(terms.iter().sum())
}

// ---------------------------------------------------------------------------
// KL divergences
// ---------------------------------------------------------------------------

/// One cell of a discrete KL divergence: `q ln(q/p)` with `0 ln 0 = 0` and
/// `q > 0, p <= 0 -> +inf`.
#[inline]
fn kl_term(q: f64, p: f64) -> f64 {
    if q == 0.0 {
        0.0
    } else if p <= 0.0 {
        f64::INFINITY
    } else {
        q * (q / p).ln()
    }
}

/// Bernoulli KL divergence `kl(q || p)`. Boundary conventions: `0 ln 0 = 0`,
/// divergence to a boundary `p` that `q` does not sit on is `+inf`.
pub fn kl_bernoulli(q: f64, p: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&q), "q = {q} outside [0, 1]");
    kl_term(q, p) + kl_term(1.0 - q, 1.0 - p)
}

/// KL divergence between two trivalent distributions given by their first two
/// cells: `kl((q1, q2, 1-q1-q2) || (p1, p2, 1-p1-p2))`.
pub fn kl_trivalent(q1: f64, q2: f64, p1: f64, p2: f64) -> f64 {
    debug_assert!(q1 >= 0.0 && q2 >= 0.0 && q1 + q2 <= 1.0 + 1e-9);
    let q_rest = (1.0 - q1 - q2).max(0.0);
    let p_rest = 1.0 - p1 - p2;
    kl_term(q1, p1) + kl_term(q2, p2) + kl_term(q_rest, p_rest)
}

// ---------------------------------------------------------------------------
// KL level-set inversion
// ---------------------------------------------------------------------------

/// Which end of the KL level set `{ r : kl(q || r) <= tau }` to locate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InversionDirection {
    /// Largest `r` in `[q, cap]` with `kl(q || r) <= tau`; returns `cap` when
    /// the level is never exceeded (or `q >= cap`).
    Sup,
    /// Smallest `r` in `[0, q]` with `kl(q || r) <= tau`; returns 0 when the
    /// level is never exceeded.
    Inf,
}

/// A level-set inversion request.
#[derive(Debug, Clone, Copy)]
pub struct KlLevelSetQuery {
    pub q: f64,
    pub tau: f64,
    pub direction: InversionDirection,
    /// Upper limit for [`InversionDirection::Sup`] (e.g. 1/2 for a Gibbs
    /// risk, 1 for a joint error). Ignored by `Inf`.
    pub cap: f64,
}

/// Result of a level-set inversion.
#[derive(Debug, Clone, Copy)]
pub struct Inversion {
    pub value: f64,
    pub iterations: u32,
}

/// Inverts the Bernoulli KL at level `tau` by bisection
/// (tolerance 1e-9, at most 60 iterations).
pub fn kl_invert(query: &KlLevelSetQuery) -> Result<Inversion> {
    let KlLevelSetQuery {
        q,
        tau,
        direction,
        cap,
    } = *query;
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::ParameterOutOfRange {
            name: "q",
            value: q,
            range: "[0, 1]",
        });
    }
    if tau < 0.0 || tau.is_nan() {
        return Err(Error::ParameterOutOfRange {
            name: "tau",
            value: tau,
            range: "[0, inf)",
        });
    }
    match direction {
        InversionDirection::Sup => {
            if !(0.0..=1.0).contains(&cap) {
                return Err(Error::ParameterOutOfRange {
                    name: "cap",
                    value: cap,
                    range: "[0, 1]",
                });
            }
            if q >= cap || kl_bernoulli(q, cap) <= tau {
                return Ok(Inversion {
                    value: cap,
                    iterations: 0,
                });
            }
            // kl(q || r) grows from 0 as r moves up from q; keep lo feasible.
            let (mut lo, mut hi) = (q, cap);
            let mut iterations = 0;
            while iterations < BISECTION_MAX_ITER && hi - lo > BISECTION_TOL {
                let mid = 0.5 * (lo + hi);
                if kl_bernoulli(q, mid) <= tau {
                    lo = mid;
                } else {
                    hi = mid;
                }
                iterations += 1;
            }
            Ok(Inversion {
                value: lo,
                iterations,
            })
        }
        InversionDirection::Inf => {
            if kl_bernoulli(q, 0.0) <= tau {
                return Ok(Inversion {
                    value: 0.0,
                    iterations: 0,
                });
            }
            // kl(q || r) falls to 0 as r moves up toward q; keep hi feasible.
            let (mut lo, mut hi) = (0.0, q);
            let mut iterations = 0;
            while iterations < BISECTION_MAX_ITER && hi - lo > BISECTION_TOL {
                let mid = 0.5 * (lo + hi);
                if kl_bernoulli(q, mid) > tau {
                    lo = mid;
                } else {
                    hi = mid;
                }
                iterations += 1;
            }
            Ok(Inversion {
                value: hi,
                iterations,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Golden-section search
// ---------------------------------------------------------------------------

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes a unimodal `f` on `[lo, hi]`; returns `(x, f(x), evaluations)`.
/// Ties keep the left subinterval, so a `-inf` plateau on the right cannot
/// swallow a feasible hump.
fn golden_section_max(lo: f64, hi: f64, f: &dyn Fn(f64) -> f64) -> (f64, f64, u32) {
    let (mut a, mut b) = (lo, hi);
    let mut h = b - a;
    if h <= GOLDEN_TOL {
        let x = 0.5 * (a + b);
        return (x, f(x), 1);
    }
    let mut c = b - INV_PHI * h;
    let mut d = a + INV_PHI * h;
    let mut fc = f(c);
    let mut fd = f(d);
    let mut evals = 2;
    while h > GOLDEN_TOL && evals < GOLDEN_MAX_ITER {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            h = b - a;
            c = b - INV_PHI * h;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            h = b - a;
            d = a + INV_PHI * h;
            fd = f(d);
        }
        evals += 1;
    }
    if fc >= fd {
        (c, fc, evals)
    } else {
        (d, fd, evals)
    }
}

// ---------------------------------------------------------------------------
// Maximization of the two-moment risk surface over a confidence region
// ---------------------------------------------------------------------------

/// The surface `F(d, e) = 1 - (1 - (2e + d))^2 / (1 - 2d)`, concave on
/// `d < 1/2`. Its supremum over the confidence region below upper-bounds the
/// majority-vote risk.
#[inline]
fn fc_surface(d: f64, e: f64) -> f64 {
    let denom = 1.0 - 2.0 * d;
    if denom <= 0.0 {
        return f64::NEG_INFINITY;
    }
    1.0 - (1.0 - (2.0 * e + d)).powi(2) / denom
}

/// Confidence region for the joint (disagreement, joint-error) pair:
/// `kl((d_s, e_s) || (d, e)) <= tau`, intersected with `d <= 2 (sqrt(e) - e)`
/// and the open half-plane `2e + d < 1`, plus an optional cap on `e`.
#[derive(Debug, Clone, Copy)]
pub struct FcRegion {
    /// Empirical disagreement.
    pub d_s: f64,
    /// Empirical joint error.
    pub e_s: f64,
    /// KL radius of the region.
    pub tau: f64,
    /// Optional extra upper bound on the joint error.
    pub e_cap: Option<f64>,
}

/// Outcome of [`maximize_fc_over_region`].
#[derive(Debug, Clone, Copy)]
pub struct FcMaximum {
    /// Supremum of the surface over the region; exactly 1 when the region is
    /// empty (the vacuous case) or touches the `2e + d = 1` boundary, where
    /// the closure supremum is 1.
    pub value: f64,
    /// Maximizing `(d, e)` pair; `None` when the region is empty.
    pub argmax: Option<(f64, f64)>,
    pub empty: bool,
    /// Total surface/divergence evaluations spent.
    pub evaluations: u32,
}

/// Maximizes [`fc_surface`] over an [`FcRegion`] by nested golden-section
/// search: outer over `d`, inner over `e`. The region is convex and the
/// surface concave, so both one-dimensional problems are unimodal.
pub fn maximize_fc_over_region(region: &FcRegion) -> Result<FcMaximum> {
    let FcRegion { d_s, e_s, tau, .. } = *region;
    for (name, v) in [("d_s", d_s), ("e_s", e_s)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::ParameterOutOfRange {
                name,
                value: v,
                range: "[0, 1]",
            });
        }
    }
    if d_s + e_s > 1.0 + 1e-12 {
        return Err(Error::InvalidInput {
            context: format!("d_s + e_s = {} exceeds 1", d_s + e_s),
        });
    }
    if tau < 0.0 || tau.is_nan() {
        return Err(Error::ParameterOutOfRange {
            name: "tau",
            value: tau,
            range: "[0, inf)",
        });
    }
    let e_cap = region.e_cap.unwrap_or(1.0);
    if !(0.0..=1.0).contains(&e_cap) {
        return Err(Error::ParameterOutOfRange {
            name: "e_cap",
            value: e_cap,
            range: "[0, 1]",
        });
    }

    let boundary = 1.0 - FC_OPEN_MARGIN;
    let evals = Cell::new(0u32);
    let count = |x: f64| {
        evals.set(evals.get() + 1);
        x
    };

    // Feasible e-interval for a fixed d, from the algebraic constraints only:
    // d <= 2 (sqrt(e) - e) pins sqrt(e) between the roots of 2u - 2u^2 = d.
    let slice = |d: f64| -> Option<(f64, f64)> {
        if !(0.0..=0.5).contains(&d) {
            return None;
        }
        let s = (1.0 - 2.0 * d).max(0.0).sqrt();
        let lo = ((1.0 - s) / 2.0).powi(2);
        let hi = (((1.0 + s) / 2.0).powi(2))
            .min((boundary - d) / 2.0)
            .min(e_cap);
        (lo <= hi).then_some((lo, hi))
    };
    // Unconstrained minimizer of the divergence in e for fixed d.
    let center = |d: f64| -> f64 {
        if d_s >= 1.0 {
            e_s
        } else {
            e_s * (1.0 - d) / (1.0 - d_s)
        }
    };
    // Smallest divergence achievable on the slice at d (the profile).
    let profile = |d: f64| -> f64 {
        match slice(d) {
            None => f64::INFINITY,
            Some((lo, hi)) => count(kl_trivalent(d_s, e_s, d, center(d).clamp(lo, hi))),
        }
    };

    // Locate the profile minimum; the profile is convex with +inf plateaus
    // only on the right, so the left-biased golden section is safe.
    let (d_center, neg_min, _) = golden_section_max(0.0, 0.5, &|d| -profile(d));
    if -neg_min > tau + 1e-15 {
        return Ok(FcMaximum {
            value: 1.0,
            argmax: None,
            empty: true,
            evaluations: evals.get(),
        });
    }

    // Feasible d-interval endpoints by bisection on the profile level set.
    let d_lo = if profile(0.0) <= tau {
        0.0
    } else {
        let (mut lo, mut hi) = (0.0, d_center);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if profile(mid) > tau {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    };
    let d_hi = {
        // The slice at d = 1/2 is always empty (the open boundary cuts it),
        // so the profile is +inf there and the bisection is well posed.
        let (mut lo, mut hi) = (d_center, 0.5);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if profile(mid) <= tau {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };

    // Best surface value on the slice at d, or None when the KL constraint
    // empties it (possible right at the interval endpoints).
    let inner = |d: f64| -> Option<(f64, f64)> {
        let (lo, hi) = slice(d)?;
        let c = center(d).clamp(lo, hi);
        if count(kl_trivalent(d_s, e_s, d, c)) > tau + 1e-15 {
            return None;
        }
        let e_left = if count(kl_trivalent(d_s, e_s, d, lo)) <= tau {
            lo
        } else {
            let (mut a, mut b) = (lo, c);
            for _ in 0..80 {
                let mid = 0.5 * (a + b);
                if count(kl_trivalent(d_s, e_s, d, mid)) > tau {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            b
        };
        let e_right = if count(kl_trivalent(d_s, e_s, d, hi)) <= tau {
            hi
        } else {
            let (mut a, mut b) = (c, hi);
            for _ in 0..80 {
                let mid = 0.5 * (a + b);
                if count(kl_trivalent(d_s, e_s, d, mid)) <= tau {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            a
        };
        let (e_star, value, _) = golden_section_max(e_left, e_right, &|e| count(fc_surface(d, e)));
        Some((e_star, value))
    };

    let best: Cell<Option<(f64, f64, f64)>> = Cell::new(None);
    let outer = |d: f64| -> f64 {
        match inner(d) {
            None => f64::NEG_INFINITY,
            Some((e, v)) => {
                if best.get().map_or(true, |(_, _, bv)| v > bv) {
                    best.set(Some((d, e, v)));
                }
                v
            }
        }
    };
    // Seed with the profile center and both endpoints (golden section never
    // probes exact endpoints), then search.
    outer(d_center);
    outer(d_lo);
    outer(d_hi);
    golden_section_max(d_lo, d_hi, &outer);

    let (d_star, e_star, mut value) = best.get().expect("feasible region has an interior point");
    // Region touches the open boundary: the closure supremum there is 1.
    if 1.0 - (2.0 * e_star + d_star) <= 1e-9 {
        value = 1.0;
    }
    Ok(FcMaximum {
        value,
        argmax: Some((d_star, e_star)),
        empty: false,
        evaluations: evals.get(),
    })
}

// ---------------------------------------------------------------------------
// Box + single-equality quadratic program
// ---------------------------------------------------------------------------

/// `minimize q' Q q - l' q  subject to  e' q = rhs,  0 <= q_i <= upper`.
///
/// `Q` must be symmetric positive semidefinite.
#[derive(Debug, Clone)]
pub struct QpProblem {
    pub quadratic: Vec<Vec<f64>>,
    pub linear: Vec<f64>,
    pub equality: Vec<f64>,
    pub rhs: f64,
    pub upper: f64,
}

/// Solver outcome with convergence diagnostics.
#[derive(Debug, Clone)]
pub struct QpSolution {
    pub q: Vec<f64>,
    pub objective: f64,
    pub iterations: u32,
    pub kkt_residual: f64,
}

const QP_KKT_TOL: f64 = 1e-6;
const QP_MAX_ITER: u32 = 200_000;
const QP_CHECK_EVERY: u32 = 25;
const QP_SYMMETRY_TOL: f64 = 1e-10;
const QP_EIGEN_FLOOR: f64 = -1e-8;

fn matvec(mat: &[Vec<f64>], v: &[f64], out: &mut [f64]) {
    for (o, row) in out.iter_mut().zip(mat) {
        *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dominant (signed) eigenvalue estimate of a symmetric matrix by power
/// iteration from a fixed pseudo-random start.
fn dominant_eigenvalue(mat: &[Vec<f64>]) -> f64 {
    let n = mat.len();
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + ((i.wrapping_mul(2_654_435_761) % 97) as f64) / 97.0)
        .collect();
    let norm = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    let mut w = vec![0.0; n];
    let mut lambda = 0.0;
    for _ in 0..200 {
        matvec(mat, &v, &mut w);
        lambda = dot(&v, &w);
        let wn = dot(&w, &w).sqrt();
        if wn == 0.0 {
            return 0.0;
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / wn;
        }
    }
    lambda
}

/// Euclidean projection onto `{ q in [0, upper]^n : e' q = rhs }` via the
/// exact breakpoint method for the continuous knapsack: `q(theta) =
/// clamp(z + theta e)` with `e' q(theta)` piecewise linear and nondecreasing
/// in `theta`.
fn project_box_hyperplane(z: &[f64], e: &[f64], rhs: f64, upper: f64) -> Vec<f64> {
    let clamp = |x: f64| x.clamp(0.0, upper);
    if e.iter().all(|&c| c == 0.0) {
        // Equality is vacuous (feasibility was checked by the caller).
        return z.iter().map(|&x| clamp(x)).collect();
    }
    let value_at = |theta: f64| -> f64 {
        z.iter()
            .zip(e)
            .map(|(&zi, &ei)| clamp(zi + theta * ei) * ei)
            .sum()
    };
    let mut breaks: Vec<f64> = Vec::with_capacity(2 * e.len());
    for (&zi, &ei) in z.iter().zip(e) {
        if ei != 0.0 {
            breaks.push(-zi / ei);
            breaks.push((upper - zi) / ei);
        }
    }
    breaks.sort_by(|a, b| a.total_cmp(b));

    let theta = if value_at(breaks[0]) >= rhs {
        breaks[0]
    } else if value_at(*breaks.last().unwrap()) <= rhs {
        *breaks.last().unwrap()
    } else {
        // Largest breakpoint with value <= rhs, then solve the linear segment.
        let (mut lo, mut hi) = (0usize, breaks.len() - 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if value_at(breaks[mid]) <= rhs {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (t0, t1) = (breaks[lo], breaks[hi]);
        let t_mid = 0.5 * (t0 + t1);
        let slope: f64 = z
            .iter()
            .zip(e)
            .filter(|(&zi, &ei)| {
                ei != 0.0 && {
                    let q = zi + t_mid * ei;
                    q > 0.0 && q < upper
                }
            })
            .map(|(_, &ei)| ei * ei)
            .sum();
        if slope > 0.0 {
            (t0 + (rhs - value_at(t0)) / slope).clamp(t0, t1)
        } else {
            t0
        }
    };
    z.iter()
        .zip(e)
        .map(|(&zi, &ei)| clamp(zi + theta * ei))
        .collect()
}

/// Max-norm KKT residual of `q` for a [`QpProblem`], minimizing over the
/// equality multiplier. Gradient is `2 Q q - l`; at a lower-active coordinate
/// the reduced gradient must be nonnegative, at an upper-active one
/// nonpositive, and zero at free coordinates.
fn kkt_residual(problem: &QpProblem, q: &[f64], grad: &[f64]) -> f64 {
    let n = q.len();
    let active_tol = 1e-9 * problem.upper.max(1.0);
    let residual_for = |mu: f64| -> f64 {
        let mut worst = 0.0f64;
        for i in 0..n {
            let r = grad[i] + mu * problem.equality[i];
            let c = if q[i] <= active_tol {
                (-r).max(0.0)
            } else if q[i] >= problem.upper - active_tol {
                r.max(0.0)
            } else {
                r.abs()
            };
            worst = worst.max(c);
        }
        worst
    };
    // Least-squares multiplier from the free coordinates when any exist.
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..n {
        if q[i] > active_tol && q[i] < problem.upper - active_tol {
            num += grad[i] * problem.equality[i];
            den += problem.equality[i] * problem.equality[i];
        }
    }
    if den > 0.0 {
        return residual_for(-num / den);
    }
    // Vertex solution: try every kink of the piecewise-linear residual.
    let mut best = residual_for(0.0);
    for i in 0..n {
        if problem.equality[i] != 0.0 {
            best = best.min(residual_for(-grad[i] / problem.equality[i]));
        }
    }
    best
}

fn objective(problem: &QpProblem, q: &[f64]) -> f64 {
    let mut qq = vec![0.0; q.len()];
    matvec(&problem.quadratic, q, &mut qq);
    dot(q, &qq) - dot(&problem.linear, q)
}

/// Solves a [`QpProblem`] by accelerated projected gradient (FISTA with
/// gradient-mapping restarts), stopping when the KKT residual drops below
/// 1e-6. Rejects asymmetric or indefinite quadratics and unreachable
/// equality targets.
pub fn solve_box_eq_qp(problem: &QpProblem) -> Result<QpSolution> {
    let n = problem.quadratic.len();
    if n == 0 || problem.linear.len() != n || problem.equality.len() != n {
        return Err(Error::DimensionMismatch {
            context: format!(
                "quadratic {}x{}, linear {}, equality {}",
                n,
                problem.quadratic.first().map_or(0, Vec::len),
                problem.linear.len(),
                problem.equality.len()
            ),
        });
    }
    if problem.upper <= 0.0 || !problem.upper.is_finite() {
        return Err(Error::ParameterOutOfRange {
            name: "upper",
            value: problem.upper,
            range: "(0, inf)",
        });
    }
    for (i, row) in problem.quadratic.iter().enumerate() {
        if row.len() != n {
            return Err(Error::DimensionMismatch {
                context: format!("quadratic row {i} has {} entries, expected {n}", row.len()),
            });
        }
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidInput {
                    context: format!("quadratic[{i}][{j}] is not finite"),
                });
            }
            let delta = (v - problem.quadratic[j][i]).abs();
            if delta > QP_SYMMETRY_TOL {
                return Err(Error::Asymmetric {
                    row: i,
                    col: j,
                    delta,
                });
            }
        }
    }

    // Reachability of the equality target over the box.
    let (mut lo, mut hi) = (0.0, 0.0);
    for &ei in &problem.equality {
        lo += problem.upper * ei.min(0.0);
        hi += problem.upper * ei.max(0.0);
    }
    let slack = 1e-12 * hi.abs().max(lo.abs()).max(1.0);
    if problem.rhs < lo - slack || problem.rhs > hi + slack {
        return Err(Error::InvalidInput {
            context: format!(
                "equality target {} outside achievable range [{lo}, {hi}]",
                problem.rhs
            ),
        });
    }
    let rhs = problem.rhs.clamp(lo, hi);

    // Spectrum checks: dominant eigenvalue for the step size, shifted power
    // iteration for a smallest-eigenvalue estimate.
    let lambda_dom = dominant_eigenvalue(&problem.quadratic);
    if lambda_dom < QP_EIGEN_FLOOR {
        return Err(Error::NotPsd {
            eigenvalue: lambda_dom,
        });
    }
    let scale = lambda_dom.abs().max(1e-12);
    let shifted: Vec<Vec<f64>> = problem
        .quadratic
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, &v)| if i == j { scale - v } else { -v })
                .collect()
        })
        .collect();
    let lambda_min = scale - dominant_eigenvalue(&shifted);
    if lambda_min < QP_EIGEN_FLOOR {
        return Err(Error::NotPsd {
            eigenvalue: lambda_min,
        });
    }

    let step = if lambda_dom > 0.0 {
        1.0 / (2.0 * lambda_dom)
    } else {
        1.0
    };

    let project = |z: &[f64]| project_box_hyperplane(z, &problem.equality, rhs, problem.upper);
    let mut x = project(&vec![problem.upper / 2.0; n]);
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut grad = vec![0.0; n];
    let mut best_residual = f64::INFINITY;

    for iter in 1..=QP_MAX_ITER {
        matvec(&problem.quadratic, &y, &mut grad);
        for (g, &l) in grad.iter_mut().zip(&problem.linear) {
            *g = 2.0 * *g - l;
        }
        let z: Vec<f64> = y
            .iter()
            .zip(&grad)
            .map(|(&yi, &gi)| yi - step * gi)
            .collect();
        let x_new = project(&z);

        // Gradient-mapping restart keeps the momentum honest on box faces.
        let restart = x_new
            .iter()
            .zip(&x)
            .zip(&y)
            .map(|((&xn, &xo), &yo)| (yo - xn) * (xn - xo))
            .sum::<f64>()
            > 0.0;
        if restart {
            t = 1.0;
            y = x_new.clone();
        } else {
            let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let coeff = (t - 1.0) / t_new;
            y = x_new
                .iter()
                .zip(&x)
                .map(|(&xn, &xo)| xn + coeff * (xn - xo))
                .collect();
            t = t_new;
        }
        let stalled = x_new == x;
        x = x_new;

        if iter % QP_CHECK_EVERY == 0 || stalled || iter == QP_MAX_ITER {
            matvec(&problem.quadratic, &x, &mut grad);
            for (g, &l) in grad.iter_mut().zip(&problem.linear) {
                *g = 2.0 * *g - l;
            }
            let residual = kkt_residual(problem, &x, &grad);
            best_residual = best_residual.min(residual);
            if residual <= QP_KKT_TOL {
                return Ok(QpSolution {
                    objective: objective(problem, &x),
                    q: x,
                    iterations: iter,
                    kkt_residual: residual,
                });
            }
        }
    }
    Err(Error::SolverDiverged {
        iterations: QP_MAX_ITER as usize,
        residual: best_residual,
    })
}
