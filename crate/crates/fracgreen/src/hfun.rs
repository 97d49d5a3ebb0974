//! General Fox H-function: parameter records, the structural indices that
//! govern convergence, and evaluation by explicit power series or by the
//! asymptotic expansion at infinity.
//!
//! The H-function H^{m,n}_{p,q}(z) is defined by a Mellin–Barnes integral
//! over the gamma-quotient
//!
//! ```text
//! χ(s) = Π_{j≤m} Γ(b_j + B_j s) Π_{i≤n} Γ(1 − a_i − A_i s)
//!        ---------------------------------------------------
//!        Π_{i>n} Γ(a_i + A_i s) Π_{j>m} Γ(1 − b_j − B_j s)
//! ```
//!
//! This module never evaluates that contour integral directly. For Δ > 0
//! (or Δ = 0, |z| > δ) the residue series over the poles of Γ(b_h + B_h s)
//! converges and is summed term by term; for Δ > 0, Δ* = 0 the expansion at
//! infinity (algebraic terms plus one oscillatory pair) applies. A dispatcher
//! picks whichever carries the smaller honest error estimate, including the
//! floating-point cancellation floor of the series.
//!
//! The asymptotic expansion is only evaluated on the positive real axis; the
//! expansion's validity sector for complex arguments is deliberately not
//! modelled.

use crate::special::{ln_abs_gamma_sign, POLE_TOL};
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

/// Cap on the number of series terms. Series with Δ > 0 decay factorially,
/// so this is generous; it is hit only deep inside the cancellation regime
/// where the asymptotic expansion takes over anyway.
pub const K_MAX: usize = 2000;

/// Term cap used by [`eval_auto`] before it abandons the series in favour of
/// the asymptotic expansion.
pub const AUTO_SERIES_CAP: usize = 400;

/// Default relative tolerance for series truncation.
pub const DEFAULT_SERIES_TOL: f64 = 1e-14;

/// Safety factor on the asymptotic error scale (Property 4 gives only an
/// o(·) statement, not a remainder bound).
pub const ASYM_SAFETY: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HfunError {
    #[error("invalid H-function orders: need n <= p and m <= q (got m={m}, n={n}, p={p}, q={q})")]
    InvalidOrders { m: usize, n: usize, p: usize, q: usize },
    #[error("invalid coefficient: all A_i and B_j must be positive")]
    InvalidCoefficient,
    #[error("invalid scale: rescale factor must be positive (got {0})")]
    InvalidScale(f64),
    #[error("series conditions violated: {0}")]
    SeriesConditions(String),
    #[error("series did not converge within {terms} terms (partial sum {value}, last |term| {last_term:.3e})")]
    SeriesNotConverged {
        value: Complex64,
        last_term: f64,
        terms: usize,
    },
    #[error("asymptotic expansion inapplicable: requires delta > 0 and delta* = 0 (delta={delta}, delta*={delta_star})")]
    AsymptoticInapplicable { delta: f64, delta_star: f64 },
    #[error("asymptotic expansion evaluated off the positive real axis: z = {0}")]
    PositiveAxisOnly(Complex64),
    #[error("no evaluation method applies to these parameters at z = {0}")]
    NoMethod(Complex64),
}

/// Parameter record of H^{m,n}_{p,q}: `upper` holds the (a_i, A_i) pairs,
/// `lower` the (b_j, B_j) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct HParams {
    pub m: usize,
    pub n: usize,
    pub upper: Vec<(f64, f64)>,
    pub lower: Vec<(f64, f64)>,
}

impl HParams {
    /// Validated constructor: 0 ≤ n ≤ p, 0 ≤ m ≤ q, all A_i > 0, B_j > 0.
    pub fn new(
        upper: Vec<(f64, f64)>,
        lower: Vec<(f64, f64)>,
        m: usize,
        n: usize,
    ) -> Result<Self, HfunError> {
        let (p, q) = (upper.len(), lower.len());
        if n > p || m > q {
            return Err(HfunError::InvalidOrders { m, n, p, q });
        }
        if upper.iter().any(|&(_, a)| !(a > 0.0) || !a.is_finite())
            || lower.iter().any(|&(_, b)| !(b > 0.0) || !b.is_finite())
        {
            return Err(HfunError::InvalidCoefficient);
        }
        Ok(HParams { m, n, upper, lower })
    }

    pub fn p(&self) -> usize {
        self.upper.len()
    }

    pub fn q(&self) -> usize {
        self.lower.len()
    }
}

/// The index quantities Δ, Δ*, δ, μ controlling series convergence and the
/// shape of the expansion at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaSet {
    pub delta: f64,
    pub delta_star: f64,
    pub small_delta: f64,
    pub mu: f64,
}

/// Δ = ΣB_j − ΣA_i; Δ* = Σ_{i≤n}A − Σ_{i>n}A + Σ_{j≤m}B − Σ_{j>m}B;
/// δ = Π A_i^{−A_i} Π B_j^{B_j}; μ = Σb_j − Σa_i + (p−q)/2.
pub fn structural_indices(h: &HParams) -> DeltaSet {
    let sum_a: f64 = h.upper.iter().map(|&(_, a)| a).sum();
    let sum_b: f64 = h.lower.iter().map(|&(_, b)| b).sum();
    let delta = sum_b - sum_a;

    let mut delta_star = 0.0;
    for (i, &(_, a)) in h.upper.iter().enumerate() {
        delta_star += if i < h.n { a } else { -a };
    }
    for (j, &(_, b)) in h.lower.iter().enumerate() {
        delta_star += if j < h.m { b } else { -b };
    }

    let ln_small_delta: f64 = h.lower.iter().map(|&(_, b)| b * b.ln()).sum::<f64>()
        - h.upper.iter().map(|&(_, a)| a * a.ln()).sum::<f64>();

    let mu = h.lower.iter().map(|&(b, _)| b).sum::<f64>()
        - h.upper.iter().map(|&(a, _)| a).sum::<f64>()
        + 0.5 * (h.p() as f64 - h.q() as f64);

    DeltaSet {
        delta,
        delta_star,
        small_delta: ln_small_delta.exp(),
        mu,
    }
}

/// Property 1: multiply every A_i, B_j by k > 0, so that
/// eval(new, z^k) = (1/k)·eval(old, z).
pub fn rescale_argument(h: &HParams, k: f64) -> Result<HParams, HfunError> {
    if !(k > 0.0) {
        return Err(HfunError::InvalidScale(k));
    }
    Ok(HParams {
        m: h.m,
        n: h.n,
        upper: h.upper.iter().map(|&(a, aa)| (a, k * aa)).collect(),
        lower: h.lower.iter().map(|&(b, bb)| (b, k * bb)).collect(),
    })
}

/// Property 2: shift a_i → a_i + σA_i, b_j → b_j + σB_j, so that
/// eval(new, z) = z^σ·eval(old, z).
pub fn power_shift(h: &HParams, sigma: f64) -> HParams {
    HParams {
        m: h.m,
        n: h.n,
        upper: h.upper.iter().map(|&(a, aa)| (a + sigma * aa, aa)).collect(),
        lower: h.lower.iter().map(|&(b, bb)| (b + sigma * bb, bb)).collect(),
    }
}

/// Outcome of the pole-condition scans (k, l ≤ 100, tolerance 1e-9).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConditionReport {
    /// Poles of Γ(1−a_i−A_i s) and Γ(b_j+B_j s) do not coincide.
    pub pole_separation: bool,
    /// Poles of the Γ(b_j+B_j s), j ≤ m are simple.
    pub lower_poles_simple: bool,
    /// Poles of the Γ(1−a_i−A_i s), i ≤ n are simple.
    pub upper_poles_simple: bool,
}

impl ConditionReport {
    pub fn series_ok(&self) -> bool {
        self.pole_separation && self.lower_poles_simple
    }

    pub fn asymptotic_ok(&self) -> bool {
        self.pole_separation && self.upper_poles_simple
    }
}

const SCAN_RANGE: usize = 100;
const SCAN_TOL: f64 = 1e-9;

pub fn check_series_conditions(h: &HParams) -> ConditionReport {
    let mut pole_separation = true;
    'sep: for i in 0..h.n {
        let (ai, aai) = h.upper[i];
        for j in 0..h.m {
            let (bj, bbj) = h.lower[j];
            for k in 0..=SCAN_RANGE {
                for l in 0..=SCAN_RANGE {
                    if (aai * (bj + l as f64) - bbj * (ai - 1.0 - k as f64)).abs() <= SCAN_TOL {
                        pole_separation = false;
                        break 'sep;
                    }
                }
            }
        }
    }

    let mut lower_poles_simple = true;
    'low: for i in 0..h.m {
        let (bi, bbi) = h.lower[i];
        for j in 0..h.m {
            if i == j {
                continue;
            }
            let (bj, bbj) = h.lower[j];
            for k in 0..=SCAN_RANGE {
                for l in 0..=SCAN_RANGE {
                    if (bbi * (bj + l as f64) - bbj * (bi + k as f64)).abs() <= SCAN_TOL {
                        lower_poles_simple = false;
                        break 'low;
                    }
                }
            }
        }
    }

    let mut upper_poles_simple = true;
    'up: for i in 0..h.n {
        let (ai, aai) = h.upper[i];
        for j in 0..h.n {
            if i == j {
                continue;
            }
            let (aj, aaj) = h.upper[j];
            for k in 0..=SCAN_RANGE {
                for l in 0..=SCAN_RANGE {
                    if (aaj * (1.0 - ai + k as f64) - aai * (1.0 - aj + l as f64)).abs() <= SCAN_TOL
                    {
                        upper_poles_simple = false;
                        break 'up;
                    }
                }
            }
        }
    }

    ConditionReport {
        pole_separation,
        lower_poles_simple,
        upper_poles_simple,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMethod {
    Series,
    Asymptotic,
}

impl std::fmt::Display for EvalMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EvalMethod::Series => write!(f, "series"),
            EvalMethod::Asymptotic => write!(f, "asymptotic"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    pub value: Complex64,
    pub abs_error_estimate: f64,
    pub terms_used: usize,
    pub method: EvalMethod,
}

enum Coeff {
    /// ln of magnitude and sign of the real gamma-product coefficient.
    Val { ln: f64, sign: f64 },
    /// A denominator gamma hit a pole: the term vanishes.
    Zero,
    /// A numerator gamma hit a pole: the expansion itself is invalid.
    NumeratorPole,
}

/// Product of numerator gammas over denominator gammas, all real arguments,
/// assembled in log space.
fn gamma_quotient(num: &[f64], den: &[f64]) -> Coeff {
    let mut ln = 0.0;
    let mut sign = 1.0;
    for &x in num {
        let (l, s) = ln_abs_gamma_sign(x);
        if s == 0.0 {
            return Coeff::NumeratorPole;
        }
        ln += l;
        sign *= s;
    }
    for &x in den {
        let (l, s) = ln_abs_gamma_sign(x);
        if s == 0.0 {
            return Coeff::Zero;
        }
        ln -= l;
        sign *= s;
    }
    Coeff::Val { ln, sign }
}

fn series_preconditions(h: &HParams, z: Complex64, idx: &DeltaSet) -> Result<(), HfunError> {
    if z.im == 0.0 && z.re <= 0.0 {
        return Err(HfunError::SeriesConditions(
            "argument on the branch cut (non-positive real axis)".into(),
        ));
    }
    if idx.delta > POLE_TOL {
        // fine for any z != 0
    } else if idx.delta.abs() <= POLE_TOL {
        if z.norm() <= idx.small_delta {
            return Err(HfunError::SeriesConditions(format!(
                "delta = 0 requires |z| > delta_small = {}",
                idx.small_delta
            )));
        }
    } else {
        return Err(HfunError::SeriesConditions("delta < 0".into()));
    }
    let report = check_series_conditions(h);
    if !report.pole_separation {
        return Err(HfunError::SeriesConditions(
            "poles of upper and lower gamma factors coincide".into(),
        ));
    }
    if !report.lower_poles_simple {
        return Err(HfunError::SeriesConditions(
            "lower gamma factors have multiple poles".into(),
        ));
    }
    Ok(())
}

/// Explicit power series (Property 3):
///
/// H(z) = Σ_{h≤m} Σ_{k≥0} χ_h(s_hk) (−1)^k z^{s_hk} / (k! B_h),
/// s_hk = (b_h + k)/B_h.
///
/// Truncation: three consecutive *nonvanishing* combined terms below
/// `tol·|partial sum|` (or below `tol` outright while the sum is near zero)
/// end the sum, as does a long run of exactly-zero terms (a pole-cancelled
/// tail). Terms that vanish through a denominator pole neither count toward
/// nor reset the small-term run, so interleaved structural zeros cannot fake
/// convergence.
///
/// The error estimate is the first omitted nonzero term plus an accumulated
/// round-off floor: each term is assembled from logs of gamma values, so its
/// relative error scales with the magnitude of those logs, and the floor sums
/// ε·|term|·(4 + Σ|log factors|) over the whole series. Once terms grow large
/// before they decay, this floor is what actually limits accuracy.
pub fn eval_series(h: &HParams, z: Complex64, tol: f64) -> Result<EvalResult, HfunError> {
    eval_series_capped(h, z, tol, K_MAX)
}

/// Consecutive exactly-zero terms accepted as a dead tail.
const ZERO_TAIL_RUN: usize = 8;

fn eval_series_capped(
    h: &HParams,
    z: Complex64,
    tol: f64,
    k_cap: usize,
) -> Result<EvalResult, HfunError> {
    let idx = structural_indices(h);
    series_preconditions(h, z, &idx)?;

    let ln_abs_z = z.norm().ln();
    let arg_z = z.arg();

    // One series term with its log-magnitude budget; None when it vanishes.
    let term_at = |hh: usize, k: usize| -> Result<Option<(Complex64, f64)>, HfunError> {
        let (bh, bbh) = h.lower[hh];
        let s_hk = (bh + k as f64) / bbh;
        let mut num = Vec::with_capacity(h.m + h.n);
        for (j, &(bj, bbj)) in h.lower.iter().enumerate().take(h.m) {
            if j != hh {
                num.push(bj - bbj * s_hk);
            }
        }
        for &(ai, aai) in h.upper.iter().take(h.n) {
            num.push(1.0 - ai + aai * s_hk);
        }
        let mut den: Vec<f64> = Vec::with_capacity(h.p() - h.n + h.q() - h.m);
        for &(ai, aai) in h.upper.iter().skip(h.n) {
            den.push(ai - aai * s_hk);
        }
        for &(bj, bbj) in h.lower.iter().skip(h.m) {
            den.push(1.0 - bj + bbj * s_hk);
        }
        match gamma_quotient(&num, &den) {
            Coeff::NumeratorPole => Err(HfunError::SeriesConditions(format!(
                "numerator gamma pole in term h={hh}, k={k}"
            ))),
            Coeff::Zero => Ok(None),
            Coeff::Val { ln, sign } => {
                let (ln_fact, _) = ln_abs_gamma_sign(k as f64 + 1.0);
                let power_ln = s_hk * ln_abs_z;
                let ln_term = ln - ln_fact + power_ln - bbh.ln();
                if ln_term > 705.0 {
                    return Err(HfunError::SeriesNotConverged {
                        value: Complex64::new(f64::NAN, f64::NAN),
                        last_term: f64::INFINITY,
                        terms: k,
                    });
                }
                let mag = ln_term.exp();
                let phase = s_hk * arg_z;
                let sgn = if k % 2 == 0 { sign } else { -sign };
                let log_budget = ln.abs() + ln_fact.abs() + power_ln.abs();
                Ok(Some((Complex64::from_polar(sgn * mag, phase), log_budget)))
            }
        }
    };

    let mut sum = Complex64::new(0.0, 0.0);
    let mut roundoff: f64 = 0.0;
    let mut small_run = 0usize;
    let mut zero_run = 0usize;
    let mut seen_nonzero = false;
    let mut k = 0usize;
    let mut last_mag = f64::INFINITY;

    let finish = |sum: Complex64, roundoff: f64, k: usize| -> Result<EvalResult, HfunError> {
        // first omitted nonzero term as the truncation estimate
        let mut next = 0.0;
        for kk in (k + 1)..(k + 6).min(K_MAX) {
            let t: f64 = (0..h.m)
                .map(|hh| match term_at(hh, kk) {
                    Ok(Some((t, _))) => t.norm(),
                    _ => 0.0,
                })
                .sum();
            if t > 0.0 {
                next = t;
                break;
            }
        }
        Ok(EvalResult {
            value: sum,
            abs_error_estimate: next + roundoff,
            terms_used: k + 1,
            method: EvalMethod::Series,
        })
    };

    while k < k_cap {
        let mut term = Complex64::new(0.0, 0.0);
        let mut budget: f64 = 0.0;
        for hh in 0..h.m {
            match term_at(hh, k) {
                Ok(Some((t, b))) => {
                    term += t;
                    budget = budget.max(b);
                }
                Ok(None) => {}
                Err(HfunError::SeriesNotConverged { .. }) => {
                    return Err(HfunError::SeriesNotConverged {
                        value: sum,
                        last_term: last_mag,
                        terms: k,
                    });
                }
                Err(e) => return Err(e),
            }
        }
        sum += term;
        let mag = term.norm();
        last_mag = mag;
        roundoff += f64::EPSILON * mag * (4.0 + budget);

        if mag == 0.0 {
            zero_run += 1;
            if zero_run >= ZERO_TAIL_RUN && (seen_nonzero || k + 1 >= ZERO_TAIL_RUN) {
                return finish(sum, roundoff, k);
            }
            k += 1;
            continue;
        }
        zero_run = 0;
        seen_nonzero = true;

        let near_zero = sum.norm() < tol;
        let small = if near_zero {
            mag < tol
        } else {
            mag < tol * sum.norm()
        };
        if small {
            small_run += 1;
            if small_run >= 3 {
                return finish(sum, roundoff, k);
            }
        } else {
            small_run = 0;
        }
        k += 1;
    }

    Err(HfunError::SeriesNotConverged {
        value: sum,
        last_term: last_mag,
        terms: k_cap,
    })
}

fn asymptotic_preconditions(h: &HParams, z: Complex64, idx: &DeltaSet) -> Result<(), HfunError> {
    if idx.delta <= POLE_TOL || idx.delta_star.abs() > POLE_TOL {
        return Err(HfunError::AsymptoticInapplicable {
            delta: idx.delta,
            delta_star: idx.delta_star,
        });
    }
    if z.im != 0.0 || z.re <= 0.0 {
        return Err(HfunError::PositiveAxisOnly(z));
    }
    let report = check_series_conditions(h);
    if !report.asymptotic_ok() {
        return Err(HfunError::SeriesConditions(
            "pole separation / upper-pole simplicity fails".into(),
        ));
    }
    Ok(())
}

/// Algebraic and oscillatory parts of the expansion at infinity (Property 4),
/// for Δ > 0, Δ* = 0 and z on the positive real axis:
///
/// H(z) ≈ Σ_i h_i z^{(a_i−1)/A_i}
///        + A z^{(μ+1/2)/Δ} (c₀ e^{i(B+Cz^{1/Δ})} − d₀ e^{−i(B+Cz^{1/Δ})}).
pub fn asymptotic_parts(
    h: &HParams,
    z: Complex64,
) -> Result<(Complex64, Complex64, f64), HfunError> {
    let idx = structural_indices(h);
    asymptotic_preconditions(h, z, &idx)?;
    let x = z.re;
    let (p, q) = (h.p(), h.q());

    // Algebraic terms from the poles of the Γ(1 − a_i − A_i s), i ≤ n.
    let mut algebraic = Complex64::new(0.0, 0.0);
    let mut alg_next_scale = 0.0;
    for i in 0..h.n {
        let (ai, aai) = h.upper[i];
        let e_i = (ai - 1.0) / aai;
        let mut num = Vec::with_capacity(h.m + h.n);
        for &(bj, bbj) in h.lower.iter().take(h.m) {
            num.push(bj - bbj * e_i);
        }
        for (j, &(aj, aaj)) in h.upper.iter().enumerate().take(h.n) {
            if j != i {
                num.push(1.0 - aj + aaj * e_i);
            }
        }
        let mut den: Vec<f64> = Vec::with_capacity(p - h.n + q - h.m);
        for &(aj, aaj) in h.upper.iter().skip(h.n) {
            den.push(aj - aaj * e_i);
        }
        for &(bj, bbj) in h.lower.iter().skip(h.m) {
            den.push(1.0 - bj + bbj * e_i);
        }
        let coeff = match gamma_quotient(&num, &den) {
            Coeff::NumeratorPole => {
                return Err(HfunError::SeriesConditions(format!(
                    "numerator gamma pole in algebraic coefficient h_{i}"
                )))
            }
            Coeff::Zero => 0.0,
            Coeff::Val { ln, sign } => sign * (ln - aai.ln()).exp(),
        };
        algebraic += coeff * x.powf(e_i);
        alg_next_scale += coeff.abs() * x.powf(e_i - 1.0 / aai);
    }

    let delta = idx.delta;
    let mu = idx.mu;
    let e_osc = (mu + 0.5) / delta;
    let ln_dd_over_delta = delta * delta.ln() - idx.small_delta.ln();
    let c_const = (ln_dd_over_delta / delta).exp();

    let mut ln_a0 = 0.5 * (p as f64 - q as f64 + 1.0) * (2.0 * PI).ln() - mu * delta.ln();
    for &(ai, aai) in &h.upper {
        ln_a0 += (-ai + 0.5) * aai.ln();
    }
    for &(bj, bbj) in &h.lower {
        ln_a0 += (bj - 0.5) * bbj.ln();
    }
    let a0 = ln_a0.exp();

    // A = A0 (Δ^Δ/δ)^{(μ+1/2)/Δ} / (2πiΔ)
    let a_const = Complex64::new(0.0, -1.0) * a0 * (e_osc * ln_dd_over_delta).exp()
        / (2.0 * PI * delta);
    let b_const = (2.0 * mu + 1.0) * PI / 4.0;

    let exp_sum: f64 = h.upper.iter().skip(h.n).map(|&(a, _)| a).sum::<f64>()
        - h.lower.iter().take(h.m).map(|&(b, _)| b).sum::<f64>();
    let pw = h.m as i32 + h.n as i32 - p as i32;
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let c0 = two_pi_i.powi(pw) * (Complex64::new(0.0, PI) * exp_sum).exp();
    let d0 = (-two_pi_i).powi(pw) * (Complex64::new(0.0, -PI) * exp_sum).exp();

    let phi = b_const + c_const * x.powf(1.0 / delta);
    let osc = a_const
        * x.powf(e_osc)
        * (c0 * Complex64::new(0.0, phi).exp() - d0 * Complex64::new(0.0, -phi).exp());

    // One z^{-1/Δ} step below the oscillatory scale, plus the next algebraic
    // scale, as the o(·) error proxy.
    let est = ASYM_SAFETY
        * (alg_next_scale
            + a_const.norm() * (c0.norm() + d0.norm()) * x.powf(e_osc - 1.0 / delta));

    Ok((algebraic, osc, est))
}

/// Asymptotic expansion at infinity (Property 4).
pub fn eval_asymptotic(h: &HParams, z: Complex64) -> Result<EvalResult, HfunError> {
    let (algebraic, osc, est) = asymptotic_parts(h, z)?;
    Ok(EvalResult {
        value: algebraic + osc,
        abs_error_estimate: est,
        terms_used: h.n + 1,
        method: EvalMethod::Asymptotic,
    })
}

/// Method dispatch: series while it is the more accurate route, asymptotic
/// expansion beyond the crossover. The crossover is decided per argument by
/// comparing honest error estimates (the series estimate includes its
/// cancellation floor), which is equivalent to a per-parameter-set switch
/// argument z_switch; the series is also abandoned once it needs more than
/// [`AUTO_SERIES_CAP`] terms while the asymptotic expansion is available.
pub fn eval_auto(h: &HParams, z: Complex64) -> Result<EvalResult, HfunError> {
    let idx = structural_indices(h);
    let series_applicable = series_preconditions(h, z, &idx).is_ok();
    let asym_applicable = asymptotic_preconditions(h, z, &idx).is_ok();

    if !series_applicable && !asym_applicable {
        return Err(HfunError::NoMethod(z));
    }
    if series_applicable && !asym_applicable {
        return eval_series(h, z, DEFAULT_SERIES_TOL);
    }
    if !series_applicable {
        return eval_asymptotic(h, z);
    }

    let asym = eval_asymptotic(h, z)?;
    match eval_series_capped(h, z, DEFAULT_SERIES_TOL, AUTO_SERIES_CAP) {
        Ok(series) => {
            if series.abs_error_estimate <= asym.abs_error_estimate {
                Ok(series)
            } else {
                Ok(asym)
            }
        }
        Err(_) => Ok(asym),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// H1 family of the spherically reduced Green's-function integral.
    pub fn h1_params(nu: f64, g: f64) -> HParams {
        let w = (2.0 - g) / nu;
        HParams::new(
            vec![(1.0 - w, 1.0), (0.0, nu / 2.0), (0.5 - w / 2.0, 0.5)],
            vec![(0.0, nu), (0.0, nu / 2.0), (0.5 - w / 2.0, 0.5)],
            1,
            1,
        )
        .unwrap()
    }

    pub fn h2_params(nu: f64, g: f64) -> HParams {
        let w = (2.0 - g) / nu;
        HParams::new(
            vec![(1.0 - w, 1.0), (0.0, nu / 2.0), (1.0 - w / 2.0, 0.5)],
            vec![(0.0, nu), (0.0, nu / 2.0), (1.0 - w / 2.0, 0.5)],
            1,
            1,
        )
        .unwrap()
    }

    /// Specialized series for H1/H2: an independent code path used as oracle.
    fn h_family_series(nu: f64, g: f64, z: f64, second: bool) -> Complex64 {
        let mut sum = 0.0;
        for n in 0..200 {
            let a = (2.0 * n as f64 + 3.0 - g) / nu;
            let gam = gamma(c(a, 0.0)).unwrap().re;
            let trig = if second {
                (a * PI / 2.0).sin()
            } else {
                (a * PI / 2.0).cos()
            };
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let mut fact = 1.0;
            for j in 2..=(2 * n + 1) {
                fact *= j as f64;
            }
            let term = gam * trig * sign * z.powf((2.0 * n as f64 + 1.0) / nu) / fact;
            sum += term;
            if n > 5 && term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        c(sum / (nu * PI * PI), 0.0)
    }

    #[test]
    fn constructor_validates() {
        assert!(h1_params(2.0, 0.0).m == 1);
        // m = 4 with q = 3 violates the order bounds.
        let bad = HParams::new(
            vec![(0.0, 1.0); 3],
            vec![(0.0, 1.0); 3],
            4,
            1,
        );
        assert!(matches!(bad, Err(HfunError::InvalidOrders { .. })));
        let bad = HParams::new(
            vec![(0.0, 1.0), (0.0, 0.0), (0.0, 1.0)],
            vec![(0.0, 1.0); 3],
            1,
            1,
        );
        assert!(matches!(bad, Err(HfunError::InvalidCoefficient)));
    }

    #[test]
    fn structural_indices_h1_at_nu2() {
        let idx = structural_indices(&h1_params(2.0, 0.0));
        assert!((idx.delta - 1.0).abs() < 1e-13);
        assert!(idx.delta_star.abs() < 1e-13);
        assert!((idx.small_delta - 4.0).abs() < 1e-12);
        assert!(idx.mu.abs() < 1e-13);
    }

    #[test]
    fn structural_indices_symmetric_case() {
        // all A = B and a = b with p = q collapses Δ and μ to zero
        let h = HParams::new(
            vec![(0.3, 1.2), (0.7, 0.4)],
            vec![(0.3, 1.2), (0.7, 0.4)],
            1,
            1,
        )
        .unwrap();
        let idx = structural_indices(&h);
        assert!(idx.delta.abs() < 1e-15);
        assert!(idx.mu.abs() < 1e-15);
    }

    #[test]
    fn structural_indices_h2_family() {
        for &nu in &[1.5, 2.0, 2.5] {
            let idx = structural_indices(&h2_params(nu, 0.4));
            assert!((idx.delta - (nu - 1.0)).abs() < 1e-13, "nu = {nu}");
            assert!(idx.delta_star.abs() < 1e-13, "nu = {nu}");
        }
    }

    #[test]
    fn rescale_identity_and_eq20_to_eq21() {
        let h = h1_params(2.0, 0.0);
        let same = rescale_argument(&h, 1.0).unwrap();
        assert_eq!(h, same);
        assert!(matches!(
            rescale_argument(&h, -1.0),
            Err(HfunError::InvalidScale(_))
        ));

        // The Mellin-side parameter list: scaling by nu must give the H1 list.
        let (nu, g) = (2.4, 0.5);
        let w = (2.0 - g) / nu;
        let inner = HParams::new(
            vec![
                (1.0 - w, 1.0 / nu),
                (0.0, 0.5),
                (0.5 - w / 2.0, 0.5 / nu),
            ],
            vec![(0.0, 1.0), (0.0, 0.5), (0.5 - w / 2.0, 0.5 / nu)],
            1,
            1,
        )
        .unwrap();
        let scaled = rescale_argument(&inner, nu).unwrap();
        let target = h1_params(nu, g);
        for (a, b) in scaled.upper.iter().zip(&target.upper) {
            assert!((a.0 - b.0).abs() < 1e-14 && (a.1 - b.1).abs() < 1e-14);
        }
        for (a, b) in scaled.lower.iter().zip(&target.lower) {
            assert!((a.0 - b.0).abs() < 1e-14 && (a.1 - b.1).abs() < 1e-14);
        }
    }

    #[test]
    fn rescale_eval_identity() {
        // (1/k) H(z) = H_rescaled(z^k) at k=2, z=0.7
        let h = h1_params(2.0, 0.0);
        let hk = rescale_argument(&h, 2.0).unwrap();
        let lhs = eval_series(&h, c(0.7, 0.0), 1e-14).unwrap().value / 2.0;
        let rhs = eval_series(&hk, c(0.7f64.powi(2), 0.0), 1e-14).unwrap().value;
        assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1e-12));
    }

    #[test]
    fn power_shift_roundtrip_and_eval() {
        let h = h1_params(2.0, 0.0);
        assert_eq!(power_shift(&h, 0.0), h);
        let back = power_shift(&power_shift(&h, 1.0), -1.0);
        for (a, b) in back.upper.iter().zip(&h.upper) {
            assert!((a.0 - b.0).abs() < 1e-15);
        }

        // z^sigma H(z) = H_shifted(z) at z = 0.5, sigma = 0.3
        let z = c(0.5, 0.0);
        let sigma = 0.3;
        let lhs = z.powf(sigma) * eval_series(&h, z, 1e-14).unwrap().value;
        let rhs = eval_series(&power_shift(&h, sigma), z, 1e-14).unwrap().value;
        assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm());
    }

    #[test]
    fn condition_report_families() {
        let r = check_series_conditions(&h1_params(2.0, 0.0));
        assert!(r.pole_separation && r.lower_poles_simple && r.upper_poles_simple);
        let r = check_series_conditions(&h2_params(2.4, 0.5));
        assert!(r.pole_separation && r.lower_poles_simple && r.upper_poles_simple);

        // coincident lower poles by construction
        let h = HParams::new(
            vec![(0.5, 1.0)],
            vec![(0.0, 1.0), (0.0, 1.0)],
            2,
            0,
        )
        .unwrap();
        assert!(!check_series_conditions(&h).lower_poles_simple);
    }

    #[test]
    fn series_leading_behavior_h1() {
        // H1(z) ~ Γ(1.5) cos(3π/4)/(2π²) · z^{1/2} as z → 0 (ν=2, γ=0).
        let coeff = -0.031_746_817_967_120_485;
        let h = h1_params(2.0, 0.0);
        let z = 1e-8;
        let v = eval_series(&h, c(z, 0.0), 1e-14).unwrap();
        assert!((v.value.re / z.sqrt() - coeff).abs() < 1e-6 * coeff.abs());
        assert!(v.value.im.abs() < 1e-14);
    }

    #[test]
    fn series_sum_reduces_to_k0_term_when_tail_pole_cancelled() {
        // H^{1,0}_{1,1}[z | (1,1); (0,1)]: every k >= 1 term carries Γ(1-k) in
        // the denominator, so the sum is exactly the k = 0 term (= 1 for z > δ).
        let h = HParams::new(vec![(1.0, 1.0)], vec![(0.0, 1.0)], 1, 0).unwrap();
        let v = eval_series(&h, c(2.0, 0.0), 1e-14).unwrap();
        assert_eq!(v.value, c(1.0, 0.0));
    }

    #[test]
    fn series_zero_argument_rejected() {
        let h = h1_params(2.0, 0.0);
        assert!(eval_series(&h, c(0.0, 0.0), 1e-14).is_err());
        assert!(eval_series(&h, c(-1.0, 0.0), 1e-14).is_err());
    }

    #[test]
    fn generic_series_matches_specialized_series() {
        let (nu, g) = (2.4, 0.5);
        for &z in &[0.25, 1.0, 2.0] {
            for second in [false, true] {
                let h = if second {
                    h2_params(nu, g)
                } else {
                    h1_params(nu, g)
                };
                let generic = eval_series(&h, c(z, 0.0), 1e-15).unwrap().value;
                let direct = h_family_series(nu, g, z, second);
                assert!(
                    (generic - direct).norm() <= 1e-10 * direct.norm(),
                    "z={z} second={second}: {generic} vs {direct}"
                );
            }
        }
    }

    #[test]
    fn series_real_on_positive_axis() {
        for &(nu, g) in &[(1.6, -0.7), (2.0, 0.0), (2.8, 0.9)] {
            for &z in &[0.3, 1.7, 5.0] {
                let v = eval_series(&h1_params(nu, g), c(z, 0.0), 1e-14).unwrap();
                assert!(
                    v.value.im.abs() <= 1e-10 * v.value.norm().max(1e-300),
                    "nu={nu} g={g} z={z}"
                );
            }
        }
    }

    #[test]
    fn series_never_fails_on_family_sweep() {
        for i in 0..=6 {
            let nu = 1.2 + 0.3 * i as f64;
            for j in 0..=4 {
                let g = -1.0 + 0.5 * j as f64;
                for &z in &[0.25, 1.0, 4.0] {
                    for h in [h1_params(nu, g), h2_params(nu, g)] {
                        let r = eval_series(&h, c(z, 0.0), 1e-13);
                        assert!(r.is_ok(), "nu={nu} g={g} z={z}: {r:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn asymptotic_algebraic_coefficient() {
        // h1 reproduces Γ(2−γ) sin(γπ/2)/π² · z^{(γ−2)/ν}; zero at γ = 0.
        let (alg, _, _) = asymptotic_parts(&h1_params(2.0, 0.0), c(100.0, 0.0)).unwrap();
        assert_eq!(alg, c(0.0, 0.0));

        let g = -0.4;
        let z = 80.0;
        let (alg, _, _) = asymptotic_parts(&h1_params(2.0, g), c(z, 0.0)).unwrap();
        let expected = gamma(c(2.0 - g, 0.0)).unwrap().re * (g * PI / 2.0).sin() / (PI * PI)
            * z.powf((g - 2.0) / 2.0);
        assert!((alg.re - expected).abs() <= 1e-12 * expected.abs());

        // For the H2 list the same coefficient is annihilated by a
        // denominator gamma pole.
        let (alg2, _, _) = asymptotic_parts(&h2_params(2.0, g), c(z, 0.0)).unwrap();
        assert_eq!(alg2, c(0.0, 0.0));
    }

    #[test]
    fn asymptotic_oscillatory_amplitude_matches_m_over_pi() {
        // |osc| = (M/π) z^E |trig(π/4 + C z^{1/Δ})| with
        // M = ν^{(2γ−3)/(2(ν−1))}/√(2π(ν−1)). At ν=2, γ=0: M/π ≈ 0.0448968.
        let (nu, g): (f64, f64) = (2.0, 0.0);
        let m_over_pi = nu.powf((2.0 * g - 3.0) / (2.0 * (nu - 1.0)))
            / (2.0 * PI * (nu - 1.0)).sqrt()
            / PI;
        assert!((m_over_pi - 0.044_896_780_531_291_64).abs() < 1e-14);

        // Pick z so the H2 phase π/4 + C z^{1/Δ} = π/4 + z/4 sits at a sine
        // extremum: z = π + 8πk ⇒ sin = 1.
        let z = PI + 8.0 * PI * 10.0;
        let (_, osc, _) = asymptotic_parts(&h2_params(nu, g), c(z, 0.0)).unwrap();
        let expected = m_over_pi * z.sqrt();
        assert!(
            (osc.norm() - expected).abs() <= 1e-10 * expected,
            "{} vs {}",
            osc.norm(),
            expected
        );
    }

    #[test]
    fn asymptotic_matches_series_in_overlap() {
        let h = h1_params(2.0, 0.0);
        let z = c(50.0, 0.0);
        let s = eval_series(&h, z, 1e-15).unwrap().value;
        let a = eval_asymptotic(&h, z).unwrap().value;
        assert!((a / s - 1.0).norm() < 0.05, "ratio {} off", (a / s).norm());
    }

    #[test]
    fn asymptotic_rejects_bad_indices_and_axis() {
        // Δ = 0 case
        let h = HParams::new(vec![(1.0, 1.0)], vec![(0.0, 1.0)], 1, 0).unwrap();
        assert!(matches!(
            eval_asymptotic(&h, c(10.0, 0.0)),
            Err(HfunError::AsymptoticInapplicable { .. })
        ));
        assert!(matches!(
            eval_asymptotic(&h1_params(2.0, 0.0), c(10.0, 1.0)),
            Err(HfunError::PositiveAxisOnly(_))
        ));
    }

    #[test]
    fn auto_dispatch_small_and_large() {
        let h = h1_params(2.0, 0.0);
        let small = eval_auto(&h, c(0.5, 0.0)).unwrap();
        assert_eq!(small.method, EvalMethod::Series);
        let large = eval_auto(&h, c(1e4, 0.0)).unwrap();
        assert_eq!(large.method, EvalMethod::Asymptotic);
    }

    #[test]
    fn auto_continuity_across_switch() {
        // Locate the dispatch flip for the (2.4, 0.5) family and check the two
        // methods agree within combined error estimates there.
        let h = h1_params(2.4, 0.5);
        let mut lo = 1.0;
        let mut hi = 1e5;
        assert_eq!(eval_auto(&h, c(lo, 0.0)).unwrap().method, EvalMethod::Series);
        assert_eq!(eval_auto(&h, c(hi, 0.0)).unwrap().method, EvalMethod::Asymptotic);
        for _ in 0..60 {
            let mid = (lo * hi).sqrt();
            match eval_auto(&h, c(mid, 0.0)).unwrap().method {
                EvalMethod::Series => lo = mid,
                EvalMethod::Asymptotic => hi = mid,
            }
        }
        let left = eval_auto(&h, c(lo, 0.0)).unwrap();
        let right = eval_auto(&h, c(hi, 0.0)).unwrap();
        assert_eq!(left.method, EvalMethod::Series);
        assert_eq!(right.method, EvalMethod::Asymptotic);
        let gap = (left.value - right.value).norm();
        assert!(
            gap <= (left.abs_error_estimate + right.abs_error_estimate) * 1.5
                + 1e-12 * left.value.norm(),
            "gap {gap:.3e} vs estimates {:.3e}/{:.3e}",
            left.abs_error_estimate,
            right.abs_error_estimate
        );
    }

    #[test]
    fn structural_indices_scale_under_rescale() {
        let h = h1_params(2.2, -0.3);
        let before = structural_indices(&h);
        let k = 1.7;
        let after = structural_indices(&rescale_argument(&h, k).unwrap());
        assert!((after.delta - k * before.delta).abs() < 1e-12);
        assert!((after.delta_star - k * before.delta_star).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn property1_identity(
            nu in 1.4..2.8f64,
            g in -0.9..0.9f64,
            z in 0.3..3.0f64,
            k in 0.5..2.0f64,
        ) {
            let h = h1_params(nu, g);
            let hk = rescale_argument(&h, k).unwrap();
            let a = eval_series(&h, c(z, 0.0), 1e-14).unwrap();
            let b = eval_series(&hk, c(z.powf(k), 0.0), 1e-14).unwrap();
            let lhs = a.value / k;
            let tol = 3.0 * (a.abs_error_estimate / k + b.abs_error_estimate)
                + 1e-11 * b.value.norm().max(1e-6);
            prop_assert!((lhs - b.value).norm() <= tol,
                "nu={nu} g={g} z={z} k={k}: {} vs {}", lhs, b.value);
        }

        #[test]
        fn property2_identity(
            nu in 1.4..2.8f64,
            g in -0.9..0.9f64,
            z in 0.3..3.0f64,
            sigma in -0.8..0.8f64,
        ) {
            let h = h1_params(nu, g);
            let hs = power_shift(&h, sigma);
            let a = eval_series(&h, c(z, 0.0), 1e-14).unwrap();
            let b = eval_series(&hs, c(z, 0.0), 1e-14).unwrap();
            let lhs = c(z, 0.0).powf(sigma) * a.value;
            let tol = 3.0 * (z.powf(sigma) * a.abs_error_estimate + b.abs_error_estimate)
                + 1e-11 * b.value.norm().max(1e-6);
            prop_assert!((lhs - b.value).norm() <= tol,
                "nu={nu} g={g} z={z} sigma={sigma}");
        }
    }
}
