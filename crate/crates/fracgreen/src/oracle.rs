//! Independent brute-force verifiers.
//!
//! Nothing here goes through the H-function machinery: the defining
//! oscillatory integral I(x) = ∫₀^∞ p^{1−γ} sin(px) e^{−ip^ν} dp is computed
//! by splitting sin into its two exponentials and pushing each ray into a
//! decay sector (the e^{−ipx} piece rotates straight onto the ray
//! arg p = −θ; the e^{+ipx} piece is integrated along the real axis past its
//! stationary point and only its tail is rotated). The Mellin transform of
//! I is evaluated both in closed form and by direct quadrature, and the
//! momentum kernel is cross-checked against truncated Bromwich inversion and
//! a Mittag-Leffler series.

use crate::green::{self, DerivedParams, FracParams, SpaceTimePoint};
use crate::quadrature::{self, QuadError};
use crate::scattering::{plane_wave, Potential, Wavevector};
use crate::special::{gamma, ln_abs_gamma_sign, SpecialError};
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("rotation outside decay sector: angle {angle} not in (0, {limit})")]
    RotationOutsideSector { angle: f64, limit: f64 },
    #[error("outside Mellin strip: s = {0} (need 0 < Re s < 1 and Re(2-gamma-s) > 0)")]
    OutsideMellinStrip(Complex64),
    #[error("quadrature failed: {0}")]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Green(#[from] green::GreenError),
    #[error(transparent)]
    Special(#[from] SpecialError),
    #[error("invalid oracle input: {0}")]
    Invalid(String),
}

/// Configuration of the oscillatory-integral quadratures.
///
/// `rotation_angle` is the magnitude of the contour rotation; the rays are
/// taken at arg p = −rotation_angle, which must lie inside the common decay
/// sector (0, π/(2ν)). A non-positive value selects the default π/(4ν).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub rotation_angle: f64,
    pub max_radius: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rotation_angle: 0.0,
            max_radius: 1e9,
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureConfig {
    fn resolve_angle(&self, nu: f64) -> Result<f64, OracleError> {
        let limit = PI / (2.0 * nu);
        if self.rotation_angle <= 0.0 {
            return Ok(0.5 * limit);
        }
        if self.rotation_angle >= limit {
            return Err(OracleError::RotationOutsideSector {
                angle: self.rotation_angle,
                limit,
            });
        }
        Ok(self.rotation_angle)
    }
}

/// Integrate f over [0, ∞) by geometric blocks [0,s], [s,2s], … stopping once
/// two consecutive blocks are negligible against the running total.
fn integrate_decaying<F: Fn(f64) -> Complex64>(
    f: F,
    first_block: f64,
    cap: f64,
    cfg: &QuadratureConfig,
) -> Result<(Complex64, f64), OracleError> {
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut a = 0.0;
    let mut b = first_block.max(1e-3);
    let mut negligible_run = 0;
    for _ in 0..64 {
        let (v, e) = quadrature::integrate(
            &f,
            a,
            b.min(cap),
            cfg.abs_tol * 0.25,
            cfg.rel_tol * 0.25,
            cfg.max_subdivisions,
        )?;
        total += v;
        err += e;
        let scale = total.norm().max(cfg.abs_tol);
        if v.norm() < 0.05 * cfg.abs_tol.max(cfg.rel_tol * scale) {
            negligible_run += 1;
            if negligible_run >= 2 {
                return Ok((total, err));
            }
        } else {
            negligible_run = 0;
        }
        if b >= cap {
            return Ok((total, err));
        }
        a = b;
        b *= 2.0;
    }
    Ok((total, err))
}

/// ∫₀^∞ p^{power} sin(k p) e^{−i ξ p^ν} dp for ν > 1, ξ > 0, k ≥ 0,
/// power > −1, by sector rotation. Returns value and error estimate.
fn radial_oscillatory(
    power: f64,
    nu: f64,
    xi: f64,
    k: f64,
    cfg: &QuadratureConfig,
) -> Result<(Complex64, f64), OracleError> {
    if k == 0.0 {
        return Ok((Complex64::new(0.0, 0.0), 0.0));
    }
    if !(nu > 1.0) {
        return Err(OracleError::Invalid(format!("need nu > 1, got {nu}")));
    }
    if !(power > -1.0) {
        return Err(OracleError::Invalid(format!(
            "p-power {power} not integrable at 0"
        )));
    }
    let theta = cfg.resolve_angle(nu)?;
    let w = Complex64::from_polar(1.0, -theta);
    let i = Complex64::new(0.0, 1.0);

    // J- : both exponentials decay on the ray arg p = -theta.
    let f_minus = |r: f64| -> Complex64 {
        if r <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let p = r * w;
        p.powf(power) * (-i * k * p).exp() * (-i * xi * p.powf(nu)).exp() * w
    };
    // block scale: decay length of the slower factor
    let decay_nu = (1.0 / (xi * (nu * theta).sin())).powf(1.0 / nu);
    let decay_k = 1.0 / (k * theta.sin());
    let block = decay_nu.min(decay_k).max(1e-3);
    let (j_minus, e_minus) = integrate_decaying(f_minus, block, cfg.max_radius, cfg)?;

    // J+ : real segment through the stationary point of kp − ξp^ν, then the
    // tail rotated onto the same decay ray.
    let p_star = (k / (xi * nu)).powf(1.0 / (nu - 1.0));
    let r_turn = (1.3 * (PI / 2.0).powf(1.0 / (nu - 1.0)) * p_star).max(1.0);
    let f_plus_real = |p: f64| -> Complex64 {
        if p <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(p.powf(power), k * p) * (-i * xi * Complex64::new(p, 0.0).powf(nu)).exp()
    };
    let (seg, e_seg) = quadrature::integrate(
        f_plus_real,
        0.0,
        r_turn,
        cfg.abs_tol * 0.25,
        cfg.rel_tol * 0.25,
        cfg.max_subdivisions,
    )?;
    let f_plus_tail = |r: f64| -> Complex64 {
        let p = r_turn + r * w;
        p.powf(power) * (i * k * p).exp() * (-i * xi * p.powf(nu)).exp() * w
    };
    let (tail, e_tail) = integrate_decaying(f_plus_tail, block.max(r_turn), cfg.max_radius, cfg)?;
    let j_plus = seg + tail;

    let value = (j_plus - j_minus) / (2.0 * i);
    Ok((value, 0.5 * (e_minus + e_seg + e_tail)))
}

/// I(x) = ∫₀^∞ p^{1−γ} sin(px) e^{−ip^ν} dp by contour-rotated adaptive
/// quadrature. The defining integral requires ν > 1 (decay sector) and
/// γ < 2 (integrable at p = 0).
#[allow(non_snake_case)]
pub fn quad_I(
    dp: &DerivedParams,
    x: f64,
    cfg: &QuadratureConfig,
) -> Result<(Complex64, f64), OracleError> {
    if x < 0.0 {
        return Err(OracleError::Invalid("x must be >= 0".into()));
    }
    if x == 0.0 {
        return Ok((Complex64::new(0.0, 0.0), 0.0));
    }
    if dp.gamma_exp >= 2.0 {
        return Err(OracleError::Invalid(format!(
            "gamma = {} not integrable at p = 0",
            dp.gamma_exp
        )));
    }
    radial_oscillatory(1.0 - dp.gamma_exp, dp.nu, 1.0, x, cfg)
}

/// Radial quadrature form of the Green's function:
/// G = N₁/(2π²ħ²R) ∫₀^∞ p^{1−γ} sin(pR/ħ) e^{−iξp^ν} dp, computed from the
/// unsubstituted integrand (independent of the x-substituted [`quad_I`]
/// path and of every H-function form).
pub fn quad_green(
    fp: &FracParams,
    p1: &SpaceTimePoint,
    p0: &SpaceTimePoint,
    cfg: &QuadratureConfig,
) -> Result<(Complex64, f64), OracleError> {
    let dt = p1.t - p0.t;
    if dt <= 0.0 {
        return Ok((Complex64::new(0.0, 0.0), 0.0));
    }
    let dist = p1.distance(p0);
    if dist == 0.0 {
        return Err(OracleError::Green(green::GreenError::CoincidentPoints));
    }
    let dp = green::derive_params(fp, dist, dt)?;
    let (radial, err) = radial_oscillatory(
        1.0 - dp.gamma_exp,
        dp.nu,
        dp.xi,
        dist / fp.hbar,
        cfg,
    )?;
    let prefactor = dp.n1 / (2.0 * PI * PI * fp.hbar * fp.hbar * dist);
    Ok((prefactor * radial, prefactor.norm() * err))
}

fn mellin_strip_check(dp: &DerivedParams, s: Complex64) -> Result<(), OracleError> {
    // Re s < 1 makes the sine transform converge; Re s > 0 and
    // Re(2−γ−s) > 0 are the implied lower/upper edges of the two steps.
    if s.re <= 0.0 || s.re >= 1.0 || (2.0 - dp.gamma_exp - s.re) <= 0.0 {
        return Err(OracleError::OutsideMellinStrip(s));
    }
    Ok(())
}

/// Closed-form Mellin transform of I:
/// Ĩ(s) = (1/ν) Γ(s) Γ((2−γ−s)/ν) sin(πs/2) e^{−i(2−γ−s)π/(2ν)} on the strip
/// 0 < Re s < 1 (intersected with Re(2−γ−s) > 0).
#[allow(non_snake_case)]
pub fn mellin_I_closed(dp: &DerivedParams, s: Complex64) -> Result<Complex64, OracleError> {
    mellin_strip_check(dp, s)?;
    let (nu, g) = (dp.nu, dp.gamma_exp);
    let u = (2.0 - g - s) / nu;
    let i = Complex64::new(0.0, 1.0);
    Ok(gamma(s)? * gamma(u)? * (PI * s / 2.0).sin() * (-i * u * nu * PI / (2.0 * nu)).exp() / nu)
}

/// Ĩ₁ in trigonometric form: Γ(s)Γ((2−γ−s)/ν) sin(πs/2) cos((2−γ−s)π/(2ν)).
#[allow(non_snake_case)]
pub fn mellin_I1_trig(dp: &DerivedParams, s: Complex64) -> Result<Complex64, OracleError> {
    mellin_strip_check(dp, s)?;
    let u = (2.0 - dp.gamma_exp - s) / dp.nu;
    Ok(gamma(s)? * gamma(u)? * (PI * s / 2.0).sin() * (PI * u / 2.0).cos())
}

/// Ĩ₁ as a pure gamma quotient (sin and cos converted through the
/// reflection formulas):
/// π²Γ(s)Γ(u) / [Γ(s/2)Γ(1−s/2)Γ(1/2+u/2)Γ(1/2−u/2)], u = (2−γ−s)/ν.
#[allow(non_snake_case)]
pub fn mellin_I1_quotient(dp: &DerivedParams, s: Complex64) -> Result<Complex64, OracleError> {
    mellin_strip_check(dp, s)?;
    let u = (2.0 - dp.gamma_exp - s) / dp.nu;
    let one = Complex64::new(1.0, 0.0);
    Ok(PI * PI * gamma(s)? * gamma(u)?
        / (gamma(s / 2.0)?
            * gamma(one - s / 2.0)?
            * gamma(0.5 + u / 2.0)?
            * gamma(0.5 - u / 2.0)?))
}

/// Ĩ₂ in trigonometric form: Γ(s)Γ(u) sin(πs/2) sin(πu/2).
#[allow(non_snake_case)]
pub fn mellin_I2_trig(dp: &DerivedParams, s: Complex64) -> Result<Complex64, OracleError> {
    mellin_strip_check(dp, s)?;
    let u = (2.0 - dp.gamma_exp - s) / dp.nu;
    Ok(gamma(s)? * gamma(u)? * (PI * s / 2.0).sin() * (PI * u / 2.0).sin())
}

/// Ĩ₂ as a gamma quotient:
/// π²Γ(s)Γ(u) / [Γ(s/2)Γ(1−s/2)Γ(u/2)Γ(1−u/2)].
#[allow(non_snake_case)]
pub fn mellin_I2_quotient(dp: &DerivedParams, s: Complex64) -> Result<Complex64, OracleError> {
    mellin_strip_check(dp, s)?;
    let u = (2.0 - dp.gamma_exp - s) / dp.nu;
    let one = Complex64::new(1.0, 0.0);
    Ok(PI * PI * gamma(s)? * gamma(u)?
        / (gamma(s / 2.0)? * gamma(one - s / 2.0)? * gamma(u / 2.0)? * gamma(one - u / 2.0)?))
}

/// Leading large-x parts of I(x): the algebraic term Γ(2−γ)sin(γπ/2)x^{γ−2}
/// and the oscillatory term −πM x^{νE} e^{i(π/4+θ(x))}.
fn i_leading(dp: &DerivedParams, x: f64) -> (Complex64, Complex64) {
    let (nu, g) = (dp.nu, dp.gamma_exp);
    let (lg, sg) = ln_abs_gamma_sign(2.0 - g);
    let alg = Complex64::new(sg * lg.exp() * (g * PI / 2.0).sin() * x.powf(g - 2.0), 0.0);
    let m_amp = green::oscillatory_amplitude(nu, g);
    let nu_e = (4.0 - 2.0 * g - nu) / (2.0 * (nu - 1.0));
    let theta = (nu - 1.0) * (x / nu).powf(nu / (nu - 1.0));
    let osc = -PI * m_amp * x.powf(nu_e) * Complex64::from_polar(1.0, PI / 4.0 + theta);
    (alg, osc)
}

/// Numerical Mellin transform ∫₀^∞ I(x) x^{s−1} dx: adaptive quadrature of
/// `quad_I` up to a radius X where the closed asymptotic form is accurate,
/// then the tail is added semi-analytically (power-law part in closed form,
/// oscillatory part by a rotated incomplete-gamma integral).
#[allow(non_snake_case)]
pub fn mellin_I_numeric(
    dp: &DerivedParams,
    s: Complex64,
    cfg: &QuadratureConfig,
) -> Result<Complex64, OracleError> {
    mellin_strip_check(dp, s)?;
    let (nu, g) = (dp.nu, dp.gamma_exp);

    let inner_cfg = QuadratureConfig {
        abs_tol: (cfg.abs_tol * 0.1).max(1e-12),
        rel_tol: (cfg.rel_tol * 0.1).max(1e-12),
        ..*cfg
    };

    // Pick the matching radius: the first probe where quadrature and the
    // two-term asymptotic agree to 3e-5.
    let mut x_match = 90.0;
    for &probe in &[15.0, 25.0, 40.0, 60.0, 90.0] {
        let (iq, _) = quad_I(dp, probe, &inner_cfg)?;
        let (alg, osc) = i_leading(dp, probe);
        if (alg + osc - iq).norm() <= 3e-5 * iq.norm() {
            x_match = probe;
            break;
        }
    }

    // Main segment [0, X].
    let integrand = |x: f64| -> Complex64 {
        if x <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let (iv, _) = quad_I(dp, x, &inner_cfg).unwrap_or((Complex64::new(0.0, 0.0), 0.0));
        iv * ((s - 1.0) * x.ln()).exp()
    };
    let (main, _) = quadrature::integrate(
        integrand,
        0.0,
        x_match,
        cfg.abs_tol,
        cfg.rel_tol,
        cfg.max_subdivisions,
    )?;

    // Algebraic tail: ∫_X^∞ A_c x^{γ−2+s−1} dx = A_c X^{γ−2+s}/(2−γ−s).
    let (lg, sg) = ln_abs_gamma_sign(2.0 - g);
    let a_c = sg * lg.exp() * (g * PI / 2.0).sin();
    let tail_alg = a_c * ((g - 2.0 + s) * x_match.ln()).exp() / (2.0 - g - s);

    // Oscillatory tail: O_c ∫_X^∞ x^{q} e^{iκ x^m} dx with q = νE+s−1,
    // m = ν/(ν−1), κ = (ν−1)ν^{−ν/(ν−1)}. Substituting u = κx^m and rotating
    // u = U + iv onto the decaying direction:
    //   (O_c/m) κ^{−(q+1)/m} i e^{iU} ∫₀^∞ (U+iv)^{a−1} e^{−v} dv,  a = (q+1)/m.
    let m_amp = green::oscillatory_amplitude(nu, g);
    let o_c = -PI * m_amp * Complex64::from_polar(1.0, PI / 4.0);
    let nu_e = (4.0 - 2.0 * g - nu) / (2.0 * (nu - 1.0));
    let m_exp = nu / (nu - 1.0);
    let kappa = (nu - 1.0) * nu.powf(-m_exp);
    let q = nu_e + s - 1.0;
    let a_exp = (q + 1.0) / m_exp;
    let u_low = kappa * x_match.powf(m_exp);
    let i = Complex64::new(0.0, 1.0);
    let rotated = |v: f64| -> Complex64 { ((a_exp - 1.0) * Complex64::new(u_low, v).ln()).exp() * (-v).exp() };
    let v_max = 60.0 + 10.0 * a_exp.norm();
    let (gamma_like, _) = quadrature::integrate(
        rotated,
        0.0,
        v_max,
        cfg.abs_tol,
        cfg.rel_tol,
        cfg.max_subdivisions,
    )?;
    let tail_osc = o_c / m_exp
        * (-(q + 1.0) / m_exp * kappa.ln()).exp()
        * i
        * Complex64::from_polar(1.0, u_low)
        * gamma_like;

    Ok(main + tail_alg + tail_osc)
}

/// Truncated Bromwich inversion of the momentum-space transform
/// 1/((iħ)^β s^β − 𝒟p^α): a vertical segment [c−iY, c+iY] plus two tilted
/// rays that carry the tails into the decaying half plane (no pole or branch
/// cut is crossed: the single pole sits on the negative imaginary axis at
/// |s₀| < Y and the cut lies on the negative real axis).
pub fn bromwich_kernel(
    fp: &FracParams,
    p_mag: f64,
    dt: f64,
    cfg: &QuadratureConfig,
) -> Result<Complex64, OracleError> {
    if !(dt > 0.0) || !(p_mag > 0.0) {
        return Err(OracleError::Invalid("need p > 0 and dt > 0".into()));
    }
    let i = Complex64::new(0.0, 1.0);
    let energy = fp.dcal * p_mag.powf(fp.alpha);
    let ihbar_beta = (fp.beta * (Complex64::new(fp.hbar, 0.0) * i).ln()).exp();
    let denom = |s: Complex64| -> Complex64 { ihbar_beta * (fp.beta * s.ln()).exp() - energy };
    let f = |s: Complex64| -> Complex64 { (s * dt).exp() / denom(s) };

    let s0_mag = energy.powf(1.0 / fp.beta) / fp.hbar;
    let c = (1.0 / dt).max(0.25);
    let y_cut = (4.0 * s0_mag).max(30.0 / dt).max(4.0 * c);

    let (vertical, _) = quadrature::integrate(
        |y: f64| f(Complex64::new(c, y)),
        -y_cut,
        y_cut,
        cfg.abs_tol,
        cfg.rel_tol,
        cfg.max_subdivisions,
    )?;

    let chi = Complex64::from_polar(1.0, 3.0 * PI / 4.0);
    let up = |u: f64| f(Complex64::new(c, y_cut) + u * chi);
    let down = |u: f64| f(Complex64::new(c, -y_cut) + u * chi.conj());
    let u_max = 120.0 / (dt * (0.5f64).sqrt());
    let (tail_up, _) =
        quadrature::integrate(up, 0.0, u_max, cfg.abs_tol, cfg.rel_tol, cfg.max_subdivisions)?;
    let (tail_down, _) =
        quadrature::integrate(down, 0.0, u_max, cfg.abs_tol, cfg.rel_tol, cfg.max_subdivisions)?;

    let contour = i * vertical + chi * tail_up - chi.conj() * tail_down;
    Ok(contour / (2.0 * PI * i))
}

/// Exact inverse Laplace transform of 1/((iħ)^β s^β − E) via the
/// Mittag-Leffler series: (iħ)^{−β} Δt^{β−1} E_{β,β}(E Δt^β/(iħ)^β).
/// Reference route for the Bromwich oracle; converges for moderate |w|.
pub fn mittag_leffler_kernel(
    fp: &FracParams,
    p_mag: f64,
    dt: f64,
) -> Result<Complex64, OracleError> {
    if !(dt > 0.0) || !(p_mag > 0.0) {
        return Err(OracleError::Invalid("need p > 0 and dt > 0".into()));
    }
    let i = Complex64::new(0.0, 1.0);
    let energy = fp.dcal * p_mag.powf(fp.alpha);
    let ihbar_beta = (fp.beta * (Complex64::new(fp.hbar, 0.0) * i).ln()).exp();
    let w = energy * dt.powf(fp.beta) / ihbar_beta;
    if w.norm() > 150.0 {
        return Err(OracleError::Invalid(format!(
            "Mittag-Leffler argument too large for series evaluation: |w| = {}",
            w.norm()
        )));
    }
    let mut sum = Complex64::new(0.0, 0.0);
    let mut wk = Complex64::new(1.0, 0.0);
    for k in 0..600 {
        let term = wk * crate::special::rgamma(Complex64::new(fp.beta * (k as f64 + 1.0), 0.0));
        sum += term;
        if k > 4 && term.norm() < 1e-18 * sum.norm() {
            break;
        }
        wk *= w;
    }
    Ok(dt.powf(fp.beta - 1.0) / ihbar_beta * sum)
}

/// Independent standard-quantum-mechanics Born integral: the closed-form
/// α=2, β=1 propagator inserted directly into the first-order integral.
///
/// For a separable Gaussian potential the spatial factor is absorbed into a
/// Gauss–Hermite rule (u = (r'−c)/(√2σ_r) per axis), and so is a Gaussian
/// time profile when the pulse has died out before the observation time; a
/// constant time window uses Gauss–Legendre. This is a different rule family
/// and a different code path from the scattering module's box quadrature.
pub fn standard_born_first_order(
    fp: &FracParams,
    pot: &Potential,
    wv: &Wavevector,
    point: &SpaceTimePoint,
    n_space: usize,
    n_time: usize,
) -> Result<Complex64, OracleError> {
    if (fp.alpha - 2.0).abs() > 1e-12 || (fp.beta - 1.0).abs() > 1e-12 {
        return Err(OracleError::Invalid(
            "standard-QM oracle requires alpha = 2, beta = 1".into(),
        ));
    }
    let Potential::GaussianSeparable { v0, sigma_r, center, profile } = pot else {
        return Err(OracleError::Invalid(
            "standard-QM oracle handles separable Gaussian potentials".into(),
        ));
    };
    let mass = 1.0 / (2.0 * fp.dcal);
    let (t_lo, t_hi) = pot.time_support();
    if point.t <= t_lo {
        return Ok(Complex64::new(0.0, 0.0));
    }

    // time nodes and weights, profile factor included
    let time_rule: Vec<(f64, f64)> = match *profile {
        crate::scattering::TimeProfile::Gaussian { t0, sigma_t } => {
            if point.t < t_hi {
                return Err(OracleError::Invalid(
                    "oracle requires the pulse to end before the observation time".into(),
                ));
            }
            let (u, w) = quadrature::gauss_hermite(n_time);
            let s = std::f64::consts::SQRT_2 * sigma_t;
            u.iter().zip(&w).map(|(ui, wi)| (t0 + s * ui, wi * s)).collect()
        }
        crate::scattering::TimeProfile::Constant { t_on, t_off } => {
            let upper = t_off.min(point.t);
            if upper <= t_on {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let (u, w) = quadrature::gauss_legendre(n_time);
            let half = 0.5 * (upper - t_on);
            let mid = 0.5 * (upper + t_on);
            u.iter().zip(&w).map(|(ui, wi)| (mid + half * ui, wi * half)).collect()
        }
    };

    let (u, w) = quadrature::gauss_hermite(n_space);
    let s = std::f64::consts::SQRT_2 * sigma_r;

    let mut total = Complex64::new(0.0, 0.0);
    for &(tp, wt) in &time_rule {
        let tau = point.t - tp;
        if tau <= 0.0 {
            continue;
        }
        let mut slab = Complex64::new(0.0, 0.0);
        for (ux, wx) in u.iter().zip(&w) {
            let x = center[0] + s * ux;
            for (uy, wy) in u.iter().zip(&w) {
                let y = center[1] + s * uy;
                for (uz, wz) in u.iter().zip(&w) {
                    let z = center[2] + s * uz;
                    let src = SpaceTimePoint::new([x, y, z], tp);
                    let dist = point.distance(&src);
                    let gstd = green::standard_propagator(mass, fp.hbar, dist, tau).value;
                    slab += wx * wy * wz * gstd * plane_wave(fp, wv, &src);
                }
            }
        }
        total += wt * slab * s * s * s;
    }
    Ok(fp.dcal * v0 * total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dp20() -> DerivedParams {
        DerivedParams::from_indices(2.0, 0.0).unwrap()
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn quad_i_zero_and_reference() {
        let cfg = QuadratureConfig::default();
        assert_eq!(quad_I(&dp20(), 0.0, &cfg).unwrap().0, Complex64::new(0.0, 0.0));

        // exact value for nu=2, gamma=0: I(1) = (sqrt(pi)/4) e^{-3 pi i/4} e^{i/4}
        let exact = Complex64::new(-0.226_069_189_047_256_84, -0.381_106_628_928_017_63);
        let (v, e) = quad_I(&dp20(), 1.0, &cfg).unwrap();
        assert!(rel(v, exact) < 1e-9, "I(1) = {v}, err {e:.2e}");
    }

    #[test]
    fn quad_i_tolerance_halving_is_stable() {
        let cfg = QuadratureConfig::default();
        let tight = QuadratureConfig {
            abs_tol: cfg.abs_tol / 2.0,
            rel_tol: cfg.rel_tol / 2.0,
            ..cfg
        };
        for &(nu, g, x) in &[(2.0, 0.0, 1.0), (2.4, 0.5, 0.5), (1.875, -0.2, 2.0)] {
            let dp = DerivedParams::from_indices(nu, g).unwrap();
            let (v1, e1) = quad_I(&dp, x, &cfg).unwrap();
            let (v2, _) = quad_I(&dp, x, &tight).unwrap();
            assert!(
                (v1 - v2).norm() <= e1.max(1e-9),
                "nu={nu} g={g}: drift {} vs err {e1:.2e}",
                (v1 - v2).norm()
            );
        }
    }

    #[test]
    fn quad_i_rotation_independence() {
        let dp = DerivedParams::from_indices(2.4, 0.5).unwrap();
        let x = 1.3;
        let base = QuadratureConfig::default();
        let a1 = QuadratureConfig { rotation_angle: PI / (8.0 * 2.4), ..base };
        let a2 = QuadratureConfig { rotation_angle: PI / (3.0 * 2.4), ..base };
        let (v1, e1) = quad_I(&dp, x, &a1).unwrap();
        let (v2, e2) = quad_I(&dp, x, &a2).unwrap();
        assert!((v1 - v2).norm() <= (e1 + e2).max(1e-8), "{v1} vs {v2}");
    }

    #[test]
    fn quad_i_rejects_bad_rotation() {
        let cfg = QuadratureConfig { rotation_angle: PI, ..Default::default() };
        assert!(matches!(
            quad_I(&dp20(), 1.0, &cfg),
            Err(OracleError::RotationOutsideSector { .. })
        ));
    }

    #[test]
    fn quad_i_slope_gamma_check() {
        // dI/dx at 0 equals (1/ν)Γ((3−γ)/ν)e^{−i(3−γ)π/(2ν)}
        for &(nu, g) in &[(2.0, 0.0), (2.4, 0.5)] {
            let dp = DerivedParams::from_indices(nu, g).unwrap();
            let h = 1e-3;
            let (ih, _) = quad_I(&dp, h, &QuadratureConfig::default()).unwrap();
            let slope = ih / h;
            let a = (3.0 - g) / nu;
            let expected = gamma(Complex64::new(a, 0.0)).unwrap()
                * Complex64::from_polar(1.0 / nu, -a * PI / 2.0);
            assert!(rel(slope, expected) < 1e-5, "nu={nu} g={g}: {slope} vs {expected}");
        }
    }

    #[test]
    fn mellin_closed_decomposition() {
        for &(nu, g) in &[(2.0, 0.0), (2.4, 0.5), (1.875, -0.2)] {
            let dp = DerivedParams::from_indices(nu, g).unwrap();
            for &sr in &[0.3, 0.5, 0.7] {
                let s = Complex64::new(sr, 0.0);
                let i1t = mellin_I1_trig(&dp, s).unwrap();
                let i1q = mellin_I1_quotient(&dp, s).unwrap();
                let i2t = mellin_I2_trig(&dp, s).unwrap();
                let i2q = mellin_I2_quotient(&dp, s).unwrap();
                assert!(rel(i1q, i1t) < 1e-10, "I1 at nu={nu} g={g} s={sr}");
                assert!(rel(i2q, i2t) < 1e-10, "I2 at nu={nu} g={g} s={sr}");
                let whole = mellin_I_closed(&dp, s).unwrap();
                let combo = (i1t - Complex64::new(0.0, 1.0) * i2t) / nu;
                assert!(rel(whole, combo) < 1e-12);
            }
        }
    }

    #[test]
    fn mellin_strip_enforced() {
        let dp = dp20();
        for &sr in &[-0.1, 0.0, 1.0, 1.3] {
            assert!(matches!(
                mellin_I_closed(&dp, Complex64::new(sr, 0.0)),
                Err(OracleError::OutsideMellinStrip(_))
            ));
        }
    }

    #[test]
    fn mellin_numeric_matches_closed() {
        let dp = dp20();
        let cfg = QuadratureConfig {
            abs_tol: 1e-8,
            rel_tol: 1e-8,
            ..Default::default()
        };
        let s = Complex64::new(0.5, 0.0);
        let num = mellin_I_numeric(&dp, s, &cfg).unwrap();
        let closed = mellin_I_closed(&dp, s).unwrap();
        assert!(rel(num, closed) < 1e-4, "{num} vs {closed}");
    }

    #[test]
    fn mellin_numeric_strip_edge() {
        let dp = dp20();
        let cfg = QuadratureConfig {
            abs_tol: 1e-8,
            rel_tol: 1e-8,
            ..Default::default()
        };
        let s = Complex64::new(0.95, 0.0);
        let num = mellin_I_numeric(&dp, s, &cfg).unwrap();
        let closed = mellin_I_closed(&dp, s).unwrap();
        assert!(rel(num, closed) < 1e-3, "{num} vs {closed}");
    }

    #[test]
    fn quad_green_consistency() {
        let fp = FracParams::new(1.8, 0.9, 1.0, 1.0).unwrap();
        let p1 = SpaceTimePoint::new([1.2, 0.0, 0.0], 1.0);
        let p0 = SpaceTimePoint::new([0.0, 0.0, 0.0], 0.0);
        let cfg = QuadratureConfig::default();
        let (gq, _) = quad_green(&fp, &p1, &p0, &cfg).unwrap();

        // substitution identity against quad_I
        let dp = green::derive_params(&fp, 1.2, 1.0).unwrap();
        let (iv, _) = quad_I(&dp, dp.x, &cfg).unwrap();
        let via_i = dp.n * iv / 1.2;
        assert!(rel(gq, via_i) < 1e-8, "{gq} vs {via_i}");

        // H-function route
        let gh = green::green_hform(&fp, &p1, &p0).unwrap();
        assert!(rel(gq, gh.value) < 1e-6, "{gq} vs {}", gh.value);

        // causality
        let (gz, _) = quad_green(&fp, &p0, &p1, &cfg).unwrap();
        assert_eq!(gz, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn quad_green_standard_limit() {
        let fp = FracParams::new(2.0, 1.0, 1.0, 1.0).unwrap();
        let p1 = SpaceTimePoint::new([2.0, 0.0, 0.0], 1.0);
        let p0 = SpaceTimePoint::new([0.0, 0.0, 0.0], 0.0);
        let (gq, _) = quad_green(&fp, &p1, &p0, &QuadratureConfig::default()).unwrap();
        let exact = green::standard_propagator(0.5, 1.0, 2.0, 1.0).value;
        assert!(rel(gq, exact) < 1e-6, "{gq} vs {exact}");
    }

    #[test]
    fn bromwich_matches_kernel_at_beta_one() {
        let fp = FracParams::new(2.0, 1.0, 1.0, 1.0).unwrap();
        let cfg = QuadratureConfig { abs_tol: 1e-9, rel_tol: 1e-9, ..Default::default() };
        let b = bromwich_kernel(&fp, 1.3, 0.7, &cfg).unwrap();
        let k = green::momentum_kernel(&fp, 1.3, 0.7).unwrap();
        assert!(rel(b, k) < 1e-6, "{b} vs {k}");
    }

    #[test]
    fn bromwich_matches_mittag_leffler_below_beta_one() {
        // The closed-form kernel is the pole part of the inversion; the full
        // transform carries an extra branch-cut contribution. Both oracle
        // routes (contour and Mittag-Leffler series) must agree on the full
        // value, and the kernel's deviation from it is the documented
        // pole-only gap (~2.1% here).
        let fp = FracParams::new(1.8, 0.9, 1.0, 1.0).unwrap();
        let cfg = QuadratureConfig { abs_tol: 1e-9, rel_tol: 1e-9, ..Default::default() };
        let b = bromwich_kernel(&fp, 1.3, 0.7, &cfg).unwrap();
        let ml = mittag_leffler_kernel(&fp, 1.3, 0.7).unwrap();
        assert!(rel(b, ml) < 1e-5, "bromwich {b} vs mittag-leffler {ml}");

        let k = green::momentum_kernel(&fp, 1.3, 0.7).unwrap();
        let gap = (b - k).norm() / k.norm();
        assert!((gap - 0.020_890_8).abs() < 5e-4, "pole-only gap {gap}");
    }
}
