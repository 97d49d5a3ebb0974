//! The `validate` subcommand: quick cross-validation suites mirroring the
//! acceptance checks, with per-suite pass/fail and maximum relative errors.

use crate::config::Config;
use fracgreen::green::{self, DerivedParams, FracParams, SpaceTimePoint};
use fracgreen::hfun;
use fracgreen::oracle::{self, QuadratureConfig};
use fracgreen::scattering::{
    born_series, BornQuadratureConfig, Potential, SpaceTimeGrid, TimeProfile, Wavevector,
};
use num_complex::Complex64;
use std::error::Error;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub max_rel_err: f64,
    pub detail: String,
}

/// Deterministic xorshift-style generator so validation runs are reproducible.
struct SplitMix64(u64);

impl SplitMix64 {
    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        lo + (hi - lo) * u
    }
}

fn suite_gamma(tol: Option<f64>) -> SuiteResult {
    let tol = tol.unwrap_or(1e-10);
    let mut rng = SplitMix64(0x5eed_0001);
    let mut max_err: f64 = 0.0;
    for _ in 0..1000 {
        let z = loop {
            let z = Complex64::new(rng.uniform(-20.0, 20.0), rng.uniform(-20.0, 20.0));
            let k = (-z.re).round();
            if !(k >= 0.0 && ((z.re + k).powi(2) + z.im * z.im).sqrt() < 0.1) {
                break z;
            }
        };
        let g = fracgreen::special::gamma(z).unwrap();
        let g1 = fracgreen::special::gamma(z + 1.0).unwrap();
        let refl = fracgreen::special::gamma(Complex64::new(1.0, 0.0) - z).unwrap();
        max_err = max_err.max((g1 / (z * g) - 1.0).norm());
        max_err = max_err.max((g * refl * (PI * z).sin() / PI - 1.0).norm());
    }
    let sqrt_pi = 1.772_453_850_905_516_03;
    let special_err = (fracgreen::special::gamma(Complex64::new(0.5, 0.0)).unwrap().re - sqrt_pi)
        .abs()
        / sqrt_pi;
    SuiteResult {
        name: "gamma",
        passed: max_err <= tol && special_err <= 1e-13,
        max_rel_err: max_err.max(special_err),
        detail: format!("1000 samples, identities max {max_err:.2e}, special values {special_err:.2e}"),
    }
}

fn suite_hfun(tol: Option<f64>) -> SuiteResult {
    let mut rng = SplitMix64(0x5eed_0002);
    let mut max_fail = 0usize;
    let mut max_rel: f64 = 0.0;
    for _ in 0..50 {
        let nu = rng.uniform(1.4, 2.8);
        let g = rng.uniform(-0.9, 0.9);
        let z = rng.uniform(0.3, 3.0);
        let k = rng.uniform(0.5, 2.0);
        let sigma = rng.uniform(-0.8, 0.8);
        let dp = DerivedParams::from_indices(nu, g).unwrap();
        let h = green::build_h1(&dp).unwrap();
        let a = hfun::eval_series(&h, Complex64::new(z, 0.0), 1e-14).unwrap();

        let hk = hfun::rescale_argument(&h, k).unwrap();
        let b = hfun::eval_series(&hk, Complex64::new(z.powf(k), 0.0), 1e-14).unwrap();
        let budget1 = tol.unwrap_or(
            3.0 * (a.abs_error_estimate / k + b.abs_error_estimate) + 1e-11 * b.value.norm().max(1e-6),
        );
        let err1 = (a.value / k - b.value).norm();
        if err1 > budget1 {
            max_fail += 1;
        }

        let hs = hfun::power_shift(&h, sigma);
        let c = hfun::eval_series(&hs, Complex64::new(z, 0.0), 1e-14).unwrap();
        let budget2 = tol.unwrap_or(
            3.0 * (z.powf(sigma) * a.abs_error_estimate + c.abs_error_estimate)
                + 1e-11 * c.value.norm().max(1e-6),
        );
        let err2 = (Complex64::new(z, 0.0).powf(sigma) * a.value - c.value).norm();
        if err2 > budget2 {
            max_fail += 1;
        }
        max_rel = max_rel.max(err1 / b.value.norm().max(1e-12)).max(err2 / c.value.norm().max(1e-12));

        let idx = hfun::structural_indices(&h);
        if (idx.delta - (nu - 1.0)).abs() > 1e-12 || idx.delta_star.abs() > 1e-12 {
            max_fail += 1;
        }
    }
    SuiteResult {
        name: "hfun",
        passed: max_fail == 0,
        max_rel_err: max_rel,
        detail: format!("50 property-1/2 samples, {max_fail} failures"),
    }
}

fn suite_mellin(tol: Option<f64>) -> SuiteResult {
    let tol = tol.unwrap_or(1e-4);
    let cfg = QuadratureConfig {
        abs_tol: 1e-8,
        rel_tol: 1e-8,
        ..Default::default()
    };
    let mut max_rel: f64 = 0.0;
    for &(nu, g) in &[(2.0, 0.0), (2.4, 0.5), (1.875, -0.2)] {
        let dp = DerivedParams::from_indices(nu, g).unwrap();
        for &sr in &[0.3, 0.5, 0.7] {
            let s = Complex64::new(sr, 0.0);
            let closed = oracle::mellin_I_closed(&dp, s).unwrap();
            match oracle::mellin_I_numeric(&dp, s, &cfg) {
                Ok(num) => max_rel = max_rel.max((num - closed).norm() / closed.norm()),
                Err(_) => max_rel = f64::INFINITY,
            }
        }
    }
    SuiteResult {
        name: "mellin",
        passed: max_rel <= tol,
        max_rel_err: max_rel,
        detail: "closed vs numeric Mellin transform, 3 settings x 3 points".into(),
    }
}

fn suite_greens(tol: Option<f64>) -> SuiteResult {
    let tol_series = tol.unwrap_or(1e-9);
    let tol_oracle = tol.unwrap_or(1e-6);
    let cfg = QuadratureConfig::default();
    let p0 = SpaceTimePoint::new([0.0, 0.0, 0.0], 0.0);
    let mut max_series: f64 = 0.0;
    let mut max_oracle: f64 = 0.0;
    for &(alpha, beta) in &[(2.0, 1.0), (1.8, 0.9)] {
        let fp = FracParams::new(alpha, beta, 1.0, 1.0).unwrap();
        for &x in &[0.2, 1.0, 2.6] {
            let p1 = SpaceTimePoint::new([x, 0.0, 0.0], 1.0);
            let h = green::green_hform(&fp, &p1, &p0).unwrap().value;
            let s = green::green_series(&fp, &p1, &p0).unwrap().value;
            let (q, _) = oracle::quad_green(&fp, &p1, &p0, &cfg).unwrap();
            max_series = max_series.max((h - s).norm() / s.norm());
            max_oracle = max_oracle.max((h - q).norm() / q.norm()).max((s - q).norm() / q.norm());
        }
    }
    SuiteResult {
        name: "greens",
        passed: max_series <= tol_series && max_oracle <= tol_oracle,
        max_rel_err: max_series.max(max_oracle),
        detail: format!("hform-series {max_series:.2e}, vs quadrature {max_oracle:.2e}"),
    }
}

fn suite_standard(tol: Option<f64>) -> SuiteResult {
    let tol = tol.unwrap_or(1e-6);
    let fp = FracParams::new(2.0, 1.0, 1.0, 1.0).unwrap();
    let p0 = SpaceTimePoint::new([0.0, 0.0, 0.0], 0.0);
    let mut max_rel: f64 = 0.0;
    for &dt in &[0.25, 1.0, 4.0] {
        for &dist in &[0.5, 1.0, 2.0, 4.0, 8.0] {
            let p1 = SpaceTimePoint::new([dist, 0.0, 0.0], dt);
            let s = green::green_series(&fp, &p1, &p0).unwrap();
            let exact = green::standard_propagator(0.5, 1.0, dist, dt);
            max_rel = max_rel.max((s.value.norm() - exact.value.norm()).abs() / exact.value.norm());
        }
    }
    SuiteResult {
        name: "standard",
        passed: max_rel <= tol,
        max_rel_err: max_rel,
        detail: "series magnitude vs closed-form free propagator".into(),
    }
}

fn suite_crossover(tol: Option<f64>) -> SuiteResult {
    let tol50 = tol.unwrap_or(0.05);
    let tol100 = tol.unwrap_or(0.02);
    let p0 = SpaceTimePoint::new([0.0, 0.0, 0.0], 0.0);
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for &(alpha, beta) in &[(2.0, 1.0), (1.8, 0.9)] {
        let fp = FracParams::new(alpha, beta, 1.0, 1.0).unwrap();
        for &(x, t) in &[(50.0, tol50), (100.0, tol100)] {
            let p1 = SpaceTimePoint::new([x, 0.0, 0.0], 1.0);
            let a = green::green_asymptotic(&fp, &p1, &p0).unwrap().value;
            let h = green::green_hform(&fp, &p1, &p0).unwrap().value;
            let dev = (a / h - 1.0).norm();
            worst = worst.max(dev);
            if dev > t {
                pass = false;
            }
        }
    }
    SuiteResult {
        name: "crossover",
        passed: pass,
        max_rel_err: worst,
        detail: "asymptotic vs hform at x = 50, 100".into(),
    }
}

fn suite_kernel(tol: Option<f64>) -> SuiteResult {
    let tol = tol.unwrap_or(1e-5);
    let cfg = QuadratureConfig {
        abs_tol: 1e-9,
        rel_tol: 1e-9,
        ..Default::default()
    };
    let mut max_rel: f64 = 0.0;
    for &(alpha, p, dt) in &[(2.0, 1.3, 0.7), (1.7, 0.9, 1.1), (1.4, 1.8, 0.4)] {
        let fp = FracParams::new(alpha, 1.0, 1.0, 1.0).unwrap();
        let b = oracle::bromwich_kernel(&fp, p, dt, &cfg).unwrap();
        let k = green::momentum_kernel(&fp, p, dt).unwrap();
        max_rel = max_rel.max((b - k).norm() / k.norm());
    }
    // below beta = 1 the Bromwich oracle must still agree with the
    // Mittag-Leffler route for the full transform
    let fp = FracParams::new(1.8, 0.9, 1.0, 1.0).unwrap();
    let b = oracle::bromwich_kernel(&fp, 1.3, 0.7, &cfg).unwrap();
    let ml = oracle::mittag_leffler_kernel(&fp, 1.3, 0.7).unwrap();
    max_rel = max_rel.max((b - ml).norm() / ml.norm());
    SuiteResult {
        name: "kernel",
        passed: max_rel <= tol,
        max_rel_err: max_rel,
        detail: "residue kernel vs Bromwich (beta = 1) and Bromwich vs Mittag-Leffler".into(),
    }
}

fn suite_born(tol: Option<f64>) -> SuiteResult {
    let tol = tol.unwrap_or(1e-14);
    let fp = FracParams::new(2.0, 1.0, 1.0, 1.0).unwrap();
    let wv = Wavevector::from_k([0.8, 0.0, 0.0], &fp);
    let grid = SpaceTimeGrid::new([-1.5, -1.5, -1.5], [0.5, 0.5, 0.5], [7, 7, 7], 0.0, 0.5, 5)
        .unwrap();
    let zero = Potential::gaussian(
        0.0,
        0.35,
        [0.0, 0.0, 0.0],
        TimeProfile::Gaussian { t0: 0.8, sigma_t: 0.08 },
    );
    let series = match born_series(&fp, &zero, &wv, grid, 2, &BornQuadratureConfig::default()) {
        Ok(s) => s,
        Err(e) => {
            return SuiteResult {
                name: "born",
                passed: false,
                max_rel_err: f64::INFINITY,
                detail: format!("iteration failed: {e}"),
            }
        }
    };
    let max_incr = series.increment_norms.iter().cloned().fold(0.0f64, f64::max);
    SuiteResult {
        name: "born",
        passed: max_incr <= tol,
        max_rel_err: max_incr,
        detail: "zero-potential fixed point over 2 orders".into(),
    }
}

pub fn cmd_validate(config: Option<PathBuf>, suite: Option<String>) -> Result<ExitCode, Box<dyn Error>> {
    let tol_override = match config {
        Some(path) => {
            let cfg = Config::load(&path)?;
            cfg.require_known_keys(&["tolerance_override"])?;
            if cfg.has("tolerance_override") {
                Some(cfg.get_f64("tolerance_override")?)
            } else {
                None
            }
        }
        None => None,
    };

    type Suite = fn(Option<f64>) -> SuiteResult;
    let suites: Vec<(&str, Suite)> = vec![
        ("gamma", suite_gamma),
        ("hfun", suite_hfun),
        ("mellin", suite_mellin),
        ("greens", suite_greens),
        ("standard", suite_standard),
        ("crossover", suite_crossover),
        ("kernel", suite_kernel),
        ("born", suite_born),
    ];

    let selected: Vec<&(&str, Suite)> = match &suite {
        Some(name) => {
            let hit: Vec<_> = suites.iter().filter(|(n, _)| n == name).collect();
            if hit.is_empty() {
                eprintln!("unknown suite `{name}`");
                return Ok(ExitCode::from(2));
            }
            hit
        }
        None => suites.iter().collect(),
    };

    let mut all_pass = true;
    for (_, f) in selected {
        let r = f(tol_override);
        println!(
            "{:10} {}  max_rel_err={:.3e}  {}",
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.max_rel_err,
            r.detail
        );
        all_pass &= r.passed;
    }
    Ok(if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}
