//! The `green`, `hfun`, `oracle` and `born` subcommands.

use crate::config::{linear_range, Config};
use crate::output::{emit, Cell, Format, Table};
use fracgreen::green::{self, FracParams, SpaceTimePoint};
use fracgreen::hfun;
use fracgreen::oracle::{self, QuadratureConfig};
use fracgreen::scattering::{
    born_series, BornQuadratureConfig, Potential, SpaceTimeGrid, TimeProfile, Wavevector,
};
use num_complex::Complex64;
use std::error::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

type CmdResult = Result<ExitCode, Box<dyn Error>>;

fn resolve_format(cfg: &Config, flag: Option<String>) -> Result<Format, Box<dyn Error>> {
    let name = flag.unwrap_or_else(|| cfg.get_str_or("format", "csv").to_string());
    Ok(Format::parse(&name)?)
}

fn resolve_out(cfg: &Config, flag: Option<PathBuf>) -> Option<PathBuf> {
    flag.or_else(|| {
        if cfg.has("out") {
            cfg.get_str("out").ok().map(PathBuf::from)
        } else {
            None
        }
    })
}

fn frac_params(cfg: &Config) -> Result<FracParams, Box<dyn Error>> {
    Ok(FracParams::new(
        cfg.get_f64("alpha")?,
        cfg.get_f64("beta")?,
        cfg.get_f64_or("dcal", 1.0)?,
        cfg.get_f64_or("hbar", 1.0)?,
    )?)
}

pub fn cmd_green(config: &Path, out: Option<PathBuf>, format: Option<String>) -> CmdResult {
    let cfg = Config::load(config)?;
    cfg.require_known_keys(&[
        "alpha", "beta", "dcal", "hbar", "dist_start", "dist_stop", "dist_count", "dt_start",
        "dt_stop", "dt_count", "forms", "format", "out",
    ])?;
    let fp = frac_params(&cfg)?;
    let dists = linear_range(
        cfg.get_f64("dist_start")?,
        cfg.get_f64_or("dist_stop", cfg.get_f64("dist_start")?)?,
        cfg.get_usize("dist_count")?,
    )?;
    let dts = linear_range(
        cfg.get_f64("dt_start")?,
        cfg.get_f64_or("dt_stop", cfg.get_f64("dt_start")?)?,
        cfg.get_usize("dt_count")?,
    )?;
    let forms: Vec<String> = if cfg.has("forms") {
        cfg.get_list("forms")?
    } else {
        vec!["hform".into(), "series".into(), "asymptotic".into()]
    };
    for f in &forms {
        if !matches!(f.as_str(), "hform" | "series" | "asymptotic") {
            return Err(format!("unknown form `{f}` (hform, series, asymptotic)").into());
        }
    }

    let mut table = Table::new(vec![
        "alpha", "beta", "dist", "dt", "x", "re_g", "im_g", "method", "err_est",
    ]);
    let mut warnings = 0usize;
    for &dt in &dts {
        for &dist in &dists {
            let p1 = SpaceTimePoint::new([dist, 0.0, 0.0], dt);
            let p0 = SpaceTimePoint::new([0.0, 0.0, 0.0], 0.0);
            let x = green::derive_params(&fp, dist, dt).map(|d| d.x).unwrap_or(f64::NAN);
            for form in &forms {
                let result = match form.as_str() {
                    "hform" => green::green_hform(&fp, &p1, &p0),
                    "series" => green::green_series(&fp, &p1, &p0),
                    _ => green::green_asymptotic(&fp, &p1, &p0),
                };
                match result {
                    Ok(g) => table.push(vec![
                        Cell::Real(fp.alpha),
                        Cell::Real(fp.beta),
                        Cell::Real(dist),
                        Cell::Real(dt),
                        Cell::Real(x),
                        Cell::Real(g.value.re),
                        Cell::Real(g.value.im),
                        Cell::Text(g.method.to_string()),
                        Cell::Real(g.error_estimate),
                    ]),
                    Err(e) => {
                        warnings += 1;
                        eprintln!("warning: dist={dist} dt={dt} {form}: {e}");
                        table.push(vec![
                            Cell::Real(fp.alpha),
                            Cell::Real(fp.beta),
                            Cell::Real(dist),
                            Cell::Real(dt),
                            Cell::Real(x),
                            Cell::Real(f64::NAN),
                            Cell::Real(f64::NAN),
                            Cell::Text(format!("error: {e}")),
                            Cell::Real(f64::NAN),
                        ]);
                    }
                }
            }
        }
    }
    let fmt = resolve_format(&cfg, format)?;
    emit(&table.render(fmt), resolve_out(&cfg, out))?;
    if warnings > 0 {
        eprintln!("{warnings} row(s) failed to evaluate");
    }
    Ok(ExitCode::SUCCESS)
}

pub fn cmd_hfun(config: &Path, out: Option<PathBuf>, format: Option<String>) -> CmdResult {
    let cfg = Config::load(config)?;
    cfg.require_known_keys(&[
        "family", "nu", "gamma", "z_start", "z_stop", "z_count", "tol", "format", "out",
    ])?;
    let nu = cfg.get_f64("nu")?;
    let gamma = cfg.get_f64_or("gamma", 0.0)?;
    let dp = green::DerivedParams::from_indices(nu, gamma)?;
    let h = match cfg.get_str_or("family", "h1") {
        "h1" => green::build_h1(&dp)?,
        "h2" => green::build_h2(&dp)?,
        other => return Err(format!("unknown family `{other}` (h1 or h2)").into()),
    };
    let report = hfun::check_series_conditions(&h);
    eprintln!(
        "conditions: pole_separation={} lower_poles_simple={} upper_poles_simple={}",
        report.pole_separation, report.lower_poles_simple, report.upper_poles_simple
    );
    let zs = linear_range(
        cfg.get_f64("z_start")?,
        cfg.get_f64("z_stop")?,
        cfg.get_usize("z_count")?,
    )?;
    let tol = cfg.get_f64_or("tol", 1e-12)?;

    let mut table = Table::new(vec!["z", "re", "im", "method", "err_est", "terms"]);
    for &z in &zs {
        let result = if z > 0.0 && hfun::eval_auto(&h, Complex64::new(z, 0.0)).is_ok() {
            hfun::eval_auto(&h, Complex64::new(z, 0.0))
        } else {
            hfun::eval_series(&h, Complex64::new(z, 0.0), tol)
        };
        match result {
            Ok(r) => table.push(vec![
                Cell::Real(z),
                Cell::Real(r.value.re),
                Cell::Real(r.value.im),
                Cell::Text(r.method.to_string()),
                Cell::Real(r.abs_error_estimate),
                Cell::Int(r.terms_used as i64),
            ]),
            Err(e) => {
                eprintln!("warning: z={z}: {e}");
                table.push(vec![
                    Cell::Real(z),
                    Cell::Real(f64::NAN),
                    Cell::Real(f64::NAN),
                    Cell::Text(format!("error: {e}")),
                    Cell::Real(f64::NAN),
                    Cell::Int(0),
                ]);
            }
        }
    }
    let fmt = resolve_format(&cfg, format)?;
    emit(&table.render(fmt), resolve_out(&cfg, out))?;
    Ok(ExitCode::SUCCESS)
}

pub fn cmd_oracle(config: &Path, out: Option<PathBuf>, format: Option<String>) -> CmdResult {
    let cfg = Config::load(config)?;
    cfg.require_known_keys(&[
        "nu", "gamma", "x_start", "x_stop", "x_count", "abs_tol", "rel_tol", "format", "out",
    ])?;
    let dp = green::DerivedParams::from_indices(cfg.get_f64("nu")?, cfg.get_f64_or("gamma", 0.0)?)?;
    let xs = linear_range(
        cfg.get_f64("x_start")?,
        cfg.get_f64("x_stop")?,
        cfg.get_usize("x_count")?,
    )?;
    let qcfg = QuadratureConfig {
        abs_tol: cfg.get_f64_or("abs_tol", 1e-10)?,
        rel_tol: cfg.get_f64_or("rel_tol", 1e-10)?,
        ..Default::default()
    };

    let mut table = Table::new(vec![
        "x",
        "i_series_re",
        "i_series_im",
        "i_quad_re",
        "i_quad_im",
        "rel_err",
    ]);
    for &x in &xs {
        let series = green::eval_I(&dp, x);
        let quad = oracle::quad_I(&dp, x, &qcfg);
        match (series, quad) {
            (Ok((s, _)), Ok((q, _))) => {
                let rel = if q.norm() > 0.0 {
                    (s - q).norm() / q.norm()
                } else {
                    (s - q).norm()
                };
                table.push(vec![
                    Cell::Real(x),
                    Cell::Real(s.re),
                    Cell::Real(s.im),
                    Cell::Real(q.re),
                    Cell::Real(q.im),
                    Cell::Real(rel),
                ]);
            }
            (s, q) => {
                if let Err(e) = s {
                    eprintln!("warning: x={x}: series: {e}");
                }
                if let Err(e) = q {
                    eprintln!("warning: x={x}: quadrature: {e}");
                }
                table.push(vec![
                    Cell::Real(x),
                    Cell::Real(f64::NAN),
                    Cell::Real(f64::NAN),
                    Cell::Real(f64::NAN),
                    Cell::Real(f64::NAN),
                    Cell::Real(f64::NAN),
                ]);
            }
        }
    }
    let fmt = resolve_format(&cfg, format)?;
    emit(&table.render(fmt), resolve_out(&cfg, out))?;
    Ok(ExitCode::SUCCESS)
}

fn potential_from_config(cfg: &Config) -> Result<Potential, Box<dyn Error>> {
    let v0 = cfg.get_f64("v0")?;
    let sigma_r = cfg.get_f64("sigma_r")?;
    let center = [
        cfg.get_f64_or("center_x", 0.0)?,
        cfg.get_f64_or("center_y", 0.0)?,
        cfg.get_f64_or("center_z", 0.0)?,
    ];
    let profile = match cfg.get_str_or("profile", "gaussian") {
        "constant" => TimeProfile::Constant {
            t_on: cfg.get_f64("t_on")?,
            t_off: cfg.get_f64("t_off")?,
        },
        "gaussian" => TimeProfile::Gaussian {
            t0: cfg.get_f64("t0")?,
            sigma_t: cfg.get_f64("sigma_t")?,
        },
        other => return Err(format!("unknown profile `{other}`").into()),
    };
    Ok(Potential::gaussian(v0, sigma_r, center, profile))
}

pub fn cmd_born(config: &Path, out: Option<PathBuf>, format: Option<String>) -> CmdResult {
    let cfg = Config::load(config)?;
    cfg.require_known_keys(&[
        "alpha", "beta", "dcal", "hbar", "v0", "sigma_r", "center_x", "center_y", "center_z",
        "profile", "t_on", "t_off", "t0", "sigma_t", "kx", "ky", "kz", "grid_origin_x",
        "grid_origin_y", "grid_origin_z", "spacing", "nx", "ny", "nz", "t_start", "t_step", "nt",
        "n_max", "format", "out",
    ])?;
    let fp = frac_params(&cfg)?;
    let pot = potential_from_config(&cfg)?;
    let wv = Wavevector::from_k(
        [cfg.get_f64("kx")?, cfg.get_f64_or("ky", 0.0)?, cfg.get_f64_or("kz", 0.0)?],
        &fp,
    );
    let h = cfg.get_f64("spacing")?;
    let grid = SpaceTimeGrid::new(
        [
            cfg.get_f64("grid_origin_x")?,
            cfg.get_f64("grid_origin_y")?,
            cfg.get_f64("grid_origin_z")?,
        ],
        [h, h, h],
        [cfg.get_usize("nx")?, cfg.get_usize("ny")?, cfg.get_usize("nz")?],
        cfg.get_f64("t_start")?,
        cfg.get_f64("t_step")?,
        cfg.get_usize("nt")?,
    )?;
    let n_max = cfg.get_usize("n_max")?;

    let series = born_series(&fp, &pot, &wv, grid, n_max, &BornQuadratureConfig::default())?;

    let fmt = resolve_format(&cfg, format)?;
    let ext = match fmt {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let prefix = resolve_out(&cfg, out).unwrap_or_else(|| PathBuf::from("born"));
    let prefix_str = prefix.display().to_string();

    for field in &series.fields {
        let mut table = Table::new(vec![
            "it", "iz", "iy", "ix", "x", "y", "z", "t", "re", "im",
        ]);
        for (idx, v) in field.values.iter().enumerate() {
            let (it, iz, iy, ix) = field.grid.split_index(idx);
            let pos = field.grid.position(iz, iy, ix);
            table.push(vec![
                Cell::Int(it as i64),
                Cell::Int(iz as i64),
                Cell::Int(iy as i64),
                Cell::Int(ix as i64),
                Cell::Real(pos[0]),
                Cell::Real(pos[1]),
                Cell::Real(pos[2]),
                Cell::Real(field.grid.time(it)),
                Cell::Real(v.re),
                Cell::Real(v.im),
            ]);
        }
        let path = PathBuf::from(format!("{prefix_str}-order-{}.{ext}", field.order));
        emit(&table.render(fmt), Some(path))?;
        if !field.flagged.is_empty() {
            eprintln!(
                "warning: order {}: {} node(s) flagged (incident wave kept)",
                field.order,
                field.flagged.len()
            );
        }
    }

    let mut summary = Table::new(vec!["order", "increment_rms"]);
    for (i, nrm) in series.increment_norms.iter().enumerate() {
        summary.push(vec![Cell::Int((i + 1) as i64), Cell::Real(*nrm)]);
    }
    let summary_text = summary.render(fmt);
    emit(
        &summary_text,
        Some(PathBuf::from(format!("{prefix_str}-summary.{ext}"))),
    )?;
    print!("{summary_text}");
    Ok(ExitCode::SUCCESS)
}
