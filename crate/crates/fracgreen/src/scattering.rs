//! Born-approximation machinery: fractional plane waves, the first-order
//! scattered wave in the far field, and the iterated Born series on sampled
//! space-time grids.
//!
//! The integral form of the equation of motion is
//!
//! ```text
//! ψ(r,t) = ψ₀(r,t) + 𝒟 ∬ G(r,t;r',t') V(r',t') ψ(r',t') d³r' dt',
//! ```
//!
//! iterated as ψ⁽ⁿ⁾ = ψ₀ + 𝒟 ∬ G V ψ⁽ⁿ⁻¹⁾ (the 𝒟 prefactor follows the
//! defining integral equation). First order with ψ ≈ ψ₀ and the asymptotic
//! Green's function gives the far-field scattered wave; the grid iteration
//! uses the exact series form of G, which is valid down to r = r'.

use crate::green::{self, FracParams, GreenRadialEvaluator, SpaceTimePoint};
use crate::quadrature::{gauss_legendre, simpson_weights};
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScatteringError {
    #[error("k/E inconsistent: |k| = {k_mag}, dispersion requires (E/D)^(1/alpha) = {expected}")]
    DispersionInconsistent { k_mag: f64, expected: f64 },
    #[error("incompatible grids")]
    GridMismatch,
    #[error("evaluation point inside potential region (distance {dist} < margin {margin})")]
    InsidePotentialRegion { dist: f64, margin: f64 },
    #[error("potential support is not resolved by the grid")]
    UnresolvedPotential,
    #[error("invalid scattering input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Green(#[from] green::GreenError),
}

/// Relative cutoff below which the potential is treated as exactly zero;
/// defines the compact effective support.
pub const SUPPORT_CUTOFF: f64 = 1e-12;

/// Time dependence of a separable potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeProfile {
    /// Constant within [t_on, t_off], zero outside.
    Constant { t_on: f64, t_off: f64 },
    /// Gaussian pulse exp(−(t−t0)²/(2σ_t²)).
    Gaussian { t0: f64, sigma_t: f64 },
}

impl TimeProfile {
    fn eval(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Constant { t_on, t_off } => {
                if t >= t_on && t <= t_off {
                    1.0
                } else {
                    0.0
                }
            }
            TimeProfile::Gaussian { t0, sigma_t } => {
                let u = (t - t0) / sigma_t;
                let v = (-0.5 * u * u).exp();
                if v < SUPPORT_CUTOFF {
                    0.0
                } else {
                    v
                }
            }
        }
    }

    fn support(&self) -> (f64, f64) {
        match *self {
            TimeProfile::Constant { t_on, t_off } => (t_on, t_off),
            TimeProfile::Gaussian { t0, sigma_t } => {
                // exp(-u^2/2) = 1e-12 at u ≈ 7.434
                let half = CUTOFF_SIGMAS * sigma_t;
                (t0 - half, t0 + half)
            }
        }
    }
}

/// Number of standard deviations at which a Gaussian falls below
/// [`SUPPORT_CUTOFF`]: √(2 ln 1e12) ≈ 7.434.
pub const CUTOFF_SIGMAS: f64 = 7.433_943_675_107_77;

/// Uniform spatial lattice plus uniform time samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeGrid {
    pub origin: [f64; 3],
    pub spacing: [f64; 3],
    pub shape: [usize; 3],
    pub t_start: f64,
    pub t_step: f64,
    pub nt: usize,
}

impl SpaceTimeGrid {
    pub fn new(
        origin: [f64; 3],
        spacing: [f64; 3],
        shape: [usize; 3],
        t_start: f64,
        t_step: f64,
        nt: usize,
    ) -> Result<Self, ScatteringError> {
        if shape.iter().any(|&n| n == 0) || nt == 0 {
            return Err(ScatteringError::Invalid("grid shape must be nonzero".into()));
        }
        if spacing.iter().any(|&h| !(h > 0.0)) || !(t_step > 0.0) {
            return Err(ScatteringError::Invalid("grid spacing must be positive".into()));
        }
        Ok(SpaceTimeGrid { origin, spacing, shape, t_start, t_step, nt })
    }

    pub fn n_spatial(&self) -> usize {
        self.shape[0] * self.shape[1] * self.shape[2]
    }

    pub fn n_nodes(&self) -> usize {
        self.n_spatial() * self.nt
    }

    /// Flat index for (it, iz, iy, ix), x fastest.
    pub fn index(&self, it: usize, iz: usize, iy: usize, ix: usize) -> usize {
        ((it * self.shape[2] + iz) * self.shape[1] + iy) * self.shape[0] + ix
    }

    pub fn split_index(&self, idx: usize) -> (usize, usize, usize, usize) {
        let ix = idx % self.shape[0];
        let rest = idx / self.shape[0];
        let iy = rest % self.shape[1];
        let rest = rest / self.shape[1];
        let iz = rest % self.shape[2];
        let it = rest / self.shape[2];
        (it, iz, iy, ix)
    }

    pub fn position(&self, iz: usize, iy: usize, ix: usize) -> [f64; 3] {
        [
            self.origin[0] + ix as f64 * self.spacing[0],
            self.origin[1] + iy as f64 * self.spacing[1],
            self.origin[2] + iz as f64 * self.spacing[2],
        ]
    }

    pub fn time(&self, it: usize) -> f64 {
        self.t_start + it as f64 * self.t_step
    }
}

/// Scattering potential with compact effective support.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    GaussianSeparable {
        v0: f64,
        sigma_r: f64,
        center: [f64; 3],
        profile: TimeProfile,
    },
    GridSampled {
        grid: SpaceTimeGrid,
        values: Vec<f64>,
    },
}

impl Potential {
    pub fn gaussian(v0: f64, sigma_r: f64, center: [f64; 3], profile: TimeProfile) -> Self {
        Potential::GaussianSeparable { v0, sigma_r, center, profile }
    }

    pub fn grid_sampled(grid: SpaceTimeGrid, values: Vec<f64>) -> Result<Self, ScatteringError> {
        if values.len() != grid.n_nodes() {
            return Err(ScatteringError::Invalid(format!(
                "expected {} samples, got {}",
                grid.n_nodes(),
                values.len()
            )));
        }
        Ok(Potential::GridSampled { grid, values })
    }

    /// V(r, t), exactly zero outside the effective support.
    pub fn eval(&self, r: &[f64; 3], t: f64) -> f64 {
        match self {
            Potential::GaussianSeparable { v0, sigma_r, center, profile } => {
                let d2 = (r[0] - center[0]).powi(2)
                    + (r[1] - center[1]).powi(2)
                    + (r[2] - center[2]).powi(2);
                let u = d2 / (2.0 * sigma_r * sigma_r);
                let radial = (-u).exp();
                if radial < SUPPORT_CUTOFF {
                    return 0.0;
                }
                v0 * radial * profile.eval(t)
            }
            Potential::GridSampled { grid, values } => {
                // trilinear in space, linear in time, zero outside the grid
                let fx = (r[0] - grid.origin[0]) / grid.spacing[0];
                let fy = (r[1] - grid.origin[1]) / grid.spacing[1];
                let fz = (r[2] - grid.origin[2]) / grid.spacing[2];
                let ft = (t - grid.t_start) / grid.t_step;
                if fx < 0.0 || fy < 0.0 || fz < 0.0 || ft < 0.0 {
                    return 0.0;
                }
                let (ix, iy, iz, it) = (fx.floor(), fy.floor(), fz.floor(), ft.floor());
                if ix as usize + 1 >= grid.shape[0]
                    || iy as usize + 1 >= grid.shape[1]
                    || iz as usize + 1 >= grid.shape[2]
                    || it as usize + 1 >= grid.nt
                {
                    return 0.0;
                }
                let (wx, wy, wz, wt) = (fx - ix, fy - iy, fz - iz, ft - it);
                let (ix, iy, iz, it) = (ix as usize, iy as usize, iz as usize, it as usize);
                let mut acc = 0.0;
                for (dt_, wt_) in [(0, 1.0 - wt), (1, wt)] {
                    for (dz, wz_) in [(0, 1.0 - wz), (1, wz)] {
                        for (dy, wy_) in [(0, 1.0 - wy), (1, wy)] {
                            for (dx, wx_) in [(0, 1.0 - wx), (1, wx)] {
                                acc += wt_ * wz_ * wy_ * wx_
                                    * values[grid.index(it + dt_, iz + dz, iy + dy, ix + dx)];
                            }
                        }
                    }
                }
                acc
            }
        }
    }

    /// Axis-aligned bounding box of the effective support.
    pub fn bounding_box(&self) -> ([f64; 3], [f64; 3]) {
        match self {
            Potential::GaussianSeparable { sigma_r, center, .. } => {
                let r = CUTOFF_SIGMAS * sigma_r;
                (
                    [center[0] - r, center[1] - r, center[2] - r],
                    [center[0] + r, center[1] + r, center[2] + r],
                )
            }
            Potential::GridSampled { grid, values } => {
                let vmax = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let cut = SUPPORT_CUTOFF * vmax;
                let mut lo = [f64::INFINITY; 3];
                let mut hi = [f64::NEG_INFINITY; 3];
                for (idx, v) in values.iter().enumerate() {
                    if v.abs() > cut {
                        let (_, iz, iy, ix) = grid.split_index(idx);
                        let p = grid.position(iz, iy, ix);
                        for d in 0..3 {
                            lo[d] = lo[d].min(p[d]);
                            hi[d] = hi[d].max(p[d]);
                        }
                    }
                }
                if lo[0] > hi[0] {
                    (grid.origin, grid.origin)
                } else {
                    (lo, hi)
                }
            }
        }
    }

    /// Interval of times where the potential can be nonzero.
    pub fn time_support(&self) -> (f64, f64) {
        match self {
            Potential::GaussianSeparable { profile, .. } => profile.support(),
            Potential::GridSampled { grid, .. } => {
                (grid.t_start, grid.t_start + (grid.nt - 1) as f64 * grid.t_step)
            }
        }
    }

    /// Far-field margin: 5σ_r for the Gaussian, five grid spacings for a
    /// sampled potential.
    pub fn far_field_margin(&self) -> f64 {
        match self {
            Potential::GaussianSeparable { sigma_r, .. } => 5.0 * sigma_r,
            Potential::GridSampled { grid, .. } => {
                5.0 * grid.spacing.iter().cloned().fold(0.0f64, f64::max)
            }
        }
    }

    fn scale(&self, factor: f64) -> Potential {
        match self {
            Potential::GaussianSeparable { v0, sigma_r, center, profile } => {
                Potential::GaussianSeparable {
                    v0: v0 * factor,
                    sigma_r: *sigma_r,
                    center: *center,
                    profile: *profile,
                }
            }
            Potential::GridSampled { grid, values } => Potential::GridSampled {
                grid: grid.clone(),
                values: values.iter().map(|v| v * factor).collect(),
            },
        }
    }
}

/// Incident wavevector with its energy, constrained by the fractional
/// dispersion |k| = (E/𝒟)^{1/α}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavevector {
    pub k: [f64; 3],
    pub energy: f64,
}

fn mag3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

impl Wavevector {
    /// Validate the dispersion constraint to 1e-9 relative.
    pub fn new(k: [f64; 3], energy: f64, fp: &FracParams) -> Result<Self, ScatteringError> {
        let k_mag = mag3(&k);
        let expected = (energy / fp.dcal).powf(1.0 / fp.alpha);
        if (k_mag - expected).abs() > 1e-9 * expected.max(1e-300) {
            return Err(ScatteringError::DispersionInconsistent { k_mag, expected });
        }
        Ok(Wavevector { k, energy })
    }

    /// Energy from the dispersion: E = 𝒟|k|^α.
    pub fn from_k(k: [f64; 3], fp: &FracParams) -> Self {
        let energy = fp.dcal * mag3(&k).powf(fp.alpha);
        Wavevector { k, energy }
    }

    /// Wavevector of magnitude (E/𝒟)^{1/α} along `direction`.
    pub fn from_direction(direction: [f64; 3], energy: f64, fp: &FracParams) -> Result<Self, ScatteringError> {
        let d = mag3(&direction);
        if !(d > 0.0) || !(energy > 0.0) {
            return Err(ScatteringError::Invalid(
                "need a nonzero direction and positive energy".into(),
            ));
        }
        let k_mag = (energy / fp.dcal).powf(1.0 / fp.alpha);
        Ok(Wavevector {
            k: [
                direction[0] / d * k_mag,
                direction[1] / d * k_mag,
                direction[2] / d * k_mag,
            ],
            energy,
        })
    }
}

/// Fractional plane wave e^{i(k·r − Et)/ħ}.
pub fn plane_wave(fp: &FracParams, wv: &Wavevector, p: &SpaceTimePoint) -> Complex64 {
    let phase = (wv.k[0] * p.r[0] + wv.k[1] * p.r[1] + wv.k[2] * p.r[2] - wv.energy * p.t) / fp.hbar;
    Complex64::from_polar(1.0, phase)
}

/// Sampled complex wave function on a space-time grid, with its Born order.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    pub grid: SpaceTimeGrid,
    pub values: Vec<Complex64>,
    pub order: usize,
    /// Node indices where the iteration integral failed; those nodes carry
    /// the incident wave only.
    pub flagged: Vec<usize>,
}

impl WaveField {
    /// Order-0 field: the analytic plane wave at every node.
    pub fn plane_wave_field(grid: SpaceTimeGrid, fp: &FracParams, wv: &Wavevector) -> Self {
        let mut values = Vec::with_capacity(grid.n_nodes());
        for idx in 0..grid.n_nodes() {
            let (it, iz, iy, ix) = grid.split_index(idx);
            let p = SpaceTimePoint::new(grid.position(iz, iy, ix), grid.time(it));
            values.push(plane_wave(fp, wv, &p));
        }
        WaveField { grid, values, order: 0, flagged: vec![] }
    }

    /// Root-mean-square of |self − other| over all nodes.
    pub fn rms_difference(&self, other: &WaveField) -> Result<f64, ScatteringError> {
        if self.grid != other.grid {
            return Err(ScatteringError::GridMismatch);
        }
        let sum: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok((sum / self.values.len() as f64).sqrt())
    }
}

/// Quadrature controls for the Born integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BornQuadratureConfig {
    /// Gauss-Legendre points per spatial panel.
    pub gl_points: usize,
    /// Panels per spatial dimension over the potential box (capped at 32).
    pub gl_panels: usize,
    /// Gauss-Legendre points over the active time window.
    pub time_points: usize,
}

impl Default for BornQuadratureConfig {
    fn default() -> Self {
        BornQuadratureConfig { gl_points: 10, gl_panels: 2, time_points: 16 }
    }
}

/// First-order result: incident wave and scattered correction at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstOrderWave {
    pub incident: Complex64,
    pub scattered: Complex64,
}

impl FirstOrderWave {
    pub fn total(&self) -> Complex64 {
        self.incident + self.scattered
    }
}

/// First Born approximation in the far field:
/// ψ ≈ ψ₀ + 𝒟 ∬ G_asym(|r−r'|, t−t') V(r',t') ψ₀(r',t') d³r' dt',
/// with the asymptotic Green's function (rebuilt prefactor) and
/// tensor-product Gauss-Legendre quadrature over the potential support.
/// The evaluation point must be at least the far-field margin outside the
/// potential's bounding box.
pub fn born_first_order(
    fp: &FracParams,
    pot: &Potential,
    wv: &Wavevector,
    point: &SpaceTimePoint,
    cfg: &BornQuadratureConfig,
) -> Result<FirstOrderWave, ScatteringError> {
    let incident = plane_wave(fp, wv, point);
    let (lo, hi) = pot.bounding_box();
    let margin = pot.far_field_margin();
    // Euclidean distance from the point to the box.
    let mut d2 = 0.0;
    for d in 0..3 {
        let gap = (lo[d] - point.r[d]).max(0.0).max(point.r[d] - hi[d]);
        d2 += gap * gap;
    }
    let dist_to_box = d2.sqrt();
    if dist_to_box < margin {
        return Err(ScatteringError::InsidePotentialRegion { dist: dist_to_box, margin });
    }

    // Tighten a Gaussian pulse to ±6σ_t (mass beyond that is ~1e-8 of V).
    let (t_lo, t_hi) = match pot {
        Potential::GaussianSeparable { profile: TimeProfile::Gaussian { t0, sigma_t }, .. } => {
            (t0 - 6.0 * sigma_t, t0 + 6.0 * sigma_t)
        }
        _ => pot.time_support(),
    };
    let t_hi = t_hi.min(point.t);
    if t_hi <= t_lo {
        return Ok(FirstOrderWave { incident, scattered: Complex64::new(0.0, 0.0) });
    }

    let panels = cfg.gl_panels.clamp(1, 32);
    let (nodes, weights) = gauss_legendre(cfg.gl_points.max(2));
    // four uniform time panels keep the pulse core resolved
    let time_panels = 4usize;
    let (tnodes, tweights) = gauss_legendre((cfg.time_points / time_panels).max(3));

    // panel decomposition along one axis
    let axis = |a: f64, b: f64| -> Vec<(f64, f64)> {
        let mut pts = Vec::with_capacity(panels * nodes.len());
        let w = (b - a) / panels as f64;
        for p in 0..panels {
            let (pa, pb) = (a + p as f64 * w, a + (p + 1) as f64 * w);
            let half = 0.5 * (pb - pa);
            let mid = 0.5 * (pa + pb);
            for (x, wt) in nodes.iter().zip(&weights) {
                pts.push((mid + half * x, half * wt));
            }
        }
        pts
    };
    let xs = axis(lo[0], hi[0]);
    let ys = axis(lo[1], hi[1]);
    let zs = axis(lo[2], hi[2]);

    let mut ts: Vec<(f64, f64)> = Vec::with_capacity(time_panels * tnodes.len());
    let panel_w = (t_hi - t_lo) / time_panels as f64;
    for p in 0..time_panels {
        let (pa, pb) = (t_lo + p as f64 * panel_w, t_lo + (p + 1) as f64 * panel_w);
        let half = 0.5 * (pb - pa);
        let mid = 0.5 * (pa + pb);
        for (tn, tw) in tnodes.iter().zip(&tweights) {
            ts.push((mid + half * tn, half * tw));
        }
    }

    let mut scattered = Complex64::new(0.0, 0.0);
    for &(tp, tw) in &ts {
        let tau = point.t - tp;
        if tau <= 0.0 {
            continue;
        }
        let mut slab = Complex64::new(0.0, 0.0);
        for &(x, wx) in &xs {
            for &(y, wy) in &ys {
                for &(z, wz) in &zs {
                    let src = [x, y, z];
                    let v = pot.eval(&src, tp);
                    if v == 0.0 {
                        continue;
                    }
                    let sp = SpaceTimePoint::new(src, tp);
                    let dist = point.distance(&sp);
                    let (g, _) = green::green_asymptotic_raw(fp, dist, tau)?;
                    slab += wx * wy * wz * g * v * plane_wave(fp, wv, &sp);
                }
            }
        }
        scattered += tw * slab;
    }
    scattered *= fp.dcal;
    Ok(FirstOrderWave { incident, scattered })
}

/// Space-time quadrature layout for the iteration integral: Simpson weights
/// on the grid sub-lattice covered by the potential's bounding box, with the
/// potential sampled once per time slab.
struct BoxQuadrature {
    /// (spatial flat index, position, combined Simpson weight)
    nodes: Vec<(usize, [f64; 3], f64)>,
    /// per time sample: potential values on `nodes`, None when the slab is
    /// entirely outside the support
    v_by_time: Vec<Option<Vec<f64>>>,
}

impl BoxQuadrature {
    fn build(pot: &Potential, grid: &SpaceTimeGrid) -> Result<Self, ScatteringError> {
        let (lo, hi) = pot.bounding_box();
        let mut ranges = [(0usize, 0usize); 3];
        for d in 0..3 {
            let tiny = 1e-9 * grid.spacing[d];
            let i_lo =
                ((lo[d] - grid.origin[d] - tiny) / grid.spacing[d]).ceil().max(0.0) as usize;
            let i_hi_f = ((hi[d] - grid.origin[d] + tiny) / grid.spacing[d]).floor();
            if i_hi_f < 0.0 {
                return Err(ScatteringError::UnresolvedPotential);
            }
            let i_hi = (i_hi_f as usize).min(grid.shape[d] - 1);
            if i_hi < i_lo || i_hi - i_lo + 1 < 2 || i_lo >= grid.shape[d] {
                return Err(ScatteringError::UnresolvedPotential);
            }
            ranges[d] = (i_lo, i_hi);
        }
        let count = |d: usize| ranges[d].1 - ranges[d].0 + 1;
        let wx = simpson_weights(count(0), grid.spacing[0]);
        let wy = simpson_weights(count(1), grid.spacing[1]);
        let wz = simpson_weights(count(2), grid.spacing[2]);

        let mut nodes = Vec::with_capacity(count(0) * count(1) * count(2));
        for iz in ranges[2].0..=ranges[2].1 {
            for iy in ranges[1].0..=ranges[1].1 {
                for ix in ranges[0].0..=ranges[0].1 {
                    let pos = grid.position(iz, iy, ix);
                    let w = wz[iz - ranges[2].0] * wy[iy - ranges[1].0] * wx[ix - ranges[0].0];
                    let spatial = (iz * grid.shape[1] + iy) * grid.shape[0] + ix;
                    nodes.push((spatial, pos, w));
                }
            }
        }

        let (t_sup_lo, t_sup_hi) = pot.time_support();
        let v_by_time: Vec<Option<Vec<f64>>> = (0..grid.nt)
            .map(|jt| {
                let tj = grid.time(jt);
                if tj < t_sup_lo || tj > t_sup_hi {
                    return None;
                }
                let vals: Vec<f64> = nodes.iter().map(|(_, pos, _)| pot.eval(pos, tj)).collect();
                if vals.iter().all(|&v| v == 0.0) {
                    None
                } else {
                    Some(vals)
                }
            })
            .collect();

        Ok(BoxQuadrature { nodes, v_by_time })
    }

    /// Σ_box w · G(|r−r'|) · V · ψ_prev for one time slab.
    fn slab_sum(
        &self,
        evaluator: &GreenRadialEvaluator,
        profile: &green::RadialProfile,
        jt: usize,
        n_spatial: usize,
        prev: &WaveField,
        r: &[f64; 3],
    ) -> Result<Complex64, green::GreenError> {
        let Some(vj) = &self.v_by_time[jt] else {
            return Ok(Complex64::new(0.0, 0.0));
        };
        let base = jt * n_spatial;
        let mut slab = Complex64::new(0.0, 0.0);
        for ((spatial, pos, w), &v) in self.nodes.iter().zip(vj.iter()) {
            if v == 0.0 {
                continue;
            }
            let dist = ((r[0] - pos[0]).powi(2) + (r[1] - pos[1]).powi(2)
                + (r[2] - pos[2]).powi(2))
            .sqrt();
            let g = evaluator.eval_profile(profile, dist)?;
            slab += *w * g * v * prev.values[base + spatial];
        }
        Ok(slab)
    }
}

/// Number of grid time samples strictly before t (capped at nt).
fn slabs_before(grid: &SpaceTimeGrid, t: f64) -> usize {
    let f = (t - grid.t_start) / grid.t_step - 1e-9;
    if f < 0.0 {
        0
    } else {
        ((f.floor() as usize) + 1).min(grid.nt)
    }
}

/// One Born iteration on the grid:
/// ψ⁽ⁿ⁾(r,t) = ψ₀(r,t) + 𝒟 ∬ G V ψ⁽ⁿ⁻¹⁾, with the exact (series-form)
/// Green's function and composite Simpson over the grid nodes inside the
/// potential's bounding box. The time integral runs over grid times strictly
/// before t (the final partial slab is dropped; with pulsed potentials that
/// end before the observation times this truncation is exact).
pub fn born_iterate(
    fp: &FracParams,
    pot: &Potential,
    wv: &Wavevector,
    prev: &WaveField,
    _cfg: &BornQuadratureConfig,
) -> Result<WaveField, ScatteringError> {
    if let Potential::GridSampled { grid, .. } = pot {
        if *grid != prev.grid {
            return Err(ScatteringError::GridMismatch);
        }
    }
    let grid = prev.grid.clone();
    let boxq = BoxQuadrature::build(pot, &grid)?;
    let evaluator = GreenRadialEvaluator::new(fp);
    let n_spatial = grid.n_spatial();

    // time-separation profiles, one per slab offset k = it - jt
    let profiles: Vec<Option<green::RadialProfile>> = (0..grid.nt)
        .map(|k| {
            if k == 0 {
                None
            } else {
                evaluator.profile(k as f64 * grid.t_step).ok()
            }
        })
        .collect();
    let time_weights: Vec<Vec<f64>> =
        (0..=grid.nt).map(|n| simpson_weights(n, grid.t_step)).collect();

    let results: Vec<Result<Complex64, usize>> = (0..grid.n_nodes())
        .into_par_iter()
        .map(|idx| {
            let (it, iz, iy, ix) = grid.split_index(idx);
            let p = SpaceTimePoint::new(grid.position(iz, iy, ix), grid.time(it));
            let psi0 = plane_wave(fp, wv, &p);
            if it < 2 {
                // fewer than two earlier samples: no resolvable time slab
                return Ok(psi0);
            }
            let wt = &time_weights[it];
            let mut integral = Complex64::new(0.0, 0.0);
            for (jt, wt_j) in wt.iter().enumerate() {
                if *wt_j == 0.0 || boxq.v_by_time[jt].is_none() {
                    continue;
                }
                let Some(profile) = &profiles[it - jt] else {
                    return Err(idx);
                };
                let slab = boxq
                    .slab_sum(&evaluator, profile, jt, n_spatial, prev, &p.r)
                    .map_err(|_| idx)?;
                integral += wt_j * slab;
            }
            Ok(psi0 + fp.dcal * integral)
        })
        .collect();

    let mut values = Vec::with_capacity(results.len());
    let mut flagged = Vec::new();
    for (idx, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => values.push(v),
            Err(_) => {
                flagged.push(idx);
                let (it, iz, iy, ix) = grid.split_index(idx);
                let p = SpaceTimePoint::new(grid.position(iz, iy, ix), grid.time(it));
                values.push(plane_wave(fp, wv, &p));
            }
        }
    }
    Ok(WaveField { grid, values, order: prev.order + 1, flagged })
}

/// Evaluate the next Born iterate at an arbitrary space-time point (e.g. a
/// far-field probe) from a field sampled on the potential region. Uses the
/// same box quadrature and time-slab rule as [`born_iterate`], so the result
/// at a grid node equals the iterated field there.
pub fn born_apply_at(
    fp: &FracParams,
    pot: &Potential,
    wv: &Wavevector,
    prev: &WaveField,
    point: &SpaceTimePoint,
) -> Result<Complex64, ScatteringError> {
    if let Potential::GridSampled { grid, .. } = pot {
        if *grid != prev.grid {
            return Err(ScatteringError::GridMismatch);
        }
    }
    let grid = &prev.grid;
    let boxq = BoxQuadrature::build(pot, grid)?;
    let evaluator = GreenRadialEvaluator::new(fp);
    let n_spatial = grid.n_spatial();
    let psi0 = plane_wave(fp, wv, point);

    let count = slabs_before(grid, point.t);
    if count < 2 {
        return Ok(psi0);
    }
    let wt = simpson_weights(count, grid.t_step);
    let mut integral = Complex64::new(0.0, 0.0);
    for (jt, wt_j) in wt.iter().enumerate() {
        if *wt_j == 0.0 || boxq.v_by_time[jt].is_none() {
            continue;
        }
        let profile = evaluator.profile(point.t - grid.time(jt))?;
        integral += wt_j * boxq.slab_sum(&evaluator, &profile, jt, n_spatial, prev, &point.r)?;
    }
    Ok(psi0 + fp.dcal * integral)
}

/// Born series to order `n_max`: the sequence ψ⁽⁰⁾…ψ⁽ⁿ⁾ with per-order
/// RMS increment norms for convergence monitoring.
#[derive(Debug, Clone)]
pub struct BornSeries {
    pub fields: Vec<WaveField>,
    pub increment_norms: Vec<f64>,
}

pub fn born_series(
    fp: &FracParams,
    pot: &Potential,
    wv: &Wavevector,
    grid: SpaceTimeGrid,
    n_max: usize,
    cfg: &BornQuadratureConfig,
) -> Result<BornSeries, ScatteringError> {
    let mut fields = vec![WaveField::plane_wave_field(grid, fp, wv)];
    let mut increment_norms = Vec::new();
    for _ in 0..n_max {
        let next = born_iterate(fp, pot, wv, fields.last().unwrap(), cfg)?;
        increment_norms.push(next.rms_difference(fields.last().unwrap())?);
        fields.push(next);
    }
    Ok(BornSeries { fields, increment_norms })
}

/// Scale the potential amplitude (used by linearity checks).
pub fn scaled_potential(pot: &Potential, factor: f64) -> Potential {
    pot.scale(factor)
}
