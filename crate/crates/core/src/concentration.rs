//! Vorticity maximal function `M_r(ω) = sup_x Σ_{|z_j − x| ≤ r} |w_j|` of a
//! discrete sheet, estimated globally by dyadic square windows over a binned
//! grid and locally by exact disc sums around tracked vortices.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sheet::VortexSheet;
use crate::vec2::Vec2;

/// Smallest half-length admitted for a degenerate point cloud.
pub const MIN_HALF_LENGTH: f64 = 1e-12;

pub const DEFAULT_ND: usize = 4096;

/// What a grid cell accumulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinMode {
    /// `Σ |w_j|`, for maximal functions.
    Absolute,
    /// `Σ w_j`, for the structure-function pair sum.
    Signed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveMethod {
    GlobalSquare,
    LocalDisc,
}

/// `nd × nd` cell masses over the square `[c − L, c + L]²`, row-major in `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridBins {
    pub center: Vec2,
    pub half_length: f64,
    pub nd: usize,
    pub mode: BinMode,
    /// `mass[l * nd + k]` holds cell `[x_k, x_{k+1}) × [y_l, y_{l+1})`.
    pub mass: Vec<f64>,
}

impl GridBins {
    /// Side length `2L / nd` of one cell.
    pub fn cell_size(&self) -> f64 {
        2.0 * self.half_length / self.nd as f64
    }

    /// Lower-left corner of the grid.
    pub fn origin(&self) -> Vec2 {
        self.center - Vec2::new(self.half_length, self.half_length)
    }

    pub fn cell_center(&self, k: usize, l: usize) -> Vec2 {
        let h = self.cell_size();
        self.origin() + Vec2::new((k as f64 + 0.5) * h, (l as f64 + 0.5) * h)
    }

    pub fn at(&self, k: usize, l: usize) -> f64 {
        self.mass[l * self.nd + k]
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }
}

/// Sampled maximal-function curve `r ↦ M_r`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximalCurve {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub time: f64,
    pub eps: f64,
    pub method: CurveMethod,
}

/// Least-squares power law `M_r ≈ prefactor · r^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFit {
    pub exponent: f64,
    pub prefactor: f64,
}

/// Centre of the per-axis extrema and the minimal half-length enclosing all points.
pub fn bounding_square(positions: &[Vec2]) -> Result<(Vec2, f64)> {
    let first = *positions
        .first()
        .ok_or_else(|| Error::domain("bounding_square: no points"))?;
    let (mut lo, mut hi) = (first, first);
    for p in positions {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let center = Vec2::new(0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y));
    let half = (hi.x - center.x)
        .max(center.x - lo.x)
        .max(hi.y - center.y)
        .max(center.y - lo.y);
    Ok((center, half.max(MIN_HALF_LENGTH)))
}

/// Bins the vortices of `sheet` on an `nd × nd` grid over its bounding square.
pub fn bin_vorticity(sheet: &VortexSheet, nd: usize, mode: BinMode) -> Result<GridBins> {
    bin_cloud(sheet.positions(), sheet.weights(), nd, mode)
}

/// Half-open cell membership `[x_k, x_{k+1})`; points on the outer upper edge
/// fold into the last cell so no mass is lost.
pub fn bin_cloud(
    positions: &[Vec2],
    weights: &[f64],
    nd: usize,
    mode: BinMode,
) -> Result<GridBins> {
    if nd == 0 {
        return Err(Error::domain("bin_vorticity: nd must be >= 1"));
    }
    if positions.len() != weights.len() {
        return Err(Error::domain(
            "bin_vorticity: positions and weights differ in length",
        ));
    }
    let (center, half_length) = bounding_square(positions)?;
    let origin = center - Vec2::new(half_length, half_length);
    let scale = nd as f64 / (2.0 * half_length);
    let cell = |v: f64| -> usize { ((v * scale).floor().max(0.0) as usize).min(nd - 1) };

    let mut mass = vec![0.0; nd * nd];
    for (p, &w) in positions.iter().zip(weights) {
        let k = cell(p.x - origin.x);
        let l = cell(p.y - origin.y);
        mass[l * nd + k] += match mode {
            BinMode::Absolute => w.abs(),
            BinMode::Signed => w,
        };
    }
    Ok(GridBins {
        center,
        half_length,
        nd,
        mode,
        mass,
    })
}

/// Largest admissible level count for a grid of `nd` cells per side.
pub fn max_levels(nd: usize) -> usize {
    // 2^(levels-1) < nd
    let mut levels = 0;
    while levels < 63 && (1usize << levels) < nd {
        levels += 1;
    }
    levels
}

/// Dyadic window maxima: level `n` reports `max_{k,l} Σ_{|k'|,|l'| < 2^n} m_{k+k', l+l'}`
/// at radius `2^n · 2L/nd`. Windows are truncated at the grid edge.
pub fn maximal_global(bins: &GridBins, levels: usize) -> Result<MaximalCurve> {
    if bins.mode != BinMode::Absolute {
        return Err(Error::domain("maximal_global: needs absolute-mass bins"));
    }
    let nd = bins.nd;
    if levels == 0 || levels > max_levels(nd) {
        return Err(Error::domain(format!(
            "maximal_global: levels = {levels} needs 1 <= levels <= {} for nd = {nd}",
            max_levels(nd)
        )));
    }
    let r_min = bins.cell_size();
    let total = bins.total();

    // row prefix sums, then column prefix sums of the row windows
    let row_prefix: Vec<f64> = bins.mass.par_chunks(nd).flat_map_iter(prefix).collect();

    let mut radii = Vec::with_capacity(levels);
    let mut values = Vec::with_capacity(levels);
    let mut windows = vec![0.0; nd * nd];
    for n in 0..levels {
        let half = (1usize << n) - 1;
        windows
            .par_chunks_mut(nd)
            .zip(row_prefix.par_chunks(nd + 1))
            .for_each(|(out, p)| {
                for (k, o) in out.iter_mut().enumerate() {
                    *o = window_sum(p, k, half, nd);
                }
            });
        let best = (0..nd)
            .into_par_iter()
            .map(|k| {
                let column: Vec<f64> = (0..nd).map(|l| windows[l * nd + k]).collect();
                let p = prefix(&column);
                (0..nd)
                    .map(|l| window_sum(&p, l, half, nd))
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max);
        radii.push((1u64 << n) as f64 * r_min);
        values.push(best);
    }
    finish_curve(&mut values, total);
    Ok(MaximalCurve {
        radii,
        values,
        time: 0.0,
        eps: 0.0,
        method: CurveMethod::GlobalSquare,
    })
}

/// Global curve of a sheet snapshot with its time and blob size attached.
pub fn maximal_global_sheet(sheet: &VortexSheet, nd: usize, levels: usize) -> Result<MaximalCurve> {
    let bins = bin_vorticity(sheet, nd, BinMode::Absolute)?;
    let mut curve = maximal_global(&bins, levels)?;
    curve.time = sheet.time();
    curve.eps = sheet.eps();
    Ok(curve)
}

fn prefix(values: &[f64]) -> Vec<f64> {
    let mut p = Vec::with_capacity(values.len() + 1);
    let mut acc = 0.0;
    p.push(acc);
    for &v in values {
        acc += v;
        p.push(acc);
    }
    p
}

#[inline]
fn window_sum(prefix: &[f64], center: usize, half: usize, len: usize) -> f64 {
    let lo = center.saturating_sub(half);
    let hi = (center + half).min(len - 1) + 1;
    (prefix[hi] - prefix[lo]).max(0.0)
}

/// Enforces the exact monotonicity and mass bound that rounding can nick.
fn finish_curve(values: &mut [f64], total: f64) {
    let mut running: f64 = 0.0;
    for v in values.iter_mut() {
        running = running.max(*v);
        *v = running.min(total);
    }
}

/// `r ↦ Σ_{|z_j − z_c| ≤ r} |w_j|` around vortex `center_index` (closed discs).
pub fn maximal_local(
    sheet: &VortexSheet,
    center_index: usize,
    radii: &[f64],
) -> Result<MaximalCurve> {
    let z = sheet.positions();
    let zc = *z.get(center_index).ok_or_else(|| {
        Error::domain(format!(
            "maximal_local: center index {center_index} out of range for {} vortices",
            z.len()
        ))
    })?;
    check_radii(radii)?;

    let mut by_distance: Vec<(f64, f64)> = z
        .iter()
        .zip(sheet.weights())
        .map(|(&p, &w)| ((p - zc).norm(), w.abs()))
        .collect();
    // stable sort keeps index order among equal distances
    by_distance.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut values = Vec::with_capacity(radii.len());
    let (mut i, mut acc) = (0, 0.0);
    for &r in radii {
        while i < by_distance.len() && by_distance[i].0 <= r {
            acc += by_distance[i].1;
            i += 1;
        }
        values.push(acc);
    }
    finish_curve(&mut values, sheet.total_variation());
    Ok(MaximalCurve {
        radii: radii.to_vec(),
        values,
        time: sheet.time(),
        eps: sheet.eps(),
        method: CurveMethod::LocalDisc,
    })
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::domain("no radii given"));
    }
    if radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(Error::domain("radii must be positive and finite"));
    }
    if radii.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::domain("radii must be strictly increasing"));
    }
    Ok(())
}

/// `count` logarithmically spaced radii from `lo` to `hi` inclusive.
pub fn log_radii(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi / lo).ln() / (count - 1) as f64;
            let mut r: Vec<f64> = (0..count).map(|i| lo * (step * i as f64).exp()).collect();
            r[count - 1] = hi;
            r
        }
    }
}

/// The default local-tracking radii: 24 points log-spaced over `[1e-3, 1]`.
pub fn default_local_radii() -> Vec<f64> {
    log_radii(1e-3, 1.0, 24)
}

/// Index of the grid parameter closest to `alpha`, ties to the lower index.
pub fn nearest_parameter_index(alpha: f64, sheet: &VortexSheet) -> Result<usize> {
    if !(0.0..=std::f64::consts::PI).contains(&alpha) {
        return Err(Error::domain(format!("alpha = {alpha} outside [0, π]")));
    }
    let a = sheet.alphas();
    let hi = a.partition_point(|&x| x < alpha);
    if hi == 0 {
        return Ok(0);
    }
    if hi == a.len() {
        return Ok(a.len() - 1);
    }
    let lo = hi - 1;
    Ok(if alpha - a[lo] <= a[hi] - alpha {
        lo
    } else {
        hi
    })
}

/// Least-squares fit of `log M` against `log r` over samples with `r ∈ [r_lo, r_hi]`.
pub fn fit_decay_exponent(curve: &MaximalCurve, r_lo: f64, r_hi: f64) -> Result<PowerFit> {
    let slack = 1e-12;
    let pts: Vec<(f64, f64)> = curve
        .radii
        .iter()
        .zip(&curve.values)
        .filter(|(r, _)| **r >= r_lo * (1.0 - slack) && **r <= r_hi * (1.0 + slack))
        .map(|(&r, &m)| (r, m))
        .collect();
    if pts.len() < 2 {
        return Err(Error::domain(format!(
            "fit_decay_exponent: need 2 samples in [{r_lo}, {r_hi}], found {}",
            pts.len()
        )));
    }
    if pts.iter().any(|(_, m)| !(*m > 0.0)) {
        return Err(Error::domain("fit_decay_exponent: values must be positive"));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let (slope, intercept) = least_squares(&xs, &ys);
    Ok(PowerFit {
        exponent: slope,
        prefactor: intercept.exp(),
    })
}

pub(crate) fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}
