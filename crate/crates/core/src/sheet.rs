//! Discrete vortex-sheet initial data: circulation profiles and the
//! trapezoidal discretization of the sheet parametrization `α ∈ [0, π]`.
//!
//! The sheet is discretized on `α_j = πj/N`, `j = 0..=N`, so a sheet with
//! `N` intervals carries `N + 1` vortices. A "100001-vortex" run therefore
//! uses `N = 100000`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vec2::Vec2;

/// Which circulation profile the flat initial sheet carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialDataKind {
    /// `Γ(α) = sin α`, elliptic loading.
    LoadedWing,
    /// Elliptic outboard, cubic-spline inboard hump.
    FuselageFlap,
}

impl fmt::Display for InitialDataKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitialDataKind::LoadedWing => "loaded_wing",
            InitialDataKind::FuselageFlap => "fuselage_flap",
        })
    }
}

impl FromStr for InitialDataKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "loaded_wing" | "loaded-wing" | "lw" => Ok(InitialDataKind::LoadedWing),
            "fuselage_flap" | "fuselage-flap" | "ff" => Ok(InitialDataKind::FuselageFlap),
            other => Err(Error::Config(format!(
                "unknown initial data kind `{other}`"
            ))),
        }
    }
}

/// Spline coefficients `a0..a3` in `|x|`, for `|x| ∈ [0, 0.3]` and `[0.3, 0.7]`,
/// kept digit for digit as published.
#[allow(clippy::excessive_precision)]
const SPLINE_INNER: [f64; 4] = [1.4, 0.0, 20.0, -44.444444444444443];
#[allow(clippy::excessive_precision)]
const SPLINE_OUTER: [f64; 4] = [
    -0.868873730864876,
    22.190937843818809,
    -52.310461263296190,
    34.056810793181128,
];
const SPLINE_BREAK: f64 = 0.3;
const SPLINE_EDGE: f64 = 0.7;

fn check_alpha(alpha: f64, what: &str) -> Result<()> {
    if (0.0..=PI).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{what}: alpha = {alpha} outside [0, π]"
        )))
    }
}

fn spline_piece(ax: f64) -> &'static [f64; 4] {
    if ax <= SPLINE_BREAK {
        &SPLINE_INNER
    } else {
        &SPLINE_OUTER
    }
}

/// Loaded-wing circulation `sin α`.
pub fn gamma_lw(alpha: f64) -> Result<f64> {
    check_alpha(alpha, "gamma_lw")?;
    Ok(alpha.sin())
}

/// The even cubic spline `P` on `[-0.7, 0.7]` of the fuselage-flap profile.
pub fn spline_p(x: f64) -> Result<f64> {
    let ax = x.abs();
    if !(ax <= SPLINE_EDGE) {
        return Err(Error::domain(format!("spline_p: |x| = {ax} exceeds 0.7")));
    }
    let [a0, a1, a2, a3] = *spline_piece(ax);
    Ok(a0 + ax * (a1 + ax * (a2 + ax * a3)))
}

/// Derivative `P'(x)`.
pub fn spline_p_prime(x: f64) -> Result<f64> {
    let ax = x.abs();
    if !(ax <= SPLINE_EDGE) {
        return Err(Error::domain(format!(
            "spline_p_prime: |x| = {ax} exceeds 0.7"
        )));
    }
    let [_, a1, a2, a3] = *spline_piece(ax);
    let d = a1 + ax * (2.0 * a2 + ax * 3.0 * a3);
    Ok(if x < 0.0 { -d } else { d })
}

/// Fuselage-flap circulation.
pub fn gamma_ff(alpha: f64) -> Result<f64> {
    check_alpha(alpha, "gamma_ff")?;
    let c = alpha.cos();
    if c.abs() > SPLINE_EDGE {
        Ok(alpha.sin())
    } else {
        spline_p(c)
    }
}

/// Circulation `Γ(α)` for either profile.
pub fn gamma(kind: InitialDataKind, alpha: f64) -> Result<f64> {
    match kind {
        InitialDataKind::LoadedWing => gamma_lw(alpha),
        InitialDataKind::FuselageFlap => gamma_ff(alpha),
    }
}

/// `dΓ/dα`. At `|cos α| = 0.7` the fuselage-flap profile takes the sine branch.
pub fn gamma_prime(kind: InitialDataKind, alpha: f64) -> Result<f64> {
    check_alpha(alpha, "gamma_prime")?;
    let c = alpha.cos();
    match kind {
        InitialDataKind::LoadedWing => Ok(c),
        InitialDataKind::FuselageFlap if c.abs() >= SPLINE_EDGE => Ok(c),
        InitialDataKind::FuselageFlap => Ok(-alpha.sin() * spline_p_prime(c)?),
    }
}

/// Discrete vortex sheet: vortex `j` sits at `positions[j]` with circulation
/// `weights[j]` and sheet parameter `alphas[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct VortexSheet {
    alphas: Vec<f64>,
    positions: Vec<Vec2>,
    weights: Vec<f64>,
    eps: f64,
    time: f64,
}

impl VortexSheet {
    pub fn new(
        alphas: Vec<f64>,
        positions: Vec<Vec2>,
        weights: Vec<f64>,
        eps: f64,
        time: f64,
    ) -> Result<Self> {
        let sheet = VortexSheet {
            alphas,
            positions,
            weights,
            eps,
            time,
        };
        sheet.validate()?;
        Ok(sheet)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.alphas.len();
        let bad = |m: String| Err(Error::InvalidSheet(m));
        if n < 2 {
            return bad(format!("need at least 2 vortices, got {n}"));
        }
        if self.positions.len() != n || self.weights.len() != n {
            return bad(format!(
                "array lengths differ: alphas {n}, positions {}, weights {}",
                self.positions.len(),
                self.weights.len()
            ));
        }
        if self.alphas[0] != 0.0 || self.alphas[n - 1] != PI {
            return bad("alphas must start at 0 and end at π".into());
        }
        if self.alphas.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("alphas must be strictly increasing".into());
        }
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return bad(format!("eps must be positive and finite, got {}", self.eps));
        }
        if !(self.time >= 0.0) || !self.time.is_finite() {
            return bad(format!(
                "time must be finite and nonnegative, got {}",
                self.time
            ));
        }
        if let Some(j) = self.positions.iter().position(|p| !p.is_finite()) {
            return bad(format!("non-finite position at index {j}"));
        }
        if let Some(j) = self.weights.iter().position(|w| !w.is_finite()) {
            return bad(format!("non-finite weight at index {j}"));
        }
        Ok(())
    }

    /// Number of vortices (`N + 1`).
    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    /// Number of parameter intervals `N`.
    pub fn intervals(&self) -> usize {
        self.alphas.len() - 1
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn positions(&self) -> &[Vec2] {
        &self.positions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// `Σ|w_j|`. Weights never change under the flow, so this is also the
    /// total variation of the initial vorticity.
    pub fn total_variation(&self) -> f64 {
        self.weights.iter().map(|w| w.abs()).sum()
    }

    /// `Σ w_j`.
    pub fn total_circulation(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub(crate) fn with_state(&self, positions: Vec<Vec2>, time: f64) -> VortexSheet {
        debug_assert_eq!(positions.len(), self.positions.len());
        VortexSheet {
            alphas: self.alphas.clone(),
            positions,
            weights: self.weights.clone(),
            eps: self.eps,
            time,
        }
    }

    pub(crate) fn set_time(&mut self, time: f64) {
        self.time = time;
    }
}

/// Builds the flat sheet `z_j = (−cos α_j, 0)` on `α_j = πj/N` with
/// trapezoidal weights `w_j = Γ'(α_j)·π/N`, halved at both endpoints.
///
/// Both circulation profiles are symmetric about `α = π/2`, so the upper half
/// of the sheet is the exact mirror image of the lower half.
pub fn discretize(kind: InitialDataKind, n: usize, eps: f64) -> Result<VortexSheet> {
    if n < 2 {
        return Err(Error::domain(format!(
            "discretize: need N >= 2 intervals, got {n}"
        )));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::domain(format!(
            "discretize: eps must be positive, got {eps}"
        )));
    }
    let nf = n as f64;
    let h = PI / nf;
    let mut alphas: Vec<f64> = (0..=n).map(|j| PI * (j as f64) / nf).collect();
    alphas[n] = PI;

    let mut positions = vec![Vec2::ZERO; n + 1];
    let mut weights = vec![0.0; n + 1];
    for j in 0..=n / 2 {
        let mirror = n - j;
        if j == mirror {
            // centre node of an even N: Γ' vanishes at π/2 for both profiles
            break;
        }
        let alpha = alphas[j];
        let trap = if j == 0 { 0.5 * h } else { h };
        let w = gamma_prime(kind, alpha)? * trap;
        let x = -alpha.cos();
        positions[j] = Vec2::new(x, 0.0);
        positions[mirror] = Vec2::new(-x, 0.0);
        weights[j] = w;
        weights[mirror] = -w;
    }
    VortexSheet::new(alphas, positions, weights, eps, 0.0)
}
