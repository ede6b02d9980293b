//! Analytic test vorticity: a uniform circular vortex patch.

use std::f64::consts::PI;

use crate::concentration::{CurveMethod, MaximalCurve};
use crate::error::{Error, Result};
use crate::sheet::VortexSheet;
use crate::structure::VelocitySource;
use crate::vec2::Vec2;

/// `ω = strength` on the disc `|x − center| ≤ radius`, zero outside.
///
/// Velocity is rigid rotation `strength/2 · (x − c)^⊥` inside and the point
/// vortex field of the total circulation outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscVortex {
    pub center: Vec2,
    pub radius: f64,
    pub strength: f64,
}

impl DiscVortex {
    /// The unit disc with unit vorticity.
    pub fn unit() -> Self {
        DiscVortex {
            center: Vec2::ZERO,
            radius: 1.0,
            strength: 1.0,
        }
    }

    pub fn circulation(&self) -> f64 {
        self.strength * PI * self.radius * self.radius
    }

    /// Point cloud of the patch: one vortex per lattice cell of an
    /// `n_side × n_side` grid over `[c − R, c + R]²` whose centre lies in the
    /// disc, carrying that cell's circulation. Four zero-weight anchors pin the
    /// bounding square to the lattice so a grid of `n_side / m` bins nests exactly.
    pub fn to_sheet(&self, n_side: usize, eps: f64) -> Result<VortexSheet> {
        if n_side < 2 {
            return Err(Error::domain("disc fixture needs n_side >= 2"));
        }
        let r = self.radius;
        let step = 2.0 * r / n_side as f64;
        let cell_mass = self.strength * step * step;
        let mut positions = Vec::new();
        let mut weights = Vec::new();
        for (dx, dy) in [(-r, -r), (r, -r), (-r, r), (r, r)] {
            positions.push(self.center + Vec2::new(dx, dy));
            weights.push(0.0);
        }
        for j in 0..n_side {
            let y = -r + (j as f64 + 0.5) * step;
            for i in 0..n_side {
                let x = -r + (i as f64 + 0.5) * step;
                if x * x + y * y <= r * r {
                    positions.push(self.center + Vec2::new(x, y));
                    weights.push(cell_mass);
                }
            }
        }
        let n = positions.len();
        let mut alphas: Vec<f64> = (0..n).map(|j| PI * j as f64 / (n - 1) as f64).collect();
        alphas[n - 1] = PI;
        VortexSheet::new(alphas, positions, weights, eps, 0.0)
    }

    /// Exact maximal function: the best disc of radius `s` is concentric.
    pub fn maximal_curve(&self, radii: &[f64]) -> MaximalCurve {
        let values = radii
            .iter()
            .map(|&s| self.strength.abs() * PI * s.min(self.radius).powi(2))
            .collect();
        MaximalCurve {
            radii: radii.to_vec(),
            values,
            time: 0.0,
            eps: 0.0,
            method: CurveMethod::LocalDisc,
        }
    }
}

impl VelocitySource for DiscVortex {
    fn velocity(&self, p: Vec2) -> Vec2 {
        let d = p - self.center;
        let r2 = d.norm_sq();
        let rr = self.radius * self.radius;
        if r2 <= rr {
            d.perp() * (0.5 * self.strength)
        } else {
            d.perp() * (0.5 * self.strength * rr / r2)
        }
    }

    fn bounding_square(&self) -> (Vec2, f64) {
        (self.center, self.radius)
    }

    fn total_circulation(&self) -> f64 {
        self.circulation()
    }

    fn blob_size(&self) -> f64 {
        0.0
    }
}
