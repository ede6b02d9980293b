//! RK4 integration of the vortex-blob system with direct pairwise velocity
//! sums, plus tracking of the conserved quantities `H^ε` and `W`.

use rayon::prelude::*;

use crate::config::SimulationConfig;
use crate::error::{Error, Result};
use crate::kernel::{INV_2PI, INV_4PI};
use crate::sheet::{discretize, VortexSheet};
use crate::vec2::Vec2;

/// Denominator floor for relative drifts.
pub const DRIFT_FLOOR: f64 = 1e-30;

/// Conserved quantities at one instant, with drifts relative to `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantRecord {
    pub time: f64,
    pub hamiltonian: f64,
    pub impulse: Vec2,
    pub rel_drift_h: f64,
    pub rel_drift_w: f64,
}

impl InvariantRecord {
    pub fn measure(sheet: &VortexSheet, reference: Option<&InvariantRecord>) -> Self {
        let hamiltonian = hamiltonian(sheet);
        let impulse = impulse(sheet);
        let (rel_drift_h, rel_drift_w) = match reference {
            Some(r) => (
                (hamiltonian - r.hamiltonian).abs() / r.hamiltonian.abs().max(DRIFT_FLOOR),
                (impulse - r.impulse).norm() / r.impulse.norm().max(DRIFT_FLOOR),
            ),
            None => (0.0, 0.0),
        };
        InvariantRecord {
            time: sheet.time(),
            hamiltonian,
            impulse,
            rel_drift_h,
            rel_drift_w,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub snapshots: Vec<VortexSheet>,
    pub invariants: Vec<InvariantRecord>,
}

/// Progress notifications emitted by [`run_with`].
#[derive(Debug)]
pub enum RunEvent<'a> {
    Snapshot(&'a VortexSheet),
    Invariants(&'a InvariantRecord),
}

/// Blob-regularized velocity of every vortex,
/// `v_k = Σ_j K_ε(z_k − z_j) w_j`.
///
/// Parallel over targets `k`; each sum runs over `j = 0..=N` in index order,
/// so the result does not depend on the thread count.
pub fn velocities(sheet: &VortexSheet) -> Vec<Vec2> {
    velocities_of(sheet.positions(), sheet.weights(), sheet.eps())
}

fn velocities_of(positions: &[Vec2], weights: &[f64], eps: f64) -> Vec<Vec2> {
    let eps2 = eps * eps;
    let xs: Vec<f64> = positions.iter().map(|p| p.x).collect();
    let ys: Vec<f64> = positions.iter().map(|p| p.y).collect();
    positions
        .par_iter()
        .with_min_len(16)
        .map(|&p| {
            let (mut ux, mut uy) = (0.0, 0.0);
            for ((&x, &y), &w) in xs.iter().zip(&ys).zip(weights) {
                let dx = p.x - x;
                let dy = p.y - y;
                let f = w / (dx * dx + dy * dy + eps2);
                ux -= dy * f;
                uy += dx * f;
            }
            Vec2::new(ux * INV_2PI, uy * INV_2PI)
        })
        .collect()
}

/// One classical fourth-order Runge-Kutta step of size `dt > 0`.
pub fn rk4_step(sheet: &VortexSheet, dt: f64) -> Result<VortexSheet> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::domain(format!(
            "rk4_step: dt must be positive, got {dt}"
        )));
    }
    advance(sheet, dt, 0)
}

/// RK4 step of signed size; `step` only labels a blow-up error.
pub(crate) fn advance(sheet: &VortexSheet, dt: f64, step: usize) -> Result<VortexSheet> {
    let z0 = sheet.positions();
    let w = sheet.weights();
    let eps = sheet.eps();
    let offset =
        |k: &[Vec2], h: f64| -> Vec<Vec2> { z0.iter().zip(k).map(|(&z, &v)| z + v * h).collect() };

    let k1 = velocities_of(z0, w, eps);
    let k2 = velocities_of(&offset(&k1, 0.5 * dt), w, eps);
    let k3 = velocities_of(&offset(&k2, 0.5 * dt), w, eps);
    let k4 = velocities_of(&offset(&k3, dt), w, eps);

    let sixth = dt / 6.0;
    let next: Vec<Vec2> = (0..z0.len())
        .map(|i| z0[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * sixth)
        .collect();
    let time = sheet.time() + dt;
    if next.iter().any(|p| !p.is_finite()) {
        return Err(Error::BlowUp { step, time });
    }
    Ok(sheet.with_state(next, time))
}

/// Regularized interaction energy
/// `H^ε = −(1/4π) Σ_{i,j} w_i w_j log(|z_i − z_j|² + ε²)`, diagonal included.
pub fn hamiltonian(sheet: &VortexSheet) -> f64 {
    let z = sheet.positions();
    let w = sheet.weights();
    let eps2 = sheet.eps() * sheet.eps();
    let log_eps2 = eps2.ln();
    let rows: Vec<f64> = (0..z.len())
        .into_par_iter()
        .with_min_len(16)
        .map(|i| {
            let zi = z[i];
            let mut acc = 0.0;
            for j in i + 1..z.len() {
                acc += w[j] * ((zi - z[j]).norm_sq() + eps2).ln();
            }
            w[i] * (w[i] * log_eps2 + 2.0 * acc)
        })
        .collect();
    -INV_4PI * rows.iter().sum::<f64>()
}

/// Linear impulse `W = Σ w_j z_j`.
pub fn impulse(sheet: &VortexSheet) -> Vec2 {
    sheet
        .positions()
        .iter()
        .zip(sheet.weights())
        .fold(Vec2::ZERO, |acc, (&z, &w)| acc + z * w)
}

/// Runs a simulation and collects every snapshot and invariant record.
pub fn run(config: &SimulationConfig) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    run_with(config, |event| {
        match event {
            RunEvent::Snapshot(s) => out.snapshots.push(s.clone()),
            RunEvent::Invariants(r) => out.invariants.push(*r),
        }
        Ok(())
    })?;
    Ok(out)
}

/// Runs a simulation, streaming snapshots and invariant records to `observer`.
///
/// Aborts with [`Error::DriftExceeded`] as soon as a recorded `H^ε` drifts
/// further than `config.drift_tol`, and with [`Error::BlowUp`] on any
/// non-finite position.
pub fn run_with<F>(config: &SimulationConfig, observer: F) -> Result<()>
where
    F: FnMut(RunEvent<'_>) -> Result<()> + Send,
{
    config.validate()?;
    if config.threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
        pool.install(|| integrate(config, observer))
    } else {
        integrate(config, observer)
    }
}

fn integrate<F>(config: &SimulationConfig, mut observer: F) -> Result<()>
where
    F: FnMut(RunEvent<'_>) -> Result<()> + Send,
{
    let n_steps = config.step_count()?;
    let snap_stride = config.snapshot_stride()?;
    let inv_stride = config.invariant_stride()?;

    let mut sheet = discretize(config.kind, config.n_nodes - 1, config.eps)?;
    let reference = InvariantRecord::measure(&sheet, None);
    observer(RunEvent::Snapshot(&sheet))?;
    observer(RunEvent::Invariants(&reference))?;

    for step in 1..=n_steps {
        sheet = advance(&sheet, config.dt, step)?;
        // pin the clock to the step count so snapshot times carry no round-off
        sheet.set_time(step as f64 * config.dt);

        let last = step == n_steps;
        let snap = step % snap_stride == 0 || last;
        if snap || step % inv_stride == 0 {
            let record = InvariantRecord::measure(&sheet, Some(&reference));
            observer(RunEvent::Invariants(&record))?;
            if record.rel_drift_h > config.drift_tol {
                return Err(Error::DriftExceeded {
                    time: record.time,
                    drift: record.rel_drift_h,
                    tolerance: config.drift_tol,
                });
            }
        }
        if snap {
            observer(RunEvent::Snapshot(&sheet))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sheet::InitialDataKind;
    use std::f64::consts::PI;

    fn pair(w: (f64, f64), a: Vec2, b: Vec2, eps: f64) -> VortexSheet {
        VortexSheet::new(vec![0.0, PI], vec![a, b], vec![w.0, w.1], eps, 0.0).unwrap()
    }

    /// Independent reference: direct double loop through the public kernel.
    fn velocities_oracle(sheet: &VortexSheet) -> Vec<Vec2> {
        let z = sheet.positions();
        (0..z.len())
            .map(|k| {
                let mut v = Vec2::ZERO;
                for j in 0..z.len() {
                    v += crate::kernel::kernel_reg(z[k] - z[j], sheet.eps()).unwrap()
                        * sheet.weights()[j];
                }
                v
            })
            .collect()
    }

    #[test]
    fn pair_velocities() {
        let s = pair((1.0, 1.0), Vec2::new(-0.5, 0.0), Vec2::new(0.5, 0.0), 0.1);
        let v = velocities(&s);
        let expected = 1.0 / (2.0 * PI * 1.01);
        assert_eq!(v[0].x, 0.0);
        assert!((v[0].y + expected).abs() < 1e-15);
        assert!((v[1].y - expected).abs() < 1e-15);
    }

    #[test]
    fn single_vortex_is_still() {
        let s = VortexSheet::new(
            vec![0.0, PI],
            vec![Vec2::new(0.3, 0.2); 2],
            vec![0.7, 0.0],
            0.05,
            0.0,
        )
        .unwrap();
        for v in velocities(&s) {
            assert_eq!(v, Vec2::ZERO);
        }
        let next = rk4_step(&s, 0.01).unwrap();
        assert_eq!(next.positions(), s.positions());
        assert!((next.time() - 0.01).abs() < 1e-18);
    }

    #[test]
    fn matches_kernel_double_loop() {
        let mut s = discretize(InitialDataKind::FuselageFlap, 60, 0.05).unwrap();
        for _ in 0..5 {
            s = rk4_step(&s, 0.02).unwrap();
        }
        let fast = velocities(&s);
        let slow = velocities_oracle(&s);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((*a - *b).norm() <= 1e-13 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn weighted_velocity_sum_vanishes() {
        let mut s = discretize(InitialDataKind::LoadedWing, 400, 0.1).unwrap();
        for _ in 0..3 {
            s = rk4_step(&s, 0.05).unwrap();
        }
        let v = velocities(&s);
        let sum = v
            .iter()
            .zip(s.weights())
            .fold(Vec2::ZERO, |a, (&v, &w)| a + v * w);
        let vmax = v.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(sum.norm() <= 1e-12 * s.total_variation() * vmax, "{sum:?}");
    }

    #[test]
    fn corotating_pair_rotates_rigidly() {
        let (eps, d, dt) = (0.1, 1.0, 0.005);
        let mut s = pair(
            (1.0, 1.0),
            Vec2::new(-0.5 * d, 0.0),
            Vec2::new(0.5 * d, 0.0),
            eps,
        );
        // each vortex circles the midpoint at radius d/2 with speed d/(2π(d²+ε²))
        let omega = 1.0 / (PI * (d * d + eps * eps));
        for step in 1..=200 {
            s = rk4_step(&s, dt).unwrap();
            let sep = (s.positions()[0] - s.positions()[1]).norm();
            assert!((sep - d).abs() <= 1e-10 * step as f64);
        }
        let theta = omega * s.time();
        let exact = Vec2::new(0.5 * d * theta.cos(), 0.5 * d * theta.sin());
        assert!((s.positions()[1] - exact).norm() < 1e-10);
    }

    #[test]
    fn rk4_reversibility() {
        let s = discretize(InitialDataKind::LoadedWing, 50, 0.2).unwrap();
        let dt = 0.005;
        let fwd = advance(&s, dt, 0).unwrap();
        let back = advance(&fwd, -dt, 0).unwrap();
        let err = s
            .positions()
            .iter()
            .zip(back.positions())
            .map(|(a, b)| (*a - *b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn rk4_rejects_nonpositive_dt() {
        let s = discretize(InitialDataKind::LoadedWing, 8, 0.1).unwrap();
        assert!(rk4_step(&s, 0.0).is_err());
        assert!(rk4_step(&s, -0.1).is_err());
    }

    #[test]
    fn hamiltonian_examples() {
        let one = VortexSheet::new(
            vec![0.0, PI],
            vec![Vec2::ZERO, Vec2::ZERO],
            vec![1.0, 0.0],
            0.1,
            0.0,
        )
        .unwrap();
        let expected = -(0.01f64).ln() / (4.0 * PI);
        assert!((hamiltonian(&one) - expected).abs() < 1e-15);
        assert!((expected - 0.366_467_799_439_713_86).abs() < 1e-12);

        let two = pair((1.0, 1.0), Vec2::new(-0.5, 0.0), Vec2::new(0.5, 0.0), 0.1);
        let expected = -(2.0 * 0.01f64.ln() + 2.0 * 1.01f64.ln()) / (4.0 * PI);
        assert!((hamiltonian(&two) - expected).abs() < 1e-14);
    }

    #[test]
    fn hamiltonian_is_quadratic_in_weights() {
        let s = discretize(InitialDataKind::FuselageFlap, 30, 0.1).unwrap();
        let doubled: Vec<f64> = s.weights().iter().map(|w| 2.0 * w).collect();
        let s2 = VortexSheet::new(
            s.alphas().to_vec(),
            s.positions().to_vec(),
            doubled,
            0.1,
            0.0,
        )
        .unwrap();
        assert_eq!(hamiltonian(&s2), 4.0 * hamiltonian(&s));
    }

    #[test]
    fn impulse_examples() {
        let s = pair((2.0, 0.0), Vec2::new(1.0, 3.0), Vec2::new(5.0, 5.0), 0.1);
        assert_eq!(impulse(&s), Vec2::new(2.0, 6.0));
        let s = pair((1.0, -1.0), Vec2::new(-0.5, 0.0), Vec2::new(0.5, 0.0), 0.1);
        assert_eq!(impulse(&s), Vec2::new(-1.0, 0.0));
        // w_j·x_j = −cos²(α_j)·π/N: the trapezoid sum of cos² is exact, Wx = −π/2
        let lw = discretize(InitialDataKind::LoadedWing, 1000, 0.1).unwrap();
        let w = impulse(&lw);
        assert!((w.x + PI / 2.0).abs() < 1e-13);
        assert_eq!(w.y, 0.0);
    }

    #[test]
    fn run_zero_length() {
        let c = SimulationConfig::new(InitialDataKind::LoadedWing, 21, 0.1, 0.0);
        let out = run(&c).unwrap();
        assert_eq!(out.snapshots.len(), 1);
        assert_eq!(out.snapshots[0].time(), 0.0);
        assert_eq!(out.invariants.len(), 1);
    }

    #[test]
    fn run_cadence_and_determinism() {
        let mut c = SimulationConfig::new(InitialDataKind::LoadedWing, 101, 0.1, 0.3);
        c.invariant_every = Some(0.05);
        let a = run(&c).unwrap();
        let times: Vec<f64> = a.snapshots.iter().map(|s| s.time()).collect();
        assert_eq!(times.len(), 4);
        assert!(times.windows(2).all(|w| w[0] < w[1]));
        assert!((times[3] - 0.3).abs() < 1e-15);
        assert_eq!(a.invariants.len(), 7);
        let b = run(&c).unwrap();
        assert_eq!(a.snapshots, b.snapshots);
    }

    #[test]
    fn run_preserves_mirror_symmetry() {
        let c = SimulationConfig::new(InitialDataKind::LoadedWing, 201, 0.1, 0.5);
        let out = run(&c).unwrap();
        for s in &out.snapshots {
            let z = s.positions();
            let n = s.intervals();
            for j in 0..=n {
                assert!((z[j].x + z[n - j].x).abs() <= 1e-9);
                assert!((z[j].y - z[n - j].y).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn run_reports_drift_violation() {
        // a huge step wrecks energy conservation
        let mut c = SimulationConfig::new(InitialDataKind::LoadedWing, 101, 0.01, 1.0);
        c.dt = 0.25;
        c.snapshot_every = 0.25;
        c.drift_tol = 1e-12;
        assert!(matches!(run(&c), Err(Error::DriftExceeded { .. })));
    }

    #[test]
    fn blow_up_is_detected() {
        let s = pair(
            (1e308, 1e308),
            Vec2::new(0.0, 0.0),
            Vec2::new(1e-3, 0.0),
            1e-3,
        );
        assert!(matches!(
            advance(&s, 1.0, 7),
            Err(Error::BlowUp { step: 7, .. })
        ));
    }

    #[test]
    fn velocities_independent_of_thread_count() {
        let mut s = discretize(InitialDataKind::FuselageFlap, 500, 0.05).unwrap();
        s = rk4_step(&s, 0.1).unwrap();
        let in_pool = |n| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .unwrap()
                .install(|| velocities(&s))
        };
        let one = in_pool(1);
        assert_eq!(one, in_pool(3));
        assert_eq!(one, in_pool(8));
    }
}
