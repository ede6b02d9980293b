//! Self-checks behind `vortex-blob verify`: kernel symmetries, closed-form
//! values of `Σ`, and the two averaging identities checked by quadrature.

use std::f64::consts::{E, PI};
use std::fmt;

use crate::kernel::{kernel, kernel_reg, sigma};
use crate::structure::{verify_log_ring_average, verify_sigma_average};
use crate::vec2::Vec2;

/// Absolute tolerance for the quadrature identities.
pub const QUADRATURE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub ring_n_quad: usize,
    pub sigma_n_quad: usize,
    /// Prefactor of `Σ` used for the closed forms. Anything other than
    /// `1/(4π)` is a deliberate corruption that the checks must catch.
    pub sigma_constant: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            ring_n_quad: 4096,
            sigma_n_quad: 2048,
            sigma_constant: 0.25 / PI,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn tolerance(name: String, numeric: f64, analytic: f64, tol: f64) -> Self {
        let err = (numeric - analytic).abs();
        Check {
            name,
            passed: err <= tol,
            detail: format!(
                "numeric {numeric:.12e}, exact {analytic:.12e}, err {err:.2e} (tol {tol:.0e})"
            ),
        }
    }

    fn failed(name: String, detail: String) -> Self {
        Check {
            name,
            passed: false,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        for c in &self.checks {
            let mark = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{mark}  {:width$}  {}", c.name, c.detail)?;
        }
        let failed = self.failures().count();
        write!(f, "{} checks, {failed} failed", self.checks.len())
    }
}

pub fn run_checks(opts: &VerifyOptions) -> VerifyReport {
    let mut checks = Vec::new();
    kernel_checks(&mut checks);

    let scale = opts.sigma_constant * 4.0 * PI;
    let tampered = |rho: f64| sigma(rho).map(|s| s * scale);
    for (label, rho, exact) in [
        ("1", 1.0, 0.0),
        ("2", 2.0, 0.0),
        ("e^-1/2", (-0.5f64).exp(), 1.0 / (4.0 * PI * E)),
        ("1/2", 0.5, (4f64.ln() - 0.75) / (4.0 * PI)),
    ] {
        let name = format!("sigma({label}) closed form");
        checks.push(match tampered(rho) {
            Ok(v) => Check::tolerance(name, v, exact, 1e-15),
            Err(e) => Check::failed(name, e.to_string()),
        });
    }

    for s in [0.5, 2.0, 3.0] {
        let name = format!("log ring average s={s}");
        checks.push(match verify_log_ring_average(s, opts.ring_n_quad) {
            Ok(c) => Check::tolerance(name, c.numeric, c.analytic, QUADRATURE_TOL),
            Err(e) => Check::failed(name, e.to_string()),
        });
    }
    for rho in [0.5, 1.0, 2.0] {
        let name = format!("sigma disc average rho={rho}");
        let checked = verify_sigma_average(rho, 1.0, opts.sigma_n_quad)
            .and_then(|c| Ok((c.numeric, 2.0 * PI * tampered(rho)?)));
        checks.push(match checked {
            Ok((numeric, analytic)) => Check::tolerance(name, numeric, analytic, QUADRATURE_TOL),
            Err(e) => Check::failed(name, e.to_string()),
        });
    }
    VerifyReport { checks }
}

fn kernel_checks(checks: &mut Vec<Check>) {
    let samples = [
        Vec2::new(0.3, -0.7),
        Vec2::new(-2.0, 5.0),
        Vec2::new(1e-6, 3e-7),
        Vec2::new(40.0, 0.25),
    ];
    let variants: [&dyn Fn(Vec2) -> crate::error::Result<Vec2>; 2] =
        [&kernel, &|z| kernel_reg(z, 0.1)];
    let mut odd = true;
    let mut orth = 0.0f64;
    for f in variants {
        for &z in &samples {
            match (f(z), f(-z)) {
                (Ok(a), Ok(b)) => {
                    odd &= b == -a;
                    orth = orth.max(a.dot(z).abs() / (z.norm() * a.norm()));
                }
                _ => odd = false,
            }
        }
    }
    checks.push(Check {
        name: "kernel oddness".into(),
        passed: odd,
        detail: if odd {
            "K(-z) = -K(z) bitwise".into()
        } else {
            "asymmetric sample".into()
        },
    });
    checks.push(Check {
        name: "kernel orthogonality".into(),
        passed: orth <= 1e-15,
        detail: format!("max |K(z).z| / (|z||K(z)|) = {orth:.2e}"),
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_checks_pass() {
        let report = run_checks(&VerifyOptions::default());
        assert!(report.all_passed(), "{report}");
        assert!(report.to_string().ends_with("0 failed"));
    }

    #[test]
    fn tampered_constant_is_caught() {
        let opts = VerifyOptions {
            sigma_constant: 0.25 / PI * 1.001,
            ..Default::default()
        };
        let report = run_checks(&opts);
        let failed: Vec<_> = report.failures().map(|c| c.name.as_str()).collect();
        assert!(failed.contains(&"sigma(1/2) closed form"), "{failed:?}");
        assert!(failed.contains(&"sigma disc average rho=0.5"), "{failed:?}");
    }

    #[test]
    fn coarse_quadrature_is_caught() {
        let opts = VerifyOptions {
            sigma_n_quad: 8,
            ring_n_quad: 16,
            ..Default::default()
        };
        let report = run_checks(&opts);
        let failed: Vec<_> = report.failures().map(|c| c.name.clone()).collect();
        assert!(
            failed.iter().any(|n| n.starts_with("log ring average")),
            "{failed:?}"
        );
        assert!(
            failed.iter().any(|n| n.starts_with("sigma disc average")),
            "{failed:?}"
        );
    }
}
