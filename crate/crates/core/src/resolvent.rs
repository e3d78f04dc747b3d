//! Solving the resolvent equation `w + λ p(w) w = z` on the unit disk.
//!
//! The solver runs the fixed-point map `w ↦ z / (1 + λ p(w))`, which sends the
//! disk into the closed disk of radius `|z|` because `|1 + λp| ≥ 1 + λa ≥ 1`,
//! and switches to Newton on `F(w) = w + λ p(w) w − z` once the residual is
//! small. A Newton step that leaves the radius-`|z|` disk or whose derivative
//! is tiny is replaced by a fixed-point step.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::herglotz::GeneratorSpec;

/// Smallest accepted residual tolerance.
pub const MIN_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Relaxation of the fixed-point step, in `(0, 1]`.
    pub damping: f64,
    /// Residual below which Newton polishing starts.
    pub newton_switch: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 10_000,
            damping: 1.0,
            newton_switch: 1e-2,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolventSolution {
    /// `G_λ(z)`.
    pub w: Complex64,
    /// Multiplier `g_λ(z) = 1 / (1 + λ p(w))`, so that `w = g z`.
    pub g: Complex64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::domain(format!("λ must be finite and > 0, got {lambda}")));
    }
    Ok(())
}

pub fn solve_resolvent(
    spec: &GeneratorSpec,
    lambda: f64,
    z: Complex64,
    opts: &SolverOptions,
) -> Result<ResolventSolution> {
    check_lambda(lambda)?;
    if !(z.norm() < 1.0) {
        return Err(Error::domain(format!("|z| = {} is not inside the unit disk", z.norm())));
    }
    if !(opts.tol >= MIN_TOL) {
        return Err(Error::domain(format!("tolerance must be >= {MIN_TOL:e}, got {}", opts.tol)));
    }
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(Error::domain(format!("damping must lie in (0, 1], got {}", opts.damping)));
    }

    let radius = z.norm();
    if radius == 0.0 {
        let q = spec.q();
        return Ok(ResolventSolution {
            w: z,
            g: (1.0 + lambda * q).inv(),
            residual: 0.0,
            iterations: 0,
            converged: true,
        });
    }

    let cap = radius + 1e-12;
    // Linearization at the origin, already inside |w| <= |z|.
    let mut w = z / (1.0 + lambda * spec.q());
    let mut residual = f64::INFINITY;
    for iteration in 0..=opts.max_iter {
        let (p, dp) = spec.eval_with_derivative(w)?;
        let multiplier = 1.0 + lambda * p;
        let f = w * multiplier - z;
        residual = f.norm();
        if residual <= opts.tol {
            return Ok(ResolventSolution {
                w,
                g: multiplier.inv(),
                residual,
                iterations: iteration,
                converged: true,
            });
        }
        if iteration == opts.max_iter {
            break;
        }

        if residual < opts.newton_switch {
            let df = multiplier + lambda * dp * w;
            if df.norm() >= 1e-10 {
                let candidate = w - f / df;
                if candidate.norm() <= cap {
                    w = candidate;
                    continue;
                }
            }
        }
        let image = z / multiplier;
        w = w + opts.damping * (image - w);
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        residual,
        last: w,
    })
}

/// Resolvent of the slice `z ↦ p(u z) z` for a unimodular `direction_factor`
/// `u`; equals the resolvent of the rotated spec.
pub fn solve_slice(
    spec: &GeneratorSpec,
    lambda: f64,
    direction_factor: Complex64,
    z: Complex64,
    opts: &SolverOptions,
) -> Result<ResolventSolution> {
    if !((direction_factor.norm() - 1.0).abs() <= 1e-12) {
        return Err(Error::domain(format!(
            "direction factor must be unimodular, got |u| = {}",
            direction_factor.norm()
        )));
    }
    if direction_factor == Complex64::new(1.0, 0.0) {
        return solve_resolvent(spec, lambda, z, opts);
    }
    solve_resolvent(&spec.rotated(direction_factor.arg()), lambda, z, opts)
}

/// `G_λ ∘ … ∘ G_λ (z)`, `n` times.
pub fn iterate_resolvent(
    spec: &GeneratorSpec,
    lambda: f64,
    z: Complex64,
    n: usize,
    opts: &SolverOptions,
) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::domain("iteration count must be >= 1"));
    }
    let mut w = z;
    for _ in 0..n {
        w = solve_resolvent(spec, lambda, w, opts)?.w;
    }
    Ok(w)
}
