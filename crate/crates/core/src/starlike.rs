//! The starlikeness functional `Q(z) = h(z) / (z h′(z))` of the resolvent
//! `h = G_λ`, and sample-based estimates of its order of starlikeness.
//!
//! For `w = G_λ(z)`, differentiating `w (1 + λ p(w)) = z` gives
//! `Q = 1 + λ p′(w) w / (1 + λ p(w))`. [`starlike_functional_fd`] computes
//! the same quantity from the solver alone by central differences.
//!
//! `Q − 1`, `Re(1/Q)` and `arg Q` are holomorphic or harmonic in `z`, so
//! their extremes over `|z| ≤ r` are attained on `|z| = r`; the empirical
//! estimates only sample that circle.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bounds::{distortion, rho_star, t_function_extended};
use crate::error::{Error, Result};
use crate::herglotz::GeneratorSpec;
use crate::resolvent::{solve_resolvent, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarlikeSample {
    pub z: Complex64,
    /// `G_λ(z)`.
    pub w: Complex64,
    #[serde(rename = "Q")]
    pub functional: Complex64,
    /// `|Q − 1|`.
    pub deviation: f64,
    pub arg_q: f64,
}

impl StarlikeSample {
    fn new(z: Complex64, w: Complex64, functional: Complex64) -> Self {
        Self {
            z,
            w,
            functional,
            deviation: (functional - 1.0).norm(),
            arg_q: functional.arg(),
        }
    }

    /// Largest `γ` with `|Q − 1/(2γ)| ≤ 1/(2γ)`, i.e. `Re(1/Q)`.
    pub fn pointwise_order(&self) -> f64 {
        self.functional.inv().re
    }
}

fn check_inputs(lambda: f64, z: Complex64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::domain(format!("λ must be finite and > 0, got {lambda}")));
    }
    if !(z.norm() < 1.0) {
        return Err(Error::domain(format!("|z| = {} is not inside the unit disk", z.norm())));
    }
    Ok(())
}

/// `Q(z)`; at `z = 0` the functional is `1` by continuity.
pub fn starlike_functional(
    spec: &GeneratorSpec,
    lambda: f64,
    z: Complex64,
    opts: &SolverOptions,
) -> Result<StarlikeSample> {
    check_inputs(lambda, z)?;
    if z == Complex64::new(0.0, 0.0) {
        return Ok(StarlikeSample::new(z, z, Complex64::new(1.0, 0.0)));
    }
    let w = solve_resolvent(spec, lambda, z, opts)?.w;
    Ok(StarlikeSample::new(z, w, functional_at(spec, lambda, w)?))
}

/// `1 + λ p′(w) w / (1 + λ p(w))` for an already solved `w`.
pub fn functional_at(spec: &GeneratorSpec, lambda: f64, w: Complex64) -> Result<Complex64> {
    let (p, dp) = spec.eval_with_derivative(w)?;
    Ok(1.0 + lambda * dp * w / (1.0 + lambda * p))
}

/// `h / (z h′)` with `h′` from a central difference of the solver output.
pub fn starlike_functional_fd(
    spec: &GeneratorSpec,
    lambda: f64,
    z: Complex64,
    step: f64,
    opts: &SolverOptions,
) -> Result<Complex64> {
    check_inputs(lambda, z)?;
    if z == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let h = |x: Complex64| solve_resolvent(spec, lambda, x, opts).map(|s| s.w);
    // step along the radial direction keeps both nodes inside the disk
    let dir = z / z.norm();
    let delta = dir * step;
    let derivative = (h(z + delta)? - h(z - delta)?) / (2.0 * delta);
    Ok(h(z)? / (z * derivative))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalOrder {
    /// `min Re(1/Q)` over the samples, clamped to `[0, 1]`; an estimate of the
    /// order of starlikeness from above.
    pub order_lb: f64,
    /// `(2/π) max |arg Q|`; an estimate of the order of strong starlikeness
    /// from below.
    pub strong_order_lb: f64,
    pub max_deviation: f64,
    /// Largest sampled `|G_λ(z)|`.
    pub max_image_modulus: f64,
    pub samples: usize,
    pub r_max: f64,
    pub sample_based: bool,
}

/// Samples `n_samples` equally spaced points on `|z| = r_max`.
pub fn sample_circle(
    spec: &GeneratorSpec,
    lambda: f64,
    n_samples: usize,
    r_max: f64,
    opts: &SolverOptions,
) -> Result<Vec<StarlikeSample>> {
    if !(r_max > 0.0 && r_max <= 0.999) {
        return Err(Error::domain(format!("r_max must lie in (0, 0.999], got {r_max}")));
    }
    if n_samples == 0 {
        return Err(Error::domain("need at least one sample"));
    }
    (0..n_samples)
        .map(|k| {
            let z = Complex64::from_polar(r_max, TAU * k as f64 / n_samples as f64);
            starlike_functional(spec, lambda, z, opts)
        })
        .collect()
}

pub fn empirical_order(
    spec: &GeneratorSpec,
    lambda: f64,
    n_samples: usize,
    r_max: f64,
    opts: &SolverOptions,
) -> Result<EmpiricalOrder> {
    let samples = sample_circle(spec, lambda, n_samples, r_max, opts)?;
    Ok(summarize(&samples, r_max))
}

fn summarize(samples: &[StarlikeSample], r_max: f64) -> EmpiricalOrder {
    let mut order = f64::INFINITY;
    let mut max_arg: f64 = 0.0;
    let mut max_dev: f64 = 0.0;
    let mut max_w: f64 = 0.0;
    for s in samples {
        order = order.min(s.pointwise_order());
        max_arg = max_arg.max(s.arg_q.abs());
        max_dev = max_dev.max(s.deviation);
        max_w = max_w.max(s.w.norm());
    }
    EmpiricalOrder {
        order_lb: order.clamp(0.0, 1.0),
        strong_order_lb: (2.0 * max_arg / PI).min(1.0),
        max_deviation: max_dev,
        max_image_modulus: max_w,
        samples: samples.len(),
        r_max,
        sample_based: true,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RhoMode {
    /// `ρ` from the closed-form distortion bound.
    #[default]
    Analytic,
    /// The smaller of the distortion bound and the largest sampled `|G_λ(z)|`.
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremComparison {
    pub rho_used: f64,
    pub rho_star: f64,
    /// `T(ρ_used)`; infinite when `ρ_used = 1`.
    pub t_bound: f64,
    pub max_deviation: f64,
    /// `T(ρ_used) − max |Q − 1|`.
    pub slack: f64,
    pub within_rho_star: bool,
    pub violated: bool,
    pub empirical: EmpiricalOrder,
}

/// Compares the sampled deviation `|Q − 1|` on `|z| = r_max` against the
/// disk `|Q − 1| ≤ T(ρ)` guaranteed when `|G_λ| ≤ ρ`.
pub fn theorem_vs_empirical(
    spec: &GeneratorSpec,
    lambda: f64,
    n_samples: usize,
    r_max: f64,
    mode: RhoMode,
    opts: &SolverOptions,
) -> Result<TheoremComparison> {
    let q = spec.q();
    let a = spec.a();
    let samples = sample_circle(spec, lambda, n_samples, r_max, opts)?;
    let empirical = summarize(&samples, r_max);
    let analytic = distortion(q, a, lambda)?;
    let rho_used = match mode {
        RhoMode::Analytic => analytic,
        // by maximum modulus, sup over |z| ≤ r_max of |G| sits on the sampled circle
        RhoMode::Sampled => analytic.min(empirical.max_image_modulus),
    };
    let alpha = lambda * (q.re - a);
    let t_bound = t_function_extended(alpha, lambda * a, rho_used)?;
    let rho_star = rho_star(q, a, lambda)?;
    let slack = t_bound - empirical.max_deviation;
    Ok(TheoremComparison {
        rho_used,
        rho_star,
        t_bound,
        max_deviation: empirical.max_deviation,
        slack,
        within_rho_star: rho_used <= rho_star,
        violated: slack < -1e-9,
        empirical,
    })
}
