//! The semigroup generated by `f(z) = p(z) z`: solutions of
//! `du/dt + p(u) u = 0`, `u(0) = z₀`, and their relation to iterated
//! resolvents.

use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bounds::golden_min;
use crate::error::{Error, Result};
use crate::herglotz::GeneratorSpec;
use crate::resolvent::{iterate_resolvent, solve_resolvent, SolverOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub z0: Complex64,
    pub times: Vec<f64>,
    pub points: Vec<Complex64>,
    /// Generator the flow belongs to, when it is one of ours.
    pub spec: Option<GeneratorSpec>,
}

impl Trajectory {
    pub fn last(&self) -> (f64, Complex64) {
        (*self.times.last().unwrap(), *self.points.last().unwrap())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// CSV with header `t,re_u,im_u,abs_u,envelope`, envelope `e^{−at}|z₀|`.
    pub fn write_csv<W: Write>(&self, mut out: W, a: f64) -> std::io::Result<()> {
        writeln!(out, "t,re_u,im_u,abs_u,envelope")?;
        let r0 = self.z0.norm();
        for (&t, &u) in self.times.iter().zip(&self.points) {
            writeln!(out, "{},{},{},{},{}", t, u.re, u.im, u.norm(), (-a * t).exp() * r0)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self::with_tol(1e-9)
    }
}

impl IntegratorOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol * 1e-3,
            h_min: 1e-12,
            max_steps: 1_000_000,
        }
    }
}

// Dormand–Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates the autonomous ODE `du/dt = rhs(u)` from `u(0) = z0` to
/// `t_end` with an adaptive Dormand–Prince 5(4) pair.
///
/// A stage that fails to evaluate (for instance a trial point outside the
/// disk) rejects the step. When the step size drops below `h_min` the
/// trajectory computed so far is returned inside [`Error::Integration`].
pub fn integrate_with<F>(mut rhs: F, z0: Complex64, t_end: f64, opts: &IntegratorOptions) -> Result<Trajectory>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::domain(format!("t_end must be finite and >= 0, got {t_end}")));
    }
    if !(opts.rtol > 0.0 && opts.atol >= 0.0) {
        return Err(Error::domain("integrator tolerances must be positive"));
    }
    let mut traj = Trajectory {
        z0,
        times: vec![0.0],
        points: vec![z0],
        spec: None,
    };
    if t_end == 0.0 {
        return Ok(traj);
    }

    let mut t = 0.0;
    let mut y = z0;
    let mut k0 = rhs(y)?;
    let scale0 = opts.atol + opts.rtol * y.norm();
    let mut h = if k0.norm() > 0.0 {
        (0.01 * scale0 / (opts.rtol * k0.norm()).max(1e-300)).min(0.1) * opts.rtol.powf(0.2).max(1e-3)
    } else {
        t_end
    };
    h = h.clamp(opts.h_min.max(1e-6 * t_end).min(t_end), t_end);

    let mut steps = 0usize;
    while t < t_end {
        if steps >= opts.max_steps {
            return Err(Error::Integration {
                t,
                reason: format!("step budget of {} exhausted", opts.max_steps),
                partial: Box::new(traj),
            });
        }
        steps += 1;
        if t + h > t_end {
            h = t_end - t;
        }

        let mut k = [Complex64::new(0.0, 0.0); 7];
        k[0] = k0;
        let mut failed = false;
        for s in 1..7 {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, kj) in k.iter().enumerate().take(s) {
                acc += A[s][j] * kj;
            }
            match rhs(y + h * acc) {
                Ok(v) => k[s] = v,
                Err(_) => {
                    failed = true;
                    break;
                }
            }
        }

        let accepted_error = if failed {
            None
        } else {
            let mut y5 = y;
            let mut y4 = y;
            for s in 0..7 {
                y5 += h * B5[s] * k[s];
                y4 += h * B4[s] * k[s];
            }
            let sc = opts.atol + opts.rtol * y.norm().max(y5.norm());
            let err = (y5 - y4).norm() / sc;
            if err.is_finite() {
                Some((err, y5))
            } else {
                None
            }
        };

        match accepted_error {
            Some((err, y5)) if err <= 1.0 => {
                t = if t_end - (t + h) < 1e-14 * t_end { t_end } else { t + h };
                y = y5;
                k0 = k[6];
                traj.times.push(t);
                traj.points.push(y);
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                h *= factor;
            }
            Some((err, _)) => {
                h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            }
            None => h *= 0.25,
        }
        if t < t_end && h < opts.h_min {
            return Err(Error::Integration {
                t,
                reason: format!("step size {h:e} fell below the floor {:e}", opts.h_min),
                partial: Box::new(traj),
            });
        }
    }
    Ok(traj)
}

/// Flow of `du/dt = −p(u) u` up to `t_end` with relative tolerance `tol`.
pub fn integrate(spec: &GeneratorSpec, z0: Complex64, t_end: f64, tol: f64) -> Result<Trajectory> {
    if !(z0.norm() < 1.0) {
        return Err(Error::domain(format!("|z0| = {} is not inside the unit disk", z0.norm())));
    }
    let opts = IntegratorOptions::with_tol(tol);
    let mut traj = match integrate_with(|u| spec.eval_f(u).map(|f| -f), z0, t_end, &opts) {
        Ok(traj) => traj,
        Err(Error::Integration { t, reason, mut partial }) => {
            partial.spec = Some(spec.clone());
            return Err(Error::Integration { t, reason, partial });
        }
        Err(e) => return Err(e),
    };
    traj.spec = Some(spec.clone());
    Ok(traj)
}

/// Flow of the composed generator `f ∘ G_λ`, i.e. `du/dt = −(u − G_λ(u))/λ`.
pub fn integrate_composed(
    spec: &GeneratorSpec,
    lambda: f64,
    z0: Complex64,
    t_end: f64,
    tol: f64,
) -> Result<Trajectory> {
    if !(z0.norm() < 1.0) {
        return Err(Error::domain(format!("|z0| = {} is not inside the unit disk", z0.norm())));
    }
    let solver = SolverOptions::default();
    let rhs = |u: Complex64| {
        let w = solve_resolvent(spec, lambda, u, &solver)?.w;
        Ok(-(u - w) / lambda)
    };
    integrate_with(rhs, z0, t_end, &IntegratorOptions::with_tol(tol))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezeCheck {
    pub ok: bool,
    /// `min_k (e^{−a t_k}|z₀| − |u(t_k)|)`.
    pub worst_margin: f64,
}

pub const SQUEEZE_TOL: f64 = 1e-8;

/// Checks `|u(t)| ≤ e^{−at}|z₀|` along the trajectory.
pub fn squeeze_check(trajectory: &Trajectory, a: f64) -> SqueezeCheck {
    let r0 = trajectory.z0.norm();
    let worst_margin = trajectory
        .times
        .iter()
        .zip(&trajectory.points)
        .map(|(&t, u)| (-a * t).exp() * r0 - u.norm())
        .fold(f64::INFINITY, f64::min);
    SqueezeCheck {
        ok: worst_margin >= -SQUEEZE_TOL,
        worst_margin,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductFormulaPoint {
    pub n: usize,
    pub iterated: Complex64,
    pub integrated: Complex64,
    pub gap: f64,
}

/// Tolerance used for the reference flow in product-formula comparisons.
pub const PRODUCT_FORMULA_ODE_TOL: f64 = 1e-11;

/// `G_{t/n}^{∘n}(z₀)` against the integrated flow `u(t, z₀)`.
pub fn product_formula(spec: &GeneratorSpec, z0: Complex64, t: f64, n: usize) -> Result<ProductFormulaPoint> {
    let integrated = integrate(spec, z0, t, PRODUCT_FORMULA_ODE_TOL)?.last().1;
    product_formula_against(spec, z0, t, n, integrated)
}

fn product_formula_against(
    spec: &GeneratorSpec,
    z0: Complex64,
    t: f64,
    n: usize,
    integrated: Complex64,
) -> Result<ProductFormulaPoint> {
    if n == 0 {
        return Err(Error::domain("n must be >= 1"));
    }
    let iterated = if t == 0.0 {
        z0
    } else {
        iterate_resolvent(spec, t / n as f64, z0, n, &SolverOptions::default())?
    };
    Ok(ProductFormulaPoint {
        n,
        iterated,
        integrated,
        gap: (iterated - integrated).norm(),
    })
}

/// Product-formula gaps over a ladder of `n`, sharing one reference flow.
pub fn product_formula_ladder(
    spec: &GeneratorSpec,
    z0: Complex64,
    t: f64,
    ns: &[usize],
) -> Result<Vec<ProductFormulaPoint>> {
    let integrated = integrate(spec, z0, t, PRODUCT_FORMULA_ODE_TOL)?.last().1;
    ns.iter()
        .map(|&n| product_formula_against(spec, z0, t, n, integrated))
        .collect()
}

pub const DEFAULT_N_LADDER: [usize; 5] = [8, 16, 32, 64, 128];

/// Least-squares slope of `log₂ gap` against `log₂ n`; about `−1` for a
/// first-order scheme.
pub fn convergence_slope(points: &[ProductFormulaPoint]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| (p.n as f64).log2()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.gap.log2()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// `min_{|z| = r} Re p(z)`: approximates the accretivity constant of `f`
/// on the circle of radius `r`, and tends to `a` as `r → 1`.
pub fn estimate_accretivity_floor(spec: &GeneratorSpec, r: f64) -> Result<f64> {
    if !(0.0..=0.999).contains(&r) {
        return Err(Error::domain(format!("r must lie in [0, 0.999], got {r}")));
    }
    if r == 0.0 {
        return Ok(spec.q().re);
    }
    let re_p = |theta: f64| {
        spec.eval_p(Complex64::from_polar(r, theta))
            .map(|p| p.re)
            .unwrap_or(f64::INFINITY)
    };
    let n = 4096;
    let step = TAU / n as f64;
    let (best_k, best) = (0..n)
        .map(|k| (k, re_p(k as f64 * step)))
        .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    let centre = best_k as f64 * step;
    let (_, refined) = golden_min(re_p, centre - step, centre + step, 1e-13);
    Ok(best.min(refined))
}
