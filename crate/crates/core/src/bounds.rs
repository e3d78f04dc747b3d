//! Closed-form bounds for the resolvent family of a generator with `p(0) = q`
//! and `Re p ≥ a`.
//!
//! Everything here depends only on the triple `(q, a, λ)`; no generator is
//! evaluated. Formulas are written out directly in double precision.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::herglotz::{check_radius, Disk};

/// Denominators of `φ` at or below this are reported as degenerate.
pub const PHI_DENOMINATOR_GUARD: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSet {
    pub q: Complex64,
    pub a: f64,
    pub lambda: f64,
    #[serde(rename = "A")]
    pub big_a: f64,
    #[serde(rename = "B")]
    pub big_b: f64,
    /// `√(2/(A+√B))`: `|G_λ(z)| ≤ distortion · |z|`.
    pub distortion: f64,
    pub a_lambda: f64,
    /// `None` when `φ` has a vanishing denominator (only for `q = 0`).
    pub d_lambda: Option<f64>,
    pub rho_star: f64,
    pub alpha: f64,
    pub beta: f64,
}

fn check_params(q: Complex64, a: f64, lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::domain(format!("λ must be finite and > 0, got {lambda}")));
    }
    if !(a.is_finite() && a >= 0.0) {
        return Err(Error::domain(format!("a must be finite and >= 0, got {a}")));
    }
    if !(q.re.is_finite() && q.im.is_finite()) {
        return Err(Error::domain(format!("q must be finite, got {q}")));
    }
    if q.re < a {
        return Err(Error::domain(format!("Re q = {} is below the floor a = {a}", q.re)));
    }
    Ok(())
}

/// `(A, B)` with `A = |1−λq|² + 4λa + 1`, `B = (|1−λq|² − 1)² + 8λ³a|q|²`.
pub fn ab_terms(q: Complex64, a: f64, lambda: f64) -> (f64, f64) {
    let m = (1.0 - lambda * q).norm_sqr();
    let big_a = m + 4.0 * lambda * a + 1.0;
    let big_b = (m - 1.0).powi(2) + 8.0 * lambda.powi(3) * a * q.norm_sqr();
    (big_a, big_b)
}

/// `√(2/(A+√B))`, clamped to at most one against rounding.
pub fn distortion(q: Complex64, a: f64, lambda: f64) -> Result<f64> {
    check_params(q, a, lambda)?;
    let (big_a, big_b) = ab_terms(q, a, lambda);
    Ok((2.0 / (big_a + big_b.sqrt())).sqrt().min(1.0))
}

pub fn distortion_coefficients(q: Complex64, a: f64, lambda: f64) -> Result<BoundSet> {
    check_params(q, a, lambda)?;
    let (big_a, big_b) = ab_terms(q, a, lambda);
    let distortion = distortion(q, a, lambda)?;
    let d_lambda = match resolvent_accretivity(q, a, lambda) {
        Ok(d) => Some(d),
        Err(Error::Degenerate(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(BoundSet {
        q,
        a,
        lambda,
        big_a,
        big_b,
        distortion,
        a_lambda: composed_accretivity(q, a, lambda)?,
        d_lambda,
        rho_star: rho_star(q, a, lambda)?,
        alpha: lambda * (q.re - a),
        beta: lambda * a,
    })
}

/// Distortion bound for the floor `a = 0`: `1` up to `λ = 2 Re q/|q|²`,
/// `1/|1 − λq|` beyond.
pub fn est1_bound(q: Complex64, lambda: f64) -> Result<f64> {
    check_params(q, 0.0, lambda)?;
    if lambda <= critical_lambda(q) {
        Ok(1.0)
    } else {
        Ok(1.0 / (1.0 - lambda * q).norm())
    }
}

/// `λ₀ = 2 Re q/|q|²`, where `|1 − λq| = 1`. Infinite for `q = 0`.
pub fn critical_lambda(q: Complex64) -> f64 {
    if q.norm_sqr() == 0.0 {
        f64::INFINITY
    } else {
        2.0 * q.re / q.norm_sqr()
    }
}

/// Distortion at `λ₀ = 2 Re q/|q|²`, written as
/// `1/√(2λ₀a + 1 + λ₀|q|√(2λ₀a))`. Agrees with [`distortion`] at `λ₀`.
pub fn distortion_at_critical_lambda(q: Complex64, a: f64) -> Result<f64> {
    if !(q.re > 0.0) {
        return Err(Error::domain(format!("needs Re q > 0, got {q}")));
    }
    let lambda0 = critical_lambda(q);
    check_params(q, a, lambda0)?;
    let x = 2.0 * lambda0 * a;
    Ok(1.0 / (x + 1.0 + lambda0 * q.norm() * x.sqrt()).sqrt())
}

/// `√(q/(4a + q))`, the simplified real-`q` form of the critical-λ
/// distortion as printed alongside it. It does not agree with
/// [`distortion_at_critical_lambda`] when `a > 0` (the general expression
/// reduces to `√q/(√q + 2√a)` for real `q`), so nothing in this crate uses it
/// as a bound; it is kept to pin the discrepancy in tests.
pub fn critical_distortion_real_simplified(q: f64, a: f64) -> Result<f64> {
    if !(q > 0.0 && a >= 0.0 && a <= q) {
        return Err(Error::domain(format!("needs 0 <= a <= q and q > 0, got q={q} a={a}")));
    }
    Ok((q / (4.0 * a + q)).sqrt())
}

/// Accretivity constant of `f ∘ G_λ`: `a_λ = (1 − distortion)/λ`.
pub fn composed_accretivity(q: Complex64, a: f64, lambda: f64) -> Result<f64> {
    let d = distortion(q, a, lambda)?;
    Ok(((1.0 - d) / lambda).max(0.0))
}

/// `φ(t) = (1+λRe q − t(1 − λ(Re q − 2a))) / (|1+λq|² − t|1 − λ(q − 2a)|²)`.
pub fn phi(q: Complex64, a: f64, lambda: f64, t: f64) -> Result<f64> {
    check_params(q, a, lambda)?;
    let num = 1.0 + lambda * q.re - t * (1.0 - lambda * (q.re - 2.0 * a));
    let den = (1.0 + lambda * q).norm_sqr() - t * (1.0 - lambda * (q - 2.0 * a)).norm_sqr();
    if den <= PHI_DENOMINATOR_GUARD {
        return Err(Error::Degenerate(format!(
            "φ denominator {den:e} at t = {t} for q={q}, a={a}, λ={lambda}"
        )));
    }
    Ok(num / den)
}

/// `d_λ = min{φ(0), φ(2/(A+√B))}`, the accretivity constant claimed for
/// `G_λ` itself.
///
/// Both endpoints are evaluated since the direction of monotonicity of `φ`
/// depends on the parameters. Note that this value is *not* a valid lower
/// bound for `Re g_λ` in general: for `p = (1+z)/(1−z)` and `λ = 1` it
/// gives `1/2`, while `g_1(z) = 1/(2+z)` has real part `1/3` at `z → 1`.
/// [`disk_accretivity_bound`] is the bound that actually follows from the
/// value-disk argument.
pub fn resolvent_accretivity(q: Complex64, a: f64, lambda: f64) -> Result<f64> {
    check_params(q, a, lambda)?;
    let (big_a, big_b) = ab_terms(q, a, lambda);
    let t_hat = 2.0 / (big_a + big_b.sqrt());
    let at_zero = phi(q, a, lambda, 0.0)?;
    let at_end = phi(q, a, lambda, t_hat)?;
    Ok(at_zero.min(at_end))
}

/// Lower bound for `Re g_λ(z)` at a point whose image has modulus `s = |G_λ(z)|`.
///
/// `1 + λp(w)` lies in the value disk of radius `|w| = s`, so `g = 1/(1+λp(w))`
/// lies in the reciprocal disk, whose leftmost real part simplifies to
///
/// ```text
/// ψ(s) = (1 − s) N(s) / (N(s) M(s) + λ² (Im q)² (1 − s²))
/// N(s) = 1 + s + λ Re q (1 − s) + 2λas
/// M(s) = 1 − s + λ Re q (1 + s) − 2λas
/// ```
pub fn accretivity_profile(q: Complex64, a: f64, lambda: f64, s: f64) -> Result<f64> {
    check_params(q, a, lambda)?;
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::domain(format!("s must lie in [0, 1], got {s}")));
    }
    let lre = lambda * q.re;
    let n = 1.0 + s + lre * (1.0 - s) + 2.0 * lambda * a * s;
    let m = 1.0 - s + lre * (1.0 + s) - 2.0 * lambda * a * s;
    let den = n * m + (lambda * q.im).powi(2) * (1.0 - s * s);
    if den <= 0.0 {
        return Err(Error::Degenerate(format!(
            "reciprocal disk contains the origin at s = {s} (q={q}, a={a}, λ={lambda})"
        )));
    }
    Ok((1.0 - s) * n / den)
}

/// `inf { ψ(s) : 0 ≤ s < distortion }`: a lower bound for `Re g_λ` on the
/// whole disk, i.e. `G_λ` is accretive with at least this constant.
pub fn disk_accretivity_bound(q: Complex64, a: f64, lambda: f64) -> Result<f64> {
    let rho = distortion(q, a, lambda)?;
    // ψ(1) is 0/0 only when q = 0, where G is the identity.
    let upper = if rho >= 1.0 { 1.0 - 1e-12 } else { rho };
    let profile = |s: f64| accretivity_profile(q, a, lambda, s);
    let n = 2048;
    let mut best = (0usize, f64::INFINITY);
    for i in 0..=n {
        let s = upper * i as f64 / n as f64;
        let v = profile(s)?;
        if v < best.1 {
            best = (i, v);
        }
    }
    let lo = upper * best.0.saturating_sub(1) as f64 / n as f64;
    let hi = upper * (best.0 + 1).min(n) as f64 / n as f64;
    let refined = golden_min(|s| profile(s).unwrap_or(f64::INFINITY), lo, hi, 1e-14);
    Ok(best.1.min(refined.1))
}

/// Golden-section search for a minimum of a unimodal function on `[lo, hi]`.
pub(crate) fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Image of a disk under `v ↦ 1/v`.
pub fn reciprocal_disk(d: &Disk) -> Result<Disk> {
    let den = d.center.norm_sqr() - d.radius * d.radius;
    if d.contains_zero() || den <= 0.0 {
        return Err(Error::domain(format!(
            "disk centered at {} with radius {} contains the origin",
            d.center, d.radius
        )));
    }
    Ok(Disk::new(d.center.conj() / den, d.radius / den))
}

/// `T(r) = 2αr / ((1+β)(1−r)² + α(1−r²))`; identically zero when `α = 0`.
pub fn t_function(alpha: f64, beta: f64, r: f64) -> Result<f64> {
    check_radius(r)?;
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::domain(format!("α must be finite and >= 0, got {alpha}")));
    }
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::domain(format!("β must be finite and >= 0, got {beta}")));
    }
    if alpha == 0.0 {
        return Ok(0.0);
    }
    let u = 1.0 - r;
    Ok(2.0 * alpha * r / ((1.0 + beta) * u * u + alpha * (1.0 - r * r)))
}

/// `T` extended by `+∞` at `r ≥ 1` (a bound `ρ = 1` carries no information).
pub fn t_function_extended(alpha: f64, beta: f64, r: f64) -> Result<f64> {
    if r >= 1.0 {
        if alpha == 0.0 {
            return Ok(0.0);
        }
        return Ok(f64::INFINITY);
    }
    t_function(alpha, beta, r)
}

/// Root of `T(r) = 1` in `(0, 1]`:
/// `ρ* = √(1+λRe q) / (√(2λ(Re q − a)) + √(1+λRe q))`.
pub fn rho_star(q: Complex64, a: f64, lambda: f64) -> Result<f64> {
    check_params(q, a, lambda)?;
    let num = (1.0 + lambda * q.re).sqrt();
    Ok(num / ((2.0 * lambda * (q.re - a)).sqrt() + num))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderEstimate {
    /// Order of starlikeness.
    pub order: f64,
    /// Order of strong starlikeness.
    pub strong_order: f64,
    /// `false` when `ρ > ρ*` and only the universal order `1/2` applies.
    pub refined: bool,
}

/// Orders implied by `|G_λ| ≤ ρ`: `1/(1+T(ρ))` and `(2/π) arcsin T(ρ)` when
/// `ρ ≤ ρ*`, else the baseline `(1/2, 1)`.
pub fn starlike_order_from_rho(q: Complex64, a: f64, lambda: f64, rho: f64) -> Result<OrderEstimate> {
    check_params(q, a, lambda)?;
    check_radius(rho)?;
    if rho > rho_star(q, a, lambda)? {
        return Ok(OrderEstimate {
            order: 0.5,
            strong_order: 1.0,
            refined: false,
        });
    }
    let t = t_function(lambda * (q.re - a), lambda * a, rho)?.min(1.0);
    Ok(OrderEstimate {
        order: 1.0 / (1.0 + t),
        strong_order: 2.0 * t.asin() / PI,
        refined: true,
    })
}

/// `M₁(q, a) = (√(5Re²q − 4a Re q) + Re q − 2a) / ((Re q + a) Re q)`.
pub fn threshold_m1(q: Complex64, a: f64) -> Result<f64> {
    let re = q.re;
    if !(re > 0.0) {
        return Err(Error::domain(format!("M1 needs Re q > 0, got {q}")));
    }
    if !(a >= 0.0 && a <= re) {
        return Err(Error::domain(format!("M1 needs 0 <= a <= Re q, got a = {a}")));
    }
    Ok(((5.0 * re * re - 4.0 * a * re).sqrt() + re - 2.0 * a) / ((re + a) * re))
}

/// `M₂(q, λ) = ((s+1)√(2s²+4s+1) + s² + s − 1) / (λ(2+s)²)` with `s = λ Re q`.
pub fn threshold_m2(q: Complex64, lambda: f64) -> Result<f64> {
    if !(q.re > 0.0) {
        return Err(Error::domain(format!("M2 needs Re q > 0, got {q}")));
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::domain(format!("λ must be finite and > 0, got {lambda}")));
    }
    let s = lambda * q.re;
    let num = (s + 1.0) * (2.0 * s * s + 4.0 * s + 1.0).sqrt() + s * s + s - 1.0;
    Ok(num / (lambda * (2.0 + s).powi(2)))
}

/// Residual of `2(√(2λ(Re q−a)/(1+λRe q)) + 1)² ≤ A + √B`, as `rhs − lhs`.
/// Non-negative exactly when the distortion bound is at most `ρ*`.
pub fn main_inequality_slack(q: Complex64, a: f64, lambda: f64) -> Result<f64> {
    check_params(q, a, lambda)?;
    let (big_a, big_b) = ab_terms(q, a, lambda);
    let root = (2.0 * lambda * (q.re - a) / (1.0 + lambda * q.re)).sqrt();
    Ok(big_a + big_b.sqrt() - 2.0 * (root + 1.0).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderCondition {
    /// `λ|q|² ≥ 2 Re q` and `λ > M₁(q, a)`.
    I,
    /// `λ|q|² < 2 Re q` and `a > M₂(q, λ)`.
    Ii,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifiedOrder {
    pub order: f64,
    pub condition: OrderCondition,
    /// The distortion bound used as `ρ`.
    pub rho: f64,
    pub t_rho: f64,
}

/// Which sufficient condition for the refined starlikeness order holds, if any.
pub fn order_condition(q: Complex64, a: f64, lambda: f64) -> Result<Option<OrderCondition>> {
    check_params(q, a, lambda)?;
    if !(q.re > 0.0) {
        return Ok(None);
    }
    if lambda * q.norm_sqr() >= 2.0 * q.re {
        if lambda > threshold_m1(q, a)? {
            return Ok(Some(OrderCondition::I));
        }
    } else if a > threshold_m2(q, lambda)? {
        return Ok(Some(OrderCondition::Ii));
    }
    Ok(None)
}

/// Order of starlikeness `1/(1 + T(√(2/(A+√B))))` when one of the two
/// sufficient conditions holds; `None` when neither does.
///
/// Either condition implies the main inequality; a violation of that
/// implication is reported as [`Error::Inconsistent`].
pub fn calc_order(q: Complex64, a: f64, lambda: f64) -> Result<Option<CertifiedOrder>> {
    let Some(condition) = order_condition(q, a, lambda)? else {
        return Ok(None);
    };
    let slack = main_inequality_slack(q, a, lambda)?;
    let (big_a, big_b) = ab_terms(q, a, lambda);
    if slack < -1e-12 * (big_a + big_b.sqrt()) {
        return Err(Error::Inconsistent(format!(
            "condition {condition:?} holds but the main inequality fails by {slack:e} (q={q}, a={a}, λ={lambda})"
        )));
    }
    let rho = distortion(q, a, lambda)?;
    let t_rho = t_function(lambda * (q.re - a), lambda * a, rho)?;
    Ok(Some(CertifiedOrder {
        order: 1.0 / (1.0 + t_rho),
        condition,
        rho,
        t_rho,
    }))
}

/// Lower edge `t*(s) = (4 + 2s − s²)/(2+s)²` of the `(s, t) = (λq, a/q)`
/// region where the refined order is available for real `q`.
pub fn region_boundary(s: f64) -> f64 {
    (4.0 + 2.0 * s - s * s) / (2.0 + s).powi(2)
}

/// Points of the distortion curve `λ ↦ √(2/(A+√B))`.
pub fn distortion_curve(q: Complex64, a: f64, lambdas: &[f64]) -> Result<Vec<(f64, f64)>> {
    lambdas
        .iter()
        .map(|&lambda| distortion(q, a, lambda).map(|d| (lambda, d)))
        .collect()
}

/// Points of the region boundary `s ↦ t*(s)`.
pub fn region_curve(ss: &[f64]) -> Result<Vec<(f64, f64)>> {
    ss.iter()
        .map(|&s| {
            if !(s > 0.0 && s.is_finite()) {
                Err(Error::domain(format!("s must be finite and > 0, got {s}")))
            } else {
                Ok((s, region_boundary(s)))
            }
        })
        .collect()
}
