//! Generators `f(z) = p(z) z` whose multiplier `p` has real part bounded below
//! by `a`, described through a finite atomic Riesz–Herglotz measure.
//!
//! A [`GeneratorSpec`] stores atoms `(θ_k, m_k)` of a probability measure on the
//! unit circle together with the floor `a`, the spread `scale = Re q − a` and
//! `gamma = Im q`. The multiplier is
//!
//! ```text
//! p(z) = scale · Σ m_k (1 + z ζ̄_k) / (1 − z ζ̄_k) + a + i·gamma,   ζ_k = e^{iθ_k}
//! ```
//!
//! so `Re p ≥ a` on the disk holds by construction.

use std::f64::consts::TAU;
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kernel denominators smaller than this are treated as hitting an atom pole.
pub const POLE_GUARD: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub theta: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct GeneratorSpec {
    atoms: Vec<Atom>,
    a: f64,
    scale: f64,
    gamma: f64,
    #[serde(skip_serializing)]
    conj_zeta: Vec<Complex64>,
}

#[derive(Deserialize)]
struct RawSpec {
    atoms: Vec<Atom>,
    a: f64,
    scale: f64,
    gamma: f64,
}

impl TryFrom<RawSpec> for GeneratorSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        GeneratorSpec::new(raw.atoms, raw.a, raw.scale, raw.gamma)
    }
}

impl GeneratorSpec {
    /// Builds a spec, wrapping angles into `[0, 2π)` and renormalizing the
    /// weights to sum to one.
    pub fn new(atoms: Vec<Atom>, a: f64, scale: f64, gamma: f64) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Parse("generator needs at least one atom".into()));
        }
        if !(a.is_finite() && a >= 0.0) {
            return Err(Error::Parse(format!("floor a must be finite and >= 0, got {a}")));
        }
        if !(scale.is_finite() && scale >= 0.0) {
            return Err(Error::Parse(format!("scale must be finite and >= 0, got {scale}")));
        }
        if !gamma.is_finite() {
            return Err(Error::Parse(format!("gamma must be finite, got {gamma}")));
        }
        let mut total = 0.0;
        for atom in &atoms {
            if !atom.theta.is_finite() {
                return Err(Error::Parse(format!("atom angle must be finite, got {}", atom.theta)));
            }
            if !(atom.weight.is_finite() && atom.weight > 0.0) {
                return Err(Error::Parse(format!(
                    "atom weight must be finite and > 0, got {}",
                    atom.weight
                )));
            }
            total += atom.weight;
        }
        // leave already-normalized weights untouched so JSON round trips are exact
        if (total - 1.0).abs() <= 4.0 * f64::EPSILON * atoms.len() as f64 {
            total = 1.0;
        }
        let atoms: Vec<Atom> = atoms
            .into_iter()
            .map(|atom| Atom {
                theta: atom.theta.rem_euclid(TAU),
                weight: atom.weight / total,
            })
            .collect();
        let conj_zeta = atoms
            .iter()
            .map(|atom| Complex64::from_polar(1.0, -atom.theta))
            .collect();
        Ok(Self {
            atoms,
            a,
            scale,
            gamma,
            conj_zeta,
        })
    }

    /// `p(z) = a + scale·(1 + z e^{-iθ})/(1 − z e^{-iθ}) + i·gamma`.
    pub fn single_atom(theta: f64, a: f64, scale: f64, gamma: f64) -> Result<Self> {
        Self::new(vec![Atom { theta, weight: 1.0 }], a, scale, gamma)
    }

    /// Single atom at `θ = 0` with `p(0) = q`: the extremal generator
    /// `a + (Re q − a)(1 + z)/(1 − z) + i Im q`.
    pub fn extremal(q: Complex64, a: f64) -> Result<Self> {
        if q.re < a {
            return Err(Error::domain(format!("Re q = {} is below the floor a = {a}", q.re)));
        }
        Self::single_atom(0.0, a, q.re - a, q.im)
    }

    /// Constant multiplier `p ≡ q`, i.e. a linear generator.
    pub fn constant(q: Complex64) -> Result<Self> {
        if !(q.re >= 0.0) {
            return Err(Error::domain(format!("constant multiplier needs Re q >= 0, got {q}")));
        }
        Self::single_atom(0.0, q.re, 0.0, q.im)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `q = p(0) = (a + scale) + i·gamma`.
    pub fn q(&self) -> Complex64 {
        Complex64::new(self.a + self.scale, self.gamma)
    }

    pub fn is_constant(&self) -> bool {
        self.scale == 0.0
    }

    /// The spec of `z ↦ p(e^{iφ} z)`: every atom angle shifted by `−φ`.
    pub fn rotated(&self, phi: f64) -> Self {
        let atoms = self
            .atoms
            .iter()
            .map(|atom| Atom {
                theta: atom.theta - phi,
                weight: atom.weight,
            })
            .collect();
        Self::new(atoms, self.a, self.scale, self.gamma).expect("rotation keeps a valid spec")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn check_interior(z: Complex64) -> Result<()> {
        if !(z.norm() < 1.0) {
            return Err(Error::domain(format!("|z| = {} is not inside the unit disk", z.norm())));
        }
        Ok(())
    }

    /// Evaluates `p(z)` and `p′(z)` in a single pass over the atoms.
    pub fn eval_with_derivative(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        Self::check_interior(z)?;
        let mut kernel = Complex64::new(0.0, 0.0);
        let mut dkernel = Complex64::new(0.0, 0.0);
        for (atom, &cz) in self.atoms.iter().zip(&self.conj_zeta) {
            let denom = 1.0 - z * cz;
            if denom.norm() < POLE_GUARD {
                return Err(Error::domain(format!(
                    "z = {z} sits on the kernel pole of the atom at θ = {}",
                    atom.theta
                )));
            }
            let inv = denom.inv();
            kernel += atom.weight * (1.0 + z * cz) * inv;
            dkernel += atom.weight * 2.0 * cz * inv * inv;
        }
        let p = self.scale * kernel + Complex64::new(self.a, self.gamma);
        Ok((p, self.scale * dkernel))
    }

    pub fn eval_p(&self, z: Complex64) -> Result<Complex64> {
        self.eval_with_derivative(z).map(|(p, _)| p)
    }

    pub fn eval_p_prime(&self, z: Complex64) -> Result<Complex64> {
        self.eval_with_derivative(z).map(|(_, dp)| dp)
    }

    /// The generator itself, `f(z) = p(z) z`.
    pub fn eval_f(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.eval_p(z)? * z)
    }

    /// Closed disk containing every value `p(z)` with `|z| = r`.
    pub fn value_disk(&self, r: f64) -> Result<Disk> {
        check_radius(r)?;
        let q = self.q();
        let r2 = r * r;
        let center = (q + r2 * q.conj() - 2.0 * self.a * r2) / (1.0 - r2);
        let radius = 2.0 * r * (q.re - self.a) / (1.0 - r2);
        Ok(Disk::new(center, radius))
    }

    /// Harnack-type bounds `(lo, hi)` on `Re p(z)` for `|z| = r`.
    pub fn harnack_bounds(&self, r: f64) -> Result<(f64, f64)> {
        check_radius(r)?;
        let re_q = self.q().re;
        let lo = ((1.0 - r) * re_q + 2.0 * self.a * r) / (1.0 + r);
        let hi = ((1.0 + r) * re_q - 2.0 * self.a * r) / (1.0 - r);
        Ok((lo, hi))
    }

    /// Draws a spec from `rng` according to `config`. The config must have
    /// been validated.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, config: &SamplerConfig) -> Self {
        let n_atoms = rng.gen_range(1..=config.max_atoms);
        let atoms = (0..n_atoms)
            .map(|_| Atom {
                theta: rng.gen_range(0.0..TAU),
                // (0, 1]: strictly positive
                weight: 1.0 - rng.gen::<f64>(),
            })
            .collect();
        let a = draw(rng, config.a_range);
        let scale = draw(rng, config.scale_range);
        let gamma = draw(rng, config.gamma_range);
        Self::new(atoms, a, scale, gamma).expect("sampler config was validated")
    }
}

fn draw<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

pub(crate) fn check_radius(r: f64) -> Result<()> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::domain(format!("radius must lie in [0, 1), got {r}")));
    }
    Ok(())
}

/// Closed disk in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Complex64,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Complex64, radius: f64) -> Self {
        debug_assert!(radius >= 0.0, "negative disk radius {radius}");
        Self { center, radius }
    }

    pub fn contains(&self, v: Complex64, tol: f64) -> bool {
        (v - self.center).norm() <= self.radius + tol
    }

    /// Signed distance of `v` inside the disk: positive inside, negative outside.
    pub fn depth(&self, v: Complex64) -> f64 {
        self.radius - (v - self.center).norm()
    }

    pub fn contains_zero(&self) -> bool {
        self.center.norm() <= self.radius
    }

    /// Smallest and largest real part over the disk.
    pub fn re_range(&self) -> (f64, f64) {
        (self.center.re - self.radius, self.center.re + self.radius)
    }
}

/// Ranges for [`sample_generator`]. Each range is inclusive; `lo == hi` pins
/// the value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    pub max_atoms: usize,
    pub a_range: (f64, f64),
    pub scale_range: (f64, f64),
    pub gamma_range: (f64, f64),
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            max_atoms: 4,
            a_range: (0.0, 1.0),
            scale_range: (0.0, 2.0),
            gamma_range: (-1.0, 1.0),
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_atoms == 0 {
            return Err(Error::Config("max_atoms must be >= 1".into()));
        }
        let ranges = [
            ("a_range", self.a_range, true),
            ("scale_range", self.scale_range, true),
            ("gamma_range", self.gamma_range, false),
        ];
        for (name, (lo, hi), nonnegative) in ranges {
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(Error::Config(format!("{name} must be finite, got ({lo}, {hi})")));
            }
            if lo > hi {
                return Err(Error::Config(format!("{name} is empty: ({lo}, {hi})")));
            }
            if nonnegative && lo < 0.0 {
                return Err(Error::Config(format!("{name} must lie in [0, ∞), got ({lo}, {hi})")));
            }
        }
        Ok(())
    }
}

/// Deterministic random generator for a given seed.
pub fn sample_generator(seed: u64, config: &SamplerConfig) -> Result<GeneratorSpec> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(GeneratorSpec::random(&mut rng, config))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cayley() -> GeneratorSpec {
        GeneratorSpec::single_atom(0.0, 0.0, 1.0, 0.0).unwrap()
    }

    #[test]
    fn p_at_origin_is_q() {
        assert_eq!(cayley().eval_p(c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
        let spec = GeneratorSpec::new(
            vec![
                Atom { theta: 0.3, weight: 2.0 },
                Atom { theta: 4.0, weight: 1.0 },
            ],
            0.4,
            1.5,
            -0.7,
        )
        .unwrap();
        let p0 = spec.eval_p(c(0.0, 0.0)).unwrap();
        assert!((p0 - c(1.9, -0.7)).norm() < 1e-15);
        assert_eq!(spec.q(), c(1.9, -0.7));
    }

    #[test]
    fn cayley_kernel_at_one_half() {
        let p = cayley().eval_p(c(0.5, 0.0)).unwrap();
        assert!((p - c(3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn derivative_at_origin() {
        assert!((cayley().eval_p_prime(c(0.0, 0.0)).unwrap() - c(2.0, 0.0)).norm() < 1e-15);

        let spec = GeneratorSpec::new(
            vec![
                Atom { theta: 1.0, weight: 0.25 },
                Atom { theta: 2.5, weight: 0.75 },
            ],
            0.1,
            0.8,
            0.3,
        )
        .unwrap();
        let expected = 2.0
            * 0.8
            * (0.25 * Complex64::from_polar(1.0, -1.0) + 0.75 * Complex64::from_polar(1.0, -2.5));
        assert!((spec.eval_p_prime(c(0.0, 0.0)).unwrap() - expected).norm() < 1e-14);

        let flat = GeneratorSpec::constant(c(1.0, 2.0)).unwrap();
        assert_eq!(flat.eval_p_prime(c(0.3, -0.6)).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn boundary_and_pole_are_domain_errors() {
        let spec = cayley();
        assert!(matches!(spec.eval_p(c(1.0, 0.0)), Err(Error::Domain(_))));
        assert!(matches!(spec.eval_p(c(0.0, -1.2)), Err(Error::Domain(_))));
        assert!(matches!(spec.eval_p_prime(c(f64::NAN, 0.0)), Err(Error::Domain(_))));
        assert!(spec.eval_p(c(1.0 - 1e-15, 0.0)).is_err());
    }

    #[test]
    fn value_disk_examples() {
        let spec = cayley();
        let d0 = spec.value_disk(0.0).unwrap();
        assert_eq!(d0, Disk::new(c(1.0, 0.0), 0.0));
        let d = spec.value_disk(0.5).unwrap();
        assert!((d.center - c(5.0 / 3.0, 0.0)).norm() < 1e-15);
        assert!((d.radius - 4.0 / 3.0).abs() < 1e-15);
        let flat = GeneratorSpec::constant(c(0.7, -0.2)).unwrap();
        for r in [0.1, 0.5, 0.99] {
            assert_eq!(flat.value_disk(r).unwrap().radius, 0.0);
        }
        assert!(spec.value_disk(1.0).is_err());
        assert!(spec.harnack_bounds(-0.1).is_err());
    }

    #[test]
    fn harnack_examples() {
        let spec = cayley();
        assert_eq!(spec.harnack_bounds(0.0).unwrap(), (1.0, 1.0));
        let (lo, hi) = spec.harnack_bounds(0.5).unwrap();
        assert!((lo - 1.0 / 3.0).abs() < 1e-15);
        assert!((hi - 3.0).abs() < 1e-15);

        let spec = GeneratorSpec::single_atom(0.0, 0.3, 0.9, 0.0).unwrap();
        let (lo, _) = spec.harnack_bounds(1.0 - 1e-9).unwrap();
        assert!((lo - 0.3).abs() < 1e-8);
    }

    #[test]
    fn harnack_matches_disk_real_extent() {
        let spec = GeneratorSpec::new(
            vec![Atom { theta: 2.0, weight: 1.0 }, Atom { theta: 5.0, weight: 3.0 }],
            0.2,
            1.3,
            0.4,
        )
        .unwrap();
        for r in [0.0, 0.2, 0.7, 0.999] {
            let (lo, hi) = spec.harnack_bounds(r).unwrap();
            let (dlo, dhi) = spec.value_disk(r).unwrap().re_range();
            let scale = 1.0 + hi.abs();
            assert!((lo - dlo).abs() <= 1e-12 * scale);
            assert!((hi - dhi).abs() <= 1e-12 * scale);
            assert!(lo >= spec.a() - 1e-12);
        }
    }

    #[test]
    fn single_atom_real_point_lies_on_disk_boundary() {
        let spec = GeneratorSpec::single_atom(0.0, 0.25, 0.75, 0.1).unwrap();
        for r in [0.1, 0.5, 0.9, 0.999] {
            let d = spec.value_disk(r).unwrap();
            for z in [c(r, 0.0), c(-r, 0.0), c(0.0, r)] {
                let p = spec.eval_p(z).unwrap();
                assert!(d.depth(p).abs() <= 1e-10 * (1.0 + d.radius), "r={r} z={z}");
            }
        }
    }

    #[test]
    fn json_roundtrip_and_normalization() {
        let text = r#"{"atoms":[{"theta":7.0,"weight":3.0},{"theta":-1.0,"weight":1.0}],"a":0.5,"scale":1.0,"gamma":-0.25}"#;
        let spec = GeneratorSpec::from_json(text).unwrap();
        let sum: f64 = spec.atoms().iter().map(|a| a.weight).sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!((spec.atoms()[0].weight - 0.75).abs() < 1e-15);
        assert!(spec.atoms().iter().all(|a| (0.0..TAU).contains(&a.theta)));
        let back = GeneratorSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn json_rejects_bad_weights() {
        let negative = r#"{"atoms":[{"theta":0.0,"weight":-1.0}],"a":0.0,"scale":1.0,"gamma":0.0}"#;
        assert!(matches!(GeneratorSpec::from_json(negative), Err(Error::Parse(_))));
        // serde_json cannot carry NaN literals; it must still be a parse error.
        let nan = r#"{"atoms":[{"theta":0.0,"weight":NaN}],"a":0.0,"scale":1.0,"gamma":0.0}"#;
        assert!(matches!(GeneratorSpec::from_json(nan), Err(Error::Parse(_))));
        assert!(GeneratorSpec::new(vec![Atom { theta: 0.0, weight: f64::NAN }], 0.0, 1.0, 0.0).is_err());
        let empty = r#"{"atoms":[],"a":0.0,"scale":1.0,"gamma":0.0}"#;
        assert!(GeneratorSpec::from_json(empty).is_err());
        let neg_scale = r#"{"atoms":[{"theta":0.0,"weight":1.0}],"a":0.0,"scale":-1.0,"gamma":0.0}"#;
        assert!(GeneratorSpec::from_json(neg_scale).is_err());
    }

    #[test]
    fn sampler_is_deterministic_and_normalized() {
        let config = SamplerConfig::default();
        let s1 = sample_generator(1, &config).unwrap();
        let s2 = sample_generator(1, &config).unwrap();
        assert_eq!(s1, s2);
        for seed in 0..50 {
            let spec = sample_generator(seed, &config).unwrap();
            let sum: f64 = spec.atoms().iter().map(|a| a.weight).sum();
            assert!((sum - 1.0).abs() < 1e-12);
            assert!(spec.atoms().len() <= config.max_atoms);
            if spec.a() > 0.0 && spec.scale() > 0.0 {
                assert!(spec.eval_p(c(0.0, 0.0)).unwrap().re > spec.a());
            }
        }
    }

    #[test]
    fn sampler_rejects_bad_configs() {
        let mut config = SamplerConfig::default();
        config.max_atoms = 0;
        assert!(matches!(sample_generator(0, &config), Err(Error::Config(_))));
        let mut config = SamplerConfig::default();
        config.a_range = (1.0, 0.5);
        assert!(matches!(sample_generator(0, &config), Err(Error::Config(_))));
        let mut config = SamplerConfig::default();
        config.scale_range = (-1.0, 0.5);
        assert!(matches!(sample_generator(0, &config), Err(Error::Config(_))));
        let mut config = SamplerConfig::default();
        config.gamma_range = (f64::NAN, 0.5);
        assert!(sample_generator(0, &config).is_err());
    }

    #[test]
    fn rotation_shifts_the_slice() {
        let spec = GeneratorSpec::single_atom(0.4, 0.1, 1.0, 0.2).unwrap();
        let phi = 1.1;
        let rotated = spec.rotated(phi);
        let u = Complex64::from_polar(1.0, phi);
        for z in [c(0.3, 0.2), c(-0.5, 0.1), c(0.0, 0.9)] {
            let lhs = rotated.eval_p(z).unwrap();
            let rhs = spec.eval_p(u * z).unwrap();
            assert!((lhs - rhs).norm() < 1e-13);
        }
    }
}
