//! Parsing and output helpers shared by the command-line tool.

use std::io::Write;

use num_complex::Complex64;

use crate::bounds::{distortion_curve, region_curve};
use crate::error::{Error, Result};
use crate::herglotz::GeneratorSpec;

pub const SEED_ENV: &str = "RESOLVENT_LAB_SEED";
pub const DEFAULT_SEED: u64 = 42;

/// Parses `re+imi` style complex numbers: `1`, `-0.5i`, `1+0.5i`, `2e-3-i`.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("cannot parse {text:?} as a complex number (expected e.g. 1+0.5i)"));
    if s.is_empty() {
        return Err(bad());
    }
    let Some(body) = s.strip_suffix(['i', 'j']) else {
        return match s.parse::<f64>() {
            Ok(re) if re.is_finite() => Ok(Complex64::new(re, 0.0)),
            _ => Err(bad()),
        };
    };
    // split before the last sign that is not a leading sign or an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re_part, im_part) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("", body),
    };
    let im = match im_part {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => other.parse::<f64>().map_err(|_| bad())?,
    };
    let re = if re_part.is_empty() {
        0.0
    } else {
        re_part.parse::<f64>().map_err(|_| bad())?
    };
    if !(re.is_finite() && im.is_finite()) {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

/// Formats a complex number in the form accepted by [`parse_complex`].
pub fn format_complex(z: Complex64) -> String {
    if z.im.is_sign_negative() {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

/// Seed from an explicit flag, else the environment, else [`DEFAULT_SEED`].
pub fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

/// Single-atom generator with `p(0) = q`, floor `a` and atom at angle `theta`.
pub fn inline_spec(q: Complex64, a: f64, theta: f64) -> Result<GeneratorSpec> {
    if !(a >= 0.0 && q.re >= a) {
        return Err(Error::domain(format!("need 0 <= a <= Re q, got q = {q}, a = {a}")));
    }
    GeneratorSpec::single_atom(theta, a, q.re - a, q.im)
}

/// `n` equally spaced values from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| if k == n - 1 { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 })
            .collect(),
    }
}

fn write_rows<W: Write>(mut out: W, header: &str, rows: &[(f64, f64)]) -> std::io::Result<()> {
    writeln!(out, "{header}")?;
    for (x, y) in rows {
        writeln!(out, "{x},{y}")?;
    }
    out.flush()
}

/// CSV `lambda,distortion` over a linear λ grid.
pub fn write_fig1<W: Write>(out: W, q: Complex64, a: f64, lambda_min: f64, lambda_max: f64, n: usize) -> Result<()> {
    if !(lambda_min > 0.0 && lambda_min <= lambda_max && lambda_max.is_finite()) {
        return Err(Error::domain(format!("need 0 < lambda_min <= lambda_max, got [{lambda_min}, {lambda_max}]")));
    }
    if n == 0 {
        return Err(Error::domain("need at least one point"));
    }
    let rows = distortion_curve(q, a, &linear_grid(lambda_min, lambda_max, n))?;
    write_rows(out, "lambda,distortion", &rows).map_err(Error::from)
}

/// CSV `s,t_star` over a linear `s` grid.
pub fn write_fig2<W: Write>(out: W, s_min: f64, s_max: f64, n: usize) -> Result<()> {
    if !(s_min > 0.0 && s_min < s_max && s_max.is_finite()) {
        return Err(Error::domain(format!("need 0 < s_min < s_max, got [{s_min}, {s_max}]")));
    }
    if n == 0 {
        return Err(Error::domain("need at least one point"));
    }
    let rows = region_curve(&linear_grid(s_min, s_max, n))?;
    write_rows(out, "s,t_star", &rows).map_err(Error::from)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn complex_forms() {
        let cases = [
            ("1", c(1.0, 0.0)),
            ("-2.5", c(-2.5, 0.0)),
            ("1+0.5i", c(1.0, 0.5)),
            ("1-0.5i", c(1.0, -0.5)),
            ("0.5i", c(0.0, 0.5)),
            ("-0.5i", c(0.0, -0.5)),
            ("i", c(0.0, 1.0)),
            ("-i", c(0.0, -1.0)),
            ("2+i", c(2.0, 1.0)),
            ("2-i", c(2.0, -1.0)),
            ("1e-3+2e+1i", c(1e-3, 20.0)),
            ("-1E-2-3e-2i", c(-0.01, -0.03)),
            (" 1 + 2i ", c(1.0, 2.0)),
        ];
        for (text, want) in cases {
            assert_eq!(parse_complex(text).unwrap(), want, "{text}");
        }
        for bad in ["", "abc", "1+2", "1++2i", "nan", "1+inf i", "ii"] {
            assert!(parse_complex(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn format_round_trips() {
        for z in [c(1.0, 0.5), c(-0.25, -3.0), c(0.0, 0.0), c(1e-20, -1e20)] {
            assert_eq!(parse_complex(&format_complex(z)).unwrap(), z);
        }
    }

    #[test]
    fn inline_specs() {
        let s = inline_spec(c(1.0, 0.0), 0.0, 0.0).unwrap();
        assert_eq!(s.q(), c(1.0, 0.0));
        assert_eq!(s.scale(), 1.0);
        let flat = inline_spec(c(1.0, 0.0), 1.0, 0.0).unwrap();
        assert!(flat.is_constant());
        assert!(inline_spec(c(1.0, 0.0), 2.0, 0.0).is_err());
    }

    #[test]
    fn fig_csv() {
        let mut buf = Vec::new();
        write_fig1(&mut buf, c(1.0, 0.0), 0.0, 2.0, 3.0, 2).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "lambda,distortion\n2,1\n3,0.5\n");
        let mut buf = Vec::new();
        write_fig2(&mut buf, 1.0, 2.0, 2).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("s,t_star\n1,"));
        assert!(text.ends_with("2,0.25\n"));
        assert!(write_fig2(Vec::new(), 0.0, 1.0, 3).is_err());
        assert!(write_fig1(Vec::new(), c(1.0, 0.0), 0.0, 0.0, 1.0, 3).is_err());
    }
}
