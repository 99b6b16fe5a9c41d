//! Additive characters of prime fields.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// `psi(a) = exp(2 pi i a / p)`.
pub fn psi(a: i64, p: u64) -> Complex64 {
    let r = a.rem_euclid(p as i64) as f64;
    Complex64::from_polar(1.0, std::f64::consts::TAU * r / p as f64)
}

fn check_len(f: &[Complex64], p: u64) -> Result<()> {
    if f.len() as u64 != p {
        return Err(Error::LengthMismatch { expected: p as usize, got: f.len() });
    }
    Ok(())
}

/// `f^(y) = sum_x f(x) psi(-x y)`.
pub fn fourier_finite(f: &[Complex64], p: u64) -> Result<Vec<Complex64>> {
    check_len(f, p)?;
    Ok((0..p as i64)
        .map(|y| f.iter().enumerate().map(|(x, v)| v * psi(-(x as i64) * y, p)).sum())
        .collect())
}

/// `f(x) = (1/p) sum_y f^(y) psi(x y)`.
pub fn fourier_inverse(fhat: &[Complex64], p: u64) -> Result<Vec<Complex64>> {
    check_len(fhat, p)?;
    Ok((0..p as i64)
        .map(|x| {
            let s: Complex64 = fhat.iter().enumerate().map(|(y, v)| v * psi(x * y as i64, p)).sum();
            s / p as f64
        })
        .collect())
}

/// For `f(y) = sum_j c_j psi(b_j y)` with distinct `b_j`, the `y0` maximizing
/// `|f(y0)|`. Then `max_j |c_j| <= |f(y0)|`.
pub fn witness_max_coeff(c: &[Complex64], b: &[i64], p: u64) -> Result<u64> {
    if c.len() != b.len() {
        return Err(Error::LengthMismatch { expected: b.len(), got: c.len() });
    }
    let mut seen = Vec::new();
    for x in b {
        let r = x.rem_euclid(p as i64) as u64;
        if seen.contains(&r) {
            return Err(Error::DuplicateFrequency(r));
        }
        seen.push(r);
    }
    let value = |y: i64| -> f64 { c.iter().zip(b).map(|(cj, bj)| cj * psi(bj * y, p)).sum::<Complex64>().norm() };
    let mut best = (0u64, value(0));
    for y in 1..p {
        let v = value(y as i64);
        if v > best.1 {
            best = (y, v);
        }
    }
    let sup = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if sup > best.1 * (1.0 + 1e-12) + 1e-12 {
        return Err(Error::Numeric(format!("max coefficient {sup} exceeds {}", best.1)));
    }
    Ok(best.0)
}
