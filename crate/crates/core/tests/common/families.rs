//! One-parameter families over `y >= 0` with direct floating evaluation, and
//! truncation oracles for their loci.

pub struct Family {
    pub name: &'static str,
    pub pcf: &'static str,
    /// `f(s, y)` at `L = q`, for `y >= 0`.
    pub value: fn(i64, i64, f64) -> f64,
}

pub fn families() -> Vec<Family> {
    vec![
        Family {
            name: "pow_s",
            pcf: "func pow_s(s ; y) { term coeff = 1, exp = s * y; domain y >= 0; }",
            value: |s, y, q| q.powi((s * y) as i32),
        },
        Family {
            name: "lin_pow_s",
            pcf: "func lin_pow_s(s ; y) { term coeff = 1, exp = s * y, factors = [y]; domain y >= 0; }",
            value: |s, y, q| y as f64 * q.powi((s * y) as i32),
        },
        Family {
            name: "quad_coeff",
            pcf: "func quad_coeff(s ; y) { term coeff = 1, exp = y, factors = [s^2 - s]; domain y >= 0; }",
            value: |s, y, q| (s * s - s) as f64 * q.powi(y as i32),
        },
        Family {
            name: "window",
            pcf: "func window(s ; y) { term coeff = 1; domain 0 <= y and y <= s; }",
            value: |s, y, _| if y <= s { 1.0 } else { 0.0 },
        },
        Family {
            name: "sq_shift",
            pcf: "func sq_shift(s ; y) { term coeff = 1, exp = s * y + s, factors = [y^2]; domain y >= 0; }",
            value: |s, y, q| (y * y) as f64 * q.powi((s * y + s) as i32),
        },
    ]
}

/// Truncation radius; `q^(5 R)` stays finite in `f64` for `q <= 3`.
pub const R: i64 = 100;

/// Verdicts `[integrable, bounded, vanishing]` from the values on `[0, R]`:
/// the tail `[R/2, R]` must carry negligible mass, must not exceed the head's
/// maximum, and every value must be zero, respectively.
pub fn oracle(value: fn(i64, i64, f64) -> f64, s: i64, q: f64) -> [bool; 3] {
    let vals: Vec<f64> = (0..=R).map(|y| value(s, y, q).abs()).collect();
    let (head, tail) = vals.split_at((R / 2) as usize);
    let head_sum: f64 = head.iter().sum();
    let tail_sum: f64 = tail.iter().sum();
    let head_max = head.iter().cloned().fold(0.0, f64::max);
    let tail_max = tail.iter().cloned().fold(0.0, f64::max);
    [
        tail_sum <= 1e-9 * head_sum.max(1.0),
        tail_max <= head_max * (1.0 + 1e-12),
        vals.iter().all(|v| *v == 0.0),
    ]
}
