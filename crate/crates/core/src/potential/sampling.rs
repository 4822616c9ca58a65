//! Deterministic low-discrepancy samples of the ball `|d| ≤ R` in R³.

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// `count` Halton points (bases 2, 3, 5) inside the ball of radius `radius`,
/// starting at Halton index `start`. The origin is always the first point when `start == 0`.
pub fn halton_ball(radius: f64, count: usize, start: u64) -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(count);
    if start == 0 && count > 0 {
        out.push([0.0; 3]);
    }
    let mut i = start + 1;
    while out.len() < count {
        let p = [
            radius * (2.0 * radical_inverse(i, 2) - 1.0),
            radius * (2.0 * radical_inverse(i, 3) - 1.0),
            radius * (2.0 * radical_inverse(i, 5) - 1.0),
        ];
        if p[0] * p[0] + p[1] * p[1] + p[2] * p[2] <= radius * radius {
            out.push(p);
        }
        i += 1;
    }
    out
}
