//! The Cantor function (devil's staircase), the canonical singular
//! continuous CDF. Hölder continuous with exponent log2/log3.

/// Number of ternary digits expanded; 64 digits put the truncation error
/// below 2^-64 in the output.
const DIGITS: u32 = 64;

/// Cantor function value at `x`; exactly 0 below 0 and 1 above 1.
pub fn cantor_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let mut v = x;
    let mut value = 0.0f64;
    let mut bit = 0.5f64;
    for _ in 0..DIGITS {
        v *= 3.0;
        let mut d = v.floor();
        if d > 2.0 {
            d = 2.0;
        }
        v -= d;
        if d == 1.0 {
            // middle third: the function is constant on the whole gap
            value += bit;
            break;
        }
        if d == 2.0 {
            value += bit;
        }
        bit *= 0.5;
        if bit == 0.0 {
            break;
        }
    }
    value
}

/// Smallest `y` with `cantor_cdf(y) >= t`, by bisection. The returned upper
/// bracket always satisfies `cantor_cdf(y) >= t` exactly.
pub fn cantor_quantile(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if cantor_cdf(mid) >= t {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}
