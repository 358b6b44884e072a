//! Standard normal distribution function, its inverse, and truncated normal
//! sampling.

use rand::Rng;
use libm::erfc;

use crate::error::{Error, Result};

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Standard normal CDF.
pub fn phi(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn density(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

// Acklam's rational approximation, relative error below 1.2e-9.
fn acklam(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const LOW: f64 = 0.02425;
    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    if p < LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p <= 1.0 - LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    }
}

/// Inverse standard normal CDF. Returns ∓∞ at 0 and 1.
pub fn phi_inv(p: f64) -> f64 {
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    // Refine in the lower half where Φ has full relative precision.
    if p > 0.5 {
        return -phi_inv_lower(1.0 - p);
    }
    phi_inv_lower(p)
}

fn phi_inv_lower(p: f64) -> f64 {
    let x = acklam(p);
    let d = density(x);
    if d == 0.0 || !d.is_finite() {
        return x;
    }
    // One Halley step.
    let u = (phi(x) - p) / d;
    x - u / (1.0 + 0.5 * x * u)
}

/// Draws from N(mu, sigma²) conditioned on the open interval (lo, hi).
pub fn sample_truncated_normal<R: Rng + ?Sized>(
    mu: f64,
    lo: f64,
    hi: f64,
    sigma: f64,
    rng: &mut R,
) -> Result<f64> {
    if !(lo < hi) || !(sigma > 0.0) || !mu.is_finite() || !sigma.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "truncated normal needs lo < hi and sigma > 0 (mu={mu}, lo={lo}, hi={hi}, sigma={sigma})"
        )));
    }
    let (a, b) = ((lo - mu) / sigma, (hi - mu) / sigma);
    // Work in the lower tail, where the CDF keeps its relative precision.
    let mirrored = a > 0.0;
    let (a, b) = if mirrored { (-b, -a) } else { (a, b) };
    let (pa, pb) = (phi(a), phi(b));
    for _ in 0..1000 {
        let z = if pb - pa > 1e-300 {
            let u: f64 = rng.random();
            phi_inv(pa + u * (pb - pa)).clamp(a, b)
        } else {
            tail_rejection(-b, -a, rng)
        };
        let z = if mirrored { -z } else { z };
        let x = mu + sigma * z;
        if x > lo && x < hi {
            return Ok(x);
        }
    }
    Err(Error::Numerical(format!(
        "could not sample strictly inside ({lo}, {hi})"
    )))
}

/// Rejection sampler for N(0,1) restricted to (a, b) with a > 0, returned
/// negated so the caller sees the mirrored lower-tail interval.
fn tail_rejection<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    let alpha = 0.5 * (a + (a * a + 4.0).sqrt());
    loop {
        let z = if b - a < 1.0 / alpha {
            let z = a + (b - a) * rng.random::<f64>();
            let u: f64 = rng.random();
            if u.ln() > -0.5 * (z * z - a * a) {
                continue;
            }
            z
        } else {
            let e: f64 = rng.random();
            let z = a - (1.0 - e).ln() / alpha;
            let u: f64 = rng.random();
            if z >= b || u.ln() > -0.5 * (z - alpha).powi(2) {
                continue;
            }
            z
        };
        return -z;
    }
}
