//! Special functions: log-Gamma, harmonic space dimensions and the
//! Gegenbauer (ultraspherical) polynomials `P_k^λ` together with their
//! normalized variants `Q_k^λ = P_k^λ / P_k^λ(1)`.

use std::f64::consts::PI;

use crate::error::{Result, VpmError};

const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// Stirling series coefficients `B_{2j} / (2j (2j - 1))`, j = 1..8.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// Arguments below this are shifted upwards before the Stirling series is used.
const STIRLING_CUTOFF: f64 = 15.0;

/// Ambient dimension `d ≥ 3` of the sphere `S^{d-1} ⊂ R^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dimension(u32);

impl Dimension {
    pub fn new(d: u32) -> Result<Self> {
        if d < 3 {
            return Err(VpmError::domain(format!("dimension must be at least 3, got {d}")));
        }
        Ok(Dimension(d))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// Gegenbauer index `λ = (d - 2) / 2`.
    pub fn lambda(self) -> f64 {
        (self.0 as f64 - 2.0) / 2.0
    }

    /// Laplace–Beltrami eigenvalue `-k (k + d - 2)` of the degree-k harmonics.
    pub fn eigenvalue(self, k: usize) -> f64 {
        let k = k as f64;
        -k * (k + self.0 as f64 - 2.0)
    }

    /// Surface area of `S^{d-1}`.
    pub fn sphere_area(self) -> f64 {
        sphere_area(self.0)
    }

    /// Surface area of the equatorial sphere `S^{d-2}`, the normalizer of the
    /// translation mean and of the de la Vallée Poussin convolution.
    pub fn equator_area(self) -> f64 {
        sphere_area(self.0 - 1)
    }
}

impl std::fmt::Display for Dimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `ln Γ(x)` for `x > 0`.
///
/// Arguments below 15 are shifted up with `Γ(x + 1) = x Γ(x)`; the shifted
/// value is evaluated with eight terms of the Stirling series.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(VpmError::domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(log_gamma_unchecked(x))
}

pub(crate) fn log_gamma_unchecked(x: f64) -> f64 {
    if x >= STIRLING_CUTOFF {
        return stirling(x);
    }
    let mut shifted = x;
    let mut product = 1.0;
    while shifted < STIRLING_CUTOFF {
        product *= shifted;
        shifted += 1.0;
    }
    stirling(shifted) - product.ln()
}

fn stirling_series(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut series = 0.0;
    for c in STIRLING.iter().rev() {
        series = series * inv2 + c;
    }
    series * inv
}

fn stirling(x: f64) -> f64 {
    (x - 0.5) * x.ln() - x + HALF_LN_TWO_PI + stirling_series(x)
}

/// `ln Γ(a) - ln Γ(b)` for `a, b > 0`.
///
/// For large arguments the leading Stirling terms are combined before
/// rounding, `(a - 1/2) ln a - (b - 1/2) ln b = δ ln b + (a - 1/2) ln(1 + δ/b)`
/// with `δ = a - b`, so the difference keeps its relative accuracy even when
/// both logarithms are in the thousands.
pub fn log_gamma_diff(a: f64, b: f64) -> f64 {
    if a.min(b) < STIRLING_CUTOFF {
        return log_gamma_unchecked(a) - log_gamma_unchecked(b);
    }
    let delta = a - b;
    delta * b.ln() + (a - 0.5) * (delta / b).ln_1p() - delta + (stirling_series(a) - stirling_series(b))
}

/// `ln B(a, b)` for `a, b > 0`.
pub fn log_beta(a: f64, b: f64) -> Result<f64> {
    Ok(log_gamma(a)? + log_gamma(b)? - log_gamma(a + b)?)
}

/// Surface area `2 π^{m/2} / Γ(m/2)` of the unit sphere in `R^m`, `m ≥ 1`.
pub fn sphere_area(m: u32) -> f64 {
    let half = m as f64 / 2.0;
    (2.0f64.ln() + half * PI.ln() - log_gamma_unchecked(half)).exp()
}

/// `∫_0^π sin^{2λ} θ dθ = √π Γ(λ + 1/2) / Γ(λ + 1)`.
pub fn sin_power_integral(lambda: f64) -> f64 {
    (0.5 * PI.ln() + log_gamma_unchecked(lambda + 0.5) - log_gamma_unchecked(lambda + 1.0)).exp()
}

/// Dimension of the space of degree-k spherical harmonics on `S^{d-1}`:
/// `(2k + d - 2) / (k + d - 2) · C(k + d - 2, k)`, and 1 for `k = 0`.
pub fn harmonic_dim(k: u64, d: u32) -> Result<u64> {
    if d < 3 {
        return Err(VpmError::domain(format!("harmonic_dim requires d >= 3, got {d}")));
    }
    if k == 0 {
        return Ok(1);
    }
    let d = d as u64;
    let overflow = || VpmError::domain(format!("harmonic_dim({k}, {d}) overflows u64"));
    let top = k + d - 2;
    let binom = binomial(top, k).ok_or_else(overflow)?;
    let scaled = binom.checked_mul((2 * k + d - 2) as u128).ok_or_else(overflow)?;
    u64::try_from(scaled / top as u128).map_err(|_| overflow())
}

fn binomial(n: u64, k: u64) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact: acc * (n - i) is divisible by (i + 1) at every step
        acc = acc.checked_mul((n - i) as u128)? / (i + 1) as u128;
    }
    Some(acc)
}

/// Validated `(λ, k)` pair for the Gegenbauer family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GegenbauerParams {
    pub lambda: f64,
    pub k: usize,
}

impl GegenbauerParams {
    pub fn new(lambda: f64, k: usize) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(GegenbauerParams { lambda, k })
    }

    pub fn p(&self, x: f64) -> Result<f64> {
        gegenbauer_p(self.k, self.lambda, x)
    }

    pub fn q(&self, theta: f64) -> Result<f64> {
        q_normalized(self.k, self.lambda, theta)
    }

    /// `P_k^λ(1) = Γ(k + 2λ) / (k! Γ(2λ))`.
    pub fn value_at_one(&self) -> f64 {
        gegenbauer_at_one(self.k, self.lambda)
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.5) || !lambda.is_finite() {
        return Err(VpmError::domain(format!("Gegenbauer index must be >= 1/2, got {lambda}")));
    }
    Ok(())
}

/// `P_k^λ(x)` by upward three-term recurrence from `P_0 = 1`, `P_1 = 2λx`.
pub fn gegenbauer_p(k: usize, lambda: f64, x: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if !(x.abs() <= 1.0) {
        return Err(VpmError::domain(format!("Gegenbauer argument must lie in [-1, 1], got {x}")));
    }
    let mut prev = 1.0;
    if k == 0 {
        return Ok(prev);
    }
    let mut cur = 2.0 * lambda * x;
    for j in 1..k {
        let jf = j as f64;
        let next = (2.0 * (lambda + jf) * x * cur - (2.0 * lambda + jf - 1.0) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// `P_k^λ(1)` via log-Gamma differences.
pub fn gegenbauer_at_one(k: usize, lambda: f64) -> f64 {
    let k = k as f64;
    (log_gamma_diff(k + 2.0 * lambda, k + 1.0) - log_gamma_unchecked(2.0 * lambda)).exp()
}

/// `Q_k^λ(cos θ)`.
///
/// Evaluated with the recurrence of `P_k^λ` rescaled by `P_k^λ(1)`, which keeps
/// every iterate in `[-1, 1]`:
/// `Q_{k+1} = (2(λ + k) x Q_k - k Q_{k-1}) / (k + 2λ)`.
pub fn q_normalized(k: usize, lambda: f64, theta: f64) -> Result<f64> {
    check_lambda(lambda)?;
    check_angle(theta)?;
    Ok(q_single(k, lambda, theta.cos()))
}

fn check_angle(theta: f64) -> Result<()> {
    if !(0.0..=PI).contains(&theta) {
        return Err(VpmError::domain(format!("angle must lie in [0, π], got {theta}")));
    }
    Ok(())
}

fn q_single(k: usize, lambda: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if k == 0 {
        return prev;
    }
    let mut cur = x;
    for j in 1..k {
        let next = q_step(j, lambda, x, cur, prev);
        prev = cur;
        cur = next;
    }
    cur
}

#[inline]
fn q_step(j: usize, lambda: f64, x: f64, cur: f64, prev: f64) -> f64 {
    let jf = j as f64;
    (2.0 * (lambda + jf) * x * cur - jf * prev) / (jf + 2.0 * lambda)
}

/// Fill `out[k] = Q_k^λ(x)` for `k = 0..out.len()`. No domain checks.
pub fn q_sequence(lambda: f64, x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() == 1 {
        return;
    }
    out[1] = x;
    for j in 1..out.len() - 1 {
        out[j + 1] = q_step(j, lambda, x, out[j], out[j - 1]);
    }
}

/// Decay envelope `min((kθ)^{-λ}, 1)` of the normalized Gegenbauer polynomials.
pub fn q_envelope(k: usize, lambda: f64, theta: f64) -> Result<f64> {
    if k == 0 {
        return Err(VpmError::domain("envelope requires k >= 1"));
    }
    if !(theta > 0.0) || theta > PI {
        return Err(VpmError::domain(format!("envelope requires θ in (0, π], got {theta}")));
    }
    Ok((k as f64 * theta).powf(-lambda).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn log_gamma_known_values() {
        assert!(log_gamma(1.0).unwrap().abs() < 1e-13);
        assert!(log_gamma(2.0).unwrap().abs() < 1e-13);
        assert_relative_eq!(log_gamma(0.5).unwrap(), 0.5 * PI.ln(), max_relative = 1e-13);
        assert_relative_eq!(log_gamma(5.0).unwrap(), 24f64.ln(), max_relative = 1e-13);
        assert_relative_eq!(log_gamma(1.5).unwrap(), (0.5 * PI.sqrt()).ln(), max_relative = 1e-13);
        // ln(170!) from the exact factorial product
        let ln_fact: f64 = (1..=170).map(|j| (j as f64).ln()).sum();
        assert_relative_eq!(log_gamma(171.0).unwrap(), ln_fact, max_relative = 1e-13);
        // Stirling at 1e6 against a direct evaluation with the leading terms only
        let x = 1e6f64;
        let lead = (x - 0.5) * x.ln() - x + HALF_LN_TWO_PI + 1.0 / (12.0 * x);
        assert_relative_eq!(log_gamma(x).unwrap(), lead, max_relative = 1e-15);
    }

    #[test]
    fn log_gamma_rejects_nonpositive() {
        assert!(matches!(log_gamma(0.0), Err(VpmError::Domain(_))));
        assert!(matches!(log_gamma(-2.5), Err(VpmError::Domain(_))));
        assert!(log_gamma(f64::NAN).is_err());
    }

    #[test]
    fn log_gamma_differences() {
        for &(a, b) in &[(1001.0, 1000.0), (513.0, 514.0), (20.5, 16.0), (3.0, 700.0)] {
            let naive = log_gamma(a).unwrap() - log_gamma(b).unwrap();
            assert!((log_gamma_diff(a, b) - naive).abs() < 1e-12 * naive.abs().max(1.0));
        }
        assert!((log_gamma_diff(1001.0, 1000.0) - 1000f64.ln()).abs() < 1e-15);
        assert!((log_gamma_diff(514.0, 513.0) - 513f64.ln()).abs() < 1e-15);
        // ln Γ(x + 1/2) - ln Γ(x) = ln(x)/2 - 1/(8x) + O(x^-3)
        let x = 1e6f64;
        assert!((log_gamma_diff(x + 0.5, x) - (0.5 * x.ln() - 0.125 / x)).abs() < 1e-15);
    }

    #[test]
    fn log_gamma_recurrence() {
        let mut x = 0.013;
        while x < 2000.0 {
            let lhs = log_gamma(x + 1.0).unwrap();
            let rhs = log_gamma(x).unwrap() + x.ln();
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0), "x = {x}");
            x *= 1.37;
        }
    }

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(sphere_area(2), 2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(3), 4.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(4), 2.0 * PI * PI, max_relative = 1e-14);
        assert_relative_eq!(sin_power_integral(0.5), 2.0, max_relative = 1e-14);
        assert_relative_eq!(sin_power_integral(1.0), PI / 2.0, max_relative = 1e-14);
    }

    #[test]
    fn harmonic_dimensions() {
        assert_eq!(harmonic_dim(0, 3).unwrap(), 1);
        for k in 0..50 {
            assert_eq!(harmonic_dim(k, 3).unwrap(), 2 * k + 1);
        }
        assert_eq!(harmonic_dim(2, 3).unwrap(), 5);
        assert_eq!(harmonic_dim(1, 4).unwrap(), 4);
        // d = 4: (k + 1)^2
        for k in 0..30 {
            assert_eq!(harmonic_dim(k, 4).unwrap(), (k + 1) * (k + 1));
        }
        assert!(harmonic_dim(3, 2).is_err());
    }

    #[test]
    fn gegenbauer_examples() {
        assert_eq!(gegenbauer_p(0, 1.3, 0.2).unwrap(), 1.0);
        assert_relative_eq!(gegenbauer_p(2, 0.5, 0.0).unwrap(), -0.5, max_relative = 1e-15);
        assert_relative_eq!(gegenbauer_p(3, 1.0, 1.0).unwrap(), 4.0, max_relative = 1e-15);
        assert_relative_eq!(gegenbauer_at_one(3, 1.0), 4.0, max_relative = 1e-13);
        assert!(gegenbauer_p(2, 0.5, 1.01).is_err());
        assert!(gegenbauer_p(2, 0.2, 0.5).is_err());
    }

    #[test]
    fn normalized_matches_ratio() {
        for &lambda in &[0.5, 1.0, 1.5, 2.5] {
            for k in 0..60 {
                let p1 = gegenbauer_at_one(k, lambda);
                assert_relative_eq!(gegenbauer_p(k, lambda, 1.0).unwrap(), p1, max_relative = 1e-11);
                for &theta in &[0.1, 0.7, 1.9, 3.0] {
                    let q = q_normalized(k, lambda, theta).unwrap();
                    let ratio = gegenbauer_p(k, lambda, theta.cos()).unwrap() / p1;
                    assert!((q - ratio).abs() < 1e-11, "k={k} λ={lambda} θ={theta}");
                }
            }
        }
    }

    #[test]
    fn q_examples() {
        assert_eq!(q_normalized(7, 1.5, 0.0).unwrap(), 1.0);
        assert_relative_eq!(q_normalized(1, 1.0, 0.4).unwrap(), 0.4f64.cos(), max_relative = 1e-15);
        assert_relative_eq!(q_normalized(2, 0.5, PI / 2.0).unwrap(), -0.5, max_relative = 1e-14);
        assert!(q_normalized(2, 0.5, -0.1).is_err());
        let mut seq = vec![0.0; 12];
        q_sequence(1.5, 0.3f64.cos(), &mut seq);
        for (k, q) in seq.iter().enumerate() {
            assert_relative_eq!(*q, q_normalized(k, 1.5, 0.3).unwrap(), max_relative = 1e-14);
        }
    }

    #[test]
    fn envelope_examples() {
        assert_eq!(q_envelope(3, 1.0, 0.2).unwrap(), 1.0);
        assert_relative_eq!(q_envelope(4, 0.5, 1.0).unwrap(), 0.5, max_relative = 1e-15);
        assert_relative_eq!(q_envelope(100, 1.0, 0.5).unwrap(), 0.02, max_relative = 1e-15);
        assert!(q_envelope(3, 1.0, 0.0).is_err());
        assert!(q_envelope(0, 1.0, 0.5).is_err());
    }

    #[test]
    fn generating_function() {
        for &lambda in &[0.5, 1.0, 1.5] {
            for &r in &[0.1f64, 0.3, 0.5] {
                for i in 0..=16 {
                    let theta = PI * i as f64 / 16.0;
                    let x = theta.cos();
                    let exact = (1.0 - 2.0 * r * x + r * r).powf(-lambda);
                    let mut sum = 0.0;
                    let mut last_err = f64::INFINITY;
                    for k in 0..=80 {
                        sum += r.powi(k as i32) * gegenbauer_p(k, lambda, x).unwrap();
                        if k % 20 == 19 {
                            let err = (sum - exact).abs();
                            assert!(err <= last_err.max(1e-14));
                            last_err = err;
                        }
                    }
                    assert!(last_err < 1e-12, "λ={lambda} r={r} θ={theta}: {last_err}");
                }
            }
        }
    }
}
