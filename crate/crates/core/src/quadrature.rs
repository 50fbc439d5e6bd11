//! Gauss–Legendre rules, weighted integrals over the polar angle and a
//! product quadrature grid on `S^2`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Result, VpmError};

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

/// Neumaier-compensated sum in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            carry += (sum - s) + t;
        } else {
            carry += (t - s) + sum;
        }
        sum = s;
    }
    sum + carry
}

/// An n-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Nodes in strictly increasing order.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// `∫_{-1}^{1} f(x) dx`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        compensated_sum(self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)))
    }

    /// Nodes and weights mapped affinely onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (mid + half * x, half * w))
    }

    /// `∫_a^b f(x) dx`.
    pub fn integrate_on<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        compensated_sum(self.mapped(a, b).map(|(x, w)| w * f(x)))
    }
}

/// Legendre `P_n(x)` and `P_{n-1}(x)` by the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut prev = 1.0;
    let mut cur = x;
    for j in 1..n {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0) * x * cur - jf * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// The `order`-point Gauss–Legendre rule, nodes by Newton iteration on `P_order`
/// started from Tricomi's asymptotic approximation.
pub fn gauss_legendre(order: usize) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(VpmError::domain("Gauss–Legendre order must be at least 1"));
    }
    let n = order;
    let nf = n as f64;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let shrink = 1.0 - 1.0 / (8.0 * nf * nf) + 1.0 / (8.0 * nf * nf * nf);
    for i in 0..n.div_ceil(2) {
        let mut x = shrink * (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        if n % 2 == 1 && i == n / 2 {
            x = 0.0;
        }
        let mut dp = 0.0;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, p1) = legendre_pair(n, x);
            dp = nf * (x * p - p1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= NEWTON_TOL {
                break;
            }
        }
        let (p, p1) = legendre_pair(n, x);
        if p.is_finite() {
            dp = nf * (x * p - p1) / (x * x - 1.0);
        }
        let w = 2.0 / ((1.0 - x) * (1.0 + x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    Ok(QuadratureRule { nodes, weights })
}

/// Process-wide cache of Gauss–Legendre rules keyed by order.
pub fn shared_gauss_legendre(order: usize) -> Result<Arc<QuadratureRule>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<QuadratureRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().expect("quadrature cache poisoned").get(&order) {
        return Ok(Arc::clone(rule));
    }
    let rule = Arc::new(gauss_legendre(order)?);
    cache.lock().expect("quadrature cache poisoned").insert(order, Arc::clone(&rule));
    Ok(rule)
}

/// Gauss–Legendre mapped onto `[0, π]` with the weight `sin^{2λ} θ` folded in.
#[derive(Debug, Clone)]
pub struct ThetaRule {
    pub lambda: f64,
    pub theta: Vec<f64>,
    pub weights: Vec<f64>,
}

impl ThetaRule {
    pub fn new(lambda: f64, order: usize) -> Result<Self> {
        let rule = shared_gauss_legendre(order)?;
        let (theta, weights) = rule.mapped(0.0, PI).map(|(t, w)| (t, w * t.sin().powf(2.0 * lambda))).unzip();
        Ok(ThetaRule { lambda, theta, weights })
    }

    pub fn order(&self) -> usize {
        self.theta.len()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        compensated_sum(self.theta.iter().zip(&self.weights).map(|(&t, &w)| w * g(t)))
    }
}

/// `∫_0^π g(θ) sin^{2λ} θ dθ` with an `order`-point mapped Gauss–Legendre rule.
pub fn integrate_theta<F: Fn(f64) -> f64>(g: F, lambda: f64, order: usize) -> Result<f64> {
    Ok(ThetaRule::new(lambda, order)?.integrate(g))
}

/// Result of a refinement loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refined {
    pub value: f64,
    /// Order of the last rule used.
    pub order: usize,
    /// Relative change between the last two refinements.
    pub rel_change: f64,
}

/// `integrate_theta` with the order doubled until two successive values agree
/// to `rel_tol` relative. Fails if `max_order` is reached first.
pub fn integrate_theta_refined<F: Fn(f64) -> f64>(
    g: F,
    lambda: f64,
    start_order: usize,
    rel_tol: f64,
    max_order: usize,
) -> Result<Refined> {
    let mut order = start_order.max(1);
    let mut prev = integrate_theta(&g, lambda, order)?;
    while order * 2 <= max_order {
        order *= 2;
        let value = integrate_theta(&g, lambda, order)?;
        let rel_change = (value - prev).abs() / value.abs().max(f64::MIN_POSITIVE);
        if rel_change <= rel_tol {
            return Ok(Refined { value, order, rel_change });
        }
        prev = value;
    }
    Err(VpmError::domain(format!("integral did not settle to {rel_tol:e} before order {max_order}")))
}

/// Product grid on `S^2`: Gauss–Legendre in `cos θ` times equispaced azimuths.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    bands: usize,
    /// Polar angles in increasing order, one per band.
    pub polar_nodes: Vec<f64>,
    pub azimuth_count: usize,
    /// Steradian weight of each point.
    pub point_weights: Vec<f64>,
    pub points: Vec<[f64; 3]>,
}

impl SphereGrid {
    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Flat index of the point in polar ring `ring` and azimuth slot `slot`.
    pub fn index(&self, ring: usize, slot: usize) -> usize {
        ring * self.azimuth_count + slot
    }

    /// `∫_{S^2} f dσ` for samples aligned with `points`.
    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        compensated_sum(self.point_weights.iter().zip(values).map(|(w, v)| w * v))
    }
}

/// Product grid with `bands` polar nodes and `2·bands` azimuths; exact for
/// spherical polynomials of degree `≤ 2·bands − 1`.
pub fn sphere_grid(bands: usize) -> Result<SphereGrid> {
    if bands == 0 {
        return Err(VpmError::domain("sphere grid needs at least one band"));
    }
    let rule = shared_gauss_legendre(bands)?;
    let azimuth_count = 2 * bands;
    let dphi = 2.0 * PI / azimuth_count as f64;
    let mut polar_nodes = Vec::with_capacity(bands);
    let mut points = Vec::with_capacity(bands * azimuth_count);
    let mut point_weights = Vec::with_capacity(bands * azimuth_count);
    // descending cos θ gives ascending θ
    for (&x, &w) in rule.nodes().iter().zip(rule.weights()).rev() {
        polar_nodes.push(x.acos());
        let s = ((1.0 - x) * (1.0 + x)).sqrt();
        for j in 0..azimuth_count {
            let phi = dphi * j as f64;
            points.push([s * phi.cos(), s * phi.sin(), x]);
            point_weights.push(w * dphi);
        }
    }
    Ok(SphereGrid { bands, polar_nodes, azimuth_count, point_weights, points })
}
