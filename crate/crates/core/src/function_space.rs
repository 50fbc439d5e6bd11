//! Functions on the sphere: zonal spectral expansions against `Q_k^λ`, zonal
//! profiles, samples on an `S^2` grid, their `L^p` norms and the test corpus.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, VpmError};
use crate::quadrature::{compensated_sum, SphereGrid, ThetaRule};
use crate::special_fn::{q_sequence, Dimension};

/// Points in the uniform θ-grid used for sup norms of zonal functions.
pub const SUP_GRID_POINTS: usize = 4096;

/// Band limit of the random band-limited corpus member.
pub const RANDBAND_DEGREE: usize = 20;

/// The exponent `p ∈ [1, ∞]` of an `L^p` norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PNorm {
    Finite(f64),
    Inf,
}

impl PNorm {
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            return Ok(PNorm::Inf);
        }
        if !(p >= 1.0) || !p.is_finite() {
            return Err(VpmError::domain(format!("norm index must lie in [1, ∞], got {p}")));
        }
        Ok(PNorm::Finite(p))
    }

    /// `1/p`, zero for `p = ∞`.
    pub fn reciprocal(self) -> f64 {
        match self {
            PNorm::Finite(p) => 1.0 / p,
            PNorm::Inf => 0.0,
        }
    }

    /// Sort key: `p` as a float, `∞` last.
    pub fn as_f64(self) -> f64 {
        match self {
            PNorm::Finite(p) => p,
            PNorm::Inf => f64::INFINITY,
        }
    }
}

impl fmt::Display for PNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PNorm::Finite(p) => write!(f, "{p}"),
            PNorm::Inf => write!(f, "inf"),
        }
    }
}

impl FromStr for PNorm {
    type Err = VpmError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(PNorm::Inf),
            other => {
                let p: f64 = other.parse().map_err(|_| VpmError::usage(format!("cannot parse norm index `{s}`")))?;
                PNorm::new(p)
            }
        }
    }
}

/// A function of the polar angle about a fixed pole.
pub trait ZonalFunction {
    /// Value at geodesic distance `theta ∈ [0, π]` from the pole.
    fn value_at(&self, theta: f64) -> f64;
}

/// Zonal function `Σ_k a_k Q_k^λ(e · μ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZonalSpectral {
    pub lambda: f64,
    pub coeffs: Vec<f64>,
}

impl ZonalSpectral {
    pub fn new(lambda: f64, coeffs: Vec<f64>) -> Self {
        ZonalSpectral { lambda, coeffs }
    }

    pub fn zeros(lambda: f64, band_limit: usize) -> Self {
        ZonalSpectral { lambda, coeffs: vec![0.0; band_limit + 1] }
    }

    /// Unit coefficient at degree `k`, i.e. the profile `Q_k^λ`.
    pub fn unit(lambda: f64, k: usize, band_limit: usize) -> Self {
        let mut f = Self::zeros(lambda, band_limit.max(k));
        f.coeffs[k] = 1.0;
        f
    }

    pub fn band_limit(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Highest degree with a nonzero coefficient (0 for the zero function).
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }

    /// Same coefficients padded with zeros (or truncated) to `band_limit`.
    pub fn resized(&self, band_limit: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(band_limit + 1, 0.0);
        ZonalSpectral { lambda: self.lambda, coeffs }
    }

    pub fn scaled(&self, c: f64) -> Self {
        ZonalSpectral { lambda: self.lambda, coeffs: self.coeffs.iter().map(|a| c * a).collect() }
    }

    /// `self - other`, padded to the longer band limit.
    pub fn sub(&self, other: &ZonalSpectral) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|k| self.coeffs.get(k).copied().unwrap_or(0.0) - other.coeffs.get(k).copied().unwrap_or(0.0))
            .collect();
        ZonalSpectral { lambda: self.lambda, coeffs }
    }

    fn eval_cos(&self, x: f64) -> f64 {
        let len = self.degree() + 1;
        let mut q = vec![0.0; len];
        q_sequence(self.lambda, x, &mut q);
        compensated_sum(q.iter().zip(&self.coeffs).map(|(q, a)| q * a))
    }
}

impl ZonalFunction for ZonalSpectral {
    fn value_at(&self, theta: f64) -> f64 {
        self.eval_cos(theta.cos())
    }
}

/// `Σ_k a_k Q_k^λ(cos γ)`.
pub fn eval_zonal(f: &ZonalSpectral, cos_gamma: f64) -> Result<f64> {
    if !(cos_gamma.abs() <= 1.0) {
        return Err(VpmError::domain(format!("cos γ must lie in [-1, 1], got {cos_gamma}")));
    }
    Ok(f.eval_cos(cos_gamma))
}

/// Shared, thread-safe profile `θ ↦ g(θ)`.
pub type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Corpus function before projection: `f(μ) = g(arc(e, μ))`.
#[derive(Clone)]
pub struct ZonalProfile {
    pub id: String,
    pub smoothness_tag: String,
    pub g: ProfileFn,
    /// Exact `Q_k^λ` coefficients when the profile is band-limited.
    pub exact_coeffs: Option<Vec<f64>>,
}

impl fmt::Debug for ZonalProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ZonalProfile")
            .field("id", &self.id)
            .field("smoothness_tag", &self.smoothness_tag)
            .field("band_limited", &self.exact_coeffs.is_some())
            .finish()
    }
}

impl ZonalFunction for ZonalProfile {
    fn value_at(&self, theta: f64) -> f64 {
        (self.g)(theta)
    }
}

impl<F: Fn(f64) -> f64> ZonalFunction for F {
    fn value_at(&self, theta: f64) -> f64 {
        self(theta)
    }
}

/// Projected coefficients with the measured reconstruction error.
#[derive(Debug, Clone)]
pub struct Projection {
    pub zonal: ZonalSpectral,
    /// `max |g - Σ a_k Q_k|` over a uniform θ-grid of 1025 points.
    pub reconstruction_error: f64,
}

/// `a_k = ∫ g Q_k sin^{2λ} / ∫ Q_k² sin^{2λ}` for `k ≤ band_limit`.
pub fn zonal_project(profile: &dyn ZonalFunction, band_limit: usize, lambda: f64, order: usize) -> Result<Projection> {
    let rule = ThetaRule::new(lambda, order)?;
    let len = band_limit + 1;
    let mut numer = vec![Vec::with_capacity(rule.order()); len];
    let mut denom = vec![Vec::with_capacity(rule.order()); len];
    let mut q = vec![0.0; len];
    for (&t, &w) in rule.theta.iter().zip(&rule.weights) {
        q_sequence(lambda, t.cos(), &mut q);
        let gw = w * profile.value_at(t);
        for k in 0..len {
            numer[k].push(gw * q[k]);
            denom[k].push(w * q[k] * q[k]);
        }
    }
    let coeffs: Vec<f64> =
        numer.into_iter().zip(denom).map(|(nk, dk)| compensated_sum(nk) / compensated_sum(dk)).collect();
    let zonal = ZonalSpectral::new(lambda, coeffs);
    let reconstruction_error = (0..=1024)
        .map(|i| {
            let t = PI * i as f64 / 1024.0;
            (profile.value_at(t) - zonal.value_at(t)).abs()
        })
        .fold(0.0, f64::max);
    Ok(Projection { zonal, reconstruction_error })
}

fn finite_norm(values: impl Iterator<Item = (f64, f64)>, p: f64) -> f64 {
    let s = compensated_sum(values.map(|(v, w)| w * v.abs().powf(p)));
    s.max(0.0).powf(1.0 / p)
}

/// Max of `|g|` over a uniform θ-grid of 4097 points including both poles,
/// resampled 256-fold around every grid maximum within 0.1% of the largest.
fn sup_abs(f: &dyn ZonalFunction) -> f64 {
    let h = PI / SUP_GRID_POINTS as f64;
    let v: Vec<f64> = (0..=SUP_GRID_POINTS).map(|i| f.value_at(h * i as f64).abs()).collect();
    let top = v.iter().copied().fold(0.0, f64::max);
    let mut best = top;
    for i in 0..v.len() {
        let left = if i > 0 { v[i - 1] } else { f64::NEG_INFINITY };
        let right = v.get(i + 1).copied().unwrap_or(f64::NEG_INFINITY);
        if v[i] < left || v[i] < right || v[i] < top * (1.0 - 1e-3) {
            continue;
        }
        let a = (h * (i as f64 - 1.0)).max(0.0);
        let b = (h * (i as f64 + 1.0)).min(PI);
        for j in 0..=256 {
            best = best.max(f.value_at(a + (b - a) * j as f64 / 256.0).abs());
        }
    }
    best
}

/// `L^p(S^{d-1})` norm of a zonal function via the polar reduction
/// `‖f‖_p^p = |S^{d-2}| ∫_0^π |g|^p sin^{d-2} θ dθ`; `p = ∞` is the max over a
/// uniform θ-grid of 4097 points, refined near its maxima.
pub fn lp_norm_zonal(f: &dyn ZonalFunction, p: PNorm, d: Dimension, order: usize) -> Result<f64> {
    match p {
        PNorm::Inf => Ok(sup_abs(f)),
        PNorm::Finite(p) => {
            let rule = ThetaRule::new(d.lambda(), order)?;
            let area = d.equator_area();
            Ok(finite_norm(rule.theta.iter().zip(&rule.weights).map(|(&t, &w)| (f.value_at(t), area * w)), p))
        }
    }
}

/// Analytic source of a grid function: `f(ν) = g(arccos(e · ν))`.
#[derive(Clone)]
pub struct ZonalSource {
    pub pole: [f64; 3],
    pub profile: ProfileFn,
}

/// A function on `S^2` sampled on a product grid.
#[derive(Clone)]
pub struct GridFunction {
    pub grid: Arc<SphereGrid>,
    pub values: Vec<f64>,
    pub source: Option<ZonalSource>,
}

impl fmt::Debug for GridFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GridFunction")
            .field("points", &self.values.len())
            .field("analytic", &self.source.is_some())
            .finish()
    }
}

pub(crate) fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn arc(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    dot3(a, b).clamp(-1.0, 1.0).acos()
}

impl GridFunction {
    pub fn from_values(grid: Arc<SphereGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(VpmError::usage(format!(
                "grid has {} points but {} values were given",
                grid.len(),
                values.len()
            )));
        }
        Ok(GridFunction { grid, values, source: None })
    }

    /// Sample the zonal function with profile `g` about `pole`.
    pub fn from_zonal(grid: Arc<SphereGrid>, pole: [f64; 3], g: ProfileFn) -> Self {
        let values = grid.points.iter().map(|p| g(arc(&pole, p))).collect();
        GridFunction { grid, values, source: Some(ZonalSource { pole, profile: g }) }
    }

    /// Off-grid evaluation through the analytic source.
    pub fn eval_at(&self, point: &[f64; 3]) -> Result<f64> {
        let src = self
            .source
            .as_ref()
            .ok_or_else(|| VpmError::usage("grid function has no analytic profile for off-grid evaluation"))?;
        Ok((src.profile)(arc(&src.pole, point)))
    }
}

/// Weighted `L^p` norm over the grid points; max for `p = ∞`.
pub fn lp_norm_grid(f: &GridFunction, p: PNorm) -> f64 {
    match p {
        PNorm::Inf => f.values.iter().fold(0.0, |m, v| m.max(v.abs())),
        PNorm::Finite(p) => finite_norm(f.values.iter().copied().zip(f.grid.point_weights.iter().copied()), p),
    }
}

/// Dot product in four fixed lanes; the summation order is fixed, so results
/// are reproducible.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for i in 0..4 {
            acc[i] += x[i] * y[i];
        }
    }
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Tabulated `Q_k^λ` on a polar quadrature rule, for repeated norm evaluations
/// of expansions up to a fixed band limit.
///
/// The nodes are a Gauss–Legendre rule on `[0, π]` plus both poles (with zero
/// weight), so the sup norm is the max over `order + 2` points.
#[derive(Debug, Clone)]
pub struct SpectralEvaluator {
    d: Dimension,
    band_limit: usize,
    theta: Vec<f64>,
    weights: Vec<f64>,
    /// Row per node, `band_limit + 1` entries each.
    table: Vec<f64>,
}

impl SpectralEvaluator {
    /// Default node count for a band limit: enough for `|f|^2` to be integrated exactly.
    pub fn default_order(band_limit: usize) -> usize {
        SUP_GRID_POINTS.max(2 * band_limit + 64)
    }

    pub fn new(d: Dimension, band_limit: usize, order: usize) -> Result<Self> {
        let lambda = d.lambda();
        let rule = ThetaRule::new(lambda, order)?;
        let area = d.equator_area();
        let mut theta = Vec::with_capacity(order + 2);
        let mut weights = Vec::with_capacity(order + 2);
        theta.push(0.0);
        weights.push(0.0);
        theta.extend_from_slice(&rule.theta);
        weights.extend(rule.weights.iter().map(|w| w * area));
        theta.push(PI);
        weights.push(0.0);
        let width = band_limit + 1;
        let mut table = vec![0.0; width * theta.len()];
        for (row, &t) in table.chunks_mut(width).zip(&theta) {
            q_sequence(lambda, t.cos(), row);
        }
        Ok(SpectralEvaluator { d, band_limit, theta, weights, table })
    }

    pub fn dimension(&self) -> Dimension {
        self.d
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    pub fn nodes(&self) -> &[f64] {
        &self.theta
    }

    /// Values of the expansion at every node.
    pub fn values(&self, f: &ZonalSpectral) -> Result<Vec<f64>> {
        let degree = f.degree();
        if degree > self.band_limit {
            return Err(VpmError::usage(format!(
                "expansion of degree {degree} exceeds the evaluator band limit {}",
                self.band_limit
            )));
        }
        let width = self.band_limit + 1;
        let coeffs = &f.coeffs[..=degree.min(f.coeffs.len().saturating_sub(1))];
        Ok(self.table.chunks(width).map(|row| dot(&row[..coeffs.len()], coeffs)).collect())
    }

    /// Norms of `f` for each exponent in `ps`, from a single evaluation pass.
    pub fn norms_for(&self, f: &ZonalSpectral, ps: &[PNorm]) -> Result<Vec<f64>> {
        let v = self.values(f)?;
        Ok(ps.iter().map(|&p| self.norm_of_values(&v, p)).collect())
    }

    pub fn norm_of_values(&self, v: &[f64], p: PNorm) -> f64 {
        match p {
            PNorm::Inf => v.iter().fold(0.0, |m: f64, x| m.max(x.abs())),
            PNorm::Finite(1.0) => compensated_sum(v.iter().zip(&self.weights).map(|(x, w)| w * x.abs())),
            PNorm::Finite(2.0) => compensated_sum(v.iter().zip(&self.weights).map(|(x, w)| w * x * x)).max(0.0).sqrt(),
            PNorm::Finite(p) => finite_norm(v.iter().copied().zip(self.weights.iter().copied()), p),
        }
    }

    pub fn norm(&self, f: &ZonalSpectral, p: PNorm) -> Result<f64> {
        let v = self.values(f)?;
        Ok(self.norm_of_values(&v, p))
    }
}

/// Parsed corpus function id.
#[derive(Debug, Clone, PartialEq)]
pub enum CorpusKind {
    /// `harmonic:k`, the profile `Q_k^λ`.
    Harmonic(usize),
    /// `cusp:α`, the geodesic distance profile `θ^α`.
    Cusp(f64),
    /// `bump`, `exp(-4θ²)`.
    Bump,
    /// `randband:seedN`, i.i.d. uniform coefficients on degrees `0..=20`.
    RandBand(u64),
    /// `const`, the constant 1.
    Constant,
}

impl CorpusKind {
    pub fn parse(id: &str) -> Result<Self> {
        let unknown = || VpmError::UnknownFunction(id.to_string());
        let (head, arg) = match id.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (id, None),
        };
        match (head, arg) {
            ("harmonic", Some(a)) => a.parse().map(CorpusKind::Harmonic).map_err(|_| unknown()),
            ("cusp", Some(a)) => match a.parse::<f64>() {
                Ok(alpha) if alpha > 0.0 && alpha.is_finite() => Ok(CorpusKind::Cusp(alpha)),
                _ => Err(unknown()),
            },
            ("bump", None) => Ok(CorpusKind::Bump),
            ("const", None) => Ok(CorpusKind::Constant),
            ("randband", Some(a)) => {
                a.strip_prefix("seed").and_then(|s| s.parse().ok()).map(CorpusKind::RandBand).ok_or_else(unknown)
            }
            _ => Err(unknown()),
        }
    }

    pub fn id(&self) -> String {
        match self {
            CorpusKind::Harmonic(k) => format!("harmonic:{k}"),
            CorpusKind::Cusp(a) => format!("cusp:{a:?}"),
            CorpusKind::Bump => "bump".into(),
            CorpusKind::RandBand(seed) => format!("randband:seed{seed}"),
            CorpusKind::Constant => "const".into(),
        }
    }

    fn smoothness_tag(&self) -> String {
        match self {
            CorpusKind::Harmonic(_) | CorpusKind::RandBand(_) | CorpusKind::Constant => "band_limited".into(),
            CorpusKind::Cusp(a) => format!("holder:{a:?}"),
            CorpusKind::Bump => "analytic".into(),
        }
    }
}

/// Coefficients of the random band-limited corpus member.
pub fn randband_coeffs(seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..=RANDBAND_DEGREE).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

/// Build the profile for a corpus id at dimension `d`.
pub fn corpus_profile(id: &str, d: Dimension) -> Result<ZonalProfile> {
    let kind = CorpusKind::parse(id)?;
    let lambda = d.lambda();
    let (g, exact): (ProfileFn, Option<Vec<f64>>) = match kind {
        CorpusKind::Harmonic(k) => {
            let coeffs = ZonalSpectral::unit(lambda, k, k);
            (Arc::new(move |t: f64| coeffs.value_at(t)), Some(unit_vec(k)))
        }
        CorpusKind::Cusp(alpha) => (Arc::new(move |t: f64| t.powf(alpha)), None),
        CorpusKind::Bump => (Arc::new(|t: f64| (-4.0 * t * t).exp()), None),
        CorpusKind::RandBand(seed) => {
            let coeffs = randband_coeffs(seed);
            let f = ZonalSpectral::new(lambda, coeffs.clone());
            (Arc::new(move |t: f64| f.value_at(t)), Some(coeffs))
        }
        CorpusKind::Constant => (Arc::new(|_| 1.0), Some(vec![1.0])),
    };
    Ok(ZonalProfile { id: kind.id(), smoothness_tag: kind.smoothness_tag(), g, exact_coeffs: exact })
}

fn unit_vec(k: usize) -> Vec<f64> {
    let mut v = vec![0.0; k + 1];
    v[k] = 1.0;
    v
}

/// Ids of the standard corpus for a given random seed.
pub fn default_corpus_ids(seed: u64) -> Vec<String> {
    let mut ids: Vec<String> = [1usize, 4, 16].iter().map(|k| CorpusKind::Harmonic(*k).id()).collect();
    ids.extend([0.5, 1.0, 1.5].iter().map(|a| CorpusKind::Cusp(*a).id()));
    ids.push(CorpusKind::Bump.id());
    ids.push(CorpusKind::RandBand(seed).id());
    ids
}

/// Single harmonics `k ∈ {1, 4, 16}`, cusps `α ∈ {0.5, 1, 1.5}`, the smooth
/// bump and the seed-42 random band-limited function.
pub fn make_corpus(d: Dimension) -> Result<Vec<ZonalProfile>> {
    default_corpus_ids(42).iter().map(|id| corpus_profile(id, d)).collect()
}

/// A corpus function resolved to a spectral expansion.
#[derive(Debug, Clone)]
pub struct ResolvedFunction {
    pub profile: ZonalProfile,
    pub spectral: ZonalSpectral,
    /// Zero for band-limited profiles.
    pub truncation_error: f64,
}

/// Spectral workspace at fixed dimension and band limit: resolves corpus ids
/// into expansions and evaluates their norms.
#[derive(Debug)]
pub struct SpectralSpace {
    pub evaluator: SpectralEvaluator,
    projection_order: usize,
    resolved: BTreeMap<String, ResolvedFunction>,
}

impl SpectralSpace {
    pub fn new(d: Dimension, band_limit: usize) -> Result<Self> {
        Self::with_orders(d, band_limit, SpectralEvaluator::default_order(band_limit), 2 * band_limit + 64)
    }

    pub fn with_orders(d: Dimension, band_limit: usize, norm_order: usize, projection_order: usize) -> Result<Self> {
        Ok(SpectralSpace {
            evaluator: SpectralEvaluator::new(d, band_limit, norm_order)?,
            projection_order,
            resolved: BTreeMap::new(),
        })
    }

    pub fn dimension(&self) -> Dimension {
        self.evaluator.dimension()
    }

    pub fn band_limit(&self) -> usize {
        self.evaluator.band_limit()
    }

    pub fn projection_order(&self) -> usize {
        self.projection_order
    }

    pub fn resolve(&mut self, id: &str) -> Result<&ResolvedFunction> {
        let key = CorpusKind::parse(id)?.id();
        if !self.resolved.contains_key(&key) {
            let profile = corpus_profile(&key, self.dimension())?;
            let lambda = self.dimension().lambda();
            let k_max = self.band_limit();
            let (spectral, truncation_error) = match &profile.exact_coeffs {
                Some(c) if c.len() <= k_max + 1 => (ZonalSpectral::new(lambda, c.clone()).resized(k_max), 0.0),
                Some(c) => {
                    return Err(VpmError::usage(format!(
                        "{key} has degree {} beyond the band limit {k_max}",
                        c.len() - 1
                    )))
                }
                None => {
                    let p = zonal_project(&profile, k_max, lambda, self.projection_order)?;
                    (p.zonal, p.reconstruction_error)
                }
            };
            self.resolved.insert(key.clone(), ResolvedFunction { profile, spectral, truncation_error });
        }
        Ok(&self.resolved[&key])
    }

    pub fn norms_for(&self, f: &ZonalSpectral, ps: &[PNorm]) -> Result<Vec<f64>> {
        self.evaluator.norms_for(f, ps)
    }
}
