//! The de la Vallée Poussin kernel `v_n(θ) = cos^{2n}(θ/2) / I_{n,d}`, its
//! multiplier weights and the weighted moments used to bound it.

use std::f64::consts::{LN_2, PI};

use serde::Serialize;

use crate::error::{Result, VpmError};
use crate::quadrature::{integrate_theta, integrate_theta_refined, shared_gauss_legendre, ThetaRule};
use crate::special_fn::{log_gamma_diff, log_gamma_unchecked as lg, q_normalized, Dimension};

/// Order of the two inner rules in the nested `α(n)` integral.
pub const ALPHA_INNER_ORDER: usize = 48;

/// Relative agreement demanded of successive refinements for singular moments.
pub const MOMENT_REL_TOL: f64 = 1e-8;

const MOMENT_MAX_ORDER: usize = 1 << 15;

/// Quadrature order used for integrals of `v_n · Q_k`.
pub fn default_order(n: usize, k: usize) -> usize {
    n + k + 32
}

/// `ln I_{n,d}` with `I_{n,d} = 2^{2λ} Γ(λ + 1/2) Γ(n + λ + 1/2) / Γ(n + 2λ + 1)`.
pub fn kernel_norm_constant(n: usize, d: Dimension) -> f64 {
    let lambda = d.lambda();
    let n = n as f64;
    2.0 * lambda * LN_2 + lg(lambda + 0.5) + log_gamma_diff(n + lambda + 0.5, n + 2.0 * lambda + 1.0)
}

/// Identity of one de la Vallée Poussin operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub n: usize,
    pub d: Dimension,
    pub lambda: f64,
    /// `ln I_{n,d}`.
    pub log_norm: f64,
}

impl KernelSpec {
    pub fn new(n: usize, d: Dimension) -> Self {
        KernelSpec { n, d, lambda: d.lambda(), log_norm: kernel_norm_constant(n, d) }
    }

    /// `v_n(θ)` for `θ ∈ [0, π]`.
    pub fn eval(&self, theta: f64) -> Result<f64> {
        if !(0.0..=PI).contains(&theta) {
            return Err(VpmError::domain(format!("kernel angle must lie in [0, π], got {theta}")));
        }
        Ok(self.eval_unchecked(theta))
    }

    pub(crate) fn eval_unchecked(&self, theta: f64) -> f64 {
        if self.n == 0 {
            return (-self.log_norm).exp();
        }
        let c = (0.5 * theta).cos();
        if c <= 0.0 || theta >= PI {
            return 0.0;
        }
        (2.0 * self.n as f64 * c.ln() - self.log_norm).exp()
    }

    /// `v_n` as a function of `cos θ`, without the `arccos` round trip:
    /// `cos²(θ/2) = (1 + cos θ) / 2`.
    pub fn eval_cos(&self, cos_theta: f64) -> f64 {
        let half = (0.5 * (1.0 + cos_theta)).clamp(0.0, 1.0);
        if self.n == 0 {
            return (-self.log_norm).exp();
        }
        if half == 0.0 {
            return 0.0;
        }
        (self.n as f64 * half.ln() - self.log_norm).exp()
    }
}

/// `v_n(θ)`; see [`KernelSpec::eval`].
pub fn vpm_kernel_eval(spec: &KernelSpec, theta: f64) -> Result<f64> {
    spec.eval(theta)
}

/// Closed-form multiplier `ω_{n,k} = n!(n+2λ)! / ((n-k)!(n+k+2λ)!)` for `k ≤ n`, else 0.
pub fn multiplier_weight(n: usize, k: usize, lambda: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    let (nf, kf) = (n as f64, k as f64);
    let tl = 2.0 * lambda;
    (log_gamma_diff(nf + 1.0, nf - kf + 1.0) + log_gamma_diff(nf + tl + 1.0, nf + kf + tl + 1.0)).exp()
}

/// `∫_0^π v_n(θ) Q_k^λ(cos θ) sin^{2λ} θ dθ` by quadrature.
pub fn multiplier_via_quadrature(n: usize, k: usize, d: Dimension, order: usize) -> Result<f64> {
    let spec = KernelSpec::new(n, d);
    let lambda = d.lambda();
    integrate_theta(|t| spec.eval_unchecked(t) * q_normalized(k, lambda, t).unwrap_or(0.0), lambda, order)
}

/// `∫_0^t sin^{2λ} u du` on each point of `ts`, one inner rule per point.
fn sin_power_primitive(ts: impl Iterator<Item = f64>, lambda: f64, order: usize) -> Result<Vec<f64>> {
    let rule = shared_gauss_legendre(order)?;
    Ok(ts.map(|t| rule.integrate_on(0.0, t, |u| u.sin().powf(2.0 * lambda))).collect())
}

/// The Voronovskaya coefficient
/// `α(n) = ∫_0^π v_n(θ) sin^{2λ}θ ∫_0^θ sin^{-2λ}t ∫_0^t sin^{2λ}u du dt dθ`
/// by nested mapped Gauss rules (`order` outer nodes).
pub fn alpha_voronovskaya(n: usize, d: Dimension, order: usize) -> Result<f64> {
    if n == 0 {
        return Err(VpmError::domain("α(n) is defined for n >= 1"));
    }
    let spec = KernelSpec::new(n, d);
    let lambda = d.lambda();
    let outer = ThetaRule::new(lambda, order)?;
    let middle = shared_gauss_legendre(ALPHA_INNER_ORDER)?;
    let mut inner_primitive = Vec::with_capacity(outer.order());
    for &theta in &outer.theta {
        let nodes: Vec<(f64, f64)> = middle.mapped(0.0, theta).collect();
        let g = sin_power_primitive(nodes.iter().map(|&(t, _)| t), lambda, ALPHA_INNER_ORDER)?;
        let f: f64 = crate::quadrature::compensated_sum(
            nodes.iter().zip(&g).map(|(&(t, w), &gt)| w * gt / t.sin().powf(2.0 * lambda)),
        );
        inner_primitive.push(f);
    }
    Ok(crate::quadrature::compensated_sum(
        outer
            .theta
            .iter()
            .zip(&outer.weights)
            .zip(&inner_primitive)
            .map(|((&t, &w), &f)| w * spec.eval_unchecked(t) * f),
    ))
}

/// Weighted moments of the kernel bounded in the lemmas on `v_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LemmaKind {
    /// `∫ θ^{-λ} v_n sin^{2λ}`, bounded by `C n^{λ/2}`.
    NegLambda,
    /// `∫ θ^{-2/m} v_n sin^{2λ}`, bounded by `C n^{1/m}`.
    NegTwoOverM(u32),
    /// `∫ θ^4 v_n sin^{2λ}`, bounded by `C n^{-2}`.
    FourthMoment,
}

impl LemmaKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "neg_lambda" => Ok(LemmaKind::NegLambda),
            "fourth_moment" => Ok(LemmaKind::FourthMoment),
            other => match other.strip_prefix("neg_two_over_m") {
                Some(rest) => {
                    let m: u32 = rest
                        .trim_start_matches(['(', ':'])
                        .trim_end_matches(')')
                        .parse()
                        .map_err(|_| VpmError::usage(format!("bad lemma kind `{s}`")))?;
                    LemmaKind::neg_two_over_m(m)
                }
                None => Err(VpmError::usage(format!("unknown lemma kind `{s}`"))),
            },
        }
    }

    pub fn neg_two_over_m(m: u32) -> Result<Self> {
        if m == 0 {
            return Err(VpmError::usage("neg_two_over_m needs m >= 1"));
        }
        Ok(LemmaKind::NegTwoOverM(m))
    }

    pub fn label(&self) -> String {
        match self {
            LemmaKind::NegLambda => "neg_lambda".into(),
            LemmaKind::NegTwoOverM(m) => format!("neg_two_over_m{m}"),
            LemmaKind::FourthMoment => "fourth_moment".into(),
        }
    }

    fn exponent(&self, lambda: f64) -> f64 {
        match *self {
            LemmaKind::NegLambda => -lambda,
            LemmaKind::NegTwoOverM(m) => -2.0 / m as f64,
            LemmaKind::FourthMoment => 4.0,
        }
    }

    /// The growth rate the lemma asserts for this moment.
    pub fn claimed_rate(&self, n: usize, lambda: f64) -> f64 {
        let n = n as f64;
        match *self {
            LemmaKind::NegLambda => n.powf(lambda / 2.0),
            LemmaKind::NegTwoOverM(m) => n.powf(1.0 / m as f64),
            LemmaKind::FourthMoment => n.powi(-2),
        }
    }
}

/// `∫_0^π θ^s v_n(θ) sin^{2λ}θ dθ` for the exponent `s` selected by `kind`,
/// refined by order doubling until successive values agree to 1e-8.
pub fn lemma_integral(n: usize, d: Dimension, kind: LemmaKind) -> Result<f64> {
    lemma_integral_from(n, d, kind, default_order(n, 0))
}

/// [`lemma_integral`] with the refinement starting at `start_order` nodes.
pub fn lemma_integral_from(n: usize, d: Dimension, kind: LemmaKind, start_order: usize) -> Result<f64> {
    if n == 0 {
        return Err(VpmError::domain("lemma integrals are defined for n >= 1"));
    }
    let spec = KernelSpec::new(n, d);
    let s = kind.exponent(spec.lambda);
    let refined = integrate_theta_refined(
        |t| t.powf(s) * spec.eval_unchecked(t),
        spec.lambda,
        start_order,
        MOMENT_REL_TOL,
        MOMENT_MAX_ORDER,
    )?;
    Ok(refined.value)
}

/// Which operator a multiplier sequence belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum MultiplierSource {
    Identity,
    Vpm {
        n: usize,
    },
    VpmPower {
        n: usize,
        m: u32,
    },
    Translation {
        theta: f64,
    },
    LaplaceBeltrami,
    LaplaceBeltramiSquared,
    /// Pointwise product of two sequences.
    Product,
}

/// Diagonal action `a_k ↦ m_k a_k` of an operator on zonal expansions.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierSequence {
    pub values: Vec<f64>,
    pub source: MultiplierSource,
}

impl MultiplierSequence {
    pub fn identity(len: usize) -> Self {
        MultiplierSequence { values: vec![1.0; len], source: MultiplierSource::Identity }
    }

    /// `ω_{n,k}` for `k < len`.
    pub fn vpm(n: usize, d: Dimension, len: usize) -> Self {
        let lambda = d.lambda();
        MultiplierSequence {
            values: (0..len).map(|k| multiplier_weight(n, k, lambda)).collect(),
            source: MultiplierSource::Vpm { n },
        }
    }

    /// `ω_{n,k}^m`.
    pub fn vpm_power(n: usize, m: u32, d: Dimension, len: usize) -> Self {
        let lambda = d.lambda();
        MultiplierSequence {
            values: (0..len).map(|k| multiplier_weight(n, k, lambda).powi(m as i32)).collect(),
            source: MultiplierSource::VpmPower { n, m },
        }
    }

    /// `Q_k^λ(cos θ)`.
    pub fn translation(theta: f64, d: Dimension, len: usize) -> Self {
        let mut values = vec![0.0; len];
        crate::special_fn::q_sequence(d.lambda(), theta.cos(), &mut values);
        MultiplierSequence { values, source: MultiplierSource::Translation { theta } }
    }

    /// `-k(k + d - 2)`.
    pub fn laplace_beltrami(d: Dimension, len: usize) -> Self {
        MultiplierSequence {
            values: (0..len).map(|k| d.eigenvalue(k)).collect(),
            source: MultiplierSource::LaplaceBeltrami,
        }
    }

    /// `(k(k + d - 2))^2`.
    pub fn laplace_beltrami_squared(d: Dimension, len: usize) -> Self {
        MultiplierSequence {
            values: (0..len).map(|k| d.eigenvalue(k).powi(2)).collect(),
            source: MultiplierSource::LaplaceBeltramiSquared,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Coefficient-wise product; the composition of the two operators.
    pub fn compose(&self, other: &MultiplierSequence) -> Result<MultiplierSequence> {
        if self.len() != other.len() {
            return Err(VpmError::usage(format!(
                "cannot compose multiplier sequences of lengths {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(MultiplierSequence {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
            source: MultiplierSource::Product,
        })
    }
}
