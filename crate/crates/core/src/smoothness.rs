//! The modulus of smoothness `ω(f, t)_p = sup_{0<θ≤t} ‖f − S_θ f‖_p` and an
//! upper estimate of the K-functional `inf_g ‖f − g‖_p + t²‖Dg‖_p`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Result, VpmError};
use crate::function_space::{PNorm, SpectralEvaluator, SpectralSpace, ZonalFunction, ZonalSpectral};
use crate::kernel::{multiplier_weight, MultiplierSequence};
use crate::operators::translate_profile;
use crate::special_fn::Dimension;

/// Default number of θ values in the sup of the modulus.
pub const DEFAULT_THETA_GRID: usize = 64;

/// Ratio between the largest and smallest θ of the modulus grid.
pub const THETA_GRID_SPAN: f64 = 256.0;

/// Powers of `V_m` in the K-functional candidate family, besides `V_m` itself.
pub const CANDIDATE_POWERS: [u32; 2] = [2, 7];

#[derive(Debug, Clone, PartialEq)]
pub struct ModulusQuery {
    pub function_id: String,
    pub t: f64,
    pub p: PNorm,
    pub theta_grid_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KFunctionalQuery {
    pub function_id: String,
    pub t: f64,
    pub p: PNorm,
    pub candidate_degrees: Vec<usize>,
}

fn check_scale(t: f64) -> Result<()> {
    if !(t > 0.0 && t <= PI) {
        return Err(VpmError::domain(format!("scale t must lie in (0, π], got {t}")));
    }
    Ok(())
}

/// `size` angles `t·256^{-j/(size-1)}`, ascending, ending at `t`.
pub fn theta_grid(t: f64, size: usize) -> Result<Vec<f64>> {
    check_scale(t)?;
    if size == 0 {
        return Err(VpmError::domain("θ-grid needs at least one point"));
    }
    if size == 1 {
        return Ok(vec![t]);
    }
    let step = THETA_GRID_SPAN.ln() / (size - 1) as f64;
    Ok((0..size).rev().map(|j| t * (-(j as f64) * step).exp()).collect())
}

/// `ω(f, t)_p` for every `p` in `ps`, with `f` a spectral expansion.
pub fn modulus_spectral(
    eval: &SpectralEvaluator,
    f: &ZonalSpectral,
    t: f64,
    ps: &[PNorm],
    theta_grid_size: usize,
) -> Result<Vec<f64>> {
    let d = eval.dimension();
    let len = f.degree() + 1;
    let mut best = vec![0.0f64; ps.len()];
    for theta in theta_grid(t, theta_grid_size)? {
        let q = MultiplierSequence::translation(theta, d, len);
        let diff =
            ZonalSpectral::new(f.lambda, f.coeffs[..len].iter().zip(&q.values).map(|(a, qk)| a * (1.0 - qk)).collect());
        for (b, v) in best.iter_mut().zip(eval.norms_for(&diff, ps)?) {
            *b = b.max(v);
        }
    }
    Ok(best)
}

/// `ω(f, t)_p` for a corpus function resolved in `space`.
pub fn modulus(space: &mut SpectralSpace, q: &ModulusQuery) -> Result<f64> {
    let f = space.resolve(&q.function_id)?.spectral.clone();
    Ok(modulus_spectral(&space.evaluator, &f, q.t, &[q.p], q.theta_grid_size)?[0])
}

/// `ω(f, t)_∞` of the zonal profile itself, without spectral truncation: each
/// `S_θ f` is the direct circle mean (see [`translate_profile`]) and the sup runs
/// over a uniform ψ-grid of 1025 points plus 97 points `jθ/32` near the pole.
pub fn modulus_sup_direct(
    g: &dyn ZonalFunction,
    d: Dimension,
    t: f64,
    theta_grid_size: usize,
    circle_order: usize,
) -> Result<f64> {
    let mut best = 0.0f64;
    for theta in theta_grid(t, theta_grid_size)? {
        let near = (0..=96).map(|j| theta * j as f64 / 32.0).filter(|&x| x <= PI);
        let far = (0..=1024).map(|j| PI * j as f64 / 1024.0);
        for psi in near.chain(far) {
            let s = translate_profile(g, d, theta, psi, circle_order)?;
            best = best.max((g.value_at(psi) - s).abs());
        }
    }
    Ok(best)
}

/// `{1, 2, 4, …}` up to `4⌈1/t²⌉`, with the endpoint itself included.
pub fn default_candidate_degrees(t: f64) -> Vec<usize> {
    let top = 4 * (1.0 / (t * t)).ceil() as usize;
    let mut m = 1;
    let mut out = Vec::new();
    while m < top {
        out.push(m);
        m *= 2;
    }
    out.push(top);
    out
}

/// Upper estimate of `K(f, t)_p` for every `p` in `ps`: the minimum of
/// `‖f − g‖_p + t²‖Dg‖_p` over `g = 0`, `g = V_m f` and `g = V_m^j f`
/// (`j ∈ {2, 7}`), `m` in `degrees`.
pub fn k_functional_spectral(
    eval: &SpectralEvaluator,
    f: &ZonalSpectral,
    t: f64,
    ps: &[PNorm],
    degrees: &[usize],
) -> Result<Vec<f64>> {
    check_scale(t)?;
    if degrees.is_empty() || degrees.contains(&0) {
        return Err(VpmError::domain("candidate degrees must be nonempty and all at least 1"));
    }
    if let Some(&m) = degrees.iter().find(|&&m| m > eval.band_limit()) {
        return Err(VpmError::usage(format!("candidate degree {m} exceeds the band limit {}", eval.band_limit())));
    }
    let d = eval.dimension();
    let lambda = f.lambda;
    let len = f.degree() + 1;
    let coeffs = &f.coeffs[..len];
    let t2 = t * t;
    let mut best = eval.norms_for(f, ps)?;
    for &m in degrees {
        let omega: Vec<f64> = (0..len).map(|k| multiplier_weight(m, k, lambda)).collect();
        for power in std::iter::once(1).chain(CANDIDATE_POWERS) {
            let g: Vec<f64> = coeffs.iter().zip(&omega).map(|(a, w)| a * w.powi(power as i32)).collect();
            let rest = ZonalSpectral::new(lambda, coeffs.iter().zip(&g).map(|(a, b)| a - b).collect());
            let dg = ZonalSpectral::new(lambda, g.iter().enumerate().map(|(k, b)| b * d.eigenvalue(k)).collect());
            let r = eval.norms_for(&rest, ps)?;
            let s = eval.norms_for(&dg, ps)?;
            for i in 0..ps.len() {
                best[i] = best[i].min(r[i] + t2 * s[i]);
            }
        }
    }
    Ok(best)
}

/// Upper estimate of `K(f, t)_p` for a corpus function.
pub fn k_functional_estimate(space: &mut SpectralSpace, q: &KFunctionalQuery) -> Result<f64> {
    let f = space.resolve(&q.function_id)?.spectral.clone();
    Ok(k_functional_spectral(&space.evaluator, &f, q.t, &[q.p], &q.candidate_degrees)?[0])
}

/// One row of the modulus / K-functional comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceRow {
    pub function_id: String,
    pub p: String,
    pub t: f64,
    pub modulus: f64,
    pub k_estimate: f64,
    /// `modulus / k_estimate`, NaN when both vanish.
    pub ratio: f64,
}

/// `ω(f, t)_p`, the K-estimate and their ratio for each `t`.
pub fn equivalence_table(
    space: &mut SpectralSpace,
    function_id: &str,
    p: PNorm,
    t_list: &[f64],
    theta_grid_size: usize,
) -> Result<Vec<EquivalenceRow>> {
    let resolved = space.resolve(function_id)?;
    let id = resolved.profile.id.clone();
    let f = resolved.spectral.clone();
    t_list
        .iter()
        .map(|&t| {
            let w = modulus_spectral(&space.evaluator, &f, t, &[p], theta_grid_size)?[0];
            let k = k_functional_spectral(&space.evaluator, &f, t, &[p], &default_candidate_degrees(t))?[0];
            let ratio = if w == 0.0 && k == 0.0 { f64::NAN } else { w / k };
            Ok(EquivalenceRow { function_id: id.clone(), p: p.to_string(), t, modulus: w, k_estimate: k, ratio })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_fn::q_normalized;

    fn space(d: u32, k: usize) -> SpectralSpace {
        SpectralSpace::new(Dimension::new(d).unwrap(), k).unwrap()
    }

    #[test]
    fn grid_shape() {
        let g = theta_grid(0.5, 64).unwrap();
        assert_eq!(g.len(), 64);
        assert_eq!(*g.last().unwrap(), 0.5);
        assert!((g[0] - 0.5 / 256.0).abs() < 1e-15);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(theta_grid(0.0, 4).is_err());
        assert!(theta_grid(4.0, 4).is_err());
        assert_eq!(theta_grid(PI, 1).unwrap(), vec![PI]);
    }

    #[test]
    fn constant_has_zero_modulus_and_k() {
        let mut s = space(3, 32);
        for t in [0.05, 0.5, PI] {
            let q = ModulusQuery { function_id: "const".into(), t, p: PNorm::Inf, theta_grid_size: 16 };
            assert_eq!(modulus(&mut s, &q).unwrap(), 0.0);
            let kq = KFunctionalQuery {
                function_id: "const".into(),
                t,
                p: PNorm::Finite(2.0),
                candidate_degrees: default_candidate_degrees(t.max(0.5)),
            };
            assert_eq!(k_functional_estimate(&mut s, &kq).unwrap(), 0.0);
        }
    }

    #[test]
    fn harmonic_modulus_is_explicit() {
        let mut s = space(3, 32);
        let norm = {
            let h = s.resolve("harmonic:4").unwrap().spectral.clone();
            s.evaluator.norm(&h, PNorm::Finite(2.0)).unwrap()
        };
        let t = 0.3;
        let q = ModulusQuery { function_id: "harmonic:4".into(), t, p: PNorm::Finite(2.0), theta_grid_size: 64 };
        let expected = (1.0 - q_normalized(4, 0.5, t).unwrap()) * norm;
        assert!((modulus(&mut s, &q).unwrap() - expected).abs() < 1e-12 * norm);
    }

    #[test]
    fn candidate_degrees() {
        assert_eq!(default_candidate_degrees(0.5), vec![1, 2, 4, 8, 16]);
        assert_eq!(default_candidate_degrees(1.0 / 3.0), vec![1, 2, 4, 8, 16, 32, 36]);
    }

    #[test]
    fn k_estimate_bounded_by_norm_and_monotone_in_candidates() {
        let mut s = space(3, 96);
        let f = s.resolve("cusp:0.5").unwrap().spectral.clone();
        let ps = [PNorm::Finite(1.0), PNorm::Finite(2.0), PNorm::Inf];
        let norms = s.evaluator.norms_for(&f, &ps).unwrap();
        let small = k_functional_spectral(&s.evaluator, &f, 0.25, &ps, &[1, 2]).unwrap();
        let large = k_functional_spectral(&s.evaluator, &f, 0.25, &ps, &[1, 2, 4, 8, 16, 32, 64]).unwrap();
        for i in 0..3 {
            assert!(small[i] <= norms[i]);
            assert!(large[i] <= small[i]);
        }
        assert!(k_functional_spectral(&s.evaluator, &f, 0.25, &ps, &[200]).is_err());
        assert!(k_functional_spectral(&s.evaluator, &f, 0.25, &ps, &[]).is_err());
    }

    #[test]
    fn equivalence_rows() {
        let mut s = space(3, 64);
        let rows = equivalence_table(&mut s, "const", PNorm::Inf, &[0.5, 0.25], 16).unwrap();
        assert!(rows.iter().all(|r| r.modulus == 0.0 && r.k_estimate == 0.0));
        let rows = equivalence_table(&mut s, "harmonic:4", PNorm::Finite(1.0), &[0.5, 0.25], 16).unwrap();
        assert!(rows.iter().all(|r| r.ratio.is_finite() && r.ratio > 0.0));
    }

    #[test]
    fn direct_sup_modulus_of_cusp_at_the_pole() {
        let d = Dimension::new(3).unwrap();
        let g = |t: f64| t;
        let w = modulus_sup_direct(&g, d, 0.1, 4, 64).unwrap();
        assert!((w - 0.1).abs() < 1e-3, "{w}");
    }
}
