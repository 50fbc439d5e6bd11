//! Invariant battery across all modules: special functions, quadrature, kernel,
//! operator laws and the spectral-versus-direct cross-checks at `d = 3`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{spread, Context, ExperimentReport};
use crate::error::Result;
use crate::function_space::{
    arc, corpus_profile, lp_norm_grid, lp_norm_zonal, GridFunction, PNorm, ProfileFn, SpectralSpace, ZonalFunction,
    ZonalSpectral,
};
use crate::kernel::{multiplier_weight, KernelSpec};
use crate::operators::{default_circle_order, translate_direct, translate_spectral, vpm_grid, vpm_iterated, vpm_means};
use crate::quadrature::{integrate_theta, sphere_grid};
use crate::smoothness::modulus_sup_direct;
use crate::special_fn::{gegenbauer_p, log_gamma, q_envelope, q_sequence, Dimension};

/// Bands of the `S^2` grid used for the norm cross-check.
pub const NORM_CHECK_BANDS: usize = 1024;

/// Bands of the `S^2` grid used for the dense `V_n` convolution.
pub const CONVOLUTION_BANDS: usize = 40;

/// Order of the polar rule on the zonal side of the norm cross-check.
pub const NORM_CHECK_ORDER: usize = 20_000;

fn dim(d: u32) -> Dimension {
    Dimension::new(d).expect("literal dimension is valid")
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

/// `max |Q_k^λ(cos θ)| / min((kθ)^{-λ}, 1)` over `k ≤ k_max` and `points` equispaced θ in `(0, θ_max]`.
pub fn envelope_constant(lambda: f64, k_max: usize, theta_max: f64, points: usize) -> Result<f64> {
    let mut q = vec![0.0; k_max + 1];
    let mut worst = 0.0f64;
    for j in 1..=points {
        let theta = theta_max * j as f64 / points as f64;
        q_sequence(lambda, theta.cos(), &mut q);
        for (k, qk) in q.iter().enumerate().skip(1) {
            worst = worst.max(qk.abs() / q_envelope(k, lambda, theta)?);
        }
    }
    Ok(worst)
}

/// `max_k k(k+d−2) ω_{n,k}^m / n`.
pub fn bernstein_ratio(n: usize, m: u32, d: Dimension) -> f64 {
    max_of((1..=n).map(|k| -d.eigenvalue(k) * multiplier_weight(n, k, d.lambda()).powi(m as i32) / n as f64))
}

/// Slope of the least-squares line through `(ln x, ln y)`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// `(check, value, bound, verdict)`; verdict `None` marks an informational row.
type Check = (String, f64, f64, Option<bool>);

fn le(name: &str, value: f64, bound: f64) -> Check {
    (name.to_string(), value, bound, Some(value <= bound))
}

fn random_unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let r2: f64 = v.iter().map(|x| x * x).sum();
        if r2 > 1e-4 && r2 <= 1.0 {
            let r = r2.sqrt();
            return [v[0] / r, v[1] / r, v[2] / r];
        }
    }
}

fn special_function_checks(ctx: &Context, out: &mut Vec<Check>) -> Result<()> {
    let th = &ctx.config.thresholds;
    let mut c5 = 0.0f64;
    let mut c5_full = 0.0f64;
    let mut q_max = 0.0f64;
    for d in [3u32, 4, 5] {
        let lambda = dim(d).lambda();
        c5 = c5.max(envelope_constant(lambda, 512, FRAC_PI_2, 2048)?);
        c5_full = c5_full.max(envelope_constant(lambda, 512, PI, 2048)?);
        let mut q = vec![0.0; 513];
        for j in 0..=2048 {
            q_sequence(lambda, (PI * j as f64 / 2048.0).cos(), &mut q);
            q_max = q_max.max(max_of(q.iter().map(|x| x.abs())));
        }
    }
    out.push(le("envelope_c5_hat", c5, th.envelope_max));
    out.push(("envelope_c5_hat_full_range".into(), c5_full, th.envelope_max, None));
    out.push(le("q_normalized_bounded", q_max, 1.0 + 1e-12));

    let mut gen_err = 0.0f64;
    for lambda in [0.5, 1.0, 1.5] {
        for r in [0.1, 0.3, 0.5] {
            for j in 0..=32 {
                let x = (PI * j as f64 / 32.0).cos();
                let mut sum = 0.0;
                for k in (0..=120).rev() {
                    sum = sum * r + gegenbauer_p(k, lambda, x)?;
                }
                let exact = (1.0 - 2.0 * r * x + r * r).powf(-lambda);
                gen_err = gen_err.max((sum - exact).abs() / exact);
            }
        }
    }
    out.push(le("generating_function_rel_err", gen_err, 1e-12));

    let mut lg_err = 0.0f64;
    for j in 1..=400 {
        let x = 0.05 * j as f64 * (1.0 + 0.01 * j as f64);
        lg_err = lg_err.max((log_gamma(x + 1.0)? - log_gamma(x)? - x.ln()).abs());
    }
    out.push(le("log_gamma_recurrence", lg_err, 1e-12));

    let mut orth = 0.0f64;
    for d in [3u32, 4, 5] {
        let lambda = dim(d).lambda();
        for k in 0..=16usize {
            for j in (k + 1)..=16 {
                let v = integrate_theta(
                    |t| {
                        let mut q = vec![0.0; j + 1];
                        q_sequence(lambda, t.cos(), &mut q);
                        q[k] * q[j]
                    },
                    lambda,
                    k + j + 16,
                )?;
                orth = orth.max(v.abs());
            }
        }
    }
    out.push(le("orthogonality", orth, 1e-10));

    let mut norm_err = 0.0f64;
    for d in [3u32, 4, 5] {
        let d = dim(d);
        for n in (0..=16).chain([32, 64, 128, 256, 512]) {
            let spec = KernelSpec::new(n, d);
            let v = integrate_theta(|t| spec.eval(t).unwrap_or(0.0), d.lambda(), n + 32)?;
            norm_err = norm_err.max((v - 1.0).abs());
        }
    }
    out.push(le("kernel_normalization", norm_err, 1e-10));

    let d3 = dim(3);
    let b: Vec<f64> = (4..=9).map(|j| bernstein_ratio(1 << j, 7, d3)).collect();
    out.push(le("bernstein_window_m7", spread(&b), th.bernstein_window));
    Ok(())
}

fn operator_law_checks(ctx: &Context, out: &mut Vec<Check>) -> Result<()> {
    let d = dim(3);
    let mut space = SpectralSpace::new(d, 4 * 64 + 64)?;
    let ps = [PNorm::Finite(1.0), PNorm::Finite(2.0), PNorm::Inf];
    let mut semigroup = 0.0f64;
    let mut commute = 0.0f64;
    let mut chain = f64::NEG_INFINITY;
    let mut contraction = f64::NEG_INFINITY;
    let mut convergence = 0.0f64;
    for id in ctx.config.corpus.iter().chain(std::iter::once(&"const".to_string())) {
        let f = space.resolve(id)?.spectral.clone();
        let norms = space.norms_for(&f, &ps)?;
        for n in [4usize, 16, 64] {
            for m in 1..=3u32 {
                for l in 1..=3u32 {
                    let a = vpm_iterated(&f, n, m + l)?;
                    let b = vpm_iterated(&vpm_iterated(&f, n, l)?, n, m)?;
                    semigroup = semigroup.max(max_of(a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| (x - y).abs())));
                }
            }
            let a = translate_spectral(&vpm_means(&f, n)?, 0.4)?;
            let b = vpm_means(&translate_spectral(&f, 0.4)?, n)?;
            commute = commute.max(max_of(a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| (x - y).abs())));
            let e1 = space.norms_for(&f.sub(&vpm_means(&f, n)?), &ps)?;
            for m in super::CHAIN_POWERS {
                let em = space.norms_for(&f.sub(&vpm_iterated(&f, n, m)?), &ps)?;
                for i in 0..ps.len() {
                    chain = chain.max(em[i] - m as f64 * e1[i]);
                }
            }
        }
        for theta in [0.01, 0.1, 0.5, 1.0, 2.0, 3.0] {
            let s = space.norms_for(&translate_spectral(&f, theta)?, &ps)?;
            for i in 0..ps.len() {
                contraction = contraction.max(s[i] - norms[i]);
            }
        }
        for i in 0..ps.len() {
            if norms[i] == 0.0 {
                continue;
            }
            let mut smallest = f64::INFINITY;
            for j in 1..=24 {
                let diff = f.sub(&translate_spectral(&f, 2f64.powi(-j))?);
                smallest = smallest.min(space.evaluator.norm(&diff, ps[i])? / norms[i]);
            }
            convergence = convergence.max(smallest);
        }
    }
    out.push(le("semigroup_abs_diff", semigroup, 1e-15));
    out.push(le("vpm_translation_commute_abs_diff", commute, 1e-15));
    out.push(le("chain_excess", chain, 1e-8));
    out.push(le("contraction_excess", contraction, 1e-8));
    out.push(le("translation_convergence_rel", convergence, 1e-3));
    Ok(())
}

/// Spectral against direct translation on the band-limited corpus: max abs
/// difference over `points` random points and three angles.
pub fn translation_two_pathway(ids: &[String], seed: u64, points: usize) -> Result<f64> {
    let d = dim(3);
    let grid = Arc::new(sphere_grid(4)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pole = random_unit(&mut rng);
    let sample: Vec<[f64; 3]> = (0..points).map(|_| random_unit(&mut rng)).collect();
    let mut worst = 0.0f64;
    for id in ids {
        let profile = corpus_profile(id, d)?;
        let Some(coeffs) = profile.exact_coeffs.clone() else { continue };
        let f = ZonalSpectral::new(d.lambda(), coeffs);
        let gf = GridFunction::from_zonal(grid.clone(), pole, profile.g.clone());
        let order = default_circle_order(f.degree());
        for theta in [0.3, 1.2, 2.7] {
            let s = translate_spectral(&f, theta)?;
            for x in &sample {
                let direct = translate_direct(&gf, theta, x, order)?;
                worst = worst.max((direct - s.value_at(arc(&pole, x))).abs());
            }
        }
    }
    Ok(worst)
}

/// Dense grid convolution against spectral `V_n` for band-limited corpus members,
/// max abs difference over all grid points.
pub fn convolution_two_pathway(ids: &[String], ns: &[usize], bands: usize) -> Result<f64> {
    let d = dim(3);
    let grid = Arc::new(sphere_grid(bands)?);
    let pole = grid.points[grid.index(bands / 3, 1)];
    let mut worst = 0.0f64;
    for id in ids {
        let profile = corpus_profile(id, d)?;
        let Some(coeffs) = profile.exact_coeffs.clone() else { continue };
        let f = ZonalSpectral::new(d.lambda(), coeffs);
        let gf = GridFunction::from_zonal(grid.clone(), pole, profile.g.clone());
        for &n in ns {
            let direct = vpm_grid(&gf, &KernelSpec::new(n, d))?;
            let spectral = vpm_means(&f, n)?;
            for (x, v) in grid.points.iter().zip(&direct.values) {
                worst = worst.max((v - spectral.value_at(arc(&pole, x))).abs());
            }
        }
    }
    Ok(worst)
}

/// Zonal against grid `L^p` norms, max relative difference; the pole sits on a
/// grid point so both poles of the profile are sampled.
pub fn norm_two_pathway(ids: &[String], bands: usize, zonal_order: usize) -> Result<f64> {
    let d = dim(3);
    let grid = Arc::new(sphere_grid(bands)?);
    let pole = grid.points[grid.index(bands / 3, 1)];
    let mut worst = 0.0f64;
    for id in ids {
        let profile = corpus_profile(id, d)?;
        let g: ProfileFn = profile.g.clone();
        let gf = GridFunction::from_zonal(grid.clone(), pole, g);
        for p in [PNorm::Finite(1.0), PNorm::Finite(2.0), PNorm::Inf] {
            let z = lp_norm_zonal(&profile, p, d, zonal_order)?;
            let gr = lp_norm_grid(&gf, p);
            worst = worst.max((z - gr).abs() / z);
        }
    }
    Ok(worst)
}

/// Slope of `ln ω(θ^α, t)_∞` against `ln t` over `t = 2^{-8}, …, 2^{-2}`, by the
/// direct circle-mean pathway.
pub fn cusp_modulus_slope(alpha: f64, d: Dimension, theta_grid_size: usize) -> Result<f64> {
    let g = move |t: f64| t.powf(alpha);
    let ts: Vec<f64> = (2..=8).map(|j| 2f64.powi(-j)).collect();
    let ws = ts.iter().map(|&t| modulus_sup_direct(&g, d, t, theta_grid_size, 64)).collect::<Result<Vec<f64>>>()?;
    Ok(log_log_slope(&ts, &ws))
}

fn two_pathway_checks(ctx: &Context, out: &mut Vec<Check>) -> Result<()> {
    let corpus = &ctx.config.corpus;
    out.push(le("translation_direct_vs_spectral", translation_two_pathway(corpus, ctx.config.seed, 100)?, 1e-8));
    out.push(le("vpm_grid_vs_spectral", convolution_two_pathway(corpus, &[8, 24], CONVOLUTION_BANDS)?, 1e-7));
    out.push(le("norm_grid_vs_zonal_rel", norm_two_pathway(corpus, NORM_CHECK_BANDS, NORM_CHECK_ORDER)?, 1e-6));
    // θ^α has a conical point at the antipode, so the global sup modulus
    // decays like t^{min(α, 1)}
    for alpha in [0.5, 1.0, 1.5] {
        let slope = cusp_modulus_slope(alpha, dim(3), 16)?;
        let expected = alpha.min(1.0);
        out.push((
            format!("cusp_slope_minus_expected:{alpha:?}"),
            (slope - expected).abs(),
            0.15,
            Some((slope - expected).abs() <= 0.15),
        ));
        out.push((format!("cusp_slope_minus_alpha:{alpha:?}"), (slope - alpha).abs(), 0.15, None));
    }
    Ok(())
}

pub fn run_selftest_suite(ctx: &Context) -> Result<ExperimentReport> {
    let mut checks = Vec::new();
    special_function_checks(ctx, &mut checks)?;
    operator_law_checks(ctx, &mut checks)?;
    two_pathway_checks(ctx, &mut checks)?;
    let mut report = ExperimentReport::new("selftest", &["check", "value", "bound", "passed"], ctx.metadata());
    for (name, value, bound, verdict) in checks {
        let mark = match verdict {
            Some(true) => "true",
            Some(false) => {
                report.fail(format!("{name}: {value:e} exceeds {bound:e}"));
                "false"
            }
            None => "info",
        };
        report.constants.insert(name.clone(), value);
        report.push(vec![name.into(), value.into(), bound.into(), mark.into()]);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(1.7)).collect();
        assert!((log_log_slope(&xs, &ys) - 1.7).abs() < 1e-12);
    }

    #[test]
    fn bernstein_ratio_small_n() {
        // n = 1: only k = 1, ω_{1,1} = 1/3 at d = 3
        let r = bernstein_ratio(1, 1, dim(3));
        assert!((r - 2.0 / 3.0).abs() < 1e-15);
    }
}
