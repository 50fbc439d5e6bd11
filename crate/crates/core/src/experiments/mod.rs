//! Verification suites. Each produces an [`ExperimentReport`] whose rows are the
//! measured quantities and whose verdict applies the configured windows.

mod config;
mod report;
mod selftest;
mod summary;

use std::collections::BTreeMap;
use std::fmt;

pub use config::{
    dyadic_n_list, ExperimentConfig, KMaxRule, QuadOrder, Thresholds, MAX_MULTIPLIER_DEGREE, MAX_OPERATOR_DEGREE,
};
pub use report::{strip_timestamp, write_atomic, Cell, ExperimentReport, Metadata};
pub use selftest::{
    bernstein_ratio, convolution_two_pathway, cusp_modulus_slope, envelope_constant, log_log_slope, norm_two_pathway,
    run_selftest_suite, translation_two_pathway, CONVOLUTION_BANDS, NORM_CHECK_BANDS, NORM_CHECK_ORDER,
};
pub use summary::build_summary;

use crate::error::{Result, VpmError};
use crate::function_space::{PNorm, SpectralEvaluator, SpectralSpace, ZonalSpectral};
use crate::kernel::{
    alpha_voronovskaya, default_order, kernel_norm_constant, lemma_integral_from, multiplier_via_quadrature,
    multiplier_weight, LemmaKind,
};
use crate::smoothness::{default_candidate_degrees, k_functional_spectral, modulus_spectral};
use crate::special_fn::Dimension;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Multipliers,
    Lemmas,
    Voronovskaya,
    Converse,
    DelayedMax,
    Modulus,
    Selftest,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Multipliers,
        Suite::Lemmas,
        Suite::Voronovskaya,
        Suite::Converse,
        Suite::DelayedMax,
        Suite::Modulus,
        Suite::Selftest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Multipliers => "multipliers",
            Suite::Lemmas => "lemmas",
            Suite::Voronovskaya => "voronovskaya",
            Suite::Converse => "converse",
            Suite::DelayedMax => "delayed-max",
            Suite::Modulus => "modulus",
            Suite::Selftest => "selftest",
        }
    }

    /// A suite name, or `all` for every suite.
    pub fn parse(s: &str) -> Result<Vec<Suite>> {
        if s == "all" {
            return Ok(Suite::ALL.to_vec());
        }
        Suite::ALL
            .iter()
            .find(|x| x.name() == s)
            .map(|x| vec![*x])
            .ok_or_else(|| VpmError::usage(format!("unknown suite `{s}`")))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `max / min` of positive values; infinite if any value is not positive.
pub fn spread(values: &[f64]) -> f64 {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if values.is_empty() {
        return 1.0;
    }
    if !(min > 0.0) {
        return f64::INFINITY;
    }
    max / min
}

fn rel_change(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Shared state for a sequence of suites under one configuration: the spectral
/// workspace and the moduli already computed.
pub struct Context {
    pub config: ExperimentConfig,
    hash: String,
    space: Option<SpectralSpace>,
    moduli: BTreeMap<(String, usize), Vec<f64>>,
}

impl Context {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let hash = config.hash();
        Ok(Context { config, hash, space: None, moduli: BTreeMap::new() })
    }

    pub fn config_hash(&self) -> &str {
        &self.hash
    }

    pub fn metadata(&self) -> Metadata {
        Metadata::new(self.hash.clone(), self.config.seed)
    }

    fn space(&mut self) -> Result<&mut SpectralSpace> {
        if self.space.is_none() {
            let k = self.config.band_limit();
            let order = self.config.quadrature_order.or(SpectralEvaluator::default_order(k));
            self.space = Some(SpectralSpace::with_orders(self.config.d, k, order, 2 * k + 64)?);
        }
        Ok(self.space.as_mut().expect("initialized above"))
    }

    /// Resolved expansion and canonical id of a corpus function.
    fn function(&mut self, id: &str) -> Result<(String, ZonalSpectral)> {
        let r = self.space()?.resolve(id)?;
        Ok((r.profile.id.clone(), r.spectral.clone()))
    }

    /// `ω(f, n^{-1/2})_p` for every `p` of the configuration.
    fn modulus_at(&mut self, id: &str, f: &ZonalSpectral, n: usize) -> Result<Vec<f64>> {
        let key = (id.to_string(), n);
        if let Some(v) = self.moduli.get(&key) {
            return Ok(v.clone());
        }
        let ps = self.config.p_list.clone();
        let grid = self.config.theta_grid_size;
        let t = (n as f64).powf(-0.5);
        let w = modulus_spectral(&self.space()?.evaluator, f, t, &ps, grid)?;
        self.moduli.insert(key, w.clone());
        Ok(w)
    }

    pub fn run(&mut self, suite: Suite) -> Result<ExperimentReport> {
        let mut report = match suite {
            Suite::Multipliers => run_multiplier_identity_suite(self)?,
            Suite::Lemmas => run_lemma_suite(self)?,
            Suite::Voronovskaya => run_voronovskaya_suite(self)?,
            Suite::Converse => run_converse_suite(self)?,
            Suite::DelayedMax => run_delayed_max_suite(self)?,
            Suite::Modulus => run_modulus_suite(self)?,
            Suite::Selftest => run_selftest_suite(self)?,
        };
        report.sort_rows();
        Ok(report)
    }
}

/// Closed-form `ω_{n,k}` against quadrature for `n ≤ n_max`, `k ≤ n + 4`.
pub fn run_multiplier_identity_suite(ctx: &Context) -> Result<ExperimentReport> {
    let cfg = &ctx.config;
    let d = cfg.d;
    let lambda = d.lambda();
    let tol = cfg.thresholds.multiplier_tol;
    let mut report =
        ExperimentReport::new("multipliers", &["d", "n", "k", "closed_form", "quadrature", "abs_diff"], ctx.metadata());
    let mut worst = (0.0f64, 0usize, 0usize, 0.0f64);
    for n in 0..=cfg.n_max {
        for k in 0..=n + 4 {
            let closed = multiplier_weight(n, k, lambda);
            let quad = multiplier_via_quadrature(n, k, d, cfg.quadrature_order.for_cell(n, k))?;
            let diff = (closed - quad).abs();
            if diff >= worst.0 {
                worst = (diff, n, k, quad);
            }
            if !(diff <= tol) {
                report.fail(format!("n={n} k={k}: |closed - quadrature| = {diff:e} > {tol:e}"));
            }
            report.push(vec![d.get().into(), n.into(), k.into(), closed.into(), quad.into(), diff.into()]);
        }
    }
    let (diff, n, k, quad) = worst;
    let again = multiplier_via_quadrature(n, k, d, 2 * cfg.quadrature_order.for_cell(n, k))?;
    if !((again - quad).abs() <= tol) {
        report.fail(format!("n={n} k={k}: doubled quadrature order moved the value by {:e}", (again - quad).abs()));
    }
    report.constants.insert("max_abs_diff".into(), diff);
    report.constants.insert("refinement_abs_change".into(), (again - quad).abs());
    Ok(report)
}

/// Kernel moment kinds of the lemma suite: `θ^{-λ}`, `θ^{-2/7}`, `θ^4`.
pub const LEMMA_KINDS: [LemmaKind; 3] = [LemmaKind::NegLambda, LemmaKind::NegTwoOverM(7), LemmaKind::FourthMoment];

/// Normalized lemma moments `value / rate(n)` and `I_{n,d} n^{(d-1)/2}` for each `n`.
pub fn lemma_rows(d: Dimension, n: usize, quad: QuadOrder) -> Result<Vec<(String, f64, f64)>> {
    let lambda = d.lambda();
    let mut rows = Vec::with_capacity(4);
    for kind in LEMMA_KINDS {
        let v = lemma_integral_from(n, d, kind, quad.or(default_order(n, 0)))?;
        rows.push((kind.label(), v, v / kind.claimed_rate(n, lambda)));
    }
    let i = kernel_norm_constant(n, d).exp();
    rows.push(("i_asymptotic".into(), i, i * (n as f64).powf((d.get() as f64 - 1.0) / 2.0)));
    Ok(rows)
}

/// Lemma moments normalized by their claimed rates; windows over the upper half of `n_list`.
pub fn run_lemma_suite(ctx: &Context) -> Result<ExperimentReport> {
    let cfg = &ctx.config;
    let d = cfg.d;
    let th = &cfg.thresholds;
    let mut report = ExperimentReport::new("lemmas", &["d", "n", "quantity", "value", "normalized"], ctx.metadata());
    let ns = cfg.sorted_n_list();
    let upper = ns.len() / 2;
    let mut series: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (i, &n) in ns.iter().enumerate() {
        for (label, value, normalized) in lemma_rows(d, n, cfg.quadrature_order)? {
            if i >= upper {
                series.entry(label.clone()).or_default().push(normalized);
            }
            report.push(vec![d.get().into(), n.into(), label.into(), value.into(), normalized.into()]);
        }
    }
    for (label, values) in &series {
        let window = if label == "i_asymptotic" { th.i_asymptotic_window } else { th.lemma_window };
        let s = spread(values);
        report.constants.insert(format!("window_{label}"), s);
        if !(s <= window) {
            report.fail(format!("{label}: normalized max/min = {s} > {window}"));
        }
    }
    // the slowest-converging moment, re-run from a doubled starting order
    let n = *ns.last().expect("validated nonempty");
    let start = cfg.quadrature_order.or(default_order(n, 0));
    let a = lemma_integral_from(n, d, LemmaKind::NegLambda, start)?;
    let b = lemma_integral_from(n, d, LemmaKind::NegLambda, 2 * start)?;
    report.constants.insert("refinement_rel_change".into(), rel_change(a, b));
    if !(rel_change(a, b) <= th.refinement_rel_tol) {
        report.fail(format!("neg_lambda at n={n}: doubled order changed the value by {:e}", rel_change(a, b)));
    }
    Ok(report)
}

/// One Voronovskaya cell: `(ω_{n,k}, residual, normalized residual)`.
pub fn voronovskaya_cell(n: usize, k: usize, d: Dimension, alpha: f64) -> (f64, f64, f64) {
    let omega = multiplier_weight(n, k, d.lambda());
    let mu = -d.eigenvalue(k);
    let residual = (omega - 1.0 + alpha * mu).abs();
    let scale = mu * mu / (n as f64 * n as f64);
    let normalized = if k == 0 { f64::NAN } else { residual / scale };
    (omega, residual, normalized)
}

/// Residuals of `ω_{n,k} ≈ 1 − α(n) k(k+d−2)` normalized by `n^{-2} k²(k+d−2)²`, and `n·α(n)`.
pub fn run_voronovskaya_suite(ctx: &Context) -> Result<ExperimentReport> {
    let cfg = &ctx.config;
    let d = cfg.d;
    let th = &cfg.thresholds;
    let mut report =
        ExperimentReport::new("voronovskaya", &["d", "n", "k", "n_alpha", "residual", "normalized"], ctx.metadata());
    let ns = cfg.sorted_n_list();
    let mut normalized_all = Vec::new();
    let mut n_alpha_all = Vec::new();
    for &n in &ns {
        let alpha = alpha_voronovskaya(n, d, cfg.quadrature_order.or(default_order(n, 0)))?;
        let n_alpha = n as f64 * alpha;
        n_alpha_all.push(n_alpha);
        if !(n_alpha >= th.n_alpha_low && n_alpha <= th.n_alpha_high) {
            report.fail(format!("n={n}: n·α(n) = {n_alpha} outside [{}, {}]", th.n_alpha_low, th.n_alpha_high));
        }
        if d.get() == 3 && n >= 64 && !((n_alpha - 1.0).abs() <= th.n_alpha_limit_tol) {
            report.fail(format!("n={n}: |n·α(n) − 1| = {} > {}", (n_alpha - 1.0).abs(), th.n_alpha_limit_tol));
        }
        for k in 0..=cfg.k_max_rule.k_max(n) {
            let (_, residual, normalized) = voronovskaya_cell(n, k, d, alpha);
            if k > 0 {
                normalized_all.push(normalized);
            }
            report.push(vec![d.get().into(), n.into(), k.into(), n_alpha.into(), residual.into(), normalized.into()]);
        }
    }
    let s = spread(&normalized_all);
    if !(s <= th.voronovskaya_window) {
        report.fail(format!("normalized residual max/min = {s} > {}", th.voronovskaya_window));
    }
    let fold = |v: &[f64], f: fn(f64, f64) -> f64, init: f64| v.iter().copied().fold(init, f);
    report.constants.insert("normalized_residual_window".into(), s);
    report.constants.insert("normalized_residual_min".into(), fold(&normalized_all, f64::min, f64::INFINITY));
    report.constants.insert("normalized_residual_max".into(), fold(&normalized_all, f64::max, 0.0));
    report.constants.insert("n_alpha_min".into(), fold(&n_alpha_all, f64::min, f64::INFINITY));
    report.constants.insert("n_alpha_max".into(), fold(&n_alpha_all, f64::max, 0.0));

    let n = *ns.last().expect("validated nonempty");
    let order = cfg.quadrature_order.or(default_order(n, 0));
    let a = alpha_voronovskaya(n, d, order)?;
    let b = alpha_voronovskaya(n, d, 2 * order)?;
    report.constants.insert("refinement_rel_change".into(), rel_change(a, b));
    if !(rel_change(a, b) <= th.refinement_rel_tol) {
        report.fail(format!("α({n}): doubled order changed the value by {:e}", rel_change(a, b)));
    }
    Ok(report)
}

/// `e_n = ‖V_n f − f‖_p` for every `p` in `ps`.
pub fn vpm_error(eval: &SpectralEvaluator, f: &ZonalSpectral, n: usize, power: u32, ps: &[PNorm]) -> Result<Vec<f64>> {
    let lambda = f.lambda;
    let len = f.degree() + 1;
    let diff = ZonalSpectral::new(
        lambda,
        f.coeffs[..len]
            .iter()
            .enumerate()
            .map(|(k, a)| a * (1.0 - multiplier_weight(n, k, lambda).powi(power as i32)))
            .collect(),
    );
    eval.norms_for(&diff, ps)
}

/// Powers `m` of the chain inequality `‖f − V_n^m f‖ ≤ m‖f − V_n f‖`.
pub const CHAIN_POWERS: [u32; 2] = [2, 7];

/// Spread check of ratios per `(function, p)` group; rows hold `(group, ratio)`
/// with `NaN` for degenerate rows.
fn check_ratio_windows(report: &mut ExperimentReport, groups: &BTreeMap<(String, String), Vec<f64>>, window: f64) {
    let mut worst = 1.0f64;
    for ((id, p), ratios) in groups {
        let live: Vec<f64> = ratios.iter().copied().filter(|r| !r.is_nan()).collect();
        if live.is_empty() {
            continue;
        }
        let s = spread(&live);
        worst = worst.max(s);
        report.constants.insert(format!("ratio_window:{id}:p={p}"), s);
        if !(s <= window) {
            report.fail(format!("{id}, p={p}: max r / min r = {s} > {window}"));
        }
    }
    report.constants.insert("ratio_window_max".into(), worst);
}

/// Row with the smallest non-degenerate `w_n`, re-evaluated on a doubled norm rule.
fn refine_ratio(
    ctx: &mut Context,
    report: &mut ExperimentReport,
    target: Option<(String, usize, usize, f64)>,
    max_err: bool,
) -> Result<()> {
    let Some((id, n, pi, ratio)) = target else { return Ok(()) };
    let (_, f) = ctx.function(&id)?;
    let p = ctx.config.p_list[pi];
    let k = ctx.config.band_limit();
    let base = ctx.config.quadrature_order.or(SpectralEvaluator::default_order(k));
    let fine = SpectralEvaluator::new(ctx.config.d, k, 2 * base)?;
    let t = (n as f64).powf(-0.5);
    let w = modulus_spectral(&fine, &f, t, &[p], ctx.config.theta_grid_size)?[0];
    let e = if max_err {
        delayed_ks(n, ctx.config.k_cap())
            .into_iter()
            .map(|kk| vpm_error(&fine, &f, kk, 1, &[p]).map(|v| v[0]))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max)
    } else {
        vpm_error(&fine, &f, n, 1, &[p])?[0]
    };
    let change = rel_change(ratio, e / w);
    report.constants.insert("refinement_rel_change".into(), change);
    let tol = ctx.config.thresholds.norm_refinement_rel_tol;
    if !(change <= tol) {
        report.fail(format!("{id}, p={p}, n={n}: doubled norm rule changed the ratio by {change:e} > {tol:e}"));
    }
    Ok(())
}

/// `e_n = ‖V_n f − f‖_p` against `w_n = ω(f, n^{-1/2})_p`, with the chain inequality.
pub fn run_converse_suite(ctx: &mut Context) -> Result<ExperimentReport> {
    let mut report =
        ExperimentReport::new("converse", &["function_id", "p", "n", "e_n", "w_n", "ratio", "flag"], ctx.metadata());
    let ps = ctx.config.p_list.clone();
    let floor = ctx.config.thresholds.degenerate_floor;
    let mut groups: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    let mut sensitive: Option<(String, usize, usize, f64)> = None;
    let mut smallest_w = f64::INFINITY;
    for raw in ctx.config.corpus.clone() {
        let (id, f) = ctx.function(&raw)?;
        for n in ctx.config.sorted_n_list() {
            let e = vpm_error(&ctx.space()?.evaluator, &f, n, 1, &ps)?;
            let w = ctx.modulus_at(&id, &f, n)?;
            let mut chain_ok = vec![true; ps.len()];
            for m in CHAIN_POWERS {
                let em = vpm_error(&ctx.space()?.evaluator, &f, n, m, &ps)?;
                for i in 0..ps.len() {
                    if !(em[i] <= m as f64 * e[i] + 1e-8) {
                        chain_ok[i] = false;
                        report.fail(format!(
                            "{id}, p={}, n={n}: ‖f − V_n^{m} f‖ = {} > {m}·‖f − V_n f‖ = {}",
                            ps[i],
                            em[i],
                            m as f64 * e[i]
                        ));
                    }
                }
            }
            for (i, p) in ps.iter().enumerate() {
                let degenerate = w[i] <= floor;
                let ratio = if degenerate { f64::NAN } else { e[i] / w[i] };
                let flag = match (degenerate, chain_ok[i]) {
                    (_, false) => "chain_violation",
                    (true, true) => "degenerate",
                    (false, true) => "ok",
                };
                if !degenerate && !(ratio > 0.0) {
                    report.fail(format!("{id}, p={p}, n={n}: ratio {ratio} is not positive"));
                }
                if !degenerate && p.as_f64() < 3.0 && w[i] < smallest_w {
                    smallest_w = w[i];
                    sensitive = Some((id.clone(), n, i, ratio));
                }
                groups.entry((id.clone(), p.to_string())).or_default().push(ratio);
                report.push(vec![
                    id.clone().into(),
                    p.to_string().into(),
                    n.into(),
                    e[i].into(),
                    w[i].into(),
                    ratio.into(),
                    flag.into(),
                ]);
            }
        }
    }
    let window = ctx.config.thresholds.converse_window;
    check_ratio_windows(&mut report, &groups, window);
    refine_ratio(ctx, &mut report, sensitive, false)?;
    Ok(report)
}

/// Degrees `k ∈ [n, k_cap]` sampled by the delayed maximum: every integer up to
/// `n + 8`, then steps of ratio `2^{1/4}`, then `k_cap`.
pub fn delayed_ks(n: usize, k_cap: usize) -> Vec<usize> {
    let mut ks: Vec<usize> = (n..=k_cap.min(n + 8)).collect();
    let mut x = (n + 8) as f64;
    loop {
        x *= 2f64.powf(0.25);
        let k = x.round() as usize;
        if k >= k_cap {
            break;
        }
        if k > *ks.last().expect("nonempty") {
            ks.push(k);
        }
    }
    if *ks.last().expect("nonempty") < k_cap {
        ks.push(k_cap);
    }
    ks
}

/// `max_{n ≤ k ≤ k_cap} ‖V_k f − f‖_p` against `ω(f, n^{-1/2})_p`; the maximum is truncated.
pub fn run_delayed_max_suite(ctx: &mut Context) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(
        "delayed-max",
        &["function_id", "p", "n", "k_cap", "max_err", "argmax_k", "w_n", "ratio", "flag"],
        ctx.metadata(),
    );
    let ps = ctx.config.p_list.clone();
    let floor = ctx.config.thresholds.degenerate_floor;
    let k_cap = ctx.config.k_cap();
    let mut groups: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    let mut sensitive = None;
    let mut smallest_w = f64::INFINITY;
    for raw in ctx.config.corpus.clone() {
        let (id, f) = ctx.function(&raw)?;
        for n in ctx.config.sorted_n_list() {
            let w = ctx.modulus_at(&id, &f, n)?;
            let mut best = vec![(f64::NEG_INFINITY, n); ps.len()];
            for k in delayed_ks(n, k_cap) {
                let e = vpm_error(&ctx.space()?.evaluator, &f, k, 1, &ps)?;
                for i in 0..ps.len() {
                    if e[i] > best[i].0 {
                        best[i] = (e[i], k);
                    }
                }
            }
            for (i, p) in ps.iter().enumerate() {
                let degenerate = w[i] <= floor;
                let ratio = if degenerate { f64::NAN } else { best[i].0 / w[i] };
                if !degenerate && p.as_f64() < 3.0 && w[i] < smallest_w {
                    smallest_w = w[i];
                    sensitive = Some((id.clone(), n, i, ratio));
                }
                groups.entry((id.clone(), p.to_string())).or_default().push(ratio);
                report.push(vec![
                    id.clone().into(),
                    p.to_string().into(),
                    n.into(),
                    k_cap.into(),
                    best[i].0.into(),
                    best[i].1.into(),
                    w[i].into(),
                    ratio.into(),
                    if degenerate { "TRUNCATED;degenerate" } else { "TRUNCATED" }.into(),
                ]);
            }
        }
    }
    let window = ctx.config.thresholds.converse_window;
    check_ratio_windows(&mut report, &groups, window);
    refine_ratio(ctx, &mut report, sensitive, true)?;
    Ok(report)
}

/// `ω(f, t)_p` against the K-functional estimate at `t = n^{-1/2}`.
pub fn run_modulus_suite(ctx: &mut Context) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(
        "modulus",
        &["function_id", "p", "n", "t", "modulus", "k_estimate", "ratio", "flag"],
        ctx.metadata(),
    );
    let ps = ctx.config.p_list.clone();
    let th = ctx.config.thresholds.clone();
    let window = th.equivalence_window;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let mut cusp_row: Option<(String, usize)> = None;
    for raw in ctx.config.corpus.clone() {
        let (id, f) = ctx.function(&raw)?;
        for n in ctx.config.sorted_n_list() {
            let t = (n as f64).powf(-0.5);
            let w = ctx.modulus_at(&id, &f, n)?;
            let kf = k_functional_spectral(&ctx.space()?.evaluator, &f, t, &ps, &default_candidate_degrees(t))?;
            if id.starts_with("cusp:") && cusp_row.is_none() {
                cusp_row = Some((id.clone(), n));
            }
            for (i, p) in ps.iter().enumerate() {
                let degenerate = w[i] <= th.degenerate_floor && kf[i] <= th.degenerate_floor;
                let ratio = if degenerate { f64::NAN } else { w[i] / kf[i] };
                if !degenerate {
                    lo = lo.min(ratio);
                    hi = hi.max(ratio);
                    if !(ratio >= 1.0 / window && ratio <= window) {
                        report.fail(format!("{id}, p={p}, n={n}: ω/K = {ratio} outside [1/{window}, {window}]"));
                    }
                }
                report.push(vec![
                    id.clone().into(),
                    p.to_string().into(),
                    n.into(),
                    t.into(),
                    w[i].into(),
                    kf[i].into(),
                    ratio.into(),
                    if degenerate { "degenerate" } else { "ok" }.into(),
                ]);
            }
        }
    }
    report.constants.insert("ratio_min".into(), lo);
    report.constants.insert("ratio_max".into(), hi);
    // θ-grid refinement on a cusp: doubling the grid moves ω by at most 1%
    if let Some((id, n)) = cusp_row {
        let (_, f) = ctx.function(&id)?;
        let t = (n as f64).powf(-0.5);
        let size = ctx.config.theta_grid_size;
        let eval = &ctx.space()?.evaluator;
        let a = modulus_spectral(eval, &f, t, &ps, size)?;
        let b = modulus_spectral(eval, &f, t, &ps, 2 * size)?;
        let change = a.iter().zip(&b).map(|(x, y)| rel_change(*x, *y)).fold(0.0, f64::max);
        report.constants.insert("theta_grid_refinement_rel_change".into(), change);
        if !(change <= 0.01) {
            report.fail(format!("{id}, n={n}: doubling the θ-grid changed ω by {change:e}"));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(Suite::parse(s.name()).unwrap(), vec![s]);
        }
        assert_eq!(Suite::parse("all").unwrap().len(), 7);
        assert!(Suite::parse("bogus").is_err());
    }

    #[test]
    fn spread_examples() {
        assert_eq!(spread(&[2.0, 4.0, 3.0]), 2.0);
        assert_eq!(spread(&[0.0, 1.0]), f64::INFINITY);
        assert_eq!(spread(&[]), 1.0);
    }

    #[test]
    fn delayed_degrees() {
        let ks = delayed_ks(4, 256);
        assert_eq!(&ks[..9], &[4, 5, 6, 7, 8, 9, 10, 11, 12]);
        assert_eq!(*ks.last().unwrap(), 256);
        assert!(ks.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(delayed_ks(256, 256), vec![256]);
    }

    #[test]
    fn voronovskaya_closed_form_at_k1() {
        let d = Dimension::new(3).unwrap();
        for n in [16usize, 64, 256] {
            let alpha = 1.0 / (n as f64 + 1.0);
            let (_, r, _) = voronovskaya_cell(n, 1, d, alpha);
            let by_hand = (n as f64 / (n as f64 + 2.0) - 1.0 + 2.0 * alpha).abs();
            assert!((r - by_hand).abs() < 1e-12);
            assert_eq!(voronovskaya_cell(n, 0, d, alpha).1, 0.0);
        }
    }

    #[test]
    fn small_multiplier_suite() {
        let cfg = ExperimentConfig { n_max: 8, ..Default::default() };
        let ctx = Context::new(cfg).unwrap();
        let r = run_multiplier_identity_suite(&ctx).unwrap();
        assert!(r.passed, "{:?}", r.notes);
        assert!(r.rows.len() >= 45);
        let cfg = ExperimentConfig { n_max: 2, ..Default::default() };
        let r = run_multiplier_identity_suite(&Context::new(cfg).unwrap()).unwrap();
        let row = r.rows.iter().find(|row| row[1] == Cell::Int(2) && row[2] == Cell::Int(1)).unwrap();
        assert!((row[3].as_f64().unwrap() - 0.5).abs() < 1e-15);
        assert!((row[4].as_f64().unwrap() - 0.5).abs() < 1e-10);
    }
}
