//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fails.

use std::time::{Duration, Instant};

use vpm_core::experiments::{
    convolution_two_pathway, norm_two_pathway, spread, translation_two_pathway, Cell, Context, ExperimentConfig,
    ExperimentReport, Suite, CONVOLUTION_BANDS, NORM_CHECK_BANDS, NORM_CHECK_ORDER,
};
use vpm_core::function_space::{corpus_profile, default_corpus_ids, PNorm, SpectralSpace};
use vpm_core::kernel::{
    alpha_voronovskaya, default_order, kernel_norm_constant, lemma_integral, multiplier_via_quadrature,
    multiplier_weight, LemmaKind,
};
use vpm_core::operators::{translate_spectral, vpm_iterated, vpm_means};
use vpm_core::special_fn::Dimension;

type Outcome = Result<String, String>;

fn dim(d: u32) -> Dimension {
    Dimension::new(d).unwrap()
}

fn dyadic(lo: u32, hi: u32) -> Vec<usize> {
    (lo..=hi).map(|j| 1usize << j).collect()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn col(report: &ExperimentReport, name: &str) -> usize {
    report.columns.iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn text(c: &Cell) -> String {
    match c {
        Cell::Text(s) => s.clone(),
        other => other.render(),
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut zero_rows = 0usize;
    for d in [3u32, 4, 5] {
        let d = dim(d);
        for n in 0..=32usize {
            for k in 0..=n + 4 {
                let closed = multiplier_weight(n, k, d.lambda());
                let quad = multiplier_via_quadrature(n, k, d, default_order(n, k)).map_err(|e| e.to_string())?;
                worst = worst.max((closed - quad).abs());
                if k > n {
                    if closed != 0.0 {
                        return Err(format!("closed form nonzero at n={n} k={k}"));
                    }
                    zero_rows += 1;
                }
            }
        }
    }
    let t = start.elapsed();
    check(
        worst <= 1e-9 && t <= Duration::from_secs(30),
        format!("max |closed - quadrature| = {worst:.2e} (≤ 1e-9), {zero_rows} exact-zero rows, {t:.2?} (≤ 30 s)"),
    )
}

fn criterion_2() -> Outcome {
    let mut worst = 0.0f64;
    for d in [3u32, 4, 5] {
        for n in 0..=512usize {
            let v = multiplier_via_quadrature(n, 0, dim(d), default_order(n, 0)).map_err(|e| e.to_string())?;
            worst = worst.max((v - 1.0).abs());
        }
    }
    check(worst <= 1e-10, format!("max |∫ v_n sin^2λ − 1| = {worst:.2e} (≤ 1e-10)"))
}

fn criterion_3() -> Outcome {
    let mut worst = 0.0f64;
    for n in 0..=512usize {
        let exact = 2.0 / (n as f64 + 1.0);
        worst = worst.max((kernel_norm_constant(n, dim(3)).exp() - exact).abs() / exact);
    }
    check(worst <= 1e-12, format!("max relative error against 2/(n+1) = {worst:.2e} (≤ 1e-12)"))
}

fn lemma_window(kind: LemmaKind, scale: impl Fn(f64, f64) -> f64) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for d in [3u32, 4, 5] {
        let lambda = dim(d).lambda();
        let mut vals = Vec::new();
        for n in dyadic(5, 9) {
            let v = lemma_integral(n, dim(d), kind).map_err(|e| e.to_string())?;
            vals.push(scale(n as f64, lambda) * v);
        }
        worst = worst.max(spread(&vals));
    }
    Ok(worst)
}

fn criterion_4() -> Outcome {
    let w = lemma_window(LemmaKind::FourthMoment, |n, _| n * n)?;
    check(w <= 2.0, format!("n²·fourth_moment max/min = {w:.4} (≤ 2)"))
}

fn criterion_5() -> Outcome {
    let a = lemma_window(LemmaKind::NegLambda, |n, l| n.powf(-l / 2.0))?;
    let b = lemma_window(LemmaKind::NegTwoOverM(7), |n, _| n.powf(-1.0 / 7.0))?;
    check(a <= 2.0 && b <= 2.0, format!("neg_lambda max/min = {a:.4}, neg_two_over_m7 max/min = {b:.4} (≤ 2)"))
}

fn criterion_6() -> Outcome {
    let mut worst = 0.0f64;
    for d in [3u32, 4, 5] {
        let vals: Vec<f64> = dyadic(6, 10)
            .into_iter()
            .map(|n| kernel_norm_constant(n, dim(d)).exp() * (n as f64).powf((d as f64 - 1.0) / 2.0))
            .collect();
        worst = worst.max(spread(&vals));
    }
    check(worst <= 1.5, format!("I_(n,d)·n^((d−1)/2) max/min = {worst:.4} (≤ 1.5)"))
}

fn criterion_7() -> Outcome {
    let mut window = 0.0f64;
    let (mut lo, mut hi, mut limit) = (f64::INFINITY, 0.0f64, 0.0f64);
    for d in [3u32, 4] {
        let d = dim(d);
        let mut normalized = Vec::new();
        for n in dyadic(4, 8) {
            let alpha = alpha_voronovskaya(n, d, default_order(n, 0)).map_err(|e| e.to_string())?;
            let na = n as f64 * alpha;
            lo = lo.min(na);
            hi = hi.max(na);
            if d.get() == 3 && n >= 64 {
                limit = limit.max((na - 1.0).abs());
            }
            for k in 1..=((n as f64).sqrt().floor() as usize) {
                let mu = (k * (k + d.get() as usize - 2)) as f64;
                let r = (multiplier_weight(n, k, d.lambda()) - 1.0 + alpha * mu).abs();
                normalized.push(r / (mu * mu / (n * n) as f64));
            }
        }
        window = window.max(spread(&normalized));
    }
    check(
        window <= 3.0 && lo >= 0.5 && hi <= 2.0 && limit <= 0.1,
        format!("residual max/min = {window:.4} (≤ 3), n·α ∈ [{lo:.4}, {hi:.4}] (⊂ [0.5, 2]), |n·α − 1| ≤ {limit:.4} at n ≥ 64 (≤ 0.1)"),
    )
}

fn criterion_8() -> Outcome {
    let d = dim(3);
    let vals: Vec<f64> = dyadic(4, 9)
        .into_iter()
        .map(|n| {
            (1..=n)
                .map(|k| (k * (k + 1)) as f64 * multiplier_weight(n, k, d.lambda()).powi(7) / n as f64)
                .fold(0.0, f64::max)
        })
        .collect();
    let w = spread(&vals);
    check(w <= 2.0, format!("max_k k(k+1)ω^7/n max/min = {w:.4} (≤ 2)"))
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let corpus = default_corpus_ids(42);
    let e = |r: vpm_core::error::Result<f64>| r.map_err(|e| e.to_string());
    let tr = e(translation_two_pathway(&corpus, 42, 100))?;
    let cv = e(convolution_two_pathway(&corpus, &[8, 24], CONVOLUTION_BANDS))?;
    let nm = e(norm_two_pathway(&corpus, NORM_CHECK_BANDS, NORM_CHECK_ORDER))?;
    let t = start.elapsed();
    check(
        tr <= 1e-8 && cv <= 1e-7 && nm <= 1e-6 && t <= Duration::from_secs(180),
        format!(
            "translation {tr:.2e} (≤ 1e-8), grid V_n {cv:.2e} (≤ 1e-7), norms rel {nm:.2e} (≤ 1e-6), {t:.2?} (≤ 3 min)"
        ),
    )
}

fn criterion_10() -> Outcome {
    let e = |x: vpm_core::error::VpmError| x.to_string();
    let d = dim(3);
    let mut space = SpectralSpace::new(d, 4 * 256 + 64).map_err(e)?;
    let ps = [PNorm::Finite(1.0), PNorm::Finite(2.0), PNorm::Inf];
    let (mut semigroup, mut chain, mut contraction) = (0.0f64, f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut ids = default_corpus_ids(42);
    ids.push("const".into());
    for id in &ids {
        let f = space.resolve(id).map_err(e)?.spectral.clone();
        let norms = space.norms_for(&f, &ps).map_err(e)?;
        for n in [4usize, 16, 64, 256] {
            for (m, l) in [(1u32, 1u32), (2, 3), (3, 4)] {
                let a = vpm_iterated(&f, n, m + l).map_err(e)?;
                let b = vpm_iterated(&vpm_iterated(&f, n, l).map_err(e)?, n, m).map_err(e)?;
                for (x, y) in a.coeffs.iter().zip(&b.coeffs) {
                    semigroup = semigroup.max((x - y).abs());
                }
            }
            let e1 = space.norms_for(&f.sub(&vpm_means(&f, n).map_err(e)?), &ps).map_err(e)?;
            for m in [2u32, 3, 7] {
                let em = space.norms_for(&f.sub(&vpm_iterated(&f, n, m).map_err(e)?), &ps).map_err(e)?;
                for i in 0..ps.len() {
                    chain = chain.max(em[i] - m as f64 * e1[i]);
                }
            }
        }
        for theta in [0.01, 0.1, 0.5, 1.0, 2.0, 3.0] {
            let s = space.norms_for(&translate_spectral(&f, theta).map_err(e)?, &ps).map_err(e)?;
            for i in 0..ps.len() {
                contraction = contraction.max(s[i] - norms[i]);
            }
        }
    }
    check(
        semigroup <= 1e-15 && chain <= 1e-8 && contraction <= 1e-8,
        format!("semigroup {semigroup:.2e} (≤ 1e-15), chain excess {chain:.2e} (≤ 1e-8), contraction excess {contraction:.2e} (≤ 1e-8)"),
    )
}

struct Runs {
    first: Vec<ExperimentReport>,
    second: Vec<ExperimentReport>,
}

fn run_all() -> Result<Runs, String> {
    let mut runs = Vec::new();
    for _ in 0..2 {
        let mut ctx = Context::new(ExperimentConfig::default()).map_err(|e| e.to_string())?;
        let mut reports = Vec::new();
        for s in Suite::ALL {
            reports.push(ctx.run(s).map_err(|e| format!("{s}: {e}"))?);
        }
        runs.push(reports);
    }
    let second = runs.pop().unwrap();
    Ok(Runs { first: runs.pop().unwrap(), second })
}

fn report<'a>(runs: &'a Runs, suite: &str) -> &'a ExperimentReport {
    runs.first.iter().find(|r| r.suite == suite).unwrap()
}

fn criterion_11(runs: &Runs) -> Outcome {
    let r = report(runs, "converse");
    let (fi, pi, ri, fl) = (col(r, "function_id"), col(r, "p"), col(r, "ratio"), col(r, "flag"));
    let mut groups: std::collections::BTreeMap<(String, String), Vec<f64>> = Default::default();
    for row in &r.rows {
        if text(&row[fl]) == "degenerate" {
            continue;
        }
        groups.entry((text(&row[fi]), text(&row[pi]))).or_default().push(row[ri].as_f64().unwrap_or(f64::NAN));
    }
    let worst = groups.values().map(|v| spread(v)).fold(0.0, f64::max);
    let min = groups.values().flatten().copied().fold(f64::INFINITY, f64::min);
    check(
        worst <= 25.0 && min > 0.0 && groups.len() >= 3 * 7,
        format!(
            "{} (function, p) groups, worst max r / min r = {worst:.4} (≤ 25), min r = {min:.4} (> 0)",
            groups.len()
        ),
    )
}

fn criterion_12(runs: &Runs) -> Outcome {
    let r = report(runs, "modulus");
    let (ri, fl) = (col(r, "ratio"), col(r, "flag"));
    let ratios: Vec<f64> =
        r.rows.iter().filter(|row| text(&row[fl]) != "degenerate").filter_map(|row| row[ri].as_f64()).collect();
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    check(
        lo >= 1.0 / 50.0 && hi <= 50.0 && !ratios.is_empty(),
        format!("{} ratios ω/K in [{lo:.4}, {hi:.4}] (⊂ [1/50, 50])", ratios.len()),
    )
}

fn criterion_13(runs: &Runs) -> Outcome {
    let mut differing = Vec::new();
    for (a, b) in runs.first.iter().zip(&runs.second) {
        let (x, y) = (a.csv_body().map_err(|e| e.to_string())?, b.csv_body().map_err(|e| e.to_string())?);
        if x != y {
            differing.push(a.suite.clone());
        }
    }
    check(differing.is_empty(), format!("{} suites re-run, CSV bodies differing: {:?}", runs.first.len(), differing))
}

fn main() {
    // sanity: every corpus id resolves before the long checks start
    for id in default_corpus_ids(42) {
        corpus_profile(&id, dim(3)).expect("corpus id resolves");
    }
    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (1, "multiplier identity", criterion_1()),
        (2, "kernel normalization", criterion_2()),
        (3, "closed form of I_(n,3)", criterion_3()),
        (4, "fourth moment rate", criterion_4()),
        (5, "negative moment rates", criterion_5()),
        (6, "I asymptotic", criterion_6()),
        (7, "Voronovskaya", criterion_7()),
        (8, "Bernstein-type bound", criterion_8()),
        (9, "two-pathway oracles", criterion_9()),
        (10, "operator laws", criterion_10()),
    ];
    match run_all() {
        Ok(runs) => {
            results.push((11, "strong converse", criterion_11(&runs)));
            results.push((12, "modulus / K-functional equivalence", criterion_12(&runs)));
            results.push((13, "determinism", criterion_13(&runs)));
        }
        Err(e) => {
            for (i, name) in [(11, "strong converse"), (12, "modulus / K-functional equivalence"), (13, "determinism")]
            {
                results.push((i, name, Err(format!("suite run failed: {e}"))));
            }
        }
    }
    let mut failed = 0;
    for (i, name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS criterion {i:>2} {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {i:>2} {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
