//! Parameters shared by every suite, and their hash.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Result, VpmError};
use crate::function_space::{default_corpus_ids, PNorm};
use crate::kernel::default_order;
use crate::smoothness::DEFAULT_THETA_GRID;
use crate::special_fn::Dimension;

/// Largest operator degree the spectral suites accept.
pub const MAX_OPERATOR_DEGREE: usize = 256;

/// Largest `n` of the multiplier identity suite.
pub const MAX_MULTIPLIER_DEGREE: usize = 64;

/// Acceptance windows of the suites.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Thresholds {
    pub multiplier_tol: f64,
    pub lemma_window: f64,
    pub i_asymptotic_window: f64,
    pub voronovskaya_window: f64,
    pub n_alpha_low: f64,
    pub n_alpha_high: f64,
    /// Bound on `|n·α(n) − 1|` for `n ≥ 64` at `d = 3`.
    pub n_alpha_limit_tol: f64,
    pub converse_window: f64,
    pub equivalence_window: f64,
    pub bernstein_window: f64,
    pub envelope_max: f64,
    pub degenerate_floor: f64,
    pub refinement_rel_tol: f64,
    /// Agreement demanded when a norm-based row is re-run on a doubled rule.
    pub norm_refinement_rel_tol: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            multiplier_tol: 1e-9,
            lemma_window: 2.0,
            i_asymptotic_window: 1.5,
            voronovskaya_window: 3.0,
            n_alpha_low: 0.5,
            n_alpha_high: 2.0,
            n_alpha_limit_tol: 0.1,
            converse_window: 25.0,
            equivalence_window: 50.0,
            bernstein_window: 2.0,
            envelope_max: 10.0,
            degenerate_floor: 1e-12,
            refinement_rel_tol: 1e-6,
            norm_refinement_rel_tol: 1e-3,
        }
    }
}

impl Thresholds {
    pub const KEYS: [&'static str; 14] = [
        "multiplier_tol",
        "lemma_window",
        "i_asymptotic_window",
        "voronovskaya_window",
        "n_alpha_low",
        "n_alpha_high",
        "n_alpha_limit_tol",
        "converse_window",
        "equivalence_window",
        "bernstein_window",
        "envelope_max",
        "degenerate_floor",
        "refinement_rel_tol",
        "norm_refinement_rel_tol",
    ];

    /// Set a threshold by name; `false` if the name is unknown.
    pub fn set(&mut self, key: &str, value: f64) -> bool {
        let slot = match key {
            "multiplier_tol" => &mut self.multiplier_tol,
            "lemma_window" => &mut self.lemma_window,
            "i_asymptotic_window" => &mut self.i_asymptotic_window,
            "voronovskaya_window" => &mut self.voronovskaya_window,
            "n_alpha_low" => &mut self.n_alpha_low,
            "n_alpha_high" => &mut self.n_alpha_high,
            "n_alpha_limit_tol" => &mut self.n_alpha_limit_tol,
            "converse_window" => &mut self.converse_window,
            "equivalence_window" => &mut self.equivalence_window,
            "bernstein_window" => &mut self.bernstein_window,
            "envelope_max" => &mut self.envelope_max,
            "degenerate_floor" => &mut self.degenerate_floor,
            "refinement_rel_tol" => &mut self.refinement_rel_tol,
            "norm_refinement_rel_tol" => &mut self.norm_refinement_rel_tol,
            _ => return false,
        };
        *slot = value;
        true
    }
}

/// Quadrature order: a fixed node count or the per-cell default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum QuadOrder {
    Auto,
    Fixed(usize),
}

impl QuadOrder {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "auto" => Ok(QuadOrder::Auto),
            other => match other.parse::<usize>() {
                Ok(n) if n > 0 => Ok(QuadOrder::Fixed(n)),
                _ => Err(VpmError::usage(format!("quadrature order must be a positive integer or `auto`, got `{s}`"))),
            },
        }
    }

    /// Nodes for a `v_n · Q_k` integral.
    pub fn for_cell(self, n: usize, k: usize) -> usize {
        match self {
            QuadOrder::Auto => default_order(n, k),
            QuadOrder::Fixed(m) => m,
        }
    }

    pub fn or(self, auto: usize) -> usize {
        match self {
            QuadOrder::Auto => auto,
            QuadOrder::Fixed(m) => m,
        }
    }
}

/// Largest `k` paired with `n` in the Voronovskaya suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum KMaxRule {
    /// `k ≤ ⌊√n⌋`.
    Sqrt,
    Fixed(usize),
}

impl KMaxRule {
    pub fn k_max(self, n: usize) -> usize {
        match self {
            KMaxRule::Sqrt => (n as f64).sqrt().floor() as usize,
            KMaxRule::Fixed(k) => k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    #[serde(serialize_with = "ser_dim")]
    pub d: Dimension,
    pub n_list: Vec<usize>,
    #[serde(serialize_with = "ser_p_list")]
    pub p_list: Vec<PNorm>,
    pub corpus: Vec<String>,
    pub quadrature_order: QuadOrder,
    pub theta_grid_size: usize,
    pub seed: u64,
    /// Largest `n` of the multiplier identity suite.
    pub n_max: usize,
    /// Largest `k` of the delayed maximum; defaults to `max(n_list)`.
    pub k_cap: Option<usize>,
    pub k_max_rule: KMaxRule,
    pub thresholds: Thresholds,
}

fn ser_dim<S: serde::Serializer>(d: &Dimension, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_u32(d.get())
}

fn ser_p_list<S: serde::Serializer>(ps: &[PNorm], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(ps.iter().map(|p| p.to_string()))
}

/// `{4, 8, …, 256}`.
pub fn dyadic_n_list() -> Vec<usize> {
    (2..=8).map(|j| 1usize << j).collect()
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            d: Dimension::new(3).expect("3 is a valid dimension"),
            n_list: dyadic_n_list(),
            p_list: vec![PNorm::Finite(1.0), PNorm::Finite(2.0), PNorm::Inf],
            corpus: default_corpus_ids(42),
            quadrature_order: QuadOrder::Auto,
            theta_grid_size: DEFAULT_THETA_GRID,
            seed: 42,
            n_max: 32,
            k_cap: None,
            k_max_rule: KMaxRule::Sqrt,
            thresholds: Thresholds::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() {
            return Err(VpmError::usage("n_list must not be empty"));
        }
        if self.n_list.contains(&0) {
            return Err(VpmError::usage("every n in n_list must be at least 1"));
        }
        if let Some(&n) = self.n_list.iter().find(|&&n| n > MAX_OPERATOR_DEGREE) {
            return Err(VpmError::usage(format!(
                "n = {n} exceeds the band budget: operator degrees are limited to {MAX_OPERATOR_DEGREE}"
            )));
        }
        if self.n_max == 0 || self.n_max > MAX_MULTIPLIER_DEGREE {
            return Err(VpmError::usage(format!(
                "n_max = {} outside the quadrature budget 1..={MAX_MULTIPLIER_DEGREE}",
                self.n_max
            )));
        }
        if self.p_list.is_empty() {
            return Err(VpmError::usage("p_list must not be empty"));
        }
        if self.corpus.is_empty() {
            return Err(VpmError::usage("corpus must not be empty"));
        }
        for id in &self.corpus {
            crate::function_space::CorpusKind::parse(id)?;
        }
        if self.theta_grid_size == 0 {
            return Err(VpmError::usage("theta_grid_size must be positive"));
        }
        if let Some(cap) = self.k_cap {
            if cap < self.max_n() {
                return Err(VpmError::usage(format!("k_cap = {cap} is below max(n_list) = {}", self.max_n())));
            }
        }
        Ok(())
    }

    /// `n_list` sorted ascending without duplicates.
    pub fn sorted_n_list(&self) -> Vec<usize> {
        let mut v = self.n_list.clone();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn max_n(&self) -> usize {
        self.n_list.iter().copied().max().unwrap_or(1)
    }

    pub fn k_cap(&self) -> usize {
        self.k_cap.unwrap_or(self.max_n())
    }

    /// `K = 4·n_max + 64` with `n_max` the largest operator degree in play.
    pub fn band_limit(&self) -> usize {
        4 * self.max_n().max(self.k_cap()) + 64
    }

    /// Canonical JSON of every parameter.
    pub fn snapshot(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of [`snapshot`](Self::snapshot).
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.snapshot().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
