//! Experiment configuration: a TOML file with one section per analysis.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use speclab_core::nodal::MAX_TREE_SIZE;
use speclab_core::spectral::{spectral_edge, DEFAULT_MAX_N};

use crate::Experiment;

/// A configuration problem, with the line it was found on when known.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub source: String,
    pub line: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.source)?;
        if let Some(line) = self.line {
            write!(f, ":{line}")?;
        }
        if let Some(field) = &self.field {
            write!(f, ": {field}")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Must match the experiment named on the command line when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<String>,
    /// Master seed; every task seed is derived from it.
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub graph: GraphSection,
    #[serde(default)]
    pub covariance: CovarianceSection,
    #[serde(default)]
    pub gaussian: GaussianSection,
    #[serde(default)]
    pub nodal: NodalSection,
    #[serde(default)]
    pub percolation: PercolationSection,
    #[serde(default)]
    pub tolerances: ToleranceSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSection {
    pub n: usize,
    pub d: usize,
    /// Number of independent graphs.
    #[serde(default = "one")]
    pub ensemble: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_attempts: Option<u64>,
    #[serde(default)]
    pub require_connected: bool,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CovarianceSection {
    pub k_min: usize,
    pub k_max: usize,
}

impl Default for CovarianceSection {
    fn default() -> Self {
        CovarianceSection { k_min: 1, k_max: 6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaussianSection {
    /// Target eigenvalues for the ensemble tests.
    pub lambda0: Vec<f64>,
    /// Eigenvectors within this distance of `λ0` enter the bivariate test.
    pub half_width: f64,
    /// Graph distance of the vertex pairs in the bivariate test.
    pub pair_distance: u32,
    /// Points `x` (and `y`) at which empirical and normal cdfs are compared.
    pub grid: Vec<f64>,
    /// Points on the Kolmogorov comparison curve.
    pub curve_points: usize,
}

impl Default for GaussianSection {
    fn default() -> Self {
        GaussianSection {
            lambda0: Vec::new(),
            half_width: 0.05,
            pair_distance: 1,
            grid: vec![-1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5],
            curve_points: 101,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ZeroPolicyName {
    #[default]
    Reject,
    Perturb,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NodalSection {
    pub bins: usize,
    pub min_bin_count: usize,
    /// Largest domain size in the small-domain comparison.
    pub kmax: usize,
    /// Standard error target of each Gaussian probability.
    pub mvn_se: f64,
    pub zero_policy: ZeroPolicyName,
}

impl Default for NodalSection {
    fn default() -> Self {
        NodalSection {
            bins: speclab_core::nodal::DEFAULT_BINS,
            min_bin_count: speclab_core::nodal::MIN_BIN_COUNT,
            kmax: 4,
            mvn_se: 1e-4,
            zero_policy: ZeroPolicyName::Reject,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PercolationSection {
    pub p_min: f64,
    pub p_max: f64,
    pub p_points: usize,
    /// Percolation samples per grid point and graph.
    pub seeds: usize,
    /// Points of the nodal sweep across the spectral support.
    pub lambda_points: usize,
    pub half_width: f64,
}

impl Default for PercolationSection {
    fn default() -> Self {
        PercolationSection {
            p_min: 0.3,
            p_max: 0.7,
            p_points: 41,
            seeds: 10,
            lambda_points: 61,
            half_width: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceSection {
    pub eig: f64,
    pub orth: f64,
    pub sum: f64,
    pub zero: f64,
    pub max_n: usize,
}

impl Default for ToleranceSection {
    fn default() -> Self {
        let t = speclab_core::spectral::Tolerances::default();
        ToleranceSection {
            eig: t.eig,
            orth: t.orth,
            sum: t.sum,
            zero: 1e-10,
            max_n: DEFAULT_MAX_N,
        }
    }
}

/// 1-based line of `key = …` inside `[section]` (top level when `None`).
fn line_of(src: &str, section: Option<&str>, key: &str) -> Option<usize> {
    let mut current: Option<String> = None;
    for (i, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix('[') {
            current = Some(rest.trim_end_matches(']').trim().to_string());
            continue;
        }
        if current.as_deref() != section {
            continue;
        }
        if let Some((k, _)) = line.split_once('=') {
            if k.trim() == key {
                return Some(i + 1);
            }
        }
    }
    // fall back to the section header
    let header = format!("[{}]", section?);
    src.lines().position(|l| l.trim() == header).map(|i| i + 1)
}

impl ExperimentConfig {
    /// Parses and validates a TOML document for `experiment`.
    pub fn parse(src: &str, source: &str, experiment: Experiment) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(src).map_err(|e| ConfigError {
            source: source.to_string(),
            line: e.span().map(|s| src[..s.start].matches('\n').count() + 1),
            field: None,
            message: e.message().to_string(),
        })?;
        cfg.validate(experiment)
            .map_err(|(section, key, message)| ConfigError {
                source: source.to_string(),
                line: line_of(src, section, key),
                field: Some(match section {
                    Some(s) => format!("{s}.{key}"),
                    None => key.to_string(),
                }),
                message,
            })?;
        Ok(cfg)
    }

    pub fn load(path: &Path, experiment: Experiment) -> Result<Self, ConfigError> {
        let src = std::fs::read_to_string(path).map_err(|e| ConfigError {
            source: path.display().to_string(),
            line: None,
            field: None,
            message: e.to_string(),
        })?;
        Self::parse(&src, &path.display().to_string(), experiment)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// The configuration as run: experiment name filled in, output
    /// directory dropped so that the hash does not depend on it.
    pub fn snapshot(&self, experiment: Experiment) -> Self {
        ExperimentConfig {
            experiment: Some(experiment.name().to_string()),
            out: None,
            ..self.clone()
        }
    }

    /// Hex SHA-256 of the TOML form.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    /// Checks every parameter the experiment reads. Errors carry
    /// `(section, key, message)`.
    pub fn validate(
        &self,
        experiment: Experiment,
    ) -> Result<(), (Option<&'static str>, &'static str, String)> {
        let top = |key, msg: String| Err((None, key, msg));
        let graph = |key, msg: String| Err((Some("graph"), key, msg));
        if let Some(name) = &self.experiment {
            if name != experiment.name() {
                return top(
                    "experiment",
                    format!(
                        "file is for `{name}` but `{}` was requested",
                        experiment.name()
                    ),
                );
            }
        }
        if self.seed > i64::MAX as u64 {
            return top("seed", "must be at most 2^63 - 1".into());
        }
        let GraphSection { n, d, ensemble, .. } = self.graph;
        if d < 3 {
            return graph("d", format!("degree must be at least 3, got {d}"));
        }
        if n <= d {
            return graph("n", format!("need n > d, got n = {n}, d = {d}"));
        }
        if (n * d) % 2 == 1 {
            return graph(
                "n",
                format!(
                    "n·d = {} is odd; by handshake parity no {d}-regular graph has {n} vertices",
                    n * d
                ),
            );
        }
        if n > self.tolerances.max_n {
            return graph(
                "n",
                format!(
                    "n = {n} exceeds the dense solver budget {}",
                    self.tolerances.max_n
                ),
            );
        }
        if ensemble == 0 {
            return graph("ensemble", "must be at least 1".into());
        }
        if self.graph.max_attempts == Some(0) {
            return graph("max_attempts", "must be at least 1".into());
        }

        let t = &self.tolerances;
        let tol = |key, msg: String| Err((Some("tolerances"), key, msg));
        for (key, v) in [
            ("eig", t.eig),
            ("orth", t.orth),
            ("sum", t.sum),
            ("zero", t.zero),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return tol(key, format!("must be positive, got {v}"));
            }
        }

        let edge = spectral_edge(d);
        match experiment {
            Experiment::Covariance | Experiment::NormDeviation => {
                let c = &self.covariance;
                let sec = |key, msg: String| Err((Some("covariance"), key, msg));
                if c.k_min > c.k_max {
                    return sec("k_min", format!("{} above k_max = {}", c.k_min, c.k_max));
                }
                if experiment == Experiment::NormDeviation && c.k_min == 0 {
                    return sec("k_min", "norm deviation starts at k = 1".into());
                }
                if c.k_max > 250 {
                    return sec("k_max", format!("{} above the supported 250", c.k_max));
                }
            }
            Experiment::GaussianUnivariate | Experiment::GaussianMultivariate => {
                let g = &self.gaussian;
                let sec = |key, msg: String| Err((Some("gaussian"), key, msg));
                if experiment == Experiment::GaussianMultivariate && g.lambda0.is_empty() {
                    return sec(
                        "lambda0",
                        "at least one target eigenvalue is required".into(),
                    );
                }
                if let Some(l) = g.lambda0.iter().find(|l| l.is_nan() || l.abs() >= edge) {
                    return sec(
                        "lambda0",
                        format!(
                            "λ0 = {l} lies outside the spectral support |λ| < 2√(d-1) = {edge:.6}"
                        ),
                    );
                }
                if !(g.half_width > 0.0 && g.half_width.is_finite()) {
                    return sec(
                        "half_width",
                        format!("must be positive, got {}", g.half_width),
                    );
                }
                if g.pair_distance == 0 {
                    return sec("pair_distance", "must be at least 1".into());
                }
                if g.grid.is_empty() || g.grid.iter().any(|x| !x.is_finite()) {
                    return sec("grid", "needs at least one finite point".into());
                }
                if g.curve_points < 2 {
                    return sec("curve_points", "need at least 2".into());
                }
            }
            Experiment::NodalCount | Experiment::Valency | Experiment::SmallDomains => {
                let s = &self.nodal;
                let sec = |key, msg: String| Err((Some("nodal"), key, msg));
                if s.bins == 0 {
                    return sec("bins", "must be at least 1".into());
                }
                if !(1..=MAX_TREE_SIZE).contains(&s.kmax) {
                    return sec(
                        "kmax",
                        format!("must lie in 1..={MAX_TREE_SIZE}, got {}", s.kmax),
                    );
                }
                if !(s.mvn_se > 0.0 && s.mvn_se < 1.0) {
                    return sec("mvn_se", format!("must lie in (0, 1), got {}", s.mvn_se));
                }
            }
            Experiment::PercolationCompare => {
                let p = &self.percolation;
                let sec = |key, msg: String| Err((Some("percolation"), key, msg));
                if !(0.0..=1.0).contains(&p.p_min) {
                    return sec("p_min", format!("{} outside [0, 1]", p.p_min));
                }
                if !(p.p_max <= 1.0 && p.p_max > p.p_min) {
                    return sec("p_max", format!("{} must lie in (p_min, 1]", p.p_max));
                }
                if p.p_points < 2 {
                    return sec("p_points", "need at least 2".into());
                }
                if p.seeds == 0 {
                    return sec("seeds", "must be at least 1".into());
                }
                if p.lambda_points < 2 {
                    return sec("lambda_points", "need at least 2".into());
                }
                if !(p.half_width > 0.0 && p.half_width.is_finite()) {
                    return sec(
                        "half_width",
                        format!("must be positive, got {}", p.half_width),
                    );
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "seed = 3\n\n[graph]\nn = 100\nd = 3\n";

    #[test]
    fn defaults_fill_in() {
        let cfg = ExperimentConfig::parse(MINIMAL, "t.toml", Experiment::Covariance).unwrap();
        assert_eq!(cfg.graph.ensemble, 1);
        assert_eq!(cfg.covariance, CovarianceSection::default());
        assert_eq!(cfg.seed, 3);
    }

    #[test]
    fn echo_round_trip() {
        let src = "seed = 9\n[graph]\nn = 60\nd = 4\nensemble = 3\nmax_attempts = 500\n\
                   [gaussian]\nlambda0 = [0.1, -1.25, 0.3333333333333333]\ngrid = [0.0]\n\
                   [nodal]\nzero_policy = \"perturb\"\n";
        let cfg = ExperimentConfig::parse(src, "t", Experiment::GaussianMultivariate).unwrap();
        let echo = cfg.to_toml();
        let again =
            ExperimentConfig::parse(&echo, "echo", Experiment::GaussianMultivariate).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(echo, again.to_toml());
    }

    #[test]
    fn locates_keys() {
        let src = "[graph]\nd = 3\nn = 5\n\n[nodal]\nn = 1\n";
        assert_eq!(line_of(src, Some("graph"), "n"), Some(3));
        assert_eq!(line_of(src, Some("nodal"), "n"), Some(6));
        assert_eq!(line_of(src, Some("graph"), "ensemble"), Some(1));
        assert_eq!(line_of(src, None, "seed"), None);
    }

    #[test]
    fn hash_ignores_output_directory() {
        let mut cfg = ExperimentConfig::parse(MINIMAL, "t", Experiment::Valency).unwrap();
        let a = cfg.snapshot(Experiment::Valency).hash();
        cfg.out = Some("elsewhere".into());
        assert_eq!(a, cfg.snapshot(Experiment::Valency).hash());
        assert_ne!(a, cfg.snapshot(Experiment::SmallDomains).hash());
    }
}
