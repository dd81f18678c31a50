//! Run configuration, read from a TOML file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use heattrace_core::coefficients::MAX_ORDER;
use heattrace_core::oracle::ORACLE_MAX_N;
use heattrace_core::{Potential, QuadratureSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: Potential,
    pub max_order: usize,
    #[serde(default)]
    pub quadrature: QuadratureOverrides,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
}

/// Fields left out keep the per-command defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureOverrides {
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_subdivisions: Option<usize>,
    pub truncation_tail_tol: Option<f64>,
}

impl QuadratureOverrides {
    pub fn apply(&self, mut base: QuadratureSpec) -> QuadratureSpec {
        if let Some(v) = self.rel_tol {
            base.rel_tol = v;
        }
        if let Some(v) = self.abs_tol {
            base.abs_tol = v;
        }
        if let Some(v) = self.max_subdivisions {
            base.max_subdivisions = v;
        }
        if let Some(v) = self.truncation_tail_tol {
            base.truncation_tail_tol = v;
        }
        base
    }
}

fn default_n_max() -> usize {
    ORACLE_MAX_N
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default)]
    pub k_values: Vec<f64>,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    pub k_min_override: Option<f64>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            k_values: Vec::new(),
            n_max: default_n_max(),
            k_min_override: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub format: Format,
    /// Standard output when absent.
    pub path: Option<PathBuf>,
}

fn default_fourier_cases() -> Vec<[f64; 3]> {
    vec![
        [0.5, 0.0, 0.0],
        [1.0, 0.0, 0.8],
        [1.0, 0.5, -1.2],
        [1.5, -0.7, 2.0],
        [2.0, 1.3, 0.3],
        [2.5, -1.9, -3.1],
        [0.3, 0.2, 3.7],
        [0.8, -1.1, -0.4],
        [2.9, 1.8, 1.1],
        [1.2, 0.9, -2.6],
    ]
}

fn default_k0_k_values() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}

fn default_k0_separations() -> Vec<f64> {
    vec![0.0, 0.5, 1.5]
}

fn default_fourier_tolerance() -> f64 {
    1e-9
}

fn default_k0_tolerance() -> f64 {
    1e-5
}

fn default_t_samples() -> Vec<f64> {
    vec![0.01, 0.1]
}

/// Parameters of the identity suite run by `verify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// `[κ, η, ξ]` triples.
    #[serde(default = "default_fourier_cases")]
    pub fourier_cases: Vec<[f64; 3]>,
    #[serde(default = "default_fourier_tolerance")]
    pub fourier_tolerance: f64,
    #[serde(default = "default_k0_k_values")]
    pub k0_k_values: Vec<f64>,
    /// Values of `y - y'`; `y` is fixed at 0.
    #[serde(default = "default_k0_separations")]
    pub k0_separations: Vec<f64>,
    #[serde(default = "default_k0_tolerance")]
    pub k0_tolerance: f64,
    #[serde(default = "default_t_samples")]
    pub t_samples: Vec<f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            fourier_cases: default_fourier_cases(),
            fourier_tolerance: default_fourier_tolerance(),
            k0_k_values: default_k0_k_values(),
            k0_separations: default_k0_separations(),
            k0_tolerance: default_k0_tolerance(),
            t_samples: default_t_samples(),
        }
    }
}

fn positive(key: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        bail!("{key}: must be a positive finite number, got {v}");
    }
    Ok(())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every rule that does not depend on the command.
    pub fn validate(&self) -> Result<()> {
        self.potential
            .validate()
            .context("potential: invalid potential")?;
        if self.max_order > MAX_ORDER {
            bail!(
                "max_order: {} exceeds the supported cap of {MAX_ORDER}",
                self.max_order
            );
        }
        self.quadrature
            .apply(QuadratureSpec::default())
            .validate()
            .context("quadrature: invalid override")?;
        if self.oracle.n_max > ORACLE_MAX_N {
            bail!(
                "oracle.n_max: {} is outside 0..={ORACLE_MAX_N}",
                self.oracle.n_max
            );
        }
        for (i, &k) in self.oracle.k_values.iter().enumerate() {
            positive(&format!("oracle.k_values[{i}]"), k)?;
        }
        if let Some(w) = self.oracle.k_values.windows(2).position(|w| w[1] <= w[0]) {
            bail!(
                "oracle.k_values: must be strictly ascending, but entry {} ({}) follows {}",
                w + 1,
                self.oracle.k_values[w + 1],
                self.oracle.k_values[w]
            );
        }
        if let Some(k) = self.oracle.k_min_override {
            positive("oracle.k_min_override", k)?;
        }
        let v = &self.verify;
        for (key, empty) in [
            ("verify.fourier_cases", v.fourier_cases.is_empty()),
            ("verify.k0_k_values", v.k0_k_values.is_empty()),
            ("verify.k0_separations", v.k0_separations.is_empty()),
        ] {
            if empty {
                bail!("{key}: grid is empty");
            }
        }
        positive("verify.fourier_tolerance", v.fourier_tolerance)?;
        positive("verify.k0_tolerance", v.k0_tolerance)?;
        for (i, c) in v.fourier_cases.iter().enumerate() {
            positive(&format!("verify.fourier_cases[{i}] kappa"), c[0])?;
        }
        for (i, &k) in v.k0_k_values.iter().enumerate() {
            positive(&format!("verify.k0_k_values[{i}]"), k)?;
        }
        for (i, &t) in v.t_samples.iter().enumerate() {
            positive(&format!("verify.t_samples[{i}]"), t)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
max_order = 2

[potential]
family = "bump"
"#;

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(cfg.potential, Potential::canonical());
        assert_eq!(cfg.oracle.n_max, 2);
        assert_eq!(cfg.output.format, Format::Json);
        assert_eq!(cfg.verify.fourier_cases.len(), 10);
    }

    #[test]
    fn order_cap_is_explicit() {
        let err = RunConfig::parse(&MINIMAL.replace("= 2", "= 9")).unwrap_err();
        assert!(format!("{err:#}").contains("exceeds the supported cap of 5"));
    }

    #[test]
    fn unknown_keys_are_reported_with_position() {
        let text = format!("{MINIMAL}wdith = 2.0\n");
        let err = format!("{:#}", RunConfig::parse(&text).unwrap_err());
        assert!(err.contains("wdith"), "{err}");
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn k_values_must_ascend() {
        let text = format!("{MINIMAL}\n[oracle]\nk_values = [10.0, 5.0]\n");
        let err = format!("{:#}", RunConfig::parse(&text).unwrap_err());
        assert!(err.contains("strictly ascending"), "{err}");
        let text = format!("{MINIMAL}\n[oracle]\nk_values = [-1.0]\n");
        assert!(RunConfig::parse(&text).is_err());
    }

    #[test]
    fn empty_verify_grid_is_rejected() {
        let text = format!("{MINIMAL}\n[verify]\nk0_k_values = []\n");
        let err = format!("{:#}", RunConfig::parse(&text).unwrap_err());
        assert!(err.contains("verify.k0_k_values: grid is empty"), "{err}");
    }

    #[test]
    fn overrides_apply_field_by_field() {
        let o = QuadratureOverrides {
            rel_tol: Some(1e-4),
            ..Default::default()
        };
        let s = o.apply(QuadratureSpec::default());
        assert_eq!(s.rel_tol, 1e-4);
        assert_eq!(s.abs_tol, QuadratureSpec::default().abs_tol);
    }

    #[test]
    fn nested_sum_parses() {
        let text = r#"
max_order = 1
[potential]
family = "sum"
[[potential.children]]
family = "bump"
center = -1.0
[[potential.children]]
family = "poly_bump"
center = 1.0
halfwidth = 0.5
poly_coeffs = [1.0, 0.3]
"#;
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.potential.children.len(), 2);
    }
}
