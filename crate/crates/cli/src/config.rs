//! TOML run configuration.
//!
//! ```toml
//! [params]
//! n = 3
//! k = 1
//! q = 6.0
//! lambda = 1.0
//!
//! [weight]
//! kind = "constant"   # constant | power | rational | matukuma | example1 | tabulated
//! c = 1.0
//!
//! [integrator]
//! rel_tol = 1e-10
//! t_span = [-40.0, 40.0]
//!
//! [output]
//! format = "csv"
//! profile = "profile.csv"
//! ```
//!
//! A tabulated weight reads `r,rho` rows from `table`, resolved against the
//! directory of the config file.

use std::fs;
use std::path::{Path, PathBuf};

use khess_core::{IntegratorConfig, ProblemParams, WeightSpec};
use serde::Deserialize;

use crate::error::CliError;
use crate::output::{read_table, Format};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub params: ParamsBlock,
    pub weight: Option<WeightBlock>,
    #[serde(default)]
    pub integrator: IntegratorBlock,
    #[serde(default)]
    pub output: OutputBlock,
    /// Directory the config was read from.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsBlock {
    pub n: Option<u32>,
    pub k: Option<u32>,
    pub q: Option<f64>,
    pub lambda: Option<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum WeightBlock {
    Constant {
        #[serde(default = "one")]
        c: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    Power {
        #[serde(default = "one")]
        c: f64,
        sigma: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// a r^beta / (atilde + r^gamma)
    Rational {
        a: f64,
        atilde: f64,
        beta: f64,
        gamma: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    Matukuma {
        mu: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    Example1 {
        #[serde(default = "one")]
        scale: f64,
    },
    Tabulated {
        table: PathBuf,
        #[serde(default = "one")]
        scale: f64,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorBlock {
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub r_start: Option<f64>,
    pub t_span: Option<[f64; 2]>,
    pub max_steps: Option<usize>,
    pub samples_per_decade: Option<usize>,
    pub orbit_dt: Option<f64>,
    pub orbit_divergence: Option<f64>,
    pub iterate_divergence: Option<f64>,
    pub bracket_growth: Option<f64>,
    pub singular_t: Option<f64>,
    pub singular_t_end: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub format: Option<Format>,
    pub profile: Option<PathBuf>,
    pub orbit: Option<PathBuf>,
    pub sweep: Option<PathBuf>,
}

/// Byte offset to 1-based (line, column).
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::unreadable(path, e))?;
        let mut cfg = Self::parse(&text).map_err(|msg| CliError::Config(format!("{}:{msg}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    /// Parse; errors read `line:col: message`.
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e: toml::de::Error| {
            let msg = e.message().trim().replace('\n', "; ");
            match e.span() {
                Some(sp) => {
                    let (l, c) = line_col(text, sp.start);
                    format!("{l}:{c}: {msg}")
                }
                None => format!(" {msg}"),
            }
        })
    }

    pub fn problem(&self, lambda: Option<f64>) -> Result<ProblemParams, CliError> {
        let missing = |f: &str| CliError::Config(format!("params.{f}: missing (set it in [params] or pass --{f})"));
        let n = self.params.n.ok_or_else(|| missing("n"))?;
        let k = self.params.k.ok_or_else(|| missing("k"))?;
        let q = self.params.q.ok_or_else(|| missing("q"))?;
        let lambda = lambda.or(self.params.lambda).unwrap_or(1.0);
        ProblemParams::new(n, k, q, lambda).map_err(|e| CliError::Config(format!("params: {e}")))
    }

    /// The configured weight; ρ ≡ 1 when there is no `[weight]` block.
    pub fn weight(&self) -> Result<WeightSpec, CliError> {
        let block = self.weight.clone().unwrap_or(WeightBlock::Constant { c: 1.0, scale: 1.0 });
        let field = |e: khess_core::Error| CliError::Config(format!("weight: {e}"));
        let (w, scale) = match block {
            WeightBlock::Constant { c, scale } => (WeightSpec::constant(c), scale),
            WeightBlock::Power { c, sigma, scale } => (WeightSpec::power(c, sigma), scale),
            WeightBlock::Rational { a, atilde, beta, gamma, scale } => {
                (WeightSpec::rational(a, atilde, beta, gamma), scale)
            }
            WeightBlock::Matukuma { mu, scale } => (WeightSpec::matukuma(mu), scale),
            WeightBlock::Example1 { scale } => {
                let p = self.problem(None)?;
                (WeightSpec::example1(p.n, p.k), scale)
            }
            WeightBlock::Tabulated { table, scale } => {
                let path = match &self.base_dir {
                    Some(d) if table.is_relative() => d.join(&table),
                    _ => table,
                };
                let rows = read_table(&path, &["r", "rho"])?;
                let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r[0], r[1])).collect();
                (WeightSpec::tabulated(&pts), scale)
            }
        };
        let w = w.map_err(field)?;
        if scale == 1.0 {
            Ok(w)
        } else {
            w.scaled(scale).map_err(field)
        }
    }

    pub fn integrator(&self) -> Result<IntegratorConfig, CliError> {
        let b = &self.integrator;
        let d = IntegratorConfig::default();
        let cfg = IntegratorConfig {
            rel_tol: b.rel_tol.unwrap_or(d.rel_tol),
            abs_tol: b.abs_tol.unwrap_or(d.abs_tol),
            r_start: b.r_start.unwrap_or(d.r_start),
            t_span: b.t_span.map_or(d.t_span, |s| (s[0], s[1])),
            max_steps: b.max_steps.unwrap_or(d.max_steps),
            samples_per_decade: b.samples_per_decade.unwrap_or(d.samples_per_decade),
            orbit_dt: b.orbit_dt.unwrap_or(d.orbit_dt),
            orbit_divergence: b.orbit_divergence.unwrap_or(d.orbit_divergence),
            iterate_divergence: b.iterate_divergence.unwrap_or(d.iterate_divergence),
            bracket_growth: b.bracket_growth.unwrap_or(d.bracket_growth),
            singular_t: b.singular_t.unwrap_or(d.singular_t),
            singular_t_end: b.singular_t_end.unwrap_or(d.singular_t_end),
        };
        cfg.validate().map_err(|e| CliError::Config(format!("integrator: {e}")))?;
        Ok(cfg)
    }

    pub fn format(&self) -> Format {
        self.output.format.unwrap_or(Format::Csv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_config() {
        let cfg = RunConfig::parse(
            "[params]\nn = 3\nk = 1\nq = 6.0\n\n[weight]\nkind = \"power\"\nsigma = 2.0\n\n[integrator]\nrel_tol = 1e-12\nt_span = [-20.0, 20.0]\n\n[output]\nformat = \"json\"\n",
        )
        .unwrap();
        let p = cfg.problem(None).unwrap();
        assert_eq!((p.n, p.k, p.q, p.lambda), (3, 1, 6.0, 1.0));
        assert_eq!(cfg.weight().unwrap().l0(), 2.0);
        let ic = cfg.integrator().unwrap();
        assert_eq!(ic.rel_tol, 1e-12);
        assert_eq!(ic.t_span, (-20.0, 20.0));
        assert_eq!(ic.abs_tol, 1e-12);
        assert_eq!(cfg.format(), Format::Json);
    }

    #[test]
    fn flag_overrides_lambda() {
        let cfg = RunConfig::parse("[params]\nn = 3\nk = 1\nq = 3.0\nlambda = 2.0\n").unwrap();
        assert_eq!(cfg.problem(None).unwrap().lambda, 2.0);
        assert_eq!(cfg.problem(Some(0.5)).unwrap().lambda, 0.5);
    }

    #[test]
    fn unknown_field_has_position() {
        let err = RunConfig::parse("[params]\nn = 3\nkk = 1\n").unwrap_err();
        assert!(err.starts_with("3:1:"), "{err}");
        assert!(err.contains("kk"), "{err}");
    }

    #[test]
    fn unknown_weight_kind() {
        let err = RunConfig::parse("[weight]\nkind = \"gaussian\"\n").unwrap_err();
        assert!(err.contains("gaussian"), "{err}");
    }

    #[test]
    fn missing_params_named() {
        let cfg = RunConfig::parse("[params]\nn = 3\n").unwrap();
        match cfg.problem(None) {
            Err(CliError::Config(m)) => assert!(m.starts_with("params.k"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_weight_parameter() {
        let cfg = RunConfig::parse("[weight]\nkind = \"constant\"\nc = -1.0\n").unwrap();
        match cfg.weight() {
            Err(CliError::Config(m)) => assert!(m.starts_with("weight:"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn scaled_weight() {
        let cfg = RunConfig::parse("[weight]\nkind = \"constant\"\nscale = 2.0\n").unwrap();
        assert_eq!(cfg.weight().unwrap().rho(0.3), 2.0);
    }

    #[test]
    fn bad_integrator_rejected() {
        let cfg = RunConfig::parse("[integrator]\nrel_tol = -1.0\n").unwrap();
        assert!(matches!(cfg.integrator(), Err(CliError::Config(_))));
    }

    #[test]
    fn line_col_counts() {
        assert_eq!(line_col("ab\ncd", 4), (2, 2));
        assert_eq!(line_col("ab", 0), (1, 1));
    }
}
