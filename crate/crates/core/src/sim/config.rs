use std::path::{Path, PathBuf};

use num_traits::{One, Zero};

use crate::alpha::{parse_rational, Rational};
use crate::error::{Error, Result};

/// Environment variable naming the directory that relative output paths
/// are resolved against.
pub const OUT_DIR_ENV: &str = "MISODOF_OUT_DIR";

pub const DEFAULT_WINDOW_DB: (f64, f64) = (60.0, 80.0);

/// A sweep description.
///
/// The text form is one `key=value` per line; `#` starts a comment.
/// `alpha` and `snr_db` may repeat and may hold comma-separated lists.
///
/// ```text
/// scheme=x2:0
/// alpha=0,1/2,1
/// snr_db=60
/// snr_db=70
/// snr_db=80
/// trials=200
/// seed=7
/// window_db=60,80
/// output=x2.csv
/// ```
#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub scheme: String,
    pub alphas: Vec<Rational>,
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub window_db: (f64, f64),
}

impl SweepConfig {
    pub fn new(
        scheme: &str,
        alphas: Vec<Rational>,
        snr_db: Vec<f64>,
        trials: usize,
        seed: u64,
    ) -> Self {
        SweepConfig {
            scheme: scheme.to_string(),
            alphas,
            snr_db,
            trials,
            seed,
            output: None,
            window_db: DEFAULT_WINDOW_DB,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut scheme = None;
        let mut alphas = Vec::new();
        let mut snr_db = Vec::new();
        let mut trials = None;
        let mut seed = 0u64;
        let mut output = None;
        let mut window_db = DEFAULT_WINDOW_DB;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |message: String| Error::Config {
                line: line_no,
                message,
            };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(err(format!("expected key=value, got `{line}`")));
            };
            let (key, value) = (key.trim(), value.trim());
            match key {
                "scheme" => scheme = Some(value.to_string()),
                "alpha" => {
                    for part in value.split(',') {
                        let a = parse_rational(part.trim())
                            .map_err(|e| err(format!("field alpha: {e}")))?;
                        if a < Rational::zero() || a > Rational::one() {
                            return Err(err(format!("field alpha: {a} outside [0, 1]")));
                        }
                        alphas.push(a);
                    }
                }
                "snr_db" => {
                    for part in value.split(',') {
                        let v = parse_real(part.trim())
                            .map_err(|m| err(format!("field snr_db: {m}")))?;
                        snr_db.push(v);
                    }
                }
                "trials" => {
                    trials = Some(
                        value
                            .parse::<usize>()
                            .map_err(|e| err(format!("field trials: {e}")))?,
                    )
                }
                "seed" => seed = value.parse().map_err(|e| err(format!("field seed: {e}")))?,
                "output" => output = Some(PathBuf::from(value)),
                "window_db" => {
                    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
                    let [lo, hi] = parts.as_slice() else {
                        return Err(err("field window_db: expected `lo,hi`".into()));
                    };
                    let lo = parse_real(lo).map_err(|m| err(format!("field window_db: {m}")))?;
                    let hi = parse_real(hi).map_err(|m| err(format!("field window_db: {m}")))?;
                    if lo > hi {
                        return Err(err("field window_db: lower edge above upper edge".into()));
                    }
                    window_db = (lo, hi);
                }
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        let end = text.lines().count().max(1);
        let missing = |what: &str| Error::Config {
            line: end,
            message: format!("missing required key `{what}`"),
        };
        let config = SweepConfig {
            scheme: scheme.ok_or_else(|| missing("scheme"))?,
            alphas,
            snr_db,
            trials: trials.ok_or_else(|| missing("trials"))?,
            seed,
            output,
            window_db,
        };
        config.check().map_err(|e| match e {
            Error::InvalidArgument(message) => Error::Config { line: end, message },
            other => other,
        })?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn check(&self) -> Result<()> {
        if self.alphas.is_empty() {
            return Err(Error::InvalidArgument(
                "at least one alpha value is required".into(),
            ));
        }
        if self.snr_db.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "at least 2 snr_db points are required, got {}",
                self.snr_db.len()
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        Ok(())
    }

    /// Output path with relative paths placed under `$MISODOF_OUT_DIR`
    /// when that variable is set.
    pub fn resolved_output(&self) -> Option<PathBuf> {
        let out = self.output.as_ref()?;
        match std::env::var_os(OUT_DIR_ENV) {
            Some(dir) if out.is_relative() => Some(PathBuf::from(dir).join(out)),
            _ => Some(out.clone()),
        }
    }
}

fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}
