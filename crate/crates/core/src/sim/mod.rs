//! Monte Carlo rate sweeps over (α, SNR) grids and DoF estimation by
//! regression of rate against log₂P.

mod config;

pub use config::{SweepConfig, DEFAULT_WINDOW_DB, OUT_DIR_ENV};

use rayon::prelude::*;
use serde::Serialize;

use crate::alpha::{format_pq, to_f64, Rational};
use crate::channel::{sample_episode, CsitQuality, SnrPoint};
use crate::dofcalc::{dof_at, SchemeSpec};
use crate::error::{Error, Result};
use crate::schemes::{resolve_scheme, ExecutionPlan};

/// Attempts per trial before a degenerate channel draw is given up on.
const MAX_RESAMPLES: u64 = 16;

pub const CSV_HEADER: &str = "scheme,K,N,alpha,snr_db,user,rate,stderr";

/// Which user a row or slope refers to; `Total` is the sum over users.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UserSel {
    User(usize),
    Total,
}

impl std::fmt::Display for UserSel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UserSel::User(u) => write!(f, "{u}"),
            UserSel::Total => f.write_str("total"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RateRow {
    pub scheme: String,
    pub k: usize,
    pub n: usize,
    #[serde(serialize_with = "crate::alpha::ser_rational")]
    pub alpha: Rational,
    pub snr_db: f64,
    pub user: UserSel,
    /// Mean bits per slot over trials.
    pub rate: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SlopeSummary {
    #[serde(serialize_with = "crate::alpha::ser_rational")]
    pub alpha: Rational,
    pub user: UserSel,
    pub slope: f64,
    pub residual: f64,
    pub window_db: (f64, f64),
    /// Symbolic DoF for comparison.
    #[serde(serialize_with = "crate::alpha::ser_rational")]
    pub predicted: Rational,
}

impl SlopeSummary {
    pub fn deviation(&self) -> f64 {
        self.slope - to_f64(&self.predicted)
    }
}

/// A grid point that could not be simulated.
#[derive(Clone, Debug, Serialize)]
pub struct PointFailure {
    #[serde(serialize_with = "crate::alpha::ser_rational")]
    pub alpha: Rational,
    pub snr_db: f64,
    pub message: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RateReport {
    pub scheme: String,
    pub k: usize,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub rows: Vec<RateRow>,
    pub slopes: Vec<SlopeSummary>,
    pub failures: Vec<PointFailure>,
    /// Trials that needed a fresh channel draw.
    pub resamples: u64,
}

impl RateReport {
    pub fn slope(&self, alpha: &Rational, user: UserSel) -> Option<&SlopeSummary> {
        self.slopes
            .iter()
            .find(|s| &s.alpha == alpha && s.user == user)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.scheme,
                r.k,
                r.n,
                format_pq(&r.alpha),
                format_sig(r.snr_db, 12),
                r.user,
                format_sig(r.rate, 12),
                format_sig(r.stderr, 12),
            ));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `x` with `digits` significant digits, in the style of C's `%g`.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').unwrap_or((&sci, "0"));
    let exp: i32 = exp.parse().unwrap_or(0);
    if exp < -4 || exp >= digits as i32 {
        return format!("{}e{}", trim_zeros(mantissa), exp);
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Least-squares fit of rate against log₂P over the points whose SNR lies in
/// `window_db` (inclusive). Returns the slope and the RMS residual.
pub fn estimate_slope(points: &[(f64, f64)], window_db: (f64, f64)) -> Result<(f64, f64)> {
    const EDGE: f64 = 1e-9;
    let db_per_bit = 10.0 * std::f64::consts::LOG10_2;
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(db, _)| *db >= window_db.0 - EDGE && *db <= window_db.1 + EDGE)
        .map(|&(db, r)| (db / db_per_bit, r))
        .collect();
    let n = pts.len();
    let distinct = pts.iter().any(|p| (p.0 - pts[0].0).abs() > EDGE);
    if n < 2 || !distinct {
        return Err(Error::InsufficientPoints(n));
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = pts
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum();
    Ok((slope, (sse / nf).sqrt()))
}

/// SplitMix64 finalizer, used to derive independent seeds.
pub(crate) fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Channel seed for a trial. Independent of the SNR point so the same
/// fading draws are reused along the SNR axis, which steadies the slope.
fn trial_seed(seed: u64, trial: usize, attempt: u64) -> u64 {
    mix(mix(seed ^ mix(trial as u64)) ^ attempt)
}

/// Per-user rates of one trial, with the user labels rotated by
/// `trial % K` for round-robin schemes. Also returns the resample count.
fn run_trial(
    plan: &ExecutionPlan<'_>,
    quality: &CsitQuality,
    snr: &SnrPoint,
    seed: u64,
    trial: usize,
) -> Result<(Vec<f64>, u64)> {
    let scheme = plan.scheme();
    let k = scheme.k;
    let t = scheme.slot_count();
    let mut attempt = 0;
    loop {
        let s = trial_seed(seed, trial, attempt);
        let episode = sample_episode(k, scheme.n, t, quality, snr, s)?;
        match plan.user_rates(&episode, mix(s ^ 0x5eed)) {
            Ok(user_rates) => {
                let rot = if scheme.round_robin { trial % k } else { 0 };
                let mut rates = vec![0.0; k];
                for (u, r) in user_rates.iter().enumerate() {
                    rates[(u + rot) % k] = *r;
                }
                return Ok((rates, attempt));
            }
            Err(Error::NullSpaceEmpty { .. }) if attempt + 1 < MAX_RESAMPLES => {
                log::warn!("trial {trial}: degenerate channel draw, resampling");
                attempt += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Runs the sweep and, if the config names an output path, writes the data
/// there (`.json` for the full report, CSV otherwise).
pub fn run_sweep(config: &SweepConfig) -> Result<RateReport> {
    config.check()?;
    let scheme = resolve_scheme(&config.scheme)?;
    let report = sweep_scheme(&scheme, config)?;
    if let Some(path) = config.resolved_output() {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let is_json = path.extension().is_some_and(|e| e == "json");
        let body = if is_json {
            report.to_json()?
        } else {
            report.to_csv()
        };
        std::fs::write(&path, body)?;
        log::info!("wrote {}", path.display());
    }
    Ok(report)
}

/// Sweep an already-built scheme; `config.scheme` is ignored.
pub fn sweep_scheme(scheme: &SchemeSpec, config: &SweepConfig) -> Result<RateReport> {
    config.check()?;
    let plan = ExecutionPlan::new(scheme);
    let k = scheme.k;
    let mut rows = Vec::new();
    let mut slopes = Vec::new();
    let mut failures = Vec::new();
    let mut resamples = 0;
    for alpha in &config.alphas {
        let quality = CsitQuality::new(alpha.clone())?;
        let predicted = dof_at(scheme, &quality)?;
        let mut series: Vec<Vec<(f64, f64)>> = vec![Vec::new(); k + 1];
        for &db in &config.snr_db {
            log::info!(
                "{} alpha={} snr={} dB: {} trials",
                scheme.name,
                format_pq(alpha),
                db,
                config.trials
            );
            let snr = SnrPoint::from_db(db)?;
            let results: Vec<Result<(Vec<f64>, u64)>> = (0..config.trials)
                .into_par_iter()
                .map(|t| run_trial(&plan, &quality, &snr, config.seed, t))
                .collect();
            let mut per_trial = Vec::with_capacity(config.trials);
            let mut failed = None;
            for r in results {
                match r {
                    Ok((rates, extra)) => {
                        resamples += extra;
                        per_trial.push(rates);
                    }
                    Err(e) => {
                        failed = Some(e);
                        break;
                    }
                }
            }
            if let Some(e) = failed {
                log::warn!(
                    "{} alpha={} snr={} dB failed: {e}",
                    scheme.name,
                    format_pq(alpha),
                    db
                );
                failures.push(PointFailure {
                    alpha: alpha.clone(),
                    snr_db: db,
                    message: e.to_string(),
                });
                continue;
            }
            for (idx, series_u) in series.iter_mut().enumerate() {
                let xs: Vec<f64> = if idx < k {
                    per_trial.iter().map(|r| r[idx]).collect()
                } else {
                    per_trial.iter().map(|r| r.iter().sum()).collect()
                };
                let (rate, stderr) = mean_stderr(&xs);
                series_u.push((db, rate));
                rows.push(RateRow {
                    scheme: scheme.name.clone(),
                    k,
                    n: scheme.n,
                    alpha: alpha.clone(),
                    snr_db: db,
                    user: if idx < k {
                        UserSel::User(idx)
                    } else {
                        UserSel::Total
                    },
                    rate,
                    stderr,
                });
            }
        }
        let total: Rational = predicted.iter().cloned().sum();
        for (idx, pts) in series.iter().enumerate() {
            let Ok((slope, residual)) = estimate_slope(pts, config.window_db) else {
                continue;
            };
            slopes.push(SlopeSummary {
                alpha: alpha.clone(),
                user: if idx < k {
                    UserSel::User(idx)
                } else {
                    UserSel::Total
                },
                slope,
                residual,
                window_db: config.window_db,
                predicted: if idx < k {
                    predicted[idx].clone()
                } else {
                    total.clone()
                },
            });
        }
    }
    Ok(RateReport {
        scheme: scheme.name.clone(),
        k,
        n: scheme.n,
        trials: config.trials,
        seed: config.seed,
        rows,
        slopes,
        failures,
        resamples,
    })
}

/// One received term: `symbol` as heard by `user` in `slot` (1-based).
#[derive(Clone, Debug)]
pub struct TermProbe {
    pub user: usize,
    pub slot: usize,
    pub symbol: String,
}

/// Mean received power of the probed term per SNR point, under the channel
/// draws a sweep with the same seed would use.
pub fn mean_term_power(
    scheme: &SchemeSpec,
    alpha: &Rational,
    snr_db: &[f64],
    trials: usize,
    seed: u64,
    probe: &TermProbe,
) -> Result<Vec<(f64, f64)>> {
    let TermProbe { user, slot, symbol } = probe;
    let (user, slot) = (*user, *slot);
    let quality = CsitQuality::new(alpha.clone())?;
    let plan = ExecutionPlan::new(scheme);
    snr_db
        .iter()
        .map(|&db| {
            let snr = SnrPoint::from_db(db)?;
            let powers: Vec<Result<f64>> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let s = trial_seed(seed, t, 0);
                    let ep =
                        sample_episode(scheme.k, scheme.n, scheme.slot_count(), &quality, &snr, s)?;
                    let (b, _) = plan.execute(&ep, mix(s ^ 0x5eed))?;
                    b.power(user, slot, symbol).ok_or_else(|| {
                        Error::InvalidArgument(format!(
                            "no symbol `{symbol}` at user {user} in slot {slot}"
                        ))
                    })
                })
                .collect();
            let mut sum = 0.0;
            for p in powers {
                sum += p?;
            }
            Ok((db, sum / trials as f64))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alpha::{int, rat};
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn slope_of_exact_line() {
        let db_per_bit = 10.0 * std::f64::consts::LOG10_2;
        let pts: Vec<(f64, f64)> = (0..5)
            .map(|i| {
                let db = 60.0 + 5.0 * i as f64;
                (db, 1.5 * db / db_per_bit + 3.0)
            })
            .collect();
        let (s, r) = estimate_slope(&pts, (60.0, 80.0)).unwrap();
        assert!((s - 1.5).abs() < 1e-9);
        assert!(r < 1e-9);
        let flat: Vec<(f64, f64)> = pts.iter().map(|p| (p.0, 0.0)).collect();
        assert_eq!(estimate_slope(&flat, (60.0, 80.0)).unwrap().0, 0.0);
    }

    #[test]
    fn slope_needs_two_points_in_window() {
        let pts = [(10.0, 1.0), (60.0, 2.0), (90.0, 3.0)];
        assert!(matches!(
            estimate_slope(&pts, (60.0, 80.0)),
            Err(Error::InsufficientPoints(1))
        ));
        assert!(matches!(
            estimate_slope(&[(60.0, 1.0), (60.0, 2.0)], (60.0, 80.0)),
            Err(Error::InsufficientPoints(2))
        ));
    }

    #[test]
    fn noisy_slope_recovers_mat_dof() {
        let truth = 18.0 / 11.0;
        let db_per_bit = 10.0 * std::f64::consts::LOG10_2;
        let noise = Normal::new(0.0, 0.05).unwrap();
        let mut good = 0;
        for seed in 0..200u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<(f64, f64)> = (0..5)
                .map(|i| {
                    let db = 60.0 + 5.0 * i as f64;
                    (db, truth * db / db_per_bit + 2.0 + noise.sample(&mut rng))
                })
                .collect();
            let (s, _) = estimate_slope(&pts, (60.0, 80.0)).unwrap();
            if (s - truth).abs() < 0.1 {
                good += 1;
            }
        }
        assert!(good >= 190, "{good}/200");
    }

    #[test]
    fn sig_formatting() {
        assert_eq!(format_sig(60.0, 12), "60");
        assert_eq!(format_sig(1.0 / 3.0, 12), "0.333333333333");
        assert_eq!(format_sig(123456.789, 12), "123456.789");
        assert_eq!(format_sig(2.5e-7, 12), "2.5e-7");
        assert_eq!(format_sig(-0.0, 12), "0");
        assert_eq!(format_sig(1e15, 12), "1e15");
    }

    #[test]
    fn sweep_is_deterministic_and_shaped() {
        let mut c = SweepConfig::new("tdma:3", vec![int(0)], vec![20.0, 30.0], 8, 5);
        c.window_db = (20.0, 30.0);
        let a = run_sweep(&c).unwrap();
        let b = run_sweep(&c).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        let csv = a.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(csv.lines().count(), 1 + 2 * 4);
        assert!(
            csv.lines()
                .nth(1)
                .unwrap()
                .starts_with("tdma:3,3,1,0/1,20,0,"),
            "{csv}"
        );
        assert!(a.failures.is_empty());
        let total = a.slope(&int(0), UserSel::Total).unwrap();
        assert_eq!(total.predicted, int(1));
    }

    #[test]
    fn round_robin_spreads_rates() {
        let c = SweepConfig::new("x5", vec![rat(1, 2)], vec![40.0, 50.0], 6, 1);
        let r = run_sweep(&c).unwrap();
        let at50: Vec<f64> = r
            .rows
            .iter()
            .filter(|x| x.snr_db == 50.0 && x.user != UserSel::Total)
            .map(|x| x.rate)
            .collect();
        assert_eq!(at50.len(), 3);
        assert!(at50.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn bad_config_is_rejected() {
        let c = SweepConfig::new("x1", vec![], vec![60.0, 70.0], 1, 0);
        assert!(run_sweep(&c).is_err());
        let c = SweepConfig::new("nope", vec![int(0)], vec![60.0, 70.0], 1, 0);
        assert!(matches!(run_sweep(&c), Err(Error::UnknownScheme(_))));
    }
}
