//! Channel realizations for the K-user MISO broadcast channel.
//!
//! Each slot draws an estimate `ĥ` and an independent error `h̃` with
//! circular complex Gaussian entries; the true channel is `h = ĥ + h̃`.
//! The error variance is `min(P^-α, 1)` and the estimate carries the rest
//! of the unit variance.
//!
//! Randomness is counter-based: entry `(slot, user, antenna)` of an
//! episode is drawn from its own ChaCha8 stream keyed by the episode seed,
//! with stream id `slot << 40 | user << 20 | antenna`. Episodes are
//! therefore reproducible entry by entry, independent of sampling order.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::alpha::{de_rational, ser_rational, to_f64, Rational};
use crate::error::{Error, Result};

/// CSIT quality exponent α ∈ [0, 1].
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CsitQuality {
    #[serde(serialize_with = "ser_rational", deserialize_with = "de_rational")]
    alpha: Rational,
}

impl CsitQuality {
    pub fn new(alpha: Rational) -> Result<Self> {
        if alpha < Rational::zero() || alpha > Rational::one() {
            return Err(Error::InvalidArgument(format!(
                "CSIT quality alpha={alpha} outside [0, 1]"
            )));
        }
        Ok(CsitQuality { alpha })
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    pub fn alpha_f64(&self) -> f64 {
        to_f64(&self.alpha)
    }
}

/// Linear SNR `P` together with its decibel value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnrPoint {
    p_linear: f64,
    p_db: f64,
}

impl SnrPoint {
    pub fn from_db(p_db: f64) -> Result<Self> {
        if !p_db.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "SNR {p_db} dB is not finite"
            )));
        }
        Ok(SnrPoint {
            p_linear: 10f64.powf(p_db / 10.0),
            p_db,
        })
    }

    pub fn from_linear(p_linear: f64) -> Result<Self> {
        if !p_linear.is_finite() || p_linear <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "linear SNR must be positive and finite, got {p_linear}"
            )));
        }
        Ok(SnrPoint {
            p_linear,
            p_db: 10.0 * p_linear.log10(),
        })
    }

    pub fn linear(&self) -> f64 {
        self.p_linear
    }

    pub fn db(&self) -> f64 {
        self.p_db
    }

    pub fn log2(&self) -> f64 {
        self.p_linear.log2()
    }

    /// `P^e`
    pub fn pow(&self, exponent: f64) -> f64 {
        (exponent * self.p_linear.ln()).exp()
    }
}

/// True and estimated channel matrices for one slot. Row `i` is user `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSlot {
    pub h_true: DMatrix<Complex64>,
    pub h_est: DMatrix<Complex64>,
    /// 1-based.
    pub slot_index: usize,
}

impl ChannelSlot {
    pub fn error(&self) -> DMatrix<Complex64> {
        &self.h_true - &self.h_est
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeRealization {
    pub slots: Vec<ChannelSlot>,
    pub k: usize,
    pub n: usize,
    pub snr: SnrPoint,
    pub quality: CsitQuality,
    pub seed: u64,
}

/// `min(P^-α, 1)`.
pub fn error_variance(quality: &CsitQuality, snr: &SnrPoint) -> f64 {
    snr.pow(-quality.alpha_f64()).min(1.0)
}

pub(crate) fn stream_id(slot: usize, user: usize, antenna: usize) -> u64 {
    ((slot as u64) << 40) | ((user as u64) << 20) | antenna as u64
}

fn complex_normal(rng: &mut ChaCha8Rng, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

pub fn sample_episode(
    k: usize,
    n: usize,
    t: usize,
    quality: &CsitQuality,
    snr: &SnrPoint,
    seed: u64,
) -> Result<EpisodeRealization> {
    if k == 0 || n == 0 || t == 0 {
        return Err(Error::InvalidArgument(format!(
            "K, N and T must be positive (got K={k}, N={n}, T={t})"
        )));
    }
    if k >= 1 << 20 || n >= 1 << 20 || t >= 1 << 24 {
        return Err(Error::InvalidArgument(
            "episode dimensions too large".into(),
        ));
    }
    if snr.linear().is_nan() || snr.linear() <= 0.0 {
        return Err(Error::InvalidArgument("SNR must be positive".into()));
    }
    let err_var = error_variance(quality, snr);
    let est_var = 1.0 - err_var;
    let slots = (1..=t)
        .map(|slot| {
            let mut h_est = DMatrix::zeros(k, n);
            let mut h_err = DMatrix::zeros(k, n);
            for user in 0..k {
                for antenna in 0..n {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(stream_id(slot, user, antenna));
                    h_est[(user, antenna)] = complex_normal(&mut rng, est_var);
                    h_err[(user, antenna)] = complex_normal(&mut rng, err_var);
                }
            }
            ChannelSlot {
                h_true: &h_est + &h_err,
                h_est,
                slot_index: slot,
            }
        })
        .collect();
    Ok(EpisodeRealization {
        slots,
        k,
        n,
        snr: *snr,
        quality: quality.clone(),
        seed,
    })
}
