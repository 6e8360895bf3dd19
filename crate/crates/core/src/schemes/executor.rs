//! Finite-SNR instantiation of a scheme against one channel episode.
//!
//! Rates come from expected received powers: each decode step sees the
//! power of its own symbols over everything not yet cancelled plus unit
//! noise, at `log2(1 + SINR)` bits. Backwards decoding is accounted rather
//! than replayed: a fresh symbol recovered through side information is
//! credited `payload · Λ` bits, where `Λ` is the smallest bits-per-payload
//! ratio among the steps its recovery depends on.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::alpha::to_f64;
use crate::beamform::{apply, matrix_row, null_space_unit, span_unit, BeamVector};
use crate::channel::EpisodeRealization;
use crate::dofcalc::{
    user_groups, BeamConstraint, GroupInfo, KnowledgeGraph, SchemeSpec, Source, StepKind,
};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TermRole {
    Desired,
    Interference,
    Noise,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReceivedTerm {
    pub symbol: String,
    pub power: f64,
    pub role: TermRole,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlotReception {
    pub user: usize,
    /// 1-based.
    pub slot: usize,
    pub terms: Vec<ReceivedTerm>,
    /// One received sample for the drawn symbol values.
    #[serde(skip)]
    pub sample: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReceivedTermBreakdown {
    pub entries: Vec<SlotReception>,
    /// Expected `‖x(t)‖²` per slot.
    pub tx_power: Vec<f64>,
}

impl ReceivedTermBreakdown {
    pub fn power(&self, user: usize, slot: usize, symbol: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.user == user && e.slot == slot)?
            .terms
            .iter()
            .find(|t| t.symbol == symbol)
            .map(|t| t.power)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LedgerEntry {
    pub user: usize,
    pub slot: usize,
    pub step: usize,
    pub kind: StepKind,
    pub group: Option<String>,
    pub sinr: f64,
    pub rate_bits: f64,
    /// Symbols removed after this step.
    pub cancelled: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupRate {
    pub user: usize,
    pub group: String,
    pub rate_bits: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SinrLedger {
    pub entries: Vec<LedgerEntry>,
    pub groups: Vec<GroupRate>,
    /// Credited bits per slot for every user.
    pub user_rates: Vec<f64>,
}

impl SinrLedger {
    pub fn entry(&self, user: usize, slot: usize, step: usize) -> Option<&LedgerEntry> {
        self.entries
            .iter()
            .find(|e| e.user == user && e.slot == slot && e.step == step)
    }
}

fn combiner_coefficient(row: usize, col: usize) -> f64 {
    ((col + 1) as f64).powi(row as i32)
}

fn cn(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

struct Tx {
    /// Effective precoder including amplitude and combiner weight.
    w: Vec<Vec<Complex64>>,
}

fn resolve_beam(
    beam: &BeamConstraint,
    h: &DMatrix<Complex64>,
    n: usize,
    cache: &mut HashMap<Vec<usize>, BeamVector>,
) -> Result<BeamVector> {
    match beam {
        BeamConstraint::Canonical { antenna }
        | BeamConstraint::FullRankCombiner { antenna, .. } => {
            Ok(BeamVector::canonical(n, *antenna))
        }
        BeamConstraint::NullOf { users } => {
            let key: Vec<usize> = users.iter().copied().collect();
            if let Some(b) = cache.get(&key) {
                return Ok(b.clone());
            }
            let rows: Vec<Vec<Complex64>> = key.iter().map(|&u| matrix_row(h, u)).collect();
            let b = null_space_unit(&rows, n)?;
            cache.insert(key, b.clone());
            Ok(b)
        }
        BeamConstraint::SpanOf { user } => match span_unit(&matrix_row(h, *user)) {
            Ok(b) => Ok(b),
            // no current CSIT at all: any fixed direction is as good
            Err(Error::ZeroVector) => Ok(BeamVector::canonical(n, 0)),
            Err(e) => Err(e),
        },
    }
}

/// Channel-independent analysis of a scheme, built once and reused for
/// every episode of a sweep.
pub struct ExecutionPlan<'a> {
    scheme: &'a SchemeSpec,
    /// Side-information rules at `pos * k + observer`, as
    /// `(term index, mask over the slot's symbols)`.
    rules_at: Vec<Vec<(usize, Vec<bool>)>>,
    term_count: usize,
    /// Dense index of every symbol id, by slot position.
    ids: Vec<Vec<usize>>,
    id_count: usize,
    /// Term indices a digitized symbol combines, by slot position.
    sources: Vec<Vec<Vec<usize>>>,
    /// Mask over the slot's symbols for each decode step, by `[pos][user][step]`.
    step_masks: Vec<Vec<Vec<Vec<bool>>>>,
    groups: Vec<Vec<GroupInfo<'a>>>,
    graphs: Vec<KnowledgeGraph>,
    /// `(c0, c1)` of each symbol's power exponent, by slot position.
    power: Vec<Vec<(f64, f64)>>,
    /// `(c0, c1)` of each symbol's payload, by slot position.
    payload: Vec<Vec<(f64, f64)>>,
    /// Fresh symbols as `(owner, id, payload coefficients)`.
    fresh: Vec<(usize, &'a str, (f64, f64))>,
}

fn coeffs(a: &crate::alpha::AffineAlpha) -> (f64, f64) {
    (to_f64(&a.c0), to_f64(&a.c1))
}

fn at((c0, c1): (f64, f64), alpha: f64) -> f64 {
    c0 + c1 * alpha
}

impl<'a> ExecutionPlan<'a> {
    pub fn new(scheme: &'a SchemeSpec) -> Self {
        let k = scheme.k;
        let pos_of: HashMap<usize, usize> = scheme
            .slots
            .iter()
            .enumerate()
            .map(|(pos, s)| (s.slot_index, pos))
            .collect();
        let mut terms: HashMap<&str, usize> = HashMap::new();
        let mut term_index = |t: &'a str| {
            let next = terms.len();
            *terms.entry(t).or_insert(next)
        };
        let mut rules_at = vec![Vec::new(); scheme.slots.len() * k];
        for r in &scheme.side_info_rules {
            let t = term_index(&r.term);
            if let Some(&pos) = pos_of.get(&r.slot) {
                let mask = scheme.slots[pos]
                    .symbols
                    .iter()
                    .map(|s| r.symbols.contains(&s.id))
                    .collect();
                if r.observer < k {
                    rules_at[pos * k + r.observer].push((t, mask));
                }
            }
        }
        let mut sources = Vec::with_capacity(scheme.slots.len());
        for slot in &scheme.slots {
            sources.push(
                slot.symbols
                    .iter()
                    .map(|s| match &s.source {
                        Source::FreshMessage { .. } => Vec::new(),
                        Source::DigitizedInterference { terms } => {
                            terms.iter().map(|t| term_index(t)).collect()
                        }
                    })
                    .collect(),
            );
        }
        let term_count = terms.len();
        let mut id_index: HashMap<&str, usize> = HashMap::new();
        let ids: Vec<Vec<usize>> = scheme
            .slots
            .iter()
            .map(|slot| {
                slot.symbols
                    .iter()
                    .map(|s| {
                        let next = id_index.len();
                        *id_index.entry(&s.id).or_insert(next)
                    })
                    .collect()
            })
            .collect();
        let step_masks = scheme
            .slots
            .iter()
            .map(|slot| {
                (0..k)
                    .map(|u| {
                        slot.decode_plan
                            .get(u)
                            .map(|plan| {
                                plan.iter()
                                    .map(|st| {
                                        slot.symbols
                                            .iter()
                                            .map(|s| st.symbols.contains(&s.id))
                                            .collect()
                                    })
                                    .collect()
                            })
                            .unwrap_or_default()
                    })
                    .collect()
            })
            .collect();
        ExecutionPlan {
            scheme,
            rules_at,
            term_count,
            id_count: id_index.len(),
            ids,
            sources,
            step_masks,
            groups: (0..scheme.k).map(|u| user_groups(scheme, u)).collect(),
            graphs: (0..scheme.k)
                .map(|u| KnowledgeGraph::build(scheme, u, scheme.slots.len()))
                .collect(),
            power: scheme
                .slots
                .iter()
                .map(|s| s.symbols.iter().map(|x| coeffs(&x.power_exp)).collect())
                .collect(),
            payload: scheme
                .slots
                .iter()
                .map(|s| s.symbols.iter().map(|x| coeffs(&x.payload)).collect())
                .collect(),
            fresh: scheme
                .fresh_symbols()
                .into_iter()
                .filter_map(|s| Some((s.fresh_user()?, s.id.as_str(), coeffs(&s.payload))))
                .collect(),
        }
    }

    pub fn scheme(&self) -> &SchemeSpec {
        self.scheme
    }

    pub fn execute(
        &self,
        realization: &EpisodeRealization,
        payload_rng_seed: u64,
    ) -> Result<(ReceivedTermBreakdown, SinrLedger)> {
        run(self, realization, payload_rng_seed, true)
    }

    /// Credited per-user rates only; skips the per-term and per-step detail.
    pub fn user_rates(
        &self,
        realization: &EpisodeRealization,
        payload_rng_seed: u64,
    ) -> Result<Vec<f64>> {
        run(self, realization, payload_rng_seed, false).map(|(_, l)| l.user_rates)
    }
}

/// One-off execution; sweeps should build an [`ExecutionPlan`] once instead.
pub fn execute_episode(
    scheme: &SchemeSpec,
    realization: &EpisodeRealization,
    payload_rng_seed: u64,
) -> Result<(ReceivedTermBreakdown, SinrLedger)> {
    ExecutionPlan::new(scheme).execute(realization, payload_rng_seed)
}

fn run(
    plan: &ExecutionPlan<'_>,
    realization: &EpisodeRealization,
    payload_rng_seed: u64,
    detail: bool,
) -> Result<(ReceivedTermBreakdown, SinrLedger)> {
    let scheme = plan.scheme;
    let (k, n) = (scheme.k, scheme.n);
    if realization.k != k || realization.n != n {
        return Err(Error::SlotMismatch(format!(
            "scheme is {k}x{n} but the episode is {}x{}",
            realization.k, realization.n
        )));
    }
    if realization.slots.len() < scheme.slots.len() {
        return Err(Error::SlotMismatch(format!(
            "scheme needs {} slots, episode has {}",
            scheme.slots.len(),
            realization.slots.len()
        )));
    }
    let alpha = to_f64(realization.quality.alpha());
    let p = realization.snr.linear();

    let mut entries = Vec::new();
    let mut tx_power = Vec::new();
    // received power of symbol i at user u, per slot
    let mut rx: Vec<Vec<Vec<f64>>> = Vec::new();
    let mut values: Vec<Option<Complex64>> = vec![None; plan.id_count];
    let mut term_values: Vec<Option<(Complex64, f64)>> = vec![None; plan.term_count];

    for (pos, slot) in scheme.slots.iter().enumerate() {
        let ch = &realization.slots[pos];
        if ch.h_true.shape() != (k, n) || ch.h_est.shape() != (k, n) {
            return Err(Error::SlotMismatch(format!(
                "slot {} has wrong channel shape",
                pos + 1
            )));
        }
        let h_beam = if scheme.perfect_csit {
            &ch.h_true
        } else {
            &ch.h_est
        };
        let mut cache = HashMap::new();

        let mut combiner_norm: HashMap<(usize, usize), f64> = HashMap::new();
        for s in &slot.symbols {
            if let BeamConstraint::FullRankCombiner { antenna, row, col } = s.beam {
                *combiner_norm.entry((antenna, row)).or_default() +=
                    combiner_coefficient(row, col).powi(2);
            }
        }
        let mut raw = Vec::new();
        for (i, s) in slot.symbols.iter().enumerate() {
            let weight = match s.beam {
                BeamConstraint::FullRankCombiner { antenna, row, col } => {
                    combiner_coefficient(row, col).powi(2) / combiner_norm[&(antenna, row)]
                }
                _ => 1.0,
            };
            raw.push(realization.snr.pow(at(plan.power[pos][i], alpha)) * weight);
        }
        let total: f64 = raw.iter().sum();
        let scale = if total > p { p / total } else { 1.0 };
        let mut tx = Tx { w: Vec::new() };
        for (s, power) in slot.symbols.iter().zip(&raw) {
            let b = resolve_beam(&s.beam, h_beam, n, &mut cache)?;
            let amp = (power * scale).sqrt();
            tx.w.push(b.v.iter().map(|z| z * amp).collect());
        }
        tx_power.push(raw.iter().sum::<f64>() * scale);

        let ids = &plan.ids[pos];
        for (i, s) in slot.symbols.iter().enumerate() {
            if values[ids[i]].is_some() {
                continue;
            }
            let mut rng = rng_for(payload_rng_seed, ((pos as u64) << 32) | i as u64);
            let v = match &s.source {
                Source::FreshMessage { .. } => cn(&mut rng),
                Source::DigitizedInterference { .. } => {
                    let (sum, var) = plan.sources[pos][i]
                        .iter()
                        .filter_map(|&t| term_values[t])
                        .fold((Complex64::new(0.0, 0.0), 0.0), |(a, va), (v, var)| {
                            (a + v, va + var)
                        });
                    (sum + cn(&mut rng)) / (var + 1.0).sqrt()
                }
            };
            values[ids[i]] = Some(v);
        }
        let slot_values: Vec<Complex64> =
            ids.iter().map(|&i| values[i].unwrap_or_default()).collect();

        let mut slot_rx = Vec::with_capacity(k);
        for u in 0..k {
            let row = matrix_row(&ch.h_true, u);
            let gains: Vec<Complex64> = tx.w.iter().map(|w| apply(&row, w)).collect();
            let powers: Vec<f64> = gains.iter().map(|g| g.norm_sqr()).collect();
            let masks = &plan.step_masks[pos][u];
            for (t, mask) in &plan.rules_at[pos * k + u] {
                let mut v = Complex64::new(0.0, 0.0);
                let mut var = 0.0;
                for i in (0..mask.len()).filter(|&i| mask[i]) {
                    v += gains[i] * slot_values[i];
                    var += powers[i];
                }
                term_values[*t] = Some((v, var));
            }
            if !detail {
                slot_rx.push(powers);
                continue;
            }
            let mut noise_rng = rng_for(
                payload_rng_seed,
                (1 << 63) | ((pos as u64) << 32) | u as u64,
            );
            let mut sample = cn(&mut noise_rng);
            let mut terms = Vec::new();
            for (i, s) in slot.symbols.iter().enumerate() {
                sample += gains[i] * slot_values[i];
                let role = if masks.iter().any(|m| m[i]) {
                    TermRole::Desired
                } else {
                    TermRole::Interference
                };
                terms.push(ReceivedTerm {
                    symbol: s.id.clone(),
                    power: powers[i],
                    role,
                });
            }
            terms.push(ReceivedTerm {
                symbol: "noise".into(),
                power: 1.0,
                role: TermRole::Noise,
            });
            entries.push(SlotReception {
                user: u,
                slot: slot.slot_index,
                terms,
                sample,
            });
            slot_rx.push(powers);
        }
        rx.push(slot_rx);
    }

    let ledger = account(plan, &rx, alpha, p, detail);
    Ok((ReceivedTermBreakdown { entries, tx_power }, ledger))
}

fn account(
    plan: &ExecutionPlan<'_>,
    rx: &[Vec<Vec<f64>>],
    alpha: f64,
    p: f64,
    detail: bool,
) -> SinrLedger {
    let scheme = plan.scheme;
    let k = scheme.k;
    let mut entries = Vec::new();
    // rates[pos][user][step]
    let mut rates: Vec<Vec<Vec<f64>>> = scheme
        .slots
        .iter()
        .map(|slot| {
            (0..k)
                .map(|u| vec![0.0; slot.decode_plan.get(u).map_or(0, Vec::len)])
                .collect()
        })
        .collect();
    for (pos, slot) in scheme.slots.iter().enumerate() {
        for (u, steps) in slot.decode_plan.iter().enumerate().take(k) {
            let powers = &rx[pos][u];
            let mut cancelled: Vec<String> = Vec::new();
            let mut gone = vec![false; slot.symbols.len()];
            for (step_idx, step) in steps.iter().enumerate() {
                let mask = &plan.step_masks[pos][u][step_idx];
                let mut signal = 0.0;
                let mut rest = 1.0;
                for i in 0..powers.len() {
                    if mask[i] {
                        signal += powers[i];
                    } else if !gone[i] {
                        rest += powers[i];
                    }
                }
                let sinr = signal / rest;
                let rate = (1.0 + sinr).log2();
                if step.kind != StepKind::Observe {
                    if detail {
                        cancelled.extend(step.symbols.iter().cloned());
                    }
                    for (g, &m) in gone.iter_mut().zip(mask) {
                        *g |= m;
                    }
                }
                rates[pos][u][step_idx] = rate;
                if !detail {
                    continue;
                }
                entries.push(LedgerEntry {
                    user: u,
                    slot: slot.slot_index,
                    step: step_idx,
                    kind: step.kind,
                    group: step.group.clone(),
                    sinr,
                    rate_bits: rate,
                    cancelled: cancelled.clone(),
                });
            }
        }
    }

    let payload = |id: &str, pos: usize| -> f64 {
        scheme.slots[pos]
            .symbols
            .iter()
            .position(|s| s.id == id)
            .map(|i| at(plan.payload[pos][i], alpha).max(0.0))
            .unwrap_or(0.0)
    };
    let mut groups = Vec::new();
    let mut user_rates = vec![0.0; k];
    for u in 0..k {
        let mut quality: Vec<Vec<Option<f64>>> =
            rates.iter().map(|r| vec![None; r[u].len()]).collect();
        for g in &plan.groups[u] {
            let total: f64 = g.steps.iter().map(|&(pos, s)| rates[pos][u][s]).sum();
            let need: f64 = g
                .unknown
                .iter()
                .map(|s| at(coeffs(&s.payload), alpha).max(0.0))
                .sum();
            let q = if need > 0.0 {
                total / need
            } else {
                f64::INFINITY
            };
            for &(pos, s) in &g.steps {
                quality[pos][s] = Some(q);
            }
            groups.push(GroupRate {
                user: u,
                group: g.label.to_string(),
                rate_bits: total,
            });
        }
        for (pos, slot) in scheme.slots.iter().enumerate() {
            for (s_idx, step) in slot.decode_plan[u].iter().enumerate() {
                if quality[pos][s_idx].is_some() {
                    continue;
                }
                let r = rates[pos][u][s_idx];
                let need = match step.kind {
                    StepKind::Joint => step.symbols.iter().map(|id| payload(id, pos)).sum(),
                    StepKind::Combination => step
                        .symbols
                        .iter()
                        .map(|id| payload(id, pos))
                        .fold(0.0, f64::max),
                    StepKind::Observe => 0.0,
                };
                let q = if need > 0.0 { r / need } else { f64::INFINITY };
                quality[pos][s_idx] = Some(q);
            }
        }
        let know = plan.graphs[u].propagate(&|pos, s| quality[pos][s].unwrap_or(f64::INFINITY));
        let fallback = (1.0 + p).log2();
        let mut bits = 0.0;
        for &(owner, id, coef) in &plan.fresh {
            if owner != u {
                continue;
            }
            let pay = at(coef, alpha).max(0.0);
            if pay == 0.0 {
                continue;
            }
            if let Some(q) = know.quality(id) {
                bits += pay * if q.is_finite() { q } else { fallback };
            }
        }
        user_rates[u] = bits / scheme.slots.len() as f64;
    }
    SinrLedger {
        entries,
        groups,
        user_rates,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alpha::{int, rat, Rational};
    use crate::channel::{sample_episode, CsitQuality, SnrPoint};
    use crate::schemes::{build_x2, build_zf, builtin_catalog};

    fn run(
        scheme: &SchemeSpec,
        alpha: Rational,
        p: f64,
        seed: u64,
    ) -> (ReceivedTermBreakdown, SinrLedger) {
        let q = CsitQuality::new(alpha).unwrap();
        let snr = SnrPoint::from_linear(p).unwrap();
        let ep = sample_episode(scheme.k, scheme.n, scheme.slot_count(), &q, &snr, seed).unwrap();
        execute_episode(scheme, &ep, seed ^ 77).unwrap()
    }

    #[test]
    fn zf_cross_terms_sit_at_noise_level() {
        // three streams share P, so each leaks (P/3)·P^-1 = 1/3 at α = 1
        let zf = build_zf(3, false).unwrap();
        let trials = 400;
        let mut leak = 0.0;
        for t in 0..trials {
            let (b, _) = run(&zf, int(1), 1e6, t);
            for u in 0..3 {
                for v in (0..3).filter(|&v| v != u) {
                    leak += b.power(u, 1, &format!("z{v}")).unwrap();
                }
            }
        }
        let mean = leak / (trials as f64 * 6.0);
        assert!((mean - 1.0 / 3.0).abs() < 0.05, "mean leaked power {mean}");
    }

    #[test]
    fn x2_target_rate_tracks_one_minus_alpha() {
        let x2 = build_x2(0).unwrap();
        let p: f64 = 1e8;
        let trials = 200;
        let mut acc = 0.0;
        for t in 0..trials {
            let (_, l) = run(&x2, rat(1, 2), p, t);
            acc += l.entry(0, 1, 0).unwrap().rate_bits;
        }
        let ratio = acc / trials as f64 / p.log2();
        assert!((0.4..=0.6).contains(&ratio), "{ratio}");
    }

    #[test]
    fn unit_snr_gives_finite_rates() {
        for s in builtin_catalog() {
            let (_, l) = run(&s, rat(1, 2), 1.0, 3);
            assert!(
                l.user_rates.iter().all(|r| r.is_finite() && *r >= 0.0),
                "{}",
                s.name
            );
            assert!(l
                .entries
                .iter()
                .all(|e| e.rate_bits.is_finite() && e.rate_bits >= 0.0));
        }
    }

    #[test]
    fn transmit_power_stays_near_p() {
        let p = 1e6;
        for s in builtin_catalog() {
            let (b, _) = run(&s, rat(1, 2), p, 11);
            for (i, tx) in b.tx_power.iter().enumerate() {
                let r = tx / p;
                assert!(
                    r >= 0.5 && r <= (s.k + 1) as f64,
                    "{} slot {}: {r}",
                    s.name,
                    i + 1
                );
            }
        }
    }

    #[test]
    fn deterministic_in_seeds() {
        let x2 = build_x2(1).unwrap();
        let (b1, l1) = run(&x2, rat(1, 3), 1e4, 5);
        let (b2, l2) = run(&x2, rat(1, 3), 1e4, 5);
        assert_eq!(l1, l2);
        assert_eq!(b1.entries[0].sample, b2.entries[0].sample);
        let (b3, _) = run(&x2, rat(1, 3), 1e4, 6);
        assert_ne!(b1.entries[0].sample, b3.entries[0].sample);
    }

    #[test]
    fn breakdown_labels_roles() {
        let x2 = build_x2(0).unwrap();
        let (b, _) = run(&x2, rat(1, 2), 1e4, 1);
        let e = &b.entries[1];
        assert_eq!(e.user, 1);
        let role = |sym: &str| e.terms.iter().find(|t| t.symbol == sym).unwrap().role;
        assert_eq!(role("s0"), TermRole::Desired);
        assert_eq!(role("p1"), TermRole::Desired);
        assert_eq!(role("p0"), TermRole::Interference);
        assert_eq!(role("noise"), TermRole::Noise);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let zf = build_zf(3, false).unwrap();
        let q = CsitQuality::new(int(1)).unwrap();
        let snr = SnrPoint::from_linear(10.0).unwrap();
        let ep = sample_episode(2, 3, 1, &q, &snr, 0).unwrap();
        assert!(matches!(
            execute_episode(&zf, &ep, 0),
            Err(Error::SlotMismatch(_))
        ));
        let x1 = crate::schemes::build_x1();
        let short = sample_episode(3, 3, 4, &q, &snr, 0).unwrap();
        assert!(matches!(
            execute_episode(&x1, &short, 0),
            Err(Error::SlotMismatch(_))
        ));
    }
}
