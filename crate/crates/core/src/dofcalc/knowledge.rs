//! What a single receiver can eventually reconstruct.
//!
//! Every symbol, interference term and received observation is a quantity.
//! Linear relations are grouped into batches: a batch has a member set and
//! a list of definitions, each a generic linear function of all members.
//! With generic coefficients, knowing any `|members|` of the batch's
//! quantities reveals all members, and knowing all members reveals every
//! definition. Iterating this to a fixpoint models backwards decoding.
//!
//! Each known quantity also carries a bottleneck score, the minimum over
//! the steps it was derived from, which the executor uses to credit rates.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use super::types::{SchemeSpec, Source, StepKind};

#[derive(Default)]
struct Batch {
    members: Vec<usize>,
    defs: Vec<usize>,
}

pub(crate) struct Knowledge {
    index: Arc<HashMap<String, usize>>,
    quality: Vec<Option<f64>>,
}

impl Knowledge {
    pub fn knows(&self, id: &str) -> bool {
        self.quality(id).is_some()
    }

    pub fn quality(&self, id: &str) -> Option<f64> {
        self.index.get(id).and_then(|&q| self.quality[q])
    }
}

struct Builder {
    index: HashMap<String, usize>,
    batches: Vec<Batch>,
    by_members: HashMap<Vec<usize>, usize>,
    /// `(quantity, slot position, step)` revealed directly by a decode step.
    initial: Vec<(usize, usize, usize)>,
}

/// The batch structure for one receiver, reusable across quality scores.
pub(crate) struct Graph {
    index: Arc<HashMap<String, usize>>,
    batches: Vec<Batch>,
    touching: Vec<Vec<usize>>,
    initial: Vec<(usize, usize, usize)>,
}

impl Builder {
    fn quantity(&mut self, name: &str) -> usize {
        let next = self.index.len();
        *self.index.entry(name.to_string()).or_insert(next)
    }

    fn define(&mut self, members: &[usize], def: usize) {
        let mut key = members.to_vec();
        key.sort_unstable();
        key.dedup();
        let b = match self.by_members.get(&key) {
            Some(&b) => b,
            None => {
                self.batches.push(Batch {
                    members: key.clone(),
                    defs: Vec::new(),
                });
                self.by_members.insert(key, self.batches.len() - 1);
                self.batches.len() - 1
            }
        };
        if !self.batches[b].defs.contains(&def) && !self.batches[b].members.contains(&def) {
            self.batches[b].defs.push(def);
        }
    }
}

fn obs_name(pos: usize, step: usize) -> String {
    format!("\u{0}obs:{pos}:{step}")
}

fn rem_name(pos: usize, step: usize) -> String {
    format!("\u{0}rem:{pos}:{step}")
}

/// Closure for `user` using slots at positions `< slot_limit`.
/// `step_quality(pos, step)` scores what the given step reveals.
pub(crate) fn closure(
    scheme: &SchemeSpec,
    user: usize,
    slot_limit: usize,
    step_quality: &dyn Fn(usize, usize) -> f64,
) -> Knowledge {
    Graph::build(scheme, user, slot_limit).propagate(step_quality)
}

impl Graph {
    pub(crate) fn build(scheme: &SchemeSpec, user: usize, slot_limit: usize) -> Graph {
        let mut b = Builder {
            index: HashMap::new(),
            batches: Vec::new(),
            by_members: HashMap::new(),
            initial: Vec::new(),
        };

        for slot in &scheme.slots {
            for s in &slot.symbols {
                b.quantity(&s.id);
            }
        }
        for rule in &scheme.side_info_rules {
            let t = b.quantity(&rule.term);
            let members: Vec<usize> = rule.symbols.iter().map(|s| b.quantity(s)).collect();
            b.define(&members, t);
        }
        let mut digitized_done = BTreeSet::new();
        for slot in &scheme.slots {
            for s in &slot.symbols {
                if let Source::DigitizedInterference { terms } = &s.source {
                    if digitized_done.insert(s.id.clone()) {
                        let d = b.quantity(&s.id);
                        let members: Vec<usize> = terms.iter().map(|t| b.quantity(t)).collect();
                        b.define(&members, d);
                    }
                }
            }
        }

        let mut own_rules: HashMap<usize, Vec<&super::types::SideInfoRule>> = HashMap::new();
        for r in scheme.side_info_rules.iter().filter(|r| r.observer == user) {
            own_rules.entry(r.slot).or_default().push(r);
        }
        for (pos, slot) in scheme.slots.iter().enumerate().take(slot_limit) {
            let Some(plan) = slot.decode_plan.get(user) else {
                continue;
            };
            for (k, step) in plan.iter().enumerate() {
                let q = (pos, k);
                if step.kind == StepKind::Joint {
                    for s in &step.symbols {
                        let id = b.quantity(s);
                        b.initial.push((id, q.0, q.1));
                    }
                    continue;
                }
                let step_set: BTreeSet<&str> = step.symbols.iter().map(String::as_str).collect();
                let parts: Vec<_> = own_rules
                    .get(&slot.slot_index)
                    .map(Vec::as_slice)
                    .unwrap_or(&[])
                    .iter()
                    .filter(|r| r.symbols.iter().all(|s| step_set.contains(s.as_str())))
                    .copied()
                    .collect();
                if let [only] = parts.as_slice() {
                    if only.symbols.len() == step_set.len() {
                        let t = b.quantity(&only.term);
                        b.initial.push((t, q.0, q.1));
                        continue;
                    }
                }
                let obs = b.quantity(&obs_name(pos, k));
                b.initial.push((obs, q.0, q.1));
                if parts.is_empty() {
                    let members: Vec<usize> = step.symbols.iter().map(|s| b.quantity(s)).collect();
                    b.define(&members, obs);
                    continue;
                }
                let covered: BTreeSet<&str> = parts
                    .iter()
                    .flat_map(|r| r.symbols.iter().map(String::as_str))
                    .collect();
                let mut members: Vec<usize> = parts.iter().map(|r| b.quantity(&r.term)).collect();
                let leftover: Vec<&str> = step_set.difference(&covered).copied().collect();
                if !leftover.is_empty() {
                    let rem = b.quantity(&rem_name(pos, k));
                    let rm: Vec<usize> = leftover.iter().map(|s| b.quantity(s)).collect();
                    b.define(&rm, rem);
                    members.push(rem);
                }
                b.define(&members, obs);
            }
        }

        let n = b.index.len();
        let mut touching: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, batch) in b.batches.iter().enumerate() {
            for &q in batch.members.iter().chain(&batch.defs) {
                touching[q].push(i);
            }
        }
        Graph {
            index: Arc::new(b.index),
            batches: b.batches,
            touching,
            initial: b.initial,
        }
    }

    pub(crate) fn propagate(&self, step_quality: &dyn Fn(usize, usize) -> f64) -> Knowledge {
        let b = self;
        let touching = &self.touching;
        let mut quality: Vec<Option<f64>> = vec![None; b.index.len()];
        let mut work = Vec::new();
        for &(q, pos, step) in &b.initial {
            let score = step_quality(pos, step);
            match quality[q] {
                Some(old) if old >= score => {}
                _ => {
                    quality[q] = Some(score);
                    work.push(q);
                }
            }
        }
        while let Some(q) = work.pop() {
            for &bi in &touching[q] {
                let batch = &b.batches[bi];
                let known_members: Vec<f64> =
                    batch.members.iter().filter_map(|&m| quality[m]).collect();
                let known_defs: Vec<f64> = batch.defs.iter().filter_map(|&d| quality[d]).collect();
                if known_members.len() < batch.members.len()
                    && known_members.len() + known_defs.len() >= batch.members.len()
                {
                    let score = known_members
                        .iter()
                        .chain(&known_defs)
                        .cloned()
                        .fold(f64::INFINITY, f64::min);
                    for &m in &batch.members {
                        if quality[m].is_none() {
                            quality[m] = Some(score);
                            work.push(m);
                        }
                    }
                }
                let all_members = batch.members.iter().all(|&m| quality[m].is_some());
                if all_members {
                    let score = batch
                        .members
                        .iter()
                        .filter_map(|&m| quality[m])
                        .fold(f64::INFINITY, f64::min);
                    for &d in &batch.defs {
                        if quality[d].is_none() {
                            quality[d] = Some(score);
                            work.push(d);
                        }
                    }
                }
            }
        }
        Knowledge {
            index: Arc::clone(&b.index),
            quality,
        }
    }
}
