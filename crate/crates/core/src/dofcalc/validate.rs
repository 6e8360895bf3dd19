use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::knowledge::closure;
use super::types::{
    BeamConstraint, DecodeStep, SchemeSpec, SlotDecl, Source, StepKind, SymbolDecl,
};
use crate::alpha::{find_touch, find_violation, format_pq, AffineAlpha, Pwl, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Structure,
    SymbolBounds,
    Budget,
    GapRule,
    DecodeGroup,
    SideInfoClosure,
    TermPayload,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::Structure => "structure",
            Rule::SymbolBounds => "symbol-bounds",
            Rule::Budget => "budget",
            Rule::GapRule => "gap-rule",
            Rule::DecodeGroup => "decode-group",
            Rule::SideInfoClosure => "side-info-closure",
            Rule::TermPayload => "term-payload",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// 1-based slot index, when the violation is local to a slot.
    pub slot: Option<usize>,
    pub user: Option<usize>,
    pub rule: Rule,
    /// An α at which the inequality fails, printed as `p/q`.
    pub witness: Option<String>,
    pub detail: String,
}

impl Violation {
    fn new(
        rule: Rule,
        slot: Option<usize>,
        user: Option<usize>,
        detail: impl Into<String>,
    ) -> Self {
        Violation {
            slot,
            user,
            rule,
            witness: None,
            detail: detail.into(),
        }
    }

    fn at(mut self, witness: Option<Rational>) -> Self {
        self.witness = witness.map(|w| format_pq(&w));
        self
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.rule)?;
        if let Some(s) = self.slot {
            write!(f, " slot {s}")?;
        }
        if let Some(u) = self.user {
            write!(f, " user {u}")?;
        }
        if let Some(w) = &self.witness {
            write!(f, " at α={w}")?;
        }
        write!(f, ": {}", self.detail)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub scheme: String,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, rule: Rule) -> usize {
        self.violations.iter().filter(|v| v.rule == rule).count()
    }
}

fn leaf(a: &AffineAlpha) -> Pwl {
    Pwl::Leaf(a.clone())
}

fn zero() -> Pwl {
    leaf(&AffineAlpha::zero())
}

/// Received power exponent of `sym` at user `u`, or `None` when a perfectly
/// nulled beam removes it altogether.
pub(crate) fn seen_exponent(sym: &SymbolDecl, u: usize, perfect_csit: bool) -> Option<Pwl> {
    match &sym.beam {
        BeamConstraint::NullOf { users } if users.contains(&u) => {
            if perfect_csit {
                None
            } else {
                let reduced = &sym.power_exp - &AffineAlpha::alpha();
                Some(Pwl::Max(vec![leaf(&reduced), zero()]))
            }
        }
        _ => Some(leaf(&sym.power_exp)),
    }
}

/// Gap available to `step`: weakest step symbol over the strongest
/// uncancelled remainder, floored at zero.
pub(crate) fn step_gap(
    slot: &SlotDecl,
    step: &DecodeStep,
    cancelled: &BTreeSet<&str>,
    u: usize,
    perfect: bool,
) -> Pwl {
    let in_step: BTreeSet<&str> = step.symbols.iter().map(String::as_str).collect();
    let signal: Vec<Pwl> = step
        .symbols
        .iter()
        .filter_map(|id| slot.symbol(id))
        .filter_map(|s| seen_exponent(s, u, perfect))
        .collect();
    let mut noise = vec![zero()];
    noise.extend(
        slot.symbols
            .iter()
            .filter(|s| !in_step.contains(s.id.as_str()) && !cancelled.contains(s.id.as_str()))
            .filter_map(|s| seen_exponent(s, u, perfect)),
    );
    Pwl::Diff(Box::new(Pwl::Min(signal)), Box::new(Pwl::Max(noise)))
}

pub(crate) fn step_requirement(slot: &SlotDecl, step: &DecodeStep) -> Pwl {
    let payloads: Vec<Pwl> = step
        .symbols
        .iter()
        .filter_map(|id| slot.symbol(id))
        .map(|s| leaf(&s.payload))
        .collect();
    match step.kind {
        StepKind::Joint => Pwl::Sum(payloads),
        StepKind::Combination | StepKind::Observe => Pwl::Max(payloads),
    }
}

/// Symbols cancelled by the steps before `k` in a user's slot plan.
pub(crate) fn cancelled_before(plan: &[DecodeStep], k: usize) -> BTreeSet<&str> {
    plan[..k]
        .iter()
        .filter(|s| s.kind != StepKind::Observe)
        .flat_map(|s| s.symbols.iter().map(String::as_str))
        .collect()
}

/// A multi-slot decode group of one user.
pub(crate) struct GroupInfo<'a> {
    pub label: &'a str,
    /// `(slot position, step index)`
    pub steps: Vec<(usize, usize)>,
    /// Members the user does not already know before the group starts.
    pub unknown: Vec<&'a SymbolDecl>,
}

pub(crate) fn user_groups<'a>(scheme: &'a SchemeSpec, u: usize) -> Vec<GroupInfo<'a>> {
    let mut by_label: BTreeMap<&str, Vec<(usize, usize)>> = BTreeMap::new();
    for (pos, slot) in scheme.slots.iter().enumerate() {
        if let Some(plan) = slot.decode_plan.get(u) {
            for (k, step) in plan.iter().enumerate() {
                if let Some(g) = &step.group {
                    by_label.entry(g.as_str()).or_default().push((pos, k));
                }
            }
        }
    }
    by_label
        .into_iter()
        .map(|(label, steps)| {
            let first = steps[0].0;
            let before = closure(scheme, u, first, &|_, _| 1.0);
            let mut seen = BTreeSet::new();
            let mut unknown = Vec::new();
            for &(pos, k) in &steps {
                let slot = &scheme.slots[pos];
                for id in &slot.decode_plan[u][k].symbols {
                    if let Some(sym) = slot.symbol(id) {
                        if !before.knows(id) && seen.insert(id.as_str()) {
                            unknown.push(sym);
                        }
                    }
                }
            }
            GroupInfo {
                label,
                steps,
                unknown,
            }
        })
        .collect()
}

fn structure(scheme: &SchemeSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut bad = |slot: Option<usize>, user: Option<usize>, msg: String| {
        out.push(Violation::new(Rule::Structure, slot, user, msg));
    };
    if scheme.k == 0 || scheme.n == 0 {
        bad(
            None,
            None,
            format!("K={} and N={} must be positive", scheme.k, scheme.n),
        );
        return out;
    }
    if scheme.slots.is_empty() {
        bad(None, None, "scheme has no slots".into());
    }
    let (k, n) = (scheme.k, scheme.n);
    let rule_terms: HashMap<&str, usize> = scheme
        .side_info_rules
        .iter()
        .enumerate()
        .map(|(i, r)| (r.term.as_str(), i))
        .collect();
    if rule_terms.len() != scheme.side_info_rules.len() {
        bad(None, None, "duplicate side-info term ids".into());
    }
    let mut first_decl: HashMap<&str, &SymbolDecl> = HashMap::new();
    for (pos, slot) in scheme.slots.iter().enumerate() {
        let s_idx = Some(slot.slot_index);
        if slot.slot_index != pos + 1 {
            bad(
                s_idx,
                None,
                format!("slot at position {} has index {}", pos + 1, slot.slot_index),
            );
        }
        let mut ids = BTreeSet::new();
        for sym in &slot.symbols {
            if !ids.insert(sym.id.as_str()) {
                bad(
                    s_idx,
                    None,
                    format!("symbol `{}` declared twice in one slot", sym.id),
                );
            }
            if let Some(prev) = first_decl.get(sym.id.as_str()) {
                if prev.order != sym.order
                    || prev.dest != sym.dest
                    || prev.payload != sym.payload
                    || prev.source != sym.source
                {
                    bad(
                        s_idx,
                        None,
                        format!("retransmitted symbol `{}` changes its declaration", sym.id),
                    );
                }
            } else {
                first_decl.insert(sym.id.as_str(), sym);
            }
            if sym.dest.is_empty() || sym.dest.iter().any(|&u| u >= k) {
                bad(
                    s_idx,
                    None,
                    format!("symbol `{}` has an invalid destination set", sym.id),
                );
            }
            match &sym.source {
                Source::FreshMessage { user } => {
                    if sym.order != 1 || sym.dest.len() != 1 || !sym.dest.contains(user) {
                        bad(
                            s_idx,
                            None,
                            format!("fresh symbol `{}` must be order 1 for its own user", sym.id),
                        );
                    }
                }
                Source::DigitizedInterference { terms } => {
                    if sym.order != sym.dest.len() {
                        bad(
                            s_idx,
                            None,
                            format!(
                                "digitized symbol `{}` has order {} but {} destinations",
                                sym.id,
                                sym.order,
                                sym.dest.len()
                            ),
                        );
                    }
                    if terms.is_empty() {
                        bad(
                            s_idx,
                            None,
                            format!("digitized symbol `{}` references no terms", sym.id),
                        );
                    }
                    for t in terms {
                        if !rule_terms.contains_key(t.as_str()) {
                            bad(
                                s_idx,
                                None,
                                format!("symbol `{}` references unknown term `{t}`", sym.id),
                            );
                        }
                    }
                }
            }
            match &sym.beam {
                BeamConstraint::Canonical { antenna }
                | BeamConstraint::FullRankCombiner { antenna, .. } => {
                    if *antenna >= n {
                        bad(
                            s_idx,
                            None,
                            format!("symbol `{}` uses antenna {antenna} ≥ N", sym.id),
                        );
                    }
                }
                BeamConstraint::NullOf { users } => {
                    if users.len() >= n || users.iter().any(|&u| u >= k) {
                        bad(
                            s_idx,
                            None,
                            format!("symbol `{}` has an unrealizable null set", sym.id),
                        );
                    }
                }
                BeamConstraint::SpanOf { user } => {
                    if *user >= k {
                        bad(
                            s_idx,
                            None,
                            format!("symbol `{}` spans unknown user {user}", sym.id),
                        );
                    }
                }
            }
        }
        if slot.decode_plan.len() != k {
            bad(
                s_idx,
                None,
                format!(
                    "decode plan lists {} users, expected {k}",
                    slot.decode_plan.len()
                ),
            );
        }
        for (u, plan) in slot.decode_plan.iter().enumerate() {
            let mut used = BTreeSet::new();
            for step in plan {
                if step.symbols.is_empty() {
                    bad(s_idx, Some(u), "empty decode step".into());
                }
                for id in &step.symbols {
                    if !ids.contains(id.as_str()) {
                        bad(
                            s_idx,
                            Some(u),
                            format!("decode step names `{id}`, which is not in the slot"),
                        );
                    }
                    if !used.insert(id.as_str()) {
                        bad(
                            s_idx,
                            Some(u),
                            format!("symbol `{id}` appears in two steps"),
                        );
                    }
                }
            }
        }
    }
    for rule in &scheme.side_info_rules {
        let slot = rule.slot.checked_sub(1).and_then(|p| scheme.slots.get(p));
        let Some(slot) = slot else {
            bad(
                None,
                None,
                format!("term `{}` refers to missing slot {}", rule.term, rule.slot),
            );
            continue;
        };
        if rule.observer >= k || rule.needed_by.iter().any(|&u| u >= k) {
            bad(
                Some(rule.slot),
                None,
                format!("term `{}` names an unknown user", rule.term),
            );
        }
        if rule.symbols.is_empty() {
            bad(
                Some(rule.slot),
                None,
                format!("term `{}` has no symbols", rule.term),
            );
        }
        for id in &rule.symbols {
            if slot.symbol(id).is_none() {
                bad(
                    Some(rule.slot),
                    None,
                    format!("term `{}` names `{id}`, absent from its slot", rule.term),
                );
            }
        }
    }
    out
}

fn symbol_bounds(scheme: &SchemeSpec, out: &mut Vec<Violation>) {
    let zero_pwl = zero();
    let one_pwl = leaf(&AffineAlpha::one());
    for slot in &scheme.slots {
        let s_idx = Some(slot.slot_index);
        let mut powers = Vec::new();
        for sym in &slot.symbols {
            let p = leaf(&sym.power_exp);
            if let Some(w) = find_violation(&zero_pwl, &p) {
                out.push(
                    Violation::new(
                        Rule::SymbolBounds,
                        s_idx,
                        None,
                        format!("power exponent of `{}` is negative", sym.id),
                    )
                    .at(Some(w)),
                );
            }
            if let Some(w) = find_violation(&zero_pwl, &leaf(&sym.payload)) {
                out.push(
                    Violation::new(
                        Rule::SymbolBounds,
                        s_idx,
                        None,
                        format!("payload of `{}` is negative", sym.id),
                    )
                    .at(Some(w)),
                );
            }
            powers.push(p);
        }
        if let Some(w) = find_violation(&Pwl::Max(powers), &one_pwl) {
            out.push(
                Violation::new(Rule::Budget, s_idx, None, "slot power exponent exceeds 1")
                    .at(Some(w)),
            );
        }
    }
}

fn gap_rules(scheme: &SchemeSpec, out: &mut Vec<Violation>) {
    let perfect = scheme.perfect_csit;
    for slot in &scheme.slots {
        for (u, plan) in slot.decode_plan.iter().enumerate() {
            for (k, step) in plan.iter().enumerate() {
                if step.kind == StepKind::Observe || step.group.is_some() {
                    continue;
                }
                let cancelled = cancelled_before(plan, k);
                let gap = step_gap(slot, step, &cancelled, u, perfect);
                let need = step_requirement(slot, step);
                if let Some(w) = find_violation(&need, &gap) {
                    out.push(
                        Violation::new(
                            Rule::GapRule,
                            Some(slot.slot_index),
                            Some(u),
                            format!(
                                "step {} over [{}] needs more than its gap",
                                k + 1,
                                step.symbols.join(", ")
                            ),
                        )
                        .at(Some(w)),
                    );
                }
            }
        }
    }

    for u in 0..scheme.k {
        for g in user_groups(scheme, u) {
            let s_idx = Some(scheme.slots[g.steps[0].0].slot_index);
            if g.unknown.len() > g.steps.len() {
                out.push(Violation::new(
                    Rule::DecodeGroup,
                    s_idx,
                    Some(u),
                    format!(
                        "group `{}` has {} unknown symbols but only {} equations",
                        g.label,
                        g.unknown.len(),
                        g.steps.len()
                    ),
                ));
            }
            let need = Pwl::Sum(g.unknown.iter().map(|s| leaf(&s.payload)).collect());
            let capacity = group_capacity(scheme, u, &g.steps);
            if let Some(w) = find_violation(&need, &capacity) {
                out.push(
                    Violation::new(
                        Rule::DecodeGroup,
                        s_idx,
                        Some(u),
                        format!(
                            "group `{}` payload exceeds the sum of its slot gaps",
                            g.label
                        ),
                    )
                    .at(Some(w)),
                );
            }
        }
    }
}

pub(crate) fn group_capacity(scheme: &SchemeSpec, u: usize, steps: &[(usize, usize)]) -> Pwl {
    Pwl::Sum(
        steps
            .iter()
            .map(|&(pos, k)| {
                let slot = &scheme.slots[pos];
                let plan = &slot.decode_plan[u];
                step_gap(
                    slot,
                    &plan[k],
                    &cancelled_before(plan, k),
                    u,
                    scheme.perfect_csit,
                )
            })
            .collect(),
    )
}

fn side_info(scheme: &SchemeSpec, out: &mut Vec<Violation>) {
    let index = scheme.symbol_index();
    for u in 0..scheme.k {
        let know = closure(scheme, u, scheme.slots.len(), &|_, _| 1.0);
        for sym in scheme.fresh_symbols() {
            if sym.fresh_user() == Some(u) && !know.knows(&sym.id) {
                let slot = index[sym.id.as_str()].0 + 1;
                out.push(Violation::new(
                    Rule::SideInfoClosure,
                    Some(slot),
                    Some(u),
                    format!("fresh symbol `{}` is never resolved", sym.id),
                ));
            }
        }
        for rule in &scheme.side_info_rules {
            if rule.needed_by.contains(&u) && !know.knows(&rule.term) {
                out.push(Violation::new(
                    Rule::SideInfoClosure,
                    Some(rule.slot),
                    Some(u),
                    format!("needed term `{}` is never delivered", rule.term),
                ));
            }
        }
    }

    for rule in &scheme.side_info_rules {
        let s_idx = Some(rule.slot);
        for d in &rule.delivered_by {
            let Some(&(pos, sym)) = index.get(d.as_str()) else {
                out.push(Violation::new(
                    Rule::SideInfoClosure,
                    s_idx,
                    None,
                    format!("term `{}` is delivered by missing symbol `{d}`", rule.term),
                ));
                continue;
            };
            let carries = matches!(&sym.source,
                Source::DigitizedInterference { terms } if terms.contains(&rule.term));
            if !carries {
                out.push(Violation::new(
                    Rule::SideInfoClosure,
                    s_idx,
                    None,
                    format!("`{d}` does not digitize term `{}`", rule.term),
                ));
            }
            if pos < rule.slot {
                out.push(Violation::new(
                    Rule::SideInfoClosure,
                    s_idx,
                    None,
                    format!("`{d}` is sent before term `{}` is observed", rule.term),
                ));
            }
            if !rule.needed_by.is_subset(&sym.dest) {
                out.push(Violation::new(
                    Rule::SideInfoClosure,
                    s_idx,
                    None,
                    format!("`{d}` does not reach every user needing `{}`", rule.term),
                ));
            }
            if let Some(w) = find_violation(&leaf(&rule.payload), &leaf(&sym.payload)) {
                out.push(
                    Violation::new(
                        Rule::SideInfoClosure,
                        s_idx,
                        None,
                        format!("`{d}` carries less than term `{}`", rule.term),
                    )
                    .at(Some(w)),
                );
            }
        }

        let Some(slot) = scheme.slots.get(rule.slot - 1) else {
            continue;
        };
        let plan = slot
            .decode_plan
            .get(rule.observer)
            .map(Vec::as_slice)
            .unwrap_or(&[]);
        let covering = plan.iter().position(|st| {
            st.kind != StepKind::Joint && rule.symbols.iter().all(|s| st.symbols.contains(s))
        });
        let Some(k) = covering else {
            out.push(Violation::new(
                Rule::SideInfoClosure,
                s_idx,
                Some(rule.observer),
                format!(
                    "term `{}` is not part of any observation of its observer",
                    rule.term
                ),
            ));
            continue;
        };
        // the term must be stored finely enough to sit at the noise floor
        let step = &plan[k];
        let cancelled = cancelled_before(plan, k);
        let u = rule.observer;
        let strongest = Pwl::Max(
            rule.symbols
                .iter()
                .filter_map(|id| slot.symbol(id))
                .filter_map(|s| seen_exponent(s, u, scheme.perfect_csit))
                .collect(),
        );
        let mut floor = vec![zero()];
        floor.extend(
            slot.symbols
                .iter()
                .filter(|s| !step.symbols.contains(&s.id) && !cancelled.contains(s.id.as_str()))
                .filter_map(|s| seen_exponent(s, u, scheme.perfect_csit)),
        );
        let need = Pwl::Diff(Box::new(strongest), Box::new(Pwl::Max(floor)));
        if let Some(w) = find_violation(&need, &leaf(&rule.payload)) {
            out.push(
                Violation::new(
                    Rule::TermPayload,
                    s_idx,
                    Some(u),
                    format!("term `{}` is quantized too coarsely", rule.term),
                )
                .at(Some(w)),
            );
        }
    }
}

pub fn validate(scheme: &SchemeSpec) -> ValidationReport {
    let mut violations = structure(scheme);
    if violations.is_empty() {
        symbol_bounds(scheme, &mut violations);
        gap_rules(scheme, &mut violations);
        side_info(scheme, &mut violations);
    }
    ValidationReport {
        scheme: scheme.name.clone(),
        violations,
    }
}

/// A fresh symbol whose payload cannot grow: some rate-checked step or
/// group containing it meets its bound with equality at `alpha`.
#[derive(Clone, Debug, PartialEq)]
pub struct TightSymbol {
    pub id: String,
    pub slot: usize,
    pub user: usize,
    pub alpha: Rational,
}

pub fn tight_fresh_symbols(scheme: &SchemeSpec) -> Vec<TightSymbol> {
    let mut out: Vec<TightSymbol> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut push =
        |id: &str, slot: usize, user: usize, alpha: Rational, out: &mut Vec<TightSymbol>| {
            if seen.insert(id.to_string()) {
                out.push(TightSymbol {
                    id: id.to_string(),
                    slot,
                    user,
                    alpha,
                });
            }
        };
    for slot in &scheme.slots {
        for (u, plan) in slot.decode_plan.iter().enumerate() {
            for (k, step) in plan.iter().enumerate() {
                if step.kind == StepKind::Observe || step.group.is_some() {
                    continue;
                }
                let gap = step_gap(
                    slot,
                    step,
                    &cancelled_before(plan, k),
                    u,
                    scheme.perfect_csit,
                );
                let need = step_requirement(slot, step);
                let Some(a) = find_touch(&need, &gap) else {
                    continue;
                };
                let max_payload = need.eval(&a);
                for id in &step.symbols {
                    let Some(sym) = slot.symbol(id) else { continue };
                    if sym.fresh_user().is_none() {
                        continue;
                    }
                    if step.kind == StepKind::Joint || sym.payload.eval(&a) == max_payload {
                        push(id, slot.slot_index, u, a.clone(), &mut out);
                    }
                }
            }
        }
    }
    for u in 0..scheme.k {
        for g in user_groups(scheme, u) {
            let need = Pwl::Sum(g.unknown.iter().map(|s| leaf(&s.payload)).collect());
            if let Some(a) = find_touch(&need, &group_capacity(scheme, u, &g.steps)) {
                let slot = scheme.slots[g.steps[0].0].slot_index;
                for s in g.unknown.iter().filter(|s| s.fresh_user().is_some()) {
                    push(&s.id, slot, u, a.clone(), &mut out);
                }
            }
        }
    }
    out
}

/// Adds `eps` to the payload of every declaration of symbol `id`.
pub fn inflate_payload(scheme: &SchemeSpec, id: &str, eps: &Rational) -> SchemeSpec {
    let mut out = scheme.clone();
    let bump = AffineAlpha::constant(eps.clone());
    for slot in &mut out.slots {
        for sym in &mut slot.symbols {
            if sym.id == id {
                sym.payload = &sym.payload + &bump;
            }
        }
    }
    out
}
