use std::collections::BTreeMap;

use num_integer::Integer;

use crate::alpha::AffineAlpha;
use crate::dofcalc::{
    users, BeamConstraint, DecodeStep, SchemeSpec, SideInfoRule, SlotDecl, SymbolDecl, UserSet,
};
use crate::error::{Error, Result};

const MAX_K: usize = 8;

fn check_k(scheme: &str, k: usize, min: usize) -> Result<()> {
    if k < min || k > MAX_K {
        return Err(Error::UnsupportedK {
            scheme: scheme.into(),
            k,
            min,
            max: MAX_K,
        });
    }
    Ok(())
}

fn empty_plan(k: usize) -> Vec<Vec<DecodeStep>> {
    vec![Vec::new(); k]
}

fn all_but(k: usize, u: usize) -> UserSet {
    (0..k).filter(|&j| j != u).collect()
}

fn canonical(antenna: usize) -> BeamConstraint {
    BeamConstraint::Canonical { antenna }
}

fn null_of(set: UserSet) -> BeamConstraint {
    BeamConstraint::NullOf { users: set }
}

/// ZF private for user `u`, nulled towards everyone else at `P^α`.
fn zf_private(id: String, u: usize, k: usize) -> SymbolDecl {
    SymbolDecl::fresh(
        id,
        u,
        AffineAlpha::alpha(),
        AffineAlpha::alpha(),
        null_of(all_but(k, u)),
    )
}

fn rule(
    term: String,
    observer: usize,
    slot: usize,
    symbols: &[String],
    needed_by: UserSet,
) -> SideInfoRule {
    SideInfoRule {
        term,
        observer,
        slot,
        symbols: symbols.to_vec(),
        payload: AffineAlpha::one_minus_alpha(),
        needed_by,
        delivered_by: Vec::new(),
    }
}

fn deliver(rules: &mut [SideInfoRule], term: &str, symbol: &str) {
    if let Some(r) = rules.iter_mut().rev().find(|r| r.term == term) {
        r.delivered_by.push(symbol.to_string());
    }
}

fn ids(symbols: &[SymbolDecl]) -> Vec<String> {
    symbols.iter().map(|s| s.id.clone()).collect()
}

/// Three-phase, 11-slot scheme for K = N = 3 achieving `(6+5α)/11` per user.
pub fn build_x1() -> SchemeSpec {
    let k = 3;
    let mut spec = SchemeSpec::new("x1", k, 3);
    let mut rules = Vec::new();
    let pairs = [(0, 1), (0, 2), (1, 2)];

    // Phase 1: slots 1-3 carry s_w, slots 4-6 repeat with s̄_w.
    for t in 1..=6 {
        let w = (t - 1) % 3;
        let base = if t <= 3 { "s" } else { "sb" };
        let mut symbols: Vec<SymbolDecl> = (0..3)
            .map(|m| {
                SymbolDecl::fresh(
                    format!("{base}{w}_{m}"),
                    w,
                    AffineAlpha::one(),
                    AffineAlpha::one_minus_alpha(),
                    canonical(m),
                )
            })
            .collect();
        let vector = ids(&symbols);
        for o in (0..k).filter(|&o| o != w) {
            rules.push(rule(format!("T{o}@{t}"), o, t, &vector, users([w])));
        }
        let mut plan = empty_plan(k);
        for u in 0..k {
            let p = format!("p{u}@{t}");
            symbols.push(zf_private(p.clone(), u, k));
            plan[u] = vec![
                DecodeStep::combination(vector.clone()),
                DecodeStep::joint([p]),
            ];
        }
        spec.slots.push(SlotDecl {
            slot_index: t,
            symbols,
            decode_plan: plan,
        });
    }

    // Phase 2: order-2 pairs c_ij = T(j@slot_i) + T(i@slot_j).
    for (pi, &(i, j)) in pairs.iter().enumerate() {
        let t = 7 + pi;
        let mut symbols = Vec::new();
        for (bar, offset) in [("", 1), ("b", 4)] {
            let id = format!("c{bar}{i}{j}");
            let terms = vec![
                format!("T{j}@{}", i + offset),
                format!("T{i}@{}", j + offset),
            ];
            for term in &terms {
                deliver(&mut rules, term, &id);
            }
            let antenna = if bar.is_empty() { 0 } else { 1 };
            symbols.push(SymbolDecl::digitized(
                id,
                users([i, j]),
                AffineAlpha::one(),
                AffineAlpha::one_minus_alpha(),
                canonical(antenna),
                terms,
            ));
        }
        let commons = ids(&symbols);
        let outsider = 3 - i - j;
        rules.push(rule(
            format!("T{outsider}@{t}"),
            outsider,
            t,
            &commons,
            users([i, j]),
        ));
        let mut plan = empty_plan(k);
        for u in 0..k {
            let p = format!("p{u}@{t}");
            symbols.push(zf_private(p.clone(), u, k));
            plan[u] = vec![
                DecodeStep::combination(commons.clone()),
                DecodeStep::joint([p]),
            ];
        }
        spec.slots.push(SlotDecl {
            slot_index: t,
            symbols,
            decode_plan: plan,
        });
    }

    // Phase 3: two full-rank combinations of the three order-3 symbols.
    let order3: Vec<SymbolDecl> = pairs
        .iter()
        .enumerate()
        .map(|(pi, &(i, j))| {
            let term = format!("T{}@{}", 3 - i - j, 7 + pi);
            let id = format!("c012_{pi}");
            deliver(&mut rules, &term, &id);
            SymbolDecl::digitized(
                id,
                users([0, 1, 2]),
                AffineAlpha::one(),
                AffineAlpha::one_minus_alpha(),
                canonical(0),
                vec![term],
            )
        })
        .collect();
    for (row, t) in [10, 11].into_iter().enumerate() {
        let mut symbols: Vec<SymbolDecl> = order3
            .iter()
            .enumerate()
            .map(|(col, s)| SymbolDecl {
                beam: BeamConstraint::FullRankCombiner {
                    antenna: 0,
                    row,
                    col,
                },
                ..s.clone()
            })
            .collect();
        let commons = ids(&symbols);
        let mut plan = empty_plan(k);
        for u in 0..k {
            let p = format!("p{u}@{t}");
            symbols.push(zf_private(p.clone(), u, k));
            plan[u] = vec![
                DecodeStep::combination(commons.clone()).in_group("phase3"),
                DecodeStep::joint([p]),
            ];
        }
        spec.slots.push(SlotDecl {
            slot_index: t,
            symbols,
            decode_plan: plan,
        });
    }
    spec.side_info_rules = rules;
    spec
}

/// One-slot scheme for K = N = 3 reaching `(1, α, α)` permuted to `target`.
pub fn build_x2(target: usize) -> Result<SchemeSpec> {
    if target >= 3 {
        return Err(Error::InvalidArgument(format!(
            "target user {target} outside 0..3"
        )));
    }
    let mut spec = build_x4(3, target)?;
    spec.name = format!("x2:{target}");
    Ok(spec)
}

/// One-slot K-user scheme: the target gets 1 DoF, everyone else α.
pub fn build_x4(k: usize, target: usize) -> Result<SchemeSpec> {
    check_k("x4", k, 2)?;
    if target >= k {
        return Err(Error::InvalidArgument(format!(
            "target user {target} outside 0..{k}"
        )));
    }
    let mut spec = SchemeSpec::new(format!("x4:{k}:{target}"), k, k);
    let main = format!("s{target}");
    let mut symbols = vec![SymbolDecl::fresh(
        main.clone(),
        target,
        AffineAlpha::one(),
        AffineAlpha::one_minus_alpha(),
        canonical(0),
    )];
    let mut plan = empty_plan(k);
    for u in 0..k {
        let p = format!("p{u}");
        symbols.push(zf_private(p.clone(), u, k));
        plan[u] = vec![DecodeStep::joint([main.clone()]), DecodeStep::joint([p])];
    }
    spec.slots.push(SlotDecl {
        slot_index: 1,
        symbols,
        decode_plan: plan,
    });
    Ok(spec)
}

fn binomial(n: usize, r: usize) -> usize {
    if r > n {
        return 0;
    }
    (0..r).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn subsets(k: usize, size: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, k: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for x in start..k {
            cur.push(x);
            rec(x + 1, k, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, k, size, &mut Vec::new(), &mut out);
    out
}

fn set_tag(set: &[usize]) -> String {
    set.iter()
        .map(|u| u.to_string())
        .collect::<Vec<_>>()
        .join(".")
}

/// Slots per subset in each MAT phase: `n_j = n_1 / C(K-1, j-1)` with
/// `n_1 = lcm_j C(K-1, j-1)`.
pub fn mat_rounds(k: usize) -> Vec<usize> {
    let n1 = (1..=k).fold(1, |acc, j| acc.lcm(&binomial(k - 1, j - 1)));
    (1..=k).map(|j| n1 / binomial(k - 1, j - 1)).collect()
}

/// The K-user MAT schedule. Phase `j` sends `K-j+1` order-`j` symbols per
/// slot for each user subset of size `j`; what the outsiders overhear is
/// recombined into order-`j+1` symbols for the next phase.
fn mat_schedule(name: String, k: usize, payload: AffineAlpha, with_zf: bool) -> SchemeSpec {
    let rounds = mat_rounds(k);
    let mut spec = SchemeSpec::new(name, k, k);
    let mut rules: Vec<SideInfoRule> = Vec::new();
    let mut rule_pos: std::collections::HashMap<String, usize> = std::collections::HashMap::new();
    let mut t = 0;
    // order-j symbols waiting to be sent, keyed by destination subset
    let mut pending: BTreeMap<Vec<usize>, Vec<SymbolDecl>> = BTreeMap::new();

    for j in 1..=k {
        let per_slot = k - j + 1;
        // (T, round) → overheard terms
        let mut families: BTreeMap<(Vec<usize>, usize), Vec<String>> = BTreeMap::new();
        for set in subsets(k, j) {
            let queue: Vec<SymbolDecl> = if j == 1 {
                let u = set[0];
                (0..rounds[0] * per_slot)
                    .map(|i| {
                        SymbolDecl::fresh(
                            format!("m{u}_{}_{}", i / per_slot, i % per_slot),
                            u,
                            AffineAlpha::one(),
                            payload.clone(),
                            canonical(0),
                        )
                    })
                    .collect()
            } else {
                pending.remove(&set).unwrap_or_default()
            };
            debug_assert_eq!(queue.len(), rounds[j - 1] * per_slot);
            for (round, chunk) in queue.chunks(per_slot).enumerate() {
                t += 1;
                let mut symbols: Vec<SymbolDecl> = chunk
                    .iter()
                    .enumerate()
                    .map(|(a, s)| SymbolDecl {
                        beam: canonical(a),
                        ..s.clone()
                    })
                    .collect();
                let commons = ids(&symbols);
                let mut plan = empty_plan(k);
                for u in 0..k {
                    plan[u].push(DecodeStep::combination(commons.clone()));
                    if with_zf {
                        let p = format!("p{u}@{t}");
                        symbols.push(zf_private(p.clone(), u, k));
                        plan[u].push(DecodeStep::joint([p]));
                    }
                }
                for w in (0..k).filter(|w| !set.contains(w)) {
                    let term = format!("o{w}@{t}");
                    let mut r = rule(term.clone(), w, t, &commons, set.iter().copied().collect());
                    r.payload = payload.clone();
                    rule_pos.insert(term.clone(), rules.len());
                    rules.push(r);
                    let mut bigger = set.clone();
                    bigger.push(w);
                    bigger.sort_unstable();
                    families.entry((bigger, round)).or_default().push(term);
                }
                spec.slots.push(SlotDecl {
                    slot_index: t,
                    symbols,
                    decode_plan: plan,
                });
            }
        }
        // j+1 terms per family, each user of T knows one: j combinations
        for ((bigger, round), terms) in families {
            let tag = set_tag(&bigger);
            for i in 0..j {
                let id = format!("q{tag}_{round}_{i}");
                for term in &terms {
                    rules[rule_pos[term]].delivered_by.push(id.clone());
                }
                pending
                    .entry(bigger.clone())
                    .or_default()
                    .push(SymbolDecl::digitized(
                        id,
                        bigger.iter().copied().collect(),
                        AffineAlpha::one(),
                        payload.clone(),
                        canonical(0),
                        terms.clone(),
                    ));
            }
        }
    }
    spec.side_info_rules = rules;
    spec
}

/// MAT part with `(1-α)` payloads superposed with K ZF privates per slot.
pub fn build_x3(k: usize) -> Result<SchemeSpec> {
    check_k("x3", k, 2)?;
    Ok(mat_schedule(
        format!("x3:{k}"),
        k,
        AffineAlpha::one_minus_alpha(),
        true,
    ))
}

/// Pure delayed-CSIT MAT baseline.
pub fn build_mat(k: usize) -> Result<SchemeSpec> {
    check_k("mat", k, 2)?;
    Ok(mat_schedule(
        format!("mat:{k}"),
        k,
        AffineAlpha::one(),
        false,
    ))
}

/// One slot of K zero-forced streams at full power.
pub fn build_zf(k: usize, perfect_csit: bool) -> Result<SchemeSpec> {
    check_k("zf", k, 1)?;
    let name = if perfect_csit {
        format!("zf-perfect:{k}")
    } else {
        format!("zf:{k}")
    };
    let mut spec = SchemeSpec::new(name, k, k);
    spec.perfect_csit = perfect_csit;
    // a lone user sees no leakage, so imperfect CSIT costs nothing
    let payload = if perfect_csit || k == 1 {
        AffineAlpha::one()
    } else {
        AffineAlpha::alpha()
    };
    let mut symbols = Vec::new();
    let mut plan = empty_plan(k);
    for u in 0..k {
        let id = format!("z{u}");
        symbols.push(SymbolDecl::fresh(
            id.clone(),
            u,
            AffineAlpha::one(),
            payload.clone(),
            null_of(all_but(k, u)),
        ));
        plan[u] = vec![DecodeStep::joint([id])];
    }
    spec.slots.push(SlotDecl {
        slot_index: 1,
        symbols,
        decode_plan: plan,
    });
    Ok(spec)
}

/// Round-robin single-antenna transmission, one user per slot.
pub fn build_tdma(k: usize) -> Result<SchemeSpec> {
    check_k("tdma", k, 1)?;
    let mut spec = SchemeSpec::new(format!("tdma:{k}"), k, 1);
    for u in 0..k {
        let id = format!("t{u}");
        let mut plan = empty_plan(k);
        plan[u] = vec![DecodeStep::joint([id.clone()])];
        spec.slots.push(SlotDecl {
            slot_index: u + 1,
            symbols: vec![SymbolDecl::fresh(
                id,
                u,
                AffineAlpha::one(),
                AffineAlpha::one(),
                canonical(0),
            )],
            decode_plan: plan,
        });
    }
    Ok(spec)
}

/// Three-phase, 8-slot scheme for K = 3, N = 2 with total `(3+α)/2`.
///
/// Phase 1 serves two users per slot, each vector split between the span
/// and the null space of the partner's estimate. Each served user's
/// observation contains the partner's vector as interference `η`, which
/// is digitized and sent as an order-2 symbol in phase 2. The third
/// user's phase-2 observations are the order-2 `d` symbols combined in
/// phase 3. The per-user split is symmetrized by relabeling.
pub fn build_x5() -> SchemeSpec {
    let k = 3;
    let mut spec = SchemeSpec::new("x5", k, 2);
    spec.round_robin = true;
    let mut rules = Vec::new();

    // (vector name, owner, partner) pairs per phase-1 slot
    let phase1 = [
        [("s0", 0, 1), ("s1", 1, 0)],
        [("sb0", 0, 2), ("s2", 2, 0)],
        [("sb1", 1, 2), ("sb2", 2, 1)],
    ];
    // digitized name for η observed by (slot, observer)
    let eta_name = |t: usize, obs: usize| -> String {
        match (t, obs) {
            (1, 0) => "c_0",
            (1, 1) => "c_1",
            (2, 0) => "cb_0",
            (2, 2) => "c_2",
            (3, 1) => "cb_1",
            _ => "cb_2",
        }
        .to_string()
    };

    let mut etas: Vec<(usize, usize, usize, String)> = Vec::new();
    for (pi, pair) in phase1.iter().enumerate() {
        let t = pi + 1;
        let mut symbols = Vec::new();
        let mut vectors = Vec::new();
        for &(name, owner, partner) in pair {
            let a = SymbolDecl::fresh(
                format!("{name}_a"),
                owner,
                AffineAlpha::one_minus_alpha(),
                AffineAlpha::one_minus_alpha(),
                BeamConstraint::SpanOf { user: partner },
            );
            let b = SymbolDecl::fresh(
                format!("{name}_b"),
                owner,
                AffineAlpha::one(),
                AffineAlpha::one(),
                null_of(users([partner])),
            );
            vectors.push((owner, vec![a.id.clone(), b.id.clone()]));
            symbols.push(a);
            symbols.push(b);
        }
        let all = ids(&symbols);
        let mut plan = empty_plan(k);
        for &(owner, partner) in &[(vectors[0].0, vectors[1].0), (vectors[1].0, vectors[0].0)] {
            plan[owner] = vec![DecodeStep::observe(all.clone())];
            let partner_vec = &vectors.iter().find(|v| v.0 == partner).unwrap().1;
            let term = format!("eta{owner}@{t}");
            rules.push(rule(
                term.clone(),
                owner,
                t,
                partner_vec,
                users([owner, partner]),
            ));
            etas.push((t, owner, partner, term));
        }
        spec.slots.push(SlotDecl {
            slot_index: t,
            symbols,
            decode_plan: plan,
        });
    }

    let digit: BTreeMap<String, SymbolDecl> = etas
        .iter()
        .map(|(t, obs, partner, term)| {
            let id = eta_name(*t, *obs);
            deliver(&mut rules, term, &id);
            let sym = SymbolDecl::digitized(
                id.clone(),
                users([*obs, *partner]),
                AffineAlpha::one(),
                AffineAlpha::one_minus_alpha(),
                canonical(0),
                vec![term.clone()],
            );
            (id, sym)
        })
        .collect();

    // Phase 2: [c, c'] to a pair plus their two nulled privates.
    let phase2 = [
        (["c_0", "c_1"], (0, 1)),
        (["cb_0", "c_2"], (0, 2)),
        (["cb_1", "cb_2"], (1, 2)),
    ];
    let mut d_symbols = Vec::new();
    for (pi, (names, (i, j))) in phase2.iter().enumerate() {
        let t = 4 + pi;
        let mut symbols: Vec<SymbolDecl> = names
            .iter()
            .enumerate()
            .map(|(a, n)| SymbolDecl {
                beam: canonical(a),
                ..digit[*n].clone()
            })
            .collect();
        let commons = ids(&symbols);
        let outsider = 3 - i - j;
        let term = format!("T{outsider}@{t}");
        rules.push(rule(term.clone(), outsider, t, &commons, users([*i, *j])));
        let d_id = format!("d_{i}{j}");
        deliver(&mut rules, &term, &d_id);
        d_symbols.push(SymbolDecl::digitized(
            d_id,
            users([*i, *j]),
            AffineAlpha::one(),
            AffineAlpha::one_minus_alpha(),
            canonical(0),
            vec![term],
        ));
        let mut plan = empty_plan(k);
        plan[outsider] = vec![DecodeStep::combination(commons.clone())];
        for (u, other) in [(*i, *j), (*j, *i)] {
            let p = format!("p{u}@{t}");
            symbols.push(SymbolDecl::fresh(
                p.clone(),
                u,
                AffineAlpha::alpha(),
                AffineAlpha::alpha(),
                null_of(users([other])),
            ));
            plan[u] = vec![
                DecodeStep::combination(commons.clone()),
                DecodeStep::joint([p]),
            ];
        }
        spec.slots.push(SlotDecl {
            slot_index: t,
            symbols,
            decode_plan: plan,
        });
    }

    // Phase 3: two combinations of the d symbols; privates to (0,1) then (0,2).
    for (row, (t, (i, j))) in [(7, (0, 1)), (8, (0, 2))].into_iter().enumerate() {
        let mut symbols: Vec<SymbolDecl> = d_symbols
            .iter()
            .enumerate()
            .map(|(col, s)| SymbolDecl {
                beam: BeamConstraint::FullRankCombiner {
                    antenna: 0,
                    row,
                    col,
                },
                ..s.clone()
            })
            .collect();
        let commons = ids(&symbols);
        let mut plan = empty_plan(k);
        for u in 0..k {
            plan[u].push(DecodeStep::combination(commons.clone()).in_group("phase3"));
        }
        for (u, other) in [(i, j), (j, i)] {
            let p = format!("p{u}@{t}");
            symbols.push(SymbolDecl::fresh(
                p.clone(),
                u,
                AffineAlpha::alpha(),
                AffineAlpha::alpha(),
                null_of(users([other])),
            ));
            plan[u].push(DecodeStep::joint([p]));
        }
        spec.slots.push(SlotDecl {
            slot_index: t,
            symbols,
            decode_plan: plan,
        });
    }
    spec.side_info_rules = rules;
    spec
}

fn parse_usize(s: &str, name: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::UnknownScheme(format!("{name} (bad integer `{s}`)")))
}

/// Builds a scheme from names such as `x1`, `x2:0`, `x3:4`, `x4:4:1`,
/// `x5`, `mat:3`, `zf:3`, `zf-perfect:3`, `tdma:3`.
pub fn resolve_scheme(name: &str) -> Result<SchemeSpec> {
    let parts: Vec<&str> = name.trim().split(':').collect();
    let arg = |i: usize| -> Result<usize> {
        parts
            .get(i)
            .ok_or_else(|| Error::UnknownScheme(format!("{name} (missing parameter)")))
            .and_then(|s| parse_usize(s, name))
    };
    let arity = |n: usize| -> Result<()> {
        if parts.len() > n + 1 {
            Err(Error::UnknownScheme(format!(
                "{name} (too many parameters)"
            )))
        } else {
            Ok(())
        }
    };
    match parts[0].to_ascii_lowercase().as_str() {
        "x1" => arity(0).map(|_| build_x1()),
        "x2" => {
            arity(1)?;
            build_x2(if parts.len() > 1 { arg(1)? } else { 0 })
        }
        "x3" => {
            arity(1)?;
            build_x3(arg(1)?)
        }
        "x4" => {
            arity(2)?;
            build_x4(arg(1)?, if parts.len() > 2 { arg(2)? } else { 0 })
        }
        "x5" => arity(0).map(|_| build_x5()),
        "mat" => {
            arity(1)?;
            build_mat(arg(1)?)
        }
        "zf" => {
            arity(1)?;
            build_zf(arg(1)?, false)
        }
        "zf-perfect" => {
            arity(1)?;
            build_zf(arg(1)?, true)
        }
        "tdma" => {
            arity(1)?;
            build_tdma(arg(1)?)
        }
        _ => Err(Error::UnknownScheme(name.to_string())),
    }
}

/// Every built-in scheme at the parameters used in the test suites.
pub fn builtin_catalog() -> Vec<SchemeSpec> {
    let mut out = vec![build_x1(), build_x5()];
    out.extend((0..3).map(|t| build_x2(t).unwrap()));
    out.extend((2..=MAX_K).map(|k| build_x3(k).unwrap()));
    out.extend((2..=5).map(|k| build_x4(k, k - 1).unwrap()));
    out.extend((2..=5).map(|k| build_mat(k).unwrap()));
    out.extend((1..=4).flat_map(|k| [build_zf(k, false).unwrap(), build_zf(k, true).unwrap()]));
    out.extend((1..=4).map(|k| build_tdma(k).unwrap()));
    out
}
