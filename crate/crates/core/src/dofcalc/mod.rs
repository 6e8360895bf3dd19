//! Exact high-SNR DoF accounting for declaratively described schemes.

mod document;
mod knowledge;
mod types;
mod validate;

pub use document::{from_json, to_json};
pub use types::*;
pub use validate::{
    inflate_payload, tight_fresh_symbols, validate, Rule, TightSymbol, ValidationReport, Violation,
};

pub(crate) use knowledge::Graph as KnowledgeGraph;
pub(crate) use validate::{user_groups, GroupInfo};

use crate::alpha::{AffineAlpha, Rational};
use crate::channel::CsitQuality;
use crate::error::{Error, Result};

/// Fresh payload per user over the slot count. Digitized symbols only
/// recycle earlier payloads and add nothing.
pub fn dof_symbolic(scheme: &SchemeSpec) -> Result<DofResult> {
    let report = validate(scheme);
    if !report.is_valid() {
        return Err(Error::InvalidScheme {
            name: scheme.name.clone(),
            violations: report.violations.len(),
        });
    }
    let k = scheme.k;
    let mut raw = vec![AffineAlpha::zero(); k];
    for sym in scheme.fresh_symbols() {
        if let Some(u) = sym.fresh_user() {
            raw[u] = &raw[u] + &sym.payload;
        }
    }
    let total: AffineAlpha = raw.iter().sum();
    let t = scheme.slot_count();
    let per_user = if scheme.round_robin {
        let share = total.scale(&Rational::new(1.into(), (k as i64).into()));
        vec![(share, t); k]
    } else {
        raw.into_iter().map(|a| (a, t)).collect()
    };
    Ok(DofResult {
        per_user,
        total: total.scale(&Rational::new(1.into(), (t as i64).into())),
        slot_count: t,
    })
}

pub fn dof_at(scheme: &SchemeSpec, quality: &CsitQuality) -> Result<Vec<Rational>> {
    let dof = dof_symbolic(scheme)?;
    Ok(dof
        .users()
        .iter()
        .map(|a| a.eval(quality.alpha()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alpha::{int, rat};
    use crate::schemes::{build_x1, build_x2, build_zf};

    #[test]
    fn x2_slot_is_valid_until_private_is_inflated() {
        let x2 = build_x2(0).unwrap();
        assert!(validate(&x2).is_valid());
        let mut bad = x2.clone();
        for s in &mut bad.slots[0].symbols {
            if s.id == "p1" {
                s.payload = AffineAlpha::one();
            }
        }
        let report = validate(&bad);
        let v: Vec<&Violation> = report
            .violations
            .iter()
            .filter(|v| v.rule == Rule::GapRule)
            .collect();
        assert!(!v.is_empty());
        assert!(
            v.iter()
                .any(|v| v.user == Some(1) && v.witness.as_deref() == Some("1/2")),
            "{v:?}"
        );
        assert!(matches!(
            dof_symbolic(&bad),
            Err(Error::InvalidScheme { .. })
        ));
    }

    #[test]
    fn x1_without_its_last_combiner_slot_loses_side_information() {
        let mut x1 = build_x1();
        x1.slots.pop();
        let report = validate(&x1);
        assert!(
            report.count(Rule::SideInfoClosure) >= 1,
            "{:?}",
            report.violations
        );
    }

    #[test]
    fn zf_payload_is_alpha() {
        let zf = build_zf(3, false).unwrap();
        let q = CsitQuality::new(rat(1, 2)).unwrap();
        assert_eq!(dof_at(&zf, &q).unwrap(), vec![rat(1, 2); 3]);
        let perfect = build_zf(3, true).unwrap();
        assert_eq!(dof_at(&perfect, &q).unwrap(), vec![int(1); 3]);
    }

    #[test]
    fn json_roundtrip_and_version_check() {
        let x1 = build_x1();
        let text = to_json(&x1);
        assert_eq!(from_json(&text).unwrap(), x1);
        let bumped = text.replacen("\"schema_version\": 1", "\"schema_version\": 99", 1);
        assert!(matches!(from_json(&bumped), Err(Error::MalformedScheme(_))));
        assert!(matches!(
            from_json("{\"schema_version\": 1}"),
            Err(Error::MalformedScheme(_))
        ));
        assert!(from_json("not json").is_err());
    }

    #[test]
    fn per_user_pairs_reduce_to_users() {
        let d = dof_symbolic(&build_x1()).unwrap();
        assert_eq!(d.slot_count, 11);
        let sum: AffineAlpha = d.users().iter().sum();
        assert_eq!(sum, d.total);
    }
}
