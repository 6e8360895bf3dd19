use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::alpha::{AffineAlpha, Rational};

pub const SCHEMA_VERSION: u32 = 1;

pub type UserSet = BTreeSet<usize>;

pub fn users(ids: impl IntoIterator<Item = usize>) -> UserSet {
    ids.into_iter().collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum BeamConstraint {
    Canonical {
        antenna: usize,
    },
    /// Precoded in the null space of the estimated channels of `users`.
    NullOf {
        users: UserSet,
    },
    /// Aligned with the estimated channel of `user`.
    SpanOf {
        user: usize,
    },
    /// Entry `(row, col)` of a fixed full-rank mixing matrix, sent on
    /// `antenna`. Row `r` has coefficients `(col+1)^r`, so rows 0 and 1 are
    /// `(1,1,1)` and `(1,2,3)`.
    FullRankCombiner {
        antenna: usize,
        row: usize,
        col: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Source {
    FreshMessage {
        user: usize,
    },
    /// Digitized sum of overheard interference terms.
    DigitizedInterference {
        terms: Vec<String>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolDecl {
    pub id: String,
    pub order: usize,
    pub dest: UserSet,
    pub power_exp: AffineAlpha,
    pub payload: AffineAlpha,
    pub beam: BeamConstraint,
    pub source: Source,
}

impl SymbolDecl {
    pub fn fresh(
        id: impl Into<String>,
        user: usize,
        power_exp: AffineAlpha,
        payload: AffineAlpha,
        beam: BeamConstraint,
    ) -> Self {
        SymbolDecl {
            id: id.into(),
            order: 1,
            dest: users([user]),
            power_exp,
            payload,
            beam,
            source: Source::FreshMessage { user },
        }
    }

    pub fn digitized(
        id: impl Into<String>,
        dest: UserSet,
        power_exp: AffineAlpha,
        payload: AffineAlpha,
        beam: BeamConstraint,
        terms: Vec<String>,
    ) -> Self {
        SymbolDecl {
            id: id.into(),
            order: dest.len(),
            dest,
            power_exp,
            payload,
            beam,
            source: Source::DigitizedInterference { terms },
        }
    }

    pub fn fresh_user(&self) -> Option<usize> {
        match self.source {
            Source::FreshMessage { user } => Some(user),
            Source::DigitizedInterference { .. } => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    /// Decode every listed symbol (successive cancellation).
    Joint,
    /// Decode one generic linear combination of the listed symbols.
    Combination,
    /// Keep the received signal for later use; nothing is decoded now.
    Observe,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeStep {
    pub symbols: Vec<String>,
    pub kind: StepKind,
    /// Steps sharing a group label form one multi-slot decode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
}

impl DecodeStep {
    pub fn joint<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Self {
        Self::new(symbols, StepKind::Joint)
    }

    pub fn combination<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Self {
        Self::new(symbols, StepKind::Combination)
    }

    pub fn observe<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Self {
        Self::new(symbols, StepKind::Observe)
    }

    fn new<S: Into<String>>(symbols: impl IntoIterator<Item = S>, kind: StepKind) -> Self {
        DecodeStep {
            symbols: symbols.into_iter().map(Into::into).collect(),
            kind,
            group: None,
        }
    }

    pub fn in_group(mut self, group: impl Into<String>) -> Self {
        self.group = Some(group.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotDecl {
    /// 1-based.
    pub slot_index: usize,
    pub symbols: Vec<SymbolDecl>,
    /// `decode_plan[u]` is user `u`'s ordered step list for this slot.
    pub decode_plan: Vec<Vec<DecodeStep>>,
}

impl SlotDecl {
    pub fn symbol(&self, id: &str) -> Option<&SymbolDecl> {
        self.symbols.iter().find(|s| s.id == id)
    }
}

/// An interference term overheard in one slot, and the later common symbols
/// that deliver it to the users who need it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideInfoRule {
    pub term: String,
    pub observer: usize,
    pub slot: usize,
    /// The symbols the term is a linear function of.
    pub symbols: Vec<String>,
    pub payload: AffineAlpha,
    pub needed_by: UserSet,
    pub delivered_by: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeSpec {
    pub schema_version: u32,
    pub name: String,
    pub k: usize,
    pub n: usize,
    /// Beams are computed from the true channel and nulled symbols leave no
    /// residue.
    #[serde(default)]
    pub perfect_csit: bool,
    /// Per-user DoF is averaged over the K cyclic user relabelings.
    #[serde(default)]
    pub round_robin: bool,
    pub slots: Vec<SlotDecl>,
    #[serde(default)]
    pub side_info_rules: Vec<SideInfoRule>,
}

impl SchemeSpec {
    pub fn new(name: impl Into<String>, k: usize, n: usize) -> Self {
        SchemeSpec {
            schema_version: SCHEMA_VERSION,
            name: name.into(),
            k,
            n,
            perfect_csit: false,
            round_robin: false,
            slots: Vec::new(),
            side_info_rules: Vec::new(),
        }
    }

    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    /// First declaration of every symbol id, with its slot position.
    pub fn symbol_index(&self) -> HashMap<&str, (usize, &SymbolDecl)> {
        let mut out = HashMap::new();
        for (pos, slot) in self.slots.iter().enumerate() {
            for s in &slot.symbols {
                out.entry(s.id.as_str()).or_insert((pos, s));
            }
        }
        out
    }

    /// Distinct fresh symbols in order of first appearance.
    pub fn fresh_symbols(&self) -> Vec<&SymbolDecl> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for slot in &self.slots {
            for s in &slot.symbols {
                if s.fresh_user().is_some() && seen.insert(s.id.as_str()) {
                    out.push(s);
                }
            }
        }
        out
    }

    pub fn fresh_payload_total(&self) -> AffineAlpha {
        self.fresh_symbols().iter().map(|s| &s.payload).sum()
    }
}

/// Per-user DoF as `numerator / denominator` pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DofResult {
    pub per_user: Vec<(AffineAlpha, usize)>,
    pub total: AffineAlpha,
    pub slot_count: usize,
}

impl DofResult {
    pub fn user(&self, u: usize) -> AffineAlpha {
        let (num, den) = &self.per_user[u];
        num.scale(&Rational::new(1.into(), (*den as i64).into()))
    }

    pub fn users(&self) -> Vec<AffineAlpha> {
        (0..self.per_user.len()).map(|u| self.user(u)).collect()
    }
}
