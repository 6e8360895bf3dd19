//! DoF regions of the three-user MISO broadcast channel as polytopes whose
//! data are polynomials in the CSIT quality α.
//!
//! The two-antenna region is given by its facets. The three-antenna region
//! is only known through its corner points, so membership there is a convex
//! hull test solved as an exact rational LP.

mod lp;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::alpha::{rat, PolyAlpha, Rational};
use crate::channel::CsitQuality;
use crate::dofcalc::{dof_at, SchemeSpec};
use crate::error::{Error, Result};

/// `Σ a_i(α) d_i ≤ b(α)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub a: Vec<PolyAlpha>,
    pub b: PolyAlpha,
    pub label: String,
}

impl HalfSpace {
    pub fn lhs(&self, point: &[Rational], alpha: &Rational) -> Rational {
        self.a
            .iter()
            .zip(point)
            .map(|(c, d)| c.eval(alpha) * d)
            .fold(Rational::zero(), |acc, x| acc + x)
    }

    pub fn holds(&self, point: &[Rational], alpha: &Rational) -> bool {
        self.lhs(point, alpha) <= self.b.eval(alpha)
    }

    pub fn is_tight(&self, point: &[Rational], alpha: &Rational) -> bool {
        self.lhs(point, alpha) == self.b.eval(alpha)
    }

    /// Coefficient of user `perm[i]` moves to position `i`.
    pub fn permuted(&self, perm: &[usize]) -> HalfSpace {
        HalfSpace {
            a: perm.iter().map(|&p| self.a[p].clone()).collect(),
            b: self.b.clone(),
            label: self.label.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionMode {
    HalfspaceDefined,
    HullDefined,
}

/// Which coordinates to use for the printed C vertices of the
/// three-antenna region. The printed list repeats one point for C₁ and C₃.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum VertexSet {
    #[default]
    SymmetryCorrected,
    Verbatim,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DofRegion {
    pub name: String,
    pub k: usize,
    pub mode: RegionMode,
    pub halfspaces: Vec<HalfSpace>,
    /// In presentation order; the first exact match wins when naming points.
    pub named_vertices: Vec<(String, Vec<PolyAlpha>)>,
}

impl DofRegion {
    pub fn vertex(&self, name: &str) -> Option<&[PolyAlpha]> {
        self.named_vertices
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn vertex_at(&self, name: &str, alpha: &Rational) -> Option<Vec<Rational>> {
        self.vertex(name)
            .map(|v| v.iter().map(|p| p.eval(alpha)).collect())
    }

    /// Names of all vertices equal to `point` at `alpha`.
    pub fn matching_vertices(&self, point: &[Rational], alpha: &Rational) -> Vec<String> {
        self.named_vertices
            .iter()
            .filter(|(_, v)| {
                v.len() == point.len() && v.iter().zip(point).all(|(p, d)| p.eval(alpha) == *d)
            })
            .map(|(n, _)| n.clone())
            .collect()
    }
}

fn p(c: &[i64]) -> PolyAlpha {
    PolyAlpha::from_ints(c)
}

fn pr(c: &[(i64, i64)]) -> PolyAlpha {
    PolyAlpha::new(c.iter().map(|&(n, d)| rat(n, d)).collect())
}

fn unit_row(k: usize, i: usize, c: PolyAlpha) -> Vec<PolyAlpha> {
    (0..k)
        .map(|j| if j == i { c.clone() } else { PolyAlpha::zero() })
        .collect()
}

/// Two transmit antennas, three users. Facet description plus the
/// nonnegativity of each coordinate.
pub fn region_theorem3() -> DofRegion {
    let k = 3;
    let mut h = Vec::new();
    for i in 0..k {
        h.push(HalfSpace {
            a: unit_row(k, i, p(&[1])),
            b: p(&[1]),
            label: format!("d{} <= 1", i + 1),
        });
    }
    for i in 0..k {
        let a = (0..k)
            .map(|j| if j == i { p(&[2]) } else { p(&[1]) })
            .collect();
        h.push(HalfSpace {
            a,
            b: p(&[2, 1]),
            label: format!("weighted-sum-{} <= 2+a", i + 1),
        });
    }
    // (2+α)(3+α) = 6 + 5α + α²
    for i in 0..k {
        let a = (0..k)
            .map(|j| if j == i { p(&[2]) } else { p(&[3, 3]) })
            .collect();
        h.push(HalfSpace {
            a,
            b: p(&[6, 5, 1]),
            label: format!("mixed-{} <= (2+a)(3+a)", i + 1),
        });
    }
    h.push(HalfSpace {
        a: vec![p(&[1]); k],
        b: p(&[2]),
        label: "sum <= 2".into(),
    });
    for i in 0..k {
        h.push(HalfSpace {
            a: unit_row(k, i, p(&[-1])),
            b: PolyAlpha::zero(),
            label: format!("d{} >= 0", i + 1),
        });
    }
    let c = pr(&[(2, 3), (1, 3)]);
    let m = pr(&[(1, 2), (1, 6)]);
    let z = PolyAlpha::zero;
    DofRegion {
        name: "theorem3".into(),
        k,
        mode: RegionMode::HalfspaceDefined,
        halfspaces: h,
        named_vertices: vec![
            ("C_prime_1".into(), vec![c.clone(), c.clone(), z()]),
            ("C_prime_2".into(), vec![z(), c.clone(), c.clone()]),
            ("C_prime_3".into(), vec![c.clone(), z(), c]),
            ("M_prime".into(), vec![m.clone(), m.clone(), m]),
        ],
    }
}

/// Three transmit antennas, three users, with symmetry-corrected C vertices.
pub fn region_theorem1() -> DofRegion {
    region_theorem1_with(VertexSet::default())
}

pub fn region_theorem1_with(set: VertexSet) -> DofRegion {
    let m = pr(&[(6, 11), (5, 11)]);
    let c = pr(&[(2, 3), (1, 3)]);
    let a = p(&[0, 1]);
    let one = || p(&[1]);
    let z = PolyAlpha::zero;
    let (c1, name) = match set {
        VertexSet::SymmetryCorrected => (vec![c.clone(), c.clone(), z()], "theorem1"),
        VertexSet::Verbatim => (vec![c.clone(), z(), c.clone()], "theorem1-verbatim"),
    };
    DofRegion {
        name: name.into(),
        k: 3,
        mode: RegionMode::HullDefined,
        halfspaces: Vec::new(),
        named_vertices: vec![
            ("M".into(), vec![m.clone(), m.clone(), m]),
            ("D1".into(), vec![a.clone(), a.clone(), one()]),
            ("D2".into(), vec![a.clone(), one(), a.clone()]),
            ("D3".into(), vec![one(), a.clone(), a]),
            ("C1".into(), c1),
            ("C2".into(), vec![z(), c.clone(), c.clone()]),
            ("C3".into(), vec![c.clone(), z(), c]),
            ("A1".into(), vec![one(), z(), z()]),
            ("A2".into(), vec![z(), one(), z()]),
            ("A3".into(), vec![z(), z(), one()]),
            ("O".into(), vec![z(), z(), z()]),
        ],
    }
}

/// `theorem1`, `theorem1-verbatim` or `theorem3`.
pub fn resolve_region(name: &str) -> Result<DofRegion> {
    match name {
        "theorem1" => Ok(region_theorem1()),
        "theorem1-verbatim" => Ok(region_theorem1_with(VertexSet::Verbatim)),
        "theorem3" => Ok(region_theorem3()),
        other => Err(Error::UnknownRegion(other.to_string())),
    }
}

/// `0, 1/10, …, 1`.
pub fn standard_alpha_grid() -> Vec<Rational> {
    (0..=10).map(|i| rat(i, 10)).collect()
}

pub fn contains(region: &DofRegion, point: &[Rational], quality: &CsitQuality) -> Result<bool> {
    if point.len() != region.k {
        return Err(Error::DimensionMismatch {
            expected: region.k,
            got: point.len(),
        });
    }
    let alpha = quality.alpha();
    Ok(match region.mode {
        RegionMode::HalfspaceDefined => region.halfspaces.iter().all(|h| h.holds(point, alpha)),
        RegionMode::HullDefined => hull_weights(region, point, alpha).is_some(),
    })
}

/// Convex weights over the named vertices reproducing `point`, if any.
pub fn hull_weights(
    region: &DofRegion,
    point: &[Rational],
    alpha: &Rational,
) -> Option<Vec<Rational>> {
    let verts: Vec<Vec<Rational>> = region
        .named_vertices
        .iter()
        .map(|(_, v)| v.iter().map(|c| c.eval(alpha)).collect())
        .collect();
    let mut a: Vec<Vec<Rational>> = (0..region.k)
        .map(|i| verts.iter().map(|v| v[i].clone()).collect())
        .collect();
    a.push(vec![Rational::one(); verts.len()]);
    let mut b = point.to_vec();
    b.push(Rational::one());
    lp::feasible(&a, &b)
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossCheckRow {
    #[serde(serialize_with = "crate::alpha::ser_rational")]
    pub alpha: Rational,
    #[serde(with = "crate::alpha::rational_vec")]
    pub dof: Vec<Rational>,
    pub inside: bool,
    pub vertices: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossCheckReport {
    pub scheme: String,
    pub region: String,
    pub rows: Vec<CrossCheckRow>,
}

impl CrossCheckReport {
    pub fn all_inside(&self) -> bool {
        self.rows.iter().all(|r| r.inside)
    }

    /// First named vertex that the scheme hits at every grid point.
    pub fn common_vertex(&self) -> Option<&str> {
        let first = self.rows.first()?;
        first
            .vertices
            .iter()
            .find(|v| self.rows.iter().all(|r| r.vertices.contains(v)))
            .map(String::as_str)
    }
}

pub fn achievability_cross_check(
    scheme: &SchemeSpec,
    region: &DofRegion,
    alpha_grid: &[Rational],
) -> Result<CrossCheckReport> {
    if scheme.k != region.k {
        return Err(Error::DimensionMismatch {
            expected: region.k,
            got: scheme.k,
        });
    }
    let mut rows = Vec::with_capacity(alpha_grid.len());
    for alpha in alpha_grid {
        let q = CsitQuality::new(alpha.clone())?;
        let dof = dof_at(scheme, &q)?;
        let inside = contains(region, &dof, &q)?;
        let vertices = region.matching_vertices(&dof, alpha);
        rows.push(CrossCheckRow {
            alpha: alpha.clone(),
            dof,
            inside,
            vertices,
        });
    }
    Ok(CrossCheckReport {
        scheme: scheme.name.clone(),
        region: region.name.clone(),
        rows,
    })
}

/// `(name, coordinates)` pairs at one α.
pub type VertexRow = Vec<(String, Vec<String>)>;

/// Named vertex coordinates as rational strings, one row per α.
pub fn vertex_table(region: &DofRegion, alphas: &[Rational]) -> Vec<(Rational, VertexRow)> {
    alphas
        .iter()
        .map(|a| {
            let row = region
                .named_vertices
                .iter()
                .map(|(n, v)| (n.clone(), v.iter().map(|c| c.eval(a).to_string()).collect()))
                .collect();
            (a.clone(), row)
        })
        .collect()
}

/// Region description plus a vertex table, as pretty JSON.
pub fn export_json(region: &DofRegion, alphas: &[Rational]) -> Result<String> {
    let table: Vec<serde_json::Value> = vertex_table(region, alphas)
        .into_iter()
        .map(|(a, row)| {
            let verts: serde_json::Map<String, serde_json::Value> = row
                .into_iter()
                .map(|(n, c)| (n, serde_json::json!(c)))
                .collect();
            serde_json::json!({ "alpha": a.to_string(), "vertices": verts })
        })
        .collect();
    let doc = serde_json::json!({
        "region": region,
        "vertex_table": table,
    });
    Ok(serde_json::to_string_pretty(&doc)?)
}

/// Every named vertex satisfies every halfspace at each α in `grid`.
pub fn vertices_satisfy_halfspaces(region: &DofRegion, grid: &[Rational]) -> bool {
    grid.iter().all(|a| {
        region.named_vertices.iter().all(|(_, v)| {
            let pt: Vec<Rational> = v.iter().map(|c| c.eval(a)).collect();
            region.halfspaces.iter().all(|h| h.holds(&pt, a))
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alpha::int;

    fn ones(k: usize) -> Vec<Rational> {
        vec![int(1); k]
    }

    fn q(a: Rational) -> CsitQuality {
        CsitQuality::new(a).unwrap()
    }

    #[test]
    fn theorem3_shape_and_examples() {
        let r = region_theorem3();
        assert_eq!(r.halfspaces.len(), 13);
        assert!(!contains(&r, &ones(3), &q(int(1))).unwrap());
        let a = rat(1, 2);
        let c1 = r.vertex_at("C_prime_1", &a).unwrap();
        assert_eq!(c1, vec![rat(5, 6), rat(5, 6), int(0)]);
        assert!(r.halfspaces[3].is_tight(&c1, &a));
        let m = r.vertex("M_prime").unwrap();
        let total = m.iter().fold(PolyAlpha::zero(), |acc, x| &acc + x);
        assert_eq!(total, pr(&[(3, 2), (1, 2)]));
    }

    #[test]
    fn theorem1_examples() {
        let r = region_theorem1();
        let m0 = vec![rat(6, 11); 3];
        assert!(contains(&r, &m0, &q(int(0))).unwrap());
        assert!(contains(&r, &ones(3), &q(int(1))).unwrap());
        assert!(!contains(&r, &ones(3), &q(int(0))).unwrap());
        for a in [int(0), rat(1, 2), int(1)] {
            let d3 = vec![int(1), a.clone(), a.clone()];
            assert!(contains(&r, &d3, &q(a)).unwrap());
        }
    }

    #[test]
    fn verbatim_set_repeats_a_point() {
        let r = region_theorem1_with(VertexSet::Verbatim);
        assert_eq!(r.vertex("C1"), r.vertex("C3"));
        let fixed = region_theorem1();
        assert_ne!(fixed.vertex("C1"), fixed.vertex("C3"));
        // the corrected C1 lies outside the verbatim hull
        let a = int(0);
        let c1 = fixed.vertex_at("C1", &a).unwrap();
        assert!(!contains(&r, &c1, &q(a)).unwrap());
    }

    #[test]
    fn origin_and_dimension_errors() {
        for r in [region_theorem1(), region_theorem3()] {
            assert!(contains(&r, &vec![int(0); 3], &q(rat(1, 3))).unwrap());
            assert!(matches!(
                contains(&r, &[int(0)], &q(int(0))),
                Err(Error::DimensionMismatch {
                    expected: 3,
                    got: 1
                })
            ));
        }
    }

    #[test]
    fn vertices_inside_their_regions() {
        let grid = standard_alpha_grid();
        let r3 = region_theorem3();
        assert!(vertices_satisfy_halfspaces(&r3, &grid));
        for r in [region_theorem1(), r3] {
            for a in &grid {
                for (n, _) in &r.named_vertices {
                    let v = r.vertex_at(n, a).unwrap();
                    assert!(contains(&r, &v, &q(a.clone())).unwrap(), "{n} at {a}");
                }
            }
        }
    }

    #[test]
    fn export_mentions_every_vertex() {
        let r = region_theorem3();
        let s = export_json(&r, &[int(0), int(1)]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["vertex_table"][1]["vertices"]["M_prime"][0], "2/3");
        assert_eq!(v["region"]["halfspaces"][6]["b"][2], "1");
    }

    #[test]
    fn unknown_region_name() {
        assert!(matches!(
            resolve_region("nope"),
            Err(Error::UnknownRegion(_))
        ));
    }

    #[test]
    fn cross_check_names_the_expected_vertices() {
        use crate::schemes::{build_x1, build_x2, build_x5};
        let grid = standard_alpha_grid();
        let r1 = region_theorem1();
        let rep = achievability_cross_check(&build_x1(), &r1, &grid).unwrap();
        assert!(rep.all_inside());
        assert_eq!(rep.common_vertex(), Some("M"));
        for (t, d) in [(0, "D3"), (1, "D2"), (2, "D1")] {
            let rep = achievability_cross_check(&build_x2(t).unwrap(), &r1, &grid).unwrap();
            assert!(rep.all_inside());
            assert_eq!(rep.common_vertex(), Some(d));
        }
        let rep = achievability_cross_check(&build_x5(), &region_theorem3(), &grid).unwrap();
        assert!(rep.all_inside());
        assert_eq!(rep.common_vertex(), Some("M_prime"));
    }
}
