//! Faces of the Mori cone of the pseudo-stable space spanned by bridge
//! curves: dimension, extremal rays, annihilator subspaces, closed-form
//! cross-checks, independence verification and the Boolean face lattice.

use num_traits::Zero;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::boundary::{
    adm_closure, format_typeset, minimal_subsets, BridgeClass, HyperbolicPair, PairType, TypeSet,
};
use crate::divisor::{presentation, DivisorClass, SpaceId};
use crate::error::{Error, Result};
use crate::intersection::pair_bridge;
use crate::linalg::{self, Q};

/// Computed face data for a subset: extremal rays, dimension, and a basis
/// of the annihilator inside the pseudo-stable Picard presentation.
#[derive(Clone, Debug)]
pub struct FaceDescriptor {
    pub typeset: TypeSet,
    pub adm: TypeSet,
    pub rays: Vec<PairType>,
    pub dim: usize,
    pub perp_dim: usize,
    pub perp_basis: Vec<DivisorClass>,
}

impl FaceDescriptor {
    pub fn to_json(&self, p: HyperbolicPair) -> Value {
        json!({
            "typeset": format_typeset(p, &self.typeset),
            "adm": format_typeset(p, &self.adm),
            "rays": self.rays.iter().map(|r| r.text(p)).collect::<Vec<_>>(),
            "dim": self.dim,
            "perp_dim": self.perp_dim,
            "perp_basis": self.perp_basis.iter().map(|l| l.to_json(p)).collect::<Vec<_>>(),
        })
    }
}

/// Pairing rows of `rays` against a quotient basis of the pseudo-stable
/// presentation.
fn constraint_rows(
    p: HyperbolicPair,
    rays: &[PairType],
    basis: &[DivisorClass],
) -> Result<Vec<Vec<Q>>> {
    rays.iter()
        .map(|ray| basis.iter().map(|l| pair_bridge(p, ray, l)).collect())
        .collect()
}

/// The face attached to a subset: rays are the minimal subsets inside the
/// admissible closure; the annihilator is the exact null space of their
/// pairing functionals.
pub fn face_of(p: HyperbolicPair, t: &TypeSet) -> Result<FaceDescriptor> {
    let adm = adm_closure(p, t);
    let rays: Vec<PairType> = minimal_subsets(p)?
        .into_iter()
        .filter(|m| m.contained_in(&adm))
        .collect();
    let pres = presentation(p, &SpaceId::Ps)?;
    let basis = pres.basis()?;
    let rows = constraint_rows(p, &rays, &basis)?;
    let null = linalg::nullspace(rows, basis.len());
    let perp_basis: Vec<DivisorClass> = null
        .iter()
        .map(|x| {
            let mut acc = DivisorClass::zero(SpaceId::Ps);
            for (coef, b) in x.iter().zip(&basis) {
                if !coef.is_zero() {
                    acc = acc.try_add(&b.scale(coef)).expect("same space");
                }
            }
            acc
        })
        .collect();
    Ok(FaceDescriptor {
        typeset: t.clone(),
        adm,
        dim: rays.len(),
        perp_dim: perp_basis.len(),
        rays,
        perp_basis,
    })
}

/// A failed compatibility constraint: the ray and the nonzero degree.
#[derive(Clone, Debug)]
pub struct BridgeViolation {
    pub ray: PairType,
    pub value: Q,
}

/// Whether `l` pairs to zero with every bridge curve of type inside `t`;
/// on failure returns the first violated ray.
pub fn t_compatible(
    p: HyperbolicPair,
    t: &TypeSet,
    l: &DivisorClass,
) -> Result<std::result::Result<(), BridgeViolation>> {
    let adm = adm_closure(p, t);
    for ray in minimal_subsets(p)? {
        if !ray.contained_in(&adm) {
            continue;
        }
        let value = pair_bridge(p, &ray, l)?;
        if !value.is_zero() {
            return Ok(Err(BridgeViolation { ray, value }));
        }
    }
    Ok(Ok(()))
}

/// Closed form for the dimension of the full bridge face.
pub fn face_dim_closed_form(p: HyperbolicPair) -> u64 {
    let (g, n) = (p.g() as u64, p.n() as u64);
    if g == 0 {
        0
    } else if (g, n) == (2, 0) {
        1
    } else if n == 0 {
        if g % 2 == 1 {
            (g - 1) / 2
        } else {
            g / 2 - 1
        }
    } else {
        g * (1 << (n - 1)) - 1
    }
}

/// Closed form for the Picard number of the full contraction target
/// (annihilator dimension of the full face), where stated: n = 0 with
/// g >= 3, or n >= 1.
pub fn full_face_perp_closed_form(p: HyperbolicPair) -> Option<u64> {
    let (g, n) = (p.g() as u64, p.n() as u64);
    if g == 0 {
        return None;
    }
    if n == 0 {
        if g >= 3 {
            Some(if g % 2 == 1 { 1 } else { 2 })
        } else {
            None
        }
    } else {
        let d2 = u64::from(g == 2);
        let d1 = u64::from(g == 1);
        let val = (1 << (n - 1)) + 1 - d2 as i64 - ((n + 1) * d1) as i64;
        u64::try_from(val).ok()
    }
}

#[derive(Clone, Debug)]
pub struct IndependenceReport {
    pub minimal_count: usize,
    pub matrix_rank: usize,
    pub independent: bool,
}

/// Exact-rank verification that the bridge-curve functionals of all
/// minimal subsets are linearly independent on the pseudo-stable
/// presentation.
pub fn independence_report(p: HyperbolicPair) -> Result<IndependenceReport> {
    let rays = minimal_subsets(p)?;
    let basis = presentation(p, &SpaceId::Ps)?.basis()?;
    let rows = constraint_rows(p, &rays, &basis)?;
    let matrix_rank = linalg::rank(rows, basis.len());
    Ok(IndependenceReport {
        minimal_count: rays.len(),
        matrix_rank,
        independent: matrix_rank == rays.len(),
    })
}

/// One node of the face lattice: an admissible subset with its face data.
#[derive(Clone, Debug)]
pub struct LatticeNode {
    pub id: usize,
    pub typeset: TypeSet,
    pub dim: usize,
    pub perp_dim: usize,
}

/// The Boolean lattice of admissible subsets (unions of minimal subsets),
/// with covering relations.
#[derive(Clone, Debug)]
pub struct FaceLattice {
    pub pair: HyperbolicPair,
    pub nodes: Vec<LatticeNode>,
    pub covers: Vec<(usize, usize)>,
}

const DOT_ANNOTATION_LIMIT: usize = 64;

/// Builds the lattice of all admissible subsets. Nodes are indexed by the
/// chosen set of minimal subsets; `cap` bounds the node count.
pub fn face_lattice(p: HyperbolicPair, cap: u64) -> Result<FaceLattice> {
    let mins = minimal_subsets(p)?;
    let m = mins.len();
    let required: u128 = 1u128 << m;
    if required > cap as u128 {
        return Err(Error::CapExceeded { required, cap });
    }
    let pres = presentation(p, &SpaceId::Ps)?;
    let basis = pres.basis()?;
    let rank_ps = basis.len();
    let per_ray_rows = constraint_rows(p, &mins, &basis)?;

    let nodes: Vec<LatticeNode> = (0..(1usize << m))
        .into_par_iter()
        .map(|bits| {
            let mut set = TypeSet::empty();
            let mut rows = Vec::new();
            for (i, t) in mins.iter().enumerate() {
                if bits >> i & 1 == 1 {
                    rows.push(per_ray_rows[i].clone());
                    for c in t.classes() {
                        match c {
                            BridgeClass::Irr => set.set_irr(true),
                            BridgeClass::Pair(c) => set.insert(c),
                        }
                    }
                }
            }
            let dim = bits.count_ones() as usize;
            let perp_dim = rank_ps - linalg::rank(rows, rank_ps);
            LatticeNode {
                id: bits,
                typeset: set,
                dim,
                perp_dim,
            }
        })
        .collect();

    let mut covers = Vec::new();
    for bits in 0..(1usize << m) {
        for i in 0..m {
            if bits >> i & 1 == 0 {
                covers.push((bits, bits | (1 << i)));
            }
        }
    }
    Ok(FaceLattice {
        pair: p,
        nodes,
        covers,
    })
}

impl FaceLattice {
    pub fn to_json(&self) -> Value {
        json!({
            "schema": "lattice/1",
            "pair": { "g": self.pair.g(), "n": self.pair.n() },
            "nodes": self.nodes.iter().map(|n| json!({
                "id": n.id,
                "set": format_typeset(self.pair, &n.typeset),
                "dim": n.dim,
                "perp_dim": n.perp_dim,
            })).collect::<Vec<_>>(),
            "covers": self.covers.iter().map(|(a, b)| json!([a, b])).collect::<Vec<_>>(),
        })
    }

    /// DOT rendering of the Hasse diagram. Nodes carry
    /// `set | dim | perp_dim` labels; past 64 nodes the annotations are
    /// dropped and only the set is printed.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph face_lattice {\n  rankdir=BT;\n  node [shape=box];\n");
        let annotate = self.nodes.len() <= DOT_ANNOTATION_LIMIT;
        for n in &self.nodes {
            let set = format_typeset(self.pair, &n.typeset);
            let set = if set.is_empty() { "{}".to_string() } else { set };
            let label = if annotate {
                format!("{} | dim {} | perp {}", set, n.dim, n.perp_dim)
            } else {
                set
            };
            out.push_str(&format!("  n{} [label=\"{}\"];\n", n.id, label));
        }
        for (a, b) in &self.covers {
            out.push_str(&format!("  n{a} -> n{b};\n"));
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::parse_typeset;
    use crate::divisor::{named_class, rank, ClassName};
    use crate::linalg::q;

    fn hp(g: u32, n: u32) -> HyperbolicPair {
        HyperbolicPair::new(g, n).unwrap()
    }

    #[test]
    fn face_examples() {
        let p = hp(7, 0);
        let f = face_of(p, &TypeSet::full(p).unwrap()).unwrap();
        assert_eq!(f.dim, 3);
        let texts: Vec<_> = f.rays.iter().map(|r| r.text(p)).collect();
        assert_eq!(texts, vec!["irr", "2:{}", "3:{}"]);

        let p = hp(5, 0);
        let f = face_of(p, &TypeSet::empty()).unwrap();
        assert_eq!(f.dim, 0);
        assert_eq!(f.perp_dim, rank(p, &SpaceId::Ps).unwrap());

        let p = hp(2, 0);
        let f = face_of(p, &parse_typeset(p, "irr").unwrap()).unwrap();
        assert_eq!(f.dim, 1);
        assert_eq!(f.perp_dim, 0);
    }

    #[test]
    fn dim_plus_perp_is_rank() {
        for (g, n) in [(2, 1), (3, 1), (3, 2), (5, 0), (6, 1), (1, 2), (2, 2)] {
            let p = hp(g, n);
            let r = rank(p, &SpaceId::Ps).unwrap();
            for t in [
                TypeSet::empty(),
                parse_typeset(p, "irr").unwrap(),
                TypeSet::full(p).unwrap(),
            ] {
                let f = face_of(p, &t).unwrap();
                assert_eq!(f.dim + f.perp_dim, r, "(g,n)=({g},{n})");
            }
        }
    }

    #[test]
    fn face_of_closure_matches_face_of() {
        let p = hp(5, 0);
        let t = parse_typeset(p, "irr,1:{}").unwrap();
        let f1 = face_of(p, &t).unwrap();
        let f2 = face_of(p, &adm_closure(p, &t)).unwrap();
        assert_eq!(f1.dim, f2.dim);
        assert_eq!(f1.rays, f2.rays);
        assert_eq!(f1.perp_dim, f2.perp_dim);
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(face_dim_closed_form(hp(4, 0)), 1);
        assert_eq!(face_dim_closed_form(hp(2, 2)), 3);
        assert_eq!(face_dim_closed_form(hp(1, 1)), 0);
        assert_eq!(face_dim_closed_form(hp(2, 0)), 1);
        assert_eq!(face_dim_closed_form(hp(7, 0)), 3);
        assert_eq!(face_dim_closed_form(hp(0, 5)), 0);
        assert_eq!(full_face_perp_closed_form(hp(5, 0)), Some(1));
        assert_eq!(full_face_perp_closed_form(hp(3, 1)), Some(2));
        assert_eq!(full_face_perp_closed_form(hp(1, 2)), Some(0));
        assert_eq!(full_face_perp_closed_form(hp(2, 1)), Some(1));
        assert_eq!(full_face_perp_closed_form(hp(2, 0)), None);
    }

    #[test]
    fn t_compatibility_examples() {
        let p = hp(5, 0);
        let full = TypeSet::full(p).unwrap();
        let n = named_class(p, &SpaceId::Ps, ClassName::NefGenerator).unwrap();
        assert!(t_compatible(p, &full, &n).unwrap().is_ok());

        let kp = named_class(p, &SpaceId::Ps, ClassName::CanonicalPlusPsi).unwrap();
        let violation = t_compatible(p, &full, &kp).unwrap().unwrap_err();
        assert_eq!(violation.ray, PairType::Irr);
        assert_eq!(violation.value, q(-7));

        let zero = DivisorClass::zero(SpaceId::Ps);
        assert!(t_compatible(p, &full, &zero).unwrap().is_ok());
    }

    #[test]
    fn independence_examples() {
        for ((g, n), want) in [((5, 0), 2), ((1, 2), 1), ((3, 1), 2)] {
            let rep = independence_report(hp(g, n)).unwrap();
            assert_eq!(rep.minimal_count, want);
            assert!(rep.independent, "(g,n)=({g},{n})");
        }
    }

    #[test]
    fn lattice_examples() {
        let p = hp(5, 0);
        let lat = face_lattice(p, 4096).unwrap();
        assert_eq!(lat.nodes.len(), 4);
        assert_eq!(lat.covers.len(), 4);

        let p = hp(1, 1);
        let lat = face_lattice(p, 4096).unwrap();
        assert_eq!(lat.nodes.len(), 1);
        assert!(lat.nodes[0].typeset.is_empty());

        let p = hp(2, 2);
        let lat = face_lattice(p, 4096).unwrap();
        assert_eq!(lat.nodes.len(), 8);
        assert_eq!(lat.covers.len(), 3 * 4);

        assert!(matches!(
            face_lattice(hp(6, 4), 4096),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn dot_and_json_shapes() {
        let p = hp(5, 0);
        let lat = face_lattice(p, 64).unwrap();
        let dot = lat.to_dot();
        assert!(dot.contains("digraph face_lattice"));
        assert!(dot.contains("dim 1"));
        let v = lat.to_json();
        assert_eq!(v["schema"], "lattice/1");
        assert_eq!(v["nodes"].as_array().unwrap().len(), 4);
    }

    #[test]
    fn monotone_in_the_subset() {
        let p = hp(3, 2);
        let small = parse_typeset(p, "irr").unwrap();
        let big = TypeSet::full(p).unwrap();
        let fs = face_of(p, &small).unwrap();
        let fb = face_of(p, &big).unwrap();
        assert!(fs.rays.iter().all(|r| fb.rays.contains(r)));
        assert!(fs.perp_dim >= fb.perp_dim);
        // perp(big) sits inside perp(small): every basis class of the big
        // face annihilates the small face's rays
        for l in &fb.perp_basis {
            assert!(t_compatible(p, &small, l).unwrap().is_ok());
        }
    }
}
