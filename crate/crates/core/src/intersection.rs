//! Intersection pairings of divisor classes with the one-parameter
//! boundary curves: bridge curves on the pseudo-stable space, their lifts
//! to the stable space, tacnodal curves on the flipped space, and the
//! torus weights of length-3 rosaries.

use num_traits::{One, Zero};

use crate::boundary::{
    canonicalize_mask, is_point_tail_class, tail_class, HyperbolicPair, PairClass, PairType,
    TypeSet,
};
use crate::divisor::{DivisorClass, Presentation, SpaceId};
use crate::error::{Error, Result};
use crate::linalg::{q, Q};

/// A one-parameter curve class used in the pairings.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum CurveClass {
    /// Elliptic-bridge curve on the pseudo-stable space.
    Bridge(PairType),
    /// Its lift to the stable space.
    BridgeUpstairs(PairType),
    /// Tacnodal curve on the flipped space.
    Tacnodal(PairType),
}

impl CurveClass {
    pub fn text(&self, p: HyperbolicPair) -> String {
        match self {
            CurveClass::Bridge(t) => format!("C:{}", t.text(p)),
            CurveClass::BridgeUpstairs(t) => format!("Ctilde:{}", t.text(p)),
            CurveClass::Tacnodal(t) => format!("D:{}", t.text(p)),
        }
    }
}

/// The type of a length-3 rosary: the closed form (type `irr`), or the
/// chain of classes of `(tau,I), (tau+1,I), (tau+2,I)` for a
/// representative. Endpoint exclusions are applied by the descent
/// predicate, not here.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum RosaryType {
    Irr,
    Triple {
        c0: PairClass,
        c1: PairClass,
        c2: PairClass,
        rep: (u32, u32),
    },
}

impl RosaryType {
    /// Builds the chain type generated by the representative `(tau, I)`,
    /// normalised to its smallest generating representative.
    pub fn triple_from_rep(p: HyperbolicPair, tau: u32, mask: u32) -> Result<RosaryType> {
        if tau + 2 > p.g() {
            return Err(Error::InvalidCurveType(format!(
                "representative ({tau},..) has no chain of length 3"
            )));
        }
        let invalid = |e: Error| Error::InvalidCurveType(e.to_string());
        let fwd = (tau, mask);
        let rev = (p.g() - 2 - tau, p.full_mask() ^ mask);
        let (rt, rm) = if rev.0 < fwd.0 || (rev.0 == fwd.0 && rev.1 < fwd.1) {
            rev
        } else {
            fwd
        };
        Ok(RosaryType::Triple {
            c0: canonicalize_mask(p, rt, rm).map_err(invalid)?,
            c1: canonicalize_mask(p, rt + 1, rm).map_err(invalid)?,
            c2: canonicalize_mask(p, rt + 2, rm).map_err(invalid)?,
            rep: (rt, rm),
        })
    }

    /// The class set of the chain, contained-in test against a subset.
    pub fn contained_in(&self, t: &TypeSet) -> bool {
        match self {
            RosaryType::Irr => t.has_irr(),
            RosaryType::Triple { c0, c1, c2, .. } => {
                t.contains(c0) && t.contains(c1) && t.contains(c2)
            }
        }
    }

    /// Whether the chain endpoints avoid the tail and point-tail classes,
    /// so that the type enters the descent criterion.
    pub fn descent_relevant(&self, p: HyperbolicPair) -> bool {
        match self {
            RosaryType::Irr => false,
            RosaryType::Triple { c0, c2, .. } => {
                let tail = tail_class(p);
                for c in [c0, c2] {
                    if tail == Some(*c) || is_point_tail_class(p, *c) {
                        return false;
                    }
                }
                true
            }
        }
    }

    pub fn text(&self, p: HyperbolicPair) -> String {
        match self {
            RosaryType::Irr => "R:irr".into(),
            RosaryType::Triple { rep, .. } => {
                let c = format!(
                    "{{{}}}",
                    (1..=p.n())
                        .filter(|i| rep.1 >> (i - 1) & 1 == 1)
                        .map(|i| i.to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                );
                format!("R:{}:{}", rep.0, c)
            }
        }
    }
}

/// Every distinct length-3 chain type with class set contained in `t`,
/// in representative order. Reversed readings of the same chain are
/// identified.
pub fn rosary_triples(p: HyperbolicPair, t: &TypeSet) -> Result<Vec<RosaryType>> {
    let mut out = std::collections::BTreeSet::new();
    if p.g() >= 2 {
        for tau in 0..=p.g().saturating_sub(2) {
            for mask in 0..=p.full_mask() {
                if let Ok(r) = RosaryType::triple_from_rep(p, tau, mask) {
                    if r.contained_in(t) {
                        out.insert(r);
                    }
                }
            }
        }
    }
    Ok(out.into_iter().collect())
}

fn check_bridge_type(p: HyperbolicPair, t: &PairType) -> Result<()> {
    if *t == PairType::Irr && p.g() < 2 {
        return Err(Error::InvalidCurveType(
            "the irreducible bridge type needs g >= 2".into(),
        ));
    }
    Ok(())
}

/// Rejects the pair types whose tacnodal curve does not exist: chains
/// through the tail class or a point-tail class.
pub fn check_tacnodal_type(p: HyperbolicPair, t: &PairType) -> Result<()> {
    check_bridge_type(p, t).map_err(|e| Error::ForbiddenTacnodalType(e.to_string()))?;
    if let PairType::Bridge { lower, upper } = t {
        for c in [lower, upper] {
            if is_point_tail_class(p, *c) {
                return Err(Error::ForbiddenTacnodalType(format!(
                    "the pair type {} runs through a point-tail class",
                    t.text(p)
                )));
            }
        }
    }
    Ok(())
}

pub fn is_tacnodal_type(p: HyperbolicPair, t: &PairType) -> bool {
    check_tacnodal_type(p, t).is_ok()
}

fn reduced_on<'a>(
    p: HyperbolicPair,
    l: &DivisorClass,
    accept: impl Fn(&SpaceId) -> bool,
    expected: &'a str,
) -> Result<DivisorClass> {
    if !accept(l.space()) {
        return Err(Error::WrongSpace {
            expected: expected.into(),
            found: format!("{}", l.space()),
        });
    }
    l.reduce(p)
}

/// Raw bridge-pairing formula on stored coefficients.
fn bridge_value(p: HyperbolicPair, t: &PairType, l: &DivisorClass) -> Q {
    let _ = p;
    match t {
        PairType::Irr => l.lambda_coeff() + l.irr_coeff().clone() * q(10),
        PairType::Bridge { lower, upper } => {
            l.lambda_coeff() + l.irr_coeff().clone() * q(12) - l.coeff(lower) - l.coeff(upper)
        }
    }
}

/// Degree of a divisor class against the bridge curve of type `t`.
/// `irr` pairs to `a + 10 b_irr`; a class pair to
/// `a + 12 b_irr - b_lower - b_upper` (the coefficient counts twice when
/// the two classes coincide).
pub fn pair_bridge(p: HyperbolicPair, t: &PairType, l: &DivisorClass) -> Result<Q> {
    check_bridge_type(p, t)?;
    let red = reduced_on(
        p,
        l,
        |s| matches!(s, SpaceId::Ps | SpaceId::T(_)),
        "Mps or MT",
    )?;
    verify_relations_pair_to_zero(p, l.space(), |row| bridge_value(p, t, row))?;
    Ok(bridge_value(p, t, &red))
}

/// Degree against the lift of the bridge curve to the stable space:
/// `irr` pairs to `-2 b_irr + b_tail`; a class pair to
/// `-b_lower - b_upper + b_tail`. The lambda coefficient does not enter.
pub fn pair_bridge_upstairs(p: HyperbolicPair, t: &PairType, l: &DivisorClass) -> Result<Q> {
    check_bridge_type(p, t)?;
    let red = reduced_on(p, l, |s| matches!(s, SpaceId::Bar), "Mbar")?;
    let value = |row: &DivisorClass| {
        let tail = tail_class(p).map(|tc| row.coeff(&tc)).unwrap_or_else(Q::zero);
        match t {
            PairType::Irr => tail - row.irr_coeff().clone() * q(2),
            PairType::Bridge { lower, upper } => tail - row.coeff(lower) - row.coeff(upper),
        }
    };
    verify_relations_pair_to_zero(p, l.space(), value)?;
    Ok(value(&red))
}

/// Degree against the tacnodal curve of type `t`: the negative of the
/// bridge formula, with killed coefficients contributing zero.
pub fn pair_tacnodal(p: HyperbolicPair, t: &PairType, l: &DivisorClass) -> Result<Q> {
    check_tacnodal_type(p, t)?;
    let red = match l.space() {
        SpaceId::TPlus(_) => l.reduce(p)?,
        SpaceId::T(ts) => l.restrict_to(p, &SpaceId::TPlus(ts.clone()))?,
        other => {
            return Err(Error::WrongSpace {
                expected: "MT+ (or MT, restricted)".into(),
                found: format!("{other}"),
            })
        }
    };
    verify_relations_pair_to_zero(p, red.space(), |row| -bridge_value(p, t, row))?;
    Ok(-bridge_value(p, t, &red))
}

/// Weight of a divisor class under the one-parameter subgroup of a
/// length-3 rosary: 0 for the closed form, `-b_{c0} + b_{c2}` for a chain.
pub fn rosary_weight(p: HyperbolicPair, r: &RosaryType, l: &DivisorClass) -> Result<Q> {
    let red = l.reduce(p)?;
    Ok(match r {
        RosaryType::Irr => Q::zero(),
        RosaryType::Triple { c0, c2, .. } => red.coeff(c2) - red.coeff(c0),
    })
}

/// The pairings are well-defined on the quotient presentations: every
/// relation row must itself pair to zero. Verified per call; a nonzero
/// value would mean the formula is not a class function.
fn verify_relations_pair_to_zero(
    p: HyperbolicPair,
    s: &SpaceId,
    value: impl Fn(&DivisorClass) -> Q,
) -> Result<()> {
    if p.g() > 2 {
        return Ok(());
    }
    let pres = crate::divisor::presentation(p, s)?;
    for row in relation_classes(&pres) {
        let v = value(&row);
        if !v.is_zero() {
            return Err(Error::IllPosedPairing(format!(
                "relation row {} pairs to {v}, not 0",
                row.text(p)
            )));
        }
    }
    Ok(())
}

fn relation_classes(pres: &Presentation) -> Vec<DivisorClass> {
    pres.relations().iter().map(|r| pres.class_from_vec(r)).collect()
}

/// Parsed form of the curve text grammar `C:`, `Ctilde:`, `D:`, `R:`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ParsedCurve {
    Curve(CurveClass),
    Rosary(RosaryType),
}

pub fn parse_curve(p: HyperbolicPair, text: &str) -> Result<ParsedCurve> {
    let t = text.trim();
    let (kind, rest) = t.split_once(':').ok_or(Error::SyntaxError {
        pos: 0,
        msg: "curve must be written KIND:TYPE, e.g. C:irr or D:2:{}".into(),
    })?;
    let pair_type = |rest: &str| -> Result<PairType> {
        if rest == "irr" {
            return Ok(PairType::Irr);
        }
        let c = parse_rep(p, rest)?;
        PairType::bridge_from_rep(p, c.0, c.1)
    };
    match kind {
        "C" => Ok(ParsedCurve::Curve(CurveClass::Bridge(pair_type(rest)?))),
        "Ctilde" => Ok(ParsedCurve::Curve(CurveClass::BridgeUpstairs(pair_type(rest)?))),
        "D" => {
            let t = pair_type(rest)?;
            check_tacnodal_type(p, &t)?;
            Ok(ParsedCurve::Curve(CurveClass::Tacnodal(t)))
        }
        "R" => {
            if rest == "irr" {
                Ok(ParsedCurve::Rosary(RosaryType::Irr))
            } else {
                let c = parse_rep(p, rest)?;
                Ok(ParsedCurve::Rosary(RosaryType::triple_from_rep(p, c.0, c.1)?))
            }
        }
        other => Err(Error::SyntaxError {
            pos: 0,
            msg: format!("unknown curve kind `{other}`"),
        }),
    }
}

fn parse_rep(p: HyperbolicPair, text: &str) -> Result<(u32, u32)> {
    let t = crate::boundary::parse_typeset(p, text)?;
    let mut it = t.pairs();
    match (t.has_irr(), it.next(), it.next()) {
        (false, Some(c), None) => Ok((c.tau(), c.mask())),
        _ => Err(Error::SyntaxError {
            pos: 0,
            msg: format!("`{text}` is not a single (tau, I) representative"),
        }),
    }
}

/// Dispatches the text-level pairing of a parsed curve with a class.
pub fn pair_curve(p: HyperbolicPair, c: &ParsedCurve, l: &DivisorClass) -> Result<Q> {
    match c {
        ParsedCurve::Curve(CurveClass::Bridge(t)) => pair_bridge(p, t, l),
        ParsedCurve::Curve(CurveClass::BridgeUpstairs(t)) => pair_bridge_upstairs(p, t, l),
        ParsedCurve::Curve(CurveClass::Tacnodal(t)) => pair_tacnodal(p, t, l),
        ParsedCurve::Rosary(r) => rosary_weight(p, r, l),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::minimal_subsets;
    use crate::divisor::{named_class, pullback_upsilon, ClassName};

    fn hp(g: u32, n: u32) -> HyperbolicPair {
        HyperbolicPair::new(g, n).unwrap()
    }

    fn nef_generator(p: HyperbolicPair) -> DivisorClass {
        // 10*lambda - delta_hat, the supporting class of the full face
        let lam = named_class(p, &SpaceId::Ps, ClassName::Lambda).unwrap();
        let dh = named_class(p, &SpaceId::Ps, ClassName::DeltaHat).unwrap();
        lam.scale(&q(10)).try_sub(&dh).unwrap()
    }

    #[test]
    fn bridge_pairing_examples() {
        let p = hp(5, 0);
        let l = nef_generator(p);
        assert_eq!(pair_bridge(p, &PairType::Irr, &l).unwrap(), Q::zero());
        for t in minimal_subsets(p).unwrap() {
            assert_eq!(pair_bridge(p, &t, &l).unwrap(), Q::zero());
        }

        // a boundary generator pairs to -1 against its own pair type
        let p = hp(3, 1);
        let c = canonicalize_mask(p, 0, 1).unwrap();
        let t = PairType::bridge_from_rep(p, 0, 1).unwrap();
        let d = named_class(p, &SpaceId::Ps, ClassName::Delta(c)).unwrap();
        assert_eq!(pair_bridge(p, &t, &d).unwrap(), q(-1));

        // K+psi pairs to -7 against every bridge type
        for (g, n) in [(5, 0), (3, 1), (2, 2), (7, 0)] {
            let p = hp(g, n);
            let kp = named_class(p, &SpaceId::Ps, ClassName::CanonicalPlusPsi).unwrap();
            for t in minimal_subsets(p).unwrap() {
                assert_eq!(pair_bridge(p, &t, &kp).unwrap(), q(-7), "(g,n)=({g},{n})");
            }
        }
    }

    #[test]
    fn singleton_pair_subtracts_twice() {
        // (5,0): the type {2:{}} has lower == upper, so delta[2:{}] pairs -2
        let p = hp(5, 0);
        let c2 = canonicalize_mask(p, 2, 0).unwrap();
        let t = PairType::bridge_from_rep(p, 2, 0).unwrap();
        let d = named_class(p, &SpaceId::Ps, ClassName::Delta(c2)).unwrap();
        assert_eq!(pair_bridge(p, &t, &d).unwrap(), q(-2));
    }

    #[test]
    fn upstairs_examples() {
        let p = hp(4, 0);
        let tail = tail_class(p).unwrap();
        let dt = named_class(p, &SpaceId::Bar, ClassName::Delta(tail)).unwrap();
        assert_eq!(pair_bridge_upstairs(p, &PairType::Irr, &dt).unwrap(), Q::one());
        let lam = named_class(p, &SpaceId::Bar, ClassName::Lambda).unwrap();
        assert_eq!(pair_bridge_upstairs(p, &PairType::Irr, &lam).unwrap(), Q::zero());
    }

    #[test]
    fn projection_formula_on_a_basis() {
        for (g, n) in [(2, 1), (1, 2), (3, 1), (5, 0), (2, 2)] {
            let p = hp(g, n);
            let pres = crate::divisor::presentation(p, &SpaceId::Ps).unwrap();
            for l in pres.basis().unwrap() {
                let up = pullback_upsilon(p, &l).unwrap();
                for t in minimal_subsets(p).unwrap() {
                    assert_eq!(
                        pair_bridge(p, &t, &l).unwrap(),
                        pair_bridge_upstairs(p, &t, &up).unwrap(),
                        "(g,n)=({g},{n}) t={}",
                        t.text(p)
                    );
                }
            }
        }
    }

    #[test]
    fn tacnodal_examples() {
        let p = hp(5, 0);
        let full = TypeSet::full(p).unwrap();
        let sp = SpaceId::TPlus(full);
        let lam = named_class(p, &sp, ClassName::Lambda).unwrap();
        let dh = named_class(p, &sp, ClassName::DeltaHat).unwrap();
        for t in minimal_subsets(p).unwrap() {
            assert_eq!(pair_tacnodal(p, &t, &lam).unwrap(), q(-1));
            assert_eq!(pair_tacnodal(p, &t, &dh).unwrap(), q(-10));
            let kp = named_class(p, &sp, ClassName::CanonicalPlusPsi).unwrap();
            assert_eq!(pair_tacnodal(p, &t, &kp).unwrap(), q(7));
        }
    }

    #[test]
    fn tacnodal_antisymmetry() {
        for (g, n) in [(5, 0), (3, 1), (2, 2), (6, 1)] {
            let p = hp(g, n);
            let full = TypeSet::full(p).unwrap();
            let pres = crate::divisor::presentation(p, &SpaceId::T(full.clone())).unwrap();
            for l in pres.basis().unwrap() {
                for t in minimal_subsets(p).unwrap() {
                    if !is_tacnodal_type(p, &t) {
                        continue;
                    }
                    let lt = l.restrict_to(p, &SpaceId::TPlus(full.clone())).unwrap();
                    assert_eq!(
                        pair_tacnodal(p, &t, &lt).unwrap(),
                        -pair_bridge(p, &t, &l).unwrap(),
                        "(g,n)=({g},{n}) t={}",
                        t.text(p)
                    );
                }
            }
        }
    }

    #[test]
    fn forbidden_tacnodal_types() {
        let p = hp(3, 1);
        let t = PairType::bridge_from_rep(p, 0, 1).unwrap(); // {[0,{1}],[1,{1}]}
        let sp = SpaceId::TPlus(TypeSet::full(p).unwrap());
        let lam = named_class(p, &sp, ClassName::Lambda).unwrap();
        assert!(matches!(
            pair_tacnodal(p, &t, &lam),
            Err(Error::ForbiddenTacnodalType(_))
        ));
        // on (1,2) every pair type runs through a point-tail class
        let p = hp(1, 2);
        let t = PairType::bridge_from_rep(p, 0, 1).unwrap();
        assert!(!is_tacnodal_type(p, &t));
    }

    #[test]
    fn rosary_weight_examples() {
        let p = hp(7, 0);
        let full = TypeSet::full(p).unwrap();
        let sp = SpaceId::TPlus(full.clone());
        let lam = named_class(p, &sp, ClassName::Lambda).unwrap();
        let triples = rosary_triples(p, &full).unwrap();
        assert!(!triples.is_empty());
        for r in &triples {
            assert_eq!(rosary_weight(p, r, &lam).unwrap(), Q::zero());
            let kp = named_class(p, &sp, ClassName::CanonicalPlusPsi).unwrap();
            if r.descent_relevant(p) {
                assert_eq!(rosary_weight(p, r, &kp).unwrap(), Q::zero());
            }
        }
        // a chain starting at [2,{}] weighs -1 against delta[2:{}]
        let r = RosaryType::triple_from_rep(p, 2, 0).unwrap();
        let c2 = canonicalize_mask(p, 2, 0).unwrap();
        let d2 = named_class(p, &sp, ClassName::Delta(c2)).unwrap();
        assert_eq!(rosary_weight(p, &r, &d2).unwrap(), q(-1));
    }

    #[test]
    fn curve_text_round_trip() {
        let p = hp(5, 0);
        // `R:2:{}` parses but prints as `R:1:{}`: the two representatives
        // read the same chain in opposite directions.
        let r = parse_curve(p, "R:2:{}").unwrap();
        assert!(matches!(r, ParsedCurve::Rosary(r) if r.text(p) == "R:1:{}"));
        for s in ["C:irr", "C:2:{}", "Ctilde:2:{}", "D:irr", "R:1:{}"] {
            let c = parse_curve(p, s).unwrap();
            let text = match &c {
                ParsedCurve::Curve(c) => c.text(p),
                ParsedCurve::Rosary(r) => r.text(p),
            };
            assert_eq!(text, s);
        }
        assert!(parse_curve(p, "X:irr").is_err());
        let p = hp(3, 1);
        assert!(matches!(
            parse_curve(p, "D:0:{1}"),
            Err(Error::ForbiddenTacnodalType(_))
        ));
    }

    #[test]
    fn wrong_space_is_rejected() {
        let p = hp(5, 0);
        let lam_bar = named_class(p, &SpaceId::Bar, ClassName::Lambda).unwrap();
        assert!(matches!(
            pair_bridge(p, &PairType::Irr, &lam_bar),
            Err(Error::WrongSpace { .. })
        ));
        let lam_ps = named_class(p, &SpaceId::Ps, ClassName::Lambda).unwrap();
        assert!(matches!(
            pair_bridge_upstairs(p, &PairType::Irr, &lam_ps),
            Err(Error::WrongSpace { .. })
        ));
    }
}
