//! Rational Picard groups of the ambient lci stack, the stable and
//! pseudo-stable moduli spaces, and the contracted/flipped spaces, as
//! exact-rational quotient presentations on the generators
//! `lambda, delta_irr, delta[tau:I]`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, RwLock};

use num_rational::BigRational;
use num_traits::{One, Zero};
use once_cell::sync::{Lazy, OnceCell};
use serde_json::{json, Value};

use crate::boundary::{
    canonicalize_mask, enumerate_pair_classes, format_typeset, tail_class, HyperbolicPair,
    PairClass, TypeSet,
};
use crate::error::{Error, Result};
use crate::linalg::{self, Q};

/// The space a divisor class lives on, at the level of its rational
/// Picard presentation.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum SpaceId {
    /// Ambient stack of pointed lci curves: free on the generators
    /// (modulo the low-genus relations).
    Ulci,
    /// Moduli of stable curves: same presentation as `Ulci`.
    Bar,
    /// Moduli of pseudo-stable curves: the tail generator is killed.
    Ps,
    /// Good moduli space of the boundary contraction for a subset:
    /// identified with the `Ps` presentation.
    T(TypeSet),
    /// The flipped space: tail generator plus the point-tail generators of
    /// the divisorial pairs inside the subset are killed.
    TPlus(TypeSet),
}

impl SpaceId {
    pub fn name(&self, p: HyperbolicPair) -> String {
        match self {
            SpaceId::Ulci => "Ulci".into(),
            SpaceId::Bar => "Mbar".into(),
            SpaceId::Ps => "Mps".into(),
            SpaceId::T(t) => format!("MT[{}]", format_typeset(p, t)),
            SpaceId::TPlus(t) => format!("MT+[{}]", format_typeset(p, t)),
        }
    }
}

impl fmt::Display for SpaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceId::Ulci => f.write_str("Ulci"),
            SpaceId::Bar => f.write_str("Mbar"),
            SpaceId::Ps => f.write_str("Mps"),
            SpaceId::T(_) => f.write_str("MT"),
            SpaceId::TPlus(_) => f.write_str("MT+"),
        }
    }
}

/// Quotient presentation of a rational Picard group: ordered generators,
/// killed generators, and relation rows.
pub struct Presentation {
    pair: HyperbolicPair,
    space: SpaceId,
    classes: Vec<PairClass>,
    index: BTreeMap<PairClass, usize>,
    killed: BTreeSet<PairClass>,
    relations: Vec<Vec<Q>>,
    quotient: OnceCell<Quotient>,
}

pub(crate) struct Quotient {
    rows: Vec<Vec<Q>>,
    pivots: Vec<usize>,
    free: Vec<usize>,
}

impl Presentation {
    pub fn pair(&self) -> HyperbolicPair {
        self.pair
    }

    pub fn space(&self) -> &SpaceId {
        &self.space
    }

    /// Pair classes in generator order; columns are `[lambda, delta_irr]`
    /// followed by these.
    pub fn classes(&self) -> &[PairClass] {
        &self.classes
    }

    pub fn killed(&self) -> &BTreeSet<PairClass> {
        &self.killed
    }

    pub fn relations(&self) -> &[Vec<Q>] {
        &self.relations
    }

    pub fn ncols(&self) -> usize {
        2 + self.classes.len()
    }

    pub fn col_of(&self, c: &PairClass) -> Option<usize> {
        self.index.get(c).map(|i| i + 2)
    }

    pub fn generator_names(&self) -> Vec<String> {
        let mut names = vec!["lambda".to_string(), "delta_irr".to_string()];
        names.extend(self.classes.iter().map(|c| format!("delta[{}]", c.text(self.pair))));
        names
    }

    fn quotient(&self) -> &Quotient {
        self.quotient.get_or_init(|| {
            let mut rows: Vec<Vec<Q>> = Vec::new();
            for k in &self.killed {
                let mut r = vec![Q::zero(); self.ncols()];
                r[self.col_of(k).expect("killed generator is a column")] = Q::one();
                rows.push(r);
            }
            rows.extend(self.relations.iter().cloned());
            let (rows, pivots) = linalg::rref(rows, self.ncols());
            let free = (0..self.ncols()).filter(|c| !pivots.contains(c)).collect();
            Quotient { rows, pivots, free }
        })
    }

    /// Dimension of the presented group over the rationals.
    pub fn rank(&self) -> Result<usize> {
        if self.pair.g() == 0 {
            return Err(Error::GenusZeroUnsupported);
        }
        Ok(self.quotient().free.len())
    }

    /// Canonical coset representatives of a quotient basis: the unit
    /// vectors of the non-pivot columns.
    pub fn basis(&self) -> Result<Vec<DivisorClass>> {
        if self.pair.g() == 0 {
            return Err(Error::GenusZeroUnsupported);
        }
        Ok(self
            .quotient()
            .free
            .iter()
            .map(|&c| {
                let mut v = vec![Q::zero(); self.ncols()];
                v[c] = Q::one();
                self.class_from_vec(&v)
            })
            .collect())
    }

    pub fn reduce_vec(&self, v: &mut [Q]) {
        let q = self.quotient();
        linalg::reduce_against(v, &q.rows, &q.pivots);
    }

    pub fn class_from_vec(&self, v: &[Q]) -> DivisorClass {
        let mut b = BTreeMap::new();
        for (i, c) in self.classes.iter().enumerate() {
            if !v[i + 2].is_zero() {
                b.insert(*c, v[i + 2].clone());
            }
        }
        DivisorClass {
            space: self.space.clone(),
            a: v[0].clone(),
            b_irr: v[1].clone(),
            b,
        }
    }

    pub fn vec_of(&self, l: &DivisorClass) -> Result<Vec<Q>> {
        let mut v = vec![Q::zero(); self.ncols()];
        v[0] = l.a.clone();
        v[1] = l.b_irr.clone();
        for (c, x) in &l.b {
            let col = self.col_of(c).ok_or_else(|| {
                Error::OutOfRange(format!("class {} is not a generator here", c.text(self.pair)))
            })?;
            v[col] = x.clone();
        }
        Ok(v)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "space": self.space.name(self.pair),
            "generators": self.generator_names(),
            "killed": self.killed.iter().map(|c| format!("delta[{}]", c.text(self.pair))).collect::<Vec<_>>(),
            "relations": self.relations.iter()
                .map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        })
    }
}

static MEMO: Lazy<RwLock<HashMap<(HyperbolicPair, SpaceId), Arc<Presentation>>>> =
    Lazy::new(|| RwLock::new(HashMap::new()));

/// The presentation of the rational Picard group of `s`, memoized.
///
/// For g = 0 the relation rows are not encoded; rank queries on such a
/// presentation refuse with `GenusZeroUnsupported`.
pub fn presentation(p: HyperbolicPair, s: &SpaceId) -> Result<Arc<Presentation>> {
    if let Some(hit) = MEMO.read().expect("memo lock").get(&(p, s.clone())) {
        return Ok(hit.clone());
    }
    let classes = enumerate_pair_classes(p)?;
    let index: BTreeMap<PairClass, usize> = classes.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let ncols = 2 + classes.len();

    let mut killed = BTreeSet::new();
    match s {
        SpaceId::Ulci | SpaceId::Bar => {}
        SpaceId::Ps | SpaceId::T(_) => {
            killed.extend(tail_class(p));
        }
        SpaceId::TPlus(t) => {
            killed.extend(tail_class(p));
            for i in 1..=p.n() {
                let m = 1u32 << (i - 1);
                let (Ok(c0), Ok(c1)) = (canonicalize_mask(p, 0, m), canonicalize_mask(p, 1, m))
                else {
                    continue;
                };
                if t.contains(&c0) && t.contains(&c1) {
                    killed.insert(c1);
                }
            }
        }
    }

    let mut relations: Vec<Vec<Q>> = Vec::new();
    match p.g() {
        2 => {
            // 10*lambda = delta_irr + 2 * sum of the genus-1 classes
            let mut r = vec![Q::zero(); ncols];
            r[0] = linalg::q(10);
            r[1] = linalg::q(-1);
            for (i, c) in classes.iter().enumerate() {
                if c.tau() == 1 {
                    r[i + 2] = linalg::q(-2);
                }
            }
            relations.push(r);
        }
        1 => {
            // 12*lambda = delta_irr, and one row per marked point
            let mut r = vec![Q::zero(); ncols];
            r[0] = linalg::q(12);
            r[1] = linalg::q(-1);
            relations.push(r);
            for pt in 1..=p.n() {
                let mut r = vec![Q::zero(); ncols];
                r[1] = Q::one();
                for (i, c) in classes.iter().enumerate() {
                    if c.tau() == 0 && c.mask() >> (pt - 1) & 1 == 1 {
                        r[i + 2] = linalg::q(12);
                    }
                }
                relations.push(r);
            }
        }
        _ => {}
    }

    let pres = Arc::new(Presentation {
        pair: p,
        space: s.clone(),
        classes,
        index,
        killed,
        relations,
        quotient: OnceCell::new(),
    });
    let mut w = MEMO.write().expect("memo lock");
    Ok(w.entry((p, s.clone())).or_insert(pres).clone())
}

/// Dimension over the rationals of the presented Picard group.
pub fn rank(p: HyperbolicPair, s: &SpaceId) -> Result<usize> {
    presentation(p, s)?.rank()
}

/// An exact-rational divisor class on a space: coefficients of `lambda`,
/// `delta_irr` and of the boundary generators, keyed by canonical class.
/// Zero coefficients are not stored.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DivisorClass {
    space: SpaceId,
    a: Q,
    b_irr: Q,
    b: BTreeMap<PairClass, Q>,
}

impl DivisorClass {
    pub fn zero(space: SpaceId) -> Self {
        DivisorClass {
            space,
            a: Q::zero(),
            b_irr: Q::zero(),
            b: BTreeMap::new(),
        }
    }

    pub fn space(&self) -> &SpaceId {
        &self.space
    }

    pub fn lambda_coeff(&self) -> &Q {
        &self.a
    }

    pub fn irr_coeff(&self) -> &Q {
        &self.b_irr
    }

    pub fn coeff(&self, c: &PairClass) -> Q {
        self.b.get(c).cloned().unwrap_or_else(Q::zero)
    }

    pub fn set_lambda(&mut self, x: Q) {
        self.a = x;
    }

    pub fn set_irr(&mut self, x: Q) {
        self.b_irr = x;
    }

    pub fn set_coeff(&mut self, c: PairClass, x: Q) {
        if x.is_zero() {
            self.b.remove(&c);
        } else {
            self.b.insert(c, x);
        }
    }

    pub fn add_coeff(&mut self, c: PairClass, x: &Q) {
        let cur = self.coeff(&c) + x;
        self.set_coeff(c, cur);
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b_irr.is_zero() && self.b.values().all(Zero::is_zero)
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&PairClass, &Q)> {
        self.b.iter()
    }

    pub fn scale(&self, f: &Q) -> DivisorClass {
        let mut out = self.clone();
        out.a *= f;
        out.b_irr *= f;
        for v in out.b.values_mut() {
            *v *= f;
        }
        out.normalize();
        out
    }

    pub fn try_add(&self, other: &DivisorClass) -> Result<DivisorClass> {
        if self.space != other.space {
            return Err(Error::WrongSpace {
                expected: format!("{}", self.space),
                found: format!("{}", other.space),
            });
        }
        let mut out = self.clone();
        out.a += &other.a;
        out.b_irr += &other.b_irr;
        for (c, x) in &other.b {
            out.add_coeff(*c, x);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &DivisorClass) -> Result<DivisorClass> {
        self.try_add(&other.scale(&linalg::q(-1)))
    }

    fn normalize(&mut self) {
        self.b.retain(|_, v| !v.is_zero());
    }

    /// Canonical coset representative: killed coordinates zeroed and the
    /// relation pivots eliminated in generator order.
    pub fn reduce(&self, p: HyperbolicPair) -> Result<DivisorClass> {
        let pres = presentation(p, &self.space)?;
        let mut v = pres.vec_of(self)?;
        pres.reduce_vec(&mut v);
        Ok(pres.class_from_vec(&v))
    }

    /// Reinterprets the class on another space along the allowed
    /// restriction maps and reduces there.
    pub fn restrict_to(&self, p: HyperbolicPair, s: &SpaceId) -> Result<DivisorClass> {
        let ok = match (&self.space, s) {
            (a, b) if a == b => true,
            (SpaceId::Ulci, _) => true,
            (SpaceId::Ps, SpaceId::T(_) | SpaceId::TPlus(_) | SpaceId::Ps) => true,
            (SpaceId::T(t), SpaceId::TPlus(u)) => t == u,
            (SpaceId::T(_), SpaceId::Ps) => true,
            _ => false,
        };
        if !ok {
            return Err(Error::WrongSpace {
                expected: format!("{}", s),
                found: format!("{}", self.space),
            });
        }
        let mut out = self.clone();
        out.space = s.clone();
        out.reduce(p)
    }

    pub fn to_json(&self, p: HyperbolicPair) -> Value {
        let mut classes = serde_json::Map::new();
        for (c, x) in &self.b {
            if !x.is_zero() {
                classes.insert(c.text(p), Value::String(x.to_string()));
            }
        }
        json!({
            "lambda": self.a.to_string(),
            "irr": self.b_irr.to_string(),
            "classes": Value::Object(classes),
        })
    }

    pub fn from_json(p: HyperbolicPair, space: SpaceId, v: &Value) -> Result<DivisorClass> {
        let bad = |msg: String| Error::SyntaxError { pos: 0, msg };
        let parse_q = |s: &Value| -> Result<Q> {
            let s = s
                .as_str()
                .ok_or_else(|| bad("rational coefficients must be \"p/q\" strings".into()))?;
            s.parse::<BigRational>().map_err(|e| bad(format!("bad rational `{s}`: {e}")))
        };
        let mut out = DivisorClass::zero(space);
        if let Some(x) = v.get("lambda") {
            out.a = parse_q(x)?;
        }
        if let Some(x) = v.get("irr") {
            out.b_irr = parse_q(x)?;
        }
        if let Some(obj) = v.get("classes") {
            let obj = obj.as_object().ok_or_else(|| bad("`classes` must be an object".into()))?;
            for (key, val) in obj {
                let c = parse_class_key(p, key)?;
                out.add_coeff(c, &parse_q(val)?);
            }
        }
        Ok(out)
    }

    /// Plain-text rendering, e.g. `13*lambda - 2*delta_irr - 2*delta[2:{}]`.
    pub fn text(&self, p: HyperbolicPair) -> String {
        let mut terms: Vec<(String, &Q)> = Vec::new();
        if !self.a.is_zero() {
            terms.push(("lambda".into(), &self.a));
        }
        if !self.b_irr.is_zero() {
            terms.push(("delta_irr".into(), &self.b_irr));
        }
        for (c, x) in &self.b {
            if !x.is_zero() {
                terms.push((format!("delta[{}]", c.text(p)), x));
            }
        }
        if terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (name, x)) in terms.iter().enumerate() {
            let neg = **x < Q::zero();
            let mag = if neg { -(*x).clone() } else { (*x).clone() };
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if mag.is_one() {
                out.push_str(name);
            } else {
                out.push_str(&format!("{mag}*{name}"));
            }
        }
        out
    }
}

fn parse_class_key(p: HyperbolicPair, key: &str) -> Result<PairClass> {
    let t = crate::boundary::parse_typeset(p, key)?;
    let mut it = t.pairs();
    match (t.has_irr(), it.next(), it.next()) {
        (false, Some(c), None) => Ok(*c),
        _ => Err(Error::SyntaxError {
            pos: 0,
            msg: format!("`{key}` is not a single boundary class"),
        }),
    }
}

/// Named divisor-class presets.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ClassName {
    Lambda,
    DeltaIrr,
    Delta(PairClass),
    PsiI(u32),
    Psi,
    DeltaTotal,
    DeltaHat,
    Canonical,
    CanonicalPlusPsi,
    NefGenerator,
}

impl ClassName {
    /// Parses the preset grammar: `lambda`, `delta_irr`, `delta:t:{..}`,
    /// `psi`, `psi:i`, `delta`, `delta_hat`, `K`, `K+psi`, `N`.
    pub fn parse(p: HyperbolicPair, text: &str) -> Result<ClassName> {
        let t = text.trim();
        Ok(match t {
            "lambda" => ClassName::Lambda,
            "delta_irr" => ClassName::DeltaIrr,
            "psi" => ClassName::Psi,
            "delta" => ClassName::DeltaTotal,
            "delta_hat" => ClassName::DeltaHat,
            "K" => ClassName::Canonical,
            "K+psi" | "K_plus_psi" => ClassName::CanonicalPlusPsi,
            "N" => ClassName::NefGenerator,
            _ => {
                if let Some(rest) = t.strip_prefix("psi:") {
                    let i: u32 = rest
                        .trim()
                        .parse()
                        .map_err(|_| Error::UnknownName(text.to_string()))?;
                    if i == 0 || i > p.n() {
                        return Err(Error::OutOfRange(format!("index {i} not in {{1..{}}}", p.n())));
                    }
                    ClassName::PsiI(i)
                } else if let Some(rest) = t.strip_prefix("delta:") {
                    ClassName::Delta(parse_class_key(p, rest)?)
                } else {
                    return Err(Error::UnknownName(text.to_string()));
                }
            }
        })
    }
}

/// Builds a named class on `s`, reduced to the stored representative.
pub fn named_class(p: HyperbolicPair, s: &SpaceId, name: ClassName) -> Result<DivisorClass> {
    named_class_raw(p, s.clone(), name)?.reduce(p)
}

/// The unreduced expansion of a named class (generator coefficients before
/// the quotient is applied).
pub fn named_class_raw(p: HyperbolicPair, s: SpaceId, name: ClassName) -> Result<DivisorClass> {
    let mut l = DivisorClass::zero(s.clone());
    match name {
        ClassName::Lambda => l.set_lambda(Q::one()),
        ClassName::DeltaIrr => l.set_irr(Q::one()),
        ClassName::Delta(c) => l.set_coeff(c, Q::one()),
        ClassName::PsiI(i) => {
            let c = canonicalize_mask(p, 0, 1 << (i - 1))?;
            l.set_coeff(c, linalg::q(-1));
        }
        ClassName::Psi => {
            for i in 1..=p.n() {
                let c = canonicalize_mask(p, 0, 1 << (i - 1))?;
                l.add_coeff(c, &linalg::q(-1));
            }
        }
        ClassName::DeltaTotal => {
            l.set_irr(Q::one());
            for c in enumerate_pair_classes(p)? {
                if !c.is_point() {
                    l.set_coeff(c, Q::one());
                }
            }
        }
        ClassName::DeltaHat => {
            l.set_irr(Q::one());
            for c in enumerate_pair_classes(p)? {
                l.set_coeff(c, Q::one());
            }
        }
        ClassName::Canonical => {
            // 13 lambda - 2 delta + psi
            let d = named_class_raw(p, s.clone(), ClassName::DeltaTotal)?;
            let ps = named_class_raw(p, s.clone(), ClassName::Psi)?;
            l.set_lambda(linalg::q(13));
            l = l.try_add(&d.scale(&linalg::q(-2)))?.try_add(&ps)?;
        }
        ClassName::CanonicalPlusPsi => {
            // 13 lambda - 2 delta_hat
            let dh = named_class_raw(p, s.clone(), ClassName::DeltaHat)?;
            l.set_lambda(linalg::q(13));
            l = l.try_add(&dh.scale(&linalg::q(-2)))?;
        }
        ClassName::NefGenerator => {
            // (13/10) * (10 lambda - delta_hat)
            let dh = named_class_raw(p, s.clone(), ClassName::DeltaHat)?;
            l.set_lambda(linalg::q(10));
            l = l.try_sub(&dh)?.scale(&Q::new(13.into(), 10.into()));
        }
    }
    Ok(l)
}

/// Whether two classes agree in the Picard group of their common space.
pub fn classes_equal(p: HyperbolicPair, l1: &DivisorClass, l2: &DivisorClass) -> Result<bool> {
    Ok(l1.try_sub(l2)?.reduce(p)?.is_zero())
}

/// Pull-back along the elliptic-tail contraction: the tail coefficient of
/// the image is `a + 12*b_irr`, every other coefficient is unchanged.
pub fn pullback_upsilon(p: HyperbolicPair, l: &DivisorClass) -> Result<DivisorClass> {
    if *l.space() != SpaceId::Ps {
        return Err(Error::WrongSpace {
            expected: "Mps".into(),
            found: format!("{}", l.space()),
        });
    }
    let red = l.reduce(p)?;
    let mut out = red.clone();
    out.space = SpaceId::Bar;
    let tail_coeff = red.lambda_coeff() + red.irr_coeff().clone() * linalg::q(12);
    if let Some(tc) = tail_class(p) {
        out.set_coeff(tc, tail_coeff);
    }
    out.reduce(p)
}
