//! Boundary-type index sets for a hyperbolic pair (g,n): the classes
//! `irr` and `[tau, I]` of node types modulo the flip `(tau,I) ~ (g-tau,I^c)`,
//! subsets of them, admissibility, closures, minimal subsets and
//! divisorial parts.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::atomic::{AtomicU32, Ordering};

use serde_json::{json, Value};

use crate::error::{Error, Result};

/// Enumeration cap on the number of marked points (2^n subsets per genus).
static POINT_CAP: AtomicU32 = AtomicU32::new(16);

pub fn point_cap() -> u32 {
    POINT_CAP.load(Ordering::Relaxed)
}

/// Overrides the marked-point enumeration cap (hard ceiling 30: index sets
/// are stored as u32 bitmasks).
pub fn set_point_cap(cap: u32) {
    POINT_CAP.store(cap.min(30), Ordering::Relaxed);
}

/// The pair (g,n) with 2g-2+n > 0; ambient context of every computation.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct HyperbolicPair {
    g: u32,
    n: u32,
}

impl HyperbolicPair {
    pub fn new(g: u32, n: u32) -> Result<Self> {
        if 2 * g + n <= 2 {
            return Err(Error::NotHyperbolic { g, n });
        }
        if n > 30 {
            return Err(Error::OutOfRange(format!("n={n} exceeds the bitmask width")));
        }
        Ok(HyperbolicPair { g, n })
    }

    pub fn g(&self) -> u32 {
        self.g
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Bitmask of the full index set {1..n}.
    pub fn full_mask(&self) -> u32 {
        if self.n == 0 {
            0
        } else {
            (1u32 << self.n) - 1
        }
    }

    fn check_cap(&self) -> Result<()> {
        if self.n > point_cap() {
            Err(Error::CapExceeded {
                required: 1u128 << self.n,
                cap: 1u64 << point_cap(),
            })
        } else {
            Ok(())
        }
    }
}

impl fmt::Display for HyperbolicPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.g, self.n)
    }
}

fn mask_to_string(mask: u32, n: u32) -> String {
    let items: Vec<String> = (1..=n).filter(|i| mask >> (i - 1) & 1 == 1).map(|i| i.to_string()).collect();
    format!("{{{}}}", items.join(","))
}

/// Lexicographic comparison of bitmasks read from the lowest bit upward.
fn mask_lex_le(a: u32, b: u32, n: u32) -> bool {
    for i in 0..n {
        let (x, y) = (a >> i & 1, b >> i & 1);
        if x != y {
            return x < y;
        }
    }
    true
}

/// A boundary class `[tau, I]`, stored in canonical-representative form:
/// of the two representatives `(tau,I)` and `(g-tau,I^c)` the one with the
/// smaller `tau` is kept; on a tie, the one whose index bitmask is
/// lexicographically smaller read low-to-high.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct PairClass {
    tau: u32,
    mask: u32,
}

impl PairClass {
    pub fn tau(&self) -> u32 {
        self.tau
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    pub fn indices(&self, n: u32) -> Vec<u32> {
        (1..=n).filter(|i| self.mask >> (i - 1) & 1 == 1).collect()
    }

    /// Both raw representatives of the class on `p`, canonical one first.
    pub fn reps(&self, p: HyperbolicPair) -> [(u32, u32); 2] {
        [(self.tau, self.mask), (p.g - self.tau, p.full_mask() ^ self.mask)]
    }

    pub fn text(&self, p: HyperbolicPair) -> String {
        format!("{}:{}", self.tau, mask_to_string(self.mask, p.n))
    }

    /// Whether the class is a marked-point class `[0,{i}]` (the sign-flipped
    /// point bundle).
    pub fn is_point(&self) -> bool {
        self.tau == 0 && self.mask.count_ones() == 1
    }
}

/// The class of `(1, {})`: boundary divisor of tail type, killed in every
/// quotient presentation past the first contraction. `None` when g = 0.
pub fn tail_class(p: HyperbolicPair) -> Option<PairClass> {
    canonicalize_mask(p, 1, 0).ok()
}

/// Whether `c` is a point-tail class `[1,{j}]` for some marked point j.
pub fn is_point_tail_class(p: HyperbolicPair, c: PairClass) -> bool {
    (1..=p.n).any(|j| canonicalize_mask(p, 1, 1 << (j - 1)) == Ok(c))
}

/// Canonical class of `(tau, I)` with `I` given as a bitmask.
pub fn canonicalize_mask(p: HyperbolicPair, tau: u32, mask: u32) -> Result<PairClass> {
    if tau > p.g {
        return Err(Error::OutOfRange(format!("tau={tau} not in [0,{}]", p.g)));
    }
    if mask > p.full_mask() {
        return Err(Error::OutOfRange(format!(
            "index set {} not inside {{1..{}}}",
            mask_to_string(mask, 30),
            p.n
        )));
    }
    let full = p.full_mask();
    if (tau, mask) == (0, 0) || (tau, mask) == (p.g, full) {
        return Err(Error::ExcludedClass {
            tau,
            set: mask_to_string(mask, p.n),
        });
    }
    let (atau, amask) = (p.g - tau, full ^ mask);
    let keep_first = match tau.cmp(&atau) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => mask_lex_le(mask, amask, p.n),
    };
    if keep_first {
        Ok(PairClass { tau, mask })
    } else {
        Ok(PairClass { tau: atau, mask: amask })
    }
}

/// Canonical class of `(tau, I)` with `I` given as 1-based indices.
pub fn canonicalize(p: HyperbolicPair, tau: u32, indices: &[u32]) -> Result<PairClass> {
    let mut mask = 0u32;
    for &i in indices {
        if i == 0 || i > p.n {
            return Err(Error::OutOfRange(format!("index {i} not in {{1..{}}}", p.n)));
        }
        mask |= 1 << (i - 1);
    }
    canonicalize_mask(p, tau, mask)
}

/// A class of the full index set: `irr` or a pair class.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum BridgeClass {
    Irr,
    Pair(PairClass),
}

impl BridgeClass {
    pub fn text(&self, p: HyperbolicPair) -> String {
        match self {
            BridgeClass::Irr => "irr".into(),
            BridgeClass::Pair(c) => c.text(p),
        }
    }
}

/// Every class of the index set, exactly once: `irr` first, then pair
/// classes ordered by (tau, bitmask) of the canonical representative.
pub fn enumerate_classes(p: HyperbolicPair) -> Result<Vec<BridgeClass>> {
    Ok(std::iter::once(BridgeClass::Irr)
        .chain(enumerate_pair_classes(p)?.into_iter().map(BridgeClass::Pair))
        .collect())
}

pub fn enumerate_pair_classes(p: HyperbolicPair) -> Result<Vec<PairClass>> {
    p.check_cap()?;
    let mut set = BTreeSet::new();
    for tau in 0..=p.g {
        for mask in 0..=p.full_mask() {
            if let Ok(c) = canonicalize_mask(p, tau, mask) {
                set.insert(c);
            }
        }
    }
    Ok(set.into_iter().collect())
}

/// Neighbour classes of `c`: the classes of `(tau-1, I)` and `(tau+1, I)`
/// for the canonical representative `(tau, I)`. Nonexistent neighbours
/// (out of range or excluded) are `None`.
pub fn neighbors(p: HyperbolicPair, c: PairClass) -> [Option<PairClass>; 2] {
    let down = c.tau.checked_sub(1).and_then(|t| canonicalize_mask(p, t, c.mask).ok());
    let up = (c.tau + 1 <= p.g)
        .then(|| canonicalize_mask(p, c.tau + 1, c.mask).ok())
        .flatten();
    [down, up]
}

/// A subset of the index set.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct TypeSet {
    irr: bool,
    pairs: BTreeSet<PairClass>,
}

impl TypeSet {
    pub fn empty() -> Self {
        TypeSet::default()
    }

    pub fn full(p: HyperbolicPair) -> Result<Self> {
        Ok(TypeSet {
            irr: true,
            pairs: enumerate_pair_classes(p)?.into_iter().collect(),
        })
    }

    pub fn has_irr(&self) -> bool {
        self.irr
    }

    pub fn set_irr(&mut self, v: bool) {
        self.irr = v;
    }

    pub fn insert(&mut self, c: PairClass) {
        self.pairs.insert(c);
    }

    pub fn remove(&mut self, c: &PairClass) {
        self.pairs.remove(c);
    }

    pub fn contains(&self, c: &PairClass) -> bool {
        self.pairs.contains(c)
    }

    pub fn pairs(&self) -> impl Iterator<Item = &PairClass> {
        self.pairs.iter()
    }

    pub fn len(&self) -> usize {
        self.pairs.len() + usize::from(self.irr)
    }

    pub fn is_empty(&self) -> bool {
        !self.irr && self.pairs.is_empty()
    }

    pub fn is_subset(&self, other: &TypeSet) -> bool {
        (!self.irr || other.irr) && self.pairs.is_subset(&other.pairs)
    }

    pub fn union(&self, other: &TypeSet) -> TypeSet {
        TypeSet {
            irr: self.irr || other.irr,
            pairs: self.pairs.union(&other.pairs).cloned().collect(),
        }
    }

    pub fn to_json(&self, p: HyperbolicPair) -> Value {
        json!({
            "irr": self.irr,
            "pairs": self.pairs.iter().map(|c| json!([c.tau, c.indices(p.n)])).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(p: HyperbolicPair, v: &Value) -> Result<Self> {
        let bad = |msg: &str| Error::SyntaxError { pos: 0, msg: msg.into() };
        let irr = v
            .get("irr")
            .and_then(Value::as_bool)
            .ok_or_else(|| bad("missing boolean field `irr`"))?;
        let mut set = TypeSet { irr, pairs: BTreeSet::new() };
        let pairs = v
            .get("pairs")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing array field `pairs`"))?;
        for item in pairs {
            let arr = item.as_array().filter(|a| a.len() == 2).ok_or_else(|| bad("pair item must be [tau, [i,...]]"))?;
            let tau = arr[0].as_u64().ok_or_else(|| bad("tau must be a non-negative integer"))? as u32;
            let idx: Vec<u32> = arr[1]
                .as_array()
                .ok_or_else(|| bad("index set must be an array"))?
                .iter()
                .map(|x| x.as_u64().map(|v| v as u32).ok_or_else(|| bad("index must be an integer")))
                .collect::<Result<_>>()?;
            set.insert(canonicalize(p, tau, &idx)?);
        }
        Ok(set)
    }
}

/// Formats a subset in the text grammar: comma-separated items, each `irr`
/// or `tau:{i1,i2,...}`, canonical representatives, deterministic order.
pub fn format_typeset(p: HyperbolicPair, t: &TypeSet) -> String {
    let mut items = Vec::new();
    if t.irr {
        items.push("irr".to_string());
    }
    items.extend(t.pairs.iter().map(|c| c.text(p)));
    items.join(",")
}

/// Parses the subset grammar. The empty string is the empty subset.
pub fn parse_typeset(p: HyperbolicPair, text: &str) -> Result<TypeSet> {
    let mut set = TypeSet::empty();
    if text.trim().is_empty() {
        return Ok(set);
    }
    let mut pos;
    // Split items at top level: commas inside `{}` belong to the index list.
    let bytes = text.as_bytes();
    let mut depth = 0usize;
    let mut start = 0usize;
    let mut items: Vec<(usize, &str)> = Vec::new();
    for (i, &b) in bytes.iter().enumerate() {
        match b {
            b'{' => depth += 1,
            b'}' => {
                depth = depth.checked_sub(1).ok_or(Error::SyntaxError {
                    pos: i,
                    msg: "unmatched `}`".into(),
                })?;
            }
            b',' if depth == 0 => {
                items.push((start, &text[start..i]));
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(Error::SyntaxError {
            pos: text.len(),
            msg: "unmatched `{`".into(),
        });
    }
    items.push((start, &text[start..]));

    for (off, raw) in items {
        let item = raw.trim();
        pos = off + (raw.len() - raw.trim_start().len());
        if item.is_empty() {
            return Err(Error::SyntaxError { pos, msg: "empty item".into() });
        }
        if item == "irr" {
            set.set_irr(true);
            continue;
        }
        let colon = item.find(':').ok_or(Error::SyntaxError {
            pos,
            msg: format!("expected `irr` or `tau:{{...}}`, got `{item}`"),
        })?;
        let tau: u32 = item[..colon].trim().parse().map_err(|_| Error::SyntaxError {
            pos,
            msg: format!("invalid genus part `{}`", &item[..colon]),
        })?;
        let rest = item[colon + 1..].trim();
        if !rest.starts_with('{') || !rest.ends_with('}') {
            return Err(Error::SyntaxError {
                pos: pos + colon + 1,
                msg: "index set must be written {i1,i2,...}".into(),
            });
        }
        let inner = &rest[1..rest.len() - 1];
        let mut indices = Vec::new();
        if !inner.trim().is_empty() {
            for part in inner.split(',') {
                let i: u32 = part.trim().parse().map_err(|_| Error::SyntaxError {
                    pos: pos + colon + 1,
                    msg: format!("invalid index `{part}`"),
                })?;
                indices.push(i);
            }
        }
        set.insert(canonicalize(p, tau, &indices)?);
    }
    Ok(set)
}

/// Admissibility: the tail class is absent, `irr` is absent when g <= 1,
/// and every pair class has a neighbour class inside the subset.
///
/// (The g <= 1 bound on `irr` keeps this predicate the fixed-point test of
/// [`adm_closure`], which strips `irr` for g <= 1; for g = 0 no pair class
/// has a neighbour, so the empty set is the only admissible subset.)
pub fn is_admissible(p: HyperbolicPair, t: &TypeSet) -> bool {
    if tail_class(p).is_some_and(|tc| t.contains(&tc)) {
        return false;
    }
    if p.g <= 1 && t.has_irr() {
        return false;
    }
    t.pairs().all(|c| {
        neighbors(p, *c)
            .iter()
            .any(|nb| nb.map(|nb| t.contains(&nb)).unwrap_or(false))
    })
}

/// The admissible closure: strips the tail class (and `irr` when g <= 1),
/// then removes in one simultaneous pass every pair class with no
/// neighbour left in the stripped set.
pub fn adm_closure(p: HyperbolicPair, t: &TypeSet) -> TypeSet {
    let mut stripped = t.clone();
    if let Some(tc) = tail_class(p) {
        stripped.remove(&tc);
    }
    if p.g <= 1 {
        stripped.set_irr(false);
    }
    let keep: BTreeSet<PairClass> = stripped
        .pairs()
        .filter(|c| {
            neighbors(p, **c)
                .iter()
                .any(|nb| nb.map(|nb| stripped.contains(&nb)).unwrap_or(false))
        })
        .cloned()
        .collect();
    TypeSet {
        irr: stripped.has_irr(),
        pairs: keep,
    }
}

/// The divisorial part: the union of the point pairs `{[0,{i}],[1,{i}]}`
/// contained in `t`. Empty by definition for (1,1) and (2,1), where the
/// would-be point-tail class collapses onto the tail class or disappears.
pub fn divisorial_part(p: HyperbolicPair, t: &TypeSet) -> TypeSet {
    let mut out = TypeSet::empty();
    if (p.g, p.n) == (1, 1) || (p.g, p.n) == (2, 1) {
        return out;
    }
    for i in 1..=p.n {
        let m = 1u32 << (i - 1);
        let (Ok(c0), Ok(c1)) = (canonicalize_mask(p, 0, m), canonicalize_mask(p, 1, m)) else {
            continue;
        };
        if t.contains(&c0) && t.contains(&c1) {
            out.insert(c0);
            out.insert(c1);
        }
    }
    out
}

/// Verdict of the stack-containment comparison between two subsets.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Containment {
    Equal,
    TinS,
    SinT,
    Incomparable,
}

impl fmt::Display for Containment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Containment::Equal => "Equal",
            Containment::TinS => "TinS",
            Containment::SinT => "SinT",
            Containment::Incomparable => "Incomparable",
        })
    }
}

/// Compares the moduli spaces attached to `t` and `s` by comparing the
/// admissible closures under inclusion.
pub fn compare_typesets(p: HyperbolicPair, t: &TypeSet, s: &TypeSet) -> Containment {
    let (ta, sa) = (adm_closure(p, t), adm_closure(p, s));
    match (ta.is_subset(&sa), sa.is_subset(&ta)) {
        (true, true) => Containment::Equal,
        (true, false) => Containment::TinS,
        (false, true) => Containment::SinT,
        (false, false) => Containment::Incomparable,
    }
}

/// Type of a one-parameter boundary curve: the `irr` type (g >= 2), or an
/// unordered pair of classes `{[tau,I],[tau+1,I]}` neither of which is the
/// tail class. `lower` and `upper` may coincide as classes.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum PairType {
    Irr,
    Bridge { lower: PairClass, upper: PairClass },
}

impl PairType {
    /// Builds the pair type generated by the representative `(tau, I)`,
    /// i.e. the class set `{class(tau,I), class(tau+1,I)}`, normalised to
    /// its smallest generating representative.
    pub fn bridge_from_rep(p: HyperbolicPair, tau: u32, mask: u32) -> Result<PairType> {
        if tau + 1 > p.g {
            return Err(Error::InvalidCurveType(format!(
                "representative ({tau},{}) has no upper class",
                mask_to_string(mask, p.n)
            )));
        }
        let lower = canonicalize_mask(p, tau, mask).map_err(invalid)?;
        let upper = canonicalize_mask(p, tau + 1, mask).map_err(invalid)?;
        let tail = tail_class(p);
        if tail == Some(lower) || tail == Some(upper) {
            return Err(Error::InvalidCurveType(
                "pair types through the tail class (1,{}) are not defined".into(),
            ));
        }
        let (rt, rm) = smallest_generating_rep(p, lower, upper);
        Ok(PairType::Bridge {
            lower: canonicalize_mask(p, rt, rm).expect("valid rep"),
            upper: canonicalize_mask(p, rt + 1, rm).expect("valid rep"),
        })
    }

    /// The unordered class set of the type.
    pub fn classes(&self) -> Vec<BridgeClass> {
        match self {
            PairType::Irr => vec![BridgeClass::Irr],
            PairType::Bridge { lower, upper } => {
                if lower == upper {
                    vec![BridgeClass::Pair(*lower)]
                } else {
                    vec![BridgeClass::Pair(*lower), BridgeClass::Pair(*upper)]
                }
            }
        }
    }

    /// Whether the class set is contained in `t`.
    pub fn contained_in(&self, t: &TypeSet) -> bool {
        match self {
            PairType::Irr => t.has_irr(),
            PairType::Bridge { lower, upper } => t.contains(lower) && t.contains(upper),
        }
    }

    /// Smallest representative `(tau, I)` generating the pair, used for
    /// naming the associated curves.
    pub fn rep(&self, p: HyperbolicPair) -> Option<(u32, u32)> {
        match self {
            PairType::Irr => None,
            PairType::Bridge { lower, upper } => Some(smallest_generating_rep(p, *lower, *upper)),
        }
    }

    pub fn text(&self, p: HyperbolicPair) -> String {
        match self.rep(p) {
            None => "irr".into(),
            Some((tau, mask)) => format!("{tau}:{}", mask_to_string(mask, p.n)),
        }
    }
}

fn invalid(e: Error) -> Error {
    Error::InvalidCurveType(e.to_string())
}

/// Smallest `(tau, I)` with `{class(tau,I), class(tau+1,I)}` equal to the
/// given unordered class pair.
fn smallest_generating_rep(p: HyperbolicPair, lower: PairClass, upper: PairClass) -> (u32, u32) {
    let mut best: Option<(u32, u32)> = None;
    let mut consider = |t: u32, m: u32| {
        if t + 1 > p.g {
            return;
        }
        let (Ok(a), Ok(b)) = (canonicalize_mask(p, t, m), canonicalize_mask(p, t + 1, m)) else {
            return;
        };
        if (a, b) != (lower, upper) && (a, b) != (upper, lower) {
            return;
        }
        let cand = (t, m);
        if best.map_or(true, |cur| rep_lt(cand, cur, p.n)) {
            best = Some(cand);
        }
    };
    for c in [lower, upper] {
        for (t, m) in c.reps(p) {
            consider(t, m);
            if t >= 1 {
                consider(t - 1, m);
            }
        }
    }
    best.expect("a pair type always has a generating representative")
}

fn rep_lt(a: (u32, u32), b: (u32, u32), _n: u32) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// Every minimal subset of the index set: `{irr}` when g >= 2, and every
/// distinct pair type; duplicates reached from different representatives
/// appear once. The count matches the closed-form face dimension.
pub fn minimal_subsets(p: HyperbolicPair) -> Result<Vec<PairType>> {
    p.check_cap()?;
    let mut out = BTreeSet::new();
    if p.g >= 2 {
        out.insert(PairType::Irr);
    }
    for tau in 0..p.g {
        for mask in 0..=p.full_mask() {
            if let Ok(t) = PairType::bridge_from_rep(p, tau, mask) {
                out.insert(t);
            }
        }
    }
    Ok(out.into_iter().collect())
}

/// Minimal subsets whose class set is contained in `t` (after closure these
/// are exactly the extremal rays of the associated face).
pub fn minimal_subsets_in(p: HyperbolicPair, t: &TypeSet) -> Result<Vec<PairType>> {
    Ok(minimal_subsets(p)?.into_iter().filter(|m| m.contained_in(t)).collect())
}
