//! One-round Arthur–Merlin retrieval of Ã(w) (R1) and of (Ã(w), Ã(w')) (R2)
//! from a quantum low-degree extension, with honest and cheating provers.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param_err, Error, Result};
use crate::geom::{self, line_through, plane_through, AffineSubspace, Line, Point};
use crate::gf::{Fe, Field};
use crate::mpoly::{fit_multivariate, fit_univariate, MultiPoly, UniPoly};
use crate::qsim::{measure_all, QuantumState};

/// What Merlin sees: the marked point(s) and the queried set in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Query {
    /// Answers are indexed by the canonical line parameter t.
    Line { marked: Point, line: Line },
    /// Answers are indexed by the row-major index of the canonical coordinates.
    Flat { marked: (Point, Point), flat: AffineSubspace },
}

impl Query {
    pub fn points(&self, field: &Field) -> Vec<Point> {
        match self {
            Query::Line { line, .. } => line.points(field),
            Query::Flat { flat, .. } => flat.points(field).expect("a plane is enumerable"),
        }
    }

    fn marked(&self) -> &Point {
        match self {
            Query::Line { marked, .. } => marked,
            Query::Flat { marked, .. } => &marked.0,
        }
    }

    fn fingerprint(&self) -> u64 {
        // FNV-1a over the query's field encodings.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |x: u64| {
            h ^= x;
            h = h.wrapping_mul(0x0100_0000_01b3);
        };
        let (tag, marked, rows): (u64, Vec<&Point>, Vec<&Point>) = match self {
            Query::Line { marked, line } => (1, vec![marked], vec![&line.base, &line.dir]),
            Query::Flat { marked, flat } => {
                (2, vec![&marked.0, &marked.1], std::iter::once(&flat.base).chain(&flat.dirs).collect())
            }
        };
        eat(tag);
        for v in marked.into_iter().chain(rows) {
            eat(v.len() as u64);
            v.iter().for_each(|x| eat(x.0 as u64));
        }
        h
    }
}

/// A deterministic prover. Answers list one value per point of the queried set.
pub trait MerlinStrategy: Send + Sync {
    fn name(&self) -> &str;
    fn answer(&self, field: &Field, query: &Query) -> Vec<Fe>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Verdict {
    Value(Fe),
    Pair(Fe, Fe),
    Err,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Value(v) => write!(f, "value({v})"),
            Verdict::Pair(a, b) => write!(f, "pair({a},{b})"),
            Verdict::Err => write!(f, "Err"),
        }
    }
}

impl std::str::FromStr for Verdict {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || param_err!("unrecognized verdict {s:?}");
        let num = |x: &str| x.trim().parse::<u16>().map(Fe).map_err(|_| bad());
        if s == "Err" {
            Ok(Verdict::Err)
        } else if let Some(v) = s.strip_prefix("value(").and_then(|r| r.strip_suffix(')')) {
            Ok(Verdict::Value(num(v)?))
        } else if let Some(p) = s.strip_prefix("pair(").and_then(|r| r.strip_suffix(')')) {
            let (a, b) = p.split_once(',').ok_or_else(bad)?;
            Ok(Verdict::Pair(num(a)?, num(b)?))
        } else {
            Err(bad())
        }
    }
}

impl Serialize for Verdict {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Verdict {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Exact verdict probabilities, serialized as `{verdict: probability}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VerdictDistribution(pub BTreeMap<Verdict, f64>);

impl VerdictDistribution {
    fn push(&mut self, v: Verdict, p: f64) {
        if p > 0.0 {
            *self.0.entry(v).or_insert(0.0) += p;
        }
    }

    pub fn prob(&self, v: &Verdict) -> f64 {
        self.0.get(v).copied().unwrap_or(0.0)
    }

    /// Mass on verdicts that are neither `correct` nor Err.
    pub fn wrong_prob(&self, correct: &Verdict) -> f64 {
        self.0.iter().filter(|(v, _)| *v != correct && **v != Verdict::Err).fold(0.0, |a, (_, p)| a + p)
    }

    pub fn total(&self) -> f64 {
        self.0.values().fold(0.0, |a, p| a + p)
    }
}

fn honest_values(field: &Field, lde: &MultiPoly, query: &Query) -> Vec<Fe> {
    query.points(field).iter().map(|z| lde.eval(field, z)).collect()
}

/// Answers every query with the restriction of `lde`.
pub struct Honest {
    lde: MultiPoly,
}

pub fn honest_strategy(lde: MultiPoly) -> Honest {
    Honest { lde }
}

impl MerlinStrategy for Honest {
    fn name(&self) -> &str {
        "honest"
    }

    fn answer(&self, field: &Field, query: &Query) -> Vec<Fe> {
        honest_values(field, &self.lde, query)
    }
}

/// Strategy from a closure.
pub struct FnStrategy<F> {
    pub name: String,
    pub f: F,
}

impl<F: Fn(&Field, &Query) -> Vec<Fe> + Send + Sync> MerlinStrategy for FnStrategy<F> {
    fn name(&self) -> &str {
        &self.name
    }

    fn answer(&self, field: &Field, query: &Query) -> Vec<Fe> {
        (self.f)(field, query)
    }
}

/// Alice's side of R1 after measuring (z, y_z).
pub fn r1_decide(
    field: &Field,
    w: &[Fe],
    z: &[Fe],
    y_z: Fe,
    answer: impl FnOnce(&Query) -> Vec<Fe>,
    r: usize,
) -> Verdict {
    if w == z {
        return Verdict::Value(y_z);
    }
    let line = line_through(w, z).expect("distinct points of equal dimension");
    let canonical = line.canonical(field);
    let query = Query::Line { marked: w.to_vec(), line: canonical.clone() };
    let ans = answer(&query);
    if ans.len() != field.order() || ans.iter().any(|&v| !field.contains(v)) {
        return Verdict::Err;
    }
    let (mu, lambda) = line.reparam_to(field, &canonical).expect("same point set");
    let values: Vec<Fe> = field.enumerate().map(|t| ans[field.add(mu, field.mul(lambda, t)).index()]).collect();
    let g = match fit_univariate(field, &values, r).expect("one value per field element") {
        Ok(g) => g,
        Err(_) => return Verdict::Err,
    };
    if g.eval(field, Fe::ONE) != y_z {
        return Verdict::Err;
    }
    Verdict::Value(g.eval(field, Fe::ZERO))
}

/// Alice's side of R2 after measuring (z, y_z).
pub fn r2_decide(
    field: &Field,
    w: &[Fe],
    w2: &[Fe],
    z: &[Fe],
    y_z: Fe,
    strategy: &dyn MerlinStrategy,
    r: usize,
) -> Verdict {
    // A coincident measurement already reveals one value; the other comes from R1.
    if z == w || z == w2 {
        let other = if z == w { w2 } else { w };
        let v = r1_decide(field, other, z, y_z, |q| strategy.answer(field, q), r);
        return match v {
            Verdict::Value(x) if z == w => Verdict::Pair(y_z, x),
            Verdict::Value(x) => Verdict::Pair(x, y_z),
            _ => Verdict::Err,
        };
    }
    let plane = plane_through(w, w2, z).expect("three points of equal dimension");
    let canonical = plane.canonical(field);
    let query = Query::Flat { marked: (w.to_vec(), w2.to_vec()), flat: canonical.clone() };
    let ans = strategy.answer(field, &query);
    let q = field.order();
    let k = canonical.dim();
    if ans.len() != q.pow(k as u32) || ans.iter().any(|&v| !field.contains(v)) {
        return Verdict::Err;
    }
    let values: Vec<Fe> = geom::all_points(field, 2)
        .expect("F^2 is enumerable")
        .map(|st| {
            let p = plane.at(field, &st);
            let c = canonical.coords(field, &p).expect("point of the plane");
            ans[geom::point_index(q, &c)]
        })
        .collect();
    let g = match fit_multivariate(field, 2, &values, r).expect("full grid") {
        Ok(g) => g,
        Err(_) => return Verdict::Err,
    };
    if g.eval(field, &[Fe::ONE, Fe::ZERO]) != y_z {
        return Verdict::Err;
    }
    Verdict::Pair(g.eval(field, &[Fe::ZERO, Fe::ZERO]), g.eval(field, &[Fe::ZERO, Fe::ONE]))
}

fn check_point(state: &QuantumState, w: &[Fe]) -> Result<()> {
    if w.len() != state.d() || w.iter().any(|&x| !state.field().contains(x)) {
        return Err(param_err!("marked point is not in F^{}", state.d()));
    }
    Ok(())
}

pub fn run_r1(
    state: &QuantumState,
    w: &[Fe],
    strategy: &dyn MerlinStrategy,
    r: usize,
    rng: &mut impl Rng,
) -> Result<Verdict> {
    check_point(state, w)?;
    let f = state.field();
    let (z, y) = measure_all(state, rng);
    Ok(r1_decide(f, w, &z, y, |q| strategy.answer(f, q), r))
}

pub fn run_r2(
    state: &QuantumState,
    w: &[Fe],
    w2: &[Fe],
    strategy: &dyn MerlinStrategy,
    r: usize,
    rng: &mut impl Rng,
) -> Result<Verdict> {
    check_point(state, w)?;
    check_point(state, w2)?;
    if w == w2 {
        return Err(param_err!("R2 needs two distinct points"));
    }
    let (z, y) = measure_all(state, rng);
    Ok(r2_decide(state.field(), w, w2, &z, y, strategy, r))
}

/// Exact verdict law over every measurement outcome (z, y), weighted by |φ_{z,y}|².
/// `decide` may depend on z, which lets tests model provers that cheat with
/// knowledge Merlin does not have.
pub fn exact_distribution_with(
    state: &QuantumState,
    decide: impl Fn(&Point, Fe) -> Verdict,
) -> VerdictDistribution {
    let q = state.field().order();
    let mut dist = VerdictDistribution::default();
    for zi in 0..state.num_points() {
        let z = geom::point_at(q, state.d(), zi);
        for (y, a) in state.fiber(zi) {
            let p = a.norm_sqr();
            if p > 0.0 {
                dist.push(decide(&z, y), p);
            }
        }
    }
    dist
}

pub fn exact_r1_distribution(
    state: &QuantumState,
    w: &[Fe],
    strategy: &dyn MerlinStrategy,
    r: usize,
) -> Result<VerdictDistribution> {
    check_point(state, w)?;
    let f = state.field();
    Ok(exact_distribution_with(state, |z, y| r1_decide(f, w, z, y, |q| strategy.answer(f, q), r)))
}

pub fn exact_r2_distribution(
    state: &QuantumState,
    w: &[Fe],
    w2: &[Fe],
    strategy: &dyn MerlinStrategy,
    r: usize,
) -> Result<VerdictDistribution> {
    check_point(state, w)?;
    check_point(state, w2)?;
    if w == w2 {
        return Err(param_err!("R2 needs two distinct points"));
    }
    let f = state.field();
    Ok(exact_distribution_with(state, |z, y| r2_decide(f, w, w2, z, y, strategy, r)))
}

/// Names accepted by [`adversary_by_name`], in suite order.
pub const ADVERSARY_NAMES: [&str; 6] =
    ["honest", "constant-shift", "point-anchored", "random-low-degree", "random-garbage", "w-flip"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Cheat {
    Shift,
    Anchored,
    LowDegree,
    Garbage,
    Flip,
}

/// A cheating prover built on the honest answer.
pub struct Adversary {
    name: &'static str,
    kind: Cheat,
    lde: MultiPoly,
    r: usize,
    c: Fe,
    seed: u64,
}

/// `c·Π (x − aᵢ)` over the given anchors.
fn vanishing(field: &Field, c: Fe, anchors: &[Fe]) -> UniPoly {
    anchors
        .iter()
        .fold(UniPoly::constant(c), |acc, &a| acc.mul(field, &UniPoly::new(vec![a, Fe::ONE])))
}

impl Adversary {
    /// First coordinate of the marked point in the query's canonical parameters.
    fn marked_coord(&self, field: &Field, query: &Query) -> Fe {
        match query {
            Query::Line { line, .. } => line.param_of(field, query.marked()).expect("marked point lies on the line"),
            Query::Flat { flat, .. } => {
                flat.coords(field, query.marked()).expect("marked point lies on the flat").first().copied().unwrap_or(Fe::ZERO)
            }
        }
    }

    /// First canonical coordinate of every queried point, in answer order.
    fn first_coords(field: &Field, query: &Query) -> Vec<Fe> {
        let q = field.order();
        match query {
            Query::Line { .. } => field.enumerate().collect(),
            Query::Flat { flat, .. } => (0..q.pow(flat.dim() as u32))
                .map(|i| geom::point_at(q, flat.dim(), i).first().copied().unwrap_or(Fe::ZERO))
                .collect(),
        }
    }

    fn random_low_degree(&self, field: &Field, query: &Query, rng: &mut ChaCha8Rng) -> Vec<Fe> {
        let q = field.order();
        let k = match query {
            Query::Line { .. } => 1,
            Query::Flat { flat, .. } => flat.dim(),
        };
        let mut p = MultiPoly::zero(k);
        for i in 0..q.pow(k as u32) {
            let exps: Vec<u16> = geom::point_at(q, k, i).into_iter().map(|e| e.0).collect();
            if exps.iter().map(|&e| e as usize).sum::<usize>() <= self.r {
                p.add_term(field, exps, Fe(rng.gen_range(0..q) as u16));
            }
        }
        (0..q.pow(k as u32)).map(|i| p.eval(field, &geom::point_at(q, k, i))).collect()
    }
}

impl MerlinStrategy for Adversary {
    fn name(&self) -> &str {
        self.name
    }

    fn answer(&self, field: &Field, query: &Query) -> Vec<Fe> {
        let q = field.order();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ query.fingerprint());
        let honest = honest_values(field, &self.lde, query);
        let perturb = |p: UniPoly| -> Vec<Fe> {
            honest
                .iter()
                .zip(Self::first_coords(field, query))
                .map(|(&h, x)| field.add(h, p.eval(field, x)))
                .collect()
        };
        let tw = self.marked_coord(field, query);
        let others = field.enumerate().filter(|&t| t != tw);
        match self.kind {
            Cheat::Shift => perturb(UniPoly::constant(self.c)),
            // c·(x − a)^r vanishes only at the anchor a ≠ w.
            Cheat::Anchored => {
                let a = others.clone().next().expect("|F| ≥ 2");
                perturb(vanishing(field, self.c, &vec![a; self.r]))
            }
            // c·Π(x − aᵢ) over r anchors ≠ w: the most agreement a wrong degree-r answer can keep.
            Cheat::Flip => {
                let anchors: Vec<Fe> = others.take(self.r.min(q - 1)).collect();
                perturb(vanishing(field, self.c, &anchors))
            }
            Cheat::LowDegree => self.random_low_degree(field, query, &mut rng),
            Cheat::Garbage => (0..honest.len()).map(|_| Fe(rng.gen_range(0..q) as u16)).collect(),
        }
    }
}

pub fn adversary_by_name(name: &str, lde: &MultiPoly, field: &Field, r: usize, rng: &mut impl Rng) -> Result<Box<dyn MerlinStrategy>> {
    let kind = match name {
        "honest" => return Ok(Box::new(honest_strategy(lde.clone()))),
        "constant-shift" => Cheat::Shift,
        "point-anchored" => Cheat::Anchored,
        "random-low-degree" => Cheat::LowDegree,
        "random-garbage" => Cheat::Garbage,
        "w-flip" => Cheat::Flip,
        other => return Err(Error::Config(format!("unknown adversary {other:?}; expected one of {ADVERSARY_NAMES:?}"))),
    };
    let name = ADVERSARY_NAMES.iter().find(|&&n| n == name).copied().expect("listed above");
    let c = Fe(rng.gen_range(1..field.order()) as u16);
    Ok(Box::new(Adversary { name, kind, lde: lde.clone(), r, c, seed: rng.gen() }))
}

/// Every named strategy, honest first.
pub fn adversary_suite(lde: &MultiPoly, field: &Field, r: usize, rng: &mut impl Rng) -> Vec<Box<dyn MerlinStrategy>> {
    ADVERSARY_NAMES
        .iter()
        .map(|n| adversary_by_name(n, lde, field, r, rng).expect("known name"))
        .collect()
}
