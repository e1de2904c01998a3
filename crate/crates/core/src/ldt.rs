//! Agreement measures, the quantum low-degree test, its closed-form
//! acceptance probability, and brute-force checks of the soundness chain.

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param_err, Error, Result};
use crate::geom::{self, all_lines, random_invertible_map, Line, Point};
use crate::gf::{Fe, Field};
use crate::mpoly::{fit_multivariate, MultiPoly, UniPoly};
use crate::qsim::{apply_linear_permutation, build_line_state, measure_prefix, projection_prob, QuantumState};
use crate::stats;

/// Arithmetic slack for inequalities between exactly computed reals.
pub const SLACK: f64 = 1e-9;

/// Enumeration budget for brute-force polynomial search.
pub const BRUTE_FORCE_BUDGET: u64 = 1 << 24;

/// An assignment of polynomials to lines. Polynomials are expressed in the
/// parameter of the canonical line; the verifier re-parameterizes.
pub trait LineOracle: Sync {
    fn degree_bound(&self) -> usize;

    /// Support of g_ℓ for a canonical line. The masses sum to at most 1; any
    /// deficit is the probability that reading g_ℓ already causes rejection.
    fn distribution(&self, line: &Line) -> Vec<(f64, UniPoly)>;

    fn is_deterministic(&self) -> bool {
        false
    }

    fn sample(&self, line: &Line, rng: &mut dyn rand::RngCore) -> Option<UniPoly> {
        let mut x: f64 = rng.gen();
        for (p, g) in self.distribution(line) {
            if x < p {
                return Some(g);
            }
            x -= p;
        }
        None
    }
}

/// A fixed polynomial per line.
#[derive(Clone, Debug)]
pub struct DeterministicOracle {
    r: usize,
    polys: HashMap<Line, UniPoly>,
}

impl DeterministicOracle {
    pub fn from_fn(field: &Field, d: usize, r: usize, mut g: impl FnMut(&Line) -> UniPoly) -> Result<Self> {
        let mut polys = HashMap::new();
        for line in all_lines(field, d)? {
            let p = g(&line);
            if p.degree().unwrap_or(0) > r {
                return Err(param_err!("oracle polynomial of degree {:?} exceeds r = {r}", p.degree()));
            }
            polys.insert(line, p);
        }
        Ok(DeterministicOracle { r, polys })
    }

    /// g_ℓ = p|_ℓ for every line.
    pub fn restriction(field: &Field, p: &MultiPoly, r: usize) -> Result<Self> {
        DeterministicOracle::from_fn(field, p.nvars(), r, |line| restrict_to_line(field, p, line))
    }

    pub fn get(&self, line: &Line) -> Option<&UniPoly> {
        self.polys.get(line)
    }

    /// Replaces g_ℓ on one canonical line.
    pub fn set(&mut self, line: &Line, g: UniPoly) -> Result<()> {
        if g.degree().unwrap_or(0) > self.r {
            return Err(param_err!("oracle polynomial exceeds r = {}", self.r));
        }
        match self.polys.get_mut(line) {
            Some(slot) => *slot = g,
            None => return Err(param_err!("not a canonical line of the oracle's space")),
        }
        Ok(())
    }
}

impl LineOracle for DeterministicOracle {
    fn degree_bound(&self) -> usize {
        self.r
    }

    fn distribution(&self, line: &Line) -> Vec<(f64, UniPoly)> {
        self.polys.get(line).map(|g| vec![(1.0, g.clone())]).unwrap_or_default()
    }

    fn is_deterministic(&self) -> bool {
        true
    }
}

/// An explicit distribution over polynomials per line.
#[derive(Clone, Debug)]
pub struct RandomizedOracle {
    r: usize,
    dists: HashMap<Line, Vec<(f64, UniPoly)>>,
}

impl RandomizedOracle {
    pub fn from_fn(field: &Field, d: usize, r: usize, mut g: impl FnMut(&Line) -> Vec<(f64, UniPoly)>) -> Result<Self> {
        let mut dists = HashMap::new();
        for line in all_lines(field, d)? {
            let dist = g(&line);
            let mass: f64 = dist.iter().map(|(p, _)| p).sum();
            if dist.iter().any(|(p, _)| *p < 0.0) || mass > 1.0 + 1e-12 {
                return Err(param_err!("line distribution has mass {mass}"));
            }
            if dist.iter().any(|(_, p)| p.degree().unwrap_or(0) > r) {
                return Err(param_err!("oracle polynomial exceeds r = {r}"));
            }
            dists.insert(line, dist);
        }
        Ok(RandomizedOracle { r, dists })
    }
}

impl LineOracle for RandomizedOracle {
    fn degree_bound(&self) -> usize {
        self.r
    }

    fn distribution(&self, line: &Line) -> Vec<(f64, UniPoly)> {
        self.dists.get(line).cloned().unwrap_or_default()
    }
}

/// p|_ℓ in the line's own parameter.
pub fn restrict_to_line(field: &Field, p: &MultiPoly, line: &Line) -> UniPoly {
    p.restrict_to_subspace(field, &line.as_subspace())
        .and_then(|q| q.to_univariate())
        .expect("line lives in the polynomial's space")
}

/// Agr[f, f'] = Prob_z[f(z) = f'(z)].
pub fn agr_functions(field: &Field, d: usize, f: impl Fn(&[Fe]) -> Fe, f2: impl Fn(&[Fe]) -> Fe) -> Result<f64> {
    let n = geom::space_size(field, d)?;
    let hits = geom::all_points(field, d)?.filter(|z| f(z) == f2(z)).count();
    Ok(hits as f64 / n as f64)
}

/// Agr[f, G] = E_ℓ E_{g_ℓ} Prob_{z∈ℓ}[f(z) = g_ℓ(z)], straight from the definition.
pub fn agr_with_oracle(field: &Field, d: usize, f: impl Fn(&[Fe]) -> Fe, g: &dyn LineOracle) -> Result<f64> {
    let lines = all_lines(field, d)?;
    let q = field.order() as f64;
    let total: f64 = lines
        .iter()
        .map(|line| {
            let fv: Vec<Fe> = line.points(field).iter().map(|z| f(z)).collect();
            g.distribution(line)
                .iter()
                .map(|(p, gl)| {
                    let hits = field.enumerate().filter(|&t| gl.eval(field, t) == fv[t.index()]).count();
                    p * hits as f64 / q
                })
                .sum::<f64>()
        })
        .sum();
    Ok(total / lines.len() as f64)
}

/// `score[z·|F| + y]` is the contribution of f(z) = y to Agr[f, G]:
/// Σ_{ℓ∋z} Prob[g_ℓ(z) = y] / (|L|·|F|).
#[derive(Clone, Debug)]
pub struct ScoreTable {
    q: usize,
    d: usize,
    scores: Vec<f64>,
}

impl ScoreTable {
    pub fn new(field: &Field, d: usize, g: &dyn LineOracle) -> Result<Self> {
        let q = field.order();
        let lines = all_lines(field, d)?;
        let w = 1.0 / (lines.len() * q) as f64;
        let per_line: Vec<Vec<(f64, UniPoly)>> = lines.par_iter().map(|l| g.distribution(l)).collect();
        let mut scores = vec![0.0; geom::space_size(field, d)? * q];
        for (line, dist) in lines.iter().zip(per_line) {
            for (t, z) in line.points(field).iter().enumerate() {
                let zi = geom::point_index(q, z);
                for (p, gl) in &dist {
                    scores[zi * q + gl.eval(field, Fe(t as u16)).index()] += p * w;
                }
            }
        }
        Ok(ScoreTable { q, d, scores })
    }

    pub fn score(&self, z: usize, y: Fe) -> f64 {
        self.scores[z * self.q + y.index()]
    }

    pub fn num_points(&self) -> usize {
        self.scores.len() / self.q
    }

    /// Agr[h, G] for a function given by its value table.
    pub fn agr_table(&self, values: &[Fe]) -> f64 {
        values.iter().enumerate().map(|(z, &y)| self.score(z, y)).sum()
    }

    /// Agr[f, G] for a probabilistic f.
    pub fn agr_induced(&self, f: &InducedProbFunction) -> f64 {
        (0..self.num_points())
            .map(|z| f.dist[z].iter().enumerate().map(|(y, p)| p * self.score(z, Fe(y as u16))).sum::<f64>())
            .sum()
    }

    /// Values maximizing the score at each point, smallest y on ties, and
    /// whether every maximizer was unique.
    pub fn pointwise_argmax(&self) -> (Vec<Fe>, bool) {
        let mut unique = true;
        let values = (0..self.num_points())
            .map(|z| {
                let row = &self.scores[z * self.q..(z + 1) * self.q];
                let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let mut winners = row.iter().enumerate().filter(|(_, &s)| s == best).map(|(y, _)| y);
                let y = winners.next().expect("nonempty row");
                unique &= winners.next().is_none();
                Fe(y as u16)
            })
            .collect();
        (values, unique)
    }

    pub fn d(&self) -> usize {
        self.d
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceReport {
    pub gamma: f64,
    pub method: Method,
    pub trials: Option<usize>,
    pub stderr: Option<f64>,
}

fn check_dims(state: &QuantumState) -> Result<()> {
    if state.d() < 2 {
        return Err(param_err!("the low-degree test needs d ≥ 2"));
    }
    Ok(())
}

/// Steps I and II once: random E, prefix measurement, read g_ℓ, project.
pub fn qldt_run_once(state: &QuantumState, g: &dyn LineOracle, rng: &mut impl Rng) -> Result<bool> {
    check_dims(state)?;
    let f = state.field();
    let e = random_invertible_map(f, state.d(), rng);
    let moved = apply_linear_permutation(state, &e)?;
    let outcome = measure_prefix(&moved, &e, rng)?;
    let canonical = outcome.line.canonical(f);
    let Some(gc) = g.sample(&canonical, rng) else {
        return Ok(false);
    };
    let (mu, lambda) = outcome.line.reparam_to(f, &canonical).expect("same point set");
    let e1 = build_line_state(&gc.compose_affine(f, mu, lambda), f);
    Ok(rng.gen::<f64>() < projection_prob(&outcome.collapsed, &e1))
}

/// |Σ_{z∈ℓ} φ_{z,g(z)}|² for g in the line's parameter.
fn line_overlap(state: &QuantumState, line: &Line, g: &UniPoly) -> f64 {
    let f = state.field();
    let q = f.order();
    f.enumerate()
        .map(|t| state.amp(geom::point_index(q, &line.at(f, t)), g.eval(f, t)))
        .sum::<num_complex::Complex64>()
        .norm_sqr()
}

/// γ = (|F|·N)^{−1} Σ_ℓ E_{g_ℓ} |Σ_{z∈ℓ} φ_{z,g_ℓ(z)}|².
pub fn qldt_accept_exact(state: &QuantumState, g: &dyn LineOracle) -> Result<AcceptanceReport> {
    check_dims(state)?;
    let f = state.field();
    let lines = all_lines(f, state.d())?;
    let per_line: Vec<f64> = lines
        .par_iter()
        .map(|line| g.distribution(line).iter().map(|(p, gl)| p * line_overlap(state, line, gl)).sum())
        .collect();
    let n = geom::direction_count(f, state.d());
    let gamma = per_line.iter().sum::<f64>() / (f.order() * n) as f64;
    Ok(AcceptanceReport { gamma, method: Method::Exact, trials: None, stderr: None })
}

pub fn qldt_accept_sampled(state: &QuantumState, g: &dyn LineOracle, trials: usize, seed: u64) -> Result<AcceptanceReport> {
    check_dims(state)?;
    let est = stats::bernoulli(trials, seed, |rng| qldt_run_once(state, g, rng).expect("checked dimensions"));
    Ok(AcceptanceReport { gamma: est.p_hat, method: Method::MonteCarlo, trials: Some(trials), stderr: Some(est.stderr) })
}

/// Prob[f(z) = y] = (φ_{z,y}/φ_z)², uniform where φ_z = 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InducedProbFunction {
    pub dist: Vec<Vec<f64>>,
}

pub fn induced_f(state: &QuantumState) -> InducedProbFunction {
    let q = state.field().order();
    let dist = (0..state.num_points())
        .map(|z| {
            let mass = state.point_mass(z);
            let mut row = vec![0.0; q];
            if mass == 0.0 {
                row.iter_mut().for_each(|p| *p = 1.0 / q as f64);
            } else {
                for (y, a) in state.fiber(z) {
                    row[y.index()] += a.norm_sqr() / mass;
                }
            }
            row
        })
        .collect();
    InducedProbFunction { dist }
}

/// Both sides of Agr[f, G] ≥ (γ − 1/|F|)² for the induced f.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    pub gamma: f64,
    pub agr_fg: f64,
    pub bound_rhs: f64,
    /// `None` when γ < 1/|F| and the inequality asserts nothing.
    pub holds: Option<bool>,
}

pub fn agreement_lower_bound_check(state: &QuantumState, g: &dyn LineOracle) -> Result<LowerBoundReport> {
    if !g.is_deterministic() {
        return Err(param_err!("the agreement bound is stated for deterministic oracles"));
    }
    let gamma = qldt_accept_exact(state, g)?.gamma;
    let f = induced_f(state);
    let agr_fg = ScoreTable::new(state.field(), state.d(), g)?.agr_induced(&f);
    let inv_q = 1.0 / state.field().order() as f64;
    let bound_rhs = (gamma - inv_q).max(0.0).powi(2);
    let holds = (gamma >= inv_q).then_some(agr_fg + SLACK >= bound_rhs);
    Ok(LowerBoundReport { gamma, agr_fg, bound_rhs, holds })
}

/// Best deterministic rounding of the induced f: each f'(z) drawn from the
/// support of f(z). Agr is a sum of per-point terms, so the maximum is taken
/// pointwise.
pub fn best_selection(state: &QuantumState, scores: &ScoreTable) -> (Vec<Fe>, f64) {
    let f = induced_f(state);
    let values: Vec<Fe> = f
        .dist
        .iter()
        .enumerate()
        .map(|(z, row)| {
            let support = row.iter().enumerate().filter(|(_, &p)| p > 0.0).map(|(y, _)| Fe(y as u16));
            support
                .fold(None, |best: Option<Fe>, y| match best {
                    Some(b) if scores.score(z, b) >= scores.score(z, y) => Some(b),
                    _ => Some(y),
                })
                .expect("every distribution has support")
        })
        .collect();
    let agr = scores.agr_table(&values);
    (values, agr)
}

/// Monomials of total degree ≤ r with every exponent below |F|, in
/// lexicographic order of exponent vectors.
pub fn monomials(field: &Field, d: usize, r: usize) -> Vec<Vec<u16>> {
    let q = field.order();
    let mut out = Vec::new();
    let mut e = vec![0u16; d];
    loop {
        if e.iter().map(|&x| x as usize).sum::<usize>() <= r {
            out.push(e.clone());
        }
        // odometer, last coordinate fastest
        let mut i = d;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if (e[i] as usize) + 1 < q.min(r + 1) {
                e[i] += 1;
                break;
            }
            e[i] = 0;
        }
    }
}

/// Result of maximizing Agr[h, G] over polynomials of total degree ≤ r.
#[derive(Clone, Debug, PartialEq)]
pub struct BestH {
    pub h: MultiPoly,
    pub agr: f64,
    /// True when the optimum was certified without enumeration.
    pub certified: bool,
}

/// Maximizes Agr[h, G] over total degree ≤ r. If the pointwise argmax of the
/// score table is unique everywhere and itself has degree ≤ r, it is the
/// unique optimum. Otherwise all coefficient vectors are enumerated in
/// lexicographic order (monomials ordered by [`monomials`]) and the first
/// strict maximum is kept.
pub fn brute_force_best_h(field: &Field, d: usize, g: &dyn LineOracle, r: usize) -> Result<BestH> {
    let scores = ScoreTable::new(field, d, g)?;
    best_h_from_scores(field, d, &scores, r)
}

pub fn best_h_from_scores(field: &Field, d: usize, scores: &ScoreTable, r: usize) -> Result<BestH> {
    let (argmax, unique) = scores.pointwise_argmax();
    if unique {
        if let Ok(h) = fit_multivariate(field, d, &argmax, r)? {
            return Ok(BestH { h, agr: scores.agr_table(&argmax), certified: true });
        }
    }
    enumerate_best_h(field, d, scores, r)
}

/// Exhaustive search; ignores the certificate.
pub fn enumerate_best_h(field: &Field, d: usize, scores: &ScoreTable, r: usize) -> Result<BestH> {
    let q = field.order();
    let monos = monomials(field, d, r);
    let count = (q as u64).checked_pow(monos.len() as u32).filter(|&c| c <= BRUTE_FORCE_BUDGET);
    if count.is_none() {
        return Err(Error::Resource(format!(
            "{} monomials over GF({q}) exceed the brute-force budget",
            monos.len()
        )));
    }
    let points: Vec<Point> = geom::all_points(field, d)?.collect();
    let tables: Vec<Vec<Fe>> = monos
        .iter()
        .map(|e| {
            let m = MultiPoly::from_terms(field, d, [(e.clone(), Fe::ONE)]).expect("matching arity");
            points.iter().map(|z| m.eval(field, z)).collect()
        })
        .collect();
    let mut coeffs = vec![0usize; monos.len()];
    let mut values = vec![Fe::ZERO; points.len()];
    let mut best = (scores.agr_table(&values), coeffs.clone());
    loop {
        // odometer, last coefficient fastest, updating the value table incrementally
        let mut i = monos.len();
        loop {
            if i == 0 {
                let h = MultiPoly::from_terms(field, d, monos.iter().cloned().zip(best.1.iter().map(|&c| Fe(c as u16))))?;
                return Ok(BestH { h, agr: best.0, certified: false });
            }
            i -= 1;
            let old = coeffs[i];
            let new = (old + 1) % q;
            let delta = Fe((old ^ new) as u16);
            for (v, &m) in values.iter_mut().zip(&tables[i]) {
                *v = field.add(*v, field.mul(delta, m));
            }
            coeffs[i] = new;
            if new != 0 {
                break;
            }
        }
        let agr = scores.agr_table(&values);
        if agr > best.0 {
            best = (agr, coeffs.clone());
        }
    }
}

/// The lemma-level comparison γ⁴/50 (and γ⁴/32), reported and never asserted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgreementComparison {
    pub gamma: f64,
    pub best_agr: f64,
    pub gamma4_over_50: f64,
    pub gamma4_over_32: f64,
}

impl AgreementComparison {
    pub fn new(gamma: f64, best_agr: f64) -> Self {
        let g4 = gamma.powi(4);
        AgreementComparison { gamma, best_agr, gamma4_over_50: g4 / 50.0, gamma4_over_32: g4 / 32.0 }
    }
}

/// Report emitted by the `qldt` commands.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdtReport {
    pub gamma_exact: f64,
    pub gamma_sampled: Option<f64>,
    pub stderr: Option<f64>,
    #[serde(rename = "agr_fG")]
    pub agr_fg: Option<f64>,
    pub bound_rhs: Option<f64>,
    pub holds: Option<bool>,
}
