//! GAP(s, q, ε) instances, proofs made of a quantum state plus a block array,
//! and the one-query verifier that runs the low-degree test through a block.

use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param_err, Result};
use crate::geom::{
    self, all_lines, containing_subspaces, random_extension_to_dim, random_invertible_map, smallest_affine_containing,
    AffineSubspace, Line, Point,
};
use crate::gf::{Fe, Field};
use crate::ldt::{self, best_h_from_scores, LineOracle, ScoreTable};
use crate::mpoly::{fit_univariate, interpolate_lde, DataTable, LdeParams, MultiPoly, UniPoly};
use crate::qsim::{apply_linear_permutation, build_line_state, build_qlde_state, measure_prefix, projection_prob, QuantumState};

/// A predicate over the variables `vars`, listing its satisfying tuples.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Predicate {
    pub vars: Vec<usize>,
    pub sat: Vec<Vec<u16>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapInstance {
    pub m: usize,
    pub s: u32,
    pub q: usize,
    pub eps: f64,
    pub predicates: Vec<Predicate>,
}

impl GapInstance {
    pub fn k(&self) -> usize {
        self.predicates.len()
    }

    pub fn validate(&self, field: &Field) -> Result<()> {
        if self.q == 0 || self.predicates.is_empty() {
            return Err(param_err!("an instance needs q ≥ 1 and at least one predicate"));
        }
        if (1usize << self.s) > field.order() {
            return Err(param_err!("2^s = {} values do not embed in GF({})", 1usize << self.s, field.order()));
        }
        for (j, p) in self.predicates.iter().enumerate() {
            let distinct: BTreeSet<_> = p.vars.iter().collect();
            if p.vars.is_empty() || p.vars.len() > self.q || distinct.len() != p.vars.len() {
                return Err(param_err!("predicate {j} must read 1..={} distinct variables", self.q));
            }
            if p.vars.iter().any(|&v| v >= self.m) {
                return Err(param_err!("predicate {j} reads a variable outside 0..{}", self.m));
            }
            if p.sat.is_empty() {
                return Err(param_err!("predicate {j} has no satisfying assignment"));
            }
            if p.sat.iter().any(|t| t.len() != p.vars.len() || t.iter().any(|&v| (v as u64) >> self.s != 0)) {
                return Err(param_err!("predicate {j} lists a malformed tuple"));
            }
        }
        Ok(())
    }

    /// Whether field values for the predicate's variables satisfy it; values
    /// outside [0, 2^s) never do.
    pub fn satisfies(&self, j: usize, values: &[Fe]) -> bool {
        if values.iter().any(|v| (v.0 as u64) >> self.s != 0) {
            return false;
        }
        let tuple: Vec<u16> = values.iter().map(|v| v.0).collect();
        self.predicates[j].sat.contains(&tuple)
    }

    pub fn satisfied_fraction(&self, assignment: &[Fe]) -> f64 {
        let ok = (0..self.k())
            .filter(|&j| {
                let vals: Vec<Fe> = self.predicates[j].vars.iter().map(|&v| assignment[v]).collect();
                self.satisfies(j, &vals)
            })
            .count();
        ok as f64 / self.k() as f64
    }
}

/// Variables placed on H^d; τ_j and its padding to affine dimension q − 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Embedding {
    pub var_points: Vec<Point>,
    pub tau: Vec<Vec<Point>>,
    pub tau_hat: Vec<Vec<Point>>,
}

pub fn embed_variables(instance: &GapInstance, params: &LdeParams) -> Result<Embedding> {
    let f = &params.field;
    instance.validate(f)?;
    let n = params.domain_size()?;
    if instance.m > n {
        return Err(param_err!("m = {} variables exceed |H|^d = {n}", instance.m));
    }
    if params.d < instance.q + 1 {
        return Err(param_err!("d = {} leaves no room for (q+1)-dimensional blocks, q = {}", params.d, instance.q));
    }
    let var_points: Vec<Point> = (0..instance.m).map(|i| params.pi_inv(i)).collect::<Result<_>>()?;
    let tau: Vec<Vec<Point>> = instance
        .predicates
        .iter()
        .map(|p| p.vars.iter().map(|&v| var_points[v].clone()).collect())
        .collect();
    let target = instance.q - 1;
    let tau_hat = tau
        .iter()
        .map(|t| {
            let mut pts = t.clone();
            let mut dim = geom::affine_span(f, &pts)?.dim();
            for i in 0..n {
                if dim >= target {
                    break;
                }
                let cand = params.pi_inv(i)?;
                if pts.contains(&cand) {
                    continue;
                }
                pts.push(cand);
                let grown = geom::affine_span(f, &pts)?.dim();
                if grown > dim {
                    dim = grown;
                } else {
                    pts.pop();
                }
            }
            if dim != target {
                return Err(param_err!("H^d cannot pad a predicate to affine dimension {target}"));
            }
            Ok(pts)
        })
        .collect::<Result<_>>()?;
    Ok(Embedding { var_points, tau, tau_hat })
}

/// Address of a block: predicate index and canonical subspace.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BlockKey {
    pub j: usize,
    pub s: AffineSubspace,
}

/// The classical part of a proof, with a counter of block reads.
#[derive(Debug, Default)]
pub struct ProofBlocks {
    blocks: HashMap<BlockKey, MultiPoly>,
    reads: AtomicUsize,
}

impl Clone for ProofBlocks {
    fn clone(&self) -> Self {
        ProofBlocks { blocks: self.blocks.clone(), reads: AtomicUsize::new(0) }
    }
}

impl PartialEq for ProofBlocks {
    fn eq(&self, other: &Self) -> bool {
        self.blocks == other.blocks
    }
}

impl ProofBlocks {
    pub fn new() -> Self {
        ProofBlocks::default()
    }

    pub fn insert(&mut self, key: BlockKey, content: MultiPoly) {
        self.blocks.insert(key, content);
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &BlockKey> {
        self.blocks.keys()
    }

    /// Uninstrumented access for the prover and for exact analysis.
    pub fn peek(&self, key: &BlockKey) -> Option<&MultiPoly> {
        self.blocks.get(key)
    }

    /// The verifier's only access path; every call counts as one query.
    pub fn read(&self, key: &BlockKey) -> Option<&MultiPoly> {
        self.reads.fetch_add(1, Ordering::Relaxed);
        self.blocks.get(key)
    }

    pub fn reads(&self) -> usize {
        self.reads.load(Ordering::Relaxed)
    }

    pub fn map_contents(&self, mut f: impl FnMut(&BlockKey, &MultiPoly) -> MultiPoly) -> ProofBlocks {
        ProofBlocks { blocks: self.blocks.iter().map(|(k, v)| (k.clone(), f(k, v))).collect(), reads: AtomicUsize::new(0) }
    }
}

#[derive(Serialize, Deserialize)]
struct BlockEntry {
    j: usize,
    subspace: AffineSubspace,
    poly: MultiPoly,
}

impl Serialize for ProofBlocks {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut keys: Vec<&BlockKey> = self.blocks.keys().collect();
        keys.sort();
        s.collect_seq(keys.into_iter().map(|k| BlockEntry { j: k.j, subspace: k.s.clone(), poly: self.blocks[k].clone() }))
    }
}

impl<'de> Deserialize<'de> for ProofBlocks {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let entries: Vec<BlockEntry> = Vec::deserialize(d)?;
        let mut blocks = ProofBlocks::new();
        for e in entries {
            blocks.insert(BlockKey { j: e.j, s: e.subspace }, e.poly);
        }
        Ok(blocks)
    }
}

/// Everything the verifier derives from (instance, params, r).
#[derive(Clone, Debug)]
pub struct QpcpContext {
    pub instance: GapInstance,
    pub params: LdeParams,
    pub r: usize,
    pub embedding: Embedding,
}

impl QpcpContext {
    pub fn new(instance: &GapInstance, params: &LdeParams, r: usize) -> Result<Self> {
        let embedding = embed_variables(instance, params)?;
        Ok(QpcpContext { instance: instance.clone(), params: params.clone(), r, embedding })
    }

    fn field(&self) -> &Field {
        &self.params.field
    }

    fn block_dim(&self) -> usize {
        self.instance.q + 1
    }

    /// S(ℓ, τ̂_j), the smallest affine subspace containing both.
    pub fn span_with_line(&self, line: &Line, j: usize) -> AffineSubspace {
        smallest_affine_containing(self.field(), line, &self.embedding.tau_hat[j]).expect("τ̂_j is nonempty")
    }

    /// All (q+1)-dimensional subspaces containing τ̂_j.
    pub fn block_subspaces(&self, j: usize) -> Result<Vec<AffineSubspace>> {
        let span = geom::affine_span(self.field(), &self.embedding.tau_hat[j])?;
        containing_subspaces(self.field(), &span, self.block_dim())
    }

    /// Degree and predicate checks on a block.
    pub fn check_block(&self, j: usize, s: &AffineSubspace, block: Option<&MultiPoly>) -> Result<(), FailureStage> {
        let f = self.field();
        let block = block.ok_or(FailureStage::BlockDegree)?;
        if block.nvars() != s.dim() || block.total_degree() > self.r {
            return Err(FailureStage::BlockDegree);
        }
        let values: Vec<Fe> = self.embedding.tau[j]
            .iter()
            .map(|z| block.eval(f, &s.coords(f, z).expect("τ_j ⊂ S")))
            .collect();
        if self.instance.satisfies(j, &values) {
            Ok(())
        } else {
            Err(FailureStage::BlockPredicate)
        }
    }

    /// The block restricted to a line of S, in the line's own parameter.
    pub fn block_on_line(&self, block: &MultiPoly, s: &AffineSubspace, line: &Line) -> UniPoly {
        let f = self.field();
        let base = s.coords(f, &line.base).expect("line ⊂ S");
        let tip = s.coords(f, &line.at(f, Fe::ONE)).expect("line ⊂ S");
        let dir = geom::vadd(&tip, &base);
        block.restrict(f, &base, &[dir]).and_then(|p| p.to_univariate()).expect("matching arity")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureStage {
    None,
    BlockDegree,
    BlockPredicate,
    Projection,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Accept,
    Reject,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub outcome: Outcome,
    pub failure_stage: FailureStage,
    pub blocks_read: usize,
}

fn assignment_table(ctx: &QpcpContext, assignment: &[u16]) -> Result<DataTable> {
    let inst = &ctx.instance;
    if assignment.len() != inst.m {
        return Err(param_err!("assignment has {} values for {} variables", assignment.len(), inst.m));
    }
    if assignment.iter().any(|&v| (v as u64) >> inst.s != 0) {
        return Err(param_err!("assignment value outside [0, 2^s)"));
    }
    let n = ctx.params.domain_size()?;
    let mut values = vec![Fe::ZERO; n];
    for (i, &v) in assignment.iter().enumerate() {
        values[i] = Fe(v);
    }
    DataTable::new(&ctx.params, values)
}

/// The qlde state of the assignment together with Ã|_S for every block
/// address, whether or not the assignment satisfies the instance.
pub fn build_formatted_proof(
    instance: &GapInstance,
    assignment: &[u16],
    params: &LdeParams,
    r: usize,
) -> Result<(QuantumState, ProofBlocks)> {
    let ctx = QpcpContext::new(instance, params, r)?;
    let data = assignment_table(&ctx, assignment)?;
    let lde = interpolate_lde(params, &data)?;
    let state = build_qlde_state(params, &data)?;
    let f = &params.field;
    let mut blocks = ProofBlocks::new();
    for j in 0..instance.k() {
        for s in ctx.block_subspaces(j)? {
            let content = lde.restrict_to_subspace(f, &s)?;
            blocks.insert(BlockKey { j, s }, content);
        }
    }
    Ok((state, blocks))
}

/// Like [`build_formatted_proof`], refusing assignments that leave a predicate unsatisfied.
pub fn build_correct_proof(
    instance: &GapInstance,
    assignment: &[u16],
    params: &LdeParams,
    r: usize,
) -> Result<(QuantumState, ProofBlocks)> {
    let values: Vec<Fe> = assignment.iter().map(|&v| Fe(v)).collect();
    if assignment.len() == instance.m && instance.satisfied_fraction(&values) < 1.0 {
        return Err(param_err!("the assignment does not satisfy every predicate"));
    }
    build_formatted_proof(instance, assignment, params, r)
}

/// One run of the verifier: Step I, one block read, Step II.
pub fn verify_once(
    ctx: &QpcpContext,
    state: &QuantumState,
    blocks: &ProofBlocks,
    rng: &mut impl Rng,
) -> Result<VerdictReport> {
    let f = ctx.field();
    if state.field() != f || state.d() != ctx.params.d {
        return Err(param_err!("state does not live in F^d × F for the instance's parameters"));
    }
    let e = random_invertible_map(f, state.d(), rng);
    let moved = apply_linear_permutation(state, &e)?;
    let outcome = measure_prefix(&moved, &e, rng)?;
    let line = outcome.line.canonical(f);
    let j = rng.gen_range(0..ctx.instance.k());
    let span = ctx.span_with_line(&line, j);
    let s = if span.dim() == ctx.block_dim() { span } else { random_extension_to_dim(f, &span, ctx.block_dim(), rng)? };
    let s = s.canonical(f);
    let key = BlockKey { j, s };
    let block = blocks.read(&key);
    let reject = |stage| VerdictReport { outcome: Outcome::Reject, failure_stage: stage, blocks_read: 1 };
    if let Err(stage) = ctx.check_block(j, &key.s, block) {
        return Ok(reject(stage));
    }
    let g = ctx.block_on_line(block.expect("checked"), &key.s, &line);
    let (mu, lambda) = outcome.line.reparam_to(f, &line).expect("same point set");
    let e1 = build_line_state(&g.compose_affine(f, mu, lambda), f);
    if rng.gen::<f64>() < projection_prob(&outcome.collapsed, &e1) {
        Ok(VerdictReport { outcome: Outcome::Accept, failure_stage: FailureStage::None, blocks_read: 1 })
    } else {
        Ok(reject(FailureStage::Projection))
    }
}

/// A checked block as a value table over S, indexed by the row-major index of
/// the canonical coordinates; `None` when the block fails its checks.
type BlockTable = Option<Arc<Vec<Fe>>>;

/// Exact analysis of a fixed proof: the (j, S) randomness as a randomized line oracle.
pub struct ProofOracle<'a> {
    ctx: &'a QpcpContext,
    tables: HashMap<BlockKey, BlockTable>,
    extensions: Mutex<HashMap<AffineSubspace, Arc<Vec<AffineSubspace>>>>,
}

impl<'a> ProofOracle<'a> {
    pub fn new(ctx: &'a QpcpContext, blocks: &ProofBlocks) -> Result<Self> {
        let f = ctx.field();
        let keys: Vec<&BlockKey> = blocks.keys().collect();
        let tables = keys
            .par_iter()
            .map(|&key| {
                let block = blocks.peek(key);
                let table = match ctx.check_block(key.j, &key.s, block) {
                    Ok(()) => {
                        let block = block.expect("checked");
                        let k = key.s.dim();
                        let n = geom::space_size(f, k)?;
                        Some(Arc::new((0..n).map(|i| block.eval(f, &geom::point_at(f.order(), k, i))).collect()))
                    }
                    Err(_) => None,
                };
                Ok((key.clone(), table))
            })
            .collect::<Result<HashMap<_, _>>>()?;
        Ok(ProofOracle { ctx, tables, extensions: Mutex::new(HashMap::new()) })
    }

    /// The subspaces S the verifier may read for (ℓ, j), all equally likely.
    pub fn candidates(&self, line: &Line, j: usize) -> Arc<Vec<AffineSubspace>> {
        let f = self.ctx.field();
        let span = self.ctx.span_with_line(line, j);
        if span.dim() == self.ctx.block_dim() {
            return Arc::new(vec![span.canonical(f)]);
        }
        let key = span.canonical(f);
        if let Some(v) = self.extensions.lock().expect("no poisoning").get(&key) {
            return v.clone();
        }
        let ext = Arc::new(containing_subspaces(f, &key, self.ctx.block_dim()).expect("enumerable at desk scale"));
        self.extensions.lock().expect("no poisoning").insert(key, ext.clone());
        ext
    }

    /// (probability, values of g_ℓ at t = 0..|F|−1) for every passing branch.
    pub fn line_values(&self, line: &Line) -> Vec<(f64, Vec<Fe>)> {
        let f = self.ctx.field();
        let q = f.order();
        let k = self.ctx.instance.k();
        let pts = line.points(f);
        let mut out = Vec::new();
        for j in 0..k {
            let cands = self.candidates(line, j);
            let w = 1.0 / (k * cands.len()) as f64;
            for s in cands.iter() {
                let key = BlockKey { j, s: s.clone() };
                if let Some(Some(table)) = self.tables.get(&key) {
                    let vals = pts.iter().map(|z| table[geom::point_index(q, &s.coords(f, z).expect("ℓ ⊂ S"))]).collect();
                    out.push((w, vals));
                }
            }
        }
        out
    }
}

impl LineOracle for ProofOracle<'_> {
    fn degree_bound(&self) -> usize {
        self.ctx.r
    }

    fn distribution(&self, line: &Line) -> Vec<(f64, UniPoly)> {
        let f = self.ctx.field();
        self.line_values(line)
            .into_iter()
            .map(|(p, vals)| {
                let g = fit_univariate(f, &vals, self.ctx.r).expect("full table").expect("restriction of a checked block");
                (p, g)
            })
            .collect()
    }
}

/// γ = Σ_ℓ (|F|·N)^{−1} E_{j,S}[checks pass · |Σ_{z∈ℓ} φ_{z,g(z)}|²].
pub fn accept_prob_exact(ctx: &QpcpContext, state: &QuantumState, blocks: &ProofBlocks) -> Result<f64> {
    let f = ctx.field();
    let oracle = ProofOracle::new(ctx, blocks)?;
    let q = f.order();
    let lines = all_lines(f, ctx.params.d)?;
    let per_line: Vec<f64> = lines
        .par_iter()
        .map(|line| {
            let idx: Vec<usize> = line.points(f).iter().map(|z| geom::point_index(q, z)).collect();
            oracle
                .line_values(line)
                .iter()
                .map(|(p, vals)| p * idx.iter().zip(vals).map(|(&z, &y)| state.amp(z, y)).sum::<Complex64>().norm_sqr())
                .sum()
        })
        .collect();
    Ok(per_line.iter().sum::<f64>() / (q * geom::direction_count(f, ctx.params.d)) as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodeReport {
    pub assignment: Vec<Fe>,
    pub satisfied_fraction: f64,
    pub best_agr: f64,
    pub certified: bool,
    pub gamma: f64,
    pub gamma4_over_100: f64,
    /// Whether the γ⁴/100 comparison is asserted (its hypothesis has an unspecified constant).
    pub asserted: bool,
    pub holds: bool,
}

/// Finds the best low-degree h against the proof's line oracle and decodes
/// a_i = h(π⁻¹(i)).
pub fn decode_and_score(
    ctx: &QpcpContext,
    state: &QuantumState,
    blocks: &ProofBlocks,
    assert_lemma: bool,
) -> Result<DecodeReport> {
    let f = ctx.field();
    let oracle = ProofOracle::new(ctx, blocks)?;
    let scores = ScoreTable::new(f, ctx.params.d, &oracle)?;
    let best = best_h_from_scores(f, ctx.params.d, &scores, ctx.r)?;
    let assignment: Vec<Fe> = ctx.embedding.var_points.iter().map(|z| best.h.eval(f, z)).collect();
    let satisfied_fraction = ctx.instance.satisfied_fraction(&assignment);
    let gamma = accept_prob_exact(ctx, state, blocks)?;
    let gamma4_over_100 = gamma.powi(4) / 100.0;
    Ok(DecodeReport {
        assignment,
        satisfied_fraction,
        best_agr: best.agr,
        certified: best.certified,
        gamma,
        gamma4_over_100,
        asserted: assert_lemma,
        holds: satisfied_fraction + ldt::SLACK >= gamma4_over_100,
    })
}

/// A random instance with a planted satisfying assignment and distinct t_j.
pub fn planted_instance(m: usize, q: usize, s: u32, k: usize, rng: &mut impl Rng) -> Result<(GapInstance, Vec<u16>)> {
    if m == 0 || q == 0 {
        return Err(param_err!("need m ≥ 1 and q ≥ 1"));
    }
    let vals = 1u16 << s;
    let planted: Vec<u16> = (0..m).map(|_| rng.gen_range(0..vals)).collect();
    let mut seen = BTreeSet::new();
    let mut predicates = Vec::new();
    let mut attempts = 0;
    while predicates.len() < k {
        attempts += 1;
        if attempts > 10_000 {
            return Err(param_err!("cannot draw {k} distinct variable sets from m = {m}, q = {q}"));
        }
        let arity = rng.gen_range(1..=q.min(m));
        let mut vars: Vec<usize> = (0..m).collect();
        vars.shuffle(rng);
        vars.truncate(arity);
        vars.sort_unstable();
        if !seen.insert(vars.clone()) {
            continue;
        }
        let mut sat: Vec<Vec<u16>> = vec![vars.iter().map(|&v| planted[v]).collect()];
        for code in 0..(vals as usize).pow(arity as u32) {
            let tuple: Vec<u16> = (0..arity).map(|i| ((code >> (i * s as usize)) as u16) & (vals - 1)).collect();
            if tuple != sat[0] && rng.gen_bool(0.5) {
                sat.push(tuple);
            }
        }
        sat.sort();
        predicates.push(Predicate { vars, sat });
    }
    Ok((GapInstance { m, s, q, eps: 1.0, predicates }, planted))
}

/// Y₀ = Y₁ ∧ Y₀ ≠ Y₁ over bits: every assignment satisfies exactly half.
pub fn gap_unsat_instance() -> GapInstance {
    GapInstance {
        m: 2,
        s: 1,
        q: 2,
        eps: 0.5,
        predicates: vec![
            Predicate { vars: vec![0, 1], sat: vec![vec![0, 0], vec![1, 1]] },
            Predicate { vars: vec![0, 1], sat: vec![vec![0, 1], vec![1, 0]] },
        ],
    }
}

/// Line counts behind the decoding argument, for one τ̂.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineRatioReport {
    pub lines: usize,
    /// Lines ℓ with dim S(ℓ, τ̂) = q + 1.
    pub l_prime: usize,
    /// Minimum over S ⊇ τ̂ of |L'_S| / |L_S|.
    pub min_subspace_ratio: f64,
    pub subspaces: usize,
}

impl LineRatioReport {
    pub fn ratio(&self) -> f64 {
        self.l_prime as f64 / self.lines as f64
    }
}

/// Exhaustive counts of L' and L'_S for a point set τ̂ of affine dimension q − 1.
pub fn line_ratio_facts(field: &Field, d: usize, tau_hat: &[Point], q: usize) -> Result<LineRatioReport> {
    let span = geom::affine_span(field, tau_hat)?;
    if span.dim() + 1 != q {
        return Err(param_err!("τ̂ spans dimension {}, expected q − 1 = {}", span.dim(), q as isize - 1));
    }
    let lines = all_lines(field, d)?;
    let spans: Vec<AffineSubspace> = lines
        .iter()
        .map(|l| smallest_affine_containing(field, l, tau_hat).map(|s| s.canonical(field)))
        .collect::<Result<_>>()?;
    let l_prime = spans.iter().filter(|s| s.dim() == q + 1).count();
    let subspaces = containing_subspaces(field, &span, q + 1)?;
    let mut min_ratio = f64::INFINITY;
    for s in &subspaces {
        let in_s: Vec<usize> = (0..lines.len()).filter(|&i| s.contains_subspace(field, &lines[i].as_subspace())).collect();
        let prime = in_s.iter().filter(|&&i| spans[i] == *s).count();
        min_ratio = min_ratio.min(prime as f64 / in_s.len() as f64);
    }
    Ok(LineRatioReport { lines: lines.len(), l_prime, min_subspace_ratio: min_ratio, subspaces: subspaces.len() })
}

/// Serialized proof: state and blocks with the parameters needed to check them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProofFile {
    pub params: LdeParams,
    pub r: usize,
    pub state: QuantumState,
    pub blocks: ProofBlocks,
}
