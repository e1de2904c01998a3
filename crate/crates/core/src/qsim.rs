//! Register-level simulation of pure states in C^{|F|^{d+1}}.
//!
//! Basis vectors are |z_1⟩…|z_d⟩|y⟩ with index `point_index(z)·|F| + y`, so
//! the d−1 leading registers select a contiguous block of |F|² amplitudes.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param_err, Error, Result};
use crate::geom::{self, LinearMap, Line, Point};
use crate::gf::{Fe, Field};
use crate::mpoly::{interpolate_lde, DataTable, LdeParams, MultiPoly, UniPoly};

/// Tolerance on unit norm.
pub const NORM_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
enum Amplitudes {
    /// One basis vector per z: amplitude `amps[z]` at `(z, ys[z])`.
    Sparse { ys: Vec<Fe>, amps: Vec<Complex64> },
    Dense(Vec<Complex64>),
}

/// A normalized pure state φ_{z,y} over F^d × F.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "StateFile", try_from = "StateFile")]
pub struct QuantumState {
    field: Field,
    d: usize,
    amps: Amplitudes,
}

impl QuantumState {
    fn check_norm(&self) -> Result<()> {
        let n = self.norm_sqr();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(param_err!("state has squared norm {n}, expected 1"));
        }
        Ok(())
    }

    /// Sparse state with amplitude `amps[z]` at `(z, ys[z])` for every z ∈ F^d.
    pub fn sparse(field: Field, d: usize, ys: Vec<Fe>, amps: Vec<Complex64>) -> Result<Self> {
        let n = geom::space_size(&field, d)?;
        if ys.len() != n || amps.len() != n {
            return Err(param_err!("sparse state needs {n} entries"));
        }
        if ys.iter().any(|&y| !field.contains(y)) {
            return Err(param_err!("register value outside the field"));
        }
        let s = QuantumState { field, d, amps: Amplitudes::Sparse { ys, amps } };
        s.check_norm()?;
        Ok(s)
    }

    pub fn dense(field: Field, d: usize, amps: Vec<Complex64>) -> Result<Self> {
        let n = geom::space_size(&field, d)?
            .checked_mul(field.order())
            .filter(|&n| n <= geom::ENUMERATION_BUDGET)
            .ok_or_else(|| Error::Resource("dense state too large".into()))?;
        if amps.len() != n {
            return Err(param_err!("dense state needs {n} amplitudes, got {}", amps.len()));
        }
        let s = QuantumState { field, d, amps: Amplitudes::Dense(amps) };
        s.check_norm()?;
        Ok(s)
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn dense_normalized(field: Field, d: usize, mut amps: Vec<Complex64>) -> Result<Self> {
        let n: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if n == 0.0 {
            return Err(param_err!("cannot normalize the zero vector"));
        }
        let s = n.sqrt();
        amps.iter_mut().for_each(|a| *a /= s);
        QuantumState::dense(field, d, amps)
    }

    /// The single basis vector |z⟩|y⟩.
    pub fn basis(field: Field, d: usize, z: &[Fe], y: Fe) -> Result<Self> {
        let n = geom::space_size(&field, d)?;
        if z.len() != d || z.iter().chain([&y]).any(|&x| !field.contains(x)) {
            return Err(param_err!("basis label outside F^d × F"));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); n];
        amps[geom::point_index(field.order(), z)] = Complex64::new(1.0, 0.0);
        let mut ys = vec![Fe::ZERO; n];
        ys[geom::point_index(field.order(), z)] = y;
        QuantumState::sparse(field, d, ys, amps)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.amps, Amplitudes::Sparse { .. })
    }

    pub fn num_points(&self) -> usize {
        self.field.order().pow(self.d as u32)
    }

    /// φ_{z,y} with z given by its index.
    pub fn amp(&self, z: usize, y: Fe) -> Complex64 {
        match &self.amps {
            Amplitudes::Sparse { ys, amps } => {
                if ys[z] == y {
                    amps[z]
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            Amplitudes::Dense(v) => v[z * self.field.order() + y.index()],
        }
    }

    pub fn amp_at(&self, z: &[Fe], y: Fe) -> Complex64 {
        self.amp(geom::point_index(self.field.order(), z), y)
    }

    /// Nonzero-or-stored entries (y, φ_{z,y}) of the fiber over z.
    pub fn fiber(&self, z: usize) -> Vec<(Fe, Complex64)> {
        match &self.amps {
            Amplitudes::Sparse { ys, amps } => vec![(ys[z], amps[z])],
            Amplitudes::Dense(v) => {
                let q = self.field.order();
                (0..q).map(|y| (Fe(y as u16), v[z * q + y])).collect()
            }
        }
    }

    /// φ_z² = Σ_y |φ_{z,y}|².
    pub fn point_mass(&self, z: usize) -> f64 {
        self.fiber(z).iter().map(|(_, a)| a.norm_sqr()).sum()
    }

    /// φ_ℓ² = Σ_{z∈ℓ} φ_z².
    pub fn line_mass(&self, line: &Line) -> f64 {
        line.points(&self.field)
            .iter()
            .map(|z| self.point_mass(geom::point_index(self.field.order(), z)))
            .sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        (0..self.num_points()).map(|z| self.point_mass(z)).sum()
    }

    /// Dense amplitude table in basis-index order.
    pub fn to_dense_vec(&self) -> Vec<Complex64> {
        let q = self.field.order();
        let mut out = vec![Complex64::new(0.0, 0.0); self.num_points() * q];
        for z in 0..self.num_points() {
            for (y, a) in self.fiber(z) {
                out[z * q + y.index()] += a;
            }
        }
        out
    }

    fn map_points(&self, perm: impl Fn(usize) -> usize) -> QuantumState {
        let amps = match &self.amps {
            Amplitudes::Sparse { ys, amps } => {
                let mut ys2 = vec![Fe::ZERO; ys.len()];
                let mut amps2 = vec![Complex64::new(0.0, 0.0); amps.len()];
                for z in 0..ys.len() {
                    ys2[perm(z)] = ys[z];
                    amps2[perm(z)] = amps[z];
                }
                Amplitudes::Sparse { ys: ys2, amps: amps2 }
            }
            Amplitudes::Dense(v) => {
                let q = self.field.order();
                let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
                for z in 0..self.num_points() {
                    let t = perm(z);
                    out[t * q..(t + 1) * q].copy_from_slice(&v[z * q..(z + 1) * q]);
                }
                Amplitudes::Dense(out)
            }
        };
        QuantumState { field: self.field.clone(), d: self.d, amps }
    }

    /// |z⟩|y⟩ ↦ |z⟩|y + c⟩.
    pub fn shift_y(&self, c: Fe) -> QuantumState {
        let q = self.field.order();
        let amps = match &self.amps {
            Amplitudes::Sparse { ys, amps } => Amplitudes::Sparse {
                ys: ys.iter().map(|&y| self.field.add(y, c)).collect(),
                amps: amps.clone(),
            },
            Amplitudes::Dense(v) => {
                let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
                for z in 0..self.num_points() {
                    for y in 0..q {
                        out[z * q + (y ^ c.index())] = v[z * q + y];
                    }
                }
                Amplitudes::Dense(out)
            }
        };
        QuantumState { field: self.field.clone(), d: self.d, amps }
    }
}

/// The quantum low-degree extension |F|^{−d/2} Σ_z |z⟩|p(z)⟩.
pub fn qlde_state_from_poly(field: &Field, d: usize, p: &MultiPoly) -> Result<QuantumState> {
    if p.nvars() != d {
        return Err(param_err!("polynomial has {} variables, state has {d}", p.nvars()));
    }
    let n = geom::space_size(field, d)?;
    let ys = geom::all_points(field, d)?.map(|z| p.eval(field, &z)).collect();
    let amp = Complex64::new((n as f64).sqrt().recip(), 0.0);
    QuantumState::sparse(field.clone(), d, ys, vec![amp; n])
}

pub fn build_qlde_state(params: &LdeParams, data: &DataTable) -> Result<QuantumState> {
    geom::space_size(&params.field, params.d)?;
    let lde = interpolate_lde(params, data)?;
    qlde_state_from_poly(&params.field, params.d, &lde)
}

/// Samples an index with probability `weights[i] / Σ weights`.
fn sample_index(weights: impl Iterator<Item = f64> + Clone, rng: &mut impl Rng) -> usize {
    let total: f64 = weights.clone().sum();
    let mut x = rng.gen::<f64>() * total;
    let mut last_nonzero = 0;
    for (i, w) in weights.enumerate() {
        if w > 0.0 {
            last_nonzero = i;
            if x < w {
                return i;
            }
            x -= w;
        }
    }
    last_nonzero
}

/// Full measurement; returns (z, y) with probability |φ_{z,y}|².
pub fn measure_all(state: &QuantumState, rng: &mut impl Rng) -> (Point, Fe) {
    let q = state.field.order();
    let z = sample_index((0..state.num_points()).map(|z| state.point_mass(z)), rng);
    let fiber = state.fiber(z);
    let k = sample_index(fiber.iter().map(|(_, a)| a.norm_sqr()), rng);
    (geom::point_at(q, state.d, z), fiber[k].0)
}

/// U_E: |z⟩|y⟩ ↦ |E(z)⟩|y⟩.
pub fn apply_linear_permutation(state: &QuantumState, e: &LinearMap) -> Result<QuantumState> {
    let f = &state.field;
    if e.d != state.d {
        return Err(param_err!("map acts on F^{}, state lives on F^{}", e.d, state.d));
    }
    if !e.is_invertible(f) {
        return Err(param_err!("U_E requires an invertible map"));
    }
    let q = f.order();
    let d = state.d;
    Ok(state.map_points(|z| geom::point_index(q, &e.apply(f, &geom::point_at(q, d, z)))))
}

/// A normalized state in C^{|F|} ⊗ C^{|F|}, index `t·|F| + y`.
#[derive(Clone, Debug, PartialEq)]
pub struct LineState {
    q: usize,
    amps: Vec<Complex64>,
}

impl LineState {
    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amp(&self, t: Fe, y: Fe) -> Complex64 {
        self.amps[t.index() * self.q + y.index()]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// |e₁⟩ = |F|^{−1/2} Σ_t |t⟩|g(t)⟩.
pub fn build_line_state(g: &UniPoly, field: &Field) -> LineState {
    let q = field.order();
    let mut amps = vec![Complex64::new(0.0, 0.0); q * q];
    let a = (q as f64).sqrt().recip();
    for t in field.enumerate() {
        amps[t.index() * q + g.eval(field, t).index()] = Complex64::new(a, 0.0);
    }
    LineState { q, amps }
}

/// |⟨e₁|φ⟩|², the probability of outcome e₁ in any orthonormal basis containing it.
pub fn projection_prob(phi: &LineState, e1: &LineState) -> f64 {
    debug_assert_eq!(phi.q, e1.q);
    let ip: Complex64 = e1.amps.iter().zip(&phi.amps).map(|(a, b)| a.conj() * b).sum();
    ip.norm_sqr().min(1.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrefixOutcome {
    pub b: Vec<Fe>,
    /// Probability of observing `b`.
    pub prob: f64,
    /// Collapsed state, t indexing the last register of E(z).
    pub collapsed: LineState,
    /// Line z(t) = E⁻¹(b, t) with base u = E⁻¹(b,0) and u + dir = E⁻¹(b,1).
    pub line: Line,
}

fn prefix_outcome(state: &QuantumState, e_inv: &LinearMap, block: usize, prob: f64) -> PrefixOutcome {
    let f = &state.field;
    let q = f.order();
    let norm = prob.sqrt();
    let mut amps = vec![Complex64::new(0.0, 0.0); q * q];
    for t in 0..q {
        for (y, a) in state.fiber(block * q + t) {
            amps[t * q + y.index()] = a / norm;
        }
    }
    let b = geom::point_at(q, state.d - 1, block);
    let (u, v) = geom::line_from_prefix_with_inverse(f, e_inv, &b);
    let dir = geom::vadd(&v, &u);
    let line = Line::new(u, dir).expect("E is invertible, so u ≠ v");
    PrefixOutcome { b, prob, collapsed: LineState { q, amps }, line }
}

fn block_masses(state: &QuantumState) -> Vec<f64> {
    let q = state.field.order();
    (0..state.num_points() / q)
        .map(|b| (0..q).map(|t| state.point_mass(b * q + t)).sum())
        .collect()
}

/// Measures the first d−1 registers of `state`, which is assumed to be U_E|Φ⟩.
pub fn measure_prefix(state: &QuantumState, e: &LinearMap, rng: &mut impl Rng) -> Result<PrefixOutcome> {
    let e_inv = prefix_checks(state, e)?;
    let masses = block_masses(state);
    let block = sample_index(masses.iter().copied(), rng);
    Ok(prefix_outcome(state, &e_inv, block, masses[block]))
}

/// Every prefix outcome of positive probability.
pub fn prefix_outcomes(state: &QuantumState, e: &LinearMap) -> Result<Vec<PrefixOutcome>> {
    let e_inv = prefix_checks(state, e)?;
    Ok(block_masses(state)
        .into_iter()
        .enumerate()
        .filter(|&(_, m)| m > 0.0)
        .map(|(block, m)| prefix_outcome(state, &e_inv, block, m))
        .collect())
}

fn prefix_checks(state: &QuantumState, e: &LinearMap) -> Result<LinearMap> {
    if state.d < 2 {
        return Err(param_err!("prefix measurement needs d ≥ 2"));
    }
    if e.d != state.d {
        return Err(param_err!("map acts on F^{}, state lives on F^{}", e.d, state.d));
    }
    e.inverse(&state.field)
}

/// Uniformly random amplitudes in the unit square, normalized; complex when asked.
pub fn random_dense_state(field: &Field, d: usize, complex: bool, rng: &mut impl Rng) -> Result<QuantumState> {
    let n = geom::space_size(field, d)? * field.order();
    let amps = (0..n)
        .map(|_| {
            let re = rng.gen_range(-1.0..1.0);
            let im = if complex { rng.gen_range(-1.0..1.0) } else { 0.0 };
            Complex64::new(re, im)
        })
        .collect();
    QuantumState::dense_normalized(field.clone(), d, amps)
}

/// Normalized superposition α|a⟩ + β|b⟩.
pub fn superpose(a: &QuantumState, alpha: Complex64, b: &QuantumState, beta: Complex64) -> Result<QuantumState> {
    if a.field != b.field || a.d != b.d {
        return Err(param_err!("states live in different spaces"));
    }
    let amps = a.to_dense_vec().into_iter().zip(b.to_dense_vec()).map(|(x, y)| alpha * x + beta * y).collect();
    QuantumState::dense_normalized(a.field.clone(), a.d, amps)
}

/// Wire format: a list of (z, y, re, im) entries; `sparse` marks qlde-form states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub field: Field,
    pub d: usize,
    pub sparse: bool,
    pub entries: Vec<(Point, Fe, f64, f64)>,
}

impl From<QuantumState> for StateFile {
    fn from(s: QuantumState) -> Self {
        let q = s.field.order();
        let mut entries = Vec::new();
        for z in 0..s.num_points() {
            for (y, a) in s.fiber(z) {
                if s.is_sparse() || a.norm_sqr() > 0.0 {
                    entries.push((geom::point_at(q, s.d, z), y, a.re, a.im));
                }
            }
        }
        StateFile { field: s.field.clone(), d: s.d, sparse: s.is_sparse(), entries }
    }
}

impl TryFrom<StateFile> for QuantumState {
    type Error = Error;

    fn try_from(file: StateFile) -> Result<Self> {
        let f = file.field;
        let q = f.order();
        let n = geom::space_size(&f, file.d)?;
        let index = |z: &Point| -> Result<usize> {
            if z.len() != file.d || z.iter().any(|&x| !f.contains(x)) {
                return Err(param_err!("state entry outside F^d"));
            }
            Ok(geom::point_index(q, z))
        };
        if file.sparse {
            let mut ys = vec![Fe::ZERO; n];
            let mut amps = vec![Complex64::new(0.0, 0.0); n];
            let mut seen = vec![false; n];
            for (z, y, re, im) in &file.entries {
                let i = index(z)?;
                if std::mem::replace(&mut seen[i], true) {
                    return Err(param_err!("sparse state repeats a point"));
                }
                ys[i] = *y;
                amps[i] = Complex64::new(*re, *im);
            }
            QuantumState::sparse(f, file.d, ys, amps)
        } else {
            let mut amps = vec![Complex64::new(0.0, 0.0); n * q];
            for (z, y, re, im) in &file.entries {
                if !f.contains(*y) {
                    return Err(param_err!("register value outside the field"));
                }
                amps[index(z)? * q + y.index()] += Complex64::new(*re, *im);
            }
            QuantumState::dense(f, file.d, amps)
        }
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::geom::random_invertible_map;

    fn gf(a: u32) -> Field {
        Field::with_degree(a).unwrap()
    }

    fn sample_lde(field: &Field, h: usize, seed: u64) -> (LdeParams, MultiPoly, QuantumState) {
        let params = LdeParams::new(field.clone(), 2, h).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = params.domain_size().unwrap();
        let data = DataTable::new(&params, (0..n).map(|_| Fe(rng.gen_range(0..field.order() as u16))).collect()).unwrap();
        let lde = interpolate_lde(&params, &data).unwrap();
        let state = build_qlde_state(&params, &data).unwrap();
        (params, lde, state)
    }

    #[test]
    fn qlde_state_shape() {
        let f = gf(2);
        let (_, lde, s) = sample_lde(&f, 2, 1);
        assert!(s.is_sparse());
        for z in geom::all_points(&f, 2).unwrap() {
            for y in f.enumerate() {
                let a = s.amp_at(&z, y);
                if y == lde.eval(&f, &z) {
                    assert!((a.re - 0.25).abs() < 1e-15 && a.im == 0.0);
                } else {
                    assert_eq!(a.norm_sqr(), 0.0);
                }
            }
        }
        assert!((s.norm_sqr() - 1.0).abs() < NORM_TOL);

        let params = LdeParams::new(f.clone(), 2, 2).unwrap();
        let zero = build_qlde_state(&params, &DataTable::new(&params, vec![Fe::ZERO; 4]).unwrap()).unwrap();
        assert!((0..16).all(|z| zero.fiber(z)[0].0 == Fe::ZERO));
    }

    #[test]
    fn measure_all_follows_support_and_born_rule() {
        let f = gf(2);
        let (_, lde, s) = sample_lde(&f, 3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let (z, y) = measure_all(&s, &mut rng);
            assert_eq!(y, lde.eval(&f, &z));
        }

        let dense = random_dense_state(&f, 2, true, &mut rng).unwrap();
        let probs: Vec<f64> = dense.to_dense_vec().iter().map(|a| a.norm_sqr()).collect();
        let n = 100_000;
        let mut counts = vec![0usize; probs.len()];
        for _ in 0..n {
            let (z, y) = measure_all(&dense, &mut rng);
            counts[geom::point_index(4, &z) * 4 + y.index()] += 1;
        }
        for (c, p) in counts.iter().zip(&probs) {
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!((*c as f64 / n as f64 - p).abs() <= 4.0 * sigma + 1e-12);
        }
    }

    #[test]
    fn permutation_round_trip_is_exact() {
        let f = gf(2);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (_, _, sparse) = sample_lde(&f, 2, 5);
        let dense = random_dense_state(&f, 2, true, &mut rng).unwrap();
        for s in [sparse, dense] {
            assert_eq!(apply_linear_permutation(&s, &LinearMap::identity(2)).unwrap(), s);
            for _ in 0..20 {
                let e = random_invertible_map(&f, 2, &mut rng);
                let moved = apply_linear_permutation(&s, &e).unwrap();
                assert!((moved.norm_sqr() - s.norm_sqr()).abs() < NORM_TOL);
                let back = apply_linear_permutation(&moved, &e.inverse(&f).unwrap()).unwrap();
                assert_eq!(back, s);
            }
        }
        let singular = LinearMap::from_rows(&[vec![Fe(1), Fe(1)], vec![Fe(1), Fe(1)]]).unwrap();
        assert!(apply_linear_permutation(&random_dense_state(&f, 2, false, &mut rng).unwrap(), &singular).is_err());
    }

    #[test]
    fn prefix_collapse_of_qlde_state_is_the_line_state() {
        let f = gf(2);
        let (_, lde, s) = sample_lde(&f, 3, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let e = random_invertible_map(&f, 2, &mut rng);
            let ue = apply_linear_permutation(&s, &e).unwrap();
            let outcomes = prefix_outcomes(&ue, &e).unwrap();
            assert_eq!(outcomes.len(), 4);
            assert!((outcomes.iter().map(|o| o.prob).sum::<f64>() - 1.0).abs() < NORM_TOL);
            for o in outcomes {
                let g = lde.restrict_to_subspace(&f, &o.line.as_subspace()).unwrap().to_univariate().unwrap();
                let expected = build_line_state(&g, &f);
                assert!((o.collapsed.norm_sqr() - 1.0).abs() < NORM_TOL);
                for (a, b) in o.collapsed.amps().iter().zip(expected.amps()) {
                    assert!((a - b).norm() < 1e-12);
                }
                assert!((projection_prob(&o.collapsed, &expected) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn prefix_of_basis_state_is_deterministic() {
        let f = gf(2);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let z0 = vec![Fe(2), Fe(3)];
        let s = QuantumState::basis(f.clone(), 2, &z0, Fe(1)).unwrap();
        let e = random_invertible_map(&f, 2, &mut rng);
        let ue = apply_linear_permutation(&s, &e).unwrap();
        let ez = e.apply(&f, &z0);
        for _ in 0..10 {
            let o = measure_prefix(&ue, &e, &mut rng).unwrap();
            assert_eq!(o.b, ez[..1].to_vec());
            assert!(o.line.contains(&f, &z0));
            assert_eq!(o.line.at(&f, ez[1]), z0);
        }
    }

    #[test]
    fn line_state_projection_examples() {
        let f = gf(2);
        let zero = build_line_state(&UniPoly::zero(), &f);
        for t in f.enumerate() {
            assert!((zero.amp(t, Fe::ZERO).re - 0.5).abs() < 1e-15);
        }
        assert!((zero.norm_sqr() - 1.0).abs() < NORM_TOL);
        assert_eq!(zero.amps().iter().filter(|a| a.norm() > 0.0).count(), 4);

        let g = UniPoly::new(vec![Fe(1), Fe(2)]);
        let e1 = build_line_state(&g, &f);
        assert!((projection_prob(&e1, &e1) - 1.0).abs() < 1e-12);
        let shifted = build_line_state(&g.add(&UniPoly::constant(Fe(1))), &f);
        assert_eq!(projection_prob(&shifted, &e1), 0.0);

        // g' = g except at one of the four points: |⟨e₁|φ⟩|² = (3/4)²
        let mut phi = e1.clone();
        let t = Fe(3);
        let gy = g.eval(&f, t);
        phi.amps[t.index() * 4 + gy.index()] = Complex64::new(0.0, 0.0);
        phi.amps[t.index() * 4 + (gy.index() ^ 1)] = Complex64::new(0.5, 0.0);
        let direct: f64 = (0..4).map(|t| if t == 3 { 0.0 } else { 0.25 }).sum::<f64>().powi(2);
        assert!((projection_prob(&phi, &e1) - direct).abs() < 1e-12);
        assert!((direct - 0.5625).abs() < 1e-15);
    }

    #[test]
    fn shift_and_superposition_preserve_norm() {
        let f = gf(2);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (_, _, s) = sample_lde(&f, 2, 10);
        let d = random_dense_state(&f, 2, true, &mut rng).unwrap();
        for st in [s.shift_y(Fe(1)), d.shift_y(Fe(3))] {
            assert!((st.norm_sqr() - 1.0).abs() < NORM_TOL);
        }
        let mix = superpose(&s, Complex64::new(0.6, 0.0), &d, Complex64::new(0.0, 0.8)).unwrap();
        assert!((mix.norm_sqr() - 1.0).abs() < NORM_TOL);
        assert!(QuantumState::dense(f.clone(), 2, vec![Complex64::new(0.1, 0.0); 64]).is_err());
    }

    #[test]
    fn state_json_round_trip() {
        let f = gf(2);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (_, _, s) = sample_lde(&f, 2, 12);
        let d = random_dense_state(&f, 2, true, &mut rng).unwrap();
        for st in [s, d] {
            let text = serde_json::to_string(&st).unwrap();
            let back: QuantumState = serde_json::from_str(&text).unwrap();
            assert_eq!(back, st);
        }
    }
}
