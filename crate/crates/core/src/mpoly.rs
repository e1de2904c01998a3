//! Polynomials over GF(2^a): sparse multivariate polynomials, dense
//! univariate ones, low-degree extensions of tables on H^d, and degree
//! certification by full-domain interpolation.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param_err, Error, Result};
use crate::geom::{self, AffineSubspace, Point};
use crate::gf::{Fe, Field};

/// Shape of a low-degree extension: field, number of variables `d`, and the
/// size of H (the first `h_size` field elements).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LdeParams {
    pub field: Field,
    pub d: usize,
    pub h_size: usize,
}

impl LdeParams {
    pub fn new(field: Field, d: usize, h_size: usize) -> Result<Self> {
        if d == 0 {
            return Err(param_err!("d must be positive"));
        }
        if h_size == 0 || h_size > field.order() {
            return Err(param_err!("|H| = {h_size} must be in 1..={}", field.order()));
        }
        let p = LdeParams { field, d, h_size };
        p.domain_size()?;
        Ok(p)
    }

    pub fn h(&self) -> Vec<Fe> {
        self.field.subset_h(self.h_size).expect("validated at construction")
    }

    /// |H|^d
    pub fn domain_size(&self) -> Result<usize> {
        (0..self.d).try_fold(1usize, |acc, _| {
            acc.checked_mul(self.h_size)
                .filter(|&n| n <= geom::ENUMERATION_BUDGET)
                .ok_or_else(|| Error::Resource(format!("|H|^d = {}^{} is too large", self.h_size, self.d)))
        })
    }

    /// Default verifier degree bound: the total degree d·(|H|−1) of any LDE.
    pub fn default_degree_bound(&self) -> usize {
        self.d * (self.h_size - 1)
    }

    /// π: H^d → [|H|^d], row-major with the first coordinate most significant.
    pub fn pi(&self, z: &[Fe]) -> Result<usize> {
        if z.len() != self.d || z.iter().any(|x| x.index() >= self.h_size) {
            return Err(param_err!("point is not in H^d"));
        }
        Ok(geom::point_index(self.h_size, z))
    }

    pub fn pi_inv(&self, index: usize) -> Result<Point> {
        if index >= self.domain_size()? {
            return Err(param_err!("index {index} is outside [|H|^d]"));
        }
        Ok(geom::point_at(self.h_size, self.d, index))
    }
}

/// Values a_1..a_{|H|^d}, indexed through π.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataTable {
    pub values: Vec<Fe>,
}

impl DataTable {
    pub fn new(params: &LdeParams, values: Vec<Fe>) -> Result<Self> {
        let n = params.domain_size()?;
        if values.len() != n {
            return Err(param_err!("data table has {} entries, expected |H|^d = {n}", values.len()));
        }
        if values.iter().any(|&v| !params.field.contains(v)) {
            return Err(param_err!("data table entry outside the field"));
        }
        Ok(DataTable { values })
    }

    pub fn get(&self, params: &LdeParams, z: &[Fe]) -> Result<Fe> {
        Ok(self.values[params.pi(z)?])
    }
}

/// On-disk form of a data table: the LDE header plus flat integer values.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataFile {
    pub params: LdeParams,
    pub values: Vec<Fe>,
}

/// Dense univariate polynomial, lowest degree first, no trailing zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UniPoly {
    coeffs: Vec<Fe>,
}

/// The interpolating polynomial exceeded the requested degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DegreeFailure {
    pub degree: usize,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<Fe>) -> Self {
        while coeffs.last() == Some(&Fe::ZERO) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Fe) -> Self {
        UniPoly::new(vec![c])
    }

    pub fn coeffs(&self) -> &[Fe] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, field: &Field, t: Fe) -> Fe {
        self.coeffs.iter().rev().fold(Fe::ZERO, |acc, &c| field.add(field.mul(acc, t), c))
    }

    /// Values at t = 0, 1, ..., |F|−1.
    pub fn values(&self, field: &Field) -> Vec<Fe> {
        field.enumerate().map(|t| self.eval(field, t)).collect()
    }

    pub fn add(&self, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |p: &UniPoly, i: usize| p.coeffs.get(i).copied().unwrap_or(Fe::ZERO);
        UniPoly::new((0..n).map(|i| Fe(get(self, i).0 ^ get(other, i).0)).collect())
    }

    pub fn mul(&self, field: &Field, other: &UniPoly) -> UniPoly {
        if self.is_zero() || other.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![Fe::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = field.add(out[i + j], field.mul(a, b));
            }
        }
        UniPoly::new(out)
    }

    pub fn scale(&self, field: &Field, c: Fe) -> UniPoly {
        UniPoly::new(self.coeffs.iter().map(|&x| field.mul(c, x)).collect())
    }

    /// `t ↦ self(μ + λ·t)`
    pub fn compose_affine(&self, field: &Field, mu: Fe, lambda: Fe) -> UniPoly {
        let inner = UniPoly::new(vec![mu, lambda]);
        self.coeffs.iter().rev().fold(UniPoly::zero(), |acc, &c| acc.mul(field, &inner).add(&UniPoly::constant(c)))
    }

    /// Lagrange interpolation through distinct nodes.
    pub fn interpolate(field: &Field, points: &[(Fe, Fe)]) -> Result<UniPoly> {
        let mut out = UniPoly::zero();
        for (i, &(xi, yi)) in points.iter().enumerate() {
            let mut basis = UniPoly::constant(Fe::ONE);
            let mut denom = Fe::ONE;
            for (j, &(xj, _)) in points.iter().enumerate() {
                if i == j {
                    continue;
                }
                if xi == xj {
                    return Err(param_err!("repeated interpolation node {xi}"));
                }
                basis = basis.mul(field, &UniPoly::new(vec![xj, Fe::ONE]));
                denom = field.mul(denom, field.sub(xi, xj));
            }
            out = out.add(&basis.scale(field, field.div(yi, denom)?));
        }
        Ok(out)
    }

    pub fn to_multi(&self) -> MultiPoly {
        let mut p = MultiPoly::zero(1);
        for (e, &c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                p.terms.insert(vec![e as u16], c);
            }
        }
        p
    }
}

/// Coefficients of the unique polynomial of degree < |F| taking `values[t]`
/// at every t ∈ F, from `P(x) = Σ_a v_a·(1 − (x − a)^{|F|−1})`.
fn full_field_coeffs(field: &Field, values: &[Fe]) -> Vec<Fe> {
    let q = field.order();
    debug_assert_eq!(values.len(), q);
    let mut coeffs = vec![Fe::ZERO; q];
    coeffs[0] = values[0];
    if q == 1 {
        return coeffs;
    }
    // (x + a)^{q−1} = Σ_k x^k a^{q−1−k} since every binomial C(q−1, k) is odd.
    for (k, slot) in coeffs.iter_mut().enumerate().skip(1) {
        let e = (q - 1 - k) as u64;
        let mut acc = Fe::ZERO;
        for (a, &v) in values.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            let ap = if e == 0 { Fe::ONE } else { field.pow(Fe(a as u16), e) };
            acc = field.add(acc, field.mul(v, ap));
        }
        *slot = acc;
    }
    coeffs
}

/// Full |F|-point interpolation followed by a degree check.
pub fn fit_univariate(field: &Field, values: &[Fe], max_degree: usize) -> Result<Result<UniPoly, DegreeFailure>> {
    if values.len() != field.order() {
        return Err(param_err!("expected {} values, got {}", field.order(), values.len()));
    }
    let g = UniPoly::new(full_field_coeffs(field, values));
    Ok(match g.degree() {
        Some(deg) if deg > max_degree => Err(DegreeFailure { degree: deg }),
        _ => Ok(g),
    })
}

/// Applies a one-dimensional transform along every axis of a row-major
/// `n^k` tensor.
fn tensor_transform(k: usize, n: usize, mut data: Vec<Fe>, transform: impl Fn(&[Fe]) -> Vec<Fe>) -> Vec<Fe> {
    let total = data.len();
    let mut fiber = vec![Fe::ZERO; n];
    for axis in 0..k {
        let stride = n.pow((k - 1 - axis) as u32);
        for start in 0..total {
            if !(start / stride).is_multiple_of(n) {
                continue;
            }
            for (i, slot) in fiber.iter_mut().enumerate() {
                *slot = data[start + i * stride];
            }
            for (i, v) in transform(&fiber).into_iter().enumerate() {
                data[start + i * stride] = v;
            }
        }
    }
    data
}

fn coeff_tensor_to_poly(k: usize, n: usize, coeffs: &[Fe]) -> MultiPoly {
    let mut p = MultiPoly::zero(k);
    for (idx, &c) in coeffs.iter().enumerate() {
        if !c.is_zero() {
            let exps = geom::point_at(n, k, idx).into_iter().map(|e| e.0).collect();
            p.terms.insert(exps, c);
        }
    }
    p
}

/// Interpolates a function on the full grid F^k (row-major values) and
/// checks its total degree.
pub fn fit_multivariate(
    field: &Field,
    k: usize,
    values: &[Fe],
    max_total_degree: usize,
) -> Result<Result<MultiPoly, DegreeFailure>> {
    let q = field.order();
    if values.len() != geom::space_size(field, k)? {
        return Err(param_err!("expected |F|^{k} values, got {}", values.len()));
    }
    let coeffs = tensor_transform(k, q, values.to_vec(), |fiber| full_field_coeffs(field, fiber));
    let p = coeff_tensor_to_poly(k, q, &coeffs);
    let deg = p.total_degree();
    Ok(if deg > max_total_degree { Err(DegreeFailure { degree: deg }) } else { Ok(p) })
}

/// Sparse multivariate polynomial. Exponents are kept below |F| by the
/// identity x^|F| = x, so distinct representations are distinct functions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiPoly {
    nvars: usize,
    #[serde(with = "term_list")]
    terms: BTreeMap<Vec<u16>, Fe>,
}

mod term_list {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(terms: &BTreeMap<Vec<u16>, Fe>, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(terms.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<Vec<u16>, Fe>, D::Error> {
        let list: Vec<(Vec<u16>, Fe)> = Vec::deserialize(d)?;
        Ok(list.into_iter().filter(|(_, c)| !c.is_zero()).collect())
    }
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Fe) -> Self {
        let mut p = MultiPoly::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    /// The coordinate function z_i.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut exps = vec![0; nvars];
        exps[i] = 1;
        let mut p = MultiPoly::zero(nvars);
        p.terms.insert(exps, Fe::ONE);
        p
    }

    pub fn from_terms(field: &Field, nvars: usize, terms: impl IntoIterator<Item = (Vec<u16>, Fe)>) -> Result<Self> {
        let mut p = MultiPoly::zero(nvars);
        for (exps, c) in terms {
            if exps.len() != nvars {
                return Err(param_err!("exponent vector of length {} in {nvars} variables", exps.len()));
            }
            p.add_term(field, exps, c);
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u16], Fe)> {
        self.terms.iter().map(|(e, &c)| (e.as_slice(), c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exps: &[u16]) -> Fe {
        self.terms.get(exps).copied().unwrap_or(Fe::ZERO)
    }

    /// Adds `c·z^exps`, folding exponents ≥ |F| and dropping zeros.
    pub fn add_term(&mut self, field: &Field, mut exps: Vec<u16>, c: Fe) {
        if c.is_zero() {
            return;
        }
        let q = field.order() as u16;
        for e in exps.iter_mut() {
            while *e >= q {
                *e -= q - 1;
            }
        }
        let slot = self.terms.entry(exps).or_insert(Fe::ZERO);
        *slot = field.add(*slot, c);
        if slot.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    /// Maximum exponent sum over stored terms; 0 for the zero polynomial.
    pub fn total_degree(&self) -> usize {
        self.terms.keys().map(|e| e.iter().map(|&x| x as usize).sum()).max().unwrap_or(0)
    }

    pub fn max_var_degree(&self) -> usize {
        self.terms.keys().flat_map(|e| e.iter().map(|&x| x as usize)).max().unwrap_or(0)
    }

    pub fn add(&self, field: &Field, other: &MultiPoly) -> MultiPoly {
        debug_assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.add_term(field, e.clone(), c);
        }
        out
    }

    pub fn scale(&self, field: &Field, c: Fe) -> MultiPoly {
        let mut out = MultiPoly::zero(self.nvars);
        for (e, &x) in &self.terms {
            out.add_term(field, e.clone(), field.mul(c, x));
        }
        out
    }

    pub fn mul(&self, field: &Field, other: &MultiPoly) -> MultiPoly {
        debug_assert_eq!(self.nvars, other.nvars);
        let mut out = MultiPoly::zero(self.nvars);
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &other.terms {
                let exps = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(field, exps, field.mul(ca, cb));
            }
        }
        out
    }

    pub fn evaluate(&self, field: &Field, z: &[Fe]) -> Result<Fe> {
        if z.len() != self.nvars {
            return Err(param_err!("point has dimension {}, polynomial has {} variables", z.len(), self.nvars));
        }
        Ok(self.eval(field, z))
    }

    /// Evaluation without the dimension check.
    pub fn eval(&self, field: &Field, z: &[Fe]) -> Fe {
        let mut acc = Fe::ZERO;
        for (exps, &c) in &self.terms {
            let mut term = c;
            for (&x, &e) in z.iter().zip(exps) {
                if e != 0 {
                    term = field.mul(term, field.pow(x, e as u64));
                }
            }
            acc = field.add(acc, term);
        }
        acc
    }

    /// Substitutes `z = base + Σ tᵢ·dirᵢ`, giving a polynomial in `dirs.len()`
    /// variables. Generators need not be independent.
    pub fn restrict(&self, field: &Field, base: &[Fe], dirs: &[Point]) -> Result<MultiPoly> {
        if base.len() != self.nvars || dirs.iter().any(|v| v.len() != self.nvars) {
            return Err(param_err!("subspace lives in a different ambient dimension"));
        }
        let k = dirs.len();
        let linear: Vec<MultiPoly> = (0..self.nvars)
            .map(|j| {
                let mut l = MultiPoly::constant(k, base[j]);
                for (i, dir) in dirs.iter().enumerate() {
                    let mut exps = vec![0; k];
                    exps[i] = 1;
                    l.add_term(field, exps, dir[j]);
                }
                l
            })
            .collect();
        let mut powers: Vec<Vec<MultiPoly>> = linear.iter().map(|l| vec![MultiPoly::constant(k, Fe::ONE), l.clone()]).collect();
        let mut out = MultiPoly::zero(k);
        for (exps, &c) in &self.terms {
            let mut term = MultiPoly::constant(k, c);
            for (j, &e) in exps.iter().enumerate() {
                let e = e as usize;
                while powers[j].len() <= e {
                    let next = powers[j].last().unwrap().mul(field, &linear[j]);
                    powers[j].push(next);
                }
                if e > 0 {
                    term = term.mul(field, &powers[j][e]);
                }
            }
            out = out.add(field, &term);
        }
        Ok(out)
    }

    pub fn restrict_to_subspace(&self, field: &Field, s: &AffineSubspace) -> Result<MultiPoly> {
        self.restrict(field, &s.base, &s.dirs)
    }

    /// A univariate view of a one-variable polynomial.
    pub fn to_univariate(&self) -> Result<UniPoly> {
        if self.nvars != 1 {
            return Err(param_err!("polynomial has {} variables", self.nvars));
        }
        let n = self.max_var_degree() + 1;
        let mut coeffs = vec![Fe::ZERO; n];
        for (e, &c) in &self.terms {
            coeffs[e[0] as usize] = c;
        }
        Ok(UniPoly::new(coeffs))
    }

    /// Evaluation table over F^nvars in row-major order.
    pub fn table(&self, field: &Field) -> Result<Vec<Fe>> {
        Ok(geom::all_points(field, self.nvars)?.map(|z| self.eval(field, &z)).collect())
    }
}

/// Lagrange basis over `nodes` as a matrix: `m[e][h]` is the x^e coefficient
/// of the polynomial that is 1 at `nodes[h]` and 0 at the other nodes.
fn lagrange_matrix(field: &Field, nodes: &[Fe]) -> Result<Vec<Vec<Fe>>> {
    let n = nodes.len();
    let mut m = vec![vec![Fe::ZERO; n]; n];
    #[allow(clippy::needless_range_loop)]
    for h in 0..n {
        let pts: Vec<(Fe, Fe)> = nodes
            .iter()
            .enumerate()
            .map(|(i, &x)| (x, if i == h { Fe::ONE } else { Fe::ZERO }))
            .collect();
        let basis = UniPoly::interpolate(field, &pts)?;
        for (e, &c) in basis.coeffs().iter().enumerate() {
            m[e][h] = c;
        }
    }
    Ok(m)
}

/// The low-degree extension Ã of `data`: per-variable degree ≤ |H|−1 and
/// Ã = A on H^d, built from tensor products of univariate Lagrange bases.
pub fn interpolate_lde(params: &LdeParams, data: &DataTable) -> Result<MultiPoly> {
    let n = params.domain_size()?;
    if data.values.len() != n {
        return Err(param_err!("data table has {} entries, expected {n}", data.values.len()));
    }
    let field = &params.field;
    let m = lagrange_matrix(field, &params.h())?;
    let h = params.h_size;
    let coeffs = tensor_transform(params.d, h, data.values.clone(), |fiber| {
        (0..h)
            .map(|e| {
                fiber
                    .iter()
                    .zip(&m[e])
                    .fold(Fe::ZERO, |acc, (&v, &b)| field.add(acc, field.mul(v, b)))
            })
            .collect()
    });
    Ok(coeff_tensor_to_poly(params.d, h, &coeffs))
}

/// Randomized identity test; distinct polynomials of total degree ≤ r escape a
/// single trial with probability at most r/|F|.
pub fn poly_equal_schwartz_zippel(
    field: &Field,
    p: &MultiPoly,
    q: &MultiPoly,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<bool> {
    if p.nvars() != q.nvars() {
        return Err(param_err!("polynomials have {} and {} variables", p.nvars(), q.nvars()));
    }
    let r = p.total_degree().max(q.total_degree());
    if r >= field.order() {
        return Err(param_err!("degree {r} ≥ |F| = {}: the identity test is vacuous", field.order()));
    }
    for _ in 0..trials {
        let z = geom::random_point(field, p.nvars(), rng);
        if p.eval(field, &z) != q.eval(field, &z) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::geom::{all_lines, line_through, Line};

    fn gf(a: u32) -> Field {
        Field::with_degree(a).unwrap()
    }

    fn fe(v: &[u16]) -> Vec<Fe> {
        v.iter().map(|&x| Fe(x)).collect()
    }

    /// Direct Lagrange evaluation of the extension at `z`, no coefficients involved.
    fn lagrange_eval(params: &LdeParams, data: &DataTable, z: &[Fe]) -> Fe {
        let f = &params.field;
        let h = params.h();
        let mut acc = Fe::ZERO;
        for idx in 0..params.domain_size().unwrap() {
            let hz = params.pi_inv(idx).unwrap();
            let mut w = data.values[idx];
            for (i, &zi) in z.iter().enumerate() {
                for &other in &h {
                    if other != hz[i] {
                        w = f.mul(w, f.div(f.sub(zi, other), f.sub(hz[i], other)).unwrap());
                    }
                }
            }
            acc = f.add(acc, w);
        }
        acc
    }

    #[test]
    fn lde_of_product_table() {
        let f = gf(2);
        let params = LdeParams::new(f.clone(), 2, 2).unwrap();
        let values = (0..4).map(|i| params.pi_inv(i).unwrap()).map(|z| f.mul(z[0], z[1])).collect();
        let data = DataTable::new(&params, values).unwrap();
        let lde = interpolate_lde(&params, &data).unwrap();
        let z1z2 = MultiPoly::var(2, 0).mul(&f, &MultiPoly::var(2, 1));
        assert_eq!(lde, z1z2);
        for z in geom::all_points(&f, 2).unwrap() {
            assert_eq!(lde.eval(&f, &z), lagrange_eval(&params, &data, &z));
        }
        assert_eq!(z1z2.eval(&f, &fe(&[2, 3])), f.mul(Fe(2), Fe(3)));
    }

    #[test]
    fn lde_trivial_cases() {
        let f = gf(4);
        let params = LdeParams::new(f.clone(), 2, 4).unwrap();
        let data = DataTable::new(&params, vec![Fe(5); 16]).unwrap();
        assert_eq!(interpolate_lde(&params, &data).unwrap(), MultiPoly::constant(2, Fe(5)));

        let params = LdeParams::new(f.clone(), 1, 2).unwrap();
        let data = DataTable::new(&params, fe(&[0, 1])).unwrap();
        assert_eq!(interpolate_lde(&params, &data).unwrap(), MultiPoly::var(1, 0));
        assert!(DataTable::new(&params, fe(&[0, 1, 2])).is_err());
        assert!(MultiPoly::zero(2).evaluate(&f, &fe(&[3, 4])).unwrap().is_zero());
        assert!(MultiPoly::zero(2).evaluate(&f, &fe(&[3])).is_err());
    }

    #[test]
    fn lde_reproduces_data_and_matches_lagrange_oracle() {
        let f = gf(4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (d, h) in [(2, 4), (3, 2), (2, 3), (1, 5)] {
            let params = LdeParams::new(f.clone(), d, h).unwrap();
            let n = params.domain_size().unwrap();
            let values = (0..n).map(|_| Fe(rng.gen_range(0..16))).collect();
            let data = DataTable::new(&params, values).unwrap();
            let lde = interpolate_lde(&params, &data).unwrap();
            assert!(lde.max_var_degree() < h);
            assert!(lde.total_degree() <= params.default_degree_bound());
            for i in 0..n {
                let z = params.pi_inv(i).unwrap();
                assert_eq!(params.pi(&z).unwrap(), i);
                assert_eq!(lde.eval(&f, &z), data.values[i]);
            }
            for z in geom::all_points(&f, d).unwrap().step_by(7) {
                assert_eq!(lde.eval(&f, &z), lagrange_eval(&params, &data, &z));
            }
        }
    }

    #[test]
    fn lde_is_unique_among_low_degree_polynomials() {
        // d = 2, |H| = 2 over GF(4): every polynomial with per-variable degree ≤ 1
        // is determined by 4 coefficients; enumerate all 4^4 of them.
        let f = gf(2);
        let params = LdeParams::new(f.clone(), 2, 2).unwrap();
        let data = DataTable::new(&params, fe(&[3, 1, 0, 2])).unwrap();
        let lde = interpolate_lde(&params, &data).unwrap();
        let monomials = [vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]];
        let mut agreeing = Vec::new();
        for code in 0..256u16 {
            let terms = monomials.iter().enumerate().map(|(i, e)| (e.clone(), Fe((code >> (2 * i)) & 3)));
            let p = MultiPoly::from_terms(&f, 2, terms).unwrap();
            if (0..4).all(|i| p.eval(&f, &params.pi_inv(i).unwrap()) == data.values[i]) {
                agreeing.push(p);
            }
        }
        assert_eq!(agreeing, vec![lde]);
    }

    #[test]
    fn restriction_examples() {
        let f = gf(2);
        let z1z2 = MultiPoly::var(2, 0).mul(&f, &MultiPoly::var(2, 1));
        let diag = Line::new(fe(&[0, 0]), fe(&[1, 1])).unwrap();
        let r = z1z2.restrict_to_subspace(&f, &diag.as_subspace()).unwrap();
        let mut t2 = MultiPoly::zero(1);
        t2.add_term(&f, vec![2], Fe::ONE);
        assert_eq!(r, t2);
        for t in f.enumerate() {
            assert_eq!(r.eval(&f, &[t]), f.mul(t, t));
        }
        let c = MultiPoly::constant(2, Fe(3));
        assert_eq!(c.restrict_to_subspace(&f, &diag.as_subspace()).unwrap(), MultiPoly::constant(1, Fe(3)));
    }

    #[test]
    fn restriction_commutes_with_evaluation_on_every_line() {
        let f = gf(2);
        let params = LdeParams::new(f.clone(), 2, 3).unwrap();
        let data = DataTable::new(&params, fe(&[1, 2, 3, 0, 1, 2, 3, 3, 1])).unwrap();
        let lde = interpolate_lde(&params, &data).unwrap();
        for line in all_lines(&f, 2).unwrap() {
            let r = lde.restrict_to_subspace(&f, &line.as_subspace()).unwrap();
            assert!(r.total_degree() <= lde.total_degree());
            for t in f.enumerate() {
                assert_eq!(r.eval(&f, &[t]), lde.eval(&f, &line.at(&f, t)));
            }
        }
    }

    #[test]
    fn restriction_of_degree_six_lde_to_lines() {
        let f = gf(4);
        let params = LdeParams::new(f.clone(), 2, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let data = DataTable::new(&params, (0..16).map(|_| Fe(rng.gen_range(0..16))).collect()).unwrap();
        let lde = interpolate_lde(&params, &data).unwrap();
        for _ in 0..50 {
            let w = geom::random_point(&f, 2, &mut rng);
            let z = geom::random_point(&f, 2, &mut rng);
            if w == z {
                continue;
            }
            let l = line_through(&w, &z).unwrap();
            let g = lde.restrict_to_subspace(&f, &l.as_subspace()).unwrap().to_univariate().unwrap();
            assert!(g.degree().unwrap_or(0) <= 6);
        }
    }

    #[test]
    fn fit_univariate_examples() {
        let f = gf(4);
        let t2: Vec<Fe> = f.enumerate().map(|t| f.mul(t, t)).collect();
        let g = fit_univariate(&f, &t2, 2).unwrap().unwrap();
        assert_eq!(g, UniPoly::new(fe(&[0, 0, 1])));
        assert_eq!(fit_univariate(&f, &t2, 1).unwrap(), Err(DegreeFailure { degree: 2 }));
        assert!(fit_univariate(&f, &t2[..3], 2).is_err());
    }

    #[test]
    fn fit_univariate_agrees_with_lagrange_oracle() {
        let f = gf(3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let values: Vec<Fe> = (0..8).map(|_| Fe(rng.gen_range(0..8))).collect();
            let pts: Vec<(Fe, Fe)> = f.enumerate().zip(values.iter().copied()).collect();
            let oracle = UniPoly::interpolate(&f, &pts).unwrap();
            assert_eq!(fit_univariate(&f, &values, 7).unwrap().unwrap(), oracle);
        }
    }

    #[test]
    fn fit_multivariate_recovers_polynomials() {
        let f = gf(2);
        let p = MultiPoly::from_terms(&f, 2, [(vec![1, 1], Fe(2)), (vec![0, 2], Fe(1)), (vec![0, 0], Fe(3))]).unwrap();
        let table = p.table(&f).unwrap();
        assert_eq!(fit_multivariate(&f, 2, &table, 2).unwrap().unwrap(), p);
        assert_eq!(fit_multivariate(&f, 2, &table, 1).unwrap(), Err(DegreeFailure { degree: 2 }));
    }

    #[test]
    fn schwartz_zippel_examples() {
        let f = gf(4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let z1 = MultiPoly::var(2, 0);
        assert!(poly_equal_schwartz_zippel(&f, &z1, &z1, 20, &mut rng).unwrap());
        let z1p1 = z1.add(&f, &MultiPoly::constant(2, Fe::ONE));
        assert!(!poly_equal_schwartz_zippel(&f, &z1, &z1p1, 1, &mut rng).unwrap());

        // distinct degree-1 polynomials: exhaustive agreement count ≤ 16 of 256 points
        let a = MultiPoly::from_terms(&f, 2, [(vec![1, 0], Fe(3)), (vec![0, 1], Fe(7))]).unwrap();
        let b = MultiPoly::from_terms(&f, 2, [(vec![1, 0], Fe(5)), (vec![0, 0], Fe(1))]).unwrap();
        let agree = geom::all_points(&f, 2).unwrap().filter(|z| a.eval(&f, z) == b.eval(&f, z)).count();
        assert!(agree as f64 / 256.0 <= 1.0 / 16.0);

        let mut big = MultiPoly::zero(2);
        big.add_term(&f, vec![15, 1], Fe::ONE);
        assert!(poly_equal_schwartz_zippel(&f, &big, &big, 1, &mut rng).is_err());
    }

    #[test]
    fn exponents_fold_at_field_order() {
        let f = gf(2);
        let mut p = MultiPoly::zero(1);
        p.add_term(&f, vec![4], Fe::ONE); // x^4 = x on GF(4)
        assert_eq!(p, MultiPoly::var(1, 0));
    }

    #[test]
    fn compose_affine_matches_substitution() {
        let f = gf(3);
        let g = UniPoly::new(fe(&[1, 5, 0, 7]));
        let h = g.compose_affine(&f, Fe(3), Fe(6));
        for t in f.enumerate() {
            assert_eq!(h.eval(&f, t), g.eval(&f, f.add(Fe(3), f.mul(Fe(6), t))));
        }
    }

    proptest! {
        #[test]
        fn distinct_low_degree_unipolys_agree_on_at_most_r_points(
            a in proptest::collection::vec(0u16..16, 1..5),
            b in proptest::collection::vec(0u16..16, 1..5),
        ) {
            let f = gf(4);
            let (pa, pb) = (UniPoly::new(fe(&a)), UniPoly::new(fe(&b)));
            prop_assume!(pa != pb);
            let r = pa.degree().unwrap_or(0).max(pb.degree().unwrap_or(0));
            let agree = f.enumerate().filter(|&t| pa.eval(&f, t) == pb.eval(&f, t)).count();
            prop_assert!(agree <= r);
        }

        #[test]
        fn multipoly_json_round_trip(terms in proptest::collection::vec((0u16..4, 0u16..4, 0u16..16), 0..6)) {
            let f = gf(4);
            let p = MultiPoly::from_terms(&f, 2, terms.into_iter().map(|(x, y, c)| (vec![x, y], Fe(c)))).unwrap();
            let s = serde_json::to_string(&p).unwrap();
            let back: MultiPoly = serde_json::from_str(&s).unwrap();
            prop_assert_eq!(back, p);
        }
    }
}
