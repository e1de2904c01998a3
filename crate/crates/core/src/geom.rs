//! Affine geometry of F^d: points, lines, affine subspaces and invertible
//! linear maps, plus the linear solves used by the line-sampling step of the
//! quantum low-degree test.

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param_err, Error, Result};
use crate::gf::{Fe, Field};

/// A point (or vector) of F^d.
pub type Point = Vec<Fe>;

/// Upper bound on the number of objects the enumeration helpers will produce.
pub const ENUMERATION_BUDGET: usize = 1 << 22;

/// Row-major index of `z` in F^d, first coordinate most significant.
pub fn point_index(q: usize, z: &[Fe]) -> usize {
    z.iter().fold(0, |acc, x| acc * q + x.index())
}

pub fn point_at(q: usize, d: usize, mut index: usize) -> Point {
    let mut z = vec![Fe::ZERO; d];
    for slot in z.iter_mut().rev() {
        *slot = Fe((index % q) as u16);
        index /= q;
    }
    z
}

/// |F|^d, or a resource error when that exceeds the enumeration budget.
pub fn space_size(field: &Field, d: usize) -> Result<usize> {
    let q = field.order();
    let mut n = 1usize;
    for _ in 0..d {
        n = n
            .checked_mul(q)
            .filter(|&n| n <= ENUMERATION_BUDGET)
            .ok_or_else(|| Error::Resource(format!("|F|^d = {q}^{d} is too large to enumerate")))?;
    }
    Ok(n)
}

/// All points of F^d in lexicographic order.
pub fn all_points(field: &Field, d: usize) -> Result<impl Iterator<Item = Point>> {
    let q = field.order();
    let n = space_size(field, d)?;
    Ok((0..n).map(move |i| point_at(q, d, i)))
}

pub fn vadd(x: &[Fe], y: &[Fe]) -> Point {
    x.iter().zip(y).map(|(a, b)| Fe(a.0 ^ b.0)).collect()
}

pub fn vscale(field: &Field, c: Fe, v: &[Fe]) -> Point {
    v.iter().map(|&x| field.mul(c, x)).collect()
}

/// `x + c·v`
pub fn vaxpy(field: &Field, x: &[Fe], c: Fe, v: &[Fe]) -> Point {
    x.iter().zip(v).map(|(&a, &b)| field.add(a, field.mul(c, b))).collect()
}

pub fn is_zero_vec(v: &[Fe]) -> bool {
    v.iter().all(|x| x.is_zero())
}

pub fn random_point(field: &Field, d: usize, rng: &mut impl Rng) -> Point {
    let q = field.order();
    (0..d).map(|_| Fe(rng.gen_range(0..q) as u16)).collect()
}

/// Reduces `rows` to reduced row-echelon form in place, dropping zero rows.
/// Returns the pivot column of each remaining row.
pub fn rref(field: &Field, rows: &mut Vec<Point>) -> Vec<usize> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut next = 0;
    for col in 0..ncols {
        let Some(found) = (next..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(next, found);
        let inv = field.inv(rows[next][col]).expect("pivot is nonzero");
        rows[next] = vscale(field, inv, &rows[next]);
        for i in 0..rows.len() {
            if i != next && !rows[i][col].is_zero() {
                let c = rows[i][col];
                let reduced = vaxpy(field, &rows[i], c, &rows[next]);
                rows[i] = reduced;
            }
        }
        pivots.push(col);
        next += 1;
        if next == rows.len() {
            break;
        }
    }
    rows.truncate(next);
    pivots
}

pub fn rank(field: &Field, vectors: &[Point]) -> usize {
    let mut rows = vectors.to_vec();
    rref(field, &mut rows).len()
}

/// Affine line `{base + t·dir : t ∈ F}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Line {
    pub base: Point,
    pub dir: Point,
}

impl Line {
    pub fn new(base: Point, dir: Point) -> Result<Self> {
        if base.len() != dir.len() {
            return Err(param_err!("base has dimension {}, direction {}", base.len(), dir.len()));
        }
        if is_zero_vec(&dir) {
            return Err(param_err!("line direction must be nonzero"));
        }
        Ok(Line { base, dir })
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    pub fn at(&self, field: &Field, t: Fe) -> Point {
        vaxpy(field, &self.base, t, &self.dir)
    }

    /// Points in parameter order t = 0, 1, ..., |F|−1.
    pub fn points(&self, field: &Field) -> Vec<Point> {
        field.enumerate().map(|t| self.at(field, t)).collect()
    }

    /// The parameter t with `at(t) = z`, if `z` lies on the line.
    pub fn param_of(&self, field: &Field, z: &[Fe]) -> Option<Fe> {
        let k = self.dir.iter().position(|x| !x.is_zero())?;
        let t = field.div(field.sub(z[k], self.base[k]), self.dir[k]).ok()?;
        (self.at(field, t) == z).then_some(t)
    }

    pub fn contains(&self, field: &Field, z: &[Fe]) -> bool {
        self.param_of(field, z).is_some()
    }

    /// Direction scaled so its first nonzero coordinate is 1; base moved to
    /// the lexicographically smallest point of the line.
    pub fn canonical(&self, field: &Field) -> Line {
        let k = self.dir.iter().position(|x| !x.is_zero()).expect("nonzero direction");
        let inv = field.inv(self.dir[k]).expect("nonzero pivot");
        let dir = vscale(field, inv, &self.dir);
        // Coordinates before k are constant along the line; coordinate k runs over F,
        // so the minimum sets it to zero.
        let base = vaxpy(field, &self.base, self.base[k], &dir);
        Line { base, dir }
    }

    pub fn is_canonical(&self, field: &Field) -> bool {
        self.canonical(field) == *self
    }

    /// Affine map taking this line's parameter to `other`'s: returns `(μ, λ)`
    /// with `self.at(t) = other.at(μ + λ·t)`. Both must describe the same set.
    pub fn reparam_to(&self, field: &Field, other: &Line) -> Option<(Fe, Fe)> {
        let mu = other.param_of(field, &self.base)?;
        let k = other.dir.iter().position(|x| !x.is_zero())?;
        let lambda = field.div(self.dir[k], other.dir[k]).ok()?;
        (vscale(field, lambda, &other.dir) == self.dir).then_some((mu, lambda))
    }

    pub fn as_subspace(&self) -> AffineSubspace {
        AffineSubspace { base: self.base.clone(), dirs: vec![self.dir.clone()] }
    }
}

/// `w` at t = 0, `z` at t = 1.
pub fn line_through(w: &[Fe], z: &[Fe]) -> Result<Line> {
    if w.len() != z.len() {
        return Err(param_err!("points have dimensions {} and {}", w.len(), z.len()));
    }
    if w == z {
        return Err(param_err!("a line needs two distinct points"));
    }
    Line::new(w.to_vec(), vadd(z, w))
}

/// Affine subspace `{base + Σ tᵢ·dirᵢ}`.
///
/// [`AffineSubspace::new`] insists on independent generators. Parameterized
/// flats built by [`plane_through`] may carry dependent generators; their
/// parameter dimension then exceeds [`AffineSubspace::rank`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AffineSubspace {
    pub base: Point,
    pub dirs: Vec<Point>,
}

impl AffineSubspace {
    pub fn new(field: &Field, base: Point, dirs: Vec<Point>) -> Result<Self> {
        if dirs.iter().any(|v| v.len() != base.len()) {
            return Err(param_err!("generator dimensions do not match the base point"));
        }
        if rank(field, &dirs) != dirs.len() {
            return Err(param_err!("generators are linearly dependent"));
        }
        Ok(AffineSubspace { base, dirs })
    }

    pub fn point(base: Point) -> Self {
        AffineSubspace { base, dirs: Vec::new() }
    }

    /// Dimension of the ambient space F^d.
    pub fn ambient_dim(&self) -> usize {
        self.base.len()
    }

    /// Number of parameters (generators).
    pub fn dim(&self) -> usize {
        self.dirs.len()
    }

    pub fn rank(&self, field: &Field) -> usize {
        rank(field, &self.dirs)
    }

    pub fn at(&self, field: &Field, t: &[Fe]) -> Point {
        let mut z = self.base.clone();
        for (ti, dir) in t.iter().zip(&self.dirs) {
            z = vaxpy(field, &z, *ti, dir);
        }
        z
    }

    /// Points indexed by the row-major index of their parameter vector.
    pub fn points(&self, field: &Field) -> Result<Vec<Point>> {
        let q = field.order();
        let k = self.dim();
        let n = space_size(field, k)?;
        Ok((0..n).map(|i| self.at(field, &point_at(q, k, i))).collect())
    }

    /// Reduced row-echelon generators with the base reduced to zero on every
    /// pivot column. Two descriptions of the same point set canonicalize equal.
    pub fn canonical(&self, field: &Field) -> AffineSubspace {
        let mut dirs = self.dirs.clone();
        let pivots = rref(field, &mut dirs);
        let mut base = self.base.clone();
        for (row, &col) in dirs.iter().zip(&pivots) {
            let c = base[col];
            if !c.is_zero() {
                base = vaxpy(field, &base, c, row);
            }
        }
        AffineSubspace { base, dirs }
    }

    fn pivots(&self) -> Vec<usize> {
        self.dirs
            .iter()
            .map(|row| row.iter().position(|x| !x.is_zero()).expect("nonzero generator"))
            .collect()
    }

    /// Parameter vector of `z` with respect to a canonical subspace, or `None`
    /// when `z` lies outside it.
    pub fn coords(&self, field: &Field, z: &[Fe]) -> Option<Point> {
        let offset = vadd(z, &self.base);
        let t: Point = self.pivots().into_iter().map(|c| offset[c]).collect();
        (self.at(field, &t) == z).then_some(t)
    }

    pub fn contains(&self, field: &Field, z: &[Fe]) -> bool {
        let mut rows = self.dirs.clone();
        let r = rank(field, &rows);
        rows.push(vadd(z, &self.base));
        rank(field, &rows) == r
    }

    /// True if every point of `other` lies in `self`.
    pub fn contains_subspace(&self, field: &Field, other: &AffineSubspace) -> bool {
        if !self.contains(field, &other.base) {
            return false;
        }
        let mut rows = self.dirs.clone();
        let r = rank(field, &rows);
        rows.extend(other.dirs.iter().cloned());
        rank(field, &rows) == r
    }
}

/// Plane parameterized as `w + (z−w)·t₁ + (w2−w)·t₂`: z at (1,0), w2 at (0,1).
/// Collinear triples keep both (dependent) generators.
pub fn plane_through(w: &[Fe], w2: &[Fe], z: &[Fe]) -> Result<AffineSubspace> {
    if w.len() != w2.len() || w.len() != z.len() {
        return Err(param_err!("points have mismatched dimensions"));
    }
    if w == w2 || w == z || w2 == z {
        return Err(param_err!("plane_through needs three pairwise distinct points"));
    }
    Ok(AffineSubspace { base: w.to_vec(), dirs: vec![vadd(z, w), vadd(w2, w)] })
}

/// N = (|F|^d − 1)/(|F| − 1), the number of line directions.
pub fn direction_count(field: &Field, d: usize) -> usize {
    let q = field.order();
    (q.pow(d as u32) - 1) / (q - 1)
}

/// Canonical directions: first nonzero coordinate equal to 1.
pub fn canonical_directions(field: &Field, d: usize) -> Result<Vec<Point>> {
    Ok(all_points(field, d)?
        .filter(|v| v.iter().find(|x| !x.is_zero()) == Some(&Fe::ONE))
        .collect())
}

/// Every line of F^d exactly once, in canonical form.
pub fn all_lines(field: &Field, d: usize) -> Result<Vec<Line>> {
    if d == 0 {
        return Err(param_err!("F^0 has no lines"));
    }
    let q = field.order();
    let count = direction_count(field, d)
        .checked_mul(q.pow(d as u32 - 1))
        .filter(|&n| n <= ENUMERATION_BUDGET)
        .ok_or_else(|| Error::Resource(format!("too many lines in F^{d} over GF({q})")))?;
    let mut out = Vec::with_capacity(count);
    for dir in canonical_directions(field, d)? {
        let k = dir.iter().position(|x| !x.is_zero()).unwrap();
        for base in all_points(field, d)?.filter(|p| p[k].is_zero()) {
            out.push(Line { base, dir: dir.clone() });
        }
    }
    Ok(out)
}

/// L(z): the N canonical lines through `z`.
pub fn lines_through(field: &Field, z: &[Fe]) -> Result<Vec<Line>> {
    Ok(canonical_directions(field, z.len())?
        .into_iter()
        .map(|dir| Line { base: z.to_vec(), dir }.canonical(field))
        .collect())
}

/// Smallest affine subspace containing the line and every point of `tau`,
/// with the line's direction as first generator.
pub fn smallest_affine_containing(field: &Field, line: &Line, tau: &[Point]) -> Result<AffineSubspace> {
    if tau.is_empty() {
        return Err(param_err!("tau must be nonempty"));
    }
    let mut dirs = vec![line.dir.clone()];
    for p in tau {
        let v = vadd(p, &line.base);
        if is_zero_vec(&v) {
            continue;
        }
        dirs.push(v);
        if rank(field, &dirs) < dirs.len() {
            dirs.pop();
        }
    }
    Ok(AffineSubspace { base: line.base.clone(), dirs })
}

/// Smallest affine subspace containing every point of `points` (nonempty).
pub fn affine_span(field: &Field, points: &[Point]) -> Result<AffineSubspace> {
    let (first, rest) = points.split_first().ok_or_else(|| param_err!("empty point set"))?;
    let mut dirs: Vec<Point> = Vec::new();
    for p in rest {
        dirs.push(vadd(p, first));
        if rank(field, &dirs) < dirs.len() {
            dirs.pop();
        }
    }
    Ok(AffineSubspace { base: first.clone(), dirs })
}

/// Uniformly random `target_dim`-dimensional subspace containing `s`, built by
/// rejection-sampling independent directions.
pub fn random_extension_to_dim(
    field: &Field,
    s: &AffineSubspace,
    target_dim: usize,
    rng: &mut impl Rng,
) -> Result<AffineSubspace> {
    let d = s.ambient_dim();
    let current = s.rank(field);
    if target_dim > d {
        return Err(param_err!("target dimension {target_dim} exceeds ambient dimension {d}"));
    }
    if target_dim < current {
        return Err(param_err!("target dimension {target_dim} is below dim(s) = {current}"));
    }
    let mut dirs = s.dirs.clone();
    let mut r = current;
    if r != dirs.len() {
        rref(field, &mut dirs);
    }
    while r < target_dim {
        let v = random_point(field, d, rng);
        dirs.push(v);
        if rank(field, &dirs) == r + 1 {
            r += 1;
        } else {
            dirs.pop();
        }
    }
    Ok(AffineSubspace { base: s.base.clone(), dirs })
}

/// All `target_dim`-dimensional subspaces containing `s`, canonical and sorted.
pub fn containing_subspaces(field: &Field, s: &AffineSubspace, target_dim: usize) -> Result<Vec<AffineSubspace>> {
    let d = s.ambient_dim();
    if target_dim > d {
        return Err(param_err!("target dimension {target_dim} exceeds ambient dimension {d}"));
    }
    let start = s.canonical(field);
    if start.dim() > target_dim {
        return Err(param_err!("subspace already has dimension {} > {target_dim}", start.dim()));
    }
    let vectors: Vec<Point> = all_points(field, d)?.collect();
    let mut level: Vec<AffineSubspace> = vec![start];
    while level[0].dim() < target_dim {
        let mut next = HashSet::new();
        for sub in &level {
            let pivots = sub.pivots();
            // quotient representatives: zero on the current pivot columns
            for v in vectors.iter().filter(|v| !is_zero_vec(v) && pivots.iter().all(|&c| v[c].is_zero())) {
                let mut dirs = sub.dirs.clone();
                dirs.push(v.clone());
                let ext = AffineSubspace { base: sub.base.clone(), dirs }.canonical(field);
                next.insert(ext);
            }
            if next.len() > ENUMERATION_BUDGET {
                return Err(Error::Resource("too many containing subspaces".into()));
            }
        }
        level = next.into_iter().collect();
    }
    level.sort();
    Ok(level)
}

/// A d×d matrix over F acting on column vectors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LinearMap {
    pub d: usize,
    /// Row-major entries.
    pub entries: Vec<Fe>,
}

impl LinearMap {
    pub fn identity(d: usize) -> Self {
        let mut entries = vec![Fe::ZERO; d * d];
        for i in 0..d {
            entries[i * d + i] = Fe::ONE;
        }
        LinearMap { d, entries }
    }

    pub fn from_rows(rows: &[Point]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(param_err!("matrix must be square"));
        }
        Ok(LinearMap { d, entries: rows.concat() })
    }

    pub fn row(&self, i: usize) -> &[Fe] {
        &self.entries[i * self.d..(i + 1) * self.d]
    }

    pub fn apply(&self, field: &Field, z: &[Fe]) -> Point {
        (0..self.d)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(z)
                    .fold(Fe::ZERO, |acc, (&m, &x)| field.add(acc, field.mul(m, x)))
            })
            .collect()
    }

    /// `self ∘ other`
    pub fn compose(&self, field: &Field, other: &LinearMap) -> LinearMap {
        let d = self.d;
        let mut entries = vec![Fe::ZERO; d * d];
        for i in 0..d {
            for j in 0..d {
                let mut acc = Fe::ZERO;
                for k in 0..d {
                    acc = field.add(acc, field.mul(self.entries[i * d + k], other.entries[k * d + j]));
                }
                entries[i * d + j] = acc;
            }
        }
        LinearMap { d, entries }
    }

    pub fn determinant(&self, field: &Field) -> Fe {
        let d = self.d;
        let mut m: Vec<Point> = (0..d).map(|i| self.row(i).to_vec()).collect();
        let mut det = Fe::ONE;
        for col in 0..d {
            let Some(p) = (col..d).find(|&i| !m[i][col].is_zero()) else {
                return Fe::ZERO;
            };
            m.swap(col, p); // sign is irrelevant in characteristic 2
            det = field.mul(det, m[col][col]);
            let inv = field.inv(m[col][col]).unwrap();
            for i in col + 1..d {
                if !m[i][col].is_zero() {
                    let c = field.mul(m[i][col], inv);
                    m[i] = vaxpy(field, &m[i], c, &m[col]);
                }
            }
        }
        det
    }

    pub fn is_invertible(&self, field: &Field) -> bool {
        !self.determinant(field).is_zero()
    }

    /// Gauss–Jordan inverse.
    pub fn inverse(&self, field: &Field) -> Result<LinearMap> {
        let d = self.d;
        let mut aug: Vec<Point> = (0..d)
            .map(|i| {
                let mut row = self.row(i).to_vec();
                row.extend((0..d).map(|j| if i == j { Fe::ONE } else { Fe::ZERO }));
                row
            })
            .collect();
        let pivots = rref(field, &mut aug);
        if pivots.len() < d || pivots[d - 1] != d - 1 {
            return Err(param_err!("linear map is singular"));
        }
        Ok(LinearMap { d, entries: aug.iter().flat_map(|r| r[d..].iter().copied()).collect() })
    }
}

/// Uniform over GL(d, F) by rejection sampling; also returns the number of draws.
pub fn random_invertible_map_counted(field: &Field, d: usize, rng: &mut impl Rng) -> (LinearMap, usize) {
    let q = field.order();
    let mut draws = 0;
    loop {
        draws += 1;
        let entries = (0..d * d).map(|_| Fe(rng.gen_range(0..q) as u16)).collect();
        let m = LinearMap { d, entries };
        if m.is_invertible(field) {
            return (m, draws);
        }
    }
}

pub fn random_invertible_map(field: &Field, d: usize, rng: &mut impl Rng) -> LinearMap {
    random_invertible_map_counted(field, d, rng).0
}

/// Solutions of `E(z)₁..E(z)_{d−1} = b`: returns `u = E⁻¹(b, 0)` and `v = E⁻¹(b, 1)`.
pub fn solve_line_from_prefix(field: &Field, e: &LinearMap, b: &[Fe]) -> Result<(Point, Point)> {
    if b.len() + 1 != e.d {
        return Err(param_err!("prefix has length {}, expected {}", b.len(), e.d - 1));
    }
    let inv = e.inverse(field)?;
    let mut rhs = b.to_vec();
    rhs.push(Fe::ZERO);
    let u = inv.apply(field, &rhs);
    *rhs.last_mut().unwrap() = Fe::ONE;
    let v = inv.apply(field, &rhs);
    Ok((u, v))
}

/// Same as [`solve_line_from_prefix`] with a precomputed inverse.
pub fn line_from_prefix_with_inverse(field: &Field, e_inv: &LinearMap, b: &[Fe]) -> (Point, Point) {
    let mut rhs = b.to_vec();
    rhs.push(Fe::ZERO);
    let u = e_inv.apply(field, &rhs);
    *rhs.last_mut().unwrap() = Fe::ONE;
    let v = e_inv.apply(field, &rhs);
    (u, v)
}

#[cfg(test)]
mod tests {
    use std::collections::{BTreeSet, HashMap};

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn gf(a: u32) -> Field {
        Field::with_degree(a).unwrap()
    }

    fn p(v: &[u16]) -> Point {
        v.iter().map(|&x| Fe(x)).collect()
    }

    fn point_set(field: &Field, line: &Line) -> BTreeSet<Point> {
        line.points(field).into_iter().collect()
    }

    /// Distinct point sets spanned by all pairs of distinct points.
    fn lines_by_dedup(field: &Field, d: usize) -> BTreeSet<BTreeSet<Point>> {
        let pts: Vec<Point> = all_points(field, d).unwrap().collect();
        let mut out = BTreeSet::new();
        for a in &pts {
            for b in &pts {
                if a < b {
                    out.insert(point_set(field, &line_through(a, b).unwrap()));
                }
            }
        }
        out
    }

    #[test]
    fn line_through_examples() {
        let f = gf(2);
        let l = line_through(&p(&[0, 0]), &p(&[1, 1])).unwrap();
        assert_eq!(l.base, p(&[0, 0]));
        assert_eq!(l.dir, p(&[1, 1]));
        assert_eq!(l.at(&f, Fe(0)), p(&[0, 0]));
        assert_eq!(l.at(&f, Fe(1)), p(&[1, 1]));
        assert_eq!(point_set(&f, &l).len(), 4);
        assert!(line_through(&p(&[2, 3]), &p(&[2, 3])).is_err());
    }

    #[test]
    fn plane_through_examples() {
        let f = gf(2);
        let pl = plane_through(&p(&[0, 0]), &p(&[0, 1]), &p(&[1, 0])).unwrap();
        let pts: BTreeSet<Point> = pl.points(&f).unwrap().into_iter().collect();
        assert_eq!(pts.len(), 16);
        assert_eq!(pl.at(&f, &p(&[1, 0])), p(&[1, 0]));
        assert_eq!(pl.at(&f, &p(&[0, 1])), p(&[0, 1]));
        assert_eq!(pl.at(&f, &p(&[0, 0])), p(&[0, 0]));

        // collinear: the parameterized set is the line, both generators kept
        let pl = plane_through(&p(&[0, 0]), &p(&[2, 2]), &p(&[1, 1])).unwrap();
        assert_eq!(pl.dim(), 2);
        assert_eq!(pl.rank(&f), 1);
        let pts: BTreeSet<Point> = pl.points(&f).unwrap().into_iter().collect();
        let line = line_through(&p(&[0, 0]), &p(&[1, 1])).unwrap();
        assert_eq!(pts, point_set(&f, &line));
        assert!(plane_through(&p(&[0, 0]), &p(&[0, 0]), &p(&[1, 1])).is_err());
    }

    #[test]
    fn canonical_line_examples() {
        let f = gf(2);
        let l = Line::new(p(&[1, 1]), p(&[2, 2])).unwrap();
        let c = l.canonical(&f);
        assert_eq!(c.dir, p(&[1, 1]));
        let min = point_set(&f, &l).into_iter().next().unwrap();
        assert_eq!(c.base, min);
        assert_eq!(c.canonical(&f), c);
        let a = line_through(&p(&[1, 2]), &p(&[3, 0])).unwrap();
        let b = line_through(&p(&[3, 0]), &p(&[1, 2])).unwrap();
        assert_eq!(a.canonical(&f), b.canonical(&f));
    }

    #[test]
    fn canonical_line_is_lexicographic_min_everywhere() {
        let f = gf(2);
        for line in lines_by_dedup(&f, 3).iter().map(|s| {
            let v: Vec<_> = s.iter().cloned().collect();
            line_through(&v[1], &v[2]).unwrap()
        }) {
            let c = line.canonical(&f);
            assert_eq!(&c.base, point_set(&f, &line).iter().next().unwrap());
            assert_eq!(point_set(&f, &c), point_set(&f, &line));
        }
    }

    #[test]
    fn all_lines_counts_match_dedup_oracle() {
        for (a, d, n_dirs, count) in [(2, 2, 5, 20), (1, 2, 3, 6), (1, 3, 7, 28), (2, 3, 21, 336)] {
            let f = gf(a);
            assert_eq!(direction_count(&f, d), n_dirs);
            let lines = all_lines(&f, d).unwrap();
            assert_eq!(lines.len(), count);
            let sets: BTreeSet<_> = lines.iter().map(|l| point_set(&f, l)).collect();
            assert_eq!(sets, lines_by_dedup(&f, d));
            assert!(lines.iter().all(|l| l.is_canonical(&f)));
        }
    }

    #[test]
    fn every_point_lies_on_n_lines() {
        let f = gf(2);
        for d in 2..=3 {
            let lines = all_lines(&f, d).unwrap();
            let n = direction_count(&f, d);
            let mut hits: HashMap<Point, usize> = HashMap::new();
            for l in &lines {
                for z in l.points(&f) {
                    *hits.entry(z).or_default() += 1;
                }
            }
            assert_eq!(hits.len(), f.order().pow(d as u32));
            assert!(hits.values().all(|&c| c == n));
            for z in all_points(&f, d).unwrap() {
                let through = lines_through(&f, &z).unwrap();
                assert_eq!(through.len(), n);
                assert!(through.iter().all(|l| l.contains(&f, &z) && lines.contains(l)));
            }
        }
    }

    #[test]
    fn smallest_affine_containing_examples() {
        let f = gf(2);
        let l = line_through(&p(&[0, 0, 0]), &p(&[1, 0, 0])).unwrap();
        let s = smallest_affine_containing(&f, &l, &[p(&[2, 0, 0]), p(&[3, 0, 0])]).unwrap();
        assert_eq!(s.dim(), 1);

        let tau = vec![p(&[0, 1, 0]), p(&[0, 1, 1])];
        assert_eq!(affine_span(&f, &tau).unwrap().dim(), 1);
        let s = smallest_affine_containing(&f, &l, &tau).unwrap();
        assert_eq!(s.dim(), 3);
        let c = s.canonical(&f);
        for z in l.points(&f).iter().chain(&tau) {
            assert!(c.contains(&f, z));
            assert!(c.coords(&f, z).is_some());
        }
    }

    #[test]
    fn canonical_subspace_is_description_independent() {
        let f = gf(2);
        let a = AffineSubspace::new(&f, p(&[1, 2, 3]), vec![p(&[1, 1, 0]), p(&[0, 1, 1])]).unwrap();
        let b = AffineSubspace::new(&f, p(&[0, 3, 3]), vec![p(&[1, 0, 1]), p(&[2, 2, 0])]).unwrap();
        let pa: BTreeSet<Point> = a.points(&f).unwrap().into_iter().collect();
        let pb: BTreeSet<Point> = b.points(&f).unwrap().into_iter().collect();
        assert_eq!(pa == pb, a.canonical(&f) == b.canonical(&f));
        assert!(AffineSubspace::new(&f, p(&[0, 0]), vec![p(&[1, 1]), p(&[2, 2])]).is_err());
    }

    #[test]
    fn random_extension_is_uniform_over_containing_planes() {
        let f = gf(2);
        let s = line_through(&p(&[0, 1, 2]), &p(&[3, 1, 0])).unwrap().as_subspace();
        let oracle = containing_subspaces(&f, &s, 2).unwrap();
        // planes through a line in F_4^3: (4^3 − 4)/(4^2 − 4) = 5
        assert_eq!(oracle.len(), 5);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let trials = 1000;
        let mut counts: HashMap<AffineSubspace, usize> = HashMap::new();
        for _ in 0..trials {
            let ext = random_extension_to_dim(&f, &s, 2, &mut rng).unwrap();
            assert!(ext.contains_subspace(&f, &s));
            *counts.entry(ext.canonical(&f)).or_default() += 1;
        }
        assert_eq!(counts.len(), oracle.len());
        let pr = 1.0 / oracle.len() as f64;
        let sigma = (trials as f64 * pr * (1.0 - pr)).sqrt();
        for sub in &oracle {
            let c = counts[sub] as f64;
            assert!((c - trials as f64 * pr).abs() <= 4.0 * sigma, "{c}");
        }
        assert_eq!(random_extension_to_dim(&f, &s, 1, &mut rng).unwrap(), s);
        assert!(random_extension_to_dim(&f, &s, 4, &mut rng).is_err());
    }

    #[test]
    fn gl2_over_gf2_acceptance_rate() {
        let f = gf(1);
        let all: Vec<LinearMap> = (0..16u16)
            .map(|bits| LinearMap { d: 2, entries: (0..4).map(|i| Fe((bits >> i) & 1)).collect() })
            .collect();
        let gl = all.iter().filter(|m| m.is_invertible(&f)).count();
        assert_eq!(gl, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (mut draws, accepted) = (0usize, 10_000usize);
        for _ in 0..accepted {
            draws += random_invertible_map_counted(&f, 2, &mut rng).1;
        }
        // each draw is Bernoulli(3/8); compare accepted/draws
        let pr = gl as f64 / 16.0;
        let rate = accepted as f64 / draws as f64;
        let sigma = (pr * (1.0 - pr) / draws as f64).sqrt();
        assert!((rate - pr).abs() <= 4.0 * sigma, "rate {rate}");
    }

    #[test]
    fn inverse_and_bijectivity() {
        let f = gf(2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let e = random_invertible_map(&f, 3, &mut rng);
            let inv = e.inverse(&f).unwrap();
            assert_eq!(e.compose(&f, &inv), LinearMap::identity(3));
            let image: BTreeSet<Point> = all_points(&f, 3).unwrap().map(|z| e.apply(&f, &z)).collect();
            assert_eq!(image.len(), 64);
        }
        let singular = LinearMap::from_rows(&[p(&[1, 2]), p(&[2, 3])]).unwrap();
        // 1·3 + 2·2 = 3 + 3 = 0 under x^2 + x + 1
        assert!(singular.determinant(&f).is_zero());
        assert!(singular.inverse(&f).is_err());
    }

    #[test]
    fn solve_line_from_prefix_examples() {
        let f = gf(3);
        let (u, v) = solve_line_from_prefix(&f, &LinearMap::identity(2), &[Fe(5)]).unwrap();
        assert_eq!((u, v), (p(&[5, 0]), p(&[5, 1])));

        let f = gf(2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let e = random_invertible_map(&f, 3, &mut rng);
            let b = random_point(&f, 2, &mut rng);
            let (u, v) = solve_line_from_prefix(&f, &e, &b).unwrap();
            assert_eq!(e.apply(&f, &u)[2], Fe::ZERO);
            assert_eq!(e.apply(&f, &v)[2], Fe::ONE);
            let line = line_through(&u, &v).unwrap();
            for t in f.enumerate() {
                let z = line.at(&f, t);
                let ez = e.apply(&f, &z);
                assert_eq!(&ez[..2], &b[..]);
                assert_eq!(ez[2], t);
            }
            // and the line is the full solution set
            let solutions = all_points(&f, 3).unwrap().filter(|z| e.apply(&f, z)[..2] == b[..]).count();
            assert_eq!(solutions, f.order());
        }
        assert!(solve_line_from_prefix(&f, &LinearMap { d: 2, entries: vec![Fe(0); 4] }, &[Fe(1)]).is_err());
    }

    #[test]
    fn prefix_line_direction_is_uniform() {
        let f = gf(2);
        let dirs = canonical_directions(&f, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let trials = 100_000;
        let mut counts: HashMap<Point, usize> = HashMap::new();
        for _ in 0..trials {
            let e = random_invertible_map(&f, 2, &mut rng);
            let (u, v) = solve_line_from_prefix(&f, &e, &[Fe(0)]).unwrap();
            let l = line_through(&u, &v).unwrap().canonical(&f);
            *counts.entry(l.dir).or_default() += 1;
        }
        let expected = trials as f64 / dirs.len() as f64;
        let chi2: f64 = dirs
            .iter()
            .map(|d| (counts.get(d).copied().unwrap_or(0) as f64 - expected).powi(2) / expected)
            .sum();
        // 4 degrees of freedom: mean 4, sd sqrt(8)
        assert!(chi2 <= 4.0 + 4.0 * 8f64.sqrt(), "chi2 = {chi2}");
    }

    #[test]
    fn reparam_between_descriptions() {
        let f = gf(2);
        let l = line_through(&p(&[1, 2]), &p(&[3, 3])).unwrap();
        let c = l.canonical(&f);
        let (mu, lambda) = l.reparam_to(&f, &c).unwrap();
        for t in f.enumerate() {
            assert_eq!(l.at(&f, t), c.at(&f, f.add(mu, f.mul(lambda, t))));
        }
    }
}
