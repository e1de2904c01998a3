//! Binary extension fields GF(2^a) with an explicit irreducible modulus.
//!
//! Elements are bare encodings ([`Fe`]); the owning [`Field`] carries the
//! modulus and the exp/log tables used for multiplication. Addition is XOR.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{param_err, Error, Result};

/// Largest supported extension degree.
pub const MAX_DEGREE: u32 = 16;

/// A field element, encoded as the coefficient bits of a polynomial of degree < a.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Fe(pub u16);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Serialized description of a field: `{a, modulus_bits}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldParams {
    pub a: u32,
    /// Bit encoding of the modulus, including the leading x^a term.
    pub modulus_bits: u32,
}

impl FieldParams {
    /// The default modulus for GF(2^a).
    pub fn default_for(a: u32) -> Result<Self> {
        if a == 0 || a > MAX_DEGREE {
            return Err(param_err!("extension degree {a} outside 1..={MAX_DEGREE}"));
        }
        let modulus_bits = match a {
            1 => 0b11,
            2 => 0b111,
            3 => 0b1011,
            4 => 0b1_0011,
            5 => 0b10_0101,
            6 => 0b100_0011,
            7 => 0b1000_0011,
            8 => 0x11b,
            _ => smallest_irreducible(a),
        };
        Ok(FieldParams { a, modulus_bits })
    }

    pub fn order(&self) -> usize {
        1usize << self.a
    }
}

fn smallest_irreducible(a: u32) -> u32 {
    let lo = 1u32 << a;
    (lo..lo << 1)
        .find(|&m| is_irreducible(m, a))
        .expect("an irreducible polynomial exists for every degree")
}

/// Remainder of `num` modulo `modulus` in GF(2)[x].
pub(crate) fn poly_rem(mut num: u64, modulus: u64) -> u64 {
    debug_assert!(modulus != 0);
    let mdeg = 63 - modulus.leading_zeros();
    while num != 0 {
        let ndeg = 63 - num.leading_zeros();
        if ndeg < mdeg {
            break;
        }
        num ^= modulus << (ndeg - mdeg);
    }
    num
}

/// Carry-less product in GF(2)[x].
pub(crate) fn clmul(a: u64, b: u64) -> u64 {
    let mut acc = 0u64;
    let mut b = b;
    let mut shift = 0;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a << shift;
        }
        b >>= 1;
        shift += 1;
    }
    acc
}

/// Exhaustive trial division by every polynomial of degree 1..=a/2.
pub fn is_irreducible(modulus_bits: u32, a: u32) -> bool {
    if a == 0 || a > MAX_DEGREE || modulus_bits >> a != 1 {
        return false;
    }
    let m = modulus_bits as u64;
    for deg in 1..=a / 2 {
        for g in (1u64 << deg)..(1u64 << (deg + 1)) {
            if poly_rem(m, g) == 0 {
                return false;
            }
        }
    }
    true
}

struct Tables {
    params: FieldParams,
    order: usize,
    /// `exp[i] = g^i`, doubled so that `exp[log x + log y]` never wraps.
    exp: Vec<u16>,
    log: Vec<u32>,
}

/// GF(2^a). Cheap to clone; all clones share one set of tables.
#[derive(Clone)]
pub struct Field {
    inner: Arc<Tables>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{}; {:#b})", self.inner.params.a, self.inner.params.modulus_bits)
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.inner.params == other.inner.params
    }
}

impl Eq for Field {}

impl Serialize for Field {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.inner.params.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Field {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let params = FieldParams::deserialize(d)?;
        Field::new(params).map_err(serde::de::Error::custom)
    }
}

impl Field {
    pub fn new(params: FieldParams) -> Result<Self> {
        let a = params.a;
        if a == 0 || a > MAX_DEGREE {
            return Err(param_err!("extension degree {a} outside 1..={MAX_DEGREE}"));
        }
        if !is_irreducible(params.modulus_bits, a) {
            return Err(param_err!(
                "modulus {:#b} is not an irreducible polynomial of degree {a}",
                params.modulus_bits
            ));
        }
        let order = params.order();
        let m = params.modulus_bits as u64;
        let slow_mul = |x: u64, y: u64| poly_rem(clmul(x, y), m);

        let group = order - 1;
        let prime_factors = prime_factors(group);
        let generator = (1..order as u64)
            .find(|&g| {
                prime_factors
                    .iter()
                    .all(|&p| pow_slow(g, (group / p) as u64, &slow_mul) != 1)
            })
            .expect("the multiplicative group of a finite field is cyclic");

        let mut exp = vec![0u16; 2 * group];
        let mut log = vec![0u32; order];
        let mut x = 1u64;
        for i in 0..group {
            exp[i] = x as u16;
            exp[i + group] = x as u16;
            log[x as usize] = i as u32;
            x = slow_mul(x, generator);
        }
        Ok(Field { inner: Arc::new(Tables { params, order, exp, log }) })
    }

    /// GF(2^a) with the default modulus.
    pub fn with_degree(a: u32) -> Result<Self> {
        Field::new(FieldParams::default_for(a)?)
    }

    pub fn params(&self) -> FieldParams {
        self.inner.params
    }

    pub fn degree(&self) -> u32 {
        self.inner.params.a
    }

    /// |F| = 2^a.
    #[inline]
    pub fn order(&self) -> usize {
        self.inner.order
    }

    pub fn elem(&self, value: usize) -> Result<Fe> {
        if value >= self.order() {
            return Err(param_err!("value {value} is not an element of GF({})", self.order()));
        }
        Ok(Fe(value as u16))
    }

    #[inline]
    pub fn contains(&self, x: Fe) -> bool {
        x.index() < self.order()
    }

    fn check(&self, x: Fe) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(param_err!("element {x} belongs to a larger field than GF({})", self.order()))
        }
    }

    #[inline]
    pub fn add(&self, x: Fe, y: Fe) -> Fe {
        Fe(x.0 ^ y.0)
    }

    /// Same as [`Field::add`]; characteristic 2.
    #[inline]
    pub fn sub(&self, x: Fe, y: Fe) -> Fe {
        Fe(x.0 ^ y.0)
    }

    #[inline]
    pub fn mul(&self, x: Fe, y: Fe) -> Fe {
        if x.0 == 0 || y.0 == 0 {
            return Fe::ZERO;
        }
        let t = &self.inner;
        Fe(t.exp[(t.log[x.index()] + t.log[y.index()]) as usize])
    }

    /// Addition that rejects operands from a different (larger) field.
    pub fn try_add(&self, x: Fe, y: Fe) -> Result<Fe> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.add(x, y))
    }

    /// Multiplication that rejects operands from a different (larger) field.
    pub fn try_mul(&self, x: Fe, y: Fe) -> Result<Fe> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.mul(x, y))
    }

    pub fn inv(&self, x: Fe) -> Result<Fe> {
        self.check(x)?;
        if x.is_zero() {
            return Err(Error::Domain("zero has no multiplicative inverse".into()));
        }
        let t = &self.inner;
        let group = (t.order - 1) as u32;
        let l = t.log[x.index()];
        Ok(Fe(t.exp[((group - l) % group) as usize]))
    }

    pub fn div(&self, x: Fe, y: Fe) -> Result<Fe> {
        Ok(self.mul(x, self.inv(y)?))
    }

    pub fn pow(&self, x: Fe, e: u64) -> Fe {
        if e == 0 {
            return Fe::ONE;
        }
        if x.is_zero() {
            return Fe::ZERO;
        }
        let t = &self.inner;
        let group = (t.order - 1) as u64;
        let l = (t.log[x.index()] as u64 * (e % group)) % group;
        Fe(t.exp[l as usize])
    }

    /// All elements in increasing order of their encodings.
    pub fn enumerate(&self) -> impl Iterator<Item = Fe> + Clone {
        (0..self.order()).map(|v| Fe(v as u16))
    }

    /// The first `size` elements of the enumeration order.
    pub fn subset_h(&self, size: usize) -> Result<Vec<Fe>> {
        if size == 0 || size > self.order() {
            return Err(param_err!("|H| = {size} must be in 1..={}", self.order()));
        }
        Ok(self.enumerate().take(size).collect())
    }
}

fn pow_slow(mut base: u64, mut e: u64, mul: &impl Fn(u64, u64) -> u64) -> u64 {
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(acc, base);
        }
        base = mul(base, base);
        e >>= 1;
    }
    acc
}

fn prime_factors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}
