//! Prime and extension fields of desk-scale size.
//!
//! Elements are stored as their index `Σ c_i p^i`, where `c_i` is the
//! coefficient of `t^i` in the residue modulo the defining polynomial. The
//! prime subfield is therefore the index range `0..p`. Multiplication goes
//! through discrete log tables built from an exhaustively found primitive
//! root; extension-field addition uses a table when `q` is small.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest field order we build tables for.
pub const MAX_FIELD_ORDER: u64 = 1 << 20;
const ADD_TABLE_MAX_Q: u32 = 1024;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Elem(pub u32);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// The `"p"` / `"p^l"` literal naming a field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    pub l: u32,
}

impl FieldSpec {
    pub fn new(p: u32, l: u32) -> Self {
        FieldSpec { p, l }
    }

    pub fn order(&self) -> u64 {
        (self.p as u64).pow(self.l)
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.l == 1 {
            write!(f, "{}", self.p)
        } else {
            write!(f, "{}^{}", self.p, self.l)
        }
    }
}

impl FromStr for FieldSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::FieldSyntax(s.to_string());
        let (p, l) = match s.split_once('^') {
            Some((p, l)) => (p.trim(), l.trim()),
            None => (s, "1"),
        };
        let p: u32 = p.parse().map_err(|_| bad())?;
        let l: u32 = l.parse().map_err(|_| bad())?;
        if l == 0 {
            return Err(bad());
        }
        Ok(FieldSpec { p, l })
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// A finite field `F_q`, `q = p^l`.
#[derive(Clone)]
pub struct Field {
    p: u32,
    l: u32,
    q: u32,
    /// Monic defining polynomial, low degree first, length `l + 1`.
    modulus: Vec<u32>,
    generator: Elem,
    exp: Vec<u32>,
    log: Vec<u32>,
    neg: Vec<u32>,
    add: Option<Vec<u16>>,
    trace: Vec<u32>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("p", &self.p)
            .field("l", &self.l)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.l == other.l && self.modulus == other.modulus
    }
}

impl Eq for Field {}

// Dense residue arithmetic used only while building tables.
fn digits_of(mut x: u32, p: u32, l: u32) -> Vec<u32> {
    (0..l)
        .map(|_| {
            let d = x % p;
            x /= p;
            d
        })
        .collect()
}

fn index_of(digits: &[u32], p: u32) -> u32 {
    digits.iter().rev().fold(0, |acc, &d| acc * p + d)
}

fn mul_mod_poly(a: &[u32], b: &[u32], modulus: &[u32], p: u32) -> Vec<u32> {
    let l = modulus.len() - 1;
    let mut prod = vec![0u64; a.len() + b.len()];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    for k in (l..prod.len()).rev() {
        let c = prod[k];
        if c == 0 {
            continue;
        }
        prod[k] = 0;
        for i in 0..l {
            let sub = c * modulus[i] as u64 % p as u64;
            prod[k - l + i] = (prod[k - l + i] + p as u64 - sub) % p as u64;
        }
    }
    prod.truncate(l);
    prod.resize(l, 0);
    prod.into_iter().map(|c| c as u32).collect()
}

/// Remainder of `a` modulo the monic `b` over `F_p` (both low degree first).
fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r: Vec<u64> = a.iter().map(|&c| c as u64).collect();
    let db = b.len() - 1;
    while r.len() > db {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - db;
        if lead != 0 {
            for i in 0..=db {
                let sub = lead * b[i] as u64 % p as u64;
                r[shift + i] = (r[shift + i] + p as u64 - sub) % p as u64;
            }
        }
        r.pop();
    }
    r.into_iter().map(|c| c as u32).collect()
}

fn is_irreducible(f: &[u32], p: u32) -> bool {
    let deg = f.len() - 1;
    if deg <= 1 {
        return true;
    }
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for idx in 0..count {
            let mut g = digits_of(idx as u32, p, d as u32);
            g.push(1);
            if poly_rem(f, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// Lexicographically least monic irreducible polynomial of degree `l`,
/// ordered by the index of its non-leading coefficients.
fn least_irreducible(p: u32, l: u32) -> Vec<u32> {
    if l == 1 {
        return vec![0, 1];
    }
    let count = (p as u64).pow(l);
    for idx in 0..count {
        let mut f = digits_of(idx as u32, p, l);
        f.push(1);
        if f[0] != 0 && is_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

impl Field {
    pub fn prime(p: u32) -> Result<Field> {
        Field::new(p, 1)
    }

    pub fn from_spec(spec: FieldSpec) -> Result<Field> {
        Field::new(spec.p, spec.l)
    }

    pub fn new(p: u32, l: u32) -> Result<Field> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        let q = (p as u64).checked_pow(l).filter(|&q| q <= MAX_FIELD_ORDER);
        let q = q.ok_or(Error::FieldTooLarge { p: p as u64, l })? as u32;
        let modulus = least_irreducible(p, l);

        let slow_mul = |a: u32, b: u32| -> u32 {
            if l == 1 {
                return ((a as u64 * b as u64) % p as u64) as u32;
            }
            let r = mul_mod_poly(&digits_of(a, p, l), &digits_of(b, p, l), &modulus, p);
            index_of(&r, p)
        };

        // Primitive root: exhaustive order test from 2 upward.
        let order = (q - 1) as u64;
        let factors = prime_factors(order);
        let slow_pow = |mut base: u32, mut e: u64| -> u32 {
            let mut acc = 1u32;
            while e > 0 {
                if e & 1 == 1 {
                    acc = slow_mul(acc, base);
                }
                base = slow_mul(base, base);
                e >>= 1;
            }
            acc
        };
        let generator = if q == 2 {
            1
        } else {
            (2..q)
                .find(|&g| factors.iter().all(|&r| slow_pow(g, order / r) != 1))
                .expect("multiplicative group is cyclic")
        };

        let mut exp = Vec::with_capacity(q as usize - 1);
        let mut log = vec![0u32; q as usize];
        let mut x = 1u32;
        for i in 0..q - 1 {
            exp.push(x);
            log[x as usize] = i;
            x = slow_mul(x, generator);
        }

        let neg: Vec<u32> = (0..q)
            .map(|a| {
                let d: Vec<u32> = digits_of(a, p, l).iter().map(|&c| (p - c) % p).collect();
                index_of(&d, p)
            })
            .collect();

        let add_digits = |a: u32, b: u32| -> u32 {
            let (da, db) = (digits_of(a, p, l), digits_of(b, p, l));
            let d: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
            index_of(&d, p)
        };
        let add = if l > 1 && q <= ADD_TABLE_MAX_Q {
            let mut t = vec![0u16; (q * q) as usize];
            for a in 0..q {
                for b in 0..q {
                    t[(a * q + b) as usize] = add_digits(a, b) as u16;
                }
            }
            Some(t)
        } else {
            None
        };

        let mut field = Field {
            p,
            l,
            q,
            modulus,
            generator: Elem(generator),
            exp,
            log,
            neg,
            add,
            trace: Vec::new(),
        };
        let trace: Vec<u32> = (0..q)
            .map(|a| {
                let mut acc = Elem::ZERO;
                let mut y = Elem(a);
                for _ in 0..l {
                    acc = field.add(acc, y);
                    y = field.pow(y, p as u64);
                }
                debug_assert!(acc.0 < p, "trace must land in the prime field");
                acc.0
            })
            .collect();
        field.trace = trace;
        Ok(field)
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    /// Extension degree over the prime field.
    #[inline]
    pub fn degree(&self) -> u32 {
        self.l
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.q
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.q as usize
    }

    pub fn spec(&self) -> FieldSpec {
        FieldSpec { p: self.p, l: self.l }
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn generator(&self) -> Elem {
        self.generator
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> + Clone {
        (0..self.q).map(Elem)
    }

    /// Coefficients of `x` in the basis `1, t, …, t^{l-1}`.
    pub fn coeffs(&self, x: Elem) -> Vec<u32> {
        digits_of(x.0, self.p, self.l)
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<Elem> {
        if coeffs.len() > self.l as usize {
            return Err(Error::DimensionMismatch { expected: self.l as usize, got: coeffs.len() });
        }
        let mut d: Vec<u32> = coeffs.iter().map(|&c| c % self.p).collect();
        d.resize(self.l as usize, 0);
        Ok(Elem(index_of(&d, self.p)))
    }

    /// Image of an integer in the prime field.
    pub fn from_i64(&self, v: i64) -> Elem {
        Elem(v.rem_euclid(self.p as i64) as u32)
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        if self.l == 1 {
            let s = a.0 + b.0;
            return Elem(if s >= self.p { s - self.p } else { s });
        }
        match &self.add {
            Some(t) => Elem(t[(a.0 * self.q + b.0) as usize] as u32),
            None => {
                let (mut x, mut y, mut out, mut place) = (a.0, b.0, 0u32, 1u32);
                while x > 0 || y > 0 {
                    out += ((x % self.p + y % self.p) % self.p) * place;
                    x /= self.p;
                    y /= self.p;
                    place *= self.p;
                }
                Elem(out)
            }
        }
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        Elem(self.neg[a.index()])
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a.0 == 0 || b.0 == 0 {
            return Elem::ZERO;
        }
        if self.l == 1 {
            return Elem(((a.0 as u64 * b.0 as u64) % self.p as u64) as u32);
        }
        let s = self.log[a.index()] + self.log[b.index()];
        let n = self.q - 1;
        Elem(self.exp[(if s >= n { s - n } else { s }) as usize])
    }

    /// `a * b + c`
    #[inline]
    pub fn mul_add(&self, a: Elem, b: Elem, c: Elem) -> Elem {
        self.add(self.mul(a, b), c)
    }

    pub fn inv(&self, a: Elem) -> Option<Elem> {
        if a.is_zero() {
            return None;
        }
        let n = self.q - 1;
        Some(Elem(self.exp[((n - self.log[a.index()]) % n) as usize]))
    }

    pub fn div(&self, a: Elem, b: Elem) -> Option<Elem> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    /// `a^e` with `0^0 = 1`.
    pub fn pow(&self, a: Elem, e: u64) -> Elem {
        if e == 0 {
            return Elem::ONE;
        }
        if a.is_zero() {
            return Elem::ZERO;
        }
        let n = (self.q - 1) as u64;
        let k = (self.log[a.index()] as u64 * (e % n)) % n;
        Elem(self.exp[k as usize])
    }

    /// Discrete log with respect to [`Field::generator`].
    pub fn log(&self, a: Elem) -> Option<u32> {
        (!a.is_zero()).then(|| self.log[a.index()])
    }

    pub fn exp(&self, k: u64) -> Elem {
        Elem(self.exp[(k % (self.q as u64 - 1)) as usize])
    }

    /// Absolute trace to `F_p`, returned as a residue in `0..p`.
    #[inline]
    pub fn trace(&self, x: Elem) -> u32 {
        self.trace[x.index()]
    }

    /// Multiplicative order of a nonzero element.
    pub fn order_of(&self, a: Elem) -> Option<u64> {
        let lg = self.log(a)? as u64;
        let n = (self.q - 1) as u64;
        Some(n / gcd(lg, n))
    }

    /// Degree-`r` extension with the same conventions.
    pub fn extension(&self, r: u32) -> Result<Field> {
        Field::new(self.p, self.l * r)
    }

    /// Field embedding of `self` into `big`, sending `t` to the least root of
    /// this field's modulus.
    pub fn embedding_into(&self, big: &Field) -> Result<Embedding> {
        let err = Error::NoEmbedding { from: self.q as u64, into: big.q as u64 };
        if self.p != big.p || big.l % self.l != 0 {
            return Err(err);
        }
        let root = if self.l == 1 {
            Elem::ZERO
        } else {
            big.elements()
                .find(|&x| {
                    let mut acc = Elem::ZERO;
                    for &c in self.modulus.iter().rev() {
                        acc = big.add(big.mul(acc, x), Elem(c));
                    }
                    acc.is_zero()
                })
                .ok_or(err)?
        };
        let table = self
            .elements()
            .map(|x| {
                let mut acc = Elem::ZERO;
                for c in self.coeffs(x).into_iter().rev() {
                    acc = big.add(big.mul(acc, root), Elem(c));
                }
                acc
            })
            .collect();
        Ok(Embedding { table })
    }

    /// Canonical enumeration rank used for ordering slice values: `0, 1, …, p-1`
    /// and then digitwise for extension elements, which is the index order.
    pub fn canonical_order(&self) -> Vec<Elem> {
        self.elements().collect()
    }
}

#[derive(Clone, Debug)]
pub struct Embedding {
    table: Vec<Elem>,
}

impl Embedding {
    #[inline]
    pub fn apply(&self, x: Elem) -> Elem {
        self.table[x.index()]
    }
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// The unique subgroup of order `m` in `k*`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgroupDelta {
    m: u32,
    generator: Elem,
    elements: Vec<Elem>,
    step: u32,
}

impl SubgroupDelta {
    pub fn find(field: &Field, m: u32) -> Result<SubgroupDelta> {
        let n = field.q() - 1;
        if m == 0 || n % m != 0 {
            return Err(Error::NonDivisor { m: m as u64, q_minus_one: n as u64 });
        }
        let step = n / m;
        let generator = field.exp(step as u64);
        let elements = (0..m).map(|j| field.exp(step as u64 * j as u64)).collect();
        Ok(SubgroupDelta { m, generator, elements, step })
    }

    pub fn order(&self) -> u32 {
        self.m
    }

    pub fn generator(&self) -> Elem {
        self.generator
    }

    /// Elements as successive powers of the generator: `elements()[j] = g^j`.
    pub fn elements(&self) -> &[Elem] {
        &self.elements
    }

    pub fn contains(&self, field: &Field, x: Elem) -> bool {
        field.log(x).is_some_and(|lg| lg % self.step == 0)
    }

    /// The exponent `j` with `x = g^j`, if `x` lies in the subgroup.
    pub fn log(&self, field: &Field, x: Elem) -> Option<u32> {
        let lg = field.log(x)?;
        (lg % self.step == 0).then(|| lg / self.step)
    }
}
