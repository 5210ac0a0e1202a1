//! Prime fields `F_p` and small extensions `F_{p^e} = F_p[t]/(f)`.
//!
//! Elements are plain `Copy` values ([`Fe`]); all arithmetic goes through a
//! shared, immutable [`FieldCtx`] which knows the characteristic and the
//! defining modulus.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

/// Largest supported extension degree.
pub const MAX_EXT_DEGREE: usize = 4;

/// Characteristics must stay below this bound so that products of two
/// reduced coefficients fit in a `u64`.
pub const MAX_CHARACTERISTIC: u64 = 1 << 31;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("characteristic {0} is not prime")]
    CompositeCharacteristic(u64),
    #[error("modulus {0:?} is reducible over F_{1}")]
    ReducibleModulus(Vec<u64>, u64),
    #[error("invalid modulus: {0}")]
    BadModulus(String),
    #[error("extension degree {0} is outside 1..={MAX_EXT_DEGREE}")]
    UnsupportedDegree(usize),
    #[error("characteristic {0} is too large (limit 2^31)")]
    CharacteristicTooLarge(u64),
}

impl FieldError {
    pub fn code(&self) -> &'static str {
        match self {
            FieldError::CompositeCharacteristic(_) => "composite-characteristic",
            FieldError::ReducibleModulus(..) => "reducible-modulus",
            FieldError::BadModulus(_) => "bad-modulus",
            FieldError::UnsupportedDegree(_) => "unsupported-degree",
            FieldError::CharacteristicTooLarge(_) => "characteristic-too-large",
        }
    }
}

/// A field element: the coefficient vector `c_0 + c_1 t + ... + c_{e-1} t^{e-1}`,
/// every entry reduced into `[0, p)`. Unused trailing slots are always zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Fe([u64; MAX_EXT_DEGREE]);

impl Fe {
    pub const ZERO: Fe = Fe([0; MAX_EXT_DEGREE]);

    pub fn coeffs(&self) -> &[u64; MAX_EXT_DEGREE] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Value of a prime-field element (the constant coefficient).
    pub fn value(&self) -> u64 {
        self.0[0]
    }
}

impl fmt::Debug for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0[1..].iter().all(|&c| c == 0) {
            write!(f, "{}", self.0[0])
        } else {
            write!(f, "{:?}", self.0)
        }
    }
}

struct Inner {
    p: u64,
    e: usize,
    /// Monic modulus, low degree first, length `e + 1`. `[0, 1]` for prime fields.
    modulus: Vec<u64>,
}

/// Handle to an immutable field description; cheap to clone and share.
#[derive(Clone)]
pub struct FieldCtx(Arc<Inner>);

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p && self.0.e == other.0.e && self.0.modulus == other.0.modulus)
    }
}

impl Eq for FieldCtx {}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.e == 1 {
            write!(f, "F_{}", self.0.p)
        } else {
            write!(f, "F_{}^{} mod {:?}", self.0.p, self.0.e, self.0.modulus)
        }
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n % 2 == 0 {
        return false;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Primes in `[lo, hi]`, ascending.
pub fn primes_in(lo: u64, hi: u64) -> Vec<u64> {
    (lo..=hi).filter(|&n| is_prime(n)).collect()
}

impl FieldCtx {
    /// Builds `F_{p^e}`. For `e > 1` an explicit monic modulus (low degree first,
    /// length `e + 1`) may be given; otherwise the first irreducible monic
    /// polynomial in lexicographic order of its coefficients is used.
    pub fn new(p: u64, e: usize, modulus: Option<&[u64]>) -> Result<Self, FieldError> {
        if p >= MAX_CHARACTERISTIC {
            return Err(FieldError::CharacteristicTooLarge(p));
        }
        if !is_prime(p) {
            return Err(FieldError::CompositeCharacteristic(p));
        }
        if e == 0 || e > MAX_EXT_DEGREE {
            return Err(FieldError::UnsupportedDegree(e));
        }
        let modulus = match modulus {
            Some(m) => {
                let m: Vec<u64> = m.iter().map(|&c| c % p).collect();
                if m.len() != e + 1 {
                    return Err(FieldError::BadModulus(format!(
                        "expected {} coefficients for degree {e}, got {}",
                        e + 1,
                        m.len()
                    )));
                }
                if m[e] != 1 {
                    return Err(FieldError::BadModulus("modulus must be monic".into()));
                }
                if !is_irreducible(&m, p) {
                    return Err(FieldError::ReducibleModulus(m, p));
                }
                m
            }
            None if e == 1 => vec![0, 1],
            None => first_irreducible(p, e),
        };
        Ok(FieldCtx(Arc::new(Inner { p, e, modulus })))
    }

    pub fn prime(p: u64) -> Result<Self, FieldError> {
        Self::new(p, 1, None)
    }

    /// The prime subfield of this field.
    pub fn prime_subfield(&self) -> FieldCtx {
        if self.0.e == 1 {
            self.clone()
        } else {
            FieldCtx(Arc::new(Inner { p: self.0.p, e: 1, modulus: vec![0, 1] }))
        }
    }

    pub fn p(&self) -> u64 {
        self.0.p
    }

    pub fn degree(&self) -> usize {
        self.0.e
    }

    pub fn modulus(&self) -> &[u64] {
        &self.0.modulus
    }

    pub fn is_prime_field(&self) -> bool {
        self.0.e == 1
    }

    /// Number of elements, `p^e`.
    pub fn size(&self) -> u128 {
        (self.0.p as u128).pow(self.0.e as u32)
    }

    pub fn zero(&self) -> Fe {
        Fe::ZERO
    }

    pub fn one(&self) -> Fe {
        self.from_u64(1)
    }

    pub fn from_u64(&self, n: u64) -> Fe {
        let mut c = [0; MAX_EXT_DEGREE];
        c[0] = n % self.0.p;
        Fe(c)
    }

    pub fn from_i64(&self, n: i64) -> Fe {
        let p = self.0.p as i64;
        self.from_u64(n.rem_euclid(p) as u64)
    }

    /// Element with the given coefficient vector (low degree first); entries are
    /// reduced mod `p`. Returns `None` if more than `e` coefficients are nonzero-padded.
    pub fn from_coeffs(&self, coeffs: &[u64]) -> Option<Fe> {
        let e = self.0.e;
        if coeffs.iter().skip(e).any(|&c| c % self.0.p != 0) {
            return None;
        }
        let mut c = [0; MAX_EXT_DEGREE];
        for (slot, &v) in c.iter_mut().zip(coeffs.iter().take(e)) {
            *slot = v % self.0.p;
        }
        Some(Fe(c))
    }

    /// The class of `t` in `F_p[t]/(f)`; `None` for prime fields.
    pub fn generator(&self) -> Option<Fe> {
        if self.0.e == 1 {
            None
        } else {
            let mut c = [0; MAX_EXT_DEGREE];
            c[1] = 1;
            Some(Fe(c))
        }
    }

    pub fn coeffs<'a>(&self, a: &'a Fe) -> &'a [u64] {
        &a.0[..self.0.e]
    }

    /// `Some(v)` when `a` lies in the prime subfield.
    pub fn in_prime_field(&self, a: Fe) -> Option<u64> {
        if a.0[1..].iter().all(|&c| c == 0) {
            Some(a.0[0])
        } else {
            None
        }
    }

    /// Maps an element of another field with the same characteristic into this
    /// one. Only prime-subfield elements (or elements of an identical field)
    /// can be transported.
    pub fn embed(&self, from: &FieldCtx, a: Fe) -> Option<Fe> {
        if from.p() != self.p() {
            return None;
        }
        if from == self {
            return Some(a);
        }
        from.in_prime_field(a).map(|v| self.from_u64(v))
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        let p = self.0.p;
        let mut c = [0; MAX_EXT_DEGREE];
        for k in 0..self.0.e {
            let s = a.0[k] + b.0[k];
            c[k] = if s >= p { s - p } else { s };
        }
        Fe(c)
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        let p = self.0.p;
        let mut c = [0; MAX_EXT_DEGREE];
        for k in 0..self.0.e {
            c[k] = if a.0[k] >= b.0[k] { a.0[k] - b.0[k] } else { a.0[k] + p - b.0[k] };
        }
        Fe(c)
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        self.sub(Fe::ZERO, a)
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        let p = self.0.p;
        let e = self.0.e;
        if e == 1 {
            let mut c = [0; MAX_EXT_DEGREE];
            c[0] = a.0[0] * b.0[0] % p;
            return Fe(c);
        }
        let mut prod = [0u64; 2 * MAX_EXT_DEGREE - 1];
        for i in 0..e {
            if a.0[i] == 0 {
                continue;
            }
            for j in 0..e {
                prod[i + j] = (prod[i + j] + a.0[i] * b.0[j]) % p;
            }
        }
        let m = &self.0.modulus;
        for k in (e..2 * e - 1).rev() {
            let top = prod[k];
            if top == 0 {
                continue;
            }
            // t^e = -(m_0 + ... + m_{e-1} t^{e-1})
            for j in 0..e {
                prod[k - e + j] = (prod[k - e + j] + (p - m[j]) * top) % p;
            }
            prod[k] = 0;
        }
        let mut c = [0; MAX_EXT_DEGREE];
        c[..e].copy_from_slice(&prod[..e]);
        Fe(c)
    }

    /// `a * b + c`
    #[inline]
    pub fn mul_add(&self, a: Fe, b: Fe, c: Fe) -> Fe {
        self.add(self.mul(a, b), c)
    }

    pub fn pow(&self, a: Fe, mut n: u128) -> Fe {
        let mut base = a;
        let mut acc = self.one();
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            n >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: Fe) -> Option<Fe> {
        if a.is_zero() {
            return None;
        }
        let p = self.0.p;
        if self.0.e == 1 {
            return Some(self.pow(a, (p - 2) as u128));
        }
        let a_poly: Vec<u64> = trim(a.0[..self.0.e].to_vec());
        let inv = poly_inv_mod(&a_poly, &self.0.modulus, p)?;
        self.from_coeffs(&inv)
    }

    pub fn div(&self, a: Fe, b: Fe) -> Option<Fe> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    /// `a^p`; the identity on the prime subfield.
    pub fn frobenius(&self, a: Fe) -> Fe {
        if self.0.e == 1 {
            a
        } else {
            self.pow(a, self.0.p as u128)
        }
    }

    /// Inverse of [`FieldCtx::frobenius`], i.e. `a^(p^(e-1))`.
    pub fn frobenius_inv(&self, a: Fe) -> Fe {
        let mut x = a;
        for _ in 1..self.0.e {
            x = self.frobenius(x);
        }
        x
    }

    /// Element number `index` in the canonical enumeration: base-`p` digits of
    /// `index` are the coefficients, lowest first.
    pub fn element(&self, mut index: u128) -> Fe {
        let p = self.0.p as u128;
        let mut c = [0; MAX_EXT_DEGREE];
        for slot in c.iter_mut().take(self.0.e) {
            *slot = (index % p) as u64;
            index /= p;
        }
        Fe(c)
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Fe {
        let mut c = [0; MAX_EXT_DEGREE];
        for slot in c.iter_mut().take(self.0.e) {
            *slot = rng.gen_range(0..self.0.p);
        }
        Fe(c)
    }

    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> Fe {
        loop {
            let a = self.random(rng);
            if !a.is_zero() {
                return a;
            }
        }
    }

    /// Symmetric representative of a prime-field element, in `(-p/2, p/2]`.
    pub fn signed(&self, v: u64) -> i64 {
        let p = self.0.p;
        if v > p / 2 {
            v as i64 - p as i64
        } else {
            v as i64
        }
    }

    /// Canonical text: the integer in `[0, p)` for prime fields, the coefficient
    /// vector `[c0, c1, ...]` otherwise.
    pub fn display(&self, a: Fe) -> String {
        if self.0.e == 1 {
            a.0[0].to_string()
        } else {
            let parts: Vec<String> = a.0[..self.0.e].iter().map(|c| c.to_string()).collect();
            format!("[{}]", parts.join(", "))
        }
    }

    /// Smallest generator of the multiplicative group (prime fields only).
    pub fn primitive_root(&self) -> Option<Fe> {
        if self.0.e != 1 {
            return None;
        }
        let p = self.0.p;
        if p == 2 {
            return Some(self.one());
        }
        let factors = distinct_prime_factors(p - 1);
        (2..p).map(|g| self.from_u64(g)).find(|&g| {
            factors
                .iter()
                .all(|&q| self.pow(g, ((p - 1) / q) as u128) != self.one())
        })
    }
}

pub(crate) fn distinct_prime_factors(mut n: u64) -> Vec<u64> {
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

// Dense polynomials over F_p on raw u64 vectors, low degree first. Used only
// for modulus search and inversion in extension fields.

fn trim(mut a: Vec<u64>) -> Vec<u64> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn pow_mod_u64(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

fn poly_sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|k| {
            let x = a.get(k).copied().unwrap_or(0);
            let y = b.get(k).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(out)
}

fn poly_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    trim(out)
}

/// (quotient, remainder); `b` must be nonzero.
fn poly_divrem(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
    let mut r = trim(a.to_vec());
    let b = trim(b.to_vec());
    let db = b.len() - 1;
    let lead_inv = pow_mod_u64(b[db], p - 2, p);
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let mut q = vec![0; r.len() - db];
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let c = r[r.len() - 1] * lead_inv % p;
        q[shift] = c;
        for (k, &bk) in b.iter().enumerate() {
            r[shift + k] = (r[shift + k] + p - c * bk % p) % p;
        }
        r = trim(r);
    }
    (trim(q), r)
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut x = trim(a.to_vec());
    let mut y = trim(b.to_vec());
    while !y.is_empty() {
        let (_, r) = poly_divrem(&x, &y, p);
        x = y;
        y = r;
    }
    x
}

fn poly_mulmod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    poly_divrem(&poly_mul(a, b, p), m, p).1
}

/// Inverse of `a` modulo `m` by the extended Euclidean algorithm.
fn poly_inv_mod(a: &[u64], m: &[u64], p: u64) -> Option<Vec<u64>> {
    let (mut r0, mut r1) = (trim(m.to_vec()), trim(a.to_vec()));
    let (mut s0, mut s1): (Vec<u64>, Vec<u64>) = (Vec::new(), vec![1]);
    while !r1.is_empty() {
        let (q, r) = poly_divrem(&r0, &r1, p);
        let s = poly_sub(&s0, &poly_mul(&q, &s1, p), p);
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s;
    }
    if r0.len() != 1 {
        return None;
    }
    let c = pow_mod_u64(r0[0], p - 2, p);
    Some(trim(s0.iter().map(|&x| x * c % p).collect()))
}

/// `f` monic of degree `e` is irreducible iff `gcd(x^{p^k} - x, f) = 1` for
/// every `1 <= k <= e/2`.
fn is_irreducible(f: &[u64], p: u64) -> bool {
    let e = f.len() - 1;
    if e == 1 {
        return true;
    }
    let x = vec![0, 1];
    let mut h = x.clone();
    for _ in 1..=e / 2 {
        // h <- h^p mod f
        let mut acc = vec![1];
        let mut base = h.clone();
        let mut n = p;
        while n > 0 {
            if n & 1 == 1 {
                acc = poly_mulmod(&acc, &base, f, p);
            }
            base = poly_mulmod(&base, &base, f, p);
            n >>= 1;
        }
        h = acc;
        let g = poly_gcd(&poly_sub(&h, &x, p), f, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

fn first_irreducible(p: u64, e: usize) -> Vec<u64> {
    let total = (p as u128).pow(e as u32);
    for n in 0..total {
        let mut m = Vec::with_capacity(e + 1);
        let mut k = n;
        for _ in 0..e {
            m.push((k % p as u128) as u64);
            k /= p as u128;
        }
        m.push(1);
        if is_irreducible(&m, p) {
            return m;
        }
    }
    unreachable!("irreducible polynomials of every degree exist over F_p")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Brute-force root search: a monic quadratic or cubic is reducible iff it
    /// has a root in F_p.
    fn has_root(m: &[u64], p: u64) -> bool {
        (0..p).any(|x| {
            m.iter()
                .rev()
                .fold(0u64, |acc, &c| (acc * x + c) % p)
                == 0
        })
    }

    #[test]
    fn prime_field_construction() {
        let f = FieldCtx::prime(7).unwrap();
        assert_eq!(f.p(), 7);
        assert_eq!(f.degree(), 1);
        assert_eq!(FieldCtx::prime(4).unwrap_err(), FieldError::CompositeCharacteristic(4));
        assert!(matches!(FieldCtx::prime(1), Err(FieldError::CompositeCharacteristic(1))));
    }

    #[test]
    fn supplied_modulus_checked_against_root_search() {
        // t^2 + t + 1 over F_5: discriminant -3 = 2 is a non-square, so no roots.
        assert!(!has_root(&[1, 1, 1], 5));
        assert!(FieldCtx::new(5, 2, Some(&[1, 1, 1])).is_ok());
        // t^2 - 1 = (t - 1)(t + 1)
        assert!(has_root(&[4, 0, 1], 5));
        assert!(matches!(
            FieldCtx::new(5, 2, Some(&[4, 0, 1])),
            Err(FieldError::ReducibleModulus(..))
        ));
        assert!(matches!(FieldCtx::new(5, 2, Some(&[1, 1, 2])), Err(FieldError::BadModulus(_))));
        assert!(matches!(FieldCtx::new(5, 2, Some(&[1, 1])), Err(FieldError::BadModulus(_))));
        // quadratics and cubics: irreducible iff rootless
        for p in [2u64, 3, 5, 7] {
            for a in 0..p {
                for b in 0..p {
                    let m = [a, b, 1];
                    assert_eq!(FieldCtx::new(p, 2, Some(&m)).is_ok(), !has_root(&m, p), "{m:?} mod {p}");
                    for c in 0..p {
                        let m = [a, b, c, 1];
                        assert_eq!(FieldCtx::new(p, 3, Some(&m)).is_ok(), !has_root(&m, p), "{m:?} mod {p}");
                    }
                }
            }
        }
    }

    #[test]
    fn generated_modulus_is_deterministic() {
        let f = FieldCtx::new(3, 2, None).unwrap();
        assert_eq!(f.modulus(), &[1, 0, 1]);
        let g = FieldCtx::new(3, 2, None).unwrap();
        assert_eq!(f, g);
        let h = FieldCtx::new(5, 2, None).unwrap();
        assert_eq!(h.modulus(), &[2, 0, 1]);
    }

    #[test]
    fn frobenius_examples() {
        let f7 = FieldCtx::prime(7).unwrap();
        assert_eq!(f7.frobenius(f7.from_u64(3)), f7.from_u64(3));
        assert_eq!(f7.frobenius(f7.zero()), f7.zero());
        // F_9 = F_3[t]/(t^2 + 1): t^3 = t * t^2 = -t
        let f9 = FieldCtx::new(3, 2, Some(&[1, 0, 1])).unwrap();
        let t = f9.generator().unwrap();
        assert_eq!(f9.frobenius(t), f9.neg(t));
        assert_eq!(f9.frobenius_inv(f9.frobenius(t)), t);
    }

    #[test]
    fn field_axioms_on_suite() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut fields: Vec<FieldCtx> = primes_in(2, 97).into_iter().map(|p| FieldCtx::prime(p).unwrap()).collect();
        fields.extend(primes_in(2, 31).into_iter().map(|p| FieldCtx::new(p, 2, None).unwrap()));
        for f in &fields {
            for _ in 0..1000 {
                let a = f.random(&mut rng);
                let b = f.random(&mut rng);
                if !a.is_zero() {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one());
                }
                assert_eq!(f.frobenius(f.add(a, b)), f.add(f.frobenius(a), f.frobenius(b)));
                assert_eq!(f.frobenius(f.mul(a, b)), f.mul(f.frobenius(a), f.frobenius(b)));
                let k = f.from_u64(rng.gen_range(0..f.p()));
                assert_eq!(f.frobenius(k), k);
                let mut x = a;
                for _ in 0..f.degree() {
                    x = f.frobenius(x);
                }
                assert_eq!(x, a);
            }
        }
    }

    #[test]
    fn higher_extensions() {
        let f = FieldCtx::new(3, 4, None).unwrap();
        assert_eq!(f.size(), 81);
        let g = f.primitive_root();
        assert!(g.is_none());
        // multiplicative group has order 80
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let a = f.random_nonzero(&mut rng);
            assert_eq!(f.pow(a, 80), f.one());
        }
    }

    #[test]
    fn primitive_roots() {
        assert_eq!(FieldCtx::prime(7).unwrap().primitive_root().unwrap().value(), 3);
        assert_eq!(FieldCtx::prime(5).unwrap().primitive_root().unwrap().value(), 2);
        assert_eq!(FieldCtx::prime(97).unwrap().primitive_root().unwrap().value(), 5);
    }
}
