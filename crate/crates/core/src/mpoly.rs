//! Sparse (Laurent) polynomials in `V` variables over a finite field.

use std::cmp::Reverse;
use std::collections::BTreeMap;
use std::fmt;

use serde::ser::{SerializeSeq, SerializeStruct};
use serde::{Serialize, Serializer};

use crate::expr::{self, Interpret, ParseError};
use crate::ffield::{Fe, FieldCtx};
use crate::weyl::reduce_rational;

/// `Σ c_e X^e` over a finite field; exponents may be negative. Zero
/// coefficients are never stored.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly<const V: usize> {
    ctx: FieldCtx,
    terms: BTreeMap<[i64; V], Fe>,
}

/// Polynomial in the central coordinates `(X, Y) = (x̂^p, ŷ^p)`.
pub type BivarPoly = Poly<2>;

impl<const V: usize> Poly<V> {
    pub fn zero(ctx: &FieldCtx) -> Self {
        Poly { ctx: ctx.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(ctx: &FieldCtx, c: Fe) -> Self {
        Self::monomial(ctx, [0; V], c)
    }

    pub fn one(ctx: &FieldCtx) -> Self {
        Self::constant(ctx, ctx.one())
    }

    pub fn monomial(ctx: &FieldCtx, exp: [i64; V], c: Fe) -> Self {
        let mut out = Self::zero(ctx);
        out.add_term(exp, c);
        out
    }

    /// The variable with index `k`.
    pub fn var(ctx: &FieldCtx, k: usize) -> Self {
        let mut e = [0; V];
        e[k] = 1;
        Self::monomial(ctx, e, ctx.one())
    }

    pub fn from_terms(ctx: &FieldCtx, terms: impl IntoIterator<Item = ([i64; V], Fe)>) -> Self {
        let mut out = Self::zero(ctx);
        for (e, c) in terms {
            out.add_term(e, c);
        }
        out
    }

    /// Terms with integer coefficients.
    pub fn from_int_terms(ctx: &FieldCtx, terms: &[([i64; V], i64)]) -> Self {
        Self::from_terms(ctx, terms.iter().map(|&(e, c)| (e, ctx.from_i64(c))))
    }

    pub fn add_term(&mut self, exp: [i64; V], c: Fe) {
        if c.is_zero() {
            return;
        }
        let f = &self.ctx;
        let slot = self.terms.entry(exp).or_insert(Fe::ZERO);
        *slot = f.add(*slot, c);
        if slot.is_zero() {
            self.terms.remove(&exp);
        }
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[i64; V], &Fe)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, exp: [i64; V]) -> Fe {
        self.terms.get(&exp).copied().unwrap_or(Fe::ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&k| k == 0))
    }

    pub fn has_negative_exponents(&self) -> bool {
        self.terms.keys().any(|e| e.iter().any(|&k| k < 0))
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<i64> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Largest exponent of variable `k`.
    pub fn degree_in(&self, k: usize) -> Option<i64> {
        self.terms.keys().map(|e| e[k]).max()
    }

    pub fn support(&self) -> Vec<[i64; V]> {
        self.terms.keys().copied().collect()
    }

    /// Leading term in graded-lex order (highest total degree, then
    /// lexicographically largest exponent vector).
    pub fn leading(&self) -> Option<([i64; V], Fe)> {
        self.terms
            .iter()
            .max_by_key(|(e, _)| (e.iter().sum::<i64>(), **e))
            .map(|(e, c)| (*e, *c))
    }

    /// Scaled so the graded-lex leading coefficient is 1.
    pub fn normalized(&self) -> Self {
        match self.leading() {
            None => self.clone(),
            Some((_, c)) => self.scale(self.ctx.inv(c).expect("nonzero leading coefficient")),
        }
    }

    /// Terms in canonical print order: ascending total degree, ties broken
    /// by descending exponent vector.
    pub fn canonical_terms(&self) -> Vec<([i64; V], Fe)> {
        let mut v: Vec<_> = self.terms.iter().map(|(e, c)| (*e, *c)).collect();
        v.sort_by_key(|(e, _)| (e.iter().sum::<i64>(), Reverse(*e)));
        v
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert!(self.ctx == other.ctx);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, *c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(self.ctx.neg(self.ctx.one()))
    }

    pub fn scale(&self, c: Fe) -> Self {
        let f = &self.ctx;
        Self::from_terms(f, self.terms.iter().map(|(e, a)| (*e, f.mul(*a, c))))
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert!(self.ctx == other.ctx);
        let f = &self.ctx;
        let mut acc: BTreeMap<[i64; V], Fe> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let mut e = *ea;
                for k in 0..V {
                    e[k] += eb[k];
                }
                let slot = acc.entry(e).or_insert(Fe::ZERO);
                *slot = f.mul_add(*ca, *cb, *slot);
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Poly { ctx: f.clone(), terms: acc }
    }

    pub fn pow(&self, mut n: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(&self.ctx);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Multiplies every exponent vector by `Z^shift` (Laurent shift).
    pub fn shift(&self, shift: [i64; V]) -> Self {
        Self::from_terms(
            &self.ctx,
            self.terms.iter().map(|(e, c)| {
                let mut e = *e;
                for k in 0..V {
                    e[k] += shift[k];
                }
                (e, *c)
            }),
        )
    }

    /// Value at a point; `None` if a negative exponent meets a zero coordinate.
    pub fn eval(&self, point: &[Fe; V]) -> Option<Fe> {
        let f = &self.ctx;
        let mut acc = f.zero();
        for (e, c) in &self.terms {
            let mut t = *c;
            for k in 0..V {
                let base = if e[k] < 0 { f.inv(point[k])? } else { point[k] };
                t = f.mul(t, f.pow(base, e[k].unsigned_abs() as u128));
            }
            acc = f.add(acc, t);
        }
        Some(acc)
    }

    /// Formal partial derivative in variable `k`.
    pub fn partial(&self, k: usize) -> Self {
        let f = &self.ctx;
        Self::from_terms(
            f,
            self.terms.iter().map(|(e, c)| {
                let mut e2 = *e;
                e2[k] -= 1;
                (e2, f.mul(*c, f.from_i64(e[k])))
            }),
        )
    }

    /// Applies `g` to every coefficient.
    pub fn map_coeffs(&self, g: impl Fn(Fe) -> Fe) -> Self {
        Self::from_terms(&self.ctx, self.terms.iter().map(|(e, c)| (*e, g(*c))))
    }

    /// The same polynomial over another field, if every coefficient transports.
    pub fn embed(&self, target: &FieldCtx) -> Option<Self> {
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| target.embed(&self.ctx, *c).map(|c| (*e, c)))
            .collect::<Option<Vec<_>>>()?;
        Some(Self::from_terms(target, terms))
    }

    /// Text form with the given variable names, e.g. `Y - X^2` or `-(Z1 + Z2)`.
    ///
    /// Terms follow [`Poly::canonical_terms`]. Prime-field coefficients use the
    /// symmetric representative; when every coefficient is negative and there
    /// are several terms the common sign is pulled out.
    pub fn to_text(&self, names: &[&str; V]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let f = &self.ctx;
        let terms = self.canonical_terms();
        let signed: Vec<Option<i64>> =
            terms.iter().map(|(_, c)| f.in_prime_field(*c).map(|v| f.signed(v))).collect();
        let all_negative = terms.len() > 1 && signed.iter().all(|s| s.is_some_and(|v| v < 0));
        let mut out = String::new();
        for (n, ((e, c), s)) in terms.iter().zip(&signed).enumerate() {
            let mono = monomial_text(e, names);
            let (neg, coef) = match s {
                Some(v) => {
                    let v = if all_negative { -v } else { *v };
                    (v < 0, if v.abs() == 1 && !mono.is_empty() { String::new() } else { v.abs().to_string() })
                }
                None => (false, format!("({})", ext_text(f, *c))),
            };
            if n == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(&coef);
            if !coef.is_empty() && !mono.is_empty() {
                out.push('*');
            }
            out.push_str(&mono);
        }
        if all_negative {
            format!("-({out})")
        } else {
            out
        }
    }
}

fn monomial_text<const V: usize>(e: &[i64; V], names: &[&str; V]) -> String {
    let parts: Vec<String> = (0..V)
        .filter(|&k| e[k] != 0)
        .map(|k| if e[k] == 1 { names[k].to_string() } else { format!("{}^{}", names[k], e[k]) })
        .collect();
    parts.join("*")
}

/// `c0 + c1*t + ...` for an extension-field element.
fn ext_text(f: &FieldCtx, c: Fe) -> String {
    let parts: Vec<String> = f
        .coeffs(&c)
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0)
        .map(|(k, &v)| match k {
            0 => v.to_string(),
            1 if v == 1 => "t".to_string(),
            1 => format!("{v}*t"),
            _ if v == 1 => format!("t^{k}"),
            _ => format!("{v}*t^{k}"),
        })
        .collect();
    parts.join(" + ")
}

impl Poly<2> {
    /// `H(aX + bY, cX + dY)`; exponents must be nonnegative.
    pub fn substitute_linear(&self, a: i64, b: i64, c: i64, d: i64) -> Self {
        let f = &self.ctx;
        let l1 = Self::from_terms(f, [([1, 0], f.from_i64(a)), ([0, 1], f.from_i64(b))]);
        let l2 = Self::from_terms(f, [([1, 0], f.from_i64(c)), ([0, 1], f.from_i64(d))]);
        let max_i = self.degree_in(0).unwrap_or(0).max(0) as usize;
        let max_j = self.degree_in(1).unwrap_or(0).max(0) as usize;
        let pows = |l: &Self, n: usize| {
            let mut v = vec![Self::one(f)];
            for k in 1..=n {
                let next = v[k - 1].mul(l);
                v.push(next);
            }
            v
        };
        let p1 = pows(&l1, max_i);
        let p2 = pows(&l2, max_j);
        let mut out = Self::zero(f);
        for (e, coef) in &self.terms {
            assert!(e[0] >= 0 && e[1] >= 0, "linear substitution needs a polynomial");
            out = out.add(&p1[e[0] as usize].mul(&p2[e[1] as usize]).scale(*coef));
        }
        out
    }

    /// Parses text such as `Y - X^2` or `X*Y - (2 + t)` over `ctx`.
    pub fn parse(ctx: &FieldCtx, text: &str) -> Result<Self, PolyParseError> {
        expr::parse_with(text, &PolySyntax { ctx, names: &["X", "Y"] })
    }
}

impl fmt::Display for Poly<2> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text(&["X", "Y"]))
    }
}

impl<const V: usize> fmt::Debug for Poly<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly[{:?}]", self.ctx)?;
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

/// JSON form `{"p": .., "e": .., "terms": [[e_1, .., e_V, [c_0, ..]], ..]}`,
/// terms in canonical order.
impl<const V: usize> Serialize for Poly<V> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        struct Terms<'a, const V: usize>(&'a Poly<V>);
        impl<const V: usize> Serialize for Terms<'_, V> {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                let f = &self.0.ctx;
                let terms = self.0.canonical_terms();
                let mut seq = s.serialize_seq(Some(terms.len()))?;
                for (e, c) in terms {
                    let mut row: Vec<serde_json::Value> = e.iter().map(|&k| k.into()).collect();
                    row.push(f.coeffs(&c).to_vec().into());
                    seq.serialize_element(&row)?;
                }
                seq.end()
            }
        }
        let mut st = s.serialize_struct("Poly", 3)?;
        st.serialize_field("p", &self.ctx.p())?;
        st.serialize_field("e", &self.ctx.degree())?;
        st.serialize_field("terms", &Terms(self))?;
        st.end()
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum PolyParseError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("unknown symbol '{name}' at position {pos}")]
    UnknownSymbol { name: String, pos: usize },
    #[error("p = {0} divides a denominator")]
    BadPrime(u64),
    #[error("malformed polynomial JSON: {0}")]
    Json(String),
}

impl PolyParseError {
    pub fn code(&self) -> &'static str {
        match self {
            PolyParseError::Parse(e) => e.code(),
            PolyParseError::UnknownSymbol { .. } | PolyParseError::Json(_) => "syntax",
            PolyParseError::BadPrime(_) => "bad-prime",
        }
    }
}

/// Commutative polynomial syntax over a finite field; `t` is the extension generator.
pub struct PolySyntax<'a, const V: usize> {
    pub ctx: &'a FieldCtx,
    pub names: &'a [&'a str; V],
}

impl<const V: usize> Interpret for PolySyntax<'_, V> {
    type Value = Poly<V>;
    type Error = PolyParseError;

    fn number(&self, q: &num_rational::BigRational) -> Result<Poly<V>, PolyParseError> {
        let c = reduce_rational(self.ctx, q).map_err(|_| PolyParseError::BadPrime(self.ctx.p()))?;
        Ok(Poly::constant(self.ctx, c))
    }
    fn symbol(&self, name: &str, pos: usize) -> Result<Poly<V>, PolyParseError> {
        if let Some(k) = self.names.iter().position(|&n| n == name) {
            return Ok(Poly::var(self.ctx, k));
        }
        match (name, self.ctx.generator()) {
            ("t", Some(t)) => Ok(Poly::constant(self.ctx, t)),
            _ => Err(PolyParseError::UnknownSymbol { name: name.into(), pos }),
        }
    }
    fn add(&self, a: Poly<V>, b: Poly<V>) -> Result<Poly<V>, PolyParseError> {
        Ok(a.add(&b))
    }
    fn mul(&self, a: Poly<V>, b: Poly<V>) -> Result<Poly<V>, PolyParseError> {
        Ok(a.mul(&b))
    }
    fn pow(&self, a: Poly<V>, exp: i64, pos: usize) -> Result<Poly<V>, PolyParseError> {
        if exp >= 0 {
            return Ok(a.pow(exp as u64));
        }
        // only monomials have Laurent inverses
        match (a.num_terms(), a.terms().next()) {
            (1, Some((e, c))) => {
                let inv = self.ctx.inv(*c).ok_or(ParseError::DivisionByZero { pos })?;
                let mut ne = *e;
                ne.iter_mut().for_each(|k| *k = -*k);
                Ok(Poly::monomial(self.ctx, ne, inv).pow(exp.unsigned_abs()))
            }
            _ => Err(ParseError::syntax(pos, "negative power of a non-monomial").into()),
        }
    }
}

/// Field element syntax: integers, rationals and the generator `t`.
pub fn parse_field_element(ctx: &FieldCtx, text: &str) -> Result<Fe, PolyParseError> {
    let p: Poly<1> = expr::parse_with(text, &PolySyntax { ctx, names: &["__none__"] })?;
    Ok(p.coeff([0]))
}

/// Reads the JSON form written by the [`Serialize`] impl.
pub fn poly_from_json<const V: usize>(value: &serde_json::Value, modulus: Option<&[u64]>) -> Result<Poly<V>, PolyParseError> {
    let bad = |m: &str| PolyParseError::Json(m.to_string());
    let p = value.get("p").and_then(|v| v.as_u64()).ok_or_else(|| bad("missing p"))?;
    let e = value.get("e").and_then(|v| v.as_u64()).unwrap_or(1) as usize;
    let ctx = FieldCtx::new(p, e, modulus).map_err(|err| PolyParseError::Json(err.to_string()))?;
    let terms = value.get("terms").and_then(|v| v.as_array()).ok_or_else(|| bad("missing terms"))?;
    let mut out = Poly::zero(&ctx);
    for t in terms {
        let row = t.as_array().filter(|r| r.len() == V + 1).ok_or_else(|| bad("bad term"))?;
        let mut exp = [0i64; V];
        for k in 0..V {
            exp[k] = row[k].as_i64().ok_or_else(|| bad("bad exponent"))?;
        }
        let coeffs: Vec<u64> = row[V]
            .as_array()
            .ok_or_else(|| bad("bad coefficient"))?
            .iter()
            .map(|c| c.as_u64().ok_or_else(|| bad("bad coefficient")))
            .collect::<Result<_, _>>()?;
        let c = ctx.from_coeffs(&coeffs).ok_or_else(|| bad("coefficient too long"))?;
        out.add_term(exp, c);
    }
    Ok(out)
}
