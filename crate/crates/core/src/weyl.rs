//! Normal-ordered differential operators `Σ a_ij x^i ∂^j` in the first Weyl
//! algebra, with coefficients either exact rationals or finite-field elements.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::curves;
use crate::expr::{self, Interpret, ParseError};
use crate::ffield::{Fe, FieldCtx};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WeylError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("unknown symbol '{name}' at position {pos}")]
    UnknownSymbol { name: String, pos: usize },
    #[error("negative exponent at position {pos}")]
    NegativeExponent { pos: usize },
    #[error("operands live over different coefficient domains")]
    DomainMismatch,
    #[error("matrix [[{0}, {1}], [{2}, {3}]] does not have determinant 1")]
    NotUnimodular(i64, i64, i64, i64),
    #[error("support is empty")]
    EmptySupport,
    #[error("p = {p} divides the denominator of coefficient {coeff}")]
    BadPrime { p: u64, coeff: String },
}

impl WeylError {
    pub fn code(&self) -> &'static str {
        match self {
            WeylError::Parse(e) => e.code(),
            WeylError::UnknownSymbol { .. } | WeylError::NegativeExponent { .. } => "syntax",
            WeylError::DomainMismatch => "domain-mismatch",
            WeylError::NotUnimodular(..) => "not-unimodular",
            WeylError::EmptySupport => "empty-support",
            WeylError::BadPrime { .. } => "bad-prime",
        }
    }
}

/// The operations a coefficient domain has to provide.
pub trait CoeffRing: Clone + fmt::Debug + PartialEq {
    type El: Clone + PartialEq + fmt::Debug;

    fn zero(&self) -> Self::El;
    fn from_i64(&self, n: i64) -> Self::El;
    fn add(&self, a: &Self::El, b: &Self::El) -> Self::El;
    fn mul(&self, a: &Self::El, b: &Self::El) -> Self::El;
    fn neg(&self, a: &Self::El) -> Self::El;
    fn is_zero(&self, a: &Self::El) -> bool;

    fn one(&self) -> Self::El {
        self.from_i64(1)
    }
}

/// Exact rational numbers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Rationals;

impl CoeffRing for Rationals {
    type El = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn from_i64(&self, n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
}

impl CoeffRing for FieldCtx {
    type El = Fe;

    fn zero(&self) -> Fe {
        Fe::ZERO
    }
    fn from_i64(&self, n: i64) -> Fe {
        FieldCtx::from_i64(self, n)
    }
    fn add(&self, a: &Fe, b: &Fe) -> Fe {
        FieldCtx::add(self, *a, *b)
    }
    fn mul(&self, a: &Fe, b: &Fe) -> Fe {
        FieldCtx::mul(self, *a, *b)
    }
    fn neg(&self, a: &Fe) -> Fe {
        FieldCtx::neg(self, *a)
    }
    fn is_zero(&self, a: &Fe) -> bool {
        a.is_zero()
    }
}

/// Reduces a rational into `F_q`, failing when `p` divides the denominator.
pub fn reduce_rational(ctx: &FieldCtx, q: &BigRational) -> Result<Fe, WeylError> {
    let p = BigInt::from(ctx.p());
    let num = q.numer().mod_floor(&p).to_u64().expect("reduced");
    let den = q.denom().mod_floor(&p).to_u64().expect("reduced");
    if den == 0 {
        return Err(WeylError::BadPrime { p: ctx.p(), coeff: q.to_string() });
    }
    Ok(ctx.div(ctx.from_u64(num), ctx.from_u64(den)).expect("nonzero denominator"))
}

/// `Σ a_ij x^i ∂^j` with all `x` to the left of all `∂`; zero coefficients are never stored.
#[derive(Clone, PartialEq)]
pub struct DiffOp<R: CoeffRing = Rationals> {
    ring: R,
    terms: BTreeMap<(u32, u32), R::El>,
}

/// Operators over a finite field.
pub type FieldOp = DiffOp<FieldCtx>;

impl<R: CoeffRing> DiffOp<R> {
    pub fn zero(ring: &R) -> Self {
        DiffOp { ring: ring.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(ring: &R, c: R::El) -> Self {
        Self::monomial(ring, 0, 0, c)
    }

    pub fn one(ring: &R) -> Self {
        Self::constant(ring, ring.one())
    }

    pub fn x(ring: &R) -> Self {
        Self::monomial(ring, 1, 0, ring.one())
    }

    pub fn d(ring: &R) -> Self {
        Self::monomial(ring, 0, 1, ring.one())
    }

    /// `c · x^i ∂^j`
    pub fn monomial(ring: &R, i: u32, j: u32, c: R::El) -> Self {
        let mut op = Self::zero(ring);
        op.add_term(i, j, c);
        op
    }

    pub fn from_terms(ring: &R, terms: impl IntoIterator<Item = ((u32, u32), R::El)>) -> Self {
        let mut op = Self::zero(ring);
        for ((i, j), c) in terms {
            op.add_term(i, j, c);
        }
        op
    }

    fn add_term(&mut self, i: u32, j: u32, c: R::El) {
        if self.ring.is_zero(&c) {
            return;
        }
        let ring = self.ring.clone();
        let slot = self.terms.entry((i, j)).or_insert_with(|| ring.zero());
        *slot = ring.add(slot, &c);
        if ring.is_zero(slot) {
            self.terms.remove(&(i, j));
        }
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &R::El)> {
        self.terms.iter()
    }

    pub fn coeff(&self, i: u32, j: u32) -> R::El {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(|| self.ring.zero())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `max(i + j)` over the support; `-1` for the zero operator.
    pub fn degree(&self) -> i64 {
        self.terms.keys().map(|&(i, j)| (i + j) as i64).max().unwrap_or(-1)
    }

    pub fn support(&self) -> Vec<(i64, i64)> {
        self.terms.keys().map(|&(i, j)| (i as i64, j as i64)).collect()
    }

    fn check_domain(&self, other: &Self) -> Result<(), WeylError> {
        if self.ring != other.ring {
            return Err(WeylError::DomainMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, WeylError> {
        self.check_domain(other)?;
        let mut out = self.clone();
        for (&(i, j), c) in &other.terms {
            out.add_term(i, j, c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        self.scale(&self.ring.from_i64(-1))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, WeylError> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &R::El) -> Self {
        let ring = &self.ring;
        Self::from_terms(ring, self.terms.iter().map(|(&k, a)| (k, ring.mul(a, c))))
    }

    /// Normal-ordered product, from `∂^b x^c = Σ_k C(b,k) c(c-1)⋯(c-k+1) x^{c-k} ∂^{b-k}`.
    pub fn multiply(&self, other: &Self) -> Result<Self, WeylError> {
        self.check_domain(other)?;
        let ring = &self.ring;
        let max_b = self.terms.keys().map(|&(_, b)| b).max().unwrap_or(0) as usize;
        let binom = pascal_rows(ring, max_b);
        let mut out = Self::zero(ring);
        for (&(a, b), lhs) in &self.terms {
            for (&(c, d), rhs) in &other.terms {
                let base = ring.mul(lhs, rhs);
                let mut falling = ring.one();
                for k in 0..=b.min(c) {
                    if k > 0 {
                        falling = ring.mul(&falling, &ring.from_i64((c - k + 1) as i64));
                    }
                    let coef = ring.mul(&base, &ring.mul(&binom[b as usize][k as usize], &falling));
                    out.add_term(a + c - k, b - k + d, coef);
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one(&self.ring);
        for _ in 0..n {
            acc = acc.multiply(self).expect("same domain");
        }
        acc
    }

    /// Action on a polynomial `f = Σ f_k x^k` (coefficients low degree first).
    pub fn apply(&self, f: &[R::El]) -> Vec<R::El> {
        let ring = &self.ring;
        let top = f.len() + self.terms.keys().map(|&(i, _)| i as usize).max().unwrap_or(0);
        let mut out = vec![ring.zero(); top];
        for (&(i, j), a) in &self.terms {
            for (k, fk) in f.iter().enumerate() {
                if (k as u32) < j || ring.is_zero(fk) {
                    continue;
                }
                let mut falling = ring.one();
                for t in 0..j {
                    falling = ring.mul(&falling, &ring.from_i64(k as i64 - t as i64));
                }
                let idx = k - j as usize + i as usize;
                out[idx] = ring.add(&out[idx], &ring.mul(a, &ring.mul(&falling, fk)));
            }
        }
        while out.last().is_some_and(|c| ring.is_zero(c)) {
            out.pop();
        }
        out
    }

    /// Image under the automorphism `x ↦ a x + b ∂`, `∂ ↦ c x + d ∂`.
    pub fn sl2_act(&self, g: &SL2Mat) -> Self {
        let ring = &self.ring;
        let lin = |s: i64, t: i64| {
            Self::from_terms(ring, [((1, 0), ring.from_i64(s)), ((0, 1), ring.from_i64(t))])
        };
        let xi = lin(g.a, g.b);
        let yi = lin(g.c, g.d);
        let max_i = self.terms.keys().map(|&(i, _)| i).max().unwrap_or(0);
        let max_j = self.terms.keys().map(|&(_, j)| j).max().unwrap_or(0);
        let xpows = powers(&xi, max_i);
        let ypows = powers(&yi, max_j);
        let mut out = Self::zero(ring);
        for (&(i, j), c) in &self.terms {
            let term = xpows[i as usize].multiply(&ypows[j as usize]).expect("same domain").scale(c);
            out = out.add(&term).expect("same domain");
        }
        out
    }

    /// Germ multiplicity along the line `y = 0` read off the support.
    pub fn germ_multiplicity_y0(&self) -> Result<u32, WeylError> {
        curves::support_multiplicity_y0(self.support()).ok_or(WeylError::EmptySupport)
    }

    /// Coefficientwise image in another ring.
    pub fn map_coeffs<S: CoeffRing, E>(
        &self,
        target: &S,
        mut f: impl FnMut(&R::El) -> Result<S::El, E>,
    ) -> Result<DiffOp<S>, E> {
        let mut out = DiffOp::zero(target);
        for (&(i, j), c) in &self.terms {
            out.add_term(i, j, f(c)?);
        }
        Ok(out)
    }
}

fn powers<R: CoeffRing>(op: &DiffOp<R>, n: u32) -> Vec<DiffOp<R>> {
    let mut out = vec![DiffOp::one(op.ring())];
    for k in 1..=n as usize {
        let next = out[k - 1].multiply(op).expect("same domain");
        out.push(next);
    }
    out
}

fn pascal_rows<R: CoeffRing>(ring: &R, n: usize) -> Vec<Vec<R::El>> {
    let mut rows: Vec<Vec<R::El>> = vec![vec![ring.one()]];
    for r in 1..=n {
        let prev = &rows[r - 1];
        let mut row = vec![ring.one(); r + 1];
        for k in 1..r {
            row[k] = ring.add(&prev[k - 1], &prev[k]);
        }
        rows.push(row);
    }
    rows
}

impl DiffOp<Rationals> {
    pub fn parse(text: &str) -> Result<Self, WeylError> {
        expr::parse_with(text, &OperatorSyntax)
    }

    /// Reduction mod `p` into the given field.
    pub fn reduce(&self, ctx: &FieldCtx) -> Result<FieldOp, WeylError> {
        self.map_coeffs(ctx, |q| reduce_rational(ctx, q))
    }

    /// Operator from integer coefficients `((i, j), a_ij)`.
    pub fn from_int_terms(terms: &[((u32, u32), i64)]) -> Self {
        Self::from_terms(&Rationals, terms.iter().map(|&(k, c)| (k, BigRational::from_integer(c.into()))))
    }
}

impl DiffOp<FieldCtx> {
    /// The same operator over a larger field of equal characteristic.
    pub fn embed(&self, target: &FieldCtx) -> Option<FieldOp> {
        let src = self.ring.clone();
        self.map_coeffs(target, |&c| target.embed(&src, c).ok_or(())).ok()
    }
}

/// Interpretation of `x`, `d` and rational literals as Weyl-algebra elements.
pub struct OperatorSyntax;

impl Interpret for OperatorSyntax {
    type Value = DiffOp<Rationals>;
    type Error = WeylError;

    fn number(&self, q: &BigRational) -> Result<Self::Value, WeylError> {
        Ok(DiffOp::constant(&Rationals, q.clone()))
    }
    fn symbol(&self, name: &str, pos: usize) -> Result<Self::Value, WeylError> {
        match name {
            "x" => Ok(DiffOp::x(&Rationals)),
            "d" => Ok(DiffOp::d(&Rationals)),
            _ => Err(WeylError::UnknownSymbol { name: name.into(), pos }),
        }
    }
    fn add(&self, a: Self::Value, b: Self::Value) -> Result<Self::Value, WeylError> {
        a.add(&b)
    }
    fn mul(&self, a: Self::Value, b: Self::Value) -> Result<Self::Value, WeylError> {
        a.multiply(&b)
    }
    fn pow(&self, a: Self::Value, exp: i64, pos: usize) -> Result<Self::Value, WeylError> {
        if exp < 0 {
            return Err(WeylError::NegativeExponent { pos });
        }
        Ok(a.pow(exp as u32))
    }
}

fn fmt_monomial(i: u32, j: u32) -> String {
    let mut parts = Vec::new();
    match i {
        0 => {}
        1 => parts.push("x".to_string()),
        _ => parts.push(format!("x^{i}")),
    }
    match j {
        0 => {}
        1 => parts.push("d".to_string()),
        _ => parts.push(format!("d^{j}")),
    }
    parts.join("*")
}

impl fmt::Display for DiffOp<Rationals> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut keys: Vec<_> = self.terms.keys().copied().collect();
        keys.sort_by(|a, b| (b.0 + b.1, b.0).cmp(&(a.0 + a.1, a.0)));
        for (n, (i, j)) in keys.into_iter().enumerate() {
            let c = &self.terms[&(i, j)];
            let neg = c.is_negative();
            let mag = c.abs();
            if n == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let mono = fmt_monomial(i, j);
            if mono.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{mag}*{mono}")?;
            }
        }
        Ok(())
    }
}

impl<R: CoeffRing> fmt::Debug for DiffOp<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

/// Integer matrix `[[a, b], [c, d]]` with determinant 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub struct SL2Mat {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl SL2Mat {
    pub const IDENTITY: SL2Mat = SL2Mat { a: 1, b: 0, c: 0, d: 1 };
    /// `[[0, 1], [-1, 0]]`
    pub const FOURIER: SL2Mat = SL2Mat { a: 0, b: 1, c: -1, d: 0 };
    /// `[[1, 0], [1, 1]]`
    pub const SHEAR: SL2Mat = SL2Mat { a: 1, b: 0, c: 1, d: 1 };

    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self, WeylError> {
        if a * d - b * c != 1 {
            return Err(WeylError::NotUnimodular(a, b, c, d));
        }
        Ok(SL2Mat { a, b, c, d })
    }

    pub fn compose(&self, o: &SL2Mat) -> SL2Mat {
        SL2Mat {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    /// Parses `a,b,c,d`.
    pub fn parse(text: &str) -> Result<Self, String> {
        let v: Vec<i64> = text
            .split(',')
            .map(|s| s.trim().parse::<i64>().map_err(|e| format!("bad SL(2) entry '{s}': {e}")))
            .collect::<Result<_, _>>()?;
        if v.len() != 4 {
            return Err(format!("expected 4 entries a,b,c,d, got {}", v.len()));
        }
        SL2Mat::new(v[0], v[1], v[2], v[3]).map_err(|e| e.to_string())
    }
}

impl fmt::Display for SL2Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}
