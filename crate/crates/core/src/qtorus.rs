//! The quantum torus `x̂1 x̂2 = ζ x̂2 x̂1` at a primitive `N`-th root of unity
//! `ζ ∈ F_p`, through its `N x N` clock/shift model.

use std::collections::BTreeMap;

use rand::Rng;
use thiserror::Error;

use crate::expr::{self, Interpret, ParseError};
use crate::ffield::{Fe, FieldCtx, FieldError};
use crate::linalg::{det_dense, MatrixFF};
use crate::mpoly::Poly;
use crate::poly;
use crate::weyl::reduce_rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QtorusError {
    #[error("F_{p} has no primitive root of unity of order {n} ({n} does not divide p - 1)")]
    NoRootOfUnity { p: u64, n: u64 },
    #[error("evaluation point must have nonzero coordinates")]
    ZeroEvaluationPoint,
    #[error("need {needed} distinct N-th powers for interpolation, F_p offers {available}")]
    InsufficientNodes { needed: u64, available: u64 },
    #[error("the zero operator has no central polynomial")]
    ZeroOperator,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("unknown symbol '{name}' at position {pos}")]
    UnknownSymbol { name: String, pos: usize },
    #[error("p divides a denominator")]
    BadPrime,
}

impl QtorusError {
    pub fn code(&self) -> &'static str {
        match self {
            QtorusError::NoRootOfUnity { .. } => "no-root-of-unity",
            QtorusError::ZeroEvaluationPoint => "zero-evaluation-point",
            QtorusError::InsufficientNodes { .. } => "insufficient-nodes",
            QtorusError::ZeroOperator => "zero-operator",
            QtorusError::Field(e) => e.code(),
            QtorusError::Parse(e) => e.code(),
            QtorusError::UnknownSymbol { .. } => "syntax",
            QtorusError::BadPrime => "bad-prime",
        }
    }
}

/// A prime field with a chosen primitive `N`-th root of unity
/// `ζ = g^{(p-1)/N}`, `g` the smallest primitive root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootCtx {
    pub ctx: FieldCtx,
    pub n: u64,
    pub zeta: Fe,
    generator: Fe,
}

impl RootCtx {
    pub fn new(p: u64, n: u64) -> Result<Self, QtorusError> {
        let ctx = FieldCtx::prime(p)?;
        if n == 0 || (p - 1) % n != 0 {
            return Err(QtorusError::NoRootOfUnity { p, n });
        }
        let g = ctx.primitive_root().expect("prime field");
        let zeta = ctx.pow(g, ((p - 1) / n) as u128);
        Ok(RootCtx { ctx, n, zeta, generator: g })
    }

    pub fn p(&self) -> u64 {
        self.ctx.p()
    }

    /// Number of distinct values `u^N` over `u ∈ F_p^×`.
    pub fn node_supply(&self) -> u64 {
        (self.p() - 1) / self.n
    }

    fn zeta_pow(&self, k: i64) -> Fe {
        self.ctx.pow(self.zeta, k.rem_euclid(self.n as i64) as u128)
    }
}

/// `U = diag(1, ζ, ..., ζ^{N-1})` and the cyclic shift `V e_k = e_{k+1}`,
/// so that `U V = ζ V U`.
pub fn clock_shift(rc: &RootCtx) -> (MatrixFF, MatrixFF) {
    let f = &rc.ctx;
    let n = rc.n as usize;
    let u = MatrixFF::from_fn(f, n, n, |r, c| if r == c { rc.zeta_pow(r as i64) } else { f.zero() });
    let v = MatrixFF::from_fn(f, n, n, |r, c| if r == (c + 1) % n { f.one() } else { f.zero() });
    (u, v)
}

/// `Σ a_ij x̂1^i x̂2^j` with `x̂1` written to the left.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaurentOp {
    terms: BTreeMap<(i64, i64), Fe>,
}

impl LaurentOp {
    pub fn zero() -> Self {
        LaurentOp { terms: BTreeMap::new() }
    }

    pub fn from_terms(rc: &RootCtx, terms: impl IntoIterator<Item = ((i64, i64), Fe)>) -> Self {
        let mut out = Self::zero();
        for (e, c) in terms {
            out.add_term(&rc.ctx, e, c);
        }
        out
    }

    fn add_term(&mut self, f: &FieldCtx, e: (i64, i64), c: Fe) {
        let slot = self.terms.entry(e).or_insert(Fe::ZERO);
        *slot = f.add(*slot, c);
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(i64, i64), &Fe)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest `|i| + |j|` in the support.
    pub fn degree(&self) -> i64 {
        self.terms.keys().map(|&(i, j)| i.abs() + j.abs()).max().unwrap_or(0)
    }

    pub fn add(&self, o: &Self, rc: &RootCtx) -> Self {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(&rc.ctx, *e, *c);
        }
        out
    }

    /// `(x̂1^a x̂2^b)(x̂1^c x̂2^d) = ζ^{-bc} x̂1^{a+c} x̂2^{b+d}`.
    pub fn mul(&self, o: &Self, rc: &RootCtx) -> Self {
        let f = &rc.ctx;
        let mut out = Self::zero();
        for (&(a, b), &x) in &self.terms {
            for (&(c, d), &y) in &o.terms {
                let coef = f.mul(f.mul(x, y), rc.zeta_pow(-b * c));
                out.add_term(f, (a + c, b + d), coef);
            }
        }
        out
    }

    /// Parses an expression in `x1`, `x2` and `q` (the root of unity ζ).
    pub fn parse(rc: &RootCtx, text: &str) -> Result<Self, QtorusError> {
        expr::parse_with(text, &LaurentSyntax(rc))
    }
}

struct LaurentSyntax<'a>(&'a RootCtx);

impl Interpret for LaurentSyntax<'_> {
    type Value = LaurentOp;
    type Error = QtorusError;

    fn number(&self, q: &num_rational::BigRational) -> Result<LaurentOp, QtorusError> {
        let c = reduce_rational(&self.0.ctx, q).map_err(|_| QtorusError::BadPrime)?;
        Ok(LaurentOp::from_terms(self.0, [((0, 0), c)]))
    }
    fn symbol(&self, name: &str, pos: usize) -> Result<LaurentOp, QtorusError> {
        let rc = self.0;
        let (e, c) = match name {
            "x1" => ((1, 0), rc.ctx.one()),
            "x2" => ((0, 1), rc.ctx.one()),
            "q" => ((0, 0), rc.zeta),
            _ => return Err(QtorusError::UnknownSymbol { name: name.into(), pos }),
        };
        Ok(LaurentOp::from_terms(rc, [(e, c)]))
    }
    fn add(&self, a: LaurentOp, b: LaurentOp) -> Result<LaurentOp, QtorusError> {
        Ok(a.add(&b, self.0))
    }
    fn mul(&self, a: LaurentOp, b: LaurentOp) -> Result<LaurentOp, QtorusError> {
        Ok(a.mul(&b, self.0))
    }
    fn pow(&self, a: LaurentOp, exp: i64, pos: usize) -> Result<LaurentOp, QtorusError> {
        let rc = self.0;
        let base = if exp >= 0 {
            a
        } else {
            // monomials are units: (c x1^i x2^j)^{-1} = c^{-1} ζ^{-ij} x1^{-i} x2^{-j}
            let mut it = a.terms.iter();
            match (it.next(), it.next()) {
                (Some((&(i, j), &c)), None) => {
                    let inv = rc.ctx.inv(c).ok_or(ParseError::DivisionByZero { pos })?;
                    LaurentOp::from_terms(rc, [((-i, -j), rc.ctx.mul(inv, rc.zeta_pow(-i * j)))])
                }
                _ => return Err(ParseError::syntax(pos, "negative power of a non-monomial").into()),
            }
        };
        let mut acc = LaurentOp::from_terms(rc, [((0, 0), rc.ctx.one())]);
        for _ in 0..exp.unsigned_abs() {
            acc = acc.mul(&base, rc);
        }
        Ok(acc)
    }
}

/// `Σ a_ij (uU)^i (vV)^j`.
pub fn q_matrix(p: &LaurentOp, rc: &RootCtx, u: Fe, v: Fe) -> Result<MatrixFF, QtorusError> {
    let f = &rc.ctx;
    if u.is_zero() || v.is_zero() {
        return Err(QtorusError::ZeroEvaluationPoint);
    }
    let n = rc.n as usize;
    let mut m = MatrixFF::zeros(f, n, n);
    for (&(i, j), &c) in p.terms() {
        let scale = f.mul(c, f.mul(pow_signed(f, u, i), pow_signed(f, v, j)));
        // U^i V^j e_c = ζ^{i(c+j)} e_{c+j}
        for col in 0..n {
            let row = (col as i64 + j).rem_euclid(n as i64) as usize;
            let entry = f.mul(scale, rc.zeta_pow(i * row as i64));
            m.set(row, col, f.add(m.get(row, col), entry));
        }
    }
    Ok(m)
}

fn pow_signed(f: &FieldCtx, a: Fe, k: i64) -> Fe {
    let b = if k < 0 { f.inv(a).expect("nonzero") } else { a };
    f.pow(b, k.unsigned_abs() as u128)
}

pub fn q_determinant(p: &LaurentOp, rc: &RootCtx, u: Fe, v: Fe) -> Result<Fe, QtorusError> {
    Ok(det_dense(&q_matrix(p, rc, u, v)?).expect("square"))
}

/// Laurent polynomial `C(Z1, Z2)` with `C(u^N, v^N) = q_determinant(P, u, v)`.
///
/// The exponent range of `Z1` is that of `x̂1` in `P` (likewise for `Z2`);
/// nodes `u = g^k` give distinct `Z = u^N` for `k < (p-1)/N`.
pub fn central_polynomial(p: &LaurentOp, rc: &RootCtx) -> Result<Poly<2>, QtorusError> {
    if p.is_zero() {
        return Err(QtorusError::ZeroOperator);
    }
    let f = &rc.ctx;
    let lo = [0, 1].map(|k| p.terms().map(|(e, _)| if k == 0 { e.0 } else { e.1 }).min().unwrap_or(0).min(0));
    let hi = [0, 1].map(|k| p.terms().map(|(e, _)| if k == 0 { e.0 } else { e.1 }).max().unwrap_or(0).max(0));
    let width = [0, 1].map(|k| (hi[k] - lo[k] + 1) as usize);
    let needed = *width.iter().max().expect("two") as u64;
    if needed > rc.node_supply() {
        return Err(QtorusError::InsufficientNodes { needed, available: rc.node_supply() });
    }
    let roots: Vec<Fe> = (0..needed).map(|k| f.pow(rc.generator, k as u128)).collect();
    let zs: Vec<Fe> = roots.iter().map(|&u| f.pow(u, rc.n as u128)).collect();
    // values of Z1^{-lo1} Z2^{-lo2} C on the grid, interpolated in v then u
    let mut rows = Vec::with_capacity(width[0]);
    for a in 0..width[0] {
        let vals: Vec<Fe> = (0..width[1])
            .map(|b| {
                let d = q_determinant(p, rc, roots[a], roots[b])?;
                let s = f.mul(f.pow(zs[a], (-lo[0]) as u128), f.pow(zs[b], (-lo[1]) as u128));
                Ok(f.mul(d, s))
            })
            .collect::<Result<_, QtorusError>>()?;
        rows.push(poly::interpolate(f, &zs[..width[1]], &vals));
    }
    let mut out = Poly::<2>::zero(f);
    for l in 0..width[1] {
        let col: Vec<Fe> = rows.iter().map(|r| r[l]).collect();
        for (k, c) in poly::interpolate(f, &zs[..width[0]], &col).into_iter().enumerate() {
            out.add_term([k as i64 + lo[0], l as i64 + lo[1]], c);
        }
    }
    Ok(out)
}

/// `(X1 (1 - X2))^N = X1^N (1 - X2^N)` for `X1 = uU`, `X2 = vV` at `trials`
/// random nonzero `(u, v)`.
pub fn quantum_freshman_check<R: Rng + ?Sized>(rc: &RootCtx, trials: usize, rng: &mut R) -> bool {
    let f = &rc.ctx;
    let (uu, vv) = clock_shift(rc);
    let n = rc.n;
    (0..trials).all(|_| {
        let (u, v) = (f.random_nonzero(rng), f.random_nonzero(rng));
        let x1 = uu.scale(u);
        let x2 = vv.scale(v);
        let one_minus = |m: &MatrixFF| m.scale(f.neg(f.one())).add_scalar(f.one());
        let lhs = x1.mul(&one_minus(&x2)).expect("square").pow(n).expect("square");
        let rhs = x1.pow(n).expect("square").mul(&one_minus(&x2.pow(n).expect("square"))).expect("square");
        lhs == rhs
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_and_clock_shift() {
        let rc = RootCtx::new(5, 2).unwrap();
        assert_eq!(rc.zeta, rc.ctx.from_u64(4));
        let (u, v) = clock_shift(&rc);
        assert_eq!(u, MatrixFF::from_i64(&rc.ctx, &[vec![1, 0], vec![0, 4]]));
        assert_eq!(v, MatrixFF::from_i64(&rc.ctx, &[vec![0, 1], vec![1, 0]]));
        assert_eq!(u.mul(&v).unwrap(), v.mul(&u).unwrap().scale(rc.zeta));
        let rc = RootCtx::new(7, 3).unwrap();
        assert_eq!(rc.zeta, rc.ctx.from_u64(2));
        let (u, v) = clock_shift(&rc);
        assert_eq!(u.pow(3).unwrap(), MatrixFF::identity(&rc.ctx, 3));
        assert_eq!(v.pow(3).unwrap(), MatrixFF::identity(&rc.ctx, 3));
        assert!(matches!(RootCtx::new(7, 4), Err(QtorusError::NoRootOfUnity { .. })));
    }

    #[test]
    fn small_determinants() {
        let rc = RootCtx::new(5, 2).unwrap();
        let f = &rc.ctx;
        let (u, v) = (f.from_u64(2), f.from_u64(3));
        let p = LaurentOp::parse(&rc, "x1 + x2").unwrap();
        // -(u^2 + v^2) = -(4 + 9) = -13 = 2 mod 5
        assert_eq!(q_determinant(&p, &rc, u, v).unwrap(), f.from_u64(2));
        assert_eq!(q_determinant(&LaurentOp::parse(&rc, "1").unwrap(), &rc, u, v).unwrap(), f.one());
        assert_eq!(q_determinant(&p, &rc, f.zero(), v), Err(QtorusError::ZeroEvaluationPoint));
        let c = central_polynomial(&p, &rc).unwrap();
        assert_eq!(c.to_text(&["Z1", "Z2"]), "-(Z1 + Z2)");
    }

    #[test]
    fn commutation_rule() {
        let rc = RootCtx::new(13, 4).unwrap();
        let ab = LaurentOp::parse(&rc, "x1*x2").unwrap();
        let ba = LaurentOp::parse(&rc, "q*x2*x1").unwrap();
        assert_eq!(ab, ba);
        let inv = LaurentOp::parse(&rc, "(x1*x2)^-1*x1*x2").unwrap();
        assert_eq!(inv, LaurentOp::parse(&rc, "1").unwrap());
    }
}
