//! The characteristic-`p` engine: the `p x p` representation of the Weyl
//! algebra, operator matrices with central shifts, `p`-determinants, support
//! curves, and the two-variable divisibility probe.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::curves::{self, CurveError};
use crate::expr::{self, Interpret, ParseError};
use crate::ffield::{Fe, FieldCtx, FieldError};
use crate::linalg::{det_banded, det_dense, BandedMatrixFF, LinalgError, MatrixFF};
use crate::mpoly::{BivarPoly, Poly};
use crate::poly::{self, UPoly};
use crate::weyl::{reduce_rational, FieldOp, WeylError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CharpError {
    #[error("the representation lives over the prime field; got F_{{{p}^{e}}}")]
    ExtensionFieldUnsupported { p: u64, e: usize },
    #[error("the zero operator has no support")]
    ZeroOperator,
    #[error("p = {p} is too small: need p > {bound}")]
    PrimeTooSmall { p: u64, bound: i64 },
    #[error("not enough interpolation nodes: need {needed}, the field offers {available}")]
    GridExhausted { needed: u128, available: u128 },
    #[error("interpolated curve has total degree {found}, above the bound {bound}")]
    DegreeBound { found: i64, bound: i64 },
    #[error(transparent)]
    Weyl(#[from] WeylError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("unknown symbol '{name}' at position {pos}")]
    UnknownSymbol { name: String, pos: usize },
}

impl CharpError {
    pub fn code(&self) -> &'static str {
        match self {
            CharpError::ExtensionFieldUnsupported { .. } => "extension-field-unsupported",
            CharpError::ZeroOperator => "zero-operator",
            CharpError::PrimeTooSmall { .. } => "prime-too-small",
            CharpError::GridExhausted { .. } => "grid-exhausted",
            CharpError::DegreeBound { .. } => "degree-bound",
            CharpError::Weyl(e) => e.code(),
            CharpError::Linalg(e) => e.code(),
            CharpError::Field(e) => e.code(),
            CharpError::Curve(e) => e.code(),
            CharpError::Parse(e) => e.code(),
            CharpError::UnknownSymbol { .. } => "syntax",
        }
    }
}

/// `X_p` (multiplication by `x`) and `Y_p` (`d/dx`) on `F_p[x]/(x^p)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepPair {
    pub x: MatrixFF,
    pub y: MatrixFF,
}

pub fn rep_generators(ctx: &FieldCtx) -> Result<RepPair, CharpError> {
    if !ctx.is_prime_field() {
        return Err(CharpError::ExtensionFieldUnsupported { p: ctx.p(), e: ctx.degree() });
    }
    Ok(rep_over(ctx))
}

/// The same matrices with entries viewed in any field of characteristic `p`.
pub fn rep_over(ctx: &FieldCtx) -> RepPair {
    let p = ctx.p() as usize;
    let x = MatrixFF::from_fn(ctx, p, p, |r, c| if r == c + 1 { ctx.one() } else { ctx.zero() });
    let y = MatrixFF::from_fn(ctx, p, p, |r, c| if c == r + 1 { ctx.from_u64(c as u64) } else { ctx.zero() });
    RepPair { x, y }
}

/// Pascal's triangle mod p, rows `0..=n`.
fn binomials(f: &FieldCtx, n: usize) -> Vec<Vec<Fe>> {
    let mut rows: Vec<Vec<Fe>> = vec![vec![f.one()]];
    for i in 1..=n {
        let prev = &rows[i - 1];
        let row = (0..=i)
            .map(|k| {
                let a = if k > 0 { prev[k - 1] } else { f.zero() };
                let b = prev.get(k).copied().unwrap_or(Fe::ZERO);
                f.add(a, b)
            })
            .collect();
        rows.push(row);
    }
    rows
}

/// `b_ab` with `Σ a_ij (X+u)^i (Y+v)^j = Σ b_ab X^a Y^b`.
fn shifted_coefficients(op: &FieldOp, u: Fe, v: Fe) -> BTreeMap<(usize, usize), Fe> {
    let f = op.ring();
    let n = op.degree().max(0) as usize;
    let binom = binomials(f, n);
    let upow: Vec<Fe> = (0..=n).scan(f.one(), |acc, _| Some(std::mem::replace(acc, f.mul(*acc, u)))).collect();
    let vpow: Vec<Fe> = (0..=n).scan(f.one(), |acc, _| Some(std::mem::replace(acc, f.mul(*acc, v)))).collect();
    let mut out: BTreeMap<(usize, usize), Fe> = BTreeMap::new();
    for (&(i, j), &c) in op.terms() {
        let (i, j) = (i as usize, j as usize);
        for a in 0..=i {
            let ca = f.mul(c, f.mul(binom[i][a], upow[i - a]));
            if ca.is_zero() {
                continue;
            }
            for b in 0..=j {
                let t = f.mul(ca, f.mul(binom[j][b], vpow[j - b]));
                let slot = out.entry((a, b)).or_insert(Fe::ZERO);
                *slot = f.add(*slot, t);
            }
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// The `p x p` matrix `Σ a_ij (X_p + u)^i (Y_p + v)^j`, stored as a band
/// whose width is the actual spread of the shifted support.
pub fn operator_band(op: &FieldOp, u: Fe, v: Fe) -> Result<BandedMatrixFF, CharpError> {
    if op.is_zero() {
        return Err(CharpError::ZeroOperator);
    }
    let f = op.ring();
    let p = f.p() as usize;
    let b = shifted_coefficients(op, u, v);
    let width = b.keys().map(|&(a, b)| a.abs_diff(b)).max().unwrap_or(0).min(p - 1);
    let mut m = BandedMatrixFF::zeros(f, p, width);
    // X^a Y^b e_c = c(c-1)...(c-b+1) e_{c-b+a}
    let max_b = b.keys().map(|&(_, b)| b).max().unwrap_or(0);
    let mut falling = vec![Fe::ZERO; max_b + 1];
    for c in 0..p {
        falling[0] = f.one();
        for k in 1..=max_b {
            falling[k] = if k <= c { f.mul(falling[k - 1], f.from_u64((c + 1 - k) as u64)) } else { Fe::ZERO };
        }
        for (&(a, bb), &coef) in &b {
            if bb > c || c - bb + a >= p {
                continue;
            }
            let r = c - bb + a;
            let cur = m.get(r, c);
            m.set(r, c, f.mul_add(coef, falling[bb], cur));
        }
    }
    Ok(m)
}

pub fn operator_matrix(op: &FieldOp, u: Fe, v: Fe) -> Result<MatrixFF, CharpError> {
    Ok(operator_band(op, u, v)?.to_dense())
}

/// How a determinant was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetPath {
    Banded,
    /// Banded after transposing (the outer superdiagonal was degenerate).
    Transposed,
    Dense,
}

/// Determinant of a banded matrix, by the transfer recursion when its
/// superdiagonal (or, after transposing, its subdiagonal) allows it.
pub fn det_auto(m: &BandedMatrixFF) -> Result<(Fe, DetPath), CharpError> {
    let n = m.bandwidth();
    if n == 0 || 2 * n < m.size() {
        if m.first_degenerate().is_none() {
            return Ok((det_banded(m)?, DetPath::Banded));
        }
        let t = m.transpose();
        if t.first_degenerate().is_none() {
            return Ok((det_banded(&t)?, DetPath::Transposed));
        }
    }
    Ok((det_dense(&m.to_dense())?, DetPath::Dense))
}

pub fn determinant_at(op: &FieldOp, u: Fe, v: Fe) -> Result<(Fe, DetPath), CharpError> {
    det_auto(&operator_band(op, u, v)?)
}

/// `det Σ a_ij X_p^i Y_p^j`.
pub fn p_determinant(op: &FieldOp) -> Result<Fe, CharpError> {
    let f = op.ring();
    Ok(determinant_at(op, f.zero(), f.zero())?.0)
}

/// The polynomial `D(X, Y)` with `D(u^p, v^p) = det(operator_matrix(P, u, v))`.
///
/// `d` is the determinant polynomial itself, so `d(0, 0)` is the
/// `p`-determinant; [`SupportCurve::normalized`] gives the monic form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportCurve {
    pub d: BivarPoly,
    /// Degree bound: the order of the source operator.
    pub n: i64,
    /// Grid evaluations that could not use the banded fast path.
    pub dense_evals: usize,
}

impl SupportCurve {
    pub fn ctx(&self) -> &FieldCtx {
        self.d.ctx()
    }

    pub fn normalized(&self) -> BivarPoly {
        self.d.normalized()
    }
}

pub fn support_curve(op: &FieldOp) -> Result<SupportCurve, CharpError> {
    support_curve_with_offset(op, 0)
}

/// Interpolates on the nodes `{offset, ..., offset + N}` (mod `p`) in each
/// coordinate. Any offset gives the same curve; it only changes which
/// determinants hit the dense fallback.
pub fn support_curve_with_offset(op: &FieldOp, offset: u64) -> Result<SupportCurve, CharpError> {
    if op.is_zero() {
        return Err(CharpError::ZeroOperator);
    }
    let f = op.ring();
    let n = op.degree();
    if f.p() as i64 <= n {
        return Err(CharpError::PrimeTooSmall { p: f.p(), bound: n });
    }
    let k = n as usize + 1;
    let nodes: Vec<Fe> = (0..k as u64).map(|i| f.from_u64((offset + i) % f.p())).collect();
    let evals: Vec<Vec<(Fe, DetPath)>> = nodes
        .iter()
        .map(|&u| nodes.iter().map(|&v| determinant_at(op, u, v)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<_, _>>()?;
    let dense_evals = evals.iter().flatten().filter(|(_, p)| *p == DetPath::Dense).count();
    // interpolate in v for each u, then in u for each power of v
    let rows: Vec<Vec<Fe>> = evals
        .iter()
        .map(|row| poly::interpolate(f, &nodes, &row.iter().map(|e| e.0).collect::<Vec<_>>()))
        .collect();
    let mut d = BivarPoly::zero(f);
    for l in 0..k {
        let column: Vec<Fe> = rows.iter().map(|r| r[l]).collect();
        for (i, c) in poly::interpolate(f, &nodes, &column).into_iter().enumerate() {
            d.add_term([i as i64, l as i64], c);
        }
    }
    if let Some(found) = d.total_degree().filter(|&t| t > n) {
        return Err(CharpError::DegreeBound { found, bound: n });
    }
    Ok(SupportCurve { d, n, dense_evals })
}

/// Checks `D(u^p, v^p) = det(operator_matrix(P, u, v))` at `samples` random
/// points of `F_{p^k}` (or of the operator's own field when it is already an
/// extension). Returns the number of failing points.
pub fn extension_consistency<R: Rng + ?Sized>(
    op: &FieldOp,
    curve: &SupportCurve,
    k: usize,
    samples: usize,
    rng: &mut R,
) -> Result<usize, CharpError> {
    let base = op.ring();
    let (op, d) = if base.is_prime_field() && k > 1 {
        let big = FieldCtx::new(base.p(), k, None)?;
        let op = op.embed(&big).expect("prime field coefficients embed");
        let d = curve.d.embed(&big).expect("prime field coefficients embed");
        (op, d)
    } else {
        (op.clone(), curve.d.clone())
    };
    let f = op.ring().clone();
    let mut failures = 0;
    for _ in 0..samples {
        let (u, v) = (f.random(rng), f.random(rng));
        let lhs = d.eval(&[f.frobenius(u), f.frobenius(v)]).expect("polynomial");
        if lhs != determinant_at(&op, u, v)?.0 {
            failures += 1;
        }
    }
    Ok(failures)
}

/// `(Y_p + G'(X_p))^p = G'(X_p)^p` for `G'` given by its coefficients
/// (low degree first).
pub fn freshman_identity_check(g_prime: &[Fe], ctx: &FieldCtx) -> bool {
    let rep = rep_over(ctx);
    let p = ctx.p();
    let mut fx = MatrixFF::zeros(ctx, p as usize, p as usize);
    for &c in g_prime.iter().rev() {
        fx = fx.mul(&rep.x).expect("square").add_scalar(c);
    }
    let lhs = rep.y.add(&fx).expect("same shape").pow(p).expect("square");
    let rhs = fx.pow(p).expect("square");
    lhs == rhs
}

/// Support curve for `∂ - F'(x)` predicted by the exponential identity:
/// `Y - F'^φ(X)` with Frobenius applied to the coefficients.
pub fn exponential_curve(f_prime: &[Fe], ctx: &FieldCtx) -> BivarPoly {
    let mut out = BivarPoly::monomial(ctx, [0, 1], ctx.one());
    for (k, &c) in f_prime.iter().enumerate() {
        out.add_term([k as i64, 0], ctx.neg(ctx.frobenius(c)));
    }
    out
}

// --- two variables --------------------------------------------------------

/// `Σ c x1^i1 x2^i2 ∂1^j1 ∂2^j2` in normal order, keyed by `[i1, i2, j1, j2]`.
/// The `x` exponents may be negative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Op2 {
    ctx: FieldCtx,
    terms: BTreeMap<[i64; 4], Fe>,
}

/// `∂^j x^i = Σ_k C(j, k) i(i-1)...(i-k+1) x^{i-k} ∂^{j-k}`, also for negative `i`.
fn commute(f: &FieldCtx, j: i64, i: i64) -> Vec<(i64, i64, Fe)> {
    let binom = binomials(f, j as usize).pop().expect("row j");
    let mut out = Vec::new();
    let mut fall = f.one();
    for k in 0..=j {
        let c = f.mul(binom[k as usize], fall);
        if !c.is_zero() {
            out.push((i - k, j - k, c));
        }
        fall = f.mul(fall, f.from_i64(i - k));
    }
    out
}

impl Op2 {
    pub fn zero(ctx: &FieldCtx) -> Self {
        Op2 { ctx: ctx.clone(), terms: BTreeMap::new() }
    }

    pub fn from_terms(ctx: &FieldCtx, terms: impl IntoIterator<Item = ([i64; 4], Fe)>) -> Self {
        let mut out = Self::zero(ctx);
        for (e, c) in terms {
            out.add_term(e, c);
        }
        out
    }

    fn add_term(&mut self, e: [i64; 4], c: Fe) {
        let f = &self.ctx;
        let slot = self.terms.entry(e).or_insert(Fe::ZERO);
        *slot = f.add(*slot, c);
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[i64; 4], &Fe)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(*e, *c);
        }
        out
    }

    pub fn scale(&self, c: Fe) -> Self {
        Self::from_terms(&self.ctx, self.terms.iter().map(|(e, a)| (*e, self.ctx.mul(*a, c))))
    }

    /// Product with normal ordering; the two variable pairs commute.
    pub fn mul(&self, o: &Self) -> Self {
        let f = &self.ctx;
        let mut out = Self::zero(f);
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                let c = f.mul(*ca, *cb);
                for (i1, j1, c1) in commute(f, a[2], b[0]) {
                    for (i2, j2, c2) in commute(f, a[3], b[1]) {
                        let e = [a[0] + i1, a[1] + i2, j1 + b[2], j2 + b[3]];
                        out.add_term(e, f.mul(c, f.mul(c1, c2)));
                    }
                }
            }
        }
        out
    }

    /// Parses an expression in `x1, x2, d1, d2` (and `t`, the generator of
    /// an extension field).
    pub fn parse(ctx: &FieldCtx, text: &str) -> Result<Self, CharpError> {
        expr::parse_with(text, &Op2Syntax(ctx))
    }

    /// Per variable: (most negative x exponent, largest x exponent, largest ∂ exponent).
    fn exponent_ranges(&self) -> [(i64, i64); 4] {
        let mut r = [(0i64, 0i64); 4];
        for e in self.terms.keys() {
            for k in 0..4 {
                r[k].0 = r[k].0.min(e[k]);
                r[k].1 = r[k].1.max(e[k]);
            }
        }
        r
    }
}

struct Op2Syntax<'a>(&'a FieldCtx);

impl Interpret for Op2Syntax<'_> {
    type Value = Op2;
    type Error = CharpError;

    fn number(&self, q: &num_rational::BigRational) -> Result<Op2, CharpError> {
        let c = reduce_rational(self.0, q)?;
        Ok(Op2::from_terms(self.0, [([0; 4], c)]))
    }
    fn symbol(&self, name: &str, pos: usize) -> Result<Op2, CharpError> {
        let f = self.0;
        let e = match name {
            "x1" => [1, 0, 0, 0],
            "x2" => [0, 1, 0, 0],
            "d1" => [0, 0, 1, 0],
            "d2" => [0, 0, 0, 1],
            "t" if f.generator().is_some() => {
                return Ok(Op2::from_terms(f, [([0; 4], f.generator().expect("extension"))]))
            }
            _ => return Err(CharpError::UnknownSymbol { name: name.into(), pos }),
        };
        Ok(Op2::from_terms(f, [(e, f.one())]))
    }
    fn add(&self, a: Op2, b: Op2) -> Result<Op2, CharpError> {
        Ok(a.add(&b))
    }
    fn mul(&self, a: Op2, b: Op2) -> Result<Op2, CharpError> {
        Ok(a.mul(&b))
    }
    fn pow(&self, a: Op2, exp: i64, pos: usize) -> Result<Op2, CharpError> {
        let f = self.0;
        if exp < 0 {
            // only x1^k x2^l monomials are invertible
            let mut it = a.terms.iter();
            return match (it.next(), it.next()) {
                (Some((e, c)), None) if e[2] == 0 && e[3] == 0 => {
                    let inv = f.inv(*c).ok_or(ParseError::DivisionByZero { pos })?;
                    let m = exp.abs();
                    let coef = f.pow(inv, m as u128);
                    Ok(Op2::from_terms(f, [([-e[0] * m, -e[1] * m, 0, 0], coef)]))
                }
                _ => Err(ParseError::syntax(pos, "negative power of a non-monomial in x1, x2").into()),
            };
        }
        let mut acc = Op2::from_terms(f, [([0; 4], f.one())]);
        for _ in 0..exp {
            acc = acc.mul(&a);
        }
        Ok(acc)
    }
}

/// Result of [`support_multidim_probe`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeReport {
    /// `D(X1, X2, Y1, Y2)` with `X_k = x_k^p`, `Y_k = ∂_k^p` central.
    pub d: Poly<4>,
    /// Whether `D` is a `p`-th power.
    pub p_power: bool,
    pub root: Option<Poly<4>>,
    /// Interpolation nodes per variable.
    pub grid: [usize; 4],
}

/// `(X_p + u)^i` for `i` in `lo..=hi` (negative powers need `u != 0`).
fn shifted_powers(base: &MatrixFF, u: Fe, lo: i64, hi: i64) -> BTreeMap<i64, MatrixFF> {
    let f = base.ctx();
    let p = base.rows();
    let m = base.add_scalar(u);
    let mut out = BTreeMap::new();
    let id = MatrixFF::identity(f, p);
    let mut acc = id.clone();
    out.insert(0, id.clone());
    for k in 1..=hi {
        acc = acc.mul(&m).expect("square");
        out.insert(k, acc.clone());
    }
    if lo < 0 {
        // (X + u)^{-1} = Σ_k (-X)^k u^{-k-1}, X nilpotent
        let ui = f.inv(u).expect("nonzero shift");
        let mut inv = MatrixFF::zeros(f, p, p);
        let mut term = MatrixFF::scalar(f, p, ui);
        let neg_x_over_u = base.scale(f.neg(ui));
        for _ in 0..p {
            inv = inv.add(&term).expect("same shape");
            term = term.mul(&neg_x_over_u).expect("square");
        }
        let mut acc = id;
        for k in 1..=-lo {
            acc = acc.mul(&inv).expect("square");
            out.insert(-k, acc.clone());
        }
    }
    out
}

/// The central polynomial of `det M_P` for a two-variable operator on
/// `p^2 x p^2` matrices, by interpolation on a 4-dimensional grid of
/// Frobenius-twisted nodes, together with the `p`-th power test.
///
/// Degree bounds: `p * max_exponent` per variable (and `p * min_exponent`
/// below zero for Laurent `x` powers). The nodes are taken in the operator's
/// field, which must be large enough; use an extension field for `p > 2`.
pub fn support_multidim_probe(op: &Op2) -> Result<ProbeReport, CharpError> {
    if op.is_zero() {
        return Err(CharpError::ZeroOperator);
    }
    let f = op.ctx().clone();
    let p = f.p() as i64;
    let ranges = op.exponent_ranges();
    let max_deg = ranges.iter().map(|r| r.1 - r.0).max().unwrap_or(0);
    if p <= max_deg {
        return Err(CharpError::PrimeTooSmall { p: p as u64, bound: max_deg });
    }
    // Laurent range of D in each central variable
    let lo: [i64; 4] = std::array::from_fn(|k| p * ranges[k].0);
    let hi: [i64; 4] = std::array::from_fn(|k| p * ranges[k].1);
    let counts: [usize; 4] = std::array::from_fn(|k| (hi[k] - lo[k] + 1) as usize);
    let laurent = lo.iter().any(|&l| l < 0);
    let available = if laurent { f.size() - 1 } else { f.size() };
    let needed = *counts.iter().max().expect("four variables") as u128;
    if needed > available {
        return Err(CharpError::GridExhausted { needed, available });
    }
    // central node values Z; a Laurent variable avoids Z = 0
    let nodes: [Vec<Fe>; 4] = std::array::from_fn(|k| {
        let skip = u128::from(lo[k] < 0);
        (0..counts[k] as u128).map(|i| f.element(i + skip)).collect()
    });
    let rep = rep_over(&f);
    let ps = p as usize;
    // A1 ⊗ A2 with A_k = (X + u_k)^{i_k} (Y + v_k)^{j_k}
    let eval = |z: [Fe; 4]| -> Result<Fe, CharpError> {
        let s: [Fe; 4] = std::array::from_fn(|k| f.frobenius_inv(z[k]));
        let xp: [BTreeMap<i64, MatrixFF>; 2] =
            std::array::from_fn(|k| shifted_powers(&rep.x, s[k], ranges[k].0, ranges[k].1));
        let yp: [BTreeMap<i64, MatrixFF>; 2] =
            std::array::from_fn(|k| shifted_powers(&rep.y, s[k + 2], 0, ranges[k + 2].1));
        let mut m = MatrixFF::zeros(&f, ps * ps, ps * ps);
        for (e, c) in op.terms() {
            let a1 = xp[0][&e[0]].mul(&yp[0][&e[2]])?;
            let a2 = xp[1][&e[1]].mul(&yp[1][&e[3]])?;
            m = m.add(&a1.kron(&a2)?.scale(*c))?;
        }
        Ok(det_dense(&m)?)
    };
    let [n0, n1, n2, n3] = counts;
    let flat: Vec<Fe> = (0..n0 * n1 * n2 * n3)
        .into_par_iter()
        .map(|idx| {
            let (a, r) = (idx / (n1 * n2 * n3), idx % (n1 * n2 * n3));
            let (b, r) = (r / (n2 * n3), r % (n2 * n3));
            let (c, d) = (r / n3, r % n3);
            let z = [nodes[0][a], nodes[1][b], nodes[2][c], nodes[3][d]];
            // values of Z^{-lo} D(Z), a polynomial
            let shift = (0..4).fold(f.one(), |acc, k| f.mul(acc, f.pow(z[k], (-lo[k]) as u128)));
            eval(z).map(|v| f.mul(v, shift))
        })
        .collect::<Result<_, _>>()?;
    let coeffs = interpolate_tensor(&f, &nodes, &counts, flat);
    let mut d = Poly::<4>::zero(&f);
    for (idx, c) in coeffs.into_iter().enumerate() {
        let (a, r) = (idx / (n1 * n2 * n3), idx % (n1 * n2 * n3));
        let (b, r) = (r / (n2 * n3), r % (n2 * n3));
        let (cc, dd) = (r / n3, r % n3);
        let e = [a as i64 + lo[0], b as i64 + lo[1], cc as i64 + lo[2], dd as i64 + lo[3]];
        d.add_term(e, c);
    }
    let root = curves::p_power_divisibility(&d, 1);
    Ok(ProbeReport { p_power: root.is_some(), root, d, grid: counts })
}

/// Tensor-product interpolation of values on a 4-dimensional grid
/// (row-major); returns coefficients in the same layout.
fn interpolate_tensor(f: &FieldCtx, nodes: &[Vec<Fe>; 4], counts: &[usize; 4], mut data: Vec<Fe>) -> Vec<Fe> {
    for axis in 0..4 {
        let stride: usize = counts[axis + 1..].iter().product();
        let len = counts[axis];
        let outer: usize = counts[..axis].iter().product();
        for o in 0..outer {
            for s in 0..stride {
                let base = o * len * stride + s;
                let vals: Vec<Fe> = (0..len).map(|k| data[base + k * stride]).collect();
                let c: UPoly = poly::interpolate(f, &nodes[axis], &vals);
                for (k, x) in c.into_iter().enumerate() {
                    data[base + k * stride] = x;
                }
            }
        }
    }
    data
}
