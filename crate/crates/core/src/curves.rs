//! Plane curves `H(X, Y) = 0` over a finite field: Newton polygons, germ
//! multiplicities along `Y = 0`, squarefree parts and `p`-power structure.

use serde::Serialize;
use thiserror::Error;

use crate::ffield::{Fe, FieldCtx};
use crate::mpoly::{BivarPoly, Poly};
use crate::poly::{self, UPoly};
use crate::weyl::SL2Mat;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurveError {
    #[error("the zero polynomial defines no curve")]
    ZeroPolynomial,
    #[error("polynomial is a p-th power (both partial derivatives vanish)")]
    IsPPower,
    #[error("expected a polynomial, found negative exponents")]
    LaurentInput,
}

impl CurveError {
    pub fn code(&self) -> &'static str {
        match self {
            CurveError::ZeroPolynomial => "zero-polynomial",
            CurveError::IsPPower => "is-p-power",
            CurveError::LaurentInput => "laurent-input",
        }
    }
}

/// Multiplicity at `y = 0` read off a support: among the points with the
/// largest `i - j`, the largest `j`.
pub fn support_multiplicity_y0(support: impl IntoIterator<Item = (i64, i64)>) -> Option<u32> {
    let pts: Vec<(i64, i64)> = support.into_iter().collect();
    let top = pts.iter().map(|&(i, j)| i - j).max()?;
    pts.iter().filter(|&&(i, j)| i - j == top).map(|&(_, j)| j.max(0) as u32).max()
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i128 {
    (a.0 - o.0) as i128 * (b.1 - o.1) as i128 - (a.1 - o.1) as i128 * (b.0 - o.0) as i128
}

/// Vertices of the convex hull of a point set, counter-clockwise from the
/// lexicographically smallest point, without collinear points.
pub fn convex_hull(points: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut pts = points.to_vec();
    pts.sort_unstable();
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut hull: Vec<(i64, i64)> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(i64, i64)>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &q in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0 {
                hull.pop();
            }
            hull.push(q);
        }
        hull.pop();
    }
    hull
}

/// Newton polygon of `H`: hull vertices of its support, sorted lexicographically.
pub fn newton_polygon(h: &BivarPoly) -> Vec<(i64, i64)> {
    let pts: Vec<(i64, i64)> = h.support().iter().map(|e| (e[0], e[1])).collect();
    let mut v = convex_hull(&pts);
    v.sort_unstable();
    v
}

/// Multiplicity of the curve `H = 0` along `Y = 0` at the `X = ∞` end,
/// read off the Newton polygon.
pub fn germ_multiplicity_y0(h: &BivarPoly) -> Result<u32, CurveError> {
    support_multiplicity_y0(h.support().iter().map(|e| (e[0], e[1]))).ok_or(CurveError::ZeroPolynomial)
}

/// Largest `k` with `Y^k | H`.
pub fn zero_section_multiplicity(h: &BivarPoly) -> Option<u32> {
    h.support().iter().map(|e| e[1].max(0) as u32).min()
}

// --- F[X][Y] arithmetic, used for gcds -------------------------------------

/// Coefficient list in `Y`, each entry a polynomial in `X`.
type YPoly = Vec<UPoly>;

fn to_ypoly(h: &BivarPoly) -> YPoly {
    let dy = h.degree_in(1).unwrap_or(-1);
    let mut out: YPoly = vec![Vec::new(); (dy + 1) as usize];
    for (e, c) in h.terms() {
        let col = &mut out[e[1] as usize];
        let i = e[0] as usize;
        if col.len() <= i {
            col.resize(i + 1, Fe::ZERO);
        }
        col[i] = *c;
    }
    out
}

fn from_ypoly(f: &FieldCtx, a: &[UPoly]) -> BivarPoly {
    let mut out = BivarPoly::zero(f);
    for (j, col) in a.iter().enumerate() {
        for (i, c) in col.iter().enumerate() {
            out.add_term([i as i64, j as i64], *c);
        }
    }
    out
}

fn ytrim(mut a: YPoly) -> YPoly {
    while a.last().is_some_and(|c| c.is_empty()) {
        a.pop();
    }
    a
}

fn content(f: &FieldCtx, a: &[UPoly]) -> UPoly {
    a.iter().fold(Vec::new(), |g, c| poly::gcd(f, &g, c))
}

fn primitive_part(f: &FieldCtx, a: &[UPoly]) -> YPoly {
    let c = content(f, a);
    if c.is_empty() {
        return Vec::new();
    }
    ytrim(a.iter().map(|x| poly::divrem(f, x, &c).0).collect())
}

/// A nonzero multiple of the pseudo-remainder of `a` by `b` in `Y`.
fn pseudo_rem(f: &FieldCtx, a: &[UPoly], b: &[UPoly]) -> YPoly {
    let db = b.len() - 1;
    let lb = &b[db];
    let mut r = a.to_vec();
    while r.len() > db {
        let dr = r.len() - 1;
        let lr = r[dr].clone();
        let shift = dr - db;
        for k in 0..r.len() {
            r[k] = poly::mul(f, &r[k], lb);
        }
        for (k, bk) in b.iter().enumerate() {
            r[shift + k] = poly::sub(f, &r[shift + k], &poly::mul(f, &lr, bk));
        }
        r = ytrim(r);
    }
    r
}

/// Exact quotient `a / b` in `F[X][Y]`, if it exists.
fn ydiv(f: &FieldCtx, a: &[UPoly], b: &[UPoly]) -> Option<YPoly> {
    let b = ytrim(b.to_vec());
    let db = b.len().checked_sub(1)?;
    let mut r = ytrim(a.to_vec());
    if r.len() <= db {
        return r.is_empty().then(Vec::new);
    }
    let mut q: YPoly = vec![Vec::new(); r.len() - db];
    while r.len() > db {
        let shift = r.len() - 1 - db;
        let (c, rem) = poly::divrem(f, &r[r.len() - 1], &b[db]);
        if !rem.is_empty() {
            return None;
        }
        for (k, bk) in b.iter().enumerate() {
            r[shift + k] = poly::sub(f, &r[shift + k], &poly::mul(f, &c, bk));
        }
        q[shift] = c;
        r = ytrim(r);
    }
    r.is_empty().then(|| ytrim(q))
}

/// Greatest common divisor in `F[X, Y]` (primitive remainder sequence in `Y`
/// over `F[X]`), normalized to leading coefficient 1.
pub fn gcd(a: &BivarPoly, b: &BivarPoly) -> BivarPoly {
    let f = a.ctx();
    if a.is_zero() {
        return b.normalized();
    }
    if b.is_zero() {
        return a.normalized();
    }
    let (ya, yb) = (to_ypoly(a), to_ypoly(b));
    let c = poly::gcd(f, &content(f, &ya), &content(f, &yb));
    let mut x = primitive_part(f, &ya);
    let mut y = primitive_part(f, &yb);
    if x.len() < y.len() {
        std::mem::swap(&mut x, &mut y);
    }
    while !y.is_empty() {
        if y.len() == 1 {
            // a primitive polynomial free of Y is a unit
            x = vec![vec![f.one()]];
            break;
        }
        let r = pseudo_rem(f, &x, &y);
        x = y;
        y = primitive_part(f, &r);
    }
    let g: YPoly = x.iter().map(|col| poly::mul(f, col, &c)).collect();
    from_ypoly(f, &ytrim(g)).normalized()
}

/// Exact division in `F[X, Y]`.
pub fn exact_div(a: &BivarPoly, b: &BivarPoly) -> Option<BivarPoly> {
    ydiv(a.ctx(), &to_ypoly(a), &to_ypoly(b)).map(|q| from_ypoly(a.ctx(), &q))
}

/// `H^{1/p}` for a polynomial in `X^p, Y^p` (coefficients via inverse Frobenius).
fn pth_root<const V: usize>(h: &Poly<V>, m: u32) -> Option<Poly<V>> {
    let f = h.ctx();
    let q = (f.p() as i64).checked_pow(m)?;
    let mut out = Poly::zero(f);
    for (e, c) in h.terms() {
        let mut e2 = *e;
        for k in e2.iter_mut() {
            if k.rem_euclid(q) != 0 {
                return None;
            }
            *k = k.div_euclid(q);
        }
        let mut c2 = *c;
        for _ in 0..m {
            c2 = f.frobenius_inv(c2);
        }
        out.add_term(e2, c2);
    }
    Some(out)
}

/// Product of the distinct irreducible factors of `H`, leading coefficient 1.
///
/// Factors with multiplicity divisible by `p` are found by stripping the
/// separable part and taking `p`-th roots of what is left.
pub fn squarefree_part(h: &BivarPoly) -> Result<BivarPoly, CurveError> {
    if h.is_zero() {
        return Err(CurveError::ZeroPolynomial);
    }
    if h.has_negative_exponents() {
        return Err(CurveError::LaurentInput);
    }
    if h.partial(0).is_zero() && h.partial(1).is_zero() {
        return Err(CurveError::IsPPower);
    }
    Ok(radical(h))
}

fn radical(h: &BivarPoly) -> BivarPoly {
    let f = h.ctx();
    if h.is_constant() {
        return BivarPoly::one(f);
    }
    let (hx, hy) = (h.partial(0), h.partial(1));
    if hx.is_zero() && hy.is_zero() {
        return radical(&pth_root(h, 1).expect("vanishing partials mean a p-th power"));
    }
    let g = gcd(h, &gcd(&hx, &hy));
    let s = exact_div(h, &g).expect("gcd divides");
    let mut rest = g;
    loop {
        let c = gcd(&rest, &s);
        if c.is_constant() {
            break;
        }
        rest = exact_div(&rest, &c).expect("gcd divides");
    }
    if rest.is_constant() {
        s.normalized()
    } else {
        s.mul(&radical(&rest)).normalized()
    }
}

/// `E` with `E^{p^m} = H`, when the support and coefficients allow it.
pub fn p_power_divisibility<const V: usize>(h: &Poly<V>, m: u32) -> Option<Poly<V>> {
    if h.is_zero() || h.is_constant() {
        return None;
    }
    let root = pth_root(h, m)?;
    let q = h.ctx().p().checked_pow(m)?;
    (root.pow(q) == *h).then_some(root)
}

/// Largest `m ≥ 1` with `H = E^{p^m}`, together with `E`.
pub fn max_p_power<const V: usize>(h: &Poly<V>) -> Option<(u32, Poly<V>)> {
    let mut best = None;
    let mut m = 1;
    while let Some(e) = p_power_divisibility(h, m) {
        best = Some((m, e));
        m += 1;
    }
    best
}

/// `H(aX + bY, cX + dY)`.
pub fn transform(h: &BivarPoly, g: &SL2Mat) -> BivarPoly {
    h.substitute_linear(g.a, g.b, g.c, g.d)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Sl2Multiplicity {
    pub matrix: [i64; 4],
    pub multiplicity: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PPowerInfo {
    pub m: u32,
    pub root: String,
}

/// Summary of the invariants of one curve.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CurveReport {
    pub degree: i64,
    pub newton_polygon: Vec<(i64, i64)>,
    pub y0_mult: u32,
    pub sl2: Vec<Sl2Multiplicity>,
    pub squarefree: bool,
    pub p_power: Option<PPowerInfo>,
    pub zero_section_mult: u32,
}

pub fn curve_report(h: &BivarPoly, sl2: &[SL2Mat]) -> Result<CurveReport, CurveError> {
    if h.is_zero() {
        return Err(CurveError::ZeroPolynomial);
    }
    if h.has_negative_exponents() {
        return Err(CurveError::LaurentInput);
    }
    let squarefree = if h.is_constant() {
        true
    } else {
        match squarefree_part(h) {
            Ok(r) => r == h.normalized(),
            Err(CurveError::IsPPower) => false,
            Err(e) => return Err(e),
        }
    };
    let sl2 = sl2
        .iter()
        .map(|g| {
            let t = transform(h, g);
            Ok(Sl2Multiplicity { matrix: [g.a, g.b, g.c, g.d], multiplicity: germ_multiplicity_y0(&t)? })
        })
        .collect::<Result<_, CurveError>>()?;
    Ok(CurveReport {
        degree: h.total_degree().unwrap_or(0),
        newton_polygon: newton_polygon(h),
        y0_mult: germ_multiplicity_y0(h)?,
        sl2,
        squarefree,
        p_power: max_p_power(h).map(|(m, e)| PPowerInfo { m, root: e.to_string() }),
        zero_section_mult: zero_section_multiplicity(h).unwrap_or(0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bp(f: &FieldCtx, s: &str) -> BivarPoly {
        BivarPoly::parse(f, s).unwrap()
    }

    #[test]
    fn hull_drops_interior_and_collinear_points() {
        let pts = [(0, 0), (2, 0), (1, 0), (1, 1), (0, 2), (1, 2), (2, 2)];
        assert_eq!(convex_hull(&pts), vec![(0, 0), (2, 0), (2, 2), (0, 2)]);
        assert_eq!(convex_hull(&[(3, 1)]), vec![(3, 1)]);
    }

    #[test]
    fn multiplicity_from_support() {
        assert_eq!(support_multiplicity_y0([(0, 1)]), Some(1));
        assert_eq!(support_multiplicity_y0([(1, 1), (0, 0)]), Some(1));
        assert_eq!(support_multiplicity_y0([(2, 0), (0, 1)]), Some(0));
        assert_eq!(support_multiplicity_y0([(3, 2), (1, 0), (0, 0)]), Some(2));
        assert_eq!(support_multiplicity_y0(std::iter::empty()), None);
    }

    #[test]
    fn bivariate_gcd() {
        let f = FieldCtx::prime(7).unwrap();
        let a = bp(&f, "(X*Y - 1)*(Y - X^2)*(X + 2)");
        let b = bp(&f, "(X*Y - 1)*(Y + X)*(X + 2)^2");
        assert_eq!(gcd(&a, &b), bp(&f, "(X*Y - 1)*(X + 2)").normalized());
        assert_eq!(gcd(&bp(&f, "Y - X^2"), &bp(&f, "Y + 1")), BivarPoly::one(&f));
        assert_eq!(exact_div(&a, &bp(&f, "X + 2")), Some(bp(&f, "(X*Y - 1)*(Y - X^2)")));
        assert_eq!(exact_div(&a, &bp(&f, "X + 3")), None);
    }

    #[test]
    fn radical_handles_p_multiple_multiplicities() {
        let f = FieldCtx::prime(3).unwrap();
        let base = bp(&f, "(Y - X^2)*(X + Y + 1)");
        let h = bp(&f, "(Y - X^2)^4*(X + Y + 1)^3*(X*Y + 1)");
        assert_eq!(squarefree_part(&h).unwrap(), base.mul(&bp(&f, "X*Y + 1")).normalized());
        assert_eq!(squarefree_part(&bp(&f, "(X + Y)^3")), Err(CurveError::IsPPower));
        // X^3 + Y is irreducible but inseparable in X
        let g = bp(&f, "(X^3 + Y)^2");
        assert_eq!(squarefree_part(&g).unwrap(), bp(&f, "X^3 + Y"));
    }

    #[test]
    fn p_power_roots() {
        let f = FieldCtx::new(5, 2, None).unwrap();
        let e = bp(&f, "X*Y - (t^5 - t)");
        let h = e.pow(25);
        assert_eq!(max_p_power(&h), Some((2, e.clone())));
        assert_eq!(p_power_divisibility(&e.pow(5), 1), Some(e.clone()));
        assert_eq!(p_power_divisibility(&e, 1), None);
        assert_eq!(p_power_divisibility(&BivarPoly::one(&f), 1), None);
    }

    #[test]
    fn report_for_parabola() {
        let f = FieldCtx::prime(5).unwrap();
        let h = bp(&f, "Y - X^2");
        let r = curve_report(&h, &[SL2Mat::FOURIER]).unwrap();
        assert_eq!(r.degree, 2);
        assert_eq!(r.y0_mult, 0);
        assert_eq!(r.newton_polygon, vec![(0, 1), (2, 0)]);
        assert!(r.squarefree);
        assert!(r.p_power.is_none());
        // Y - X^2 ↦ -X - Y^2
        assert_eq!(r.sl2[0].multiplicity, 0);
    }
}
