//! Dense univariate polynomials over a [`FieldCtx`], stored low degree first
//! with no trailing zeros (the zero polynomial is the empty vector).

use crate::ffield::{Fe, FieldCtx};

pub type UPoly = Vec<Fe>;

pub fn trim(mut a: UPoly) -> UPoly {
    while a.last().is_some_and(|c| c.is_zero()) {
        a.pop();
    }
    a
}

/// Degree, or `None` for the zero polynomial.
pub fn degree(a: &[Fe]) -> Option<usize> {
    a.iter().rposition(|c| !c.is_zero())
}

pub fn add(f: &FieldCtx, a: &[Fe], b: &[Fe]) -> UPoly {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|k| {
            let x = a.get(k).copied().unwrap_or(Fe::ZERO);
            let y = b.get(k).copied().unwrap_or(Fe::ZERO);
            f.add(x, y)
        })
        .collect();
    trim(out)
}

pub fn sub(f: &FieldCtx, a: &[Fe], b: &[Fe]) -> UPoly {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|k| {
            let x = a.get(k).copied().unwrap_or(Fe::ZERO);
            let y = b.get(k).copied().unwrap_or(Fe::ZERO);
            f.sub(x, y)
        })
        .collect();
    trim(out)
}

pub fn scale(f: &FieldCtx, a: &[Fe], c: Fe) -> UPoly {
    trim(a.iter().map(|&x| f.mul(x, c)).collect())
}

pub fn mul(f: &FieldCtx, a: &[Fe], b: &[Fe]) -> UPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Fe::ZERO; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = f.mul_add(x, y, out[i + j]);
        }
    }
    trim(out)
}

/// Quotient and remainder; panics if `b` is zero.
pub fn divrem(f: &FieldCtx, a: &[Fe], b: &[Fe]) -> (UPoly, UPoly) {
    let b = trim(b.to_vec());
    assert!(!b.is_empty(), "division by the zero polynomial");
    let mut r = trim(a.to_vec());
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let db = b.len() - 1;
    let lead_inv = f.inv(b[db]).expect("nonzero leading coefficient");
    let mut q = vec![Fe::ZERO; r.len() - db];
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let c = f.mul(r[r.len() - 1], lead_inv);
        q[shift] = c;
        for (k, &bk) in b.iter().enumerate() {
            r[shift + k] = f.sub(r[shift + k], f.mul(c, bk));
        }
        r = trim(r);
    }
    (trim(q), r)
}

pub fn make_monic(f: &FieldCtx, a: &[Fe]) -> UPoly {
    match a.last() {
        None => Vec::new(),
        Some(&lc) => scale(f, a, f.inv(lc).expect("trimmed polynomial")),
    }
}

/// Monic gcd (zero if both inputs are zero).
pub fn gcd(f: &FieldCtx, a: &[Fe], b: &[Fe]) -> UPoly {
    let mut x = trim(a.to_vec());
    let mut y = trim(b.to_vec());
    while !y.is_empty() {
        let (_, r) = divrem(f, &x, &y);
        x = y;
        y = r;
    }
    make_monic(f, &x)
}

pub fn eval(f: &FieldCtx, a: &[Fe], x: Fe) -> Fe {
    a.iter().rev().fold(Fe::ZERO, |acc, &c| f.mul_add(acc, x, c))
}

pub fn derivative(f: &FieldCtx, a: &[Fe]) -> UPoly {
    trim(
        a.iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| f.mul(c, f.from_u64(k as u64)))
            .collect(),
    )
}

/// Coefficients of the unique polynomial of degree `< nodes.len()` taking
/// `values[k]` at `nodes[k]` (Newton divided differences). Nodes must be
/// pairwise distinct. The result is not trimmed, so its length always equals
/// the number of nodes.
pub fn interpolate(f: &FieldCtx, nodes: &[Fe], values: &[Fe]) -> Vec<Fe> {
    assert_eq!(nodes.len(), values.len());
    let n = nodes.len();
    let mut dd = values.to_vec();
    for level in 1..n {
        for k in (level..n).rev() {
            let num = f.sub(dd[k], dd[k - 1]);
            let den = f.sub(nodes[k], nodes[k - level]);
            dd[k] = f.div(num, den).expect("interpolation nodes must be distinct");
        }
    }
    // Expand the Newton form from the innermost coefficient outwards.
    let mut coeffs = vec![Fe::ZERO; n];
    for k in (0..n).rev() {
        // coeffs <- coeffs * (x - nodes[k]) + dd[k]
        let mut next = vec![Fe::ZERO; n];
        for j in 0..n {
            if coeffs[j].is_zero() {
                continue;
            }
            if j + 1 < n {
                next[j + 1] = f.add(next[j + 1], coeffs[j]);
            }
            next[j] = f.sub(next[j], f.mul(coeffs[j], nodes[k]));
        }
        next[0] = f.add(next[0], dd[k]);
        coeffs = next;
    }
    coeffs
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn interpolation_recovers_random_polynomials() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for f in [FieldCtx::prime(13).unwrap(), FieldCtx::new(5, 2, None).unwrap()] {
            for n in 1..8 {
                let poly: Vec<Fe> = (0..n).map(|_| f.random(&mut rng)).collect();
                let nodes: Vec<Fe> = (0..n as u128).map(|k| f.element(k)).collect();
                let values: Vec<Fe> = nodes.iter().map(|&x| eval(&f, &poly, x)).collect();
                assert_eq!(interpolate(&f, &nodes, &values), poly);
            }
        }
    }

    #[test]
    fn divrem_and_gcd() {
        let f = FieldCtx::prime(7).unwrap();
        let c = |v: &[i64]| -> UPoly { trim(v.iter().map(|&x| f.from_i64(x)).collect()) };
        // (x - 1)(x + 2) and (x - 1)(x - 3)
        let a = mul(&f, &c(&[-1, 1]), &c(&[2, 1]));
        let b = mul(&f, &c(&[-1, 1]), &c(&[-3, 1]));
        assert_eq!(gcd(&f, &a, &b), c(&[-1, 1]));
        let (q, r) = divrem(&f, &a, &c(&[2, 1]));
        assert_eq!(q, c(&[-1, 1]));
        assert!(r.is_empty());
        assert_eq!(derivative(&f, &c(&[1, 2, 3])), c(&[2, 6]));
    }
}
