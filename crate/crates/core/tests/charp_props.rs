use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weylmod::charp::{self, Op2};
use weylmod::linalg::det_dense;
use weylmod::mpoly::{BivarPoly, Poly};
use weylmod::weyl::{DiffOp, FieldOp};
use weylmod::{Fe, FieldCtx};

fn random_op(f: &FieldCtx, n: u32, rng: &mut ChaCha8Rng) -> FieldOp {
    let mut terms = Vec::new();
    for i in 0..=n {
        for j in 0..=n - i {
            if rng.gen_bool(0.6) {
                terms.push(((i, j), f.random(rng)));
            }
        }
    }
    terms.push(((0, n), f.one()));
    FieldOp::from_terms(f, terms)
}

/// Brute-force oracle: the curve evaluated on all of F_p against dense determinants.
fn dense_oracle_agrees(op: &FieldOp, d: &BivarPoly) -> bool {
    let f = op.ring();
    (0..f.p()).all(|u| {
        (0..f.p()).all(|v| {
            let (u, v) = (f.from_u64(u), f.from_u64(v));
            let m = charp::operator_matrix(op, u, v).unwrap();
            det_dense(&m).unwrap() == d.eval(&[u, v]).unwrap()
        })
    })
}

#[test]
fn curves_match_dense_determinants_everywhere() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for p in [5u64, 7, 11] {
        let f = FieldCtx::prime(p).unwrap();
        for n in 1..4 {
            let op = random_op(&f, n, &mut rng);
            let c = charp::support_curve(&op).unwrap();
            assert!(c.d.total_degree().unwrap_or(0) <= n as i64);
            assert!(dense_oracle_agrees(&op, &c.d), "p={p} op={op:?}");
            assert_eq!(charp::p_determinant(&op).unwrap(), c.d.coeff([0, 0]));
            assert_eq!(charp::extension_consistency(&op, &c, 2, 20, &mut rng).unwrap(), 0);
        }
    }
}

#[test]
fn parabola_against_oracle() {
    for p in [5, 7] {
        let f = FieldCtx::prime(p).unwrap();
        let op = DiffOp::parse("d - x^2").unwrap().reduce(&f).unwrap();
        let expect = BivarPoly::parse(&f, "Y - X^2").unwrap();
        assert!(dense_oracle_agrees(&op, &expect));
        assert_eq!(charp::support_curve(&op).unwrap().d, expect);
    }
}

#[test]
fn exponential_family() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for p in [7u64, 11, 31] {
        let f = FieldCtx::prime(p).unwrap();
        for _ in 0..10 {
            let deg = rng.gen_range(0..=5);
            let fp: Vec<Fe> = (0..=deg).map(|_| f.random(&mut rng)).collect();
            let mut terms = vec![((0, 1), f.one())];
            terms.extend(fp.iter().enumerate().map(|(k, &c)| ((k as u32, 0), f.neg(c))));
            let op = FieldOp::from_terms(&f, terms);
            assert_eq!(charp::support_curve(&op).unwrap().d, charp::exponential_curve(&fp, &f));
            assert!(charp::freshman_identity_check(&fp, &f));
        }
    }
}

#[test]
fn shift_covariance() {
    // P(x + c, ∂) has curve D(X + c, Y)
    let f = FieldCtx::prime(11).unwrap();
    let op = DiffOp::parse("x^2*d - d^2 + 3*x").unwrap().reduce(&f).unwrap();
    let shifted = DiffOp::parse("(x + 4)^2*d - d^2 + 3*(x + 4)").unwrap().reduce(&f).unwrap();
    let c = charp::support_curve(&op).unwrap().d;
    let cs = charp::support_curve(&shifted).unwrap().d;
    let mut moved = BivarPoly::zero(&f);
    let xp4 = BivarPoly::parse(&f, "X + 4").unwrap();
    for (e, k) in c.terms() {
        let t = xp4.pow(e[0] as u64).mul(&BivarPoly::monomial(&f, [0, e[1]], *k));
        moved = moved.add(&t);
    }
    assert_eq!(cs, moved);
}

#[test]
fn probe_euler_is_a_p_th_power() {
    for p in [3u64, 5] {
        let f = FieldCtx::new(p, 2, None).unwrap();
        let op = Op2::parse(&f, "x1*d1 + x2*d2 - t").unwrap();
        let r = charp::support_multidim_probe(&op).unwrap();
        let t = f.generator().unwrap();
        let c = f.sub(f.frobenius(t), t);
        let base = Poly::<4>::from_terms(&f, [([1, 0, 1, 0], f.one()), ([0, 1, 0, 1], f.one()), ([0; 4], f.neg(c))]);
        assert_eq!(r.d, base.pow(p));
        assert!(r.p_power);
        assert_eq!(r.root, Some(base));
    }
}

#[test]
fn probe_generic_degree_two_is_not_a_p_th_power() {
    let f = FieldCtx::new(5, 2, None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut terms = Vec::new();
    for i1 in 0..=2i64 {
        for i2 in 0..=2 - i1 {
            for j1 in 0..=2 - i1 - i2 {
                for j2 in 0..=2 - i1 - i2 - j1 {
                    terms.push(([i1, i2, j1, j2], f.from_u64(rng.gen_range(1..5))));
                }
            }
        }
    }
    let r = charp::support_multidim_probe(&Op2::from_terms(&f, terms)).unwrap();
    assert!(!r.p_power);
}

#[test]
fn probe_laurent_toda() {
    // two-particle periodic Toda: d1^2 + d2^2 + x1*x2^-1 + x2*x1^-1 - t
    let f = FieldCtx::new(3, 2, None).unwrap();
    let op = Op2::parse(&f, "d1^2 + d2^2 + x1*x2^-1 + x2*x1^-1 - t").unwrap();
    let r = charp::support_multidim_probe(&op);
    // degree range 2 * 3 + 1 = 7 nodes in X, within the 8 nonzero elements of F_9
    assert!(r.is_ok(), "{r:?}");
    let f5 = FieldCtx::prime(5).unwrap();
    let op = Op2::parse(&f5, "d1^2 + x1^-2").unwrap();
    assert!(matches!(charp::support_multidim_probe(&op), Err(charp::CharpError::GridExhausted { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rep_relations(idx in 0usize..46) {
        let p = weylmod::ffield::primes_in(2, 199)[idx];
        let f = FieldCtx::prime(p).unwrap();
        let r = charp::rep_generators(&f).unwrap();
        let comm = r.y.mul(&r.x).unwrap().sub(&r.x.mul(&r.y).unwrap()).unwrap();
        prop_assert_eq!(comm, weylmod::MatrixFF::identity(&f, p as usize));
        prop_assert!(r.x.pow(p).unwrap().is_zero());
        prop_assert!(r.y.pow(p).unwrap().is_zero());
    }

    #[test]
    fn banded_path_agrees_with_dense(seed in any::<u64>(), n in 1u32..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = FieldCtx::prime(31).unwrap();
        let op = random_op(&f, n, &mut rng);
        let (u, v) = (f.random(&mut rng), f.random(&mut rng));
        let (det, _) = charp::determinant_at(&op, u, v).unwrap();
        prop_assert_eq!(det, det_dense(&charp::operator_matrix(&op, u, v).unwrap()).unwrap());
    }
}
