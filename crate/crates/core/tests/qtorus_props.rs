use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use weylmod::ffield::primes_in;
use weylmod::mpoly::Poly;
use weylmod::qtorus::{self, LaurentOp, RootCtx};
use weylmod::MatrixFF;

fn admissible() -> Vec<RootCtx> {
    let mut out = Vec::new();
    for n in [2u64, 3, 4, 6, 8, 16] {
        for p in primes_in(3, 97) {
            if (p - 1) % n == 0 {
                out.push(RootCtx::new(p, n).unwrap());
            }
        }
    }
    out
}

#[test]
fn clock_shift_relations() {
    for rc in admissible() {
        let (u, v) = qtorus::clock_shift(&rc);
        let id = MatrixFF::identity(&rc.ctx, rc.n as usize);
        assert_eq!(u.mul(&v).unwrap(), v.mul(&u).unwrap().scale(rc.zeta));
        assert_eq!(u.pow(rc.n).unwrap(), id);
        assert_eq!(v.pow(rc.n).unwrap(), id);
        // primitive: no smaller power of ζ is 1
        assert!((1..rc.n).all(|k| rc.ctx.pow(rc.zeta, k as u128) != rc.ctx.one()));
    }
}

#[test]
fn determinant_is_central() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for rc in admissible() {
        let f = &rc.ctx;
        let p = LaurentOp::parse(&rc, "x1 + 2*x2 - 3*x1*x2 + x1^-1 + 5").unwrap();
        for _ in 0..5 {
            let (u, v) = (f.random_nonzero(&mut rng), f.random_nonzero(&mut rng));
            let d = qtorus::q_determinant(&p, &rc, u, v).unwrap();
            assert_eq!(qtorus::q_determinant(&p, &rc, f.mul(rc.zeta, u), v).unwrap(), d);
            assert_eq!(qtorus::q_determinant(&p, &rc, u, f.mul(rc.zeta, v)).unwrap(), d);
        }
    }
}

#[test]
fn central_polynomial_off_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for rc in admissible() {
        let f = &rc.ctx;
        let p = LaurentOp::parse(&rc, "x1 + x2 + 3*x1*x2^-1").unwrap();
        let c = match qtorus::central_polynomial(&p, &rc) {
            Ok(c) => c,
            Err(qtorus::QtorusError::InsufficientNodes { needed, available }) => {
                assert!(needed > available);
                continue;
            }
            Err(e) => panic!("{e}"),
        };
        for _ in 0..20 {
            let (u, v) = (f.random_nonzero(&mut rng), f.random_nonzero(&mut rng));
            let z = [f.pow(u, rc.n as u128), f.pow(v, rc.n as u128)];
            assert_eq!(c.eval(&z).unwrap(), qtorus::q_determinant(&p, &rc, u, v).unwrap());
        }
    }
}

#[test]
fn monomial_closed_forms() {
    for rc in admissible() {
        let f = &rc.ctx;
        let n = rc.n as i64;
        let sign = f.pow(rc.zeta, (n * (n - 1) / 2) as u128);
        let x1 = LaurentOp::parse(&rc, "x1").unwrap();
        let u = f.from_u64(2);
        let expect = f.mul(f.pow(u, n as u128), sign);
        assert_eq!(qtorus::q_determinant(&x1, &rc, u, f.one()).unwrap(), expect);
        if rc.node_supply() < 2 {
            continue;
        }
        let c = qtorus::central_polynomial(&LaurentOp::parse(&rc, "x1").unwrap(), &rc).unwrap();
        assert_eq!(c, Poly::monomial(f, [1, 0], sign));
        // x1*x2: N x N monomial matrix, C = ± Z1 Z2
        let c = qtorus::central_polynomial(&LaurentOp::parse(&rc, "x1*x2").unwrap(), &rc).unwrap();
        let coeff = c.coeff([1, 1]);
        assert_eq!(c.num_terms(), 1);
        assert!(coeff == f.one() || coeff == f.neg(f.one()), "N = {n}");
    }
}

#[test]
fn quantum_freshman() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    assert!(qtorus::quantum_freshman_check(&RootCtx::new(5, 1).unwrap(), 10, &mut rng));
    for rc in admissible() {
        assert!(qtorus::quantum_freshman_check(&rc, 10, &mut rng), "N = {} p = {}", rc.n, rc.p());
    }
}
