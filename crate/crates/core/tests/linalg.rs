use mtnet_core::linalg::{spd_factor, spd_solve};
use mtnet_core::Matrix;
use proptest::prelude::*;

fn square(n: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-3.0f64..3.0, n * n).prop_map(move |v| Matrix::from_col_major(n, n, v).unwrap())
}

fn spd(n: usize) -> impl Strategy<Value = Matrix> {
    square(n).prop_map(move |a| {
        let mut s = a.matmul(&a.transpose()).symmetrize();
        s.add_diag(0.5);
        s
    })
}

proptest! {
    #[test]
    fn vec_of_product_is_kronecker_times_vec(a in square(3), x in square(3), b in square(3)) {
        let lhs = a.matmul(&x).matmul(&b).vec();
        let rhs = b.transpose().kron(&a).mul_vec(&x.vec());
        for (l, r) in lhs.iter().zip(&rhs) {
            prop_assert!((l - r).abs() < 1e-10 * (1.0 + l.abs()));
        }
    }

    #[test]
    fn unvec_inverts_vec(a in square(4)) {
        prop_assert_eq!(Matrix::unvec(4, &a.vec()).unwrap(), a);
    }

    #[test]
    fn cholesky_reconstructs_and_solves(s in spd(4), rhs in square(4)) {
        let f = spd_factor(&s).unwrap();
        prop_assert!(f.reconstruct().max_abs_diff(&s) < 1e-10 * (1.0 + s.max_abs()));
        let x = spd_solve(&f, &rhs).unwrap();
        prop_assert!(s.matmul(&x).max_abs_diff(&rhs) < 1e-8 * (1.0 + s.max_abs() * x.max_abs()));
    }

    #[test]
    fn log_det_of_kronecker_product(a in spd(2), b in spd(3)) {
        let (fa, fb) = (spd_factor(&a).unwrap(), spd_factor(&b).unwrap());
        let fk = spd_factor(&a.kron(&b)).unwrap();
        let want = 3.0 * fa.log_det() + 2.0 * fb.log_det();
        prop_assert!((fk.log_det() - want).abs() < 1e-9 * (1.0 + want.abs()));
    }

    #[test]
    fn trace_is_invariant_under_cyclic_shift(a in square(3), b in square(3)) {
        let ab = a.matmul(&b).trace();
        prop_assert!((ab - b.matmul(&a).trace()).abs() < 1e-10 * (1.0 + ab.abs()));
        prop_assert!((a.frobenius_dot(&b) - a.transpose().matmul(&b).trace()).abs() < 1e-10 * (1.0 + ab.abs()));
    }
}
