use dantzig_core::{Error, Matrix, ProblemInstance};
use proptest::prelude::*;

fn design() -> impl Strategy<Value = (usize, usize, Vec<f64>, Vec<f64>)> {
    (1usize..8, 1usize..8).prop_flat_map(|(n, p)| {
        (
            Just(n),
            Just(p),
            prop::collection::vec(-10.0..10.0f64, n * p),
            prop::collection::vec(-10.0..10.0f64, n),
        )
    })
}

proptest! {
    #[test]
    fn accepted_instances_satisfy_their_invariants((n, p, data, y) in design(), delta in 0.0..5.0f64) {
        let x = Matrix::from_row_major(n, p, data).unwrap();
        match ProblemInstance::from_design(x.clone(), y.clone(), delta) {
            Ok(prob) => {
                prop_assert_eq!((prob.n(), prob.p()), (n, p));
                prop_assert_eq!(prob.y().len(), n);
                prop_assert_eq!(prob.scaling().len(), p);
                prop_assert!(prob.scaling().iter().all(|d| *d > 0.0 && d.is_finite()));
                prop_assert!(prob.delta() >= 0.0);
                // Rebuilding gives the same D bit for bit.
                let again = ProblemInstance::from_design(x, y, delta).unwrap();
                let bits = |v: &[f64]| v.iter().map(|d| d.to_bits()).collect::<Vec<_>>();
                prop_assert_eq!(bits(prob.scaling()), bits(again.scaling()));
            }
            Err(Error::ZeroColumn(j)) => {
                prop_assert!(x.column(j).iter().all(|v| *v == 0.0));
            }
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn zero_columns_are_rejected((n, p, data, y) in design(), col in 0usize..8) {
        let col = col % p;
        let mut x = Matrix::from_row_major(n, p, data).unwrap();
        for i in 0..n {
            x.set(i, col, 0.0);
        }
        let first_zero = (0..p).find(|&j| x.column(j).iter().all(|v| *v == 0.0)).unwrap();
        prop_assert!(matches!(
            ProblemInstance::from_design(x, y, 0.1),
            Err(Error::ZeroColumn(j)) if j == first_zero
        ));
    }
}

#[test]
fn construction_examples() {
    let prob = ProblemInstance::from_design(Matrix::identity(2), vec![1.0, 1.0], 0.1).unwrap();
    assert_eq!(prob.scaling(), &[1.0, 1.0]);
    let x = Matrix::from_rows(&[[3.0], [4.0]]).unwrap();
    let prob = ProblemInstance::from_design(x, vec![0.0, 0.0], 0.0).unwrap();
    assert_eq!(prob.scaling(), &[5.0]);
    assert!(matches!(
        ProblemInstance::from_design(Matrix::identity(2), vec![1.0], 0.1),
        Err(Error::DimensionMismatch { .. })
    ));
    assert!(ProblemInstance::from_design(Matrix::identity(2), vec![1.0, 1.0], -0.1).is_err());
}
