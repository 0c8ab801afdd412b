//! Fixed benchmark inputs.

use std::collections::BTreeMap;

use fuchsnorm_core::{FuchsianSystem, Matrix, MultiIndex, NonlinearSystem, Scalar, VecPoly};

fn r<T: Scalar>(n: i64, d: i64) -> T {
    T::from_ratio(n, d)
}

/// Two-dimensional system with three poles and non-commuting residues.
pub fn system<T: Scalar>() -> FuchsianSystem<T> {
    let m = |a: [(i64, i64); 4]| {
        Matrix::from_rows(vec![vec![r(a[0].0, a[0].1), r(a[1].0, a[1].1)], vec![r(a[2].0, a[2].1), r(a[3].0, a[3].1)]])
            .expect("2x2")
    };
    FuchsianSystem::new(
        vec![r(-1, 1), r(1, 3), r(1, 1)],
        vec![
            m([(3, 4), (1, 1), (0, 1), (5, 4)]),
            m([(1, 2), (0, 1), (1, 2), (4, 3)]),
            m([(6, 5), (-1, 2), (0, 1), (2, 3)]),
        ],
        0.0,
    )
    .expect("valid system")
}

/// Right-hand side of the given degree with small integer coefficients.
pub fn rhs<T: Scalar>(degree: usize) -> VecPoly<T> {
    let coeffs = (0..=degree).map(|k| vec![r(k as i64 % 3 + 1, 1), r(1 - k as i64 % 2, 1)]).collect();
    VecPoly::new(2, coeffs).expect("two components")
}

/// Nonlinearity with quadratic and cubic terms, linear in `x`.
pub fn nonlinear<T: Scalar>() -> NonlinearSystem<T> {
    let mut f = BTreeMap::new();
    f.insert(MultiIndex::new(vec![2, 0]), VecPoly::new(2, vec![vec![r(1, 1), r(0, 1)], vec![r(0, 1), r(1, 1)]]).unwrap());
    f.insert(MultiIndex::new(vec![1, 1]), VecPoly::new(2, vec![vec![r(0, 1), r(-1, 1)]]).unwrap());
    f.insert(MultiIndex::new(vec![0, 3]), VecPoly::new(2, vec![vec![r(1, 2), r(1, 1)], vec![r(1, 1), r(0, 1)]]).unwrap());
    NonlinearSystem::new(system(), f).expect("valid nonlinearity")
}
