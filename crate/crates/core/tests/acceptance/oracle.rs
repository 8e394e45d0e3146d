//! Brute-force eigenvalue reference: characteristic polynomial of the
//! trace-shifted matrix, roots from a complex Schur decomposition of its
//! companion matrix.

use nalgebra::Matrix3;
use num_complex::Complex64;

pub fn companion_eigenvalues(m: &[[Complex64; 3]; 3]) -> [Complex64; 3] {
    let shift = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
    let a = Matrix3::from_fn(|i, j| if i == j { m[i][j] - shift } else { m[i][j] });
    // det(lambda I - A) = lambda^3 + c2 lambda^2 + c1 lambda + c0
    let c2 = -a.trace();
    let c1 = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)]
        + a[(0, 0)] * a[(2, 2)] - a[(0, 2)] * a[(2, 0)]
        + a[(1, 1)] * a[(2, 2)] - a[(1, 2)] * a[(2, 1)];
    let c0 = -a.determinant();
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let companion = Matrix3::new(-c2, -c1, -c0, one, zero, zero, zero, one, zero);
    let t = companion.schur().unpack().1;
    [t[(0, 0)] + shift, t[(1, 1)] + shift, t[(2, 2)] + shift]
}

/// Largest pairwise distance under the best matching of two triples.
pub fn matched_distance(a: &[Complex64; 3], b: &[Complex64; 3]) -> f64 {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    PERMS
        .iter()
        .map(|p| (0..3).map(|i| (a[i] - b[p[i]]).norm()).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min)
}
