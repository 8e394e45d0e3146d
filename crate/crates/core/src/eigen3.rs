//! Eigenvalues and eigenvectors of general 3x3 complex matrices via the
//! characteristic cubic, with Newton polishing.

use num_complex::Complex64;

pub type Matrix3 = [[Complex64; 3]; 3];

/// Pairs closer than this are flagged as near-degenerate.
pub const DEGENERACY_GAP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigen3 {
    /// Sorted by ascending real part, ties by ascending imaginary part.
    pub values: [Complex64; 3],
    /// Unit-norm right eigenvectors, one per value.
    pub vectors: [[Complex64; 3]; 3],
    /// Some pair of eigenvalues lies within [`DEGENERACY_GAP`].
    pub near_degenerate: bool,
}

fn trace(m: &Matrix3) -> Complex64 {
    m[0][0] + m[1][1] + m[2][2]
}

fn det(m: &Matrix3) -> Complex64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn principal_minors(m: &Matrix3) -> Complex64 {
    (m[0][0] * m[1][1] - m[0][1] * m[1][0])
        + (m[0][0] * m[2][2] - m[0][2] * m[2][0])
        + (m[1][1] * m[2][2] - m[1][2] * m[2][1])
}

/// Roots of the monic cubic `x^3 + a x^2 + b x + c` (Cardano, complex arithmetic).
fn cubic_roots(a: Complex64, b: Complex64, c: Complex64) -> [Complex64; 3] {
    let d0 = a * a - 3.0 * b;
    let d1 = 2.0 * a * a * a - 9.0 * a * b + 27.0 * c;
    let disc = (d1 * d1 - 4.0 * d0 * d0 * d0).sqrt();
    let plus = 0.5 * (d1 + disc);
    let minus = 0.5 * (d1 - disc);
    let big = if plus.norm() >= minus.norm() { plus } else { minus };
    let third = -a / 3.0;
    if big.norm() == 0.0 {
        return [third; 3];
    }
    let cbrt = big.powf(1.0 / 3.0);
    let omega = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
    let mut roots = [Complex64::new(0.0, 0.0); 3];
    let mut rot = Complex64::new(1.0, 0.0);
    for r in roots.iter_mut() {
        let ck = rot * cbrt;
        *r = third - (ck + d0 / ck) / 3.0;
        rot *= omega;
    }
    roots
}

/// A few Newton steps on the cubic, keeping a step only if it lowers |p|.
fn polish(root: Complex64, a: Complex64, b: Complex64, c: Complex64) -> Complex64 {
    let p = |x: Complex64| ((x + a) * x + b) * x + c;
    let dp = |x: Complex64| (3.0 * x + 2.0 * a) * x + b;
    let mut x = root;
    for _ in 0..4 {
        let fx = p(x);
        let d = dp(x);
        if d.norm() == 0.0 {
            break;
        }
        let next = x - fx / d;
        if p(next).norm() < fx.norm() {
            x = next;
        } else {
            break;
        }
    }
    x
}

fn cross(u: &[Complex64; 3], v: &[Complex64; 3]) -> [Complex64; 3] {
    [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ]
}

fn norm(v: &[Complex64; 3]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Null vector of `m - lambda I`: the largest cross product of two of its
/// rows. Falls back to a unit vector when the shifted matrix has rank <= 1.
fn eigenvector(m: &Matrix3, lambda: Complex64) -> [Complex64; 3] {
    let mut a = *m;
    for (i, row) in a.iter_mut().enumerate() {
        row[i] -= lambda;
    }
    let candidates = [cross(&a[0], &a[1]), cross(&a[0], &a[2]), cross(&a[1], &a[2])];
    let best = candidates
        .iter()
        .copied()
        .max_by(|x, y| norm(x).total_cmp(&norm(y)))
        .expect("three candidates");
    let n = norm(&best);
    let scale = a.iter().map(norm).fold(0.0, f64::max).max(1.0);
    if n > 1e-14 * scale * scale {
        return best.map(|z| z / n);
    }
    // Rank <= 1: any vector orthogonal (bilinearly) to the dominant row.
    let row = *a
        .iter()
        .max_by(|x, y| norm(x).total_cmp(&norm(y)))
        .expect("three rows");
    if norm(&row) == 0.0 {
        return [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
    }
    let basis = [
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)],
        [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
    ];
    let v = basis
        .iter()
        .map(|e| cross(&row, e))
        .max_by(|x, y| norm(x).total_cmp(&norm(y)))
        .expect("three basis vectors");
    let n = norm(&v);
    v.map(|z| z / n)
}

/// Eigen-decomposition of a 3x3 complex matrix.
///
/// The matrix is shifted by `trace / 3` before forming the characteristic
/// polynomial so large common diagonal offsets do not cost precision.
pub fn eigen3(m: &Matrix3) -> Eigen3 {
    let shift = trace(m) / 3.0;
    let mut b = *m;
    for (i, row) in b.iter_mut().enumerate() {
        row[i] -= shift;
    }
    // det(x I - B) = x^3 - tr(B) x^2 + minors(B) x - det(B)
    let a2 = -trace(&b);
    let a1 = principal_minors(&b);
    let a0 = -det(&b);
    let mut values = cubic_roots(a2, a1, a0).map(|r| polish(r, a2, a1, a0) + shift);
    values.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));

    let near_degenerate = (0..3).any(|i| {
        (i + 1..3).any(|j| (values[i] - values[j]).norm() < DEGENERACY_GAP)
    });
    let vectors = values.map(|l| eigenvector(m, l));
    Eigen3 {
        values,
        vectors,
        near_degenerate,
    }
}

/// `||(m - lambda I) v||` for diagnostics and tests.
pub fn residual(m: &Matrix3, lambda: Complex64, v: &[Complex64; 3]) -> f64 {
    let mut r = [Complex64::new(0.0, 0.0); 3];
    for i in 0..3 {
        for j in 0..3 {
            r[i] += m[i][j] * v[j];
        }
        r[i] -= lambda * v[i];
    }
    norm(&r)
}

pub fn matrix_trace(m: &Matrix3) -> Complex64 {
    trace(m)
}
