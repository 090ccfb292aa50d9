//! Real block realization of complex matrices.

use num_complex::Complex64;

use crate::linalg::det;

/// Replaces each entry `a + ib` by the block `[[a, −b], [b, a]]`.
pub fn realify(z: &[Vec<Complex64>]) -> Vec<Vec<f64>> {
    let n = z.len();
    let mut m = vec![vec![0.0; 2 * n]; 2 * n];
    for (i, row) in z.iter().enumerate() {
        assert_eq!(row.len(), n, "complex matrix must be square");
        for (j, c) in row.iter().enumerate() {
            m[2 * i][2 * j] = c.re;
            m[2 * i][2 * j + 1] = -c.im;
            m[2 * i + 1][2 * j] = c.im;
            m[2 * i + 1][2 * j + 1] = c.re;
        }
    }
    m
}

/// `det_C Z` by complex elimination with partial pivoting.
pub fn complex_det(z: &[Vec<Complex64>]) -> Complex64 {
    let n = z.len();
    let mut a = z.to_vec();
    let mut d = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let p = (k..n).max_by(|&x, &y| a[x][k].norm().total_cmp(&a[y][k].norm())).unwrap();
        if a[p][k].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if p != k {
            a.swap(p, k);
            d = -d;
        }
        let piv = a[k][k];
        d *= piv;
        for r in (k + 1)..n {
            let f = a[r][k] / piv;
            for c in k..n {
                let v = a[k][c] * f;
                a[r][c] -= v;
            }
        }
    }
    d
}

/// `(det of the real block matrix, |det_C Z|²)`; the two agree.
pub fn complex_block_det(z: &[Vec<Complex64>]) -> (f64, f64) {
    (det(&realify(z)), complex_det(z).norm_sqr())
}
