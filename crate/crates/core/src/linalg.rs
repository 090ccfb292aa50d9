//! Small dense linear algebra: determinants and solves over any [`Scalar`],
//! Gram-based wedge volumes over floats.

use num_traits::Float;

use crate::error::{check_dim, Error, Result};
use crate::scalar::Scalar;

/// Index of the largest-magnitude nonzero entry in column `col` at or below `from`.
fn pivot_row<S: Scalar>(a: &[Vec<S>], col: usize, from: usize) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (r, row) in a.iter().enumerate().skip(from) {
        if row[col].is_zero() {
            continue;
        }
        let m = row[col].approx().abs();
        if best.map_or(true, |(_, bm)| m > bm) {
            best = Some((r, m));
        }
    }
    best.map(|(r, _)| r)
}

/// Determinant by Gaussian elimination with partial pivoting. Exact for rational `S`.
pub fn det<S: Scalar>(m: &[Vec<S>]) -> S {
    let n = m.len();
    let mut a: Vec<Vec<S>> = m.to_vec();
    for row in &a {
        assert_eq!(row.len(), n, "determinant needs a square matrix");
    }
    let mut d = S::one();
    for k in 0..n {
        let Some(p) = pivot_row(&a, k, k) else {
            return S::zero();
        };
        if p != k {
            a.swap(p, k);
            d = -d;
        }
        let piv = a[k][k].clone();
        d = d * piv.clone();
        for r in (k + 1)..n {
            if a[r][k].is_zero() {
                continue;
            }
            let f = a[r][k].clone() / piv.clone();
            for c in k..n {
                let v = a[k][c].clone() * f.clone();
                a[r][c] = a[r][c].clone() - v;
            }
        }
    }
    d
}

/// Solves `A x = b` for square nonsingular `A`; `None` when singular.
pub fn solve<S: Scalar>(m: &[Vec<S>], b: &[S]) -> Option<Vec<S>> {
    let n = m.len();
    assert_eq!(b.len(), n, "right-hand side has wrong length");
    let mut a: Vec<Vec<S>> = m
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            assert_eq!(row.len(), n, "solve needs a square matrix");
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    for k in 0..n {
        let p = pivot_row(&a, k, k)?;
        a.swap(p, k);
        let piv = a[k][k].clone();
        for r in 0..n {
            if r == k || a[r][k].is_zero() {
                continue;
            }
            let f = a[r][k].clone() / piv.clone();
            for c in k..=n {
                let v = a[k][c].clone() * f.clone();
                a[r][c] = a[r][c].clone() - v;
            }
        }
    }
    Some((0..n).map(|k| a[k][n].clone() / a[k][k].clone()).collect())
}

/// Matrix whose columns are `cols`.
pub fn from_columns<S: Scalar>(cols: &[Vec<S>]) -> Vec<Vec<S>> {
    let rows = cols.first().map_or(0, |c| c.len());
    (0..rows).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect()
}

/// Volume of the parallelepiped spanned by `vectors`, `sqrt(det Gram)`.
///
/// The Gram determinant is factored with diagonal (complete) pivoting; pivots
/// that are negative only through rounding (above `-1e-12 * scale`) count as zero.
/// The empty family has volume 1.
pub fn wedge_volume<F: Float>(vectors: &[Vec<F>]) -> Result<F> {
    let m = vectors.len();
    if m == 0 {
        return Ok(F::one());
    }
    let n = vectors[0].len();
    for v in vectors {
        check_dim(n, v.len())?;
    }
    if m > n {
        return Err(Error::InvalidArgument(format!("{m} vectors in dimension {n}")));
    }
    let mut g = vec![vec![F::zero(); m]; m];
    for i in 0..m {
        for j in i..m {
            let s = vectors[i].iter().zip(&vectors[j]).fold(F::zero(), |acc, (a, b)| acc + *a * *b);
            g[i][j] = s;
            g[j][i] = s;
        }
    }
    let scale = (0..m).fold(F::zero(), |acc, i| acc.max(g[i][i]));
    if scale == F::zero() {
        return Ok(F::zero());
    }
    let mut det = F::one();
    for k in 0..m {
        let mut p = k;
        for i in (k + 1)..m {
            if g[i][i] > g[p][p] {
                p = i;
            }
        }
        g.swap(k, p);
        for row in g.iter_mut() {
            row.swap(k, p);
        }
        let piv = g[k][k];
        if piv <= F::zero() {
            // Largest remaining pivot is not positive, so the rest of the Gram
            // matrix is rank deficient; pivots in (-1e-12 * scale, 0] are rounding noise.
            return Ok(F::zero());
        }
        det = det * piv;
        for i in (k + 1)..m {
            let f = g[i][k] / piv;
            for j in (k + 1)..m {
                g[i][j] = g[i][j] - f * g[k][j];
            }
        }
    }
    Ok(det.max(F::zero()).sqrt())
}

pub const DEFAULT_SPAN_TOL: f64 = 1e-8;

/// True iff the `n` vectors span `R^n` in the scale-free sense
/// `wedge_volume > tol · Π ||v_i||`.
pub fn spanning_check<F: Float>(vectors: &[Vec<F>], n: usize, tol: F) -> Result<bool> {
    check_dim(n, vectors.len())?;
    let norms = vectors.iter().fold(F::one(), |acc, v| acc * v.iter().fold(F::zero(), |s, x| s + *x * *x).sqrt());
    if norms == F::zero() {
        return Ok(false);
    }
    Ok(wedge_volume(vectors)? > tol * norms)
}

/// All `k`-element subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
