//! Minimal dense linear algebra for the small fixed dimensions this crate
//! works at (d <= 6): determinant, inverse, and sup operator norm.

/// Row-major square matrix as nested vectors.
pub type Mat = Vec<Vec<f64>>;

pub fn identity(d: usize) -> Mat {
    (0..d)
        .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// Determinant via LU with partial pivoting.
pub fn det(a: &Mat) -> f64 {
    let d = a.len();
    let mut m = a.clone();
    let mut sign = 1.0;
    let mut out = 1.0;
    for k in 0..d {
        let pivot = (k..d)
            .max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))
            .unwrap();
        if m[pivot][k] == 0.0 {
            return 0.0;
        }
        if pivot != k {
            m.swap(pivot, k);
            sign = -sign;
        }
        out *= m[k][k];
        for i in k + 1..d {
            let f = m[i][k] / m[k][k];
            for j in k..d {
                m[i][j] -= f * m[k][j];
            }
        }
    }
    sign * out
}

/// Inverse via Gauss-Jordan with partial pivoting; `None` if singular to
/// working precision.
pub fn invert(a: &Mat) -> Option<Mat> {
    let d = a.len();
    let mut m = a.clone();
    let mut inv = identity(d);
    for k in 0..d {
        let pivot = (k..d)
            .max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))
            .unwrap();
        if m[pivot][k] == 0.0 || !m[pivot][k].is_finite() {
            return None;
        }
        m.swap(pivot, k);
        inv.swap(pivot, k);
        let p = m[k][k];
        for j in 0..d {
            m[k][j] /= p;
            inv[k][j] /= p;
        }
        for i in 0..d {
            if i == k {
                continue;
            }
            let f = m[i][k];
            if f == 0.0 {
                continue;
            }
            for j in 0..d {
                m[i][j] -= f * m[k][j];
                inv[i][j] -= f * inv[k][j];
            }
        }
    }
    Some(inv)
}

/// Operator norm for the sup norm on vectors: max absolute row sum.
pub fn op_norm_inf(a: &Mat) -> f64 {
    a.iter()
        .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `a * b` for square row-major matrices.
pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let d = a.len();
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| (0..d).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_and_inverse_agree_with_known_values() {
        let a: Mat = vec![vec![2.0, 1.0], vec![1.0, 1.0]];
        assert!((det(&a) - 1.0).abs() < 1e-12);
        let inv = invert(&a).unwrap();
        let prod = mat_mul(&a, &inv);
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((prod[i][j] - expect).abs() < 1e-12);
            }
        }
        assert!(invert(&vec![vec![1.0, 2.0], vec![2.0, 4.0]]).is_none());
    }

    #[test]
    fn sup_operator_norm_is_max_row_sum() {
        let a: Mat = vec![vec![1.0, -2.0], vec![0.5, 0.25]];
        assert_eq!(op_norm_inf(&a), 3.0);
    }
}
