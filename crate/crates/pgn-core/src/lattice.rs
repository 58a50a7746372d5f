//! Unimodular lattices, the diagonal flow, and weak-stable perturbations.
//! Lattice dynamics run in binary64; the exact-rational world stays confined
//! to the template modules.

use rand::Rng;

use crate::dims::Dims;
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};

const UNIMODULAR_TOL: f64 = 1e-9;

/// A covolume-1 lattice in `R^d`, represented by the columns of a
/// determinant-(+-1) basis matrix, together with the flow split `(m, n)`.
#[derive(Debug, Clone)]
pub struct Lattice {
    dims: Dims,
    /// `cols[i]` is the i-th basis vector.
    cols: Vec<Vec<f64>>,
}

impl Lattice {
    pub fn from_basis_columns(dims: Dims, cols: Vec<Vec<f64>>) -> Result<Self> {
        let d = dims.d_usize();
        if cols.len() != d || cols.iter().any(|c| c.len() != d) {
            return Err(Error::Domain(format!("basis must be {d}x{d}")));
        }
        if cols.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Domain("basis entries must be finite".into()));
        }
        let lat = Lattice { dims, cols };
        let det = lat.det();
        if (det.abs() - 1.0).abs() > UNIMODULAR_TOL {
            return Err(Error::Invariant(format!(
                "basis determinant {det} is not within {UNIMODULAR_TOL} of +-1"
            )));
        }
        Ok(lat)
    }

    /// Row-major flat basis, as stored in lattice JSON.
    pub fn from_basis_row_major(dims: Dims, flat: &[f64]) -> Result<Self> {
        let d = dims.d_usize();
        if flat.len() != d * d {
            return Err(Error::Domain(format!(
                "expected {} entries for a {d}x{d} basis, got {}",
                d * d,
                flat.len()
            )));
        }
        let cols = (0..d)
            .map(|j| (0..d).map(|i| flat[i * d + j]).collect())
            .collect();
        Self::from_basis_columns(dims, cols)
    }

    /// The integer lattice `Z^d`.
    pub fn zd(dims: Dims) -> Self {
        let d = dims.d_usize();
        let cols = (0..d)
            .map(|j| (0..d).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Lattice { dims, cols }
    }

    /// `u_A Z^d` for an `m x n` matrix `A` (rows): the block unipotent
    /// `[[I_m, A], [0, I_n]]` applied to the integer lattice.
    pub fn from_matrix_a(dims: Dims, a_rows: &[Vec<f64>]) -> Result<Self> {
        let (m, n) = (dims.m() as usize, dims.n() as usize);
        if a_rows.len() != m || a_rows.iter().any(|r| r.len() != n) {
            return Err(Error::Domain(format!("A must be {m}x{n}")));
        }
        let d = dims.d_usize();
        let mut cols = Lattice::zd(dims).cols;
        for j in 0..n {
            for i in 0..m {
                cols[m + j][i] = a_rows[i][j];
            }
        }
        // Unipotent, so unimodular by construction.
        let _ = d;
        Ok(Lattice { dims, cols })
    }

    /// The lattice `x_theta` for a target vector `theta` (requires `n = 1`).
    pub fn from_theta(dims: Dims, theta: &[f64]) -> Result<Self> {
        if dims.n() != 1 {
            return Err(Error::Domain(
                "x_theta lattices are defined for n = 1".into(),
            ));
        }
        if theta.len() != dims.m() as usize {
            return Err(Error::Domain(format!(
                "theta must have {} entries, got {}",
                dims.m(),
                theta.len()
            )));
        }
        let a_rows: Vec<Vec<f64>> = theta.iter().map(|&t| vec![t]).collect();
        Self::from_matrix_a(dims, &a_rows)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn basis_columns(&self) -> &[Vec<f64>] {
        &self.cols
    }

    pub fn basis_row_major(&self) -> Vec<f64> {
        let d = self.dims.d_usize();
        let mut out = Vec::with_capacity(d * d);
        for i in 0..d {
            for col in &self.cols {
                out.push(col[i]);
            }
        }
        out
    }

    fn rows(&self) -> Mat {
        let d = self.dims.d_usize();
        (0..d)
            .map(|i| self.cols.iter().map(|c| c[i]).collect())
            .collect()
    }

    pub fn det(&self) -> f64 {
        linalg::det(&self.rows())
    }

    /// Largest flow time before `exp` overflows on this basis.
    pub fn max_flow_time(&self) -> f64 {
        // f64 overflows past exp(709.78); leave headroom for basis entries.
        let max_entry = self
            .cols
            .iter()
            .flatten()
            .fold(1.0_f64, |acc, x| acc.max(x.abs()));
        let budget = 700.0 - max_entry.ln();
        budget * self.dims.m().min(self.dims.n()) as f64
    }

    /// Applies `a_t = diag(e^{t/m} x m, e^{-t/n} x n)`. Negative `t` is
    /// allowed for diagnostics; the forward semigroup is `t >= 0`.
    pub fn apply_flow(&self, t: f64) -> Result<Self> {
        let max_t = self.max_flow_time();
        if !t.is_finite() || t.abs() > max_t {
            return Err(Error::FlowRange { t, max_t });
        }
        let m = self.dims.m() as usize;
        let up = (t / self.dims.m() as f64).exp();
        let down = (-t / self.dims.n() as f64).exp();
        let cols = self
            .cols
            .iter()
            .map(|c| {
                c.iter()
                    .enumerate()
                    .map(|(i, x)| if i < m { x * up } else { x * down })
                    .collect()
            })
            .collect();
        Ok(Lattice {
            dims: self.dims,
            cols,
        })
    }

    /// Left-multiplies the basis by the weak-stable element
    /// `[[A, 0], [H, B]]` built from `h_zero = (A, B)` and `h_minus = H`.
    /// `A` is `m x m`, `B` is `n x n`, `H` is `n x m`, all row-major.
    pub fn weak_stable_perturb(
        &self,
        h_minus: &[Vec<f64>],
        h_zero: (&[Vec<f64>], &[Vec<f64>]),
    ) -> Result<Self> {
        let h = weak_stable_element(self.dims, h_minus, h_zero)?;
        let d = self.dims.d_usize();
        let cols = self
            .cols
            .iter()
            .map(|c| {
                (0..d)
                    .map(|i| (0..d).map(|k| h[i][k] * c[k]).sum())
                    .collect()
            })
            .collect();
        Ok(Lattice {
            dims: self.dims,
            cols,
        })
    }
}

/// Assembles and checks the block-lower-triangular element of `H^- H^0`.
pub fn weak_stable_element(
    dims: Dims,
    h_minus: &[Vec<f64>],
    h_zero: (&[Vec<f64>], &[Vec<f64>]),
) -> Result<Mat> {
    let (m, n) = (dims.m() as usize, dims.n() as usize);
    let (a, b) = h_zero;
    if a.len() != m || a.iter().any(|r| r.len() != m) {
        return Err(Error::Domain(format!("h_zero block A must be {m}x{m}")));
    }
    if b.len() != n || b.iter().any(|r| r.len() != n) {
        return Err(Error::Domain(format!("h_zero block B must be {n}x{n}")));
    }
    if h_minus.len() != n || h_minus.iter().any(|r| r.len() != m) {
        return Err(Error::Domain(format!("h_minus must be {n}x{m}")));
    }
    let det_product = linalg::det(&a.to_vec()) * linalg::det(&b.to_vec());
    if (det_product.abs() - 1.0).abs() > UNIMODULAR_TOL {
        return Err(Error::Invariant(format!(
            "det(A) * det(B) = {det_product} is not within {UNIMODULAR_TOL} of +-1"
        )));
    }
    let d = m + n;
    let mut h = vec![vec![0.0; d]; d];
    for i in 0..m {
        h[i][..m].copy_from_slice(&a[i]);
    }
    for i in 0..n {
        h[m + i][..m].copy_from_slice(&h_minus[i]);
        h[m + i][m..].copy_from_slice(&b[i]);
    }
    Ok(h)
}

/// `log kappa(h) = log(|h|_op * |h^{-1}|_op)` for the sup operator norm;
/// bounds the log-minima gap between a lattice and its weak-stable
/// perturbation at every nonnegative flow time.
pub fn log_kappa_inf(h: &Mat) -> Result<f64> {
    let inv = linalg::invert(h)
        .ok_or_else(|| Error::Invariant("perturbation matrix is singular".into()))?;
    Ok((linalg::op_norm_inf(h) * linalg::op_norm_inf(&inv)).ln())
}

/// Random unimodular lattice with real shear coefficients. Unlike the
/// integer generator this has no rational substructure, so its minima under
/// deep flows stay well above float rounding noise.
pub fn random_real_unimodular(dims: Dims, shears: usize, rng: &mut impl Rng) -> Lattice {
    let d = dims.d_usize();
    let mut cols = Lattice::zd(dims).cols;
    let mut done = 0;
    let mut attempts = 0;
    while done < shears && attempts < shears * 20 {
        attempts += 1;
        let i = rng.gen_range(0..d);
        let j = rng.gen_range(0..d);
        if i == j {
            continue;
        }
        let u: f64 = rng.gen_range(-1.5..1.5);
        let update: Vec<f64> = (0..d).map(|r| cols[j][r] + u * cols[i][r]).collect();
        if update.iter().any(|x| x.abs() > 64.0) {
            continue;
        }
        cols[j] = update;
        done += 1;
    }
    Lattice { dims, cols }
}

/// Random integer unimodular lattice built from column shears; determinant
/// stays exactly 1 and entries stay small enough for brute-force oracles.
pub fn random_unimodular(dims: Dims, shears: usize, max_coeff: i64, rng: &mut impl Rng) -> Lattice {
    let d = dims.d_usize();
    let mut cols = Lattice::zd(dims).cols;
    let mut done = 0;
    let mut attempts = 0;
    while done < shears && attempts < shears * 20 {
        attempts += 1;
        let i = rng.gen_range(0..d);
        let j = rng.gen_range(0..d);
        if i == j {
            continue;
        }
        let k = loop {
            let k = rng.gen_range(-max_coeff..=max_coeff);
            if k != 0 {
                break k;
            }
        };
        let update: Vec<f64> = (0..d).map(|r| cols[j][r] + k as f64 * cols[i][r]).collect();
        // Keep entries comfortably inside the exactly-representable range.
        if update.iter().any(|x| x.abs() > 64.0) {
            continue;
        }
        cols[j] = update;
        done += 1;
    }
    Lattice { dims, cols }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn d21() -> Dims {
        Dims::new(2, 1).unwrap()
    }

    #[test]
    fn zero_matrix_gives_integer_lattice() {
        let x = Lattice::from_matrix_a(d21(), &[vec![0.0], vec![0.0]]).unwrap();
        assert_eq!(x.basis_row_major(), Lattice::zd(d21()).basis_row_major());
        assert!((x.det() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn theta_lattice_matches_block_form() {
        let x = Lattice::from_theta(d21(), &[0.25, 0.75]).unwrap();
        let b = x.basis_row_major();
        // Rows: (1, 0, 0.25), (0, 1, 0.75), (0, 0, 1).
        assert_eq!(b, vec![1.0, 0.0, 0.25, 0.0, 1.0, 0.75, 0.0, 0.0, 1.0]);
        assert!((x.det() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flow_is_identity_at_zero_and_preserves_det() {
        let x = Lattice::from_theta(d21(), &[0.3, 0.6]).unwrap();
        let y = x.apply_flow(0.0).unwrap();
        assert_eq!(x.basis_row_major(), y.basis_row_major());
        let z = x.apply_flow(3.0).unwrap();
        assert!((z.det().abs() - 1.0).abs() < 1e-9);
        assert!(x.apply_flow(1e6).is_err());
    }

    #[test]
    fn flow_group_law() {
        let x = Lattice::from_theta(d21(), &[0.3, 0.6]).unwrap();
        let a = x.apply_flow(2.5).unwrap().apply_flow(1.5).unwrap();
        let b = x.apply_flow(4.0).unwrap();
        for (u, v) in a.basis_row_major().iter().zip(b.basis_row_major()) {
            assert!((u - v).abs() <= 1e-12 * v.abs().max(1.0));
        }
    }

    #[test]
    fn perturbation_preserves_determinant_and_identity_case() {
        let dims = Dims::new(1, 1).unwrap();
        let x = Lattice::zd(dims);
        let id = x
            .weak_stable_perturb(&[vec![0.0]], (&[vec![1.0]], &[vec![1.0]]))
            .unwrap();
        assert_eq!(id.basis_row_major(), x.basis_row_major());
        let y = x
            .weak_stable_perturb(&[vec![0.5]], (&[vec![2.0]], &[vec![0.5]]))
            .unwrap();
        assert!((y.det().abs() - 1.0).abs() < 1e-9);
        // det(A)*det(B) far from +-1 is rejected.
        assert!(x
            .weak_stable_perturb(&[vec![0.0]], (&[vec![2.0]], &[vec![1.0]]))
            .is_err());
    }

    #[test]
    fn random_unimodular_has_unit_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let x = random_unimodular(Dims::new(2, 2).unwrap(), 6, 3, &mut rng);
            assert!((x.det() - 1.0).abs() < 1e-9);
        }
    }
}
