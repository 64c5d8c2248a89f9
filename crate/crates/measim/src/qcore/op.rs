//! Square complex matrix with the spectral routines the rest of the toolkit
//! relies on.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub type C64 = num_complex::Complex<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    mat: DMatrix<C64>,
}

impl Operator {
    pub fn from_matrix(mat: DMatrix<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(Error::InvalidOperator(format!(
                "{}x{} is not square",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let op = Self { mat };
        op.check_finite()?;
        Ok(op)
    }

    /// Row-major entries as `[re, im]` pairs.
    pub fn from_rows(rows: &[Vec<[f64; 2]>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidOperator("ragged rows".into()));
        }
        let mat = DMatrix::from_fn(d, d, |i, j| C64::new(rows[i][j][0], rows[i][j][1]));
        Self::from_matrix(mat)
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            mat: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: DMatrix::identity(dim, dim),
        }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self {
            mat: DMatrix::from_fn(dim, dim, f),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        Self::from_fn(d, |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// Projector `|v><v|` onto an (unnormalized is rejected) vector.
    pub fn projector(v: &[C64]) -> Self {
        let d = v.len();
        Self::from_fn(d, |i, j| v[i] * v[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.mat[(i, j)] = v;
    }

    pub fn check_finite(&self) -> Result<()> {
        for v in self.mat.iter() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::InvalidOperator("non-finite entry".into()));
            }
        }
        Ok(())
    }

    pub fn trace(&self) -> C64 {
        self.mat.diagonal().sum()
    }

    pub fn dagger(&self) -> Operator {
        Operator {
            mat: self.mat.adjoint(),
        }
    }

    /// Entrywise transpose in the computational basis.
    pub fn transpose(&self) -> Operator {
        Operator {
            mat: self.mat.transpose(),
        }
    }

    pub fn add(&self, other: &Operator) -> Operator {
        Operator {
            mat: &self.mat + &other.mat,
        }
    }

    pub fn sub(&self, other: &Operator) -> Operator {
        Operator {
            mat: &self.mat - &other.mat,
        }
    }

    pub fn mul(&self, other: &Operator) -> Operator {
        Operator {
            mat: &self.mat * &other.mat,
        }
    }

    pub fn scale(&self, s: f64) -> Operator {
        Operator {
            mat: &self.mat * C64::new(s, 0.0),
        }
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let x = nalgebra::DVector::from_column_slice(v);
        (&self.mat * x).iter().copied().collect()
    }

    /// `<u| A |v>`.
    pub fn sandwich(&self, u: &[C64], v: &[C64]) -> C64 {
        let av = self.apply(v);
        u.iter().zip(av.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn tensor(&self, other: &Operator) -> Operator {
        Operator {
            mat: self.mat.kronecker(&other.mat),
        }
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.mat.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let d = self.dim();
        for i in 0..d {
            for j in i..d {
                let diff = self.mat[(i, j)] - self.mat[(j, i)].conj();
                if diff.norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn hermitized(&self) -> Operator {
        Operator {
            mat: (&self.mat + self.mat.adjoint()) * C64::new(0.5, 0.0),
        }
    }

    /// Eigendecomposition of a Hermitian operator. Eigenvalues are sorted
    /// descending; each eigenvector's first significant component is rotated
    /// to be real and positive so results are reproducible. Falls back to a
    /// cyclic Jacobi sweep when the QR path emits non-finite values.
    pub fn hermitian_eigs(&self) -> Result<Spectrum> {
        self.check_finite()?;
        let herm = self.hermitized();
        let eig = herm.mat.clone().symmetric_eigen();
        let finite = eig.eigenvalues.iter().all(|v| v.is_finite())
            && eig
                .eigenvectors
                .iter()
                .all(|c| c.re.is_finite() && c.im.is_finite());
        let (raw_values, raw_vectors) = if finite {
            (
                eig.eigenvalues.iter().copied().collect::<Vec<f64>>(),
                eig.eigenvectors,
            )
        } else {
            jacobi_hermitian(&herm.mat)
        };
        let d = self.dim();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| {
            raw_values[b]
                .partial_cmp(&raw_values[a])
                .expect("jacobi fallback yields finite eigenvalues")
        });
        let mut values = Vec::with_capacity(d);
        let mut basis = DMatrix::zeros(d, d);
        for (col, &k) in order.iter().enumerate() {
            values.push(raw_values[k]);
            let v = raw_vectors.column(k);
            let max_mod = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
            let phase = v
                .iter()
                .find(|c| c.norm() > 1e-12 * max_mod.max(1e-300))
                .map(|c| c / c.norm())
                .unwrap_or_else(|| C64::new(1.0, 0.0));
            let rot = phase.conj();
            for i in 0..d {
                basis[(i, col)] = v[i] * rot;
            }
        }
        Ok(Spectrum { values, basis })
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> Result<f64> {
        let gram = self.dagger().mul(self);
        let spec = gram.hermitian_eigs()?;
        Ok(spec.values.first().copied().unwrap_or(0.0).max(0.0).sqrt())
    }

    /// Unitary factor `U` of the left polar decomposition `A = U sqrt(A^dag A)`.
    /// Built from the eigendecompositions of `A^dag A` and `A A^dag`: columns
    /// `A v_i / s_i` over the support, null directions paired between the two
    /// Gram kernels.
    pub fn polar_unitary(&self) -> Result<Operator> {
        self.check_finite()?;
        let d = self.dim();
        let right = self.dagger().mul(self).hermitian_eigs()?;
        let left = self.mul(&self.dagger()).hermitian_eigs()?;
        let top = right.values.first().copied().unwrap_or(0.0).max(0.0);
        let cutoff = (top * 1e-24).max(1e-280);
        let mut u = DMatrix::<C64>::zeros(d, d);
        for k in 0..d {
            if right.values[k] > cutoff {
                let s = right.values[k].sqrt();
                let v = right.eigenvector(k);
                let image = self.apply(&v);
                for i in 0..d {
                    u[(i, k)] = image[i] / s;
                }
            } else {
                // both Gram spectra are sorted descending, so index k walks
                // the two kernels in step
                for i in 0..d {
                    u[(i, k)] = left.basis[(i, k)];
                }
            }
        }
        // U = sum_k u_k v_k^dag
        let mut v_mat = DMatrix::<C64>::zeros(d, d);
        for k in 0..d {
            for i in 0..d {
                v_mat[(i, k)] = right.basis[(i, k)];
            }
        }
        Ok(Operator {
            mat: u * v_mat.adjoint(),
        })
    }
}

/// Cyclic Jacobi eigensolver for complex Hermitian matrices; slower than the
/// QR path but free of its convergence corner cases.
fn jacobi_hermitian(mat: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let d = mat.nrows();
    let mut b = mat.clone();
    let mut v = DMatrix::<C64>::identity(d, d);
    let scale = mat
        .iter()
        .map(|c| c.norm())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..d {
            for q in (p + 1)..d {
                off = off.max(b[(p, q)].norm());
            }
        }
        if off <= 1e-14 * scale {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let bpq = b[(p, q)];
                if bpq.norm() <= 1e-300 {
                    continue;
                }
                // phase away the off-diagonal entry, then rotate
                let phase = bpq / bpq.norm();
                let app = b[(p, p)].re;
                let aqq = b[(q, q)].re;
                let tau = (aqq - app) / (2.0 * bpq.norm());
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let cos = 1.0 / (1.0 + t * t).sqrt();
                let sin = t * cos;
                // column operations on (p, q); the conjugate phase makes the
                // rotated off-diagonal entry real before the real rotation
                let jpp = C64::new(cos, 0.0);
                let jpq = C64::new(sin, 0.0);
                let jqp = -phase.conj() * sin;
                let jqq = phase.conj() * cos;
                for i in 0..d {
                    let bip = b[(i, p)];
                    let biq = b[(i, q)];
                    b[(i, p)] = bip * jpp + biq * jqp;
                    b[(i, q)] = bip * jpq + biq * jqq;
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * jpp + viq * jqp;
                    v[(i, q)] = vip * jpq + viq * jqq;
                }
                for i in 0..d {
                    let bpi = b[(p, i)];
                    let bqi = b[(q, i)];
                    b[(p, i)] = jpp.conj() * bpi + jqp.conj() * bqi;
                    b[(q, i)] = jpq.conj() * bpi + jqq.conj() * bqi;
                }
            }
        }
    }
    let values: Vec<f64> = (0..d).map(|i| b[(i, i)].re).collect();
    (values, v)
}

#[cfg(test)]
mod jacobi_tests {
    use super::*;

    #[test]
    fn jacobi_matches_reconstruction() {
        use rand::{RngCore, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(5);
        for _ in 0..20 {
            let d = 2 + (rng.next_u32() as usize) % 6;
            let g = Operator::from_fn(d, |_, _| {
                C64::new(
                    (rng.next_u32() as f64 / u32::MAX as f64) - 0.5,
                    (rng.next_u32() as f64 / u32::MAX as f64) - 0.5,
                )
            });
            let herm = g.hermitized();
            let (values, vectors) = jacobi_hermitian(herm.matrix());
            // V diag V^dag reconstructs the input
            let diag = DMatrix::from_fn(d, d, |i, j| {
                if i == j {
                    C64::new(values[i], 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            let recon = &vectors * diag * vectors.adjoint();
            let err: f64 = (&recon - herm.matrix())
                .iter()
                .map(|c| c.norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-10, "reconstruction error {err}");
            let eye = vectors.adjoint() * &vectors;
            let unit_err: f64 = (&eye - DMatrix::<C64>::identity(d, d))
                .iter()
                .map(|c| c.norm())
                .fold(0.0, f64::max);
            assert!(unit_err < 1e-10, "orthonormality error {unit_err}");
        }
    }
}

/// Result of a Hermitian eigendecomposition: `values[k]` belongs to the
/// eigenvector stored in column `k` of `basis`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub basis: DMatrix<C64>,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V diag(new_values) V^dag`.
    pub fn recompose(&self, new_values: &[f64]) -> Operator {
        let d = self.dim();
        let diag = DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                C64::new(new_values[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Operator {
            mat: &self.basis * diag * self.basis.adjoint(),
        }
    }

    /// Projector onto the eigenvectors selected by `keep`.
    pub fn projector_onto(&self, keep: impl Fn(usize, f64) -> bool) -> Operator {
        let vals: Vec<f64> = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| if keep(i, v) { 1.0 } else { 0.0 })
            .collect();
        self.recompose(&vals)
    }

    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        self.basis.column(k).iter().copied().collect()
    }
}
