//! Steady-state covariance matrix from the Lyapunov equation
//! `M V + V Mᵀ = -D`, and the physicality check on the result.

use nalgebra::DMatrix;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{quasi_triangular_eigenvalues, real_schur, DiffusionMatrix, DriftMatrix, Mat6};

/// Drift spectra closer than this to the imaginary axis are refused.
pub const SOLVE_MARGIN: f64 = 1e-9;

pub const SYMMETRY_TOL: f64 = 1e-10;
pub const PHYSICALITY_TOL: f64 = 1e-9;
pub const PSD_TOL: f64 = 1e-10;
/// Bound on the backward error `|MV + VMᵀ + D| / (2|M||V| + |D|)`.
pub const RESIDUAL_TOL: f64 = 1e-12;

/// Steady-state covariance matrix in `(X_a, Y_a, X_b, Y_b, X_c, Y_c)` ordering,
/// vacuum variance `1/2`. Always exactly symmetric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix(Mat6);

impl CovarianceMatrix {
    /// Accepts `v` if it is symmetric to [`SYMMETRY_TOL`]; the stored matrix is
    /// the symmetrised `(v + vᵀ)/2`.
    pub fn from_matrix(v: Mat6) -> Result<Self> {
        let asym = (v - v.transpose()).amax();
        if asym > SYMMETRY_TOL {
            return Err(Error::Contract(format!(
                "covariance matrix is not symmetric (max |V - Vᵀ| = {asym:e})"
            )));
        }
        Ok(Self(symmetrize(&v)))
    }

    pub fn matrix(&self) -> &Mat6 {
        &self.0
    }

    pub fn vacuum() -> Self {
        Self(Mat6::identity() * 0.5)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum LyapunovMethod {
    /// Real Schur decomposition of `M` followed by block back-substitution.
    #[default]
    BartelsStewart,
    /// Dense solve of `(I ⊗ M + M ⊗ I) vec(V) = -vec(D)`.
    Vectorized,
}

pub fn solve_steady_state(m: &DriftMatrix, d: &DiffusionMatrix) -> Result<CovarianceMatrix> {
    solve_steady_state_with(m, d, LyapunovMethod::default())
}

pub fn solve_steady_state_with(
    m: &DriftMatrix,
    d: &DiffusionMatrix,
    method: LyapunovMethod,
) -> Result<CovarianceMatrix> {
    let max_real_part = m.max_real_part()?;
    if max_real_part >= -SOLVE_MARGIN {
        return Err(Error::Unstable { max_real_part });
    }
    let m = m.matrix();
    let rhs = -d.matrix();
    let v = match method {
        LyapunovMethod::BartelsStewart => bartels_stewart(m, &rhs)?,
        LyapunovMethod::Vectorized => vectorized(m, &rhs)?,
    };
    let v = symmetrize(&v);

    let residual = lyapunov_residual(m, &v, d.matrix());
    let scale = 2.0 * m.amax() * v.amax() + d.matrix().amax();
    if residual > RESIDUAL_TOL * scale {
        return Err(Error::numerical(
            "Lyapunov solve",
            format!("residual {residual:e} exceeds {:e}", RESIDUAL_TOL * scale),
        ));
    }

    let cm = CovarianceMatrix(v);
    let spectrum = verify_physicality(&cm)?;
    if !spectrum.physical {
        return Err(Error::Unphysical(format!(
            "steady state violates the uncertainty bound: symplectic eigenvalues {:?}, min eigenvalue {:e}",
            spectrum.values, spectrum.min_eigenvalue
        )));
    }
    Ok(cm)
}

/// `max |M V + V Mᵀ + D|`.
pub fn lyapunov_residual(m: &Mat6, v: &Mat6, d: &Mat6) -> f64 {
    (m * v + v * m.transpose() + d).amax()
}

fn symmetrize(v: &Mat6) -> Mat6 {
    (v + v.transpose()) * 0.5
}

/// Solves `A X + X Aᵀ = C` for 6×6 `A`.
fn bartels_stewart(a: &Mat6, c: &Mat6) -> Result<Mat6> {
    let (q, t) = real_schur(&DMatrix::from_column_slice(6, 6, a.as_slice())).ok_or_else(|| {
        Error::numerical(
            "Lyapunov solve",
            format!("Schur iteration did not converge for M = {a}"),
        )
    })?;
    let (q, t) = (
        Mat6::from_column_slice(q.as_slice()),
        Mat6::from_column_slice(t.as_slice()),
    );
    let f = q.transpose() * c * q;

    let blocks = diagonal_blocks(&t);
    let mut y = Mat6::zeros();
    // T Y + Y Tᵀ = F with T quasi upper triangular: block (i, j) depends only
    // on blocks (k, j), k > i and (i, l), l > j.
    for (bi, &(i0, ni)) in blocks.iter().enumerate().rev() {
        for (bj, &(j0, nj)) in blocks.iter().enumerate().rev() {
            let mut rhs = DMatrix::from_fn(ni, nj, |r, s| f[(i0 + r, j0 + s)]);
            for &(k0, nk) in &blocks[bi + 1..] {
                let tik = t.view((i0, k0), (ni, nk));
                let ykj = y.view((k0, j0), (nk, nj));
                rhs -= tik * ykj;
            }
            for &(l0, nl) in &blocks[bj + 1..] {
                let yil = y.view((i0, l0), (ni, nl));
                let tjl = t.view((j0, l0), (nj, nl));
                rhs -= yil * tjl.transpose();
            }
            let tii = t.view((i0, i0), (ni, ni)).clone_owned();
            let tjj = t.view((j0, j0), (nj, nj)).clone_owned();
            let block = small_sylvester(&tii, &tjj, &rhs)?;
            y.view_mut((i0, j0), (ni, nj)).copy_from(&block);
        }
    }
    Ok(q * y * q.transpose())
}

/// Start index and size of each 1×1 or 2×2 diagonal block of a real Schur form.
fn diagonal_blocks(t: &Mat6) -> Vec<(usize, usize)> {
    let n = t.nrows();
    let tol = f64::EPSILON * t.amax();
    let mut blocks = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)].abs() > tol {
            blocks.push((i, 2));
            i += 2;
        } else {
            blocks.push((i, 1));
            i += 1;
        }
    }
    blocks
}

/// Solves `A Y + Y Bᵀ = R` for blocks of size at most 2×2.
fn small_sylvester(a: &DMatrix<f64>, b: &DMatrix<f64>, r: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (p, q) = (a.nrows(), b.nrows());
    let k =
        DMatrix::<f64>::identity(q, q).kronecker(a) + b.kronecker(&DMatrix::<f64>::identity(p, p));
    let rhs = DMatrix::from_column_slice(p * q, 1, r.as_slice());
    let sol = k
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::numerical("Lyapunov solve", "singular diagonal Sylvester block"))?;
    Ok(DMatrix::from_column_slice(p, q, sol.as_slice()))
}

fn vectorized(a: &Mat6, c: &Mat6) -> Result<Mat6> {
    let a = DMatrix::from_column_slice(6, 6, a.as_slice());
    let eye = DMatrix::<f64>::identity(6, 6);
    let k = eye.kronecker(&a) + a.kronecker(&eye);
    let rhs = DMatrix::from_column_slice(36, 1, c.as_slice());
    let sol = k
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::numerical("Lyapunov solve", "singular Kronecker system"))?;
    Ok(Mat6::from_column_slice(sol.as_slice()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymplecticSpectrum {
    /// One value per mode, ascending.
    pub values: Vec<f64>,
    /// Smallest ordinary eigenvalue of the covariance matrix.
    pub min_eigenvalue: f64,
    /// All symplectic eigenvalues `>= 1/2 - PHYSICALITY_TOL` and the matrix is
    /// positive semidefinite to `PSD_TOL`.
    pub physical: bool,
}

impl SymplecticSpectrum {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NAN)
    }
}

pub fn verify_physicality(v: &CovarianceMatrix) -> Result<SymplecticSpectrum> {
    symplectic_spectrum(&DMatrix::from_column_slice(6, 6, v.matrix().as_slice()))
}

/// Symplectic spectrum of a `2n × 2n` covariance matrix: moduli of the
/// eigenvalues of `iΩV`, with `Ω` block-diagonal in `[[0, 1], [-1, 0]]`.
pub fn symplectic_spectrum(v: &DMatrix<f64>) -> Result<SymplecticSpectrum> {
    let n = v.nrows();
    if n != v.ncols() || !n.is_multiple_of(2) {
        return Err(Error::Contract(format!(
            "covariance matrix must be square with even dimension, got {}x{}",
            n,
            v.ncols()
        )));
    }
    let asym = (v - v.transpose()).amax();
    if asym > SYMMETRY_TOL {
        return Err(Error::Contract(format!(
            "covariance matrix is not symmetric (max |V - Vᵀ| = {asym:e})"
        )));
    }
    let omega = DMatrix::from_fn(n, n, |i, j| match (i % 2, j) {
        (0, j) if j == i + 1 => 1.0,
        (1, j) if j + 1 == i => -1.0,
        _ => 0.0,
    });
    let ov = &omega * v;
    let (_, t) = real_schur(&ov).ok_or_else(|| {
        Error::numerical(
            "symplectic spectrum",
            format!("Schur iteration did not converge for V = {v}"),
        )
    })?;
    let mut moduli: Vec<f64> = quasi_triangular_eigenvalues(&t)
        .iter()
        .map(|z| z.norm())
        .collect();
    moduli.sort_by(f64::total_cmp);
    let values: Vec<f64> = moduli.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect();

    let min_eigenvalue = v
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let physical =
        values.iter().all(|&nu| nu >= 0.5 - PHYSICALITY_TOL) && min_eigenvalue >= -PSD_TOL;
    Ok(SymplecticSpectrum {
        values,
        min_eigenvalue,
        physical,
    })
}
