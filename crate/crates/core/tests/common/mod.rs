//! Independent reference computations for the integration tests. Nothing
//! here calls the library's solvers or spectral routines.

#![allow(dead_code)]

use loopsteer::model::Mat6;
use nalgebra::{Matrix6, SymmetricEigen};

/// Solves `M V + V Mᵀ = -D` as a 36-unknown linear system assembled entry by
/// entry and reduced by Gaussian elimination with partial pivoting.
pub fn lyapunov_oracle(m: &Mat6, d: &Mat6) -> Mat6 {
    const N: usize = 6;
    const K: usize = N * N;
    let idx = |i: usize, j: usize| i * N + j;
    let mut a = vec![[0.0f64; K + 1]; K];
    for i in 0..N {
        for j in 0..N {
            let row = idx(i, j);
            // (M V)_ij = Σ_k M_ik V_kj ; (V Mᵀ)_ij = Σ_k V_ik M_jk
            for k in 0..N {
                a[row][idx(k, j)] += m[(i, k)];
                a[row][idx(i, k)] += m[(j, k)];
            }
            a[row][K] = -d[(i, j)];
        }
    }
    for col in 0..K {
        let pivot = (col..K)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        let p = a[col][col];
        assert!(p.abs() > 1e-300, "singular Lyapunov system");
        for r in col + 1..K {
            let f = a[r][col] / p;
            if f != 0.0 {
                let (top, bottom) = a.split_at_mut(r);
                for (x, &y) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                    *x -= f * y;
                }
            }
        }
    }
    let mut x = [0.0f64; K];
    for r in (0..K).rev() {
        let s: f64 = (r + 1..K).map(|c| a[r][c] * x[c]).sum();
        x[r] = (a[r][K] - s) / a[r][r];
    }
    Matrix6::from_fn(|i, j| x[idx(i, j)])
}

fn omega() -> Mat6 {
    let mut w = Mat6::zeros();
    for k in 0..3 {
        w[(2 * k, 2 * k + 1)] = 1.0;
        w[(2 * k + 1, 2 * k)] = -1.0;
    }
    w
}

/// Symplectic eigenvalues of a positive definite `V`, via the symmetric
/// matrix `V^{1/2} Ωᵀ V Ω V^{1/2}` whose eigenvalues are their squares.
/// Each value appears twice; sorted ascending.
pub fn symplectic_oracle(v: &Mat6) -> [f64; 6] {
    let eig = SymmetricEigen::new(*v);
    assert!(
        eig.eigenvalues.min() > 0.0,
        "covariance matrix is not positive definite"
    );
    let sqrt_v = eig.eigenvectors
        * Mat6::from_diagonal(&eig.eigenvalues.map(f64::sqrt))
        * eig.eigenvectors.transpose();
    let w = omega();
    let s = sqrt_v * w.transpose() * v * w * sqrt_v;
    let s = (s + s.transpose()) * 0.5;
    let mut nu: Vec<f64> = SymmetricEigen::new(s)
        .eigenvalues
        .iter()
        .map(|x| x.max(0.0).sqrt())
        .collect();
    nu.sort_by(f64::total_cmp);
    nu.try_into().unwrap()
}

/// `|x - reference| / |reference|`, with `0/0 = 0`.
pub fn rel_err(x: f64, reference: f64) -> f64 {
    if x == reference {
        0.0
    } else {
        (x - reference).abs() / reference.abs()
    }
}
