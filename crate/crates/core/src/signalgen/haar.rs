//! Orthonormal Haar (dB1) transform.
//!
//! Coefficient layout after [`forward`]: `[a, d_coarsest, d_next.., d_finest]`
//! where `a` is the single scaling coefficient and each detail band doubles in
//! length. The synthesis matrix `Psi` (columns = basis vectors) satisfies
//! `x = Psi w` with `w = forward(x) = Psi^T x`.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;

use crate::error::{invalid, Result};

pub fn check_len(n: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return Err(invalid(format!(
            "haar transform needs a power-of-two length, got {n}"
        )));
    }
    Ok(())
}

/// Analysis transform `Psi^T x`.
pub fn forward(x: &[f64]) -> Result<Vec<f64>> {
    check_len(x.len())?;
    let mut out = x.to_vec();
    let mut tmp = vec![0.0; x.len()];
    let mut len = x.len();
    while len > 1 {
        let half = len / 2;
        for i in 0..half {
            let (a, b) = (out[2 * i], out[2 * i + 1]);
            tmp[i] = (a + b) * FRAC_1_SQRT_2;
            tmp[half + i] = (a - b) * FRAC_1_SQRT_2;
        }
        out[..len].copy_from_slice(&tmp[..len]);
        len = half;
    }
    Ok(out)
}

/// Synthesis transform `Psi w`.
pub fn inverse(w: &[f64]) -> Result<Vec<f64>> {
    check_len(w.len())?;
    let n = w.len();
    let mut out = w.to_vec();
    let mut tmp = vec![0.0; n];
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        for i in 0..half {
            let (a, d) = (out[i], out[half + i]);
            tmp[2 * i] = (a + d) * FRAC_1_SQRT_2;
            tmp[2 * i + 1] = (a - d) * FRAC_1_SQRT_2;
        }
        out[..len].copy_from_slice(&tmp[..len]);
        len *= 2;
    }
    Ok(out)
}

/// Dense `Psi`, column `j` = `inverse(e_j)`. Only meant for verification.
pub fn dense_matrix(n: usize) -> Result<DMatrix<f64>> {
    check_len(n)?;
    let mut psi = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = inverse(&e)?;
        psi.set_column(j, &nalgebra::DVector::from_vec(col));
        e[j] = 0.0;
    }
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_transform() {
        let w = forward(&[3.0, 1.0]).unwrap();
        assert!((w[0] - 4.0 * FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((w[1] - 2.0 * FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(forward(&[1.0, 2.0, 3.0]).is_err());
        assert!(inverse(&[]).is_err());
    }

    #[test]
    fn length_one_is_identity() {
        assert_eq!(forward(&[2.5]).unwrap(), vec![2.5]);
        assert_eq!(inverse(&[2.5]).unwrap(), vec![2.5]);
    }

    #[test]
    fn dense_matrix_is_orthonormal_at_eight() {
        let psi = dense_matrix(8).unwrap();
        let gram = psi.transpose() * &psi;
        let err = (gram - DMatrix::identity(8, 8)).abs().max();
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn forward_is_transpose_of_inverse() {
        let psi = dense_matrix(16).unwrap();
        let x: Vec<f64> = (0..16).map(|i| ((i * 7 % 5) as f64) - 1.5).collect();
        let w = forward(&x).unwrap();
        let wt = psi.transpose() * nalgebra::DVector::from_vec(x);
        for i in 0..16 {
            assert!((w[i] - wt[i]).abs() < 1e-12);
        }
    }
}
