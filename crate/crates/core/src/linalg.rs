//! Small dense complex linear-algebra helpers.
//!
//! Everything here operates on matrices of dimension ≤ 64 (N ≤ 6 emitters),
//! so simple dense algorithms are used throughout.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

pub type CMatrix = Array2<C64>;
pub type CVector = Array1<C64>;

/// Conjugate transpose.
pub fn dagger(m: &CMatrix) -> CMatrix {
    m.t().mapv(|z| z.conj())
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diag().sum()
}

/// Eigenvalues of a Hermitian matrix by the cyclic Jacobi method.
///
/// Returns the eigenvalues sorted in descending order. The input is assumed
/// Hermitian; only its Hermitian part influences the result.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "matrix must be square");
    // Work on the explicit Hermitian part to tolerate rounding in the input.
    let mut a: CMatrix = (m + &dagger(m)).mapv(|z| z * 0.5);

    let off_norm = |a: &CMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[[i, j]].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let scale: f64 = a.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    for _sweep in 0..100 {
        if off_norm(&a) <= 1e-15 * scale * n as f64 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                if apq.norm() <= 1e-18 * scale {
                    continue;
                }
                // Unitary 2×2 rotation eliminating a[p,q]: first strip the
                // phase of a[p,q], then a real Jacobi rotation.
                let phase = apq / apq.norm();
                let app = a[[p, p]].re;
                let aqq = a[[q, q]].re;
                let theta = 0.5 * (2.0 * apq.norm()).atan2(aqq - app);
                let (s, c) = theta.sin_cos();
                // Columns: v_p' = c·v_p − s·phase*·v_q ; v_q' = s·phase·v_p + c·v_q
                for i in 0..n {
                    let aip = a[[i, p]];
                    let aiq = a[[i, q]];
                    a[[i, p]] = aip * c - aiq * phase.conj() * s;
                    a[[i, q]] = aip * phase * s + aiq * c;
                }
                for j in 0..n {
                    let apj = a[[p, j]];
                    let aqj = a[[q, j]];
                    a[[p, j]] = apj * c - aqj * phase * s;
                    a[[q, j]] = apj * phase.conj() * s + aqj * c;
                }
            }
        }
    }

    let mut eigs: Vec<f64> = (0..n).map(|i| a[[i, i]].re).collect();
    eigs.sort_by(|x, y| y.partial_cmp(x).unwrap());
    eigs
}

/// exp(B) for a 2×2 complex matrix, by the closed form
/// exp(B) = e^μ (cosh(q) I + sinh(q)/q (B − μI)), μ = tr B / 2.
pub fn exp_2x2(b: [[C64; 2]; 2]) -> [[C64; 2]; 2] {
    let mu = (b[0][0] + b[1][1]) * 0.5;
    let d = (b[0][0] - b[1][1]) * 0.5;
    let q = (d * d + b[0][1] * b[1][0]).sqrt();
    let emu = mu.exp();
    let (cosh_q, sinhc_q) = if q.norm() < 1e-8 {
        // cosh q ≈ 1 + q²/2, sinh(q)/q ≈ 1 + q²/6
        let q2 = q * q;
        (C64::new(1.0, 0.0) + q2 * 0.5, C64::new(1.0, 0.0) + q2 / 6.0)
    } else {
        ((q.exp() + (-q).exp()) * 0.5, (q.exp() - (-q).exp()) * 0.5 / q)
    };
    let m00 = b[0][0] - mu;
    let m11 = b[1][1] - mu;
    [
        [emu * (cosh_q + sinhc_q * m00), emu * sinhc_q * b[0][1]],
        [emu * sinhc_q * b[1][0], emu * (cosh_q + sinhc_q * m11)],
    ]
}
