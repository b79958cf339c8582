//! Dense eigensolvers sized for this crate's problems.
//!
//! Single-molecule Hamiltonians are complex Hermitian with dimension ≤ 32;
//! a cyclic Jacobi scheme gives machine-precision eigenpairs there with no
//! external solver. The coupled-cluster Hamiltonian is real symmetric with
//! dimension in the low thousands and only needs eigenvalues, which is the
//! job of the Householder + implicit-QL path.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Result, SpinError};

pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;

/// Largest |H_ij − conj(H_ji)| relative to the largest |H_ij|.
pub fn hermiticity_defect(h: &CMatrix) -> f64 {
    let n = h.nrows();
    let mut max_abs = 0.0f64;
    let mut max_defect = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            max_abs = max_abs.max(h[(i, j)].norm());
            if j >= i {
                max_defect = max_defect.max((h[(i, j)] - h[(j, i)].conj()).norm());
            }
        }
    }
    if max_abs == 0.0 {
        0.0
    } else {
        max_defect / max_abs
    }
}

/// Checks H = H† within `rel_tol` (relative to the largest element).
pub fn is_hermitian(h: &CMatrix, rel_tol: f64) -> bool {
    h.is_square() && hermiticity_defect(h) <= rel_tol
}

/// Eigendecomposition of a complex Hermitian matrix by cyclic Jacobi
/// rotations. Returns eigenvalues sorted ascending and the matching
/// eigenvectors as columns of a unitary matrix.
pub fn hermitian_eigen(h: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if !h.is_square() {
        return Err(SpinError::ContractViolation(format!(
            "eigensolver needs a square matrix, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    let defect = hermiticity_defect(h);
    if defect > 1e-10 {
        return Err(SpinError::ContractViolation(format!(
            "matrix is not Hermitian: relative defect {defect:.3e}"
        )));
    }

    let n = h.nrows();
    let mut a = h.clone();
    // Symmetrize exactly so rotations preserve Hermiticity bit-for-bit.
    for i in 0..n {
        a[(i, i)] = Complex64::new(a[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let m = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = m;
            a[(j, i)] = m.conj();
        }
    }
    let mut v = CMatrix::identity(n, n);
    if n == 1 {
        return Ok((vec![a[(0, 0)].re], v));
    }

    let scale: f64 = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| a[(i, j)].norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);

    for _sweep in 0..64 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let beta = a[(p, q)];
                let abs_b = beta.norm();
                if abs_b <= 1e-300 {
                    continue;
                }
                let phase = beta / abs_b;
                let alpha = a[(p, p)].re;
                let gamma = a[(q, q)].re;
                // Zero a_pq: t² − 2θt − 1 = 0 with θ = (γ−α)/2|β|, smaller root.
                let theta = (gamma - alpha) / (2.0 * abs_b);
                let t = if theta >= 0.0 {
                    -1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let s_phase = phase * s; // s·e^{iφ}

                // Rows/columns p and q of the similarity transform.
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c + akq * s_phase.conj();
                    a[(k, q)] = -akp * s_phase + akq * c;
                    a[(p, k)] = a[(k, p)].conj();
                    a[(q, k)] = a[(k, q)].conj();
                }
                let new_pp = c * c * alpha + 2.0 * c * s * abs_b + s * s * gamma;
                let new_qq = s * s * alpha - 2.0 * c * s * abs_b + c * c * gamma;
                a[(p, p)] = Complex64::new(new_pp, 0.0);
                a[(q, q)] = Complex64::new(new_qq, 0.0);
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c + vkq * s_phase.conj();
                    v[(k, q)] = -vkp * s_phase + vkq * c;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &v.column(src));
    }
    Ok((eigenvalues, vectors))
}

/// Eigenvalues (ascending) of a real symmetric matrix via Householder
/// tridiagonalization and implicit-shift QL. Works on full square storage
/// so the hot loops stay contiguous; the input is consumed.
pub fn symmetric_eigenvalues(mut a: RMatrix) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(SpinError::ContractViolation("symmetric eigensolver needs a square matrix".into()));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    {
        let mut max_defect = 0.0f64;
        let mut max_abs = 0.0f64;
        for i in 0..n {
            for j in i..n {
                max_abs = max_abs.max(a[(i, j)].abs());
                max_defect = max_defect.max((a[(i, j)] - a[(j, i)]).abs());
            }
        }
        if max_abs > 0.0 && max_defect > 1e-10 * max_abs {
            return Err(SpinError::ContractViolation(format!(
                "matrix is not symmetric: relative defect {:.3e}",
                max_defect / max_abs
            )));
        }
    }

    let (mut d, mut e) = householder_tridiagonalize(&mut a);
    tql_implicit(&mut d, &mut e)?;
    d.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(d)
}

/// Reduces the symmetric matrix to tridiagonal form, returning the diagonal
/// and sub-diagonal (e[0] unused). Rank-2 updates run on full rows.
fn householder_tridiagonalize(a: &mut RMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = a.nrows();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut p = vec![0.0; n];

    for i in (1..n).rev() {
        let m = i; // active leading block is 0..m, row i holds the pivot column
        let l = m - 1;
        let mut scale = 0.0;
        for k in 0..m {
            scale += a[(i, k)].abs();
        }
        if scale == 0.0 || m == 1 {
            e[i] = a[(i, l)];
            d[i] = a[(i, i)];
            continue;
        }
        let mut h = 0.0;
        for k in 0..m {
            u[k] = a[(i, k)] / scale;
            h += u[k] * u[k];
        }
        let f = u[l];
        let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
        e[i] = scale * g;
        h -= f * g;
        u[l] = f - g;

        // p = A·u / h over the leading block, rows are contiguous.
        for j in 0..m {
            let row = a.row(j);
            let mut s = 0.0;
            for k in 0..m {
                s += row[k] * u[k];
            }
            p[j] = s / h;
        }
        let k_factor = {
            let mut s = 0.0;
            for j in 0..m {
                s += u[j] * p[j];
            }
            s / (2.0 * h)
        };
        for j in 0..m {
            p[j] -= k_factor * u[j];
        }
        // A ← A − u qᵀ − q uᵀ restricted to the block.
        for j in 0..m {
            let uj = u[j];
            let pj = p[j];
            for k in 0..m {
                a[(j, k)] -= uj * p[k] + pj * u[k];
            }
        }
        d[i] = a[(i, i)];
    }
    d[0] = a[(0, 0)];
    e[0] = 0.0;
    (d, e)
}

/// Implicit-shift QL on a symmetric tridiagonal matrix; eigenvalues land in `d`.
fn tql_implicit(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(SpinError::ContractViolation(
                    "tridiagonal QL failed to converge in 50 iterations".into(),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0, 1.0);
            let mut pp = 0.0;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= pp;
                    e[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - pp;
                r = (d[i] - g) * s + 2.0 * c * b;
                pp = s * r;
                d[i + 1] = g + pp;
                g = c * r - b;
                if i == l {
                    d[l] -= pp;
                    e[l] = g;
                    e[m] = 0.0;
                }
            }
        }
    }
    Ok(())
}
