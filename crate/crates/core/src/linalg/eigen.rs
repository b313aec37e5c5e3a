//! Eigendecompositions for Hermitian and unitary matrices.
//!
//! Hermitian matrices are diagonalized with cyclic complex Jacobi rotations,
//! which is ample at the dimensions this crate targets and keeps the kernel
//! dependency-free. Unitary matrices are reduced to two commuting Hermitian
//! parts and diagonalized simultaneously.

use super::{Complex64, ComplexMatrix, ZERO};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Diagonalize a Hermitian matrix.
///
/// Returns `(values, vectors)` with eigenvalues ascending and the matching
/// eigenvectors as columns of a unitary matrix, so that
/// `H = V diag(values) V†`. The input must be Hermitian within `1e-10`.
pub fn hermitian_eigen(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !h.is_square() {
        return Err(Error::InvalidShape("eigendecomposition needs a square matrix".into()));
    }
    if !h.is_hermitian(1e-10) {
        return Err(Error::ContractViolation("matrix is not Hermitian within 1e-10".into()));
    }
    let n = h.rows;
    if n == 0 {
        return Ok((vec![], ComplexMatrix::zeros(0, 0)));
    }

    // Work on the exactly Hermitian part to remove representation roundoff.
    let mut a = h.add(&h.dagger()).scale(Complex64::new(0.5, 0.0));
    let mut v = ComplexMatrix::identity(n);

    let scale = a.frobenius_norm().max(1e-300);
    let tol = 1e-15 * scale;

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a.get(p, q).norm());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut pairs: Vec<(f64, usize)> =
        (0..n).map(|i| (a.get(i, i).re, i)).collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));

    let values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (new_col, &(_, old_col)) in pairs.iter().enumerate() {
        for r in 0..n {
            vectors.set(r, new_col, v.get(r, old_col));
        }
    }
    Ok((values, vectors))
}

/// One Jacobi rotation annihilating `a[p][q]` (and `a[q][p]`), accumulating
/// the rotation into `v` from the right.
fn jacobi_rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a.get(p, q);
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a.get(p, p).re;
    let aqq = a.get(q, q).re;
    let phase = apq / mag; // e^{i arg(a_pq)}

    // tan of the rotation angle (smaller root for stability)
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // Unitary R: R[p][p]=c, R[p][q]=s*phase, R[q][p]=-s*conj(phase), R[q][q]=c.
    let rpq = Complex64::new(s, 0.0) * phase;
    let rqp = -Complex64::new(s, 0.0) * phase.conj();
    let n = a.rows;

    // columns: B = A * R
    for i in 0..n {
        let aip = a.get(i, p);
        let aiq = a.get(i, q);
        a.set(i, p, aip * c + aiq * rqp);
        a.set(i, q, aip * rpq + aiq * c);
    }
    // rows: A' = R† * B
    for j in 0..n {
        let apj = a.get(p, j);
        let aqj = a.get(q, j);
        a.set(p, j, apj * c + aqj * rqp.conj());
        a.set(q, j, apj * rpq.conj() + aqj * c);
    }
    // force the annihilated pair to exact zero and the diagonal to real
    a.set(p, q, ZERO);
    a.set(q, p, ZERO);
    let dpp = a.get(p, p);
    let dqq = a.get(q, q);
    a.set(p, p, Complex64::new(dpp.re, 0.0));
    a.set(q, q, Complex64::new(dqq.re, 0.0));

    // V = V * R
    for i in 0..v.rows {
        let vip = v.get(i, p);
        let viq = v.get(i, q);
        v.set(i, p, vip * c + viq * rqp);
        v.set(i, q, vip * rpq + viq * c);
    }
}

/// Matrix exponential `exp(-i θ H)` of a Hermitian `H` via its spectral
/// decomposition.
pub fn hermitian_expm(h: &ComplexMatrix, theta: f64) -> Result<ComplexMatrix> {
    let (values, vectors) = hermitian_eigen(h)?;
    let phases: Vec<Complex64> =
        values.iter().map(|&e| Complex64::from_polar(1.0, -theta * e)).collect();
    Ok(spectral_assemble(&phases, &vectors))
}

/// `V diag(f) V†` for a unitary `V` holding eigenvectors as columns.
pub fn spectral_assemble(f: &[Complex64], vectors: &ComplexMatrix) -> ComplexMatrix {
    let n = vectors.rows;
    let mut scaled = vectors.clone();
    for k in 0..n {
        for r in 0..n {
            let v = scaled.get(r, k);
            scaled.set(r, k, v * f[k]);
        }
    }
    scaled.mul(&vectors.dagger())
}

/// Diagonalize a unitary matrix.
///
/// Returns `(phases, vectors)` with `U = V diag(e^{-i phases}) V†` and each
/// phase in `[0, 2π)`. Works by simultaneous diagonalization of the
/// commuting Hermitian parts `C = (U + U†)/2` and `S = i(U - U†)/2`,
/// splitting eigenvalue clusters of `C` with `S`.
pub fn unitary_eigen(u: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !u.is_square() {
        return Err(Error::InvalidShape("eigendecomposition needs a square matrix".into()));
    }
    if !u.is_unitary(1e-8) {
        return Err(Error::ContractViolation("matrix is not unitary within 1e-8".into()));
    }
    let n = u.rows;
    let half = Complex64::new(0.5, 0.0);
    let c_part = u.add(&u.dagger()).scale(half);
    let s_part = u.sub(&u.dagger()).scale(Complex64::new(0.0, 0.5));

    let (cvals, mut vectors) = hermitian_eigen(&c_part)?;

    // Split degenerate cos-clusters using the sin part.
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (cvals[end] - cvals[end - 1]).abs() < 1e-8 {
            end += 1;
        }
        if end - start > 1 {
            rediagonalize_block(&s_part, &mut vectors, start, end)?;
        }
        start = end;
    }

    let mut phases = Vec::with_capacity(n);
    for k in 0..n {
        let col = column(&vectors, k);
        let cv = expectation(&c_part, &col);
        let sv = expectation(&s_part, &col);
        // eigenvalue e^{-iθ} = cosθ - i sinθ with cosθ=cv, sinθ=sv
        let mut theta = sv.atan2(cv);
        if theta < 0.0 {
            theta += 2.0 * std::f64::consts::PI;
        }
        if theta >= 2.0 * std::f64::consts::PI {
            theta = 0.0;
        }
        phases.push(theta);
    }
    Ok((phases, vectors))
}

fn column(m: &ComplexMatrix, k: usize) -> Vec<Complex64> {
    (0..m.rows).map(|r| m.get(r, k)).collect()
}

fn expectation(m: &ComplexMatrix, v: &[Complex64]) -> f64 {
    let n = m.rows;
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += v[i].conj() * m.get(i, j) * v[j];
        }
    }
    acc.re
}

/// Re-diagonalize `op` restricted to columns `[start, end)` of `vectors`.
fn rediagonalize_block(
    op: &ComplexMatrix,
    vectors: &mut ComplexMatrix,
    start: usize,
    end: usize,
) -> Result<()> {
    let n = vectors.rows;
    let m = end - start;
    // block[a][b] = ⟨v_a| op |v_b⟩
    let mut block = ComplexMatrix::zeros(m, m);
    for a in 0..m {
        for b in 0..m {
            let mut acc = ZERO;
            for i in 0..n {
                let mut row = ZERO;
                for j in 0..n {
                    row += op.get(i, j) * vectors.get(j, start + b);
                }
                acc += vectors.get(i, start + a).conj() * row;
            }
            block.set(a, b, acc);
        }
    }
    // exactly Hermitian in theory; clean up roundoff before Jacobi
    let block = block.add(&block.dagger()).scale(Complex64::new(0.5, 0.0));
    let (_, w) = hermitian_eigen(&block)?;
    // rotate the cluster columns
    let mut rotated = vec![ZERO; n * m];
    for i in 0..n {
        for b in 0..m {
            let mut acc = ZERO;
            for a in 0..m {
                acc += vectors.get(i, start + a) * w.get(a, b);
            }
            rotated[i * m + b] = acc;
        }
    }
    for i in 0..n {
        for b in 0..m {
            vectors.set(i, start + b, rotated[i * m + b]);
        }
    }
    Ok(())
}
