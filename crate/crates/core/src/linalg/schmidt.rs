//! Schmidt decomposition and reduced states of bipartite vectors.

use super::{hermitian_eigen, Complex64, ComplexMatrix, StateVector, ZERO};
use crate::error::{Error, Result};

/// Which factor of a bipartite state to keep when tracing out the other.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

/// Result of a Schmidt decomposition `|v⟩ = Σ_k λ_k |left_k⟩ ⊗ |right_k⟩`.
///
/// Coefficients are sorted descending (ties broken by the diagonalization
/// output order); both vector families are orthonormal, padded with
/// deterministic completions where coefficients vanish, so the lists always
/// hold `min(dim_a, dim_b)` pairs.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    pub coefficients: Vec<f64>,
    pub left: Vec<StateVector>,
    pub right: Vec<StateVector>,
}

impl SchmidtDecomposition {
    /// Number of coefficients above `threshold`.
    pub fn rank_with_threshold(&self, threshold: f64) -> usize {
        self.coefficients.iter().filter(|&&l| l > threshold).count()
    }

    /// Schmidt rank at the default `1e-12` cutoff.
    pub fn rank(&self) -> usize {
        self.rank_with_threshold(1e-12)
    }

    /// Rebuild the state vector `Σ_k λ_k |left_k⟩ ⊗ |right_k⟩`.
    pub fn reconstruct(&self) -> StateVector {
        let da = self.left.first().map_or(0, StateVector::dim);
        let db = self.right.first().map_or(0, StateVector::dim);
        let mut amps = vec![ZERO; da * db];
        for ((&l, lv), rv) in self.coefficients.iter().zip(&self.left).zip(&self.right) {
            if l == 0.0 {
                continue;
            }
            for (i, a) in lv.amplitudes.iter().enumerate() {
                for (j, b) in rv.amplitudes.iter().enumerate() {
                    amps[i * db + j] += Complex64::new(l, 0.0) * a * b;
                }
            }
        }
        StateVector { amplitudes: amps }
    }
}

/// Schmidt decomposition of a unit-norm bipartite vector with factor
/// dimensions `dim_a x dim_b` (composite index `i = a*dim_b + b`).
///
/// Implemented through the Hermitian eigendecomposition of the Gram matrix
/// on the smaller factor.
pub fn schmidt_split(v: &StateVector, dim_a: usize, dim_b: usize) -> Result<SchmidtDecomposition> {
    if dim_a == 0 || dim_b == 0 {
        return Err(Error::InvalidDimension("factor dimensions must be >= 1".into()));
    }
    if v.dim() != dim_a * dim_b {
        return Err(Error::InvalidShape(format!(
            "vector of dim {} cannot split as {}x{}",
            v.dim(),
            dim_a,
            dim_b
        )));
    }
    if (v.norm() - 1.0).abs() > 1e-6 {
        return Err(Error::ContractViolation("schmidt_split expects a unit-norm vector".into()));
    }

    let psi = |a: usize, b: usize| v.amplitudes[a * dim_b + b];

    let (values, vectors, on_first) = if dim_a <= dim_b {
        let mut gram = ComplexMatrix::zeros(dim_a, dim_a);
        for i in 0..dim_a {
            for j in 0..dim_a {
                let mut acc = ZERO;
                for t in 0..dim_b {
                    acc += psi(i, t) * psi(j, t).conj();
                }
                gram.set(i, j, acc);
            }
        }
        let (vals, vecs) = hermitian_eigen(&gram)?;
        (vals, vecs, true)
    } else {
        let mut gram = ComplexMatrix::zeros(dim_b, dim_b);
        for t in 0..dim_b {
            for s in 0..dim_b {
                let mut acc = ZERO;
                for i in 0..dim_a {
                    acc += psi(i, t).conj() * psi(i, s);
                }
                gram.set(t, s, acc);
            }
        }
        let (vals, vecs) = hermitian_eigen(&gram)?;
        (vals, vecs, false)
    };

    let m = values.len();
    // descending coefficients, stable on the eigen output index
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&x, &y| values[y].total_cmp(&values[x]).then(x.cmp(&y)));

    let mut coefficients = Vec::with_capacity(m);
    let mut primary = Vec::with_capacity(m);
    let mut partner = Vec::with_capacity(m);

    for &k in &order {
        // Gram eigenvalues below the machine noise floor are artifacts of
        // the diagonalization; the square root would inflate them into
        // O(1e-8) fictional coefficients with non-normalized partners.
        let ev = if values[k] > 1e-15 { values[k] } else { 0.0 };
        let lambda = ev.sqrt();
        coefficients.push(lambda);
        let pv = StateVector {
            amplitudes: (0..m).map(|r| vectors.get(r, k)).collect(),
        };
        if lambda > 1e-13 {
            let inv = Complex64::new(1.0 / lambda, 0.0);
            let other = if on_first {
                // right_k[t] = (1/λ) Σ_i conj(u_k[i]) ψ(i,t)
                StateVector {
                    amplitudes: (0..dim_b)
                        .map(|t| {
                            (0..dim_a)
                                .map(|i| pv.amplitudes[i].conj() * psi(i, t))
                                .sum::<Complex64>()
                                * inv
                        })
                        .collect(),
                }
            } else {
                // left_k[i] = (1/λ) Σ_t ψ(i,t) conj(r_k[t]); the Gram
                // eigenvector is conj(r_k), so no extra conjugation here.
                StateVector {
                    amplitudes: (0..dim_a)
                        .map(|i| {
                            (0..dim_b)
                                .map(|t| psi(i, t) * pv.amplitudes[t])
                                .sum::<Complex64>()
                                * inv
                        })
                        .collect(),
                }
            };
            partner.push(Some(other));
        } else {
            partner.push(None);
        }
        primary.push(pv);
    }

    // complete the partner family where coefficients vanished
    let found: Vec<StateVector> = partner.iter().flatten().cloned().collect();
    let partner_dim = if on_first { dim_b } else { dim_a };
    let completed = complete_orthonormal_basis(&found, partner_dim)?;
    let mut fill = completed.into_iter().skip(found.len());
    let partner: Vec<StateVector> =
        partner.into_iter().map(|p| p.unwrap_or_else(|| fill.next().unwrap())).collect();

    let (left, right) = if on_first {
        (primary, partner)
    } else {
        // primary vectors live on the second factor as conj(right)
        let right: Vec<StateVector> = primary
            .iter()
            .map(|p| StateVector {
                amplitudes: p.amplitudes.iter().map(|z| z.conj()).collect(),
            })
            .collect();
        (partner, right)
    };

    Ok(SchmidtDecomposition { coefficients, left, right })
}

/// Reduced density matrix of a bipartite vector, keeping one factor.
pub fn partial_trace(
    v: &StateVector,
    dim_a: usize,
    dim_b: usize,
    keep: Subsystem,
) -> Result<ComplexMatrix> {
    if dim_a == 0 || dim_b == 0 {
        return Err(Error::InvalidDimension("factor dimensions must be >= 1".into()));
    }
    if v.dim() != dim_a * dim_b {
        return Err(Error::InvalidShape(format!(
            "vector of dim {} cannot split as {}x{}",
            v.dim(),
            dim_a,
            dim_b
        )));
    }
    let psi = |a: usize, b: usize| v.amplitudes[a * dim_b + b];
    let rho = match keep {
        Subsystem::First => {
            let mut rho = ComplexMatrix::zeros(dim_a, dim_a);
            for i in 0..dim_a {
                for j in 0..dim_a {
                    let mut acc = ZERO;
                    for t in 0..dim_b {
                        acc += psi(i, t) * psi(j, t).conj();
                    }
                    rho.set(i, j, acc);
                }
            }
            rho
        }
        Subsystem::Second => {
            let mut rho = ComplexMatrix::zeros(dim_b, dim_b);
            for t in 0..dim_b {
                for s in 0..dim_b {
                    let mut acc = ZERO;
                    for i in 0..dim_a {
                        acc += psi(i, t) * psi(i, s).conj();
                    }
                    rho.set(t, s, acc);
                }
            }
            rho
        }
    };
    Ok(rho)
}

/// Extend a set of orthonormal vectors to a full orthonormal basis with
/// Gram-Schmidt sweeps seeded by the canonical basis columns; deterministic.
pub fn complete_orthonormal_basis(
    existing: &[StateVector],
    dim: usize,
) -> Result<Vec<StateVector>> {
    if existing.len() > dim {
        return Err(Error::InvalidShape("more vectors than the space dimension".into()));
    }
    let mut basis: Vec<StateVector> = existing.to_vec();
    for seed_index in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut candidate = StateVector::basis(dim, seed_index);
        // two orthogonalization passes for numerical safety
        for _ in 0..2 {
            for b in &basis {
                let ov = b.inner(&candidate);
                candidate = candidate.sub(&b.scale(ov));
            }
        }
        let n = candidate.norm();
        if n > 1e-6 {
            candidate = candidate.scale(Complex64::new(1.0 / n, 0.0));
            basis.push(candidate);
        }
    }
    if basis.len() != dim {
        return Err(Error::ContractViolation("failed to complete orthonormal basis".into()));
    }
    Ok(basis)
}
