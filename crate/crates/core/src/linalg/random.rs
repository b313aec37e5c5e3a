//! Seeded Haar-distributed sampling.
//!
//! All sampling is driven by an explicit `u64` seed through ChaCha so that
//! results are reproducible across platforms. Parallel or batched callers
//! derive independent per-item seeds with [`sub_seed`].

use super::{Complex64, ComplexMatrix, StateVector};
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

/// Haar-random pure state: normalized vector of i.i.d. complex Gaussians.
pub fn haar_state(dim: usize, seed: u64) -> Result<StateVector> {
    if dim == 0 {
        return Err(Error::InvalidDimension("state dimension must be >= 1".into()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let amplitudes: Vec<Complex64> = (0..dim)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        })
        .collect();
    StateVector { amplitudes }.normalized()
}

/// Haar-random unitary: Gram-Schmidt orthonormalization of a complex
/// Gaussian matrix. Fixing the R diagonal real positive makes the QR
/// factorization unique, so the Q factor is exactly Haar distributed.
pub fn haar_unitary(dim: usize, seed: u64) -> Result<ComplexMatrix> {
    if dim == 0 {
        return Err(Error::InvalidDimension("unitary dimension must be >= 1".into()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut columns: Vec<StateVector> = Vec::with_capacity(dim);
    for _ in 0..dim {
        let raw: Vec<Complex64> = (0..dim)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im)
            })
            .collect();
        let mut v = StateVector { amplitudes: raw };
        // modified Gram-Schmidt, two passes
        for _ in 0..2 {
            for b in &columns {
                let ov = b.inner(&v);
                v = v.sub(&b.scale(ov));
            }
        }
        let r = v.norm();
        v = v.scale(Complex64::new(1.0 / r, 0.0));
        columns.push(v);
    }
    let mut u = ComplexMatrix::zeros(dim, dim);
    for (j, col) in columns.iter().enumerate() {
        for i in 0..dim {
            u.set(i, j, col.amplitudes[i]);
        }
    }
    Ok(u)
}

/// Deterministic per-item seed derivation (splitmix64 finalizer). Distinct
/// `index` values give statistically independent streams for one `master`.
pub fn sub_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
