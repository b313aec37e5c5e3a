//! Construction and representations of discrete history states.
//!
//! A history state pairs a `d_S`-dimensional system with an `N`-dimensional
//! clock as `(1/sqrt(N)) Σ_t U_t|S_0⟩ |t⟩`, where the cumulative unitaries
//! `U_t = U_{t,t-1} ... U_{1,0}` come from an [`EvolutionSpec`]. The module
//! also exposes the global step unitary whose eigenvalue equation the state
//! satisfies, the Hermitian generator of that unitary, the special clock
//! basis in which any history looks like constant-Hamiltonian evolution,
//! and the conjugate expansion over maximally entangled histories.

use crate::error::{Error, Result};
use crate::linalg::{
    complete_orthonormal_basis, dft_matrix, hermitian_eigen, hermitian_expm, schmidt_split,
    spectral_assemble, unitary_eigen, Complex64, ComplexMatrix, SchmidtDecomposition,
    StateVector, ZERO,
};

use std::f64::consts::PI;

const TAU: f64 = 2.0 * PI;

/// How the step unitaries of an evolution are specified.
///
/// * `Constant` — a fixed Hermitian Hamiltonian sampled at `N` equally
///   spaced times `t_j = t_final * j/(N-1)`; with `t_final = None` the
///   dimensionless grid `t_j = j` is used.
/// * `Steps` — an explicit list of `N` step unitaries `U_{t,t-1}`,
///   `t = 1..N`, the last one being the cyclic step back to `t = 0`.
/// * `Weyl` — the complete orthogonal Weyl set on a `d`-dimensional system,
///   realized by two alternating step unitaries over `N = d²` steps.
#[derive(Debug, Clone)]
pub enum EvolutionSpec {
    Constant { hamiltonian: ComplexMatrix, t_final: Option<f64>, steps: usize },
    Steps { steps: Vec<ComplexMatrix> },
    Weyl { system_dim: usize },
}

impl EvolutionSpec {
    pub fn constant(
        hamiltonian: ComplexMatrix,
        t_final: Option<f64>,
        steps: usize,
    ) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidDimension("step count must be >= 1".into()));
        }
        if !hamiltonian.is_square() {
            return Err(Error::InvalidShape("Hamiltonian must be square".into()));
        }
        if !hamiltonian.is_hermitian(1e-10) {
            return Err(Error::ContractViolation("Hamiltonian must be Hermitian within 1e-10".into()));
        }
        if let Some(tf) = t_final {
            if !tf.is_finite() {
                return Err(Error::OutOfRange("t_final must be finite".into()));
            }
        }
        Ok(Self::Constant { hamiltonian, t_final, steps })
    }

    /// Constant Hamiltonian given by its spectrum, with optional eigenvector
    /// matrix (defaults to the computational basis).
    pub fn from_spectrum(
        energies: &[f64],
        eigenvectors: Option<ComplexMatrix>,
        t_final: Option<f64>,
        steps: usize,
    ) -> Result<Self> {
        let d = energies.len();
        if d == 0 {
            return Err(Error::InvalidDimension("need at least one energy level".into()));
        }
        let v = eigenvectors.unwrap_or_else(|| ComplexMatrix::identity(d));
        if v.rows != d || v.cols != d {
            return Err(Error::InvalidShape("eigenvector matrix shape mismatch".into()));
        }
        if !v.is_unitary(1e-10) {
            return Err(Error::ContractViolation("eigenvector matrix must be unitary".into()));
        }
        let evals: Vec<Complex64> = energies.iter().map(|&e| Complex64::new(e, 0.0)).collect();
        let h = v.mul(&ComplexMatrix::diagonal(&evals)).mul(&v.dagger());
        // symmetrize away the assembly roundoff
        let h = h.add(&h.dagger()).scale(Complex64::new(0.5, 0.0));
        Self::constant(h, t_final, steps)
    }

    pub fn step_sequence(steps: Vec<ComplexMatrix>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::InvalidDimension("need at least one step".into()));
        }
        let d = steps[0].rows;
        for (t, s) in steps.iter().enumerate() {
            if s.rows != d || s.cols != d {
                return Err(Error::InvalidShape(format!("step {} has inconsistent shape", t + 1)));
            }
            if !s.is_unitary(1e-10) {
                return Err(Error::ContractViolation(format!(
                    "step {} is not unitary within 1e-10",
                    t + 1
                )));
            }
        }
        Ok(Self::Steps { steps })
    }

    pub fn weyl(system_dim: usize) -> Result<Self> {
        if system_dim < 2 {
            return Err(Error::InvalidDimension("Weyl spec needs system dimension >= 2".into()));
        }
        Ok(Self::Weyl { system_dim })
    }

    pub fn system_dim(&self) -> usize {
        match self {
            Self::Constant { hamiltonian, .. } => hamiltonian.rows,
            Self::Steps { steps } => steps[0].rows,
            Self::Weyl { system_dim } => *system_dim,
        }
    }

    /// Number of clock steps `N`.
    pub fn clock_steps(&self) -> usize {
        match self {
            Self::Constant { steps, .. } => *steps,
            Self::Steps { steps } => steps.len(),
            Self::Weyl { system_dim } => system_dim * system_dim,
        }
    }

    /// Sampled times for the constant case: `t_j = t_final * j/(N-1)`, or
    /// the dimensionless grid `t_j = j` when no final time is set.
    pub fn time_grid(&self) -> Option<Vec<f64>> {
        match self {
            Self::Constant { t_final, steps, .. } => {
                let n = *steps;
                let grid = match (t_final, n) {
                    (_, 1) => vec![0.0],
                    (Some(tf), _) => {
                        (0..n).map(|j| tf * j as f64 / (n as f64 - 1.0)).collect()
                    }
                    (None, _) => (0..n).map(|j| j as f64).collect(),
                };
                Some(grid)
            }
            _ => None,
        }
    }
}

/// Cumulative evolution operators `U_0 = 1, U_t = U_{t,t-1} U_{t-1}`.
pub fn cumulative_unitaries(spec: &EvolutionSpec) -> Result<Vec<ComplexMatrix>> {
    match spec {
        EvolutionSpec::Constant { hamiltonian, .. } => {
            let grid = spec.time_grid().unwrap();
            let (vals, vecs) = hermitian_eigen(hamiltonian)?;
            let us = grid
                .iter()
                .map(|&t| {
                    let phases: Vec<Complex64> =
                        vals.iter().map(|&e| Complex64::from_polar(1.0, -e * t)).collect();
                    spectral_assemble(&phases, &vecs)
                })
                .collect();
            Ok(us)
        }
        EvolutionSpec::Steps { steps } => {
            let d = steps[0].rows;
            let mut us = Vec::with_capacity(steps.len());
            us.push(ComplexMatrix::identity(d));
            for t in 1..steps.len() {
                let next = steps[t - 1].mul(&us[t - 1]);
                us.push(next);
            }
            Ok(us)
        }
        EvolutionSpec::Weyl { system_dim } => crate::opstates::weyl_set(*system_dim),
    }
}

/// Step unitaries `U_{t,t-1}` for `t = 1..N`, the last entry being the
/// cyclic step back to `t = 0`.
pub fn step_unitaries(spec: &EvolutionSpec) -> Result<Vec<ComplexMatrix>> {
    match spec {
        EvolutionSpec::Constant { hamiltonian, t_final, steps } => {
            let n = *steps;
            let delta = match (t_final, n) {
                (_, 1) => 0.0,
                (Some(tf), _) => tf / (n as f64 - 1.0),
                (None, _) => 1.0,
            };
            let step = hermitian_expm(hamiltonian, delta)?;
            Ok(vec![step; n])
        }
        EvolutionSpec::Steps { steps } => Ok(steps.clone()),
        EvolutionSpec::Weyl { system_dim } => crate::opstates::weyl_step_matrices(*system_dim),
    }
}

/// Joint system-clock pure state holding an entire discrete evolution.
#[derive(Debug, Clone)]
pub struct HistoryState {
    pub system_dim: usize,
    pub clock_dim: usize,
    /// Composite index `i = q*N + t` (system index major).
    pub amplitudes: StateVector,
}

impl HistoryState {
    /// Wrap raw amplitudes, checking shape and normalization.
    pub fn from_amplitudes(
        system_dim: usize,
        clock_dim: usize,
        amplitudes: StateVector,
    ) -> Result<Self> {
        if system_dim == 0 || clock_dim == 0 {
            return Err(Error::InvalidDimension("dimensions must be >= 1".into()));
        }
        if amplitudes.dim() != system_dim * clock_dim {
            return Err(Error::InvalidShape(format!(
                "amplitude count {} does not match {}x{}",
                amplitudes.dim(),
                system_dim,
                clock_dim
            )));
        }
        if (amplitudes.norm() - 1.0).abs() > 1e-8 {
            return Err(Error::ContractViolation("history state must be normalized".into()));
        }
        Ok(Self { system_dim, clock_dim, amplitudes })
    }

    /// Wave function `ψ(q,t) = sqrt(N) ⟨qt|Ψ⟩`.
    pub fn psi(&self, q: usize, t: usize) -> Complex64 {
        self.amplitudes.amplitudes[q * self.clock_dim + t]
            * Complex64::new((self.clock_dim as f64).sqrt(), 0.0)
    }

    /// Conditional system state `|S_t⟩ = sqrt(N) ⟨t|Ψ⟩`.
    pub fn system_state_at(&self, t: usize) -> StateVector {
        let scale = Complex64::new((self.clock_dim as f64).sqrt(), 0.0);
        StateVector {
            amplitudes: (0..self.system_dim)
                .map(|q| self.amplitudes.amplitudes[q * self.clock_dim + t] * scale)
                .collect(),
        }
    }

    /// System-clock Schmidt decomposition.
    pub fn schmidt(&self) -> Result<SchmidtDecomposition> {
        schmidt_split(&self.amplitudes, self.system_dim, self.clock_dim)
    }
}

/// Build the history state `(1/sqrt(N)) Σ_t (U_t seed) ⊗ |t⟩`.
pub fn build_history_state(seed: &StateVector, spec: &EvolutionSpec) -> Result<HistoryState> {
    let d = spec.system_dim();
    let n = spec.clock_steps();
    if seed.dim() != d {
        return Err(Error::InvalidShape(format!(
            "seed dimension {} does not match system dimension {}",
            seed.dim(),
            d
        )));
    }
    if (seed.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::ContractViolation("seed state must be normalized".into()));
    }
    let us = cumulative_unitaries(spec)?;
    let scale = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
    let mut amps = vec![ZERO; d * n];
    for (t, u) in us.iter().enumerate() {
        let st = u.apply(seed);
        for q in 0..d {
            amps[q * n + t] = st.amplitudes[q] * scale;
        }
    }
    HistoryState::from_amplitudes(d, n, StateVector { amplitudes: amps })
}

/// Global step unitary `𝒰 = Σ_t U_{t,t-1} ⊗ |t⟩⟨t-1|` with cyclic
/// wraparound at `t = N`.
pub fn global_unitary(spec: &EvolutionSpec) -> Result<ComplexMatrix> {
    let d = spec.system_dim();
    let n = spec.clock_steps();
    let steps = step_unitaries(spec)?;
    let mut u = ComplexMatrix::zeros(d * n, d * n);
    for t in 1..=n {
        let to = t % n;
        let from = t - 1;
        let step = &steps[t - 1];
        for q in 0..d {
            for q2 in 0..d {
                let existing = u.get(q * n + to, q2 * n + from);
                u.set(q * n + to, q2 * n + from, existing + step.get(q, q2));
            }
        }
    }
    Ok(u)
}

/// Outcome of testing the eigenvalue equation `𝒰|Ψ⟩ = e^{-i2πk/N}|Ψ⟩`.
#[derive(Debug, Clone, Copy)]
pub struct EigenResidual {
    /// `min_k ‖𝒰|Ψ⟩ - e^{-i2πk/N}|Ψ⟩‖`.
    pub residual: f64,
    /// Minimizing integer `k`.
    pub phase_index: usize,
    /// Phase `2πk/N` of the nearest eigenvalue sector.
    pub phase: f64,
}

/// Distance from the history state to the nearest eigenvalue sector of the
/// global unitary built from `spec`.
pub fn eigen_residual(spec: &EvolutionSpec, h: &HistoryState) -> Result<EigenResidual> {
    let n = spec.clock_steps();
    if spec.system_dim() != h.system_dim || n != h.clock_dim {
        return Err(Error::InvalidShape("spec and history dimensions do not match".into()));
    }
    let u = global_unitary(spec)?;
    let w = u.apply(&h.amplitudes);
    let mut best = (f64::INFINITY, 0usize);
    for k in 0..n {
        let phase = Complex64::from_polar(1.0, -TAU * k as f64 / n as f64);
        let r = w.sub(&h.amplitudes.scale(phase)).norm();
        if r < best.0 {
            best = (r, k);
        }
    }
    Ok(EigenResidual { residual: best.0, phase_index: best.1, phase: TAU * best.1 as f64 / n as f64 })
}

/// Hermitian generator `𝒥` with `exp(-i𝒥) = 𝒰` and spectrum in `[0, 2π)`.
pub fn wheeler_dewitt_generator(spec: &EvolutionSpec) -> Result<ComplexMatrix> {
    let u = global_unitary(spec)?;
    let (phases, vectors) = unitary_eigen(&u)?;
    let f: Vec<Complex64> = phases.iter().map(|&p| Complex64::new(p, 0.0)).collect();
    let j = spectral_assemble(&f, &vectors);
    Ok(j.add(&j.dagger()).scale(Complex64::new(0.5, 0.0)))
}

/// Clock translation generator `P_T = F diag(2πk/N) F†`, satisfying
/// `exp(-iP_T)|t-1⟩ = |t⟩` cyclically.
pub fn clock_momentum(n: usize) -> Result<ComplexMatrix> {
    let f = dft_matrix(n)?;
    let evals: Vec<Complex64> =
        (0..n).map(|k| Complex64::new(TAU * k as f64 / n as f64, 0.0)).collect();
    let p = f.mul(&ComplexMatrix::diagonal(&evals)).mul(&f.dagger());
    Ok(p.add(&p.dagger()).scale(Complex64::new(0.5, 0.0)))
}

/// Residual of the discrete Schrödinger equation
/// `-⟨t|P_T|Ψ⟩ sqrt(N) = H_S|S_t⟩` (largest norm over `t`).
///
/// The eigenvalue equation pairs each system energy `E` with the clock
/// momentum `2π - E (mod 2π)`, so cancellation is exact only on the branch
/// `E ∈ (-2π, 0]`. The supplied Hamiltonian spectrum is reduced to that
/// branch before the comparison; spectra commensurate with the `2πk/N` grid
/// then cancel to machine precision, anything else reports an O(1) residual.
pub fn discrete_schrodinger_residual(h: &HistoryState, h_s: &ComplexMatrix) -> Result<f64> {
    let n = h.clock_dim;
    if h_s.rows != h.system_dim || h_s.cols != h.system_dim {
        return Err(Error::InvalidShape("Hamiltonian does not match the system dimension".into()));
    }
    let (vals, vecs) = hermitian_eigen(h_s)?;
    let reduced: Vec<Complex64> = vals
        .iter()
        .map(|&e| {
            let mut r = e % TAU;
            if r < 0.0 {
                r += TAU;
            }
            // map [0, 2π) to the momentum-conjugate branch (-2π, 0]
            let branch = if r < 1e-9 || (TAU - r) < 1e-9 { 0.0 } else { r - TAU };
            Complex64::new(branch, 0.0)
        })
        .collect();
    let h_reduced = spectral_assemble(&reduced, &vecs);

    let p = clock_momentum(n)?;
    let states: Vec<StateVector> = (0..n).map(|t| h.system_state_at(t)).collect();
    let mut worst = 0.0f64;
    for t in 0..n {
        let mut lhs = StateVector::zeros(h.system_dim);
        for t2 in 0..n {
            let w = p.get(t, t2);
            if w == ZERO {
                continue;
            }
            lhs = lhs.add(&states[t2].scale(-w));
        }
        let rhs = h_reduced.apply(&states[t]);
        worst = worst.max(lhs.sub(&rhs).norm());
    }
    Ok(worst)
}

/// The special clock basis: any history state re-expressed as constant
/// Hamiltonian evolution.
#[derive(Debug, Clone)]
pub struct SpecialBasisReport {
    /// `N` orthonormal clock vectors `|τ⟩`.
    pub tau_basis: Vec<StateVector>,
    /// Effective Hamiltonian on the system, spectrum inside `{2πk/N}`.
    pub effective_hamiltonian: ComplexMatrix,
    /// Evolution seed `|S_{τ=0}⟩`.
    pub seed: StateVector,
    /// Integer `k` assigned to each Schmidt pair (descending coefficients).
    pub k_assignment: Vec<usize>,
}

impl SpecialBasisReport {
    /// `(1/sqrt(N)) Σ_τ (e^{-iτ H_eff}|S_{τ=0}⟩) ⊗ |τ⟩`; equals the source
    /// history state by construction.
    pub fn reconstruct(&self) -> Result<StateVector> {
        let n = self.tau_basis.len();
        let d = self.seed.dim();
        let scale = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
        let mut amps = vec![ZERO; d * n];
        for (tau, tau_vec) in self.tau_basis.iter().enumerate() {
            let u = hermitian_expm(&self.effective_hamiltonian, tau as f64)?;
            let s_tau = u.apply(&self.seed);
            for q in 0..d {
                for t in 0..n {
                    amps[q * n + t] += scale * s_tau.amplitudes[q] * tau_vec.amplitudes[t];
                }
            }
        }
        Ok(StateVector { amplitudes: amps })
    }
}

/// Derive the special clock basis of a history state: the inverse DFT of
/// the clock Schmidt vectors (completed to `N` orthonormal vectors when the
/// rank falls short) together with the effective constant Hamiltonian
/// assigning `2πk/N` to the `k`-th Schmidt pair.
pub fn special_clock_basis(h: &HistoryState) -> Result<SpecialBasisReport> {
    let n = h.clock_dim;
    let d = h.system_dim;
    let s = h.schmidt()?;
    let m = s.coefficients.len();

    // clock family V_k: Schmidt right-vectors for assigned k, deterministic
    // completion elsewhere
    let mut clock_family: Vec<StateVector> = s.right.clone();
    if m < n {
        clock_family = complete_orthonormal_basis(&clock_family, n)?;
    }

    let mut tau_basis = Vec::with_capacity(n);
    let scale = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
    for tau in 0..n {
        let mut v = StateVector::zeros(n);
        for (k, ck) in clock_family.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, TAU * (k * tau % n) as f64 / n as f64);
            v = v.add(&ck.scale(phase * scale));
        }
        tau_basis.push(v);
    }

    // H_eff = Σ_k (2πk/N) |L_k⟩⟨L_k| over the Schmidt pairs
    let mut h_eff = ComplexMatrix::zeros(d, d);
    for (k, lv) in s.left.iter().enumerate() {
        let e = TAU * k as f64 / n as f64;
        for i in 0..d {
            for j in 0..d {
                let cur = h_eff.get(i, j);
                h_eff.set(i, j, cur + Complex64::new(e, 0.0) * lv.amplitudes[i] * lv.amplitudes[j].conj());
            }
        }
    }
    let h_eff = h_eff.add(&h_eff.dagger()).scale(Complex64::new(0.5, 0.0));

    let mut seed = StateVector::zeros(d);
    for (k, lv) in s.left.iter().enumerate() {
        seed = seed.add(&lv.scale(Complex64::new(s.coefficients[k], 0.0)));
    }

    Ok(SpecialBasisReport {
        tau_basis,
        effective_hamiltonian: h_eff,
        seed,
        k_assignment: (0..m).collect(),
    })
}

/// Conjugate representation of a history state with `d_S = N`:
/// `|Ψ⟩ = Σ_ξ Λ_ξ |Ψ_ξ⟩` over maximally entangled histories.
#[derive(Debug, Clone)]
pub struct ConjugateReport {
    /// DFT of the completed Schmidt coefficient vector.
    pub lambda: Vec<Complex64>,
    /// Special system basis `|ξ⟩` (inverse DFT of system Schmidt vectors).
    pub xi_basis: Vec<StateVector>,
    /// Special clock basis `|τ⟩`, paired with `xi_basis`.
    pub tau_basis: Vec<StateVector>,
    /// Decomposition weights `|Λ_ξ|²`.
    pub weights: Vec<f64>,
}

impl ConjugateReport {
    /// Maximally entangled component
    /// `|Ψ_ξ⟩ = (1/sqrt(N)) Σ_τ |ξ+τ mod N⟩ |τ⟩`.
    pub fn entangled_component(&self, xi: usize) -> StateVector {
        let n = self.tau_basis.len();
        let scale = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
        let mut amps = vec![ZERO; n * n];
        for tau in 0..n {
            let sys = &self.xi_basis[(xi + tau) % n];
            let clk = &self.tau_basis[tau];
            for i in 0..n {
                for j in 0..n {
                    amps[i * n + j] += scale * sys.amplitudes[i] * clk.amplitudes[j];
                }
            }
        }
        StateVector { amplitudes: amps }
    }

    /// `Σ_ξ Λ_ξ |Ψ_ξ⟩`.
    pub fn reconstruct(&self) -> StateVector {
        let n = self.tau_basis.len();
        let mut out = StateVector::zeros(n * n);
        for xi in 0..n {
            out = out.add(&self.entangled_component(xi).scale(self.lambda[xi]));
        }
        out
    }
}

/// Expand a `d_S = N` history state over maximally entangled orthogonal
/// history states; the coefficients are the DFT of the Schmidt spectrum.
pub fn conjugate_representation(h: &HistoryState) -> Result<ConjugateReport> {
    let n = h.clock_dim;
    if h.system_dim != n {
        return Err(Error::UnsupportedShape(format!(
            "conjugate representation needs d_S = N, got {} and {}",
            h.system_dim, n
        )));
    }
    let s = h.schmidt()?;
    let mut lambdas = s.coefficients.clone();
    lambdas.resize(n, 0.0);

    let system_family = complete_orthonormal_basis(&s.left, n)?;
    let clock_family = complete_orthonormal_basis(&s.right, n)?;

    let scale = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
    let mut lambda = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for xi in 0..n {
        let mut acc = ZERO;
        for (k, &lk) in lambdas.iter().enumerate() {
            acc += Complex64::from_polar(lk, TAU * (k * xi % n) as f64 / n as f64);
        }
        let v = acc * scale;
        lambda.push(v);
        weights.push(v.norm_sqr());
    }

    let mut xi_basis = Vec::with_capacity(n);
    for xi in 0..n {
        let mut v = StateVector::zeros(n);
        for (k, sk) in system_family.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, -TAU * (k * xi % n) as f64 / n as f64);
            v = v.add(&sk.scale(phase * scale));
        }
        xi_basis.push(v);
    }
    let mut tau_basis = Vec::with_capacity(n);
    for tau in 0..n {
        let mut v = StateVector::zeros(n);
        for (k, ck) in clock_family.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, TAU * (k * tau % n) as f64 / n as f64);
            v = v.add(&ck.scale(phase * scale));
        }
        tau_basis.push(v);
    }

    Ok(ConjugateReport { lambda, xi_basis, tau_basis, weights })
}
