//! Run configuration: JSON schema, validation and translation into library
//! types. Complex entries are encoded as `[re, im]` pairs.

use histate::entanglement::SpectralWeights;
use histate::history::EvolutionSpec;
use histate::linalg::{haar_state, Complex64, ComplexMatrix, StateVector};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system_dim: usize,
    pub clock_steps: usize,
    pub evolution: EvolutionConfig,
    #[serde(default)]
    pub seed_state: Option<SeedStateConfig>,
    /// Restrict the report to these named results (empty = everything).
    #[serde(default)]
    pub outputs: Vec<String>,
    #[serde(default)]
    pub shots: u64,
    #[serde(default = "default_samples")]
    pub mc_samples: usize,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Final-time sweep for the `bounds` command.
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

fn default_samples() -> usize {
    10_000
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EvolutionConfig {
    /// Constant Hamiltonian: either a dense Hermitian `matrix` or a
    /// spectrum given as `energies` (+ occupation `weights` for the seed).
    ConstantHamiltonian {
        #[serde(default)]
        matrix: Option<Vec<Vec<[f64; 2]>>>,
        #[serde(default)]
        energies: Option<Vec<f64>>,
        #[serde(default)]
        weights: Option<Vec<f64>>,
        #[serde(default)]
        t_final: Option<f64>,
    },
    /// Explicit step unitaries `U_{t,t-1}`, `t = 1..N`.
    StepSequence { steps: Vec<Vec<Vec<[f64; 2]>>> },
    /// Complete Weyl set on the system (`clock_steps = system_dim²`).
    Weyl {},
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SeedStateConfig {
    Vector { amplitudes: Vec<[f64; 2]> },
    Haar { seed: u64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_algebraic")]
    pub algebraic: f64,
    #[serde(default = "default_spectral")]
    pub spectral: f64,
    #[serde(default = "default_sigma")]
    pub statistical_sigma: f64,
}

fn default_algebraic() -> f64 {
    1e-10
}
fn default_spectral() -> f64 {
    1e-8
}
fn default_sigma() -> f64 {
    4.0
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            algebraic: default_algebraic(),
            spectral: default_spectral(),
            statistical_sigma: default_sigma(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

fn matrix_from_pairs(rows: &[Vec<[f64; 2]>]) -> Result<ComplexMatrix, String> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    let mut entries = Vec::with_capacity(r * c);
    for row in rows {
        if row.len() != c {
            return Err("ragged matrix rows".into());
        }
        entries.extend(row.iter().map(|&[re, im]| Complex64::new(re, im)));
    }
    ComplexMatrix::from_entries(r, c, entries).map_err(|e| e.to_string())
}

impl RunConfig {
    /// Shape consistency checks that precede any numerics.
    pub fn validate(&self) -> Result<(), String> {
        if self.system_dim == 0 || self.clock_steps == 0 {
            return Err("system_dim and clock_steps must be >= 1".into());
        }
        match &self.evolution {
            EvolutionConfig::ConstantHamiltonian { matrix, energies, weights, .. } => {
                match (matrix, energies) {
                    (Some(m), None) => {
                        if m.len() != self.system_dim
                            || m.iter().any(|row| row.len() != self.system_dim)
                        {
                            return Err(format!(
                                "field evolution.matrix: expected {0}x{0} to match system_dim",
                                self.system_dim
                            ));
                        }
                    }
                    (None, Some(e)) => {
                        if e.len() != self.system_dim {
                            return Err(format!(
                                "field evolution.energies: {} levels but system_dim = {}",
                                e.len(),
                                self.system_dim
                            ));
                        }
                        if let Some(w) = weights {
                            if w.len() != e.len() {
                                return Err(
                                    "field evolution.weights: length differs from energies".into()
                                );
                            }
                        }
                    }
                    (Some(_), Some(_)) => {
                        return Err(
                            "field evolution: give either matrix or energies, not both".into()
                        )
                    }
                    (None, None) => {
                        return Err("field evolution: constant-hamiltonian needs matrix or energies".into())
                    }
                }
            }
            EvolutionConfig::StepSequence { steps } => {
                if steps.len() != self.clock_steps {
                    return Err(format!(
                        "field evolution.steps: {} steps but clock_steps = {}",
                        steps.len(),
                        self.clock_steps
                    ));
                }
                for (t, s) in steps.iter().enumerate() {
                    if s.len() != self.system_dim
                        || s.iter().any(|row| row.len() != self.system_dim)
                    {
                        return Err(format!(
                            "field evolution.steps[{t}]: expected {0}x{0} to match system_dim",
                            self.system_dim
                        ));
                    }
                }
            }
            EvolutionConfig::Weyl {} => {
                if self.clock_steps != self.system_dim * self.system_dim {
                    return Err(format!(
                        "field clock_steps: weyl evolution needs clock_steps = system_dim² = {}",
                        self.system_dim * self.system_dim
                    ));
                }
                if self.system_dim < 2 {
                    return Err("field system_dim: weyl evolution needs system_dim >= 2".into());
                }
            }
        }
        if let Some(SeedStateConfig::Vector { amplitudes }) = &self.seed_state {
            if amplitudes.len() != self.system_dim {
                return Err(format!(
                    "field seed_state.amplitudes: {} entries but system_dim = {}",
                    amplitudes.len(),
                    self.system_dim
                ));
            }
        }
        if let Some(s) = &self.sweep {
            if s.points < 2 || !(s.t_min < s.t_max) || s.t_min <= 0.0 {
                return Err("field sweep: needs 0 < t_min < t_max and points >= 2".into());
            }
        }
        Ok(())
    }

    /// Build the library evolution spec (validates unitarity/Hermiticity).
    pub fn evolution_spec(&self) -> Result<EvolutionSpec, String> {
        match &self.evolution {
            EvolutionConfig::ConstantHamiltonian { matrix, energies, t_final, .. } => {
                if let Some(rows) = matrix {
                    let h = matrix_from_pairs(rows)?;
                    EvolutionSpec::constant(h, *t_final, self.clock_steps)
                        .map_err(|e| e.to_string())
                } else {
                    let e = energies.as_ref().unwrap();
                    EvolutionSpec::from_spectrum(e, None, *t_final, self.clock_steps)
                        .map_err(|e| e.to_string())
                }
            }
            EvolutionConfig::StepSequence { steps } => {
                let mats: Result<Vec<ComplexMatrix>, String> =
                    steps.iter().map(|s| matrix_from_pairs(s)).collect();
                EvolutionSpec::step_sequence(mats?).map_err(|e| e.to_string())
            }
            EvolutionConfig::Weyl {} => {
                EvolutionSpec::weyl(self.system_dim).map_err(|e| e.to_string())
            }
        }
    }

    /// Resolve the seed state; defaults to a Haar state drawn from
    /// `rng_seed`.
    pub fn seed_state(&self) -> Result<StateVector, String> {
        match &self.seed_state {
            Some(SeedStateConfig::Vector { amplitudes }) => {
                let v = StateVector::from_amplitudes(
                    amplitudes.iter().map(|&[re, im]| Complex64::new(re, im)).collect(),
                )
                .map_err(|e| e.to_string())?;
                v.normalized().map_err(|e| e.to_string())
            }
            Some(SeedStateConfig::Haar { seed }) => {
                haar_state(self.system_dim, *seed).map_err(|e| e.to_string())
            }
            None => haar_state(self.system_dim, self.rng_seed).map_err(|e| e.to_string()),
        }
    }

    /// Spectral weights of the constant-Hamiltonian seed (needed by the
    /// bounds analysis): explicit `energies`+`weights`, or the seed state
    /// projected onto the eigenbasis of the matrix form.
    pub fn spectral_weights(&self) -> Result<SpectralWeights, String> {
        match &self.evolution {
            EvolutionConfig::ConstantHamiltonian { matrix, energies, weights, .. } => {
                if let Some(e) = energies {
                    let w = match weights {
                        Some(w) => w.clone(),
                        None => vec![1.0 / e.len() as f64; e.len()],
                    };
                    SpectralWeights::new(e, &w).map_err(|err| err.to_string())
                } else {
                    let h = matrix_from_pairs(matrix.as_ref().unwrap())?;
                    let (evals, evecs) =
                        histate::linalg::hermitian_eigen(&h).map_err(|e| e.to_string())?;
                    let seed = self.seed_state()?;
                    let mut ws = Vec::with_capacity(evals.len());
                    for k in 0..evals.len() {
                        let col = StateVector {
                            amplitudes: (0..h.rows).map(|r| evecs.get(r, k)).collect(),
                        };
                        ws.push(col.inner(&seed).norm_sqr());
                    }
                    SpectralWeights::new(&evals, &ws).map_err(|err| err.to_string())
                }
            }
            _ => Err("this analysis needs a constant-hamiltonian evolution".into()),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.evolution, EvolutionConfig::ConstantHamiltonian { .. })
    }

    /// Default final time of the sweep and analysis when the config leaves
    /// `t_final` out: the dimensionless grid end `N - 1`.
    pub fn t_final(&self) -> f64 {
        match &self.evolution {
            EvolutionConfig::ConstantHamiltonian { t_final, .. } => {
                t_final.unwrap_or((self.clock_steps.max(2) - 1) as f64)
            }
            _ => (self.clock_steps.max(2) - 1) as f64,
        }
    }
}
