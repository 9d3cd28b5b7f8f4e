//! Closed- and open-system time evolution.

mod dissipators;
mod integrator;
mod lindblad;
mod schrodinger;
mod spectral;

use std::sync::Arc;

pub use dissipators::{build_dissipators, DissipatorSet, DressedRate, JumpOperator, NoiseParams};
pub use integrator::{integrate, StepStats, Tolerances};
pub use lindblad::evolve_lindblad;
pub use schrodinger::evolve_schrodinger;
pub use spectral::SpectralPropagator;

use crate::error::{Error, Result};
use crate::tensor::{ComplexMatrix, SparseMatrix};
use crate::C64;

/// Entries below this magnitude are dropped when operators are compressed.
pub(crate) const SPARSE_DROP: f64 = 1e-14;

pub type Envelope = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `H(t) = H0 + Σ f_k(t) V_k`
#[derive(Clone)]
pub struct Hamiltonian {
    pub static_part: ComplexMatrix,
    pub drives: Vec<(ComplexMatrix, Envelope)>,
}

impl std::fmt::Debug for Hamiltonian {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Hamiltonian")
            .field("dim", &self.dim())
            .field("drives", &self.drives.len())
            .finish()
    }
}

impl From<ComplexMatrix> for Hamiltonian {
    fn from(h: ComplexMatrix) -> Self {
        Self { static_part: h, drives: Vec::new() }
    }
}

impl Hamiltonian {
    pub fn with_drive(mut self, op: ComplexMatrix, envelope: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.drives.push((op, Arc::new(envelope)));
        self
    }

    pub fn dim(&self) -> usize {
        self.static_part.rows()
    }

    pub fn at(&self, t: f64) -> ComplexMatrix {
        let mut h = self.static_part.clone();
        for (op, f) in &self.drives {
            h += &op.scale_real(f(t));
        }
        h
    }

    fn validate(&self) -> Result<()> {
        let n = self.dim();
        let mut worst = self.static_part.hermiticity_deviation();
        for (op, _) in &self.drives {
            if op.rows() != n || op.cols() != n {
                return Err(Error::DimensionMismatch { context: "drive operator".into(), expected: n, found: op.rows() });
            }
            worst = worst.max(op.hermiticity_deviation());
        }
        if worst > crate::tensor::HERMITICITY_TOL {
            return Err(Error::NotHermitian { deviation: worst, tol: crate::tensor::HERMITICITY_TOL });
        }
        Ok(())
    }
}

/// Quantity recorded at every grid time.
#[derive(Debug, Clone)]
pub enum Observable {
    /// `⟨O⟩`
    Expectation { name: String, operator: ComplexMatrix },
    /// `|⟨φ|ψ⟩|²` or `⟨φ|ρ|φ⟩`
    Population { name: String, state: Vec<C64> },
}

impl Observable {
    pub fn expectation(name: impl Into<String>, operator: ComplexMatrix) -> Self {
        Observable::Expectation { name: name.into(), operator }
    }

    pub fn population(name: impl Into<String>, state: Vec<C64>) -> Self {
        Observable::Population { name: name.into(), state }
    }

    pub fn name(&self) -> &str {
        match self {
            Observable::Expectation { name, .. } | Observable::Population { name, .. } => name,
        }
    }
}

/// Observable compiled for repeated evaluation.
enum Probe {
    Operator(SparseMatrix),
    State(Vec<C64>),
}

fn compile(obs: &[Observable], dim: usize) -> Result<Vec<Probe>> {
    obs.iter()
        .map(|o| match o {
            Observable::Expectation { operator, .. } => {
                if operator.rows() != dim || operator.cols() != dim {
                    return Err(Error::DimensionMismatch { context: format!("observable '{}'", o.name()), expected: dim, found: operator.rows() });
                }
                Ok(Probe::Operator(SparseMatrix::from_dense(operator, 0.0)))
            }
            Observable::Population { state, .. } => {
                if state.len() != dim {
                    return Err(Error::DimensionMismatch { context: format!("observable '{}'", o.name()), expected: dim, found: state.len() });
                }
                Ok(Probe::State(state.clone()))
            }
        })
        .collect()
}

impl Probe {
    fn pure(&self, psi: &[C64]) -> f64 {
        match self {
            Probe::Operator(op) => {
                let mut out = vec![C64::new(0.0, 0.0); psi.len()];
                op.mul_vec(psi, &mut out);
                crate::tensor::inner(psi, &out).re
            }
            Probe::State(phi) => crate::tensor::inner(phi, psi).norm_sqr(),
        }
    }

    fn mixed(&self, rho: &ComplexMatrix) -> f64 {
        match self {
            Probe::Operator(op) => op.entries().map(|(i, j, z)| z * rho[(j, i)]).sum::<C64>().re,
            Probe::State(phi) => {
                let r = rho.apply(phi);
                crate::tensor::inner(phi, &r).re
            }
        }
    }
}

/// Quantum state carried by a trajectory.
#[derive(Debug, Clone)]
pub enum State {
    Pure(Vec<C64>),
    Mixed(ComplexMatrix),
}

impl State {
    pub fn density(&self) -> ComplexMatrix {
        match self {
            State::Pure(psi) => ComplexMatrix::projector(psi),
            State::Mixed(rho) => rho.clone(),
        }
    }
}

/// Health checks gathered along a propagation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    /// Largest `|‖ψ‖ − 1|` or `|Tr ρ − 1|` seen on the grid.
    pub max_norm_error: f64,
    pub max_hermiticity_error: f64,
    /// Smallest eigenvalue of `ρ` over the checked grid points.
    pub min_eigenvalue: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub names: Vec<String>,
    /// `series[k][i]` is observable `k` at `times[i]`.
    pub series: Vec<Vec<f64>>,
    pub snapshots: Vec<(f64, ComplexMatrix)>,
    pub final_state: State,
    pub stats: StepStats,
    pub diagnostics: Diagnostics,
}

impl Trajectory {
    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|k| self.series[k].as_slice())
    }
}

/// Reference frame used for propagation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    /// Rotate with the diagonal of the static Hamiltonian when every jump
    /// operator allows it, otherwise fall back to the lab frame.
    Auto,
    Lab,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveOptions {
    pub tolerances: Tolerances,
    pub frame: Frame,
    /// Store the state every this many grid points (and at the end).
    pub snapshot_every: Option<usize>,
    /// Diagonalize `ρ` every this many grid points (and at the end) to monitor positivity.
    pub positivity_every: Option<usize>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { tolerances: Tolerances::default(), frame: Frame::Auto, snapshot_every: None, positivity_every: None }
    }
}

/// Uniform grid of `points` times over `[0, t_end]`.
pub fn uniform_grid(t_end: f64, points: usize) -> Vec<f64> {
    let m = points.max(2) - 1;
    (0..=m).map(|i| t_end * i as f64 / m as f64).collect()
}

/// Splits the static Hamiltonian into its diagonal (used as the rotating
/// frame) and the remaining sparse part.
pub(crate) struct SplitHamiltonian {
    pub frame: Option<Vec<f64>>,
    pub rest: SparseMatrix,
    pub drives: Vec<(SparseMatrix, Envelope)>,
}

impl SplitHamiltonian {
    pub fn new(h: &Hamiltonian, rotate: bool) -> Self {
        let n = h.dim();
        if rotate {
            let d: Vec<f64> = (0..n).map(|i| h.static_part[(i, i)].re).collect();
            let mut rest = h.static_part.clone();
            for i in 0..n {
                rest[(i, i)] = C64::new(0.0, 0.0);
            }
            Self {
                frame: Some(d),
                rest: SparseMatrix::from_dense(&rest, SPARSE_DROP),
                drives: h.drives.iter().map(|(op, f)| (SparseMatrix::from_dense(op, SPARSE_DROP), f.clone())).collect(),
            }
        } else {
            Self {
                frame: None,
                rest: SparseMatrix::from_dense(&h.static_part, SPARSE_DROP),
                drives: h.drives.iter().map(|(op, f)| (SparseMatrix::from_dense(op, SPARSE_DROP), f.clone())).collect(),
            }
        }
    }

    /// `exp(i D t)` for each basis state, or `None` in the lab frame.
    pub fn phases(&self, t: f64) -> Option<Vec<C64>> {
        self.frame.as_ref().map(|d| d.iter().map(|&e| C64::from_polar(1.0, e * t)).collect())
    }
}
