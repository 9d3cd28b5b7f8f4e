//! Quantum Rabi Hamiltonian, parity sectors and dressed matrix elements.

use std::fmt;

use crate::error::{Error, Result};
use crate::tensor::{
    destroy, embed, hermitian_eig, number, sigma_x, sigma_z, ComplexMatrix, EigenDecomposition,
    LevelKind, SpaceDescriptor, Subsystem, HERMITICITY_TOL,
};
use crate::C64;

pub const DEFAULT_N_FOCK: usize = 24;
/// Extra Fock levels used by the truncation check in [`dress`].
pub const CONVERGENCE_PAD: usize = 8;
pub const CONVERGENCE_TOL: f64 = 1e-4;
const PARITY_WINDOW: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RabiParams {
    pub omega_cav: f64,
    pub omega_q: f64,
    pub g: f64,
    pub n_fock: usize,
}

impl RabiParams {
    pub fn new(omega_q: f64, g: f64) -> Self {
        Self { omega_cav: 1.0, omega_q, g, n_fock: DEFAULT_N_FOCK }
    }

    /// `omega_q = 0.8`, `g = 0.6` in cavity units.
    pub fn reference() -> Self {
        Self::new(0.8, 0.6)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_cav > 0.0 && self.omega_cav.is_finite()) {
            return Err(Error::InvalidParameter(format!("omega_cav must be > 0, got {}", self.omega_cav)));
        }
        if !(self.omega_q > 0.0 && self.omega_q.is_finite()) {
            return Err(Error::InvalidParameter(format!("omega_q must be > 0, got {}", self.omega_q)));
        }
        if !self.g.is_finite() {
            return Err(Error::InvalidParameter(format!("g must be finite, got {}", self.g)));
        }
        if self.n_fock < 8 {
            return Err(Error::InvalidParameter(format!("n_fock must be >= 8, got {}", self.n_fock)));
        }
        Ok(())
    }

    pub fn space(&self) -> SpaceDescriptor {
        rabi_space(self.n_fock)
    }
}

fn rabi_space(n_fock: usize) -> SpaceDescriptor {
    SpaceDescriptor::new(vec![
        Subsystem { label: "qubit".into(), dim: 2, kind: LevelKind::Qubit },
        Subsystem { label: "field".into(), dim: n_fock, kind: LevelKind::Oscillator },
    ])
    .expect("two distinct labels")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Plus,
    Minus,
}

impl Parity {
    pub fn sign(self) -> i8 {
        match self {
            Parity::Plus => 1,
            Parity::Minus => -1,
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Plus => "+",
            Parity::Minus => "-",
        })
    }
}

/// `H = ω_cav a†a + (ω_q/2) σz + g σx (a + a†)` on `[qubit:2, field:n_fock]`.
pub fn build_rabi(params: &RabiParams) -> Result<ComplexMatrix> {
    params.validate()?;
    let space = params.space();
    let a = destroy(params.n_fock)?;
    let field = &a + &a.adjoint();
    let mut h = embed(&number(params.n_fock), &space, "field")?.scale_real(params.omega_cav);
    h += &embed(&sigma_z(), &space, "qubit")?.scale_real(0.5 * params.omega_q);
    let coupling = crate::tensor::kron(&sigma_x(), &field)?.scale_real(params.g);
    h += &coupling;
    Ok(h)
}

/// `P = −σz ⊗ exp(iπ a†a)`, diagonal.
pub fn parity_operator(n_fock: usize) -> ComplexMatrix {
    let diag: Vec<f64> = (0..2 * n_fock).map(|i| parity_sign(i / n_fock, i % n_fock)).collect();
    ComplexMatrix::from_diagonal(&diag)
}

fn parity_sign(qubit: usize, n: usize) -> f64 {
    let q = if qubit == 0 { 1.0 } else { -1.0 };
    if n.is_multiple_of(2) { q } else { -q }
}

/// Which dressed operator to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DressedOp {
    /// Field annihilation `a`.
    Lowering,
    /// Field quadrature `a + a†`.
    Quadrature,
    SigmaX,
    SigmaZ,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convergence {
    /// Largest change of the checked quantities when the Fock space grows.
    pub max_delta: f64,
    pub converged: bool,
}

/// Eigenstates of the Rabi Hamiltonian with their dressed matrix elements.
#[derive(Debug, Clone)]
pub struct DressedSpectrum {
    pub params: RabiParams,
    /// Absolute ground energy; [`Self::energies`] are measured from it.
    pub ground_energy: f64,
    pub energies: Vec<f64>,
    pub parities: Vec<Parity>,
    pub basis: EigenDecomposition,
    lowering: ComplexMatrix,
    quadrature: ComplexMatrix,
    sx: ComplexMatrix,
    sz: ComplexMatrix,
    pub convergence: Convergence,
}

impl DressedSpectrum {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// `ν_kj = E_k − E_j`
    pub fn nu(&self, k: usize, j: usize) -> f64 {
        self.energies[k] - self.energies[j]
    }

    /// `⟨k|a|j⟩`
    pub fn chi(&self, k: usize, j: usize) -> C64 {
        self.lowering[(k, j)]
    }

    /// Magnitude of the lowering element between two levels, `|⟨min|a|max⟩|`.
    pub fn chi_magnitude(&self, k: usize, j: usize) -> f64 {
        self.lowering[(k.min(j), k.max(j))].norm()
    }

    /// `⟨k|(a + a†)|j⟩`
    pub fn x(&self, k: usize, j: usize) -> C64 {
        self.quadrature[(k, j)]
    }

    pub fn sx(&self, k: usize, j: usize) -> C64 {
        self.sx[(k, j)]
    }

    pub fn sz(&self, k: usize, j: usize) -> C64 {
        self.sz[(k, j)]
    }

    pub fn operator(&self, op: DressedOp) -> &ComplexMatrix {
        match op {
            DressedOp::Lowering => &self.lowering,
            DressedOp::Quadrature => &self.quadrature,
            DressedOp::SigmaX => &self.sx,
            DressedOp::SigmaZ => &self.sz,
        }
    }

    /// Top-left `n × n` block of a dressed operator (lowest `n` levels).
    pub fn block(&self, op: DressedOp, n: usize) -> ComplexMatrix {
        let m = self.operator(op);
        ComplexMatrix::from_fn(n, n, |i, j| m[(i, j)])
    }

    /// Diagonal Hamiltonian on the lowest `n` levels, ground at zero.
    pub fn hamiltonian(&self, n: usize) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&self.energies[..n])
    }
}

/// Diagonalizes the Rabi Hamiltonian sector by sector and collects dressed data.
pub fn dress(params: &RabiParams) -> Result<DressedSpectrum> {
    let mut spec = dress_once(params)?;
    let bigger = RabiParams { n_fock: params.n_fock + CONVERGENCE_PAD, ..*params };
    let reference = dress_once(&bigger)?;
    let mut delta = 0.0f64;
    for k in 0..6.min(spec.len()) {
        delta = delta.max((spec.energies[k] - reference.energies[k]).abs());
    }
    for (k, j) in [(1, 0), (2, 1)] {
        delta = delta.max((spec.chi_magnitude(k, j) - reference.chi_magnitude(k, j)).abs());
    }
    spec.convergence = Convergence { max_delta: delta, converged: delta < CONVERGENCE_TOL };
    Ok(spec)
}

fn dress_once(params: &RabiParams) -> Result<DressedSpectrum> {
    let h = build_rabi(params)?;
    let n = h.rows();
    let p = parity_operator(params.n_fock);

    // Diagonalize each parity block separately so eigenvectors never mix sectors.
    let mut levels: Vec<(f64, usize, Vec<C64>)> = Vec::with_capacity(n);
    for sign in [1.0, -1.0] {
        let idx: Vec<usize> = (0..n).filter(|&i| p[(i, i)].re == sign).collect();
        let block = hermitian_eig(&h.select(&idx), HERMITICITY_TOL)?;
        for k in 0..block.len() {
            let sub = block.vector(k);
            let mut v = vec![C64::new(0.0, 0.0); n];
            for (&i, &z) in idx.iter().zip(&sub) {
                v[i] = z;
            }
            let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let pivot = v.iter().position(|z| z.norm() >= max * (1.0 - 1e-9)).unwrap_or(0);
            levels.push((block.values[k], pivot, v));
        }
    }
    levels.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));

    let values: Vec<f64> = levels.iter().map(|l| l.0).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| levels[j].2[i]);
    let basis = EigenDecomposition { values, vectors };

    let mut parities = Vec::with_capacity(n);
    for k in 0..n {
        let expectation = p.expectation(&basis.vector(k)).re;
        if (expectation.abs() - 1.0).abs() > PARITY_WINDOW {
            return Err(Error::ParityMixing { level: k, expectation });
        }
        parities.push(if expectation > 0.0 { Parity::Plus } else { Parity::Minus });
    }

    let space = params.space();
    let a = embed(&destroy(params.n_fock)?, &space, "field")?;
    let quadrature = &a + &a.adjoint();
    let sx = embed(&sigma_x(), &space, "qubit")?;
    let sz = embed(&sigma_z(), &space, "qubit")?;
    let ground_energy = basis.values[0];
    Ok(DressedSpectrum {
        params: *params,
        ground_energy,
        energies: basis.values.iter().map(|e| e - ground_energy).collect(),
        parities,
        lowering: basis.transform(&a),
        quadrature: basis.transform(&quadrature),
        sx: basis.transform(&sx),
        sz: basis.transform(&sz),
        basis,
        convergence: Convergence { max_delta: 0.0, converged: true },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub g: f64,
    /// Absolute eigenenergies of the lowest levels.
    pub energies: Vec<f64>,
    pub parities: Vec<Parity>,
}

/// Lowest `levels` energies and parities for each coupling in `g_grid`, in grid order.
pub fn spectrum_sweep(params: &RabiParams, g_grid: &[f64], levels: usize) -> Result<Vec<SweepRow>> {
    if g_grid.is_empty() {
        return Err(Error::InvalidParameter("coupling grid is empty".into()));
    }
    g_grid
        .iter()
        .map(|&g| {
            let spec = dress_once(&RabiParams { g, ..*params })?;
            let k = levels.min(spec.len());
            Ok(SweepRow {
                g,
                energies: spec.energies[..k].iter().map(|e| e + spec.ground_energy).collect(),
                parities: spec.parities[..k].to_vec(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoupled_ground_pair() {
        let p = RabiParams::new(0.8, 0.0);
        let s = dress(&p).unwrap();
        assert!((s.ground_energy + 0.4).abs() < 1e-12);
        assert!((s.energies[1] - 0.8).abs() < 1e-12);
        assert_eq!(s.parities[1], Parity::Minus);
        assert!(s.chi_magnitude(1, 0) < 1e-12);
    }

    #[test]
    fn parity_operator_basics() {
        let p = parity_operator(4);
        let space = rabi_space(4);
        assert_eq!(p[(0, 0)].re, 1.0);
        let e1 = space.compose(&[1, 1]);
        assert_eq!(p[(e1, e1)].re, 1.0);
        assert!((&p * &p).max_abs_diff(&ComplexMatrix::identity(8)) == 0.0);
    }

    #[test]
    fn hamiltonian_commutes_with_parity() {
        for (wq, g) in [(0.3, 0.1), (1.7, 0.9), (0.8, -0.6)] {
            let p = RabiParams { n_fock: 10, ..RabiParams::new(wq, g) };
            let h = build_rabi(&p).unwrap();
            assert!(h.hermiticity_deviation() < 1e-12);
            assert!(h.commutator(&parity_operator(10)).max_abs() < 1e-10);
        }
    }

    #[test]
    fn reference_point_parities_and_elements() {
        let s = dress(&RabiParams::reference()).unwrap();
        let signs: Vec<i8> = s.parities[..4].iter().map(|p| p.sign()).collect();
        assert_eq!(signs, vec![1, -1, 1, -1]);
        assert!(s.convergence.converged);
        assert!((s.chi_magnitude(1, 0) - 0.818785).abs() < 1e-5);
        assert!((s.chi_magnitude(2, 1) - 1.232510).abs() < 1e-5);
        assert!((s.nu(1, 0) - 0.354863).abs() < 1e-5);
        assert!((s.nu(2, 0) - 1.166550).abs() < 1e-5);
    }

    #[test]
    fn selection_rules_are_exact() {
        let s = dress(&RabiParams::reference()).unwrap();
        for k in 0..8 {
            for j in 0..8 {
                if s.parities[k] == s.parities[j] {
                    assert!(s.chi(k, j).norm() < 1e-10);
                    assert!(s.x(k, j).norm() < 1e-10);
                    assert!(s.sx(k, j).norm() < 1e-10);
                } else {
                    assert!(s.sz(k, j).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn sign_of_coupling_does_not_change_energies() {
        let a = dress(&RabiParams::new(0.8, 0.6)).unwrap();
        let b = dress(&RabiParams::new(0.8, -0.6)).unwrap();
        for k in 0..10 {
            assert!((a.energies[k] - b.energies[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn truncation_doubling_leaves_nu20_fixed() {
        let a = dress(&RabiParams::reference()).unwrap();
        let b = dress(&RabiParams { n_fock: 48, ..RabiParams::reference() }).unwrap();
        assert!((a.nu(2, 0) - b.nu(2, 0)).abs() < 1e-6);
        for k in 0..6 {
            assert!((a.energies[k] - b.energies[k]).abs() < 1e-6);
        }
    }

    #[test]
    fn sweep_keeps_order_and_ground_parity() {
        let grid: Vec<f64> = (0..=12).map(|i| 0.1 * i as f64).collect();
        let rows = spectrum_sweep(&RabiParams::new(0.8, 0.0), &grid, 6).unwrap();
        assert_eq!(rows.len(), grid.len());
        for (row, g) in rows.iter().zip(&grid) {
            assert_eq!(row.g, *g);
            assert_eq!(row.parities[0], Parity::Plus);
            assert_eq!(row.energies.len(), 6);
        }
        let ladder = [-0.4, 0.4, 0.6, 1.4, 1.6, 2.4];
        for (e, l) in rows[0].energies.iter().zip(ladder) {
            assert!((e - l).abs() < 1e-12);
        }
        assert!(spectrum_sweep(&RabiParams::reference(), &[], 6).is_err());
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(build_rabi(&RabiParams { n_fock: 4, ..RabiParams::reference() }).is_err());
        assert!(build_rabi(&RabiParams { omega_q: 0.0, ..RabiParams::reference() }).is_err());
    }
}
