//! Rabi system coupled to `N` two-mode cavities, and its two-photon effective model.

use crate::error::{Error, Result};
use crate::spectrum::{DressedOp, DressedSpectrum, RabiParams};
use crate::tensor::{
    destroy, number, sigma_minus, sigma_x, sigma_z, ComplexMatrix, LevelKind, SpaceDescriptor, Subspace,
    Subsystem,
};
use crate::C64;

pub const DEFAULT_QRS_LEVELS: usize = 6;
pub const DEFAULT_PHOTON_CUTOFF: usize = 3;
pub const DEFAULT_DIM_CAP: usize = 2048;
/// Elimination is flagged when a detuning is below this multiple of the coupling.
pub const ADIABATIC_RATIO: f64 = 10.0;

pub const QRS: &str = "qrs";

pub fn mode_b(l: usize) -> String {
    format!("b{}", l + 1)
}

pub fn mode_c(l: usize) -> String {
    format!("c{}", l + 1)
}

pub fn ancilla(l: usize) -> String {
    format!("q{}", l + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QrsBasis {
    /// Lowest `levels` eigenstates of the Rabi Hamiltonian.
    Dressed { levels: usize },
    /// The full truncated qubit ⊗ field space.
    Bare,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    pub rabi: RabiParams,
    pub omega1: Vec<f64>,
    pub omega2: Vec<f64>,
    pub j1: Vec<f64>,
    pub j2: Vec<f64>,
    pub mode_dim: usize,
    /// Largest total number of excitations kept outside the Rabi system.
    pub photon_cutoff: Option<usize>,
    pub rwa: bool,
    pub qrs_basis: QrsBasis,
    pub dim_cap: usize,
}

/// Mode dimension and excitation cutoff used when none are given.
pub fn default_truncation(n_cavities: usize) -> (usize, Option<usize>) {
    if n_cavities <= 2 {
        (3, Some(DEFAULT_PHOTON_CUTOFF))
    } else {
        (2, Some(DEFAULT_PHOTON_CUTOFF))
    }
}

impl NetworkParams {
    /// Identical cavities with the given frequencies and couplings.
    pub fn identical(rabi: RabiParams, n: usize, omega1: f64, omega2: f64, j1: f64, j2: f64) -> Self {
        let (mode_dim, photon_cutoff) = default_truncation(n);
        Self {
            rabi,
            omega1: vec![omega1; n],
            omega2: vec![omega2; n],
            j1: vec![j1; n],
            j2: vec![j2; n],
            mode_dim,
            photon_cutoff,
            rwa: true,
            qrs_basis: QrsBasis::Dressed { levels: DEFAULT_QRS_LEVELS },
            dim_cap: DEFAULT_DIM_CAP,
        }
    }

    /// `ω1 = ν20/4`, `ω2 = 3ν20/4`, `J1 = 0.0075 ν20`, `J2 = 0.0053 ν20`.
    pub fn reference(n: usize, nu20: f64) -> Self {
        Self::from_ratios(RabiParams::reference(), n, nu20, [0.25, 0.75], [0.0075, 0.0053])
    }

    /// Frequencies and couplings as fractions of `ν20`; the frequency
    /// fractions are rescaled to sum to one so the pair resonance holds.
    pub fn from_ratios(rabi: RabiParams, n: usize, nu20: f64, omega: [f64; 2], coupling: [f64; 2]) -> Self {
        let s = omega[0] + omega[1];
        Self::identical(
            rabi,
            n,
            nu20 * omega[0] / s,
            nu20 * omega[1] / s,
            nu20 * coupling[0],
            nu20 * coupling[1],
        )
    }

    pub fn n_cavities(&self) -> usize {
        self.omega1.len()
    }

    pub fn validate(&self) -> Result<()> {
        self.rabi.validate()?;
        let n = self.omega1.len();
        if n == 0 {
            return Err(Error::InvalidParameter("at least one cavity is required".into()));
        }
        for (name, v) in [("omega2", &self.omega2), ("j1", &self.j1), ("j2", &self.j2)] {
            if v.len() != n {
                return Err(Error::DimensionMismatch { context: format!("per-cavity {name}"), expected: n, found: v.len() });
            }
        }
        if self.omega1.iter().chain(&self.omega2).any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidParameter("cavity frequencies must be > 0".into()));
        }
        if self.j1.iter().chain(&self.j2).any(|&j| !(j >= 0.0 && j.is_finite())) {
            return Err(Error::InvalidParameter("couplings must be >= 0".into()));
        }
        if self.mode_dim < 2 {
            return Err(Error::InvalidParameter(format!("mode_dim must be >= 2, got {}", self.mode_dim)));
        }
        if let QrsBasis::Dressed { levels } = self.qrs_basis {
            if levels < 3 || levels > 2 * self.rabi.n_fock {
                return Err(Error::InvalidParameter(format!("dressed level count {levels} out of range")));
            }
        }
        Ok(())
    }

    /// `|ω1 + ω2 − ν20|` per cavity.
    pub fn resonance_mismatch(&self, nu20: f64) -> Vec<f64> {
        self.omega1.iter().zip(&self.omega2).map(|(a, b)| (a + b - nu20).abs()).collect()
    }
}

/// Rabi-system operators in the basis used by a network model.
#[derive(Debug, Clone)]
pub struct QrsBlock {
    pub hamiltonian: ComplexMatrix,
    pub lowering: ComplexMatrix,
    pub sigma_x: ComplexMatrix,
    pub sigma_z: ComplexMatrix,
    /// Column `k` is dressed level `k` expressed in this basis.
    pub levels: ComplexMatrix,
    pub kind: LevelKind,
}

impl QrsBlock {
    pub fn new(spec: &DressedSpectrum, basis: QrsBasis) -> Result<Self> {
        match basis {
            QrsBasis::Dressed { levels } => Ok(Self {
                hamiltonian: spec.hamiltonian(levels),
                lowering: spec.block(DressedOp::Lowering, levels),
                sigma_x: spec.block(DressedOp::SigmaX, levels),
                sigma_z: spec.block(DressedOp::SigmaZ, levels),
                levels: ComplexMatrix::identity(levels),
                kind: LevelKind::Dressed,
            }),
            QrsBasis::Bare => {
                let p = &spec.params;
                let space = p.space();
                let shift = ComplexMatrix::identity(space.dim()).scale_real(spec.ground_energy);
                Ok(Self {
                    hamiltonian: &crate::spectrum::build_rabi(p)? - &shift,
                    lowering: crate::tensor::embed(&destroy(p.n_fock)?, &space, "field")?,
                    sigma_x: crate::tensor::embed(&sigma_x(), &space, "qubit")?,
                    sigma_z: crate::tensor::embed(&sigma_z(), &space, "qubit")?,
                    levels: spec.basis.vectors.clone(),
                    kind: LevelKind::Oscillator,
                })
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.rows()
    }
}

/// Closed-system Hamiltonian on `[qrs, b1..bN, c1..cN, q1..qK]`, restricted to
/// the excitation cutoff.
#[derive(Debug, Clone)]
pub struct FullModel {
    pub params: NetworkParams,
    pub spectrum: DressedSpectrum,
    pub qrs: QrsBlock,
    pub subspace: Subspace,
    pub hamiltonian: ComplexMatrix,
    pub n_ancillas: usize,
}

/// Space layout shared by the full and effective models.
fn layout(qrs_dim: usize, qrs_kind: LevelKind, n: usize, mode_dim: usize, n_ancillas: usize, cutoff: Option<usize>) -> Result<Subspace> {
    let mut subs = vec![Subsystem { label: QRS.into(), dim: qrs_dim, kind: qrs_kind }];
    for l in 0..n {
        subs.push(Subsystem { label: mode_b(l), dim: mode_dim, kind: LevelKind::Oscillator });
    }
    for l in 0..n {
        subs.push(Subsystem { label: mode_c(l), dim: mode_dim, kind: LevelKind::Oscillator });
    }
    for l in 0..n_ancillas {
        subs.push(Subsystem { label: ancilla(l), dim: 2, kind: LevelKind::Qubit });
    }
    let space = SpaceDescriptor::new(subs)?;
    Ok(match cutoff {
        None => Subspace::full(space),
        Some(c) => Subspace::filtered(space, |lv| lv[1..].iter().sum::<usize>() <= c),
    })
}

fn predicted_dim(qrs_dim: usize, n_other: usize, other_dims: impl Fn(usize) -> usize, cutoff: Option<usize>) -> Option<usize> {
    // Count states with at most `cutoff` excitations by dynamic programming over subsystems.
    let cap = cutoff.unwrap_or(usize::MAX / 2);
    let mut ways: Vec<usize> = vec![1];
    for s in 0..n_other {
        let d = other_dims(s);
        let len = (ways.len() + d - 1).min(cap.saturating_add(1));
        let mut next = vec![0usize; len];
        for (k, &w) in ways.iter().enumerate() {
            for add in 0..d {
                if k + add < len {
                    next[k + add] = next[k + add].checked_add(w)?;
                }
            }
        }
        ways = next;
    }
    ways.iter().try_fold(0usize, |acc, &w| acc.checked_add(w))?.checked_mul(qrs_dim)
}

/// Builds the Rabi-network Hamiltonian with RWA or full quadrature coupling.
pub fn build_full(spec: &DressedSpectrum, params: &NetworkParams) -> Result<FullModel> {
    build_full_with_ancillas(spec, params, 0)
}

/// As [`build_full`] with `n_ancillas` extra two-level systems appended and left uncoupled.
pub fn build_full_with_ancillas(spec: &DressedSpectrum, params: &NetworkParams, n_ancillas: usize) -> Result<FullModel> {
    params.validate()?;
    if spec.params != params.rabi {
        return Err(Error::InvalidParameter("dressed spectrum was computed for different Rabi parameters".into()));
    }
    let n = params.n_cavities();
    let qrs = QrsBlock::new(spec, params.qrs_basis)?;
    let md = params.mode_dim;
    let dim = predicted_dim(qrs.dim(), 2 * n + n_ancillas, |s| if s < 2 * n { md } else { 2 }, params.photon_cutoff)
        .unwrap_or(usize::MAX);
    if dim > params.dim_cap {
        return Err(Error::DimensionCap { dim, cap: params.dim_cap });
    }
    let subspace = layout(qrs.dim(), qrs.kind, n, md, n_ancillas, params.photon_cutoff)?;

    let a = destroy(md)?;
    let ad = a.adjoint();
    let num = number(md);
    let qa = &qrs.lowering;
    let qad = qa.adjoint();
    let mut h = subspace.operator(&[(QRS, &qrs.hamiltonian)])?;
    for l in 0..n {
        let (b, c) = (mode_b(l), mode_c(l));
        h += &subspace.operator(&[(b.as_str(), &num)])?.scale_real(params.omega1[l]);
        h += &subspace.operator(&[(c.as_str(), &num)])?.scale_real(params.omega2[l]);
        for (label, j) in [(&b, params.j1[l]), (&c, params.j2[l])] {
            if j == 0.0 {
                continue;
            }
            let term = if params.rwa {
                // J (m a† + m† a)
                &subspace.operator(&[(label.as_str(), &a), (QRS, &qad)])?
                    + &subspace.operator(&[(label.as_str(), &ad), (QRS, qa)])?
            } else {
                let xm = &a + &ad;
                let xq = qa + &qad;
                subspace.operator(&[(label.as_str(), &xm), (QRS, &xq)])?
            };
            h += &term.scale_real(j);
        }
    }
    Ok(FullModel { params: params.clone(), spectrum: spec.clone(), qrs, subspace, hamiltonian: h, n_ancillas })
}

impl FullModel {
    pub fn dim(&self) -> usize {
        self.subspace.dim()
    }

    pub fn n_cavities(&self) -> usize {
        self.params.n_cavities()
    }

    /// Local operator embedded in the model space.
    pub fn local(&self, label: &str, op: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.subspace.operator(&[(label, op)])
    }

    pub fn operator(&self, ops: &[(&str, &ComplexMatrix)]) -> Result<ComplexMatrix> {
        self.subspace.operator(ops)
    }

    /// Annihilation operator of a cavity mode.
    pub fn mode_lowering(&self, label: &str) -> Result<ComplexMatrix> {
        self.local(label, &destroy(self.params.mode_dim)?)
    }

    /// Projector onto dressed level `k` of the Rabi system.
    pub fn level_projector(&self, k: usize) -> Result<ComplexMatrix> {
        let v = self.qrs.levels.column(k);
        self.local(QRS, &ComplexMatrix::projector(&v))
    }

    /// `σz` of the Rabi qubit, the operator the pump drive couples to.
    pub fn drive_operator(&self) -> Result<ComplexMatrix> {
        self.local(QRS, &self.qrs.sigma_z)
    }

    /// `|k⟩_qrs ⊗ |modes⟩`, with `modes` given on the full product space of
    /// every non-Rabi subsystem in layout order.
    pub fn product_state(&self, qrs_level: usize, modes: &[C64]) -> Result<Vec<C64>> {
        product_state(&self.subspace, &self.qrs.levels.column(qrs_level), modes)
    }

    /// Vacuum of all modes and ground state of all ancillas.
    pub fn vacuum(&self, qrs_level: usize) -> Result<Vec<C64>> {
        let rest = self.subspace.space().dim() / self.qrs.dim();
        self.product_state(qrs_level, &crate::tensor::basis_vector(rest, 0))
    }
}

fn product_state(subspace: &Subspace, qrs_vec: &[C64], modes: &[C64]) -> Result<Vec<C64>> {
    let qdim = qrs_vec.len();
    let rest = subspace.space().dim() / qdim;
    if modes.len() != rest {
        return Err(Error::DimensionMismatch { context: "mode-space state".into(), expected: rest, found: modes.len() });
    }
    let v: Vec<C64> = subspace.indices().iter().map(|&i| qrs_vec[i / rest] * modes[i % rest]).collect();
    let kept: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    let total: f64 = qrs_vec.iter().map(|z| z.norm_sqr()).sum::<f64>() * modes.iter().map(|z| z.norm_sqr()).sum::<f64>();
    if (kept - total).abs() > 1e-10 {
        return Err(Error::InvalidState(format!(
            "state has weight {:.3e} outside the excitation cutoff",
            total - kept
        )));
    }
    Ok(v)
}

/// Cavity-pair coupling produced by eliminating the intermediate level `|1,−⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveCoupling {
    pub value: f64,
    /// `ω1 − ν10` and `ω2 − ν10`.
    pub detunings: [f64; 2],
    /// False when a detuning is below [`ADIABATIC_RATIO`] times the coupling.
    pub adiabatic: bool,
}

/// Two-photon coupling between mode `b` of cavity `l` and mode `c` of cavity `lp`.
///
/// Sums both orderings of the two emissions through `|1,−⟩`, with energy
/// denominators averaged between the initial and final states.
pub fn effective_coupling(spec: &DressedSpectrum, params: &NetworkParams, l: usize, lp: usize) -> Result<EffectiveCoupling> {
    let (w1, w2) = (params.omega1[l], params.omega2[lp]);
    let (nu10, nu21) = (spec.nu(1, 0), spec.nu(2, 1));
    let denominators = [nu21 - w1, w2 - nu10, nu21 - w2, w1 - nu10];
    if denominators.iter().any(|d| d.abs() < 1e-12) {
        return Err(Error::Resonance(format!(
            "mode frequencies ({w1}, {w2}) resonant with a Rabi transition"
        )));
    }
    let chi = spec.chi_magnitude(1, 0) * spec.chi_magnitude(2, 1);
    let sum: f64 = denominators.iter().map(|d| 1.0 / d).sum();
    let value = params.j1[l] * params.j2[lp] * chi * 0.5 * sum.abs();
    let detunings = [w1 - nu10, w2 - nu10];
    let adiabatic = detunings.iter().all(|d| d.abs() >= ADIABATIC_RATIO * value);
    Ok(EffectiveCoupling { value, detunings, adiabatic })
}

/// Two-photon Hamiltonian `Σ J_ll' (b_l† c_l'† S⁻ + h.c.)` in the frame
/// rotating with the bare energies, on `[qrs: {|0,+⟩, |2,+⟩}, b.., c..]`.
#[derive(Debug, Clone)]
pub struct EffectiveModel {
    /// `couplings[l][lp]` pairs mode `b_l` with mode `c_lp`.
    pub couplings: Vec<Vec<EffectiveCoupling>>,
    pub pair_terms: Vec<(usize, usize)>,
    pub subspace: Subspace,
    pub hamiltonian: ComplexMatrix,
    /// `|2,+⟩⟨0,+|` embedded.
    pub s_plus: ComplexMatrix,
    pub mode_dim: usize,
}

pub fn build_effective(spec: &DressedSpectrum, params: &NetworkParams) -> Result<EffectiveModel> {
    params.validate()?;
    let n = params.n_cavities();
    let dim = predicted_dim(2, 2 * n, |_| params.mode_dim, params.photon_cutoff).unwrap_or(usize::MAX);
    if dim > params.dim_cap {
        return Err(Error::DimensionCap { dim, cap: params.dim_cap });
    }
    let subspace = layout(2, LevelKind::Dressed, n, params.mode_dim, 0, params.photon_cutoff)?;
    let a = destroy(params.mode_dim)?;
    let ad = a.adjoint();
    let sm = sigma_minus();
    let mut couplings = Vec::with_capacity(n);
    let mut pair_terms = Vec::new();
    let mut h = ComplexMatrix::zeros(subspace.dim(), subspace.dim());
    for l in 0..n {
        let mut row = Vec::with_capacity(n);
        for lp in 0..n {
            let c = effective_coupling(spec, params, l, lp)?;
            row.push(c);
            if c.value == 0.0 {
                continue;
            }
            pair_terms.push((l, lp));
            let (b, cc) = (mode_b(l), mode_c(lp));
            let term = subspace.operator(&[(QRS, &sm), (b.as_str(), &ad), (cc.as_str(), &ad)])?;
            h += &(&term + &term.adjoint()).scale_real(c.value);
        }
        couplings.push(row);
    }
    let s_plus = subspace.operator(&[(QRS, &sm.adjoint())])?;
    Ok(EffectiveModel { couplings, pair_terms, subspace, hamiltonian: h, s_plus, mode_dim: params.mode_dim })
}

impl EffectiveModel {
    pub fn dim(&self) -> usize {
        self.subspace.dim()
    }

    /// Coupling shared by all pairs when cavities are identical.
    pub fn coupling(&self) -> f64 {
        self.couplings[0][0].value
    }

    /// `2 S⁺S⁻ + Σ (b†b + c†c)`
    pub fn grading(&self) -> Result<ComplexMatrix> {
        let s_minus = self.s_plus.adjoint();
        let mut g = (&self.s_plus * &s_minus).scale_real(2.0);
        let num = number(self.mode_dim);
        for s in &self.subspace.space().subsystems()[1..] {
            g += &self.subspace.operator(&[(s.label.as_str(), &num)])?;
        }
        Ok(g)
    }

    /// `|k⟩ ⊗ |modes⟩` with `k = 0` for `|0,+⟩` and `k = 1` for `|2,+⟩`.
    pub fn product_state(&self, qrs_level: usize, modes: &[C64]) -> Result<Vec<C64>> {
        product_state(&self.subspace, &crate::tensor::basis_vector(2, qrs_level), modes)
    }

    pub fn initial_state(&self) -> Result<Vec<C64>> {
        let rest = self.subspace.space().dim() / 2;
        self.product_state(1, &crate::tensor::basis_vector(rest, 0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PrepMode {
    Ideal,
    Explicit,
}

/// Pump acting on the Rabi qubit, `Ω cos(ν t) σz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams {
    pub amplitude: f64,
    pub frequency: f64,
    pub mode: PrepMode,
}

/// `Ω cos(ν t)` times the embedded drive operator.
pub fn drive_term(drive_operator: &ComplexMatrix, d: &DriveParams, t: f64) -> ComplexMatrix {
    drive_operator.scale_real(d.amplitude * (d.frequency * t).cos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{dress, Parity};
    use crate::tensor::hermitian_eig;

    fn reference(n: usize) -> (DressedSpectrum, NetworkParams) {
        let spec = dress(&RabiParams::reference()).unwrap();
        let p = NetworkParams::reference(n, spec.nu(2, 0));
        (spec, p)
    }

    #[test]
    fn reference_params_are_resonant() {
        let (spec, p) = reference(2);
        assert!(p.resonance_mismatch(spec.nu(2, 0)).iter().all(|&d| d < 1e-12));
    }

    #[test]
    fn effective_coupling_values() {
        let (spec, p) = reference(1);
        let c = effective_coupling(&spec, &p, 0, 0).unwrap();
        let t_ns = |x: f64| crate::units::to_ns(x);
        assert!((t_ns(std::f64::consts::PI / (2.0 * c.value)) - 25.10).abs() < 0.05 * 25.10);
        assert!((t_ns(std::f64::consts::PI / (4.0 * c.value)) - 12.55).abs() < 0.05 * 12.55);
        assert!(c.adiabatic);
        let mut zero = p.clone();
        zero.j1 = vec![0.0];
        assert_eq!(effective_coupling(&spec, &zero, 0, 0).unwrap().value, 0.0);
    }

    #[test]
    fn resonant_mode_is_rejected() {
        let (spec, mut p) = reference(1);
        p.omega1 = vec![spec.nu(1, 0)];
        assert!(matches!(effective_coupling(&spec, &p, 0, 0), Err(Error::Resonance(_))));
    }

    #[test]
    fn decoupled_spectrum_is_direct_sum() {
        let (spec, mut p) = reference(1);
        p.j1 = vec![0.0];
        p.j2 = vec![0.0];
        p.photon_cutoff = None;
        let m = build_full(&spec, &p).unwrap();
        let e = hermitian_eig(&m.hamiltonian, 1e-10).unwrap();
        let mut expected = Vec::new();
        for k in 0..6 {
            for nb in 0..3 {
                for nc in 0..3 {
                    expected.push(spec.energies[k] + nb as f64 * p.omega1[0] + nc as f64 * p.omega2[0]);
                }
            }
        }
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (v, x) in e.values.iter().zip(&expected).take(5) {
            assert!((v - x).abs() < 1e-12);
        }
    }

    #[test]
    fn full_hamiltonian_is_hermitian_and_respects_total_parity() {
        let (spec, mut p) = reference(1);
        for rwa in [true, false] {
            p.rwa = rwa;
            let m = build_full(&spec, &p).unwrap();
            assert!(m.hamiltonian.hermiticity_deviation() < 1e-12);
            // Total parity: Rabi parity times (−1) to the photon number.
            let d: Vec<f64> = (0..m.dim())
                .map(|i| {
                    let lv = m.subspace.levels(i);
                    let qp = if spec.parities[lv[0]] == Parity::Plus { 1.0 } else { -1.0 };
                    qp * if lv[1..].iter().sum::<usize>() % 2 == 0 { 1.0 } else { -1.0 }
                })
                .collect();
            let total = ComplexMatrix::from_diagonal(&d);
            assert!(m.hamiltonian.commutator(&total).max_abs() < 1e-12);
        }
    }

    #[test]
    fn bare_and_dressed_bases_share_low_spectrum() {
        let (spec, mut p) = reference(1);
        p.photon_cutoff = Some(2);
        let dressed = hermitian_eig(&build_full(&spec, &p).unwrap().hamiltonian, 1e-10).unwrap();
        p.qrs_basis = QrsBasis::Bare;
        let bare = hermitian_eig(&build_full(&spec, &p).unwrap().hamiltonian, 1e-10).unwrap();
        for k in 0..4 {
            assert!((dressed.values[k] - bare.values[k]).abs() < 1e-6);
        }
    }

    #[test]
    fn dimension_cap_is_enforced() {
        let (spec, mut p) = reference(4);
        p.photon_cutoff = None;
        p.mode_dim = 3;
        match build_full(&spec, &p) {
            Err(Error::DimensionCap { dim, .. }) => assert_eq!(dim, 6 * 3usize.pow(8)),
            other => panic!("unexpected {:?}", other.map(|m| m.dim())),
        }
    }

    #[test]
    fn effective_pair_terms_and_grading() {
        let (spec, p1) = reference(1);
        for n in 1..=3 {
            let p = NetworkParams::reference(n, spec.nu(2, 0));
            let m = build_effective(&spec, &p).unwrap();
            assert_eq!(m.pair_terms.len(), n * n);
            assert!(m.hamiltonian.hermiticity_deviation() < 1e-12);
            assert!(m.hamiltonian.commutator(&m.grading().unwrap()).max_abs() < 1e-12);
        }
        let m = build_effective(&spec, &p1).unwrap();
        assert_eq!(m.pair_terms, vec![(0, 0)]);
    }

    #[test]
    fn drive_vanishes_at_node_and_keeps_parity() {
        let (spec, p) = reference(1);
        let m = build_full(&spec, &p).unwrap();
        let op = m.drive_operator().unwrap();
        let d = DriveParams { amplitude: 0.1, frequency: 2.0, mode: PrepMode::Explicit };
        let t = std::f64::consts::PI / 4.0;
        assert!(drive_term(&op, &d, t).max_abs() < 1e-15);
        let sz = &m.qrs.sigma_z;
        for i in 0..6 {
            for j in 0..6 {
                if spec.parities[i] != spec.parities[j] {
                    assert!(sz[(i, j)].norm() < 1e-10);
                }
            }
        }
    }
}
