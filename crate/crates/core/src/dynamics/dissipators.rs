use crate::error::{Error, Result};
use crate::network::{ancilla, mode_b, mode_c, FullModel, QrsBasis, QRS};
use crate::spectrum::DressedSpectrum;
use crate::tensor::{basis_vector, destroy, sigma_minus, sigma_z, ComplexMatrix, SparseMatrix};

/// Bare loss rates, in units of the cavity frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseParams {
    /// Photon loss of the Rabi cavity and of every network mode.
    pub kappa: f64,
    pub gamma: f64,
    pub gamma_phi: f64,
    /// Ancilla relaxation rates; missing entries fall back to `gamma`.
    pub qubit_gamma: Vec<f64>,
    /// Ancilla dephasing rates; missing entries fall back to `gamma_phi`.
    pub qubit_gamma_phi: Vec<f64>,
}

impl NoiseParams {
    pub fn zero() -> Self {
        Self { kappa: 0.0, gamma: 0.0, gamma_phi: 0.0, qubit_gamma: vec![], qubit_gamma_phi: vec![] }
    }

    /// `κ = 2π × 0.1 MHz`, `γ = 2π × 15 MHz`, `γφ = 2π × 7.69 MHz`.
    pub fn reference() -> Self {
        use crate::units::rate_from_mhz;
        Self {
            kappa: rate_from_mhz(0.10),
            gamma: rate_from_mhz(15.0),
            gamma_phi: rate_from_mhz(7.69),
            qubit_gamma: vec![],
            qubit_gamma_phi: vec![],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.kappa, self.gamma, self.gamma_phi];
        if all.iter().chain(&self.qubit_gamma).chain(&self.qubit_gamma_phi).any(|&r| !(r >= 0.0 && r.is_finite())) {
            return Err(Error::InvalidParameter("noise rates must be >= 0".into()));
        }
        Ok(())
    }

    pub fn ancilla_rates(&self, l: usize) -> (f64, f64) {
        (
            self.qubit_gamma.get(l).copied().unwrap_or(self.gamma),
            self.qubit_gamma_phi.get(l).copied().unwrap_or(self.gamma_phi),
        )
    }
}

/// Channel contributions to the decay `|upper⟩ → |lower⟩` of the Rabi system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedRate {
    pub upper: usize,
    pub lower: usize,
    pub kappa: f64,
    pub gamma: f64,
    pub gamma_phi: f64,
}

impl DressedRate {
    pub fn total(&self) -> f64 {
        self.kappa + self.gamma + self.gamma_phi
    }
}

/// Downward dressed rates among the lowest `levels` states.
pub fn dressed_rates(spec: &DressedSpectrum, levels: usize, noise: &NoiseParams) -> Vec<DressedRate> {
    let p = &spec.params;
    let mut out = Vec::new();
    for upper in 1..levels {
        for lower in 0..upper {
            let nu = spec.nu(upper, lower);
            out.push(DressedRate {
                upper,
                lower,
                kappa: noise.kappa / p.omega_cav * nu * spec.x(upper, lower).norm_sqr(),
                gamma: noise.gamma / p.omega_q * nu * spec.sx(upper, lower).norm_sqr(),
                gamma_phi: noise.gamma_phi / p.omega_q * nu * spec.sz(upper, lower).norm_sqr(),
            });
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct JumpOperator {
    pub label: String,
    pub rate: f64,
    pub operator: SparseMatrix,
}

#[derive(Debug, Clone, Default)]
pub struct DissipatorSet {
    pub jumps: Vec<JumpOperator>,
    pub dressed: Vec<DressedRate>,
}

impl DissipatorSet {
    pub fn len(&self) -> usize {
        self.jumps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jumps.is_empty()
    }

    pub fn push(&mut self, label: impl Into<String>, rate: f64, operator: &ComplexMatrix) {
        if rate > 0.0 {
            self.jumps.push(JumpOperator { label: label.into(), rate, operator: SparseMatrix::from_dense(operator, 0.0) });
        }
    }
}

/// Dressed Rabi-system jumps, cavity-mode loss and ancilla noise for `model`.
pub fn build_dissipators(model: &FullModel, noise: &NoiseParams) -> Result<DissipatorSet> {
    noise.validate()?;
    let levels = match model.params.qrs_basis {
        QrsBasis::Dressed { levels } => levels,
        QrsBasis::Bare => {
            return Err(Error::InvalidParameter("dressed dissipators need the dressed Rabi basis".into()));
        }
    };
    let mut set = DissipatorSet { jumps: Vec::new(), dressed: dressed_rates(&model.spectrum, levels, noise) };
    let dressed = set.dressed.clone();
    for r in &dressed {
        let op = ComplexMatrix::outer(&basis_vector(levels, r.lower), &basis_vector(levels, r.upper));
        set.push(format!("qrs {}->{}", r.upper, r.lower), r.total(), &model.local(QRS, &op)?);
    }
    let a = destroy(model.params.mode_dim)?;
    for l in 0..model.n_cavities() {
        for label in [mode_b(l), mode_c(l)] {
            set.push(label.clone(), noise.kappa, &model.local(&label, &a)?);
        }
    }
    for l in 0..model.n_ancillas {
        let (g, gphi) = noise.ancilla_rates(l);
        let label = ancilla(l);
        set.push(format!("{label} decay"), g, &model.local(&label, &sigma_minus())?);
        set.push(format!("{label} dephasing"), gphi, &model.local(&label, &sigma_z())?);
    }
    Ok(set)
}
