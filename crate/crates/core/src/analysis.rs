//! Reduced states, overlaps and the target photon states.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::tensor::{hermitian_eig, kron_vec, ComplexMatrix, SpaceDescriptor, Subspace};
use crate::C64;

/// Density matrix on a subset of subsystems.
#[derive(Debug, Clone)]
pub struct ReducedState {
    pub rho: ComplexMatrix,
    pub space: SpaceDescriptor,
    pub traced_out: Vec<String>,
}

/// Traces out every subsystem of `space` not listed in `keep`.
pub fn partial_trace(rho: &ComplexMatrix, space: &SpaceDescriptor, keep: &[&str]) -> Result<ReducedState> {
    partial_trace_subspace(rho, &Subspace::full(space.clone()), keep)
}

/// [`partial_trace`] for a state stored on a truncated subspace.
pub fn partial_trace_subspace(rho: &ComplexMatrix, sub: &Subspace, keep: &[&str]) -> Result<ReducedState> {
    let space = sub.space();
    if rho.rows() != sub.dim() || rho.cols() != sub.dim() {
        return Err(Error::DimensionMismatch { context: "density matrix for partial trace".into(), expected: sub.dim(), found: rho.rows() });
    }
    let kept = space.restrict(keep)?;
    let keep_pos: Vec<usize> = kept.labels().iter().map(|l| space.position(l)).collect::<Result<_>>()?;
    let traced_out: Vec<String> = space
        .labels()
        .into_iter()
        .filter(|l| !keep.contains(l))
        .map(str::to_string)
        .collect();

    // Group basis states by their traced-out indices.
    let mut groups: BTreeMap<Vec<usize>, Vec<(usize, usize)>> = BTreeMap::new();
    for s in 0..sub.dim() {
        let levels = sub.levels(s);
        let kept_levels: Vec<usize> = keep_pos.iter().map(|&p| levels[p]).collect();
        let key: Vec<usize> = levels.iter().enumerate().filter(|(p, _)| !keep_pos.contains(p)).map(|(_, &l)| l).collect();
        groups.entry(key).or_default().push((s, kept.compose(&kept_levels)));
    }
    let m = kept.dim();
    let mut out = ComplexMatrix::zeros(m, m);
    for members in groups.values() {
        for &(a, i) in members {
            for &(b, j) in members {
                out[(i, j)] += rho[(a, b)];
            }
        }
    }
    Ok(ReducedState { rho: out, space: kept, traced_out })
}

/// Reduced state of a pure state on a subspace.
pub fn reduce_pure(psi: &[C64], sub: &Subspace, keep: &[&str]) -> Result<ReducedState> {
    partial_trace_subspace(&ComplexMatrix::projector(psi), sub, keep)
}

/// `Tr(ρ1 ρ2)`
pub fn fidelity_trace(rho1: &ComplexMatrix, rho2: &ComplexMatrix) -> Result<f64> {
    if rho1.rows() != rho2.rows() || rho1.cols() != rho2.cols() || !rho1.is_square() {
        return Err(Error::DimensionMismatch { context: "fidelity operands".into(), expected: rho1.rows(), found: rho2.rows() });
    }
    Ok(rho1.trace_product(rho2).re)
}

/// `Tr(ρ1 ρ2) / max(Tr ρ1², Tr ρ2²)`, a diagnostic that equals one for identical mixed states.
pub fn fidelity_normalized(rho1: &ComplexMatrix, rho2: &ComplexMatrix) -> Result<f64> {
    let f = fidelity_trace(rho1, rho2)?;
    let p = purity(rho1).max(purity(rho2));
    Ok(if p > 0.0 { f / p } else { 0.0 })
}

pub fn purity(rho: &ComplexMatrix) -> f64 {
    rho.trace_product(rho).re
}

/// `−Tr ρ ln ρ`
pub fn von_neumann_entropy(rho: &ComplexMatrix) -> Result<f64> {
    let herm = (rho + &rho.adjoint()).scale_real(0.5);
    let e = hermitian_eig(&herm, f64::INFINITY)?;
    Ok(e.values.iter().filter(|&&p| p > 1e-15).map(|&p| -p * p.ln()).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetKind {
    /// `|1⟩|1⟩` for one cavity.
    Single,
    /// `|Ψ+⟩ ⊗ |Ψ+⟩` for two cavities.
    Bell,
    /// `|W⟩ ⊗ |W⟩` for three or more cavities.
    W,
}

impl TargetKind {
    pub fn for_cavities(n: usize) -> Self {
        match n {
            1 => TargetKind::Single,
            2 => TargetKind::Bell,
            _ => TargetKind::W,
        }
    }
}

/// One photon shared equally by the `n` modes of one frequency.
fn shared_photon(n: usize, mode_dim: usize) -> Vec<C64> {
    let total = mode_dim.pow(n as u32);
    let mut v = vec![C64::new(0.0, 0.0); total];
    let amp = C64::new(1.0 / (n as f64).sqrt(), 0.0);
    for l in 0..n {
        // Photon in mode l: digit (n − 1 − l) of the base-mode_dim index is 1.
        v[mode_dim.pow((n - 1 - l) as u32)] = amp;
    }
    v
}

/// Target photon state on `[b1..bN, c1..cN]`, each mode of dimension `mode_dim`.
pub fn target_state(kind: TargetKind, n: usize, mode_dim: usize) -> Result<Vec<C64>> {
    let ok = match kind {
        TargetKind::Single => n == 1,
        TargetKind::Bell => n == 2,
        TargetKind::W => n >= 3,
    };
    if !ok {
        return Err(Error::InvalidParameter(format!("{kind:?} target needs a different cavity count than {n}")));
    }
    if mode_dim < 2 {
        return Err(Error::InvalidParameter("mode dimension must be >= 2".into()));
    }
    let half = shared_photon(n, mode_dim);
    Ok(kron_vec(&half, &half))
}

/// One matrix entry with its basis labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityEntry {
    pub row_label: String,
    pub col_label: String,
    pub re: f64,
    pub im: f64,
}

/// All entries of a reduced state in row-major order.
pub fn density_export(state: &ReducedState) -> Vec<DensityEntry> {
    let n = state.rho.rows();
    let labels: Vec<String> = (0..n).map(|i| state.space.basis_label(i)).collect();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let z = state.rho[(i, j)];
            out.push(DensityEntry { row_label: labels[i].clone(), col_label: labels[j].clone(), re: z.re, im: z.im });
        }
    }
    out
}
