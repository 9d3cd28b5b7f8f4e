use crate::error::Result;
use crate::tensor::{hermitian_eig, ComplexMatrix, EigenDecomposition, HERMITICITY_TOL};
use crate::C64;

/// Exact propagation under a static Hamiltonian by diagonalization.
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    pub eigen: EigenDecomposition,
}

impl SpectralPropagator {
    pub fn new(h: &ComplexMatrix) -> Result<Self> {
        Ok(Self { eigen: hermitian_eig(h, HERMITICITY_TOL)? })
    }

    /// Coefficients `V^dag ψ` in the eigenbasis.
    pub fn coefficients(&self, psi: &[C64]) -> Vec<C64> {
        let v = &self.eigen.vectors;
        let n = v.rows();
        let mut c = vec![C64::new(0.0, 0.0); n];
        for (i, &p) in psi.iter().enumerate().take(n) {
            for (ck, vk) in c.iter_mut().zip(v.row(i)) {
                *ck += vk.conj() * p;
            }
        }
        c
    }

    /// `ψ(t) = V exp(−iΛt) V^dag ψ0`
    pub fn evolve(&self, psi0: &[C64], t: f64) -> Vec<C64> {
        let c = self.coefficients(psi0);
        let rotated: Vec<C64> = c
            .iter()
            .zip(&self.eigen.values)
            .map(|(ck, &e)| ck * C64::from_polar(1.0, -e * t))
            .collect();
        self.eigen.vectors.apply(&rotated)
    }

    /// Returns `t ↦ ⟨φ|ψ(t)⟩` with both states pre-projected onto the eigenbasis.
    pub fn amplitude(&self, psi0: &[C64], phi: &[C64]) -> impl Fn(f64) -> C64 + '_ {
        let a = self.coefficients(psi0);
        let b = self.coefficients(phi);
        let weights: Vec<C64> = a.iter().zip(&b).map(|(x, y)| y.conj() * x).collect();
        move |t| {
            weights
                .iter()
                .zip(&self.eigen.values)
                .map(|(w, &e)| w * C64::from_polar(1.0, -e * t))
                .sum()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve_schrodinger, uniform_grid, EvolveOptions, Observable, Tolerances};
    use crate::tensor::{basis_vector, sigma_x, sigma_z};

    #[test]
    fn matches_integrator() {
        let h = &sigma_z().scale_real(0.3) + &sigma_x().scale_real(0.2);
        let p = SpectralPropagator::new(&h).unwrap();
        let psi0 = basis_vector(2, 0);
        let grid = uniform_grid(40.0, 41);
        let opts = EvolveOptions { tolerances: Tolerances::default().tightened(1e-2), ..EvolveOptions::default() };
        let traj = evolve_schrodinger(&h.clone().into(), &psi0, &grid, &[Observable::population("g", psi0.clone())], &opts).unwrap();
        let amp = p.amplitude(&psi0, &psi0);
        for (t, v) in grid.iter().zip(&traj.series[0]) {
            assert!((amp(*t).norm_sqr() - v).abs() < 1e-8);
            assert!((crate::tensor::inner(&psi0, &p.evolve(&psi0, *t)).norm_sqr() - v).abs() < 1e-8);
        }
    }
}
