use super::{compile, integrate, Diagnostics, EvolveOptions, Frame, Hamiltonian, Observable, SplitHamiltonian, State, Trajectory};
use crate::error::{Error, Result};
use crate::tensor::norm;
use crate::C64;

/// Propagates `ψ` under `H(t)` and records observables on `grid`.
pub fn evolve_schrodinger(
    h: &Hamiltonian,
    psi0: &[C64],
    grid: &[f64],
    observables: &[Observable],
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    h.validate()?;
    let n = h.dim();
    if psi0.len() != n {
        return Err(Error::DimensionMismatch { context: "initial state".into(), expected: n, found: psi0.len() });
    }
    let nrm = norm(psi0);
    if (nrm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidState(format!("initial state norm {nrm}")));
    }
    let probes = compile(observables, n)?;
    let split = SplitHamiltonian::new(h, opts.frame == Frame::Auto);
    let zero = C64::new(0.0, 0.0);
    let minus_i = C64::new(0.0, -1.0);
    let mut lab = vec![zero; n];

    let rhs = |t: f64, y: &[C64], dy: &mut [C64]| {
        let phases = split.phases(t);
        let x: &[C64] = match &phases {
            Some(p) => {
                for i in 0..n {
                    lab[i] = p[i].conj() * y[i];
                }
                &lab
            }
            None => y,
        };
        dy.iter_mut().for_each(|z| *z = zero);
        split.rest.mul_vec_acc(minus_i, x, dy);
        for (op, f) in &split.drives {
            op.mul_vec_acc(minus_i * f(t), x, dy);
        }
        if let Some(p) = &phases {
            for i in 0..n {
                dy[i] *= p[i];
            }
        }
    };

    let mut series = vec![Vec::with_capacity(grid.len()); probes.len()];
    let mut snapshots = Vec::new();
    let mut diagnostics = Diagnostics::default();
    let mut last = psi0.to_vec();
    let to_lab = |t: f64, y: &[C64]| -> Vec<C64> {
        match split.phases(t) {
            Some(p) => y.iter().zip(&p).map(|(a, b)| a * b.conj()).collect(),
            None => y.to_vec(),
        }
    };
    let stats = integrate(rhs, psi0, grid, &opts.tolerances, |i, t, y| {
        let psi = to_lab(t, y);
        diagnostics.max_norm_error = diagnostics.max_norm_error.max((norm(&psi) - 1.0).abs());
        for (s, p) in series.iter_mut().zip(&probes) {
            s.push(p.pure(&psi));
        }
        if let Some(every) = opts.snapshot_every {
            if i % every.max(1) == 0 || i + 1 == grid.len() {
                snapshots.push((t, crate::tensor::ComplexMatrix::projector(&psi)));
            }
        }
        last = psi;
        Ok(())
    })?;
    if diagnostics.max_norm_error > 1e-8 {
        diagnostics.warnings.push(format!("norm drift {:.2e}", diagnostics.max_norm_error));
    }
    Ok(Trajectory {
        times: grid.to_vec(),
        names: observables.iter().map(|o| o.name().to_string()).collect(),
        series,
        snapshots,
        final_state: State::Pure(last),
        stats,
        diagnostics,
    })
}
