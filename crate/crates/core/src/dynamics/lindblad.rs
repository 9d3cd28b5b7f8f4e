use super::{
    compile, integrate, Diagnostics, DissipatorSet, EvolveOptions, Frame, Hamiltonian, Observable, SplitHamiltonian,
    State, Trajectory, SPARSE_DROP,
};
use crate::error::{Error, Result};
use crate::tensor::{hermitian_eig, ComplexMatrix, SparseMatrix};
use crate::C64;

const STATE_TOL: f64 = 1e-8;
/// Eigenvalues down to `-NEGATIVE_TOL` count as integration noise.
const NEGATIVE_TOL: f64 = 1e-6;

/// Checks that every jump shifts the frame energies by a single fixed amount,
/// which lets the dissipator commute with the rotating frame.
fn jumps_are_homogeneous(diag: &[f64], diss: &DissipatorSet) -> bool {
    let scale = diag.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    diss.jumps.iter().all(|j| {
        let mut shift = None;
        j.operator.entries().all(|(a, b, _)| {
            let w = diag[a] - diag[b];
            match shift {
                None => {
                    shift = Some(w);
                    true
                }
                Some(s) => (w - s).abs() <= 1e-9 * scale,
            }
        })
    })
}

/// `½ Σ Γ L^dag L`
fn anticommutator_part(diss: &DissipatorSet, n: usize) -> SparseMatrix {
    let mut k = ComplexMatrix::zeros(n, n);
    for j in &diss.jumps {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); n];
        for (r, c, z) in j.operator.entries() {
            rows[r].push((c, z));
        }
        for row in &rows {
            for &(c1, z1) in row {
                for &(c2, z2) in row {
                    k[(c1, c2)] += z1.conj() * z2 * (0.5 * j.rate);
                }
            }
        }
    }
    SparseMatrix::from_dense(&k, SPARSE_DROP)
}

fn validate_density(rho: &ComplexMatrix, n: usize) -> Result<()> {
    if rho.rows() != n || rho.cols() != n {
        return Err(Error::DimensionMismatch { context: "initial density matrix".into(), expected: n, found: rho.rows() });
    }
    let herm = rho.hermiticity_deviation();
    if herm > STATE_TOL {
        return Err(Error::InvalidState(format!("initial density matrix not Hermitian ({herm:.2e})")));
    }
    let tr = rho.trace().re;
    if (tr - 1.0).abs() > STATE_TOL {
        return Err(Error::InvalidState(format!("initial density matrix has trace {tr}")));
    }
    let min = hermitian_eig(rho, STATE_TOL)?.values[0];
    if min < -NEGATIVE_TOL {
        return Err(Error::InvalidState(format!("initial density matrix has eigenvalue {min:.2e}")));
    }
    Ok(())
}

/// Integrates `dρ/dt = −i[H(t), ρ] + Σ Γ (L ρ L^dag − ½{L^dag L, ρ})`.
pub fn evolve_lindblad(
    h: &Hamiltonian,
    diss: &DissipatorSet,
    rho0: &ComplexMatrix,
    grid: &[f64],
    observables: &[Observable],
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    h.validate()?;
    let n = h.dim();
    validate_density(rho0, n)?;
    for j in &diss.jumps {
        if j.operator.rows() != n {
            return Err(Error::DimensionMismatch { context: format!("jump '{}'", j.label), expected: n, found: j.operator.rows() });
        }
    }
    let probes = compile(observables, n)?;
    let diag: Vec<f64> = (0..n).map(|i| h.static_part[(i, i)].re).collect();
    let rotate = opts.frame == Frame::Auto && jumps_are_homogeneous(&diag, diss);
    let split = SplitHamiltonian::new(h, rotate);
    let k = anticommutator_part(diss, n);
    let jumps: Vec<Vec<(usize, usize, C64)>> = diss
        .jumps
        .iter()
        .map(|j| j.operator.entries().map(|(a, b, z)| (a, b, z * j.rate.sqrt())).collect())
        .collect();

    let zero = C64::new(0.0, 0.0);
    let minus_i = C64::new(0.0, -1.0);
    let mut y_buf = vec![zero; n * n];
    let mut b_buf = vec![zero; n * n];

    let rhs = |t: f64, rho: &[C64], drho: &mut [C64]| {
        let phases = split.phases(t);
        let src: &[C64] = match &phases {
            Some(p) => {
                for i in 0..n {
                    let c = p[i].conj();
                    for (y, r) in y_buf[i * n..(i + 1) * n].iter_mut().zip(&rho[i * n..(i + 1) * n]) {
                        *y = c * r;
                    }
                }
                &y_buf
            }
            None => rho,
        };
        b_buf.iter_mut().for_each(|z| *z = zero);
        split.rest.mul_dense_acc(minus_i, src, n, &mut b_buf);
        for (op, f) in &split.drives {
            op.mul_dense_acc(minus_i * f(t), src, n, &mut b_buf);
        }
        if let Some(p) = &phases {
            for i in 0..n {
                let c = p[i];
                b_buf[i * n..(i + 1) * n].iter_mut().for_each(|z| *z *= c);
            }
        }
        k.mul_dense_acc(C64::new(-1.0, 0.0), rho, n, &mut b_buf);
        for i in 0..n {
            for j in 0..n {
                drho[i * n + j] = b_buf[i * n + j] + b_buf[j * n + i].conj();
            }
        }
        for entries in &jumps {
            for &(a, i, la) in entries {
                let row = &rho[i * n..(i + 1) * n];
                let out = &mut drho[a * n..(a + 1) * n];
                for &(b, j, lb) in entries {
                    out[b] += la * row[j] * lb.conj();
                }
            }
        }
    };

    let to_lab = |t: f64, y: &[C64]| -> ComplexMatrix {
        let mut m = ComplexMatrix::from_vec(n, n, y.to_vec()).expect("square state");
        if let Some(p) = split.phases(t) {
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] *= p[i].conj() * p[j];
                }
            }
        }
        m
    };

    let mut series = vec![Vec::with_capacity(grid.len()); probes.len()];
    let mut snapshots = Vec::new();
    let mut diagnostics = Diagnostics::default();
    let mut last = rho0.clone();
    let stats = integrate(rhs, rho0.as_slice(), grid, &opts.tolerances, |idx, t, y| {
        let rho = to_lab(t, y);
        diagnostics.max_norm_error = diagnostics.max_norm_error.max((rho.trace().re - 1.0).abs());
        diagnostics.max_hermiticity_error = diagnostics.max_hermiticity_error.max(rho.hermiticity_deviation());
        for (s, p) in series.iter_mut().zip(&probes) {
            s.push(p.mixed(&rho));
        }
        let is_last = idx + 1 == grid.len();
        if let Some(every) = opts.positivity_every {
            if idx % every.max(1) == 0 || is_last {
                let herm = (&rho + &rho.adjoint()).scale_real(0.5);
                let min = hermitian_eig(&herm, f64::INFINITY)?.values[0];
                diagnostics.min_eigenvalue = Some(diagnostics.min_eigenvalue.map_or(min, |m: f64| m.min(min)));
            }
        }
        if let Some(every) = opts.snapshot_every {
            if idx % every.max(1) == 0 || is_last {
                snapshots.push((t, rho.clone()));
            }
        }
        last = rho;
        Ok(())
    })?;
    if diagnostics.max_norm_error > 1e-7 {
        diagnostics.warnings.push(format!("trace drift {:.2e}", diagnostics.max_norm_error));
    }
    if diagnostics.max_hermiticity_error > 1e-9 {
        diagnostics.warnings.push(format!("hermiticity drift {:.2e}", diagnostics.max_hermiticity_error));
    }
    if let Some(m) = diagnostics.min_eigenvalue {
        if m < -NEGATIVE_TOL {
            diagnostics.warnings.push(format!("negative eigenvalue {m:.2e}"));
        }
    }
    if !rotate && opts.frame == Frame::Auto {
        diagnostics.warnings.push("jump operators mix frame energies; propagated in the lab frame".into());
    }
    Ok(Trajectory {
        times: grid.to_vec(),
        names: observables.iter().map(|o| o.name().to_string()).collect(),
        series,
        snapshots,
        final_state: State::Mixed(last),
        stats,
        diagnostics,
    })
}
