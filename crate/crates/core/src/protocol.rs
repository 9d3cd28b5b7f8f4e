//! End-to-end experiments: photon-pair generation, dissipative copies and
//! entanglement swapping onto ancilla qubits.

use std::f64::consts::PI;

use crate::analysis::{fidelity_trace, partial_trace_subspace, reduce_pure, target_state, ReducedState, TargetKind};
use crate::dynamics::{
    build_dissipators, evolve_lindblad, evolve_schrodinger, uniform_grid, EvolveOptions, Hamiltonian, NoiseParams,
    Observable, SpectralPropagator, State, Trajectory,
};
use crate::error::{Error, Result};
use crate::network::{
    ancilla, build_effective, build_full, build_full_with_ancillas, effective_coupling, mode_b, mode_c, DriveParams,
    FullModel, NetworkParams, PrepMode,
};
use crate::spectrum::{dress, DressedSpectrum, RabiParams};
use crate::tensor::{basis_vector, destroy, hermitian_eig, number, sigma_x, sigma_z, ComplexMatrix, HERMITICITY_TOL};
use crate::C64;

pub const POP_INITIAL: &str = "p_initial";
pub const POP_TARGET: &str = "p_target";
pub const CALIBRATION_THRESHOLD: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Full,
    Effective,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Prep {
    /// Start directly in `|2,+⟩ ⊗ |vac⟩`.
    Ideal,
    /// Pump `|0,+⟩ ⊗ |vac⟩` with a calibrated pulse first.
    Driven(DriveParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopPolicy {
    /// `π / (2 N 𝒥)`
    Formula,
    ScanForPeak,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationPlan {
    pub n: usize,
    pub prep: Prep,
    pub engine: Engine,
    pub stop: StopPolicy,
    /// Recorded window as a multiple of the formula time.
    pub window: f64,
    pub grid_points: usize,
}

impl GenerationPlan {
    pub fn new(n: usize) -> Self {
        Self { n, prep: Prep::Ideal, engine: Engine::Full, stop: StopPolicy::Formula, window: 2.0, grid_points: 801 }
    }
}

/// `π / (2 N 𝒥)`
pub fn formula_time(n: usize, coupling: f64) -> f64 {
    PI / (2.0 * n as f64 * coupling)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub time: f64,
    pub population: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub duration: f64,
    pub population: f64,
}

#[derive(Debug, Clone)]
pub struct GenerationResult {
    pub n: usize,
    pub coupling: f64,
    pub formula_time: f64,
    pub stop_time: f64,
    /// First maximum of the target population.
    pub peak: Peak,
    pub target_at_stop: f64,
    pub calibration: Option<Calibration>,
    pub dim: usize,
    /// Times are measured from the start of free evolution.
    pub trajectory: Trajectory,
    pub final_state: Vec<C64>,
}

/// Golden-section refinement of a maximum bracketed by `[lo, hi]`.
pub fn refine_peak(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Peak {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        }
        if hi - lo < 1e-10 * hi.abs().max(1.0) {
            break;
        }
    }
    let t = 0.5 * (lo + hi);
    Peak { time: t, population: f(t) }
}

/// Maximum of the first lobe that reaches 90% of the global maximum, refined with `f`.
fn first_peak(grid: &[f64], values: &[f64], f: impl Fn(f64) -> f64) -> Peak {
    let global = values.iter().cloned().fold(f64::MIN, f64::max);
    let start = values.iter().position(|&v| v >= 0.9 * global).unwrap_or(0);
    let end = values[start..].iter().position(|&v| v < 0.5 * global).map_or(values.len(), |e| start + e);
    let k = (start..end).max_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(start);
    let lo = grid[k.saturating_sub(1)];
    let hi = grid[(k + 1).min(grid.len() - 1)];
    let p = refine_peak(&f, lo, hi);
    if p.population >= values[k] {
        p
    } else {
        Peak { time: grid[k], population: values[k] }
    }
}

fn photon_target(model_n: usize, mode_dim: usize, extra: usize) -> Result<Vec<C64>> {
    let t = target_state(TargetKind::for_cavities(model_n), model_n, mode_dim)?;
    if extra == 0 {
        return Ok(t);
    }
    Ok(crate::tensor::kron_vec(&t, &basis_vector(1 << extra, 0)))
}

/// Prepares `|2,+⟩` from the ground state with a pump pulse whose duration
/// is scanned over `[0.5, 1.5] π / (Ω |σz_20|)`.
pub fn calibrate_drive(model: &FullModel, drive: &DriveParams, points: usize) -> Result<(Calibration, Vec<C64>)> {
    if drive.mode != PrepMode::Explicit || drive.amplitude <= 0.0 {
        return Err(Error::InvalidParameter("driven preparation needs an explicit drive with amplitude > 0".into()));
    }
    let sz20 = model.spectrum.sz(2, 0).norm();
    if sz20 < 1e-12 {
        return Err(Error::InvalidParameter("pump cannot reach level 2".into()));
    }
    let nominal = PI / (drive.amplitude * sz20);
    let d = *drive;
    let h = Hamiltonian::from(model.hamiltonian.clone())
        .with_drive(model.drive_operator()?, move |t| d.amplitude * (d.frequency * t).cos());
    let psi0 = model.vacuum(0)?;
    let p2 = model.level_projector(2)?;
    let grid = uniform_grid(1.5 * nominal, points.max(3));
    let opts = EvolveOptions::default();
    let scan = evolve_schrodinger(&h, &psi0, &grid, &[Observable::expectation("p2", p2.clone())], &opts)?;
    let series = &scan.series[0];
    let (mut best, mut best_t) = (f64::MIN, 0.0);
    for (t, &v) in grid.iter().zip(series) {
        if *t >= 0.5 * nominal && v > best {
            best = v;
            best_t = *t;
        }
    }
    let end = evolve_schrodinger(&h, &psi0, &[0.0, best_t], &[Observable::expectation("p2", p2)], &opts)?;
    let population = end.series[0][1];
    if population <= CALIBRATION_THRESHOLD {
        return Err(Error::Calibration { population, threshold: CALIBRATION_THRESHOLD });
    }
    let State::Pure(psi) = end.final_state else { unreachable!() };
    Ok((Calibration { duration: best_t, population }, psi))
}

/// Closed-system generation of the pair, Bell or W photon states.
pub fn run_generation(plan: &GenerationPlan, net: &NetworkParams, spec: &DressedSpectrum) -> Result<GenerationResult> {
    if plan.n != net.n_cavities() {
        return Err(Error::InvalidParameter(format!("plan has {} cavities, network has {}", plan.n, net.n_cavities())));
    }
    let nu20 = spec.nu(2, 0);
    if let Some(worst) = net.resonance_mismatch(nu20).into_iter().reduce(f64::max) {
        if worst > 1e-6 {
            return Err(Error::Resonance(format!("|ω1 + ω2 − ν20| = {worst:.3e}")));
        }
    }
    let coupling = effective_coupling(spec, net, 0, 0)?.value;
    let t_formula = formula_time(plan.n, coupling);
    let grid = uniform_grid(plan.window * t_formula, plan.grid_points);

    let (h, psi0, target, initial, calibration, dim) = match plan.engine {
        Engine::Full => {
            let model = build_full(spec, net)?;
            let target = model.product_state(0, &photon_target(plan.n, net.mode_dim, 0)?)?;
            let initial = model.vacuum(2)?;
            let (psi0, cal) = match plan.prep {
                Prep::Ideal => (initial.clone(), None),
                Prep::Driven(d) => {
                    let (c, psi) = calibrate_drive(&model, &d, 601)?;
                    (psi, Some(c))
                }
            };
            let dim = model.dim();
            (model.hamiltonian, psi0, target, initial, cal, dim)
        }
        Engine::Effective => {
            if matches!(plan.prep, Prep::Driven(_)) {
                return Err(Error::InvalidParameter("driven preparation needs the full engine".into()));
            }
            let m = build_effective(spec, net)?;
            let target = m.product_state(0, &photon_target(plan.n, net.mode_dim, 0)?)?;
            let initial = m.initial_state()?;
            let dim = m.dim();
            (m.hamiltonian, initial.clone(), target, initial, None, dim)
        }
    };

    let prop = SpectralPropagator::new(&h)?;
    let amp_target = prop.amplitude(&psi0, &target);
    let amp_initial = prop.amplitude(&psi0, &initial);
    let p_target: Vec<f64> = grid.iter().map(|&t| amp_target(t).norm_sqr()).collect();
    let p_initial: Vec<f64> = grid.iter().map(|&t| amp_initial(t).norm_sqr()).collect();
    let peak = first_peak(&grid, &p_target, |t| amp_target(t).norm_sqr());
    let stop_time = match plan.stop {
        StopPolicy::Formula => t_formula,
        StopPolicy::ScanForPeak => peak.time,
    };
    let final_state = prop.evolve(&psi0, stop_time);
    let target_at_stop = amp_target(stop_time).norm_sqr();
    let trajectory = Trajectory {
        times: grid,
        names: vec![POP_INITIAL.into(), POP_TARGET.into()],
        series: vec![p_initial, p_target],
        snapshots: vec![],
        final_state: State::Pure(final_state.clone()),
        stats: Default::default(),
        diagnostics: Default::default(),
    };
    Ok(GenerationResult {
        n: plan.n,
        coupling,
        formula_time: t_formula,
        stop_time,
        peak,
        target_at_stop,
        calibration,
        dim,
        trajectory,
        final_state,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CopiesOptions {
    pub prep: Prep,
    pub stop: StopPolicy,
    pub grid_points: usize,
    pub evolve: EvolveOptions,
}

impl Default for CopiesOptions {
    fn default() -> Self {
        Self {
            prep: Prep::Ideal,
            stop: StopPolicy::Formula,
            grid_points: 41,
            evolve: EvolveOptions { positivity_every: Some(10), ..EvolveOptions::default() },
        }
    }
}

#[derive(Debug, Clone)]
pub struct CopiesResult {
    pub n: usize,
    pub coupling: f64,
    pub stop_time: f64,
    pub rho_w1: ReducedState,
    pub rho_w2: ReducedState,
    /// `Tr(ρ_ω1 ρ_ω2)`
    pub f_pair: f64,
    /// Overlap of the full state with `|0,+⟩ ⊗` target.
    pub f_target: f64,
    pub calibration: Option<Calibration>,
    pub dim: usize,
    pub trajectory: Trajectory,
}

fn mode_labels(n: usize) -> (Vec<String>, Vec<String>) {
    ((0..n).map(mode_b).collect(), (0..n).map(mode_c).collect())
}

/// Open-system generation followed by reconstruction of both mode marginals.
pub fn run_copies(net: &NetworkParams, spec: &DressedSpectrum, noise: &NoiseParams, opts: &CopiesOptions) -> Result<CopiesResult> {
    let n = net.n_cavities();
    let model = build_full(spec, net)?;
    let diss = build_dissipators(&model, noise)?;
    let coupling = effective_coupling(spec, net, 0, 0)?.value;
    let t_formula = formula_time(n, coupling);
    let target = model.product_state(0, &photon_target(n, net.mode_dim, 0)?)?;
    let initial = model.vacuum(2)?;
    let obs = [Observable::population(POP_INITIAL, initial.clone()), Observable::population(POP_TARGET, target.clone())];
    let h = Hamiltonian::from(model.hamiltonian.clone());
    let (rho0, calibration) = match opts.prep {
        Prep::Ideal => (ComplexMatrix::projector(&initial), None),
        Prep::Driven(d) => {
            // Closed-system calibration, then the same pulse under the full master equation.
            let (cal, _) = calibrate_drive(&model, &d, 601)?;
            let hd = Hamiltonian::from(model.hamiltonian.clone())
                .with_drive(model.drive_operator()?, move |t| d.amplitude * (d.frequency * t).cos());
            let ground = ComplexMatrix::projector(&model.vacuum(0)?);
            let pulse = evolve_lindblad(&hd, &diss, &ground, &[0.0, cal.duration], &[], &opts.evolve)?;
            (pulse.final_state.density(), Some(cal))
        }
    };

    let stop_time = match opts.stop {
        StopPolicy::Formula => t_formula,
        StopPolicy::ScanForPeak => {
            let grid = uniform_grid(1.3 * t_formula, opts.grid_points.max(3));
            let scan = evolve_lindblad(&h, &diss, &rho0, &grid, &obs, &opts.evolve)?;
            let s = &scan.series[1];
            let k = (0..s.len()).max_by(|&a, &b| s[a].partial_cmp(&s[b]).unwrap()).unwrap();
            grid[k]
        }
    };
    let grid = uniform_grid(stop_time, opts.grid_points.max(2));
    let traj = evolve_lindblad(&h, &diss, &rho0, &grid, &obs, &opts.evolve)?;
    let State::Mixed(rho) = &traj.final_state else { unreachable!() };
    let (bs, cs) = mode_labels(n);
    let bs: Vec<&str> = bs.iter().map(String::as_str).collect();
    let cs: Vec<&str> = cs.iter().map(String::as_str).collect();
    let rho_w1 = partial_trace_subspace(rho, &model.subspace, &bs)?;
    let rho_w2 = partial_trace_subspace(rho, &model.subspace, &cs)?;
    let f_pair = fidelity_trace(&rho_w1.rho, &rho_w2.rho)?;
    let f_target = rho.expectation(&target).re;
    Ok(CopiesResult { n, coupling, stop_time, rho_w1, rho_w2, f_pair, f_target, calibration, dim: model.dim(), trajectory: traj })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwapTarget {
    Mode1,
    Mode2,
}

impl SwapTarget {
    /// Transfer times reported for the two targets, in ns.
    pub fn reference_time_ns(self) -> f64 {
        match self {
            SwapTarget::Mode1 => 23.08,
            SwapTarget::Mode2 => 16.32,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwapPlan {
    pub target: SwapTarget,
    /// Ancilla–mode coupling; defaults to the value giving the reference transfer time.
    pub lambda: Option<f64>,
    /// Ancilla frequency while generation runs; defaults to half the target mode frequency.
    pub park_frequency: Option<f64>,
    /// Shift of the Rabi qubit frequency that stops pair generation.
    pub detune_shift: f64,
    /// End of generation: the formula time, or the first closed-system peak
    /// of the Bell population.
    pub stop: StopPolicy,
    pub grid_points: usize,
    pub evolve: EvolveOptions,
}

impl SwapPlan {
    pub fn new(target: SwapTarget) -> Self {
        Self {
            target,
            lambda: None,
            park_frequency: None,
            detune_shift: 0.3,
            stop: StopPolicy::ScanForPeak,
            grid_points: 21,
            evolve: EvolveOptions { positivity_every: Some(20), ..EvolveOptions::default() },
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda.unwrap_or_else(|| PI / (2.0 * crate::units::from_ns(self.target.reference_time_ns())))
    }
}

#[derive(Debug, Clone)]
pub struct SwapStage {
    pub name: String,
    pub duration: f64,
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone)]
pub struct SwapResult {
    pub rho_qubits: ReducedState,
    pub f_bell: f64,
    pub t_generation: f64,
    pub t_transfer: f64,
    pub lambda: f64,
    pub park_frequency: f64,
    /// Ancilla frequency during transfer.
    pub resonance_frequency: f64,
    pub dim: usize,
    pub stages: Vec<SwapStage>,
}

/// `(|ge⟩ + |eg⟩)/√2`
pub fn swap_bell_state() -> Vec<C64> {
    let s = C64::new(1.0 / 2f64.sqrt(), 0.0);
    vec![C64::new(0.0, 0.0), s, s, C64::new(0.0, 0.0)]
}

/// One-photon frequency of the symmetric combination of the target modes
/// with the Rabi system in its ground level, including the pull of the
/// network couplings.
pub fn dressed_mode_frequency(spec: &DressedSpectrum, net: &NetworkParams, target: SwapTarget) -> Result<f64> {
    let model = build_full(spec, net)?;
    let eig = hermitian_eig(&model.hamiltonian, HERMITICITY_TOL)?;
    let vac = model.vacuum(0)?;
    let mut photon = vec![C64::new(0.0, 0.0); model.dim()];
    for l in 0..net.n_cavities() {
        let m = match target {
            SwapTarget::Mode1 => mode_b(l),
            SwapTarget::Mode2 => mode_c(l),
        };
        for (p, x) in photon.iter_mut().zip(model.mode_lowering(&m)?.adjoint().apply(&vac)) {
            *p += x;
        }
    }
    let norm = crate::tensor::norm(&photon);
    photon.iter_mut().for_each(|p| *p /= norm);
    let energy = |phi: &[C64]| {
        let k = (0..eig.len())
            .max_by(|&a, &b| {
                let (oa, ob) = (crate::tensor::inner(&eig.vector(a), phi).norm(), crate::tensor::inner(&eig.vector(b), phi).norm());
                oa.total_cmp(&ob)
            })
            .expect("non-empty spectrum");
        eig.values[k]
    };
    Ok(energy(&photon) - energy(&vac))
}

/// Network plus two ancillas at `omega_q[ℓ]` coupled to their target modes.
fn swap_model(spec: &DressedSpectrum, net: &NetworkParams, target: SwapTarget, omega_q: [f64; 2], lambda: f64) -> Result<(FullModel, ComplexMatrix)> {
    let model = build_full_with_ancillas(spec, net, 2)?;
    let mut h = model.hamiltonian.clone();
    let a = destroy(net.mode_dim)?;
    let xm = &a + &a.adjoint();
    for (l, &w) in omega_q.iter().enumerate() {
        let q = ancilla(l);
        let m = match target {
            SwapTarget::Mode1 => mode_b(l),
            SwapTarget::Mode2 => mode_c(l),
        };
        h += &model.local(&q, &sigma_z())?.scale_real(0.5 * w);
        h += &model.operator(&[(q.as_str(), &sigma_x()), (m.as_str(), &xm)])?.scale_real(lambda);
    }
    Ok((model, h))
}

/// Generation with parked ancillas, then Rabi-qubit detuning and resonant
/// transfer of the Bell photons onto the ancillas.
pub fn run_swap(plan: &SwapPlan, net: &NetworkParams, spec: &DressedSpectrum, noise: &NoiseParams) -> Result<SwapResult> {
    if net.n_cavities() != 2 {
        return Err(Error::InvalidParameter("entanglement swapping uses two cavities".into()));
    }
    let lambda = plan.lambda();
    let omega_target = match plan.target {
        SwapTarget::Mode1 => net.omega1[0],
        SwapTarget::Mode2 => net.omega2[0],
    };
    let park = plan.park_frequency.unwrap_or(0.5 * omega_target);
    if (omega_target - park).abs() < 10.0 * lambda {
        return Err(Error::InvalidParameter(format!(
            "ancilla detuning {:.3e} is below 10 λ = {:.3e}",
            (omega_target - park).abs(),
            10.0 * lambda
        )));
    }
    let coupling = effective_coupling(spec, net, 0, 0)?.value;
    let t_formula = formula_time(2, coupling);
    let t_transfer = PI / (2.0 * lambda);

    // Stage 1: pair generation, ancillas parked.
    let (m1, h1) = swap_model(spec, net, plan.target, [park; 2], lambda)?;
    let d1 = build_dissipators(&m1, noise)?;
    let rho0 = ComplexMatrix::projector(&m1.vacuum(2)?);
    let bell_photons = m1.product_state(0, &photon_target(2, net.mode_dim, 2)?)?;
    let t_gen = match plan.stop {
        StopPolicy::Formula => t_formula,
        StopPolicy::ScanForPeak => {
            let prop = SpectralPropagator::new(&h1)?;
            let amp = prop.amplitude(&m1.vacuum(2)?, &bell_photons);
            let pop = |t: f64| amp(t).norm_sqr();
            let grid = uniform_grid(1.3 * t_formula, 801);
            let values: Vec<f64> = grid.iter().map(|&t| pop(t)).collect();
            first_peak(&grid, &values, pop).time
        }
    };
    let obs1 = [Observable::population(POP_TARGET, bell_photons)];
    let s1 = evolve_lindblad(&h1.into(), &d1, &rho0, &uniform_grid(t_gen, plan.grid_points), &obs1, &plan.evolve)?;
    let State::Mixed(rho1) = s1.final_state.clone() else { unreachable!() };

    // Stages 2 and 3: detune the Rabi qubit, bring the ancillas into resonance.
    let rabi2 = RabiParams { omega_q: net.rabi.omega_q + plan.detune_shift, ..net.rabi };
    let spec2 = dress(&rabi2)?;
    let net2 = NetworkParams { rabi: rabi2, ..net.clone() };
    let resonance = dressed_mode_frequency(&spec2, &net2, plan.target)?;
    let (m2, h2) = swap_model(&spec2, &net2, plan.target, [resonance; 2], lambda)?;
    if m2.subspace != m1.subspace {
        return Err(Error::InvalidParameter("stage layouts differ".into()));
    }
    let d2 = build_dissipators(&m2, noise)?;
    let excited = [m2.local(&ancilla(0), &number(2))?, m2.local(&ancilla(1), &number(2))?];
    let obs2 = [
        Observable::expectation("q1_excited", excited[0].clone()),
        Observable::expectation("q2_excited", excited[1].clone()),
    ];
    let s3 = evolve_lindblad(&h2.into(), &d2, &rho1, &uniform_grid(t_transfer, plan.grid_points), &obs2, &plan.evolve)?;
    let State::Mixed(rho3) = &s3.final_state else { unreachable!() };
    let q = [ancilla(0), ancilla(1)];
    let rho_qubits = partial_trace_subspace(rho3, &m2.subspace, &[q[0].as_str(), q[1].as_str()])?;
    let f_bell = rho_qubits.rho.expectation(&swap_bell_state()).re;
    Ok(SwapResult {
        rho_qubits,
        f_bell,
        t_generation: t_gen,
        t_transfer,
        lambda,
        park_frequency: park,
        resonance_frequency: resonance,
        dim: m1.dim(),
        stages: vec![
            SwapStage { name: "generation".into(), duration: t_gen, trajectory: s1 },
            SwapStage { name: "transfer".into(), duration: t_transfer, trajectory: s3 },
        ],
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow {
    pub n: usize,
    pub coupling: f64,
    /// Time of the first maximum of the target population.
    pub half_period: f64,
    pub peak_population: f64,
    /// `|⟨target|H|initial⟩|`
    pub matrix_element: f64,
}

/// Generation time versus cavity count.
pub fn scaling_study(n_list: &[usize], engine: Engine, template: &NetworkParams, spec: &DressedSpectrum) -> Result<Vec<ScalingRow>> {
    n_list
        .iter()
        .map(|&n| {
            let (mode_dim, cutoff) = crate::network::default_truncation(n);
            let net = NetworkParams {
                omega1: vec![template.omega1[0]; n],
                omega2: vec![template.omega2[0]; n],
                j1: vec![template.j1[0]; n],
                j2: vec![template.j2[0]; n],
                mode_dim,
                photon_cutoff: cutoff,
                ..template.clone()
            };
            let plan = GenerationPlan { engine, ..GenerationPlan::new(n) };
            let g = run_generation(&plan, &net, spec)?;
            let matrix_element = match engine {
                Engine::Effective => {
                    let m = build_effective(spec, &net)?;
                    let target = m.product_state(0, &photon_target(n, mode_dim, 0)?)?;
                    crate::tensor::inner(&target, &m.hamiltonian.apply(&m.initial_state()?)).norm()
                }
                Engine::Full => f64::NAN,
            };
            Ok(ScalingRow { n, coupling: g.coupling, half_period: g.peak.time, peak_population: g.peak.population, matrix_element })
        })
        .collect()
}

/// Reduced states of the two mode families for a pure network state.
pub fn mode_marginals(model: &FullModel, psi: &[C64]) -> Result<(ReducedState, ReducedState)> {
    let (bs, cs) = mode_labels(model.n_cavities());
    let bs: Vec<&str> = bs.iter().map(String::as_str).collect();
    let cs: Vec<&str> = cs.iter().map(String::as_str).collect();
    Ok((reduce_pure(psi, &model.subspace, &bs)?, reduce_pure(psi, &model.subspace, &cs)?))
}

/// Headline value of a run next to the same run at enlarged truncations.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub baseline: f64,
    pub variants: Vec<(String, f64)>,
}

impl ConvergenceReport {
    pub fn max_delta(&self) -> f64 {
        self.variants.iter().filter(|(_, v)| v.is_finite()).map(|(_, v)| (v - self.baseline).abs()).fold(0.0, f64::max)
    }
}

impl std::fmt::Display for ConvergenceReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "baseline {:.6}", self.baseline)?;
        for (name, v) in &self.variants {
            write!(f, "; {name}: {:.6} (Δ {:+.2e})", v, v - self.baseline)?;
        }
        Ok(())
    }
}

/// Re-evaluates `run` with two more dressed levels, one more Fock level per
/// mode and one more allowed excitation. Variants over the dimension cap are skipped.
pub fn convergence_report(net: &NetworkParams, baseline: f64, mut run: impl FnMut(&NetworkParams) -> Result<f64>) -> Result<ConvergenceReport> {
    let mut candidates = Vec::new();
    if let crate::network::QrsBasis::Dressed { levels } = net.qrs_basis {
        let bigger = NetworkParams { qrs_basis: crate::network::QrsBasis::Dressed { levels: levels + 2 }, ..net.clone() };
        candidates.push((format!("qrs levels {}", levels + 2), bigger));
    }
    candidates.push((format!("mode dim {}", net.mode_dim + 1), NetworkParams { mode_dim: net.mode_dim + 1, ..net.clone() }));
    if let Some(c) = net.photon_cutoff {
        candidates.push((format!("cutoff {}", c + 1), NetworkParams { photon_cutoff: Some(c + 1), ..net.clone() }));
    }
    let mut variants = Vec::new();
    for (name, params) in candidates {
        match run(&params) {
            Ok(v) => variants.push((name, v)),
            Err(Error::DimensionCap { .. }) => variants.push((format!("{name} skipped"), f64::NAN)),
            Err(e) => return Err(e),
        }
    }
    Ok(ConvergenceReport { baseline, variants })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(n: usize) -> (DressedSpectrum, NetworkParams) {
        let spec = dress(&RabiParams::reference()).unwrap();
        let net = NetworkParams::reference(n, spec.nu(2, 0));
        (spec, net)
    }

    #[test]
    fn golden_section_finds_cosine_peak() {
        let p = refine_peak(|t| (t - 1.3).cos(), 0.0, 3.0);
        assert!((p.time - 1.3).abs() < 1e-6);
    }

    #[test]
    fn effective_engine_matches_sine_law() {
        let (spec, net) = setup(1);
        let plan = GenerationPlan { engine: Engine::Effective, ..GenerationPlan::new(1) };
        let g = run_generation(&plan, &net, &spec).unwrap();
        for (t, p) in g.trajectory.times.iter().zip(g.trajectory.series("p_target").unwrap()) {
            assert!((p - (g.coupling * t).sin().powi(2)).abs() < 1e-9);
        }
        assert!((g.peak.time - g.formula_time).abs() < 1e-6 * g.formula_time);
    }

    #[test]
    fn full_engine_follows_effective_model() {
        let (spec, net) = setup(1);
        let plan = GenerationPlan { window: 1.0, ..GenerationPlan::new(1) };
        let g = run_generation(&plan, &net, &spec).unwrap();
        let worst = g
            .trajectory
            .times
            .iter()
            .zip(g.trajectory.series("p_target").unwrap())
            .map(|(t, p)| (p - (g.coupling * t).sin().powi(2)).abs())
            .fold(0.0, f64::max);
        assert!(worst < 0.1, "{worst}");
        assert!(g.peak.population > 0.95);
    }

    #[test]
    fn scaling_matrix_elements_grow_linearly() {
        let (spec, net) = setup(1);
        let rows = scaling_study(&[1, 2, 3, 4], Engine::Effective, &net, &spec).unwrap();
        for r in &rows {
            assert!((r.matrix_element - r.n as f64 * r.coupling).abs() < 1e-12 * r.coupling);
            assert!((r.half_period * r.n as f64 - rows[0].half_period).abs() < 1e-6 * rows[0].half_period);
        }
    }

    #[test]
    fn driven_and_ideal_prep_agree() {
        // Halved couplings keep the J-dressing of |2,+⟩ ⊗ |vac⟩ below one percent.
        let spec = dress(&RabiParams::reference()).unwrap();
        let net = NetworkParams::from_ratios(RabiParams::reference(), 1, spec.nu(2, 0), [0.25, 0.75], [0.00375, 0.00265]);
        let ideal = run_generation(&GenerationPlan::new(1), &net, &spec).unwrap();
        let drive = DriveParams { amplitude: 0.1, frequency: spec.nu(2, 0), mode: PrepMode::Explicit };
        let plan = GenerationPlan { prep: Prep::Driven(drive), ..GenerationPlan::new(1) };
        let driven = run_generation(&plan, &net, &spec).unwrap();
        let cal = driven.calibration.unwrap();
        assert!(cal.population > CALIBRATION_THRESHOLD);
        assert!((driven.target_at_stop - ideal.target_at_stop).abs() < 0.02);
    }

    #[test]
    fn noiseless_copies_reproduce_generation() {
        let (spec, net) = setup(1);
        let gen = run_generation(&GenerationPlan::new(1), &net, &spec).unwrap();
        let c = run_copies(&net, &spec, &NoiseParams::zero(), &CopiesOptions::default()).unwrap();
        assert!((c.f_target - gen.target_at_stop).abs() < 1e-6);
        let model = build_full(&spec, &net).unwrap();
        let (w1, w2) = mode_marginals(&model, &gen.final_state).unwrap();
        assert!((fidelity_trace(&w1.rho, &w2.rho).unwrap() - c.f_pair).abs() < 1e-6);
    }

    #[test]
    fn detuned_rabi_qubit_freezes_generation() {
        let (spec, net) = setup(2);
        let coupling = effective_coupling(&spec, &net, 0, 0).unwrap().value;
        let gen = run_generation(&GenerationPlan::new(2), &net, &spec).unwrap();
        let shift = SwapPlan::new(SwapTarget::Mode1).detune_shift;
        assert!(shift >= 20.0 * coupling);
        let rabi = RabiParams { omega_q: net.rabi.omega_q + shift, ..net.rabi };
        let spec2 = dress(&rabi).unwrap();
        let net2 = NetworkParams { rabi, ..net.clone() };
        let m2 = build_full(&spec2, &net2).unwrap();
        let photons = |psi: &[C64]| -> f64 {
            (0..2)
                .flat_map(|l| [mode_b(l), mode_c(l)])
                .map(|lab| m2.local(&lab, &number(net.mode_dim)).unwrap().expectation(psi).re)
                .sum()
        };
        // Compare averages over the first and last tenth of a transfer time;
        // the sudden switch leaves a fast ripple of a few percent.
        let prop = SpectralPropagator::new(&m2.hamiltonian).unwrap();
        let t = PI / (2.0 * SwapPlan::new(SwapTarget::Mode1).lambda());
        let window = |from: usize| -> f64 {
            (from..from + 20).map(|k| photons(&prop.evolve(&gen.final_state, t * k as f64 / 200.0))).sum::<f64>() / 20.0
        };
        let (early, late) = (window(1), window(181));
        assert!((late - early).abs() < 0.01 * early, "{early} -> {late}");
    }

    #[test]
    fn lossless_single_photon_swaps_into_qubit() {
        // One photon in a mode resonant with a qubit: full transfer at π/(2λ).
        let lambda = 0.01;
        let a = destroy(2).unwrap();
        let i2 = ComplexMatrix::identity(2);
        let mut h = crate::tensor::kron(&number(2), &i2).unwrap().scale_real(0.5);
        h += &crate::tensor::kron(&i2, &sigma_z()).unwrap().scale_real(0.25);
        let xr = crate::tensor::kron(&a, &crate::tensor::sigma_minus().adjoint()).unwrap();
        h += &(&xr + &xr.adjoint()).scale_real(lambda);
        let psi0 = basis_vector(4, 2); // |1, g>
        let prop = SpectralPropagator::new(&h).unwrap();
        let psi = prop.evolve(&psi0, PI / (2.0 * lambda));
        assert!((psi[1].norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn dressed_mode_frequency_pulls_with_coupling() {
        let (spec, net) = setup(2);
        let net = NetworkParams { mode_dim: 2, ..net };
        let bare = NetworkParams { j1: vec![0.0; 2], j2: vec![0.0; 2], ..net.clone() };
        for t in [SwapTarget::Mode1, SwapTarget::Mode2] {
            let w = if t == SwapTarget::Mode1 { net.omega1[0] } else { net.omega2[0] };
            assert!((dressed_mode_frequency(&spec, &bare, t).unwrap() - w).abs() < 1e-12);
            let pulled = dressed_mode_frequency(&spec, &net, t).unwrap() - w;
            eprintln!("{t:?}: pull {pulled:.3e}");
            assert!(pulled.abs() > 1e-5);
        }
    }

    #[test]
    fn swap_plan_defaults() {
        let p = SwapPlan::new(SwapTarget::Mode2);
        assert!((crate::units::to_ns(PI / (2.0 * p.lambda())) - 16.32).abs() < 1e-9);
        let (spec, net) = setup(1);
        assert!(run_swap(&p, &net, &spec, &NoiseParams::zero()).is_err());
    }
}
