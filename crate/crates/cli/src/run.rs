//! Experiment dispatch.

use serde_json::{json, Value};

use parity_photons::analysis::{fidelity_normalized, fidelity_trace, purity};
use parity_photons::dynamics::NoiseParams;
use parity_photons::network::{build_full, effective_coupling, DriveParams, NetworkParams, PrepMode};
use parity_photons::protocol::{
    mode_marginals, run_copies, run_generation, run_swap, scaling_study, CopiesOptions, Engine, GenerationPlan, Prep,
    StopPolicy, SwapPlan, SwapTarget,
};
use parity_photons::spectrum::{dress, spectrum_sweep, DressedSpectrum, RabiParams};
use parity_photons::units::{omega_cav_per_ns, to_ns, CAVITY_FREQUENCY_GHZ};

use crate::config::{EngineKind, Experiment, ExperimentConfig, PrepKind, StopKind, SwapTargetKind};
use crate::output::{csv_table, density_csv, num, summary_csv, trajectory_csv, Artifacts};
use crate::CliError;

pub struct Run {
    pub artifacts: Artifacts,
    pub results: Value,
    pub derived: Value,
}

fn engine(kind: EngineKind) -> Engine {
    match kind {
        EngineKind::Full => Engine::Full,
        EngineKind::Effective => Engine::Effective,
    }
}

fn prep(cfg: &ExperimentConfig, nu20: f64) -> Prep {
    match cfg.prep.mode {
        PrepKind::Ideal => Prep::Ideal,
        PrepKind::Driven => Prep::Driven(DriveParams {
            amplitude: cfg.prep.amplitude,
            frequency: cfg.prep.frequency.unwrap_or(nu20),
            mode: PrepMode::Explicit,
        }),
    }
}

fn stop(kind: StopKind) -> StopPolicy {
    match kind {
        StopKind::Formula => StopPolicy::Formula,
        StopKind::Peak => StopPolicy::ScanForPeak,
    }
}

fn network_json(net: &NetworkParams, dim: Option<usize>) -> Value {
    json!({
        "omega1": net.omega1,
        "omega2": net.omega2,
        "j1": net.j1,
        "j2": net.j2,
        "mode_dim": net.mode_dim,
        "photon_cutoff": net.photon_cutoff,
        "rwa": net.rwa,
        "qrs_basis": format!("{:?}", net.qrs_basis),
        "dim_cap": net.dim_cap,
        "dim": dim,
    })
}

fn noise_json(noise: &NoiseParams) -> Value {
    json!({
        "kappa": noise.kappa,
        "gamma": noise.gamma,
        "gamma_phi": noise.gamma_phi,
        "qubit_gamma": noise.qubit_gamma,
        "qubit_gamma_phi": noise.qubit_gamma_phi,
    })
}

fn spectrum_json(spec: &DressedSpectrum) -> Value {
    json!({
        "nu10": spec.nu(1, 0),
        "nu20": spec.nu(2, 0),
        "nu21": spec.nu(2, 1),
        "chi10": spec.chi_magnitude(1, 0),
        "chi21": spec.chi_magnitude(2, 1),
        "sz20": spec.sz(2, 0).norm(),
        "parities": spec.parities.iter().take(6).map(|p| p.to_string()).collect::<Vec<_>>(),
        "converged": spec.convergence.converged,
    })
}

pub fn execute(cfg: &ExperimentConfig) -> Result<Run, CliError> {
    let rabi = cfg.rabi_params();
    let spec = dress(&rabi)?;
    let nu20 = spec.nu(2, 0);
    let mut derived = json!({
        "spectrum": spectrum_json(&spec),
        "units": {
            "cavity_frequency_ghz": CAVITY_FREQUENCY_GHZ,
            "omega_cav_rad_per_ns": omega_cav_per_ns(),
            "ns_per_time_unit": to_ns(1.0),
        },
    });
    let mut artifacts = Artifacts::default();
    let results = match cfg.experiment {
        Experiment::Spectrum => spectrum(cfg, &rabi, &spec, &mut artifacts)?,
        Experiment::Generate => {
            let net = cfg.network_params(rabi, nu20);
            generate(cfg, &net, &spec, &mut artifacts, &mut derived)?
        }
        Experiment::Copies => {
            let net = cfg.network_params(rabi, nu20);
            copies(cfg, &net, &spec, &mut artifacts, &mut derived)?
        }
        Experiment::Swap => {
            let net = cfg.network_params(rabi, nu20);
            swap(cfg, &net, &spec, &mut artifacts, &mut derived)?
        }
        Experiment::Scaling => {
            let net = cfg.network_params(rabi, nu20);
            scaling(cfg, &net, &spec, &mut artifacts, &mut derived)?
        }
    };
    Ok(Run { artifacts, results, derived })
}

fn spectrum(cfg: &ExperimentConfig, rabi: &RabiParams, spec: &DressedSpectrum, out: &mut Artifacts) -> Result<Value, CliError> {
    let s = &cfg.spectrum;
    let grid: Vec<f64> = if s.points == 1 {
        vec![s.g_min]
    } else {
        (0..s.points).map(|i| s.g_min + (s.g_max - s.g_min) * i as f64 / (s.points - 1) as f64).collect()
    };
    let rows = spectrum_sweep(rabi, &grid, s.levels)?;
    let table = rows.iter().flat_map(|r| {
        (0..r.energies.len()).map(move |k| vec![num(r.g), k.to_string(), num(r.energies[k]), r.parities[k].sign().to_string()])
    });
    out.add("spectrum.csv", csv_table(&["g", "level", "energy", "parity"], table));
    let levels = spec.len().min(s.levels);
    let dressed = (0..levels).map(|k| {
        vec![k.to_string(), num(spec.energies[k]), spec.parities[k].sign().to_string(), num(spec.chi_magnitude(k, 0)), num(spec.sz(k, 0).norm())]
    });
    out.add("dressed.csv", csv_table(&["level", "energy", "parity", "chi_to_ground", "sz_to_ground"], dressed));
    Ok(json!({ "levels": levels, "g_points": grid.len() }))
}

fn generate(cfg: &ExperimentConfig, net: &NetworkParams, spec: &DressedSpectrum, out: &mut Artifacts, derived: &mut Value) -> Result<Value, CliError> {
    let n = net.n_cavities();
    let g = &cfg.generation;
    let plan = GenerationPlan {
        n,
        prep: prep(cfg, spec.nu(2, 0)),
        engine: engine(g.engine),
        stop: stop(g.stop),
        window: g.window,
        grid_points: g.points,
    };
    let coupling = effective_coupling(spec, net, 0, 0)?;
    let r = run_generation(&plan, net, spec)?;
    derived["network"] = network_json(net, Some(r.dim));
    derived["effective_coupling"] = json!({ "value": coupling.value, "detunings": coupling.detunings, "adiabatic": coupling.adiabatic });
    out.add("trajectory.csv", trajectory_csv(&r.trajectory, 0.0));
    let mut summary = vec![
        ("coupling", r.coupling),
        ("formula_time", r.formula_time),
        ("formula_time_ns", to_ns(r.formula_time)),
        ("peak_time", r.peak.time),
        ("peak_time_ns", to_ns(r.peak.time)),
        ("peak_population", r.peak.population),
        ("stop_time_ns", to_ns(r.stop_time)),
        ("target_population_at_stop", r.target_at_stop),
    ];
    if let Some(c) = r.calibration {
        summary.push(("calibration_duration_ns", to_ns(c.duration)));
        summary.push(("calibration_population", c.population));
    }
    if plan.engine == Engine::Full {
        let model = build_full(spec, net)?;
        let (w1, w2) = mode_marginals(&model, &r.final_state)?;
        summary.push(("f_pair", fidelity_trace(&w1.rho, &w2.rho)?));
        out.add("density_w1.csv", density_csv(&w1));
        out.add("density_w2.csv", density_csv(&w2));
    }
    out.add("fidelity.csv", summary_csv(&summary));
    Ok(summary_json(&summary))
}

fn summary_json(entries: &[(&str, f64)]) -> Value {
    Value::Object(entries.iter().map(|(k, v)| (k.to_string(), json!(v))).collect())
}

fn copies(cfg: &ExperimentConfig, net: &NetworkParams, spec: &DressedSpectrum, out: &mut Artifacts, derived: &mut Value) -> Result<Value, CliError> {
    let noise = cfg.noise_params();
    let opts = CopiesOptions {
        prep: prep(cfg, spec.nu(2, 0)),
        stop: stop(cfg.generation.stop),
        grid_points: cfg.numerics.points,
        evolve: cfg.evolve_options(10),
    };
    let r = run_copies(net, spec, &noise, &opts)?;
    derived["network"] = network_json(net, Some(r.dim));
    derived["noise"] = noise_json(&noise);
    out.add("trajectory.csv", trajectory_csv(&r.trajectory, 0.0));
    out.add("density_w1.csv", density_csv(&r.rho_w1));
    out.add("density_w2.csv", density_csv(&r.rho_w2));
    let mut summary = vec![
        ("coupling", r.coupling),
        ("stop_time_ns", to_ns(r.stop_time)),
        ("f_pair", r.f_pair),
        ("f_pair_normalized", fidelity_normalized(&r.rho_w1.rho, &r.rho_w2.rho)?),
        ("f_target", r.f_target),
        ("purity_w1", purity(&r.rho_w1.rho)),
        ("purity_w2", purity(&r.rho_w2.rho)),
        ("max_trace_error", r.trajectory.diagnostics.max_norm_error),
        ("min_eigenvalue", r.trajectory.diagnostics.min_eigenvalue.unwrap_or(f64::NAN)),
    ];
    if let Some(c) = r.calibration {
        summary.push(("calibration_duration_ns", to_ns(c.duration)));
        summary.push(("calibration_population", c.population));
    }
    out.add("fidelity.csv", summary_csv(&summary));
    let mut v = summary_json(&summary);
    v["warnings"] = json!(r.trajectory.diagnostics.warnings);
    Ok(v)
}

fn swap(cfg: &ExperimentConfig, net: &NetworkParams, spec: &DressedSpectrum, out: &mut Artifacts, derived: &mut Value) -> Result<Value, CliError> {
    let noise = cfg.noise_params();
    let s = &cfg.swap;
    let target = match s.target {
        SwapTargetKind::Mode1 => SwapTarget::Mode1,
        SwapTargetKind::Mode2 => SwapTarget::Mode2,
    };
    let plan = SwapPlan {
        lambda: s.lambda,
        park_frequency: s.park_frequency,
        detune_shift: s.detune_shift,
        stop: stop(cfg.generation.stop),
        grid_points: cfg.numerics.points,
        evolve: cfg.evolve_options(20),
        ..SwapPlan::new(target)
    };
    let r = run_swap(&plan, net, spec, &noise)?;
    derived["network"] = network_json(net, Some(r.dim));
    derived["noise"] = noise_json(&noise);
    derived["swap"] = json!({ "lambda": r.lambda, "park_frequency": r.park_frequency, "resonance_frequency": r.resonance_frequency, "detune_shift": plan.detune_shift });
    let mut offset = 0.0;
    for stage in &r.stages {
        out.add(format!("trajectory_{}.csv", stage.name), trajectory_csv(&stage.trajectory, offset));
        offset += stage.duration;
    }
    out.add("density_qubits.csv", density_csv(&r.rho_qubits));
    let summary = [
        ("f_bell", r.f_bell),
        ("generation_time_ns", to_ns(r.t_generation)),
        ("transfer_time_ns", to_ns(r.t_transfer)),
        ("purity_qubits", purity(&r.rho_qubits.rho)),
    ];
    out.add("fidelity.csv", summary_csv(&summary));
    Ok(summary_json(&summary))
}

fn scaling(cfg: &ExperimentConfig, net: &NetworkParams, spec: &DressedSpectrum, out: &mut Artifacts, derived: &mut Value) -> Result<Value, CliError> {
    let rows = scaling_study(&cfg.scaling.cavities, engine(cfg.scaling.engine), net, spec)?;
    derived["network"] = network_json(net, None);
    let base = rows[0].half_period * rows[0].n as f64;
    let table = rows.iter().map(|r| {
        vec![
            r.n.to_string(),
            num(r.coupling),
            num(r.half_period),
            num(to_ns(r.half_period)),
            num(to_ns(r.half_period * r.n as f64)),
            num(r.peak_population),
            num(r.matrix_element),
        ]
    });
    out.add(
        "scaling.csv",
        csv_table(&["n", "coupling", "half_period", "half_period_ns", "n_times_half_period_ns", "peak_population", "matrix_element"], table),
    );
    let spread = rows.iter().map(|r| (r.half_period * r.n as f64 / base - 1.0).abs()).fold(0.0, f64::max);
    Ok(json!({ "max_relative_spread": spread }))
}
