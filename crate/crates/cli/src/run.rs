//! Protocol dispatch: config in, tables out.

use std::path::{Path, PathBuf};
use std::time::Instant;

use floquet_core::device::{load_device, DephasingSource, DeviceSpec, SidebandKind};
use floquet_core::dynamics::{bloch_series, evolve_lindblad, evolve_schrodinger, measure_populations, CollapseModel, TimeDependentHamiltonian};
use floquet_core::effective::{effective_chain_hamiltonian, ChainConfig, EffectiveCoupling};
use floquet_core::experiments::*;
use floquet_core::qop::{CVector, HilbertSpace, QuantumState, C64, ONE, ZERO};

use crate::config::*;
use crate::error::CliError;
use crate::exec::RayonExecutor;
use crate::output::{sha256_hex, write_manifest, write_tables, Cell, Manifest, Table};

/// Where a run goes and how it is executed.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub output: PathBuf,
    pub threads: usize,
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub output: PathBuf,
    pub manifest: Manifest,
}

pub fn device_for(cfg: &ExperimentConfig) -> Result<DeviceSpec, CliError> {
    Ok(match &cfg.device {
        Some(p) => load_device(p)?,
        None => DeviceSpec::table_s1(),
    })
}

/// Compute every table of a protocol without touching the filesystem.
pub fn compute_tables(cfg: &ExperimentConfig, exec: &RayonExecutor) -> Result<Vec<Table>, CliError> {
    let device = device_for(cfg)?;
    match &cfg.protocol {
        Protocol::SidebandRabi(p) => sideband_rabi(p, &device),
        Protocol::AbInterference(p) => ab_interference(p, exec),
        Protocol::EntangledPrep(p) => entangled_prep(p, &device),
        Protocol::Calibrate(p) => calibrate(p, cfg.seed, exec),
        Protocol::DptSweep(p) => dpt_sweep(p, &device, exec),
        Protocol::CustomEvolution(p) => custom_evolution(p, &device),
    }
}

/// Run a config and write its tables plus `manifest.json` into `opts.output`.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunSummary, CliError> {
    let start = Instant::now();
    let exec = RayonExecutor::new(opts.threads)?;
    log::info!("running {} with {} thread(s)", cfg.protocol.name(), exec.threads());
    let tables = compute_tables(cfg, &exec)?;
    let files = write_tables(&opts.output, &tables)?;
    let manifest = Manifest {
        protocol: cfg.protocol.name().to_string(),
        config_sha256: sha256_hex(cfg.to_canonical_string().as_bytes()),
        version: env!("CARGO_PKG_VERSION").to_string(),
        core_version: floquet_core::VERSION.to_string(),
        seed: cfg.seed,
        threads: exec.threads(),
        wall_time_s: start.elapsed().as_secs_f64(),
        files,
    };
    write_manifest(&opts.output, &manifest)?;
    Ok(RunSummary { output: opts.output.clone(), manifest })
}

/// Default output directory: `output` from the config, else `out/<protocol>`.
pub fn default_output(cfg: &ExperimentConfig, base: Option<&Path>) -> PathBuf {
    match (&cfg.output, base) {
        (Some(p), Some(b)) if p.is_relative() => b.join(p),
        (Some(p), _) => p.clone(),
        (None, _) => PathBuf::from("out").join(cfg.protocol.name()),
    }
}

fn sideband_rabi(p: &SidebandRabiParams, device: &DeviceSpec) -> Result<Vec<Table>, CliError> {
    let opts = RabiOptions { sample_every_ns: p.sample_every_ns, ramp_ns: p.ramp_ns, ..RabiOptions::default() };
    let r = run_sideband_rabi(device, p.bond, p.kind, p.g_mhz, p.duration_ns, p.mode, &opts)?;
    let times = &r.trajectory.times;
    let mut tables = vec![Table::populations("populations", times, &r.labels, &r.populations)];
    let target = match p.kind {
        SidebandKind::Blue => "11",
        SidebandKind::Red => "01",
    };
    let series = &r.populations[r.labels.iter().position(|l| l == target).expect("two-qubit labels")];
    let mut summary = Table::new("summary", &["mode", "kind", "g_mhz", "period_ns", "analytic_period_ns", "max_transfer"]);
    let period = crossing_period(times, series).unwrap_or(f64::NAN);
    let analytic = if p.g_mhz > 0.0 { 1e3 / (2.0 * p.g_mhz) } else { f64::INFINITY };
    let mode = match p.mode {
        RabiMode::Effective => "effective",
        RabiMode::Full => "full",
    };
    let kind = match p.kind {
        SidebandKind::Blue => "blue",
        SidebandKind::Red => "red",
    };
    summary.push(vec![
        mode.into(),
        kind.into(),
        p.g_mhz.into(),
        period.into(),
        analytic.into(),
        series.iter().cloned().fold(0.0, f64::max).into(),
    ]);
    tables.push(summary);
    if let Some(c) = &r.calibration {
        let mut t = Table::new("calibration", &["amplitude_phi0", "frequency_ghz", "strength_mhz", "perturbative_amplitude_phi0"]);
        t.push(vec![c.amplitude.into(), c.frequency_ghz.into(), c.strength_mhz.into(), c.perturbative_amplitude.into()]);
        tables.push(t);
    }
    Ok(tables)
}

fn loop_chain(p: &AbParams) -> Result<ChainConfig, CliError> {
    let g = p.strengths.clone().unwrap_or(vec![[p.g_mhz, p.g_mhz]; 2]);
    let ph = &p.phases;
    Ok(ChainConfig {
        n_qubits: 3,
        couplings: vec![
            EffectiveCoupling::new(0, g[0][0], ph.phi_b12, g[0][1], ph.phi_r12)?,
            EffectiveCoupling::new(1, g[1][0], ph.phi_b23, g[1][1], ph.phi_r23)?,
        ],
        detuning_blue_mhz: 0.0,
    })
}

fn ab_interference(p: &AbParams, exec: &RayonExecutor) -> Result<Vec<Table>, CliError> {
    let chain = loop_chain(p)?;
    let (targets, grid) = match &p.sweep {
        Some(sw) => {
            let targets = sw
                .targets
                .iter()
                .map(|t| Ok(PhaseTarget { parameter: t.parameter.parse()?, scale: t.scale, offset: t.offset }))
                .collect::<Result<Vec<_>, floquet_core::Error>>()?;
            (targets, sw.grid.values())
        }
        None => (Vec::new(), vec![0.0]),
    };
    let initial = match p.initial {
        InitialLoopState::Ground => QuantumState::from_label(&HilbertSpace::qubits(3), "000")?,
        InitialLoopState::Entangled => entangled_target(),
    };
    let opts = AbOptions { sample_every_ns: p.sample_every_ns, allow_unequal: p.allow_unequal, ..AbOptions::default() };
    let map = run_ab_interference(&chain, &targets, &grid, p.duration_ns, &initial, &opts, exec)?;

    let mut header = vec!["phase".to_string(), "time_ns".to_string()];
    header.extend(map.labels.iter().map(|l| format!("p_{l}")));
    let mut long = Table::with_header("ab_map", header);
    let mut flux = Table::new("loop_flux", &["phase", "loop_flux_rad", "max_p_101", "population_overlap"]);
    let k101 = map.labels.iter().position(|l| l == "101").expect("three-qubit labels");
    for (i, &x) in map.grid.iter().enumerate() {
        for (s, &t) in map.times.iter().enumerate() {
            let mut row = vec![Cell::Float(x), Cell::Float(t)];
            row.extend(map.populations[i].iter().map(|p| Cell::Float(p[s])));
            long.push(row);
        }
        let mut cfg = chain.clone();
        for t in &targets {
            t.parameter.apply(&mut cfg.couplings, t.offset + t.scale * x)?;
        }
        let phi = chain_loop_fluxes(&cfg.couplings)?[0];
        let last = map.times.len() - 1;
        // Classical overlap of the final and initial population vectors.
        let init_pops = initial.populations();
        let overlap: f64 = (0..map.labels.len()).map(|k| (init_pops[k] * map.populations[i][k][last]).sqrt()).sum();
        let max101 = map.populations[i][k101].iter().cloned().fold(0.0, f64::max);
        flux.push(vec![x.into(), phi.into(), max101.into(), (overlap * overlap).into()]);
    }
    Ok(vec![long, flux])
}

fn density_table(name: &str, state: &QuantumState) -> Table {
    let labels = state.space().labels();
    let rho = state.density();
    let mut t = Table::new(name, &["row", "col", "re", "im"]);
    for (i, a) in labels.iter().enumerate() {
        for (j, b) in labels.iter().enumerate() {
            t.push(vec![a.as_str().into(), b.as_str().into(), rho[(i, j)].re.into(), rho[(i, j)].im.into()]);
        }
    }
    t
}

fn entangled_prep(p: &PrepParams, device: &DeviceSpec) -> Result<Vec<Table>, CliError> {
    let timing = GateTiming { x_ns: p.x_ns, hopping_mhz: p.hopping_mhz };
    let (r, mode) = match p.mode {
        PrepMode::Ideal => (prepare_entangled_state(None)?, "ideal"),
        PrepMode::Noisy => (prepare_entangled_state(Some((device, &timing)))?, "noisy"),
    };
    let mut f = Table::new("fidelity", &["mode", "fidelity", "intermediate_fidelity", "duration_ns"]);
    f.push(vec![mode.into(), r.fidelity.into(), r.intermediate_fidelity.into(), r.duration_ns.into()]);
    Ok(vec![f, density_table("density", &r.state), density_table("intermediate_density", &r.intermediate)])
}

fn chain_device(p: &CalibrateParams, seed: u64) -> Result<ChainDevice, CliError> {
    let bonds = p.n_qubits - 1;
    let dev = match &p.offsets {
        Offsets::Named(s) if s == "none" => ChainDevice::new(vec![(p.g_mhz, p.g_mhz); bonds], vec![(0.0, 0.0); bonds], None, seed)?,
        Offsets::Named(_) => ChainDevice::with_random_offsets(p.n_qubits, p.g_mhz, seed)?,
        Offsets::Explicit(v) => ChainDevice::new(vec![(p.g_mhz, p.g_mhz); bonds], v.iter().map(|o| (o[0], o[1])).collect(), None, seed)?,
    };
    Ok(dev.with_shots(p.shots)?)
}

fn calibrate(p: &CalibrateParams, seed: u64, exec: &RayonExecutor) -> Result<Vec<Table>, CliError> {
    let opts = CalibrationOptions {
        phase_points: p.phase_points,
        probe_time_ns: p.probe_time_ns,
        nominal_g_mhz: p.g_mhz,
        ..CalibrationOptions::default()
    };
    let start: Vec<EffectiveCoupling> = (0..p.n_qubits - 1).map(|k| EffectiveCoupling::xx(k, p.g_mhz)).collect();
    let runs = exec.map_indexed(p.injections, |k| -> Result<_, CliError> {
        let dev = chain_device(p, seed.wrapping_add(k as u64))?;
        let before = chain_loop_fluxes(&dev.realized(&start))?;
        let result = calibrate_loop_phases(&dev, &start, &opts)?;
        let realized = dev.realized(&result.commanded);
        Ok((before, result, chain_loop_fluxes(&realized)?, aligned_anisotropy(&realized)))
    });
    let mut corrections =
        Table::new("corrections", &["injection", "triple", "bond", "correction_rad", "contrast", "initial_flux_rad", "residual_flux_rad"]);
    let mut aniso = Table::new("anisotropy", &["injection", "bond", "xx_mhz", "yy_mhz", "xy_mhz", "yx_mhz"]);
    let mut phases = Table::new("commanded_phases", &["injection", "bond", "phi_blue_rad", "phi_red_rad"]);
    for (k, run) in runs.into_iter().enumerate() {
        let (before, result, after, a) = run?;
        for c in &result.corrections {
            corrections.push(vec![
                k.into(),
                c.triple.into(),
                c.bond.into(),
                c.correction.into(),
                c.contrast.into(),
                before[c.triple].into(),
                after[c.triple].into(),
            ]);
        }
        for (b, x) in a.iter().enumerate() {
            aniso.push(vec![k.into(), b.into(), x.xx.into(), x.yy.into(), x.xy.into(), x.yx.into()]);
        }
        for c in &result.commanded {
            phases.push(vec![k.into(), c.bond.into(), c.phi_blue.into(), c.phi_red.into()]);
        }
    }
    Ok(vec![corrections, aniso, phases])
}

fn dpt_sweep(p: &DptParams, device: &DeviceSpec, exec: &RayonExecutor) -> Result<Vec<Table>, CliError> {
    let grid = p.bz_over_j.values();
    let sizes = p.n.list();
    let mut tables = Vec::new();
    let mut first = Table::new("first_min", &["bz_over_j", "n", "first_min"]);
    let mut series = Table::new("loschmidt", &["bz_over_j", "n", "time_ns", "echo", "rate"]);
    for &n in &sizes {
        let opts = DptOptions {
            n,
            j_mhz: p.j_mhz,
            horizon_ns: p.horizon_ns,
            sample_every_ns: p.sample_every_ns,
            mode: p.mode,
            model: p.model,
            smoothing_window: p.smoothing_window,
            readout: p.readout,
            ..DptOptions::default()
        };
        let r = run_dpt_sweep(&grid, &opts, Some(device), exec)?;
        let name = if sizes.len() == 1 { "dpt".to_string() } else { format!("dpt_n{n}") };
        let mut t = Table::with_header(&name, ["bz_over_j", "czz", "first_min", "first_min_time_ns"].map(String::from).to_vec());
        for i in 0..grid.len() {
            t.push(vec![r.bz_over_j[i].into(), r.czz[i].into(), r.first_min[i].into(), r.first_min_time_ns[i].into()]);
            first.push(vec![r.bz_over_j[i].into(), n.into(), r.first_min[i].into()]);
            if p.write_series {
                for (s, &time) in r.times.iter().enumerate() {
                    series.push(vec![r.bz_over_j[i].into(), n.into(), time.into(), r.loschmidt[i][s].into(), r.rate[i][s].into()]);
                }
            }
        }
        tables.push(t);
    }
    tables.push(first);
    if p.write_series {
        tables.push(series);
    }
    Ok(tables)
}

fn product_state(n: usize, spec: &str) -> Result<QuantumState, CliError> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let locals: Vec<CVector> = spec
        .chars()
        .map(|c| match c {
            '0' => CVector::from_vec(vec![ONE, ZERO]),
            '1' => CVector::from_vec(vec![ZERO, ONE]),
            '+' => CVector::from_vec(vec![C64::new(h, 0.0), C64::new(h, 0.0)]),
            _ => CVector::from_vec(vec![C64::new(h, 0.0), C64::new(-h, 0.0)]),
        })
        .collect();
    Ok(QuantumState::product(&HilbertSpace::qubits(n), &locals)?)
}

fn custom_evolution(p: &CustomParams, device: &DeviceSpec) -> Result<Vec<Table>, CliError> {
    // Bonds left out of the config are undriven.
    let mut couplings: Vec<EffectiveCoupling> = (0..p.n_qubits - 1).map(|k| EffectiveCoupling::xx(k, 0.0)).collect();
    for c in &p.couplings {
        couplings[c.bond] = EffectiveCoupling::new(c.bond, c.g_blue, c.phi_blue, c.g_red, c.phi_red)?;
    }
    let chain = ChainConfig { n_qubits: p.n_qubits, couplings, detuning_blue_mhz: p.detuning_blue_mhz };
    let h = TimeDependentHamiltonian::constant(&effective_chain_hamiltonian(&chain)?);
    let init = product_state(p.n_qubits, &p.initial)?;
    let traj = if p.noise {
        if p.n_qubits > device.n_qubits() {
            return Err(CliError::Runtime(format!("device has {} qubits, chain needs {}", device.n_qubits(), p.n_qubits)));
        }
        let sites: Vec<Option<usize>> = (0..p.n_qubits).map(Some).collect();
        let collapse = CollapseModel::from_device(device, &sites, DephasingSource::Echo);
        evolve_lindblad(&h, &init.to_mixed(), &collapse, (0.0, p.duration_ns), p.dt_ns, p.sample_every_ns)?
    } else {
        evolve_schrodinger(&h, &init, (0.0, p.duration_ns), p.dt_ns, p.sample_every_ns)?
    };
    let labels = traj.space().labels();
    let pops = measure_populations(&traj, &labels)?;
    let mut header = vec!["time_ns".to_string()];
    for q in 0..p.n_qubits {
        header.extend(["x", "y", "z"].iter().map(|a| format!("{a}_q{q}")));
    }
    let mut bloch = Table::with_header("bloch", header);
    for (s, b) in bloch_series(&traj).iter().enumerate() {
        let mut row = vec![Cell::Float(traj.times[s])];
        row.extend(b.iter().flat_map(|v| v.iter().map(|&x| Cell::Float(x))));
        bloch.push(row);
    }
    Ok(vec![Table::populations("populations", &traj.times, &labels, &pops), bloch])
}
