//! Experiment protocols and observables: sideband Rabi, Aharonov-Bohm
//! interference, entangled-state preparation, loop-phase calibration and the
//! dynamical-phase-transition observables.

use std::cell::Cell;
use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::device::{amplitude_for_strength, DephasingSource, DeviceSpec, SidebandDrive, SidebandKind};
use crate::dynamics::{
    build_lab_hamiltonian, evolve_lindblad, evolve_schrodinger, measure_populations, propagator, sample_grid, CollapseModel,
    LabOptions, TimeDependentHamiltonian, Trajectory, TrajectoryMeta,
};
use crate::effective::{
    aligning_gauge, anisotropy_decompose, canonical_phase, effective_chain_hamiltonian, effective_pair_hamiltonian,
    gauge_transform, ising_hamiltonian, loop_flux, segment_hamiltonian, Anisotropy, ChainConfig, EffectiveCoupling,
};
use crate::error::{Error, Result};
use crate::qop::{
    fidelity, mhz_to_rad_ns, site_operator, CMatrix, CVector, HilbertSpace, Operator, QuantumState, SiteLabel, Spectrum, StateData,
    C64, I, ONE, ZERO,
};

/// Runs independent sweep points. Results are keyed by index, so any
/// execution order gives the same output.
pub trait SweepExecutor {
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs points one after another on the calling thread.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl SweepExecutor for Sequential {
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}

fn collect_results<T>(v: Vec<Result<T>>) -> Result<Vec<T>> {
    v.into_iter().collect()
}

// ---------------------------------------------------------------------------
// Gates

/// `|01⟩ → (|01⟩ + i|10⟩)/√2`, `|00⟩` and `|11⟩` fixed.
pub fn sqrt_iswap() -> CMatrix {
    let r = C64::new(FRAC_1_SQRT_2, 0.0);
    let ir = C64::new(0.0, FRAC_1_SQRT_2);
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(3, 3)] = ONE;
    m[(1, 1)] = r;
    m[(2, 2)] = r;
    m[(1, 2)] = ir;
    m[(2, 1)] = ir;
    m
}

pub fn x_gate() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

/// Embed a gate acting on consecutive qubits `first..first+k` of an
/// `n`-qubit register.
pub fn embed_gate(gate: &CMatrix, first: usize, n: usize) -> Result<CMatrix> {
    let k = gate.nrows().trailing_zeros() as usize;
    if gate.nrows() != 1 << k || gate.ncols() != gate.nrows() || first + k > n {
        return Err(Error::InvalidArgument(format!("gate of size {} does not fit at qubit {first} of {n}", gate.nrows())));
    }
    let left = CMatrix::identity(1 << first, 1 << first);
    let rest = n - first - k;
    let right = CMatrix::identity(1 << rest, 1 << rest);
    Ok(left.kronecker(gate).kronecker(&right))
}

// ---------------------------------------------------------------------------
// Sideband Rabi

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RabiMode {
    #[default]
    Effective,
    Full,
}

/// Drive parameters found by Floquet analysis of the pulse-level model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FloquetCalibration {
    pub amplitude: f64,
    pub frequency_ghz: f64,
    /// Strength reached at the calibrated point, MHz.
    pub strength_mhz: f64,
    /// Amplitude the perturbative formula predicts for the same strength.
    pub perturbative_amplitude: f64,
}

#[derive(Clone, Debug)]
pub struct SidebandRabiResult {
    pub trajectory: Trajectory,
    /// Two-qubit labels `00, 01, 10, 11`.
    pub labels: Vec<String>,
    /// `[label][sample]`.
    pub populations: Vec<Vec<f64>>,
    pub drive: Option<SidebandDrive>,
    pub calibration: Option<FloquetCalibration>,
}

#[derive(Clone, Debug)]
pub struct RabiOptions {
    pub sample_every_ns: f64,
    /// Effective-mode step; the pulse-level step is always the stability limit.
    pub dt_ns: f64,
    pub ramp_ns: f64,
    /// Half-width of the frequency search around the bare sideband, MHz.
    pub search_mhz: f64,
}

impl Default for RabiOptions {
    fn default() -> Self {
        Self { sample_every_ns: 2.0, dt_ns: 1.0, ramp_ns: SidebandDrive::DEFAULT_RAMP_NS, search_mhz: 60.0 }
    }
}

fn rabi_pair(kind: SidebandKind) -> (&'static str, &'static str) {
    match kind {
        SidebandKind::Blue => ("00", "11"),
        SidebandKind::Red => ("10", "01"),
    }
}

pub fn run_sideband_rabi(
    device: &DeviceSpec,
    bond: usize,
    kind: SidebandKind,
    g_target_mhz: f64,
    duration_ns: f64,
    mode: RabiMode,
    opts: &RabiOptions,
) -> Result<SidebandRabiResult> {
    device.coupler(bond)?;
    if !(duration_ns > 0.0) {
        return Err(Error::InvalidTimeSpan(format!("duration {duration_ns} ns must be positive")));
    }
    if !(g_target_mhz >= 0.0) {
        return Err(Error::InvalidArgument(format!("strength {g_target_mhz} MHz must be non-negative")));
    }
    let labels: Vec<String> = HilbertSpace::qubits(2).labels();
    let (start, _) = rabi_pair(kind);
    match mode {
        RabiMode::Effective => {
            let c = match kind {
                SidebandKind::Blue => EffectiveCoupling::new(bond, g_target_mhz, 0.0, 0.0, 0.0)?,
                SidebandKind::Red => EffectiveCoupling::new(bond, 0.0, 0.0, g_target_mhz, 0.0)?,
            };
            let h = TimeDependentHamiltonian::constant(&effective_pair_hamiltonian(&c));
            let psi = QuantumState::from_label(&HilbertSpace::qubits(2), start)?;
            let trajectory = evolve_schrodinger(&h, &psi, (0.0, duration_ns), opts.dt_ns, opts.sample_every_ns)?;
            let populations = measure_populations(&trajectory, &labels)?;
            Ok(SidebandRabiResult { trajectory, labels, populations, drive: None, calibration: None })
        }
        RabiMode::Full => {
            let phi_dc = device.couplers[bond].idle_flux();
            let perturbative_amplitude = amplitude_for_strength(kind, g_target_mhz, device, bond, phi_dc)?;
            let cal = if g_target_mhz == 0.0 {
                FloquetCalibration {
                    amplitude: 0.0,
                    frequency_ghz: bare_sideband_ghz(device, bond, kind),
                    strength_mhz: 0.0,
                    perturbative_amplitude,
                }
            } else {
                calibrate_sideband(device, bond, kind, g_target_mhz, perturbative_amplitude, opts.search_mhz)?
            };
            let drive = SidebandDrive {
                coupler: bond,
                kind,
                amplitude: cal.amplitude,
                frequency_ghz: cal.frequency_ghz,
                phase_rad: 0.0,
                t_start_ns: 0.0,
                t_end_ns: duration_ns,
                ramp_ns: opts.ramp_ns,
            };
            let lab = build_lab_hamiltonian(device, std::slice::from_ref(&drive), bond, 2, &LabOptions::default())?;
            let psi = lab.basis_state(start)?;
            let dt = lab.hamiltonian.max_step_ns();
            let mut trajectory = evolve_schrodinger(&lab.hamiltonian, &psi, (0.0, duration_ns), dt, opts.sample_every_ns)?;
            trajectory.qubit_sites = lab.qubit_sites.clone();
            let populations = measure_populations(&trajectory, &labels)?;
            Ok(SidebandRabiResult { trajectory, labels, populations, drive: Some(drive), calibration: Some(cal) })
        }
    }
}

fn bare_sideband_ghz(device: &DeviceSpec, bond: usize, kind: SidebandKind) -> f64 {
    let w1 = device.qubits[bond].omega_idle_ghz;
    let w2 = device.qubits[bond + 1].omega_idle_ghz;
    match kind {
        SidebandKind::Blue => w1 + w2,
        SidebandKind::Red => (w1 - w2).abs(),
    }
}

/// Quasienergy splitting (rad/ns) of the two Floquet states that carry the
/// sideband pair, for a continuous drive of given amplitude and frequency.
pub fn floquet_splitting(device: &DeviceSpec, bond: usize, kind: SidebandKind, amplitude: f64, frequency_ghz: f64) -> Result<f64> {
    let period = 1.0 / frequency_ghz;
    let drive = SidebandDrive {
        coupler: bond,
        kind,
        amplitude,
        frequency_ghz,
        phase_rad: 0.0,
        t_start_ns: -1.0,
        t_end_ns: 2.0 * period + 1.0,
        ramp_ns: 0.0,
    };
    let lab = build_lab_hamiltonian(device, std::slice::from_ref(&drive), bond, 2, &LabOptions::default())?;
    let steps = ((period / lab.hamiltonian.max_step_ns()).ceil() as usize).max(64);
    let u = propagator(&lab.hamiltonian, 0.0, period, steps);
    let (q, t) = u.schur().unpack();
    let (a, b) = rabi_pair(kind);
    let space = lab.hamiltonian.space();
    let index = |label: &str| -> Result<usize> {
        let mut digits = vec![0; space.n_sites()];
        for (&s, c) in lab.qubit_sites.iter().zip(label.chars()) {
            digits[s] = c.to_digit(10).unwrap_or(0) as usize;
        }
        space.index_of(&digits)
    };
    let (ia, ib) = (index(a)?, index(b)?);
    let mut weights: Vec<(f64, f64)> = (0..q.ncols())
        .map(|k| {
            let w = q[(ia, k)].norm_sqr() + q[(ib, k)].norm_sqr();
            (w, -t[(k, k)].arg() / period)
        })
        .collect();
    weights.sort_by(|x, y| y.0.total_cmp(&x.0));
    let zone = TAU / period;
    let gap = (weights[0].1 - weights[1].1).rem_euclid(zone);
    Ok(gap.min(zone - gap))
}

fn golden_min(f: &mut dyn FnMut(f64) -> Result<f64>, mut lo: f64, mut hi: f64, tol: f64) -> Result<(f64, f64)> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 < f2 { (x1, f1) } else { (x2, f2) })
}

/// Resonant frequency (GHz) and strength (MHz) at one amplitude: the
/// splitting is smallest on resonance, where it equals twice the coupling.
fn resonant_strength(device: &DeviceSpec, bond: usize, kind: SidebandKind, amplitude: f64, lo: f64, hi: f64, step: f64) -> Result<(f64, f64)> {
    let mut best = (lo, f64::INFINITY);
    let n = ((hi - lo) / step).ceil() as usize;
    for i in 0..=n {
        let f = lo + i as f64 * (hi - lo) / n as f64;
        let s = floquet_splitting(device, bond, kind, amplitude, f)?;
        if s < best.1 {
            best = (f, s);
        }
    }
    let span = (hi - lo) / n as f64;
    let (f, gap) = golden_min(
        &mut |f| floquet_splitting(device, bond, kind, amplitude, f),
        best.0 - span,
        best.0 + span,
        1e-7,
    )?;
    Ok((f, gap / (2.0 * mhz_to_rad_ns(1.0))))
}

/// Drive amplitude and frequency giving `g_target_mhz` in the pulse-level
/// model: frequency by minimizing the Floquet splitting, amplitude by secant.
pub fn calibrate_sideband(
    device: &DeviceSpec,
    bond: usize,
    kind: SidebandKind,
    g_target_mhz: f64,
    perturbative_amplitude: f64,
    search_mhz: f64,
) -> Result<FloquetCalibration> {
    let f0 = bare_sideband_ghz(device, bond, kind);
    let w = search_mhz * 1e-3;
    let (mut a0, mut a1) = (0.5 * perturbative_amplitude, 0.4 * perturbative_amplitude);
    let (mut fr, mut g0) = resonant_strength(device, bond, kind, a0, f0 - w, f0 + w, 0.5e-3)?;
    let near = |f: f64| (f - 3e-3, f + 3e-3);
    let (lo, hi) = near(fr);
    let (mut fr1, mut g1) = resonant_strength(device, bond, kind, a1, lo, hi, 0.25e-3)?;
    for _ in 0..12 {
        if (g1 / g_target_mhz - 1.0).abs() < 1e-4 {
            break;
        }
        let slope = (g1 - g0) / (a1 - a0);
        if !slope.is_finite() || slope == 0.0 {
            break;
        }
        let a2 = (a1 + (g_target_mhz - g1) / slope).clamp(0.05 * a1, 2.0 * a1);
        if a2 >= crate::device::AMPLITUDE_GUARD {
            return Err(Error::AmplitudeGuard { amplitude: a2, guard: crate::device::AMPLITUDE_GUARD });
        }
        a0 = a1;
        g0 = g1;
        fr = fr1;
        a1 = a2;
        let (lo, hi) = near(fr);
        (fr1, g1) = resonant_strength(device, bond, kind, a1, lo, hi, 0.25e-3)?;
    }
    Ok(FloquetCalibration { amplitude: a1, frequency_ghz: fr1, strength_mhz: g1, perturbative_amplitude })
}

/// Oscillation period from mid-level crossings: twice the mean spacing of
/// successive crossings of `(max+min)/2`, with linear interpolation.
pub fn crossing_period(times: &[f64], series: &[f64]) -> Option<f64> {
    let max = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = series.iter().copied().fold(f64::INFINITY, f64::min);
    let mid = 0.5 * (max + min);
    let mut cross = Vec::new();
    for k in 1..series.len() {
        let (a, b) = (series[k - 1] - mid, series[k] - mid);
        if a == 0.0 && k == 1 {
            cross.push(times[0]);
        } else if (a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0) {
            cross.push(times[k - 1] + (times[k] - times[k - 1]) * a / (a - b));
        }
    }
    if cross.len() < 2 {
        return None;
    }
    Some(2.0 * (cross[cross.len() - 1] - cross[0]) / (cross.len() - 1) as f64)
}

// ---------------------------------------------------------------------------
// Aharonov-Bohm interference

/// A drive phase a sweep can set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseParameter {
    Blue(usize),
    Red(usize),
    /// The red phase of bond 0, which enters the first loop flux with unit weight.
    LoopFlux,
}

impl std::str::FromStr for PhaseParameter {
    type Err = Error;

    /// Accepts `phi_blue[k]`, `phi_red[k]`, `loop_flux`, and the qubit-pair
    /// names `phi_b12`, `phi_r23`, ...
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unknown phase parameter `{s}`"));
        if s == "loop_flux" {
            return Ok(Self::LoopFlux);
        }
        let indexed = |prefix: &str| -> Option<usize> { s.strip_prefix(prefix)?.strip_suffix(']')?.parse().ok() };
        if let Some(k) = indexed("phi_blue[") {
            return Ok(Self::Blue(k));
        }
        if let Some(k) = indexed("phi_red[") {
            return Ok(Self::Red(k));
        }
        let pair = |rest: &str| -> Option<usize> {
            let d: Vec<u32> = rest.chars().map(|c| c.to_digit(10)).collect::<Option<_>>()?;
            (d.len() == 2 && d[0] >= 1 && d[1] == d[0] + 1).then(|| d[0] as usize - 1)
        };
        if let Some(k) = s.strip_prefix("phi_b").and_then(pair) {
            return Ok(Self::Blue(k));
        }
        if let Some(k) = s.strip_prefix("phi_r").and_then(pair) {
            return Ok(Self::Red(k));
        }
        Err(bad())
    }
}

impl PhaseParameter {
    pub fn apply(&self, couplings: &mut [EffectiveCoupling], value: f64) -> Result<()> {
        let (bond, blue) = match *self {
            Self::Blue(k) => (k, true),
            Self::Red(k) => (k, false),
            Self::LoopFlux => (0, false),
        };
        let n = couplings.len();
        let c = couplings.get_mut(bond).ok_or(Error::BondOutOfRange { bond, n_bonds: n })?;
        if blue {
            c.phi_blue = canonical_phase(value);
        } else {
            c.phi_red = canonical_phase(value);
        }
        Ok(())
    }
}

/// Swept phases: each target is set to `offset + scale·x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseTarget {
    pub parameter: PhaseParameter,
    #[serde(default = "unit")]
    pub scale: f64,
    #[serde(default)]
    pub offset: f64,
}

fn unit() -> f64 {
    1.0
}

#[derive(Clone, Debug)]
pub struct AbOptions {
    pub sample_every_ns: f64,
    pub dt_ns: f64,
    /// Permit bonds of different strength.
    pub allow_unequal: bool,
}

impl Default for AbOptions {
    fn default() -> Self {
        Self { sample_every_ns: 5.0, dt_ns: 1.0, allow_unequal: false }
    }
}

/// Populations over a (phase, time) grid.
#[derive(Clone, Debug, PartialEq)]
pub struct AbMap {
    pub grid: Vec<f64>,
    pub times: Vec<f64>,
    pub labels: Vec<String>,
    /// `[grid point][label][sample]`.
    pub populations: Vec<Vec<Vec<f64>>>,
}

impl AbMap {
    pub fn series(&self, point: usize, label: &str) -> Option<&[f64]> {
        let k = self.labels.iter().position(|l| l == label)?;
        Some(&self.populations[point][k])
    }
}

/// The four states reachable from `|000⟩`: the synthetic loop.
pub const LOOP_STATES: [&str; 4] = ["000", "110", "101", "011"];

fn check_equal_strengths(chain: &ChainConfig) -> Result<()> {
    let g0 = chain.couplings.first().map(|c| c.g_blue).unwrap_or(0.0);
    let tol = 1e-9 * g0.abs().max(1.0);
    for c in &chain.couplings {
        if (c.g_blue - g0).abs() > tol || (c.g_red - g0).abs() > tol {
            return Err(Error::UnequalStrengths(format!(
                "bond {} has g_blue {} and g_red {}, expected {g0} everywhere",
                c.bond, c.g_blue, c.g_red
            )));
        }
    }
    Ok(())
}

pub fn run_ab_interference(
    chain: &ChainConfig,
    swept: &[PhaseTarget],
    grid: &[f64],
    duration_ns: f64,
    initial: &QuantumState,
    opts: &AbOptions,
    exec: &impl SweepExecutor,
) -> Result<AbMap> {
    chain.validate()?;
    if chain.n_qubits != 3 {
        return Err(Error::InvalidArgument(format!("AB interference uses a 3-qubit chain, got {}", chain.n_qubits)));
    }
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if !opts.allow_unequal {
        check_equal_strengths(chain)?;
    }
    let labels = HilbertSpace::qubits(3).labels();
    let runs = exec.map_indexed(grid.len(), |i| -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let mut cfg = chain.clone();
        for t in swept {
            t.parameter.apply(&mut cfg.couplings, t.offset + t.scale * grid[i])?;
        }
        let h = TimeDependentHamiltonian::constant(&effective_chain_hamiltonian(&cfg)?);
        let tr = evolve_schrodinger(&h, initial, (0.0, duration_ns), opts.dt_ns, opts.sample_every_ns)?;
        Ok((tr.times.clone(), measure_populations(&tr, &labels)?))
    });
    let runs = collect_results(runs)?;
    let times = runs[0].0.clone();
    Ok(AbMap { grid: grid.to_vec(), times, labels, populations: runs.into_iter().map(|r| r.1).collect() })
}

// ---------------------------------------------------------------------------
// Entangled-state preparation

/// `(|110⟩ + |011⟩)/√2`.
pub fn entangled_target() -> QuantumState {
    QuantumState::superposition(&HilbertSpace::qubits(3), &[(ONE, "110"), (ONE, "011")]).expect("valid labels")
}

/// Gate durations for the noisy circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateTiming {
    pub x_ns: f64,
    /// Hopping strength realizing √iSWAP, MHz; the gate takes `1/(8g)`.
    pub hopping_mhz: f64,
}

impl Default for GateTiming {
    fn default() -> Self {
        Self { x_ns: 30.0, hopping_mhz: 0.75 }
    }
}

impl GateTiming {
    pub fn sqrt_iswap_ns(&self) -> f64 {
        1e3 / (8.0 * self.hopping_mhz)
    }
}

#[derive(Clone, Debug)]
pub struct PrepResult {
    pub state: QuantumState,
    /// State of Q1Q2 after the first two-qubit gate, Q3 traced out.
    pub intermediate: QuantumState,
    pub fidelity: f64,
    pub intermediate_fidelity: f64,
    pub duration_ns: f64,
}

/// `(|01⟩ + i|10⟩)/√2` on two qubits.
pub fn bell_target() -> QuantumState {
    QuantumState::superposition(&HilbertSpace::qubits(2), &[(ONE, "01"), (I, "10")]).expect("valid labels")
}

/// One circuit step: a gate on consecutive qubits starting at `first`.
enum Step {
    X(usize),
    SqrtIswap(usize),
}

const PREP_CIRCUIT: [Step; 5] = [Step::X(1), Step::SqrtIswap(0), Step::SqrtIswap(1), Step::SqrtIswap(1), Step::X(1)];

/// X(Q2), √iSWAP(Q1Q2), iSWAP(Q2Q3) as two √iSWAP slots, X(Q2). The ideal
/// output is `i(|110⟩ + |011⟩)/√2`, equal to the target up to a global phase,
/// so no virtual-Z correction is needed.
pub fn prepare_entangled_state(noise: Option<(&DeviceSpec, &GateTiming)>) -> Result<PrepResult> {
    let space = HilbertSpace::qubits(3);
    let mut state = QuantumState::from_label(&space, "000")?;
    let mut intermediate = None;
    let mut elapsed = 0.0;
    for (k, step) in PREP_CIRCUIT.iter().enumerate() {
        state = match noise {
            None => {
                let u = match step {
                    Step::X(q) => embed_gate(&x_gate(), *q, 3)?,
                    Step::SqrtIswap(q) => embed_gate(&sqrt_iswap(), *q, 3)?,
                };
                apply_unitary(&state, &u)
            }
            Some((device, timing)) => {
                let (h, tau) = gate_hamiltonian(step, &space, timing)?;
                let collapse = CollapseModel::from_device(device, &[Some(0), Some(1), Some(2)], DephasingSource::Echo);
                let h = TimeDependentHamiltonian::constant(&h);
                let dt = h.max_step_ns().min(1.0);
                let tr = evolve_lindblad(&h, &state.to_mixed(), &collapse, (0.0, tau), dt, tau)?;
                elapsed += tau;
                tr.final_state().clone()
            }
        };
        if k == 1 {
            intermediate = Some(trace_out_last(&state)?);
        }
    }
    let intermediate = intermediate.expect("circuit has a second step");
    Ok(PrepResult {
        fidelity: fidelity(&state, &entangled_target())?,
        intermediate_fidelity: fidelity(&intermediate, &bell_target())?,
        state,
        intermediate,
        duration_ns: elapsed,
    })
}

fn apply_unitary(state: &QuantumState, u: &CMatrix) -> QuantumState {
    let data = match state.data() {
        StateData::Pure(v) => StateData::Pure(u * v),
        StateData::Mixed(r) => StateData::Mixed(u * r * u.adjoint()),
    };
    QuantumState::from_parts_unchecked(state.space().clone(), data)
}

/// Hamiltonian and duration realizing one gate (up to a global phase).
fn gate_hamiltonian(step: &Step, space: &HilbertSpace, timing: &GateTiming) -> Result<(Operator, f64)> {
    match *step {
        Step::X(q) => {
            let tau = timing.x_ns;
            Ok((site_operator(SiteLabel::X, q, space)?.scale(C64::new(PI / (2.0 * tau), 0.0)), tau))
        }
        Step::SqrtIswap(q) => {
            let tau = timing.sqrt_iswap_ns();
            let up = site_operator(SiteLabel::Sp, q, space)?;
            let down = site_operator(SiteLabel::Sm, q + 1, space)?;
            let hop = &up * &down;
            let h = (&hop + &hop.dagger()).scale(C64::new(-mhz_to_rad_ns(timing.hopping_mhz), 0.0));
            Ok((h, tau))
        }
    }
}

/// Reduced state of all but the last qubit.
fn trace_out_last(state: &QuantumState) -> Result<QuantumState> {
    let rho = state.density();
    let d = rho.nrows() / 2;
    let mut out = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            out[(i, j)] = rho[(2 * i, 2 * j)] + rho[(2 * i + 1, 2 * j + 1)];
        }
    }
    let n = state.space().n_sites() - 1;
    QuantumState::mixed(&HilbertSpace::qubits(n), out)
}

// ---------------------------------------------------------------------------
// Loop-phase calibration

/// Simulated chain with drive-phase offsets hidden from the caller. It only
/// answers population measurements.
#[derive(Debug)]
pub struct ChainDevice {
    n_qubits: usize,
    strengths: Vec<(f64, f64)>,
    offsets: Vec<(f64, f64)>,
    shots: Option<usize>,
    seed: u64,
    calls: Cell<u64>,
}

impl ChainDevice {
    /// Equal strength `g` on every bond and offsets uniform in `(−π, π]`.
    pub fn with_random_offsets(n_qubits: usize, g_mhz: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let offsets = (0..n_qubits.saturating_sub(1))
            .map(|_| (canonical_phase(rng.random_range(-PI..PI)), canonical_phase(rng.random_range(-PI..PI))))
            .collect();
        Self::new(vec![(g_mhz, g_mhz); n_qubits.saturating_sub(1)], offsets, None, seed)
    }

    pub fn new(strengths: Vec<(f64, f64)>, offsets: Vec<(f64, f64)>, shots: Option<usize>, seed: u64) -> Result<Self> {
        if strengths.len() != offsets.len() || strengths.is_empty() {
            return Err(Error::InvalidArgument("one strength pair and one offset pair per bond".into()));
        }
        if shots == Some(0) {
            return Err(Error::InvalidArgument("shots must be positive".into()));
        }
        Ok(Self { n_qubits: strengths.len() + 1, strengths, offsets, shots, seed, calls: Cell::new(0) })
    }

    /// Sample `shots` projective measurements per call instead of returning
    /// exact populations.
    pub fn with_shots(mut self, shots: Option<usize>) -> Result<Self> {
        if shots == Some(0) {
            return Err(Error::InvalidArgument("shots must be positive".into()));
        }
        self.shots = shots;
        Ok(self)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Couplings actually realized for the commanded phases. Used to verify
    /// a calibration, never by the calibrator.
    pub fn realized(&self, commanded: &[EffectiveCoupling]) -> Vec<EffectiveCoupling> {
        commanded
            .iter()
            .map(|c| {
                let (gb, gr) = self.strengths[c.bond];
                let (ob, or) = self.offsets[c.bond];
                EffectiveCoupling {
                    bond: c.bond,
                    g_blue: gb,
                    phi_blue: canonical_phase(c.phi_blue + ob),
                    g_red: gr,
                    phi_red: canonical_phase(c.phi_red + or),
                }
            })
            .collect()
    }

    /// Populations of the eight states of qubits `triple..triple+3`, starting
    /// from `|000⟩` with only that triple's two bonds driven.
    pub fn measure_triple(&self, commanded: &[EffectiveCoupling], triple: usize, time_ns: f64) -> Result<Vec<f64>> {
        if triple + 2 >= self.n_qubits {
            return Err(Error::BondOutOfRange { bond: triple + 1, n_bonds: self.n_qubits - 1 });
        }
        if commanded.len() != self.n_qubits - 1 {
            return Err(Error::DimensionMismatch { expected: self.n_qubits - 1, got: commanded.len() });
        }
        let real = self.realized(&commanded[triple..triple + 2]);
        let h = segment_hamiltonian(triple, 3, &real)?;
        let spec = Spectrum::of(&h)?;
        let mut psi0 = CVector::zeros(8);
        psi0[0] = ONE;
        let psi = spec.evolve_coefficients(&spec.coefficients(&psi0), time_ns);
        let p: Vec<f64> = psi.iter().map(|z| z.norm_sqr()).collect();
        let call = self.calls.get();
        self.calls.set(call + 1);
        Ok(match self.shots {
            None => p,
            Some(shots) => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ call.wrapping_mul(0x9E37_79B9_7F4A_7C15));
                let mut counts = vec![0usize; p.len()];
                for _ in 0..shots {
                    let mut u: f64 = rng.random();
                    let k = p.iter().position(|&x| {
                        u -= x;
                        u < 0.0
                    });
                    counts[k.unwrap_or(p.len() - 1)] += 1;
                }
                counts.into_iter().map(|c| c as f64 / shots as f64).collect()
            }
        })
    }
}

#[derive(Clone, Debug)]
pub struct CalibrationOptions {
    pub phase_points: usize,
    /// Probe time; defaults to the first constructive-interference peak
    /// `π/(2g)` of the nominal strength.
    pub probe_time_ns: Option<f64>,
    /// Nominal strength used for the default probe time, MHz.
    pub nominal_g_mhz: f64,
    /// Largest allowed `min/max` of the swept pattern; a shallower dip means
    /// no caging and the fit is rejected.
    pub max_caging_ratio: f64,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self { phase_points: 24, probe_time_ns: None, nominal_g_mhz: 0.75, max_caging_ratio: 0.1 }
    }
}

impl CalibrationOptions {
    pub fn probe_time(&self) -> f64 {
        self.probe_time_ns.unwrap_or(PI / (2.0 * mhz_to_rad_ns(self.nominal_g_mhz)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleCorrection {
    pub triple: usize,
    pub bond: usize,
    /// Change applied to the bond's blue phase, rad.
    pub correction: f64,
    pub contrast: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub corrections: Vec<TripleCorrection>,
    pub commanded: Vec<EffectiveCoupling>,
}

/// Bond whose blue phase is adjusted for `triple`: the first bond for the
/// first triple, the second bond afterwards.
pub fn designated_bond(triple: usize) -> usize {
    if triple == 0 {
        0
    } else {
        triple + 1
    }
}

/// Measured pattern and the phase of its first Fourier component: the
/// commanded blue phase where the loop flux vanishes.
fn fit_peak(samples: &[(f64, f64)]) -> (f64, f64) {
    let c0: f64 = samples.iter().map(|s| s.1).sum::<f64>() / samples.len() as f64;
    let c1: C64 = samples.iter().map(|&(x, p)| C64::from_polar(p, x)).sum::<C64>() * (2.0 / samples.len() as f64);
    (c1.arg(), if c0 > 0.0 { c1.norm() / c0 } else { 0.0 })
}

pub fn calibrate_loop_phases(device: &ChainDevice, start: &[EffectiveCoupling], opts: &CalibrationOptions) -> Result<CalibrationResult> {
    let n = device.n_qubits();
    if start.len() != n - 1 {
        return Err(Error::DimensionMismatch { expected: n - 1, got: start.len() });
    }
    if opts.phase_points < 4 {
        return Err(Error::InvalidArgument(format!("{} phase points, need at least 4", opts.phase_points)));
    }
    let probe = opts.probe_time();
    let mut commanded = start.to_vec();
    let mut corrections = Vec::new();
    for triple in 0..n.saturating_sub(2) {
        let bond = designated_bond(triple);
        let before = commanded[bond].phi_blue;
        let mut samples = Vec::with_capacity(opts.phase_points);
        for j in 0..opts.phase_points {
            let x = TAU * j as f64 / opts.phase_points as f64;
            let mut trial = commanded.clone();
            trial[bond].phi_blue = canonical_phase(x);
            let p = device.measure_triple(&trial, triple, probe)?;
            samples.push((x, p[0b101]));
        }
        let (peak, contrast) = fit_peak(&samples);
        let max = samples.iter().map(|s| s.1).fold(0.0, f64::max);
        let min = samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
        if !(max > 0.0) || contrast < 0.05 {
            return Err(Error::FitFailure { triple, reason: format!("no interference pattern (contrast {contrast:.3})") });
        }
        if min / max > opts.max_caging_ratio {
            return Err(Error::FitFailure {
                triple,
                reason: format!("no caging minimum (min/max = {:.3}); bond strengths may differ", min / max),
            });
        }
        commanded[bond].phi_blue = canonical_phase(peak);
        corrections.push(TripleCorrection { triple, bond, correction: canonical_phase(peak - before), contrast });
    }
    Ok(CalibrationResult { corrections, commanded })
}

/// Loop flux of every consecutive triple.
pub fn chain_loop_fluxes(couplings: &[EffectiveCoupling]) -> Result<Vec<f64>> {
    couplings.windows(2).map(|w| loop_flux(&w[0], &w[1])).collect()
}

/// Anisotropy of every bond after the gauge that makes phases vanish where
/// possible.
pub fn aligned_anisotropy(couplings: &[EffectiveCoupling]) -> Vec<Anisotropy> {
    let theta = aligning_gauge(couplings);
    gauge_transform(couplings, &theta).iter().map(anisotropy_decompose).collect()
}

// ---------------------------------------------------------------------------
// DPT observables

/// `(1/T)∫₀ᵀ Σ_{i≠j}⟨σᵢᶻσⱼᶻ⟩/N² dt` by the trapezoid rule on the samples.
pub fn czz_correlation(traj: &Trajectory, horizon_ns: f64) -> Result<f64> {
    let end = *traj.times.last().ok_or(Error::SeriesTooShort(0))?;
    let t0 = traj.times[0];
    if horizon_ns > end - t0 + 1e-9 {
        return Err(Error::HorizonExceedsTrajectory { horizon: horizon_ns, end: end - t0 });
    }
    let n = traj.space().n_sites();
    if traj.space().site_dims().iter().any(|&d| d != 2) {
        return Err(Error::InvalidArgument("Czz needs a qubit-only trajectory".into()));
    }
    let weights = zz_weights(n);
    let values: Vec<f64> = traj.states.iter().map(|s| s.populations().iter().zip(&weights).map(|(p, w)| p * w).sum()).collect();
    if horizon_ns <= 0.0 {
        return Ok(values[0]);
    }
    Ok(trapezoid_until(&traj.times, &values, t0 + horizon_ns) / horizon_ns)
}

/// `Σ_{i≠j} zᵢzⱼ / N²` for every basis state.
fn zz_weights(n: usize) -> Vec<f64> {
    (0..1usize << n)
        .map(|b| {
            let m = n as f64 - 2.0 * b.count_ones() as f64;
            (m * m - n as f64) / (n * n) as f64
        })
        .collect()
}

fn trapezoid_until(t: &[f64], y: &[f64], end: f64) -> f64 {
    let mut acc = 0.0;
    for k in 1..t.len() {
        if t[k - 1] >= end {
            break;
        }
        if t[k] <= end {
            acc += 0.5 * (y[k] + y[k - 1]) * (t[k] - t[k - 1]);
        } else {
            let f = (end - t[k - 1]) / (t[k] - t[k - 1]);
            let ye = y[k - 1] + f * (y[k] - y[k - 1]);
            acc += 0.5 * (ye + y[k - 1]) * (end - t[k - 1]);
            break;
        }
    }
    acc
}

/// `|⟨ψ(0)|e^{−iHt}|ψ(0)⟩|²` from the eigendecomposition of `h`.
pub fn loschmidt_echo(h: &Operator, initial: &QuantumState, times: &[f64]) -> Result<Vec<f64>> {
    let psi = initial.vector().ok_or_else(|| Error::InvalidArgument("Loschmidt echo needs a pure initial state".into()))?;
    if psi.len() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), got: psi.len() });
    }
    let spec = Spectrum::of(h)?;
    let w: Vec<f64> = spec.coefficients(psi).iter().map(|c| c.norm_sqr()).collect();
    Ok(times
        .iter()
        .map(|&t| {
            let amp: C64 = w.iter().zip(&spec.values).map(|(&p, &e)| C64::from_polar(p, -e * t)).sum();
            amp.norm_sqr().min(1.0)
        })
        .collect())
}

pub const RATE_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct RateSeries {
    pub values: Vec<f64>,
    /// Samples where the echo fell to the floor and the rate saturated.
    pub clamped: Vec<bool>,
}

/// `−(1/N) log ℒ`, saturating at `ℒ = RATE_FLOOR`.
pub fn rate_function(l_series: &[f64], n: usize) -> RateSeries {
    let mut clamped = Vec::with_capacity(l_series.len());
    let values = l_series
        .iter()
        .map(|&l| {
            let low = !(l > RATE_FLOOR);
            clamped.push(low);
            -(if low { RATE_FLOOR } else { l }).ln() / n as f64
        })
        .collect();
    RateSeries { values, clamped }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FirstMinimum {
    pub index: usize,
    pub time: f64,
    pub value: f64,
    /// False when no interior minimum exists and the global minimum is returned.
    pub local: bool,
}

/// First interior sample no larger than its neighbors on the moving-average
/// smoothed series; the value reported is the raw sample.
pub fn first_minimum(times: &[f64], series: &[f64], window: usize) -> Result<FirstMinimum> {
    if series.len() < 3 {
        return Err(Error::SeriesTooShort(series.len()));
    }
    if times.len() != series.len() {
        return Err(Error::DimensionMismatch { expected: series.len(), got: times.len() });
    }
    let smooth = moving_average(series, window.max(1));
    for i in 1..series.len() - 1 {
        if smooth[i] <= smooth[i - 1] && smooth[i] <= smooth[i + 1] {
            return Ok(FirstMinimum { index: i, time: times[i], value: series[i], local: true });
        }
    }
    let (index, value) = series.iter().copied().enumerate().fold((0, f64::INFINITY), |b, (i, v)| if v < b.1 { (i, v) } else { b });
    Ok(FirstMinimum { index, time: times[index], value, local: false })
}

/// Centered moving average with edge padding.
fn moving_average(x: &[f64], window: usize) -> Vec<f64> {
    let h = (window / 2) as isize;
    let n = x.len() as isize;
    (0..n)
        .map(|i| {
            let s: f64 = (i - h..=i + h).map(|j| x[j.clamp(0, n - 1) as usize]).sum();
            s / (2 * h + 1) as f64
        })
        .collect()
}

/// Per-qubit assignment matrices `C[true][reported]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReadoutModel {
    pub confusion: Vec<[[f64; 2]; 2]>,
}

impl ReadoutModel {
    pub fn from_fidelities(f: &[(f64, f64)]) -> Result<Self> {
        for (q, &(f0, f1)) in f.iter().enumerate() {
            if !((0.0..=1.0).contains(&f0) && (0.0..=1.0).contains(&f1)) {
                return Err(Error::InvalidArgument(format!("qubit {q}: fidelities ({f0}, {f1}) outside [0, 1]")));
            }
        }
        Ok(Self { confusion: f.iter().map(|&(f0, f1)| [[f0, 1.0 - f0], [1.0 - f1, f1]]).collect() })
    }

    pub fn from_device(device: &DeviceSpec, qubits: std::ops::Range<usize>) -> Result<Self> {
        let q = device
            .qubits
            .get(qubits.clone())
            .ok_or_else(|| Error::InvalidArgument(format!("qubits {qubits:?} not on the device")))?;
        Self::from_fidelities(&q.iter().map(|q| (q.f0, q.f1)).collect::<Vec<_>>())
    }

    pub fn ideal(n: usize) -> Self {
        Self { confusion: vec![[[1.0, 0.0], [0.0, 1.0]]; n] }
    }
}

/// Reported populations for true populations `p` (site 0 most significant).
pub fn apply_readout_error(p: &[f64], model: &ReadoutModel) -> Result<Vec<f64>> {
    let n = model.confusion.len();
    if p.len() != 1 << n {
        return Err(Error::DimensionMismatch { expected: 1 << n, got: p.len() });
    }
    let mut out = p.to_vec();
    for (q, c) in model.confusion.iter().enumerate() {
        let stride = 1 << (n - 1 - q);
        for base in 0..out.len() {
            if base & stride != 0 {
                continue;
            }
            let (a, b) = (out[base], out[base | stride]);
            out[base] = a * c[0][0] + b * c[1][0];
            out[base | stride] = a * c[0][1] + b * c[1][1];
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DptMode {
    #[default]
    Ideal,
    Noisy,
}

/// Which Hamiltonian builder drives the sweep; both give the same spectrum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DptModel {
    #[default]
    Ising,
    /// Sideband chain with `g = J` and `Δᵇ = 4B_z`.
    EffectiveChain,
}

#[derive(Clone, Debug)]
pub struct DptOptions {
    pub n: usize,
    pub j_mhz: f64,
    pub horizon_ns: f64,
    pub sample_every_ns: f64,
    pub mode: DptMode,
    pub model: DptModel,
    pub smoothing_window: usize,
    /// Apply readout error in noisy mode.
    pub readout: bool,
    /// Lindblad step in noisy mode.
    pub dt_ns: f64,
}

impl Default for DptOptions {
    fn default() -> Self {
        Self {
            n: 6,
            j_mhz: 0.75,
            horizon_ns: 500.0,
            sample_every_ns: 2.0,
            mode: DptMode::Ideal,
            model: DptModel::Ising,
            smoothing_window: 3,
            readout: true,
            dt_ns: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DptResult {
    pub n: usize,
    pub bz_over_j: Vec<f64>,
    pub times: Vec<f64>,
    pub czz: Vec<f64>,
    /// `[grid point][sample]`.
    pub loschmidt: Vec<Vec<f64>>,
    pub rate: Vec<Vec<f64>>,
    pub first_min: Vec<f64>,
    pub first_min_time_ns: Vec<f64>,
    /// False where no interior minimum was found.
    pub first_min_local: Vec<bool>,
}

pub const MAX_DPT_QUBITS: usize = 6;

pub fn dpt_hamiltonian(opts: &DptOptions, bz_over_j: f64) -> Result<Operator> {
    let bz = bz_over_j * opts.j_mhz;
    match opts.model {
        DptModel::Ising => ising_hamiltonian(opts.n, opts.j_mhz, bz),
        DptModel::EffectiveChain => effective_chain_hamiltonian(&ChainConfig::uniform_xx(opts.n, opts.j_mhz, 4.0 * bz)),
    }
}

struct DptPoint {
    czz: f64,
    loschmidt: Vec<f64>,
    rate: Vec<f64>,
    first: FirstMinimum,
}

pub fn run_dpt_sweep(bz_grid: &[f64], opts: &DptOptions, device: Option<&DeviceSpec>, exec: &impl SweepExecutor) -> Result<DptResult> {
    if bz_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if !(2..=MAX_DPT_QUBITS).contains(&opts.n) {
        return Err(Error::InvalidArgument(format!("chain length {} outside 2..={MAX_DPT_QUBITS}", opts.n)));
    }
    if !(opts.horizon_ns > 0.0) {
        return Err(Error::InvalidTimeSpan(format!("horizon {} ns must be positive", opts.horizon_ns)));
    }
    let times = sample_grid(0.0, opts.horizon_ns, opts.sample_every_ns)?;
    let space = HilbertSpace::qubits(opts.n);
    let ground = QuantumState::from_label(&space, &"0".repeat(opts.n))?;
    let noisy = match opts.mode {
        DptMode::Ideal => None,
        DptMode::Noisy => {
            let device = device.ok_or_else(|| Error::InvalidArgument("noisy mode needs a device".into()))?;
            if device.n_qubits() < opts.n {
                return Err(Error::InvalidArgument(format!("device has {} qubits, chain needs {}", device.n_qubits(), opts.n)));
            }
            let sites: Vec<Option<usize>> = (0..opts.n).map(Some).collect();
            let collapse = CollapseModel::from_device(device, &sites, DephasingSource::Echo);
            let readout = if opts.readout { ReadoutModel::from_device(device, 0..opts.n)? } else { ReadoutModel::ideal(opts.n) };
            Some((collapse, readout))
        }
    };
    let weights = zz_weights(opts.n);
    let points = exec.map_indexed(bz_grid.len(), |i| -> Result<DptPoint> {
        let h = dpt_hamiltonian(opts, bz_grid[i])?;
        let (czz, loschmidt) = match &noisy {
            None => {
                let spec = Spectrum::of(&h)?;
                let c = spec.coefficients(ground.vector().expect("pure"));
                let states = times
                    .iter()
                    .map(|&t| QuantumState::from_parts_unchecked(space.clone(), StateData::Pure(spec.evolve_coefficients(&c, t))))
                    .collect();
                let traj = Trajectory { times: times.clone(), states, qubit_sites: (0..opts.n).collect(), meta: TrajectoryMeta::default() };
                (czz_correlation(&traj, opts.horizon_ns)?, loschmidt_echo(&h, &ground, &times)?)
            }
            Some((collapse, readout)) => {
                let hd = TimeDependentHamiltonian::constant(&h);
                let dt = opts.dt_ns.min(hd.max_step_ns());
                let tr = evolve_lindblad(&hd, &ground.to_mixed(), collapse, (0.0, opts.horizon_ns), dt, opts.sample_every_ns)?;
                let pops = tr.states.iter().map(|s| apply_readout_error(&s.populations(), readout)).collect::<Result<Vec<_>>>()?;
                let zz: Vec<f64> = pops.iter().map(|p| p.iter().zip(&weights).map(|(a, b)| a * b).sum()).collect();
                let czz = trapezoid_until(&tr.times, &zz, opts.horizon_ns) / opts.horizon_ns;
                (czz, pops.iter().map(|p| p[0]).collect())
            }
        };
        let rate = rate_function(&loschmidt, opts.n).values;
        let first = first_minimum(&times, &loschmidt, opts.smoothing_window)?;
        Ok(DptPoint { czz, loschmidt, rate, first })
    });
    let points = collect_results(points)?;
    Ok(DptResult {
        n: opts.n,
        bz_over_j: bz_grid.to_vec(),
        times,
        czz: points.iter().map(|p| p.czz).collect(),
        first_min: points.iter().map(|p| p.first.value).collect(),
        first_min_time_ns: points.iter().map(|p| p.first.time).collect(),
        first_min_local: points.iter().map(|p| p.first.local).collect(),
        loschmidt: points.iter().map(|p| p.loschmidt.clone()).collect(),
        rate: points.into_iter().map(|p| p.rate).collect(),
    })
}

/// Unitary check used by tests and callers: `‖U†U − 𝟙‖_max`.
pub fn unitarity_error(u: &CMatrix) -> f64 {
    let d = u.nrows();
    (u.adjoint() * u - CMatrix::identity(d, d)).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
