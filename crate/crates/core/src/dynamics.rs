//! Time evolution: pulse-level Hamiltonian assembly, a fourth-order
//! commutator-free Magnus integrator for pure states, and a split-step
//! Lindblad integrator for amplitude damping and pure dephasing.

use std::sync::Arc;

use crate::device::{coupler_frequency, DephasingSource, DeviceSpec, SidebandDrive};
use crate::error::{Error, Result};
use crate::qop::{
    expm, ghz_to_rad_ns, local_operator, lowering, mhz_to_rad_ns, number, unitary_exp, CMatrix, CVector, HilbertSpace,
    Operator, QuantumState, SiteLabel, Spectrum, StateData, C64,
};

pub type DriveFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `f(t)·O` contribution to a Hamiltonian.
#[derive(Clone)]
pub struct DriveTerm {
    pub operator: CMatrix,
    pub coefficient: DriveFn,
    /// Upper bound on `|f(t)|`.
    pub bound: f64,
    /// Carrier frequency of `f`, GHz.
    pub frequency_ghz: f64,
}

impl std::fmt::Debug for DriveTerm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DriveTerm").field("bound", &self.bound).field("frequency_ghz", &self.frequency_ghz).finish()
    }
}

#[derive(Clone, Debug)]
pub struct TimeDependentHamiltonian {
    space: HilbertSpace,
    static_part: CMatrix,
    drives: Vec<DriveTerm>,
}

impl TimeDependentHamiltonian {
    pub fn constant(h: &Operator) -> Self {
        Self { space: h.space().clone(), static_part: h.matrix().clone(), drives: Vec::new() }
    }

    pub fn with_drive(mut self, term: DriveTerm) -> Result<Self> {
        let d = self.space.dim();
        if term.operator.nrows() != d {
            return Err(Error::DimensionMismatch { expected: d, got: term.operator.nrows() });
        }
        self.drives.push(term);
        Ok(self)
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn static_part(&self) -> Operator {
        Operator::new(self.space.clone(), self.static_part.clone()).expect("dimension checked")
    }

    pub fn drives(&self) -> &[DriveTerm] {
        &self.drives
    }

    pub fn is_time_independent(&self) -> bool {
        self.drives.is_empty()
    }

    pub fn at(&self, t: f64) -> CMatrix {
        let mut m = self.static_part.clone();
        for d in &self.drives {
            let f = (d.coefficient)(t);
            if f != 0.0 {
                m += &d.operator * C64::new(f, 0.0);
            }
        }
        m
    }

    /// Fastest frequency in the problem, GHz: spectral spread of the static
    /// part plus the largest drive excursions, or the highest carrier.
    pub fn max_frequency_ghz(&self) -> f64 {
        let spread = |m: &CMatrix| {
            let e = crate::qop::hermitian_eigen(m).eigenvalues;
            e.max() - e.min()
        };
        let mut w = spread(&self.static_part);
        for d in &self.drives {
            w += d.bound * spread(&d.operator);
        }
        let carrier = self.drives.iter().map(|d| d.frequency_ghz).fold(0.0, f64::max);
        (w / std::f64::consts::TAU).max(carrier)
    }

    pub fn max_step_ns(&self) -> f64 {
        let f = self.max_frequency_ghz();
        if f > 0.0 {
            1.0 / (20.0 * f)
        } else {
            f64::INFINITY
        }
    }

    pub fn check_hermitian(&self, t: f64) -> f64 {
        let m = self.at(t);
        let n = m.norm();
        if n == 0.0 {
            0.0
        } else {
            (&m - m.adjoint()).norm() / n
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TrajectoryMeta {
    pub config_hash: Option<String>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<QuantumState>,
    /// Sites reported as qubits; all others are projected onto level 0.
    pub qubit_sites: Vec<usize>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn space(&self) -> &HilbertSpace {
        self.states[0].space()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &QuantumState {
        self.states.last().expect("non-empty trajectory")
    }

    /// Full-basis populations per sample.
    pub fn populations(&self) -> Vec<Vec<f64>> {
        self.states.iter().map(|s| s.populations()).collect()
    }

    fn auxiliary_ground_mask(&self) -> Vec<bool> {
        let space = self.space();
        (0..space.dim())
            .map(|i| {
                let d = space.digits(i);
                (0..space.n_sites()).all(|s| self.qubit_sites.contains(&s) || d[s] == 0)
            })
            .collect()
    }

    /// Probability outside the ground state of the non-qubit sites.
    pub fn auxiliary_excitation(&self) -> Vec<f64> {
        let mask = self.auxiliary_ground_mask();
        self.states
            .iter()
            .map(|s| 1.0 - s.populations().iter().zip(&mask).filter(|(_, &m)| m).map(|(p, _)| p).sum::<f64>())
            .collect()
    }

    /// All binary labels over the qubit sites.
    pub fn qubit_labels(&self) -> Vec<String> {
        let n = self.qubit_sites.len();
        HilbertSpace::qubits(n).labels()
    }
}

/// Populations of `labels` (one digit per qubit site) after projecting the
/// remaining sites onto level 0 and renormalizing. Indexed `[label][sample]`.
pub fn measure_populations(traj: &Trajectory, labels: &[String]) -> Result<Vec<Vec<f64>>> {
    let space = traj.space();
    let nq = traj.qubit_sites.len();
    let mut indices = Vec::with_capacity(labels.len());
    for label in labels {
        let digits: Vec<usize> = label.chars().filter_map(|c| c.to_digit(10).map(|d| d as usize)).collect();
        if digits.len() != nq || label.chars().count() != nq {
            return Err(Error::InvalidLabel(label.clone()));
        }
        let mut full = vec![0; space.n_sites()];
        for (&s, &d) in traj.qubit_sites.iter().zip(&digits) {
            full[s] = d;
        }
        indices.push(space.index_of(&full).map_err(|_| Error::InvalidLabel(label.clone()))?);
    }
    let mask = traj.auxiliary_ground_mask();
    let mut out = vec![Vec::with_capacity(traj.len()); labels.len()];
    for s in &traj.states {
        let p = s.populations();
        let norm: f64 = p.iter().zip(&mask).filter(|(_, &m)| m).map(|(x, _)| x).sum();
        let norm = if norm > 0.0 { norm } else { 1.0 };
        for (k, &i) in indices.iter().enumerate() {
            out[k].push(p[i] / norm);
        }
    }
    Ok(out)
}

/// Sample times `t0, t0+Δ, …` ending exactly at `t1`.
pub fn sample_grid(t0: f64, t1: f64, sample_every: f64) -> Result<Vec<f64>> {
    if !(t1 >= t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::InvalidTimeSpan(format!("[{t0}, {t1}]")));
    }
    if !(sample_every > 0.0) {
        return Err(Error::InvalidTimeSpan(format!("sample interval {sample_every}")));
    }
    let n = ((t1 - t0) / sample_every + 1e-9).floor() as usize;
    let mut times: Vec<f64> = (0..=n).map(|k| t0 + k as f64 * sample_every).collect();
    if (t1 - times[n]).abs() > 1e-9 * sample_every.max(1.0) {
        times.push(t1);
    } else {
        times[n] = t1;
    }
    Ok(times)
}

const C1: f64 = 0.5 - 0.288_675_134_594_812_9;
const C2: f64 = 0.5 + 0.288_675_134_594_812_9;
const A1: f64 = (3.0 - 2.0 * 1.732_050_807_568_877_2) / 12.0;
const A2: f64 = (3.0 + 2.0 * 1.732_050_807_568_877_2) / 12.0;

/// One fourth-order commutator-free Magnus step `U(t+dt, t)`.
pub fn magnus4_step(h: &TimeDependentHamiltonian, t: f64, dt: f64) -> CMatrix {
    if h.is_time_independent() {
        return unitary_exp(&h.static_part, dt);
    }
    let h1 = h.at(t + C1 * dt);
    let h2 = h.at(t + C2 * dt);
    let first = &h1 * C64::new(A2, 0.0) + &h2 * C64::new(A1, 0.0);
    let second = &h1 * C64::new(A1, 0.0) + &h2 * C64::new(A2, 0.0);
    unitary_exp(&second, dt) * unitary_exp(&first, dt)
}

fn check_step(h: &TimeDependentHamiltonian, dt: f64) -> Result<()> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt = {dt} must be positive")));
    }
    let max_dt = h.max_step_ns();
    if dt > max_dt * (1.0 + 1e-12) {
        return Err(Error::StepTooCoarse { dt, max_dt });
    }
    Ok(())
}

/// Number and length of equal steps covering `interval` with steps `<= dt`.
fn substeps(interval: f64, dt: f64) -> (usize, f64) {
    let n = ((interval / dt) - 1e-9).ceil().max(1.0) as usize;
    (n, interval / n as f64)
}

/// Propagator over `[t0, t1]` with `n` equal Magnus steps.
pub fn propagator(h: &TimeDependentHamiltonian, t0: f64, t1: f64, n: usize) -> CMatrix {
    let d = h.space().dim();
    let dt = (t1 - t0) / n as f64;
    let mut u = CMatrix::identity(d, d);
    for k in 0..n {
        u = magnus4_step(h, t0 + k as f64 * dt, dt) * u;
    }
    u
}

pub fn evolve_schrodinger(
    h: &TimeDependentHamiltonian,
    initial: &QuantumState,
    t_span: (f64, f64),
    dt: f64,
    sample_every: f64,
) -> Result<Trajectory> {
    let psi0 = initial
        .vector()
        .ok_or_else(|| Error::InvalidArgument("Schrödinger evolution needs a pure initial state".into()))?;
    if psi0.len() != h.space().dim() {
        return Err(Error::DimensionMismatch { expected: h.space().dim(), got: psi0.len() });
    }
    let dev = (psi0.norm() - 1.0).abs();
    if dev > crate::qop::NORM_TOL {
        return Err(Error::NotNormalized(dev));
    }
    check_step(h, dt)?;
    let times = sample_grid(t_span.0, t_span.1, sample_every)?;
    let space = h.space().clone();
    let spectrum = h.is_time_independent().then(|| {
        let e = crate::qop::hermitian_eigen(&h.static_part);
        Spectrum { values: e.eigenvalues.iter().copied().collect(), vectors: e.eigenvectors }
    });
    let mut cache: Option<(f64, CMatrix)> = None;
    let mut psi = psi0.clone();
    let mut states = Vec::with_capacity(times.len());
    states.push(QuantumState::from_parts_unchecked(space.clone(), StateData::Pure(psi.clone())));
    for w in times.windows(2) {
        let (n, step) = substeps(w[1] - w[0], dt);
        for k in 0..n {
            psi = match &spectrum {
                Some(s) => {
                    if cache.as_ref().is_none_or(|(len, _)| *len != step) {
                        cache = Some((step, s.propagator(step)));
                    }
                    &cache.as_ref().unwrap().1 * &psi
                }
                None => magnus4_step(h, w[0] + k as f64 * step, step) * &psi,
            };
        }
        states.push(QuantumState::from_parts_unchecked(space.clone(), StateData::Pure(psi.clone())));
    }
    Ok(Trajectory { times, states, qubit_sites: (0..space.n_sites()).collect(), meta: TrajectoryMeta::default() })
}

/// Decay rates of one site, 1/ns.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SiteRates {
    pub gamma1: f64,
    pub gamma_phi: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CollapseModel {
    pub sites: Vec<SiteRates>,
}

impl CollapseModel {
    pub fn none(n_sites: usize) -> Self {
        Self { sites: vec![SiteRates::default(); n_sites] }
    }

    /// Rates from the device table. `site_qubits[s]` names the device qubit at
    /// site `s`, or `None` for a site without tabulated coherence.
    pub fn from_device(device: &DeviceSpec, site_qubits: &[Option<usize>], source: DephasingSource) -> Self {
        let sites = site_qubits
            .iter()
            .map(|q| match q {
                None => SiteRates::default(),
                Some(i) => {
                    let q = &device.qubits[*i];
                    SiteRates {
                        gamma1: 1.0 / (q.t1_us * 1e3),
                        gamma_phi: q.tphi_us(source).map(|t| 1.0 / (t * 1e3)).unwrap_or(0.0),
                    }
                }
            })
            .collect();
        Self { sites }
    }

    pub fn validate(&self, n_sites: usize) -> Result<()> {
        if self.sites.len() != n_sites {
            return Err(Error::DimensionMismatch { expected: n_sites, got: self.sites.len() });
        }
        for (s, r) in self.sites.iter().enumerate() {
            if !(r.gamma1 >= 0.0) || !(r.gamma_phi >= 0.0) {
                return Err(Error::NegativeRate(format!("site {s}: {r:?}")));
            }
        }
        Ok(())
    }

    pub fn is_closed(&self) -> bool {
        self.sites.iter().all(|r| r.gamma1 == 0.0 && r.gamma_phi == 0.0)
    }
}

/// Row-major vectorized single-site Lindblad generator for
/// `L₁ = √γ₁ a` and `L_φ = √(2γ_φ) n`.
fn site_generator(dim: usize, r: SiteRates) -> CMatrix {
    let id = CMatrix::identity(dim, dim);
    let mut gen = CMatrix::zeros(dim * dim, dim * dim);
    let ops = [lowering(dim) * C64::new(r.gamma1.sqrt(), 0.0), number(dim) * C64::new((2.0 * r.gamma_phi).sqrt(), 0.0)];
    for l in ops.iter() {
        let ldl = l.adjoint() * l;
        gen += l.kronecker(&l.conjugate());
        gen -= ldl.kronecker(&id) * C64::new(0.5, 0.0);
        gen -= id.kronecker(&ldl.transpose()) * C64::new(0.5, 0.0);
    }
    gen
}

/// Exact per-site dissipative channels for one duration.
struct Dissipator {
    channels: Vec<Option<CMatrix>>,
}

impl Dissipator {
    fn new(space: &HilbertSpace, model: &CollapseModel, tau: f64) -> Self {
        let channels = space
            .site_dims()
            .iter()
            .zip(&model.sites)
            .map(|(&d, &r)| {
                (r.gamma1 > 0.0 || r.gamma_phi > 0.0).then(|| expm(&(site_generator(d, r) * C64::new(tau, 0.0))))
            })
            .collect();
        Self { channels }
    }

    fn apply(&self, space: &HilbertSpace, rho: &mut CMatrix) {
        let dim = space.dim();
        for (site, ch) in self.channels.iter().enumerate() {
            let Some(ch) = ch else { continue };
            let d = space.site_dims()[site];
            let stride = space.stride(site);
            let mut block = CVector::zeros(d * d);
            for a in 0..dim {
                if !(a / stride).is_multiple_of(d) {
                    continue;
                }
                for b in 0..dim {
                    if !(b / stride).is_multiple_of(d) {
                        continue;
                    }
                    for i in 0..d {
                        for j in 0..d {
                            block[i * d + j] = rho[(a + i * stride, b + j * stride)];
                        }
                    }
                    let out = ch * &block;
                    for i in 0..d {
                        for j in 0..d {
                            rho[(a + i * stride, b + j * stride)] = out[i * d + j];
                        }
                    }
                }
            }
        }
    }
}

/// Strang-split Lindblad evolution: half dissipative step, unitary Magnus
/// step, half dissipative step. Each piece is completely positive and trace
/// preserving.
pub fn evolve_lindblad(
    h: &TimeDependentHamiltonian,
    initial: &QuantumState,
    collapse: &CollapseModel,
    t_span: (f64, f64),
    dt: f64,
    sample_every: f64,
) -> Result<Trajectory> {
    let space = h.space().clone();
    if initial.space().dim() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: initial.space().dim() });
    }
    collapse.validate(space.n_sites())?;
    check_step(h, dt)?;
    let times = sample_grid(t_span.0, t_span.1, sample_every)?;
    let mut rho = initial.density();
    let mut states = Vec::with_capacity(times.len());
    let mut diss_cache: Option<(f64, Dissipator)> = None;
    let mut unit_cache: Option<(f64, CMatrix)> = None;
    let record = |rho: &CMatrix| {
        let herm = (rho + rho.adjoint()) * C64::new(0.5, 0.0);
        QuantumState::from_parts_unchecked(space.clone(), StateData::Mixed(herm))
    };
    states.push(record(&rho));
    for w in times.windows(2) {
        let (n, step) = substeps(w[1] - w[0], dt);
        if diss_cache.as_ref().is_none_or(|(len, _)| *len != step) {
            diss_cache = Some((step, Dissipator::new(&space, collapse, 0.5 * step)));
        }
        let diss = &diss_cache.as_ref().unwrap().1;
        for k in 0..n {
            let t = w[0] + k as f64 * step;
            let u = if h.is_time_independent() {
                if unit_cache.as_ref().is_none_or(|(len, _)| *len != step) {
                    unit_cache = Some((step, magnus4_step(h, t, step)));
                }
                unit_cache.as_ref().unwrap().1.clone()
            } else {
                magnus4_step(h, t, step)
            };
            diss.apply(&space, &mut rho);
            rho = &u * &rho * u.adjoint();
            diss.apply(&space, &mut rho);
        }
        states.push(record(&rho));
    }
    Ok(Trajectory { times, states, qubit_sites: (0..space.n_sites()).collect(), meta: TrajectoryMeta::default() })
}

/// Sites of a pulse-level model: qubits interleaved with the couplers
/// between them.
#[derive(Clone, Debug)]
pub struct LabModel {
    pub hamiltonian: TimeDependentHamiltonian,
    pub first_qubit: usize,
    pub n_qubits: usize,
    pub qubit_sites: Vec<usize>,
    pub coupler_sites: Vec<usize>,
    /// DC flux of each included coupler, Φ₀.
    pub phi_dc: Vec<f64>,
}

impl LabModel {
    /// Qubits in `label`, couplers in their ground state.
    pub fn basis_state(&self, label: &str) -> Result<QuantumState> {
        let space = self.hamiltonian.space();
        if label.chars().count() != self.n_qubits {
            return Err(Error::InvalidLabel(label.to_string()));
        }
        let mut digits = vec![0; space.n_sites()];
        for (&s, c) in self.qubit_sites.iter().zip(label.chars()) {
            digits[s] = c.to_digit(10).ok_or_else(|| Error::InvalidLabel(label.to_string()))? as usize;
        }
        QuantumState::basis(space, space.index_of(&digits).map_err(|_| Error::InvalidLabel(label.to_string()))?)
    }

    /// Device qubit behind each site, `None` for couplers.
    pub fn site_qubits(&self) -> Vec<Option<usize>> {
        let mut v = vec![None; self.hamiltonian.space().n_sites()];
        for (k, &s) in self.qubit_sites.iter().enumerate() {
            v[s] = Some(self.first_qubit + k);
        }
        v
    }
}

#[derive(Clone, Debug)]
pub struct LabOptions {
    /// Levels kept per transmon (qubits and couplers), 2 or 3.
    pub levels: usize,
    /// Keep the direct qubit-qubit exchange term.
    pub include_direct: bool,
    /// DC flux per included coupler; defaults to the idle bias.
    pub phi_dc: Option<Vec<f64>>,
}

impl Default for LabOptions {
    fn default() -> Self {
        Self { levels: 2, include_direct: false, phi_dc: None }
    }
}

pub const MAX_LAB_QUBITS: usize = 3;

/// Lab-frame Hamiltonian of qubits `first_qubit .. first_qubit+n_qubits` and
/// their couplers, with each drive modulating its coupler frequency through
/// the full flux-to-frequency relation.
pub fn build_lab_hamiltonian(
    device: &DeviceSpec,
    drives: &[SidebandDrive],
    first_qubit: usize,
    n_qubits: usize,
    opts: &LabOptions,
) -> Result<LabModel> {
    if n_qubits == 0 || n_qubits > MAX_LAB_QUBITS {
        return Err(Error::DimensionCap(n_qubits));
    }
    if first_qubit + n_qubits > device.n_qubits() {
        return Err(Error::InvalidArgument(format!(
            "qubits {first_qubit}..{} exceed the device size {}",
            first_qubit + n_qubits,
            device.n_qubits()
        )));
    }
    if !(2..=3).contains(&opts.levels) {
        return Err(Error::InvalidArgument(format!("levels = {} must be 2 or 3", opts.levels)));
    }
    let n_couplers = n_qubits - 1;
    let bonds: Vec<usize> = (first_qubit..first_qubit + n_couplers).collect();
    for d in drives {
        d.validate()?;
        if !bonds.contains(&d.coupler) {
            return Err(Error::ExcludedCoupler(d.coupler));
        }
    }
    let phi_dc = match &opts.phi_dc {
        Some(v) if v.len() == n_couplers => v.clone(),
        Some(v) => return Err(Error::DimensionMismatch { expected: n_couplers, got: v.len() }),
        None => bonds.iter().map(|&b| device.couplers[b].idle_flux()).collect(),
    };
    let n_sites = 2 * n_qubits - 1;
    let space = HilbertSpace::new(vec![opts.levels; n_sites])?;
    let qubit_sites: Vec<usize> = (0..n_qubits).map(|k| 2 * k).collect();
    let coupler_sites: Vec<usize> = (0..n_couplers).map(|k| 2 * k + 1).collect();
    let lv = opts.levels;
    let n_op = number(lv);
    let duffing = {
        let n = number(lv);
        let id = CMatrix::identity(lv, lv);
        &n * (&n - id)
    };
    let a = lowering(lv);
    let x_op = &a + a.adjoint();
    let embed = |m: &CMatrix, s: usize| Operator::embed(m, s, &space).map(Operator::into_matrix);

    let d = space.dim();
    let mut h0 = CMatrix::zeros(d, d);
    for (k, &s) in qubit_sites.iter().enumerate() {
        let q = &device.qubits[first_qubit + k];
        h0 += embed(&n_op, s)? * C64::new(ghz_to_rad_ns(q.omega_idle_ghz), 0.0);
        if lv > 2 {
            h0 += embed(&duffing, s)? * C64::new(0.5 * mhz_to_rad_ns(q.ec_mhz), 0.0);
        }
    }
    for (k, &s) in coupler_sites.iter().enumerate() {
        let c = &device.couplers[bonds[k]];
        let wc = coupler_frequency(phi_dc[k], c.omega_max_ghz);
        h0 += embed(&n_op, s)? * C64::new(ghz_to_rad_ns(wc), 0.0);
        if lv > 2 {
            h0 += embed(&duffing, s)? * C64::new(0.5 * mhz_to_rad_ns(c.anharmonicity_mhz()), 0.0);
        }
        let xc = embed(&x_op, s)?;
        let xl = embed(&x_op, s - 1)?;
        let xr = embed(&x_op, s + 1)?;
        h0 += &xl * &xc * C64::new(mhz_to_rad_ns(c.g_left_mhz), 0.0);
        h0 += &xr * &xc * C64::new(mhz_to_rad_ns(c.g_right_mhz), 0.0);
        if opts.include_direct {
            h0 += &xl * &xr * C64::new(mhz_to_rad_ns(c.j_direct_mhz), 0.0);
        }
    }
    let static_op = Operator::new(space.clone(), h0)?;
    let mut h = TimeDependentHamiltonian::constant(&static_op);
    for (k, &s) in coupler_sites.iter().enumerate() {
        let on: Vec<SidebandDrive> = drives.iter().filter(|d| d.coupler == bonds[k]).cloned().collect();
        if on.is_empty() || on.iter().all(|d| d.amplitude == 0.0) {
            continue;
        }
        let w_max = device.couplers[bonds[k]].omega_max_ghz;
        let dc = phi_dc[k];
        let w0 = coupler_frequency(dc, w_max);
        let reach: f64 = on.iter().map(|d| d.amplitude).sum();
        let bound = (0..=400)
            .map(|i| coupler_frequency(dc - reach + 2.0 * reach * i as f64 / 400.0, w_max) - w0)
            .fold(0.0f64, |m, x| m.max(x.abs()))
            * 1.05;
        let carrier = on.iter().map(|d| d.frequency_ghz).fold(0.0, f64::max);
        let f: DriveFn = Arc::new(move |t| {
            let flux: f64 = on.iter().map(|d| d.flux(t)).sum();
            if flux == 0.0 {
                0.0
            } else {
                coupler_frequency(dc + flux, w_max) - w0
            }
        });
        let op = embed(&n_op, s)? * C64::new(std::f64::consts::TAU, 0.0);
        h = h.with_drive(DriveTerm { operator: op, coefficient: f, bound, frequency_ghz: carrier })?;
    }
    Ok(LabModel { hamiltonian: h, first_qubit, n_qubits, qubit_sites, coupler_sites, phi_dc })
}

/// Single-site Pauli matrix embedded on a qubit-only space; convenience for
/// observables.
pub fn pauli_on(label: SiteLabel, site: usize, n: usize) -> CMatrix {
    let space = HilbertSpace::qubits(n);
    let local = local_operator(label, 2).expect("qubit label");
    Operator::embed(&local, site, &space).expect("site in range").into_matrix()
}

/// `⟨O⟩` per sample.
pub fn expectation_series(traj: &Trajectory, op: &CMatrix) -> Vec<f64> {
    traj.states
        .iter()
        .map(|s| match s.data() {
            StateData::Pure(v) => v.dotc(&(op * v)).re,
            StateData::Mixed(r) => (r * op).trace().re,
        })
        .collect()
}

/// Bloch vector components `(⟨X⟩, ⟨Y⟩, ⟨Z⟩)` of every qubit at every sample.
pub fn bloch_series(traj: &Trajectory) -> Vec<Vec<[f64; 3]>> {
    let n = traj.space().n_sites();
    let ops: Vec<[CMatrix; 3]> =
        (0..n).map(|s| [pauli_on(SiteLabel::X, s, n), pauli_on(SiteLabel::Y, s, n), pauli_on(SiteLabel::Z, s, n)]).collect();
    traj.states
        .iter()
        .map(|st| {
            ops.iter()
                .map(|o| {
                    let e = |m: &CMatrix| match st.data() {
                        StateData::Pure(v) => v.dotc(&(m * v)).re,
                        StateData::Mixed(r) => (r * m).trace().re,
                    };
                    [e(&o[0]), e(&o[1]), e(&o[2])]
                })
                .collect()
        })
        .collect()
}

/// Population of `|1⟩` on one site summed over the rest, per sample.
pub fn excited_population(traj: &Trajectory, site: usize) -> Vec<f64> {
    let space = traj.space();
    let stride = space.stride(site);
    let d = space.site_dims()[site];
    traj.states
        .iter()
        .map(|s| s.populations().iter().enumerate().filter(|(i, _)| (i / stride) % d == 1).map(|(_, p)| p).sum())
        .collect()
}
