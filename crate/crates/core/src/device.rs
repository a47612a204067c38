//! Static chain description and the analytic flux-to-coupling maps.
//!
//! Frequencies are GHz, anharmonicities and couplings MHz, times µs in the
//! device file. Nothing here converts to angular units.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum sideband flux amplitude accepted, in units of Φ₀.
pub const AMPLITUDE_GUARD: f64 = 0.25;

const BUNDLED_TABLE: &str = include_str!("../data/table_s1.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitSpec {
    pub omega_min_ghz: f64,
    pub omega_max_ghz: f64,
    pub omega_idle_ghz: f64,
    pub ec_mhz: f64,
    pub t1_us: f64,
    pub t2r_us: f64,
    pub t2e_us: f64,
    pub f0: f64,
    pub f1: f64,
}

fn default_g() -> f64 {
    100.0
}

fn default_j() -> f64 {
    6.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplerSpec {
    pub omega_max_ghz: f64,
    pub omega_idle_ghz: f64,
    #[serde(default = "default_g")]
    pub g_left_mhz: f64,
    #[serde(default = "default_g")]
    pub g_right_mhz: f64,
    #[serde(default = "default_j")]
    pub j_direct_mhz: f64,
    /// Anharmonicity used when the coupler is modeled with three levels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ec_mhz: Option<f64>,
}

impl CouplerSpec {
    pub const DEFAULT_EC_MHZ: f64 = -240.0;

    pub fn anharmonicity_mhz(&self) -> f64 {
        self.ec_mhz.unwrap_or(Self::DEFAULT_EC_MHZ)
    }

    /// Flux bias giving the idle frequency, on the positive branch `[0, 1/2)`.
    pub fn idle_flux(&self) -> f64 {
        flux_for_frequency(self.omega_idle_ghz, self.omega_max_ghz)
    }
}

/// Which coherence time sets pure dephasing.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DephasingSource {
    #[default]
    Echo,
    Ramsey,
}

impl QubitSpec {
    /// Pure dephasing time in µs from `1/Tφ = 1/T2 − 1/(2T1)`; `None` when
    /// T2 is already at the `2·T1` limit.
    pub fn tphi_us(&self, source: DephasingSource) -> Option<f64> {
        let t2 = match source {
            DephasingSource::Echo => self.t2e_us,
            DephasingSource::Ramsey => self.t2r_us,
        };
        let rate = 1.0 / t2 - 1.0 / (2.0 * self.t1_us);
        (rate > 0.0).then(|| 1.0 / rate)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviceSpec {
    pub qubits: Vec<QubitSpec>,
    pub couplers: Vec<CouplerSpec>,
}

impl DeviceSpec {
    /// The bundled six-qubit device.
    pub fn table_s1() -> Self {
        Self::from_json_str(BUNDLED_TABLE).expect("bundled device file is valid")
    }

    pub fn bundled_json() -> &'static str {
        BUNDLED_TABLE
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let dev: DeviceSpec = serde_json::from_str(text).map_err(|e| Error::DeviceFile(e.to_string()))?;
        dev.validate()?;
        Ok(dev)
    }

    pub fn n_qubits(&self) -> usize {
        self.qubits.len()
    }

    /// All invariant violations as `(path, message)`.
    pub fn violations(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut push = |p: String, m: &str| out.push((p, m.to_string()));
        if self.qubits.is_empty() {
            push("qubits".into(), "at least one qubit required");
        }
        if self.couplers.len() + 1 != self.qubits.len() && !self.qubits.is_empty() {
            push("couplers".into(), "length must equal qubits − 1");
        }
        for (i, q) in self.qubits.iter().enumerate() {
            let p = |f: &str| format!("qubits[{i}].{f}");
            for (name, v) in [("omega_min_ghz", q.omega_min_ghz), ("omega_max_ghz", q.omega_max_ghz), ("omega_idle_ghz", q.omega_idle_ghz)] {
                if !(v > 0.0 && v.is_finite()) {
                    push(p(name), "must be a positive frequency");
                }
            }
            if q.omega_min_ghz > q.omega_max_ghz {
                push(p("omega_min_ghz"), "exceeds omega_max_ghz");
            }
            if q.omega_idle_ghz < q.omega_min_ghz || q.omega_idle_ghz > q.omega_max_ghz {
                push(p("omega_idle_ghz"), "outside [omega_min_ghz, omega_max_ghz]");
            }
            if !(q.t1_us > 0.0) {
                push(p("t1_us"), "must be positive");
            }
            if !(q.t2r_us > 0.0) {
                push(p("t2r_us"), "must be positive");
            }
            if !(q.t2e_us > 0.0) {
                push(p("t2e_us"), "must be positive");
            }
            for (name, v) in [("f0", q.f0), ("f1", q.f1)] {
                if !(0.0..=1.0).contains(&v) {
                    push(p(name), "must lie in [0, 1]");
                }
            }
        }
        for (k, c) in self.couplers.iter().enumerate() {
            let p = |f: &str| format!("couplers[{k}].{f}");
            if !(c.omega_idle_ghz > 0.0) {
                push(p("omega_idle_ghz"), "must be a positive frequency");
            }
            if !(c.omega_max_ghz > c.omega_idle_ghz) {
                push(p("omega_max_ghz"), "must exceed omega_idle_ghz");
            }
            let neighbours = self.qubits.iter().skip(k).take(2).map(|q| q.omega_idle_ghz);
            if neighbours.clone().any(|w| w >= c.omega_idle_ghz) {
                push(p("omega_idle_ghz"), "must exceed the adjacent qubit idle frequencies");
            }
            if !(c.g_left_mhz > 0.0) {
                push(p("g_left_mhz"), "must be positive");
            }
            if !(c.g_right_mhz > 0.0) {
                push(p("g_right_mhz"), "must be positive");
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        match v.first() {
            None => Ok(()),
            Some((path, _)) => Err(Error::Validation {
                path: path.clone(),
                message: v.iter().map(|(p, m)| format!("{p}: {m}")).collect::<Vec<_>>().join("; "),
            }),
        }
    }

    pub fn coupler(&self, bond: usize) -> Result<&CouplerSpec> {
        self.couplers.get(bond).ok_or(Error::BondOutOfRange { bond, n_bonds: self.couplers.len() })
    }
}

pub fn load_device(path: impl AsRef<Path>) -> Result<DeviceSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::DeviceFile(format!("{}: {e}", path.display())))?;
    DeviceSpec::from_json_str(&text)
}

/// `ω_max·√|cos(π·Φ)|` in GHz.
pub fn coupler_frequency(phi_c: f64, omega_max_ghz: f64) -> f64 {
    omega_max_ghz * (PI * phi_c).cos().abs().sqrt()
}

/// `∂ω_c/∂Φ_c` in GHz per Φ₀.
pub fn coupler_flux_slope(phi_dc: f64, omega_max_ghz: f64) -> Result<f64> {
    let c = (PI * phi_dc).cos();
    if c.abs() < 1e-6 {
        return Err(Error::SingularSlope(phi_dc));
    }
    Ok(-0.5 * PI * omega_max_ghz * (PI * phi_dc).sin() * c.signum() / c.abs().sqrt())
}

/// Inverse of `coupler_frequency` on the branch `[0, 1/2)`.
pub fn flux_for_frequency(omega_ghz: f64, omega_max_ghz: f64) -> f64 {
    let r = (omega_ghz / omega_max_ghz).clamp(0.0, 1.0);
    (r * r).acos() / PI
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SidebandKind {
    Blue,
    Red,
}

impl std::fmt::Display for SidebandKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Blue => "blue",
            Self::Red => "red",
        })
    }
}

/// Strength per unit amplitude: `(g₁g₂/4)·∂ω_c/∂Φ·S` with `S` the pair of
/// energy denominators for the chosen sideband, in MHz per Φ₀.
fn strength_per_flux(kind: SidebandKind, device: &DeviceSpec, bond: usize, phi_dc: f64) -> Result<f64> {
    let c = device.coupler(bond)?;
    let w1 = device.qubits[bond].omega_idle_ghz;
    let w2 = device.qubits[bond + 1].omega_idle_ghz;
    let wc = coupler_frequency(phi_dc, c.omega_max_ghz);
    for w in [w1, w2] {
        if (wc - w).abs() < 1e-9 {
            return Err(Error::Resonance { coupler_ghz: wc, qubit_ghz: w });
        }
    }
    let slope = coupler_flux_slope(phi_dc, c.omega_max_ghz)?;
    let s = match kind {
        SidebandKind::Blue => 1.0 / ((wc - w1) * (wc + w2)) + 1.0 / ((wc + w1) * (wc - w2)),
        SidebandKind::Red => 1.0 / ((wc - w1) * (wc - w2)) + 1.0 / ((wc + w1) * (wc + w2)),
    };
    // MHz²·(GHz/Φ₀)/GHz² = 1e-3 MHz/Φ₀
    Ok((c.g_left_mhz * c.g_right_mhz / 4.0 * slope * s * 1e-3).abs())
}

/// Perturbative sideband coupling magnitude in MHz, linear in `amplitude` (Φ₀).
pub fn sideband_strength(kind: SidebandKind, amplitude: f64, device: &DeviceSpec, bond: usize, phi_dc: f64) -> Result<f64> {
    if !(amplitude >= 0.0) {
        return Err(Error::InvalidArgument(format!("amplitude {amplitude} must be non-negative")));
    }
    Ok(amplitude * strength_per_flux(kind, device, bond, phi_dc)?)
}

/// Inverse of `sideband_strength`, guarded by `AMPLITUDE_GUARD`.
pub fn amplitude_for_strength(kind: SidebandKind, target_g_mhz: f64, device: &DeviceSpec, bond: usize, phi_dc: f64) -> Result<f64> {
    if !(target_g_mhz >= 0.0) {
        return Err(Error::InvalidArgument(format!("target strength {target_g_mhz} must be non-negative")));
    }
    if target_g_mhz == 0.0 {
        return Ok(0.0);
    }
    let a = target_g_mhz / strength_per_flux(kind, device, bond, phi_dc)?;
    if a >= AMPLITUDE_GUARD {
        return Err(Error::AmplitudeGuard { amplitude: a, guard: AMPLITUDE_GUARD });
    }
    Ok(a)
}

/// One flux-modulation tone on one coupler.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SidebandDrive {
    pub coupler: usize,
    pub kind: SidebandKind,
    /// Φ₀ units.
    pub amplitude: f64,
    pub frequency_ghz: f64,
    pub phase_rad: f64,
    pub t_start_ns: f64,
    pub t_end_ns: f64,
    pub ramp_ns: f64,
}

impl SidebandDrive {
    pub const DEFAULT_RAMP_NS: f64 = 20.0;

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude >= 0.0) {
            return Err(Error::InvalidArgument(format!("drive amplitude {} must be non-negative", self.amplitude)));
        }
        if self.amplitude >= AMPLITUDE_GUARD {
            return Err(Error::AmplitudeGuard { amplitude: self.amplitude, guard: AMPLITUDE_GUARD });
        }
        if !(self.t_end_ns > self.t_start_ns) {
            return Err(Error::InvalidTimeSpan(format!("drive window [{}, {}]", self.t_start_ns, self.t_end_ns)));
        }
        if !(self.ramp_ns >= 0.0) {
            return Err(Error::InvalidArgument(format!("ramp {} must be non-negative", self.ramp_ns)));
        }
        Ok(())
    }

    /// Raised-cosine window: 0 outside, 1 on the plateau. Ramps longer than
    /// half the window are shortened to half the window.
    pub fn envelope(&self, t: f64) -> f64 {
        window_envelope(t, self.t_start_ns, self.t_end_ns, self.ramp_ns)
    }

    /// Flux offset from the bias, `A·env(t)·cos(ω t + φ)` in Φ₀.
    pub fn flux(&self, t: f64) -> f64 {
        let env = self.envelope(t);
        if env == 0.0 {
            return 0.0;
        }
        self.amplitude * env * (std::f64::consts::TAU * self.frequency_ghz * t + self.phase_rad).cos()
    }
}

pub fn window_envelope(t: f64, t0: f64, t1: f64, ramp: f64) -> f64 {
    if t < t0 || t > t1 {
        return 0.0;
    }
    let r = ramp.min(0.5 * (t1 - t0));
    if r <= 0.0 {
        return 1.0;
    }
    let edge = (t - t0).min(t1 - t);
    if edge >= r {
        1.0
    } else {
        0.5 * (1.0 - (PI * edge / r).cos())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequency_examples() {
        assert!((coupler_frequency(0.0, 6.4) - 6.4).abs() < 1e-15);
        assert!(coupler_frequency(0.5, 6.4).abs() < 1e-7);
        assert!((coupler_frequency(1.0 / 3.0, 6.4) - 6.4 * 0.5f64.sqrt()).abs() < 1e-12);
        assert!((coupler_frequency(1.0 / 3.0, 6.4) - 4.5255).abs() < 1e-4);
    }

    #[test]
    fn slope_examples() {
        assert_eq!(coupler_flux_slope(0.0, 6.4).unwrap(), 0.0);
        let expect = -(PI / 2.0) * 6.4 * (PI / 4.0).sin() / (PI / 4.0).cos().sqrt();
        assert!((coupler_flux_slope(0.25, 6.4).unwrap() - expect).abs() < 1e-12);
        assert!((coupler_flux_slope(0.25, 6.4).unwrap() + 8.455).abs() < 2e-3);
        assert!((coupler_flux_slope(-0.25, 6.4).unwrap() - 8.455).abs() < 2e-3);
        assert!(matches!(coupler_flux_slope(0.5, 6.4), Err(Error::SingularSlope(_))));
    }

    #[test]
    fn bundled_values() {
        let d = DeviceSpec::table_s1();
        assert_eq!(d.qubits.len(), 6);
        assert_eq!(d.couplers.len(), 5);
        assert_eq!(d.qubits[0].omega_idle_ghz, 4.121);
        assert_eq!(d.qubits[1].omega_idle_ghz, 4.477);
        assert_eq!(d.couplers[0].omega_max_ghz, 6.42);
        assert_eq!(d.qubits[3].f1, 0.944);
    }

    #[test]
    fn idle_flux_reproduces_idle_frequency() {
        let d = DeviceSpec::table_s1();
        for c in &d.couplers {
            assert!((coupler_frequency(c.idle_flux(), c.omega_max_ghz) - c.omega_idle_ghz).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_device_reports_path() {
        let mut d = DeviceSpec::table_s1();
        d.qubits[2].omega_min_ghz = 5.0;
        match d.validate() {
            Err(Error::Validation { path, .. }) => assert_eq!(path, "qubits[2].omega_min_ghz"),
            other => panic!("{other:?}"),
        }
        let mut d = DeviceSpec::table_s1();
        d.couplers.pop();
        assert!(d.validate().is_err());
    }

    fn strength_oracle(kind: SidebandKind, a: f64, w1: f64, w2: f64, wc: f64, slope: f64) -> f64 {
        // Independent evaluation in Hz-based SI-like units.
        let g = 100e6;
        let (w1, w2, wc) = (w1 * 1e9, w2 * 1e9, wc * 1e9);
        let s = match kind {
            SidebandKind::Blue => 1.0 / ((wc - w1) * (wc + w2)) + 1.0 / ((wc + w1) * (wc - w2)),
            SidebandKind::Red => 1.0 / ((wc - w1) * (wc - w2)) + 1.0 / ((wc + w1) * (wc + w2)),
        };
        (a * g * g / 4.0 * slope * 1e9 * s).abs() / 1e6
    }

    #[test]
    fn strength_matches_unit_oracle() {
        let d = DeviceSpec::table_s1();
        let phi = d.couplers[0].idle_flux();
        let slope = coupler_flux_slope(phi, 6.42).unwrap();
        for kind in [SidebandKind::Blue, SidebandKind::Red] {
            let got = sideband_strength(kind, 0.1, &d, 0, phi).unwrap();
            let want = strength_oracle(kind, 0.1, 4.121, 4.477, 5.44, slope);
            assert!((got - want).abs() < 1e-12 * want, "{kind}: {got} vs {want}");
        }
    }

    #[test]
    fn strength_zero_and_linear() {
        let d = DeviceSpec::table_s1();
        let phi = d.couplers[0].idle_flux();
        assert_eq!(sideband_strength(SidebandKind::Blue, 0.0, &d, 0, phi).unwrap(), 0.0);
        let g1 = sideband_strength(SidebandKind::Blue, 0.03, &d, 0, phi).unwrap();
        let g2 = sideband_strength(SidebandKind::Blue, 0.06, &d, 0, phi).unwrap();
        assert!((g2 - 2.0 * g1).abs() <= 1e-12 * g2);
    }

    #[test]
    fn blue_amplitude_exceeds_red_at_equal_strength() {
        let d = DeviceSpec::table_s1();
        let expect = [4.31, 4.95, 3.96, 3.73, 4.43];
        for (bond, want) in expect.iter().enumerate() {
            let phi = d.couplers[bond].idle_flux();
            let gb = sideband_strength(SidebandKind::Blue, 0.01, &d, bond, phi).unwrap();
            let gr = sideband_strength(SidebandKind::Red, 0.01, &d, bond, phi).unwrap();
            let ratio = gr / gb;
            assert!((ratio - want).abs() < 0.02, "bond {bond}: ratio {ratio}");
            assert!(ratio > 3.5);
        }
    }

    #[test]
    fn target_amplitude_below_guard() {
        let d = DeviceSpec::table_s1();
        let phi = d.couplers[0].idle_flux();
        let a = amplitude_for_strength(SidebandKind::Blue, 0.75, &d, 0, phi).unwrap();
        assert!(a > 0.0 && a < AMPLITUDE_GUARD);
        assert!((a - 0.1957).abs() < 1e-3, "{a}");
        assert_eq!(amplitude_for_strength(SidebandKind::Red, 0.0, &d, 0, phi).unwrap(), 0.0);
        assert!(matches!(
            amplitude_for_strength(SidebandKind::Blue, 5.0, &d, 0, phi),
            Err(Error::AmplitudeGuard { .. })
        ));
    }

    #[test]
    fn tphi_from_echo() {
        let q = &DeviceSpec::table_s1().qubits[0];
        let t = q.tphi_us(DephasingSource::Echo).unwrap();
        assert!((1.0 / t - (1.0 / 17.4 - 1.0 / 99.6)).abs() < 1e-12);
    }

    #[test]
    fn envelope_shape() {
        assert_eq!(window_envelope(-1.0, 0.0, 100.0, 20.0), 0.0);
        assert_eq!(window_envelope(50.0, 0.0, 100.0, 20.0), 1.0);
        assert!((window_envelope(10.0, 0.0, 100.0, 20.0) - 0.5).abs() < 1e-15);
        assert!((window_envelope(90.0, 0.0, 100.0, 20.0) - 0.5).abs() < 1e-15);
        assert_eq!(window_envelope(5.0, 0.0, 100.0, 0.0), 1.0);
    }
}
