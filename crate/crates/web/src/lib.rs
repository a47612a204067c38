//! WebAssembly bindings for the browser demo in `www/`.

use wasm_bindgen::prelude::*;

use floquet_core::effective::{anisotropy_decompose, ChainConfig, EffectiveCoupling};
use floquet_core::experiments::{loschmidt_echo, run_ab_interference, AbOptions, DptOptions, PhaseParameter, Sequential, LOOP_STATES};
use floquet_core::qop::{HilbertSpace, QuantumState};
use floquet_core::{experiments, Result};

/// Longest window the page may request, so a slider drag never stalls the tab.
pub const MAX_DURATION_NS: f64 = 10_000.0;

fn check_window(duration_ns: f64, sample_every_ns: f64) -> Result<()> {
    if !(duration_ns > 0.0 && duration_ns <= MAX_DURATION_NS) || !(sample_every_ns > 0.0) {
        return Err(floquet_core::Error::InvalidTimeSpan(format!(
            "duration must lie in (0, {MAX_DURATION_NS}] ns and the sample step must be positive"
        )));
    }
    Ok(())
}

/// Loop populations from `|000⟩` at loop flux `flux`. Layout: the sample times,
/// then one block per state in `000, 110, 101, 011` order.
pub fn loop_populations(flux: f64, g_mhz: f64, duration_ns: f64, sample_every_ns: f64) -> Result<Vec<f64>> {
    check_window(duration_ns, sample_every_ns)?;
    let mut chain = ChainConfig::uniform_xx(3, g_mhz, 0.0);
    PhaseParameter::LoopFlux.apply(&mut chain.couplings, flux)?;
    let init = QuantumState::from_label(&HilbertSpace::qubits(3), "000")?;
    let opts = AbOptions { sample_every_ns, ..AbOptions::default() };
    let map = run_ab_interference(&chain, &[], &[0.0], duration_ns, &init, &opts, &Sequential)?;
    let mut out = map.times.clone();
    for label in LOOP_STATES {
        out.extend_from_slice(map.series(0, label).expect("loop labels exist"));
    }
    Ok(out)
}

/// Loschmidt echo of `|0…0⟩` under the transverse-field Ising chain, one value
/// per sample from `t = 0`.
pub fn ising_echo(n: usize, j_mhz: f64, bz_over_j: f64, horizon_ns: f64, sample_every_ns: f64) -> Result<Vec<f64>> {
    check_window(horizon_ns, sample_every_ns)?;
    if !(2..=experiments::MAX_DPT_QUBITS).contains(&n) {
        return Err(floquet_core::Error::InvalidArgument(format!("chain length {n} outside 2..={}", experiments::MAX_DPT_QUBITS)));
    }
    let opts = DptOptions { n, j_mhz, ..DptOptions::default() };
    let h = experiments::dpt_hamiltonian(&opts, bz_over_j)?;
    let init = QuantumState::from_label(&HilbertSpace::qubits(n), &"0".repeat(n))?;
    let times = floquet_core::dynamics::sample_grid(0.0, horizon_ns, sample_every_ns)?;
    loschmidt_echo(&h, &init, &times)
}

/// `[xx, yy, xy, yx]` coefficients (MHz) of one bond.
pub fn bond_anisotropy(g_blue: f64, phi_blue: f64, g_red: f64, phi_red: f64) -> Result<Vec<f64>> {
    let c = EffectiveCoupling::new(0, g_blue, phi_blue, g_red, phi_red)?;
    Ok(anisotropy_decompose(&c).as_array().to_vec())
}

fn js<T>(r: Result<T>) -> std::result::Result<T, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = loopPopulations)]
pub fn loop_populations_js(flux: f64, g_mhz: f64, duration_ns: f64, sample_every_ns: f64) -> std::result::Result<Vec<f64>, JsError> {
    js(loop_populations(flux, g_mhz, duration_ns, sample_every_ns))
}

#[wasm_bindgen(js_name = isingEcho)]
pub fn ising_echo_js(n: usize, j_mhz: f64, bz_over_j: f64, horizon_ns: f64, sample_every_ns: f64) -> std::result::Result<Vec<f64>, JsError> {
    js(ising_echo(n, j_mhz, bz_over_j, horizon_ns, sample_every_ns))
}

#[wasm_bindgen(js_name = bondAnisotropy)]
pub fn bond_anisotropy_js(g_blue: f64, phi_blue: f64, g_red: f64, phi_red: f64) -> std::result::Result<Vec<f64>, JsError> {
    js(bond_anisotropy(g_blue, phi_blue, g_red, phi_red))
}
