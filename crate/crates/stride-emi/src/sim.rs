//! Synthetic ground-truth generator: phantoms, k-space synthesis, EMI
//! waveform injection with per-channel coupling, and thermal noise.
//!
//! Timing model: sample x of PE line j in repeat r occurs at
//! t = (r * ky + j) * TR + x * dwell, so the interference waveform keeps
//! phase across lines and repeats. Narrow-band EMI then lands in localized
//! image columns, which is exactly what the per-column correction exploits.

use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::array::{ComplexArray2D, Domain, MultiCoilAcquisition};
use crate::error::{Error, Result};
use crate::fft::fft2c;
use crate::io::save_array;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhantomKind {
    ContrastDiscs,
    ResolutionDots,
    UniformDisc,
}

/// Real-valued test image with intensities in [0, 1].
#[derive(Clone, Debug)]
pub struct Phantom {
    n: usize,
    intensity: Vec<f64>,
}

impl Phantom {
    pub fn from_intensity(n: usize, intensity: Vec<f64>) -> Result<Self> {
        if intensity.len() != n * n {
            return Err(Error::shape("intensity buffer does not match matrix size"));
        }
        if intensity.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::invalid("phantom intensities must lie in [0, 1]"));
        }
        Ok(Self { n, intensity })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn intensity(&self, i: usize, j: usize) -> f64 {
        self.intensity[i * self.n + j]
    }

    pub fn to_image(&self) -> ComplexArray2D {
        ComplexArray2D::from_fn(self.n, self.n, |i, j| {
            Complex64::new(self.intensity(i, j), 0.0)
        })
    }

    /// Standard deviation of the intensity map; used to scale interference
    /// amplitudes relative to the signal.
    pub fn intensity_std(&self) -> f64 {
        let n = self.intensity.len() as f64;
        let mean = self.intensity.iter().sum::<f64>() / n;
        (self.intensity.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
    }
}

/// Deterministic phantom construction.
pub fn make_phantom(kind: PhantomKind, n: usize) -> Phantom {
    let c = n as f64 / 2.0;
    let mut intensity = vec![0.0; n * n];
    let disc = |cx: f64, cy: f64, r: f64, level: f64, buf: &mut Vec<f64>| {
        for i in 0..n {
            for j in 0..n {
                let d = ((i as f64 - cx).powi(2) + (j as f64 - cy).powi(2)).sqrt();
                if d < r {
                    buf[i * n + j] = level;
                }
            }
        }
    };
    match kind {
        PhantomKind::UniformDisc => {
            disc(c, c, 0.4 * n as f64, 1.0, &mut intensity);
        }
        PhantomKind::ContrastDiscs => {
            disc(c, c, 0.45 * n as f64, 0.2, &mut intensity);
            let offset = 0.22 * n as f64;
            let levels = [0.4, 0.6, 0.8, 1.0];
            for (k, &level) in levels.iter().enumerate() {
                let angle = std::f64::consts::FRAC_PI_4 + k as f64 * std::f64::consts::FRAC_PI_2;
                let cx = c + offset * angle.cos();
                let cy = c + offset * angle.sin();
                disc(cx, cy, 0.1 * n as f64, level, &mut intensity);
            }
        }
        PhantomKind::ResolutionDots => {
            // three bands of dot grids at halving pitch
            for b in 0..3usize {
                let pitch = (n / (8 << b)).max(2);
                let row_start = n * (2 * b + 1) / 8;
                let row_end = n * (2 * b + 2) / 8;
                let col_start = n / 8;
                let col_end = n * 7 / 8;
                for i in (row_start..row_end).step_by(pitch) {
                    for j in (col_start..col_end).step_by(pitch) {
                        intensity[i * n + j] = 1.0;
                    }
                }
            }
        }
    }
    Phantom { n, intensity }
}

/// Injected interference waveform, tagged by kind. The waveform itself has
/// unit scale; `amplitude` multiplies it at injection together with the
/// per-channel coupling gain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EmiScenario {
    None,
    Tone {
        carrier_offset_hz: f64,
        amplitude: f64,
    },
    SquareAm {
        carrier_offset_hz: f64,
        modulation_rate_hz: f64,
        amplitude: f64,
    },
    WhiteAm {
        carrier_offset_hz: f64,
        amplitude: f64,
    },
    Sweep {
        carrier_offset_hz: f64,
        sweep_span_hz: f64,
        sweep_rate_hz: f64,
        amplitude: f64,
    },
}

impl EmiScenario {
    pub fn label(&self) -> &'static str {
        match self {
            EmiScenario::None => "none",
            EmiScenario::Tone { .. } => "tone",
            EmiScenario::SquareAm { .. } => "square",
            EmiScenario::WhiteAm { .. } => "white",
            EmiScenario::Sweep { .. } => "sweep",
        }
    }

    pub fn amplitude(&self) -> f64 {
        match *self {
            EmiScenario::None => 0.0,
            EmiScenario::Tone { amplitude, .. }
            | EmiScenario::SquareAm { amplitude, .. }
            | EmiScenario::WhiteAm { amplitude, .. }
            | EmiScenario::Sweep { amplitude, .. } => amplitude,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let EmiScenario::Sweep { sweep_span_hz, sweep_rate_hz, .. } = self {
            if *sweep_span_hz <= 0.0 {
                return Err(Error::invalid("sweep span must be positive"));
            }
            if *sweep_rate_hz <= 0.0 {
                return Err(Error::invalid("sweep rate must be positive"));
            }
        }
        Ok(())
    }
}

/// Per-channel coupling of the interference and thermal noise levels.
/// When EMI is active, a study is only meaningful if at least one sensor
/// gain is nonzero; that is deliberately not enforced so that degenerate
/// (sensor-blind) datasets can be constructed for robustness tests.
#[derive(Clone, Debug)]
pub struct CouplingModel {
    pub coil_gains: Vec<Complex64>,
    pub sensor_gains: Vec<Complex64>,
    /// Thermal noise std per complex component on imaging coils.
    pub sigma_img: f64,
    /// Thermal noise std per complex component on EMI sensors.
    pub sigma_emi: f64,
    pub dwell_s: f64,
    pub tr_s: f64,
}

impl CouplingModel {
    /// Deterministic gains with varied magnitude and phase, dwell 10 us and
    /// TR = 1.25 * n * dwell (readout plus dead time).
    pub fn synthetic(n_coils: usize, n_sensors: usize, matrix: usize) -> Self {
        let coil_gains = (0..n_coils)
            .map(|k| {
                let phase = 2.0 * std::f64::consts::PI * k as f64 / n_coils.max(1) as f64;
                Complex64::from_polar(0.8 + 0.4 * (k % 3) as f64 / 3.0, phase)
            })
            .collect();
        let sensor_gains = (0..n_sensors)
            .map(|k| Complex64::from_polar(1.0 + 0.2 * k as f64, 0.7 * k as f64))
            .collect();
        let dwell_s = 1e-5;
        Self {
            coil_gains,
            sensor_gains,
            sigma_img: 0.0,
            sigma_emi: 0.0,
            dwell_s,
            tr_s: 1.25 * matrix as f64 * dwell_s,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sigma_img < 0.0 || self.sigma_emi < 0.0 {
            return Err(Error::invalid("noise levels must be non-negative"));
        }
        if self.dwell_s <= 0.0 || self.tr_s <= 0.0 {
            return Err(Error::invalid("dwell and TR must be positive"));
        }
        Ok(())
    }
}

/// Sample times of one repeat, line-major: index j * kx + x maps to
/// t0 + j * TR + x * dwell.
pub fn sample_times(kx: usize, ky: usize, dwell_s: f64, tr_s: f64, t0: f64) -> Vec<f64> {
    let mut times = Vec::with_capacity(kx * ky);
    for j in 0..ky {
        for x in 0..kx {
            times.push(t0 + j as f64 * tr_s + x as f64 * dwell_s);
        }
    }
    times
}

fn square_wave(t: f64, rate_hz: f64) -> f64 {
    if (t * rate_hz).rem_euclid(1.0) < 0.5 {
        1.0
    } else {
        -1.0
    }
}

/// Integral of the unit triangular wave over one period-normalized argument.
/// tri ramps 0 -> 1 -> -1 -> 0 over u in [0, 1); the integral of a full
/// period is zero.
fn tri_integral(u: f64) -> f64 {
    let frac = u.rem_euclid(1.0);
    if frac < 0.25 {
        2.0 * frac * frac
    } else if frac < 0.75 {
        2.0 * frac - 2.0 * frac * frac - 0.25
    } else {
        2.0 * (frac - 1.0) * (frac - 1.0)
    }
}

/// Unit-scale interference waveform on the given time grid. The seed only
/// affects the white-noise envelope.
pub fn gen_emi_waveform(
    scenario: &EmiScenario,
    sample_times: &[f64],
    seed: u64,
) -> Result<Vec<Complex64>> {
    scenario.validate()?;
    let carrier = |f: f64, t: f64| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * f * t);
    Ok(match *scenario {
        EmiScenario::None => vec![Complex64::new(0.0, 0.0); sample_times.len()],
        EmiScenario::Tone { carrier_offset_hz, .. } => {
            sample_times.iter().map(|&t| carrier(carrier_offset_hz, t)).collect()
        }
        EmiScenario::SquareAm { carrier_offset_hz, modulation_rate_hz, .. } => sample_times
            .iter()
            .map(|&t| carrier(carrier_offset_hz, t) * square_wave(t, modulation_rate_hz))
            .collect(),
        EmiScenario::WhiteAm { carrier_offset_hz, .. } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            sample_times
                .iter()
                .map(|&t| {
                    let envelope: f64 = rng.sample(StandardNormal);
                    carrier(carrier_offset_hz, t) * envelope
                })
                .collect()
        }
        EmiScenario::Sweep { carrier_offset_hz, sweep_span_hz, sweep_rate_hz, .. } => sample_times
            .iter()
            .map(|&t| {
                let phase = 2.0
                    * std::f64::consts::PI
                    * (carrier_offset_hz * t
                        + sweep_span_hz / sweep_rate_hz * tri_integral(t * sweep_rate_hz));
                Complex64::from_polar(1.0, phase)
            })
            .collect(),
    })
}

fn mix_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const WAVEFORM_STREAM: u64 = 0xE311;
const NOISE_STREAM: u64 = 0x0153;

/// fft2c of the gain-scaled phantom per imaging coil; sensors receive no MR
/// signal. Single repeat, k-space domain.
pub fn synthesize_kspace(
    phantom: &Phantom,
    coil_gains: &[Complex64],
    sensor_count: usize,
) -> Result<MultiCoilAcquisition> {
    if coil_gains.is_empty() {
        return Err(Error::invalid("at least one imaging coil gain is required"));
    }
    let n = phantom.n();
    let mut acq =
        MultiCoilAcquisition::new(1, coil_gains.len(), sensor_count, n, n, Domain::KSpace)?;
    let img = phantom.to_image();
    for (c, &gain) in coil_gains.iter().enumerate() {
        acq.set_channel(0, c, fft2c(&img.scale(gain))?)?;
    }
    Ok(acq)
}

/// Adds gain-scaled interference and thermal noise to every channel of every
/// repeat. The waveform phase continues across repeats; all randomness flows
/// from `seed`. With an inactive scenario and zero noise levels the input is
/// returned bit-identically.
pub fn inject_emi(
    clean: &MultiCoilAcquisition,
    scenario: &EmiScenario,
    coupling: &CouplingModel,
    seed: u64,
) -> Result<MultiCoilAcquisition> {
    coupling.validate()?;
    scenario.validate()?;
    if clean.domain() != Domain::KSpace {
        return Err(Error::invalid("EMI is injected into k-space acquisitions"));
    }
    if coupling.coil_gains.len() != clean.imaging_channels()
        || coupling.sensor_gains.len() != clean.sensor_channels()
    {
        return Err(Error::shape("coupling gains do not match channel counts"));
    }
    let amplitude = scenario.amplitude();
    let emi_active = !matches!(scenario, EmiScenario::None) && amplitude != 0.0;
    if !emi_active && coupling.sigma_img == 0.0 && coupling.sigma_emi == 0.0 {
        return Ok(clean.clone());
    }

    let (kx, ky) = (clean.kx(), clean.ky());
    let repeat_duration = ky as f64 * coupling.tr_s;
    let mut out = clean.clone();
    for r in 0..clean.repeats() {
        let waveform = if emi_active {
            let times = sample_times(kx, ky, coupling.dwell_s, coupling.tr_s, r as f64 * repeat_duration);
            gen_emi_waveform(scenario, &times, mix_seed(seed, r as u64, WAVEFORM_STREAM))?
        } else {
            Vec::new()
        };
        for c in 0..clean.total_channels() {
            let (gain, sigma) = if c < clean.imaging_channels() {
                (coupling.coil_gains[c], coupling.sigma_img)
            } else {
                (
                    coupling.sensor_gains[c - clean.imaging_channels()],
                    coupling.sigma_emi,
                )
            };
            let arr = out.channel_mut(r, c);
            if emi_active && gain != Complex64::new(0.0, 0.0) {
                let scale = gain * amplitude;
                for j in 0..ky {
                    for x in 0..kx {
                        let v = arr.get(x, j) + scale * waveform[j * kx + x];
                        arr.set(x, j, v);
                    }
                }
            }
            if sigma > 0.0 {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(mix_seed(seed, r as u64, NOISE_STREAM + c as u64));
                for j in 0..ky {
                    for x in 0..kx {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        let v = arr.get(x, j) + Complex64::new(re * sigma, im * sigma);
                        arr.set(x, j, v);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Number of samples in the recorded noise-only scan.
pub const NOISE_SCAN_SAMPLES: usize = 4096;

/// File name of the noise-only scan inside a dataset directory.
pub const NOISE_SCAN_FILE: &str = "noise_scan.sca";

/// Thermal-noise-only samples-by-channels scan matching the coupling's
/// channel layout and noise levels.
pub fn noise_only_scan(
    coupling: &CouplingModel,
    samples: usize,
    seed: u64,
) -> ComplexArray2D {
    let n_img = coupling.coil_gains.len();
    let n_total = n_img + coupling.sensor_gains.len();
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0xA0A0, NOISE_STREAM));
    ComplexArray2D::from_fn(samples, n_total, |_, c| {
        let sigma = if c < n_img { coupling.sigma_img } else { coupling.sigma_emi };
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * sigma, im * sigma)
    })
}

/// Simulates `repeats` acquisitions of the phantom under one scenario and
/// saves them as a dataset directory (with a noise-only scan for
/// pre-whitening). Identical arguments produce byte-identical datasets.
pub fn simulate_study(
    phantom: &Phantom,
    scenario: &EmiScenario,
    repeats: usize,
    coupling: &CouplingModel,
    seed: u64,
    out_dir: impl AsRef<Path>,
) -> Result<MultiCoilAcquisition> {
    if repeats == 0 {
        return Err(Error::invalid("at least one repeat is required"));
    }
    let single = synthesize_kspace(phantom, &coupling.coil_gains, coupling.sensor_gains.len())?;
    let mut clean = MultiCoilAcquisition::new(
        repeats,
        single.imaging_channels(),
        single.sensor_channels(),
        single.kx(),
        single.ky(),
        Domain::KSpace,
    )?;
    for r in 0..repeats {
        for c in 0..single.total_channels() {
            clean.set_channel(r, c, single.channel(0, c).clone())?;
        }
    }
    let mut corrupted = inject_emi(&clean, scenario, coupling, seed)?;
    corrupted.meta.scenario_label = scenario.label().to_string();
    corrupted.meta.scenario = Some(serde_json::to_value(scenario)?);
    corrupted.meta.tr_s = Some(coupling.tr_s);
    corrupted.meta.dwell_s = Some(coupling.dwell_s);
    corrupted.meta.seed = Some(seed);
    corrupted.meta.noise_scan = Some(NOISE_SCAN_FILE.to_string());

    let dir = out_dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let scan = noise_only_scan(coupling, NOISE_SCAN_SAMPLES, seed);
    save_array(dir.join(NOISE_SCAN_FILE), &scan)?;
    crate::io::save_dataset(dir, &corrupted)?;
    Ok(corrupted)
}
