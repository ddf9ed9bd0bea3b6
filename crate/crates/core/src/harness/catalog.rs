//! Test-function catalog: Gaussians, modulated Gaussians, Gaussian-truncated
//! chirps and seeded random sums of modulated Gaussians.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{forward_fourier, SampledFunction, TorusGrid};

/// Boundary samples must stay below this fraction of the peak.
pub const BOUNDARY_TOL: f64 = 1e-14;
/// Spectrum outside the safe radius must stay below this fraction of the peak.
pub const SPECTRAL_TOL: f64 = 1e-13;

/// `e^{-r²/2} = 1e-14` at `r = 8.03`.
const SPATIAL_DECAY: f64 = 8.03;
/// `e^{-r²/2} = 1e-13` at `r = 7.74`.
const SPECTRAL_DECAY: f64 = 7.74;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionSpec {
    Gaussian {
        name: String,
        sigma: f64,
        #[serde(default)]
        x0: Vec<f64>,
    },
    ModulatedGaussian {
        name: String,
        sigma: f64,
        #[serde(default)]
        x0: Vec<f64>,
        xi0: Vec<f64>,
    },
    /// `e^{i a |x − x0|²}` under a Gaussian envelope.
    ChirpTruncated {
        name: String,
        sigma: f64,
        #[serde(default)]
        x0: Vec<f64>,
        #[serde(default)]
        xi0: Vec<f64>,
        rate: f64,
    },
    /// Sum of `terms` modulated Gaussians with seeded parameters.
    RandomBandlimited { name: String, seed: u64, terms: usize },
}

impl FunctionSpec {
    pub fn name(&self) -> &str {
        match self {
            FunctionSpec::Gaussian { name, .. }
            | FunctionSpec::ModulatedGaussian { name, .. }
            | FunctionSpec::ChirpTruncated { name, .. }
            | FunctionSpec::RandomBandlimited { name, .. } => name,
        }
    }
}

/// Region a catalog must fit in: spatial half-width and spectral radius.
/// Random functions draw their parameters from it, so keeping the envelope
/// fixed keeps them identical across grid refinements.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub half_period: f64,
    pub safe_radius: f64,
}

#[derive(Clone, Debug)]
pub struct CatalogFunction {
    pub spec: FunctionSpec,
    pub samples: SampledFunction,
}

impl CatalogFunction {
    pub fn name(&self) -> &str {
        self.spec.name()
    }
}

fn gauss(name: &str, sigma: f64, x0: &[f64]) -> FunctionSpec {
    FunctionSpec::Gaussian {
        name: name.into(),
        sigma,
        x0: x0.to_vec(),
    }
}

fn modulated(name: &str, sigma: f64, x0: &[f64], xi0: &[f64]) -> FunctionSpec {
    FunctionSpec::ModulatedGaussian {
        name: name.into(),
        sigma,
        x0: x0.to_vec(),
        xi0: xi0.to_vec(),
    }
}

fn chirp(name: &str, sigma: f64, xi0: &[f64], rate: f64) -> FunctionSpec {
    FunctionSpec::ChirpTruncated {
        name: name.into(),
        sigma,
        x0: Vec::new(),
        xi0: xi0.to_vec(),
        rate,
    }
}

fn random(name: &str, seed: u64) -> FunctionSpec {
    FunctionSpec::RandomBandlimited {
        name: name.into(),
        seed,
        terms: 3,
    }
}

/// Default catalog for the default grids of dimension 1 and 2.
pub fn default_specs(dim: usize) -> Vec<FunctionSpec> {
    match dim {
        1 => vec![
            gauss("gaussian", 1.0, &[]),
            gauss("gaussian-wide", 4.0, &[]),
            gauss("gaussian-shifted", 1.0, &[15.0]),
            gauss("gaussian-narrow", 0.75, &[]),
            modulated("modulated-5", 1.5, &[-4.0], &[5.0]),
            modulated("modulated-m6.5", 2.0, &[10.0], &[-6.5]),
            modulated("modulated-3.25", 1.2, &[], &[3.25]),
            modulated("modulated-8", 3.0, &[-12.0], &[8.0]),
            chirp("chirp-a", 2.0, &[], 0.2),
            chirp("chirp-b", 1.5, &[1.5], 0.3),
            random("random-1", 1),
            random("random-2", 2),
            random("random-3", 3),
            random("random-4", 4),
        ],
        2 => vec![
            gauss("gaussian", 1.0, &[]),
            gauss("gaussian-shifted", 1.3, &[2.0, -3.0]),
            modulated("modulated-a", 1.5, &[], &[2.0, 1.0]),
            modulated("modulated-b", 1.6, &[0.0, -2.0], &[-2.5, 0.0]),
            modulated("modulated-c", 1.8, &[], &[1.5, -2.5]),
            chirp("chirp", 1.5, &[], 0.1),
            random("random-11", 11),
            random("random-12", 12),
        ],
        _ => Vec::new(),
    }
}

fn padded(v: &[f64], dim: usize) -> Result<Vec<f64>> {
    match v.len() {
        0 => Ok(vec![0.0; dim]),
        n if n == dim => Ok(v.to_vec()),
        n => Err(Error::Config(format!("vector of length {n} given for dimension {dim}"))),
    }
}

/// `A e^{−|x−x0|²/(2σ²)} e^{iξ0·x} e^{ia|x−x0|²}`, `A = (2π)^{−d/2}`.
fn wave(grid: TorusGrid, amplitude: Complex64, sigma: f64, x0: &[f64], xi0: &[f64], rate: f64) -> SampledFunction {
    let d = grid.dim();
    let a = amplitude * (2.0 * PI).powf(-(d as f64) / 2.0);
    SampledFunction::from_fn(grid, |x| {
        let mut r2 = 0.0;
        let mut phase = 0.0;
        for i in 0..d {
            let u = x[i] - x0[i];
            r2 += u * u;
            phase += xi0[i] * x[i];
        }
        a * Complex64::from_polar((-r2 / (2.0 * sigma * sigma)).exp(), phase + rate * r2)
    })
}

fn random_terms(grid: TorusGrid, seed: u64, terms: usize, envelope: Envelope) -> Result<SampledFunction> {
    let d = grid.dim();
    let big_l = envelope.half_period;
    let safe_radius = envelope.safe_radius;
    let sigma_min = (SPECTRAL_DECAY / (0.7 * safe_radius)).max(1.2);
    let sigma_max = ((big_l - 1.0) / (SPATIAL_DECAY + 1.0)).min(2.5);
    let xi_bound = (safe_radius - SPECTRAL_DECAY / sigma_min - 0.3) / (d as f64).sqrt();
    let x_bound = big_l - SPATIAL_DECAY * sigma_max - 0.5;
    if sigma_max < sigma_min || xi_bound <= 0.0 || x_bound <= 0.0 {
        return Err(Error::Config(format!(
            "grid too small for random band-limited functions (safe radius {safe_radius}, L = {big_l})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = SampledFunction::zeros(grid);
    for _ in 0..terms {
        let amp = Complex64::from_polar(rng.gen_range(0.5..1.5), rng.gen_range(-PI..PI));
        let sigma = rng.gen_range(sigma_min..sigma_max);
        let x0: Vec<f64> = (0..d).map(|_| rng.gen_range(-x_bound..x_bound)).collect();
        let xi0: Vec<f64> = (0..d).map(|_| rng.gen_range(-xi_bound..xi_bound)).collect();
        out = out.add(&wave(grid, amp, sigma, &x0, &xi0, 0.0))?;
    }
    Ok(out)
}

/// Samples one spec on `grid` without decay validation.
pub fn sample(spec: &FunctionSpec, grid: TorusGrid, envelope: Envelope) -> Result<SampledFunction> {
    let d = grid.dim();
    let one = Complex64::new(1.0, 0.0);
    let check_sigma = |s: f64| {
        if s > 0.0 && s.is_finite() {
            Ok(())
        } else {
            Err(Error::Config(format!("width {s} must be positive")))
        }
    };
    match spec {
        FunctionSpec::Gaussian { sigma, x0, .. } => {
            check_sigma(*sigma)?;
            Ok(wave(grid, one, *sigma, &padded(x0, d)?, &vec![0.0; d], 0.0))
        }
        FunctionSpec::ModulatedGaussian { sigma, x0, xi0, .. } => {
            check_sigma(*sigma)?;
            Ok(wave(grid, one, *sigma, &padded(x0, d)?, &padded(xi0, d)?, 0.0))
        }
        FunctionSpec::ChirpTruncated {
            sigma, x0, xi0, rate, ..
        } => {
            check_sigma(*sigma)?;
            Ok(wave(grid, one, *sigma, &padded(x0, d)?, &padded(xi0, d)?, *rate))
        }
        FunctionSpec::RandomBandlimited { seed, terms, .. } => random_terms(grid, *seed, *terms, envelope),
    }
}

/// Largest sample on the faces `x_i = −L`, relative to the peak.
pub fn boundary_ratio(f: &SampledFunction) -> f64 {
    let grid = f.grid();
    let peak = f.max_abs();
    if peak == 0.0 {
        return 0.0;
    }
    let d = grid.dim();
    f.values()
        .iter()
        .enumerate()
        .filter(|(i, _)| grid.unflatten(*i)[..d].contains(&0))
        .map(|(_, v)| v.norm())
        .fold(0.0, f64::max)
        / peak
}

/// Samples every spec and enforces spatial and spectral decay on `grid`
/// and inside the envelope's spectral radius.
pub fn generate_catalog(specs: &[FunctionSpec], grid: TorusGrid, envelope: Envelope) -> Result<Vec<CatalogFunction>> {
    let safe_radius = envelope.safe_radius;
    let mut out = Vec::with_capacity(specs.len());
    for spec in specs {
        let samples = sample(spec, grid, envelope)?;
        let boundary = boundary_ratio(&samples);
        if boundary > BOUNDARY_TOL {
            return Err(Error::Config(format!(
                "{}: boundary samples at {boundary:e} of the peak",
                spec.name()
            )));
        }
        let tail = forward_fourier(&samples)?.relative_tail_outside(safe_radius);
        if tail > SPECTRAL_TOL {
            return Err(Error::Config(format!(
                "{}: spectrum outside |xi| <= {safe_radius} at {tail:e} of the peak",
                spec.name()
            )));
        }
        out.push(CatalogFunction {
            spec: spec.clone(),
            samples,
        });
    }
    Ok(out)
}
