//! Periodic sampling grid, sampled functions and the discrete Fourier pair.
//!
//! The domain is the torus `[-L, L)^d` with `L = πP` for an integer `P`, so
//! the frequency lattice `ξ_m = m / P` contains every integer point that a
//! uniform partition is centred on. Spatial samples sit at
//! `x_n = (n - N/2)·h`, `h = 2L/N`, and are stored row-major with the last
//! axis fastest. Spectra use FFT ordering per axis: slot `j` holds
//! `m = j` for `j < N/2` and `m = j - N` otherwise.

mod fourier;
pub mod io;

pub use fourier::{dft_oracle, forward_fourier, inverse_fourier, inverse_fourier_sparse, ORACLE_LIMIT};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::MAX_DIM;

/// Highest grid dimension supported by the transforms.
pub const MAX_GRID_DIM: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusGrid {
    dim: usize,
    periods: u32,
    samples: usize,
}

impl TorusGrid {
    /// `periods` is `P = L/π`; `samples` is `N`, the points per axis.
    pub fn new(dim: usize, periods: u32, samples: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_GRID_DIM {
            return Err(Error::InvalidGrid(format!(
                "dimension {dim} outside 1..={MAX_GRID_DIM}"
            )));
        }
        if periods == 0 {
            return Err(Error::InvalidGrid("L/π must be a positive integer".into()));
        }
        if samples < 4 || samples % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "samples per axis must be even and at least 4, got {samples}"
            )));
        }
        if samples.checked_pow(dim as u32).is_none() {
            return Err(Error::InvalidGrid("grid size overflows usize".into()));
        }
        Ok(Self {
            dim,
            periods,
            samples,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `P = L/π`.
    pub fn periods(&self) -> u32 {
        self.periods
    }

    /// Samples per axis.
    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn half_period(&self) -> f64 {
        std::f64::consts::PI * self.periods as f64
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_period() / self.samples as f64
    }

    /// Frequency lattice spacing `π/L = 1/P`.
    pub fn freq_spacing(&self) -> f64 {
        1.0 / self.periods as f64
    }

    /// Largest per-axis frequency magnitude, `πN/(2L)`.
    pub fn nyquist(&self) -> f64 {
        self.samples as f64 / (2.0 * self.periods as f64)
    }

    /// Total number of samples `N^d`.
    pub fn len(&self) -> usize {
        self.samples.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight `h^d` of one spatial cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Volume `(π/L)^d` of one frequency-lattice cell.
    pub fn dual_cell_volume(&self) -> f64 {
        self.freq_spacing().powi(self.dim as i32)
    }

    /// Per-axis grid slots of a flat index, last axis fastest.
    pub fn unflatten(&self, mut flat: usize) -> [usize; MAX_DIM] {
        let mut out = [0; MAX_DIM];
        for a in (0..self.dim).rev() {
            out[a] = flat % self.samples;
            flat /= self.samples;
        }
        out
    }

    pub fn flatten(&self, slots: &[usize]) -> usize {
        slots
            .iter()
            .take(self.dim)
            .fold(0, |acc, &s| acc * self.samples + s)
    }

    /// Spatial position of a flat sample index.
    pub fn position(&self, flat: usize) -> [f64; MAX_DIM] {
        let slots = self.unflatten(flat);
        let h = self.spacing();
        let half = (self.samples / 2) as f64;
        let mut x = [0.0; MAX_DIM];
        for a in 0..self.dim {
            x[a] = (slots[a] as f64 - half) * h;
        }
        x
    }

    /// Integer lattice coordinates `m` of a flat spectrum slot (`ξ = m/P`).
    pub fn freq_index(&self, flat: usize) -> [i64; MAX_DIM] {
        let slots = self.unflatten(flat);
        let n = self.samples as i64;
        let mut m = [0; MAX_DIM];
        for a in 0..self.dim {
            let j = slots[a] as i64;
            m[a] = if j < n / 2 { j } else { j - n };
        }
        m
    }

    /// Frequency `ξ` of a flat spectrum slot.
    pub fn frequency(&self, flat: usize) -> [f64; MAX_DIM] {
        let m = self.freq_index(flat);
        let dk = self.freq_spacing();
        let mut xi = [0.0; MAX_DIM];
        for a in 0..self.dim {
            xi[a] = m[a] as f64 * dk;
        }
        xi
    }

    /// Squared frequency magnitude in lattice units, `|m|^2 = P^2 |ξ|^2`.
    pub fn freq_norm_sq_units(&self, flat: usize) -> i64 {
        let m = self.freq_index(flat);
        m[..self.dim].iter().map(|v| v * v).sum()
    }

    /// Flat slot of lattice coordinates `m`, or `None` outside `[-N/2, N/2)`.
    pub fn slot_of_freq(&self, m: &[i64]) -> Option<usize> {
        let n = self.samples as i64;
        let mut flat = 0usize;
        for &v in m.iter().take(self.dim) {
            if v < -n / 2 || v >= n / 2 {
                return None;
            }
            let j = if v < 0 { v + n } else { v };
            flat = flat * self.samples + j as usize;
        }
        Some(flat)
    }

    /// Fails unless every per-axis frequency up to `reach` is on the lattice.
    pub fn ensure_frequency_room(&self, reach: f64) -> Result<()> {
        // the largest representable positive frequency is (N/2 - 1)/P
        let top = (self.samples as f64 / 2.0 - 1.0) * self.freq_spacing();
        if reach > top {
            return Err(Error::Aliasing(format!(
                "need frequencies up to {reach}, lattice reaches {top} (N = {}, P = {})",
                self.samples, self.periods
            )));
        }
        Ok(())
    }
}

/// `max |v|`, through squared moduli unless they under- or overflow.
pub fn max_modulus(values: &[Complex64]) -> f64 {
    let sq = values.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
    if sq.is_finite() && sq > 1e-290 {
        sq.sqrt()
    } else {
        values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Complex samples on a [`TorusGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    grid: TorusGrid,
    values: Vec<Complex64>,
}

impl SampledFunction {
    pub fn new(grid: TorusGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Samples `f` at every grid position.
    pub fn from_fn(grid: TorusGrid, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let d = grid.dim();
        let values = (0..grid.len())
            .map(|i| {
                let x = grid.position(i);
                f(&x[..d])
            })
            .collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        max_modulus(&self.values)
    }

    /// Plain Euclidean norm of the sample vector (no quadrature weight).
    pub fn l2_samples(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        ensure_same_grid(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        ensure_same_grid(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// `‖self − other‖₂ / ‖other‖₂` on raw samples; 0 when both vanish.
    pub fn relative_l2_error(&self, reference: &Self) -> Result<f64> {
        let diff = self.sub(reference)?.l2_samples();
        let base = reference.l2_samples();
        Ok(if base == 0.0 {
            diff
        } else {
            diff / base
        })
    }
}

/// Fourier coefficients over the frequency lattice of a [`TorusGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    grid: TorusGrid,
    coefficients: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: TorusGrid, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() != grid.len() {
            return Err(Error::Shape {
                expected: grid.len(),
                got: coefficients.len(),
            });
        }
        Ok(Self { grid, coefficients })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            coefficients: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Evaluates `g(ξ)` at every lattice frequency.
    pub fn from_fn(grid: TorusGrid, g: impl Fn(&[f64]) -> Complex64) -> Self {
        let d = grid.dim();
        let coefficients = (0..grid.len())
            .map(|i| {
                let xi = grid.frequency(i);
                g(&xi[..d])
            })
            .collect();
        Self { grid, coefficients }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.coefficients
    }

    pub fn max_abs(&self) -> f64 {
        max_modulus(&self.coefficients)
    }

    /// Largest `|F(ξ)|` over lattice points with `|ξ| > radius`, relative to
    /// the overall maximum. Zero spectra report 0.
    pub fn relative_tail_outside(&self, radius: f64) -> f64 {
        self.relative_tail_outside_ball(&[0.0; MAX_DIM][..self.grid.dim()], radius)
    }

    /// As [`Self::relative_tail_outside`] but for the ball `B̄_radius(center)`.
    pub fn relative_tail_outside_ball(&self, center: &[f64], radius: f64) -> f64 {
        let peak = self.max_abs();
        if peak == 0.0 {
            return 0.0;
        }
        let d = self.grid.dim();
        let n = self.grid.samples;
        let dk = self.grid.freq_spacing();
        let axis: Vec<f64> = (0..n)
            .map(|j| if j < n / 2 { j as f64 } else { j as f64 - n as f64 } * dk)
            .collect();
        // small slack so lattice points on the sphere count as inside
        let r2 = radius * radius * (1.0 + 1e-12);
        let last = center[d - 1];
        let mut tail_sq: f64 = 0.0;
        for (r, row) in self.coefficients.chunks(n).enumerate() {
            let lead = self.grid.unflatten(r * n);
            let partial: f64 = (0..d - 1).map(|a| (axis[lead[a]] - center[a]).powi(2)).sum();
            for (c, xi) in row.iter().zip(&axis) {
                let v = c.norm_sqr();
                if v > tail_sq && partial + (xi - last).powi(2) > r2 {
                    tail_sq = v;
                }
            }
        }
        tail_sq.sqrt() / peak
    }
}

pub(crate) fn ensure_same_grid(a: &TorusGrid, b: &TorusGrid) -> Result<()> {
    if a != b {
        return Err(Error::GridMismatch(format!("{a:?} vs {b:?}")));
    }
    Ok(())
}
