use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use super::{SampledFunction, Spectrum, TorusGrid};
use crate::error::{Error, Result};

/// Largest grid (`N^d`) accepted by [`dft_oracle`].
pub const ORACLE_LIMIT: usize = 1 << 16;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Riemann-sum Fourier transform with the symmetric normalisation,
/// `F(ξ) = (2π)^{-d/2} h^d Σ_x f(x) e^{-i⟨ξ,x⟩}`.
pub fn forward_fourier(f: &SampledFunction) -> Result<Spectrum> {
    let grid = *f.grid();
    check_len(&grid, f.values().len())?;
    let mut buf = f.values().to_vec();
    transform_nd(&grid, &mut buf, FftDirection::Forward);
    let scale = (2.0 * PI).powf(-(grid.dim() as f64) / 2.0) * grid.cell_volume();
    apply_phase(&grid, &mut buf, scale);
    Spectrum::new(grid, buf)
}

/// Inverse of [`forward_fourier`]: `f(x) = (2π)^{-d/2} (π/L)^d Σ_ξ F(ξ) e^{i⟨ξ,x⟩}`.
pub fn inverse_fourier(spectrum: &Spectrum) -> Result<SampledFunction> {
    let grid = *spectrum.grid();
    check_len(&grid, spectrum.coefficients().len())?;
    let mut buf = spectrum.coefficients().to_vec();
    apply_phase(&grid, &mut buf, 1.0);
    transform_nd(&grid, &mut buf, FftDirection::Inverse);
    let scale = (2.0 * PI).powf(-(grid.dim() as f64) / 2.0) * grid.dual_cell_volume();
    for v in &mut buf {
        *v *= scale;
    }
    SampledFunction::new(grid, buf)
}

/// [`inverse_fourier`] of a spectrum given by its non-zero entries; rows
/// of the last axis holding no entry are not transformed.
pub fn inverse_fourier_sparse(grid: &TorusGrid, entries: &[(usize, Complex64)]) -> Result<SampledFunction> {
    let n = grid.samples();
    let mut buf = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut rows = vec![false; grid.len() / n];
    for &(slot, v) in entries {
        let slots = grid.unflatten(slot);
        let parity: usize = slots[..grid.dim()].iter().sum();
        buf[slot] = if parity % 2 == 0 { v } else { -v };
        rows[slot / n] = true;
    }
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft(n, FftDirection::Inverse));
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for (row, used) in buf.chunks_mut(n).zip(&rows) {
        if *used {
            fft.process_with_scratch(row, &mut scratch);
        }
    }
    other_axes(grid, &mut buf, FftDirection::Inverse);
    let scale = (2.0 * PI).powf(-(grid.dim() as f64) / 2.0) * grid.dual_cell_volume();
    for v in &mut buf {
        *v *= scale;
    }
    SampledFunction::new(*grid, buf)
}

/// Direct `O(N^{2d})` evaluation of the same sum as [`forward_fourier`],
/// using physical coordinates throughout.
pub fn dft_oracle(f: &SampledFunction) -> Result<Spectrum> {
    let grid = *f.grid();
    check_len(&grid, f.values().len())?;
    if grid.len() > ORACLE_LIMIT {
        return Err(Error::OracleTooLarge {
            points: grid.len(),
            limit: ORACLE_LIMIT,
        });
    }
    let d = grid.dim();
    let scale = (2.0 * PI).powf(-(d as f64) / 2.0) * grid.cell_volume();
    let positions: Vec<_> = (0..grid.len()).map(|i| grid.position(i)).collect();
    let mut out = Vec::with_capacity(grid.len());
    for slot in 0..grid.len() {
        let xi = grid.frequency(slot);
        let mut acc = Complex64::new(0.0, 0.0);
        for (v, x) in f.values().iter().zip(&positions) {
            let angle: f64 = (0..d).map(|a| xi[a] * x[a]).sum();
            acc += v * Complex64::from_polar(1.0, -angle);
        }
        out.push(acc * scale);
    }
    Spectrum::new(grid, out)
}

fn check_len(grid: &TorusGrid, len: usize) -> Result<()> {
    if len != grid.len() {
        return Err(Error::Shape {
            expected: grid.len(),
            got: len,
        });
    }
    Ok(())
}

/// Multiplies by `scale · (-1)^{Σ_a j_a}`, the phase `e^{iξL}` of each axis
/// (the samples start at `x = -L`).
fn apply_phase(grid: &TorusGrid, buf: &mut [Complex64], scale: f64) {
    let n = grid.samples();
    // rows along the last axis
    for (r, row) in buf.chunks_mut(n).enumerate() {
        let lead = grid.unflatten(r * n);
        let parity: usize = lead[..grid.dim()].iter().sum();
        let s0 = if parity % 2 == 0 { scale } else { -scale };
        for (j, v) in row.iter_mut().enumerate() {
            *v *= if j % 2 == 0 { s0 } else { -s0 };
        }
    }
}

/// Unnormalised multi-dimensional DFT, one axis at a time.
fn transform_nd(grid: &TorusGrid, buf: &mut [Complex64], direction: FftDirection) {
    let n = grid.samples();
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft(n, direction));
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    // last axis is contiguous, all rows in one batch
    fft.process_with_scratch(buf, &mut scratch);
    other_axes(grid, buf, direction);
}

/// Axes before the last: each block is an `n × stride` matrix; transpose,
/// transform its rows, transpose back.
fn other_axes(grid: &TorusGrid, buf: &mut [Complex64], direction: FftDirection) {
    let n = grid.samples();
    let d = grid.dim();
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft(n, direction));
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for axis in (0..d.saturating_sub(1)).rev() {
        let stride = n.pow((d - 1 - axis) as u32);
        let mut block = vec![Complex64::new(0.0, 0.0); n * stride];
        for chunk in buf.chunks_mut(n * stride) {
            transpose(chunk, &mut block, n, stride);
            fft.process_with_scratch(&mut block, &mut scratch);
            transpose(&block, chunk, stride, n);
        }
    }
}

/// `dst[c * rows + r] = src[r * cols + c]`, in tiles.
fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    const TILE: usize = 16;
    for r0 in (0..rows).step_by(TILE) {
        for c0 in (0..cols).step_by(TILE) {
            for r in r0..(r0 + TILE).min(rows) {
                for c in c0..(c0 + TILE).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}
