//! Frequency-localised multipliers `□_k`, `Δ_j` and the analysis/synthesis
//! pair built from them.
//!
//! All operators act pointwise on the frequency lattice. Inputs must be
//! band-limited to the family's safe radius; pieces whose sup norm falls
//! below `DROP_THRESHOLD · ‖f‖∞` are omitted so sequences stay finite.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{
    ensure_same_grid, forward_fourier, inverse_fourier, inverse_fourier_sparse, io as grid_io, SampledFunction, Spectrum,
    TorusGrid,
};
use crate::lattice::LatticeIndex;
use crate::partitions::{
    dyadic_neighbors, extended_neighbor_set, neighbor_set, FamilyKind, SparseSymbol, SymbolFamily,
};

/// Relative sup-norm below which a piece is dropped.
pub const DROP_THRESHOLD: f64 = 1e-14;
/// Largest relative spectral mass tolerated outside the safe radius.
pub const TRUNCATION_TOL: f64 = 1e-13;
/// Largest relative spectral mass of a piece outside `B̄_{3√d}(k)`.
pub const SUPPORT_TOL: f64 = 1e-12;

/// Finitely supported sequence `(f_k)_k` of sampled functions.
#[derive(Clone, Debug, PartialEq)]
pub struct PieceSequence {
    grid: TorusGrid,
    kind: FamilyKind,
    entries: BTreeMap<LatticeIndex, SampledFunction>,
}

impl PieceSequence {
    pub fn new(grid: TorusGrid, kind: FamilyKind) -> Self {
        Self {
            grid,
            kind,
            entries: BTreeMap::new(),
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: &LatticeIndex) -> Option<&SampledFunction> {
        self.entries.get(index)
    }

    /// Inserts or replaces an entry; the piece must live on the same grid.
    pub fn insert(&mut self, index: LatticeIndex, piece: SampledFunction) -> Result<()> {
        ensure_same_grid(&self.grid, piece.grid())?;
        self.entries.insert(index, piece);
        Ok(())
    }

    pub fn remove(&mut self, index: &LatticeIndex) -> Option<SampledFunction> {
        self.entries.remove(index)
    }

    pub fn indices(&self) -> Vec<LatticeIndex> {
        self.entries.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LatticeIndex, &SampledFunction)> {
        self.entries.iter()
    }

    /// Largest raw-sample `ℓ²` distance between corresponding entries, with
    /// missing entries read as zero.
    pub fn max_entry_difference(&self, other: &PieceSequence) -> Result<f64> {
        ensure_same_grid(&self.grid, &other.grid)?;
        let mut worst: f64 = 0.0;
        for (k, a) in &self.entries {
            let d = match other.entries.get(k) {
                Some(b) => a.sub(b)?.l2_samples(),
                None => a.l2_samples(),
            };
            worst = worst.max(d);
        }
        for (k, b) in &other.entries {
            if !self.entries.contains_key(k) {
                worst = worst.max(b.l2_samples());
            }
        }
        Ok(worst)
    }

    /// Plain sum `Σ_k f_k` in index order.
    pub fn plain_sum(&self) -> SampledFunction {
        let mut out = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        for piece in self.entries.values() {
            for (o, v) in out.iter_mut().zip(piece.values()) {
                *o += v;
            }
        }
        SampledFunction::new(self.grid, out).expect("length matches grid")
    }

    /// Directory of grid-binary files named by index, plus `manifest.json`.
    pub fn export(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        for (k, piece) in &self.entries {
            grid_io::save_function(&dir.join(format!("{}.bin", k.label())), piece)?;
        }
        let manifest = serde_json::json!({
            "kind": self.kind,
            "indices": self.indices(),
        });
        fs::write(dir.join("manifest.json"), serde_json::to_vec_pretty(&manifest)?)?;
        Ok(())
    }

    pub fn import(dir: &Path) -> Result<Self> {
        #[derive(serde::Deserialize)]
        struct Manifest {
            kind: FamilyKind,
            indices: Vec<LatticeIndex>,
        }
        let manifest: Manifest = serde_json::from_slice(&fs::read(dir.join("manifest.json"))?)?;
        let mut grid = None;
        let mut entries = BTreeMap::new();
        for k in manifest.indices {
            let piece = grid_io::load_function(&dir.join(format!("{}.bin", k.label())))?;
            match grid {
                None => grid = Some(*piece.grid()),
                Some(g) => ensure_same_grid(&g, piece.grid())?,
            }
            entries.insert(k, piece);
        }
        let grid = grid.ok_or_else(|| Error::Format("empty manifest carries no grid".into()))?;
        Ok(Self {
            grid,
            kind: manifest.kind,
            entries,
        })
    }
}

fn expect_kind(family: &SymbolFamily, kind: FamilyKind) -> Result<()> {
    if family.kind() != kind {
        return Err(Error::KindMismatch {
            expected: kind.name(),
            found: family.kind().name(),
        });
    }
    Ok(())
}

fn check_band_limit(spectrum: &Spectrum, family: &SymbolFamily) -> Result<()> {
    let radius = family.safe_radius();
    let tail = spectrum.relative_tail_outside(radius);
    if tail > TRUNCATION_TOL {
        return Err(Error::Truncation { tail, radius });
    }
    Ok(())
}

fn masked(spectrum: &Spectrum, symbol: &SparseSymbol) -> Spectrum {
    let mut out = Spectrum::zeros(*spectrum.grid());
    let src = spectrum.coefficients();
    let dst = out.coefficients_mut();
    for &(slot, v) in symbol {
        dst[slot] = src[slot] * v;
    }
    out
}

/// Upper bound for `‖F^{-1}(σ·F)‖∞` from the triangle inequality.
fn sup_bound(spectrum: &Spectrum, symbol: &SparseSymbol) -> f64 {
    let grid = spectrum.grid();
    let c = (2.0 * PI).powf(-(grid.dim() as f64) / 2.0) * grid.dual_cell_volume();
    let src = spectrum.coefficients();
    c * symbol.iter().map(|&(s, v)| (src[s] * v).norm()).sum::<f64>()
}

fn apply_symbol(f: &SampledFunction, index: &LatticeIndex, family: &SymbolFamily) -> Result<SampledFunction> {
    ensure_same_grid(f.grid(), family.grid())?;
    let symbol = family.symbol(index)?;
    let spectrum = forward_fourier(f)?;
    check_band_limit(&spectrum, family)?;
    inverse_fourier(&masked(&spectrum, &symbol))
}

/// `□_k f = F^{-1}(σ_k · Ff)`.
pub fn box_operator(f: &SampledFunction, k: &LatticeIndex, family: &SymbolFamily) -> Result<SampledFunction> {
    expect_kind(family, FamilyKind::Uniform)?;
    apply_symbol(f, k, family)
}

/// `Δ_j f = F^{-1}(φ_j · Ff)`.
pub fn dyadic_operator(f: &SampledFunction, j: u32, family: &SymbolFamily) -> Result<SampledFunction> {
    expect_kind(family, FamilyKind::Dyadic)?;
    apply_symbol(f, &LatticeIndex::scalar(j as i32), family)
}

/// Calls `visit` with every non-negligible piece of `f` in index order,
/// without keeping the pieces.
pub fn visit_pieces(
    f: &SampledFunction,
    family: &SymbolFamily,
    mut visit: impl FnMut(LatticeIndex, SampledFunction) -> Result<()>,
) -> Result<()> {
    ensure_same_grid(f.grid(), family.grid())?;
    let spectrum = forward_fourier(f)?;
    check_band_limit(&spectrum, family)?;
    let threshold = DROP_THRESHOLD * f.max_abs();
    for index in family.indices() {
        let symbol = family.extended_symbol(index);
        if sup_bound(&spectrum, &symbol) <= threshold {
            continue;
        }
        let src = spectrum.coefficients();
        let entries: Vec<_> = symbol.iter().map(|&(slot, v)| (slot, src[slot] * v)).collect();
        let piece = inverse_fourier_sparse(spectrum.grid(), &entries)?;
        if piece.max_abs() > threshold {
            visit(*index, piece)?;
        }
    }
    Ok(())
}

fn decompose(f: &SampledFunction, family: &SymbolFamily) -> Result<PieceSequence> {
    let mut out = PieceSequence::new(*f.grid(), family.kind());
    visit_pieces(f, family, |k, piece| {
        out.entries.insert(k, piece);
        Ok(())
    })?;
    Ok(out)
}

/// `S f = (□_k f)_k` over the family indices.
pub fn analysis(f: &SampledFunction, family: &SymbolFamily) -> Result<PieceSequence> {
    expect_kind(family, FamilyKind::Uniform)?;
    decompose(f, family)
}

/// `S f = (Δ_j f)_{j=0..J}`.
pub fn besov_analysis(f: &SampledFunction, family: &SymbolFamily) -> Result<PieceSequence> {
    expect_kind(family, FamilyKind::Dyadic)?;
    decompose(f, family)
}

/// Extended coretraction `(S f)(k) = Σ_{l∈Λ'} □_k f_{k+l}` for a
/// re-splitting `f = Σ_l f_l` with `supp F f_l ⊆ B̄_{3√d}(l)`.
pub fn analysis_extended(ps: &PieceSequence, family: &SymbolFamily) -> Result<PieceSequence> {
    expect_kind(family, FamilyKind::Uniform)?;
    if ps.kind != FamilyKind::Uniform {
        return Err(Error::KindMismatch {
            expected: FamilyKind::Uniform.name(),
            found: ps.kind.name(),
        });
    }
    ensure_same_grid(ps.grid(), family.grid())?;
    let grid = *ps.grid();
    let d = grid.dim();
    let radius = 3.0 * (d as f64).sqrt();

    let mut spectra = BTreeMap::new();
    let mut total = Spectrum::zeros(grid);
    for (k, piece) in &ps.entries {
        if k.dim() != d {
            return Err(Error::IndexOutOfFamily(k.to_string()));
        }
        let spec = forward_fourier(piece)?;
        let mut center = [0.0; crate::lattice::MAX_DIM];
        for (a, c) in k.coords().iter().enumerate() {
            center[a] = *c as f64;
        }
        let tail = spec.relative_tail_outside_ball(&center[..d], radius);
        if tail > SUPPORT_TOL {
            return Err(Error::Support {
                index: k.to_string(),
                tail,
                radius,
            });
        }
        for (t, v) in total.coefficients_mut().iter_mut().zip(spec.coefficients()) {
            *t += v;
        }
        spectra.insert(*k, spec);
    }
    check_band_limit(&total, family)?;

    let threshold = DROP_THRESHOLD * ps.plain_sum().max_abs();
    let offsets = extended_neighbor_set(d);
    let mut out = PieceSequence::new(grid, FamilyKind::Uniform);
    for k in family.indices() {
        let contributing: Vec<&Spectrum> = offsets
            .offsets()
            .iter()
            .filter_map(|l| spectra.get(&k.offset(l)))
            .collect();
        if contributing.is_empty() {
            continue;
        }
        let entries: Vec<_> = family
            .extended_symbol(k)
            .iter()
            .map(|&(slot, v)| {
                let mut s = Complex64::new(0.0, 0.0);
                for spec in &contributing {
                    s += spec.coefficients()[slot];
                }
                (slot, s * v)
            })
            .collect();
        let piece = inverse_fourier_sparse(&grid, &entries)?;
        if piece.max_abs() > threshold {
            out.entries.insert(*k, piece);
        }
    }
    Ok(out)
}

/// Neighbour symbols used by the synthesis operator for piece `k`.
fn synthesis_symbols(family: &SymbolFamily, k: &LatticeIndex) -> Result<Vec<SparseSymbol>> {
    if !family.contains(k) {
        return Err(Error::IndexOutOfFamily(format!(
            "{k} (synthesis requires every piece index inside the family truncation)"
        )));
    }
    Ok(match family.kind() {
        FamilyKind::Uniform => neighbor_set(family.grid().dim())
            .offsets()
            .iter()
            .map(|l| family.extended_symbol(&k.offset(l)))
            .collect(),
        FamilyKind::Dyadic => dyadic_neighbors(k.coords()[0] as u32)
            .scales()
            .iter()
            .map(|&l| family.extended_symbol(&LatticeIndex::scalar(l as i32)))
            .collect(),
    })
}

fn synthesize(ps: &PieceSequence, family: &SymbolFamily, order: &[LatticeIndex]) -> Result<SampledFunction> {
    if ps.kind != family.kind() {
        return Err(Error::KindMismatch {
            expected: family.kind().name(),
            found: ps.kind.name(),
        });
    }
    ensure_same_grid(ps.grid(), family.grid())?;
    let mut total = Spectrum::zeros(*ps.grid());
    for k in order {
        let piece = ps
            .entries
            .get(k)
            .ok_or_else(|| Error::IndexOutOfFamily(format!("{k} is not an entry of the sequence")))?;
        let spec = forward_fourier(piece)?;
        let dst = total.coefficients_mut();
        for symbol in synthesis_symbols(family, k)? {
            for (slot, v) in symbol {
                dst[slot] += spec.coefficients()[slot] * v;
            }
        }
    }
    inverse_fourier(&total)
}

/// `R(f_k) = Σ_k Σ_{l∈Λ} □_{k+l} f_k`, accumulated in lexicographic order.
pub fn synthesis(ps: &PieceSequence, family: &SymbolFamily) -> Result<SampledFunction> {
    expect_kind(family, FamilyKind::Uniform)?;
    synthesize(ps, family, &ps.indices())
}

/// [`synthesis`] or [`besov_synthesis`] accumulated in the given order,
/// which must be a permutation of the sequence's indices.
pub fn synthesis_ordered(
    ps: &PieceSequence,
    family: &SymbolFamily,
    order: &[LatticeIndex],
) -> Result<SampledFunction> {
    let mut sorted = order.to_vec();
    sorted.sort();
    sorted.dedup();
    if sorted != ps.indices() || order.len() != ps.len() {
        return Err(Error::Format("order is not a permutation of the sequence indices".into()));
    }
    synthesize(ps, family, order)
}

/// `R(f_k) = Σ_k Σ_{l∈Λ_k} Δ_l f_k`.
pub fn besov_synthesis(ps: &PieceSequence, family: &SymbolFamily) -> Result<SampledFunction> {
    expect_kind(family, FamilyKind::Dyadic)?;
    synthesize(ps, family, &ps.indices())
}

/// Splits `f` with the symbols of any uniform family, for instance a
/// re-splitting partition with wider bumps.
pub fn split(f: &SampledFunction, family: &SymbolFamily) -> Result<PieceSequence> {
    expect_kind(family, FamilyKind::Uniform)?;
    decompose(f, family)
}
