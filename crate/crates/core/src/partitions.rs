//! Uniform and dyadic partitions of unity on the frequency lattice, and the
//! neighbour index sets used by the synthesis operators.
//!
//! The uniform family is stored as one stencil of `σ_0` values in lattice
//! units; `σ_k(ξ) = σ_0(ξ − k)` is read off by translation, which makes the
//! translation covariance exact and keeps memory independent of the number
//! of indices.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{io as grid_io, Spectrum, TorusGrid};
use crate::lattice::{self, LatticeIndex, MAX_DIM};

/// Sparse symbol: `(flat spectrum slot, value)` pairs, zero elsewhere.
pub type SparseSymbol = Vec<(usize, f64)>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Uniform,
    Dyadic,
}

impl FamilyKind {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::Uniform => "uniform",
            FamilyKind::Dyadic => "dyadic",
        }
    }
}

/// Mollifier `exp(-1/(1 - t²))` on `t² < 1`.
fn mollifier(t_sq: f64) -> f64 {
    if t_sq < 1.0 {
        (-1.0 / (1.0 - t_sq)).exp()
    } else {
        0.0
    }
}

/// `C^∞` step from 0 (`t <= 0`) to 1 (`t >= 1`).
fn smooth_step(t: f64) -> f64 {
    let psi = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
    let a = psi(t);
    let b = psi(1.0 - t);
    if b == 0.0 {
        1.0
    } else {
        a / (a + b)
    }
}

/// Radial profile of `φ_0` as a function of `|ξ|²`: exactly 1 on `B̄_1`,
/// exactly 0 outside `B_2`, monotone in between.
pub fn dyadic_base(xi_sq: f64) -> f64 {
    if xi_sq <= 1.0 {
        1.0
    } else if xi_sq >= 4.0 {
        0.0
    } else {
        1.0 - smooth_step((xi_sq - 1.0) / 3.0)
    }
}

/// `φ_j` evaluated at `|ξ|²`.
pub fn dyadic_symbol_value(j: u32, xi_sq: f64) -> f64 {
    if j == 0 {
        dyadic_base(xi_sq)
    } else {
        let outer = 4f64.powi(j as i32);
        let inner = 4f64.powi(j as i32 - 1);
        dyadic_base(xi_sq / outer) - dyadic_base(xi_sq / inner)
    }
}

#[derive(Clone, Debug)]
struct Stencil {
    /// Box half-width in lattice units.
    half: i64,
    /// Non-zero `σ_0` values keyed by lattice offset `u` (`ξ = u/P`).
    entries: Vec<([i64; MAX_DIM], f64)>,
}

#[derive(Clone, Debug)]
enum Repr {
    Uniform {
        truncation: u32,
        radius: f64,
        stencil: Stencil,
    },
    Dyadic {
        top: u32,
        supports: Vec<SparseSymbol>,
    },
}

/// Finite family of real multiplier symbols forming a partition of unity.
#[derive(Clone, Debug)]
pub struct SymbolFamily {
    grid: TorusGrid,
    kind: FamilyKind,
    indices: Vec<LatticeIndex>,
    repr: Repr,
}

/// Uniform partition `σ_k(ξ) = ρ(ξ − k) / Σ_j ρ(ξ − j)` with the mollifier
/// bump `ρ` of radius `r`, truncated to `|k|_∞ <= truncation`. `r` defaults
/// to `√d` and must lie in `(√d/2, √d]`.
pub fn build_uniform_partition(
    grid: &TorusGrid,
    truncation: u32,
    bump_radius: Option<f64>,
) -> Result<SymbolFamily> {
    let d = grid.dim() as f64;
    let radius = bump_radius.unwrap_or(d.sqrt());
    let (lower, upper) = (d.sqrt() / 2.0, d.sqrt());
    if !(radius > lower && radius <= upper) {
        return Err(Error::BumpRadius {
            radius,
            lower,
            upper,
        });
    }
    build_translate_partition(grid, truncation, radius)
}

/// Translate-normalised partition with any bump radius in `(√d/2, 3√d]`.
///
/// Radii above `√d` do not give the `σ_k` of the modulation norms, but every
/// symbol is still supported in `B̄_{3√d}(k)`, so the family yields admissible
/// re-splittings `f = Σ_l f_l` for the extended analysis operator.
pub fn build_resplitting_partition(
    grid: &TorusGrid,
    truncation: u32,
    bump_radius: f64,
) -> Result<SymbolFamily> {
    let d = grid.dim() as f64;
    let (lower, upper) = (d.sqrt() / 2.0, 3.0 * d.sqrt());
    if !(bump_radius > lower && bump_radius <= upper) {
        return Err(Error::BumpRadius {
            radius: bump_radius,
            lower,
            upper,
        });
    }
    build_translate_partition(grid, truncation, bump_radius)
}

fn build_translate_partition(
    grid: &TorusGrid,
    truncation: u32,
    radius: f64,
) -> Result<SymbolFamily> {
    let dim = grid.dim();
    let d = dim as f64;
    let k = truncation as f64;
    // all symbols of the family plus one lattice unit of margin
    grid.ensure_frequency_room(k + radius.max(d.sqrt()).ceil() + 1.0)?;
    if grid.nyquist() <= k + d.sqrt() {
        return Err(Error::Aliasing(format!(
            "Nyquist radius {} does not exceed K + sqrt(d) = {}",
            grid.nyquist(),
            k + d.sqrt()
        )));
    }
    let stencil = build_stencil(grid, radius);
    Ok(SymbolFamily {
        grid: *grid,
        kind: FamilyKind::Uniform,
        indices: lattice::cube(dim, truncation as i32),
        repr: Repr::Uniform {
            truncation,
            radius,
            stencil,
        },
    })
}

fn build_stencil(grid: &TorusGrid, radius: f64) -> Stencil {
    let dim = grid.dim();
    let p = grid.periods() as i64;
    let pf = p as f64;
    let rp = radius * pf;
    let half = rp.ceil() as i64;
    // |w|² / (P² r²) for a lattice offset w
    let scale = 1.0 / (pf * pf * radius * radius);
    let bump = |w: &[i64]| -> f64 {
        let w2: i64 = w.iter().map(|v| v * v).sum();
        mollifier(w2 as f64 * scale)
    };

    let side = (2 * half + 1) as usize;
    let mut entries = Vec::new();
    let mut u = [0i64; MAX_DIM];
    let mut w = [0i64; MAX_DIM];
    for flat in 0..side.pow(dim as u32) {
        let mut rem = flat;
        for a in (0..dim).rev() {
            u[a] = (rem % side) as i64 - half;
            rem /= side;
        }
        let numerator = bump(&u[..dim]);
        if numerator == 0.0 {
            continue;
        }
        // translates j with |u/P − j| < r, lexicographic
        let mut lo = [0i64; MAX_DIM];
        let mut hi = [0i64; MAX_DIM];
        for a in 0..dim {
            lo[a] = ((u[a] as f64 - rp) / pf).floor() as i64;
            hi[a] = ((u[a] as f64 + rp) / pf).ceil() as i64;
        }
        let mut j = lo;
        let mut denominator = 0.0;
        'outer: loop {
            for a in 0..dim {
                w[a] = u[a] - j[a] * p;
            }
            denominator += bump(&w[..dim]);
            for a in (0..dim).rev() {
                j[a] += 1;
                if j[a] <= hi[a] {
                    continue 'outer;
                }
                j[a] = lo[a];
            }
            break;
        }
        entries.push((u, numerator / denominator));
    }
    Stencil { half, entries }
}

/// Dyadic partition `φ_0, …, φ_J` with `φ_j = φ_0(2^{-j}·) − φ_0(2^{-j+1}·)`.
pub fn build_dyadic_partition(grid: &TorusGrid, top: u32) -> Result<SymbolFamily> {
    if top > 24 {
        return Err(Error::Aliasing(format!("top scale {top} is unreasonably large")));
    }
    grid.ensure_frequency_room(2f64.powi(top as i32 + 1) + 1.0)?;
    let supports = (0..=top).map(|j| dyadic_support(grid, j)).collect();
    Ok(SymbolFamily {
        grid: *grid,
        kind: FamilyKind::Dyadic,
        indices: (0..=top as i32).map(LatticeIndex::scalar).collect(),
        repr: Repr::Dyadic { top, supports },
    })
}

fn dyadic_support(grid: &TorusGrid, j: u32) -> SparseSymbol {
    let p2 = (grid.periods() as f64).powi(2);
    (0..grid.len())
        .filter_map(|slot| {
            let xi_sq = grid.freq_norm_sq_units(slot) as f64 / p2;
            let v = dyadic_symbol_value(j, xi_sq);
            (v != 0.0).then_some((slot, v))
        })
        .collect()
}

impl SymbolFamily {
    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn indices(&self) -> &[LatticeIndex] {
        &self.indices
    }

    pub fn contains(&self, index: &LatticeIndex) -> bool {
        if index.dim() != self.index_dim() {
            return false;
        }
        match &self.repr {
            Repr::Uniform { truncation, .. } => index.max_abs() <= *truncation as i32,
            Repr::Dyadic { top, .. } => {
                let j = index.coords()[0];
                j >= 0 && j <= *top as i32
            }
        }
    }

    fn index_dim(&self) -> usize {
        match self.kind {
            FamilyKind::Uniform => self.grid.dim(),
            FamilyKind::Dyadic => 1,
        }
    }

    /// `K` for uniform families, `J` for dyadic ones.
    pub fn truncation(&self) -> u32 {
        match &self.repr {
            Repr::Uniform { truncation, .. } => *truncation,
            Repr::Dyadic { top, .. } => *top,
        }
    }

    /// Bump radius `r` of a uniform family.
    pub fn bump_radius(&self) -> Option<f64> {
        match &self.repr {
            Repr::Uniform { radius, .. } => Some(*radius),
            Repr::Dyadic { .. } => None,
        }
    }

    /// Radius of the ball on which the family sums to one: `K − max(r, √d)`
    /// (uniform) or `2^J` (dyadic). Inputs must be band-limited to it.
    pub fn safe_radius(&self) -> f64 {
        match &self.repr {
            Repr::Uniform {
                truncation, radius, ..
            } => *truncation as f64 - radius.max((self.grid.dim() as f64).sqrt()),
            Repr::Dyadic { top, .. } => 2f64.powi(*top as i32),
        }
    }

    /// Centre of `σ_k` in frequency space (uniform) or the origin (dyadic).
    pub fn center(&self, index: &LatticeIndex) -> [f64; MAX_DIM] {
        let mut c = [0.0; MAX_DIM];
        if self.kind == FamilyKind::Uniform {
            for (a, v) in index.coords().iter().enumerate() {
                c[a] = *v as f64;
            }
        }
        c
    }

    /// Sparse symbol of a family index.
    pub fn symbol(&self, index: &LatticeIndex) -> Result<SparseSymbol> {
        if !self.contains(index) {
            return Err(Error::IndexOutOfFamily(index.to_string()));
        }
        Ok(self.extended_symbol(index))
    }

    /// Symbol of any index, inside or beyond the truncation, restricted to the
    /// lattice. Uniform symbols are translates of the stencil; dyadic symbols
    /// are evaluated from the closed form.
    pub fn extended_symbol(&self, index: &LatticeIndex) -> SparseSymbol {
        match &self.repr {
            Repr::Uniform { stencil, .. } => {
                let dim = self.grid.dim();
                let p = self.grid.periods() as i64;
                let mut m = [0i64; MAX_DIM];
                let mut out = Vec::with_capacity(stencil.entries.len());
                for (u, v) in &stencil.entries {
                    for a in 0..dim {
                        m[a] = u[a] + index.coords()[a] as i64 * p;
                    }
                    if let Some(slot) = self.grid.slot_of_freq(&m[..dim]) {
                        out.push((slot, *v));
                    }
                }
                out
            }
            Repr::Dyadic { top, supports } => {
                let j = index.coords()[0];
                if j < 0 {
                    Vec::new()
                } else if j <= *top as i32 {
                    supports[j as usize].clone()
                } else {
                    dyadic_support(&self.grid, j as u32)
                }
            }
        }
    }

    /// `σ_0` at a lattice offset `u` (uniform families only; 0 elsewhere).
    pub fn base_value(&self, offset: &[i64]) -> f64 {
        match &self.repr {
            Repr::Uniform { stencil, .. } => {
                if offset.iter().any(|v| v.abs() > stencil.half) {
                    return 0.0;
                }
                stencil
                    .entries
                    .iter()
                    .find(|(u, _)| &u[..offset.len()] == offset)
                    .map(|(_, v)| *v)
                    .unwrap_or(0.0)
            }
            Repr::Dyadic { .. } => 0.0,
        }
    }

    /// Dense symbol over all lattice slots.
    pub fn dense_symbol(&self, index: &LatticeIndex) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.grid.len()];
        for (slot, v) in self.symbol(index)? {
            out[slot] = v;
        }
        Ok(out)
    }

    /// `Σ_k σ_k(ξ)` over the family at every lattice slot.
    pub fn partition_sum(&self) -> Vec<f64> {
        let mut sum = vec![0.0; self.grid.len()];
        for index in &self.indices {
            for (slot, v) in self.extended_symbol(index) {
                sum[slot] += v;
            }
        }
        sum
    }

    /// Largest `|Σ_k σ_k(ξ) − 1|` over lattice points with `|ξ| <= safe_radius`.
    pub fn max_partition_deviation(&self) -> f64 {
        let sum = self.partition_sum();
        let radius = self.safe_radius();
        let p2 = (self.grid.periods() as f64).powi(2);
        sum.iter()
            .enumerate()
            .filter(|(slot, _)| {
                self.grid.freq_norm_sq_units(*slot) as f64 / p2 <= radius * radius
            })
            .map(|(_, v)| (v - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|Σ_{j<=m} φ_j(ξ) − φ_0(2^{−m}ξ)|` over all `m <= J` and the
    /// whole lattice; zero for uniform families.
    pub fn telescoping_deviation(&self) -> f64 {
        let Repr::Dyadic { top, .. } = &self.repr else {
            return 0.0;
        };
        let p2 = (self.grid.periods() as f64).powi(2);
        let mut partial = vec![0.0; self.grid.len()];
        let mut worst: f64 = 0.0;
        for m in 0..=*top {
            for (slot, v) in self.extended_symbol(&LatticeIndex::scalar(m as i32)) {
                partial[slot] += v;
            }
            let scale = 4f64.powi(m as i32);
            for (slot, v) in partial.iter().enumerate() {
                let xi_sq = self.grid.freq_norm_sq_units(slot) as f64 / p2;
                worst = worst.max((v - dyadic_base(xi_sq / scale)).abs());
            }
        }
        worst
    }

    /// Writes one grid-binary spectrum file per index plus `manifest.json`.
    pub fn export(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        for index in &self.indices {
            let dense: Vec<Complex64> = self
                .dense_symbol(index)?
                .into_iter()
                .map(|v| Complex64::new(v, 0.0))
                .collect();
            let spec = Spectrum::new(self.grid, dense)?;
            grid_io::save_spectrum(&dir.join(format!("{}.bin", index.label())), &spec)?;
        }
        let manifest = serde_json::json!({
            "kind": self.kind,
            "indices": self.indices,
        });
        fs::write(dir.join("manifest.json"), serde_json::to_vec_pretty(&manifest)?)?;
        Ok(())
    }
}

/// Neighbour index sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NeighborSet {
    /// Lattice offsets `l` (uniform decompositions).
    Offsets(Vec<LatticeIndex>),
    /// Absolute scale indices `Λ_k` (dyadic decompositions).
    Scales(Vec<u32>),
}

impl NeighborSet {
    pub fn len(&self) -> usize {
        match self {
            NeighborSet::Offsets(v) => v.len(),
            NeighborSet::Scales(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn offsets(&self) -> &[LatticeIndex] {
        match self {
            NeighborSet::Offsets(v) => v,
            NeighborSet::Scales(_) => &[],
        }
    }

    pub fn scales(&self) -> &[u32] {
        match self {
            NeighborSet::Scales(v) => v,
            NeighborSet::Offsets(_) => &[],
        }
    }

    pub fn contains_offset(&self, l: &LatticeIndex) -> bool {
        self.offsets().contains(l)
    }
}

/// `Λ = {l ∈ Z^d : |l| <= 2√d}`.
pub fn neighbor_set(dim: usize) -> NeighborSet {
    NeighborSet::Offsets(lattice::ball(dim, 4 * dim as i64))
}

/// `Λ' = {l ∈ Z^d : |l| <= 4√d}`.
pub fn extended_neighbor_set(dim: usize) -> NeighborSet {
    NeighborSet::Offsets(lattice::ball(dim, 16 * dim as i64))
}

/// `Λ_0 = {0, 1}`, `Λ_k = {k − 1, k, k + 1}`.
pub fn dyadic_neighbors(k: u32) -> NeighborSet {
    if k == 0 {
        NeighborSet::Scales(vec![0, 1])
    } else {
        NeighborSet::Scales(vec![k - 1, k, k + 1])
    }
}

/// Structural checks of a family on its lattice.
#[derive(Clone, Debug, Serialize)]
pub struct PartitionReport {
    pub kind: FamilyKind,
    pub indices: usize,
    pub safe_radius: f64,
    pub max_partition_deviation: f64,
    pub support_violations: usize,
    pub range_violations: usize,
    /// Largest number of symbols non-zero at one lattice point.
    pub max_overlap: usize,
    /// `#Λ` (uniform) or 2 (dyadic).
    pub overlap_bound: usize,
    /// Pairs `(j, k)` with `|j − k| > 2` whose supports intersect (dyadic).
    pub disjointness_violations: usize,
}

impl PartitionReport {
    pub fn passed(&self, tolerance: f64) -> bool {
        self.max_partition_deviation <= tolerance
            && self.support_violations == 0
            && self.range_violations == 0
            && self.max_overlap <= self.overlap_bound
            && self.disjointness_violations == 0
    }
}

pub fn check_partition(family: &SymbolFamily) -> PartitionReport {
    let grid = family.grid();
    let dim = grid.dim();
    let p = grid.periods() as i64;
    let p2 = (p * p) as f64;
    let mut overlap = vec![0usize; grid.len()];
    let mut support_violations = 0;
    let mut range_violations = 0;
    let mut supports: Vec<Vec<usize>> = Vec::new();

    for index in family.indices() {
        let symbol = family.extended_symbol(index);
        let mut slots = Vec::with_capacity(symbol.len());
        for (slot, v) in symbol {
            if !(0.0..=1.0).contains(&v) {
                range_violations += 1;
            }
            overlap[slot] += 1;
            slots.push(slot);
            let m = grid.freq_index(slot);
            match family.kind() {
                FamilyKind::Uniform => {
                    let dist2: i64 = (0..dim)
                        .map(|a| (m[a] - index.coords()[a] as i64 * p).pow(2))
                        .sum();
                    if dist2 > dim as i64 * p * p {
                        support_violations += 1;
                    }
                }
                FamilyKind::Dyadic => {
                    let r2 = grid.freq_norm_sq_units(slot) as f64 / p2;
                    let j = index.coords()[0];
                    let outer = 4f64.powi(j + 1);
                    let inner = if j == 0 { 0.0 } else { 4f64.powi(j - 1) };
                    if r2 > outer || (j > 0 && r2 < inner) {
                        support_violations += 1;
                    }
                }
            }
        }
        slots.sort_unstable();
        supports.push(slots);
    }

    if family.kind() == FamilyKind::Dyadic {
        // φ_0 must equal one on B̄_1
        if let Ok(phi0) = family.dense_symbol(&LatticeIndex::scalar(0)) {
            for (slot, v) in phi0.iter().enumerate() {
                if grid.freq_norm_sq_units(slot) as f64 / p2 <= 1.0 && *v != 1.0 {
                    support_violations += 1;
                }
            }
        }
    }

    let mut disjointness_violations = 0;
    if family.kind() == FamilyKind::Dyadic {
        for j in 0..supports.len() {
            for k in (j + 3)..supports.len() {
                if sorted_intersect(&supports[j], &supports[k]) {
                    disjointness_violations += 1;
                }
            }
        }
    }

    PartitionReport {
        kind: family.kind(),
        indices: family.indices().len(),
        safe_radius: family.safe_radius(),
        max_partition_deviation: family.max_partition_deviation(),
        support_violations,
        range_violations,
        max_overlap: overlap.into_iter().max().unwrap_or(0),
        overlap_bound: match family.kind() {
            FamilyKind::Uniform => neighbor_set(dim).len(),
            FamilyKind::Dyadic => 2,
        },
        disjointness_violations,
    }
}

fn sorted_intersect(a: &[usize], b: &[usize]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Equal => return true,
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1() -> TorusGrid {
        TorusGrid::new(1, 16, 1024).unwrap()
    }

    #[test]
    fn uniform_1d_support_and_sum_at_origin() {
        let fam = build_uniform_partition(&grid1(), 8, None).unwrap();
        let origin = grid1().slot_of_freq(&[0]).unwrap();
        let total: f64 = fam
            .indices()
            .iter()
            .map(|k| fam.dense_symbol(k).unwrap()[origin])
            .sum();
        assert!((total - 1.0).abs() <= 1e-15);
        let sigma0 = fam.dense_symbol(&LatticeIndex::scalar(0)).unwrap();
        for (slot, v) in sigma0.iter().enumerate() {
            if grid1().frequency(slot)[0].abs() > 1.0 {
                assert_eq!(*v, 0.0);
            }
        }
    }

    #[test]
    fn centre_values_are_positive() {
        let g = TorusGrid::new(2, 4, 128).unwrap();
        let fam = build_uniform_partition(&g, 4, None).unwrap();
        let mut total = 0.0;
        for k in fam.indices() {
            let slot = g
                .slot_of_freq(&[k.coords()[0] as i64 * 4, k.coords()[1] as i64 * 4])
                .unwrap();
            let v = fam.dense_symbol(k).unwrap()[slot];
            assert!(v > 0.0);
            total += v;
            let here: f64 = fam
                .indices()
                .iter()
                .map(|j| fam.dense_symbol(j).unwrap()[slot])
                .sum();
            if k.max_abs() < 4 {
                assert!((here - 1.0).abs() <= 1e-14);
            }
        }
        assert!(total > 0.0);
    }

    #[test]
    fn uniform_2d_partition_sum() {
        let g = TorusGrid::new(2, 4, 128).unwrap();
        let fam = build_uniform_partition(&g, 6, None).unwrap();
        // independent route: dense symbols summed index by index
        let mut sum = vec![0.0; g.len()];
        for k in fam.indices() {
            for (s, v) in fam.dense_symbol(k).unwrap().iter().enumerate() {
                sum[s] += v;
            }
        }
        let mut worst: f64 = 0.0;
        for (s, v) in sum.iter().enumerate() {
            let xi = g.frequency(s);
            if xi[0] * xi[0] + xi[1] * xi[1] <= 16.0 {
                worst = worst.max((v - 1.0).abs());
            }
        }
        assert!(worst <= 1e-12, "deviation {worst}");
        assert!(fam.max_partition_deviation() <= 1e-12);
    }

    #[test]
    fn translation_covariance_is_exact() {
        let g = TorusGrid::new(2, 3, 96).unwrap();
        let fam = build_uniform_partition(&g, 5, None).unwrap();
        let k = LatticeIndex::new(&[2, -3]);
        let dense_k = fam.dense_symbol(&k).unwrap();
        let dense_0 = fam.dense_symbol(&LatticeIndex::origin(2)).unwrap();
        for slot in 0..g.len() {
            let m = g.freq_index(slot);
            let shifted = [m[0] - 6, m[1] + 9];
            if let Some(s0) = g.slot_of_freq(&shifted) {
                assert_eq!(dense_k[slot], dense_0[s0]);
            }
        }
    }

    #[test]
    fn radius_and_lattice_guards() {
        let g = grid1();
        assert!(matches!(
            build_uniform_partition(&g, 8, Some(0.5)),
            Err(Error::BumpRadius { .. })
        ));
        assert!(matches!(
            build_uniform_partition(&g, 8, Some(1.01)),
            Err(Error::BumpRadius { .. })
        ));
        assert!(build_uniform_partition(&g, 8, Some(0.75)).is_ok());
        let coarse = TorusGrid::new(1, 16, 512).unwrap();
        assert!(matches!(
            build_uniform_partition(&coarse, 15, None),
            Err(Error::Aliasing(_))
        ));
        assert!(matches!(
            build_dyadic_partition(&coarse, 3),
            Err(Error::Aliasing(_))
        ));
        assert!(build_resplitting_partition(&g, 8, 2.5).is_ok());
        assert!(build_resplitting_partition(&g, 8, 3.5).is_err());
    }

    #[test]
    fn dyadic_identities() {
        let g = grid1();
        let fam = build_dyadic_partition(&g, 3).unwrap();
        let phi1 = fam.dense_symbol(&LatticeIndex::scalar(1)).unwrap();
        for (slot, v) in phi1.iter().enumerate() {
            if g.frequency(slot)[0].abs() <= 1.0 {
                assert_eq!(*v, 0.0);
            }
        }
        // telescoped sum through the closed form, evaluated independently
        let mut worst: f64 = 0.0;
        for slot in 0..g.len() {
            let xi = g.frequency(slot)[0];
            if xi.abs() <= 4.0 {
                let s: f64 = (0..=3).map(|j| dyadic_symbol_value(j, xi * xi)).sum();
                worst = worst.max((s - 1.0).abs());
            }
        }
        assert!(worst <= 1e-12);
        assert!(fam.max_partition_deviation() <= 1e-12);
        assert!(fam.telescoping_deviation() <= 1e-12);
        assert_eq!(build_uniform_partition(&g, 8, None).unwrap().telescoping_deviation(), 0.0);

        let h = g.freq_spacing();
        let phi3 = fam.dense_symbol(&LatticeIndex::scalar(3)).unwrap();
        for (slot, v) in phi3.iter().enumerate() {
            let r = g.frequency(slot)[0].abs();
            if r <= 4.0 - h || r >= 16.0 + h {
                assert_eq!(*v, 0.0, "phi_3 at {r}");
            }
        }
    }

    #[test]
    fn dyadic_base_profile() {
        assert_eq!(dyadic_base(0.0), 1.0);
        assert_eq!(dyadic_base(1.0), 1.0);
        assert_eq!(dyadic_base(4.0), 0.0);
        let mut prev = 1.0;
        for i in 0..=300 {
            let v = dyadic_base(1.0 + 3.0 * i as f64 / 300.0);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn neighbour_sets() {
        let coords = |s: &NeighborSet| -> Vec<i32> {
            s.offsets().iter().map(|l| l.coords()[0]).collect()
        };
        assert_eq!(coords(&neighbor_set(1)), vec![-2, -1, 0, 1, 2]);
        assert_eq!(coords(&extended_neighbor_set(1)), (-4..=4).collect::<Vec<_>>());

        let brute = |dim: usize, bound_sq: i64| -> usize {
            lattice::cube(dim, 10)
                .iter()
                .filter(|k| k.norm_sq() <= bound_sq)
                .count()
        };
        let l4 = neighbor_set(4);
        assert_eq!(l4.len(), brute(4, 16));
        assert!(l4.offsets().iter().all(|l| l.norm() <= 4.0));
        assert!(neighbor_set(2).contains_offset(&LatticeIndex::new(&[2, 2])));
        assert!(!neighbor_set(2).contains_offset(&LatticeIndex::new(&[3, 0])));
        assert!(extended_neighbor_set(2).contains_offset(&LatticeIndex::new(&[4, 4])));
        assert_eq!(extended_neighbor_set(2).len(), brute(2, 32));
        assert_eq!(extended_neighbor_set(3).len(), brute(3, 48));

        assert_eq!(dyadic_neighbors(0).scales(), &[0, 1]);
        assert_eq!(dyadic_neighbors(1).scales(), &[0, 1, 2]);
        assert_eq!(dyadic_neighbors(7).scales(), &[6, 7, 8]);
    }

    #[test]
    fn structural_report() {
        let g = TorusGrid::new(2, 4, 128).unwrap();
        let uni = check_partition(&build_uniform_partition(&g, 6, None).unwrap());
        assert!(uni.passed(1e-12), "{uni:?}");
        assert!(uni.max_overlap <= uni.overlap_bound);
        let dya = check_partition(&build_dyadic_partition(&g, 2).unwrap());
        assert!(dya.passed(1e-12), "{dya:?}");
    }
}
