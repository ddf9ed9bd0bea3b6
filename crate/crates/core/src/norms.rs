//! Quadrature `L_p` norms, weighted sequence norms and the composite
//! Besov / modulation / exponential-modulation norms.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::decomp::visit_pieces;
use crate::error::{Error, Result};
use crate::grid::{forward_fourier, SampledFunction};
use crate::lattice::LatticeIndex;
use crate::partitions::{FamilyKind, SymbolFamily};

/// Norm value in `[0, ∞]`; `∞` means the element is outside the space.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct NormValue(f64);

impl NormValue {
    pub const INFINITE: NormValue = NormValue(f64::INFINITY);

    pub fn new(v: f64) -> Self {
        debug_assert!(v >= 0.0 || v.is_nan());
        NormValue(v)
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }
}

impl fmt::Display for NormValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for NormValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serialize_extended(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for NormValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        deserialize_extended(d).map(NormValue)
    }
}

/// Serializes an `f64` with `∞` written as the string `"inf"`.
pub fn serialize_extended<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() && *v > 0.0 {
        s.serialize_str("inf")
    } else if v.is_infinite() {
        s.serialize_str("-inf")
    } else {
        s.serialize_f64(*v)
    }
}

pub fn deserialize_extended<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }
    match Repr::deserialize(d)? {
        Repr::Num(v) => Ok(v),
        Repr::Text(t) => match t.as_str() {
            "inf" | "infinity" | "Infinity" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            other => Err(serde::de::Error::custom(format!("not a number: {other}"))),
        },
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightKind {
    /// `ω(k) = 2^{|k|}`.
    Exponential,
    /// `ω(k) = ⟨k⟩ = (1 + |k|²)^{1/2}`.
    Polynomial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexDomain {
    /// `Z^d`.
    Lattice,
    /// `N₀`, stored as one-dimensional indices `j >= 0`.
    Scales,
}

/// The three decomposition spaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Space {
    /// Besov `B^s_{p,q}`: dyadic pieces, weight `2^{sj}`.
    B,
    /// Modulation `M^s_{p,q}`: uniform pieces, weight `⟨k⟩^s`.
    M,
    /// Exponential modulation `E^s_{p,q}`: uniform pieces, weight `2^{s|k|}`.
    E,
}

impl Space {
    pub fn weight(&self) -> WeightKind {
        match self {
            Space::B | Space::E => WeightKind::Exponential,
            Space::M => WeightKind::Polynomial,
        }
    }

    pub fn family_kind(&self) -> FamilyKind {
        match self {
            Space::B => FamilyKind::Dyadic,
            Space::M | Space::E => FamilyKind::Uniform,
        }
    }

    pub fn domain(&self) -> IndexDomain {
        match self {
            Space::B => IndexDomain::Scales,
            Space::M | Space::E => IndexDomain::Lattice,
        }
    }
}

/// `(p, q, s)` with a weight kind.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    #[serde(serialize_with = "serialize_extended", deserialize_with = "deserialize_extended")]
    pub p: f64,
    #[serde(serialize_with = "serialize_extended", deserialize_with = "deserialize_extended")]
    pub q: f64,
    pub s: f64,
    pub weight: WeightKind,
}

impl NormParams {
    pub fn new(p: f64, q: f64, s: f64, weight: WeightKind) -> Result<Self> {
        check_exponent("p", p)?;
        check_exponent("q", q)?;
        if !s.is_finite() {
            return Err(Error::InvalidExponent { name: "s", value: s });
        }
        Ok(Self { p, q, s, weight })
    }
}

pub fn check_exponent(name: &'static str, value: f64) -> Result<()> {
    if !(value >= 1.0) {
        return Err(Error::InvalidExponent { name, value });
    }
    Ok(())
}

/// `(Σ_c μ |v_c|^p)^{1/p}`, or `max_c |v_c|` for `p = ∞`.
pub fn lp_norm_cells(values: &[Complex64], measure: f64, p: f64) -> Result<f64> {
    Ok(lp_norms_cells(values, measure, &[p])?[0])
}

/// [`lp_norm_cells`] for several exponents over one pass of moduli.
pub fn lp_norms_cells(values: &[Complex64], measure: f64, exponents: &[f64]) -> Result<Vec<f64>> {
    for p in exponents {
        check_exponent("p", *p)?;
    }
    let moduli: Vec<f64> = values
        .iter()
        .map(|v| {
            let sq = v.norm_sqr();
            if sq.is_finite() && sq > f64::MIN_POSITIVE { sq.sqrt() } else { v.norm() }
        })
        .collect();
    let peak = moduli.iter().copied().fold(0.0, f64::max);
    Ok(exponents
        .iter()
        .map(|&p| {
            if p.is_infinite() || peak == 0.0 || !peak.is_finite() {
                return peak;
            }
            let inv = 1.0 / peak;
            let sum: f64 = if p == 2.0 {
                moduli.iter().map(|m| (m * inv) * (m * inv)).sum()
            } else if p.fract() == 0.0 && p <= 64.0 {
                let n = p as i32;
                moduli.iter().map(|m| (m * inv).powi(n)).sum()
            } else {
                moduli.iter().map(|m| (m * inv).powf(p)).sum()
            };
            peak * (measure * sum).powf(1.0 / p)
        })
        .collect())
}

/// Quadrature norm `(h^d Σ_x |f(x)|^p)^{1/p}`.
pub fn lp_norm(f: &SampledFunction, p: f64) -> Result<NormValue> {
    Ok(NormValue(lp_norm_cells(f.values(), f.grid().cell_volume(), p)?))
}

/// `ln ω(k)`.
pub fn log_weight(index: &LatticeIndex, weight: WeightKind) -> f64 {
    match weight {
        WeightKind::Exponential => index.norm() * LN_2,
        WeightKind::Polynomial => 0.5 * (index.norm_sq() as f64).ln_1p(),
    }
}

/// `ω(k)^s`; computed through logarithms only when it leaves `2^{±300}`.
pub fn weight_power(index: &LatticeIndex, weight: WeightKind, s: f64) -> f64 {
    if s == 0.0 {
        return 1.0;
    }
    let log = s * log_weight(index, weight);
    if log.abs() > 300.0 * LN_2 {
        return log.exp();
    }
    match weight {
        WeightKind::Exponential => (s * index.norm()).exp2(),
        WeightKind::Polynomial => (1.0 + index.norm_sq() as f64).powf(s / 2.0),
    }
}

fn check_domain(index: &LatticeIndex, domain: IndexDomain) -> Result<()> {
    if domain == IndexDomain::Scales && (index.dim() != 1 || index.coords()[0] < 0) {
        return Err(Error::Format(format!("{index} is not a scale index in N0")));
    }
    Ok(())
}

/// `(Σ_k ω(k)^{qs} v_k^q)^{1/q}`, or `sup_k ω(k)^s v_k` for `q = ∞`.
pub fn weighted_seq_norm(
    values: &BTreeMap<LatticeIndex, f64>,
    q: f64,
    s: f64,
    weight: WeightKind,
    domain: IndexDomain,
) -> Result<NormValue> {
    check_exponent("q", q)?;
    let mut terms = Vec::with_capacity(values.len());
    for (k, v) in values {
        check_domain(k, domain)?;
        if v.is_nan() || *v < 0.0 {
            return Err(Error::Format(format!("sequence value {v} at {k} is not a norm")));
        }
        terms.push(weighted_term(k, *v, s, weight));
    }
    Ok(NormValue(lq_of_terms(&terms, q)))
}

fn weighted_term(k: &LatticeIndex, v: f64, s: f64, weight: WeightKind) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    let w = weight_power(k, weight, s);
    let t = w * v;
    if t.is_finite() && t > 0.0 {
        t
    } else if v.is_infinite() {
        f64::INFINITY
    } else {
        // over- or underflow of the product; redo in log space
        (s * log_weight(k, weight) + v.ln()).exp()
    }
}

/// `ℓ_q` norm of nonnegative terms, scaled by the largest term.
pub(crate) fn lq_of_terms(terms: &[f64], q: f64) -> f64 {
    let peak = terms.iter().copied().fold(0.0, f64::max);
    if peak == 0.0 || q.is_infinite() || peak.is_infinite() {
        return peak;
    }
    let sum: f64 = terms.iter().map(|t| (t / peak).powf(q)).sum();
    peak * sum.powf(1.0 / q)
}

/// Per-index `L_p` norms of the pieces of `f` for several exponents, so
/// that sequence norms for many `(p, q, s)` share one decomposition.
#[derive(Clone, Debug, PartialEq)]
pub struct PieceNorms {
    kind: FamilyKind,
    exponents: Vec<f64>,
    entries: BTreeMap<LatticeIndex, Vec<f64>>,
}

impl PieceNorms {
    pub fn compute(f: &SampledFunction, family: &SymbolFamily, exponents: &[f64]) -> Result<Self> {
        for p in exponents {
            check_exponent("p", *p)?;
        }
        let h = f.grid().cell_volume();
        let mut entries = BTreeMap::new();
        visit_pieces(f, family, |k, piece| {
            entries.insert(k, lp_norms_cells(piece.values(), h, exponents)?);
            Ok(())
        })?;
        Ok(Self {
            kind: family.kind(),
            exponents: exponents.to_vec(),
            entries,
        })
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn indices(&self) -> impl Iterator<Item = &LatticeIndex> {
        self.entries.keys()
    }

    fn slot(&self, p: f64) -> Result<usize> {
        self.exponents
            .iter()
            .position(|e| *e == p)
            .ok_or_else(|| Error::Format(format!("exponent p = {p} was not tabulated")))
    }

    /// `‖□_k f‖_p` (or `‖Δ_j f‖_p`) for every retained index.
    pub fn column(&self, p: f64) -> Result<BTreeMap<LatticeIndex, f64>> {
        let i = self.slot(p)?;
        Ok(self.entries.iter().map(|(k, v)| (*k, v[i])).collect())
    }

    pub fn norm(&self, p: f64, q: f64, s: f64, weight: WeightKind) -> Result<NormValue> {
        let domain = match self.kind {
            FamilyKind::Uniform => IndexDomain::Lattice,
            FamilyKind::Dyadic => IndexDomain::Scales,
        };
        weighted_seq_norm(&self.column(p)?, q, s, weight, domain)
    }

    pub fn space_norm(&self, space: Space, p: f64, q: f64, s: f64) -> Result<NormValue> {
        if space.family_kind() != self.kind {
            return Err(Error::KindMismatch {
                expected: space.family_kind().name(),
                found: self.kind.name(),
            });
        }
        self.norm(p, q, s, space.weight())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PieceContribution {
    pub index: LatticeIndex,
    /// `‖piece‖_p`.
    pub norm: f64,
    /// `ω(k)^s ‖piece‖_p`.
    #[serde(serialize_with = "serialize_extended")]
    pub weighted: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NormReport {
    pub space: Space,
    pub params: NormParams,
    pub value: NormValue,
    pub pieces: Vec<PieceContribution>,
}

/// Norm of `f` in one of the three spaces with per-piece contributions.
pub fn norm_report(
    space: Space,
    f: &SampledFunction,
    family: &SymbolFamily,
    p: f64,
    q: f64,
    s: f64,
) -> Result<NormReport> {
    let params = NormParams::new(p, q, s, space.weight())?;
    if family.kind() != space.family_kind() {
        return Err(Error::KindMismatch {
            expected: space.family_kind().name(),
            found: family.kind().name(),
        });
    }
    let table = PieceNorms::compute(f, family, &[p])?;
    let value = table.space_norm(space, p, q, s)?;
    let pieces = table
        .column(p)?
        .into_iter()
        .map(|(index, norm)| PieceContribution {
            index,
            norm,
            weighted: weighted_term(&index, norm, s, space.weight()),
        })
        .collect();
    Ok(NormReport {
        space,
        params,
        value,
        pieces,
    })
}

/// `(Σ_j 2^{sjq} ‖Δ_j f‖_p^q)^{1/q}`.
pub fn besov_norm(f: &SampledFunction, family: &SymbolFamily, p: f64, q: f64, s: f64) -> Result<NormValue> {
    Ok(norm_report(Space::B, f, family, p, q, s)?.value)
}

/// `(Σ_k ⟨k⟩^{sq} ‖□_k f‖_p^q)^{1/q}`.
pub fn modulation_norm(f: &SampledFunction, family: &SymbolFamily, p: f64, q: f64, s: f64) -> Result<NormValue> {
    Ok(norm_report(Space::M, f, family, p, q, s)?.value)
}

/// `‖(2^{s|k|} ‖□_k f‖_p)_k‖_{ℓ_q}`.
pub fn exp_modulation_norm(f: &SampledFunction, family: &SymbolFamily, p: f64, q: f64, s: f64) -> Result<NormValue> {
    Ok(norm_report(Space::E, f, family, p, q, s)?.value)
}

/// Largest admissible `|λ| · max(|x|, |ξ|)` for the seminorm weights.
pub const SEMINORM_EXPONENT_LIMIT: f64 = 600.0;

/// `(sup_x e^{λ|x|} |f(x)|, sup_ξ e^{λ|ξ|} |Ff(ξ)|)` over the grid and its
/// lattice. Rejects `λ` whose weight would exceed `e^{600}` anywhere.
pub fn gelfand_shilov_seminorms(f: &SampledFunction, lambda: f64) -> Result<(f64, f64)> {
    let grid = *f.grid();
    let d = grid.dim();
    let reach = (d as f64).sqrt() * grid.half_period().max(grid.nyquist());
    if !lambda.is_finite() || lambda.abs() * reach > SEMINORM_EXPONENT_LIMIT {
        return Err(Error::Overflow(format!(
            "|lambda| * {reach} exceeds {SEMINORM_EXPONENT_LIMIT}"
        )));
    }
    let spectrum = forward_fourier(f)?;
    let mut space: f64 = 0.0;
    for (i, v) in f.values().iter().enumerate() {
        let x = grid.position(i);
        let r = x[..d].iter().map(|a| a * a).sum::<f64>().sqrt();
        space = space.max((lambda * r).exp() * v.norm());
    }
    let mut freq: f64 = 0.0;
    for (i, v) in spectrum.coefficients().iter().enumerate() {
        let xi = grid.frequency(i);
        let r = xi[..d].iter().map(|a| a * a).sum::<f64>().sqrt();
        freq = freq.max((lambda * r).exp() * v.norm());
    }
    Ok((space, freq))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::{analysis, besov_analysis};
    use crate::grid::TorusGrid;
    use crate::partitions::{build_dyadic_partition, build_uniform_partition};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn grid1() -> TorusGrid {
        TorusGrid::new(1, 16, 1024).unwrap()
    }

    fn gauss(grid: TorusGrid) -> SampledFunction {
        SampledFunction::from_fn(grid, |x| Complex64::new((2.0 * PI).powf(-0.5) * (-x[0] * x[0] / 2.0).exp(), 0.0))
    }

    fn modulated(grid: TorusGrid, x0: f64, xi0: f64, width: f64) -> SampledFunction {
        SampledFunction::from_fn(grid, |x| {
            let r = (x[0] - x0) / width;
            Complex64::from_polar((-r * r / 2.0).exp(), xi0 * x[0])
        })
    }

    #[test]
    fn lp_of_constants_and_gaussian() {
        let g = TorusGrid::new(1, 3, 64).unwrap();
        let c = Complex64::new(0.6, -0.8);
        let f = SampledFunction::new(g, vec![c; 64]).unwrap();
        let two_l = 2.0 * g.half_period();
        for p in [1.0, 1.5, 2.0, 7.0] {
            let v = lp_norm(&f, p).unwrap().value();
            assert!((v - two_l.powf(1.0 / p)).abs() <= 1e-13 * v);
        }
        assert!((lp_norm(&f, f64::INFINITY).unwrap().value() - 1.0).abs() <= 1e-15);
        assert!(lp_norm(&f, 0.5).is_err());

        let sup = lp_norm(&gauss(grid1()), f64::INFINITY).unwrap().value();
        assert!((sup - (2.0 * PI).powf(-0.5)).abs() <= 1e-14);
    }

    #[test]
    fn lp2_matches_direct_sum() {
        let g = TorusGrid::new(2, 2, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = SampledFunction::new(
            g,
            (0..g.len())
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        )
        .unwrap();
        let mut acc = 0.0;
        for v in f.values().iter().rev() {
            acc += v.re * v.re + v.im * v.im;
        }
        let direct = (g.cell_volume() * acc).sqrt();
        let v = lp_norm(&f, 2.0).unwrap().value();
        assert!((v - direct).abs() <= 1e-13 * direct);
    }

    #[test]
    fn sequence_norm_examples() {
        let mut single = BTreeMap::new();
        single.insert(LatticeIndex::scalar(0), 3.7);
        for w in [WeightKind::Exponential, WeightKind::Polynomial] {
            for q in [1.0, 2.0, 3.3, f64::INFINITY] {
                let v = weighted_seq_norm(&single, q, 2.5, w, IndexDomain::Lattice).unwrap();
                assert_eq!(v.value(), 3.7);
            }
        }

        let mut two = BTreeMap::new();
        two.insert(LatticeIndex::scalar(0), 0.7);
        two.insert(LatticeIndex::scalar(1), 1.9);
        let v = weighted_seq_norm(&two, 1.0, 1.0, WeightKind::Exponential, IndexDomain::Lattice).unwrap();
        assert!((v.value() - (0.7 + 2.0 * 1.9)).abs() <= 1e-15 * v.value());

        let mut planar = BTreeMap::new();
        planar.insert(LatticeIndex::new(&[0, 0]), 1.0);
        planar.insert(LatticeIndex::new(&[3, 4]), 1.0);
        let v = weighted_seq_norm(&planar, f64::INFINITY, 2.0, WeightKind::Polynomial, IndexDomain::Lattice)
            .unwrap();
        assert!((v.value() - 26.0).abs() <= 1e-13);

        assert!(weighted_seq_norm(&planar, 1.0, 0.0, WeightKind::Exponential, IndexDomain::Scales).is_err());
        assert!(weighted_seq_norm(&two, 0.9, 0.0, WeightKind::Exponential, IndexDomain::Lattice).is_err());
    }

    #[test]
    fn divergent_sequences_give_infinity() {
        let mut seq = BTreeMap::new();
        seq.insert(LatticeIndex::scalar(0), 1.0);
        seq.insert(LatticeIndex::scalar(5), f64::INFINITY);
        for q in [1.0, f64::INFINITY] {
            let v = weighted_seq_norm(&seq, q, 1.0, WeightKind::Exponential, IndexDomain::Scales).unwrap();
            assert!(!v.is_finite());
        }
        // weights beyond the f64 range
        let mut big = BTreeMap::new();
        big.insert(LatticeIndex::scalar(2000), 1.0);
        let v = weighted_seq_norm(&big, f64::INFINITY, 1.0, WeightKind::Exponential, IndexDomain::Lattice).unwrap();
        assert!(!v.is_finite());
        assert_eq!(serde_json::to_string(&v).unwrap(), "\"inf\"");
        let tiny = weighted_seq_norm(&big, 2.0, -1.0, WeightKind::Exponential, IndexDomain::Lattice).unwrap();
        assert_eq!(tiny.value(), 0.0);
    }

    #[test]
    fn log_space_weights_agree_with_direct_ones() {
        let k = LatticeIndex::scalar(400);
        let direct = weight_power(&k, WeightKind::Exponential, 0.5);
        assert_eq!(direct, 2f64.powi(200));
        let logged = weight_power(&k, WeightKind::Exponential, 0.8);
        assert!((logged.ln() - 320.0 * LN_2).abs() <= 1e-12 * 320.0);
    }

    #[test]
    fn besov_norm_of_low_frequency_function() {
        let g = grid1();
        let fam = build_dyadic_partition(&g, 3).unwrap();
        let spec = crate::grid::Spectrum::from_fn(g, |xi| {
            let t = xi[0] * xi[0] / 0.81;
            if t < 1.0 {
                Complex64::new((-1.0 / (1.0 - t)).exp(), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let f = crate::grid::inverse_fourier(&spec).unwrap();
        for (p, q, s) in [(1.0, 1.0, 3.0), (2.0, 4.0, -1.0), (f64::INFINITY, 2.0, 0.5)] {
            let b = besov_norm(&f, &fam, p, q, s).unwrap().value();
            let l = lp_norm(&f, p).unwrap().value();
            assert!((b - l).abs() <= 1e-12 * l, "p={p}: {b} vs {l}");
        }
        assert_eq!(besov_norm(&SampledFunction::zeros(g), &fam, 2.0, 2.0, 1.0).unwrap().value(), 0.0);
    }

    #[test]
    fn composite_norms_match_pipeline() {
        let g = grid1();
        let dya = build_dyadic_partition(&g, 3).unwrap();
        let uni = build_uniform_partition(&g, 12, None).unwrap();
        let f = gauss(g);

        let pieces = besov_analysis(&f, &dya).unwrap();
        let brute = pieces
            .iter()
            .map(|(_, v)| lp_norm(v, 2.0).unwrap().value().powi(2))
            .sum::<f64>()
            .sqrt();
        let b = besov_norm(&f, &dya, 2.0, 2.0, 0.0).unwrap().value();
        assert!((b - brute).abs() <= 1e-12 * brute);

        let e = exp_modulation_norm(&f, &uni, 2.0, 1.0, 1.0).unwrap().value();
        let brute: f64 = analysis(&f, &uni)
            .unwrap()
            .iter()
            .map(|(k, v)| 2f64.powf(k.norm()) * lp_norm(v, 2.0).unwrap().value())
            .sum();
        assert!((e - brute).abs() <= 1e-12 * brute);

        let h = modulated(g, 1.0, 3.0, 1.7);
        let m = modulation_norm(&h, &uni, 3.0, 2.0, 1.5).unwrap().value();
        let brute = analysis(&h, &uni)
            .unwrap()
            .iter()
            .map(|(k, v)| {
                let w = (1.0 + k.norm_sq() as f64).powf(0.75);
                (w * lp_norm(v, 3.0).unwrap().value()).powi(2)
            })
            .sum::<f64>()
            .sqrt();
        assert!((m - brute).abs() <= 1e-12 * brute);

        assert!(modulation_norm(&f, &dya, 2.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn low_frequency_pieces_only_near_origin() {
        let g = grid1();
        let uni = build_uniform_partition(&g, 12, None).unwrap();
        let spec = crate::grid::Spectrum::from_fn(g, |xi| {
            let t = xi[0] * xi[0];
            if t < 1.0 {
                Complex64::new((-1.0 / (1.0 - t)).exp(), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let f = crate::grid::inverse_fourier(&spec).unwrap();
        let report = norm_report(Space::M, &f, &uni, 2.0, 2.0, 4.0).unwrap();
        assert!(report.pieces.iter().all(|c| c.index.norm() <= 2.0));

        let e = norm_report(Space::E, &f, &uni, 1.5, 1.0, 0.7).unwrap();
        let sum: f64 = e.pieces.iter().map(|c| 2f64.powf(0.7 * c.index.norm()) * c.norm).sum();
        assert!((e.value.value() - sum).abs() <= 1e-13 * sum);
    }

    #[test]
    fn zero_weight_collapses_spaces() {
        let g = grid1();
        let uni = build_uniform_partition(&g, 12, None).unwrap();
        let f = modulated(g, -2.0, 4.0, 2.0);
        for (p, q) in [(1.0, 1.0), (2.0, 3.0), (f64::INFINITY, f64::INFINITY)] {
            let m = modulation_norm(&f, &uni, p, q, 0.0).unwrap();
            let e = exp_modulation_norm(&f, &uni, p, q, 0.0).unwrap();
            assert_eq!(m, e);
        }
        assert_eq!(exp_modulation_norm(&SampledFunction::zeros(g), &uni, 2.0, 2.0, 1.0).unwrap().value(), 0.0);
    }

    #[test]
    fn seminorms() {
        let g = grid1();
        let f = gauss(g);
        let (p0, q0) = gelfand_shilov_seminorms(&f, 0.0).unwrap();
        assert_eq!(p0, f.max_abs());
        assert_eq!(q0, forward_fourier(&f).unwrap().max_abs());

        let (p1, _) = gelfand_shilov_seminorms(&f, 1.0).unwrap();
        let exact = 0.5f64.exp() / (2.0 * PI).sqrt();
        let h = g.spacing();
        assert!(p1 <= exact && exact - p1 <= h * h * exact, "{p1} vs {exact}");

        assert_eq!(gelfand_shilov_seminorms(&SampledFunction::zeros(g), 1.0).unwrap(), (0.0, 0.0));
        assert!(matches!(gelfand_shilov_seminorms(&f, 20.0), Err(Error::Overflow(_))));
    }

    fn catalog_case(seed: u64) -> SampledFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x0 = rng.gen_range(-10.0..10.0);
        let xi0 = rng.gen_range(-6.0..6.0);
        let w = rng.gen_range(1.5..3.0);
        modulated(grid1(), x0, xi0, w)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn norm_axioms(seed in 0u64..1000, c_re in -3.0f64..3.0, c_im in -3.0f64..3.0, s in -1.0f64..1.0) {
            let g = grid1();
            let uni = build_uniform_partition(&g, 12, None).unwrap();
            let f = catalog_case(seed);
            let h = catalog_case(seed + 1);
            let c = Complex64::new(c_re, c_im);
            prop_assume!(c.norm() > 1e-3);
            let nf = exp_modulation_norm(&f, &uni, 2.0, 1.0, s).unwrap().value();
            let ncf = exp_modulation_norm(&f.scale(c), &uni, 2.0, 1.0, s).unwrap().value();
            prop_assert!((ncf - c.norm() * nf).abs() <= 1e-12 * ncf);
            let nh = exp_modulation_norm(&h, &uni, 2.0, 1.0, s).unwrap().value();
            let nsum = exp_modulation_norm(&f.add(&h).unwrap(), &uni, 2.0, 1.0, s).unwrap().value();
            prop_assert!(nsum <= nf + nh + 1e-12 * (nf + nh));
        }

        #[test]
        fn sequence_norm_monotone(values in proptest::collection::vec(0.0f64..5.0, 1..12),
                                  q0 in 1.0f64..6.0, dq in 0.0f64..6.0,
                                  s1 in -2.0f64..2.0, ds in 0.0f64..2.0) {
            let seq: BTreeMap<_, _> = values
                .iter()
                .enumerate()
                .map(|(i, v)| (LatticeIndex::scalar(i as i32 - 5), *v))
                .collect();
            for w in [WeightKind::Exponential, WeightKind::Polynomial] {
                let a = weighted_seq_norm(&seq, q0, s1, w, IndexDomain::Lattice).unwrap().value();
                let b = weighted_seq_norm(&seq, q0 + dq, s1, w, IndexDomain::Lattice).unwrap().value();
                let inf = weighted_seq_norm(&seq, f64::INFINITY, s1, w, IndexDomain::Lattice).unwrap().value();
                prop_assert!(b <= a + 1e-12 * a);
                prop_assert!(inf <= b + 1e-12 * b);
                let c = weighted_seq_norm(&seq, q0, s1 + ds, w, IndexDomain::Lattice).unwrap().value();
                prop_assert!(a <= c + 1e-12 * c);
            }
        }

        #[test]
        fn exp_norm_monotone_in_s(seed in 0u64..1000, s1 in -1.0f64..1.0, ds in 0.0f64..1.0) {
            let g = grid1();
            let uni = build_uniform_partition(&g, 12, None).unwrap();
            let f = catalog_case(seed);
            let table = PieceNorms::compute(&f, &uni, &[1.0, 2.0]).unwrap();
            for p in [1.0, 2.0] {
                let lo = table.space_norm(Space::E, p, 2.0, s1).unwrap().value();
                let hi = table.space_norm(Space::E, p, 2.0, s1 + ds).unwrap().value();
                prop_assert!(lo <= hi + 1e-12);
            }
        }
    }
}
