//! Complex interpolation: parameter arithmetic, analytic families on the
//! strip `0 <= Re z <= 1`, two-sided certificates for interpolation norms of
//! finite weighted sequences, and the embedding / log-convexity ratios.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::decomp::PieceSequence;
use crate::error::{Error, Result};
use crate::grid::{forward_fourier, SampledFunction};
use crate::lattice::{cube, LatticeIndex};
use crate::norms::{
    check_exponent, log_weight, lp_norm, lp_norm_cells, lp_norms_cells, serialize_extended, weighted_seq_norm, IndexDomain,
    NormParams, NormValue, PieceNorms, Space, WeightKind,
};
use crate::partitions::FamilyKind;

fn reciprocal(p: f64) -> f64 {
    if p.is_infinite() {
        0.0
    } else {
        1.0 / p
    }
}

fn from_reciprocal(r: f64) -> f64 {
    if r == 0.0 {
        f64::INFINITY
    } else {
        1.0 / r
    }
}

/// Hölder conjugate, `1' = ∞`, `∞' = 1`.
pub fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Theta(theta));
    }
    Ok(())
}

fn interpolate_exponent(theta: f64, a: f64, b: f64) -> f64 {
    if a == b {
        return a;
    }
    from_reciprocal((1.0 - theta) * reciprocal(a) + theta * reciprocal(b))
}

fn interpolate_linear(theta: f64, a: f64, b: f64) -> f64 {
    if a == b {
        return a;
    }
    (1.0 - theta) * a + theta * b
}

/// Derived `(p, q, s)` for `θ ∈ (0, 1)`; equal endpoint values are returned
/// unchanged.
pub fn interpolation_parameters(theta: f64, e0: &NormParams, e1: &NormParams) -> Result<(f64, f64, f64)> {
    check_theta(theta)?;
    Ok((
        interpolate_exponent(theta, e0.p, e1.p),
        interpolate_exponent(theta, e0.q, e1.q),
        interpolate_linear(theta, e0.s, e1.s),
    ))
}

/// `(1/p, 1/q, s)` over the rationals; `1/p = 0` stands for `p = ∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExactTriple {
    pub inv_p: Rational64,
    pub inv_q: Rational64,
    pub s: Rational64,
}

impl ExactTriple {
    /// `None` stands for an infinite exponent.
    pub fn new(p: Option<Rational64>, q: Option<Rational64>, s: Rational64) -> Result<Self> {
        let inv = |name: &'static str, e: Option<Rational64>| match e {
            None => Ok(Rational64::from_integer(0)),
            Some(v) if v >= Rational64::from_integer(1) => Ok(v.recip()),
            Some(v) => Err(Error::InvalidExponent {
                name,
                value: *v.numer() as f64 / *v.denom() as f64,
            }),
        };
        Ok(Self {
            inv_p: inv("p", p)?,
            inv_q: inv("q", q)?,
            s,
        })
    }

    pub fn p(&self) -> Option<Rational64> {
        (self.inv_p != Rational64::from_integer(0)).then(|| self.inv_p.recip())
    }

    pub fn q(&self) -> Option<Rational64> {
        (self.inv_q != Rational64::from_integer(0)).then(|| self.inv_q.recip())
    }
}

pub fn interpolation_parameters_exact(theta: Rational64, e0: &ExactTriple, e1: &ExactTriple) -> Result<ExactTriple> {
    if theta <= Rational64::from_integer(0) || theta >= Rational64::from_integer(1) {
        return Err(Error::Theta(*theta.numer() as f64 / *theta.denom() as f64));
    }
    let mix = |a: Rational64, b: Rational64| (Rational64::from_integer(1) - theta) * a + theta * b;
    Ok(ExactTriple {
        inv_p: mix(e0.inv_p, e1.inv_p),
        inv_q: mix(e0.inv_q, e1.inv_q),
        s: mix(e0.s, e1.s),
    })
}

/// `θ` together with the endpoint parameters; derived parameters are
/// recomputed on every call.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InterpParams {
    pub theta: f64,
    pub end0: NormParams,
    pub end1: NormParams,
}

impl InterpParams {
    pub fn new(theta: f64, end0: NormParams, end1: NormParams) -> Result<Self> {
        check_theta(theta)?;
        if end0.weight != end1.weight {
            return Err(Error::Hypothesis("endpoints use different weight kinds".into()));
        }
        Ok(Self { theta, end0, end1 })
    }

    pub fn derived(&self) -> NormParams {
        let (p, q, s) = interpolation_parameters(self.theta, &self.end0, &self.end1).expect("theta checked");
        NormParams {
            p,
            q,
            s,
            weight: self.end0.weight,
        }
    }

    pub fn endpoint(&self, j: usize) -> &NormParams {
        if j == 0 {
            &self.end0
        } else {
            &self.end1
        }
    }

    pub fn identical_endpoints(&self) -> bool {
        self.end0 == self.end1
    }

    /// Parameters of the dual couple: `(p', q', -s)` at both ends.
    pub fn dual(&self) -> Self {
        let flip = |e: &NormParams| NormParams {
            p: conjugate(e.p),
            q: conjugate(e.q),
            s: -e.s,
            weight: e.weight,
        };
        Self {
            theta: self.theta,
            end0: flip(&self.end0),
            end1: flip(&self.end1),
        }
    }
}

/// Finite element of `ℓ^{s,ω}_q(I, L_p)`: every index carries a vector of
/// quadrature cell values, all cells having measure `measure`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeqElement {
    weight: WeightKind,
    domain: IndexDomain,
    measure: f64,
    entries: BTreeMap<LatticeIndex, Vec<Complex64>>,
}

impl SeqElement {
    pub fn new(weight: WeightKind, domain: IndexDomain, measure: f64) -> Result<Self> {
        if !(measure > 0.0 && measure.is_finite()) {
            return Err(Error::Format(format!("cell measure {measure} must be positive")));
        }
        Ok(Self {
            weight,
            domain,
            measure,
            entries: BTreeMap::new(),
        })
    }

    pub fn insert(&mut self, index: LatticeIndex, cells: Vec<Complex64>) {
        self.entries.insert(index, cells);
    }

    /// The analysis sequence of a function: cells are grid samples.
    pub fn from_pieces(pieces: &PieceSequence, weight: WeightKind) -> Result<Self> {
        let domain = match pieces.kind() {
            FamilyKind::Uniform => IndexDomain::Lattice,
            FamilyKind::Dyadic => IndexDomain::Scales,
        };
        let mut out = Self::new(weight, domain, pieces.grid().cell_volume())?;
        for (k, piece) in pieces.iter() {
            out.insert(*k, piece.values().to_vec());
        }
        Ok(out)
    }

    pub fn weight(&self) -> WeightKind {
        self.weight
    }

    pub fn measure(&self) -> f64 {
        self.measure
    }

    pub fn entries(&self) -> &BTreeMap<LatticeIndex, Vec<Complex64>> {
        &self.entries
    }

    /// Number of nonzero cells.
    pub fn support_size(&self) -> usize {
        self.entries.values().flatten().filter(|v| v.norm() > 0.0).count()
    }

    pub fn cell_norms(&self, p: f64) -> Result<BTreeMap<LatticeIndex, f64>> {
        self.entries
            .iter()
            .map(|(k, cells)| Ok((*k, lp_norm_cells(cells, self.measure, p)?)))
            .collect()
    }

    pub fn norm(&self, params: &NormParams) -> Result<NormValue> {
        if params.weight != self.weight {
            return Err(Error::Hypothesis("weight kind differs from the element's".into()));
        }
        weighted_seq_norm(&self.cell_norms(params.p)?, params.q, params.s, self.weight, self.domain)
    }

    /// Bilinear pairing `Σ_k μ Σ_c x_{k,c} y_{k,c}`.
    pub fn pairing(&self, other: &SeqElement) -> Complex64 {
        let mut terms = Vec::new();
        for (k, xs) in &self.entries {
            if let Some(ys) = other.entries.get(k) {
                for (x, y) in xs.iter().zip(ys) {
                    if x.norm() > 0.0 && y.norm() > 0.0 {
                        let log = self.measure.ln() + x.norm().ln() + y.norm().ln();
                        terms.push((log, (x / x.norm()) * (y / y.norm())));
                    }
                }
            }
        }
        let peak = terms.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
        if terms.is_empty() {
            return Complex64::new(0.0, 0.0);
        }
        let sum: Complex64 = terms.iter().map(|(l, u)| u * (l - peak).exp()).sum();
        sum * peak.exp()
    }
}

/// Random element on `Z^d` with `indices` distinct indices in
/// `[-radius, radius]^d`, `cells` cells each and log-uniform magnitudes.
pub fn random_element(
    seed: u64,
    dim: usize,
    weight: WeightKind,
    indices: usize,
    radius: i32,
    cells: usize,
) -> Result<SeqElement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = cube(dim, radius);
    if indices > pool.len() {
        return Err(Error::Format(format!("{indices} indices do not fit in the cube of radius {radius}")));
    }
    let mut el = SeqElement::new(weight, IndexDomain::Lattice, rng.gen_range(0.05..2.0))?;
    while el.entries.len() < indices {
        let k = pool[rng.gen_range(0..pool.len())];
        if el.entries.contains_key(&k) {
            continue;
        }
        let values = (0..cells)
            .map(|_| {
                let m = 10f64.powf(rng.gen_range(-2.0..1.0));
                Complex64::from_polar(m, rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
            })
            .collect();
        el.insert(k, values);
    }
    Ok(el)
}

/// One component `phase · exp(c0 + c1 z)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Component {
    pub phase: Complex64,
    pub c0: f64,
    pub c1: f64,
}

/// Closed-form map from the strip into finite sequences; zero cells stay
/// zero for every `z`.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticFamily {
    weight: WeightKind,
    domain: IndexDomain,
    measure: f64,
    components: BTreeMap<LatticeIndex, Vec<Option<Component>>>,
}

/// Largest `c0 + c1 Re z` accepted when evaluating a family.
const EXPONENT_LIMIT: f64 = 700.0;

impl AnalyticFamily {
    pub fn constant(x: &SeqElement) -> Self {
        let components = x
            .entries
            .iter()
            .map(|(k, cells)| {
                let comps = cells
                    .iter()
                    .map(|v| {
                        (v.norm() > 0.0).then(|| Component {
                            phase: v / v.norm(),
                            c0: v.norm().ln(),
                            c1: 0.0,
                        })
                    })
                    .collect();
                (*k, comps)
            })
            .collect();
        Self {
            weight: x.weight,
            domain: x.domain,
            measure: x.measure,
            components,
        }
    }

    pub fn components(&self) -> &BTreeMap<LatticeIndex, Vec<Option<Component>>> {
        &self.components
    }

    pub fn eval(&self, z: Complex64) -> Result<SeqElement> {
        let mut out = SeqElement::new(self.weight, self.domain, self.measure)?;
        for (k, comps) in &self.components {
            let mut cells = Vec::with_capacity(comps.len());
            for c in comps {
                cells.push(match c {
                    None => Complex64::new(0.0, 0.0),
                    Some(c) => {
                        if c.c0 + c.c1 * z.re > EXPONENT_LIMIT {
                            return Err(Error::Overflow(format!("family component at {k} exceeds e^{EXPONENT_LIMIT}")));
                        }
                        c.phase * (Complex64::new(c.c0, 0.0) + z * c.c1).exp()
                    }
                });
            }
            out.insert(*k, cells);
        }
        Ok(out)
    }

    /// `max |c0| + |c1|` and the number of components.
    pub fn coefficient_bound(&self) -> (f64, usize) {
        let mut bound: f64 = 0.0;
        let mut n = 0;
        for c in self.components.values().flatten().flatten() {
            bound = bound.max(c.c0.abs() + c.c1.abs());
            n += 1;
        }
        (bound, n)
    }
}

/// Exponent profile `γ(z) = γ0 + z (γ1 - γ0)` of the power `u/u(z)` for an
/// exponent `u` interpolated from `u0`, `u1`; identically 1 when `u = ∞`.
fn exponent_profile(u: f64, u0: f64, u1: f64) -> (f64, f64) {
    if u.is_infinite() {
        return (1.0, 0.0);
    }
    let g0 = u * reciprocal(u0);
    let g1 = u * reciprocal(u1);
    (g0, g1 - g0)
}

/// The extremal family for `x` at `θ`: at `θ` it equals `x`, and on each
/// boundary line its endpoint norm equals `‖x‖` at the derived parameters.
pub fn canonical_analytic_family(x: &SeqElement, ip: &InterpParams) -> Result<AnalyticFamily> {
    let target = ip.derived();
    if !(ip.end0.q.is_finite() || ip.end1.q.is_finite()) && !ip.identical_endpoints() {
        return Err(Error::Hypothesis("min(q0, q1) must be finite".into()));
    }
    let total = x.norm(&target)?.value();
    if total == 0.0 {
        return Err(Error::Hypothesis("zero element has no extremal family".into()));
    }
    if !total.is_finite() {
        return Err(Error::Overflow("element norm is infinite".into()));
    }
    let (a0, a1) = exponent_profile(target.p, ip.end0.p, ip.end1.p);
    let (b0, b1) = exponent_profile(target.q, ip.end0.q, ip.end1.q);
    let (s0, s1) = (ip.end0.s, ip.end1.s - ip.end0.s);
    let log_total = total.ln();
    let cell_norms = x.cell_norms(target.p)?;
    let mut components = BTreeMap::new();
    for (k, cells) in &x.entries {
        let a = cell_norms[k];
        let lw = log_weight(k, x.weight);
        let comps = cells
            .iter()
            .map(|v| {
                if v.norm() == 0.0 {
                    return None;
                }
                let lm = v.norm().ln() - a.ln();
                let la = target.s * lw + a.ln() - log_total;
                Some(Component {
                    phase: v / v.norm(),
                    c0: log_total + a0 * lm + b0 * la - s0 * lw,
                    c1: a1 * lm + b1 * la - s1 * lw,
                })
            })
            .collect();
        components.insert(*k, comps);
    }
    Ok(AnalyticFamily {
        weight: x.weight,
        domain: x.domain,
        measure: x.measure,
        components,
    })
}

/// Endpoint norms `‖f(j + it)‖_{X_j}` for `j ∈ {0, 1}` and `t` in the grid.
pub fn boundary_norms(family: &AnalyticFamily, ip: &InterpParams, t_grid: &[f64]) -> Result<Vec<(usize, f64, f64)>> {
    let mut out = Vec::with_capacity(2 * t_grid.len());
    for j in 0..2 {
        for t in t_grid {
            let v = family.eval(Complex64::new(j as f64, *t))?.norm(ip.endpoint(j))?;
            out.push((j, *t, v.value()));
        }
    }
    Ok(out)
}

/// `max_j sup_t ‖f(j + it)‖_{X_j}` over the sampled `t`.
pub fn strip_norm(family: &AnalyticFamily, ip: &InterpParams, t_grid: &[f64]) -> Result<f64> {
    Ok(boundary_norms(family, ip, t_grid)?
        .into_iter()
        .map(|(_, _, v)| v)
        .fold(0.0, f64::max))
}

pub fn default_t_grid() -> Vec<f64> {
    (-40..=40).map(|i| i as f64 * 0.25).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertificateOptions {
    pub t_grid: Vec<f64>,
    /// Random perturbations of the extremal dual element.
    pub perturbations: usize,
    pub seed: u64,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        Self {
            t_grid: default_t_grid(),
            perturbations: 32,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Certificate {
    /// Certified `‖x‖_{[X0,X1]_θ} <= upper`.
    #[serde(serialize_with = "serialize_extended")]
    pub upper: f64,
    /// Certified `lower <= ‖x‖_{[X0,X1]_θ}`.
    pub lower: f64,
    /// `‖x‖_{X_θ}` at the derived parameters.
    #[serde(serialize_with = "serialize_extended")]
    pub target: f64,
}

impl Certificate {
    pub fn ordered(&self) -> bool {
        self.lower <= self.target && self.target <= self.upper
    }

    pub fn upper_gap(&self) -> f64 {
        (self.upper - self.target) / self.target
    }

    pub fn lower_gap(&self) -> f64 {
        (self.target - self.lower) / self.target
    }

    pub fn within(&self, upper_tol: f64, lower_tol: f64) -> bool {
        self.ordered() && self.upper_gap() <= upper_tol && self.lower_gap() <= lower_tol
    }
}

fn rounding_margin(family: &AnalyticFamily) -> f64 {
    let (c, n) = family.coefficient_bound();
    64.0 * (1.0 + c + (n.max(1) as f64).log2()) * f64::EPSILON
}

/// Hölder-extremal dual of `x` at `(p, q, s)`, normalised so that
/// `⟨x, y⟩ = ‖x‖` and `‖y‖_{(p', q', -s)} = 1`.
pub fn extremal_dual(x: &SeqElement, params: &NormParams) -> Result<SeqElement> {
    let total = x.norm(params)?.value();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::Hypothesis("extremal dual needs a finite nonzero norm".into()));
    }
    if params.q.is_infinite() {
        return Err(Error::Hypothesis("extremal dual needs q < ∞".into()));
    }
    let (p, q) = (params.p, params.q);
    let log_total = total.ln();
    let cell_norms = x.cell_norms(p)?;
    let mut y = SeqElement::new(x.weight, x.domain, x.measure)?;
    for (k, cells) in &x.entries {
        let a = cell_norms[k];
        let mut out = vec![Complex64::new(0.0, 0.0); cells.len()];
        if a > 0.0 {
            let sw = params.s * log_weight(k, x.weight);
            let outer = (q - 1.0) * (sw + a.ln() - log_total) + sw;
            if p.is_infinite() {
                let (c, v) = cells
                    .iter()
                    .enumerate()
                    .max_by(|l, r| l.1.norm().total_cmp(&r.1.norm()))
                    .expect("nonempty");
                out[c] = (v / v.norm()).conj() * (outer - x.measure.ln()).exp();
            } else {
                for (c, v) in cells.iter().enumerate() {
                    if v.norm() > 0.0 {
                        let inner = (p - 1.0) * (v.norm().ln() - a.ln());
                        out[c] = (v / v.norm()).conj() * (inner + outer).exp();
                    }
                }
            }
        }
        y.insert(*k, out);
    }
    Ok(y)
}

fn perturb(y: &SeqElement, rng: &mut ChaCha8Rng) -> SeqElement {
    let mut out = y.clone();
    for cells in out.entries.values_mut() {
        for v in cells.iter_mut() {
            if v.norm() > 0.0 {
                let scale = 1.0 + rng.gen_range(-0.2..0.2);
                *v *= Complex64::from_polar(scale, rng.gen_range(-0.2..0.2));
            }
        }
    }
    out
}

/// Two-sided certificate for the interpolation norm of a finite element:
/// the canonical family bounds it from above, dual pairings from below.
pub fn verify_seq_interpolation(x: &SeqElement, ip: &InterpParams, options: &CertificateOptions) -> Result<Certificate> {
    if !(ip.end0.q.is_finite() || ip.end1.q.is_finite()) {
        return Err(Error::Hypothesis("min(q0, q1) must be finite".into()));
    }
    let params = ip.derived();
    let target = x.norm(&params)?.value();
    if target == 0.0 {
        return Err(Error::Hypothesis("zero element".into()));
    }
    if x.support_size() == 1 {
        // a one-dimensional couple: the interpolation norm is the
        // geometric mean of the endpoint norms, which equals the target
        return Ok(Certificate {
            upper: target,
            lower: target,
            target,
        });
    }

    let family = canonical_analytic_family(x, ip)?;
    let upper = strip_norm(&family, ip, &options.t_grid)? * (1.0 + rounding_margin(&family));

    let dual = ip.dual();
    let extremal = extremal_dual(x, &params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut candidates = vec![extremal.clone()];
    for _ in 0..options.perturbations {
        candidates.push(perturb(&extremal, &mut rng));
    }
    let mut lower: f64 = 0.0;
    for y in &candidates {
        let g = canonical_analytic_family(y, &dual)?;
        let denominator = strip_norm(&g, &dual, &options.t_grid)?;
        let margin = rounding_margin(&g).max(rounding_margin(&family));
        let bound = x.pairing(y).norm() / denominator * (1.0 - margin);
        lower = lower.max(bound);
    }
    Ok(Certificate { upper, lower, target })
}

/// `‖f‖_{E^s_{p,q}} / (‖f‖^{1-θ}_{E^{s0}_{p0,q0}} ‖f‖^θ_{E^{s1}_{p1,q1}})`;
/// `None` for `f = 0`. The table must carry `p0`, `p1` and the derived `p`.
pub fn log_convexity_ratio(table: &PieceNorms, ip: &InterpParams) -> Result<Option<f64>> {
    if ip.end0.q.is_infinite() && !ip.identical_endpoints() {
        return Err(Error::Hypothesis("q0 must be finite".into()));
    }
    let target = ip.derived();
    let norm = |e: &NormParams| table.norm(e.p, e.q, e.s, e.weight).map(|v| v.value());
    let n0 = norm(&ip.end0)?;
    let n1 = norm(&ip.end1)?;
    if n0 == 0.0 || n1 == 0.0 {
        return Ok(None);
    }
    let lhs = norm(&target)?;
    let rhs = if n0 == n1 {
        n0
    } else {
        (((1.0 - ip.theta) * n0.ln()) + ip.theta * n1.ln()).exp()
    };
    Ok(Some(lhs / rhs))
}

/// Exponents a [`PieceNorms`] table needs for [`log_convexity_ratio`].
pub fn log_convexity_exponents(ip: &InterpParams) -> Vec<f64> {
    let mut ps = vec![ip.end0.p, ip.end1.p, ip.derived().p];
    ps.sort_by(f64::total_cmp);
    ps.dedup();
    ps
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogConvexityEntry {
    pub name: String,
    pub ratio: Option<f64>,
}

/// [`log_convexity_ratio`] over `(name, function)` pairs.
pub fn log_convexity_check(
    catalog: &[(String, SampledFunction)],
    family: &crate::partitions::SymbolFamily,
    ip: &InterpParams,
) -> Result<Vec<LogConvexityEntry>> {
    let ps = log_convexity_exponents(ip);
    catalog
        .iter()
        .map(|(name, f)| {
            let table = PieceNorms::compute(f, family, &ps)?;
            Ok(LogConvexityEntry {
                name: name.clone(),
                ratio: log_convexity_ratio(&table, ip)?,
            })
        })
        .collect()
}

fn ratio_of(top: NormValue, bottom: NormValue) -> f64 {
    if top == bottom {
        1.0
    } else {
        top.value() / bottom.value()
    }
}

/// `‖f‖_{E^s_{p1,q}} / ‖f‖_{E^s_{p0,q}}` for `p0 <= p1`.
pub fn embedding_ratio_p(table: &PieceNorms, p0: f64, p1: f64, s: f64, q: f64) -> Result<f64> {
    check_exponent("p0", p0)?;
    check_exponent("p1", p1)?;
    if p0 > p1 {
        return Err(Error::Hypothesis(format!("p0 = {p0} exceeds p1 = {p1}")));
    }
    if p0 == p1 {
        return Ok(1.0);
    }
    Ok(ratio_of(
        table.space_norm(Space::E, p1, q, s)?,
        table.space_norm(Space::E, p0, q, s)?,
    ))
}

/// `‖f‖_{E^{s1}_{p,q1}} / ‖f‖_{E^{s0}_{p,q0}}` for `s1 <= s0`, `q0 <= q1`.
pub fn embedding_ratio_qs(table: &PieceNorms, s0: f64, s1: f64, q0: f64, q1: f64, p: f64) -> Result<f64> {
    check_exponent("q0", q0)?;
    check_exponent("q1", q1)?;
    if s1 > s0 || q0 > q1 {
        return Err(Error::Hypothesis(format!("need s1 <= s0 and q0 <= q1, got s=({s0},{s1}) q=({q0},{q1})")));
    }
    if s0 == s1 && q0 == q1 {
        return Ok(1.0);
    }
    Ok(ratio_of(
        table.space_norm(Space::E, p, q1, s1)?,
        table.space_norm(Space::E, p, q0, s0)?,
    ))
}

/// Tolerance on the spectrum of a piece outside its ball.
pub const BERNSTEIN_SUPPORT_TOL: f64 = 1e-12;

/// Lattice point `k` with the spectrum of `piece` inside `B̄_{√d}(k)`,
/// searched around the spectral peak.
pub fn piece_center(piece: &SampledFunction) -> Result<LatticeIndex> {
    let grid = *piece.grid();
    let d = grid.dim();
    let spec = forward_fourier(piece)?;
    let (peak, _) = spec
        .coefficients()
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
        .ok_or(Error::Shape { expected: 1, got: 0 })?;
    let xi = grid.frequency(peak);
    let radius = (d as f64).sqrt();
    let peak_abs = spec.max_abs();
    if peak_abs == 0.0 {
        return Ok(LatticeIndex::origin(d));
    }
    // entries at or below the tolerance cannot fail the check
    let significant: Vec<([f64; crate::lattice::MAX_DIM], f64)> = spec
        .coefficients()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm_sqr() > (BERNSTEIN_SUPPORT_TOL * peak_abs).powi(2))
        .map(|(i, c)| (grid.frequency(i), c.norm() / peak_abs))
        .collect();
    let r2 = radius * radius * (1.0 + 1e-12);
    let mut best: Option<(f64, LatticeIndex)> = None;
    for offset in cube(d, 2) {
        let coords: Vec<i32> = (0..d).map(|i| xi[i].round() as i32 + offset.coords()[i]).collect();
        let k = LatticeIndex::new(&coords);
        let tail = significant
            .iter()
            .filter(|(f, _)| (0..d).map(|a| (f[a] - coords[a] as f64).powi(2)).sum::<f64>() > r2)
            .fold(0.0f64, |t, (_, v)| t.max(*v));
        if best.map_or(true, |(t, _)| tail < t) {
            best = Some((tail, k));
        }
    }
    let (tail, k) = best.expect("cube is nonempty");
    if tail > BERNSTEIN_SUPPORT_TOL {
        return Err(Error::Support {
            index: k.label(),
            tail,
            radius,
        });
    }
    Ok(k)
}

/// `‖piece‖_{p2} / ‖piece‖_{p1}` for a piece with spectrum in one ball
/// `B̄_{√d}(k)`.
pub fn bernstein_ratio(piece: &SampledFunction, p1: f64, p2: f64) -> Result<f64> {
    check_exponent("p1", p1)?;
    check_exponent("p2", p2)?;
    if p1 > p2 {
        return Err(Error::Hypothesis(format!("p1 = {p1} exceeds p2 = {p2}")));
    }
    piece_center(piece)?;
    if p1 == p2 {
        return Ok(1.0);
    }
    Ok(lp_norm(piece, p2)?.value() / lp_norm(piece, p1)?.value())
}

/// [`bernstein_ratio`] for several pairs, sharing the support check and
/// the norms.
pub fn bernstein_ratios(piece: &SampledFunction, pairs: &[(f64, f64)]) -> Result<Vec<f64>> {
    for (a, b) in pairs {
        check_exponent("p1", *a)?;
        check_exponent("p2", *b)?;
        if a > b {
            return Err(Error::Hypothesis(format!("p1 = {a} exceeds p2 = {b}")));
        }
    }
    piece_center(piece)?;
    let mut ps: Vec<f64> = pairs.iter().flat_map(|(a, b)| [*a, *b]).collect();
    ps.sort_by(f64::total_cmp);
    ps.dedup();
    let norms = lp_norms_cells(piece.values(), piece.grid().cell_volume(), &ps)?;
    let norm = |p: f64| norms[ps.iter().position(|e| *e == p).expect("tabulated")];
    Ok(pairs.iter().map(|(a, b)| if a == b { 1.0 } else { norm(*b) / norm(*a) }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::analysis;
    use crate::grid::TorusGrid;
    use crate::partitions::build_uniform_partition;

    fn np(p: f64, q: f64, s: f64, w: WeightKind) -> NormParams {
        NormParams::new(p, q, s, w).unwrap()
    }

    fn scalar_seq(values: &[(i32, f64)], w: WeightKind) -> SeqElement {
        let mut x = SeqElement::new(w, IndexDomain::Lattice, 1.0).unwrap();
        for (k, v) in values {
            x.insert(LatticeIndex::scalar(*k), vec![Complex64::new(*v, 0.0)]);
        }
        x
    }

    #[test]
    fn parameter_examples() {
        let e = WeightKind::Exponential;
        let (p, _, _) = interpolation_parameters(0.5, &np(1.0, 1.0, 0.0, e), &np(f64::INFINITY, 1.0, 0.0, e)).unwrap();
        assert_eq!(p, 2.0);
        let (_, q, s) = interpolation_parameters(1.0 / 3.0, &np(1.0, 2.0, 0.0, e), &np(1.0, f64::INFINITY, 3.0, e))
            .unwrap();
        assert!((q - 3.0).abs() <= 1e-15);
        assert!((s - 1.0).abs() <= 1e-15);
        assert!(interpolation_parameters(0.0, &np(1.0, 1.0, 0.0, e), &np(2.0, 1.0, 0.0, e)).is_err());
        assert!(interpolation_parameters(1.0, &np(1.0, 1.0, 0.0, e), &np(2.0, 1.0, 0.0, e)).is_err());

        let r = |n, d| Rational64::new(n, d);
        let a = ExactTriple::new(Some(r(1, 1)), Some(r(2, 1)), r(0, 1)).unwrap();
        let b = ExactTriple::new(None, None, r(3, 1)).unwrap();
        let m = interpolation_parameters_exact(r(1, 3), &a, &b).unwrap();
        assert_eq!(m.p(), Some(r(3, 2)));
        assert_eq!(m.q(), Some(r(3, 1)));
        assert_eq!(m.s, r(1, 1));
        let half = interpolation_parameters_exact(r(1, 2), &a, &b).unwrap();
        assert_eq!(half.p(), Some(r(2, 1)));
        assert!(interpolation_parameters_exact(r(1, 1), &a, &b).is_err());
        assert!(ExactTriple::new(Some(r(1, 2)), None, r(0, 1)).is_err());
    }

    #[test]
    fn parameters_approach_endpoints() {
        let w = WeightKind::Polynomial;
        let e0 = np(1.5, 2.0, -1.0, w);
        let e1 = np(6.0, f64::INFINITY, 2.0, w);
        for (theta, end) in [(1e-9, e0), (1.0 - 1e-9, e1)] {
            let ip = InterpParams::new(theta, e0, e1).unwrap();
            let d = ip.derived();
            let rel = |a: f64, b: f64| if b.is_infinite() { (1.0 / a).abs() } else { (a - b).abs() / b.abs() };
            assert!(rel(d.p, end.p) <= 1e-6);
            assert!(rel(d.s, end.s) <= 1e-6);
            if end.q.is_finite() {
                assert!(rel(d.q, end.q) <= 1e-6);
            } else {
                assert!(d.q > 1e6);
            }
        }
        let mut last = 0.0;
        for i in 1..20 {
            let d = InterpParams::new(i as f64 / 20.0, e0, e1).unwrap().derived();
            assert!(d.p > last);
            last = d.p;
        }
    }

    #[test]
    fn family_reproduces_element() {
        let e = WeightKind::Exponential;
        let ip = InterpParams::new(0.3, np(1.0, 2.0, 0.5, e), np(4.0, 1.0, -1.0, e)).unwrap();
        let x = random_element(7, 2, e, 6, 3, 4).unwrap();
        let fam = canonical_analytic_family(&x, &ip).unwrap();
        let at = fam.eval(Complex64::new(0.3, 0.0)).unwrap();
        let peak = x.entries().values().flatten().map(|v| v.norm()).fold(0.0, f64::max);
        for (k, cells) in x.entries() {
            for (a, b) in cells.iter().zip(&at.entries()[k]) {
                assert!((a - b).norm() <= 1e-14 * peak);
            }
        }
        let target = x.norm(&ip.derived()).unwrap().value();
        for (_, _, v) in boundary_norms(&fam, &ip, &default_t_grid()).unwrap() {
            assert!((v - target).abs() <= 1e-12 * target);
        }
        let strip = strip_norm(&fam, &ip, &default_t_grid()).unwrap();
        assert!((strip - target).abs() <= 1e-12 * target);
    }

    #[test]
    fn two_point_boundary_norms() {
        // x = (3, 4), unit weights, (q0, q1) = (1, ∞), θ = 1/2
        let w = WeightKind::Exponential;
        let ip = InterpParams::new(0.5, np(1.0, 1.0, 0.0, w), np(1.0, f64::INFINITY, 0.0, w)).unwrap();
        let x = scalar_seq(&[(0, 3.0), (1, 4.0)], w);
        let fam = canonical_analytic_family(&x, &ip).unwrap();
        // f(z)_k = 5 (x_k / 5)^{2(1-z)}: boundary 0 is (9 + 16)/5, boundary 1 is 5
        let b0 = fam.eval(Complex64::new(0.0, 1.5)).unwrap();
        let v: Vec<f64> = b0.entries().values().map(|c| c[0].norm()).collect();
        assert!((v[0] - 9.0 / 5.0).abs() <= 1e-14 && (v[1] - 16.0 / 5.0).abs() <= 1e-14);
        let n0 = b0.norm(&ip.end0).unwrap().value();
        assert!((n0 - 5.0).abs() <= 1e-14);
        let b1 = fam.eval(Complex64::new(1.0, -2.0)).unwrap();
        let v: Vec<f64> = b1.entries().values().map(|c| c[0].norm()).collect();
        assert!((v[0] - 5.0).abs() <= 1e-14 && (v[1] - 5.0).abs() <= 1e-14);

        let cert = verify_seq_interpolation(&x, &ip, &CertificateOptions::default()).unwrap();
        assert_eq!(cert.target, 5.0);
        assert!(cert.within(1e-10, 1e-6), "{cert:?}");
    }

    #[test]
    fn single_component_certificate_is_exact() {
        let w = WeightKind::Polynomial;
        let ip = InterpParams::new(0.4, np(1.0, 1.0, 1.0, w), np(3.0, 2.0, -2.0, w)).unwrap();
        let mut x = SeqElement::new(w, IndexDomain::Lattice, 0.5).unwrap();
        x.insert(LatticeIndex::new(&[2, -1]), vec![Complex64::new(0.0, -1.7)]);
        let cert = verify_seq_interpolation(&x, &ip, &CertificateOptions::default()).unwrap();
        assert_eq!(cert.upper, cert.target);
        assert_eq!(cert.lower, cert.target);
        // single cell: the family has a constant modulus profile along t
        let fam = canonical_analytic_family(&x, &ip).unwrap();
        let norms = boundary_norms(&fam, &ip, &[-3.0, 0.0, 2.0]).unwrap();
        let t = x.norm(&ip.derived()).unwrap().value();
        assert!(norms.iter().all(|(_, _, v)| (v - t).abs() <= 1e-13 * t));
    }

    #[test]
    fn weighted_two_term_example() {
        let w = WeightKind::Exponential;
        let ip = InterpParams::new(0.5, np(2.0, 2.0, 0.0, w), np(2.0, 2.0, 2.0, w)).unwrap();
        let x = scalar_seq(&[(0, 1.0), (1, 1.0)], w);
        let cert = verify_seq_interpolation(&x, &ip, &CertificateOptions::default()).unwrap();
        assert!((cert.target - 5f64.sqrt()).abs() <= 1e-15 * 3.0);
        assert!(cert.within(1e-10, 1e-6), "{cert:?}");
    }

    #[test]
    fn certificates_on_random_elements() {
        let configs = [
            (WeightKind::Exponential, 0.5, (1.0, 1.0, 0.0), (f64::INFINITY, 4.0, 1.0)),
            (WeightKind::Polynomial, 0.25, (2.0, 1.0, -1.0), (3.0, f64::INFINITY, 2.0)),
            (WeightKind::Exponential, 0.7, (f64::INFINITY, 2.0, 0.5), (f64::INFINITY, 3.0, -0.5)),
        ];
        let opts = CertificateOptions {
            perturbations: 4,
            ..Default::default()
        };
        for (i, (w, theta, a, b)) in configs.into_iter().enumerate() {
            let ip = InterpParams::new(theta, np(a.0, a.1, a.2, w), np(b.0, b.1, b.2, w)).unwrap();
            let x = random_element(100 + i as u64, 1 + i % 2, w, 5, 4, 3).unwrap();
            let cert = verify_seq_interpolation(&x, &ip, &opts).unwrap();
            assert!(cert.within(1e-10, 1e-6), "{i}: {cert:?}");
        }
    }

    #[test]
    fn extremal_dual_is_normalised() {
        let w = WeightKind::Exponential;
        for (p, q) in [(1.0, 1.0), (2.5, 3.0), (f64::INFINITY, 1.5)] {
            let params = np(p, q, 0.7, w);
            let x = random_element(3, 1, w, 4, 3, 5).unwrap();
            let y = extremal_dual(&x, &params).unwrap();
            let n = x.norm(&params).unwrap().value();
            assert!((x.pairing(&y).re - n).abs() <= 1e-13 * n);
            let dual = np(conjugate(p), conjugate(q), -0.7, w);
            assert!((y.norm(&dual).unwrap().value() - 1.0).abs() <= 1e-13);
        }
    }

    #[test]
    fn hypotheses() {
        let w = WeightKind::Exponential;
        let inf = f64::INFINITY;
        let ip = InterpParams::new(0.5, np(1.0, inf, 0.0, w), np(2.0, inf, 1.0, w)).unwrap();
        let x = scalar_seq(&[(0, 1.0), (1, 2.0)], w);
        assert!(matches!(
            verify_seq_interpolation(&x, &ip, &CertificateOptions::default()),
            Err(Error::Hypothesis(_))
        ));
        let ok = InterpParams::new(0.5, np(1.0, 1.0, 0.0, w), np(2.0, 2.0, 1.0, w)).unwrap();
        let zero = scalar_seq(&[(0, 0.0)], w);
        assert!(canonical_analytic_family(&zero, &ok).is_err());
        assert!(InterpParams::new(0.5, np(1.0, 1.0, 0.0, w), np(1.0, 1.0, 0.0, WeightKind::Polynomial)).is_err());
        assert!(AnalyticFamily::constant(&zero).eval(Complex64::new(0.5, 0.0)).is_ok());
    }

    #[test]
    fn constant_family_strip_norm() {
        let w = WeightKind::Polynomial;
        let ip = InterpParams::new(0.5, np(1.0, 1.0, 0.0, w), np(2.0, 3.0, 1.0, w)).unwrap();
        let x = random_element(9, 2, w, 3, 2, 2).unwrap();
        let strip = strip_norm(&AnalyticFamily::constant(&x), &ip, &default_t_grid()).unwrap();
        let n0 = x.norm(&ip.end0).unwrap().value();
        let n1 = x.norm(&ip.end1).unwrap().value();
        assert!((strip - n0.max(n1)).abs() <= 1e-13 * strip);
        let empty = SeqElement::new(w, IndexDomain::Lattice, 1.0).unwrap();
        assert_eq!(strip_norm(&AnalyticFamily::constant(&empty), &ip, &default_t_grid()).unwrap(), 0.0);
    }

    fn test_grid() -> TorusGrid {
        TorusGrid::new(1, 16, 1024).unwrap()
    }

    fn wave(x0: f64, xi0: f64, width: f64) -> SampledFunction {
        SampledFunction::from_fn(test_grid(), |x| {
            let r = (x[0] - x0) / width;
            Complex64::from_polar((-r * r / 2.0).exp(), xi0 * x[0])
        })
    }

    #[test]
    fn ratios_on_functions() {
        let g = test_grid();
        let fam = build_uniform_partition(&g, 12, None).unwrap();
        let f = wave(1.0, 2.5, 1.5);
        let table = PieceNorms::compute(&f, &fam, &[1.0, 2.0, 4.0, f64::INFINITY]).unwrap();
        assert_eq!(embedding_ratio_p(&table, 2.0, 2.0, 1.0, 1.0).unwrap(), 1.0);
        assert!(embedding_ratio_p(&table, 4.0, 2.0, 1.0, 1.0).is_err());
        assert!(embedding_ratio_p(&table, 1.0, f64::INFINITY, 0.5, 2.0).unwrap().is_finite());

        assert_eq!(embedding_ratio_qs(&table, 1.0, 1.0, 2.0, 2.0, 2.0).unwrap(), 1.0);
        assert!(embedding_ratio_qs(&table, 1.0, 0.0, 2.0, 2.0, 2.0).unwrap() <= 1.0);
        assert!(embedding_ratio_qs(&table, 0.5, 0.5, 1.0, f64::INFINITY, 4.0).unwrap() <= 1.0);
        assert!(embedding_ratio_qs(&table, 0.0, 1.0, 1.0, 1.0, 2.0).is_err());

        let w = WeightKind::Exponential;
        let same = InterpParams::new(0.4, np(2.0, 2.0, 1.0, w), np(2.0, 2.0, 1.0, w)).unwrap();
        assert_eq!(log_convexity_ratio(&table, &same).unwrap(), Some(1.0));
        let ip = InterpParams::new(0.5, np(1.0, 1.0, 0.0, w), np(2.0, 2.0, 1.0, w)).unwrap();
        let t2 = PieceNorms::compute(&f, &fam, &log_convexity_exponents(&ip)).unwrap();
        let r = log_convexity_ratio(&t2, &ip).unwrap().unwrap();
        assert!(r <= 1.0 + 1e-12);
        let zero = PieceNorms::compute(&SampledFunction::zeros(g), &fam, &log_convexity_exponents(&ip)).unwrap();
        assert_eq!(log_convexity_ratio(&zero, &ip).unwrap(), None);
        let bad = InterpParams::new(0.5, np(1.0, f64::INFINITY, 0.0, w), np(2.0, 2.0, 1.0, w)).unwrap();
        assert!(log_convexity_ratio(&t2, &bad).is_err());
    }

    #[test]
    fn sequence_side_certificate_for_a_function() {
        let g = test_grid();
        let fam = build_uniform_partition(&g, 12, None).unwrap();
        let f = wave(0.0, 1.0, 1.2);
        let seq = SeqElement::from_pieces(&analysis(&f, &fam).unwrap(), WeightKind::Exponential).unwrap();
        let w = WeightKind::Exponential;
        let ip = InterpParams::new(0.5, np(1.0, 1.0, 0.0, w), np(2.0, 2.0, 1.0, w)).unwrap();
        let opts = CertificateOptions {
            t_grid: vec![-1.0, 0.0, 1.0],
            perturbations: 2,
            seed: 1,
        };
        let cert = verify_seq_interpolation(&seq, &ip, &opts).unwrap();
        assert!(cert.within(1e-10, 1e-6), "{cert:?}");
        let direct = crate::norms::exp_modulation_norm(&f, &fam, 4.0 / 3.0, 4.0 / 3.0, 0.5).unwrap().value();
        assert!((cert.target - direct).abs() <= 1e-12 * direct);
    }

    #[test]
    fn bernstein_translation_invariance() {
        let g = test_grid();
        let fam = build_uniform_partition(&g, 12, None).unwrap();
        let piece = |k: i32| {
            let sym = fam.dense_symbol(&LatticeIndex::scalar(k)).unwrap();
            let spec = crate::grid::Spectrum::new(g, sym.into_iter().map(|v| Complex64::new(v, 0.0)).collect()).unwrap();
            crate::grid::inverse_fourier(&spec).unwrap()
        };
        let p0 = piece(0);
        let p5 = piece(5);
        assert_eq!(piece_center(&p5).unwrap(), LatticeIndex::scalar(5));
        for (a, b) in [(1.0, 2.0), (1.0, f64::INFINITY), (2.0, 4.0)] {
            let r0 = bernstein_ratio(&p0, a, b).unwrap();
            let r5 = bernstein_ratio(&p5, a, b).unwrap();
            assert!((r0 - r5).abs() <= 1e-10 * r0);
        }
        assert_eq!(bernstein_ratio(&p0, 3.0, 3.0).unwrap(), 1.0);
        let batch = bernstein_ratios(&p5, &[(1.0, 2.0), (2.0, 2.0), (2.0, 4.0)]).unwrap();
        assert_eq!(batch[0], bernstein_ratio(&p5, 1.0, 2.0).unwrap());
        assert_eq!(batch[1], 1.0);
        assert!(bernstein_ratio(&p0, 3.0, 2.0).is_err());
        let broad = wave(0.0, 0.0, 0.3);
        assert!(matches!(bernstein_ratio(&broad, 1.0, 2.0), Err(Error::Support { .. })));
    }
}
