//! Fourier-analytic study of the sampled counting vector `X = φ(T)`.
//!
//! Everything that can be exact is exact. Torus points carry rational
//! coordinates, so inner products `⟨φ(b),θ⟩` are computed in exact
//! arithmetic and reduced mod 1 before any floating-point enters. Two
//! consequences matter for the checks built on top:
//!
//! * at `θ = 0` and at every lattice point of `L` each factor of the
//!   characteristic-function product is exactly `1`, so `X̂` evaluates to
//!   `1.0` with zero error, and
//! * shifting `θ` by a lattice point changes each exact phase by an
//!   integer, so the reduced phases — and therefore the floating-point
//!   product — are bit-identical before and after the shift.
//!
//! The distribution oracle (`exact_distribution`) is pure rational
//! arithmetic and anchors every probabilistic claim in the crate; the
//! Gaussian local-limit prediction and the lemma checks use floating point
//! only in the final comparison, with compensated (Neumaier) accumulation
//! where sums over many terms appear.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::framework::{Instance, PhiVector};
use crate::linalg;
use crate::sampler;

// ---------------------------------------------------------------------------
// compensated summation
// ---------------------------------------------------------------------------

/// Neumaier's variant of Kahan summation: exact-ish running sums even when
/// individual terms exceed the running total.
#[derive(Clone, Copy, Debug, Default)]
struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.comp
    }
}

// ---------------------------------------------------------------------------
// torus points and metric
// ---------------------------------------------------------------------------

/// Reduces a rational mod 1 into the canonical interval `[-1/2, 1/2)`.
fn reduce_unit(x: &BigRational) -> BigRational {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let shifted = (x + &half).floor();
    x - shifted
}

/// A point of the torus `T^A`, `T = [-1/2, 1/2)`, with exact rational
/// coordinates kept in canonical reduced form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusPoint(Vec<BigRational>);

impl TorusPoint {
    #[must_use]
    pub fn zero(dim: usize) -> Self {
        TorusPoint(vec![BigRational::zero(); dim])
    }

    /// Builds a point from arbitrary rationals, reducing each mod 1.
    #[must_use]
    pub fn from_rationals(coords: Vec<BigRational>) -> Self {
        TorusPoint(coords.iter().map(reduce_unit).collect())
    }

    /// Convenience constructor from `(numerator, denominator)` pairs.
    pub fn from_fractions(fractions: &[(i64, i64)]) -> Result<Self> {
        let mut coords = Vec::with_capacity(fractions.len());
        for &(num, den) in fractions {
            if den == 0 {
                return Err(Error::invalid("zero denominator in torus coordinate"));
            }
            coords.push(BigRational::new(BigInt::from(num), BigInt::from(den)));
        }
        Ok(TorusPoint::from_rationals(coords))
    }

    #[must_use]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    #[must_use]
    pub fn coords(&self) -> &[BigRational] {
        &self.0
    }

    #[must_use]
    pub fn get(&self, i: usize) -> &BigRational {
        &self.0[i]
    }

    /// Coordinate-wise sum on the torus (reduced mod 1).
    pub fn add(&self, other: &TorusPoint) -> Result<TorusPoint> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "torus points of dimension {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(TorusPoint::from_rationals(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }

    /// Scales every coordinate and re-reduces. For `0 < s ≤ 1` this shrinks
    /// the canonical representative without wrapping.
    #[must_use]
    pub fn scale(&self, factor: &BigRational) -> TorusPoint {
        TorusPoint::from_rationals(self.0.iter().map(|c| c * factor).collect())
    }

    /// Exact squared Euclidean norm of the canonical representative.
    #[must_use]
    pub fn norm_sq(&self) -> BigRational {
        self.0.iter().map(|c| c * c).sum()
    }

    /// `‖θ‖₂` of the canonical representative.
    #[must_use]
    pub fn norm(&self) -> f64 {
        self.norm_sq().to_f64().unwrap_or(f64::NAN).sqrt()
    }

    #[must_use]
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }
}

impl std::fmt::Display for TorusPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Exact squared wraparound distance between two points.
fn torus_distance_sq(a: &TorusPoint, b: &TorusPoint) -> Result<BigRational> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "torus points of dimension {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    let mut sum = BigRational::zero();
    for (x, y) in a.0.iter().zip(&b.0) {
        let d = reduce_unit(&(x - y));
        sum += &d * &d;
    }
    Ok(sum)
}

/// Wraparound `ℓ₂` distance: per-coordinate differences are taken mod 1
/// with minimal absolute value.
pub fn torus_distance(a: &TorusPoint, b: &TorusPoint) -> Result<f64> {
    Ok(torus_distance_sq(a, b)?.to_f64().unwrap_or(f64::NAN).sqrt())
}

/// `min_{s ∈ set} d(θ, s)`; the minimum is taken over exact squared
/// distances, so ties and comparisons are deterministic.
pub fn distance_to_set(theta: &TorusPoint, set: &[TorusPoint]) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::EmptySet("distance target set"));
    }
    let mut best: Option<BigRational> = None;
    for point in set {
        let d = torus_distance_sq(theta, point)?;
        if best.as_ref().is_none_or(|b| d < *b) {
            best = Some(d);
        }
    }
    Ok(best
        .expect("set is nonempty")
        .to_f64()
        .unwrap_or(f64::NAN)
        .sqrt())
}

/// Distance from `θ` to the grid `M = (1/m·ℤ)^A`, computed coordinatewise:
/// the nearest multiple of `1/m` to `θ_a` is `|m·θ_a mod 1|/m` away. Exact
/// until the final square root.
#[must_use]
pub fn distance_to_m(theta: &TorusPoint, m: u64) -> f64 {
    let m_big = BigRational::from(BigInt::from(m));
    let mut sum = BigRational::zero();
    for c in theta.coords() {
        let d = reduce_unit(&(c * &m_big)) / &m_big;
        sum += &d * &d;
    }
    sum.to_f64().unwrap_or(f64::NAN).sqrt()
}

/// A deterministic pseudo-random torus point: each coordinate is `j/denom`
/// with `j` uniform in `[-max_numer, max_numer]`.
pub fn seeded_torus_point(dim: usize, seed: u64, denom: u64, max_numer: u64) -> Result<TorusPoint> {
    if denom == 0 {
        return Err(Error::invalid("zero denominator for seeded torus point"));
    }
    let bound = i64::try_from(max_numer)
        .map_err(|_| Error::invalid("max_numer too large for seeded torus point"))?;
    let mut rng = sampler::substream_rng(seed, 0);
    let mut coords = Vec::with_capacity(dim);
    for _ in 0..dim {
        let j = rng.random_range(-bound..=bound);
        coords.push(BigRational::new(BigInt::from(j), BigInt::from(denom)));
    }
    Ok(TorusPoint::from_rationals(coords))
}

// ---------------------------------------------------------------------------
// correlation matrix
// ---------------------------------------------------------------------------

/// The Gram matrix `R_{a',a''} = Σ_b φ(b)_{a'}·φ(b)_{a''}` in exact integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorrelationMatrix {
    entries: Vec<Vec<BigInt>>,
}

impl CorrelationMatrix {
    #[must_use]
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    #[must_use]
    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i][j]
    }

    #[must_use]
    pub fn rows(&self) -> &[Vec<BigInt>] {
        &self.entries
    }

    /// Exact determinant (Bareiss fraction-free elimination).
    #[must_use]
    pub fn det(&self) -> BigInt {
        linalg::int_det_bareiss(self.entries.clone())
    }

    /// Exact positive-semidefiniteness check by pivoting.
    #[must_use]
    pub fn is_positive_semidefinite(&self) -> bool {
        linalg::int_psd_check(&self.entries)
    }

    /// `θᵀRθ` as an exact rational.
    pub fn quadratic_form(&self, theta: &TorusPoint) -> Result<BigRational> {
        if theta.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "matrix of dimension {} against point of dimension {}",
                self.dim(),
                theta.dim()
            )));
        }
        let mut total = BigRational::zero();
        for (i, row) in self.entries.iter().enumerate() {
            for (j, r) in row.iter().enumerate() {
                total += BigRational::from(r.clone()) * theta.get(i) * theta.get(j);
            }
        }
        Ok(total)
    }
}

/// Accumulates `R = Σ_b φ(b)·φ(b)ᵀ` over the whole ground set.
pub fn correlation_matrix(instance: &Instance) -> Result<CorrelationMatrix> {
    instance.check_budget(instance.size() as u128)?;
    let dim = instance.dim();
    let mut entries = vec![vec![BigInt::zero(); dim]; dim];
    for key in instance.elements() {
        let phi = instance.phi(&key)?;
        for i in 0..dim {
            let pi = phi.get(i);
            if pi.is_zero() {
                continue;
            }
            for j in 0..dim {
                let term = pi * phi.get(j);
                entries[i][j] += term;
            }
        }
    }
    for i in 0..dim {
        for j in 0..i {
            debug_assert_eq!(entries[i][j], entries[j][i]);
        }
    }
    Ok(CorrelationMatrix { entries })
}

// ---------------------------------------------------------------------------
// characteristic function
// ---------------------------------------------------------------------------

/// `⟨φ(b),θ⟩` reduced mod 1 into `[-1/2, 1/2)`, exactly.
fn reduced_phase(phi: &PhiVector, theta: &TorusPoint) -> BigRational {
    let mut acc = BigRational::zero();
    for (i, coord) in theta.coords().iter().enumerate() {
        let entry = phi.get(i);
        if !entry.is_zero() {
            acc += BigRational::from(entry.clone()) * coord;
        }
    }
    reduce_unit(&acc)
}

/// One factor `1-p+p·e^{2πix}` with the exact phase `x ∈ [-1/2, 1/2)`.
/// Half-integer phases are special-cased so that the factor is exactly
/// `1.0` at `x = 0` and exactly `1-2p` at `x = -1/2`.
fn bernoulli_factor(p: f64, q: f64, x: &BigRational) -> Complex64 {
    if x.is_zero() {
        return Complex64::new(1.0, 0.0);
    }
    let half = BigRational::new(BigInt::from(-1), BigInt::from(2));
    if *x == half {
        return Complex64::new(q - p, 0.0);
    }
    let angle = 2.0 * PI * x.to_f64().unwrap_or(f64::NAN);
    Complex64::new(q + p * angle.cos(), p * angle.sin())
}

fn validate_probability(p: &BigRational) -> Result<()> {
    if p < &BigRational::zero() || p > &BigRational::one() {
        return Err(Error::invalid(format!("p = {p} is not a probability")));
    }
    Ok(())
}

/// The characteristic function `X̂(θ) = Π_b (1-p+p·e^{2πi⟨φ(b),θ⟩})`.
///
/// Phases are exact rationals reduced mod 1 before conversion, so `X̂(0)`
/// is exactly `1` and shifts by lattice points of `L` reproduce the value
/// bit-for-bit.
pub fn fourier_coefficient(
    instance: &Instance,
    p: &BigRational,
    theta: &TorusPoint,
) -> Result<Complex64> {
    validate_probability(p)?;
    if theta.dim() != instance.dim() {
        return Err(Error::DimensionMismatch(format!(
            "θ has dimension {}, instance has {}",
            theta.dim(),
            instance.dim()
        )));
    }
    instance.check_budget(instance.size() as u128)?;
    let pf = p.to_f64().unwrap_or(f64::NAN);
    let qf = (BigRational::one() - p).to_f64().unwrap_or(f64::NAN);
    let mut product = Complex64::new(1.0, 0.0);
    for key in instance.elements() {
        let phi = instance.phi(&key)?;
        let phase = reduced_phase(&phi, theta);
        if phase.is_zero() {
            continue;
        }
        product *= bernoulli_factor(pf, qf, &phase);
    }
    Ok(product)
}

/// `ln|X̂(θ)|` via `½·Σ_b ln(1 - 4p(1-p)sin²(π·x_b))` with compensated
/// summation; returns `-∞` when some factor vanishes exactly.
pub fn log_abs_fourier_coefficient(
    instance: &Instance,
    p: &BigRational,
    theta: &TorusPoint,
) -> Result<f64> {
    validate_probability(p)?;
    if theta.dim() != instance.dim() {
        return Err(Error::DimensionMismatch(format!(
            "θ has dimension {}, instance has {}",
            theta.dim(),
            instance.dim()
        )));
    }
    instance.check_budget(instance.size() as u128)?;
    let pf = p.to_f64().unwrap_or(f64::NAN);
    let coeff = 4.0 * pf * (1.0 - pf);
    let mut sum = NeumaierSum::default();
    for key in instance.elements() {
        let phi = instance.phi(&key)?;
        let phase = reduced_phase(&phi, theta);
        if phase.is_zero() {
            continue;
        }
        let s = (PI * phase.to_f64().unwrap_or(f64::NAN)).sin();
        let drop = coeff * s * s;
        if drop >= 1.0 {
            return Ok(f64::NEG_INFINITY);
        }
        sum.add(0.5 * (-drop).ln_1p());
    }
    Ok(sum.value())
}

fn rational_p(instance: &Instance, n: u64) -> Result<BigRational> {
    if n == 0 || n > instance.size() {
        return Err(Error::NOutOfRange {
            n,
            max: instance.size(),
        });
    }
    Ok(BigRational::new(
        BigInt::from(n),
        BigInt::from(instance.size()),
    ))
}

// ---------------------------------------------------------------------------
// exact distribution oracle
// ---------------------------------------------------------------------------

/// The exact law of `X = φ(T)` under the Bernoulli model, as a map from
/// reachable integer vectors to rational probabilities summing to 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistributionTable {
    map: BTreeMap<PhiVector, BigRational>,
}

impl DistributionTable {
    #[must_use]
    pub fn support_size(&self) -> usize {
        self.map.len()
    }

    /// Probability of one point; zero when the point is unreachable.
    #[must_use]
    pub fn probability(&self, value: &PhiVector) -> BigRational {
        self.map.get(value).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PhiVector, &BigRational)> {
        self.map.iter()
    }

    /// Total mass, recomputed; equals 1 by construction.
    #[must_use]
    pub fn total_mass(&self) -> BigRational {
        self.map.values().sum()
    }
}

/// Convolves the `|B|` independent two-point measures `(1-p)·δ_0 + p·δ_{φ(b)}`
/// sequentially, in exact rational arithmetic.
pub fn exact_distribution(instance: &Instance, n: u64) -> Result<DistributionTable> {
    let p = rational_p(instance, n)?;
    let q = BigRational::one() - &p;
    instance.check_budget(instance.size() as u128)?;
    let mut map: BTreeMap<PhiVector, BigRational> = BTreeMap::new();
    map.insert(PhiVector::zeros(instance.dim()), BigRational::one());
    for key in instance.elements() {
        instance.check_budget(2 * map.len() as u128)?;
        let phi = instance.phi(&key)?;
        let mut next: BTreeMap<PhiVector, BigRational> = BTreeMap::new();
        for (value, mass) in &map {
            if !q.is_zero() {
                let stay = next.entry(value.clone()).or_insert_with(BigRational::zero);
                *stay += mass * &q;
            }
            if !p.is_zero() {
                let mut shifted = value.clone();
                shifted.add_assign(&phi);
                let step = next.entry(shifted).or_insert_with(BigRational::zero);
                *step += mass * &p;
            }
        }
        map = next;
    }
    let table = DistributionTable { map };
    debug_assert!(table.total_mass().is_one());
    Ok(table)
}

/// `Pr[X = target]` from the exact oracle (0 when unreachable).
pub fn exact_point_probability(
    instance: &Instance,
    n: u64,
    target: &PhiVector,
) -> Result<BigRational> {
    if target.dim() != instance.dim() {
        return Err(Error::DimensionMismatch(format!(
            "target has dimension {}, instance has {}",
            target.dim(),
            instance.dim()
        )));
    }
    Ok(exact_distribution(instance, n)?.probability(target))
}

/// `Pr[X = E[X]]`, the quantity the search loop needs to be positive.
/// Returns exactly 0 when `E[X]` is fractional.
pub fn exact_mean_probability(instance: &Instance, n: u64) -> Result<BigRational> {
    let expected = instance.expected_vector(n)?;
    match expected.as_integer() {
        None => Ok(BigRational::zero()),
        Some(target) => exact_point_probability(instance, n, &target),
    }
}

// ---------------------------------------------------------------------------
// lattices L and M
// ---------------------------------------------------------------------------

/// The lattice `L = {θ ∈ T^A : X̂(θ) = 1}`, enumerated inside the grid
/// `M = (1/m·ℤ)^A` that is guaranteed to contain it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice {
    modulus: u64,
    /// Residue vectors `k ∈ [0,m)^A`, lexicographically sorted; the point
    /// is `k/m` reduced into the canonical box.
    residues: Vec<Vec<u64>>,
    points: Vec<TorusPoint>,
}

impl Lattice {
    #[must_use]
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    #[must_use]
    pub fn points(&self) -> &[TorusPoint] {
        &self.points
    }

    #[must_use]
    pub fn residues(&self) -> &[Vec<u64>] {
        &self.residues
    }

    #[must_use]
    pub fn contains_residue(&self, residue: &[u64]) -> bool {
        self.residues
            .binary_search_by(|r| r.as_slice().cmp(residue))
            .is_ok()
    }

    /// Subgroup test: contains 0 and is closed under addition mod 1.
    #[must_use]
    pub fn is_subgroup(&self) -> bool {
        if !self.contains_residue(&vec![0; self.dim()]) {
            return false;
        }
        for a in &self.residues {
            for b in &self.residues {
                let sum: Vec<u64> = a
                    .iter()
                    .zip(b)
                    .map(|(x, y)| (x + y) % self.modulus)
                    .collect();
                if !self.contains_residue(&sum) {
                    return false;
                }
            }
        }
        true
    }

    fn dim(&self) -> usize {
        self.residues.first().map_or(0, Vec::len)
    }
}

fn residue_point(residue: &[u64], m: u64) -> TorusPoint {
    TorusPoint::from_rationals(
        residue
            .iter()
            .map(|&k| BigRational::new(BigInt::from(k), BigInt::from(m)))
            .collect(),
    )
}

/// Walks all residue vectors of `M` and reports which lie in `L`, using the
/// exact criterion `Σ_a φ(b)_a·k_a ≡ 0 (mod m)` for every `b`.
fn m_grid_membership(instance: &Instance) -> Result<(Vec<Vec<u64>>, Vec<bool>)> {
    let m = instance.constants().m;
    let dim = instance.dim();
    let mut grid_size: u128 = 1;
    for _ in 0..dim {
        grid_size = grid_size
            .checked_mul(m as u128)
            .ok_or(Error::BudgetExceeded {
                needed: u128::MAX,
                budget: instance.budget(),
            })?;
    }
    instance.check_budget(grid_size)?;
    instance.check_budget(instance.size() as u128)?;

    // reduce every φ row mod m once; the criterion is then pure u64 work
    let m_big = BigInt::from(m);
    let mut rows_mod: Vec<Vec<u64>> = Vec::with_capacity(instance.size() as usize);
    for key in instance.elements() {
        let phi = instance.phi(&key)?;
        let row: Vec<u64> = (0..dim)
            .map(|a| {
                phi.get(a)
                    .mod_floor(&m_big)
                    .to_u64()
                    .expect("residue fits u64")
            })
            .collect();
        rows_mod.push(row);
    }

    let mut residues = Vec::new();
    let mut membership = Vec::new();
    let mut k = vec![0u64; dim];
    loop {
        let in_l = rows_mod.iter().all(|row| {
            let dot: u128 = row
                .iter()
                .zip(&k)
                .map(|(&r, &ka)| r as u128 * ka as u128)
                .sum();
            dot % m as u128 == 0
        });
        residues.push(k.clone());
        membership.push(in_l);

        // odometer over [0, m)^dim
        let mut pos = dim;
        loop {
            if pos == 0 {
                return Ok((residues, membership));
            }
            pos -= 1;
            k[pos] += 1;
            if k[pos] < m {
                break;
            }
            k[pos] = 0;
        }
    }
}

/// Enumerates `L` exactly. The result always contains 0 and every
/// coordinate has denominator dividing `m` (so `L ⊆ M` by construction);
/// the criterion itself is the integrality of all `⟨φ(b),θ⟩`.
pub fn enumerate_lattice_l(instance: &Instance) -> Result<Lattice> {
    let m = instance.constants().m;
    let (residues, membership) = m_grid_membership(instance)?;
    let mut kept = Vec::new();
    let mut points = Vec::new();
    for (residue, in_l) in residues.into_iter().zip(membership) {
        if in_l {
            points.push(residue_point(&residue, m));
            kept.push(residue);
        }
    }
    Ok(Lattice {
        modulus: m,
        residues: kept,
        points,
    })
}

/// Enumerates the points of `M ∖ L` (used by the near-M-far-from-L check).
pub fn enumerate_m_minus_l(instance: &Instance) -> Result<Vec<TorusPoint>> {
    let m = instance.constants().m;
    let (residues, membership) = m_grid_membership(instance)?;
    Ok(residues
        .into_iter()
        .zip(membership)
        .filter(|&(_, in_l)| !in_l)
        .map(|(residue, _)| residue_point(&residue, m))
        .collect())
}

// ---------------------------------------------------------------------------
// Gaussian local-limit prediction
// ---------------------------------------------------------------------------

/// The closed-form leading term `|L|·(4πp)^{-|A|/2}·det(R)^{-1/2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionReport {
    pub lattice_count: u64,
    /// Exact determinant of the correlation matrix.
    pub det: BigInt,
    /// True when `det(R) ≤ 0`: the basis functions are linearly dependent
    /// and the Gaussian formula degenerates.
    pub degenerate: bool,
    pub p: f64,
    pub dim: usize,
    pub prediction: Option<f64>,
}

/// Evaluates the local-limit prediction of `Pr[X = E[X]]`: the Gaussian
/// density of the walk at its mean, times the lattice multiplicity `|L|`.
/// The determinant is exact; only the final root and powers are floating
/// point.
pub fn gaussian_prediction(instance: &Instance, n: u64) -> Result<PredictionReport> {
    let p = rational_p(instance, n)?;
    let matrix = correlation_matrix(instance)?;
    let det = matrix.det();
    let lattice = enumerate_lattice_l(instance)?;
    let pf = p.to_f64().unwrap_or(f64::NAN);
    let dim = instance.dim();
    let degenerate = det <= BigInt::zero();
    let prediction = if degenerate {
        None
    } else {
        let det_f = det.to_f64().unwrap_or(f64::INFINITY);
        Some(lattice.len() as f64 * (4.0 * PI * pf).powf(-(dim as f64) / 2.0) / det_f.sqrt())
    };
    Ok(PredictionReport {
        lattice_count: lattice.len() as u64,
        det,
        degenerate,
        p: pf,
        dim,
        prediction,
    })
}

/// Side-by-side prediction and exact oracle value.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionComparison {
    pub report: PredictionReport,
    /// `Pr[X = E[X]]` from the exact oracle.
    pub exact: BigRational,
    pub exact_f64: f64,
    /// `prediction / exact`, when both are positive.
    pub ratio: Option<f64>,
}

/// Runs [`gaussian_prediction`] and the exact oracle on the same instance
/// and reports the ratio. Oracle feasibility (table budget) is the
/// caller's responsibility.
pub fn prediction_vs_exact(instance: &Instance, n: u64) -> Result<PredictionComparison> {
    let report = gaussian_prediction(instance, n)?;
    let exact = exact_mean_probability(instance, n)?;
    let exact_f64 = exact.to_f64().unwrap_or(f64::NAN);
    let ratio = match report.prediction {
        Some(pred) if exact_f64 > 0.0 => Some(pred / exact_f64),
        _ => None,
    };
    Ok(PredictionComparison {
        report,
        exact,
        exact_f64,
        ratio,
    })
}

// ---------------------------------------------------------------------------
// lemma checks
// ---------------------------------------------------------------------------

/// Calibration constants for the lemma checks. The bounds carry unspecified
/// absolute constants; `c` stands in for them (default 1) and is always
/// reported next to the measured quantity rather than silently assumed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LemmaConfig {
    /// Multiplicative constant in error budgets and exponential bounds.
    pub c: f64,
    /// Scale of the admissible radius `ε ≤ scale/(c1·N^{1/3})` in the
    /// near-zero check.
    pub near_zero_scale: f64,
}

impl Default for LemmaConfig {
    fn default() -> Self {
        LemmaConfig {
            c: 1.0,
            near_zero_scale: 1.0,
        }
    }
}

/// Outcome of the near-zero Gaussian approximation check at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct NearZeroReport {
    pub theta_norm: f64,
    /// Largest admissible `‖θ‖₂` under the configured scale.
    pub epsilon_max: f64,
    pub coefficient: Complex64,
    /// `e^{2πi⟨E[X],θ⟩}·e^{-4π²p·θᵀRθ}`.
    pub gaussian: Complex64,
    /// `|X̂(θ)/gaussian - 1|`.
    pub delta_abs: f64,
    /// `c·(N²/|B| + N·c1³·‖θ‖₂³)`.
    pub budget: f64,
    pub within_budget: bool,
}

/// Compares `X̂(θ)` against its Gaussian approximation
/// `e^{2πi⟨E[X],θ⟩}·e^{-4π²p·θᵀRθ}` near the origin and reports the
/// relative error `δ` next to its budget.
pub fn lemma_near_zero_check(
    instance: &Instance,
    n: u64,
    theta: &TorusPoint,
    cfg: &LemmaConfig,
) -> Result<NearZeroReport> {
    let p = rational_p(instance, n)?;
    let c1 = instance.constants().c1;
    let nf = n as f64;
    let epsilon_max = cfg.near_zero_scale / (c1 * nf.cbrt());
    let theta_norm = theta.norm();
    if theta_norm > epsilon_max {
        return Err(Error::OutOfDomain(format!(
            "‖θ‖₂ = {theta_norm:.6} exceeds the admissible radius {epsilon_max:.6}"
        )));
    }

    let coefficient = fourier_coefficient(instance, &p, theta)?;
    let expected = instance.expected_vector(n)?;
    let mut mean_phase = BigRational::zero();
    for (entry, coord) in expected.entries.iter().zip(theta.coords()) {
        mean_phase += entry * coord;
    }
    let mean_phase = reduce_unit(&mean_phase).to_f64().unwrap_or(f64::NAN);
    let matrix = correlation_matrix(instance)?;
    let quad = matrix
        .quadratic_form(theta)?
        .to_f64()
        .unwrap_or(f64::NAN);
    let pf = p.to_f64().unwrap_or(f64::NAN);
    let gaussian = Complex64::from_polar(1.0, 2.0 * PI * mean_phase)
        * Complex64::new((-4.0 * PI * PI * pf * quad).exp(), 0.0);

    let delta_abs = (coefficient / gaussian - Complex64::new(1.0, 0.0)).norm();
    let budget =
        cfg.c * (nf * nf / instance.size() as f64 + nf * c1.powi(3) * theta_norm.powi(3));
    Ok(NearZeroReport {
        theta_norm,
        epsilon_max,
        coefficient,
        gaussian,
        delta_abs,
        budget,
        within_budget: delta_abs <= budget,
    })
}

/// Runs the near-zero check along `θ, θ/2, θ/4, …` (`halvings` extra
/// points); the approximation error should shrink with the radius.
pub fn near_zero_sweep(
    instance: &Instance,
    n: u64,
    theta: &TorusPoint,
    cfg: &LemmaConfig,
    halvings: u32,
) -> Result<Vec<NearZeroReport>> {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut reports = Vec::with_capacity(halvings as usize + 1);
    let mut current = theta.clone();
    for _ in 0..=halvings {
        reports.push(lemma_near_zero_check(instance, n, &current, cfg)?);
        current = current.scale(&half);
    }
    Ok(reports)
}

/// Outcome of the far-from-M exponential bound check.
#[derive(Clone, Debug, PartialEq)]
pub struct FarFromMReport {
    /// `ε = d(θ, M)`, computed coordinatewise.
    pub distance: f64,
    pub log_coefficient_abs: f64,
    /// `-c·N·ε²·m²/(|A|·c2·c3²)`.
    pub log_bound: f64,
    pub holds: bool,
    /// The bound's derivation needs `p ≤ 1/2`; reported, not enforced.
    pub p_in_range: bool,
}

/// Checks `|X̂(θ)| ≤ exp(-N·ε²·m²/(|A|·c2·c3²))` with `ε = d(θ,M)`, in log
/// space so that vanishing coefficients compare cleanly.
pub fn lemma_far_from_m_check(
    instance: &Instance,
    n: u64,
    theta: &TorusPoint,
    cfg: &LemmaConfig,
) -> Result<FarFromMReport> {
    let p = rational_p(instance, n)?;
    let constants = instance.constants();
    let m = constants.m as f64;
    let distance = distance_to_m(theta, constants.m);
    if distance == 0.0 {
        return Err(Error::OutOfDomain(
            "θ lies on the grid M; the far-from-M bound is vacuous there".to_string(),
        ));
    }
    let log_coefficient_abs = log_abs_fourier_coefficient(instance, &p, theta)?;
    let c3_sq = constants
        .c3_sq
        .as_ref()
        .and_then(BigInt::to_f64)
        .unwrap_or(constants.c3 * constants.c3);
    let c2 = constants
        .c2_exact
        .as_ref()
        .and_then(BigInt::to_f64)
        .unwrap_or(constants.c2);
    let log_bound = -cfg.c * n as f64 * distance * distance * m * m
        / (instance.dim() as f64 * c2 * c3_sq);
    Ok(FarFromMReport {
        distance,
        log_coefficient_abs,
        log_bound,
        holds: log_coefficient_abs <= log_bound,
        p_in_range: 2 * n <= instance.size(),
    })
}

/// Outcome of the near-M-far-from-L exponential bound check.
#[derive(Clone, Debug, PartialEq)]
pub struct NearMFarLReport {
    /// `d(θ, M ∖ L)`.
    pub distance: f64,
    /// Admissible radius `1/(2·c1·m)`.
    pub epsilon_limit: f64,
    pub log_coefficient_abs: f64,
    /// `-c·N/(m²·|A|·ln(c1·|A|))`.
    pub log_bound: f64,
    pub holds: bool,
    pub p_in_range: bool,
}

/// Checks `|X̂(θ)| ≤ exp(-N·c/(m²·|A|·ln(c1|A|)))` for `θ` within
/// `1/(2c1m)` of `M ∖ L`. Points of `L` are at distance ≥ 1/m from
/// `M ∖ L`, so they report as out-of-domain.
pub fn lemma_near_m_far_l_check(
    instance: &Instance,
    n: u64,
    theta: &TorusPoint,
    cfg: &LemmaConfig,
) -> Result<NearMFarLReport> {
    let p = rational_p(instance, n)?;
    let constants = instance.constants();
    let far_points = enumerate_m_minus_l(instance)?;
    if far_points.is_empty() {
        return Err(Error::OutOfDomain(
            "M ∖ L is empty: every grid point is a lattice point".to_string(),
        ));
    }
    let distance = distance_to_set(theta, &far_points)?;
    let epsilon_limit = 1.0 / (2.0 * constants.c1 * constants.m as f64);
    if distance > epsilon_limit {
        return Err(Error::OutOfDomain(format!(
            "d(θ, M∖L) = {distance:.6} exceeds the admissible radius {epsilon_limit:.6}"
        )));
    }
    let log_denominator = (constants.c1 * instance.dim() as f64).ln();
    if log_denominator <= 0.0 {
        return Err(Error::OutOfDomain(
            "c1·|A| ≤ 1 leaves the bound undefined".to_string(),
        ));
    }
    let log_coefficient_abs = log_abs_fourier_coefficient(instance, &p, theta)?;
    let m = constants.m as f64;
    let log_bound = -cfg.c * n as f64 / (m * m * instance.dim() as f64 * log_denominator);
    Ok(NearMFarLReport {
        distance,
        epsilon_limit,
        log_coefficient_abs,
        log_bound,
        holds: log_coefficient_abs <= log_bound,
        p_in_range: 2 * n <= instance.size(),
    })
}

// ---------------------------------------------------------------------------
// scalar claims
// ---------------------------------------------------------------------------

/// One evaluation of the chord bound `|1-p+p·e^{2πix}| ≤ e^{-px²}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChordReport {
    pub lhs: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Checks the chord bound, valid for `p ≤ 1/2` and `|x| ≤ 1/2` (domain
/// enforced).
pub fn chord_scalar_check(p: f64, x: f64) -> Result<ChordReport> {
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::OutOfDomain(format!("p = {p} outside [0, 1/2]")));
    }
    if x.abs() > 0.5 {
        return Err(Error::OutOfDomain(format!("|x| = {} exceeds 1/2", x.abs())));
    }
    let s = (PI * x).sin();
    let lhs = (1.0 - 4.0 * p * (1.0 - p) * s * s).max(0.0).sqrt();
    let bound = (-p * x * x).exp();
    Ok(ChordReport {
        lhs,
        bound,
        holds: lhs <= bound,
    })
}

/// One evaluation of the cubic Taylor claim for
/// `f(x) = e^{-ipx}(1-p+p·e^{ix})`.
#[derive(Clone, Debug, PartialEq)]
pub struct TaylorReport {
    pub value: Complex64,
    /// `e^{-px²}`.
    pub gaussian: f64,
    /// `|f(x)/e^{-px²} - 1|`.
    pub delta_abs: f64,
    /// `c·(p²x² + p|x|³)`.
    pub budget: f64,
    pub within_budget: bool,
}

/// Checks `f(x) = e^{-px²}(1+δ)` with `|δ| ≤ c·(p²x² + p|x|³)` for
/// `|x| ≤ 1` (domain enforced). Note the phase convention: this claim uses
/// a bare `e^{ix}`, not `e^{2πix}`.
pub fn taylor_scalar_check(p: f64, x: f64, cfg: &LemmaConfig) -> Result<TaylorReport> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfDomain(format!("p = {p} outside [0, 1]")));
    }
    if x.abs() > 1.0 {
        return Err(Error::OutOfDomain(format!("|x| = {} exceeds 1", x.abs())));
    }
    let chord = Complex64::new((1.0 - p) + p * x.cos(), p * x.sin());
    let value = Complex64::from_polar(1.0, -p * x) * chord;
    let gaussian = (-p * x * x).exp();
    let delta_abs = (value / gaussian - Complex64::new(1.0, 0.0)).norm();
    let budget = cfg.c * (p * p * x * x + p * x.abs().powi(3));
    Ok(TaylorReport {
        value,
        gaussian,
        delta_abs,
        budget,
        within_budget: delta_abs <= budget,
    })
}

// ---------------------------------------------------------------------------
// quadrature cross-check
// ---------------------------------------------------------------------------

/// Approximates the Fourier inversion integral
/// `Pr[X = target] = ∫ X̂(θ)·e^{-2πi⟨target,θ⟩} dθ` by a uniform grid sum
/// with `grid` points per axis. Once `grid` exceeds the per-coordinate
/// spread of `X`, aliasing vanishes and the sum reproduces the exact value
/// up to floating-point error.
pub fn quadrature_point_probability(
    instance: &Instance,
    n: u64,
    target: &PhiVector,
    grid: u64,
) -> Result<f64> {
    if grid == 0 {
        return Err(Error::invalid("quadrature grid must be positive"));
    }
    if target.dim() != instance.dim() {
        return Err(Error::DimensionMismatch(format!(
            "target has dimension {}, instance has {}",
            target.dim(),
            instance.dim()
        )));
    }
    let p = rational_p(instance, n)?;
    let dim = instance.dim();
    let mut grid_size: u128 = 1;
    for _ in 0..dim {
        grid_size = grid_size
            .checked_mul(grid as u128)
            .ok_or(Error::BudgetExceeded {
                needed: u128::MAX,
                budget: instance.budget(),
            })?;
    }
    let work = grid_size
        .checked_mul(instance.size() as u128)
        .ok_or(Error::BudgetExceeded {
            needed: u128::MAX,
            budget: instance.budget(),
        })?;
    instance.check_budget(work)?;

    let mut real = NeumaierSum::default();
    let mut imag = NeumaierSum::default();
    let mut k = vec![0u64; dim];
    loop {
        let theta = TorusPoint::from_rationals(
            k.iter()
                .map(|&ka| BigRational::new(BigInt::from(ka), BigInt::from(grid)))
                .collect(),
        );
        let coefficient = fourier_coefficient(instance, &p, &theta)?;
        let mut target_phase = BigRational::zero();
        for (entry, coord) in (0..dim).map(|a| (target.get(a), theta.get(a))) {
            if !entry.is_zero() {
                target_phase += BigRational::from(entry.clone()) * coord;
            }
        }
        let angle = -2.0 * PI * reduce_unit(&target_phase).to_f64().unwrap_or(f64::NAN);
        let term = coefficient * Complex64::from_polar(1.0, angle);
        real.add(term.re);
        imag.add(term.im);

        let mut pos = dim;
        loop {
            if pos == 0 {
                let total = grid_size as f64;
                let value = real.value() / total;
                debug_assert!(
                    (imag.value() / total).abs() < 1e-9,
                    "inversion sum should be real"
                );
                return Ok(value);
            }
            pos -= 1;
            k[pos] += 1;
            if k[pos] < grid {
                break;
            }
            k[pos] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{self, DesignParams};
    use crate::framework::{custom_instance, FrameworkConstants};
    use crate::oa::{self, OaParams};
    use crate::util;
    use num_traits::Signed;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn phi(entries: &[i64]) -> PhiVector {
        PhiVector::from_vec(entries.iter().map(|&x| BigInt::from(x)).collect())
    }

    fn oa221() -> Instance {
        oa::instance(&OaParams::new(2, 2, 1).unwrap()).unwrap()
    }

    fn oa231() -> Instance {
        oa::instance(&OaParams::new(2, 3, 1).unwrap()).unwrap()
    }

    fn design431() -> Instance {
        design::instance(&DesignParams::new(4, 3, 1).unwrap()).unwrap()
    }

    /// Two elements, scalar φ ≡ 1: X counts |T|.
    fn toy_scalar() -> Instance {
        custom_instance(
            vec![phi(&[1]), phi(&[1])],
            FrameworkConstants::from_exact(
                1,
                1,
                BigInt::from(1),
                BigInt::from(1),
                BigInt::from(1),
            )
            .unwrap(),
            vec![rat(1, 1)],
        )
        .unwrap()
    }

    /// |A| = 2 with rows (1,0) and (1,1); the first column is constant.
    fn toy_planar() -> Instance {
        custom_instance(
            vec![phi(&[1, 0]), phi(&[1, 1])],
            FrameworkConstants::from_exact(
                1,
                2,
                BigInt::from(2),
                BigInt::from(1),
                BigInt::from(1),
            )
            .unwrap(),
            vec![rat(1, 1), rat(0, 1)],
        )
        .unwrap()
    }

    #[test]
    fn torus_points_reduce_into_the_canonical_box() {
        let point = TorusPoint::from_fractions(&[(2, 3), (1, 2), (-1, 2), (3, 2), (0, 1)]).unwrap();
        assert_eq!(point.get(0), &rat(-1, 3));
        assert_eq!(point.get(1), &rat(-1, 2), "+1/2 wraps to -1/2");
        assert_eq!(point.get(2), &rat(-1, 2));
        assert_eq!(point.get(3), &rat(-1, 2));
        assert!(point.get(4).is_zero());

        let sum = TorusPoint::from_fractions(&[(1, 3)])
            .unwrap()
            .add(&TorusPoint::from_fractions(&[(1, 3)]).unwrap())
            .unwrap();
        assert_eq!(sum.get(0), &rat(-1, 3), "1/3 + 1/3 wraps to -1/3");
    }

    #[test]
    fn torus_distance_wraps_coordinatewise() {
        let a = TorusPoint::from_fractions(&[(2, 5)]).unwrap();
        let b = TorusPoint::from_fractions(&[(-2, 5)]).unwrap();
        let d = torus_distance(&a, &b).unwrap();
        assert!((d - 0.2).abs() < 1e-15, "0.4 and -0.4 are 0.2 apart: {d}");

        let theta = TorusPoint::from_fractions(&[(1, 4), (1, 8)]).unwrap();
        let origin = TorusPoint::zero(2);
        assert!((torus_distance(&theta, &origin).unwrap() - theta.norm()).abs() < 1e-15);
        assert_eq!(torus_distance(&theta, &theta).unwrap(), 0.0);

        assert!(distance_to_set(&theta, &[]).is_err());
        let d0 = distance_to_set(&theta, &[origin]).unwrap();
        assert!((d0 - theta.norm()).abs() < 1e-15);
    }

    #[test]
    fn distance_to_m_uses_the_nearest_grid_multiple() {
        // 0.3 is 1/30 away from 1/3 on the m = 3 grid
        let theta = TorusPoint::from_fractions(&[(3, 10)]).unwrap();
        let d = distance_to_m(&theta, 3);
        assert!((d - 1.0 / 30.0).abs() < 1e-15, "distance {d}");
        // grid members are at distance zero
        let member = TorusPoint::from_fractions(&[(2, 3)]).unwrap();
        assert_eq!(distance_to_m(&member, 3), 0.0);
    }

    #[test]
    fn seeded_points_are_reproducible_and_bounded() {
        let a = seeded_torus_point(4, 9, 4096, 64).unwrap();
        let b = seeded_torus_point(4, 9, 4096, 64).unwrap();
        assert_eq!(a, b);
        assert!(a.coords().iter().all(|c| c.abs() <= rat(64, 4096)));
        let c = seeded_torus_point(4, 10, 4096, 64).unwrap();
        assert_ne!(a, c, "different seeds should differ here");
    }

    #[test]
    fn correlation_matrix_matches_the_hand_computation() {
        // OA(2,2,1): A = (∅), ({1}=1), ({2}=1) over four words
        let matrix = correlation_matrix(&oa221()).unwrap();
        let expected: Vec<Vec<BigInt>> = vec![
            vec![4.into(), 2.into(), 2.into()],
            vec![2.into(), 2.into(), 1.into()],
            vec![2.into(), 1.into(), 2.into()],
        ];
        assert_eq!(matrix.rows(), expected.as_slice());
        assert_eq!(matrix.det(), BigInt::from(4));
        assert!(matrix.is_positive_semidefinite());
    }

    #[test]
    fn correlation_matrix_known_determinants() {
        assert_eq!(correlation_matrix(&oa231()).unwrap().det(), BigInt::from(64));
        let scalar = correlation_matrix(&toy_scalar()).unwrap();
        assert_eq!(scalar.rows(), &[vec![BigInt::from(2)]]);
        assert!(correlation_matrix(&design431())
            .unwrap()
            .is_positive_semidefinite());
    }

    #[test]
    fn fourier_coefficient_is_exactly_one_at_zero() {
        for instance in [oa221(), oa231(), design431(), toy_planar()] {
            let value = fourier_coefficient(
                &instance,
                &rat(1, 3),
                &TorusPoint::zero(instance.dim()),
            )
            .unwrap();
            assert_eq!(value, Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn fourier_coefficient_vanishes_on_the_constant_half_phase() {
        // every word has φ_∅ = 1, so θ = (1/2,0,0) at p = 1/2 kills each factor
        let value = fourier_coefficient(
            &oa221(),
            &rat(1, 2),
            &TorusPoint::from_fractions(&[(1, 2), (0, 1), (0, 1)]).unwrap(),
        )
        .unwrap();
        assert_eq!(value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn fourier_coefficient_magnitude_stays_below_one() {
        let instance = oa231();
        for seed in 0..20 {
            let theta = seeded_torus_point(instance.dim(), seed, 4096, 2048).unwrap();
            let value = fourier_coefficient(&instance, &rat(1, 3), &theta).unwrap();
            assert!(value.norm() <= 1.0 + 1e-9, "|X̂| = {}", value.norm());
        }
    }

    #[test]
    fn log_abs_agrees_with_the_direct_product() {
        let instance = oa231();
        for seed in 0..10 {
            let theta = seeded_torus_point(instance.dim(), seed, 4096, 2048).unwrap();
            let direct = fourier_coefficient(&instance, &rat(1, 4), &theta)
                .unwrap()
                .norm();
            let logged = log_abs_fourier_coefficient(&instance, &rat(1, 4), &theta).unwrap();
            assert!(
                (logged.exp() - direct).abs() < 1e-12,
                "exp({logged}) vs {direct}"
            );
        }
    }

    #[test]
    fn lattice_of_a_modulus_one_instance_is_the_origin() {
        let lattice = enumerate_lattice_l(&oa221()).unwrap();
        assert_eq!(lattice.len(), 1);
        assert!(lattice.points()[0].is_zero());
        assert!(lattice.is_subgroup());
        assert!(enumerate_m_minus_l(&oa221()).unwrap().is_empty());
    }

    #[test]
    fn design_lattice_has_three_points_forming_a_subgroup() {
        // m = 3, |A| = 4: candidates 3⁴ = 81, of which exactly 3 survive
        let instance = design431();
        let lattice = enumerate_lattice_l(&instance).unwrap();
        assert_eq!(lattice.len(), 3);
        assert!(lattice.is_subgroup());
        let third = rat(1, 3);
        for point in lattice.points() {
            for coord in point.coords() {
                assert!(
                    coord.is_zero() || coord.abs() == third,
                    "coordinate {coord} should be 0 or ±1/3"
                );
            }
        }
        // spot-check the criterion: every lattice point makes every phase integral
        for point in lattice.points() {
            for key in instance.elements() {
                let phase = reduced_phase(&instance.phi(&key).unwrap(), point);
                assert!(phase.is_zero());
            }
        }
        assert_eq!(enumerate_m_minus_l(&instance).unwrap().len(), 81 - 3);
    }

    #[test]
    fn finer_grid_oracle_confirms_the_lattice_is_complete() {
        // scan denominator 6m = 18: any point with all phases integral must
        // already lie in L (denominator m), so the enumeration lost nothing
        let instance = design431();
        let lattice = enumerate_lattice_l(&instance).unwrap();
        let m = instance.constants().m;
        let fine: u64 = 6 * m;
        let rows: Vec<Vec<u64>> = instance
            .elements()
            .map(|key| {
                let phi = instance.phi(&key).unwrap();
                (0..instance.dim())
                    .map(|a| {
                        phi.get(a)
                            .mod_floor(&BigInt::from(fine))
                            .to_u64()
                            .unwrap()
                    })
                    .collect()
            })
            .collect();
        let mut k = vec![0u64; instance.dim()];
        let mut found = 0u64;
        loop {
            let integral = rows.iter().all(|row| {
                let dot: u128 = row
                    .iter()
                    .zip(&k)
                    .map(|(&r, &ka)| r as u128 * ka as u128)
                    .sum();
                dot % fine as u128 == 0
            });
            if integral {
                found += 1;
                let scale = fine / m;
                assert!(
                    k.iter().all(|&ka| ka % scale == 0),
                    "fine-grid point {k:?} with integral phases lies outside M"
                );
                let residue: Vec<u64> = k.iter().map(|&ka| ka / scale).collect();
                assert!(lattice.contains_residue(&residue));
            }
            let mut pos = instance.dim();
            let mut done = false;
            loop {
                if pos == 0 {
                    done = true;
                    break;
                }
                pos -= 1;
                k[pos] += 1;
                if k[pos] < fine {
                    break;
                }
                k[pos] = 0;
            }
            if done {
                break;
            }
        }
        assert_eq!(found, lattice.len() as u64);
    }

    #[test]
    fn shift_by_lattice_points_reproduces_coefficients_bitwise() {
        let instance = design431();
        let lattice = enumerate_lattice_l(&instance).unwrap();
        assert!(lattice.len() > 1, "need a nontrivial lattice");
        let p = rat(1, 2);
        for seed in 0..5 {
            let theta = seeded_torus_point(instance.dim(), seed, 1024, 512).unwrap();
            let base = fourier_coefficient(&instance, &p, &theta).unwrap();
            for shift in lattice.points() {
                let shifted = fourier_coefficient(&instance, &p, &theta.add(shift).unwrap())
                    .unwrap();
                assert_eq!(base, shifted, "exact phases make shifts bit-identical");
            }
        }
        // the coefficient is exactly 1 on every lattice point
        for point in lattice.points() {
            let value = fourier_coefficient(&instance, &p, point).unwrap();
            assert_eq!(value, Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn exact_distribution_of_the_scalar_toy_is_binomial() {
        let table = exact_distribution(&toy_scalar(), 1).unwrap();
        assert_eq!(table.support_size(), 3);
        assert_eq!(table.probability(&phi(&[0])), rat(1, 4));
        assert_eq!(table.probability(&phi(&[1])), rat(1, 2));
        assert_eq!(table.probability(&phi(&[2])), rat(1, 4));
        assert!(table.total_mass().is_one());
    }

    #[test]
    fn exact_distribution_matches_brute_force_subset_enumeration() {
        // independent oracle: walk all 2⁴ subsets of OA(2,2,1) directly
        let instance = oa221();
        let n = 2u64;
        let keys: Vec<_> = instance.elements().collect();
        let mut counts: BTreeMap<PhiVector, u64> = BTreeMap::new();
        for mask in 0u32..16 {
            let mut acc = PhiVector::zeros(instance.dim());
            for (i, key) in keys.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    acc.add_assign(&instance.phi(key).unwrap());
                }
            }
            *counts.entry(acc).or_insert(0) += 1;
        }
        let table = exact_distribution(&instance, n).unwrap();
        assert_eq!(table.support_size(), counts.len());
        for (value, count) in counts {
            assert_eq!(table.probability(&value), rat(count as i64, 16));
        }
        // the two named points
        assert_eq!(table.probability(&phi(&[2, 1, 1])), rat(1, 8));
        let full = instance.phi_total().unwrap();
        assert_eq!(table.probability(&full), rat(1, 16), "Pr[T = B] = p^|B|");
    }

    #[test]
    fn constant_row_marginal_is_binomial() {
        let instance = oa221();
        let table = exact_distribution(&instance, 2).unwrap();
        let mut marginal: BTreeMap<BigInt, BigRational> = BTreeMap::new();
        for (value, mass) in table.iter() {
            *marginal
                .entry(value.get(0).clone())
                .or_insert_with(BigRational::zero) += mass.clone();
        }
        for k in 0u64..=4 {
            let expected = BigRational::new(util::binomial_big(4, k), BigInt::from(16));
            assert_eq!(marginal[&BigInt::from(k)], expected, "Binomial(4,1/2) at {k}");
        }
    }

    #[test]
    fn mean_probability_is_zero_for_fractional_expectation() {
        assert_eq!(exact_mean_probability(&oa221(), 2).unwrap(), rat(1, 8));
        assert!(exact_mean_probability(&oa221(), 1).unwrap().is_zero());
    }

    #[test]
    fn distribution_respects_the_budget() {
        let instance = oa::instance(&OaParams::new(2, 3, 1).unwrap())
            .unwrap()
            .with_budget(16);
        assert!(matches!(
            exact_distribution(&instance, 4),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn quadrature_reproduces_the_exact_law_once_the_grid_resolves() {
        let instance = toy_scalar();
        let target = phi(&[1]);
        let exact = exact_point_probability(&instance, 1, &target)
            .unwrap()
            .to_f64()
            .unwrap();
        // X ranges over {0,1,2}: any grid of 4+ points is alias-free
        for grid in [4u64, 8, 16] {
            let approx = quadrature_point_probability(&instance, 1, &target, grid).unwrap();
            assert!(
                (approx - exact).abs() < 1e-12,
                "grid {grid}: {approx} vs {exact}"
            );
        }

        let planar = toy_planar();
        let target = phi(&[1, 1]);
        let exact = exact_point_probability(&planar, 1, &target)
            .unwrap()
            .to_f64()
            .unwrap();
        for grid in [3u64, 5, 8] {
            let approx = quadrature_point_probability(&planar, 1, &target, grid).unwrap();
            assert!(
                (approx - exact).abs() < 1e-12,
                "grid {grid}: {approx} vs {exact}"
            );
        }
    }

    #[test]
    fn gaussian_prediction_matches_the_closed_form() {
        let report = gaussian_prediction(&oa221(), 2).unwrap();
        assert_eq!(report.det, BigInt::from(4));
        assert_eq!(report.lattice_count, 1);
        assert!(!report.degenerate);
        // |L|·(4π·½)^{-3/2}·det^{-1/2} = (2π)^{-3/2}/2
        let prediction = report.prediction.unwrap();
        assert!((prediction - 0.031746817967120484).abs() < 1e-12);

        let comparison = prediction_vs_exact(&oa221(), 2).unwrap();
        assert_eq!(comparison.exact, rat(1, 8));
        let ratio = comparison.ratio.unwrap();
        assert!((ratio - prediction / 0.125).abs() < 1e-12);
    }

    #[test]
    fn duplicated_basis_rows_degenerate_the_prediction() {
        let instance = custom_instance(
            vec![phi(&[1, 1]), phi(&[1, 1])],
            FrameworkConstants::from_exact(
                1,
                1,
                BigInt::from(2),
                BigInt::from(1),
                BigInt::from(1),
            )
            .unwrap(),
            vec![rat(1, 1), rat(0, 1)],
        )
        .unwrap();
        let report = gaussian_prediction(&instance, 1).unwrap();
        assert!(report.degenerate);
        assert_eq!(report.det, BigInt::zero());
        assert!(report.prediction.is_none());
    }

    #[test]
    fn near_zero_delta_vanishes_at_the_origin() {
        let cfg = LemmaConfig::default();
        let report =
            lemma_near_zero_check(&oa231(), 4, &TorusPoint::zero(4), &cfg).unwrap();
        assert_eq!(report.delta_abs, 0.0);
        assert!(report.within_budget);
    }

    #[test]
    fn near_zero_delta_shrinks_under_halving() {
        // OA(2,3,1), N = 4: c1 = 2, radius 1/(2·4^{1/3}) ≈ 0.31
        let instance = oa231();
        let theta =
            TorusPoint::from_fractions(&[(1, 16), (-1, 32), (1, 64), (1, 128)]).unwrap();
        let cfg = LemmaConfig {
            c: 10.0,
            ..LemmaConfig::default()
        };
        let reports = near_zero_sweep(&instance, 4, &theta, &cfg, 3).unwrap();
        assert_eq!(reports.len(), 4);
        for pair in reports.windows(2) {
            assert!(
                pair[1].delta_abs < pair[0].delta_abs,
                "halving the radius should shrink δ: {} vs {}",
                pair[0].delta_abs,
                pair[1].delta_abs
            );
        }
        for report in &reports {
            assert!(report.within_budget, "δ = {} over budget", report.delta_abs);
        }
    }

    #[test]
    fn near_zero_rejects_points_outside_the_radius() {
        let theta = TorusPoint::from_fractions(&[(1, 2), (0, 1), (0, 1), (0, 1)]).unwrap();
        assert!(matches!(
            lemma_near_zero_check(&oa231(), 4, &theta, &LemmaConfig::default()),
            Err(Error::OutOfDomain(_))
        ));
    }

    #[test]
    fn far_from_m_bound_holds_on_a_vanishing_coefficient() {
        // θ = (1/2,0,0) at p = 1/2: |X̂| = 0, distance to M = {0} is 1/2
        let theta = TorusPoint::from_fractions(&[(1, 2), (0, 1), (0, 1)]).unwrap();
        let report =
            lemma_far_from_m_check(&oa221(), 2, &theta, &LemmaConfig::default()).unwrap();
        assert!((report.distance - 0.5).abs() < 1e-15);
        assert_eq!(report.log_coefficient_abs, f64::NEG_INFINITY);
        assert!(report.holds);
        assert!(report.p_in_range);

        // a grid point is out of domain
        assert!(matches!(
            lemma_far_from_m_check(
                &oa221(),
                2,
                &TorusPoint::zero(3),
                &LemmaConfig::default()
            ),
            Err(Error::OutOfDomain(_))
        ));
    }

    #[test]
    fn near_m_far_l_bound_holds_on_the_design_lattice() {
        // α = (1/3,0,0,0) ∈ M∖L: three blocks contribute phase 1/3, giving
        // |X̂| = (1/2)³ = 1/8 at p = 1/2
        let instance = design431();
        let theta = TorusPoint::from_fractions(&[(1, 3), (0, 1), (0, 1), (0, 1)]).unwrap();
        let report =
            lemma_near_m_far_l_check(&instance, 2, &theta, &LemmaConfig::default()).unwrap();
        assert_eq!(report.distance, 0.0);
        assert!((report.log_coefficient_abs - (1.0f64 / 8.0).ln()).abs() < 1e-12);
        assert!(report.holds);
        assert!(report.p_in_range);

        // lattice points are at distance ≥ 1/m > 1/(2c1m) from M∖L
        assert!(matches!(
            lemma_near_m_far_l_check(
                &instance,
                2,
                &TorusPoint::zero(4),
                &LemmaConfig::default()
            ),
            Err(Error::OutOfDomain(_))
        ));
    }

    #[test]
    fn chord_bound_holds_across_the_grid() {
        for pk in 1..=10 {
            let p = pk as f64 * 0.05;
            for xk in -500i32..=500 {
                let x = xk as f64 / 1000.0;
                let report = chord_scalar_check(p, x).unwrap();
                assert!(
                    report.holds,
                    "chord bound failed at p={p}, x={x}: {} > {}",
                    report.lhs, report.bound
                );
            }
        }
        assert!(chord_scalar_check(0.6, 0.1).is_err());
        assert!(chord_scalar_check(0.3, 0.7).is_err());
    }

    #[test]
    fn taylor_claim_holds_with_calibrated_constant() {
        let cfg = LemmaConfig {
            c: 10.0,
            ..LemmaConfig::default()
        };
        for pk in 1..=10 {
            let p = pk as f64 * 0.05;
            for xk in -100i32..=100 {
                let x = xk as f64 / 100.0;
                let report = taylor_scalar_check(p, x, &cfg).unwrap();
                assert!(
                    report.within_budget,
                    "Taylor budget failed at p={p}, x={x}: δ={} > {}",
                    report.delta_abs, report.budget
                );
            }
        }
        let zero = taylor_scalar_check(0.3, 0.0, &cfg).unwrap();
        assert_eq!(zero.delta_abs, 0.0);
        let off = taylor_scalar_check(0.0, 0.5, &cfg).unwrap();
        assert_eq!(off.delta_abs, 0.0, "p = 0 makes f ≡ 1");
        assert!(taylor_scalar_check(0.3, 1.5, &cfg).is_err());
    }
}
