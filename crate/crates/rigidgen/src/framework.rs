//! Ground sets, integer basis maps, and the four structural conditions.
//!
//! A problem instance is a finite ground set `B` together with an evaluation
//! map `φ: B → ℤ^A` over a canonical index set `A`. A subset `T ⊆ B` is an
//! exact solution when its counting vector matches the scaled total,
//! `φ(T) = (|T|/|B|)·φ(B)`, checked here entirely in integer arithmetic.
//!
//! The module provides the family-independent machinery: exact vectors,
//! instance plumbing with streaming enumeration budgets, and checkers for the
//! divisibility, boundedness, symmetry, and isolation conditions that make
//! randomized search viable. Family-specific constructions live in
//! [`crate::oa`], [`crate::design`], and [`crate::perm`].
//!
//! # Exactness
//!
//! Counting identities are never tested in floating point: comparisons are
//! cross-multiplied into arbitrary-precision integers, and norm bounds are
//! compared as squared integers. Floats appear only in the heuristic window
//! of [`Instance::admissible_n`] and in the Fourier diagnostics.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::RationalMatrix;

/// Default cap on how many ground-set elements an exhaustive operation may
/// stream. Larger instances can still be *constructed*; operations that must
/// enumerate them fail loudly instead of running forever.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 10_000_000;

/// Which construction a ground set comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Oa,
    Design,
    Perm,
    Custom,
}

impl Family {
    #[must_use]
    pub fn name(self) -> &'static str {
        match self {
            Family::Oa => "oa",
            Family::Design => "design",
            Family::Perm => "perm",
            Family::Custom => "custom",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Canonical, totally ordered encoding of one ground-set element.
///
/// The payload is family-specific: a symbol word for arrays, a sorted block
/// for designs, an image table for permutations, and a bare index for custom
/// ground sets. Ordering and equality are structural, so keys can serve as
/// `BTreeMap`/`BTreeSet` keys and as canonical file order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElementKey {
    /// A word over symbols `1..=q`, one entry per coordinate.
    Word(Vec<u32>),
    /// A strictly increasing block of points from `1..=v`.
    Block(Vec<u32>),
    /// A permutation given by its images: entry `i` is the image of point
    /// `i+1`, 1-based.
    Perm(Vec<u32>),
    /// An opaque index into a custom ground set.
    Index(u64),
}

impl fmt::Display for ElementKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementKey::Word(w) => {
                if w.iter().all(|&s| s <= 9) {
                    for s in w {
                        write!(f, "{s}")?;
                    }
                    Ok(())
                } else {
                    let parts: Vec<String> = w.iter().map(|s| s.to_string()).collect();
                    write!(f, "{}", parts.join("."))
                }
            }
            ElementKey::Block(b) => {
                let parts: Vec<String> = b.iter().map(|p| p.to_string()).collect();
                write!(f, "{{{}}}", parts.join(","))
            }
            ElementKey::Perm(p) => {
                let parts: Vec<String> = p.iter().map(|x| x.to_string()).collect();
                write!(f, "[{}]", parts.join(" "))
            }
            ElementKey::Index(i) => write!(f, "#{i}"),
        }
    }
}

/// Dense exact integer vector indexed by the canonical basis order of `A`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PhiVector(Vec<BigInt>);

impl PhiVector {
    #[must_use]
    pub fn zeros(dim: usize) -> Self {
        PhiVector(vec![BigInt::zero(); dim])
    }

    #[must_use]
    pub fn from_vec(entries: Vec<BigInt>) -> Self {
        PhiVector(entries)
    }

    /// `scale · e_index` — a scaled standard basis vector.
    #[must_use]
    pub fn scaled_unit(dim: usize, index: usize, scale: BigInt) -> Self {
        let mut v = Self::zeros(dim);
        v.0[index] = scale;
        v
    }

    #[must_use]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    #[must_use]
    pub fn get(&self, index: usize) -> &BigInt {
        &self.0[index]
    }

    #[must_use]
    pub fn entries(&self) -> &[BigInt] {
        &self.0
    }

    pub fn add_assign(&mut self, other: &PhiVector) {
        debug_assert_eq!(self.dim(), other.dim());
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
    }

    /// `self += coeff · other`, exactly.
    pub fn add_scaled(&mut self, coeff: &BigInt, other: &PhiVector) {
        debug_assert_eq!(self.dim(), other.dim());
        if coeff.is_zero() {
            return;
        }
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += coeff * b;
        }
    }

    /// Squared Euclidean norm as an exact integer.
    #[must_use]
    pub fn norm_sq(&self) -> BigInt {
        self.0.iter().map(|x| x * x).sum()
    }

    #[must_use]
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }
}

impl fmt::Display for PhiVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Sparse exact integer vector over the ground set: a formal combination
/// `Σ c_b · e_b`. Zero coefficients are dropped eagerly, so the stored
/// support is always exact.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparseDomainVector(BTreeMap<ElementKey, BigInt>);

impl SparseDomainVector {
    #[must_use]
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `coeff · e_key`; entries that cancel to zero are removed.
    pub fn add_term(&mut self, key: ElementKey, coeff: BigInt) {
        if coeff.is_zero() {
            return;
        }
        match self.0.entry(key) {
            std::collections::btree_map::Entry::Vacant(slot) => {
                slot.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut slot) => {
                *slot.get_mut() += coeff;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    /// `self += coeff · other`, exactly.
    pub fn add_scaled(&mut self, coeff: &BigInt, other: &SparseDomainVector) {
        for (key, c) in other.iter() {
            self.add_term(key.clone(), coeff * c);
        }
    }

    /// Coefficient of `key` (zero when absent from the support).
    #[must_use]
    pub fn coeff(&self, key: &ElementKey) -> BigInt {
        self.0.get(key).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ElementKey, &BigInt)> {
        self.0.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &ElementKey> {
        self.0.keys()
    }

    #[must_use]
    pub fn support_len(&self) -> usize {
        self.0.len()
    }

    #[must_use]
    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Squared Euclidean norm `Σ c_b²` as an exact integer.
    #[must_use]
    pub fn norm_sq(&self) -> BigInt {
        self.0.values().map(|c| c * c).sum()
    }
}

impl fmt::Display for SparseDomainVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (key, coeff) in &self.0 {
            if first {
                write!(f, "{coeff}·e[{key}]")?;
                first = false;
            } else if coeff.is_negative() {
                write!(f, " - {}·e[{key}]", -coeff)?;
            } else {
                write!(f, " + {coeff}·e[{key}]")?;
            }
        }
        Ok(())
    }
}

/// The scalar constants attached to an instance: modulus `m`, divisor base
/// `c0`, and the three norm/count constants `c1..c3`.
///
/// `c1`–`c3` are real-valued; when a family knows their exact squares (all
/// built-in families do), those are carried alongside so norm and count
/// comparisons stay in integer arithmetic.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameworkConstants {
    /// Isolation modulus: constructed vectors satisfy `φ(γ) = m·e_a`.
    pub m: u64,
    /// Divisibility base: admissible sample sizes are multiples of `c0·m`.
    pub c0: u64,
    /// Bound on `‖φ(b)‖₂`.
    pub c1: f64,
    /// Count factor: at least `|B|/c2` isolation vectors exist per index.
    pub c2: f64,
    /// Bound on `‖γ‖₂` for isolation vectors.
    pub c3: f64,
    /// Exact value of `c1²`, when integral.
    pub c1_sq: Option<BigInt>,
    /// Exact value of `c2`, when integral.
    pub c2_exact: Option<BigInt>,
    /// Exact value of `c3²`, when integral.
    pub c3_sq: Option<BigInt>,
}

impl FrameworkConstants {
    /// Real-valued constants with no exact squares attached.
    pub fn new(m: u64, c0: u64, c1: f64, c2: f64, c3: f64) -> Result<Self> {
        if m == 0 || c0 == 0 {
            return Err(Error::invalid("constants m and c0 must be positive"));
        }
        for (name, v) in [("c1", c1), ("c2", c2), ("c3", c3)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::invalid(format!(
                    "constant {name} must be a positive finite real, got {v}"
                )));
            }
        }
        Ok(FrameworkConstants {
            m,
            c0,
            c1,
            c2,
            c3,
            c1_sq: None,
            c2_exact: None,
            c3_sq: None,
        })
    }

    /// Constants whose squares (and `c2`) are exact integers; the `f64`
    /// mirrors are derived from them.
    pub fn from_exact(m: u64, c0: u64, c1_sq: BigInt, c2: BigInt, c3_sq: BigInt) -> Result<Self> {
        if m == 0 || c0 == 0 {
            return Err(Error::invalid("constants m and c0 must be positive"));
        }
        for (name, v) in [("c1²", &c1_sq), ("c2", &c2), ("c3²", &c3_sq)] {
            if !v.is_positive() {
                return Err(Error::invalid(format!("constant {name} must be positive")));
            }
        }
        let to_f = |x: &BigInt| x.to_f64().unwrap_or(f64::INFINITY);
        Ok(FrameworkConstants {
            m,
            c0,
            c1: to_f(&c1_sq).sqrt(),
            c2: to_f(&c2),
            c3: to_f(&c3_sq).sqrt(),
            c1_sq: Some(c1_sq),
            c2_exact: Some(c2),
            c3_sq: Some(c3_sq),
        })
    }

    /// `⌈c1²⌉` as an exact integer (the exact square when available).
    #[must_use]
    pub fn c1_sq_ceil(&self) -> BigInt {
        match &self.c1_sq {
            Some(v) => v.clone(),
            None => f64_ceil_to_bigint(self.c1 * self.c1),
        }
    }

    /// `⌈c3²⌉` as an exact integer (the exact square when available).
    #[must_use]
    pub fn c3_sq_ceil(&self) -> BigInt {
        match &self.c3_sq {
            Some(v) => v.clone(),
            None => f64_ceil_to_bigint(self.c3 * self.c3),
        }
    }
}

fn f64_ceil_to_bigint(x: f64) -> BigInt {
    BigInt::from_f64(x.ceil()).unwrap_or_else(BigInt::zero)
}

/// Streaming iterator over ground-set elements in canonical order.
pub type ElementIter<'a> = Box<dyn Iterator<Item = ElementKey> + Send + 'a>;

/// A finite ground set `B` with its evaluation map `φ: B → ℤ^A`.
///
/// Implementations must enumerate elements in a fixed canonical order, expose
/// exact unranking via [`GroundSet::element_at`], and keep all methods
/// `Send + Sync` so instances can be shared freely across threads.
pub trait GroundSet: Send + Sync {
    fn family(&self) -> Family;

    /// `|B|`.
    fn size(&self) -> u64;

    /// `|A|`.
    fn dim(&self) -> usize;

    /// Elements in canonical order.
    fn elements(&self) -> ElementIter<'_>;

    /// The element at a canonical rank, or `None` when out of range.
    fn element_at(&self, index: u64) -> Option<ElementKey>;

    /// Membership test for arbitrary keys.
    fn contains(&self, key: &ElementKey) -> bool;

    /// Exact evaluation `φ(b)`, or `None` when `key ∉ B`.
    fn phi(&self, key: &ElementKey) -> Option<PhiVector>;

    /// Human-readable label for basis index `index` (in `0..dim()`).
    fn index_label(&self, index: usize) -> String;

    /// Coefficients `c` with `Σ_a c_a·φ_a(b) = 1` for every `b ∈ B`.
    fn constant_combination(&self) -> Vec<BigRational>;

    /// One-line description of the instance parameters.
    fn describe(&self) -> String;

    /// True when the family supports only verification (no isolation
    /// construction), e.g. permutation ground sets.
    fn verification_only(&self) -> bool {
        false
    }

    /// Constructs a greedy isolation family for basis index `index`.
    fn isolation_family(&self, index: usize, cfg: &GreedyConfig) -> Result<IsolationFamily> {
        let _ = (index, cfg);
        Err(Error::IsolationUnsupported {
            family: self.family().name(),
            note: String::new(),
        })
    }
}

/// Options for the greedy isolation-family construction.
#[derive(Clone, Debug)]
pub struct GreedyConfig {
    /// `None` starts the candidate sweep at lexicographic rank 0; `Some(s)`
    /// derives a random starting offset from `s` (the sweep still covers all
    /// candidates, wrapping around).
    pub seed: Option<u64>,
    /// Cap on the number of candidates enumerated.
    pub max_candidates: u64,
}

impl Default for GreedyConfig {
    fn default() -> Self {
        GreedyConfig {
            seed: None,
            max_candidates: DEFAULT_ENUMERATION_BUDGET,
        }
    }
}

/// A family of exact isolation vectors for one basis index: each vector
/// satisfies `φ(γ) = m·e_a`, supports are pairwise disjoint, and norms stay
/// within the instance's `c3`.
#[derive(Clone, Debug)]
pub struct IsolationFamily {
    /// Canonical index of the isolated basis element `a`.
    pub target_index: usize,
    /// Printable form of `a`.
    pub target_label: String,
    /// The modulus `m` the construction certifies.
    pub modulus: u64,
    /// The vectors `γ_1, .., γ_r`.
    pub vectors: Vec<SparseDomainVector>,
    /// True when the greedy sweep examined every candidate (so the count `r`
    /// is the full greedy yield, not a budget truncation).
    pub complete: bool,
}

impl IsolationFamily {
    /// The certified count `r`.
    #[must_use]
    pub fn count(&self) -> usize {
        self.vectors.len()
    }

    /// The certified maximum squared norm across the family (zero if empty).
    #[must_use]
    pub fn max_norm_sq(&self) -> BigInt {
        self.vectors
            .iter()
            .map(SparseDomainVector::norm_sq)
            .max()
            .unwrap_or_else(BigInt::zero)
    }
}

/// A symmetry witness: a bijection `π` on `B` together with an exact matrix
/// `τ` such that `φ(π(b)) = τ·φ(b)` for every `b ∈ B`.
#[derive(Clone)]
pub struct SymmetryWitness {
    map: Arc<dyn Fn(&ElementKey) -> Option<ElementKey> + Send + Sync>,
    tau: RationalMatrix,
}

impl SymmetryWitness {
    pub fn new(
        map: Arc<dyn Fn(&ElementKey) -> Option<ElementKey> + Send + Sync>,
        tau: RationalMatrix,
    ) -> Self {
        SymmetryWitness { map, tau }
    }

    /// The identity witness (π = id, τ = I).
    #[must_use]
    pub fn identity(dim: usize) -> Self {
        SymmetryWitness {
            map: Arc::new(|key: &ElementKey| Some(key.clone())),
            tau: RationalMatrix::identity(dim),
        }
    }

    /// Applies π; `None` signals the key is outside the bijection's domain.
    #[must_use]
    pub fn apply(&self, key: &ElementKey) -> Option<ElementKey> {
        (self.map)(key)
    }

    #[must_use]
    pub fn tau(&self) -> &RationalMatrix {
        &self.tau
    }
}

impl fmt::Debug for SymmetryWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymmetryWitness")
            .field("tau_dim", &self.tau.dim())
            .finish_non_exhaustive()
    }
}

/// How much of `B` a symmetry verification sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymmetryMode {
    /// Every element; also checks that π's images are pairwise distinct.
    Exhaustive,
    /// `count` elements drawn uniformly (with replacement) from a seeded
    /// stream.
    Sample { count: u64, seed: u64 },
}

/// One counterexample from a symmetry sweep.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetryViolation {
    pub element: ElementKey,
    pub image: Option<ElementKey>,
    pub detail: String,
}

/// Result of [`Instance::verify_symmetry`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetryReport {
    /// All checked elements satisfied `φ(π(b)) = τ·φ(b)`, τ is invertible,
    /// and (in exhaustive mode) π is a bijection of `B`.
    pub pass: bool,
    pub checked: u64,
    pub tau_invertible: bool,
    /// `Some(images_distinct)` in exhaustive mode, `None` when sampled.
    pub bijective: Option<bool>,
    pub first_violation: Option<SymmetryViolation>,
}

/// Result of [`Instance::verify_isolation_family`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsolationReport {
    pub target_index: usize,
    /// `r`, the number of vectors in the family.
    pub count: u64,
    /// Every vector satisfies `φ(γ) = m·e_a` exactly.
    pub all_isolate: bool,
    /// Supports are pairwise disjoint.
    pub supports_disjoint: bool,
    /// Every squared norm is ≤ ⌈c3²⌉ (exact integer comparison).
    pub norms_within_bound: bool,
    pub max_norm_sq: BigInt,
    pub c3_sq_ceil: BigInt,
    /// `⌈|B|/c2⌉`, the count demanded by the isolation condition.
    pub required_count: u64,
    pub meets_count_bound: bool,
    pub first_failure: Option<String>,
    /// Conjunction of the three per-vector bullets (the count bound is
    /// reported separately: a short family is still a valid family).
    pub pass: bool,
}

/// Result of [`Instance::verify_solution`]: the exact counting identity
/// `|B|·φ(T) = |T|·φ(B)`, checked index by index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionCertificate {
    pub pass: bool,
    pub subset_size: u64,
    /// First basis index where the cross-multiplied identity fails.
    pub first_violation: Option<usize>,
}

/// Result of [`Instance::expected_vector`]: `E[X] = (N/|B|)·φ(B)` as exact
/// rationals, with an integrality flag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpectedVector {
    pub entries: Vec<BigRational>,
    pub integral: bool,
}

impl ExpectedVector {
    /// The expected vector as integers, when integral.
    #[must_use]
    pub fn as_integer(&self) -> Option<PhiVector> {
        if !self.integral {
            return None;
        }
        Some(PhiVector::from_vec(
            self.entries.iter().map(|r| r.to_integer()).collect(),
        ))
    }
}

/// Result of [`Instance::check_divisibility`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivisibilityReport {
    /// Minimal `c0*` with `(c0*/|B|)·φ(B)` integral:
    /// `lcm_a(|B| / gcd(|B|, φ(B)_a))`.
    pub minimal_c0: BigInt,
    pub declared_c0: u64,
    pub minimal_divides_declared: bool,
}

/// Result of [`Instance::check_boundedness`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundednessReport {
    /// `max_b ‖φ(b)‖₂²`, exact.
    pub max_norm_sq: BigInt,
    /// An element attaining the maximum.
    pub witness: ElementKey,
    pub c1_sq_ceil: BigInt,
    pub within_bound: bool,
}

/// Scale knobs for the admissible-`N` window, standing in for the
/// unspecified absolute constants in the asymptotic bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantOverrides {
    /// Multiplier on the lower-bound expression.
    pub lower_scale: f64,
    /// Multiplier on the `√|B|` upper bound.
    pub upper_scale: f64,
}

impl Default for ConstantOverrides {
    fn default() -> Self {
        ConstantOverrides {
            lower_scale: 1.0,
            upper_scale: 1.0,
        }
    }
}

/// Result of [`Instance::admissible_n`].
#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibleN {
    /// Every admissible `N` must be a multiple of `c0·m`.
    pub divisor: BigInt,
    /// Lower end of the theoretical window (scaled by `lower_scale`).
    pub lower_bound: f64,
    /// Upper end: `upper_scale·√|B|`.
    pub upper_bound: f64,
    /// Smallest multiple of the divisor inside `[lower, upper] ∩ [1, |B|]`,
    /// when that window is nonempty. At desk scale it usually is empty; the
    /// window is reported rather than silently rounded.
    pub smallest_in_window: Option<u64>,
    /// Smallest multiple of the divisor in `1..=|B|`, ignoring the window —
    /// the smallest `N` whose divisibility precondition holds at all.
    pub smallest_divisible: Option<u64>,
}

struct InstanceCache {
    phi_total: OnceLock<PhiVector>,
}

/// A ground set bundled with its constants and enumeration budget: the unit
/// every verifier, sampler, and analyzer operates on.
///
/// Instances are immutable and cheap to clone (`Arc` inside); all methods
/// take `&self`, so a single instance can back parallel work without locks.
#[derive(Clone)]
pub struct Instance {
    ground: Arc<dyn GroundSet>,
    constants: FrameworkConstants,
    budget: u64,
    cache: Arc<InstanceCache>,
}

impl fmt::Debug for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Instance")
            .field("family", &self.family().name())
            .field("describe", &self.describe())
            .field("size", &self.size())
            .field("dim", &self.dim())
            .finish_non_exhaustive()
    }
}

impl Instance {
    /// Wraps a ground set with its constants, validating basic shape
    /// invariants and spot-checking the constant-function combination on a
    /// deterministic sample of elements.
    pub fn new(ground: Arc<dyn GroundSet>, constants: FrameworkConstants) -> Result<Self> {
        if ground.size() == 0 {
            return Err(Error::invalid("ground set must be nonempty"));
        }
        if ground.dim() == 0 {
            return Err(Error::invalid("index set A must be nonempty"));
        }
        let comb = ground.constant_combination();
        if comb.len() != ground.dim() {
            return Err(Error::DimensionMismatch(format!(
                "constant combination has length {}, expected |A| = {}",
                comb.len(),
                ground.dim()
            )));
        }
        let instance = Instance {
            ground,
            constants,
            budget: DEFAULT_ENUMERATION_BUDGET,
            cache: Arc::new(InstanceCache {
                phi_total: OnceLock::new(),
            }),
        };
        instance.spot_check_constant_combination(&comb)?;
        Ok(instance)
    }

    /// Verifies `Σ_a c_a·φ_a(b) = 1` on up to 64 evenly spread elements.
    fn spot_check_constant_combination(&self, comb: &[BigRational]) -> Result<()> {
        let size = self.size();
        let samples = size.min(64);
        for i in 0..samples {
            let rank = (i as u128 * size as u128 / samples as u128) as u64;
            let key = self.ground.element_at(rank).ok_or_else(|| {
                Error::invalid(format!("element_at({rank}) out of range for size {size}"))
            })?;
            let phi = self
                .ground
                .phi(&key)
                .ok_or_else(|| Error::UnknownElement(key.to_string()))?;
            let mut acc = BigRational::zero();
            for (c, x) in comb.iter().zip(phi.entries()) {
                if !c.is_zero() && !x.is_zero() {
                    acc += c * BigRational::from(x.clone());
                }
            }
            if !acc.is_one() {
                return Err(Error::invalid(format!(
                    "constant combination evaluates to {acc} ≠ 1 at element {key}"
                )));
            }
        }
        Ok(())
    }

    /// Replaces the enumeration budget (default
    /// [`DEFAULT_ENUMERATION_BUDGET`]).
    #[must_use]
    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    #[must_use]
    pub fn family(&self) -> Family {
        self.ground.family()
    }

    #[must_use]
    pub fn size(&self) -> u64 {
        self.ground.size()
    }

    #[must_use]
    pub fn dim(&self) -> usize {
        self.ground.dim()
    }

    #[must_use]
    pub fn constants(&self) -> &FrameworkConstants {
        &self.constants
    }

    #[must_use]
    pub fn budget(&self) -> u64 {
        self.budget
    }

    #[must_use]
    pub fn describe(&self) -> String {
        self.ground.describe()
    }

    #[must_use]
    pub fn verification_only(&self) -> bool {
        self.ground.verification_only()
    }

    /// Elements in canonical order. Iteration itself is lazy; exhaustive
    /// operations call [`Instance::check_budget`] before consuming it.
    #[must_use]
    pub fn elements(&self) -> ElementIter<'_> {
        self.ground.elements()
    }

    /// The element at canonical rank `index`.
    #[must_use]
    pub fn element_at(&self, index: u64) -> Option<ElementKey> {
        self.ground.element_at(index)
    }

    #[must_use]
    pub fn contains(&self, key: &ElementKey) -> bool {
        self.ground.contains(key)
    }

    #[must_use]
    pub fn index_label(&self, index: usize) -> String {
        self.ground.index_label(index)
    }

    #[must_use]
    pub fn index_labels(&self) -> Vec<String> {
        (0..self.dim()).map(|i| self.index_label(i)).collect()
    }

    #[must_use]
    pub fn constant_combination(&self) -> Vec<BigRational> {
        self.ground.constant_combination()
    }

    /// Errors when an exhaustive operation would stream more than the budget.
    pub fn check_budget(&self, needed: u128) -> Result<()> {
        if needed > self.budget as u128 {
            return Err(Error::BudgetExceeded {
                needed,
                budget: self.budget,
            });
        }
        Ok(())
    }

    /// `φ(b)`, erroring on keys outside `B`.
    pub fn phi(&self, key: &ElementKey) -> Result<PhiVector> {
        self.ground
            .phi(key)
            .ok_or_else(|| Error::UnknownElement(key.to_string()))
    }

    /// `φ(B) = Σ_{b∈B} φ(b)`, computed once and cached.
    pub fn phi_total(&self) -> Result<PhiVector> {
        if let Some(v) = self.cache.phi_total.get() {
            return Ok(v.clone());
        }
        self.check_budget(self.size() as u128)?;
        let mut acc = PhiVector::zeros(self.dim());
        for key in self.ground.elements() {
            let phi = self
                .ground
                .phi(&key)
                .ok_or_else(|| Error::UnknownElement(key.to_string()))?;
            acc.add_assign(&phi);
        }
        let _ = self.cache.phi_total.set(acc.clone());
        Ok(acc)
    }

    /// `φ(T) = Σ_{t∈T} φ(t)` for a subset or multiset of keys.
    pub fn phi_sum<'a, I>(&self, keys: I) -> Result<PhiVector>
    where
        I: IntoIterator<Item = &'a ElementKey>,
    {
        let mut acc = PhiVector::zeros(self.dim());
        for key in keys {
            let phi = self.phi(key)?;
            acc.add_assign(&phi);
        }
        Ok(acc)
    }

    /// `E[X] = (N/|B|)·φ(B)` as exact rationals.
    pub fn expected_vector(&self, n: u64) -> Result<ExpectedVector> {
        if n == 0 || n > self.size() {
            return Err(Error::NOutOfRange {
                n,
                max: self.size(),
            });
        }
        let total = self.phi_total()?;
        let ratio = BigRational::new(BigInt::from(n), BigInt::from(self.size()));
        let entries: Vec<BigRational> = total
            .entries()
            .iter()
            .map(|x| &ratio * BigRational::from(x.clone()))
            .collect();
        let integral = entries.iter().all(BigRational::is_integer);
        Ok(ExpectedVector { entries, integral })
    }

    /// Computes the minimal divisor `c0*` that makes `(c0*/|B|)·φ(B)`
    /// integral and compares it with the declared `c0`.
    pub fn check_divisibility(&self) -> Result<DivisibilityReport> {
        let total = self.phi_total()?;
        let size = BigInt::from(self.size());
        let mut minimal = BigInt::one();
        for entry in total.entries() {
            let g = size.gcd(&entry.abs());
            let needed = &size / g;
            minimal = minimal.lcm(&needed);
        }
        let declared = BigInt::from(self.constants.c0);
        let divides = (&declared % &minimal).is_zero();
        Ok(DivisibilityReport {
            minimal_c0: minimal,
            declared_c0: self.constants.c0,
            minimal_divides_declared: divides,
        })
    }

    /// Finds `max_b ‖φ(b)‖₂²` exactly and compares it against `⌈c1²⌉`.
    pub fn check_boundedness(&self) -> Result<BoundednessReport> {
        self.check_budget(self.size() as u128)?;
        let mut max_norm_sq = BigInt::from(-1);
        let mut witness = None;
        for key in self.ground.elements() {
            let phi = self
                .ground
                .phi(&key)
                .ok_or_else(|| Error::UnknownElement(key.to_string()))?;
            let ns = phi.norm_sq();
            if ns > max_norm_sq {
                max_norm_sq = ns;
                witness = Some(key);
            }
        }
        let witness = witness.expect("nonempty ground set");
        let bound = self.constants.c1_sq_ceil();
        Ok(BoundednessReport {
            within_bound: max_norm_sq <= bound,
            max_norm_sq,
            witness,
            c1_sq_ceil: bound,
        })
    }

    /// Checks `φ(π(b)) = τ·φ(b)` exactly on all of `B` or on a seeded sample.
    pub fn verify_symmetry(
        &self,
        witness: &SymmetryWitness,
        mode: SymmetryMode,
    ) -> Result<SymmetryReport> {
        if witness.tau().dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "τ is {}×{} but |A| = {}",
                witness.tau().dim(),
                witness.tau().dim(),
                self.dim()
            )));
        }
        let tau_invertible = witness.tau().is_invertible();
        let mut checked = 0u64;
        let mut first_violation = None;
        let mut images = BTreeSet::new();
        let mut bijective = None;

        let check_one = |key: ElementKey,
                             track_images: Option<&mut BTreeSet<ElementKey>>|
         -> Result<Option<SymmetryViolation>> {
            let phi_b = self.phi(&key)?;
            let Some(image) = witness.apply(&key) else {
                return Ok(Some(SymmetryViolation {
                    element: key,
                    image: None,
                    detail: "π is undefined here".to_string(),
                }));
            };
            let Some(phi_image) = self.ground.phi(&image) else {
                return Ok(Some(SymmetryViolation {
                    detail: format!("π({key}) = {image} is outside B"),
                    element: key,
                    image: Some(image),
                }));
            };
            if let Some(set) = track_images {
                set.insert(image.clone());
            }
            let mapped = witness.tau().mul_int_vec(phi_b.entries())?;
            let exact = mapped
                .iter()
                .zip(phi_image.entries())
                .all(|(lhs, rhs)| lhs == &BigRational::from(rhs.clone()));
            if exact {
                Ok(None)
            } else {
                Ok(Some(SymmetryViolation {
                    detail: format!("φ(π({key})) ≠ τ·φ({key})"),
                    element: key,
                    image: Some(image),
                }))
            }
        };

        match mode {
            SymmetryMode::Exhaustive => {
                self.check_budget(self.size() as u128)?;
                for key in self.ground.elements() {
                    checked += 1;
                    if let Some(v) = check_one(key, Some(&mut images))? {
                        if first_violation.is_none() {
                            first_violation = Some(v);
                        }
                    }
                }
                bijective = Some(images.len() as u64 == self.size());
            }
            SymmetryMode::Sample { count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for _ in 0..count {
                    let rank = rng.random_range(0..self.size());
                    let key = self
                        .element_at(rank)
                        .ok_or_else(|| Error::invalid(format!("element_at({rank}) failed")))?;
                    checked += 1;
                    if let Some(v) = check_one(key, None)? {
                        if first_violation.is_none() {
                            first_violation = Some(v);
                        }
                    }
                }
            }
        }

        let pass = tau_invertible && first_violation.is_none() && bijective.unwrap_or(true);
        Ok(SymmetryReport {
            pass,
            checked,
            tau_invertible,
            bijective,
            first_violation,
        })
    }

    /// Re-verifies an isolation family from scratch: the isolation identity,
    /// support disjointness, the norm bound, and the count bound `⌈|B|/c2⌉`.
    pub fn verify_isolation_family(&self, family: &IsolationFamily) -> Result<IsolationReport> {
        if family.target_index >= self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "target index {} out of range for |A| = {}",
                family.target_index,
                self.dim()
            )));
        }
        let dim = self.dim();
        let target = PhiVector::scaled_unit(dim, family.target_index, BigInt::from(family.modulus));

        let mut all_isolate = true;
        let mut first_failure = None;
        for (i, gamma) in family.vectors.iter().enumerate() {
            let mut image = PhiVector::zeros(dim);
            for (key, coeff) in gamma.iter() {
                let phi = self.phi(key)?;
                image.add_scaled(coeff, &phi);
            }
            if image != target {
                all_isolate = false;
                if first_failure.is_none() {
                    first_failure = Some(format!(
                        "vector {i}: φ(γ) = {image}, expected {}·e_{}",
                        family.modulus, family.target_index
                    ));
                }
            }
        }

        let mut seen: BTreeSet<&ElementKey> = BTreeSet::new();
        let mut supports_disjoint = true;
        'outer: for gamma in &family.vectors {
            for key in gamma.support() {
                if !seen.insert(key) {
                    supports_disjoint = false;
                    if first_failure.is_none() {
                        first_failure = Some(format!("supports overlap at element {key}"));
                    }
                    break 'outer;
                }
            }
        }

        let max_norm_sq = family.max_norm_sq();
        let c3_sq_ceil = self.constants.c3_sq_ceil();
        let norms_within_bound = max_norm_sq <= c3_sq_ceil;
        if !norms_within_bound && first_failure.is_none() {
            first_failure = Some(format!(
                "max ‖γ‖₂² = {max_norm_sq} exceeds ⌈c3²⌉ = {c3_sq_ceil}"
            ));
        }

        let required_count = self.required_isolation_count();
        let count = family.count() as u64;
        Ok(IsolationReport {
            target_index: family.target_index,
            count,
            all_isolate,
            supports_disjoint,
            norms_within_bound,
            max_norm_sq,
            c3_sq_ceil,
            required_count,
            meets_count_bound: count >= required_count,
            first_failure,
            pass: all_isolate && supports_disjoint && norms_within_bound,
        })
    }

    /// `⌈|B|/c2⌉`, computed exactly when `c2` is integral.
    #[must_use]
    pub fn required_isolation_count(&self) -> u64 {
        let size = BigInt::from(self.size());
        match &self.constants.c2_exact {
            Some(c2) => {
                let ceil = (&size + c2 - BigInt::one()) / c2;
                ceil.to_u64().unwrap_or(u64::MAX)
            }
            None => (self.size() as f64 / self.constants.c2).ceil() as u64,
        }
    }

    /// Checks the exact counting identity `|B|·φ(T)_a = |T|·φ(B)_a` for
    /// every basis index.
    pub fn verify_solution(&self, subset: &BTreeSet<ElementKey>) -> Result<SolutionCertificate> {
        if subset.is_empty() {
            return Err(Error::EmptySet("subset T"));
        }
        let phi_t = self.phi_sum(subset.iter())?;
        let phi_b = self.phi_total()?;
        let size = BigInt::from(self.size());
        let t_size = BigInt::from(subset.len() as u64);
        let mut first_violation = None;
        for (a, (pt, pb)) in phi_t.entries().iter().zip(phi_b.entries()).enumerate() {
            if &size * pt != &t_size * pb {
                first_violation = Some(a);
                break;
            }
        }
        Ok(SolutionCertificate {
            pass: first_violation.is_none(),
            subset_size: subset.len() as u64,
            first_violation,
        })
    }

    /// The admissible window for `N`: divisor `c0·m`, the scaled theoretical
    /// lower bound, and the `√|B|` upper bound. Nothing is rounded silently;
    /// empty windows are reported as such.
    #[must_use]
    pub fn admissible_n(&self, overrides: &ConstantOverrides) -> AdmissibleN {
        let c = &self.constants;
        let divisor = BigInt::from(c.c0) * BigInt::from(c.m);
        let dim = self.dim() as f64;
        let m = c.m as f64;

        // L = |A|·m·c0·c1·c2·c3, handled in log space against overflow.
        let ln_l = dim.ln()
            + m.ln()
            + (c.c0 as f64).ln()
            + c.c1.ln()
            + c.c2.ln()
            + c.c3.ln();
        let ln_l = ln_l.max(0.0);

        let term1 = m.powi(3);
        let term2 = dim.powi(2) * m.powi(2) * ln_l.powi(2);
        // |A|⁶·c1⁶·c2³·c3⁶·ln³L, via logs (may legitimately overflow to ∞).
        let term3_ln = 6.0 * dim.ln() + 6.0 * c.c1.ln() + 3.0 * c.c2.ln() + 6.0 * c.c3.ln();
        let term3 = if ln_l > 0.0 {
            (term3_ln + 3.0 * ln_l.ln()).exp()
        } else {
            0.0
        };
        let lower_bound = overrides.lower_scale * term1.max(term2).max(term3);
        let upper_bound = overrides.upper_scale * (self.size() as f64).sqrt();

        let size = BigInt::from(self.size());
        let smallest_divisible = if divisor <= size {
            divisor.to_u64()
        } else {
            None
        };

        let smallest_in_window = (|| {
            let lo = lower_bound.max(1.0);
            let hi = upper_bound.min(self.size() as f64);
            if lo > hi || !lo.is_finite() {
                return None;
            }
            let lo_int = BigInt::from_f64(lo.ceil())?;
            // first multiple of divisor ≥ lo
            let q = (&lo_int + &divisor - BigInt::one()) / &divisor;
            let candidate = q * &divisor;
            let hi_int = BigInt::from_f64(hi.floor())?;
            if candidate <= hi_int && candidate >= BigInt::one() {
                candidate.to_u64()
            } else {
                None
            }
        })();

        AdmissibleN {
            divisor,
            lower_bound,
            upper_bound,
            smallest_in_window,
            smallest_divisible,
        }
    }

    /// Constructs a greedy isolation family for basis index `index`, when the
    /// family supports it.
    pub fn isolation_family(&self, index: usize, cfg: &GreedyConfig) -> Result<IsolationFamily> {
        if index >= self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "basis index {index} out of range for |A| = {}",
                self.dim()
            )));
        }
        self.ground.isolation_family(index, cfg)
    }
}

/// Ground set defined by an explicit `φ` table; element `i` is
/// [`ElementKey::Index`]`(i)`.
struct CustomGround {
    rows: Vec<PhiVector>,
    dim: usize,
    combination: Vec<BigRational>,
}

impl GroundSet for CustomGround {
    fn family(&self) -> Family {
        Family::Custom
    }

    fn size(&self) -> u64 {
        self.rows.len() as u64
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn elements(&self) -> ElementIter<'_> {
        Box::new((0..self.rows.len() as u64).map(ElementKey::Index))
    }

    fn element_at(&self, index: u64) -> Option<ElementKey> {
        if index < self.rows.len() as u64 {
            Some(ElementKey::Index(index))
        } else {
            None
        }
    }

    fn contains(&self, key: &ElementKey) -> bool {
        matches!(key, ElementKey::Index(i) if *i < self.rows.len() as u64)
    }

    fn phi(&self, key: &ElementKey) -> Option<PhiVector> {
        match key {
            ElementKey::Index(i) if *i < self.rows.len() as u64 => {
                Some(self.rows[*i as usize].clone())
            }
            _ => None,
        }
    }

    fn index_label(&self, index: usize) -> String {
        format!("a{index}")
    }

    fn constant_combination(&self) -> Vec<BigRational> {
        self.combination.clone()
    }

    fn describe(&self) -> String {
        format!("custom(|B|={}, |A|={})", self.rows.len(), self.dim)
    }

    fn verification_only(&self) -> bool {
        true
    }
}

/// Builds an instance from an explicit evaluation table. `phi_rows[i]` is
/// `φ` of element `i`; `combination` must satisfy `Σ_a c_a·φ_a(b) = 1` on
/// every row (validated).
pub fn custom_instance(
    phi_rows: Vec<PhiVector>,
    constants: FrameworkConstants,
    combination: Vec<BigRational>,
) -> Result<Instance> {
    if phi_rows.is_empty() {
        return Err(Error::EmptySet("phi table"));
    }
    let dim = phi_rows[0].dim();
    if phi_rows.iter().any(|r| r.dim() != dim) {
        return Err(Error::DimensionMismatch(
            "phi table rows have differing lengths".to_string(),
        ));
    }
    let ground = CustomGround {
        rows: phi_rows,
        dim,
        combination,
    };
    Instance::new(Arc::new(ground), constants)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64) -> BigRational {
        BigRational::from(BigInt::from(n))
    }

    fn rat_frac(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn phi(entries: &[i64]) -> PhiVector {
        PhiVector::from_vec(entries.iter().map(|&x| BigInt::from(x)).collect())
    }

    /// Two elements, scalar φ ≡ 1: the smallest legal instance.
    fn toy_instance() -> Instance {
        custom_instance(
            vec![phi(&[1]), phi(&[1])],
            FrameworkConstants::new(1, 1, 1.0, 1.0, 1.0).unwrap(),
            vec![rat(1)],
        )
        .unwrap()
    }

    /// |B| = 3, |A| = 2 with an asymmetric φ table. The combination
    /// (1,1) works because each row sums to 1.
    fn skew_instance() -> Instance {
        custom_instance(
            vec![phi(&[1, 0]), phi(&[0, 1]), phi(&[1, 0])],
            FrameworkConstants::new(1, 3, 2.0, 1.0, 2.0).unwrap(),
            vec![rat(1), rat(1)],
        )
        .unwrap()
    }

    #[test]
    fn constants_reject_nonpositive_values() {
        assert!(FrameworkConstants::new(0, 1, 1.0, 1.0, 1.0).is_err());
        assert!(FrameworkConstants::new(1, 0, 1.0, 1.0, 1.0).is_err());
        assert!(FrameworkConstants::new(1, 1, 0.0, 1.0, 1.0).is_err());
        assert!(FrameworkConstants::new(1, 1, 1.0, -1.0, 1.0).is_err());
        assert!(FrameworkConstants::new(1, 1, 1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn exact_constants_round_trip_through_f64() {
        let c = FrameworkConstants::from_exact(
            1,
            4,
            BigInt::from(16),
            BigInt::from(18),
            BigInt::from(32),
        )
        .unwrap();
        assert_eq!(c.c1, 4.0);
        assert_eq!(c.c2, 18.0);
        assert_eq!(c.c1_sq_ceil(), BigInt::from(16));
        assert_eq!(c.c3_sq_ceil(), BigInt::from(32));
    }

    #[test]
    fn custom_instance_rejects_bad_combination() {
        let err = custom_instance(
            vec![phi(&[2]), phi(&[1])],
            FrameworkConstants::new(1, 1, 2.0, 1.0, 1.0).unwrap(),
            vec![rat(1)],
        );
        assert!(err.is_err(), "row with φ = 2 cannot satisfy Σ c·φ = 1");
    }

    #[test]
    fn phi_total_and_phi_sum_agree_on_full_set() {
        let inst = skew_instance();
        let all: BTreeSet<ElementKey> = inst.elements().collect();
        assert_eq!(inst.phi_total().unwrap(), inst.phi_sum(all.iter()).unwrap());
        assert_eq!(inst.phi_total().unwrap(), phi(&[2, 1]));
    }

    #[test]
    fn phi_sum_of_empty_subset_is_zero() {
        let inst = toy_instance();
        assert_eq!(inst.phi_sum(std::iter::empty()).unwrap(), phi(&[0]));
    }

    #[test]
    fn phi_sum_rejects_unknown_keys() {
        let inst = toy_instance();
        let bogus = [ElementKey::Index(99)];
        assert!(matches!(
            inst.phi_sum(bogus.iter()),
            Err(Error::UnknownElement(_))
        ));
    }

    #[test]
    fn expected_vector_integrality_flags() {
        let inst = skew_instance();
        // N = 3 = |B|: E[X] = φ(B), integral.
        let e3 = inst.expected_vector(3).unwrap();
        assert!(e3.integral);
        assert_eq!(e3.as_integer().unwrap(), phi(&[2, 1]));
        // N = 1: E[X] = (2/3, 1/3), not integral.
        let e1 = inst.expected_vector(1).unwrap();
        assert!(!e1.integral);
        assert_eq!(e1.entries[0], rat_frac(2, 3));
        assert_eq!(e1.as_integer(), None);
        assert!(matches!(
            inst.expected_vector(0),
            Err(Error::NOutOfRange { .. })
        ));
        assert!(matches!(
            inst.expected_vector(4),
            Err(Error::NOutOfRange { .. })
        ));
    }

    #[test]
    fn divisibility_minimal_c0() {
        // toy: φ(B) = (2), |B| = 2 ⇒ already integral, c0* = 1.
        let report = toy_instance().check_divisibility().unwrap();
        assert_eq!(report.minimal_c0, BigInt::one());
        assert!(report.minimal_divides_declared);

        // skew: φ(B) = (2,1), |B| = 3 ⇒ c0* = 3.
        let report = skew_instance().check_divisibility().unwrap();
        assert_eq!(report.minimal_c0, BigInt::from(3));
        assert!(report.minimal_divides_declared);
    }

    #[test]
    fn boundedness_exact_max() {
        let report = toy_instance().check_boundedness().unwrap();
        assert_eq!(report.max_norm_sq, BigInt::one());
        assert!(report.within_bound);

        let report = skew_instance().check_boundedness().unwrap();
        assert_eq!(report.max_norm_sq, BigInt::one());
        assert_eq!(report.c1_sq_ceil, BigInt::from(4));
        assert!(report.within_bound);
    }

    #[test]
    fn verify_solution_cross_multiplied() {
        let inst = skew_instance();
        // T = {0, 1, 2} = B passes trivially.
        let full: BTreeSet<ElementKey> = inst.elements().collect();
        assert!(inst.verify_solution(&full).unwrap().pass);
        // T = {#0}: |B|·φ(T) = (3,0) vs |T|·φ(B) = (2,1) ⇒ fails at index 0.
        let single: BTreeSet<ElementKey> = [ElementKey::Index(0)].into();
        let cert = inst.verify_solution(&single).unwrap();
        assert!(!cert.pass);
        assert_eq!(cert.first_violation, Some(0));
        // empty set is a precondition error, not a failure
        assert!(matches!(
            inst.verify_solution(&BTreeSet::new()),
            Err(Error::EmptySet(_))
        ));
    }

    #[test]
    fn constant_combination_forces_subset_size() {
        // For any T, Σ_a c_a·φ(T)_a = |T| when the combination is ≡ 1.
        let inst = skew_instance();
        let comb = inst.constant_combination();
        for subset_bits in 1u32..8 {
            let keys: Vec<ElementKey> = (0..3)
                .filter(|i| subset_bits & (1 << i) != 0)
                .map(|i| ElementKey::Index(i as u64))
                .collect();
            let pt = inst.phi_sum(keys.iter()).unwrap();
            let mut acc = BigRational::zero();
            for (c, x) in comb.iter().zip(pt.entries()) {
                acc += c * BigRational::from(x.clone());
            }
            assert_eq!(acc, rat(keys.len() as i64));
        }
    }

    #[test]
    fn identity_witness_verifies_exhaustively() {
        let inst = skew_instance();
        let witness = SymmetryWitness::identity(inst.dim());
        let report = inst
            .verify_symmetry(&witness, SymmetryMode::Exhaustive)
            .unwrap();
        assert!(report.pass);
        assert_eq!(report.checked, 3);
        assert_eq!(report.bijective, Some(true));
        assert!(report.tau_invertible);
    }

    #[test]
    fn collapsing_map_fails_bijectivity() {
        let inst = skew_instance();
        // π sends everything to #0 with τ = I: φ-mismatch at #1 and not a
        // bijection.
        let witness = SymmetryWitness::new(
            Arc::new(|_: &ElementKey| Some(ElementKey::Index(0))),
            RationalMatrix::identity(2),
        );
        let report = inst
            .verify_symmetry(&witness, SymmetryMode::Exhaustive)
            .unwrap();
        assert!(!report.pass);
        assert_eq!(report.bijective, Some(false));
        assert!(report.first_violation.is_some());
    }

    #[test]
    fn sampled_symmetry_is_deterministic() {
        let inst = skew_instance();
        let witness = SymmetryWitness::identity(inst.dim());
        let mode = SymmetryMode::Sample { count: 10, seed: 7 };
        let a = inst.verify_symmetry(&witness, mode).unwrap();
        let b = inst.verify_symmetry(&witness, mode).unwrap();
        assert_eq!(a, b);
        assert!(a.pass);
        assert_eq!(a.bijective, None);
    }

    #[test]
    fn isolation_family_verification_and_idempotence() {
        let inst = toy_instance();
        let mut gamma = SparseDomainVector::new();
        gamma.add_term(ElementKey::Index(0), BigInt::one());
        let family = IsolationFamily {
            target_index: 0,
            target_label: "a0".to_string(),
            modulus: 1,
            vectors: vec![gamma],
            complete: true,
        };
        let r1 = inst.verify_isolation_family(&family).unwrap();
        let r2 = inst.verify_isolation_family(&family).unwrap();
        assert_eq!(r1, r2, "re-verification must be idempotent");
        assert!(r1.pass);
        assert!(r1.all_isolate && r1.supports_disjoint && r1.norms_within_bound);
        // |B|/c2 = 2/1 ⇒ needs two vectors; this family has one.
        assert_eq!(r1.required_count, 2);
        assert!(!r1.meets_count_bound);
    }

    #[test]
    fn overlapping_supports_are_flagged() {
        let inst = toy_instance();
        let mut gamma = SparseDomainVector::new();
        gamma.add_term(ElementKey::Index(0), BigInt::one());
        let family = IsolationFamily {
            target_index: 0,
            target_label: "a0".to_string(),
            modulus: 1,
            vectors: vec![gamma.clone(), gamma],
            complete: true,
        };
        let report = inst.verify_isolation_family(&family).unwrap();
        assert!(!report.supports_disjoint);
        assert!(!report.pass);
        assert!(report
            .first_failure
            .as_deref()
            .unwrap()
            .contains("overlap"));
    }

    #[test]
    fn custom_instances_do_not_offer_isolation() {
        let inst = toy_instance();
        assert!(matches!(
            inst.isolation_family(0, &GreedyConfig::default()),
            Err(Error::IsolationUnsupported { .. })
        ));
        assert!(inst.verification_only());
    }

    #[test]
    fn admissible_window_reports_divisor_and_emptiness() {
        // toy: m = 1, c0 = 1 ⇒ divisor 1; window [max-term, √2] is empty
        // because the lower bound is at least 1·... ≥ m³ = 1 but ln L = 0 ⇒
        // lower = 1, upper = √2 ⇒ N = 1 fits.
        let inst = toy_instance();
        let w = inst.admissible_n(&ConstantOverrides::default());
        assert_eq!(w.divisor, BigInt::one());
        assert_eq!(w.smallest_divisible, Some(1));
        assert_eq!(w.smallest_in_window, Some(1));

        // Large lower_scale forces an empty window; divisor report survives.
        let w = inst.admissible_n(&ConstantOverrides {
            lower_scale: 1e9,
            upper_scale: 1.0,
        });
        assert_eq!(w.smallest_in_window, None);
        assert_eq!(w.smallest_divisible, Some(1));
    }

    #[test]
    fn budget_gates_exhaustive_operations() {
        let inst = skew_instance().with_budget(2);
        assert!(matches!(
            inst.phi_total(),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(matches!(
            inst.check_boundedness(),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn sparse_vector_cancellation_shrinks_support() {
        let mut v = SparseDomainVector::new();
        v.add_term(ElementKey::Index(0), BigInt::from(2));
        v.add_term(ElementKey::Index(1), BigInt::from(-1));
        assert_eq!(v.support_len(), 2);
        assert_eq!(v.norm_sq(), BigInt::from(5));
        v.add_term(ElementKey::Index(0), BigInt::from(-2));
        assert_eq!(v.support_len(), 1);
        assert_eq!(v.coeff(&ElementKey::Index(0)), BigInt::zero());
        assert_eq!(v.coeff(&ElementKey::Index(1)), BigInt::from(-1));
    }

    #[test]
    fn element_key_ordering_and_display() {
        assert!(ElementKey::Word(vec![1, 2]) < ElementKey::Word(vec![2, 1]));
        assert_eq!(ElementKey::Word(vec![1, 2]).to_string(), "12");
        assert_eq!(ElementKey::Word(vec![1, 12]).to_string(), "1.12");
        assert_eq!(ElementKey::Block(vec![1, 3, 4]).to_string(), "{1,3,4}");
        assert_eq!(ElementKey::Perm(vec![2, 3, 1]).to_string(), "[2 3 1]");
        assert_eq!(ElementKey::Index(5).to_string(), "#5");
    }
}
