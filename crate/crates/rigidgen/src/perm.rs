//! Uniform permutation sets: subsets of the symmetric group that hit every
//! ordered `t`-tuple pair equally often.
//!
//! A set `T ⊆ S_n` is `t`-wise uniform when, for every pair of distinct
//! `t`-tuples `(s, r)`, the number of `g ∈ T` with `g(s) = r` (pointwise)
//! equals `|T| / P(n,t)` with `P(n,t) = n·(n-1)⋯(n-t+1)`. Groups attaining
//! this sharply — `|T| = P(n,t)` — are the classical sharply `t`-transitive
//! families reproduced here as fixtures: cyclic shifts (`t = 1`), the affine
//! maps `x ↦ ax+b` over a finite field (`t = 2`), and the Möbius fractional
//! linear maps on a projective line (`t = 3`).
//!
//! The framework view flattens the tuple pairs into a *spanning* index set:
//! `φ_{(s,r)}(g) = [g(s) = r]`. The indicators are linearly dependent, so
//! this instance supports verification but not the isolation construction;
//! [`verify_t_wise`] and the framework's `verify_solution` check the same
//! identity and agree on every subset.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::framework::{
    ElementIter, ElementKey, Family, FrameworkConstants, GroundSet, Instance, PhiVector,
};
use crate::gf::GaloisField;
use crate::util;

/// `P(n,t) = n·(n-1)⋯(n-t+1)`, the number of distinct `t`-tuples.
#[must_use]
pub fn falling(n: u64, t: u64) -> u64 {
    util::falling_factorial_u128(n, t) as u64
}

fn validate_permutation(n: usize, images: &[u32]) -> Result<()> {
    if images.len() != n {
        return Err(Error::invalid(format!(
            "permutation has {} images, expected n = {n}",
            images.len()
        )));
    }
    let mut seen = vec![false; n];
    for &img in images {
        if img < 1 || img as usize > n || seen[img as usize - 1] {
            return Err(Error::invalid(
                "permutation images must form a bijection of 1..=n",
            ));
        }
        seen[img as usize - 1] = true;
    }
    Ok(())
}

/// All distinct `t`-tuples over `1..=n` in lexicographic order.
fn distinct_tuples(n: u32, t: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(t as usize);
    fn rec(n: u32, t: u32, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if current.len() == t as usize {
            out.push(current.clone());
            return;
        }
        for candidate in 1..=n {
            if !current.contains(&candidate) {
                current.push(candidate);
                rec(n, t, current, out);
                current.pop();
            }
        }
    }
    rec(n, t, &mut current, &mut out);
    out
}

/// Result of [`verify_t_wise`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwiseReport {
    /// Every ordered tuple pair is hit `|T|/P(n,t)` times.
    pub pass: bool,
    pub perms: u64,
    pub order: u32,
    /// `P(n,t)` divides `|T|` (necessary for uniformity).
    pub divisible: bool,
    /// `|T| / P(n,t)` when divisible.
    pub expected: Option<u64>,
    pub pairs_checked: u64,
    pub first_violation: Option<String>,
}

/// Checks `t`-wise uniformity directly: for every distinct source tuple `s`,
/// the images `g(s)` over `g ∈ T` cover all distinct `t`-tuples equally.
///
/// Accepts multisets. On subsets of `S_n` this agrees exactly with the
/// framework's `verify_solution` over the spanning instance.
pub fn verify_t_wise(n: u32, t: u32, perms: &[Vec<u32>]) -> Result<TwiseReport> {
    if n == 0 || t == 0 || t > n {
        return Err(Error::invalid(format!(
            "orders must satisfy 1 ≤ t ≤ n, got n={n}, t={t}"
        )));
    }
    if perms.is_empty() {
        return Err(Error::EmptySet("permutation set"));
    }
    for p in perms {
        validate_permutation(n as usize, p)?;
    }

    let p_nt = falling(n as u64, t as u64);
    let divisible = perms.len() as u64 % p_nt == 0;
    let expected = if divisible {
        Some(perms.len() as u64 / p_nt)
    } else {
        None
    };

    let tuples = distinct_tuples(n, t);
    let rank: HashMap<&[u32], usize> = tuples
        .iter()
        .enumerate()
        .map(|(i, tup)| (tup.as_slice(), i))
        .collect();

    let mut pairs_checked = 0u64;
    let mut first_violation = if divisible {
        None
    } else {
        Some(format!(
            "set size {} is not divisible by P(n,t) = {p_nt}",
            perms.len()
        ))
    };

    if let Some(expected) = expected {
        for source in &tuples {
            let mut histogram = vec![0u64; tuples.len()];
            for g in perms {
                let image: Vec<u32> = source.iter().map(|&s| g[s as usize - 1]).collect();
                histogram[rank[image.as_slice()]] += 1;
            }
            pairs_checked += tuples.len() as u64;
            if first_violation.is_none() {
                if let Some(bad) = histogram.iter().position(|&c| c != expected) {
                    first_violation = Some(format!(
                        "tuple {:?} maps to {:?} {} times, expected {expected}",
                        source, tuples[bad], histogram[bad]
                    ));
                }
            }
        }
    }

    Ok(TwiseReport {
        pass: first_violation.is_none(),
        perms: perms.len() as u64,
        order: t,
        divisible,
        expected,
        pairs_checked,
        first_violation,
    })
}

/// A finite group (or any closed list of permutations) acting on points
/// `1..=points` through explicit image tables.
#[derive(Clone, Debug)]
pub struct GroupAction {
    points: usize,
    tables: Vec<Vec<u32>>,
}

impl GroupAction {
    /// Validates that every table is a bijection of the point set.
    pub fn new(points: usize, tables: Vec<Vec<u32>>) -> Result<Self> {
        if points == 0 {
            return Err(Error::invalid("action needs at least one point"));
        }
        if tables.is_empty() {
            return Err(Error::EmptySet("action tables"));
        }
        for t in &tables {
            validate_permutation(points, t)?;
        }
        Ok(GroupAction { points, tables })
    }

    /// The natural action of permutations of `1..=n` on themselves.
    pub fn from_permutations(perms: &[Vec<u32>]) -> Result<Self> {
        let n = perms.first().map_or(0, Vec::len);
        Self::new(n, perms.to_vec())
    }

    #[must_use]
    pub fn points(&self) -> usize {
        self.points
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.tables.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    #[must_use]
    pub fn tables(&self) -> &[Vec<u32>] {
        &self.tables
    }
}

/// Result of [`verify_x_uniform`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XUniformReport {
    /// `|X|·#{g ∈ T : g(x) = y} = |T|` for every point pair `(x, y)`.
    pub pass: bool,
    pub subset_size: u64,
    pub pairs_checked: u64,
    pub first_violation: Option<String>,
}

/// Checks 1-point uniformity of a subset of an action: each point must land
/// on every point equally often. The identity is cross-multiplied
/// (`|X|·count = |T|`), so no divisibility precondition is needed.
pub fn verify_x_uniform(action: &GroupAction, subset: &[usize]) -> Result<XUniformReport> {
    if subset.is_empty() {
        return Err(Error::EmptySet("subset of the action"));
    }
    for &i in subset {
        if i >= action.len() {
            return Err(Error::invalid(format!(
                "subset index {i} out of range for {} elements",
                action.len()
            )));
        }
    }
    let x = action.points() as u64;
    let t_size = subset.len() as u64;
    let mut pairs_checked = 0u64;
    let mut first_violation = None;
    for from in 1..=action.points() as u32 {
        let mut counts = vec![0u64; action.points()];
        for &i in subset {
            let to = action.tables[i][from as usize - 1];
            counts[to as usize - 1] += 1;
        }
        pairs_checked += action.points() as u64;
        if first_violation.is_none() {
            if let Some(bad) = counts.iter().position(|&c| x * c != t_size) {
                first_violation = Some(format!(
                    "point {from} lands on {} {} times; |X|·count ≠ |T| = {t_size}",
                    bad + 1,
                    counts[bad]
                ));
            }
        }
    }
    Ok(XUniformReport {
        pass: first_violation.is_none(),
        subset_size: t_size,
        pairs_checked,
        first_violation,
    })
}

/// True when the list is closed under composition (hence a group, as finite
/// closed subsets of `S_n` are). Quadratic in the list length.
#[must_use]
pub fn is_closed_under_composition(perms: &[Vec<u32>]) -> bool {
    let set: BTreeSet<&[u32]> = perms.iter().map(Vec::as_slice).collect();
    for g in perms {
        for h in perms {
            // (g∘h)(x) = g(h(x))
            let composed: Vec<u32> = (0..g.len()).map(|x| g[h[x] as usize - 1]).collect();
            if !set.contains(composed.as_slice()) {
                return false;
            }
        }
    }
    true
}

/// The cyclic group of rotations of `1..=n`: `n` permutations, sharply
/// 1-wise uniform.
pub fn cyclic_group(n: u32) -> Result<Vec<Vec<u32>>> {
    if n == 0 {
        return Err(Error::invalid("cyclic group needs n ≥ 1"));
    }
    let mut out = Vec::with_capacity(n as usize);
    for shift in 0..n {
        out.push((0..n).map(|i| (i + shift) % n + 1).collect());
    }
    Ok(out)
}

/// The affine group `x ↦ ax + b` over `GF(q)` acting on the `q` field
/// elements (point `e+1` is field element `e`): `q(q-1)` permutations,
/// sharply 2-wise uniform.
pub fn affine_group(q: u32) -> Result<Vec<Vec<u32>>> {
    let field = GaloisField::new(q)?;
    let mut out = Vec::new();
    for a in 1..q {
        for b in 0..q {
            out.push(
                (0..q)
                    .map(|x| field.add(field.mul(a, x), b) + 1)
                    .collect(),
            );
        }
    }
    Ok(out)
}

/// The Möbius maps `x ↦ (ax+b)/(cx+d)` over the projective line
/// `GF(q) ∪ {∞}`: points `1..=q` are the field elements, point `q+1` is `∞`.
///
/// With `unit_determinant` the matrices range over `ad - bc = 1` (the
/// projective special linear group); otherwise over all invertible matrices
/// (the full projective general linear group, sharply 3-wise uniform with
/// `(q+1)q(q-1)` elements).
pub fn moebius_group(q: u32, unit_determinant: bool) -> Result<Vec<Vec<u32>>> {
    let field = GaloisField::new(q)?;
    let infinity = q; // 0-based point code for ∞
    let mut seen: BTreeSet<Vec<u32>> = BTreeSet::new();
    for a in 0..q {
        for b in 0..q {
            for c in 0..q {
                for d in 0..q {
                    let det = field.sub(field.mul(a, d), field.mul(b, c));
                    let keep = if unit_determinant {
                        det == 1
                    } else {
                        det != 0
                    };
                    if !keep {
                        continue;
                    }
                    let table: Vec<u32> = (0..=q)
                        .map(|x| {
                            let image = if x == infinity {
                                // image of ∞ is a/c (or ∞ when c = 0)
                                if c == 0 {
                                    infinity
                                } else {
                                    field.mul(a, field.inv(c))
                                }
                            } else {
                                let denom = field.add(field.mul(c, x), d);
                                if denom == 0 {
                                    infinity
                                } else {
                                    field.mul(field.add(field.mul(a, x), b), field.inv(denom))
                                }
                            };
                            image + 1
                        })
                        .collect();
                    seen.insert(table);
                }
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// Parameters of the spanning permutation instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PermParams {
    pub n: u32,
    pub t: u32,
}

impl PermParams {
    pub fn new(n: u32, t: u32) -> Result<Self> {
        if n == 0 || t == 0 || t > n {
            return Err(Error::invalid(format!(
                "orders must satisfy 1 ≤ t ≤ n, got n={n}, t={t}"
            )));
        }
        if n > 20 {
            return Err(Error::invalid("n! overflows u64 beyond n = 20"));
        }
        Ok(PermParams { n, t })
    }

    /// `|B| = n!`.
    #[must_use]
    pub fn size(&self) -> u64 {
        (1..=self.n as u64).product()
    }
}

impl std::fmt::Display for PermParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "perm(n={}, t={})", self.n, self.t)
    }
}

struct PermGround {
    params: PermParams,
    size: u64,
    /// tuple pairs (source, image) in lexicographic pair order
    pairs: Vec<(Vec<u32>, Vec<u32>)>,
}

impl GroundSet for PermGround {
    fn family(&self) -> Family {
        Family::Perm
    }

    fn size(&self) -> u64 {
        self.size
    }

    fn dim(&self) -> usize {
        self.pairs.len()
    }

    fn elements(&self) -> ElementIter<'_> {
        let n = self.params.n as u64;
        Box::new((0..self.size).map(move |rank| {
            let perm = util::permutation_unrank(n, rank as u128).expect("rank < n!");
            ElementKey::Perm(perm.iter().map(|&p| p as u32 + 1).collect())
        }))
    }

    fn element_at(&self, index: u64) -> Option<ElementKey> {
        let perm = util::permutation_unrank(self.params.n as u64, index as u128)?;
        Some(ElementKey::Perm(perm.iter().map(|&p| p as u32 + 1).collect()))
    }

    fn contains(&self, key: &ElementKey) -> bool {
        matches!(
            key,
            ElementKey::Perm(p) if validate_permutation(self.params.n as usize, p).is_ok()
        )
    }

    fn phi(&self, key: &ElementKey) -> Option<PhiVector> {
        let ElementKey::Perm(images) = key else {
            return None;
        };
        validate_permutation(self.params.n as usize, images).ok()?;
        let mut entries = vec![BigInt::zero(); self.pairs.len()];
        for (slot, (source, target)) in self.pairs.iter().enumerate() {
            let hits = source
                .iter()
                .zip(target)
                .all(|(&s, &r)| images[s as usize - 1] == r);
            if hits {
                entries[slot] = BigInt::one();
            }
        }
        Some(PhiVector::from_vec(entries))
    }

    fn index_label(&self, index: usize) -> String {
        let (s, r) = &self.pairs[index];
        let fmt_tuple = |t: &[u32]| {
            let parts: Vec<String> = t.iter().map(|x| x.to_string()).collect();
            format!("({})", parts.join(","))
        };
        format!("({}→{})", fmt_tuple(s), fmt_tuple(r))
    }

    fn constant_combination(&self) -> Vec<BigRational> {
        // the lex-first source tuple (1,…,t) matches exactly one image per
        // permutation, so summing its indicators gives the constant 1
        let first: Vec<u32> = (1..=self.params.t).collect();
        self.pairs
            .iter()
            .map(|(s, _)| {
                if *s == first {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            })
            .collect()
    }

    fn describe(&self) -> String {
        self.params.to_string()
    }

    fn verification_only(&self) -> bool {
        // the tuple-pair indicators are a spanning set, not a basis: linear
        // dependencies rule out the isolation construction
        true
    }
}

/// Builds the spanning framework instance over `S_n` whose exact counting
/// identity is `t`-wise uniformity. Verification-only: the index set spans
/// but is not a basis.
pub fn spanning_instance(params: &PermParams) -> Result<Instance> {
    let tuples = distinct_tuples(params.n, params.t);
    let mut pairs = Vec::with_capacity(tuples.len() * tuples.len());
    for s in &tuples {
        for r in &tuples {
            pairs.push((s.clone(), r.clone()));
        }
    }
    let p_nt = falling(params.n as u64, params.t as u64);
    let size = params.size();
    // minimal divisor: n!/(n-t)! = P(n,t); ‖φ(g)‖² = P(n,t) for every g
    let c1_sq = BigInt::from(p_nt);
    let constants = FrameworkConstants::from_exact(
        1,
        p_nt,
        c1_sq,
        BigInt::one(),
        BigInt::one(),
    )?;
    let ground = PermGround {
        params: *params,
        size,
        pairs,
    };
    Instance::new(Arc::new(ground), constants)
}
