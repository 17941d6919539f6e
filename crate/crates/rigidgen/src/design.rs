//! Block designs: the ground set of all `k`-subsets of `[v]` under
//! `t`-coverage counting.
//!
//! The index set `A` is the family of `t`-subsets of the point set; the
//! evaluation `φ_a(b) = [a ⊆ b]` counts containment. A subset `T` of blocks
//! satisfies the exact counting identity precisely when it is a
//! `t-(v, k, λ)` design with `λ = |T|·C(k,t)/C(v,t)` — the replication
//! number is *determined* by the block count, never chosen.
//!
//! Every block contains exactly `C(k,t)` of the `t`-subsets, so the constant
//! function is the uniform combination `(1/C(k,t))·Σ_a φ_a`, and the squared
//! evaluation norm is the same `C(k,t)` for every block.
//!
//! Isolation vectors target one `t`-subset `a` at a time using a disjoint
//! `k`-set `x` of helper points: [`delta`] collects the blocks inside
//! `a ∪ x` stratified by `|b ∩ a|`, and [`gamma`] combines the strata with
//! alternating factorial weights so that every `t`-subset other than `a`
//! cancels. The cancellation rests on the alternating binomial identity
//! exposed as [`binomial_alternating_sum`].

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::framework::{
    ElementIter, ElementKey, Family, FrameworkConstants, GreedyConfig, GroundSet, Instance,
    IsolationFamily, PhiVector, SparseDomainVector, SymmetryWitness,
};
use crate::linalg::RationalMatrix;
use crate::util;

/// Parameters of a design instance: point count `v`, block size `k`,
/// coverage order `t`, with `1 ≤ t ≤ k ≤ v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DesignParams {
    pub v: u32,
    pub k: u32,
    pub t: u32,
}

impl DesignParams {
    pub fn new(v: u32, k: u32, t: u32) -> Result<Self> {
        if t == 0 {
            return Err(Error::invalid("coverage order t must be ≥ 1"));
        }
        if t > k || k > v {
            return Err(Error::invalid(format!(
                "parameters must satisfy 1 ≤ t ≤ k ≤ v, got t={t}, k={k}, v={v}"
            )));
        }
        let params = DesignParams { v, k, t };
        params.size()?;
        Ok(params)
    }

    /// `|B| = C(v,k)`.
    pub fn size(&self) -> Result<u64> {
        util::binomial_big(self.v as u64, self.k as u64)
            .to_u64()
            .ok_or_else(|| Error::invalid(format!("C(v,k) overflows u64 for {self}")))
    }

    /// `|A| = C(v,t)`.
    #[must_use]
    pub fn index_count(&self) -> BigInt {
        util::binomial_big(self.v as u64, self.t as u64)
    }

    /// The exact structural constants: `m = k·(k-1)⋯(k-t+1)`, `c0 = C(v,t)`,
    /// `c1² = v^t`, `c2 = (vk)^{2t}`, `c3² = (2k)^{3t}`.
    pub fn constants(&self) -> Result<FrameworkConstants> {
        let m = util::falling_factorial_big(self.k as u64, self.t as u64)
            .to_u64()
            .ok_or_else(|| Error::invalid(format!("m overflows u64 for {self}")))?;
        let c0 = util::binomial_big(self.v as u64, self.t as u64)
            .to_u64()
            .ok_or_else(|| Error::invalid(format!("c0 overflows u64 for {self}")))?;
        let c1_sq = BigInt::from(self.v).pow(self.t);
        let c2 = BigInt::from(self.v as u64 * self.k as u64).pow(2 * self.t);
        let c3_sq = BigInt::from(2 * self.k as u64).pow(3 * self.t);
        FrameworkConstants::from_exact(m, c0, c1_sq, c2, c3_sq)
    }

    /// Whether the isolation construction applies: it needs `k > 2t` so
    /// helper sets can be packed with intersections of size `≤ k-2t-1`.
    #[must_use]
    pub fn isolation_supported(&self) -> bool {
        self.k > 2 * self.t
    }

    /// The replication number forced by a block count:
    /// `λ = blocks·C(k,t)/C(v,t)`, returned when integral.
    #[must_use]
    pub fn lambda_for(&self, blocks: u64) -> Option<u64> {
        let num = BigInt::from(blocks) * util::binomial_big(self.k as u64, self.t as u64);
        let den = util::binomial_big(self.v as u64, self.t as u64);
        let (quot, rem) = num.div_rem(&den);
        if rem.is_zero() {
            quot.to_u64()
        } else {
            None
        }
    }
}

impl fmt::Display for DesignParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "design(v={}, k={}, t={})", self.v, self.k, self.t)
    }
}

/// The canonical ordering of `A`: all `t`-subsets of `[v]`, lexicographic,
/// 1-based points.
pub fn canonical_tsets(params: &DesignParams) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut combo: Vec<u64> = (0..params.t as u64).collect();
    loop {
        out.push(combo.iter().map(|&p| p as u32 + 1).collect());
        if !util::combination_next(params.v as u64, &mut combo) {
            break;
        }
    }
    out
}

fn set_label(points: &[u32]) -> String {
    let parts: Vec<String> = points.iter().map(|p| p.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

struct DesignGround {
    params: DesignParams,
    size: u64,
    tsets: Vec<Vec<u32>>,
}

impl DesignGround {
    fn new(params: DesignParams) -> Result<Self> {
        let size = params.size()?;
        let tsets = canonical_tsets(&params);
        Ok(DesignGround {
            params,
            size,
            tsets,
        })
    }

    fn block_is_valid(&self, block: &[u32]) -> bool {
        block.len() == self.params.k as usize
            && block.iter().all(|&p| p >= 1 && p <= self.params.v)
            && block.windows(2).all(|w| w[0] < w[1])
    }
}

impl GroundSet for DesignGround {
    fn family(&self) -> Family {
        Family::Design
    }

    fn size(&self) -> u64 {
        self.size
    }

    fn dim(&self) -> usize {
        self.tsets.len()
    }

    fn elements(&self) -> ElementIter<'_> {
        let (v, k) = (self.params.v as u64, self.params.k as u64);
        Box::new((0..self.size).map(move |rank| {
            let combo = util::combination_unrank(v, k, rank as u128)
                .expect("rank < C(v,k) by construction");
            ElementKey::Block(combo.iter().map(|&p| p as u32 + 1).collect())
        }))
    }

    fn element_at(&self, index: u64) -> Option<ElementKey> {
        let combo = util::combination_unrank(
            self.params.v as u64,
            self.params.k as u64,
            index as u128,
        )?;
        Some(ElementKey::Block(
            combo.iter().map(|&p| p as u32 + 1).collect(),
        ))
    }

    fn contains(&self, key: &ElementKey) -> bool {
        matches!(key, ElementKey::Block(b) if self.block_is_valid(b))
    }

    fn phi(&self, key: &ElementKey) -> Option<PhiVector> {
        let ElementKey::Block(block) = key else {
            return None;
        };
        if !self.block_is_valid(block) {
            return None;
        }
        let mut entries = vec![BigInt::zero(); self.tsets.len()];
        for (slot, tset) in self.tsets.iter().enumerate() {
            if tset.iter().all(|p| block.binary_search(p).is_ok()) {
                entries[slot] = BigInt::one();
            }
        }
        Some(PhiVector::from_vec(entries))
    }

    fn index_label(&self, index: usize) -> String {
        set_label(&self.tsets[index])
    }

    fn constant_combination(&self) -> Vec<BigRational> {
        // every block contains exactly C(k,t) of the t-subsets
        let contained = util::binomial_big(self.params.k as u64, self.params.t as u64);
        let weight = BigRational::new(BigInt::one(), contained);
        vec![weight; self.tsets.len()]
    }

    fn describe(&self) -> String {
        self.params.to_string()
    }

    fn verification_only(&self) -> bool {
        !self.params.isolation_supported()
    }

    fn isolation_family(&self, index: usize, cfg: &GreedyConfig) -> Result<IsolationFamily> {
        if !self.params.isolation_supported() {
            return Err(Error::IsolationUnsupported {
                family: "design",
                note: format!(
                    "needs k > 2t for disjoint helper packing, got k={}, t={}",
                    self.params.k, self.params.t
                ),
            });
        }
        build_isolation_family(&self.params, &self.tsets, index, cfg)
    }
}

/// Builds the framework instance for `params`.
pub fn instance(params: &DesignParams) -> Result<Instance> {
    let constants = params.constants()?;
    let ground = DesignGround::new(*params)?;
    Instance::new(Arc::new(ground), constants)
}

/// The stratum vector `δ_{x,a,j}`: the unsigned sum of every block drawn
/// from `a ∪ x` that meets `a` in exactly `j` points (and fills up from the
/// helper set `x`, a `k`-set disjoint from `a`). Its support size is
/// `C(t,j)·C(k,k-j)`.
pub fn delta(params: &DesignParams, x: &[u32], a: &[u32], j: u32) -> Result<SparseDomainVector> {
    validate_tset(params, a)?;
    validate_helper(params, x, a)?;
    if j > params.t {
        return Err(Error::invalid(format!("stratum j={j} exceeds t={}", params.t)));
    }
    let need_from_x = params.k - j;
    let mut out = SparseDomainVector::new();
    for_each_subset(a, j as usize, &mut |from_a| {
        for_each_subset(x, need_from_x as usize, &mut |from_x| {
            let mut block: Vec<u32> = from_a.iter().chain(from_x.iter()).copied().collect();
            block.sort_unstable();
            out.add_term(ElementKey::Block(block), BigInt::one());
        });
    });
    Ok(out)
}

/// The isolation vector `γ_{x,a}` for a `t`-subset `a` and a disjoint
/// helper `k`-set `x`:
///
/// `γ = Σ_j (-1)^{t-j} · j!·(k-j-1)!/(k-t-1)! · δ_{x,a,j}`.
///
/// The weights are integers (the quotient is a falling factorial), and the
/// combination satisfies `φ(γ) = m·e_a` with `m = k·(k-1)⋯(k-t+1)`: every
/// other `t`-subset's coverage telescopes to zero through
/// [`binomial_alternating_sum`]. Requires `k ≥ t+1`.
pub fn gamma(params: &DesignParams, x: &[u32], a: &[u32]) -> Result<SparseDomainVector> {
    validate_tset(params, a)?;
    validate_helper(params, x, a)?;
    if params.k < params.t + 1 {
        return Err(Error::invalid(format!(
            "γ needs k ≥ t+1, got k={}, t={}",
            params.k, params.t
        )));
    }
    let (k, t) = (params.k as u64, params.t as u64);
    let mut out = SparseDomainVector::new();
    for j in 0..=params.t {
        // j!·(k-j-1)!/(k-t-1)! = j! · (k-j-1)·(k-j-2)⋯(k-t)
        let mut weight = util::falling_factorial_big(k - j as u64 - 1, t - j as u64);
        for f in 2..=j as u64 {
            weight *= BigInt::from(f);
        }
        if (params.t - j) % 2 == 1 {
            weight = -weight;
        }
        let stratum = delta(params, x, a, j)?;
        out.add_scaled(&weight, &stratum);
    }
    Ok(out)
}

/// `Σ_{i=0}^{a} (-1)^i·C(a,i)·C(c+i,b)` — the alternating sum behind the
/// stratum cancellation. It vanishes whenever `a > b ≥ 0`: the summand is a
/// degree-`b` polynomial in `i`, annihilated by the `a`-th finite
/// difference.
#[must_use]
pub fn binomial_alternating_sum(a: u64, b: u64, c: u64) -> BigInt {
    let mut acc = BigInt::zero();
    for i in 0..=a {
        let term = util::binomial_big(a, i) * util::binomial_big(c + i, b);
        if i % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// The symmetry witness induced by a point permutation `σ` of `[v]` (given
/// as 1-based images): blocks map by relabeling, and `τ` is the permutation
/// matrix sending coordinate `σ^{-1}(a)` to coordinate `a`.
///
/// The symmetric group acts transitively on blocks, which is the symmetry
/// the framework requires of this family.
pub fn point_permutation_witness(
    params: &DesignParams,
    images: &[u32],
) -> Result<SymmetryWitness> {
    let v = params.v as usize;
    if images.len() != v {
        return Err(Error::invalid(format!(
            "permutation has {} images, expected v = {v}",
            images.len()
        )));
    }
    let mut seen = vec![false; v];
    for &img in images {
        if img < 1 || img as usize > v || seen[img as usize - 1] {
            return Err(Error::invalid("images must be a bijection of 1..=v"));
        }
        seen[img as usize - 1] = true;
    }

    let tsets = canonical_tsets(params);
    let lookup: HashMap<Vec<u32>, usize> = tsets
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();
    // φ_a(σ(b)) = [σ^{-1}(a) ⊆ b], so row a points at column σ^{-1}(a)
    let mut inverse = vec![0u32; v];
    for (from, &to) in images.iter().enumerate() {
        inverse[to as usize - 1] = from as u32 + 1;
    }
    let mut rows = Vec::with_capacity(tsets.len());
    for tset in &tsets {
        let mut preimage: Vec<u32> = tset.iter().map(|&p| inverse[p as usize - 1]).collect();
        preimage.sort_unstable();
        let col = lookup[&preimage];
        let mut row = vec![BigRational::zero(); tsets.len()];
        row[col] = BigRational::one();
        rows.push(row);
    }
    let tau = RationalMatrix::from_rows(rows)?;

    let images_owned = images.to_vec();
    let k = params.k as usize;
    let map = move |key: &ElementKey| -> Option<ElementKey> {
        let ElementKey::Block(b) = key else {
            return None;
        };
        if b.len() != k || b.iter().any(|&p| p < 1 || p as usize > images_owned.len()) {
            return None;
        }
        let mut image: Vec<u32> = b
            .iter()
            .map(|&p| images_owned[p as usize - 1])
            .collect();
        image.sort_unstable();
        Some(ElementKey::Block(image))
    };
    Ok(SymmetryWitness::new(Arc::new(map), tau))
}

/// Result of [`verify_design`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DesignVerifyReport {
    /// Every `t`-subset is covered by the same number of blocks.
    pub pass: bool,
    pub blocks: u64,
    pub order: u32,
    /// The forced replication number, when integral.
    pub lambda: Option<u64>,
    /// `C(v,t)` divides `blocks·C(k,t)` (necessary for uniform coverage).
    pub divisible: bool,
    pub tsets_checked: u64,
    pub first_violation: Option<String>,
}

/// Checks the combinatorial design property directly: every `t`-subset of
/// the points is contained in equally many blocks. The replication number
/// is computed from the block count, never taken as input.
///
/// Accepts multisets (repeated blocks count with multiplicity). On subsets
/// of the ground set this agrees exactly with the framework's
/// `verify_solution`.
pub fn verify_design(params: &DesignParams, blocks: &[Vec<u32>]) -> Result<DesignVerifyReport> {
    if blocks.is_empty() {
        return Err(Error::EmptySet("design blocks"));
    }
    for (i, block) in blocks.iter().enumerate() {
        if block.len() != params.k as usize {
            return Err(Error::invalid(format!(
                "block {} has size {}, expected k = {}",
                i + 1,
                block.len(),
                params.k
            )));
        }
        if block.iter().any(|&p| p < 1 || p > params.v) {
            return Err(Error::invalid(format!(
                "block {} contains a point outside 1..={}",
                i + 1,
                params.v
            )));
        }
        if block.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!(
                "block {} must be strictly increasing",
                i + 1
            )));
        }
    }

    let lambda = params.lambda_for(blocks.len() as u64);
    let divisible = lambda.is_some();
    let tsets = canonical_tsets(params);
    let mut first_violation = if divisible {
        None
    } else {
        Some(format!(
            "block count {} forces a non-integral replication number",
            blocks.len()
        ))
    };

    if let Some(lambda) = lambda {
        for tset in &tsets {
            let count = blocks
                .iter()
                .filter(|b| tset.iter().all(|p| b.binary_search(p).is_ok()))
                .count() as u64;
            if count != lambda && first_violation.is_none() {
                first_violation = Some(format!(
                    "t-subset {} is covered {count} times, expected λ = {lambda}",
                    set_label(tset)
                ));
            }
        }
    }

    Ok(DesignVerifyReport {
        pass: first_violation.is_none(),
        blocks: blocks.len() as u64,
        order: params.t,
        lambda,
        divisible,
        tsets_checked: tsets.len() as u64,
        first_violation,
    })
}

fn build_isolation_family(
    params: &DesignParams,
    tsets: &[Vec<u32>],
    index: usize,
    cfg: &GreedyConfig,
) -> Result<IsolationFamily> {
    let a = &tsets[index];
    let outside: Vec<u32> = (1..=params.v)
        .filter(|p| !a.contains(p))
        .collect();
    let k = params.k as usize;
    let m = util::falling_factorial_big(params.k as u64, params.t as u64)
        .to_u64()
        .expect("validated in constants()");

    // helper sets are k-subsets of the points outside a; none exist when
    // v < k + t, and the condition is then vacuous (r = 0)
    if outside.len() < k {
        return Ok(IsolationFamily {
            target_index: index,
            target_label: set_label(a),
            modulus: m,
            vectors: vec![],
            complete: true,
        });
    }

    let total = util::binomial_big(outside.len() as u64, k as u64)
        .to_u64()
        .ok_or_else(|| Error::invalid("candidate count overflows u64"))?;
    let sweep = total.min(cfg.max_candidates);
    let complete = sweep == total;
    let offset = match cfg.seed {
        None => 0,
        Some(seed) => {
            let mut state = seed;
            util::splitmix64(&mut state) % total.max(1)
        }
    };

    let max_overlap = (params.k - 2 * params.t - 1) as usize;
    let mut accepted: Vec<Vec<u32>> = Vec::new();
    let mut vectors = Vec::new();
    for step in 0..sweep {
        let rank = (offset + step) % total;
        let combo = util::combination_unrank(outside.len() as u64, k as u64, rank as u128)
            .expect("rank < total");
        let x: Vec<u32> = combo.iter().map(|&i| outside[i as usize]).collect();
        let packs = accepted.iter().all(|prev| {
            let overlap = x
                .iter()
                .filter(|p| prev.binary_search(p).is_ok())
                .count();
            overlap <= max_overlap
        });
        if packs {
            vectors.push(gamma(params, &x, a)?);
            accepted.push(x);
        }
    }

    Ok(IsolationFamily {
        target_index: index,
        target_label: set_label(a),
        modulus: m,
        vectors,
        complete,
    })
}

/// Calls `f` with every `size`-subset of `items` (in lexicographic order).
fn for_each_subset(items: &[u32], size: usize, f: &mut impl FnMut(&[u32])) {
    if size > items.len() {
        return;
    }
    if size == 0 {
        f(&[]);
        return;
    }
    let mut picks: Vec<u64> = (0..size as u64).collect();
    loop {
        let subset: Vec<u32> = picks.iter().map(|&i| items[i as usize]).collect();
        f(&subset);
        if !util::combination_next(items.len() as u64, &mut picks) {
            break;
        }
    }
}

fn validate_tset(params: &DesignParams, a: &[u32]) -> Result<()> {
    if a.len() != params.t as usize {
        return Err(Error::invalid(format!(
            "index set has size {}, expected t = {}",
            a.len(),
            params.t
        )));
    }
    if a.iter().any(|&p| p < 1 || p > params.v) || a.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(
            "t-subset must be strictly increasing within 1..=v",
        ));
    }
    Ok(())
}

fn validate_helper(params: &DesignParams, x: &[u32], a: &[u32]) -> Result<()> {
    if x.len() != params.k as usize {
        return Err(Error::invalid(format!(
            "helper set has size {}, expected k = {}",
            x.len(),
            params.k
        )));
    }
    if x.iter().any(|&p| p < 1 || p > params.v) || x.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(
            "helper set must be strictly increasing within 1..=v",
        ));
    }
    if x.iter().any(|p| a.contains(p)) {
        return Err(Error::invalid("helper set must be disjoint from the target"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framework::SymmetryMode;
    use std::collections::BTreeSet;

    fn block(points: &[u32]) -> ElementKey {
        ElementKey::Block(points.to_vec())
    }

    fn phi_of_combination(inst: &Instance, v: &SparseDomainVector) -> PhiVector {
        let mut acc = PhiVector::zeros(inst.dim());
        for (k, c) in v.iter() {
            acc.add_scaled(c, &inst.phi(k).unwrap());
        }
        acc
    }

    #[test]
    fn params_validation() {
        assert!(DesignParams::new(4, 3, 0).is_err());
        assert!(DesignParams::new(4, 5, 1).is_err());
        assert!(DesignParams::new(4, 3, 4).is_err());
        assert!(DesignParams::new(7, 3, 2).is_ok());
    }

    #[test]
    fn index_set_is_lexicographic() {
        let params = DesignParams::new(4, 3, 2).unwrap();
        let tsets = canonical_tsets(&params);
        assert_eq!(
            tsets,
            vec![
                vec![1, 2],
                vec![1, 3],
                vec![1, 4],
                vec![2, 3],
                vec![2, 4],
                vec![3, 4]
            ]
        );
        assert_eq!(BigInt::from(tsets.len()), params.index_count());
    }

    #[test]
    fn elements_enumerate_blocks_in_lex_order() {
        let params = DesignParams::new(4, 2, 1).unwrap();
        let inst = instance(&params).unwrap();
        let all: Vec<ElementKey> = inst.elements().collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], block(&[1, 2]));
        assert_eq!(all[1], block(&[1, 3]));
        assert_eq!(all[5], block(&[3, 4]));
        for (rank, key) in all.iter().enumerate() {
            assert_eq!(inst.element_at(rank as u64).as_ref(), Some(key));
        }
        assert!(!inst.contains(&block(&[2, 1])), "unsorted");
        assert!(!inst.contains(&block(&[1, 5])), "out of range");
    }

    #[test]
    fn phi_counts_containment() {
        let params = DesignParams::new(4, 2, 1).unwrap();
        let inst = instance(&params).unwrap();
        let phi = inst.phi(&block(&[1, 3])).unwrap();
        let expect: Vec<BigInt> = [1, 0, 1, 0].iter().map(|&x| BigInt::from(x)).collect();
        assert_eq!(phi.entries(), &expect[..]);
    }

    #[test]
    fn phi_total_is_constant_across_indices() {
        for (v, k, t) in [(4, 3, 1), (5, 3, 2), (6, 4, 2), (7, 3, 2)] {
            let params = DesignParams::new(v, k, t).unwrap();
            let inst = instance(&params).unwrap();
            let total = inst.phi_total().unwrap();
            let expect = util::binomial_big((v - t) as u64, (k - t) as u64);
            for slot in 0..inst.dim() {
                assert_eq!(total.get(slot), &expect, "{params} at slot {slot}");
            }
        }
    }

    #[test]
    fn boundedness_max_is_blocks_own_coverage() {
        // each block contains exactly C(k,t) t-subsets, so the squared norm
        // is the same for every element
        for (v, k, t) in [(4, 3, 1), (6, 4, 2), (8, 5, 2)] {
            let params = DesignParams::new(v, k, t).unwrap();
            let inst = instance(&params).unwrap();
            let report = inst.check_boundedness().unwrap();
            let expect = util::binomial_big(k as u64, t as u64);
            assert_eq!(report.max_norm_sq, expect, "{params}");
            assert!(report.within_bound, "{params}: C(k,t) ≤ v^t must hold");
        }
    }

    #[test]
    fn divisibility_minimal_divides_declared() {
        for (v, k, t) in [(4, 3, 1), (6, 3, 1), (7, 3, 2)] {
            let params = DesignParams::new(v, k, t).unwrap();
            let inst = instance(&params).unwrap();
            let report = inst.check_divisibility().unwrap();
            assert!(report.minimal_divides_declared, "{params}: {report:?}");
        }
    }

    #[test]
    fn lambda_is_computed_not_chosen() {
        let params = DesignParams::new(7, 3, 2).unwrap();
        assert_eq!(params.lambda_for(7), Some(1));
        assert_eq!(params.lambda_for(14), Some(2));
        assert_eq!(params.lambda_for(8), None);
        let params = DesignParams::new(6, 3, 1).unwrap();
        // λ = blocks·C(3,1)/C(6,1) = blocks/2
        assert_eq!(params.lambda_for(10), Some(5));
        assert_eq!(params.lambda_for(9), None);
    }

    #[test]
    fn delta_strata_have_predicted_sizes() {
        let params = DesignParams::new(8, 3, 1).unwrap();
        let a = [1u32];
        let x = [2u32, 4, 6];
        for j in 0..=params.t {
            let d = delta(&params, &x, &a, j).unwrap();
            let expect = util::binomial_big(params.t as u64, j as u64)
                * util::binomial_big(params.k as u64, (params.k - j) as u64);
            assert_eq!(BigInt::from(d.support_len() as u64), expect, "stratum {j}");
        }
    }

    #[test]
    fn gamma_matches_worked_example() {
        // v=4, k=3, t=1, a={1}, x={2,3,4}:
        // γ = -2·e{2,3,4} + e{1,2,3} + e{1,2,4} + e{1,3,4}, φ(γ) = 3·e_{1}
        let params = DesignParams::new(4, 3, 1).unwrap();
        let g = gamma(&params, &[2, 3, 4], &[1]).unwrap();
        assert_eq!(g.coeff(&block(&[2, 3, 4])), BigInt::from(-2));
        assert_eq!(g.coeff(&block(&[1, 2, 3])), BigInt::one());
        assert_eq!(g.coeff(&block(&[1, 2, 4])), BigInt::one());
        assert_eq!(g.coeff(&block(&[1, 3, 4])), BigInt::one());
        assert_eq!(g.support_len(), 4);
        assert_eq!(g.norm_sq(), BigInt::from(7));

        let inst = instance(&params).unwrap();
        let image = phi_of_combination(&inst, &g);
        assert_eq!(
            image,
            PhiVector::scaled_unit(inst.dim(), 0, BigInt::from(3))
        );
    }

    #[test]
    fn gamma_isolates_across_small_grid() {
        // all targets, all helper sets, exact φ(γ) = m·e_a and norm bound
        for (v, k, t) in [(4, 3, 1), (5, 3, 1), (6, 3, 1), (7, 5, 2)] {
            let params = DesignParams::new(v, k, t).unwrap();
            let inst = instance(&params).unwrap();
            let tsets = canonical_tsets(&params);
            let m = util::falling_factorial_big(k as u64, t as u64);
            let c3_sq = BigInt::from(2 * k as u64).pow(3 * t);
            for (slot, a) in tsets.iter().enumerate() {
                let outside: Vec<u32> = (1..=v).filter(|p| !a.contains(p)).collect();
                let mut helpers = Vec::new();
                for_each_subset(&outside, k as usize, &mut |x| helpers.push(x.to_vec()));
                for x in helpers {
                    let g = gamma(&params, &x, a).unwrap();
                    let image = phi_of_combination(&inst, &g);
                    let expect = PhiVector::scaled_unit(inst.dim(), slot, m.clone());
                    assert_eq!(image, expect, "{params}, a={a:?}, x={x:?}");
                    assert!(g.norm_sq() <= c3_sq, "{params}: ‖γ‖² too large");
                }
            }
        }
    }

    #[test]
    fn gamma_weights_are_integers_by_construction() {
        // the support coefficients of γ must all be integers with the
        // stratum structure: spot-check strata weights at larger k
        let params = DesignParams::new(12, 7, 3).unwrap();
        let a = [1u32, 2, 3];
        let x = [4u32, 5, 6, 7, 8, 9, 10];
        let g = gamma(&params, &x, &a).unwrap();
        // j = 0 weight: (k-1)!/(k-t-1)! = 6·5·4 = 120, sign (-1)^3
        assert_eq!(g.coeff(&block(&[4, 5, 6, 7, 8, 9, 10])), BigInt::from(-120));
        // j = t weight: t!·(k-t-1)!/(k-t-1)! = 6, sign +
        assert_eq!(g.coeff(&block(&[1, 2, 3, 4, 5, 6, 7])), BigInt::from(6));
    }

    #[test]
    fn alternating_binomial_sum_vanishes_above_degree() {
        for a in 1..=8u64 {
            for b in 0..a {
                for c in 0..=8u64 {
                    assert_eq!(
                        binomial_alternating_sum(a, b, c),
                        BigInt::zero(),
                        "a={a}, b={b}, c={c}"
                    );
                }
            }
        }
        // at a ≤ b the sum is generally nonzero
        assert_eq!(binomial_alternating_sum(1, 1, 3), BigInt::from(-1));
        assert_eq!(binomial_alternating_sum(0, 2, 3), BigInt::from(3));
    }

    #[test]
    fn point_permutations_verify_and_permute_tau() {
        let params = DesignParams::new(5, 3, 2).unwrap();
        let inst = instance(&params).unwrap();
        // swap 1↔2, fix the rest
        let witness = point_permutation_witness(&params, &[2, 1, 3, 4, 5]).unwrap();
        let report = inst
            .verify_symmetry(&witness, SymmetryMode::Exhaustive)
            .unwrap();
        assert!(report.pass, "{report:?}");
        assert_eq!(report.bijective, Some(true));
        // τ is a permutation matrix: every row and column sums to 1
        let dim = inst.dim();
        for r in 0..dim {
            let row_sum: BigRational = (0..dim).map(|c| witness.tau().get(r, c).clone()).sum();
            assert_eq!(row_sum, BigRational::one());
        }
        // blocks map by relabel-and-sort
        assert_eq!(
            witness.apply(&block(&[1, 3, 5])),
            Some(block(&[2, 3, 5]))
        );
    }

    #[test]
    fn permutation_witness_rejects_non_bijections() {
        let params = DesignParams::new(4, 2, 1).unwrap();
        assert!(point_permutation_witness(&params, &[1, 1, 3, 4]).is_err());
        assert!(point_permutation_witness(&params, &[1, 2, 3]).is_err());
        assert!(point_permutation_witness(&params, &[1, 2, 3, 5]).is_err());
    }

    #[test]
    fn verify_design_accepts_fano_plane() {
        let params = DesignParams::new(7, 3, 2).unwrap();
        let fano = vec![
            vec![1, 2, 3],
            vec![1, 4, 5],
            vec![1, 6, 7],
            vec![2, 4, 6],
            vec![2, 5, 7],
            vec![3, 4, 7],
            vec![3, 5, 6],
        ];
        let report = verify_design(&params, &fano).unwrap();
        assert!(report.pass, "{report:?}");
        assert_eq!(report.lambda, Some(1));

        // dropping a block breaks uniform coverage (and divisibility)
        let report = verify_design(&params, &fano[..6].to_vec()).unwrap();
        assert!(!report.pass);

        // swapping one point breaks coverage while count stays divisible
        let mut broken = fano.clone();
        broken[0] = vec![1, 2, 4];
        let report = verify_design(&params, &broken).unwrap();
        assert!(!report.pass);
        assert!(report.divisible);
        assert!(report.first_violation.unwrap().contains("covered"));
    }

    #[test]
    fn verify_design_accepts_complete_block_collection() {
        // all C(v,k) blocks always form a t-design
        let params = DesignParams::new(5, 3, 2).unwrap();
        let inst = instance(&params).unwrap();
        let all: Vec<Vec<u32>> = (0..inst.size())
            .map(|r| match inst.element_at(r).unwrap() {
                ElementKey::Block(b) => b,
                _ => unreachable!(),
            })
            .collect();
        let report = verify_design(&params, &all).unwrap();
        assert!(report.pass);
        assert_eq!(report.lambda, Some(3)); // C(3,2)·C(5,3)/C(5,2) = 3
    }

    #[test]
    fn verify_design_agrees_with_verify_solution_on_random_subsets() {
        use rand::seq::index::sample as index_sample;
        use rand::SeedableRng;
        let params = DesignParams::new(5, 2, 1).unwrap();
        let inst = instance(&params).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xde51);
        for trial in 0..100 {
            let take = 2 + (trial % 5) as usize;
            let picks = index_sample(&mut rng, inst.size() as usize, take);
            let blocks: Vec<Vec<u32>> = picks
                .iter()
                .map(|r| match inst.element_at(r as u64).unwrap() {
                    ElementKey::Block(b) => b,
                    _ => unreachable!(),
                })
                .collect();
            let direct = verify_design(&params, &blocks).unwrap().pass;
            let subset: BTreeSet<ElementKey> =
                blocks.iter().cloned().map(ElementKey::Block).collect();
            let framework = inst.verify_solution(&subset).unwrap().pass;
            assert_eq!(direct, framework, "trial {trial}: {blocks:?}");
        }
    }

    #[test]
    fn isolation_family_packs_disjoint_helpers() {
        let params = DesignParams::new(7, 3, 1).unwrap();
        let inst = instance(&params).unwrap();
        for index in 0..inst.dim() {
            let family = inst
                .isolation_family(index, &GreedyConfig::default())
                .unwrap();
            assert!(family.complete);
            assert_eq!(family.modulus, 3);
            let report = inst.verify_isolation_family(&family).unwrap();
            assert!(report.pass, "index {index}: {report:?}");
            assert!(report.meets_count_bound, "index {index}: {report:?}");
        }
    }

    #[test]
    fn isolation_unsupported_when_k_at_most_2t() {
        let params = DesignParams::new(5, 2, 1).unwrap();
        let inst = instance(&params).unwrap();
        assert!(inst.verification_only());
        assert!(matches!(
            inst.isolation_family(0, &GreedyConfig::default()),
            Err(Error::IsolationUnsupported { .. })
        ));
    }

    #[test]
    fn isolation_vacuous_when_no_disjoint_helper_exists() {
        // v = 6 < k + t = 7: no helper set fits outside the target
        let params = DesignParams::new(6, 5, 2).unwrap();
        assert!(params.isolation_supported());
        let inst = instance(&params).unwrap();
        let family = inst
            .isolation_family(0, &GreedyConfig::default())
            .unwrap();
        assert_eq!(family.count(), 0);
        assert!(family.complete);
        let report = inst.verify_isolation_family(&family).unwrap();
        assert!(report.pass, "empty family passes the per-vector bullets");
        assert!(!report.meets_count_bound, "but r = 0 < required");
    }
}
