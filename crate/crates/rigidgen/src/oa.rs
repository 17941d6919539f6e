//! Orthogonal arrays: the word ground set `[q]^n` under strength-`t`
//! counting.
//!
//! The ground set is every word of length `n` over symbols `1..=q`. The
//! index set `A` collects the pairs `(I, v)` where `I` is a coordinate set of
//! size at most `t` and `v` assigns a *reduced* symbol in `1..=q-1` to each
//! coordinate of `I`; `φ_{(I,v)}(b)` is the 0/1 indicator of `b|_I = v`.
//! Restricting values to `q-1` symbols keeps the indicators linearly
//! independent: the excluded symbol's indicator is recovered by
//! inclusion–exclusion (see [`expand_indicator`]), and the empty pair
//! `(∅, ∅)` contributes the constant function.
//!
//! A subset `T ⊆ [q]^n` satisfies the exact counting identity
//! `φ(T) = (|T|/q^n)·φ(B)` precisely when `T` is an orthogonal array of
//! strength `t`: every `t` columns contain every `t`-tuple of symbols
//! equally often. [`verify_oa`] checks that combinatorial statement
//! directly; the framework's `verify_solution` checks the linear-algebraic
//! one. They agree on every input.
//!
//! Isolation vectors come from signed differences [`delta`] and a
//! superset-correction recursion [`gamma`]; greedy packing of centers at
//! pairwise Hamming distance `≥ 2t+1` yields disjoint supports.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::framework::{
    ElementIter, ElementKey, Family, FrameworkConstants, GreedyConfig, GroundSet, Instance,
    IsolationFamily, PhiVector, SparseDomainVector, SymmetryWitness,
};
use crate::linalg::RationalMatrix;
use crate::util;

/// Parameters of an orthogonal-array instance: alphabet size `q ≥ 2`, word
/// length `n ≥ 1`, strength `1 ≤ t ≤ n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OaParams {
    pub q: u32,
    pub n: u32,
    pub t: u32,
}

impl OaParams {
    pub fn new(q: u32, n: u32, t: u32) -> Result<Self> {
        if q < 2 {
            return Err(Error::invalid(format!("alphabet size q={q} must be ≥ 2")));
        }
        if n == 0 {
            return Err(Error::invalid("word length n must be ≥ 1"));
        }
        if t == 0 || t > n {
            return Err(Error::invalid(format!(
                "strength t={t} must satisfy 1 ≤ t ≤ n={n}"
            )));
        }
        let params = OaParams { q, n, t };
        params.size()?; // reject sizes beyond u64
        Ok(params)
    }

    /// `|B| = q^n`.
    pub fn size(&self) -> Result<u64> {
        let mut acc: u64 = 1;
        for _ in 0..self.n {
            acc = acc.checked_mul(self.q as u64).ok_or_else(|| {
                Error::invalid(format!("q^n overflows u64 for q={}, n={}", self.q, self.n))
            })?;
        }
        Ok(acc)
    }

    /// `|A| = Σ_{i=0}^{t} C(n,i)·(q-1)^i`.
    #[must_use]
    pub fn index_count(&self) -> BigInt {
        let mut acc = BigInt::zero();
        for i in 0..=self.t {
            let choose = util::binomial_big(self.n as u64, i as u64);
            let vals = BigInt::from(self.q as u64 - 1).pow(i);
            acc += choose * vals;
        }
        acc
    }

    /// The exact structural constants for this family:
    /// `m = 1`, `c0 = q^t`, `c1² = (n+1)^t`, `c2 = q^t·n^{2t}`,
    /// `c3² = 8^t·n^{2t}`.
    pub fn constants(&self) -> Result<FrameworkConstants> {
        let q = BigInt::from(self.q);
        let n = BigInt::from(self.n);
        let t = self.t;
        let c0_big = q.pow(t);
        let c0 = u64::try_from(&c0_big)
            .map_err(|_| Error::invalid(format!("c0 = q^t overflows u64 for {self}")))?;
        let c1_sq = (n.clone() + BigInt::one()).pow(t);
        let n_2t = n.pow(2 * t);
        let c2 = c0_big * &n_2t;
        let c3_sq = BigInt::from(8).pow(t) * n_2t;
        FrameworkConstants::from_exact(1, c0, c1_sq, c2, c3_sq)
    }
}

impl fmt::Display for OaParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "oa(q={}, n={}, t={})", self.q, self.n, self.t)
    }
}

/// One basis index `(I, v)`: sorted 0-based coordinates and their required
/// symbols (each in `1..=q-1`).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OaIndex {
    pub coords: Vec<usize>,
    pub values: Vec<u32>,
}

impl OaIndex {
    /// Canonical label, with coordinates displayed 1-based.
    #[must_use]
    pub fn label(&self) -> String {
        if self.coords.is_empty() {
            return "(∅)".to_string();
        }
        let coords: Vec<String> = self.coords.iter().map(|c| (c + 1).to_string()).collect();
        let vals: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
        format!("({{{}}}=({}))", coords.join(","), vals.join(","))
    }
}

/// The canonical ordering of `A`: by `|I|`, then `I` lexicographically, then
/// `v` lexicographically. Index 0 is always `(∅, ∅)`.
pub fn canonical_indices(params: &OaParams) -> Vec<OaIndex> {
    let n = params.n as usize;
    let reduced = params.q - 1;
    let mut out = Vec::new();
    for size in 0..=(params.t as usize) {
        if size == 0 {
            out.push(OaIndex {
                coords: vec![],
                values: vec![],
            });
            continue;
        }
        let mut coords: Vec<u64> = (0..size as u64).collect();
        loop {
            // all value assignments in lexicographic (odometer) order
            let mut values = vec![1u32; size];
            loop {
                out.push(OaIndex {
                    coords: coords.iter().map(|&c| c as usize).collect(),
                    values: values.clone(),
                });
                // increment the value odometer, least significant last
                let mut pos = size;
                while pos > 0 {
                    pos -= 1;
                    if values[pos] < reduced {
                        values[pos] += 1;
                        for v in &mut values[pos + 1..] {
                            *v = 1;
                        }
                        break;
                    }
                    if pos == 0 {
                        values.clear();
                    }
                }
                if values.is_empty() {
                    break;
                }
            }
            if !util::combination_next(n as u64, &mut coords) {
                break;
            }
        }
    }
    out
}

struct OaGround {
    params: OaParams,
    size: u64,
    indices: Vec<OaIndex>,
    lookup: HashMap<OaIndex, usize>,
}

impl OaGround {
    fn new(params: OaParams) -> Result<Self> {
        let size = params.size()?;
        let indices = canonical_indices(&params);
        let lookup = indices
            .iter()
            .enumerate()
            .map(|(i, idx)| (idx.clone(), i))
            .collect();
        Ok(OaGround {
            params,
            size,
            indices,
            lookup,
        })
    }

    fn word_is_valid(&self, word: &[u32]) -> bool {
        word.len() == self.params.n as usize
            && word.iter().all(|&s| s >= 1 && s <= self.params.q)
    }
}

impl GroundSet for OaGround {
    fn family(&self) -> Family {
        Family::Oa
    }

    fn size(&self) -> u64 {
        self.size
    }

    fn dim(&self) -> usize {
        self.indices.len()
    }

    fn elements(&self) -> ElementIter<'_> {
        let params = self.params;
        Box::new((0..self.size).map(move |rank| ElementKey::Word(unrank_word(&params, rank))))
    }

    fn element_at(&self, index: u64) -> Option<ElementKey> {
        if index < self.size {
            Some(ElementKey::Word(unrank_word(&self.params, index)))
        } else {
            None
        }
    }

    fn contains(&self, key: &ElementKey) -> bool {
        matches!(key, ElementKey::Word(w) if self.word_is_valid(w))
    }

    fn phi(&self, key: &ElementKey) -> Option<PhiVector> {
        let ElementKey::Word(word) = key else {
            return None;
        };
        if !self.word_is_valid(word) {
            return None;
        }
        let mut entries = vec![BigInt::zero(); self.indices.len()];
        for (slot, idx) in self.indices.iter().enumerate() {
            let matches = idx
                .coords
                .iter()
                .zip(&idx.values)
                .all(|(&c, &v)| word[c] == v);
            if matches {
                entries[slot] = BigInt::one();
            }
        }
        Some(PhiVector::from_vec(entries))
    }

    fn index_label(&self, index: usize) -> String {
        self.indices[index].label()
    }

    fn constant_combination(&self) -> Vec<BigRational> {
        // φ_{(∅,∅)} ≡ 1 is itself the constant function.
        let mut comb = vec![BigRational::zero(); self.indices.len()];
        comb[0] = BigRational::one();
        comb
    }

    fn describe(&self) -> String {
        self.params.to_string()
    }

    fn isolation_family(&self, index: usize, cfg: &GreedyConfig) -> Result<IsolationFamily> {
        build_isolation_family(&self.params, &self.indices, &self.lookup, index, cfg)
    }
}

fn unrank_word(params: &OaParams, rank: u64) -> Vec<u32> {
    let n = params.n as usize;
    let q = params.q as u64;
    let mut word = vec![0u32; n];
    let mut rest = rank;
    for slot in (0..n).rev() {
        word[slot] = (rest % q) as u32 + 1;
        rest /= q;
    }
    word
}

/// Builds the framework instance for `params`.
pub fn instance(params: &OaParams) -> Result<Instance> {
    let constants = params.constants()?;
    let ground = OaGround::new(*params)?;
    Instance::new(Arc::new(ground), constants)
}

/// The signed difference vector `δ_{x,K}`: over all `J ⊆ K`, the word that
/// agrees with `x` on `J` and outside `K` but carries the excluded symbol
/// `q` on `K∖J`, signed by `(-1)^{|K|-|J|}`.
///
/// Its evaluation collapses to a single pattern:
/// `φ(δ_{x,K})_{(I,v)} = [K ⊆ I]·[x|_I = v]`. The vector is zero exactly
/// when `x` already carries symbol `q` somewhere on `K` (the terms cancel in
/// pairs), and otherwise has support of size exactly `2^{|K|}`.
pub fn delta(params: &OaParams, x: &[u32], k_set: &[usize]) -> Result<SparseDomainVector> {
    validate_word(params, x)?;
    validate_coords(params, k_set)?;
    let mut out = SparseDomainVector::new();
    let k = k_set.len();
    for mask in 0u32..(1 << k) {
        let mut word = x.to_vec();
        let mut dropped = 0u32;
        for (bit, &coord) in k_set.iter().enumerate() {
            if mask & (1 << bit) == 0 {
                word[coord] = params.q;
                dropped += 1;
            }
        }
        let sign = if dropped % 2 == 0 {
            BigInt::one()
        } else {
            -BigInt::one()
        };
        out.add_term(ElementKey::Word(word), sign);
    }
    Ok(out)
}

/// The isolation vector `γ_{x,I}` for a center `x` with `x|_I` free of the
/// excluded symbol: `δ_{x,I}` corrected by subtracting `γ_{x,K}` for every
/// strict superset `K ⊇ I` (within size `t`) on which `x` stays reduced.
///
/// Satisfies `φ(γ_{x,I}) = e_{(I, x|_I)}` exactly, with support contained in
/// the Hamming ball of radius `t` around `x`.
pub fn gamma(params: &OaParams, x: &[u32], i_set: &[usize]) -> Result<SparseDomainVector> {
    validate_word(params, x)?;
    validate_coords(params, i_set)?;
    for &c in i_set {
        if x[c] == params.q {
            return Err(Error::invalid(format!(
                "γ requires x to avoid symbol q on I; x[{}] = {}",
                c + 1,
                params.q
            )));
        }
    }
    let mut memo: BTreeMap<Vec<usize>, SparseDomainVector> = BTreeMap::new();
    Ok(gamma_memo(params, x, i_set.to_vec(), &mut memo))
}

fn gamma_memo(
    params: &OaParams,
    x: &[u32],
    i_set: Vec<usize>,
    memo: &mut BTreeMap<Vec<usize>, SparseDomainVector>,
) -> SparseDomainVector {
    if let Some(hit) = memo.get(&i_set) {
        return hit.clone();
    }
    let mut acc = delta(params, x, &i_set).expect("validated by caller");
    if (i_set.len() as u32) < params.t {
        // subtract γ_{x,K} for each reduced strict superset K, |K| ≤ t
        let candidates: Vec<usize> = (0..params.n as usize)
            .filter(|c| !i_set.contains(c) && x[*c] != params.q)
            .collect();
        let extra_max = (params.t as usize) - i_set.len();
        for take in 1..=extra_max.min(candidates.len()) {
            let mut picks: Vec<u64> = (0..take as u64).collect();
            loop {
                let mut k_set: Vec<usize> =
                    picks.iter().map(|&p| candidates[p as usize]).collect();
                k_set.extend_from_slice(&i_set);
                k_set.sort_unstable();
                let sub = gamma_memo(params, x, k_set, memo);
                acc.add_scaled(&-BigInt::one(), &sub);
                if !util::combination_next(candidates.len() as u64, &mut picks) {
                    break;
                }
            }
        }
    }
    memo.insert(i_set, acc.clone());
    acc
}

/// Expands the indicator `f_{(I,w)}` — where `w` may use the excluded symbol
/// `q` — into the reduced basis: returns canonical-index/coefficient pairs
/// with `f_{(I,w)}(b) = Σ coeff·φ_index(b)` for every word `b`.
///
/// The rewrite eliminates one excluded symbol at a time: summing an
/// indicator over all `q` symbols at a coordinate marginalizes that
/// coordinate away, so
/// `f_{..,w_j=q} = f_{(I∖j, w∖j)} - Σ_{s<q} f_{..,w_j=s}`.
pub fn expand_indicator(
    params: &OaParams,
    coords: &[usize],
    values: &[u32],
) -> Result<Vec<(usize, BigInt)>> {
    validate_coords(params, coords)?;
    if coords.len() != values.len() {
        return Err(Error::invalid("coords and values must have equal length"));
    }
    if values.iter().any(|&v| v < 1 || v > params.q) {
        return Err(Error::invalid("indicator values must lie in 1..=q"));
    }
    let indices = canonical_indices(params);
    let lookup: HashMap<OaIndex, usize> = indices
        .into_iter()
        .enumerate()
        .map(|(i, idx)| (idx, i))
        .collect();
    let mut acc: BTreeMap<usize, BigInt> = BTreeMap::new();
    expand_rec(
        params,
        coords.to_vec(),
        values.to_vec(),
        BigInt::one(),
        &lookup,
        &mut acc,
    )?;
    Ok(acc
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .collect())
}

fn expand_rec(
    params: &OaParams,
    coords: Vec<usize>,
    values: Vec<u32>,
    coeff: BigInt,
    lookup: &HashMap<OaIndex, usize>,
    acc: &mut BTreeMap<usize, BigInt>,
) -> Result<()> {
    match values.iter().position(|&v| v == params.q) {
        None => {
            let key = OaIndex {
                coords,
                values,
            };
            let slot = *lookup.get(&key).ok_or_else(|| {
                Error::invalid(format!(
                    "indicator {} falls outside the index set (|I| > t?)",
                    key.label()
                ))
            })?;
            *acc.entry(slot).or_insert_with(BigInt::zero) += coeff;
            Ok(())
        }
        Some(j) => {
            // marginalize coordinate j …
            let mut sub_coords = coords.clone();
            sub_coords.remove(j);
            let mut sub_values = values.clone();
            sub_values.remove(j);
            expand_rec(params, sub_coords, sub_values, coeff.clone(), lookup, acc)?;
            // … and subtract the reduced symbols at j
            for s in 1..params.q {
                let mut v = values.clone();
                v[j] = s;
                expand_rec(params, coords.clone(), v, -coeff.clone(), lookup, acc)?;
            }
            Ok(())
        }
    }
}

/// The symmetry witness for a cyclic symbol shift: `π(b)_i` adds
/// `shift_i - 1` to `b_i` modulo `q` (so the all-ones shift is the
/// identity). The companion matrix `τ` re-expresses each shifted indicator
/// in the reduced basis via [`expand_indicator`].
///
/// Shifts act transitively on `[q]^n`, which is what makes every element of
/// the ground set statistically interchangeable.
pub fn shift_witness(params: &OaParams, shift: &[u32]) -> Result<SymmetryWitness> {
    validate_word(params, shift)?;
    let q = params.q;
    let n = params.n as usize;
    let shift_owned = shift.to_vec();

    let indices = canonical_indices(params);
    let mut rows = Vec::with_capacity(indices.len());
    for idx in &indices {
        // φ_{(I,v)}(π(b)) = [b|_I = v ⊖ shift], expanded into the basis
        let unshifted: Vec<u32> = idx
            .coords
            .iter()
            .zip(&idx.values)
            .map(|(&c, &v)| {
                let delta = (v as i64 - shift_owned[c] as i64).rem_euclid(q as i64);
                delta as u32 + 1
            })
            .collect();
        let expansion = expand_indicator(params, &idx.coords, &unshifted)?;
        let mut row = vec![BigRational::zero(); indices.len()];
        for (slot, coeff) in expansion {
            row[slot] = BigRational::from(coeff);
        }
        rows.push(row);
    }
    let tau = RationalMatrix::from_rows(rows)?;

    let map = move |key: &ElementKey| -> Option<ElementKey> {
        let ElementKey::Word(w) = key else {
            return None;
        };
        if w.len() != n || w.iter().any(|&s| s < 1 || s > q) {
            return None;
        }
        let image = w
            .iter()
            .zip(&shift_owned)
            .map(|(&b, &s)| ((b as u64 - 1 + s as u64 - 1) % q as u64) as u32 + 1)
            .collect();
        Some(ElementKey::Word(image))
    };
    Ok(SymmetryWitness::new(Arc::new(map), tau))
}

/// Result of [`verify_oa`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OaVerifyReport {
    /// The rows form an orthogonal array of strength `t`.
    pub pass: bool,
    pub rows: u64,
    pub strength: u32,
    /// `q^t` divides the number of rows (necessary for any strength-`t`
    /// array).
    pub divisible: bool,
    /// `rows / q^t` when divisible.
    pub expected_per_cell: Option<u64>,
    /// Number of (column set, tuple) cells whose counts were checked.
    pub cells_checked: u64,
    pub first_violation: Option<String>,
}

/// Checks the combinatorial orthogonal-array property directly: for every
/// set of `t` columns, every `t`-tuple over `1..=q` appears equally often
/// among the rows.
///
/// Accepts multisets (repeated rows are counted with multiplicity). On
/// subsets of the ground set this agrees exactly with the framework's
/// `verify_solution`.
pub fn verify_oa(params: &OaParams, rows: &[Vec<u32>]) -> Result<OaVerifyReport> {
    if rows.is_empty() {
        return Err(Error::EmptySet("orthogonal array rows"));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != params.n as usize {
            return Err(Error::invalid(format!(
                "row {} has length {}, expected n = {}",
                i + 1,
                row.len(),
                params.n
            )));
        }
        if let Some(&bad) = row.iter().find(|&&s| s < 1 || s > params.q) {
            return Err(Error::invalid(format!(
                "row {} contains symbol {bad} outside 1..={}",
                i + 1,
                params.q
            )));
        }
    }

    let q = params.q as u64;
    let t = params.t as usize;
    let cell_count = q.pow(params.t);
    let divisible = rows.len() as u64 % cell_count == 0;
    let expected = if divisible {
        Some(rows.len() as u64 / cell_count)
    } else {
        None
    };

    let mut cells_checked = 0u64;
    let mut first_violation = if divisible {
        None
    } else {
        Some(format!(
            "row count {} is not divisible by q^t = {cell_count}",
            rows.len()
        ))
    };

    if let Some(expected) = expected {
        let mut cols: Vec<u64> = (0..t as u64).collect();
        loop {
            let mut histogram = vec![0u64; cell_count as usize];
            for row in rows {
                let mut cell = 0u64;
                for &c in &cols {
                    cell = cell * q + (row[c as usize] - 1) as u64;
                }
                histogram[cell as usize] += 1;
            }
            cells_checked += cell_count;
            if first_violation.is_none() {
                if let Some(bad) = histogram.iter().position(|&c| c != expected) {
                    let tuple = decode_cell(bad as u64, q, t);
                    let col_list: Vec<String> =
                        cols.iter().map(|c| (c + 1).to_string()).collect();
                    first_violation = Some(format!(
                        "columns {{{}}} tuple ({}) appears {} times, expected {expected}",
                        col_list.join(","),
                        tuple
                            .iter()
                            .map(|s| s.to_string())
                            .collect::<Vec<_>>()
                            .join(","),
                        histogram[bad]
                    ));
                }
            }
            if !util::combination_next(params.n as u64, &mut cols) {
                break;
            }
        }
    }

    Ok(OaVerifyReport {
        pass: first_violation.is_none(),
        rows: rows.len() as u64,
        strength: params.t,
        divisible,
        expected_per_cell: expected,
        cells_checked,
        first_violation,
    })
}

fn decode_cell(cell: u64, q: u64, t: usize) -> Vec<u32> {
    let mut out = vec![0u32; t];
    let mut rest = cell;
    for slot in (0..t).rev() {
        out[slot] = (rest % q) as u32 + 1;
        rest /= q;
    }
    out
}

fn build_isolation_family(
    params: &OaParams,
    indices: &[OaIndex],
    _lookup: &HashMap<OaIndex, usize>,
    index: usize,
    cfg: &GreedyConfig,
) -> Result<IsolationFamily> {
    let target = &indices[index];
    let n = params.n as usize;
    let free: Vec<usize> = (0..n).filter(|c| !target.coords.contains(c)).collect();

    // total candidates: q^{n-|I|} centers x with x|_I = v
    let mut total: u64 = 1;
    for _ in &free {
        total = total.saturating_mul(params.q as u64);
    }
    let sweep = total.min(cfg.max_candidates);
    let complete = sweep == total;

    let offset = match cfg.seed {
        None => 0,
        Some(seed) => {
            let mut state = seed;
            util::splitmix64(&mut state) % total.max(1)
        }
    };

    let min_distance = 2 * params.t as usize + 1;
    let mut accepted: Vec<Vec<u32>> = Vec::new();
    let mut vectors = Vec::new();
    for step in 0..sweep {
        let rank = (offset + step) % total;
        // unrank the free coordinates (base q, most significant first)
        let mut x = vec![0u32; n];
        for (&c, &v) in target.coords.iter().zip(&target.values) {
            x[c] = v;
        }
        let mut rest = rank;
        for &c in free.iter().rev() {
            x[c] = (rest % params.q as u64) as u32 + 1;
            rest /= params.q as u64;
        }
        let far_enough = accepted.iter().all(|prev| {
            let dist = prev.iter().zip(&x).filter(|(a, b)| a != b).count();
            dist >= min_distance
        });
        if far_enough {
            vectors.push(gamma(params, &x, &target.coords)?);
            accepted.push(x);
        }
    }

    Ok(IsolationFamily {
        target_index: index,
        target_label: target.label(),
        modulus: 1,
        vectors,
        complete,
    })
}

fn validate_word(params: &OaParams, word: &[u32]) -> Result<()> {
    if word.len() != params.n as usize {
        return Err(Error::invalid(format!(
            "word length {} ≠ n = {}",
            word.len(),
            params.n
        )));
    }
    if let Some(&bad) = word.iter().find(|&&s| s < 1 || s > params.q) {
        return Err(Error::invalid(format!(
            "symbol {bad} outside 1..={}",
            params.q
        )));
    }
    Ok(())
}

fn validate_coords(params: &OaParams, coords: &[usize]) -> Result<()> {
    if coords.len() > params.t as usize {
        return Err(Error::invalid(format!(
            "coordinate set of size {} exceeds t = {}",
            coords.len(),
            params.t
        )));
    }
    if coords.iter().any(|&c| c >= params.n as usize) {
        return Err(Error::invalid("coordinate out of range"));
    }
    if coords.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(
            "coordinates must be strictly increasing (sorted, no repeats)",
        ));
    }
    Ok(())
}
