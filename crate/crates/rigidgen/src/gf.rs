//! Small Galois fields `GF(p^k)` with fully tabulated arithmetic.
//!
//! Elements are encoded as integers `0..q`: the base-`p` digits of the code
//! are the coefficients of the representing polynomial (constant term
//! first). For prime `q` this degenerates to arithmetic mod `p`. Extension
//! fields use a fixed irreducible polynomial per `(p, k)` from a small
//! table, so element codes are stable across runs.

use crate::error::{Error, Result};

/// Monic irreducible polynomials, low-degree coefficients first (the leading
/// 1 is implicit). One fixed choice per supported prime power.
fn irreducible(p: u32, k: u32) -> Option<&'static [u32]> {
    match (p, k) {
        (2, 2) => Some(&[1, 1]),       // x² + x + 1
        (2, 3) => Some(&[1, 1, 0]),    // x³ + x + 1
        (2, 4) => Some(&[1, 1, 0, 0]), // x⁴ + x + 1
        (3, 2) => Some(&[1, 0]),       // x² + 1
        (3, 3) => Some(&[1, 2, 0]),    // x³ + 2x + 1
        (5, 2) => Some(&[2, 0]),       // x² + 2
        _ => None,
    }
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Arithmetic tables for one field.
pub(crate) struct GaloisField {
    q: u32,
    add: Vec<u16>,
    mul: Vec<u16>,
    inv: Vec<u16>,
}

impl GaloisField {
    /// Builds `GF(q)` for a prime `q`, or a tabulated prime power.
    pub fn new(q: u32) -> Result<Self> {
        if q < 2 || q > 512 {
            return Err(Error::invalid(format!(
                "field order {q} outside supported range 2..=512"
            )));
        }
        // factor q = p^k
        let p = (2..=q).find(|d| q % d == 0).expect("q ≥ 2 has a divisor");
        let mut k = 0u32;
        let mut rest = q;
        while rest % p == 0 {
            rest /= p;
            k += 1;
        }
        if rest != 1 {
            return Err(Error::invalid(format!(
                "field order {q} is not a prime power"
            )));
        }
        debug_assert!(is_prime(p));
        let poly: Vec<u32> = if k == 1 {
            vec![]
        } else {
            irreducible(p, k)
                .ok_or_else(|| {
                    Error::invalid(format!(
                        "no tabulated irreducible polynomial for GF({p}^{k})"
                    ))
                })?
                .to_vec()
        };

        let digits = |mut code: u32| -> Vec<u32> {
            let mut out = vec![0u32; k as usize];
            for slot in out.iter_mut() {
                *slot = code % p;
                code /= p;
            }
            out
        };
        let encode = |coeffs: &[u32]| -> u32 {
            coeffs
                .iter()
                .rev()
                .fold(0u32, |acc, &c| acc * p + (c % p))
        };

        let mut add = vec![0u16; (q * q) as usize];
        let mut mul = vec![0u16; (q * q) as usize];
        for a in 0..q {
            let da = digits(a);
            for b in 0..q {
                let db = digits(b);
                let sum: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                add[(a * q + b) as usize] = encode(&sum) as u16;

                // polynomial product, reduced by the irreducible polynomial
                let mut prod = vec![0u32; 2 * k as usize];
                for (i, &x) in da.iter().enumerate() {
                    for (j, &y) in db.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % p;
                    }
                }
                for deg in (k as usize..prod.len()).rev() {
                    let lead = prod[deg];
                    if lead == 0 {
                        continue;
                    }
                    prod[deg] = 0;
                    // x^deg ≡ -poly, shifted by deg-k
                    for (off, &c) in poly.iter().enumerate() {
                        let slot = deg - k as usize + off;
                        prod[slot] = (prod[slot] + (p - c % p) * lead) % p;
                    }
                }
                mul[(a * q + b) as usize] = encode(&prod[..k as usize]) as u16;
            }
        }

        let mut inv = vec![0u16; q as usize];
        for a in 1..q {
            let found = (1..q).find(|&b| mul[(a * q + b) as usize] == 1);
            inv[a as usize] =
                found.ok_or_else(|| Error::invalid(format!("{a} has no inverse in GF({q})")))?
                    as u16;
        }

        Ok(GaloisField { q, add, mul, inv })
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        self.add[(a * self.q + b) as usize] as u32
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.mul[(a * self.q + b) as usize] as u32
    }

    pub fn neg(&self, a: u32) -> u32 {
        (0..self.q)
            .find(|&b| self.add(a, b) == 0)
            .expect("additive inverse exists")
    }

    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    pub fn inv(&self, a: u32) -> u32 {
        debug_assert_ne!(a, 0, "zero has no inverse");
        self.inv[a as usize] as u32
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_prime_powers_and_missing_tables() {
        assert!(GaloisField::new(6).is_err());
        assert!(GaloisField::new(12).is_err());
        assert!(GaloisField::new(1).is_err());
        // 7^2 = 49 is a prime power but has no tabulated polynomial
        assert!(GaloisField::new(49).is_err());
    }

    #[test]
    fn prime_fields_match_modular_arithmetic() {
        for q in [2u32, 3, 5, 7, 11, 13] {
            let f = GaloisField::new(q).unwrap();
            for a in 0..q {
                for b in 0..q {
                    assert_eq!(f.add(a, b), (a + b) % q);
                    assert_eq!(f.mul(a, b), (a * b) % q);
                }
            }
        }
    }

    #[test]
    fn gf4_multiplication_table() {
        // codes: 0, 1, α = 2, α+1 = 3 with α² = α + 1
        let f = GaloisField::new(4).unwrap();
        assert_eq!(f.mul(2, 2), 3); // α² = α+1
        assert_eq!(f.mul(2, 3), 1); // α(α+1) = α²+α = 1
        assert_eq!(f.mul(3, 3), 2); // (α+1)² = α²+1 = α
        assert_eq!(f.inv(2), 3);
        assert_eq!(f.inv(3), 2);
    }

    #[test]
    fn field_axioms_hold_in_extensions() {
        for q in [4u32, 8, 9, 16, 25, 27] {
            let f = GaloisField::new(q).unwrap();
            // multiplicative inverses
            for a in 1..q {
                assert_eq!(f.mul(a, f.inv(a)), 1, "a·a⁻¹ in GF({q})");
            }
            // distributivity on a sample
            for a in 0..q.min(6) {
                for b in 0..q.min(6) {
                    for c in 0..q.min(6) {
                        assert_eq!(
                            f.mul(a, f.add(b, c)),
                            f.add(f.mul(a, b), f.mul(a, c)),
                            "distributivity in GF({q})"
                        );
                    }
                }
            }
            // the multiplicative group has order q-1 (Fermat)
            for a in 1..q {
                let mut pow = 1u32;
                for _ in 0..(q - 1) {
                    pow = f.mul(pow, a);
                }
                assert_eq!(pow, 1, "a^(q-1) in GF({q})");
            }
        }
    }
}
