//! Additive characters of `(R,+)` with exact root-of-unity values.
//!
//! A character value `exp(2πi·e/m)` is stored as the exponent `e ∈ Z/m`,
//! where `m` is the additive exponent of the ring. Products of character
//! values are exponent additions.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ring::{Elem, FiniteRing};

#[derive(Clone, Debug)]
pub struct AdditiveCharacter {
    ring: Arc<FiniteRing>,
    index: usize,
    modulus: u32,
    values: Vec<u32>,
}

impl PartialEq for AdditiveCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring && self.values == other.values
    }
}

impl Eq for AdditiveCharacter {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrobeniusVerdict {
    Frobenius,
    NotFrobenius,
}

impl AdditiveCharacter {
    /// Character number `index` in canonical order.
    ///
    /// The index is read in the ring's mixed radix as a dual digit vector `t`,
    /// and the character sends the element with digits `c` to
    /// `Σ c_i t_i (m / radix_i) mod m`.
    pub fn new(ring: Arc<FiniteRing>, index: usize) -> Self {
        assert!(index < ring.order(), "character index out of range");
        let modulus = ring.additive_exponent();
        let radices = ring.radices().to_vec();
        let dual = ring.digits(index as Elem);
        let values = ring
            .elements()
            .map(|a| {
                ring.digits(a)
                    .iter()
                    .zip(&dual)
                    .zip(&radices)
                    .map(|((c, t), r)| c * t * (modulus / r))
                    .sum::<u32>()
                    % modulus
            })
            .collect();
        AdditiveCharacter {
            ring,
            index,
            modulus,
            values,
        }
    }

    pub fn ring(&self) -> &Arc<FiniteRing> {
        &self.ring
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    /// Exponent of `χ(a)`.
    #[inline]
    pub fn exponent(&self, a: Elem) -> u32 {
        self.values[a as usize]
    }

    pub fn value_table(&self) -> &[u32] {
        &self.values
    }

    pub fn is_trivial(&self) -> bool {
        self.values.iter().all(|&e| e == 0)
    }

    pub fn kernel(&self) -> Vec<Elem> {
        self.ring.elements().filter(|&a| self.values[a as usize] == 0).collect()
    }

    /// Exhaustive homomorphism check `e(a+b) = e(a) + e(b) mod m`.
    pub fn is_homomorphism(&self) -> bool {
        let r = &self.ring;
        self.values[0] == 0
            && r.elements().all(|a| {
                r.elements().all(|b| {
                    self.exponent(r.add(a, b)) == (self.exponent(a) + self.exponent(b)) % self.modulus
                })
            })
    }

    /// True iff no nonzero principal ideal `rR` lies inside the kernel.
    pub fn is_generating(&self) -> bool {
        let r = &self.ring;
        r.elements().filter(|&a| a != 0).all(|a| {
            r.principal_ideal(a)
                .iter()
                .any(|&x| self.values[x as usize] != 0)
        })
    }

    pub fn describe(&self) -> String {
        let parts: Vec<String> = self
            .ring
            .elements()
            .map(|a| format!("{}:{}", self.ring.format_elem(a), self.exponent(a)))
            .collect();
        format!("chi#{} mod {} [{}]", self.index, self.modulus, parts.join(", "))
    }
}

/// All `|R|` additive characters in canonical order.
pub fn character_group(ring: &Arc<FiniteRing>) -> Vec<AdditiveCharacter> {
    (0..ring.order())
        .map(|i| AdditiveCharacter::new(ring.clone(), i))
        .collect()
}

/// First generating character in canonical order, together with the
/// Frobenius verdict it implies.
pub fn find_generating_character(
    ring: &Arc<FiniteRing>,
) -> (Option<AdditiveCharacter>, FrobeniusVerdict) {
    let found = (0..ring.order())
        .into_par_iter()
        .map(|i| AdditiveCharacter::new(ring.clone(), i))
        .find_first(|chi| chi.is_generating());
    let verdict = if found.is_some() {
        FrobeniusVerdict::Frobenius
    } else {
        FrobeniusVerdict::NotFrobenius
    };
    (found, verdict)
}

/// All generating characters, in canonical order.
pub fn generating_characters(ring: &Arc<FiniteRing>) -> Vec<AdditiveCharacter> {
    character_group(ring)
        .into_iter()
        .filter(|c| c.is_generating())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::build_ring;

    fn ring(s: &str) -> Arc<FiniteRing> {
        Arc::new(build_ring(&s.parse().unwrap()).unwrap())
    }

    #[test]
    fn character_counts() {
        for (s, n, m) in [("chain:2:2", 4, 2), ("chain:2:1", 2, 2), ("zmod:4", 4, 4), ("zmod:6", 6, 6)] {
            let r = ring(s);
            let chars = character_group(&r);
            assert_eq!(chars.len(), n, "{s}");
            assert!(chars.iter().all(|c| c.modulus() == m && c.is_homomorphism()));
            // distinct characters
            for i in 0..n {
                for j in 0..i {
                    assert_ne!(chars[i], chars[j]);
                }
            }
        }
    }

    #[test]
    fn canonical_character_of_dual_numbers() {
        let r = ring("chain:2:2");
        let (chi, verdict) = find_generating_character(&r);
        let chi = chi.unwrap();
        assert_eq!(verdict, FrobeniusVerdict::Frobenius);
        // χ(a+ub) = (-1)^b: exponent equals the u-digit
        for a in 0..2u8 {
            for b in 0..2u8 {
                assert_eq!(chi.exponent(a + 2 * b), b as u32);
            }
        }
        assert_eq!(chi.kernel(), vec![0, 1]);
        assert!(!character_group(&r)[0].is_generating());
    }

    #[test]
    fn z4_has_generating_character() {
        let r = ring("zmod:4");
        let (chi, _) = find_generating_character(&r);
        let chi = chi.unwrap();
        assert_eq!(chi.index(), 1);
        assert_eq!(chi.kernel(), vec![0]);
    }

    #[test]
    fn fat_point_is_not_frobenius() {
        let r = ring("fatpoint:2");
        for chi in character_group(&r) {
            assert!(!chi.is_generating());
            if !chi.is_trivial() {
                assert_eq!(chi.kernel().len(), 4);
            }
        }
        let (chi, verdict) = find_generating_character(&r);
        assert!(chi.is_none());
        assert_eq!(verdict, FrobeniusVerdict::NotFrobenius);
    }

    #[test]
    fn every_nontrivial_character_of_a_field_generates() {
        for s in ["zmod:3", "zmod:5", "chain:2:1", "chain:3:1"] {
            let r = ring(s);
            for chi in character_group(&r) {
                assert_eq!(chi.is_generating(), !chi.is_trivial(), "{s}");
            }
        }
    }
}
