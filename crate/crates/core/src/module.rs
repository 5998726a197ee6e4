//! Free modules `A = R^n`, packed element indices and matrix homomorphisms.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::ring::{Elem, FiniteRing};

/// Largest module that may be enumerated element by element.
pub const ENUMERATION_CAP: usize = 1 << 20;

/// Modules up to this size keep a precomputed addition table.
const ADD_TABLE_CAP: usize = 1024;

/// The free module `R^n`. Elements are addressed by their packed index, the
/// mixed-radix encoding of the coordinate vector with coordinate 0 least
/// significant.
pub struct ModuleSpace {
    ring: Arc<FiniteRing>,
    rank: usize,
    size: usize,
    add_table: Option<Vec<u32>>,
}

impl fmt::Debug for ModuleSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ModuleSpace({}^{})", self.ring.spec(), self.rank)
    }
}

impl PartialEq for ModuleSpace {
    fn eq(&self, other: &Self) -> bool {
        self.rank == other.rank && self.ring == other.ring
    }
}

impl Eq for ModuleSpace {}

/// A module element with both representations.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModuleElement {
    pub coords: Vec<Elem>,
    pub packed: usize,
}

impl ModuleSpace {
    pub fn new(ring: Arc<FiniteRing>, rank: usize) -> Result<Arc<ModuleSpace>> {
        if rank == 0 {
            return Err(Error::Parse("module rank must be positive".into()));
        }
        let size = (ring.order() as u128)
            .checked_pow(rank as u32)
            .filter(|&s| s <= u32::MAX as u128)
            .ok_or_else(|| Error::capacity("module size", u128::MAX, u32::MAX as u128))?
            as usize;
        let mut space = ModuleSpace {
            ring,
            rank,
            size,
            add_table: None,
        };
        if size <= ADD_TABLE_CAP {
            let mut table = vec![0u32; size * size];
            for x in 0..size {
                for y in 0..size {
                    table[x * size + y] = space.add_digits(x, y) as u32;
                }
            }
            space.add_table = Some(table);
        }
        Ok(Arc::new(space))
    }

    pub fn ring(&self) -> &Arc<FiniteRing> {
        &self.ring
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn ensure_enumerable(&self) -> Result<()> {
        if self.size > ENUMERATION_CAP {
            return Err(Error::capacity(
                format!("enumeration of {}^{}", self.ring.spec(), self.rank),
                self.size as u128,
                ENUMERATION_CAP as u128,
            ));
        }
        Ok(())
    }

    /// Every element in packed-index order.
    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.size
    }

    pub fn coords(&self, mut x: usize) -> Vec<Elem> {
        let q = self.ring.order();
        (0..self.rank)
            .map(|_| {
                let c = (x % q) as Elem;
                x /= q;
                c
            })
            .collect()
    }

    pub fn coord(&self, x: usize, i: usize) -> Elem {
        let q = self.ring.order();
        ((x / q.pow(i as u32)) % q) as Elem
    }

    pub fn encode(&self, coords: &[Elem]) -> usize {
        let q = self.ring.order();
        coords.iter().rev().fold(0usize, |acc, &c| acc * q + c as usize)
    }

    pub fn element(&self, packed: usize) -> ModuleElement {
        ModuleElement {
            coords: self.coords(packed),
            packed,
        }
    }

    fn add_digits(&self, mut x: usize, mut y: usize) -> usize {
        let q = self.ring.order();
        let mut out = 0;
        let mut stride = 1;
        for _ in 0..self.rank {
            let s = self.ring.add((x % q) as Elem, (y % q) as Elem) as usize;
            out += s * stride;
            stride *= q;
            x /= q;
            y /= q;
        }
        out
    }

    #[inline]
    pub fn add(&self, x: usize, y: usize) -> usize {
        match &self.add_table {
            Some(t) => t[x * self.size + y] as usize,
            None => self.add_digits(x, y),
        }
    }

    pub fn neg(&self, x: usize) -> usize {
        let c: Vec<Elem> = self.coords(x).into_iter().map(|a| self.ring.neg(a)).collect();
        self.encode(&c)
    }

    pub fn sub(&self, x: usize, y: usize) -> usize {
        self.add(x, self.neg(y))
    }

    /// `r·e_i`.
    pub fn basis_vector(&self, i: usize, r: Elem) -> usize {
        let mut c = vec![0; self.rank];
        c[i] = r;
        self.encode(&c)
    }

    /// Additive generators of `(A,+)`: one per coordinate and ring basis element.
    pub fn group_generators(&self) -> Vec<usize> {
        let basis = self.ring.additive_basis();
        (0..self.rank)
            .flat_map(|i| basis.iter().map(move |&g| (i, g)))
            .map(|(i, g)| self.basis_vector(i, g))
            .collect()
    }

    pub fn format_element(&self, x: usize) -> String {
        let parts: Vec<String> = self
            .coords(x)
            .into_iter()
            .map(|c| self.ring.format_elem(c))
            .collect();
        format!("({})", parts.join(","))
    }

    pub fn random_element<G: Rng + ?Sized>(&self, rng: &mut G) -> usize {
        rng.gen_range(0..self.size)
    }
}

/// An `R`-linear map `R^n → R^m` given by an `m×n` matrix.
#[derive(Clone, Debug)]
pub struct ModuleHom {
    source: Arc<ModuleSpace>,
    target: Arc<ModuleSpace>,
    /// Row-major, `target.rank()` rows of `source.rank()` entries.
    matrix: Vec<Elem>,
}

impl ModuleHom {
    pub fn new(source: Arc<ModuleSpace>, target: Arc<ModuleSpace>, matrix: Vec<Elem>) -> Result<Self> {
        if source.ring() != target.ring() {
            return Err(Error::DomainMismatch("homomorphism between different rings".into()));
        }
        let expected = source.rank() * target.rank();
        if matrix.len() != expected {
            return Err(Error::RankMismatch {
                expected,
                found: matrix.len(),
            });
        }
        if matrix.iter().any(|&e| e as usize >= source.ring().order()) {
            return Err(Error::Parse("matrix entry is not a ring element".into()));
        }
        Ok(ModuleHom {
            source,
            target,
            matrix,
        })
    }

    pub fn identity(space: Arc<ModuleSpace>) -> Self {
        let n = space.rank();
        let one = space.ring().one();
        let matrix = (0..n * n).map(|i| if i / n == i % n { one } else { 0 }).collect();
        ModuleHom {
            source: space.clone(),
            target: space,
            matrix,
        }
    }

    pub fn zero(source: Arc<ModuleSpace>, target: Arc<ModuleSpace>) -> Self {
        let matrix = vec![0; source.rank() * target.rank()];
        ModuleHom {
            source,
            target,
            matrix,
        }
    }

    pub fn random<G: Rng + ?Sized>(source: Arc<ModuleSpace>, target: Arc<ModuleSpace>, rng: &mut G) -> Self {
        let q = source.ring().order();
        let matrix = (0..source.rank() * target.rank())
            .map(|_| rng.gen_range(0..q) as Elem)
            .collect();
        ModuleHom {
            source,
            target,
            matrix,
        }
    }

    pub fn source(&self) -> &Arc<ModuleSpace> {
        &self.source
    }

    pub fn target(&self) -> &Arc<ModuleSpace> {
        &self.target
    }

    pub fn matrix(&self) -> &[Elem] {
        &self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> Elem {
        self.matrix[row * self.source.rank() + col]
    }

    pub fn apply_coords(&self, x: &[Elem]) -> Result<Vec<Elem>> {
        if x.len() != self.source.rank() {
            return Err(Error::RankMismatch {
                expected: self.source.rank(),
                found: x.len(),
            });
        }
        let ring = self.source.ring();
        Ok((0..self.target.rank())
            .map(|i| {
                x.iter()
                    .enumerate()
                    .fold(0, |acc, (j, &xj)| ring.add(acc, ring.mul(self.entry(i, j), xj)))
            })
            .collect())
    }

    /// Applies the map to a packed element of the source.
    pub fn apply(&self, x: usize) -> usize {
        let y = self
            .apply_coords(&self.source.coords(x))
            .expect("packed element has source rank");
        self.target.encode(&y)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &ModuleHom) -> Result<ModuleHom> {
        if inner.target.as_ref() != self.source.as_ref() {
            return Err(Error::RankMismatch {
                expected: self.source.rank(),
                found: inner.target.rank(),
            });
        }
        let ring = self.source.ring();
        let (m, k, n) = (self.target.rank(), self.source.rank(), inner.source.rank());
        let matrix = (0..m * n)
            .map(|idx| {
                let (i, j) = (idx / n, idx % n);
                (0..k).fold(0, |acc, l| ring.add(acc, ring.mul(self.entry(i, l), inner.entry(l, j))))
            })
            .collect();
        Ok(ModuleHom {
            source: inner.source.clone(),
            target: self.target.clone(),
            matrix,
        })
    }

    pub fn describe(&self) -> String {
        let ring = self.source.ring();
        let rows: Vec<String> = (0..self.target.rank())
            .map(|i| {
                (0..self.source.rank())
                    .map(|j| ring.format_elem(self.entry(i, j)))
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        format!("[{}]", rows.join("; "))
    }
}

/// Applies a homomorphism to a module element, checking ranks.
pub fn hom_apply(f: &ModuleHom, x: &ModuleElement) -> Result<ModuleElement> {
    let coords = f.apply_coords(&x.coords)?;
    let packed = f.target.encode(&coords);
    Ok(ModuleElement { coords, packed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::build_ring;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn space(s: &str, n: usize) -> Arc<ModuleSpace> {
        ModuleSpace::new(Arc::new(build_ring(&s.parse().unwrap()).unwrap()), n).unwrap()
    }

    #[test]
    fn sizes_and_iteration() {
        for (n, size) in [(1, 4), (2, 16), (3, 64)] {
            let a = space("chain:2:2", n);
            assert_eq!(a.size(), size);
            assert_eq!(a.elements().count(), size);
        }
    }

    #[test]
    fn packing_is_bijective() {
        let a = space("zmod:3", 4);
        for x in a.elements() {
            assert_eq!(a.encode(&a.coords(x)), x);
            for i in 0..4 {
                assert_eq!(a.coord(x, i), a.coords(x)[i]);
            }
        }
    }

    #[test]
    fn table_and_digit_addition_agree() {
        let a = space("zmod:4", 3);
        for x in a.elements() {
            for y in a.elements() {
                assert_eq!(a.add(x, y), a.add_digits(x, y));
            }
            assert_eq!(a.add(x, a.neg(x)), 0);
        }
    }

    #[test]
    fn hom_examples() {
        let r2 = space("chain:2:2", 2);
        let r1 = space("chain:2:2", 1);
        let id = ModuleHom::identity(r2.clone());
        let zero = ModuleHom::zero(r2.clone(), r2.clone());
        for x in r2.elements() {
            assert_eq!(id.apply(x), x);
            assert_eq!(zero.apply(x), 0);
        }
        // [1 1] applied to (u, 1) is u+1
        let sum = ModuleHom::new(r2.clone(), r1.clone(), vec![1, 1]).unwrap();
        let x = r2.element(r2.encode(&[2, 1]));
        assert_eq!(hom_apply(&sum, &x).unwrap().coords, vec![3]);
        let wrong = ModuleElement {
            coords: vec![1],
            packed: 1,
        };
        assert!(matches!(hom_apply(&sum, &wrong), Err(Error::RankMismatch { .. })));
    }

    #[test]
    fn homs_are_additive_and_compose() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a1 = space("chain:2:2", 1);
        let a2 = space("chain:2:2", 2);
        let a3 = space("chain:2:2", 3);
        for _ in 0..20 {
            let f = ModuleHom::random(a2.clone(), a3.clone(), &mut rng);
            let g = ModuleHom::random(a3.clone(), a1.clone(), &mut rng);
            let gf = g.compose(&f).unwrap();
            for x in a2.elements() {
                assert_eq!(gf.apply(x), g.apply(f.apply(x)));
                for y in a2.elements() {
                    assert_eq!(f.apply(a2.add(x, y)), a3.add(f.apply(x), f.apply(y)));
                }
            }
        }
        let f = ModuleHom::random(a2.clone(), a3.clone(), &mut rng);
        assert!(f.compose(&f).is_err());
    }

    #[test]
    fn group_generators_span() {
        let a = space("chain:2:2", 2);
        let gens = a.group_generators();
        assert_eq!(gens.len(), 4);
        let mut seen = vec![false; a.size()];
        seen[0] = true;
        let mut stack = vec![0];
        while let Some(x) = stack.pop() {
            for &g in &gens {
                let y = a.add(x, g);
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        assert!(seen.iter().all(|&s| s));
    }
}
