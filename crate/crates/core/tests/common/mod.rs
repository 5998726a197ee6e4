//! Brute-force oracles built only from ring and module arithmetic, so they
//! share no code with the calculus they check.
#![allow(dead_code)]

use std::sync::Arc;

use phaseforge::module::ModuleSpace;
use phaseforge::ring::{build_ring, Elem};

pub fn space(ring: &str, n: usize) -> Arc<ModuleSpace> {
    ModuleSpace::new(Arc::new(build_ring(&ring.parse().unwrap()).unwrap()), n).unwrap()
}

/// `x ↦ t(x + h) − t(x)`.
pub fn diff(space: &ModuleSpace, t: &[Elem], h: usize) -> Vec<Elem> {
    let ring = space.ring();
    (0..space.size())
        .map(|x| ring.sub(t[space.add(x, h)], t[x]))
        .collect()
}

pub fn iter_diff(space: &ModuleSpace, t: &[Elem], hs: &[usize]) -> Vec<Elem> {
    hs.iter().fold(t.to_vec(), |acc, &h| diff(space, &acc, h))
}

/// Every `order`-tuple of increments, as packed indices.
pub fn tuples(size: usize, order: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..size.pow(order as u32)).map(move |mut i| {
        (0..order)
            .map(|_| {
                let h = i % size;
                i /= size;
                h
            })
            .collect()
    })
}

/// Whether every `(d+1)`-fold difference over all increments vanishes.
pub fn degree_at_most(space: &ModuleSpace, t: &[Elem], d: usize) -> bool {
    let zero = vec![0 as Elem; space.size()];
    // differences of order d+1 vanish iff all order-d differences are constant,
    // so recurse one increment at a time with early exit
    fn go(space: &ModuleSpace, t: &[Elem], left: usize, zero: &[Elem]) -> bool {
        if t == zero {
            return true;
        }
        if left == 0 {
            return false;
        }
        (0..space.size()).all(|h| go(space, &diff(space, t, h), left - 1, zero))
    }
    go(space, t, d + 1, &zero)
}

/// Least `d ≤ max` with all `(d+1)`-fold differences zero.
pub fn degree(space: &ModuleSpace, t: &[Elem], max: usize) -> Option<usize> {
    (0..=max).find(|&d| degree_at_most(space, t, d))
}

/// `φ(x+y) = φ(x) + φ(y)` everywhere.
pub fn is_additive(space: &ModuleSpace, t: &[Elem]) -> bool {
    let ring = space.ring();
    (0..space.size()).all(|x| {
        (0..space.size()).all(|y| t[space.add(x, y)] == ring.add(t[x], t[y]))
    })
}
