//! Additive difference calculus: iterated differences, additive degree,
//! polarization, and defect degree under named strategies.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::PhaseFunction;
use crate::ring::Elem;

/// Highest derivative order any routine here will take.
pub const MAX_DERIVATIVE_ORDER: usize = 6;

/// Work budget (table cells visited) for the exhaustive degree scan.
pub const DEGREE_SCAN_BUDGET: u128 = 60_000_000;

/// Largest `|A|` for which a full polarization table is built.
pub const POLARIZATION_CAP: usize = 4096;

/// Largest `|A|^k` for a materialized defect tensor.
pub const TENSOR_CAP: u128 = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DifferenceMethod {
    /// Apply `Δ_{h_1}`, then `Δ_{h_2}`, and so on.
    Recursive,
    /// Signed sum of `φ(x + Σ ε_i h_i)` over `ε ∈ {0,1}^k`.
    AlternatingSum,
}

/// `Δ_{h_1,…,h_k} φ` as a table.
pub fn iterated_difference(
    phi: &PhaseFunction,
    hs: &[usize],
    method: DifferenceMethod,
) -> Result<PhaseFunction> {
    if hs.len() > MAX_DERIVATIVE_ORDER {
        return Err(Error::capacity(
            "derivative order",
            hs.len() as u128,
            MAX_DERIVATIVE_ORDER as u128,
        ));
    }
    let space = phi.space();
    if let Some(&h) = hs.iter().find(|&&h| h >= space.size()) {
        return Err(Error::DomainMismatch(format!("increment {h} outside the module")));
    }
    Ok(match method {
        DifferenceMethod::Recursive => hs
            .iter()
            .fold(phi.clone(), |acc, &h| acc.difference(h)),
        DifferenceMethod::AlternatingSum => {
            let table = space
                .elements()
                .map(|x| alternating_sum_at(phi, hs, x))
                .collect();
            PhaseFunction::from_table_unchecked(space.clone(), table)
        }
    })
}

/// `Σ_{ε} (−1)^{k−|ε|} φ(x + Σ ε_i h_i)` at one point.
pub fn alternating_sum_at(phi: &PhaseFunction, hs: &[usize], x: usize) -> Elem {
    let space = phi.space();
    let ring = space.ring();
    let k = hs.len();
    let mut acc = 0;
    for mask in 0u32..(1 << k) {
        let point = hs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .fold(x, |p, (_, &h)| space.add(p, h));
        let v = phi.at(point);
        if (k as u32 - mask.count_ones()) % 2 == 0 {
            acc = ring.add(acc, v);
        } else {
            acc = ring.sub(acc, v);
        }
    }
    acc
}

/// Additive degree by the defining scan: ascending `d`, testing whether
/// every `d`-fold derivative is constant in `x` (and, for `d = 0`, whether
/// `φ` itself is constant). Increments run over multisets of nonzero
/// elements, since differences commute and `Δ_0 = 0`.
///
/// Returns a capacity error once the work exceeds [`DEGREE_SCAN_BUDGET`];
/// [`additive_degree_fast`] is exact on any enumerable module.
pub fn additive_degree(phi: &PhaseFunction) -> Result<usize> {
    if phi.is_constant() {
        return Ok(0);
    }
    let size = phi.space().size();
    let mut work: u128 = 0;
    for d in 1..=MAX_DERIVATIVE_ORDER {
        if all_derivatives_constant(phi, d, 1, &mut work)? {
            return Ok(d);
        }
        let _ = size;
    }
    Err(Error::DegreeUnbounded {
        cap: MAX_DERIVATIVE_ORDER,
    })
}

fn all_derivatives_constant(
    phi: &PhaseFunction,
    depth_left: usize,
    min_h: usize,
    work: &mut u128,
) -> Result<bool> {
    if depth_left == 0 {
        return Ok(phi.is_constant());
    }
    let size = phi.space().size();
    for h in min_h..size {
        *work += size as u128;
        if *work > DEGREE_SCAN_BUDGET {
            return Err(Error::Capacity {
                what: "exhaustive additive-degree scan".into(),
                needed: *work,
                limit: DEGREE_SCAN_BUDGET,
                hint: " (use the generator-based degree or sampling mode)".into(),
            });
        }
        let next = phi.difference(h);
        if next.is_zero() && depth_left > 1 {
            continue;
        }
        if !all_derivatives_constant(&next, depth_left - 1, h, work)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Additive degree through additive generators of `A`.
///
/// `φ` has degree `≤ d` iff `Δ_{g_1}⋯Δ_{g_{d+1}} φ ≡ 0` for every multiset of
/// generators: `Δ_{a+b} = Δ_a + Δ_b + Δ_aΔ_b` and `Δ_{−a} = −τ_{−a}Δ_a`, so
/// products of generator differences generate every power of the
/// augmentation ideal.
pub fn additive_degree_fast(phi: &PhaseFunction) -> Result<usize> {
    let gens = phi.space().group_generators();
    let mut frontier = vec![(phi.clone(), 0usize)];
    for order in 0..=MAX_DERIVATIVE_ORDER {
        // frontier holds every `order`-fold generator derivative (as multisets)
        if frontier.iter().all(|(f, _)| f.is_zero()) {
            return Ok(order.saturating_sub(1));
        }
        if order == MAX_DERIVATIVE_ORDER {
            break;
        }
        let mut next = Vec::new();
        for (f, start) in &frontier {
            if f.is_zero() {
                continue;
            }
            for (gi, &g) in gens.iter().enumerate().skip(*start) {
                next.push((f.difference(g), gi));
            }
        }
        frontier = next;
    }
    Err(Error::DegreeUnbounded {
        cap: MAX_DERIVATIVE_ORDER,
    })
}

/// `additive degree ≤ d`, stopping after `d+1` generator differences.
pub fn degree_at_most(phi: &PhaseFunction, d: usize) -> bool {
    let gens = phi.space().group_generators();
    let mut frontier = vec![(phi.clone(), 0usize)];
    for _ in 0..=d {
        let mut next = Vec::new();
        for (f, start) in &frontier {
            if f.is_zero() {
                continue;
            }
            for (gi, &g) in gens.iter().enumerate().skip(*start) {
                next.push((f.difference(g), gi));
            }
        }
        frontier = next;
    }
    frontier.iter().all(|(f, _)| f.is_zero())
}

/// `φ(0) = 0` and `φ(x+y) = φ(x) + φ(y)` for all `x, y`.
pub fn is_additive(phi: &PhaseFunction) -> bool {
    let space = phi.space();
    let ring = space.ring();
    if phi.at_origin() != 0 {
        return false;
    }
    if space.size() <= POLARIZATION_CAP {
        space.elements().all(|x| {
            space
                .elements()
                .all(|y| phi.at(space.add(x, y)) == ring.add(phi.at(x), phi.at(y)))
        })
    } else {
        // generator-wise additivity implies additivity by induction on words
        space.group_generators().into_iter().all(|g| {
            space
                .elements()
                .all(|x| phi.at(space.add(x, g)) == ring.add(phi.at(x), phi.at(g)))
        })
    }
}

/// Normalized polarization `B(x,y) = φ(x+y) − φ(x) − φ(y) + φ(0)`, which is
/// the second difference `Δ_{x,y} φ(0)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polarization {
    size: usize,
    table: Vec<Elem>,
    biadditive: bool,
}

impl Polarization {
    pub fn at(&self, x: usize, y: usize) -> Elem {
        self.table[x * self.size + y]
    }

    pub fn is_biadditive(&self) -> bool {
        self.biadditive
    }

    pub fn is_zero(&self) -> bool {
        self.table.iter().all(|&v| v == 0)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.size).all(|x| (0..self.size).all(|y| self.at(x, y) == self.at(y, x)))
    }

    pub fn values(&self) -> &[Elem] {
        &self.table
    }
}

pub fn polarization(phi: &PhaseFunction) -> Result<Polarization> {
    let space = phi.space();
    let ring = space.ring();
    let size = space.size();
    if size > POLARIZATION_CAP {
        return Err(Error::capacity(
            "polarization table",
            size as u128,
            POLARIZATION_CAP as u128,
        ));
    }
    let origin = phi.at_origin();
    let mut table = vec![0; size * size];
    for x in 0..size {
        for y in 0..size {
            let v = ring.sub(phi.at(space.add(x, y)), ring.add(phi.at(x), phi.at(y)));
            table[x * size + y] = ring.add(v, origin);
        }
    }
    let gens = space.group_generators();
    // additivity in the first slot along generators; symmetry covers the second
    let biadditive = (0..size).all(|y| table[y] == 0)
        && gens.iter().all(|&g| {
            (0..size).all(|x| {
                (0..size).all(|y| {
                    table[space.add(x, g) * size + y]
                        == ring.add(table[x * size + y], table[g * size + y])
                })
            })
        });
    Ok(Polarization {
        size,
        table,
        biadditive,
    })
}

/// Named ways of assigning a defect degree to a phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DefectStrategy {
    /// 0 if additive, else `max(1, additive degree)`.
    Default,
    /// 0 if additive, else the least `k ≥ 1` with a nonvanishing `k`-fold
    /// difference (0 for nonzero constants).
    Literal,
    /// The additive degree: least `k` with every `k`-fold translation
    /// commutator scalar.
    Commutator,
    /// For degree ≤ 2 only: 0 if the polarization vanishes, 1 if it is
    /// radical-valued, 2 otherwise.
    RadicalDepth,
}

impl DefectStrategy {
    pub const ALL: [DefectStrategy; 4] = [
        DefectStrategy::Default,
        DefectStrategy::Literal,
        DefectStrategy::Commutator,
        DefectStrategy::RadicalDepth,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            DefectStrategy::Default => "default",
            DefectStrategy::Literal => "literal",
            DefectStrategy::Commutator => "commutator",
            DefectStrategy::RadicalDepth => "radical-depth",
        }
    }
}

impl fmt::Display for DefectStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DefectStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "default" => Ok(DefectStrategy::Default),
            "literal" => Ok(DefectStrategy::Literal),
            "commutator" => Ok(DefectStrategy::Commutator),
            "radical-depth" => Ok(DefectStrategy::RadicalDepth),
            other => Err(Error::UnknownStrategy(other.to_string())),
        }
    }
}

/// Defect degree of `φ` under `strategy`.
pub fn defect_degree(phi: &PhaseFunction, strategy: DefectStrategy) -> Result<usize> {
    match strategy {
        DefectStrategy::Default => {
            if is_additive(phi) {
                Ok(0)
            } else {
                Ok(additive_degree_fast(phi)?.max(1))
            }
        }
        DefectStrategy::Literal => Ok(if is_additive(phi) || phi.is_constant() {
            0
        } else {
            1
        }),
        DefectStrategy::Commutator => additive_degree_fast(phi),
        DefectStrategy::RadicalDepth => radical_depth(phi),
    }
}

fn radical_depth(phi: &PhaseFunction) -> Result<usize> {
    let degree = additive_degree_fast(phi);
    if !matches!(degree, Ok(d) if d <= 2) {
        return Err(Error::StrategyDomain {
            strategy: DefectStrategy::RadicalDepth.name().into(),
            reason: match degree {
                Ok(d) => format!("phase has additive degree {d} > 2"),
                Err(e) => e.to_string(),
            },
        });
    }
    let ring = phi.space().ring();
    let values = second_difference_values_at_origin(phi);
    if values.iter().all(|&v| v == 0) {
        Ok(0)
    } else if values.iter().all(|&v| ring.in_radical(v)) {
        Ok(1)
    } else {
        Ok(2)
    }
}

/// The set of values `Δ_{x,y} φ(0)` over all `x, y`, generated from the
/// additive generators when the module is large (biadditivity for degree ≤ 2).
fn second_difference_values_at_origin(phi: &PhaseFunction) -> Vec<Elem> {
    let space = phi.space();
    let ring = space.ring();
    let b = |x: usize, y: usize| {
        let v = ring.sub(phi.at(space.add(x, y)), ring.add(phi.at(x), phi.at(y)));
        ring.add(v, phi.at_origin())
    };
    if space.size() <= POLARIZATION_CAP {
        let mut seen = vec![false; ring.order()];
        for x in space.elements() {
            for y in space.elements() {
                seen[b(x, y) as usize] = true;
            }
        }
        return ring.elements().filter(|&v| seen[v as usize]).collect();
    }
    // a biadditive form's values lie in the span of its values on generators
    let gens = space.group_generators();
    let on_gens: Vec<Elem> = gens
        .iter()
        .flat_map(|&x| gens.iter().map(move |&y| (x, y)))
        .map(|(x, y)| b(x, y))
        .collect();
    ring.additive_span(&on_gens)
}

/// Dense family `{Δ_{h_1,…,h_k} φ(0)}` indexed by `h_1 + |A| h_2 + …`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefectTensor {
    pub order: usize,
    pub arity: usize,
    pub values: Vec<Elem>,
}

impl DefectTensor {
    pub fn at(&self, hs: &[usize]) -> Elem {
        assert_eq!(hs.len(), self.order);
        let idx = hs.iter().rev().fold(0, |acc, &h| acc * self.arity + h);
        self.values[idx]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0)
    }
}

pub fn defect_tensor_at_order(phi: &PhaseFunction, order: usize) -> Result<DefectTensor> {
    let arity = phi.space().size();
    let count = (arity as u128).pow(order as u32);
    if count > TENSOR_CAP {
        return Err(Error::capacity("defect tensor", count, TENSOR_CAP));
    }
    let mut hs = vec![0usize; order];
    let values = (0..count as usize)
        .map(|mut idx| {
            for h in hs.iter_mut() {
                *h = idx % arity;
                idx /= arity;
            }
            alternating_sum_at(phi, &hs, 0)
        })
        .collect();
    Ok(DefectTensor {
        order,
        arity,
        values,
    })
}

/// Everything the calculus knows about one phase.
#[derive(Clone, Debug)]
pub struct DefectProfile {
    pub strategy: DefectStrategy,
    pub additive_degree: usize,
    pub is_additive: bool,
    pub defect_degree_by_strategy: BTreeMap<String, usize>,
    /// The tensor at the profiled strategy's degree; `None` for degree 0.
    pub defect_tensor: Option<DefectTensor>,
    pub polarization: Option<Polarization>,
}

impl DefectProfile {
    pub fn defect_degree(&self) -> usize {
        self.defect_degree_by_strategy[self.strategy.name()]
    }
}

/// Builds the defect profile of `phi` for `strategy`.
pub fn defect_tensor(phi: &PhaseFunction, strategy: DefectStrategy) -> Result<DefectProfile> {
    let additive_degree = additive_degree_fast(phi)?;
    let mut by_strategy = BTreeMap::new();
    for s in DefectStrategy::ALL {
        match defect_degree(phi, s) {
            Ok(d) => {
                by_strategy.insert(s.name().to_string(), d);
            }
            Err(e) if s == strategy => return Err(e),
            Err(_) => {}
        }
    }
    let k = by_strategy[strategy.name()];
    let defect_tensor = if k == 0 {
        None
    } else {
        Some(defect_tensor_at_order(phi, k)?)
    };
    let polarization = if additive_degree <= 2 && phi.space().size() <= POLARIZATION_CAP {
        Some(polarization(phi)?)
    } else {
        None
    };
    Ok(DefectProfile {
        strategy,
        additive_degree,
        is_additive: is_additive(phi),
        defect_degree_by_strategy: by_strategy,
        defect_tensor,
        polarization,
    })
}
