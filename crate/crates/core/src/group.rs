//! The group generated by phase multiplications and translations, kept in
//! the exact symbolic form `(ψ, a)` for the operator `f ↦ χ(ψ(x))·f(x+a)`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::calculus::{additive_degree_fast, defect_degree, DefectStrategy};
use crate::chars::AdditiveCharacter;
use crate::error::{Error, Result};
use crate::module::ModuleSpace;
use crate::phase::PhaseFunction;
use crate::ring::Elem;

/// Default closure cap.
pub const DEFAULT_CLOSURE_CAP: usize = 1_000_000;

/// Largest `|A|` for which operator matrices are exported.
pub const MATRIX_CAP: usize = 4096;

/// Canonical byte key: phase table followed by the translation as 4 LE bytes.
pub type ElementKey = Vec<u8>;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PhaseGroupElement {
    psi: PhaseFunction,
    a: usize,
}

impl fmt::Debug for PhaseGroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, a={})", self.psi.table(), self.a)
    }
}

impl PhaseGroupElement {
    pub fn new(psi: PhaseFunction, a: usize) -> Result<Self> {
        if a >= psi.space().size() {
            return Err(Error::DomainMismatch(format!("translation {a} outside the module")));
        }
        Ok(PhaseGroupElement { psi, a })
    }

    pub fn identity(space: Arc<ModuleSpace>) -> Self {
        PhaseGroupElement {
            psi: PhaseFunction::zero(space),
            a: 0,
        }
    }

    /// `M_ψ`.
    pub fn phase(psi: PhaseFunction) -> Self {
        PhaseGroupElement { psi, a: 0 }
    }

    /// `T_a`.
    pub fn translation(space: Arc<ModuleSpace>, a: usize) -> Self {
        assert!(a < space.size(), "translation outside the module");
        PhaseGroupElement {
            psi: PhaseFunction::zero(space),
            a,
        }
    }

    pub fn psi(&self) -> &PhaseFunction {
        &self.psi
    }

    pub fn translation_part(&self) -> usize {
        self.a
    }

    pub fn space(&self) -> &Arc<ModuleSpace> {
        self.psi.space()
    }

    pub fn is_identity(&self) -> bool {
        self.a == 0 && self.psi.is_zero()
    }

    /// Constant phase and no translation: a scalar multiple of the identity.
    pub fn is_scalar(&self) -> bool {
        self.a == 0 && self.psi.is_constant()
    }

    pub fn key(&self) -> ElementKey {
        let mut k = Vec::with_capacity(self.psi.table().len() + 4);
        k.extend_from_slice(self.psi.table());
        k.extend_from_slice(&(self.a as u32).to_le_bytes());
        k
    }

    pub fn from_key(space: &Arc<ModuleSpace>, key: &[u8]) -> Result<Self> {
        let size = space.size();
        if key.len() != size + 4 {
            return Err(Error::Parse(format!(
                "element key has {} bytes, expected {}",
                key.len(),
                size + 4
            )));
        }
        let psi = PhaseFunction::new(space.clone(), key[..size].to_vec())?;
        let a = u32::from_le_bytes(key[size..].try_into().expect("4 bytes")) as usize;
        Self::new(psi, a)
    }

    pub fn describe(&self) -> String {
        let space = self.space();
        let tag = if self.psi.is_zero() {
            format!("T{}", space.format_element(self.a))
        } else if self.a == 0 {
            format!("M[{}]", hex::encode(self.psi.table()))
        } else {
            format!("M[{}]T{}", hex::encode(self.psi.table()), space.format_element(self.a))
        };
        tag
    }
}

/// `(ψ₁,a₁)∘(ψ₂,a₂) = (ψ₁ + ψ₂∘τ_{a₁}, a₁+a₂)`.
pub fn compose(g1: &PhaseGroupElement, g2: &PhaseGroupElement) -> Result<PhaseGroupElement> {
    g1.psi.same_domain(&g2.psi)?;
    Ok(compose_unchecked(g1, g2))
}

fn compose_unchecked(g1: &PhaseGroupElement, g2: &PhaseGroupElement) -> PhaseGroupElement {
    let space = g1.space();
    let ring = space.ring();
    let table = space
        .elements()
        .map(|x| ring.add(g1.psi.at(x), g2.psi.at(space.add(x, g1.a))))
        .collect();
    PhaseGroupElement {
        psi: PhaseFunction::from_table_unchecked(space.clone(), table),
        a: space.add(g1.a, g2.a),
    }
}

/// `(−ψ∘τ_{−a}, −a)`.
pub fn invert(g: &PhaseGroupElement) -> PhaseGroupElement {
    let space = g.space();
    let minus_a = space.neg(g.a);
    PhaseGroupElement {
        psi: g.psi.translate(minus_a).neg(),
        a: minus_a,
    }
}

/// `[g, T_h] = g·T_h·g⁻¹·T_{−h} = (−Δ_h ψ, 0)`.
pub fn translation_commutator(g: &PhaseGroupElement, h: usize) -> Result<PhaseGroupElement> {
    let space = g.space().clone();
    if h >= space.size() {
        return Err(Error::DomainMismatch(format!("increment {h} outside the module")));
    }
    let t_h = PhaseGroupElement::translation(space.clone(), h);
    let t_minus_h = PhaseGroupElement::translation(space.clone(), space.neg(h));
    let gt = compose_unchecked(g, &t_h);
    let gtg = compose_unchecked(&gt, &invert(g));
    Ok(compose_unchecked(&gtg, &t_minus_h))
}

/// `[[g, T_{h₁}], …, T_{h_k}]`, whose phase is `(−1)^k Δ_{h₁…h_k} ψ`.
pub fn iterated_commutator(g: &PhaseGroupElement, hs: &[usize]) -> Result<PhaseGroupElement> {
    hs.iter()
        .try_fold(g.clone(), |acc, &h| translation_commutator(&acc, h))
}

/// Monomial exponent matrix: row `x` has one entry, at column `x+a`, with
/// value the exponent of `χ(ψ(x))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorMatrix {
    pub modulus: u32,
    /// `(column, exponent)` per row.
    pub rows: Vec<(usize, u32)>,
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Matrix product `self · other`.
    pub fn multiply(&self, other: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.dim(), other.dim());
        assert_eq!(self.modulus, other.modulus);
        let rows = self
            .rows
            .iter()
            .map(|&(c, e)| {
                let (c2, e2) = other.rows[c];
                (c2, (e + e2) % self.modulus)
            })
            .collect();
        OperatorMatrix {
            modulus: self.modulus,
            rows,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.rows.iter().enumerate().all(|(x, &(c, e))| c == x && e == 0)
    }

    /// Dense rendering with `.` for absent entries.
    pub fn render(&self) -> String {
        let n = self.dim();
        let mut out = String::new();
        for &(c, e) in &self.rows {
            let line: Vec<String> = (0..n)
                .map(|j| if j == c { e.to_string() } else { ".".into() })
                .collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

pub fn operator_matrix(g: &PhaseGroupElement, chi: &AdditiveCharacter) -> Result<OperatorMatrix> {
    let space = g.space();
    if space.size() > MATRIX_CAP {
        return Err(Error::capacity(
            "operator matrix",
            space.size() as u128,
            MATRIX_CAP as u128,
        ));
    }
    if chi.ring() != space.ring() {
        return Err(Error::DomainMismatch("character over a different ring".into()));
    }
    let rows = space
        .elements()
        .map(|x| (space.add(x, g.a), chi.exponent(g.psi.at(x))))
        .collect();
    Ok(OperatorMatrix {
        modulus: chi.modulus(),
        rows,
    })
}

#[derive(Clone, Debug)]
pub struct ClosureResult {
    /// Sorted by canonical key.
    pub elements: Vec<PhaseGroupElement>,
    pub generator_count: usize,
    pub reached_fixpoint: bool,
    pub cap_hit: bool,
    pub max_phase_degree: usize,
    pub strategy: DefectStrategy,
    /// Strategy degree per element, parallel to `elements`.
    pub degrees: Vec<usize>,
    pub stratum_census: BTreeMap<usize, usize>,
}

impl ClosureResult {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn keys(&self) -> Vec<ElementKey> {
        self.elements.iter().map(|g| g.key()).collect()
    }

    pub fn contains(&self, g: &PhaseGroupElement) -> bool {
        self.elements
            .binary_search_by(|e| e.key().cmp(&g.key()))
            .is_ok()
    }
}

/// Group generated by `generators`, by breadth-first search over right
/// multiplication by generators and their inverses.
///
/// Each level's frontier is sorted by key and truncated in key order when
/// the cap would be exceeded, so the element set depends only on the
/// generator set and the cap.
pub fn closure(
    generators: &[PhaseGroupElement],
    cap: usize,
    strategy: DefectStrategy,
) -> Result<ClosureResult> {
    let first = generators
        .first()
        .ok_or_else(|| Error::Inadmissible("closure of an empty generator set".into()))?;
    let space = first.space().clone();
    for g in generators {
        first.psi.same_domain(&g.psi)?;
    }
    space.ensure_enumerable()?;

    // generator order is kept: it drives traversal order, never the result
    let mut step_keys = HashSet::new();
    let step: Vec<PhaseGroupElement> = generators
        .iter()
        .flat_map(|g| [g.clone(), invert(g)])
        .filter(|g| step_keys.insert(g.key()))
        .collect();

    let identity = PhaseGroupElement::identity(space.clone());
    let mut seen: HashSet<ElementKey> = HashSet::from([identity.key()]);
    let mut all = vec![identity.clone()];
    let mut frontier = vec![identity];
    let mut cap_hit = false;

    while !frontier.is_empty() {
        let mut candidates: Vec<(ElementKey, PhaseGroupElement)> = frontier
            .par_iter()
            .flat_map_iter(|x| step.iter().map(move |g| compose_unchecked(x, g)))
            .map(|e| (e.key(), e))
            .filter(|(k, _)| !seen.contains(k))
            .collect();
        candidates.par_sort_unstable_by(|a, b| a.0.cmp(&b.0));
        candidates.dedup_by(|a, b| a.0 == b.0);
        let room = cap.saturating_sub(all.len());
        if candidates.len() > room {
            candidates.truncate(room);
            cap_hit = true;
        }
        frontier = Vec::with_capacity(candidates.len());
        for (k, e) in candidates {
            seen.insert(k);
            all.push(e.clone());
            frontier.push(e);
        }
        if cap_hit {
            break;
        }
    }

    finish_closure(all, generators.len(), !cap_hit, cap_hit, strategy)
}

/// Rebuilds a closure result from a stored element list.
pub fn closure_from_elements(
    elements: Vec<PhaseGroupElement>,
    generator_count: usize,
    reached_fixpoint: bool,
    strategy: DefectStrategy,
) -> Result<ClosureResult> {
    finish_closure(elements, generator_count, reached_fixpoint, !reached_fixpoint, strategy)
}

fn finish_closure(
    mut elements: Vec<PhaseGroupElement>,
    generator_count: usize,
    reached_fixpoint: bool,
    cap_hit: bool,
    strategy: DefectStrategy,
) -> Result<ClosureResult> {
    elements.par_sort_by_cached_key(|g| g.key());
    let (degrees, additive): (Vec<usize>, Vec<usize>) = {
        let distinct: HashMap<&[Elem], (usize, usize)> = {
            let mut tables: Vec<&PhaseFunction> = elements.iter().map(|g| &g.psi).collect();
            tables.sort_by(|a, b| a.table().cmp(b.table()));
            tables.dedup_by(|a, b| a.table() == b.table());
            tables
                .par_iter()
                .map(|psi| {
                    Ok((
                        psi.table(),
                        (defect_degree(psi, strategy)?, additive_degree_fast(psi)?),
                    ))
                })
                .collect::<Result<_>>()?
        };
        elements.iter().map(|g| distinct[g.psi.table()]).unzip()
    };
    let mut stratum_census = BTreeMap::new();
    for &d in &degrees {
        *stratum_census.entry(d).or_insert(0) += 1;
    }
    Ok(ClosureResult {
        generator_count,
        reached_fixpoint,
        cap_hit,
        max_phase_degree: additive.into_iter().max().unwrap_or(0),
        strategy,
        degrees,
        stratum_census,
        elements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{iterated_difference, DifferenceMethod};
    use crate::chars::find_generating_character;
    use crate::phase::phase_from_poly;
    use crate::ring::build_ring;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn space(n: usize) -> Arc<ModuleSpace> {
        ModuleSpace::new(Arc::new(build_ring(&"chain:2:2".parse().unwrap()).unwrap()), n).unwrap()
    }

    fn random_element(a: &Arc<ModuleSpace>, rng: &mut ChaCha8Rng) -> PhaseGroupElement {
        let q = a.ring().order();
        let table = (0..a.size()).map(|_| rng.gen_range(0..q) as Elem).collect();
        let psi = PhaseFunction::new(a.clone(), table).unwrap();
        PhaseGroupElement::new(psi, rng.gen_range(0..a.size())).unwrap()
    }

    #[test]
    fn translations_compose_additively() {
        let a = space(2);
        for x in a.elements() {
            for y in a.elements() {
                let t = compose(
                    &PhaseGroupElement::translation(a.clone(), x),
                    &PhaseGroupElement::translation(a.clone(), y),
                )
                .unwrap();
                assert_eq!(t, PhaseGroupElement::translation(a.clone(), a.add(x, y)));
            }
        }
    }

    #[test]
    fn phase_and_translation_do_not_commute() {
        let a = space(2);
        let psi = phase_from_poly(&"2*x1x2".parse().unwrap(), &a).unwrap();
        let m = PhaseGroupElement::phase(psi.clone());
        let h = a.encode(&[1, 1]);
        let t = PhaseGroupElement::translation(a.clone(), h);
        let mt = compose(&m, &t).unwrap();
        let tm = compose(&t, &m).unwrap();
        assert_eq!(mt.psi(), &psi);
        assert_eq!(tm.psi(), &psi.translate(h));
        assert_eq!(tm.psi().sub(mt.psi()), psi.difference(h));
    }

    #[test]
    fn group_laws_on_random_elements() {
        let a = space(2);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let id = PhaseGroupElement::identity(a.clone());
        for _ in 0..50 {
            let (g, h, k) = (
                random_element(&a, &mut rng),
                random_element(&a, &mut rng),
                random_element(&a, &mut rng),
            );
            assert_eq!(compose(&g, &id).unwrap(), g);
            assert_eq!(compose(&id, &g).unwrap(), g);
            assert!(compose(&g, &invert(&g)).unwrap().is_identity());
            assert!(compose(&invert(&g), &g).unwrap().is_identity());
            let left = compose(&compose(&g, &h).unwrap(), &k).unwrap();
            let right = compose(&g, &compose(&h, &k).unwrap()).unwrap();
            assert_eq!(left, right);
            assert_eq!(PhaseGroupElement::from_key(&a, &g.key()).unwrap(), g);
        }
    }

    #[test]
    fn commutators_are_signed_differences() {
        let a = space(2);
        let ring = a.ring().clone();
        let psi = phase_from_poly(&"2*x1x2".parse().unwrap(), &a).unwrap();
        let g = PhaseGroupElement::phase(psi.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..40 {
            let k = rng.gen_range(1..=3);
            let hs: Vec<usize> = (0..k).map(|_| rng.gen_range(0..a.size())).collect();
            let c = iterated_commutator(&g, &hs).unwrap();
            let d = iterated_difference(&psi, &hs, DifferenceMethod::Recursive).unwrap();
            let expected = if k % 2 == 1 { d.neg() } else { d };
            assert_eq!(c.translation_part(), 0);
            assert_eq!(c.psi(), &expected);
            if k >= 2 {
                assert!(c.is_scalar());
            }
        }
        let _ = ring;
        let t = PhaseGroupElement::translation(a.clone(), 5);
        assert!(translation_commutator(&t, 6).unwrap().is_identity());
    }

    #[test]
    fn matrices_realize_composition() {
        let a = space(1);
        let (chi, _) = find_generating_character(a.ring());
        let chi = chi.unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let g = random_element(&a, &mut rng);
            let h = random_element(&a, &mut rng);
            let gh = compose(&g, &h).unwrap();
            let mg = operator_matrix(&g, &chi).unwrap();
            let mh = operator_matrix(&h, &chi).unwrap();
            assert_eq!(mg.multiply(&mh), operator_matrix(&gh, &chi).unwrap());
        }
        let id = PhaseGroupElement::identity(a.clone());
        assert!(operator_matrix(&id, &chi).unwrap().is_identity());
    }

    #[test]
    fn matrix_examples() {
        let a = space(2);
        let (chi, _) = find_generating_character(a.ring());
        let chi = chi.unwrap();
        let psi = phase_from_poly(&"2*x1x2".parse().unwrap(), &a).unwrap();
        let m = operator_matrix(&PhaseGroupElement::phase(psi.clone()), &chi).unwrap();
        for (x, &(c, e)) in m.rows.iter().enumerate() {
            assert_eq!(c, x);
            assert_eq!(e, u32::from(psi.at(x) == 2));
        }
        // χ kills F₂·1, so a {0,1}-valued phase acts trivially ...
        let ring = a.ring().clone();
        let residue = PhaseFunction::from_fn(a.clone(), |x| {
            ring.mul(a.coord(x, 0) % 2, a.coord(x, 1) % 2)
        })
        .unwrap();
        assert!(operator_matrix(&PhaseGroupElement::phase(residue), &chi)
            .unwrap()
            .is_identity());
        // ... but x₁x₂ itself reaches u, e.g. at (1,u)
        let full = phase_from_poly(&"x1x2".parse().unwrap(), &a).unwrap();
        assert_eq!(full.at(a.encode(&[1, 2])), 2);
        assert!(!operator_matrix(&PhaseGroupElement::phase(full), &chi)
            .unwrap()
            .is_identity());
    }

    #[test]
    fn translation_subgroup() {
        let a = space(1);
        let gens: Vec<_> = a
            .elements()
            .map(|x| PhaseGroupElement::translation(a.clone(), x))
            .collect();
        let c = closure(&gens, DEFAULT_CLOSURE_CAP, DefectStrategy::Default).unwrap();
        assert_eq!(c.len(), 4);
        assert!(c.reached_fixpoint && !c.cap_hit);
        assert_eq!(c.stratum_census, BTreeMap::from([(0, 4)]));
    }

    #[test]
    fn closure_is_order_independent_and_closed() {
        let a = space(1);
        let psi = phase_from_poly(&"x1x1".parse().unwrap(), &a).unwrap();
        let mut gens = vec![
            PhaseGroupElement::phase(psi),
            PhaseGroupElement::translation(a.clone(), 1),
            PhaseGroupElement::translation(a.clone(), 2),
        ];
        let c1 = closure(&gens, DEFAULT_CLOSURE_CAP, DefectStrategy::Default).unwrap();
        gens.reverse();
        let c2 = closure(&gens, DEFAULT_CLOSURE_CAP, DefectStrategy::Default).unwrap();
        assert_eq!(c1.keys(), c2.keys());
        for g in &c1.elements {
            assert!(c1.contains(&invert(g)));
            for h in &c1.elements {
                assert!(c1.contains(&compose(g, h).unwrap()));
            }
        }
        let capped = closure(&gens, 5, DefectStrategy::Default).unwrap();
        assert!(capped.cap_hit && !capped.reached_fixpoint);
        assert_eq!(capped.len(), 5);
        assert_eq!(
            capped.keys(),
            closure(&gens, 5, DefectStrategy::Default).unwrap().keys()
        );
    }
}
