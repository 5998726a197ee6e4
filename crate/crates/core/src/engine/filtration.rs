//! Defect filtrations `𝒫₀ ⊆ 𝒫₁ ⊆ …` as sublevel sets of a degree function.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;

use crate::calculus::{defect_degree, DefectStrategy};
use crate::error::Result;
use crate::group::{ElementKey, PhaseGroupElement};
use crate::ring::Elem;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Filtration {
    pub strategy: DefectStrategy,
    /// Degree of every element, by canonical key.
    pub strata: BTreeMap<ElementKey, usize>,
    /// Termination depth: least `N` with `𝒫_N` everything.
    pub depth: usize,
    /// `graded_sizes[k] = #{deg = k}` for `k ≤ depth`.
    pub graded_sizes: Vec<usize>,
    /// Least key at each level, when the level is inhabited.
    pub witnesses: Vec<Option<ElementKey>>,
}

impl Filtration {
    pub fn from_degrees(
        strategy: DefectStrategy,
        degrees: impl IntoIterator<Item = (ElementKey, usize)>,
    ) -> Self {
        let strata: BTreeMap<ElementKey, usize> = degrees.into_iter().collect();
        let depth = strata.values().copied().max().unwrap_or(0);
        let mut graded_sizes = vec![0; depth + 1];
        let mut witnesses: Vec<Option<ElementKey>> = vec![None; depth + 1];
        // BTreeMap iteration is in key order, so the first hit is the least key
        for (key, &d) in &strata {
            graded_sizes[d] += 1;
            if witnesses[d].is_none() {
                witnesses[d] = Some(key.clone());
            }
        }
        Filtration {
            strategy,
            strata,
            depth,
            graded_sizes,
            witnesses,
        }
    }

    pub fn len(&self) -> usize {
        self.strata.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strata.is_empty()
    }

    /// Levels `k ≥ 1` that are inhabited, i.e. the strict inclusions
    /// `𝒫_{k−1} ⊊ 𝒫_k`.
    pub fn strict_steps(&self) -> Vec<usize> {
        (1..self.graded_sizes.len())
            .filter(|&k| self.graded_sizes[k] > 0)
            .collect()
    }

    /// Number of nontrivial steps in the filtration.
    pub fn steps(&self) -> usize {
        self.strict_steps().len()
    }

    pub fn sublevel(&self, k: usize) -> BTreeSet<&ElementKey> {
        self.strata
            .iter()
            .filter(|(_, &d)| d <= k)
            .map(|(key, _)| key)
            .collect()
    }

    pub fn degree_of(&self, key: &[u8]) -> Option<usize> {
        self.strata.get(key).copied()
    }

    /// Rebuilds every sublevel set from an independent evaluation of the
    /// degree function on `elements` and compares with the stored strata.
    pub fn verify_reconstruction(&self, elements: &[PhaseGroupElement]) -> Result<bool> {
        if elements.len() != self.strata.len() {
            return Ok(false);
        }
        let rebuilt: Vec<(ElementKey, usize)> = elements
            .par_iter()
            .map(|g| Ok((g.key(), defect_degree(g.psi(), self.strategy)?)))
            .collect::<Result<_>>()?;
        let max = rebuilt.iter().map(|(_, d)| *d).max().unwrap_or(0);
        if max != self.depth {
            return Ok(false);
        }
        Ok((0..=self.depth).all(|k| {
            let level: BTreeSet<&ElementKey> =
                rebuilt.iter().filter(|(_, d)| *d <= k).map(|(key, _)| key).collect();
            level == self.sublevel(k)
        }))
    }
}

/// Degrees of `elements` under `strategy`, evaluated once per distinct phase.
pub fn element_degrees(
    elements: &[PhaseGroupElement],
    strategy: DefectStrategy,
) -> Result<Vec<usize>> {
    let by_table: HashMap<&[Elem], usize> = elements
        .iter()
        .map(|g| (g.psi().table(), g))
        .collect::<HashMap<_, _>>()
        .into_par_iter()
        .map(|(t, g)| Ok((t, defect_degree(g.psi(), strategy)?)))
        .collect::<Result<_>>()?;
    Ok(elements.iter().map(|g| by_table[g.psi().table()]).collect())
}

pub fn compute_filtration(
    elements: &[PhaseGroupElement],
    strategy: DefectStrategy,
) -> Result<Filtration> {
    let degrees = element_degrees(elements, strategy)?;
    Ok(Filtration::from_degrees(
        strategy,
        elements.iter().map(|g| g.key()).zip(degrees),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::module::ModuleSpace;
    use crate::phase::{phase_from_poly, PhaseFunction};
    use crate::ring::build_ring;
    use std::sync::Arc;

    fn space() -> Arc<ModuleSpace> {
        ModuleSpace::new(Arc::new(build_ring(&"chain:2:2".parse().unwrap()).unwrap()), 2).unwrap()
    }

    #[test]
    fn translations_form_one_stratum() {
        let a = space();
        let elems: Vec<_> = a
            .elements()
            .map(|x| PhaseGroupElement::translation(a.clone(), x))
            .collect();
        let f = compute_filtration(&elems, DefectStrategy::Default).unwrap();
        assert_eq!(f.depth, 0);
        assert_eq!(f.graded_sizes, vec![16]);
        assert_eq!(f.steps(), 0);
        assert!(f.verify_reconstruction(&elems).unwrap());
    }

    #[test]
    fn three_levels_with_witnesses() {
        let a = space();
        let elems = vec![
            PhaseGroupElement::translation(a.clone(), 3),
            PhaseGroupElement::phase(PhaseFunction::constant(a.clone(), 2)),
            PhaseGroupElement::phase(phase_from_poly(&"2*x1x2".parse().unwrap(), &a).unwrap()),
        ];
        let f = compute_filtration(&elems, DefectStrategy::Default).unwrap();
        assert_eq!(f.graded_sizes, vec![1, 1, 1]);
        assert_eq!(f.strict_steps(), vec![1, 2]);
        for (k, w) in f.witnesses.iter().enumerate() {
            assert_eq!(w.as_ref(), Some(&elems[k].key()));
        }
        assert!(f.verify_reconstruction(&elems).unwrap());
        assert!(!f.verify_reconstruction(&elems[..2]).unwrap());
        let mut tampered = f.clone();
        *tampered.strata.get_mut(&elems[1].key()).unwrap() = 0;
        assert!(!tampered.verify_reconstruction(&elems).unwrap());
    }
}
