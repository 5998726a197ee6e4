//! Strategy comparison and presentation equivalence.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use super::extract::ExtractedPhase;
use crate::calculus::{additive_degree_fast, defect_degree, is_additive, DefectStrategy};
use crate::error::{Error, Result};
use crate::group::{ElementKey, PhaseGroupElement};
use crate::ring::Elem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum PhaseClass {
    Additive,
    Constant,
    Other,
}

impl PhaseClass {
    pub fn name(&self) -> &'static str {
        match self {
            PhaseClass::Additive => "additive",
            PhaseClass::Constant => "constant",
            PhaseClass::Other => "other",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Divergence {
    pub key: ElementKey,
    pub element: String,
    /// One entry per compared strategy; `None` where it is undefined.
    pub values: Vec<Option<usize>>,
    pub additive_degree: usize,
    pub class: PhaseClass,
}

#[derive(Clone, Debug)]
pub struct StrategyComparison {
    pub strategies: Vec<DefectStrategy>,
    pub element_count: usize,
    /// Per strategy: graded sizes over the elements where it is defined.
    pub graded_sizes: Vec<Vec<usize>>,
    /// Per strategy: elements on which it is undefined.
    pub undefined: Vec<usize>,
    /// Per strategy after the first: level `k` ↦ whether `{deg = k}` agrees
    /// with the first strategy's level set.
    pub level_agreement: Vec<BTreeMap<usize, bool>>,
    pub divergences: Vec<Divergence>,
    /// Default and commutator agree on every element of additive degree ≥ 2.
    pub agree_above_linear: Option<bool>,
    /// Every default/commutator divergence is additive or constant.
    pub divergences_confined: Option<bool>,
}

struct PhaseFacts {
    values: Vec<Option<usize>>,
    additive_degree: usize,
    class: PhaseClass,
}

pub fn compare_strategies(
    elements: &[PhaseGroupElement],
    strategies: &[DefectStrategy],
) -> Result<StrategyComparison> {
    if strategies.len() < 2 {
        return Err(Error::Parse("comparison needs at least two strategies".into()));
    }
    let mut distinct: HashMap<&[Elem], &PhaseGroupElement> = HashMap::new();
    for g in elements {
        distinct.entry(g.psi().table()).or_insert(g);
    }
    let facts: HashMap<&[Elem], PhaseFacts> = distinct
        .into_par_iter()
        .map(|(t, g)| {
            let psi = g.psi();
            let values = strategies
                .iter()
                .map(|&s| defect_degree(psi, s).ok())
                .collect();
            let class = if is_additive(psi) {
                PhaseClass::Additive
            } else if psi.is_constant() {
                PhaseClass::Constant
            } else {
                PhaseClass::Other
            };
            Ok((
                t,
                PhaseFacts {
                    values,
                    additive_degree: additive_degree_fast(psi)?,
                    class,
                },
            ))
        })
        .collect::<Result<_>>()?;

    let mut graded_sizes = vec![Vec::new(); strategies.len()];
    let mut undefined = vec![0; strategies.len()];
    let mut divergences = Vec::new();
    let mut level_sets: Vec<BTreeMap<usize, Vec<ElementKey>>> = vec![BTreeMap::new(); strategies.len()];
    let mut sorted: Vec<&PhaseGroupElement> = elements.iter().collect();
    sorted.sort_by_cached_key(|g| g.key());
    for g in sorted {
        let f = &facts[g.psi().table()];
        let key = g.key();
        for (i, v) in f.values.iter().enumerate() {
            match v {
                Some(d) => {
                    if graded_sizes[i].len() <= *d {
                        graded_sizes[i].resize(d + 1, 0);
                    }
                    graded_sizes[i][*d] += 1;
                    level_sets[i].entry(*d).or_default().push(key.clone());
                }
                None => undefined[i] += 1,
            }
        }
        let defined: Vec<usize> = f.values.iter().flatten().copied().collect();
        if defined.windows(2).any(|w| w[0] != w[1]) {
            divergences.push(Divergence {
                element: g.describe(),
                key,
                values: f.values.clone(),
                additive_degree: f.additive_degree,
                class: f.class,
            });
        }
    }

    let level_agreement = (1..strategies.len())
        .map(|i| {
            let levels = level_sets[0].keys().chain(level_sets[i].keys()).copied();
            levels
                .map(|k| (k, level_sets[0].get(&k) == level_sets[i].get(&k)))
                .collect()
        })
        .collect();

    let pos = |s| strategies.iter().position(|&t| t == s);
    let (agree_above_linear, divergences_confined) =
        match (pos(DefectStrategy::Default), pos(DefectStrategy::Commutator)) {
            (Some(d), Some(c)) => {
                let mut agree = true;
                let mut confined = true;
                for f in facts.values() {
                    if f.values[d] != f.values[c] {
                        if f.additive_degree >= 2 {
                            agree = false;
                        }
                        if f.class == PhaseClass::Other {
                            confined = false;
                        }
                    }
                }
                (Some(agree), Some(confined))
            }
            _ => (None, None),
        };

    Ok(StrategyComparison {
        strategies: strategies.to_vec(),
        element_count: elements.len(),
        graded_sizes,
        undefined,
        level_agreement,
        divergences,
        agree_above_linear,
        divergences_confined,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub comparable: bool,
    pub equivalent: bool,
    pub graded_sizes: (Vec<usize>, Vec<usize>),
    /// Keys present on one side only.
    pub unmatched: usize,
    /// Keys present on both sides in different strata.
    pub stratum_mismatches: usize,
    pub detail: String,
}

/// Equivalent iff graded sizes agree and matching by canonical key is a
/// stratum-preserving bijection.
pub fn equivalence_check(p1: &ExtractedPhase, p2: &ExtractedPhase) -> EquivalenceReport {
    let sizes = (
        p1.filtration.graded_sizes.clone(),
        p2.filtration.graded_sizes.clone(),
    );
    if p1.datum.ring.spec() != p2.datum.ring.spec() || p1.datum.rank() != p2.datum.rank() {
        return EquivalenceReport {
            comparable: false,
            equivalent: false,
            graded_sizes: sizes,
            unmatched: 0,
            stratum_mismatches: 0,
            detail: format!(
                "not comparable: {} n={} vs {} n={}",
                p1.datum.ring.spec(),
                p1.datum.rank(),
                p2.datum.ring.spec(),
                p2.datum.rank()
            ),
        };
    }
    let a = &p1.filtration.strata;
    let b = &p2.filtration.strata;
    let unmatched = a.keys().filter(|k| !b.contains_key(*k)).count()
        + b.keys().filter(|k| !a.contains_key(*k)).count();
    let stratum_mismatches = a
        .iter()
        .filter(|(k, d)| b.get(*k).is_some_and(|e| e != *d))
        .count();
    let equivalent = sizes.0 == sizes.1 && unmatched == 0 && stratum_mismatches == 0;
    let detail = if equivalent {
        format!("{} elements matched stratum by stratum", a.len())
    } else if sizes.0 != sizes.1 {
        format!("graded sizes differ: {:?} vs {:?}", sizes.0, sizes.1)
    } else {
        format!("{unmatched} unmatched keys, {stratum_mismatches} stratum mismatches")
    };
    EquivalenceReport {
        comparable: true,
        equivalent,
        graded_sizes: sizes,
        unmatched,
        stratum_mismatches,
        detail,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{extract_phase, ExtractOptions, PhaseDatum};
    use crate::phase::phase_from_poly;

    fn extract(n: usize, fam: &str, shuffle: Option<u64>) -> ExtractedPhase {
        let d = PhaseDatum::new(&"chain:2:2".parse().unwrap(), n, fam.parse().unwrap()).unwrap();
        let opts = ExtractOptions {
            shuffle,
            ..Default::default()
        };
        extract_phase(&d, DefectStrategy::Default, &opts).unwrap()
    }

    #[test]
    fn default_and_commutator_on_the_radical_line() {
        let p = extract(1, "deg2", None);
        let c = compare_strategies(&p.elements, &[DefectStrategy::Default, DefectStrategy::Commutator])
            .unwrap();
        assert_eq!(c.agree_above_linear, Some(true));
        assert_eq!(c.divergences_confined, Some(true));
        assert!(!c.divergences.is_empty());
        assert!(c.divergences.iter().all(|d| d.class != PhaseClass::Other));
        assert!(c.level_agreement[0][&2]);
        assert_eq!(c.graded_sizes[0], vec![64, 192, 768]);
    }

    #[test]
    fn single_additive_phase_diverges() {
        let p = extract(1, "deg2", None);
        let a = p.datum.space.clone();
        let lin = PhaseGroupElement::phase(phase_from_poly(&"x1".parse().unwrap(), &a).unwrap());
        let c = compare_strategies(&[lin], &[DefectStrategy::Default, DefectStrategy::Commutator])
            .unwrap();
        assert_eq!(c.divergences.len(), 1);
        assert_eq!(c.divergences[0].values, vec![Some(0), Some(1)]);
        assert_eq!(c.divergences[0].class, PhaseClass::Additive);
    }

    #[test]
    fn equivalences() {
        let base = extract(1, "deg2", None);
        let shuffled = extract(1, "deg2", Some(9));
        assert!(equivalence_check(&base, &shuffled).equivalent);
        assert!(equivalence_check(&base, &base).equivalent);
        let linear = extract(1, "deg1", None);
        let r = equivalence_check(&base, &linear);
        assert!(r.comparable && !r.equivalent);
        let plane = extract(2, "deg1", None);
        assert!(!equivalence_check(&base, &plane).comparable);
    }
}
