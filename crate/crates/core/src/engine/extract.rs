//! Phase extraction: generators `{M_φ} ∪ {T_a}`, their closure, and the
//! defect filtration on it.

use std::collections::{BTreeMap, HashSet};
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::admissibility::{check_admissibility, AdmissibilityReport};
use super::datum::{Members, PhaseDatum};
use super::filtration::{compute_filtration, Filtration};
use crate::cache;
use crate::calculus::{additive_degree_fast, degree_at_most, DefectStrategy};
use crate::error::{Error, Result};
use crate::group::{
    closure, closure_from_elements, compose, invert, operator_matrix, ClosureResult,
    PhaseGroupElement, DEFAULT_CLOSURE_CAP, MATRIX_CAP,
};
use crate::phase::{phase_from_poly, PhaseFunction, PolynomialSpec, MAX_MONOMIAL_SIZE};

#[derive(Clone, Debug)]
pub struct ExtractOptions {
    pub cap: usize,
    pub seed: u64,
    /// Random words sampled in structural mode.
    pub samples: usize,
    /// Filtration on the family only, without operators.
    pub weak: bool,
    /// Shuffle the generator presentation with this seed.
    pub shuffle: Option<u64>,
    pub cache_dir: Option<PathBuf>,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            cap: DEFAULT_CLOSURE_CAP,
            seed: 0,
            samples: 1500,
            weak: false,
            shuffle: None,
            cache_dir: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosureMode {
    /// Full breadth-first closure to a fixpoint.
    Exhaustive,
    /// Closed-form description verified on random words.
    Structural,
    /// Family-level filtration, no operator realization.
    Weak,
}

impl ClosureMode {
    pub fn name(&self) -> &'static str {
        match self {
            ClosureMode::Exhaustive => "exhaustive",
            ClosureMode::Structural => "structural",
            ClosureMode::Weak => "weak",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ClosureSummary {
    pub size: usize,
    pub generator_count: usize,
    pub reached_fixpoint: bool,
    pub cap_hit: bool,
    pub stratum_census: BTreeMap<usize, usize>,
}

/// Evidence for the closed-form closure law in structural mode.
#[derive(Clone, Debug)]
pub struct StructuralCheck {
    pub reason: String,
    pub degree_bound: usize,
    pub words_checked: usize,
    pub law_checks: usize,
    pub violations: Vec<String>,
}

impl StructuralCheck {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct ExtractedPhase {
    pub datum: PhaseDatum,
    pub strategy: DefectStrategy,
    pub options: ExtractOptions,
    pub admissibility: AdmissibilityReport,
    /// Generators in presentation order.
    pub generators: Vec<PhaseGroupElement>,
    pub mode: ClosureMode,
    pub closure: Option<ClosureSummary>,
    pub structural: Option<StructuralCheck>,
    /// The closure (exhaustive), the sampled part of it (structural), or
    /// the family as phase operators (weak); sorted by key.
    pub elements: Vec<PhaseGroupElement>,
    pub filtration: Filtration,
    pub max_phase_degree: usize,
    pub cache_hit: bool,
}

impl ExtractedPhase {
    pub fn termination_depth(&self) -> usize {
        self.filtration.depth
    }

    pub fn steps(&self) -> usize {
        self.filtration.steps()
    }

    pub fn element(&self, key: &[u8]) -> Option<&PhaseGroupElement> {
        self.elements
            .binary_search_by(|g| g.key().as_slice().cmp(key))
            .ok()
            .map(|i| &self.elements[i])
    }

    /// One description per level: the least-key element there, if any.
    pub fn witness_descriptions(&self) -> Vec<Option<String>> {
        self.filtration
            .witnesses
            .iter()
            .map(|w| {
                w.as_ref()
                    .and_then(|k| self.element(k))
                    .map(|g| g.describe())
            })
            .collect()
    }

    /// Fixpoint reached, or the structural law held on every sample.
    pub fn closure_verified(&self) -> bool {
        match self.mode {
            ClosureMode::Exhaustive => self.closure.as_ref().is_some_and(|c| c.reached_fixpoint),
            ClosureMode::Structural => self.structural.as_ref().is_some_and(|s| s.passed()),
            ClosureMode::Weak => true,
        }
    }
}

/// Checks admissibility, then extracts. Strong admissibility is required
/// unless `opts.weak` is set.
pub fn extract_phase(
    datum: &PhaseDatum,
    strategy: DefectStrategy,
    opts: &ExtractOptions,
) -> Result<ExtractedPhase> {
    let admissibility = check_admissibility(datum, opts.seed)?;
    if !admissibility.weak() {
        let failing: Vec<String> = admissibility
            .clauses()
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("{}: {}", c.name, c.detail))
            .collect();
        return Err(Error::Inadmissible(failing.join("; ")));
    }
    if !opts.weak && !admissibility.strong() {
        return Err(Error::Inadmissible(format!(
            "{}: no generating character, so no operator realization (weak mode only)",
            datum.ring.spec()
        )));
    }
    extract_with(datum, strategy, opts, admissibility)
}

/// Extraction without the admissibility gate; used for extensions, which
/// need not be pullback closed.
pub fn extract_with(
    datum: &PhaseDatum,
    strategy: DefectStrategy,
    opts: &ExtractOptions,
    admissibility: AdmissibilityReport,
) -> Result<ExtractedPhase> {
    let bound = admissibility
        .degree_bound
        .ok_or_else(|| Error::Inadmissible("family has no degree bound".into()))?;
    let members = datum.members()?;
    let mut phase = ExtractedPhase {
        datum: datum.clone(),
        strategy,
        options: opts.clone(),
        admissibility,
        generators: Vec::new(),
        mode: ClosureMode::Weak,
        closure: None,
        structural: None,
        elements: Vec::new(),
        filtration: Filtration::from_degrees(strategy, []),
        max_phase_degree: 0,
        cache_hit: false,
    };

    if opts.weak {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let phases = match members {
            Members::Enumerated(list) => list,
            Members::Structural { .. } => {
                let mut list = witness_candidates(datum, bound);
                for _ in 0..opts.samples {
                    list.push(datum.sample_member(&mut rng)?);
                }
                list
            }
        };
        phase.generators = dedup_in_order(phases.into_iter().map(PhaseGroupElement::phase));
        let elements = sorted_unique(phase.generators.clone());
        return finish(phase, elements);
    }

    match members {
        Members::Enumerated(list) => {
            let mut gens = list
                .into_iter()
                .map(PhaseGroupElement::phase)
                .chain(
                    datum
                        .space
                        .elements()
                        .map(|a| PhaseGroupElement::translation(datum.space.clone(), a)),
                )
                .collect::<Vec<_>>();
            shuffle(&mut gens, opts.shuffle);
            phase.generators = dedup_in_order(gens);
            let (closure, cache_hit) = cached_closure(&phase.generators, opts, strategy)?;
            phase.cache_hit = cache_hit;
            if closure.cap_hit {
                let reason = format!(
                    "closure cap {} reached; verified through the closed-form law",
                    opts.cap
                );
                return structural(phase, bound, reason);
            }
            phase.mode = ClosureMode::Exhaustive;
            phase.max_phase_degree = closure.max_phase_degree;
            phase.closure = Some(ClosureSummary {
                size: closure.len(),
                generator_count: closure.generator_count,
                reached_fixpoint: closure.reached_fixpoint,
                cap_hit: closure.cap_hit,
                stratum_census: closure.stratum_census.clone(),
            });
            phase.filtration = Filtration::from_degrees(
                strategy,
                closure.elements.iter().map(|g| g.key()).zip(closure.degrees.iter().copied()),
            );
            phase.elements = closure.elements;
            Ok(phase)
        }
        Members::Structural { .. } => {
            let reason = "family has more than 2^20 candidate tables; verified through the closed-form law"
                .to_string();
            structural(phase, bound, reason)
        }
    }
}

fn shuffle(gens: &mut [PhaseGroupElement], seed: Option<u64>) {
    if let Some(seed) = seed {
        gens.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
}

fn dedup_in_order(items: impl IntoIterator<Item = PhaseGroupElement>) -> Vec<PhaseGroupElement> {
    let mut seen = HashSet::new();
    items.into_iter().filter(|g| seen.insert(g.key())).collect()
}

fn sorted_unique(mut items: Vec<PhaseGroupElement>) -> Vec<PhaseGroupElement> {
    items.par_sort_by_cached_key(|g| g.key());
    items.dedup_by(|a, b| a.key() == b.key());
    items
}

fn finish(mut phase: ExtractedPhase, elements: Vec<PhaseGroupElement>) -> Result<ExtractedPhase> {
    phase.filtration = compute_filtration(&elements, phase.strategy)?;
    phase.max_phase_degree = max_degree(&elements)?;
    phase.elements = elements;
    Ok(phase)
}

fn max_degree(elements: &[PhaseGroupElement]) -> Result<usize> {
    elements
        .par_iter()
        .map(|g| additive_degree_fast(g.psi()))
        .try_reduce(|| 0, |a, b| Ok(a.max(b)))
}

fn cached_closure(
    gens: &[PhaseGroupElement],
    opts: &ExtractOptions,
    strategy: DefectStrategy,
) -> Result<(ClosureResult, bool)> {
    let Some(dir) = &opts.cache_dir else {
        return Ok((closure(gens, opts.cap, strategy)?, false));
    };
    let space = gens[0].space();
    let digest = cache::generator_digest(gens, opts.cap);
    if let Some((elements, fixpoint)) = cache::load(dir, space, &digest, opts.cap)? {
        return Ok((
            closure_from_elements(elements, gens.len(), fixpoint, strategy)?,
            true,
        ));
    }
    let c = closure(gens, opts.cap, strategy)?;
    cache::store(dir, &digest, opts.cap, &c)?;
    Ok((c, false))
}

/// Constants and coefficient multiples of monomials of size ≤ `bound`
/// that belong to the family; they seed every level a sample might miss.
pub fn witness_candidates(datum: &PhaseDatum, bound: usize) -> Vec<PhaseFunction> {
    let ring = &datum.ring;
    let n = datum.rank();
    let mut out = Vec::new();
    let mut push = |phi: PhaseFunction| {
        if datum.contains(&phi) && !out.contains(&phi) {
            out.push(phi);
        }
    };
    for c in ring.elements() {
        push(PhaseFunction::constant(datum.space.clone(), c));
    }
    let mut monomials: Vec<Vec<usize>> = vec![vec![]];
    for size in 1..=bound.min(MAX_MONOMIAL_SIZE) {
        let mut next = Vec::new();
        for m in monomials.iter().filter(|m| m.len() == size - 1) {
            let start = m.last().copied().unwrap_or(0);
            for p in start..n {
                let mut mm = m.clone();
                mm.push(p);
                next.push(mm);
            }
        }
        monomials.extend(next);
    }
    for m in monomials.iter().filter(|m| !m.is_empty()) {
        for c in ring.elements().filter(|&c| c != 0) {
            if let Ok(phi) = phase_from_poly(&PolynomialSpec::monomial(c, m), &datum.space) {
                push(phi);
            }
        }
    }
    for e in &datum.extras {
        push(e.clone());
    }
    out
}

const MAX_WORD: usize = 6;

fn structural(mut phase: ExtractedPhase, bound: usize, reason: String) -> Result<ExtractedPhase> {
    let datum = phase.datum.clone();
    let opts = phase.options.clone();
    let space = datum.space.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x57c7);

    // generator sample: seeded witnesses, extras, sampled members, and
    // translations by additive generators of A
    let mut phases = witness_candidates(&datum, bound);
    for _ in 0..(opts.samples / 10).clamp(16, 200) {
        phases.push(datum.sample_member(&mut rng)?);
    }
    let mut gens: Vec<PhaseGroupElement> = phases
        .into_iter()
        .map(PhaseGroupElement::phase)
        .chain(
            space
                .group_generators()
                .into_iter()
                .map(|g| PhaseGroupElement::translation(space.clone(), g)),
        )
        .collect();
    shuffle(&mut gens, opts.shuffle);
    phase.generators = dedup_in_order(gens);

    // words are drawn over the key-sorted generators, so the sample depends
    // on the generator set only, not on its presentation
    let canonical = sorted_unique(phase.generators.clone());
    let letters: Vec<PhaseGroupElement> = canonical
        .iter()
        .flat_map(|g| [g.clone(), invert(g)])
        .collect();
    let mut sample = canonical.clone();
    sample.push(PhaseGroupElement::identity(space.clone()));
    for _ in 0..opts.samples {
        let len = rng.gen_range(1..=MAX_WORD);
        let mut w = letters[rng.gen_range(0..letters.len())].clone();
        for _ in 1..len {
            w = compose(&w, &letters[rng.gen_range(0..letters.len())])?;
        }
        // a random translation keeps every coset represented
        let t = PhaseGroupElement::translation(space.clone(), rng.gen_range(0..space.size()));
        sample.push(compose(&w, &t)?);
    }
    let sample = sorted_unique(sample);

    // the closed-form law: every word stays in degree ≤ bound; group laws
    // and the matrix realization hold on random pairs
    let mut violations = Vec::new();
    for g in &sample {
        if !degree_at_most(g.psi(), bound) {
            violations.push(format!("word leaves degree <= {bound}: {}", g.describe()));
            break;
        }
    }
    let chi = datum.character()?;
    let mut law_checks = 0;
    for _ in 0..200 {
        let g = &sample[rng.gen_range(0..sample.len())];
        let h = &sample[rng.gen_range(0..sample.len())];
        let k = &sample[rng.gen_range(0..sample.len())];
        law_checks += 1;
        let gh = compose(g, h)?;
        let expected_psi = g.psi().add(&h.psi().translate(g.translation_part()));
        if gh.psi() != &expected_psi
            || !compose(g, &invert(g))?.is_identity()
            || compose(&gh, k)? != compose(g, &compose(h, k)?)?
            || !degree_at_most(gh.psi(), bound)
        {
            violations.push(format!("law failure at {} * {}", g.describe(), h.describe()));
            break;
        }
        if let Some(chi) = chi.as_ref().filter(|_| space.size() <= MATRIX_CAP) {
            if operator_matrix(g, chi)?.multiply(&operator_matrix(h, chi)?)
                != operator_matrix(&gh, chi)?
            {
                violations.push(format!("matrix realization differs at {}", g.describe()));
                break;
            }
        }
    }
    phase.mode = ClosureMode::Structural;
    phase.structural = Some(StructuralCheck {
        reason,
        degree_bound: bound,
        words_checked: opts.samples,
        law_checks,
        violations,
    });
    finish(phase, sample)
}
