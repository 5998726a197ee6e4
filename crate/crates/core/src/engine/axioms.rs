//! Checks of the five structural axioms on an extracted phase.

use super::admissibility::{check_admissibility, hom_battery};
use super::compare::equivalence_check;
use super::datum::CharacterChoice;
use super::extract::{extract_with, ClosureMode, ExtractedPhase};
use super::Verdict;
use crate::calculus::defect_degree;
use crate::chars::generating_characters;
use crate::error::Result;
use crate::group::{compose, operator_matrix, MATRIX_CAP};
use crate::phase::pullback_phase;

#[derive(Clone, Debug)]
pub struct AxiomReport {
    /// Axioms I–V in order.
    pub verdicts: Vec<Verdict>,
    pub depth: usize,
    pub steps: usize,
    /// At most one nontrivial filtration step.
    pub collapsed: bool,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}

/// Generators whose pullbacks are probed for Axiom IV.
const FUNCTORIALITY_GENERATORS: usize = 300;

pub fn verify_axioms(phase: &ExtractedPhase) -> Result<AxiomReport> {
    let f = &phase.filtration;
    let depth = f.depth;

    // I: a degree for every element, and a finite filtration
    let total = f.len() == phase.elements.len() && !f.is_empty();
    let axiom1 = Verdict::check(
        "I canonical finite filtration",
        total,
        format!(
            "{} elements graded as {:?}, depth {depth}",
            f.len(),
            f.graded_sizes
        ),
    );

    // II: presentation changes give an equivalent extraction
    let mut opts = phase.options.clone();
    opts.shuffle = Some(phase.options.seed.wrapping_add(0x1f2e));
    let reshuffled = extract_with(&phase.datum, phase.strategy, &opts, phase.admissibility.clone())?;
    let shuffled_eq = equivalence_check(phase, &reshuffled);
    let mut axiom2 = Verdict::check(
        "II presentation insensitivity",
        shuffled_eq.equivalent,
        format!("shuffled generators: {}", shuffled_eq.detail),
    );
    let current = phase.datum.character()?.map(|c| c.index());
    let alternative = generating_characters(&phase.datum.ring)
        .into_iter()
        .find(|c| Some(c.index()) != current);
    match alternative {
        Some(chi) if phase.mode != ClosureMode::Weak => {
            let alt_datum = phase.datum.clone().with_character(CharacterChoice::Index(chi.index()));
            let alt_adm = check_admissibility(&alt_datum, phase.options.seed)?;
            let alt = extract_with(&alt_datum, phase.strategy, &phase.options, alt_adm)?;
            let eq = equivalence_check(phase, &alt);
            // the alternative realization must also be a faithful image of composition
            let mut realization_ok = true;
            if phase.datum.space.size() <= MATRIX_CAP {
                let n = phase.elements.len();
                for i in 0..n.min(40) {
                    let g = &phase.elements[(i * 7919) % n];
                    let h = &phase.elements[(i * 104729 + 1) % n];
                    let lhs = operator_matrix(g, &chi)?.multiply(&operator_matrix(h, &chi)?);
                    realization_ok &= lhs == operator_matrix(&compose(g, h)?, &chi)?;
                }
            }
            axiom2.pass &= eq.equivalent && realization_ok;
            axiom2.detail.push_str(&format!(
                "; character #{}: {}{}",
                chi.index(),
                eq.detail,
                if realization_ok { "" } else { "; matrix realization mismatch" }
            ));
        }
        _ => axiom2.detail.push_str("; no alternative generating character"),
    }

    // III: strata are exactly the sublevel sets of the degree function
    let rebuilt = f.verify_reconstruction(&phase.elements)?;
    let axiom3 = Verdict::check(
        "III strata ordered by defect degree",
        rebuilt,
        if rebuilt {
            "sublevel sets rebuilt from the degree function match".to_string()
        } else {
            "rebuilt sublevel sets differ from stored strata".to_string()
        },
    );

    // IV: pullback never raises the degree of a generator
    let homs = hom_battery(&phase.datum.space, 4, phase.options.seed ^ 0xf00d);
    let mut gens: Vec<_> = phase
        .generators
        .iter()
        .filter(|g| !g.psi().is_zero())
        .collect();
    gens.sort_by_cached_key(|g| g.key());
    gens.truncate(FUNCTORIALITY_GENERATORS);
    let mut axiom4 = Verdict::pass("IV defect is functorial");
    let mut probes = 0;
    'outer: for g in &gens {
        let k = defect_degree(g.psi(), phase.strategy)?;
        for (label, hom) in &homs {
            probes += 1;
            let pulled = pullback_phase(hom, g.psi())?;
            let k2 = defect_degree(&pulled, phase.strategy)?;
            if k2 > k {
                axiom4 = Verdict::fail(
                    "IV defect is functorial",
                    format!("pullback along {label} raised degree {k} to {k2}"),
                )
                .with_witness(g.describe());
                break 'outer;
            }
        }
    }
    if axiom4.pass {
        axiom4.detail = format!("{probes} generator pullbacks stay in their stratum");
    }

    // V: finite depth and a verified closure
    let verified = phase.closure_verified();
    let axiom5 = Verdict::check(
        "V defect degree is finite",
        verified,
        format!(
            "depth {depth} ({} closure{})",
            phase.mode.name(),
            if verified { ", verified" } else { " not verified" }
        ),
    );

    let steps = f.steps();
    Ok(AxiomReport {
        verdicts: vec![axiom1, axiom2, axiom3, axiom4, axiom5],
        depth,
        steps,
        collapsed: steps <= 1,
    })
}
