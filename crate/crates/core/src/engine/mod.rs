//! Admissibility, extraction, filtrations, axiom checks, boundary probes
//! and strategy comparison.

pub mod admissibility;
pub mod axioms;
pub mod boundary;
pub mod compare;
pub mod datum;
pub mod extract;
pub mod filtration;

pub use admissibility::{check_admissibility, hom_battery, AdmissibilityReport};
pub use axioms::{verify_axioms, AxiomReport};
pub use boundary::{boundary_probe, tightness_check, BoundaryReport, TightnessReport};
pub use compare::{compare_strategies, equivalence_check, EquivalenceReport, PhaseClass, StrategyComparison};
pub use datum::{CharacterChoice, FamilyDescriptor, Members, PhaseDatum};
pub use extract::{extract_phase, extract_with, ClosureMode, ExtractOptions, ExtractedPhase};
pub use filtration::{compute_filtration, Filtration};

/// A named pass/fail outcome with a short explanation and witnesses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
    pub witnesses: Vec<String>,
}

impl Verdict {
    pub fn pass(name: impl Into<String>) -> Self {
        Verdict {
            name: name.into(),
            pass: true,
            detail: String::new(),
            witnesses: Vec::new(),
        }
    }

    pub fn fail(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Verdict {
            name: name.into(),
            pass: false,
            detail: detail.into(),
            witnesses: Vec::new(),
        }
    }

    pub fn check(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Verdict {
            name: name.into(),
            pass,
            detail: detail.into(),
            witnesses: Vec::new(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    pub fn with_witness(mut self, w: impl Into<String>) -> Self {
        self.witnesses.push(w.into());
        self
    }
}
