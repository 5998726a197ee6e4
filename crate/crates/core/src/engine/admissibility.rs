//! Weak (W1–W3) and strong admissibility of a phase datum.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::datum::{Members, PhaseDatum};
use super::Verdict;
use crate::calculus::degree_at_most;
use crate::error::Result;
use crate::module::{ModuleHom, ModuleSpace};
use crate::phase::{pullback_phase, PhaseFunction};

/// Members checked exhaustively before switching to a sample.
const MEMBER_CHECK_LIMIT: usize = 512;
/// Sample size for families that cannot be listed.
const MEMBER_SAMPLE: usize = 96;
/// Largest `|Φ|²·|A|` checked exhaustively for W3.
const INTERACTION_EXHAUSTIVE: usize = 1 << 18;
const INTERACTION_SAMPLE: usize = 4000;

#[derive(Clone, Debug)]
pub struct AdmissibilityReport {
    pub w1: Verdict,
    pub w2: Verdict,
    pub w3: Verdict,
    pub strong: Verdict,
    pub degree_bound: Option<usize>,
}

impl AdmissibilityReport {
    pub fn weak(&self) -> bool {
        self.w1.pass && self.w2.pass && self.w3.pass
    }

    pub fn strong(&self) -> bool {
        self.weak() && self.strong.pass
    }

    pub fn clauses(&self) -> [&Verdict; 4] {
        [&self.w1, &self.w2, &self.w3, &self.strong]
    }
}

/// Endomorphisms of `A` used to probe functoriality: identity, zero, a
/// coordinate swap and a projection (rank ≥ 2), scaling by each radical
/// generator, and `random` seeded random matrices.
pub fn hom_battery(space: &Arc<ModuleSpace>, random: usize, seed: u64) -> Vec<(String, ModuleHom)> {
    let n = space.rank();
    let ring = space.ring();
    let one = ring.one();
    let mut out = vec![
        ("identity".to_string(), ModuleHom::identity(space.clone())),
        ("zero".to_string(), ModuleHom::zero(space.clone(), space.clone())),
    ];
    let diag = |entries: &dyn Fn(usize, usize) -> u8| -> ModuleHom {
        let m = (0..n * n).map(|i| entries(i / n, i % n)).collect();
        ModuleHom::new(space.clone(), space.clone(), m).expect("square matrix")
    };
    if n >= 2 {
        out.push((
            "swap(1,2)".into(),
            diag(&|r, c| {
                let target = match r {
                    0 => 1,
                    1 => 0,
                    r => r,
                };
                if c == target {
                    one
                } else {
                    0
                }
            }),
        ));
        out.push((
            "project(1)".into(),
            diag(&|r, c| if r == 0 && c == 0 { one } else { 0 }),
        ));
    }
    if let Some(&r) = ring.radical().iter().find(|&&r| r != 0) {
        out.push((
            format!("scale({})", ring.format_elem(r)),
            diag(&|i, j| if i == j { r } else { 0 }),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..random {
        out.push((
            format!("random#{i}"),
            ModuleHom::random(space.clone(), space.clone(), &mut rng),
        ));
    }
    out
}

/// Members to test: all of them when few, otherwise a seeded sample.
pub(crate) fn probe_members(datum: &PhaseDatum, rng: &mut ChaCha8Rng) -> Result<(Vec<PhaseFunction>, bool)> {
    Ok(match datum.members()? {
        Members::Enumerated(list) if list.len() <= MEMBER_CHECK_LIMIT => (list, true),
        Members::Enumerated(list) => (
            list.choose_multiple(rng, MEMBER_CHECK_LIMIT).cloned().collect(),
            false,
        ),
        Members::Structural { .. } => (
            (0..MEMBER_SAMPLE)
                .map(|_| datum.sample_member(rng))
                .collect::<Result<_>>()?,
            false,
        ),
    })
}

pub fn check_admissibility(datum: &PhaseDatum, seed: u64) -> Result<AdmissibilityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (members, exhaustive) = probe_members(datum, &mut rng)?;
    let scope = if exhaustive { "all" } else { "sampled" };

    // W1: closure under pullback
    let homs = hom_battery(&datum.space, 6, seed ^ 0x5eed);
    let mut w1 = Verdict::pass("W1 pullback closure");
    'outer: for (label, f) in &homs {
        for phi in &members {
            let pulled = pullback_phase(f, phi)?;
            if !datum.contains(&pulled) {
                w1 = Verdict::fail(
                    "W1 pullback closure",
                    format!("pullback along {label} leaves the family"),
                )
                .with_witness(format!("hom {label} = {}", f.describe()))
                .with_witness(format!("phase {}", hex::encode(phi.table())));
                break 'outer;
            }
        }
    }
    if w1.pass {
        w1.detail = format!(
            "{} homs x {} {scope} members stay in the family",
            homs.len(),
            members.len()
        );
    }

    // W2: uniform degree bound
    let (w2, bound) = match datum.degree_bound() {
        Ok(d) => (Verdict::pass("W2 uniform degree bound").with_detail(format!("d = {d}")), Some(d)),
        Err(e) => (Verdict::fail("W2 uniform degree bound", e.to_string()), None),
    };

    // W3: ψ₁ + ψ₂∘τ_a keeps the degree bound
    let w3 = match bound {
        None => Verdict::fail("W3 interaction closure", "no degree bound"),
        Some(d) => {
            let size = datum.space.size();
            let exhaustive_pairs = exhaustive && members.len().pow(2) * size <= INTERACTION_EXHAUSTIVE;
            let mut triples: Vec<(usize, usize, usize)> = Vec::new();
            if exhaustive_pairs {
                for i in 0..members.len() {
                    for j in 0..members.len() {
                        for a in 0..size {
                            triples.push((i, j, a));
                        }
                    }
                }
            } else {
                for _ in 0..INTERACTION_SAMPLE {
                    triples.push((
                        rng.gen_range(0..members.len()),
                        rng.gen_range(0..members.len()),
                        rng.gen_range(0..size),
                    ));
                }
            }
            let bad = triples.iter().find(|&&(i, j, a)| {
                !degree_at_most(&members[i].add(&members[j].translate(a)), d)
            });
            match bad {
                None => Verdict::pass("W3 interaction closure").with_detail(format!(
                    "{} {} triples keep degree <= {d}",
                    triples.len(),
                    if exhaustive_pairs { "exhaustive" } else { "sampled" }
                )),
                Some(&(i, j, a)) => Verdict::fail(
                    "W3 interaction closure",
                    format!("psi1 + psi2(x+a) exceeds degree {d}"),
                )
                .with_witness(format!("psi1 {}", hex::encode(members[i].table())))
                .with_witness(format!("psi2 {}", hex::encode(members[j].table())))
                .with_witness(format!("a {}", datum.space.format_element(a))),
            }
        }
    };

    let strong = match datum.character()? {
        Some(chi) => Verdict::pass("strong: generating character")
            .with_detail(format!("character #{}", chi.index()))
            .with_witness(chi.describe()),
        None => Verdict::fail(
            "strong: generating character",
            format!("{} has no generating character for the chosen index", datum.ring.spec()),
        ),
    };

    Ok(AdmissibilityReport {
        w1,
        w2,
        w3,
        strong,
        degree_bound: bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(ring: &str, n: usize, fam: &str) -> AdmissibilityReport {
        let d = PhaseDatum::new(&ring.parse().unwrap(), n, fam.parse().unwrap()).unwrap();
        check_admissibility(&d, 1).unwrap()
    }

    #[test]
    fn radical_quadratic_datum_is_strongly_admissible() {
        let r = report("chain:2:2", 2, "deg2");
        assert!(r.weak() && r.strong());
        assert_eq!(r.degree_bound, Some(2));
        let r = report("chain:2:2", 1, "deg2");
        assert!(r.strong());
    }

    #[test]
    fn fat_point_is_only_weakly_admissible() {
        let r = report("fatpoint:2", 1, "deg2");
        assert!(r.weak());
        assert!(!r.strong());
    }

    #[test]
    fn lone_cubic_is_not_pullback_closed() {
        let r = report("chain:2:2", 3, "poly:x1x2x3");
        assert!(!r.w1.pass);
        assert!(r.w1.witnesses[0].contains("zero"));
        assert!(r.w2.pass && r.w3.pass);
    }

    #[test]
    fn battery_shapes() {
        let a = ModuleSpace::new(
            Arc::new(crate::ring::build_ring(&"chain:2:2".parse().unwrap()).unwrap()),
            2,
        )
        .unwrap();
        let homs = hom_battery(&a, 3, 0);
        assert_eq!(homs.len(), 8);
        let swap = &homs[2].1;
        assert_eq!(swap.apply(a.encode(&[1, 2])), a.encode(&[2, 1]));
    }
}
