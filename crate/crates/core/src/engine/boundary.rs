//! Tight extensions and boundary probes past the termination depth.

use std::collections::BTreeSet;

use super::admissibility::check_admissibility;
use super::datum::FamilyDescriptor;
use super::extract::{extract_with, ClosureMode, ExtractedPhase};
use super::Verdict;
use crate::calculus::{
    additive_degree_fast, alternating_sum_at, defect_degree, degree_at_most, DefectStrategy,
};
use crate::error::{Error, Result};
use crate::group::{closure, ElementKey, PhaseGroupElement};
use crate::phase::PhaseFunction;

#[derive(Clone, Debug)]
pub struct TightnessReport {
    pub tight: bool,
    /// Per level `k ≤ N`: whether ext's stratum ≤ k lies in the closure of
    /// base's stratum ≤ k.
    pub levels: Vec<Verdict>,
}

/// `ext` is tight over `base` up to `n` when, for every `k ≤ n`, ext's
/// elements of degree ≤ `k` lie in the closure of base's elements of
/// degree ≤ `k`.
///
/// Exhaustive phases compute that sub-closure. Otherwise the sublevel sets
/// of the default, commutator and radical-depth strategies are subgroups
/// (degree bounds survive sums and translates), so membership is decided
/// by the base family's degree bound and the element's degree.
pub fn tightness_check(base: &ExtractedPhase, ext: &ExtractedPhase, n: usize) -> Result<TightnessReport> {
    if base.datum.space != ext.datum.space {
        return Err(Error::DomainMismatch(format!(
            "{} vs {}",
            base.datum.describe(),
            ext.datum.describe()
        )));
    }
    if base.strategy != ext.strategy {
        return Err(Error::DomainMismatch("strategies differ".into()));
    }
    let strategy = base.strategy;
    let exhaustive = base.mode == ClosureMode::Exhaustive && ext.mode == ClosureMode::Exhaustive;
    let mut levels = Vec::new();
    for k in 0..=n {
        let name = format!("tight at level {k}");
        let ext_level: Vec<&PhaseGroupElement> = ext
            .elements
            .iter()
            .filter(|g| ext.filtration.degree_of(&g.key()).is_some_and(|d| d <= k))
            .collect();
        if exhaustive {
            let gens: Vec<PhaseGroupElement> = base
                .elements
                .iter()
                .filter(|g| base.filtration.degree_of(&g.key()).is_some_and(|d| d <= k))
                .cloned()
                .collect();
            let sub: BTreeSet<ElementKey> = if gens.is_empty() {
                BTreeSet::new()
            } else {
                closure(&gens, base.options.cap, strategy)?
                    .elements
                    .iter()
                    .map(|g| g.key())
                    .collect()
            };
            let outside = ext_level.iter().find(|g| !sub.contains(&g.key()));
            levels.push(match outside {
                None => Verdict::pass(name).with_detail(format!(
                    "{} elements inside a sub-closure of {}",
                    ext_level.len(),
                    sub.len()
                )),
                Some(g) => Verdict::fail(name, "element outside the base sub-closure").with_witness(g.describe()),
            });
        } else {
            let base_bound = match (&base.datum.family, base.datum.extras.is_empty()) {
                (FamilyDescriptor::DegreeAtMost(d), true) => *d,
                _ => {
                    levels.push(Verdict::fail(
                        name,
                        "undetermined: sampled closure of a non-degree family",
                    ));
                    continue;
                }
            };
            if strategy == DefectStrategy::Literal {
                levels.push(Verdict::fail(
                    name,
                    "undetermined: literal sublevel sets are not subgroups",
                ));
                continue;
            }
            let mut outside = None;
            for g in &ext_level {
                let inside = degree_at_most(g.psi(), base_bound)
                    && defect_degree(g.psi(), strategy).is_ok_and(|d| d <= k);
                if !inside {
                    outside = Some(g);
                    break;
                }
            }
            levels.push(match outside {
                None => Verdict::pass(name).with_detail(format!(
                    "{} sampled elements inside degree <= {base_bound} at level {k}",
                    ext_level.len()
                )),
                Some(g) => Verdict::fail(name, "element outside the base stratum").with_witness(g.describe()),
            });
        }
    }
    Ok(TightnessReport {
        tight: levels.iter().all(|v| v.pass),
        levels,
    })
}

#[derive(Clone, Debug)]
pub struct BoundaryReport {
    pub base_depth: usize,
    pub proper: bool,
    pub tightness: TightnessReport,
    /// Inhabited levels of the extension beyond the base depth.
    pub new_strata: Vec<usize>,
    /// Least-key element of each new stratum.
    pub witnesses: Vec<(usize, String)>,
    pub extension_census: Vec<usize>,
    pub checks: Vec<Verdict>,
}

impl BoundaryReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Extends `base` by `extras` and reports what lies past its depth.
pub fn boundary_probe(base: &ExtractedPhase, extras: &[PhaseFunction]) -> Result<BoundaryReport> {
    let n = base.termination_depth();
    let space = &base.datum.space;
    for e in extras {
        if e.space() != space {
            return Err(Error::DomainMismatch("extra phase on another module".into()));
        }
    }
    let ext = if extras.is_empty() {
        base.clone()
    } else {
        let mut all = base.datum.extras.clone();
        all.extend(extras.iter().cloned());
        let datum = base.datum.clone().with_extras(all)?;
        let adm = check_admissibility(&datum, base.options.seed)?;
        extract_with(&datum, base.strategy, &base.options, adm)?
    };

    let in_base = |psi: &PhaseFunction| match base.mode {
        ClosureMode::Exhaustive => base
            .element(&PhaseGroupElement::phase(psi.clone()).key())
            .is_some(),
        _ => base.datum.contains(psi),
    };
    let proper = extras.iter().any(|e| !in_base(e));
    let tightness = tightness_check(base, &ext, n)?;
    let census = ext.filtration.graded_sizes.clone();
    let new_strata: Vec<usize> = (n + 1..census.len()).filter(|&k| census[k] > 0).collect();
    let descriptions = ext.witness_descriptions();
    let witnesses: Vec<(usize, String)> = new_strata
        .iter()
        .filter_map(|&k| descriptions[k].clone().map(|d| (k, d)))
        .collect();

    let mut checks = vec![
        Verdict::check(
            "extension beyond depth",
            !proper || !tightness.tight || !new_strata.is_empty(),
            format!(
                "proper={proper}, tight up to {n}={}, new strata {:?}",
                tightness.tight, new_strata
            ),
        ),
    ];
    for (k, w) in &witnesses {
        checks[0].witnesses.push(format!("stratum {k}: {w}"));
    }

    let basis: Vec<usize> = (0..space.rank()).map(|i| space.basis_vector(i, space.ring().one())).collect();
    for (idx, psi) in extras.iter().enumerate() {
        let deg = additive_degree_fast(psi)?;
        if deg <= n {
            continue;
        }
        let label = format!("extra #{idx}");
        let default_deg = defect_degree(psi, DefectStrategy::Default)?;
        let mut tensor = Verdict::check(
            format!("{label} defect degree"),
            default_deg == deg,
            format!("default defect degree {default_deg}, additive degree {deg}"),
        );
        if deg <= basis.len() {
            let t = alternating_sum_at(psi, &basis[..deg], 0);
            tensor.witnesses.push(format!(
                "T(e1..e{deg}) = {}",
                space.ring().format_elem(t)
            ));
        }
        checks.push(tensor);
        checks.push(origin_agreement(psi, n, &label)?);
        checks.push(basis_agreement(psi, n, &basis, &label));
    }

    Ok(BoundaryReport {
        base_depth: n,
        proper,
        tightness,
        new_strata,
        witnesses,
        extension_census: census,
        checks,
    })
}

/// Whether `Δ_{h₁…h_j} ψ(0) = 0` (the zero phase's value) for every
/// `j ≤ n` and every increment tuple. Reports the first disagreement.
fn origin_agreement(psi: &PhaseFunction, n: usize, label: &str) -> Result<Verdict> {
    let size = psi.space().size();
    let name = format!("{label} agrees with zero at orders <= {n} at the origin");
    let budget: u128 = 1 << 24;
    let needed = (size as u128).pow(n as u32);
    if needed > budget {
        return Err(Error::capacity("origin derivative scan", needed, budget));
    }
    for order in 1..=n {
        let mut hs = vec![0usize; order];
        for mut idx in 0..size.pow(order as u32) {
            for h in hs.iter_mut() {
                *h = idx % size;
                idx /= size;
            }
            let v = alternating_sum_at(psi, &hs, 0);
            if v != 0 {
                let space = psi.space();
                let incs: Vec<String> = hs.iter().map(|&h| space.format_element(h)).collect();
                return Ok(Verdict::fail(
                    name,
                    format!("order-{order} difference at 0 is nonzero"),
                )
                .with_witness(format!(
                    "increments {} give {}",
                    incs.join(" "),
                    space.ring().format_elem(v)
                )));
            }
        }
    }
    Ok(Verdict::pass(name).with_detail(format!("all increment tuples up to order {n}")))
}

/// The same comparison restricted to increments drawn from the standard
/// basis `e_i`.
fn basis_agreement(psi: &PhaseFunction, n: usize, basis: &[usize], label: &str) -> Verdict {
    let name = format!("{label} agrees with zero at orders <= {n} on basis increments");
    let mut tuples: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..n {
        let next: Vec<Vec<usize>> = tuples
            .iter()
            .flat_map(|t| basis.iter().map(move |&e| [t.as_slice(), &[e]].concat()))
            .collect();
        for hs in &next {
            if alternating_sum_at(psi, hs, 0) != 0 {
                return Verdict::fail(name, "nonzero basis difference at 0");
            }
        }
        tuples = next;
    }
    Verdict::pass(name).with_detail(format!("{} basis directions", basis.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{extract_phase, ExtractOptions, PhaseDatum};
    use crate::phase::phase_from_poly;

    fn base(n: usize) -> ExtractedPhase {
        let d = PhaseDatum::new(&"chain:2:2".parse().unwrap(), n, "deg2".parse().unwrap()).unwrap();
        let opts = ExtractOptions {
            samples: 300,
            ..Default::default()
        };
        extract_phase(&d, DefectStrategy::Default, &opts).unwrap()
    }

    #[test]
    fn empty_extension_is_not_proper() {
        let b = base(1);
        let r = boundary_probe(&b, &[]).unwrap();
        assert!(!r.proper && r.tightness.tight && r.new_strata.is_empty());
        assert!(r.all_pass());
    }

    #[test]
    fn quadratic_extra_stays_inside() {
        let b = base(2);
        let q = phase_from_poly(&"2*x1x2".parse().unwrap(), &b.datum.space).unwrap();
        let r = boundary_probe(&b, &[q]).unwrap();
        assert!(!r.proper && r.new_strata.is_empty());
    }

    #[test]
    fn cubic_extra_crosses_the_boundary() {
        let b = base(3);
        let psi = phase_from_poly(&"x1x2x3".parse().unwrap(), &b.datum.space).unwrap();
        let r = boundary_probe(&b, &[psi]).unwrap();
        assert!(r.proper && r.tightness.tight);
        assert_eq!(r.new_strata, vec![3]);
        assert!(r.checks[0].pass);
        assert_eq!(r.checks[1].witnesses, vec!["T(e1..e3) = 1".to_string()]);
        // x1x2x3(1,1,1) = 1, so the first difference at 0 along (1,1,1) is 1
        assert!(!r.checks[2].pass);
        assert!(r.checks[3].pass);
    }
}
