//! Acceptance battery: one line per criterion, exact comparisons only.
//!
//! Runs as a plain binary so the lines are always printed. A criterion that
//! is known to be unattainable is listed in `KNOWN_RED`; it still prints
//! FAIL, and the run only errors if it unexpectedly passes or anything else
//! fails.

mod common;

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use phaseforge::calculus::{
    additive_degree, additive_degree_fast, alternating_sum_at, defect_degree, iterated_difference,
    polarization, DefectStrategy, DifferenceMethod,
};
use phaseforge::chars::{character_group, find_generating_character};
use phaseforge::engine::datum::random_phase_of_degree;
use phaseforge::engine::{
    boundary_probe, compare_strategies, equivalence_check, extract_phase, verify_axioms,
    ClosureMode, ExtractOptions, ExtractedPhase, PhaseDatum,
};
use phaseforge::module::ModuleHom;
use phaseforge::phase::{phase_from_poly, pullback_phase, PhaseFunction};
use phaseforge::report::{parse_text_verdicts, run_scenario, run_suite, ScenarioConfig};
use phaseforge::ring::Elem;

use common::{degree, diff, is_additive, iter_diff, space, tuples};

/// Criteria expected to print FAIL; see the decisions ledger.
const KNOWN_RED: [usize; 1] = [7];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn extract(ring: &str, n: usize, fam: &str, s: DefectStrategy, opts: &ExtractOptions) -> ExtractedPhase {
    let d = PhaseDatum::new(&ring.parse().unwrap(), n, fam.parse().unwrap()).unwrap();
    extract_phase(&d, s, opts).unwrap()
}

fn opts() -> ExtractOptions {
    ExtractOptions {
        samples: 600,
        ..Default::default()
    }
}

/// Recursive and alternating-sum differences against a brute-force oracle.
fn difference_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let shapes = [
        ("chain:2:2", 1),
        ("chain:2:2", 2),
        ("chain:2:2", 3),
        ("zmod:4", 3),
        ("zmod:3", 3),
        ("zmod:2", 6),
        ("fatpoint:2", 2),
    ];
    let mut trials = 0;
    for t in 0..210 {
        let (ring, n) = shapes[t % shapes.len()];
        let a = space(ring, n);
        assert!(a.size() <= 64);
        let q = a.ring().order();
        let table: Vec<Elem> = (0..a.size()).map(|_| rng.gen_range(0..q) as Elem).collect();
        let phi = PhaseFunction::new(a.clone(), table.clone()).unwrap();
        let k = rng.gen_range(1..=4);
        let hs: Vec<usize> = (0..k).map(|_| a.random_element(&mut rng)).collect();
        let want = iter_diff(&a, &table, &hs);
        for m in [DifferenceMethod::Recursive, DifferenceMethod::AlternatingSum] {
            let got = iterated_difference(&phi, &hs, m).unwrap();
            if got.table() != want.as_slice() {
                return outcome(false, format!("{m:?} differs on {ring}^{n}, increments {hs:?}"));
            }
        }
        trials += 1;
    }
    outcome(true, format!("{trials} random (phase, increments) pairs, |A| <= 64, k <= 4"))
}

/// `u·x₁x₂` over `(F₂[u]/(u²))²`: first, second and third differences.
fn worked_example() -> Outcome {
    let a = space("chain:2:2", 2);
    let r = a.ring().clone();
    let u: Elem = 2;
    assert_eq!(r.format_elem(u), "u");
    assert_eq!(r.mul(u, u), 0);
    let c = |x: usize, i: usize| a.coord(x, i);
    let table: Vec<Elem> = a.elements().map(|x| r.mul(u, r.mul(c(x, 0), c(x, 1)))).collect();
    let phi = phase_from_poly(&"2*x1x2".parse().unwrap(), &a).unwrap();
    if phi.table() != table.as_slice() {
        return outcome(false, "polynomial parser disagrees with u*x1*x2");
    }
    for h in a.elements() {
        let got = iterated_difference(&phi, &[h], DifferenceMethod::Recursive).unwrap();
        let want: Vec<Elem> = a
            .elements()
            .map(|x| {
                let s = r.add(r.add(r.mul(c(x, 0), c(h, 1)), r.mul(c(h, 0), c(x, 1))), r.mul(c(h, 0), c(h, 1)));
                r.mul(u, s)
            })
            .collect();
        if got.table() != want.as_slice() {
            return outcome(false, format!("first difference along {}", a.format_element(h)));
        }
    }
    for h in a.elements() {
        for k in a.elements() {
            let got = iterated_difference(&phi, &[h, k], DifferenceMethod::Recursive).unwrap();
            let v = r.mul(u, r.add(r.mul(c(k, 0), c(h, 1)), r.mul(c(h, 0), c(k, 1))));
            if !got.table().iter().all(|&y| y == v) {
                return outcome(false, "second difference not the predicted constant");
            }
        }
    }
    for hs in tuples(a.size(), 3) {
        if !iterated_difference(&phi, &hs, DifferenceMethod::AlternatingSum).unwrap().is_zero() {
            return outcome(false, format!("nonzero third difference {hs:?}"));
        }
    }
    let (d1, d2) = (additive_degree(&phi).unwrap(), additive_degree_fast(&phi).unwrap());
    outcome(
        d1 == 2 && d2 == 2,
        format!("16 first, 256 second, 4096 third differences match; degree {d1}/{d2}"),
    )
}

/// Census of additive degrees (last bucket: 3 or more) of every function
/// `R → R`, computed by the oracle on the first run and kept as a golden
/// value.
const QUADRATIC_CENSUS: [(&str, [usize; 4]); 2] = [
    ("chain:2:2", [4, 60, 192, 0]),
    ("zmod:4", [4, 12, 16, 224]),
];

fn quadratic_characterization() -> Outcome {
    let mut notes = Vec::new();
    for (ring, golden) in QUADRATIC_CENSUS {
        let a = space(ring, 1);
        let mut census = [0usize; 4];
        for code in 0..256usize {
            let table: Vec<Elem> = (0..4).map(|i| ((code >> (2 * i)) & 3) as Elem).collect();
            let d = degree(&a, &table, 6).expect("finite degree over a 2-group");
            census[d.min(3)] += 1;
            let phi = PhaseFunction::new(a.clone(), table).unwrap();
            let b = polarization(&phi).unwrap();
            if b.is_biadditive() != (d <= 2) {
                return outcome(false, format!("{ring}: {:?} has degree {d}, biadditive {}", phi.table(), b.is_biadditive()));
            }
            if d <= 2 && !b.is_zero() && defect_degree(&phi, DefectStrategy::Default).unwrap() != 2 {
                return outcome(false, format!("{ring}: {:?} polarized but default degree != 2", phi.table()));
            }
        }
        if census != golden {
            return outcome(false, format!("{ring}: census {census:?}, golden {golden:?}"));
        }
        notes.push(format!("{ring} census {census:?}"));
    }
    outcome(true, format!("all 256 functions per ring; {}", notes.join("; ")))
}

fn frobenius_detection() -> Outcome {
    let mut notes = Vec::new();
    for ring in ["chain:2:2", "zmod:4", "zmod:2", "zmod:3", "fatpoint:2"] {
        let r = Arc::new(phaseforge::ring::build_ring(&ring.parse().unwrap()).unwrap());
        let (found, _) = find_generating_character(&r);
        // oracle: χ generates iff no nonzero a has χ(r·a) = 0 for every r
        let generating: Vec<usize> = character_group(&r)
            .iter()
            .filter(|chi| {
                r.elements()
                    .filter(|&a| a != 0)
                    .all(|a| r.elements().any(|x| chi.exponent(r.mul(x, a)) != 0))
            })
            .map(|chi| chi.index())
            .collect();
        let expect_frobenius = ring != "fatpoint:2";
        if found.as_ref().map(|c| c.index()) != generating.first().copied()
            || generating.is_empty() == expect_frobenius
        {
            return outcome(false, format!("{ring}: detector {:?}, oracle {generating:?}", found.map(|c| c.index())));
        }
        if ring == "chain:2:2" {
            let chi = found.unwrap();
            let u: Elem = 2;
            for a in [0, r.one()] {
                for b in [0, r.one()] {
                    let x = r.add(a, r.mul(u, b));
                    // χ(a + ub) = (−1)^b: exponent b modulo 2
                    if chi.modulus() != 2 || chi.exponent(x) != b as u32 {
                        return outcome(false, format!("canonical character #{} is not (-1)^b", chi.index()));
                    }
                }
            }
        }
        notes.push(format!(
            "{ring}: {}",
            if generating.is_empty() { format!("none of {} characters", r.order()) } else { format!("#{}", generating[0]) }
        ));
    }
    outcome(true, notes.join(", "))
}

fn has_witnesses(p: &ExtractedPhase, levels: &[usize]) -> bool {
    let w = p.witness_descriptions();
    levels.iter().all(|&k| w.get(k).is_some_and(|x| x.is_some()))
}

fn extraction_termination() -> Outcome {
    let p1 = extract("chain:2:2", 1, "deg2", DefectStrategy::Default, &opts());
    let a1 = p1.datum.space.clone();
    let oracle_ok = p1
        .elements
        .iter()
        .all(|g| degree(&a1, g.psi().table(), 2).is_some());
    let ok1 = p1.mode == ClosureMode::Exhaustive
        && p1.termination_depth() == 2
        && has_witnesses(&p1, &[0, 1, 2])
        && p1.max_phase_degree <= 2
        && oracle_ok;
    let p2 = extract("chain:2:2", 2, "deg2", DefectStrategy::Default, &opts());
    let a2 = p2.datum.space.clone();
    let step = (p2.elements.len() / 120).max(1);
    let oracle_ok2 = p2
        .elements
        .iter()
        .step_by(step)
        .all(|g| degree(&a2, g.psi().table(), 2).is_some());
    let ok2 = p2.termination_depth() == 2
        && has_witnesses(&p2, &[0, 1, 2])
        && p2.max_phase_degree <= 2
        && p2.closure_verified()
        && oracle_ok2;
    outcome(
        ok1 && ok2,
        format!(
            "n=1 {} closure {} elements {:?} N={}; n=2 {} closure {:?} N={}",
            p1.mode.name(),
            p1.elements.len(),
            p1.filtration.graded_sizes,
            p1.termination_depth(),
            p2.mode.name(),
            p2.filtration.graded_sizes,
            p2.termination_depth()
        ),
    )
}

/// Collapse means at most one nontrivial filtration step.
fn collapse() -> Outcome {
    let lin = extract("chain:2:2", 1, "deg1", DefectStrategy::Default, &opts());
    let mut ok = lin.termination_depth() <= 1;
    let mut notes = vec![format!("F2[u]/(u^2) deg1: depth {}", lin.termination_depth())];
    for ring in ["zmod:2", "zmod:3"] {
        let p = extract(ring, 2, "deg2", DefectStrategy::RadicalDepth, &opts());
        let axioms = verify_axioms(&p).unwrap();
        ok &= axioms.collapsed && axioms.all_pass();
        notes.push(format!(
            "{ring} deg2 radical-depth: steps {} (levels {:?}), axioms {}",
            axioms.steps,
            p.filtration.strict_steps(),
            if axioms.all_pass() { "pass" } else { "fail" }
        ));
    }
    outcome(ok, notes.join("; "))
}

/// `x₁x₂x₃` over `R³` past the quadratic boundary.
fn cubic_boundary() -> Outcome {
    let a = space("chain:2:2", 3);
    let r = a.ring().clone();
    let table: Vec<Elem> = a
        .elements()
        .map(|x| r.mul(a.coord(x, 0), r.mul(a.coord(x, 1), a.coord(x, 2))))
        .collect();
    let psi = phase_from_poly(&"x1x2x3".parse().unwrap(), &a).unwrap();
    assert_eq!(psi.table(), table.as_slice());

    // first and second differences at 0, against those of the zero phase
    let mut origin = None;
    'scan: for order in 1..=2 {
        for hs in tuples(a.size(), order) {
            let v = iter_diff(&a, &table, &hs)[0];
            if v != 0 {
                origin = Some((hs, v));
                break 'scan;
            }
        }
    }
    let basis: Vec<usize> = (0..3).map(|i| a.basis_vector(i, r.one())).collect();
    let basis_zero = (1..=2).all(|order| {
        tuples(3, order).all(|idx| {
            let hs: Vec<usize> = idx.iter().map(|&i| basis[i]).collect();
            iter_diff(&a, &table, &hs)[0] == 0
        })
    });
    let t = alternating_sum_at(&psi, &basis, 0);
    let deg = defect_degree(&psi, DefectStrategy::Default).unwrap();

    let base = extract("chain:2:2", 3, "deg2", DefectStrategy::Default, &opts());
    let plain = boundary_probe(&base, &[]).unwrap();
    let ext = boundary_probe(&base, &[psi]).unwrap();
    let witnessed = ext.witnesses.iter().any(|(k, _)| *k == 3);
    // the engine's origin check must report exactly what the oracle found
    let engine_origin = ext
        .checks
        .iter()
        .find(|c| c.name.contains("at the origin"))
        .map(|c| c.pass);
    assert_eq!(engine_origin, Some(origin.is_none()));

    let rest = t == r.one() && deg == 3 && witnessed && plain.new_strata.is_empty() && basis_zero;
    let origin_note = match &origin {
        None => "all first and second differences at 0 vanish".to_string(),
        Some((hs, v)) => format!(
            "difference at 0 along {} is {} (not that of the zero phase)",
            hs.iter().map(|&h| a.format_element(h)).collect::<Vec<_>>().join(", "),
            r.format_elem(*v)
        ),
    };
    outcome(
        rest && origin.is_none(),
        format!(
            "{origin_note}; basis-increment differences vanish: {basis_zero}; T(e1,e2,e3) = {}; default degree {deg}; \
             extension strata {:?}, unextended new strata {:?}",
            r.format_elem(t),
            ext.new_strata,
            plain.new_strata
        ),
    )
}

fn functoriality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let spaces: Vec<_> = (1..=3).map(|n| space("chain:2:2", n)).collect();
    for trial in 0..50 {
        let src = spaces[rng.gen_range(0..3)].clone();
        let tgt = spaces[rng.gen_range(0..3)].clone();
        let f = ModuleHom::random(src.clone(), tgt.clone(), &mut rng);
        let phi = random_phase_of_degree(&tgt, rng.gen_range(0..=3), &mut rng);
        let pulled = pullback_phase(&f, &phi).unwrap();
        for h in src.elements() {
            let lhs = diff(&src, pulled.table(), h);
            let rhs_full = diff(&tgt, phi.table(), f.apply(h));
            if src.elements().any(|x| lhs[x] != rhs_full[f.apply(x)]) {
                return outcome(false, format!("trial {trial}: difference does not commute with pullback"));
            }
        }
        for s in [DefectStrategy::Default, DefectStrategy::Commutator] {
            let (before, after) = (defect_degree(&phi, s).unwrap(), defect_degree(&pulled, s).unwrap());
            if after > before {
                return outcome(false, format!("trial {trial}: {} degree rose {before} -> {after}", s.name()));
            }
        }
    }
    outcome(true, "50 random homs between R^1..R^3, degree <= 3 phases, both strategies")
}

fn strategy_equivalence() -> Outcome {
    let pair = [DefectStrategy::Default, DefectStrategy::Commutator];
    let mut notes = Vec::new();
    let mut ok = true;
    for n in [1, 2] {
        let p = extract("chain:2:2", n, "deg2", DefectStrategy::Default, &opts());
        let c = compare_strategies(&p.elements, &pair).unwrap();
        let a = p.datum.space.clone();
        // oracle: whenever the additive degree is at least 2, values agree
        let step = if n == 1 { 1 } else { (p.elements.len() / 150).max(1) };
        for g in p.elements.iter().step_by(step) {
            if degree(&a, g.psi().table(), 6).unwrap() >= 2 {
                let (x, y) = (defect_degree(g.psi(), pair[0]).unwrap(), defect_degree(g.psi(), pair[1]).unwrap());
                ok &= x == y;
            }
        }
        let confined_by_oracle = c.divergences.iter().all(|d| {
            let t = p.element(&d.key).unwrap().psi().table();
            is_additive(&a, t) || t.iter().all(|&v| v == t[0])
        });
        let rebuilt = pair.iter().all(|&s| {
            phaseforge::engine::compute_filtration(&p.elements, s)
                .unwrap()
                .verify_reconstruction(&p.elements)
                .unwrap()
        });
        ok &= c.agree_above_linear == Some(true)
            && c.divergences_confined == Some(true)
            && confined_by_oracle
            && rebuilt;
        notes.push(format!("n={n}: {} divergences, all additive/constant; rebuilt {rebuilt}", c.divergences.len()));
        if n == 1 {
            let cfg = ScenarioConfig::parse("command=model-compare\nring=chain:2:2\nn=1\nfamily=deg2\nstrategy=default,commutator").unwrap();
            let report = run_scenario(&cfg).unwrap();
            let listed = report
                .stable
                .checks
                .iter()
                .find(|r| r.name == "strategies/divergences confined")
                .map(|r| r.witnesses.len());
            ok &= listed == Some(c.divergences.len());
        }
    }
    outcome(ok, notes.join("; "))
}

fn presentation_insensitivity() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for n in [1, 2] {
        let base = extract("chain:2:2", n, "deg2", DefectStrategy::Default, &opts());
        for seed in 1..=5 {
            let o = ExtractOptions {
                shuffle: Some(seed * 7919),
                ..opts()
            };
            let other = extract("chain:2:2", n, "deg2", DefectStrategy::Default, &o);
            let eq = equivalence_check(&base, &other);
            ok &= eq.equivalent && other.filtration.graded_sizes == base.filtration.graded_sizes;
        }
        notes.push(format!("n={n} {:?} x5 seeds", base.filtration.graded_sizes));
    }
    outcome(ok, notes.join("; "))
}

fn determinism() -> Outcome {
    let mut cfg = ScenarioConfig::default();
    cfg.workers = 1;
    let a = run_suite(&cfg).unwrap();
    let b = run_suite(&cfg).unwrap();
    cfg.workers = 8;
    let c = run_suite(&cfg).unwrap();
    let (ja, jb, jc) = (a.stable_json(), b.stable_json(), c.stable_json());
    let json: Vec<(String, String)> = a
        .stable
        .checks
        .iter()
        .map(|r| (r.name.clone(), r.verdict.name().to_string()))
        .collect();
    let text_agrees = parse_text_verdicts(&a.to_text()) == json;
    outcome(
        ja == jb && ja == jc && text_agrees,
        format!(
            "{} checks, stable section {} bytes identical across reruns and 1 vs {} workers; text/json verdicts agree: {text_agrees}",
            a.stable.checks.len(),
            ja.len(),
            c.timing.workers
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(usize, &str, Duration, fn() -> Outcome); 11] = [
        (1, "difference calculus oracle", Duration::from_secs(5), difference_oracle),
        (2, "worked quadratic example", Duration::from_secs(2), worked_example),
        (3, "quadratic characterization", Duration::from_secs(5), quadratic_characterization),
        (4, "frobenius detection", Duration::from_secs(1), frobenius_detection),
        (5, "extraction and termination", Duration::from_secs(60), extraction_termination),
        (6, "collapse", Duration::from_secs(10), collapse),
        (7, "cubic boundary", Duration::from_secs(120), cubic_boundary),
        (8, "functoriality", Duration::from_secs(30), functoriality),
        (9, "strategy equivalence", Duration::MAX, strategy_equivalence),
        (10, "presentation insensitivity", Duration::from_secs(30), presentation_insensitivity),
        (11, "determinism", Duration::MAX, determinism),
    ];
    let filter: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut results = BTreeMap::new();
    for (id, name, limit, f) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let t = Instant::now();
        let o = f();
        let elapsed = t.elapsed();
        let pass = o.pass && elapsed < limit;
        println!(
            "criterion {id:>2} {name}: {} ({} ms) {}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_millis(),
            o.detail
        );
        results.insert(id, pass);
    }
    let unexpected: Vec<usize> = results
        .iter()
        .filter(|(id, pass)| **pass == KNOWN_RED.contains(id))
        .map(|(id, _)| *id)
        .collect();
    let failed = results.values().filter(|p| !**p).count();
    println!(
        "acceptance: {} passed, {failed} failed (known unattainable: {KNOWN_RED:?})",
        results.len() - failed
    );
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected outcome for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
