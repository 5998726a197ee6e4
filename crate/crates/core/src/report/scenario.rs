//! Runs one scenario (or the fixed suite) and assembles its report.

use std::sync::Arc;
use std::time::Instant;

use crate::cache::CACHE_DIR_ENV;
use crate::calculus::{
    additive_degree, additive_degree_fast, defect_tensor, iterated_difference, polarization,
    DefectStrategy, DifferenceMethod, POLARIZATION_CAP,
};
use crate::chars::{character_group, find_generating_character, FrobeniusVerdict};
use crate::engine::{
    boundary_probe, check_admissibility, compare_strategies, compute_filtration, equivalence_check,
    extract_with, verify_axioms, ExtractOptions, ExtractedPhase, PhaseDatum,
};
use crate::error::{Error, Result};
use crate::module::ModuleSpace;
use crate::phase::{phase_from_poly, read_phase_table, PhaseFunction};
use crate::ring::build_ring;

use super::config::{Command, ScenarioConfig};
use super::{CheckRecord, Report, TimingSection};

/// Seeds used for the shuffled-presentation equivalence checks.
pub const SHUFFLE_SEEDS: usize = 5;

struct Run {
    checks: Vec<CheckRecord>,
    steps: Vec<(String, u64)>,
    cache_hits: usize,
}

impl Run {
    fn new() -> Self {
        Run {
            checks: Vec::new(),
            steps: Vec::new(),
            cache_hits: 0,
        }
    }

    /// Runs `f`, turning a capacity error into a capacity record and any
    /// other error into a failed record named `name`.
    fn step(&mut self, name: &str, f: impl FnOnce(&mut Run) -> Result<()>) {
        let t = Instant::now();
        if let Err(e) = f(self) {
            self.checks.push(if e.is_capacity() {
                CheckRecord::capacity(name, e.to_string())
            } else {
                CheckRecord::new(name, false).note(e.to_string())
            });
        }
        self.steps.push((name.to_string(), t.elapsed().as_millis() as u64));
    }

    fn push(&mut self, rec: CheckRecord) {
        self.checks.push(rec);
    }
}

/// Runs `config` on a pool with the configured worker count and returns the
/// report. Setup errors (bad ring, unreadable input) are returned as errors;
/// everything after setup becomes a check record.
pub fn run_scenario(config: &ScenarioConfig) -> Result<Report> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::InternalConsistency { context: "thread pool".into(), detail: e.to_string() })?;
    let workers = pool.current_num_threads();
    let start = Instant::now();
    let run = pool.install(|| execute(config))?;
    let timing = TimingSection {
        total_ms: start.elapsed().as_millis() as u64,
        workers,
        cache_hits: run.cache_hits,
        steps: run.steps,
    };
    Ok(Report::new(config, run.checks, timing))
}

/// The fixed verification battery, as a report of its own.
pub fn run_suite(config: &ScenarioConfig) -> Result<Report> {
    let mut cfg = config.clone();
    cfg.command = Command::Suite;
    run_scenario(&cfg)
}

fn execute(config: &ScenarioConfig) -> Result<Run> {
    let mut run = Run::new();
    match config.command {
        Command::Suite => {
            for (label, sub) in suite_battery(config)? {
                let inner = execute(&sub)?;
                run.checks.extend(inner.checks.into_iter().map(|mut c| {
                    c.name = format!("{label}/{}", c.name);
                    c
                }));
                run.steps
                    .extend(inner.steps.into_iter().map(|(n, ms)| (format!("{label}/{n}"), ms)));
                run.cache_hits += inner.cache_hits;
            }
        }
        Command::RingInfo => ring_info(config, &mut run)?,
        Command::Frobenius => frobenius(config, &mut run)?,
        Command::PhaseAnalyze => phase_analyze(config, &mut run)?,
        Command::PhaseDerive => phase_derive(config, &mut run)?,
        Command::ModelExtract | Command::ModelVerify | Command::ModelBoundary | Command::ModelCompare => {
            model(config, &mut run)?
        }
    }
    Ok(run)
}

/// The suite's scenarios, sharing `base`'s seed, cap and samples.
pub fn suite_battery(base: &ScenarioConfig) -> Result<Vec<(String, ScenarioConfig)>> {
    let entries: [(&str, &str); 14] = [
        ("ring-chain", "command=ring-info\nring=chain:2:2"),
        ("ring-fatpoint", "command=ring-info\nring=fatpoint:2"),
        ("frobenius-chain", "command=frobenius\nring=chain:2:2"),
        ("frobenius-z4", "command=frobenius\nring=zmod:4"),
        ("frobenius-f2", "command=frobenius\nring=zmod:2"),
        ("frobenius-z3", "command=frobenius\nring=zmod:3"),
        ("frobenius-fatpoint", "command=frobenius\nring=fatpoint:2"),
        ("derive-example", "command=phase-derive\nring=chain:2:2\nn=2\nextra=ux1x2:2*x1x2\nincrements=1,4"),
        ("analyze-example", "command=phase-analyze\nring=chain:2:2\nn=2\nextra=ux1x2:2*x1x2"),
        ("verify-radical-1", "command=model-verify\nring=chain:2:2\nn=1\nfamily=deg2"),
        ("verify-radical-2", "command=model-verify\nring=chain:2:2\nn=2\nfamily=deg2"),
        ("verify-linear", "command=model-verify\nring=chain:2:2\nn=1\nfamily=deg1"),
        ("compare-radical-1", "command=model-compare\nring=chain:2:2\nn=1\nfamily=deg2\nstrategy=default,commutator"),
        ("boundary-cubic", "command=model-boundary\nring=chain:2:2\nn=3\nfamily=deg2\nextra=cubic:x1x2x3"),
    ];
    let collapse: [(&str, &str); 2] = [
        ("collapse-f2", "command=model-verify\nring=zmod:2\nn=2\nfamily=deg2\nstrategy=radical-depth"),
        ("collapse-z3", "command=model-verify\nring=zmod:3\nn=2\nfamily=deg2\nstrategy=radical-depth"),
    ];
    entries
        .iter()
        .chain(collapse.iter())
        .map(|(label, text)| {
            let mut cfg = ScenarioConfig::parse(text)?;
            cfg.seed = base.seed;
            cfg.cap = base.cap;
            cfg.samples = base.samples;
            Ok((label.to_string(), cfg))
        })
        .collect()
}

fn ring_info(config: &ScenarioConfig, run: &mut Run) -> Result<()> {
    let ring = build_ring(&config.ring)?;
    let rec = match ring.validate() {
        Ok(()) => CheckRecord::new("ring axioms", true),
        Err(e) => CheckRecord::new("ring axioms", false).note(e.to_string()),
    };
    run.push(
        rec.count("order", ring.order())
            .count("additive exponent", ring.additive_exponent())
            .count("units", ring.elements().filter(|&a| ring.is_unit(a)).count()),
    );
    let mut jac = ring.jacobson_radical();
    let mut nil = ring.nilpotent_elements();
    jac.sort_unstable();
    nil.sort_unstable();
    let basis: Vec<String> = ring.additive_basis().iter().map(|&a| ring.format_elem(a)).collect();
    run.push(
        CheckRecord::new("radical agrees with nilradical", jac == nil)
            .count("radical size", jac.len())
            .count("nilpotency length", ring.nilpotency_length())
            .count("reduced", ring.is_reduced() as u64)
            .note(format!("additive basis {}", basis.join(", "))),
    );
    Ok(())
}

fn frobenius(config: &ScenarioConfig, run: &mut Run) -> Result<()> {
    let ring = Arc::new(build_ring(&config.ring)?);
    let (found, verdict) = find_generating_character(&ring);
    let all = character_group(&ring);
    let generating = all.iter().filter(|c| c.is_generating()).count();
    let homs = all.iter().all(|c| c.is_homomorphism());
    // the detector must agree with exhausting every character
    let consistent = homs && (found.is_some() == (generating > 0));
    let mut rec = CheckRecord::new("frobenius detection", consistent)
        .count("characters", all.len())
        .count("generating characters", generating)
        .note(match verdict {
            FrobeniusVerdict::Frobenius => "Frobenius".to_string(),
            FrobeniusVerdict::NotFrobenius => format!("not Frobenius: all {} characters exhausted", all.len()),
        });
    if let Some(chi) = found {
        rec = rec.count("character index", chi.index()).witness(chi.describe());
    }
    run.push(rec);
    Ok(())
}

/// The phase under analysis: the input table if given, else the first extra.
fn subject_phase(config: &ScenarioConfig) -> Result<(String, PhaseFunction)> {
    if let Some(path) = &config.input {
        return Ok((path.display().to_string(), read_phase_table(path)?));
    }
    let extra = config
        .extra
        .first()
        .ok_or_else(|| Error::Parse("phase commands need `input` or an `extra` polynomial".into()))?;
    let space = ModuleSpace::new(Arc::new(build_ring(&config.ring)?), config.n)?;
    space.ensure_enumerable()?;
    Ok((extra.label.clone(), phase_from_poly(&extra.poly, &space)?))
}

fn phase_analyze(config: &ScenarioConfig, run: &mut Run) -> Result<()> {
    let (label, phi) = subject_phase(config)?;
    for &s in &config.strategies {
        run.step(&format!("profile {}", s.name()), |run| {
            let p = defect_tensor(&phi, s)?;
            let mut rec = CheckRecord::new(format!("profile {}", s.name()), true)
                .count("additive degree", p.additive_degree)
                .count("defect degree", p.defect_degree())
                .note(format!("phase {label}"));
            for (name, d) in &p.defect_degree_by_strategy {
                rec = rec.count(format!("degree {name}"), *d);
            }
            run.push(rec);
            Ok(())
        });
    }
    run.step("degree routes agree", |run| {
        let fast = additive_degree_fast(&phi)?;
        let scan = additive_degree(&phi)?;
        run.push(
            CheckRecord::new("degree routes agree", fast == scan)
                .count("fast", fast)
                .count("exhaustive", scan),
        );
        Ok(())
    });
    run.step("polarization", |run| {
        if phi.space().size() > POLARIZATION_CAP {
            return Err(Error::capacity(
                "polarization table",
                phi.space().size() as u128,
                POLARIZATION_CAP as u128,
            ));
        }
        let b = polarization(&phi)?;
        let deg = additive_degree_fast(&phi)?;
        run.push(
            CheckRecord::new("polarization", b.is_biadditive() == (deg <= 2) && b.is_symmetric())
                .count("biadditive", b.is_biadditive() as u64)
                .count("zero", b.is_zero() as u64)
                .count("additive degree", deg),
        );
        Ok(())
    });
    Ok(())
}

fn phase_derive(config: &ScenarioConfig, run: &mut Run) -> Result<()> {
    let (label, phi) = subject_phase(config)?;
    let space = phi.space().clone();
    let hs = if config.increments.is_empty() {
        vec![space.basis_vector(0, space.ring().one())]
    } else {
        config.increments.clone()
    };
    run.step("difference methods agree", |run| {
        let rec = iterated_difference(&phi, &hs, DifferenceMethod::Recursive)?;
        let alt = iterated_difference(&phi, &hs, DifferenceMethod::AlternatingSum)?;
        let incs: Vec<String> = hs.iter().map(|&h| space.format_element(h)).collect();
        let mut out = CheckRecord::new("difference methods agree", rec == alt)
            .count("order", hs.len())
            .count("nonzero entries", rec.table().iter().filter(|&&v| v != 0).count())
            .count("constant", rec.is_constant() as u64)
            .note(format!("phase {label}, increments {}", incs.join(" ")));
        if let Some(x) = (0..space.size()).find(|&x| rec.at(x) != alt.at(x)) {
            out = out.witness(format!("disagree at {}", space.format_element(x)));
        }
        run.push(out);
        Ok(())
    });
    Ok(())
}

fn extract_options(config: &ScenarioConfig) -> ExtractOptions {
    ExtractOptions {
        cap: config.cap,
        seed: config.seed,
        samples: config.samples,
        weak: config.weak,
        shuffle: None,
        cache_dir: std::env::var_os(CACHE_DIR_ENV).map(Into::into),
    }
}

/// Admissibility and extraction records; returns the phase when it exists.
fn extract_step(
    config: &ScenarioConfig,
    datum: &PhaseDatum,
    strategy: DefectStrategy,
    run: &mut Run,
) -> Option<ExtractedPhase> {
    let opts = extract_options(config);
    let mut phase = None;
    run.step("admissibility", |run| {
        let adm = check_admissibility(datum, config.seed)?;
        for clause in adm.clauses() {
            let mut rec = CheckRecord::from_verdict("admissibility", clause);
            if clause.name == adm.strong.name && config.weak && !clause.pass {
                rec.verdict = super::CheckVerdict::Pass;
                rec.notes.push("not required in weak mode".into());
            }
            run.push(rec);
        }
        if !adm.weak() || (!config.weak && !adm.strong()) {
            return Ok(());
        }
        let p = extract_with(datum, strategy, &opts, adm)?;
        run.cache_hits += p.cache_hit as usize;
        phase = Some(p);
        Ok(())
    });
    let Some(p) = phase else {
        run.push(CheckRecord::new("extraction", false).note("not attempted: datum not admissible"));
        return None;
    };
    let mut rec = CheckRecord::new("extraction", p.closure_verified())
        .count("elements", p.elements.len())
        .count("generators", p.generators.len())
        .note(format!("{} closure, strategy {}", p.mode.name(), p.strategy.name()));
    for (k, size) in p.filtration.graded_sizes.iter().enumerate() {
        rec = rec.count(format!("stratum {k}"), *size);
    }
    if let Some(s) = &p.structural {
        rec = rec
            .count("words checked", s.words_checked)
            .count("law checks", s.law_checks)
            .note(s.reason.clone());
        rec.witnesses.extend(s.violations.iter().cloned());
    }
    run.push(rec);

    let bound = p.admissibility.degree_bound.unwrap_or(0);
    let mut term = CheckRecord::new(
        "termination",
        !p.filtration.is_empty() && p.max_phase_degree <= bound,
    )
    .count("depth", p.termination_depth())
    .count("steps", p.steps())
    .count("max phase degree", p.max_phase_degree)
    .count("degree bound", bound);
    for (k, w) in p.witness_descriptions().iter().enumerate() {
        if let Some(w) = w {
            term = term.witness(format!("stratum {k}: {w}"));
        }
    }
    run.push(term);
    Some(p)
}

fn model(config: &ScenarioConfig, run: &mut Run) -> Result<()> {
    let datum = PhaseDatum::new(&config.ring, config.n, config.family.clone())?;
    let strategy = config.strategies[0];
    let Some(phase) = extract_step(config, &datum, strategy, run) else {
        return Ok(());
    };
    match config.command {
        Command::ModelVerify => verify(&phase, run),
        Command::ModelBoundary => boundary(config, &phase, run)?,
        Command::ModelCompare => compare(config, &phase, run),
        _ => {}
    }
    Ok(())
}

fn verify(phase: &ExtractedPhase, run: &mut Run) {
    run.step("axioms", |run| {
        let r = verify_axioms(phase)?;
        for v in &r.verdicts {
            run.push(CheckRecord::from_verdict("axiom", v));
        }
        run.push(
            CheckRecord::new("collapse", true)
                .count("depth", r.depth)
                .count("steps", r.steps)
                .count("collapsed", r.collapsed as u64)
                .note(if r.collapsed {
                    "at most one nontrivial filtration step"
                } else {
                    "more than one nontrivial filtration step"
                }),
        );
        Ok(())
    });
}

fn boundary(config: &ScenarioConfig, phase: &ExtractedPhase, run: &mut Run) -> Result<()> {
    let extras: Vec<PhaseFunction> = config
        .extra
        .iter()
        .map(|e| phase_from_poly(&e.poly, &phase.datum.space))
        .collect::<Result<_>>()?;
    let labels: Vec<&str> = config.extra.iter().map(|e| e.label.as_str()).collect();
    run.step("unextended", |run| {
        let r = boundary_probe(phase, &[])?;
        run.push(
            CheckRecord::new("unextended/no strata beyond depth", r.new_strata.is_empty())
                .count("depth", r.base_depth),
        );
        Ok(())
    });
    run.step("boundary", |run| {
        let r = boundary_probe(phase, &extras)?;
        for v in &r.tightness.levels {
            run.push(CheckRecord::from_verdict("tightness", v));
        }
        for v in &r.checks {
            let mut rec = CheckRecord::from_verdict("boundary", v);
            // name extras by their labels rather than by position
            for (i, l) in labels.iter().enumerate() {
                rec.name = rec.name.replace(&format!("extra #{i}"), l);
            }
            run.push(rec);
        }
        let mut census = CheckRecord::new("boundary/census", true)
            .count("base depth", r.base_depth)
            .count("proper", r.proper as u64)
            .count("new strata", r.new_strata.len());
        for (k, size) in r.extension_census.iter().enumerate() {
            census = census.count(format!("stratum {k}"), *size);
        }
        for (k, w) in &r.witnesses {
            census = census.witness(format!("stratum {k}: {w}"));
        }
        run.push(census);
        Ok(())
    });
    Ok(())
}

fn compare(config: &ScenarioConfig, phase: &ExtractedPhase, run: &mut Run) {
    let mut strategies = config.strategies.clone();
    for s in [DefectStrategy::Default, DefectStrategy::Commutator] {
        if strategies.len() < 2 && !strategies.contains(&s) {
            strategies.push(s);
        }
    }
    run.step("strategies", |run| {
        let c = compare_strategies(&phase.elements, &strategies)?;
        let names: Vec<&str> = strategies.iter().map(|s| s.name()).collect();
        let mut levels = CheckRecord::new(
            "strategies/level sets",
            true,
        )
        .count("elements", c.element_count)
        .count("divergences", c.divergences.len());
        for (i, s) in strategies.iter().enumerate() {
            levels = levels.count(format!("undefined {}", s.name()), c.undefined[i]);
            levels = levels.note(format!("{}: {:?}", s.name(), c.graded_sizes[i]));
        }
        for (i, agree) in c.level_agreement.iter().enumerate() {
            let same: Vec<String> = agree.iter().map(|(k, a)| format!("{k}:{a}")).collect();
            levels = levels.note(format!("{} vs {}: {}", names[0], names[i + 1], same.join(" ")));
        }
        run.push(levels);
        if let (Some(agree), Some(confined)) = (c.agree_above_linear, c.divergences_confined) {
            run.push(CheckRecord::new("strategies/agree above linear", agree));
            let mut rec = CheckRecord::new("strategies/divergences confined", confined);
            for d in &c.divergences {
                let vals: Vec<String> = d
                    .values
                    .iter()
                    .zip(&names)
                    .map(|(v, n)| format!("{n}={}", v.map_or("-".to_string(), |x| x.to_string())))
                    .collect();
                rec = rec.witness(format!("{} [{}] {}", d.class.name(), vals.join(" "), d.element));
            }
            run.push(rec);
        }
        Ok(())
    });
    for s in &strategies {
        let name = format!("reconstruction {}", s.name());
        run.step(&name.clone(), |run| {
            let f = compute_filtration(&phase.elements, *s)?;
            run.push(
                CheckRecord::new(name, f.verify_reconstruction(&phase.elements)?)
                    .count("depth", f.depth),
            );
            Ok(())
        });
    }
    run.step("presentation", |run| {
        for i in 0..SHUFFLE_SEEDS as u64 {
            let mut opts = phase.options.clone();
            opts.shuffle = Some(config.seed.wrapping_add(i + 1));
            let other = extract_with(&phase.datum, phase.strategy, &opts, phase.admissibility.clone())?;
            let eq = equivalence_check(phase, &other);
            run.push(
                CheckRecord::new(format!("presentation/shuffle {}", i + 1), eq.equivalent)
                    .count("unmatched", eq.unmatched)
                    .count("stratum mismatches", eq.stratum_mismatches)
                    .note(eq.detail),
            );
        }
        Ok(())
    });
}
