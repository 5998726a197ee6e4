//! Phase data: a ring, a rank, a phase family and a character choice.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::calculus::{additive_degree_fast, degree_at_most};
use crate::chars::{find_generating_character, AdditiveCharacter};
use crate::error::{Error, Result};
use crate::module::ModuleSpace;
use crate::phase::{phase_from_poly, PhaseFunction, PolynomialSpec};
use crate::ring::{build_ring, Elem, FiniteRing, RingSpec};

/// Largest number of candidate tables `|R|^|A|` filtered exhaustively.
pub const FAMILY_ENUMERATION_CAP: u128 = 1 << 20;

/// Highest degree bound a family descriptor may carry.
pub const MAX_FAMILY_DEGREE: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilyDescriptor {
    /// Every phase of additive degree at most `d`.
    DegreeAtMost(usize),
    Polynomials(Vec<PolynomialSpec>),
    Explicit(Vec<PhaseFunction>),
}

impl fmt::Display for FamilyDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyDescriptor::DegreeAtMost(d) => write!(f, "deg{d}"),
            FamilyDescriptor::Polynomials(ps) => {
                let parts: Vec<String> = ps.iter().map(|p| p.to_string()).collect();
                write!(f, "poly:{}", parts.join(";"))
            }
            FamilyDescriptor::Explicit(list) => write!(f, "explicit:{}", list.len()),
        }
    }
}

impl FromStr for FamilyDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("deg") {
            let d: usize = rest
                .parse()
                .map_err(|_| Error::Parse(format!("bad family degree in {s:?}")))?;
            if d > MAX_FAMILY_DEGREE {
                return Err(Error::Parse(format!(
                    "family degree {d} exceeds {MAX_FAMILY_DEGREE}"
                )));
            }
            return Ok(FamilyDescriptor::DegreeAtMost(d));
        }
        if let Some(rest) = s.strip_prefix("poly:") {
            let polys = rest
                .split(';')
                .map(|p| {
                    if p.trim().is_empty() {
                        return Err(Error::Parse(format!("empty polynomial in {s:?}")));
                    }
                    p.parse::<PolynomialSpec>()
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok(FamilyDescriptor::Polynomials(polys));
        }
        Err(Error::Parse(format!(
            "unknown family {s:?} (expected degN or poly:<p>;<p>…)"
        )))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CharacterChoice {
    /// First generating character in canonical order.
    #[default]
    Canonical,
    Index(usize),
}

impl fmt::Display for CharacterChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CharacterChoice::Canonical => f.write_str("canonical"),
            CharacterChoice::Index(i) => write!(f, "index:{i}"),
        }
    }
}

/// The members of a family, when they can be listed.
#[derive(Clone, Debug)]
pub enum Members {
    Enumerated(Vec<PhaseFunction>),
    /// Too many candidate tables; the family is handled by sampling.
    Structural { candidates: u128 },
}

#[derive(Clone, Debug)]
pub struct PhaseDatum {
    pub ring: Arc<FiniteRing>,
    pub space: Arc<ModuleSpace>,
    pub family: FamilyDescriptor,
    /// Extra generators adjoined to the family, e.g. for boundary probes.
    pub extras: Vec<PhaseFunction>,
    pub character: CharacterChoice,
}

impl PhaseDatum {
    pub fn new(spec: &RingSpec, rank: usize, family: FamilyDescriptor) -> Result<Self> {
        let ring = Arc::new(build_ring(spec)?);
        let space = ModuleSpace::new(ring.clone(), rank)?;
        Self::over(space, family)
    }

    pub fn over(space: Arc<ModuleSpace>, family: FamilyDescriptor) -> Result<Self> {
        space.ensure_enumerable()?;
        if let FamilyDescriptor::Explicit(list) = &family {
            if list.is_empty() {
                return Err(Error::Inadmissible("empty phase family".into()));
            }
            for phi in list {
                if phi.space() != &space {
                    return Err(Error::DomainMismatch("family member on another module".into()));
                }
            }
        }
        Ok(PhaseDatum {
            ring: space.ring().clone(),
            space,
            family,
            extras: Vec::new(),
            character: CharacterChoice::Canonical,
        })
    }

    pub fn with_extras(mut self, extras: Vec<PhaseFunction>) -> Result<Self> {
        for e in &extras {
            if e.space() != &self.space {
                return Err(Error::DomainMismatch("extra phase on another module".into()));
            }
        }
        self.extras = extras;
        Ok(self)
    }

    pub fn with_character(mut self, character: CharacterChoice) -> Self {
        self.character = character;
        self
    }

    pub fn rank(&self) -> usize {
        self.space.rank()
    }

    pub fn describe(&self) -> String {
        let mut s = format!("{} n={} family={}", self.ring.spec(), self.rank(), self.family);
        if !self.extras.is_empty() {
            s.push_str(&format!(" extras={}", self.extras.len()));
        }
        s
    }

    /// The realizing character, or `None` when the choice admits none.
    pub fn character(&self) -> Result<Option<AdditiveCharacter>> {
        match self.character {
            CharacterChoice::Canonical => Ok(find_generating_character(&self.ring).0),
            CharacterChoice::Index(i) if i < self.ring.order() => {
                let chi = AdditiveCharacter::new(self.ring.clone(), i);
                Ok(chi.is_generating().then_some(chi))
            }
            CharacterChoice::Index(i) => Err(Error::DomainMismatch(format!(
                "character index {i} ≥ |R| = {}",
                self.ring.order()
            ))),
        }
    }

    /// Listed family members followed by the extras, deduplicated.
    pub fn members(&self) -> Result<Members> {
        let mut list = match &self.family {
            FamilyDescriptor::DegreeAtMost(d) => match enumerate_degree_family(&self.space, *d)? {
                Some(list) => list,
                None => {
                    return Ok(Members::Structural {
                        candidates: candidate_count(&self.space),
                    })
                }
            },
            FamilyDescriptor::Polynomials(ps) => ps
                .iter()
                .map(|p| phase_from_poly(p, &self.space))
                .collect::<Result<_>>()?,
            FamilyDescriptor::Explicit(list) => list.clone(),
        };
        list.extend(self.extras.iter().cloned());
        list.sort_by(|a, b| a.table().cmp(b.table()));
        list.dedup();
        Ok(Members::Enumerated(list))
    }

    /// Membership in the family (extras included).
    pub fn contains(&self, phi: &PhaseFunction) -> bool {
        if self.extras.contains(phi) {
            return true;
        }
        match &self.family {
            FamilyDescriptor::DegreeAtMost(d) => degree_at_most(phi, *d),
            FamilyDescriptor::Polynomials(ps) => ps
                .iter()
                .any(|p| phase_from_poly(p, &self.space).map(|q| &q == phi).unwrap_or(false)),
            FamilyDescriptor::Explicit(list) => list.contains(phi),
        }
    }

    /// Uniform additive-degree bound over the family.
    pub fn degree_bound(&self) -> Result<usize> {
        let listed = |list: &[PhaseFunction]| -> Result<usize> {
            list.iter()
                .map(additive_degree_fast)
                .try_fold(0, |m, d| Ok(m.max(d?)))
        };
        let extras = listed(&self.extras)?;
        let base = match &self.family {
            FamilyDescriptor::DegreeAtMost(d) => *d,
            FamilyDescriptor::Polynomials(ps) => listed(
                &ps.iter()
                    .map(|p| phase_from_poly(p, &self.space))
                    .collect::<Result<Vec<_>>>()?,
            )?,
            FamilyDescriptor::Explicit(list) => listed(list)?,
        };
        Ok(base.max(extras))
    }

    /// A random family member. Degree families are sampled as sums of
    /// products of random additive maps `A → R`.
    pub fn sample_member<G: Rng + ?Sized>(&self, rng: &mut G) -> Result<PhaseFunction> {
        let listed = |list: &[PhaseFunction], rng: &mut G| {
            list.choose(rng).cloned().expect("nonempty family")
        };
        if !self.extras.is_empty() && rng.gen_bool(0.25) {
            return Ok(listed(&self.extras, rng));
        }
        Ok(match &self.family {
            FamilyDescriptor::DegreeAtMost(d) => {
                let target = rng.gen_range(0..=*d);
                random_phase_of_degree(&self.space, target, rng)
            }
            FamilyDescriptor::Polynomials(ps) => {
                phase_from_poly(ps.choose(rng).expect("nonempty family"), &self.space)?
            }
            FamilyDescriptor::Explicit(list) => listed(list, rng),
        })
    }
}

fn candidate_count(space: &ModuleSpace) -> u128 {
    let q = space.ring().order() as u128;
    let mut count: u128 = 1;
    for _ in 0..space.size() {
        count = count.saturating_mul(q);
        if count > FAMILY_ENUMERATION_CAP {
            return u128::MAX;
        }
    }
    count
}

/// All tables of degree ≤ `d`, by filtering every function `A → R`;
/// `None` when there are more than [`FAMILY_ENUMERATION_CAP`] tables.
pub fn enumerate_degree_family(
    space: &Arc<ModuleSpace>,
    d: usize,
) -> Result<Option<Vec<PhaseFunction>>> {
    let count = candidate_count(space);
    if count > FAMILY_ENUMERATION_CAP {
        return Ok(None);
    }
    Ok(Some(
        all_tables(space)
            .into_par_iter()
            .filter(|phi| degree_at_most(phi, d))
            .collect(),
    ))
}

/// Every function `A → R` in lexicographic table order (`|R|^|A|` must be
/// small; callers check [`FAMILY_ENUMERATION_CAP`]).
pub fn all_tables(space: &Arc<ModuleSpace>) -> Vec<PhaseFunction> {
    let q = space.ring().order();
    let size = space.size();
    let count = candidate_count(space) as usize;
    (0..count)
        .map(|mut idx| {
            let mut table = vec![0 as Elem; size];
            for v in table.iter_mut().rev() {
                *v = (idx % q) as Elem;
                idx /= q;
            }
            PhaseFunction::new(space.clone(), table).expect("valid table")
        })
        .collect()
}

/// A uniformly random additive map `(A,+) → (R,+)`, as a phase.
pub fn random_additive_map<G: Rng + ?Sized>(space: &Arc<ModuleSpace>, rng: &mut G) -> PhaseFunction {
    let ring = space.ring();
    let radices = ring.radices();
    // images of each digit generator must be killed by that digit's radix
    let admissible: Vec<Vec<Elem>> = radices
        .iter()
        .map(|&r| {
            ring.elements()
                .filter(|&x| ring.scale_int(r as u64, x) == 0)
                .collect()
        })
        .collect();
    let images: Vec<Vec<Elem>> = (0..space.rank())
        .map(|_| {
            admissible
                .iter()
                .map(|opts| *opts.choose(rng).expect("0 is admissible"))
                .collect()
        })
        .collect();
    let table = space
        .elements()
        .map(|x| {
            let mut acc = 0;
            for (i, imgs) in images.iter().enumerate() {
                for (digit, &img) in ring.digits(space.coord(x, i)).iter().zip(imgs) {
                    acc = ring.add(acc, ring.scale_int(*digit as u64, img));
                }
            }
            acc
        })
        .collect();
    PhaseFunction::new(space.clone(), table).expect("valid table")
}

/// A random phase of additive degree ≤ `d`: a constant plus a few sums of
/// products of at most `d` random additive maps.
pub fn random_phase_of_degree<G: Rng + ?Sized>(
    space: &Arc<ModuleSpace>,
    d: usize,
    rng: &mut G,
) -> PhaseFunction {
    let ring = space.ring();
    let c = rng.gen_range(0..ring.order()) as Elem;
    let mut phi = PhaseFunction::constant(space.clone(), c);
    for _ in 0..rng.gen_range(1..=3) {
        if d == 0 {
            break;
        }
        let k = rng.gen_range(1..=d);
        let term = (1..k).fold(random_additive_map(space, rng), |acc, _| {
            acc.mul(&random_additive_map(space, rng))
        });
        phi = phi.add(&term);
    }
    phi
}
