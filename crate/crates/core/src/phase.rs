//! Phase functions `φ: R^n → R` stored as dense tables.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::module::{ModuleHom, ModuleSpace};
use crate::ring::{build_ring, Elem, RingSpec};

/// Dense table of a function `A → R`, indexed by packed module element.
#[derive(Clone)]
pub struct PhaseFunction {
    space: Arc<ModuleSpace>,
    table: Vec<Elem>,
}

impl fmt::Debug for PhaseFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PhaseFunction({:?}, {:?})", self.space, self.table)
    }
}

impl PartialEq for PhaseFunction {
    fn eq(&self, other: &Self) -> bool {
        self.table == other.table && self.space == other.space
    }
}

impl Eq for PhaseFunction {}

impl Hash for PhaseFunction {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.table.hash(state);
    }
}

impl PhaseFunction {
    pub fn new(space: Arc<ModuleSpace>, table: Vec<Elem>) -> Result<Self> {
        if table.len() != space.size() {
            return Err(Error::RankMismatch {
                expected: space.size(),
                found: table.len(),
            });
        }
        let q = space.ring().order();
        if let Some(bad) = table.iter().find(|&&v| v as usize >= q) {
            return Err(Error::Parse(format!("{bad} is not an element of {}", space.ring().spec())));
        }
        Ok(PhaseFunction { space, table })
    }

    pub(crate) fn from_table_unchecked(space: Arc<ModuleSpace>, table: Vec<Elem>) -> Self {
        debug_assert_eq!(table.len(), space.size());
        PhaseFunction { space, table }
    }

    pub fn from_fn(space: Arc<ModuleSpace>, f: impl Fn(usize) -> Elem) -> Result<Self> {
        space.ensure_enumerable()?;
        let table = space.elements().map(f).collect();
        Self::new(space, table)
    }

    pub fn zero(space: Arc<ModuleSpace>) -> Self {
        Self::constant(space, 0)
    }

    pub fn constant(space: Arc<ModuleSpace>, c: Elem) -> Self {
        let table = vec![c; space.size()];
        PhaseFunction { space, table }
    }

    pub fn space(&self) -> &Arc<ModuleSpace> {
        &self.space
    }

    pub fn table(&self) -> &[Elem] {
        &self.table
    }

    #[inline]
    pub fn at(&self, x: usize) -> Elem {
        self.table[x]
    }

    pub fn same_domain(&self, other: &PhaseFunction) -> Result<()> {
        if self.space != other.space {
            return Err(Error::DomainMismatch(format!(
                "{:?} vs {:?}",
                self.space, other.space
            )));
        }
        Ok(())
    }

    fn zip_with(&self, other: &PhaseFunction, op: impl Fn(Elem, Elem) -> Elem) -> PhaseFunction {
        let table = self
            .table
            .iter()
            .zip(&other.table)
            .map(|(&a, &b)| op(a, b))
            .collect();
        PhaseFunction::from_table_unchecked(self.space.clone(), table)
    }

    /// Pointwise sum. Panics on a domain mismatch.
    pub fn add(&self, other: &PhaseFunction) -> PhaseFunction {
        assert_eq!(self.space, other.space, "phase domains differ");
        let ring = self.space.ring();
        self.zip_with(other, |a, b| ring.add(a, b))
    }

    pub fn sub(&self, other: &PhaseFunction) -> PhaseFunction {
        assert_eq!(self.space, other.space, "phase domains differ");
        let ring = self.space.ring();
        self.zip_with(other, |a, b| ring.sub(a, b))
    }

    /// Pointwise product in `R`.
    pub fn mul(&self, other: &PhaseFunction) -> PhaseFunction {
        assert_eq!(self.space, other.space, "phase domains differ");
        let ring = self.space.ring();
        self.zip_with(other, |a, b| ring.mul(a, b))
    }

    pub fn neg(&self) -> PhaseFunction {
        let ring = self.space.ring();
        let table = self.table.iter().map(|&a| ring.neg(a)).collect();
        PhaseFunction::from_table_unchecked(self.space.clone(), table)
    }

    pub fn scale(&self, c: Elem) -> PhaseFunction {
        let ring = self.space.ring();
        let table = self.table.iter().map(|&a| ring.mul(c, a)).collect();
        PhaseFunction::from_table_unchecked(self.space.clone(), table)
    }

    /// `x ↦ φ(x + b)`.
    pub fn translate(&self, b: usize) -> PhaseFunction {
        let table = self
            .space
            .elements()
            .map(|x| self.table[self.space.add(x, b)])
            .collect();
        PhaseFunction::from_table_unchecked(self.space.clone(), table)
    }

    /// `Δ_h φ (x) = φ(x+h) − φ(x)`.
    pub fn difference(&self, h: usize) -> PhaseFunction {
        let ring = self.space.ring();
        let table = self
            .space
            .elements()
            .map(|x| ring.sub(self.table[self.space.add(x, h)], self.table[x]))
            .collect();
        PhaseFunction::from_table_unchecked(self.space.clone(), table)
    }

    pub fn is_zero(&self) -> bool {
        self.table.iter().all(|&v| v == 0)
    }

    pub fn is_constant(&self) -> bool {
        self.table.iter().all(|&v| v == self.table[0])
    }

    /// Value at the origin.
    pub fn at_origin(&self) -> Elem {
        self.table[0]
    }
}

/// `f*(φ') = φ' ∘ f`.
pub fn pullback_phase(f: &ModuleHom, phase: &PhaseFunction) -> Result<PhaseFunction> {
    if f.target().as_ref() != phase.space().as_ref() {
        return Err(Error::RankMismatch {
            expected: f.target().rank(),
            found: phase.space().rank(),
        });
    }
    let source = f.source().clone();
    source.ensure_enumerable()?;
    let table = source.elements().map(|x| phase.at(f.apply(x))).collect();
    Ok(PhaseFunction::from_table_unchecked(source, table))
}

/// Largest monomial size accepted by [`PolynomialSpec`].
pub const MAX_MONOMIAL_SIZE: usize = 3;

/// `coeff · x_{i1} ⋯ x_{ik}` with zero-based coordinate positions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub positions: Vec<usize>,
    pub coeff: Elem,
}

/// A polynomial with ring coefficients, used only to construct tables.
///
/// Text form: terms joined by `+`, each term `[<coeff>*]x<i>x<j>...` with
/// one-based variable numbers and the coefficient given as a ring element
/// index; a bare integer is a constant term. Example: `2*x1x2 + x3 + 1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PolynomialSpec {
    pub terms: Vec<Monomial>,
}

impl PolynomialSpec {
    pub fn monomial(coeff: Elem, positions: &[usize]) -> Self {
        PolynomialSpec {
            terms: vec![Monomial {
                positions: positions.to_vec(),
                coeff,
            }],
        }
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|m| m.positions.len()).max().unwrap_or(0)
    }

    fn check(&self, rank: usize, order: usize) -> Result<()> {
        for m in &self.terms {
            if m.positions.len() > MAX_MONOMIAL_SIZE {
                return Err(Error::Parse(format!(
                    "monomial of size {} exceeds the cap {MAX_MONOMIAL_SIZE}",
                    m.positions.len()
                )));
            }
            if let Some(&p) = m.positions.iter().find(|&&p| p >= rank) {
                return Err(Error::Parse(format!(
                    "variable x{} out of range for rank {rank}",
                    p + 1
                )));
            }
            if m.coeff as usize >= order {
                return Err(Error::Parse(format!("coefficient {} is not a ring element", m.coeff)));
            }
        }
        Ok(())
    }
}

impl FromStr for PolynomialSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "0" {
            return Ok(PolynomialSpec::default());
        }
        let mut terms = Vec::new();
        for raw in s.split('+') {
            let term = raw.trim().replace(' ', "");
            if term.is_empty() {
                return Err(Error::Parse(format!("empty term in polynomial `{s}`")));
            }
            let (coeff, vars) = match term.split_once('*') {
                Some((c, rest)) if !c.starts_with('x') => (c.to_string(), rest.to_string()),
                _ if !term.starts_with('x') => (term.clone(), String::new()),
                _ => ("1".to_string(), term.clone()),
            };
            let coeff: Elem = coeff
                .parse()
                .map_err(|_| Error::Parse(format!("bad coefficient `{coeff}` in `{term}`")))?;
            let mut positions = Vec::new();
            for v in vars.split(['x', '*']).filter(|v| !v.is_empty()) {
                let i: usize = v
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad variable `x{v}` in `{term}`")))?;
                if i == 0 {
                    return Err(Error::Parse("variables are numbered from x1".into()));
                }
                positions.push(i - 1);
            }
            positions.sort_unstable();
            terms.push(Monomial { positions, coeff });
        }
        Ok(PolynomialSpec { terms })
    }
}

impl fmt::Display for PolynomialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|m| {
                let vars: String = m.positions.iter().map(|p| format!("x{}", p + 1)).collect();
                match (m.coeff, vars.is_empty()) {
                    (c, true) => c.to_string(),
                    (1, false) => vars,
                    (c, false) => format!("{c}*{vars}"),
                }
            })
            .collect();
        write!(f, "{}", parts.join("+"))
    }
}

/// Evaluates `spec` at every point of `space`.
pub fn phase_from_poly(spec: &PolynomialSpec, space: &Arc<ModuleSpace>) -> Result<PhaseFunction> {
    let ring = space.ring().clone();
    spec.check(space.rank(), ring.order())?;
    PhaseFunction::from_fn(space.clone(), |x| {
        let coords = space.coords(x);
        spec.terms.iter().fold(0, |acc, m| {
            let v = m
                .positions
                .iter()
                .fold(m.coeff, |prod, &p| ring.mul(prod, coords[p]));
            ring.add(acc, v)
        })
    })
}

/// Writes the phase table text format: a `ring=<spec> n=<rank>` header and
/// one ring-element index per line in packed order.
pub fn format_phase_table(phase: &PhaseFunction) -> String {
    let mut out = format!(
        "ring={} n={}\n",
        phase.space().ring().spec(),
        phase.space().rank()
    );
    for v in phase.table() {
        out.push_str(&v.to_string());
        out.push('\n');
    }
    out
}

pub fn parse_phase_table(text: &str) -> Result<PhaseFunction> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty phase table".into()))?;
    let mut ring_spec = None;
    let mut rank = None;
    for field in header.split_whitespace() {
        match field.split_once('=') {
            Some(("ring", v)) => ring_spec = Some(v.parse::<RingSpec>()?),
            Some(("n", v)) => {
                rank = Some(
                    v.parse::<usize>()
                        .map_err(|_| Error::Parse(format!("bad rank `{v}`")))?,
                )
            }
            _ => return Err(Error::Parse(format!("unexpected header field `{field}`"))),
        }
    }
    let (spec, rank) = match (ring_spec, rank) {
        (Some(s), Some(n)) => (s, n),
        _ => return Err(Error::Parse("header must be `ring=<spec> n=<rank>`".into())),
    };
    let space = ModuleSpace::new(Arc::new(build_ring(&spec)?), rank)?;
    space.ensure_enumerable()?;
    let table = lines
        .map(|l| {
            l.parse::<Elem>()
                .map_err(|_| Error::Parse(format!("bad table entry `{l}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    PhaseFunction::new(space, table)
}

pub fn read_phase_table(path: &Path) -> Result<PhaseFunction> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_phase_table(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(s: &str, n: usize) -> Arc<ModuleSpace> {
        ModuleSpace::new(Arc::new(build_ring(&s.parse().unwrap()).unwrap()), n).unwrap()
    }

    #[test]
    fn radical_bilinear_phase_table() {
        let a = space("chain:2:2", 2);
        let phi = phase_from_poly(&"2*x1x2".parse().unwrap(), &a).unwrap();
        // φ(1,1) = u
        assert_eq!(phi.at(a.encode(&[1, 1])), 2);
        // u·u = 0: the row x1 = u vanishes
        for x2 in 0..4 {
            assert_eq!(phi.at(a.encode(&[2, x2])), 0);
        }
        assert_eq!(phi.at(a.encode(&[3, 3])), 2);
    }

    #[test]
    fn empty_spec_is_zero() {
        let a = space("zmod:3", 2);
        assert!(phase_from_poly(&"0".parse().unwrap(), &a).unwrap().is_zero());
        assert!(phase_from_poly(&PolynomialSpec::default(), &a).unwrap().is_zero());
    }

    #[test]
    fn cubic_witness() {
        let a = space("chain:2:2", 3);
        let psi = phase_from_poly(&"x1x2x3".parse().unwrap(), &a).unwrap();
        assert_eq!(psi.at(a.encode(&[1, 1, 1])), 1);
        assert_eq!(psi.at(a.encode(&[1, 1, 0])), 0);
    }

    #[test]
    fn polynomial_parse_and_errors() {
        let p: PolynomialSpec = "2*x1x2 + x3 + 1".parse().unwrap();
        assert_eq!(p.terms.len(), 3);
        assert_eq!(p.degree(), 2);
        assert_eq!(p.to_string(), "2*x1x2+x3+1");
        assert_eq!("x1*x2*x3".parse::<PolynomialSpec>().unwrap().to_string(), "x1x2x3");
        let a = space("chain:2:2", 2);
        assert!(phase_from_poly(&"x3".parse().unwrap(), &a).is_err());
        assert!(phase_from_poly(&"x1x1x1x2".parse().unwrap(), &a).is_err());
        assert!("x0".parse::<PolynomialSpec>().is_err());
        assert!("a*x1".parse::<PolynomialSpec>().is_err());
    }

    #[test]
    fn pullback_examples() {
        let a = space("chain:2:2", 2);
        let phi = phase_from_poly(&"2*x1x2+x1".parse().unwrap(), &a).unwrap();
        let id = ModuleHom::identity(a.clone());
        assert_eq!(pullback_phase(&id, &phi).unwrap(), phi);
        let zero = ModuleHom::zero(a.clone(), a.clone());
        let pulled = pullback_phase(&zero, &phi).unwrap();
        assert!(pulled.is_constant());
        assert_eq!(pulled.at(0), phi.at(0));
        let b = space("chain:2:2", 3);
        let phi3 = PhaseFunction::zero(b);
        assert!(pullback_phase(&id, &phi3).is_err());
    }

    #[test]
    fn table_text_round_trip() {
        let a = space("chain:2:2", 2);
        let phi = phase_from_poly(&"2*x1x2+3".parse().unwrap(), &a).unwrap();
        let text = format_phase_table(&phi);
        assert!(text.starts_with("ring=chain:2:2 n=2\n"));
        assert_eq!(parse_phase_table(&text).unwrap(), phi);
        assert!(parse_phase_table("ring=chain:2:2 n=1\n0\n1\n").is_err());
        assert!(parse_phase_table("ring=chain:2:2 n=1\n0\n1\n2\n9\n").is_err());
        assert!(parse_phase_table("rank=1\n").is_err());
    }

    #[test]
    fn translate_and_difference() {
        let a = space("zmod:5", 1);
        let phi = PhaseFunction::from_fn(a.clone(), |x| ((x * x) % 5) as Elem).unwrap();
        let d = phi.difference(1);
        let t = phi.translate(1).sub(&phi);
        assert_eq!(d, t);
        // Δ_1 x^2 = 2x + 1
        for x in 0..5 {
            assert_eq!(d.at(x) as usize, (2 * x + 1) % 5);
        }
    }
}
