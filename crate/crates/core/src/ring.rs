//! Finite commutative rings held as full Cayley tables.
//!
//! Every ring is built from a small descriptor (see [`RingSpec`]) and stores
//! its elements as indices in `0..order`. The index of an element is the
//! mixed-radix encoding of its coefficient vector over the additive basis the
//! constructor uses, so `a + u·b` in `F_2[u]/(u^2)` has index `a + 2b`.
//! Addition is digitwise in that basis for every family supported here.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Index of a ring element inside its owning [`FiniteRing`].
pub type Elem = u8;

/// Largest supported ring order.
pub const MAX_ORDER: usize = 256;

/// Ring-family descriptor.
///
/// Grammar: `zmod:<n>`, `chain:<p>:<k>`, `fatpoint:<p>`, `prod:(<spec>,<spec>)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RingSpec {
    /// `Z/n`.
    ZMod(u32),
    /// `F_p[u]/(u^k)`.
    Chain { p: u32, k: u32 },
    /// `F_p[x,y]/(x^2, xy, y^2)`.
    FatPoint { p: u32 },
    /// Direct product of two rings.
    Product(Box<RingSpec>, Box<RingSpec>),
}

impl fmt::Display for RingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingSpec::ZMod(n) => write!(f, "zmod:{n}"),
            RingSpec::Chain { p, k } => write!(f, "chain:{p}:{k}"),
            RingSpec::FatPoint { p } => write!(f, "fatpoint:{p}"),
            RingSpec::Product(a, b) => write!(f, "prod:({a},{b})"),
        }
    }
}

fn parse_u32(text: &str, whole: &str) -> Result<u32> {
    text.trim().parse::<u32>().map_err(|_| Error::RingSpec {
        spec: whole.to_string(),
        reason: format!("`{text}` is not a non-negative integer"),
    })
}

/// Splits `a,b` at the single top-level comma.
fn split_top_level(inner: &str) -> Option<(&str, &str)> {
    let mut depth = 0i32;
    for (i, c) in inner.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => return Some((&inner[..i], &inner[i + 1..])),
            _ => {}
        }
    }
    None
}

impl FromStr for RingSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let text = s.trim();
        let bad = |reason: &str| Error::RingSpec {
            spec: text.to_string(),
            reason: reason.to_string(),
        };
        if let Some(rest) = text.strip_prefix("prod:") {
            let inner = rest
                .trim()
                .strip_prefix('(')
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(|| bad("product must be written prod:(<spec>,<spec>)"))?;
            let (a, b) = split_top_level(inner).ok_or_else(|| bad("product needs two factors"))?;
            return Ok(RingSpec::Product(Box::new(a.parse()?), Box::new(b.parse()?)));
        }
        let parts: Vec<&str> = text.split(':').collect();
        match parts.as_slice() {
            ["zmod", n] => Ok(RingSpec::ZMod(parse_u32(n, text)?)),
            ["chain", p, k] => Ok(RingSpec::Chain {
                p: parse_u32(p, text)?,
                k: parse_u32(k, text)?,
            }),
            ["fatpoint", p] => Ok(RingSpec::FatPoint {
                p: parse_u32(p, text)?,
            }),
            _ => Err(bad("expected zmod:<n>, chain:<p>:<k>, fatpoint:<p> or prod:(<a>,<b>)")),
        }
    }
}

fn is_prime(p: u32) -> bool {
    p >= 2 && (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u32, b: u32) -> u32 {
    a / gcd(a, b) * b
}

/// A finite commutative ring with identity.
#[derive(Clone, Debug)]
pub struct FiniteRing {
    spec: RingSpec,
    name: String,
    order: usize,
    radices: Vec<u32>,
    add: Vec<Elem>,
    mul: Vec<Elem>,
    neg: Vec<Elem>,
    one: Elem,
    radical_chain: Vec<Vec<Elem>>,
}

impl PartialEq for FiniteRing {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Eq for FiniteRing {}

/// Builds the ring described by `spec`, validating every table law.
pub fn build_ring(spec: &RingSpec) -> Result<FiniteRing> {
    let text = spec.to_string();
    let bad = |reason: String| Error::RingSpec {
        spec: text.clone(),
        reason,
    };
    match spec {
        RingSpec::ZMod(n) => {
            if *n < 2 || *n as usize > MAX_ORDER {
                return Err(bad(format!("modulus must lie in 2..=256, got {n}")));
            }
            let n = *n;
            FiniteRing::from_digit_rule(spec.clone(), format!("Z/{n}"), vec![n], 1, move |a, b| {
                vec![(a[0] * b[0]) % n]
            })
        }
        RingSpec::Chain { p, k } => {
            if !is_prime(*p) {
                return Err(bad(format!("characteristic {p} is not prime")));
            }
            if *k == 0 {
                return Err(bad("nilpotency index k must be at least 1".into()));
            }
            let order = (*p as u128).checked_pow(*k).unwrap_or(u128::MAX);
            if order > MAX_ORDER as u128 {
                return Err(bad(format!("order p^k = {order} exceeds the cap 256")));
            }
            let (p, k) = (*p, *k as usize);
            let name = if k == 1 {
                format!("F_{p}")
            } else {
                format!("F_{p}[u]/(u^{k})")
            };
            FiniteRing::from_digit_rule(spec.clone(), name, vec![p; k], 1, move |a, b| {
                let mut out = vec![0u32; k];
                for i in 0..k {
                    for j in 0..k - i {
                        out[i + j] = (out[i + j] + a[i] * b[j]) % p;
                    }
                }
                out
            })
        }
        RingSpec::FatPoint { p } => {
            if !is_prime(*p) {
                return Err(bad(format!("characteristic {p} is not prime")));
            }
            if (*p as usize).pow(3) > MAX_ORDER {
                return Err(bad(format!("order p^3 = {} exceeds the cap 256", p.pow(3))));
            }
            let p = *p;
            FiniteRing::from_digit_rule(
                spec.clone(),
                format!("F_{p}[x,y]/(x^2,xy,y^2)"),
                vec![p; 3],
                1,
                move |a, b| {
                    vec![
                        (a[0] * b[0]) % p,
                        (a[0] * b[1] + a[1] * b[0]) % p,
                        (a[0] * b[2] + a[2] * b[0]) % p,
                    ]
                },
            )
        }
        RingSpec::Product(a, b) => {
            let left = build_ring(a)?;
            let right = build_ring(b)?;
            let order = left.order * right.order;
            if order > MAX_ORDER {
                return Err(bad(format!("product order {order} exceeds the cap 256")));
            }
            FiniteRing::product(spec.clone(), &left, &right)
        }
    }
}

impl FiniteRing {
    /// Builds a ring whose additive group is digitwise `Z/radix_i` and whose
    /// product is given on digit vectors.
    fn from_digit_rule<F>(
        spec: RingSpec,
        name: String,
        radices: Vec<u32>,
        one: usize,
        mul_digits: F,
    ) -> Result<FiniteRing>
    where
        F: Fn(&[u32], &[u32]) -> Vec<u32>,
    {
        let order: usize = radices.iter().map(|&r| r as usize).product();
        let digits: Vec<Vec<u32>> = (0..order).map(|i| to_digits(i, &radices)).collect();
        let mut add = vec![0; order * order];
        let mut mul = vec![0; order * order];
        for a in 0..order {
            for b in 0..order {
                let sum: Vec<u32> = digits[a]
                    .iter()
                    .zip(&digits[b])
                    .zip(&radices)
                    .map(|((x, y), r)| (x + y) % r)
                    .collect();
                add[a * order + b] = from_digits(&sum, &radices) as Elem;
                mul[a * order + b] = from_digits(&mul_digits(&digits[a], &digits[b]), &radices) as Elem;
            }
        }
        Self::from_tables(spec, name, radices, add, mul, one as Elem)
    }

    fn product(spec: RingSpec, left: &FiniteRing, right: &FiniteRing) -> Result<FiniteRing> {
        let (nl, nr) = (left.order, right.order);
        let order = nl * nr;
        let split = |i: usize| ((i % nl) as Elem, (i / nl) as Elem);
        let join = |a: Elem, b: Elem| a as usize + nl * b as usize;
        let mut add = vec![0; order * order];
        let mut mul = vec![0; order * order];
        for x in 0..order {
            let (xa, xb) = split(x);
            for y in 0..order {
                let (ya, yb) = split(y);
                add[x * order + y] = join(left.add(xa, ya), right.add(xb, yb)) as Elem;
                mul[x * order + y] = join(left.mul(xa, ya), right.mul(xb, yb)) as Elem;
            }
        }
        let mut radices = left.radices.clone();
        radices.extend_from_slice(&right.radices);
        let one = join(left.one, right.one) as Elem;
        let name = format!("{} x {}", left.name, right.name);
        Self::from_tables(spec, name, radices, add, mul, one)
    }

    fn from_tables(
        spec: RingSpec,
        name: String,
        radices: Vec<u32>,
        add: Vec<Elem>,
        mul: Vec<Elem>,
        one: Elem,
    ) -> Result<FiniteRing> {
        let order = radices.iter().map(|&r| r as usize).product::<usize>();
        let mut neg = vec![0; order];
        for a in 0..order {
            neg[a] = (0..order)
                .find(|&b| add[a * order + b] == 0)
                .ok_or_else(|| Error::InternalConsistency {
                    context: spec.to_string(),
                    detail: format!("element {a} has no additive inverse"),
                })? as Elem;
        }
        let mut ring = FiniteRing {
            spec,
            name,
            order,
            radices,
            add,
            mul,
            neg,
            one,
            radical_chain: Vec::new(),
        };
        ring.validate()?;
        ring.radical_chain = ring.compute_radical_chain()?;
        Ok(ring)
    }

    /// Exhaustive check of the commutative-ring laws on the tables.
    pub fn validate(&self) -> Result<()> {
        let n = self.order;
        let fail = |detail: String| {
            Err(Error::InternalConsistency {
                context: self.spec.to_string(),
                detail,
            })
        };
        for a in 0..n as Elem {
            if self.add(a, 0) != a {
                return fail(format!("0 is not an additive identity for {a}"));
            }
            if self.mul(a, self.one) != a {
                return fail(format!("{} is not a multiplicative identity for {a}", self.one));
            }
            for b in 0..n as Elem {
                if self.add(a, b) != self.add(b, a) {
                    return fail(format!("addition not commutative at ({a},{b})"));
                }
                if self.mul(a, b) != self.mul(b, a) {
                    return fail(format!("multiplication not commutative at ({a},{b})"));
                }
                let ab = self.add(a, b);
                let mab = self.mul(a, b);
                for c in 0..n as Elem {
                    if self.add(ab, c) != self.add(a, self.add(b, c)) {
                        return fail(format!("addition not associative at ({a},{b},{c})"));
                    }
                    if self.mul(mab, c) != self.mul(a, self.mul(b, c)) {
                        return fail(format!("multiplication not associative at ({a},{b},{c})"));
                    }
                    if self.mul(a, self.add(b, c)) != self.add(mab, self.mul(a, c)) {
                        return fail(format!("distributivity fails at ({a},{b},{c})"));
                    }
                }
            }
        }
        Ok(())
    }

    fn compute_radical_chain(&self) -> Result<Vec<Vec<Elem>>> {
        let all: Vec<Elem> = self.elements().collect();
        let rad = self.nilpotent_elements();
        let mut chain = vec![all, rad.clone()];
        let mut current = rad.clone();
        while current.len() > 1 {
            let products: Vec<Elem> = current
                .iter()
                .flat_map(|&a| rad.iter().map(move |&b| (a, b)))
                .map(|(a, b)| self.mul(a, b))
                .collect();
            let next = self.additive_span(&products);
            if next.len() >= current.len() {
                return Err(Error::InternalConsistency {
                    context: self.spec.to_string(),
                    detail: "radical powers stopped decreasing before reaching zero".into(),
                });
            }
            chain.push(next.clone());
            current = next;
        }
        Ok(chain)
    }

    pub fn spec(&self) -> &RingSpec {
        &self.spec
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn zero(&self) -> Elem {
        0
    }

    pub fn one(&self) -> Elem {
        self.one
    }

    /// Radices of the additive basis; the index of an element is its digit
    /// vector read in this mixed radix.
    pub fn radices(&self) -> &[u32] {
        &self.radices
    }

    /// Additive generators: basis element `i` has digit vector `e_i`.
    pub fn additive_basis(&self) -> Vec<Elem> {
        let mut stride = 1usize;
        self.radices
            .iter()
            .map(|&r| {
                let g = stride as Elem;
                stride *= r as usize;
                g
            })
            .collect()
    }

    pub fn digits(&self, a: Elem) -> Vec<u32> {
        to_digits(a as usize, &self.radices)
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        (0..self.order).map(|i| i as Elem)
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        self.add[a as usize * self.order + b as usize]
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg[b as usize])
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        self.neg[a as usize]
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.mul[a as usize * self.order + b as usize]
    }

    /// `k·a` for a non-negative integer `k`.
    pub fn scale_int(&self, k: u64, a: Elem) -> Elem {
        let k = k % self.additive_order(a) as u64;
        (0..k).fold(0, |acc, _| self.add(acc, a))
    }

    pub fn pow(&self, a: Elem, e: u32) -> Elem {
        (0..e).fold(self.one, |acc, _| self.mul(acc, a))
    }

    pub fn additive_order(&self, a: Elem) -> u32 {
        let mut k = 1;
        let mut acc = a;
        while acc != 0 {
            acc = self.add(acc, a);
            k += 1;
        }
        k
    }

    /// Exponent of `(R,+)`: the least `m` with `m·r = 0` for every `r`.
    pub fn additive_exponent(&self) -> u32 {
        self.radices.iter().fold(1, |acc, &r| lcm(acc, r))
    }

    pub fn is_unit(&self, a: Elem) -> bool {
        self.elements().any(|b| self.mul(a, b) == self.one)
    }

    pub fn is_nilpotent(&self, a: Elem) -> bool {
        self.pow(a, self.order as u32) == 0
    }

    /// Nilpotent elements by power iteration: `r^order = 0`.
    pub fn nilpotent_elements(&self) -> Vec<Elem> {
        self.elements().filter(|&a| self.is_nilpotent(a)).collect()
    }

    /// Jacobson radical via `x ∈ J ⟺ 1 − xy` is a unit for every `y`.
    pub fn jacobson_radical(&self) -> Vec<Elem> {
        let units: Vec<bool> = self.elements().map(|a| self.is_unit(a)).collect();
        self.elements()
            .filter(|&x| {
                self.elements()
                    .all(|y| units[self.sub(self.one, self.mul(x, y)) as usize])
            })
            .collect()
    }

    /// Additive subgroup generated by `gens`, sorted.
    pub fn additive_span(&self, gens: &[Elem]) -> Vec<Elem> {
        let mut seen = vec![false; self.order];
        seen[0] = true;
        let mut stack = vec![0 as Elem];
        while let Some(a) = stack.pop() {
            for &g in gens {
                let s = self.add(a, g) as usize;
                if !seen[s] {
                    seen[s] = true;
                    stack.push(s as Elem);
                }
            }
        }
        (0..self.order).filter(|&i| seen[i]).map(|i| i as Elem).collect()
    }

    /// The principal ideal `rR`, sorted.
    pub fn principal_ideal(&self, r: Elem) -> Vec<Elem> {
        let mut out: Vec<Elem> = self.elements().map(|s| self.mul(r, s)).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn radical_chain(&self) -> &[Vec<Elem>] {
        &self.radical_chain
    }

    pub fn radical(&self) -> &[Elem] {
        &self.radical_chain[1]
    }

    pub fn in_radical(&self, a: Elem) -> bool {
        self.radical().binary_search(&a).is_ok()
    }

    /// Length of the radical chain minus one.
    pub fn nilpotency_length(&self) -> usize {
        self.radical_chain.len() - 1
    }

    pub fn is_reduced(&self) -> bool {
        self.radical().len() == 1
    }

    /// Human-readable name of an element (`1+u`, `x`, `(1,2)`, ...).
    pub fn format_elem(&self, a: Elem) -> String {
        format_spec_elem(&self.spec, a as usize)
    }
}

fn format_spec_elem(spec: &RingSpec, index: usize) -> String {
    let poly = |digits: &[u32], names: &[String]| {
        let terms: Vec<String> = digits
            .iter()
            .zip(names)
            .filter(|(c, _)| **c != 0)
            .map(|(c, name)| match (name.as_str(), *c) {
                ("", c) => c.to_string(),
                (n, 1) => n.to_string(),
                (n, c) => format!("{c}{n}"),
            })
            .collect();
        if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join("+")
        }
    };
    match spec {
        RingSpec::ZMod(_) => index.to_string(),
        RingSpec::Chain { p, k } => {
            let radices = vec![*p; *k as usize];
            let names: Vec<String> = (0..*k)
                .map(|i| match i {
                    0 => String::new(),
                    1 => "u".to_string(),
                    i => format!("u^{i}"),
                })
                .collect();
            poly(&to_digits(index, &radices), &names)
        }
        RingSpec::FatPoint { p } => {
            let names = [String::new(), "x".to_string(), "y".to_string()];
            poly(&to_digits(index, &[*p; 3]), &names)
        }
        RingSpec::Product(a, b) => {
            let na = spec_order(a);
            format!(
                "({},{})",
                format_spec_elem(a, index % na),
                format_spec_elem(b, index / na)
            )
        }
    }
}

fn spec_order(spec: &RingSpec) -> usize {
    match spec {
        RingSpec::ZMod(n) => *n as usize,
        RingSpec::Chain { p, k } => (*p as usize).pow(*k),
        RingSpec::FatPoint { p } => (*p as usize).pow(3),
        RingSpec::Product(a, b) => spec_order(a) * spec_order(b),
    }
}

fn to_digits(mut index: usize, radices: &[u32]) -> Vec<u32> {
    radices
        .iter()
        .map(|&r| {
            let d = (index % r as usize) as u32;
            index /= r as usize;
            d
        })
        .collect()
}

fn from_digits(digits: &[u32], radices: &[u32]) -> usize {
    digits
        .iter()
        .zip(radices)
        .rev()
        .fold(0usize, |acc, (&d, &r)| acc * r as usize + d as usize)
}
