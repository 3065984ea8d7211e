//! Sparse multivariate polynomials over `f64` coefficients.
//!
//! Terms are keyed by exponent vectors and kept in graded lexicographic
//! order (total degree first, then the exponent vector itself), which makes
//! every iteration over a polynomial deterministic. That ordering is relied
//! on throughout the sum-of-squares lowering and the SDPA export.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::{SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Exponent vector of a monomial. Ordered by total degree, then
/// lexicographically on the exponents.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial {
    exps: Vec<u32>,
}

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Self { exps }
    }

    /// The constant monomial `1` over `nvars` variables.
    pub fn one(nvars: usize) -> Self {
        Self { exps: vec![0; nvars] }
    }

    /// The monomial `x_i` over `nvars` variables.
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index out of range");
        let mut exps = vec![0; nvars];
        exps[i] = 1;
        Self { exps }
    }

    pub fn nvars(&self) -> usize {
        self.exps.len()
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exps
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.exps.len(), other.exps.len());
        Monomial {
            exps: self
                .exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        debug_assert_eq!(point.len(), self.exps.len());
        let mut v = 1.0;
        for (x, &e) in point.iter().zip(&self.exps) {
            if e > 0 {
                v *= x.powi(e as i32);
            }
        }
        v
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.exps.cmp(&other.exps))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &e) in self.exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "x{i}")?;
            } else {
                write!(f, "x{i}^{e}")?;
            }
        }
        if first {
            write!(f, "1")?;
        }
        Ok(())
    }
}

/// All monomials over `nvars` variables with total degree at most `max_deg`,
/// in graded lexicographic order.
pub fn monomials_up_to(nvars: usize, max_deg: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    for d in 0..=max_deg {
        let mut exps = vec![0u32; nvars];
        fill(&mut out, &mut exps, 0, d);
    }
    return out;

    fn fill(out: &mut Vec<Monomial>, exps: &mut Vec<u32>, pos: usize, remaining: u32) {
        if pos + 1 == exps.len() {
            exps[pos] = remaining;
            out.push(Monomial::new(exps.clone()));
            exps[pos] = 0;
            return;
        }
        if exps.is_empty() {
            if remaining == 0 {
                out.push(Monomial::new(vec![]));
            }
            return;
        }
        for e in 0..=remaining {
            exps[pos] = e;
            fill(out, exps, pos + 1, remaining - e);
        }
        exps[pos] = 0;
    }
}

/// Number of monomials over `nvars` variables with degree at most `max_deg`,
/// i.e. `C(nvars + max_deg, max_deg)`. Computed without enumeration so it
/// stays usable for basis-size diagnostics far past any materializable size.
pub fn monomial_count(nvars: usize, max_deg: u32) -> u128 {
    let n = nvars as u128;
    let d = max_deg as u128;
    // C(n + d, d)
    let mut num = 1u128;
    for k in 1..=d {
        num = num * (n + k) / k;
    }
    num
}

/// Sparse multivariate polynomial. Zero-coefficient terms are never stored.
#[derive(Clone, PartialEq, Debug)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, f64>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::one(nvars), c);
        p
    }

    pub fn variable(nvars: usize, i: usize) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::var(nvars, i), 1.0);
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, f64)>) -> Self {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn coeff(&self, m: &Monomial) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    /// Adds `c` to the coefficient of `m`, dropping the term if it cancels.
    pub fn add_term(&mut self, m: Monomial, c: f64) {
        debug_assert_eq!(m.nvars(), self.nvars);
        if c == 0.0 {
            return;
        }
        let cancelled = {
            let entry = self.terms.entry(m.clone()).or_insert(0.0);
            *entry += c;
            *entry == 0.0
        };
        if cancelled {
            self.terms.remove(&m);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, f64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn support(&self) -> impl Iterator<Item = &Monomial> {
        self.terms.keys()
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        let mut p = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            p.add_term(m.clone(), c * s);
        }
        p
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, other.nvars, "mixed variable counts");
        let mut p = self.clone();
        for (m, c) in &other.terms {
            p.add_term(m.clone(), *c);
        }
        p
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, other.nvars, "mixed variable counts");
        let mut p = Self::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                p.add_term(ma.mul(mb), ca * cb);
            }
        }
        p
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.nvars, "evaluation point dimension");
        self.terms.iter().map(|(m, c)| c * m.eval(point)).sum()
    }

    /// Substitutes `args[i]` for variable `i`. All `args` must share a common
    /// variable count, which becomes the result's.
    pub fn compose(&self, args: &[Polynomial]) -> Polynomial {
        assert_eq!(args.len(), self.nvars, "one argument per variable required");
        let tgt = args.first().map(|a| a.nvars()).unwrap_or(0);
        assert!(args.iter().all(|a| a.nvars() == tgt));

        // memoized powers of each argument
        let mut powers: Vec<Vec<Polynomial>> =
            args.iter().map(|a| vec![Polynomial::constant(tgt, 1.0), a.clone()]).collect();
        let mut out = Polynomial::zero(tgt);
        for (m, c) in &self.terms {
            let mut term = Polynomial::constant(tgt, *c);
            for (i, &e) in m.exponents().iter().enumerate() {
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap().mul(&args[i]);
                    powers[i].push(next);
                }
                if e > 0 {
                    term = term.mul(&powers[i][e as usize]);
                }
            }
            out = out.add(&term);
        }
        out
    }

    /// Substitutes the affine map `y = map · z + shift` into `self` (a
    /// polynomial in `y`). `map` is `nvars × nz` in row-major rows.
    pub fn compose_affine(&self, map: &[Vec<f64>], shift: &[f64]) -> Polynomial {
        assert_eq!(map.len(), self.nvars, "map must have one row per variable");
        assert_eq!(shift.len(), self.nvars);
        let nz = map.first().map(Vec::len).unwrap_or(0);
        let args: Vec<Polynomial> = map
            .iter()
            .zip(shift)
            .map(|(row, &v)| {
                assert_eq!(row.len(), nz);
                let mut a = Polynomial::constant(nz, v);
                for (j, &w) in row.iter().enumerate() {
                    if w != 0.0 {
                        a.add_term(Monomial::var(nz, j), w);
                    }
                }
                a
            })
            .collect();
        self.compose(&args)
    }

    /// Largest absolute coefficient difference between `self` and `other`,
    /// taken over the union of supports.
    pub fn max_coeff_delta(&self, other: &Polynomial) -> f64 {
        let mut worst: f64 = 0.0;
        for (m, c) in &self.terms {
            worst = worst.max((c - other.coeff(m)).abs());
        }
        for (m, c) in &other.terms {
            if !self.terms.contains_key(m) {
                worst = worst.max(c.abs());
            }
        }
        worst
    }

    /// Rigorous range enclosure of the polynomial over the box
    /// `[lo, hi]`, by per-variable Horner evaluation in interval arithmetic
    /// with one-ulp outward rounding per operation.
    pub fn interval_eval(&self, lo: &[f64], hi: &[f64]) -> (f64, f64) {
        assert_eq!(lo.len(), self.nvars);
        assert_eq!(hi.len(), self.nvars);
        let terms: Vec<(&Monomial, f64)> = self.terms.iter().map(|(m, &c)| (m, c)).collect();
        horner(&terms, 0, self.nvars, lo, hi)
    }
}

#[derive(Clone, Copy)]
struct Iv(f64, f64);

fn widen(v: Iv) -> Iv {
    Iv(v.0.next_down(), v.1.next_up())
}

fn iv_add(a: Iv, b: Iv) -> Iv {
    widen(Iv(a.0 + b.0, a.1 + b.1))
}

fn iv_mul(a: Iv, b: Iv) -> Iv {
    let c = [a.0 * b.0, a.0 * b.1, a.1 * b.0, a.1 * b.1];
    let mut lo = c[0];
    let mut hi = c[0];
    for &v in &c[1..] {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    widen(Iv(lo, hi))
}

fn horner(terms: &[(&Monomial, f64)], var: usize, nvars: usize, lo: &[f64], hi: &[f64]) -> (f64, f64) {
    if terms.is_empty() {
        return (0.0, 0.0);
    }
    if var == nvars {
        // only the constant monomial can remain
        let mut acc = Iv(0.0, 0.0);
        for &(_, c) in terms {
            acc = iv_add(acc, Iv(c, c));
        }
        return (acc.0, acc.1);
    }
    // group by the exponent of `var`
    let mut groups: BTreeMap<u32, Vec<(&Monomial, f64)>> = BTreeMap::new();
    for &(m, c) in terms {
        groups.entry(m.exponents()[var]).or_default().push((m, c));
    }
    let x = Iv(lo[var], hi[var]);
    let max_e = *groups.keys().next_back().unwrap();
    let mut acc = Iv(0.0, 0.0);
    for e in (0..=max_e).rev() {
        if e != max_e {
            acc = iv_mul(acc, x);
        }
        if let Some(g) = groups.get(&e) {
            let (glo, ghi) = horner(g, var + 1, nvars, lo, hi);
            acc = iv_add(acc, Iv(glo, ghi));
        }
    }
    (acc.0, acc.1)
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}*{m}")?;
        }
        Ok(())
    }
}

// --- JSON term-list representation -------------------------------------
//
// A polynomial serializes as a list of `{"exponents": [...], "coeff": c}`
// objects in graded lexicographic order.

#[derive(Serialize, Deserialize)]
struct TermWire {
    exponents: Vec<u32>,
    coeff: f64,
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.terms.len()))?;
        for (m, c) in &self.terms {
            seq.serialize_element(&TermWire { exponents: m.exponents().to_vec(), coeff: *c })?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Polynomial;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a list of {{exponents, coeff}} terms")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Polynomial, A::Error> {
                let mut terms: Vec<TermWire> = Vec::new();
                while let Some(t) = seq.next_element::<TermWire>()? {
                    terms.push(t);
                }
                let nvars = terms.first().map(|t| t.exponents.len()).unwrap_or(0);
                if terms.iter().any(|t| t.exponents.len() != nvars) {
                    return Err(serde::de::Error::custom("inconsistent exponent lengths"));
                }
                Ok(Polynomial::from_terms(
                    nvars,
                    terms.into_iter().map(|t| (Monomial::new(t.exponents), t.coeff)),
                ))
            }
        }
        deserializer.deserialize_seq(V)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_lex_enumeration() {
        let ms = monomials_up_to(2, 2);
        let shown: Vec<String> = ms.iter().map(|m| format!("{m}")).collect();
        assert_eq!(shown, ["1", "x1", "x0", "x1^2", "x0*x1", "x0^2"]);
        assert_eq!(ms.len() as u128, monomial_count(2, 2));
    }

    #[test]
    fn monomial_count_matches_enumeration() {
        for n in 1..=4 {
            for d in 0..=5 {
                assert_eq!(monomials_up_to(n, d).len() as u128, monomial_count(n, d));
            }
        }
        // the robust 5D diagnostic size, too large to enumerate in tests
        assert_eq!(monomial_count(41, 5), 1_370_754);
    }

    #[test]
    fn arithmetic_and_eval() {
        // (x + 1)^2 = x^2 + 2x + 1
        let x = Polynomial::variable(1, 0);
        let p = x.add(&Polynomial::constant(1, 1.0));
        let sq = p.mul(&p);
        assert_eq!(sq.coeff(&Monomial::new(vec![2])), 1.0);
        assert_eq!(sq.coeff(&Monomial::new(vec![1])), 2.0);
        assert_eq!(sq.coeff(&Monomial::new(vec![0])), 1.0);
        assert_eq!(sq.eval(&[3.0]), 16.0);
    }

    #[test]
    fn cancellation_drops_terms() {
        let x = Polynomial::variable(1, 0);
        let z = x.sub(&x);
        assert!(z.is_zero());
        assert_eq!(z.num_terms(), 0);
    }

    #[test]
    fn compose_affine_square() {
        // P(y) = y^2 under y = 2x + 1 gives 4x^2 + 4x + 1
        let p = Polynomial::from_terms(1, [(Monomial::new(vec![2]), 1.0)]);
        let q = p.compose_affine(&[vec![2.0]], &[1.0]);
        assert_eq!(q.coeff(&Monomial::new(vec![2])), 4.0);
        assert_eq!(q.coeff(&Monomial::new(vec![1])), 4.0);
        assert_eq!(q.coeff(&Monomial::new(vec![0])), 1.0);
    }

    #[test]
    fn compose_identity_is_noop() {
        let p = Polynomial::from_terms(
            2,
            [
                (Monomial::new(vec![2, 1]), 3.0),
                (Monomial::new(vec![0, 1]), -1.5),
            ],
        );
        let id = p.compose_affine(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[0.0, 0.0]);
        assert_eq!(id, p);
    }

    #[test]
    fn interval_eval_contains_samples() {
        let p = Polynomial::from_terms(
            2,
            [
                (Monomial::new(vec![2, 0]), 1.0),
                (Monomial::new(vec![1, 1]), -2.0),
                (Monomial::new(vec![0, 0]), 0.5),
            ],
        );
        let lo = [-1.0, 0.0];
        let hi = [2.0, 3.0];
        let (blo, bhi) = p.interval_eval(&lo, &hi);
        for i in 0..=10 {
            for j in 0..=10 {
                let x = lo[0] + (hi[0] - lo[0]) * i as f64 / 10.0;
                let y = lo[1] + (hi[1] - lo[1]) * j as f64 / 10.0;
                let v = p.eval(&[x, y]);
                assert!(v >= blo && v <= bhi, "{v} outside [{blo}, {bhi}]");
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let p = Polynomial::from_terms(
            3,
            [
                (Monomial::new(vec![0, 0, 0]), -0.25),
                (Monomial::new(vec![2, 0, 1]), 1.0e-9),
            ],
        );
        let s = serde_json::to_string(&p).unwrap();
        let q: Polynomial = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
    }
}
