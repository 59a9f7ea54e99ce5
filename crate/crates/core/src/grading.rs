//! Exact bivariate polynomials over ℚ graded by a weighted (quasi-homogeneous)
//! degree.
//!
//! A weight vector `(p1, p2)` assigns the degree `ex·p1 + ey·p2` to the monomial
//! `x^ex y^ey`. The radial field `R = p1·x∂x + p2·y∂y` acts on each monomial by
//! multiplication with its degree. Polynomials are stored sparsely; the
//! canonical order used for printing and for every echelon computation is
//! ascending weighted degree, then descending `ex`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar.
pub type Q = BigRational;

/// Shorthand for the rational `n/d`.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Shorthand for the integer `n` as a rational.
pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Weight vector `(p1, p2)` of the grading.
///
/// The weights must be coprime. A zero weight is accepted only as `(1, 0)` or
/// `(0, 1)` (the radial field `x∂x` of the saddle-node); in that case graded
/// slices are infinite and only the diagonal solvers apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Weights {
    p1: u32,
    p2: u32,
}

impl Weights {
    pub fn new(p1: u32, p2: u32) -> Result<Self> {
        if p1.gcd(&p2) != 1 {
            return Err(Error::InvalidWeights { p1, p2 });
        }
        Ok(Self { p1, p2 })
    }

    pub fn p1(&self) -> u32 {
        self.p1
    }

    pub fn p2(&self) -> u32 {
        self.p2
    }

    /// Both weights strictly positive, so every graded slice is finite.
    pub fn is_positive(&self) -> bool {
        self.p1 > 0 && self.p2 > 0
    }

    pub fn pdeg(&self, m: Mono) -> u32 {
        m.ex * self.p1 + m.ey * self.p2
    }

    /// Canonical monomial order: ascending degree, then descending `ex`.
    pub fn cmp_canonical(&self, a: Mono, b: Mono) -> Ordering {
        self.pdeg(a)
            .cmp(&self.pdeg(b))
            .then_with(|| b.ex.cmp(&a.ex))
            .then_with(|| a.ey.cmp(&b.ey))
    }

    /// All monomials of degree `deg`, in canonical order.
    ///
    /// Panics if a weight is zero (the slice would be infinite).
    pub fn slice_monomials(&self, deg: u32) -> Vec<Mono> {
        assert!(self.is_positive(), "graded slices need positive weights");
        let mut out = Vec::new();
        let mut ex = deg / self.p1;
        loop {
            let rest = deg - ex * self.p1;
            if rest % self.p2 == 0 {
                out.push(Mono::new(ex, rest / self.p2));
            }
            if ex == 0 {
                break;
            }
            ex -= 1;
        }
        out
    }

    /// Number of monomials of degree `deg`.
    pub fn slice_dim(&self, deg: u32) -> usize {
        self.slice_monomials(deg).len()
    }
}

/// Weighted degree `<p, m>` of a monomial.
pub fn pdeg(m: Mono, w: &Weights) -> u32 {
    w.pdeg(m)
}

/// Exponent pair `x^ex y^ey`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mono {
    pub ex: u32,
    pub ey: u32,
}

impl Mono {
    pub const ONE: Mono = Mono { ex: 0, ey: 0 };

    pub const fn new(ex: u32, ey: u32) -> Self {
        Self { ex, ey }
    }

    pub fn mul(self, other: Mono) -> Mono {
        Mono::new(self.ex + other.ex, self.ey + other.ey)
    }

    pub fn divides(self, other: Mono) -> bool {
        self.ex <= other.ex && self.ey <= other.ey
    }

    pub fn div(self, other: Mono) -> Mono {
        Mono::new(self.ex - other.ex, self.ey - other.ey)
    }
}

impl fmt::Display for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_monomial(f, &[("x", self.ex), ("y", self.ey)], true)
    }
}

fn write_monomial(f: &mut dyn fmt::Write, vars: &[(&str, u32)], one_if_empty: bool) -> fmt::Result {
    let mut first = true;
    for (name, e) in vars {
        if *e == 0 {
            continue;
        }
        if !first {
            f.write_char('*')?;
        }
        first = false;
        f.write_str(name)?;
        if *e > 1 {
            write!(f, "^{e}")?;
        }
    }
    if first && one_if_empty {
        f.write_char('1')?;
    }
    Ok(())
}

fn write_rational(f: &mut dyn fmt::Write, c: &Q) -> fmt::Result {
    if c.is_integer() {
        write!(f, "{}", c.numer())
    } else {
        write!(f, "{}/{}", c.numer(), c.denom())
    }
}

/// Sparse bivariate polynomial with exact rational coefficients.
///
/// No stored coefficient is zero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Poly {
    terms: BTreeMap<Mono, Q>,
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        Self::monomial(c, Mono::ONE)
    }

    pub fn monomial(c: Q, m: Mono) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Self { terms }
    }

    pub fn x() -> Self {
        Self::monomial(Q::one(), Mono::new(1, 0))
    }

    pub fn y() -> Self {
        Self::monomial(Q::one(), Mono::new(0, 1))
    }

    pub fn from_terms<I: IntoIterator<Item = (Mono, Q)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in exponent order (not canonical order).
    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Q)> {
        self.terms.iter()
    }

    /// Terms in canonical order for the weights.
    pub fn canonical_terms(&self, w: &Weights) -> Vec<(Mono, Q)> {
        let mut v: Vec<(Mono, Q)> = self.terms.iter().map(|(m, c)| (*m, c.clone())).collect();
        v.sort_by(|a, b| w.cmp_canonical(a.0, b.0));
        v
    }

    pub fn coeff(&self, m: Mono) -> Q {
        self.terms.get(&m).cloned().unwrap_or_else(Q::zero)
    }

    pub fn constant_term(&self) -> Q {
        self.coeff(Mono::ONE)
    }

    pub fn add_term(&mut self, m: Mono, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, v)| (*m, v * c)).collect(),
        }
    }

    pub fn mul_mono(&self, c: &Q, m: Mono) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(k, v)| (k.mul(m), v * c)).collect(),
        }
    }

    /// Product keeping only terms of degree at most `max_deg`.
    pub fn mul_trunc(&self, other: &Poly, w: &Weights, max_deg: i64) -> Poly {
        let mut out = Poly::zero();
        if max_deg < 0 {
            return out;
        }
        let max_deg = max_deg as u32;
        for (ma, ca) in &self.terms {
            let da = w.pdeg(*ma);
            if da > max_deg {
                continue;
            }
            for (mb, cb) in &other.terms {
                if da + w.pdeg(*mb) <= max_deg {
                    out.add_term(ma.mul(*mb), ca * cb);
                }
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn pow_trunc(&self, n: u32, w: &Weights, max_deg: i64) -> Poly {
        let mut acc = Poly::one().truncate(w, max_deg);
        for _ in 0..n {
            acc = acc.mul_trunc(self, w, max_deg);
        }
        acc
    }

    pub fn deriv_x(&self) -> Poly {
        Poly::from_terms(
            self.terms
                .iter()
                .filter(|(m, _)| m.ex > 0)
                .map(|(m, c)| (Mono::new(m.ex - 1, m.ey), c * qi(m.ex as i64))),
        )
    }

    pub fn deriv_y(&self) -> Poly {
        Poly::from_terms(
            self.terms
                .iter()
                .filter(|(m, _)| m.ey > 0)
                .map(|(m, c)| (Mono::new(m.ex, m.ey - 1), c * qi(m.ey as i64))),
        )
    }

    /// Keeps only terms of degree at most `max_deg`.
    pub fn truncate(&self, w: &Weights, max_deg: i64) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| (w.pdeg(**m) as i64) <= max_deg)
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    /// Quasi-homogeneous component of degree `deg`.
    pub fn component(&self, w: &Weights, deg: u32) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| w.pdeg(**m) == deg)
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    /// Splits into quasi-homogeneous components keyed by degree.
    pub fn components(&self, w: &Weights) -> BTreeMap<u32, Poly> {
        let mut out: BTreeMap<u32, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(w.pdeg(*m)).or_default().terms.insert(*m, c.clone());
        }
        out
    }

    /// Minimum degree over nonzero terms; `None` for the zero polynomial.
    pub fn porder(&self, w: &Weights) -> Option<u32> {
        self.terms.keys().map(|m| w.pdeg(*m)).min()
    }

    pub fn max_pdeg(&self, w: &Weights) -> Option<u32> {
        self.terms.keys().map(|m| w.pdeg(*m)).max()
    }

    /// Degree if the polynomial is nonzero and quasi-homogeneous.
    pub fn qh_degree(&self, w: &Weights) -> Option<u32> {
        let lo = self.porder(w)?;
        (self.max_pdeg(w)? == lo).then_some(lo)
    }

    /// `R(f)` for the radial field of the weights.
    pub fn radial(&self, w: &Weights) -> Poly {
        Poly::from_terms(
            self.terms
                .iter()
                .map(|(m, c)| (*m, c * qi(w.pdeg(*m) as i64))),
        )
    }

    /// `(R + c)(f)`.
    pub fn radial_shift(&self, w: &Weights, c: &Q) -> Poly {
        Poly::from_terms(
            self.terms
                .iter()
                .map(|(m, v)| (*m, v * (qi(w.pdeg(*m) as i64) + c))),
        )
    }

    /// Exact division. On failure returns the lowest degree carrying a
    /// nonzero remainder.
    pub fn div_exact(&self, divisor: &Poly, w: &Weights) -> Result<Poly> {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        // Lexicographic division (x > y): a single divisor is its own
        // Gröbner basis, so the remainder vanishes exactly when it divides.
        let (lead_m, lead_c) = divisor.terms.iter().next_back().map(|(m, c)| (*m, c.clone())).unwrap();
        let mut rem = self.clone();
        let mut quo = Poly::zero();
        let mut stuck = Poly::zero();
        while let Some((m, c)) = rem.terms.iter().next_back().map(|(m, c)| (*m, c.clone())) {
            if lead_m.divides(m) {
                let qm = m.div(lead_m);
                let qc = &c / &lead_c;
                rem = &rem - &divisor.mul_mono(&qc, qm);
                quo.add_term(qm, qc);
            } else {
                rem.terms.remove(&m);
                stuck.add_term(m, c);
            }
        }
        if let Some(d) = stuck.porder(w) {
            return Err(Error::NotDivisible { degree: d as i64 });
        }
        Ok(quo)
    }

    /// Substitutes polynomials for `x` and `y`, truncating at `max_deg`.
    pub fn compose(&self, px: &Poly, py: &Poly, w: &Weights, max_deg: i64) -> Poly {
        let max_ex = self.terms.keys().map(|m| m.ex).max().unwrap_or(0);
        let max_ey = self.terms.keys().map(|m| m.ey).max().unwrap_or(0);
        let mut xp = vec![Poly::one().truncate(w, max_deg)];
        for i in 0..max_ex as usize {
            let next = xp[i].mul_trunc(px, w, max_deg);
            xp.push(next);
        }
        let mut yp = vec![Poly::one().truncate(w, max_deg)];
        for i in 0..max_ey as usize {
            let next = yp[i].mul_trunc(py, w, max_deg);
            yp.push(next);
        }
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let t = xp[m.ex as usize].mul_trunc(&yp[m.ey as usize], w, max_deg);
            out += &t.scale(c);
        }
        out
    }

    /// Renders in canonical order for the weights.
    pub fn to_string_weighted(&self, w: &Weights) -> String {
        let mut s = String::new();
        write_terms(&mut s, self.canonical_terms(w).iter().map(|(m, c)| (c, vec![("x", m.ex), ("y", m.ey)])))
            .expect("writing to a String cannot fail");
        s
    }
}

fn write_terms<'a, 'b, I>(f: &mut dyn fmt::Write, terms: I) -> fmt::Result
where
    I: Iterator<Item = (&'a Q, Vec<(&'b str, u32)>)>,
{
    let mut first = true;
    for (c, vars) in terms {
        let neg = c.is_negative();
        let abs = c.abs();
        if first {
            if neg {
                f.write_char('-')?;
            }
        } else {
            f.write_str(if neg { " - " } else { " + " })?;
        }
        first = false;
        let is_unit_mono = vars.iter().all(|(_, e)| *e == 0);
        if is_unit_mono {
            write_rational(f, &abs)?;
        } else {
            if !abs.is_one() {
                write_rational(f, &abs)?;
                f.write_char('*')?;
            }
            write_monomial(f, &vars, false)?;
        }
    }
    if first {
        f.write_char('0')?;
    }
    Ok(())
}

impl fmt::Display for Poly {
    /// Renders with total-degree ordering; use [`Poly::to_string_weighted`]
    /// for the canonical weighted order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = Weights { p1: 1, p2: 1 };
        f.write_str(&self.to_string_weighted(&w))
    }
}

impl FromStr for Poly {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let terms = parse_terms(s, &["x", "y"])?;
        Ok(Poly::from_terms(
            terms.into_iter().map(|(c, e)| (Mono::new(e[0], e[1]), c)),
        ))
    }
}

/// Renders `Σ c_k v^k` in ascending powers.
pub fn format_univariate(coeffs: &[Q], var: &str) -> String {
    let mut s = String::new();
    write_terms(
        &mut s,
        coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (c, vec![(var, k as u32)])),
    )
    .expect("writing to a String cannot fail");
    s
}

/// Parses a one-variable polynomial in `var` into its coefficient list.
pub fn parse_univariate(text: &str, var: &str) -> Result<Vec<Q>> {
    let terms = parse_terms(text, &[var])?;
    let mut out: Vec<Q> = Vec::new();
    for (c, e) in terms {
        let k = e[0] as usize;
        if out.len() <= k {
            out.resize(k + 1, Q::zero());
        }
        out[k] += c;
    }
    while out.last().is_some_and(Zero::is_zero) {
        out.pop();
    }
    Ok(out)
}

/// Parses polynomial text in the given variables. Each term is a product of
/// rationals `n` or `n/d` and powers `v^k`; terms are joined by `+` or `-`.
pub(crate) fn parse_terms(s: &str, vars: &[&str]) -> Result<Vec<(Q, Vec<u32>)>> {
    let mut p = TermParser { chars: s.char_indices().peekable(), src: s, vars };
    p.parse()
}

struct TermParser<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
    vars: &'a [&'a str],
}

impl TermParser<'_> {
    fn err<T>(&self, pos: usize, message: impl Into<String>) -> Result<T> {
        let column = self.src[..pos.min(self.src.len())].chars().count() + 1;
        Err(Error::Parse { column, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while matches!(self.chars.peek(), Some((_, c)) if c.is_whitespace()) {
            self.chars.next();
        }
    }

    fn pos(&mut self) -> usize {
        self.chars.peek().map(|(i, _)| *i).unwrap_or(self.src.len())
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos();
        let mut end = start;
        while let Some((i, c)) = self.chars.peek().copied() {
            if c.is_ascii_digit() {
                end = i + c.len_utf8();
                self.chars.next();
            } else {
                break;
            }
        }
        if end == start {
            return self.err(start, "expected an integer");
        }
        Ok(self.src[start..end].parse().expect("digits parse as an integer"))
    }

    fn parse(&mut self) -> Result<Vec<(Q, Vec<u32>)>> {
        let mut out = Vec::new();
        self.skip_ws();
        if self.chars.peek().is_none() {
            return self.err(0, "empty polynomial");
        }
        let mut sign = Q::one();
        let mut first = true;
        loop {
            self.skip_ws();
            match self.chars.peek().copied() {
                Some((_, '+')) => {
                    self.chars.next();
                }
                Some((_, '-')) => {
                    self.chars.next();
                    sign = -sign;
                }
                Some((i, _)) if !first => return self.err(i, "expected '+' or '-'"),
                _ => {}
            }
            first = false;
            let (c, e) = self.term()?;
            out.push((c * &sign, e));
            sign = Q::one();
            self.skip_ws();
            if self.chars.peek().is_none() {
                return Ok(out);
            }
        }
    }

    fn term(&mut self) -> Result<(Q, Vec<u32>)> {
        let mut coeff = Q::one();
        let mut exps = vec![0u32; self.vars.len()];
        loop {
            self.skip_ws();
            let pos = self.pos();
            match self.chars.peek().copied() {
                Some((_, c)) if c.is_ascii_digit() => {
                    let n = self.integer()?;
                    self.skip_ws();
                    let mut val = Q::from_integer(n);
                    if matches!(self.chars.peek(), Some((_, '/'))) {
                        self.chars.next();
                        let dpos = self.pos();
                        let d = self.integer()?;
                        if d.is_zero() {
                            return self.err(dpos, "zero denominator");
                        }
                        val /= Q::from_integer(d);
                    }
                    coeff *= val;
                }
                Some((_, c)) if c.is_alphabetic() => {
                    let mut end = pos;
                    while let Some((i, c)) = self.chars.peek().copied() {
                        if c.is_alphanumeric() || c == '_' {
                            end = i + c.len_utf8();
                            self.chars.next();
                        } else {
                            break;
                        }
                    }
                    let name = &self.src[pos..end];
                    let Some(idx) = self.vars.iter().position(|v| *v == name) else {
                        return self.err(pos, format!("unknown variable '{name}'"));
                    };
                    self.skip_ws();
                    let mut e = 1u32;
                    if matches!(self.chars.peek(), Some((_, '^'))) {
                        self.chars.next();
                        let epos = self.pos();
                        let n = self.integer()?;
                        e = match u32::try_from(n) {
                            Ok(e) => e,
                            Err(_) => return self.err(epos, "exponent too large"),
                        };
                    }
                    exps[idx] += e;
                }
                Some((i, c)) => return self.err(i, format!("unexpected character '{c}'")),
                None => return self.err(pos, "unexpected end of input"),
            }
            self.skip_ws();
            if matches!(self.chars.peek(), Some((_, '*'))) {
                self.chars.next();
            } else {
                return Ok((coeff, exps));
            }
        }
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        for (m, c) in &rhs.terms {
            self.add_term(*m, c.clone());
        }
    }
}

impl SubAssign<&Poly> for Poly {
    fn sub_assign(&mut self, rhs: &Poly) {
        for (m, c) in &rhs.terms {
            self.add_term(*m, -c.clone());
        }
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (*m, -c.clone())).collect(),
        }
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(*mb), ca * cb);
            }
        }
        out
    }
}

/// Quasi-homogeneous decomposition `f = Σ f_d`.
pub fn qh_components(f: &Poly, w: &Weights) -> BTreeMap<u32, Poly> {
    f.components(w)
}

/// Weighted order of `f`; `None` stands for `+∞` (the zero polynomial).
pub fn porder(f: &Poly, w: &Weights) -> Option<u32> {
    f.porder(w)
}

/// Applies `R = p1·x∂x + p2·y∂y`.
pub fn radial_apply(f: &Poly, w: &Weights) -> Poly {
    f.radial(w)
}

/// Dense coordinates of a quasi-homogeneous slice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedSlice {
    pub degree: u32,
    pub monomials: Vec<Mono>,
    pub coeffs: Vec<Q>,
}

impl GradedSlice {
    /// Degree-`degree` component of `f` as a dense vector.
    pub fn of(f: &Poly, w: &Weights, degree: u32) -> Self {
        let monomials = w.slice_monomials(degree);
        let coeffs = monomials.iter().map(|m| f.coeff(*m)).collect();
        Self { degree, monomials, coeffs }
    }

    pub fn to_poly(&self) -> Poly {
        Poly::from_terms(self.monomials.iter().copied().zip(self.coeffs.iter().cloned()))
    }
}
