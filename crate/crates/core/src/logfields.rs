//! Plane vector fields tangent to a quasi-homogeneous separatrix.
//!
//! A field `X` is logarithmic along `h0 = 0` when `X(h0) ∈ (h0)`. When the
//! pair `(X0, R)` is a basis of the logarithmic fields, every such field is
//! written `a·X0 + b·R`; the dual forms `ω0 = i_{X0}Ω`, `ω_R = i_R Ω` with
//! `Ω = dx∧dy / h0` give the coordinates back.

use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::grading::{qi, Mono, Poly, Weights, Q};

/// The field `p·∂x + q·∂y`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct VField {
    pub p: Poly,
    pub q: Poly,
}

impl VField {
    pub fn new(p: Poly, q: Poly) -> Self {
        Self { p, q }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// `R = p1·x∂x + p2·y∂y`.
    pub fn radial(w: &Weights) -> Self {
        Self {
            p: Poly::monomial(qi(w.p1() as i64), Mono::new(1, 0)),
            q: Poly::monomial(qi(w.p2() as i64), Mono::new(0, 1)),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero()
    }

    /// Derivative of `f` along the field.
    pub fn apply(&self, f: &Poly) -> Poly {
        &(&self.p * &f.deriv_x()) + &(&self.q * &f.deriv_y())
    }

    /// Derivative of `f` along the field, dropping terms above `max_deg`.
    pub fn apply_trunc(&self, f: &Poly, w: &Weights, max_deg: i64) -> Poly {
        let mut out = self.p.mul_trunc(&f.deriv_x(), w, max_deg);
        out += &self.q.mul_trunc(&f.deriv_y(), w, max_deg);
        out
    }

    /// Lie bracket `[self, other]`.
    pub fn bracket(&self, other: &VField) -> VField {
        VField {
            p: &self.apply(&other.p) - &other.apply(&self.p),
            q: &self.apply(&other.q) - &other.apply(&self.q),
        }
    }

    /// Lie bracket truncated at field degree `k`.
    pub fn bracket_trunc(&self, other: &VField, w: &Weights, k: i64) -> VField {
        let kp = k + w.p1() as i64;
        let kq = k + w.p2() as i64;
        VField {
            p: &self.apply_trunc(&other.p, w, kp) - &other.apply_trunc(&self.p, w, kp),
            q: &self.apply_trunc(&other.q, w, kq) - &other.apply_trunc(&self.q, w, kq),
        }
    }

    /// The field `f·X`.
    pub fn mul_fn(&self, f: &Poly) -> VField {
        VField { p: f * &self.p, q: f * &self.q }
    }

    pub fn scale(&self, c: &Q) -> VField {
        VField { p: self.p.scale(c), q: self.q.scale(c) }
    }

    /// Keeps the terms of field degree at most `k`. The field degree of
    /// `x^m ∂x` is `pdeg(m) − p1`, that of `x^m ∂y` is `pdeg(m) − p2`.
    pub fn truncate(&self, w: &Weights, k: i64) -> VField {
        VField {
            p: self.p.truncate(w, k + w.p1() as i64),
            q: self.q.truncate(w, k + w.p2() as i64),
        }
    }

    /// Lowest field degree present; `None` for the zero field.
    pub fn porder(&self, w: &Weights) -> Option<i64> {
        let a = self.p.porder(w).map(|d| d as i64 - w.p1() as i64);
        let b = self.q.porder(w).map(|d| d as i64 - w.p2() as i64);
        match (a, b) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    /// Field degree when the field is nonzero and quasi-homogeneous.
    pub fn qh_degree(&self, w: &Weights) -> Option<i64> {
        let lo = self.porder(w)?;
        let hi_p = self.p.max_pdeg(w).map(|d| d as i64 - w.p1() as i64);
        let hi_q = self.q.max_pdeg(w).map(|d| d as i64 - w.p2() as i64);
        let hi = hi_p.into_iter().chain(hi_q).max()?;
        (hi == lo).then_some(lo)
    }

    pub fn to_string_weighted(&self, w: &Weights) -> String {
        format!(
            "({})*d/dx + ({})*d/dy",
            self.p.to_string_weighted(w),
            self.q.to_string_weighted(w)
        )
    }
}

impl std::ops::Add for &VField {
    type Output = VField;
    fn add(self, rhs: &VField) -> VField {
        VField { p: &self.p + &rhs.p, q: &self.q + &rhs.q }
    }
}

impl std::ops::Sub for &VField {
    type Output = VField;
    fn sub(self, rhs: &VField) -> VField {
        VField { p: &self.p - &rhs.p, q: &self.q - &rhs.q }
    }
}

impl fmt::Display for VField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})*d/dx + ({})*d/dy", self.p, self.q)
    }
}

/// Standard Lie bracket.
pub fn lie_bracket(x: &VField, y: &VField) -> VField {
    x.bracket(y)
}

/// Data attached to a quasi-homogeneous separatrix: weights, the reduced
/// equation `h0`, the first integral `h`, the initial field `X0` and the
/// truncation bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QHContext {
    w: Weights,
    h0: Poly,
    h: Poly,
    delta: u32,
    d0: u32,
    delta0: i64,
    x0: VField,
    radial: VField,
    det: Q,
    hamiltonian: bool,
    truncation: u32,
}

impl QHContext {
    /// Context whose initial field is `X0 = (h0 / δh)·(h_y ∂x − h_x ∂y)`.
    pub fn hamiltonian(w: Weights, h0: Poly, h: Poly, truncation: u32) -> Result<Self> {
        let delta = qh_degree_of(&h, &w, "h")?;
        let d0 = qh_degree_of(&h0, &w, "h0")?;
        if delta == 0 || d0 == 0 {
            return Err(Error::InvalidContext("h and h0 must vanish at the origin".into()));
        }
        shares_zero_set(&h0, &h, &w)?;
        let x0 = hamiltonian_x0_of(&w, &h0, &h, delta)?;
        Self::build(w, h0, h, delta, d0, x0, true, truncation)
    }

    /// Context with an explicitly given quasi-homogeneous initial field. The
    /// field must annihilate `h` and form a basis with `R`.
    pub fn with_initial_field(w: Weights, h0: Poly, h: Poly, x0: VField, truncation: u32) -> Result<Self> {
        let delta = qh_degree_of(&h, &w, "h")?;
        let d0 = qh_degree_of(&h0, &w, "h0")?;
        if delta == 0 || d0 == 0 {
            return Err(Error::InvalidContext("h and h0 must vanish at the origin".into()));
        }
        if x0.is_zero() || x0.qh_degree(&w).is_none() {
            return Err(Error::NotQuasiHomogeneous { what: "X0".into() });
        }
        if !x0.apply(&h).is_zero() {
            return Err(Error::InvalidContext("X0 does not annihilate h".into()));
        }
        Self::build(w, h0, h, delta, d0, x0, false, truncation)
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        w: Weights,
        h0: Poly,
        h: Poly,
        delta: u32,
        d0: u32,
        x0: VField,
        hamiltonian: bool,
        truncation: u32,
    ) -> Result<Self> {
        let delta0 = d0 as i64 - w.p1() as i64 - w.p2() as i64;
        if let Some(k) = x0.qh_degree(&w) {
            if k != delta0 {
                return Err(Error::InvalidContext(format!(
                    "X0 has degree {k}, expected d0 - p1 - p2 = {delta0}"
                )));
            }
        }
        let radial = VField::radial(&w);
        let num = &(&x0.p * &radial.q) - &(&x0.q * &radial.p);
        let det = num
            .div_exact(&h0, &w)
            .map_err(|_| Error::InvalidContext("X0 and R are not tangent to h0 = 0".into()))?;
        if det.len() != 1 || det.constant_term().is_zero() {
            return Err(Error::InvalidContext(
                "(X0, R) is not a basis of the logarithmic fields: Ω(X0, R) is not a nonzero constant".into(),
            ));
        }
        let det = det.constant_term();
        Ok(Self { w, h0, h, delta, d0, delta0, x0, radial, det, hamiltonian, truncation })
    }

    /// Same context with another truncation bound.
    pub fn with_truncation(&self, truncation: u32) -> Self {
        Self { truncation, ..self.clone() }
    }

    pub fn weights(&self) -> &Weights {
        &self.w
    }

    pub fn h0(&self) -> &Poly {
        &self.h0
    }

    pub fn h(&self) -> &Poly {
        &self.h
    }

    /// Degree of `h`.
    pub fn delta(&self) -> u32 {
        self.delta
    }

    /// Degree of `h0`.
    pub fn d0(&self) -> u32 {
        self.d0
    }

    /// Field degree of `X0`.
    pub fn delta0(&self) -> i64 {
        self.delta0
    }

    pub fn x0(&self) -> &VField {
        &self.x0
    }

    pub fn radial(&self) -> &VField {
        &self.radial
    }

    /// `Ω(X0, R)`, equal to 1 for the Hamiltonian initial field.
    pub fn det(&self) -> &Q {
        &self.det
    }

    pub fn is_hamiltonian(&self) -> bool {
        self.hamiltonian
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    /// `X0(f)`.
    pub fn x0_apply(&self, f: &Poly) -> Poly {
        self.x0.apply(f)
    }

    /// `Ω(U, V) = (U_x V_y − U_y V_x) / h0`.
    pub fn omega(&self, u: &VField, v: &VField) -> Result<Poly> {
        let num = &(&u.p * &v.q) - &(&u.q * &v.p);
        num.div_exact(&self.h0, &self.w).map_err(|e| match e {
            Error::NotDivisible { degree } => Error::NotLogarithmic { degree },
            other => other,
        })
    }

    /// `h^j` truncated at degree `max_deg`.
    pub fn h_pow(&self, j: u32, max_deg: i64) -> Poly {
        self.h.pow_trunc(j, &self.w, max_deg)
    }
}

fn qh_degree_of(f: &Poly, w: &Weights, what: &str) -> Result<u32> {
    f.qh_degree(w).ok_or_else(|| Error::NotQuasiHomogeneous { what: what.into() })
}

/// `h0` must divide some power of `h`.
fn shares_zero_set(h0: &Poly, h: &Poly, w: &Weights) -> Result<()> {
    let bound = h0.terms().map(|(m, _)| m.ex + m.ey).max().unwrap_or(1).max(1);
    let mut power = h.clone();
    for _ in 0..bound {
        if power.div_exact(h0, w).is_ok() {
            return Ok(());
        }
        power = &power * h;
    }
    Err(Error::InvalidContext("h0 does not divide any power of h".into()))
}

fn hamiltonian_x0_of(w: &Weights, h0: &Poly, h: &Poly, delta: u32) -> Result<VField> {
    let denom = h.scale(&qi(delta as i64));
    let bad = |_| Error::InvalidContext("h0·dh is not divisible by δh".into());
    let p = (h0 * &h.deriv_y()).div_exact(&denom, w).map_err(bad)?;
    let q = (&-h0 * &h.deriv_x()).div_exact(&denom, w).map_err(bad)?;
    Ok(VField { p, q })
}

/// `X0 = (h0 / δh)·X_h` for the context's `h0` and `h`.
pub fn hamiltonian_x0(ctx: &QHContext) -> Result<VField> {
    hamiltonian_x0_of(&ctx.w, &ctx.h0, &ctx.h, ctx.delta)
}

/// Whether `X(h0)` lies in the ideal `(h0)`.
pub fn is_logarithmic(x: &VField, ctx: &QHContext) -> bool {
    x.apply(&ctx.h0).div_exact(&ctx.h0, &ctx.w).is_ok()
}

/// Coordinates `(a, b)` of a logarithmic field `X = a·X0 + b·R`.
pub fn to_log_basis(x: &VField, ctx: &QHContext) -> Result<LogField> {
    let inv = ctx.det.recip();
    let a = ctx.omega(x, &ctx.radial)?.scale(&inv);
    let b = ctx.omega(&ctx.x0, x)?.scale(&inv);
    Ok(LogField { a, b })
}

/// The field `a·X0 + b·R`.
pub fn from_log_basis(z: &LogField, ctx: &QHContext) -> VField {
    z.materialize(ctx)
}

/// `i_X Ω` in the basis `(ω0, ω_R)`.
pub fn sharp(x: &VField, ctx: &QHContext) -> Result<LogForm> {
    let z = to_log_basis(x, ctx)?;
    Ok(LogForm { c0: z.a, c_r: z.b })
}

/// Inverse of [`sharp`].
pub fn flat(form: &LogForm, ctx: &QHContext) -> VField {
    LogField { a: form.c0.clone(), b: form.c_r.clone() }.materialize(ctx)
}

/// The field `a·X0 + b·R` in logarithmic coordinates.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LogField {
    pub a: Poly,
    pub b: Poly,
}

impl LogField {
    pub fn new(a: Poly, b: Poly) -> Self {
        Self { a, b }
    }

    pub fn x0() -> Self {
        Self { a: Poly::one(), b: Poly::zero() }
    }

    pub fn radial() -> Self {
        Self { a: Poly::zero(), b: Poly::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn materialize(&self, ctx: &QHContext) -> VField {
        &ctx.x0.mul_fn(&self.a) + &ctx.radial.mul_fn(&self.b)
    }

    /// Truncation at field degree `k`: `a` up to `k − δ0`, `b` up to `k`.
    pub fn truncate(&self, ctx: &QHContext, k: i64) -> LogField {
        LogField {
            a: self.a.truncate(&ctx.w, k - ctx.delta0),
            b: self.b.truncate(&ctx.w, k),
        }
    }

    /// Lowest field degree present.
    pub fn porder(&self, ctx: &QHContext) -> Option<i64> {
        let a = self.a.porder(&ctx.w).map(|d| d as i64 + ctx.delta0);
        let b = self.b.porder(&ctx.w).map(|d| d as i64);
        match (a, b) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    /// `Z(f) = a·X0(f) + b·R(f)`, dropping terms above `max_deg`.
    pub fn apply_trunc(&self, f: &Poly, ctx: &QHContext, max_deg: i64) -> Poly {
        let mut out = self.a.mul_trunc(&ctx.x0.apply(f), &ctx.w, max_deg);
        out += &self.b.mul_trunc(&f.radial(&ctx.w), &ctx.w, max_deg);
        out
    }

    /// Lie bracket computed in coordinates, truncated at field degree `k`.
    ///
    /// With `[R, X0] = δ0·X0`:
    /// `[Z1, Z2] = (Z1(a2) − Z2(a1) + δ0(a2 b1 − a1 b2))·X0 + (Z1(b2) − Z2(b1))·R`.
    pub fn bracket(&self, other: &LogField, ctx: &QHContext, k: i64) -> LogField {
        let w = &ctx.w;
        let ka = k - ctx.delta0;
        let mut a = self.apply_trunc(&other.a, ctx, ka);
        a -= &other.apply_trunc(&self.a, ctx, ka);
        if ctx.delta0 != 0 {
            let cross = &other.a.mul_trunc(&self.b, w, ka) - &self.a.mul_trunc(&other.b, w, ka);
            a += &cross.scale(&qi(ctx.delta0));
        }
        let mut b = self.apply_trunc(&other.b, ctx, k);
        b -= &other.apply_trunc(&self.b, ctx, k);
        LogField { a, b }
    }

    pub fn scale(&self, c: &Q) -> LogField {
        LogField { a: self.a.scale(c), b: self.b.scale(c) }
    }
}

impl std::ops::Add for &LogField {
    type Output = LogField;
    fn add(self, rhs: &LogField) -> LogField {
        LogField { a: &self.a + &rhs.a, b: &self.b + &rhs.b }
    }
}

/// The form `c0·ω0 + c_r·ω_R`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LogForm {
    pub c0: Poly,
    pub c_r: Poly,
}

impl LogForm {
    pub fn new(c0: Poly, c_r: Poly) -> Self {
        Self { c0, c_r }
    }

    /// `ω(Z)` using `ω0(X0) = 0`, `ω0(R) = D`, `ω_R(X0) = −D`, `ω_R(R) = 0`
    /// with `D = Ω(X0, R)`.
    pub fn pair(&self, z: &LogField, ctx: &QHContext) -> Poly {
        (&(&self.c0 * &z.b) - &(&self.c_r * &z.a)).scale(&ctx.det)
    }

    /// `h0·ω` as the coefficient pair of `dx`, `dy`.
    pub fn cleared(&self, ctx: &QHContext) -> (Poly, Poly) {
        let x0 = &ctx.x0;
        let r = &ctx.radial;
        let dx = &(&self.c0 * &-&x0.q) + &(&self.c_r * &-&r.q);
        let dy = &(&self.c0 * &x0.p) + &(&self.c_r * &r.p);
        (dx, dy)
    }

    /// `df = (R(f)·ω0 − X0(f)·ω_R) / D`.
    pub fn differential(f: &Poly, ctx: &QHContext) -> LogForm {
        let inv = ctx.det.recip();
        LogForm {
            c0: f.radial(&ctx.w).scale(&inv),
            c_r: (-&ctx.x0.apply(f)).scale(&inv),
        }
    }
}

/// Every term of `f` has degree at least 1 when the weights are positive;
/// for a zero weight, the degree-0 part must be exactly the constant `c`.
pub(crate) fn degree_zero_is(f: &Poly, w: &Weights, c: &Q) -> bool {
    let comp = f.component(w, 0);
    if c.is_zero() {
        comp.is_zero()
    } else {
        comp.len() == 1 && comp.constant_term() == *c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grading::q;

    fn p(s: &str) -> Poly {
        s.parse().unwrap()
    }

    fn cusp() -> QHContext {
        let w = Weights::new(2, 3).unwrap();
        QHContext::hamiltonian(w, p("y^2 - x^3"), p("y^2 - x^3"), 12).unwrap()
    }

    #[test]
    fn cusp_initial_field() {
        let ctx = cusp();
        assert_eq!(ctx.x0(), &VField::new(p("1/3*y"), p("1/2*x^2")));
        assert_eq!(ctx.delta0(), 1);
        assert_eq!(ctx.det(), &qi(1));
        let rx = ctx.radial().bracket(ctx.x0());
        assert_eq!(rx, ctx.x0().scale(&qi(1)));
    }

    #[test]
    fn poincare_dulac_initial_field() {
        for (pp, qq) in [(1u32, 1u32), (1, 2), (2, 3)] {
            let w = Weights::new(qq, pp).unwrap();
            let h = Poly::monomial(qi(1), Mono::new(pp, qq));
            let ctx = QHContext::hamiltonian(w, p("x*y"), h, 8).unwrap();
            let c = q(1, 2 * (pp * qq) as i64);
            let expect = VField::new(p("x").scale(&(&c * qi(qq as i64))), p("y").scale(&(-&c * qi(pp as i64))));
            assert_eq!(ctx.x0(), &expect);
            assert_eq!(ctx.delta0(), 0);
        }
    }

    #[test]
    fn logarithmic_predicate() {
        let w = Weights::new(1, 1).unwrap();
        let ctx = QHContext::hamiltonian(w, p("x*y"), p("x*y"), 6).unwrap();
        assert!(is_logarithmic(ctx.x0(), &ctx));
        assert!(is_logarithmic(ctx.radial(), &ctx));
        assert!(!is_logarithmic(&VField::new(p("1"), p("0")), &ctx));
        assert!(to_log_basis(&VField::new(p("1"), p("0")), &ctx).is_err());
    }

    #[test]
    fn log_coordinates() {
        let ctx = cusp();
        assert_eq!(to_log_basis(ctx.x0(), &ctx).unwrap(), LogField::x0());
        assert_eq!(to_log_basis(ctx.radial(), &ctx).unwrap(), LogField::radial());
        let z = LogField::new(p("1"), p("x"));
        assert_eq!(to_log_basis(&z.materialize(&ctx), &ctx).unwrap(), z);
    }

    #[test]
    fn commuting_diagonal_fields() {
        let a = VField::new(p("x"), p("0"));
        let b = VField::new(p("0"), p("y"));
        assert!(lie_bracket(&a, &b).is_zero());
    }

    #[test]
    fn bracket_in_coordinates_matches_standard() {
        let ctx = cusp();
        let z1 = LogField::new(p("x + 2*y"), p("x^2 - 1/3*y"));
        let z2 = LogField::new(p("1 + y^2"), p("x*y + 5*x^3"));
        let direct = z1.materialize(&ctx).bracket(&z2.materialize(&ctx));
        let coords = z1.bracket(&z2, &ctx, 100).materialize(&ctx);
        assert_eq!(direct, coords);
    }

    #[test]
    fn sharp_flat_and_differential() {
        let ctx = cusp();
        assert_eq!(sharp(ctx.x0(), &ctx).unwrap(), LogForm::new(p("1"), p("0")));
        assert_eq!(flat(&LogForm::new(p("0"), p("1")), &ctx), *ctx.radial());
        let f = p("x^3*y - 2*x + 7/5*y^2");
        let (dx, dy) = LogForm::differential(&f, &ctx).cleared(&ctx);
        assert_eq!(dx, ctx.h0() * &f.deriv_x());
        assert_eq!(dy, ctx.h0() * &f.deriv_y());
    }

    #[test]
    fn saddle_node_context() {
        let w = Weights::new(1, 0).unwrap();
        let ctx = QHContext::with_initial_field(w, p("x*y"), p("x"), VField::new(p("0"), p("y")), 10).unwrap();
        assert_eq!(ctx.delta0(), 0);
        assert_eq!(ctx.det(), &qi(-1));
        let x = VField::new(p("x^2"), p("y + x*y"));
        let z = to_log_basis(&x, &ctx).unwrap();
        assert_eq!(z, LogField::new(p("1 + x"), p("x")));
    }
}
