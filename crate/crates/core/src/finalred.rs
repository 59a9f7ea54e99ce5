//! Final reduction of prenormal forms by fibered gauges `exp(b(h)·R)`.
//!
//! A fibered diffeomorphism `Φ` with `h∘Φ = φ(h)` acts on the foliation
//! form `X0 + Σ d_i(h) a_i R` through one-variable data: with
//! `q_i = pdeg(a_i) − δ0`, the series `h^(1+q_i/δ) d_i(h)` transforms like the
//! coefficient of a vector field on the `h`-line. The fractional exponent
//! disappears on the cover `h = z^δ`, where the coefficient becomes the field
//! `z^(1+q_i) d_i(z^δ) ∂z`, which is brought to `κz^N / (1 + λz^(N−1)) ∂z`.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::grading::{qi, Poly, Q};
use crate::logfields::{LogField, QHContext, VField};
use crate::prenorm::{exp_conjugate_log, series_times_monomial, ConjugationScript, Finalized, NormalForm};
use crate::series::Series;

/// The field `z^order·u(z)·∂z` with `u(0) ≠ 0`, known up to `z^(order + u.prec())`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OneVarField {
    /// `s` when the field lives on the cover `h = z^s` (1 on the base).
    pub cover_exponent: u32,
    pub order: usize,
    pub u: Series,
}

impl OneVarField {
    pub fn new(cover_exponent: u32, order: usize, u: Series) -> Result<Self> {
        if u.coeff(0).is_zero() {
            return Err(Error::Precondition("u(0) must be nonzero".into()));
        }
        Ok(Self { cover_exponent, order, u })
    }

    /// Splits a nonzero series `f` as `z^order·u`.
    pub fn from_series(f: &Series, cover_exponent: u32) -> Option<Self> {
        let order = f.order()?;
        Some(Self { cover_exponent, order, u: f.shift_down(order) })
    }

    /// The coefficient series `z^order·u(z)`.
    pub fn to_series(&self) -> Series {
        self.u.shift_up(self.order)
    }

    /// Highest power of `z` known.
    pub fn top(&self) -> usize {
        self.order + self.u.prec()
    }
}

/// Result of [`normalize_onevar`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OneVarNormalization {
    /// Order `N` of the field.
    pub m: usize,
    /// `u(0)`.
    pub kappa: Q,
    /// Denominator coefficient: the normal form is `κz^N / (1 + λz^(N−1))`.
    pub lambda: Q,
    /// Whether the precision reached the coefficient fixing `λ`.
    pub lambda_known: bool,
    /// Tangent-to-identity conjugacy `φ` with `v(φ(z)) = φ'(z)·normal(z)`.
    pub phi: Series,
    /// Generators `(s, c)` standing for `exp(c z^s ∂z)`, in application order.
    pub generators: Vec<(usize, Q)>,
    pub normal: OneVarField,
}

/// `[c z^s ∂z, f ∂z]` as a coefficient series of the same precision.
fn bracket_monomial(s: usize, c: &Q, f: &Series) -> Series {
    let prec = f.prec();
    let mut out = Series::zero(prec);
    for n in 0..=prec {
        // coefficient at z^n comes from f_k with k = n − s + 1
        if n + 1 < s {
            continue;
        }
        let k = n + 1 - s;
        let fk = f.coeff(k);
        if fk.is_zero() {
            continue;
        }
        let factor = qi(k as i64) - qi(s as i64);
        out.set_coeff(n, c * factor * fk);
    }
    out
}

/// `exp(c z^s ∂z)*(f ∂z)` with `s ≥ 2`.
fn pullback_monomial(s: usize, c: &Q, f: &Series) -> Series {
    let mut out = f.clone();
    let mut term = f.clone();
    let mut n = 1i64;
    loop {
        term = bracket_monomial(s, c, &term).scale(&Q::new(1.into(), n.into()));
        if term.is_zero() {
            return out;
        }
        out = out.add(&term);
        n += 1;
    }
}

/// Brings `v` to `κz^N / (1 + λz^(N−1)) ∂z` up to `z^k` by successive
/// conjugations with `exp(c z^(j+1) ∂z)`, one coefficient per step; the
/// coefficient of `z^(2N−1)` cannot be removed and fixes `λ`.
pub fn normalize_onevar(v: &OneVarField, k: usize) -> Result<OneVarNormalization> {
    let n = v.order;
    if n < 2 {
        return Err(Error::Precondition(format!("one-variable normalization needs order ≥ 2, got {n}")));
    }
    let kappa = v.u.coeff(0);
    if kappa.is_zero() {
        return Err(Error::Precondition("u(0) must be nonzero".into()));
    }
    let top = k.min(v.top());
    let mut f = v.to_series().with_prec(top);
    let mut lambda = Q::zero();
    let mut lambda_known = false;
    let mut generators = Vec::new();
    for j in 1..=top.saturating_sub(n) {
        let cur = f.coeff(n + j);
        if j == n - 1 {
            lambda = -&cur / &kappa;
            lambda_known = true;
            continue;
        }
        let target = if lambda_known && j % (n - 1) == 0 {
            let t = (j / (n - 1)) as i32;
            &kappa * (-&lambda).pow(t)
        } else {
            Q::zero()
        };
        if cur == target {
            continue;
        }
        let c = (&target - &cur) / (&kappa * qi(n as i64 - j as i64 - 1));
        f = pullback_monomial(j + 1, &c, &f);
        generators.push((j + 1, c));
    }
    let mut phi = Series::var(top);
    for (s, c) in &generators {
        let step = Series::flow_time_one(&Series::monomial(c.clone(), *s, top));
        phi = phi.compose(&step);
    }
    let normal = OneVarField { cover_exponent: v.cover_exponent, order: n, u: f.shift_down(n) };
    Ok(OneVarNormalization { m: n, kappa, lambda, lambda_known, phi, generators, normal })
}

/// Coefficient of `z^(−1)` in `dz / v`, or `None` when the precision of `v`
/// does not reach it.
pub fn residue(v: &OneVarField) -> Option<Q> {
    let k = v.order.checked_sub(1)?;
    (k <= v.u.prec()).then(|| v.u.inverse().coeff(k))
}

/// Checks that `φ = h + O(h²)`.
fn check_tangent(phi: &Series) -> Result<()> {
    if !phi.coeff(0).is_zero() || !phi.coeff(1).is_one() {
        return Err(Error::Precondition("the gauge must satisfy φ(0) = 0, φ'(0) = 1".into()));
    }
    Ok(())
}

/// Transforms the prenormal form under a fibered diffeomorphism with
/// `h∘Φ = φ(h)`:
/// `d_i ↦ d_i(φ)·(φ/h)^(1 + q_i/δ) / φ'` with `q_i = pdeg(a_i) − δ0`, and, for
/// the field pipeline, `α_i ↦ α_i(φ)·(φ/h)^(r_i)` with `r_i = pdeg(a_i)/δ`.
pub fn fibered_action(nf: &NormalForm, phi: &Series, ctx: &QHContext) -> Result<NormalForm> {
    check_tangent(phi)?;
    let need = nf
        .d
        .iter()
        .chain(nf.field_part.iter().flatten())
        .map(|s| s.prec() + 1)
        .max()
        .unwrap_or(1);
    if phi.prec() < need {
        return Err(Error::Precondition(format!(
            "gauge known to order {} but order {need} is needed",
            phi.prec()
        )));
    }
    let delta = ctx.delta() as i64;
    let ratio = phi.shift_down(1);
    let dphi_inv = phi.derivative().inverse();
    let mut out = nf.clone();
    for (i, d) in nf.d.iter().enumerate() {
        let q = nf.basis.degrees[i] as i64 - ctx.delta0();
        let e = Q::new((delta + q).into(), delta.into());
        let t = d.compose(phi).mul(&ratio.pow_rational(&e)).mul(&dphi_inv);
        out.d[i] = t.with_prec(d.prec());
    }
    if let (Some(fp), Some(out_fp)) = (&nf.field_part, out.field_part.as_mut()) {
        for (i, a) in fp.iter().enumerate() {
            let e = Q::new((nf.basis.degrees[i] as i64).into(), delta.into());
            out_fp[i] = a.compose(phi).mul(&ratio.pow_rational(&e)).with_prec(a.prec());
        }
    }
    Ok(out)
}

/// Outcome of [`final_reduce`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FinalOutcome {
    /// Every `R` coefficient vanishes: the form is integrable up to the
    /// truncation.
    Integrable,
    Reduced(FinalReduction),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinalReduction {
    pub nf: NormalForm,
    /// Coefficients `c·h^t` of the gauge generators `c·h^t·R`, in
    /// application order.
    pub gauge: Vec<Poly>,
    /// `φ` with `h∘Φ = φ(h)`.
    pub phi: Series,
    /// `λ = 0` was forced because `δ ∤ q_i`.
    pub lambda_forced_zero: bool,
    pub lambda_known: bool,
}

/// Reduces coefficient `pick` (default: the first nonzero one) to
/// `κh^m / (1 + λh^(m+n))` and transports every other coefficient by the same
/// gauge.
pub fn final_reduce(nf: &NormalForm, pick: Option<usize>, ctx: &QHContext) -> Result<FinalOutcome> {
    let i = match pick {
        Some(i) if i >= nf.d.len() => {
            return Err(Error::Precondition(format!("basis index {} out of range (μ = {})", i + 1, nf.d.len())))
        }
        Some(i) if nf.d[i].is_zero() => {
            return Err(Error::Precondition(format!("coefficient d_{} vanishes up to the truncation", i + 1)))
        }
        Some(i) => i,
        None => match nf.d.iter().position(|s| !s.is_zero()) {
            Some(i) => i,
            None => return Ok(FinalOutcome::Integrable),
        },
    };
    let delta = ctx.delta() as i64;
    let q = nf.basis.degrees[i] as i64 - ctx.delta0();
    let d = &nf.d[i];
    let m = d.order().expect("nonzero coefficient") as i64;
    let j_top = d.prec() as i64;
    let order = 1 + q + delta * m;
    if order < 2 {
        return Err(Error::Precondition(format!(
            "coefficient d_{} has order {m}, too low for a perturbation",
            i + 1
        )));
    }
    let cover_top = (1 + q + delta * j_top) as usize;
    let mut u = Series::zero((delta * (j_top - m)) as usize);
    for j in m..=j_top {
        u.set_coeff((delta * (j - m)) as usize, d.coeff(j as usize));
    }
    let v = OneVarField::new(delta as u32, order as usize, u)?;
    let norm = normalize_onevar(&v, cover_top)?;

    // descend the cover generators c z^(1+δt) ∂z to c h^t R
    let prec = nf.d.iter().chain(nf.field_part.iter().flatten()).map(|s| s.prec()).max().unwrap_or(0) + 1;
    let mut phi = Series::var(prec);
    let mut gauge = Vec::new();
    for (s, c) in &norm.generators {
        let t = (*s as i64 - 1) / delta;
        debug_assert_eq!((*s as i64 - 1) % delta, 0, "cover generators respect the δ-fold symmetry");
        gauge.push(ctx.h().pow(t as u32).scale(c));
        let field = Series::monomial(c * qi(delta), (1 + t) as usize, prec);
        phi = phi.compose(&Series::flow_time_one(&field));
    }
    let mut out = fibered_action(nf, &phi, ctx)?;
    let divisible = q.rem_euclid(delta) == 0;
    let (n, lambda) = if divisible { ((q / delta) as u32, norm.lambda.clone()) } else { (0, Q::zero()) };
    out.finalized = Some(Finalized { index: i, m: m as u32, n, kappa: norm.kappa.clone(), lambda });
    debug_assert_eq!(out.d[i], rational_coefficient(&norm.kappa, m as u32, &out.finalized.as_ref().unwrap().lambda, m as u32 + n, d.prec()));
    Ok(FinalOutcome::Reduced(FinalReduction {
        nf: out,
        gauge,
        phi,
        lambda_forced_zero: !divisible,
        lambda_known: norm.lambda_known,
    }))
}

/// Expansion of `κh^m / (1 + λh^e)` up to `h^prec`.
pub fn rational_coefficient(kappa: &Q, m: u32, lambda: &Q, e: u32, prec: usize) -> Series {
    let mut den = Series::one(prec);
    den.set_coeff(e as usize, &den.coeff(e as usize) + lambda);
    Series::monomial(kappa.clone(), m as usize, prec).div(&den)
}

/// Appends the fibered gauge of a final reduction to a foliation script and
/// recomputes the unit, so that the script conjugates `X` to
/// `unit·(reduced normal form)`.
pub fn extend_script(
    script: &ConjugationScript,
    before: &NormalForm,
    red: &FinalReduction,
    ctx: &QHContext,
) -> Result<ConjugationScript> {
    let w = ctx.weights();
    let k = ctx.truncation() as i64;
    let d0 = ctx.delta0();
    let form = before.log_form(ctx);
    let mut z = LogField {
        a: script.unit.mul_trunc(&form.a, w, k - d0),
        b: script.unit.mul_trunc(&form.b, w, k),
    };
    let mut generators = script.generators.clone();
    for c in &red.gauge {
        z = exp_conjugate_log(&LogField::new(Poly::zero(), c.clone()), &z, ctx, k)?;
        generators.push(ctx.radial().mul_fn(c));
    }
    Ok(ConjugationScript { generators, unit: z.a.truncate(w, k - d0), fibered: script.fibered })
}

/// Result of [`field_final_reduce`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldReduction {
    pub nf: NormalForm,
    /// Generators to append to the field script, in application order.
    pub generators: Vec<VField>,
}

/// Field normal form for `δ0 = 0`, `μ = 1`:
/// `(1 + α(h)) X0 + β(h) R  ~  P_m(h) X0 + κh^m / (1 + λh^m) R`.
///
/// Stage one normalizes `β` with a fibered gauge. Stage two uses
/// `exp(α(h)X0)*(a X0 + b R) = (a − b·R(α)) X0 + b R` to cut the `X0`
/// coefficient down to degree `m` in `h`.
pub fn field_final_reduce(nf: &NormalForm, ctx: &QHContext) -> Result<FieldReduction> {
    if nf.field_part.is_none() {
        return Err(Error::Unsupported("field reduction needs a field-pipeline normal form".into()));
    }
    if ctx.delta0() != 0 || nf.basis.mu() != 1 {
        return Err(Error::Unsupported("field reduction needs δ0 = 0 and a cokernel of rank 1".into()));
    }
    let red = match final_reduce(nf, None, ctx)? {
        FinalOutcome::Integrable => return Ok(FieldReduction { nf: nf.clone(), generators: Vec::new() }),
        FinalOutcome::Reduced(r) => r,
    };
    let mut generators: Vec<VField> = red.gauge.iter().map(|c| ctx.radial().mul_fn(c)).collect();
    let mut out = red.nf;
    let fin = out.finalized.clone().expect("reduced form");
    let m = fin.m as usize;
    let b2 = out.d[0].clone();
    let alpha_bar = out.field_part.as_ref().expect("field part")[0].clone();
    let prec = alpha_bar.prec();
    let mut a2 = alpha_bar.clone();
    a2.set_coeff(0, a2.coeff(0) + Q::one());
    let mut tail = a2.clone();
    for j in 0..=m.min(prec) {
        tail.set_coeff(j, Q::zero());
    }
    if !tail.is_zero() && prec > m {
        // α' = (a2 − P_m) / (δ h b2)
        let num = tail.shift_down(m + 1);
        let den = b2.shift_down(m).scale(&qi(ctx.delta() as i64));
        let alpha = num.div(&den).integral();
        let k = ctx.truncation() as i64;
        let alpha_poly = series_times_monomial(&alpha, ctx, crate::grading::Mono::ONE, k);
        if !alpha_poly.is_zero() {
            generators.push(ctx.x0().mul_fn(&alpha_poly));
        }
        let mut new_fp = alpha_bar.clone();
        for j in (m + 1)..=prec {
            new_fp.set_coeff(j, Q::zero());
        }
        out.field_part = Some(vec![new_fp]);
    }
    Ok(FieldReduction { nf: out, generators })
}
