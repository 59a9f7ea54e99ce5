//! Prenormalization: conjugating a logarithmic perturbation of `X0` degree by
//! degree until every remainder lies on the cokernel basis.
//!
//! Two loops are provided:
//!
//! - foliations: `Φ*X = u·(X0 + Σ d_i(h) a_i R)` with `Φ` a composition of
//!   exponentials of fields `c·R` and `u` a unit;
//! - fields with `δ0 = 0`: `Φ*X = (1 + Σ α_i(h) a_i) X0 + Σ d_i(h) a_i R`.
//!
//! Both loops run in the coordinates `(a, b)` of the basis `(X0, R)`;
//! verification is done independently in the standard coordinates.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::grading::{qi, Mono, Poly, Weights, Q};
use crate::homological::{CokerElement, HomologicalSolver};
use crate::logfields::{degree_zero_is, to_log_basis, LogField, QHContext, VField};
use crate::milnor::CokerBasis;
use crate::series::Series;

/// Ordered exponential generators `Z_1, Z_2, …` and a unit. The pullback by
/// the script is `… exp(Z_2)* exp(Z_1)* X`, i.e. `Φ = exp(Z_1) ∘ exp(Z_2) ∘ …`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjugationScript {
    pub generators: Vec<VField>,
    pub unit: Poly,
    /// Every generator is of the form `c·R`.
    pub fibered: bool,
}

impl ConjugationScript {
    pub fn identity() -> Self {
        Self { generators: Vec::new(), unit: Poly::one(), fibered: true }
    }

    /// Generators of the form `c·R` report their coefficient `c`.
    pub fn radial_coefficient(z: &VField, w: &Weights) -> Option<Poly> {
        let c = z.p.div_exact(&Poly::monomial(qi(w.p1() as i64), Mono::new(1, 0)), w).ok()?;
        let r = VField::radial(w);
        (r.mul_fn(&c) == *z).then_some(c)
    }
}

/// Metadata of the final reduction of one coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Finalized {
    /// Basis index (0-based) of the reduced coefficient.
    pub index: usize,
    pub m: u32,
    pub n: u32,
    /// Leading coefficient of the reduced coefficient, `d_i = κh^m/(1 + λh^(m+n))`.
    pub kappa: Q,
    pub lambda: Q,
}

/// `X0 + Σ d_i(h) a_i R`, plus `(Σ α_i(h) a_i)·X0` for the field pipeline.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalForm {
    pub basis: CokerBasis,
    pub d: Vec<Series>,
    pub field_part: Option<Vec<Series>>,
    pub finalized: Option<Finalized>,
    pub truncation: u32,
}

impl NormalForm {
    /// Empty normal form (`X0` itself) with coefficient precisions fixed by
    /// the truncation.
    pub fn empty(basis: CokerBasis, ctx: &QHContext, with_field_part: bool) -> Self {
        let k = ctx.truncation();
        let d = (0..basis.mu()).map(|i| Series::zero(coeff_prec(&basis, i, k as i64))).collect();
        let field_part = with_field_part.then(|| {
            (0..basis.mu())
                .map(|i| Series::zero(coeff_prec(&basis, i, k as i64 - ctx.delta0())))
                .collect()
        });
        Self { basis, d, field_part, finalized: None, truncation: k }
    }

    /// Builds the series coefficients from cokernel elements.
    pub fn from_remainders(
        basis: CokerBasis,
        ctx: &QHContext,
        r_part: &CokerElement,
        x0_part: Option<&CokerElement>,
    ) -> Self {
        let mut nf = Self::empty(basis, ctx, x0_part.is_some());
        for ((i, j), c) in &r_part.coeffs {
            nf.d[*i].set_coeff(*j as usize, c.clone());
        }
        if let (Some(fp), Some(elem)) = (nf.field_part.as_mut(), x0_part) {
            for ((i, j), c) in &elem.coeffs {
                fp[*i].set_coeff(*j as usize, c.clone());
            }
        }
        nf
    }

    /// Whether every `R` coefficient vanishes.
    pub fn is_integrable(&self) -> bool {
        self.d.iter().all(Series::is_zero)
    }

    /// Coordinates `(a, b)` of the normal form in the basis `(X0, R)`.
    pub fn log_form(&self, ctx: &QHContext) -> LogField {
        let k = self.truncation as i64;
        let mut a = Poly::one();
        let mut b = Poly::zero();
        for (i, s) in self.d.iter().enumerate() {
            b += &series_times_monomial(s, ctx, self.basis.monomials[i], k);
        }
        if let Some(fp) = &self.field_part {
            for (i, s) in fp.iter().enumerate() {
                a += &series_times_monomial(s, ctx, self.basis.monomials[i], k - ctx.delta0());
            }
        }
        LogField { a, b }
    }

    pub fn materialize(&self, ctx: &QHContext) -> VField {
        self.log_form(ctx).materialize(ctx)
    }
}

/// Largest `j` with `pdeg(a_i) + jδ ≤ max_deg` (0 if none).
pub(crate) fn coeff_prec(basis: &CokerBasis, i: usize, max_deg: i64) -> usize {
    let room = max_deg - basis.degrees[i] as i64;
    if room < 0 {
        0
    } else {
        (room / basis.delta as i64) as usize
    }
}

/// `s(h)·x^m`, dropping terms above `max_deg`.
pub fn series_times_monomial(s: &Series, ctx: &QHContext, m: Mono, max_deg: i64) -> Poly {
    let w = ctx.weights();
    let mut out = Poly::zero();
    let mut power = Poly::monomial(Q::one(), m).truncate(w, max_deg);
    for (j, c) in s.coeffs().iter().enumerate() {
        if j > 0 {
            power = power.mul_trunc(ctx.h(), w, max_deg);
        }
        if power.is_zero() {
            break;
        }
        if !c.is_zero() {
            out += &power.scale(c);
        }
    }
    out
}

/// `(exp Z)* X = Σ ad_Z^k(X) / k!`, truncated at field degree `k`.
pub fn exp_conjugate(z: &VField, x: &VField, w: &Weights, k: i64) -> Result<VField> {
    let out = x.truncate(w, k);
    if z.is_zero() {
        return Ok(out);
    }
    match z.porder(w) {
        Some(d) if d >= 1 => {}
        _ => return Err(Error::Precondition("exponential generators must have positive order".into())),
    }
    let mut out = out;
    let mut term = out.clone();
    let mut n = 1i64;
    loop {
        term = z.bracket_trunc(&term, w, k).scale(&Q::new(1.into(), n.into()));
        if term.is_zero() {
            return Ok(out);
        }
        out = &out + &term;
        n += 1;
    }
}

/// [`exp_conjugate`] in the coordinates of the basis `(X0, R)`.
pub fn exp_conjugate_log(z: &LogField, x: &LogField, ctx: &QHContext, k: i64) -> Result<LogField> {
    let out = x.truncate(ctx, k);
    if z.is_zero() {
        return Ok(out);
    }
    match z.porder(ctx) {
        Some(d) if d >= 1 => {}
        _ => return Err(Error::Precondition("exponential generators must have positive order".into())),
    }
    let mut out = out;
    let mut term = out.clone();
    let mut n = 1i64;
    loop {
        term = z.bracket(&term, ctx, k).scale(&Q::new(1.into(), n.into()));
        if term.is_zero() {
            return Ok(out);
        }
        out = &out + &term;
        n += 1;
    }
}

/// Inverse of a series whose degree-0 part is exactly 1, up to `max_deg`.
pub(crate) fn graded_inverse(f: &Poly, w: &Weights, max_deg: i64) -> Vec<Poly> {
    let comps = f.components(w);
    let mut inv: Vec<Poly> = vec![Poly::one()];
    for n in 1..=max_deg.max(0) as u32 {
        let mut acc = Poly::zero();
        for (&j, fj) in comps.range(1..=n) {
            let prev = &inv[(n - j) as usize];
            if !prev.is_zero() {
                acc += &(fj * prev);
            }
        }
        inv.push(-&acc);
    }
    inv
}

fn component_of_product(comps: &BTreeMap<u32, Poly>, inv: &[Poly], k: u32) -> Poly {
    let mut out = Poly::zero();
    for (&j, bj) in comps.range(..=k) {
        let other = &inv[(k - j) as usize];
        if !other.is_zero() {
            out += &(bj * other);
        }
    }
    out
}

fn check_perturbation(z: &LogField, ctx: &QHContext) -> Result<()> {
    let w = ctx.weights();
    if ctx.delta0() < 0 {
        return Err(Error::Unsupported(format!("X0 has negative degree {}", ctx.delta0())));
    }
    if !degree_zero_is(&z.a, w, &Q::one()) || z.a.porder(w).is_none() {
        return Err(Error::Precondition(
            "the X0-coefficient of the field must have degree-0 part exactly 1".into(),
        ));
    }
    if let Some(d) = z.b.porder(w) {
        if d as i64 <= ctx.delta0() {
            return Err(Error::Precondition(format!(
                "the R-coefficient has a term of degree {d}; the perturbation must have order > {}",
                ctx.delta0()
            )));
        }
    }
    Ok(())
}

fn structured_solver(ctx: &QHContext) -> Result<HomologicalSolver> {
    let solver = HomologicalSolver::new(ctx)?;
    if !solver.is_structured() {
        return Err(Error::Unsupported(
            "no structured cokernel basis over Q[[h]] (neither an isolated Hamiltonian X0 nor a diagonal X0 \
             whose kernel is generated by h)"
                .into(),
        ));
    }
    Ok(solver)
}

/// Foliation prenormalization: returns the prenormal form and a fibered
/// script with `Φ*X = u·(X0 + Σ d_i(h) a_i R)` up to the truncation.
pub fn prenormalize_foliation(x: &VField, ctx: &QHContext) -> Result<(NormalForm, ConjugationScript)> {
    let w = ctx.weights();
    let k = ctx.truncation() as i64;
    let d0 = ctx.delta0();
    let mut z = to_log_basis(x, ctx)?.truncate(ctx, k);
    check_perturbation(&z, ctx)?;
    let solver = structured_solver(ctx)?;
    let mut rem = CokerElement::zero();
    let mut generators = Vec::new();
    for deg in (d0 + 1)..=k {
        // R-coefficient of X / a, in degree `deg`
        let inv = graded_inverse(&z.a, w, k - d0);
        let g = component_of_product(&z.b.components(w), &inv, deg as u32);
        if g.is_zero() {
            continue;
        }
        let sol = solver.solve_degree(deg as u32, &g)?;
        rem.add(&sol.rem);
        if !sol.b.is_zero() {
            let gen = LogField::new(Poly::zero(), sol.b.clone());
            z = exp_conjugate_log(&gen, &z, ctx, k)?;
            generators.push(ctx.radial().mul_fn(&sol.b));
        }
    }
    let unit = z.a.truncate(w, k - d0);
    let nf = NormalForm::from_remainders(solver.basis().clone(), ctx, &rem, None);
    Ok((nf, ConjugationScript { generators, unit, fibered: true }))
}

/// Field prenormalization for `δ0 = 0`: both coordinates are reduced
/// independently, no unit is used.
pub fn prenormalize_field(x: &VField, ctx: &QHContext) -> Result<(NormalForm, ConjugationScript)> {
    if ctx.delta0() != 0 {
        return Err(Error::Unsupported(format!(
            "the field pipeline needs δ0 = 0 (here δ0 = {})",
            ctx.delta0()
        )));
    }
    let w = ctx.weights();
    let k = ctx.truncation() as i64;
    let mut z = to_log_basis(x, ctx)?.truncate(ctx, k);
    check_perturbation(&z, ctx)?;
    let solver = structured_solver(ctx)?;
    let mut rem_a = CokerElement::zero();
    let mut rem_b = CokerElement::zero();
    let mut generators = Vec::new();
    let mut fibered = true;
    for deg in 1..=k as u32 {
        let sa = solver.solve_degree(deg, &z.a.component(w, deg))?;
        let sb = solver.solve_degree(deg, &z.b.component(w, deg))?;
        rem_a.add(&sa.rem);
        rem_b.add(&sb.rem);
        let gen = LogField::new(sa.b, sb.b);
        if !gen.is_zero() {
            fibered &= gen.a.is_zero();
            z = exp_conjugate_log(&gen, &z, ctx, k)?;
            generators.push(gen.materialize(ctx));
        }
    }
    let nf = NormalForm::from_remainders(solver.basis().clone(), ctx, &rem_b, Some(&rem_a));
    Ok((nf, ConjugationScript { generators, unit: Poly::one(), fibered }))
}

/// First coefficient where a claimed conjugacy fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    /// Field degree of the offending term.
    pub degree: i64,
    pub monomial: Mono,
    /// `'x'` for the `∂x` component, `'y'` for `∂y`.
    pub component: char,
    pub expected: Q,
    pub found: Q,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "degree {}: coefficient of {}*d/d{} is {} but {} was expected",
            self.degree, self.monomial, self.component, self.found, self.expected
        )
    }
}

/// Pulls `x` back through the script in standard coordinates and compares
/// with `unit·N` up to field degree `k`.
pub fn verify_conjugacy(
    x: &VField,
    script: &ConjugationScript,
    nf: &NormalForm,
    ctx: &QHContext,
    k: i64,
) -> std::result::Result<(), Mismatch> {
    let w = ctx.weights();
    let mut y = x.truncate(w, k);
    for z in &script.generators {
        y = exp_conjugate(z, &y, w, k).map_err(|_| Mismatch {
            degree: z.porder(w).unwrap_or(0),
            monomial: Mono::ONE,
            component: 'x',
            expected: Q::zero(),
            found: Q::zero(),
        })?;
    }
    let n = nf.materialize(ctx);
    let expected = VField {
        p: script.unit.mul_trunc(&n.p, w, k + w.p1() as i64),
        q: script.unit.mul_trunc(&n.q, w, k + w.p2() as i64),
    };
    first_difference(&expected, &y, w).map_or(Ok(()), Err)
}

/// Lowest-degree term where two fields differ.
pub fn first_difference(expected: &VField, found: &VField, w: &Weights) -> Option<Mismatch> {
    let diff = found - expected;
    let best = [('x', &diff.p, w.p1()), ('y', &diff.q, w.p2())]
        .into_iter()
        .flat_map(|(comp, poly, shift)| {
            poly.terms().map(move |(m, _)| (w.pdeg(*m) as i64 - shift as i64, *m, comp))
        })
        .min_by(|a, b| a.0.cmp(&b.0).then_with(|| w.cmp_canonical(a.1, b.1)).then(a.2.cmp(&b.2)));
    best.map(|(degree, monomial, component)| {
        let (e, f) = if component == 'x' {
            (expected.p.coeff(monomial), found.p.coeff(monomial))
        } else {
            (expected.q.coeff(monomial), found.q.coeff(monomial))
        };
        Mismatch { degree, monomial, component, expected: e, found: f }
    })
}
