//! The homological equation `X0(b) = β` solved slice by slice, with the
//! remainder expressed on a complement of the image of `X0`.
//!
//! `X0` is quasi-homogeneous of degree `δ0`, so it maps the degree-`n`
//! slice into the degree-`(n + δ0)` slice. For every target degree the solver
//! stores an echelon form of `[X0(source monomials) | complement columns]`;
//! pivots are taken in column order, so a particular solution never carries
//! a kernel component and the remainder is unique.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::grading::{qi, Mono, Poly, Weights, Q};
use crate::linalg::Echelon;
use crate::logfields::QHContext;
use crate::milnor::{self, coords, CokerBasis};

/// How remainders are expressed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisMode {
    /// On the monomials `a_i·h^j` for a basis `a_i` of the cokernel over
    /// `ℚ[[h]]`.
    Structured,
    /// On a greedy complement of monomials, with no structure over `ℚ[[h]]`.
    Generic,
}

/// Element `Σ c_ij a_i h^j` of the cokernel, plus (generic mode only) a
/// remainder on the greedy monomial complement.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CokerElement {
    pub coeffs: BTreeMap<(usize, u32), Q>,
    pub free: Poly,
}

impl CokerElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty() && self.free.is_zero()
    }

    pub fn add_term(&mut self, i: usize, j: u32, c: Q) {
        if c.is_zero() {
            return;
        }
        let e = self.coeffs.entry((i, j)).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&(i, j));
        }
    }

    pub fn add(&mut self, other: &CokerElement) {
        for ((i, j), c) in &other.coeffs {
            self.add_term(*i, *j, c.clone());
        }
        self.free += &other.free;
    }

    pub fn coeff(&self, i: usize, j: u32) -> Q {
        self.coeffs.get(&(i, j)).cloned().unwrap_or_else(Q::zero)
    }

    /// The polynomial `Σ c_ij a_i h^j + free`.
    pub fn materialize(&self, basis: &CokerBasis, h: &Poly) -> Poly {
        let mut out = self.free.clone();
        let mut powers = vec![Poly::one()];
        for ((i, j), c) in &self.coeffs {
            while powers.len() <= *j as usize {
                let next = powers.last().unwrap() * h;
                powers.push(next);
            }
            out += &powers[*j as usize].mul_mono(c, basis.monomials[*i]);
        }
        out
    }
}

/// Output of [`HomologicalSolver::solve`]: `β = X0(b) + rem`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct X0Solution {
    pub b: Poly,
    pub rem: CokerElement,
}

#[derive(Clone, Debug)]
enum Column {
    Basis(usize, u32),
    Monomial(Mono),
}

#[derive(Clone, Debug)]
struct SliceSolver {
    target: Vec<Mono>,
    source: Vec<Mono>,
    extra: Vec<Column>,
    ech: Echelon,
}

#[derive(Clone, Debug)]
struct Diagonal {
    alpha: Q,
    beta: Q,
    /// Exponent of the monomial generating the kernel ring of `X0`.
    generator: Mono,
    /// `h = scale · generator^power`.
    power: u32,
    scale: Q,
}

/// Solver for `X0(b) = β` bound to one context.
#[derive(Clone, Debug)]
pub struct HomologicalSolver {
    ctx: QHContext,
    basis: CokerBasis,
    mode: BasisMode,
    diagonal: Option<Diagonal>,
    slices: BTreeMap<u32, SliceSolver>,
}

impl HomologicalSolver {
    /// Chooses the solving strategy for the context and precomputes every
    /// slice up to the truncation bound.
    ///
    /// - `X0 = αx∂x + βy∂y` whose kernel ring is generated by a monomial `g`
    ///   with `h = c·g^k`: monomial-by-monomial solve, basis `{1, g, …, g^(k−1)}`;
    /// - Hamiltonian `X0` of an isolated singularity: basis from the Milnor
    ///   algebra, checked to be a complement of the image in every degree;
    /// - otherwise: greedy complement, [`BasisMode::Generic`].
    pub fn new(ctx: &QHContext) -> Result<Self> {
        if let Some(diag) = diagonal_structure(ctx) {
            let mut monomials = Vec::new();
            let mut degrees = Vec::new();
            for i in 0..diag.power {
                let m = Mono::new(diag.generator.ex * i, diag.generator.ey * i);
                monomials.push(m);
                degrees.push(ctx.weights().pdeg(m));
            }
            let basis = CokerBasis { monomials, degrees, delta: ctx.delta() };
            return Ok(Self {
                ctx: ctx.clone(),
                basis,
                mode: BasisMode::Structured,
                diagonal: Some(diag),
                slices: BTreeMap::new(),
            });
        }
        if !ctx.weights().is_positive() {
            return Err(Error::Unsupported(
                "a zero weight needs a diagonal X0 whose kernel is generated by h".into(),
            ));
        }
        let structured = ctx.is_hamiltonian() && milnor::is_isolated(ctx);
        let (basis, mode) = if structured {
            (milnor::milnor_basis(ctx)?, BasisMode::Structured)
        } else {
            (CokerBasis { monomials: Vec::new(), degrees: Vec::new(), delta: ctx.delta() }, BasisMode::Generic)
        };
        let mut solver = Self { ctx: ctx.clone(), basis, mode, diagonal: None, slices: BTreeMap::new() };
        for n in 0..=ctx.truncation() {
            let s = solver.build_slice(n)?;
            solver.slices.insert(n, s);
        }
        Ok(solver)
    }

    pub fn mode(&self) -> BasisMode {
        self.mode
    }

    pub fn is_structured(&self) -> bool {
        self.mode == BasisMode::Structured
    }

    pub fn basis(&self) -> &CokerBasis {
        &self.basis
    }

    pub fn context(&self) -> &QHContext {
        &self.ctx
    }

    fn build_slice(&self, n: u32) -> Result<SliceSolver> {
        let w = self.ctx.weights();
        let target = w.slice_monomials(n);
        let src_deg = n as i64 - self.ctx.delta0();
        let source = if src_deg >= 0 { w.slice_monomials(src_deg as u32) } else { Vec::new() };
        let mut columns: Vec<Vec<Q>> = source
            .iter()
            .map(|m| coords(&self.ctx.x0_apply(&Poly::monomial(Q::one(), *m)), &target))
            .collect();
        let mut extra = Vec::new();
        match self.mode {
            BasisMode::Structured => {
                for (i, &d) in self.basis.degrees.iter().enumerate() {
                    if d > n || (n - d) % self.ctx.delta() != 0 {
                        continue;
                    }
                    let j = (n - d) / self.ctx.delta();
                    let col = self.ctx.h().pow(j).mul_mono(&Q::one(), self.basis.monomials[i]);
                    columns.push(coords(&col, &target));
                    extra.push(Column::Basis(i, j));
                }
            }
            BasisMode::Generic => {
                for (k, m) in target.iter().enumerate() {
                    let mut e = vec![Q::zero(); target.len()];
                    e[k] = Q::one();
                    columns.push(e);
                    extra.push(Column::Monomial(*m));
                }
            }
        }
        let ech = Echelon::from_columns(&columns, target.len());
        if self.mode == BasisMode::Structured {
            let offset = source.len();
            let independent = (offset..columns.len()).all(|c| ech.is_pivot(c));
            if ech.rank() != target.len() || !independent {
                return Err(Error::StructureFailure { degree: n });
            }
        }
        Ok(SliceSolver { target, source, extra, ech })
    }

    /// Solves `X0(b) = β_n` for a quasi-homogeneous `β_n` of degree `n`.
    pub fn solve_degree(&self, n: u32, beta_n: &Poly) -> Result<X0Solution> {
        if let Some(diag) = &self.diagonal {
            return Ok(self.solve_diagonal(diag, beta_n));
        }
        let built;
        let slice = match self.slices.get(&n) {
            Some(s) => s,
            None => {
                built = self.build_slice(n)?;
                &built
            }
        };
        let rhs = coords(beta_n, &slice.target);
        let sol = slice
            .ech
            .solve(&rhs)
            .ok_or(Error::StructureFailure { degree: n })?;
        let mut b = Poly::zero();
        for (m, c) in slice.source.iter().zip(&sol) {
            b.add_term(*m, c.clone());
        }
        let mut rem = CokerElement::zero();
        for (col, c) in slice.extra.iter().zip(&sol[slice.source.len()..]) {
            match col {
                Column::Basis(i, j) => rem.add_term(*i, *j, c.clone()),
                Column::Monomial(m) => rem.free.add_term(*m, c.clone()),
            }
        }
        Ok(X0Solution { b, rem })
    }

    fn solve_diagonal(&self, diag: &Diagonal, beta: &Poly) -> X0Solution {
        let mut b = Poly::zero();
        let mut rem = CokerElement::zero();
        for (m, c) in beta.terms() {
            let eig = &diag.alpha * qi(m.ex as i64) + &diag.beta * qi(m.ey as i64);
            if !eig.is_zero() {
                b.add_term(*m, c / eig);
                continue;
            }
            let t = if diag.generator.ex > 0 { m.ex / diag.generator.ex } else { m.ey / diag.generator.ey };
            let (j, i) = t.div_rem(&diag.power);
            // g^t = g^i (h / scale)^j
            rem.add_term(i as usize, j, c * diag.scale.pow(j as i32));
        }
        X0Solution { b, rem }
    }

    /// Solves `X0(b) = β` degree by degree: `β = X0(b) + rem`.
    pub fn solve(&self, beta: &Poly) -> Result<X0Solution> {
        if let Some(diag) = &self.diagonal {
            return Ok(self.solve_diagonal(diag, beta));
        }
        let mut b = Poly::zero();
        let mut rem = CokerElement::zero();
        for (n, comp) in beta.components(self.ctx.weights()) {
            let s = self.solve_degree(n, &comp)?;
            b += &s.b;
            rem.add(&s.rem);
        }
        Ok(X0Solution { b, rem })
    }

    /// Materializes a cokernel element of this solver.
    pub fn materialize(&self, rem: &CokerElement) -> Poly {
        rem.materialize(&self.basis, self.ctx.h())
    }
}

/// Recognises `X0 = αx∂x + βy∂y` whose kernel ring is generated by a single
/// monomial `g` with `h` a constant multiple of a power of `g`.
fn diagonal_structure(ctx: &QHContext) -> Option<Diagonal> {
    let x0 = ctx.x0();
    let x = Mono::new(1, 0);
    let y = Mono::new(0, 1);
    let diag_p = x0.p.terms().all(|(m, _)| *m == x);
    let diag_q = x0.q.terms().all(|(m, _)| *m == y);
    if !diag_p || !diag_q {
        return None;
    }
    let alpha = x0.p.coeff(x);
    let beta = x0.q.coeff(y);
    let generator = if alpha.is_zero() {
        Mono::new(1, 0)
    } else if beta.is_zero() {
        Mono::new(0, 1)
    } else {
        // α·ex + β·ey = 0 with ex, ey > 0 needs opposite signs
        if alpha.is_positive() == beta.is_positive() {
            return None;
        }
        let r = (-&beta / &alpha).abs(); // ex / ey
        let ex = r.numer().clone();
        let ey = r.denom().clone();
        let ex: u32 = ex.try_into().ok()?;
        let ey: u32 = ey.try_into().ok()?;
        Mono::new(ex, ey)
    };
    let h = ctx.h();
    if h.len() != 1 {
        return None;
    }
    let (hm, hc) = h.terms().next().map(|(m, c)| (*m, c.clone()))?;
    let power = if generator.ex > 0 { hm.ex / generator.ex } else { hm.ey / generator.ey };
    if power == 0 || Mono::new(generator.ex * power, generator.ey * power) != hm {
        return None;
    }
    Some(Diagonal { alpha, beta, generator, power, scale: hc })
}

/// Which unknown the joint solve of the division lemma prefers to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DivisionPreference {
    /// Columns of `X0(b)` first: `a` is reduced as far as possible.
    #[default]
    PreferB,
    /// Columns of `a·h` first.
    PreferA,
}

/// Writes `f ∈ (h_x, h_y)` as `a·h + X0(b)`, degree by degree.
pub fn division_lemma(f: &Poly, ctx: &QHContext) -> Result<(Poly, Poly)> {
    division_lemma_with(f, ctx, DivisionPreference::PreferB)
}

pub fn division_lemma_with(f: &Poly, ctx: &QHContext, pref: DivisionPreference) -> Result<(Poly, Poly)> {
    let w = ctx.weights();
    if !w.is_positive() {
        return Err(Error::Unsupported("the division lemma needs positive weights".into()));
    }
    let delta = ctx.delta() as i64;
    let mut a = Poly::zero();
    let mut b = Poly::zero();
    for (n, comp) in f.components(w) {
        let target = w.slice_monomials(n);
        let rhs = coords(&comp, &target);
        let gens = milnor::jacobian_generators(w, ctx.h(), n);
        let gen_cols: Vec<Vec<Q>> = gens.iter().map(|g| coords(g, &target)).collect();
        if Echelon::from_columns(&gen_cols, target.len()).solve(&rhs).is_none() {
            return Err(Error::NotInJacobianIdeal { degree: n });
        }
        let b_src = slice_or_empty(w, n as i64 - ctx.delta0());
        let a_src = slice_or_empty(w, n as i64 - delta);
        let b_cols: Vec<Vec<Q>> = b_src
            .iter()
            .map(|m| coords(&ctx.x0_apply(&Poly::monomial(Q::one(), *m)), &target))
            .collect();
        let a_cols: Vec<Vec<Q>> = a_src
            .iter()
            .map(|m| coords(&ctx.h().mul_mono(&Q::one(), *m), &target))
            .collect();
        let (first, second) = match pref {
            DivisionPreference::PreferB => (&b_cols, &a_cols),
            DivisionPreference::PreferA => (&a_cols, &b_cols),
        };
        let columns: Vec<Vec<Q>> = first.iter().chain(second.iter()).cloned().collect();
        let sol = Echelon::from_columns(&columns, target.len())
            .solve(&rhs)
            .ok_or(Error::StructureFailure { degree: n })?;
        let (sb, sa) = match pref {
            DivisionPreference::PreferB => (&sol[..b_cols.len()], &sol[b_cols.len()..]),
            DivisionPreference::PreferA => (&sol[a_cols.len()..], &sol[..a_cols.len()]),
        };
        for (m, c) in b_src.iter().zip(sb) {
            b.add_term(*m, c.clone());
        }
        for (m, c) in a_src.iter().zip(sa) {
            a.add_term(*m, c.clone());
        }
    }
    Ok((a, b))
}

fn slice_or_empty(w: &Weights, deg: i64) -> Vec<Mono> {
    if deg < 0 {
        Vec::new()
    } else {
        w.slice_monomials(deg as u32)
    }
}

/// `∇(a_i h^j) = ((jδ + pdeg a_i) / δ)·a_i h^(j−1)`.
pub fn connection_apply(elem: &CokerElement, basis: &CokerBasis) -> Result<CokerElement> {
    let mut out = CokerElement::zero();
    for ((i, j), c) in &elem.coeffs {
        if *j == 0 {
            return Err(Error::Precondition(format!(
                "∇ needs elements divisible by h; term a_{} h^0 present",
                i + 1
            )));
        }
        let factor = Q::new(
            (*j as i64 * basis.delta as i64 + basis.degrees[*i] as i64).into(),
            (basis.delta as i64).into(),
        );
        out.add_term(*i, j - 1, c * factor);
    }
    if !elem.free.is_zero() {
        return Err(Error::Precondition("∇ is only defined on structured elements".into()));
    }
    Ok(out)
}

/// Kernel of `X0` on the degree-`m` slice.
pub fn kernel_slice(m: u32, ctx: &QHContext) -> Result<Vec<Poly>> {
    let w = ctx.weights();
    if !w.is_positive() {
        return Err(Error::Unsupported("kernel slices need positive weights".into()));
    }
    let source = w.slice_monomials(m);
    let tdeg = m as i64 + ctx.delta0();
    let target = slice_or_empty(w, tdeg);
    let columns: Vec<Vec<Q>> = source
        .iter()
        .map(|mono| coords(&ctx.x0_apply(&Poly::monomial(Q::one(), *mono)), &target))
        .collect();
    if target.is_empty() {
        return Ok(source.iter().map(|mono| Poly::monomial(Q::one(), *mono)).collect());
    }
    let ech = Echelon::from_columns(&columns, target.len());
    Ok(ech
        .nullspace()
        .into_iter()
        .map(|v| Poly::from_terms(source.iter().copied().zip(v)))
        .collect())
}
