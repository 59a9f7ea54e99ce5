//! Jacobian ideal, Milnor number and a monomial basis of the Milnor algebra.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::grading::{Mono, Poly, Weights, Q};
use crate::linalg::Echelon;
use crate::logfields::QHContext;

/// Monomials `a_1 = 1, …, a_μ` whose classes form a basis of `O/(h_x, h_y)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CokerBasis {
    pub monomials: Vec<Mono>,
    /// `pdeg(a_i)`, so that `r_i = degrees[i] / delta`.
    pub degrees: Vec<u32>,
    pub delta: u32,
}

impl CokerBasis {
    /// The one-element basis `{1}` (cokernel `ℚ[[h]]`).
    pub fn unit(delta: u32) -> Self {
        Self { monomials: vec![Mono::ONE], degrees: vec![0], delta }
    }

    pub fn mu(&self) -> usize {
        self.monomials.len()
    }

    /// `r_i` as the exact pair `(pdeg(a_i), δ)`.
    pub fn exponent(&self, i: usize) -> (u32, u32) {
        (self.degrees[i], self.delta)
    }

    pub fn poly(&self, i: usize) -> Poly {
        Poly::monomial(Q::from_integer(1.into()), self.monomials[i])
    }
}

/// `(h_x, h_y)`.
pub fn jacobian_ideal(ctx: &QHContext) -> (Poly, Poly) {
    (ctx.h().deriv_x(), ctx.h().deriv_y())
}

/// Coordinates of the quasi-homogeneous `f` in the given slice basis.
pub(crate) fn coords(f: &Poly, monos: &[Mono]) -> Vec<Q> {
    monos.iter().map(|m| f.coeff(*m)).collect()
}

/// Degree-`m` part of the ideal `(h_x, h_y)`: the generators `h_x·u`, `h_y·v`
/// for monomials `u`, `v` of the right degrees, in canonical order.
pub(crate) fn jacobian_generators(w: &Weights, h: &Poly, m: u32) -> Vec<Poly> {
    let mut out = Vec::new();
    for g in [h.deriv_x(), h.deriv_y()] {
        let Some(dg) = g.qh_degree(w) else { continue };
        if m < dg {
            continue;
        }
        for mono in w.slice_monomials(m - dg) {
            out.push(g.mul_mono(&Q::from_integer(1.into()), mono));
        }
    }
    out
}

/// Greedy complement of the Jacobian ideal inside the degree-`m` slice.
fn complement(w: &Weights, h: &Poly, m: u32) -> Vec<Mono> {
    let slice = w.slice_monomials(m);
    if slice.is_empty() {
        return Vec::new();
    }
    let gens = jacobian_generators(w, h, m);
    let mut columns: Vec<Vec<Q>> = gens.iter().map(|g| coords(g, &slice)).collect();
    let offset = columns.len();
    for i in 0..slice.len() {
        let mut e = vec![Q::zero(); slice.len()];
        e[i] = Q::from_integer(1.into());
        columns.push(e);
    }
    let ech = Echelon::from_columns(&columns, slice.len());
    ech.pivot_columns()
        .iter()
        .filter(|&&c| c >= offset)
        .map(|&c| slice[c - offset])
        .collect()
}

/// Degree above which the Milnor algebra of an isolated quasi-homogeneous
/// singularity vanishes, `(δ − 2p1) + (δ − 2p2)`.
pub fn socle_bound(w: &Weights, delta: u32) -> i64 {
    2 * delta as i64 - 2 * (w.p1() as i64 + w.p2() as i64)
}

/// `(δ − p1)(δ − p2) / (p1 p2)` when integral.
pub fn expected_mu(w: &Weights, delta: u32) -> Option<u64> {
    let num = (delta as i64 - w.p1() as i64) * (delta as i64 - w.p2() as i64);
    let den = w.p1() as i64 * w.p2() as i64;
    (den > 0 && num >= 0 && num % den == 0).then(|| (num / den) as u64)
}

fn basis_and_tail(w: &Weights, h: &Poly) -> Result<(CokerBasis, bool)> {
    if !w.is_positive() {
        return Err(Error::NonIsolated("graded Milnor basis needs positive weights".into()));
    }
    let delta = h
        .qh_degree(w)
        .ok_or_else(|| Error::NotQuasiHomogeneous { what: "h".into() })?;
    let bound = socle_bound(w, delta);
    let mut monomials = Vec::new();
    let mut degrees = Vec::new();
    let mut tail_empty = true;
    let top = bound + (w.p1() + w.p2()) as i64;
    for m in 0..=top.max(0) {
        let comp = complement(w, h, m as u32);
        if m <= bound {
            for mono in comp {
                monomials.push(mono);
                degrees.push(m as u32);
            }
        } else if !comp.is_empty() {
            tail_empty = false;
        }
    }
    Ok((CokerBasis { monomials, degrees, delta }, tail_empty))
}

/// Whether `h` has an isolated singularity at the origin: the graded
/// complement vanishes just above the socle bound and the count matches the
/// weighted formula for `μ`.
pub fn is_isolated_of(w: &Weights, h: &Poly) -> bool {
    let Ok((basis, tail_empty)) = basis_and_tail(w, h) else {
        return false;
    };
    tail_empty && expected_mu(w, basis.delta) == Some(basis.mu() as u64) && basis.mu() > 0
}

pub fn is_isolated(ctx: &QHContext) -> bool {
    is_isolated_of(ctx.weights(), ctx.h())
}

/// Monomial basis of the Milnor algebra, chosen greedily in canonical order.
pub fn milnor_basis_of(w: &Weights, h: &Poly) -> Result<CokerBasis> {
    let (basis, tail_empty) = basis_and_tail(w, h)?;
    if basis.mu() == 0 {
        return Err(Error::Precondition("h is not singular at the origin".into()));
    }
    let expected = expected_mu(w, basis.delta);
    if !tail_empty || expected != Some(basis.mu() as u64) {
        return Err(Error::NonIsolated(format!(
            "the Milnor algebra is infinite-dimensional (graded count {} vs expected {}); \
             the structured Hamiltonian pipeline needs an isolated singularity",
            basis.mu(),
            expected.map_or("none".to_string(), |e| e.to_string())
        )));
    }
    Ok(basis)
}

pub fn milnor_basis(ctx: &QHContext) -> Result<CokerBasis> {
    milnor_basis_of(ctx.weights(), ctx.h())
}
