mod common;

use common::*;
use num_traits::Zero;
use qhnf::grading::{q, qi, Mono, Poly, Q};
use qhnf::homological::{
    division_lemma, division_lemma_with, kernel_slice, DivisionPreference, HomologicalSolver,
};
use qhnf::linalg::Echelon;
use qhnf::logfields::QHContext;

/// Rank of `X0` from the degree-`m` slice to the degree-`(m + δ0)` slice,
/// computed from scratch.
fn brute_rank(ctx: &QHContext, m: u32) -> usize {
    let w = ctx.weights();
    let src = w.slice_monomials(m);
    let tgt = w.slice_monomials((m as i64 + ctx.delta0()) as u32);
    if src.is_empty() || tgt.is_empty() {
        return 0;
    }
    let rows: Vec<Vec<Q>> = tgt
        .iter()
        .map(|t| {
            src.iter()
                .map(|s| ctx.x0_apply(&Poly::monomial(qi(1), *s)).coeff(*t))
                .collect()
        })
        .collect();
    Echelon::new(rows, src.len()).rank()
}

#[test]
fn cokernel_dimension_matches_structured_count() {
    for ctx in [cusp(48), cusp_pq(3, 4, 40), cusp_pq(2, 5, 40)] {
        let solver = HomologicalSolver::new(&ctx).unwrap();
        let basis = solver.basis().clone();
        let delta = ctx.delta();
        for m in 0..=40u32 {
            let n = m as i64 + ctx.delta0();
            let dim = ctx.weights().slice_dim(n as u32);
            let count = basis
                .degrees
                .iter()
                .filter(|&&d| (n - d as i64) >= 0 && (n - d as i64) % delta as i64 == 0)
                .count();
            assert_eq!(dim - brute_rank(&ctx, m), count, "degree {m}");
        }
    }
}

#[test]
fn reconstruction_on_random_inputs() {
    for ctx in [cusp(20), cusp_pq(3, 5, 30), poincare_dulac(2, 3, 20), saddle_node(12)] {
        let solver = HomologicalSolver::new(&ctx).unwrap();
        let mut r = rng(11);
        for _ in 0..10 {
            let beta = if ctx.weights().is_positive() {
                random_poly(&mut r, ctx.weights(), 0, ctx.truncation(), 0.4)
            } else {
                p("x^3 + 2*x*y - 1/2*x^2*y^3 + 5*y^4 + 7")
            };
            let sol = solver.solve(&beta).unwrap();
            assert_eq!(&ctx.x0_apply(&sol.b) + &solver.materialize(&sol.rem), beta);
            let lowest = beta.porder(ctx.weights()).unwrap_or(0) as i64;
            if let Some(ob) = sol.b.porder(ctx.weights()) {
                assert!(ob as i64 >= lowest - ctx.delta0());
            }
        }
    }
}

#[test]
fn operator_identity() {
    let ctx = cusp(20);
    let w = ctx.weights();
    let d0 = qi(ctx.delta0());
    let mut r = rng(12);
    for _ in 0..20 {
        let f = random_poly(&mut r, w, 0, 16, 0.5);
        for c in [q(0, 1), q(1, 2), q(-7, 3), qi(5), q(-1, 6)] {
            let lhs = ctx.x0_apply(&f).radial_shift(w, &c);
            let rhs = ctx.x0_apply(&f.radial_shift(w, &(&c + &d0)));
            assert_eq!(lhs, rhs);
        }
    }
}

#[test]
fn kernel_is_generated_by_h() {
    let ctx = cusp(36);
    for m in 0..=36u32 {
        let k = kernel_slice(m, &ctx).unwrap();
        if m % ctx.delta() == 0 {
            assert_eq!(k.len(), 1);
            let hp = ctx.h().pow(m / ctx.delta());
            let lead = hp.canonical_terms(ctx.weights())[0].clone();
            let scale = &lead.1 / k[0].coeff(lead.0);
            assert_eq!(k[0].scale(&scale), hp);
        } else {
            assert!(k.is_empty(), "degree {m}");
        }
    }
}

/// The route through the divergence: write `f = u h_x + v h_y`, remove the
/// divergence of `X = u∂x + v∂y` with `α = (R + p1 + p2)^(−1) div X`, then
/// integrate the divergence-free rest into a stream function.
fn constructive_division(f: &Poly, ctx: &QHContext) -> (Poly, Poly) {
    let w = ctx.weights();
    let (hx, hy) = (ctx.h().deriv_x(), ctx.h().deriv_y());
    let mut u = Poly::zero();
    let mut v = Poly::zero();
    for (n, comp) in f.components(w) {
        let gens_x: Vec<Mono> = if n + w.p1() >= ctx.delta() { w.slice_monomials(n + w.p1() - ctx.delta()) } else { vec![] };
        let gens_y: Vec<Mono> = if n + w.p2() >= ctx.delta() { w.slice_monomials(n + w.p2() - ctx.delta()) } else { vec![] };
        let target = w.slice_monomials(n);
        let cols: Vec<Vec<Q>> = gens_x
            .iter()
            .map(|m| hx.mul_mono(&qi(1), *m))
            .chain(gens_y.iter().map(|m| hy.mul_mono(&qi(1), *m)))
            .map(|g| target.iter().map(|t| g.coeff(*t)).collect())
            .collect();
        let rhs: Vec<Q> = target.iter().map(|t| comp.coeff(*t)).collect();
        let sol = Echelon::from_columns(&cols, target.len()).solve(&rhs).unwrap();
        for (m, c) in gens_x.iter().zip(&sol) {
            u.add_term(*m, c.clone());
        }
        for (m, c) in gens_y.iter().zip(&sol[gens_x.len()..]) {
            v.add_term(*m, c.clone());
        }
    }
    let div = &u.deriv_x() + &v.deriv_y();
    let p_sum = qi((w.p1() + w.p2()) as i64);
    let alpha = Poly::from_terms(div.terms().map(|(m, c)| (*m, c / (qi(w.pdeg(*m) as i64) + &p_sum))));
    let yp = &u - &alpha.scale(&qi(w.p1() as i64)).mul_mono(&qi(1), Mono::new(1, 0));
    let yq = &v - &alpha.scale(&qi(w.p2() as i64)).mul_mono(&qi(1), Mono::new(0, 1));
    // Y = s_y ∂x − s_x ∂y
    let s1 = Poly::from_terms(yp.terms().map(|(m, c)| (Mono::new(m.ex, m.ey + 1), c / qi(m.ey as i64 + 1))));
    let rest = &(-&yq) - &s1.deriv_x();
    assert!(rest.terms().all(|(m, _)| m.ey == 0), "rest depends only on x");
    let s2 = Poly::from_terms(rest.terms().map(|(m, c)| (Mono::new(m.ex + 1, 0), c / qi(m.ex as i64 + 1))));
    let stream = &s1 + &s2;
    // Y(h) = s_y h_x − s_x h_y = −δ·X0(s)
    let a = alpha.scale(&qi(ctx.delta() as i64));
    let b = stream.scale(&-qi(ctx.delta() as i64));
    (a, b)
}

#[test]
fn division_lemma_against_constructive_route() {
    for ctx in [cusp(24), cusp_pq(3, 4, 30)] {
        let solver = HomologicalSolver::new(&ctx).unwrap();
        let w = ctx.weights();
        let mut r = rng(13);
        for _ in 0..10 {
            let u = random_poly(&mut r, w, 0, 8, 0.5);
            let v = random_poly(&mut r, w, 0, 8, 0.5);
            let f = &(&u * &ctx.h().deriv_x()) + &(&v * &ctx.h().deriv_y());
            let (a, b) = division_lemma(&f, &ctx).unwrap();
            assert_eq!(&(&a * ctx.h()) + &ctx.x0_apply(&b), f);
            let (a2, b2) = division_lemma_with(&f, &ctx, DivisionPreference::PreferA).unwrap();
            assert_eq!(&(&a2 * ctx.h()) + &ctx.x0_apply(&b2), f);
            let (a3, b3) = constructive_division(&f, &ctx);
            assert_eq!(&(&a3 * ctx.h()) + &ctx.x0_apply(&b3), f);
            for other in [&a2, &a3] {
                let diff = &a - other;
                assert!(solver.solve(&diff).unwrap().rem.is_zero());
            }
        }
    }
}

#[test]
fn solver_examples() {
    let ctx = cusp(12);
    let solver = HomologicalSolver::new(&ctx).unwrap();
    let s = solver.solve(&p("y")).unwrap();
    assert_eq!(s.b, p("3*x"));
    let ctx = poincare_dulac(1, 1, 12);
    let solver = HomologicalSolver::new(&ctx).unwrap();
    let s = solver.solve(&p("x^3*y^3")).unwrap();
    assert!(s.b.is_zero());
    assert_eq!(s.rem.coeff(0, 3), qi(1));
    assert!(Q::zero().is_zero());
}
