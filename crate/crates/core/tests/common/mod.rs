#![allow(dead_code)]

use qhnf::grading::{Mono, Poly, Weights, Q};
use qhnf::logfields::{LogField, QHContext, VField};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn p(s: &str) -> Poly {
    s.parse().unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// Small nonzero rational.
pub fn small_q(r: &mut ChaCha8Rng) -> Q {
    loop {
        let n: i64 = r.gen_range(-5..=5);
        let d: i64 = r.gen_range(1..=4);
        if n != 0 {
            return Q::new(n.into(), d.into());
        }
    }
}

/// Random polynomial with terms in the degree range `lo..=hi`, each slice
/// monomial kept with probability `density`.
pub fn random_poly(r: &mut ChaCha8Rng, w: &Weights, lo: u32, hi: u32, density: f64) -> Poly {
    let mut out = Poly::zero();
    for d in lo..=hi {
        for m in w.slice_monomials(d) {
            if r.gen_bool(density) {
                out.add_term(m, small_q(r));
            }
        }
    }
    out
}

pub fn cusp(k: u32) -> QHContext {
    QHContext::hamiltonian(Weights::new(2, 3).unwrap(), p("y^2 - x^3"), p("y^2 - x^3"), k).unwrap()
}

pub fn cusp_pq(pp: u32, qq: u32, k: u32) -> QHContext {
    use num_integer::Integer;
    let g = pp.gcd(&qq);
    let w = Weights::new(pp / g, qq / g).unwrap();
    let h = &Poly::monomial(Q::from_integer(1.into()), Mono::new(0, pp))
        - &Poly::monomial(Q::from_integer(1.into()), Mono::new(qq, 0));
    QHContext::hamiltonian(w, h.clone(), h, k).unwrap()
}

pub fn poincare_dulac(pp: u32, qq: u32, k: u32) -> QHContext {
    let w = Weights::new(qq, pp).unwrap();
    let h = Poly::monomial(Q::from_integer(1.into()), Mono::new(pp, qq));
    QHContext::hamiltonian(w, p("x*y"), h, k).unwrap()
}

pub fn saddle_node(k: u32) -> QHContext {
    let w = Weights::new(1, 0).unwrap();
    QHContext::with_initial_field(w, p("x*y"), p("x"), VField::new(p("0"), p("y")), k).unwrap()
}

/// Random logarithmic perturbation `(1 + A)X0 + B·R` with `A` of order ≥ 1
/// and `B` of order > δ0.
pub fn random_perturbation(r: &mut ChaCha8Rng, ctx: &QHContext, density: f64) -> VField {
    let w = ctx.weights();
    let k = ctx.truncation();
    let d0 = ctx.delta0().max(0) as u32;
    let a = &Poly::one() + &random_poly(r, w, 1, k.saturating_sub(d0), density);
    let b = random_poly(r, w, d0 + 1, k, density);
    LogField::new(a, b).materialize(ctx)
}
