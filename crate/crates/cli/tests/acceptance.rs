//! Acceptance suite: one PASS/FAIL line per criterion.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use qhnf::finalred::{
    field_final_reduce, final_reduce, normalize_onevar, rational_coefficient, residue, FinalOutcome, OneVarField,
};
use qhnf::homological::{kernel_slice, HomologicalSolver};
use qhnf::linalg::Echelon;
use qhnf::logfields::{LogField, QHContext, VField};
use qhnf::milnor::milnor_basis_of;
use qhnf::prenorm::{prenormalize_field, prenormalize_foliation, verify_conjugacy, ConjugationScript};
use qhnf::{q, qi, Mono, Poly, Series, Weights, Q};
use qhnf_cli::{cmd_cokernel, cmd_normalize, cmd_verify, Certificate, Overrides, Pipeline, Problem};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn p(s: &str) -> Poly {
    s.parse().unwrap()
}

fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

fn small_q(r: &mut ChaCha8Rng) -> Q {
    loop {
        let n: i64 = r.gen_range(-9..=9);
        let d: i64 = r.gen_range(1..=6);
        if n != 0 {
            return q(n, d);
        }
    }
}

fn random_poly(r: &mut ChaCha8Rng, w: &Weights, lo: u32, hi: u32, density: f64) -> Poly {
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

/// `(1 + A)·X0 + B·R` with `A` of order ≥ 1 and `B` of order > δ0.
fn random_perturbation(r: &mut ChaCha8Rng, ctx: &QHContext, density: f64) -> VField {
    let w = ctx.weights();
    let k = ctx.truncation();
    let d0 = ctx.delta0().max(0) as u32;
    let a = &Poly::one() + &random_poly(r, w, 1, k - d0, density);
    let b = random_poly(r, w, d0 + 1, k, density);
    LogField::new(a, b).materialize(ctx)
}

fn cusp(k: u32) -> QHContext {
    QHContext::hamiltonian(Weights::new(2, 3).unwrap(), p("y^2 - x^3"), p("y^2 - x^3"), k).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:.2?}, limit {limit:?}"))
}

fn problem(ctx: &QHContext, field: VField, pipeline: Pipeline) -> Problem {
    Problem {
        weights: *ctx.weights(),
        h: ctx.h().clone(),
        h0: ctx.h0().clone(),
        x0: (!ctx.is_hamiltonian()).then(|| ctx.x0().clone()),
        field: Some(field),
        truncation: ctx.truncation(),
        pipeline,
        pick: None,
    }
}

/// Normalizes, writes the certificate to JSON, reads it back and verifies it.
fn certify(pb: &Problem) -> Result<Certificate, String> {
    let out = cmd_normalize(pb, &Overrides::default()).map_err(|e| e.to_string())?;
    let cert = Certificate::parse(&out.certificate.to_json()).map_err(|e| e.to_string())?;
    cmd_verify(pb, &cert, &Overrides::default()).map_err(|e| e.to_string())?;
    Ok(cert)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let text = r#"{"weights": [2, 3], "h": "y^2 - x^3", "truncation": 6, "pipeline": "cokernel"}"#;
    let report = cmd_cokernel(&Problem::parse(text).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    ensure(report.starts_with("mu=2; basis=1,x\n"), || format!("report was {report:?}"))?;
    within(start, Duration::from_secs(1))?;
    for (pp, qq) in [(2u32, 5u32), (3, 4), (3, 5)] {
        let h = &Poly::monomial(qi(1), Mono::new(0, pp)) - &Poly::monomial(qi(1), Mono::new(qq, 0));
        let basis = milnor_basis_of(&Weights::new(pp, qq).unwrap(), &h).map_err(|e| e.to_string())?;
        let mut got = basis.monomials.clone();
        got.sort_by_key(|m| (m.ex, m.ey));
        let mut want: Vec<Mono> =
            (0..=qq - 2).flat_map(|k| (0..=pp - 2).map(move |l| Mono::new(k, l))).collect();
        want.sort_by_key(|m| (m.ex, m.ey));
        ensure(got == want, || format!("(p, q) = ({pp}, {qq}): basis {got:?}"))?;
        ensure(basis.mu() as u32 == (pp - 1) * (qq - 1), || format!("(p, q) = ({pp}, {qq}): mu {}", basis.mu()))?;
    }
    Ok(format!("cusp mu=2 basis {{1, x}} in {:.2?}; (2,5) (3,4) (3,5) ranges match", start.elapsed()))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let ctx = cusp(46);
    let solver = HomologicalSolver::new(&ctx).map_err(|e| e.to_string())?;
    let basis = solver.basis().clone();
    let w = ctx.weights();
    let d0 = ctx.delta0();
    let delta = ctx.delta() as i64;
    for m in 0..=40u32 {
        let n = m as i64 + d0;
        let src = w.slice_monomials(m);
        let tgt = w.slice_monomials(n as u32);
        let rank = if src.is_empty() || tgt.is_empty() {
            0
        } else {
            let rows: Vec<Vec<Q>> = tgt
                .iter()
                .map(|t| src.iter().map(|s| ctx.x0_apply(&Poly::monomial(qi(1), *s)).coeff(*t)).collect())
                .collect();
            Echelon::new(rows, src.len()).rank()
        };
        let count = basis
            .degrees
            .iter()
            .filter(|&&d| n >= d as i64 && (n - d as i64) % delta == 0)
            .count();
        let coker = tgt.len() - rank;
        ensure(coker == count, || format!("degree {m}: cokernel dimension {coker}, structured count {count}"))?;
    }
    within(start, Duration::from_secs(10))?;
    Ok(format!("degrees 0..=40 match in {:.2?}", start.elapsed()))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let k = 24u32;
    let ctx = cusp(k);
    let mut r = rng(3);
    let mut gens = 0usize;
    for trial in 0..100 {
        let density = r.gen_range(0.1..0.6);
        let x = random_perturbation(&mut r, &ctx, density);
        let (nf, script) = prenormalize_foliation(&x, &ctx).map_err(|e| format!("trial {trial}: {e}"))?;
        verify_conjugacy(&x, &script, &nf, &ctx, k as i64).map_err(|m| format!("trial {trial}: {m}"))?;
        for g in &script.generators {
            ensure(ConjugationScript::radial_coefficient(g, ctx.weights()).is_some(), || {
                format!("trial {trial}: generator {g} is not a multiple of R")
            })?;
        }
        gens += script.generators.len();
    }
    within(start, Duration::from_secs(120))?;
    Ok(format!("100 perturbations at K=24 verified exactly, {gens} radial generators, {:.2?}", start.elapsed()))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let k = 24u32;
    for (pp, qq) in [(1u32, 1u32), (1, 2), (2, 3)] {
        let w = Weights::new(qq, pp).unwrap();
        let h = Poly::monomial(qi(1), Mono::new(pp, qq));
        let ctx = QHContext::hamiltonian(w, p("x*y"), h, k).map_err(|e| e.to_string())?;
        let expected_x0 = VField::new(
            Poly::monomial(q(qq as i64, 2 * (pp * qq) as i64), Mono::new(1, 0)),
            Poly::monomial(q(-(pp as i64), 2 * (pp * qq) as i64), Mono::new(0, 1)),
        );
        ensure(*ctx.x0() == expected_x0, || format!("({pp}, {qq}): X0 = {}", ctx.x0()))?;
        let mut r = rng(40 + (pp * 10 + qq) as u64);
        let x = random_perturbation(&mut r, &ctx, 0.5);

        let (nf, script) = prenormalize_foliation(&x, &ctx).map_err(|e| e.to_string())?;
        verify_conjugacy(&x, &script, &nf, &ctx, k as i64).map_err(|m| m.to_string())?;
        ensure(nf.basis.monomials == vec![Mono::ONE], || format!("({pp}, {qq}): basis {:?}", nf.basis.monomials))?;
        // X0 + d(h)·R computed independently
        let mut d_of_h = Poly::zero();
        for (j, c) in nf.d[0].coeffs().iter().enumerate() {
            d_of_h += &ctx.h().pow(j as u32).scale(c);
        }
        let direct = ctx.x0() + &ctx.radial().mul_fn(&d_of_h);
        ensure(nf.materialize(&ctx) == direct, || format!("({pp}, {qq}): prenormal form leaves span{{h^j R}}"))?;

        let cert = certify(&problem(&ctx, x.clone(), Pipeline::Field))?;
        let red = field_final_reduce(&prenormalize_field(&x, &ctx).map_err(|e| e.to_string())?.0, &ctx)
            .map_err(|e| e.to_string())?;
        let Some(fin) = &red.nf.finalized else {
            return Err(format!("({pp}, {qq}): random perturbation came out integrable"));
        };
        ensure(fin.n == 0, || format!("({pp}, {qq}): n = {}", fin.n))?;
        let d = &red.nf.d[0];
        ensure(*d == rational_coefficient(&fin.kappa, fin.m, &fin.lambda, fin.m, d.prec()), || {
            format!("({pp}, {qq}): R coefficient {d} is not kappa h^m/(1 + lambda h^m)")
        })?;
        let alpha = &red.nf.field_part.as_ref().unwrap()[0];
        ensure(alpha.coeffs().iter().skip(fin.m as usize + 1).all(|c| *c == qi(0)), || {
            format!("({pp}, {qq}): X0 coefficient {alpha} exceeds degree m = {}", fin.m)
        })?;
        ensure(cert.normal_form.finalized.is_some(), || "certificate lacks the final record".into())?;
    }
    Ok(format!("(1,1) (1,2) (2,3): supported on h^j R, field shape certified, {:.2?}", start.elapsed()))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let k = 20u32;
    let ctx = QHContext::with_initial_field(
        Weights::new(1, 0).unwrap(),
        p("x*y"),
        p("x"),
        VField::new(p("0"), p("y")),
        k,
    )
    .map_err(|e| e.to_string())?;
    let mut r = rng(5);
    let mut results = Vec::new();
    for trial in 0..5 {
        let mut dx = p("x^2");
        let mut dy = p("y");
        for a in 2..=8u32 {
            for b in 0..=2u32 {
                if r.gen_bool(0.4) {
                    dx.add_term(Mono::new(a + 1, b), small_q(&mut r));
                }
                if r.gen_bool(0.4) {
                    dy.add_term(Mono::new(a - 1, b + 1), small_q(&mut r));
                }
            }
        }
        let x = VField::new(dx, dy);
        let cert = certify(&problem(&ctx, x.clone(), Pipeline::Field)).map_err(|e| format!("trial {trial}: {e}"))?;
        let nf = cert.normal_form(&ctx).map_err(|e| e.to_string())?;
        let fin = nf.finalized.clone().ok_or("no final record")?;
        ensure(fin.m == 1 && fin.n == 0 && fin.kappa == qi(1), || format!("trial {trial}: {fin:?}"))?;
        let d = &nf.d[0];
        ensure(*d == rational_coefficient(&fin.kappa, fin.m, &fin.lambda, fin.m, d.prec()), || {
            format!("trial {trial}: d = {d}")
        })?;
        let alpha = &nf.field_part.as_ref().unwrap()[0];
        ensure(alpha.coeffs().iter().skip(fin.m as usize + 1).all(|c| *c == qi(0)), || {
            format!("trial {trial}: y-coefficient {alpha} is not a polynomial of degree m")
        })?;
        // P_m(x) y∂y + x^(m+1)/(1 + λx^m) ∂x, written out
        let nfv = nf.materialize(&ctx);
        let mut dxx = Poly::zero();
        for (j, c) in d.coeffs().iter().enumerate() {
            dxx.add_term(Mono::new(j as u32 + 1, 0), c.clone());
        }
        ensure(nfv.p == dxx, || format!("trial {trial}: ∂x component {}", nfv.p))?;
        results.push(fin.lambda.to_string());
    }
    Ok(format!("5 seeded fields certified at K=20, lambda = [{}], {:.2?}", results.join(", "), start.elapsed()))
}

/// First `n + 1` coefficients of `1/u` by the recurrence
/// `w_k = −(u_1 w_(k−1) + … + u_k w_0) / u_0`.
fn invert(u: &[Q], n: usize) -> Vec<Q> {
    let mut w: Vec<Q> = vec![qi(1) / &u[0]];
    for k in 1..=n {
        let mut s = qi(0);
        for j in 1..=k.min(u.len() - 1) {
            s += &u[j] * &w[k - j];
        }
        w.push(-s / &u[0]);
    }
    w
}

/// `φ'(ψ)·v(ψ)` with `ψ = φ^(−1)`.
fn push_forward(v: &Series, phi: &Series) -> Series {
    let psi = phi.reversion();
    phi.derivative().compose(&psi).mul(&v.compose(&psi))
}

fn criterion_6() -> Outcome {
    let mut r = rng(6);
    let prec = 12;
    for _ in 0..20 {
        let c = small_q(&mut r);
        // z²(1 + cz); 1/(1 + cz) = Σ (−c)^k z^k, so the z^(−1) coefficient of dz/v is −c
        let u = Series::from_coeffs(vec![qi(1), c.clone()], prec);
        let v = OneVarField::new(1, 2, u).map_err(|e| e.to_string())?;
        let inv = invert(&[qi(1), c.clone()], 1);
        ensure(inv[1] == -&c, || format!("oracle for c = {c}: {}", inv[1]))?;
        ensure(residue(&v) == Some(inv[1].clone()), || format!("residue for c = {c}: {:?}", residue(&v)))?;
    }
    for trial in 0..20 {
        let n = r.gen_range(2..=4usize);
        let mut coeffs = vec![Q::from_integer(0.into()); n];
        coeffs.push(small_q(&mut r));
        for _ in 0..8 {
            coeffs.push(if r.gen_bool(0.7) { small_q(&mut r) } else { qi(0) });
        }
        let f = Series::from_coeffs(coeffs, n + 8);
        let mut phi_c = vec![qi(0), qi(1)];
        for _ in 2..=n + 8 {
            phi_c.push(small_q(&mut r));
        }
        let phi = Series::from_coeffs(phi_c, n + 8);
        let g = push_forward(&f, &phi);
        let (v, vg) = (OneVarField::from_series(&f, 1).unwrap(), OneVarField::from_series(&g, 1).unwrap());
        ensure(residue(&v).is_some() && residue(&v) == residue(&vg), || {
            format!("trial {trial}: residue {:?} vs {:?}", residue(&v), residue(&vg))
        })?;
        let norm = normalize_onevar(&v, v.top()).map_err(|e| e.to_string())?;
        let again = normalize_onevar(&norm.normal, norm.normal.top()).map_err(|e| e.to_string())?;
        ensure(again.normal == norm.normal && again.generators.is_empty(), || {
            format!("trial {trial}: normalization is not idempotent")
        })?;
    }
    Ok("residue oracle on 20 c, invariance under 20 gauges, idempotent".into())
}

fn criterion_7() -> Outcome {
    let ctx = cusp(24);
    let mut r = rng(7);
    let mut checked = 0;
    for trial in 0..20 {
        let x = random_perturbation(&mut r, &ctx, 0.4);
        let (nf, _) = prenormalize_foliation(&x, &ctx).map_err(|e| e.to_string())?;
        for i in 0..nf.d.len() {
            let qi_ = nf.basis.degrees[i] as i64 - ctx.delta0();
            if qi_.rem_euclid(ctx.delta() as i64) == 0 || nf.d[i].is_zero() {
                continue;
            }
            let FinalOutcome::Reduced(red) = final_reduce(&nf, Some(i), &ctx).map_err(|e| e.to_string())? else {
                return Err(format!("trial {trial}: index {} reported integrable", i + 1));
            };
            let fin = red.nf.finalized.unwrap();
            ensure(fin.lambda == qi(0) && red.lambda_forced_zero, || {
                format!("trial {trial}, index {}: lambda = {}", i + 1, fin.lambda)
            })?;
            checked += 1;
        }
    }
    ensure(checked >= 20, || format!("only {checked} reductions exercised"))?;
    Ok(format!("{checked} reductions with δ ∤ q_i, all lambda = 0"))
}

fn criterion_8() -> Outcome {
    let ctx = cusp(24);
    let w = ctx.weights();
    let d0 = qi(ctx.delta0());
    let mut r = rng(8);
    let cs = [q(0, 1), q(1, 3), q(-5, 2), qi(7), q(-2, 9)];
    for i in 0..50 {
        let f = random_poly(&mut r, w, 0, 18, 0.5);
        for c in &cs {
            let lhs = ctx.x0_apply(&f).radial_shift(w, c);
            let rhs = ctx.x0_apply(&f.radial_shift(w, &(c + &d0)));
            ensure(lhs == rhs, || format!("polynomial {i}, c = {c}"))?;
        }
    }
    Ok("50 polynomials x 5 constants, exact".into())
}

fn criterion_9() -> Outcome {
    let ctx = cusp(36);
    for m in 0..=36u32 {
        let k = kernel_slice(m, &ctx).map_err(|e| e.to_string())?;
        if m % ctx.delta() != 0 {
            ensure(k.is_empty(), || format!("degree {m}: kernel of dimension {}", k.len()))?;
            continue;
        }
        ensure(k.len() == 1, || format!("degree {m}: kernel of dimension {}", k.len()))?;
        let hp = ctx.h().pow(m / ctx.delta());
        let (mono, c) = hp.canonical_terms(ctx.weights())[0].clone();
        let scaled = k[0].scale(&(&c / k[0].coeff(mono)));
        ensure(scaled == hp, || format!("degree {m}: kernel spanned by {}", k[0]))?;
    }
    Ok("m = 0..=36".into())
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let problems = [
        r#"{"weights": [2, 3], "h": "y^2 - x^3", "field": {"dx": "1/3*y + 2*x*y^2 - 2*x^4 + 2*x^2*y - 5/7*x*y", "dy": "1/2*x^2 + 3*y^3 - 3*x^3*y + 3*x*y^2 - 15/14*x^3"}, "truncation": 20, "pipeline": "foliation"}"#,
        r#"{"weights": [1, 0], "h": "x", "h0": "x*y", "x0": {"dx": "0", "dy": "y"}, "field": {"dx": "x^2 + 3*x^3*y - x^4", "dy": "y + 2/3*x*y + x^2*y^2"}, "truncation": 16, "pipeline": "field"}"#,
        r#"{"weights": [3, 2], "h": "x^2*y^3", "h0": "x*y", "field": {"dx": "1/4*x + x^3*y^3 - 2*x^5*y^6", "dy": "-1/6*y + 2*x^2*y^4"}, "truncation": 30, "pipeline": "field"}"#,
    ];
    for (i, text) in problems.iter().enumerate() {
        let input = dir.path().join(format!("p{i}.json"));
        std::fs::write(&input, text).map_err(|e| e.to_string())?;
        let mut outputs = Vec::new();
        for run in 0..2 {
            let cert = dir.path().join(format!("p{i}-{run}.cert.json"));
            let out = Command::new(env!("CARGO_BIN_EXE_qhnf"))
                .args(["normalize", "--input", input.to_str().unwrap(), "--emit-certificate", cert.to_str().unwrap()])
                .output()
                .map_err(|e| e.to_string())?;
            let bytes = std::fs::read(&cert).map_err(|e| format!("problem {i}: no certificate ({e}); {}", String::from_utf8_lossy(&out.stderr)))?;
            outputs.push((bytes, out.stdout));
        }
        ensure(outputs[0] == outputs[1], || format!("problem {i}: runs differ"))?;
    }
    Ok("3 problems, certificates and reports byte-identical across runs".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("cusp Milnor data", criterion_1),
        ("cokernel structure oracle", criterion_2),
        ("conjugacy round trip", criterion_3),
        ("Poincaré-Dulac shapes", criterion_4),
        ("saddle-node Bruno form", criterion_5),
        ("residue properties", criterion_6),
        ("lambda vanishing", criterion_7),
        ("operator identity", criterion_8),
        ("kernel structure", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match res {
            Ok(detail) => println!("PASS criterion {:>2} ({name}): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {:>2} ({name}): {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
