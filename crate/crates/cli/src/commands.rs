//! The three subcommands as library functions returning their reports.

use std::fmt::Write as _;

use qhnf::finalred::{extend_script, field_final_reduce, final_reduce, FinalOutcome};
use qhnf::grading::format_univariate;
use qhnf::milnor::{is_isolated_of, milnor_basis_of};
use qhnf::prenorm::{prenormalize_field, prenormalize_foliation, verify_conjugacy, ConjugationScript, NormalForm};
use qhnf::{q, Series};

use crate::certificate::{Certificate, Status};
use crate::problem::{Pipeline, Problem};
use crate::CliError;

/// Command-line overrides of the problem file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub truncation: Option<u32>,
    /// 1-based.
    pub pick: Option<usize>,
    pub pipeline: Option<Pipeline>,
}

/// Milnor number, monomial basis, exponents `r_i = pdeg(a_i)/δ` and the
/// isolation verdict.
pub fn cmd_cokernel(problem: &Problem) -> Result<String, CliError> {
    let w = &problem.weights;
    if !w.is_positive() {
        return Err(CliError::Usage(format!(
            "the Milnor algebra is graded only for positive weights, got ({}, {})",
            w.p1(),
            w.p2()
        )));
    }
    let basis = milnor_basis_of(w, &problem.h)?;
    let names: Vec<String> = basis.monomials.iter().map(|m| m.to_string()).collect();
    let exps: Vec<String> = basis.degrees.iter().map(|&d| q(d as i64, basis.delta as i64).to_string()).collect();
    let mut out = String::new();
    writeln!(out, "mu={}; basis={}", basis.mu(), names.join(",")).unwrap();
    writeln!(out, "degrees={}", exps.join(",")).unwrap();
    writeln!(out, "isolated={}", if is_isolated_of(w, &problem.h) { "yes" } else { "no" }).unwrap();
    Ok(out)
}

pub struct Normalized {
    pub certificate: Certificate,
    pub status: Status,
    pub report: String,
}

/// Prenormalization followed by the final reduction. The result is checked
/// with [`verify_conjugacy`] before it is returned.
pub fn cmd_normalize(problem: &Problem, ov: &Overrides) -> Result<Normalized, CliError> {
    let pipeline = ov.pipeline.unwrap_or(problem.pipeline);
    let k = ov.truncation.unwrap_or(problem.truncation);
    if k == 0 {
        return Err(CliError::Usage("truncation must be positive".into()));
    }
    let pick = match ov.pick.or(problem.pick) {
        Some(0) => return Err(CliError::Usage("basis indices start at 1".into())),
        Some(i) => Some(i - 1),
        None => None,
    };
    let ctx = problem.context(k)?;
    let x = problem.field()?;
    let (nf, script) = match pipeline {
        Pipeline::Cokernel => {
            return Err(CliError::Usage("normalize needs the foliation or field pipeline".into()));
        }
        Pipeline::Foliation => {
            let (nf, script) = prenormalize_foliation(x, &ctx)?;
            match final_reduce(&nf, pick, &ctx)? {
                FinalOutcome::Integrable => (nf, script),
                FinalOutcome::Reduced(red) => {
                    let full = extend_script(&script, &nf, &red, &ctx)?;
                    (red.nf, full)
                }
            }
        }
        Pipeline::Field => {
            if pick.is_some_and(|i| i != 0) {
                return Err(CliError::Usage("the field pipeline reduces the only coefficient; drop `pick`".into()));
            }
            let (nf, script) = prenormalize_field(x, &ctx)?;
            let red = field_final_reduce(&nf, &ctx)?;
            let mut generators = script.generators;
            generators.extend(red.generators);
            let fibered = generators.iter().all(|g| ConjugationScript::radial_coefficient(g, ctx.weights()).is_some());
            (red.nf, ConjugationScript { generators, unit: script.unit, fibered })
        }
    };
    if let Err(m) = verify_conjugacy(x, &script, &nf, &ctx, k as i64) {
        return Err(CliError::Verification(format!("internal check of the computed script: {m}")));
    }
    let status = match &nf.finalized {
        None => Status::Integrable,
        Some(f) if f.lambda == qhnf::qi(0) => Status::ReducedLambdaZero,
        Some(_) => Status::Reduced,
    };
    let certificate = Certificate::new(pipeline, &ctx, &nf, &script, status);
    let report = normalize_report(pipeline, &nf, &script, status, k);
    Ok(Normalized { certificate, status, report })
}

fn series(s: &Series) -> String {
    format!("{} + O(h^{})", format_univariate(s.coeffs(), "h"), s.prec() + 1)
}

fn normalize_report(pipeline: Pipeline, nf: &NormalForm, script: &ConjugationScript, status: Status, k: u32) -> String {
    let mut out = String::new();
    writeln!(out, "pipeline={pipeline}").unwrap();
    writeln!(out, "truncation={k}").unwrap();
    writeln!(out, "status={}", status.as_str()).unwrap();
    for (i, d) in nf.d.iter().enumerate() {
        writeln!(out, "d{} [a{} = {}] = {}", i + 1, i + 1, nf.basis.monomials[i], series(d)).unwrap();
    }
    if let Some(fp) = &nf.field_part {
        for (i, a) in fp.iter().enumerate() {
            writeln!(out, "alpha{} [a{} = {}] = {}", i + 1, i + 1, nf.basis.monomials[i], series(a)).unwrap();
        }
    }
    if let Some(f) = &nf.finalized {
        writeln!(
            out,
            "finalized: d{} = kappa*h^{}/(1 + lambda*h^{}) with kappa={}, lambda={}",
            f.index + 1,
            f.m,
            f.m + f.n,
            f.kappa,
            f.lambda
        )
        .unwrap();
    }
    writeln!(out, "generators={}; fibered={}", script.generators.len(), script.fibered).unwrap();
    writeln!(out, "verified up to degree {k}").unwrap();
    out
}

pub struct Verified {
    pub report: String,
    pub warning: Option<String>,
}

/// Exact check of a certificate against the problem's field, up to the
/// smaller of the two truncations.
pub fn cmd_verify(problem: &Problem, cert: &Certificate, ov: &Overrides) -> Result<Verified, CliError> {
    let kp = ov.truncation.unwrap_or(problem.truncation);
    let k = kp.min(cert.truncation);
    let warning = (cert.truncation != kp).then(|| {
        format!(
            "certificate truncation {} differs from the problem truncation {kp}; checking up to degree {k}",
            cert.truncation
        )
    });
    let ctx = problem.context(k)?;
    cert.matches(&ctx).map_err(CliError::Verification)?;
    let x = problem.field()?;
    let nf = cert.normal_form(&ctx)?;
    let script = cert.script()?;
    verify_conjugacy(x, &script, &nf, &ctx, k as i64).map_err(|m| CliError::Verification(m.to_string()))?;
    Ok(Verified { report: format!("verified up to degree {k}\n"), warning })
}
