//! Certificates: the normal form and the conjugation script in text form.

use qhnf::grading::{format_univariate, parse_univariate};
use qhnf::logfields::{QHContext, VField};
use qhnf::milnor::CokerBasis;
use qhnf::prenorm::{ConjugationScript, Finalized, NormalForm};
use qhnf::{Poly, Series, Q};
use serde::{Deserialize, Serialize};

use crate::problem::{FieldText, Pipeline};
use crate::CliError;

pub const FORMAT_VERSION: u32 = 1;

/// Outcome of a normalization run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    /// One coefficient reduced, `λ ≠ 0`.
    Reduced,
    /// One coefficient reduced, `λ = 0`.
    ReducedLambdaZero,
    /// Every dissipative coefficient vanishes up to the truncation.
    Integrable,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Reduced => "reduced",
            Status::ReducedLambdaZero => "reduced-lambda-zero",
            Status::Integrable => "integrable",
        }
    }
}

/// A power series in `h` with its precision (coefficients up to `h^prec`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesText {
    pub series: String,
    pub prec: usize,
}

impl SeriesText {
    fn of(s: &Series) -> Self {
        Self { series: format_univariate(s.coeffs(), "h"), prec: s.prec() }
    }

    fn parse(&self) -> Result<Series, CliError> {
        let coeffs = parse_univariate(&self.series, "h").map_err(|e| cert_err(format!("series `{}`: {e}", self.series)))?;
        if coeffs.len() > self.prec + 1 {
            return Err(cert_err(format!("series `{}` exceeds its precision {}", self.series, self.prec)));
        }
        Ok(Series::from_coeffs(coeffs, self.prec))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinalizedText {
    /// 1-based basis index.
    pub index: usize,
    pub m: u32,
    pub n: u32,
    pub kappa: String,
    pub lambda: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalFormText {
    pub basis: Vec<String>,
    pub d: Vec<SeriesText>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_part: Option<Vec<SeriesText>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finalized: Option<FinalizedText>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptText {
    pub generators: Vec<FieldText>,
    pub unit: String,
    pub fibered: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub format: u32,
    pub pipeline: Pipeline,
    pub weights: [u32; 2],
    pub h: String,
    pub h0: String,
    pub x0: FieldText,
    pub truncation: u32,
    pub status: Status,
    pub normal_form: NormalFormText,
    pub script: ScriptText,
}

impl Certificate {
    pub fn new(
        pipeline: Pipeline,
        ctx: &QHContext,
        nf: &NormalForm,
        script: &ConjugationScript,
        status: Status,
    ) -> Self {
        let w = ctx.weights();
        let normal_form = NormalFormText {
            basis: nf.basis.monomials.iter().map(|m| m.to_string()).collect(),
            d: nf.d.iter().map(SeriesText::of).collect(),
            field_part: nf.field_part.as_ref().map(|fp| fp.iter().map(SeriesText::of).collect()),
            finalized: nf.finalized.as_ref().map(|f| FinalizedText {
                index: f.index + 1,
                m: f.m,
                n: f.n,
                kappa: f.kappa.to_string(),
                lambda: f.lambda.to_string(),
            }),
        };
        let script = ScriptText {
            generators: script.generators.iter().map(|g| FieldText::of(g, w)).collect(),
            unit: script.unit.to_string_weighted(w),
            fibered: script.fibered,
        };
        Self {
            format: FORMAT_VERSION,
            pipeline,
            weights: [w.p1(), w.p2()],
            h: ctx.h().to_string_weighted(w),
            h0: ctx.h0().to_string_weighted(w),
            x0: FieldText::of(ctx.x0(), w),
            truncation: nf.truncation,
            status,
            normal_form,
            script,
        }
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("certificates serialize");
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cert: Certificate = serde_json::from_str(text).map_err(|e| CliError::json(&e))?;
        if cert.format != FORMAT_VERSION {
            return Err(cert_err(format!("unsupported certificate format {}", cert.format)));
        }
        Ok(cert)
    }

    /// Checks that the certificate was produced for the same `h`, `h0`, `X0`.
    pub fn matches(&self, ctx: &QHContext) -> Result<(), String> {
        let w = ctx.weights();
        if self.weights != [w.p1(), w.p2()] {
            return Err(format!("weights {:?} differ from the problem's ({}, {})", self.weights, w.p1(), w.p2()));
        }
        let same = |text: &str, p: &Poly| text.parse::<Poly>().map(|q| &q == p).unwrap_or(false);
        if !same(&self.h, ctx.h()) {
            return Err("h differs from the problem's".into());
        }
        if !same(&self.h0, ctx.h0()) {
            return Err("h0 differs from the problem's".into());
        }
        if !same(&self.x0.dx, &ctx.x0().p) || !same(&self.x0.dy, &ctx.x0().q) {
            return Err("X0 differs from the problem's".into());
        }
        Ok(())
    }

    pub fn normal_form(&self, ctx: &QHContext) -> Result<NormalForm, CliError> {
        let w = ctx.weights();
        let mut monomials = Vec::new();
        for b in &self.normal_form.basis {
            let p: Poly = b.parse().map_err(|e| cert_err(format!("basis monomial `{b}`: {e}")))?;
            let terms: Vec<_> = p.terms().collect();
            match terms.as_slice() {
                [(m, c)] if **c == qhnf::qi(1) => monomials.push(**m),
                _ => return Err(cert_err(format!("basis entry `{b}` is not a monomial"))),
            }
        }
        let degrees = monomials.iter().map(|m| w.pdeg(*m)).collect();
        let basis = CokerBasis { monomials, degrees, delta: ctx.delta() };
        let d = self.normal_form.d.iter().map(SeriesText::parse).collect::<Result<Vec<_>, _>>()?;
        if d.len() != basis.mu() {
            return Err(cert_err("the number of coefficients differs from the basis size".into()));
        }
        let field_part = self
            .normal_form
            .field_part
            .as_ref()
            .map(|fp| fp.iter().map(SeriesText::parse).collect::<Result<Vec<_>, _>>())
            .transpose()?;
        let finalized = self
            .normal_form
            .finalized
            .as_ref()
            .map(|f| -> Result<Finalized, CliError> {
                Ok(Finalized {
                    index: f.index.checked_sub(1).ok_or_else(|| cert_err("basis indices start at 1".into()))?,
                    m: f.m,
                    n: f.n,
                    kappa: rational(&f.kappa)?,
                    lambda: rational(&f.lambda)?,
                })
            })
            .transpose()?;
        Ok(NormalForm { basis, d, field_part, finalized, truncation: self.truncation })
    }

    pub fn script(&self) -> Result<ConjugationScript, CliError> {
        let mut generators = Vec::new();
        for g in &self.script.generators {
            generators.push(VField::new(cert_poly(&g.dx)?, cert_poly(&g.dy)?));
        }
        Ok(ConjugationScript { generators, unit: cert_poly(&self.script.unit)?, fibered: self.script.fibered })
    }
}

fn cert_err(message: String) -> CliError {
    CliError::Certificate(message)
}

fn cert_poly(s: &str) -> Result<Poly, CliError> {
    s.parse().map_err(|e| cert_err(format!("`{s}`: {e}")))
}

fn rational(s: &str) -> Result<Q, CliError> {
    s.trim().parse::<Q>().map_err(|_| cert_err(format!("`{s}` is not a rational number")))
}
