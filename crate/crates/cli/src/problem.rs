//! Problem files: JSON records with polynomial strings.

use std::fmt;

use qhnf::logfields::{QHContext, VField};
use qhnf::{Poly, Weights};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pipeline {
    Foliation,
    Field,
    Cokernel,
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pipeline::Foliation => "foliation",
            Pipeline::Field => "field",
            Pipeline::Cokernel => "cokernel",
        })
    }
}

impl std::str::FromStr for Pipeline {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "foliation" => Ok(Pipeline::Foliation),
            "field" => Ok(Pipeline::Field),
            "cokernel" => Ok(Pipeline::Cokernel),
            _ => Err(format!("unknown pipeline `{s}` (expected foliation, field or cokernel)")),
        }
    }
}

/// A vector field `dx ∂x + dy ∂y` as two polynomial strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldText {
    pub dx: String,
    pub dy: String,
}

impl FieldText {
    pub fn of(v: &VField, w: &Weights) -> Self {
        Self { dx: v.p.to_string_weighted(w), dy: v.q.to_string_weighted(w) }
    }
}

/// Raw problem record as written by the user.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub weights: [u32; 2],
    pub h: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h0: Option<String>,
    /// Initial field; defaults to the Hamiltonian field of `h`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<FieldText>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldText>,
    pub truncation: u32,
    pub pipeline: Pipeline,
    /// 1-based basis index for the final reduction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pick: Option<usize>,
}

/// Parsed problem.
#[derive(Clone, Debug)]
pub struct Problem {
    pub weights: Weights,
    pub h: Poly,
    pub h0: Poly,
    pub x0: Option<VField>,
    pub field: Option<VField>,
    pub truncation: u32,
    pub pipeline: Pipeline,
    pub pick: Option<usize>,
}

impl Problem {
    /// Parses the JSON text. Errors carry the line and column in `text`.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw: ProblemFile = serde_json::from_str(text).map_err(|e| CliError::json(&e))?;
        Self::from_raw(&raw, text)
    }

    pub fn from_raw(raw: &ProblemFile, text: &str) -> Result<Self, CliError> {
        let weights = Weights::new(raw.weights[0], raw.weights[1]).map_err(|e| {
            let (line, column) = locate(text, "\"weights\"");
            CliError::Parse { line, column, message: e.to_string() }
        })?;
        if raw.truncation == 0 {
            let (line, column) = locate(text, "\"truncation\"");
            return Err(CliError::Parse { line, column, message: "truncation must be positive".into() });
        }
        let h = poly(text, &raw.h, "h")?;
        let h0 = match &raw.h0 {
            Some(s) => poly(text, s, "h0")?,
            None => h.clone(),
        };
        let x0 = raw.x0.as_ref().map(|f| field(text, f)).transpose()?;
        let field_v = raw.field.as_ref().map(|f| field(text, f)).transpose()?;
        Ok(Self {
            weights,
            h,
            h0,
            x0,
            field: field_v,
            truncation: raw.truncation,
            pipeline: raw.pipeline,
            pick: raw.pick,
        })
    }

    pub fn context(&self, truncation: u32) -> Result<QHContext, CliError> {
        let ctx = match &self.x0 {
            Some(x0) => QHContext::with_initial_field(self.weights, self.h0.clone(), self.h.clone(), x0.clone(), truncation),
            None => QHContext::hamiltonian(self.weights, self.h0.clone(), self.h.clone(), truncation),
        };
        ctx.map_err(CliError::Precondition)
    }

    pub fn field(&self) -> Result<&VField, CliError> {
        self.field
            .as_ref()
            .ok_or_else(|| CliError::Usage("the problem has no `field` entry".into()))
    }
}

fn field(text: &str, f: &FieldText) -> Result<VField, CliError> {
    Ok(VField::new(poly(text, &f.dx, "dx")?, poly(text, &f.dy, "dy")?))
}

fn poly(text: &str, value: &str, key: &str) -> Result<Poly, CliError> {
    value.parse::<Poly>().map_err(|e| {
        let inner = match &e {
            qhnf::Error::Parse { column, .. } => *column,
            _ => 1,
        };
        let literal = serde_json::to_string(value).expect("strings serialize");
        let (line, column) = match text.find(&literal) {
            Some(_) => {
                let (l, c) = locate(text, &literal);
                (l, c + inner)
            }
            None => locate(text, &format!("\"{key}\"")),
        };
        let message = match e {
            qhnf::Error::Parse { message, .. } => format!("in `{key}`: {message}"),
            other => format!("in `{key}`: {other}"),
        };
        CliError::Parse { line, column, message }
    })
}

/// 1-based line and column of the first occurrence of `needle`, or `(1, 1)`.
fn locate(text: &str, needle: &str) -> (usize, usize) {
    let Some(pos) = text.find(needle) else { return (1, 1) };
    let before = &text[..pos];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}
