//! Instance files.
//!
//! Layout: `{"kind": .., "seed": .., "n": .., "budget": .., "payload": {..}}`.
//! Floats are written as plain decimals with 17 significant digits, so a file
//! parsed and written again is byte-identical.

use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::error::{Error, Result};
use crate::model::OracleProblem;
use crate::problems::{CoveringInstance, InfluenceInstance, QuadraticInstance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Quadratic,
    UncapCovering,
    CapCovering,
    InfluenceMax,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::Quadratic => "quadratic",
            Kind::UncapCovering => "uncap_covering",
            Kind::CapCovering => "cap_covering",
            Kind::InfluenceMax => "influence_max",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    Quadratic(QuadraticInstance),
    Covering(CoveringInstance),
    Influence(InfluenceInstance),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub kind: Kind,
    pub seed: u64,
    pub n: usize,
    pub budget: f64,
    pub payload: Payload,
}

#[derive(Serialize, Deserialize)]
struct RawInstance {
    kind: Kind,
    seed: u64,
    n: usize,
    budget: f64,
    payload: serde_json::Value,
}

impl Instance {
    pub fn quadratic(inst: QuadraticInstance, seed: u64) -> Self {
        Instance {
            kind: Kind::Quadratic,
            seed,
            n: inst.dim(),
            budget: inst.b.first().copied().unwrap_or(1.0),
            payload: Payload::Quadratic(inst),
        }
    }

    pub fn covering(inst: CoveringInstance, seed: u64) -> Self {
        Instance {
            kind: if inst.is_capacitated() {
                Kind::CapCovering
            } else {
                Kind::UncapCovering
            },
            seed,
            n: inst.dim(),
            budget: inst.budget,
            payload: Payload::Covering(inst),
        }
    }

    pub fn influence(inst: InfluenceInstance, seed: u64) -> Self {
        Instance {
            kind: Kind::InfluenceMax,
            seed,
            n: inst.dim(),
            budget: inst.budget,
            payload: Payload::Influence(inst),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (dim, kind_ok) = match &self.payload {
            Payload::Quadratic(q) => {
                q.validate()?;
                (q.dim(), self.kind == Kind::Quadratic)
            }
            Payload::Covering(c) => {
                c.validate()?;
                let want = if c.is_capacitated() {
                    Kind::CapCovering
                } else {
                    Kind::UncapCovering
                };
                if c.budget != self.budget {
                    return Err(Error::Instance("payload budget differs from header".into()));
                }
                (c.dim(), self.kind == want)
            }
            Payload::Influence(i) => {
                i.validate()?;
                if i.budget != self.budget {
                    return Err(Error::Instance("payload budget differs from header".into()));
                }
                (i.dim(), self.kind == Kind::InfluenceMax)
            }
        };
        if !kind_ok {
            return Err(Error::Instance(format!(
                "kind `{}` does not match the payload",
                self.kind.as_str()
            )));
        }
        if dim != self.n {
            return Err(Error::Instance(format!(
                "header says n = {}, payload has dimension {dim}",
                self.n
            )));
        }
        if !self.budget.is_finite() {
            return Err(Error::Instance("budget must be finite".into()));
        }
        Ok(())
    }

    pub fn build_problem(&self) -> Result<OracleProblem> {
        self.validate()?;
        match &self.payload {
            Payload::Quadratic(q) => q.to_problem(),
            Payload::Covering(c) => c.to_problem(),
            Payload::Influence(i) => i.to_problem(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        self.validate()?;
        let payload = match &self.payload {
            Payload::Quadratic(q) => serde_json::to_value(q)?,
            Payload::Covering(c) => serde_json::to_value(c)?,
            Payload::Influence(i) => serde_json::to_value(i)?,
        };
        let raw = RawInstance {
            kind: self.kind,
            seed: self.seed,
            n: self.n,
            budget: self.budget,
            payload,
        };
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, SignificantDigits);
        raw.serialize(&mut ser)?;
        out.push(b'\n');
        Ok(String::from_utf8(out).expect("JSON output is UTF-8"))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawInstance = serde_json::from_str(text)?;
        let payload = match raw.kind {
            Kind::Quadratic => Payload::Quadratic(serde_json::from_value(raw.payload)?),
            Kind::UncapCovering | Kind::CapCovering => {
                Payload::Covering(serde_json::from_value(raw.payload)?)
            }
            Kind::InfluenceMax => Payload::Influence(serde_json::from_value(raw.payload)?),
        };
        let inst = Instance {
            kind: raw.kind,
            seed: raw.seed,
            n: raw.n,
            budget: raw.budget,
            payload,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Instance(format!("{}: {e}", path.display())))?;
        Instance::from_json(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = self.to_json()?;
        std::fs::write(path, text).map_err(|e| Error::Instance(format!("{}: {e}", path.display())))
    }
}

/// Compact JSON with floats printed as 17-significant-digit decimals.
struct SignificantDigits;

impl Formatter for SignificantDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }
}

fn format_f64(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    let exp = v.abs().log10().floor() as i32;
    if (-8..16).contains(&exp) {
        let decimals = (16 - exp).max(1) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.16e}")
    }
}
