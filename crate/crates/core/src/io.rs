//! JSON interchange for matrices, POVMs, instruments, model specs and
//! tomography estimates. Numbers are written with 15 significant digits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instrument::KrausInstrument;
use crate::measure::Povm;
use crate::qcore::{c, CMatrix, DensityMatrix, Hermitian};
use crate::qmodels::{ExpKind, ExpModelSpec};
use crate::tomo::MleResult;

/// Rounds to 15 significant digits.
pub fn round15(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.14e}").parse().unwrap_or(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let rows = |f: fn(&crate::qcore::C64) -> f64| {
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| round15(f(&m[(i, j)]))).collect()).collect()
        };
        MatrixJson { dim: m.nrows(), re: rows(|z| z.re), im: rows(|z| z.im) }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let d = self.dim;
        let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == d && rows.iter().all(|r| r.len() == d);
        if d == 0 || !shape_ok(&self.re) || !shape_ok(&self.im) {
            return Err(Error::DimMismatch(format!("matrix JSON is not {d}x{d}")));
        }
        Ok(CMatrix::from_fn(d, d, |i, j| c(self.re[i][j], self.im[i][j])))
    }

    pub fn to_hermitian(&self) -> Result<Hermitian> {
        Hermitian::new(self.to_matrix()?)
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.to_matrix()?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PovmJson {
    pub dim: usize,
    pub outcomes: Vec<String>,
    pub elements: Vec<MatrixJson>,
}

impl PovmJson {
    pub fn from_povm(m: &Povm) -> Self {
        PovmJson {
            dim: m.dim(),
            outcomes: m.labels().to_vec(),
            elements: m.elements().iter().map(|e| MatrixJson::from_matrix(e.matrix())).collect(),
        }
    }

    pub fn to_povm(&self) -> Result<Povm> {
        let elements = self.elements.iter().map(|e| e.to_hermitian()).collect::<Result<Vec<_>>>()?;
        if elements.iter().any(|e| e.dim() != self.dim) {
            return Err(Error::DimMismatch("POVM element dimension".into()));
        }
        Povm::with_labels(self.outcomes.clone(), elements)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstrumentJson {
    pub dim: usize,
    pub outcomes: Vec<String>,
    pub kraus: Vec<Vec<MatrixJson>>,
}

impl InstrumentJson {
    pub fn from_instrument(n: &KrausInstrument) -> Self {
        InstrumentJson {
            dim: n.dim(),
            outcomes: n.outcomes().to_vec(),
            kraus: n.kraus().iter().map(|ws| ws.iter().map(MatrixJson::from_matrix).collect()).collect(),
        }
    }

    pub fn to_instrument(&self) -> Result<KrausInstrument> {
        let kraus = self
            .kraus
            .iter()
            .map(|ws| ws.iter().map(|w| w.to_matrix()).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let n = KrausInstrument::new(self.outcomes.clone(), kraus)?;
        if n.dim() != self.dim {
            return Err(Error::DimMismatch("instrument dimension".into()));
        }
        Ok(n)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSpecJson {
    pub kind: ExpKind,
    pub rho0: MatrixJson,
    #[serde(rename = "T")]
    pub t: Vec<MatrixJson>,
}

impl ModelSpecJson {
    pub fn from_spec(s: &ExpModelSpec) -> Self {
        ModelSpecJson {
            kind: s.kind(),
            rho0: MatrixJson::from_matrix(s.base().matrix()),
            t: s.generators().iter().map(|g| MatrixJson::from_matrix(g.matrix())).collect(),
        }
    }

    pub fn to_spec(&self) -> Result<ExpModelSpec> {
        let gens = self.t.iter().map(|g| g.to_hermitian()).collect::<Result<Vec<_>>>()?;
        ExpModelSpec::new(self.kind, self.rho0.to_hermitian()?, gens)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateJson {
    pub n_max: usize,
    pub rho: MatrixJson,
    pub loglik: f64,
    pub iters: usize,
}

impl EstimateJson {
    pub fn from_mle(n_max: usize, res: &MleResult) -> Self {
        EstimateJson {
            n_max,
            rho: MatrixJson::from_matrix(res.rho.matrix()),
            loglik: round15(res.loglik),
            iters: res.iters,
        }
    }
}

/// Serializes after rounding every float to 15 significant digits.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::Invalid(e.to_string()))?;
    serde_json::to_string(&round_value(v)).map_err(|e| Error::Invalid(e.to_string()))
}

fn round_value(v: serde_json::Value) -> serde_json::Value {
    use serde_json::Value;
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round15(n.as_f64().unwrap());
            serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_value).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

pub fn from_json<T: for<'de> Deserialize<'de>>(s: &str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| Error::Invalid(format!("bad JSON: {e}")))
}
