//! JSON matrix format:
//! `{"rows": m, "cols": n, "mode": "exact" | "float", "data": [...]}` with
//! row-major entries, either scalar strings (`"1/2-3i"`) or `[re, im]` pairs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypotheses::Instance;
use crate::matrix::Matrix;
use crate::scalar::{Backend, ExactComplex, FloatComplex, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Exact(String),
    Float([f64; 2]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub mode: Mode,
    pub data: Vec<Entry>,
}

impl<S: Scalar> From<&Matrix<S>> for MatrixJson {
    fn from(m: &Matrix<S>) -> Self {
        let (mode, data) = match S::BACKEND {
            Backend::Exact => (
                Mode::Exact,
                m.entries()
                    .iter()
                    .map(|x| Entry::Exact(x.to_string()))
                    .collect(),
            ),
            Backend::Float => (
                Mode::Float,
                m.entries()
                    .iter()
                    .map(|x| {
                        let (re, im) = x.to_f64_pair();
                        Entry::Float([re, im])
                    })
                    .collect(),
            ),
        };
        Self {
            rows: m.rows(),
            cols: m.cols(),
            mode,
            data,
        }
    }
}

impl MatrixJson {
    fn check_len(&self) -> Result<()> {
        if self.data.len() != self.rows * self.cols {
            return Err(Error::Parse(format!(
                "{}x{} matrix needs {} entries, got {}",
                self.rows,
                self.cols,
                self.rows * self.cols,
                self.data.len()
            )));
        }
        Ok(())
    }

    pub fn to_exact(&self) -> Result<Matrix<ExactComplex>> {
        self.check_len()?;
        if self.mode != Mode::Exact {
            return Err(Error::Parse(
                "float-mode data cannot be read exactly".into(),
            ));
        }
        let data = self
            .data
            .iter()
            .map(|e| match e {
                Entry::Exact(s) => s.parse::<ExactComplex>(),
                Entry::Float(_) => Err(Error::Parse("pair entry in exact-mode matrix".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        Matrix::from_vec(self.rows, self.cols, data)
    }

    /// Float-mode data as given; exact-mode data is rounded.
    pub fn to_float(&self) -> Result<Matrix<FloatComplex>> {
        if self.mode == Mode::Exact {
            return Ok(self.to_exact()?.to_backend());
        }
        self.check_len()?;
        let data = self
            .data
            .iter()
            .map(|e| match e {
                Entry::Float([re, im]) if re.is_finite() && im.is_finite() => {
                    Ok(FloatComplex::new(*re, *im))
                }
                Entry::Float(_) => Err(Error::Parse("non-finite entry".into())),
                Entry::Exact(_) => Err(Error::Parse("string entry in float-mode matrix".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        Matrix::from_vec(self.rows, self.cols, data)
    }
}

pub fn matrix_to_string<S: Scalar>(m: &Matrix<S>) -> String {
    serde_json::to_string(&MatrixJson::from(m)).expect("matrix JSON is always serializable")
}

pub fn parse_matrix_json(text: &str) -> Result<MatrixJson> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

/// An instance serialized with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceManifest {
    pub id: String,
    pub n: usize,
    pub seed: u64,
    pub recipe: String,
    /// `[a, b]` or `[A, B, C, D]`.
    pub matrices: Vec<MatrixJson>,
}

pub fn instance_json<S: Scalar>(inst: &Instance<S>) -> Vec<MatrixJson> {
    inst.matrices().into_iter().map(MatrixJson::from).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_round_trip_is_bit_exact() {
        let m = Matrix::from_vec(
            1,
            3,
            vec![
                ExactComplex::ratio(1, 2).unwrap(),
                "-3i".parse().unwrap(),
                "7/3+1/5i".parse().unwrap(),
            ],
        )
        .unwrap();
        let text = matrix_to_string(&m);
        let back = parse_matrix_json(&text).unwrap().to_exact().unwrap();
        assert_eq!(back, m);
        assert_eq!(matrix_to_string(&back), text);
    }

    #[test]
    fn float_round_trip() {
        let m = Matrix::from_vec(
            1,
            2,
            vec![FloatComplex::new(0.1, -2.5), FloatComplex::new(1e-300, 0.0)],
        )
        .unwrap();
        let back = parse_matrix_json(&matrix_to_string(&m))
            .unwrap()
            .to_float()
            .unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn malformed_input_is_a_parse_error() {
        for bad in [
            r#"{"rows":1,"cols":2,"mode":"exact","data":["1"]}"#,
            r#"{"rows":1,"cols":1,"mode":"exact","data":["x"]}"#,
            r#"{"rows":1,"cols":1,"mode":"exact","data":[[1.0,0.0]]}"#,
            r#"{"rows":1,"cols":1,"mode":"float","data":[[1.0,0.0]]"#,
        ] {
            let r = parse_matrix_json(bad).and_then(|j| j.to_exact());
            assert!(matches!(r, Err(Error::Parse(_))), "{bad}");
        }
    }
}
