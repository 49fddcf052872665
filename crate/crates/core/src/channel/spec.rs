use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::scalar::Real;

/// JSON form of a channel: each Kraus operator is a list of rows, each entry
/// a `[re, im]` pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub name: String,
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus: Vec<Vec<Vec<[f64; 2]>>>,
}

impl ChannelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    /// Shape checks followed by channel validation.
    pub fn to_channel<T: Real>(&self) -> Result<KrausChannel<T>> {
        if self.kraus.is_empty() {
            return Err(Error::InvalidChannel(format!("{}: empty Kraus list", self.name)));
        }
        let mut ops = Vec::with_capacity(self.kraus.len());
        for (k, rows) in self.kraus.iter().enumerate() {
            if rows.len() != self.dim_out || rows.iter().any(|r| r.len() != self.dim_in) {
                return Err(Error::DimensionMismatch(format!(
                    "{}: Kraus operator {k} is not {}x{}",
                    self.name, self.dim_out, self.dim_in
                )));
            }
            let data = rows
                .iter()
                .flatten()
                .map(|&[a, b]| Complex::new(T::lit(a), T::lit(b)))
                .collect();
            ops.push(ComplexMatrix::from_vec(self.dim_out, self.dim_in, data)?);
        }
        KrausChannel::new(self.name.clone(), ops)
    }

    pub fn from_channel<T: Real>(ch: &KrausChannel<T>) -> Self {
        let kraus = ch
            .kraus()
            .iter()
            .map(|e| {
                (0..e.rows())
                    .map(|r| {
                        (0..e.cols())
                            .map(|c| [e[(r, c)].re.as_f64(), e[(r, c)].im.as_f64()])
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self {
            name: ch.name().to_string(),
            dim_in: ch.dim_in(),
            dim_out: ch.dim_out(),
            kraus,
        }
    }
}
