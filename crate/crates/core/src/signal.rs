//! Time-dependent boundary data.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A scalar function of time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Signal {
    Constant {
        value: f64,
    },
    /// `offset + amplitude sin(2 pi frequency t + phase)`, frequency in Hz.
    Sine {
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        offset: f64,
    },
    /// Linear interpolation of samples, held constant outside the sampled range.
    Table {
        t: Vec<f64>,
        y: Vec<f64>,
    },
}

impl Signal {
    pub fn constant(value: f64) -> Self {
        Signal::Constant { value }
    }

    pub fn sine(amplitude: f64, frequency: f64) -> Self {
        Signal::Sine {
            amplitude,
            frequency,
            phase: 0.0,
            offset: 0.0,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Signal::Constant { value } => *value,
            Signal::Sine {
                amplitude,
                frequency,
                phase,
                offset,
            } => offset + amplitude * (2.0 * PI * frequency * t + phase).sin(),
            Signal::Table { t: ts, y } => {
                let i = ts.partition_point(|&s| s <= t);
                if i == 0 {
                    y[0]
                } else if i == ts.len() {
                    y[ts.len() - 1]
                } else {
                    let w = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
                    y[i - 1] + w * (y[i] - y[i - 1])
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Signal::Constant { value } => value.is_finite(),
            Signal::Sine {
                amplitude,
                frequency,
                phase,
                offset,
            } => [amplitude, frequency, phase, offset].iter().all(|v| v.is_finite()),
            Signal::Table { t, y } => {
                if t.is_empty() || t.len() != y.len() {
                    return Err(Error::domain(format!(
                        "table signal needs matching nonempty samples (t: {}, y: {})",
                        t.len(),
                        y.len()
                    )));
                }
                if t.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::domain("table signal times must increase strictly"));
                }
                t.iter().chain(y).all(|v| v.is_finite())
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain("signal parameters must be finite"))
        }
    }
}
