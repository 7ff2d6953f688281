//! Spectral functions of shift-invariant spaces sampled on a finite grid of
//! fibers and a finite frequency window: feasibility per fiber, synthesis of
//! a range function with the given spectral function, and extraction back.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feasibility::{classify, FeasibilityReport};
use crate::projection::ProjectionRep;
use crate::rational::{in_unit_interval, serde_rational_vec, Rational};
use crate::selector::carpenter;
use crate::seq::{DiagonalSpec, TailRule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fiber {
    pub xi: Vec<f64>,
    /// `σ(ξ + k)` for `k` in the window, in window order.
    #[serde(with = "serde_rational_vec")]
    pub values: Vec<Rational>,
    /// Values past the window; absent means zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailRule>,
}

impl Fiber {
    pub fn spec(&self) -> Result<DiagonalSpec> {
        DiagonalSpec::new(self.values.clone(), self.tail.clone().unwrap_or(TailRule::Zero))
    }

    pub fn name(&self) -> String {
        let parts: Vec<String> = self.xi.iter().map(|x| x.to_string()).collect();
        format!("xi=({})", parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSamples")]
pub struct SpectralSamples {
    pub d: usize,
    pub window: Vec<Vec<i64>>,
    pub fibers: Vec<Fiber>,
}

#[derive(Deserialize)]
struct RawSamples {
    d: usize,
    window: Vec<Vec<i64>>,
    fibers: Vec<Fiber>,
}

impl TryFrom<RawSamples> for SpectralSamples {
    type Error = Error;

    fn try_from(raw: RawSamples) -> Result<Self> {
        SpectralSamples::new(raw.d, raw.window, raw.fibers)
    }
}

fn check_window(d: usize, window: &[Vec<i64>]) -> Result<()> {
    if !(1..=2).contains(&d) {
        return Err(Error::invalid("dimension d must be 1 or 2"));
    }
    let mut seen = HashSet::new();
    for k in window {
        if k.len() != d {
            return Err(Error::invalid(format!("window index {k:?} does not have {d} coordinates")));
        }
        if !seen.insert(k) {
            return Err(Error::invalid(format!("window index {k:?} repeated")));
        }
    }
    Ok(())
}

impl SpectralSamples {
    pub fn new(d: usize, window: Vec<Vec<i64>>, fibers: Vec<Fiber>) -> Result<Self> {
        check_window(d, &window)?;
        for f in &fibers {
            if f.xi.len() != d || f.xi.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid(format!("fiber {} needs {d} finite coordinates", f.name())));
            }
            if f.values.len() != window.len() {
                return Err(Error::invalid(format!(
                    "fiber {} has {} values for a window of {}",
                    f.name(),
                    f.values.len(),
                    window.len()
                )));
            }
            if let Some(x) = f.values.iter().find(|x| !in_unit_interval(x)) {
                return Err(Error::invalid(format!("fiber {}: value {x} outside [0,1]", f.name())));
            }
            f.spec()?;
        }
        Ok(SpectralSamples { d, window, fibers })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiberCheck {
    pub xi: Vec<f64>,
    pub report: FeasibilityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralCheck {
    pub fibers: Vec<FiberCheck>,
    pub pass: bool,
}

/// Classifies every fiber; passes when all fibers are feasible.
pub fn check_spectral(samples: &SpectralSamples) -> SpectralCheck {
    let fibers: Vec<FiberCheck> = samples
        .fibers
        .iter()
        .map(|f| FiberCheck {
            xi: f.xi.clone(),
            report: classify(&f.spec().expect("validated")),
        })
        .collect();
    let pass = fibers.iter().all(|f| f.report.is_feasible());
    SpectralCheck { fibers, pass }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeFiber {
    pub xi: Vec<f64>,
    pub rep: ProjectionRep,
}

/// Fiberwise projections on coordinates indexed by the window (coordinate
/// `i` is window entry `i`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeFunctionFile {
    pub d: usize,
    pub window: Vec<Vec<i64>>,
    pub fibers: Vec<RangeFiber>,
}

impl RangeFunctionFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let r: RangeFunctionFile = serde_json::from_str(text).map_err(|e| Error::invalid(e.to_string()))?;
        check_window(r.d, &r.window)?;
        Ok(r)
    }
}

/// Builds each fiber projection with the selector; names the first
/// infeasible fiber.
pub fn synthesize_range(samples: &SpectralSamples, m: usize) -> Result<RangeFunctionFile> {
    let fibers = samples
        .fibers
        .par_iter()
        .map(|f| {
            let rep = carpenter(&f.spec()?, m).map_err(|e| match e {
                Error::Infeasible { a, b, .. } => Error::Infeasible {
                    cell: Some(f.name()),
                    a,
                    b,
                },
                other => other,
            })?;
            Ok(RangeFiber { xi: f.xi.clone(), rep })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RangeFunctionFile {
        d: samples.d,
        window: samples.window.clone(),
        fibers,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractedFiber {
    pub xi: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractedSpectrum {
    pub d: usize,
    pub window: Vec<Vec<i64>>,
    pub fibers: Vec<ExtractedFiber>,
}

/// `σ(ξ + k) = <P(ξ) e_k, e_k>` on the window.
pub fn extract_spectral(range: &RangeFunctionFile) -> ExtractedSpectrum {
    let n = range.window.len();
    ExtractedSpectrum {
        d: range.d,
        window: range.window.clone(),
        fibers: range
            .fibers
            .iter()
            .map(|f| ExtractedFiber {
                xi: f.xi.clone(),
                values: f.rep.diagonal(n),
            })
            .collect(),
    }
}

/// Largest deviation between extracted values and the samples.
pub fn round_trip_error(samples: &SpectralSamples, extracted: &ExtractedSpectrum) -> f64 {
    samples
        .fibers
        .iter()
        .zip(&extracted.fibers)
        .flat_map(|(s, e)| {
            s.values
                .iter()
                .zip(&e.values)
                .map(|(x, y)| (crate::rational::to_f64(x) - y).abs())
        })
        .fold(0.0, f64::max)
}
