//! JSON file formats for potentials, spectral data and blowup scenarios.
//!
//! Complex numbers are `[re, im]` pairs and 2×2 matrices are four such pairs in row-major
//! order. Field order is fixed by the structs below, so a read followed by a write reproduces
//! the canonical file byte for byte.

use crate::blowup::{genus_one_sequence, helicoid_scenario, BlowupSequenceSpec};
use crate::error::{Error, Result};
use crate::loopalg::{Mat2, MatLaurent, ScalarLaurent};
use crate::potential::{CmcPotential, KdvPotential, ValidationReport};
use crate::scalar::c64;
use crate::spectral::{CurvePoint, SpectralData};
use num_complex::Complex64;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffJson {
    pub k: i32,
    pub m: [[f64; 2]; 4],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialJson {
    pub kind: String,
    pub g: usize,
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    pub coeff: Vec<CoeffJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivisorJson {
    pub beta: [f64; 2],
    pub nu: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralJson {
    pub g: usize,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "Q")]
    pub q: [f64; 2],
    pub a: Vec<[f64; 2]>,
    pub branch: Vec<[f64; 2]>,
    pub divisor: Vec<DivisorJson>,
}

/// A blowup scenario: one of the built-in sequences or an explicit list of potentials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scenario", rename_all = "snake_case")]
pub enum ScenarioJson {
    GenusOne {
        n_max: usize,
    },
    Helicoid {
        x0: f64,
        n_max: usize,
    },
    Explicit {
        description: String,
        sym_point: [f64; 2],
        members: Vec<PotentialJson>,
    },
}

fn pair(c: Complex64) -> [f64; 2] {
    [c.re, c.im]
}

fn unpair(p: [f64; 2]) -> Complex64 {
    c64(p[0], p[1])
}

fn mat_json(m: &Mat2<f64>) -> [[f64; 2]; 4] {
    m.entries().map(pair)
}

fn coeffs_json(l: &MatLaurent<f64>, lo: i32, hi: i32) -> Vec<CoeffJson> {
    (lo..=hi).map(|k| CoeffJson { k, m: mat_json(&l.coeff(k)) }).collect()
}

fn laurent_from(op: &'static str, coeff: &[CoeffJson], lo: i32, hi: i32) -> Result<MatLaurent<f64>> {
    let mut dense = vec![Mat2::zero(); (hi - lo + 1) as usize];
    let mut seen = vec![false; dense.len()];
    for c in coeff {
        if c.k < lo || c.k > hi {
            return Err(Error::Invalid { op, msg: format!("power {} outside {lo}..={hi}", c.k) });
        }
        let i = (c.k - lo) as usize;
        if seen[i] {
            return Err(Error::Invalid { op, msg: format!("power {} listed twice", c.k) });
        }
        seen[i] = true;
        dense[i] = Mat2::from_entries(c.m.map(unpair));
    }
    Ok(MatLaurent::new(lo, dense))
}

/// A potential of either family.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyPotential {
    Cmc(CmcPotential<f64>),
    Kdv(KdvPotential<f64>),
}

impl AnyPotential {
    pub fn to_json(&self) -> PotentialJson {
        match self {
            Self::Cmc(z) => PotentialJson {
                kind: "cmc".into(),
                g: z.genus(),
                h: Some(z.mean_curvature()),
                coeff: coeffs_json(&z.laurent(), -1, z.genus() as i32),
            },
            Self::Kdv(z) => PotentialJson {
                kind: "kdv".into(),
                g: z.degree(),
                h: None,
                coeff: coeffs_json(&z.laurent(), -(z.degree() as i32), 1),
            },
        }
    }

    pub fn from_json(j: &PotentialJson) -> Result<Self> {
        const OP: &str = "io::AnyPotential::from_json";
        match j.kind.as_str() {
            "cmc" => {
                let h = j.h.ok_or_else(|| Error::Invalid { op: OP, msg: "cmc potential needs H".into() })?;
                let l = laurent_from(OP, &j.coeff, -1, j.g as i32)?;
                Ok(Self::Cmc(CmcPotential::from_laurent(j.g, h, &l)))
            }
            "kdv" => {
                if j.h.is_some() {
                    return Err(Error::Invalid { op: OP, msg: "kdv potentials carry no H".into() });
                }
                let l = laurent_from(OP, &j.coeff, -(j.g as i32), 1)?;
                Ok(Self::Kdv(KdvPotential::from_laurent(j.g, &l)))
            }
            other => Err(Error::Invalid { op: OP, msg: format!("unknown kind {other:?}") }),
        }
    }

    pub fn validate(&self, tol: f64) -> ValidationReport {
        match self {
            Self::Cmc(z) => z.validate(tol),
            Self::Kdv(z) => z.validate(tol),
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&read_json(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_json(path, &self.to_json())
    }
}

impl SpectralJson {
    pub fn from_data(sd: &SpectralData<f64>) -> Self {
        Self {
            g: sd.g,
            h: sd.h,
            q: pair(sd.q),
            a: (0..=sd.a.hi().max(0)).map(|k| pair(sd.a.coeff(k))).collect(),
            branch: sd.branch.iter().map(|l| pair(*l)).collect(),
            divisor: sd.divisor.iter().map(|p| DivisorJson { beta: pair(p.lambda), nu: pair(p.nu) }).collect(),
        }
    }

    pub fn to_data(&self) -> Result<SpectralData<f64>> {
        const OP: &str = "io::SpectralJson::to_data";
        if self.branch.len() != self.g || self.divisor.len() != self.g || self.a.len() != 2 * self.g + 1 {
            return Err(Error::Invalid { op: OP, msg: format!("genus {} needs {} branch points, {} divisor points and {} coefficients of a", self.g, self.g, self.g, 2 * self.g + 1) });
        }
        Ok(SpectralData {
            g: self.g,
            h: self.h,
            q: unpair(self.q),
            a: ScalarLaurent::new(0, self.a.iter().map(|p| unpair(*p)).collect()),
            branch: self.branch.iter().map(|p| unpair(*p)).collect(),
            divisor: self.divisor.iter().map(|d| CurvePoint { lambda: unpair(d.beta), nu: unpair(d.nu) }).collect(),
        })
    }
}

impl ScenarioJson {
    /// Sequence described by the scenario, with its default `n_max`.
    pub fn to_spec(&self) -> Result<BlowupSequenceSpec<f64>> {
        match self {
            Self::GenusOne { n_max } => Ok(genus_one_sequence(*n_max)),
            Self::Helicoid { x0, n_max } => Ok(helicoid_scenario(*x0, *n_max)),
            Self::Explicit { description, sym_point, members } => {
                let zetas = members
                    .iter()
                    .map(|m| match AnyPotential::from_json(m)? {
                        AnyPotential::Cmc(z) => Ok(z),
                        AnyPotential::Kdv(_) => Err(Error::Invalid { op: "io::ScenarioJson::to_spec", msg: "blowup members must be cmc potentials".into() }),
                    })
                    .collect::<Result<Vec<_>>>()?;
                let n_max = zetas.len();
                Ok(BlowupSequenceSpec::new(n_max, description.clone(), unpair(*sym_point), move |n| {
                    zetas.get(n - 1).cloned().map(|z| (z, c64(0.0, 0.0))).ok_or_else(|| Error::Invalid {
                        op: "io::ScenarioJson::to_spec",
                        msg: format!("member {n} not listed"),
                    })
                }))
            }
        }
    }
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_canonical_string<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes") + "\n"
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io { op: "io::read_json", msg: format!("{}: {e}", path.display()) })?;
    serde_json::from_str(&text).map_err(|e| Error::Invalid { op: "io::read_json", msg: format!("{}: {e}", path.display()) })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_canonical_string(value)).map_err(|e| Error::Io { op: "io::write_json", msg: format!("{}: {e}", path.display()) })
}
