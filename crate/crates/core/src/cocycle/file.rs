//! JSON cocycle-definition files.
//!
//! ```json
//! {
//!   "d": 2,
//!   "k": 1,
//!   "angles": [0.6180339887498949, 0.2],
//!   "weights": [0.5, 0.5],
//!   "maps": [
//!     { "group_tag": "SL2", "degree": 0, "coeffs": [[2.0], [0.0], [0.0], [0.5]] },
//!     { "group_tag": "GENERAL", "degree": 1, "coeffs": [[1, 0.1, 0], [0, 0, 0], [0, 0, 0], [1, 0, 0.2]] }
//!   ]
//! }
//! ```
//!
//! `coeffs[e]` holds entry `e = i·d + j` in the interleaved layout
//! `[c₀, a₁, b₁, …, a_K, b_K]` with `K = degree`. Instead of `maps` a file
//! may give `potentials`, one per symbol, each `{ "energy": E, "degree": K,
//! "u": [...] }`; symbol `i` then carries the Schrödinger map with
//! `φᵢ = Eᵢ − uᵢ`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::map::{make_schrodinger, GroupTag, TrigMatrixMap};
use super::product::RandomProduct;
use super::trig::{ScalarPotential, TrigPoly};
use crate::error::{LabError, Result};

/// Tolerance on `|Σ νᵢ − 1|` accepted by the parser.
pub const FILE_WEIGHT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub group_tag: GroupTag,
    pub degree: usize,
    pub coeffs: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub energy: f64,
    pub degree: usize,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CocycleFile {
    pub d: usize,
    pub k: usize,
    pub angles: Vec<f64>,
    pub weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maps: Option<Vec<MapSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potentials: Option<Vec<PotentialSpec>>,
}

/// A parsed definition: the product plus the Schrödinger data it came from.
#[derive(Debug, Clone)]
pub struct CocycleDefinition {
    pub product: RandomProduct,
    /// `(Eᵢ, uᵢ)` when the file was given by potentials.
    pub potentials: Option<Vec<(f64, TrigPoly)>>,
}

impl MapSpec {
    /// Row-major entries without any group or invertibility check.
    pub fn entries(&self, d: usize) -> Result<Vec<TrigPoly>> {
        if self.coeffs.len() != d * d {
            return Err(LabError::InvalidMap(format!(
                "expected {} coefficient rows, got {}",
                d * d,
                self.coeffs.len()
            )));
        }
        self.coeffs.iter().map(|c| poly_from(c, self.degree)).collect()
    }

    pub fn to_map(&self, d: usize) -> Result<TrigMatrixMap> {
        TrigMatrixMap::new(d, self.entries(d)?, self.group_tag)
    }

    pub fn from_map(map: &TrigMatrixMap) -> Self {
        MapSpec {
            group_tag: map.tag(),
            degree: map.degree(),
            coeffs: map.entries().iter().map(|e| e.to_interleaved(map.degree())).collect(),
        }
    }
}

impl PotentialSpec {
    pub fn u(&self) -> Result<TrigPoly> {
        poly_from(&self.u, self.degree)
    }
}

fn poly_from(coeffs: &[f64], degree: usize) -> Result<TrigPoly> {
    if coeffs.len() != 2 * degree + 1 {
        return Err(LabError::InvalidMap(format!(
            "degree {degree} needs {} coefficients, got {}",
            2 * degree + 1,
            coeffs.len()
        )));
    }
    TrigPoly::from_interleaved(coeffs).ok_or_else(|| LabError::InvalidMap("bad coefficient layout".into()))
}

/// `φ = E − u`.
pub fn potential_at_energy(energy: f64, u: &TrigPoly) -> ScalarPotential {
    u.scaled(-1.0).add(&TrigPoly::constant(energy))
}

impl CocycleFile {
    pub fn parse(text: &str) -> Result<CocycleDefinition> {
        let file: CocycleFile = serde_json::from_str(text)?;
        file.build()
    }

    pub fn load(path: &Path) -> Result<CocycleDefinition> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| LabError::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    pub fn build(&self) -> Result<CocycleDefinition> {
        let n = self.k + 1;
        if self.angles.len() != n || self.weights.len() != n {
            return Err(LabError::InvalidProduct(format!(
                "k = {} needs {n} angles and weights, got {} and {}",
                self.k,
                self.angles.len(),
                self.weights.len()
            )));
        }
        let sum: f64 = self.weights.iter().sum();
        if !((sum - 1.0).abs() <= FILE_WEIGHT_TOL) {
            return Err(LabError::InvalidProduct(format!(
                "weights sum to {sum}, off by more than {FILE_WEIGHT_TOL:e}"
            )));
        }
        let weights: Vec<f64> = self.weights.iter().map(|w| w / sum).collect();

        let (maps, potentials) = match (&self.maps, &self.potentials) {
            (Some(maps), None) => {
                if maps.len() != n {
                    return Err(LabError::InvalidProduct(format!(
                        "expected {n} maps, got {}",
                        maps.len()
                    )));
                }
                let maps = maps.iter().map(|m| m.to_map(self.d)).collect::<Result<Vec<_>>>()?;
                (maps, None)
            }
            (None, Some(pots)) => {
                if self.d != 2 {
                    return Err(LabError::InvalidProduct("potentials require d = 2".into()));
                }
                if pots.len() != n {
                    return Err(LabError::InvalidProduct(format!(
                        "expected {n} potentials, got {}",
                        pots.len()
                    )));
                }
                let parsed = pots
                    .iter()
                    .map(|p| Ok((p.energy, p.u()?)))
                    .collect::<Result<Vec<_>>>()?;
                let maps = parsed
                    .iter()
                    .map(|(e, u)| make_schrodinger(&potential_at_energy(*e, u)))
                    .collect::<Result<Vec<_>>>()?;
                (maps, Some(parsed))
            }
            (Some(_), Some(_)) => {
                return Err(LabError::InvalidProduct(
                    "give either maps or potentials, not both".into(),
                ))
            }
            (None, None) => return Err(LabError::InvalidProduct("no maps or potentials given".into())),
        };

        // Renormalize the sum so the product invariant holds to machine precision.
        let total: f64 = weights.iter().sum();
        let weights = if (total - 1.0).abs() > 1e-15 {
            let mut w = weights;
            let last = w.len() - 1;
            let head: f64 = w[..last].iter().sum();
            w[last] = 1.0 - head;
            w
        } else {
            weights
        };
        let product = RandomProduct::new(self.angles.clone(), maps, weights)?;
        Ok(CocycleDefinition { product, potentials })
    }

    pub fn from_product(rp: &RandomProduct) -> Self {
        CocycleFile {
            d: rp.dim(),
            k: rp.k(),
            angles: rp.angles().to_vec(),
            weights: rp.weights().to_vec(),
            maps: Some(rp.maps().iter().map(MapSpec::from_map).collect()),
            potentials: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("cocycle file serializes")
    }
}
