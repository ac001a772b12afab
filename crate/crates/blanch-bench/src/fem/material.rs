use super::FemError;
use serde::{Deserialize, Serialize};

/// Tissue layers distinguishable in the cross-section model.
///
/// `Bone` and `Nail` are listed for completeness of the material table; the
/// slab mesh represents bone as a fixed bottom boundary rather than elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    Epidermis,
    Dermis,
    Subcutaneous,
    Bone,
    Nail,
}

impl Layer {
    /// Stable lowercase name used in CSV and JSON artifacts.
    pub fn name(self) -> &'static str {
        match self {
            Layer::Epidermis => "epidermis",
            Layer::Dermis => "dermis",
            Layer::Subcutaneous => "subcutaneous",
            Layer::Bone => "bone",
            Layer::Nail => "nail",
        }
    }

    /// Inverse of [`Layer::name`].
    pub fn from_name(name: &str) -> Option<Layer> {
        match name {
            "epidermis" => Some(Layer::Epidermis),
            "dermis" => Some(Layer::Dermis),
            "subcutaneous" => Some(Layer::Subcutaneous),
            "bone" => Some(Layer::Bone),
            "nail" => Some(Layer::Nail),
            _ => None,
        }
    }
}

/// Isotropic linear-elastic constants for one layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    /// Young's modulus in pascals. Must be positive.
    pub elastic_modulus_pa: f64,
    /// Poisson's ratio. Must lie in `[0, 0.5)`; 0.5 is incompressible and
    /// not representable in a displacement formulation.
    pub poisson_ratio: f64,
}

impl MaterialParams {
    pub fn new(elastic_modulus_pa: f64, poisson_ratio: f64) -> Result<Self, FemError> {
        if !(elastic_modulus_pa.is_finite() && elastic_modulus_pa > 0.0) {
            return Err(FemError::InvalidParameter(format!(
                "elastic modulus must be positive, got {elastic_modulus_pa}"
            )));
        }
        if !(poisson_ratio.is_finite() && (0.0..0.5).contains(&poisson_ratio)) {
            return Err(FemError::InvalidParameter(format!(
                "poisson ratio must lie in [0, 0.5), got {poisson_ratio}"
            )));
        }
        Ok(MaterialParams {
            elastic_modulus_pa,
            poisson_ratio,
        })
    }
}

/// Layer-to-material lookup used by assembly and stress recovery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialTable {
    entries: Vec<(Layer, MaterialParams)>,
}

impl MaterialTable {
    /// Builds a table from explicit entries. Later duplicates of a layer are
    /// rejected so a table always maps each layer to one material.
    pub fn new(entries: Vec<(Layer, MaterialParams)>) -> Result<Self, FemError> {
        for (i, (layer, params)) in entries.iter().enumerate() {
            MaterialParams::new(params.elastic_modulus_pa, params.poisson_ratio)?;
            if entries[..i].iter().any(|(l, _)| l == layer) {
                return Err(FemError::InvalidParameter(format!(
                    "duplicate material entry for layer {layer:?}"
                )));
            }
        }
        Ok(MaterialTable { entries })
    }

    /// Literature values for fingertip tissue: epidermis 0.136 MPa, dermis
    /// 0.080 MPa, subcutaneous fat 0.034 MPa (all nu = 0.48, nearly
    /// incompressible), bone 17 GPa and nail 170 MPa (nu = 0.30).
    pub fn standard() -> Self {
        let mpa = 1.0e6;
        MaterialTable {
            entries: vec![
                (
                    Layer::Epidermis,
                    MaterialParams {
                        elastic_modulus_pa: 0.136 * mpa,
                        poisson_ratio: 0.48,
                    },
                ),
                (
                    Layer::Dermis,
                    MaterialParams {
                        elastic_modulus_pa: 0.080 * mpa,
                        poisson_ratio: 0.48,
                    },
                ),
                (
                    Layer::Subcutaneous,
                    MaterialParams {
                        elastic_modulus_pa: 0.034 * mpa,
                        poisson_ratio: 0.48,
                    },
                ),
                (
                    Layer::Bone,
                    MaterialParams {
                        elastic_modulus_pa: 17_000.0 * mpa,
                        poisson_ratio: 0.30,
                    },
                ),
                (
                    Layer::Nail,
                    MaterialParams {
                        elastic_modulus_pa: 170.0 * mpa,
                        poisson_ratio: 0.30,
                    },
                ),
            ],
        }
    }

    pub fn get(&self, layer: Layer) -> Option<&MaterialParams> {
        self.entries.iter().find(|(l, _)| *l == layer).map(|(_, p)| p)
    }

    pub fn entries(&self) -> &[(Layer, MaterialParams)] {
        &self.entries
    }

    /// Largest Young's modulus among `layers`, used to size contact
    /// penalties relative to the stiffest tissue actually meshed.
    pub fn max_modulus_of(
        &self,
        layers: impl IntoIterator<Item = Layer>,
    ) -> Result<f64, FemError> {
        let mut max = None::<f64>;
        for layer in layers {
            let params = self.get(layer).ok_or(FemError::UnknownMaterial(layer))?;
            max = Some(max.map_or(params.elastic_modulus_pa, |m: f64| {
                m.max(params.elastic_modulus_pa)
            }));
        }
        max.ok_or_else(|| FemError::InvalidParameter("no layers given".into()))
    }
}
