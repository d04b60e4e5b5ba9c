use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{KanLayer, KanNetwork};
use crate::error::{KanError, Result};
use crate::spline::{EdgeBasis, SplineSpec};

fn default_true() -> bool {
    true
}

/// Edge-function basis shared by all layers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisConfig {
    #[serde(alias = "p")]
    pub degree: usize,
    #[serde(alias = "G")]
    pub grid_count: usize,
    #[serde(alias = "a")]
    pub grid_min: f64,
    #[serde(alias = "b")]
    pub grid_max: f64,
    #[serde(default = "default_true")]
    pub include_silu: bool,
}

impl Default for BasisConfig {
    fn default() -> Self {
        Self {
            degree: 3,
            grid_count: 5,
            grid_min: -1.0,
            grid_max: 1.0,
            include_silu: true,
        }
    }
}

impl BasisConfig {
    pub fn build(&self) -> Result<EdgeBasis> {
        let spec = SplineSpec::new(self.degree, self.grid_count, self.grid_min, self.grid_max)?;
        Ok(EdgeBasis::new(spec, self.include_silu))
    }

    pub fn from_basis(basis: &EdgeBasis) -> Self {
        Self {
            degree: basis.spec.degree(),
            grid_count: basis.spec.grid_count(),
            grid_min: basis.spec.grid_min(),
            grid_max: basis.spec.grid_max(),
            include_silu: basis.includes_silu,
        }
    }
}

/// JSON checkpoint.
///
/// ```json
/// {
///   "shape": [4, 8, 1],
///   "basis": {"degree": 3, "grid_count": 5, "grid_min": -1.0, "grid_max": 1.0, "include_silu": true},
///   "layers": [[...], [...]],
///   "seed": 7,
///   "epoch": 200
/// }
/// ```
///
/// `layers[l]` holds the `d_out·d_in·K` coefficients of layer `l` in
/// `(i, j, k)` row-major order. Floats are written in shortest round-trip
/// form, so save followed by load reproduces every coefficient bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub shape: Vec<usize>,
    pub basis: BasisConfig,
    pub layers: Vec<Vec<f64>>,
    pub seed: u64,
    pub epoch: usize,
}

impl Checkpoint {
    /// Fails when the layers do not share one basis.
    pub fn from_network(net: &KanNetwork, seed: u64, epoch: usize) -> Result<Self> {
        let basis = net.layer(0).basis();
        if net.layers().iter().any(|l| l.basis() != basis) {
            return Err(KanError::InvalidArgument(
                "checkpoints need one basis shared by all layers".into(),
            ));
        }
        Ok(Self {
            shape: net.shape(),
            basis: BasisConfig::from_basis(basis),
            layers: net.layers().iter().map(|l| l.weights().to_vec()).collect(),
            seed,
            epoch,
        })
    }

    pub fn to_network(&self) -> Result<KanNetwork> {
        if self.shape.len() < 2 || self.layers.len() != self.shape.len() - 1 {
            return Err(KanError::InvalidShape(self.shape.clone()));
        }
        let basis = self.basis.build()?;
        let layers = self
            .shape
            .windows(2)
            .zip(&self.layers)
            .map(|(w, coeffs)| KanLayer::new(w[0], w[1], basis.clone(), coeffs.clone()))
            .collect::<Result<Vec<_>>>()?;
        KanNetwork::new(layers)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::init_network;

    #[test]
    fn round_trip_is_bit_exact() {
        let basis = BasisConfig {
            degree: 2,
            grid_count: 7,
            grid_min: -1.3,
            grid_max: 0.7,
            include_silu: true,
        };
        let net = init_network(&[3, 5, 2], &basis.build().unwrap(), 99).unwrap();
        let ck = Checkpoint::from_network(&net, 99, 12).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.json");
        ck.save(&path).unwrap();
        let back = Checkpoint::load(&path).unwrap();
        assert_eq!(back, ck);
        let net2 = back.to_network().unwrap();
        for (a, b) in net.layers().iter().zip(net2.layers()) {
            let bits = |l: &KanLayer| l.weights().iter().map(|w| w.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(a), bits(b));
        }
        assert_eq!(net, net2);
    }

    #[test]
    fn include_silu_defaults_to_true() {
        let cfg: BasisConfig =
            serde_json::from_str(r#"{"degree":3,"grid_count":5,"grid_min":-1,"grid_max":1}"#)
                .unwrap();
        assert_eq!(cfg, BasisConfig::default());
    }

    #[test]
    fn rejects_inconsistent_documents() {
        let net = init_network(&[2, 2], &EdgeBasis::default_kan(), 0).unwrap();
        let mut ck = Checkpoint::from_network(&net, 0, 0).unwrap();
        ck.layers[0].pop();
        assert!(ck.to_network().is_err());
        ck.shape = vec![2];
        assert!(ck.to_network().is_err());
        assert!(Checkpoint::from_json(r#"{"shape":[1,1]}"#).is_err());
    }
}
