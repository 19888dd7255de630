//! Run manifests: every run persists its exact inputs (including realized
//! frequency draws and generated adjacencies), the config hash, and sha256
//! checksums of every output file, so any run can be reproduced bit for bit.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Serialize f64 vectors as IEEE-754 bit patterns in hex. Decimal float
/// round-trips through JSON can land one ulp off, which a chaotic
/// integration amplifies; reruns need the exact bits.
mod f64_bits {
    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let hex: Vec<String> = v.iter().map(|x| format!("{:016x}", x.to_bits())).collect();
        s.collect_seq(hex)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let hex: Vec<String> = Vec::deserialize(d)?;
        hex.into_iter()
            .map(|h| {
                u64::from_str_radix(&h, 16)
                    .map(f64::from_bits)
                    .map_err(|e| D::Error::custom(format!("bad f64 bits {h:?}: {e}")))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RealizedInputs {
    /// Edge-list text of the generated Blue network.
    pub blue_edges: String,
    pub red_edges: String,
    /// Blue->Red link pairs (i, j); the reverse block mirrors them when
    /// `cross_symmetric` is set.
    pub cross_pairs: Vec<(usize, usize)>,
    pub cross_symmetric: bool,
    #[serde(with = "f64_bits")]
    pub omega: Vec<f64>,
    #[serde(with = "f64_bits")]
    pub nu: Vec<f64>,
    #[serde(with = "f64_bits")]
    pub init_beta: Vec<f64>,
    #[serde(with = "f64_bits")]
    pub init_rho: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OutputRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub tool_version: String,
    /// Subcommand that produced the run.
    pub command: String,
    /// Resolved grid string, when the command took one.
    pub grid: Option<String>,
    pub config_hash: String,
    pub config_text: String,
    pub seed_override: Option<u64>,
    /// False while the run is in flight or after a recorded failure.
    pub complete: bool,
    pub error: Option<String>,
    pub realized: RealizedInputs,
    pub outputs: Vec<OutputRecord>,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Verify that the embedded config text still matches its hash.
    pub fn config_hash_valid(&self) -> bool {
        sha256_hex(self.config_text.as_bytes()) == self.config_hash
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunManifest {
        let text = "[networks]\nblue = tree:branching=1,depth=1\n";
        RunManifest {
            tool_version: "0.1.0".into(),
            command: "simulate".into(),
            grid: None,
            config_hash: sha256_hex(text.as_bytes()),
            config_text: text.into(),
            seed_override: None,
            complete: true,
            error: None,
            realized: RealizedInputs {
                blue_edges: "nodes 2\n0 1\n".into(),
                red_edges: "nodes 2\n0 1\n".into(),
                cross_pairs: vec![(1, 1)],
                cross_symmetric: true,
                omega: vec![0.1, 0.2],
                nu: vec![0.3, 0.4],
                init_beta: vec![0.0, 0.0],
                init_rho: vec![0.0, 0.0],
            },
            outputs: vec![OutputRecord {
                path: "trajectory.csv".into(),
                sha256: "00".into(),
            }],
        }
    }

    #[test]
    fn json_round_trip() {
        let m = sample();
        let back = RunManifest::from_json(&m.to_json()).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn float_vectors_round_trip_bit_exact() {
        // Values whose shortest decimal form does not survive JSON float
        // parsing exactly; the bit encoding must.
        let mut m = sample();
        m.realized.omega = vec![
            f64::from_bits(0x3fcbee016fefffc8),
            f64::from_bits(0x3fdc6535536ee44c),
            f64::from_bits(0x3f99e74182bc8d00),
        ];
        let back = RunManifest::from_json(&m.to_json()).unwrap();
        for (a, b) in m.realized.omega.iter().zip(&back.realized.omega) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn hash_validation_detects_tampering() {
        let mut m = sample();
        assert!(m.config_hash_valid());
        m.config_text.push_str("phi = 3\n");
        assert!(!m.config_hash_valid());
    }

    #[test]
    fn sha256_known_value() {
        // sha256 of the empty string.
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
