//! Configuration hash stamped into every exported file.

use driftplan_core::flowfield::FlowField;
use sha2::{Digest, Sha256};

use crate::config::PlannerConfig;
use crate::field_format::write_field;

/// Hex digits kept from the SHA-256 digest.
pub const HASH_LEN: usize = 16;

/// Digest of the canonical field document and the canonical configuration.
pub fn config_hash(field: &FlowField, config: &PlannerConfig) -> String {
    let mut hasher = Sha256::new();
    hasher.update(b"driftplan field\n");
    hasher.update(write_field(field).as_bytes());
    hasher.update(b"driftplan config\n");
    hasher.update(config.canonical().as_bytes());
    let digest = hasher.finalize();
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    hex[..HASH_LEN].to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use driftplan_core::flowfield::{Cell, GridGeometry};

    #[test]
    fn sensitive_to_field_and_config() {
        let g = GridGeometry::new(3, 3, 100.0, vec![0.0]).unwrap();
        let field = FlowField::still(g.clone());
        let config = PlannerConfig::defaults(&g);
        let h = config_hash(&field, &config);
        assert_eq!(h.len(), HASH_LEN);
        assert_eq!(h, config_hash(&field.clone(), &config.clone()));
        let land = field.clone().with_land([Cell::new(1, 1, 0)]).unwrap();
        assert_ne!(h, config_hash(&land, &config));
        let mut other = config.clone();
        other.dispersal_spread = 0;
        assert_ne!(h, config_hash(&field, &other));
    }
}
