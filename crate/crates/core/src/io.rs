//! Frequency-set persistence: the `fset/1` JSON schema.
//!
//! Only the integer lattice vectors are stored; tails are recomputed from
//! the manifold map on load. This keeps files exact, compact and
//! re-serializable byte for byte.

use crate::error::{Error, Result};
use crate::manifolds::{FrequencySet, ManifoldKind, ManifoldSpec, Provenance};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const SCHEMA: &str = "fset/1";

#[derive(Debug, Serialize, Deserialize)]
struct SetFile {
    schema: String,
    kind: String,
    d: usize,
    m: usize,
    #[serde(rename = "R")]
    r: u64,
    provenance: Provenance,
    points: Vec<Vec<i64>>,
}

pub fn to_json(fset: &FrequencySet) -> Result<String> {
    let file = SetFile {
        schema: SCHEMA.to_string(),
        kind: fset.spec.kind.as_str().to_string(),
        d: fset.spec.d,
        m: fset.spec.m,
        r: fset.r,
        provenance: fset.provenance.clone(),
        points: fset.points.iter().map(|p| p.n.clone()).collect(),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn from_json(text: &str) -> Result<FrequencySet> {
    let file: SetFile = serde_json::from_str(text)?;
    if file.schema != SCHEMA {
        return Err(Error::SchemaMismatch {
            found: file.schema,
            expected: SCHEMA.to_string(),
        });
    }
    let kind = ManifoldKind::parse(&file.kind)?;
    let spec = ManifoldSpec::new(kind, file.d)?;
    if spec.m != file.m {
        return Err(Error::InvalidSet(format!(
            "base dimension {} does not match kind {} in d = {}",
            file.m, file.kind, file.d
        )));
    }
    FrequencySet::from_lattice(spec, file.r, file.points, file.provenance)
}

pub fn save_set(fset: &FrequencySet, path: &Path) -> Result<()> {
    std::fs::write(path, to_json(fset)?)?;
    Ok(())
}

pub fn load_set(path: &Path) -> Result<FrequencySet> {
    from_json(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_byte_identical() {
        let spec = ManifoldSpec::new(ManifoldKind::EllipticParaboloid, 3).unwrap();
        let fs = crate::construct::capwise_build(&spec, 16, 5).unwrap();
        let json = to_json(&fs).unwrap();
        let loaded = from_json(&json).unwrap();
        let json2 = to_json(&loaded).unwrap();
        assert_eq!(json, json2);
        // Tails recomputed deterministically.
        for (a, b) in fs.points.iter().zip(&loaded.points) {
            assert_eq!(a.n, b.n);
            assert_eq!(a.tail, b.tail);
        }
    }

    #[test]
    fn duplicate_lattice_vector_rejected_on_load() {
        // Hand-edited file with a repeated lattice vector.
        let json = r#"{
            "schema": "fset/1",
            "kind": "moment_curve",
            "d": 2,
            "m": 1,
            "R": 4,
            "provenance": { "method": "edited" },
            "points": [[0], [1], [1]]
        }"#;
        let err = from_json(json);
        assert!(err.is_err(), "duplicate n must be rejected");
    }

    #[test]
    fn unsupported_schema_version_is_an_explicit_error() {
        let spec = ManifoldSpec::new(ManifoldKind::MomentCurve, 2).unwrap();
        let fs = FrequencySet::full_grid(&spec, 4).unwrap();
        let json = to_json(&fs).unwrap().replace("fset/1", "fset/2");
        assert!(matches!(
            from_json(&json),
            Err(Error::SchemaMismatch { .. })
        ));
    }
}
