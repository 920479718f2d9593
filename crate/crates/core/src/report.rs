//! CSV emission with stable formatting.
//!
//! CSV is the single tabular interchange format. All numeric fields are
//! written with Rust's shortest round-trip float formatting, so identical
//! values serialize to identical bytes. Every file starts with comment
//! lines embedding the run configuration and its hash.

use crate::expsum::NormReport;
use crate::kp::KpProbeReport;

/// FNV-1a, used to fingerprint configurations in output headers.
pub fn config_hash(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    h
}

pub fn header_comment(config_json: &str, seed: u64) -> String {
    format!(
        "# config: {}\n# config_hash: {:016x} seed: {}\n",
        config_json,
        config_hash(config_json.as_bytes()),
        seed
    )
}

pub const NORM_COLUMNS: &str = "set_id,p,method,value,error,samples,seed,wall_ms";
pub const KP_COLUMNS: &str =
    "set_id,p,method,value,error,samples,seed,wall_ms,probe,normalization,iterations,restarts";
pub const EXPERIMENT_COLUMNS: &str = "trial,size,accepted,probe_max,seed";
pub const EXCEEDANCE_COLUMNS: &str = "u,fraction";
pub const DIAG_COLUMNS: &str = "kind,R,param,value,error,seed";

fn fmt(v: f64) -> String {
    format!("{v}")
}

pub fn norm_row(set_id: &str, rep: &NormReport) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        set_id,
        fmt(rep.p),
        rep.method.as_str(),
        fmt(rep.value),
        fmt(rep.error),
        rep.samples,
        rep.seed.map(|s| s.to_string()).unwrap_or_default(),
        rep.wall_ms
    )
}

pub fn kp_row(set_id: &str, rep: &KpProbeReport) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        set_id,
        fmt(rep.p),
        rep.method.as_str(),
        fmt(rep.bound),
        fmt(rep.error),
        rep.samples,
        rep.seed,
        rep.wall_ms,
        rep.probe,
        rep.normalization.as_str(),
        rep.iterations,
        rep.restarts
    )
}

pub fn experiment_row(trial: u64, size: u64, accepted: bool, probe_max: f64, seed: u64) -> String {
    format!(
        "{},{},{},{},{}",
        trial,
        size,
        accepted as u8,
        fmt(probe_max),
        seed
    )
}

pub fn exceedance_row(u: f64, fraction: f64) -> String {
    format!("{},{}", fmt(u), fmt(fraction))
}

pub fn diag_row(kind: &str, r: u64, param: f64, value: f64, error: f64, seed: u64) -> String {
    format!(
        "{},{},{},{},{},{}",
        kind,
        r,
        fmt(param),
        fmt(value),
        fmt(error),
        seed
    )
}

/// Identifier of a frequency set for CSV rows: kind, scale and the
/// provenance fingerprint.
pub fn set_id(fset: &crate::manifolds::FrequencySet) -> String {
    let prov = serde_json::to_string(&fset.provenance).unwrap_or_default();
    format!(
        "{}-d{}-R{}-{:08x}",
        fset.spec.kind.as_str(),
        fset.spec.d,
        fset.r,
        config_hash(prov.as_bytes()) as u32
    )
}
