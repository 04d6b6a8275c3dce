//! Canonical JSON serialization and content hashing.
//!
//! Canonical form: object keys sorted lexicographically, no insignificant
//! whitespace, numbers in shortest round-trip decimal form. `serde_json`'s
//! default `Map` is a `BTreeMap`, so converting through `Value` sorts keys;
//! compact printing and ryu/itoa give the whitespace and number rules.

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Serializes `value` to its canonical JSON string.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String, serde_json::Error> {
    let v = serde_json::to_value(value)?;
    serde_json::to_string(&v)
}

/// Canonical string of an already-built JSON value.
pub fn value_to_canonical_json(value: &Value) -> String {
    // Value -> string cannot fail for values produced by `to_value`.
    serde_json::to_string(value).expect("canonical JSON value serialization")
}

/// SHA-256 of a byte string, as 64 lowercase hex characters.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// SHA-256 over the canonical JSON form of `value`.
pub fn canonical_hash<T: Serialize>(value: &T) -> Result<String, serde_json::Error> {
    Ok(sha256_hex(to_canonical_json(value)?.as_bytes()))
}

/// True for a well-formed content hash: 64 lowercase hex characters.
pub fn is_content_hash(s: &str) -> bool {
    s.len() == 64 && s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))
}
