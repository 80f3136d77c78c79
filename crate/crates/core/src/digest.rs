use alloc::string::String;
use core::fmt::Write;

use sha2::{Digest, Sha256};

/// Lowercase hex SHA-256 of `data`.
pub fn sha256_hex(data: &[u8]) -> String {
    let hash = Sha256::digest(data);
    let mut out = String::with_capacity(64);
    for b in hash.iter() {
        let _ = write!(out, "{b:02x}");
    }
    out
}
