//! Small shared helpers: stable hashing and float formatting for reports.

/// FNV-1a 64-bit over raw bytes. Stable across platforms and releases, which
/// is what run manifests and placement digests need.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf29ce484222325;
    const PRIME: u64 = 0x100000001b3;
    let mut h = OFFSET;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(PRIME);
    }
    h
}

/// Shortest round-trip formatting for floats in CSV/JSON reports. Every
/// emitter uses this so that re-evaluating a placement reproduces report
/// rows byte for byte.
pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        // normalize -0.0
        "0".to_string()
    } else {
        format!("{v}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_known_vectors() {
        // Published FNV-1a test vectors.
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn fmt_round_trips() {
        for v in [0.5, 1.0, 3.1e-9, 123456.789, -2.25] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_f64(-0.0), "0");
    }
}
