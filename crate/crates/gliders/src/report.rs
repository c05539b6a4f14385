//! Deterministic text formatting for CSV reports and digests.
//!
//! Experiment outputs must be byte-identical across reruns and worker
//! counts, so all floating-point formatting goes through [`fmt_sig6`] and
//! identity strings are hashed with a fixed FNV-1a.

/// Format a float with 6 significant digits, trailing zeros trimmed.
///
/// Values with decimal exponent in `[-4, 8]` are written in plain decimal,
/// anything larger in scientific notation. The output depends only on the
/// bit pattern of the input.
pub fn fmt_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    // value rounded to 6 significant digits
    let rounded: f64 = sci.parse().expect("round-trip");
    if (-4..=8).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let plain = format!("{rounded:.decimals$}");
        let trimmed = if plain.contains('.') {
            plain.trim_end_matches('0').trim_end_matches('.')
        } else {
            &plain
        };
        return if trimmed == "-0" {
            "0".to_string()
        } else {
            trimmed.to_string()
        };
    }
    let mantissa = if mantissa.contains('.') {
        mantissa.trim_end_matches('0').trim_end_matches('.')
    } else {
        mantissa
    };
    format!("{mantissa}e{exp}")
}

/// 64-bit FNV-1a hash.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100_0000_01b3);
    }
    hash
}

/// FNV-1a hash as 16 lowercase hex digits.
pub fn digest_hex(text: &str) -> String {
    format!("{:016x}", fnv1a64(text.as_bytes()))
}
