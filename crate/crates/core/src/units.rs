//! Byte-size units and conversions.
//!
//! Internally every power quantity is held in bytes as `f64`; the binary
//! prefixes below are only used at the I/O boundary.

use std::fmt;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

pub const KIB: f64 = 1024.0;
pub const MIB: f64 = KIB * 1024.0;
pub const GIB: f64 = MIB * 1024.0;
pub const TIB: f64 = GIB * 1024.0;
pub const PIB: f64 = TIB * 1024.0;
pub const EIB: f64 = PIB * 1024.0;

/// Parse a byte quantity such as `"1.5 PiB"`, `"32GiB"` or `"1024"`.
pub fn parse_bytes(text: &str) -> Result<f64, String> {
    let trimmed = text.trim();
    let split = trimmed
        .find(|c: char| c.is_ascii_alphabetic())
        .unwrap_or(trimmed.len());
    let (number, unit) = trimmed.split_at(split);
    let value: f64 = number
        .trim()
        .parse()
        .map_err(|_| format!("invalid byte quantity `{text}`"))?;
    let scale = match unit.trim() {
        "" | "B" => 1.0,
        "KiB" => KIB,
        "MiB" => MIB,
        "GiB" => GIB,
        "TiB" => TIB,
        "PiB" => PIB,
        "EiB" => EIB,
        other => return Err(format!("unknown byte unit `{other}` in `{text}`")),
    };
    let bytes = value * scale;
    if !bytes.is_finite() || bytes < 0.0 {
        return Err(format!("byte quantity must be finite and non-negative: `{text}`"));
    }
    Ok(bytes)
}

/// A byte quantity that deserializes from either a bare number of bytes or
/// a string with a binary suffix. Serializes as a bare number.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Bytes(pub f64);

impl Bytes {
    pub fn pib(v: f64) -> Self {
        Bytes(v * PIB)
    }

    pub fn eib(v: f64) -> Self {
        Bytes(v * EIB)
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Bytes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} B", self.0)
    }
}

impl Serialize for Bytes {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Bytes {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct Visitor;

        impl de::Visitor<'_> for Visitor {
            type Value = Bytes;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a byte count or a string like \"1.5 PiB\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Bytes, E> {
                if v.is_finite() && v >= 0.0 {
                    Ok(Bytes(v))
                } else {
                    Err(E::custom("byte quantity must be finite and non-negative"))
                }
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Bytes, E> {
                self.visit_f64(v as f64)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Bytes, E> {
                self.visit_f64(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Bytes, E> {
                parse_bytes(v).map(Bytes).map_err(E::custom)
            }
        }

        deserializer.deserialize_any(Visitor)
    }
}

/// Format a number with 12 significant digits, `.` as decimal separator and
/// no exponent or grouping characters.
pub fn fmt_sig12(value: f64) -> String {
    if !value.is_finite() {
        return value.to_string();
    }
    if value == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{value:.11e}").parse().unwrap_or(value);
    format!("{rounded}")
}
