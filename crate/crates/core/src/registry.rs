//! Registry value primitives shared by the catalog, lowering, and the
//! simulated machine state.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Registry hive a policy setting lives under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Hive {
    #[serde(rename = "HKEY_LOCAL_MACHINE")]
    LocalMachine,
    #[serde(rename = "HKEY_CURRENT_USER")]
    CurrentUser,
}

impl fmt::Display for Hive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hive::LocalMachine => f.write_str("HKEY_LOCAL_MACHINE"),
            Hive::CurrentUser => f.write_str("HKEY_CURRENT_USER"),
        }
    }
}

/// Registry value type, mirroring the native REG_* constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegistryValueType {
    #[serde(rename = "REG_DWORD")]
    Dword,
    #[serde(rename = "REG_SZ")]
    Sz,
    #[serde(rename = "REG_EXPAND_SZ")]
    ExpandSz,
    #[serde(rename = "REG_MULTI_SZ")]
    MultiSz,
    #[serde(rename = "REG_BINARY")]
    Binary,
    #[serde(rename = "REG_QWORD")]
    Qword,
}

impl RegistryValueType {
    /// Native type code used in registry.pol entries and INF value encodings.
    pub fn code(self) -> u32 {
        match self {
            RegistryValueType::Sz => 1,
            RegistryValueType::ExpandSz => 2,
            RegistryValueType::Binary => 3,
            RegistryValueType::Dword => 4,
            RegistryValueType::MultiSz => 7,
            RegistryValueType::Qword => 11,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        Some(match code {
            1 => RegistryValueType::Sz,
            2 => RegistryValueType::ExpandSz,
            3 => RegistryValueType::Binary,
            4 => RegistryValueType::Dword,
            7 => RegistryValueType::MultiSz,
            11 => RegistryValueType::Qword,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            RegistryValueType::Dword => "REG_DWORD",
            RegistryValueType::Sz => "REG_SZ",
            RegistryValueType::ExpandSz => "REG_EXPAND_SZ",
            RegistryValueType::MultiSz => "REG_MULTI_SZ",
            RegistryValueType::Binary => "REG_BINARY",
            RegistryValueType::Qword => "REG_QWORD",
        }
    }
}

impl fmt::Display for RegistryValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A typed registry payload. The payload shape always matches the type tag.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RegistryData {
    Dword(u32),
    Sz(String),
    ExpandSz(String),
    MultiSz(Vec<String>),
    Binary(Vec<u8>),
    Qword(u64),
}

impl RegistryData {
    pub fn value_type(&self) -> RegistryValueType {
        match self {
            RegistryData::Dword(_) => RegistryValueType::Dword,
            RegistryData::Sz(_) => RegistryValueType::Sz,
            RegistryData::ExpandSz(_) => RegistryValueType::ExpandSz,
            RegistryData::MultiSz(_) => RegistryValueType::MultiSz,
            RegistryData::Binary(_) => RegistryValueType::Binary,
            RegistryData::Qword(_) => RegistryValueType::Qword,
        }
    }

    /// Compact text encoding, e.g. `DWORD:1` or `SZ:some text`. This is the
    /// form used in guide files and the settings catalog.
    pub fn encode(&self) -> String {
        match self {
            RegistryData::Dword(n) => format!("DWORD:{n}"),
            RegistryData::Qword(n) => format!("QWORD:{n}"),
            RegistryData::Sz(s) => format!("SZ:{s}"),
            RegistryData::ExpandSz(s) => format!("EXPAND_SZ:{s}"),
            RegistryData::MultiSz(items) => {
                let joined = items
                    .iter()
                    .map(|s| s.replace('\\', "\\\\").replace(';', "\\;"))
                    .collect::<Vec<_>>()
                    .join(";");
                format!("MULTI_SZ:{joined}")
            }
            RegistryData::Binary(bytes) => {
                let hex: String = bytes.iter().map(|b| format!("{b:02x}")).collect();
                format!("BINARY:{hex}")
            }
        }
    }

    /// Inverse of [`RegistryData::encode`].
    pub fn decode(text: &str) -> Result<Self, DataDecodeError> {
        let (tag, payload) = text
            .split_once(':')
            .ok_or_else(|| DataDecodeError::MissingTag(text.to_string()))?;
        let parse_err = |_| DataDecodeError::BadPayload(text.to_string());
        Ok(match tag {
            "DWORD" => RegistryData::Dword(payload.parse().map_err(parse_err)?),
            "QWORD" => RegistryData::Qword(payload.parse().map_err(parse_err)?),
            "SZ" => RegistryData::Sz(payload.to_string()),
            "EXPAND_SZ" => RegistryData::ExpandSz(payload.to_string()),
            "MULTI_SZ" => RegistryData::MultiSz(split_multi_sz(payload)),
            "BINARY" => {
                if payload.len() % 2 != 0 || !payload.chars().all(|c| c.is_ascii_hexdigit()) {
                    return Err(DataDecodeError::BadPayload(text.to_string()));
                }
                let bytes = (0..payload.len())
                    .step_by(2)
                    .map(|i| u8::from_str_radix(&payload[i..i + 2], 16).unwrap())
                    .collect();
                RegistryData::Binary(bytes)
            }
            _ => return Err(DataDecodeError::UnknownTag(tag.to_string())),
        })
    }

    /// Raw little-endian bytes as stored in a registry.pol entry.
    pub fn to_pol_bytes(&self) -> Vec<u8> {
        match self {
            RegistryData::Dword(n) => n.to_le_bytes().to_vec(),
            RegistryData::Qword(n) => n.to_le_bytes().to_vec(),
            RegistryData::Sz(s) | RegistryData::ExpandSz(s) => utf16le_z(s),
            RegistryData::MultiSz(items) => {
                let mut out = Vec::new();
                for item in items {
                    out.extend(utf16le_z(item));
                }
                out.extend([0, 0]);
                out
            }
            RegistryData::Binary(bytes) => bytes.clone(),
        }
    }

    /// Decode registry.pol entry data for the given value type.
    pub fn from_pol_bytes(ty: RegistryValueType, data: &[u8]) -> Result<Self, DataDecodeError> {
        let bad = || DataDecodeError::BadPayload(format!("{} data of {} bytes", ty, data.len()));
        Ok(match ty {
            RegistryValueType::Dword => {
                let arr: [u8; 4] = data.try_into().map_err(|_| bad())?;
                RegistryData::Dword(u32::from_le_bytes(arr))
            }
            RegistryValueType::Qword => {
                let arr: [u8; 8] = data.try_into().map_err(|_| bad())?;
                RegistryData::Qword(u64::from_le_bytes(arr))
            }
            RegistryValueType::Sz => RegistryData::Sz(utf16le_z_decode(data).ok_or_else(bad)?),
            RegistryValueType::ExpandSz => {
                RegistryData::ExpandSz(utf16le_z_decode(data).ok_or_else(bad)?)
            }
            RegistryValueType::MultiSz => {
                RegistryData::MultiSz(multi_sz_decode(data).ok_or_else(bad)?)
            }
            RegistryValueType::Binary => RegistryData::Binary(data.to_vec()),
        })
    }
}

fn split_multi_sz(payload: &str) -> Vec<String> {
    if payload.is_empty() {
        return Vec::new();
    }
    let mut items = Vec::new();
    let mut current = String::new();
    let mut chars = payload.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => {
                if let Some(next) = chars.next() {
                    current.push(next);
                }
            }
            ';' => items.push(std::mem::take(&mut current)),
            _ => current.push(c),
        }
    }
    items.push(current);
    items
}

fn utf16le_z(s: &str) -> Vec<u8> {
    let mut out: Vec<u8> = s.encode_utf16().flat_map(|u| u.to_le_bytes()).collect();
    out.extend([0, 0]);
    out
}

fn utf16le_z_decode(data: &[u8]) -> Option<String> {
    if !data.len().is_multiple_of(2) {
        return None;
    }
    let units: Vec<u16> = data
        .chunks_exact(2)
        .map(|c| u16::from_le_bytes([c[0], c[1]]))
        .collect();
    let end = units.iter().position(|&u| u == 0).unwrap_or(units.len());
    String::from_utf16(&units[..end]).ok()
}

fn multi_sz_decode(data: &[u8]) -> Option<Vec<String>> {
    if !data.len().is_multiple_of(2) {
        return None;
    }
    let units: Vec<u16> = data
        .chunks_exact(2)
        .map(|c| u16::from_le_bytes([c[0], c[1]]))
        .collect();
    let mut items = Vec::new();
    let mut start = 0;
    for (i, &u) in units.iter().enumerate() {
        if u == 0 {
            if i == start {
                // double NUL terminator
                return Some(items);
            }
            items.push(String::from_utf16(&units[start..i]).ok()?);
            start = i + 1;
        }
    }
    // missing final terminator: accept what we have
    if start < units.len() {
        items.push(String::from_utf16(&units[start..]).ok()?);
    }
    Some(items)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DataDecodeError {
    #[error("registry data `{0}` has no TYPE: tag")]
    MissingTag(String),
    #[error("unknown registry data tag `{0}`")]
    UnknownTag(String),
    #[error("malformed registry data payload in `{0}`")]
    BadPayload(String),
}

impl Serialize for RegistryData {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.encode())
    }
}

impl<'de> Deserialize<'de> for RegistryData {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        RegistryData::decode(&text).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encode_decode_round_trip() {
        let samples = vec![
            RegistryData::Dword(0),
            RegistryData::Dword(u32::MAX),
            RegistryData::Qword(1 << 40),
            RegistryData::Sz("plain".into()),
            RegistryData::Sz("with:colon".into()),
            RegistryData::ExpandSz("%SystemRoot%\\x".into()),
            RegistryData::MultiSz(vec!["a".into(), "b;c".into(), "d\\e".into()]),
            RegistryData::MultiSz(vec![]),
            RegistryData::Binary(vec![0, 1, 0xfe, 0xff]),
        ];
        for d in samples {
            assert_eq!(RegistryData::decode(&d.encode()).unwrap(), d, "{}", d.encode());
        }
    }

    #[test]
    fn decode_rejects_garbage() {
        assert!(RegistryData::decode("no-tag-here").is_err());
        assert!(RegistryData::decode("WAT:1").is_err());
        assert!(RegistryData::decode("DWORD:notanumber").is_err());
        assert!(RegistryData::decode("BINARY:abc").is_err());
    }

    #[test]
    fn pol_bytes_round_trip() {
        let samples = vec![
            RegistryData::Dword(7),
            RegistryData::Qword(u64::MAX),
            RegistryData::Sz("hello".into()),
            RegistryData::MultiSz(vec!["one".into(), "two".into()]),
            RegistryData::Binary(vec![1, 2, 3]),
        ];
        for d in samples {
            let bytes = d.to_pol_bytes();
            assert_eq!(RegistryData::from_pol_bytes(d.value_type(), &bytes).unwrap(), d);
        }
    }

    #[test]
    fn type_codes_match_native_constants() {
        assert_eq!(RegistryValueType::Sz.code(), 1);
        assert_eq!(RegistryValueType::Dword.code(), 4);
        assert_eq!(RegistryValueType::MultiSz.code(), 7);
        assert_eq!(RegistryValueType::Qword.code(), 11);
        for ty in [
            RegistryValueType::Sz,
            RegistryValueType::ExpandSz,
            RegistryValueType::Binary,
            RegistryValueType::Dword,
            RegistryValueType::MultiSz,
            RegistryValueType::Qword,
        ] {
            assert_eq!(RegistryValueType::from_code(ty.code()), Some(ty));
        }
    }
}
