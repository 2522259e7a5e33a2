//! Registry policy file (registry.pol) reader and writer.
//!
//! The format: a magic `PReg` followed by a little-endian version 1, then
//! one `[key;value;type;size;data]` record per entry, everything except the
//! raw data encoded as UTF-16LE code units. Key and value strings are
//! NUL-terminated, type and size are 32-bit little-endian, data is exactly
//! `size` bytes. Value deletions use the `**Del.<name>` convention.

use super::EmitError;
use crate::lower::{ConfigScope, RegistryAction, RegistryAutomation};
use crate::registry::{RegistryData, RegistryValueType};

pub const POL_MAGIC: [u8; 4] = [0x50, 0x52, 0x65, 0x67];
pub const POL_VERSION: u32 = 1;

const DELETE_PREFIX: &str = "**Del.";

/// Serialize registry automations into a policy file. All entries must share
/// one scope; Machine and User policies live in separate files.
pub fn emit_pol(entries: &[RegistryAutomation]) -> Result<Vec<u8>, EmitError> {
    if let Some(first) = entries.first() {
        if let Some(stray) = entries.iter().find(|e| e.scope != first.scope) {
            return Err(EmitError::Scope {
                first: first.scope,
                second: stray.scope,
            });
        }
    }
    let mut sorted: Vec<&RegistryAutomation> = entries.iter().collect();
    sorted.sort_by(|a, b| {
        let key = |e: &RegistryAutomation| {
            (e.registry_key.to_lowercase(), e.value_name.to_lowercase())
        };
        key(a).cmp(&key(b))
    });

    let mut out = Vec::new();
    out.extend_from_slice(&POL_MAGIC);
    out.extend_from_slice(&POL_VERSION.to_le_bytes());
    for entry in sorted {
        let (value_field, ty, data) = match &entry.action {
            RegistryAction::Set(data) => (
                entry.value_name.clone(),
                data.value_type().code(),
                data.to_pol_bytes(),
            ),
            RegistryAction::Delete => (
                format!("{DELETE_PREFIX}{}", entry.value_name),
                RegistryValueType::Sz.code(),
                // a single space, NUL terminated
                vec![0x20, 0x00, 0x00, 0x00],
            ),
        };
        push_utf16(&mut out, "[");
        push_utf16z(&mut out, &entry.registry_key);
        push_utf16(&mut out, ";");
        push_utf16z(&mut out, &value_field);
        push_utf16(&mut out, ";");
        out.extend_from_slice(&ty.to_le_bytes());
        push_utf16(&mut out, ";");
        out.extend_from_slice(&(data.len() as u32).to_le_bytes());
        push_utf16(&mut out, ";");
        out.extend_from_slice(&data);
        push_utf16(&mut out, "]");
    }
    Ok(out)
}

/// Inverse of [`emit_pol`]. The file format does not carry the scope, so the
/// caller names it (one file per scope).
pub fn parse_pol(bytes: &[u8], scope: ConfigScope) -> Result<Vec<RegistryAutomation>, EmitError> {
    if bytes.len() < 8 || bytes[..4] != POL_MAGIC {
        return Err(EmitError::Format {
            message: "bad magic, not a registry policy file".to_string(),
            offset: 0,
        });
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != POL_VERSION {
        return Err(EmitError::Format {
            message: format!("unsupported registry policy version {version}"),
            offset: 4,
        });
    }

    let mut reader = Utf16Reader {
        bytes,
        offset: 8,
    };
    let mut entries = Vec::new();
    while !reader.at_end() {
        reader.expect_char('[')?;
        let registry_key = reader.read_string()?;
        reader.expect_char(';')?;
        let value_field = reader.read_string()?;
        reader.expect_char(';')?;
        let ty_code = reader.read_u32()?;
        reader.expect_char(';')?;
        let size = reader.read_u32()? as usize;
        reader.expect_char(';')?;
        let data_offset = reader.offset;
        let data = reader.read_bytes(size)?;
        reader.expect_char(']')?;

        let ty = RegistryValueType::from_code(ty_code).ok_or(EmitError::Format {
            message: format!("unknown registry value type code {ty_code}"),
            offset: data_offset,
        })?;
        let (value_name, action) = match value_field.strip_prefix(DELETE_PREFIX) {
            Some(name) => (name.to_string(), RegistryAction::Delete),
            None => {
                let data = RegistryData::from_pol_bytes(ty, &data).map_err(|e| {
                    EmitError::Format {
                        message: e.to_string(),
                        offset: data_offset,
                    }
                })?;
                (value_field, RegistryAction::Set(data))
            }
        };
        entries.push(RegistryAutomation {
            scope,
            registry_key,
            value_name,
            action,
        });
    }
    Ok(entries)
}

fn push_utf16(out: &mut Vec<u8>, text: &str) {
    out.extend(text.encode_utf16().flat_map(|u| u.to_le_bytes()));
}

fn push_utf16z(out: &mut Vec<u8>, text: &str) {
    push_utf16(out, text);
    out.extend([0, 0]);
}

struct Utf16Reader<'a> {
    bytes: &'a [u8],
    offset: usize,
}

impl Utf16Reader<'_> {
    fn at_end(&self) -> bool {
        self.offset >= self.bytes.len()
    }

    fn error(&self, message: impl Into<String>) -> EmitError {
        EmitError::Format {
            message: message.into(),
            offset: self.offset,
        }
    }

    fn read_unit(&mut self) -> Result<u16, EmitError> {
        if self.offset + 2 > self.bytes.len() {
            return Err(self.error("truncated entry"));
        }
        let unit = u16::from_le_bytes([self.bytes[self.offset], self.bytes[self.offset + 1]]);
        self.offset += 2;
        Ok(unit)
    }

    fn expect_char(&mut self, expected: char) -> Result<(), EmitError> {
        let at = self.offset;
        let unit = self.read_unit()?;
        if unit != expected as u16 {
            return Err(EmitError::Format {
                message: format!(
                    "expected `{expected}`, found U+{unit:04X}"
                ),
                offset: at,
            });
        }
        Ok(())
    }

    fn read_string(&mut self) -> Result<String, EmitError> {
        let mut units = Vec::new();
        loop {
            let unit = self.read_unit()?;
            if unit == 0 {
                break;
            }
            units.push(unit);
        }
        String::from_utf16(&units).map_err(|_| self.error("invalid UTF-16 in entry"))
    }

    fn read_u32(&mut self) -> Result<u32, EmitError> {
        if self.offset + 4 > self.bytes.len() {
            return Err(self.error("truncated entry"));
        }
        let value = u32::from_le_bytes(self.bytes[self.offset..self.offset + 4].try_into().unwrap());
        self.offset += 4;
        Ok(value)
    }

    fn read_bytes(&mut self, len: usize) -> Result<Vec<u8>, EmitError> {
        if self.offset + len > self.bytes.len() {
            return Err(self.error(format!("entry data of {len} bytes runs past the file end")));
        }
        let data = self.bytes[self.offset..self.offset + len].to_vec();
        self.offset += len;
        Ok(data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(key: &str, name: &str, action: RegistryAction) -> RegistryAutomation {
        RegistryAutomation {
            scope: ConfigScope::Computer,
            registry_key: key.to_string(),
            value_name: name.to_string(),
            action,
        }
    }

    #[test]
    fn empty_entry_list_is_exactly_the_header() {
        let bytes = emit_pol(&[]).unwrap();
        assert_eq!(bytes, vec![0x50, 0x52, 0x65, 0x67, 0x01, 0x00, 0x00, 0x00]);
        assert!(parse_pol(&bytes, ConfigScope::Computer).unwrap().is_empty());
    }

    #[test]
    fn entries_sort_by_key_and_value_name() {
        let entries = vec![
            entry("Z\\Key", "b", RegistryAction::Set(RegistryData::Dword(1))),
            entry("a\\key", "Z", RegistryAction::Set(RegistryData::Dword(2))),
            entry("A\\Key", "a", RegistryAction::Set(RegistryData::Dword(3))),
        ];
        let parsed = parse_pol(&emit_pol(&entries).unwrap(), ConfigScope::Computer).unwrap();
        let order: Vec<&str> = parsed.iter().map(|e| e.value_name.as_str()).collect();
        assert_eq!(order, vec!["a", "Z", "b"]);
    }

    #[test]
    fn mixed_scopes_are_rejected() {
        let mut second = entry("K", "V", RegistryAction::Set(RegistryData::Dword(1)));
        second.scope = ConfigScope::User;
        let entries = vec![
            entry("K", "V", RegistryAction::Set(RegistryData::Dword(1))),
            second,
        ];
        assert!(matches!(emit_pol(&entries), Err(EmitError::Scope { .. })));
    }

    #[test]
    fn delete_actions_round_trip_through_the_del_convention() {
        let entries = vec![entry("Some\\Key", "Gone", RegistryAction::Delete)];
        let bytes = emit_pol(&entries).unwrap();
        let parsed = parse_pol(&bytes, ConfigScope::Computer).unwrap();
        assert_eq!(parsed, entries);
    }

    #[test]
    fn corrupted_size_field_is_a_format_error_with_offset() {
        let entries = vec![entry("K", "V", RegistryAction::Set(RegistryData::Dword(7)))];
        let mut bytes = emit_pol(&entries).unwrap();
        // inflate the size field (key "K" + nul + ';' + "V" + nul + ';' + ty + ';')
        let size_at = 8 + 2 * ('['.len_utf16() + 2 + 1 + 2 + 1) + 4 + 2;
        bytes[size_at] = 0xff;
        match parse_pol(&bytes, ConfigScope::Computer) {
            Err(EmitError::Format { offset, .. }) => assert!(offset > 8),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn bad_magic_is_rejected() {
        assert!(matches!(
            parse_pol(b"NOPE", ConfigScope::Computer),
            Err(EmitError::Format { offset: 0, .. })
        ));
    }
}
