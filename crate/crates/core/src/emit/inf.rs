//! Security-template (GptTmpl.inf) writer: a UTF-16LE INI with the
//! sections the security engine consumes.

use crate::lower::{SeceditAutomation, SeceditSection};
use std::collections::BTreeMap;

/// Serialize secedit automations into a template file. Sections appear in
/// the engine's canonical order with keys sorted; repeated keys keep the
/// last value.
pub fn emit_inf(entries: &[SeceditAutomation]) -> Vec<u8> {
    let mut sections: BTreeMap<SeceditSection, BTreeMap<String, String>> = BTreeMap::new();
    for entry in entries {
        sections
            .entry(entry.section)
            .or_default()
            .insert(entry.key.clone(), entry.value.clone());
    }

    let mut text = String::new();
    text.push_str("[Unicode]\r\nUnicode=yes\r\n");
    text.push_str("[Version]\r\nsignature=\"$CHICAGO$\"\r\nRevision=1\r\n");
    for section in [
        SeceditSection::SystemAccess,
        SeceditSection::PrivilegeRights,
        SeceditSection::RegistryValues,
    ] {
        if let Some(lines) = sections.get(&section) {
            text.push_str(&format!("[{}]\r\n", section.heading()));
            for (key, value) in lines {
                text.push_str(&format!("{key} = {value}\r\n"));
            }
        }
    }

    let mut bytes = vec![0xff, 0xfe];
    bytes.extend(text.encode_utf16().flat_map(|u| u.to_le_bytes()));
    bytes
}

/// Decode helper for tests and the simulator: BOM-checked UTF-16LE to text.
pub fn decode_inf(bytes: &[u8]) -> Option<String> {
    if bytes.len() < 2 || bytes[..2] != [0xff, 0xfe] || !bytes.len().is_multiple_of(2) {
        return None;
    }
    let units: Vec<u16> = bytes[2..]
        .chunks_exact(2)
        .map(|c| u16::from_le_bytes([c[0], c[1]]))
        .collect();
    String::from_utf16(&units).ok()
}
