//! audit.csv writer: the CSV layout auditpol and LGPO consume.

use crate::guide::AuditValue;
use crate::lower::AuditAutomation;

pub const AUDIT_CSV_HEADER: &str =
    "Machine Name,Policy Target,Subcategory,Subcategory GUID,Inclusion Setting,Exclusion Setting,Setting Value";

/// One row per subcategory, UTF-8 with CRLF line endings, sorted by
/// subcategory name for diff-stable output.
pub fn emit_audit_csv(entries: &[AuditAutomation]) -> Vec<u8> {
    let mut sorted: Vec<&AuditAutomation> = entries.iter().collect();
    sorted.sort_by(|a, b| {
        (a.subcategory.to_lowercase(), &a.guid).cmp(&(b.subcategory.to_lowercase(), &b.guid))
    });

    let mut text = String::new();
    text.push_str(AUDIT_CSV_HEADER);
    text.push_str("\r\n");
    for entry in sorted {
        let inclusion = AuditValue::from_code(entry.setting_value)
            .map(|v| v.display())
            .unwrap_or("No Auditing");
        text.push_str(&format!(
            ",System,{},{},{},,{}\r\n",
            csv_field(&entry.subcategory),
            csv_field(&entry.guid),
            csv_field(inclusion),
            entry.setting_value
        ));
    }
    text.into_bytes()
}

/// Quote a field when it carries a comma, quote, or newline.
pub fn csv_field(text: &str) -> String {
    if text.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

/// Minimal CSV reader for round-trip tests and the simulator: splits one
/// record per line, honoring quoted fields.
pub fn parse_csv(text: &str) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for line in text.lines() {
        if line.is_empty() {
            continue;
        }
        let mut fields = Vec::new();
        let mut field = String::new();
        let mut in_quotes = false;
        let mut chars = line.chars().peekable();
        while let Some(c) = chars.next() {
            match c {
                '"' if in_quotes && chars.peek() == Some(&'"') => {
                    chars.next();
                    field.push('"');
                }
                '"' => in_quotes = !in_quotes,
                ',' if !in_quotes => fields.push(std::mem::take(&mut field)),
                _ => field.push(c),
            }
        }
        fields.push(field);
        rows.push(fields);
    }
    rows
}
