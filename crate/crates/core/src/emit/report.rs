//! Human-review report: one row per rule pairing the prose with the
//! extracted automation, as CSV and a static HTML table.

use super::audit::csv_field;
use crate::guide::{Guide, VerificationStatus};

pub const REPORT_CSV_HEADER: &str =
    "Rule ID,Description,UI Path,Value,Verification Status,Error Hint";

#[derive(Debug, Clone, PartialEq)]
pub struct ReviewReport {
    pub csv: Vec<u8>,
    pub html: Vec<u8>,
}

struct Row {
    rule_id: String,
    excerpt: String,
    ui_path: String,
    value: String,
    status: String,
    hint: String,
}

/// Build the review report for a guide in rule order.
pub fn export_report(guide: &Guide) -> ReviewReport {
    let rows: Vec<Row> = guide.rules.iter().map(row_for_rule).collect();

    let mut csv = String::new();
    csv.push_str(REPORT_CSV_HEADER);
    csv.push_str("\r\n");
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\r\n",
            csv_field(&row.rule_id),
            csv_field(&row.excerpt),
            csv_field(&row.ui_path),
            csv_field(&row.value),
            csv_field(&row.status),
            csv_field(&row.hint),
        ));
    }

    let mut html = String::new();
    html.push_str("<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>");
    html.push_str(&escape_html(&guide.title));
    html.push_str(
        "</title>\n<style>table{border-collapse:collapse}td,th{border:1px solid #999;padding:4px 8px;text-align:left}th{background:#eee}</style>\n</head>\n<body>\n<h1>",
    );
    html.push_str(&escape_html(&guide.title));
    html.push_str("</h1>\n<table>\n<tr><th>Rule ID</th><th>Description</th><th>UI Path</th><th>Value</th><th>Status</th><th>Hint</th></tr>\n");
    for row in &rows {
        html.push_str(&format!(
            "<tr><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td></tr>\n",
            escape_html(&row.rule_id),
            escape_html(&row.excerpt),
            escape_html(&row.ui_path),
            escape_html(&row.value),
            escape_html(&row.status),
            escape_html(&row.hint),
        ));
    }
    html.push_str("</table>\n</body>\n</html>\n");

    ReviewReport {
        csv: csv.into_bytes(),
        html: html.into_bytes(),
    }
}

fn row_for_rule(rule: &crate::guide::Rule) -> Row {
    let automation = rule.win_gpo_automations().next();
    let description = rule
        .implementations
        .first()
        .map(|i| i.description.as_str())
        .unwrap_or_default();
    Row {
        rule_id: rule.id.clone(),
        excerpt: excerpt(description, 120),
        ui_path: automation.map(|a| a.ui_path.display()).unwrap_or_default(),
        value: automation.map(|a| a.value.summary()).unwrap_or_default(),
        status: automation
            .map(|a| match a.verification_status {
                VerificationStatus::Checked => "Checked".to_string(),
                VerificationStatus::Unchecked => "Unchecked".to_string(),
            })
            .unwrap_or_else(|| rule.extraction_status.wire_name().to_string()),
        hint: automation
            .and_then(|a| a.error_hint.clone())
            .or_else(|| rule.extraction_note.clone())
            .unwrap_or_default(),
    }
}

fn excerpt(text: &str, limit: usize) -> String {
    let single_line = text.split_whitespace().collect::<Vec<_>>().join(" ");
    if single_line.chars().count() <= limit {
        return single_line;
    }
    let cut: String = single_line.chars().take(limit).collect();
    format!("{cut}…")
}

fn escape_html(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
