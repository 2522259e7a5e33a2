//! Minimal XCCDF importer: Benchmark, Group, and Rule with title,
//! description, and fixtext. Check elements (OVAL references) ride along as
//! opaque text; this toolchain never interprets them.

use super::{Guide, GuideError, GuideSource, Implementation, Rule};
use roxmltree::{Document, Node};

pub fn import_xccdf(xml: &str) -> Result<Guide, GuideError> {
    let doc = Document::parse(xml).map_err(|e| GuideError::Parse {
        message: e.to_string(),
        location: format!("line {} column {}", e.pos().row, e.pos().col),
    })?;
    let root = doc.root_element();
    if root.tag_name().name() != "Benchmark" {
        return Err(GuideError::Schema(format!(
            "expected a Benchmark root element, got `{}`",
            root.tag_name().name()
        )));
    }

    let title = child_text(&root, "title").unwrap_or_default();
    let mut guide = Guide::new(title, GuideSource::Xccdf);

    // descendants() walks in document order, which flattens nested groups
    // exactly the way the printed guide lists its rules
    for node in doc.descendants().filter(|n| n.is_element() && n.tag_name().name() == "Rule") {
        guide.rules.push(import_rule(&node, xml)?);
    }

    guide.validate_rule_ids()?;
    Ok(guide)
}

fn import_rule(node: &Node<'_, '_>, source: &str) -> Result<Rule, GuideError> {
    let id = node
        .attribute("id")
        .ok_or_else(|| GuideError::Schema("Rule element without an id".to_string()))?;
    let rule_text = child_text(node, "title").ok_or_else(|| {
        GuideError::Schema(format!("rule `{id}` has no title"))
    })?;

    let mut rule = Rule::new(id, rule_text);
    rule.description = child_text(node, "description");
    let fixtext = child_text(node, "fixtext").unwrap_or_default();
    rule.implementations.push(Implementation {
        description: fixtext,
        automations: Vec::new(),
    });
    rule.check = node
        .children()
        .find(|c| c.is_element() && c.tag_name().name() == "check")
        .map(|c| source[c.range()].to_string());
    Ok(rule)
}

/// Concatenated text content of the first child with the given local name.
fn child_text(node: &Node<'_, '_>, name: &str) -> Option<String> {
    let child = node
        .children()
        .find(|c| c.is_element() && c.tag_name().name() == name)?;
    let mut text = String::new();
    for descendant in child.descendants().filter(|n| n.is_text()) {
        text.push_str(descendant.text().unwrap_or(""));
    }
    let trimmed = text.trim().to_string();
    if trimmed.is_empty() {
        None
    } else {
        Some(trimmed)
    }
}
