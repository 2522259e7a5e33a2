//! Importer for Administrative Template definition files.
//!
//! An ADMX file declares categories, policies, and value constraints; the
//! companion ADML file supplies the display strings the policy editor shows.
//! The importer resolves category chains into UI paths and carries the value
//! constraints over into [`SettingDefinition`]s.

use super::{CatalogError, ElementKind, SettingDefinition, SettingElement};
use crate::paths::{ClassRoot, PolicyPath};
use crate::registry::{Hive, RegistryData, RegistryValueType};
use indexmap::IndexMap;
use roxmltree::{Document, Node};
use std::collections::HashMap;

/// Result of importing one ADMX/ADML pair.
#[derive(Debug, Default)]
pub struct AdmxImport {
    pub definitions: Vec<SettingDefinition>,
    pub warnings: Vec<String>,
}

/// Segment inserted between the class root and the category chain: ADMX-backed
/// settings all appear under this node in the policy editor, and guide prose
/// spells paths the same way.
const ADMX_ROOT_SEGMENT: &str = "Administrative Templates";

struct Category {
    display_ref: String,
    parent: Option<String>,
}

/// Parse one ADMX document with its ADML companion. `file_stem` feeds the
/// stable setting ids (`<stem>__<policy-name>`, lowercased).
pub fn load_admx(
    admx_document: &str,
    adml_document: &str,
    file_stem: &str,
) -> Result<AdmxImport, CatalogError> {
    let admx = parse_xml(admx_document, "ADMX")?;
    let adml = parse_xml(adml_document, "ADML")?;

    let mut import = AdmxImport::default();
    let strings = read_string_table(&adml);
    let presentations = read_presentation_table(&adml);

    let mut categories: HashMap<String, Category> = HashMap::new();
    for node in descendants_named(&admx, "category") {
        let name = match node.attribute("name") {
            Some(n) => n.to_string(),
            None => continue,
        };
        categories.insert(
            name,
            Category {
                display_ref: node.attribute("displayName").unwrap_or("").to_string(),
                parent: node
                    .children()
                    .find(|c| c.has_tag_name_local("parentCategory"))
                    .and_then(|c| c.attribute("ref"))
                    .map(|s| s.to_string()),
            },
        );
    }

    for policy in descendants_named(&admx, "policy") {
        let def = import_policy(
            policy,
            &categories,
            &strings,
            &presentations,
            file_stem,
            &mut import.warnings,
        )?;
        import.definitions.push(def);
    }
    Ok(import)
}

fn parse_xml<'a>(text: &'a str, what: &str) -> Result<Document<'a>, CatalogError> {
    Document::parse(text).map_err(|e| CatalogError::Parse {
        message: format!("{what}: {e}"),
        location: format!("line {} column {}", e.pos().row, e.pos().col),
    })
}

trait NodeExt<'a> {
    fn has_tag_name_local(&self, name: &str) -> bool;
}

impl<'a, 'input> NodeExt<'a> for Node<'a, 'input> {
    fn has_tag_name_local(&self, name: &str) -> bool {
        self.is_element() && self.tag_name().name() == name
    }
}

fn descendants_named<'a, 'input>(
    doc: &'a Document<'input>,
    name: &'a str,
) -> impl Iterator<Item = Node<'a, 'input>> {
    doc.descendants().filter(move |n| n.has_tag_name_local(name))
}

fn read_string_table(adml: &Document<'_>) -> HashMap<String, String> {
    descendants_named(adml, "string")
        .filter_map(|n| {
            let id = n.attribute("id")?;
            Some((id.to_string(), n.text().unwrap_or("").trim().to_string()))
        })
        .collect()
}

/// presentation id -> (element refId -> control label)
fn read_presentation_table(adml: &Document<'_>) -> HashMap<String, HashMap<String, String>> {
    let mut table = HashMap::new();
    for presentation in descendants_named(adml, "presentation") {
        let id = match presentation.attribute("id") {
            Some(id) => id.to_string(),
            None => continue,
        };
        let mut labels = HashMap::new();
        for control in presentation.children().filter(|c| c.is_element()) {
            let ref_id = match control.attribute("refId") {
                Some(r) => r.to_string(),
                None => continue,
            };
            let label = control
                .children()
                .find(|c| c.has_tag_name_local("label"))
                .and_then(|l| l.text())
                .or_else(|| control.text())
                .unwrap_or("")
                .trim()
                .to_string();
            if !label.is_empty() {
                labels.insert(ref_id, label);
            }
        }
        table.insert(id, labels);
    }
    table
}

/// Resolve a `$(string.X)` reference; dangling references fall back to the
/// raw id so a missing ADML never aborts the import.
fn resolve_string(
    reference: &str,
    strings: &HashMap<String, String>,
    warnings: &mut Vec<String>,
    context: &str,
) -> String {
    match reference
        .strip_prefix("$(string.")
        .and_then(|rest| rest.strip_suffix(')'))
    {
        Some(id) => match strings.get(id) {
            Some(text) => text.clone(),
            None => {
                warnings.push(format!(
                    "{context}: string reference `{id}` not found in ADML; using the raw id"
                ));
                id.to_string()
            }
        },
        None => reference.to_string(),
    }
}

fn import_policy(
    policy: Node<'_, '_>,
    categories: &HashMap<String, Category>,
    strings: &HashMap<String, String>,
    presentations: &HashMap<String, HashMap<String, String>>,
    file_stem: &str,
    warnings: &mut Vec<String>,
) -> Result<SettingDefinition, CatalogError> {
    let name = policy
        .attribute("name")
        .ok_or_else(|| CatalogError::Schema("policy without a name attribute".to_string()))?;
    let class = policy.attribute("class").unwrap_or("Machine");
    let (class_root, hive) = match class {
        "User" => (ClassRoot::UserConfiguration, Hive::CurrentUser),
        "Machine" => (ClassRoot::ComputerConfiguration, Hive::LocalMachine),
        other => {
            warnings.push(format!(
                "policy `{name}`: class `{other}` treated as Machine"
            ));
            (ClassRoot::ComputerConfiguration, Hive::LocalMachine)
        }
    };

    let display_name = resolve_string(
        policy.attribute("displayName").unwrap_or(""),
        strings,
        warnings,
        &format!("policy `{name}`"),
    );

    let mut chain = Vec::new();
    let mut cursor = policy
        .children()
        .find(|c| c.has_tag_name_local("parentCategory"))
        .and_then(|c| c.attribute("ref"))
        .map(|s| s.to_string());
    let mut hops = 0;
    while let Some(ref cat_name) = cursor {
        hops += 1;
        if hops > 64 {
            return Err(CatalogError::Schema(format!(
                "policy `{name}`: category chain does not terminate (cycle through `{cat_name}`)"
            )));
        }
        match categories.get(cat_name) {
            Some(category) => {
                chain.push(resolve_string(
                    &category.display_ref,
                    strings,
                    warnings,
                    &format!("category `{cat_name}`"),
                ));
                cursor = category.parent.clone();
            }
            None if cat_name.contains(':') => {
                // reference into another template file; chain roots there
                warnings.push(format!(
                    "policy `{name}`: external category `{cat_name}` not resolvable, chain truncated"
                ));
                cursor = None;
            }
            None => {
                return Err(CatalogError::Schema(format!(
                    "policy `{name}` references undefined category `{cat_name}`"
                )));
            }
        }
    }
    chain.reverse();

    let mut segments = vec![ADMX_ROOT_SEGMENT.to_string()];
    segments.extend(chain);
    segments.push(display_name);
    let ui_path = PolicyPath::from_parts(class_root, segments);

    let enabled_data = policy
        .children()
        .find(|c| c.has_tag_name_local("enabledValue"))
        .map(|n| read_value_node(&n, name))
        .transpose()?;
    let disabled_data = policy
        .children()
        .find(|c| c.has_tag_name_local("disabledValue"))
        .map(|n| read_value_node(&n, name))
        .transpose()?;

    let value_type = enabled_data
        .as_ref()
        .or(disabled_data.as_ref())
        .map(|d: &RegistryData| d.value_type())
        .unwrap_or(RegistryValueType::Dword);

    let presentation_labels = policy
        .attribute("presentation")
        .and_then(|p| p.strip_prefix("$(presentation."))
        .and_then(|p| p.strip_suffix(')'))
        .and_then(|id| presentations.get(id));

    let mut elements = Vec::new();
    let mut automatable = true;
    if let Some(elements_node) = policy
        .children()
        .find(|c| c.has_tag_name_local("elements"))
    {
        for element in elements_node.children().filter(|c| c.is_element()) {
            match import_element(&element, strings, presentation_labels, name, warnings)? {
                Some(e) => elements.push(e),
                None => automatable = false,
            }
        }
    }

    Ok(SettingDefinition {
        id: format!(
            "{}__{}",
            file_stem.to_lowercase(),
            name.to_lowercase()
        ),
        ui_path,
        hive,
        key: policy.attribute("key").unwrap_or("").to_string(),
        value_name: policy.attribute("valueName").unwrap_or("").to_string(),
        value_type,
        enabled_data,
        disabled_data,
        elements,
        automatable,
    })
}

/// Read the typed value inside `<enabledValue>`, `<trueValue>`, `<value>`, …
fn read_value_node(node: &Node<'_, '_>, policy: &str) -> Result<RegistryData, CatalogError> {
    let inner = node
        .children()
        .find(|c| c.is_element())
        .ok_or_else(|| CatalogError::Schema(format!("policy `{policy}`: empty value element")))?;
    match inner.tag_name().name() {
        "decimal" => {
            let value = inner.attribute("value").unwrap_or("0");
            let parsed = value.parse::<u32>().map_err(|_| {
                CatalogError::Schema(format!(
                    "policy `{policy}`: decimal value `{value}` is not a 32-bit unsigned integer"
                ))
            })?;
            Ok(RegistryData::Dword(parsed))
        }
        "longDecimal" => {
            let value = inner.attribute("value").unwrap_or("0");
            let parsed = value.parse::<u64>().map_err(|_| {
                CatalogError::Schema(format!(
                    "policy `{policy}`: longDecimal value `{value}` is not a 64-bit unsigned integer"
                ))
            })?;
            Ok(RegistryData::Qword(parsed))
        }
        "string" => Ok(RegistryData::Sz(inner.text().unwrap_or("").to_string())),
        other => Err(CatalogError::Schema(format!(
            "policy `{policy}`: unsupported value element `{other}`"
        ))),
    }
}

/// `Ok(None)` marks an element kind outside the supported subset; the policy
/// is still imported but flagged non-automatable.
fn import_element(
    element: &Node<'_, '_>,
    strings: &HashMap<String, String>,
    presentation_labels: Option<&HashMap<String, String>>,
    policy: &str,
    warnings: &mut Vec<String>,
) -> Result<Option<SettingElement>, CatalogError> {
    let element_id = element.attribute("id").unwrap_or("").to_string();
    let value_name = element.attribute("valueName").unwrap_or("").to_string();
    let label = presentation_labels
        .and_then(|labels| labels.get(&element_id))
        .cloned()
        .unwrap_or_else(|| element_id.clone());

    let kind = match element.tag_name().name() {
        "boolean" => {
            let read_side = |side: &str| -> Result<Option<RegistryData>, CatalogError> {
                element
                    .children()
                    .find(|c| c.has_tag_name_local(side))
                    .map(|n| read_value_node(&n, policy))
                    .transpose()
            };
            ElementKind::Boolean {
                true_data: read_side("trueValue")?.unwrap_or(RegistryData::Dword(1)),
                false_data: read_side("falseValue")?.unwrap_or(RegistryData::Dword(0)),
            }
        }
        "decimal" => ElementKind::Decimal {
            min: element
                .attribute("minValue")
                .unwrap_or("0")
                .parse()
                .map_err(|_| bad_attr(policy, &element_id, "minValue"))?,
            max: element
                .attribute("maxValue")
                .unwrap_or("9999")
                .parse()
                .map_err(|_| bad_attr(policy, &element_id, "maxValue"))?,
        },
        "text" => ElementKind::Text {
            max_length: element
                .attribute("maxLength")
                .unwrap_or("1023")
                .parse()
                .map_err(|_| bad_attr(policy, &element_id, "maxLength"))?,
        },
        "enum" => {
            let mut items = IndexMap::new();
            for item in element
                .children()
                .filter(|c| c.has_tag_name_local("item"))
            {
                let display = resolve_string(
                    item.attribute("displayName").unwrap_or(""),
                    strings,
                    warnings,
                    &format!("policy `{policy}` enum `{element_id}`"),
                );
                let value_node = item
                    .children()
                    .find(|c| c.has_tag_name_local("value"))
                    .ok_or_else(|| {
                        CatalogError::Schema(format!(
                            "policy `{policy}`: enum item `{display}` has no value"
                        ))
                    })?;
                let data = read_value_node(&value_node, policy)?;
                if items.insert(display.clone(), data).is_some() {
                    return Err(CatalogError::Schema(format!(
                        "policy `{policy}`: duplicate enum display string `{display}`"
                    )));
                }
            }
            if items.is_empty() {
                return Err(CatalogError::Schema(format!(
                    "policy `{policy}`: enum element `{element_id}` has no items"
                )));
            }
            ElementKind::Enum { items }
        }
        "list" => ElementKind::List {
            key_suffix: element.attribute("key").unwrap_or("").to_string(),
            explicit_names: element
                .attribute("explicitValue")
                .map(|v| v == "true")
                .unwrap_or(false),
        },
        other => {
            warnings.push(format!(
                "policy `{policy}`: element kind `{other}` is not supported; policy flagged non-automatable"
            ));
            return Ok(None);
        }
    };

    Ok(Some(SettingElement {
        element_id,
        label,
        value_name,
        kind,
    }))
}

fn bad_attr(policy: &str, element: &str, attr: &str) -> CatalogError {
    CatalogError::Schema(format!(
        "policy `{policy}`: element `{element}` has a malformed `{attr}` attribute"
    ))
}
