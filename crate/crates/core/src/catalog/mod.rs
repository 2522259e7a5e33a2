//! The settings catalog: every policy setting the target system knows,
//! indexed by normalized policy path.
//!
//! A catalog is compiled once from ADMX/ADML definition files plus a
//! hand-maintained legacy-definitions file, then queried read-only by the
//! verification and lowering stages.

mod admx;
mod legacy;

pub use admx::{load_admx, AdmxImport};
pub use legacy::load_legacy_definitions;

use crate::paths::PolicyPath;
use crate::registry::{Hive, RegistryData, RegistryValueType};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;

pub const CATALOG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("parse error at {location}: {message}")]
    Parse { message: String, location: String },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("path collision on `{path}`: `{first}` and `{second}`")]
    Collision {
        path: String,
        first: String,
        second: String,
    },
    #[error("unsupported catalog schema version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("catalog fingerprint mismatch: stored {stored}, settings hash to {computed}")]
    Fingerprint { stored: String, computed: String },
}

/// Constraint on one configurable sub-setting of an ADMX policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingElement {
    pub element_id: String,
    /// Human-readable label shown next to the control in the policy editor.
    pub label: String,
    #[serde(default)]
    pub value_name: String,
    #[serde(flatten)]
    pub kind: ElementKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "element", rename_all = "snake_case")]
pub enum ElementKind {
    Boolean {
        true_data: RegistryData,
        false_data: RegistryData,
    },
    Decimal {
        min: i64,
        max: i64,
    },
    Text {
        max_length: u32,
    },
    Enum {
        items: IndexMap<String, RegistryData>,
    },
    List {
        key_suffix: String,
        explicit_names: bool,
    },
}

/// One policy setting defined by an Administrative Template.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingDefinition {
    pub id: String,
    pub ui_path: PolicyPath,
    pub hive: Hive,
    pub key: String,
    #[serde(default)]
    pub value_name: String,
    pub value_type: RegistryValueType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enabled_data: Option<RegistryData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disabled_data: Option<RegistryData>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub elements: Vec<SettingElement>,
    /// False when the template used element kinds this importer rejects.
    #[serde(default = "default_true")]
    pub automatable: bool,
}

fn default_true() -> bool {
    true
}

impl SettingDefinition {
    /// Payload-shape check for enabled/disabled data against the declared type.
    pub fn data_shapes_consistent(&self) -> bool {
        self.enabled_data
            .iter()
            .chain(self.disabled_data.iter())
            .all(|d| d.value_type() == self.value_type)
    }

    pub fn element_by_label(&self, label: &str) -> Option<&SettingElement> {
        let wanted = normalize_display(label);
        self.elements
            .iter()
            .find(|e| normalize_display(&e.label) == wanted)
    }
}

/// Case-insensitive, whitespace-collapsed form used for display-string matching.
pub fn normalize_display(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// User-rights assignment backed by a privilege constant in GptTmpl.inf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrivilegeDef {
    pub ui_path: PolicyPath,
    pub constant: String,
}

/// Value model for settings configured through the `[System Access]` INF section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccessModel {
    Integer { min: i64, max: i64 },
    Enum { options: IndexMap<String, String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemAccessDef {
    pub ui_path: PolicyPath,
    pub inf_key: String,
    // single-key map form (`integer:`/`enum:`), not a YAML tag, so the
    // catalog file stays plain and re-parses inside tagged contexts
    #[serde(with = "serde_yaml::with::singleton_map")]
    pub model: AccessModel,
}

/// Security option written through the `[Registry Values]` INF section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegistryValueInfDef {
    pub ui_path: PolicyPath,
    pub inf_path: String,
    /// Display string of each option mapped to its `type,data` INF encoding.
    pub options: IndexMap<String, String>,
}

/// Audit-policy subcategory identified by GUID in audit.csv.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditDef {
    pub ui_path: PolicyPath,
    pub guid: String,
    pub name: String,
}

/// A setting that predates Administrative Templates: privileges, system-access
/// values, raw INF registry values, and audit subcategories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LegacyDefinition {
    Privilege(PrivilegeDef),
    SystemAccess(SystemAccessDef),
    RegistryValueInf(RegistryValueInfDef),
    Audit(AuditDef),
}

impl LegacyDefinition {
    pub fn ui_path(&self) -> &PolicyPath {
        match self {
            LegacyDefinition::Privilege(d) => &d.ui_path,
            LegacyDefinition::SystemAccess(d) => &d.ui_path,
            LegacyDefinition::RegistryValueInf(d) => &d.ui_path,
            LegacyDefinition::Audit(d) => &d.ui_path,
        }
    }

    fn describe(&self) -> String {
        match self {
            LegacyDefinition::Privilege(d) => format!("privilege {}", d.constant),
            LegacyDefinition::SystemAccess(d) => format!("system_access {}", d.inf_key),
            LegacyDefinition::RegistryValueInf(d) => format!("registry_value_inf {}", d.inf_path),
            LegacyDefinition::Audit(d) => format!("audit {}", d.guid),
        }
    }
}

/// Any catalog entry: either an ADMX-backed setting or a legacy definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Definition {
    Admx(SettingDefinition),
    Privilege(PrivilegeDef),
    SystemAccess(SystemAccessDef),
    RegistryValueInf(RegistryValueInfDef),
    Audit(AuditDef),
}

impl Definition {
    pub fn ui_path(&self) -> &PolicyPath {
        match self {
            Definition::Admx(d) => &d.ui_path,
            Definition::Privilege(d) => &d.ui_path,
            Definition::SystemAccess(d) => &d.ui_path,
            Definition::RegistryValueInf(d) => &d.ui_path,
            Definition::Audit(d) => &d.ui_path,
        }
    }

    /// Identifier used in collision reports.
    pub fn describe(&self) -> String {
        match self {
            Definition::Admx(d) => format!("admx {}", d.id),
            Definition::Privilege(d) => format!("privilege {}", d.constant),
            Definition::SystemAccess(d) => format!("system_access {}", d.inf_key),
            Definition::RegistryValueInf(d) => format!("registry_value_inf {}", d.inf_path),
            Definition::Audit(d) => format!("audit {}", d.guid),
        }
    }

    pub fn as_legacy(&self) -> Option<LegacyDefinition> {
        Some(match self {
            Definition::Admx(_) => return None,
            Definition::Privilege(d) => LegacyDefinition::Privilege(d.clone()),
            Definition::SystemAccess(d) => LegacyDefinition::SystemAccess(d.clone()),
            Definition::RegistryValueInf(d) => LegacyDefinition::RegistryValueInf(d.clone()),
            Definition::Audit(d) => LegacyDefinition::Audit(d.clone()),
        })
    }
}

impl From<LegacyDefinition> for Definition {
    fn from(legacy: LegacyDefinition) -> Self {
        match legacy {
            LegacyDefinition::Privilege(d) => Definition::Privilege(d),
            LegacyDefinition::SystemAccess(d) => Definition::SystemAccess(d),
            LegacyDefinition::RegistryValueInf(d) => Definition::RegistryValueInf(d),
            LegacyDefinition::Audit(d) => Definition::Audit(d),
        }
    }
}

impl From<SettingDefinition> for Definition {
    fn from(def: SettingDefinition) -> Self {
        Definition::Admx(def)
    }
}

/// Immutable, queryable settings catalog keyed by normalized policy path.
#[derive(Debug, Clone, PartialEq)]
pub struct SettingCatalog {
    settings: BTreeMap<String, Definition>,
    source_fingerprint: String,
}

#[derive(Serialize, Deserialize)]
struct CatalogDocument {
    schema_version: u32,
    source_fingerprint: String,
    settings: Vec<Definition>,
}

/// Index definitions by normalized path. Two definitions normalizing to the
/// same path are a hard error, never a silent overwrite.
pub fn build_catalog<I>(defs: I) -> Result<SettingCatalog, CatalogError>
where
    I: IntoIterator<Item = Definition>,
{
    let mut settings: BTreeMap<String, Definition> = BTreeMap::new();
    for def in defs {
        validate_definition(&def)?;
        let key = def.ui_path().key();
        if let Some(existing) = settings.get(&key) {
            return Err(CatalogError::Collision {
                path: def.ui_path().display(),
                first: existing.describe(),
                second: def.describe(),
            });
        }
        settings.insert(key, def);
    }
    let fingerprint = fingerprint_settings(settings.values());
    Ok(SettingCatalog {
        settings,
        source_fingerprint: fingerprint,
    })
}

fn validate_definition(def: &Definition) -> Result<(), CatalogError> {
    match def {
        Definition::Admx(d) => {
            if !d.data_shapes_consistent() {
                return Err(CatalogError::Schema(format!(
                    "definition `{}`: enabled/disabled data does not match value type {}",
                    d.id, d.value_type
                )));
            }
            for element in &d.elements {
                match &element.kind {
                    ElementKind::Enum { items } => {
                        if items.is_empty() {
                            return Err(CatalogError::Schema(format!(
                                "definition `{}`: enum element `{}` has no items",
                                d.id, element.element_id
                            )));
                        }
                    }
                    ElementKind::Decimal { min, max } if min > max => {
                        return Err(CatalogError::Schema(format!(
                            "definition `{}`: decimal element `{}` has min > max",
                            d.id, element.element_id
                        )));
                    }
                    _ => {}
                }
            }
        }
        Definition::Audit(d) => {
            if !is_braced_guid(&d.guid) {
                return Err(CatalogError::Schema(format!(
                    "audit subcategory `{}`: `{}` is not a braced GUID",
                    d.name, d.guid
                )));
            }
        }
        Definition::SystemAccess(d) => {
            if let AccessModel::Enum { options } = &d.model {
                if options.is_empty() {
                    return Err(CatalogError::Schema(format!(
                        "system_access `{}`: empty enum model",
                        d.inf_key
                    )));
                }
            }
        }
        Definition::RegistryValueInf(d) => {
            if d.options.is_empty() {
                return Err(CatalogError::Schema(format!(
                    "registry_value_inf `{}`: empty option map",
                    d.inf_path
                )));
            }
        }
        Definition::Privilege(_) => {}
    }
    Ok(())
}

pub fn is_braced_guid(s: &str) -> bool {
    let inner = match s.strip_prefix('{').and_then(|rest| rest.strip_suffix('}')) {
        Some(inner) => inner,
        None => return false,
    };
    let groups: Vec<&str> = inner.split('-').collect();
    let lens = [8, 4, 4, 4, 12];
    groups.len() == lens.len()
        && groups
            .iter()
            .zip(lens)
            .all(|(g, len)| g.len() == len && g.chars().all(|c| c.is_ascii_hexdigit()))
}

fn fingerprint_settings<'a, I>(defs: I) -> String
where
    I: Iterator<Item = &'a Definition>,
{
    let mut hasher = Sha256::new();
    for def in defs {
        hasher.update(serde_yaml::to_string(def).expect("definition serializes").as_bytes());
    }
    format!("{:x}", hasher.finalize())
}

impl SettingCatalog {
    /// Exact lookup by normalized path. Misses are values, not errors.
    pub fn lookup(&self, path: &PolicyPath) -> Option<&Definition> {
        self.settings.get(&path.key())
    }

    pub fn len(&self) -> usize {
        self.settings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.settings.is_empty()
    }

    /// Normalized path keys, sorted.
    pub fn all_paths(&self) -> impl Iterator<Item = &str> {
        self.settings.keys().map(|k| k.as_str())
    }

    pub fn definitions(&self) -> impl Iterator<Item = &Definition> {
        self.settings.values()
    }

    pub fn source_fingerprint(&self) -> &str {
        &self.source_fingerprint
    }

    /// Serialize to the versioned catalog document.
    pub fn save(&self) -> Vec<u8> {
        let doc = CatalogDocument {
            schema_version: CATALOG_SCHEMA_VERSION,
            source_fingerprint: self.source_fingerprint.clone(),
            settings: self.settings.values().cloned().collect(),
        };
        serde_yaml::to_string(&doc)
            .expect("catalog serializes")
            .into_bytes()
    }

    /// Inverse of [`SettingCatalog::save`]. A malformed or truncated stream
    /// never yields a partial catalog.
    pub fn load(bytes: &[u8]) -> Result<Self, CatalogError> {
        let text = std::str::from_utf8(bytes).map_err(|e| CatalogError::Parse {
            message: format!("catalog is not UTF-8: {e}"),
            location: format!("byte {}", e.valid_up_to()),
        })?;
        let doc: CatalogDocument = serde_yaml::from_str(text).map_err(|e| CatalogError::Parse {
            message: e.to_string(),
            location: e
                .location()
                .map(|l| format!("line {} column {}", l.line(), l.column()))
                .unwrap_or_else(|| "unknown".to_string()),
        })?;
        if doc.schema_version != CATALOG_SCHEMA_VERSION {
            return Err(CatalogError::Version {
                found: doc.schema_version,
                expected: CATALOG_SCHEMA_VERSION,
            });
        }
        let catalog = build_catalog(doc.settings)?;
        // the stored fingerprint must match the settings it travels with;
        // the catalog is a compiled artifact, not a hand-edited source
        if catalog.source_fingerprint != doc.source_fingerprint {
            return Err(CatalogError::Fingerprint {
                stored: doc.source_fingerprint,
                computed: catalog.source_fingerprint,
            });
        }
        Ok(catalog)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::ClassRoot;

    fn admx_def(path: &str, id: &str) -> Definition {
        Definition::Admx(SettingDefinition {
            id: id.to_string(),
            ui_path: PolicyPath::parse(path).unwrap(),
            hive: Hive::LocalMachine,
            key: "Software\\Test".into(),
            value_name: "V".into(),
            value_type: RegistryValueType::Dword,
            enabled_data: Some(RegistryData::Dword(1)),
            disabled_data: Some(RegistryData::Dword(0)),
            elements: vec![],
            automatable: true,
        })
    }

    #[test]
    fn single_definition_catalog() {
        let catalog =
            build_catalog([admx_def("Computer Configuration\\A\\B", "x")]).unwrap();
        assert_eq!(catalog.len(), 1);
        let hit = catalog.lookup(&PolicyPath::parse("Computer Configuration\\A\\B").unwrap());
        assert!(hit.is_some());
    }

    #[test]
    fn lookup_ignores_policies_segment_and_case() {
        let catalog =
            build_catalog([admx_def("Computer Configuration\\A\\B", "x")]).unwrap();
        for variant in [
            "Computer Configuration\\Policies\\A\\B",
            "computer configuration\\a\\b",
            "Computer Configuration >> A >> \"B\"",
        ] {
            assert!(
                catalog.lookup(&PolicyPath::parse(variant).unwrap()).is_some(),
                "lookup failed for {variant}"
            );
        }
        assert!(catalog
            .lookup(&PolicyPath::parse("Computer Configuration\\A\\C").unwrap())
            .is_none());
    }

    #[test]
    fn collision_is_a_hard_error() {
        let err = build_catalog([
            admx_def("Computer Configuration\\A\\B", "first"),
            admx_def("computer configuration\\a\\b", "second"),
        ])
        .unwrap_err();
        match err {
            CatalogError::Collision { first, second, .. } => {
                assert!(first.contains("first"));
                assert!(second.contains("second"));
            }
            other => panic!("expected collision, got {other:?}"),
        }
    }

    #[test]
    fn mismatched_data_shape_is_rejected() {
        let mut def = SettingDefinition {
            id: "bad".into(),
            ui_path: PolicyPath::from_parts(ClassRoot::ComputerConfiguration, vec!["X".into()]),
            hive: Hive::LocalMachine,
            key: "K".into(),
            value_name: "V".into(),
            value_type: RegistryValueType::Dword,
            enabled_data: Some(RegistryData::Sz("oops".into())),
            disabled_data: None,
            elements: vec![],
            automatable: true,
        };
        assert!(build_catalog([Definition::Admx(def.clone())]).is_err());
        def.enabled_data = Some(RegistryData::Dword(1));
        assert!(build_catalog([Definition::Admx(def)]).is_ok());
    }

    #[test]
    fn empty_catalog_round_trip() {
        let catalog = build_catalog([]).unwrap();
        let bytes = catalog.save();
        let loaded = SettingCatalog::load(&bytes).unwrap();
        assert_eq!(catalog, loaded);
    }

    #[test]
    fn truncated_stream_never_yields_partial_catalog() {
        let catalog = build_catalog([
            admx_def("Computer Configuration\\A\\B", "x"),
            admx_def("Computer Configuration\\A\\C", "y"),
        ])
        .unwrap();
        let bytes = catalog.save();
        for cut in [3, bytes.len() / 2, bytes.len() - 4] {
            assert!(SettingCatalog::load(&bytes[..cut]).is_err(), "cut at {cut}");
        }
    }

    #[test]
    fn version_mismatch_is_a_version_error() {
        let doc = "schema_version: 99\nsource_fingerprint: ''\nsettings: []\n";
        match SettingCatalog::load(doc.as_bytes()) {
            Err(CatalogError::Version { found: 99, .. }) => {}
            other => panic!("expected version error, got {other:?}"),
        }
    }

    #[test]
    fn tampered_settings_fail_the_fingerprint_check() {
        let catalog = build_catalog([admx_def("Computer Configuration\\A\\B", "x")]).unwrap();
        let text = String::from_utf8(catalog.save()).unwrap();
        let tampered = text.replace("value_name: V", "value_name: W");
        assert_ne!(text, tampered);
        match SettingCatalog::load(tampered.as_bytes()) {
            Err(CatalogError::Fingerprint { .. }) => {}
            other => panic!("expected fingerprint error, got {other:?}"),
        }
    }

    #[test]
    fn braced_guid_check() {
        assert!(is_braced_guid("{0CCE923F-69AE-11D9-BED3-505054503030}"));
        assert!(!is_braced_guid("0CCE923F-69AE-11D9-BED3-505054503030"));
        assert!(!is_braced_guid("{0CCE923F-69AE-11D9-BED3}"));
        assert!(!is_braced_guid("{ZZZZZZZZ-69AE-11D9-BED3-505054503030}"));
    }
}
