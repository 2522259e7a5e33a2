//! Simulated configuration store: the stand-in for the system under test.
//!
//! Four stores mirror the low-level mechanisms: a registry, privilege
//! assignments, system-access values, and audit subcategory settings. Plans
//! apply rule by rule; every write records the prior value in a checkpoint,
//! so a LIFO replay of checkpoints restores the exact previous state.
//! Registry keys compare case-insensitively, values byte-exactly.

use crate::emit::plan::{ImplementationPlan, PlanRule};
use crate::lower::{ConfigScope, LowLevelAutomation, RegistryAction, SeceditSection};
use crate::registry::{Hive, RegistryData, RegistryValueType};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt;

pub const STATE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("state parse error: {0}")]
    Parse(String),
    #[error("unsupported state schema version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("plan rule `{rule}` is malformed: {message}")]
    Schema { rule: String, message: String },
}

/// Where a value lives in the simulated machine. Registry keys and names
/// are stored lowercased; display forms live in the entries.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Location {
    Registry {
        hive: Hive,
        key: String,
        value_name: String,
    },
    Privilege {
        constant: String,
    },
    SystemAccess {
        key: String,
    },
    Audit {
        guid: String,
    },
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Registry {
                hive,
                key,
                value_name,
            } => write!(f, "{hive}\\{key}\\{value_name}"),
            Location::Privilege { constant } => write!(f, "privilege {constant}"),
            Location::SystemAccess { key } => write!(f, "system access {key}"),
            Location::Audit { guid } => write!(f, "audit {guid}"),
        }
    }
}

/// A value as held by one of the four stores.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum StoredValue {
    Registry(RegistryData),
    Principals(Vec<String>),
    Text(String),
    Audit(u8),
}

impl fmt::Display for StoredValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StoredValue::Registry(data) => f.write_str(&data.encode()),
            StoredValue::Principals(names) => f.write_str(&names.join(",")),
            StoredValue::Text(text) => f.write_str(text),
            StoredValue::Audit(code) => write!(f, "{code}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct RegistryEntry {
    key: String,
    value_name: String,
    data: RegistryData,
}

/// The simulated machine.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MachineState {
    registry: BTreeMap<(Hive, String, String), RegistryEntry>,
    privileges: BTreeMap<String, Vec<String>>,
    system_access: BTreeMap<String, String>,
    audit: BTreeMap<String, u8>,
}

#[derive(Serialize, Deserialize)]
struct StateDocument {
    schema_version: u32,
    #[serde(default)]
    registry: Vec<RegistryDocEntry>,
    #[serde(default)]
    privileges: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    system_access: BTreeMap<String, String>,
    #[serde(default)]
    audit: BTreeMap<String, u8>,
}

#[derive(Serialize, Deserialize)]
struct RegistryDocEntry {
    hive: Hive,
    key: String,
    value_name: String,
    data: RegistryData,
}

impl MachineState {
    pub fn new() -> Self {
        MachineState::default()
    }

    fn registry_key(hive: Hive, key: &str, value_name: &str) -> (Hive, String, String) {
        (hive, key.to_lowercase(), value_name.to_lowercase())
    }

    pub fn registry_get(&self, hive: Hive, key: &str, value_name: &str) -> Option<&RegistryData> {
        self.registry
            .get(&Self::registry_key(hive, key, value_name))
            .map(|entry| &entry.data)
    }

    pub fn set_registry(&mut self, hive: Hive, key: &str, value_name: &str, data: RegistryData) {
        self.registry.insert(
            Self::registry_key(hive, key, value_name),
            RegistryEntry {
                key: key.to_string(),
                value_name: value_name.to_string(),
                data,
            },
        );
    }

    pub fn set_privilege(&mut self, constant: &str, principals: Vec<String>) {
        self.privileges.insert(constant.to_string(), principals);
    }

    pub fn set_system_access(&mut self, key: &str, value: &str) {
        self.system_access.insert(key.to_string(), value.to_string());
    }

    pub fn set_audit(&mut self, guid: &str, code: u8) {
        self.audit.insert(guid.to_lowercase(), code);
    }

    /// Current value at a location, if any.
    pub fn get(&self, location: &Location) -> Option<StoredValue> {
        match location {
            Location::Registry {
                hive,
                key,
                value_name,
            } => self
                .registry
                .get(&(*hive, key.clone(), value_name.clone()))
                .map(|entry| StoredValue::Registry(entry.data.clone())),
            Location::Privilege { constant } => self
                .privileges
                .get(constant)
                .map(|names| StoredValue::Principals(names.clone())),
            Location::SystemAccess { key } => self
                .system_access
                .get(key)
                .map(|value| StoredValue::Text(value.clone())),
            Location::Audit { guid } => self.audit.get(guid).map(|code| StoredValue::Audit(*code)),
        }
    }

    /// Display-case key and value name of the registry entry at a location.
    fn display_of(&self, location: &Location) -> Option<(String, String)> {
        match location {
            Location::Registry {
                hive,
                key,
                value_name,
            } => self
                .registry
                .get(&(*hive, key.clone(), value_name.clone()))
                .map(|entry| (entry.key.clone(), entry.value_name.clone())),
            _ => None,
        }
    }

    fn put(&mut self, location: &Location, value: Option<StoredValue>, display: Option<(&str, &str)>) {
        match (location, value) {
            (Location::Registry { hive, key, value_name }, Some(StoredValue::Registry(data))) => {
                let (display_key, display_name) = display.unwrap_or((key, value_name));
                self.registry.insert(
                    (*hive, key.clone(), value_name.clone()),
                    RegistryEntry {
                        key: display_key.to_string(),
                        value_name: display_name.to_string(),
                        data,
                    },
                );
            }
            (Location::Registry { hive, key, value_name }, None) => {
                self.registry.remove(&(*hive, key.clone(), value_name.clone()));
            }
            (Location::Privilege { constant }, Some(StoredValue::Principals(names))) => {
                self.privileges.insert(constant.clone(), names);
            }
            (Location::Privilege { constant }, None) => {
                self.privileges.remove(constant);
            }
            (Location::SystemAccess { key }, Some(StoredValue::Text(value))) => {
                self.system_access.insert(key.clone(), value);
            }
            (Location::SystemAccess { key }, None) => {
                self.system_access.remove(key);
            }
            (Location::Audit { guid }, Some(StoredValue::Audit(code))) => {
                self.audit.insert(guid.clone(), code);
            }
            (Location::Audit { guid }, None) => {
                self.audit.remove(guid);
            }
            (location, value) => {
                debug_assert!(false, "value {value:?} does not fit location {location}");
            }
        }
    }

    /// Serialize to the versioned snapshot document.
    pub fn save(&self) -> Vec<u8> {
        let doc = StateDocument {
            schema_version: STATE_SCHEMA_VERSION,
            registry: self
                .registry
                .iter()
                .map(|((hive, _, _), entry)| RegistryDocEntry {
                    hive: *hive,
                    key: entry.key.clone(),
                    value_name: entry.value_name.clone(),
                    data: entry.data.clone(),
                })
                .collect(),
            privileges: self.privileges.clone(),
            system_access: self.system_access.clone(),
            audit: self.audit.clone(),
        };
        serde_yaml::to_string(&doc).expect("state serializes").into_bytes()
    }

    pub fn load(bytes: &[u8]) -> Result<Self, SimError> {
        let text = std::str::from_utf8(bytes).map_err(|e| SimError::Parse(e.to_string()))?;
        let doc: StateDocument =
            serde_yaml::from_str(text).map_err(|e| SimError::Parse(e.to_string()))?;
        if doc.schema_version != STATE_SCHEMA_VERSION {
            return Err(SimError::Version {
                found: doc.schema_version,
                expected: STATE_SCHEMA_VERSION,
            });
        }
        let mut state = MachineState::new();
        for entry in doc.registry {
            state.set_registry(entry.hive, &entry.key, &entry.value_name, entry.data);
        }
        state.privileges = doc.privileges;
        state.system_access = doc.system_access;
        state.audit = doc
            .audit
            .into_iter()
            .map(|(guid, code)| (guid.to_lowercase(), code))
            .collect();
        Ok(state)
    }

    /// Content hash of the canonical snapshot.
    pub fn digest(&self) -> String {
        format!("{:x}", Sha256::digest(self.save()))
    }
}

/// One rule's undo record: every written location with its prior value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub rule_id: String,
    pub prior: Vec<CheckpointEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointEntry {
    pub location: Location,
    pub prior: Option<StoredValue>,
    /// Display-case key and value name of the prior registry entry, so a
    /// revert restores the state bit-exactly.
    display: Option<(String, String)>,
}

/// Result of checking one rule against the state.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplianceResult {
    pub rule_id: String,
    pub compliant: bool,
    pub mismatches: Vec<Mismatch>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub location: Location,
    pub expected: Option<StoredValue>,
    pub actual: Option<StoredValue>,
}

/// One pending write: target, value (None deletes), display-case names.
type Write = (Location, Option<StoredValue>, Option<(String, String)>);

/// The writes one plan rule performs, in order.
fn rule_writes(rule: &PlanRule) -> Result<Vec<Write>, SimError> {
    let mut writes = Vec::new();
    for plan_automation in &rule.low_level {
        let automation = plan_automation.to_low_level().map_err(|e| SimError::Schema {
            rule: rule.rule_id.clone(),
            message: e.to_string(),
        })?;
        match automation {
            LowLevelAutomation::Registry(reg) => {
                let hive = match reg.scope {
                    ConfigScope::Computer => Hive::LocalMachine,
                    ConfigScope::User => Hive::CurrentUser,
                };
                let location = Location::Registry {
                    hive,
                    key: reg.registry_key.to_lowercase(),
                    value_name: reg.value_name.to_lowercase(),
                };
                let value = match reg.action {
                    RegistryAction::Set(data) => Some(StoredValue::Registry(data)),
                    RegistryAction::Delete => None,
                };
                writes.push((
                    location,
                    value,
                    Some((reg.registry_key.clone(), reg.value_name.clone())),
                ));
            }
            LowLevelAutomation::Secedit(sec) => match sec.section {
                SeceditSection::PrivilegeRights => {
                    let principals: Vec<String> = if sec.value.is_empty() {
                        Vec::new()
                    } else {
                        sec.value.split(',').map(|s| s.trim().to_string()).collect()
                    };
                    writes.push((
                        Location::Privilege { constant: sec.key },
                        Some(StoredValue::Principals(principals)),
                        None,
                    ));
                }
                SeceditSection::SystemAccess => {
                    writes.push((
                        Location::SystemAccess { key: sec.key },
                        Some(StoredValue::Text(sec.value)),
                        None,
                    ));
                }
                SeceditSection::RegistryValues => {
                    let (location, data, display) = decode_inf_registry_line(&sec.key, &sec.value)
                        .ok_or_else(|| SimError::Schema {
                            rule: rule.rule_id.clone(),
                            message: format!("malformed registry value line `{}`", sec.key),
                        })?;
                    writes.push((location, Some(StoredValue::Registry(data)), Some(display)));
                }
            },
            LowLevelAutomation::Audit(audit) => {
                writes.push((
                    Location::Audit {
                        guid: audit.guid.to_lowercase(),
                    },
                    Some(StoredValue::Audit(audit.setting_value)),
                    None,
                ));
            }
        }
    }
    Ok(writes)
}

/// Decode a `MACHINE\path\value = type,data` template entry into a registry
/// write. Types follow the INF convention: 1 string, 3 binary, 4 dword,
/// 7 multi-string.
fn decode_inf_registry_line(
    inf_path: &str,
    encoded: &str,
) -> Option<(Location, RegistryData, (String, String))> {
    let (root, rest) = inf_path.split_once('\\')?;
    let hive = match root.to_uppercase().as_str() {
        "MACHINE" => Hive::LocalMachine,
        "USER" | "USERS" => Hive::CurrentUser,
        _ => return None,
    };
    let (key, value_name) = rest.rsplit_once('\\')?;
    let data = match encoded.split_once(',') {
        Some((type_code, payload)) => {
            let code: u32 = type_code.trim().parse().ok()?;
            match RegistryValueType::from_code(code)? {
                RegistryValueType::Dword => RegistryData::Dword(payload.trim().parse().ok()?),
                RegistryValueType::Qword => RegistryData::Qword(payload.trim().parse().ok()?),
                RegistryValueType::Sz => {
                    RegistryData::Sz(payload.trim().trim_matches('"').to_string())
                }
                RegistryValueType::ExpandSz => {
                    RegistryData::ExpandSz(payload.trim().trim_matches('"').to_string())
                }
                RegistryValueType::MultiSz => RegistryData::MultiSz(
                    payload.split(',').map(|s| s.trim().to_string()).collect(),
                ),
                RegistryValueType::Binary => RegistryData::Sz(payload.trim().to_string()),
            }
        }
        None => RegistryData::Sz(encoded.to_string()),
    };
    Some((
        Location::Registry {
            hive,
            key: key.to_lowercase(),
            value_name: value_name.to_lowercase(),
        },
        data,
        (key.to_string(), value_name.to_string()),
    ))
}

/// Apply one rule. Every prior value lands in the checkpoint exactly once;
/// overwrites are legal. A malformed rule is applied not at all.
pub fn apply_rule(state: &mut MachineState, rule: &PlanRule) -> Result<Checkpoint, SimError> {
    let writes = rule_writes(rule)?;
    let mut checkpoint = Checkpoint {
        rule_id: rule.rule_id.clone(),
        prior: Vec::new(),
    };
    for (location, value, display) in writes {
        if !checkpoint.prior.iter().any(|entry| entry.location == location) {
            checkpoint.prior.push(CheckpointEntry {
                prior: state.get(&location),
                display: state.display_of(&location),
                location: location.clone(),
            });
        }
        state.put(
            &location,
            value,
            display.as_ref().map(|(k, n)| (k.as_str(), n.as_str())),
        );
    }
    Ok(checkpoint)
}

/// Compliance check: every automation's location must hold exactly the
/// expected value; deletes expect absence.
pub fn check_rule(state: &MachineState, rule: &PlanRule) -> Result<ComplianceResult, SimError> {
    let writes = rule_writes(rule)?;
    let mut mismatches = Vec::new();
    for (location, expected, _) in writes {
        let actual = state.get(&location);
        if actual != expected {
            mismatches.push(Mismatch {
                location,
                expected,
                actual,
            });
        }
    }
    Ok(ComplianceResult {
        rule_id: rule.rule_id.clone(),
        compliant: mismatches.is_empty(),
        mismatches,
    })
}

/// Restore every location in the checkpoint to its prior value.
pub fn revert_rule(state: &mut MachineState, checkpoint: &Checkpoint) {
    for entry in &checkpoint.prior {
        state.put(
            &entry.location,
            entry.prior.clone(),
            entry.display.as_ref().map(|(k, n)| (k.as_str(), n.as_str())),
        );
    }
}

/// Aggregate compliance numbers for a plan run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Stats {
    pub total: usize,
    pub compliant: usize,
    /// Locations written by several rules with different values.
    pub conflicts: Vec<String>,
}

impl Stats {
    pub fn percentage(&self) -> Option<f64> {
        if self.total == 0 {
            None
        } else {
            Some(self.compliant as f64 * 100.0 / self.total as f64)
        }
    }

    /// Display form: `97.6%` or `—` for an empty plan.
    pub fn percentage_text(&self) -> String {
        match self.percentage() {
            Some(p) => format!("{p:.1}%"),
            None => "—".to_string(),
        }
    }
}

/// Apply a whole plan rule by rule. Checkpoints come back in application
/// order, so reverting them last-in-first-out restores the initial state.
/// Conflicting writes are reported, last writer wins.
pub fn apply_all(
    state: &mut MachineState,
    plan: &ImplementationPlan,
) -> Result<(Vec<Checkpoint>, Stats), SimError> {
    let mut checkpoints = Vec::new();
    let mut first_writer: BTreeMap<Location, (String, Option<StoredValue>)> = BTreeMap::new();
    let mut conflicts = Vec::new();
    for rule in &plan.rules {
        for (location, value, _) in rule_writes(rule)? {
            match first_writer.get(&location) {
                Some((earlier_rule, earlier_value)) if *earlier_value != value => {
                    conflicts.push(format!(
                        "{location}: `{}` and `{}` write different values (last writer wins)",
                        earlier_rule, rule.rule_id
                    ));
                }
                Some(_) => {}
                None => {
                    first_writer.insert(location, (rule.rule_id.clone(), value));
                }
            }
        }
        checkpoints.push(apply_rule(state, rule)?);
    }
    let mut stats = check_all(state, plan)?;
    stats.conflicts = conflicts;
    Ok((checkpoints, stats))
}

/// Check a whole plan without touching the state.
pub fn check_all(state: &MachineState, plan: &ImplementationPlan) -> Result<Stats, SimError> {
    let mut stats = Stats {
        total: plan.rules.len(),
        ..Stats::default()
    };
    for rule in &plan.rules {
        if check_rule(state, rule)?.compliant {
            stats.compliant += 1;
        }
    }
    Ok(stats)
}
