//! Loader for the hand-maintained legacy-definitions file: the settings that
//! Administrative Templates do not cover (privileges, system-access values,
//! raw INF registry values, audit subcategories).

use super::{CatalogError, LegacyDefinition};
use std::collections::HashSet;

/// Parse the legacy-definitions document: a top-level list of records, each
/// with a `kind` tag and kind-specific fields.
pub fn load_legacy_definitions(document: &str) -> Result<Vec<LegacyDefinition>, CatalogError> {
    if document.trim().is_empty() {
        return Ok(Vec::new());
    }
    let defs: Vec<LegacyDefinition> =
        serde_yaml::from_str(document).map_err(|e| match e.location() {
            Some(l) => CatalogError::Parse {
                message: e.to_string(),
                location: format!("line {} column {}", l.line(), l.column()),
            },
            // serde reports unknown variant tags without a location
            None => CatalogError::Schema(e.to_string()),
        })?;

    let mut seen = HashSet::new();
    for def in &defs {
        let key = def.ui_path().key();
        if !seen.insert(key) {
            return Err(CatalogError::Collision {
                path: def.ui_path().display(),
                first: "earlier record".to_string(),
                second: def.describe(),
            });
        }
    }
    Ok(defs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{AccessModel, LegacyDefinition};

    #[test]
    fn parses_a_privilege_record() {
        let doc = r#"
- kind: privilege
  ui_path: Computer Configuration\Windows Settings\Security Settings\Local Policies\User Rights Assignment\Back up files and directories
  constant: SeBackupPrivilege
"#;
        let defs = load_legacy_definitions(doc).unwrap();
        assert_eq!(defs.len(), 1);
        match &defs[0] {
            LegacyDefinition::Privilege(p) => {
                assert_eq!(p.constant, "SeBackupPrivilege");
                assert_eq!(p.ui_path.leaf(), "Back up files and directories");
            }
            other => panic!("expected privilege, got {other:?}"),
        }
    }

    #[test]
    fn empty_document_is_empty_list() {
        assert!(load_legacy_definitions("").unwrap().is_empty());
        assert!(load_legacy_definitions("  \n").unwrap().is_empty());
    }

    #[test]
    fn unknown_kind_is_rejected() {
        let doc = r#"
- kind: telepathy
  ui_path: Computer Configuration\X\Y
"#;
        assert!(load_legacy_definitions(doc).is_err());
    }

    #[test]
    fn duplicate_ui_path_is_a_collision() {
        let doc = r#"
- kind: privilege
  ui_path: Computer Configuration\A\B
  constant: SeBackupPrivilege
- kind: privilege
  ui_path: computer configuration\a\b
  constant: SeRestorePrivilege
"#;
        match load_legacy_definitions(doc) {
            Err(CatalogError::Collision { .. }) => {}
            other => panic!("expected collision, got {other:?}"),
        }
    }

    #[test]
    fn parses_all_four_kinds() {
        let doc = r#"
- kind: privilege
  ui_path: Computer Configuration\Windows Settings\Security Settings\Local Policies\User Rights Assignment\Debug programs
  constant: SeDebugPrivilege
- kind: system_access
  ui_path: Computer Configuration\Windows Settings\Security Settings\Account Policies\Account Lockout Policy\Account lockout threshold
  inf_key: LockoutBadCount
  model:
    integer:
      min: 0
      max: 999
- kind: registry_value_inf
  ui_path: 'Computer Configuration\Windows Settings\Security Settings\Local Policies\Security Options\Network security: LAN Manager authentication level'
  inf_path: MACHINE\System\CurrentControlSet\Control\Lsa\LmCompatibilityLevel
  options:
    Send LM & NTLM responses: "4,0"
    Send NTLMv2 response only. Refuse LM & NTLM: "4,5"
- kind: audit
  ui_path: Computer Configuration\Windows Settings\Security Settings\Advanced Audit Policy Configuration\System Audit Policies\Account Logon\Audit Credential Validation
  guid: '{0CCE923F-69AE-11D9-BED3-505054503030}'
  name: Credential Validation
"#;
        let defs = load_legacy_definitions(doc).unwrap();
        assert_eq!(defs.len(), 4);
        match &defs[1] {
            LegacyDefinition::SystemAccess(sa) => {
                assert_eq!(sa.inf_key, "LockoutBadCount");
                assert_eq!(sa.model, AccessModel::Integer { min: 0, max: 999 });
            }
            other => panic!("expected system_access, got {other:?}"),
        }
        match &defs[2] {
            LegacyDefinition::RegistryValueInf(rv) => {
                assert_eq!(rv.options.len(), 2);
                assert_eq!(
                    rv.options.get("Send NTLMv2 response only. Refuse LM & NTLM"),
                    Some(&"4,5".to_string())
                );
            }
            other => panic!("expected registry_value_inf, got {other:?}"),
        }
    }
}
