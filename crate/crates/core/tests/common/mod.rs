//! Shared helpers for the integration suites: fixture loading and the
//! corpus manifest.

use guideforge_core::catalog::{build_catalog, load_admx, load_legacy_definitions, SettingCatalog};
use guideforge_core::guide::{
    parse_scapolite, policy_value_from_yaml, Automation, Guide, PolicyValue,
    VerificationStatus,
};
use guideforge_core::paths::PolicyPath;
use serde::Deserialize;
use std::path::{Path, PathBuf};

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn read_fixture(relative: &str) -> String {
    let path = fixtures_dir().join(relative);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("cannot read {path:?}: {e}"))
}

/// Compile the full fixture catalog: every ADMX/ADML pair plus the
/// legacy-definitions file.
pub fn build_fixture_catalog() -> SettingCatalog {
    let mut definitions = Vec::new();
    let admx_dir = fixtures_dir().join("admx");
    let mut stems: Vec<String> = std::fs::read_dir(&admx_dir)
        .expect("admx fixture dir")
        .filter_map(|entry| {
            let path = entry.ok()?.path();
            (path.extension()? == "admx")
                .then(|| path.file_stem().unwrap().to_string_lossy().to_string())
        })
        .collect();
    stems.sort();
    for stem in stems {
        let admx = read_fixture(&format!("admx/{stem}.admx"));
        let adml = read_fixture(&format!("adml/{stem}.adml"));
        let import = load_admx(&admx, &adml, &stem).expect("fixture admx imports");
        definitions.extend(import.definitions.into_iter().map(Into::into));
    }
    let legacy = load_legacy_definitions(&read_fixture("legacy_definitions.yaml"))
        .expect("fixture legacy definitions load");
    definitions.extend(legacy.into_iter().map(Into::into));
    build_catalog(definitions).expect("fixture catalog builds")
}

pub fn load_fixture_guide() -> Guide {
    parse_scapolite(&read_fixture("guides/baseline30.guide.md")).expect("fixture guide parses")
}

#[derive(Debug, Deserialize)]
pub struct Manifest {
    pub guide: String,
    pub rules: Vec<ManifestRule>,
}

#[derive(Debug, Deserialize)]
pub struct ManifestRule {
    pub id: String,
    pub automatable: bool,
    #[serde(default)]
    pub seeded_typo: bool,
    pub expected_extraction: String,
    #[serde(default)]
    pub expected_verification: Option<String>,
    #[serde(default)]
    pub expected_path: Option<String>,
    #[serde(default)]
    pub intended_path: Option<String>,
    #[serde(default)]
    pub fix: Option<ManifestFix>,
}

#[derive(Debug, Deserialize)]
pub struct ManifestFix {
    #[serde(default)]
    pub ui_path: Option<String>,
    #[serde(default)]
    pub value: Option<serde_yaml::Value>,
}

pub fn load_manifest() -> Manifest {
    serde_yaml::from_str(&read_fixture("guides/baseline30.manifest.yaml"))
        .expect("fixture manifest parses")
}

impl Manifest {
    pub fn rule(&self, id: &str) -> &ManifestRule {
        self.rules
            .iter()
            .find(|r| r.id == id)
            .unwrap_or_else(|| panic!("manifest has no rule {id}"))
    }
}

/// Apply the manifest's bundled corrections to a verified guide, the way a
/// reviewer would after the first verification run.
pub fn apply_manifest_fixes(guide: &mut Guide, manifest: &Manifest) {
    for manifest_rule in manifest.rules.iter().filter(|r| r.fix.is_some()) {
        let fix = manifest_rule.fix.as_ref().unwrap();
        let rule = guide
            .rules
            .iter_mut()
            .find(|r| r.id == manifest_rule.id)
            .unwrap_or_else(|| panic!("guide has no rule {}", manifest_rule.id));
        for implementation in &mut rule.implementations {
            for automation in &mut implementation.automations {
                if let Automation::WinGpo(gpo) = automation {
                    if let Some(path) = &fix.ui_path {
                        gpo.ui_path = PolicyPath::parse(path).expect("fix path parses");
                    }
                    if let Some(value) = &fix.value {
                        gpo.value = fix_value(value);
                    }
                    gpo.verification_status = VerificationStatus::Unchecked;
                    gpo.error_class = None;
                    gpo.error_hint = None;
                    gpo.candidates = None;
                }
            }
        }
    }
}

fn fix_value(value: &serde_yaml::Value) -> PolicyValue {
    policy_value_from_yaml(value).expect("fix value parses")
}
