//! Stage implementations behind the subcommands. Every function is a thin
//! file-in/file-out wrapper over the core library; summaries print as
//! machine-parseable `key: value` lines.

use guideforge_core::catalog::{build_catalog, load_admx, load_legacy_definitions, SettingCatalog};
use guideforge_core::emit;
use guideforge_core::extract::{self, ExtractionRuleDef, Lexicon};
use guideforge_core::guide::{
    import_xccdf, parse_scapolite, serialize_scapolite, ExtractionStatus, Guide,
    VerificationStatus,
};
use guideforge_core::lower::lower_guide;
use guideforge_core::mocksys::{self, Checkpoint, MachineState};
use guideforge_core::verify::{verify_guide, VerifyOptions};
use std::fmt::Display;
use std::path::Path;

type CommandResult = Result<u8, String>;

fn fail(context: &str, error: impl Display) -> String {
    format!("{context}: {error}")
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| fail(&path.display().to_string(), e))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, String> {
    std::fs::read(path).map_err(|e| fail(&path.display().to_string(), e))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), String> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| fail(&parent.display().to_string(), e))?;
        }
    }
    std::fs::write(path, bytes).map_err(|e| fail(&path.display().to_string(), e))
}

fn load_guide(path: &Path) -> Result<Guide, String> {
    parse_scapolite(&read(path)?).map_err(|e| fail(&path.display().to_string(), e))
}

fn store_guide(path: &Path, guide: &Guide) -> Result<(), String> {
    write(path, serialize_scapolite(guide).as_bytes())
}

fn load_catalog(path: &Path) -> Result<SettingCatalog, String> {
    SettingCatalog::load(&read_bytes(path)?).map_err(|e| fail(&path.display().to_string(), e))
}

pub fn catalog_build(
    admx_dir: &Path,
    adml_dir: &Path,
    legacy_file: Option<&Path>,
    out: &Path,
) -> CommandResult {
    let mut definitions = Vec::new();
    let mut warnings = Vec::new();
    let mut stems: Vec<String> = std::fs::read_dir(admx_dir)
        .map_err(|e| fail(&admx_dir.display().to_string(), e))?
        .filter_map(|entry| {
            let path = entry.ok()?.path();
            (path.extension()?.eq_ignore_ascii_case("admx"))
                .then(|| path.file_stem().unwrap().to_string_lossy().to_string())
        })
        .collect();
    stems.sort();

    let mut admx_count = 0;
    for stem in &stems {
        let admx_text = read(&admx_dir.join(format!("{stem}.admx")))?;
        let adml_path = adml_dir.join(format!("{stem}.adml"));
        let adml_text = if adml_path.exists() {
            read(&adml_path)?
        } else {
            warnings.push(format!("{stem}: no ADML file, display strings fall back to ids"));
            "<policyDefinitionResources/>".to_string()
        };
        let import = load_admx(&admx_text, &adml_text, stem).map_err(|e| fail(stem, e))?;
        warnings.extend(import.warnings);
        admx_count += import.definitions.len();
        definitions.extend(import.definitions.into_iter().map(Into::into));
    }

    let mut legacy_count = 0;
    if let Some(legacy_path) = legacy_file {
        let legacy = load_legacy_definitions(&read(legacy_path)?)
            .map_err(|e| fail(&legacy_path.display().to_string(), e))?;
        legacy_count = legacy.len();
        definitions.extend(legacy.into_iter().map(Into::into));
    }

    let catalog = build_catalog(definitions).map_err(|e| e.to_string())?;
    write(out, &catalog.save())?;
    for warning in &warnings {
        eprintln!("warning: {warning}");
    }
    println!("admx definitions: {admx_count}");
    println!("legacy definitions: {legacy_count}");
    println!("total definitions: {}", catalog.len());
    Ok(0)
}

pub fn guide_import(xccdf: &Path, out: &Path) -> CommandResult {
    let guide = import_xccdf(&read(xccdf)?).map_err(|e| fail(&xccdf.display().to_string(), e))?;
    store_guide(out, &guide)?;
    println!("title: {}", guide.title);
    println!("rules: {}", guide.rules.len());
    Ok(0)
}

fn load_ruleset(path: Option<&Path>) -> Result<Vec<ExtractionRuleDef>, String> {
    match path {
        Some(path) => {
            extract::load_ruleset(&read(path)?).map_err(|e| fail(&path.display().to_string(), e))
        }
        None => Ok(extract::default_ruleset()),
    }
}

fn load_lexicon(path: Option<&Path>) -> Result<Lexicon, String> {
    match path {
        Some(path) => {
            Lexicon::parse(&read(path)?).map_err(|e| fail(&path.display().to_string(), e))
        }
        None => Ok(Lexicon::bundled()),
    }
}

pub fn extract(guide_path: &Path, rules: Option<&Path>, lexicon: Option<&Path>) -> CommandResult {
    let mut guide = load_guide(guide_path)?;
    let ruleset = load_ruleset(rules)?;
    let lexicon = load_lexicon(lexicon)?;
    let report = extract::extract_guide(&mut guide, &ruleset, &lexicon);
    store_guide(guide_path, &guide)?;
    println!("rules: {}", guide.rules.len());
    println!("extracted: {}", report.extracted);
    println!("not extracted: {}", report.not_extracted);
    println!("ambiguous: {}", report.ambiguous);
    println!("manually authored: {}", report.manually_authored);
    println!("already automated: {}", report.skipped);
    Ok(0)
}

pub fn verify(
    guide_path: &Path,
    catalog_path: &Path,
    strict: bool,
    suggestions: usize,
) -> CommandResult {
    if suggestions == 0 {
        return Err("--suggestions must be at least 1".to_string());
    }
    let mut guide = load_guide(guide_path)?;
    let catalog = load_catalog(catalog_path)?;
    let report = verify_guide(&catalog, &mut guide, VerifyOptions {
        strict,
        suggestions,
    });
    store_guide(guide_path, &guide)?;
    println!("automations: {}", report.total());
    println!("checked: {}", report.checked);
    println!("path not found: {}", report.path_not_found);
    println!("value invalid: {}", report.value_invalid);
    println!("underspecified: {}", report.underspecified);
    Ok(if report.all_checked() { 0 } else { 1 })
}

pub fn lower(guide_path: &Path, catalog_path: &Path) -> CommandResult {
    let mut guide = load_guide(guide_path)?;
    let catalog = load_catalog(catalog_path)?;
    let report = lower_guide(&catalog, &mut guide);
    store_guide(guide_path, &guide)?;
    println!("lowered rules: {}", report.lowered_rules);
    println!("errors: {}", report.errors.len());
    for (rule, error) in &report.errors {
        eprintln!("warning: {rule}: {error}");
    }
    Ok(if report.errors.is_empty() { 0 } else { 1 })
}

/// RFC 3339 rendering of SOURCE_DATE_EPOCH when set, otherwise the fixed
/// epoch, so exports stay reproducible.
fn plan_timestamp() -> String {
    match std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|raw| raw.parse::<i64>().ok())
    {
        Some(epoch) => format_epoch(epoch),
        None => emit::DEFAULT_GENERATED_AT.to_string(),
    }
}

/// Civil-date conversion (days-from-epoch algorithm), UTC only.
fn format_epoch(epoch: i64) -> String {
    let days = epoch.div_euclid(86_400);
    let secs = epoch.rem_euclid(86_400);
    let (hour, minute, second) = (secs / 3600, (secs % 3600) / 60, secs % 60);
    let z = days + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z.rem_euclid(146_097);
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let year = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let day = doy - (153 * mp + 2) / 5 + 1;
    let month = if mp < 10 { mp + 3 } else { mp - 9 };
    let year = if month <= 2 { year + 1 } else { year };
    format!("{year:04}-{month:02}-{day:02}T{hour:02}:{minute:02}:{second:02}Z")
}

pub fn export_plan(guide_path: &Path, output: &Path) -> CommandResult {
    let guide = load_guide(guide_path)?;
    let bytes = emit::export_plan(&guide, &plan_timestamp());
    let plan = emit::load_plan(&bytes).map_err(|e| e.to_string())?;
    write(&output.join("plan.json"), &bytes)?;
    if plan.rules.is_empty() {
        eprintln!("warning: no automatable rules, emitted an empty plan");
    }
    println!("plan rules: {}", plan.rules.len());
    Ok(0)
}

pub fn export_pol(guide_path: &Path, output: &Path) -> CommandResult {
    let guide = load_guide(guide_path)?;
    let buckets = emit::collect_automations(&guide);
    let machine = emit::emit_pol(&buckets.registry_computer).map_err(|e| e.to_string())?;
    let user = emit::emit_pol(&buckets.registry_user).map_err(|e| e.to_string())?;
    write(&output.join("machine/registry.pol"), &machine)?;
    write(&output.join("user/registry.pol"), &user)?;
    println!("machine entries: {}", buckets.registry_computer.len());
    println!("user entries: {}", buckets.registry_user.len());
    Ok(0)
}

pub fn export_inf(guide_path: &Path, output: &Path) -> CommandResult {
    let guide = load_guide(guide_path)?;
    let buckets = emit::collect_automations(&guide);
    write(&output.join("GptTmpl.inf"), &emit::emit_inf(&buckets.secedit))?;
    println!("template entries: {}", buckets.secedit.len());
    Ok(0)
}

pub fn export_audit(guide_path: &Path, output: &Path) -> CommandResult {
    let guide = load_guide(guide_path)?;
    let buckets = emit::collect_automations(&guide);
    write(&output.join("audit.csv"), &emit::emit_audit_csv(&buckets.audit))?;
    println!("audit entries: {}", buckets.audit.len());
    Ok(0)
}

pub fn export_report(guide_path: &Path, output: &Path) -> CommandResult {
    let guide = load_guide(guide_path)?;
    let report = emit::export_report(&guide);
    write(&output.join("report.csv"), &report.csv)?;
    write(&output.join("report.html"), &report.html)?;
    println!("report rows: {}", guide.rules.len());
    Ok(0)
}

fn load_state(path: &Path) -> Result<MachineState, String> {
    MachineState::load(&read_bytes(path)?).map_err(|e| fail(&path.display().to_string(), e))
}

fn load_plan_file(path: &Path) -> Result<emit::ImplementationPlan, String> {
    emit::load_plan(&read_bytes(path)?).map_err(|e| fail(&path.display().to_string(), e))
}

fn print_stats(stats: &mocksys::Stats) {
    println!("total: {}", stats.total);
    println!("compliant: {}", stats.compliant);
    println!("compliance: {}", stats.percentage_text());
    for conflict in &stats.conflicts {
        eprintln!("warning: conflicting writes: {conflict}");
    }
}

pub fn sim_apply(
    plan_path: &Path,
    state_path: &Path,
    out_state: Option<&Path>,
    checkpoints_path: Option<&Path>,
) -> CommandResult {
    let plan = load_plan_file(plan_path)?;
    let mut state = load_state(state_path)?;
    let (checkpoints, stats) =
        mocksys::apply_all(&mut state, &plan).map_err(|e| e.to_string())?;
    write(out_state.unwrap_or(state_path), &state.save())?;
    if let Some(checkpoints_path) = checkpoints_path {
        let bytes = serde_yaml::to_string(&checkpoints)
            .map_err(|e| e.to_string())?
            .into_bytes();
        write(checkpoints_path, &bytes)?;
    }
    print_stats(&stats);
    Ok(0)
}

pub fn sim_check(plan_path: &Path, state_path: &Path) -> CommandResult {
    let plan = load_plan_file(plan_path)?;
    let state = load_state(state_path)?;
    let stats = mocksys::check_all(&state, &plan).map_err(|e| e.to_string())?;
    print_stats(&stats);
    Ok(if stats.total == stats.compliant { 0 } else { 1 })
}

pub fn sim_revert(
    state_path: &Path,
    checkpoints_path: &Path,
    out_state: Option<&Path>,
) -> CommandResult {
    let mut state = load_state(state_path)?;
    let checkpoints: Vec<Checkpoint> = serde_yaml::from_str(&read(checkpoints_path)?)
        .map_err(|e| fail(&checkpoints_path.display().to_string(), e))?;
    for checkpoint in checkpoints.iter().rev() {
        mocksys::revert_rule(&mut state, checkpoint);
    }
    write(out_state.unwrap_or(state_path), &state.save())?;
    println!("reverted rules: {}", checkpoints.len());
    Ok(0)
}

pub fn stats(guide_path: &Path) -> CommandResult {
    let guide = load_guide(guide_path)?;
    let total = guide.rules.len();
    let mut by_status = [0usize; 5];
    let mut checked = 0;
    let mut failed = 0;
    let mut lowered = 0;
    for rule in &guide.rules {
        let index = match rule.extraction_status {
            ExtractionStatus::NotAttempted => 0,
            ExtractionStatus::Extracted => 1,
            ExtractionStatus::NotExtracted => 2,
            ExtractionStatus::Ambiguous => 3,
            ExtractionStatus::ManuallyAuthored => 4,
        };
        by_status[index] += 1;
        let rule_checked = rule
            .win_gpo_automations()
            .any(|a| a.verification_status == VerificationStatus::Checked);
        let rule_failed = rule.win_gpo_automations().any(|a| a.error_class.is_some());
        if rule_checked {
            checked += 1;
        }
        if rule_failed {
            failed += 1;
        }
        if rule.low_level_automations().next().is_some() {
            lowered += 1;
        }
    }
    println!("rules: {total}");
    println!("extracted with nlp: {}", by_status[1]);
    println!("rules without extracted values: {}", by_status[0] + by_status[2] + by_status[3]);
    println!("not extracted: {}", by_status[2]);
    println!("ambiguous: {}", by_status[3]);
    println!("manually authored: {}", by_status[4]);
    println!("verified: {checked}");
    println!("needing attention: {failed}");
    println!("automated rules: {checked}");
    println!("lowered rules: {lowered}");
    Ok(0)
}
