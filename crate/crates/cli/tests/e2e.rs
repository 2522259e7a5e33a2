//! Full pipeline through the real binary: catalog build, extract, the
//! verify/fix/re-verify loop, lowering, exports, and the simulator, with
//! exit codes and re-run idempotence checked at every stage.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_guideforge"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_expect(args: &[&str], expected_code: i32) -> String {
    let output = run(args);
    let stdout = String::from_utf8_lossy(&output.stdout).to_string();
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert_eq!(
        output.status.code(),
        Some(expected_code),
        "guideforge {args:?}\nstdout:\n{stdout}\nstderr:\n{stderr}"
    );
    stdout
}

fn line_value(stdout: &str, key: &str) -> String {
    stdout
        .lines()
        .find_map(|line| line.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no `{key}` line in:\n{stdout}"))
        .to_string()
}

fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(current) = stack.pop() {
        for entry in std::fs::read_dir(&current).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                files.push((path.clone(), std::fs::read(&path).unwrap()));
            }
        }
    }
    files.sort();
    files
}

/// The whole review workflow as one scripted session.
#[test]
fn full_pipeline_with_fix_loop_and_simulation() {
    let workdir = tempfile::tempdir().unwrap();
    let dir = workdir.path();
    let path_of = |name: &str| dir.join(name).display().to_string();

    // stage 1: catalog build
    let stdout = run_expect(
        &[
            "catalog", "build",
            "--admx", &fixtures().join("admx").display().to_string(),
            "--adml", &fixtures().join("adml").display().to_string(),
            "--legacy", &fixtures().join("legacy_definitions.yaml").display().to_string(),
            "--out", &path_of("catalog.yaml"),
        ],
        0,
    );
    assert_eq!(line_value(&stdout, "total definitions"), "40");

    // stage 2: bring in the guide (already scapolite, just copy)
    std::fs::copy(fixtures().join("guides/baseline30.guide.md"), dir.join("guide.md")).unwrap();

    // stage 3: extract
    let stdout = run_expect(&["extract", "--guide", &path_of("guide.md")], 0);
    assert_eq!(line_value(&stdout, "extracted"), "28");
    let after_first_extract = std::fs::read(dir.join("guide.md")).unwrap();
    run_expect(&["extract", "--guide", &path_of("guide.md")], 0);
    assert_eq!(
        std::fs::read(dir.join("guide.md")).unwrap(),
        after_first_extract,
        "extract must be a fixpoint"
    );

    // stage 4: first verification flags the three seeded rules
    let stdout = run_expect(
        &["verify", "--guide", &path_of("guide.md"), "--catalog", &path_of("catalog.yaml")],
        1,
    );
    assert_eq!(line_value(&stdout, "checked"), "25");
    assert_eq!(line_value(&stdout, "path not found"), "1");
    assert_eq!(line_value(&stdout, "value invalid"), "1");
    assert_eq!(line_value(&stdout, "underspecified"), "1");
    let after_first_verify = std::fs::read(dir.join("guide.md")).unwrap();
    run_expect(
        &["verify", "--guide", &path_of("guide.md"), "--catalog", &path_of("catalog.yaml")],
        1,
    );
    assert_eq!(
        std::fs::read(dir.join("guide.md")).unwrap(),
        after_first_verify,
        "verify must be a fixpoint"
    );

    // the reviewer applies the bundled fixes...
    apply_fixes(&dir.join("guide.md"));

    // ...and re-runs verification: everything checks
    let stdout = run_expect(
        &["verify", "--guide", &path_of("guide.md"), "--catalog", &path_of("catalog.yaml")],
        0,
    );
    assert_eq!(line_value(&stdout, "checked"), "28");

    // stage 5: lower
    let stdout = run_expect(
        &["lower", "--guide", &path_of("guide.md"), "--catalog", &path_of("catalog.yaml")],
        0,
    );
    assert_eq!(line_value(&stdout, "lowered rules"), "28");
    let after_lower = std::fs::read(dir.join("guide.md")).unwrap();
    run_expect(
        &["lower", "--guide", &path_of("guide.md"), "--catalog", &path_of("catalog.yaml")],
        0,
    );
    assert_eq!(std::fs::read(dir.join("guide.md")).unwrap(), after_lower);

    // stage 6: exports, each re-runnable byte-identically
    let out = path_of("out");
    for what in ["plan", "pol", "inf", "audit", "report"] {
        run_expect(&["export", what, "--guide", &path_of("guide.md"), "--output", &out], 0);
    }
    let first_export = snapshot(&dir.join("out"));
    for what in ["plan", "pol", "inf", "audit", "report"] {
        run_expect(&["export", what, "--guide", &path_of("guide.md"), "--output", &out], 0);
    }
    assert_eq!(snapshot(&dir.join("out")), first_export, "exports must be deterministic");
    assert!(dir.join("out/machine/registry.pol").exists());
    assert!(dir.join("out/user/registry.pol").exists());
    assert!(dir.join("out/GptTmpl.inf").exists());
    assert!(dir.join("out/audit.csv").exists());
    assert!(dir.join("out/report.csv").exists());
    assert!(dir.join("out/report.html").exists());

    // the machine scope carries entries; the user scope carries the two
    // user-configuration rules
    let machine_pol = std::fs::read(dir.join("out/machine/registry.pol")).unwrap();
    assert_eq!(&machine_pol[..8], &[0x50, 0x52, 0x65, 0x67, 0x01, 0x00, 0x00, 0x00]);
    let user_pol = std::fs::read(dir.join("out/user/registry.pol")).unwrap();
    assert!(user_pol.len() > 8);

    // stage 7: simulate. default state starts fully non-compliant.
    std::fs::copy(fixtures().join("state/default_state.yaml"), dir.join("state.yaml")).unwrap();
    let stdout = run_expect(
        &["sim", "check", "--plan", &path_of("out/plan.json"), "--state", &path_of("state.yaml")],
        1,
    );
    assert_eq!(line_value(&stdout, "compliance"), "0.0%");

    let before_digest = std::fs::read(dir.join("state.yaml")).unwrap();
    let stdout = run_expect(
        &[
            "sim", "apply",
            "--plan", &path_of("out/plan.json"),
            "--state", &path_of("state.yaml"),
            "--out-state", &path_of("hardened.yaml"),
            "--checkpoints", &path_of("checkpoints.yaml"),
        ],
        0,
    );
    assert_eq!(line_value(&stdout, "compliance"), "100.0%");

    // same inputs, same outputs
    let hardened = std::fs::read(dir.join("hardened.yaml")).unwrap();
    let checkpoints = std::fs::read(dir.join("checkpoints.yaml")).unwrap();
    run_expect(
        &[
            "sim", "apply",
            "--plan", &path_of("out/plan.json"),
            "--state", &path_of("state.yaml"),
            "--out-state", &path_of("hardened.yaml"),
            "--checkpoints", &path_of("checkpoints.yaml"),
        ],
        0,
    );
    assert_eq!(std::fs::read(dir.join("hardened.yaml")).unwrap(), hardened);
    assert_eq!(std::fs::read(dir.join("checkpoints.yaml")).unwrap(), checkpoints);

    let stdout = run_expect(
        &["sim", "check", "--plan", &path_of("out/plan.json"), "--state", &path_of("hardened.yaml")],
        0,
    );
    assert_eq!(line_value(&stdout, "compliance"), "100.0%");

    // revert restores the pre-apply snapshot byte for byte
    run_expect(
        &[
            "sim", "revert",
            "--state", &path_of("hardened.yaml"),
            "--checkpoints", &path_of("checkpoints.yaml"),
            "--out-state", &path_of("restored.yaml"),
        ],
        0,
    );
    let restored = std::fs::read(dir.join("restored.yaml")).unwrap();
    let original = guideforge_core::mocksys::MachineState::load(&before_digest).unwrap();
    let roundtripped = guideforge_core::mocksys::MachineState::load(&restored).unwrap();
    assert_eq!(original, roundtripped);
    assert_eq!(original.digest(), roundtripped.digest());

    // stage 8: stats
    let stdout = run_expect(&["stats", "--guide", &path_of("guide.md")], 0);
    assert_eq!(line_value(&stdout, "rules"), "30");
    assert_eq!(line_value(&stdout, "extracted with nlp"), "28");
    assert_eq!(line_value(&stdout, "automated rules"), "28");
    assert_eq!(line_value(&stdout, "lowered rules"), "28");
}

/// Apply the manifest's bundled corrections the way a reviewer would,
/// editing the guide file between verification runs.
fn apply_fixes(guide_path: &Path) {
    use guideforge_core::guide::{parse_scapolite, serialize_scapolite, Automation, PolicyValue};
    use guideforge_core::paths::PolicyPath;

    let mut guide = parse_scapolite(&std::fs::read_to_string(guide_path).unwrap()).unwrap();
    let fixes: Vec<(&str, Option<&str>, Option<PolicyValue>)> = vec![
        (
            "SV-90034",
            Some("Computer Configuration\\Administrative Templates\\Control Panel\\Personalization\\Prevent enabling lock screen camera"),
            None,
        ),
        (
            "SV-90035",
            None,
            Some(PolicyValue::Choice("Send NTLMv2 response only. Refuse LM & NTLM".into())),
        ),
        (
            "SV-90036",
            None,
            Some(PolicyValue::Composite {
                main: Box::new(PolicyValue::Toggle(true)),
                sub: vec![(
                    "Pick one of the following settings".into(),
                    PolicyValue::Choice("Warn and prevent bypass".into()),
                )],
            }),
        ),
    ];
    for (id, path, value) in fixes {
        let rule = guide.rules.iter_mut().find(|r| r.id == id).unwrap();
        for implementation in &mut rule.implementations {
            for automation in &mut implementation.automations {
                if let Automation::WinGpo(gpo) = automation {
                    if let Some(path) = path {
                        gpo.ui_path = PolicyPath::parse(path).unwrap();
                    }
                    if let Some(value) = &value {
                        gpo.value = value.clone();
                    }
                }
            }
        }
    }
    std::fs::write(guide_path, serialize_scapolite(&guide)).unwrap();
}

#[test]
fn empty_admx_directory_builds_an_empty_catalog() {
    let workdir = tempfile::tempdir().unwrap();
    let empty = workdir.path().join("empty");
    std::fs::create_dir_all(&empty).unwrap();
    let out = workdir.path().join("catalog.yaml");
    let stdout = run_expect(
        &[
            "catalog", "build",
            "--admx", &empty.display().to_string(),
            "--adml", &empty.display().to_string(),
            "--out", &out.display().to_string(),
        ],
        0,
    );
    assert_eq!(line_value(&stdout, "total definitions"), "0");
}

#[test]
fn colliding_definitions_exit_with_code_two() {
    let workdir = tempfile::tempdir().unwrap();
    let dir = workdir.path();
    std::fs::create_dir_all(dir.join("admx")).unwrap();
    std::fs::create_dir_all(dir.join("adml")).unwrap();
    // two files, same category display chain and policy display name
    for stem in ["First", "Second"] {
        std::fs::write(
            dir.join(format!("admx/{stem}.admx")),
            r#"<policyDefinitions><categories><category name="C" displayName="Shared" /></categories>
              <policies><policy name="P" class="Machine" displayName="Twin" key="K" valueName="V">
              <parentCategory ref="C" /><enabledValue><decimal value="1"/></enabledValue>
              </policy></policies></policyDefinitions>"#,
        )
        .unwrap();
        std::fs::write(
            dir.join(format!("adml/{stem}.adml")),
            "<policyDefinitionResources><resources><stringTable/></resources></policyDefinitionResources>",
        )
        .unwrap();
    }
    let output = run(&[
        "catalog", "build",
        "--admx", &dir.join("admx").display().to_string(),
        "--adml", &dir.join("adml").display().to_string(),
        "--out", &dir.join("catalog.yaml").display().to_string(),
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("collision"));
}

#[test]
fn xccdf_import_then_extract_runs_clean() {
    let workdir = tempfile::tempdir().unwrap();
    let dir = workdir.path();
    let xccdf = dir.join("benchmark.xml");
    std::fs::write(
        &xccdf,
        r#"<Benchmark id="b"><title>Mini benchmark</title>
          <Group id="g"><title>G</title>
          <Rule id="SV-1"><title>Lock screen camera must be off.</title>
          <fixtext>Configure the policy value for Computer Configuration >> Administrative Templates >> Control Panel >> Personalization >> "Prevent enabling lock screen camera" to "Enabled".</fixtext>
          </Rule></Group></Benchmark>"#,
    )
    .unwrap();
    let guide = dir.join("guide.md");
    let stdout = run_expect(
        &[
            "guide", "import",
            "--xccdf", &xccdf.display().to_string(),
            "--out", &guide.display().to_string(),
        ],
        0,
    );
    assert_eq!(line_value(&stdout, "rules"), "1");
    let stdout = run_expect(&["extract", "--guide", &guide.display().to_string()], 0);
    assert_eq!(line_value(&stdout, "extracted"), "1");
}

#[test]
fn extract_on_an_empty_guide_exits_zero() {
    let workdir = tempfile::tempdir().unwrap();
    let guide = workdir.path().join("guide.md");
    std::fs::write(&guide, "title: Empty\nsource: scapolite\n").unwrap();
    let stdout = run_expect(&["extract", "--guide", &guide.display().to_string()], 0);
    assert_eq!(line_value(&stdout, "rules"), "0");
}

#[test]
fn stats_on_an_empty_guide_prints_zeros() {
    let workdir = tempfile::tempdir().unwrap();
    let guide = workdir.path().join("guide.md");
    std::fs::write(&guide, "title: Empty\nsource: scapolite\n").unwrap();
    let stdout = run_expect(&["stats", "--guide", &guide.display().to_string()], 0);
    for key in ["rules", "extracted with nlp", "verified", "automated rules", "lowered rules"] {
        assert_eq!(line_value(&stdout, key), "0", "{key}");
    }
}

#[test]
fn custom_ruleset_and_lexicon_files_replace_the_bundled_grammar() {
    let workdir = tempfile::tempdir().unwrap();
    let dir = workdir.path();
    // a grammar with one rule and a lexicon whose only preposition is "under"
    std::fs::write(
        dir.join("rules.yaml"),
        "- name: UNDER_PATH_TO_VALUE\n  priority: 1\n  pattern: '<IN> {PATH:<.*>+} <TO> {MAIN_VALUE:<NNP>} <.>'\n",
    )
    .unwrap();
    std::fs::write(
        dir.join("lexicon.yaml"),
        "words:\n  under: IN\n  to: TO\nsentence_start_verbs: [place]\nsuffix_rules: []\n",
    )
    .unwrap();
    std::fs::write(
        dir.join("guide.md"),
        "title: Custom grammar\n---\nid: R1\n---\n## /rule\nCustom grammar rule.\n\n## /implementations/0/description\nPlace the marker under Computer Configuration >> Some Area >> Some Policy to Green.\n",
    )
    .unwrap();
    let stdout = run_expect(
        &[
            "extract",
            "--guide", &dir.join("guide.md").display().to_string(),
            "--rules", &dir.join("rules.yaml").display().to_string(),
            "--lexicon", &dir.join("lexicon.yaml").display().to_string(),
        ],
        0,
    );
    assert_eq!(line_value(&stdout, "extracted"), "1");
    let guide = std::fs::read_to_string(dir.join("guide.md")).unwrap();
    assert!(guide.contains("ui_path: Computer Configuration\\Some Area\\Some Policy"));
    assert!(guide.contains("value: Green"));
}

#[test]
fn missing_inputs_exit_with_code_two() {
    let output = run(&["verify", "--guide", "/nonexistent/guide.md", "--catalog", "/nonexistent/catalog.yaml"]);
    assert_eq!(output.status.code(), Some(2));
}
