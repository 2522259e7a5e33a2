//! Core library of the guideforge toolchain: turns human-readable
//! security-configuration guides into verified, machine-executable
//! hardening plans.
//!
//! Pipeline stages, in order:
//!
//! 1. [`catalog`] — compile ADMX/ADML templates and legacy definitions into
//!    a queryable settings catalog.
//! 2. [`guide`] — parse and re-serialize guides (YAML/Markdown rule files,
//!    XCCDF import).
//! 3. [`extract`] — pull policy paths and values out of the guide prose with
//!    a POS-tag pattern grammar.
//! 4. [`verify`] — validate every extracted automation against the catalog;
//!    enrich failures with ranked suggestions.
//! 5. [`lower`] — translate verified automations into registry,
//!    security-template, and audit primitives.
//! 6. [`emit`] — produce deployable artifacts: plan document, registry.pol,
//!    GptTmpl.inf, audit.csv, review report.
//! 7. [`mocksys`] — apply, check, and revert plans against a simulated
//!    machine state.

pub mod catalog;
pub mod emit;
pub mod extract;
pub mod guide;
pub mod lower;
pub mod mocksys;
pub mod paths;
pub mod registry;
pub mod verify;
