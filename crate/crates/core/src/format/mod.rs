//! On-disk formats. Every model file is TOML opening with
//! `format_version = 1` and a `kind`; traces and metric results are CSV.

mod campaign;
mod documents;
mod trace_csv;

use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use crate::validation::ValidationReport;

pub use campaign::{load_campaign, Campaign, LoadedCampaign, TestObjectConfig};
pub use documents::{
    load_benches, load_product, load_specification, product_document, spec_document, BenchesFile, CaseRecord,
    ItemRecord, ProductFile, SpecFile,
};
pub use trace_csv::{parse_trace_csv, read_trace_csv, write_metric_results_csv, write_trace_csv, REQUIRED_COLUMNS};

pub const FORMAT_VERSION: i64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DocumentKind {
    FunctionalScenario,
    LogicalScenario,
    ConcreteScenario,
    RealWorldTestDrive,
    TestSpecification,
    TestBenches,
    ProductModel,
    Campaign,
}

impl DocumentKind {
    pub const ALL: [DocumentKind; 8] = [
        DocumentKind::FunctionalScenario,
        DocumentKind::LogicalScenario,
        DocumentKind::ConcreteScenario,
        DocumentKind::RealWorldTestDrive,
        DocumentKind::TestSpecification,
        DocumentKind::TestBenches,
        DocumentKind::ProductModel,
        DocumentKind::Campaign,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            DocumentKind::FunctionalScenario => "functional_scenario",
            DocumentKind::LogicalScenario => "logical_scenario",
            DocumentKind::ConcreteScenario => "concrete_scenario",
            DocumentKind::RealWorldTestDrive => "real_world_test_drive",
            DocumentKind::TestSpecification => "test_specification",
            DocumentKind::TestBenches => "test_benches",
            DocumentKind::ProductModel => "product_model",
            DocumentKind::Campaign => "campaign",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.tag() == tag)
    }
}

impl fmt::Display for DocumentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error("{}: trace lacks column `{column}`", path.display())]
    MissingColumn { path: PathBuf, column: String },
    #[error("{}: {} violation(s)\n{report}", path.display(), report.len())]
    Invalid { path: PathBuf, report: ValidationReport },
}

impl FormatError {
    pub fn path(&self) -> &Path {
        match self {
            FormatError::Io { path, .. }
            | FormatError::Parse { path, .. }
            | FormatError::MissingColumn { path, .. }
            | FormatError::Invalid { path, .. } => path,
        }
    }

    pub(crate) fn parse(path: &Path, message: impl fmt::Display) -> Self {
        FormatError::Parse {
            path: path.to_owned(),
            message: message.to_string(),
        }
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.to_owned(),
        source,
    })
}

/// TOML text of `value` under the document header.
pub fn to_document<T: Serialize>(kind: DocumentKind, value: &T) -> String {
    let body = toml::to_string(value).expect("model types serialize to TOML");
    format!("format_version = {FORMAT_VERSION}\nkind = \"{kind}\"\n\n{body}")
}

fn parse_table(text: &str, path: &Path) -> Result<toml::Table, FormatError> {
    text.parse::<toml::Table>().map_err(|e| FormatError::parse(path, e))
}

/// The declared kind of a document.
pub fn document_kind(text: &str, path: &Path) -> Result<DocumentKind, FormatError> {
    let table = parse_table(text, path)?;
    header(&table, path)
}

fn header(table: &toml::Table, path: &Path) -> Result<DocumentKind, FormatError> {
    match table.get("format_version") {
        Some(toml::Value::Integer(FORMAT_VERSION)) => {}
        Some(v) => return Err(FormatError::parse(path, format!("unsupported format_version {v}"))),
        None => return Err(FormatError::parse(path, "missing format_version")),
    }
    match table.get("kind") {
        Some(toml::Value::String(k)) => {
            DocumentKind::from_tag(k).ok_or_else(|| FormatError::parse(path, format!("unknown document kind `{k}`")))
        }
        _ => Err(FormatError::parse(path, "missing document kind")),
    }
}

pub fn parse_document<T: DeserializeOwned>(text: &str, expected: DocumentKind, path: &Path) -> Result<T, FormatError> {
    let mut table = parse_table(text, path)?;
    let kind = header(&table, path)?;
    if kind != expected {
        return Err(FormatError::parse(path, format!("expected a {expected} document, found {kind}")));
    }
    table.remove("format_version");
    table.remove("kind");
    table.try_into().map_err(|e: toml::de::Error| FormatError::parse(path, e))
}

pub fn read_document<T: DeserializeOwned>(path: &Path, expected: DocumentKind) -> Result<T, FormatError> {
    parse_document(&read_text(path)?, expected, path)
}

pub fn write_document<T: Serialize>(path: &Path, kind: DocumentKind, value: &T) -> Result<(), FormatError> {
    std::fs::write(path, to_document(kind, value)).map_err(|source| FormatError::Io {
        path: path.to_owned(),
        source,
    })
}
