use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::documents::{load_benches, load_product, load_specification, BenchesFile};
use super::{read_document, DocumentKind, FormatError};
use crate::engine::{AccController, AccParams, ConstantOutput, TestObject};
use crate::product::ProductModel;
use crate::spec::TestSpecification;
use crate::units::serde_si;
use crate::validation::ValidationReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TestObjectConfig {
    BuiltinAcc {
        #[serde(default)]
        params: AccParams,
    },
    /// Never commands anything; a reference for open-loop comparisons.
    Zero,
}

impl Default for TestObjectConfig {
    fn default() -> Self {
        TestObjectConfig::BuiltinAcc {
            params: AccParams::default(),
        }
    }
}

impl TestObjectConfig {
    pub fn instantiate(&self) -> Box<dyn TestObject + Send> {
        match self {
            TestObjectConfig::BuiltinAcc { params } => Box::new(AccController::new(*params)),
            TestObjectConfig::Zero => Box::new(ConstantOutput::zero()),
        }
    }

    pub fn validate(&self) -> ValidationReport {
        match self {
            TestObjectConfig::BuiltinAcc { params } => {
                let mut r = ValidationReport::new();
                r.extend_prefixed("test_object.params", params.validate());
                r
            }
            TestObjectConfig::Zero => ValidationReport::new(),
        }
    }
}

fn one() -> usize {
    1
}

/// A campaign file. Paths are relative to the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Campaign {
    pub spec: PathBuf,
    pub benches: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub product: Option<PathBuf>,
    pub output_dir: PathBuf,
    /// Overrides every configuration's time step.
    #[serde(default, with = "serde_si::time::option", skip_serializing_if = "Option::is_none")]
    pub time_step: Option<f64>,
    #[serde(default = "one")]
    pub parallelism: usize,
    #[serde(default)]
    pub test_object: TestObjectConfig,
}

/// A campaign with every referenced file loaded; paths resolved.
#[derive(Debug, Clone)]
pub struct LoadedCampaign {
    pub path: PathBuf,
    pub campaign: Campaign,
    pub spec: TestSpecification,
    pub benches: BenchesFile,
    pub product: Option<ProductModel>,
}

pub fn load_campaign(path: &Path) -> Result<LoadedCampaign, FormatError> {
    let mut campaign: Campaign = read_document(path, DocumentKind::Campaign)?;
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    campaign.spec = dir.join(&campaign.spec);
    campaign.benches = dir.join(&campaign.benches);
    campaign.product = campaign.product.map(|p| dir.join(p));
    campaign.output_dir = dir.join(&campaign.output_dir);

    let mut report = campaign.test_object.validate();
    report.check(campaign.parallelism >= 1, "parallelism", "parallelism must be >= 1");
    if let Some(dt) = campaign.time_step {
        report.check(dt > 0.0, "time_step", "time_step > 0");
    }
    if !report.is_empty() {
        return Err(FormatError::Invalid {
            path: path.to_owned(),
            report,
        });
    }
    let spec = load_specification(&campaign.spec)?;
    let benches = load_benches(&campaign.benches)?;
    let product = campaign.product.as_deref().map(load_product).transpose()?;
    Ok(LoadedCampaign {
        path: path.to_owned(),
        campaign,
        spec,
        benches,
        product,
    })
}
