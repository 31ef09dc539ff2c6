//! Writes the SpeedControl model bundle (scenarios, specification, benches,
//! product model and two campaigns) into a directory.
//!
//! `cargo run --example export_bundle -- <dir>`

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use scenario_testbench::engine::AccParams;
use scenario_testbench::format::{
    product_document, spec_document, to_document, BenchesFile, Campaign, DocumentKind, TestObjectConfig,
};
use scenario_testbench::speedcontrol;

fn write(dir: &Path, rel: &str, text: String) {
    let path = dir.join(rel);
    std::fs::create_dir_all(path.parent().unwrap()).unwrap();
    std::fs::write(&path, text).unwrap();
    println!("{}", path.display());
}

fn campaign(output_dir: &str, params: AccParams) -> String {
    to_document(
        DocumentKind::Campaign,
        &Campaign {
            spec: "spec.toml".into(),
            benches: "benches.toml".into(),
            product: Some(PathBuf::from("product.toml")),
            output_dir: output_dir.into(),
            time_step: None,
            parallelism: 1,
            test_object: TestObjectConfig::BuiltinAcc { params },
        },
    )
}

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "speedcontrol".into()));
    let concrete = speedcontrol::concrete_scenario();
    write(
        &dir,
        "scenarios/functional.toml",
        to_document(DocumentKind::FunctionalScenario, &speedcontrol::functional_scenario()),
    );
    write(
        &dir,
        "scenarios/logical.toml",
        to_document(DocumentKind::LogicalScenario, &speedcontrol::logical_scenario()),
    );
    write(&dir, "scenarios/concrete.toml", to_document(DocumentKind::ConcreteScenario, &concrete));
    write(
        &dir,
        "scenarios/drive.toml",
        to_document(DocumentKind::RealWorldTestDrive, &speedcontrol::real_world_drive()),
    );
    let files = BTreeMap::from([(concrete.id.clone(), "scenarios/concrete.toml".to_owned())]);
    write(&dir, "spec.toml", spec_document(&speedcontrol::specification(), &files));
    write(
        &dir,
        "benches.toml",
        to_document(
            DocumentKind::TestBenches,
            &BenchesFile {
                benches: vec![speedcontrol::hil_bench(), speedcontrol::sil_bench()],
                configurations: vec![speedcontrol::hil_configuration()],
            },
        ),
    );
    write(&dir, "product.toml", product_document(&speedcontrol::product_model()));
    write(&dir, "campaign.toml", campaign("out", AccParams::default()));
    write(
        &dir,
        "campaign-harsh-braking.toml",
        campaign(
            "out-harsh-braking",
            AccParams {
                a_min: -4.5,
                ..AccParams::default()
            },
        ),
    );
}
