//! The shipped fixture files are generated from the default model. Set
//! `SIVSTRAIN_REGENERATE=1` to rewrite them after a model change.

use std::fs;
use std::path::PathBuf;

use sivstrain_cli::commands::{exact_strain, synthetic_pair, write_spectra};
use sivstrain_cli::config::RunConfig;
use sivstrain_core::devicemodel::STRAIN_COLUMNS;
use sivstrain_core::fitkit::synthetic::{transverse_trajectory, TRANSVERSE_MAX_VOLTS};

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn expected() -> Vec<(&'static str, String)> {
    let cfg = RunConfig::default();
    let (axial, transverse) = synthetic_pair(&cfg).unwrap();
    let mut a = Vec::new();
    write_spectra(
        &mut a,
        &axial,
        "synthetic axial sweep of the default model, [111] emitter, zero field\nstrain columns are in the [111] defect frame",
    )
    .unwrap();
    let mut t = Vec::new();
    write_spectra(
        &mut t,
        &transverse,
        "synthetic transverse sweep of the default model, [-111] emitter, beam surrogate, zero field\nstrain columns are in the [-111] defect frame",
    )
    .unwrap();

    let traj = transverse_trajectory(&cfg.beam, 29, TRANSVERSE_MAX_VOLTS).unwrap();
    let mut tr = String::from("# synthetic beam-surrogate trajectory, crystal frame\n");
    tr.push_str(&format!("control_v,{}\n", STRAIN_COLUMNS.join(",")));
    for (v, e) in traj.controls().iter().zip(traj.strains()) {
        let cells: Vec<String> = e.components().iter().map(|&c| exact_strain(c)).collect();
        tr.push_str(&format!("{v},{}\n", cells.join(",")));
    }
    vec![
        ("axial_spectra.csv", String::from_utf8(a).unwrap()),
        ("transverse_spectra.csv", String::from_utf8(t).unwrap()),
        ("transverse_trajectory.csv", tr),
    ]
}

#[test]
fn shipped_fixtures_match_the_model() {
    let regenerate = std::env::var_os("SIVSTRAIN_REGENERATE").is_some();
    for (name, text) in expected() {
        let path = fixture_dir().join(name);
        if regenerate {
            fs::write(&path, &text).unwrap();
            continue;
        }
        let shipped = fs::read_to_string(&path).unwrap_or_default();
        assert!(shipped == text, "{name} is stale; rerun with SIVSTRAIN_REGENERATE=1");
    }
}
