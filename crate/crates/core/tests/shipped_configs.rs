//! The configs under `configs/` parse, and each golden table has exactly the
//! shape of the sweep that is compared against it.

use std::collections::BTreeSet;
use std::path::PathBuf;

use helmholtz_iga::harness::{load_reference, ExperimentConfig, Study};

fn configs() -> Vec<(PathBuf, ExperimentConfig)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "cfg"))
        .map(|p| {
            let cfg = ExperimentConfig::load(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            (p, cfg)
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

#[test]
fn every_shipped_config_parses_with_a_unique_name() {
    let all = configs();
    assert!(all.len() >= 9);
    let names: BTreeSet<_> = all.iter().map(|(_, c)| c.name.clone()).collect();
    assert_eq!(names.len(), all.len());
    for (path, cfg) in &all {
        assert_eq!(path.file_stem().unwrap().to_str().unwrap(), cfg.name);
        if cfg.study == Study::Iterations || cfg.study == Study::Spectrum {
            assert!(!cfg.preconditioners.is_empty(), "{}", cfg.name);
        }
    }
}

#[test]
fn golden_tables_cover_the_sweep_exactly() {
    for (_, cfg) in configs() {
        let Some(reference) = &cfg.reference else { continue };
        let cells = load_reference(reference).unwrap();
        let from_table: BTreeSet<(String, usize, u64)> =
            cells.iter().map(|c| (c.preconditioner.clone(), c.p, c.k.to_bits())).collect();
        assert_eq!(from_table.len(), cells.len(), "{}: duplicate cells", cfg.name);
        let mut from_sweep = BTreeSet::new();
        for pc in &cfg.preconditioners {
            for &p in &cfg.ps {
                for k in &cfg.ks {
                    from_sweep.insert((pc.label.clone(), p, k.to_bits()));
                }
            }
        }
        assert_eq!(from_table, from_sweep, "{}", cfg.name);
    }
}

#[test]
fn mp2b_table_is_rounded_to_the_step_grid() {
    let (_, cfg) = configs().into_iter().find(|(_, c)| c.name == "mp2b_layered_medium").unwrap();
    for &k in &cfg.ks {
        assert_eq!(cfg.elements_for(k, cfg.kh[0]) % 4, 0);
    }
    let p5 = cfg.preconditioners[0].for_order(5);
    assert_eq!((p5.nu, cfg.preconditioners[0].for_order(4).nu), (2, 3));
}
