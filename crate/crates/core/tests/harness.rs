use qrecovery::harness::{
    cmd_bk, cmd_counterexample, cmd_sweep, cmd_universal, cmd_verify, deterministic_json,
    CampaignReport, Ensemble, ExperimentConfig, SweepConfig,
};
use qrecovery::linalg::diag_real;
use qrecovery::recovery::{petz_transpose, recovery_report};
use qrecovery::sdp::fidelity_of_recovery;
use qrecovery::states::{classical_chain_state, counterexample_state, random_density};
use qrecovery::{DensityMatrix, DimVector, TripartiteLabels};

fn config(samples: usize, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        samples,
        seed,
        ..Default::default()
    }
}

fn check_aggregates(r: &CampaignReport) {
    for (name, agg) in &r.aggregates {
        let reports: Vec<_> = r
            .samples
            .iter()
            .filter_map(|s| s.reports.get(name))
            .collect();
        assert_eq!(agg.samples, reports.len());
        let min = |f: fn(&qrecovery::recovery::RecoveryReport) -> f64| {
            reports.iter().map(|x| f(x)).fold(f64::INFINITY, f64::min)
        };
        assert_eq!(agg.min_delta_thm1, min(|x| x.delta_thm1));
        assert_eq!(agg.min_delta_cor3, min(|x| x.delta_cor3));
        assert_eq!(agg.min_fid, min(|x| x.fid));
    }
}

#[test]
fn verify_is_deterministic_and_self_consistent() {
    let a = cmd_verify(&config(8, 17)).unwrap();
    let b = cmd_verify(&config(8, 17)).unwrap();
    assert_eq!(
        deterministic_json(&a).unwrap(),
        deterministic_json(&b).unwrap()
    );
    assert_ne!(
        deterministic_json(&a).unwrap(),
        deterministic_json(&cmd_verify(&config(8, 18)).unwrap()).unwrap()
    );
    check_aggregates(&a);
    assert!(a.passed());
    assert_eq!(a.certified_map, "optimal");
    let tol = a.config.tolerance;
    let counted = a
        .samples
        .iter()
        .filter(|s| {
            let r = &s.reports["optimal"];
            r.delta_thm1 < -tol || r.delta_cor3 < -tol
        })
        .count();
    assert_eq!(counted, a.violations);
}

#[test]
fn verify_on_markov_chains_recovers_exactly() {
    let cfg = ExperimentConfig {
        ensemble: Ensemble::Markov,
        ..config(10, 3)
    };
    let r = cmd_verify(&cfg).unwrap();
    for s in &r.samples {
        for rep in s.reports.values() {
            assert!((rep.fid - 1.0).abs() <= 1e-8, "{}", rep.fid);
        }
    }
}

#[test]
fn zero_samples_is_a_config_error() {
    assert!(cmd_verify(&config(0, 0)).is_err());
    assert!(cmd_universal(&config(0, 0)).is_err());
    assert!(cmd_bk(&config(0, 0)).is_err());
}

#[test]
fn verify_writes_its_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("verify.json");
    let cfg = ExperimentConfig {
        out: Some(out.clone()),
        ..config(3, 1)
    };
    let r = cmd_verify(&cfg).unwrap();
    let text = std::fs::read_to_string(&out).unwrap();
    let back: CampaignReport = serde_json::from_str(&text).unwrap();
    assert_eq!(
        deterministic_json(&back).unwrap(),
        deterministic_json(&r).unwrap()
    );
}

#[test]
fn universal_on_a_product_marginal_is_tight() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bc.json");
    let dv = |d: &[usize]| DimVector::new(d.to_vec()).unwrap();
    let rho_b = random_density(&dv(&[2]), 2, 4).unwrap();
    let rho_c = random_density(&dv(&[2]), 2, 5).unwrap();
    rho_b.tensor(&rho_c).save_json(&path).unwrap();
    let cfg = ExperimentConfig {
        state: Some(path),
        compute_dm: true,
        ..config(6, 9)
    };
    let r = cmd_universal(&cfg).unwrap();
    assert!(r.passed());
    let ch = r.channel.as_ref().unwrap();
    assert!(ch.tpcp.passed());
    assert!(ch.marginal_image_error <= 1e-8);
    for s in &r.samples {
        assert!(s.marginal_error.unwrap() <= 1e-10);
        let rep = &s.reports["averaged"];
        // the averaged map is the transpose map here, and D_M ≤ D = I
        assert!(rep.delta_meas.unwrap() >= -1e-5);
    }
}

#[test]
fn single_extension_universal_matches_verify_maps() {
    let r = cmd_universal(&config(1, 2)).unwrap();
    assert_eq!(r.samples.len(), 1);
    assert!(r.samples[0].reports.contains_key("petz"));
    assert!(r.samples[0].reports.contains_key("averaged"));
}

#[test]
fn counterexample_reproduces_the_separation() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cx.json");
    let r = cmd_counterexample(Some(&out)).unwrap();
    assert!(r.passed());
    assert!(r.f_given > 0.9829 && r.sqrt_f_transpose < 0.9696);
    assert!(r.f_given <= r.fidelity_of_recovery.dual_bound + 1e-9);
    assert!(out.exists());
}

#[test]
fn sweep_on_a_classical_state_is_flat() {
    let table = cmd_sweep(&classical_chain_state(), &SweepConfig::default()).unwrap();
    let t0 = table.rotated().find(|r| r.t == Some(0.0)).unwrap().fidelity;
    for row in table.rotated() {
        assert!((row.fidelity - t0).abs() <= 1e-10);
    }
}

#[test]
fn sweep_rows_are_dominated_by_the_optimum() {
    let rho = counterexample_state();
    let table = cmd_sweep(&rho, &SweepConfig::default()).unwrap();
    assert_eq!(table.rotated().count(), 41);
    let opt = table.find("optimal").unwrap().fidelity;
    for row in &table.rows {
        assert!(row.fidelity <= opt + 1e-6, "{row:?}");
    }
    let labels = TripartiteLabels::standard();
    let petz = recovery_report(
        &rho,
        &labels,
        &petz_transpose(&rho.marginal(&[1, 2]).unwrap()).unwrap(),
        false,
    )
    .unwrap()
    .fid;
    let t0 = table.rotated().find(|r| r.t == Some(0.0)).unwrap();
    assert_eq!(t0.fidelity, petz);
    assert_eq!(table.find("petz").unwrap().fidelity, petz);

    let csv = table.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("kind,t,fidelity"));
    assert_eq!(lines.count(), table.rows.len());
}

#[test]
fn sweep_rejects_empty_grid() {
    let cfg = SweepConfig {
        steps: 0,
        ..Default::default()
    };
    assert!(cmd_sweep(&counterexample_state(), &cfg).is_err());
}

#[test]
fn bk_random_pure_states() {
    let r = cmd_bk(&config(12, 4)).unwrap();
    assert!(r.passed());
    assert!(r.min_lower_slack >= -1e-6);
    assert!(r.min_upper_slack >= -1e-6);
}

#[test]
fn bk_product_pure_state_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("000.json");
    let m = diag_real(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    DensityMatrix::from_dims(m, &[2, 2, 2])
        .unwrap()
        .save_json(&path)
        .unwrap();
    let r = cmd_bk(&ExperimentConfig {
        state: Some(path),
        ..config(1, 0)
    })
    .unwrap();
    assert!(r.passed());
    let s = &r.samples[0];
    for v in [s.f_transpose, s.sqrt_f_transpose, s.f_recovery] {
        assert!((v - 1.0).abs() <= 1e-6, "{v}");
    }
}

#[test]
fn bk_excludes_mixed_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mixed.json");
    counterexample_state().save_json(&path).unwrap();
    let r = cmd_bk(&ExperimentConfig {
        state: Some(path),
        ..config(1, 0)
    })
    .unwrap();
    assert!(r.samples.is_empty());
    assert_eq!(r.excluded.len(), 1);
}

#[test]
fn optimum_dominates_every_petz_variant() {
    let rho = random_density(&DimVector::new(vec![2, 2, 2]).unwrap(), 8, 99).unwrap();
    let labels = TripartiteLabels::standard();
    let opt = fidelity_of_recovery(&rho, &labels).unwrap();
    let table = cmd_sweep(
        &rho,
        &SweepConfig {
            steps: 11,
            ..Default::default()
        },
    )
    .unwrap();
    for row in &table.rows {
        assert!(row.fidelity <= opt.dual_bound.max(opt.value) + 1e-6);
    }
}
