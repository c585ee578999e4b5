use std::process::ExitCode;
use std::time::{Duration, Instant};

use qrecovery::entropy::{classical_kl, cmi, measured_relative_entropy, relative_entropy};
use qrecovery::harness::{cmd_bk, cmd_counterexample, cmd_universal, cmd_verify, ExperimentConfig};
use qrecovery::linalg::{diag_real, fidelity, max_abs_diff, trace_norm, unit};
use qrecovery::recovery::{
    averaged_rotated_petz, counterexample_map, petz_transpose, recover, recovery_report,
    rotated_petz, validate_tpcp, AveragingScheme, Channel, WeightLaw,
};
use qrecovery::sdp::{fidelity_of_recovery, fidelity_sdp};
use qrecovery::states::{
    classical_chain_state, counterexample_state, qcq_state, random_density, random_density_with,
    random_extension, random_markov_state, rng_for_sample, rng_from_seed,
};
use qrecovery::{DensityMatrix, DimVector, Result, TripartiteLabels};
use rand::Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { passed, detail })
}

fn dims(d: &[usize]) -> DimVector {
    DimVector::new(d.to_vec()).unwrap()
}

fn within(elapsed: Duration, limit: f64) -> bool {
    elapsed.as_secs_f64() < limit
}

fn criterion_1() -> Result<Outcome> {
    let start = Instant::now();
    let r = cmd_counterexample(None)?;
    let t = start.elapsed();
    let ok = r.f_given > 0.9829
        && r.f_given < 1.0
        && r.sqrt_f_transpose > 0.0
        && r.sqrt_f_transpose < 0.9696
        && r.f_given > r.sqrt_f_transpose
        && within(t, 1.0);
    outcome(
        ok,
        format!(
            "F(R_given) = {:.8}, sqrt F(T) = {:.8}, {:.3}s",
            r.f_given,
            r.sqrt_f_transpose,
            t.as_secs_f64()
        ),
    )
}

fn criterion_2() -> Result<Outcome> {
    let rho_bc = counterexample_state().marginal(&[1, 2])?;
    let t = petz_transpose(&rho_bc)?;
    let t0 = t.apply_matrix(&unit(2, 0, 0))?;
    let t1 = t.apply_matrix(&unit(2, 1, 1))?;
    let e0 = max_abs_diff(&t0, &diag_real(&[5.0 / 6.0, 1.0 / 6.0, 0.0, 0.0]));
    let e1 = max_abs_diff(&t1, &diag_real(&[0.0, 0.0, 0.5, 0.5]));
    let err = e0.max(e1);
    outcome(err <= 1e-12, format!("max entry error {err:.2e}"))
}

fn criterion_3() -> Result<Outcome> {
    let start = Instant::now();
    let labels = TripartiteLabels::standard();
    let mut min_i = f64::INFINITY;
    let mut count = 0;
    for (shape, n, base) in [([2, 2, 2], 500u64, 3_000u64), ([2, 3, 2], 200, 4_000)] {
        let dv = dims(&shape);
        for k in 0..n {
            let rank = 1 + (k as usize % dv.total());
            let rho = random_density(&dv, rank, base + k)?;
            min_i = min_i.min(cmi(&rho, &labels)?.i_ac_given_b);
            count += 1;
        }
    }
    let t = start.elapsed();
    outcome(
        min_i >= -1e-9 && within(t, 30.0),
        format!(
            "{count} states, min I(A:C|B) = {min_i:.3e}, {:.2}s",
            t.as_secs_f64()
        ),
    )
}

fn random_classical_chain(k: u64) -> Result<DensityMatrix> {
    let mut rng = rng_for_sample(41, k);
    let (d_a, d_b, d_c) = (
        rng.random_range(1..=3),
        rng.random_range(2..=3),
        rng.random_range(1..=3),
    );
    let mut probs: Vec<f64> = (0..d_b).map(|_| rng.random::<f64>() + 0.05).collect();
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    let dist = |n: usize, rng: &mut rand_chacha::ChaCha8Rng| {
        let v: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect::<Vec<_>>()
    };
    let blocks = (0..d_b)
        .map(|_| {
            let pa = dist(d_a, &mut rng);
            let pc = dist(d_c, &mut rng);
            let joint: Vec<f64> = pa
                .iter()
                .flat_map(|a| pc.iter().map(move |c| a * c))
                .collect();
            DensityMatrix::from_dims(diag_real(&joint), &[d_a, d_c])
        })
        .collect::<Result<Vec<_>>>()?;
    qcq_state(&probs, &blocks)
}

fn criterion_4() -> Result<Outcome> {
    let labels = TripartiteLabels::standard();
    let mut states = vec![classical_chain_state()];
    for k in 0..25u64 {
        let mut rng = rng_for_sample(40, k);
        let (d_a, d_b, d_c) = (
            1 + k as usize % 3,
            2 + k as usize % 2,
            1 + (k as usize / 3) % 3,
        );
        states.push(random_markov_state(d_a, d_b, d_c, &mut rng)?);
    }
    for k in 0..24u64 {
        states.push(random_classical_chain(k)?);
    }
    let mut max_i: f64 = 0.0;
    let mut min_f: f64 = 1.0;
    for rho in &states {
        let r = recovery_report(
            rho,
            &labels,
            &petz_transpose(&rho.marginal(&[1, 2])?)?,
            false,
        )?;
        max_i = max_i.max(r.i_bits);
        min_f = min_f.min(r.fid);
    }
    outcome(
        max_i <= 1e-8 && min_f >= 1.0 - 1e-8,
        format!(
            "{} states, max I = {max_i:.2e}, min F(T) = {min_f:.12}",
            states.len()
        ),
    )
}

fn criterion_5() -> Result<Outcome> {
    let start = Instant::now();
    let cfg = ExperimentConfig {
        samples: 100,
        seed: 5,
        ..Default::default()
    };
    let r = cmd_verify(&cfg)?;
    let t = start.elapsed();
    let opt = &r.aggregates["optimal"];
    let ok = r.failures == 0
        && opt.samples == 100
        && opt.min_delta_thm1 >= -1e-6
        && opt.min_delta_cor3 >= -1e-6
        && within(t, 600.0);
    outcome(
        ok,
        format!(
            "min Δthm1 = {:.3e}, min Δcor3 = {:.3e}, {} failures, {:.1}s",
            opt.min_delta_thm1,
            opt.min_delta_cor3,
            r.failures,
            t.as_secs_f64()
        ),
    )
}

fn criterion_6() -> Result<Outcome> {
    let cfg = ExperimentConfig {
        samples: 100,
        seed: 6,
        ..Default::default()
    };
    let r = cmd_bk(&cfg)?;
    outcome(
        r.passed() && r.samples.len() == 100,
        format!(
            "min F(A;C|B) − F(T) = {:.3e}, min sqrt F(T) − F(A;C|B) = {:.3e}",
            r.min_lower_slack, r.min_upper_slack
        ),
    )
}

fn criterion_7() -> Result<Outcome> {
    let labels = TripartiteLabels::standard();
    let mut worst: f64 = 0.0;
    for m in 0..10u64 {
        let mut rng = rng_for_sample(70, m);
        let rho_b = random_density_with(&dims(&[2]), 2, &mut rng)?;
        let rho_c = random_density_with(&dims(&[2]), 2, &mut rng)?;
        let rho_bc = rho_b.tensor(&rho_c).regroup(dims(&[2, 2]))?;
        let t = petz_transpose(&rho_bc)?;
        for _ in 0..20 {
            let rho = random_extension(&rho_bc, 2, &mut rng)?;
            let i = cmi(&rho, &labels)?.i_ac_given_b;
            let d = relative_entropy(&rho, recover(&rho, &t)?.matrix())?;
            worst = worst.max((i - d).abs());
        }
    }
    outcome(
        worst <= 1e-7,
        format!("200 extensions, max |I − D| = {worst:.2e}"),
    )
}

fn criterion_8() -> Result<Outcome> {
    let q = dims(&[2]);
    let mut worst_lower = f64::INFINITY;
    let mut worst_upper = f64::INFINITY;
    for k in 0..50u64 {
        let mut rng = rng_for_sample(80, k);
        let rho = random_density_with(&q, 2, &mut rng)?;
        let sigma = random_density_with(&q, 2, &mut rng)?;
        let f = fidelity(rho.matrix(), sigma.matrix())?;
        let dm = measured_relative_entropy(&rho, &sigma)?;
        let d = relative_entropy(&rho, sigma.matrix())?;
        worst_lower = worst_lower.min(dm + 1e-5 - (-2.0 * f.log2()));
        worst_upper = worst_upper.min(d + 2e-5 - (dm + 1e-5));
    }
    let mut worst_commuting: f64 = 0.0;
    let mut rng = rng_from_seed(81);
    for _ in 0..20 {
        let p: f64 = rng.random_range(0.01..0.99);
        let r: f64 = rng.random_range(0.01..0.99);
        let rho = DensityMatrix::from_dims(diag_real(&[p, 1.0 - p]), &[2])?;
        let sigma = DensityMatrix::from_dims(diag_real(&[r, 1.0 - r]), &[2])?;
        let dm = measured_relative_entropy(&rho, &sigma)?;
        let kl = classical_kl(&[p, 1.0 - p], &[r, 1.0 - r]);
        worst_commuting = worst_commuting.max((dm - kl).abs());
    }
    outcome(
        worst_lower >= 0.0 && worst_upper >= 0.0 && worst_commuting <= 1e-5,
        format!(
            "min slack lower {worst_lower:.2e}, upper {worst_upper:.2e}; commuting max |D_M − D| = {worst_commuting:.2e}"
        ),
    )
}

fn criterion_9() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for d in 2..=4usize {
        let dv = dims(&[d]);
        for k in 0..100u64 {
            let mut rng = rng_for_sample(90 + d as u64, k);
            let rank_r = rng.random_range(1..=d);
            let rank_s = rng.random_range(1..=d);
            let rho = random_density_with(&dv, rank_r, &mut rng)?;
            let sigma = random_density_with(&dv, rank_s, &mut rng)?;
            let exact = fidelity(rho.matrix(), sigma.matrix())?;
            worst = worst.max((fidelity_sdp(&rho, &sigma)? - exact).abs());
            count += 1;
        }
    }
    outcome(
        worst <= 1e-6,
        format!("{count} pairs, max |F_sdp − F| = {worst:.2e}"),
    )
}

fn criterion_10() -> Result<Outcome> {
    let cfg = ExperimentConfig {
        samples: 50,
        seed: 10,
        compute_dm: true,
        ..Default::default()
    };
    let r = cmd_universal(&cfg)?;
    let agg = &r.aggregates["averaged"];
    let min_meas = agg.min_delta_meas.unwrap_or(f64::NEG_INFINITY);
    outcome(
        r.failures == 0 && agg.samples == 50 && min_meas >= -1e-3,
        format!("50 extensions, min(I − D_M) = {min_meas:.3e}"),
    )
}

fn criterion_11() -> Result<Outcome> {
    let mut channels: Vec<(String, Channel)> = vec![("given".into(), counterexample_map())];
    let mut petz_family: Vec<(String, Channel, DensityMatrix)> = Vec::new();
    let mut worst_t0: f64 = 0.0;
    let mut marginals = vec![counterexample_state().marginal(&[1, 2])?];
    for (k, shape) in [[2, 2], [2, 3], [3, 2]].iter().enumerate() {
        marginals.push(random_density(
            &dims(shape),
            shape[0] * shape[1],
            110 + k as u64,
        )?);
        marginals.push(random_density(&dims(shape), 2, 120 + k as u64)?);
    }
    let schemes = [
        AveragingScheme::grid(41, 8.0, WeightLaw::Cosh)?,
        AveragingScheme::grid(21, 4.0, WeightLaw::Uniform)?,
    ];
    for (m, rho_bc) in marginals.iter().enumerate() {
        let petz = petz_transpose(rho_bc)?;
        worst_t0 = worst_t0.max(max_abs_diff(rotated_petz(rho_bc, 0.0)?.choi(), petz.choi()));
        petz_family.push((format!("petz[{m}]"), petz, rho_bc.clone()));
        for t in [-3.0, 0.4, 2.5] {
            petz_family.push((
                format!("rotated[{m},{t}]"),
                rotated_petz(rho_bc, t)?,
                rho_bc.clone(),
            ));
        }
        for (s, scheme) in schemes.iter().enumerate() {
            petz_family.push((
                format!("averaged[{m},{s}]"),
                averaged_rotated_petz(rho_bc, scheme)?,
                rho_bc.clone(),
            ));
        }
    }
    let labels = TripartiteLabels::standard();
    for k in 0..3u64 {
        let rho = random_density(&dims(&[2, 2, 2]), 8, 130 + k)?;
        channels.push((
            format!("optimal[{k}]"),
            fidelity_of_recovery(&rho, &labels)?.witness,
        ));
    }
    let mut bad = Vec::new();
    let mut worst_image: f64 = 0.0;
    for (name, chan, rho_bc) in &petz_family {
        let rho_b = rho_bc.marginal(&[0])?;
        worst_image = worst_image.max(trace_norm(
            &(chan.apply_matrix(rho_b.matrix())? - rho_bc.matrix()),
        ));
        if !validate_tpcp(chan).passed() {
            bad.push(name.clone());
        }
    }
    for (name, chan) in &channels {
        if !validate_tpcp(chan).passed() {
            bad.push(name.clone());
        }
    }
    outcome(
        bad.is_empty() && worst_image <= 1e-8 && worst_t0 <= 1e-12,
        format!(
            "{} channels, non-TPCP {:?}, max ‖R(ρ_B) − ρ_BC‖₁ = {worst_image:.2e}, max |J(R_0) − J(T)| = {worst_t0:.2e}",
            petz_family.len() + channels.len(),
            bad
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Outcome>); 11] = [
        ("counterexample separation", criterion_1),
        ("transpose map closed forms", criterion_2),
        ("strong subadditivity", criterion_3),
        ("Markov exactness", criterion_4),
        ("recovery bounds at the SDP optimum", criterion_5),
        ("pure-state fidelity sandwich", criterion_6),
        ("product-marginal equality", criterion_7),
        ("measured relative entropy sandwich", criterion_8),
        ("SDP fidelity oracle", criterion_9),
        ("universality campaign", criterion_10),
        ("channel structure", criterion_11),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let (passed, detail) = match run() {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {name}: {detail}",
            k + 1,
            if passed { "PASS" } else { "FAIL" }
        );
    }
    println!(
        "acceptance: {}/{} passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
