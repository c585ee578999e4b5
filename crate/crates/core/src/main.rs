use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use qrecovery::harness::{
    cmd_bk, cmd_counterexample, cmd_sweep, cmd_universal, cmd_verify, parse_dims, AveragingConfig,
    CampaignReport, Ensemble, ExperimentConfig, SweepConfig, DEFAULT_TOLERANCE,
};
use qrecovery::recovery::WeightLaw;
use qrecovery::states::counterexample_state;
use qrecovery::{DensityMatrix, Error};

#[derive(Parser, Debug)]
#[command(
    name = "qrecovery",
    version,
    about = "Recovery-map experiments on tripartite quantum states"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Local dimensions dA,dB,dC.
    #[arg(long, global = true, default_value = "2,2,2")]
    dims: String,
    #[arg(long, global = true, default_value_t = 100)]
    samples: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = DEFAULT_TOLERANCE)]
    tol: f64,
    /// Also compute the measured relative entropy D_M.
    #[arg(long, global = true)]
    dm: bool,
    #[arg(long = "avg-nodes", global = true, default_value_t = qrecovery::recovery::DEFAULT_NODES)]
    avg_nodes: usize,
    #[arg(long = "avg-halfwidth", global = true, default_value_t = qrecovery::recovery::DEFAULT_HALFWIDTH)]
    avg_halfwidth: f64,
    #[arg(long = "avg-weights", global = true, default_value = "cosh")]
    avg_weights: String,
    /// Report destination (JSON, or CSV for sweep).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// State JSON file to use instead of random samples.
    #[arg(long, global = true)]
    state: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the recovery bounds on random states.
    Verify {
        #[arg(long, default_value = "random")]
        ensemble: String,
    },
    /// One averaged map for a fixed ρ_BC against random extensions.
    Universal,
    /// The three-qubit state separating F(A;C|B) from √F(T).
    Counterexample,
    /// Fidelity of the rotated Petz maps as a function of t.
    Sweep {
        #[arg(long = "t-min", default_value_t = -5.0, allow_hyphen_values = true)]
        t_min: f64,
        #[arg(long = "t-max", default_value_t = 5.0, allow_hyphen_values = true)]
        t_max: f64,
        #[arg(long, default_value_t = 41)]
        steps: usize,
    },
    /// F(T) ≤ F(A;C|B) ≤ √F(T) on pure states.
    Bk,
}

impl Common {
    fn averaging(&self) -> Result<AveragingConfig, Error> {
        Ok(AveragingConfig {
            nodes: self.avg_nodes,
            halfwidth: self.avg_halfwidth,
            weights: self.avg_weights.parse::<WeightLaw>()?,
        })
    }

    fn experiment(&self, ensemble: Ensemble) -> Result<ExperimentConfig, Error> {
        let cfg = ExperimentConfig {
            dims: parse_dims(&self.dims)?,
            samples: self.samples,
            seed: self.seed,
            tolerance: self.tol,
            compute_dm: self.dm,
            averaging: self.averaging()?,
            ensemble,
            out: self.out.clone(),
            state: self.state.clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn print_campaign(r: &CampaignReport) {
    println!(
        "{}: {} samples, certified map {}, {} violations, {} failures",
        r.command,
        r.samples.len(),
        r.certified_map,
        r.violations,
        r.failures
    );
    for (name, a) in &r.aggregates {
        let meas = a
            .min_delta_meas
            .map_or_else(|| "-".to_string(), |d| format!("{d:.3e}"));
        println!(
            "  {name:<9} min F {:.8}  min Δthm1 {:.3e}  min Δmeas {meas}  min Δcor3 {:.3e}",
            a.min_fid, a.min_delta_thm1, a.min_delta_cor3
        );
    }
    if let Some(ch) = &r.channel {
        println!(
            "  channel: tpcp {}  ‖R(ρ_B) − ρ_BC‖₁ = {:.3e}",
            ch.tpcp.passed(),
            ch.marginal_image_error
        );
    }
}

fn verdict(passed: bool) -> Result<ExitCode, Error> {
    println!("{}", if passed { "PASS" } else { "FAIL" });
    Ok(if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    let c = &cli.common;
    match cli.command {
        Command::Verify { ensemble } => {
            let report = cmd_verify(&c.experiment(ensemble.parse()?)?)?;
            print_campaign(&report);
            verdict(report.passed())
        }
        Command::Universal => {
            let report = cmd_universal(&c.experiment(Ensemble::Random)?)?;
            print_campaign(&report);
            verdict(report.passed())
        }
        Command::Counterexample => {
            let r = cmd_counterexample(c.out.as_deref())?;
            println!("F(R_given)  = {:.8}", r.f_given);
            println!("F(T)        = {:.8}", r.f_transpose);
            println!("sqrt F(T)   = {:.8}", r.sqrt_f_transpose);
            println!(
                "F(A;C|B)    = {:.8} (dual bound {:.8}, {:?})",
                r.fidelity_of_recovery.value,
                r.fidelity_of_recovery.dual_bound,
                r.fidelity_of_recovery.status
            );
            verdict(r.passed())
        }
        Command::Sweep {
            t_min,
            t_max,
            steps,
        } => {
            let rho = match &c.state {
                Some(p) => DensityMatrix::load_json(p)?,
                None => counterexample_state(),
            };
            let cfg = SweepConfig {
                t_min,
                t_max,
                steps,
                averaging: c.averaging()?,
                ..Default::default()
            };
            let table = cmd_sweep(&rho, &cfg)?;
            match &c.out {
                Some(p) => {
                    table.write_csv(p)?;
                    info!("wrote {}", p.display());
                }
                None => print!("{}", table.to_csv()),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Bk => {
            let r = cmd_bk(&c.experiment(Ensemble::Random)?)?;
            println!(
                "bk: {} samples, {} excluded, min lower slack {:.3e}, min upper slack {:.3e}, {} violations, {} failures",
                r.samples.len(),
                r.excluded.len(),
                r.min_lower_slack,
                r.min_upper_slack,
                r.violations,
                r.failures
            );
            verdict(r.passed())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e @ Error::InvalidArgument(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
