//! Thin command-line front end over the library.
//!
//! ```text
//! idrm-sim pipeline        [--config cfg.json] [--out DIR] [--seed N] [--set k=v]...
//! idrm-sim figure <name>   [--config cfg.json] [--out DIR] [--seed N] [--set k=v]...
//! idrm-sim fit <data.csv>  [--config cfg.json] [--out DIR] [--dose MG] [--set k=v]...
//! idrm-sim receiver-demo   [--config cfg.json] [--out DIR] [--seed N] [--set k=v]...
//! idrm-sim idrm-demo       [--config cfg.json] [--out DIR] [--seed N] [--set k=v]...
//! ```
//!
//! Exit codes: 0 success, 2 config error, 3 numeric failure, 4 I/O error.

use idrm_sim::error::{Error, Result};
use idrm_sim::pipeline::{
    apply_override, fit_result_json, fit_samples, read_samples_csv, reproduce_figure, run_pipeline,
    validate_config,
};
use idrm_sim::units::UnitTag;
use std::path::PathBuf;

const USAGE: &str = "usage: idrm-sim <pipeline|figure <name>|fit <data.csv>|receiver-demo|idrm-demo>
       [--config <path>] [--out <dir>] [--seed <u64>] [--dose <mg>] [--set key=value]...";

struct Cli {
    command: String,
    positional: Option<String>,
    config_path: Option<PathBuf>,
    out_dir: PathBuf,
    seed: Option<u64>,
    dose: Option<f64>,
    overrides: Vec<(String, String)>,
}

fn parse_args(args: &[String]) -> Result<Cli> {
    let mut it = args.iter();
    let command = it
        .next()
        .cloned()
        .ok_or_else(|| Error::invalid(USAGE.to_string()))?;
    let mut cli = Cli {
        command,
        positional: None,
        config_path: None,
        out_dir: PathBuf::from("out"),
        seed: None,
        dose: None,
        overrides: Vec::new(),
    };
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--config" => {
                cli.config_path = Some(PathBuf::from(expect_value(&mut it, "--config")?));
            }
            "--out" => cli.out_dir = PathBuf::from(expect_value(&mut it, "--out")?),
            "--seed" => {
                let v = expect_value(&mut it, "--seed")?;
                cli.seed = Some(
                    v.parse()
                        .map_err(|_| Error::invalid(format!("--seed wants a u64, got {v:?}")))?,
                );
            }
            "--dose" => {
                let v = expect_value(&mut it, "--dose")?;
                cli.dose = Some(
                    v.parse()
                        .map_err(|_| Error::invalid(format!("--dose wants a number, got {v:?}")))?,
                );
            }
            "--set" => {
                let v = expect_value(&mut it, "--set")?;
                let (key, value) = v
                    .split_once('=')
                    .ok_or_else(|| Error::invalid(format!("--set wants key=value, got {v:?}")))?;
                cli.overrides.push((key.to_string(), value.to_string()));
            }
            other if !other.starts_with('-') && cli.positional.is_none() => {
                cli.positional = Some(other.to_string());
            }
            other => return Err(Error::invalid(format!("unknown argument {other:?}\n{USAGE}"))),
        }
    }
    Ok(cli)
}

fn expect_value<'a>(it: &mut std::slice::Iter<'a, String>, flag: &str) -> Result<&'a String> {
    it.next()
        .ok_or_else(|| Error::invalid(format!("{flag} needs a value\n{USAGE}")))
}

fn load_config(cli: &Cli) -> Result<idrm_sim::PipelineConfig> {
    let raw = match &cli.config_path {
        Some(path) => std::fs::read_to_string(path)?,
        None => "{}".to_string(),
    };
    let mut value: serde_json::Value =
        serde_json::from_str(&raw).map_err(|e| Error::Json(e.to_string()))?;
    if let Some(inner) = value.get("config") {
        if inner.is_object() {
            value = inner.clone();
        }
    }
    for (key, val) in &cli.overrides {
        apply_override(&mut value, key, val)?;
    }
    if let Some(seed) = cli.seed {
        apply_override(&mut value, "seed", &seed.to_string())?;
    }
    let (cfg, warnings) = validate_config(&value.to_string())?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<()> {
    match cli.command.as_str() {
        "pipeline" => {
            let cfg = load_config(cli)?;
            let out = run_pipeline(&cfg, &cli.out_dir)?;
            println!(
                "pipeline: wrote {} traces to {} (plasma peak {:.4}, barrier peak {:.4})",
                3 + out.ecm.len() + 2,
                cli.out_dir.display(),
                out.plasma.max_value(),
                out.barrier.max_value()
            );
            Ok(())
        }
        "figure" => {
            let name = cli
                .positional
                .as_deref()
                .ok_or_else(|| Error::invalid(format!("figure needs a name\n{USAGE}")))?;
            let cfg = load_config(cli)?;
            let files = reproduce_figure(name, &cfg, &cli.out_dir)?;
            println!("{name}: wrote {} file(s) to {}", files.len(), cli.out_dir.display());
            for f in files {
                println!("  {f}");
            }
            Ok(())
        }
        "fit" => {
            let data_path = cli
                .positional
                .as_deref()
                .ok_or_else(|| Error::invalid(format!("fit needs a CSV path\n{USAGE}")))?;
            let cfg = load_config(cli)?;
            let text = std::fs::read_to_string(data_path)?;
            let samples = read_samples_csv(&text)?;
            let dose = cli.dose.unwrap_or(idrm_sim::REFERENCE_DOSE_MG);
            let fit = fit_samples(&cfg, &samples, dose)?;
            let json = fit_result_json(&fit);
            println!("{json}");
            std::fs::create_dir_all(&cli.out_dir)?;
            std::fs::write(cli.out_dir.join("fit.json"), format!("{json}\n"))?;
            Ok(())
        }
        "receiver-demo" => {
            let cfg = load_config(cli)?;
            // constant ambient concentration at the tissue plateau for the
            // representative distance
            let params = cfg.ecm_params()?;
            let c = params.steady_state(cfg.ecm.q, cfg.representative_r_mm * 1000.0);
            let rx = cfg.receiver.params();
            let n = ((cfg.receiver.window_s / rx.ts).floor() as usize).max(2);
            let grid = idrm_sim::TimeGrid::new(rx.ts, rx.ts, n, UnitTag::seconds())?;
            let mut state = idrm_sim::ReceiverState::new(rx)?;
            let mut rng = idrm_sim::Rng::from_seed(cfg.seed().derive(1));
            let mut lambdas = Vec::with_capacity(n);
            let mut arrivals = Vec::with_capacity(n);
            for _ in 0..n {
                let lambda = state.advance(c)?;
                lambdas.push(lambda);
                arrivals.push(rng.next_poisson(lambda)?);
            }
            std::fs::create_dir_all(&cli.out_dir)?;
            let mut buf = Vec::new();
            use std::io::Write;
            writeln!(buf, "t_s,lambda,arrivals")?;
            for i in 0..n {
                writeln!(
                    buf,
                    "{},{},{}",
                    idrm_sim::units::fmt_full(grid.time_at(i)),
                    idrm_sim::units::fmt_full(lambdas[i]),
                    arrivals[i]
                )?;
            }
            std::fs::write(cli.out_dir.join("receiver_demo.csv"), buf)?;
            let total: u64 = arrivals.iter().sum();
            println!(
                "receiver-demo: {n} samples at Ts = {} s, ambient {c:.3e} molecules/um3, {total} arrivals -> {}",
                rx.ts,
                cli.out_dir.join("receiver_demo.csv").display()
            );
            Ok(())
        }
        "idrm-demo" => {
            let cfg = load_config(cli)?;
            let params = cfg.ecm_params()?;
            let c = params.steady_state(cfg.ecm.q, cfg.representative_r_mm * 1000.0);
            let grid = idrm_sim::make_time_grid(
                0.0,
                cfg.grids.ecm_horizon_s.min(3600.0),
                cfg.grids.ecm_dt_s.min(1.0),
                UnitTag::seconds(),
            )?;
            let n = grid.len();
            let ambient = idrm_sim::TimeSeries::new(
                grid.clone(),
                vec![c; n],
                UnitTag::molecules_per_um3(),
            )?;
            let pulses = idrm_sim::EndogenousPulseTrain::periodic(
                cfg.idrm.pulse_first_s.min(grid.t_end()),
                cfg.idrm.pulse_period_s,
                cfg.idrm.pulse_amplitude,
                grid.t_end(),
            )?;
            let run = idrm_sim::simulate_idrm(
                &cfg.idrm_config(),
                cfg.idrm.initial_store,
                &ambient,
                &pulses,
                cfg.seed().derive(2),
            )?;
            std::fs::create_dir_all(&cli.out_dir)?;
            let mut buf = Vec::new();
            run.write_csv(&mut buf)?;
            std::fs::write(cli.out_dir.join("idrm_demo.csv"), buf)?;
            let s = run.final_state;
            println!(
                "idrm-demo: absorbed {} released {} stored {} overflow {} -> {}",
                s.absorbed_total,
                s.released_total,
                s.stored,
                s.overflow_total,
                cli.out_dir.join("idrm_demo.csv").display()
            );
            Ok(())
        }
        other => Err(Error::invalid(format!("unknown subcommand {other:?}\n{USAGE}"))),
    }
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cli = match parse_args(&args) {
        Ok(cli) => cli,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    };
    if let Err(e) = run(&cli) {
        eprintln!("error: {e}");
        if let Error::Config(issues) = &e {
            for issue in issues {
                eprintln!("  {issue}");
            }
        }
        std::process::exit(e.exit_code());
    }
}
