//! Command line front end: `train`, `grid`, `ablate` and `report`.
//!
//! Every config key is also a flag of the same name (`--weight_decay 0.001`,
//! with `--weight-decay` accepted as an alias); flags override the file.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Arg, ArgAction, ArgMatches, Command};

use crate::error::{Error, Result};
use crate::harness::config::{ConfigMap, ExperimentConfig, KEYS};
use crate::harness::{
    ablate_least_connected, ablation_csv, load_checkpoint, prepare_data, report, run_grid,
    run_on_dataset, write_run,
};
use crate::harness::experiment::load_dataset;

fn override_args() -> Vec<Arg> {
    KEYS.iter()
        .flat_map(|(section, keys)| keys.iter().map(move |k| (*section, *k)))
        .map(|(section, key)| {
            let mut arg = Arg::new(key)
                .long(key)
                .value_name("VALUE")
                .help(format!("Override [{section}] {key}"))
                .help_heading("Config overrides");
            let kebab = key.replace('_', "-");
            if kebab != key {
                arg = arg.alias(kebab);
            }
            arg
        })
        .collect()
}

fn config_arg() -> Arg {
    Arg::new("config")
        .long("config")
        .short('c')
        .value_name("FILE")
        .help("INI configuration file")
}

pub fn command() -> Command {
    Command::new("npset")
        .about("Sparse evolutionary MLP training with neuron pruning")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .arg(
            Arg::new("verbose")
                .long("verbose")
                .short('v')
                .action(ArgAction::Count)
                .global(true)
                .help("Increase log verbosity"),
        )
        .subcommand(
            Command::new("train")
                .about("Train one model and export its curves and summary")
                .arg(config_arg())
                .args(override_args()),
        )
        .subcommand(
            Command::new("grid")
                .about("Run the cartesian product of the [grid] section")
                .arg(config_arg())
                .args(override_args()),
        )
        .subcommand(
            Command::new("ablate")
                .about("Remove least connected neurons of a trained model and measure test accuracy")
                .arg(config_arg())
                .arg(
                    Arg::new("model")
                        .long("model")
                        .value_name("CHECKPOINT")
                        .help("Ablate this checkpoint instead of training first"),
                )
                .args(override_args()),
        )
        .subcommand(
            Command::new("report")
                .about("Tabulate every summary.json below a directory")
                .arg(Arg::new("dir").required(true).value_name("DIR"))
                .arg(
                    Arg::new("out")
                        .long("out")
                        .short('o')
                        .value_name("FILE")
                        .help("Write the table here instead of stdout"),
                ),
        )
}

/// Loads the config file (if any) and applies flag overrides.
pub fn config_from_matches(m: &ArgMatches) -> Result<ConfigMap> {
    let mut map = match m.get_one::<String>("config") {
        Some(p) => ConfigMap::load(p)?,
        None => ConfigMap::default(),
    };
    for (_, keys) in KEYS {
        for key in *keys {
            if let Some(v) = m.get_one::<String>(key) {
                map.set(key, v.clone())?;
            }
        }
    }
    Ok(map)
}

fn output_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.output_dir
        .clone()
        .unwrap_or_else(|| Path::new("runs").join(&cfg.name))
}

fn train(m: &ArgMatches) -> Result<()> {
    let cfg = config_from_matches(m)?.experiment()?;
    let dataset = load_dataset(&cfg)?;
    let result = run_on_dataset(&cfg, &dataset)?;
    if let Some(w) = &result.split_warning {
        log::warn!("{w}");
    }
    let dir = output_dir(&cfg);
    let files = write_run(&result, &dir, cfg.checkpoint.then_some(cfg.checkpoint_format))?;
    let s = result.summary();
    println!(
        "{} {} on {}: max test acc {:.4} (epoch {}), dims {} -> {}, weights {}, compression {}x",
        s.name,
        s.method,
        s.dataset,
        s.max_test_accuracy,
        s.best_epoch,
        s.initial_dims,
        s.final_dims,
        s.final_params.weights_only,
        s.compression_rate
    );
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn grid(m: &ArgMatches) -> Result<()> {
    let map = config_from_matches(m)?;
    let cfg = map.experiment()?;
    let dir = output_dir(&cfg);
    let runs = run_grid(&map, &dir)?;
    for r in &runs {
        let over: Vec<String> = r.overrides.iter().map(|(k, v)| format!("{k}={v}")).collect();
        println!(
            "run_{:03} [{}] max test acc {:.4}, compression {}x",
            r.index,
            over.join(" "),
            r.summary.max_test_accuracy,
            r.summary.compression_rate
        );
    }
    println!("wrote {}", dir.join("grid_index.csv").display());
    Ok(())
}

fn ablate(m: &ArgMatches) -> Result<()> {
    let cfg = config_from_matches(m)?.experiment()?;
    let dataset = load_dataset(&cfg)?;
    let model = match m.get_one::<String>("model") {
        Some(p) => load_checkpoint(p)?.0,
        None => run_on_dataset(&cfg, &dataset)?.model,
    };
    let data = prepare_data(&cfg, &dataset)?;
    let a = &cfg.ablation;
    let points = ablate_least_connected(&model, a.layer, &a.fractions, &data.test, a.degree_mode)?;
    let csv = ablation_csv(&points);
    print!("{csv}");
    let dir = output_dir(&cfg);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let path = dir.join("ablation.csv");
    fs::write(&path, csv).map_err(|e| Error::io(&path, e))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn report_cmd(m: &ArgMatches) -> Result<()> {
    let dir = m.get_one::<String>("dir").expect("required");
    let table = report(dir)?;
    match m.get_one::<String>("out") {
        Some(out) => fs::write(out, &table).map_err(|e| Error::io(out, e))?,
        None => print!("{table}"),
    }
    Ok(())
}

fn dispatch(matches: &ArgMatches) -> Result<()> {
    let level = match matches.get_count("verbose") {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match matches.subcommand() {
        Some(("train", m)) => train(m),
        Some(("grid", m)) => grid(m),
        Some(("ablate", m)) => ablate(m),
        Some(("report", m)) => report_cmd(m),
        _ => unreachable!("subcommand is required"),
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Usage errors become [`Error::Config`].
pub fn run<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = command()
        .try_get_matches_from(args)
        .map_err(|e| Error::Config(e.render().to_string()))?;
    dispatch(&matches)
}

/// Runs the CLI and maps the outcome to a process exit code: 0 ok,
/// 2 config or usage error, 3 data error, 4 runtime error.
pub fn main_exit_code<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(&matches) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
