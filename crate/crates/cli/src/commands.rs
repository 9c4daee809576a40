use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use relaxid::config::Config;
use relaxid::identify::{MethodRegistry, Session};
use relaxid::series_io::read_series;

use crate::error::{CliError, CliResult};
use crate::manifest::{RunManifest, MANIFEST_FILE};
use crate::output::{fitted_csv, OutputDir};
use crate::recipes::{effective_config, RecipeContext, RecipeRegistry};

#[derive(Debug, Parser)]
#[command(name = "relaxid", version, about = "Identify Maxwell element counts and parameters from relaxation data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate exact and noisy stress series from a true model.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides `noise.seed`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fit a stress series with one identification method.
    Identify {
        #[arg(long)]
        method: String,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a named experiment recipe end to end.
    Experiment {
        /// Recipe name; `list` prints the available recipes.
        recipe: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides `noise.seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Keys laid over the recipe's own configuration.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate { config, out, seed } => simulate(&config, &out, seed),
        Command::Identify {
            method,
            data,
            config,
            out,
        } => identify(&method, &data, &config, &out),
        Command::Experiment {
            recipe,
            out,
            seed,
            config,
        } => experiment(&recipe, out.as_deref(), seed, config.as_deref()),
    }
}

fn apply_seed(config: &mut Config, seed: Option<u64>) -> CliResult<()> {
    if let Some(seed) = seed {
        config.set("noise.seed", seed.to_string()).map_err(CliError::from_config)?;
    }
    Ok(())
}

fn finish(out: &mut OutputDir, mut manifest: RunManifest) -> CliResult<()> {
    manifest.outputs = out.written().to_vec();
    out.write(MANIFEST_FILE, &manifest.to_text())?;
    Ok(())
}

fn simulate(config_path: &Path, out: &Path, seed: Option<u64>) -> CliResult<()> {
    let mut config = Config::load(config_path).map_err(CliError::from_config)?;
    apply_seed(&mut config, seed)?;
    let experiment = config.experiment().map_err(CliError::from_config)?;
    if let Some(warning) = experiment.sampling_warning() {
        eprintln!("warning: {warning}");
    }
    let data = experiment.synthesize().map_err(CliError::from_pipeline)?;
    let mut dir = OutputDir::create(out)?;
    let mut manifest = RunManifest::new("simulate", config);
    manifest.inputs.push(config_path.to_path_buf());
    dir.write_series("exact.csv", &data.exact)?;
    if let Some(noisy) = &data.noisy {
        dir.write_series("noisy.csv", noisy)?;
    }
    if let Some(noise) = experiment.noise {
        manifest.seeds.push(("noise".into(), noise.seed()));
    }
    finish(&mut dir, manifest)
}

fn identify(method: &str, data_path: &Path, config_path: &Path, out: &Path) -> CliResult<()> {
    let methods = MethodRegistry::with_builtins();
    let method = methods.resolve(method).map_err(CliError::from_config)?;
    let config = Config::load(config_path).map_err(CliError::from_config)?;
    let model = config.model().map_err(CliError::from_config)?;
    let data = read_series(data_path).map_err(CliError::from_input)?;
    let settings = config.identify_settings(Some(&data)).map_err(CliError::from_config)?;

    let mut manifest = RunManifest::new(format!("identify --method {}", method.name()), config);
    manifest.inputs.push(config_path.to_path_buf());
    manifest.inputs.push(data_path.to_path_buf());
    manifest.seeds.push(("solver".into(), settings.solver.seed));

    let started = Instant::now();
    let mut session = Session::new(model, &data);
    let result = method
        .identify(&mut session, &settings)
        .map_err(CliError::from_pipeline)?;
    manifest
        .timings
        .push((method.name().to_string(), started.elapsed().as_secs_f64()));

    let mut dir = OutputDir::create(out)?;
    dir.write("report.txt", &format!("manifest: {MANIFEST_FILE}\n{}", result.to_report()))?;
    let csv = fitted_csv(&model, &result.params, &data, None).map_err(CliError::from_pipeline)?;
    dir.write("fitted.csv", &csv)?;
    finish(&mut dir, manifest)
}

fn experiment(name: &str, out: Option<&Path>, seed: Option<u64>, config_path: Option<&Path>) -> CliResult<()> {
    let recipes = RecipeRegistry::with_builtins();
    if name == "list" {
        for r in recipes.iter() {
            println!("{:<16} {}", r.name(), r.summary());
        }
        return Ok(());
    }
    let recipe = recipes.resolve(name)?;
    let out = out.ok_or_else(|| CliError::config("experiment needs --out"))?;
    let user = config_path
        .map(|p| Config::load(p).map_err(CliError::from_config))
        .transpose()?;
    let mut config = effective_config(recipe, user.as_ref())?;
    apply_seed(&mut config, seed)?;

    let methods = MethodRegistry::with_builtins();
    let mut dir = OutputDir::create(out)?;
    let mut manifest = RunManifest::new(format!("experiment {}", recipe.name()), config.clone());
    if let Some(p) = config_path {
        manifest.inputs.push(p.to_path_buf());
    }
    let solver = config.solver().map_err(CliError::from_config)?;
    manifest.seeds.push(("solver".into(), solver.seed));
    let mut ctx = RecipeContext {
        config: &config,
        out: &mut dir,
        methods: &methods,
        manifest: &mut manifest,
    };
    recipe.execute(&mut ctx)?;
    finish(&mut dir, manifest)
}
