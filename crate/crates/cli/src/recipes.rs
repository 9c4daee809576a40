//! Experiment recipes: a base configuration plus the identification runs
//! to perform on the data it generates.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use relaxid::config::Config;
use relaxid::identify::{IdentificationResult, MethodRegistry, Session};
use relaxid::synth::SynthesizedData;
use relaxid::{ForwardModel, MaterialParams};

use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;
use crate::output::{fitted_csv, OutputDir};

const EXP1_FAST: &str = "\
model.mu = 10
model.elements = 4:0.2, 7:3.7, 1:25
strain.rate = 10
strain.max = 20
strain.horizon = 100
grid.dt = 0.01
prior.q = 0.1
prior.candidates = 1..5
cluster.max_elements = 5
";

const EXP1_SLOW: &str = "\
model.mu = 10
model.elements = 4:0.2, 7:3.7, 1:25
strain.rate = 1
strain.max = 20
strain.horizon = 100
grid.dt = 0.01
noise.delta_rel = 0.01
noise.seed = 1
prior.q = 0.1
prior.candidates = 1..5
cluster.max_elements = 5
";

const EXP2: &str = "\
model.mu = 5
model.elements = 8:0.8, 0.5:50
strain.rate = 10
strain.max = 20
strain.horizon = 100
grid.dt = 0.01
noise.delta_rel = 0.01
noise.seed = 1
prior.q = 0.1
prior.candidates = 1..5
cluster.max_elements = 5
";

const EXP3: &str = "\
model.mu = 10
model.elements = 8:0.8, 7:3.7, 1:25, 4:500, 0.5:1200
strain.rate = 10
strain.max = 20
strain.horizon = 10000
grid.dt = 0.1
noise.delta_rel = 0.01
noise.seed = 1
prior.q = 0.1
prior.candidates = 1..5
";

/// One identification run of a recipe.
#[derive(Debug, Clone)]
pub struct RunSpec {
    /// File stem of the run's outputs.
    pub label: &'static str,
    pub method: &'static str,
    /// Configuration keys changed for this run only.
    pub overrides: &'static [(&'static str, &'static str)],
}

const fn run(label: &'static str, method: &'static str, overrides: &'static [(&'static str, &'static str)]) -> RunSpec {
    RunSpec {
        label,
        method,
        overrides,
    }
}

/// State handed to a recipe while it runs.
pub struct RecipeContext<'a> {
    pub config: &'a Config,
    pub out: &'a mut OutputDir,
    pub methods: &'a MethodRegistry,
    pub manifest: &'a mut RunManifest,
}

pub trait Recipe: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    /// Configuration text the user's `--config` and `--seed` are laid over.
    fn base_config(&self) -> String;
    fn execute(&self, ctx: &mut RecipeContext<'_>) -> CliResult<()>;
}

/// Generated data and the fitted runs on it.
struct Outcome {
    model: ForwardModel,
    data: SynthesizedData,
    truth: MaterialParams,
    results: Vec<(RunSpec, IdentificationResult)>,
}

fn generate(ctx: &mut RecipeContext<'_>) -> CliResult<(ForwardModel, SynthesizedData, MaterialParams)> {
    let experiment = ctx.config.experiment().map_err(CliError::from_config)?;
    let model = experiment.model().map_err(CliError::from_config)?;
    let data = experiment.synthesize().map_err(CliError::from_pipeline)?;
    ctx.out.write_series("exact.csv", &data.exact)?;
    if let Some(noisy) = &data.noisy {
        ctx.out.write_series("noisy.csv", noisy)?;
    }
    if let Some(noise) = experiment.noise {
        ctx.manifest.seeds.push(("noise".into(), noise.seed()));
    }
    Ok((model, data, experiment.truth))
}

fn execute_runs(ctx: &mut RecipeContext<'_>, runs: &[RunSpec]) -> CliResult<Outcome> {
    let (model, data, truth) = generate(ctx)?;
    let measured = data.measured();
    let mut session = Session::new(model, measured);
    let mut results = Vec::with_capacity(runs.len());
    for spec in runs {
        let mut config = ctx.config.clone();
        for (key, value) in spec.overrides {
            config.set(key, *value).map_err(CliError::from_config)?;
        }
        let settings = config
            .identify_settings(Some(measured))
            .map_err(CliError::from_config)?;
        let method = ctx.methods.resolve(spec.method).map_err(CliError::from_config)?;
        let started = Instant::now();
        let result = method
            .identify(&mut session, &settings)
            .map_err(|e| CliError::pipeline(format!("run {}: {e}", spec.label)))?;
        ctx.manifest
            .timings
            .push((spec.label.to_string(), started.elapsed().as_secs_f64()));
        let report = format!("manifest: {}\nrun: {}\n{}", crate::manifest::MANIFEST_FILE, spec.label, result.to_report());
        ctx.out.write(&format!("{}.report.txt", spec.label), &report)?;
        let csv = fitted_csv(&model, &result.params, measured, data.noisy.as_ref().map(|_| &data.exact))
            .map_err(CliError::from_pipeline)?;
        ctx.out.write(&format!("{}.fitted.csv", spec.label), &csv)?;
        results.push((spec.clone(), result));
    }
    Ok(Outcome {
        model,
        data,
        truth,
        results,
    })
}

fn params_cells(params: &MaterialParams) -> String {
    let mut s = format!("mu={:.4}", params.base_stiffness());
    for (m, t) in params.elements() {
        let _ = write!(s, "  ({m:.4}, {t:.4})");
    }
    s
}

fn comparison_table(outcome: &Outcome) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "manifest: {}", crate::manifest::MANIFEST_FILE);
    let _ = writeln!(out, "samples: {}", outcome.data.measured().len());
    if let Some(noise) = outcome.data.measured().noise() {
        let _ = writeln!(
            out,
            "noise: delta_rel={:.6} delta_abs={:.6} seed={}",
            noise.achieved_delta_rel, noise.delta_abs, noise.seed
        );
    }
    let _ = writeln!(out, "gamma: {}", outcome.model.gamma());
    out.push('\n');
    let _ = writeln!(out, "{:<14} {:<9} {:>2} {:>14}  parameters (mu_j, tau_j)", "run", "method", "n", "residual");
    let _ = writeln!(
        out,
        "{:<14} {:<9} {:>2} {:>14}  {}",
        "truth",
        "-",
        outcome.truth.element_count(),
        "-",
        params_cells(&outcome.truth)
    );
    for (spec, result) in &outcome.results {
        let _ = writeln!(
            out,
            "{:<14} {:<9} {:>2} {:>14.6e}  {}",
            spec.label,
            result.method.as_str(),
            result.n,
            result.residual_norm(),
            params_cells(&result.params)
        );
    }
    out
}

/// Data generation followed by a fixed list of runs and a comparison table.
pub struct StandardRecipe {
    pub name: &'static str,
    pub summary: &'static str,
    pub base: &'static str,
    /// Keys added to `base`.
    pub extra: &'static str,
    pub runs: Vec<RunSpec>,
}

impl Recipe for StandardRecipe {
    fn name(&self) -> &'static str {
        self.name
    }

    fn summary(&self) -> &'static str {
        self.summary
    }

    fn base_config(&self) -> String {
        format!("{}{}", self.base, self.extra)
    }

    fn execute(&self, ctx: &mut RecipeContext<'_>) -> CliResult<()> {
        let outcome = execute_runs(ctx, &self.runs)?;
        ctx.out.write("summary.txt", &comparison_table(&outcome))?;
        Ok(())
    }
}

/// MAP selection on the two-element truth for several prior probabilities,
/// reusing one set of fits.
pub struct QSweep;

const Q_RUNS: &[RunSpec] = &[
    run("q0.1", "bayes", &[("prior.q", "0.1")]),
    run("q0.3", "bayes", &[("prior.q", "0.3")]),
    run("q0.5", "bayes", &[("prior.q", "0.5")]),
    run("q0.7", "bayes", &[("prior.q", "0.7")]),
    run("q0.9", "bayes", &[("prior.q", "0.9")]),
];

impl Recipe for QSweep {
    fn name(&self) -> &'static str {
        "q-sweep"
    }

    fn summary(&self) -> &'static str {
        "MAP selection on two-element data for q = 0.1 ... 0.9"
    }

    fn base_config(&self) -> String {
        EXP2.to_string()
    }

    fn execute(&self, ctx: &mut RecipeContext<'_>) -> CliResult<()> {
        let outcome = execute_runs(ctx, Q_RUNS)?;
        let mut table = comparison_table(&outcome);
        table.push_str("\nphi by candidate\n");
        let _ = write!(table, "{:<6}", "q");
        let ns: Vec<usize> = (1..=5).collect();
        for n in &ns {
            let _ = write!(table, " {:>14}", format!("n={n}"));
        }
        let _ = writeln!(table, "  chosen");
        for (spec, result) in &outcome.results {
            let _ = write!(table, "{:<6}", &spec.label[1..]);
            for n in &ns {
                let cell = result
                    .trace
                    .iter()
                    .find(|r| r.n == *n)
                    .and_then(|r| r.phi)
                    .map_or_else(|| "-".to_string(), |v| format!("{v:.6e}"));
                let _ = write!(table, " {cell:>14}");
            }
            let _ = writeln!(table, "  {}", result.n);
        }
        ctx.out.write("summary.txt", &table)?;
        Ok(())
    }
}

/// Recipes by name.
#[derive(Default)]
pub struct RecipeRegistry {
    recipes: Vec<Box<dyn Recipe>>,
}

impl RecipeRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::new();
        r.register(Box::new(StandardRecipe {
            name: "exp1-exact",
            summary: "three-element truth, exact data, fast ramp",
            base: EXP1_FAST,
            extra: "",
            runs: vec![run("bayes", "bayes", &[]), run("cluster", "cluster", &[]), run("residual", "residual", &[])],
        }));
        r.register(Box::new(StandardRecipe {
            name: "exp1-noisy-fast",
            summary: "three-element truth, 1% noise, fast ramp",
            base: EXP1_FAST,
            extra: "noise.delta_rel = 0.01\nnoise.seed = 1\n",
            runs: vec![run("bayes", "bayes", &[]), run("cluster", "cluster", &[]), run("residual", "residual", &[])],
        }));
        r.register(Box::new(StandardRecipe {
            name: "exp1-noisy-slow",
            summary: "three-element truth, 1% noise, slow ramp",
            base: EXP1_SLOW,
            extra: "",
            runs: vec![
                run("bayes", "bayes", &[]),
                run("bayes-q0.3", "bayes", &[("prior.q", "0.3")]),
                run("cluster", "cluster", &[]),
                run("residual", "residual", &[]),
            ],
        }));
        r.register(Box::new(StandardRecipe {
            name: "exp2-noisy",
            summary: "two-element truth, 1% noise, fast ramp",
            base: EXP2,
            extra: "",
            runs: vec![
                run("bayes", "bayes", &[]),
                run("bayes-q0.9", "bayes", &[("prior.q", "0.9")]),
                run("cluster", "cluster", &[]),
                run("residual", "residual", &[]),
            ],
        }));
        r.register(Box::new(StandardRecipe {
            name: "exp3-long",
            summary: "five-element truth up to 1200 s, T = 10000 s, 1% noise",
            base: EXP3,
            extra: "",
            runs: vec![run("bayes", "bayes", &[])],
        }));
        r.register(Box::new(QSweep));
        r.register(Box::new(StandardRecipe {
            name: "penalty-study",
            summary: "slow ramp with and without penalties on the inner fits",
            base: EXP1_SLOW,
            extra: "",
            runs: vec![
                run("bayes", "bayes", &[]),
                run("bayes-tau1", "bayes", &[("penalty.kind", "tau1_only"), ("penalty.alpha", "100")]),
                run("bayes-norm", "bayes", &[("penalty.kind", "full_norm"), ("penalty.alpha", "0.5")]),
            ],
        }));
        r
    }

    /// Later registrations with a taken name are ignored.
    pub fn register(&mut self, recipe: Box<dyn Recipe>) {
        if self.get(recipe.name()).is_none() {
            self.recipes.push(recipe);
        }
    }

    pub fn get(&self, name: &str) -> Option<&dyn Recipe> {
        self.recipes.iter().find(|r| r.name() == name).map(|r| r.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.recipes.iter().map(|r| r.name()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Recipe> {
        self.recipes.iter().map(|r| r.as_ref())
    }

    pub fn resolve(&self, name: &str) -> CliResult<&dyn Recipe> {
        self.get(name).ok_or_else(|| {
            CliError::config(format!(
                "unknown recipe {name:?}; available recipes: {}",
                self.names().join(", ")
            ))
        })
    }
}

/// Base configuration of `recipe` with `user` laid over it.
pub fn effective_config(recipe: &dyn Recipe, user: Option<&Config>) -> CliResult<Config> {
    let mut config = Config::parse(&recipe.base_config(), Path::new(recipe.name()))
        .map_err(|e| CliError::config(format!("recipe config: {e}")))?;
    if let Some(user) = user {
        config.merge(user);
    }
    Ok(config)
}
