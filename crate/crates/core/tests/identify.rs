use relaxid::forward::uniform_grid;
use relaxid::identify::{
    bayes_identify, cluster_identify, residual_identify, BayesMethod, IdentifySettings,
    MethodRegistry, MethodTag, PhiWeights, PriorConfig, Session, TieBreak,
};
use relaxid::solver::{PenaltySpec, SolverConfig};
use relaxid::synth::{add_noise, NoiseSpec};
use relaxid::{ForwardModel, MaterialParams, StrainProgram, StressSeries};

const TRUTH: [f64; 7] = [10.0, 4.0, 0.2, 7.0, 3.7, 1.0, 25.0];

fn model() -> ForwardModel {
    ForwardModel::new(StrainProgram::new(10.0, 20.0, 100.0).unwrap(), 0.01).unwrap()
}

fn exact(m: &ForwardModel) -> StressSeries {
    let truth = MaterialParams::new(10.0, &[(4.0, 0.2), (7.0, 3.7), (1.0, 25.0)]).unwrap();
    m.evaluate(&truth, &uniform_grid(0.05, 100.0).unwrap()).unwrap()
}

fn solver() -> SolverConfig {
    SolverConfig {
        multistarts: 12,
        ..SolverConfig::default()
    }
}

fn assert_truth(params: &MaterialParams, rel: f64) {
    assert_eq!(params.element_count(), 3);
    for (got, want) in params.as_slice().iter().zip(TRUTH) {
        assert!((got - want).abs() <= rel * want, "{got} vs {want}");
    }
}

#[test]
fn bayes_recovers_exact_truth() {
    let m = model();
    let data = exact(&m);
    let prior = PriorConfig::up_to(0.1, 5).unwrap();
    let r = bayes_identify(&m, &data, &prior, PhiWeights::default(), PenaltySpec::none(), &solver(), 0.0).unwrap();
    assert_eq!(r.method, MethodTag::Bayes);
    assert_eq!(r.n, 3);
    assert_truth(&r.params, 1e-4);
    // every probed candidate beyond the truth pays more prior than it saves in misfit
    let chosen = r.chosen_trace().unwrap().phi.unwrap();
    assert!(r.trace.iter().filter_map(|t| t.phi).all(|phi| phi >= chosen));
}

#[test]
fn cluster_merges_to_exact_truth() {
    let m = model();
    let data = exact(&m);
    let r = cluster_identify(&m, &data, 5, &solver(), PenaltySpec::none(), 0.0).unwrap();
    assert_eq!(r.method, MethodTag::Cluster);
    assert_eq!(r.n, 3);
    assert_truth(&r.params, 5e-3);
    assert_eq!(r.unclustered.as_ref().unwrap().element_count(), 5);
}

#[test]
fn unweighted_map_agrees_with_residual_minimum() {
    let m = model();
    let clean = exact(&m);
    let prior = PriorConfig::up_to(0.1, 4).unwrap();
    let weights = PhiWeights::new(0.0, false).unwrap();
    for seed in [1, 2] {
        let data = add_noise(&clean, &NoiseSpec::new(0.01, seed).unwrap()).unwrap();
        let b = bayes_identify(&m, &data, &prior, weights, PenaltySpec::none(), &solver(), 0.0).unwrap();
        let r = residual_identify(&m, &data, prior.candidates(), &solver(), 0.0, TieBreak::Smaller).unwrap();
        assert_eq!(b.n, r.n, "seed {seed}");
        assert_eq!(b.params, r.params);
    }
}

#[test]
fn session_shares_fits_between_methods() {
    let m = model();
    let data = exact(&m);
    let mut session = Session::new(m, &data);
    let settings = IdentifySettings {
        solver: solver(),
        ..IdentifySettings::default()
    };
    let registry = MethodRegistry::with_builtins();
    let bayes = registry.resolve("bayes").unwrap().identify(&mut session, &settings).unwrap();
    let after_bayes = session.solves();
    assert_eq!(after_bayes, bayes.trace.len());
    let residual = registry.resolve("residual").unwrap().identify(&mut session, &settings).unwrap();
    assert_eq!(session.solves(), after_bayes);
    assert_eq!(residual.n, 5);
    let cluster = registry.resolve("cluster").unwrap().identify(&mut session, &settings).unwrap();
    assert_eq!(session.solves(), after_bayes);
    assert_eq!(cluster.n, 3);
}

#[test]
fn registry_lookup() {
    let mut registry = MethodRegistry::with_builtins();
    assert_eq!(registry.names(), vec!["bayes", "cluster", "residual"]);
    assert!(registry.register(Box::new(BayesMethod)).is_err());
    let err = match registry.resolve("lasso") {
        Ok(_) => panic!("resolved an unknown method"),
        Err(e) => e.to_string(),
    };
    assert!(err.contains("bayes") && err.contains("residual"), "{err}");
}

#[test]
fn report_key_values_are_parseable() {
    let m = model();
    let data = exact(&m);
    let prior = PriorConfig::up_to(0.1, 3).unwrap();
    let r = bayes_identify(&m, &data, &prior, PhiWeights::default(), PenaltySpec::none(), &solver(), 0.0).unwrap();
    let kv = r.to_key_values();
    let lookup = |key: &str| -> f64 {
        kv.lines()
            .find_map(|l| l.strip_prefix(&format!("{key}=")))
            .unwrap()
            .parse()
            .unwrap()
    };
    assert_eq!(lookup("n"), 3.0);
    assert_eq!(lookup("tau_2"), r.params.as_slice()[4]);
    assert_eq!(lookup("misfit"), r.misfit);
    assert!(r.to_report().contains("tau_j"));
}

#[test]
fn discrepancy_stop_halts_fits_before_convergence() {
    let m = model();
    let data = add_noise(&exact(&m), &NoiseSpec::new(0.01, 1).unwrap()).unwrap();
    let delta = data.noise().unwrap().delta_abs;
    let prior = PriorConfig::up_to(0.1, 3).unwrap();
    let stopped = bayes_identify(&m, &data, &prior, PhiWeights::default(), PenaltySpec::none(), &solver(), delta).unwrap();
    let full = bayes_identify(&m, &data, &prior, PhiWeights::default(), PenaltySpec::none(), &solver(), 0.0).unwrap();
    // at 1% noise a single element already fits within 1.5 δ
    let one = stopped.trace.iter().find(|t| t.n == 1).unwrap();
    assert!((2.0 * one.misfit).sqrt() <= 1.5 * delta);
    for (a, b) in stopped.trace.iter().zip(&full.trace) {
        assert!(a.misfit >= b.misfit, "n={}", a.n);
    }
    let tau1 = |r: &relaxid::identify::IdentificationResult| r.params.as_slice()[2];
    assert!((tau1(&full) - 0.2).abs() < (tau1(&stopped) - 0.2).abs());
}
