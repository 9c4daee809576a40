use proptest::prelude::*;
use relaxid::forward::{uniform_grid, OdeOracle};
use relaxid::{ForwardModel, MaterialParams, StrainProgram};

fn model(rate: f64, max: f64, horizon: f64) -> ForwardModel {
    ForwardModel::new(StrainProgram::new(rate, max, horizon).unwrap(), 0.01).unwrap()
}

fn elements(max_n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0..20.0f64, (0.05f64.ln()..50f64.ln()).prop_map(f64::exp)), 1..=max_n)
}

#[test]
fn table_one_matches_oracle_on_fine_grid() {
    let m = model(10.0, 20.0, 100.0);
    let p = MaterialParams::new(10.0, &[(4.0, 0.2), (7.0, 3.7), (1.0, 25.0)]).unwrap();
    let times = uniform_grid(0.01, 5.0).unwrap();
    let closed = m.evaluate(&p, &times).unwrap();
    let ode = OdeOracle::default().evaluate(&m, &p, &times).unwrap();
    for (a, b) in closed.stress().iter().zip(ode.stress()).skip(1) {
        assert!((a - b).abs() <= 1e-6 * b.abs(), "{a} vs {b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn closed_form_agrees_with_oracle(
        mu in 0.0..20.0f64,
        els in elements(3),
        rate in 1.0..20.0f64,
    ) {
        let m = model(rate, 20.0, 30.0);
        let p = MaterialParams::new(mu, &els).unwrap();
        let times = uniform_grid(0.05, 30.0).unwrap();
        let closed = m.evaluate(&p, &times).unwrap();
        let ode = OdeOracle::default().evaluate(&m, &p, &times).unwrap();
        let scale = closed.stress().iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
        for (a, b) in closed.stress().iter().zip(ode.stress()) {
            prop_assert!((a - b).abs() <= 1e-7 * scale);
        }
    }

    #[test]
    fn stress_is_linear_in_stiffnesses(
        mu in 0.0..20.0f64,
        els in elements(4),
        c in 0.0..5.0f64,
        t in 0.0..100.0f64,
    ) {
        let m = model(10.0, 20.0, 100.0);
        let p = MaterialParams::new(mu, &els).unwrap();
        let scaled: Vec<(f64, f64)> = els.iter().map(|&(s, tau)| (c * s, tau)).collect();
        let q = MaterialParams::new(c * mu, &scaled).unwrap();
        let a = m.stress_at(&p, t).unwrap();
        let b = m.stress_at(&q, t).unwrap();
        prop_assert!((b - c * a).abs() <= 1e-12 * (1.0 + b.abs()));
    }

    #[test]
    fn rises_on_ramp_and_relaxes_on_hold(
        mu in 0.0..20.0f64,
        els in elements(4),
        rate in 1.0..20.0f64,
    ) {
        let m = model(rate, 20.0, 100.0);
        let p = MaterialParams::new(mu, &els).unwrap();
        let times = uniform_grid(0.05, 100.0).unwrap();
        let s = m.evaluate(&p, &times).unwrap();
        let ramp_end = 20.0 / rate;
        let tol = 1e-10 * s.stress().iter().fold(1.0f64, |a, v| a.max(*v));
        for (w, t) in s.stress().windows(2).zip(&times[1..]) {
            prop_assert!(w[0] >= -tol && w[1] >= -tol);
            if *t <= ramp_end {
                prop_assert!(w[1] >= w[0] - tol);
            } else if t - 0.05 >= ramp_end {
                prop_assert!(w[1] <= w[0] + tol);
            }
        }
        // the spring alone remains at the end
        let last = *s.stress().last().unwrap();
        prop_assert!(last >= mu * 20.0 - tol);
    }

    #[test]
    fn element_order_does_not_matter(
        mu in 0.0..20.0f64,
        mut els in elements(4),
        t in 0.0..100.0f64,
    ) {
        let m = model(10.0, 20.0, 100.0);
        let a = m.stress_at(&MaterialParams::new(mu, &els).unwrap(), t).unwrap();
        els.reverse();
        let b = m.stress_at(&MaterialParams::new(mu, &els).unwrap(), t).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn branches_meet_at_ramp_end(stiffness in 0.1..20.0f64, tau in 0.011..1e4f64, rate in 0.5..50.0f64) {
        let m = model(rate, 20.0, 1e4);
        let kink = 20.0 / rate;
        let eps = 1e-9 * kink;
        let before = m.stress_element(stiffness, tau, kink - eps).unwrap();
        let after = m.stress_element(stiffness, tau, kink + eps).unwrap();
        let at = m.stress_element(stiffness, tau, kink).unwrap();
        prop_assert!((before - at).abs() <= 1e-6 * (1.0 + at.abs()));
        prop_assert!((after - at).abs() <= 1e-6 * (1.0 + at.abs()));
    }
}
