use sercomp::analysis::damping_estimate;
use sercomp::config::alpha_beta_peak;
use sercomp::dpc::{DpcConfig, DpcMode};
use sercomp::line_models::{size_series_capacitor, LineParams};
use sercomp::sim::*;
use sercomp::Error;

fn base(model: ModelKind, duration: f64) -> Scenario {
    let params = LineParams::default();
    Scenario {
        params,
        compensation: size_series_capacitor(0.25, &params, 2).unwrap(),
        model,
        controller: None,
        v_nominal: alpha_beta_peak(345e3),
        initial_flow: FlowTarget::new(360e6, 0.8, PfSign::Lagging),
        events: vec![],
        dt: 20e-6,
        duration,
        record: vec![],
    }
}

fn step(t: f64, s: f64) -> Event {
    Event { t, target: FlowTarget::new(s, 0.8, PfSign::Lagging) }
}

#[test]
fn operating_point_is_a_steady_state() {
    let r = run_scenario(&base(ModelKind::AbcRlc, 0.5)).unwrap();
    for (c, target) in [(Channel::PDelivered, 288e6), (Channel::QDelivered, 216e6)] {
        let x = r.channel(c).unwrap();
        let (lo, hi) = x.iter().fold((f64::MAX, f64::MIN), |(a, b), v| (a.min(*v), b.max(*v)));
        assert!((hi - lo) / target < 1e-3, "{c}: {lo} .. {hi}");
    }
}

#[test]
fn runs_are_bit_identical() {
    let mut s = base(ModelKind::SplitPi, 0.2);
    s.events.push(step(0.05, 480e6));
    s.controller = Some(DpcConfig::default());
    assert_eq!(run_scenario(&s).unwrap(), run_scenario(&s).unwrap());
}

#[test]
fn ssr_envelope_decays_after_the_step() {
    let mut s = base(ModelKind::AbcRlc, 0.6);
    s.events.push(step(0.1, 480e6));
    let r = run_scenario(&s).unwrap();
    let sigma = damping_estimate(r.channel(Channel::IATransient).unwrap(), s.dt, (0.1, 0.6)).unwrap();
    assert!(sigma > 0.0);
    let i = r.channel(Channel::IATransient).unwrap();
    let cycle = (1.0 / 30.0 / s.dt) as usize;
    let start = (0.1 / s.dt) as usize + 1;
    let peaks: Vec<f64> = i[start..]
        .chunks(cycle)
        .filter(|c| c.len() == cycle)
        .map(|c| c.iter().fold(0.0f64, |m, v| m.max(v.abs())))
        .collect();
    assert!(peaks.windows(2).all(|w| w[1] <= w[0] * 1.001), "{peaks:?}");
}

#[test]
fn controllers_reach_the_new_set_point() {
    for mode in [DpcMode::Deadbeat, DpcMode::Sliding] {
        for model in [ModelKind::AbcRlc, ModelKind::SplitPi, ModelKind::Reduced] {
            let mut s = base(model, 0.4);
            s.events.push(step(0.1, 480e6));
            s.controller = Some(DpcConfig { mode, ..DpcConfig::default() });
            let r = run_scenario(&s).unwrap();
            let p = r.channel(Channel::PDelivered).unwrap();
            let q = r.channel(Channel::QDelivered).unwrap();
            let last = p.len() - 1;
            assert!((p[last] - 384e6).abs() < 0.01 * 384e6, "{mode:?} {model:?}: {}", p[last]);
            assert!((q[last] - 288e6).abs() < 0.01 * 288e6, "{mode:?} {model:?}: {}", q[last]);
            let vcon = r.channel(Channel::VconAlpha).unwrap();
            assert!(vcon.iter().all(|v| v.abs() <= 1e5));
        }
    }
}

#[test]
fn controlled_runs_keep_buses_fixed() {
    let mut s = base(ModelKind::AbcRlc, 0.2);
    s.events.push(step(0.1, 480e6));
    s.controller = Some(DpcConfig::default());
    let r = run_scenario(&s).unwrap();
    assert_eq!(r.event_semantics, EVENT_SEMANTICS_CONTROLLED);
    let u = run_scenario(&Scenario { controller: None, ..s }).unwrap();
    assert_eq!(u.event_semantics, EVENT_SEMANTICS_UNCONTROLLED);
}

#[test]
fn infeasible_targets_are_capability_errors() {
    let mut s = base(ModelKind::AbcRlc, 0.1);
    s.initial_flow = FlowTarget::new(5e9, 1.0, PfSign::Lagging);
    assert!(matches!(run_scenario(&s), Err(Error::Capability { .. })));
    let mut s = base(ModelKind::AbcRlc, 0.1);
    s.events.push(step(0.05, 5e9));
    assert!(matches!(run_scenario(&s), Err(Error::Capability { .. })));
}

#[test]
fn step_beyond_rk4_stability_reports_divergence() {
    let mut s = base(ModelKind::SplitPi, 20.0);
    s.dt = 2e-3;
    s.record = vec![Channel::IA];
    assert!(matches!(run_scenario(&s), Err(Error::Divergence { .. })));
}

#[test]
fn recorded_channels_follow_the_request() {
    let mut s = base(ModelKind::Reduced, 0.01);
    s.record = vec![Channel::Q, Channel::IA];
    let r = run_scenario(&s).unwrap();
    assert_eq!(r.channels.iter().map(|c| c.0).collect::<Vec<_>>(), vec![Channel::Q, Channel::IA]);
    assert!(r.channels.iter().all(|c| c.1.len() == 501));
    assert_eq!(r.time.len(), 501);
}
