//! Generator self-consistency: scripted scenarios produce the verdicts and
//! regime labels they were scripted for, at any price scale and seed, and
//! never trip a reject in the quality pipeline.

use rangegov_core::backtest::{backtest, REGIME_KEY};
use rangegov_core::hypothesis::{evaluate_panel, Hypothesis, Outcome};
use rangegov_core::quality::{run_pipeline, Severity};
use rangegov_core::regime::classify_regime;
use rangegov_core::synth::{generate, hypothesis_suite, regime_suite};
use rangegov_core::Config;

fn outcome_name(o: Outcome) -> String {
    serde_json::to_value(o).unwrap().as_str().unwrap().to_string()
}

fn hypothesis(key: &str) -> Hypothesis {
    match key {
        "H1" => Hypothesis::H1,
        "H2" => Hypothesis::H2,
        "H3" => Hypothesis::H3,
        "H4" => Hypothesis::H4,
        other => panic!("unexpected key {other}"),
    }
}

#[test]
fn hypothesis_scripts_hold_across_seeds_and_scales() {
    let cfg = Config::default();
    for seed in 0..12 {
        for s in hypothesis_suite(seed) {
            let (panel, truth) = generate(&s).unwrap();
            for k in [1.0, 1000.0, 0.001] {
                let p = panel.rescale_prices(k);
                let verdicts = evaluate_panel(&p, &p.windows, &Hypothesis::ALL, &cfg);
                for e in &truth.expectations {
                    let h = hypothesis(&e.key);
                    let v = verdicts.iter().find(|v| v.hypothesis == h).unwrap();
                    assert_eq!(outcome_name(v.outcome), e.expected, "{} seed {seed} x{k}", s.name);
                }
            }
        }
    }
}

#[test]
fn regime_scripts_hold_across_seeds() {
    let cfg = Config::default();
    for seed in 0..12 {
        for s in regime_suite(seed) {
            let (p, truth) = generate(&s).unwrap();
            let e = &truth.expectations[0];
            assert_eq!(e.key, REGIME_KEY);
            let label = classify_regime(&p, e.window.end, &cfg).unwrap().label;
            assert_eq!(label.as_str(), e.expected, "{} seed {seed}", s.name);
        }
    }
}

#[test]
fn generated_panels_pass_quality() {
    let cfg = Config::default();
    for s in hypothesis_suite(5).iter().chain(&regime_suite(5)) {
        let (p, _) = generate(s).unwrap();
        let (cleaned, report) = run_pipeline(&p, &[], &cfg);
        let rejects: Vec<_> = report.flags.iter().filter(|f| f.severity == Severity::Reject).collect();
        assert!(rejects.is_empty(), "{}: {rejects:?}", s.name);
        assert_eq!(cleaned.candles, p.candles);
    }
}

#[test]
fn backtest_diagonal_is_complete() {
    let cfg = Config::default();
    let panels: Vec<_> = hypothesis_suite(11)
        .iter()
        .chain(&regime_suite(11))
        .map(|s| {
            let (p, t) = generate(s).unwrap();
            (s.name.clone(), p, Some(t))
        })
        .collect();
    let summary = backtest(&panels, &cfg);
    assert_eq!(summary.confusion.unwrap().diagonal(), Some(1.0));
}
