//! Optimized metric code against brute-force oracles on random inputs,
//! plus the conservation and normalization properties.

mod oracle;

use oracle::*;

fn run(check: fn(u64) -> Result<Worst, String>, seed: u64) {
    let w = check(seed).unwrap_or_else(|e| panic!("{e}"));
    assert!(w.instances >= 100, "{}: only {} instances", w.name, w.instances);
}

#[test]
fn align_4h_matches_oracle() {
    run(check_align_4h, 1);
}

#[test]
fn vwap_merge_matches_oracle() {
    run(check_vwap_merge, 2);
}

#[test]
fn map_swings_matches_oracle() {
    run(check_map_swings, 3);
}

#[test]
fn volume_nodes_match_oracle() {
    run(check_volume_nodes, 4);
}

#[test]
fn kde_matches_oracle_at_probes() {
    run(check_kde, 5);
}

#[test]
fn gini_matches_oracle() {
    run(check_gini, 6);
}

#[test]
fn depth_percentiles_match_oracle() {
    run(check_depth_percentiles, 7);
}

#[test]
fn fill_slippage_matches_oracle() {
    run(check_fill_slippage, 8);
}

#[test]
fn impact_regression_matches_oracle() {
    run(check_impact, 9);
}

#[test]
fn volume_nodes_conserve_volume() {
    run(check_volume_conservation, 10);
}

#[test]
fn every_density_integrates_to_one() {
    run(check_kde_integral, 11);
}

#[test]
fn quality_pipeline_is_idempotent() {
    let w = check_pipeline_idempotent(12).unwrap_or_else(|e| panic!("{e}"));
    assert_eq!(w.instances, PANELS);
}
