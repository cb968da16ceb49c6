use std::collections::BTreeMap;

use phoenix_core::io::anchors::write_anchors;
use phoenix_core::io::truth::write_truth;
use phoenix_core::model::SegmentId;
use phoenix_core::recon::{build_anchor_store, build_fit_graph, phoenix, FitOptions, PhoenixOptions};
use phoenix_core::sim::{
    generate_topology, run_simulation, MotePosition, SegmentModel, SimConfig, SimTrace, Topology,
    TopologyKind, DAY,
};
use proptest::prelude::*;

fn small(seed: u64) -> (SimConfig, Topology) {
    let cfg = SimConfig { duration_s: 8.0 * DAY, seed, ..Default::default() };
    let topo = generate_topology(TopologyKind::UniformRandom, 8, 80.0, seed).unwrap();
    (cfg, topo)
}

fn bytes(trace: &SimTrace) -> Vec<u8> {
    let mut out = Vec::new();
    write_anchors(&mut out, &trace.anchors).unwrap();
    write_anchors(&mut out, &trace.base_anchors).unwrap();
    write_truth(&mut out, &trace.truth).unwrap();
    for s in &trace.samples {
        out.extend(format!("{} {} {}\n", s.segment, s.lc, s.true_gts).bytes());
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn trace_invariants(seed in 0u64..1000) {
        let (cfg, topo) = small(seed);
        let trace = run_simulation(&cfg, &topo).unwrap();

        // Hidden truth is exact and local clocks only move forward.
        let mut last: BTreeMap<SegmentId, f64> = BTreeMap::new();
        for s in &trace.samples {
            prop_assert!((trace.truth[&s.segment].gts(s.lc) - s.true_gts).abs() <= 1e-9);
            if let Some(&prev) = last.get(&s.segment) {
                prop_assert!(s.lc > prev);
            }
            last.insert(s.segment, s.lc);
        }

        // Reboot counts run 0, 1, 2, ... per mote with segments back to back in time.
        let mut by_mote: BTreeMap<u32, Vec<_>> = BTreeMap::new();
        for t in trace.truth.values() {
            by_mote.entry(t.segment.mote).or_default().push(*t);
        }
        for segs in by_mote.values() {
            for (k, t) in segs.iter().enumerate() {
                prop_assert_eq!(t.segment.reboot as usize, k);
                prop_assert!(t.end_s > t.boot_s);
            }
            for w in segs.windows(2) {
                prop_assert!(w[1].boot_s >= w[0].end_s);
            }
        }

        // Anchors arrive 5-15 ms after they were sent and carry both clocks
        // as they read at those instants (to the microsecond).
        prop_assert_eq!(trace.anchors.len(), trace.anchor_timing.len());
        for (a, t) in trace.anchors.iter().zip(&trace.anchor_timing) {
            if a.is_global() {
                prop_assert_eq!(t.sent_s, t.received_s);
                continue;
            }
            let delay = t.received_s - t.sent_s;
            prop_assert!((0.005 - 1e-9..=0.015 + 1e-9).contains(&delay), "delay {delay}");
            let rx = trace.truth[&a.receiver];
            let tx = trace.truth[&a.sender];
            prop_assert!((rx.local_at(t.received_s) - a.lc_r).abs() <= 1e-6);
            prop_assert!((tx.local_at(t.sent_s) - a.lc_s).abs() <= 1e-6);
            prop_assert!(a.lc_r >= 0.0 && a.lc_s >= 0.0);
        }

        let again = run_simulation(&cfg, &topo).unwrap();
        prop_assert_eq!(bytes(&trace), bytes(&again));
    }
}

#[test]
fn lone_gps_mote_for_a_day() {
    let cfg = SimConfig { duration_s: DAY, segment_model: SegmentModel::Never, ..Default::default() };
    let topo = Topology { motes: vec![MotePosition { id: 0, x_m: 0.0, y_m: 0.0 }], gps_mote: 0 };
    let trace = run_simulation(&cfg, &topo).unwrap();
    assert_eq!(trace.samples.len(), 144);
    assert_eq!(trace.anchors.iter().filter(|a| a.is_global()).count(), 4);
    assert_eq!(trace.pair_anchor_count(), 0);
}

#[test]
fn silent_radio_leaves_only_gps_segments() {
    let cfg = SimConfig { duration_s: 10.0 * DAY, prr_override: Some(0.0), seed: 4, ..Default::default() };
    let topo = generate_topology(TopologyKind::Grid, 9, 30.0, 0).unwrap();
    let trace = run_simulation(&cfg, &topo).unwrap();
    assert_eq!(trace.pair_anchor_count(), 0);
    let r = phoenix(&build_fit_graph(&build_anchor_store(&trace.anchors), &FitOptions::default()), &PhoenixOptions::default());
    assert!(r.reachable() > 0);
    assert!(r.fits.iter().filter(|(_, f)| !f.is_sentinel()).all(|(s, _)| s.mote == topo.gps_mote));
}

#[test]
fn beacon_duty_cycle_is_constant_across_slot_counts() {
    let topo = generate_topology(TopologyKind::UniformRandom, 10, 100.0, 7).unwrap();
    let duty: Vec<f64> = [1, 2, 4, 8]
        .iter()
        .map(|&numseg| {
            let cfg = SimConfig { duration_s: 6.0 * DAY, numseg, seed: 7, ..Default::default() };
            let t = run_simulation(&cfg, &topo).unwrap().totals();
            100.0 * t.beacon_s / t.alive_s
        })
        .collect();
    for d in &duty {
        assert!((d - 0.075).abs() < 0.001, "{duty:?}");
        assert_eq!(*d, duty[0]);
    }
}
