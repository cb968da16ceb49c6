//! Seeded simulation of a beaconing mote network.
//!
//! Mote lifetimes are drawn first (they do not depend on radio traffic).
//! Each receiver segment is then stepped through its listen windows in time
//! order; within a window, beacon arrivals from every linked neighbor are
//! generated, sorted by arrival time and fed through the slot table. Every
//! random draw comes from a per-mote ChaCha stream, so results depend only
//! on the configuration, the topology and the seed.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use super::config::{ConfigError, SimConfig};
use super::radio::{link_prr, received_power_dbm};
use super::slots::{eviction_select, Heard, SlotTable};
use super::topology::Topology;
use super::trace::{AnchorTiming, MoteAccounting, Sample, SegmentTruth, SimTrace};
use crate::io::quantize_s;
use crate::model::{AnchorRecord, SegmentId};

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid topology: {0}")]
    Topology(String),
}

const STREAM_LIFE: u64 = 0;
const STREAM_RADIO: u64 = 1;
const STREAM_GPS: u64 = 2;

fn stream(seed: u64, mote: u32, kind: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::from(mote) * 8 + kind);
    rng
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    truth: SegmentTruth,
    /// Local time of the first beacon.
    phase: f64,
}

#[derive(Debug, Clone, Copy)]
struct Link {
    sender: usize,
    /// Mean received power before per-packet fading.
    power_dbm: f64,
}

struct Reception {
    arrival: f64,
    sent: f64,
    sender: SegmentId,
    lc_s: f64,
}

struct Sim<'a> {
    cfg: &'a SimConfig,
    q: bool,
    lives: Vec<Vec<Segment>>,
    ids: Vec<u32>,
}

impl Sim<'_> {
    fn quant(&self, v: f64) -> f64 {
        if self.q {
            quantize_s(v)
        } else {
            v
        }
    }
}

fn draw_lifetime(cfg: &SimConfig, mote: u32, quantize: bool) -> Vec<Segment> {
    let mut rng = stream(cfg.seed, mote, STREAM_LIFE);
    let q = |v: f64| if quantize { quantize_s(v) } else { v };
    let mut out = Vec::new();
    let mut t = 0.0;
    let mut reboot = 0u32;
    while t < cfg.duration_s {
        let len = cfg.segment_model.sample(&mut rng).max(1e-3);
        let (lo, hi) = cfg.skew_ppm_range;
        let skew = lo + (hi - lo) * rng.random::<f64>();
        let phase = q(cfg.t_beacon_s * rng.random::<f64>());
        let down = rng.random::<f64>() < cfg.p_down;
        let (dlo, dhi) = cfg.downtime_range_s;
        let downtime = dlo + (dhi - dlo) * rng.random::<f64>();

        let boot = q(t);
        let end = q((t + len).min(cfg.duration_s));
        if end > boot {
            let truth = SegmentTruth::new(SegmentId::new(mote, reboot), boot, end, skew);
            out.push(Segment { truth, phase });
            reboot += 1;
        }
        t += len;
        if down {
            t += downtime;
        }
    }
    out
}

/// Run one simulation.
pub fn run_simulation(cfg: &SimConfig, topo: &Topology) -> Result<SimTrace, SimError> {
    cfg.validate()?;
    topo.validate().map_err(SimError::Topology)?;

    let mut motes = topo.motes.clone();
    motes.sort_by_key(|m| m.id);
    let ids: Vec<u32> = motes.iter().map(|m| m.id).collect();
    let lives: Vec<Vec<Segment>> = ids.iter().map(|&m| draw_lifetime(cfg, m, cfg.quantize_us)).collect();

    // Receiver -> incoming links, sender index order.
    let links: Vec<Vec<Link>> = motes
        .iter()
        .map(|r| {
            motes
                .iter()
                .enumerate()
                .filter(|(_, s)| s.id != r.id)
                .filter_map(|(si, s)| {
                    let d = (r.x_m - s.x_m).hypot(r.y_m - s.y_m);
                    let prr = cfg.prr_override.unwrap_or_else(|| link_prr(d, &cfg.path_loss, 0.0));
                    (prr > 0.0 && prr >= cfg.prr_cutoff).then(|| Link {
                        sender: si,
                        power_dbm: received_power_dbm(d, &cfg.path_loss, 0.0),
                    })
                })
                .collect()
        })
        .collect();

    let sim = Sim { cfg, q: cfg.quantize_us, lives, ids };
    let mut anchors: Vec<(f64, AnchorRecord, AnchorTiming)> = Vec::new();
    let mut base_anchors: Vec<(f64, AnchorRecord)> = Vec::new();
    let mut samples = Vec::new();
    let mut truth = BTreeMap::new();
    let mut accounting = Vec::with_capacity(sim.ids.len());

    for (ri, &mote) in sim.ids.iter().enumerate() {
        let mut acct = MoteAccounting { mote, ..Default::default() };
        let mut radio_rng = stream(cfg.seed, mote, STREAM_RADIO);
        let mut gps_rng = stream(cfg.seed, mote, STREAM_GPS);
        let is_gps = mote == topo.gps_mote;

        for seg in &sim.lives[ri] {
            let tr = seg.truth;
            truth.insert(tr.segment, tr);
            acct.segments += 1;
            acct.alive_s += tr.end_s - tr.boot_s;

            // Beacons sent over the segment.
            let span = tr.local_span();
            if seg.phase < span {
                let n = ((span - seg.phase) / cfg.t_beacon_s).floor() as u64 + 1;
                // A beacon exactly at the end instant is not sent.
                let last = seg.phase + (n - 1) as f64 * cfg.t_beacon_s;
                let n = if tr.gts(last) >= tr.end_s { n - 1 } else { n };
                acct.beacons += n;
            }

            for k in 1.. {
                let lc = k as f64 * cfg.sample_interval_s;
                let gts = tr.gts(lc);
                if gts >= tr.end_s {
                    break;
                }
                samples.push(Sample { segment: tr.segment, lc, true_gts: gts });
                acct.samples += 1;
            }

            if is_gps {
                let noise = cfg.gps_fault.map(|f| Normal::new(f.mu_s, f.sigma_s).expect("validated fault"));
                for k in 1.. {
                    let lc = k as f64 * cfg.t_sync_s;
                    let t = tr.gts(lc);
                    if t >= tr.end_s {
                        break;
                    }
                    let mut gts = t;
                    if let (Some(f), Some(n)) = (cfg.gps_fault, noise.as_ref()) {
                        let e = n.sample(&mut gps_rng);
                        if f.window.contains(t) {
                            gts += e;
                        }
                    }
                    if cfg.gps_outage.is_some_and(|o| o.contains(t)) {
                        continue;
                    }
                    let rec = AnchorRecord::global(tr.segment, sim.quant(lc), sim.quant(gts));
                    anchors.push((t, rec, AnchorTiming { sent_s: t, received_s: t }));
                    acct.anchors += 1;
                }
            }

            if let Some(iv) = cfg.basestation_interval_s {
                let first = (tr.boot_s / iv).floor() as u64 + 1;
                for k in first.. {
                    let t = k as f64 * iv;
                    if t >= tr.end_s {
                        break;
                    }
                    if t < tr.boot_s || cfg.basestation_outage.is_some_and(|o| o.contains(t)) {
                        continue;
                    }
                    let rec = AnchorRecord::global(tr.segment, sim.quant(tr.local_at(t)), sim.quant(t));
                    base_anchors.push((t, rec));
                }
            }

            listen_segment(&sim, seg, &links[ri], &mut radio_rng, &mut acct, &mut anchors);
        }
        acct.beacon_s = acct.beacons as f64 * cfg.beacon_airtime_s;
        acct.anchor_bytes = acct.anchors * cfg.anchor_record_bytes;
        acct.sample_bytes = acct.samples * cfg.sample_bytes;
        accounting.push(acct);
    }

    anchors.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(a.1.receiver.cmp(&b.1.receiver))
            .then(a.1.sender.cmp(&b.1.sender))
    });
    base_anchors.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.receiver.cmp(&b.1.receiver)));
    let (anchor_records, anchor_timing) = anchors.into_iter().map(|(_, r, t)| (r, t)).unzip();

    Ok(SimTrace {
        seed: cfg.seed,
        anchors: anchor_records,
        anchor_timing,
        base_anchors: base_anchors.into_iter().map(|(_, r)| r).collect(),
        samples,
        truth,
        accounting,
    })
}

/// Step one receiver segment through its listen windows.
fn listen_segment(
    sim: &Sim<'_>,
    seg: &Segment,
    links: &[Link],
    rng: &mut ChaCha8Rng,
    acct: &mut MoteAccounting,
    out: &mut Vec<(f64, AnchorRecord, AnchorTiming)>,
) {
    let cfg = sim.cfg;
    let tr = seg.truth;
    let (dmin, dmax) = (cfg.comm_delay_range_ms.0 * 1e-3, cfg.comm_delay_range_ms.1 * 1e-3);
    let timeout = cfg.eviction_timeout_factor * cfg.t_wakeup_s;
    let fade = Normal::new(0.0, cfg.path_loss.sigma_db).expect("validated sigma");
    let mut table = SlotTable::new(cfg.numseg);

    for k in 0u64.. {
        let open_lc = k as f64 * cfg.t_wakeup_s;
        let ws = tr.gts(open_lc);
        if ws >= tr.end_s {
            break;
        }
        let we = tr.gts(open_lc + cfg.t_listen_s).min(tr.end_s);
        table.remove_stale(open_lc, timeout);

        let mut rx: Vec<Reception> = Vec::new();
        for link in links {
            let life = &sim.lives[link.sender];
            let first = life.partition_point(|s| s.truth.end_s <= ws - dmax);
            for s in life[first..].iter().take_while(|s| s.truth.boot_s < we) {
                let st = s.truth;
                let rate = st.rate();
                let j0 = (((ws - dmax - st.boot_s) * rate - s.phase) / cfg.t_beacon_s).ceil().max(0.0) as u64;
                for j in j0.. {
                    let lc_s = s.phase + j as f64 * cfg.t_beacon_s;
                    let sent = st.gts(lc_s);
                    if sent >= st.end_s || sent > we - dmin {
                        break;
                    }
                    let delay = dmin + (dmax - dmin) * rng.random::<f64>();
                    let ok = match cfg.prr_override {
                        Some(p) => rng.random::<f64>() < p,
                        None => link.power_dbm + fade.sample(rng) > cfg.path_loss.sensitivity_dbm,
                    };
                    let arrival = sent + delay;
                    if ok && arrival >= ws && arrival <= we {
                        rx.push(Reception { arrival, sent, sender: st.segment, lc_s });
                    }
                }
            }
        }
        rx.sort_by(|a, b| a.arrival.total_cmp(&b.arrival).then(a.sender.cmp(&b.sender)));

        let mut heard_now: Vec<SegmentId> = Vec::new();
        let mut pending: Vec<&Reception> = Vec::new();
        let mut close = we;
        let mut exited = false;
        let mut store = |r: &Reception, acct: &mut MoteAccounting| {
            let rec = AnchorRecord::pair(tr.segment, sim.quant(tr.local_at(r.arrival)), r.sender, sim.quant(r.lc_s));
            out.push((r.arrival, rec, AnchorTiming { sent_s: r.sent, received_s: r.arrival }));
            acct.anchors += 1;
        };

        for r in &rx {
            let now = tr.local_at(r.arrival);
            let tracked = table.contains(r.sender)
                || (cfg.eviction_policy == super::EvictionPolicy::Fcfs
                    && !eviction_select(
                        &mut table,
                        &[Heard { segment: r.sender, lc: r.lc_s }],
                        cfg.eviction_policy,
                        now,
                        timeout,
                        rng,
                    )
                    .is_empty());
            if tracked {
                table.touch(r.sender, now);
                store(r, acct);
                if !heard_now.contains(&r.sender) {
                    heard_now.push(r.sender);
                }
            } else {
                pending.push(r);
            }
            if table.is_full() && table.segments().all(|s| heard_now.contains(&s)) {
                close = r.arrival;
                exited = true;
                break;
            }
        }

        if cfg.eviction_policy != super::EvictionPolicy::Fcfs && !pending.is_empty() {
            let heard: Vec<Heard> = pending.iter().map(|r| Heard { segment: r.sender, lc: r.lc_s }).collect();
            let now = tr.local_at(close);
            let admitted = eviction_select(&mut table, &heard, cfg.eviction_policy, now, timeout, rng);
            for r in pending.iter().filter(|r| admitted.contains(&r.sender)) {
                table.touch(r.sender, tr.local_at(r.arrival));
                store(r, acct);
            }
        }

        acct.listen_windows += 1;
        acct.early_exits += u64::from(exited);
        acct.listen_s += close - ws;
    }
}
