//! A contender: four AC contention instances, their MAC queues, traffic
//! sources, virtual-collision resolution, and aggregation-unit assembly.

use std::collections::VecDeque;

use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::mac::eca::{self, fair_share_count, EcaConfig};
use crate::mac::edca;
use crate::mac::params::{Ac, AcParams, ALL_ACS};
use crate::mac::schedule_reset::SrMode;
use crate::mac::smart::{smart_backoff, SiblingView};
use crate::mac::state::{AcState, DiagCounters};
use crate::mac::draw_random_backoff;
use crate::phy::{AccessMode, PhyParams};
use crate::traffic::TrafficSource;

/// MAC protocol identity of a station, fixed for a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProtocolId {
    Edca,
    EcaQosFairShare,
    EcaQosTxop,
}

impl ProtocolId {
    pub fn is_eca(self) -> bool {
        matches!(self, ProtocolId::EcaQosFairShare | ProtocolId::EcaQosTxop)
    }

    pub fn label(self) -> &'static str {
        match self {
            ProtocolId::Edca => "edca",
            ProtocolId::EcaQosFairShare => "eca-fs",
            ProtocolId::EcaQosTxop => "eca-txop",
        }
    }
}

/// One queued MAC payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueuedMpdu {
    pub payload_bytes: u32,
    pub enqueued_us: u64,
}

/// Bounded FIFO MAC queue; arriving packets drop when it is full.
#[derive(Debug, Clone)]
pub struct MacQueue {
    entries: VecDeque<QueuedMpdu>,
    capacity: usize,
    dropped_arrivals: u64,
}

/// Default MAC queue depth in packets.
pub const MAC_QUEUE_CAPACITY: usize = 1000;

impl MacQueue {
    pub fn new(capacity: usize) -> Self {
        MacQueue {
            entries: VecDeque::new(),
            capacity,
            dropped_arrivals: 0,
        }
    }

    pub fn enqueue(&mut self, payload_bytes: u32, enqueued_us: u64) {
        if self.entries.len() >= self.capacity {
            self.dropped_arrivals += 1;
            return;
        }
        self.entries.push_back(QueuedMpdu { payload_bytes, enqueued_us });
    }

    pub fn dequeue(&mut self) -> Option<QueuedMpdu> {
        self.entries.pop_front()
    }

    pub fn push_front(&mut self, mpdu: QueuedMpdu) {
        self.entries.push_front(mpdu);
    }

    pub fn peek(&self, i: usize) -> Option<&QueuedMpdu> {
        self.entries.get(i)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn dropped_arrivals(&self) -> u64 {
        self.dropped_arrivals
    }

    pub fn iter(&self) -> impl Iterator<Item = &QueuedMpdu> {
        self.entries.iter()
    }
}

/// Aggregation behaviour of one channel access.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnitKind {
    /// Exactly one MPDU, plain ACK.
    SingleMsdu,
    /// One aggregated PPDU, Block ACK.
    Ampdu,
    /// SIFS-separated sequence of single-MPDU exchanges within a TXOP.
    TxopBurst,
}

/// What a winning AC puts on the air.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransmissionUnit {
    pub kind: UnitKind,
    /// Payload sizes, in queue order.
    pub mpdus: Vec<u32>,
    /// Exchange airtime (data, intra-burst gaps, acknowledgements), µs.
    pub exchange_us: u64,
    pub origin: (u32, Ac),
}

/// Aggregation policy resolved for one AC access.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AggregationPolicy {
    FairShare,
    Txop,
    SingleMsdu,
}

/// One AC's contention instance inside a station.
#[derive(Debug)]
pub struct AcContext {
    pub params: AcParams,
    pub state: AcState,
    pub queue: MacQueue,
    pub source: TrafficSource,
    pub backoff_rng: ChaCha12Rng,
    pub channel_rng: ChaCha12Rng,
}

/// A contender owning four AC contention instances.
#[derive(Debug)]
pub struct Station {
    pub id: u32,
    pub protocol: ProtocolId,
    pub acs: [AcContext; 4],
    pub eca_cfg: EcaConfig,
    pub phy: PhyParams,
    pub access: AccessMode,
    pub diag: DiagCounters,
    /// Virtual collisions resolved at this station (losers counted).
    pub virtual_collisions: u64,
}

impl Station {
    /// Aggregation policy of `ac` for this station's protocol. Frame
    /// aggregation only ever applies to the high-priority ACs, and a
    /// multi-frame TXOP needs the RTS/CTS protection exchange; under
    /// Basic Access a TXOP access carries a single MSDU.
    pub fn aggregation_policy(&self, ac: Ac) -> AggregationPolicy {
        let high_priority = matches!(ac, Ac::Vo | Ac::Vi);
        if !high_priority {
            return AggregationPolicy::SingleMsdu;
        }
        match self.protocol {
            ProtocolId::Edca | ProtocolId::EcaQosTxop => {
                if self.acs[ac.index()].params.txop_limit_us > 0
                    && self.access == AccessMode::RtsCts
                {
                    AggregationPolicy::Txop
                } else {
                    AggregationPolicy::SingleMsdu
                }
            }
            ProtocolId::EcaQosFairShare => AggregationPolicy::FairShare,
        }
    }

    /// Schedule Reset applies to this AC: enabled at the station level and
    /// never for the background AC, whose window only relaxes on a
    /// retry-limit drop or an empty queue.
    pub fn sr_enabled(&self, ac: Ac) -> bool {
        self.protocol.is_eca() && self.eca_cfg.sr_mode != SrMode::Off && ac != Ac::Bk
    }

    /// Views of every other AC currently in contention, for smart draws
    /// and arming-safety checks on `ac`.
    pub fn sibling_views(&self, ac: Ac) -> Vec<SiblingView> {
        let mut views = Vec::with_capacity(3);
        for other in ALL_ACS {
            if other == ac {
                continue;
            }
            let ctx = &self.acs[other.index()];
            if ctx.state.armed {
                views.push(SiblingView {
                    backoff: ctx.state.backoff,
                    bd: ctx.params.deterministic_backoff(ctx.state.stage),
                    deterministic: ctx.state.deterministic,
                });
            }
        }
        views
    }

    /// Collect the ACs ready to transmit this slot: armed, counter
    /// expired, waiting requirement satisfied.
    pub fn collect_ready(&self, out: &mut Vec<Ac>) {
        out.clear();
        for ac in ALL_ACS {
            let s = &self.acs[ac.index()].state;
            if s.armed && s.backoff == 0 && s.aifs_wait == 0 {
                out.push(ac);
            }
        }
    }

    /// Resolve simultaneous backoff expiry inside the station: the highest
    /// priority AC wins the attempt, every loser takes its protocol's
    /// failure path. Returns the winner and the losers' dropped MPDUs.
    ///
    /// A deterministic-backoff QoS station using Smart Backoff never
    /// reaches this with more than one ready AC; the invariant is
    /// asserted and the loss still counted if it were ever violated.
    pub fn resolve_virtual_collision(&mut self, ready: &[Ac]) -> (Ac, u64) {
        debug_assert!(!ready.is_empty());
        let winner = ready.iter().copied().min().expect("non-empty ready set");
        let mut dropped = 0;
        if ready.len() > 1 {
            debug_assert!(
                !self.protocol.is_eca(),
                "virtual collision on a smart-backoff station (ready: {ready:?})"
            );
            for &loser in ready.iter().filter(|&&a| a != winner) {
                self.virtual_collisions += 1;
                dropped += self.fail_ac(loser);
            }
        }
        (winner, dropped)
    }

    /// Route one AC through its protocol's failure transition, dropping
    /// the head-of-line unit when the retry limit is exceeded. Returns
    /// the number of MPDUs dropped.
    pub fn fail_ac(&mut self, ac: Ac) -> u64 {
        // The unit being retried is whatever the queue head would have
        // aggregated at the attempt's stage; size it before the failure
        // transition mutates the stage.
        let unit_len = self.plan_unit(ac).map_or(0, |u| u.mpdus.len());
        let dropped = if self.protocol.is_eca() {
            let siblings = self.sibling_views(ac);
            let ctx = &mut self.acs[ac.index()];
            eca::on_failure(&mut ctx.state, &ctx.params, &siblings, &mut ctx.backoff_rng, &mut self.diag)
        } else {
            let ctx = &mut self.acs[ac.index()];
            edca::on_failure(&mut ctx.state, &ctx.params, &mut ctx.backoff_rng)
        };
        let mut removed = 0;
        if dropped {
            let ctx = &mut self.acs[ac.index()];
            for _ in 0..unit_len {
                if ctx.queue.dequeue().is_some() {
                    removed += 1;
                }
            }
            if ctx.queue.is_empty() {
                ctx.state.reset_on_empty_queue(&ctx.params);
            }
        }
        self.defuse_sibling_equality(ac);
        removed
    }

    /// Complete a successful exchange: remove delivered MPDUs, retain
    /// failed ones at the queue head in order, then either withdraw (queue
    /// drained) or run the protocol's success transition. Returns the
    /// delivered entries for metric accounting.
    pub fn complete_success(&mut self, ac: Ac, delivered_flags: &[bool]) -> Vec<QueuedMpdu> {
        let sr_enabled = self.sr_enabled(ac);
        let siblings = self.sibling_views(ac);
        let protocol = self.protocol;
        let eca_cfg = self.eca_cfg;
        let ctx = &mut self.acs[ac.index()];

        let mut delivered = Vec::new();
        let mut retained = Vec::new();
        for &flag in delivered_flags {
            let entry = ctx.queue.dequeue().expect("unit entries present");
            if flag {
                delivered.push(entry);
            } else {
                retained.push(entry);
            }
        }
        for entry in retained.into_iter().rev() {
            ctx.queue.push_front(entry);
        }

        if ctx.queue.is_empty() {
            ctx.state.reset_on_empty_queue(&ctx.params);
        } else if protocol.is_eca() {
            eca::on_success(&mut ctx.state, &ctx.params, &eca_cfg, sr_enabled, &siblings, &mut self.diag);
            self.defuse_sibling_equality(ac);
        } else {
            edca::on_success(&mut ctx.state, &ctx.params, &mut ctx.backoff_rng);
        }
        delivered
    }

    /// Arm any idle AC whose queue has become non-empty: a fresh backoff
    /// is drawn, random for EDCA and smart for the deterministic-backoff
    /// protocol.
    pub fn arm_idle_acs(&mut self) {
        for ac in ALL_ACS {
            let ctx = &self.acs[ac.index()];
            if !ctx.state.armed && !ctx.queue.is_empty() {
                self.arm_fresh(ac);
            }
        }
    }

    fn arm_fresh(&mut self, ac: Ac) {
        if self.protocol.is_eca() {
            let siblings = self.sibling_views(ac);
            let ctx = &mut self.acs[ac.index()];
            ctx.state.backoff =
                smart_backoff(&ctx.params, ctx.state.stage, &siblings, &mut ctx.backoff_rng, &mut self.diag);
        } else {
            let ctx = &mut self.acs[ac.index()];
            debug_assert_eq!(ctx.state.cw_curr, ctx.params.cw_min);
            ctx.state.backoff = draw_random_backoff(&ctx.params, ctx.state.stage, &mut ctx.backoff_rng);
        }
        let state = &mut self.acs[ac.index()].state;
        state.armed = true;
        state.deterministic = false;
    }

    /// Keep the station free of virtual collisions: deterministic re-arms
    /// are not drawn through the smart filter, so when one lands exactly
    /// on a sibling's counter the two would expire together a full cycle
    /// later. The lower-priority AC of the pair redraws instead.
    fn defuse_sibling_equality(&mut self, ac: Ac) {
        if !self.protocol.is_eca() || !self.acs[ac.index()].state.armed {
            return;
        }
        let v = self.acs[ac.index()].state.backoff;
        let Some(other) = ALL_ACS.iter().copied().find(|&o| {
            o != ac && self.acs[o.index()].state.armed && self.acs[o.index()].state.backoff == v
        }) else {
            return;
        };
        let redraw = if ac.outranks(other) { other } else { ac };
        self.diag.reset_defuses += 1;
        let siblings = self.sibling_views(redraw);
        let ctx = &mut self.acs[redraw.index()];
        ctx.state.deterministic = false;
        ctx.state.sr_bitmap.clear();
        ctx.state.sr_successes = 0;
        ctx.state.pending_stage = None;
        ctx.state.backoff =
            smart_backoff(&ctx.params, ctx.state.stage, &siblings, &mut ctx.backoff_rng, &mut self.diag);
    }

    /// Assemble the transmission unit `ac` would send right now, without
    /// dequeuing anything. Returns None on an empty queue.
    pub fn plan_unit(&self, ac: Ac) -> Option<TransmissionUnit> {
        let ctx = &self.acs[ac.index()];
        if ctx.queue.is_empty() {
            return None;
        }
        let policy = self.aggregation_policy(ac);
        let mpdus: Vec<u32> = match policy {
            AggregationPolicy::SingleMsdu => vec![ctx.queue.peek(0).unwrap().payload_bytes],
            AggregationPolicy::FairShare => {
                let n = (fair_share_count(ctx.state.stage) as usize).min(ctx.queue.len());
                (0..n).map(|i| ctx.queue.peek(i).unwrap().payload_bytes).collect()
            }
            AggregationPolicy::Txop => {
                // Greedy packing under the TXOP airtime limit; the head
                // MPDU always goes out even if it alone overruns.
                let limit = ctx.params.txop_limit_us;
                let mut chosen: Vec<u32> = vec![ctx.queue.peek(0).unwrap().payload_bytes];
                while let Some(next) = ctx.queue.peek(chosen.len()) {
                    chosen.push(next.payload_bytes);
                    if self.phy.txop_exchange_us(&chosen) > limit {
                        chosen.pop();
                        break;
                    }
                }
                chosen
            }
        };
        let kind = match (policy, mpdus.len()) {
            (AggregationPolicy::FairShare, n) if n > 1 => UnitKind::Ampdu,
            (AggregationPolicy::Txop, n) if n > 1 => UnitKind::TxopBurst,
            _ => UnitKind::SingleMsdu,
        };
        let mut unit = TransmissionUnit {
            kind,
            mpdus,
            exchange_us: 0,
            origin: (self.id, ac),
        };
        unit.exchange_us = self.phy.unit_exchange_us(&unit);
        Some(unit)
    }
}
