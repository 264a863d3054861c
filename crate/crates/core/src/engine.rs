//! The slotted simulation loop: collects transmission attempts, classifies
//! each channel slot, applies durations, and dispatches outcomes back to
//! the protocol state machines.

use thiserror::Error;

use crate::mac::params::{Ac, ALL_ACS};
use crate::mac::schedule_reset::observe;
use crate::mac::state::AcState;
use crate::mac::{aifs_surplus_slots, params::AcParams};
use crate::metrics::{AcMetrics, RunResult, SlotCensus, StationMetrics};
use crate::phy::{
    apply_channel_errors, collision_slot_us, success_slot_us, AccessMode, ErrorModel, PhyParams,
};
use crate::rng::{substream, StreamRole};
use crate::scenario::{Scenario, TrafficProfile};
use crate::station::{AcContext, MacQueue, Station, TransmissionUnit};
use crate::traffic::{SaturatedSource, TrafficSource, VideoSource, VoiceSource};

/// Virtual clock of one run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimClock {
    /// Virtual time in µs; the sum of all classified slot durations.
    pub now_us: u64,
    /// Count of elapsed channel slots.
    pub slot_index: u64,
}

/// Classification of one channel slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotKind {
    Empty,
    Success,
    /// A failed slot: two or more simultaneous transmissions, or a lone
    /// transmission lost to channel errors.
    Collision,
}

/// Outcome of one channel slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotOutcome {
    pub kind: SlotKind,
    /// Winning (station, AC) when the slot carried an acknowledged
    /// transmission.
    pub winner: Option<(u32, Ac)>,
    /// MPDUs delivered by the winner.
    pub transmitted_mpdus: Option<u32>,
    /// Every (station, AC) that put a transmission on the air this slot.
    pub participants: Vec<(u32, Ac)>,
    /// Slot duration, µs.
    pub duration_us: u64,
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("replication index {index} out of range (replications = {total})")]
    ReplicationOutOfRange { index: u32, total: u32 },
}

/// One in-flight replication.
pub struct Simulation {
    clock: SimClock,
    stations: Vec<Station>,
    phy: PhyParams,
    access: AccessMode,
    error_model: ErrorModel,
    duration_us: u64,
    census: SlotCensus,
    ac_metrics: Vec<[AcMetrics; 4]>,
    last_success_us: Vec<[Option<u64>; 4]>,
    last_failure_us: Option<u64>,
    last_collision_us: Option<u64>,
    max_collision_free_gap_us: u64,
    prev_collision_end_us: u64,
    fingerprint: String,
    seed: u64,
    replication: u32,
    aifs_surplus_enabled: bool,
    // Per-slot scratch, reused to keep the loop allocation-free.
    ready_buf: Vec<Ac>,
    attempts: Vec<(usize, Ac, TransmissionUnit)>,
    acted: Vec<[bool; 4]>,
}

impl Simulation {
    pub fn new(scenario: &Scenario, replication: u32) -> Result<Simulation, SimError> {
        scenario.validate().map_err(SimError::InvalidScenario)?;
        if replication >= scenario.replications {
            return Err(SimError::ReplicationOutOfRange {
                index: replication,
                total: scenario.replications,
            });
        }

        let seed = scenario.seed;
        let stations: Vec<Station> = (0..scenario.n_stations)
            .map(|id| build_station(scenario, replication, id))
            .collect();
        let n = stations.len();

        Ok(Simulation {
            clock: SimClock::default(),
            stations,
            phy: scenario.phy.clone(),
            access: scenario.access,
            error_model: ErrorModel::new(scenario.p_e),
            duration_us: scenario.duration_us(),
            census: SlotCensus::default(),
            ac_metrics: vec![[AcMetrics::default(); 4]; n],
            last_success_us: vec![[None; 4]; n],
            last_failure_us: None,
            last_collision_us: None,
            max_collision_free_gap_us: 0,
            prev_collision_end_us: 0,
            fingerprint: scenario.fingerprint(),
            seed,
            replication,
            aifs_surplus_enabled: scenario.aifs_surplus,
            ready_buf: Vec::with_capacity(4),
            attempts: Vec::with_capacity(n),
            acted: vec![[false; 4]; n],
        })
    }

    pub fn clock(&self) -> SimClock {
        self.clock
    }

    pub fn done(&self) -> bool {
        self.clock.now_us >= self.duration_us
    }

    pub fn stations(&self) -> &[Station] {
        &self.stations
    }

    /// Advance the world by exactly one channel slot.
    pub fn step(&mut self) -> SlotOutcome {
        let now = self.clock.now_us;

        // 1. Arrivals due by the start of this slot; idle ACs with fresh
        //    traffic draw an initial backoff and join contention.
        for st in &mut self.stations {
            for ac in ALL_ACS {
                let ctx = &mut st.acs[ac.index()];
                ctx.source.pump(now, &mut ctx.queue);
            }
            st.arm_idle_acs();
        }

        // 2. Collect at most one attempt per station: the highest-priority
        //    ready AC transmits, any other ready ACs are virtual-collision
        //    losers (processed after the countdown so their redraws see
        //    end-of-slot sibling counters).
        self.attempts.clear();
        let mut vc_losers: Vec<(usize, Ac)> = Vec::new();
        for flags in self.acted.iter_mut() {
            *flags = [false; 4];
        }
        for si in 0..self.stations.len() {
            let mut ready = std::mem::take(&mut self.ready_buf);
            self.stations[si].collect_ready(&mut ready);
            if !ready.is_empty() {
                let winner = *ready.iter().min().unwrap();
                for &ac in &ready {
                    self.acted[si][ac.index()] = true;
                }
                if ready.len() > 1 {
                    debug_assert!(
                        !self.stations[si].protocol.is_eca(),
                        "virtual collision on a smart-backoff station (ready: {ready:?})"
                    );
                    for &loser in ready.iter().filter(|&&a| a != winner) {
                        vc_losers.push((si, loser));
                    }
                }
                let unit = self.stations[si]
                    .plan_unit(winner)
                    .expect("armed AC has a backlogged queue");
                self.attempts.push((si, winner, unit));
            }
            ready.clear();
            self.ready_buf = ready;
        }
        let busy = !self.attempts.is_empty();

        // 3. Countdown, AIFS bookkeeping, and schedule observation for
        //    every armed AC that is not acting this slot. Running this
        //    before the outcome transitions means every backoff set below
        //    is compared against the counters its siblings hold at the
        //    end of the slot.
        for (si, st) in self.stations.iter_mut().enumerate() {
            for ac in ALL_ACS {
                let ctx = &mut st.acs[ac.index()];
                if !ctx.state.armed || self.acted[si][ac.index()] {
                    continue;
                }
                countdown(&mut ctx.state, &ctx.params, busy);
            }
        }

        // 4. Virtual-collision losers take their failure path.
        for &(si, loser) in &vc_losers {
            self.stations[si].virtual_collisions += 1;
            let dropped = self.stations[si].fail_ac(loser);
            let m = &mut self.ac_metrics[si][loser.index()];
            m.attempts += 1;
            m.failures += 1;
            m.virtual_collisions += 1;
            m.retry_drops += dropped;
        }

        // 5. Classify the slot and apply the channel outcome.
        let outcome = match self.attempts.len() {
            0 => {
                self.census.empty += 1;
                SlotOutcome {
                    kind: SlotKind::Empty,
                    winner: None,
                    transmitted_mpdus: None,
                    participants: Vec::new(),
                    duration_us: self.phy.empty_slot_us,
                }
            }
            1 => self.apply_single_attempt(),
            _ => self.apply_collision(),
        };
        if !vc_losers.is_empty() {
            self.last_failure_us = Some(now + outcome.duration_us);
        }

        // 6. After any busy slot the AIFS idle requirement re-arms.
        if busy && self.aifs_surplus_enabled {
            for st in self.stations.iter_mut() {
                for ac in ALL_ACS {
                    let ctx = &mut st.acs[ac.index()];
                    if ctx.state.armed {
                        ctx.state.aifs_wait = aifs_surplus_slots(&ctx.params);
                    }
                }
            }
        }

        // 7. Advance the clock and the slot ledger.
        self.clock.now_us += outcome.duration_us;
        self.clock.slot_index += 1;
        debug_assert_eq!(self.census.total(), self.clock.slot_index);
        outcome
    }

    fn apply_single_attempt(&mut self) -> SlotOutcome {
        let (si, ac, unit) = self.attempts.pop().expect("one attempt");
        let verdict = {
            let ctx = &mut self.stations[si].acs[ac.index()];
            apply_channel_errors(&unit, self.error_model, &mut ctx.channel_rng)
        };
        let duration = success_slot_us(&self.phy, self.access, &unit);
        let end = self.clock.now_us + duration;
        let station_id = self.stations[si].id;

        if verdict.success {
            let delivered = self.stations[si].complete_success(ac, &verdict.delivered);
            let m = &mut self.ac_metrics[si][ac.index()];
            m.attempts += 1;
            m.successes += 1;
            m.delivered_mpdus += delivered.len() as u64;
            for e in &delivered {
                m.delivered_bytes += u64::from(e.payload_bytes);
                m.delay_sum_us += end - e.enqueued_us;
                m.delay_count += 1;
            }
            if let Some(prev) = self.last_success_us[si][ac.index()] {
                m.gap_sum_us += end - prev;
                m.gap_count += 1;
            }
            self.last_success_us[si][ac.index()] = Some(end);
            self.census.success += 1;
            SlotOutcome {
                kind: SlotKind::Success,
                winner: Some((station_id, ac)),
                transmitted_mpdus: Some(delivered.len() as u32),
                participants: vec![(station_id, ac)],
                duration_us: duration,
            }
        } else {
            // Lone transmission lost to channel errors: the slot carried
            // a full exchange attempt but no acknowledgement came back.
            let dropped = self.stations[si].fail_ac(ac);
            let m = &mut self.ac_metrics[si][ac.index()];
            m.attempts += 1;
            m.failures += 1;
            m.error_failures += 1;
            m.retry_drops += dropped;
            self.census.collision += 1;
            self.last_failure_us = Some(end);
            SlotOutcome {
                kind: SlotKind::Collision,
                winner: None,
                transmitted_mpdus: None,
                participants: vec![(station_id, ac)],
                duration_us: duration,
            }
        }
    }

    fn apply_collision(&mut self) -> SlotOutcome {
        let attempts = std::mem::take(&mut self.attempts);
        let longest = attempts.iter().map(|(_, _, u)| u.exchange_us).max().unwrap();
        let duration = collision_slot_us(&self.phy, self.access, longest);
        let end = self.clock.now_us + duration;

        let mut participants = Vec::with_capacity(attempts.len());
        for (si, ac, _unit) in &attempts {
            participants.push((self.stations[*si].id, *ac));
            let dropped = self.stations[*si].fail_ac(*ac);
            let m = &mut self.ac_metrics[*si][ac.index()];
            m.attempts += 1;
            m.failures += 1;
            m.collision_failures += 1;
            m.retry_drops += dropped;
        }
        self.census.collision += 1;
        self.last_failure_us = Some(end);
        self.last_collision_us = Some(end);
        let gap = end - self.prev_collision_end_us;
        self.max_collision_free_gap_us = self.max_collision_free_gap_us.max(gap);
        self.prev_collision_end_us = end;

        self.attempts = attempts;
        SlotOutcome {
            kind: SlotKind::Collision,
            winner: None,
            transmitted_mpdus: None,
            participants,
            duration_us: duration,
        }
    }

    /// Assemble the run record once the duration has elapsed.
    pub fn finish(mut self) -> RunResult {
        let tail_gap = self.clock.now_us - self.prev_collision_end_us;
        self.max_collision_free_gap_us = self.max_collision_free_gap_us.max(tail_gap);

        let mut diag = crate::mac::state::DiagCounters::default();
        let stations: Vec<StationMetrics> = self
            .stations
            .iter()
            .enumerate()
            .map(|(si, st)| {
                diag.merge(&st.diag);
                let mut acs = self.ac_metrics[si];
                for ac in ALL_ACS {
                    acs[ac.index()].queue_drops = st.acs[ac.index()].queue.dropped_arrivals();
                }
                StationMetrics { protocol: st.protocol, acs }
            })
            .collect();

        RunResult {
            fingerprint: self.fingerprint,
            seed: self.seed,
            replication: self.replication,
            n_stations: stations.len() as u32,
            duration_us: self.clock.now_us,
            census: self.census,
            stations,
            last_failure_us: self.last_failure_us,
            last_collision_us: self.last_collision_us,
            max_collision_free_gap_us: self.max_collision_free_gap_us,
            diag,
        }
    }
}

/// Per-slot countdown of one armed AC that did not transmit.
///
/// Every slot advances the schedule position, so counters decrement on
/// busy slots as well. An AC owing extra AIFS slots after a busy period
/// stays frozen (no countdown, no firing) until the debt is paid.
fn countdown(state: &mut AcState, params: &AcParams, busy: bool) {
    if state.aifs_wait > 0 {
        state.aifs_wait -= 1;
        return;
    }
    if state.backoff > 0 {
        state.backoff -= 1;
        if state.deterministic && !state.sr_bitmap.is_empty() {
            let bd = params.deterministic_backoff(state.stage);
            observe(&mut state.sr_bitmap, bd, state.backoff, busy);
        }
    }
}

fn build_station(scenario: &Scenario, replication: u32, id: u32) -> Station {
    let protocol = scenario.protocol_mix.protocol_for(id);
    let acs = ALL_ACS.map(|ac| {
        let params = scenario.ac_params(protocol, ac);
        let state = AcState::new(&params);
        let traffic_rng = substream(scenario.seed, replication, id, ac as u8, StreamRole::Traffic);
        let source = match (scenario.traffic, ac) {
            (TrafficProfile::Saturated, _) | (TrafficProfile::NonSaturated, Ac::Be | Ac::Bk) => {
                TrafficSource::Saturated(SaturatedSource {
                    payload_bytes: scenario.saturated_payload_bytes,
                })
            }
            (TrafficProfile::NonSaturated, Ac::Vo) => {
                TrafficSource::Voice(VoiceSource::new(scenario.voice.clone(), traffic_rng))
            }
            (TrafficProfile::NonSaturated, Ac::Vi) => TrafficSource::Video(VideoSource::new(
                scenario.video.clone(),
                scenario.saturated_payload_bytes,
                traffic_rng,
            )),
        };
        AcContext {
            params,
            state,
            queue: MacQueue::new(scenario.queue_capacity),
            source,
            backoff_rng: substream(scenario.seed, replication, id, ac as u8, StreamRole::Backoff),
            channel_rng: substream(scenario.seed, replication, id, ac as u8, StreamRole::Channel),
        }
    });
    Station {
        id,
        protocol,
        acs,
        eca_cfg: scenario.eca_config(),
        phy: scenario.phy.clone(),
        access: scenario.access,
        diag: Default::default(),
        virtual_collisions: 0,
    }
}

/// Run one replication of a scenario to completion.
pub fn run_simulation(scenario: &Scenario, replication: u32) -> Result<RunResult, SimError> {
    let mut sim = Simulation::new(scenario, replication)?;
    while !sim.done() {
        sim.step();
    }
    Ok(sim.finish())
}
