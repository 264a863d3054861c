//! Scenario description: everything a run needs, resolved to concrete
//! parameters with the standard presets filled in.

use serde::{Deserialize, Serialize};

use crate::mac::eca::EcaConfig;
use crate::mac::params::{eca_qos_defaults, edca_defaults, Ac, AcParams, ALL_ACS};
use crate::mac::schedule_reset::{SrGamma, SrMode};
use crate::phy::{AccessMode, PhyParams};
use crate::station::ProtocolId;
use crate::traffic::{VideoSourceParams, VoiceSourceParams};

/// How station ids map to protocol identities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProtocolMix {
    Uniform(ProtocolId),
    /// Even ids take the first protocol, odd ids the second (50/50 mix).
    Alternating(ProtocolId, ProtocolId),
}

impl ProtocolMix {
    pub fn protocol_for(&self, station_id: u32) -> ProtocolId {
        match *self {
            ProtocolMix::Uniform(p) => p,
            ProtocolMix::Alternating(a, b) => {
                if station_id % 2 == 0 {
                    a
                } else {
                    b
                }
            }
        }
    }

    pub fn label(&self) -> String {
        match *self {
            ProtocolMix::Uniform(p) => p.label().to_string(),
            ProtocolMix::Alternating(a, b) => format!("{}+{}", a.label(), b.label()),
        }
    }
}

/// Traffic condition of the whole network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrafficProfile {
    /// Every AC's queue is kept full for the whole run.
    Saturated,
    /// Voice on VO and video on VI; BE and BK stay saturated.
    NonSaturated,
}

/// A fully resolved simulation scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub n_stations: u32,
    pub protocol_mix: ProtocolMix,
    pub traffic: TrafficProfile,
    pub access: AccessMode,
    pub p_e: f64,
    pub duration_s: f64,
    pub replications: u32,
    pub seed: u64,
    pub sr_gamma: SrGamma,
    pub sr_mode: SrMode,
    pub stickiness_base: u8,
    pub stickiness_cap: u8,
    pub phy: PhyParams,
    pub voice: VoiceSourceParams,
    pub video: VideoSourceParams,
    /// Payload of saturated sources, bytes.
    pub saturated_payload_bytes: u32,
    /// MAC queue depth, packets.
    pub queue_capacity: usize,
    /// Model the AIFSN surplus over DIFS as extra idle slots owed after
    /// every busy period. The slotted contention model keeps counting
    /// through busy slots, so the surplus makes the affected ACs release
    /// their expiries together on the first idle slot; with it off,
    /// differentiation comes from the contention windows and TXOP alone.
    pub aifs_surplus: bool,
    /// Per-AC parameter overrides applied on top of each protocol's
    /// preset (EDCA stations keep their own AIFSN/window presets unless
    /// overridden here).
    pub ac_overrides: [Option<AcParamsOverride>; 4],
}

/// Partial per-AC override from a scenario file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcParamsOverride {
    pub cw_min: Option<u32>,
    pub cw_max: Option<u32>,
    pub max_stage: Option<u8>,
    pub aifsn: Option<u8>,
    pub txop_limit_us: Option<u64>,
}

impl AcParamsOverride {
    pub fn apply(&self, base: &mut AcParams) {
        if let Some(v) = self.cw_min {
            base.cw_min = v;
        }
        if let Some(v) = self.cw_max {
            base.cw_max = v;
        }
        if let Some(v) = self.max_stage {
            base.max_stage = v;
        }
        if let Some(v) = self.aifsn {
            base.aifsn = v;
        }
        if let Some(v) = self.txop_limit_us {
            base.txop_limit_us = v;
        }
    }
}

impl Scenario {
    /// A saturated baseline with presets everywhere; tests and the sweep
    /// command start from this.
    pub fn baseline(n_stations: u32, protocol: ProtocolId) -> Scenario {
        Scenario {
            n_stations,
            protocol_mix: ProtocolMix::Uniform(protocol),
            traffic: TrafficProfile::Saturated,
            access: AccessMode::RtsCts,
            p_e: 0.0,
            duration_s: 40.0,
            replications: 1,
            seed: 1,
            sr_gamma: SrGamma::Aggressive,
            sr_mode: SrMode::Half,
            stickiness_base: 1,
            stickiness_cap: 2,
            phy: PhyParams::default(),
            voice: VoiceSourceParams::default(),
            video: VideoSourceParams::default(),
            saturated_payload_bytes: 1470,
            queue_capacity: crate::station::MAC_QUEUE_CAPACITY,
            aifs_surplus: true,
            ac_overrides: [None; 4],
        }
    }

    /// Resolved contention parameters for one AC of one protocol family.
    pub fn ac_params(&self, protocol: ProtocolId, ac: Ac) -> AcParams {
        let mut params = match protocol {
            ProtocolId::Edca => edca_defaults(ac),
            ProtocolId::EcaQosFairShare | ProtocolId::EcaQosTxop => eca_qos_defaults(ac),
        };
        if let Some(ov) = &self.ac_overrides[ac.index()] {
            ov.apply(&mut params);
        }
        params
    }

    pub fn eca_config(&self) -> EcaConfig {
        EcaConfig {
            sr_gamma: self.sr_gamma,
            sr_mode: self.sr_mode,
            stickiness_base: self.stickiness_base,
            stickiness_cap: self.stickiness_cap,
        }
    }

    pub fn duration_us(&self) -> u64 {
        (self.duration_s * 1e6).round() as u64
    }

    /// Validate the invariants every run relies on.
    pub fn validate(&self) -> Result<(), String> {
        if self.n_stations == 0 {
            return Err("scenario must have at least one station".into());
        }
        if !(0.0..=1.0).contains(&self.p_e) {
            return Err(format!("p_e must lie in [0,1], got {}", self.p_e));
        }
        if self.duration_s <= 0.0 {
            return Err(format!("duration must be positive, got {}", self.duration_s));
        }
        if self.replications == 0 {
            return Err("replications must be at least 1".into());
        }
        if self.queue_capacity == 0 {
            return Err("queue capacity must be at least 1".into());
        }
        for ac in ALL_ACS {
            for proto in [ProtocolId::Edca, ProtocolId::EcaQosFairShare] {
                let p = self.ac_params(proto, ac);
                if p.cw_min == 0 || p.cw_max < p.cw_min {
                    return Err(format!("invalid contention window for {}: {:?}", ac.label(), p));
                }
                if p.aifsn == 0 {
                    return Err(format!("AIFSN must be at least 1 for {}", ac.label()));
                }
                if p.max_stage > 20 || p.cw_min.checked_shl(u32::from(p.max_stage)).is_none() {
                    return Err(format!(
                        "contention window ladder overflows for {}: cw_min {} at max stage {}",
                        ac.label(),
                        p.cw_min,
                        p.max_stage
                    ));
                }
            }
        }
        Ok(())
    }

    /// Short deterministic identifier recorded in every emitted row.
    pub fn fingerprint(&self) -> String {
        let traffic = match self.traffic {
            TrafficProfile::Saturated => "sat",
            TrafficProfile::NonSaturated => "nonsat",
        };
        let access = match self.access {
            AccessMode::BasicAccess => "ba",
            AccessMode::RtsCts => "rtscts",
        };
        let sr = match self.sr_mode {
            SrMode::Half => "half",
            SrMode::Smaller => "smaller",
            SrMode::Off => "off",
        };
        let gamma = match self.sr_gamma {
            SrGamma::Aggressive => "aggr",
            SrGamma::Conservative => "cons",
        };
        format!(
            "n{}-{}-{}-{}-pe{}-d{}s-sr_{}_{}-stick{}_{}",
            self.n_stations,
            self.protocol_mix.label(),
            traffic,
            access,
            self.p_e,
            self.duration_s,
            gamma,
            sr,
            self.stickiness_base,
            self.stickiness_cap,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_validates() {
        assert!(Scenario::baseline(10, ProtocolId::EcaQosFairShare).validate().is_ok());
    }

    #[test]
    fn zero_stations_rejected() {
        let s = Scenario::baseline(0, ProtocolId::Edca);
        assert!(s.validate().is_err());
    }

    #[test]
    fn out_of_range_pe_rejected() {
        let mut s = Scenario::baseline(2, ProtocolId::Edca);
        s.p_e = 1.5;
        assert!(s.validate().is_err());
    }

    #[test]
    fn alternating_mix_splits_evenly() {
        let mix = ProtocolMix::Alternating(ProtocolId::Edca, ProtocolId::EcaQosFairShare);
        let edca = (0..10).filter(|&i| mix.protocol_for(i) == ProtocolId::Edca).count();
        assert_eq!(edca, 5);
    }

    #[test]
    fn overrides_apply_on_top_of_presets() {
        let mut s = Scenario::baseline(2, ProtocolId::Edca);
        s.ac_overrides[Ac::Vo.index()] = Some(AcParamsOverride {
            cw_min: Some(4),
            ..Default::default()
        });
        let p = s.ac_params(ProtocolId::Edca, Ac::Vo);
        assert_eq!(p.cw_min, 4);
        assert_eq!(p.cw_max, 16);
    }

    #[test]
    fn fingerprint_is_stable_and_discriminating() {
        let a = Scenario::baseline(10, ProtocolId::Edca);
        let b = Scenario::baseline(12, ProtocolId::Edca);
        assert_eq!(a.fingerprint(), a.fingerprint());
        assert_ne!(a.fingerprint(), b.fingerprint());
    }
}
