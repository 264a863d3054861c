//! Line-oriented `key = value` scenario files with `[section]` headers
//! for PHY, traffic-source, and per-AC overrides.
//!
//! The grammar is documented in the repository README. Every parse error
//! carries the offending line number.

use thiserror::Error;

use crate::mac::params::Ac;
use crate::phy::AccessMode;
use crate::scenario::{AcParamsOverride, ProtocolMix, Scenario, TrafficProfile};
use crate::mac::schedule_reset::{SrGamma, SrMode};
use crate::station::ProtocolId;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError { line, message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Global,
    Phy,
    Voice,
    Video,
    AcOverride(Ac),
}

/// Parse a scenario file into a fully validated `Scenario`, with the
/// standard presets applied to every unspecified field.
pub fn parse_scenario(text: &str) -> Result<Scenario, ParseError> {
    let mut scenario = Scenario::baseline(0, ProtocolId::Edca);
    scenario.replications = 20;
    let mut stations_seen = false;
    let mut section = Section::Global;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| ParseError::new(line_no, "unterminated section header"))?
                .trim();
            section = match name {
                "phy" => Section::Phy,
                "voice" => Section::Voice,
                "video" => Section::Video,
                "vo" => Section::AcOverride(Ac::Vo),
                "vi" => Section::AcOverride(Ac::Vi),
                "be" => Section::AcOverride(Ac::Be),
                "bk" => Section::AcOverride(Ac::Bk),
                other => return Err(ParseError::new(line_no, format!("unknown section [{other}]"))),
            };
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ParseError::new(line_no, "expected `key = value`"))?;
        let key = key.trim();
        let value = value.trim();
        if value.is_empty() {
            return Err(ParseError::new(line_no, format!("missing value for `{key}`")));
        }
        match section {
            Section::Global => {
                apply_global(&mut scenario, &mut stations_seen, key, value, line_no)?
            }
            Section::Phy => apply_phy(&mut scenario, key, value, line_no)?,
            Section::Voice => apply_voice(&mut scenario, key, value, line_no)?,
            Section::Video => apply_video(&mut scenario, key, value, line_no)?,
            Section::AcOverride(ac) => apply_ac(&mut scenario, ac, key, value, line_no)?,
        }
    }

    if !stations_seen {
        return Err(ParseError::new(0, "missing required key `stations`"));
    }
    scenario
        .validate()
        .map_err(|m| ParseError::new(0, m))?;
    Ok(scenario)
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_num<T: std::str::FromStr>(value: &str, key: &str, line: usize) -> Result<T, ParseError> {
    value
        .parse::<T>()
        .map_err(|_| ParseError::new(line, format!("invalid value `{value}` for `{key}`")))
}

fn apply_global(
    s: &mut Scenario,
    stations_seen: &mut bool,
    key: &str,
    value: &str,
    line: usize,
) -> Result<(), ParseError> {
    match key {
        "stations" => {
            s.n_stations = parse_num(value, key, line)?;
            *stations_seen = true;
        }
        "protocol" => {
            s.protocol_mix = match value {
                "edca" => ProtocolMix::Uniform(ProtocolId::Edca),
                "eca-fs" => ProtocolMix::Uniform(ProtocolId::EcaQosFairShare),
                "eca-txop" => ProtocolMix::Uniform(ProtocolId::EcaQosTxop),
                "mixed" | "mixed-fs" => {
                    ProtocolMix::Alternating(ProtocolId::Edca, ProtocolId::EcaQosFairShare)
                }
                "mixed-txop" => {
                    ProtocolMix::Alternating(ProtocolId::Edca, ProtocolId::EcaQosTxop)
                }
                other => {
                    return Err(ParseError::new(line, format!("unknown protocol `{other}`")))
                }
            };
        }
        "traffic" => {
            s.traffic = match value {
                "saturated" => TrafficProfile::Saturated,
                "non-saturated" => TrafficProfile::NonSaturated,
                other => return Err(ParseError::new(line, format!("unknown traffic `{other}`"))),
            };
        }
        "access" => {
            s.access = match value {
                "basic" => AccessMode::BasicAccess,
                "rts-cts" | "rtscts" => AccessMode::RtsCts,
                other => return Err(ParseError::new(line, format!("unknown access `{other}`"))),
            };
        }
        "p_e" => {
            s.p_e = parse_num(value, key, line)?;
            if !(0.0..=1.0).contains(&s.p_e) {
                return Err(ParseError::new(line, format!("p_e out of [0,1]: {}", s.p_e)));
            }
        }
        "duration_s" => s.duration_s = parse_num(value, key, line)?,
        "replications" => s.replications = parse_num(value, key, line)?,
        "seed" => s.seed = parse_num(value, key, line)?,
        "sr_gamma" => {
            s.sr_gamma = match value {
                "aggressive" => SrGamma::Aggressive,
                "conservative" => SrGamma::Conservative,
                other => return Err(ParseError::new(line, format!("unknown sr_gamma `{other}`"))),
            };
        }
        "sr_mode" => {
            s.sr_mode = match value {
                "half" => SrMode::Half,
                "smaller" => SrMode::Smaller,
                "off" => SrMode::Off,
                other => return Err(ParseError::new(line, format!("unknown sr_mode `{other}`"))),
            };
        }
        "stickiness" => s.stickiness_base = parse_num(value, key, line)?,
        "stickiness_cap" => s.stickiness_cap = parse_num(value, key, line)?,
        "payload_bytes" => s.saturated_payload_bytes = parse_num(value, key, line)?,
        "queue_capacity" => s.queue_capacity = parse_num(value, key, line)?,
        "aifs_surplus" => {
            s.aifs_surplus = match value {
                "on" => true,
                "off" => false,
                other => {
                    return Err(ParseError::new(line, format!("unknown aifs_surplus `{other}`")))
                }
            };
        }
        other => return Err(ParseError::new(line, format!("unknown key `{other}`"))),
    }
    Ok(())
}

fn apply_phy(s: &mut Scenario, key: &str, value: &str, line: usize) -> Result<(), ParseError> {
    let phy = &mut s.phy;
    match key {
        "phy_rate_mbps" => phy.phy_rate_bps = parse_num::<u64>(value, key, line)? * 1_000_000,
        "control_rate_mbps" => {
            phy.control_rate_bps = parse_num::<u64>(value, key, line)? * 1_000_000
        }
        "channel_width_mhz" => phy.channel_width_mhz = parse_num(value, key, line)?,
        "streams" => phy.streams = parse_num(value, key, line)?,
        "empty_slot_us" => phy.empty_slot_us = parse_num(value, key, line)?,
        "difs_us" => phy.difs_us = parse_num(value, key, line)?,
        "sifs_us" => phy.sifs_us = parse_num(value, key, line)?,
        "preamble_us" => phy.preamble_us = parse_num(value, key, line)?,
        "rts_bytes" => phy.rts_bytes = parse_num(value, key, line)?,
        "cts_bytes" => phy.cts_bytes = parse_num(value, key, line)?,
        "ack_bytes" => phy.ack_bytes = parse_num(value, key, line)?,
        "block_ack_bytes" => phy.block_ack_bytes = parse_num(value, key, line)?,
        "mac_header_bytes" => phy.mac_header_bytes = parse_num(value, key, line)?,
        other => return Err(ParseError::new(line, format!("unknown [phy] key `{other}`"))),
    }
    Ok(())
}

fn apply_voice(s: &mut Scenario, key: &str, value: &str, line: usize) -> Result<(), ParseError> {
    let v = &mut s.voice;
    match key {
        "on_duration_s" => v.on_duration_mean_s = parse_num(value, key, line)?,
        "off_duration_s" => v.off_duration_mean_s = parse_num(value, key, line)?,
        "rate_kbps" => v.rate_bps = parse_num::<f64>(value, key, line)? * 1_000.0,
        "payload_bytes" => v.payload_bytes = parse_num(value, key, line)?,
        other => return Err(ParseError::new(line, format!("unknown [voice] key `{other}`"))),
    }
    Ok(())
}

fn apply_video(s: &mut Scenario, key: &str, value: &str, line: usize) -> Result<(), ParseError> {
    let v = &mut s.video;
    match key {
        "mean_i_bytes" => v.mean_i_bytes = parse_num(value, key, line)?,
        "mean_p_bytes" => v.mean_p_bytes = parse_num(value, key, line)?,
        "mean_b_bytes" => v.mean_b_bytes = parse_num(value, key, line)?,
        "stddev_factor" => v.size_stddev_factor = parse_num(value, key, line)?,
        "rate_kbps" => v.avg_rate_bps = parse_num::<f64>(value, key, line)? * 1_000.0,
        other => return Err(ParseError::new(line, format!("unknown [video] key `{other}`"))),
    }
    Ok(())
}

fn apply_ac(s: &mut Scenario, ac: Ac, key: &str, value: &str, line: usize) -> Result<(), ParseError> {
    let ov = s.ac_overrides[ac.index()].get_or_insert_with(AcParamsOverride::default);
    match key {
        "cw_min" => ov.cw_min = Some(parse_num(value, key, line)?),
        "cw_max" => ov.cw_max = Some(parse_num(value, key, line)?),
        "max_stage" => ov.max_stage = Some(parse_num(value, key, line)?),
        "aifsn" => ov.aifsn = Some(parse_num(value, key, line)?),
        "txop_limit_us" => ov.txop_limit_us = Some(parse_num(value, key, line)?),
        other => {
            return Err(ParseError::new(
                line,
                format!("unknown [{}] key `{other}`", ac.label()),
            ))
        }
    }
    Ok(())
}
