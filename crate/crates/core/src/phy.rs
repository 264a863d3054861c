//! PHY timing constants, airtime arithmetic, slot durations, and the
//! per-MPDU channel error model.
//!
//! All durations are integer microseconds. Transmission times round up to
//! the OFDM symbol granularity, so every slot duration is exact and the
//! virtual clock never accumulates floating-point error.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::station::{TransmissionUnit, UnitKind};

/// OFDM symbol granularity in microseconds.
pub const SYMBOL_US: u64 = 4;

/// PHY and control-plane timing parameters.
///
/// Defaults model a 20 MHz, single-stream 65 Mbps configuration. Control
/// frames ride a robust low base rate with their own preamble per PPDU.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhyParams {
    /// Data rate in bits per second.
    pub phy_rate_bps: u64,
    /// Channel width in MHz (informational; airtime derives from rate).
    pub channel_width_mhz: u32,
    /// Number of spatial streams (informational).
    pub streams: u32,
    /// Empty (idle) slot duration in µs.
    pub empty_slot_us: u64,
    /// DIFS in µs.
    pub difs_us: u64,
    /// SIFS in µs.
    pub sifs_us: u64,
    /// Rate used for RTS/CTS/ACK/Block ACK frames, bits per second.
    pub control_rate_bps: u64,
    /// PLCP preamble + header overhead per PPDU, µs.
    pub preamble_us: u64,
    /// RTS frame size in bytes.
    pub rts_bytes: u32,
    /// CTS frame size in bytes.
    pub cts_bytes: u32,
    /// ACK frame size in bytes.
    pub ack_bytes: u32,
    /// Compressed Block ACK frame size in bytes.
    pub block_ack_bytes: u32,
    /// MAC header overhead per MPDU in bytes.
    pub mac_header_bytes: u32,
}

impl Default for PhyParams {
    fn default() -> Self {
        PhyParams {
            phy_rate_bps: 65_000_000,
            channel_width_mhz: 20,
            streams: 1,
            empty_slot_us: 9,
            difs_us: 34,
            sifs_us: 16,
            control_rate_bps: 6_000_000,
            preamble_us: 20,
            rts_bytes: 20,
            cts_bytes: 14,
            ack_bytes: 14,
            block_ack_bytes: 32,
            mac_header_bytes: 36,
        }
    }
}

/// Channel access protection mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AccessMode {
    /// Data sent directly after winning contention.
    BasicAccess,
    /// RTS/CTS exchange preceding the data transfer.
    RtsCts,
}

/// Per-MPDU non-acknowledgement probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorModel {
    pub p_e: f64,
}

impl ErrorModel {
    pub fn new(p_e: f64) -> Self {
        assert!((0.0..=1.0).contains(&p_e), "p_e out of [0,1]: {p_e}");
        ErrorModel { p_e }
    }
}

/// Delivery verdict for one transmission attempt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeliveryVerdict {
    /// One flag per MPDU in the unit, true = delivered.
    pub delivered: Vec<bool>,
    /// The attempt succeeded (at least one MPDU acknowledged).
    pub success: bool,
}

/// Airtime of `bytes` at `rate_bps`, rounded up to the symbol granularity.
///
/// `bytes` must be at least 1.
pub fn tx_time(bytes: u32, rate_bps: u64) -> u64 {
    assert!(bytes >= 1, "tx_time requires a non-empty frame");
    assert!(rate_bps > 0);
    let bits = u64::from(bytes) * 8;
    let us = (bits * 1_000_000).div_ceil(rate_bps);
    us.div_ceil(SYMBOL_US) * SYMBOL_US
}

impl PhyParams {
    /// Airtime of a single data PPDU carrying `mpdu_payloads` (AMPDU when
    /// more than one), including preamble and per-MPDU MAC headers.
    pub fn data_ppdu_us(&self, mpdu_payloads: &[u32]) -> u64 {
        let total: u32 = mpdu_payloads
            .iter()
            .map(|p| p + self.mac_header_bytes)
            .sum();
        self.preamble_us + tx_time(total, self.phy_rate_bps)
    }

    pub fn ack_us(&self) -> u64 {
        self.preamble_us + tx_time(self.ack_bytes, self.control_rate_bps)
    }

    pub fn block_ack_us(&self) -> u64 {
        self.preamble_us + tx_time(self.block_ack_bytes, self.control_rate_bps)
    }

    pub fn rts_us(&self) -> u64 {
        self.preamble_us + tx_time(self.rts_bytes, self.control_rate_bps)
    }

    pub fn cts_us(&self) -> u64 {
        self.preamble_us + tx_time(self.cts_bytes, self.control_rate_bps)
    }

    /// Exchange airtime of a unit, from the end of channel acquisition to
    /// the end of the final acknowledgement. Intra-burst SIFS gaps and
    /// acknowledgements are included; DIFS and RTS/CTS are not.
    pub fn unit_exchange_us(&self, unit: &TransmissionUnit) -> u64 {
        match unit.kind {
            UnitKind::SingleMsdu => {
                self.data_ppdu_us(&unit.mpdus) + self.sifs_us + self.ack_us()
            }
            UnitKind::Ampdu => {
                self.data_ppdu_us(&unit.mpdus) + self.sifs_us + self.block_ack_us()
            }
            UnitKind::TxopBurst => {
                // SIFS-separated sequence of single-MPDU exchanges.
                let n = unit.mpdus.len() as u64;
                let data: u64 = unit
                    .mpdus
                    .iter()
                    .map(|&p| self.data_ppdu_us(&[p]))
                    .sum();
                data + n * (self.sifs_us + self.ack_us()) + (n - 1) * self.sifs_us
            }
        }
    }

    /// Exchange airtime of appending one more MPDU to a TXOP burst of
    /// `count` MPDUs with `payload`-byte frames (all equal-sized check is
    /// the caller's concern; this is exact for the greedy packer).
    pub fn txop_exchange_us(&self, payloads: &[u32]) -> u64 {
        let n = payloads.len() as u64;
        if n == 0 {
            return 0;
        }
        let data: u64 = payloads.iter().map(|&p| self.data_ppdu_us(&[p])).sum();
        data + n * (self.sifs_us + self.ack_us()) + (n - 1) * self.sifs_us
    }
}

/// Duration of a successful slot.
pub fn success_slot_us(phy: &PhyParams, mode: AccessMode, unit: &TransmissionUnit) -> u64 {
    let exchange = phy.unit_exchange_us(unit);
    match mode {
        AccessMode::BasicAccess => phy.difs_us + exchange,
        AccessMode::RtsCts => {
            phy.difs_us + phy.rts_us() + phy.sifs_us + phy.cts_us() + phy.sifs_us + exchange
        }
    }
}

/// Duration of a collision slot. Under Basic Access the channel is held
/// for as long as the longest colliding exchange would have lasted (ACK
/// timeout folded in); under RTS/CTS only the RTS and the CTS timeout are
/// lost, independent of payload size.
pub fn collision_slot_us(phy: &PhyParams, mode: AccessMode, longest_exchange_us: u64) -> u64 {
    match mode {
        AccessMode::BasicAccess => phy.difs_us + longest_exchange_us,
        AccessMode::RtsCts => phy.difs_us + phy.rts_us() + phy.sifs_us + phy.cts_us(),
    }
}

/// Draw per-MPDU delivery flags for a unit.
///
/// Each MPDU fails independently with probability `p_e`; the attempt as a
/// whole fails only when every MPDU failed. For a TXOP burst the exchange
/// stops at the first failed MPDU, so nothing after it is delivered.
pub fn apply_channel_errors(
    unit: &TransmissionUnit,
    model: ErrorModel,
    rng: &mut ChaCha12Rng,
) -> DeliveryVerdict {
    assert!(!unit.mpdus.is_empty(), "unit must carry at least one MPDU");
    let mut delivered: Vec<bool> = Vec::with_capacity(unit.mpdus.len());
    match unit.kind {
        UnitKind::SingleMsdu | UnitKind::Ampdu => {
            for _ in &unit.mpdus {
                delivered.push(rng.random::<f64>() >= model.p_e);
            }
        }
        UnitKind::TxopBurst => {
            let mut alive = true;
            for _ in &unit.mpdus {
                if alive && rng.random::<f64>() >= model.p_e {
                    delivered.push(true);
                } else {
                    delivered.push(false);
                    alive = false;
                }
            }
        }
    }
    let success = delivered.iter().any(|&d| d);
    DeliveryVerdict { delivered, success }
}
