//! Per-Access-Category contention parameters and the standard presets.

use serde::{Deserialize, Serialize};

/// Access Category of a live station queue, ordered by priority.
///
/// `Vo > Vi > Be > Bk`; the discriminant doubles as the array index used
/// throughout the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Ac {
    Vo = 0,
    Vi = 1,
    Be = 2,
    Bk = 3,
}

pub const AC_COUNT: usize = 4;

/// All live ACs in priority order (highest first).
pub const ALL_ACS: [Ac; AC_COUNT] = [Ac::Vo, Ac::Vi, Ac::Be, Ac::Bk];

impl Ac {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Ac {
        ALL_ACS[i]
    }

    pub fn label(self) -> &'static str {
        match self {
            Ac::Vo => "vo",
            Ac::Vi => "vi",
            Ac::Be => "be",
            Ac::Bk => "bk",
        }
    }

    /// True when `self` outranks `other` in the contention priority order.
    pub fn outranks(self, other: Ac) -> bool {
        (self as usize) < (other as usize)
    }
}

/// Static contention parameters of one Access Category.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcParams {
    /// Minimum contention window, in slots.
    pub cw_min: u32,
    /// Maximum contention window, in slots (doubling clamp).
    pub cw_max: u32,
    /// Maximum backoff stage `m`.
    pub max_stage: u8,
    /// AIFSN; the idle waiting requirement is SIFS + slot * (AIFSN - 1).
    pub aifsn: u8,
    /// TXOP limit in µs; 0 means a single MSDU per access.
    pub txop_limit_us: u64,
}

impl AcParams {
    /// Contention window at backoff stage `k`: `2^k * cw_min`.
    pub fn cw_at(&self, stage: u8) -> u32 {
        self.cw_min << stage
    }

    /// Deterministic backoff at stage `k`: `ceil(cw(k)/2) - 1`.
    pub fn deterministic_backoff(&self, stage: u8) -> u32 {
        self.cw_at(stage).div_ceil(2) - 1
    }

    /// Deterministic backoff at stage 0.
    pub fn bd_lowest(&self) -> u32 {
        self.deterministic_backoff(0)
    }

    /// Deterministic backoff at the maximum stage.
    pub fn bd_highest(&self) -> u32 {
        self.deterministic_backoff(self.max_stage)
    }
}

/// Default EDCA parameter set (IEEE 802.11e).
pub fn edca_defaults(ac: Ac) -> AcParams {
    match ac {
        Ac::Bk => AcParams { cw_min: 32, cw_max: 1024, max_stage: 5, aifsn: 8, txop_limit_us: 0 },
        Ac::Be => AcParams { cw_min: 32, cw_max: 1024, max_stage: 5, aifsn: 4, txop_limit_us: 0 },
        Ac::Vi => AcParams { cw_min: 16, cw_max: 32, max_stage: 1, aifsn: 3, txop_limit_us: 3_008 },
        Ac::Vo => AcParams { cw_min: 8, cw_max: 16, max_stage: 1, aifsn: 3, txop_limit_us: 1_504 },
    }
}

/// Default EDCA parameters for a legacy (single-queue) station.
pub fn edca_legacy_defaults() -> AcParams {
    AcParams { cw_min: 16, cw_max: 1024, max_stage: 5, aifsn: 3, txop_limit_us: 0 }
}

/// Contention parameters for the deterministic-backoff QoS protocol.
///
/// Windows deepen to `2^m * cw_min` so schedules can absorb many
/// contenders; differentiation comes from the deterministic backoff alone,
/// so every AC shares the DIFS-equivalent waiting period (AIFSN 3). The
/// TXOP limits of the EDCA set are retained for the TXOP-aggregation
/// variant.
pub fn eca_qos_defaults(ac: Ac) -> AcParams {
    match ac {
        Ac::Bk => AcParams { cw_min: 32, cw_max: 1024, max_stage: 5, aifsn: 3, txop_limit_us: 0 },
        Ac::Be => AcParams { cw_min: 32, cw_max: 1024, max_stage: 5, aifsn: 3, txop_limit_us: 0 },
        Ac::Vi => AcParams { cw_min: 16, cw_max: 512, max_stage: 5, aifsn: 3, txop_limit_us: 3_008 },
        Ac::Vo => AcParams { cw_min: 8, cw_max: 256, max_stage: 5, aifsn: 3, txop_limit_us: 1_504 },
    }
}

/// Legacy row of the deterministic-backoff QoS parameter set.
pub fn eca_qos_legacy_defaults() -> AcParams {
    AcParams { cw_min: 32, cw_max: 1024, max_stage: 5, aifsn: 3, txop_limit_us: 0 }
}
