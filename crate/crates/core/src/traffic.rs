//! Packet arrival processes: saturated sources, on/off voice, and
//! GOP-structured video.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use crate::station::MacQueue;

/// On/off voice codec source (CBR during talkspurts).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoiceSourceParams {
    /// Mean talkspurt duration, seconds.
    pub on_duration_mean_s: f64,
    /// Mean silence duration, seconds.
    pub off_duration_mean_s: f64,
    /// Codec rate, bits per second.
    pub rate_bps: f64,
    /// Voice packet payload, bytes.
    pub payload_bytes: u32,
}

impl Default for VoiceSourceParams {
    fn default() -> Self {
        VoiceSourceParams {
            on_duration_mean_s: 3.110,
            off_duration_mean_s: 3.2727,
            rate_bps: 15_200.0,
            payload_bytes: 38,
        }
    }
}

impl VoiceSourceParams {
    /// Packet spacing during a talkspurt, µs.
    pub fn packet_interval_us(&self) -> u64 {
        ((f64::from(self.payload_bytes) * 8.0 / self.rate_bps * 1e6).round() as u64).max(1)
    }
}

/// GOP-structured video source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoSourceParams {
    /// Mean I-frame size, bytes.
    pub mean_i_bytes: f64,
    /// Mean P-frame size, bytes.
    pub mean_p_bytes: f64,
    /// Mean B-frame size, bytes.
    pub mean_b_bytes: f64,
    /// Frame size standard deviation as a multiple of the mean.
    pub size_stddev_factor: f64,
    /// Average stream rate, bits per second.
    pub avg_rate_bps: f64,
}

impl Default for VideoSourceParams {
    fn default() -> Self {
        VideoSourceParams {
            mean_i_bytes: 5658.0,
            mean_p_bytes: 1634.0,
            mean_b_bytes: 348.0,
            size_stddev_factor: 2.0,
            avg_rate_bps: 300_000.0,
        }
    }
}

/// Frame types of the fixed 16-frame group: one I, three P, twelve B.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameType {
    I,
    P,
    B,
}

/// Fixed GOP pattern, period 16.
pub const GOP_PATTERN: [FrameType; 16] = {
    use FrameType::*;
    [I, B, B, B, P, B, B, B, P, B, B, B, P, B, B, B]
};

impl VideoSourceParams {
    pub fn mean_for(&self, ft: FrameType) -> f64 {
        match ft {
            FrameType::I => self.mean_i_bytes,
            FrameType::P => self.mean_p_bytes,
            FrameType::B => self.mean_b_bytes,
        }
    }

    /// Mean bytes of one full group under the configured (pre-truncation)
    /// frame-size means.
    pub fn mean_gop_bytes(&self) -> f64 {
        self.mean_i_bytes + 3.0 * self.mean_p_bytes + 12.0 * self.mean_b_bytes
    }

    /// Mean bytes actually emitted per group. Frame sizes are drawn from
    /// normals with stddev `f` times the mean and cut at 1 byte, which
    /// inflates every frame type's mean by the same truncated-normal
    /// factor `Phi(1/f) + f * phi(1/f)`.
    pub fn emitted_gop_bytes(&self) -> f64 {
        self.mean_gop_bytes() * truncated_mean_factor(self.size_stddev_factor)
    }

    /// Fixed frame emission period, µs: the generated byte stream meets
    /// the configured average rate over the 16-frame group.
    pub fn frame_period_us(&self) -> u64 {
        ((self.emitted_gop_bytes() * 8.0 / self.avg_rate_bps / 16.0 * 1e6).round() as u64).max(1)
    }
}

/// `E[max(0, X)] / mu` for `X ~ N(mu, (f mu)^2)`.
fn truncated_mean_factor(f: f64) -> f64 {
    if f <= 0.0 {
        return 1.0;
    }
    let alpha = 1.0 / f;
    normal_cdf(alpha) + f * normal_pdf(alpha)
}

fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

/// Abramowitz–Stegun 7.1.26 rational approximation, |error| < 1.5e-7.
fn erf(x: f64) -> f64 {
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.327_591_1 * x);
    let poly = t
        * (0.254_829_592
            + t * (-0.284_496_736 + t * (1.421_413_741 + t * (-1.453_152_027 + t * 1.061_405_429))));
    sign * (1.0 - poly * (-x * x).exp())
}

/// Split a frame into MAC payloads of at most `max_payload` bytes; all
/// full-size except a final remainder.
pub fn packetize(frame_bytes: u32, max_payload: u32) -> Vec<u32> {
    assert!(frame_bytes >= 1);
    assert!(max_payload >= 1);
    let full = (frame_bytes / max_payload) as usize;
    let rem = frame_bytes % max_payload;
    let mut out = vec![max_payload; full];
    if rem > 0 {
        out.push(rem);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VoicePhase {
    On,
    Off,
}

/// Live state of a voice source.
#[derive(Debug, Clone)]
pub struct VoiceSource {
    params: VoiceSourceParams,
    phase: VoicePhase,
    phase_end_us: u64,
    next_packet_us: u64,
    rng: ChaCha12Rng,
}

impl VoiceSource {
    pub fn new(params: VoiceSourceParams, mut rng: ChaCha12Rng) -> Self {
        // Start in a random position of the on/off cycle so stations are
        // not phase-locked at t = 0.
        let duty = params.on_duration_mean_s / (params.on_duration_mean_s + params.off_duration_mean_s);
        let start_on = rng.random::<f64>() < duty;
        let mut src = VoiceSource {
            params,
            phase: if start_on { VoicePhase::On } else { VoicePhase::Off },
            phase_end_us: 0,
            next_packet_us: 0,
            rng,
        };
        src.phase_end_us = src.draw_phase_duration();
        src.next_packet_us = if start_on {
            src.rng.random_range(0..src.params.packet_interval_us().max(1))
        } else {
            u64::MAX
        };
        src
    }

    fn draw_phase_duration(&mut self) -> u64 {
        let mean_s = match self.phase {
            VoicePhase::On => self.params.on_duration_mean_s,
            VoicePhase::Off => self.params.off_duration_mean_s,
        };
        let exp = Exp::new(1.0 / mean_s).expect("positive rate");
        (exp.sample(&mut self.rng) * 1e6).round().max(1.0) as u64
    }

    /// Emit every packet due at or before `now_us`.
    pub fn pump(&mut self, now_us: u64, queue: &mut MacQueue) {
        loop {
            match self.phase {
                VoicePhase::On => {
                    if self.next_packet_us <= now_us && self.next_packet_us < self.phase_end_us {
                        queue.enqueue(self.params.payload_bytes, self.next_packet_us);
                        self.next_packet_us += self.params.packet_interval_us();
                        continue;
                    }
                    if self.phase_end_us <= now_us {
                        self.phase = VoicePhase::Off;
                        let d = self.draw_phase_duration();
                        self.phase_end_us += d;
                        self.next_packet_us = u64::MAX;
                        continue;
                    }
                }
                VoicePhase::Off => {
                    if self.phase_end_us <= now_us {
                        self.phase = VoicePhase::On;
                        let start = self.phase_end_us;
                        let d = self.draw_phase_duration();
                        self.phase_end_us += d;
                        self.next_packet_us = start;
                        continue;
                    }
                }
            }
            break;
        }
    }

    #[cfg(test)]
    fn is_on(&self) -> bool {
        self.phase == VoicePhase::On
    }
}

/// Live state of a video source.
#[derive(Debug, Clone)]
pub struct VideoSource {
    params: VideoSourceParams,
    max_payload: u32,
    gop_pos: usize,
    next_frame_us: u64,
    rng: ChaCha12Rng,
}

impl VideoSource {
    pub fn new(params: VideoSourceParams, max_payload: u32, mut rng: ChaCha12Rng) -> Self {
        let period = params.frame_period_us();
        let first = rng.random_range(0..period.max(1));
        VideoSource {
            params,
            max_payload,
            gop_pos: 0,
            next_frame_us: first,
            rng,
        }
    }

    fn draw_frame_bytes(&mut self) -> u32 {
        let ft = GOP_PATTERN[self.gop_pos];
        let mean = self.params.mean_for(ft);
        let normal = Normal::new(mean, self.params.size_stddev_factor * mean).expect("valid normal");
        let drawn = normal.sample(&mut self.rng).round();
        drawn.max(1.0) as u32
    }

    /// Emit every frame due at or before `now_us`; each frame enters the
    /// queue as its full set of MPDUs at the emission instant.
    pub fn pump(&mut self, now_us: u64, queue: &mut MacQueue) {
        while self.next_frame_us <= now_us {
            let bytes = self.draw_frame_bytes();
            let ts = self.next_frame_us;
            for payload in packetize(bytes, self.max_payload) {
                queue.enqueue(payload, ts);
            }
            self.gop_pos = (self.gop_pos + 1) % GOP_PATTERN.len();
            self.next_frame_us += self.params.frame_period_us();
        }
    }

    #[cfg(test)]
    fn gop_position(&self) -> usize {
        self.gop_pos
    }
}

/// Saturated source: tops the queue up to capacity with fixed-size frames.
#[derive(Debug, Clone)]
pub struct SaturatedSource {
    pub payload_bytes: u32,
}

impl SaturatedSource {
    pub fn pump(&self, now_us: u64, queue: &mut MacQueue) {
        while queue.len() < queue.capacity() {
            queue.enqueue(self.payload_bytes, now_us);
        }
    }
}

/// The arrival process feeding one AC.
#[derive(Debug, Clone)]
pub enum TrafficSource {
    Saturated(SaturatedSource),
    Voice(VoiceSource),
    Video(VideoSource),
}

impl TrafficSource {
    pub fn pump(&mut self, now_us: u64, queue: &mut MacQueue) {
        match self {
            TrafficSource::Saturated(s) => s.pump(now_us, queue),
            TrafficSource::Voice(s) => s.pump(now_us, queue),
            TrafficSource::Video(s) => s.pump(now_us, queue),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, StreamRole};

    fn rng(k: u64) -> ChaCha12Rng {
        substream(k, 0, 0, 0, StreamRole::Traffic)
    }

    #[test]
    fn packetize_splits_with_remainder() {
        assert_eq!(packetize(5658, 1470), vec![1470, 1470, 1470, 1248]);
        assert_eq!(packetize(348, 1470), vec![348]);
        assert_eq!(packetize(1470, 1470), vec![1470]);
        assert_eq!(packetize(2940, 1470), vec![1470, 1470]);
    }

    #[test]
    fn voice_packets_are_spaced_exactly_20_ms() {
        let params = VoiceSourceParams::default();
        assert_eq!(params.packet_interval_us(), 20_000);
        let mut src = VoiceSource::new(params.clone(), rng(1));
        let mut queue = MacQueue::new(100_000);
        // Pump far enough to cover several talkspurts.
        src.pump(200_000_000, &mut queue);
        let times: Vec<u64> = queue.iter().map(|e| e.enqueued_us).collect();
        assert!(times.len() > 100);
        let mut in_spurt_gaps = 0;
        for w in times.windows(2) {
            let gap = w[1] - w[0];
            if gap == 20_000 {
                in_spurt_gaps += 1;
            } else {
                // Phase boundary: gap spans a silence interval.
                assert!(gap > 20_000, "unexpected sub-interval gap {gap}");
            }
        }
        assert!(in_spurt_gaps > times.len() / 2);
        assert!(queue.iter().all(|e| e.payload_bytes == 38));
    }

    #[test]
    fn voice_duty_cycle_matches_means() {
        // Long-run fraction of time in the On phase: 3.110 / 6.3827.
        let params = VoiceSourceParams::default();
        let expected = params.on_duration_mean_s / (params.on_duration_mean_s + params.off_duration_mean_s);
        let mut src = VoiceSource::new(params, rng(2));
        let horizon = 10_000_000_000u64; // 10^4 seconds
        let step = 1_000_000u64;
        let mut queue = MacQueue::new(usize::MAX >> 1);
        let mut on_samples = 0u64;
        let mut samples = 0u64;
        let mut t = 0;
        while t < horizon {
            src.pump(t, &mut queue);
            if src.is_on() {
                on_samples += 1;
            }
            samples += 1;
            t += step;
        }
        let duty = on_samples as f64 / samples as f64;
        assert!((duty - expected).abs() < 0.02, "duty {duty} vs {expected}");
    }

    #[test]
    fn off_phase_emits_nothing() {
        let params = VoiceSourceParams::default();
        let mut src = VoiceSource::new(params, rng(3));
        // Force a silence phase.
        src.phase = VoicePhase::Off;
        src.phase_end_us = 5_000_000;
        src.next_packet_us = u64::MAX;
        let mut queue = MacQueue::new(1000);
        src.pump(4_999_999, &mut queue);
        assert_eq!(queue.len(), 0);
    }

    #[test]
    fn gop_pattern_shape() {
        assert_eq!(GOP_PATTERN.len(), 16);
        let i = GOP_PATTERN.iter().filter(|f| **f == FrameType::I).count();
        let p = GOP_PATTERN.iter().filter(|f| **f == FrameType::P).count();
        let b = GOP_PATTERN.iter().filter(|f| **f == FrameType::B).count();
        assert_eq!((i, p, b), (1, 3, 12));
        assert_eq!(GOP_PATTERN[0], FrameType::I);
        assert_eq!(GOP_PATTERN[1], FrameType::B);
        assert_eq!(GOP_PATTERN[3], FrameType::B);
        assert_eq!(GOP_PATTERN[4], FrameType::P);
    }

    #[test]
    fn video_cycles_the_gop_and_meets_the_rate() {
        let params = VideoSourceParams::default();
        let period = params.frame_period_us();
        // 14736 configured bytes per GOP, inflated by the stddev-2
        // truncation factor 1.39559, at 300 kbps over 16 frames.
        assert_eq!(period, 34_276);
        let mut src = VideoSource::new(params.clone(), 1470, rng(4));
        let mut queue = MacQueue::new(usize::MAX >> 1);
        let horizon = 2_000_000_000u64; // 2000 s
        src.pump(horizon, &mut queue);
        let total_bytes: u64 = queue.iter().map(|e| u64::from(e.payload_bytes)).sum();
        let rate = total_bytes as f64 * 8.0 / (horizon as f64 / 1e6);
        assert!(
            (rate - params.avg_rate_bps).abs() / params.avg_rate_bps < 0.10,
            "long-run rate {rate} off target"
        );
        assert_eq!(src.gop_position(), (horizon / period + 1) as usize % 16);
    }

    #[test]
    fn i_frame_sizes_track_the_configured_mean() {
        let params = VideoSourceParams::default();
        let mut src = VideoSource::new(params.clone(), 1470, rng(5));
        let mut sum = 0f64;
        let mut n = 0u64;
        // Sample only GOP position 0 (I frames). Truncation at 1 byte
        // pushes the post-truncation mean above the configured one, so
        // compare against the truncated-normal expectation.
        for _ in 0..200_000 {
            let bytes = src.draw_frame_bytes();
            if src.gop_pos == 0 {
                sum += f64::from(bytes);
                n += 1;
            }
            src.gop_pos = (src.gop_pos + 1) % 16;
        }
        let mean = sum / n as f64;
        assert!(n > 10_000);
        // E[max(1, X)] for X ~ N(mu, (2 mu)^2) is mu * (Phi(1/2) + 2 phi(1/2))
        // = 1.39559 mu once the cut at 1 byte is folded in.
        let mu = params.mean_i_bytes;
        let expected = mu * 1.39559;
        assert!(
            (mean - expected).abs() / expected < 0.05,
            "I-frame mean {mean}, expected about {expected}"
        );
    }

    #[test]
    fn saturated_source_keeps_queue_full() {
        let src = SaturatedSource { payload_bytes: 1470 };
        let mut queue = MacQueue::new(1000);
        src.pump(0, &mut queue);
        assert_eq!(queue.len(), 1000);
        for _ in 0..10 {
            queue.dequeue();
        }
        src.pump(50, &mut queue);
        assert_eq!(queue.len(), 1000);
        assert!(queue.iter().all(|e| e.payload_bytes == 1470));
    }
}
