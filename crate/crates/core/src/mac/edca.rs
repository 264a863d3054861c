//! EDCA contention transitions: reset-on-success, exponential window
//! doubling on failure, and the retry-limit drop.

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::mac::params::AcParams;
use crate::mac::state::AcState;
use crate::mac::MAX_RETRIES;

fn draw(cw: u32, rng: &mut ChaCha12Rng) -> u32 {
    if cw <= 1 {
        0
    } else {
        rng.random_range(0..cw)
    }
}

/// Acknowledged transmission: the window collapses to its floor and a
/// fresh random backoff is drawn from it.
pub fn on_success(state: &mut AcState, params: &AcParams, rng: &mut ChaCha12Rng) {
    state.cw_curr = params.cw_min;
    state.stage = 0;
    state.retries = 0;
    state.deterministic = false;
    state.backoff = draw(state.cw_curr, rng);
}

/// Failed transmission (real collision, virtual collision, or missing
/// ACK): double and clamp the window, redraw, and drop the head-of-line
/// unit once the retry limit is exceeded. Returns true when the unit
/// must be dropped.
pub fn on_failure(state: &mut AcState, params: &AcParams, rng: &mut ChaCha12Rng) -> bool {
    state.cw_curr = (state.cw_curr * 2).min(params.cw_max);
    state.stage = state.stage.saturating_add(1).min(params.max_stage);
    state.retries += 1;
    if state.retries > MAX_RETRIES {
        on_success(state, params, rng);
        true
    } else {
        state.backoff = draw(state.cw_curr, rng);
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mac::params::{edca_defaults, Ac};
    use crate::rng::{substream, StreamRole};

    fn rng() -> ChaCha12Rng {
        substream(9, 0, 0, 0, StreamRole::Backoff)
    }

    #[test]
    fn success_resets_window_to_floor() {
        let params = edca_defaults(Ac::Be);
        let mut state = AcState::new(&params);
        let mut rng = rng();
        state.cw_curr = 128;
        for _ in 0..200 {
            on_success(&mut state, &params, &mut rng);
            assert_eq!(state.cw_curr, 32);
            assert!(state.backoff < 32);
        }
        // Already at the floor: stays there.
        on_success(&mut state, &params, &mut rng);
        assert_eq!(state.cw_curr, 32);
    }

    #[test]
    fn vo_success_resets_to_its_own_floor() {
        let params = edca_defaults(Ac::Vo);
        let mut state = AcState::new(&params);
        let mut rng = rng();
        state.cw_curr = 16;
        on_success(&mut state, &params, &mut rng);
        assert_eq!(state.cw_curr, 8);
        assert!(state.backoff < 8);
    }

    #[test]
    fn failure_doubles_and_clamps() {
        let params = edca_defaults(Ac::Be);
        let mut state = AcState::new(&params);
        let mut rng = rng();
        assert!(!on_failure(&mut state, &params, &mut rng));
        assert_eq!(state.cw_curr, 64);
        state.cw_curr = 1024;
        state.retries = 0;
        assert!(!on_failure(&mut state, &params, &mut rng));
        assert_eq!(state.cw_curr, 1024);
    }

    #[test]
    fn vo_failure_clamps_at_16() {
        let params = edca_defaults(Ac::Vo);
        let mut state = AcState::new(&params);
        let mut rng = rng();
        state.cw_curr = 8;
        on_failure(&mut state, &params, &mut rng);
        assert_eq!(state.cw_curr, 16);
        state.retries = 0;
        on_failure(&mut state, &params, &mut rng);
        assert_eq!(state.cw_curr, 16);
    }

    #[test]
    fn window_is_monotone_between_successes() {
        let params = edca_defaults(Ac::Be);
        let mut state = AcState::new(&params);
        let mut rng = rng();
        let mut prev = state.cw_curr;
        for _ in 0..6 {
            on_failure(&mut state, &params, &mut rng);
            assert!(state.cw_curr >= prev);
            prev = state.cw_curr;
        }
    }

    #[test]
    fn eighth_failure_drops_and_resets() {
        let params = edca_defaults(Ac::Be);
        let mut state = AcState::new(&params);
        let mut rng = rng();
        for _ in 0..7 {
            assert!(!on_failure(&mut state, &params, &mut rng));
        }
        assert_eq!(state.retries, 7);
        assert!(on_failure(&mut state, &params, &mut rng));
        assert_eq!(state.retries, 0);
        assert_eq!(state.cw_curr, params.cw_min);
    }
}
