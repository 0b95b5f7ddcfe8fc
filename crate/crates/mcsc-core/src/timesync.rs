//! Clock model and master-beacon synchronization.
//!
//! Each node owns a local clock that runs fast or slow by a fixed drift
//! rate. The master broadcasts a [`SyncSignal`] every sync interval;
//! members compare their clock against the carried master time and, when
//! the offset exceeds the configured bound, move halfway toward the
//! master's clock (the half-difference is rounded to a whole millisecond,
//! ties away from zero).
//!
//! Clock arithmetic is done in integer picoseconds with the drift rate
//! held in parts per million, so drift accumulation is exact and two runs
//! can never disagree in the last bit.

use crate::error::Error;

/// Truncation-based rounding to the nearest integer, ties away from zero.
/// (`f64::round` lives in `std`, not `core`.)
fn round_half_away(x: f64) -> f64 {
    let t = x as i64 as f64;
    let frac = x - t;
    if frac >= 0.5 {
        t + 1.0
    } else if frac <= -0.5 {
        t - 1.0
    } else {
        t
    }
}

fn abs(x: f64) -> f64 {
    if x < 0.0 {
        -x
    } else {
        x
    }
}

/// Absolute clock offset between two timestamps, in milliseconds.
pub fn time_offset(t_receiver_ms: f64, t_sender_ms: f64) -> f64 {
    abs(t_receiver_ms - t_sender_ms)
}

/// Maximum drift that can accumulate over one sync interval:
/// `t_sync × |drift_rate|`.
pub fn max_drift(t_sync_ms: f64, drift_rate: f64) -> Result<f64, Error> {
    if t_sync_ms <= 0.0 {
        return Err(Error::InvalidTiming { parameter: "t_sync" });
    }
    Ok(t_sync_ms * abs(drift_rate))
}

/// Whether an offset is inside the acceptable bound (boundary inclusive).
pub fn in_sync(offset_ms: f64, bound_ms: f64) -> bool {
    offset_ms <= bound_ms
}

/// Adjusted clock value after a synchronization exchange:
/// `t_old + (t_receiver − t_sender)/2`, the half-difference rounded to a
/// whole millisecond with ties away from zero.
///
/// The pair `(t_receiver, t_sender)` is oriented so that `t_sender` is
/// the clock being adjusted; the result is then the midpoint of the two
/// clocks.
pub fn resynchronize(t_old_ms: f64, t_receiver_ms: f64, t_sender_ms: f64) -> f64 {
    t_old_ms + round_half_away((t_receiver_ms - t_sender_ms) / 2.0)
}

/// A drifting local clock.
///
/// The value advances by `(1 + drift_rate) × dt` for every `dt` of true
/// time. Internally the clock counts picoseconds and the drift rate is
/// quantized to 1 ppm, which keeps every advance exact in integer
/// arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClockModel {
    drift_ppm: i64,
    picos: i128,
}

const PICOS_PER_MS: i128 = 1_000_000_000;

impl ClockModel {
    /// New clock reading `start_ms`, drifting at `drift_rate` seconds per
    /// second (positive runs fast; must stay above −1).
    pub fn new(start_ms: i64, drift_rate: f64) -> Self {
        ClockModel {
            drift_ppm: round_half_away(drift_rate * 1e6) as i64,
            picos: start_ms as i128 * PICOS_PER_MS,
        }
    }

    pub fn drift_rate(&self) -> f64 {
        self.drift_ppm as f64 / 1e6
    }

    /// Local time in whole microseconds.
    pub fn local_time_us(&self) -> i64 {
        (self.picos / 1_000_000) as i64
    }

    /// Local time in milliseconds (microsecond resolution).
    pub fn local_time_ms(&self) -> f64 {
        self.local_time_us() as f64 / 1000.0
    }

    /// Clock after `true_dt_ms` of true time has elapsed.
    pub fn advanced(self, true_dt_ms: u64) -> Self {
        let dt_us = true_dt_ms as i128 * 1000;
        ClockModel { picos: self.picos + dt_us * (1_000_000 + self.drift_ppm as i128), ..self }
    }

    /// Clock shifted by a whole-millisecond correction.
    pub fn offset_by_whole_ms(self, correction_ms: i64) -> Self {
        ClockModel { picos: self.picos + correction_ms as i128 * PICOS_PER_MS, ..self }
    }
}

/// Synchronization status of a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyncStatus {
    Synced,
    Desynced,
}

/// Per-node synchronization bookkeeping.
///
/// `camped_channel` is populated exactly while the node is desynchronized
/// and camping for a beacon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncState {
    status: SyncStatus,
    t_sync_interval_ms: u32,
    t_max_offset_ms: f64,
    last_beacon_slot: Option<u64>,
    camped_channel: Option<u8>,
}

impl SyncState {
    pub fn new(t_sync_interval_ms: u32, t_max_offset_ms: f64) -> Self {
        SyncState {
            status: SyncStatus::Synced,
            t_sync_interval_ms,
            t_max_offset_ms,
            last_beacon_slot: None,
            camped_channel: None,
        }
    }

    pub fn status(&self) -> SyncStatus {
        self.status
    }

    pub fn is_synced(&self) -> bool {
        self.status == SyncStatus::Synced
    }

    pub fn t_sync_interval_ms(&self) -> u32 {
        self.t_sync_interval_ms
    }

    pub fn t_max_offset_ms(&self) -> f64 {
        self.t_max_offset_ms
    }

    pub fn last_beacon_slot(&self) -> Option<u64> {
        self.last_beacon_slot
    }

    pub fn camped_channel(&self) -> Option<u8> {
        self.camped_channel
    }

    /// Drops to DESYNCED, camping on the given channel.
    pub fn mark_desynced(self, camped_channel: u8) -> Self {
        SyncState { status: SyncStatus::Desynced, camped_channel: Some(camped_channel), ..self }
    }

    /// Moves the camp to a new channel; meaningful only while desynced.
    pub fn recamp(self, camped_channel: u8) -> Self {
        debug_assert_eq!(self.status, SyncStatus::Desynced);
        SyncState { camped_channel: Some(camped_channel), ..self }
    }
}

/// Master beacon payload: everything a rejoining node needs to recompute
/// the hop sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyncSignal {
    /// Master's clock at transmission, in microseconds (the medium adds
    /// propagation delay before delivery).
    pub master_time_us: i64,
    /// Current seed rotation epoch.
    pub seed_epoch: u64,
    /// Slot the beacon was transmitted in.
    pub slot_index: u64,
}

/// Encoded beacon length on the air.
pub const SYNC_SIGNAL_BYTES: usize = 24;

impl SyncSignal {
    pub fn to_bytes(&self) -> [u8; SYNC_SIGNAL_BYTES] {
        let mut out = [0u8; SYNC_SIGNAL_BYTES];
        out[0..8].copy_from_slice(&self.master_time_us.to_be_bytes());
        out[8..16].copy_from_slice(&self.seed_epoch.to_be_bytes());
        out[16..24].copy_from_slice(&self.slot_index.to_be_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, Error> {
        if bytes.len() != SYNC_SIGNAL_BYTES {
            return Err(Error::Framing { expected: SYNC_SIGNAL_BYTES, actual: bytes.len() });
        }
        let mut w = [0u8; 8];
        w.copy_from_slice(&bytes[0..8]);
        let master_time_us = i64::from_be_bytes(w);
        w.copy_from_slice(&bytes[8..16]);
        let seed_epoch = u64::from_be_bytes(w);
        w.copy_from_slice(&bytes[16..24]);
        let slot_index = u64::from_be_bytes(w);
        Ok(SyncSignal { master_time_us, seed_epoch, slot_index })
    }

    pub fn master_time_ms(&self) -> f64 {
        self.master_time_us as f64 / 1000.0
    }
}

/// Applies one received beacon to a node's sync state and clock.
///
/// A beacon no newer than the last processed one is ignored, which also
/// makes processing the same signal twice a no-op. Otherwise the node
/// becomes SYNCED and leaves any camp; if the measured offset exceeds the
/// configured bound, the clock moves halfway toward the master
/// (see [`resynchronize`]). Hop realignment from `seed_epoch` and
/// `slot_index` is the caller's job, since the hop state lives elsewhere.
pub fn process_sync_signal(
    state: SyncState,
    clock: ClockModel,
    signal: &SyncSignal,
) -> (SyncState, ClockModel) {
    if let Some(last) = state.last_beacon_slot {
        if signal.slot_index <= last {
            return (state, clock);
        }
    }
    let offset = time_offset(clock.local_time_ms(), signal.master_time_ms());
    let next_state = SyncState {
        status: SyncStatus::Synced,
        camped_channel: None,
        last_beacon_slot: Some(signal.slot_index),
        ..state
    };
    if in_sync(offset, state.t_max_offset_ms) {
        (next_state, clock)
    } else {
        let correction_ms =
            round_half_away((signal.master_time_ms() - clock.local_time_ms()) / 2.0) as i64;
        (next_state, clock.offset_by_whole_ms(correction_ms))
    }
}
