//! The 128-bit wire frame and its build/open paths.
//!
//! Wire layout, big-endian, 16 bytes total:
//!
//! ```text
//! byte  0       next_channel   (8-bit channel index, 0-based)
//! bytes 1..3    node_address   (16-bit sender address)
//! bytes 3..14   payload        (88-bit encrypted payload)
//! bytes 14..16  sequence       (16-bit packet sequence number)
//! ```
//!
//! Headers travel in the clear; only the payload is encrypted. The
//! receive path keeps a sliding replay window of the 4096 most recent
//! sequence numbers per sender and rejects duplicates inside it.

use crate::crypto::{decrypt_payload, encrypt_payload, AesKey, CounterBlock, DomainTag, Payload88};
use crate::error::Error;
use crate::hopping::HopState;
use crate::timesync::SyncStatus;

/// Serialized frame length.
pub const FRAME_BYTES: usize = 16;

/// Replay window size in sequence numbers.
pub const REPLAY_WINDOW: u16 = 4096;

/// One 128-bit frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Frame {
    pub next_channel: u8,
    pub node_address: u16,
    pub payload: Payload88,
    pub sequence: u16,
}

impl Frame {
    /// Serializes to the fixed 16-byte wire form.
    pub fn to_bytes(&self) -> [u8; FRAME_BYTES] {
        let mut out = [0u8; FRAME_BYTES];
        out[0] = self.next_channel;
        out[1..3].copy_from_slice(&self.node_address.to_be_bytes());
        out[3..14].copy_from_slice(self.payload.as_bytes());
        out[14..16].copy_from_slice(&self.sequence.to_be_bytes());
        out
    }

    /// Parses a frame; the buffer must be exactly 16 bytes.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, Error> {
        if bytes.len() != FRAME_BYTES {
            return Err(Error::Framing { expected: FRAME_BYTES, actual: bytes.len() });
        }
        let mut payload = [0u8; 11];
        payload.copy_from_slice(&bytes[3..14]);
        Ok(Frame {
            next_channel: bytes[0],
            node_address: u16::from_be_bytes([bytes[1], bytes[2]]),
            payload: Payload88::new(payload),
            sequence: u16::from_be_bytes([bytes[14], bytes[15]]),
        })
    }
}

/// Transmit-side context: key, identity, and the rolling sequence number.
#[derive(Debug, Clone, Copy)]
pub struct TxContext {
    key: AesKey,
    node_address: u16,
    sequence: u16,
    rotation_pending: bool,
}

impl TxContext {
    pub fn new(key: AesKey, node_address: u16) -> Self {
        TxContext { key, node_address, sequence: 0, rotation_pending: false }
    }

    pub fn node_address(&self) -> u16 {
        self.node_address
    }

    pub fn sequence(&self) -> u16 {
        self.sequence
    }

    /// True once the sequence counter has wrapped and a seed rotation is
    /// owed before (address, sequence) pairs repeat under the same epoch.
    pub fn rotation_pending(&self) -> bool {
        self.rotation_pending
    }

    /// Clears the wrap marker after the node has rotated.
    pub fn acknowledge_rotation(self) -> Self {
        TxContext { rotation_pending: false, ..self }
    }

    #[cfg(test)]
    pub(crate) fn with_sequence(self, sequence: u16) -> Self {
        TxContext { sequence, ..self }
    }
}

/// Builds one frame for the hop state's current slot.
///
/// The payload keystream is bound to (address, sequence, slot); the
/// header announces the channel the hop sequence selects for the next
/// slot. Returns the frame together with the advanced context
/// (sequence + 1). A node that is not synchronized must not transmit, so
/// building fails with [`Error::NotSynchronized`].
pub fn build_frame(
    ctx: &TxContext,
    hop: &HopState,
    status: SyncStatus,
    plaintext: &Payload88,
) -> Result<(Frame, TxContext), Error> {
    if status != SyncStatus::Synced {
        return Err(Error::NotSynchronized);
    }
    let counter = CounterBlock {
        node_address: ctx.node_address,
        sequence_number: ctx.sequence,
        slot_index: hop.current_slot(),
        domain_tag: DomainTag::Payload,
    };
    let frame = Frame {
        next_channel: hop.peek_next_channel(),
        node_address: ctx.node_address,
        payload: encrypt_payload(&ctx.key, &counter, plaintext),
        sequence: ctx.sequence,
    };
    let next_sequence = ctx.sequence.wrapping_add(1);
    let next_ctx = TxContext {
        sequence: next_sequence,
        rotation_pending: ctx.rotation_pending || next_sequence == 0,
        ..*ctx
    };
    Ok((frame, next_ctx))
}

/// Fields recovered from a received frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OpenedFrame {
    pub plaintext: Payload88,
    pub next_channel: u8,
    pub sender_address: u16,
    pub sequence: u16,
}

/// Decrypts and replay-checks a received frame.
///
/// `slot` is the slot the frame was transmitted in; `filter` is the
/// receiver's replay window for this sender. A duplicate sequence inside
/// the window is rejected before decryption.
pub fn open_frame(
    key: &AesKey,
    frame: &Frame,
    slot: u64,
    filter: &mut ReplayFilter,
) -> Result<OpenedFrame, Error> {
    if !filter.accept(frame.sequence) {
        return Err(Error::ReplayRejected);
    }
    let counter = CounterBlock {
        node_address: frame.node_address,
        sequence_number: frame.sequence,
        slot_index: slot,
        domain_tag: DomainTag::Payload,
    };
    Ok(OpenedFrame {
        plaintext: decrypt_payload(key, &counter, &frame.payload),
        next_channel: frame.next_channel,
        sender_address: frame.node_address,
        sequence: frame.sequence,
    })
}

/// Sliding replay window over one sender's sequence numbers.
///
/// Tracks the most recent sequence seen and a bitmap of the
/// [`REPLAY_WINDOW`] positions behind it. Sequences that have fallen out
/// of the window can no longer be distinguished from fresh traffic and
/// are accepted; that bounds the replay defense below 100% by design.
#[derive(Debug, Clone)]
pub struct ReplayFilter {
    last_seq: u16,
    bitmap: [u64; REPLAY_WINDOW as usize / 64],
    primed: bool,
}

impl ReplayFilter {
    pub fn new() -> Self {
        ReplayFilter { last_seq: 0, bitmap: [0; 64], primed: false }
    }

    fn locate(seq: u16) -> (usize, u64) {
        let pos = (seq % REPLAY_WINDOW) as usize;
        (pos / 64, 1u64 << (pos % 64))
    }

    fn test(&self, seq: u16) -> bool {
        let (word, mask) = Self::locate(seq);
        self.bitmap[word] & mask != 0
    }

    fn set(&mut self, seq: u16) {
        let (word, mask) = Self::locate(seq);
        self.bitmap[word] |= mask;
    }

    fn clear(&mut self, seq: u16) {
        let (word, mask) = Self::locate(seq);
        self.bitmap[word] &= !mask;
    }

    /// Records a sequence number; returns false when it is a replay.
    pub fn accept(&mut self, seq: u16) -> bool {
        if !self.primed {
            self.primed = true;
            self.last_seq = seq;
            self.set(seq);
            return true;
        }
        let ahead = seq.wrapping_sub(self.last_seq);
        if ahead == 0 {
            return false;
        }
        if ahead <= u16::MAX / 2 {
            // newer sequence: slide the window forward
            if ahead >= REPLAY_WINDOW {
                self.bitmap = [0; 64];
            } else {
                for step in 1..=ahead {
                    self.clear(self.last_seq.wrapping_add(step));
                }
            }
            self.set(seq);
            self.last_seq = seq;
            return true;
        }
        let behind = self.last_seq.wrapping_sub(seq);
        if behind >= REPLAY_WINDOW {
            // outside the window: indistinguishable from fresh traffic
            return true;
        }
        if self.test(seq) {
            false
        } else {
            self.set(seq);
            true
        }
    }
}

impl Default for ReplayFilter {
    fn default() -> Self {
        Self::new()
    }
}
