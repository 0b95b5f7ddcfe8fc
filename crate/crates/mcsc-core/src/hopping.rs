//! Keyed pseudo-random channel hopping.
//!
//! All synchronized nodes share a seed and a slot counter, and derive the
//! channel for every slot from them. The per-slot index comes from the
//! AES block function used as a PRF: the first 8 bytes of
//! `AES(seed, counter(slot))`, read big-endian, reduced modulo the channel
//! count. The modulo bias for 125 channels out of a 64-bit value is below
//! 2^-57 and is accepted without rejection sampling.
//!
//! Two schedules coexist deliberately:
//!
//! - data traffic follows the keyed PRF sequence, unpredictable without
//!   the seed;
//! - master sync beacons follow the public `slot mod N` walk
//!   ([`beacon_channel`]), so a node that has lost the seed epoch can
//!   still be found by camping on one channel.
//!
//! The seed is rotated on a fixed slot schedule through the block cipher
//! ([`rotate_seed`]), so every synchronized node rotates identically
//! without extra signaling.

use core::fmt;

use rand_core::RngCore;

use crate::crypto::{aes128_encrypt_block, AesKey, CounterBlock, DomainTag};
use crate::error::Error;

/// Largest channel count the 8-bit frame field can address.
pub const MAX_CHANNELS: u16 = 256;

/// The set of radio channels in use.
///
/// Channel indices are 0-based internally and on the wire; the 1-based
/// form exists only for display (see [`ChannelPlan::channel_label`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelPlan {
    channel_count: u16,
    base_frequency_mhz: u16,
    channel_width_mhz: u8,
}

impl ChannelPlan {
    /// The 2.4 GHz ISM plan: 125 channels of 1 MHz from 2400 MHz.
    pub const ISM_2_4_GHZ: ChannelPlan =
        ChannelPlan { channel_count: 125, base_frequency_mhz: 2400, channel_width_mhz: 1 };

    pub fn new(channel_count: u16) -> Result<Self, Error> {
        if channel_count == 0 || channel_count > MAX_CHANNELS {
            return Err(Error::InvalidChannelPlan { channel_count });
        }
        Ok(ChannelPlan { channel_count, ..Self::ISM_2_4_GHZ })
    }

    pub fn channel_count(&self) -> u16 {
        self.channel_count
    }

    /// Carrier frequency of a channel index, in MHz.
    pub fn frequency_mhz(&self, index: u8) -> u16 {
        self.base_frequency_mhz + index as u16 * self.channel_width_mhz as u16
    }

    /// 1-based channel number for reports and displays.
    pub fn channel_label(&self, index: u8) -> Result<u16, Error> {
        if (index as u16) >= self.channel_count {
            return Err(Error::ChannelOutOfRange { index, channel_count: self.channel_count });
        }
        Ok(index as u16 + 1)
    }
}

impl Default for ChannelPlan {
    fn default() -> Self {
        Self::ISM_2_4_GHZ
    }
}

/// The shared hopping seed plus its rotation epoch.
///
/// Synchronized nodes hold identical `(value, epoch)` pairs. The seed
/// value is key material and is redacted from `Debug` output.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct HopSeed {
    value: [u8; 16],
    epoch: u64,
}

impl HopSeed {
    pub const fn new(value: [u8; 16], epoch: u64) -> Self {
        HopSeed { value, epoch }
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    fn as_key(&self) -> AesKey {
        AesKey::new(self.value)
    }
}

impl fmt::Debug for HopSeed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HopSeed {{ value: <redacted>, epoch: {} }}", self.epoch)
    }
}

/// Channel index for one slot under a given seed.
///
/// Deterministic: two nodes sharing `(seed, slot)` always agree. Errors
/// when `channel_count` is outside 1..=256.
pub fn prng_index(seed: &HopSeed, slot: u64, channel_count: u16) -> Result<u8, Error> {
    if channel_count == 0 || channel_count > MAX_CHANNELS {
        return Err(Error::InvalidChannelPlan { channel_count });
    }
    let counter = CounterBlock {
        node_address: 0,
        sequence_number: 0,
        slot_index: slot,
        domain_tag: DomainTag::Prng,
    };
    let block = aes128_encrypt_block(&seed.as_key(), &counter.to_bytes());
    let mut word = [0u8; 8];
    word.copy_from_slice(&block[..8]);
    Ok((u64::from_be_bytes(word) % channel_count as u64) as u8)
}

/// Derives the next seed from the master key; deterministic, so all
/// synchronized nodes rotate to the same value.
pub fn rotate_seed(master_key: &AesKey, old: &HopSeed) -> HopSeed {
    let epoch = old.epoch + 1;
    let counter = CounterBlock {
        node_address: 0,
        sequence_number: 0,
        slot_index: epoch,
        domain_tag: DomainTag::Seed,
    };
    HopSeed { value: aes128_encrypt_block(master_key, &counter.to_bytes()), epoch }
}

/// Uniformly random channel drawn from the harness RNG.
///
/// Used only by a desynchronized node picking a channel to camp on; by
/// definition it cannot compute the shared sequence.
pub fn resync_channel<R: RngCore>(rng: &mut R, plan: &ChannelPlan) -> u8 {
    (rng.next_u64() % plan.channel_count as u64) as u8
}

/// Public beacon-walk channel for a slot: `slot mod N`.
///
/// This schedule is intentionally not keyed; it carries only sync
/// beacons, never data.
pub fn beacon_channel(slot: u64, plan: &ChannelPlan) -> u8 {
    (slot % plan.channel_count as u64) as u8
}

/// Hopping-sequence position of one node.
///
/// Immutable value: [`HopState::advance`] returns the successor state.
/// While a node is synchronized, `current_channel` always equals
/// `prng_index(seed, current_slot, N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HopState {
    plan: ChannelPlan,
    seed: HopSeed,
    master_key: AesKey,
    /// Seed rotation period in slots; 0 disables rotation.
    rotation_period_slots: u64,
    current_slot: u64,
    current_channel: u8,
}

impl HopState {
    pub fn new(
        plan: ChannelPlan,
        seed: HopSeed,
        master_key: AesKey,
        rotation_period_slots: u64,
        start_slot: u64,
    ) -> Self {
        let current_channel = prng_index(&seed, start_slot, plan.channel_count)
            .expect("channel plan was validated at construction");
        HopState {
            plan,
            seed,
            master_key,
            rotation_period_slots,
            current_slot: start_slot,
            current_channel,
        }
    }

    pub fn plan(&self) -> &ChannelPlan {
        &self.plan
    }

    pub fn seed(&self) -> &HopSeed {
        &self.seed
    }

    pub fn current_slot(&self) -> u64 {
        self.current_slot
    }

    pub fn current_channel(&self) -> u8 {
        self.current_channel
    }

    fn seed_for_slot(&self, slot: u64) -> HopSeed {
        if self.rotation_period_slots > 0
            && slot > self.current_slot
            && slot % self.rotation_period_slots == 0
        {
            rotate_seed(&self.master_key, &self.seed)
        } else {
            self.seed
        }
    }

    /// Channel the sequence selects for the next slot, rotation included.
    ///
    /// This is what the transmitter writes into the frame header.
    pub fn peek_next_channel(&self) -> u8 {
        let next = self.current_slot + 1;
        prng_index(&self.seed_for_slot(next), next, self.plan.channel_count)
            .expect("channel plan was validated at construction")
    }

    /// Steps to the next slot, applying a due seed rotation, and returns
    /// the new state together with its channel.
    pub fn advance(self) -> (Self, u8) {
        let next = self.current_slot + 1;
        let seed = self.seed_for_slot(next);
        let channel = prng_index(&seed, next, self.plan.channel_count)
            .expect("channel plan was validated at construction");
        (
            HopState { seed, current_slot: next, current_channel: channel, ..self },
            channel,
        )
    }

    /// Re-aligns a rejoining node onto the master's slot and seed epoch.
    ///
    /// The epoch can only be fast-forwarded; a beacon claiming an older
    /// epoch leaves the seed untouched.
    pub fn realign(self, slot: u64, seed_epoch: u64) -> Self {
        let mut seed = self.seed;
        while seed.epoch < seed_epoch {
            seed = rotate_seed(&self.master_key, &seed);
        }
        let channel = prng_index(&seed, slot, self.plan.channel_count)
            .expect("channel plan was validated at construction");
        HopState { seed, current_slot: slot, current_channel: channel, ..self }
    }
}
