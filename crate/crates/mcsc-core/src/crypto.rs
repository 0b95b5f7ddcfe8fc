//! AES-128 block cipher and the 88-bit payload cipher built on it.
//!
//! The wire frame carries an 88-bit encrypted payload inside a 128-bit
//! packet, so the payload cipher cannot be a raw block operation. It is a
//! counter-mode construction instead: one AES block is computed over a
//! [`CounterBlock`] derived from (node address, sequence number, time
//! slot), truncated to 11 bytes, and XORed with the payload. The same
//! keyed block function doubles as the PRF behind the channel-hopping
//! sequence and seed rotation; a domain tag keeps the three uses apart.
//!
//! The cipher is implemented in plain table-driven form. It is sized for
//! simulation and for the 8-bit targets this protocol is aimed at, not
//! hardened against cache-timing side channels.

use core::fmt;

use crate::error::Error;

/// AES S-box (FIPS-197 §5.1.1).
#[rustfmt::skip]
const SBOX: [u8; 256] = [
    0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b, 0xfe, 0xd7, 0xab, 0x76,
    0xca, 0x82, 0xc9, 0x7d, 0xfa, 0x59, 0x47, 0xf0, 0xad, 0xd4, 0xa2, 0xaf, 0x9c, 0xa4, 0x72, 0xc0,
    0xb7, 0xfd, 0x93, 0x26, 0x36, 0x3f, 0xf7, 0xcc, 0x34, 0xa5, 0xe5, 0xf1, 0x71, 0xd8, 0x31, 0x15,
    0x04, 0xc7, 0x23, 0xc3, 0x18, 0x96, 0x05, 0x9a, 0x07, 0x12, 0x80, 0xe2, 0xeb, 0x27, 0xb2, 0x75,
    0x09, 0x83, 0x2c, 0x1a, 0x1b, 0x6e, 0x5a, 0xa0, 0x52, 0x3b, 0xd6, 0xb3, 0x29, 0xe3, 0x2f, 0x84,
    0x53, 0xd1, 0x00, 0xed, 0x20, 0xfc, 0xb1, 0x5b, 0x6a, 0xcb, 0xbe, 0x39, 0x4a, 0x4c, 0x58, 0xcf,
    0xd0, 0xef, 0xaa, 0xfb, 0x43, 0x4d, 0x33, 0x85, 0x45, 0xf9, 0x02, 0x7f, 0x50, 0x3c, 0x9f, 0xa8,
    0x51, 0xa3, 0x40, 0x8f, 0x92, 0x9d, 0x38, 0xf5, 0xbc, 0xb6, 0xda, 0x21, 0x10, 0xff, 0xf3, 0xd2,
    0xcd, 0x0c, 0x13, 0xec, 0x5f, 0x97, 0x44, 0x17, 0xc4, 0xa7, 0x7e, 0x3d, 0x64, 0x5d, 0x19, 0x73,
    0x60, 0x81, 0x4f, 0xdc, 0x22, 0x2a, 0x90, 0x88, 0x46, 0xee, 0xb8, 0x14, 0xde, 0x5e, 0x0b, 0xdb,
    0xe0, 0x32, 0x3a, 0x0a, 0x49, 0x06, 0x24, 0x5c, 0xc2, 0xd3, 0xac, 0x62, 0x91, 0x95, 0xe4, 0x79,
    0xe7, 0xc8, 0x37, 0x6d, 0x8d, 0xd5, 0x4e, 0xa9, 0x6c, 0x56, 0xf4, 0xea, 0x65, 0x7a, 0xae, 0x08,
    0xba, 0x78, 0x25, 0x2e, 0x1c, 0xa6, 0xb4, 0xc6, 0xe8, 0xdd, 0x74, 0x1f, 0x4b, 0xbd, 0x8b, 0x8a,
    0x70, 0x3e, 0xb5, 0x66, 0x48, 0x03, 0xf6, 0x0e, 0x61, 0x35, 0x57, 0xb9, 0x86, 0xc1, 0x1d, 0x9e,
    0xe1, 0xf8, 0x98, 0x11, 0x69, 0xd9, 0x8e, 0x94, 0x9b, 0x1e, 0x87, 0xe9, 0xce, 0x55, 0x28, 0xdf,
    0x8c, 0xa1, 0x89, 0x0d, 0xbf, 0xe6, 0x42, 0x68, 0x41, 0x99, 0x2d, 0x0f, 0xb0, 0x54, 0xbb, 0x16,
];

/// Inverse S-box, derived from [`SBOX`] at compile time.
const INV_SBOX: [u8; 256] = {
    let mut inv = [0u8; 256];
    let mut i = 0;
    while i < 256 {
        inv[SBOX[i] as usize] = i as u8;
        i += 1;
    }
    inv
};

/// Round constants for the key schedule (FIPS-197 §5.2).
const RCON: [u8; 10] = [0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40, 0x80, 0x1b, 0x36];

/// Payload length in bytes: the frame reserves 88 bits for ciphertext.
pub const PAYLOAD_BYTES: usize = 11;

/// The shared 128-bit symmetric key.
///
/// Key bytes never appear in packets, logs, or `Debug` output.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct AesKey([u8; 16]);

impl AesKey {
    pub const fn new(bytes: [u8; 16]) -> Self {
        AesKey(bytes)
    }

    pub(crate) fn bytes(&self) -> &[u8; 16] {
        &self.0
    }
}

impl fmt::Debug for AesKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("AesKey(<redacted>)")
    }
}

/// Separates the three uses of the keyed block function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum DomainTag {
    /// Payload keystream for frame encryption.
    Payload = 0x01,
    /// Channel-index PRF for the hopping sequence.
    Prng = 0x02,
    /// Seed rotation.
    Seed = 0x03,
}

/// Input block for the counter-mode keystream and the hopping PRF.
///
/// Byte layout (big-endian, zero-padded to 16 bytes):
///
/// ```text
/// offset  0..2   node_address
/// offset  2..4   sequence_number
/// offset  4..12  slot_index
/// offset 12      domain_tag
/// offset 13..16  zero padding
/// ```
///
/// Within one key lifetime the slot index alone makes every block unique,
/// since slots never repeat; the address and sequence fields bind the
/// keystream to a single frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterBlock {
    pub node_address: u16,
    pub sequence_number: u16,
    pub slot_index: u64,
    pub domain_tag: DomainTag,
}

impl CounterBlock {
    pub fn to_bytes(&self) -> [u8; 16] {
        let mut block = [0u8; 16];
        block[0..2].copy_from_slice(&self.node_address.to_be_bytes());
        block[2..4].copy_from_slice(&self.sequence_number.to_be_bytes());
        block[4..12].copy_from_slice(&self.slot_index.to_be_bytes());
        block[12] = self.domain_tag as u8;
        block
    }
}

/// An 88-bit payload, plaintext or ciphertext.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Payload88([u8; PAYLOAD_BYTES]);

impl Payload88 {
    pub const fn new(bytes: [u8; PAYLOAD_BYTES]) -> Self {
        Payload88(bytes)
    }

    pub const fn zeroed() -> Self {
        Payload88([0; PAYLOAD_BYTES])
    }

    pub fn as_bytes(&self) -> &[u8; PAYLOAD_BYTES] {
        &self.0
    }

    /// Builds a payload from a slice of exactly 11 bytes.
    pub fn from_slice(bytes: &[u8]) -> Result<Self, Error> {
        if bytes.len() != PAYLOAD_BYTES {
            return Err(Error::Framing { expected: PAYLOAD_BYTES, actual: bytes.len() });
        }
        let mut out = [0u8; PAYLOAD_BYTES];
        out.copy_from_slice(bytes);
        Ok(Payload88(out))
    }
}

fn xtime(b: u8) -> u8 {
    (b << 1) ^ (((b >> 7) & 1) * 0x1b)
}

/// Multiplication in GF(2^8) with the AES reduction polynomial.
fn gmul(mut a: u8, mut b: u8) -> u8 {
    let mut p = 0u8;
    for _ in 0..8 {
        if b & 1 != 0 {
            p ^= a;
        }
        a = xtime(a);
        b >>= 1;
    }
    p
}

/// Expands a 16-byte key into the 11 round keys.
fn expand_key(key: &[u8; 16]) -> [u8; 176] {
    let mut rk = [0u8; 176];
    rk[..16].copy_from_slice(key);
    let mut i = 16;
    while i < 176 {
        let mut word = [rk[i - 4], rk[i - 3], rk[i - 2], rk[i - 1]];
        if i % 16 == 0 {
            word.rotate_left(1);
            for b in word.iter_mut() {
                *b = SBOX[*b as usize];
            }
            word[0] ^= RCON[i / 16 - 1];
        }
        for j in 0..4 {
            rk[i + j] = rk[i + j - 16] ^ word[j];
        }
        i += 4;
    }
    rk
}

fn add_round_key(state: &mut [u8; 16], rk: &[u8]) {
    for (s, k) in state.iter_mut().zip(rk) {
        *s ^= k;
    }
}

fn sub_bytes(state: &mut [u8; 16]) {
    for b in state.iter_mut() {
        *b = SBOX[*b as usize];
    }
}

fn inv_sub_bytes(state: &mut [u8; 16]) {
    for b in state.iter_mut() {
        *b = INV_SBOX[*b as usize];
    }
}

// State is kept in FIPS order: byte i sits at row i % 4, column i / 4.
// Row r therefore lives at indices r, r+4, r+8, r+12.

fn shift_rows(state: &mut [u8; 16]) {
    let s = *state;
    for r in 1..4 {
        for c in 0..4 {
            state[r + 4 * c] = s[r + 4 * ((c + r) % 4)];
        }
    }
}

fn inv_shift_rows(state: &mut [u8; 16]) {
    let s = *state;
    for r in 1..4 {
        for c in 0..4 {
            state[r + 4 * ((c + r) % 4)] = s[r + 4 * c];
        }
    }
}

fn mix_columns(state: &mut [u8; 16]) {
    for c in 0..4 {
        let col = &mut state[4 * c..4 * c + 4];
        let (a0, a1, a2, a3) = (col[0], col[1], col[2], col[3]);
        col[0] = xtime(a0) ^ xtime(a1) ^ a1 ^ a2 ^ a3;
        col[1] = a0 ^ xtime(a1) ^ xtime(a2) ^ a2 ^ a3;
        col[2] = a0 ^ a1 ^ xtime(a2) ^ xtime(a3) ^ a3;
        col[3] = xtime(a0) ^ a0 ^ a1 ^ a2 ^ xtime(a3);
    }
}

fn inv_mix_columns(state: &mut [u8; 16]) {
    for c in 0..4 {
        let col = &mut state[4 * c..4 * c + 4];
        let (a0, a1, a2, a3) = (col[0], col[1], col[2], col[3]);
        col[0] = gmul(a0, 14) ^ gmul(a1, 11) ^ gmul(a2, 13) ^ gmul(a3, 9);
        col[1] = gmul(a0, 9) ^ gmul(a1, 14) ^ gmul(a2, 11) ^ gmul(a3, 13);
        col[2] = gmul(a0, 13) ^ gmul(a1, 9) ^ gmul(a2, 14) ^ gmul(a3, 11);
        col[3] = gmul(a0, 11) ^ gmul(a1, 13) ^ gmul(a2, 9) ^ gmul(a3, 14);
    }
}

/// AES-128 forward cipher on a single block.
pub fn aes128_encrypt_block(key: &AesKey, block: &[u8; 16]) -> [u8; 16] {
    let rk = expand_key(key.bytes());
    let mut state = *block;
    add_round_key(&mut state, &rk[..16]);
    for round in 1..10 {
        sub_bytes(&mut state);
        shift_rows(&mut state);
        mix_columns(&mut state);
        add_round_key(&mut state, &rk[16 * round..16 * (round + 1)]);
    }
    sub_bytes(&mut state);
    shift_rows(&mut state);
    add_round_key(&mut state, &rk[160..176]);
    state
}

/// AES-128 inverse cipher; exact inverse of [`aes128_encrypt_block`].
pub fn aes128_decrypt_block(key: &AesKey, block: &[u8; 16]) -> [u8; 16] {
    let rk = expand_key(key.bytes());
    let mut state = *block;
    add_round_key(&mut state, &rk[160..176]);
    for round in (1..10).rev() {
        inv_shift_rows(&mut state);
        inv_sub_bytes(&mut state);
        add_round_key(&mut state, &rk[16 * round..16 * (round + 1)]);
        inv_mix_columns(&mut state);
    }
    inv_shift_rows(&mut state);
    inv_sub_bytes(&mut state);
    add_round_key(&mut state, &rk[..16]);
    state
}

/// First 88 bits of the block cipher over a counter block.
pub fn keystream88(key: &AesKey, counter: &CounterBlock) -> Payload88 {
    let block = aes128_encrypt_block(key, &counter.to_bytes());
    let mut out = [0u8; PAYLOAD_BYTES];
    out.copy_from_slice(&block[..PAYLOAD_BYTES]);
    Payload88(out)
}

/// Encrypts an 88-bit payload: `ciphertext = plaintext XOR keystream88`.
pub fn encrypt_payload(key: &AesKey, counter: &CounterBlock, plaintext: &Payload88) -> Payload88 {
    let ks = keystream88(key, counter);
    let mut out = [0u8; PAYLOAD_BYTES];
    for i in 0..PAYLOAD_BYTES {
        out[i] = plaintext.0[i] ^ ks.0[i];
    }
    Payload88(out)
}

/// Decrypts an 88-bit payload; the XOR construction makes this the same
/// computation as [`encrypt_payload`].
pub fn decrypt_payload(key: &AesKey, counter: &CounterBlock, ciphertext: &Payload88) -> Payload88 {
    encrypt_payload(key, counter, ciphertext)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fips_key() -> AesKey {
        let mut k = [0u8; 16];
        for (i, b) in k.iter_mut().enumerate() {
            *b = i as u8;
        }
        AesKey::new(k)
    }

    fn hex16(s: &str) -> [u8; 16] {
        let v = hex::decode(s).unwrap();
        let mut out = [0u8; 16];
        out.copy_from_slice(&v);
        out
    }

    #[test]
    fn fips197_appendix_c_vector() {
        let pt = hex16("00112233445566778899aabbccddeeff");
        let ct = aes128_encrypt_block(&fips_key(), &pt);
        assert_eq!(hex::encode(ct), "69c4e0d86a7b0430d8cdb78070b4c55a");
        assert_eq!(aes128_decrypt_block(&fips_key(), &ct), pt);
    }

    #[test]
    fn bitflipped_key_gives_distinct_ciphertext() {
        // Expected value computed with an independent AES implementation.
        let pt = hex16("00112233445566778899aabbccddeeff");
        let mut kb = *fips_key().bytes();
        kb[0] ^= 0x80;
        let ct = aes128_encrypt_block(&AesKey::new(kb), &pt);
        assert_eq!(hex::encode(ct), "ae175e68d1e005092e0bf7a4d354c485");
        assert_ne!(ct, aes128_encrypt_block(&fips_key(), &pt));
    }

    #[test]
    fn zero_key_zero_block() {
        let key = AesKey::new([0; 16]);
        let ct = aes128_encrypt_block(&key, &[0; 16]);
        assert_eq!(hex::encode(ct), "66e94bd4ef8a2c3b884cfa59ca342b2e");
        assert_eq!(aes128_decrypt_block(&key, &ct), [0; 16]);
    }

    #[test]
    fn encrypt_decrypt_random_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let key = AesKey::new(rng.gen());
            let block: [u8; 16] = rng.gen();
            assert_eq!(aes128_decrypt_block(&key, &aes128_encrypt_block(&key, &block)), block);
        }
    }

    #[test]
    fn counter_block_layout_is_pinned() {
        let cb = CounterBlock {
            node_address: 0xBEEF,
            sequence_number: 1,
            slot_index: 42,
            domain_tag: DomainTag::Payload,
        };
        assert_eq!(hex::encode(cb.to_bytes()), "beef0001000000000000002a01000000");
    }

    #[test]
    fn keystream_matches_independent_reference() {
        // First 11 bytes of AES(key, counter) computed externally.
        let cb = CounterBlock {
            node_address: 0xBEEF,
            sequence_number: 1,
            slot_index: 42,
            domain_tag: DomainTag::Payload,
        };
        let ks = keystream88(&fips_key(), &cb);
        assert_eq!(hex::encode(ks.as_bytes()), "e3a124da9aaaf86ecaa188");
    }

    #[test]
    fn keystream_is_block_prefix_and_deterministic() {
        let cb = CounterBlock {
            node_address: 3,
            sequence_number: 9,
            slot_index: 1234,
            domain_tag: DomainTag::Payload,
        };
        let block = aes128_encrypt_block(&fips_key(), &cb.to_bytes());
        let ks = keystream88(&fips_key(), &cb);
        assert_eq!(ks.as_bytes()[..], block[..PAYLOAD_BYTES]);
        assert_eq!(keystream88(&fips_key(), &cb), ks);
    }

    #[test]
    fn keystream_differs_when_sequence_differs() {
        let a = CounterBlock {
            node_address: 1,
            sequence_number: 0,
            slot_index: 5,
            domain_tag: DomainTag::Payload,
        };
        let b = CounterBlock { sequence_number: 1, ..a };
        assert_ne!(keystream88(&fips_key(), &a), keystream88(&fips_key(), &b));
    }

    #[test]
    fn domain_tags_separate_payload_and_prng() {
        let payload = CounterBlock {
            node_address: 1,
            sequence_number: 2,
            slot_index: 3,
            domain_tag: DomainTag::Payload,
        };
        let prng = CounterBlock { domain_tag: DomainTag::Prng, ..payload };
        assert_ne!(keystream88(&fips_key(), &payload), keystream88(&fips_key(), &prng));
    }

    #[test]
    fn zero_plaintext_yields_keystream() {
        let cb = CounterBlock {
            node_address: 7,
            sequence_number: 7,
            slot_index: 7,
            domain_tag: DomainTag::Payload,
        };
        let ct = encrypt_payload(&fips_key(), &cb, &Payload88::zeroed());
        assert_eq!(ct, keystream88(&fips_key(), &cb));
        // Same counter twice: same ciphertext.
        assert_eq!(encrypt_payload(&fips_key(), &cb, &Payload88::zeroed()), ct);
    }

    #[test]
    fn payload_roundtrip_1000_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let key = AesKey::new(rng.gen());
            let cb = CounterBlock {
                node_address: rng.gen(),
                sequence_number: rng.gen(),
                slot_index: rng.gen(),
                domain_tag: DomainTag::Payload,
            };
            let pt = Payload88::new(rng.gen());
            let ct = encrypt_payload(&key, &cb, &pt);
            assert_eq!(decrypt_payload(&key, &cb, &ct), pt);
        }
    }

    #[test]
    fn key_debug_output_is_redacted() {
        let key = AesKey::new(hex16("000102030405060708090a0b0c0d0e0f"));
        let out = format!("{key:?}");
        assert!(!out.contains("00010203"));
        assert!(out.contains("redacted"));
    }

    #[test]
    fn payload_from_slice_checks_length() {
        assert!(Payload88::from_slice(&[0u8; 11]).is_ok());
        assert_eq!(
            Payload88::from_slice(&[0u8; 10]),
            Err(Error::Framing { expected: 11, actual: 10 })
        );
    }
}
