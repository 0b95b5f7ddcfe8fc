//! Core protocol logic for secure multi-channel radio communication.
//!
//! This crate implements the node-side building blocks of a hopping,
//! AES-secured 2.4 GHz link and is kept `no_std` (and allocation-free)
//! so the same code can run on the kind of microcontroller the protocol
//! targets. Everything here is a pure function of its inputs; the
//! companion `mcsc-sim` crate supplies the radio medium, traffic and
//! adversary models, and the scenario harness.
//!
//! Modules:
//!
//! - [`crypto`]: AES-128 block cipher, the counter-block layout, and the
//!   88-bit payload keystream.
//! - [`hopping`]: the keyed pseudo-random channel sequence shared by all
//!   synchronized nodes, seed rotation, and the resync fallback.
//! - [`timesync`]: drifting clock model, the offset/drift equations, and
//!   master-beacon processing.
//! - [`packet`]: the 128-bit wire frame, bit-exact serialization, and the
//!   receive path with replay filtering.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

pub mod crypto;
pub mod error;
pub mod hopping;
pub mod packet;
pub mod timesync;

pub use error::Error;
