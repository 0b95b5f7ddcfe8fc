//! Error type shared by the protocol modules.

use core::fmt;

/// Errors reported by the protocol core.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Error {
    /// A channel plan must hold between 1 and 256 channels.
    InvalidChannelPlan { channel_count: u16 },
    /// A channel index fell outside the active plan.
    ChannelOutOfRange { index: u8, channel_count: u16 },
    /// A timing parameter was non-positive or otherwise unusable.
    InvalidTiming { parameter: &'static str },
    /// A wire buffer did not hold exactly one frame.
    Framing { expected: usize, actual: usize },
    /// The frame repeats an (address, sequence) pair inside the replay window.
    ReplayRejected,
    /// The node is not synchronized and must not transmit.
    NotSynchronized,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidChannelPlan { channel_count } => {
                write!(f, "invalid channel plan: {channel_count} channels (need 1..=256)")
            }
            Error::ChannelOutOfRange { index, channel_count } => {
                write!(f, "channel index {index} out of range for {channel_count} channels")
            }
            Error::InvalidTiming { parameter } => {
                write!(f, "invalid timing parameter: {parameter}")
            }
            Error::Framing { expected, actual } => {
                write!(f, "framing error: expected {expected} bytes, got {actual}")
            }
            Error::ReplayRejected => write!(f, "replayed frame rejected"),
            Error::NotSynchronized => write!(f, "node is not synchronized"),
        }
    }
}

#[cfg(test)]
impl std::error::Error for Error {}
