use std::fmt;

use serde::{Deserialize, Serialize};

/// Atomizer channel on the eight-channel control board, always in `1..=8`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Channel(u8);

impl Channel {
    pub const COUNT: usize = 8;

    pub fn new(n: u8) -> Option<Self> {
        (1..=Self::COUNT as u8).contains(&n).then_some(Self(n))
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Zero-based index, handy for fixed-size tables.
    pub fn index(self) -> usize {
        usize::from(self.0 - 1)
    }

    pub fn all() -> impl Iterator<Item = Channel> {
        (1..=Self::COUNT as u8).map(Channel)
    }
}

impl TryFrom<u8> for Channel {
    type Error = String;

    fn try_from(n: u8) -> Result<Self, Self::Error> {
        Channel::new(n).ok_or_else(|| format!("channel {n} outside 1..=8"))
    }
}

impl From<Channel> for u8 {
    fn from(c: Channel) -> u8 {
        c.0
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
