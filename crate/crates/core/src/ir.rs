//! Infrared command framing for the atomizer control board.
//!
//! Frames use NEC-style pulse-distance coding on a 38 kHz carrier: a
//! 9000/4500 µs leader, 32 data bits sent most-significant first (mark
//! 560 µs, space 560 µs for 0 and 1690 µs for 1), and a 560 µs stop mark.
//! The code words themselves are device-specific and come from the config.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::Channel;
use crate::scheduler::ReleaseCommand;
use crate::Millis;

pub const CARRIER_HZ: u32 = 38_000;
pub const LEADER: (u32, u32) = (9000, 4500);
pub const BIT_MARK_US: u32 = 560;
pub const ZERO_SPACE_US: u32 = 560;
pub const ONE_SPACE_US: u32 = 1690;
/// Leader, 32 data bits, stop.
pub const FRAME_PAIRS: usize = 34;
pub const DEFAULT_TOLERANCE_US: u32 = 150;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DeviceCommand {
    Power,
    Shutdown,
    SelectChannel(Channel),
}

impl DeviceCommand {
    pub const COUNT: usize = 10;

    pub fn all() -> impl Iterator<Item = DeviceCommand> {
        [DeviceCommand::Power, DeviceCommand::Shutdown]
            .into_iter()
            .chain(Channel::all().map(DeviceCommand::SelectChannel))
    }

    fn slot(self) -> usize {
        match self {
            DeviceCommand::Power => 0,
            DeviceCommand::Shutdown => 1,
            DeviceCommand::SelectChannel(ch) => 2 + ch.index(),
        }
    }

    /// Config key: `power`, `shutdown`, `channel_1` .. `channel_8`.
    pub fn key(self) -> String {
        match self {
            DeviceCommand::Power => "power".to_owned(),
            DeviceCommand::Shutdown => "shutdown".to_owned(),
            DeviceCommand::SelectChannel(ch) => format!("channel_{ch}"),
        }
    }

    pub fn parse(key: &str) -> Option<DeviceCommand> {
        match key {
            "power" => Some(DeviceCommand::Power),
            "shutdown" => Some(DeviceCommand::Shutdown),
            _ => key
                .strip_prefix("channel_")
                .and_then(|n| n.parse().ok())
                .and_then(Channel::new)
                .map(DeviceCommand::SelectChannel),
        }
    }
}

impl fmt::Display for DeviceCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeTableError {
    #[error("code {code:#010x} assigned to both {first} and {second}")]
    DuplicateCode { code: u32, first: DeviceCommand, second: DeviceCommand },
}

/// Total, injective map from the ten device commands to 32-bit code words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IrCodeTable {
    codes: [u32; DeviceCommand::COUNT],
}

/// NEC layout `addr, !addr, cmd, !cmd` with address 0x00. Placeholders only:
/// real boards need the codes captured from their own remote.
const fn nec_word(cmd: u8) -> u32 {
    0x00FF_0000 | ((cmd as u32) << 8) | (!cmd as u32)
}

impl Default for IrCodeTable {
    fn default() -> Self {
        Self {
            codes: [
                nec_word(0x45),
                nec_word(0x47),
                nec_word(0x0C),
                nec_word(0x18),
                nec_word(0x5E),
                nec_word(0x08),
                nec_word(0x1C),
                nec_word(0x5A),
                nec_word(0x42),
                nec_word(0x52),
            ],
        }
    }
}

impl IrCodeTable {
    /// Builds a table from overrides on top of the placeholder defaults.
    pub fn with_overrides(overrides: impl IntoIterator<Item = (DeviceCommand, u32)>) -> Result<Self, CodeTableError> {
        let mut table = Self::default();
        for (cmd, code) in overrides {
            table.codes[cmd.slot()] = code;
        }
        let cmds: Vec<DeviceCommand> = DeviceCommand::all().collect();
        for (i, &a) in cmds.iter().enumerate() {
            for &b in &cmds[i + 1..] {
                if table.code(a) == table.code(b) {
                    return Err(CodeTableError::DuplicateCode { code: table.code(a), first: a, second: b });
                }
            }
        }
        Ok(table)
    }

    pub fn code(&self, cmd: DeviceCommand) -> u32 {
        self.codes[cmd.slot()]
    }

    pub fn lookup(&self, code: u32) -> Option<DeviceCommand> {
        DeviceCommand::all().find(|&c| self.code(c) == code)
    }
}

/// Pulse-timing representation of one command as (mark, space) pairs in µs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrFrame {
    pub carrier_hz: u32,
    pub pulses: Vec<(u32, u32)>,
}

impl IrFrame {
    pub fn duration_us(&self) -> u64 {
        self.pulses.iter().map(|&(m, s)| u64::from(m) + u64::from(s)).sum()
    }

    /// One `mark_us,space_us` line per pulse pair.
    pub fn to_export(&self) -> String {
        let mut out = String::with_capacity(self.pulses.len() * 10);
        for (m, s) in &self.pulses {
            let _ = writeln!(out, "{m},{s}");
        }
        out
    }

    /// Reads the export format back; the carrier is assumed to be 38 kHz.
    pub fn parse_export(text: &str) -> Result<IrFrame, DecodeError> {
        let mut pulses = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let malformed = || DecodeError::Malformed {
                pair: pulses.len(),
                reason: format!("line {}: expected mark_us,space_us", i + 1),
            };
            let (m, s) = line.split_once(',').ok_or_else(malformed)?;
            let m = m.trim().parse().map_err(|_| malformed())?;
            let s = s.trim().parse().map_err(|_| malformed())?;
            pulses.push((m, s));
        }
        Ok(IrFrame { carrier_hz: CARRIER_HZ, pulses })
    }
}

pub fn encode_word(word: u32) -> IrFrame {
    let mut pulses = Vec::with_capacity(FRAME_PAIRS);
    pulses.push(LEADER);
    for bit in (0..32).rev() {
        let space = if word >> bit & 1 == 1 { ONE_SPACE_US } else { ZERO_SPACE_US };
        pulses.push((BIT_MARK_US, space));
    }
    pulses.push((BIT_MARK_US, 0));
    IrFrame { carrier_hz: CARRIER_HZ, pulses }
}

pub fn encode_frame(cmd: DeviceCommand, table: &IrCodeTable) -> IrFrame {
    encode_word(table.code(cmd))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("malformed frame at pair {pair}: {reason}")]
    Malformed { pair: usize, reason: String },
    #[error("code {0:#010x} is not in the code table")]
    UnknownCode(u32),
}

fn within(actual: u32, nominal: u32, tolerance: u32) -> bool {
    actual.abs_diff(nominal) <= tolerance
}

/// Recovers the 32-bit word from a frame.
///
/// Each data space is classified by its nearest nominal value and must lie
/// within `tolerance_us` of it, so a frame that decodes at some tolerance
/// decodes identically at any larger one. The trailing space after the stop
/// mark is not checked.
pub fn decode_word(frame: &IrFrame, tolerance_us: u32) -> Result<u32, DecodeError> {
    let malformed = |pair: usize, reason: String| DecodeError::Malformed { pair, reason };
    if frame.carrier_hz != CARRIER_HZ {
        return Err(malformed(0, format!("carrier {} Hz, expected {CARRIER_HZ}", frame.carrier_hz)));
    }
    if frame.pulses.len() != FRAME_PAIRS {
        return Err(malformed(
            frame.pulses.len().min(FRAME_PAIRS),
            format!("{} pulse pairs, expected {FRAME_PAIRS}", frame.pulses.len()),
        ));
    }
    let (lm, ls) = frame.pulses[0];
    if !within(lm, LEADER.0, tolerance_us) || !within(ls, LEADER.1, tolerance_us) {
        return Err(malformed(0, format!("leader ({lm}, {ls}) outside tolerance")));
    }
    let mut word = 0u32;
    for (i, &(mark, space)) in frame.pulses[1..33].iter().enumerate() {
        let pair = i + 1;
        if !within(mark, BIT_MARK_US, tolerance_us) {
            return Err(malformed(pair, format!("bit mark {mark} µs outside tolerance")));
        }
        let one = space.abs_diff(ONE_SPACE_US) < space.abs_diff(ZERO_SPACE_US);
        let nominal = if one { ONE_SPACE_US } else { ZERO_SPACE_US };
        if !within(space, nominal, tolerance_us) {
            return Err(malformed(pair, format!("bit space {space} µs outside tolerance")));
        }
        word = word << 1 | u32::from(one);
    }
    let (stop, _) = frame.pulses[33];
    if !within(stop, BIT_MARK_US, tolerance_us) {
        return Err(malformed(33, format!("stop mark {stop} µs outside tolerance")));
    }
    Ok(word)
}

pub fn decode_frame(frame: &IrFrame, table: &IrCodeTable, tolerance_us: u32) -> Result<DeviceCommand, DecodeError> {
    let word = decode_word(frame, tolerance_us)?;
    table.lookup(word).ok_or(DecodeError::UnknownCode(word))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TimedCommand {
    pub at: Millis,
    pub command: DeviceCommand,
}

/// Select and power on at the release start, shut down at its end. Duty is
/// applied by the board's PWM stage and is not part of the IR stream.
pub fn command_sequence_for(release: &ReleaseCommand) -> [TimedCommand; 3] {
    [
        TimedCommand { at: release.start, command: DeviceCommand::SelectChannel(release.channel) },
        TimedCommand { at: release.start, command: DeviceCommand::Power },
        TimedCommand { at: release.end(), command: DeviceCommand::Shutdown },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scent::ScentId;
    use crate::state::InteractionState;

    /// Bit expansion written directly from the framing rule.
    fn oracle(word: u32) -> Vec<(u32, u32)> {
        let mut v = vec![(9000, 4500)];
        let bits = format!("{word:032b}");
        for c in bits.chars() {
            v.push((560, if c == '1' { 1690 } else { 560 }));
        }
        v.push((560, 0));
        v
    }

    #[test]
    fn all_zero_and_all_one_words() {
        let z = encode_word(0);
        assert_eq!(z.pulses.len(), 34);
        assert!(z.pulses[1..33].iter().all(|&p| p == (560, 560)));
        assert_eq!(z.pulses[33], (560, 0));
        let o = encode_word(u32::MAX);
        assert!(o.pulses[1..33].iter().all(|&p| p == (560, 1690)));
        assert_eq!(o.carrier_hz, 38_000);
    }

    #[test]
    fn alternating_word_matches_oracle() {
        let f = encode_word(0xA0A0_A0A0);
        assert_eq!(f.pulses, oracle(0xA0A0_A0A0));
        // MSB first: 0xA = 1010
        assert_eq!(&f.pulses[1..5], &[(560, 1690), (560, 560), (560, 1690), (560, 560)]);
    }

    #[test]
    fn roundtrip_default_table() {
        let t = IrCodeTable::default();
        for cmd in DeviceCommand::all() {
            assert_eq!(decode_frame(&encode_frame(cmd, &t), &t, DEFAULT_TOLERANCE_US), Ok(cmd));
        }
    }

    #[test]
    fn leader_out_of_tolerance() {
        let t = IrCodeTable::default();
        let mut f = encode_frame(DeviceCommand::Power, &t);
        f.pulses[0].0 = 8000;
        assert!(matches!(decode_frame(&f, &t, 150), Err(DecodeError::Malformed { pair: 0, .. })));
    }

    #[test]
    fn unknown_code() {
        let t = IrCodeTable::default();
        let f = encode_word(0xDEAD_BEEF);
        assert_eq!(decode_frame(&f, &t, 150), Err(DecodeError::UnknownCode(0xDEAD_BEEF)));
    }

    #[test]
    fn jittered_frame_decodes() {
        let t = IrCodeTable::default();
        let mut f = encode_frame(DeviceCommand::SelectChannel(Channel::new(4).unwrap()), &t);
        for (i, p) in f.pulses.iter_mut().enumerate() {
            let d = if i % 2 == 0 { 100 } else { 0 };
            p.0 -= d.min(p.0);
            p.1 += d;
        }
        assert_eq!(decode_frame(&f, &t, 150), Ok(DeviceCommand::SelectChannel(Channel::new(4).unwrap())));
        assert!(decode_frame(&f, &t, 50).is_err());
    }

    #[test]
    fn export_roundtrip() {
        let f = encode_word(0x1234_5678);
        let text = f.to_export();
        assert_eq!(text.lines().count(), 34);
        assert_eq!(text.lines().next(), Some("9000,4500"));
        assert_eq!(IrFrame::parse_export(&text).unwrap(), f);
        assert!(IrFrame::parse_export("9000;4500").is_err());
    }

    #[test]
    fn code_table_rejects_duplicates() {
        let dup =
            IrCodeTable::with_overrides([(DeviceCommand::Shutdown, IrCodeTable::default().code(DeviceCommand::Power))]);
        assert!(matches!(dup, Err(CodeTableError::DuplicateCode { .. })));
        let t = IrCodeTable::with_overrides([(DeviceCommand::Power, 0x1)]).unwrap();
        assert_eq!(t.lookup(0x1), Some(DeviceCommand::Power));
    }

    #[test]
    fn command_keys() {
        for cmd in DeviceCommand::all() {
            assert_eq!(DeviceCommand::parse(&cmd.key()), Some(cmd));
        }
        assert_eq!(DeviceCommand::parse("channel_9"), None);
        assert_eq!(DeviceCommand::all().count(), 10);
    }

    #[test]
    fn release_command_sequence() {
        let r = ReleaseCommand {
            start: 1000,
            channel: Channel::new(3).unwrap(),
            duty: 0.3,
            duration_ms: 8000,
            cause: InteractionState::Recovery,
            scent: ScentId::Peppermint,
        };
        let seq = command_sequence_for(&r);
        assert_eq!(seq[0].command, DeviceCommand::SelectChannel(Channel::new(3).unwrap()));
        assert_eq!(seq[1], TimedCommand { at: 1000, command: DeviceCommand::Power });
        assert_eq!(seq[2], TimedCommand { at: 9000, command: DeviceCommand::Shutdown });
    }
}
