//! Scent vocabulary, scene profiles, and the state-to-expression rules.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::Channel;
use crate::state::InteractionState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScentId {
    Bergamot,
    RoseGeranium,
    Peppermint,
    TeaTree,
    Cedarwood,
    Frankincense,
    Vetiver,
    LitseaCubeba,
}

impl ScentId {
    /// Vocabulary order; also the default channel order (channel = index + 1).
    pub const ALL: [ScentId; 8] = [
        ScentId::Bergamot,
        ScentId::RoseGeranium,
        ScentId::Peppermint,
        ScentId::TeaTree,
        ScentId::Cedarwood,
        ScentId::Frankincense,
        ScentId::Vetiver,
        ScentId::LitseaCubeba,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Config key, e.g. `rose_geranium`.
    pub fn key(self) -> &'static str {
        match self {
            ScentId::Bergamot => "bergamot",
            ScentId::RoseGeranium => "rose_geranium",
            ScentId::Peppermint => "peppermint",
            ScentId::TeaTree => "tea_tree",
            ScentId::Cedarwood => "cedarwood",
            ScentId::Frankincense => "frankincense",
            ScentId::Vetiver => "vetiver",
            ScentId::LitseaCubeba => "litsea_cubeba",
        }
    }

    pub fn info(self) -> &'static Scent {
        &VOCABULARY[self.index()]
    }

    /// Accepts the config key, the display name, or the name without its
    /// qualifier ("Cedarwood" for "Himalayan cedarwood"), case-insensitively.
    pub fn parse(name: &str) -> Option<ScentId> {
        let norm = name.trim().to_ascii_lowercase().replace([' ', '-'], "_");
        ScentId::ALL
            .into_iter()
            .find(|id| norm == id.key() || norm == id.info().name.to_ascii_lowercase().replace(' ', "_"))
    }
}

impl fmt::Display for ScentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Calming,
    Energizing,
    Balancing,
    Pleasantness,
    Cleansing,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Calming => "calming",
            Role::Energizing => "energizing",
            Role::Balancing => "balancing",
            Role::Pleasantness => "pleasantness",
            Role::Cleansing => "cleansing",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scent {
    pub id: ScentId,
    pub name: &'static str,
    pub family: &'static str,
    pub scene_metaphor: &'static str,
    pub atmospheric_quality: &'static str,
    /// Interaction roles, primary first.
    pub roles: &'static [Role],
}

impl Scent {
    pub fn primary_role(&self) -> Role {
        self.roles[0]
    }

    pub fn default_channel(&self) -> Channel {
        Channel::new(self.id.index() as u8 + 1).expect("eight scents")
    }
}

static VOCABULARY: [Scent; 8] = [
    Scent {
        id: ScentId::Bergamot,
        name: "Bergamot",
        family: "Citrus",
        scene_metaphor: "Sunlit grove / orchard edge",
        atmospheric_quality: "Bright, pleasant, lightly uplifting",
        roles: &[Role::Pleasantness],
    },
    Scent {
        id: ScentId::RoseGeranium,
        name: "Rose geranium",
        family: "Floral-green",
        scene_metaphor: "Garden / soft grassland bloom",
        atmospheric_quality: "Soft, rounded, gently balancing",
        roles: &[Role::Balancing, Role::Pleasantness],
    },
    Scent {
        id: ScentId::Peppermint,
        name: "Peppermint",
        family: "Herbal",
        scene_metaphor: "Cool open air / sea-breeze-like freshness",
        atmospheric_quality: "Fresh, crisp, activating",
        roles: &[Role::Energizing],
    },
    Scent {
        id: ScentId::TeaTree,
        name: "Tea tree",
        family: "Leafy-herbal",
        scene_metaphor: "Rain-cleared air / coastal freshness",
        atmospheric_quality: "Clean, clarifying, resetting",
        roles: &[Role::Cleansing],
    },
    Scent {
        id: ScentId::Cedarwood,
        name: "Himalayan cedarwood",
        family: "Woody",
        scene_metaphor: "Forest / wooded shelter",
        atmospheric_quality: "Grounding, warm, steady",
        roles: &[Role::Calming],
    },
    Scent {
        id: ScentId::Frankincense,
        name: "Frankincense",
        family: "Resinous-balsamic",
        scene_metaphor: "Quiet forest interior / still sanctuary",
        atmospheric_quality: "Centering, composed, reflective",
        roles: &[Role::Calming, Role::Balancing],
    },
    Scent {
        id: ScentId::Vetiver,
        name: "Vetiver",
        family: "Rooty-earthy",
        scene_metaphor: "Forest floor / deep terrain",
        atmospheric_quality: "Deep, anchoring, stabilizing",
        roles: &[Role::Calming],
    },
    Scent {
        id: ScentId::LitseaCubeba,
        name: "Litsea cubeba",
        family: "Seed profile",
        scene_metaphor: "Bright meadow / citrus field edge",
        atmospheric_quality: "Vivid, lively, gently stimulating",
        roles: &[Role::Energizing, Role::Pleasantness],
    },
];

pub fn vocabulary() -> &'static [Scent; 8] {
    &VOCABULARY
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Forest,
    OpenAir,
    Garden,
    Meadow,
}

impl Profile {
    pub const ALL: [Profile; 4] = [Profile::Forest, Profile::OpenAir, Profile::Garden, Profile::Meadow];

    pub fn members(self) -> &'static [ScentId] {
        match self {
            Profile::Forest => &[ScentId::Cedarwood, ScentId::Frankincense, ScentId::Vetiver],
            Profile::OpenAir => &[ScentId::Peppermint, ScentId::TeaTree],
            Profile::Garden => &[ScentId::RoseGeranium, ScentId::Bergamot],
            Profile::Meadow => &[ScentId::Bergamot, ScentId::RoseGeranium, ScentId::LitseaCubeba],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Profile::Forest => "forest",
            Profile::OpenAir => "open_air",
            Profile::Garden => "garden",
            Profile::Meadow => "meadow",
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Intensity {
    Low,
    LowMedium,
    Medium,
    MediumHigh,
}

impl Intensity {
    pub fn as_str(self) -> &'static str {
        match self {
            Intensity::Low => "low",
            Intensity::LowMedium => "low_medium",
            Intensity::Medium => "medium",
            Intensity::MediumHigh => "medium_high",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rhythm {
    SingleBrief,
    RepeatedLowFrequency,
    BriefRepeatIfNeeded,
}

impl Rhythm {
    pub fn as_str(self) -> &'static str {
        match self {
            Rhythm::SingleBrief => "single_brief",
            Rhythm::RepeatedLowFrequency => "repeated_low_frequency",
            Rhythm::BriefRepeatIfNeeded => "brief_repeat_if_needed",
        }
    }
}

/// Profile, intensity and rhythm for one interaction state. `candidates` is
/// the profile's member set, possibly narrowed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ScentExpression {
    pub profile: Profile,
    pub candidates: &'static [ScentId],
    pub intensity: Intensity,
    pub rhythm: Rhythm,
}

const FOREST_LIGHT: &[ScentId] = &[ScentId::Cedarwood, ScentId::Frankincense];

/// The rule table. Neutral maps to no output.
pub fn expression_for(state: InteractionState) -> Option<ScentExpression> {
    use InteractionState::*;
    let (profile, candidates, intensity, rhythm) = match state {
        ElevatedStressPersistent => {
            (Profile::Forest, Profile::Forest.members(), Intensity::MediumHigh, Rhythm::RepeatedLowFrequency)
        }
        ElevatedStressShort => (Profile::Forest, FOREST_LIGHT, Intensity::LowMedium, Rhythm::SingleBrief),
        Recovery => (Profile::Garden, Profile::Garden.members(), Intensity::Low, Rhythm::SingleBrief),
        LowAlertness => (Profile::OpenAir, Profile::OpenAir.members(), Intensity::Medium, Rhythm::BriefRepeatIfNeeded),
        MildImbalance => (Profile::Meadow, Profile::Meadow.members(), Intensity::Low, Rhythm::SingleBrief),
        Neutral => return None,
    };
    Some(ScentExpression { profile, candidates, intensity, rhythm })
}

/// Release history used by the variation policy.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionHistory {
    pub last_released_scent: Option<ScentId>,
    pub counts: [u32; 8],
}

impl SelectionHistory {
    pub fn count(&self, id: ScentId) -> u32 {
        self.counts[id.index()]
    }
}

/// Picks the least-released candidate, never repeating the previous scent
/// unless it is the only candidate. Ties are broken by a generator seeded
/// from `seed`.
pub fn select_scent(expr: &ScentExpression, history: &SelectionHistory, seed: u64) -> (ScentId, SelectionHistory) {
    let pool: Vec<ScentId> = match expr.candidates {
        [only] => vec![*only],
        all => all.iter().copied().filter(|&id| Some(id) != history.last_released_scent).collect(),
    };
    let min = pool.iter().map(|&id| history.count(id)).min().expect("profiles are non-empty");
    let tied: Vec<ScentId> = pool.into_iter().filter(|&id| history.count(id) == min).collect();
    let pick =
        if tied.len() == 1 { tied[0] } else { tied[ChaCha8Rng::seed_from_u64(seed).random_range(0..tied.len())] };

    let mut next = history.clone();
    next.counts[pick.index()] += 1;
    next.last_released_scent = Some(pick);
    (pick, next)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelMapError {
    #[error("channel {channel} assigned to both {first} and {second}")]
    Duplicate { channel: Channel, first: ScentId, second: ScentId },
}

/// Scent-to-channel assignment; always a permutation of 1..=8.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelMap {
    by_scent: [Channel; 8],
}

impl Default for ChannelMap {
    fn default() -> Self {
        Self { by_scent: VOCABULARY.each_ref().map(Scent::default_channel) }
    }
}

impl ChannelMap {
    /// Applies overrides on top of the vocabulary-order default.
    pub fn with_overrides(overrides: impl IntoIterator<Item = (ScentId, Channel)>) -> Result<Self, ChannelMapError> {
        let mut map = Self::default();
        for (id, ch) in overrides {
            map.by_scent[id.index()] = ch;
        }
        let mut owner: [Option<ScentId>; 8] = [None; 8];
        for id in ScentId::ALL {
            let ch = map.by_scent[id.index()];
            if let Some(first) = owner[ch.index()] {
                return Err(ChannelMapError::Duplicate { channel: ch, first, second: id });
            }
            owner[ch.index()] = Some(id);
        }
        Ok(map)
    }

    pub fn channel(&self, id: ScentId) -> Channel {
        self.by_scent[id.index()]
    }

    pub fn scent_on(&self, ch: Channel) -> ScentId {
        ScentId::ALL.into_iter().find(|&id| self.channel(id) == ch).expect("channel map is a permutation")
    }
}
