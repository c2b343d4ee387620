//! Feature extraction over five families: session, reformulation, ASR,
//! NLU and LG.
//!
//! Features computed for both utterances carry a `_u1` / `_u2` suffix.
//! Entry order is fixed by [`FeatureSpace::build`]: families in
//! declaration order, then the order listed in each family's builder.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{ExchangeRecord, InputType, Utterance};
use crate::textops::{self, CorrectionType, Tokenizer, WhitespaceTokenizer};

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("feature config: {0}")]
    Config(String),
    #[error("record {id:?}: intent {intent:?} is not in the intent vocabulary")]
    UnknownIntent { id: String, intent: String },
    #[error("expected {expected} features, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("standardizer needs at least one vector")]
    EmptyFitSet,
}

pub type Result<T, E = FeatureError> = std::result::Result<T, E>;

/// Maximum encoded interval, seconds.
pub const INTERVAL_CAP_S: f64 = 1800.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Session,
    Reformulation,
    Asr,
    Nlu,
    Lg,
}

impl Family {
    pub const ALL: [Family; 5] = [Self::Session, Self::Reformulation, Self::Asr, Self::Nlu, Self::Lg];
    pub const BASELINE: [Family; 2] = [Self::Session, Self::Reformulation];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Session => "session",
            Self::Reformulation => "reformulation",
            Self::Asr => "asr",
            Self::Nlu => "nlu",
            Self::Lg => "lg",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Session => "Session",
            Self::Reformulation => "Reformulation",
            Self::Asr => "ASR",
            Self::Nlu => "NLU",
            Self::Lg => "LG",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| FeatureError::Config(format!("unknown feature family {s:?}")))
    }
}

/// Parses a comma-separated family list such as `"session,reformulation"`.
pub fn parse_families(list: &str) -> Result<BTreeSet<Family>> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DialogAct {
    Praise,
    Thanking,
    Backchannel,
    Accept,
    Abuse,
    Reject,
    Idu,
}

impl DialogAct {
    pub const ALL: [DialogAct; 7] = [
        Self::Praise,
        Self::Thanking,
        Self::Backchannel,
        Self::Accept,
        Self::Abuse,
        Self::Reject,
        Self::Idu,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Self::Praise => "praise",
            Self::Thanking => "thanking",
            Self::Backchannel => "backchannel",
            Self::Accept => "accept",
            Self::Abuse => "abuse",
            Self::Reject => "reject",
            Self::Idu => "idu",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Praise => "Praise",
            Self::Thanking => "Thanking",
            Self::Backchannel => "Backchannel",
            Self::Accept => "Accept",
            Self::Abuse => "Abuse",
            Self::Reject => "Reject",
            Self::Idu => "IDU",
        }
    }

    fn from_key(key: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.key() == key)
    }

    /// Small English lexicon used when no config file is given.
    pub fn default_phrases(self) -> &'static [&'static str] {
        match self {
            Self::Praise => &["wow", "great", "awesome", "amazing"],
            Self::Thanking => &["thanks", "thank you"],
            Self::Backchannel => &["i see", "yeah", "uh huh"],
            Self::Accept => &["yes", "exactly", "right"],
            Self::Abuse => &["shit", "shut up", "stupid"],
            Self::Reject => &["no", "not like that", "wrong"],
            Self::Idu => &["what do you mean", "i don't understand"],
        }
    }
}

pub const DEFAULT_INTENTS: [&str; 8] = [
    "weather",
    "search",
    "app_launch",
    "chat",
    "device_control",
    "sing_song",
    "dictionary",
    "alarm",
];

/// On-disk feature-space configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpaceConfig {
    pub intents: Vec<String>,
    /// Act key (`praise`, `thanking`, ...) to phrases. Missing keys mean an
    /// empty phrase list.
    #[serde(default)]
    pub dialog_acts: BTreeMap<String, Vec<String>>,
    #[serde(default = "all_family_names")]
    pub families: Vec<String>,
}

fn all_family_names() -> Vec<String> {
    Family::ALL.iter().map(|f| f.as_str().to_string()).collect()
}

impl Default for FeatureSpaceConfig {
    fn default() -> Self {
        Self {
            intents: DEFAULT_INTENTS.iter().map(|s| s.to_string()).collect(),
            dialog_acts: DialogAct::ALL
                .iter()
                .map(|a| {
                    (
                        a.key().to_string(),
                        a.default_phrases().iter().map(|s| s.to_string()).collect(),
                    )
                })
                .collect(),
            families: all_family_names(),
        }
    }
}

impl FeatureSpaceConfig {
    pub fn with_families<I: IntoIterator<Item = Family>>(mut self, families: I) -> Self {
        let set: BTreeSet<Family> = families.into_iter().collect();
        self.families = set.iter().map(|f| f.as_str().to_string()).collect();
        self
    }

    pub fn family_set(&self) -> Result<BTreeSet<Family>> {
        self.families.iter().map(|s| s.parse()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    U1,
    U2,
}

impl Side {
    const BOTH: [Side; 2] = [Side::U1, Side::U2];

    fn suffix(self) -> &'static str {
        match self {
            Side::U1 => "_u1",
            Side::U2 => "_u2",
        }
    }

    fn of(self, r: &ExchangeRecord) -> &Utterance {
        match self {
            Side::U1 => &r.u1,
            Side::U2 => &r.u2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    CharLen(Side),
    WordLen(Side),
    InputType(Side),
    Interval,
    EditDistance,
    Correction(CorrectionType),
    CommonWords,
    Voice2Text,
    Text2Voice,
    AsrConf(Side),
    VoiceLen(Side),
    SameIntent,
    DifferentIntent,
    DifferentSlot,
    IntentType(usize, Side),
    DialogAct(DialogAct, Side),
}

impl Kind {
    fn is_continuous(self) -> bool {
        matches!(
            self,
            Kind::CharLen(_)
                | Kind::WordLen(_)
                | Kind::Interval
                | Kind::EditDistance
                | Kind::CommonWords
                | Kind::AsrConf(_)
                | Kind::VoiceLen(_)
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureEntry {
    pub name: String,
    pub family: Family,
    pub continuous: bool,
    kind: Kind,
}

/// Named, ordered registry of feature entries.
#[derive(Debug, Clone)]
pub struct FeatureSpace {
    entries: Vec<FeatureEntry>,
    intents: Vec<String>,
    lexicon: BTreeMap<DialogAct, Vec<String>>,
    families: BTreeSet<Family>,
    tokenizer: Arc<dyn Tokenizer>,
}

impl FeatureSpace {
    pub fn build(config: &FeatureSpaceConfig) -> Result<Self> {
        Self::build_with_tokenizer(config, Arc::new(WhitespaceTokenizer))
    }

    pub fn build_with_tokenizer(config: &FeatureSpaceConfig, tokenizer: Arc<dyn Tokenizer>) -> Result<Self> {
        if config.intents.is_empty() {
            return Err(FeatureError::Config("intent vocabulary is empty".into()));
        }
        let mut seen = BTreeSet::new();
        for intent in &config.intents {
            if intent.trim().is_empty() || !seen.insert(intent.as_str()) {
                return Err(FeatureError::Config(format!("bad or duplicate intent {intent:?}")));
            }
        }
        let mut lexicon: BTreeMap<DialogAct, Vec<String>> = DialogAct::ALL.iter().map(|&a| (a, Vec::new())).collect();
        for (key, phrases) in &config.dialog_acts {
            let act = DialogAct::from_key(key)
                .ok_or_else(|| FeatureError::Config(format!("unknown dialog act type {key:?}")))?;
            lexicon.insert(
                act,
                phrases
                    .iter()
                    .map(|p| p.trim().to_lowercase())
                    .filter(|p| !p.is_empty())
                    .collect(),
            );
        }
        let families = config.family_set()?;
        if families.is_empty() {
            return Err(FeatureError::Config("no feature families enabled".into()));
        }

        let mut entries = Vec::new();
        let mut push = |family: Family, name: String, kind: Kind| {
            if families.contains(&family) {
                entries.push(FeatureEntry {
                    name,
                    family,
                    continuous: kind.is_continuous(),
                    kind,
                });
            }
        };
        for s in Side::BOTH {
            push(Family::Session, format!("CharLen{}", s.suffix()), Kind::CharLen(s));
        }
        for s in Side::BOTH {
            push(Family::Session, format!("WordLen{}", s.suffix()), Kind::WordLen(s));
        }
        for s in Side::BOTH {
            push(Family::Session, format!("InputType{}", s.suffix()), Kind::InputType(s));
        }
        push(Family::Session, "Interval".into(), Kind::Interval);

        push(Family::Reformulation, "EditDistance".into(), Kind::EditDistance);
        for t in CorrectionType::ALL {
            push(Family::Reformulation, format!("Correction({t})"), Kind::Correction(t));
        }
        push(Family::Reformulation, "CommonWords".into(), Kind::CommonWords);
        push(Family::Reformulation, "Voice2Text".into(), Kind::Voice2Text);
        push(Family::Reformulation, "Text2Voice".into(), Kind::Text2Voice);

        for s in Side::BOTH {
            push(Family::Asr, format!("ASRConf{}", s.suffix()), Kind::AsrConf(s));
        }
        for s in Side::BOTH {
            push(Family::Asr, format!("VoiceLen{}", s.suffix()), Kind::VoiceLen(s));
        }

        push(Family::Nlu, "SameIntent".into(), Kind::SameIntent);
        push(Family::Nlu, "DifferentIntent".into(), Kind::DifferentIntent);
        push(Family::Nlu, "DifferentSlot".into(), Kind::DifferentSlot);
        for s in Side::BOTH {
            for (i, t) in config.intents.iter().enumerate() {
                push(
                    Family::Nlu,
                    format!("IntentType({t}){}", s.suffix()),
                    Kind::IntentType(i, s),
                );
            }
        }

        for s in Side::BOTH {
            for a in DialogAct::ALL {
                push(
                    Family::Lg,
                    format!("DialogAct({}){}", a.label(), s.suffix()),
                    Kind::DialogAct(a, s),
                );
            }
        }

        Ok(Self {
            entries,
            intents: config.intents.clone(),
            lexicon,
            families,
            tokenizer,
        })
    }

    pub fn entries(&self) -> &[FeatureEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.name.clone()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.name == name)
    }

    pub fn families(&self) -> &BTreeSet<Family> {
        &self.families
    }

    pub fn intents(&self) -> &[String] {
        &self.intents
    }

    pub fn tokenizer(&self) -> &dyn Tokenizer {
        self.tokenizer.as_ref()
    }

    fn intent_index(&self, record: &ExchangeRecord, u: &Utterance) -> Result<usize> {
        self.intents
            .iter()
            .position(|t| *t == u.intent)
            .ok_or_else(|| FeatureError::UnknownIntent {
                id: record.id.clone(),
                intent: u.intent.clone(),
            })
    }

    fn contains_act(&self, text: &str, act: DialogAct) -> bool {
        let text = text.trim().to_lowercase();
        self.lexicon[&act].iter().any(|p| text.contains(p.as_str()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Computes every enabled entry of `space` for one exchange.
pub fn extract_features(record: &ExchangeRecord, space: &FeatureSpace) -> Result<FeatureVector> {
    let tok = space.tokenizer();
    let t1 = tok.tokenize(&record.u1.text);
    let t2 = tok.tokenize(&record.u2.text);
    let intent1 = space.intent_index(record, &record.u1)?;
    let intent2 = space.intent_index(record, &record.u2)?;
    let correction = textops::classify_correction(&textops::word_diff(&t1, &t2));
    let switch = (record.u1.input_type, record.u2.input_type);

    let values = space
        .entries
        .iter()
        .map(|e| match e.kind {
            Kind::CharLen(s) => s.of(record).text.chars().filter(|c| !c.is_whitespace()).count() as f64,
            Kind::WordLen(s) => match s {
                Side::U1 => t1.len() as f64,
                Side::U2 => t2.len() as f64,
            },
            Kind::InputType(s) => flag(s.of(record).input_type == InputType::Text),
            Kind::Interval => record.interval_s().clamp(0.0, INTERVAL_CAP_S),
            Kind::EditDistance => textops::normalized_edit_distance(&record.u1.text, &record.u2.text),
            Kind::Correction(t) => flag(t == correction),
            Kind::CommonWords => textops::common_word_count(&t1, &t2) as f64,
            Kind::Voice2Text => flag(switch == (InputType::Voice, InputType::Text)),
            Kind::Text2Voice => flag(switch == (InputType::Text, InputType::Voice)),
            Kind::AsrConf(s) => s.of(record).asr_confidence.unwrap_or(0.0),
            Kind::VoiceLen(s) => s.of(record).voice_len_s.unwrap_or(0.0),
            Kind::SameIntent => flag(intent1 == intent2),
            Kind::DifferentIntent => flag(intent1 != intent2),
            Kind::DifferentSlot => flag(record.u1.slots != record.u2.slots),
            Kind::IntentType(i, s) => flag(
                i == match s {
                    Side::U1 => intent1,
                    Side::U2 => intent2,
                },
            ),
            Kind::DialogAct(a, s) => flag(space.contains_act(&s.of(record).text, a)),
        })
        .collect();
    Ok(FeatureVector(values))
}

/// Per-entry affine rescaling fitted on a training fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub continuous: Vec<bool>,
}

impl Standardizer {
    /// Population mean and standard deviation for continuous entries;
    /// binary entries keep the identity map. Entries that are constant over
    /// the fit set get a standard deviation of 1.
    pub fn fit(vectors: &[FeatureVector], space: &FeatureSpace) -> Result<Self> {
        let continuous: Vec<bool> = space.entries.iter().map(|e| e.continuous).collect();
        Self::fit_masked(vectors, continuous)
    }

    pub fn fit_masked(vectors: &[FeatureVector], continuous: Vec<bool>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(FeatureError::EmptyFitSet);
        }
        let d = continuous.len();
        for v in vectors {
            if v.len() != d {
                return Err(FeatureError::LengthMismatch {
                    expected: d,
                    actual: v.len(),
                });
            }
        }
        let n = vectors.len() as f64;
        let mut mean = vec![0.0; d];
        let mut std = vec![1.0; d];
        for j in (0..d).filter(|&j| continuous[j]) {
            let m = vectors.iter().map(|v| v.0[j]).sum::<f64>() / n;
            let var = vectors.iter().map(|v| (v.0[j] - m).powi(2)).sum::<f64>() / n;
            mean[j] = m;
            let s = var.sqrt();
            std[j] = if s > 1e-12 { s } else { 1.0 };
        }
        Ok(Self { mean, std, continuous })
    }

    pub fn apply(&self, v: &FeatureVector) -> Result<FeatureVector> {
        if v.len() != self.mean.len() {
            return Err(FeatureError::LengthMismatch {
                expected: self.mean.len(),
                actual: v.len(),
            });
        }
        Ok(FeatureVector(
            v.0.iter()
                .enumerate()
                .map(|(j, &x)| {
                    if self.continuous[j] {
                        (x - self.mean[j]) / self.std[j]
                    } else {
                        x
                    }
                })
                .collect(),
        ))
    }

    pub fn apply_all(&self, vs: &[FeatureVector]) -> Result<Vec<FeatureVector>> {
        vs.iter().map(|v| self.apply(v)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::{record, utterance};
    use crate::corpus::{CauseLabel, InputType};
    use proptest::prelude::*;

    fn space(families: &[Family]) -> FeatureSpace {
        FeatureSpace::build(&FeatureSpaceConfig::default().with_families(families.iter().copied())).unwrap()
    }

    fn value(space: &FeatureSpace, v: &FeatureVector, name: &str) -> f64 {
        v.0[space.index_of(name).unwrap_or_else(|| panic!("no entry {name}"))]
    }

    #[test]
    fn baseline_space_has_only_session_and_reformulation() {
        let cfg = FeatureSpaceConfig {
            intents: vec!["weather".into(), "search".into(), "chat".into(), "alarm".into()],
            ..FeatureSpaceConfig::default()
        }
        .with_families(Family::BASELINE);
        let s = FeatureSpace::build(&cfg).unwrap();
        assert!(s.entries().iter().all(|e| Family::BASELINE.contains(&e.family)));
        assert_eq!(
            s.names(),
            [
                "CharLen_u1",
                "CharLen_u2",
                "WordLen_u1",
                "WordLen_u2",
                "InputType_u1",
                "InputType_u2",
                "Interval",
                "EditDistance",
                "Correction(ADD)",
                "Correction(OMIT)",
                "Correction(PAR)",
                "Correction(OTHER)",
                "CommonWords",
                "Voice2Text",
                "Text2Voice",
            ]
        );
    }

    #[test]
    fn full_space_contains_starred_pairs() {
        let s = space(&Family::ALL);
        for name in [
            "ASRConf_u1",
            "ASRConf_u2",
            "SameIntent",
            "DialogAct(Praise)_u1",
            "DialogAct(IDU)_u2",
        ] {
            assert!(s.index_of(name).is_some(), "{name}");
        }
        for t in DEFAULT_INTENTS {
            assert!(s.index_of(&format!("IntentType({t})_u1")).is_some());
            assert!(s.index_of(&format!("IntentType({t})_u2")).is_some());
        }
        let families: Vec<Family> = s.entries().iter().map(|e| e.family).collect();
        let mut sorted = families.clone();
        sorted.sort();
        assert_eq!(families, sorted, "families must appear in canonical order");
        // 7 session + 8 reformulation + 4 asr + 3 + 2*8 nlu + 2*7 lg
        assert_eq!(s.len(), 7 + 8 + 4 + 3 + 16 + 14);
    }

    #[test]
    fn config_errors() {
        let empty = FeatureSpaceConfig {
            intents: vec![],
            ..FeatureSpaceConfig::default()
        };
        assert!(matches!(FeatureSpace::build(&empty), Err(FeatureError::Config(_))));

        let mut bad_act = FeatureSpaceConfig::default();
        bad_act.dialog_acts.insert("greeting".into(), vec!["hi".into()]);
        assert!(matches!(FeatureSpace::build(&bad_act), Err(FeatureError::Config(_))));

        let bad_family = FeatureSpaceConfig {
            families: vec!["prosody".into()],
            ..FeatureSpaceConfig::default()
        };
        assert!(FeatureSpace::build(&bad_family).is_err());
    }

    #[test]
    fn config_json_shape() {
        let json = r#"{"intents":["weather","chat"],"dialog_acts":{"praise":["wow"],"thanking":[],"backchannel":[],"accept":[],"abuse":[],"reject":[],"idu":[]},"families":["session","lg"]}"#;
        let cfg: FeatureSpaceConfig = serde_json::from_str(json).unwrap();
        let s = FeatureSpace::build(&cfg).unwrap();
        assert_eq!(s.families().len(), 2);
        assert_eq!(s.len(), 7 + 14);
    }

    #[test]
    fn modality_switch_flags() {
        let s = space(&Family::ALL);
        let mut r = record("r", "what's the weather", "what's the weather today", 30.0, None);
        r.u2 = utterance(
            "what's the weather today",
            InputType::Text,
            r.u2.timestamp_ms,
            "weather",
        );
        let v = extract_features(&r, &s).unwrap();
        assert_eq!(value(&s, &v, "Voice2Text"), 1.0);
        assert_eq!(value(&s, &v, "Text2Voice"), 0.0);
        assert_eq!(value(&s, &v, "InputType_u1"), 0.0);
        assert_eq!(value(&s, &v, "InputType_u2"), 1.0);
        assert_eq!(value(&s, &v, "ASRConf_u2"), 0.0);
        assert_eq!(value(&s, &v, "VoiceLen_u2"), 0.0);
        assert_eq!(value(&s, &v, "ASRConf_u1"), 0.9);
        assert_eq!(value(&s, &v, "Interval"), 30.0);
        assert_eq!(value(&s, &v, "Correction(ADD)"), 1.0);
        assert_eq!(value(&s, &v, "CommonWords"), 3.0);
        assert_eq!(value(&s, &v, "WordLen_u2"), 4.0);
        assert_eq!(value(&s, &v, "CharLen_u1"), 16.0);
    }

    #[test]
    fn intent_and_slot_features() {
        let s = space(&Family::ALL);
        let mut r = record("r", "weather in tokyo", "weather in osaka", 30.0, None);
        let v = extract_features(&r, &s).unwrap();
        assert_eq!(value(&s, &v, "SameIntent"), 1.0);
        assert_eq!(value(&s, &v, "DifferentIntent"), 0.0);
        assert_eq!(value(&s, &v, "DifferentSlot"), 0.0);
        assert_eq!(value(&s, &v, "IntentType(weather)_u1"), 1.0);

        r.u2.intent = "search".into();
        r.u2.slots.insert("city".into(), "osaka".into());
        let v = extract_features(&r, &s).unwrap();
        assert_eq!(value(&s, &v, "SameIntent"), 0.0);
        assert_eq!(value(&s, &v, "DifferentIntent"), 1.0);
        assert_eq!(value(&s, &v, "DifferentSlot"), 1.0);
        assert_eq!(value(&s, &v, "IntentType(search)_u2"), 1.0);
        assert_eq!(value(&s, &v, "IntentType(weather)_u2"), 0.0);
    }

    #[test]
    fn unknown_intent_is_an_error() {
        let s = space(&Family::ALL);
        let mut r = record("r7", "a b", "a b c", 1.0, None);
        r.u1.intent = "teleport".into();
        assert_eq!(
            extract_features(&r, &s),
            Err(FeatureError::UnknownIntent {
                id: "r7".into(),
                intent: "teleport".into()
            })
        );
    }

    #[test]
    fn dialog_act_lexicon_match() {
        let s = space(&Family::ALL);
        let r = record("r", "what is your name", "Thank you", 5.0, None);
        let v = extract_features(&r, &s).unwrap();
        assert_eq!(value(&s, &v, "DialogAct(Thanking)_u2"), 1.0);
        assert_eq!(value(&s, &v, "DialogAct(Thanking)_u1"), 0.0);
        assert_eq!(value(&s, &v, "DialogAct(Praise)_u2"), 0.0);
    }

    #[test]
    fn standardizer_examples() {
        let mask = vec![true, false];
        let vs = vec![FeatureVector(vec![0.0, 1.0]), FeatureVector(vec![2.0, 0.0])];
        let st = Standardizer::fit_masked(&vs, mask.clone()).unwrap();
        assert_eq!(st.mean[0], 1.0);
        assert_eq!(st.std[0], 1.0);
        assert_eq!(st.apply(&FeatureVector(vec![3.0, 1.0])).unwrap().0, vec![2.0, 1.0]);
        assert_eq!(st.apply(&FeatureVector(vec![1.0, 0.0])).unwrap().0, vec![0.0, 0.0]);
        assert_eq!(st.apply(&FeatureVector(vec![101.0, 1.0])).unwrap().0[0], 100.0);

        let constant = vec![FeatureVector(vec![5.0, 0.0]); 3];
        let st = Standardizer::fit_masked(&constant, mask.clone()).unwrap();
        assert_eq!((st.mean[0], st.std[0]), (5.0, 1.0));

        assert_eq!(
            Standardizer::fit_masked(&[], mask.clone()),
            Err(FeatureError::EmptyFitSet)
        );
        assert!(matches!(
            st.apply(&FeatureVector(vec![1.0])),
            Err(FeatureError::LengthMismatch { expected: 2, actual: 1 })
        ));
    }

    #[test]
    fn standardizer_marks_only_continuous_entries() {
        let s = space(&Family::ALL);
        let r1 = record(
            "a",
            "what's the weather",
            "what's the weather today",
            30.0,
            Some(CauseLabel::NoError),
        );
        let r2 = record(
            "b",
            "set an alarm",
            "set an alarm for seven",
            90.0,
            Some(CauseLabel::NoError),
        );
        let vs = vec![extract_features(&r1, &s).unwrap(), extract_features(&r2, &s).unwrap()];
        let st = Standardizer::fit(&vs, &s).unwrap();
        for (e, &c) in s.entries().iter().zip(&st.continuous) {
            assert_eq!(e.continuous, c);
        }
        let z = st.apply(&vs[0]).unwrap();
        assert_eq!(value(&s, &z, "Correction(ADD)"), 1.0);
        assert_eq!(value(&s, &z, "Interval"), -1.0);
    }

    fn arb_record() -> impl Strategy<Value = ExchangeRecord> {
        let words = prop::collection::vec(
            prop::sample::select(vec!["play", "the", "song", "thanks", "no", "wow"]),
            1..6,
        );
        let intent = prop::sample::select(DEFAULT_INTENTS.to_vec());
        (
            words.clone(),
            words,
            any::<bool>(),
            any::<bool>(),
            intent.clone(),
            intent,
            0u32..3_000_000,
            any::<bool>(),
        )
            .prop_map(|(w1, w2, v1, v2, i1, i2, gap, slot)| {
                let ty = |v| if v { InputType::Voice } else { InputType::Text };
                let mut r = record("p", &w1.join(" "), &w2.join(" "), 0.0, None);
                r.u1 = utterance(&w1.join(" "), ty(v1), 0, i1);
                r.u2 = utterance(&w2.join(" "), ty(v2), i64::from(gap), i2);
                if slot {
                    r.u2.slots.insert("k".into(), "v".into());
                }
                r
            })
    }

    proptest! {
        #[test]
        fn extraction_invariants(r in arb_record()) {
            let s = space(&Family::ALL);
            let v = extract_features(&r, &s).unwrap();
            prop_assert_eq!(v.len(), s.len());
            prop_assert!(v.0.iter().all(|x| x.is_finite()));
            for (e, &x) in s.entries().iter().zip(&v.0) {
                if !e.continuous {
                    prop_assert!(x == 0.0 || x == 1.0, "{} = {}", e.name, x);
                }
            }
            let sum = |prefix: &str, suffix: &str| -> f64 {
                s.entries().iter().zip(&v.0)
                    .filter(|(e, _)| e.name.starts_with(prefix) && e.name.ends_with(suffix))
                    .map(|(_, x)| x).sum()
            };
            prop_assert_eq!(sum("Correction(", ""), 1.0);
            prop_assert!(sum("Voice2Text", "") + sum("Text2Voice", "") <= 1.0);
            prop_assert_eq!(sum("SameIntent", "") + sum("DifferentIntent", ""), 1.0);
            prop_assert_eq!(sum("IntentType(", "_u1"), 1.0);
            prop_assert_eq!(sum("IntentType(", "_u2"), 1.0);
            if r.u1.input_type == InputType::Text {
                prop_assert_eq!(sum("ASRConf_u1", "") + sum("VoiceLen_u1", ""), 0.0);
            }
            if r.u1.input_type == r.u2.input_type {
                prop_assert_eq!(sum("Voice2Text", "") + sum("Text2Voice", ""), 0.0);
            }
            prop_assert!(sum("Interval", "") <= INTERVAL_CAP_S);
            prop_assert_eq!(extract_features(&r, &s).unwrap(), v);
        }

        #[test]
        fn ablation_consistency(r in arb_record(), mask in prop::collection::vec(any::<bool>(), 5)) {
            let full = space(&Family::ALL);
            let sub: Vec<Family> = Family::ALL.iter().zip(&mask).filter(|(_, &m)| m).map(|(&f, _)| f).collect();
            prop_assume!(!sub.is_empty());
            let small = space(&sub);
            let vf = extract_features(&r, &full).unwrap();
            let vs = extract_features(&r, &small).unwrap();
            let restricted: Vec<f64> = full.entries().iter().zip(&vf.0)
                .filter(|(e, _)| sub.contains(&e.family))
                .map(|(_, &x)| x)
                .collect();
            prop_assert_eq!(restricted, vs.0);
        }
    }
}
