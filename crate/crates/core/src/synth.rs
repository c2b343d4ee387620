//! Seeded generator of labeled exchange corpora.
//!
//! Each record draws its cause label from the configured priors, then a
//! modality pair and a correction type conditioned on that label. `U2` is
//! built from `U1` by an edit that is checked against
//! [`classify_correction`](crate::textops::classify_correction), so the
//! sampled correction type is always recovered exactly. ASR confidence,
//! intents, slots and dialog-act phrases are set per label to give each
//! feature family something to detect.

use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{
    CauseLabel, Corpus, ExchangeRecord, FilterParams, InputSwitch, InputType, SystemResponse, Utterance,
};
use crate::seeds;
use crate::textops::{self, CorrectionType};

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("synth config: {0}")]
    InvalidConfig(String),
    #[error("phrase bank cannot produce a {correction} pair for {label} within {attempts} attempts")]
    PhraseBankTooSmall {
        label: CauseLabel,
        correction: CorrectionType,
        attempts: usize,
    },
}

pub type Result<T, E = SynthError> = std::result::Result<T, E>;

const MAX_ATTEMPTS: usize = 500;
/// 2016-06-01T00:00:00Z.
const EPOCH_MS: i64 = 1_464_739_200_000;
const SPAN_MS: i64 = 29 * 24 * 3600 * 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    pub mean: f64,
    pub spread: f64,
}

/// Knobs that set how strongly each label shows up in the metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalParams {
    /// Confidence of voice `U2` utterances, every label.
    pub u2_asr_conf: Gaussian,
    /// Seconds of speech per word.
    pub voice_s_per_word: f64,
    pub voice_len_noise: f64,
    /// Extra seconds added to a misrecognized voice `U1`.
    pub asr_voice_len_extra: f64,
    /// Probability that a misrecognized `U1` is parsed into a different
    /// intent than the corrected `U2`.
    pub asr_intent_scramble: f64,
    /// Probability that an NLU error shows as a wrong intent; otherwise it
    /// is a wrong or missing slot.
    pub nlu_wrong_intent: f64,
    /// Probability that a no-error follow-up changes a slot value.
    pub no_error_slot_change: f64,
    /// Probability that a no-error exchange is chat.
    pub no_error_chat: f64,
    /// Probability that an LG-error edit inserts dialog-act phrases.
    pub lg_dialog_act: f64,
    /// Same, for no-error chat exchanges.
    pub chat_dialog_act: f64,
}

impl Default for SignalParams {
    fn default() -> Self {
        Self {
            u2_asr_conf: Gaussian {
                mean: 0.85,
                spread: 0.1,
            },
            voice_s_per_word: 0.4,
            voice_len_noise: 0.3,
            asr_voice_len_extra: 0.6,
            asr_intent_scramble: 0.3,
            nlu_wrong_intent: 0.7,
            no_error_slot_change: 0.3,
            no_error_chat: 0.1,
            lg_dialog_act: 0.7,
            chat_dialog_act: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Template {
    pub intent: String,
    /// Lowercase words; `{slot}` placeholders are filled from
    /// [`PhraseBank::slot_values`].
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhraseBank {
    pub templates: Vec<Template>,
    pub slot_values: BTreeMap<String, Vec<String>>,
    /// Words inserted by ADD-style edits.
    pub filler_words: Vec<String>,
    /// Words substituted by PAR-style edits.
    pub replacement_words: Vec<String>,
    /// Spurious words a recognizer may hallucinate.
    pub noise_words: Vec<String>,
    /// Chat phrases, one dialog act each.
    pub dialog_phrases: Vec<String>,
    /// System reply text per intent.
    pub responses: BTreeMap<String, String>,
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

impl Default for PhraseBank {
    fn default() -> Self {
        let t = |intent: &str, texts: &[&str]| -> Vec<Template> {
            texts
                .iter()
                .map(|text| Template {
                    intent: intent.into(),
                    text: text.to_string(),
                })
                .collect()
        };
        let mut templates = Vec::new();
        templates.extend(t(
            "weather",
            &[
                "what's the weather in {city} today",
                "will it rain in {city} {day}",
                "how hot will it be in {city} {day}",
                "tell me the weather forecast for {city}",
                "is it going to rain {day}",
                "what's the temperature outside in {city}",
                "do i need an umbrella {day}",
            ],
        ));
        templates.extend(t(
            "search",
            &[
                "search for {query}",
                "look up {query} on the web",
                "find pictures of {query}",
                "search the web for {query} reviews",
                "show me results for {query}",
                "find websites about {query}",
                "search for images of {query}",
            ],
        ));
        templates.extend(t(
            "app_launch",
            &[
                "open the {app} app",
                "launch {app} for me",
                "start the {app} application",
                "please open {app}",
                "can you open {app} quickly",
                "run the {app} program",
            ],
        ));
        templates.extend(t(
            "chat",
            &[
                "what's your name",
                "how old are you",
                "do you like music",
                "tell me a funny joke",
                "are you a robot",
                "where do you live",
                "what is your favorite food",
                "do you have any friends",
            ],
        ));
        templates.extend(t(
            "device_control",
            &[
                "turn on the {device}",
                "turn off the {device} please",
                "switch the {device} on",
                "set the {device} to maximum",
                "enable the {device} mode",
                "disable the {device} for a while",
            ],
        ));
        templates.extend(t(
            "sing_song",
            &[
                "sing a song for me",
                "sing {song} please",
                "can you sing {song}",
                "play the song {song}",
                "sing me something happy",
                "let's hear you sing a lullaby",
            ],
        ));
        templates.extend(t(
            "dictionary",
            &[
                "what does {word} mean",
                "define the word {word}",
                "how do you spell {word}",
                "meaning of {word} in english",
                "look up {word} in the dictionary",
                "give me a synonym for {word}",
            ],
        ));
        templates.extend(t(
            "alarm",
            &[
                "set an alarm for {time}",
                "wake me up at {time} tomorrow",
                "cancel my alarm for {time}",
                "set a timer for ten minutes",
                "alarm at {time} please",
                "change my alarm to {time}",
            ],
        ));

        let mut slot_values = BTreeMap::new();
        slot_values.insert(
            "city".into(),
            strings(&["tokyo", "osaka", "nara", "kyoto", "sapporo", "fukuoka"]),
        );
        slot_values.insert("day".into(), strings(&["today", "tomorrow", "tonight", "this weekend"]));
        slot_values.insert(
            "query".into(),
            strings(&[
                "strawberry wallpaper",
                "cheap flights",
                "obama's age",
                "pizza places",
                "cats",
                "used bicycles",
            ]),
        );
        slot_values.insert(
            "app".into(),
            strings(&["camera", "calendar", "maps", "mail", "music", "calculator"]),
        );
        slot_values.insert(
            "device".into(),
            strings(&["wifi", "bluetooth", "flashlight", "volume", "screen"]),
        );
        slot_values.insert(
            "song".into(),
            strings(&["happy birthday", "yesterday", "let it go", "jingle bells"]),
        );
        slot_values.insert(
            "word".into(),
            strings(&["serendipity", "ephemeral", "ubiquitous", "quixotic", "laconic"]),
        );
        slot_values.insert(
            "time".into(),
            strings(&["seven", "six thirty", "eight", "noon", "midnight"]),
        );

        let mut responses = BTreeMap::new();
        for (intent, reply) in [
            ("weather", "It will be sunny today."),
            ("search", "Here are the search results."),
            ("app_launch", "Opening the app."),
            ("chat", "I'm twenty years old."),
            ("device_control", "Done."),
            ("sing_song", "La la la."),
            ("dictionary", "Here is the definition."),
            ("alarm", "Your alarm is set."),
        ] {
            responses.insert(intent.to_string(), reply.to_string());
        }

        Self {
            templates,
            slot_values,
            filler_words: strings(&[
                "please", "again", "actually", "just", "hey", "um", "so", "well", "also", "quickly",
            ]),
            replacement_words: strings(&[
                "show", "tell", "find", "give", "check", "fetch", "display", "get", "bring", "read",
            ]),
            noise_words: strings(&["uh", "um", "hmm", "ah", "er", "oh"]),
            dialog_phrases: strings(&[
                "wow",
                "great",
                "thanks",
                "thank you",
                "i see",
                "yeah",
                "yes",
                "exactly",
                "shut up",
                "stupid",
                "not like that",
                "wrong",
                "what do you mean",
                "i don't understand",
            ]),
            responses,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n: usize,
    pub seed: u64,
    pub label_priors: BTreeMap<CauseLabel, f64>,
    pub correction_dist: BTreeMap<CauseLabel, BTreeMap<CorrectionType, f64>>,
    pub switch_dist: BTreeMap<CauseLabel, BTreeMap<InputSwitch, f64>>,
    /// Confidence of voice `U1` utterances per label.
    pub asr_conf_params: BTreeMap<CauseLabel, Gaussian>,
    #[serde(default)]
    pub signal: SignalParams,
    #[serde(default)]
    pub phrase_bank: PhraseBank,
}

/// Normalizes a row of percentages so it sums to one.
fn row<K: Ord + Copy>(keys: &[K], percents: &[f64]) -> BTreeMap<K, f64> {
    let total: f64 = percents.iter().sum();
    keys.iter().zip(percents).map(|(&k, &p)| (k, p / total)).collect()
}

/// Label priors, correction-type rows and modality-switch rows measured on
/// the annotated assistant logs. Rows are renormalized where rounding left
/// them a little off 100%.
pub fn default_config() -> SynthConfig {
    use CauseLabel::*;
    let labels = CauseLabel::TASK;
    let label_priors = row(&labels, &[38.7, 31.7, 17.3, 5.1]);

    let ct = CorrectionType::ALL;
    let correction_dist = [
        (NoError, [27.1, 7.2, 58.1, 7.4]),
        (AsrError, [7.5, 6.0, 74.2, 12.3]),
        (NluError, [27.9, 19.8, 41.9, 10.5]),
        (LgError, [23.5, 19.6, 47.1, 9.8]),
    ]
    .into_iter()
    .map(|(l, p)| (l, row(&ct, &p)))
    .collect();

    let sw = InputSwitch::ALL;
    let switch_dist = [
        (NoError, [75.2, 23.5, 1.3, 0.0]),
        (AsrError, [94.6, 0.0, 5.4, 0.0]),
        (NluError, [70.5, 23.8, 1.7, 4.6]),
        (LgError, [76.5, 23.5, 0.0, 0.0]),
    ]
    .into_iter()
    .map(|(l, p)| (l, row(&sw, &p)))
    .collect();

    let high = Gaussian {
        mean: 0.85,
        spread: 0.1,
    };
    let asr_conf_params = [
        (NoError, high),
        (
            AsrError,
            Gaussian {
                mean: 0.35,
                spread: 0.15,
            },
        ),
        (NluError, high),
        (LgError, high),
    ]
    .into_iter()
    .collect();

    SynthConfig {
        n: 1000,
        seed: 42,
        label_priors,
        correction_dist,
        switch_dist,
        asr_conf_params,
        signal: SignalParams::default(),
        phrase_bank: PhraseBank::default(),
    }
}

impl Default for SynthConfig {
    fn default() -> Self {
        default_config()
    }
}

fn check_dist<K: std::fmt::Debug>(name: &str, dist: &BTreeMap<K, f64>) -> Result<()> {
    if dist.values().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(SynthError::InvalidConfig(format!(
            "{name}: negative or non-finite probability"
        )));
    }
    let total: f64 = dist.values().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(SynthError::InvalidConfig(format!(
            "{name}: probabilities sum to {total}, not 1"
        )));
    }
    Ok(())
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let task: Vec<CauseLabel> = self.label_priors.keys().copied().collect();
        if task != CauseLabel::TASK {
            return Err(SynthError::InvalidConfig(
                "label_priors must cover exactly the four task labels".into(),
            ));
        }
        check_dist("label_priors", &self.label_priors)?;
        for label in CauseLabel::TASK {
            let missing = |what: &str| SynthError::InvalidConfig(format!("{what} has no row for {label}"));
            check_dist(
                &format!("correction_dist[{label}]"),
                self.correction_dist
                    .get(&label)
                    .ok_or_else(|| missing("correction_dist"))?,
            )?;
            check_dist(
                &format!("switch_dist[{label}]"),
                self.switch_dist.get(&label).ok_or_else(|| missing("switch_dist"))?,
            )?;
            let g = self
                .asr_conf_params
                .get(&label)
                .ok_or_else(|| missing("asr_conf_params"))?;
            if !(g.mean.is_finite() && g.spread.is_finite() && g.spread >= 0.0) {
                return Err(SynthError::InvalidConfig(format!(
                    "asr_conf_params[{label}] is invalid"
                )));
            }
        }
        let bank = &self.phrase_bank;
        if bank.templates.is_empty() {
            return Err(SynthError::InvalidConfig("phrase bank has no templates".into()));
        }
        for (name, pool) in [
            ("filler_words", &bank.filler_words),
            ("replacement_words", &bank.replacement_words),
            ("noise_words", &bank.noise_words),
            ("dialog_phrases", &bank.dialog_phrases),
        ] {
            if pool.is_empty() {
                return Err(SynthError::InvalidConfig(format!("phrase bank {name} is empty")));
            }
        }
        Ok(())
    }

    fn intents(&self) -> Vec<String> {
        let mut v: Vec<String> = self.phrase_bank.templates.iter().map(|t| t.intent.clone()).collect();
        v.sort();
        v.dedup();
        v
    }
}

/// Draws from a categorical distribution in key order.
fn sample<K: Copy, R: Rng>(rng: &mut R, dist: &BTreeMap<K, f64>) -> K {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = None;
    for (&k, &p) in dist {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = Some(k);
        if u < acc {
            return k;
        }
    }
    last.expect("validated distribution has positive mass")
}

fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

struct Filled {
    intent: String,
    tokens: Vec<String>,
    slots: BTreeMap<String, String>,
}

fn fill_template<R: Rng>(rng: &mut R, bank: &PhraseBank, template: &Template) -> Filled {
    let mut tokens = Vec::new();
    let mut slots = BTreeMap::new();
    for w in template.text.split_whitespace() {
        if let Some(name) = w.strip_prefix('{').and_then(|w| w.strip_suffix('}')) {
            let value = bank
                .slot_values
                .get(name)
                .and_then(|vals| vals.choose(rng))
                .cloned()
                .unwrap_or_else(|| name.to_string());
            tokens.extend(words(&value));
            slots.insert(name.to_string(), value);
        } else {
            tokens.push(w.to_string());
        }
    }
    Filled {
        intent: template.intent.clone(),
        tokens,
        slots,
    }
}

fn render(tokens: &[String]) -> String {
    let mut text = tokens.join(" ");
    if let Some(first) = text.get(..1) {
        let upper = first.to_uppercase();
        text.replace_range(..1, &upper);
    }
    text.push('?');
    text
}

/// Fresh material (words not already in `base`) drawn from `pool`, as
/// whole phrases, until `count` phrases are collected.
fn fresh<R: Rng>(rng: &mut R, pool: &[String], base: &[String], count: usize) -> Vec<String> {
    let mut out = Vec::new();
    for _ in 0..count {
        if let Some(phrase) = pool.choose(rng) {
            let ws = words(phrase);
            if ws.iter().all(|w| !base.contains(w) && !out.contains(w)) {
                out.extend(ws);
            }
        }
    }
    out
}

/// Misspells a word the way a recognizer might: substitute, drop or
/// double one letter.
fn corrupt<R: Rng>(rng: &mut R, word: &str) -> String {
    let mut chars: Vec<char> = word.chars().collect();
    let pos = rng.random_range(0..chars.len());
    match rng.random_range(0..3) {
        0 => chars[pos] = (b'a' + rng.random_range(0..26u8)) as char,
        1 if chars.len() > 3 => {
            chars.remove(pos);
        }
        _ => chars.insert(pos, chars[pos]),
    }
    chars.into_iter().collect()
}

/// Builds the `(U1, U2)` token pair for a correction type. Recognition
/// errors put the damage in `U1` and the intended words in `U2`; every other
/// label edits `U2`.
fn edit_pair<R: Rng>(
    rng: &mut R,
    bank: &PhraseBank,
    base: &[String],
    label: CauseLabel,
    correction: CorrectionType,
    material: &[String],
) -> Option<(Vec<String>, Vec<String>)> {
    let n = base.len();
    if n < 2 {
        return None;
    }
    let span = |rng: &mut R, max_len: usize| -> (usize, usize) {
        let len = rng.random_range(1..=max_len.min(n - 1).max(1));
        let start = rng.random_range(0..=n - len);
        (start, start + len)
    };
    let splice = |s: usize, e: usize, with: &[String]| -> Vec<String> {
        let mut out = base[..s].to_vec();
        out.extend_from_slice(with);
        out.extend_from_slice(&base[e..]);
        out
    };

    if label == CauseLabel::AsrError {
        let corrupt_at = |rng: &mut R, toks: &mut Vec<String>, i: usize| -> bool {
            let w = corrupt(rng, &toks[i]);
            if w == toks[i] || base.contains(&w) || !w.chars().all(|c| c.is_alphanumeric() || c == '\'') {
                return false;
            }
            toks[i] = w;
            true
        };
        let u1 = match correction {
            CorrectionType::Add => {
                let (s, e) = span(rng, 2);
                splice(s, e, &[])
            }
            CorrectionType::Omit => {
                let noise = fresh(rng, &bank.noise_words, base, 1);
                let at = rng.random_range(0..=n);
                splice(at, at, &noise)
            }
            CorrectionType::Par => {
                let mut toks = base.to_vec();
                let i = rng.random_range(0..n);
                corrupt_at(rng, &mut toks, i).then_some(toks)?
            }
            CorrectionType::Other => {
                if n < 3 {
                    return None;
                }
                let mut toks = base.to_vec();
                let i = rng.random_range(0..n - 2);
                let j = rng.random_range(i + 2..n);
                (corrupt_at(rng, &mut toks, i) && corrupt_at(rng, &mut toks, j)).then_some(toks)?
            }
        };
        return Some((u1, base.to_vec()));
    }

    let u2 = match correction {
        CorrectionType::Add => {
            let at = rng.random_range(0..=n);
            splice(at, at, material)
        }
        CorrectionType::Omit => {
            let (s, e) = span(rng, 2);
            splice(s, e, &[])
        }
        CorrectionType::Par => {
            let (s, e) = span(rng, 2);
            splice(s, e, material)
        }
        CorrectionType::Other => {
            if n < 3 {
                return None;
            }
            // Replace one word and insert material at a non-adjacent spot.
            let i = rng.random_range(0..n);
            let extra = fresh(rng, &bank.replacement_words, base, 1);
            if extra.is_empty() {
                return None;
            }
            let candidates: Vec<usize> = (0..=n).filter(|&p| p + 1 < i || p > i + 2).collect();
            let at = *candidates.choose(rng)?;
            let mut out = Vec::new();
            for (k, w) in base.iter().enumerate() {
                if k == at {
                    out.extend_from_slice(material);
                }
                if k == i {
                    out.extend_from_slice(&extra);
                } else {
                    out.push(w.clone());
                }
            }
            if at == n {
                out.extend_from_slice(material);
            }
            out
        }
    };
    Some((base.to_vec(), u2))
}

struct Generator<'a> {
    config: &'a SynthConfig,
    rng: ChaCha8Rng,
    intents: Vec<String>,
    by_intent: BTreeMap<String, Vec<&'a Template>>,
    filter: FilterParams,
}

impl<'a> Generator<'a> {
    fn gaussian(&mut self, g: Gaussian) -> f64 {
        let v = if g.spread > 0.0 {
            Normal::new(g.mean, g.spread)
                .expect("validated spread")
                .sample(&mut self.rng)
        } else {
            g.mean
        };
        v.clamp(0.0, 1.0)
    }

    fn voice_len(&mut self, n_words: usize, extra: f64) -> f64 {
        let s = &self.config.signal;
        let noise = Normal::new(0.0, s.voice_len_noise.max(1e-9))
            .expect("positive")
            .sample(&mut self.rng);
        let secs = s.voice_s_per_word * n_words as f64 + extra + noise;
        (secs.max(0.3) * 1000.0).round() / 1000.0
    }

    fn other_intent(&mut self, not: &str) -> String {
        let choices: Vec<&String> = self.intents.iter().filter(|i| i.as_str() != not).collect();
        choices
            .choose(&mut self.rng)
            .map(|s| s.to_string())
            .unwrap_or_else(|| not.to_string())
    }

    fn pick_intent(&mut self, label: CauseLabel) -> String {
        let sig = &self.config.signal;
        let has_chat = self.by_intent.contains_key("chat");
        let non_chat: Vec<String> = self.intents.iter().filter(|i| i.as_str() != "chat").cloned().collect();
        match label {
            CauseLabel::LgError if has_chat => "chat".into(),
            CauseLabel::NoError if has_chat && self.rng.random::<f64>() < sig.no_error_chat => "chat".into(),
            _ if !non_chat.is_empty() => non_chat.choose(&mut self.rng).cloned().expect("non-empty"),
            _ => self
                .intents
                .choose(&mut self.rng)
                .cloned()
                .expect("validated templates"),
        }
    }

    fn record(&mut self, index: usize) -> Result<ExchangeRecord> {
        let cfg = self.config;
        let sig = &cfg.signal;
        let bank = &cfg.phrase_bank;
        let label = sample(&mut self.rng, &cfg.label_priors);
        let switch = sample(&mut self.rng, &cfg.switch_dist[&label]);
        let correction = sample(&mut self.rng, &cfg.correction_dist[&label]);
        let intent = self.pick_intent(label);

        let act_prob = match (label, intent.as_str()) {
            (CauseLabel::LgError, _) => sig.lg_dialog_act,
            (_, "chat") => sig.chat_dialog_act,
            _ => 0.0,
        };
        let use_acts = self.rng.random::<f64>() < act_prob;

        let mut built = None;
        for _ in 0..MAX_ATTEMPTS {
            let template = *self.by_intent[&intent]
                .choose(&mut self.rng)
                .expect("intent has templates");
            let filled = fill_template(&mut self.rng, bank, template);
            let (pool, count) = match correction {
                _ if use_acts => (&bank.dialog_phrases, 1),
                CorrectionType::Par => (&bank.replacement_words, self.rng.random_range(1..=2)),
                _ => (&bank.filler_words, self.rng.random_range(1..=2)),
            };
            let material = fresh(&mut self.rng, pool, &filled.tokens, count);
            if material.is_empty() {
                continue;
            }
            let Some((t1, t2)) = edit_pair(&mut self.rng, bank, &filled.tokens, label, correction, &material) else {
                continue;
            };
            let (u1, u2) = (render(&t1), render(&t2));
            let d = textops::normalized_edit_distance(&u1, &u2);
            if !(d > self.filter.min_dist && d <= self.filter.max_dist) {
                continue;
            }
            if textops::correction_type_of(&u1, &u2) != correction {
                continue;
            }
            built = Some((filled, u1, u2, t1.len(), t2.len()));
            break;
        }
        let (filled, text1, text2, n1, n2) = built.ok_or(SynthError::PhraseBankTooSmall {
            label,
            correction,
            attempts: MAX_ATTEMPTS,
        })?;

        // NLU output for each utterance.
        let mut intent1 = filled.intent.clone();
        let intent2 = filled.intent.clone();
        let mut slots1 = filled.slots.clone();
        let mut slots2 = filled.slots.clone();
        match label {
            CauseLabel::AsrError => {
                if self.rng.random::<f64>() < sig.asr_intent_scramble {
                    intent1 = self.other_intent(&intent2);
                    slots1.clear();
                }
            }
            CauseLabel::NluError => {
                if self.rng.random::<f64>() < sig.nlu_wrong_intent || slots1.is_empty() {
                    intent1 = self.other_intent(&intent2);
                    slots1.clear();
                } else {
                    let key = slots1.keys().next().cloned().expect("non-empty");
                    slots1.remove(&key);
                }
            }
            CauseLabel::NoError if self.rng.random::<f64>() < sig.no_error_slot_change => {
                if let Some((k, v)) = slots2.iter_mut().next() {
                    let alts: Vec<&String> = bank
                        .slot_values
                        .get(k)
                        .map(|vs| vs.iter().filter(|x| *x != v).collect())
                        .unwrap_or_default();
                    if let Some(alt) = alts.choose(&mut self.rng) {
                        *v = alt.to_string();
                    }
                }
            }
            _ => {}
        }

        let (type1, type2) = switch.types();
        let t0 = EPOCH_MS + self.rng.random_range(0..SPAN_MS);
        let gap = self.rng.random_range(1..=(self.filter.max_interval_s * 1000.0) as i64);
        let conf1 = cfg.asr_conf_params[&label];
        let u1 = if type1 == InputType::Voice {
            let extra = if label == CauseLabel::AsrError {
                sig.asr_voice_len_extra
            } else {
                0.0
            };
            Utterance {
                text: text1,
                input_type: type1,
                timestamp_ms: t0,
                asr_confidence: Some(round3(self.gaussian(conf1))),
                voice_len_s: Some(self.voice_len(n1, extra)),
                intent: intent1.clone(),
                slots: slots1,
            }
        } else {
            Utterance {
                text: text1,
                input_type: type1,
                timestamp_ms: t0,
                asr_confidence: None,
                voice_len_s: None,
                intent: intent1.clone(),
                slots: slots1,
            }
        };
        let u2 = Utterance {
            text: text2,
            input_type: type2,
            timestamp_ms: t0 + gap,
            asr_confidence: (type2 == InputType::Voice).then(|| round3(self.gaussian(sig.u2_asr_conf))),
            voice_len_s: (type2 == InputType::Voice).then(|| self.voice_len(n2, 0.0)),
            intent: intent2,
            slots: slots2,
        };
        let reply = bank.responses.get(&intent1).cloned().unwrap_or_else(|| "Okay.".into());
        Ok(ExchangeRecord {
            id: format!("syn{index:06}"),
            u1,
            response: SystemResponse {
                text: reply,
                action: intent1,
            },
            u2,
            gold_label: Some(label),
        })
    }
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

/// Generates `config.n` labeled exchanges from one random stream.
pub fn generate_corpus(config: &SynthConfig) -> Result<Corpus> {
    config.validate()?;
    let mut by_intent: BTreeMap<String, Vec<&Template>> = BTreeMap::new();
    for t in &config.phrase_bank.templates {
        by_intent.entry(t.intent.clone()).or_default().push(t);
    }
    let mut generator = Generator {
        config,
        rng: seeds::rng(config.seed, "synth", 0),
        intents: config.intents(),
        by_intent,
        filter: FilterParams::default(),
    };
    let records = (0..config.n).map(|i| generator.record(i)).collect::<Result<Vec<_>>>()?;
    Ok(Corpus {
        records,
        provenance: vec![format!("synthetic corpus: n={}, seed={}", config.n, config.seed)],
    })
}

/// Intent vocabulary implied by a config's templates, sorted.
pub fn intent_vocabulary(config: &SynthConfig) -> Vec<String> {
    config.intents()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::restrict_to_task_labels;
    use CauseLabel::*;

    #[test]
    fn default_distributions() {
        let c = default_config();
        c.validate().unwrap();
        let total: f64 = c.label_priors.values().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((c.label_priors[&NoError] - 38.7 / 92.8).abs() < 1e-12);
        assert!((c.label_priors[&NoError] - 0.417).abs() < 5e-4);
        assert!((c.label_priors[&AsrError] - 0.342).abs() < 5e-4);
        assert!((c.label_priors[&NluError] - 0.186).abs() < 5e-4);
        assert!((c.label_priors[&LgError] - 0.055).abs() < 5e-4);
        assert!((c.correction_dist[&AsrError][&CorrectionType::Par] - 0.742).abs() < 1e-12);
        assert_eq!(c.switch_dist[&NoError][&InputSwitch::T2V], 0.0);
        assert!((c.switch_dist[&AsrError][&InputSwitch::V2T] - 0.054).abs() < 1e-12);
        assert_eq!(c.switch_dist[&LgError][&InputSwitch::V2T], 0.0);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut c = default_config();
        c.label_priors.insert(NoError, 0.5);
        assert!(matches!(c.validate(), Err(SynthError::InvalidConfig(_))));

        let mut c = default_config();
        c.label_priors.insert(EndpointError, 0.0);
        assert!(c.validate().is_err());

        let mut c = default_config();
        c.switch_dist.remove(&LgError);
        assert!(c.validate().is_err());
    }

    #[test]
    fn empty_and_deterministic() {
        let mut c = default_config();
        c.n = 0;
        assert!(generate_corpus(&c).unwrap().is_empty());
        c.n = 200;
        let a = generate_corpus(&c).unwrap().to_jsonl();
        let b = generate_corpus(&c).unwrap().to_jsonl();
        assert_eq!(a, b);
        c.seed = 7;
        assert_ne!(a, generate_corpus(&c).unwrap().to_jsonl());
    }

    #[test]
    fn records_are_valid_filtered_and_exact() {
        let mut c = default_config();
        c.n = 600;
        let corpus = generate_corpus(&c).unwrap();
        let filter = FilterParams::default();
        for r in &corpus.records {
            r.validate().unwrap();
            assert!(filter.accepts(r), "{}", r.to_json_line());
            assert!(c.intents().contains(&r.u1.intent) && c.intents().contains(&r.u2.intent));
        }
        assert_eq!(restrict_to_task_labels(&corpus).unwrap().len(), corpus.len());
        let lg_chat = corpus
            .records
            .iter()
            .filter(|r| r.gold_label == Some(LgError))
            .all(|r| r.u1.intent == "chat" && r.u2.intent == "chat");
        assert!(lg_chat);
        let asr_text_u1 = corpus
            .records
            .iter()
            .any(|r| r.gold_label == Some(AsrError) && r.u1.input_type == InputType::Text);
        assert!(!asr_text_u1);
    }

    #[test]
    fn tiny_phrase_bank_fails_cleanly() {
        let mut c = default_config();
        c.n = 50;
        c.phrase_bank.templates = vec![Template {
            intent: "chat".into(),
            text: "hi".into(),
        }];
        assert!(matches!(
            generate_corpus(&c),
            Err(SynthError::PhraseBankTooSmall { .. })
        ));
    }

    #[test]
    fn corrupt_changes_word() {
        let mut rng = seeds::rng(1, "t", 0);
        for _ in 0..100 {
            let w = corrupt(&mut rng, "weather");
            assert!(!w.is_empty());
        }
    }
}
