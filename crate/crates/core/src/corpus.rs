//! Log data model, JSONL corpus I/O and the sampling filters.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textops;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("malformed record at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("record {id:?}: invalid field `{field}`: {message}")]
    Validation { id: String, field: String, message: String },
    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<CorpusError>,
    },
    #[error("duplicate record id {id:?} on lines {first_line} and {second_line}")]
    DuplicateId {
        id: String,
        first_line: usize,
        second_line: usize,
    },
    #[error("record {id:?} has no gold label")]
    MissingLabel { id: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = CorpusError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputType {
    Voice,
    Text,
}

/// Modality pair of an exchange, `U1` type first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum InputSwitch {
    V2V,
    T2T,
    V2T,
    T2V,
}

impl InputSwitch {
    pub const ALL: [InputSwitch; 4] = [Self::V2V, Self::T2T, Self::V2T, Self::T2V];

    pub fn of(u1: InputType, u2: InputType) -> Self {
        match (u1, u2) {
            (InputType::Voice, InputType::Voice) => Self::V2V,
            (InputType::Text, InputType::Text) => Self::T2T,
            (InputType::Voice, InputType::Text) => Self::V2T,
            (InputType::Text, InputType::Voice) => Self::T2V,
        }
    }

    pub fn types(self) -> (InputType, InputType) {
        match self {
            Self::V2V => (InputType::Voice, InputType::Voice),
            Self::T2T => (InputType::Text, InputType::Text),
            Self::V2T => (InputType::Voice, InputType::Text),
            Self::T2V => (InputType::Text, InputType::Voice),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn description(self) -> &'static str {
        match self {
            Self::V2V => "voice -> voice",
            Self::T2T => "text -> text",
            Self::V2T => "voice -> text",
            Self::T2V => "text -> voice",
        }
    }
}

impl fmt::Display for InputSwitch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Annotated cause of a reformulation.
///
/// Only the first four variants take part in prediction; the remaining
/// three are accepted on input and removed by [`restrict_to_task_labels`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CauseLabel {
    NoError,
    AsrError,
    NluError,
    LgError,
    UnsupportedAction,
    EndpointError,
    UninterpretableInput,
}

impl CauseLabel {
    /// Canonical class order used everywhere a class index is needed.
    pub const TASK: [CauseLabel; 4] = [Self::NoError, Self::AsrError, Self::NluError, Self::LgError];

    pub const ALL: [CauseLabel; 7] = [
        Self::NoError,
        Self::AsrError,
        Self::NluError,
        Self::LgError,
        Self::UnsupportedAction,
        Self::EndpointError,
        Self::UninterpretableInput,
    ];

    pub fn is_task_label(self) -> bool {
        self.task_index().is_some()
    }

    pub fn task_index(self) -> Option<usize> {
        Self::TASK.iter().position(|&l| l == self)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::NoError => "no_error",
            Self::AsrError => "asr_error",
            Self::NluError => "nlu_error",
            Self::LgError => "lg_error",
            Self::UnsupportedAction => "unsupported_action",
            Self::EndpointError => "endpoint_error",
            Self::UninterpretableInput => "uninterpretable_input",
        }
    }

    /// Column header used in the rendered tables.
    pub fn short_name(self) -> &'static str {
        match self {
            Self::NoError => "No",
            Self::AsrError => "ASR",
            Self::NluError => "NLU",
            Self::LgError => "LG",
            Self::UnsupportedAction => "Unsup",
            Self::EndpointError => "Endpoint",
            Self::UninterpretableInput => "Uninterp",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Self::NoError => "No error",
            Self::AsrError => "ASR error",
            Self::NluError => "NLU error",
            Self::LgError => "LG error",
            Self::UnsupportedAction => "Unsupported action",
            Self::EndpointError => "Endpoint error",
            Self::UninterpretableInput => "Uninterpretable input",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.as_str() == s)
    }
}

impl fmt::Display for CauseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Utterance {
    pub text: String,
    pub input_type: InputType,
    pub timestamp_ms: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asr_confidence: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub voice_len_s: Option<f64>,
    pub intent: String,
    #[serde(default)]
    pub slots: BTreeMap<String, String>,
}

impl Utterance {
    fn validate(&self, id: &str, side: &str) -> Result<()> {
        let invalid = |field: &str, message: &str| CorpusError::Validation {
            id: id.to_string(),
            field: format!("{side}.{field}"),
            message: message.to_string(),
        };
        if self.text.trim().is_empty() {
            return Err(invalid("text", "empty after trimming"));
        }
        if self.intent.trim().is_empty() {
            return Err(invalid("intent", "empty intent label"));
        }
        match self.input_type {
            InputType::Voice => {
                let conf = self
                    .asr_confidence
                    .ok_or_else(|| invalid("asr_confidence", "required for voice input"))?;
                if !(0.0..=1.0).contains(&conf) {
                    return Err(invalid("asr_confidence", "must lie in [0, 1]"));
                }
                let len = self
                    .voice_len_s
                    .ok_or_else(|| invalid("voice_len_s", "required for voice input"))?;
                if !len.is_finite() || len < 0.0 {
                    return Err(invalid("voice_len_s", "must be a finite non-negative number"));
                }
            }
            InputType::Text => {
                if self.asr_confidence.is_some() {
                    return Err(invalid("asr_confidence", "present on a text utterance"));
                }
                if self.voice_len_s.is_some() {
                    return Err(invalid("voice_len_s", "present on a text utterance"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemResponse {
    pub text: String,
    pub action: String,
}

/// One `(U1, R, U2)` exchange.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExchangeRecord {
    pub id: String,
    pub u1: Utterance,
    #[serde(rename = "r")]
    pub response: SystemResponse,
    pub u2: Utterance,
    #[serde(default)]
    pub gold_label: Option<CauseLabel>,
}

impl ExchangeRecord {
    pub fn validate(&self) -> Result<()> {
        if self.id.trim().is_empty() {
            return Err(CorpusError::Validation {
                id: self.id.clone(),
                field: "id".into(),
                message: "empty id".into(),
            });
        }
        self.u1.validate(&self.id, "u1")?;
        self.u2.validate(&self.id, "u2")?;
        if self.response.text.is_empty() && self.response.action.is_empty() {
            return Err(CorpusError::Validation {
                id: self.id.clone(),
                field: "r.text".into(),
                message: "response text and action are both empty".into(),
            });
        }
        if self.u2.timestamp_ms < self.u1.timestamp_ms {
            return Err(CorpusError::Validation {
                id: self.id.clone(),
                field: "u2.timestamp_ms".into(),
                message: "earlier than u1.timestamp_ms".into(),
            });
        }
        Ok(())
    }

    /// Seconds between the two utterances.
    pub fn interval_s(&self) -> f64 {
        (self.u2.timestamp_ms - self.u1.timestamp_ms) as f64 / 1000.0
    }

    pub fn input_switch(&self) -> InputSwitch {
        InputSwitch::of(self.u1.input_type, self.u2.input_type)
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("records always serialize")
    }
}

/// Parses and validates one JSONL line.
pub fn parse_record(line: &str) -> Result<ExchangeRecord> {
    let record: ExchangeRecord = serde_json::from_str(line).map_err(|e| CorpusError::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    record.validate()?;
    Ok(record)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub records: Vec<ExchangeRecord>,
    /// Free-text trail: source, seed, applied filters.
    pub provenance: Vec<String>,
}

impl Corpus {
    /// Builds a corpus, rejecting duplicate ids. Line numbers in errors are
    /// 1-based record positions.
    pub fn from_records(records: Vec<ExchangeRecord>, provenance: Vec<String>) -> Result<Self> {
        let mut seen: HashMap<&str, usize> = HashMap::with_capacity(records.len());
        for (i, r) in records.iter().enumerate() {
            if let Some(first) = seen.insert(&r.id, i + 1) {
                return Err(CorpusError::DuplicateId {
                    id: r.id.clone(),
                    first_line: first,
                    second_line: i + 1,
                });
            }
        }
        Ok(Self { records, provenance })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Gold labels in record order; fails on the first unlabeled record.
    pub fn gold_labels(&self) -> Result<Vec<CauseLabel>> {
        self.records
            .iter()
            .map(|r| {
                r.gold_label
                    .ok_or_else(|| CorpusError::MissingLabel { id: r.id.clone() })
            })
            .collect()
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for r in &self.records {
            out.write_all(r.to_json_line().as_bytes())?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }
}

/// Reads a JSONL corpus. Blank lines are skipped but still counted for
/// line numbers.
pub fn read_corpus<R: BufRead>(reader: R, source: &str) -> Result<Corpus> {
    let mut records = Vec::new();
    let mut first_line: HashMap<String, usize> = HashMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| CorpusError::Io {
            path: source.to_string(),
            source: e,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record = parse_record(&line).map_err(|e| CorpusError::AtLine {
            line: lineno,
            source: Box::new(e),
        })?;
        if let Some(&first) = first_line.get(&record.id) {
            return Err(CorpusError::DuplicateId {
                id: record.id,
                first_line: first,
                second_line: lineno,
            });
        }
        first_line.insert(record.id.clone(), lineno);
        records.push(record);
    }
    let n = records.len();
    Ok(Corpus {
        records,
        provenance: vec![format!("loaded {n} records from {source}")],
    })
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| CorpusError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    read_corpus(BufReader::new(file), &path.display().to_string())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterParams {
    pub max_interval_s: f64,
    /// Exclusive lower bound on normalized edit distance.
    pub min_dist: f64,
    /// Inclusive upper bound on normalized edit distance.
    pub max_dist: f64,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            max_interval_s: 1800.0,
            min_dist: 0.0,
            max_dist: 0.5,
        }
    }
}

impl FilterParams {
    pub fn accepts(&self, record: &ExchangeRecord) -> bool {
        self.interval_ok(record) && self.distance_ok(record)
    }

    fn interval_ok(&self, record: &ExchangeRecord) -> bool {
        record.interval_s() <= self.max_interval_s
    }

    fn distance_ok(&self, record: &ExchangeRecord) -> bool {
        let d = textops::normalized_edit_distance(&record.u1.text, &record.u2.text);
        d > self.min_dist && d <= self.max_dist
    }
}

/// Keeps the records that look like reformulations: close in time and
/// similar but not identical. Records failing both rules are counted
/// under the interval rule.
pub fn filter_pairs(corpus: &Corpus, params: &FilterParams) -> Corpus {
    let mut by_interval = 0usize;
    let mut by_distance = 0usize;
    let mut records = Vec::with_capacity(corpus.records.len());
    for r in &corpus.records {
        if !params.interval_ok(r) {
            by_interval += 1;
        } else if !params.distance_ok(r) {
            by_distance += 1;
        } else {
            records.push(r.clone());
        }
    }
    let mut provenance = corpus.provenance.clone();
    provenance.push(format!(
        "filter_pairs(max_interval_s={}, dist in ({}, {}]): removed {by_interval} by interval, \
         {by_distance} by edit distance, kept {}",
        params.max_interval_s,
        params.min_dist,
        params.max_dist,
        records.len()
    ));
    Corpus { records, provenance }
}

/// Drops the labels that are not part of the four-way prediction task.
pub fn restrict_to_task_labels(corpus: &Corpus) -> Result<Corpus> {
    let mut dropped: BTreeMap<CauseLabel, usize> = BTreeMap::new();
    let mut records = Vec::with_capacity(corpus.records.len());
    for r in &corpus.records {
        let label = r
            .gold_label
            .ok_or_else(|| CorpusError::MissingLabel { id: r.id.clone() })?;
        if label.is_task_label() {
            records.push(r.clone());
        } else {
            *dropped.entry(label).or_default() += 1;
        }
    }
    let mut provenance = corpus.provenance.clone();
    let summary: Vec<String> = dropped.iter().map(|(l, n)| format!("{l}={n}")).collect();
    provenance.push(format!(
        "restrict_to_task_labels: dropped [{}], kept {}",
        summary.join(", "),
        records.len()
    ));
    Ok(Corpus { records, provenance })
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    const VOICE_LINE: &str = r#"{"id":"p1","u1":{"text":"what's the weather","input_type":"voice","timestamp_ms":1000,"asr_confidence":0.9,"voice_len_s":1.2,"intent":"weather","slots":{}},"r":{"text":"Sunny.","action":"weather"},"u2":{"text":"what's the weather today","input_type":"text","timestamp_ms":5000,"intent":"weather","slots":{"date":"today"}},"gold_label":"no_error"}"#;

    #[test]
    fn parses_voice_record() {
        let r = parse_record(VOICE_LINE).unwrap();
        assert_eq!(r.u1.input_type, InputType::Voice);
        assert_eq!(r.u1.asr_confidence, Some(0.9));
        assert_eq!(r.u2.slots.get("date").map(String::as_str), Some("today"));
        assert_eq!(r.gold_label, Some(CauseLabel::NoError));
        assert_eq!(r.input_switch(), InputSwitch::V2T);
    }

    #[test]
    fn confidence_on_text_input_is_rejected() {
        let line = VOICE_LINE.replace(
            r#""input_type":"text","timestamp_ms":5000"#,
            r#""input_type":"text","timestamp_ms":5000,"asr_confidence":0.5"#,
        );
        match parse_record(&line) {
            Err(CorpusError::Validation { field, .. }) => assert_eq!(field, "u2.asr_confidence"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn missing_u2_is_a_parse_error_naming_the_field() {
        let mut v: serde_json::Value = serde_json::from_str(VOICE_LINE).unwrap();
        v.as_object_mut().unwrap().remove("u2");
        let err = parse_record(&v.to_string()).unwrap_err();
        assert!(matches!(err, CorpusError::Json { .. }));
        assert!(err.to_string().contains("u2"), "{err}");
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = parse_record("{\"id\": ").unwrap_err();
        match err {
            CorpusError::Json { line, column, .. } => {
                assert_eq!(line, 1);
                assert!(column > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn voice_without_confidence_is_rejected() {
        let line = VOICE_LINE.replace(r#""asr_confidence":0.9,"#, "");
        assert!(matches!(parse_record(&line), Err(CorpusError::Validation { .. })));
    }

    #[test]
    fn reversed_timestamps_are_rejected() {
        let line = VOICE_LINE.replace(r#""timestamp_ms":5000"#, r#""timestamp_ms":10"#);
        match parse_record(&line) {
            Err(CorpusError::Validation { field, .. }) => assert_eq!(field, "u2.timestamp_ms"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_response_needs_action() {
        let line = VOICE_LINE.replace(
            r#""r":{"text":"Sunny.","action":"weather"}"#,
            r#""r":{"text":"","action":""}"#,
        );
        assert!(parse_record(&line).is_err());
        let line = VOICE_LINE.replace(
            r#""r":{"text":"Sunny.","action":"weather"}"#,
            r#""r":{"text":"","action":"alarm"}"#,
        );
        assert!(parse_record(&line).is_ok());
    }

    #[test]
    fn read_corpus_counts_and_blank_lines() {
        let a = record("a", "x y", "x y z", 10.0, None).to_json_line();
        let b = record("b", "x y", "x y z", 10.0, None).to_json_line();
        let c = record("c", "x y", "x y z", 10.0, None).to_json_line();
        let text = format!("{a}\n\n{b}\n{c}\n");
        let corpus = read_corpus(text.as_bytes(), "mem").unwrap();
        assert_eq!(corpus.len(), 3);
        assert_eq!(corpus.records[2].id, "c");
        assert!(corpus.provenance[0].contains("3 records"));

        let empty = read_corpus("".as_bytes(), "mem").unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn duplicate_ids_cite_both_lines() {
        let p1 = record("p1", "x y", "x y z", 10.0, None).to_json_line();
        let p2 = record("p2", "x y", "x y z", 10.0, None).to_json_line();
        let p3 = record("p3", "x y", "x y z", 10.0, None).to_json_line();
        let text = format!("{p1}\n{p2}\n{p3}\n{p1}\n");
        match read_corpus(text.as_bytes(), "mem") {
            Err(CorpusError::DuplicateId {
                id,
                first_line,
                second_line,
            }) => {
                assert_eq!(id, "p1");
                assert_eq!((first_line, second_line), (1, 4));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_line_reports_line_number() {
        let a = record("a", "x y", "x y z", 10.0, None).to_json_line();
        let text = format!("{a}\nnot json\n");
        match read_corpus(text.as_bytes(), "mem") {
            Err(CorpusError::AtLine { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn filter_examples() {
        let identical = record("same", "what's the weather", "what's  the weather", 10.0, None);
        let slow = record("slow", "abcdefghij", "abcdefgxyz", 1860.0, None);
        let ok = record("ok", "abcdefghij", "abcdefgxyz", 300.0, None);
        let corpus = Corpus::from_records(vec![identical, slow, ok], vec![]).unwrap();
        let out = filter_pairs(&corpus, &FilterParams::default());
        let ids: Vec<_> = out.records.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, ["ok"]);
        let trail = out.provenance.last().unwrap();
        assert!(trail.contains("removed 1 by interval"), "{trail}");
        assert!(trail.contains("1 by edit distance"), "{trail}");
    }

    #[test]
    fn unlabeled_records_pass_the_filter() {
        let r = record("u", "abcdefghij", "abcdefgxyz", 300.0, None);
        let corpus = Corpus::from_records(vec![r], vec![]).unwrap();
        assert_eq!(filter_pairs(&corpus, &FilterParams::default()).len(), 1);
        assert!(matches!(
            restrict_to_task_labels(&corpus),
            Err(CorpusError::MissingLabel { id }) if id == "u"
        ));
    }

    #[test]
    fn task_restriction() {
        let one = Corpus::from_records(
            vec![record("a", "x", "y", 1.0, Some(CauseLabel::UninterpretableInput))],
            vec![],
        )
        .unwrap();
        assert!(restrict_to_task_labels(&one).unwrap().is_empty());

        let two = Corpus::from_records(
            vec![
                record("a", "x", "y", 1.0, Some(CauseLabel::NoError)),
                record("b", "x", "y", 1.0, Some(CauseLabel::AsrError)),
            ],
            vec![],
        )
        .unwrap();
        assert_eq!(restrict_to_task_labels(&two).unwrap().records, two.records);

        let all: Vec<_> = CauseLabel::ALL
            .iter()
            .enumerate()
            .map(|(i, &l)| record(&format!("r{i}"), "x", "y", 1.0, Some(l)))
            .collect();
        let all = Corpus::from_records(all, vec![]).unwrap();
        let kept = restrict_to_task_labels(&all).unwrap();
        assert_eq!(kept.len(), 4);
        assert!(kept.records.iter().all(|r| r.gold_label.unwrap().is_task_label()));
        assert!(kept.provenance.last().unwrap().contains("uninterpretable_input=1"));
    }

    #[test]
    fn task_subset_is_exactly_four_labels() {
        let task: Vec<_> = CauseLabel::ALL.into_iter().filter(|l| l.is_task_label()).collect();
        assert_eq!(task, CauseLabel::TASK);
        for l in CauseLabel::ALL {
            assert_eq!(CauseLabel::parse(l.as_str()), Some(l));
        }
    }
}
