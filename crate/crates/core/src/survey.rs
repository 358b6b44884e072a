//! Bipolar survey data model: answer spaces, schemas, response matrices and
//! the equally spaced numeric mapping used by the distance-based baselines.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column header that marks the optional respondent identifier column.
pub const RESPONDENT_ID_COLUMN: &str = "respondent_id";

/// Strict semispace classification of a single answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Semispace {
    /// In the negative semispace only.
    Negative,
    /// The neutrality element, shared by both semispaces.
    Neutral,
    /// In the positive semispace only.
    Positive,
}

impl Semispace {
    pub fn in_positive(self) -> bool {
        matches!(self, Semispace::Positive | Semispace::Neutral)
    }

    pub fn in_negative(self) -> bool {
        matches!(self, Semispace::Negative | Semispace::Neutral)
    }
}

/// Ordered response options of one question.
///
/// When `neutral_index` is absent, an odd-length scale treats its middle
/// option as the implicit neutrality element; an even-length scale has no
/// neutral option and splits at the midpoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnswerSpace {
    options: Vec<String>,
    neutral_index: Option<usize>,
}

impl AnswerSpace {
    pub fn new(options: Vec<String>, neutral_index: Option<usize>) -> Result<Self> {
        if options.len() < 2 {
            return Err(Error::Schema(format!(
                "a question needs at least 2 options, got {}",
                options.len()
            )));
        }
        if let Some(n) = neutral_index {
            if n >= options.len() {
                return Err(Error::Schema(format!(
                    "neutral_index {n} out of range for {} options",
                    options.len()
                )));
            }
        }
        let mut seen = HashSet::new();
        for label in &options {
            if !seen.insert(normalize_label(label)) {
                return Err(Error::Schema(format!(
                    "option label {label:?} is ambiguous (duplicate after case folding)"
                )));
            }
        }
        Ok(AnswerSpace {
            options,
            neutral_index,
        })
    }

    /// Number of options, `H_q`.
    pub fn len(&self) -> usize {
        self.options.len()
    }

    pub fn is_empty(&self) -> bool {
        self.options.is_empty()
    }

    pub fn options(&self) -> &[String] {
        &self.options
    }

    /// The declared neutral index, if any.
    pub fn declared_neutral(&self) -> Option<usize> {
        self.neutral_index
    }

    /// The neutrality element, explicit or implicit (middle of an odd scale).
    pub fn neutral(&self) -> Option<usize> {
        match self.neutral_index {
            Some(n) => Some(n),
            None if self.len() % 2 == 1 => Some(self.len() / 2),
            None => None,
        }
    }

    /// Strict semispace of option `index`. Panics on an out-of-range index.
    pub fn semispace_of(&self, index: usize) -> Semispace {
        assert!(index < self.len(), "option index {index} out of range");
        match self.neutral() {
            Some(n) if index < n => Semispace::Negative,
            Some(n) if index == n => Semispace::Neutral,
            Some(_) => Semispace::Positive,
            None if index < self.len() / 2 => Semispace::Negative,
            None => Semispace::Positive,
        }
    }

    /// Options in the negative semispace, neutral included.
    pub fn negative_semispace(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.semispace_of(i).in_negative())
            .collect()
    }

    /// Options in the positive semispace, neutral included.
    pub fn positive_semispace(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.semispace_of(i).in_positive())
            .collect()
    }

    /// Equally spaced value of option `index` on `[0, 1]`.
    pub fn numeric_value(&self, index: usize) -> f64 {
        index as f64 / (self.len() - 1) as f64
    }

    /// Resolves a cell to an option index: a case-insensitive label match
    /// first, then a 0-based integer index.
    pub fn resolve(&self, cell: &str) -> Option<usize> {
        let key = normalize_label(cell);
        if let Some(i) = self.options.iter().position(|o| normalize_label(o) == key) {
            return Some(i);
        }
        key.parse::<usize>().ok().filter(|&i| i < self.len())
    }
}

fn normalize_label(label: &str) -> String {
    label.trim().to_lowercase()
}

/// One question of a survey.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Question {
    pub id: String,
    #[serde(flatten)]
    pub answers: AnswerSpace,
}

/// An ordered list of bipolar questions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Survey {
    questions: Vec<Question>,
}

impl Survey {
    pub fn new(questions: Vec<Question>) -> Result<Self> {
        if questions.len() < 2 {
            return Err(Error::Schema(format!(
                "a survey needs at least 2 questions, got {}",
                questions.len()
            )));
        }
        let mut ids = HashSet::new();
        for q in &questions {
            if q.id.trim().is_empty() {
                return Err(Error::Schema("empty question id".into()));
            }
            if !ids.insert(q.id.as_str()) {
                return Err(Error::Schema(format!("duplicate question id {:?}", q.id)));
            }
            if q.id == RESPONDENT_ID_COLUMN {
                return Err(Error::Schema(format!(
                    "question id {RESPONDENT_ID_COLUMN:?} is reserved"
                )));
            }
        }
        Ok(Survey { questions })
    }

    pub fn questions(&self) -> &[Question] {
        &self.questions
    }

    pub fn len(&self) -> usize {
        self.questions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.questions.is_empty()
    }

    pub fn answers(&self, q: usize) -> &AnswerSpace {
        &self.questions[q].answers
    }

    /// Serializes the schema as compact JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("survey serialization cannot fail")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("survey serialization cannot fail")
    }
}

#[derive(Deserialize)]
struct RawSchema {
    questions: Vec<RawQuestion>,
}

#[derive(Deserialize)]
struct RawQuestion {
    id: String,
    options: Vec<String>,
    #[serde(default)]
    neutral_index: Option<i64>,
}

/// Parses and validates a JSON survey schema.
pub fn parse_survey_schema(schema_text: &str) -> Result<Survey> {
    let raw: RawSchema =
        serde_json::from_str(schema_text).map_err(|e| Error::Schema(e.to_string()))?;
    let mut questions = Vec::with_capacity(raw.questions.len());
    for q in raw.questions {
        let neutral = match q.neutral_index {
            None => None,
            Some(n) if n < 0 => {
                return Err(Error::Schema(format!(
                    "question {:?}: negative neutral_index {n}",
                    q.id
                )))
            }
            Some(n) => Some(n as usize),
        };
        let answers = AnswerSpace::new(q.options, neutral)
            .map_err(|e| Error::Schema(format!("question {:?}: {e}", q.id)))?;
        questions.push(Question { id: q.id, answers });
    }
    Survey::new(questions)
}

/// N respondents by Q questions of option indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseMatrix {
    survey: Survey,
    rows: Vec<Vec<usize>>,
    respondent_ids: Vec<String>,
}

impl ResponseMatrix {
    pub fn new(survey: Survey, rows: Vec<Vec<usize>>, respondent_ids: Vec<String>) -> Result<Self> {
        if rows.len() != respondent_ids.len() {
            return Err(Error::Responses(format!(
                "{} rows but {} respondent ids",
                rows.len(),
                respondent_ids.len()
            )));
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != survey.len() {
                return Err(Error::Responses(format!(
                    "row {} has {} answers, expected {}",
                    r + 1,
                    row.len(),
                    survey.len()
                )));
            }
            for (q, &a) in row.iter().enumerate() {
                if a >= survey.answers(q).len() {
                    return Err(Error::Responses(format!(
                        "row {}, question {:?}: option index {a} out of range",
                        r + 1,
                        survey.questions()[q].id
                    )));
                }
            }
        }
        Ok(ResponseMatrix {
            survey,
            rows,
            respondent_ids,
        })
    }

    /// Builds a matrix with ids `1..=N`.
    pub fn with_default_ids(survey: Survey, rows: Vec<Vec<usize>>) -> Result<Self> {
        let ids = (1..=rows.len()).map(|i| i.to_string()).collect();
        Self::new(survey, rows, ids)
    }

    pub fn survey(&self) -> &Survey {
        &self.survey
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.rows[i]
    }

    pub fn respondent_ids(&self) -> &[String] {
        &self.respondent_ids
    }

    pub fn n_respondents(&self) -> usize {
        self.rows.len()
    }

    pub fn n_questions(&self) -> usize {
        self.survey.len()
    }

    /// Keeps only the listed respondents, in the given order.
    pub fn select(&self, keep: &[usize]) -> ResponseMatrix {
        ResponseMatrix {
            survey: self.survey.clone(),
            rows: keep.iter().map(|&i| self.rows[i].clone()).collect(),
            respondent_ids: keep.iter().map(|&i| self.respondent_ids[i].clone()).collect(),
        }
    }

    /// Writes the responses as CSV with option labels and a respondent id column.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        let mut header = vec![RESPONDENT_ID_COLUMN.to_string()];
        header.extend(self.survey.questions().iter().map(|q| q.id.clone()));
        w.write_record(&header).expect("in-memory write");
        for (id, row) in self.respondent_ids.iter().zip(&self.rows) {
            let mut rec = vec![id.clone()];
            rec.extend(
                row.iter()
                    .enumerate()
                    .map(|(q, &a)| self.survey.answers(q).options()[a].clone()),
            );
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }
}

/// Parses a response CSV against a survey.
///
/// The header must name every question exactly once, in any order, with an
/// optional leading `respondent_id` column. Cells are option labels (matched
/// case-insensitively after trimming) or 0-based option indices.
pub fn load_responses(csv_text: &str, survey: &Survey) -> Result<ResponseMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(csv_text.as_bytes());
    let mut records = reader.records();
    let header = match records.next() {
        Some(h) => h?,
        None => return Err(Error::Responses("missing header row".into())),
    };
    let header: Vec<String> = header.iter().map(|h| h.trim().to_string()).collect();
    let has_id = header.first().map(|h| h == RESPONDENT_ID_COLUMN).unwrap_or(false);
    let data_cols = if has_id { &header[1..] } else { &header[..] };

    let index_of: HashMap<&str, usize> = survey
        .questions()
        .iter()
        .enumerate()
        .map(|(i, q)| (q.id.as_str(), i))
        .collect();
    let mut column_question = Vec::with_capacity(data_cols.len());
    let mut seen = HashSet::new();
    for col in data_cols {
        let q = *index_of
            .get(col.as_str())
            .ok_or_else(|| Error::Responses(format!("column {col:?} is not a survey question")))?;
        if !seen.insert(q) {
            return Err(Error::Responses(format!("column {col:?} appears twice")));
        }
        column_question.push(q);
    }
    if column_question.len() != survey.len() {
        let missing: Vec<&str> = survey
            .questions()
            .iter()
            .enumerate()
            .filter(|(i, _)| !seen.contains(i))
            .map(|(_, q)| q.id.as_str())
            .collect();
        return Err(Error::Responses(format!("missing question columns {missing:?}")));
    }

    let mut rows = Vec::new();
    let mut ids = Vec::new();
    for (r, record) in records.enumerate() {
        let record = record?;
        let row_no = r + 1;
        if record.len() == 1 && record.get(0).map(str::trim) == Some("") {
            continue;
        }
        if record.len() != header.len() {
            return Err(Error::Responses(format!(
                "row {row_no} has {} cells, expected {}",
                record.len(),
                header.len()
            )));
        }
        let mut cells = record.iter();
        let id = if has_id {
            cells.next().unwrap_or_default().trim().to_string()
        } else {
            row_no.to_string()
        };
        let mut row = vec![0usize; survey.len()];
        for (cell, &q) in cells.zip(&column_question) {
            let question = &survey.questions()[q];
            if cell.trim().is_empty() {
                return Err(Error::Responses(format!(
                    "missing answer in row {row_no}, column {:?}",
                    question.id
                )));
            }
            row[q] = question.answers.resolve(cell).ok_or_else(|| Error::UnknownLabel {
                row: row_no,
                column: question.id.clone(),
                label: cell.to_string(),
            })?;
        }
        rows.push(row);
        ids.push(id);
    }
    ResponseMatrix::new(survey.clone(), rows, ids)
}

/// Row-major N×Q matrix of answers mapped to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericMatrix {
    n: usize,
    q: usize,
    values: Vec<f64>,
}

impl NumericMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let q = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|r| r.len() != q) {
            return Err(Error::Dimension("ragged numeric rows".into()));
        }
        Ok(NumericMatrix {
            n: rows.len(),
            q,
            values: rows.concat(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_cols(&self) -> usize {
        self.q
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.q..(i + 1) * self.q]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.q + j]
    }
}

/// Maps option `h` of an `H`-option question to `h / (H - 1)`.
pub fn numeric_map(responses: &ResponseMatrix) -> NumericMatrix {
    let survey = responses.survey();
    let q = survey.len();
    let mut values = Vec::with_capacity(responses.n_respondents() * q);
    for row in responses.rows() {
        values.extend(
            row.iter()
                .enumerate()
                .map(|(k, &a)| survey.answers(k).numeric_value(a)),
        );
    }
    NumericMatrix {
        n: responses.n_respondents(),
        q,
        values,
    }
}

/// Strict semispace membership of an option.
pub fn semispace_of(question: &AnswerSpace, option_index: usize) -> Semispace {
    question.semispace_of(option_index)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LIKERT7: [&str; 7] = [
        "Strongly Disagree",
        "Disagree",
        "Somewhat Disagree",
        "Neither Agree nor Disagree",
        "Somewhat Agree",
        "Agree",
        "Strongly Agree",
    ];

    fn likert7(neutral: Option<usize>) -> AnswerSpace {
        AnswerSpace::new(LIKERT7.iter().map(|s| s.to_string()).collect(), neutral).unwrap()
    }

    fn schema3() -> &'static str {
        r#"{"questions":[
            {"id":"q1","options":["Disagree","Neither","Agree"],"neutral_index":1},
            {"id":"q2","options":["Disagree","Neither","Agree"],"neutral_index":1},
            {"id":"q3","options":["against","in favor"],"neutral_index":null}]}"#
    }

    #[test]
    fn likert_schema_semispaces() {
        let text = format!(
            r#"{{"questions":[{{"id":"a","options":{opts},"neutral_index":3}},{{"id":"b","options":{opts},"neutral_index":3}}]}}"#,
            opts = serde_json::to_string(&LIKERT7).unwrap()
        );
        let survey = parse_survey_schema(&text).unwrap();
        let a = survey.answers(0);
        assert_eq!(a.semispace_of(6), Semispace::Positive);
        assert_eq!(a.semispace_of(3), Semispace::Neutral);
        assert!(a.positive_semispace().contains(&3));
        assert!(a.negative_semispace().contains(&3));
        assert!(!a.negative_semispace().contains(&6));
        assert_eq!(a.positive_semispace(), vec![3, 4, 5, 6]);
        assert_eq!(a.negative_semispace(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn binary_question_has_implicit_neutrality() {
        let survey = parse_survey_schema(schema3()).unwrap();
        let q = survey.answers(2);
        assert_eq!(q.neutral(), None);
        assert_eq!(q.negative_semispace(), vec![0]);
        assert_eq!(q.positive_semispace(), vec![1]);
        assert_eq!(semispace_of(q, 0), Semispace::Negative);
        assert_eq!(semispace_of(q, 1), Semispace::Positive);
    }

    #[test]
    fn odd_scale_without_declared_neutral_uses_middle() {
        let q = likert7(None);
        assert_eq!(q.neutral(), Some(3));
        assert_eq!(q.semispace_of(3), Semispace::Neutral);
        let even = AnswerSpace::new(vec!["a".into(), "b".into(), "c".into(), "d".into()], None)
            .unwrap();
        assert_eq!(even.semispace_of(1), Semispace::Negative);
        assert_eq!(even.semispace_of(2), Semispace::Positive);
    }

    #[test]
    fn schema_errors() {
        let one = r#"{"questions":[{"id":"a","options":["x"]},{"id":"b","options":["x","y"]}]}"#;
        assert!(matches!(parse_survey_schema(one), Err(Error::Schema(_))));
        let dup = r#"{"questions":[{"id":"a","options":["x","y"]},{"id":"a","options":["x","y"]}]}"#;
        assert!(parse_survey_schema(dup).is_err());
        let range =
            r#"{"questions":[{"id":"a","options":["x","y"],"neutral_index":2},{"id":"b","options":["x","y"]}]}"#;
        assert!(parse_survey_schema(range).is_err());
        let ambiguous = r#"{"questions":[{"id":"a","options":["Yes","yes"]},{"id":"b","options":["x","y"]}]}"#;
        assert!(parse_survey_schema(ambiguous).is_err());
        assert!(parse_survey_schema("{not json").is_err());
        let single = r#"{"questions":[{"id":"a","options":["x","y"]}]}"#;
        assert!(parse_survey_schema(single).is_err());
    }

    #[test]
    fn schema_round_trip() {
        let survey = parse_survey_schema(schema3()).unwrap();
        let again = parse_survey_schema(&survey.to_json()).unwrap();
        assert_eq!(survey, again);
        let stripped: String = schema3().chars().filter(|c| !c.is_whitespace()).collect();
        let emitted: String = survey.to_json().chars().filter(|c| !c.is_whitespace()).collect();
        assert_eq!(stripped, emitted);
    }

    #[test]
    fn loads_labels_and_indices() {
        let survey = parse_survey_schema(schema3()).unwrap();
        let csv = "respondent_id,q1,q2,q3\nA,Agree,agree ,against\nB,0,Neither,In Favor\nC,2,2,1\n";
        let m = load_responses(csv, &survey).unwrap();
        assert_eq!(m.n_respondents(), 3);
        assert_eq!(m.row(0), &[2, 2, 0]);
        assert_eq!(m.row(1), &[0, 1, 1]);
        assert_eq!(m.respondent_ids(), &["A", "B", "C"]);
    }

    #[test]
    fn columns_may_be_reordered_and_ids_omitted() {
        let survey = parse_survey_schema(schema3()).unwrap();
        let m = load_responses("q3,q1,q2\nagainst,Agree,Disagree\n", &survey).unwrap();
        assert_eq!(m.row(0), &[2, 0, 0]);
        assert_eq!(m.respondent_ids(), &["1"]);
    }

    #[test]
    fn typo_names_row_column_and_label() {
        let survey = parse_survey_schema(schema3()).unwrap();
        let err = load_responses("q1,q2,q3\nAgree,Agree,against\nAgre,Agree,against\n", &survey)
            .unwrap_err();
        match err {
            Error::UnknownLabel { row, column, label } => {
                assert_eq!(row, 2);
                assert_eq!(column, "q1");
                assert_eq!(label, "Agre");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_cells_and_columns_rejected() {
        let survey = parse_survey_schema(schema3()).unwrap();
        assert!(load_responses("q1,q2,q3\nAgree,,against\n", &survey).is_err());
        assert!(load_responses("q1,q2,q3\nAgree,Agree\n", &survey).is_err());
        assert!(load_responses("q1,q2\nAgree,Agree\n", &survey).is_err());
        assert!(load_responses("q1,q2,q9\nAgree,Agree,x\n", &survey).is_err());
        assert!(load_responses("", &survey).is_err());
    }

    #[test]
    fn header_only_gives_empty_matrix() {
        let survey = parse_survey_schema(schema3()).unwrap();
        let m = load_responses("q1,q2,q3\n", &survey).unwrap();
        assert_eq!(m.n_respondents(), 0);
    }

    #[test]
    fn numeric_mapping_matches_worked_values() {
        let three = AnswerSpace::new(vec!["D".into(), "N".into(), "A".into()], None).unwrap();
        assert_eq!(three.numeric_value(2), 1.0);
        let five = AnswerSpace::new(
            ["SD", "D", "N", "A", "SA"].iter().map(|s| s.to_string()).collect(),
            None,
        )
        .unwrap();
        assert_eq!(five.numeric_value(3), 0.75);
        assert_eq!(likert7(Some(3)).numeric_value(5), 5.0 / 6.0);

        let survey = Survey::new(vec![
            Question { id: "a".into(), answers: three },
            Question { id: "b".into(), answers: five },
        ])
        .unwrap();
        let m = ResponseMatrix::with_default_ids(survey, vec![vec![2, 3], vec![0, 4]]).unwrap();
        let num = numeric_map(&m);
        assert_eq!(num.row(0), &[1.0, 0.75]);
        assert_eq!(num.row(1), &[0.0, 1.0]);
    }

    #[test]
    fn csv_round_trip() {
        let survey = parse_survey_schema(schema3()).unwrap();
        let m = load_responses("respondent_id,q1,q2,q3\nx,Agree,Neither,in favor\n", &survey)
            .unwrap();
        let again = load_responses(&m.to_csv(), &survey).unwrap();
        assert_eq!(m, again);
    }
}
