//! Polarity: the bipolar adjacency measure.
//!
//! For a pair of questions `(k, l)` each respondent's answers describe one of
//! four movements between opinion semispaces. Two respondents agree (+1) when
//! they share a movement, oppose (-1) when their movements are mirror images,
//! and are unrelated (0) otherwise. A respondent who is neutral on both
//! questions agrees with anyone who stays within a single semispace.

use crate::error::{Error, Result};
use crate::survey::{ResponseMatrix, Semispace, Survey};

use super::{question_pairs, require_respondents, AdjacencyMatrix, Method};

/// Movement between semispaces across a pair of answers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Movement {
    /// Both answers in the positive semispace (neutral allowed).
    PosPos,
    /// Both answers in the negative semispace (neutral allowed).
    NegNeg,
    /// Strictly negative, then strictly positive.
    NegPos,
    /// Strictly positive, then strictly negative.
    PosNeg,
}

impl Movement {
    const ALL: [Movement; 4] = [
        Movement::PosPos,
        Movement::NegNeg,
        Movement::NegPos,
        Movement::PosNeg,
    ];

    /// The opposite movement.
    pub fn mirror(self) -> Movement {
        match self {
            Movement::PosPos => Movement::NegNeg,
            Movement::NegNeg => Movement::PosPos,
            Movement::NegPos => Movement::PosNeg,
            Movement::PosNeg => Movement::NegPos,
        }
    }

    /// Movement indicator for the answer pair `(a, b)`.
    pub fn holds(self, (a, b): (Semispace, Semispace)) -> bool {
        match self {
            Movement::PosPos => a.in_positive() && b.in_positive(),
            Movement::NegNeg => a.in_negative() && b.in_negative(),
            Movement::NegPos => a == Semispace::Negative && b == Semispace::Positive,
            Movement::PosNeg => a == Semispace::Positive && b == Semispace::Negative,
        }
    }
}

/// Movements that hold for an answer pair. At least one always does.
pub fn movement(pair: (Semispace, Semispace)) -> impl Iterator<Item = Movement> {
    Movement::ALL.into_iter().filter(move |m| m.holds(pair))
}

/// Value of the pairwise polarity function, one of -1, 0, 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairwisePolarity(i8);

impl PairwisePolarity {
    pub const OPPOSED: PairwisePolarity = PairwisePolarity(-1);
    pub const UNRELATED: PairwisePolarity = PairwisePolarity(0);
    pub const ALIGNED: PairwisePolarity = PairwisePolarity(1);

    pub fn value(self) -> i8 {
        self.0
    }
}

const NEUTRAL_PAIR: (Semispace, Semispace) = (Semispace::Neutral, Semispace::Neutral);

fn stays_in_one_semispace(pair: (Semispace, Semispace)) -> bool {
    Movement::PosPos.holds(pair) || Movement::NegNeg.holds(pair)
}

/// Pairwise polarity of two respondents' answers to the same question pair.
pub fn pairwise_polarity(u: (Semispace, Semispace), v: (Semispace, Semispace)) -> PairwisePolarity {
    let aligned = |b: bool| {
        if b {
            PairwisePolarity::ALIGNED
        } else {
            PairwisePolarity::UNRELATED
        }
    };
    match (u == NEUTRAL_PAIR, v == NEUTRAL_PAIR) {
        (true, true) => PairwisePolarity::ALIGNED,
        (true, false) => aligned(stays_in_one_semispace(v)),
        (false, true) => aligned(stays_in_one_semispace(u)),
        (false, false) => {
            if Movement::ALL.iter().any(|m| m.holds(u) && m.holds(v)) {
                PairwisePolarity::ALIGNED
            } else if Movement::ALL.iter().any(|m| m.holds(u) && m.mirror().holds(v)) {
                PairwisePolarity::OPPOSED
            } else {
                PairwisePolarity::UNRELATED
            }
        }
    }
}

fn code(s: Semispace) -> usize {
    match s {
        Semispace::Negative => 0,
        Semispace::Neutral => 1,
        Semispace::Positive => 2,
    }
}

const SEMISPACES: [Semispace; 3] = [Semispace::Negative, Semispace::Neutral, Semispace::Positive];

/// π over the 9×9 answer-pair states, indexed by `state(u) * 9 + state(v)`.
fn polarity_table() -> [i8; 81] {
    let mut table = [0i8; 81];
    for (i, slot) in table.iter_mut().enumerate() {
        let (su, sv) = (i / 9, i % 9);
        let u = (SEMISPACES[su / 3], SEMISPACES[su % 3]);
        let v = (SEMISPACES[sv / 3], SEMISPACES[sv % 3]);
        *slot = pairwise_polarity(u, v).value();
    }
    table
}

fn semispaces(survey: &Survey, answers: &[usize]) -> Vec<Semispace> {
    answers
        .iter()
        .enumerate()
        .map(|(q, &a)| survey.answers(q).semispace_of(a))
        .collect()
}

/// Polarity between two respondents: the mean of π over all question pairs.
pub fn polarity(u: &[usize], v: &[usize], survey: &Survey) -> Result<f64> {
    let q = survey.len();
    if q < 2 {
        return Err(Error::InsufficientQuestions { needed: 2, got: q });
    }
    if u.len() != q || v.len() != q {
        return Err(Error::Dimension(format!(
            "answer vectors of length {} and {} for {q} questions",
            u.len(),
            v.len()
        )));
    }
    let (su, sv) = (semispaces(survey, u), semispaces(survey, v));
    let sum: i64 = question_pairs(q)
        .into_iter()
        .map(|(k, l)| pairwise_polarity((su[k], su[l]), (sv[k], sv[l])).value() as i64)
        .sum();
    Ok(sum as f64 / (q * (q - 1) / 2) as f64)
}

/// BCA adjacency: absolute polarity between every pair of respondents.
pub fn bca_adjacency(responses: &ResponseMatrix) -> Result<AdjacencyMatrix> {
    require_respondents(responses)?;
    let survey = responses.survey();
    let q = survey.len();
    if q < 2 {
        return Err(Error::InsufficientQuestions { needed: 2, got: q });
    }
    let pairs = question_pairs(q);
    let states: Vec<Vec<u8>> = responses
        .rows()
        .iter()
        .map(|row| {
            let s = semispaces(survey, row);
            pairs
                .iter()
                .map(|&(k, l)| (code(s[k]) * 3 + code(s[l])) as u8)
                .collect()
        })
        .collect();
    let table = polarity_table();
    let n_pairs = pairs.len() as f64;
    Ok(AdjacencyMatrix::from_pairs(
        responses.n_respondents(),
        Method::Bca,
        |i, j| {
            let sum: i64 = states[i]
                .iter()
                .zip(&states[j])
                .map(|(&a, &b)| table[a as usize * 9 + b as usize] as i64)
                .sum();
            (sum as f64 / n_pairs).abs()
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::survey::{AnswerSpace, Question};
    use Semispace::*;

    fn likert7_survey(q: usize) -> Survey {
        let opts: Vec<String> = [
            "Strongly Disagree",
            "Disagree",
            "Somewhat Disagree",
            "Neither Agree nor Disagree",
            "Somewhat Agree",
            "Agree",
            "Strongly Agree",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        Survey::new(
            (0..q)
                .map(|i| Question {
                    id: format!("Q{}", i + 1),
                    answers: AnswerSpace::new(opts.clone(), Some(3)).unwrap(),
                })
                .collect(),
        )
        .unwrap()
    }

    // Somewhat Disagree = 2, Somewhat Agree = 4, Strongly Agree = 6.
    const A: [usize; 3] = [4, 4, 4];
    const B: [usize; 3] = [4, 4, 2];
    const C: [usize; 3] = [4, 4, 6];

    #[test]
    fn opposite_semispaces_are_opposed() {
        assert_eq!(
            pairwise_polarity((Positive, Positive), (Negative, Negative)),
            PairwisePolarity::OPPOSED
        );
        assert_eq!(
            pairwise_polarity((Negative, Positive), (Positive, Negative)),
            PairwisePolarity::OPPOSED
        );
    }

    #[test]
    fn one_sided_change_is_unrelated() {
        assert_eq!(
            pairwise_polarity((Negative, Positive), (Positive, Positive)),
            PairwisePolarity::UNRELATED
        );
    }

    #[test]
    fn neutral_pairs() {
        assert_eq!(
            pairwise_polarity((Neutral, Neutral), (Neutral, Neutral)),
            PairwisePolarity::ALIGNED
        );
        assert_eq!(
            pairwise_polarity((Neutral, Neutral), (Negative, Positive)),
            PairwisePolarity::UNRELATED
        );
        assert_eq!(
            pairwise_polarity((Neutral, Neutral), (Negative, Neutral)),
            PairwisePolarity::ALIGNED
        );
        assert_eq!(
            pairwise_polarity((Positive, Positive), (Neutral, Neutral)),
            PairwisePolarity::ALIGNED
        );
    }

    #[test]
    fn every_answer_pair_has_a_movement() {
        for a in SEMISPACES {
            for b in SEMISPACES {
                assert!(movement((a, b)).count() >= 1);
            }
        }
    }

    #[test]
    fn motivating_example_polarities() {
        let s = likert7_survey(3);
        assert_eq!(polarity(&A, &C, &s).unwrap(), 1.0);
        assert_eq!(polarity(&A, &B, &s).unwrap(), 1.0 / 3.0);
        assert_eq!(polarity(&B, &C, &s).unwrap(), 1.0 / 3.0);
        for u in [A, B, C] {
            assert_eq!(polarity(&u, &u, &s).unwrap(), 1.0);
        }
    }

    #[test]
    fn motivating_example_adjacency() {
        let s = likert7_survey(3);
        let m = ResponseMatrix::with_default_ids(s, vec![A.to_vec(), B.to_vec(), C.to_vec()])
            .unwrap();
        let adj = bca_adjacency(&m).unwrap();
        assert_eq!(adj.get(0, 2), 1.0);
        assert_eq!(adj.get(0, 1), 1.0 / 3.0);
        assert_eq!(adj.get(1, 2), 1.0 / 3.0);
        assert_eq!(adj.get(2, 1), 1.0 / 3.0);
        assert_eq!(adj.get(1, 1), 0.0);
    }

    #[test]
    fn mirrored_respondents_have_full_adjacency() {
        let s = likert7_survey(4);
        let u = vec![0, 6, 5, 1];
        let v = vec![6, 0, 1, 5];
        assert_eq!(polarity(&u, &v, &s).unwrap(), -1.0);
        let m = ResponseMatrix::with_default_ids(s, vec![u, v]).unwrap();
        assert_eq!(bca_adjacency(&m).unwrap().get(0, 1), 1.0);
    }

    #[test]
    fn identical_respondents() {
        let s = likert7_survey(3);
        let m = ResponseMatrix::with_default_ids(s, vec![vec![1, 3, 5]; 4]).unwrap();
        let adj = bca_adjacency(&m).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(adj.get(i, j), if i == j { 0.0 } else { 1.0 });
            }
        }
    }

    #[test]
    fn requires_two_respondents() {
        let s = likert7_survey(3);
        let m = ResponseMatrix::with_default_ids(s, vec![A.to_vec()]).unwrap();
        assert!(matches!(
            bca_adjacency(&m),
            Err(Error::InsufficientRespondents { got: 1, .. })
        ));
    }
}
