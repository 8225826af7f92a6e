//! The transductive game: instances, labeled samples, exact empirical risk,
//! leave-one-out transductive error, the learner contract, and the baseline
//! learner that exploits distinct label sets.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypotheses::{Label, OtpHypothesis};
use crate::strings::BitString;

/// Exact rational error value in [0, 1]; no floating point on correctness
/// paths.
pub type ExactError = Ratio<u64>;

/// Renders an exact error as "num/den" for reports.
pub fn ratio_string(r: ExactError) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// An adversary's choice: a point sequence and a ground-truth hypothesis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransductiveInstance {
    pub points: Vec<u64>,
    pub truth: OtpHypothesis,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    points: Vec<u64>,
    #[serde(rename = "A")]
    a: String,
    #[serde(rename = "B")]
    b: String,
}

impl TransductiveInstance {
    pub fn new(points: Vec<u64>, truth: OtpHypothesis) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySample);
        }
        Ok(TransductiveInstance { points, truth })
    }

    pub fn to_json(&self) -> Result<String> {
        let file = InstanceFile {
            points: self.points.clone(),
            a: self.truth.a().to_string(),
            b: self.truth.b().to_string(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(s)?;
        let truth = OtpHypothesis::new(file.a.parse()?, file.b.parse()?)?;
        TransductiveInstance::new(file.points, truth)
    }
}

/// An ordered sequence of labeled examples.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabeledSample {
    pub examples: Vec<(u64, Label)>,
}

impl LabeledSample {
    pub fn new(examples: Vec<(u64, Label)>) -> Self {
        LabeledSample { examples }
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// The sample with the example at `index` removed (sequence deletion, so
    /// one occurrence of a duplicated point is removed).
    pub fn without_index(&self, index: usize) -> LabeledSample {
        let mut examples = self.examples.clone();
        examples.remove(index);
        LabeledSample { examples }
    }
}

/// A deterministic decision procedure mapping (training sample, test point)
/// to a label.
pub trait Learner {
    fn predict(&self, training: &LabeledSample, test: u64) -> Result<Label>;
}

/// Exact average 0-1 loss of a predictor on a non-empty sample.
pub fn empirical_risk<F>(predict: F, s: &LabeledSample) -> Result<ExactError>
where
    F: Fn(u64) -> Label,
{
    if s.is_empty() {
        return Err(Error::EmptySample);
    }
    let mistakes = s
        .examples
        .iter()
        .filter(|(x, y)| predict(*x) != *y)
        .count() as u64;
    Ok(Ratio::new(mistakes, s.len() as u64))
}

/// Labels each point of the instance by the ground truth, preserving order.
pub fn label_instance(inst: &TransductiveInstance) -> LabeledSample {
    LabeledSample::new(
        inst.points
            .iter()
            .map(|&x| (x, inst.truth.evaluate(x)))
            .collect(),
    )
}

/// Leave-one-out transductive error: the fraction of hold-out rounds in
/// which the learner mislabels the held-out point.
pub fn transductive_error(learner: &dyn Learner, inst: &TransductiveInstance) -> Result<ExactError> {
    let n = inst.points.len();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let labeled = label_instance(inst);
    let mut mistakes = 0u64;
    for i in 0..n {
        let training = labeled.without_index(i);
        let x = inst.points[i];
        if learner.predict(&training, x)? != inst.truth.evaluate(x) {
            mistakes += 1;
        }
    }
    Ok(Ratio::new(mistakes, n as u64))
}

/// The baseline learner for the OTP class: with two distinct labels the
/// hypothesis is pinned down exactly; with one label, replay it; with no
/// data, emit a fixed default.
#[derive(Clone, Copy, Debug, Default)]
pub struct BaselineLearner;

impl BaselineLearner {
    pub fn new() -> Self {
        BaselineLearner
    }
}

impl Learner for BaselineLearner {
    fn predict(&self, training: &LabeledSample, test: u64) -> Result<Label> {
        // Same point with different labels is unrealizable.
        for (i, (x, y)) in training.examples.iter().enumerate() {
            for (x2, y2) in &training.examples[i + 1..] {
                if x == x2 && y != y2 {
                    return Err(Error::UnrealizableSample(format!(
                        "point {x} carries labels {y} and {y2}"
                    )));
                }
            }
        }
        let mut distinct: Vec<Label> = Vec::new();
        for (_, y) in &training.examples {
            if !distinct.contains(y) {
                distinct.push(*y);
            }
        }
        match distinct.len() {
            0 => Ok(Label::new(0, BitString::zeros(0)?)),
            1 => Ok(distinct[0]),
            2 => {
                let (l0, l1) = if distinct[0].tag == 0 {
                    (distinct[0], distinct[1])
                } else {
                    (distinct[1], distinct[0])
                };
                if l0.tag != 0 || l1.tag != 1 {
                    return Err(Error::UnrealizableSample(
                        "two distinct labels with equal tags".to_string(),
                    ));
                }
                let h = OtpHypothesis::new(l0.payload, l1.payload).map_err(|_| {
                    Error::UnrealizableSample(format!(
                        "labels {l0} and {l1} fit no hypothesis"
                    ))
                })?;
                Ok(h.evaluate(test))
            }
            _ => Err(Error::UnrealizableSample(format!(
                "{} distinct labels observed",
                distinct.len()
            ))),
        }
    }
}

/// Learner that replays a fixed ground truth; useful as a zero-error control.
pub struct OracleLearner(pub OtpHypothesis);

impl Learner for OracleLearner {
    fn predict(&self, _training: &LabeledSample, test: u64) -> Result<Label> {
        Ok(self.0.evaluate(test))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypotheses::enumerate_class;
    use itertools::Itertools;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn hyp(a: &str, b: &str) -> OtpHypothesis {
        OtpHypothesis::new(bs(a), bs(b)).unwrap()
    }

    #[test]
    fn empirical_risk_examples() {
        let h = hyp("0011", "0101");
        let inst = TransductiveInstance::new(vec![0, 1, 2, 3], h).unwrap();
        let s = label_instance(&inst);
        assert_eq!(
            empirical_risk(|x| h.evaluate(x), &s).unwrap(),
            Ratio::new(0, 1)
        );
        // Wrong on exactly one of four examples.
        let one_off = |x: u64| {
            if x == 2 {
                Label::new(0, bs("0011"))
            } else {
                h.evaluate(x)
            }
        };
        assert_eq!(empirical_risk(one_off, &s).unwrap(), Ratio::new(1, 4));
        // Constant-wrong predictor.
        let junk = Label::new(0, bs("1"));
        assert_eq!(
            empirical_risk(|_| junk, &s).unwrap(),
            Ratio::new(1, 1)
        );
        assert!(empirical_risk(|_| junk, &LabeledSample::default()).is_err());
    }

    #[test]
    fn label_instance_example() {
        let inst = TransductiveInstance::new(vec![0, 1], hyp("00", "01")).unwrap();
        let s = label_instance(&inst);
        assert_eq!(
            s.examples,
            vec![
                (0, Label::new(0, bs("00"))),
                (1, Label::new(1, bs("01"))),
            ]
        );
        assert_eq!(label_instance(&inst), s);
        let single = TransductiveInstance::new(vec![3], hyp("00", "01")).unwrap();
        assert_eq!(label_instance(&single).len(), 1);
    }

    #[test]
    fn oracle_learner_never_errs() {
        let h = hyp("0011", "0101");
        let inst = TransductiveInstance::new(vec![0, 1, 2, 3, 7], h).unwrap();
        assert_eq!(
            transductive_error(&OracleLearner(h), &inst).unwrap(),
            Ratio::new(0, 1)
        );
    }

    struct AlwaysWrong;
    impl Learner for AlwaysWrong {
        fn predict(&self, _t: &LabeledSample, _x: u64) -> Result<Label> {
            Ok(Label::new(0, bs("111")))
        }
    }

    #[test]
    fn constant_outside_image_errs_everywhere() {
        let h = hyp("0011", "0101");
        let inst = TransductiveInstance::new(vec![0, 1, 2, 3], h).unwrap();
        assert_eq!(
            transductive_error(&AlwaysWrong, &inst).unwrap(),
            Ratio::new(1, 1)
        );
    }

    #[test]
    fn baseline_rules() {
        // Two distinct labels pin the hypothesis.
        let training = LabeledSample::new(vec![
            (0, Label::new(0, bs("00"))),
            (1, Label::new(1, bs("01"))),
        ]);
        assert_eq!(
            BaselineLearner.predict(&training, 3).unwrap(),
            Label::new(1, bs("01"))
        );
        // One label: replay it.
        let lone = Label::new(0, bs("0011"));
        let training = LabeledSample::new(vec![(0, lone), (1, lone)]);
        assert_eq!(BaselineLearner.predict(&training, 9).unwrap(), lone);
        // Empty sample: fixed default.
        assert_eq!(
            BaselineLearner.predict(&LabeledSample::default(), 5).unwrap(),
            Label::new(0, bs(""))
        );
    }

    #[test]
    fn baseline_rejects_unrealizable() {
        let conflicting = LabeledSample::new(vec![
            (0, Label::new(0, bs("00"))),
            (0, Label::new(1, bs("01"))),
        ]);
        assert!(BaselineLearner.predict(&conflicting, 1).is_err());
        let same_tag = LabeledSample::new(vec![
            (0, Label::new(0, bs("00"))),
            (1, Label::new(0, bs("11"))),
        ]);
        assert!(BaselineLearner.predict(&same_tag, 1).is_err());
        let three = LabeledSample::new(vec![
            (0, Label::new(0, bs("00"))),
            (1, Label::new(1, bs("01"))),
            (2, Label::new(1, bs("10"))),
        ]);
        assert!(BaselineLearner.predict(&three, 1).is_err());
    }

    #[test]
    fn baseline_minority_point_instance() {
        // Points sigma0(C) plus one sigma1(C) point: exactly one hold-out
        // round hides the lone minority-label point.
        let c = bs("000111");
        let h = OtpHypothesis::new(bs("000000"), c).unwrap();
        let inst = TransductiveInstance::new(vec![0, 1, 2, 3], h).unwrap();
        assert_eq!(
            transductive_error(&BaselineLearner, &inst).unwrap(),
            Ratio::new(1, 4)
        );
    }

    #[test]
    fn baseline_guarantee_small_dims() {
        // For every instance with distinct points inside 0..d, the baseline
        // errs in at most one hold-out round -- except on split pairs (two
        // points carrying the two different labels), where every hold-out
        // round hides a label seen nowhere else and replay fails twice. A
        // counting argument shows no deterministic learner avoids this at
        // d >= 6: with one label observed there are more consistent
        // completions than rounds available to cover them.
        for d in [2usize, 4] {
            let class = enumerate_class(d).unwrap();
            for h in class.iter() {
                let h = *h.as_otp().unwrap();
                for n in 1..=d {
                    for points in (0..d as u64).combinations(n) {
                        let inst = TransductiveInstance::new(points, h).unwrap();
                        let labels = label_instance(&inst);
                        let distinct = labels
                            .examples
                            .iter()
                            .map(|(_, y)| *y)
                            .collect::<std::collections::BTreeSet<_>>();
                        let split_pair = n == 2 && distinct.len() == 2;
                        let err = transductive_error(&BaselineLearner, &inst).unwrap();
                        if split_pair {
                            assert_eq!(err, Ratio::new(1, 1), "{h} {:?}", inst.points);
                        } else {
                            assert!(err <= Ratio::new(1, n as u64), "{h} {:?}", inst.points);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn baseline_is_permutation_oblivious() {
        let h = hyp("0011", "0101");
        for points in [vec![0u64, 1, 2, 3], vec![3, 1, 0, 2], vec![2, 3, 1, 0]] {
            let inst = TransductiveInstance::new(points, h).unwrap();
            assert_eq!(
                transductive_error(&BaselineLearner, &inst).unwrap(),
                transductive_error(
                    &BaselineLearner,
                    &TransductiveInstance::new(vec![0, 1, 2, 3], h).unwrap()
                )
                .unwrap()
            );
        }
    }

    #[test]
    fn instance_json_roundtrip() {
        let inst = TransductiveInstance::new(vec![0, 2, 5], hyp("0011", "0101")).unwrap();
        let json = inst.to_json().unwrap();
        assert!(json.contains("\"A\":\"0011\""));
        assert_eq!(TransductiveInstance::from_json(&json).unwrap(), inst);
    }
}
