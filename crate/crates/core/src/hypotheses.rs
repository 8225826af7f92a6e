//! The secret-sharing hypothesis class: hypotheses h_{A,B} outputting one of
//! two labels according to the bits of A⊕B, finite sub-class enumeration,
//! generalized-binary / distinct-label-set checks, and the Cantor-style
//! sub-family with B = 1^d.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::strings::{enumerate_all, enumerate_balanced, Bit, BitString};

/// A label (tag, payload). Labels with payloads of different lengths are
/// distinct even when the tags agree.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label {
    pub tag: Bit,
    pub payload: BitString,
}

impl Label {
    pub fn new(tag: Bit, payload: BitString) -> Self {
        Label { tag, payload }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.tag, self.payload)
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Label({self})")
    }
}

/// The hypothesis h_{A,B}: outputs (0, A) where (A⊕B)(x mod d) = 0 and
/// (1, B) where it is 1. Valid only when |A| = |B| = d is even, d ≥ 2, and
/// A⊕B is balanced.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct OtpHypothesis {
    a: BitString,
    b: BitString,
    secret: BitString, // a ⊕ b, cached
}

impl OtpHypothesis {
    pub fn new(a: BitString, b: BitString) -> Result<Self> {
        let secret = a.xor(&b)?;
        let d = a.len();
        if d < 2 || d % 2 != 0 {
            return Err(Error::InvalidDimension(d));
        }
        if !secret.is_balanced() {
            return Err(Error::UnrealizableSample(format!(
                "{a}|{b}: A xor B is not balanced"
            )));
        }
        Ok(OtpHypothesis { a, b, secret })
    }

    pub fn a(&self) -> BitString {
        self.a
    }

    pub fn b(&self) -> BitString {
        self.b
    }

    /// A ⊕ B, the shared secret.
    pub fn secret(&self) -> BitString {
        self.secret
    }

    /// String length d; evaluation is periodic in x with period d.
    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn evaluate(&self, x: u64) -> Label {
        let i = (x % self.dim() as u64) as usize;
        if self.secret.get(i) == 0 {
            Label::new(0, self.a)
        } else {
            Label::new(1, self.b)
        }
    }

    /// Exactly {(0, A), (1, B)}; balance guarantees both occur.
    pub fn image(&self) -> [Label; 2] {
        [Label::new(0, self.a), Label::new(1, self.b)]
    }
}

impl fmt::Display for OtpHypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}", self.a, self.b)
    }
}

impl fmt::Debug for OtpHypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OtpHypothesis({self})")
    }
}

impl FromStr for OtpHypothesis {
    type Err = Error;

    /// Parses the textual encoding "A|B".
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once('|')
            .ok_or_else(|| Error::ParseBitString(s.to_string()))?;
        OtpHypothesis::new(a.parse()?, b.parse()?)
    }
}

/// A member of a finite enumerated class. The `Table` variant exists so that
/// relabelings and deliberately malformed hypotheses (e.g. three-label
/// counterexamples) can sit in a `FiniteClass` next to OTP hypotheses.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Hypothesis {
    Otp(OtpHypothesis),
    /// Labels indexed by residue mod `period`.
    Table { period: usize, labels: Vec<Label> },
}

impl Hypothesis {
    pub fn evaluate(&self, x: u64) -> Label {
        match self {
            Hypothesis::Otp(h) => h.evaluate(x),
            Hypothesis::Table { period, labels } => labels[(x % *period as u64) as usize],
        }
    }

    pub fn image(&self) -> BTreeSet<Label> {
        match self {
            Hypothesis::Otp(h) => h.image().into_iter().collect(),
            Hypothesis::Table { labels, .. } => labels.iter().copied().collect(),
        }
    }

    pub fn as_otp(&self) -> Option<&OtpHypothesis> {
        match self {
            Hypothesis::Otp(h) => Some(h),
            Hypothesis::Table { .. } => None,
        }
    }
}

impl fmt::Debug for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hypothesis::Otp(h) => write!(f, "{h:?}"),
            Hypothesis::Table { period, labels } => {
                write!(f, "Table(period={period}, labels={labels:?})")
            }
        }
    }
}

/// An ordered finite collection of hypotheses with stable ids 0..count-1.
#[derive(Clone, Debug)]
pub struct FiniteClass {
    members: Vec<Hypothesis>,
    otp_ids: HashMap<(BitString, BitString), usize>,
}

impl FiniteClass {
    pub fn from_members(members: Vec<Hypothesis>) -> Self {
        let mut otp_ids = HashMap::with_capacity(members.len());
        for (id, m) in members.iter().enumerate() {
            if let Hypothesis::Otp(h) = m {
                otp_ids.entry((h.a(), h.b())).or_insert(id);
            }
        }
        FiniteClass { members, otp_ids }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn get(&self, id: usize) -> &Hypothesis {
        &self.members[id]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Hypothesis> {
        self.members.iter()
    }

    /// Id of h_{A,B}, when present.
    pub fn id_of(&self, a: &BitString, b: &BitString) -> Option<usize> {
        self.otp_ids.get(&(*a, *b)).copied()
    }

    pub fn id_of_otp(&self, h: &OtpHypothesis) -> Option<usize> {
        self.id_of(&h.a(), &h.b())
    }
}

/// All of H_OTP at string length d: pairs (A, B) in {0,1}^d x {0,1}^d with
/// A⊕B balanced. Count = 2^d * binomial(d, d/2). Order: A lexicographic,
/// then A⊕B lexicographic.
pub fn enumerate_class(d: usize) -> Result<FiniteClass> {
    if d < 2 || d % 2 != 0 {
        return Err(Error::InvalidDimension(d));
    }
    let secrets: Vec<BitString> = enumerate_balanced(d)?.collect();
    let mut members = Vec::new();
    for a in enumerate_all(d)? {
        for c in &secrets {
            let b = a.xor(c)?;
            members.push(Hypothesis::Otp(OtpHypothesis::new(a, b)?));
        }
    }
    Ok(FiniteClass::from_members(members))
}

/// The Cantor-style sub-family {h_{A, 1^d} : A⊕1^d balanced}, i.e. A
/// balanced. Count = binomial(d, d/2).
pub fn cantor_class(d: usize) -> Result<FiniteClass> {
    if d < 2 || d % 2 != 0 {
        return Err(Error::InvalidDimension(d));
    }
    let ones = BitString::ones(d)?;
    let mut members = Vec::new();
    for a in enumerate_all(d)? {
        if a.xor(&ones)?.is_balanced() {
            members.push(Hypothesis::Otp(OtpHypothesis::new(a, ones)?));
        }
    }
    Ok(FiniteClass::from_members(members))
}

/// True iff every member's image (computed exactly) has size at most 2.
pub fn is_generalized_binary(c: &FiniteClass) -> bool {
    c.iter().all(|h| h.image().len() <= 2)
}

/// True iff all member images are pairwise distinct sets.
pub fn has_distinct_label_sets(c: &FiniteClass) -> bool {
    let images: BTreeSet<BTreeSet<Label>> = c.iter().map(|h| h.image()).collect();
    images.len() == c.len()
}
