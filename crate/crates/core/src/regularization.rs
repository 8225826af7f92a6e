//! Local regularizers over enumerated finite classes: rank tables, version
//! spaces, induced learners, injective completion, built-in families, and
//! the JSON file format.
//!
//! Only the per-point order of a regularizer matters to its induced learner,
//! so ranks are integers rather than reals.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use itertools::Itertools;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypotheses::{enumerate_class, FiniteClass, Label, OtpHypothesis};
use crate::strings::BitString;
use crate::transduction::{empirical_risk, LabeledSample, Learner};

/// A total map (hypothesis id, point) -> rank over a finite class and a
/// point domain 0..points. Stands in for the regularizer psi restricted to
/// the enumerated class.
#[derive(Clone, Debug)]
pub struct RegularizerTable {
    class: Arc<FiniteClass>,
    points: usize,
    // ranks[id * points + x]
    ranks: Vec<u64>,
    locally_injective: bool,
}

impl RegularizerTable {
    pub fn new(class: Arc<FiniteClass>, points: usize, ranks: Vec<u64>) -> Result<Self> {
        let expected = class.len() * points;
        if ranks.len() != expected {
            return Err(Error::IncompleteTable { got: ranks.len(), expected });
        }
        let mut table = RegularizerTable { class, points, ranks, locally_injective: false };
        table.locally_injective = table.compute_injectivity();
        Ok(table)
    }

    fn compute_injectivity(&self) -> bool {
        let n = self.class.len();
        for x in 0..self.points {
            let mut seen: Vec<u64> = (0..n).map(|id| self.rank(id, x)).collect();
            seen.sort_unstable();
            if seen.windows(2).any(|w| w[0] == w[1]) {
                return false;
            }
        }
        true
    }

    pub fn class(&self) -> &Arc<FiniteClass> {
        &self.class
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn rank(&self, id: usize, x: usize) -> u64 {
        self.ranks[id * self.points + x]
    }

    /// True iff at every point all hypotheses receive distinct ranks.
    pub fn is_locally_injective(&self) -> bool {
        self.locally_injective
    }

    /// Produces per-point distinct ranks refining this table's per-point
    /// order; ties are broken by the given priority order over ids (position
    /// in `tie_break` = priority). Order-refinement: a strict comparison in
    /// the input stays strict, in the same direction, in the output.
    pub fn injective_completion(&self, tie_break: &[usize]) -> Result<RegularizerTable> {
        let n = self.class.len();
        if tie_break.len() != n {
            return Err(Error::InvalidParameter(format!(
                "tie_break has {} entries, class has {n}",
                tie_break.len()
            )));
        }
        let mut priority = vec![usize::MAX; n];
        for (pos, &id) in tie_break.iter().enumerate() {
            if id >= n || priority[id] != usize::MAX {
                return Err(Error::InvalidParameter(
                    "tie_break is not a permutation of ids".to_string(),
                ));
            }
            priority[id] = pos;
        }
        let mut ranks = vec![0u64; n * self.points];
        for x in 0..self.points {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by_key(|&id| (self.rank(id, x), priority[id]));
            for (new_rank, &id) in order.iter().enumerate() {
                ranks[id * self.points + x] = new_rank as u64;
            }
        }
        RegularizerTable::new(Arc::clone(&self.class), self.points, ranks)
    }

    /// Completion with ties broken by stable hypothesis id.
    pub fn complete_by_id(&self) -> Result<RegularizerTable> {
        let ids: Vec<usize> = (0..self.class.len()).collect();
        self.injective_completion(&ids)
    }
}

/// The ids of hypotheses with zero empirical risk on the generating sample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VersionSpace {
    pub ids: Vec<usize>,
}

/// Exactly the ids of hypotheses consistent with the sample; the empty
/// sample yields the whole class.
pub fn version_space(class: &FiniteClass, s: &LabeledSample) -> VersionSpace {
    if s.is_empty() {
        return VersionSpace { ids: (0..class.len()).collect() };
    }
    let ids = (0..class.len())
        .filter(|&id| {
            let h = class.get(id);
            empirical_risk(|x| h.evaluate(x), s)
                .map(|r| r.is_zero())
                .unwrap_or(false)
        })
        .collect();
    VersionSpace { ids }
}

/// Consistent-set computation specialized to classes produced by
/// `enumerate_class(string_len)`: exploits the fact that a hypothesis is
/// determined by one of its labels plus the secret's bits at the observed
/// residues. Must agree with `version_space` on such classes; the generic
/// route is kept as the independent oracle in tests.
pub fn consistent_otp_ids(
    class: &FiniteClass,
    string_len: usize,
    s: &LabeledSample,
) -> Result<Vec<usize>> {
    if s.is_empty() {
        return Ok((0..class.len()).collect());
    }
    let half = string_len / 2;
    // Residues with their observed labels; a residue with two labels kills
    // every hypothesis.
    let mut residue_label: BTreeMap<usize, Label> = BTreeMap::new();
    for (x, y) in &s.examples {
        let r = (x % string_len as u64) as usize;
        if let Some(prev) = residue_label.get(&r) {
            if prev != y {
                return Ok(Vec::new());
            }
        } else {
            residue_label.insert(r, *y);
        }
    }
    let mut distinct: Vec<Label> = Vec::new();
    for y in residue_label.values() {
        if !distinct.contains(y) {
            distinct.push(*y);
        }
    }
    let mut ids = Vec::new();
    match distinct.len() {
        1 => {
            let label = distinct[0];
            if label.payload.len() != string_len {
                return Ok(ids);
            }
            if residue_label.len() > half {
                return Ok(ids);
            }
            let free: Vec<usize> =
                (0..string_len).filter(|r| !residue_label.contains_key(r)).collect();
            // The secret equals the observed tag at every observed residue;
            // the opposite bit value occupies exactly `half` of the free
            // positions.
            for chosen in free.iter().copied().combinations(half) {
                // `chosen` are the positions where the secret takes the tag
                // opposite to the observed one.
                let mut secret = if label.tag == 0 {
                    BitString::zeros(string_len)?
                } else {
                    BitString::ones(string_len)?
                };
                let flips: crate::strings::IndexSet = chosen.into_iter().collect();
                secret = secret.flip_at(&flips)?;
                if !secret.is_balanced() {
                    continue;
                }
                let (a, b) = if label.tag == 0 {
                    (label.payload, label.payload.xor(&secret)?)
                } else {
                    (label.payload.xor(&secret)?, label.payload)
                };
                if let Some(id) = class.id_of(&a, &b) {
                    ids.push(id);
                }
            }
            ids.sort_unstable();
            ids.dedup();
        }
        2 => {
            let (l0, l1) = if distinct[0].tag == 0 {
                (distinct[0], distinct[1])
            } else {
                (distinct[1], distinct[0])
            };
            if l0.tag == 0 && l1.tag == 1 {
                if let Ok(h) = OtpHypothesis::new(l0.payload, l1.payload) {
                    if h.dim() == string_len {
                        let consistent = residue_label
                            .iter()
                            .all(|(&r, &y)| h.evaluate(r as u64) == y);
                        if consistent {
                            if let Some(id) = class.id_of_otp(&h) {
                                ids.push(id);
                            }
                        }
                    }
                }
            }
        }
        _ => {}
    }
    Ok(ids)
}

/// The unique learner induced by a locally injective regularizer: at each
/// test point, predict with the version-space hypothesis of minimal rank.
pub struct InducedLearner {
    table: Arc<RegularizerTable>,
}

impl InducedLearner {
    pub fn table(&self) -> &RegularizerTable {
        &self.table
    }
}

pub fn induced_learner(table: Arc<RegularizerTable>) -> Result<InducedLearner> {
    if !table.is_locally_injective() {
        return Err(Error::NotLocallyInjective);
    }
    Ok(InducedLearner { table })
}

impl Learner for InducedLearner {
    fn predict(&self, training: &LabeledSample, test: u64) -> Result<Label> {
        let x = usize::try_from(test)
            .ok()
            .filter(|&x| x < self.table.points)
            .ok_or(Error::PointOutOfRange { point: test, bound: self.table.points })?;
        let v = version_space(&self.table.class, training);
        let best = v
            .ids
            .iter()
            .copied()
            .min_by_key(|&id| self.table.rank(id, x))
            .ok_or_else(|| Error::UnrealizableSample("empty version space".to_string()))?;
        Ok(self.table.class.get(best).evaluate(test))
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Built-in regularizer families, deterministic in (name, class, points,
/// seed):
///  - "random": an independent uniform permutation of ids at every point.
///  - "hash": ids ordered by a seeded mixing function of (id, point).
///  - "prefer-tag0"/"prefer-tag1": hypotheses whose label at x carries the
///    preferred tag rank first, ties by id.
///  - "constant": all ranks 0; not locally injective, complete before use.
pub fn builtin_family(
    name: &str,
    class: Arc<FiniteClass>,
    points: usize,
    seed: u64,
) -> Result<RegularizerTable> {
    let n = class.len();
    let mut ranks = vec![0u64; n * points];
    match name {
        "random" => {
            for x in 0..points {
                let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(
                    seed ^ splitmix64(x as u64 + 1),
                ));
                let mut order: Vec<usize> = (0..n).collect();
                order.shuffle(&mut rng);
                for (r, &id) in order.iter().enumerate() {
                    ranks[id * points + x] = r as u64;
                }
            }
        }
        "hash" => {
            for x in 0..points {
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by_key(|&id| {
                    (splitmix64(seed ^ splitmix64(((id as u64) << 32) | x as u64)), id)
                });
                for (r, &id) in order.iter().enumerate() {
                    ranks[id * points + x] = r as u64;
                }
            }
        }
        "prefer-tag0" | "prefer-tag1" => {
            let preferred: u8 = if name == "prefer-tag0" { 0 } else { 1 };
            for x in 0..points {
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by_key(|&id| {
                    let tag = class.get(id).evaluate(x as u64).tag;
                    (u8::from(tag != preferred), id)
                });
                for (r, &id) in order.iter().enumerate() {
                    ranks[id * points + x] = r as u64;
                }
            }
        }
        "constant" => {}
        _ => return Err(Error::UnknownFamily(name.to_string())),
    }
    RegularizerTable::new(class, points, ranks)
}

#[derive(Serialize, Deserialize)]
struct RegularizerFile {
    d: usize,
    points: usize,
    injective: bool,
    ranks: BTreeMap<String, BTreeMap<String, u64>>,
}

/// Loads a regularizer table over `enumerate_class(d)` from the JSON spec
/// format, validating totality, point range, and the declared injectivity.
pub fn load_regularizer(path: &Path) -> Result<RegularizerTable> {
    let text = std::fs::read_to_string(path)?;
    parse_regularizer(&text)
}

pub fn parse_regularizer(text: &str) -> Result<RegularizerTable> {
    let file: RegularizerFile = serde_json::from_str(text)?;
    let class = Arc::new(enumerate_class(file.d)?);
    let n = class.len();
    let mut ranks = vec![0u64; n * file.points];
    let mut seen = vec![false; n];
    for (key, per_point) in &file.ranks {
        let h: OtpHypothesis = key
            .parse()
            .map_err(|_| Error::Format(format!("bad hypothesis key {key:?}")))?;
        let id = class
            .id_of_otp(&h)
            .ok_or_else(|| Error::Format(format!("{key} is not in the class for d={}", file.d)))?;
        if seen[id] {
            return Err(Error::Format(format!("duplicate entry for {key}")));
        }
        seen[id] = true;
        for x in 0..file.points {
            let rank = per_point.get(&x.to_string()).ok_or_else(|| {
                Error::Format(format!("missing rank for ({key}, {x})"))
            })?;
            ranks[id * file.points + x] = *rank;
        }
        for k in per_point.keys() {
            let x: usize = k
                .parse()
                .map_err(|_| Error::Format(format!("bad point key {k:?}")))?;
            if x >= file.points {
                return Err(Error::Format(format!("point {x} out of range 0..{}", file.points)));
            }
        }
    }
    if let Some(missing) = seen.iter().position(|&s| !s) {
        return Err(Error::Format(format!(
            "missing entry for hypothesis id {missing}"
        )));
    }
    let table = RegularizerTable::new(class, file.points, ranks)?;
    if file.injective && !table.is_locally_injective() {
        return Err(Error::Format(
            "file declares injective: true but a per-point rank collision exists".to_string(),
        ));
    }
    Ok(table)
}

/// Serializes a table over `enumerate_class(d)` into the spec file format.
pub fn regularizer_to_json(table: &RegularizerTable, d: usize) -> Result<String> {
    let mut ranks = BTreeMap::new();
    for (id, h) in table.class().iter().enumerate() {
        let h = h
            .as_otp()
            .ok_or_else(|| Error::Format("non-OTP hypothesis in table".to_string()))?;
        let per_point: BTreeMap<String, u64> = (0..table.points())
            .map(|x| (x.to_string(), table.rank(id, x)))
            .collect();
        ranks.insert(h.to_string(), per_point);
    }
    let file = RegularizerFile {
        d,
        points: table.points(),
        injective: table.is_locally_injective(),
        ranks,
    };
    Ok(serde_json::to_string_pretty(&file)?)
}
