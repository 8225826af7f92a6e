//! Shattering at desk scale via the i-neighbor condition: behavior tables,
//! iterated pruning to a greatest fixed point, and dimension search over
//! point subsequences.

use std::collections::BTreeSet;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::hypotheses::{FiniteClass, Label};

/// The distinct behaviors of a class restricted to a point sequence.
#[derive(Clone, Debug)]
pub struct BehaviorTable {
    pub points: Vec<u64>,
    pub rows: Vec<Vec<Label>>,
}

impl BehaviorTable {
    pub fn arity(&self) -> usize {
        self.points.len()
    }
}

/// Restricts a class to distinct points; rows are deduplicated.
pub fn restrict(c: &FiniteClass, points: &[u64]) -> Result<BehaviorTable> {
    let distinct: BTreeSet<u64> = points.iter().copied().collect();
    if distinct.len() != points.len() {
        return Err(Error::DuplicatePoints);
    }
    let rows: BTreeSet<Vec<Label>> = c
        .iter()
        .map(|h| points.iter().map(|&p| h.evaluate(p)).collect())
        .collect();
    Ok(BehaviorTable { points: points.to_vec(), rows: rows.into_iter().collect() })
}

fn is_i_neighbor_of(f: &[Label], g: &[Label], i: usize) -> bool {
    f.len() == g.len()
        && f[i] != g[i]
        && f.iter().zip(g).enumerate().all(|(j, (a, b))| j == i || a == b)
}

/// True iff some row of the table agrees with `f` everywhere except
/// coordinate `i` (0-based), where it differs.
pub fn has_i_neighbor(f: &[Label], i: usize, t: &BehaviorTable) -> bool {
    t.rows.iter().any(|g| is_i_neighbor_of(f, g, i))
}

fn prune_fixed_point(rows: &[Vec<Label>], arity: usize) -> Vec<Vec<Label>> {
    let mut current: Vec<Vec<Label>> = rows.to_vec();
    loop {
        let keep: Vec<Vec<Label>> = current
            .iter()
            .filter(|f| {
                (0..arity).all(|i| {
                    current.iter().any(|g| is_i_neighbor_of(f, g, i))
                })
            })
            .cloned()
            .collect();
        if keep.len() == current.len() {
            return current;
        }
        current = keep;
    }
}

/// True iff a non-empty subset of rows exists in which every row has an
/// i-neighbor for every coordinate. Computed by pruning rows that miss some
/// neighbor until a fixed point is reached.
pub fn is_ds_shattered(t: &BehaviorTable) -> bool {
    if t.arity() == 0 {
        return false;
    }
    !prune_fixed_point(&t.rows, t.arity()).is_empty()
}

/// The largest k <= kmax such that some k-subset of the candidate points is
/// shattered (0 if none). Exhaustive over distinct-point subsequences.
pub fn ds_dimension_upto(c: &FiniteClass, candidate_points: &[u64], kmax: usize) -> Result<usize> {
    let distinct: Vec<u64> = {
        let set: BTreeSet<u64> = candidate_points.iter().copied().collect();
        set.into_iter().collect()
    };
    if kmax < 1 {
        return Err(Error::InvalidParameter("kmax must be at least 1".to_string()));
    }
    for k in (1..=kmax.min(distinct.len())).rev() {
        for subset in distinct.iter().copied().combinations(k) {
            if is_ds_shattered(&restrict(c, &subset)?) {
                return Ok(k);
            }
        }
    }
    Ok(0)
}
