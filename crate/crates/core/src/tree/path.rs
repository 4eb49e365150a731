use serde::Serialize;

use super::PlaneTree;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PathKind {
    /// Ends at -1 and stays non-negative before that.
    Excursion,
    /// Ends at -1.
    Bridge,
    General,
}

/// Lattice walk `x(0) = 0, x(1), ..., x(k)` with increments at least -1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LukasiewiczPath {
    values: Vec<i64>,
    kind: PathKind,
}

impl LukasiewiczPath {
    pub fn from_increments(increments: &[i64]) -> Result<Self> {
        let mut values = Vec::with_capacity(increments.len() + 1);
        values.push(0);
        let mut x = 0;
        for (i, &dx) in increments.iter().enumerate() {
            if dx < -1 {
                return Err(Error::InvalidPreorder { index: i });
            }
            x += dx;
            values.push(x);
        }
        let kind = classify(&values);
        Ok(LukasiewiczPath { values, kind })
    }

    pub fn from_values(values: Vec<i64>) -> Result<Self> {
        if values.first() != Some(&0) {
            return Err(Error::InvalidPreorder { index: 0 });
        }
        if let Some(i) = values.windows(2).position(|w| w[1] - w[0] < -1) {
            return Err(Error::InvalidPreorder { index: i });
        }
        let kind = classify(&values);
        Ok(LukasiewiczPath { values, kind })
    }

    pub fn from_tree(tree: &PlaneTree) -> Self {
        bridge_from_degrees(tree.degrees())
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn kind(&self) -> PathKind {
        self.kind
    }

    /// Number of steps `k`.
    pub fn len(&self) -> usize {
        self.values.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn increments(&self) -> Vec<i64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Decodes an excursion back into the tree with degrees `increment + 1`.
    pub fn to_tree(&self) -> Result<PlaneTree> {
        if self.kind != PathKind::Excursion {
            return Err(Error::InvalidPreorder { index: self.len() });
        }
        let degrees = self.increments().into_iter().map(|d| (d + 1) as u32).collect();
        Ok(PlaneTree::from_preorder_unchecked(degrees))
    }
}

fn classify(values: &[i64]) -> PathKind {
    let k = values.len() - 1;
    if k == 0 || values[k] != -1 {
        return PathKind::General;
    }
    if values[..k].iter().all(|&x| x >= 0) {
        PathKind::Excursion
    } else {
        PathKind::Bridge
    }
}

/// The walk with increments `d(i) - 1`.
pub fn bridge_from_degrees(degrees: &[u32]) -> LukasiewiczPath {
    let mut values = Vec::with_capacity(degrees.len() + 1);
    values.push(0i64);
    let mut x = 0i64;
    for &d in degrees {
        x += d as i64 - 1;
        values.push(x);
    }
    let kind = classify(&values);
    LukasiewiczPath { values, kind }
}

/// Cyclic shift of a bridge at the first time it attains its overall
/// minimum over `1..=k`. Returns the excursion and that time.
pub fn vervaat(bridge: &LukasiewiczPath) -> Result<(LukasiewiczPath, usize)> {
    if bridge.kind == PathKind::General {
        return Err(Error::InvalidPreorder { index: bridge.len() });
    }
    let k = bridge.len();
    let shift = first_minimum(&bridge.values);
    let inc = bridge.increments();
    let rotated: Vec<i64> = inc[shift..].iter().chain(&inc[..shift]).copied().collect();
    let out = LukasiewiczPath::from_increments(&rotated)?;
    debug_assert_eq!(out.kind, PathKind::Excursion);
    debug_assert!(shift >= 1 && shift <= k);
    Ok((out, shift))
}

/// Same rotation applied directly to a degree sequence summing to `k - 1`,
/// in place. Returns the shift.
pub fn vervaat_degrees(degrees: &mut [u32]) -> usize {
    let mut x = 0i64;
    let mut best = i64::MAX;
    let mut shift = degrees.len();
    for (j, &d) in degrees.iter().enumerate() {
        x += d as i64 - 1;
        if x < best {
            best = x;
            shift = j + 1;
        }
    }
    degrees.rotate_left(shift % degrees.len().max(1));
    shift
}

fn first_minimum(values: &[i64]) -> usize {
    let mut best = i64::MAX;
    let mut at = values.len() - 1;
    for (j, &x) in values.iter().enumerate().skip(1) {
        if x < best {
            best = x;
            at = j;
        }
    }
    at
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_paths() {
        assert_eq!(LukasiewiczPath::from_tree(&PlaneTree::leaf()).values(), &[0, -1]);
        assert_eq!(LukasiewiczPath::from_tree(&PlaneTree::cherry()).values(), &[0, 1, 0, -1]);
        let p = LukasiewiczPath::from_tree(&PlaneTree::path(3));
        assert_eq!(p.values(), &[0, 0, 0, -1]);
        assert_eq!(p.kind(), PathKind::Excursion);
        assert_eq!(p.to_tree().unwrap(), PlaneTree::path(3));
    }

    #[test]
    fn vervaat_examples() {
        let leaf = LukasiewiczPath::from_values(vec![0, -1]).unwrap();
        assert_eq!(vervaat(&leaf).unwrap(), (leaf.clone(), 1));

        let b = LukasiewiczPath::from_values(vec![0, -1, 0, -1]).unwrap();
        assert_eq!(b.kind(), PathKind::Bridge);
        let (e, shift) = vervaat(&b).unwrap();
        assert_eq!(shift, 1);
        assert_eq!(e.values(), &[0, 1, 0, -1]);

        let ex = LukasiewiczPath::from_tree(&"2,0,2,0,0".parse().unwrap());
        assert_eq!(vervaat(&ex).unwrap(), (ex.clone(), 5));
    }

    #[test]
    fn degree_rotation_matches_path_rotation() {
        let mut d = vec![0, 0, 2, 0, 2];
        let (e, shift) = vervaat(&bridge_from_degrees(&d)).unwrap();
        assert_eq!(vervaat_degrees(&mut d), shift);
        assert_eq!(bridge_from_degrees(&d), e);
    }

    #[test]
    fn rejects_big_down_steps() {
        assert!(LukasiewiczPath::from_increments(&[-2, 1]).is_err());
        assert!(LukasiewiczPath::from_values(vec![1, 0]).is_err());
        assert!(vervaat(&LukasiewiczPath::from_values(vec![0, 1]).unwrap()).is_err());
    }
}
