use std::collections::BTreeSet;
use std::fmt;

use serde::{Serialize, Serializer};

use super::{MultisetPermutations, PlaneTree};
use crate::error::{Error, Result};

/// Canonical parenthesis code of an unordered rooted tree: a vertex is
/// `(` followed by its children's codes in sorted order, then `)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UnorderedKey(Vec<u8>);

impl UnorderedKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    /// Number of vertices.
    pub fn size(&self) -> usize {
        self.0.len() / 2
    }

    /// Codes of the root's children, sorted.
    pub fn children(&self) -> Vec<UnorderedKey> {
        let inner = &self.0[1..self.0.len() - 1];
        let mut out = Vec::new();
        let mut depth = 0i32;
        let mut start = 0;
        for (i, &b) in inner.iter().enumerate() {
            depth += if b == b'(' { 1 } else { -1 };
            if depth == 0 {
                out.push(UnorderedKey(inner[start..=i].to_vec()));
                start = i + 1;
            }
        }
        out
    }

    /// The ordering that lists children in key order.
    pub fn representative(&self) -> PlaneTree {
        fn walk(key: &UnorderedKey, out: &mut Vec<u32>) {
            let ch = key.children();
            out.push(ch.len() as u32);
            for c in &ch {
                walk(c, out);
            }
        }
        let mut out = Vec::with_capacity(self.size());
        walk(self, &mut out);
        PlaneTree::from_preorder_unchecked(out)
    }

    pub fn parse(s: &str) -> Result<Self> {
        let bytes = s.trim().as_bytes().to_vec();
        let mut depth = 0i64;
        for (i, &b) in bytes.iter().enumerate() {
            match b {
                b'(' => depth += 1,
                b')' => depth -= 1,
                _ => return Err(Error::Parse(format!("unexpected byte at {i} in key {s:?}"))),
            }
            if depth < 0 || (depth == 0 && i + 1 != bytes.len()) {
                return Err(Error::Parse(format!("unbalanced key {s:?}")));
            }
        }
        if bytes.is_empty() || depth != 0 {
            return Err(Error::Parse(format!("unbalanced key {s:?}")));
        }
        // Re-canonicalize so hand-written keys in any child order are accepted.
        Ok(canonical_unordered(&UnorderedKey(bytes).representative()))
    }
}

impl fmt::Display for UnorderedKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(std::str::from_utf8(&self.0).expect("ascii parens"))
    }
}

impl Serialize for UnorderedKey {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub fn canonical_unordered(tree: &PlaneTree) -> UnorderedKey {
    let children = tree.children();
    let mut codes: Vec<Vec<u8>> = vec![Vec::new(); tree.size()];
    for v in (0..tree.size()).rev() {
        let mut parts: Vec<Vec<u8>> = children[v].iter().map(|&c| std::mem::take(&mut codes[c])).collect();
        parts.sort();
        let mut code = Vec::with_capacity(2 + parts.iter().map(Vec::len).sum::<usize>());
        code.push(b'(');
        for p in parts {
            code.extend(p);
        }
        code.push(b')');
        codes[v] = code;
    }
    UnorderedKey(std::mem::take(&mut codes[0]))
}

/// `Ord(T)`: every plane tree whose unordered shape is `key`.
pub fn enumerate_orderings(key: &UnorderedKey, cap: usize) -> Result<BTreeSet<PlaneTree>> {
    if key.size() > cap {
        return Err(Error::CapExceeded { size: key.size(), cap });
    }
    Ok(orderings(key)
        .into_iter()
        .map(PlaneTree::from_preorder_unchecked)
        .collect())
}

fn orderings(key: &UnorderedKey) -> Vec<Vec<u32>> {
    let children = key.children();
    let d = children.len() as u32;
    if children.is_empty() {
        return vec![vec![0]];
    }
    let mut classes: Vec<UnorderedKey> = children.clone();
    classes.dedup();
    let class_orderings: Vec<Vec<Vec<u32>>> = classes.iter().map(orderings).collect();
    let labels: Vec<u32> = children
        .iter()
        .map(|c| classes.iter().position(|k| k == c).expect("present") as u32)
        .collect();
    let mut out = Vec::new();
    for arrangement in MultisetPermutations::new(&labels, false) {
        let mut partial: Vec<Vec<u32>> = vec![vec![d]];
        for &class in &arrangement {
            let options = &class_orderings[class as usize];
            partial = partial
                .iter()
                .flat_map(|prefix| {
                    options.iter().map(move |o| {
                        let mut p = prefix.clone();
                        p.extend_from_slice(o);
                        p
                    })
                })
                .collect();
        }
        out.extend(partial);
    }
    out
}
