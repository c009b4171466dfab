//! Degree-1 persistent cohomology with implicit coboundaries.
//!
//! Edge columns are reduced in decreasing filtration order; the pivot of a
//! coboundary column is its earliest triangle. Spanning-tree edges pair
//! with vertices one degree down and are cleared up front.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use super::{sort_pairs, BarcodeOutput, RipsComplex};
use crate::diagram::{DiagramPoint, PersistenceDiagram};

/// Triangle in filtration order: diameter bits (monotone for nonnegative
/// floats), then lexicographic vertex code.
type TriKey = (u64, u64);

fn tri_key(cx: &RipsComplex, v: [usize; 3]) -> TriKey {
    let mut s = v;
    s.sort_unstable();
    let [a, b, c] = s;
    let diam = cx.d(a, b).max(cx.d(a, c)).max(cx.d(b, c));
    let n = cx.n as u64;
    (diam.to_bits(), (a as u64 * n + b as u64) * n + c as u64)
}

fn push_coboundary(cx: &RipsComplex, edge: (f64, u32, u32), heap: &mut BinaryHeap<Reverse<TriKey>>) {
    let (_, i, j) = edge;
    let (i, j) = (i as usize, j as usize);
    for k in 0..cx.n {
        if k == i || k == j {
            continue;
        }
        if cx.d(i, k) <= cx.cap && cx.d(j, k) <= cx.cap {
            heap.push(Reverse(tri_key(cx, [i, j, k])));
        }
    }
}

/// Pops the smallest entry with odd multiplicity.
fn pop_pivot(heap: &mut BinaryHeap<Reverse<TriKey>>) -> Option<TriKey> {
    while let Some(Reverse(top)) = heap.pop() {
        let mut odd = true;
        while heap.peek().is_some_and(|Reverse(t)| *t == top) {
            heap.pop();
            odd = !odd;
        }
        if odd {
            return Some(top);
        }
    }
    None
}

pub(super) fn h1(cx: &RipsComplex, in_tree: &[bool]) -> BarcodeOutput {
    let mut pivot_of: HashMap<TriKey, usize> = HashMap::new();
    // reduction columns: edge indices combined into each stored column
    let mut reduction: Vec<Vec<usize>> = vec![Vec::new(); cx.edges.len()];
    let mut points = Vec::new();
    let mut essential = Vec::new();
    let mut heap = BinaryHeap::new();
    for e in (0..cx.edges.len()).rev() {
        if in_tree[e] {
            continue;
        }
        heap.clear();
        let mut combo = vec![e];
        push_coboundary(cx, cx.edges[e], &mut heap);
        let pivot = loop {
            match pop_pivot(&mut heap) {
                None => break None,
                Some(p) => match pivot_of.get(&p) {
                    None => break Some(p),
                    Some(&other) => {
                        heap.push(Reverse(p));
                        for &f in &reduction[other] {
                            push_coboundary(cx, cx.edges[f], &mut heap);
                        }
                        combo.extend_from_slice(&reduction[other]);
                    }
                },
            }
        };
        let birth = cx.edges[e].0;
        match pivot {
            None => essential.push(birth),
            Some(p) => {
                let death = f64::from_bits(p.0);
                if death > birth {
                    points.push(DiagramPoint {
                        birth,
                        persistence: death - birth,
                    });
                }
                combo.sort_unstable();
                let mut reduced = Vec::with_capacity(combo.len());
                let mut k = 0;
                while k < combo.len() {
                    let mut r = k;
                    while r < combo.len() && combo[r] == combo[k] {
                        r += 1;
                    }
                    if (r - k) % 2 == 1 {
                        reduced.push(combo[k]);
                    }
                    k = r;
                }
                reduction[e] = reduced;
                pivot_of.insert(p, e);
            }
        }
    }
    sort_pairs(&mut points);
    essential.sort_by(f64::total_cmp);
    BarcodeOutput {
        finite: PersistenceDiagram::new(1, points),
        essential_births: essential,
    }
}
