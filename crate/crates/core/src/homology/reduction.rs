//! Reference degree-1 computation: explicit vertices, edges and triangles,
//! standard column reduction of the boundary matrix over GF(2).

use super::{sort_pairs, BarcodeOutput, FiltrationCap, PointCloud, RipsComplex};
use crate::diagram::{DiagramPoint, PersistenceDiagram};

struct Simplex {
    value: f64,
    verts: Vec<usize>,
}

fn sym_diff(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len() + b.len());
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Materialises the full capped 2-skeleton; intended for small clouds.
pub fn rips_h1_naive(cloud: &PointCloud, cap: FiltrationCap) -> BarcodeOutput {
    let cx = RipsComplex::new(cloud, cap);
    let n = cx.n;
    let mut simplices: Vec<Simplex> = (0..n).map(|i| Simplex { value: 0.0, verts: vec![i] }).collect();
    for i in 0..n {
        for j in i + 1..n {
            let d = cx.d(i, j);
            if d <= cx.cap {
                simplices.push(Simplex { value: d, verts: vec![i, j] });
            }
            for k in j + 1..n {
                let v = d.max(cx.d(i, k)).max(cx.d(j, k));
                if v <= cx.cap {
                    simplices.push(Simplex { value: v, verts: vec![i, j, k] });
                }
            }
        }
    }
    simplices.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then(a.verts.len().cmp(&b.verts.len()))
            .then(a.verts.cmp(&b.verts))
    });
    let index: std::collections::HashMap<Vec<usize>, usize> =
        simplices.iter().enumerate().map(|(k, s)| (s.verts.clone(), k)).collect();
    let mut cols: Vec<Vec<usize>> = simplices
        .iter()
        .map(|s| {
            if s.verts.len() == 1 {
                return Vec::new();
            }
            let mut b: Vec<usize> = (0..s.verts.len())
                .map(|skip| {
                    let face: Vec<usize> = s
                        .verts
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| k != skip)
                        .map(|(_, &v)| v)
                        .collect();
                    index[&face]
                })
                .collect();
            b.sort_unstable();
            b
        })
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; simplices.len()];
    let mut paired = vec![false; simplices.len()];
    let mut points = Vec::new();
    for c in 0..cols.len() {
        while let Some(&low) = cols[c].last() {
            match owner[low] {
                Some(o) => cols[c] = sym_diff(&cols[c], &cols[o]),
                None => break,
            }
        }
        if let Some(&low) = cols[c].last() {
            owner[low] = Some(c);
            paired[low] = true;
            paired[c] = true;
            if simplices[c].verts.len() == 3 {
                let (birth, death) = (simplices[low].value, simplices[c].value);
                if death > birth {
                    points.push(DiagramPoint {
                        birth,
                        persistence: death - birth,
                    });
                }
            }
        }
    }
    let mut essential: Vec<f64> = simplices
        .iter()
        .enumerate()
        .filter(|(k, s)| s.verts.len() == 2 && !paired[*k] && cols[*k].is_empty())
        .map(|(_, s)| s.value)
        .collect();
    essential.sort_by(f64::total_cmp);
    sort_pairs(&mut points);
    BarcodeOutput {
        finite: PersistenceDiagram::new(1, points),
        essential_births: essential,
    }
}
