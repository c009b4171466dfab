//! Exact minimum-cost assignment (shortest augmenting paths with
//! potentials, O(n^3)).

/// Solves the square assignment problem for a row-major `n x n` cost
/// matrix. Returns `col_of_row`. Costs must be finite.
pub fn solve(cost: &[f64], n: usize) -> Vec<usize> {
    assert_eq!(cost.len(), n * n, "cost matrix must be n x n");
    if n == 0 {
        return Vec::new();
    }
    // 1-based internal indexing; column 0 is the virtual source.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut row_of_col = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![0.0f64; n + 1];
    let mut used = vec![false; n + 1];
    for i in 1..=n {
        row_of_col[0] = i;
        let mut j0 = 0usize;
        minv.fill(f64::INFINITY);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = row_of_col[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of_col[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of_col[j0] = row_of_col[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of_row = vec![0usize; n];
    for j in 1..=n {
        col_of_row[row_of_col[j] - 1] = j - 1;
    }
    col_of_row
}

/// Rectangular variant: `rows x cols` costs, each row matched to a distinct
/// column when `rows <= cols` (and vice versa). Unmatched entries are
/// `None`.
pub fn solve_rect(cost: &[f64], rows: usize, cols: usize) -> Vec<Option<usize>> {
    assert_eq!(cost.len(), rows * cols);
    let n = rows.max(cols);
    let mut sq = vec![0.0; n * n];
    for r in 0..rows {
        sq[r * n..r * n + cols].copy_from_slice(&cost[r * cols..(r + 1) * cols]);
    }
    let assign = solve(&sq, n);
    (0..rows)
        .map(|r| (assign[r] < cols).then_some(assign[r]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng as _;

    fn brute(cost: &[f64], n: usize) -> f64 {
        fn rec(cost: &[f64], n: usize, row: usize, used: &mut [bool], acc: f64, best: &mut f64) {
            if row == n {
                *best = best.min(acc);
                return;
            }
            for c in 0..n {
                if !used[c] {
                    used[c] = true;
                    rec(cost, n, row + 1, used, acc + cost[row * n + c], best);
                    used[c] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        rec(cost, n, 0, &mut vec![false; n], 0.0, &mut best);
        best
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = rng_from_seed(3);
        for n in 0..=7 {
            for _ in 0..30 {
                let cost: Vec<f64> = (0..n * n).map(|_| rng.random_range(0.0..10.0)).collect();
                let a = solve(&cost, n);
                let mut seen = vec![false; n];
                for &c in &a {
                    assert!(!seen[c]);
                    seen[c] = true;
                }
                let got: f64 = a.iter().enumerate().map(|(r, &c)| cost[r * n + c]).sum();
                assert!((got - brute(&cost, n)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn rectangular() {
        // 2 rows, 3 cols
        let cost = [5.0, 1.0, 9.0, 2.0, 8.0, 3.0];
        assert_eq!(solve_rect(&cost, 2, 3), vec![Some(1), Some(0)]);
        // 3 rows, 2 cols: one row left out
        let cost = [1.0, 9.0, 9.0, 1.0, 0.5, 0.5];
        let a = solve_rect(&cost, 3, 2);
        assert_eq!(a.iter().filter(|x| x.is_none()).count(), 1);
    }
}
