//! Maximum-weight bipartite assignment (Kuhn-Munkres with potentials).

/// Solves the rectangular maximum-weight assignment problem.
///
/// `weights[i][j]` is the gain of pairing row `i` with column `j`; all rows
/// must have the same length. Returns the optimal total and, per row, the
/// assigned column (`None` when there are more rows than columns).
pub fn max_weight_assignment(weights: &[Vec<f64>]) -> (f64, Vec<Option<usize>>) {
    let rows = weights.len();
    let cols = weights.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return (0.0, vec![None; rows]);
    }
    debug_assert!(weights.iter().all(|r| r.len() == cols));

    let n = rows.max(cols);
    let max = weights
        .iter()
        .flatten()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
        .max(0.0);
    // Square cost matrix; padding cells cost `max` (gain 0).
    let cost = |i: usize, j: usize| -> f64 {
        if i < rows && j < cols {
            max - weights[i][j]
        } else {
            max
        }
    };

    // 1-based arrays; column 0 is a virtual source.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut row_of_col = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of_col[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of_col[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
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

    let mut assignment = vec![None; rows];
    let mut total = 0.0;
    for j in 1..=n {
        let i = row_of_col[j];
        if i >= 1 && i <= rows && j <= cols {
            assignment[i - 1] = Some(j - 1);
            total += weights[i - 1][j - 1];
        }
    }
    (total, assignment)
}
