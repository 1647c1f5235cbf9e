//! Maximum-weight one-to-one assignment (Hungarian algorithm).

/// Returns the best total weight and, for each row, the assigned column.
/// Rectangular inputs are padded with zero-weight dummies.
pub fn max_weight_assignment(weights: &[Vec<f64>]) -> (f64, Vec<Option<usize>>) {
    let rows = weights.len();
    let cols = weights.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return (0.0, vec![None; rows]);
    }
    let n = rows.max(cols);
    let top = weights
        .iter()
        .flatten()
        .copied()
        .fold(0.0f64, f64::max);
    let cost = |i: usize, j: usize| -> f64 {
        if i < rows && j < cols {
            top - weights[i][j]
        } else {
            top
        }
    };

    // 1-indexed potentials formulation; p[j] is the row matched to column j.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
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
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assigned = vec![None; rows];
    let mut picked = Vec::with_capacity(rows.min(cols));
    for j in 1..=n {
        let (i, c) = (p[j] - 1, j - 1);
        if i < rows && c < cols {
            assigned[i] = Some(c);
            picked.push(weights[i][c]);
        }
    }
    picked.sort_by(f64::total_cmp);
    (picked.iter().sum(), assigned)
}
