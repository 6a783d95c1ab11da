//! Rectangular assignment with forbidden cells.
//!
//! The solver finds a matching of maximum cardinality among the allowed
//! cells and, among those, one of minimum total cost. It runs successive
//! shortest augmenting paths (Dijkstra with node potentials) on the
//! bipartite residual graph. Costs are shifted by their global minimum
//! first so every edge starts non-negative; since all candidate matchings
//! have the same size, the shift does not move the optimum.

use super::CostMatrix;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AssignmentResult {
    /// `(track_index, det_index)` pairs sorted by track index.
    pub matches: Vec<(usize, usize)>,
    pub unmatched_tracks: Vec<usize>,
    pub unmatched_dets: Vec<usize>,
}

impl AssignmentResult {
    fn from_row_matches(row_match: &[Option<usize>], cols: usize) -> Self {
        let mut col_used = vec![false; cols];
        let mut out = AssignmentResult::default();
        for (i, m) in row_match.iter().enumerate() {
            match m {
                Some(j) => {
                    col_used[*j] = true;
                    out.matches.push((i, *j));
                }
                None => out.unmatched_tracks.push(i),
            }
        }
        out.unmatched_dets = (0..cols).filter(|&j| !col_used[j]).collect();
        out
    }
}

/// Optimal gated assignment with a deterministic tie-break.
///
/// Among optimal matchings the lexicographically smallest list of
/// `(track_index, det_index)` pairs is returned.
pub fn solve_assignment(c: &CostMatrix) -> AssignmentResult {
    let (n, m) = (c.rows(), c.cols());
    let cost = c.raw();
    let rows: Vec<usize> = (0..n).collect();
    let cols: Vec<usize> = (0..m).collect();
    let best = solve_subset(cost, n, m, &rows, &cols);

    let max_abs = cost
        .iter()
        .filter(|c| c.is_finite())
        .fold(0.0f64, |acc, c| acc.max(c.abs()));
    let tol = 1e-10 * (1.0 + max_abs) * (n + m) as f64;

    let mut current = best.row_match.clone();
    let mut col_used = vec![false; m];
    let mut prefix_cost = 0.0;
    let mut prefix_size = 0;
    for i in 0..n {
        let limit = current[i].unwrap_or(m);
        for j in 0..limit {
            let cij = cost[i * m + j];
            if !cij.is_finite() || col_used[j] {
                continue;
            }
            let rest_rows: Vec<usize> = (i + 1..n).collect();
            let rest_cols: Vec<usize> = (0..m).filter(|&k| k != j && !col_used[k]).collect();
            let sub = solve_subset(cost, n, m, &rest_rows, &rest_cols);
            let size = prefix_size + 1 + sub.size;
            let total = prefix_cost + cij + sub.total;
            if size == best.size && (total - best.total).abs() <= tol {
                current[i] = Some(j);
                current[i + 1..n].copy_from_slice(&sub.row_match[i + 1..n]);
                break;
            }
        }
        if let Some(j) = current[i] {
            col_used[j] = true;
            prefix_cost += cost[i * m + j];
            prefix_size += 1;
        }
    }
    AssignmentResult::from_row_matches(&current, m)
}

/// Optimal assignment without the lexicographic refinement.
///
/// Returns the matching and its total cost. Intended for large, tie-heavy
/// problems where any optimum will do.
pub fn min_cost_matching(c: &CostMatrix) -> (AssignmentResult, f64) {
    let rows: Vec<usize> = (0..c.rows()).collect();
    let cols: Vec<usize> = (0..c.cols()).collect();
    let s = solve_subset(c.raw(), c.rows(), c.cols(), &rows, &cols);
    (AssignmentResult::from_row_matches(&s.row_match, c.cols()), s.total)
}

#[derive(Debug, Clone)]
struct Solution {
    /// Indexed by the full row index; rows outside the subset are `None`.
    row_match: Vec<Option<usize>>,
    size: usize,
    total: f64,
}

/// Solves the sub-problem restricted to `rows × cols` of a row-major
/// `total_rows × stride` matrix.
fn solve_subset(
    cost: &[f64],
    total_rows: usize,
    stride: usize,
    rows: &[usize],
    cols: &[usize],
) -> Solution {
    let n = rows.len();
    let m = cols.len();
    let mut sol = Solution {
        row_match: vec![None; total_rows],
        size: 0,
        total: 0.0,
    };
    if n == 0 || m == 0 {
        return sol;
    }

    let mut local = Vec::with_capacity(n * m);
    for &r in rows {
        for &c in cols {
            local.push(cost[r * stride + c]);
        }
    }
    let shift = local
        .iter()
        .copied()
        .filter(|c| c.is_finite())
        .fold(f64::INFINITY, f64::min);
    if !shift.is_finite() {
        return sol;
    }
    for c in &mut local {
        *c -= shift;
    }

    let row_match = shortest_augmenting_paths(&local, n, m);
    for (li, lj) in row_match.iter().enumerate() {
        if let Some(lj) = lj {
            let (r, c) = (rows[li], cols[*lj]);
            sol.row_match[r] = Some(c);
            sol.size += 1;
            sol.total += cost[r * stride + c];
        }
    }
    sol
}

/// Min-cost maximum matching on a dense non-negative matrix (`inf` = no edge).
fn shortest_augmenting_paths(cost: &[f64], n: usize, m: usize) -> Vec<Option<usize>> {
    const INF: f64 = f64::INFINITY;
    let mut row_match: Vec<Option<usize>> = vec![None; n];
    let mut col_match: Vec<Option<usize>> = vec![None; m];
    // potentials; the source keeps potential 0
    let mut h_row = vec![0.0f64; n];
    let mut h_col = vec![0.0; m];
    let mut h_sink = 0.0;

    let mut dist_row = vec![INF; n];
    let mut dist_col = vec![INF; m];
    let mut done_row = vec![false; n];
    let mut done_col = vec![false; m];
    let mut parent_col = vec![usize::MAX; m]; // row that reached the column
    let mut parent_row = vec![usize::MAX; n]; // matched column that reached the row

    loop {
        dist_row.fill(INF);
        dist_col.fill(INF);
        done_row.fill(false);
        done_col.fill(false);
        let mut dist_sink = INF;
        let mut sink_parent = usize::MAX;

        for i in 0..n {
            if row_match[i].is_none() {
                dist_row[i] = (-h_row[i]).max(0.0);
                parent_row[i] = usize::MAX;
            }
        }

        loop {
            // pick the closest unsettled node
            let mut best = dist_sink;
            let mut pick: Option<(bool, usize)> = None; // (is_row, index); None = sink
            for i in 0..n {
                if !done_row[i] && dist_row[i] < best {
                    best = dist_row[i];
                    pick = Some((true, i));
                }
            }
            for j in 0..m {
                if !done_col[j] && dist_col[j] < best {
                    best = dist_col[j];
                    pick = Some((false, j));
                }
            }
            if !best.is_finite() {
                break;
            }
            match pick {
                None => break, // sink settled
                Some((true, i)) => {
                    done_row[i] = true;
                    let base = dist_row[i] + h_row[i];
                    let row = &cost[i * m..(i + 1) * m];
                    for j in 0..m {
                        if done_col[j] || !row[j].is_finite() || row_match[i] == Some(j) {
                            continue;
                        }
                        let d = base + row[j] - h_col[j];
                        if d < dist_col[j] {
                            dist_col[j] = d;
                            parent_col[j] = i;
                        }
                    }
                }
                Some((false, j)) => {
                    done_col[j] = true;
                    match col_match[j] {
                        Some(i) => {
                            if !done_row[i] {
                                let d = dist_col[j] - cost[i * m + j] + h_col[j] - h_row[i];
                                if d < dist_row[i] {
                                    dist_row[i] = d;
                                    parent_row[i] = j;
                                }
                            }
                        }
                        None => {
                            let d = dist_col[j] + h_col[j] - h_sink;
                            if d < dist_sink {
                                dist_sink = d;
                                sink_parent = j;
                            }
                        }
                    }
                }
            }
        }

        if !dist_sink.is_finite() {
            break;
        }

        for i in 0..n {
            h_row[i] += dist_row[i].min(dist_sink);
        }
        for j in 0..m {
            h_col[j] += dist_col[j].min(dist_sink);
        }
        h_sink += dist_sink;

        // flip the path
        let mut j = sink_parent;
        loop {
            let i = parent_col[j];
            let prev = parent_row[i];
            row_match[i] = Some(j);
            col_match[j] = Some(i);
            if prev == usize::MAX {
                break;
            }
            j = prev;
        }
    }
    row_match
}
