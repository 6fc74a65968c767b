//! Maximum-weight one-to-one assignment on a rectangular score matrix
//! (Kuhn–Munkres with row potentials, O(r² c)).

/// Optimal matching as `(row, col)` pairs sorted by row, plus its total score.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub pairs: Vec<(usize, usize)>,
    pub total: f64,
}

/// Maximize the sum of matched scores. Every row of the smaller side is
/// matched. `scores` must be rectangular with finite entries.
pub fn optimal_assignment(scores: &[Vec<f64>]) -> Assignment {
    let rows = scores.len();
    let cols = scores.first().map_or(0, Vec::len);
    debug_assert!(scores.iter().all(|r| r.len() == cols));
    if rows == 0 || cols == 0 {
        return Assignment {
            pairs: Vec::new(),
            total: 0.0,
        };
    }

    let transposed = rows > cols;
    let (r, c) = if transposed { (cols, rows) } else { (rows, cols) };
    let cost = |i: usize, j: usize| -> f64 {
        if transposed {
            -scores[j][i]
        } else {
            -scores[i][j]
        }
    };

    // 1-based shortest augmenting path; column 0 is a virtual source.
    let mut u = vec![0.0; r + 1];
    let mut v = vec![0.0; c + 1];
    let mut owner = vec![0usize; c + 1];
    let mut way = vec![0usize; c + 1];
    for i in 1..=r {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; c + 1];
        let mut used = vec![false; c + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=c {
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
            for j in 0..=c {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut pairs: Vec<(usize, usize)> = (1..=c)
        .filter(|&j| owner[j] != 0)
        .map(|j| {
            let (i, j) = (owner[j] - 1, j - 1);
            if transposed {
                (j, i)
            } else {
                (i, j)
            }
        })
        .collect();
    pairs.sort_unstable();
    let total = pairs.iter().map(|&(i, j)| scores[i][j]).sum();
    Assignment { pairs, total }
}
