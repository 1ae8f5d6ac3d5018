//! Sparse LU factorization of a simplex basis with Markowitz pivoting and
//! product-form updates.
//!
//! The factorization records the elimination as a sequence of row
//! operations (`L`) and the pivot rows left behind (`U`). Right-hand sides
//! are indexed by constraint row, solutions by basis position.

const NONE: usize = usize::MAX;
/// Relative threshold for accepting a pivot against its column maximum.
const THRESHOLD: f64 = 0.1;
/// Entries smaller than this are dropped during elimination.
const DROP_TOL: f64 = 1e-14;
/// Pivots smaller than this in absolute value count as zero.
const ZERO_PIVOT: f64 = 1e-11;
/// Columns examined per Markowitz search.
const SEARCH_COLS: usize = 4;

#[derive(Debug, Clone)]
pub(crate) struct Lu {
    m: usize,
    prow: Vec<usize>,
    pcol: Vec<usize>,
    pval: Vec<f64>,
    l_start: Vec<usize>,
    l_row: Vec<usize>,
    l_val: Vec<f64>,
    u_start: Vec<usize>,
    u_col: Vec<usize>,
    u_val: Vec<f64>,
}

/// Basis positions and rows left without a pivot.
#[derive(Debug, Clone)]
pub(crate) struct Singular {
    pub positions: Vec<usize>,
    pub rows: Vec<usize>,
}

pub(crate) fn factorize(m: usize, columns: &[Vec<(usize, f64)>]) -> Result<Lu, Singular> {
    debug_assert_eq!(columns.len(), m);
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut col_count = vec![0usize; m];
    for (c, col) in columns.iter().enumerate() {
        for &(r, v) in col {
            if v.abs() > DROP_TOL {
                rows[r].push((c, v));
                col_rows[c].push(r);
                col_count[c] += 1;
            }
        }
    }
    let mut row_active = vec![true; m];
    let mut col_active = vec![true; m];

    let mut col_singletons: Vec<usize> = (0..m).filter(|&c| col_count[c] == 1).collect();
    col_singletons.reverse();
    let mut row_singletons: Vec<usize> = (0..m).filter(|&r| rows[r].len() == 1).collect();
    row_singletons.reverse();

    let mut lu = Lu {
        m,
        prow: Vec::with_capacity(m),
        pcol: Vec::with_capacity(m),
        pval: Vec::with_capacity(m),
        l_start: vec![0],
        l_row: Vec::new(),
        l_val: Vec::new(),
        u_start: vec![0],
        u_col: Vec::new(),
        u_val: Vec::new(),
    };
    let mut wpos = vec![NONE; m];
    let mut seen = vec![false; m];

    for _ in 0..m {
        let pivot = next_pivot(
            &rows,
            &col_rows,
            &col_count,
            &row_active,
            &col_active,
            &mut col_singletons,
            &mut row_singletons,
        );
        let Some((r, c)) = pivot else { break };
        let p = entry(&rows[r], c).expect("pivot entry present");

        let prow_entries = std::mem::take(&mut rows[r]);
        row_active[r] = false;
        col_active[c] = false;

        // eliminate column c from every other active row
        for k in 0..col_rows[c].len() {
            let i = col_rows[c][k];
            if !row_active[i] || seen[i] {
                continue;
            }
            seen[i] = true;
            let Some(idx) = rows[i].iter().position(|e| e.0 == c) else {
                continue;
            };
            let a_ic = rows[i].swap_remove(idx).1;
            let mult = a_ic / p;
            lu.l_row.push(i);
            lu.l_val.push(mult);

            let row = &mut rows[i];
            for (j, e) in row.iter().enumerate() {
                wpos[e.0] = j;
            }
            for &(col, v) in &prow_entries {
                if col == c {
                    continue;
                }
                if wpos[col] != NONE {
                    row[wpos[col]].1 -= mult * v;
                } else {
                    wpos[col] = row.len();
                    row.push((col, -mult * v));
                    col_rows[col].push(i);
                    col_count[col] += 1;
                }
            }
            for e in row.iter() {
                wpos[e.0] = NONE;
            }
            // drop cancellations
            row.retain(|&(col, v)| {
                let keep = v.abs() > DROP_TOL;
                if !keep {
                    col_count[col] -= 1;
                    if col_count[col] == 1 && col_active[col] {
                        col_singletons.push(col);
                    }
                }
                keep
            });
            if row.len() == 1 {
                row_singletons.push(i);
            }
        }
        for &i in &col_rows[c] {
            seen[i] = false;
        }

        for &(col, _) in &prow_entries {
            if col != c {
                col_count[col] -= 1;
                if col_count[col] == 1 && col_active[col] {
                    col_singletons.push(col);
                }
            }
        }
        // the pivot row leaves every column it touched; column c is gone
        col_count[c] = 0;

        for &(col, v) in &prow_entries {
            if col != c {
                lu.u_col.push(col);
                lu.u_val.push(v);
            }
        }
        lu.prow.push(r);
        lu.pcol.push(c);
        lu.pval.push(p);
        lu.l_start.push(lu.l_row.len());
        lu.u_start.push(lu.u_col.len());
    }

    if lu.prow.len() < m {
        return Err(Singular {
            positions: (0..m).filter(|&c| col_active[c]).collect(),
            rows: (0..m).filter(|&r| row_active[r]).collect(),
        });
    }
    Ok(lu)
}

fn entry(row: &[(usize, f64)], c: usize) -> Option<f64> {
    row.iter().find(|e| e.0 == c).map(|e| e.1)
}

fn column_max(
    rows: &[Vec<(usize, f64)>],
    col_rows: &[usize],
    row_active: &[bool],
    c: usize,
) -> f64 {
    col_rows
        .iter()
        .filter(|&&i| row_active[i])
        .filter_map(|&i| entry(&rows[i], c))
        .fold(0.0, |m, v| m.max(v.abs()))
}

#[allow(clippy::too_many_arguments)]
fn next_pivot(
    rows: &[Vec<(usize, f64)>],
    col_rows: &[Vec<usize>],
    col_count: &[usize],
    row_active: &[bool],
    col_active: &[bool],
    col_singletons: &mut Vec<usize>,
    row_singletons: &mut Vec<usize>,
) -> Option<(usize, usize)> {
    while let Some(c) = col_singletons.pop() {
        if !col_active[c] || col_count[c] != 1 {
            continue;
        }
        let found = col_rows[c]
            .iter()
            .copied()
            .find(|&i| row_active[i] && entry(&rows[i], c).is_some());
        if let Some(r) = found {
            if entry(&rows[r], c).is_some_and(|v| v.abs() > ZERO_PIVOT) {
                return Some((r, c));
            }
        }
    }
    while let Some(r) = row_singletons.pop() {
        if !row_active[r] || rows[r].len() != 1 {
            continue;
        }
        let (c, v) = rows[r][0];
        if !col_active[c] || v.abs() <= ZERO_PIVOT {
            continue;
        }
        if v.abs() >= THRESHOLD * column_max(rows, &col_rows[c], row_active, c) {
            return Some((r, c));
        }
    }

    // Markowitz search over the sparsest active columns
    let mut cands: Vec<(usize, usize)> = Vec::with_capacity(SEARCH_COLS);
    for c in 0..col_count.len() {
        if !col_active[c] || col_count[c] == 0 {
            continue;
        }
        let cnt = col_count[c];
        if cands.len() < SEARCH_COLS {
            cands.push((cnt, c));
            cands.sort_unstable();
        } else if cnt < cands[SEARCH_COLS - 1].0 {
            cands[SEARCH_COLS - 1] = (cnt, c);
            cands.sort_unstable();
        }
    }
    let mut best: Option<(usize, f64, usize, usize)> = None;
    for &(cnt, c) in &cands {
        let cmax = column_max(rows, &col_rows[c], row_active, c);
        if cmax <= ZERO_PIVOT {
            continue;
        }
        for &i in &col_rows[c] {
            if !row_active[i] {
                continue;
            }
            let Some(v) = entry(&rows[i], c) else {
                continue;
            };
            if v.abs() < THRESHOLD * cmax || v.abs() <= ZERO_PIVOT {
                continue;
            }
            let merit = (rows[i].len() - 1) * (cnt - 1);
            let better = match best {
                None => true,
                Some((bm, bv, _, _)) => merit < bm || (merit == bm && v.abs() > bv),
            };
            if better {
                best = Some((merit, v.abs(), i, c));
            }
        }
    }
    best.map(|(_, _, r, c)| (r, c))
}

impl Lu {
    /// Solves `B x = b` in place: `b` is indexed by row on entry and by
    /// basis position on exit.
    pub(crate) fn ftran(&self, b: &mut [f64], work: &mut [f64]) {
        for k in 0..self.m {
            let v = b[self.prow[k]];
            if v != 0.0 {
                for e in self.l_start[k]..self.l_start[k + 1] {
                    b[self.l_row[e]] -= self.l_val[e] * v;
                }
            }
        }
        for k in (0..self.m).rev() {
            let mut s = b[self.prow[k]];
            for e in self.u_start[k]..self.u_start[k + 1] {
                s -= self.u_val[e] * work[self.u_col[e]];
            }
            work[self.pcol[k]] = s / self.pval[k];
        }
        b.copy_from_slice(work);
    }

    /// Solves `Bᵀ y = c` in place: `c` is indexed by basis position on
    /// entry and by row on exit.
    pub(crate) fn btran(&self, c: &mut [f64], work: &mut [f64]) {
        for k in 0..self.m {
            let z = c[self.pcol[k]] / self.pval[k];
            work[self.prow[k]] = z;
            if z != 0.0 {
                for e in self.u_start[k]..self.u_start[k + 1] {
                    c[self.u_col[e]] -= self.u_val[e] * z;
                }
            }
        }
        for k in (0..self.m).rev() {
            let mut s = 0.0;
            for e in self.l_start[k]..self.l_start[k + 1] {
                s += self.l_val[e] * work[self.l_row[e]];
            }
            work[self.prow[k]] -= s;
        }
        c.copy_from_slice(work);
    }
}

/// Column replacement `B_new = B E` with `E` the identity whose column
/// `pos` is `alpha = B⁻¹ a_entering`.
#[derive(Debug, Clone)]
pub(crate) struct Eta {
    pos: usize,
    pivot: f64,
    entries: Vec<(usize, f64)>,
}

impl Eta {
    pub(crate) fn new(pos: usize, alpha: &[f64]) -> Self {
        let entries = alpha
            .iter()
            .enumerate()
            .filter(|&(i, &a)| i != pos && a.abs() > DROP_TOL)
            .map(|(i, &a)| (i, a))
            .collect();
        Eta {
            pos,
            pivot: alpha[pos],
            entries,
        }
    }

    pub(crate) fn apply_ftran(&self, x: &mut [f64]) {
        let xp = x[self.pos] / self.pivot;
        x[self.pos] = xp;
        if xp != 0.0 {
            for &(i, a) in &self.entries {
                x[i] -= a * xp;
            }
        }
    }

    pub(crate) fn apply_btran(&self, c: &mut [f64]) {
        let mut s = c[self.pos];
        for &(i, a) in &self.entries {
            s -= a * c[i];
        }
        c[self.pos] = s / self.pivot;
    }
}
