//! Integer matrix normal forms. Matrices are row-major `Vec<Vec<i128>>`.

pub(crate) type Mat = Vec<Vec<i128>>;

pub(crate) fn identity(n: usize) -> Mat {
    (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect()
}

/// `u * a * v = diag(d)` with `u`, `v` unimodular and `d[i] | d[i + 1]`.
/// `u_inv` is the inverse of `u`. `rank` counts the nonzero diagonal entries.
pub(crate) struct Smith {
    pub diag: Vec<i128>,
    pub rank: usize,
    pub u: Mat,
    pub u_inv: Mat,
    pub v: Mat,
}

struct Work {
    a: Mat,
    u: Mat,
    u_inv: Mat,
    v: Mat,
    rows: usize,
    cols: usize,
}

impl Work {
    // row_i += c * row_j
    fn add_row(&mut self, i: usize, j: usize, c: i128) {
        if c == 0 {
            return;
        }
        for k in 0..self.cols {
            self.a[i][k] += c * self.a[j][k];
        }
        for k in 0..self.rows {
            self.u[i][k] += c * self.u[j][k];
        }
        for k in 0..self.rows {
            self.u_inv[k][j] -= c * self.u_inv[k][i];
        }
    }

    // col_i += c * col_j
    fn add_col(&mut self, i: usize, j: usize, c: i128) {
        if c == 0 {
            return;
        }
        for k in 0..self.rows {
            self.a[k][i] += c * self.a[k][j];
        }
        for k in 0..self.cols {
            self.v[k][i] += c * self.v[k][j];
        }
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i != j {
            self.a.swap(i, j);
            self.u.swap(i, j);
            for row in &mut self.u_inv {
                row.swap(i, j);
            }
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i != j {
            for row in &mut self.a {
                row.swap(i, j);
            }
            for row in &mut self.v {
                row.swap(i, j);
            }
        }
    }

    fn negate_row(&mut self, i: usize) {
        for x in &mut self.a[i] {
            *x = -*x;
        }
        for x in &mut self.u[i] {
            *x = -*x;
        }
        for row in &mut self.u_inv {
            row[i] = -row[i];
        }
    }
}

pub(crate) fn smith(a: &Mat, rows: usize, cols: usize) -> Smith {
    let mut w = Work {
        a: a.clone(),
        u: identity(rows),
        u_inv: identity(rows),
        v: identity(cols),
        rows,
        cols,
    };
    let mut t = 0;
    while t < rows.min(cols) {
        // smallest nonzero entry of the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                let x = w.a[i][j];
                if x != 0 && best.is_none_or(|(bi, bj)| x.abs() < w.a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        w.swap_rows(t, bi);
        w.swap_cols(t, bj);
        loop {
            let p = w.a[t][t];
            let mut dirty = false;
            for i in t + 1..rows {
                let q = w.a[i][t].div_euclid(p);
                w.add_row(i, t, -q);
                if w.a[i][t] != 0 {
                    dirty = true;
                }
            }
            for j in t + 1..cols {
                let q = w.a[t][j].div_euclid(p);
                w.add_col(j, t, -q);
                if w.a[t][j] != 0 {
                    dirty = true;
                }
            }
            if dirty {
                let mut m = (t, t);
                for i in t..rows {
                    let x = w.a[i][t];
                    if x != 0 && x.abs() < w.a[m.0][m.1].abs() {
                        m = (i, t);
                    }
                }
                for j in t..cols {
                    let x = w.a[t][j];
                    if x != 0 && x.abs() < w.a[m.0][m.1].abs() {
                        m = (t, j);
                    }
                }
                w.swap_rows(t, m.0);
                w.swap_cols(t, m.1);
                continue;
            }
            // divisibility of the remaining block by the pivot
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| w.a[i][j] % p != 0));
            match bad {
                Some(i) => w.add_row(t, i, 1),
                None => break,
            }
        }
        if w.a[t][t] < 0 {
            w.negate_row(t);
        }
        t += 1;
    }
    let diag: Vec<i128> = (0..rows.min(cols)).map(|i| w.a[i][i]).collect();
    let rank = diag.iter().take_while(|&&d| d != 0).count();
    Smith {
        diag,
        rank,
        u: w.u,
        u_inv: w.u_inv,
        v: w.v,
    }
}

/// Matrix whose columns are `cols`, each of length `rows`.
pub(crate) fn from_columns(rows: usize, cols: &[Vec<i128>]) -> Mat {
    (0..rows)
        .map(|i| cols.iter().map(|c| c[i]).collect())
        .collect()
}

/// A basis of `{x : a x = 0}` over the integers.
pub(crate) fn kernel(a: &Mat, rows: usize, cols: usize) -> Vec<Vec<i128>> {
    let s = smith(a, rows, cols);
    (s.rank..cols)
        .map(|j| (0..cols).map(|i| s.v[i][j]).collect())
        .collect()
}

/// Some integer `x` with `a x = b`, if one exists.
pub(crate) fn solve(a: &Mat, rows: usize, cols: usize, b: &[i128]) -> Option<Vec<i128>> {
    let s = smith(a, rows, cols);
    let c: Vec<i128> = (0..rows)
        .map(|i| (0..rows).map(|k| s.u[i][k] * b[k]).sum())
        .collect();
    let mut y = vec![0i128; cols];
    for i in 0..rows {
        if i < s.rank {
            if c[i] % s.diag[i] != 0 {
                return None;
            }
            y[i] = c[i] / s.diag[i];
        } else if c[i] != 0 {
            return None;
        }
    }
    Some(
        (0..cols)
            .map(|i| (0..cols).map(|j| s.v[i][j] * y[j]).sum())
            .collect(),
    )
}
