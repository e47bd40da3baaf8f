//! Dense two-phase simplex for small linear programs
//! `min c.x  s.t.  rows, x >= 0`.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Row {
    pub coefs: Vec<(usize, f64)>,
    pub cmp: Cmp,
    pub rhs: f64,
}

#[derive(Clone, Debug, Default)]
pub struct Lp {
    pub num_vars: usize,
    pub cost: Vec<f64>,
    pub rows: Vec<Row>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpError {
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

const EPS: f64 = 1e-10;
const FEAS_TOL: f64 = 1e-8;

impl Lp {
    pub fn new(num_vars: usize) -> Self {
        Lp {
            num_vars,
            cost: vec![0.0; num_vars],
            rows: Vec::new(),
        }
    }

    pub fn add_var(&mut self, cost: f64) -> usize {
        self.num_vars += 1;
        self.cost.push(cost);
        self.num_vars - 1
    }

    pub fn add_row(&mut self, coefs: Vec<(usize, f64)>, cmp: Cmp, rhs: f64) {
        self.rows.push(Row { coefs, cmp, rhs });
    }
}

struct Tableau {
    /// (m + 1) x (cols + 1); the last row holds reduced costs, the last
    /// column the right-hand side.
    t: Vec<f64>,
    m: usize,
    cols: usize,
    basis: Vec<usize>,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * (self.cols + 1) + c]
    }

    #[inline]
    fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.t[r * (self.cols + 1) + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.cols + 1;
        let p = self.at(pr, pc);
        for c in 0..w {
            self.t[pr * w + c] /= p;
        }
        for r in 0..=self.m {
            if r == pr {
                continue;
            }
            let f = self.t[r * w + pc];
            if f == 0.0 {
                continue;
            }
            for c in 0..w {
                let v = self.t[pr * w + c];
                if v != 0.0 {
                    self.t[r * w + c] -= f * v;
                }
            }
            self.t[r * w + pc] = 0.0;
        }
        self.basis[pr] = pc;
    }

    /// Minimizes the objective row over columns allowed by `allowed`.
    fn optimize(&mut self, allowed: &dyn Fn(usize) -> bool, max_iters: usize) -> Result<(), LpError> {
        let mut degenerate_streak = 0;
        for _ in 0..max_iters {
            let bland = degenerate_streak > 50;
            let mut enter = None;
            let mut best = -EPS;
            for c in 0..self.cols {
                if !allowed(c) {
                    continue;
                }
                let d = self.at(self.m, c);
                if d < -EPS {
                    if bland {
                        enter = Some(c);
                        break;
                    }
                    if d < best {
                        best = d;
                        enter = Some(c);
                    }
                }
            }
            let Some(pc) = enter else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.m {
                let a = self.at(r, pc);
                if a > EPS {
                    let ratio = self.rhs(r) / a;
                    let better = match leave {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < lratio - EPS
                                || (ratio <= lratio + EPS && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((pr, ratio)) = leave else {
                return Err(LpError::Unbounded);
            };
            if ratio.abs() <= EPS {
                degenerate_streak += 1;
            } else {
                degenerate_streak = 0;
            }
            self.pivot(pr, pc);
        }
        Err(LpError::IterationLimit)
    }
}

pub fn solve(lp: &Lp) -> Result<LpSolution, LpError> {
    let n = lp.num_vars;
    let m = lp.rows.len();
    // Normalize to rhs >= 0.
    type Row = (Vec<(usize, f64)>, Cmp, f64);
    let rows: Vec<Row> = lp
        .rows
        .iter()
        .map(|r| {
            if r.rhs < 0.0 {
                let cmp = match r.cmp {
                    Cmp::Le => Cmp::Ge,
                    Cmp::Ge => Cmp::Le,
                    Cmp::Eq => Cmp::Eq,
                };
                (r.coefs.iter().map(|&(j, a)| (j, -a)).collect(), cmp, -r.rhs)
            } else {
                (r.coefs.clone(), r.cmp, r.rhs)
            }
        })
        .collect();
    let n_slack = rows.iter().filter(|r| r.1 != Cmp::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Cmp::Le).count();
    let cols = n + n_slack + n_art;
    let art_start = n + n_slack;
    let mut tab = Tableau {
        t: vec![0.0; (m + 1) * (cols + 1)],
        m,
        cols,
        basis: vec![0; m],
    };
    let mut slack = n;
    let mut art = art_start;
    for (i, (coefs, cmp, rhs)) in rows.iter().enumerate() {
        for &(j, a) in coefs {
            *tab.at_mut(i, j) += a;
        }
        *tab.at_mut(i, cols) = *rhs;
        match cmp {
            Cmp::Le => {
                *tab.at_mut(i, slack) = 1.0;
                tab.basis[i] = slack;
                slack += 1;
            }
            Cmp::Ge => {
                *tab.at_mut(i, slack) = -1.0;
                slack += 1;
                *tab.at_mut(i, art) = 1.0;
                tab.basis[i] = art;
                art += 1;
            }
            Cmp::Eq => {
                *tab.at_mut(i, art) = 1.0;
                tab.basis[i] = art;
                art += 1;
            }
        }
    }
    let max_iters = 50 * (m + cols) + 1000;

    if n_art > 0 {
        // Phase 1: minimize the sum of artificials.
        for c in art_start..cols {
            *tab.at_mut(m, c) = 1.0;
        }
        for r in 0..m {
            if tab.basis[r] >= art_start {
                for c in 0..=cols {
                    let v = tab.at(r, c);
                    *tab.at_mut(m, c) -= v;
                }
            }
        }
        tab.optimize(&|_| true, max_iters)?;
        if -tab.at(m, cols) > FEAS_TOL {
            return Err(LpError::Infeasible);
        }
        // Drive remaining artificials out of the basis.
        for r in 0..m {
            if tab.basis[r] >= art_start {
                if let Some(c) = (0..art_start).find(|&c| tab.at(r, c).abs() > 1e-9) {
                    tab.pivot(r, c);
                }
            }
        }
    }

    // Phase 2 objective row.
    for c in 0..=cols {
        *tab.at_mut(m, c) = 0.0;
    }
    for (j, &cj) in lp.cost.iter().enumerate() {
        *tab.at_mut(m, j) = cj;
    }
    for r in 0..m {
        let b = tab.basis[r];
        let cb = if b < n { lp.cost[b] } else { 0.0 };
        if cb != 0.0 {
            for c in 0..=cols {
                let v = tab.at(r, c);
                *tab.at_mut(m, c) -= cb * v;
            }
        }
    }
    tab.optimize(&|c| c < art_start, max_iters)?;

    let mut x = vec![0.0; n];
    for r in 0..m {
        let b = tab.basis[r];
        if b < n {
            x[b] = tab.rhs(r).max(0.0);
        }
    }
    let objective = lp.cost.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution { x, objective })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y st x <= 4, 2y <= 12, 3x + 2y <= 18  ->  (2, 6), 36
        let mut lp = Lp::new(2);
        lp.cost = vec![-3.0, -5.0];
        lp.add_row(vec![(0, 1.0)], Cmp::Le, 4.0);
        lp.add_row(vec![(1, 2.0)], Cmp::Le, 12.0);
        lp.add_row(vec![(0, 3.0), (1, 2.0)], Cmp::Le, 18.0);
        let s = solve(&lp).unwrap();
        assert!((s.x[0] - 2.0).abs() < 1e-9 && (s.x[1] - 6.0).abs() < 1e-9);
        assert!((s.objective + 36.0).abs() < 1e-9);
    }

    #[test]
    fn phase_one_and_infeasibility() {
        let mut lp = Lp::new(2);
        lp.cost = vec![1.0, 1.0];
        lp.add_row(vec![(0, 1.0), (1, 1.0)], Cmp::Ge, 2.0);
        lp.add_row(vec![(0, 1.0)], Cmp::Le, 0.5);
        let s = solve(&lp).unwrap();
        assert!((s.objective - 2.0).abs() < 1e-9);

        lp.add_row(vec![(1, 1.0)], Cmp::Le, 1.0);
        assert_eq!(solve(&lp).unwrap_err(), LpError::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        let mut lp = Lp::new(1);
        lp.cost = vec![-1.0];
        lp.add_row(vec![(0, 1.0)], Cmp::Ge, 1.0);
        assert_eq!(solve(&lp).unwrap_err(), LpError::Unbounded);
    }
}
