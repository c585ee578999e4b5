//! Primal-dual interior point method with Nesterov–Todd scaling and
//! Mehrotra predictor-corrector steps, for small dense block SDPs.

use std::collections::BTreeMap;

use log::debug;
use nalgebra::{DMatrix, DVector};

use super::problem::{IterateSummary, SdpProblem, SdpSolution, SolverOptions, Status};
use crate::error::{Error, Result};

type Mat = DMatrix<f64>;

pub const MAX_TOTAL_DIM: usize = 256;

/// Above this many coefficients a block part is multiplied densely.
const DENSE_PART_FACTOR: usize = 1;

struct Part {
    block: usize,
    entries: Vec<(usize, usize, f64)>,
    dense: Mat,
    use_dense: bool,
}

struct Data {
    blocks: Vec<usize>,
    c: Vec<Mat>,
    a: Vec<Vec<Part>>,
    b: DVector<f64>,
    /// Constraint indices touching each block.
    by_block: Vec<Vec<(usize, usize)>>,
}

fn symmetric_from(entries: &[(usize, usize, f64)], n: usize) -> Mat {
    let mut m = Mat::zeros(n, n);
    for &(r, c, v) in entries {
        m[(r, c)] += v;
        if r != c {
            m[(c, r)] += v;
        }
    }
    m
}

impl Data {
    fn new(p: &SdpProblem, kept: &[usize]) -> Data {
        let blocks = p.blocks.clone();
        let mut c_entries: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); blocks.len()];
        for e in &p.objective {
            c_entries[e.block].push((e.row, e.col, e.value));
        }
        let c = c_entries
            .iter()
            .zip(&blocks)
            .map(|(es, &n)| symmetric_from(es, n))
            .collect();
        let mut a = Vec::with_capacity(kept.len());
        let mut by_block = vec![Vec::new(); blocks.len()];
        for (i, &orig) in kept.iter().enumerate() {
            let mut merged: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
            for e in &p.constraints[orig].entries {
                *merged.entry((e.block, e.row, e.col)).or_insert(0.0) += e.value;
            }
            let mut parts: Vec<Part> = Vec::new();
            for ((blk, r, cc), v) in merged {
                if v == 0.0 {
                    continue;
                }
                match parts.last_mut() {
                    Some(part) if part.block == blk => part.entries.push((r, cc, v)),
                    _ => parts.push(Part {
                        block: blk,
                        entries: vec![(r, cc, v)],
                        dense: Mat::zeros(0, 0),
                        use_dense: false,
                    }),
                }
            }
            for (k, part) in parts.iter_mut().enumerate() {
                let n = blocks[part.block];
                part.dense = symmetric_from(&part.entries, n);
                part.use_dense = part.entries.len() > DENSE_PART_FACTOR * n;
                by_block[part.block].push((i, k));
            }
            a.push(parts);
        }
        let b = DVector::from_iterator(kept.len(), kept.iter().map(|&i| p.constraints[i].rhs));
        Data {
            blocks,
            c,
            a,
            b,
            by_block,
        }
    }

    fn m(&self) -> usize {
        self.a.len()
    }

    fn apply_a(&self, x: &[Mat]) -> DVector<f64> {
        DVector::from_iterator(
            self.m(),
            self.a
                .iter()
                .map(|parts| parts.iter().map(|p| part_inner(p, &x[p.block])).sum()),
        )
    }

    fn apply_at(&self, y: &DVector<f64>) -> Vec<Mat> {
        let mut out: Vec<Mat> = self.blocks.iter().map(|&n| Mat::zeros(n, n)).collect();
        for (i, parts) in self.a.iter().enumerate() {
            if y[i] == 0.0 {
                continue;
            }
            for p in parts {
                out[p.block] += &p.dense * y[i];
            }
        }
        out
    }
}

/// `⟨A_part, M⟩` for symmetric `M`.
fn part_inner(p: &Part, m: &Mat) -> f64 {
    p.entries
        .iter()
        .map(|&(r, c, v)| {
            if r == c {
                v * m[(r, c)]
            } else {
                v * (m[(r, c)] + m[(c, r)])
            }
        })
        .sum()
}

/// `W A W` for one block part.
fn sandwich(p: &Part, w: &Mat) -> Mat {
    if p.use_dense {
        return w * (&p.dense * w);
    }
    let n = w.nrows();
    let mut out = Mat::zeros(n, n);
    for &(r, c, v) in &p.entries {
        let wr = w.column(r);
        let wc = w.column(c);
        if r == c {
            out.ger(v, &wr, &wr, 1.0);
        } else {
            out.ger(v, &wr, &wc, 1.0);
            out.ger(v, &wc, &wr, 1.0);
        }
    }
    out
}

fn inner(a: &[Mat], b: &[Mat]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn norm(a: &[Mat]) -> f64 {
    a.iter().map(|x| x.norm_squared()).sum::<f64>().sqrt()
}

fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

/// Outcome of removing linearly dependent constraints.
struct Presolved {
    kept: Vec<usize>,
    removed: Vec<usize>,
    inconsistent: bool,
}

/// Rank-revealing Gram–Schmidt on the constraint rows in `svec` coordinates.
fn presolve(p: &SdpProblem) -> Presolved {
    let offsets: Vec<usize> = p
        .blocks
        .iter()
        .scan(0, |acc, &n| {
            let o = *acc;
            *acc += n * (n + 1) / 2;
            Some(o)
        })
        .collect();
    let len: usize = p.blocks.iter().map(|&n| n * (n + 1) / 2).sum();
    let sqrt2 = std::f64::consts::SQRT_2;
    let row = |i: usize| -> DVector<f64> {
        let mut v = DVector::zeros(len);
        for e in &p.constraints[i].entries {
            let idx = offsets[e.block] + e.col * (e.col + 1) / 2 + e.row;
            v[idx] += if e.row == e.col {
                e.value
            } else {
                sqrt2 * e.value
            };
        }
        v
    };

    let m = p.constraints.len();
    let mut q: Vec<DVector<f64>> = Vec::new();
    // q_k = Σ_j t[k][j] a_{kept[j]}
    let mut t: Vec<Vec<f64>> = Vec::new();
    let mut kept = Vec::new();
    let mut removed = Vec::new();
    let mut inconsistent = false;
    for i in 0..m {
        let a = row(i);
        let a_norm = a.norm();
        let mut res = a.clone();
        let mut h = vec![0.0; q.len()];
        for _ in 0..2 {
            for (k, qk) in q.iter().enumerate() {
                let proj = qk.dot(&res);
                h[k] += proj;
                res.axpy(-proj, qk, 1.0);
            }
        }
        let r_norm = res.norm();
        if a_norm > 0.0 && r_norm > 1e-9 * a_norm {
            let mut t_new = vec![0.0; kept.len() + 1];
            for (k, tk) in t.iter().enumerate() {
                for (j, &v) in tk.iter().enumerate() {
                    t_new[j] -= h[k] * v;
                }
            }
            t_new[kept.len()] = 1.0;
            for v in &mut t_new {
                *v /= r_norm;
            }
            for tk in &mut t {
                tk.push(0.0);
            }
            q.push(res / r_norm);
            t.push(t_new);
            kept.push(i);
        } else {
            // a_i = Σ_j coef_j a_{kept[j]}
            let mut predicted = 0.0;
            let mut scale = p.constraints[i].rhs.abs();
            for j in 0..kept.len() {
                let coef: f64 = (0..q.len()).map(|k| h[k] * t[k][j]).sum();
                let term = coef * p.constraints[kept[j]].rhs;
                predicted += term;
                scale += term.abs();
            }
            if (p.constraints[i].rhs - predicted).abs() > 1e-7 * (1.0 + scale) {
                inconsistent = true;
            }
            removed.push(i);
        }
    }
    Presolved {
        kept,
        removed,
        inconsistent,
    }
}

struct Scaling {
    g: Mat,
    g_inv: Mat,
    w: Mat,
    lambda: DVector<f64>,
}

fn lower_inverse(l: &Mat) -> Option<Mat> {
    l.solve_lower_triangular(&Mat::identity(l.nrows(), l.ncols()))
}

fn nt_scaling(x: &Mat, s: &Mat) -> Option<Scaling> {
    let lx = x.clone().cholesky()?.l();
    let ls = s.clone().cholesky()?.l();
    let svd = (ls.transpose() * &lx).svd(true, true);
    let v = svd.v_t?.transpose();
    let d = svd.singular_values;
    if d.iter().any(|&di| !(di > 0.0)) {
        return None;
    }
    let d_inv_sqrt = Mat::from_diagonal(&d.map(|di| di.powf(-0.5)));
    let d_sqrt = Mat::from_diagonal(&d.map(f64::sqrt));
    let g = &lx * &v * d_inv_sqrt;
    let g_inv = d_sqrt * v.transpose() * lower_inverse(&lx)?;
    let w = &g * g.transpose();
    Some(Scaling {
        g,
        g_inv,
        w,
        lambda: d,
    })
}

/// Largest `α` with `X + α ΔX ⪰ 0` (infinite when `ΔX ⪰ 0`).
fn max_step(x: &Mat, dx: &Mat) -> f64 {
    let Some(chol) = x.clone().cholesky() else {
        return 0.0;
    };
    let l = chol.l();
    let Some(y) = l.solve_lower_triangular(dx) else {
        return 0.0;
    };
    let Some(m) = l.solve_lower_triangular(&y.transpose()) else {
        return 0.0;
    };
    let min = symmetrize(&m).symmetric_eigenvalues().min();
    if min >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / min
    }
}

fn max_step_all(x: &[Mat], dx: &[Mat]) -> f64 {
    x.iter()
        .zip(dx)
        .map(|(a, b)| max_step(a, b))
        .fold(f64::INFINITY, f64::min)
}

enum Factor {
    Chol(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl Factor {
    fn solve(&self, rhs: &DVector<f64>) -> Option<DVector<f64>> {
        match self {
            Factor::Chol(c) => Some(c.solve(rhs)),
            Factor::Lu(lu) => lu.solve(rhs),
        }
    }
}

fn schur_complement(data: &Data, scal: &[Scaling]) -> Mat {
    let m = data.m();
    let mut schur = Mat::zeros(m, m);
    for (j, parts) in data.a.iter().enumerate() {
        for pj in parts {
            let waw = sandwich(pj, &scal[pj.block].w);
            for &(i, k) in &data.by_block[pj.block] {
                if i < j {
                    continue;
                }
                schur[(i, j)] += part_inner(&data.a[i][k], &waw);
            }
        }
    }
    for j in 0..m {
        for i in 0..j {
            schur[(i, j)] = schur[(j, i)];
        }
    }
    schur
}

fn factor(schur: Mat) -> Option<Factor> {
    match schur.clone().cholesky() {
        Some(c) => Some(Factor::Chol(c)),
        None => {
            let lu = schur.lu();
            if lu.is_invertible() {
                Some(Factor::Lu(lu))
            } else {
                None
            }
        }
    }
}

struct Direction {
    dx: Vec<Mat>,
    dy: DVector<f64>,
    ds: Vec<Mat>,
}

/// Solves `A(ΔX) = r_p`, `AᵀΔy + ΔS = R_d`, `ΔX + WΔSW = R_c`.
fn direction(
    data: &Data,
    scal: &[Scaling],
    fac: Option<&Factor>,
    rp: &DVector<f64>,
    rd: &[Mat],
    rc: &[Mat],
) -> Option<Direction> {
    let t: Vec<Mat> = rc
        .iter()
        .zip(rd)
        .zip(scal)
        .map(|((c, d), s)| c - &s.w * d * &s.w)
        .collect();
    let rhs = rp - data.apply_a(&t);
    let dy = match fac {
        Some(f) => f.solve(&rhs)?,
        None => DVector::zeros(0),
    };
    let aty = data.apply_at(&dy);
    let ds: Vec<Mat> = rd.iter().zip(&aty).map(|(d, a)| d - a).collect();
    let dx = rc
        .iter()
        .zip(&ds)
        .zip(scal)
        .map(|((c, d), s)| symmetrize(&(c - &s.w * d * &s.w)))
        .collect();
    Some(Direction { dx, dy, ds })
}

/// Right-hand side `R_c = G Z Gᵀ` with `Λ∘Z = R` solved entrywise.
fn complementarity_rhs(scal: &Scaling, r: &Mat) -> Mat {
    let l = &scal.lambda;
    let z = Mat::from_fn(r.nrows(), r.ncols(), |i, j| 2.0 * r[(i, j)] / (l[i] + l[j]));
    &scal.g * z * scal.g.transpose()
}

/// Solves a block SDP; see [`SdpProblem`] for the form.
pub fn solve_sdp(p: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    p.validate()?;
    if p.total_dim() > MAX_TOTAL_DIM {
        return Err(Error::InvalidArgument(format!(
            "total block dimension {} exceeds {MAX_TOTAL_DIM}",
            p.total_dim()
        )));
    }
    let pre = presolve(p);
    let data = Data::new(p, &pre.kept);
    let m = data.m();
    let ntot = p.total_dim() as f64;

    let mut x: Vec<Mat> = Vec::new();
    let mut s: Vec<Mat> = Vec::new();
    for (k, &n) in data.blocks.iter().enumerate() {
        let nf = n as f64;
        let mut xi: f64 = 10.0f64.max(nf.sqrt());
        let mut a_max: f64 = data.c[k].norm();
        for &(i, part) in &data.by_block[k] {
            let an = data.a[i][part].dense.norm();
            xi = xi.max(nf * (1.0 + data.b[i].abs()) / (1.0 + an));
            a_max = a_max.max(an);
        }
        let eta = 10.0f64.max(nf.sqrt()).max(1.0 + a_max);
        x.push(Mat::identity(n, n) * xi);
        s.push(Mat::identity(n, n) * eta);
    }
    let mut y = DVector::zeros(m);

    let b_norm = data.b.norm();
    let c_norm = norm(&data.c);
    let mut history = Vec::new();
    let mut status = Status::MaxIter;
    let (mut step_p, mut step_d) = (0.0, 0.0);
    let mut iterations = 0;
    let mut residuals = (f64::INFINITY, f64::INFINITY, f64::INFINITY);

    let finish = |status: Status,
                  x: Vec<Mat>,
                  s: Vec<Mat>,
                  y: &DVector<f64>,
                  residuals: (f64, f64, f64),
                  iterations: usize,
                  history: Vec<IterateSummary>| {
        let mut y_full = vec![0.0; p.constraints.len()];
        for (i, &orig) in pre.kept.iter().enumerate() {
            y_full[orig] = y[i];
        }
        let pobj = inner(&data.c, &x);
        let dobj = data.b.dot(y);
        SdpSolution {
            status,
            x,
            s,
            y: y_full,
            primal_objective: pobj,
            dual_objective: dobj,
            relative_gap: residuals.0,
            primal_infeasibility: residuals.1,
            dual_infeasibility: residuals.2,
            iterations,
            removed_constraints: pre.removed.clone(),
            history,
        }
    };

    if pre.inconsistent {
        return Ok(finish(
            Status::PrimalInfeasible,
            x,
            s,
            &y,
            residuals,
            0,
            history,
        ));
    }

    for iter in 0..=opts.max_iter {
        iterations = iter;
        let rp = &data.b - data.apply_a(&x);
        let aty = data.apply_at(&y);
        let rd: Vec<Mat> = data
            .c
            .iter()
            .zip(&aty)
            .zip(&s)
            .map(|((c, a), sk)| c - a - sk)
            .collect();
        let pobj = inner(&data.c, &x);
        let dobj = data.b.dot(&y);
        let comp = inner(&x, &s);
        let mu = comp / ntot;
        let denom = 1.0 + pobj.abs() + dobj.abs();
        let gap = ((pobj - dobj).abs() / denom).max(comp / denom);
        let pinf = rp.norm() / (1.0 + b_norm);
        let dinf = norm(&rd) / (1.0 + c_norm);
        residuals = (gap, pinf, dinf);
        history.push(IterateSummary {
            iter,
            primal_objective: pobj,
            dual_objective: dobj,
            complementarity: comp,
            primal_infeasibility: pinf,
            dual_infeasibility: dinf,
            step_primal: step_p,
            step_dual: step_d,
        });
        debug!("sdp iter {iter}: pobj {pobj:.10e} dobj {dobj:.10e} gap {gap:.2e} pinf {pinf:.2e} dinf {dinf:.2e}");

        if gap <= opts.tol && pinf <= opts.tol && dinf <= opts.tol {
            status = Status::Optimal;
            break;
        }
        if dobj > 0.0 {
            let ray: Vec<Mat> = aty.iter().zip(&s).map(|(a, sk)| a + sk).collect();
            if norm(&ray) / dobj < opts.infeasibility_tol {
                status = Status::PrimalInfeasible;
                break;
            }
        }
        if pobj < 0.0 && data.apply_a(&x).norm() / (-pobj) < opts.infeasibility_tol {
            status = Status::DualInfeasible;
            break;
        }
        if iter == opts.max_iter {
            break;
        }

        let Some(scal) = x
            .iter()
            .zip(&s)
            .map(|(xk, sk)| nt_scaling(xk, sk))
            .collect::<Option<Vec<_>>>()
        else {
            break;
        };
        let fac = if m > 0 {
            match factor(schur_complement(&data, &scal)) {
                Some(f) => Some(f),
                None => break,
            }
        } else {
            None
        };

        let rc_aff: Vec<Mat> = x.iter().map(|xk| -xk).collect();
        let Some(aff) = direction(&data, &scal, fac.as_ref(), &rp, &rd, &rc_aff) else {
            break;
        };
        let ap_aff = max_step_all(&x, &aff.dx).min(1.0);
        let ad_aff = max_step_all(&s, &aff.ds).min(1.0);
        let x_aff: Vec<Mat> = x.iter().zip(&aff.dx).map(|(a, d)| a + d * ap_aff).collect();
        let s_aff: Vec<Mat> = s.iter().zip(&aff.ds).map(|(a, d)| a + d * ad_aff).collect();
        let mu_aff = inner(&x_aff, &s_aff) / ntot;
        let sigma = if mu > 0.0 {
            (mu_aff / mu).clamp(0.0, 1.0).powi(3)
        } else {
            0.0
        };

        let rc: Vec<Mat> = scal
            .iter()
            .zip(aff.dx.iter().zip(&aff.ds))
            .map(|(sc, (dx, ds))| {
                let n = sc.lambda.len();
                let dx_t = &sc.g_inv * dx * sc.g_inv.transpose();
                let ds_t = sc.g.transpose() * ds * &sc.g;
                let cross = symmetrize(&(&dx_t * &ds_t));
                let lam2 = Mat::from_diagonal(&sc.lambda.map(|l| l * l));
                let r = Mat::identity(n, n) * (sigma * mu) - lam2 - cross;
                symmetrize(&complementarity_rhs(sc, &r))
            })
            .collect();
        let Some(dir) = direction(&data, &scal, fac.as_ref(), &rp, &rd, &rc) else {
            break;
        };
        let gamma = 0.9 + 0.09 * ap_aff.min(ad_aff);
        step_p = (gamma * max_step_all(&x, &dir.dx)).min(1.0);
        step_d = (gamma * max_step_all(&s, &dir.ds)).min(1.0);
        if step_p < 1e-12 && step_d < 1e-12 {
            break;
        }
        for (xk, d) in x.iter_mut().zip(&dir.dx) {
            *xk += d * step_p;
            *xk = symmetrize(xk);
        }
        for (sk, d) in s.iter_mut().zip(&dir.ds) {
            *sk += d * step_d;
            *sk = symmetrize(sk);
        }
        y += &dir.dy * step_d;
    }

    if status == Status::MaxIter {
        let (gap, pinf, dinf) = residuals;
        let relaxed = opts.inaccurate_tol;
        if gap <= relaxed && pinf <= relaxed && dinf <= relaxed {
            status = Status::Inaccurate;
        }
    }
    Ok(finish(status, x, s, &y, residuals, iterations, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::problem::Entry;

    fn e(block: usize, row: usize, col: usize, value: f64) -> Entry {
        Entry {
            block,
            row,
            col,
            value,
        }
    }

    /// `max tr X  s.t.  X + Y = id_2`, `X, Y ⪰ 0`.
    fn trace_under_identity() -> SdpProblem {
        let mut p = SdpProblem::new(vec![2, 2]);
        p.add_objective(0, 0, 0, -1.0);
        p.add_objective(0, 1, 1, -1.0);
        for (r, c, rhs) in [(0, 0, 1.0), (0, 1, 0.0), (1, 1, 1.0)] {
            let v = if r == c { 1.0 } else { 0.5 };
            p.add_constraint(vec![e(0, r, c, v), e(1, r, c, v)], rhs);
        }
        p
    }

    #[test]
    fn trace_bounded_by_identity() {
        let sol = solve_sdp(&trace_under_identity(), &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, Status::Optimal);
        assert!((sol.primal_objective + 2.0).abs() < 1e-8);
        assert!((sol.dual_objective + 2.0).abs() < 1e-8);
    }

    #[test]
    fn largest_eigenvalue_epigraph() {
        // min t  s.t.  S = t·id − H ⪰ 0, t ⪰ 0 (λ_max(H) > 0 here).
        let h = Mat::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, -1.0, 0.0, -1.0, 1.0]);
        let mut p = SdpProblem::new(vec![3, 1]);
        p.add_objective(1, 0, 0, 1.0);
        for r in 0..3 {
            for c in r..3 {
                let mut entries = vec![e(0, r, c, if r == c { 1.0 } else { 0.5 })];
                if r == c {
                    entries.push(e(1, 0, 0, -1.0));
                }
                p.add_constraint(entries, -h[(r, c)]);
            }
        }
        let sol = solve_sdp(&p, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, Status::Optimal);
        let lmax = h.symmetric_eigenvalues().max();
        assert!((sol.primal_objective - lmax).abs() < 1e-7);
    }

    #[test]
    fn negative_trace_is_infeasible() {
        let mut p = SdpProblem::new(vec![2]);
        p.add_constraint(vec![e(0, 0, 0, 1.0), e(0, 1, 1, 1.0)], -1.0);
        let sol = solve_sdp(&p, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, Status::PrimalInfeasible);
    }

    #[test]
    fn unbounded_objective_is_dual_infeasible() {
        // min −X₁₁ s.t. X₂₂ = 1.
        let mut p = SdpProblem::new(vec![2]);
        p.add_objective(0, 0, 0, -1.0);
        p.add_constraint(vec![e(0, 1, 1, 1.0)], 1.0);
        let sol = solve_sdp(&p, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, Status::DualInfeasible);
    }

    #[test]
    fn duplicate_constraints_are_removed() {
        let mut p = trace_under_identity();
        let dup = p.constraints[0].clone();
        p.add_constraint(
            dup.entries
                .iter()
                .map(|x| Entry {
                    value: 2.0 * x.value,
                    ..*x
                })
                .collect(),
            2.0 * dup.rhs,
        );
        let sol = solve_sdp(&p, &SolverOptions::default()).unwrap();
        assert_eq!(sol.removed_constraints, vec![3]);
        assert_eq!(sol.status, Status::Optimal);
        assert!((sol.primal_objective + 2.0).abs() < 1e-8);
    }

    #[test]
    fn inconsistent_duplicates_are_infeasible() {
        let mut p = trace_under_identity();
        let dup = p.constraints[0].clone();
        p.add_constraint(dup.entries, 3.0);
        let sol = solve_sdp(&p, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, Status::PrimalInfeasible);
    }

    #[test]
    fn solutions_are_deterministic() {
        let a = solve_sdp(&trace_under_identity(), &SolverOptions::default()).unwrap();
        let b = solve_sdp(&trace_under_identity(), &SolverOptions::default()).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn complementarity_is_non_negative_along_the_path() {
        let sol = solve_sdp(&trace_under_identity(), &SolverOptions::default()).unwrap();
        assert!(sol.history.iter().all(|h| h.complementarity >= 0.0));
    }
}
