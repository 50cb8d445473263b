use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{presolve, smat, svec, svec_index, ConeSpec, ConicProblem, ConicSolution, IterRecord, Settings, Status};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
struct Block {
    kind: ConeSpec,
    off: usize,
    len: usize,
}

fn make_blocks(cones: &[ConeSpec]) -> Vec<Block> {
    let mut off = 0;
    cones
        .iter()
        .map(|&kind| {
            let b = Block { kind, off, len: kind.len() };
            off += b.len;
            b
        })
        .collect()
}

fn identity(blocks: &[Block], n: usize) -> DVector<f64> {
    let mut e = DVector::zeros(n);
    for b in blocks {
        match b.kind {
            ConeSpec::NonNeg(_) => e.rows_mut(b.off, b.len).fill(1.0),
            ConeSpec::Soc(_) => e[b.off] = 1.0,
            ConeSpec::Psd(order) => {
                for i in 0..order {
                    e[b.off + svec_index(order, i, i)] = 1.0;
                }
            }
        }
    }
    e
}

/// Jordan product `u o v`.
fn jordan(blocks: &[Block], u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(u.len());
    for b in blocks {
        let us = u.rows(b.off, b.len);
        let vs = v.rows(b.off, b.len);
        match b.kind {
            ConeSpec::NonNeg(_) => out.rows_mut(b.off, b.len).copy_from(&us.component_mul(&vs)),
            ConeSpec::Soc(_) => {
                out[b.off] = us.dot(&vs);
                for i in 1..b.len {
                    out[b.off + i] = us[0] * vs[i] + vs[0] * us[i];
                }
            }
            ConeSpec::Psd(order) => {
                let um = smat(us.as_slice(), order);
                let vm = smat(vs.as_slice(), order);
                let p = (&um * &vm + &vm * &um) * 0.5;
                out.rows_mut(b.off, b.len).copy_from(&svec(&p));
            }
        }
    }
    out
}

/// Largest `alpha` with `lambda + alpha d` in the cone, `f64::INFINITY` when
/// unbounded. `lambda` must be interior; PSD blocks of `lambda` are diagonal.
fn max_step(blocks: &[Block], lambda: &DVector<f64>, d: &DVector<f64>) -> f64 {
    let mut alpha = f64::INFINITY;
    for b in blocks {
        let l = lambda.rows(b.off, b.len);
        let ds = d.rows(b.off, b.len);
        let a = match b.kind {
            ConeSpec::NonNeg(_) => l
                .iter()
                .zip(ds.iter())
                .filter(|(_, &di)| di < 0.0)
                .map(|(&li, &di)| -li / di)
                .fold(f64::INFINITY, f64::min),
            ConeSpec::Soc(_) => soc_step(l.as_slice(), ds.as_slice()),
            ConeSpec::Psd(order) => {
                let lm = smat(l.as_slice(), order);
                let mut dm = smat(ds.as_slice(), order);
                for i in 0..order {
                    let si = 1.0 / lm[(i, i)].sqrt();
                    for j in 0..order {
                        dm[(i, j)] *= si;
                        dm[(j, i)] *= si;
                    }
                }
                let min = SymmetricEigen::new(dm).eigenvalues.min();
                if min < 0.0 {
                    -1.0 / min
                } else {
                    f64::INFINITY
                }
            }
        };
        alpha = alpha.min(a);
    }
    alpha
}

fn soc_step(l: &[f64], d: &[f64]) -> f64 {
    // (l0 + a d0)^2 - |l1 + a d1|^2 = qa a^2 + 2 qb a + qc
    let qa = d[0] * d[0] - d[1..].iter().map(|v| v * v).sum::<f64>();
    let qb = l[0] * d[0] - l[1..].iter().zip(&d[1..]).map(|(x, y)| x * y).sum::<f64>();
    let qc = l[0] * l[0] - l[1..].iter().map(|v| v * v).sum::<f64>();
    let mut roots = Vec::with_capacity(2);
    if qa.abs() <= 1e-14 * (qb.abs() + qc.abs()) {
        if qb < 0.0 {
            roots.push(-qc / (2.0 * qb));
        }
    } else {
        let disc = qb * qb - qa * qc;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            let t = -(qb + qb.signum() * sq);
            if t != 0.0 {
                roots.push(t / qa);
                roots.push(qc / t);
            }
        }
    }
    let mut alpha = roots.into_iter().filter(|&r| r > 0.0).fold(f64::INFINITY, f64::min);
    // the head must stay nonnegative as well
    if d[0] < 0.0 {
        alpha = alpha.min(-l[0] / d[0]);
    }
    alpha
}

enum Scale {
    NonNeg { w: DVector<f64> },
    Soc { w: DMatrix<f64>, w_inv: DMatrix<f64> },
    Psd { r: DMatrix<f64>, r_inv: DMatrix<f64> },
}

/// Nesterov-Todd scaling `W` with `W x = W^{-T} s = lambda`.
struct Nt<'a> {
    blocks: &'a [Block],
    scales: Vec<Scale>,
    lambda: DVector<f64>,
}

#[derive(Clone, Copy)]
enum Op {
    W,
    WInv,
    WInvT,
}

impl<'a> Nt<'a> {
    fn new(blocks: &'a [Block], x: &DVector<f64>, s: &DVector<f64>) -> Option<Self> {
        let mut scales = Vec::with_capacity(blocks.len());
        let mut lambda = DVector::zeros(x.len());
        for b in blocks {
            let xs = x.rows(b.off, b.len);
            let ss = s.rows(b.off, b.len);
            match b.kind {
                ConeSpec::NonNeg(_) => {
                    let mut w = DVector::zeros(b.len);
                    for i in 0..b.len {
                        if xs[i] <= 0.0 || ss[i] <= 0.0 {
                            return None;
                        }
                        w[i] = (ss[i] / xs[i]).sqrt();
                        lambda[b.off + i] = (xs[i] * ss[i]).sqrt();
                    }
                    scales.push(Scale::NonNeg { w });
                }
                ConeSpec::Soc(_) => {
                    let xn2 = xs[0] * xs[0] - xs.rows(1, b.len - 1).norm_squared();
                    let sn2 = ss[0] * ss[0] - ss.rows(1, b.len - 1).norm_squared();
                    if xs[0] <= 0.0 || ss[0] <= 0.0 || xn2 <= 0.0 || sn2 <= 0.0 {
                        return None;
                    }
                    let (xn, sn) = (xn2.sqrt(), sn2.sqrt());
                    let xb = xs / xn;
                    let sb = ss / sn;
                    let gamma = ((1.0 + xb.dot(&sb)) / 2.0).sqrt();
                    let mut wb = sb.clone_owned();
                    wb[0] += xb[0];
                    for i in 1..b.len {
                        wb[i] -= xb[i];
                    }
                    wb /= 2.0 * gamma;
                    let beta = (sn / xn).sqrt();
                    let n = b.len;
                    let w1 = wb.rows(1, n - 1);
                    let mut wm = DMatrix::zeros(n, n);
                    wm[(0, 0)] = wb[0];
                    for i in 1..n {
                        wm[(0, i)] = wb[i];
                        wm[(i, 0)] = wb[i];
                        for j in 1..n {
                            wm[(i, j)] = w1[i - 1] * w1[j - 1] / (1.0 + wb[0]) + if i == j { 1.0 } else { 0.0 };
                        }
                    }
                    // W^{-1} = J Wbar J / beta
                    let mut wi = wm.clone();
                    for i in 1..n {
                        wi[(0, i)] = -wi[(0, i)];
                        wi[(i, 0)] = -wi[(i, 0)];
                    }
                    let w = wm * beta;
                    let w_inv = wi / beta;
                    lambda.rows_mut(b.off, n).copy_from(&(&w * xs));
                    scales.push(Scale::Soc { w, w_inv });
                }
                ConeSpec::Psd(order) => {
                    let xm = smat(xs.as_slice(), order);
                    let sm = smat(ss.as_slice(), order);
                    let lx = xm.cholesky()?.l();
                    let ls = sm.cholesky()?.l();
                    let svd = (ls.transpose() * &lx).svd(true, true);
                    let u = svd.u?;
                    let v = svd.v_t?.transpose();
                    let sv = svd.singular_values;
                    if sv.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
                        return None;
                    }
                    let isq = DMatrix::from_diagonal(&sv.map(|v| 1.0 / v.sqrt()));
                    let r = &lx * &v * &isq;
                    let r_inv = &isq * u.transpose() * ls.transpose();
                    for i in 0..order {
                        lambda[b.off + svec_index(order, i, i)] = sv[i];
                    }
                    scales.push(Scale::Psd { r, r_inv });
                }
            }
        }
        Some(Self { blocks, scales, lambda })
    }

    fn apply(&self, op: Op, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(v.len());
        for (b, sc) in self.blocks.iter().zip(&self.scales) {
            let vs = v.rows(b.off, b.len);
            let mut o = out.rows_mut(b.off, b.len);
            match (sc, b.kind) {
                (Scale::NonNeg { w }, _) => match op {
                    Op::W => o.copy_from(&vs.component_mul(w)),
                    Op::WInv | Op::WInvT => o.copy_from(&vs.component_div(w)),
                },
                (Scale::Soc { w, w_inv }, _) => match op {
                    Op::W => o.copy_from(&(w * vs)),
                    Op::WInv | Op::WInvT => o.copy_from(&(w_inv * vs)),
                },
                (Scale::Psd { r, r_inv }, ConeSpec::Psd(order)) => {
                    if vs.iter().all(|&x| x == 0.0) {
                        continue;
                    }
                    let vm = smat(vs.as_slice(), order);
                    let res = match op {
                        Op::W => r_inv * vm * r_inv.transpose(),
                        Op::WInv => r * vm * r.transpose(),
                        Op::WInvT => r.transpose() * vm * r,
                    };
                    o.copy_from(&svec(&res));
                }
                _ => unreachable!(),
            }
        }
        out
    }

    /// `H^{-1} v = W^{-1} W^{-T} v`.
    fn h_inv(&self, v: &DVector<f64>) -> DVector<f64> {
        self.apply(Op::WInv, &self.apply(Op::WInvT, v))
    }

    /// Solves `lambda o z = r`.
    fn lambda_div(&self, r: &DVector<f64>) -> DVector<f64> {
        let l = &self.lambda;
        let mut z = DVector::zeros(r.len());
        for b in self.blocks {
            match b.kind {
                ConeSpec::NonNeg(_) => {
                    for i in b.off..b.off + b.len {
                        z[i] = r[i] / l[i];
                    }
                }
                ConeSpec::Soc(_) => {
                    let (o, n) = (b.off, b.len);
                    let l1 = l.rows(o + 1, n - 1);
                    let r1 = r.rows(o + 1, n - 1);
                    let det = l[o] * l[o] - l1.norm_squared();
                    let z0 = (l[o] * r[o] - l1.dot(&r1)) / det;
                    z[o] = z0;
                    for i in 1..n {
                        z[o + i] = (r[o + i] - z0 * l[o + i]) / l[o];
                    }
                }
                ConeSpec::Psd(order) => {
                    let rm = smat(r.rows(b.off, b.len).as_slice(), order);
                    let diag: Vec<f64> = (0..order).map(|i| l[b.off + svec_index(order, i, i)]).collect();
                    let zm = DMatrix::from_fn(order, order, |i, j| 2.0 * rm[(i, j)] / (diag[i] + diag[j]));
                    z.rows_mut(b.off, b.len).copy_from(&svec(&zm));
                }
            }
        }
        z
    }
}

/// Search direction in original and scaled coordinates.
struct Direction {
    dx: DVector<f64>,
    dy: DVector<f64>,
    ds: DVector<f64>,
    dtau: f64,
    dkappa: f64,
    dxs: DVector<f64>,
    dss: DVector<f64>,
}

struct Schur {
    chol: Option<nalgebra::Cholesky<f64, nalgebra::Dyn>>,
}

impl Schur {
    fn factor(m: DMatrix<f64>) -> Option<Self> {
        if m.nrows() == 0 {
            return Some(Self { chol: None });
        }
        let scale = m.diagonal().amax().max(1e-300);
        let mut reg = 0.0;
        for _ in 0..8 {
            let mut mm = m.clone();
            for i in 0..mm.nrows() {
                mm[(i, i)] += reg;
            }
            if let Some(chol) = mm.cholesky() {
                return Some(Self { chol: Some(chol) });
            }
            reg = if reg == 0.0 { 1e-14 * scale } else { reg * 100.0 };
        }
        None
    }

    fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        match &self.chol {
            Some(c) => c.solve(rhs),
            None => rhs.clone(),
        }
    }
}

/// Solves the cone program.
///
/// Zero and duplicate equality rows are removed and the rest scaled to unit
/// norm before iterating. Returned `y` refers to the original rows (dropped
/// rows get zero). Numerical breakdown ends the run with
/// [`Status::MaxIterations`] and a message in `diagnostics`.
pub fn solve(problem: &ConicProblem, settings: &Settings) -> Result<ConicSolution> {
    let problem = ConicProblem::new(problem.c.clone(), problem.a.clone(), problem.b.clone(), problem.cones.clone())?;
    if settings.max_iter == 0 || !(settings.feas_tol > 0.0 && settings.gap_tol > 0.0 && settings.infeas_tol > 0.0) {
        return Err(Error::InvalidInput("solver settings must be positive".into()));
    }
    let Some(pre) = presolve(&problem) else {
        let n = problem.num_vars();
        return Ok(ConicSolution {
            x: DVector::zeros(n),
            y: DVector::zeros(problem.num_rows()),
            s: DVector::zeros(n),
            status: Status::Infeasible,
            primal_obj: f64::NAN,
            dual_obj: f64::NAN,
            primal_res: f64::NAN,
            dual_res: f64::NAN,
            rel_gap: f64::NAN,
            iterations: 0,
            history: Vec::new(),
            diagnostics: Some("contradictory equality rows".into()),
        });
    };
    let mut sol = run(&pre.problem, settings);
    let mut y = DVector::zeros(problem.num_rows());
    for (k, &i) in pre.kept.iter().enumerate() {
        y[i] = sol.y[k] / pre.row_scale[k];
    }
    sol.y = y;
    if matches!(sol.status, Status::Optimal | Status::AlmostOptimal | Status::MaxIterations) {
        let (pres, dres) = residuals(&problem, &sol.x, &sol.y, &sol.s);
        sol.primal_res = pres;
        sol.dual_res = dres;
        sol.dual_obj = problem.b.dot(&sol.y);
    }
    Ok(sol)
}

fn residuals(p: &ConicProblem, x: &DVector<f64>, y: &DVector<f64>, s: &DVector<f64>) -> (f64, f64) {
    let pres = (&p.a * x - &p.b).norm() / p.b.norm().max(1.0);
    let dres = (p.a.tr_mul(y) + s - &p.c).norm() / p.c.norm().max(1.0);
    (pres, dres)
}

fn rel_gap(pobj: f64, dobj: f64) -> f64 {
    (pobj - dobj).abs() / pobj.abs().max(dobj.abs()).max(1.0)
}

fn run(p: &ConicProblem, st: &Settings) -> ConicSolution {
    let n = p.num_vars();
    let m = p.num_rows();
    let blocks = make_blocks(&p.cones);
    let nu = p.degree() as f64;
    let e = identity(&blocks, n);
    let (a, b, c) = (&p.a, &p.b, &p.c);
    let bnorm = b.norm().max(1.0);
    let cnorm = c.norm().max(1.0);

    let mut x = e.clone();
    let mut s = e.clone();
    let mut y = DVector::zeros(m);
    let mut tau = 1.0;
    let mut kappa = 1.0;
    let mut history = Vec::new();
    let mut diagnostics = None;
    let mut status = Status::MaxIterations;
    // (score, x, y, s, tau) of the iterate closest to meeting the tolerances
    let mut best: Option<(f64, DVector<f64>, DVector<f64>, DVector<f64>, f64)> = None;

    for _ in 0..st.max_iter {
        let rp = a * &x - b * tau;
        let rd = a.tr_mul(&y) + &s - c * tau;
        let cx = c.dot(&x);
        let by = b.dot(&y);
        let rg = by - cx - kappa;
        let mu = (x.dot(&s) + tau * kappa) / (nu + 1.0);

        let pres = rp.norm() / tau / bnorm;
        let dres = rd.norm() / tau / cnorm;
        let pobj = cx / tau;
        let dobj = by / tau;
        let gap = rel_gap(pobj, dobj);
        let compl = x.dot(&s) / (tau * tau) / pobj.abs().max(dobj.abs()).max(1.0);
        let mut rec = IterRecord { mu, primal_res: pres, dual_res: dres, rel_gap: gap, step: 0.0 };
        let score = pres.max(dres).max(gap).max(compl);
        if score.is_finite() && best.as_ref().is_none_or(|b| score < b.0) {
            best = Some((score, x.clone(), y.clone(), s.clone(), tau));
        }

        if pres <= st.feas_tol && dres <= st.feas_tol && gap <= st.gap_tol && compl <= st.gap_tol {
            status = Status::Optimal;
            history.push(rec);
            break;
        }
        if by > 0.0 {
            let cert = (&rd + c * tau).norm() * bnorm / by;
            if cert <= st.infeas_tol {
                status = Status::Infeasible;
                history.push(rec);
                break;
            }
        }
        if cx < 0.0 {
            let cert = (&rp + b * tau).norm() * cnorm / -cx;
            if cert <= st.infeas_tol {
                status = Status::Unbounded;
                history.push(rec);
                break;
            }
        }
        if !mu.is_finite() {
            diagnostics = Some("iterates became non-finite".to_string());
            break;
        }

        let Some(nt) = Nt::new(&blocks, &x, &s) else {
            diagnostics = Some("iterate left the cone interior".to_string());
            history.push(rec);
            break;
        };

        // Schur complement A H^{-1} A^T, one column of H^{-1} A^T per row
        let mut hinv_at = DMatrix::zeros(n, m);
        for i in 0..m {
            let row = a.row(i).transpose();
            hinv_at.set_column(i, &nt.h_inv(&row));
        }
        let mut schur = a * &hinv_at;
        schur = (&schur + schur.transpose()) * 0.5;
        let Some(fac) = Schur::factor(schur) else {
            diagnostics = Some("Schur complement is not positive definite".to_string());
            history.push(rec);
            break;
        };
        let hinv_c = nt.h_inv(c);
        let pv = fac.solve(&(a * &hinv_c + b));
        let u = &hinv_at * &pv - &hinv_c;
        let denom = b.dot(&pv) - c.dot(&u) + kappa / tau;

        let direction = |eta: f64, rc: &DVector<f64>, rtau: f64| -> Direction {
            let xi = nt.lambda_div(rc);
            let q1 = nt.h_inv(&(&rd * eta)) + nt.apply(Op::WInv, &xi);
            let q = fac.solve(&(-(&rp * eta) - a * &q1));
            let v = &hinv_at * &q + &q1;
            let dtau = (-eta * rg - b.dot(&q) + c.dot(&v) + rtau / tau) / denom;
            let dy = &pv * dtau + &q;
            let dx = &u * dtau + &v;
            let dkappa = (rtau - kappa * dtau) / tau;
            let ds = c * dtau - a.tr_mul(&dy) - &rd * eta;
            let dxs = nt.apply(Op::W, &dx);
            let dss = nt.apply(Op::WInvT, &ds);
            Direction { dx, dy, ds, dtau, dkappa, dxs, dss }
        };
        let step_to_boundary = |d: &Direction| -> f64 {
            let mut alpha = max_step(&blocks, &nt.lambda, &d.dxs).min(max_step(&blocks, &nt.lambda, &d.dss));
            if d.dtau < 0.0 {
                alpha = alpha.min(-tau / d.dtau);
            }
            if d.dkappa < 0.0 {
                alpha = alpha.min(-kappa / d.dkappa);
            }
            alpha
        };

        let ll = jordan(&blocks, &nt.lambda, &nt.lambda);
        let aff = direction(1.0, &(-&ll), -tau * kappa);
        let alpha_aff = step_to_boundary(&aff).min(1.0);
        let sigma = (1.0 - alpha_aff).powi(3);

        let rc = -&ll - jordan(&blocks, &aff.dxs, &aff.dss) + &e * (sigma * mu);
        let rtau = -tau * kappa - aff.dtau * aff.dkappa + sigma * mu;
        let d = direction(1.0 - sigma, &rc, rtau);
        let alpha = (0.99 * step_to_boundary(&d)).min(1.0);
        if !alpha.is_finite() || alpha <= 0.0 {
            diagnostics = Some("line search produced no progress".to_string());
            history.push(rec);
            break;
        }
        rec.step = alpha;
        history.push(rec);

        x += &d.dx * alpha;
        s += &d.ds * alpha;
        y += &d.dy * alpha;
        tau += alpha * d.dtau;
        kappa += alpha * d.dkappa;
    }

    let iterations = history.len();
    let mut last = history.last().copied();
    if status == Status::MaxIterations {
        if let Some((score, bx, by, bs, btau)) = best {
            if score <= st.reduced_tol {
                status = Status::AlmostOptimal;
                (x, y, s, tau) = (bx, by, bs, btau);
                let (pres, dres) = residuals(p, &(&x / tau), &(&y / tau), &(&s / tau));
                last = Some(IterRecord { mu: f64::NAN, primal_res: pres, dual_res: dres, rel_gap: f64::NAN, step: 0.0 });
            }
        }
    }
    let (xo, yo, so, pobj, dobj) = match status {
        Status::Infeasible => {
            let by = b.dot(&y);
            (DVector::zeros(n), &y / by, &s / by, f64::NAN, f64::INFINITY)
        }
        Status::Unbounded => {
            let cx = -c.dot(&x);
            (&x / cx, DVector::zeros(m), DVector::zeros(n), f64::NEG_INFINITY, f64::NAN)
        }
        _ => (&x / tau, &y / tau, &s / tau, c.dot(&x) / tau, b.dot(&y) / tau),
    };
    ConicSolution {
        x: xo,
        y: yo,
        s: so,
        status,
        primal_obj: pobj,
        dual_obj: dobj,
        primal_res: last.map_or(f64::NAN, |r| r.primal_res),
        dual_res: last.map_or(f64::NAN, |r| r.dual_res),
        rel_gap: if pobj.is_finite() && dobj.is_finite() { rel_gap(pobj, dobj) } else { f64::NAN },
        iterations,
        history,
        diagnostics,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn soc_interior(rng: &mut impl FnMut() -> f64, n: usize) -> DVector<f64> {
        let tail = DVector::from_fn(n - 1, |_, _| rng());
        let mut v = DVector::zeros(n);
        v[0] = tail.norm() + 0.1 + rng().abs();
        v.rows_mut(1, n - 1).copy_from(&tail);
        v
    }

    fn lcg() -> impl FnMut() -> f64 {
        let mut state = 0x2545F4914F6CDD1Du64;
        move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        }
    }

    #[test]
    fn nt_scaling_maps_both_points_to_lambda() {
        let mut r = lcg();
        let blocks = make_blocks(&[ConeSpec::NonNeg(2), ConeSpec::Soc(4), ConeSpec::Psd(3)]);
        let mut x = DVector::zeros(12);
        let mut s = DVector::zeros(12);
        x[0] = 0.7;
        x[1] = 2.0;
        s[0] = 1.5;
        s[1] = 0.2;
        x.rows_mut(2, 4).copy_from(&soc_interior(&mut r, 4));
        s.rows_mut(2, 4).copy_from(&soc_interior(&mut r, 4));
        let gx = DMatrix::from_fn(3, 3, |_, _| r());
        let gs = DMatrix::from_fn(3, 3, |_, _| r());
        let xm = &gx * gx.transpose() + DMatrix::identity(3, 3) * 0.1;
        let sm = &gs * gs.transpose() + DMatrix::identity(3, 3) * 0.1;
        x.rows_mut(6, 6).copy_from(&svec(&xm));
        s.rows_mut(6, 6).copy_from(&svec(&sm));

        let nt = Nt::new(&blocks, &x, &s).unwrap();
        let wx = nt.apply(Op::W, &x);
        let wis = nt.apply(Op::WInvT, &s);
        assert!((&wx - &nt.lambda).amax() < 1e-12, "{wx} vs {}", nt.lambda);
        assert!((&wis - &nt.lambda).amax() < 1e-12);
        let v = DVector::from_fn(12, |_, _| r());
        assert!((nt.apply(Op::WInv, &nt.apply(Op::W, &v)) - &v).amax() < 1e-12);
        // <W u, W^{-T} v> = <u, v>
        let u = DVector::from_fn(12, |_, _| r());
        assert!((nt.apply(Op::W, &u).dot(&nt.apply(Op::WInvT, &v)) - u.dot(&v)).abs() < 1e-12);
        // lambda o z = r round-trip
        let z = nt.lambda_div(&v);
        assert!((jordan(&blocks, &nt.lambda, &z) - &v).amax() < 1e-10);
    }

    #[test]
    fn soc_step_hits_the_boundary() {
        let l = [2.0, 0.5, -0.3];
        let d = [-1.0, 1.0, 0.0];
        let a = soc_step(&l, &d);
        let p: Vec<f64> = l.iter().zip(&d).map(|(x, y)| x + a * y).collect();
        assert!((p[0] - (p[1] * p[1] + p[2] * p[2]).sqrt()).abs() < 1e-12);
        assert_eq!(soc_step(&l, &[1.0, 0.0, 0.0]), f64::INFINITY);
    }
}
