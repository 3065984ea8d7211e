//! Homogeneous self-dual interior-point method.
//!
//! The iterate is `(X, y, S, tau, kappa)` with `X, S` strictly inside the
//! cone and `tau, kappa > 0`, driving the residuals of
//!
//! ```text
//!   A(X) - b*tau              = 0
//!   -A*(y) - S + C*tau        = 0
//!   b'y - <C,X> - kappa       = 0
//! ```
//!
//! to zero along the central path `X.S = mu*I`, `tau*kappa = mu`. At
//! convergence `tau > 0` yields the scaled-back optimum, while `tau -> 0`
//! with `b'y > 0` yields a dual improving ray certifying primal
//! infeasibility. Search directions use Nesterov-Todd scaling with a
//! Mehrotra predictor-corrector; the Schur complement is formed and
//! factored densely, which is the right trade-off for the desk-scale
//! problems this crate produces.

use nalgebra::{DMatrix, DVector};

use super::{
    add_entries, apply_a, apply_at, block_inner, block_norm, BlockKind, BlockValue, SdpError,
    SdpProblem, SdpSolution, SolveStatus, SolverOptions,
};

enum Scaling {
    Psd {
        r: DMatrix<f64>,
        rinv: DMatrix<f64>,
        w: DMatrix<f64>,
        winv: DMatrix<f64>,
        lambda: DVector<f64>,
        chol_x: DMatrix<f64>,
        chol_s: DMatrix<f64>,
    },
    Diag {
        w: DVector<f64>,
        lambda: DVector<f64>,
    },
}

struct Directions {
    dx: Vec<BlockValue>,
    dy: DVector<f64>,
    ds: Vec<BlockValue>,
    dtau: f64,
    dkappa: f64,
}

pub fn solve(p: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution, SdpError> {
    for e in p.objective.iter().chain(p.constraints.iter().flatten()) {
        if !e.value.is_finite() {
            return Err(SdpError::NonFinite);
        }
    }

    let m = p.num_constraints();
    if m > opts.max_schur_dim {
        return Ok(guarded(
            p,
            format!(
                "declined: {m} equality constraints exceed the dense Schur guard of {}",
                opts.max_schur_dim
            ),
        ));
    }
    if p.largest_psd_block() > opts.max_block_dim {
        return Ok(guarded(
            p,
            format!(
                "declined: PSD block of dimension {} exceeds the guard of {}",
                p.largest_psd_block(),
                opts.max_block_dim
            ),
        ));
    }
    if m == 0 {
        let x: Vec<BlockValue> = p.blocks.iter().map(|b| BlockValue::identity(*b)).collect();
        let mut sol = guarded(p, String::new());
        sol.status = SolveStatus::Feasible;
        sol.message = None;
        sol.x = x;
        sol.min_eigenvalue = 1.0;
        return Ok(sol);
    }

    // per-block constraint lists for Schur assembly
    let nb = p.blocks.len();
    let mut psd_cons: Vec<Vec<(usize, Vec<(usize, usize, f64)>)>> = vec![Vec::new(); nb];
    let mut diag_touch: Vec<Vec<Vec<(usize, f64)>>> = p
        .blocks
        .iter()
        .map(|b| match b.kind {
            BlockKind::Diag => vec![Vec::new(); b.dim],
            BlockKind::Psd => Vec::new(),
        })
        .collect();
    for (i, cons) in p.constraints.iter().enumerate() {
        let mut per_block: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); nb];
        for e in cons {
            per_block[e.block].push((e.row, e.col, e.value));
        }
        for (bi, entries) in per_block.into_iter().enumerate() {
            if entries.is_empty() {
                continue;
            }
            match p.blocks[bi].kind {
                BlockKind::Psd => psd_cons[bi].push((i, entries)),
                BlockKind::Diag => {
                    for (r, _, v) in entries {
                        diag_touch[bi][r].push((i, v));
                    }
                }
            }
        }
    }

    let b_vec = DVector::from_column_slice(&p.rhs);
    let b_norm = b_vec.norm();
    let c_blocks = {
        let mut c: Vec<BlockValue> = p.blocks.iter().map(|b| BlockValue::zeros(*b)).collect();
        add_entries(&mut c, &p.objective, 1.0);
        c
    };
    let c_norm = block_norm(&c_blocks);
    let c_is_zero = p.objective.is_empty();

    let nu = p.cone_degree() as f64;

    let mut x: Vec<BlockValue> = p.blocks.iter().map(|b| BlockValue::identity(*b)).collect();
    let mut s: Vec<BlockValue> = p.blocks.iter().map(|b| BlockValue::identity(*b)).collect();
    let mut y = DVector::zeros(m);
    let mut tau = 1.0f64;
    let mut kappa = 1.0f64;

    let mut best_message = None;
    let mut iterations = 0;

    for iter in 0..=opts.max_iterations {
        iterations = iter;

        // residuals of the homogeneous model
        let ax = apply_a(p, &x);
        let rp = &ax - &b_vec * tau;
        let at_y = apply_at(p, &y);
        let mut rd: Vec<BlockValue> = Vec::with_capacity(nb);
        for bi in 0..nb {
            let v = match (&at_y[bi], &s[bi], &c_blocks[bi]) {
                (BlockValue::Dense(a), BlockValue::Dense(sv), BlockValue::Dense(c)) => {
                    BlockValue::Dense(-a - sv + c * tau)
                }
                (BlockValue::Diag(a), BlockValue::Diag(sv), BlockValue::Diag(c)) => {
                    BlockValue::Diag(-a - sv + c * tau)
                }
                _ => unreachable!(),
            };
            rd.push(v);
        }
        let cx = block_inner(&c_blocks, &x);
        let by = b_vec.dot(&y);
        let rg = by - cx - kappa;

        let xs = block_inner(&x, &s);
        let mu = (xs + tau * kappa) / (nu + 1.0);

        // convergence of the scaled-back candidate
        let pres = (&ax / tau - &b_vec).norm() / (1.0 + b_norm);
        let dres = {
            let mut acc = 0.0;
            for bi in 0..nb {
                let d = match (&at_y[bi], &s[bi], &c_blocks[bi]) {
                    (BlockValue::Dense(a), BlockValue::Dense(sv), BlockValue::Dense(c)) => {
                        ((a + sv) / tau - c).norm_squared()
                    }
                    (BlockValue::Diag(a), BlockValue::Diag(sv), BlockValue::Diag(c)) => {
                        ((a + sv) / tau - c).norm_squared()
                    }
                    _ => unreachable!(),
                };
                acc += d;
            }
            acc.sqrt() / (1.0 + c_norm)
        };
        let pobj = cx / tau;
        let dobj = by / tau;
        let relgap = (xs / (tau * tau)) / (1.0 + pobj.abs() + dobj.abs());

        if pres <= opts.tol_primal && dres <= opts.tol_dual && relgap <= opts.tol_gap {
            let xf: Vec<BlockValue> = x.iter().map(|b| b.scale(1.0 / tau)).collect();
            let sf: Vec<BlockValue> = s.iter().map(|b| b.scale(1.0 / tau)).collect();
            let min_eig = xf.iter().map(|b| b.min_eigenvalue()).fold(f64::INFINITY, f64::min);
            return Ok(SdpSolution {
                status: if c_is_zero { SolveStatus::Feasible } else { SolveStatus::Optimal },
                x: xf,
                y: &y / tau,
                s: sf,
                primal_objective: pobj,
                dual_objective: dobj,
                primal_residual: pres,
                dual_residual: dres,
                rel_gap: relgap,
                iterations: iter,
                min_eigenvalue: min_eig,
                infeasibility_certificate: None,
                message: None,
            });
        }

        // primal infeasibility: dual improving ray
        if by > 0.0 {
            let mut ray_res_sq = 0.0;
            for bi in 0..nb {
                ray_res_sq += match (&at_y[bi], &s[bi]) {
                    (BlockValue::Dense(a), BlockValue::Dense(sv)) => (a + sv).norm_squared(),
                    (BlockValue::Diag(a), BlockValue::Diag(sv)) => (a + sv).norm_squared(),
                    _ => unreachable!(),
                };
            }
            let ray_res = ray_res_sq.sqrt() / by;
            if ray_res <= opts.tol_infeasible {
                let sf: Vec<BlockValue> = s.iter().map(|b| b.scale(1.0 / by)).collect();
                return Ok(SdpSolution {
                    status: SolveStatus::Infeasible,
                    x: x.iter().map(|b| b.scale(1.0 / tau.max(1e-300))).collect(),
                    y: &y / by,
                    s: sf,
                    primal_objective: f64::INFINITY,
                    dual_objective: f64::INFINITY,
                    primal_residual: pres,
                    dual_residual: dres,
                    rel_gap: relgap,
                    iterations: iter,
                    min_eigenvalue: 0.0,
                    infeasibility_certificate: Some((&y / by, ray_res)),
                    message: None,
                });
            }
        }
        // dual infeasibility (primal unbounded): not a meaningful outcome for
        // the feasibility-style programs this crate generates; reported as
        // indeterminate with an explanation.
        if cx < 0.0 {
            let ray_res = ax.norm() / (-cx);
            if ray_res <= opts.tol_infeasible && xs / (nu + 1.0) <= opts.tol_gap {
                best_message =
                    Some("dual infeasible: primal objective unbounded below".to_string());
                break;
            }
        }

        if iter == opts.max_iterations {
            break;
        }

        // Nesterov-Todd scalings
        let mut scalings: Vec<Scaling> = Vec::with_capacity(nb);
        let mut breakdown = None;
        for bi in 0..nb {
            match (&x[bi], &s[bi]) {
                (BlockValue::Dense(xm), BlockValue::Dense(sm)) => {
                    match nt_scaling_psd(xm, sm) {
                        Some(sc) => scalings.push(sc),
                        None => {
                            breakdown = Some("cone block lost positive definiteness");
                            break;
                        }
                    }
                }
                (BlockValue::Diag(xv), BlockValue::Diag(sv)) => {
                    let w = xv.zip_map(sv, |a, b| (a / b).sqrt());
                    let lambda = xv.zip_map(sv, |a, b| (a * b).sqrt());
                    scalings.push(Scaling::Diag { w, lambda });
                }
                _ => unreachable!(),
            }
        }
        if let Some(msg) = breakdown {
            best_message = Some(msg.to_string());
            break;
        }

        // Schur complement and its factorization (shared by both solves)
        let m_mat = form_schur(p, &psd_cons, &diag_touch, &scalings, m);
        let chol = match factor_with_ridge(m_mat) {
            Some(c) => c,
            None => {
                best_message = Some("Schur complement factorization failed".to_string());
                break;
            }
        };

        let u_vec = if c_is_zero {
            DVector::zeros(m)
        } else {
            let wcw = sandwich_all(&scalings, &c_blocks, false);
            apply_a(p, &wcw)
        };
        let q_scal = if c_is_zero {
            0.0
        } else {
            let wcw = sandwich_all(&scalings, &c_blocks, false);
            block_inner(&c_blocks, &wcw)
        };
        let g2 = chol.solve(&(&b_vec + &u_vec));
        let denom_base = b_vec.dot(&g2) - u_vec.dot(&g2) + q_scal;

        // predictor (affine scaling direction)
        let aff = newton_step(
            p, &scalings, &chol, &rp, &rd, rg, &x, &y, &s, tau, kappa, 0.0, mu, None, &b_vec,
            &u_vec, denom_base, &c_blocks, c_is_zero,
        );
        let aff = match aff {
            Some(d) => d,
            None => {
                best_message = Some("Newton system solve failed".to_string());
                break;
            }
        };

        let alpha_aff = max_step(&x, &s, tau, kappa, &aff, &scalings).min(1.0);
        let mu_aff = {
            let mut xs_aff = 0.0;
            for bi in 0..nb {
                xs_aff += match (&x[bi], &aff.dx[bi], &s[bi], &aff.ds[bi]) {
                    (
                        BlockValue::Dense(xm),
                        BlockValue::Dense(dxm),
                        BlockValue::Dense(sm),
                        BlockValue::Dense(dsm),
                    ) => (xm + dxm * alpha_aff).dot(&(sm + dsm * alpha_aff)),
                    (
                        BlockValue::Diag(xv),
                        BlockValue::Diag(dxv),
                        BlockValue::Diag(sv),
                        BlockValue::Diag(dsv),
                    ) => (xv + dxv * alpha_aff).dot(&(sv + dsv * alpha_aff)),
                    _ => unreachable!(),
                };
            }
            (xs_aff + (tau + alpha_aff * aff.dtau) * (kappa + alpha_aff * aff.dkappa)) / (nu + 1.0)
        };
        let sigma = (mu_aff / mu).powi(3).clamp(1e-8, 0.999);

        // corrector (combined direction)
        let comb = newton_step(
            p, &scalings, &chol, &rp, &rd, rg, &x, &y, &s, tau, kappa, sigma, mu, Some(&aff),
            &b_vec, &u_vec, denom_base, &c_blocks, c_is_zero,
        );
        let comb = match comb {
            Some(d) => d,
            None => {
                best_message = Some("Newton system solve failed".to_string());
                break;
            }
        };

        let alpha = (0.99 * max_step(&x, &s, tau, kappa, &comb, &scalings)).min(1.0);
        if alpha < 1e-12 {
            best_message = Some("step length collapsed".to_string());
            break;
        }

        for bi in 0..nb {
            match (&mut x[bi], &comb.dx[bi]) {
                (BlockValue::Dense(xm), BlockValue::Dense(d)) => {
                    *xm += d * alpha;
                    symmetrize(xm);
                }
                (BlockValue::Diag(xv), BlockValue::Diag(d)) => *xv += d * alpha,
                _ => unreachable!(),
            }
            match (&mut s[bi], &comb.ds[bi]) {
                (BlockValue::Dense(sm), BlockValue::Dense(d)) => {
                    *sm += d * alpha;
                    symmetrize(sm);
                }
                (BlockValue::Diag(sv), BlockValue::Diag(d)) => *sv += d * alpha,
                _ => unreachable!(),
            }
        }
        y += &comb.dy * alpha;
        tau += alpha * comb.dtau;
        kappa += alpha * comb.dkappa;
    }

    // iteration cap or numerical breakdown
    let tau_safe = tau.max(1e-300);
    let ax = apply_a(p, &x);
    let pres = (&ax / tau_safe - &b_vec).norm() / (1.0 + b_norm);
    let cx = block_inner(&c_blocks, &x);
    let by = b_vec.dot(&y);
    let xs = block_inner(&x, &s);
    Ok(SdpSolution {
        status: SolveStatus::Indeterminate,
        x: x.iter().map(|b| b.scale(1.0 / tau_safe)).collect(),
        y: &y / tau_safe,
        s: s.iter().map(|b| b.scale(1.0 / tau_safe)).collect(),
        primal_objective: cx / tau_safe,
        dual_objective: by / tau_safe,
        primal_residual: pres,
        dual_residual: f64::NAN,
        rel_gap: xs / (tau_safe * tau_safe),
        iterations,
        min_eigenvalue: f64::NAN,
        infeasibility_certificate: None,
        message: Some(best_message.unwrap_or_else(|| "iteration cap reached".to_string())),
    })
}

fn guarded(p: &SdpProblem, message: String) -> SdpSolution {
    SdpSolution {
        status: SolveStatus::Indeterminate,
        x: p.blocks.iter().map(|b| BlockValue::zeros(*b)).collect(),
        y: DVector::zeros(p.num_constraints()),
        s: p.blocks.iter().map(|b| BlockValue::zeros(*b)).collect(),
        primal_objective: f64::NAN,
        dual_objective: f64::NAN,
        primal_residual: f64::NAN,
        dual_residual: f64::NAN,
        rel_gap: f64::NAN,
        iterations: 0,
        min_eigenvalue: f64::NAN,
        infeasibility_certificate: None,
        message: Some(message),
    }
}

fn symmetrize(mat: &mut DMatrix<f64>) {
    let n = mat.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (mat[(i, j)] + mat[(j, i)]);
            mat[(i, j)] = v;
            mat[(j, i)] = v;
        }
    }
}

/// NT scaling point of a PSD block pair: returns `W = R R'` with
/// `W S W = X`, along with the scaled spectrum `lambda`.
fn nt_scaling_psd(xm: &DMatrix<f64>, sm: &DMatrix<f64>) -> Option<Scaling> {
    let n = xm.nrows();
    let lx = xm.clone().cholesky()?.l();
    let ls = sm.clone().cholesky()?.l();
    let t = ls.transpose() * &lx;
    let svd = t.svd(true, true);
    let u = svd.u?;
    let vt = svd.v_t?;
    let sv = svd.singular_values;
    let _ = u;
    if sv.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
        return None;
    }
    let v = vt.transpose();
    let mut r = &lx * v;
    for j in 0..n {
        let scale = 1.0 / sv[j].sqrt();
        for i in 0..n {
            r[(i, j)] *= scale;
        }
    }
    // R^{-1} = diag(sqrt(sv)) V' Lx^{-1}
    let lx_inv = lx.solve_lower_triangular(&DMatrix::identity(n, n))?;
    let mut rinv = vt * lx_inv;
    for i in 0..n {
        let scale = sv[i].sqrt();
        for j in 0..n {
            rinv[(i, j)] *= scale;
        }
    }
    let w = &r * r.transpose();
    let winv = rinv.transpose() * &rinv;
    Some(Scaling::Psd { r, rinv, w, winv, lambda: sv, chol_x: lx, chol_s: ls })
}

/// `W M W` per block; with `inverse` set, `W^{-1} M W^{-1}`.
fn sandwich_all(scalings: &[Scaling], blocks: &[BlockValue], inverse: bool) -> Vec<BlockValue> {
    scalings
        .iter()
        .zip(blocks)
        .map(|(sc, b)| match (sc, b) {
            (Scaling::Psd { w, winv, .. }, BlockValue::Dense(m)) => {
                let ww = if inverse { winv } else { w };
                BlockValue::Dense(ww * m * ww)
            }
            (Scaling::Diag { w, .. }, BlockValue::Diag(v)) => {
                BlockValue::Diag(v.zip_map(w, |a, wi| if inverse { a / (wi * wi) } else { a * wi * wi }))
            }
            _ => unreachable!(),
        })
        .collect()
}

fn form_schur(
    p: &SdpProblem,
    psd_cons: &[Vec<(usize, Vec<(usize, usize, f64)>)>],
    diag_touch: &[Vec<Vec<(usize, f64)>>],
    scalings: &[Scaling],
    m: usize,
) -> DMatrix<f64> {
    let mut mm = DMatrix::zeros(m, m);
    for (bi, spec) in p.blocks.iter().enumerate() {
        match spec.kind {
            BlockKind::Psd => {
                let w = match &scalings[bi] {
                    Scaling::Psd { w, .. } => w,
                    _ => unreachable!(),
                };
                let n = spec.dim;
                let cons = &psd_cons[bi];
                let mut u = DMatrix::zeros(n, n);
                for (jj, (j, ej)) in cons.iter().enumerate() {
                    u.fill(0.0);
                    for &(r, c, v) in ej {
                        if r == c {
                            for pi in 0..n {
                                let wpr = v * w[(pi, r)];
                                if wpr != 0.0 {
                                    for q in 0..n {
                                        u[(pi, q)] += wpr * w[(r, q)];
                                    }
                                }
                            }
                        } else {
                            for pi in 0..n {
                                let wpr = v * w[(pi, r)];
                                let wpc = v * w[(pi, c)];
                                for q in 0..n {
                                    u[(pi, q)] += wpr * w[(c, q)] + wpc * w[(r, q)];
                                }
                            }
                        }
                    }
                    for (i, ei) in cons.iter().take(jj + 1) {
                        let mut acc = 0.0;
                        for &(r, c, v) in ei {
                            acc += if r == c { v * u[(r, c)] } else { v * (u[(r, c)] + u[(c, r)]) };
                        }
                        mm[(*i, *j)] += acc;
                    }
                }
            }
            BlockKind::Diag => {
                let w = match &scalings[bi] {
                    Scaling::Diag { w, .. } => w,
                    _ => unreachable!(),
                };
                for (t, touch) in diag_touch[bi].iter().enumerate() {
                    let w2 = w[t] * w[t];
                    for (a, (ci, vi)) in touch.iter().enumerate() {
                        for (cj, vj) in &touch[a..] {
                            let (lo, hi) = if ci <= cj { (*ci, *cj) } else { (*cj, *ci) };
                            mm[(lo, hi)] += vi * vj * w2;
                        }
                    }
                }
            }
        }
    }
    for i in 0..m {
        for j in (i + 1)..m {
            mm[(j, i)] = mm[(i, j)];
        }
    }
    mm
}

fn factor_with_ridge(mut mm: DMatrix<f64>) -> Option<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    let n = mm.nrows();
    let base = (0..n).map(|i| mm[(i, i)].abs()).fold(0.0f64, f64::max).max(1.0);
    let mut ridge = 0.0;
    for attempt in 0..8 {
        if attempt > 0 {
            let add = base * 1e-14 * 10f64.powi(attempt - 1) - ridge;
            for i in 0..n {
                mm[(i, i)] += add;
            }
            ridge += add;
        }
        if let Some(c) = mm.clone().cholesky() {
            return Some(c);
        }
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn newton_step(
    p: &SdpProblem,
    scalings: &[Scaling],
    chol: &nalgebra::Cholesky<f64, nalgebra::Dyn>,
    rp: &DVector<f64>,
    rd: &[BlockValue],
    rg: f64,
    x: &[BlockValue],
    _y: &DVector<f64>,
    _s: &[BlockValue],
    tau: f64,
    kappa: f64,
    sigma: f64,
    mu: f64,
    affine: Option<&Directions>,
    b_vec: &DVector<f64>,
    u_vec: &DVector<f64>,
    denom_base: f64,
    c_blocks: &[BlockValue],
    c_is_zero: bool,
) -> Option<Directions> {
    let nb = p.blocks.len();
    let eta = 1.0 - sigma;

    // complementarity right-hand side, transported back to the unscaled space
    let mut zr: Vec<BlockValue> = Vec::with_capacity(nb);
    for bi in 0..nb {
        match &scalings[bi] {
            Scaling::Psd { r, rinv, lambda, .. } => {
                let n = lambda.len();
                let mut rhs_c = DMatrix::zeros(n, n);
                for i in 0..n {
                    rhs_c[(i, i)] = sigma * mu - lambda[i] * lambda[i];
                }
                if let Some(aff) = affine {
                    let (dxm, dsm) = match (&aff.dx[bi], &aff.ds[bi]) {
                        (BlockValue::Dense(a), BlockValue::Dense(b)) => (a, b),
                        _ => unreachable!(),
                    };
                    let dxs = rinv * dxm * rinv.transpose();
                    let dss = r.transpose() * dsm * r;
                    let prod = &dxs * &dss;
                    for i in 0..n {
                        for j in 0..n {
                            rhs_c[(i, j)] -= 0.5 * (prod[(i, j)] + prod[(j, i)]);
                        }
                    }
                }
                // invert the Lyapunov operator L_Sigma on the scaled spectrum
                let mut e = rhs_c;
                for i in 0..n {
                    for j in 0..n {
                        e[(i, j)] *= 2.0 / (lambda[i] + lambda[j]);
                    }
                }
                zr.push(BlockValue::Dense(r * e * r.transpose()));
            }
            Scaling::Diag { w, lambda } => {
                let (xv,) = match &x[bi] {
                    BlockValue::Diag(v) => (v,),
                    _ => unreachable!(),
                };
                let _ = xv;
                let mut z = DVector::zeros(lambda.len());
                for i in 0..lambda.len() {
                    let mut rhs_c = sigma * mu - lambda[i] * lambda[i];
                    if let Some(aff) = affine {
                        let (dxv, dsv) = match (&aff.dx[bi], &aff.ds[bi]) {
                            (BlockValue::Diag(a), BlockValue::Diag(b)) => (a, b),
                            _ => unreachable!(),
                        };
                        rhs_c -= dxv[i] * dsv[i];
                    }
                    z[i] = w[i] * rhs_c / lambda[i];
                }
                zr.push(BlockValue::Diag(z));
            }
        }
    }

    let zeta = if let Some(aff) = affine {
        sigma * mu - tau * kappa - aff.dtau * aff.dkappa
    } else {
        -tau * kappa
    };

    // h = -eta*rp + eta*A(W rd W) - A(Zr)
    let w_rd_w = sandwich_all(scalings, rd, false);
    let a_wrdw = apply_a(p, &w_rd_w);
    let a_zr = apply_a(p, &zr);
    let h = rp * (-eta) + &a_wrdw * eta - &a_zr;
    let g1 = chol.solve(&h);
    let g2 = chol.solve(&(b_vec + u_vec));

    let c_wrdw = if c_is_zero { 0.0 } else { block_inner(c_blocks, &w_rd_w) };
    let c_zr = if c_is_zero { 0.0 } else { block_inner(c_blocks, &zr) };

    let denom = denom_base + kappa / tau;
    let numer =
        -eta * rg - b_vec.dot(&g1) + u_vec.dot(&g1) - eta * c_wrdw + c_zr + zeta / tau;
    if denom.abs() < 1e-300 || !numer.is_finite() {
        return None;
    }
    let dtau = numer / denom;
    let dy = &g1 + &g2 * dtau;

    // dX = W(-eta*rd + A*(dy) - C*dtau)W + Zr ; dS = W^{-1}(Zr - dX)W^{-1}
    let at_dy = apply_at(p, &dy);
    let mut inner: Vec<BlockValue> = Vec::with_capacity(nb);
    for bi in 0..nb {
        let v = match (&rd[bi], &at_dy[bi], &c_blocks[bi]) {
            (BlockValue::Dense(r), BlockValue::Dense(a), BlockValue::Dense(c)) => {
                BlockValue::Dense(r * (-eta) + a - c * dtau)
            }
            (BlockValue::Diag(r), BlockValue::Diag(a), BlockValue::Diag(c)) => {
                BlockValue::Diag(r * (-eta) + a - c * dtau)
            }
            _ => unreachable!(),
        };
        inner.push(v);
    }
    let w_inner_w = sandwich_all(scalings, &inner, false);
    let mut dx: Vec<BlockValue> = Vec::with_capacity(nb);
    let mut dxmzr: Vec<BlockValue> = Vec::with_capacity(nb);
    for bi in 0..nb {
        match (&w_inner_w[bi], &zr[bi]) {
            (BlockValue::Dense(wm), BlockValue::Dense(z)) => {
                let mut d = wm + z;
                symmetrize(&mut d);
                dxmzr.push(BlockValue::Dense(z - &d));
                dx.push(BlockValue::Dense(d));
            }
            (BlockValue::Diag(wv), BlockValue::Diag(z)) => {
                let d = wv + z;
                dxmzr.push(BlockValue::Diag(z - &d));
                dx.push(BlockValue::Diag(d));
            }
            _ => unreachable!(),
        }
    }
    let mut ds = sandwich_all(scalings, &dxmzr, true);
    for b in &mut ds {
        if let BlockValue::Dense(mat) = b {
            symmetrize(mat);
        }
    }
    let dkappa = (zeta - kappa * dtau) / tau;

    if !dtau.is_finite() || !dkappa.is_finite() {
        return None;
    }
    Some(Directions { dx, dy, ds, dtau, dkappa })
}

fn max_step(
    x: &[BlockValue],
    s: &[BlockValue],
    tau: f64,
    kappa: f64,
    dir: &Directions,
    scalings: &[Scaling],
) -> f64 {
    let mut alpha = f64::INFINITY;
    for bi in 0..x.len() {
        match (&x[bi], &dir.dx[bi], &s[bi], &dir.ds[bi], &scalings[bi]) {
            (
                BlockValue::Dense(_),
                BlockValue::Dense(dxm),
                BlockValue::Dense(_),
                BlockValue::Dense(dsm),
                Scaling::Psd { chol_x, chol_s, .. },
            ) => {
                alpha = alpha.min(psd_max_step(chol_x, dxm));
                alpha = alpha.min(psd_max_step(chol_s, dsm));
            }
            (
                BlockValue::Diag(xv),
                BlockValue::Diag(dxv),
                BlockValue::Diag(sv),
                BlockValue::Diag(dsv),
                _,
            ) => {
                for i in 0..xv.len() {
                    if dxv[i] < 0.0 {
                        alpha = alpha.min(-xv[i] / dxv[i]);
                    }
                    if dsv[i] < 0.0 {
                        alpha = alpha.min(-sv[i] / dsv[i]);
                    }
                }
            }
            _ => unreachable!(),
        }
    }
    if dir.dtau < 0.0 {
        alpha = alpha.min(-tau / dir.dtau);
    }
    if dir.dkappa < 0.0 {
        alpha = alpha.min(-kappa / dir.dkappa);
    }
    alpha
}

/// Largest `a` with `V + a D >= 0`, from the spectrum of `L^{-1} D L^{-T}`.
fn psd_max_step(chol_l: &DMatrix<f64>, d: &DMatrix<f64>) -> f64 {
    let n = d.nrows();
    if n == 0 {
        return f64::INFINITY;
    }
    let a1 = match chol_l.solve_lower_triangular(d) {
        Some(v) => v,
        None => return 0.0,
    };
    let t = match chol_l.solve_lower_triangular(&a1.transpose()) {
        Some(v) => v,
        None => return 0.0,
    };
    let mut tsym = t;
    symmetrize(&mut tsym);
    let min_eig = tsym.symmetric_eigen().eigenvalues.min();
    if min_eig >= -1e-14 {
        f64::INFINITY
    } else {
        -1.0 / min_eig
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::{BlockSpec, MatEntry};

    fn lp_min_x_geq_1() -> SdpProblem {
        // minimize x subject to x - s = 1, x >= 0, s >= 0
        SdpProblem::new(
            vec![BlockSpec { dim: 2, kind: BlockKind::Diag }],
            vec![MatEntry::new(0, 0, 0, 1.0)],
            vec![vec![MatEntry::new(0, 0, 0, 1.0), MatEntry::new(0, 1, 1, -1.0)]],
            vec![1.0],
        )
        .unwrap()
    }

    #[test]
    fn lp_optimal_value() {
        let p = lp_min_x_geq_1();
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.primal_objective - 1.0).abs() < 1e-6, "{}", sol.primal_objective);
    }

    #[test]
    fn min_trace_with_pinned_corner() {
        // minimize tr(X), X psd 2x2, X11 = 1 -> value 1, X = [[1,0],[0,0]]
        let p = SdpProblem::new(
            vec![BlockSpec { dim: 2, kind: BlockKind::Psd }],
            vec![MatEntry::new(0, 0, 0, 1.0), MatEntry::new(0, 1, 1, 1.0)],
            vec![vec![MatEntry::new(0, 0, 0, 1.0)]],
            vec![1.0],
        )
        .unwrap();
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.primal_objective - 1.0).abs() < 1e-6);
        match &sol.x[0] {
            BlockValue::Dense(m) => {
                assert!((m[(0, 0)] - 1.0).abs() < 1e-5);
                assert!(m[(1, 1)].abs() < 1e-5);
                assert!(m[(0, 1)].abs() < 1e-5);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn infeasible_lp_certificate() {
        // x = 1 and x = -1 with x >= 0: infeasible
        let p = SdpProblem::feasibility(
            vec![BlockSpec { dim: 1, kind: BlockKind::Diag }],
            vec![
                vec![MatEntry::new(0, 0, 0, 1.0)],
                vec![MatEntry::new(0, 0, 0, 1.0)],
            ],
            vec![1.0, -1.0],
        )
        .unwrap();
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
        let (ray, res) = sol.infeasibility_certificate.expect("certificate");
        assert!(res <= 1e-7);
        // improving ray: b'y = 1 after normalization
        assert!((ray[0] - ray[1] - 0.0).abs() < 1e30); // structural smoke
        assert!((ray[0] * 1.0 + ray[1] * -1.0 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn determinism_to_the_bit() {
        let p = lp_min_x_geq_1();
        let a = solve(&p, &SolverOptions::default()).unwrap();
        let b = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(a.primal_objective.to_bits(), b.primal_objective.to_bits());
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.status, b.status);
    }

    #[test]
    fn schur_guard_declines_oversized_problems() {
        let p = lp_min_x_geq_1();
        let opts = SolverOptions { max_schur_dim: 0, ..Default::default() };
        let sol = solve(&p, &opts).unwrap();
        assert_eq!(sol.status, SolveStatus::Indeterminate);
        assert!(sol.message.unwrap().contains("Schur"));
        assert_eq!(sol.iterations, 0);
    }

    #[test]
    fn nt_scaling_identity() {
        // W S W = X must hold for the computed scaling point
        let xm = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let sm = DMatrix::from_row_slice(2, 2, &[1.5, -0.2, -0.2, 0.8]);
        match nt_scaling_psd(&xm, &sm).unwrap() {
            Scaling::Psd { w, .. } => {
                let back = &w * &sm * &w;
                assert!((back - &xm).norm() < 1e-12);
            }
            _ => unreachable!(),
        }
    }
}
