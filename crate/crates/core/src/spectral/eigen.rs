use faer::{Mat, Side};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{Operators, Partition};
use crate::error::{Error, Result};
use crate::sparse::{CsrMatrix, SparseCholesky};

const BLOCK: usize = 64;
const MAX_SUBSPACE_ITERATIONS: usize = 2000;

pub(crate) struct Pairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

fn csr_times(a: &CsrMatrix, x: &Mat<f64>) -> Mat<f64> {
    let mut out = Mat::<f64>::zeros(a.dim(), x.ncols());
    for i in 0..a.dim() {
        for (j, v) in a.row(i) {
            for c in 0..x.ncols() {
                out[(i, c)] += v * x[(j, c)];
            }
        }
    }
    out
}

fn norm_one(a: &Mat<f64>) -> f64 {
    (0..a.ncols()).map(|j| (0..a.nrows()).map(|i| a[(i, j)].abs()).sum::<f64>()).fold(0.0, f64::max)
}

fn col_norm(a: &Mat<f64>, j: usize) -> f64 {
    (0..a.nrows()).map(|i| a[(i, j)] * a[(i, j)]).sum::<f64>().sqrt()
}

/// Symmetric `W = A^{-1/2}` for a symmetric positive-definite `A`.
fn inverse_sqrt(a: &Mat<f64>) -> Result<Mat<f64>> {
    let e = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::Factorization("mass eigendecomposition failed".into()))?;
    let (s, u) = (e.S(), e.U());
    let n = a.nrows();
    let top = (0..n).map(|i| s[i]).fold(0.0, f64::max);
    if let Some(i) = (0..n).find(|&i| !(s[i] > 1e-14 * top)) {
        return Err(Error::Factorization(format!("boundary mass is not positive definite (eigenvalue {:e})", s[i])));
    }
    let scaled = Mat::<f64>::from_fn(n, n, |i, j| u[(i, j)] / s[j].sqrt());
    Ok(&scaled * u.transpose())
}

fn symmetrize(a: &mut Mat<f64>) {
    for i in 0..a.nrows() {
        for j in 0..i {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

/// Flips each column so its largest-magnitude entry is positive.
fn fix_signs(x: &mut Mat<f64>) {
    for j in 0..x.ncols() {
        let mut best = 0.0_f64;
        for i in 0..x.nrows() {
            if x[(i, j)].abs() > best.abs() {
                best = x[(i, j)];
            }
        }
        if best < 0.0 {
            for i in 0..x.nrows() {
                x[(i, j)] = -x[(i, j)];
            }
        }
    }
}

fn backward_error(r: f64, s_norm: f64, b_norm: f64, sigma: f64, x_norm: f64) -> f64 {
    r / ((s_norm + sigma.abs() * b_norm) * x_norm)
}

fn boundary_blocks(ops: &Operators, part: &Partition) -> (CsrMatrix, CsrMatrix) {
    let ng = part.gamma.len();
    let k = CsrMatrix::from_triplets(ng, &ops.stiffness.block_triplets(&part.gamma, &part.gamma_local));
    let b = CsrMatrix::from_triplets(ng, &ops.boundary_mass.block_triplets(&part.gamma, &part.gamma_local));
    (k, b)
}

/// Dense Schur complement `S = K_GG - K_GI K_II^{-1} K_IG`.
fn schur_complement(ops: &Operators, part: &Partition, kgg: &CsrMatrix) -> Result<Mat<f64>> {
    let ng = part.gamma.len();
    let ni = part.interior.len();
    let mut s = Mat::<f64>::from_fn(ng, ng, |i, j| kgg.get(i, j));
    if ni == 0 {
        return Ok(s);
    }
    let kii = ops.stiffness.block_triplets(&part.interior, &part.interior_local);
    let chol = SparseCholesky::factor(ni, &kii)?;
    let coupling: Vec<Vec<(usize, f64)>> = part
        .gamma
        .iter()
        .map(|&g| ops.stiffness.row(g).filter_map(|(j, v)| part.interior_local[j].map(|i| (i, v))).collect())
        .collect();
    for start in (0..ng).step_by(BLOCK) {
        let end = (start + BLOCK).min(ng);
        let w = end - start;
        let mut rhs = vec![0.0; ni * w];
        for (c, b) in (start..end).enumerate() {
            for &(i, v) in &coupling[b] {
                rhs[c * ni + i] = v;
            }
        }
        let x = chol.solve_columns(&rhs, w);
        for a in 0..ng {
            for (c, b) in (start..end).enumerate() {
                let dot: f64 = coupling[a].iter().map(|&(i, v)| v * x[c * ni + i]).sum();
                s[(a, b)] -= dot;
            }
        }
    }
    symmetrize(&mut s);
    Ok(s)
}

pub(crate) fn dense_route(ops: &Operators, part: &Partition, count: usize) -> Result<Pairs> {
    let ng = part.gamma.len();
    let (kgg, bgg) = boundary_blocks(ops, part);
    let s = schur_complement(ops, part, &kgg)?;
    let b = Mat::<f64>::from_fn(ng, ng, |i, j| bgg.get(i, j));
    let w = inverse_sqrt(&b)?;
    let mut c = &w * &s * &w;
    symmetrize(&mut c);
    let e = c
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::NoConvergence { iterations: 0, residual: f64::NAN })?;
    let (theta, y) = (e.S(), e.U());
    let y_top = Mat::<f64>::from_fn(ng, count, |i, j| y[(i, j)]);
    let mut x = &w * &y_top;
    fix_signs(&mut x);
    let (s_norm, b_norm) = (norm_one(&s), norm_one(&b));
    let sx = &s * &x;
    let bx = &b * &x;
    let mut values = Vec::with_capacity(count);
    let mut residuals = Vec::with_capacity(count);
    for j in 0..count {
        let sigma = theta[j].max(0.0);
        let r = (0..ng).map(|i| (sx[(i, j)] - sigma * bx[(i, j)]).powi(2)).sum::<f64>().sqrt();
        values.push(sigma);
        residuals.push(backward_error(r, s_norm, b_norm, sigma, col_norm(&x, j)));
    }
    let vectors = (0..count).map(|j| (0..ng).map(|i| x[(i, j)]).collect()).collect();
    Ok(Pairs { values, vectors, residuals, iterations: 1 })
}

/// Block subspace iteration with the shifted inverse `(S + sB)^{-1} B`, applied
/// through one sparse factorization of `K + sB` on the full vertex set.
pub(crate) fn subspace_route(ops: &Operators, part: &Partition, count: usize, tol: f64) -> Result<Pairs> {
    let ng = part.gamma.len();
    let nv = ops.stiffness.dim();
    let (kgg, bgg) = boundary_blocks(ops, part);
    let trace_k: f64 = (0..ng).map(|i| kgg.get(i, i)).sum();
    let trace_b: f64 = (0..ng).map(|i| bgg.get(i, i)).sum();
    let shift = 1e-3 * trace_k / trace_b;
    let mut trip = Vec::with_capacity(ops.stiffness.nnz() + ops.boundary_mass.nnz());
    for i in 0..nv {
        trip.extend(ops.stiffness.row(i).map(|(j, v)| (i, j, v)));
        trip.extend(ops.boundary_mass.row(i).map(|(j, v)| (i, j, shift * v)));
    }
    let chol = SparseCholesky::factor(nv, &trip)?;
    let s_norm = kgg.norm_inf();
    let b_norm = bgg.norm_inf();
    let p = (2 * count).max(count + 8).min(ng);

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x = Mat::<f64>::from_fn(ng, p, |_, j| if j == 0 { 1.0 } else { StandardNormal.sample(&mut rng) });
    {
        let bx = csr_times(&bgg, &x);
        let g = x.transpose() * &bx;
        x = &x * inverse_sqrt(&g)?;
    }
    let mut last = Vec::new();
    for it in 1..=MAX_SUBSPACE_ITERATIONS {
        let bx = csr_times(&bgg, &x);
        let mut rhs = vec![0.0; nv * p];
        for c in 0..p {
            for (i, &g) in part.gamma.iter().enumerate() {
                rhs[c * nv + g] = bx[(i, c)];
            }
        }
        let sol = chol.solve_columns(&rhs, p);
        let y = Mat::<f64>::from_fn(ng, p, |i, c| sol[c * nv + part.gamma[i]]);
        let by = csr_times(&bgg, &y);
        let sy = &bx - &by * faer::Scale(shift);
        let mut hb = y.transpose() * &by;
        symmetrize(&mut hb);
        let mut hs = y.transpose() * &sy;
        symmetrize(&mut hs);
        let wb = inverse_sqrt(&hb)?;
        let mut c = &wb * &hs * &wb;
        symmetrize(&mut c);
        let e = c
            .self_adjoint_eigen(Side::Lower)
            .map_err(|_| Error::NoConvergence { iterations: it, residual: f64::NAN })?;
        let v = &wb * e.U();
        let theta: Vec<f64> = (0..p).map(|j| e.S()[j]).collect();
        let mut xn = &y * &v;
        let sxn = &sy * &v;
        let bxn = &by * &v;
        let mut residuals = Vec::with_capacity(count);
        for j in 0..count {
            let sigma = theta[j].max(0.0);
            let r = (0..ng).map(|i| (sxn[(i, j)] - sigma * bxn[(i, j)]).powi(2)).sum::<f64>().sqrt();
            residuals.push(backward_error(r, s_norm, b_norm, sigma, col_norm(&xn, j)));
        }
        let done = residuals.iter().all(|&r| r <= tol);
        if done || it == MAX_SUBSPACE_ITERATIONS {
            fix_signs(&mut xn);
            let values = theta[..count].iter().map(|t| t.max(0.0)).collect();
            let vectors = (0..count).map(|j| (0..ng).map(|i| xn[(i, j)]).collect()).collect();
            if !done {
                let worst = residuals.iter().copied().fold(0.0, f64::max);
                return Err(Error::NoConvergence { iterations: it, residual: worst });
            }
            return Ok(Pairs { values, vectors, residuals, iterations: it });
        }
        last = residuals;
        x = xn;
    }
    let worst = last.iter().copied().fold(0.0, f64::max);
    Err(Error::NoConvergence { iterations: MAX_SUBSPACE_ITERATIONS, residual: worst })
}
