//! Exact diagonalization of the spin ring for small `L`, independent of the
//! free-fermion pipeline.
//!
//! Basis state bit `j` is site `j`; bit 0 is spin up (`σz = +1`). The
//! Hamiltonian is real symmetric and commutes with the parity `P = Π σz`, so
//! each parity sector is diagonalized separately: densely up to `L = 12`,
//! by Lanczos with full reorthogonalization for `L = 13, 14`.
//!
//! Correlators here are physical expectation values. The free-fermion `G_0`
//! is minus the physical magnetization, so compare against
//! [`Correlators::spin_flipped`].

use nalgebra::{Complex, DMatrix, DVector, Matrix2, Matrix4, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::rdm::{Correlators, TwoSiteState};

pub const MAX_SITES: usize = 14;
pub const DENSE_MAX_SITES: usize = 12;
const DEGENERACY_TOL: f64 = 1e-8;

/// How spin terms that wrap around the ring are closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Boundary {
    /// Site indices mod `L`.
    #[default]
    Periodic,
    /// Wrapping terms carry an extra `-P`, which makes the fermions periodic in
    /// every parity sector. The ground state then reproduces the finite mode sum.
    FermionPeriodic,
}

fn spin(s: u32, j: usize) -> f64 {
    if s >> j & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn parity(s: u32) -> f64 {
    if s.count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Calls `emit(target, amplitude)` for every term of `H|s⟩`.
fn apply_terms(p: &ModelParams, l: usize, boundary: Boundary, s: u32, mut emit: impl FnMut(u32, f64)) {
    let wrap = match boundary {
        Boundary::Periodic => 1.0,
        Boundary::FermionPeriodic => -parity(s),
    };
    let mut diag = 0.0;
    for j in 0..l {
        diag -= p.lambda * spin(s, j);

        // Bond (j, j+1): σxσx flips both spins, σyσy does too with -s_a s_b.
        let k = (j + 1) % l;
        let same = spin(s, j) * spin(s, k);
        let amp = -((1.0 + p.gamma) / 2.0 - (1.0 - p.gamma) / 2.0 * same);
        let sign = if k == 0 { wrap } else { 1.0 };
        emit(s ^ (1 << j) ^ (1 << k), sign * amp);

        // Three-spin term centered on j.
        if p.alpha != 0.0 {
            let a = (j + l - 1) % l;
            let same = spin(s, a) * spin(s, k);
            let amp = -p.alpha * spin(s, j) * ((1.0 + p.delta) / 2.0 - (1.0 - p.delta) / 2.0 * same);
            let sign = if j == 0 || j == l - 1 { wrap } else { 1.0 };
            emit(s ^ (1 << a) ^ (1 << k), sign * amp);
        }
    }
    emit(s, diag);
}

fn chain_length(params: &ModelParams) -> Result<usize> {
    let l = params.require_chain_length()?;
    if l > MAX_SITES {
        return Err(Error::Capacity(l));
    }
    Ok(l)
}

/// Full `2^L × 2^L` matrix, `L ≤ 12`.
pub fn dense_hamiltonian(params: &ModelParams, boundary: Boundary) -> Result<DMatrix<f64>> {
    let l = chain_length(params)?;
    if l > DENSE_MAX_SITES {
        return Err(Error::Capacity(l));
    }
    let n = 1usize << l;
    let mut h = DMatrix::zeros(n, n);
    for s in 0..n as u32 {
        apply_terms(params, l, boundary, s, |t, a| h[(t as usize, s as usize)] += a);
    }
    Ok(h)
}

/// Sparse Hamiltonian restricted to one parity sector.
struct Sector {
    states: Vec<u32>,
    diag: Vec<f64>,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl Sector {
    fn new(params: &ModelParams, l: usize, boundary: Boundary, even: bool) -> Self {
        let states: Vec<u32> = (0..1u32 << l).filter(|s| (s.count_ones() % 2 == 0) == even).collect();
        let mut index = vec![u32::MAX; 1 << l];
        for (i, &s) in states.iter().enumerate() {
            index[s as usize] = i as u32;
        }
        let mut diag = vec![0.0; states.len()];
        let mut row_ptr = vec![0];
        let (mut cols, mut vals) = (Vec::new(), Vec::new());
        for (i, &s) in states.iter().enumerate() {
            apply_terms(params, l, boundary, s, |t, a| {
                if t == s {
                    diag[i] += a;
                } else if a != 0.0 {
                    cols.push(index[t as usize]);
                    vals.push(a);
                }
            });
            row_ptr.push(cols.len());
        }
        Self { states, diag, row_ptr, cols, vals }
    }

    fn dim(&self) -> usize {
        self.states.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.dim() {
            let mut acc = self.diag[i] * x[i];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            y[i] = acc;
        }
    }

    fn dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut h = DMatrix::from_diagonal(&DVector::from_column_slice(&self.diag));
        for i in 0..n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                h[(i, self.cols[k] as usize)] += self.vals[k];
            }
        }
        h
    }

    fn residual(&self, e: f64, v: &[f64]) -> f64 {
        let mut hv = vec![0.0; v.len()];
        self.apply(v, &mut hv);
        hv.iter().zip(v).map(|(a, b)| (a - e * b).powi(2)).sum::<f64>().sqrt()
    }
}

/// Lowest eigenpair and the number of eigenvalues within the degeneracy
/// window, for a dense symmetric matrix.
pub fn lowest_eigenpair(h: &DMatrix<f64>) -> Result<(f64, DVector<f64>, usize)> {
    if h.nrows() != h.ncols() || h.nrows() == 0 {
        return Err(Error::Config("eigensolver needs a non-empty square matrix".into()));
    }
    let eig = SymmetricEigen::try_new(h.clone(), 1e-15, 0)
        .ok_or_else(|| Error::Numerical("symmetric eigensolver did not converge".into()))?;
    let (imin, &e0) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty spectrum");
    let window = DEGENERACY_TOL * e0.abs().max(1.0);
    let degeneracy = eig.eigenvalues.iter().filter(|&&e| e - e0 <= window).count();
    Ok((e0, eig.eigenvectors.column(imin).into_owned(), degeneracy))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn lanczos(op: &Sector, seed: u64) -> Result<(f64, Vec<f64>)> {
    let n = op.dim();
    let max_iter = n.min(400);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut start: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut best = None;
    for _restart in 0..6 {
        let norm = dot(&start, &start).sqrt();
        start.iter_mut().for_each(|x| *x /= norm);
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let (mut alphas, mut betas) = (Vec::new(), Vec::new());
        let mut w = vec![0.0; n];
        let mut ritz = (0.0, DVector::zeros(0));
        for j in 0..max_iter {
            op.apply(&basis[j], &mut w);
            let a = dot(&w, &basis[j]);
            alphas.push(a);
            for _pass in 0..2 {
                for v in &basis {
                    let c = dot(&w, v);
                    w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
                }
            }
            let b = dot(&w, &w).sqrt();
            let m = alphas.len();
            let t = DMatrix::from_fn(m, m, |r, c| {
                if r == c {
                    alphas[r]
                } else if r + 1 == c {
                    betas[r]
                } else if c + 1 == r {
                    betas[c]
                } else {
                    0.0
                }
            });
            let (theta, y, _) = lowest_eigenpair(&t)?;
            ritz = (theta, y);
            if b * ritz.1[m - 1].abs() < 1e-12 || b < 1e-12 || j + 1 == max_iter {
                break;
            }
            betas.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }
        let (theta, y) = ritz;
        let mut v = vec![0.0; n];
        for (coef, b) in y.iter().zip(&basis) {
            v.iter_mut().zip(b).for_each(|(x, bb)| *x += coef * bb);
        }
        let norm = dot(&v, &v).sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        let mut hv = vec![0.0; n];
        op.apply(&v, &mut hv);
        let e = dot(&v, &hv);
        if op.residual(e, &v) <= 1e-9 {
            return Ok((e, v));
        }
        best = Some(theta);
        start = v;
    }
    Err(Error::Numerical(format!("Lanczos did not converge (last Ritz value {best:?})")))
}

/// Lowest state of one sector and its in-sector degeneracy.
fn sector_ground(op: &Sector, dense: bool) -> Result<(f64, Vec<f64>, usize)> {
    if dense {
        let (e, v, d) = lowest_eigenpair(&op.dense())?;
        Ok((e, v.as_slice().to_vec(), d))
    } else {
        let (e, v) = lanczos(op, 0x5eed)?;
        Ok((e, v, 1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseGroundState {
    pub energy: f64,
    /// Real amplitudes over the full `2^L` basis.
    pub amplitudes: Vec<f64>,
    pub degeneracy: usize,
    pub chain_length: usize,
    /// Parity `Π σz` of the returned vector.
    pub parity: i8,
    pub residual: f64,
}

/// Ground state of the ring; among degenerate levels the parity-even vector
/// (the symmetric cat state for the Ising fixed point) is returned.
pub fn ground_state(params: &ModelParams, boundary: Boundary) -> Result<DenseGroundState> {
    let l = chain_length(params)?;
    let dense = l <= DENSE_MAX_SITES;
    let even = Sector::new(params, l, boundary, true);
    let odd = Sector::new(params, l, boundary, false);
    let ge = sector_ground(&even, dense)?;
    let go = sector_ground(&odd, dense)?;
    let e0 = ge.0.min(go.0);
    let window = DEGENERACY_TOL * e0.abs().max(1.0);
    let mut degeneracy = 0;
    for g in [&ge, &go] {
        if g.0 - e0 <= window {
            degeneracy += g.2;
        }
    }
    let (op, g, parity) = if ge.0 - e0 <= window { (&even, ge, 1) } else { (&odd, go, -1) };
    let residual = op.residual(g.0, &g.1);
    if residual > 1e-8 {
        return Err(Error::Numerical(format!("ground-state residual {residual:.3e}")));
    }
    let mut amplitudes = vec![0.0; 1 << l];
    for (&s, &a) in op.states.iter().zip(&g.1) {
        amplitudes[s as usize] = a;
    }
    Ok(DenseGroundState { energy: g.0, amplitudes, degeneracy, chain_length: l, parity, residual })
}

/// Reduced density matrix of sites `(i, j)` in the basis `|00⟩, |01⟩, |10⟩, |11⟩`
/// (first index site `i`).
pub fn two_site_rdm(state: &DenseGroundState, i: usize, j: usize) -> Result<Matrix4<f64>> {
    let l = state.chain_length;
    if i == j || i >= l || j >= l {
        return Err(Error::Config(format!("sites ({i}, {j}) invalid for a ring of {l}")));
    }
    let psi = &state.amplitudes;
    let mut rho = Matrix4::zeros();
    let mask = !((1u32 << i) | (1u32 << j));
    for (s, &a) in psi.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let s = s as u32;
        let row = ((s >> i & 1) * 2 + (s >> j & 1)) as usize;
        for col in 0..4u32 {
            let t = (s & mask) | ((col >> 1) << i) | ((col & 1) << j);
            rho[(row, col as usize)] += a * psi[t as usize];
        }
    }
    Ok(rho)
}

/// X-state elements of a 4×4 density matrix.
pub fn x_state(rho: &Matrix4<f64>, distance: usize) -> TwoSiteState {
    TwoSiteState {
        u_plus: rho[(0, 0)],
        u_minus: rho[(3, 3)],
        z_diag: 0.5 * (rho[(1, 1)] + rho[(2, 2)]),
        y_plus: 0.5 * (rho[(1, 2)] + rho[(2, 1)]),
        y_minus: 0.5 * (rho[(0, 3)] + rho[(3, 0)]),
        distance,
    }
}

/// Physical correlators between site 0 and site `r`.
pub fn oracle_correlators(state: &DenseGroundState, r: usize) -> Result<Correlators> {
    Ok(x_state(&two_site_rdm(state, 0, r)?, r).correlators())
}

/// Sum of absolute off-diagonal elements.
pub fn matrix_coherence(rho: &Matrix4<f64>) -> f64 {
    let mut s = 0.0;
    for r in 0..4 {
        for c in 0..4 {
            if r != c {
                s += rho[(r, c)].abs();
            }
        }
    }
    s
}

fn psd_sqrt(m: &Matrix4<f64>) -> Matrix4<f64> {
    let e = m.symmetric_eigen();
    let d = Matrix4::from_diagonal(&e.eigenvalues.map(|x| x.max(0.0).sqrt()));
    e.eigenvectors * d * e.eigenvectors.transpose()
}

/// Wootters concurrence of a real two-qubit density matrix.
pub fn wootters_concurrence(rho: &Matrix4<f64>) -> f64 {
    // σy⊗σy is real: antidiagonal (-1, 1, 1, -1).
    let mut yy = Matrix4::zeros();
    for (k, v) in [-1.0, 1.0, 1.0, -1.0].into_iter().enumerate() {
        yy[(k, 3 - k)] = v;
    }
    let tilde = yy * rho * yy;
    let s = psd_sqrt(rho);
    let r = s * tilde * s;
    let r = 0.5 * (r + r.transpose());
    let mut l: Vec<f64> = r.symmetric_eigenvalues().iter().map(|x| x.max(0.0).sqrt()).collect();
    l.sort_by(|a, b| b.total_cmp(a));
    (l[0] - l[1] - l[2] - l[3]).max(0.0)
}

fn bits(eigs: impl IntoIterator<Item = f64>) -> f64 {
    eigs.into_iter().filter(|&p| p > 0.0).map(|p| -p * p.log2()).sum()
}

fn hermitian_entropy(m: &Matrix2<Complex<f64>>) -> f64 {
    let (a, d) = (m[(0, 0)].re, m[(1, 1)].re);
    let half = (0.25 * (a - d).powi(2) + m[(0, 1)].norm_sqr()).sqrt();
    bits([(a + d) / 2.0 + half, (a + d) / 2.0 - half])
}

/// Conditional entropy of site B after projecting site A on `±n(θ, φ)`,
/// computed by explicit projection and partial trace.
fn projected_entropy(rho: &Matrix4<f64>, theta: f64, phi: f64) -> f64 {
    let n = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
    let mut total = 0.0;
    for s in [1.0, -1.0] {
        // Π = (1 + s n·σ)/2
        let proj = Matrix2::new(
            Complex::new((1.0 + s * n[2]) / 2.0, 0.0),
            Complex::new(s * n[0] / 2.0, -s * n[1] / 2.0),
            Complex::new(s * n[0] / 2.0, s * n[1] / 2.0),
            Complex::new((1.0 - s * n[2]) / 2.0, 0.0),
        );
        let mut rb = Matrix2::<Complex<f64>>::zeros();
        for b in 0..2 {
            for bp in 0..2 {
                for a in 0..2 {
                    for ap in 0..2 {
                        rb[(b, bp)] += proj[(ap, a)] * rho[(2 * a + b, 2 * ap + bp)];
                    }
                }
            }
        }
        let p = rb[(0, 0)].re + rb[(1, 1)].re;
        if p > 1e-15 {
            total += p * hermitian_entropy(&rb.map(|x| x / p));
        }
    }
    total
}

/// Discord with measurement on site A by brute-force search over directions.
pub fn matrix_discord(rho: &Matrix4<f64>, n_theta: usize, n_phi: usize) -> f64 {
    let rho_a = [rho[(0, 0)] + rho[(1, 1)], rho[(2, 2)] + rho[(3, 3)]];
    let s_a = bits(rho_a);
    let s_ab = bits(rho.symmetric_eigenvalues().iter().copied());
    let mut best = f64::INFINITY;
    let mut arg = (0.0, 0.0);
    for i in 0..n_theta {
        let t = std::f64::consts::PI * i as f64 / (n_theta - 1) as f64;
        for j in 0..n_phi {
            let p = std::f64::consts::PI * j as f64 / (n_phi - 1) as f64;
            let v = projected_entropy(rho, t, p);
            if v < best {
                best = v;
                arg = (t, p);
            }
        }
    }
    // Local polish by shrinking coordinate steps.
    let mut step = std::f64::consts::PI / (n_theta - 1) as f64;
    while step > 1e-9 {
        let mut moved = false;
        for (dt, dp) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let v = projected_entropy(rho, arg.0 + dt, arg.1 + dp);
            if v < best {
                best = v;
                arg = (arg.0 + dt, arg.1 + dp);
                moved = true;
            }
        }
        if !moved {
            step /= 2.0;
        }
    }
    s_a - s_ab + best
}
