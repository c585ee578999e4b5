//! Entropic functionals, all in bits.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, herm_eig, ComplexMatrix, Spectrum, RANK_TOL};
use crate::states::{random_unitary, rng_from_seed, DensityMatrix, TripartiteLabels};

/// Weight of `ρ` outside `supp σ` above which the divergence is infinite.
const SUPPORT_TOL: f64 = 1e-12;

/// Entropies (bits) entering `I(A:C|B)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub h_ab: f64,
    pub h_bc: f64,
    pub h_b: f64,
    pub h_abc: f64,
    pub i_ac_given_b: f64,
}

fn entropy_of_spectrum(spec: &Spectrum) -> f64 {
    let cut = spec.support_threshold(RANK_TOL);
    let h: f64 = spec
        .values
        .iter()
        .filter(|&&l| l > cut)
        .map(|&l| -l * l.log2())
        .sum();
    h.max(0.0)
}

/// `−tr ρ log₂ ρ`.
pub fn von_neumann(rho: &DensityMatrix) -> f64 {
    von_neumann_matrix(rho.matrix()).unwrap_or(0.0)
}

pub fn von_neumann_matrix(m: &ComplexMatrix) -> Result<f64> {
    Ok(entropy_of_spectrum(&herm_eig(m)?))
}

/// `I(A:C|B) = H(AB) + H(BC) − H(B) − H(ABC)`.
pub fn cmi(rho: &DensityMatrix, labels: &TripartiteLabels) -> Result<EntropyReport> {
    labels.validate(rho.dims())?;
    let ab: Vec<usize> = labels.a.iter().chain(&labels.b).copied().collect();
    let bc: Vec<usize> = labels.b.iter().chain(&labels.c).copied().collect();
    let h_ab = von_neumann(&rho.marginal(&ab)?);
    let h_bc = von_neumann(&rho.marginal(&bc)?);
    let h_b = von_neumann(&rho.marginal(&labels.b)?);
    let h_abc = von_neumann(rho);
    Ok(EntropyReport {
        h_ab,
        h_bc,
        h_b,
        h_abc,
        i_ac_given_b: h_ab + h_bc - h_b - h_abc,
    })
}

/// Weight `tr(ρ (1 − Π_σ))` of `ρ` outside the support of `σ`.
fn weight_outside_support(rho: &ComplexMatrix, sigma_spec: &Spectrum) -> f64 {
    let basis = sigma_spec.support_basis(RANK_TOL);
    let inside = (basis.adjoint() * rho * &basis).trace().re;
    linalg::trace(rho).re - inside
}

/// `D(ρ‖σ) = tr ρ (log₂ ρ − log₂ σ)`, `+∞` when `supp ρ ⊄ supp σ`.
///
/// `σ` may be any PSD operator; the value is not clamped at zero.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    relative_entropy_matrix(rho.matrix(), sigma)
}

pub fn relative_entropy_matrix(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    if rho.shape() != sigma.shape() {
        return Err(Error::DimensionMismatch(format!(
            "relative entropy of {:?} and {:?} matrices",
            rho.shape(),
            sigma.shape()
        )));
    }
    let rho_spec = herm_eig(rho)?;
    let sigma_spec = herm_eig(sigma)?;
    if weight_outside_support(rho, &sigma_spec) > SUPPORT_TOL {
        return Ok(f64::INFINITY);
    }
    let neg_entropy = -entropy_of_spectrum(&rho_spec);
    let log_sigma = linalg::spectral::func_on_support(
        &sigma_spec,
        |l| Complex64::new(l.log2(), 0.0),
        RANK_TOL,
    )?;
    let cross = (rho * log_sigma).trace().re;
    Ok(neg_entropy - cross)
}

/// Classical relative entropy in bits; `+∞` if `p` is not dominated by `q`.
pub fn classical_kl(p: &[f64], q: &[f64]) -> f64 {
    let mut d = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi <= 0.0 {
            continue;
        }
        if qi <= 0.0 {
            return f64::INFINITY;
        }
        d += pi * (pi / qi).log2();
    }
    d
}

/// Options for the variational measured-relative-entropy solver.
#[derive(Clone, Debug)]
pub struct MeasuredOptions {
    pub max_iter: usize,
    pub grad_tol: f64,
    pub memory: usize,
}

impl Default for MeasuredOptions {
    fn default() -> Self {
        MeasuredOptions {
            max_iter: 5000,
            grad_tol: 1e-11,
            memory: 20,
        }
    }
}

/// Outcome of the variational solve.
#[derive(Clone, Debug)]
pub struct MeasuredSolution {
    pub value_bits: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    /// Optimal `ω` restricted to the support of `σ`, in the support basis.
    pub omega: ComplexMatrix,
}

/// Measured relative entropy `D_M(ρ‖σ)` in bits.
///
/// Computed from `sup_{ω ≻ 0} tr(ρ ln ω) + 1 − tr(σ ω)`, parametrised as
/// `ω = exp(H)` and maximised by L-BFGS. The objective is concave in `ω`, so
/// every stationary point in `H` is a global maximiser.
pub fn measured_relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    measured_relative_entropy_matrix(rho.matrix(), sigma.matrix())
}

pub fn measured_relative_entropy_matrix(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    Ok(solve_measured(rho, sigma, &MeasuredOptions::default())?.value_bits)
}

pub fn solve_measured(
    rho: &ComplexMatrix,
    sigma: &ComplexMatrix,
    opts: &MeasuredOptions,
) -> Result<MeasuredSolution> {
    if rho.shape() != sigma.shape() {
        return Err(Error::DimensionMismatch(format!(
            "measured relative entropy of {:?} and {:?} matrices",
            rho.shape(),
            sigma.shape()
        )));
    }
    let sigma_spec = herm_eig(sigma)?;
    if weight_outside_support(rho, &sigma_spec) > SUPPORT_TOL {
        return Ok(MeasuredSolution {
            value_bits: f64::INFINITY,
            grad_norm: 0.0,
            iterations: 0,
            omega: ComplexMatrix::zeros(0, 0),
        });
    }
    let basis = sigma_spec.support_basis(RANK_TOL);
    let rho_s = linalg::hermitize(&(basis.adjoint() * rho * &basis));
    let sigma_s = linalg::hermitize(&(basis.adjoint() * sigma * &basis));
    let n = rho_s.nrows();

    let objective = |x: &[f64]| -> (f64, Vec<f64>) {
        let h = unpack_hermitian(x, n);
        let (value, grad) = variational_value(&rho_s, &sigma_s, &h);
        (
            -value,
            pack_hermitian(&grad).into_iter().map(|g| -g).collect(),
        )
    };
    let (x, iterations) = lbfgs_minimize(objective, vec![0.0; n * n], opts);
    let h = unpack_hermitian(&x, n);
    let (value, grad) = variational_value(&rho_s, &sigma_s, &h);
    let omega = expm_hermitian(&h)?;
    Ok(MeasuredSolution {
        value_bits: value / std::f64::consts::LN_2,
        grad_norm: grad.norm(),
        iterations,
        omega,
    })
}

fn expm_hermitian(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let spec = herm_eig(h)?;
    Ok(spec.reconstruct_with(|l| Complex64::new(l.exp(), 0.0)))
}

/// `(e^a − e^b)/(a − b)`, continuous at `a = b`.
fn exp_divided_difference(a: f64, b: f64) -> f64 {
    let d = 0.5 * (a - b);
    let mid = (0.5 * (a + b)).exp();
    if d.abs() < 1e-8 {
        mid * (1.0 + d * d / 6.0)
    } else {
        mid * d.sinh() / d
    }
}

/// Value (nats) and gradient of `H ↦ tr(ρH) + 1 − tr(σ e^H)`.
fn variational_value(
    rho: &ComplexMatrix,
    sigma: &ComplexMatrix,
    h: &ComplexMatrix,
) -> (f64, ComplexMatrix) {
    let spec = herm_eig(h).expect("iterate stays finite and Hermitian");
    let n = spec.dim();
    let v = &spec.vectors;
    let sigma_eig = v.adjoint() * sigma * v;
    let tr_sigma_exp: f64 = (0..n)
        .map(|i| sigma_eig[(i, i)].re * spec.values[i].exp())
        .sum();
    let value = (rho * h).trace().re + 1.0 - tr_sigma_exp;
    // Fréchet derivative of exp at H applied to σ, in the eigenbasis of H.
    let frechet = ComplexMatrix::from_fn(n, n, |i, j| {
        sigma_eig[(i, j)] * exp_divided_difference(spec.values[i], spec.values[j])
    });
    let grad = rho - v * frechet * v.adjoint();
    (value, linalg::hermitize(&grad))
}

fn pack_hermitian(m: &ComplexMatrix) -> Vec<f64> {
    let n = m.nrows();
    let mut x = Vec::with_capacity(n * n);
    let s = std::f64::consts::SQRT_2;
    for k in 0..n {
        x.push(m[(k, k)].re);
    }
    for k in 0..n {
        for l in (k + 1)..n {
            x.push(s * m[(k, l)].re);
            x.push(s * m[(k, l)].im);
        }
    }
    x
}

fn unpack_hermitian(x: &[f64], n: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for k in 0..n {
        m[(k, k)] = Complex64::new(x[k], 0.0);
    }
    let mut idx = n;
    for k in 0..n {
        for l in (k + 1)..n {
            let z = Complex64::new(s * x[idx], s * x[idx + 1]);
            m[(k, l)] = z;
            m[(l, k)] = z.conj();
            idx += 2;
        }
    }
    m
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Limited-memory BFGS with a backtracking Armijo line search.
fn lbfgs_minimize(
    f: impl Fn(&[f64]) -> (f64, Vec<f64>),
    mut x: Vec<f64>,
    opts: &MeasuredOptions,
) -> (Vec<f64>, usize) {
    let (mut fx, mut g) = f(&x);
    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut iter = 0;
    while iter < opts.max_iter {
        if dot(&g, &g).sqrt() <= opts.grad_tol {
            break;
        }
        // Two-loop recursion.
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(s_hist.len());
        for (s, y) in s_hist.iter().zip(&y_hist).rev() {
            let rho = 1.0 / dot(y, s);
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        if let (Some(s), Some(y)) = (s_hist.last(), y_hist.last()) {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|qi| *qi *= gamma);
        }
        for ((s, y), a) in s_hist.iter().zip(&y_hist).zip(alphas.into_iter().rev()) {
            let rho = 1.0 / dot(y, s);
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&g, &dir);
        if slope >= 0.0 {
            dir = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
            s_hist.clear();
            y_hist.clear();
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let xn: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            let (fn_, gn) = f(&xn);
            if fn_.is_finite() && fn_ <= fx + 1e-4 * step * slope {
                accepted = Some((xn, fn_, gn));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fn_, gn)) = accepted else {
            break;
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        let stalled = (fx - fn_).abs() <= 1e-16 * fx.abs().max(1.0) && dot(&s, &s) < 1e-30;
        if sy > 1e-16 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() {
            s_hist.push(s);
            y_hist.push(y);
            if s_hist.len() > opts.memory {
                s_hist.remove(0);
                y_hist.remove(0);
            }
        }
        x = xn;
        fx = fn_;
        g = gn;
        iter += 1;
        if stalled {
            break;
        }
    }
    (x, iter)
}

/// Classical relative entropy of the outcome distributions of measuring `ρ`
/// and `σ` in the orthonormal basis given by the columns of `basis`.
pub fn measured_in_basis(rho: &ComplexMatrix, sigma: &ComplexMatrix, basis: &ComplexMatrix) -> f64 {
    let probs = |m: &ComplexMatrix| -> Vec<f64> {
        let d = basis.adjoint() * m * basis;
        (0..d.nrows()).map(|i| d[(i, i)].re.max(0.0)).collect()
    };
    classical_kl(&probs(rho), &probs(sigma))
}

/// Lower bound on `D_M(ρ‖σ)` from Haar-random rank-one projective
/// measurements, plus any caller-supplied bases.
pub fn measured_rel_ent_lower_with_bases(
    rho: &ComplexMatrix,
    sigma: &ComplexMatrix,
    n_samples: usize,
    seed: u64,
    extra_bases: &[ComplexMatrix],
) -> f64 {
    let mut rng = rng_from_seed(seed);
    let n = rho.nrows();
    let mut best = 0.0f64;
    for basis in extra_bases {
        best = best.max(measured_in_basis(rho, sigma, basis));
    }
    for _ in 0..n_samples {
        let u = random_unitary(n, &mut rng);
        best = best.max(measured_in_basis(rho, sigma, &u));
    }
    best
}

pub fn measured_rel_ent_lower(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    n_samples: usize,
    seed: u64,
) -> f64 {
    measured_rel_ent_lower_with_bases(rho.matrix(), sigma.matrix(), n_samples, seed, &[])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag_real, identity, unit, DimVector};
    use crate::states::{
        classical_chain_state, counterexample_state, ghz_state, maximally_mixed, random_density,
    };

    fn dm(m: ComplexMatrix) -> DensityMatrix {
        let n = m.nrows();
        DensityMatrix::new(m, DimVector::new(vec![n]).unwrap()).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert!(von_neumann(&dm(unit(2, 0, 0))).abs() < 1e-14);
        assert!((von_neumann(&dm(diag_real(&[0.5, 0.5]))) - 1.0).abs() < 1e-14);
        // h(1/4) = 2 − (3/4)·log₂ 3
        let h = 2.0 - 0.75 * 3f64.log2();
        assert!((von_neumann(&dm(diag_real(&[0.75, 0.25]))) - h).abs() < 1e-14);
        assert!((h - 0.811278).abs() < 1e-6);
    }

    #[test]
    fn cmi_examples() {
        let labels = TripartiteLabels::standard();
        let ghz = cmi(&ghz_state(3), &labels).unwrap();
        assert!((ghz.i_ac_given_b - 1.0).abs() < 1e-12);
        let chain = cmi(&classical_chain_state(), &labels).unwrap();
        for h in [chain.h_ab, chain.h_bc, chain.h_b, chain.h_abc] {
            assert!((h - 1.0).abs() < 1e-12);
        }
        assert!(chain.i_ac_given_b.abs() < 1e-12);
        let d = DimVector::new(vec![2]).unwrap();
        let prod = random_density(&d, 2, 1)
            .unwrap()
            .tensor(&random_density(&d, 2, 2).unwrap())
            .tensor(&random_density(&d, 2, 3).unwrap());
        assert!(cmi(&prod, &labels).unwrap().i_ac_given_b.abs() < 1e-12);
        let bad = TripartiteLabels::new(vec![0], vec![1], vec![1]);
        assert!(cmi(&prod, &bad).is_err());
    }

    #[test]
    fn counterexample_state_cmi_is_positive() {
        let r = cmi(&counterexample_state(), &TripartiteLabels::standard()).unwrap();
        assert!(r.i_ac_given_b > 0.0);
    }

    #[test]
    fn relative_entropy_examples() {
        let rho = dm(diag_real(&[0.3, 0.7]));
        assert!(relative_entropy(&rho, rho.matrix()).unwrap().abs() < 1e-14);
        let p0 = dm(unit(2, 0, 0));
        let mixed = maximally_mixed(&DimVector::new(vec![2]).unwrap());
        assert!((relative_entropy(&p0, mixed.matrix()).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(
            relative_entropy(&mixed, &unit(2, 0, 0)).unwrap(),
            f64::INFINITY
        );
    }

    #[test]
    fn relative_entropy_commuting_is_kl() {
        let p = [0.1, 0.2, 0.3, 0.4];
        let q = [0.25, 0.4, 0.05, 0.3];
        let d = relative_entropy(&dm(diag_real(&p)), &diag_real(&q)).unwrap();
        assert!((d - classical_kl(&p, &q)).abs() < 1e-12);
    }

    #[test]
    fn measured_commuting_is_kl() {
        let p = [0.1, 0.2, 0.3, 0.4];
        let q = [0.25, 0.4, 0.05, 0.3];
        let dm_val = measured_relative_entropy_matrix(&diag_real(&p), &diag_real(&q)).unwrap();
        assert!((dm_val - classical_kl(&p, &q)).abs() < 1e-8);
        let lower = measured_rel_ent_lower_with_bases(
            &diag_real(&p),
            &diag_real(&q),
            10,
            1,
            &[identity(4)],
        );
        assert!((lower - classical_kl(&p, &q)).abs() < 1e-12);
    }

    #[test]
    fn measured_of_equal_states_is_zero() {
        let rho = random_density(&DimVector::new(vec![3]).unwrap(), 3, 4).unwrap();
        assert!(measured_relative_entropy(&rho, &rho).unwrap().abs() < 1e-10);
        assert!(measured_rel_ent_lower(&rho, &rho, 20, 1).abs() < 1e-10);
    }

    #[test]
    fn measured_support_violation_is_infinite() {
        let mixed = maximally_mixed(&DimVector::new(vec![2]).unwrap());
        let p0 = dm(unit(2, 0, 0));
        assert_eq!(
            measured_relative_entropy(&mixed, &p0).unwrap(),
            f64::INFINITY
        );
    }

    #[test]
    fn exp_divided_difference_is_smooth() {
        let a = 0.3;
        for b in [0.3, 0.3 + 1e-10, 0.3 + 1e-6, 1.0] {
            let exact = if a == b {
                f64::exp(a)
            } else {
                (f64::exp(a) - f64::exp(b)) / (a - b)
            };
            assert!((exp_divided_difference(a, b) - exact).abs() < 1e-6 * exact);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let d = DimVector::new(vec![3]).unwrap();
        let rho = random_density(&d, 3, 1).unwrap();
        let sigma = random_density(&d, 3, 2).unwrap();
        let x0: Vec<f64> = (0..9).map(|i| 0.1 * (i as f64) - 0.3).collect();
        let h = unpack_hermitian(&x0, 3);
        let (_, g) = variational_value(rho.matrix(), sigma.matrix(), &h);
        let g = pack_hermitian(&g);
        let eps = 1e-6;
        for k in 0..9 {
            let mut xp = x0.clone();
            let mut xm = x0.clone();
            xp[k] += eps;
            xm[k] -= eps;
            let fp = variational_value(rho.matrix(), sigma.matrix(), &unpack_hermitian(&xp, 3)).0;
            let fm = variational_value(rho.matrix(), sigma.matrix(), &unpack_hermitian(&xm, 3)).0;
            assert!(((fp - fm) / (2.0 * eps) - g[k]).abs() < 1e-7);
        }
    }
}
