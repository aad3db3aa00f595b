//! Davidson iteration for the lowest eigenpair of a symmetric operator.
//!
//! The subspace grows by one diagonally preconditioned residual per
//! iteration, orthonormalized by modified Gram–Schmidt with one
//! re-orthogonalization pass, and collapses to the current Ritz vector when
//! it reaches `max_subspace`. The projected problem is solved by cyclic
//! Jacobi rotations. Only the operator application is parallel.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A symmetric linear operator.
pub trait Operator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Vec<f64>;
}

/// Denominators smaller than this are clamped in the preconditioner.
pub const PRECONDITION_FLOOR: f64 = 1e-8;

/// Post-projection norm (relative to the candidate) below which a
/// correction is treated as linearly dependent.
pub const DEPENDENCE_THRESHOLD: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub enum InitialGuess {
    /// Unit vector at the smallest diagonal entry, lowest index on ties.
    LowestDiagonal,
    Vector(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DavidsonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub max_subspace: usize,
    pub initial_guess: InitialGuess,
    /// Record `max |V^T V - I|` in every trace entry.
    pub track_orthonormality: bool,
}

impl Default for DavidsonOptions {
    fn default() -> Self {
        DavidsonOptions {
            tol: 1e-8,
            max_iter: 200,
            max_subspace: 20,
            initial_guess: InitialGuess::LowestDiagonal,
            track_orthonormality: true,
        }
    }
}

impl DavidsonOptions {
    fn validate(&self) -> Result<()> {
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_subspace < 2 {
            return Err(Error::Config(format!(
                "max_subspace must be at least 2, got {}",
                self.max_subspace
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// Wall time per Davidson phase, in seconds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub matvec: f64,
    pub orthogonalization: f64,
    pub subspace_solve: f64,
}

impl PhaseTimings {
    pub fn total(&self) -> f64 {
        self.matvec + self.orthogonalization + self.subspace_solve
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub ritz_value: f64,
    pub residual_norm: f64,
    pub subspace_size: usize,
    /// The subspace was collapsed just before this iteration.
    pub restarted: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub orthonormality_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timings: Option<PhaseTimings>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub iterations: Vec<IterationRecord>,
}

impl ConvergenceTrace {
    pub fn len(&self) -> usize {
        self.iterations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterations.is_empty()
    }

    /// Summed phase timings across iterations.
    pub fn total_timings(&self) -> PhaseTimings {
        self.iterations
            .iter()
            .filter_map(|r| r.timings)
            .fold(PhaseTimings::default(), |acc, t| PhaseTimings {
                matvec: acc.matvec + t.matvec,
                orthogonalization: acc.orthogonalization + t.orthogonalization,
                subspace_solve: acc.subspace_solve + t.subspace_solve,
            })
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub energy: f64,
    pub vector: Vec<f64>,
    pub trace: ConvergenceTrace,
}

/// State carried by a non-convergence error.
#[derive(Clone, Debug)]
pub struct Unconverged {
    pub energy: f64,
    pub residual_norm: f64,
    pub vector: Vec<f64>,
    pub trace: ConvergenceTrace,
}

/// Left-to-right dot product.
pub fn inner_product(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::input(format!(
            "inner product of vectors with lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    Ok(dot(x, y))
}

#[inline]
fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).fold(0.0, |acc, (a, b)| acc + a * b)
}

fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

fn scale(x: &mut [f64], s: f64) {
    x.iter_mut().for_each(|v| *v *= s);
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

/// Orthonormalizes `candidate` against the orthonormal set `basis`.
/// Returns `None` when the candidate is (numerically) in their span.
pub fn orthonormalize(basis: &[Vec<f64>], candidate: &[f64]) -> Option<Vec<f64>> {
    let n0 = norm(candidate);
    if !n0.is_finite() || n0 <= 0.0 {
        return None;
    }
    let mut v: Vec<f64> = candidate.iter().map(|c| c / n0).collect();
    for _pass in 0..2 {
        for b in basis {
            let proj = dot(b, &v);
            axpy(&mut v, -proj, b);
        }
    }
    let n1 = norm(&v);
    if n1 < DEPENDENCE_THRESHOLD {
        return None;
    }
    scale(&mut v, 1.0 / n1);
    Some(v)
}

/// Diagonal (Davidson) preconditioner `r_i / (d_i - theta)`.
pub fn precondition(residual: &[f64], diag: &[f64], theta: f64) -> Vec<f64> {
    residual
        .iter()
        .zip(diag)
        .map(|(r, d)| {
            let mut den = d - theta;
            if den.abs() < PRECONDITION_FLOOR {
                den = if den < 0.0 {
                    -PRECONDITION_FLOOR
                } else {
                    PRECONDITION_FLOOR
                };
            }
            r / den
        })
        .collect()
}

/// Eigenvalues and column eigenvectors of a small symmetric matrix.
#[allow(clippy::needless_range_loop)]
pub(crate) fn jacobi_eigen(m: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let scale: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * 1e-2 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let values = (0..n).map(|i| a[i][i]).collect();
    (values, v)
}

fn lowest_eigenpair(g: &[Vec<f64>]) -> (f64, Vec<f64>) {
    let (values, vectors) = jacobi_eigen(g);
    let mut best = 0;
    for (i, &e) in values.iter().enumerate() {
        if e < values[best] {
            best = i;
        }
    }
    let s = vectors.iter().map(|row| row[best]).collect();
    (values[best], s)
}

fn orthonormality_error(vs: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in vs.iter().enumerate() {
        for (j, b) in vs.iter().enumerate().skip(i) {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot(a, b) - target).abs());
        }
    }
    worst
}

fn initial_vector(diag: &[f64], guess: &InitialGuess) -> Result<Vec<f64>> {
    match guess {
        InitialGuess::LowestDiagonal => {
            let mut best = 0;
            for (i, &d) in diag.iter().enumerate() {
                if d < diag[best] {
                    best = i;
                }
            }
            let mut v = vec![0.0; diag.len()];
            v[best] = 1.0;
            Ok(v)
        }
        InitialGuess::Vector(v) => {
            if v.len() != diag.len() {
                return Err(Error::input(format!(
                    "initial guess has length {}, operator dimension is {}",
                    v.len(),
                    diag.len()
                )));
            }
            orthonormalize(&[], v).ok_or_else(|| Error::input("initial guess is zero or not finite"))
        }
    }
}

/// Lowest eigenpair of `op`, whose diagonal is `diag`.
pub fn davidson_solve<O: Operator + ?Sized>(op: &O, diag: &[f64], opts: &DavidsonOptions) -> Result<Solution> {
    opts.validate()?;
    let n = op.dim();
    if diag.len() != n {
        return Err(Error::input(format!(
            "diagonal has length {}, operator dimension is {n}",
            diag.len()
        )));
    }
    if n == 0 {
        return Err(Error::EmptyBasis("operator has dimension 0".into()));
    }
    if diag.iter().any(|d| !d.is_finite()) {
        return Err(Error::input("diagonal has non-finite entries"));
    }

    let v0 = initial_vector(diag, &opts.initial_guess)?;
    let mut timings = PhaseTimings::default();
    let clock = Instant::now();
    let w0 = op.apply(&v0);
    timings.matvec += clock.elapsed().as_secs_f64();
    let mut vs = vec![v0];
    let mut ws = vec![w0];
    let mut g = vec![vec![dot(&vs[0], &ws[0])]];
    let mut trace = ConvergenceTrace::default();
    let mut restarted = false;
    let mut last = (f64::NAN, f64::NAN, Vec::new());

    for iteration in 1..=opts.max_iter {
        let clock = Instant::now();
        let (theta, s) = lowest_eigenpair(&g);
        let mut u = vec![0.0; n];
        let mut hu = vec![0.0; n];
        for (k, &sk) in s.iter().enumerate() {
            axpy(&mut u, sk, &vs[k]);
            axpy(&mut hu, sk, &ws[k]);
        }
        let residual: Vec<f64> = hu.iter().zip(&u).map(|(h, x)| h - theta * x).collect();
        let rnorm = norm(&residual);
        timings.subspace_solve += clock.elapsed().as_secs_f64();

        trace.iterations.push(IterationRecord {
            iteration,
            ritz_value: theta,
            residual_norm: rnorm,
            subspace_size: vs.len(),
            restarted,
            orthonormality_error: opts.track_orthonormality.then(|| orthonormality_error(&vs)),
            timings: Some(timings),
        });
        timings = PhaseTimings::default();
        restarted = false;

        if !rnorm.is_finite() {
            return Err(Error::input("operator produced non-finite values"));
        }
        if rnorm <= opts.tol {
            return Ok(Solution {
                energy: theta,
                vector: u,
                trace,
            });
        }
        if iteration == opts.max_iter {
            last = (theta, rnorm, u);
            break;
        }

        let clock = Instant::now();
        if vs.len() >= opts.max_subspace {
            let un = norm(&u);
            scale(&mut u, 1.0 / un);
            scale(&mut hu, 1.0 / un);
            g = vec![vec![dot(&u, &hu)]];
            vs = vec![u.clone()];
            ws = vec![hu];
            restarted = true;
        }
        let correction = precondition(&residual, diag, theta);
        let Some(next) = orthonormalize(&vs, &correction).or_else(|| orthonormalize(&vs, &residual)) else {
            return Err(Error::Stagnation(Box::new(Unconverged {
                energy: theta,
                residual_norm: rnorm,
                vector: u,
                trace,
            })));
        };
        timings.orthogonalization += clock.elapsed().as_secs_f64();

        let clock = Instant::now();
        let w = op.apply(&next);
        timings.matvec += clock.elapsed().as_secs_f64();

        let clock = Instant::now();
        let row: Vec<f64> = vs.iter().map(|v| dot(v, &w)).chain([dot(&next, &w)]).collect();
        // symmetrize the projected matrix
        for (k, gk) in g.iter_mut().enumerate() {
            let sym = 0.5 * (row[k] + dot(&next, &ws[k]));
            gk.push(sym);
        }
        let mut new_row: Vec<f64> = g.iter().map(|gk| *gk.last().expect("row just extended")).collect();
        new_row.push(row[vs.len()]);
        g.push(new_row);
        vs.push(next);
        ws.push(w);
        timings.subspace_solve += clock.elapsed().as_secs_f64();
    }

    let (energy, residual_norm, vector) = last;
    Err(Error::NonConvergence(Box::new(Unconverged {
        energy,
        residual_norm,
        vector,
        trace,
    })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    struct Dense {
        n: usize,
        a: Vec<f64>,
    }

    impl Operator for Dense {
        fn dim(&self) -> usize {
            self.n
        }

        fn apply(&self, x: &[f64]) -> Vec<f64> {
            (0..self.n)
                .map(|i| dot(&self.a[i * self.n..(i + 1) * self.n], x))
                .collect()
        }
    }

    impl Dense {
        fn diag(&self) -> Vec<f64> {
            (0..self.n).map(|i| self.a[i * self.n + i]).collect()
        }
    }

    #[test]
    fn inner_product_examples() {
        assert_eq!(inner_product(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(inner_product(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(inner_product(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 11.0);
        assert!(matches!(inner_product(&[1.0], &[1.0, 2.0]), Err(Error::Input(_))));
    }

    #[test]
    fn orthonormalize_examples() {
        let basis = vec![vec![1.0, 0.0, 0.0]];
        assert_eq!(orthonormalize(&basis, &[0.0, 3.0, 4.0]).unwrap(), vec![0.0, 0.6, 0.8]);
        assert!(orthonormalize(&basis, &[1.0, 0.0, 0.0]).is_none());
        assert!(orthonormalize(&basis, &[0.0, 0.0, 0.0]).is_none());
    }

    #[test]
    fn precondition_examples() {
        assert_eq!(precondition(&[1.0], &[3.0], 1.0), vec![0.5]);
        assert_eq!(
            precondition(&[1.0], &[1.0 + 1e-12], 1.0),
            vec![1.0 / PRECONDITION_FLOOR]
        );
        assert_eq!(
            precondition(&[1.0], &[1.0 - 1e-12], 1.0),
            vec![-1.0 / PRECONDITION_FLOOR]
        );
        assert_eq!(precondition(&[0.0, 0.0], &[2.0, 5.0], 1.0), vec![0.0, 0.0]);
    }

    #[test]
    fn diagonal_operator() {
        let op = Dense {
            n: 3,
            a: vec![3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0],
        };
        let sol = davidson_solve(&op, &op.diag(), &DavidsonOptions::default()).unwrap();
        assert_eq!(sol.energy, 1.0);
        assert_eq!(sol.vector, vec![0.0, 1.0, 0.0]);
        assert!(sol.trace.len() <= 2);
    }

    #[test]
    fn two_by_two() {
        let op = Dense {
            n: 2,
            a: vec![2.0, 1.0, 1.0, 2.0],
        };
        let sol = davidson_solve(&op, &op.diag(), &DavidsonOptions::default()).unwrap();
        assert!((sol.energy - 1.0).abs() < 1e-14);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let sign = sol.vector[0].signum();
        assert!((sol.vector[0] * sign - r).abs() < 1e-12);
        assert!((sol.vector[1] * sign + r).abs() < 1e-12);
    }

    #[test]
    fn option_and_input_errors() {
        let op = Dense { n: 1, a: vec![1.0] };
        let bad = DavidsonOptions {
            max_subspace: 1,
            ..Default::default()
        };
        assert!(matches!(davidson_solve(&op, &[1.0], &bad), Err(Error::Config(_))));
        let bad = DavidsonOptions {
            tol: 0.0,
            ..Default::default()
        };
        assert!(matches!(davidson_solve(&op, &[1.0], &bad), Err(Error::Config(_))));
        assert!(matches!(
            davidson_solve(&op, &[1.0, 2.0], &DavidsonOptions::default()),
            Err(Error::Input(_))
        ));
        let zero_guess = DavidsonOptions {
            initial_guess: InitialGuess::Vector(vec![0.0]),
            ..Default::default()
        };
        assert!(davidson_solve(&op, &[1.0], &zero_guess).is_err());
    }

    fn random_symmetric(n: usize, vals: &[f64]) -> Dense {
        let mut a = vec![0.0; n * n];
        let mut it = vals.iter().cycle();
        for i in 0..n {
            a[i * n + i] = i as f64 + *it.next().unwrap();
            for j in 0..i {
                let v = 0.1 * it.next().unwrap();
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        Dense { n, a }
    }

    #[test]
    fn max_iter_reports_nonconvergence_with_trace() {
        let vals: Vec<f64> = (0..50).map(|i| ((i * 37) % 11) as f64 / 11.0).collect();
        let op = random_symmetric(30, &vals);
        let opts = DavidsonOptions {
            max_iter: 2,
            tol: 1e-14,
            ..Default::default()
        };
        match davidson_solve(&op, &op.diag(), &opts) {
            Err(Error::NonConvergence(u)) => {
                assert_eq!(u.trace.len(), 2);
                assert!(u.residual_norm > 1e-14);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn restart_keeps_converging() {
        let vals: Vec<f64> = (0..97).map(|i| ((i * 53) % 17) as f64 / 17.0 - 0.5).collect();
        let op = random_symmetric(60, &vals);
        let opts = DavidsonOptions {
            max_subspace: 4,
            tol: 1e-10,
            ..Default::default()
        };
        let sol = davidson_solve(&op, &op.diag(), &opts).unwrap();
        assert!(sol.trace.iterations.iter().any(|r| r.restarted));
        let hv = op.apply(&sol.vector);
        let res: f64 = hv
            .iter()
            .zip(&sol.vector)
            .map(|(h, v)| (h - sol.energy * v).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(res <= 1e-9, "{res}");
    }

    proptest! {
        #[test]
        fn orthonormalized_candidates_are_orthogonal(vals in prop::collection::vec(-1.0f64..1.0, 40)) {
            let n = 8;
            let mut basis: Vec<Vec<f64>> = Vec::new();
            for chunk in vals.chunks(n) {
                if let Some(v) = orthonormalize(&basis, chunk) {
                    for b in &basis {
                        prop_assert!(dot(b, &v).abs() <= 1e-12);
                    }
                    prop_assert!((norm(&v) - 1.0).abs() <= 1e-12);
                    basis.push(v);
                }
            }
        }

        #[test]
        fn jacobi_reconstructs_matrix(vals in prop::collection::vec(-1.0f64..1.0, 21)) {
            let n = 6;
            let mut m = vec![vec![0.0; n]; n];
            let mut it = vals.iter();
            #[allow(clippy::needless_range_loop)]
            for i in 0..n {
                for j in 0..=i {
                    let v = *it.next().unwrap();
                    m[i][j] = v;
                    m[j][i] = v;
                }
            }
            let (vals, vecs) = jacobi_eigen(&m);
            for i in 0..n {
                for j in 0..n {
                    let r: f64 = (0..n).map(|k| vecs[i][k] * vals[k] * vecs[j][k]).sum();
                    prop_assert!((r - m[i][j]).abs() < 1e-12);
                }
            }
        }
    }
}
