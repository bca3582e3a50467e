use faer::Mat;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::{stream, Rng};
use crate::spectral::SpectralDecomposition;

/// Gap below which the integration aborts.
pub const GAP_FLOOR: f64 = 1e-8;
/// Steps are halved until `GAP_RESOLUTION · √(h/N)` fits in the smallest gap.
const GAP_RESOLUTION: f64 = 16.0;
/// Maximum number of step halvings when gaps get small.
const MAX_HALVINGS: u32 = 60;

/// Sampled trajectory of eigenvalues and eigenvector frames.
#[derive(Clone, Debug)]
pub struct EigenPath {
    pub times: Vec<f64>,
    pub eigenvalues: Vec<Vec<f64>>,
    pub frames: Vec<Mat<f64>>,
}

impl EigenPath {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_eigenvalues(&self) -> &[f64] {
        self.eigenvalues.last().expect("path has a snapshot")
    }

    pub fn last_frame(&self) -> &Mat<f64> {
        self.frames.last().expect("path has a snapshot")
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeeOptions {
    /// Keep every `record_every`-th step (the endpoint is always kept).
    pub record_every: usize,
    /// Flip all Brownian increments; pairs of runs with opposite signs are
    /// antithetic.
    pub antithetic: bool,
}

impl Default for SeeOptions {
    fn default() -> Self {
        SeeOptions { record_every: 1, antithetic: false }
    }
}

/// Euler–Maruyama path of Dyson Brownian motion and the eigenvector equation
/// started from `dec0`, up to time `t` with step `dt`. The step shrinks near
/// small gaps, and a step that would reorder eigenvalues is refined along a
/// Brownian bridge.
pub fn integrate_see(dec0: &SpectralDecomposition, t: f64, dt: f64, seed: u64) -> Result<EigenPath> {
    integrate_see_with(dec0, t, dt, &mut stream(seed, 0), SeeOptions::default())
}

pub fn integrate_see_with(
    dec0: &SpectralDecomposition,
    t: f64,
    dt: f64,
    rng: &mut Rng,
    opts: SeeOptions,
) -> Result<EigenPath> {
    if !(dt > 0.0) || !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("need dt > 0 and t >= 0, got dt = {dt}, t = {t}")));
    }
    let n = dec0.size();
    if dec0.min_gap() <= 10.0 * dt * n as f64 {
        log::warn!("initial min gap {:e} is not above 10·dt·N = {:e}", dec0.min_gap(), 10.0 * dt * n as f64);
    }
    let mut lambda = dec0.eigenvalues.clone();
    let mut frame = dec0.frame.clone();
    let mut path = EigenPath { times: vec![0.0], eigenvalues: vec![lambda.clone()], frames: vec![frame.clone()] };
    let mut s = 0.0;
    let mut steps = 0usize;
    while s < t {
        let mut h = dt.min(t - s);
        let gap = min_gap(&lambda);
        if gap < GAP_FLOOR {
            return Err(Error::EigenvalueCollision { gap, time: s });
        }
        let mut halvings = 0;
        while GAP_RESOLUTION * (h / n as f64).sqrt() > gap && halvings < MAX_HALVINGS {
            h *= 0.5;
            halvings += 1;
        }
        let sign = if opts.antithetic { -1.0 } else { 1.0 };
        let w = increments(n, h, sign, rng);
        step(&mut lambda, &mut frame, h, &w, sign, rng, 0);
        s += h;
        steps += 1;
        if steps % opts.record_every.max(1) == 0 || s >= t {
            path.times.push(s);
            path.eigenvalues.push(lambda.clone());
            path.frames.push(frame.clone());
        }
    }
    Ok(path)
}

fn min_gap(lambda: &[f64]) -> f64 {
    lambda.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

/// Symmetric matrix of Brownian increments over time `h`: off-diagonal
/// variance `h`, diagonal `2h`, row-major.
fn increments(n: usize, h: f64, sign: f64, rng: &mut Rng) -> Vec<f64> {
    let sh = h.sqrt();
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let g: f64 = StandardNormal.sample(rng);
            let v = sign * g * if i == j { std::f64::consts::SQRT_2 * sh } else { sh };
            w[i * n + j] = v;
            w[j * n + i] = v;
        }
    }
    w
}

/// Advance by `h` with the increment `w`. A step that would reorder the
/// eigenvalues is split in two halves, with the midpoint of the Brownian
/// path drawn from its bridge law, so the driving noise keeps its law.
fn step(lambda: &mut Vec<f64>, frame: &mut Mat<f64>, h: f64, w: &[f64], sign: f64, rng: &mut Rng, depth: u32) {
    let n = lambda.len();
    let (new_lambda, next) = euler(lambda, frame, h, w);
    let ordered = new_lambda.windows(2).all(|p| p[1] > p[0]);
    if !ordered && depth < MAX_HALVINGS {
        // W(h/2) = W(h)/2 + Z with Z of variance h/4 per unit of the full law.
        let z = increments(n, h / 4.0, sign, rng);
        let first: Vec<f64> = w.iter().zip(&z).map(|(a, b)| 0.5 * a + b).collect();
        let second: Vec<f64> = w.iter().zip(&first).map(|(a, b)| a - b).collect();
        step(lambda, frame, 0.5 * h, &first, sign, rng, depth + 1);
        step(lambda, frame, 0.5 * h, &second, sign, rng, depth + 1);
        return;
    }
    let (mut new_lambda, mut next) = (new_lambda, next);
    // Keep eigenvalues ascending; columns follow their eigenvalues.
    if !ordered {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&p, &q| new_lambda[p].total_cmp(&new_lambda[q]));
        next = Mat::from_fn(n, n, |r, c| next[(r, order[c])]);
        new_lambda = order.iter().map(|&o| new_lambda[o]).collect();
    }
    align_signs(frame, &mut next);
    *lambda = new_lambda;
    *frame = next;
}

/// One Euler–Maruyama step in the eigenbasis:
/// `dλ_i = W_ii/√N + N⁻¹ Σ_j h/(λ_i − λ_j)` and
/// `du_i = N^{-1/2} Σ_j W_ij u_j/(λ_i − λ_j) − (2N)⁻¹ Σ_j h u_i/(λ_i − λ_j)²`,
/// followed by reorthonormalization.
fn euler(lambda: &[f64], frame: &Mat<f64>, h: f64, w: &[f64]) -> (Vec<f64>, Mat<f64>) {
    let n = lambda.len();
    let nf = n as f64;
    // Column i of A holds the coefficients of du_i on the old frame.
    let mut a = Mat::<f64>::zeros(n, n);
    let mut new_lambda = lambda.to_vec();
    for i in 0..n {
        let mut drift = 0.0;
        let mut shrink = 0.0;
        for j in 0..n {
            if j == i {
                continue;
            }
            let d = lambda[i] - lambda[j];
            drift += 1.0 / d;
            shrink += 1.0 / (d * d);
            a[(j, i)] = w[i * n + j] / (nf.sqrt() * d);
        }
        a[(i, i)] = 1.0 - h * shrink / (2.0 * nf);
        new_lambda[i] = lambda[i] + w[i * n + i] / nf.sqrt() + h * drift / nf;
    }
    let mut next = frame * &a;
    orthonormalize(&mut next);
    (new_lambda, next)
}

/// Modified Gram–Schmidt, run twice for stability.
pub fn orthonormalize(m: &mut Mat<f64>) {
    let (rows, cols) = (m.nrows(), m.ncols());
    for _ in 0..2 {
        for k in 0..cols {
            for j in 0..k {
                let d: f64 = (0..rows).map(|r| m[(r, k)] * m[(r, j)]).sum();
                for r in 0..rows {
                    m[(r, k)] -= d * m[(r, j)];
                }
            }
            let norm = (0..rows).map(|r| m[(r, k)] * m[(r, k)]).sum::<f64>().sqrt();
            for r in 0..rows {
                m[(r, k)] /= norm;
            }
        }
    }
}

fn align_signs(previous: &Mat<f64>, current: &mut Mat<f64>) {
    for k in 0..current.ncols() {
        let d: f64 = (0..current.nrows()).map(|r| previous[(r, k)] * current[(r, k)]).sum();
        if d < 0.0 {
            for r in 0..current.nrows() {
                current[(r, k)] = -current[(r, k)];
            }
        }
    }
}

/// Reorder and sign-flip the columns of `current` to follow `previous`:
/// pairs are matched greedily by largest `|⟨prev_i, cur_j⟩|`, ties going to
/// the lowest index.
pub fn align_frames(previous: &Mat<f64>, current: &Mat<f64>) -> Mat<f64> {
    let n = current.ncols();
    let rows = current.nrows();
    let overlap = previous.transpose() * current;
    let mut pairs: Vec<(usize, usize, f64)> =
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| (i, j, overlap[(i, j)].abs())).collect();
    pairs.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    let mut target = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for (k, &(i, j, v)) in pairs.iter().enumerate() {
        if target[i] != usize::MAX || used[j] {
            continue;
        }
        if let Some(next) = pairs[k + 1..].iter().find(|p| target[p.0] == usize::MAX && !used[p.1] && (p.0 == i || p.1 == j)) {
            if (next.2 - v).abs() <= 1e-12 && v > 0.0 {
                log::debug!("ambiguous frame alignment for column {i}; taking lowest index");
            }
        }
        target[i] = j;
        used[j] = true;
    }
    Mat::from_fn(rows, n, |r, i| {
        let j = target[i];
        let s = if overlap[(i, j)] < 0.0 { -1.0 } else { 1.0 };
        s * current[(r, j)]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::sample_goe;
    use crate::spectral::eig_sym;

    #[test]
    fn zero_time_is_single_snapshot() {
        let dec = eig_sym(&sample_goe(6, 1).unwrap()).unwrap();
        let path = integrate_see(&dec, 0.0, 1e-3, 2).unwrap();
        assert_eq!(path.len(), 1);
        assert_eq!(path.last_eigenvalues(), dec.eigenvalues.as_slice());
    }

    /// Equispaced spectrum with spacing 0.4, so no gap nears the floor.
    fn spread(n: usize) -> SpectralDecomposition {
        SpectralDecomposition::diagonal(&(0..n).map(|k| 0.4 * (k as f64 - 0.5 * n as f64)).collect::<Vec<_>>())
    }

    #[test]
    fn frames_stay_orthonormal() {
        let dec = spread(20);
        let path = integrate_see(&dec, 0.1, 1e-4, 4).unwrap();
        for (k, f) in path.frames.iter().enumerate() {
            let g = f.transpose() * f;
            for i in 0..20 {
                for j in 0..20 {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((g[(i, j)] - e).abs() <= 1e-8);
                }
            }
            assert!(path.eigenvalues[k].windows(2).all(|w| w[0] <= w[1]));
            if k > 0 {
                let prev = &path.frames[k - 1];
                for i in 0..20 {
                    let d: f64 = (0..20).map(|r| prev[(r, i)] * f[(r, i)]).sum();
                    assert!(d > 0.0);
                }
            }
        }
    }

    #[test]
    fn align_identity_sign_and_swap() {
        let dec = eig_sym(&sample_goe(5, 8).unwrap()).unwrap();
        let prev = dec.frame.clone();
        let same = align_frames(&prev, &prev);
        assert_eq!(same, prev);
        let mut flipped = prev.clone();
        for r in 0..5 {
            flipped[(r, 2)] = -flipped[(r, 2)];
        }
        assert_eq!(align_frames(&prev, &flipped), prev);
        let swapped = Mat::from_fn(5, 5, |r, c| prev[(r, [1, 0, 2, 3, 4][c])]);
        assert_eq!(align_frames(&prev, &swapped), prev);
    }

    #[test]
    fn invalid_step_rejected() {
        let dec = eig_sym(&sample_goe(3, 1).unwrap()).unwrap();
        assert!(integrate_see(&dec, 1.0, 0.0, 0).is_err());
    }
}
