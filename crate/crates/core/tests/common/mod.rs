//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tripm::linalg::sym_norm2;
use tripm::{Matrix, ProblemOracle, Vector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller keeps the dependency list short.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| gaussian(rng))
}

pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let a = Matrix::from_fn(n, n, |_, _| gaussian(rng));
    (&a + a.transpose()) * 0.5
}

pub fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let a = Matrix::from_fn(n, n, |_, _| gaussian(rng));
    a.qr().q()
}

/// Uniform point in the ball of radius `r`, or on its sphere.
pub fn ball_point(rng: &mut ChaCha8Rng, n: usize, r: f64, on_sphere: bool) -> Vector {
    let mut d = gaussian_vec(rng, n);
    d /= d.norm();
    let rho = if on_sphere {
        r
    } else {
        r * rng.gen::<f64>().powf(1.0 / n as f64)
    };
    d * rho
}

pub fn model(h: &Matrix, g: &Vector, u: &Vector) -> f64 {
    0.5 * u.dot(&(h * u)) + g.dot(u)
}

fn project(u: Vector, r: f64) -> Vector {
    let n = u.norm();
    if n > r {
        u * (r / n)
    } else {
        u
    }
}

/// Brute-force trust-region minimum: dense random sampling of the ball and
/// its boundary, then projected-gradient polishing of the best candidates.
pub fn tr_brute_force(h: &Matrix, g: &Vector, r: f64, samples: usize, rng: &mut ChaCha8Rng) -> f64 {
    let n = g.len();
    let mut best: Vec<(f64, Vector)> = Vec::new();
    let keep = 6;
    for k in 0..samples {
        let u = ball_point(rng, n, r, k % 2 == 0);
        let val = model(h, g, &u);
        if best.len() < keep || val < best[keep - 1].0 {
            best.push((val, u));
            best.sort_by(|a, b| a.0.total_cmp(&b.0));
            best.truncate(keep);
        }
    }
    best.push((0.0, Vector::zeros(n)));
    let step = 1.0 / sym_norm2(h).max(1e-12);
    let mut out = f64::INFINITY;
    for (_, mut u) in best {
        for _ in 0..4000 {
            let grad = h * &u + g;
            u = project(&u - grad * step, r);
        }
        out = out.min(model(h, g, &u));
    }
    out
}

/// Minimizes `fun` (None outside its domain) by a grid over the box
/// `[lo, hi]^n` followed by backtracking gradient polishing of the best
/// grid points.
pub fn brute_min(
    fun: &dyn Fn(&Vector) -> Option<f64>,
    grad: &dyn Fn(&Vector) -> Vector,
    lo: &[f64],
    hi: &[f64],
    per_axis: usize,
) -> (f64, Vector) {
    let n = lo.len();
    let mut best: Vec<(f64, Vector)> = Vec::new();
    let total = per_axis.pow(n as u32);
    for idx in 0..total {
        let mut rem = idx;
        let x = Vector::from_fn(n, |i, _| {
            let k = rem % per_axis;
            rem /= per_axis;
            lo[i] + (hi[i] - lo[i]) * (k as f64 + 0.5) / per_axis as f64
        });
        if let Some(v) = fun(&x) {
            best.push((v, x));
        }
    }
    best.sort_by(|a, b| a.0.total_cmp(&b.0));
    best.truncate(5);
    let mut out = (f64::INFINITY, Vector::zeros(n));
    for (mut val, mut x) in best {
        let mut t = 1e-2;
        for _ in 0..20000 {
            let g = grad(&x);
            if g.norm() < 1e-13 {
                break;
            }
            let mut moved = false;
            while t > 1e-18 {
                let cand = &x - &g * t;
                if let Some(v) = fun(&cand) {
                    if v < val - 1e-4 * t * g.norm_squared() {
                        x = cand;
                        val = v;
                        moved = true;
                        t *= 2.0;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !moved {
                break;
            }
        }
        if val < out.0 {
            out = (val, x);
        }
    }
    out
}

/// `inf psi_mu` by brute force over the box `[lo, hi]^n`.
pub fn psi_star(p: &dyn ProblemOracle, mu: f64, lo: &[f64], hi: &[f64]) -> f64 {
    let fun = |x: &Vector| tripm::barrier::barrier_value(p, mu, x);
    let grad = |x: &Vector| tripm::barrier_eval(p, mu, x).unwrap().grad;
    brute_min(&fun, &grad, lo, hi, 200).0
}

/// Analytic barrier minimizer of lp1d: root in (0, 2) of
/// `x^2 - (2 + 2 mu) x + 2 mu = 0`.
pub fn lp1d_center(mu: f64) -> f64 {
    let b = 2.0 + 2.0 * mu;
    // Stable form of the smaller root.
    4.0 * mu / (b + (b * b - 8.0 * mu).sqrt())
}

/// Strictly feasible random point of a builtin problem with every slack at
/// least `margin`.
pub fn feasible_point(
    name: &str,
    rng: &mut ChaCha8Rng,
    p: &dyn ProblemOracle,
    margin: f64,
) -> Vector {
    loop {
        let x = match name {
            "lp1d" => Vector::from_element(1, rng.gen_range(0.0..2.0)),
            "box_qp_nonconvex" => Vector::from_fn(p.n(), |_, _| rng.gen_range(-1.0..1.0)),
            "annulus" => {
                let rho: f64 = rng.gen_range(1.0..2.0);
                let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                Vector::from_vec(vec![rho * th.cos(), rho * th.sin()])
            }
            "circle_lp_convex" => ball_point(rng, 2, 1.0, false),
            other => panic!("no feasible sampler for {other}"),
        };
        if p.a(&x).iter().all(|a| *a >= margin) {
            return x;
        }
    }
}
