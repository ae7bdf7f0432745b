//! Rate-distortion machinery for the misidentification distortion
//! `d(y,u) = 1 - Q(y|u)` induced by a decoder channel.
//!
//! Points on R(D) are computed by slope-parameterized alternating
//! minimization (Blahut-Arimoto at a fixed Lagrange multiplier), curves by a
//! slope sweep, and the distortion-rate inverse by bisection on a monotone
//! piecewise-linear interpolation of the sampled curve.

use crate::prob::{Channel, Pmf, ProbError};
use thiserror::Error;

/// Slope used to approximate the zero-distortion end of the curve. With the
/// row-max shift in the solver, exp(slope * gap) underflows for any
/// distortion gap above ~1e-2, which pins the iterate to the minimizers.
const STEEP_SLOPE: f64 = -1.0e4;

/// Iteration budget for curve sampling. The fixed point converges linearly
/// and can crawl near the zero-rate corner of flat problems; random
/// small-alphabet instances have all been observed to finish well inside
/// this budget.
const CURVE_MAX_ITER: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum RdError {
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error("slope must be <= 0, got {0}")]
    PositiveSlope(f64),
    #[error("tolerance must be > 0, got {0}")]
    BadTolerance(f64),
    #[error("need at least 2 curve points, got {0}")]
    TooFewPoints(usize),
    #[error("no convergence after {iterations} iterations (last D={last_distortion}, R={last_rate})")]
    NonConvergence {
        iterations: usize,
        last_distortion: f64,
        last_rate: f64,
    },
    #[error("rate {rate} outside the open interval ({lo}, {hi}) of the sampled curve")]
    RateOutsideCurve { rate: f64, lo: f64, hi: f64 },
    #[error("step must be > 0, got {0}")]
    BadStep(f64),
    #[error("curve is degenerate (constant distortion); derivative undefined")]
    DegenerateCurve,
}

/// Source pmf plus the decoder channel defining the distortion.
#[derive(Debug, Clone)]
pub struct RdProblem {
    py: Pmf,
    decoder: Channel,
    /// distortion[y][u] = 1 - decoder(y|u)
    distortion: Vec<Vec<f64>>,
}

impl RdProblem {
    /// `decoder` maps representation symbols to source symbols; its output
    /// alphabet must match `py`'s.
    pub fn new(py: Pmf, decoder: Channel) -> Result<Self, RdError> {
        if decoder.to_alphabet() != py.alphabet() {
            return Err(RdError::Prob(ProbError::AlphabetMismatch(
                "decoder output alphabet must match the source alphabet".into(),
            )));
        }
        let ny = py.len();
        let nu = decoder.from_alphabet().size();
        let mut distortion = vec![vec![0.0; nu]; ny];
        for y in 0..ny {
            for u in 0..nu {
                distortion[y][u] = 1.0 - decoder.prob(u, y);
            }
        }
        Ok(Self {
            py,
            decoder,
            distortion,
        })
    }

    pub fn py(&self) -> &Pmf {
        &self.py
    }

    pub fn decoder(&self) -> &Channel {
        &self.decoder
    }

    pub fn distortion(&self, y: usize, u: usize) -> f64 {
        self.distortion[y][u]
    }

    fn num_reproducers(&self) -> usize {
        self.decoder.from_alphabet().size()
    }
}

/// A single (D, R) point with the slope that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdPoint {
    pub distortion: f64,
    pub rate: f64,
    pub slope: f64,
}

/// Extreme values of the rate-distortion function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdExtremes {
    pub d_min: f64,
    pub d_max: f64,
    pub r_max: f64,
    pub r_min: f64,
}

/// Sampled rate-distortion curve, sorted by distortion ascending.
#[derive(Debug, Clone)]
pub struct RdCurve {
    points: Vec<RdPoint>,
    extremes: RdExtremes,
}

impl RdCurve {
    pub fn points(&self) -> &[RdPoint] {
        &self.points
    }

    pub fn extremes(&self) -> RdExtremes {
        self.extremes
    }

    pub fn is_degenerate(&self) -> bool {
        self.points.len() == 1
    }

    /// CSV export with mandatory header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("D,R,slope\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{}\n", p.distortion, p.rate, p.slope));
        }
        out
    }
}

/// Smallest achievable expected distortion, the zero-rate distortion, and
/// the rates at both ends.
pub fn rd_extremes(prob: &RdProblem) -> RdExtremes {
    let py = prob.py();
    let nu = prob.num_reproducers();
    let d_min: f64 = py
        .probs()
        .iter()
        .enumerate()
        .map(|(y, &p)| {
            let best = (0..nu)
                .map(|u| prob.distortion(y, u))
                .fold(f64::INFINITY, f64::min);
            p * best
        })
        .sum();
    let d_max = (0..nu)
        .map(|u| {
            py.probs()
                .iter()
                .enumerate()
                .map(|(y, &p)| p * prob.distortion(y, u))
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min);
    // Zero rate is always achievable at d_max with a constant reproducer.
    let r_min = 0.0;
    let r_max = if d_max - d_min < 1e-12 {
        0.0
    } else {
        blahut_arimoto_point(prob, STEEP_SLOPE, 1e-12, CURVE_MAX_ITER)
            .map(|p| p.rate)
            .unwrap_or(0.0)
    };
    RdExtremes {
        d_min,
        d_max,
        r_max,
        r_min,
    }
}

/// One alternating-minimization solve at a fixed Lagrange slope. Returns a
/// point on the lower convex envelope of R(D).
pub fn blahut_arimoto_point(
    prob: &RdProblem,
    slope: f64,
    tol: f64,
    max_iter: usize,
) -> Result<RdPoint, RdError> {
    if slope > 0.0 {
        return Err(RdError::PositiveSlope(slope));
    }
    if !(tol > 0.0) {
        return Err(RdError::BadTolerance(tol));
    }
    let py = prob.py().probs();
    let ny = py.len();
    let nu = prob.num_reproducers();

    // The exact slope-0 limit: zero rate at the best constant reproducer.
    if slope == 0.0 {
        let ex = zero_rate_point(prob);
        return Ok(RdPoint {
            distortion: ex,
            rate: 0.0,
            slope,
        });
    }

    let mut q = vec![1.0 / nu as f64; nu];
    let mut test = vec![vec![0.0; nu]; ny];
    let mut last_rate = f64::INFINITY;
    for iter in 0..max_iter {
        // Test-channel refresh: rows proportional to q(u) exp(slope d(y,u)),
        // shifted by the row minimum distortion for stability.
        for y in 0..ny {
            let shift = (0..nu)
                .filter(|&u| q[u] > 0.0)
                .map(|u| prob.distortion(y, u))
                .fold(f64::INFINITY, f64::min);
            let mut mass = 0.0;
            for u in 0..nu {
                let w = if q[u] > 0.0 {
                    q[u] * (slope * (prob.distortion(y, u) - shift)).exp()
                } else {
                    0.0
                };
                test[y][u] = w;
                mass += w;
            }
            for v in test[y].iter_mut() {
                *v /= mass;
            }
        }
        // Reproduction-marginal refresh.
        let mut q_new = vec![0.0; nu];
        for y in 0..ny {
            for u in 0..nu {
                q_new[u] += py[y] * test[y][u];
            }
        }
        let mut rate = 0.0;
        let mut distortion = 0.0;
        for y in 0..ny {
            for u in 0..nu {
                let j = py[y] * test[y][u];
                if j > 0.0 {
                    rate += j * (test[y][u] / q_new[u]).ln();
                    distortion += j * prob.distortion(y, u);
                }
            }
        }
        let rate = rate.max(0.0);
        q = q_new;
        if (rate - last_rate).abs() < tol {
            return Ok(RdPoint {
                distortion,
                rate,
                slope,
            });
        }
        last_rate = rate;
        if iter == max_iter - 1 {
            return Err(RdError::NonConvergence {
                iterations: max_iter,
                last_distortion: distortion,
                last_rate: rate,
            });
        }
    }
    unreachable!("loop either converges or errors on the last iteration")
}

fn zero_rate_point(prob: &RdProblem) -> f64 {
    let py = prob.py().probs();
    (0..prob.num_reproducers())
        .map(|u| {
            py.iter()
                .enumerate()
                .map(|(y, &p)| p * prob.distortion(y, u))
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Sample the curve at `num_points` distortion targets spaced evenly over
/// `[D_min, D_max]`, each solved at a fixed slope located by bisection.
pub fn rd_curve(prob: &RdProblem, num_points: usize) -> Result<RdCurve, RdError> {
    if num_points < 2 {
        return Err(RdError::TooFewPoints(num_points));
    }
    let extremes = rd_extremes(prob);
    if extremes.d_max - extremes.d_min < 1e-12 {
        // Constant distortion: single-point curve, inverse identically D.
        return Ok(RdCurve {
            points: vec![RdPoint {
                distortion: extremes.d_min,
                rate: 0.0,
                slope: 0.0,
            }],
            extremes,
        });
    }
    let tol = 1e-10;
    let max_iter = CURVE_MAX_ITER;
    let mut points = Vec::with_capacity(num_points);
    points.push(blahut_arimoto_point(prob, STEEP_SLOPE, tol, max_iter)?);
    for k in 1..num_points - 1 {
        let target = extremes.d_min
            + (extremes.d_max - extremes.d_min) * k as f64 / (num_points - 1) as f64;
        // D(slope) is non-decreasing as slope rises toward 0.
        let mut lo = STEEP_SLOPE;
        let mut hi = 0.0;
        let mut best = None;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let pt = blahut_arimoto_point(prob, mid, tol, max_iter)?;
            best = Some(pt);
            if (pt.distortion - target).abs() < 1e-9 {
                break;
            }
            if pt.distortion < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        points.push(best.expect("bisection always evaluates at least once"));
    }
    points.push(RdPoint {
        distortion: extremes.d_max,
        rate: 0.0,
        slope: 0.0,
    });

    points.sort_by(|a, b| a.distortion.total_cmp(&b.distortion));
    points.dedup_by(|a, b| (a.distortion - b.distortion).abs() < 1e-12);
    // Solver noise can leave sub-tolerance monotonicity violations; pin the
    // rates to a non-increasing staircase.
    let mut running = f64::INFINITY;
    for p in points.iter_mut() {
        running = running.min(p.rate);
        p.rate = running;
    }
    Ok(RdCurve { points, extremes })
}

/// R(D) on the sampled curve via monotone piecewise-linear interpolation.
fn interpolate_rate(curve: &RdCurve, d: f64) -> f64 {
    let pts = curve.points();
    if d <= pts[0].distortion {
        return pts[0].rate;
    }
    if d >= pts[pts.len() - 1].distortion {
        return pts[pts.len() - 1].rate;
    }
    for w in pts.windows(2) {
        if d <= w[1].distortion {
            let span = w[1].distortion - w[0].distortion;
            if span <= 0.0 {
                return w[1].rate;
            }
            let t = (d - w[0].distortion) / span;
            return w[0].rate + t * (w[1].rate - w[0].rate);
        }
    }
    pts[pts.len() - 1].rate
}

/// Distortion-rate inverse: the smallest D with R(D) <= rate, found by
/// bisection on the interpolated curve to 1e-9 in D.
pub fn distortion_rate_inverse(curve: &RdCurve, rate: f64) -> f64 {
    let ex = curve.extremes();
    if curve.is_degenerate() {
        return ex.d_min;
    }
    if rate >= ex.r_max {
        return ex.d_min;
    }
    if rate <= 0.0 {
        return ex.d_max;
    }
    let mut lo = ex.d_min;
    let mut hi = ex.d_max;
    for _ in 0..80 {
        if hi - lo < 1e-9 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if interpolate_rate(curve, mid) <= rate {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Central finite difference of the distortion-rate inverse at `rate`.
/// The result is non-positive up to interpolation noise.
pub fn rd_inverse_derivative(curve: &RdCurve, rate: f64, step: f64) -> Result<f64, RdError> {
    if !(step > 0.0) {
        return Err(RdError::BadStep(step));
    }
    if curve.is_degenerate() {
        return Err(RdError::DegenerateCurve);
    }
    let ex = curve.extremes();
    if !(rate > ex.r_min && rate < ex.r_max) {
        return Err(RdError::RateOutsideCurve {
            rate,
            lo: ex.r_min,
            hi: ex.r_max,
        });
    }
    let fwd = distortion_rate_inverse(curve, rate + step);
    let bwd = distortion_rate_inverse(curve, rate - step);
    Ok((fwd - bwd) / (2.0 * step))
}
