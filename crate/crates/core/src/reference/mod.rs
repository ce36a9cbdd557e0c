//! Ground truth independent of the collocation machinery: closed-form
//! statistics, stationary densities of 1D gradient systems, and a Monte
//! Carlo baseline.

mod analytic;
mod montecarlo;
mod stationary;

pub use analytic::{cir_stats, mixture_cumulants_random_damping, ou_random_damping_stats, ou_stats};
pub use montecarlo::{monte_carlo, McConfig, McResult};
pub use stationary::{stationary_cumulants_gradient, StationaryDensity};

/// 10-point Gauss-Legendre rule on `[-1, 1]`, tabulated.
const GL10_NODES: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL10_WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_3,
    0.219_086_362_515_982_0,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

/// `∫_a^b f` by the tabulated 10-point rule, for vector-valued `f`.
fn gl10<const N: usize>(f: &impl Fn(f64) -> [f64; N], a: f64, b: f64) -> [f64; N] {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mut out = [0.0; N];
    for (x, w) in GL10_NODES.iter().zip(GL10_WEIGHTS) {
        let (l, r) = (f(c - h * x), f(c + h * x));
        for k in 0..N {
            out[k] += w * h * (l[k] + r[k]);
        }
    }
    out
}

/// Composite rule on `panels` equal panels.
fn gl10_composite<const N: usize>(f: &impl Fn(f64) -> [f64; N], a: f64, b: f64, panels: usize) -> [f64; N] {
    let h = (b - a) / panels as f64;
    let mut out = [0.0; N];
    for i in 0..panels {
        let p = gl10(f, a + i as f64 * h, a + (i + 1) as f64 * h);
        for k in 0..N {
            out[k] += p[k];
        }
    }
    out
}

/// Interval bisection until each component's two-level difference is below
/// `abs_tol[k]`.
fn gl10_adaptive<const N: usize>(f: &impl Fn(f64) -> [f64; N], a: f64, b: f64, abs_tol: &[f64; N]) -> [f64; N] {
    fn rec<const N: usize>(
        f: &impl Fn(f64) -> [f64; N],
        a: f64,
        b: f64,
        whole: [f64; N],
        tol: &[f64; N],
        depth: u32,
    ) -> [f64; N] {
        let m = 0.5 * (a + b);
        let (l, r) = (gl10(f, a, m), gl10(f, m, b));
        let mut halves = [0.0; N];
        let mut done = true;
        for k in 0..N {
            halves[k] = l[k] + r[k];
            done &= (halves[k] - whole[k]).abs() <= tol[k];
        }
        if done || depth >= 40 {
            return halves;
        }
        let half_tol = tol.map(|t| 0.5 * t);
        let (l, r) = (rec(f, a, m, l, &half_tol, depth + 1), rec(f, m, b, r, &half_tol, depth + 1));
        let mut out = [0.0; N];
        for k in 0..N {
            out[k] = l[k] + r[k];
        }
        out
    }
    rec(f, a, b, gl10(f, a, b), abs_tol, 0)
}
