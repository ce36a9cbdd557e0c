use dsgc::driver::Preset;
use dsgc::dynamics::SdeModel;
use dsgc::engine::{run, InitialSpec, Marginal, RunConfig};

/// Mean and variance of `u(t)` for the random-damping OU model started from
/// `N(m0, v0)` with `b ~ U(lo, hi)`, by Simpson's rule over `b`.
fn random_damping_exact(mu: f64, sigma: f64, m0: f64, v0: f64, lo: f64, hi: f64, t: f64) -> (f64, f64) {
    let panels = 2000;
    let h = (hi - lo) / panels as f64;
    let (mut e1, mut e2) = (0.0, 0.0);
    for i in 0..=panels {
        let b = lo + i as f64 * h;
        let w = if i == 0 || i == panels {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let decay = (-b * t).exp();
        let m = mu + (m0 - mu) * decay;
        let v = v0 * decay * decay + sigma * sigma * (1.0 - decay * decay) / (2.0 * b);
        e1 += w * m;
        e2 += w * (v + m * m);
    }
    let scale = h / 3.0 / (hi - lo);
    let mean = e1 * scale;
    (mean, e2 * scale - mean * mean)
}

/// Recorded times that fall on a restart; in between, the truncated forcing
/// only approximates the Brownian increments.
fn restart_times(times: &[f64], dt: f64) -> impl Iterator<Item = (usize, &f64)> {
    times.iter().enumerate().filter(move |(_, &t)| ((t / dt) - (t / dt).round()).abs() < 1e-9)
}

#[test]
fn restart_refinement_converges_at_least_like_dt_to_three_halves() {
    let base = Preset::Ex1OuRandomDamping.experiment().run;
    let (mean, var) = random_damping_exact(0.2, 4.0, 1.0, 0.04, 1.0, 3.0, base.t_final);
    let mut errs = Vec::new();
    for dt in [0.4, 0.2, 0.1, 0.05] {
        let mut c = base.clone();
        c.delta_t = dt;
        let s = run(&c).unwrap();
        let e = ((s.terminal_mean()[0] - mean) / mean).abs() + ((s.terminal_variance()[0] - var) / var).abs();
        errs.push(e);
    }
    let order = (errs[0] / errs[3]).log2() / 3.0;
    assert!(order >= 1.5, "observed order {order:.2} from errors {errs:?}");
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}

#[test]
fn ou_run_matches_closed_form() {
    let (b, mu, sigma) = (1.5, 0.3, 0.8);
    let model = SdeModel::ou(b, mu, sigma).unwrap();
    let init = InitialSpec::product(vec![Marginal::Normal { mean: 1.0, var: 0.09 }], vec![4]).unwrap();
    let mut c = RunConfig::new(model, init);
    c.t_final = 3.0;
    c.delta_t = 0.1;
    c.degree = 4;
    c.forcing_level = 3;
    let s = run(&c).unwrap();
    for (i, &t) in restart_times(&s.times, c.delta_t) {
        let decay = (-b * t).exp();
        let m = mu + (1.0 - mu) * decay;
        let v = 0.09 * decay * decay + sigma * sigma * (1.0 - decay * decay) / (2.0 * b);
        assert!(((s.mean[i][0] - m) / m).abs() <= 1e-3, "t={t}: mean {} vs {m}", s.mean[i][0]);
        assert!(((s.variance[i][0] - v) / v).abs() <= 1e-3, "t={t}: variance {} vs {v}", s.variance[i][0]);
    }
}

#[test]
fn decoupled_drivers_leave_v_an_ou_process() {
    let (b_v, s_v) = (0.5, 0.5);
    let model = SdeModel::intermittent2d(0.0, 1.2, b_v, 0.5, s_v).unwrap();
    let init = InitialSpec::product(vec![Marginal::Point(1.0), Marginal::Point(0.0)], vec![1, 1]).unwrap();
    let mut c = RunConfig::new(model, init);
    c.t_final = 2.0;
    c.delta_t = 0.05;
    c.modes = 2;
    c.forcing_product = true;
    c.degree = 3;
    let s = run(&c).unwrap();
    for (i, &t) in restart_times(&s.times, c.delta_t).skip(1) {
        let v = s_v * s_v * (1.0 - (-2.0 * b_v * t).exp()) / (2.0 * b_v);
        assert!(((s.variance[i][1] - v) / v).abs() <= 1e-3, "t={t}: {} vs {v}", s.variance[i][1]);
        let u = 0.25 * (1.0 - (-2.4 * t).exp()) / 2.4;
        assert!(((s.variance[i][0] - u) / u).abs() <= 1e-3, "t={t}: {} vs {u}", s.variance[i][0]);
    }
}
