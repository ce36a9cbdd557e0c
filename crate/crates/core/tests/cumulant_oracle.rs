use dsgc::momentlab::cumulants_1d;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Taylor coefficients of `log M(t)` for `M(t) = Σ m_n tⁿ/n!`, times `n!`.
fn log_mgf_cumulants(raw: &[BigRational]) -> Vec<BigRational> {
    let n = raw.len();
    let mut fact = vec![BigRational::one(); n + 1];
    for k in 1..=n {
        fact[k] = &fact[k - 1] * rat(k as i64, 1);
    }
    let mut a = vec![BigRational::one(); n + 1];
    for k in 1..=n {
        a[k] = &raw[k - 1] / &fact[k];
    }
    // L' M = M'  ⇒  k·l_k = k·a_k − Σ_{j<k} j·l_j·a_{k−j}
    let mut l = vec![BigRational::zero(); n + 1];
    for k in 1..=n {
        let mut acc = rat(k as i64, 1) * &a[k];
        for j in 1..k {
            acc -= rat(j as i64, 1) * &l[j] * &a[k - j];
        }
        l[k] = acc / rat(k as i64, 1);
    }
    (1..=n).map(|k| &l[k] * &fact[k]).collect()
}

#[test]
fn recursion_matches_exact_log_mgf_on_discrete_laws() {
    let mut rng = ChaCha8Rng::seed_from_u64(20240611);
    for _ in 0..20 {
        let atoms = rng.random_range(2..=5);
        let raw_w: Vec<i64> = (0..atoms).map(|_| rng.random_range(1..=9)).collect();
        let total: i64 = raw_w.iter().sum();
        let xs: Vec<BigRational> = (0..atoms).map(|_| rat(rng.random_range(-30..=30), 10)).collect();
        let mut raw = vec![BigRational::zero(); 6];
        for (x, &w) in xs.iter().zip(&raw_w) {
            let mut p = BigRational::one();
            for m in raw.iter_mut() {
                p = &p * x;
                *m += &p * rat(w, total);
            }
        }
        let exact = log_mgf_cumulants(&raw);
        let as_f64: Vec<f64> = raw.iter().map(|r| r.to_f64().unwrap()).collect();
        let arr: [f64; 6] = as_f64.clone().try_into().unwrap();
        let got = cumulants_1d(&arr);
        let scale = as_f64.iter().enumerate().map(|(i, m)| m.abs().powf(1.0 / (i + 1) as f64)).fold(1.0, f64::max);
        for (n, (g, e)) in got.iter().zip(&exact).enumerate() {
            let e = e.to_f64().unwrap();
            let tol = 1e-10 * e.abs().max(scale.powi(n as i32 + 1));
            assert!((g - e).abs() <= tol, "order {}: {g} vs {e}", n + 1);
        }
    }
}
