/// Cumulants `κ_1..κ_n` from raw moments `m_1..m_n` via
/// `κ_n = m_n − Σ_{j=1}^{n−1} C(n−1, j−1) κ_j m_{n−j}`.
pub fn cumulants_from_raw(raw: &[f64]) -> Vec<f64> {
    let n = raw.len();
    let m = |k: usize| if k == 0 { 1.0 } else { raw[k - 1] };
    let mut kappa = vec![0.0; n + 1];
    for order in 1..=n {
        let mut acc = m(order);
        let mut binom = 1.0; // C(order-1, j-1)
        for j in 1..order {
            acc -= binom * kappa[j] * m(order - j);
            binom = binom * (order - j) as f64 / j as f64;
        }
        kappa[order] = acc;
    }
    kappa.split_off(1)
}

pub fn cumulants_1d(raw: &[f64; 6]) -> [f64; 6] {
    let k = cumulants_from_raw(raw);
    [k[0], k[1], k[2], k[3], k[4], k[5]]
}
