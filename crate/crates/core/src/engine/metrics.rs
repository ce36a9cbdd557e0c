use super::run::StatSeries;

/// Pointwise relative errors `|(x − x_ref)/x_ref|`; entries whose reference
/// is zero use the absolute error and set the matching flag.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSeries {
    pub times: Vec<f64>,
    pub mean: Vec<Vec<f64>>,
    pub variance: Vec<Vec<f64>>,
    pub absolute_mean: Vec<bool>,
    pub absolute_variance: Vec<bool>,
}

impl ErrorSeries {
    pub fn terminal_mean(&self) -> &[f64] {
        self.mean.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn terminal_variance(&self) -> &[f64] {
        self.variance.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

const ZERO_REFERENCE: f64 = 1e-14;

fn pointwise(x: f64, r: f64, flag: &mut bool) -> f64 {
    if r.abs() <= ZERO_REFERENCE {
        *flag = true;
        (x - r).abs()
    } else {
        ((x - r) / r).abs()
    }
}

pub fn error_series(series: &StatSeries, reference: impl Fn(f64) -> (Vec<f64>, Vec<f64>)) -> ErrorSeries {
    let d = series.dim;
    let mut out = ErrorSeries {
        times: series.times.clone(),
        mean: Vec::with_capacity(series.times.len()),
        variance: Vec::with_capacity(series.times.len()),
        absolute_mean: vec![false; d],
        absolute_variance: vec![false; d],
    };
    for (i, &t) in series.times.iter().enumerate() {
        let (rm, rv) = reference(t);
        let em = (0..d).map(|k| pointwise(series.mean[i][k], rm[k], &mut out.absolute_mean[k])).collect();
        let ev = (0..d).map(|k| pointwise(series.variance[i][k], rv[k], &mut out.absolute_variance[k])).collect();
        out.mean.push(em);
        out.variance.push(ev);
    }
    out
}
