use super::TrialRecord;
use crate::error::{Error, Result};
use crate::noise::NoiseModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LossField {
    Rmse,
    TwoInf,
    Avg,
    OpnormDev,
}

impl LossField {
    pub const ALL: [LossField; 4] = [LossField::Rmse, LossField::TwoInf, LossField::Avg, LossField::OpnormDev];

    pub fn get(&self, r: &TrialRecord) -> f64 {
        match self {
            LossField::Rmse => r.loss_rmse,
            LossField::TwoInf => r.loss_two_inf,
            LossField::Avg => r.loss_avg,
            LossField::OpnormDev => r.opnorm_dev,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            LossField::Rmse => "loss_rmse",
            LossField::TwoInf => "loss_two_inf",
            LossField::Avg => "loss_avg",
            LossField::OpnormDev => "opnorm_dev",
        }
    }
}

/// Selects records by their non-n coordinates; `None` matches anything.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Group {
    pub kappa: Option<f64>,
    pub sigma: Option<f64>,
    pub q: Option<f64>,
    pub model: Option<NoiseModel>,
}

impl Group {
    pub fn matches(&self, r: &TrialRecord) -> bool {
        self.kappa.is_none_or(|k| k == r.kappa)
            && self.sigma.is_none_or(|s| s == r.sigma)
            && self.q.is_none_or(|q| q == r.q)
            && self.model.is_none_or(|m| m == r.model)
    }

    /// One fully specified group per distinct (κ, σ, q, model), in order of
    /// first appearance.
    pub fn distinct(records: &[TrialRecord]) -> Vec<Group> {
        let mut out: Vec<Group> = Vec::new();
        for r in records {
            let g = Group {
                kappa: Some(r.kappa),
                sigma: Some(r.sigma),
                q: Some(r.q),
                model: Some(r.model),
            };
            if !out.contains(&g) {
                out.push(g);
            }
        }
        out
    }

    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if let Some(k) = self.kappa {
            parts.push(format!("κ={k}"));
        }
        if let Some(s) = self.sigma {
            parts.push(format!("σ={s}"));
        }
        if let Some(q) = self.q {
            parts.push(format!("q={q}"));
        }
        if let Some(m) = self.model {
            parts.push(m.tag().to_string());
        }
        if parts.is_empty() {
            "all".into()
        } else {
            parts.join(" ")
        }
    }
}

/// Least-squares line through `(log n, log median)` plus per-n quantiles.
#[derive(Clone, Debug, PartialEq)]
pub struct RateFit {
    pub field: LossField,
    pub group: Group,
    pub n: Vec<usize>,
    pub median: Vec<f64>,
    /// 10th percentile per n.
    pub band_lo: Vec<f64>,
    /// 90th percentile per n.
    pub band_hi: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `median / (σ·√(log n / n))`, or `median / √(log n / n)` when the
    /// group does not pin a positive σ.
    pub compensated: Vec<f64>,
    /// Slope of `log compensated` against `log n`.
    pub compensated_slope: f64,
}

impl RateFit {
    /// `max / min` of the compensated ratios.
    pub fn compensated_spread(&self) -> f64 {
        let max = self.compensated.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = self.compensated.iter().copied().fold(f64::INFINITY, f64::min);
        max / min
    }

    pub fn median_at(&self, n: usize) -> Option<f64> {
        self.n.iter().position(|&m| m == n).map(|i| self.median[i])
    }
}

/// Linear-interpolation percentile of unsorted data, `pct ∈ [0, 100]`.
pub fn percentile(values: &[f64], pct: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return f64::NAN;
    }
    let pos = (pct / 100.0).clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

fn ols(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    (slope, intercept, r2)
}

/// Fits `log median(field)` against `log n` over the successful records of
/// `group`. Needs at least three distinct n with positive medians.
pub fn fit_loglog_slope(records: &[TrialRecord], field: LossField, group: &Group) -> Result<RateFit> {
    let mut ns: Vec<usize> = records
        .iter()
        .filter(|r| r.is_ok() && group.matches(r))
        .map(|r| r.n)
        .collect();
    ns.sort_unstable();
    ns.dedup();

    let mut fit = RateFit {
        field,
        group: *group,
        n: Vec::new(),
        median: Vec::new(),
        band_lo: Vec::new(),
        band_hi: Vec::new(),
        slope: f64::NAN,
        intercept: f64::NAN,
        r_squared: f64::NAN,
        compensated: Vec::new(),
        compensated_slope: f64::NAN,
    };
    for n in ns {
        let values: Vec<f64> = records
            .iter()
            .filter(|r| r.n == n && r.is_ok() && group.matches(r))
            .map(|r| field.get(r))
            .filter(|v| v.is_finite())
            .collect();
        let median = percentile(&values, 50.0);
        if values.is_empty() || !(median > 0.0) {
            continue;
        }
        fit.n.push(n);
        fit.median.push(median);
        fit.band_lo.push(percentile(&values, 10.0));
        fit.band_hi.push(percentile(&values, 90.0));
    }
    if fit.n.len() < 3 {
        return Err(Error::InsufficientPoints {
            needed: 3,
            found: fit.n.len(),
        });
    }
    let logn: Vec<f64> = fit.n.iter().map(|&n| (n as f64).ln()).collect();
    let logm: Vec<f64> = fit.median.iter().map(|m| m.ln()).collect();
    (fit.slope, fit.intercept, fit.r_squared) = ols(&logn, &logm);

    let sigma = group.sigma.filter(|&s| s > 0.0).unwrap_or(1.0);
    fit.compensated = fit
        .n
        .iter()
        .zip(&fit.median)
        .map(|(&n, m)| {
            let nf = n as f64;
            m / (sigma * (nf.ln() / nf).sqrt())
        })
        .collect();
    let logc: Vec<f64> = fit.compensated.iter().map(|c| c.ln()).collect();
    fit.compensated_slope = ols(&logn, &logc).0;
    Ok(fit)
}
