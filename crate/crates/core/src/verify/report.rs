use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::spectral::{GridSpec, BUMP_PROFILE_ID};

/// JSON has no NaN or infinities; `serde_json` writes them as `null`, and
/// these read `null` back as NaN so a report survives the round trip.
mod lenient {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer};

    pub fn float<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }

    pub fn floats<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Ok(Vec::<Option<f64>>::deserialize(d)?.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect())
    }

    pub fn float_map<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
        Ok(BTreeMap::<String, Option<f64>>::deserialize(d)?.into_iter().map(|(k, v)| (k, v.unwrap_or(f64::NAN))).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Inconclusive,
    Fail,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

/// One thresholded measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(deserialize_with = "lenient::float")]
    pub measured: f64,
    pub relation: Relation,
    #[serde(deserialize_with = "lenient::float")]
    pub threshold: f64,
    pub verdict: Verdict,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, threshold: f64) -> Check {
        let verdict = if measured <= threshold { Verdict::Pass } else { Verdict::Fail };
        Check { name: name.into(), measured, relation: Relation::AtMost, threshold, verdict }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, threshold: f64) -> Check {
        let verdict = if measured >= threshold { Verdict::Pass } else { Verdict::Fail };
        Check { name: name.into(), measured, relation: Relation::AtLeast, threshold, verdict }
    }

    /// A check whose precondition failed; it neither passes nor fails.
    pub fn inconclusive(mut self) -> Check {
        self.verdict = Verdict::Inconclusive;
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Least-squares line through `(log x, log y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub label: String,
    #[serde(deserialize_with = "lenient::float")]
    pub slope: f64,
    #[serde(deserialize_with = "lenient::float")]
    pub intercept: f64,
    #[serde(deserialize_with = "lenient::float")]
    pub r2: f64,
    /// `log10(max x / min x)`
    pub decades: f64,
    pub points: usize,
    /// Smallest and largest `x` that entered the fit.
    pub range: (f64, f64),
}

/// Fits needing a verdict must span at least this many decades with at least this `R^2`.
pub const MIN_DECADES: f64 = 2.0;
pub const MIN_R2: f64 = 0.98;

impl Fit {
    /// Power-law fit `y ~ C x^slope`; pairs with a nonpositive or non-finite
    /// coordinate are dropped, never imputed. `None` with fewer than two points.
    pub fn power_law(label: impl Into<String>, x: &[f64], y: &[f64]) -> Option<Fit> {
        let pts: Vec<(f64, f64)> = x
            .iter()
            .zip(y)
            .filter(|(a, b)| **a > 0.0 && **b > 0.0 && a.is_finite() && b.is_finite())
            .map(|(a, b)| (a.ln(), b.ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
        if sxx == 0.0 {
            return None;
        }
        let slope = sxy / sxx;
        let ss_res: f64 = pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
        let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
        let (lo, hi) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)));
        Some(Fit {
            label: label.into(),
            slope,
            intercept: my - slope * mx,
            r2,
            decades: (hi - lo) / std::f64::consts::LN_10,
            points: pts.len(),
            range: (lo.exp(), hi.exp()),
        })
    }

    /// Whether the fit is good enough to base a verdict on.
    pub fn is_clean(&self) -> bool {
        self.decades >= MIN_DECADES - 1e-9 && self.r2 >= MIN_R2
    }
}

/// A measured curve, kept for plotting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub label: String,
    #[serde(deserialize_with = "lenient::floats")]
    pub x: Vec<f64>,
    #[serde(deserialize_with = "lenient::floats")]
    pub y: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub grids: Vec<GridSpec>,
    pub bump: String,
    pub time_rule: String,
    pub spatial_rule: String,
    pub version: String,
}

impl Provenance {
    pub fn new(grids: Vec<GridSpec>) -> Provenance {
        Provenance {
            grids,
            bump: BUMP_PROFILE_ID.into(),
            time_rule: "composite-trapezoid".into(),
            spatial_rule: "grid-quadrature".into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub dims: Vec<usize>,
    pub seeds: Vec<u64>,
    #[serde(deserialize_with = "lenient::floats")]
    pub schedule: Vec<f64>,
    pub description: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub id: String,
    pub sweep: Sweep,
    #[serde(deserialize_with = "lenient::float_map")]
    pub values: BTreeMap<String, f64>,
    pub series: Vec<Series>,
    pub fits: Vec<Fit>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub verdict: Verdict,
    pub provenance: Provenance,
}

impl ExperimentReport {
    pub fn new(id: &str, sweep: Sweep, grids: Vec<GridSpec>) -> ExperimentReport {
        ExperimentReport {
            id: id.into(),
            sweep,
            values: BTreeMap::new(),
            series: Vec::new(),
            fits: Vec::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            verdict: Verdict::Pass,
            provenance: Provenance::new(grids),
        }
    }

    pub fn value(&mut self, key: impl Into<String>, v: f64) {
        self.values.insert(key.into(), v);
    }

    pub fn series(&mut self, label: impl Into<String>, x: Vec<f64>, y: Vec<f64>) {
        self.series.push(Series { label: label.into(), x, y });
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    /// Record a power-law fit. A fit over too few decades or with a poor
    /// `R^2` turns its checks inconclusive; a missing fit is inconclusive too.
    pub fn fit(&mut self, fit: Option<Fit>, label: &str) -> Option<Fit> {
        match fit {
            Some(f) => {
                self.check(Check::at_least(format!("{label}: R^2"), f.r2, MIN_R2));
                self.check(Check::at_least(format!("{label}: decades"), f.decades, MIN_DECADES - 1e-9));
                self.fits.push(f.clone());
                Some(f)
            }
            None => {
                self.check(Check::at_least(format!("{label}: fit points"), 0.0, 2.0).inconclusive());
                None
            }
        }
    }

    /// Worst verdict over all checks: fail beats inconclusive beats pass.
    pub fn finish(mut self) -> ExperimentReport {
        self.verdict = self.checks.iter().map(|c| c.verdict).max().unwrap_or(Verdict::Pass);
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed()).collect()
    }

    pub fn from_json(s: &str) -> Result<ExperimentReport> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_json(&self, mut w: impl Write) -> Result<()> {
        w.write_all(self.to_json()?.as_bytes())?;
        w.write_all(b"\n")?;
        Ok(())
    }
}

/// `max / min` of the positive finite entries; 0/0 ratios never enter.
pub fn spread(values: &[f64]) -> f64 {
    let (lo, hi) =
        values.iter().filter(|v| v.is_finite() && **v > 0.0).fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if hi == 0.0 {
        f64::NAN
    } else {
        hi / lo
    }
}

/// `a / b` with the 0/0 convention: reported as 0 and flagged for exclusion.
pub fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        a / b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_exact_power_laws() {
        let x: Vec<f64> = (0..7).map(|k| 10f64.powf(-0.5 * k as f64)).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v.powf(1.5)).collect();
        let f = Fit::power_law("p", &x, &y).unwrap();
        assert!((f.slope - 1.5).abs() < 1e-12);
        assert!((f.intercept.exp() - 3.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        assert!((f.decades - 3.0).abs() < 1e-12);
        assert!((f.range.1 - 1.0).abs() < 1e-15 && (f.range.0 - 1e-3).abs() < 1e-15);
        assert!(f.is_clean());
    }

    #[test]
    fn fit_drops_zeros_and_needs_two_points() {
        assert!(Fit::power_law("p", &[1.0, 2.0], &[0.0, 1.0]).is_none());
        let f = Fit::power_law("p", &[1.0, 2.0, 4.0], &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(f.points, 2);
        assert!(!f.is_clean());
    }

    #[test]
    fn verdict_is_the_worst_check() {
        let sweep = Sweep { dims: vec![3], seeds: vec![], schedule: vec![], description: String::new() };
        let mut r = ExperimentReport::new("t", sweep, vec![]);
        r.check(Check::at_most("a", 1.0, 2.0));
        assert_eq!(r.clone().finish().verdict, Verdict::Pass);
        r.check(Check::at_most("b", 1.0, 2.0).inconclusive());
        assert_eq!(r.clone().finish().verdict, Verdict::Inconclusive);
        r.check(Check::at_least("c", 1.0, 2.0));
        assert_eq!(r.finish().verdict, Verdict::Fail);
    }

    #[test]
    fn json_round_trip_keeps_non_finite_values_as_nan() {
        let sweep = Sweep { dims: vec![3], seeds: vec![1], schedule: vec![0.5], description: "d".into() };
        let mut r = ExperimentReport::new("t", sweep, vec![]);
        r.value("inf", f64::NEG_INFINITY);
        r.value("one", 1.0);
        r.series("s", vec![1.0, 2.0], vec![f64::NAN, 3.0]);
        r.check(Check::at_most("c", f64::NAN, 1.0).inconclusive());
        let r = r.finish();
        let back = ExperimentReport::from_json(&r.to_json().unwrap()).unwrap();
        assert!(back.values["inf"].is_nan());
        assert_eq!(back.values["one"], 1.0);
        assert!(back.series[0].y[0].is_nan());
        assert_eq!(back.verdict, Verdict::Inconclusive);
        assert_eq!(back.to_json().unwrap(), r.to_json().unwrap());
    }

    #[test]
    fn spread_ignores_zero_ratios() {
        assert_eq!(spread(&[0.0, 2.0, 4.0]), 2.0);
        assert!(spread(&[0.0]).is_nan());
        assert_eq!(ratio(0.0, 0.0), 0.0);
    }
}
