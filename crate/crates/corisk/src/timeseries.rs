//! Daily negativity series, calendar smoothing, and lead-lag
//! cross-correlation against the market series.
//!
//! Lag convention: a positive lag means the SECOND series lags the first,
//! i.e. pairs are (a[t], b[t + lag]). A negative best lag therefore means
//! the second series leads.

use std::collections::BTreeMap;

use chrono::{Duration, NaiveDate};

use crate::error::{Error, Result};
use crate::sentiment::NegativityScore;

/// A date-indexed series with strictly increasing dates and finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    points: BTreeMap<NaiveDate, f64>,
}

impl Series {
    pub fn new(name: impl Into<String>) -> Series {
        Series {
            name: name.into(),
            points: BTreeMap::new(),
        }
    }

    pub fn from_pairs(
        name: impl Into<String>,
        pairs: impl IntoIterator<Item = (NaiveDate, f64)>,
    ) -> Result<Series> {
        let mut series = Series::new(name);
        for (date, value) in pairs {
            series.insert(date, value)?;
        }
        Ok(series)
    }

    pub fn insert(&mut self, date: NaiveDate, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::data(format!(
                "series {}: non-finite value at {date}",
                self.name
            )));
        }
        if self.points.insert(date, value).is_some() {
            return Err(Error::data(format!(
                "series {}: duplicate date {date}",
                self.name
            )));
        }
        Ok(())
    }

    pub fn get(&self, date: NaiveDate) -> Option<f64> {
        self.points.get(&date).copied()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// (date, value) pairs in date order.
    pub fn iter(&self) -> impl Iterator<Item = (NaiveDate, f64)> + '_ {
        self.points.iter().map(|(&d, &v)| (d, v))
    }
}

/// How per-filing scores combine into one value per day.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    /// Mean of the defined per-report scores.
    ReportMean,
    /// Pooled token ratio: Σ negative tokens / Σ total tokens.
    TokenWeighted,
}

impl Weighting {
    pub fn parse(text: &str) -> Result<Weighting> {
        match text {
            "report_mean" => Ok(Weighting::ReportMean),
            "token_weighted" => Ok(Weighting::TokenWeighted),
            other => Err(Error::config(format!(
                "unknown weighting {other:?} (expected report_mean or token_weighted)"
            ))),
        }
    }
}

/// One negativity value per filing date; dates where no filing has a
/// defined score are omitted. Errors when no score is defined at all.
pub fn daily_series(scores: &[NegativityScore], weighting: Weighting) -> Result<Series> {
    struct Day {
        score_sum: f64,
        score_n: usize,
        negative: usize,
        total: usize,
    }

    let mut days: BTreeMap<NaiveDate, Day> = BTreeMap::new();
    for score in scores {
        let Some(value) = score.score else { continue };
        let day = days.entry(score.ref_.filing_date).or_insert(Day {
            score_sum: 0.0,
            score_n: 0,
            negative: 0,
            total: 0,
        });
        day.score_sum += value;
        day.score_n += 1;
        day.negative += score.negative_token_count;
        day.total += score.total_token_count;
    }
    if days.is_empty() {
        return Err(Error::data("no filing has a defined negativity score"));
    }

    let mut series = Series::new("negativity");
    for (date, day) in days {
        let value = match weighting {
            Weighting::ReportMean => day.score_sum / day.score_n as f64,
            Weighting::TokenWeighted => day.negative as f64 / day.total as f64,
        };
        series.insert(date, value)?;
    }
    Ok(series)
}

/// Centered rolling mean over a calendar-day window, using the points that
/// exist. Window w covers [t - (w-1)/2, t + w/2]; output dates equal input
/// dates.
pub fn rolling_mean(series: &Series, window_days: i64) -> Series {
    assert!(window_days >= 1, "window must be at least one day");
    let mut smoothed = Series::new(series.name.clone());
    for (date, _) in series.iter() {
        let lo = date - Duration::days((window_days - 1) / 2);
        let hi = date + Duration::days(window_days / 2);
        let mut sum = 0.0;
        let mut n = 0usize;
        for (d, v) in series.points.range(lo..=hi) {
            debug_assert!((lo..=hi).contains(d));
            sum += v;
            n += 1;
        }
        smoothed
            .insert(date, sum / n as f64)
            .expect("input dates are unique and values finite");
    }
    smoothed
}

/// Pairs (a[t], b[t + lag]) over every date where both sides exist.
pub fn align(a: &Series, b: &Series, lag_days: i64) -> Vec<(f64, f64)> {
    a.iter()
        .filter_map(|(date, va)| b.get(date + Duration::days(lag_days)).map(|vb| (va, vb)))
        .collect()
}

/// Sample Pearson correlation; None for fewer than 3 pairs or a constant
/// coordinate.
pub fn pearson(pairs: &[(f64, f64)]) -> Option<f64> {
    let n = pairs.len();
    if n < 3 {
        return None;
    }
    let nf = n as f64;
    let mean_x = pairs.iter().map(|p| p.0).sum::<f64>() / nf;
    let mean_y = pairs.iter().map(|p| p.1).sum::<f64>() / nf;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for &(x, y) in pairs {
        let dx = x - mean_x;
        let dy = y - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    let denom = (var_x * var_y).sqrt();
    if denom == 0.0 {
        return None;
    }
    Some(cov / denom)
}

/// Correlation at one lag.
#[derive(Debug, Clone, PartialEq)]
pub struct LagCorrelation {
    pub lag: i64,
    pub rho: Option<f64>,
    pub n_pairs: usize,
}

/// Correlations over a symmetric lag range with the extremal lag.
#[derive(Debug, Clone)]
pub struct CrossCorrResult {
    /// One entry per lag in [-max_lag, +max_lag], in lag order.
    pub by_lag: Vec<LagCorrelation>,
    pub best_lag: i64,
    pub best_rho: f64,
}

/// Scan lags in [-max_lag, +max_lag]; the best lag maximizes |rho|, ties
/// broken by smaller |lag|, then by the negative lag.
pub fn cross_correlation(a: &Series, b: &Series, max_lag: i64) -> Result<CrossCorrResult> {
    assert!(max_lag >= 0, "max_lag must be non-negative");
    let mut by_lag = Vec::with_capacity((2 * max_lag + 1) as usize);
    for lag in -max_lag..=max_lag {
        let pairs = align(a, b, lag);
        by_lag.push(LagCorrelation {
            lag,
            rho: pearson(&pairs),
            n_pairs: pairs.len(),
        });
    }

    let mut best: Option<(i64, f64)> = None;
    for entry in &by_lag {
        let Some(rho) = entry.rho else { continue };
        let replace = match best {
            None => true,
            Some((best_lag, best_rho)) => {
                if rho.abs() != best_rho.abs() {
                    rho.abs() > best_rho.abs()
                } else if entry.lag.abs() != best_lag.abs() {
                    entry.lag.abs() < best_lag.abs()
                } else {
                    entry.lag < best_lag
                }
            }
        };
        if replace {
            best = Some((entry.lag, rho));
        }
    }
    let (best_lag, best_rho) = best.ok_or_else(|| {
        Error::data("no lag produced a defined correlation (too few overlapping points)")
    })?;
    Ok(CrossCorrResult {
        by_lag,
        best_lag,
        best_rho,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn date(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    fn day(n: i64) -> NaiveDate {
        date(2020, 1, 1) + Duration::days(n)
    }

    fn series(name: &str, values: &[(i64, f64)]) -> Series {
        Series::from_pairs(name, values.iter().map(|&(d, v)| (day(d), v))).unwrap()
    }

    #[test]
    fn series_rejects_duplicates_and_non_finite() {
        assert!(Series::from_pairs("s", [(day(0), 1.0), (day(0), 2.0)]).is_err());
        assert!(Series::from_pairs("s", [(day(0), f64::NAN)]).is_err());
    }

    fn score(d: NaiveDate, negative: usize, total: usize) -> NegativityScore {
        NegativityScore {
            ref_: crate::ingest::FilingRef {
                cik: "1".into(),
                company_name: "T".into(),
                sic_code: "2834".into(),
                form_type: "10-K".into(),
                filing_date: d,
                accession_id: format!("acc-{d}-{negative}-{total}"),
                document_url: String::new(),
            },
            score: (total > 0).then(|| negative as f64 / total as f64),
            negative_token_count: negative,
            total_token_count: total,
            crisis_sentence_count: 1,
        }
    }

    #[test]
    fn report_mean_averages_scores() {
        let scores = vec![score(day(0), 1, 10), score(day(0), 3, 10)];
        let series = daily_series(&scores, Weighting::ReportMean).unwrap();
        assert_eq!(series.get(day(0)), Some(0.2));
    }

    #[test]
    fn token_weighting_pools_counts() {
        // Shares 1/10 and 3/10 pool to 4/20 here; with unequal totals the
        // two weightings disagree.
        let scores = vec![score(day(0), 1, 10), score(day(0), 3, 10)];
        let series = daily_series(&scores, Weighting::TokenWeighted).unwrap();
        assert_eq!(series.get(day(0)), Some(0.2));

        let uneven = vec![score(day(0), 1, 10), score(day(0), 30, 100)];
        let mean = daily_series(&uneven, Weighting::ReportMean).unwrap();
        let pooled = daily_series(&uneven, Weighting::TokenWeighted).unwrap();
        assert_eq!(mean.get(day(0)), Some(0.2));
        assert_eq!(pooled.get(day(0)), Some(31.0 / 110.0));
    }

    #[test]
    fn undefined_scores_leave_no_point() {
        let scores = vec![score(day(0), 0, 0), score(day(1), 1, 4)];
        let series = daily_series(&scores, Weighting::ReportMean).unwrap();
        assert_eq!(series.get(day(0)), None);
        assert_eq!(series.get(day(1)), Some(0.25));

        assert!(daily_series(&[score(day(0), 0, 0)], Weighting::ReportMean).is_err());
    }

    #[test]
    fn window_one_is_identity() {
        let s = series("s", &[(0, 1.0), (1, 5.0), (3, 2.0)]);
        assert_eq!(rolling_mean(&s, 1), s);
    }

    #[test]
    fn constant_series_smooths_to_itself() {
        let s = series("s", &[(0, 2.0), (1, 2.0), (2, 2.0), (5, 2.0)]);
        assert_eq!(rolling_mean(&s, 7), s);
    }

    #[test]
    fn centered_window_averages_neighbors() {
        let s = series("s", &[(0, 0.0), (1, 1.0), (2, 0.0)]);
        let smoothed = rolling_mean(&s, 3);
        assert_eq!(smoothed.get(day(1)), Some(1.0 / 3.0));
        // Edges only see the points that exist.
        assert_eq!(smoothed.get(day(0)), Some(0.5));
    }

    #[test]
    fn rolling_mean_respects_input_bounds() {
        let s = series("s", &[(0, 1.0), (1, 9.0), (2, 4.0), (3, 7.0)]);
        let smoothed = rolling_mean(&s, 3);
        for (_, v) in smoothed.iter() {
            assert!((1.0..=9.0).contains(&v));
        }
    }

    #[test]
    fn align_matches_dates_under_lag() {
        let a = series("a", &[(0, 1.0), (1, 2.0), (2, 3.0)]);
        let b = series("b", &[(0, 10.0), (1, 20.0), (2, 30.0)]);
        assert_eq!(align(&a, &b, 0).len(), 3);

        let disjoint = series("c", &[(10, 1.0)]);
        assert!(align(&a, &disjoint, 0).is_empty());

        // b = a shifted 3 days later: pairs under lag 3 are (a[t], a[t]).
        let shifted = series("a+3", &[(3, 1.0), (4, 2.0), (5, 3.0)]);
        let pairs = align(&a, &shifted, 3);
        assert_eq!(pairs, vec![(1.0, 1.0), (2.0, 2.0), (3.0, 3.0)]);
    }

    #[test]
    fn pearson_limits_and_oracle() {
        assert_eq!(pearson(&[(1.0, 2.0), (2.0, 4.0), (3.0, 6.0)]), Some(1.0));
        assert_eq!(pearson(&[(1.0, 3.0), (2.0, 2.0), (3.0, 1.0)]), Some(-1.0));
        // Direct covariance-formula evaluation for (1,1),(2,5),(3,2),(4,4):
        // deviations (-1.5,-0.5,0.5,1.5) and (-2,2,-1,1) give cov = 3,
        // sx² = 5, sy² = 10, rho = 3 / sqrt(50).
        let rho = pearson(&[(1.0, 1.0), (2.0, 5.0), (3.0, 2.0), (4.0, 4.0)]).unwrap();
        assert!((rho - 3.0 / 50.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn pearson_undefined_cases() {
        assert_eq!(pearson(&[(1.0, 2.0), (2.0, 3.0)]), None);
        assert_eq!(pearson(&[(1.0, 2.0), (1.0, 3.0), (1.0, 4.0)]), None);
    }

    #[test]
    fn shifted_negation_recovers_the_lag() {
        // b[t] = -a[t - 5] plus distinct values so only the true lag is
        // perfect; a must be non-linear or every lag correlates at ±1.
        let values = [1.0, 4.0, 2.0, 8.0, 5.0, 7.0, 3.0, 9.0, 6.0, 2.5, 4.5, 8.5];
        let a = Series::from_pairs(
            "a",
            values.iter().enumerate().map(|(i, &v)| (day(i as i64), v)),
        )
        .unwrap();
        let b = Series::from_pairs(
            "b",
            values
                .iter()
                .enumerate()
                .map(|(i, &v)| (day(i as i64 + 5), -v)),
        )
        .unwrap();
        let result = cross_correlation(&a, &b, 10).unwrap();
        assert_eq!(result.best_lag, 5);
        assert!((result.best_rho + 1.0).abs() < 1e-9);
    }

    #[test]
    fn lag_symmetry_between_argument_orders() {
        let a = series(
            "a",
            &[(0, 1.0), (1, 4.0), (2, 2.0), (3, 8.0), (4, 5.0), (5, 7.0)],
        );
        let b = series(
            "b",
            &[(0, 2.0), (1, 3.0), (2, 9.0), (3, 1.0), (4, 6.0), (5, 4.0)],
        );
        let ab = cross_correlation(&a, &b, 3).unwrap();
        let ba = cross_correlation(&b, &a, 3).unwrap();
        for entry in &ab.by_lag {
            let mirror = ba.by_lag.iter().find(|e| e.lag == -entry.lag).unwrap();
            match (entry.rho, mirror.rho) {
                (Some(x), Some(y)) => assert!((x - y).abs() < 1e-12),
                (None, None) => {}
                other => panic!("asymmetric definedness: {other:?}"),
            }
        }
    }

    #[test]
    fn ties_prefer_small_then_negative_lags() {
        // A constant-increment ramp correlates perfectly at every lag, so
        // the tie-break alone decides: |rho| ties at 1, smallest |lag| is 0.
        let a = series(
            "a",
            &[(0, 1.0), (1, 2.0), (2, 3.0), (3, 4.0), (4, 5.0), (5, 6.0)],
        );
        let result = cross_correlation(&a, &a, 2).unwrap();
        assert_eq!(result.best_lag, 0);
        assert!((result.best_rho - 1.0).abs() < 1e-12);
    }

    #[test]
    fn no_overlap_is_an_error() {
        let a = series("a", &[(0, 1.0), (1, 2.0), (2, 3.0)]);
        let b = series("b", &[(50, 1.0), (51, 2.0), (52, 3.0)]);
        assert!(cross_correlation(&a, &b, 2).is_err());
    }
}
