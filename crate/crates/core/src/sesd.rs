//! Seasonal extreme studentized deviate (S-ESD) anomaly detection.
//!
//! The series is split into a piecewise-median trend, a seasonal component
//! (per-phase medians of the detrended series) and a residual; a generalized ESD test with robust
//! location and scale then flags residual outliers.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{median, total_cmp, Scalar};
use crate::special::student_t_quantile;

/// Consistency constant turning the MAD into a normal-scale estimate.
const MAD_SCALE: f64 = 1.4826;

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SesdConfig {
    /// Observations per season.
    pub period: usize,
    pub alpha: f64,
    /// Upper bound on the flagged fraction of the series.
    pub max_anoms_fraction: f64,
    /// Median/MAD statistics instead of mean/standard deviation.
    pub robust: bool,
    /// Trend piece length, in periods.
    pub trend_window: usize,
}

impl Default for SesdConfig {
    fn default() -> Self {
        Self {
            period: 7,
            alpha: 0.05,
            max_anoms_fraction: 0.10,
            robust: true,
            trend_window: 2,
        }
    }
}

impl SesdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.period == 0 {
            return Err(Error::param("period must be positive"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::param(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.max_anoms_fraction > 0.0 && self.max_anoms_fraction < 0.5) {
            return Err(Error::param(format!(
                "max anomaly fraction must lie in (0, 0.5), got {}",
                self.max_anoms_fraction
            )));
        }
        if self.trend_window == 0 {
            return Err(Error::param("trend window must be positive"));
        }
        Ok(())
    }

    /// Largest number of points the test may flag in a series of length `n`.
    pub fn max_anomalies(&self, n: usize) -> usize {
        ((self.max_anoms_fraction * n as f64).ceil() as usize).min(n.saturating_sub(2))
    }

    pub fn with_alpha(self, alpha: f64) -> Self {
        Self { alpha, ..self }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition<T> {
    pub observed: Vec<T>,
    pub seasonal: Vec<T>,
    pub trend: Vec<T>,
    pub residual: Vec<T>,
}

impl<T: Scalar> Decomposition<T> {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["i", "observed", "seasonal", "trend", "residual"])?;
        for i in 0..self.observed.len() {
            w.write_record([
                i.to_string(),
                self.observed[i].to_string(),
                self.seasonal[i].to_string(),
                self.trend[i].to_string(),
                self.residual[i].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnomalySet<T> {
    /// Flagged positions, ascending, 0-based into the tested series.
    pub indices: Vec<usize>,
    /// Test statistic of every flagged position.
    pub scores: Vec<(usize, T)>,
    pub decomposition: Option<Decomposition<T>>,
}

impl<T> AnomalySet<T> {
    pub fn empty() -> Self {
        Self {
            indices: Vec::new(),
            scores: Vec::new(),
            decomposition: None,
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

fn check_length(n: usize, config: &SesdConfig) -> Result<()> {
    let required = 2 * config.period;
    if n < required {
        return Err(Error::SeriesTooShort { len: n, required });
    }
    Ok(())
}

/// Splits `series` into seasonal + trend + residual.
pub fn decompose<T: Scalar>(series: &[T], config: &SesdConfig) -> Result<Decomposition<T>> {
    config.validate()?;
    let n = series.len();
    check_length(n, config)?;
    let period = config.period;

    // piecewise median over consecutive whole-period blocks; a short tail
    // reuses the last full-length window
    let width = (config.trend_window * period).min(n);
    let mut trend = vec![T::zero(); n];
    let mut start = 0;
    while start < n {
        let end = (start + width).min(n);
        let window = if end - start < width { n - width..n } else { start..end };
        let level = median(&series[window]);
        trend[start..end].iter_mut().for_each(|t| *t = level);
        start = end;
    }

    let detrended: Vec<T> = series.iter().zip(&trend).map(|(&x, &t)| x - t).collect();
    let phase: Vec<T> = (0..period)
        .map(|p| {
            let obs: Vec<T> = detrended.iter().skip(p).step_by(period).copied().collect();
            median(&obs)
        })
        .collect();
    // residual from the uncentered parts so exact seasonality leaves exact zeros
    let residual = (0..n).map(|i| detrended[i] - phase[i % period]).collect();
    let center = median(&phase);
    let seasonal: Vec<T> = (0..n).map(|i| phase[i % period] - center).collect();
    let trend: Vec<T> = trend.into_iter().map(|t| t + center).collect();
    Ok(Decomposition {
        observed: series.to_vec(),
        seasonal,
        trend,
        residual,
    })
}

fn mean_sd<T: Scalar>(xs: &[T]) -> (T, T) {
    let n = T::of_usize(xs.len());
    let mean = xs.iter().copied().sum::<T>() / n;
    if xs.len() < 2 {
        return (mean, T::zero());
    }
    let ss: T = xs.iter().map(|&x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - T::one())).sqrt())
}

/// Critical value of the generalized ESD test at removal step `i` (1-based).
pub fn esd_critical_value(n: usize, i: usize, alpha: f64) -> f64 {
    let nf = n as f64;
    let i = i as f64;
    let p = 1.0 - alpha / (2.0 * (nf - i + 1.0));
    let df = nf - i - 1.0;
    let t = student_t_quantile(p, df);
    (nf - i) * t / ((df + t * t) * (nf - i + 1.0)).sqrt()
}

/// Generalized ESD test on a residual series.
pub fn esd_test<T: Scalar>(residual: &[T], config: &SesdConfig) -> Result<AnomalySet<T>> {
    config.validate()?;
    let n = residual.len();
    if n < 3 {
        return Err(Error::SeriesTooShort { len: n, required: 3 });
    }
    let max_k = config.max_anomalies(n);
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut steps: Vec<(usize, T, f64)> = Vec::new();
    let mut warned = false;
    for i in 1..=max_k {
        let values: Vec<T> = remaining.iter().map(|&j| residual[j]).collect();
        let first = values[0];
        if values.iter().all(|&v| v == first) {
            break;
        }
        let (center, scale) = if config.robust {
            let med = median(&values);
            let dev: Vec<T> = values.iter().map(|&v| (v - med).abs()).collect();
            let mad = median(&dev) * T::of(MAD_SCALE);
            if mad > T::zero() {
                (med, mad)
            } else {
                if !warned {
                    log::warn!("median absolute deviation is zero; falling back to mean and standard deviation");
                    warned = true;
                }
                mean_sd(&values)
            }
        } else {
            mean_sd(&values)
        };
        if !(scale > T::zero()) {
            break;
        }
        let (pos, dev) = values.iter().enumerate().map(|(p, &v)| (p, (v - center).abs())).fold(
            (0, T::neg_infinity()),
            |best, cur| if cur.1 > best.1 { cur } else { best },
        );
        let r = dev / scale;
        let lambda = esd_critical_value(n, i, config.alpha);
        steps.push((remaining.remove(pos), r, lambda));
    }
    let flagged = steps
        .iter()
        .rposition(|&(_, r, lambda)| r.as_f64() > lambda)
        .map_or(0, |p| p + 1);
    let mut scores: Vec<(usize, T)> = steps[..flagged].iter().map(|&(j, r, _)| (j, r)).collect();
    scores.sort_by_key(|s| s.0);
    Ok(AnomalySet {
        indices: scores.iter().map(|s| s.0).collect(),
        scores,
        decomposition: None,
    })
}

/// Decomposes the series and runs the ESD test on its residual.
pub fn detect<T: Scalar>(series: &[T], config: &SesdConfig) -> Result<AnomalySet<T>> {
    let decomposition = decompose(series, config)?;
    let mut set = esd_test(&decomposition.residual, config)?;
    set.decomposition = Some(decomposition);
    Ok(set)
}

/// Largest absolute residual, handy for diagnostics.
pub fn max_abs<T: Scalar>(xs: &[T]) -> T {
    xs.iter().map(|x| x.abs()).max_by(total_cmp).unwrap_or_else(T::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const PATTERN: [f64; 7] = [3.0, 5.0, 4.0, 9.0, 1.0, 2.0, 6.0];

    fn seasonal(cycles: usize) -> Vec<f64> {
        (0..7 * cycles).map(|i| PATTERN[i % 7]).collect()
    }

    fn cfg() -> SesdConfig {
        SesdConfig::default()
    }

    /// Box–Muller standard normal draws.
    fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        use rand::Rng;
        (0..n)
            .map(|_| {
                let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
                let u2: f64 = rng.gen();
                (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
            })
            .collect()
    }

    #[test]
    fn periodic_series_decomposes_exactly() {
        let d = decompose(&seasonal(2), &cfg()).unwrap();
        assert!(d.residual.iter().all(|r| r.abs() < 1e-12));
        for i in 0..14 {
            let sum = d.seasonal[i] + d.trend[i] + d.residual[i];
            assert!((sum - d.observed[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_series() {
        let d = decompose(&[4.5; 21], &cfg()).unwrap();
        assert!(d.seasonal.iter().all(|&s| s == 0.0));
        assert!(d.trend.iter().all(|&t| t == 4.5));
        assert!(d.residual.iter().all(|&r| r == 0.0));
        assert!(detect(&[4.5; 21], &cfg()).unwrap().is_empty());
    }

    #[test]
    fn spike_lands_in_residual() {
        let mut s = seasonal(4);
        s[10] += 100.0;
        let d = decompose(&s, &cfg()).unwrap();
        for (i, r) in d.residual.iter().enumerate() {
            if i == 10 {
                assert!((r - 100.0).abs() < 1e-9);
            } else {
                assert!(r.abs() < 1e-9, "residual[{i}] = {r}");
            }
        }
        assert_eq!(detect(&s, &cfg()).unwrap().indices, vec![10]);
    }

    #[test]
    fn too_short() {
        assert!(matches!(
            decompose(&seasonal(1), &cfg()),
            Err(Error::SeriesTooShort { len: 7, required: 14 })
        ));
        assert!(esd_test(&[1.0, 2.0], &cfg()).is_err());
    }

    #[test]
    fn constant_residuals_flag_nothing() {
        assert!(esd_test(&[0.25; 40], &cfg()).unwrap().is_empty());
    }

    #[test]
    fn single_outlier_among_zeros() {
        let mut r = vec![0.0; 28];
        r[17] = 100.0;
        let set = esd_test(&r, &cfg()).unwrap();
        assert_eq!(set.indices, vec![17]);
        assert!(set.scores[0].1 > esd_critical_value(28, 1, 0.05));
    }

    #[test]
    fn level_shift_is_flagged_near_change() {
        let mut s = seasonal(15);
        s.truncate(100);
        for x in s.iter_mut().skip(50) {
            *x += 20.0;
        }
        let set = detect(&s, &cfg()).unwrap();
        assert!(set.indices.iter().any(|&i| (48..=52).contains(&i)), "{:?}", set.indices);
    }

    #[test]
    fn false_alarms_on_gaussian_noise() {
        let mut total = 0;
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            total += esd_test(&normals(&mut rng, 100), &cfg()).unwrap().len();
        }
        assert!(total as f64 / 100.0 <= 1.0, "mean flags {}", total as f64 / 100.0);
    }

    #[test]
    fn non_robust_variant() {
        let mut r = vec![0.0; 30];
        r[3] = 1.0;
        r[20] = 50.0;
        let c = SesdConfig { robust: false, ..cfg() };
        assert_eq!(esd_test(&r, &c).unwrap().indices, vec![3, 20]);
    }

    #[test]
    fn config_validation() {
        for bad in [
            SesdConfig { period: 0, ..cfg() },
            SesdConfig { alpha: 1.0, ..cfg() },
            SesdConfig {
                max_anoms_fraction: 0.5,
                ..cfg()
            },
            SesdConfig {
                trend_window: 0,
                ..cfg()
            },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn decomposition_csv_header() {
        let d = decompose(&seasonal(2), &cfg()).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("i,observed,seasonal,trend,residual\n0,3,"));
        assert_eq!(text.lines().count(), 15);
    }

    proptest! {
        #[test]
        fn flag_count_bounded_and_shift_scale_invariant(
            xs in prop::collection::vec(-50i32..50, 14..80),
            shift in -1000i32..1000,
            scale_pow in -3i32..4,
        ) {
            let series: Vec<f64> = xs.iter().map(|&x| x as f64).collect();
            let base = detect(&series, &cfg()).unwrap();
            prop_assert!(base.len() <= cfg().max_anomalies(series.len()));

            let shifted: Vec<f64> = series.iter().map(|x| x + shift as f64).collect();
            prop_assert_eq!(&detect(&shifted, &cfg()).unwrap().indices, &base.indices);

            let c = 2f64.powi(scale_pow);
            let scaled: Vec<f64> = series.iter().map(|x| x * c).collect();
            prop_assert_eq!(&detect(&scaled, &cfg()).unwrap().indices, &base.indices);
        }
    }
}
