//! Grid scans of the noisy mutually unbiased `(μ, ν)` plane.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::closed_forms::{classify_region_with, f, g, RegionClass, RegionSample};
use crate::error::{Error, Result};
use crate::tolerance::REGION_GUARD;

pub const DEFAULT_GRID_STEPS: usize = 201;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanConfig {
    pub d: usize,
    pub grid_steps: usize,
    pub mu_range: (f64, f64),
    pub nu_range: (f64, f64),
}

impl ScanConfig {
    /// Full unit square at the default resolution.
    pub fn new(d: usize) -> Self {
        Self {
            d,
            grid_steps: DEFAULT_GRID_STEPS,
            mu_range: (0.0, 1.0),
            nu_range: (0.0, 1.0),
        }
    }

    pub fn with_steps(mut self, steps: usize) -> Self {
        self.grid_steps = steps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::DimensionTooSmall { min: 2, got: self.d });
        }
        if self.grid_steps < 2 {
            return Err(Error::InvalidParams(format!(
                "grid_steps must be >= 2, got {}",
                self.grid_steps
            )));
        }
        for (lo, hi) in [self.mu_range, self.nu_range] {
            if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
                return Err(Error::InvalidParams(format!("range [{lo}, {hi}] not inside [0, 1]")));
            }
        }
        Ok(())
    }

    fn axis(&self, (lo, hi): (f64, f64)) -> Vec<f64> {
        let last = (self.grid_steps - 1) as f64;
        (0..self.grid_steps)
            .map(|i| {
                if i + 1 == self.grid_steps {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / last
                }
            })
            .collect()
    }

    pub fn mu_axis(&self) -> Vec<f64> {
        self.axis(self.mu_range)
    }

    pub fn nu_axis(&self) -> Vec<f64> {
        self.axis(self.nu_range)
    }
}

/// One sample per grid point, `μ` outer and `ν` inner.
pub fn region_scan(cfg: &ScanConfig) -> Result<Vec<RegionSample>> {
    region_scan_with(cfg, REGION_GUARD)
}

pub fn region_scan_with(cfg: &ScanConfig, guard: f64) -> Result<Vec<RegionSample>> {
    cfg.validate()?;
    let nus = cfg.nu_axis();
    let rows: Vec<Vec<RegionSample>> = cfg
        .mu_axis()
        .into_par_iter()
        .map(|mu| {
            nus.iter()
                .map(|&nu| classify_region_with(cfg.d, mu, nu, guard))
                .collect()
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionCounts {
    pub d: usize,
    pub cells: usize,
    pub useful: usize,
    pub gap: usize,
    pub other: usize,
    /// Cells satisfying the incompatibility criterion, useful ones included.
    pub incompatible: usize,
}

impl RegionCounts {
    pub fn useful_fraction(&self) -> f64 {
        self.useful as f64 / self.cells as f64
    }

    pub fn incompatible_fraction(&self) -> f64 {
        self.incompatible as f64 / self.cells as f64
    }

    pub fn gap_fraction(&self) -> f64 {
        self.gap as f64 / self.cells as f64
    }
}

pub fn count_regions(d: usize, samples: &[RegionSample]) -> RegionCounts {
    let mut c = RegionCounts {
        d,
        cells: samples.len(),
        useful: 0,
        gap: 0,
        other: 0,
        incompatible: 0,
    };
    for s in samples {
        match s.classification {
            RegionClass::UsefulForQrac => c.useful += 1,
            RegionClass::IncompatibleNotUseful => c.gap += 1,
            RegionClass::CompatibleOrUndetermined => c.other += 1,
        }
        let threshold = d as f64 - 1.0;
        if s.mu + s.nu > 1.0 + REGION_GUARD && s.g_value < threshold - REGION_GUARD {
            c.incompatible += 1;
        }
    }
    c
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitReport {
    pub entries: Vec<RegionCounts>,
    /// Useful fraction nonincreasing along the list.
    pub useful_nonincreasing: bool,
    /// Incompatible fraction nondecreasing along the list.
    pub incompatible_nondecreasing: bool,
}

impl LimitReport {
    pub fn holds(&self) -> bool {
        self.useful_nonincreasing && self.incompatible_nondecreasing
    }
}

/// Region areas (as cell fractions) for an increasing list of dimensions.
pub fn limit_check(d_list: &[usize], grid_steps: usize) -> Result<LimitReport> {
    if d_list.is_empty() || d_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParams(
            "dimension list must be nonempty and strictly increasing".into(),
        ));
    }
    let entries = d_list
        .iter()
        .map(|&d| {
            let cfg = ScanConfig::new(d).with_steps(grid_steps);
            Ok(count_regions(d, &region_scan(&cfg)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let useful_nonincreasing = entries.windows(2).all(|w| w[1].useful <= w[0].useful);
    let incompatible_nondecreasing = entries.windows(2).all(|w| w[1].incompatible >= w[0].incompatible);
    Ok(LimitReport {
        entries,
        useful_nonincreasing,
        incompatible_nondecreasing,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NestingReport {
    /// Cells with `f_d > d−1` but `f_{d'} < d'−1` for some `d' < d`.
    pub useful_violations: usize,
    /// Cells with `g_d < d−1` but `g_{d'} > d'−1` for some `d' < d`.
    pub g_shrinking_violations: usize,
    /// Cells with `g_{d'} < d'−1` but `g_d > d−1` for some `d' < d`.
    pub g_growing_violations: usize,
    pub pairs_checked: usize,
}

/// Compares the threshold sets of `f_d` and `g_d` across all pairs
/// `d' < d` from `dims`. A cell counts as a violation only when it is inside
/// one set and outside the other by more than `guard`.
pub fn nesting_check(dims: &[usize], grid_steps: usize, guard: f64) -> Result<NestingReport> {
    let cfg = ScanConfig::new(2).with_steps(grid_steps);
    cfg.validate()?;
    let (mus, nus) = (cfg.mu_axis(), cfg.nu_axis());
    let mut report = NestingReport {
        useful_violations: 0,
        g_shrinking_violations: 0,
        g_growing_violations: 0,
        pairs_checked: 0,
    };
    for (i, &small) in dims.iter().enumerate() {
        for &large in &dims[i + 1..] {
            if small >= large {
                continue;
            }
            report.pairs_checked += 1;
            let (ts, tl) = (small as f64 - 1.0, large as f64 - 1.0);
            for &mu in &mus {
                for &nu in &nus {
                    let (fs, fl) = (f(small, mu, nu), f(large, mu, nu));
                    let (gs, gl) = (g(small, mu, nu), g(large, mu, nu));
                    if fl > tl + guard && fs < ts - guard {
                        report.useful_violations += 1;
                    }
                    if gl < tl - guard && gs > ts + guard {
                        report.g_shrinking_violations += 1;
                    }
                    if gs < ts - guard && gl > tl + guard {
                        report.g_growing_violations += 1;
                    }
                }
            }
        }
    }
    Ok(report)
}

pub const CSV_HEADER: [&str; 5] = ["mu", "nu", "f", "g", "class"];

/// Writes `mu,nu,f,g,class` rows; floats use the shortest round-trip form.
pub fn write_csv<W: Write>(samples: &[RegionSample], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for s in samples {
        w.write_record([
            s.mu.to_string(),
            s.nu.to_string(),
            s.f_value.to_string(),
            s.g_value.to_string(),
            s.classification.tag().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(samples: &[RegionSample], mu: f64, nu: f64) -> RegionClass {
        samples
            .iter()
            .find(|s| (s.mu - mu).abs() < 1e-12 && (s.nu - nu).abs() < 1e-12)
            .unwrap()
            .classification
    }

    #[test]
    fn config_validation() {
        assert!(ScanConfig::new(3).validate().is_ok());
        assert!(ScanConfig::new(1).validate().is_err());
        assert!(ScanConfig::new(3).with_steps(1).validate().is_err());
        let mut c = ScanConfig::new(3);
        c.mu_range = (0.5, 1.2);
        assert!(c.validate().is_err());
        c.mu_range = (0.6, 0.5);
        assert!(c.validate().is_err());
    }

    #[test]
    fn axis_endpoints_exact() {
        let a = ScanConfig::new(3).mu_axis();
        assert_eq!(a.len(), 201);
        assert_eq!(a[0], 0.0);
        assert_eq!(a[140], 0.7);
        assert_eq!(a[200], 1.0);
    }

    #[test]
    fn d3_scan_contents() {
        let s = region_scan(&ScanConfig::new(3)).unwrap();
        assert_eq!(s.len(), 201 * 201);
        assert_eq!(at(&s, 0.7, 0.7), RegionClass::IncompatibleNotUseful);
        assert_eq!(at(&s, 1.0, 1.0), RegionClass::UsefulForQrac);
        assert_eq!((s[1].mu, s[1].nu), (0.0, 0.005));
        assert_eq!(s[201].mu, 0.005);
    }

    #[test]
    fn useful_area_shrinks() {
        let c3 = count_regions(3, &region_scan(&ScanConfig::new(3)).unwrap());
        let c100 = count_regions(100, &region_scan(&ScanConfig::new(100)).unwrap());
        assert!(c100.useful < c3.useful);
        assert!(c100.gap > 0);
    }

    #[test]
    fn limit_examples() {
        let r = limit_check(&[3, 10, 100], 101).unwrap();
        assert!(r.holds(), "{r:?}");
        assert!(limit_check(&[10, 3], 11).is_err());
        let r = limit_check(&[2], 201).unwrap();
        assert_eq!(r.entries[0].gap, 0);
        assert_eq!(r.entries[0].useful, r.entries[0].incompatible);
    }

    #[test]
    fn single_point_grid_at_corner() {
        for d in 2..20 {
            let cfg = ScanConfig {
                d,
                grid_steps: 2,
                mu_range: (1.0, 1.0),
                nu_range: (1.0, 1.0),
            };
            for s in region_scan(&cfg).unwrap() {
                assert_eq!(s.classification, RegionClass::UsefulForQrac);
            }
        }
    }

    #[test]
    fn nesting_directions() {
        let r = nesting_check(&[2, 3, 5], 51, REGION_GUARD).unwrap();
        assert_eq!(r.pairs_checked, 3);
        assert_eq!(r.useful_violations, 0);
        assert_eq!(r.g_growing_violations, 0);
        // μ = ν = 0.7 satisfies g₃ < 2 but not g₂ < 1
        assert!(r.g_shrinking_violations > 0);
    }

    #[test]
    fn scan_is_deterministic() {
        let cfg = ScanConfig::new(7).with_steps(41);
        let a = region_scan(&cfg).unwrap();
        let b = region_scan(&cfg).unwrap();
        assert!(a
            .iter()
            .zip(&b)
            .all(|(x, y)| x.f_value.to_bits() == y.f_value.to_bits() && x == y));
    }

    #[test]
    fn csv_layout() {
        let cfg = ScanConfig::new(3).with_steps(3);
        let mut buf = Vec::new();
        write_csv(&region_scan(&cfg).unwrap(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "mu,nu,f,g,class");
        assert_eq!(lines.len(), 10);
        assert_eq!(lines[1], "0,0,0,3,other");
        assert!(lines[9].starts_with("1,1,3,"));
        assert!(lines[9].ends_with(",useful"));
    }
}
