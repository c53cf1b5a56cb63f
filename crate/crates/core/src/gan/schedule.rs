use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the synthetic budget is spread over the training epochs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenerationMode {
    /// Everything is sampled after the last epoch.
    AllAtEnd,
    Uniform,
    Geometric,
}

impl fmt::Display for GenerationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::AllAtEnd => "all_at_end",
            Self::Uniform => "uniform",
            Self::Geometric => "geometric",
        })
    }
}

impl core::str::FromStr for GenerationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all_at_end" => Ok(Self::AllAtEnd),
            "uniform" => Ok(Self::Uniform),
            "geometric" => Ok(Self::Geometric),
            other => Err(Error::Argument(format!(
                "unknown schedule `{other}` (expected all_at_end, uniform or geometric)"
            ))),
        }
    }
}

/// Per-epoch synthetic row quotas. Percentages (`first_item`, `total`) are
/// in percent of the target count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationSchedule {
    pub mode: GenerationMode,
    pub epochs: usize,
    pub first_item: f64,
    pub total: f64,
    pub ratio: Option<f64>,
    pub quotas: Vec<usize>,
}

impl GenerationSchedule {
    pub fn target(&self) -> usize {
        self.quotas.iter().sum()
    }

    /// Percentage assigned to each epoch before rounding.
    pub fn percentages(&self) -> Vec<f64> {
        match (self.mode, self.ratio) {
            (GenerationMode::Geometric, Some(r)) => (0..self.epochs)
                .map(|e| self.first_item * libm::pow(r, e as f64))
                .collect(),
            (GenerationMode::Uniform, _) => vec![self.total / self.epochs as f64; self.epochs],
            _ => {
                let mut p = vec![0.0; self.epochs];
                if let Some(last) = p.last_mut() {
                    *last = self.total;
                }
                p
            }
        }
    }
}

/// `a + a r + ... + a r^(E-1)`.
pub fn geometric_sum(first_item: f64, ratio: f64, epochs: usize) -> f64 {
    let d = ratio - 1.0;
    if d == 0.0 {
        return first_item * epochs as f64;
    }
    first_item * libm::expm1(epochs as f64 * libm::log1p(d)) / d
}

const SUM_TOLERANCE: f64 = 1e-9;
const MAX_BISECTIONS: usize = 400;

/// Common ratio `r` with `a (r^E - 1) / (r - 1) = S`.
///
/// Returns exactly 1 when `a E = S`. A progression that would have to shrink
/// (`a E > S`) is rejected.
pub fn solve_common_ratio(first_item: f64, epochs: usize, total: f64) -> Result<f64> {
    if !(first_item > 0.0) || !first_item.is_finite() {
        return Err(Error::Schedule(format!("first item must be > 0, got {first_item}")));
    }
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::Schedule(format!("total must be > 0, got {total}")));
    }
    if epochs == 0 {
        return Err(Error::Schedule("epochs must be at least 1".into()));
    }
    if first_item > total {
        return Err(Error::Schedule(format!(
            "first item {first_item} exceeds the total {total}"
        )));
    }
    let flat = first_item * epochs as f64;
    if libm::fabs(flat - total) <= 1e-12 * total {
        return Ok(1.0);
    }
    if epochs == 1 {
        return Err(Error::Schedule(format!(
            "a single epoch needs first item = total, got {first_item} and {total}"
        )));
    }
    if flat > total {
        return Err(Error::Schedule(format!(
            "first item {first_item} over {epochs} epochs already gives {flat} > {total}; the ratio would be below 1"
        )));
    }

    // bisection on d = r - 1, where the sum is increasing
    let excess = |d: f64| geometric_sum(first_item, 1.0 + d, epochs) - total;
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    while excess(hi) < 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Schedule("ratio search diverged".into()));
        }
    }
    let mut best = hi;
    let mut best_err = libm::fabs(excess(hi));
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f = excess(mid);
        if libm::fabs(f) < best_err {
            best = mid;
            best_err = libm::fabs(f);
        }
        if best_err <= SUM_TOLERANCE {
            break;
        }
        if f < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(1.0 + best)
}

/// Builds quotas summing exactly to `n_target`.
///
/// `first_item` and `total` are ignored for [`GenerationMode::AllAtEnd`];
/// `first_item` is ignored for [`GenerationMode::Uniform`].
pub fn build_schedule(
    mode: GenerationMode,
    n_target: usize,
    epochs: usize,
    first_item: f64,
    total: f64,
) -> Result<GenerationSchedule> {
    if epochs == 0 {
        if n_target > 0 {
            return Err(Error::Schedule(format!(
                "no epochs to place {n_target} synthetic rows in"
            )));
        }
        return Ok(GenerationSchedule {
            mode,
            epochs,
            first_item,
            total,
            ratio: None,
            quotas: Vec::new(),
        });
    }
    let (ratio, quotas) = match mode {
        GenerationMode::AllAtEnd => {
            let mut q = vec![0; epochs];
            q[epochs - 1] = n_target;
            (None, q)
        }
        GenerationMode::Uniform => (Some(1.0), apportion(n_target, &vec![1.0; epochs], epochs as f64)),
        GenerationMode::Geometric => {
            let r = solve_common_ratio(first_item, epochs, total)?;
            let p: Vec<f64> = (0..epochs).map(|e| first_item * libm::pow(r, e as f64)).collect();
            (Some(r), apportion(n_target, &p, total))
        }
    };
    Ok(GenerationSchedule {
        mode,
        epochs,
        first_item,
        total,
        ratio,
        quotas,
    })
}

/// Geometric quotas with a caller-fixed ratio. The percentages need not sum
/// to 100, so they are normalized by their own sum, which is stored as
/// `total`.
pub fn build_schedule_with_ratio(
    n_target: usize,
    epochs: usize,
    first_item: f64,
    ratio: f64,
) -> Result<GenerationSchedule> {
    if epochs == 0 {
        return build_schedule(GenerationMode::Geometric, n_target, 0, first_item, first_item);
    }
    if !(first_item > 0.0) || !first_item.is_finite() {
        return Err(Error::Schedule(format!("first item must be > 0, got {first_item}")));
    }
    if !(ratio > 0.0) || !ratio.is_finite() {
        return Err(Error::Schedule(format!("ratio must be > 0, got {ratio}")));
    }
    let p: Vec<f64> = (0..epochs).map(|e| first_item * libm::pow(ratio, e as f64)).collect();
    let total: f64 = p.iter().sum();
    if !total.is_finite() {
        return Err(Error::Schedule(format!(
            "ratio {ratio} over {epochs} epochs overflows"
        )));
    }
    Ok(GenerationSchedule {
        mode: GenerationMode::Geometric,
        epochs,
        first_item,
        total,
        ratio: Some(ratio),
        quotas: apportion(n_target, &p, total),
    })
}

/// `floor(n p_e / denom)`, then the shortfall one row at a time to the
/// latest epochs. Any float overshoot comes off the earliest epochs.
fn apportion(n_target: usize, p: &[f64], denom: f64) -> Vec<usize> {
    let n = n_target as f64;
    let mut q: Vec<usize> = p
        .iter()
        .map(|&pe| {
            let x = libm::floor(n * pe / denom);
            if x > 0.0 {
                x as usize
            } else {
                0
            }
        })
        .collect();
    let mut assigned: usize = q.iter().sum();
    while assigned > n_target {
        let i = q.iter().position(|&v| v > 0).expect("overshoot implies a nonzero quota");
        let cut = (assigned - n_target).min(q[i]);
        q[i] -= cut;
        assigned -= cut;
    }
    let len = q.len();
    let mut k = 0;
    while assigned < n_target {
        q[len - 1 - (k % len)] += 1;
        assigned += 1;
        k += 1;
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_ratio() {
        let r = solve_common_ratio(0.1, 200, 100.0).unwrap();
        assert!((r - 1.01344).abs() < 5e-4, "{r}");
        assert!((geometric_sum(0.1, r, 200) - 100.0).abs() <= 1e-9);
    }

    #[test]
    fn flat_progression_is_exactly_one() {
        assert_eq!(solve_common_ratio(2.0, 50, 100.0).unwrap(), 1.0);
        assert_eq!(solve_common_ratio(100.0, 1, 100.0).unwrap(), 1.0);
    }

    #[test]
    fn ratio_for_ten_epochs() {
        let r = solve_common_ratio(5.0, 10, 100.0).unwrap();
        assert!((r - 1.1469).abs() < 1e-3, "{r}");
        // independent check by direct summation
        let direct: f64 = (0..10).map(|e| 5.0 * r.powi(e)).sum();
        assert!((direct - 100.0).abs() < 1e-8);
    }

    #[test]
    fn ratio_errors() {
        assert!(matches!(solve_common_ratio(3.0, 50, 100.0), Err(Error::Schedule(_))));
        assert!(matches!(solve_common_ratio(50.0, 1, 100.0), Err(Error::Schedule(_))));
        assert!(matches!(solve_common_ratio(0.0, 5, 100.0), Err(Error::Schedule(_))));
        assert!(matches!(solve_common_ratio(1.0, 0, 100.0), Err(Error::Schedule(_))));
        assert!(matches!(solve_common_ratio(200.0, 5, 100.0), Err(Error::Schedule(_))));
    }

    #[test]
    fn uniform_example() {
        let s = build_schedule(GenerationMode::Uniform, 1000, 50, 2.0, 100.0).unwrap();
        assert_eq!(s.quotas, vec![20; 50]);
    }

    #[test]
    fn uniform_remainder_goes_last() {
        let s = build_schedule(GenerationMode::Uniform, 10, 4, 0.0, 100.0).unwrap();
        assert_eq!(s.quotas, vec![2, 2, 3, 3]);
    }

    #[test]
    fn all_at_end_example() {
        let s = build_schedule(GenerationMode::AllAtEnd, 7, 3, f64::NAN, f64::NAN).unwrap();
        assert_eq!(s.quotas, vec![0, 0, 7]);
    }

    #[test]
    fn geometric_example() {
        let s = build_schedule(GenerationMode::Geometric, 1000, 200, 0.1, 100.0).unwrap();
        assert_eq!(s.quotas[0], 1);
        assert_eq!(s.target(), 1000);
        assert!(s.quotas.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn zero_epochs() {
        assert!(matches!(
            build_schedule(GenerationMode::Uniform, 5, 0, 1.0, 100.0),
            Err(Error::Schedule(_))
        ));
        assert!(build_schedule(GenerationMode::Uniform, 0, 0, 1.0, 100.0).unwrap().quotas.is_empty());
    }

    #[test]
    fn ratio_override_uses_own_sum() {
        let s = build_schedule_with_ratio(10_000, 50, 0.2, 1.15884).unwrap();
        assert_eq!(s.target(), 10_000);
        assert!(s.total > 1000.0, "{}", s.total);
        assert!(s.quotas.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn apportion_overshoot_is_trimmed_from_the_front() {
        // weights summing above the denominator force an overshoot
        assert_eq!(apportion(10, &[1.0, 1.0, 1.0], 2.0), vec![0, 5, 5]);
    }
}
