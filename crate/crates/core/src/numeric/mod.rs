//! Quadrature, root finding, summation and goodness-of-fit helpers.

pub mod ks;
pub mod quad;
pub mod root;

pub use ks::{ks_critical_99, ks_from_sorted_cdf, ks_statistic, sup_gap};
pub use quad::{integrate, integrate_power_tail, integrate_to_infinity, Integral, QuadError};
pub use root::{bisect, solve_increasing_positive, RootError};

/// Compensated (Neumaier) summation.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancelled_mass() {
        let v = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(neumaier_sum(v), 2.0);
    }
}
