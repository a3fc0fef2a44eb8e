//! Analytical convolution of cluster CDFs: pairwise joint disclosure
//! probability, probability planes, diagonal cuts at release offsets, and
//! the N-library inclusion–exclusion extension.
//!
//! For independent libraries the joint CDF of the fastest disclosure is
//! the complement of joint survival, 1 − S_A·S_B. The inclusion–exclusion
//! sum is kept as a second, algebraically equivalent route and the two are
//! cross-checked on every N-library evaluation.

use std::fmt::Write as _;

use thiserror::Error;

use crate::kde::CdfSource;

/// Cross-check tolerance between the survival-product and the
/// inclusion–exclusion forms.
const CROSS_CHECK_TOLERANCE: f64 = 1e-9;

/// Above this many libraries the 2^N inclusion–exclusion cross-check is
/// skipped with a warning.
const MAX_CROSS_CHECK_LIBRARIES: usize = 20;

#[derive(Debug, Error)]
pub enum JointError {
    #[error("time {t} is negative")]
    DomainError { t: f64 },

    #[error("{handles} CDF handles but {times} time points")]
    LengthMismatch { handles: usize, times: usize },

    #[error("no CDF handles given")]
    Empty,

    #[error(
        "survival-product and inclusion–exclusion forms disagree: {product} vs {inclusion_exclusion}"
    )]
    InternalInconsistency {
        product: f64,
        inclusion_exclusion: f64,
    },
}

/// Joint CDF of the fastest of two disclosures, at per-library times:
/// 1 − (1 − F_A(t_A))·(1 − F_B(t_B)).
pub fn joint_cdf2<A: CdfSource, B: CdfSource>(
    f_a: &A,
    f_b: &B,
    t_a: f64,
    t_b: f64,
) -> Result<f64, JointError> {
    for t in [t_a, t_b] {
        if t < 0.0 || t.is_nan() {
            return Err(JointError::DomainError { t });
        }
    }
    Ok(1.0 - (1.0 - f_a.cdf_at(t_a)) * (1.0 - f_b.cdf_at(t_b)))
}

/// Grid evaluation of the pairwise joint CDF.
#[derive(Debug, Clone)]
pub struct ProbabilityPlane {
    pub x_axis: Vec<f64>,
    pub y_axis: Vec<f64>,
    /// values[yi][xi] = joint CDF at (x_axis[xi], y_axis[yi])
    pub values: Vec<Vec<f64>>,
}

impl ProbabilityPlane {
    /// CSV export: `x_days,y_days,joint_cdf`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x_days,y_days,joint_cdf\n");
        for (yi, &y) in self.y_axis.iter().enumerate() {
            for (xi, &x) in self.x_axis.iter().enumerate() {
                let _ = writeln!(out, "{x},{y},{}", self.values[yi][xi]);
            }
        }
        out
    }
}

/// Evaluates the joint CDF of two libraries over a uniform grid.
pub fn probability_plane<A: CdfSource, B: CdfSource>(
    f_a: &A,
    f_b: &B,
    x_max: f64,
    y_max: f64,
    resolution: usize,
) -> Result<ProbabilityPlane, JointError> {
    let resolution = resolution.max(2);
    for t in [x_max, y_max] {
        if t < 0.0 || t.is_nan() {
            return Err(JointError::DomainError { t });
        }
    }
    let axis = |max: f64| -> Vec<f64> {
        (0..resolution)
            .map(|i| max * i as f64 / (resolution - 1) as f64)
            .collect()
    };
    let x_axis = axis(x_max);
    let y_axis = axis(y_max);
    let values = y_axis
        .iter()
        .map(|&y| {
            x_axis
                .iter()
                .map(|&x| 1.0 - (1.0 - f_a.cdf_at(x)) * (1.0 - f_b.cdf_at(y)))
                .collect()
        })
        .collect();
    Ok(ProbabilityPlane {
        x_axis,
        y_axis,
        values,
    })
}

/// A 45° cut through the probability plane, displaced by per-library
/// release offsets: the disclosure CDF (and density) as a function of the
/// common horizon u.
#[derive(Debug, Clone)]
pub struct DiagonalCut {
    pub offset_x: f64,
    pub offset_y: f64,
    pub u: Vec<f64>,
    pub cdf: Vec<f64>,
    pub density: Vec<f64>,
}

impl DiagonalCut {
    /// CSV export: `u_days,cdf,density`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("u_days,cdf,density\n");
        for i in 0..self.u.len() {
            let _ = writeln!(out, "{},{},{}", self.u[i], self.cdf[i], self.density[i]);
        }
        out
    }
}

/// Cuts the plane along u ↦ (offset_x + u, offset_y + u). Offsets are the
/// days each library has already been released. Density is the central
/// finite difference of the cut CDF (one-sided at the endpoints).
pub fn diagonal_cut<A: CdfSource, B: CdfSource>(
    f_a: &A,
    f_b: &B,
    offset_x: f64,
    offset_y: f64,
    u_max: f64,
    resolution: usize,
) -> Result<DiagonalCut, JointError> {
    let resolution = resolution.max(2);
    for t in [offset_x, offset_y, u_max] {
        if t < 0.0 || t.is_nan() {
            return Err(JointError::DomainError { t });
        }
    }
    let u: Vec<f64> = (0..resolution)
        .map(|i| u_max * i as f64 / (resolution - 1) as f64)
        .collect();
    let cdf: Vec<f64> = u
        .iter()
        .map(|&ui| 1.0 - (1.0 - f_a.cdf_at(offset_x + ui)) * (1.0 - f_b.cdf_at(offset_y + ui)))
        .collect();
    let n = u.len();
    let mut density = vec![0.0; n];
    for i in 0..n {
        let (lo, hi) = match i {
            0 => (0, 1),
            i if i == n - 1 => (n - 2, n - 1),
            i => (i - 1, i + 1),
        };
        density[i] = (cdf[hi] - cdf[lo]) / (u[hi] - u[lo]);
    }
    Ok(DiagonalCut {
        offset_x,
        offset_y,
        u,
        cdf,
        density,
    })
}

/// Joint CDF of the fastest of N disclosures at per-library times.
///
/// Computed as the survival product 1 − Π(1 − F_i(t_i)) and, up to 20
/// libraries, cross-checked against the inclusion–exclusion sum
/// Σ_{∅≠J} (−1)^{|J|+1} Π_{i∈J} F_i(t_i); disagreement beyond 1e-9 is an
/// internal inconsistency. Past 20 libraries the cross-check is skipped
/// with a warning and the product form alone is returned.
pub fn joint_cdf_n<C: CdfSource>(handles: &[&C], times: &[f64]) -> Result<f64, JointError> {
    if handles.is_empty() {
        return Err(JointError::Empty);
    }
    if handles.len() != times.len() {
        return Err(JointError::LengthMismatch {
            handles: handles.len(),
            times: times.len(),
        });
    }
    for &t in times {
        if t < 0.0 || t.is_nan() {
            return Err(JointError::DomainError { t });
        }
    }
    let values: Vec<f64> = handles
        .iter()
        .zip(times)
        .map(|(h, &t)| h.cdf_at(t))
        .collect();
    joint_cdf_values(&values)
}

/// The same computation over already-evaluated CDF values.
pub fn joint_cdf_values(values: &[f64]) -> Result<f64, JointError> {
    if values.is_empty() {
        return Err(JointError::Empty);
    }
    let product = survival_product(values);
    if values.len() > MAX_CROSS_CHECK_LIBRARIES {
        log::warn!(
            "{} libraries: skipping the 2^N inclusion–exclusion cross-check",
            values.len()
        );
        return Ok(product);
    }
    let incl_excl = inclusion_exclusion(values);
    if (product - incl_excl).abs() > CROSS_CHECK_TOLERANCE {
        return Err(JointError::InternalInconsistency {
            product,
            inclusion_exclusion: incl_excl,
        });
    }
    Ok(product)
}

/// Form (a): 1 − Π(1 − F_i).
pub fn survival_product(values: &[f64]) -> f64 {
    1.0 - values.iter().fold(1.0, |acc, &v| acc * (1.0 - v))
}

/// Form (b): inclusion–exclusion over all non-empty subsets.
pub fn inclusion_exclusion(values: &[f64]) -> f64 {
    let n = values.len();
    let mut sum = 0.0;
    for mask in 1u64..(1u64 << n) {
        let mut term = 1.0;
        for (i, &v) in values.iter().enumerate() {
            if mask & (1 << i) != 0 {
                term *= v;
            }
        }
        if mask.count_ones() % 2 == 1 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(v: f64) -> impl Fn(f64) -> f64 {
        move |_t: f64| v
    }

    #[test]
    fn half_half_joins_to_three_quarters() {
        let p = joint_cdf2(&flat(0.5), &flat(0.5), 10.0, 10.0).unwrap();
        assert!((p - 0.75).abs() < 1e-15);
    }

    #[test]
    fn zero_cdf_is_absorbing_identity() {
        let f = |t: f64| 1.0 - (-t / 100.0).exp();
        let p = joint_cdf2(&f, &flat(0.0), 42.0, 99.0).unwrap();
        assert!((p - f(42.0)).abs() < 1e-15);
    }

    #[test]
    fn negative_time_rejected() {
        assert!(matches!(
            joint_cdf2(&flat(0.5), &flat(0.5), -1.0, 0.0),
            Err(JointError::DomainError { .. })
        ));
    }

    #[test]
    fn symmetric_at_equal_times() {
        let f = |t: f64| 1.0 - (-t / 50.0).exp();
        let g = |t: f64| 1.0 - (-t / 200.0).exp();
        let t = 30.0;
        let ab = joint_cdf2(&f, &g, t, t).unwrap();
        let ba = joint_cdf2(&g, &f, t, t).unwrap();
        assert_eq!(ab, ba);
    }

    #[test]
    fn plane_origin_is_zero_when_cdfs_start_at_zero() {
        let f = |t: f64| 1.0 - (-t / 50.0).exp();
        let plane = probability_plane(&f, &f, 100.0, 100.0, 16).unwrap();
        assert_eq!(plane.values[0][0], 0.0);
        // corner dominates each single-library value there
        let corner = plane.values[15][15];
        assert!(corner >= f(100.0));
    }

    #[test]
    fn cut_starts_at_offset_value() {
        let f = |t: f64| 1.0 - (-t / 50.0).exp();
        let g = |t: f64| 1.0 - (-t / 80.0).exp();
        let cut = diagonal_cut(&f, &g, 28.0, 60.0, 90.0, 64).unwrap();
        let expected = 1.0 - (1.0 - f(28.0)) * (1.0 - g(60.0));
        assert!((cut.cdf[0] - expected).abs() < 1e-15);
        // nondecreasing for monotone inputs
        assert!(cut.cdf.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn n_one_is_the_cdf_itself() {
        let v = joint_cdf_values(&[0.42]).unwrap();
        assert!((v - 0.42).abs() < 1e-15);
    }

    #[test]
    fn n_two_matches_pairwise_form() {
        let a = 0.3;
        let b = 0.45;
        let pair = joint_cdf2(&flat(a), &flat(b), 1.0, 1.0).unwrap();
        let n = joint_cdf_values(&[a, b]).unwrap();
        assert!((pair - n).abs() < 1e-15);
    }

    #[test]
    fn both_forms_agree_on_five_values() {
        let values = [0.11, 0.52, 0.07, 0.93, 0.4];
        let a = survival_product(&values);
        let b = inclusion_exclusion(&values);
        assert!((a - b).abs() < 1e-12);
        assert_eq!(joint_cdf_values(&values).unwrap(), a);
    }

    #[test]
    fn length_mismatch_rejected() {
        let f = flat(0.5);
        let handles: Vec<&dyn Fn(f64) -> f64> = vec![];
        let _ = handles;
        assert!(matches!(
            joint_cdf_n(&[&f, &f], &[1.0]),
            Err(JointError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn many_libraries_skip_cross_check() {
        let values = vec![0.01; 25];
        let v = joint_cdf_values(&values).unwrap();
        assert!((v - survival_product(&values)).abs() < 1e-15);
    }
}
