use std::f64::consts::PI;

use crate::point::Point;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    /// Bound on the neglected tail of the series.
    pub truncation_bound: f64,
}

/// Solution of `-Δu = 1` on the unit square with zero boundary values, from
/// the double sine series over odd indices `m, n ≤ 2 terms - 1`.
pub fn square_series_solution(x: Point, terms: usize) -> SeriesValue {
    let terms = terms.max(1);
    let mut value = 0.0;
    for i in 0..terms {
        let m = (2 * i + 1) as f64;
        let sm = (m * PI * x.x).sin();
        if sm == 0.0 {
            continue;
        }
        for j in 0..terms {
            let n = (2 * j + 1) as f64;
            value += 16.0 / (PI.powi(4) * m * n * (m * m + n * n)) * sm * (n * PI * x.y).sin();
        }
    }
    let big_m = (2 * terms - 1) as f64;
    // Σ_{m > M or n > M} 16 / (π⁴ m n (m² + n²)), bounded crudely.
    let truncation_bound = 8.0 * (big_m.ln() + 3.0) / (PI.powi(4) * big_m * big_m);
    SeriesValue { value, truncation_bound }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centre_value() {
        let v = square_series_solution(Point::new(0.5, 0.5), 200);
        assert!((v.value - 0.0736713532814).abs() < 1e-6, "{}", v.value);
    }

    #[test]
    fn boundary_and_symmetry() {
        assert_eq!(square_series_solution(Point::new(0.0, 0.3), 60).value, 0.0);
        let a = square_series_solution(Point::new(0.2, 0.7), 80).value;
        let b = square_series_solution(Point::new(0.7, 0.2), 80).value;
        assert!((a - b).abs() < 1e-14);
    }
}
