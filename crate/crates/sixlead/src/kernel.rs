//! Feature matrix for the convex training program.
//!
//! For scalar inputs the matrix pairs every training sample with every
//! candidate breakpoint twice: once as a rising ramp `(x_i - x_j)_+` and
//! once as a falling ramp `(x_j - x_i)_+`. A sparse weight vector over
//! these columns is exactly a two-layer ReLU network with breakpoints at
//! training values, which is what makes the learned model auditable.
//!
//! [`kappa`] generalizes the column entry to inputs of dimension up to 4;
//! it exists as a tested primitive, not as a training path.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("training input must be non-empty")]
    EmptyInput,
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("kappa supports dimensions 1..=4, got {0}")]
    UnsupportedDimension(usize),
    #[error("expected {expected} direction vectors of length {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("degenerate direction set: wedge has zero L1 norm")]
    DegenerateWedge,
}

/// Which side of its breakpoint a ramp column activates on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// `(x - breakpoint)_+`, active above the breakpoint.
    Rising,
    /// `(breakpoint - x)_+`, active below the breakpoint.
    Falling,
}

impl Orientation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Orientation::Rising => "rising",
            Orientation::Falling => "falling",
        }
    }
}

/// Dense ramp-feature matrix bound to its breakpoint vector.
///
/// Rows follow the original training order (duplicates kept); columns are
/// `[rising @ bp 0..n, falling @ bp 0..n]` over the `n` unique breakpoints
/// in ascending order. Deduplication keeps the optimum unique-enough for
/// reproducible sparsity patterns; sorting fixes the column order.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    breakpoints: Vec<f64>,
    rows: usize,
    entries: Vec<f64>, // row-major, rows x 2*breakpoints.len()
}

impl KernelMatrix {
    /// Number of matrix rows (original sample count, duplicates included).
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns, `2 * breakpoints().len()`.
    pub fn cols(&self) -> usize {
        2 * self.breakpoints.len()
    }

    /// Unique training values in ascending order.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.cols() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let c = self.cols();
        &self.entries[row * c..(row + 1) * c]
    }

    /// Maps a column index to its breakpoint index and orientation.
    pub fn column_meta(&self, col: usize) -> (usize, Orientation) {
        let n = self.breakpoints.len();
        if col < n {
            (col, Orientation::Rising)
        } else {
            (col - n, Orientation::Falling)
        }
    }

    /// `K z` for a weight vector over the columns.
    pub fn mul_vec(&self, z: &[f64]) -> Vec<f64> {
        assert_eq!(z.len(), self.cols(), "weight vector length mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(z).map(|(k, zj)| k * zj).sum::<f64>())
            .collect()
    }

    /// `K^T r` for a vector over the rows.
    pub fn mul_transpose_vec(&self, r: &[f64]) -> Vec<f64> {
        assert_eq!(r.len(), self.rows, "row vector length mismatch");
        let mut out = vec![0.0; self.cols()];
        for (i, ri) in r.iter().enumerate() {
            for (o, k) in out.iter_mut().zip(self.row(i)) {
                *o += k * ri;
            }
        }
        out
    }
}

/// Builds the ramp matrix from training inputs.
///
/// Breakpoints are the unique input values sorted ascending; rows keep the
/// original order and multiplicity, so duplicated inputs yield identical
/// rows over a deduplicated column set.
pub fn build_k(x_train: &[f64]) -> Result<KernelMatrix, KernelError> {
    if x_train.is_empty() {
        return Err(KernelError::EmptyInput);
    }
    if let Some(idx) = x_train.iter().position(|v| !v.is_finite()) {
        return Err(KernelError::NonFinite(idx));
    }

    let mut breakpoints = x_train.to_vec();
    breakpoints.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    breakpoints.dedup();

    let n = breakpoints.len();
    let rows = x_train.len();
    let mut entries = vec![0.0; rows * 2 * n];
    for (i, &xi) in x_train.iter().enumerate() {
        let row = &mut entries[i * 2 * n..(i + 1) * 2 * n];
        for (j, &bp) in breakpoints.iter().enumerate() {
            row[j] = (xi - bp).max(0.0);
            row[j + n] = (bp - xi).max(0.0);
        }
    }

    Ok(KernelMatrix {
        breakpoints,
        rows,
        entries,
    })
}

/// Ramp feature for a d-dimensional input: the positive part of the signed
/// parallelotope volume spanned by `x` and the direction vectors, divided
/// by the L1 norm of the directions' wedge.
///
/// The signed volume is the determinant of the matrix with rows
/// `x, u_1, .., u_{d-1}`; the wedge norm is the sum of absolute
/// (d-1)x(d-1) cofactors of the direction rows. In dimension 1 there are
/// no direction vectors, the wedge is the empty product with norm 1, and
/// the feature degenerates to `(x)_+`.
pub fn kappa(x: &[f64], directions: &[Vec<f64>]) -> Result<f64, KernelError> {
    let d = x.len();
    if d == 0 || d > 4 {
        return Err(KernelError::UnsupportedDimension(d));
    }
    if directions.len() != d - 1 || directions.iter().any(|u| u.len() != d) {
        return Err(KernelError::DimensionMismatch {
            expected: d - 1,
            found: directions.len(),
        });
    }
    if let Some(idx) = x.iter().position(|v| !v.is_finite()) {
        return Err(KernelError::NonFinite(idx));
    }
    for u in directions {
        if let Some(idx) = u.iter().position(|v| !v.is_finite()) {
            return Err(KernelError::NonFinite(idx));
        }
    }

    let wedge_l1 = if d == 1 {
        1.0
    } else {
        // Sum of absolute maximal minors of the (d-1) x d direction matrix.
        let mut acc = 0.0;
        let mut minor = vec![0.0; (d - 1) * (d - 1)];
        for drop_col in 0..d {
            let mut w = 0;
            for u in directions {
                for (c, &val) in u.iter().enumerate() {
                    if c != drop_col {
                        minor[w] = val;
                        w += 1;
                    }
                }
            }
            acc += det_small(&minor, d - 1).abs();
        }
        acc
    };
    if wedge_l1 == 0.0 {
        return Err(KernelError::DegenerateWedge);
    }

    let mut square = Vec::with_capacity(d * d);
    square.extend_from_slice(x);
    for u in directions {
        square.extend_from_slice(u);
    }
    let signed_volume = det_small(&square, d);

    Ok(signed_volume.max(0.0) / wedge_l1)
}

/// Determinant of a row-major n x n matrix, n <= 4, by cofactor expansion.
fn det_small(m: &[f64], n: usize) -> f64 {
    debug_assert_eq!(m.len(), n * n);
    match n {
        0 => 1.0,
        1 => m[0],
        2 => m[0] * m[3] - m[1] * m[2],
        3 => {
            m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
                + m[2] * (m[3] * m[7] - m[4] * m[6])
        }
        _ => {
            let mut acc = 0.0;
            let mut minor = [0.0; 9];
            for col in 0..n {
                let mut w = 0;
                for r in 1..n {
                    for c in 0..n {
                        if c != col {
                            minor[w] = m[r * n + c];
                            w += 1;
                        }
                    }
                }
                let term = m[col] * det_small(&minor[..(n - 1) * (n - 1)], n - 1);
                acc += if col % 2 == 0 { term } else { -term };
            }
            acc
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn three_point_matrix_matches_hand_evaluation() {
        let k = build_k(&[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(k.rows(), 3);
        assert_eq!(k.cols(), 6);
        let rising: Vec<Vec<f64>> = (0..3).map(|i| k.row(i)[..3].to_vec()).collect();
        let falling: Vec<Vec<f64>> = (0..3).map(|i| k.row(i)[3..].to_vec()).collect();
        assert_eq!(
            rising,
            vec![
                vec![0.0, 0.0, 0.0],
                vec![1.0, 0.0, 0.0],
                vec![2.0, 1.0, 0.0]
            ]
        );
        assert_eq!(
            falling,
            vec![
                vec![0.0, 1.0, 2.0],
                vec![0.0, 0.0, 1.0],
                vec![0.0, 0.0, 0.0]
            ]
        );
    }

    #[test]
    fn single_point_gives_zero_pair() {
        let k = build_k(&[3.7]).unwrap();
        assert_eq!(k.rows(), 1);
        assert_eq!(k.cols(), 2);
        assert_eq!(k.row(0), &[0.0, 0.0]);
    }

    #[test]
    fn duplicates_share_breakpoint_but_keep_rows() {
        let k = build_k(&[1.0, 1.0, 2.0]).unwrap();
        assert_eq!(k.breakpoints(), &[1.0, 2.0]);
        assert_eq!(k.rows(), 3);
        assert_eq!(k.cols(), 4);
        assert_eq!(k.row(0), k.row(1));
        assert_eq!(k.row(2), &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn non_finite_input_rejected() {
        assert!(matches!(
            build_k(&[0.0, f64::INFINITY]).unwrap_err(),
            KernelError::NonFinite(1)
        ));
        assert!(matches!(build_k(&[]).unwrap_err(), KernelError::EmptyInput));
    }

    #[test]
    fn column_meta_maps_both_families() {
        let k = build_k(&[0.0, 1.0]).unwrap();
        assert_eq!(k.column_meta(0), (0, Orientation::Rising));
        assert_eq!(k.column_meta(1), (1, Orientation::Rising));
        assert_eq!(k.column_meta(2), (0, Orientation::Falling));
        assert_eq!(k.column_meta(3), (1, Orientation::Falling));
    }

    #[test]
    fn kappa_two_dimensional_examples() {
        assert_eq!(kappa(&[1.0, 0.0], &[vec![0.0, 1.0]]).unwrap(), 1.0);
        // negative signed volume clamps to zero
        assert_eq!(kappa(&[0.0, 1.0], &[vec![1.0, 0.0]]).unwrap(), 0.0);
    }

    #[test]
    fn kappa_three_dimensional_example() {
        let v = kappa(
            &[1.0, 0.0, 0.0],
            &[vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
        )
        .unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn kappa_four_dimensional_basis_case() {
        let x = vec![1.0, 0.0, 0.0, 0.0];
        let us = vec![
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
        ];
        assert_eq!(kappa(&x, &us).unwrap(), 1.0);
        // flipping one direction flips the sign; positive part clamps
        let us_flipped = vec![
            vec![0.0, -1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
        ];
        assert_eq!(kappa(&x, &us_flipped).unwrap(), 0.0);
    }

    #[test]
    fn kappa_rejects_degenerate_directions() {
        assert!(matches!(
            kappa(&[1.0, 0.0], &[vec![0.0, 0.0]]).unwrap_err(),
            KernelError::DegenerateWedge
        ));
        assert!(matches!(
            kappa(&[1.0, 0.0, 0.0, 0.0, 0.0], &[]).unwrap_err(),
            KernelError::UnsupportedDimension(5)
        ));
    }

    #[test]
    fn kappa_one_dimensional_agrees_with_matrix_columns() {
        let x = [0.4, -1.2, 2.5, 0.0];
        let k = build_k(&x).unwrap();
        let n = k.breakpoints().len();
        for (i, &xi) in x.iter().enumerate() {
            for (j, &bp) in k.breakpoints().iter().enumerate() {
                let rising = kappa(&[xi - bp], &[]).unwrap();
                let falling = kappa(&[bp - xi], &[]).unwrap();
                assert_eq!(k.entry(i, j), rising);
                assert_eq!(k.entry(i, j + n), falling);
            }
        }
    }

    fn check_invariants(x: &[f64]) {
        let k = build_k(x).unwrap();
        let n = k.breakpoints().len();
        for (i, &xi) in x.iter().enumerate() {
            for j in 0..n {
                let r = k.entry(i, j);
                let f = k.entry(i, j + n);
                assert!(r >= 0.0 && f >= 0.0);
                assert_eq!(r * f, 0.0);
                assert_eq!(r - f, xi - k.breakpoints()[j]);
            }
        }
    }

    proptest! {
        #[test]
        fn matrix_invariants_hold(x in proptest::collection::vec(-100.0f64..100.0, 1..40)) {
            check_invariants(&x);
        }

        #[test]
        fn kappa_positive_homogeneity(
            x in proptest::collection::vec(-10.0f64..10.0, 2..=4),
            alpha in 0.01f64..50.0,
        ) {
            let d = x.len();
            let mut us = Vec::new();
            for i in 0..d - 1 {
                let mut u = vec![0.0; d];
                u[i] = 1.0;
                u[(i + 1) % d] = 0.5;
                us.push(u);
            }
            let base = kappa(&x, &us).unwrap();
            let scaled_x: Vec<f64> = x.iter().map(|v| v * alpha).collect();
            let scaled = kappa(&scaled_x, &us).unwrap();
            prop_assert!((scaled - alpha * base).abs() <= 1e-9 * (1.0 + base.abs() * alpha));
        }
    }

    #[test]
    fn kappa_vanishes_on_direction_span() {
        // x in span(u1, u2) has zero parallelotope volume
        let u1 = vec![1.0, 2.0, 0.5];
        let u2 = vec![-1.0, 0.5, 3.0];
        let x: Vec<f64> = (0..3).map(|i| 2.0 * u1[i] - 0.7 * u2[i]).collect();
        let v = kappa(&x, &[u1, u2]).unwrap();
        assert!(v.abs() < 1e-12, "volume {v}");
    }
}
