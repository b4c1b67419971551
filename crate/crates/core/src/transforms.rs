//! Differentiable reparameterizations that map unconstrained real leaves
//! onto a feasible set.
//!
//! Each transform is available as a graph builder operating on a [`Tape`]
//! and, bundled with its constants, as a [`TransformSpec`]. Applying a spec to
//! any finite leaf values yields a feasible point, so plain gradient descent
//! on the leaves never leaves the feasible region.

use nalgebra::{DMatrix, DVector};

use crate::autodiff::{NodeId, Tape, Tensor};
use crate::error::{Error, Result};

/// Relative singular-value cutoff used for rank detection.
pub const RANK_CUTOFF: f64 = 1e-10;

/// Residual tolerance for `|theta| = 1`.
pub const UNIT_MODULUS_TOL: f64 = 1e-12;
/// Residual tolerance for power budgets, relative to the budget.
pub const POWER_TOL: f64 = 1e-9;
/// Residual tolerance for `A x = b`, relative to `||b||`.
pub const LIN_EQ_TOL: f64 = 1e-10;

/// `x = xr + j xi`.
pub fn complex_pair(tape: &mut Tape, xr: NodeId, xi: NodeId) -> Result<NodeId> {
    tape.complex(xr, xi)
}

/// `theta_i = e^{j phi_i}`.
pub fn unit_modulus(tape: &mut Tape, phi: NodeId) -> Result<NodeId> {
    tape.cis(phi)
}

/// `x = a + (b - a) sigmoid(xp)`, strictly inside `(a, b)` for moderate `xp`.
pub fn box_transform(tape: &mut Tape, xp: NodeId, lower: f64, upper: f64) -> Result<NodeId> {
    check_box(lower, upper)?;
    let s = tape.sigmoid(xp)?;
    let scaled = tape.scale(s, upper - lower)?;
    let a = tape.scalar(lower);
    tape.add(scaled, a)
}

/// Nonnegative allocation summing to `budget * sigmoid(c)`.
///
/// The unnormalized shares are `e^{u_k}`, which keeps them positive and the
/// normalizing sum nonzero.
pub fn sum_power(tape: &mut Tape, u: NodeId, c: NodeId, budget: f64) -> Result<NodeId> {
    check_budget(budget)?;
    let shares = tape.exp(u)?;
    let total = tape.sum(shares)?;
    let frac = tape.div(shares, total)?;
    let level = tape.sigmoid(c)?;
    let level = tape.scale(level, budget)?;
    tape.mul(frac, level)
}

/// `W = W' / ||W'||_F * sqrt(budget)` with `W' = wr + j wi`.
///
/// With `scaler = Some(c)` the radiated power becomes `budget * sigmoid(c)`
/// instead of exactly `budget`.
pub fn frobenius_power(tape: &mut Tape, wr: NodeId, wi: NodeId, budget: f64, scaler: Option<NodeId>) -> Result<NodeId> {
    check_budget(budget)?;
    let w = tape.complex(wr, wi)?;
    let energy = tape.abs2(w)?;
    let energy = tape.sum(energy)?;
    let norm = tape.sqrt(energy)?;
    let unit = tape.div(w, norm)?;
    match scaler {
        None => tape.scale(unit, budget.sqrt()),
        Some(c) => {
            let level = tape.sigmoid(c)?;
            let level = tape.scale(level, budget)?;
            let amp = tape.sqrt(level)?;
            tape.mul(unit, amp)
        }
    }
}

/// Orthonormal nullspace basis and particular solution of `A x = b`.
#[derive(Clone, Debug)]
pub struct LinearEquality {
    a: DMatrix<f64>,
    b: DVector<f64>,
    null_basis: DMatrix<f64>,
    particular: DVector<f64>,
}

impl LinearEquality {
    pub fn null_basis(&self) -> &DMatrix<f64> {
        &self.null_basis
    }

    pub fn particular(&self) -> &DVector<f64> {
        &self.particular
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    /// Number of free coordinates, `K - M`.
    pub fn free_dim(&self) -> usize {
        self.null_basis.ncols()
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }
}

/// Factorizes a full-row-rank `A` (M x K, M < K) for the equality transform.
pub fn lin_eq_factorize(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<LinearEquality> {
    let (m, k) = a.shape();
    if m >= k {
        return Err(Error::InvalidTransform(format!(
            "linear equality needs fewer rows than columns, got {m}x{k}"
        )));
    }
    check_rhs(m, b)?;
    let (null_basis, pinv) = null_space_and_pinv(a)?;
    let particular = &pinv * b;
    Ok(LinearEquality {
        a: a.clone(),
        b: b.clone(),
        null_basis,
        particular,
    })
}

/// `x = F xp + x0`.
pub fn lin_eq_apply(tape: &mut Tape, xp: NodeId, eq: &LinearEquality) -> Result<NodeId> {
    let k = eq.dim();
    let moved = null_step(tape, xp, &eq.null_basis)?;
    let x0 = tape.constant(Tensor::vector(eq.particular.iter().copied().collect()));
    let x = tape.add(moved, x0)?;
    debug_assert_eq!(tape.value(x)?.numel(), k);
    Ok(x)
}

/// Constants for `A x <= b` with slack `mu = e^{mu'}`.
#[derive(Clone, Debug)]
pub struct LinearInequality {
    a: DMatrix<f64>,
    b: DVector<f64>,
    null_basis: DMatrix<f64>,
    pinv: DMatrix<f64>,
}

impl LinearInequality {
    pub fn new(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<Self> {
        let (m, k) = a.shape();
        if m > k {
            return Err(Error::InvalidTransform(format!(
                "linear inequality needs at most as many rows as columns, got {m}x{k}"
            )));
        }
        check_rhs(m, b)?;
        let (null_basis, pinv) = null_space_and_pinv(a)?;
        Ok(Self {
            a: a.clone(),
            b: b.clone(),
            null_basis,
            pinv,
        })
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn null_basis(&self) -> &DMatrix<f64> {
        &self.null_basis
    }

    pub fn free_dim(&self) -> usize {
        self.null_basis.ncols()
    }

    pub fn rows(&self) -> usize {
        self.a.nrows()
    }
}

/// `x = F xp + A^+ (b - e^{mup})`.
pub fn lin_ineq_apply(tape: &mut Tape, xp: NodeId, mup: NodeId, ineq: &LinearInequality) -> Result<NodeId> {
    let m = ineq.rows();
    let moved = null_step(tape, xp, &ineq.null_basis)?;
    let slack = tape.exp(mup)?;
    let b = tape.constant(Tensor::vector(ineq.b.iter().copied().collect()));
    let target = tape.sub(b, slack)?;
    let target = tape.reshape(target, &[m, 1])?;
    let pinv = tape.constant(to_tensor(&ineq.pinv));
    let offset = tape.matmul(pinv, target)?;
    let offset = tape.reshape(offset, &[ineq.a.ncols()])?;
    tape.add(moved, offset)
}

fn null_step(tape: &mut Tape, xp: NodeId, basis: &DMatrix<f64>) -> Result<NodeId> {
    let (k, free) = basis.shape();
    let xp_col = tape.reshape(xp, &[free, 1])?;
    let f = tape.constant(to_tensor(basis));
    let moved = tape.matmul(f, xp_col)?;
    tape.reshape(moved, &[k])
}

/// Nullspace basis (K x (K-M), orthonormal columns) and pseudoinverse
/// (K x M) of a full-row-rank M x K matrix.
fn null_space_and_pinv(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (m, k) = a.shape();
    // Pad to square so the decomposition yields a full right-singular basis.
    let mut padded = DMatrix::<f64>::zeros(k, k);
    padded.view_mut((0, 0), (m, k)).copy_from(a);
    let svd = padded.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let sigma = &svd.singular_values;

    let largest = sigma.iter().copied().fold(0.0, f64::max);
    let cutoff = RANK_CUTOFF * largest;
    let rank = sigma.iter().filter(|&&s| s > cutoff).count();
    if largest == 0.0 || rank < m {
        return Err(Error::RankDeficient { rank, expected: m });
    }

    let null_rows: Vec<usize> = (0..k).filter(|&i| sigma[i] <= cutoff).collect();
    let mut null_basis = DMatrix::<f64>::zeros(k, null_rows.len());
    for (col, &row) in null_rows.iter().enumerate() {
        null_basis.set_column(col, &v_t.row(row).transpose());
    }

    // pinv([A; 0]) = [pinv(A), 0]
    let mut pinv = DMatrix::<f64>::zeros(k, m);
    for i in (0..k).filter(|&i| sigma[i] > cutoff) {
        let v = v_t.row(i).transpose();
        let u_top = u.column(i).rows(0, m).transpose();
        pinv += (v * u_top) / sigma[i];
    }
    Ok((null_basis, pinv))
}

fn to_tensor(m: &DMatrix<f64>) -> Tensor {
    let (r, c) = m.shape();
    let data = (0..r).flat_map(|i| (0..c).map(move |j| m[(i, j)])).collect();
    Tensor::matrix(r, c, data).expect("shape from matrix")
}

fn check_box(lower: f64, upper: f64) -> Result<()> {
    if !(lower < upper) {
        return Err(Error::InvalidTransform(format!(
            "box needs lower < upper, got [{lower}, {upper}]"
        )));
    }
    Ok(())
}

fn check_budget(budget: f64) -> Result<()> {
    if !(budget > 0.0 && budget.is_finite()) {
        return Err(Error::InvalidTransform(format!("power budget {budget}")));
    }
    Ok(())
}

fn check_rhs(m: usize, b: &DVector<f64>) -> Result<()> {
    if b.len() != m {
        return Err(Error::ShapeMismatch {
            op: "linear constraint",
            lhs: vec![m],
            rhs: vec![b.len()],
        });
    }
    Ok(())
}

/// A constraint reparameterization bound to its constants.
#[derive(Clone, Debug)]
pub enum TransformSpec {
    Complex {
        shape: Vec<usize>,
    },
    UnitModulus {
        len: usize,
    },
    Box {
        len: usize,
        lower: f64,
        upper: f64,
    },
    SumPower {
        len: usize,
        budget: f64,
    },
    FrobeniusPower {
        rows: usize,
        cols: usize,
        budget: f64,
        scaler: bool,
    },
    LinearEquality(LinearEquality),
    LinearInequality(LinearInequality),
}

impl TransformSpec {
    pub fn boxed(len: usize, lower: f64, upper: f64) -> Result<Self> {
        check_box(lower, upper)?;
        Ok(Self::Box { len, lower, upper })
    }

    pub fn sum_power(len: usize, budget: f64) -> Result<Self> {
        check_budget(budget)?;
        Ok(Self::SumPower { len, budget })
    }

    pub fn frobenius_power(rows: usize, cols: usize, budget: f64, scaler: bool) -> Result<Self> {
        check_budget(budget)?;
        Ok(Self::FrobeniusPower {
            rows,
            cols,
            budget,
            scaler,
        })
    }

    pub fn linear_equality(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<Self> {
        lin_eq_factorize(a, b).map(Self::LinearEquality)
    }

    pub fn linear_inequality(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<Self> {
        LinearInequality::new(a, b).map(Self::LinearInequality)
    }

    /// Shapes of the unconstrained leaves, in the order `apply` expects.
    pub fn leaf_shapes(&self) -> Vec<Vec<usize>> {
        match self {
            Self::Complex { shape } => vec![shape.clone(), shape.clone()],
            Self::UnitModulus { len } | Self::Box { len, .. } => vec![vec![*len]],
            Self::SumPower { len, .. } => vec![vec![*len], vec![]],
            Self::FrobeniusPower { rows, cols, scaler, .. } => {
                let mut shapes = vec![vec![*rows, *cols], vec![*rows, *cols]];
                if *scaler {
                    shapes.push(vec![]);
                }
                shapes
            }
            Self::LinearEquality(eq) => vec![vec![eq.free_dim()]],
            Self::LinearInequality(ineq) => vec![vec![ineq.free_dim()], vec![ineq.rows()]],
        }
    }

    pub fn apply(&self, tape: &mut Tape, leaves: &[NodeId]) -> Result<NodeId> {
        let expected = self.leaf_shapes().len();
        if leaves.len() != expected {
            return Err(Error::InvalidTransform(format!(
                "expected {expected} leaves, got {}",
                leaves.len()
            )));
        }
        match self {
            Self::Complex { .. } => complex_pair(tape, leaves[0], leaves[1]),
            Self::UnitModulus { .. } => unit_modulus(tape, leaves[0]),
            Self::Box { lower, upper, .. } => box_transform(tape, leaves[0], *lower, *upper),
            Self::SumPower { budget, .. } => sum_power(tape, leaves[0], leaves[1], *budget),
            Self::FrobeniusPower { budget, scaler, .. } => {
                frobenius_power(tape, leaves[0], leaves[1], *budget, scaler.then(|| leaves[2]))
            }
            Self::LinearEquality(eq) => lin_eq_apply(tape, leaves[0], eq),
            Self::LinearInequality(ineq) => lin_ineq_apply(tape, leaves[0], leaves[1], ineq),
        }
    }

    /// Evaluates the transform on final leaf values, off any training tape.
    pub fn recover(&self, leaves: &[Tensor]) -> Result<Tensor> {
        let mut tape = Tape::new();
        let ids: Vec<NodeId> = leaves.iter().map(|t| tape.constant(t.clone())).collect();
        let out = self.apply(&mut tape, &ids)?;
        Ok(tape.value(out)?.clone())
    }

    /// Whether `x` satisfies this constraint within the per-kind tolerance.
    pub fn is_feasible(&self, x: &Tensor) -> bool {
        let data = x.data();
        match self {
            Self::Complex { .. } => x.all_finite(),
            Self::UnitModulus { .. } => data.iter().all(|z| (z.norm() - 1.0).abs() < UNIT_MODULUS_TOL),
            Self::Box { lower, upper, .. } => data.iter().all(|z| z.re > *lower && z.re < *upper),
            Self::SumPower { budget, .. } => {
                let total: f64 = data.iter().map(|z| z.re).sum();
                data.iter().all(|z| z.re > 0.0) && total <= budget * (1.0 + POWER_TOL)
            }
            Self::FrobeniusPower { budget, scaler, .. } => {
                let power: f64 = data.iter().map(|z| z.norm_sqr()).sum();
                if *scaler {
                    power <= budget * (1.0 + POWER_TOL)
                } else {
                    (power - budget).abs() < POWER_TOL * budget
                }
            }
            Self::LinearEquality(eq) => {
                let xv = DVector::from_iterator(data.len(), data.iter().map(|z| z.re));
                let resid = (&eq.a * xv - &eq.b).amax();
                resid <= LIN_EQ_TOL * eq.b.norm()
            }
            Self::LinearInequality(ineq) => {
                let xv = DVector::from_iterator(data.len(), data.iter().map(|z| z.re));
                let ax = &ineq.a * xv;
                ax.iter().zip(ineq.b.iter()).all(|(l, r)| l < r)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use num_complex::Complex64;

    use super::*;

    fn eval<F>(leaves: Vec<Tensor>, f: F) -> Tensor
    where
        F: FnOnce(&mut Tape, &[NodeId]) -> Result<NodeId>,
    {
        let mut tape = Tape::new();
        let ids: Vec<_> = leaves.into_iter().map(|t| tape.constant(t)).collect();
        let out = f(&mut tape, &ids).unwrap();
        tape.value(out).unwrap().clone()
    }

    #[test]
    fn complex_pair_examples() {
        let x = eval(
            vec![Tensor::vector(vec![1.0, 0.0]), Tensor::vector(vec![0.0, -2.0])],
            |t, l| complex_pair(t, l[0], l[1]),
        );
        assert_eq!(x.data(), &[Complex64::new(1.0, 0.0), Complex64::new(0.0, -2.0)]);
        assert_eq!(x.re(), vec![1.0, 0.0]);
        assert_eq!(x.im(), vec![0.0, -2.0]);
    }

    #[test]
    fn complex_pair_shape_mismatch() {
        let mut tape = Tape::new();
        let a = tape.constant(Tensor::vector(vec![1.0]));
        let b = tape.constant(Tensor::vector(vec![1.0, 2.0]));
        assert!(complex_pair(&mut tape, a, b).is_err());
    }

    #[test]
    fn unit_modulus_examples() {
        let x = eval(vec![Tensor::vector(vec![0.0])], |t, l| unit_modulus(t, l[0]));
        assert_eq!(x.data()[0], Complex64::new(1.0, 0.0));

        let phi: Vec<f64> = (0..64).map(|i| 0.37 * i as f64 - 9.0).collect();
        let shifted: Vec<f64> = phi.iter().map(|p| p + 2.0 * PI).collect();
        let a = eval(vec![Tensor::vector(phi)], |t, l| unit_modulus(t, l[0]));
        let b = eval(vec![Tensor::vector(shifted)], |t, l| unit_modulus(t, l[0]));
        assert!(a.data().iter().all(|z| (z.norm() - 1.0).abs() < 1e-14));
        assert!(a.max_abs_diff(&b) < 1e-14);
    }

    #[test]
    fn box_examples() {
        let x = eval(vec![Tensor::scalar(0.0)], |t, l| box_transform(t, l[0], 0.0, 2.0));
        assert_eq!(x.re(), vec![1.0]);
        let x = eval(vec![Tensor::scalar(0.0)], |t, l| box_transform(t, l[0], -1.0, 1.0));
        assert_eq!(x.re(), vec![0.0]);
        let x = eval(vec![Tensor::scalar(800.0)], |t, l| box_transform(t, l[0], 0.0, 2.0));
        assert_eq!(x.re(), vec![2.0]);
        let mut tape = Tape::new();
        let xp = tape.scalar(0.0);
        assert!(box_transform(&mut tape, xp, 1.0, 1.0).is_err());
        assert!(TransformSpec::boxed(1, 2.0, 1.0).is_err());
    }

    #[test]
    fn box_is_monotone() {
        let grid: Vec<f64> = (-50..=50).map(|i| i as f64 * 0.2).collect();
        let x = eval(vec![Tensor::vector(grid)], |t, l| box_transform(t, l[0], -3.0, 5.0));
        let v = x.re();
        assert!(v.windows(2).all(|w| w[0] < w[1]));
        assert!(v.iter().all(|&x| x > -3.0 && x < 5.0));
    }

    #[test]
    fn sum_power_examples() {
        let x = eval(vec![Tensor::vector(vec![0.0, 0.0]), Tensor::scalar(0.0)], |t, l| {
            sum_power(t, l[0], l[1], 2.0)
        });
        assert_eq!(x.re(), vec![0.5, 0.5]);
        let x = eval(vec![Tensor::vector(vec![0.0, 0.0]), Tensor::scalar(60.0)], |t, l| {
            sum_power(t, l[0], l[1], 2.0)
        });
        assert!((x.re()[0] - 1.0).abs() < 1e-15 && (x.re()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn frobenius_power_examples() {
        let wr = Tensor::matrix(2, 2, vec![2.0, 0.0, 0.0, 0.0]).unwrap();
        let wi = Tensor::zeros(vec![2, 2], crate::autodiff::DType::Real);
        let w = eval(vec![wr.clone(), wi.clone()], |t, l| {
            frobenius_power(t, l[0], l[1], 4.0, None)
        });
        assert_eq!(w.re(), vec![2.0, 0.0, 0.0, 0.0]);
        assert_eq!(w.im(), vec![0.0; 4]);

        let zero = Tensor::zeros(vec![2, 2], crate::autodiff::DType::Real);
        let mut tape = Tape::new();
        let a = tape.constant(zero.clone());
        let b = tape.constant(zero);
        assert!(matches!(
            frobenius_power(&mut tape, a, b, 1.0, None),
            Err(Error::DivisionByZero { .. })
        ));
    }

    #[test]
    fn frobenius_scaler_sets_power_level() {
        let wr = Tensor::matrix(1, 2, vec![1.0, -3.0]).unwrap();
        let wi = Tensor::matrix(1, 2, vec![0.5, 2.0]).unwrap();
        let w = eval(vec![wr, wi, Tensor::scalar(0.0)], |t, l| {
            frobenius_power(t, l[0], l[1], 6.0, Some(l[2]))
        });
        let p: f64 = w.data().iter().map(|z| z.norm_sqr()).sum();
        assert!((p - 3.0).abs() < 1e-12);
    }

    #[test]
    fn lin_eq_single_row() {
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let b = DVector::from_vec(vec![1.0]);
        let eq = lin_eq_factorize(&a, &b).unwrap();
        assert!((eq.particular()[0] - 0.5).abs() < 1e-15);
        assert!((eq.particular()[1] - 0.5).abs() < 1e-15);
        assert_eq!(eq.free_dim(), 1);
        let f = eq.null_basis();
        assert!((&a * f).amax() < 1e-12);
        // F is +-[1, -1]/sqrt(2); only the direction is fixed
        assert!((f[(0, 0)].abs() - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((f[(0, 0)] + f[(1, 0)]).abs() < 1e-12);
    }

    #[test]
    fn lin_eq_identity_block() {
        let a = DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let b = DVector::from_vec(vec![3.0, -7.5]);
        let eq = lin_eq_factorize(&a, &b).unwrap();
        let x0 = eq.particular();
        for (got, want) in x0.iter().zip([3.0, -7.5, 0.0, 0.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        let f = eq.null_basis();
        assert!((f.transpose() * f - DMatrix::identity(2, 2)).amax() < 1e-12);
    }

    #[test]
    fn lin_eq_apply_examples() {
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let b = DVector::from_vec(vec![1.0]);
        let spec = TransformSpec::linear_equality(&a, &b).unwrap();
        let x = spec.recover(&[Tensor::vector(vec![0.0])]).unwrap();
        assert!((x.re()[0] - 0.5).abs() < 1e-15);
        let x1 = spec.recover(&[Tensor::vector(vec![1.7])]).unwrap();
        let x2 = spec.recover(&[Tensor::vector(vec![-0.4])]).unwrap();
        assert!((x1.re()[0] + x1.re()[1] - 1.0).abs() < 1e-12);
        assert!(x1.max_abs_diff(&x2) > 1.0);
    }

    #[test]
    fn lin_eq_rejects_bad_inputs() {
        let square = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        assert!(lin_eq_factorize(&square, &DVector::from_vec(vec![1.0, 1.0])).is_err());
        let deficient = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        assert!(matches!(
            lin_eq_factorize(&deficient, &DVector::from_vec(vec![1.0, 2.0])),
            Err(Error::RankDeficient { rank: 1, expected: 2 })
        ));
    }

    #[test]
    fn lin_ineq_scalar_case() {
        let a = DMatrix::from_row_slice(1, 1, &[1.0]);
        let b = DVector::from_vec(vec![1.0]);
        let spec = TransformSpec::linear_inequality(&a, &b).unwrap();
        assert_eq!(spec.leaf_shapes(), vec![vec![0], vec![1]]);
        let x = spec
            .recover(&[Tensor::vector(vec![]), Tensor::vector(vec![0.0])])
            .unwrap();
        assert!(x.re()[0].abs() < 1e-15);
        let near = spec
            .recover(&[Tensor::vector(vec![]), Tensor::vector(vec![-30.0])])
            .unwrap();
        assert!(near.re()[0] < 1.0 && near.re()[0] > 1.0 - 1e-12);
    }

    #[test]
    fn recover_matches_forward_map() {
        let spec = TransformSpec::UnitModulus { len: 3 };
        let phi = Tensor::vector(vec![0.2, -1.0, 3.0]);
        let theta = spec.recover(&[phi]).unwrap();
        for (z, p) in theta.data().iter().zip([0.2, -1.0, 3.0]) {
            assert_eq!(*z, Complex64::cis(p));
        }
    }

    #[test]
    fn apply_checks_leaf_count() {
        let spec = TransformSpec::SumPower { len: 2, budget: 1.0 };
        let mut tape = Tape::new();
        let u = tape.constant(Tensor::vector(vec![0.0, 0.0]));
        assert!(spec.apply(&mut tape, &[u]).is_err());
    }
}
