use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::RngCore;

use netopt::autodiff::grad_check;
use netopt::beamforming::{BeamformingProblem, SystemDims};
use netopt::channels::ScenarioConfig;
use netopt::optim::{evaluate, restart_rng, train, AdamState, Optimizer, OptimizerConfig, Problem, Sgd, TrainConfig};
use netopt::transforms::{lin_eq_apply, lin_eq_factorize, LinearEquality};
use netopt::{NodeId, Result, Tape, Tensor, TransformSpec};

fn vec_of(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, len)
}

fn beam_problem(m: usize, k: usize, n: usize, seed: u64) -> BeamformingProblem {
    let ch = ScenarioConfig::new(SystemDims::new(m, k, n).unwrap(), seed)
        .generate()
        .unwrap()
        .channels;
    BeamformingProblem::new(ch)
}

fn grads_of<F>(build: F, params: &[Tensor]) -> Vec<Vec<f64>>
where
    F: Fn(&mut Tape, &[NodeId]) -> Result<NodeId>,
{
    let mut tape = Tape::new();
    let leaves: Vec<NodeId> = params.iter().map(|p| tape.leaf(p.clone(), true).unwrap()).collect();
    let loss = build(&mut tape, &leaves).unwrap();
    let grads = tape.backward(loss).unwrap();
    grads.into_ordered(&leaves).iter().map(|g| g.re()).collect()
}

// sum(exp(x) * y) and sum(sigmoid(x) * y^2)
fn f1(t: &mut Tape, l: &[NodeId]) -> Result<NodeId> {
    let e = t.exp(l[0])?;
    let p = t.mul(e, l[1])?;
    t.sum(p)
}

fn f2(t: &mut Tape, l: &[NodeId]) -> Result<NodeId> {
    let s = t.sigmoid(l[0])?;
    let y2 = t.mul(l[1], l[1])?;
    let p = t.mul(s, y2)?;
    t.sum(p)
}

fn random_ineq(rows: usize, cols: usize, seed: u64) -> (DMatrix<f64>, DVector<f64>) {
    let mut rng = restart_rng(seed, 0);
    let mut unit = || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0;
    let a = DMatrix::from_fn(rows, cols, |_, _| unit());
    let b = DVector::from_fn(rows, |_, _| unit());
    (a, b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gradient_is_linear_in_the_loss(
        x in vec_of(4), y in vec_of(4), a in -2.0f64..2.0, b in -2.0f64..2.0,
    ) {
        let params = [Tensor::vector(x), Tensor::vector(y)];
        let g1 = grads_of(f1, &params);
        let g2 = grads_of(f2, &params);
        let combined = grads_of(
            |t, l| {
                let l1 = f1(t, l)?;
                let l2 = f2(t, l)?;
                let s1 = t.scale(l1, a)?;
                let s2 = t.scale(l2, b)?;
                t.add(s1, s2)
            },
            &params,
        );
        for leaf in 0..2 {
            for i in 0..4 {
                let want = a * g1[leaf][i] + b * g2[leaf][i];
                prop_assert!((combined[leaf][i] - want).abs() <= 1e-12 * (1.0 + want.abs()));
            }
        }
    }

    #[test]
    fn beamforming_gradient_is_exact(seed in 0u64..10_000) {
        let problem = beam_problem(2, 2, 4, seed);
        let leaves = problem.random_init(&mut restart_rng(seed, 0));
        let err = grad_check(|t, l| problem.build_loss(t, l), &leaves, 1e-6).unwrap();
        prop_assert!(err < 1e-5, "relative error {}", err);
    }

    #[test]
    fn evaluation_is_deterministic(seed in 0u64..10_000) {
        let problem = beam_problem(3, 2, 8, seed);
        let leaves = problem.random_init(&mut restart_rng(seed, 1));
        let (l1, g1) = evaluate(&problem, &leaves).unwrap();
        let (l2, g2) = evaluate(&problem, &leaves).unwrap();
        prop_assert_eq!(l1.to_bits(), l2.to_bits());
        prop_assert_eq!(g1, g2);
    }

    #[test]
    fn simple_transforms_are_always_feasible(
        x in prop::collection::vec(-30.0f64..30.0, 6),
        y in prop::collection::vec(-30.0f64..30.0, 6),
        c in -30.0f64..30.0,
        budget in 0.01f64..100.0,
    ) {
        let v = Tensor::vector(x.clone());
        let m = Tensor::matrix(2, 3, x.clone()).unwrap();
        let mi = Tensor::matrix(2, 3, y.clone()).unwrap();
        let cases: Vec<(TransformSpec, Vec<Tensor>)> = vec![
            (TransformSpec::UnitModulus { len: 6 }, vec![v.clone()]),
            (TransformSpec::boxed(6, -1.5, 2.5).unwrap(), vec![Tensor::vector(y.iter().map(|t| t / 10.0).collect())]),
            (TransformSpec::sum_power(6, budget).unwrap(), vec![v.clone(), Tensor::scalar(c)]),
            (TransformSpec::frobenius_power(2, 3, budget, false).unwrap(), vec![m.clone(), mi.clone()]),
            (TransformSpec::frobenius_power(2, 3, budget, true).unwrap(), vec![m, mi, Tensor::scalar(c)]),
        ];
        for (spec, leaves) in cases {
            let out = spec.recover(&leaves).unwrap();
            prop_assert!(spec.is_feasible(&out), "{:?} -> {:?}", spec, out);
        }
    }

    #[test]
    fn linear_transforms_are_always_feasible(
        seed in 0u64..10_000,
        xp in vec_of(3),
        mup in vec_of(2),
    ) {
        let (a, b) = random_ineq(2, 5, seed);
        let eq = TransformSpec::linear_equality(&a, &b).unwrap();
        let x = eq.recover(&[Tensor::vector(xp.clone())]).unwrap();
        prop_assert!(eq.is_feasible(&x));

        let ineq = TransformSpec::linear_inequality(&a, &b).unwrap();
        let x = ineq.recover(&[Tensor::vector(xp), Tensor::vector(mup)]).unwrap();
        prop_assert!(ineq.is_feasible(&x));
    }

    #[test]
    fn adam_first_step_is_about_lr(g in prop::collection::vec(1e-3f64..1e3, 5), sign in any::<bool>(), lr in 1e-4f64..1.0) {
        let g: Vec<f64> = g.into_iter().map(|v| if sign { v } else { -v }).collect();
        let mut params = vec![Tensor::vector(vec![0.0; 5])];
        let mut adam = AdamState::new(lr, &params);
        adam.step(&mut params, &[Tensor::vector(g)]).unwrap();
        for x in params[0].re() {
            prop_assert!(x.abs() >= 0.9 * lr && x.abs() <= lr, "step {} at lr {}", x, lr);
        }
    }

    #[test]
    fn sgd_step_is_plain_descent(x in vec_of(7), g in vec_of(7), lr in 1e-4f64..2.0) {
        let mut params = vec![Tensor::vector(x.clone())];
        Sgd::new(lr).step(&mut params, &[Tensor::vector(g.clone())]).unwrap();
        for ((got, x), g) in params[0].re().iter().zip(&x).zip(&g) {
            prop_assert_eq!(*got, x - lr * g);
        }
    }
}

/// `||x - target||^2` over the affine set `A x = b`.
struct ProjectOntoPlane {
    eq: LinearEquality,
    target: Vec<f64>,
}

impl Problem for ProjectOntoPlane {
    fn leaf_shapes(&self) -> Vec<Vec<usize>> {
        vec![vec![self.eq.free_dim()]]
    }

    fn build_loss(&self, tape: &mut Tape, leaves: &[NodeId]) -> Result<NodeId> {
        let x = lin_eq_apply(tape, leaves[0], &self.eq)?;
        let t = tape.constant(Tensor::vector(self.target.clone()));
        let d = tape.sub(x, t)?;
        let sq = tape.mul(d, d)?;
        tape.sum(sq)
    }

    fn random_init(&self, _rng: &mut dyn RngCore) -> Vec<Tensor> {
        vec![Tensor::vector(vec![0.0; self.eq.free_dim()])]
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn gradient_descent_stays_on_the_plane(seed in 0u64..10_000, target in vec_of(6)) {
        let (a, b) = random_ineq(3, 6, seed);
        let eq = lin_eq_factorize(&a, &b).unwrap();
        let problem = ProjectOntoPlane { eq, target: target.clone() };
        let init = problem.random_init(&mut restart_rng(0, 0));
        let config = TrainConfig { optimizer: OptimizerConfig::Sgd { lr: 0.1 }, ..TrainConfig::default() };
        let result = train(&problem, init, &config).unwrap();
        let spec = TransformSpec::LinearEquality(problem.eq.clone());
        let x = spec.recover(&result.params).unwrap();
        let xv = DVector::from_vec(x.re());
        prop_assert!((&a * &xv - &b).amax() < 1e-6);

        // Closed-form projection: target - A^T (A A^T)^{-1} (A target - b).
        let t = DVector::from_vec(target);
        let lambda = (&a * a.transpose()).lu().solve(&(&a * &t - &b)).unwrap();
        let proj = &t - a.transpose() * lambda;
        prop_assert!((xv - proj).amax() < 1e-6);
    }
}
