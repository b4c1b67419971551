use super::{NodeId, Tape, Tensor};
use crate::error::{Error, Result};

/// Denominator floor for relative errors on near-zero gradient entries.
pub const GRAD_CHECK_FLOOR: f64 = 1e-6;

/// Compares reverse-mode gradients with central finite differences.
///
/// `build` records the loss on a fresh tape given one trainable leaf per
/// entry of `params`. Returns the maximum over all parameter elements of
/// `|analytic - numeric| / max(|analytic|, GRAD_CHECK_FLOOR)`; zero when
/// there is nothing to check.
pub fn grad_check<F>(build: F, params: &[Tensor], step: f64) -> Result<f64>
where
    F: Fn(&mut Tape, &[NodeId]) -> Result<NodeId>,
{
    grad_check_with_floor(build, params, step, GRAD_CHECK_FLOOR)
}

pub fn grad_check_with_floor<F>(build: F, params: &[Tensor], step: f64, floor: f64) -> Result<f64>
where
    F: Fn(&mut Tape, &[NodeId]) -> Result<NodeId>,
{
    if !(step > 0.0) {
        return Err(Error::InvalidConfig(format!("finite-difference step {step}")));
    }

    let eval = |values: &[Tensor]| -> Result<f64> {
        let mut tape = Tape::new();
        let leaves = values
            .iter()
            .map(|v| tape.leaf(v.clone(), false))
            .collect::<Result<Vec<_>>>()?;
        let loss = build(&mut tape, &leaves)?;
        let value = tape.value(loss)?.item().ok_or(Error::NonFinite("loss"))?.re;
        if !value.is_finite() {
            return Err(Error::NonFinite("loss"));
        }
        Ok(value)
    };

    let mut tape = Tape::new();
    let leaves = params
        .iter()
        .map(|p| tape.leaf(p.clone(), true))
        .collect::<Result<Vec<_>>>()?;
    let loss = build(&mut tape, &leaves)?;
    let loss_value = tape.value(loss)?.item().map(|z| z.re);
    if !loss_value.is_some_and(f64::is_finite) {
        return Err(Error::NonFinite("loss"));
    }
    let analytic = tape.backward(loss)?.into_ordered(&leaves);

    let mut worst = 0.0f64;
    let mut probe: Vec<Tensor> = params.to_vec();
    for (p, grad) in analytic.iter().enumerate() {
        let base = params[p].re();
        let g = grad.re();
        for e in 0..base.len() {
            let mut shifted = base.clone();
            shifted[e] = base[e] + step;
            probe[p] = Tensor::real(params[p].shape().to_vec(), shifted.clone())?;
            let up = eval(&probe)?;
            shifted[e] = base[e] - step;
            probe[p] = Tensor::real(params[p].shape().to_vec(), shifted)?;
            let down = eval(&probe)?;
            let numeric = (up - down) / (2.0 * step);
            let err = (g[e] - numeric).abs() / g[e].abs().max(floor);
            worst = worst.max(err);
        }
        probe[p] = params[p].clone();
    }
    Ok(worst)
}
