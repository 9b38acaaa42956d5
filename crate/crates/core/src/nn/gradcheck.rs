use super::{Mlp, Result};

/// Largest relative disagreement between analytic and central-difference
/// gradients, measured as `|analytic - numeric| / max(1, |numeric|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    pub max_param_error: f64,
    pub max_input_error: f64,
    pub params_checked: usize,
}

impl GradCheckReport {
    pub fn max_relative_error(&self) -> f64 {
        self.max_param_error.max(self.max_input_error)
    }
}

fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / numeric.abs().max(1.0)
}

/// Compares backprop against central differences of step `h`.
///
/// The loss is `sum_x probe(net(x)).0`; `probe` also returns the gradient of
/// its value with respect to the network output.
pub fn gradient_check<P>(net: &Mlp, inputs: &[Vec<f64>], probe: P, h: f64) -> Result<GradCheckReport>
where
    P: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let mut work = net.clone();
    work.zero_grad();
    let mut analytic_inputs = Vec::with_capacity(inputs.len());
    for x in inputs {
        let out = work.forward(x)?;
        let (_, upstream) = probe(&out);
        analytic_inputs.push(work.backward(&upstream)?);
    }
    let analytic = work.grads();

    let loss = |m: &Mlp| -> Result<f64> {
        inputs
            .iter()
            .map(|x| m.predict(x).map(|out| probe(&out).0))
            .sum()
    };

    let base = net.params();
    let mut probe_net = net.clone();
    let mut shifted = base.clone();
    let mut max_param_error = 0.0f64;
    for k in 0..base.len() {
        shifted[k] = base[k] + h;
        probe_net.set_params(&shifted)?;
        let up = loss(&probe_net)?;
        shifted[k] = base[k] - h;
        probe_net.set_params(&shifted)?;
        let down = loss(&probe_net)?;
        shifted[k] = base[k];
        let numeric = (up - down) / (2.0 * h);
        max_param_error = max_param_error.max(rel_err(analytic[k], numeric));
    }

    let mut max_input_error = 0.0f64;
    for (x, grad) in inputs.iter().zip(&analytic_inputs) {
        let mut xs = x.clone();
        for j in 0..x.len() {
            xs[j] = x[j] + h;
            let up = probe(&net.predict(&xs)?).0;
            xs[j] = x[j] - h;
            let down = probe(&net.predict(&xs)?).0;
            xs[j] = x[j];
            let numeric = (up - down) / (2.0 * h);
            max_input_error = max_input_error.max(rel_err(grad[j], numeric));
        }
    }

    Ok(GradCheckReport {
        max_param_error,
        max_input_error,
        params_checked: base.len(),
    })
}
