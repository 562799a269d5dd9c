//! LSTM forward pass, loss and exact backpropagation through time.
//!
//! ```text
//! x_t = W_xv[:, code(q_t, a_t)]
//! i_t = σ(W_i x_t + U_i h_{t-1} + b_i)      (likewise f_t, o_t)
//! g_t = tanh(W_c x_t + U_c h_{t-1} + b_c)
//! c_t = f_t ⊙ c_{t-1} + i_t ⊙ g_t
//! h_t = o_t ⊙ tanh(c_t)
//! y_t = σ(W_yh (m_t ⊙ h_t) + b_y)           m_t: inverted dropout mask
//! ```
//!
//! The prediction for step `t + 1` is `y_t[item_{t+1}]`.

use rand::{Rng, RngCore};

use super::params::{Dims, ParamSet};
use crate::error::{Error, Result};
use crate::graph::Laplacian;
use crate::matrix::{axpy, dot, sigmoid};

/// Probabilities are clamped to `[PROB_CLAMP, 1 - PROB_CLAMP]` inside the
/// cross-entropy.
pub const PROB_CLAMP: f64 = 1e-7;

/// One `(item, assessment)` step.
pub type Step = (usize, u8);

pub enum Mode<'a> {
    Eval,
    /// Inverted dropout with probability `dropout` on `h_t` before the
    /// output projection.
    Train {
        dropout: f64,
        rng: &'a mut dyn RngCore,
    },
}

/// Activations of one LSTM cell step.
#[derive(Debug, Clone, PartialEq)]
pub struct CellState {
    pub i: Vec<f64>,
    pub f: Vec<f64>,
    pub o: Vec<f64>,
    /// Cell candidate `tanh(W_c x + U_c h + b_c)`.
    pub g: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
    pub h: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepTrace {
    pub code: usize,
    pub x: Vec<f64>,
    pub cell: CellState,
    /// Scaled dropout mask (`0` or `1/(1-p)`), absent in eval mode or when
    /// `p = 0`.
    pub mask: Option<Vec<f64>>,
}

impl StepTrace {
    /// `h_t` as seen by the output layer.
    fn h_out(&self) -> Vec<f64> {
        match &self.mask {
            Some(m) => self.cell.h.iter().zip(m).map(|(h, m)| h * m).collect(),
            None => self.cell.h.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    pub steps: Vec<StepTrace>,
    /// Full output vector per step.
    pub y: Vec<Vec<f64>>,
}

impl ForwardTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Loss components for one sequence.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossTerms {
    /// Mean binary cross-entropy over prediction steps.
    pub data: f64,
    /// Mean `y_tᵀ L y_t` over the same steps (unweighted).
    pub smoothness: f64,
    pub lambda: f64,
}

impl LossTerms {
    pub fn penalty(&self) -> f64 {
        self.lambda * self.smoothness
    }

    pub fn total(&self) -> f64 {
        self.data + self.penalty()
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

pub fn lstm_step(p: &ParamSet, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> Result<CellState> {
    let Dims { k, h, .. } = p.dims();
    check_len(k, x.len())?;
    check_len(h, h_prev.len())?;
    check_len(h, c_prev.len())?;
    let mut pre: [Vec<f64>; 4] = std::array::from_fn(|g| p.b[g].as_slice().to_vec());
    for (g, z) in pre.iter_mut().enumerate() {
        p.w[g].gemv_acc(x, z);
        p.u[g].gemv_acc(h_prev, z);
    }
    let [zi, zf, zo, zc] = pre;
    let i: Vec<f64> = zi.into_iter().map(sigmoid).collect();
    let f: Vec<f64> = zf.into_iter().map(sigmoid).collect();
    let o: Vec<f64> = zo.into_iter().map(sigmoid).collect();
    let g: Vec<f64> = zc.into_iter().map(f64::tanh).collect();
    let c: Vec<f64> = (0..h).map(|j| f[j] * c_prev[j] + i[j] * g[j]).collect();
    let tanh_c: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
    let hv = (0..h).map(|j| o[j] * tanh_c[j]).collect();
    Ok(CellState {
        i,
        f,
        o,
        g,
        c,
        tanh_c,
        h: hv,
    })
}

/// Runs the recurrence only (no output layer).
fn run_cells(p: &ParamSet, seq: &[Step], mode: &mut Mode<'_>) -> Result<Vec<StepTrace>> {
    let Dims { k, h, items } = p.dims();
    let mut h_prev = vec![0.0; h];
    let mut c_prev = vec![0.0; h];
    let mut steps = Vec::with_capacity(seq.len());
    for &(item, a) in seq {
        let code = crate::data::encode_interaction(item, a, items)?;
        let x: Vec<f64> = (0..k).map(|r| p.w_xv.get(r, code)).collect();
        let cell = lstm_step(p, &x, &h_prev, &c_prev)?;
        let mask = match mode {
            Mode::Train { dropout, rng } if *dropout > 0.0 => {
                let keep = 1.0 / (1.0 - *dropout);
                Some(
                    (0..h)
                        .map(|_| if rng.random::<f64>() < *dropout { 0.0 } else { keep })
                        .collect(),
                )
            }
            _ => None,
        };
        h_prev.clone_from(&cell.h);
        c_prev.clone_from(&cell.c);
        steps.push(StepTrace { code, x, cell, mask });
    }
    Ok(steps)
}

pub fn forward(p: &ParamSet, seq: &[Step], mut mode: Mode<'_>) -> Result<ForwardTrace> {
    if let Mode::Train { dropout, .. } = mode {
        if !(0.0..1.0).contains(&dropout) {
            return Err(Error::invalid(format!("dropout {dropout} outside [0, 1)")));
        }
    }
    let steps = run_cells(p, seq, &mut mode)?;
    let y = steps
        .iter()
        .map(|s| {
            let mut z = p.b_y.as_slice().to_vec();
            p.w_yh.gemv_acc(&s.h_out(), &mut z);
            z.into_iter().map(sigmoid).collect()
        })
        .collect();
    Ok(ForwardTrace { steps, y })
}

fn bce(y: f64, a: u8) -> f64 {
    let p = y.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    if a == 1 {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

/// `∂bce/∂z` through the output sigmoid; zero where the clamp is active.
fn bce_grad_logit(y: f64, a: u8) -> f64 {
    if (PROB_CLAMP..=1.0 - PROB_CLAMP).contains(&y) {
        y - f64::from(a)
    } else {
        0.0
    }
}

fn check_trace(trace: &ForwardTrace, seq: &[Step]) -> Result<()> {
    if seq.len() < 2 {
        return Err(Error::SequenceTooShort(seq.len()));
    }
    check_len(seq.len(), trace.steps.len())?;
    check_len(seq.len(), trace.y.len())
}

fn check_penalty(lambda: f64, lap: Option<&Laplacian>, items: usize) -> Result<()> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::invalid(format!("penalty weight {lambda} must be >= 0")));
    }
    match lap {
        Some(l) => check_len(items, l.dim()),
        None if lambda > 0.0 => Err(Error::invalid("penalty weight set without a graph")),
        None => Ok(()),
    }
}

/// Mean cross-entropy of next-step predictions plus `λ` times the mean
/// smoothness `y_tᵀ L y_t` over the same steps.
pub fn loss(trace: &ForwardTrace, seq: &[Step], lambda: f64, lap: Option<&Laplacian>) -> Result<LossTerms> {
    check_trace(trace, seq)?;
    let items = trace.y[0].len();
    check_penalty(lambda, lap, items)?;
    let n = (seq.len() - 1) as f64;
    let mut data = 0.0;
    let mut smoothness = 0.0;
    for t in 0..seq.len() - 1 {
        let (target, a) = seq[t + 1];
        data += bce(trace.y[t][target], a);
        if let Some(l) = lap {
            smoothness += l.quadratic_form(&trace.y[t])?;
        }
    }
    Ok(LossTerms {
        data: data / n,
        smoothness: smoothness / n,
        lambda,
    })
}

/// Exact gradients of [`loss`] with respect to every parameter.
pub fn backward(
    p: &ParamSet,
    trace: &ForwardTrace,
    seq: &[Step],
    lambda: f64,
    lap: Option<&Laplacian>,
) -> Result<(ParamSet, LossTerms)> {
    check_trace(trace, seq)?;
    let dims = p.dims();
    check_len(dims.items, trace.y[0].len())?;
    check_penalty(lambda, lap, dims.items)?;
    for (s, &(item, a)) in trace.steps.iter().zip(seq) {
        if s.code != crate::data::encode_interaction(item, a, dims.items)? {
            return Err(Error::invalid("trace does not match sequence"));
        }
    }

    let t_len = seq.len();
    let n = (t_len - 1) as f64;
    let mut grads = p.zeros_like();
    let mut dh_out = vec![vec![0.0; dims.h]; t_len];
    let mut terms = LossTerms {
        lambda,
        ..LossTerms::default()
    };
    let mut dz = vec![0.0; dims.items];
    let mut dpen = vec![0.0; dims.items];
    for t in 0..t_len - 1 {
        let y = &trace.y[t];
        let (target, a) = seq[t + 1];
        terms.data += bce(y[target], a);
        dz.iter_mut().for_each(|v| *v = 0.0);
        dz[target] = bce_grad_logit(y[target], a) / n;
        if let Some(l) = lap {
            dpen.iter_mut().for_each(|v| *v = 0.0);
            terms.smoothness += l.quadratic_form_with_grad(y, lambda / n, &mut dpen)?;
            if lambda > 0.0 {
                for ((d, g), yj) in dz.iter_mut().zip(&dpen).zip(y) {
                    *d += g * yj * (1.0 - yj);
                }
            }
        }
        let step = &trace.steps[t];
        grads.w_yh.outer_acc(&dz, &step.h_out());
        axpy(1.0, &dz, grads.b_y.as_mut_slice());
        p.w_yh.gemv_t_acc(&dz, &mut dh_out[t]);
        if let Some(m) = &step.mask {
            dh_out[t].iter_mut().zip(m).for_each(|(d, m)| *d *= m);
        }
    }
    terms.data /= n;
    terms.smoothness /= n;
    bptt(p, &trace.steps, &dh_out, &mut grads);
    Ok((grads, terms))
}

/// Backpropagates `∂loss/∂h_t` (output-layer contributions, one per step)
/// through the recurrence, accumulating into `grads`.
fn bptt(p: &ParamSet, steps: &[StepTrace], dh_out: &[Vec<f64>], grads: &mut ParamSet) {
    let h = p.dims().h;
    let zeros = vec![0.0; h];
    let mut dh_next = vec![0.0; h];
    let mut dc_next = vec![0.0; h];
    let mut dx = vec![0.0; p.dims().k];
    let mut dzs: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; h]);

    for t in (0..steps.len()).rev() {
        let s = &steps[t];
        let CellState {
            i,
            f,
            o,
            g,
            tanh_c,
            ..
        } = &s.cell;
        let (h_prev, c_prev) = if t == 0 {
            (&zeros, &zeros)
        } else {
            (&steps[t - 1].cell.h, &steps[t - 1].cell.c)
        };
        for j in 0..h {
            let dh = dh_out[t][j] + dh_next[j];
            let d_o = dh * tanh_c[j];
            let dc = dh * o[j] * (1.0 - tanh_c[j] * tanh_c[j]) + dc_next[j];
            dzs[0][j] = dc * g[j] * i[j] * (1.0 - i[j]);
            dzs[1][j] = dc * c_prev[j] * f[j] * (1.0 - f[j]);
            dzs[2][j] = d_o * o[j] * (1.0 - o[j]);
            dzs[3][j] = dc * i[j] * (1.0 - g[j] * g[j]);
            dc_next[j] = dc * f[j];
        }
        dh_next.iter_mut().for_each(|v| *v = 0.0);
        dx.iter_mut().for_each(|v| *v = 0.0);
        for (gate, dz) in dzs.iter().enumerate() {
            grads.w[gate].outer_acc(dz, &s.x);
            grads.u[gate].outer_acc(dz, h_prev);
            axpy(1.0, dz, grads.b[gate].as_mut_slice());
            p.w[gate].gemv_t_acc(dz, &mut dx);
            p.u[gate].gemv_t_acc(dz, &mut dh_next);
        }
        for (r, v) in dx.iter().enumerate() {
            let cur = grads.w_xv.get(r, s.code);
            grads.w_xv.set(r, s.code, cur + v);
        }
    }
}

/// Loss and gradient for one training sequence.
///
/// Without a penalty only the target output of each step is needed, so the
/// output layer is evaluated for that row alone; with a penalty the full
/// forward/backward pair is used.
pub fn sequence_gradient(
    p: &ParamSet,
    seq: &[Step],
    lambda: f64,
    lap: Option<&Laplacian>,
    dropout: f64,
    rng: &mut dyn RngCore,
) -> Result<(ParamSet, LossTerms)> {
    if lambda > 0.0 {
        let trace = forward(p, seq, Mode::Train { dropout, rng })?;
        return backward(p, &trace, seq, lambda, lap);
    }
    if seq.len() < 2 {
        return Err(Error::SequenceTooShort(seq.len()));
    }
    check_penalty(lambda, lap, p.dims().items)?;
    let steps = run_cells(p, seq, &mut Mode::Train { dropout, rng })?;
    let n = (seq.len() - 1) as f64;
    let mut grads = p.zeros_like();
    let mut dh_out = vec![vec![0.0; p.dims().h]; seq.len()];
    let mut data = 0.0;
    for t in 0..seq.len() - 1 {
        let (target, a) = seq[t + 1];
        let h_out = steps[t].h_out();
        let y = sigmoid(dot(p.w_yh.row(target), &h_out) + p.b_y.get(target, 0));
        data += bce(y, a);
        let dz = bce_grad_logit(y, a) / n;
        axpy(dz, &h_out, grads.w_yh.row_mut(target));
        grads.b_y.set(target, 0, grads.b_y.get(target, 0) + dz);
        axpy(dz, p.w_yh.row(target), &mut dh_out[t]);
        if let Some(m) = &steps[t].mask {
            dh_out[t].iter_mut().zip(m).for_each(|(d, m)| *d *= m);
        }
    }
    bptt(p, &steps, &dh_out, &mut grads);
    Ok((
        grads,
        LossTerms {
            data: data / n,
            smoothness: 0.0,
            lambda,
        },
    ))
}

/// Eval-mode predictions `y_t[item_{t+1}]` for `t = 0..T-1`.
pub fn predict_next(p: &ParamSet, seq: &[Step]) -> Result<Vec<f64>> {
    let steps = run_cells(p, seq, &mut Mode::Eval)?;
    Ok((0..seq.len().saturating_sub(1))
        .map(|t| {
            let target = seq[t + 1].0;
            sigmoid(dot(p.w_yh.row(target), &steps[t].cell.h) + p.b_y.get(target, 0))
        })
        .collect())
}
