//! Forward-mode sensitivities of state, action, reading and stack length
//! with respect to every controller parameter.

use crate::controller::{
    extended_state_jacobian, extended_state_unchecked, ActionActivation, Order, StepOutput,
    WeightSet,
};

/// `dS/dW`, `dA/dW`, `dR/dW` and `dL/dW`, each stored row-major with one
/// row of length `n_params` per neuron.
#[derive(Clone, Debug, PartialEq)]
pub struct Sensitivities {
    n_params: usize,
    n_state: usize,
    n_read: usize,
    pub ds: Vec<f64>,
    pub da: Vec<f64>,
    pub dr: Vec<f64>,
    pub dl: Vec<f64>,
    scratch: Vec<f64>,
}

impl Sensitivities {
    pub fn new(weights: &WeightSet) -> Self {
        let p = weights.n_params();
        let sh = weights.shape();
        Sensitivities {
            n_params: p,
            n_state: sh.n_state,
            n_read: sh.n_read,
            ds: vec![0.0; sh.n_state * p],
            da: vec![0.0; p],
            dr: vec![0.0; sh.n_read * p],
            dl: vec![0.0; p],
            scratch: vec![0.0; sh.n_state * p],
        }
    }

    pub fn reset(&mut self) {
        self.ds.fill(0.0);
        self.da.fill(0.0);
        self.dr.fill(0.0);
        self.dl.fill(0.0);
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn ds_row(&self, i: usize) -> &[f64] {
        &self.ds[i * self.n_params..(i + 1) * self.n_params]
    }

    pub fn dr_row(&self, k: usize) -> &[f64] {
        &self.dr[k * self.n_params..(k + 1) * self.n_params]
    }

    pub fn is_finite(&self) -> bool {
        self.ds
            .iter()
            .chain(&self.da)
            .chain(&self.dr)
            .chain(&self.dl)
            .all(|x| x.is_finite())
    }

    /// Sets `dR = d * dA` after the stack has applied the latest action.
    pub fn set_reading(&mut self, d: &[f64]) {
        for k in 0..self.n_read {
            let row = &mut self.dr[k * self.n_params..(k + 1) * self.n_params];
            if d[k] == 0.0 {
                row.fill(0.0);
            } else {
                for (x, &a) in row.iter_mut().zip(&self.da) {
                    *x = d[k] * a;
                }
            }
        }
    }

    /// The stack length was clamped to zero: it no longer depends on the weights.
    pub fn clear_length(&mut self) {
        self.dl.fill(0.0);
    }

    /// Runs one controller step from `(s, r, input)` and advances `dS` and
    /// `dA` to the new time; `dL` accumulates the new `dA`.
    pub fn propagate(&mut self, w: &WeightSet, s: &[f64], r: &[f64], input: &[f64]) -> StepOutput {
        let out = w.step_unchecked(s, r, input);
        let p = self.n_params;
        let ns = self.n_state;
        let nr = self.n_read;
        let sh = w.shape();
        let ni = sh.n_input;
        let layout = w.layout().clone();
        let params = w.params();
        let second = w.order() == Order::Second;
        let context: Vec<f64> = if second {
            let mut c = r.to_vec();
            c.extend_from_slice(input);
            c
        } else {
            r.to_vec()
        };
        let cw = context.len();

        // state neurons
        let mut m = vec![0.0; ns];
        let mut n = vec![0.0; nr];
        for i in 0..ns {
            let gp = out.state[i] * (1.0 - out.state[i]);
            m.fill(0.0);
            n.fill(0.0);
            for j in 0..ns {
                if second {
                    let base = layout.w_state.start + (i * ns + j) * cw;
                    let row = &params[base..base + cw];
                    m[j] = row.iter().zip(&context).map(|(a, b)| a * b).sum();
                    for k in 0..nr {
                        n[k] += row[k] * s[j];
                    }
                } else {
                    for k in 0..nr {
                        let base = layout.w_state.start + ((i * ns + j) * nr + k) * ni;
                        let wi: f64 = params[base..base + ni]
                            .iter()
                            .zip(input)
                            .map(|(a, b)| a * b)
                            .sum();
                        m[j] += wi * r[k];
                        n[k] += wi * s[j];
                    }
                }
            }
            let dst = &mut self.scratch[i * p..(i + 1) * p];
            dst.fill(0.0);
            for j in 0..ns {
                if m[j] != 0.0 {
                    let src = &self.ds[j * p..(j + 1) * p];
                    for (d, &x) in dst.iter_mut().zip(src) {
                        *d += m[j] * x;
                    }
                }
            }
            for k in 0..nr {
                if n[k] != 0.0 {
                    let src = &self.dr[k * p..(k + 1) * p];
                    for (d, &x) in dst.iter_mut().zip(src) {
                        *d += n[k] * x;
                    }
                }
            }
            // explicit terms
            if second {
                for j in 0..ns {
                    let base = layout.w_state.start + (i * ns + j) * cw;
                    for (k, &ck) in context.iter().enumerate() {
                        dst[base + k] += s[j] * ck;
                    }
                }
            } else {
                for j in 0..ns {
                    for k in 0..nr {
                        let base = layout.w_state.start + ((i * ns + j) * nr + k) * ni;
                        let sr = s[j] * r[k];
                        for l in 0..ni {
                            dst[base + l] += sr * input[l];
                        }
                    }
                }
            }
            dst[layout.theta_s.start + i] += 1.0;
            for d in dst.iter_mut() {
                *d *= gp;
            }
        }

        // action neuron
        let fp = match w.action_activation() {
            ActionActivation::Sigmoid2 => {
                let g = (out.action + 1.0) / 2.0;
                2.0 * g * (1.0 - g)
            }
            ActionActivation::Linear => 1.0,
        };
        let wa0 = layout.w_action.start;
        let mut ma = vec![0.0; ns];
        let mut na = vec![0.0; nr];
        let mut new_da = vec![0.0; p];
        match w.order() {
            Order::Second => {
                for j in 0..ns {
                    let row = &params[wa0 + j * cw..wa0 + (j + 1) * cw];
                    ma[j] = row.iter().zip(&context).map(|(a, b)| a * b).sum();
                    for k in 0..nr {
                        na[k] += row[k] * s[j];
                    }
                    for (k, &ck) in context.iter().enumerate() {
                        new_da[wa0 + j * cw + k] += s[j] * ck;
                    }
                }
            }
            Order::Third => {
                for j in 0..ns {
                    for k in 0..nr {
                        let base = wa0 + (j * nr + k) * ni;
                        let wi: f64 = params[base..base + ni]
                            .iter()
                            .zip(input)
                            .map(|(a, b)| a * b)
                            .sum();
                        ma[j] += wi * r[k];
                        na[k] += wi * s[j];
                        let sr = s[j] * r[k];
                        for l in 0..ni {
                            new_da[base + l] += sr * input[l];
                        }
                    }
                }
            }
            Order::FullOrderAction => {
                let pj = extended_state_unchecked(s);
                let jac = extended_state_jacobian(s);
                for (jj, &pv) in pj.iter().enumerate() {
                    let mut u = 0.0;
                    for k in 0..nr {
                        let base = wa0 + (jj * nr + k) * ni;
                        let wi: f64 = params[base..base + ni]
                            .iter()
                            .zip(input)
                            .map(|(a, b)| a * b)
                            .sum();
                        u += wi * r[k];
                        na[k] += wi * pv;
                        let pr = pv * r[k];
                        for l in 0..ni {
                            new_da[base + l] += pr * input[l];
                        }
                    }
                    if u != 0.0 {
                        for mm in 0..ns {
                            ma[mm] += u * jac[jj * ns + mm];
                        }
                    }
                }
            }
        }
        for j in 0..ns {
            if ma[j] != 0.0 {
                let src = &self.ds[j * p..(j + 1) * p];
                for (d, &x) in new_da.iter_mut().zip(src) {
                    *d += ma[j] * x;
                }
            }
        }
        for k in 0..nr {
            if na[k] != 0.0 {
                let src = &self.dr[k * p..(k + 1) * p];
                for (d, &x) in new_da.iter_mut().zip(src) {
                    *d += na[k] * x;
                }
            }
        }
        if let Some(ta) = layout.theta_a {
            new_da[ta] += 1.0;
        }
        for d in new_da.iter_mut() {
            *d *= fp;
        }

        std::mem::swap(&mut self.ds, &mut self.scratch);
        self.da = new_da;
        for (l, &a) in self.dl.iter_mut().zip(&self.da) {
            *l += a;
        }
        out
    }
}
