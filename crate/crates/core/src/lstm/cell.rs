use serde::{Deserialize, Serialize};

use super::features::FeatureSample;
use crate::error::{Error, Result};

/// Weights of one gate: `W` is `hidden x (hidden + input)` row-major, acting on the
/// concatenation `[h_prev, x]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl Gate {
    fn zeros(hidden: usize, cols: usize) -> Self {
        Self {
            w: vec![0.0; hidden * cols],
            b: vec![0.0; hidden],
        }
    }

    /// `W z + b`
    fn affine(&self, z: &[f64], out: &mut [f64]) {
        let cols = z.len();
        for (r, o) in out.iter_mut().enumerate() {
            let row = &self.w[r * cols..(r + 1) * cols];
            *o = self.b[r] + row.iter().zip(z).map(|(w, v)| w * v).sum::<f64>();
        }
    }
}

/// LSTM layer plus a linear scalar head. Also used to hold gradients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmParams {
    pub hidden_size: usize,
    pub input_size: usize,
    pub forget: Gate,
    pub input: Gate,
    pub output: Gate,
    pub candidate: Gate,
    pub head_w: Vec<f64>,
    pub head_b: f64,
}

impl LstmParams {
    pub fn zeros(hidden_size: usize, input_size: usize) -> Self {
        let cols = hidden_size + input_size;
        Self {
            hidden_size,
            input_size,
            forget: Gate::zeros(hidden_size, cols),
            input: Gate::zeros(hidden_size, cols),
            output: Gate::zeros(hidden_size, cols),
            candidate: Gate::zeros(hidden_size, cols),
            head_w: vec![0.0; hidden_size],
            head_b: 0.0,
        }
    }

    /// Gate weights uniform in `+-1/sqrt(H + D)`, head weights uniform in `+-1/sqrt(H)`,
    /// forget bias 1 and all other biases 0.
    pub fn init(hidden_size: usize, input_size: usize, rng: &mut impl rand::Rng) -> Self {
        let mut p = Self::zeros(hidden_size, input_size);
        let bound = 1.0 / ((hidden_size + input_size) as f64).sqrt();
        for gate in [&mut p.forget, &mut p.input, &mut p.output, &mut p.candidate] {
            gate.w.iter_mut().for_each(|w| *w = rng.random_range(-bound..bound));
        }
        p.forget.b.iter_mut().for_each(|b| *b = 1.0);
        let head_bound = 1.0 / (hidden_size as f64).sqrt();
        p.head_w
            .iter_mut()
            .for_each(|w| *w = rng.random_range(-head_bound..head_bound));
        p
    }

    /// Every parameter group as a slice, in a fixed order.
    pub fn groups(&self) -> [&[f64]; 10] {
        [
            &self.forget.w,
            &self.forget.b,
            &self.input.w,
            &self.input.b,
            &self.output.w,
            &self.output.b,
            &self.candidate.w,
            &self.candidate.b,
            &self.head_w,
            std::slice::from_ref(&self.head_b),
        ]
    }

    pub fn groups_mut(&mut self) -> [&mut [f64]; 10] {
        [
            &mut self.forget.w,
            &mut self.forget.b,
            &mut self.input.w,
            &mut self.input.b,
            &mut self.output.w,
            &mut self.output.b,
            &mut self.candidate.w,
            &mut self.candidate.b,
            &mut self.head_w,
            std::slice::from_mut(&mut self.head_b),
        ]
    }

    pub fn num_params(&self) -> usize {
        self.groups().iter().map(|g| g.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.groups().iter().all(|g| g.iter().all(|v| v.is_finite()))
    }

    pub fn check_shape(&self) -> Result<()> {
        let (h, cols) = (self.hidden_size, self.hidden_size + self.input_size);
        for gate in [&self.forget, &self.input, &self.output, &self.candidate] {
            if gate.w.len() != h * cols || gate.b.len() != h {
                return Err(Error::Shape(format!(
                    "gate does not match H={h}, D={}",
                    self.input_size
                )));
            }
        }
        if self.head_w.len() != h {
            return Err(Error::Shape(format!(
                "head has {} weights, expected {h}",
                self.head_w.len()
            )));
        }
        Ok(())
    }

    pub(crate) fn add_assign(&mut self, other: &LstmParams) {
        for (a, b) in self.groups_mut().into_iter().zip(other.groups()) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
    }

    pub(crate) fn scale(&mut self, factor: f64) {
        for g in self.groups_mut() {
            g.iter_mut().for_each(|x| *x *= factor);
        }
    }

    pub(crate) fn norm(&self) -> f64 {
        self.groups()
            .iter()
            .flat_map(|g| g.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden_size: usize) -> Self {
        Self {
            h: vec![0.0; hidden_size],
            c: vec![0.0; hidden_size],
        }
    }
}

/// Activations of one cell step kept for backpropagation.
#[derive(Debug, Clone, PartialEq)]
pub struct CellCache {
    /// `[h_prev, x]`
    pub z: Vec<f64>,
    pub f: Vec<f64>,
    pub i: Vec<f64>,
    pub o: Vec<f64>,
    pub c_hat: Vec<f64>,
    pub c_prev: Vec<f64>,
    pub tanh_c: Vec<f64>,
}

impl CellCache {
    /// Gates in `[0, 1]`, candidate in `[-1, 1]`, `|h| <= 1`. (The bounds are open in exact
    /// arithmetic; saturated activations round onto them in floating point.)
    pub fn within_bounds(&self) -> bool {
        let unit = |v: &[f64]| v.iter().all(|x| (0.0..=1.0).contains(x));
        let sym = |v: &[f64]| v.iter().all(|x| (-1.0..=1.0).contains(x));
        let h_ok = self.o.iter().zip(&self.tanh_c).all(|(o, t)| (o * t).abs() <= 1.0);
        unit(&self.f) && unit(&self.i) && unit(&self.o) && sym(&self.c_hat) && h_ok
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// One LSTM step:
/// `f, i, o = sigmoid(W [h, x] + b)`, `c_hat = tanh(W_C [h, x] + b_C)`,
/// `c = i * c_hat + f * c_prev`, `h = o * tanh(c)`.
pub fn lstm_cell_forward(p: &LstmParams, x: &[f64], state: &LstmState) -> Result<(LstmState, CellCache)> {
    let h = p.hidden_size;
    if x.len() != p.input_size || state.h.len() != h || state.c.len() != h {
        return Err(Error::Shape(format!(
            "input {} / state ({}, {}) do not match H={h}, D={}",
            x.len(),
            state.h.len(),
            state.c.len(),
            p.input_size
        )));
    }
    let mut z = Vec::with_capacity(h + x.len());
    z.extend_from_slice(&state.h);
    z.extend_from_slice(x);

    let mut f = vec![0.0; h];
    let mut i = vec![0.0; h];
    let mut o = vec![0.0; h];
    let mut c_hat = vec![0.0; h];
    p.forget.affine(&z, &mut f);
    p.input.affine(&z, &mut i);
    p.output.affine(&z, &mut o);
    p.candidate.affine(&z, &mut c_hat);
    f.iter_mut().for_each(|v| *v = sigmoid(*v));
    i.iter_mut().for_each(|v| *v = sigmoid(*v));
    o.iter_mut().for_each(|v| *v = sigmoid(*v));
    c_hat.iter_mut().for_each(|v| *v = v.tanh());

    let c: Vec<f64> = (0..h).map(|k| i[k] * c_hat[k] + f[k] * state.c[k]).collect();
    let tanh_c: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
    let h_new: Vec<f64> = o.iter().zip(&tanh_c).map(|(o, t)| o * t).collect();

    let cache = CellCache {
        z,
        f,
        i,
        o,
        c_hat,
        c_prev: state.c.clone(),
        tanh_c,
    };
    debug_assert!(cache.within_bounds());
    Ok((LstmState { h: h_new, c }, cache))
}

/// Per-step caches of one unrolled sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceCache {
    pub steps: Vec<CellCache>,
    pub final_state: LstmState,
    pub prediction: f64,
}

/// Runs the cell over every input step from a zero state and applies the head:
/// `prediction = head_w . h_L + head_b`.
pub fn forward_sequence(p: &LstmParams, sample: &FeatureSample) -> Result<(f64, SequenceCache)> {
    p.check_shape()?;
    let mut state = LstmState::zeros(p.hidden_size);
    let mut steps = Vec::with_capacity(sample.inputs.len());
    for x in &sample.inputs {
        let (next, cache) = lstm_cell_forward(p, x, &state)?;
        steps.push(cache);
        state = next;
    }
    let prediction = p.head_b + p.head_w.iter().zip(&state.h).map(|(w, h)| w * h).sum::<f64>();
    Ok((
        prediction,
        SequenceCache {
            steps,
            final_state: state,
            prediction,
        },
    ))
}

fn accumulate_gate(grad: &mut Gate, da: &[f64], z: &[f64]) {
    let cols = z.len();
    for (r, &d) in da.iter().enumerate() {
        grad.b[r] += d;
        if d != 0.0 {
            let row = &mut grad.w[r * cols..(r + 1) * cols];
            row.iter_mut().zip(z).for_each(|(g, v)| *g += d * v);
        }
    }
}

fn backprop_input(gate: &Gate, da: &[f64], dz: &mut [f64]) {
    let cols = dz.len();
    for (r, &d) in da.iter().enumerate() {
        if d != 0.0 {
            let row = &gate.w[r * cols..(r + 1) * cols];
            dz.iter_mut().zip(row).for_each(|(g, w)| *g += d * w);
        }
    }
}

/// Reverse-mode gradients of the loss with respect to every parameter, given
/// `loss_grad = dL / d prediction`. Backpropagates through the head and the unrolled
/// cell chain.
pub fn backward(p: &LstmParams, sample: &FeatureSample, cache: &SequenceCache, loss_grad: f64) -> Result<LstmParams> {
    let hs = p.hidden_size;
    if cache.steps.len() != sample.inputs.len() {
        return Err(Error::CacheMismatch(format!(
            "{} cached steps for {} inputs",
            cache.steps.len(),
            sample.inputs.len()
        )));
    }
    for (step, x) in cache.steps.iter().zip(&sample.inputs) {
        if step.z.len() != hs + p.input_size || step.z[hs..] != x[..] {
            return Err(Error::CacheMismatch("cached inputs differ from the sample".into()));
        }
    }

    let mut g = LstmParams::zeros(hs, p.input_size);
    g.head_b = loss_grad;
    for (gw, h) in g.head_w.iter_mut().zip(&cache.final_state.h) {
        *gw = loss_grad * h;
    }

    let mut dh: Vec<f64> = p.head_w.iter().map(|w| loss_grad * w).collect();
    let mut dc = vec![0.0; hs];
    let (mut da_f, mut da_i, mut da_o, mut da_c) = (vec![0.0; hs], vec![0.0; hs], vec![0.0; hs], vec![0.0; hs]);
    let mut dz = vec![0.0; hs + p.input_size];
    for step in cache.steps.iter().rev() {
        for k in 0..hs {
            let t = step.tanh_c[k];
            let d_o = dh[k] * t;
            dc[k] += dh[k] * step.o[k] * (1.0 - t * t);
            let d_i = dc[k] * step.c_hat[k];
            let d_chat = dc[k] * step.i[k];
            let d_f = dc[k] * step.c_prev[k];
            da_f[k] = d_f * step.f[k] * (1.0 - step.f[k]);
            da_i[k] = d_i * step.i[k] * (1.0 - step.i[k]);
            da_o[k] = d_o * step.o[k] * (1.0 - step.o[k]);
            da_c[k] = d_chat * (1.0 - step.c_hat[k] * step.c_hat[k]);
            dc[k] *= step.f[k];
        }
        accumulate_gate(&mut g.forget, &da_f, &step.z);
        accumulate_gate(&mut g.input, &da_i, &step.z);
        accumulate_gate(&mut g.output, &da_o, &step.z);
        accumulate_gate(&mut g.candidate, &da_c, &step.z);

        dz.fill(0.0);
        backprop_input(&p.forget, &da_f, &mut dz);
        backprop_input(&p.input, &da_i, &mut dz);
        backprop_input(&p.output, &da_o, &mut dz);
        backprop_input(&p.candidate, &da_c, &mut dz);
        dh.copy_from_slice(&dz[..hs]);
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_params_half_open_gates() {
        let p = LstmParams::zeros(3, 2);
        let (s, cache) = lstm_cell_forward(&p, &[0.7, -1.2], &LstmState::zeros(3)).unwrap();
        assert!(cache.f.iter().chain(&cache.i).chain(&cache.o).all(|&v| v == 0.5));
        assert!(cache.c_hat.iter().all(|&v| v == 0.0));
        assert!(s.c.iter().chain(&s.h).all(|&v| v == 0.0));
    }

    #[test]
    fn zero_params_with_cell_memory() {
        let p = LstmParams::zeros(1, 1);
        let state = LstmState {
            h: vec![0.0],
            c: vec![1.0],
        };
        let (s, _) = lstm_cell_forward(&p, &[0.3], &state).unwrap();
        assert_abs_diff_eq!(s.c[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.h[0], 0.5 * 0.5f64.tanh(), epsilon = 1e-15);
        assert_abs_diff_eq!(s.h[0], 0.231_058_578_630_005, epsilon = 1e-12);
    }

    #[test]
    fn saturated_gates_pass_candidate_through() {
        let mut p = LstmParams::zeros(1, 1);
        p.input.b[0] = 20.0;
        p.forget.b[0] = -20.0;
        p.candidate.w[1] = 1.0;
        let state = LstmState {
            h: vec![0.0],
            c: vec![0.8],
        };
        for x in [-0.9, -0.2, 0.0, 0.4, 1.0] {
            let (s, _) = lstm_cell_forward(&p, &[x], &state).unwrap();
            assert!((s.c[0] - f64::tanh(x)).abs() < 1e-8, "x={x}: {}", s.c[0]);
        }
    }

    #[test]
    fn shape_errors() {
        let p = LstmParams::zeros(2, 1);
        assert!(matches!(
            lstm_cell_forward(&p, &[0.0, 0.0], &LstmState::zeros(2)),
            Err(Error::Shape(_))
        ));
        let mut bad = p.clone();
        bad.head_w.pop();
        let sample = FeatureSample {
            inputs: vec![vec![0.0]],
            target: 0.0,
            target_index: 0,
        };
        assert!(forward_sequence(&bad, &sample).is_err());
    }

    #[test]
    fn zero_params_predict_head_bias() {
        let mut p = LstmParams::zeros(4, 3);
        p.head_b = 0.37;
        let sample = FeatureSample {
            inputs: vec![vec![0.1, 0.2, 0.3]; 5],
            target: 0.0,
            target_index: 5,
        };
        assert_eq!(forward_sequence(&p, &sample).unwrap().0, 0.37);
    }

    #[test]
    fn single_step_is_one_cell_plus_head() {
        let p = LstmParams::init(3, 2, &mut rng_from_seed(5));
        let x = vec![0.3, -0.4];
        let (s, _) = lstm_cell_forward(&p, &x, &LstmState::zeros(3)).unwrap();
        let manual = p.head_b + p.head_w.iter().zip(&s.h).map(|(w, h)| w * h).sum::<f64>();
        let sample = FeatureSample {
            inputs: vec![x],
            target: 0.0,
            target_index: 1,
        };
        assert_eq!(forward_sequence(&p, &sample).unwrap().0, manual);
    }

    #[test]
    fn gradient_edge_cases() {
        let p = LstmParams::init(3, 1, &mut rng_from_seed(9));
        let sample = FeatureSample {
            inputs: vec![vec![0.2], vec![-0.1], vec![0.5]],
            target: 0.1,
            target_index: 3,
        };
        let (_, cache) = forward_sequence(&p, &sample).unwrap();
        let zero = backward(&p, &sample, &cache, 0.0).unwrap();
        assert!(zero.groups().iter().all(|g| g.iter().all(|&v| v == 0.0)));
        let g = backward(&p, &sample, &cache, 0.731).unwrap();
        assert_eq!(g.head_b, 0.731);

        let mut other = sample.clone();
        other.inputs.pop();
        assert!(matches!(
            backward(&p, &other, &cache, 1.0),
            Err(Error::CacheMismatch(_))
        ));
        let mut other = sample.clone();
        other.inputs[0][0] = 9.0;
        assert!(matches!(
            backward(&p, &other, &cache, 1.0),
            Err(Error::CacheMismatch(_))
        ));
    }

    #[test]
    fn init_follows_bounds() {
        let p = LstmParams::init(16, 3, &mut rng_from_seed(1));
        let bound = 1.0 / 19f64.sqrt();
        for gate in [&p.forget, &p.input, &p.output, &p.candidate] {
            assert!(gate.w.iter().all(|w| w.abs() <= bound));
        }
        assert!(p.forget.b.iter().all(|&b| b == 1.0));
        assert!(p
            .input
            .b
            .iter()
            .chain(&p.output.b)
            .chain(&p.candidate.b)
            .all(|&b| b == 0.0));
        assert_eq!(p.head_b, 0.0);
        assert_eq!(p.num_params(), 4 * (16 * 19 + 16) + 16 + 1);
    }
}
