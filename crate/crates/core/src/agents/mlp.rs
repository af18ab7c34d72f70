//! Dense feed-forward network with tanh hidden layers, a linear output layer
//! and hand-written backpropagation.

use rand::Rng;

use super::AgentError;

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// Row-major `out x in`.
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    pub inputs: usize,
    pub outputs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<Layer>,
}

/// Per-layer activations from a forward pass, input first.
#[derive(Debug, Clone)]
pub struct Cache {
    acts: Vec<Vec<f64>>,
}

/// Gradients shaped like the network's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Grads {
    pub w: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
}

impl Grads {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            w: net.layers.iter().map(|l| vec![0.0; l.w.len()]).collect(),
            b: net.layers.iter().map(|l| vec![0.0; l.b.len()]).collect(),
        }
    }

    pub fn add(&mut self, other: &Grads) {
        for (a, b) in self.w.iter_mut().zip(&other.w).chain(self.b.iter_mut().zip(&other.b)) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, k: f64) {
        for v in self.w.iter_mut().chain(self.b.iter_mut()) {
            v.iter_mut().for_each(|x| *x *= k);
        }
    }

    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.w.iter().zip(&self.b) {
            out.extend_from_slice(w);
            out.extend_from_slice(b);
        }
        out
    }
}

impl Mlp {
    /// Weights and biases drawn uniformly from `±1/sqrt(fan_in)`.
    pub fn new(sizes: &[usize], rng: &mut impl Rng) -> Result<Self, AgentError> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(AgentError::InvalidHyperparameter(format!("layer sizes {sizes:?}")));
        }
        let layers = sizes
            .windows(2)
            .map(|p| {
                let (i, o) = (p[0], p[1]);
                let k = 1.0 / (i as f64).sqrt();
                Layer {
                    w: (0..i * o).map(|_| rng.gen_range(-k..=k)).collect(),
                    b: (0..o).map(|_| rng.gen_range(-k..=k)).collect(),
                    inputs: i,
                    outputs: o,
                }
            })
            .collect();
        Ok(Self { layers })
    }

    pub fn from_layers(layers: Vec<Layer>) -> Result<Self, AgentError> {
        for (i, l) in layers.iter().enumerate() {
            let chained = i == 0 || layers[i - 1].outputs == l.inputs;
            if l.w.len() != l.inputs * l.outputs || l.b.len() != l.outputs || !chained {
                return Err(AgentError::ShapeMismatch {
                    expected: l.inputs * l.outputs,
                    got: l.w.len(),
                });
            }
        }
        if layers.is_empty() {
            return Err(AgentError::InvalidHyperparameter("no layers".into()));
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![self.layers[0].inputs];
        s.extend(self.layers.iter().map(|l| l.outputs));
        s
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("non-empty").outputs
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, AgentError> {
        Ok(self.forward_cached(x)?.0)
    }

    pub fn forward_cached(&self, x: &[f64]) -> Result<(Vec<f64>, Cache), AgentError> {
        if x.len() != self.input_dim() {
            return Err(AgentError::ShapeMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let mut acts = vec![x.to_vec()];
        let last = self.layers.len() - 1;
        for (li, l) in self.layers.iter().enumerate() {
            let a = acts.last().expect("input pushed");
            let mut z: Vec<f64> = l.b.clone();
            for (o, zo) in z.iter_mut().enumerate() {
                let row = &l.w[o * l.inputs..(o + 1) * l.inputs];
                *zo += row.iter().zip(a).map(|(w, x)| w * x).sum::<f64>();
            }
            if li != last {
                z.iter_mut().for_each(|v| *v = v.tanh());
            }
            acts.push(z);
        }
        let y = acts.last().expect("output").clone();
        Ok((y, Cache { acts }))
    }

    /// Parameter gradients of a loss whose gradient wrt the output is `dy`.
    pub fn backward(&self, cache: &Cache, dy: &[f64]) -> Result<Grads, AgentError> {
        if dy.len() != self.output_dim() {
            return Err(AgentError::ShapeMismatch {
                expected: self.output_dim(),
                got: dy.len(),
            });
        }
        let mut g = Grads::zeros_like(self);
        let mut delta = dy.to_vec();
        for li in (0..self.layers.len()).rev() {
            let l = &self.layers[li];
            let a_in = &cache.acts[li];
            for o in 0..l.outputs {
                g.b[li][o] = delta[o];
                let row = &mut g.w[li][o * l.inputs..(o + 1) * l.inputs];
                for (gw, x) in row.iter_mut().zip(a_in) {
                    *gw = delta[o] * x;
                }
            }
            if li == 0 {
                break;
            }
            // through the tanh of the previous layer: d tanh = 1 - a^2
            let mut next = vec![0.0; l.inputs];
            for (i, n) in next.iter_mut().enumerate() {
                let s: f64 = (0..l.outputs).map(|o| l.w[o * l.inputs + i] * delta[o]).sum();
                *n = s * (1.0 - a_in[i] * a_in[i]);
            }
            delta = next;
        }
        Ok(g)
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Parameters flattened layer by layer, weights before biases.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(&l.w);
            out.extend_from_slice(&l.b);
        }
        out
    }

    pub fn set_params(&mut self, p: &[f64]) -> Result<(), AgentError> {
        if p.len() != self.param_count() {
            return Err(AgentError::ShapeMismatch {
                expected: self.param_count(),
                got: p.len(),
            });
        }
        let mut i = 0;
        for l in &mut self.layers {
            let nw = l.w.len();
            l.w.copy_from_slice(&p[i..i + nw]);
            i += nw;
            let nb = l.b.len();
            l.b.copy_from_slice(&p[i..i + nb]);
            i += nb;
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.params().iter().all(|p| p.is_finite())
    }
}

/// Adam optimizer state for one network.
#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(net: &Mlp, lr: f64) -> Self {
        let n = net.param_count();
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    /// One descent step along `grads`.
    pub fn step(&mut self, net: &mut Mlp, grads: &Grads) {
        self.t += 1;
        let g = grads.flat();
        let mut p = net.params();
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for i in 0..p.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g[i] * g[i];
            let mh = self.m[i] / c1;
            let vh = self.v[i] / c2;
            p[i] -= self.lr * mh / (vh.sqrt() + self.eps);
        }
        net.set_params(&p).expect("same shape");
    }
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_linear_layer_is_affine() {
        let net = Mlp::from_layers(vec![Layer {
            w: vec![1.0, 2.0, -1.0, 0.5],
            b: vec![0.25, -0.5],
            inputs: 2,
            outputs: 2,
        }])
        .unwrap();
        assert_eq!(net.forward(&[3.0, 4.0]).unwrap(), vec![11.25, -1.5]);
        assert!(matches!(net.forward(&[1.0]), Err(AgentError::ShapeMismatch { expected: 2, got: 1 })));
    }

    #[test]
    fn zero_upstream_gives_zero_grads() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = Mlp::new(&[3, 5, 2], &mut rng).unwrap();
        let (_, c) = net.forward_cached(&[0.1, -0.3, 0.7]).unwrap();
        let g = net.backward(&c, &[0.0, 0.0]).unwrap();
        assert!(g.flat().iter().all(|x| *x == 0.0));
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let a = Mlp::new(&[4, 8, 3], &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = Mlp::new(&[4, 8, 3], &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        let l0 = &a.layers()[0];
        assert!(l0.w.iter().all(|w| w.abs() <= 0.5));
        assert!(a.layers()[1].w.iter().all(|w| w.abs() <= 1.0 / 8f64.sqrt()));
    }

    #[test]
    fn adam_descends_a_quadratic() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut net = Mlp::new(&[1, 1], &mut rng).unwrap();
        let mut opt = Adam::new(&net, 0.05);
        for _ in 0..500 {
            let (y, c) = net.forward_cached(&[1.0]).unwrap();
            let g = net.backward(&c, &[2.0 * (y[0] - 3.0)]).unwrap();
            opt.step(&mut net, &g);
        }
        assert!((net.forward(&[1.0]).unwrap()[0] - 3.0).abs() < 1e-2);
    }

    #[test]
    fn softmax_and_argmax() {
        let p = softmax(&[1.0, 1.0, 1.0, 1.0]);
        assert!(p.iter().all(|x| (x - 0.25).abs() < 1e-12));
        assert_eq!(argmax(&[0.1, 0.9, 0.3]), 1);
        assert_eq!(argmax(&[0.5, 0.5]), 0);
        let p = softmax(&[1000.0, 0.0]);
        assert!(p[0] > 0.999 && p.iter().all(|x| x.is_finite()));
    }
}
