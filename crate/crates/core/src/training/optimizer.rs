use super::config::OptimizerKind;

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPS: f64 = 1e-8;

/// First-order optimizer over a flat parameter vector.
#[derive(Clone, Debug)]
pub(crate) struct Optimizer {
    kind: OptimizerKind,
    lr: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Optimizer {
    pub(crate) fn new(kind: OptimizerKind, lr: f64, len: usize) -> Self {
        Self {
            kind,
            lr,
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    pub(crate) fn step(&mut self, theta: &mut [f64], grad: &[f64]) {
        debug_assert_eq!(theta.len(), grad.len());
        match self.kind {
            OptimizerKind::Sgd => {
                for (p, g) in theta.iter_mut().zip(grad) {
                    *p -= self.lr * g;
                }
            }
            OptimizerKind::Adam => {
                self.t += 1;
                let c1 = 1.0 - BETA1.powi(self.t);
                let c2 = 1.0 - BETA2.powi(self.t);
                for (((p, g), m), v) in theta
                    .iter_mut()
                    .zip(grad)
                    .zip(self.m.iter_mut())
                    .zip(self.v.iter_mut())
                {
                    *m = BETA1 * *m + (1.0 - BETA1) * g;
                    *v = BETA2 * *v + (1.0 - BETA2) * g * g;
                    *p -= self.lr * (*m / c1) / ((*v / c2).sqrt() + EPS);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sgd_step() {
        let mut o = Optimizer::new(OptimizerKind::Sgd, 0.1, 2);
        let mut p = vec![1.0, 2.0];
        o.step(&mut p, &[1.0, -2.0]);
        assert_eq!(p, vec![0.9, 2.2]);
    }

    #[test]
    fn adam_first_step_has_learning_rate_size() {
        let mut o = Optimizer::new(OptimizerKind::Adam, 0.01, 2);
        let mut p = vec![0.0, 0.0];
        o.step(&mut p, &[3.0, -0.5]);
        assert!((p[0] + 0.01).abs() < 1e-8 && (p[1] - 0.01).abs() < 1e-8);
    }

    #[test]
    fn both_minimize_a_quadratic() {
        for kind in [OptimizerKind::Sgd, OptimizerKind::Adam] {
            let mut o = Optimizer::new(kind, 0.05, 1);
            let mut p = vec![3.0];
            for _ in 0..2000 {
                let g = [2.0 * (p[0] - 1.0)];
                o.step(&mut p, &g);
            }
            assert!((p[0] - 1.0).abs() < 1e-3, "{kind:?}: {}", p[0]);
        }
    }
}
