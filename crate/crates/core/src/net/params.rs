use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Gate order used by every per-gate array: input, forget, output, cell
/// candidate.
pub const GATES: [&str; 4] = ["i", "f", "o", "c"];

pub const PARAM_NAMES: [&str; 15] = [
    "w_xv", "w_i", "w_f", "w_o", "w_c", "u_i", "u_f", "u_o", "u_c", "b_i", "b_f", "b_o", "b_c",
    "w_yh", "b_y",
];

/// Model sizes: embedding dim `k`, hidden size `h`, output items `items`
/// (questions, or joint skills for the skill-level baseline).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub k: usize,
    pub h: usize,
    pub items: usize,
}

/// All trainable tensors. Also used for gradients and Adam moments.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    /// `k × 2·items`; column `q + a·items` embeds interaction `(q, a)`.
    pub w_xv: Matrix,
    /// Input-to-gate weights, `h × k`, in [`GATES`] order.
    pub w: [Matrix; 4],
    /// Recurrent weights, `h × h`.
    pub u: [Matrix; 4],
    /// Gate biases, `h × 1`.
    pub b: [Matrix; 4],
    /// `items × h`
    pub w_yh: Matrix,
    /// `items × 1`
    pub b_y: Matrix,
}

impl ParamSet {
    pub fn zeros(dims: Dims) -> Self {
        let Dims { k, h, items } = dims;
        ParamSet {
            w_xv: Matrix::zeros(k, 2 * items),
            w: std::array::from_fn(|_| Matrix::zeros(h, k)),
            u: std::array::from_fn(|_| Matrix::zeros(h, h)),
            b: std::array::from_fn(|_| Matrix::zeros(h, 1)),
            w_yh: Matrix::zeros(items, h),
            b_y: Matrix::zeros(items, 1),
        }
    }

    /// Uniform `±1/√fan_in` for every tensor except the given embedding.
    pub fn init(dims: Dims, w_xv: Matrix, rng: &mut impl Rng) -> Result<Self> {
        let Dims { k, h, items } = dims;
        if w_xv.shape() != (k, 2 * items) {
            return Err(Error::invalid(format!(
                "embedding init has shape {:?}, expected ({k}, {})",
                w_xv.shape(),
                2 * items
            )));
        }
        let mut uniform = |rows, cols, fan_in: usize| {
            let bound = 1.0 / (fan_in as f64).sqrt();
            Matrix::from_fn(rows, cols, |_, _| rng.random_range(-bound..=bound))
        };
        let w = std::array::from_fn(|_| uniform(h, k, k));
        let u = std::array::from_fn(|_| uniform(h, h, h));
        let b = std::array::from_fn(|_| uniform(h, 1, h));
        let w_yh = uniform(items, h, h);
        let b_y = uniform(items, 1, h);
        Ok(ParamSet {
            w_xv,
            w,
            u,
            b,
            w_yh,
            b_y,
        })
    }

    pub fn dims(&self) -> Dims {
        Dims {
            k: self.w_xv.rows(),
            h: self.w_yh.cols(),
            items: self.w_yh.rows(),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.dims())
    }

    /// Tensors in [`PARAM_NAMES`] order.
    pub fn tensors(&self) -> [&Matrix; 15] {
        let [wi, wf, wo, wc] = &self.w;
        let [ui, uf, uo, uc] = &self.u;
        let [bi, bf, bo, bc] = &self.b;
        [&self.w_xv, wi, wf, wo, wc, ui, uf, uo, uc, bi, bf, bo, bc, &self.w_yh, &self.b_y]
    }

    pub fn tensors_mut(&mut self) -> [&mut Matrix; 15] {
        let [wi, wf, wo, wc] = &mut self.w;
        let [ui, uf, uo, uc] = &mut self.u;
        let [bi, bf, bo, bc] = &mut self.b;
        [
            &mut self.w_xv,
            wi,
            wf,
            wo,
            wc,
            ui,
            uf,
            uo,
            uc,
            bi,
            bf,
            bo,
            bc,
            &mut self.w_yh,
            &mut self.b_y,
        ]
    }

    /// Checks that every tensor agrees with `dims()`.
    pub fn check_shapes(&self) -> Result<()> {
        let Dims { k, h, items } = self.dims();
        let expected = |name: &str| match name {
            "w_xv" => (k, 2 * items),
            "w_yh" => (items, h),
            "b_y" => (items, 1),
            n if n.starts_with("w_") => (h, k),
            n if n.starts_with("u_") => (h, h),
            _ => (h, 1),
        };
        for (name, t) in PARAM_NAMES.iter().zip(self.tensors()) {
            if t.shape() != expected(name) {
                return Err(Error::invalid(format!(
                    "tensor {name} has shape {:?}, expected {:?}",
                    t.shape(),
                    expected(name)
                )));
            }
        }
        Ok(())
    }

    pub fn add_assign(&mut self, other: &ParamSet) {
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            a.add_assign(b);
        }
    }

    pub fn scale(&mut self, s: f64) {
        for t in self.tensors_mut() {
            t.scale(s);
        }
    }

    pub fn norm(&self) -> f64 {
        self.tensors().iter().map(|t| t.sum_sq()).sum::<f64>().sqrt()
    }
}
