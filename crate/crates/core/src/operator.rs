//! Averaging operators `T f(x_R) = ∫ f(π_L(m)) dσ` over the fibers of `π_R`.
//!
//! Every kernel is written in coordinates `m = (x_R, s)` on the incidence
//! manifold, where `s` parametrizes the fiber `π_R^{-1}(x_R)`, and dually as
//! `m = (x_L, r)` with `r` parametrizing `π_L^{-1}(x_L)`. Both charts carry the
//! same Lebesgue measure (the changes of variables have Jacobian 1), so
//! `∫_G T χ_F` can be sampled from either side.

use crate::error::{Error, Result};
use crate::lattice::LatticeSet;
use crate::models::{Model, ParamRegion, QuadraticModel};
use crate::poly::{CompiledPoly, MultiPoly};

/// A set that answers membership queries.
pub trait Indicator: Sync {
    fn dim(&self) -> usize;
    fn contains(&self, x: &[f64]) -> bool;
}

impl Indicator for LatticeSet {
    fn dim(&self) -> usize {
        LatticeSet::dim(self)
    }

    fn contains(&self, x: &[f64]) -> bool {
        LatticeSet::contains(self, x)
    }
}

#[derive(Clone, Debug)]
pub enum Kernel {
    /// `T f(x) = ∫_P f(x + γ(t)) dt`.
    Convolution { gamma: Vec<CompiledPoly>, region: ParamRegion },
    /// `T f(x, z) = χ_{[-1,1]^{d_L}}(x) ∫_{[-1,1]^{d_R}} f(y, z + Q(x, y)) dy`.
    Bilinear { q: QuadraticModel },
    /// Constant kernel `T f(x_R) = χ_{B_R}(x_R) ∫_{B_L} f`.
    Product { left_box: ParamRegion, right_box: ParamRegion },
}

#[derive(Clone, Debug)]
pub struct AveragingOperator {
    kernel: Kernel,
    label: String,
    nodes_per_axis: usize,
    /// Half-width of the ambient box `Ω = [−h, h]^n`.
    omega: f64,
    right_nodes: (Vec<Vec<f64>>, f64),
    left_nodes: (Vec<Vec<f64>>, f64),
}

pub const DEFAULT_NODES: usize = 16;
pub const DEFAULT_OMEGA: f64 = 2.0;

impl AveragingOperator {
    pub fn new(kernel: Kernel, label: impl Into<String>) -> Self {
        let mut op = AveragingOperator {
            kernel,
            label: label.into(),
            nodes_per_axis: DEFAULT_NODES,
            omega: DEFAULT_OMEGA,
            right_nodes: (Vec::new(), 0.0),
            left_nodes: (Vec::new(), 0.0),
        };
        op.rebuild_nodes();
        op
    }

    pub fn for_model(model: &Model) -> Result<Self> {
        let kernel = match model.quadratic() {
            Some(q) => Kernel::Bilinear { q },
            None => Kernel::Convolution {
                gamma: model.gamma::<f64>()?.iter().map(MultiPoly::compile).collect(),
                region: model.param_region(),
            },
        };
        Ok(Self::new(kernel, model.id()))
    }

    /// Convolution with an arbitrary polynomial surface.
    pub fn convolution(gamma: &[MultiPoly<f64>], region: ParamRegion, label: impl Into<String>) -> Result<Self> {
        let k = region.dim();
        if gamma.is_empty() || gamma.iter().any(|g| g.nvars() != k) {
            return Err(Error::InvalidDimensions("surface components must be polynomials in the region's variables".into()));
        }
        Ok(Self::new(Kernel::Convolution { gamma: gamma.iter().map(MultiPoly::compile).collect(), region }, label))
    }

    pub fn product(left_box: ParamRegion, right_box: ParamRegion) -> Self {
        Self::new(Kernel::Product { left_box, right_box }, "constant_kernel")
    }

    pub fn with_nodes(mut self, nodes_per_axis: usize) -> Self {
        self.nodes_per_axis = nodes_per_axis.max(1);
        self.rebuild_nodes();
        self
    }

    pub fn with_omega(mut self, half_width: f64) -> Self {
        self.omega = half_width;
        self
    }

    fn rebuild_nodes(&mut self) {
        self.right_nodes = self.right_region().midpoint_nodes(self.nodes_per_axis);
        self.left_nodes = self.left_region().midpoint_nodes(self.nodes_per_axis);
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// `n_L`, the dimension of the space `T` reads from.
    pub fn left_dim(&self) -> usize {
        match &self.kernel {
            Kernel::Convolution { gamma, .. } => gamma.len(),
            Kernel::Bilinear { q } => q.d_r() + q.ell(),
            Kernel::Product { left_box, .. } => left_box.dim(),
        }
    }

    /// `n_R`, the dimension of the space `T` writes to.
    pub fn right_dim(&self) -> usize {
        match &self.kernel {
            Kernel::Convolution { gamma, .. } => gamma.len(),
            Kernel::Bilinear { q } => q.d_l() + q.ell(),
            Kernel::Product { right_box, .. } => right_box.dim(),
        }
    }

    /// Parameter region `s` of the fibers of `π_R`.
    pub fn right_region(&self) -> ParamRegion {
        match &self.kernel {
            Kernel::Convolution { region, .. } => region.clone(),
            Kernel::Bilinear { q } => ParamRegion::cube(q.d_r(), -1.0, 1.0),
            Kernel::Product { left_box, .. } => left_box.clone(),
        }
    }

    /// Parameter region `r` of the fibers of `π_L`.
    pub fn left_region(&self) -> ParamRegion {
        match &self.kernel {
            Kernel::Convolution { region, .. } => region.clone(),
            Kernel::Bilinear { q } => ParamRegion::cube(q.d_l(), -1.0, 1.0),
            Kernel::Product { right_box, .. } => right_box.clone(),
        }
    }

    /// `π_L(m)` for `m = (x_R, s)`; false when `x_R` lies outside the kernel's
    /// support in the right variable.
    #[inline]
    pub fn push_left(&self, x_r: &[f64], s: &[f64], out: &mut [f64]) -> bool {
        match &self.kernel {
            Kernel::Convolution { gamma, .. } => {
                for (o, (x, g)) in out.iter_mut().zip(x_r.iter().zip(gamma)) {
                    *o = x + g.eval(s);
                }
                true
            }
            Kernel::Bilinear { q } => {
                let (x, z) = x_r.split_at(q.d_l());
                if x.iter().any(|v| v.abs() > 1.0) {
                    return false;
                }
                let qv = q.eval(x, s);
                out[..q.d_r()].copy_from_slice(s);
                for m in 0..q.ell() {
                    out[q.d_r() + m] = z[m] + qv[m];
                }
                true
            }
            Kernel::Product { right_box, .. } => {
                out.copy_from_slice(s);
                right_box.contains(x_r)
            }
        }
    }

    /// `π_R(m)` for `m = (x_L, r)`; false when `x_L` is outside the support.
    #[inline]
    pub fn lift_right(&self, x_l: &[f64], r: &[f64], out: &mut [f64]) -> bool {
        match &self.kernel {
            Kernel::Convolution { gamma, .. } => {
                for (o, (x, g)) in out.iter_mut().zip(x_l.iter().zip(gamma)) {
                    *o = x - g.eval(r);
                }
                true
            }
            Kernel::Bilinear { q } => {
                let (y, w) = x_l.split_at(q.d_r());
                if y.iter().any(|v| v.abs() > 1.0) {
                    return false;
                }
                let qv = q.eval(r, y);
                out[..q.d_l()].copy_from_slice(r);
                for m in 0..q.ell() {
                    out[q.d_l() + m] = w[m] - qv[m];
                }
                true
            }
            Kernel::Product { left_box, .. } => {
                out.copy_from_slice(r);
                left_box.contains(x_l)
            }
        }
    }

    /// `T f(x_R)` by the tensor midpoint rule over the fiber parameters.
    pub fn apply(&self, f: impl Fn(&[f64]) -> f64, x_r: &[f64]) -> f64 {
        let (nodes, w) = &self.right_nodes;
        let mut buf = vec![0.0; self.left_dim()];
        let mut acc = 0.0;
        for s in nodes {
            if self.push_left(x_r, s, &mut buf) {
                acc += f(&buf);
            }
        }
        acc * w
    }

    /// `T* g(x_L)` by the midpoint rule.
    pub fn apply_adjoint(&self, g: impl Fn(&[f64]) -> f64, x_l: &[f64]) -> f64 {
        let (nodes, w) = &self.left_nodes;
        let mut buf = vec![0.0; self.right_dim()];
        let mut acc = 0.0;
        for r in nodes {
            if self.lift_right(x_l, r, &mut buf) {
                acc += g(&buf);
            }
        }
        acc * w
    }

    pub fn apply_set(&self, f: &impl Indicator, x_r: &[f64]) -> f64 {
        self.apply(|x| if f.contains(x) { 1.0 } else { 0.0 }, x_r)
    }

    pub fn apply_adjoint_set(&self, g: &impl Indicator, x_l: &[f64]) -> f64 {
        self.apply_adjoint(|x| if g.contains(x) { 1.0 } else { 0.0 }, x_l)
    }
}
