//! Incidence geometry of the flat models: projections, kernel frames, incidence
//! triples `p = (m^l, m^c, m^r)`, the transport maps `C_p^l`, `C_p^r` and the
//! curvature weight `K(p)` with its normalized form `Φ(p)`.
//!
//! Transport is computed, not tabulated. For a vector `U` at `m^l`, `C_p^l U` is
//! the `z`-part of the unique `c` with
//! `dπ_L(m^c)[X_R(m^c) | E_z] c = dπ_L(m^l) U`, where `E_z` are the transverse
//! coordinate directions. `C_p^r` swaps the roles of the two sides.

use crate::error::{check_dim, Error, Result};
use crate::field::{lie_bracket, FramePair, PolyVectorField};
use crate::linalg::{combinations, det, from_columns, solve};
use crate::models::{Model, QuadraticModel};
use crate::poly::MultiPoly;
use crate::scalar::Scalar;
use crate::triangle::DimensionTriple;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layout {
    /// `M = {(x, t)} ⊂ R^n × R^k`, `π_L = x + γ(t)`, `π_R = x`.
    Convolution { n: usize, k: usize },
    /// `M = {(x, y, z)}`, `π_L = (y, z + Q(x, y))`, `π_R = (x, z)`.
    Bilinear { d_l: usize, d_r: usize, ell: usize },
}

#[derive(Clone, Debug)]
pub struct IncidenceGeometry<S> {
    layout: Layout,
    dims: DimensionTriple,
    pi_l: Vec<MultiPoly<S>>,
    pi_r: Vec<MultiPoly<S>>,
    jac_l: Vec<Vec<MultiPoly<S>>>,
    jac_r: Vec<Vec<MultiPoly<S>>>,
    frames: FramePair<S>,
    transverse: Vec<usize>,
    gamma: Vec<MultiPoly<S>>,
    quadratic: Option<QuadraticModel>,
}

/// A point of the triple incidence manifold, with its left and right parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct IncidenceTriple<S> {
    /// `t^l` (convolution) or `x^l` (bilinear).
    pub left: Vec<S>,
    /// `t^r` (convolution) or `y^r` (bilinear).
    pub right: Vec<S>,
    pub m_l: Vec<S>,
    pub m_c: Vec<S>,
    pub m_r: Vec<S>,
}

/// `z`-components of `C_p^l X_R^j` (one per `j`) and `C_p^r X_L^i` (one per `i`).
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureMaps<S> {
    pub left: Vec<Vec<S>>,
    pub right: Vec<Vec<S>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransportCheck<S> {
    pub finite_difference: Vec<S>,
    pub bracket: Vec<S>,
    /// Euclidean norm of `finite_difference − bracket`.
    pub discrepancy: f64,
}

fn jacobian<S: Scalar>(maps: &[MultiPoly<S>]) -> Vec<Vec<MultiPoly<S>>> {
    maps.iter().map(|p| (0..p.nvars()).map(|c| p.partial(c)).collect()).collect()
}

fn eval_matrix<S: Scalar>(m: &[Vec<MultiPoly<S>>], x: &[S]) -> Vec<Vec<S>> {
    m.iter().map(|row| row.iter().map(|p| p.eval(x)).collect()).collect()
}

fn mat_vec<S: Scalar>(m: &[Vec<S>], v: &[S]) -> Vec<S> {
    m.iter().map(|row| row.iter().zip(v).fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())).collect()
}

fn sub<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(x, y)| x.clone() - y.clone()).collect()
}

fn add<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(x, y)| x.clone() + y.clone()).collect()
}

fn norm2<S: Scalar>(v: &[S]) -> S {
    v.iter().fold(S::zero(), |acc, x| acc + x.clone() * x.clone())
}

impl<S: Scalar> IncidenceGeometry<S> {
    /// Convolution model from the frame-normalized surface map `γ : R^k → R^n`,
    /// whose first `k` components must be `t_1, …, t_k`.
    pub fn convolution(gamma: Vec<MultiPoly<S>>) -> Result<Self> {
        let n = gamma.len();
        let k = gamma.first().map_or(0, |g| g.nvars());
        if k == 0 || k >= n {
            return Err(Error::InvalidDimensions(format!("surface map R^{k} -> R^{n}")));
        }
        for (i, g) in gamma.iter().enumerate().take(k) {
            if *g != MultiPoly::var(k, i) {
                return Err(Error::InvalidArgument("leading components of the surface map must be t_1..t_k".into()));
            }
        }
        let big_n = n + k;
        let t_map: Vec<usize> = (n..n + k).collect();
        let g_big: Vec<MultiPoly<S>> = gamma.iter().map(|g| g.relabel(big_n, &t_map)).collect();
        let pi_l: Vec<MultiPoly<S>> = (0..n).map(|m| &MultiPoly::var(big_n, m) + &g_big[m]).collect();
        let pi_r: Vec<MultiPoly<S>> = (0..n).map(|m| MultiPoly::var(big_n, m)).collect();
        let left: Vec<PolyVectorField<S>> = (0..k)
            .map(|i| {
                let mut entries = vec![(n + i, MultiPoly::one(big_n))];
                for (m, g) in g_big.iter().enumerate() {
                    let d = g.partial(n + i);
                    if !d.is_zero() {
                        entries.push((m, -&d));
                    }
                }
                PolyVectorField::from_sparse(big_n, entries)
            })
            .collect();
        let right: Vec<PolyVectorField<S>> = (0..k).map(|j| PolyVectorField::coordinate(big_n, n + j)).collect();
        let ell = n - k;
        let dims = DimensionTriple::new(n, n, ell)?;
        let frames = FramePair::new(left, right, n, n, ell)?;
        let geom = IncidenceGeometry {
            layout: Layout::Convolution { n, k },
            dims,
            jac_l: jacobian(&pi_l),
            jac_r: jacobian(&pi_r),
            pi_l,
            pi_r,
            frames,
            transverse: (k..n).collect(),
            gamma,
            quadratic: None,
        };
        Ok(geom)
    }

    pub fn bilinear(q: &QuadraticModel) -> Result<Self> {
        let (d_l, d_r, ell) = (q.d_l(), q.d_r(), q.ell());
        let big_n = d_l + d_r + ell;
        let x = |i: usize| MultiPoly::<S>::var(big_n, i);
        let y = |j: usize| MultiPoly::<S>::var(big_n, d_l + j);
        let z = |m: usize| MultiPoly::<S>::var(big_n, d_l + d_r + m);
        let q_poly = |m: usize| {
            let mut acc = MultiPoly::zero(big_n);
            for i in 0..d_l {
                for j in 0..d_r {
                    let c = q.coeff(i, j, m);
                    if c != 0.0 {
                        acc = &acc + &(&x(i) * &y(j)).scale(&S::from_real(c));
                    }
                }
            }
            acc
        };
        let mut pi_l: Vec<MultiPoly<S>> = (0..d_r).map(y).collect();
        pi_l.extend((0..ell).map(|m| &z(m) + &q_poly(m)));
        let mut pi_r: Vec<MultiPoly<S>> = (0..d_l).map(x).collect();
        pi_r.extend((0..ell).map(z));
        let left: Vec<PolyVectorField<S>> = (0..d_l)
            .map(|i| {
                let mut entries = vec![(i, MultiPoly::one(big_n))];
                for m in 0..ell {
                    let mut c = MultiPoly::zero(big_n);
                    for j in 0..d_r {
                        let v = q.coeff(i, j, m);
                        if v != 0.0 {
                            c = &c + &y(j).scale(&S::from_real(v));
                        }
                    }
                    if !c.is_zero() {
                        entries.push((d_l + d_r + m, -&c));
                    }
                }
                PolyVectorField::from_sparse(big_n, entries)
            })
            .collect();
        let right: Vec<PolyVectorField<S>> = (0..d_r).map(|j| PolyVectorField::coordinate(big_n, d_l + j)).collect();
        let dims = q.dims();
        let frames = FramePair::new(left, right, dims.n_l(), dims.n_r(), ell)?;
        Ok(IncidenceGeometry {
            layout: Layout::Bilinear { d_l, d_r, ell },
            dims,
            jac_l: jacobian(&pi_l),
            jac_r: jacobian(&pi_r),
            pi_l,
            pi_r,
            frames,
            transverse: (d_l + d_r..big_n).collect(),
            gamma: Vec::new(),
            quadratic: Some(q.clone()),
        })
    }

    pub fn for_model(model: &Model) -> Result<Self> {
        match model.quadratic() {
            Some(q) => Self::bilinear(&q),
            None => Self::convolution(model.frame_gamma()?),
        }
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn dims(&self) -> DimensionTriple {
        self.dims
    }

    pub fn frames(&self) -> &FramePair<S> {
        &self.frames
    }

    pub fn ambient_dim(&self) -> usize {
        self.frames.ambient_dim()
    }

    pub fn pi_l(&self) -> &[MultiPoly<S>] {
        &self.pi_l
    }

    pub fn pi_r(&self) -> &[MultiPoly<S>] {
        &self.pi_r
    }

    /// Coordinates spanning the complement of the `X_R` (and `X_L`) directions.
    pub fn transverse(&self) -> &[usize] {
        &self.transverse
    }

    /// Dimension of the left parameter (`t^l` or `x^l`).
    pub fn left_param_dim(&self) -> usize {
        match self.layout {
            Layout::Convolution { k, .. } => k,
            Layout::Bilinear { d_l, .. } => d_l,
        }
    }

    pub fn right_param_dim(&self) -> usize {
        match self.layout {
            Layout::Convolution { k, .. } => k,
            Layout::Bilinear { d_r, .. } => d_r,
        }
    }

    pub fn project_l(&self, m: &[S]) -> Vec<S> {
        self.pi_l.iter().map(|p| p.eval(m)).collect()
    }

    pub fn project_r(&self, m: &[S]) -> Vec<S> {
        self.pi_r.iter().map(|p| p.eval(m)).collect()
    }

    fn gamma_at(&self, t: &[S]) -> Vec<S> {
        self.gamma.iter().map(|g| g.eval(t)).collect()
    }

    /// Builds `p` from the center `m^c` and the two free parameters.
    pub fn triple(&self, m_c: &[S], left: &[S], right: &[S]) -> Result<IncidenceTriple<S>> {
        check_dim(self.ambient_dim(), m_c.len())?;
        check_dim(self.left_param_dim(), left.len())?;
        check_dim(self.right_param_dim(), right.len())?;
        let (m_l, m_r) = match self.layout {
            Layout::Convolution { n, .. } => {
                let (x_c, t_c) = m_c.split_at(n);
                let shift = sub(&self.gamma_at(t_c), &self.gamma_at(left));
                let mut m_l = add(x_c, &shift);
                m_l.extend_from_slice(left);
                let mut m_r = x_c.to_vec();
                m_r.extend_from_slice(right);
                (m_l, m_r)
            }
            Layout::Bilinear { d_l, d_r, .. } => {
                let q = self.quadratic.as_ref().expect("bilinear layout carries its map");
                let x = &m_c[..d_l];
                let y = &m_c[d_l..d_l + d_r];
                let z = &m_c[d_l + d_r..];
                let dq = sub(&q.eval_scalar(x, y), &q.eval_scalar(left, y));
                let mut m_l = left.to_vec();
                m_l.extend_from_slice(y);
                m_l.extend(add(z, &dq));
                let mut m_r = x.to_vec();
                m_r.extend_from_slice(right);
                m_r.extend_from_slice(z);
                (m_l, m_r)
            }
        };
        Ok(IncidenceTriple { left: left.to_vec(), right: right.to_vec(), m_l, m_c: m_c.to_vec(), m_r })
    }

    /// Convolution convenience: `m^c = (x_c, t_c)`.
    pub fn convolution_triple(&self, x_c: &[S], t_l: &[S], t_c: &[S], t_r: &[S]) -> Result<IncidenceTriple<S>> {
        let mut m_c = x_c.to_vec();
        m_c.extend_from_slice(t_c);
        self.triple(&m_c, t_l, t_r)
    }

    /// The center's own left and right parameters.
    pub fn center_params(&self, m_c: &[S]) -> (Vec<S>, Vec<S>) {
        match self.layout {
            Layout::Convolution { n, .. } => (m_c[n..].to_vec(), m_c[n..].to_vec()),
            Layout::Bilinear { d_l, d_r, .. } => (m_c[..d_l].to_vec(), m_c[d_l..d_l + d_r].to_vec()),
        }
    }

    /// `(a, b) = (left − left_c, right − right_c)`.
    pub fn offsets(&self, p: &IncidenceTriple<S>) -> (Vec<S>, Vec<S>) {
        let (lc, rc) = self.center_params(&p.m_c);
        (sub(&p.left, &lc), sub(&p.right, &rc))
    }

    /// `dπ_L(m^c)[X_R(m^c) | E_z]`, square of size `n_L`.
    fn left_system(&self, m_c: &[S]) -> Vec<Vec<S>> {
        let jl = eval_matrix(&self.jac_l, m_c);
        let mut cols: Vec<Vec<S>> = self.frames.right.iter().map(|f| mat_vec(&jl, &f.eval(m_c))).collect();
        cols.extend(self.transverse.iter().map(|&z| jl.iter().map(|row| row[z].clone()).collect()));
        from_columns(&cols)
    }

    fn right_system(&self, m_c: &[S]) -> Vec<Vec<S>> {
        let jr = eval_matrix(&self.jac_r, m_c);
        let mut cols: Vec<Vec<S>> = self.frames.left.iter().map(|f| mat_vec(&jr, &f.eval(m_c))).collect();
        cols.extend(self.transverse.iter().map(|&z| jr.iter().map(|row| row[z].clone()).collect()));
        from_columns(&cols)
    }

    fn solve_z(&self, a: &[Vec<S>], rhs: &[S], skip: usize) -> Result<Vec<S>> {
        let c = solve(a, rhs).ok_or_else(|| Error::InvalidArgument("transport system is singular".into()))?;
        Ok(c[skip..].to_vec())
    }

    /// `z`-part of `C_p^l U` for a vector `U` at `m^l`.
    pub fn left_transport(&self, p: &IncidenceTriple<S>, u: &[S]) -> Result<Vec<S>> {
        check_dim(self.ambient_dim(), u.len())?;
        let rhs = mat_vec(&eval_matrix(&self.jac_l, &p.m_l), u);
        self.solve_z(&self.left_system(&p.m_c), &rhs, self.frames.d_r())
    }

    /// `z`-part of `C_p^r U` for a vector `U` at `m^r`.
    pub fn right_transport(&self, p: &IncidenceTriple<S>, u: &[S]) -> Result<Vec<S>> {
        check_dim(self.ambient_dim(), u.len())?;
        let rhs = mat_vec(&eval_matrix(&self.jac_r, &p.m_r), u);
        self.solve_z(&self.right_system(&p.m_c), &rhs, self.frames.d_l())
    }

    /// `C_p^l X_R^j` and `C_p^r X_L^i`, computed from differences so that the
    /// maps vanish identically when `m^l = m^c` (resp. `m^r = m^c`).
    pub fn curvature_maps(&self, p: &IncidenceTriple<S>) -> Result<CurvatureMaps<S>> {
        let jl_l = eval_matrix(&self.jac_l, &p.m_l);
        let jl_c = eval_matrix(&self.jac_l, &p.m_c);
        let a_l = self.left_system(&p.m_c);
        let left = self
            .frames
            .right
            .iter()
            .map(|f| {
                let rhs = sub(&mat_vec(&jl_l, &f.eval(&p.m_l)), &mat_vec(&jl_c, &f.eval(&p.m_c)));
                self.solve_z(&a_l, &rhs, self.frames.d_r())
            })
            .collect::<Result<Vec<_>>>()?;
        let jr_r = eval_matrix(&self.jac_r, &p.m_r);
        let jr_c = eval_matrix(&self.jac_r, &p.m_c);
        let a_r = self.right_system(&p.m_c);
        let right = self
            .frames
            .left
            .iter()
            .map(|f| {
                let rhs = sub(&mat_vec(&jr_r, &f.eval(&p.m_r)), &mat_vec(&jr_c, &f.eval(&p.m_c)));
                self.solve_z(&a_r, &rhs, self.frames.d_l())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CurvatureMaps { left, right })
    }

    /// `det[X_L(m), X_R(m), E_z]`; `±1` in the flat coordinates used here.
    pub fn identity_block(&self, m: &[S]) -> S {
        let mut cols: Vec<Vec<S>> = self.frames.left.iter().map(|f| f.eval(m)).collect();
        cols.extend(self.frames.right.iter().map(|f| f.eval(m)));
        let n = self.ambient_dim();
        cols.extend(self.transverse.iter().map(|&z| {
            let mut e = vec![S::zero(); n];
            e[z] = S::one();
            e
        }));
        det(&from_columns(&cols))
    }

    /// `Σ det²` over index sets `(S_L, S_R)` with `|S_L| + |S_R| = ℓ` accepted
    /// by `keep`, times the squared identity block.
    pub fn k_squared_filtered(
        &self,
        p: &IncidenceTriple<S>,
        keep: impl Fn(&[usize], &[usize]) -> bool,
    ) -> Result<S> {
        let maps = self.curvature_maps(p)?;
        let ell = self.dims.ell();
        let d_r = maps.left.len();
        let cols: Vec<&Vec<S>> = maps.left.iter().chain(&maps.right).collect();
        let mut acc = S::zero();
        for subset in combinations(cols.len(), ell) {
            let s_r: Vec<usize> = subset.iter().copied().filter(|&c| c < d_r).collect();
            let s_l: Vec<usize> = subset.iter().copied().filter(|&c| c >= d_r).map(|c| c - d_r).collect();
            if !keep(&s_l, &s_r) {
                continue;
            }
            let m: Vec<Vec<S>> = (0..ell).map(|r| subset.iter().map(|&c| cols[c][r].clone()).collect()).collect();
            let d = det(&m);
            acc = acc + d.clone() * d;
        }
        let block = self.identity_block(&p.m_c);
        Ok(acc * block.clone() * block)
    }

    pub fn k_squared(&self, p: &IncidenceTriple<S>) -> Result<S> {
        self.k_squared_filtered(p, |_, _| true)
    }

    pub fn k_general(&self, p: &IncidenceTriple<S>) -> Result<f64> {
        Ok(self.k_squared(p)?.approx().max(0.0).sqrt())
    }

    /// Squared distance in `L × R` between `(π_L(m^c), π_R(m^c))` and
    /// `(π_L(m^r), π_R(m^l))`.
    pub fn fiber_distance_squared(&self, p: &IncidenceTriple<S>) -> S {
        let dl = sub(&self.project_l(&p.m_c), &self.project_l(&p.m_r));
        let dr = sub(&self.project_r(&p.m_c), &self.project_r(&p.m_l));
        norm2(&dl) + norm2(&dr)
    }

    /// `K(p) / dist^κ`, with `κ = d_L + d_R − ℓ`.
    pub fn phi(&self, p: &IncidenceTriple<S>) -> Result<f64> {
        let k = self.k_general(p)?;
        let dist = self.fiber_distance_squared(p).approx().max(0.0).sqrt();
        if dist == 0.0 {
            return if k == 0.0 { Ok(0.0) } else { Err(Error::SingularFiberPoint) };
        }
        Ok(k / dist.powi(self.dims.kappa() as i32))
    }

    /// Moves `m^l` along the flow of `X_L^dir` by `h`, which shifts the left
    /// parameter by `h e_dir` and keeps `m^c`, `m^r` fixed.
    pub fn shift_left(&self, p: &IncidenceTriple<S>, dir: usize, h: S) -> Result<IncidenceTriple<S>> {
        if dir >= self.left_param_dim() {
            return Err(Error::InvalidArgument(format!("direction {dir} out of range")));
        }
        let mut left = p.left.clone();
        left[dir] = left[dir].clone() + h;
        self.triple(&p.m_c, &left, &p.right)
    }

    /// Compares the forward difference of `C_p^l V(m^l)` along `X_L^dir` with
    /// `C_p^l [X_L^dir, V](m^l)`.
    pub fn bracket_transport_check(
        &self,
        p: &IncidenceTriple<S>,
        v: &PolyVectorField<S>,
        dir: usize,
        h: S,
    ) -> Result<TransportCheck<S>> {
        check_dim(self.ambient_dim(), v.dim())?;
        if h.is_zero() {
            return Err(Error::InvalidArgument("step must be nonzero".into()));
        }
        let shifted = self.shift_left(p, dir, h.clone())?;
        let c0 = self.left_transport(p, &v.eval(&p.m_l))?;
        let c1 = self.left_transport(&shifted, &v.eval(&shifted.m_l))?;
        let fd: Vec<S> = c1.iter().zip(&c0).map(|(a, b)| (a.clone() - b.clone()) / h.clone()).collect();
        let br = lie_bracket(&self.frames.left[dir], v)?;
        let bracket = self.left_transport(p, &br.eval(&p.m_l))?;
        let discrepancy = norm2(&sub(&fd, &bracket)).approx().max(0.0).sqrt();
        Ok(TransportCheck { finite_difference: fd, bracket, discrepancy })
    }
}
