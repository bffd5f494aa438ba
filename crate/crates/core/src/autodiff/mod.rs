//! Reverse-mode automatic differentiation on dense matrices.
//!
//! Operations are recorded onto a [`Tape`] in forward order and replayed in
//! reverse by [`Tape::backward`], accumulating vector-Jacobian products into
//! each tensor's `grad`. Gradients from multiple uses of a tensor sum.
//!
//! A tape and its tensors form one single-threaded unit: independent tapes
//! (one per cross-validation fold) may run concurrently, but nothing inside
//! a tape is safe for concurrent mutation.

mod adam;
pub mod gradcheck;

pub use adam::Adam;

use crate::error::{CdmError, Result};
use crate::matrix::Matrix;

/// Identifier of a tensor on its tape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TensorId(usize);

impl TensorId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// A matrix-valued node on the differentiation tape.
///
/// `grad` always has the same shape as `values`.
#[derive(Debug, Clone)]
pub struct Tensor {
    values: Matrix,
    grad: Matrix,
    requires_grad: bool,
    tape_id: TensorId,
}

impl Tensor {
    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn grad(&self) -> &Matrix {
        &self.grad
    }

    pub fn requires_grad(&self) -> bool {
        self.requires_grad
    }

    pub fn tape_id(&self) -> TensorId {
        self.tape_id
    }

    pub fn rows(&self) -> usize {
        self.values.rows()
    }

    pub fn cols(&self) -> usize {
        self.values.cols()
    }
}

/// Recorded operation kinds. Each stores what its backward rule needs beyond
/// the input/output ids.
#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Matmul,
    Add,
    Sub,
    Mul,
    AddRowVec,
    ScalarMul(f64),
    LeakyRelu(f64),
    Sigmoid,
    SoftmaxRow,
    /// Row softmax restricted to the second input's nonzero pattern. No
    /// gradient flows into the pattern.
    MaskedSoftmaxRow,
    Log,
    Transpose,
    RowSlice(usize, usize),
    ColSlice(usize, usize),
    ConcatRows,
    ConcatCols,
    RowScale,
    MeanRows,
    SumAll,
    PermuteRows(Vec<usize>),
}

#[derive(Debug)]
struct OpRecord {
    op: Op,
    inputs: Vec<TensorId>,
    output: TensorId,
}

/// Wengert tape: tensors plus the operations that produced them, in
/// topological (recording) order.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Tensor>,
    ops: Vec<OpRecord>,
}

/// Numerical floor applied inside `log` so that probabilities arbitrarily
/// close to zero stay differentiable.
pub const LOG_CLAMP: f64 = 1e-12;

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn num_ops(&self) -> usize {
        self.ops.len()
    }

    /// Insert a leaf tensor (input, constant, or parameter snapshot).
    pub fn leaf(&mut self, values: Matrix, requires_grad: bool) -> TensorId {
        self.push(values, requires_grad, Op::Leaf, vec![])
    }

    /// Insert a non-differentiable constant.
    pub fn constant(&mut self, values: Matrix) -> TensorId {
        self.leaf(values, false)
    }

    /// Insert a 1x1 constant.
    pub fn scalar(&mut self, v: f64) -> TensorId {
        self.constant(Matrix::from_vec(1, 1, vec![v]))
    }

    pub fn tensor(&self, id: TensorId) -> &Tensor {
        &self.nodes[id.0]
    }

    pub fn value(&self, id: TensorId) -> &Matrix {
        &self.nodes[id.0].values
    }

    pub fn grad(&self, id: TensorId) -> &Matrix {
        &self.nodes[id.0].grad
    }

    /// Value of a 1x1 tensor.
    pub fn scalar_value(&self, id: TensorId) -> f64 {
        debug_assert_eq!(self.value(id).shape(), (1, 1));
        self.value(id).get(0, 0)
    }

    pub fn zero_grads(&mut self) {
        for node in &mut self.nodes {
            node.grad.fill(0.0);
        }
    }

    fn push(&mut self, values: Matrix, requires_grad: bool, op: Op, inputs: Vec<TensorId>) -> TensorId {
        debug_assert!(
            values.all_finite(),
            "non-finite values produced by {op:?}"
        );
        let id = TensorId(self.nodes.len());
        let grad = Matrix::zeros(values.rows(), values.cols());
        self.nodes.push(Tensor {
            values,
            grad,
            requires_grad,
            tape_id: id,
        });
        self.ops.push(OpRecord { op, inputs, output: id });
        id
    }

    fn any_requires_grad(&self, ids: &[TensorId]) -> bool {
        ids.iter().any(|id| self.nodes[id.0].requires_grad)
    }

    // ---- forward operations -------------------------------------------------

    /// `a · b` with backward `dA += G·Bᵀ`, `dB += Aᵀ·G`.
    pub fn matmul(&mut self, a: TensorId, b: TensorId) -> Result<TensorId> {
        let out = self.value(a).matmul(self.value(b))?;
        let rg = self.any_requires_grad(&[a, b]);
        Ok(self.push(out, rg, Op::Matmul, vec![a, b]))
    }

    pub fn add(&mut self, a: TensorId, b: TensorId) -> Result<TensorId> {
        let out = self.value(a).add(self.value(b))?;
        let rg = self.any_requires_grad(&[a, b]);
        Ok(self.push(out, rg, Op::Add, vec![a, b]))
    }

    pub fn sub(&mut self, a: TensorId, b: TensorId) -> Result<TensorId> {
        let out = self.value(a).sub(self.value(b))?;
        let rg = self.any_requires_grad(&[a, b]);
        Ok(self.push(out, rg, Op::Sub, vec![a, b]))
    }

    /// Elementwise (Hadamard) product.
    pub fn mul(&mut self, a: TensorId, b: TensorId) -> Result<TensorId> {
        let out = self.value(a).hadamard(self.value(b))?;
        let rg = self.any_requires_grad(&[a, b]);
        Ok(self.push(out, rg, Op::Mul, vec![a, b]))
    }

    /// Add a 1xC row vector to every row of an KxC matrix.
    pub fn add_row_vec(&mut self, a: TensorId, b: TensorId) -> Result<TensorId> {
        let (av, bv) = (self.value(a), self.value(b));
        if bv.rows() != 1 || bv.cols() != av.cols() {
            return Err(CdmError::shape("add_row_vec", av.shape(), bv.shape()));
        }
        let mut out = av.clone();
        for i in 0..out.rows() {
            for j in 0..out.cols() {
                let v = out.get(i, j) + bv.get(0, j);
                out.set(i, j, v);
            }
        }
        let rg = self.any_requires_grad(&[a, b]);
        Ok(self.push(out, rg, Op::AddRowVec, vec![a, b]))
    }

    pub fn scalar_mul(&mut self, a: TensorId, c: f64) -> Result<TensorId> {
        let out = self.value(a).scale(c);
        let rg = self.any_requires_grad(&[a]);
        Ok(self.push(out, rg, Op::ScalarMul(c), vec![a]))
    }

    /// `x ↦ x` for `x > 0`, `slope·x` otherwise; the subgradient at exactly 0
    /// takes the positive branch.
    pub fn leaky_relu(&mut self, a: TensorId, slope: f64) -> Result<TensorId> {
        if !(0.0 < slope && slope < 1.0) {
            return Err(CdmError::Contract(format!(
                "leaky_relu slope must lie in (0,1), got {slope}"
            )));
        }
        let out = self.value(a).map(|x| if x > 0.0 { x } else { slope * x });
        let rg = self.any_requires_grad(&[a]);
        Ok(self.push(out, rg, Op::LeakyRelu(slope), vec![a]))
    }

    pub fn sigmoid(&mut self, a: TensorId) -> Result<TensorId> {
        let out = self.value(a).map(|x| 1.0 / (1.0 + (-x).exp()));
        let rg = self.any_requires_grad(&[a]);
        Ok(self.push(out, rg, Op::Sigmoid, vec![a]))
    }

    /// Row softmax with max subtraction; every output row sums to 1.
    pub fn softmax_row(&mut self, a: TensorId) -> Result<TensorId> {
        let out = self.value(a).row_softmax();
        let rg = self.any_requires_grad(&[a]);
        Ok(self.push(out, rg, Op::SoftmaxRow, vec![a]))
    }

    /// Row softmax restricted to the nonzero pattern of `support`; rows whose
    /// support is empty come out all-zero. `support` receives no gradient.
    pub fn masked_softmax_row(&mut self, a: TensorId, support: TensorId) -> Result<TensorId> {
        let out = self.value(a).masked_row_softmax(self.value(support))?;
        let rg = self.any_requires_grad(&[a]);
        Ok(self.push(out, rg, Op::MaskedSoftmaxRow, vec![a, support]))
    }

    /// Natural log with the input clamped at [`LOG_CLAMP`].
    pub fn log(&mut self, a: TensorId) -> Result<TensorId> {
        let out = self.value(a).map(|x| x.max(LOG_CLAMP).ln());
        let rg = self.any_requires_grad(&[a]);
        Ok(self.push(out, rg, Op::Log, vec![a]))
    }

    pub fn transpose(&mut self, a: TensorId) -> Result<TensorId> {
        let out = self.value(a).transpose();
        let rg = self.any_requires_grad(&[a]);
        Ok(self.push(out, rg, Op::Transpose, vec![a]))
    }

    /// Rows `r0..r1` of `a`.
    pub fn row_slice(&mut self, a: TensorId, r0: usize, r1: usize) -> Result<TensorId> {
        let av = self.value(a);
        if r0 >= r1 || r1 > av.rows() {
            return Err(CdmError::Contract(format!(
                "row_slice {r0}..{r1} out of range for {} rows",
                av.rows()
            )));
        }
        let cols = av.cols();
        let out = Matrix::from_fn(r1 - r0, cols, |i, j| av.get(r0 + i, j));
        let rg = self.any_requires_grad(&[a]);
        Ok(self.push(out, rg, Op::RowSlice(r0, r1), vec![a]))
    }

    /// Columns `c0..c1` of `a`.
    pub fn col_slice(&mut self, a: TensorId, c0: usize, c1: usize) -> Result<TensorId> {
        let av = self.value(a);
        if c0 >= c1 || c1 > av.cols() {
            return Err(CdmError::Contract(format!(
                "col_slice {c0}..{c1} out of range for {} cols",
                av.cols()
            )));
        }
        let rows = av.rows();
        let out = Matrix::from_fn(rows, c1 - c0, |i, j| av.get(i, c0 + j));
        let rg = self.any_requires_grad(&[a]);
        Ok(self.push(out, rg, Op::ColSlice(c0, c1), vec![a]))
    }

    /// Stack tensors vertically.
    pub fn concat_rows(&mut self, ids: &[TensorId]) -> Result<TensorId> {
        if ids.is_empty() {
            return Err(CdmError::Contract("concat_rows of nothing".into()));
        }
        let cols = self.value(ids[0]).cols();
        let mut rows = 0;
        for &id in ids {
            let v = self.value(id);
            if v.cols() != cols {
                return Err(CdmError::shape("concat_rows", (rows, cols), v.shape()));
            }
            rows += v.rows();
        }
        let mut data = Vec::with_capacity(rows * cols);
        for &id in ids {
            data.extend_from_slice(self.value(id).data());
        }
        let out = Matrix::from_vec(rows, cols, data);
        let rg = self.any_requires_grad(ids);
        Ok(self.push(out, rg, Op::ConcatRows, ids.to_vec()))
    }

    /// Stack tensors horizontally.
    pub fn concat_cols(&mut self, ids: &[TensorId]) -> Result<TensorId> {
        if ids.is_empty() {
            return Err(CdmError::Contract("concat_cols of nothing".into()));
        }
        let rows = self.value(ids[0]).rows();
        let mut cols = 0;
        for &id in ids {
            let v = self.value(id);
            if v.rows() != rows {
                return Err(CdmError::shape("concat_cols", (rows, cols), v.shape()));
            }
            cols += v.cols();
        }
        let mut out = Matrix::zeros(rows, cols);
        let mut offset = 0;
        for &id in ids {
            let v = self.value(id).clone();
            for i in 0..rows {
                for j in 0..v.cols() {
                    out.set(i, offset + j, v.get(i, j));
                }
            }
            offset += v.cols();
        }
        let rg = self.any_requires_grad(ids);
        Ok(self.push(out, rg, Op::ConcatCols, ids.to_vec()))
    }

    /// Scale row `i` of `a` by `w[i]` where `w` is nx1.
    pub fn row_scale(&mut self, a: TensorId, w: TensorId) -> Result<TensorId> {
        let (av, wv) = (self.value(a), self.value(w));
        if wv.cols() != 1 || wv.rows() != av.rows() {
            return Err(CdmError::shape("row_scale", av.shape(), wv.shape()));
        }
        let out = Matrix::from_fn(av.rows(), av.cols(), |i, j| av.get(i, j) * wv.get(i, 0));
        let rg = self.any_requires_grad(&[a, w]);
        Ok(self.push(out, rg, Op::RowScale, vec![a, w]))
    }

    /// Column means: nxd → 1xd. Errors on an empty input.
    pub fn mean_rows(&mut self, a: TensorId) -> Result<TensorId> {
        let av = self.value(a);
        if av.rows() == 0 {
            return Err(CdmError::Contract("mean_rows of an empty matrix".into()));
        }
        let n = av.rows() as f64;
        let mut out = Matrix::zeros(1, av.cols());
        for i in 0..av.rows() {
            for j in 0..av.cols() {
                out.set(0, j, out.get(0, j) + av.get(i, j) / n);
            }
        }
        let rg = self.any_requires_grad(&[a]);
        Ok(self.push(out, rg, Op::MeanRows, vec![a]))
    }

    /// Sum of all entries as a 1x1 tensor.
    pub fn sum_all(&mut self, a: TensorId) -> Result<TensorId> {
        let out = Matrix::from_vec(1, 1, vec![self.value(a).sum()]);
        let rg = self.any_requires_grad(&[a]);
        Ok(self.push(out, rg, Op::SumAll, vec![a]))
    }

    /// Reorder rows: `out[k] = a[perm[k]]`. The permutation is a constant;
    /// no gradient flows through it.
    pub fn permute_rows(&mut self, a: TensorId, perm: &[usize]) -> Result<TensorId> {
        let av = self.value(a);
        let n = av.rows();
        if perm.len() != n {
            return Err(CdmError::Contract(format!(
                "permutation length {} for {} rows",
                perm.len(),
                n
            )));
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || seen[p] {
                return Err(CdmError::Contract("not a permutation".into()));
            }
            seen[p] = true;
        }
        let out = Matrix::from_fn(n, av.cols(), |i, j| av.get(perm[i], j));
        let rg = self.any_requires_grad(&[a]);
        Ok(self.push(out, rg, Op::PermuteRows(perm.to_vec()), vec![a]))
    }

    // ---- backward -----------------------------------------------------------

    /// Reverse pass from a scalar loss. Seeds the loss gradient with 1 and
    /// visits every recorded operation exactly once, in reverse order.
    pub fn backward(&mut self, loss: TensorId) -> Result<()> {
        if self.value(loss).shape() != (1, 1) {
            return Err(CdmError::Contract(format!(
                "backward needs a 1x1 loss, got {}x{}",
                self.value(loss).rows(),
                self.value(loss).cols()
            )));
        }
        self.backward_seeded(&[(loss, Matrix::from_vec(1, 1, vec![1.0]))])
    }

    /// Reverse pass from explicit output seeds. Used by the trainer to
    /// backpropagate per-graph embedding gradients that were produced on a
    /// separate loss tape.
    pub fn backward_seeded(&mut self, seeds: &[(TensorId, Matrix)]) -> Result<()> {
        for (id, seed) in seeds {
            if self.value(*id).shape() != seed.shape() {
                return Err(CdmError::shape(
                    "backward seed",
                    self.value(*id).shape(),
                    seed.shape(),
                ));
            }
            self.nodes[id.0].grad.add_assign(seed);
        }
        for idx in (0..self.ops.len()).rev() {
            self.backward_op(idx);
        }
        Ok(())
    }

    fn backward_op(&mut self, idx: usize) {
        let out = self.ops[idx].output;
        if !self.nodes[out.0].requires_grad {
            return;
        }
        let op = self.ops[idx].op.clone();
        let inputs = self.ops[idx].inputs.clone();
        let g = self.nodes[out.0].grad.clone();
        match op {
            Op::Leaf => {}
            Op::Matmul => {
                let (a, b) = (inputs[0], inputs[1]);
                if self.nodes[a.0].requires_grad {
                    let bt = self.value(b).transpose();
                    let da = g.matmul(&bt).expect("recorded shapes are consistent");
                    self.nodes[a.0].grad.add_assign(&da);
                }
                if self.nodes[b.0].requires_grad {
                    let at = self.value(a).transpose();
                    let db = at.matmul(&g).expect("recorded shapes are consistent");
                    self.nodes[b.0].grad.add_assign(&db);
                }
            }
            Op::Add => {
                for &input in &inputs {
                    if self.nodes[input.0].requires_grad {
                        self.nodes[input.0].grad.add_assign(&g);
                    }
                }
            }
            Op::Sub => {
                let (a, b) = (inputs[0], inputs[1]);
                if self.nodes[a.0].requires_grad {
                    self.nodes[a.0].grad.add_assign(&g);
                }
                if self.nodes[b.0].requires_grad {
                    let neg = g.scale(-1.0);
                    self.nodes[b.0].grad.add_assign(&neg);
                }
            }
            Op::Mul => {
                let (a, b) = (inputs[0], inputs[1]);
                if self.nodes[a.0].requires_grad {
                    let da = g.hadamard(self.value(b)).expect("same shape");
                    self.nodes[a.0].grad.add_assign(&da);
                }
                if self.nodes[b.0].requires_grad {
                    let db = g.hadamard(self.value(a)).expect("same shape");
                    self.nodes[b.0].grad.add_assign(&db);
                }
            }
            Op::AddRowVec => {
                let (a, b) = (inputs[0], inputs[1]);
                if self.nodes[a.0].requires_grad {
                    self.nodes[a.0].grad.add_assign(&g);
                }
                if self.nodes[b.0].requires_grad {
                    let mut db = Matrix::zeros(1, g.cols());
                    for i in 0..g.rows() {
                        for j in 0..g.cols() {
                            db.set(0, j, db.get(0, j) + g.get(i, j));
                        }
                    }
                    self.nodes[b.0].grad.add_assign(&db);
                }
            }
            Op::ScalarMul(c) => {
                let a = inputs[0];
                if self.nodes[a.0].requires_grad {
                    let da = g.scale(c);
                    self.nodes[a.0].grad.add_assign(&da);
                }
            }
            Op::LeakyRelu(slope) => {
                let a = inputs[0];
                if self.nodes[a.0].requires_grad {
                    let x = self.value(a).clone();
                    let da = g
                        .zip(&x, |gi, xi| if xi >= 0.0 { gi } else { slope * gi })
                        .expect("same shape");
                    self.nodes[a.0].grad.add_assign(&da);
                }
            }
            Op::Sigmoid => {
                let a = inputs[0];
                if self.nodes[a.0].requires_grad {
                    let y = self.value(out).clone();
                    let da = g.zip(&y, |gi, yi| gi * yi * (1.0 - yi)).expect("same shape");
                    self.nodes[a.0].grad.add_assign(&da);
                }
            }
            Op::SoftmaxRow | Op::MaskedSoftmaxRow => {
                // dx_j = y_j (g_j - Σ_k g_k y_k); masked entries have y_j = 0,
                // which makes the same formula cover both variants.
                let a = inputs[0];
                if self.nodes[a.0].requires_grad {
                    let y = self.value(out).clone();
                    let mut da = Matrix::zeros(g.rows(), g.cols());
                    for i in 0..g.rows() {
                        let dot: f64 = (0..g.cols()).map(|j| g.get(i, j) * y.get(i, j)).sum();
                        for j in 0..g.cols() {
                            da.set(i, j, y.get(i, j) * (g.get(i, j) - dot));
                        }
                    }
                    self.nodes[a.0].grad.add_assign(&da);
                }
            }
            Op::Log => {
                let a = inputs[0];
                if self.nodes[a.0].requires_grad {
                    let x = self.value(a).clone();
                    let da = g
                        .zip(&x, |gi, xi| gi / xi.max(LOG_CLAMP))
                        .expect("same shape");
                    self.nodes[a.0].grad.add_assign(&da);
                }
            }
            Op::Transpose => {
                let a = inputs[0];
                if self.nodes[a.0].requires_grad {
                    let da = g.transpose();
                    self.nodes[a.0].grad.add_assign(&da);
                }
            }
            Op::RowSlice(r0, _r1) => {
                let a = inputs[0];
                if self.nodes[a.0].requires_grad {
                    let grad = &mut self.nodes[a.0].grad;
                    for i in 0..g.rows() {
                        for j in 0..g.cols() {
                            let v = grad.get(r0 + i, j) + g.get(i, j);
                            grad.set(r0 + i, j, v);
                        }
                    }
                }
            }
            Op::ColSlice(c0, _c1) => {
                let a = inputs[0];
                if self.nodes[a.0].requires_grad {
                    let grad = &mut self.nodes[a.0].grad;
                    for i in 0..g.rows() {
                        for j in 0..g.cols() {
                            let v = grad.get(i, c0 + j) + g.get(i, j);
                            grad.set(i, c0 + j, v);
                        }
                    }
                }
            }
            Op::ConcatRows => {
                let mut r = 0;
                for &input in &inputs {
                    let rows = self.nodes[input.0].values.rows();
                    if self.nodes[input.0].requires_grad {
                        let grad = &mut self.nodes[input.0].grad;
                        for i in 0..rows {
                            for j in 0..g.cols() {
                                let v = grad.get(i, j) + g.get(r + i, j);
                                grad.set(i, j, v);
                            }
                        }
                    }
                    r += rows;
                }
            }
            Op::ConcatCols => {
                let mut c = 0;
                for &input in &inputs {
                    let cols = self.nodes[input.0].values.cols();
                    if self.nodes[input.0].requires_grad {
                        let grad = &mut self.nodes[input.0].grad;
                        for i in 0..g.rows() {
                            for j in 0..cols {
                                let v = grad.get(i, j) + g.get(i, c + j);
                                grad.set(i, j, v);
                            }
                        }
                    }
                    c += cols;
                }
            }
            Op::RowScale => {
                let (a, w) = (inputs[0], inputs[1]);
                if self.nodes[a.0].requires_grad {
                    let wv = self.value(w).clone();
                    let da = Matrix::from_fn(g.rows(), g.cols(), |i, j| g.get(i, j) * wv.get(i, 0));
                    self.nodes[a.0].grad.add_assign(&da);
                }
                if self.nodes[w.0].requires_grad {
                    let av = self.value(a).clone();
                    let mut dw = Matrix::zeros(g.rows(), 1);
                    for i in 0..g.rows() {
                        let s: f64 = (0..g.cols()).map(|j| g.get(i, j) * av.get(i, j)).sum();
                        dw.set(i, 0, s);
                    }
                    self.nodes[w.0].grad.add_assign(&dw);
                }
            }
            Op::MeanRows => {
                let a = inputs[0];
                if self.nodes[a.0].requires_grad {
                    let rows = self.nodes[a.0].values.rows();
                    let inv = 1.0 / rows as f64;
                    let grad = &mut self.nodes[a.0].grad;
                    for i in 0..rows {
                        for j in 0..g.cols() {
                            let v = grad.get(i, j) + g.get(0, j) * inv;
                            grad.set(i, j, v);
                        }
                    }
                }
            }
            Op::SumAll => {
                let a = inputs[0];
                if self.nodes[a.0].requires_grad {
                    let gv = g.get(0, 0);
                    let grad = &mut self.nodes[a.0].grad;
                    for i in 0..grad.rows() {
                        for j in 0..grad.cols() {
                            grad.set(i, j, grad.get(i, j) + gv);
                        }
                    }
                }
            }
            Op::PermuteRows(perm) => {
                let a = inputs[0];
                if self.nodes[a.0].requires_grad {
                    let grad = &mut self.nodes[a.0].grad;
                    for (k, &p) in perm.iter().enumerate() {
                        for j in 0..g.cols() {
                            grad.set(p, j, grad.get(p, j) + g.get(k, j));
                        }
                    }
                }
            }
        }
    }
}
