use std::cell::Cell;
use std::sync::atomic::{AtomicU64, Ordering};

use super::EmbeddingModel;
use crate::relation::RelationMatrix;

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(sigmoid(x))` without overflow for large `|x|`.
#[inline]
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Parameter groups held fixed during training.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Freeze {
    pub relation: bool,
    pub coeffs: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Weighted sum of the neighbor input rows of word `t`.
pub fn knowledge_repr(t: usize, relation: &RelationMatrix, model: &EmbeddingModel) -> Vec<f64> {
    let mut out = vec![0.0; model.dim()];
    for (&n, &s) in relation.row_neighbors(t).iter().zip(relation.row_weights(t)) {
        for (o, x) in out.iter_mut().zip(model.input_row(n as usize)) {
            *o += s * x;
        }
    }
    out
}

/// `c1 * M[t] + c2 * knowledge_repr(t)` with the coefficients of t's bucket.
pub fn combined_input(t: usize, relation: &RelationMatrix, model: &EmbeddingModel) -> Vec<f64> {
    let b = model.bucket(t);
    let (c1, c2) = (model.c1()[b], model.c2()[b]);
    knowledge_repr(t, relation, model)
        .iter()
        .zip(model.input_row(t))
        .map(|(r, m)| c1 * m + c2 * r)
        .collect()
}

/// `log σ(u_o·v) + Σ_i log σ(-u_i·v)` over the output rows `u`.
pub fn neg_objective(v: &[f64], o: usize, noise: &[usize], model: &EmbeddingModel) -> f64 {
    log_sigmoid(dot(model.output_row(o), v))
        + noise
            .iter()
            .map(|&i| log_sigmoid(-dot(model.output_row(i), v)))
            .sum::<f64>()
}

/// Ascent directions of the objective for one (t, o, noise) example.
#[derive(Clone, Debug, PartialEq)]
pub struct StepGradients {
    pub t: usize,
    pub grad_v_t: Vec<f64>,
    /// Aligned with the relation row of `t`.
    pub grad_neighbors: Vec<Vec<f64>>,
    /// One entry per output occurrence: `o` first, then the noise words in
    /// order. Repeated words appear once per occurrence.
    pub grad_out: Vec<(usize, Vec<f64>)>,
    pub grad_c1: f64,
    pub grad_c2: f64,
    /// Aligned with the relation row of `t`.
    pub grad_s: Vec<f64>,
}

impl StepGradients {
    /// Total gradient on output row `word`, summed over its occurrences.
    pub fn output_gradient(&self, word: usize, dim: usize) -> Vec<f64> {
        let mut g = vec![0.0; dim];
        for (w, row) in &self.grad_out {
            if *w == word {
                for (a, b) in g.iter_mut().zip(row) {
                    *a += b;
                }
            }
        }
        g
    }

    pub fn is_finite(&self) -> bool {
        self.grad_v_t
            .iter()
            .chain(self.grad_neighbors.iter().flatten())
            .chain(self.grad_out.iter().flat_map(|(_, g)| g))
            .chain(&self.grad_s)
            .chain([&self.grad_c1, &self.grad_c2])
            .all(|x| x.is_finite())
    }
}

pub fn step_gradients(
    t: usize,
    o: usize,
    noise: &[usize],
    relation: &RelationMatrix,
    model: &EmbeddingModel,
) -> StepGradients {
    let dim = model.dim();
    let b = model.bucket(t);
    let (c1, c2) = (model.c1()[b], model.c2()[b]);
    let v_r = knowledge_repr(t, relation, model);
    let v = combined_input(t, relation, model);

    let mut e = vec![0.0; dim];
    let mut grad_out = Vec::with_capacity(noise.len() + 1);
    let targets = std::iter::once((o, true)).chain(noise.iter().map(|&i| (i, false)));
    for (u, positive) in targets {
        let f = dot(model.output_row(u), &v);
        let g = if positive { 1.0 - sigmoid(f) } else { -sigmoid(f) };
        for (ed, ud) in e.iter_mut().zip(model.output_row(u)) {
            *ed += g * ud;
        }
        grad_out.push((u, v.iter().map(|x| g * x).collect()));
    }

    let neighbors = relation.row_neighbors(t);
    let weights = relation.row_weights(t);
    StepGradients {
        t,
        grad_v_t: e.iter().map(|x| c1 * x).collect(),
        grad_neighbors: weights
            .iter()
            .map(|s| e.iter().map(|x| c2 * s * x).collect())
            .collect(),
        grad_out,
        grad_c1: dot(&e, model.input_row(t)),
        grad_c2: dot(&e, &v_r),
        grad_s: neighbors
            .iter()
            .map(|&n| c2 * dot(&e, model.input_row(n as usize)))
            .collect(),
    }
}

/// Adds `lr * grad` to every parameter group not frozen. The relation's
/// index structure is never touched.
pub fn apply_step(
    model: &mut EmbeddingModel,
    relation: &mut RelationMatrix,
    grads: &StepGradients,
    lr: f64,
    freeze: Freeze,
) {
    let dim = model.dim();
    let t = grads.t;
    let axpy = |rows: &mut [f64], i: usize, g: &[f64]| {
        for (x, d) in rows[i * dim..(i + 1) * dim].iter_mut().zip(g) {
            *x += lr * d;
        }
    };
    axpy(model.input_mut(), t, &grads.grad_v_t);
    let neighbors: Vec<usize> = relation.row_neighbors(t).iter().map(|&n| n as usize).collect();
    for (&n, g) in neighbors.iter().zip(&grads.grad_neighbors) {
        axpy(model.input_mut(), n, g);
    }
    for (u, g) in &grads.grad_out {
        axpy(model.output_mut(), *u, g);
    }
    if !freeze.relation {
        let range = relation.row_range(t);
        for (s, g) in relation.weights_mut()[range].iter_mut().zip(&grads.grad_s) {
            *s += lr * g;
        }
    }
    if !freeze.coeffs {
        let b = model.bucket(t);
        model.c1_mut()[b] += lr * grads.grad_c1;
        model.c2_mut()[b] += lr * grads.grad_c2;
    }
}

/// One scalar parameter the training kernels read and write in place: a
/// plain cell in the single-threaded mode, a relaxed atomic in the shared
/// mode.
pub(crate) trait Slot {
    fn load(&self) -> f64;
    fn store(&self, x: f64);
}

impl Slot for Cell<f64> {
    #[inline(always)]
    fn load(&self) -> f64 {
        self.get()
    }

    #[inline(always)]
    fn store(&self, x: f64) {
        self.set(x)
    }
}

impl Slot for AtomicU64 {
    #[inline(always)]
    fn load(&self) -> f64 {
        f64::from_bits(AtomicU64::load(self, Ordering::Relaxed))
    }

    #[inline(always)]
    fn store(&self, x: f64) {
        AtomicU64::store(self, x.to_bits(), Ordering::Relaxed)
    }
}

pub(crate) fn as_cells(xs: &mut [f64]) -> &[Cell<f64>] {
    Cell::from_mut(xs).as_slice_of_cells()
}

/// Views every `f64` of `xs` as an atomic word.
pub(crate) fn as_atomic(xs: &mut [f64]) -> &[AtomicU64] {
    assert_eq!(
        std::mem::align_of::<f64>(),
        std::mem::align_of::<AtomicU64>(),
        "f64 and AtomicU64 alignment differ on this target"
    );
    // SAFETY: same size, and alignment checked above; the exclusive borrow
    // guarantees no other non-atomic access for the returned lifetime.
    unsafe { &*(xs as *mut [f64] as *const [AtomicU64]) }
}

pub(crate) struct Params<'a, T> {
    pub dim: usize,
    pub input: &'a [T],
    pub output: &'a [T],
    pub c1: &'a [T],
    pub c2: &'a [T],
    pub weights: &'a [T],
}

impl<T> Clone for Params<'_, T> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<T> Copy for Params<'_, T> {}

#[derive(Default)]
pub(crate) struct Scratch {
    v_r: Vec<f64>,
    v_r_next: Vec<f64>,
    v: Vec<f64>,
    e: Vec<f64>,
    g: Vec<f64>,
    /// Word whose knowledge vector `v_r` holds, when still current.
    cached: Option<usize>,
}

impl Scratch {
    pub fn new(dim: usize) -> Self {
        Scratch {
            v_r: vec![0.0; dim],
            v_r_next: vec![0.0; dim],
            v: vec![0.0; dim],
            e: vec![0.0; dim],
            g: Vec::new(),
            cached: None,
        }
    }
}

#[inline(always)]
fn row<T>(m: &[T], i: usize, dim: usize) -> &[T] {
    &m[i * dim..(i + 1) * dim]
}

/// Dot product with four interleaved partial sums.
#[inline(always)]
fn dot_slots<T: Slot>(row: &[T], v: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let (rc, vc) = (row.chunks_exact(4), v.chunks_exact(4));
    let (rr, vr) = (rc.remainder(), vc.remainder());
    for (r, x) in rc.zip(vc) {
        for l in 0..4 {
            acc[l] += r[l].load() * x[l];
        }
    }
    let mut tail = 0.0;
    for (r, x) in rr.iter().zip(vr) {
        tail += r.load() * x;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline(always)]
fn dot_local(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let (ac, bc) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ar, br) = (ac.remainder(), bc.remainder());
    for (x, y) in ac.zip(bc) {
        for l in 0..4 {
            acc[l] += x[l] * y[l];
        }
    }
    let mut tail = 0.0;
    for (x, y) in ar.iter().zip(br) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `row += a * x`
#[inline(always)]
fn axpy<T: Slot>(row: &[T], a: f64, x: &[f64]) {
    for (r, xd) in row.iter().zip(x) {
        r.store(r.load() + a * xd);
    }
}

/// Scores `v` against the output rows of `targets` (the first is the
/// observed word, the rest noise), accumulates the input-side error into `e`
/// and then updates the output rows. Returns the objective.
#[inline(always)]
fn output_pass<T: Slot>(
    output: &[T],
    dim: usize,
    v: &[f64],
    targets: &[u32],
    lr: f64,
    e: &mut [f64],
    g: &mut Vec<f64>,
) -> f64 {
    e.fill(0.0);
    g.clear();
    let mut objective = 0.0;
    for (i, &u) in targets.iter().enumerate() {
        let out = row(output, u as usize, dim);
        let f = dot_slots(out, v);
        // label 1 for the observed word, 0 for noise
        let z = if i == 0 { f } else { -f };
        let ez = (-z.abs()).exp();
        let log_sig = if z >= 0.0 { -ez.ln_1p() } else { z - ez.ln_1p() };
        // 1 - sigmoid(z)
        let one_minus = if z >= 0.0 { ez / (1.0 + ez) } else { 1.0 / (1.0 + ez) };
        objective += log_sig;
        let gi = if i == 0 { one_minus } else { -one_minus };
        g.push(gi);
        for (ed, o) in e.iter_mut().zip(out) {
            *ed += gi * o.load();
        }
    }
    for (&u, &gi) in targets.iter().zip(g.iter()) {
        axpy(row(output, u as usize, dim), lr * gi, v);
    }
    objective
}

/// One fused update for the blended input of word `t`; equivalent to
/// `apply_step(step_gradients(..))` but without allocation.
///
/// With `reuse`, the knowledge vector left in `sc` by the previous call is
/// used when that call had the same center word. This is exact only when no
/// other writer touched the parameters in between.
#[allow(clippy::too_many_arguments, clippy::needless_range_loop)]
#[inline]
pub(crate) fn knet_step<T: Slot>(
    p: Params<'_, T>,
    offsets: &[usize],
    neighbors: &[u32],
    bucket: usize,
    t: usize,
    targets: &[u32],
    lr: f64,
    freeze: Freeze,
    reuse: bool,
    sc: &mut Scratch,
) -> f64 {
    let dim = p.dim;
    let (start, end) = (offsets[t], offsets[t + 1]);
    let c1 = p.c1[bucket].load();
    let c2 = p.c2[bucket].load();

    if !(reuse && sc.cached == Some(t)) {
        sc.v_r.fill(0.0);
        for idx in start..end {
            let s = p.weights[idx].load();
            for (r, m) in sc.v_r.iter_mut().zip(row(p.input, neighbors[idx] as usize, dim)) {
                *r += s * m.load();
            }
        }
    }
    let own = row(p.input, t, dim);
    for ((v, m), r) in sc.v.iter_mut().zip(own).zip(&sc.v_r) {
        *v = c1 * m.load() + c2 * r;
    }

    let objective = output_pass(p.output, dim, &sc.v, targets, lr, &mut sc.e, &mut sc.g);
    let e = &sc.e;

    let (mut gc1, mut gc2) = (0.0, 0.0);
    if !freeze.coeffs {
        gc1 = dot_slots(own, e);
        gc2 = dot_local(e, &sc.v_r);
    }
    axpy(own, lr * c1, e);

    // Neighbor gradients and updates, accumulating the knowledge vector the
    // updated parameters give for the next step.
    sc.v_r_next.fill(0.0);
    for idx in start..end {
        let nrow = row(p.input, neighbors[idx] as usize, dim);
        let s = p.weights[idx].load();
        let s_new = if freeze.relation {
            s
        } else {
            s + lr * (c2 * dot_slots(nrow, e))
        };
        let a = lr * c2 * s;
        for ((m, ed), r) in nrow.iter().zip(e).zip(sc.v_r_next.iter_mut()) {
            let x = m.load() + a * ed;
            m.store(x);
            *r += s_new * x;
        }
        if !freeze.relation {
            p.weights[idx].store(s_new);
        }
    }
    std::mem::swap(&mut sc.v_r, &mut sc.v_r_next);
    sc.cached = Some(t);

    if !freeze.coeffs {
        p.c1[bucket].store(c1 + lr * gc1);
        p.c2[bucket].store(c2 + lr * gc2);
    }
    objective
}

/// One plain Skip-gram update: the input is `M[t]` alone.
#[inline]
pub(crate) fn skipgram_step<T: Slot>(
    input: &[T],
    output: &[T],
    dim: usize,
    t: usize,
    targets: &[u32],
    lr: f64,
    sc: &mut Scratch,
) -> f64 {
    let own = row(input, t, dim);
    for (v, m) in sc.v.iter_mut().zip(own) {
        *v = m.load();
    }
    let objective = output_pass(output, dim, &sc.v, targets, lr, &mut sc.e, &mut sc.g);
    axpy(own, lr, &sc.e);
    objective
}
