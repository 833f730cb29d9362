//! Block-encodings as dense unitaries, their algebra, matrix-level singular
//! value transformation, block-measurement and conversion to channels.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::numerics::{
    eig_hermitian, eig_unitary, embed, spectral_norm, svd, trace_norm_hermitian, CMatrix, CVector,
    C64,
};
use crate::polynomials::{Parity, RealPolynomial};

const ONE: C64 = C64::new(1.0, 0.0);
const ZERO: C64 = C64::new(0.0, 0.0);

/// Tolerance for trace preservation of channels.
pub const TP_TOL: f64 = 1e-8;

/// A unitary on `2^m · system_dim` whose top-left `system_dim` block is the
/// encoded operator. Ancillas are the leading tensor factor.
#[derive(Clone, Debug)]
pub struct BlockEncoding {
    unitary: CMatrix,
    ancillas_m: usize,
    system_dim: usize,
    query_cost: u64,
}

impl BlockEncoding {
    pub fn new(unitary: CMatrix, ancillas_m: usize, system_dim: usize) -> Result<Self> {
        let dim = (1usize << ancillas_m) * system_dim;
        if system_dim == 0 || unitary.rows() != dim || unitary.cols() != dim {
            return invalid(format!(
                "block-encoding needs a {dim}x{dim} unitary, got {}x{}",
                unitary.rows(),
                unitary.cols()
            ));
        }
        if !unitary.is_unitary(1e-9 * (dim as f64).sqrt()) {
            return invalid("block-encoding matrix is not unitary");
        }
        Ok(BlockEncoding { unitary, ancillas_m, system_dim, query_cost: 1 })
    }

    /// A unitary is a block-encoding of itself with no ancillas.
    pub fn trivial(u: CMatrix) -> Result<Self> {
        let d = u.rows();
        Self::new(u, 0, d)
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    pub fn ancillas_m(&self) -> usize {
        self.ancillas_m
    }

    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    /// Queries to the underlying oracle made by one use of this encoding.
    pub fn query_cost(&self) -> u64 {
        self.query_cost
    }

    pub fn with_query_cost(mut self, q: u64) -> Self {
        self.query_cost = q;
        self
    }

    /// Adds `extra` idle ancillas in front of the existing ones.
    pub fn pad_ancillas(&self, extra: usize) -> BlockEncoding {
        BlockEncoding {
            unitary: CMatrix::identity(1 << extra).kron(&self.unitary),
            ancillas_m: self.ancillas_m + extra,
            system_dim: self.system_dim,
            query_cost: self.query_cost,
        }
    }

    pub fn scaled_by_phase(&self, phase: C64) -> BlockEncoding {
        BlockEncoding { unitary: self.unitary.scale(phase), ..self.clone() }
    }
}

pub fn encoded_block(be: &BlockEncoding) -> CMatrix {
    be.unitary.block(0, 0, be.system_dim, be.system_dim)
}

fn check_weights(terms: &[(f64, BlockEncoding)]) -> Result<(usize, usize, f64)> {
    if terms.is_empty() {
        return invalid("lcu_combine: no terms");
    }
    let d = terms[0].1.system_dim;
    if terms.iter().any(|(_, b)| b.system_dim != d) {
        return invalid("lcu_combine: system dimensions differ");
    }
    if terms.iter().any(|(w, _)| !(w.is_finite() && *w >= 0.0)) {
        return invalid("lcu_combine: weights must be non-negative");
    }
    let total: f64 = terms.iter().map(|(w, _)| w).sum();
    if total > 1.0 + 1e-12 {
        return invalid(format!("lcu_combine: weights sum to {total} > 1"));
    }
    let m_max = terms.iter().map(|(_, b)| b.ancillas_m).max().unwrap_or(0);
    Ok((d, m_max, total))
}

fn slots(n_terms: usize, total: f64) -> usize {
    if (total - 1.0).abs() <= 1e-12 {
        n_terms
    } else {
        n_terms + 2
    }
}

fn control_qubits(n_slots: usize) -> usize {
    (usize::BITS - (n_slots - 1).leading_zeros()).max(1) as usize
}

/// Ancilla count of [`lcu_combine`] without building the unitary.
pub fn lcu_ancillas(terms: &[(f64, BlockEncoding)]) -> Result<usize> {
    let (_, m_max, total) = check_weights(terms)?;
    Ok(m_max + control_qubits(slots(terms.len(), total)))
}

/// `Σ w_i A_i`, the block [`lcu_combine`] encodes, computed directly.
pub fn lcu_block(terms: &[(f64, BlockEncoding)]) -> Result<CMatrix> {
    let (d, _, _) = check_weights(terms)?;
    let mut acc = CMatrix::zeros(d, d);
    for (w, b) in terms {
        acc = &acc + &encoded_block(b).scale_real(*w);
    }
    Ok(acc)
}

/// Unitary whose first column is the unit vector `v` (Householder reflection).
fn completion(v: &[f64]) -> CMatrix {
    let n = v.len();
    let mut w: Vec<f64> = v.to_vec();
    w[0] -= 1.0;
    let norm2: f64 = w.iter().map(|x| x * x).sum();
    if norm2 < 1e-30 {
        return CMatrix::identity(n);
    }
    CMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        C64::new(id - 2.0 * w[i] * w[j] / norm2, 0.0)
    })
}

/// Linear combination `Σ w_i A_i` by PREPARE/SELECT. Weights below one in
/// total are completed by two spare slots whose contributions cancel.
pub fn lcu_combine(terms: &[(f64, BlockEncoding)]) -> Result<BlockEncoding> {
    let (d, m_max, total) = check_weights(terms)?;
    let n_slots = slots(terms.len(), total);
    let c = control_qubits(n_slots);
    let nc = 1usize << c;
    let mut right = vec![0.0; nc];
    let mut left = vec![0.0; nc];
    for (i, (w, _)) in terms.iter().enumerate() {
        right[i] = w.sqrt();
        left[i] = w.sqrt();
    }
    if n_slots > terms.len() {
        let spare = ((1.0 - total).max(0.0) / 2.0).sqrt();
        right[terms.len()] = spare;
        right[terms.len() + 1] = spare;
        left[terms.len()] = spare;
        left[terms.len() + 1] = -spare;
    }
    let inner = (1usize << m_max) * d;
    let mut select = CMatrix::zeros(nc * inner, nc * inner);
    for slot in 0..nc {
        let u = match terms.get(slot) {
            Some((_, b)) => b.pad_ancillas(m_max - b.ancillas_m).unitary,
            None => CMatrix::identity(inner),
        };
        select.set_block(slot * inner, slot * inner, &u);
    }
    let id = CMatrix::identity(inner);
    let prep_r = completion(&right).kron(&id);
    let prep_l = completion(&left).kron(&id);
    let u = &(&prep_l.adjoint() * &select) * &prep_r;
    let q = terms.iter().map(|(_, b)| b.query_cost).max().unwrap_or(1);
    Ok(BlockEncoding::new(u, m_max + c, d)?.with_query_cost(q))
}

/// Encoding of the product `A·B` with the two ancilla registers side by side.
pub fn product(a: &BlockEncoding, b: &BlockEncoding) -> Result<BlockEncoding> {
    if a.system_dim != b.system_dim {
        return invalid("product: system dimensions differ");
    }
    let (ma, mb, d) = (1usize << a.ancillas_m, 1usize << b.ancillas_m, a.system_dim);
    let dims = [ma, mb, d];
    let ua = embed(&a.unitary, &dims, &[0, 2])?;
    let ub = embed(&b.unitary, &dims, &[1, 2])?;
    Ok(BlockEncoding::new(&ua * &ub, a.ancillas_m + b.ancillas_m, d)?
        .with_query_cost(a.query_cost + b.query_cost))
}

/// `[[M, √(I−MM†)], [√(I−M†M), −M†]]` as a one-ancilla encoding of `M`.
pub fn dilate(m: &CMatrix) -> Result<BlockEncoding> {
    if !m.is_square() {
        return invalid("dilate: matrix must be square");
    }
    let (u, s, v) = svd(m)?;
    if s.first().copied().unwrap_or(0.0) > 1.0 + 1e-10 {
        return invalid(format!("dilate: spectral norm {} exceeds 1", s[0]));
    }
    let d = m.rows();
    let c: Vec<f64> = s.iter().map(|&x| (1.0 - x.min(1.0) * x.min(1.0)).sqrt()).collect();
    let cd = CMatrix::diag_real(&c);
    let top_right = &(&u * &cd) * &u.adjoint();
    let bottom_left = &(&v * &cd) * &v.adjoint();
    let mut w = CMatrix::zeros(2 * d, 2 * d);
    w.set_block(0, 0, m);
    w.set_block(0, d, &top_right);
    w.set_block(d, 0, &bottom_left);
    w.set_block(d, d, &(-&m.adjoint()));
    BlockEncoding::new(w, 1, d)
}

/// Matrix-level singular value transformation: SVD of the block, polynomial
/// on the singular values, then dilation. The result records `deg(p)` uses of
/// the input encoding.
pub fn apply_svt(be: &BlockEncoding, p: &dyn RealPolynomial) -> Result<BlockEncoding> {
    let a = encoded_block(be);
    let (u, s, v) = svd(&a)?;
    let mut vals = Vec::with_capacity(s.len());
    for &x in &s {
        let y = p.eval(x);
        if !y.is_finite() || y.abs() > 1.0 + 1e-10 {
            return invalid(format!("apply_svt: |p({x})| = {} exceeds 1", y.abs()));
        }
        vals.push(y.clamp(-1.0, 1.0));
    }
    let dv = CMatrix::diag_real(&vals);
    let transformed = match p.parity() {
        Parity::Even => &(&v * &dv) * &v.adjoint(),
        Parity::Odd => &(&u * &dv) * &v.adjoint(),
        Parity::None => return invalid("apply_svt: polynomial must have definite parity"),
    };
    let q = p.degree() as u64 * be.query_cost;
    Ok(dilate(&transformed)?.with_query_cost(q))
}

/// Kraus-operator channel with equal input and output dimensions.
#[derive(Clone, Debug)]
pub struct QuantumChannel {
    kraus_ops: Vec<CMatrix>,
}

impl QuantumChannel {
    pub fn new(kraus_ops: Vec<CMatrix>) -> Result<Self> {
        let ch = QuantumChannel { kraus_ops };
        ch.check()?;
        Ok(ch)
    }

    fn check(&self) -> Result<()> {
        let Some(first) = self.kraus_ops.first() else {
            return invalid("channel needs at least one Kraus operator");
        };
        let d = first.rows();
        if self.kraus_ops.iter().any(|k| k.rows() != d || k.cols() != d) {
            return invalid("Kraus operators must share square dimensions");
        }
        let dev = (&self.gram() - &CMatrix::identity(d)).max_abs();
        if dev > TP_TOL {
            return invalid(format!("channel is not trace preserving (deviation {dev:e})"));
        }
        Ok(())
    }

    fn gram(&self) -> CMatrix {
        let d = self.dim();
        self.kraus_ops.iter().fold(CMatrix::zeros(d, d), |acc, k| &acc + &(&k.adjoint() * k))
    }

    pub fn unitary(u: CMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    pub fn identity(d: usize) -> Self {
        QuantumChannel { kraus_ops: vec![CMatrix::identity(d)] }
    }

    pub fn kraus_ops(&self) -> &[CMatrix] {
        &self.kraus_ops
    }

    pub fn dim(&self) -> usize {
        self.kraus_ops[0].rows()
    }

    /// The unitary of a single-Kraus channel.
    pub fn as_unitary(&self) -> Option<&CMatrix> {
        match self.kraus_ops.as_slice() {
            [u] if u.is_unitary(1e-8 * (u.rows() as f64).sqrt()) => Some(u),
            _ => None,
        }
    }

    /// `Σ K ρ K†` without density-matrix validation.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let d = rho.rows();
        self.kraus_ops
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, k| &acc + &(&(k * rho) * &k.adjoint()))
    }

    /// Output state for a pure input.
    pub fn apply_pure(&self, psi: &CVector) -> CMatrix {
        let d = psi.dim();
        self.kraus_ops.iter().fold(CMatrix::zeros(d, d), |acc, k| {
            let v = k.mul_vec(psi);
            &acc + &v.projector()
        })
    }

    /// `(Λ ⊗ id_R)(ρ)` with the reference system as trailing factor.
    pub fn apply_extended(&self, rho: &CMatrix, ref_dim: usize) -> CMatrix {
        let id = CMatrix::identity(ref_dim);
        let d = rho.rows();
        self.kraus_ops.iter().fold(CMatrix::zeros(d, d), |acc, k| {
            let kk = k.kron(&id);
            &acc + &(&(&kk * rho) * &kk.adjoint())
        })
    }

    /// `after ∘ self`.
    pub fn then(&self, after: &QuantumChannel) -> Result<QuantumChannel> {
        if self.dim() != after.dim() {
            return invalid("channel composition: dimension mismatch");
        }
        let mut ops = Vec::with_capacity(self.kraus_ops.len() * after.kraus_ops.len());
        for b in &after.kraus_ops {
            for a in &self.kraus_ops {
                let k = b * a;
                if k.max_abs() > 1e-14 {
                    ops.push(k);
                }
            }
        }
        let d = self.dim();
        let ch = QuantumChannel { kraus_ops: ops };
        if ch.kraus_ops.len() > d * d {
            ch.canonical()
        } else {
            Ok(ch)
        }
    }

    /// `I_left ⊗ Λ`.
    pub fn lift(&self, left_dim: usize) -> QuantumChannel {
        let id = CMatrix::identity(left_dim);
        QuantumChannel { kraus_ops: self.kraus_ops.iter().map(|k| id.kron(k)).collect() }
    }

    /// Minimal Kraus representation from the Choi matrix.
    pub fn canonical(&self) -> Result<QuantumChannel> {
        let d = self.dim();
        let mut choi = CMatrix::zeros(d * d, d * d);
        for k in &self.kraus_ops {
            let v = CVector::from_fn(d * d, |idx, _| k.get(idx / d, idx % d));
            choi = &choi + &v.projector();
        }
        let (vals, vecs) = eig_hermitian(&choi)?;
        let top = vals.iter().cloned().fold(0.0, f64::max);
        let mut ops = Vec::new();
        for (j, &lam) in vals.iter().enumerate() {
            if lam > 1e-13 * top.max(1.0) {
                let s = C64::new(lam.sqrt(), 0.0);
                ops.push(CMatrix::from_fn(d, d, |r, c| vecs.get(r * d + c, j) * s));
            }
        }
        QuantumChannel::new(ops)
    }

    /// Projective measurement of the leading factor (dimension `left`).
    pub fn dephasing(left: usize, right: usize) -> QuantumChannel {
        let id = CMatrix::identity(right);
        let ops = (0..left)
            .map(|x| {
                let mut p = CMatrix::zeros(left, left);
                p.set(x, x, ONE);
                p.kron(&id)
            })
            .collect();
        QuantumChannel { kraus_ops: ops }
    }
}

/// Kraus operators of `V` acting on `[keep_a][anc][keep_b]` with the
/// ancilla prepared in `|0⟩` and traced out afterwards.
pub fn kraus_from_unitary(
    v: &CMatrix,
    keep_a: usize,
    anc: usize,
    keep_b: usize,
) -> Result<QuantumChannel> {
    let n = keep_a * anc * keep_b;
    if v.rows() != n || v.cols() != n {
        return invalid("kraus_from_unitary: dimension mismatch");
    }
    let d = keep_a * keep_b;
    let mut ops = Vec::with_capacity(anc);
    for k in 0..anc {
        let op = CMatrix::from_fn(d, d, |r, c| {
            let (ra, rb) = (r / keep_b, r % keep_b);
            let (ca, cb) = (c / keep_b, c % keep_b);
            v.get((ra * anc + k) * keep_b + rb, (ca * anc) * keep_b + cb)
        });
        if op.max_abs() > 1e-14 {
            ops.push(op);
        }
    }
    QuantumChannel::new(ops)
}

/// Runs the encoding on `|0^m⟩` ancillas and traces them; the bound is
/// `4‖block − V‖`.
pub fn channel_from_block(be: &BlockEncoding, v_target: &CMatrix) -> Result<(QuantumChannel, f64)> {
    if !v_target.is_unitary(1e-8 * (v_target.rows() as f64).sqrt()) {
        return invalid("channel_from_block: target is not unitary");
    }
    if v_target.rows() != be.system_dim {
        return invalid("channel_from_block: target dimension mismatch");
    }
    let ch = kraus_from_unitary(&be.unitary, 1, 1 << be.ancillas_m, be.system_dim)?;
    let bound = 4.0 * spectral_norm(&(&encoded_block(be) - v_target))?;
    Ok((ch, bound))
}

/// `V_A = U_A† · (X⊗|0^m⟩⟨0^m| + I⊗(I−|0^m⟩⟨0^m|)) · U_A` with a fresh flag
/// qubit, ancillas traced; the result acts on flag ⊗ system.
pub fn block_measure(be_a: &BlockEncoding) -> Result<QuantumChannel> {
    let anc = 1usize << be_a.ancillas_m;
    let d = be_a.system_dim;
    let dims = [2, anc, d];
    let ua = embed(&be_a.unitary, &dims, &[1, 2])?;
    let mut cnot = CMatrix::zeros(2 * anc, 2 * anc);
    for f in 0..2 {
        for a in 0..anc {
            let target = if a == 0 { 1 - f } else { f };
            cnot.set(target * anc + a, f * anc + a, ONE);
        }
    }
    let cnot = embed(&cnot, &dims, &[0, 1])?;
    let v = &(&ua.adjoint() * &cnot) * &ua;
    kraus_from_unitary(&v, 2, anc, d)
}

/// `X⊗Π + I⊗(I−Π)` on flag ⊗ system.
pub fn ideal_block_measurement(pi: &CMatrix) -> CMatrix {
    let d = pi.rows();
    let x = CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).expect("2x2");
    let comp = &CMatrix::identity(d) - pi;
    &x.kron(pi) + &CMatrix::identity(2).kron(&comp)
}

/// Exact diamond distance between two unitary channels, `2√(1−d²)` with `d`
/// the distance from the origin to the convex hull of `spec(U†V)`.
pub fn diamond_distance_unitary(u: &CMatrix, v: &CMatrix) -> Result<f64> {
    if u.rows() != v.rows() || !u.is_square() || !v.is_square() {
        return invalid("diamond_distance_unitary: dimension mismatch");
    }
    for m in [u, v] {
        if !m.is_unitary(1e-8 * (m.rows() as f64).sqrt()) {
            return invalid("diamond_distance_unitary: input is not unitary");
        }
    }
    let (phases, _) = eig_unitary(&(&u.adjoint() * v))?;
    let mut angles: Vec<f64> = phases.iter().map(|p| p * std::f64::consts::TAU).collect();
    angles.sort_by(f64::total_cmp);
    let n = angles.len();
    let mut max_gap: f64 = 0.0;
    for i in 0..n {
        let next = if i + 1 < n { angles[i + 1] } else { angles[0] + std::f64::consts::TAU };
        max_gap = max_gap.max(next - angles[i]);
    }
    let arc = (std::f64::consts::TAU - max_gap).max(0.0);
    if arc >= std::f64::consts::PI {
        return Ok(2.0);
    }
    Ok(2.0 * (arc / 2.0).sin())
}

fn check_density(rho: &CMatrix) -> Result<()> {
    if !rho.is_square() || !rho.is_finite() {
        return invalid("density matrix must be square and finite");
    }
    if !rho.is_hermitian(1e-8) {
        return invalid("density matrix is not hermitian");
    }
    if (rho.trace().re - 1.0).abs() > 1e-8 || rho.trace().im.abs() > 1e-8 {
        return invalid("density matrix does not have unit trace");
    }
    let (vals, _) = eig_hermitian(rho)?;
    if vals.first().copied().unwrap_or(0.0) < -1e-8 {
        return invalid("density matrix is not positive semidefinite");
    }
    Ok(())
}

/// `½‖ρ − σ‖₁`.
pub fn trace_distance(rho: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    check_density(rho)?;
    check_density(sigma)?;
    if rho.rows() != sigma.rows() {
        return invalid("trace_distance: dimension mismatch");
    }
    Ok(0.5 * trace_norm_hermitian(&(rho - sigma).hermitian_part())?)
}

pub fn apply_channel(ch: &QuantumChannel, rho: &CMatrix) -> Result<CMatrix> {
    check_density(rho)?;
    if rho.rows() != ch.dim() {
        return invalid("apply_channel: dimension mismatch");
    }
    Ok(ch.apply(rho))
}

/// Lower bound on the diamond distance from the maximally entangled input
/// and `samples` random pure inputs on system ⊗ reference.
pub fn diamond_lower_bound<R: Rng + ?Sized>(
    a: &QuantumChannel,
    b: &QuantumChannel,
    samples: usize,
    rng: &mut R,
) -> Result<f64> {
    if a.dim() != b.dim() {
        return invalid("diamond_lower_bound: dimension mismatch");
    }
    let d = a.dim();
    let mut inputs = Vec::with_capacity(samples + 1);
    let w = 1.0 / (d as f64).sqrt();
    inputs.push(CVector::from_fn(d * d, |i, _| {
        if i / d == i % d {
            C64::new(w, 0.0)
        } else {
            ZERO
        }
    }));
    for _ in 0..samples {
        let v = CVector::from_fn(d * d, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        inputs.push(v.normalized()?);
    }
    let mut best: f64 = 0.0;
    for psi in inputs {
        let rho = psi.projector();
        let ra = a.apply_extended(&rho, d);
        let rb = b.apply_extended(&rho, d);
        best = best.max(trace_norm_hermitian(&(&ra - &rb).hermitian_part())?);
    }
    Ok(best)
}

/// `A = (Π + tE/‖E‖)/max(1, ‖·‖)` with `t` chosen by bisection so that
/// `‖A² − Π‖` is as close to `eps` as possible without exceeding it.
/// Returns `A` and the achieved `‖A² − Π‖`.
pub fn perturb_projector(pi: &CMatrix, direction: &CMatrix, eps: f64) -> Result<(CMatrix, f64)> {
    if !pi.is_hermitian(1e-10) || !direction.is_hermitian(1e-10) || pi.rows() != direction.rows() {
        return invalid("perturb_projector: need Hermitian matrices of equal size");
    }
    if !(eps > 0.0 && eps < 1.0) {
        return invalid(format!("perturb_projector: eps must lie in (0, 1), got {eps}"));
    }
    let en = spectral_norm(direction)?;
    if en == 0.0 {
        return invalid("perturb_projector: zero direction");
    }
    let make = |t: f64| -> Result<CMatrix> {
        let a = pi + &direction.scale_real(t / en);
        let n = spectral_norm(&a)?.max(1.0);
        Ok(a.scale_real(1.0 / n))
    };
    let gap = |t: f64| -> Result<f64> {
        let a = make(t)?;
        spectral_norm(&(&(&a * &a) - pi))
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if gap(mid)? < eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((make(lo)?, gap(lo)?))
}
