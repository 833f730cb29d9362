//! Phase and energy estimators on dense simulations: textbook phase
//! estimation, coherent iterative estimators, stitching, uncomputation,
//! Hamiltonian simulation and amplitude estimation.

use crate::blockenc::{
    apply_svt, channel_from_block, dilate, encoded_block, lcu_combine, product, BlockEncoding,
    QuantumChannel,
};
use crate::error::{invalid, Error, Result};
use crate::numerics::{eig_hermitian, embed, random_unitary, svd, CMatrix, CVector, C64};
use crate::polynomials::{
    amplifying_poly, amplifying_poly_squared, jacobi_anger_cos, jacobi_anger_sin, solve_r,
    RealPolynomial, SquaredComposition,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{E, PI};

const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstanceKind {
    Unitary,
    Hamiltonian,
}

/// Eigen-decomposed oracle whose eigenvalues are meant to respect an
/// `(n, α)` rounding promise.
#[derive(Clone, Debug)]
pub struct RoundingPromiseInstance {
    n_bits: u32,
    alpha: f64,
    eigenvalues: Vec<f64>,
    eigenbasis: CMatrix,
    kind: InstanceKind,
    seed: Option<u64>,
}

impl RoundingPromiseInstance {
    /// Validates ranges and unitarity of the basis, not the promise itself.
    pub fn new(
        n_bits: u32,
        alpha: f64,
        eigenvalues: Vec<f64>,
        eigenbasis: CMatrix,
        kind: InstanceKind,
    ) -> Result<Self> {
        check_n_alpha(n_bits, alpha)?;
        if eigenvalues.is_empty() || eigenbasis.rows() != eigenvalues.len() || !eigenbasis.is_square()
        {
            return invalid("instance: eigenbasis must be square with one column per eigenvalue");
        }
        if eigenvalues.iter().any(|l| !(0.0..1.0).contains(l)) {
            return invalid("instance: eigenvalues must lie in [0, 1)");
        }
        if !eigenbasis.is_unitary(1e-9) {
            return invalid("instance: eigenbasis is not unitary");
        }
        Ok(RoundingPromiseInstance { n_bits, alpha, eigenvalues, eigenbasis, kind, seed: None })
    }

    pub fn n_bits(&self) -> u32 {
        self.n_bits
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenbasis(&self) -> &CMatrix {
        &self.eigenbasis
    }

    pub fn kind(&self) -> InstanceKind {
        self.kind
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenstate(&self, j: usize) -> CVector {
        self.eigenbasis.column(j)
    }

    /// `Σ_j e^{2πiλ_j} |ψ_j⟩⟨ψ_j|`.
    pub fn unitary(&self) -> CMatrix {
        let d: Vec<C64> = self.eigenvalues.iter().map(|&l| C64::from_polar(1.0, 2.0 * PI * l)).collect();
        &(&self.eigenbasis * &CMatrix::diag(&d)) * &self.eigenbasis.adjoint()
    }

    /// `Σ_j λ_j |ψ_j⟩⟨ψ_j|`.
    pub fn hamiltonian(&self) -> CMatrix {
        let h = &(&self.eigenbasis * &CMatrix::diag_real(&self.eigenvalues)) * &self.eigenbasis.adjoint();
        h.hermitian_part()
    }

    pub fn verify_promise(&self) -> bool {
        self.eigenvalues.iter().all(|&l| !in_gap(l, self.n_bits, self.alpha))
    }

    /// Copy with eigenvalue `j` replaced, promise not enforced.
    pub fn with_eigenvalue(&self, j: usize, lambda: f64) -> Result<Self> {
        if j >= self.dim() || !(0.0..1.0).contains(&lambda) {
            return invalid("with_eigenvalue: index or value out of range");
        }
        let mut out = self.clone();
        out.eigenvalues[j] = lambda;
        Ok(out)
    }
}

fn check_n_alpha(n: u32, alpha: f64) -> Result<()> {
    if n == 0 || n > 30 {
        return invalid(format!("n must lie in 1..=30, got {n}"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return invalid(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    Ok(())
}

/// True when `λ ∈ [x/2ⁿ, (x+α)/2ⁿ]` for some integer `x`.
pub fn in_gap(lambda: f64, n: u32, alpha: f64) -> bool {
    let s = lambda * (1u64 << n) as f64;
    s - s.floor() <= alpha
}

/// Haar-random eigenbasis, eigenvalues uniform over the allowed set.
pub fn gen_instance(
    n: u32,
    alpha: f64,
    dim: usize,
    seed: u64,
    kind: InstanceKind,
) -> Result<RoundingPromiseInstance> {
    check_n_alpha(n, alpha)?;
    if dim == 0 {
        return invalid("gen_instance: dim must be positive");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bins = 1u64 << n;
    let scale = bins as f64;
    let mut eigenvalues = Vec::with_capacity(dim);
    while eigenvalues.len() < dim {
        let x = rng.random_range(0..bins) as f64;
        let v: f64 = rng.random();
        let lambda = (x + alpha + (1.0 - alpha) * v) / scale;
        if lambda < 1.0 && !in_gap(lambda, n, alpha) {
            eigenvalues.push(lambda);
        }
    }
    let basis = random_unitary(dim, &mut rng);
    let mut inst = RoundingPromiseInstance::new(n, alpha, eigenvalues, basis, kind)?;
    inst.seed = Some(seed);
    Ok(inst)
}

/// `floor(2ⁿλ)`, clamped to `2ⁿ − 1`.
pub fn floor_estimate(lambda: f64, n: u32) -> usize {
    let top = (1usize << n) - 1;
    ((lambda * (1u64 << n) as f64).floor().max(0.0) as usize).min(top)
}

/// Bit `k` (from the least significant end) of `floor(2ⁿλ)`.
pub fn bit_k(lambda: f64, n: u32, k: u32) -> Result<u8> {
    if k >= n {
        return invalid(format!("bit index {k} out of range for n = {n}"));
    }
    Ok(((floor_estimate(lambda, n) >> k) & 1) as u8)
}

/// The `k` least significant bits of `floor(2ⁿλ)`.
pub fn delta_k(lambda: f64, n: u32, k: u32) -> Result<usize> {
    if k >= n {
        return invalid(format!("bit index {k} out of range for n = {n}"));
    }
    Ok(floor_estimate(lambda, n) & ((1usize << k) - 1))
}

/// How the separation `η_k` of bit `k` is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EtaRule {
    /// Straight-line lower bound on the cosine.
    #[default]
    Linear,
    /// The cosine evaluated at the edge of the allowed interval.
    Exact,
}

pub fn eta_k(rule: EtaRule, k: u32, alpha: f64) -> f64 {
    match (rule, k) {
        (EtaRule::Linear, 0) => alpha / 2.0,
        (EtaRule::Linear, _) => 0.5 - 0.5f64.powi(k as i32) * (0.5 + alpha / 2.0),
        (EtaRule::Exact, _) => (PI * (1.0 - alpha) * 0.5f64.powi(k as i32 + 1)).cos() / 2.0,
    }
}

pub fn phi_k(k: u32, alpha: f64) -> f64 {
    if k == 0 {
        1.0 - (0.5 + alpha / 2.0 + 1.0) / 2.0
    } else {
        1.0 - (0.5 + 0.5 + 0.5f64.powi(k as i32) * (0.5 + alpha / 2.0)) / 2.0
    }
}

/// Share of the squared error budget given to the amplifying polynomial.
pub fn delta_amp(delta: f64, m_svt: f64) -> f64 {
    (1.0 - 10f64.powf(-m_svt)) * delta * delta / 8.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorOptions {
    pub eta_rule: EtaRule,
    pub m_svt: f64,
    pub m_cos: f64,
    /// Uncompute each coherent stage (phase estimation only; energy
    /// estimation always does).
    pub uncompute: bool,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        EstimatorOptions { eta_rule: EtaRule::Linear, m_svt: 3.0, m_cos: 3.0, uncompute: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimatorFlavor {
    pub with_phases: bool,
    pub with_garbage: bool,
    pub garbage_qubits: usize,
}

impl EstimatorFlavor {
    pub fn clean() -> Self {
        EstimatorFlavor { with_phases: false, with_garbage: false, garbage_qubits: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimationReport {
    pub algorithm: String,
    pub n: u32,
    pub alpha: f64,
    pub delta: f64,
    pub query_count: u64,
    pub garbage_qubits: usize,
    /// Probability of reading `floor(2ⁿλ_j)` on input `|0ⁿ⟩|ψ_j⟩`.
    pub per_eigenstate_success: Vec<f64>,
    pub coherence_fidelity: f64,
    pub seed: Option<u64>,
    pub flavor: EstimatorFlavor,
}

impl EstimationReport {
    pub fn min_success(&self) -> f64 {
        self.per_eigenstate_success.iter().cloned().fold(1.0, f64::min)
    }
}

/// Distribution of the `2ⁿ`-valued register after `ch` acts on
/// `|0ⁿ⟩ ⊗ input`.
pub fn estimate_distribution(ch: &QuantumChannel, n: u32, input: &CVector) -> Result<Vec<f64>> {
    let reg = 1usize << n;
    let d = input.dim();
    if ch.dim() != reg * d {
        return invalid("estimate_distribution: channel dimension mismatch");
    }
    let rho = ch.apply_pure(&CVector::basis(reg, 0).kron(input));
    Ok((0..reg).map(|x| (0..d).map(|s| rho.get(x * d + s, x * d + s).re).sum::<f64>().clamp(0.0, 1.0)).collect())
}

/// Per-eigenstate success and the fidelity of the uniform superposition with
/// `Σ_j |floor(2ⁿλ_j)⟩|ψ_j⟩/√d`.
pub fn evaluate_estimator(
    ch: &QuantumChannel,
    inst: &RoundingPromiseInstance,
) -> Result<(Vec<f64>, f64)> {
    let n = inst.n_bits;
    let d = inst.dim();
    let reg = 1usize << n;
    let mut success = Vec::with_capacity(d);
    for (j, &l) in inst.eigenvalues.iter().enumerate() {
        let dist = estimate_distribution(ch, n, &inst.eigenstate(j))?;
        success.push(dist[floor_estimate(l, n)]);
    }
    let w = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut input = CVector::zeros(reg * d);
    let mut target = CVector::zeros(reg * d);
    for (j, &l) in inst.eigenvalues.iter().enumerate() {
        let psi = inst.eigenstate(j).scale(w);
        input = input.add(&CVector::basis(reg, 0).kron(&psi));
        target = target.add(&CVector::basis(reg, floor_estimate(l, n)).kron(&psi));
    }
    let rho = ch.apply_pure(&input);
    let fid = target.inner(&rho.mul_vec(&target)).re.clamp(0.0, 1.0);
    Ok((success, fid))
}

// ---------------------------------------------------------------------------
// Textbook phase estimation

pub fn gamma(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        (PI * x).sin().powi(2) / (PI * PI * x * x)
    }
}

/// Parameters of median-amplified textbook phase estimation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TextbookPlan {
    /// Extra precision bits `r`.
    pub extra_bits: u32,
    pub eta: f64,
    /// Offset, in fine bins, subtracted from the phase before the inverse QFT.
    pub shift: f64,
    pub delta_med: f64,
    pub repetitions: u64,
    pub queries: u64,
}

pub fn textbook_plan(n: u32, alpha: f64, delta: f64) -> Result<TextbookPlan> {
    check_n_alpha(n, alpha)?;
    if !(delta > 0.0 && delta < 1.0) {
        return invalid(format!("delta must lie in (0, 1), got {delta}"));
    }
    let (r, eta, alpha_eff) = if alpha <= 0.5 {
        let r = (1.0 / (2.0 * alpha)).log2().ceil().max(0.0) as u32;
        (r, 8.0 / (PI * PI) - 0.5, 0.5)
    } else {
        (0, gamma((1.0 - alpha) / 2.0) - 0.5, alpha)
    };
    if n + r > 62 {
        return Err(Error::Range(format!("n + r = {} exceeds 62 bits", n + r)));
    }
    let delta_med = delta * delta / 6.25;
    let reps = ((1.0 / delta_med).ln() / (2.0 * eta * eta)).ceil() as u64;
    let queries = ((1u64 << (n + r)) - 1)
        .checked_mul(reps)
        .ok_or_else(|| Error::Range("textbook query count overflows u64".into()))?;
    Ok(TextbookPlan {
        extra_bits: r,
        eta,
        shift: (1.0 + alpha_eff) / 2.0,
        delta_med,
        repetitions: reps,
        queries,
    })
}

/// Outcome law of one `N`-bit phase-estimation run with the given shift.
pub fn copy_distribution(lambda: f64, bits: u32, shift: f64) -> Vec<f64> {
    let size = 1usize << bits;
    let scale = size as f64;
    (0..size)
        .map(|y| {
            let l = scale * lambda - y as f64 - shift;
            let den = (PI * l / scale).sin();
            if den.abs() < 1e-12 {
                1.0
            } else {
                (PI * l).sin().powi(2) / (scale * scale * den * den)
            }
        })
        .collect()
}

/// Law of the lower median of `m` iid draws from `q`.
pub fn median_distribution(q: &[f64], m: u64) -> Vec<f64> {
    let need = (m - 1) / 2 + 1;
    let tail = |f: f64| -> f64 {
        let f = f.clamp(0.0, 1.0);
        let mut total = 0.0;
        let mut binom = 1.0;
        for i in 0..=m {
            if i >= need {
                total += binom * f.powi(i as i32) * (1.0 - f).powi((m - i) as i32);
            }
            binom = binom * (m - i) as f64 / (i + 1) as f64;
        }
        total
    };
    let mut out = Vec::with_capacity(q.len());
    let mut cdf = 0.0;
    let mut prev = 0.0;
    for &p in q {
        cdf += p;
        let g = tail(cdf);
        out.push((g - prev).max(0.0));
        prev = g;
    }
    out
}

/// Largest register size simulated for textbook phase estimation.
pub const TEXTBOOK_MAX_BITS: u32 = 6;
/// Largest repetition count simulated for textbook phase estimation.
pub const TEXTBOOK_MAX_REPS: u64 = 64;

/// Textbook phase estimation with median amplification, simulated through
/// the exact outcome law of each repetition. The garbage registers are
/// implicit: the channel keeps coherence between eigenstates only through the
/// amplitudes `√p_{j,x}`.
pub fn textbook_pe(
    inst: &RoundingPromiseInstance,
    delta: f64,
) -> Result<(QuantumChannel, EstimationReport)> {
    if inst.kind != InstanceKind::Unitary {
        return invalid("textbook_pe needs a unitary instance");
    }
    let n = inst.n_bits;
    let plan = textbook_plan(n, inst.alpha, delta)?;
    let bits = n + plan.extra_bits;
    if bits > TEXTBOOK_MAX_BITS || plan.repetitions > TEXTBOOK_MAX_REPS {
        return Err(Error::Budget(format!(
            "textbook simulation needs n+r = {bits} bits and M = {} repetitions (limits {TEXTBOOK_MAX_BITS}, {TEXTBOOK_MAX_REPS})",
            plan.repetitions
        )));
    }
    let reg = 1usize << n;
    let d = inst.dim();
    let laws: Vec<Vec<f64>> = inst
        .eigenvalues
        .iter()
        .map(|&l| {
            let fine = copy_distribution(l, bits, plan.shift);
            let mut coarse = vec![0.0; reg];
            for (y, p) in fine.iter().enumerate() {
                coarse[y >> plan.extra_bits] += p;
            }
            median_distribution(&coarse, plan.repetitions)
        })
        .collect();
    let mut ops = Vec::with_capacity(reg + 1);
    for x in 0..reg {
        let amps: Vec<f64> = laws.iter().map(|law| law[x].sqrt()).collect();
        let sys = &(&inst.eigenbasis * &CMatrix::diag_real(&amps)) * &inst.eigenbasis.adjoint();
        let mut reg_op = CMatrix::zeros(reg, reg);
        reg_op.set(x, 0, ONE);
        ops.push(reg_op.kron(&sys));
    }
    let mut rest = CMatrix::identity(reg);
    rest.set(0, 0, C64::new(0.0, 0.0));
    ops.push(rest.kron(&CMatrix::identity(d)));
    let ch = QuantumChannel::new(ops)?;
    let (success, fid) = evaluate_estimator(&ch, inst)?;
    let garbage = bits as usize * plan.repetitions as usize;
    let report = EstimationReport {
        algorithm: "textbook_pe".into(),
        n,
        alpha: inst.alpha,
        delta,
        query_count: plan.queries,
        garbage_qubits: garbage,
        per_eigenstate_success: success,
        coherence_fidelity: fid,
        seed: inst.seed,
        flavor: EstimatorFlavor { with_phases: true, with_garbage: true, garbage_qubits: garbage },
    };
    Ok((ch, report))
}

// ---------------------------------------------------------------------------
// Coherent maps, stitching and uncomputation

/// A unitary on `answer ⊗ garbage ⊗ passive` run with answer and garbage
/// prepared in `|0⟩`.
#[derive(Clone, Debug)]
pub struct CoherentMap {
    unitary: CMatrix,
    answer_dim: usize,
    garbage_dim: usize,
    passive_dim: usize,
    query_count: u64,
    garbage_qubits: usize,
}

impl CoherentMap {
    pub fn new(
        unitary: CMatrix,
        answer_dim: usize,
        garbage_dim: usize,
        passive_dim: usize,
        query_count: u64,
        garbage_qubits: usize,
    ) -> Result<Self> {
        let dim = answer_dim * garbage_dim * passive_dim;
        if dim == 0 || unitary.rows() != dim || unitary.cols() != dim {
            return invalid("coherent map: dimension mismatch");
        }
        if !unitary.is_unitary(1e-8 * (dim as f64).sqrt()) {
            return invalid("coherent map is not unitary, so it cannot be inverted");
        }
        Ok(CoherentMap { unitary, answer_dim, garbage_dim, passive_dim, query_count, garbage_qubits })
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    pub fn answer_dim(&self) -> usize {
        self.answer_dim
    }

    pub fn garbage_dim(&self) -> usize {
        self.garbage_dim
    }

    pub fn passive_dim(&self) -> usize {
        self.passive_dim
    }

    pub fn query_count(&self) -> u64 {
        self.query_count
    }

    /// Declared width of the garbage register, including qubits the dense
    /// simulation leaves out because they return to `|0⟩`.
    pub fn garbage_qubits(&self) -> usize {
        self.garbage_qubits
    }

    /// The map on `answer ⊗ passive` with the garbage traced out.
    pub fn channel(&self) -> Result<QuantumChannel> {
        crate::blockenc::kraus_from_unitary(
            &self.unitary,
            self.answer_dim,
            self.garbage_dim,
            self.passive_dim,
        )
    }
}

/// Copy the answer into a fresh register, run the inverse, discard the rest.
/// Returns the channel on `copy ⊗ passive` and the doubled query count.
pub fn uncompute(map: &CoherentMap) -> Result<(QuantumChannel, u64)> {
    let (a_dim, g_dim, p_dim) = (map.answer_dim, map.garbage_dim, map.passive_dim);
    let gp = g_dim * p_dim;
    let out_dim = a_dim * p_dim;
    let u_adj = map.unitary.adjoint();
    let mut ops = vec![CMatrix::zeros(out_dim, out_dim); a_dim * g_dim];
    for p in 0..p_dim {
        let v = map.unitary.column(p);
        for a in 0..a_dim {
            let w = CMatrix::from_fn(gp, 1, |i, _| v.get(a * gp + i));
            if w.max_abs() < 1e-15 {
                continue;
            }
            let y = &u_adj.block(0, a * gp, a_dim * gp, gp) * &w;
            for c in 0..a_dim {
                let row_copy = (c + a) % a_dim;
                for (kidx, op) in ops.iter_mut().enumerate() {
                    let base = kidx * p_dim;
                    for q in 0..p_dim {
                        let val = y.get(base + q, 0);
                        if val != C64::new(0.0, 0.0) {
                            let (r, col) = (row_copy * p_dim + q, c * p_dim + p);
                            op.set(r, col, op.get(r, col) + val);
                        }
                    }
                }
            }
        }
    }
    ops.retain(|k| k.max_abs() > 1e-14);
    Ok((QuantumChannel::new(ops)?, 2 * map.query_count))
}

/// Error budget of bit `k` when the total budget is `delta`.
pub fn bit_budget(delta: f64, k: u32) -> f64 {
    delta * 0.5f64.powi(k as i32 + 1)
}

/// Chains per-bit channels on `[b_{n−1} … b_0] ⊗ system`. Stage `k` acts on
/// `b_k ⊗ (b_{k−1} … b_0) ⊗ system`.
pub fn stitch(stages: &[QuantumChannel], system_dim: usize) -> Result<QuantumChannel> {
    let n = stages.len();
    if n == 0 || n > 30 {
        return invalid("stitch: need between 1 and 30 stages");
    }
    let total = (1usize << n) * system_dim;
    let mut acc = QuantumChannel::identity(total);
    for (k, st) in stages.iter().enumerate() {
        if st.dim() != (2usize << k) * system_dim {
            return invalid(format!(
                "stitch: stage {k} acts on dimension {}, expected {}",
                st.dim(),
                (2usize << k) * system_dim
            ));
        }
        acc = acc.then(&st.lift(1usize << (n - k - 1)))?;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Iterative phase estimation

fn h_tilde() -> CMatrix {
    let s = 1.0 / 2f64.sqrt();
    CMatrix::from_row_major(
        2,
        2,
        &[C64::new(s, 0.0), C64::new(s, 0.0), C64::new(0.0, s), C64::new(0.0, -s)],
    )
    .expect("2x2")
}

/// `e^{2πiλ̂^{(k)}}` on `Δ_k ⊗ system`.
pub fn shifted_power(inst: &RoundingPromiseInstance, k: u32) -> Result<CMatrix> {
    let n = inst.n_bits;
    if k >= n {
        return invalid(format!("bit index {k} out of range for n = {n}"));
    }
    let power = 1u64 << (n - k - 1);
    let dk = 1usize << k;
    let scale = (1u64 << n) as f64;
    let d: Vec<C64> = (0..dk)
        .map(|delta| C64::from_polar(1.0, -2.0 * PI * ((power as f64 * delta as f64) / scale).fract()))
        .collect();
    let w = CMatrix::diag(&d).kron(&inst.unitary().powi(power));
    Ok(w.scale(C64::from_polar(1.0, 2.0 * PI * phi_k(k, inst.alpha))))
}

/// `(H̃⊗I)·(|0⟩⟨0|⊗I + |1⟩⟨1|⊗W)·(H̃ᵀ⊗I)`, whose block is `(I+W)/2`.
pub fn signal_unitary(w: &CMatrix) -> Result<CMatrix> {
    let d = w.rows();
    let mut cw = CMatrix::identity(2 * d);
    cw.set_block(d, d, w);
    let ht = h_tilde();
    let id = CMatrix::identity(d);
    let u = &(&ht.kron(&id) * &cw) * &ht.transpose().kron(&id);
    if !u.is_unitary(1e-8 * ((2 * d) as f64).sqrt()) {
        return invalid("signal_unitary: W is not unitary");
    }
    Ok(u)
}

/// Bit `k` of the phase estimate as a unitary on `b_k ⊗ Δ_k ⊗ system`,
/// built from `A_{η_k→δ_amp}(x²)` applied to the signal encoding.
pub fn iterative_pe_bit(
    inst: &RoundingPromiseInstance,
    k: u32,
    delta: f64,
    opts: &EstimatorOptions,
) -> Result<CoherentMap> {
    if inst.kind != InstanceKind::Unitary {
        return invalid("iterative_pe_bit needs a unitary instance");
    }
    if !(delta > 0.0 && delta < 1.0) {
        return invalid(format!("delta must lie in (0, 1), got {delta}"));
    }
    let n = inst.n_bits;
    let w = shifted_power(inst, k)?;
    let pass = w.rows();
    let sig = BlockEncoding::new(signal_unitary(&w)?, 1, pass)?
        .with_query_cost(1u64 << (n - k - 1));
    let eta = eta_k(opts.eta_rule, k, inst.alpha);
    let (poly, _) = amplifying_poly_squared(eta, delta_amp(delta, opts.m_svt))?;
    let out = apply_svt(&sig, &poly)?;
    CoherentMap::new(out.unitary().clone(), 2, 1, pass, out.query_cost(), 0)
}

fn improved_stages(
    n: u32,
    delta: f64,
    uncomputed: bool,
    build: impl Fn(u32, f64) -> Result<CoherentMap>,
) -> Result<(Vec<QuantumChannel>, u64)> {
    let mut stages = Vec::with_capacity(n as usize);
    let mut queries = 0u64;
    for k in 0..n {
        let dk = bit_budget(delta, k);
        if uncomputed {
            let (ch, q) = uncompute(&build(k, dk / 2.0)?)?;
            stages.push(ch);
            queries += q;
        } else {
            let map = build(k, dk)?;
            stages.push(map.channel()?);
            queries += map.query_count();
        }
    }
    Ok((stages, queries))
}

/// Stitched coherent iterative phase estimation.
pub fn improved_pe(
    inst: &RoundingPromiseInstance,
    delta: f64,
    opts: &EstimatorOptions,
) -> Result<(QuantumChannel, EstimationReport)> {
    if inst.kind != InstanceKind::Unitary {
        return invalid("improved_pe needs a unitary instance");
    }
    let (stages, queries) = improved_stages(inst.n_bits, delta, opts.uncompute, |k, dk| {
        iterative_pe_bit(inst, k, dk, opts)
    })?;
    let ch = stitch(&stages, inst.dim())?;
    let (success, fid) = evaluate_estimator(&ch, inst)?;
    let report = EstimationReport {
        algorithm: "improved_pe".into(),
        n: inst.n_bits,
        alpha: inst.alpha,
        delta,
        query_count: queries,
        garbage_qubits: 0,
        per_eigenstate_success: success,
        coherence_fidelity: fid,
        seed: inst.seed,
        flavor: EstimatorFlavor { with_phases: !opts.uncompute, ..EstimatorFlavor::clean() },
    };
    Ok((ch, report))
}

// ---------------------------------------------------------------------------
// Iterative energy estimation

/// `n`-ancilla encoding of `Σ_Δ (2Δ/2ⁿ)|Δ⟩⟨Δ|` on a `k`-qubit register:
/// prepare `|+^{n−1}⟩`, flag `x < Δ`, flip the flag, unprepare.
pub fn comparator_encoding(n: u32, k: u32) -> Result<BlockEncoding> {
    if k >= n {
        return invalid(format!("bit index {k} out of range for n = {n}"));
    }
    let counter = 1usize << (n - 1);
    let dk = 1usize << k;
    let hs = hadamards(n - 1);
    let x = CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).expect("2x2");
    let dims = [counter, 2, dk];
    let mut cmp = CMatrix::zeros(counter * 2 * dk, counter * 2 * dk);
    for c in 0..counter {
        for f in 0..2 {
            for delta in 0..dk {
                let g = if c < delta { 1 - f } else { f };
                cmp.set((c * 2 + g) * dk + delta, (c * 2 + f) * dk + delta, ONE);
            }
        }
    }
    let pre = embed(&hs, &dims, &[0])?;
    let post = &pre * &embed(&x, &dims, &[1])?;
    let u = &(&post * &cmp) * &pre;
    BlockEncoding::new(u, n as usize, dk).map(|b| b.with_query_cost(0))
}

fn hadamards(q: u32) -> CMatrix {
    let s = 1.0 / 2f64.sqrt();
    let h = CMatrix::from_real(2, 2, &[s, s, s, -s]).expect("2x2");
    (0..q).fold(CMatrix::identity(1), |acc, _| acc.kron(&h))
}

fn check_energy_encoding(be_h: &BlockEncoding) -> Result<CMatrix> {
    let h = encoded_block(be_h);
    if !h.is_hermitian(1e-9) {
        return invalid("energy estimation needs a Hermitian block");
    }
    Ok(h)
}

/// `H^{(k)} = ½ I⊗H − ¼ W_k⊗I + ¼ (4φ_k 2^{k−n}) I` on `Δ_k ⊗ system`.
pub fn hk_block(be_h: &BlockEncoding, n: u32, alpha: f64, k: u32) -> Result<CMatrix> {
    check_n_alpha(n, alpha)?;
    let h = check_energy_encoding(be_h)?;
    let w = encoded_block(&comparator_encoding(n, k)?);
    let d = h.rows();
    let dk = 1usize << k;
    let c = 4.0 * phi_k(k, alpha) * 0.5f64.powi((n - k) as i32);
    let id_d = CMatrix::identity(d);
    let total = &(&CMatrix::identity(dk).kron(&h).scale_real(0.5) - &w.kron(&id_d).scale_real(0.25))
        + &CMatrix::identity(dk * d).scale_real(0.25 * c);
    Ok(total)
}

/// The three weighted terms of `H^{(k)}` on the joint ancilla register
/// `anc_H ⊗ anc_W`; the constant is a one-qubit rotation inside that register.
pub fn hk_terms(
    be_h: &BlockEncoding,
    n: u32,
    alpha: f64,
    k: u32,
) -> Result<Vec<(f64, BlockEncoding)>> {
    check_n_alpha(n, alpha)?;
    check_energy_encoding(be_h)?;
    let a = be_h.ancillas_m();
    let d = be_h.system_dim();
    let dk = 1usize << k;
    let m = a + n as usize;
    let dims = [1usize << a, 1usize << n, dk, d];
    let uh = embed(be_h.unitary(), &dims, &[0, 3])?;
    let w = comparator_encoding(n, k)?;
    let uw = embed(w.unitary(), &dims, &[1, 2])?;
    let c = 4.0 * phi_k(k, alpha) * 0.5f64.powi((n - k) as i32);
    let rot = dilate(&CMatrix::identity(dk * d).scale_real(c))?.pad_ancillas(m - 1);
    Ok(vec![
        (0.5, BlockEncoding::new(uh, m, dk * d)?.with_query_cost(be_h.query_cost())),
        (0.25, BlockEncoding::new(uw, m, dk * d)?.scaled_by_phase(C64::new(-1.0, 0.0)).with_query_cost(0)),
        (0.25, rot.with_query_cost(0)),
    ])
}

/// Ancillas of the `H^{(k)}` encoding: the joint register plus two controls.
pub fn hk_ancillas(a: usize, n: u32) -> usize {
    a + n as usize + 2
}

/// `A_{(η_k−δ_cos)→δ_amp}(p_{cos,π2^{n−k}}(x)²)` with `δ_cos = 10^{−m_cos} η_k`.
pub fn ee_polynomial(
    n: u32,
    alpha: f64,
    k: u32,
    delta: f64,
    opts: &EstimatorOptions,
) -> Result<SquaredComposition> {
    check_n_alpha(n, alpha)?;
    if k >= n {
        return invalid(format!("bit index {k} out of range for n = {n}"));
    }
    let eta = eta_k(opts.eta_rule, k, alpha);
    let dcos = 10f64.powf(-opts.m_cos) * eta;
    let inner = jacobi_anger_cos(PI * (1u64 << (n - k)) as f64, dcos / 2.0)?;
    let (outer, _) = amplifying_poly(eta - dcos, delta_amp(delta, opts.m_svt))?;
    Ok(SquaredComposition { outer, inner })
}

/// Bit `k` of the energy estimate on `out ⊗ svt ⊗ Δ_k ⊗ system`. The output
/// qubit is flipped when the transformed block's flag is raised; the flag is
/// the garbage.
pub fn iterative_ee_bit(
    be_h: &BlockEncoding,
    n: u32,
    alpha: f64,
    k: u32,
    delta: f64,
    opts: &EstimatorOptions,
) -> Result<CoherentMap> {
    if !(delta > 0.0 && delta < 1.0) {
        return invalid(format!("delta must lie in (0, 1), got {delta}"));
    }
    let blk = hk_block(be_h, n, alpha, k)?;
    let pass = blk.rows();
    let enc = dilate(&blk)?.with_query_cost(be_h.query_cost());
    let poly = ee_polynomial(n, alpha, k, delta, opts)?;
    let out = apply_svt(&enc, &poly)?;
    let mut flip = CMatrix::identity(4);
    flip.set(1, 1, C64::new(0.0, 0.0));
    flip.set(3, 3, C64::new(0.0, 0.0));
    flip.set(3, 1, ONE);
    flip.set(1, 3, ONE);
    let stage = &flip.kron(&CMatrix::identity(pass)) * &CMatrix::identity(2).kron(out.unitary());
    CoherentMap::new(
        stage,
        2,
        2,
        pass,
        out.query_cost(),
        hk_ancillas(be_h.ancillas_m(), n) + 1,
    )
}

/// Stitched energy estimation on an encoded Hamiltonian with garbage
/// uncomputed bit by bit.
pub fn improved_ee_encoded(
    be_h: &BlockEncoding,
    n: u32,
    alpha: f64,
    delta: f64,
    opts: &EstimatorOptions,
) -> Result<(QuantumChannel, u64)> {
    let (stages, q) = improved_stages(n, delta, true, |k, dk| {
        iterative_ee_bit(be_h, n, alpha, k, dk, opts)
    })?;
    Ok((stitch(&stages, be_h.system_dim())?, q))
}

pub fn improved_ee(
    inst: &RoundingPromiseInstance,
    delta: f64,
    opts: &EstimatorOptions,
) -> Result<(QuantumChannel, EstimationReport)> {
    if inst.kind != InstanceKind::Hamiltonian {
        return invalid("improved_ee needs a Hamiltonian instance");
    }
    let be_h = dilate(&inst.hamiltonian())?;
    let (ch, queries) = improved_ee_encoded(&be_h, inst.n_bits, inst.alpha, delta, opts)?;
    let (success, fid) = evaluate_estimator(&ch, inst)?;
    let report = EstimationReport {
        algorithm: "improved_ee".into(),
        n: inst.n_bits,
        alpha: inst.alpha,
        delta,
        query_count: queries,
        garbage_qubits: 0,
        per_eigenstate_success: success,
        coherence_fidelity: fid,
        seed: inst.seed,
        flavor: EstimatorFlavor::clean(),
    };
    Ok((ch, report))
}

/// Energy estimation without a promise: each stage's garbage is discarded and
/// its output bit measured before the next stage reads it.
pub fn ee_no_promise(
    be_h: &BlockEncoding,
    n: u32,
    alpha: f64,
    delta: f64,
    opts: &EstimatorOptions,
) -> Result<(QuantumChannel, u64)> {
    let mut stages = Vec::with_capacity(n as usize);
    let mut queries = 0;
    for k in 0..n {
        let map = iterative_ee_bit(be_h, n, alpha, k, bit_budget(delta, k), opts)?;
        let measured = map.channel()?.then(&QuantumChannel::dephasing(2, map.passive_dim()))?;
        stages.push(measured);
        queries += map.query_count();
    }
    Ok((stitch(&stages, be_h.system_dim())?, queries))
}

// ---------------------------------------------------------------------------
// Hamiltonian simulation

/// `3⌈r(et/2, ε/24)⌉ + 3`, or zero at `t = 0`.
pub fn hamsim_query_count(t: f64, eps: f64) -> Result<u64> {
    if t == 0.0 {
        return Ok(0);
    }
    Ok(3 * solve_r(E * t.abs() / 2.0, eps / 24.0)?.ceil() as u64 + 3)
}

#[derive(Clone, Debug)]
pub struct HamiltonianSimulation {
    pub channel: QuantumChannel,
    pub encoding: BlockEncoding,
    pub query_count: u64,
    /// `4‖A − e^{iHt}‖`, an upper bound on the diamond distance.
    pub error_bound: f64,
    /// Smallest probability of the ancillas returning to `|0⟩`.
    pub postselection_success: f64,
}

/// `e^{iHt}` from Jacobi-Anger approximants: `B = (p_cos(H) + i p_sin(H))/2`,
/// then one round of oblivious amplitude amplification `3B − 4BB†B`.
pub fn hamsim_channel(be_h: &BlockEncoding, t: f64, eps: f64) -> Result<HamiltonianSimulation> {
    if !(t.is_finite()) {
        return invalid("hamsim: t must be finite");
    }
    if !(eps > 0.0 && eps < 1.0) {
        return invalid(format!("hamsim: eps must lie in (0, 1), got {eps}"));
    }
    let h = check_energy_encoding(be_h)?;
    let d = h.rows();
    let (vals, vecs) = eig_hermitian(&h)?;
    let target = {
        let ph: Vec<C64> = vals.iter().map(|&l| C64::from_polar(1.0, l * t)).collect();
        &(&vecs * &CMatrix::diag(&ph)) * &vecs.adjoint()
    };
    if t == 0.0 {
        let enc = BlockEncoding::trivial(CMatrix::identity(d))?.with_query_cost(0);
        return Ok(HamiltonianSimulation {
            channel: QuantumChannel::identity(d),
            encoding: enc,
            query_count: 0,
            error_bound: 0.0,
            postselection_success: 1.0,
        });
    }
    let sign = t.signum();
    let pc = jacobi_anger_cos(t.abs(), eps / 24.0)?;
    let ps = jacobi_anger_sin(t.abs(), eps / 24.0)?;
    let fn_of = |p: &dyn RealPolynomial, s: f64| {
        let dv: Vec<C64> = vals.iter().map(|&l| C64::new(s * p.eval(l), 0.0)).collect();
        &(&vecs * &CMatrix::diag(&dv)) * &vecs.adjoint()
    };
    let c = fn_of(&pc, 1.0);
    let s = fn_of(&ps, sign);
    let b = (&c + &s.scale(C64::new(0.0, 1.0))).scale_real(0.5);
    let a = &b.scale_real(3.0) - &(&(&b * &b.adjoint()) * &b).scale_real(4.0);
    let enc = dilate(&a)?.with_query_cost(hamsim_query_count(t, eps)?);
    let (_, sv, _) = svd(&a)?;
    let smin = sv.last().copied().unwrap_or(0.0);
    let (channel, error_bound) = channel_from_block(&enc, &target)?;
    Ok(HamiltonianSimulation {
        channel,
        query_count: enc.query_cost(),
        encoding: enc,
        error_bound,
        postselection_success: smin * smin,
    })
}

// ---------------------------------------------------------------------------
// Amplitude estimation

/// Separation parameter used when no promise is available.
pub const NO_PROMISE_ALPHA: f64 = 0.25;

fn check_reflection(r: &CMatrix, name: &str) -> Result<()> {
    let d = r.rows();
    if !r.is_square() || !r.is_hermitian(1e-9) || !r.is_unitary(1e-8 * (d as f64).sqrt()) {
        return invalid(format!("{name} must be a Hermitian unitary reflection"));
    }
    Ok(())
}

/// Encoding of `|Ψ⟩⟨Ψ|·Π·|Ψ⟩⟨Ψ|` from the two reflections, three ancillas.
pub fn amplitude_encoding(r_pi: &CMatrix, r_psi: &CMatrix) -> Result<BlockEncoding> {
    check_reflection(r_pi, "R_Pi")?;
    check_reflection(r_psi, "R_Psi")?;
    if r_pi.rows() != r_psi.rows() {
        return invalid("reflections act on different dimensions");
    }
    let id = BlockEncoding::trivial(CMatrix::identity(r_pi.rows()))?.with_query_cost(0);
    let half = |r: &CMatrix| -> Result<BlockEncoding> {
        lcu_combine(&[(0.5, BlockEncoding::trivial(r.clone())?), (0.5, id.clone())])
    };
    let p_psi = half(r_psi)?;
    let pi = half(r_pi)?;
    product(&product(&p_psi, &pi)?, &p_psi)
}

/// Energy estimation of `a² = ⟨Ψ|Π|Ψ⟩` without a promise. The report's single
/// success entry is the mass on `{floor(2ⁿa²), floor(2ⁿa²) − 1}` and the
/// fidelity is `⟨Ψ|ρ_sys|Ψ⟩` after one run.
pub fn amplitude_estimate(
    r_pi: &CMatrix,
    r_psi: &CMatrix,
    psi: &CVector,
    n: u32,
    delta: f64,
    opts: &EstimatorOptions,
) -> Result<(QuantumChannel, EstimationReport)> {
    let psi = psi.normalized()?;
    if psi.dim() != r_pi.rows() {
        return invalid("psi has the wrong dimension");
    }
    let enc = amplitude_encoding(r_pi, r_psi)?;
    let fixed = r_psi.mul_vec(&psi);
    if (fixed.inner(&psi).re - 1.0).abs() > 1e-8 {
        return invalid("R_Psi does not fix psi");
    }
    let (ch, queries) = ee_no_promise(&enc, n, NO_PROMISE_ALPHA, delta, opts)?;
    let a2 = amplitude_squared(r_pi, &psi);
    let dist = estimate_distribution(&ch, n, &psi)?;
    let reg = 1usize << n;
    let top = floor_estimate(a2.min(1.0 - 1e-15), n);
    let below = (top + reg - 1) % reg;
    let mass = if top == below { dist[top] } else { dist[top] + dist[below] };
    let fid = sequential_fidelity(&ch, &psi, n, 1)?;
    let report = EstimationReport {
        algorithm: "amplitude".into(),
        n,
        alpha: NO_PROMISE_ALPHA,
        delta,
        query_count: queries,
        garbage_qubits: 0,
        per_eigenstate_success: vec![mass],
        coherence_fidelity: fid,
        seed: None,
        flavor: EstimatorFlavor::clean(),
    };
    Ok((ch, report))
}

/// `⟨Ψ|(I + R_Π)/2|Ψ⟩`.
pub fn amplitude_squared(r_pi: &CMatrix, psi: &CVector) -> f64 {
    let proj = (&CMatrix::identity(r_pi.rows()) + r_pi).scale_real(0.5);
    psi.inner(&proj.mul_vec(psi)).re
}

/// Fidelity of the system with `|Ψ⟩` after `runs` uses of `ch`, the estimate
/// register being reset to `|0ⁿ⟩` before each run.
pub fn sequential_fidelity(ch: &QuantumChannel, psi: &CVector, n: u32, runs: usize) -> Result<f64> {
    let reg = 1usize << n;
    let d = psi.dim();
    if ch.dim() != reg * d {
        return invalid("sequential_fidelity: channel dimension mismatch");
    }
    let mut sys = psi.projector();
    for _ in 0..runs {
        let full = ch.apply(&CVector::basis(reg, 0).projector().kron(&sys));
        sys = crate::numerics::partial_trace(&full, &[reg, d], &[1])?;
    }
    Ok(psi.inner(&sys.mul_vec(psi)).re.clamp(0.0, 1.0))
}
