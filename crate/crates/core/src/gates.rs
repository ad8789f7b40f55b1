//! Gate model: named gates, instances on a `d`-qubit register, instruction
//! sets, circuits, POVM elements and the probability-difference bound.
//!
//! Qubit 0 is the most significant bit of a basis index.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{validation, Error, Result};
use crate::scalar::matrix::{hermitian_eigenvalues, random_near_identity, random_state, random_unitary, UNITARITY_TOL};
use crate::scalar::{operator_norm, DenseMatrix, ExactAmplitude, C64};

pub const MAX_WIDTH: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub name: String,
    pub arity: usize,
    /// Textbook matrix.
    pub matrix: DenseMatrix,
    /// The same matrix over Z[i, 1/sqrt(2)], row-major, when representable.
    pub exact: Option<Vec<ExactAmplitude>>,
}

fn exact_gate(name: &str, arity: usize, entries: Vec<ExactAmplitude>) -> Gate {
    let dim = 1 << arity;
    let matrix = DenseMatrix::from_rows(dim, entries.iter().map(|e| e.to_c64()).collect()).expect("static gate");
    Gate { name: name.to_string(), arity, matrix, exact: Some(entries) }
}

fn permutation(perm: &[usize]) -> Vec<ExactAmplitude> {
    let n = perm.len();
    let mut e = vec![ExactAmplitude::ZERO; n * n];
    for (col, &row) in perm.iter().enumerate() {
        e[row * n + col] = ExactAmplitude::ONE;
    }
    e
}

fn diagonal(d: &[ExactAmplitude]) -> Vec<ExactAmplitude> {
    let n = d.len();
    let mut e = vec![ExactAmplitude::ZERO; n * n];
    for (i, z) in d.iter().enumerate() {
        e[i * n + i] = *z;
    }
    e
}

/// Names understood by [`standard_gate`].
pub const STANDARD_GATES: [&str; 13] = ["I", "X", "Y", "Z", "H", "S", "Sdg", "T", "Tdg", "CNOT", "CZ", "SWAP", "Toffoli"];

/// Looks up a standard gate by name.
pub fn standard_gate(name: &str) -> Option<Gate> {
    use ExactAmplitude as Z;
    let (o, z, i, r) = (Z::ONE, Z::ZERO, Z::I, Z::INV_SQRT2);
    let omega_bar = Z::OMEGA.conj();
    Some(match name {
        "I" => exact_gate("I", 1, diagonal(&[o, o])),
        "X" => exact_gate("X", 1, permutation(&[1, 0])),
        "Y" => exact_gate("Y", 1, vec![z, -i, i, z]),
        "Z" => exact_gate("Z", 1, diagonal(&[o, -o])),
        "H" => exact_gate("H", 1, vec![r, r, r, -r]),
        "S" => exact_gate("S", 1, diagonal(&[o, i])),
        "Sdg" => exact_gate("Sdg", 1, diagonal(&[o, -i])),
        "T" => exact_gate("T", 1, diagonal(&[o, Z::OMEGA])),
        "Tdg" => exact_gate("Tdg", 1, diagonal(&[o, omega_bar])),
        "CNOT" => exact_gate("CNOT", 2, permutation(&[0, 1, 3, 2])),
        "CZ" => exact_gate("CZ", 2, diagonal(&[o, o, o, -o])),
        "SWAP" => exact_gate("SWAP", 2, permutation(&[0, 2, 1, 3])),
        "Toffoli" => exact_gate("Toffoli", 3, permutation(&[0, 1, 2, 3, 4, 5, 7, 6])),
        _ => return None,
    })
}

impl Gate {
    /// A gate from an arbitrary unitary matrix.
    pub fn custom(name: &str, matrix: DenseMatrix) -> Result<Self> {
        let dim = matrix.dim();
        if !dim.is_power_of_two() || dim < 2 {
            return Err(validation("gate dimension must be a power of two"));
        }
        if !matrix.is_unitary() {
            return Err(validation(format!("gate {name} is not unitary (defect {:e})", matrix.unitarity_defect())));
        }
        Ok(Self { name: name.to_string(), arity: dim.trailing_zeros() as usize, matrix, exact: None })
    }

    pub fn adjoint(&self) -> Self {
        let exact = self.exact.as_ref().map(|e| {
            let n = 1 << self.arity;
            (0..n * n).map(|k| e[(k % n) * n + k / n].conj()).collect()
        });
        Self { name: format!("{}^dg", self.name), arity: self.arity, matrix: self.matrix.adjoint(), exact }
    }
}

/// A gate acting on `targets` of a `width`-qubit register, identity elsewhere.
/// `targets[0]` is the gate's most significant qubit.
#[derive(Clone, Debug, PartialEq)]
pub struct GateInstance {
    pub gate: Gate,
    pub targets: Vec<usize>,
    pub width: usize,
}

impl GateInstance {
    pub fn new(gate: Gate, targets: Vec<usize>, width: usize) -> Result<Self> {
        if width == 0 || width > MAX_WIDTH {
            return Err(validation(format!("register width must be in 1..={MAX_WIDTH}")));
        }
        if targets.len() != gate.arity {
            return Err(validation(format!("gate {} acts on {} qubits, got {} targets", gate.name, gate.arity, targets.len())));
        }
        for (k, &t) in targets.iter().enumerate() {
            if t >= width {
                return Err(validation(format!("target qubit {t} outside register of width {width}")));
            }
            if targets[..k].contains(&t) {
                return Err(validation(format!("duplicate target qubit {t}")));
            }
        }
        Ok(Self { gate, targets, width })
    }

    fn bit(&self, t: usize) -> usize {
        self.width - 1 - t
    }

    /// Sub-index of the gate's qubits inside basis index `j`.
    fn local_index(&self, j: usize) -> usize {
        self.targets.iter().fold(0, |acc, &t| (acc << 1) | ((j >> self.bit(t)) & 1))
    }

    fn with_local(&self, j: usize, local: usize) -> usize {
        let f = self.targets.len();
        self.targets.iter().enumerate().fold(j, |acc, (k, &t)| {
            let b = (local >> (f - 1 - k)) & 1;
            (acc & !(1 << self.bit(t))) | (b << self.bit(t))
        })
    }

    /// The `2^width` matrix of this instance.
    pub fn matrix(&self) -> DenseMatrix {
        let n = 1 << self.width;
        let g = 1 << self.gate.arity;
        let mut m = DenseMatrix::zeros(n);
        for j in 0..n {
            let a = self.local_index(j);
            for b in 0..g {
                m[(self.with_local(j, b), j)] = self.gate.matrix[(b, a)];
            }
        }
        m
    }

    /// Applies the instance to a state vector without forming the matrix.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let g = 1 << self.gate.arity;
        let mut out = vec![C64::new(0.0, 0.0); v.len()];
        for (j, &amp) in v.iter().enumerate() {
            if amp == C64::new(0.0, 0.0) {
                continue;
            }
            let a = self.local_index(j);
            for b in 0..g {
                out[self.with_local(j, b)] += self.gate.matrix[(b, a)] * amp;
            }
        }
        out
    }
}

/// `instance_matrix(g)`.
pub fn instance_matrix(g: &GateInstance) -> DenseMatrix {
    g.matrix()
}

/// Finite gate set on a `width`-qubit register.
#[derive(Clone, Debug)]
pub struct InstructionSet {
    pub width: usize,
    pub gates: Vec<GateInstance>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstructionSetReport {
    pub valid: bool,
    pub problems: Vec<String>,
}

impl InstructionSet {
    /// Clifford+T with CNOT (and Toffoli when it fits), every gate placed on
    /// the leading qubits, normalized into SU(2^width) and closed under
    /// inverses.
    pub fn clifford_t(width: usize) -> Result<Self> {
        let mut gates = Vec::new();
        for name in ["H", "S", "Sdg", "T", "Tdg", "CNOT", "Toffoli"] {
            let g = standard_gate(name).expect("standard gate");
            if g.arity > width {
                continue;
            }
            let targets = (0..g.arity).collect();
            gates.push(GateInstance::new(g, targets, width)?);
        }
        Ok(Self::normalized(width, gates)?.with_inverses())
    }

    /// Appends the adjoint of every gate whose inverse is not yet a member.
    ///
    /// Normalizing a self-inverse gate with determinant -1 (H, CNOT) picks a
    /// phase that is not its own inverse, so those need an explicit partner.
    pub fn with_inverses(mut self) -> Self {
        let mut extra = Vec::new();
        for g in &self.gates {
            let inv = g.matrix().adjoint();
            let present = self.gates.iter().chain(&extra).any(|w: &GateInstance| w.matrix().max_abs_diff(&inv) <= UNITARITY_TOL);
            if !present {
                extra.push(GateInstance { gate: g.gate.adjoint(), targets: g.targets.clone(), width: g.width });
            }
        }
        self.gates.extend(extra);
        self
    }

    /// Rescales every gate so that its instance has determinant one.
    pub fn normalized(width: usize, gates: Vec<GateInstance>) -> Result<Self> {
        let gates = gates
            .into_iter()
            .map(|mut g| {
                if g.width != width {
                    return Err(validation("instance width differs from the instruction set width"));
                }
                let m = g.matrix();
                let det = m.determinant();
                // det(instance) = det(gate)^(2^(width - arity)).
                let phase = C64::from_polar(1.0, -det.arg() / (1u64 << width) as f64);
                g.gate.matrix = g.gate.matrix.scale(phase);
                if g.gate.exact.is_some() {
                    g.gate.exact = None;
                }
                Ok(g)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { width, gates })
    }

    /// Checks the two decidable axioms: unit determinant and closure under
    /// inverses. Density is only tested empirically by compilation.
    pub fn validate(&self) -> Result<InstructionSetReport> {
        let mut problems = Vec::new();
        let mats: Vec<DenseMatrix> = self.gates.iter().map(GateInstance::matrix).collect();
        for (g, m) in self.gates.iter().zip(&mats) {
            if !m.is_unitary() {
                problems.push(format!("{} is not unitary", g.gate.name));
            }
            let det = m.determinant();
            if (det - C64::new(1.0, 0.0)).norm() > 1e-8 {
                problems.push(format!("{} has determinant {det}", g.gate.name));
            }
            let inv = m.adjoint();
            if !mats.iter().any(|w| w.max_abs_diff(&inv) <= UNITARITY_TOL) {
                problems.push(format!("inverse of {} is missing", g.gate.name));
            }
        }
        Ok(InstructionSetReport { valid: problems.is_empty(), problems })
    }
}

/// Circuit JSON: `{"width": d, "ops": [{"gate": "H", "targets": [0]}]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitSpec {
    pub width: usize,
    pub ops: Vec<OpSpec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpSpec {
    pub gate: String,
    pub targets: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Circuit {
    pub width: usize,
    pub ops: Vec<GateInstance>,
}

impl Circuit {
    pub fn from_spec(spec: &CircuitSpec) -> Result<Self> {
        let ops = spec
            .ops
            .iter()
            .map(|op| {
                let g = standard_gate(&op.gate).ok_or_else(|| validation(format!("unknown gate {:?}", op.gate)))?;
                GateInstance::new(g, op.targets.clone(), spec.width)
            })
            .collect::<Result<Vec<_>>>()?;
        if spec.width == 0 || spec.width > MAX_WIDTH {
            return Err(validation(format!("register width must be in 1..={MAX_WIDTH}")));
        }
        Ok(Self { width: spec.width, ops })
    }

    /// Product of the instance matrices, last operation leftmost.
    pub fn unitary(&self) -> DenseMatrix {
        self.ops.iter().fold(DenseMatrix::identity(1 << self.width), |acc, g| g.matrix().mul(&acc))
    }
}

fn norm(v: &[C64]) -> f64 {
    libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum())
}

/// Applies the circuit's operations in order.
pub fn apply_circuit(c: &Circuit, phi: &[C64]) -> Result<Vec<C64>> {
    if phi.len() != 1 << c.width {
        return Err(validation(format!("state has {} amplitudes, register needs {}", phi.len(), 1u64 << c.width)));
    }
    if libm::fabs(norm(phi) - 1.0) > UNITARITY_TOL {
        return Err(validation("input state is not normalized"));
    }
    let mut v = phi.to_vec();
    for g in &c.ops {
        v = g.apply(&v);
    }
    if libm::fabs(norm(&v) - 1.0) > 1e-9 {
        return Err(Error::Numeric("circuit application lost normalization".into()));
    }
    Ok(v)
}

/// `|index>` on a register of `width` qubits.
pub fn basis_state(width: usize, index: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); 1 << width];
    v[index] = C64::new(1.0, 0.0);
    v
}

/// Positive operator with `0 <= M <= I`.
#[derive(Clone, Debug, PartialEq)]
pub struct PovmElement {
    matrix: DenseMatrix,
}

impl PovmElement {
    pub fn new(matrix: DenseMatrix) -> Result<Self> {
        if !matrix.is_hermitian(1e-10) {
            return Err(validation("POVM element is not Hermitian"));
        }
        for e in hermitian_eigenvalues(&matrix)? {
            if !(-1e-10..=1.0 + 1e-10).contains(&e) {
                return Err(validation(format!("POVM element has eigenvalue {e} outside [0, 1]")));
            }
        }
        Ok(Self { matrix })
    }

    /// `|k><k|`.
    pub fn projector(dim: usize, k: usize) -> Self {
        let mut m = DenseMatrix::zeros(dim);
        m[(k, k)] = C64::new(1.0, 0.0);
        Self { matrix: m }
    }

    /// `W diag(d) W^dagger` with `d` uniform in `[0, 1]` and Haar `W`.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let w = random_unitary(dim, rng);
        let mut d = DenseMatrix::zeros(dim);
        for i in 0..dim {
            d[(i, i)] = C64::new(rng.gen::<f64>(), 0.0);
        }
        let mut m = w.mul(&d).mul(&w.adjoint());
        // Remove the rounding asymmetry so the element is Hermitian exactly.
        m = m.add(&m.adjoint()).scale(C64::new(0.5, 0.0));
        Self { matrix: m }
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }
}

/// `<phi| U^dagger M U |phi>`, clamped to `[0, 1]`.
pub fn measure_probability(u: &DenseMatrix, phi: &[C64], m: &PovmElement) -> Result<f64> {
    if u.dim() != phi.len() || m.matrix.dim() != u.dim() {
        return Err(validation("dimensions of unitary, state and POVM element differ"));
    }
    let psi = u.apply(phi);
    let mpsi = m.matrix.apply(&psi);
    let p: f64 = psi.iter().zip(&mpsi).map(|(a, b)| (a.conj() * b).re).sum();
    if !(-1e-10..=1.0 + 1e-10).contains(&p) {
        return Err(Error::Numeric(format!("probability {p} outside [0, 1]")));
    }
    Ok(p.clamp(0.0, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PovmBound {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub const POVM_SLACK: f64 = 1e-9;

/// `|P_U - P_V| <= 2 ||U - V||`.
pub fn check_povm_bound(u: &DenseMatrix, v: &DenseMatrix, phi: &[C64], m: &PovmElement) -> Result<PovmBound> {
    let lhs = libm::fabs(measure_probability(u, phi, m)? - measure_probability(v, phi, m)?);
    let rhs = 2.0 * operator_norm(&u.sub(v))?;
    Ok(PovmBound { lhs, rhs, holds: lhs <= rhs + POVM_SLACK })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PovmTrialSummary {
    pub trials: usize,
    pub violations: usize,
    /// Largest `lhs / rhs` seen; the bound says it never exceeds one.
    pub max_ratio: f64,
    pub by_width: Vec<(usize, usize)>,
}

/// Randomized trials of the bound. Half the pairs are independent Haar
/// unitaries, half are close to each other, where the bound is tight-ish.
pub fn povm_trials<R: Rng + ?Sized>(widths: &[usize], trials: usize, rng: &mut R) -> Result<PovmTrialSummary> {
    if widths.is_empty() || widths.iter().any(|&d| d == 0 || d > MAX_WIDTH) {
        return Err(validation("widths must be in 1..=10"));
    }
    let mut violations = 0;
    let mut max_ratio: f64 = 0.0;
    let mut by_width = widths.iter().map(|&d| (d, 0)).collect::<Vec<_>>();
    for t in 0..trials {
        let slot = t % widths.len();
        let dim = 1 << widths[slot];
        by_width[slot].1 += 1;
        let u = random_unitary(dim, rng);
        let v = if t % 2 == 0 {
            random_unitary(dim, rng)
        } else {
            let scale = libm::pow(10.0, -rng.gen_range(1.0..6.0));
            random_near_identity(dim, scale, rng).mul(&u)
        };
        let phi = random_state(dim, rng);
        let m = PovmElement::random(dim, rng);
        let b = check_povm_bound(&u, &v, &phi, &m)?;
        if !b.holds {
            violations += 1;
        }
        if b.rhs > 0.0 {
            max_ratio = max_ratio.max(b.lhs / b.rhs);
        }
    }
    Ok(PovmTrialSummary { trials, violations, max_ratio, by_width })
}

/// Trace of the classical/quantum loop: choose and prepare, run the circuit,
/// measure all qubits, post-process, and go back when the outcome is
/// rejected.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HybridReport {
    pub attempts: usize,
    pub outcomes: Vec<String>,
    pub accepted: Option<String>,
}

/// Runs the loop with at most `max_attempts` quantum runs.
pub fn hybrid_pipeline<R: Rng + ?Sized>(
    circuit: &Circuit,
    prepare: usize,
    accept: impl Fn(&str) -> bool,
    max_attempts: usize,
    rng: &mut R,
) -> Result<HybridReport> {
    if prepare >= 1 << circuit.width {
        return Err(validation("preparation index outside the register"));
    }
    let mut outcomes = Vec::new();
    for attempt in 1..=max_attempts {
        let phi = basis_state(circuit.width, prepare);
        let out = apply_circuit(circuit, &phi)?;
        let u = rng.gen::<f64>();
        let mut acc = 0.0;
        let mut k = out.len() - 1;
        for (i, z) in out.iter().enumerate() {
            acc += z.norm_sqr();
            if u < acc {
                k = i;
                break;
            }
        }
        let bits: String = (0..circuit.width).map(|q| if (k >> (circuit.width - 1 - q)) & 1 == 1 { '1' } else { '0' }).collect();
        outcomes.push(bits.clone());
        if accept(&bits) {
            return Ok(HybridReport { attempts: attempt, outcomes, accepted: Some(bits) });
        }
    }
    Ok(HybridReport { attempts: max_attempts, outcomes, accepted: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn inst(name: &str, targets: &[usize], width: usize) -> GateInstance {
        GateInstance::new(standard_gate(name).unwrap(), targets.to_vec(), width).unwrap()
    }

    #[test]
    fn textbook_matrices() {
        let h = standard_gate("H").unwrap();
        let r = core::f64::consts::FRAC_1_SQRT_2;
        assert!(h.matrix.max_abs_diff(&DenseMatrix::from_rows(2, vec![c(r), c(r), c(r), c(-r)]).unwrap()) < 1e-15);
        let t = standard_gate("T").unwrap();
        assert_eq!(t.exact.as_ref().unwrap()[3], ExactAmplitude::OMEGA);
        let s = standard_gate("S").unwrap();
        let tt = t.matrix.mul(&t.matrix);
        assert!(tt.max_abs_diff(&s.matrix) < 1e-15);
        for name in STANDARD_GATES {
            let g = standard_gate(name).unwrap();
            assert!(g.matrix.is_unitary(), "{name}");
            // Exact unitarity of the ring form.
            let e = g.exact.unwrap();
            let n = 1 << g.arity;
            for i in 0..n {
                for j in 0..n {
                    let mut acc = ExactAmplitude::ZERO;
                    for k in 0..n {
                        acc = acc + e[k * n + i].conj() * e[k * n + j];
                    }
                    assert_eq!(acc, if i == j { ExactAmplitude::ONE } else { ExactAmplitude::ZERO }, "{name}");
                }
            }
        }
        assert!(standard_gate("nope").is_none());
    }

    #[test]
    fn instance_examples() {
        let x = inst("X", &[0], 1).matrix();
        assert!(x.max_abs_diff(&standard_gate("X").unwrap().matrix) < 1e-15);
        let id = inst("I", &[2], 3).matrix();
        assert!(id.max_abs_diff(&DenseMatrix::identity(8)) < 1e-15);
        // CNOT(0 -> 1) on |10> gives |11>.
        let out = inst("CNOT", &[0, 1], 2).matrix().apply(&basis_state(2, 0b10));
        assert!((out[0b11] - c(1.0)).norm() < 1e-15);
        // Reversed control.
        let out = inst("CNOT", &[1, 0], 2).matrix().apply(&basis_state(2, 0b01));
        assert!((out[0b11] - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn instance_errors() {
        let x = standard_gate("X").unwrap();
        assert!(GateInstance::new(x.clone(), vec![1], 1).is_err());
        let cx = standard_gate("CNOT").unwrap();
        assert!(GateInstance::new(cx.clone(), vec![0, 0], 2).is_err());
        assert!(GateInstance::new(cx, vec![0], 2).is_err());
        assert!(GateInstance::new(x, vec![0], 11).is_err());
    }

    #[test]
    fn embedding_matches_kronecker_products() {
        let h = standard_gate("H").unwrap().matrix;
        let i2 = DenseMatrix::identity(2);
        assert!(inst("H", &[0], 2).matrix().max_abs_diff(&h.kron(&i2)) < 1e-15);
        assert!(inst("H", &[1], 2).matrix().max_abs_diff(&i2.kron(&h)) < 1e-15);
        let cx = standard_gate("CNOT").unwrap().matrix;
        assert!(inst("CNOT", &[1, 2], 3).matrix().max_abs_diff(&i2.kron(&cx)) < 1e-15);
    }

    #[test]
    fn embedding_commutes_with_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let v = random_unitary(4, &mut rng);
            let w = random_unitary(4, &mut rng);
            let targets = vec![2, 0];
            let gv = GateInstance::new(Gate::custom("V", v.clone()).unwrap(), targets.clone(), 3).unwrap();
            let gw = GateInstance::new(Gate::custom("W", w.clone()).unwrap(), targets.clone(), 3).unwrap();
            let gvw = GateInstance::new(Gate::custom("VW", v.mul(&w)).unwrap(), targets, 3).unwrap();
            assert!(gvw.matrix().max_abs_diff(&gv.matrix().mul(&gw.matrix())) < 1e-10);
            let phi = random_state(8, &mut rng);
            let direct = gv.apply(&phi);
            let via = gv.matrix().apply(&phi);
            assert!(direct.iter().zip(&via).all(|(a, b)| (a - b).norm() < 1e-12));
        }
    }

    #[test]
    fn circuit_examples() {
        let spec = |ops: &str| -> Circuit {
            let s: CircuitSpec = serde_json::from_str(&format!(r#"{{"width":1,"ops":[{ops}]}}"#)).unwrap();
            Circuit::from_spec(&s).unwrap()
        };
        let phi = basis_state(1, 0);
        assert_eq!(apply_circuit(&spec(""), &phi).unwrap(), phi);
        let plus = apply_circuit(&spec(r#"{"gate":"H","targets":[0]}"#), &phi).unwrap();
        let r = core::f64::consts::FRAC_1_SQRT_2;
        assert!((plus[0] - c(r)).norm() < 1e-15 && (plus[1] - c(r)).norm() < 1e-15);
        let back = apply_circuit(&spec(r#"{"gate":"H","targets":[0]},{"gate":"H","targets":[0]}"#), &phi).unwrap();
        assert!((back[0] - c(1.0)).norm() < 1e-12 && back[1].norm() < 1e-12);
        assert!(apply_circuit(&spec(""), &basis_state(2, 0)).is_err());
        let bad: CircuitSpec = serde_json::from_str(r#"{"width":1,"ops":[{"gate":"Q","targets":[0]}]}"#).unwrap();
        assert!(Circuit::from_spec(&bad).is_err());
    }

    #[test]
    fn circuit_unitary_matches_application() {
        let s: CircuitSpec = serde_json::from_str(
            r#"{"width":3,"ops":[{"gate":"H","targets":[0]},{"gate":"CNOT","targets":[0,2]},{"gate":"T","targets":[1]},{"gate":"Toffoli","targets":[2,1,0]}]}"#,
        )
        .unwrap();
        let circ = Circuit::from_spec(&s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let phi = random_state(8, &mut rng);
        let a = apply_circuit(&circ, &phi).unwrap();
        let b = circ.unitary().apply(&phi);
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).norm() < 1e-12));
    }

    #[test]
    fn instruction_sets_validate() {
        for width in [2, 3] {
            let set = InstructionSet::clifford_t(width).unwrap();
            let r = set.validate().unwrap();
            assert!(r.valid, "{width}: {:?}", r.problems);
        }
        let set = InstructionSet::clifford_t(3).unwrap();
        assert!(set.gates.iter().any(|g| g.gate.name == "Toffoli"));
        // Dropping T-dagger breaks inverse closure.
        let mut broken = set.clone();
        broken.gates.retain(|g| g.gate.name != "Tdg");
        assert!(!broken.validate().unwrap().valid);
        // Without normalization H has determinant -1.
        let raw = InstructionSet { width: 1, gates: vec![inst("H", &[0], 1)] };
        assert!(!raw.validate().unwrap().valid);
    }

    #[test]
    fn measurement_examples() {
        let id = DenseMatrix::identity(2);
        let phi = basis_state(1, 0);
        let all = PovmElement::new(DenseMatrix::identity(2)).unwrap();
        assert!((measure_probability(&id, &phi, &all).unwrap() - 1.0).abs() < 1e-15);
        let h = standard_gate("H").unwrap().matrix;
        let p0 = PovmElement::projector(2, 0);
        assert!((measure_probability(&h, &phi, &p0).unwrap() - 0.5).abs() < 1e-15);
        let zero = PovmElement::new(DenseMatrix::zeros(2)).unwrap();
        assert_eq!(measure_probability(&h, &phi, &zero).unwrap(), 0.0);
        let neg = DenseMatrix::from_rows(2, vec![c(-0.5), c(0.0), c(0.0), c(0.5)]).unwrap();
        assert!(PovmElement::new(neg).is_err());
        let big = DenseMatrix::identity(2).scale(c(1.5));
        assert!(PovmElement::new(big).is_err());
        let skew = DenseMatrix::from_rows(2, vec![c(0.5), c(0.1), c(0.0), c(0.5)]).unwrap();
        assert!(PovmElement::new(skew).is_err());
    }

    #[test]
    fn bound_examples() {
        let id = DenseMatrix::identity(2);
        let x = standard_gate("X").unwrap().matrix;
        let phi = basis_state(1, 0);
        let p0 = PovmElement::projector(2, 0);
        let same = check_povm_bound(&id, &id, &phi, &p0).unwrap();
        assert_eq!((same.lhs, same.rhs, same.holds), (0.0, 0.0, true));
        let b = check_povm_bound(&id, &x, &phi, &p0).unwrap();
        assert!((b.lhs - 1.0).abs() < 1e-12 && (b.rhs - 4.0).abs() < 1e-9 && b.holds);
    }

    #[test]
    fn random_povm_elements_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for d in 1..=3 {
            let m = PovmElement::random(1 << d, &mut rng);
            assert!(PovmElement::new(m.matrix().clone()).is_ok());
        }
    }

    #[test]
    fn bound_holds_on_random_trials() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = povm_trials(&[1, 2, 3], 300, &mut rng).unwrap();
        assert_eq!(s.violations, 0);
        assert!(s.max_ratio <= 1.0 + 1e-9);
        assert!(s.max_ratio > 0.0);
    }

    #[test]
    fn hybrid_loop_retries_until_accepted() {
        let s: CircuitSpec = serde_json::from_str(r#"{"width":2,"ops":[{"gate":"H","targets":[0]},{"gate":"H","targets":[1]}]}"#).unwrap();
        let circ = Circuit::from_spec(&s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let r = hybrid_pipeline(&circ, 0, |b| b == "11", 64, &mut rng).unwrap();
        assert_eq!(r.accepted.as_deref(), Some("11"));
        assert_eq!(r.outcomes.len(), r.attempts);
        let never = hybrid_pipeline(&circ, 0, |_| false, 5, &mut rng).unwrap();
        assert_eq!((never.attempts, never.accepted), (5, None));
    }
}
