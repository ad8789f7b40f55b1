//! Reference machines and a seeded test corpus.
//!
//! Generated machines are *unidirectional*: every state is always entered
//! with the same head move. Their rule columns then never meet across
//! different head positions, so orthonormality of the columns is all that
//! well-formedness asks for. Columns are built from a random injection of
//! keys into `(next state, written symbol)` slots, with some key pairs mixed
//! by a 2x2 unitary drawn from words over H, S, T and X.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_well_formed, output_distribution, Amplitude, QtmDescription, RuleTarget, SparseState};
use crate::machine::{Move, StateId, Symbol};
use crate::scalar::{ExactAmplitude, C64};

/// Corpus entry: a machine plus the input it is exercised on.
#[derive(Clone, Debug)]
pub struct CorpusMachine {
    pub name: String,
    pub machine: QtmDescription,
    pub input: String,
}

type Target = (Amplitude, Symbol, Move, StateId);

fn build(names: &[&str], rules: Vec<((StateId, Symbol), Vec<Target>)>) -> QtmDescription {
    QtmDescription {
        names: names.iter().map(|s| String::from(*s)).collect(),
        initial: 0,
        halt: (names.len() - 1) as StateId,
        rules: rules
            .into_iter()
            .map(|(k, ts)| (k, ts.into_iter().map(|(amp, write, mv, next)| RuleTarget { amp, write, mv, next }).collect()))
            .collect(),
    }
}

fn ex(a: ExactAmplitude) -> Amplitude {
    Amplitude::Exact(a)
}

const ONE: Amplitude = Amplitude::Exact(ExactAmplitude::ONE);

/// Writes a fair coin into the scanned cell and halts one cell to the right:
/// a Hadamard on `{0, 1}` and the identity on blank.
pub fn coin_machine() -> QtmDescription {
    coin_with(ExactAmplitude::INV_SQRT2)
}

/// The coin machine with every amplitude 1 (columns of squared norm 2).
pub fn unnormalized_coin_machine() -> QtmDescription {
    coin_with(ExactAmplitude::ONE)
}

fn coin_with(r: ExactAmplitude) -> QtmDescription {
    use Symbol::*;
    let (q0, h) = (0, 1);
    build(
        &["q0", "qH"],
        vec![
            ((q0, Zero), vec![(ex(r), Zero, Move::Right, h), (ex(r), One, Move::Right, h)]),
            ((q0, One), vec![(ex(r), Zero, Move::Right, h), (ex(-r), One, Move::Right, h)]),
            ((q0, Blank), vec![(ONE, Blank, Move::Right, h)]),
        ],
    )
}

/// Three equally likely outcomes via the 3x3 Fourier matrix. Its amplitudes
/// are not in the exact ring, so this machine only runs in float mode.
pub fn three_branch_machine() -> QtmDescription {
    let syms = Symbol::ALL;
    let s = 1.0 / libm::sqrt(3.0);
    let rules = syms
        .iter()
        .enumerate()
        .map(|(j, &read)| {
            let ts = syms
                .iter()
                .enumerate()
                .map(|(k, &w)| {
                    let phase = 2.0 * core::f64::consts::PI * (j * k) as f64 / 3.0;
                    (Amplitude::Float(C64::new(s * libm::cos(phase), s * libm::sin(phase))), w, Move::Right, 1)
                })
                .collect();
            ((0, read), ts)
        })
        .collect();
    build(&["q0", "qH"], rules)
}

/// Reversible walker: moves right over the input and halts on the first
/// blank after flipping every bit it passes.
pub fn flip_walker() -> QtmDescription {
    use Symbol::*;
    build(
        &["q0", "qH"],
        vec![
            ((0, Zero), vec![(ONE, One, Move::Right, 0)]),
            ((0, One), vec![(ONE, Zero, Move::Right, 0)]),
            ((0, Blank), vec![(ONE, Blank, Move::Right, 1)]),
        ],
    )
}

fn mat_mul(a: &[[ExactAmplitude; 2]; 2], b: &[[ExactAmplitude; 2]; 2]) -> [[ExactAmplitude; 2]; 2] {
    let mut r = [[ExactAmplitude::ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

fn random_su2_word<R: Rng>(rng: &mut R) -> [[ExactAmplitude; 2]; 2] {
    let (z, o, r) = (ExactAmplitude::ZERO, ExactAmplitude::ONE, ExactAmplitude::INV_SQRT2);
    let gates = [[[r, r], [r, -r]], [[o, z], [z, ExactAmplitude::I]], [[o, z], [z, ExactAmplitude::OMEGA]], [[z, o], [o, z]]];
    // Start with H so that the block genuinely mixes.
    let mut u = gates[0];
    for _ in 0..rng.gen_range(0..3) {
        u = mat_mul(&gates[rng.gen_range(0..4)], &u);
    }
    u
}

/// Random unidirectional machine; `mixing` controls whether key pairs are
/// mixed by 2x2 unitaries (otherwise the machine is a reversible TM).
pub fn random_machine(seed: u64, mixing: bool) -> QtmDescription {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let running = rng.gen_range(1..=3usize);
    let mut names: Vec<String> = (0..running).map(|i| format!("q{i}")).collect();
    names.push(String::from("qH"));
    let halt = running as StateId;
    let moves = [Move::Left, Move::Stay, Move::Right];
    let dir: Vec<Move> = (0..=running).map(|_| moves[rng.gen_range(0..3)]).collect();

    let keys: Vec<(StateId, Symbol)> = (0..running as StateId).flat_map(|q| Symbol::ALL.into_iter().map(move |s| (q, s))).collect();
    let mut slots: Vec<(StateId, Symbol)> = (0..=running as StateId).flat_map(|q| Symbol::ALL.into_iter().map(move |s| (q, s))).collect();
    slots.shuffle(&mut rng);
    let mut order = keys.clone();
    order.shuffle(&mut rng);

    let mut rules: BTreeMap<(StateId, Symbol), Vec<RuleTarget>> = BTreeMap::new();
    let target = |amp: ExactAmplitude, (q, s): (StateId, Symbol)| RuleTarget { amp: ex(amp), write: s, mv: dir[q as usize], next: q };
    let mut i = 0;
    while i < order.len() {
        // Mixing only on non-blank reads keeps blank regions deterministic,
        // which bounds how fast the support grows.
        let pairable = mixing && i + 1 < order.len() && order[i].1 != Symbol::Blank && order[i + 1].1 != Symbol::Blank;
        if pairable && rng.gen_bool(0.7) {
            let u = random_su2_word(&mut rng);
            let (ka, kb, ca, cb) = (order[i], order[i + 1], slots[i], slots[i + 1]);
            for (k, col) in [(ka, 0), (kb, 1)] {
                let ts: Vec<_> =
                    [(u[0][col], ca), (u[1][col], cb)].into_iter().filter(|(a, _)| !a.is_zero()).map(|(a, c)| target(a, c)).collect();
                rules.insert(k, ts);
            }
            i += 2;
        } else {
            rules.insert(order[i], vec![target(ExactAmplitude::ONE, slots[i])]);
            i += 1;
        }
    }
    QtmDescription { names, initial: 0, halt, rules }
}

const HORIZON: usize = 20;
const SUPPORT_CAP: usize = 4096;

/// Keeps machines that halt with positive probability by the horizon, stay
/// small and never collide halted branches.
fn usable(m: &QtmDescription, input: &str) -> bool {
    let Ok(psi) = SparseState::<ExactAmplitude>::superposed_inputs(m, &[input]) else { return false };
    if !check_well_formed(m).map(|r| r.is_well_formed()).unwrap_or(false) {
        return false;
    }
    match output_distribution(m, &psi, HORIZON, &[HORIZON], SUPPORT_CAP) {
        Ok(out) => !out.halted.is_empty(),
        Err(_) => false,
    }
}

fn generated(count: usize, mixing: bool, salt: u64) -> Vec<CorpusMachine> {
    let inputs = ["0", "1", "01", "10", "110", ""];
    let mut out = Vec::new();
    let mut seed = salt;
    while out.len() < count {
        let m = random_machine(seed, mixing);
        let input = inputs[(seed % inputs.len() as u64) as usize];
        if usable(&m, input) {
            let kind = if mixing { "mix" } else { "perm" };
            out.push(CorpusMachine { name: format!("{kind}-{seed}"), machine: m, input: String::from(input) });
        }
        seed += 1;
    }
    out
}

/// The well-formed exact corpus: named reference machines plus generated
/// permutation and mixing machines.
pub fn valid_corpus() -> Vec<CorpusMachine> {
    let mut out = vec![
        CorpusMachine { name: "coin".into(), machine: coin_machine(), input: "0".into() },
        CorpusMachine { name: "flip-walker".into(), machine: flip_walker(), input: "0110".into() },
    ];
    out.extend(generated(12, false, 1_000));
    out.extend(generated(14, true, 2_000));
    out
}

/// Machines that break exactly one of the local conditions, each derived
/// from a well-formed machine by a single seeded edit.
pub fn violating_corpus() -> Vec<CorpusMachine> {
    let base = valid_corpus();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut out = vec![CorpusMachine { name: "coin-unnormalized".into(), machine: unnormalized_coin_machine(), input: "0".into() }];
    for (i, cm) in base.iter().enumerate().take(24) {
        let mut m = cm.machine.clone();
        let keys: Vec<_> = m.rules.keys().copied().collect();
        let edit = i % 3;
        let tag = match edit {
            0 => {
                // Drop a rule: its column becomes zero.
                let k = keys[rng.gen_range(0..keys.len())];
                m.rules.remove(&k);
                "c1"
            }
            1 => {
                // Point one key at another key's targets.
                let a = keys[rng.gen_range(0..keys.len())];
                let b = keys.iter().copied().find(|&k| k != a);
                match b {
                    Some(b) => {
                        let t = m.rules[&a].clone();
                        m.rules.insert(b, t);
                        "c2"
                    }
                    None => {
                        m.rules.get_mut(&a).unwrap()[0].amp = ex(ExactAmplitude::HALF);
                        "c1"
                    }
                }
            }
            _ => {
                // Enter a state from two directions: re-aim one target at a
                // state that other targets also enter.
                let entered = |q: StateId| m.rules.values().flatten().filter(|t| t.next == q).count();
                let shared: Vec<_> = keys.iter().copied().filter(|k| entered(m.rules[k][0].next) >= 2).collect();
                match shared.as_slice() {
                    [] => {
                        m.rules.remove(&keys[0]);
                        "c1"
                    }
                    ks => {
                        let k = ks[rng.gen_range(0..ks.len())];
                        let t = &mut m.rules.get_mut(&k).unwrap()[0];
                        t.mv = match t.mv {
                            Move::Left => Move::Stay,
                            Move::Stay => Move::Right,
                            Move::Right => Move::Left,
                        };
                        "c3"
                    }
                }
            }
        };
        out.push(CorpusMachine { name: format!("{}-{tag}", cm.name), machine: m, input: cm.input.clone() });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_sizes() {
        assert!(valid_corpus().len() >= 25);
        assert!(violating_corpus().len() >= 25);
    }

    #[test]
    fn corpus_is_deterministic() {
        let a: Vec<_> = valid_corpus().into_iter().map(|c| c.machine.to_spec()).collect();
        let b: Vec<_> = valid_corpus().into_iter().map(|c| c.machine.to_spec()).collect();
        assert_eq!(a, b);
    }
}
