//! Worked examples, each checked against an oracle written here from first
//! principles rather than through the library.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use serde_json::Value;

use qtmlab_core::encoding::{pair, unpair};
use qtmlab_core::gates::{apply_circuit, basis_state, check_povm_bound, measure_probability, Circuit, CircuitSpec, PovmElement};
use qtmlab_core::machine::{Machine, MachineSpec};
use qtmlab_core::ptm::{ptm_accepts, ptm_exact_distribution, PtmDescription};
use qtmlab_core::qtm::corpus::{coin_machine, valid_corpus};
use qtmlab_core::qtm::{halt_probability, output_distribution, step, Configuration, SparseState};
use qtmlab_core::scalar::{operator_norm, tvd, DenseMatrix, ExactAmplitude as Z, OutputDistribution, C64};
use qtmlab_core::sk::{sk_compile, BasisNet, CompileOptions, GateSet};
use qtmlab_core::suhd::{approx_simulate, branch_resets, VerdictStatus};

const GUARD: usize = 1_000_000;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

// --- exact ring -----------------------------------------------------------

/// (re, im) with each part `p + q sqrt2` over the rationals.
type Sym = [BigRational; 4];

fn sym(z: &Z) -> Sym {
    let (a, b, c, d, k) = z.parts();
    let den = BigRational::from_integer(num_bigint::BigInt::from(1) << k);
    [a, b, c, d].map(|x| BigRational::from_integer(x.into()) / &den)
}

fn sym_mul(x: &Sym, y: &Sym) -> Sym {
    // (p + q r)(s + t r) with r^2 = 2.
    let m = |p: &BigRational, q: &BigRational, s: &BigRational, t: &BigRational| (p * s + rat(2, 1) * q * t, p * t + q * s);
    let (rr0, rr1) = m(&x[0], &x[1], &y[0], &y[1]);
    let (ii0, ii1) = m(&x[2], &x[3], &y[2], &y[3]);
    let (ri0, ri1) = m(&x[0], &x[1], &y[2], &y[3]);
    let (ir0, ir1) = m(&x[2], &x[3], &y[0], &y[1]);
    [rr0 - ii0, rr1 - ii1, ri0 + ir0, ri1 + ir1]
}

#[test]
fn ring_product_matches_symbolic_oracle() {
    let x = Z::new(1, 0, 1, 0, 0);
    let y = Z::new(1, 0, -1, 0, 0);
    let p = x.try_mul(&y).unwrap();
    assert_eq!(p, Z::from_int(2));
    assert_eq!(sym(&p), sym_mul(&sym(&x), &sym(&y)));
    for (a, b) in [(Z::OMEGA, Z::INV_SQRT2), (Z::new(3, -1, 2, 5, 2), Z::new(-1, 4, 0, 1, 3))] {
        assert_eq!(sym(&a.try_mul(&b).unwrap()), sym_mul(&sym(&a), &sym(&b)));
    }
}

// --- norms and distances --------------------------------------------------

/// Largest singular value of a 2x2 matrix from the characteristic
/// polynomial of its Gram matrix.
fn norm2x2(m: [C64; 4]) -> f64 {
    let g00 = m[0].norm_sqr() + m[2].norm_sqr();
    let g11 = m[1].norm_sqr() + m[3].norm_sqr();
    let g01 = m[0].conj() * m[1] + m[2].conj() * m[3];
    let (tr, det) = (g00 + g11, g00 * g11 - g01.norm_sqr());
    ((tr + (tr * tr - 4.0 * det).max(0.0).sqrt()) / 2.0).sqrt()
}

fn mat(e: [C64; 4]) -> DenseMatrix {
    DenseMatrix::from_rows(2, e.to_vec()).unwrap()
}

#[test]
fn operator_norm_examples() {
    let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let i_minus_x = [o, -o, -o, o];
    assert!((operator_norm(&mat(i_minus_x)).unwrap() - 2.0).abs() < 1e-10);
    assert!((norm2x2(i_minus_x) - 2.0).abs() < 1e-12);
    let i_minus_h = [o - r, C64::new(-r, 0.0), C64::new(-r, 0.0), o + r];
    assert!((operator_norm(&mat(i_minus_h)).unwrap() - norm2x2(i_minus_h)).abs() < 1e-10);
    let w = [C64::new(0.3, 0.1), C64::new(-1.2, 0.4), z, C64::new(0.0, 2.0)];
    assert!((operator_norm(&mat(w)).unwrap() - norm2x2(w)).abs() < 1e-10);
}

#[test]
fn tvd_example() {
    let p = OutputDistribution::from_pairs([("0", rat(3, 4)), ("1", rat(1, 4))]).unwrap();
    let q = OutputDistribution::from_pairs([("0", rat(1, 2)), ("1", rat(1, 2))]).unwrap();
    let direct = (rat(3, 4) - rat(1, 2)) / rat(2, 1) + (rat(1, 2) - rat(1, 4)) / rat(2, 1);
    assert_eq!(tvd(&p, &q).unwrap(), direct);
    assert_eq!(direct, rat(1, 4));
}

// --- pairing --------------------------------------------------------------

#[test]
fn pairing_follows_diagonal_enumeration() {
    // Walk the diagonals n + m = s in order of increasing m.
    let mut order = BTreeMap::new();
    let mut z = 0u64;
    for s in 0..30u64 {
        for m in 0..=s {
            order.insert((s - m, m), z);
            z += 1;
        }
    }
    let big = |x: u64| BigUint::from(x);
    assert_eq!(pair(&big(1), &big(0)), big(1));
    assert_eq!(pair(&big(2), &big(3)), big(18));
    assert_eq!(unpair(&big(2)), (big(0), big(1)));
    assert_eq!(unpair(&big(18)), (big(2), big(3)));
    for (&(n, m), &z) in &order {
        assert_eq!(pair(&big(n), &big(m)), big(z), "({n}, {m})");
        assert_eq!(unpair(&big(z)), (big(n), big(m)));
    }
}

// --- PTMs -----------------------------------------------------------------

/// Exhaustive branch-tree enumeration straight from the JSON description.
fn enumerate(spec: &Value, budget: usize) -> BTreeMap<String, BigRational> {
    fn go(
        spec: &Value,
        state: &str,
        tape: &mut BTreeMap<i64, char>,
        head: i64,
        p: BigRational,
        fuel: usize,
        out: &mut BTreeMap<String, BigRational>,
    ) {
        let read = tape.get(&head).copied().unwrap_or('_');
        let rule = spec["rules"].as_array().unwrap().iter().find(|r| r["state"] == state && r["read"] == read.to_string().as_str());
        if state == spec["halt"] || rule.is_none() {
            let lo = tape.iter().filter(|(_, c)| **c != '_').map(|(k, _)| *k).min();
            let hi = tape.iter().filter(|(_, c)| **c != '_').map(|(k, _)| *k).max();
            let s: String = match (lo, hi) {
                (Some(lo), Some(hi)) => (lo..=hi).map(|k| tape.get(&k).copied().unwrap_or('_')).collect(),
                _ => String::new(),
            };
            *out.entry(s).or_insert_with(|| rat(0, 1)) += p;
            return;
        }
        assert!(fuel > 0, "oracle ran out of fuel");
        for b in rule.unwrap()["branches"].as_array().unwrap() {
            let pr = b["p"].as_array().unwrap();
            let q = rat(pr[0].as_i64().unwrap(), pr[1].as_i64().unwrap());
            let mut t = tape.clone();
            t.insert(head, b["write"].as_str().unwrap().chars().next().unwrap());
            go(spec, b["next"].as_str().unwrap(), &mut t, head + b["move"].as_i64().unwrap(), &p * q, fuel - 1, out);
        }
    }
    let mut out = BTreeMap::new();
    go(spec, spec["initial"].as_str().unwrap(), &mut BTreeMap::new(), 0, rat(1, 1), budget, &mut out);
    out
}

const TWO_COINS: &str = r#"{"kind":"ptm","states":["q0","q1","qh"],"initial":"q0","halt":"qh","rules":[
  {"state":"q0","read":"_","branches":[{"p":[1,2],"write":"0","move":1,"next":"q1"},{"p":[1,2],"write":"1","move":1,"next":"q1"}]},
  {"state":"q1","read":"_","branches":[{"p":[1,2],"write":"0","move":0,"next":"qh"},{"p":[1,2],"write":"1","move":0,"next":"qh"}]}]}"#;

const FAIR_COIN: &str = r#"{"kind":"ptm","states":["q0","qh"],"initial":"q0","halt":"qh","rules":[
  {"state":"q0","read":"_","branches":[{"p":[1,2],"write":"0","move":0,"next":"qh"},{"p":[1,2],"write":"1","move":0,"next":"qh"}]}]}"#;

const SEVEN_EIGHTHS: &str = r#"{"kind":"ptm","states":["q0","q1","q2","qh"],"initial":"q0","halt":"qh","rules":[
  {"state":"q0","read":"_","branches":[{"p":[1,2],"write":"1","move":0,"next":"qh"},{"p":[1,2],"write":"_","move":0,"next":"q1"}]},
  {"state":"q1","read":"_","branches":[{"p":[1,2],"write":"1","move":0,"next":"qh"},{"p":[1,2],"write":"_","move":0,"next":"q2"}]},
  {"state":"q2","read":"_","branches":[{"p":[1,2],"write":"1","move":0,"next":"qh"},{"p":[1,2],"write":"0","move":0,"next":"qh"}]}]}"#;

fn ptm(json: &str) -> PtmDescription {
    match Machine::from_spec(&MachineSpec::from_json(json).unwrap()).unwrap() {
        Machine::Ptm(p) => p,
        other => panic!("expected a ptm, got {}", other.kind()),
    }
}

#[test]
fn ptm_distributions_match_branch_tree() {
    for json in [TWO_COINS, FAIR_COIN, SEVEN_EIGHTHS] {
        let oracle = enumerate(&serde_json::from_str(json).unwrap(), 50);
        let d = ptm_exact_distribution(&ptm(json), "", 50, GUARD).unwrap().as_complete().unwrap();
        let got: BTreeMap<String, BigRational> = d.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        assert_eq!(got, oracle);
    }
    let two = enumerate(&serde_json::from_str(TWO_COINS).unwrap(), 50);
    assert_eq!(two.len(), 4);
    assert!(two.values().all(|p| *p == rat(1, 4)));
}

#[test]
fn acceptance_threshold() {
    assert!(!ptm_accepts(&ptm(FAIR_COIN), "", "0", 50, GUARD).unwrap());
    assert!(ptm_accepts(&ptm(SEVEN_EIGHTHS), "", "1", 50, GUARD).unwrap());
    assert_eq!(enumerate(&serde_json::from_str(SEVEN_EIGHTHS).unwrap(), 50)["1"], rat(7, 8));
}

// --- QTMs -----------------------------------------------------------------

#[test]
fn coin_step_and_halting() {
    let m = coin_machine();
    let psi = SparseState::<Z>::superposed_inputs(&m, &["0"]).unwrap();
    let after = step(&m, &psi).unwrap();
    assert_eq!(after.len(), 2);
    for (c, a) in after.iter() {
        assert!(c.h);
        assert_eq!(*a, Z::INV_SQRT2);
    }
    assert_eq!(halt_probability(&after).unwrap(), Z::ONE);
    let want = OutputDistribution::from_pairs([("0", Z::HALF), ("1", Z::HALF)]).unwrap();
    for (t, schedule) in [(1, vec![]), (1, vec![1]), (3, vec![]), (3, vec![1, 2, 3]), (3, vec![2])] {
        let d = output_distribution(&m, &psi, t, &schedule, GUARD).unwrap();
        assert_eq!(d.as_complete().unwrap(), want, "T = {t}, schedule {schedule:?}");
    }
}

#[test]
fn half_halted_state() {
    let m = coin_machine();
    let mut halted = Configuration::input(&m, "1").unwrap();
    halted.h = true;
    halted.q = m.halt;
    let running = Configuration::input(&m, "0").unwrap();
    let psi = SparseState::from_pairs([(halted, Z::INV_SQRT2), (running, -Z::INV_SQRT2)]).unwrap();
    assert_eq!(halt_probability(&psi).unwrap(), Z::HALF);
}

// --- gates and POVMs --------------------------------------------------------

fn circuit(json: &str) -> Circuit {
    Circuit::from_spec(&serde_json::from_str::<CircuitSpec>(json).unwrap()).unwrap()
}

#[test]
fn circuit_examples() {
    let cnot = circuit(r#"{"width":2,"ops":[{"gate":"CNOT","targets":[0,1]}]}"#);
    let out = apply_circuit(&cnot, &basis_state(2, 0b10)).unwrap();
    assert!((out[0b11] - C64::new(1.0, 0.0)).norm() < 1e-12);
    let hh = circuit(r#"{"width":1,"ops":[{"gate":"H","targets":[0]},{"gate":"H","targets":[0]}]}"#);
    let out = apply_circuit(&hh, &basis_state(1, 0)).unwrap();
    assert!((out[0] - C64::new(1.0, 0.0)).norm() < 1e-12 && out[1].norm() < 1e-12);
}

#[test]
fn povm_examples() {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let h = mat([C64::new(r, 0.0), C64::new(r, 0.0), C64::new(r, 0.0), C64::new(-r, 0.0)]);
    let zero = PovmElement::projector(2, 0);
    let phi = basis_state(1, 0);
    // <+|0><0|+> = 1/2.
    assert!((measure_probability(&h, &phi, &zero).unwrap() - 0.5).abs() < 1e-12);
    let x = mat([C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    let b = check_povm_bound(&DenseMatrix::identity(2), &x, &phi, &zero).unwrap();
    assert!((b.lhs - 1.0).abs() < 1e-12 && (b.rhs - 4.0).abs() < 1e-10 && b.holds);
}

// --- Solovay-Kitaev -------------------------------------------------------

fn textbook(name: &str) -> [C64; 4] {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    let w = C64::new(r, r);
    match name {
        "H" | "Hdg" => [C64::new(r, 0.0), C64::new(r, 0.0), C64::new(r, 0.0), C64::new(-r, 0.0)],
        "S" => [o, z, z, C64::new(0.0, 1.0)],
        "Sdg" => [o, z, z, C64::new(0.0, -1.0)],
        "T" => [o, z, z, w],
        "Tdg" => [o, z, z, w.conj()],
        other => panic!("unexpected gate {other}"),
    }
}

fn mul2(a: [C64; 4], b: [C64; 4]) -> [C64; 4] {
    [a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]]
}

/// min over global phases of ||u - e^{i t} w||, from the eigenphases of u^dag w.
fn phase_distance(u: [C64; 4], w: [C64; 4]) -> f64 {
    let ud = [u[0].conj(), u[2].conj(), u[1].conj(), u[3].conj()];
    let a = mul2(ud, w);
    let (tr, det) = (a[0] + a[3], a[0] * a[3] - a[1] * a[2]);
    let disc = (tr * tr - det * 4.0).sqrt();
    let (l1, l2) = ((tr + disc) / 2.0, (tr - disc) / 2.0);
    let spread = (l1 / l2).arg().abs();
    2.0 * (spread / 4.0).sin()
}

#[test]
fn sk_rotation_example() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let net = BasisNet::build(GateSet::clifford_t(), 12, 200, GUARD, &mut rng).unwrap();
    let half = 0.05f64;
    let rz = [C64::from_polar(1.0, -half), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::from_polar(1.0, half)];
    let (_, r) = sk_compile(&net, &mat(rz), &CompileOptions { epsilon: 1e-2, max_depth: 3, target_precision: None }).unwrap();
    assert!(r.recomputed_distance <= 1e-2);
    assert!(r.distance_by_depth.last().unwrap() < &r.distance_by_depth[0] || r.depth == 0);
    // Apply the gates as a circuit would: first gate first.
    let product = r
        .gates
        .iter()
        .fold([C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)], |acc, g| mul2(textbook(g), acc));
    let d = phase_distance(rz, product);
    assert!(d <= 1e-2, "independent distance {d}");
    assert!(d <= r.recomputed_distance + 1e-9);
}

// --- simulation contract and resets ---------------------------------------

#[test]
fn coin_simulation_contract() {
    let m = coin_machine();
    let v = approx_simulate(&m, &["0"], 3, 1e-6, GUARD).unwrap();
    assert_eq!(v.status, VerdictStatus::Pass);
    assert!(v.tvd.unwrap() <= 1e-12);
    let both = approx_simulate(&m, &["0", "1"], 3, 1e-6, GUARD).unwrap();
    assert_eq!(both.status, VerdictStatus::Pass);
    assert_eq!(both.effective_epsilon, 0.5e-6);
}

#[test]
fn reset_fidelities() {
    let m = coin_machine();
    let coin = branch_resets(&m, &SparseState::<Z>::superposed_inputs(&m, &["0"]).unwrap(), 1, GUARD).unwrap();
    // Measuring branch b (probability p_b) and inverting gives fidelity p_b.
    let expected: f64 = coin.iter().map(|b| b.probability * b.probability).sum();
    assert!((expected - 0.5).abs() < 1e-12);
    assert!(coin.iter().all(|b| (b.fidelity - b.probability).abs() < 1e-12));
    let perm = valid_corpus().into_iter().find(|c| c.name.starts_with("perm")).unwrap();
    let psi = SparseState::<Z>::superposed_inputs(&perm.machine, &[perm.input.as_str()]).unwrap();
    let det = branch_resets(&perm.machine, &psi, 3, GUARD).unwrap();
    assert_eq!(det.len(), 1);
    assert_eq!(det[0].fidelity, 1.0);
}
