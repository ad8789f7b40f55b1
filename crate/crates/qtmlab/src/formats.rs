//! On-disk formats: matrix JSON, corpus entries, universality test lists,
//! the binary basis-net file, and the JSON shapes of exact probabilities.

use std::io::{Read, Write};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use qtmlab_core::machine::MachineSpec;
use qtmlab_core::scalar::{DenseMatrix, ExactAmplitude, Mass, OutputDistribution, C64};
use qtmlab_core::sk::{BasisNet, GateSet, Su2};
use qtmlab_core::{Error, Result};

fn invalid(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixMode {
    Exact,
    Float,
}

/// `{"dim": n, "mode": "exact"|"float", "entries": [...]}`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub dim: usize,
    pub mode: MatrixMode,
    pub entries: Vec<Vec<Value>>,
}

impl MatrixFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| invalid(format!("matrix JSON: {e}")))
    }

    pub fn from_exact(dim: usize, entries: &[ExactAmplitude]) -> Self {
        let entries =
            entries.iter().map(|e| serde_json::to_value(e).expect("ring element").as_array().cloned().unwrap_or_default()).collect();
        Self { dim, mode: MatrixMode::Exact, entries }
    }

    pub fn from_matrix(m: &DenseMatrix) -> Self {
        Self { dim: m.dim(), mode: MatrixMode::Float, entries: m.entries().iter().map(|z| vec![json!(z.re), json!(z.im)]).collect() }
    }

    /// Exact entries, when the file is in exact mode.
    pub fn exact_entries(&self) -> Result<Option<Vec<ExactAmplitude>>> {
        if self.mode != MatrixMode::Exact {
            return Ok(None);
        }
        self.check_len()?;
        self.entries
            .iter()
            .map(|e| {
                serde_json::from_value::<ExactAmplitude>(Value::Array(e.clone()))
                    .map_err(|err| invalid(format!("exact entry {e:?}: {err}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    fn check_len(&self) -> Result<()> {
        if self.dim == 0 || self.entries.len() != self.dim * self.dim {
            return Err(invalid(format!("matrix of dim {} needs {} entries, found {}", self.dim, self.dim * self.dim, self.entries.len())));
        }
        Ok(())
    }

    pub fn to_matrix(&self) -> Result<DenseMatrix> {
        self.check_len()?;
        let entries = match self.exact_entries()? {
            Some(ex) => ex.iter().map(|e| e.to_c64()).collect(),
            None => self
                .entries
                .iter()
                .map(|e| match e.as_slice() {
                    [re, im] => match (re.as_f64(), im.as_f64()) {
                        (Some(re), Some(im)) => Ok(C64::new(re, im)),
                        _ => Err(invalid("float entries are [re, im] number pairs")),
                    },
                    _ => Err(invalid("float entries are [re, im] number pairs")),
                })
                .collect::<Result<Vec<_>>>()?,
        };
        DenseMatrix::from_rows(self.dim, entries)
    }
}

/// A machine together with the input it is exercised on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusEntry {
    pub name: String,
    pub input: String,
    /// Observation step used by reset experiments; defaults to 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    pub machine: MachineSpec,
}

/// One universality test case: a target machine (inline or by code) and an
/// input bit string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeCase {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub machine: Option<MachineSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code: Option<String>,
    pub input: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeCases {
    pub cases: Vec<ProbeCase>,
}

/// `[numerator, denominator]`; components that overflow 64 bits are
/// written as decimal strings.
pub fn rational_json(p: &BigRational) -> Value {
    let part = |n: &BigInt| n.to_i64().map(Value::from).unwrap_or_else(|| Value::String(n.to_string()));
    json!([part(p.numer()), part(p.denom())])
}

/// An exact probability `(a + b sqrt2) / 2^k`: `[num, den]` when rational,
/// otherwise `{"sqrt2": [a, b, 2^k]}`.
pub fn ring_prob_json(p: &ExactAmplitude) -> Value {
    let (a, b, _, _, k) = p.parts();
    let den = BigInt::from(1u8) << k;
    if b == 0 {
        rational_json(&BigRational::new(BigInt::from(a), den))
    } else {
        let den = den.to_i64().map(Value::from).unwrap_or_else(|| Value::String(den.to_string()));
        json!({ "sqrt2": [a.to_string(), b.to_string(), den] })
    }
}

pub fn distribution_json<P: Mass>(d: &OutputDistribution<P>, f: impl Fn(&P) -> Value) -> Value {
    Value::Object(d.iter().map(|(k, p)| (k.clone(), f(p))).collect())
}

pub fn float_distribution_json(d: &OutputDistribution<f64>) -> Value {
    distribution_json(d, |p| json!(p))
}

const NET_MAGIC: &[u8; 8] = b"QTMLNET\0";
const NET_VERSION: u16 = 1;
/// Stored products must agree with the recomputed ones this closely.
const NET_PRODUCT_TOL: f64 = 1e-10;

/// Writes the net: magic, version, gate-set name, `l0`, `eps0`, then every
/// word with its product quaternion. Little-endian throughout.
pub fn write_net(net: &BasisNet, mut w: impl Write) -> std::io::Result<()> {
    w.write_all(NET_MAGIC)?;
    w.write_all(&NET_VERSION.to_le_bytes())?;
    let name = net.set.name.as_bytes();
    w.write_all(&(name.len() as u16).to_le_bytes())?;
    w.write_all(name)?;
    w.write_all(&(net.l0 as u16).to_le_bytes())?;
    w.write_all(&net.eps0.to_le_bytes())?;
    w.write_all(&(net.words.len() as u32).to_le_bytes())?;
    for (word, q) in net.words.iter().zip(&net.products) {
        w.write_all(&[word.len() as u8])?;
        w.write_all(word)?;
        for v in q.as_array() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() < n {
            return Err(invalid("net file is truncated"));
        }
        let (head, tail) = self.bytes.split_at(n);
        self.bytes = tail;
        Ok(head)
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("two bytes")))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("four bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("eight bytes")))
    }
}

/// Reads a net and checks every stored product against its word.
pub fn read_net(mut r: impl Read) -> Result<BasisNet> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes).map_err(|e| invalid(format!("reading net: {e}")))?;
    let mut c = Cursor { bytes: &bytes };
    if c.take(8)? != NET_MAGIC {
        return Err(invalid("not a basis-net file"));
    }
    let version = c.u16()?;
    if version != NET_VERSION {
        return Err(invalid(format!("unsupported net file version {version}")));
    }
    let name_len = c.u16()? as usize;
    let name = std::str::from_utf8(c.take(name_len)?).map_err(|_| invalid("gate-set name is not UTF-8"))?;
    let set = GateSet::by_name(name)?;
    let l0 = c.u16()? as usize;
    let eps0 = c.f64()?;
    let count = c.u32()? as usize;
    let mut words = Vec::with_capacity(count);
    let mut stored = Vec::with_capacity(count);
    for _ in 0..count {
        let len = c.take(1)?[0] as usize;
        words.push(c.take(len)?.to_vec());
        let q = [c.f64()?, c.f64()?, c.f64()?, c.f64()?];
        stored.push(Su2::new(q[0], q[1], q[2], q[3]));
    }
    if !c.bytes.is_empty() {
        return Err(invalid("trailing bytes after the net entries"));
    }
    let net = BasisNet::from_words(set, l0, eps0, words)?;
    for (i, (a, b)) in net.products.iter().zip(&stored).enumerate() {
        let d = a.as_array().iter().zip(b.as_array()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        if d > NET_PRODUCT_TOL {
            return Err(invalid(format!("net entry {i}: stored product differs from its word by {d:e}")));
        }
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_matrix_round_trip() {
        let h = qtmlab_core::gates::standard_gate("H").unwrap();
        let file = MatrixFile::from_exact(2, h.exact.as_ref().unwrap());
        let back = MatrixFile::parse(&serde_json::to_string(&file).unwrap()).unwrap();
        assert_eq!(back.exact_entries().unwrap().unwrap(), h.exact.unwrap());
        assert!(back.to_matrix().unwrap().max_abs_diff(&h.matrix) < 1e-15);
    }

    #[test]
    fn float_matrix_rejects_bad_shapes() {
        assert!(MatrixFile::parse(r#"{"dim":2,"mode":"float","entries":[[1,0],[0,0],[0,0]]}"#).unwrap().to_matrix().is_err());
        assert!(MatrixFile::parse(r#"{"dim":1,"mode":"float","entries":[[1]]}"#).unwrap().to_matrix().is_err());
        assert!(MatrixFile::parse(r#"{"dim":1,"mode":"complex","entries":[]}"#).is_err());
    }

    #[test]
    fn probabilities_render_as_fractions() {
        assert_eq!(rational_json(&BigRational::new(3.into(), 4.into())), json!([3, 4]));
        assert_eq!(ring_prob_json(&ExactAmplitude::HALF), json!([1, 2]));
        assert_eq!(ring_prob_json(&ExactAmplitude::INV_SQRT2), json!({"sqrt2": ["0", "1", 2]}));
    }

    #[test]
    fn net_round_trip_and_tamper_detection() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = BasisNet::build(GateSet::clifford_t(), 3, 10, 1_000_000, &mut rng).unwrap();
        let mut buf = Vec::new();
        write_net(&net, &mut buf).unwrap();
        let back = read_net(buf.as_slice()).unwrap();
        assert_eq!(back.words, net.words);
        assert_eq!(back.eps0, net.eps0);
        // Flip a byte inside the last stored product.
        let n = buf.len();
        buf[n - 3] ^= 0x40;
        assert!(read_net(buf.as_slice()).is_err());
        assert!(read_net(&b"nonsense"[..]).is_err());
    }
}
