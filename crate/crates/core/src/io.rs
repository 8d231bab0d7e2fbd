//! File formats: JSON documents and the compact `OSC1` binary dictionary.
//!
//! JSON documents carry a `header` (tool, version, creation time) and a
//! `payload`. Only the header varies between runs with the same config and
//! seed. Complex numbers are `[re, im]` pairs written with shortest
//! round-trip float formatting, so reading a file back is lossless.
//!
//! The binary layout is little-endian: the magic `OSC1`, `p` as `u32`, the
//! system kind code as `u32`, the signal count as `u64`, then for every
//! signal `p` interleaved `re, im` `f64` pairs.

use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::PrimeModulus;
use crate::signal::{DictionaryMetadata, Provenance, Signal, SignalDictionary, SystemKind};

pub const MAGIC: &[u8; 4] = b"OSC1";
pub const TOOL: &str = "osc";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Largest prime accepted when reading files.
pub const MAX_FILE_P: u64 = 1_000_003;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub tool: String,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub created: u64,
}

impl Header {
    pub fn now() -> Self {
        let created = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        Header { tool: TOOL.to_string(), version: VERSION.to_string(), created }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<T> {
    pub header: Header,
    pub payload: T,
}

impl<T> Document<T> {
    pub fn new(payload: T) -> Self {
        Document { header: Header::now(), payload }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalRecord {
    pub provenance: Provenance,
    pub coeffs: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DictionaryRecord {
    pub p: u64,
    pub kind: SystemKind,
    pub count: usize,
    pub metadata: DictionaryMetadata,
    pub signals: Vec<SignalRecord>,
}

impl DictionaryRecord {
    pub fn from_dictionary(dict: &SignalDictionary) -> Self {
        DictionaryRecord {
            p: dict.modulus.p(),
            kind: dict.kind,
            count: dict.len(),
            metadata: dict.metadata.clone(),
            signals: dict
                .iter()
                .map(|s| SignalRecord {
                    provenance: s.provenance().clone(),
                    coeffs: s.coeffs().iter().map(|c| [c.re, c.im]).collect(),
                })
                .collect(),
        }
    }

    pub fn into_dictionary(self) -> Result<SignalDictionary> {
        let m = PrimeModulus::with_max(self.p, MAX_FILE_P)?;
        if self.count != self.signals.len() {
            return Err(Error::InvalidConfig(format!(
                "count is {} but {} signals are present",
                self.count,
                self.signals.len()
            )));
        }
        let signals = self
            .signals
            .into_iter()
            .map(|r| {
                let coeffs = r.coeffs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect();
                Signal::new(coeffs, m, r.provenance)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut dict = SignalDictionary::new(m, self.kind, signals);
        dict.metadata = self.metadata;
        Ok(dict)
    }
}

/// On-disk dictionary format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Bin,
}

/// Byte offset of a serde_json error position within `text`.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let start: usize = text.split_inclusive('\n').take(line - 1).map(str::len).sum();
    (start + column.saturating_sub(1)).min(text.len())
}

pub fn parse_json<T: DeserializeOwned>(bytes: &[u8]) -> Result<T> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Parse {
        offset: e.valid_up_to(),
        message: "invalid UTF-8".into(),
    })?;
    serde_json::from_str(text).map_err(|e| Error::Parse {
        offset: if e.is_eof() { text.len() } else { byte_offset(text, e.line(), e.column()) },
        message: e.to_string(),
    })
}

pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("serializable");
    out.push(b'\n');
    out
}

pub fn write_dictionary_json<T: Serialize + Clone>(dict: &SignalDictionary, config: &T) -> Vec<u8> {
    #[derive(Serialize)]
    struct Payload<'a, C> {
        config: &'a C,
        dictionary: DictionaryRecord,
    }
    to_json(&Document::new(Payload { config, dictionary: DictionaryRecord::from_dictionary(dict) }))
}

#[derive(Debug, Deserialize)]
struct DictionaryPayload {
    dictionary: DictionaryRecord,
}

pub fn encode_binary(dict: &SignalDictionary) -> Vec<u8> {
    let p = dict.modulus.size();
    let mut out = Vec::with_capacity(20 + dict.len() * p * 16);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(dict.modulus.p() as u32).to_le_bytes());
    out.extend_from_slice(&dict.kind.code().to_le_bytes());
    out.extend_from_slice(&(dict.len() as u64).to_le_bytes());
    for s in dict.iter() {
        for c in s.coeffs() {
            out.extend_from_slice(&c.re.to_le_bytes());
            out.extend_from_slice(&c.im.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    offset: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.offset < n {
            return Err(Error::Parse {
                offset: self.bytes.len(),
                message: format!("truncated input while reading {what}"),
            });
        }
        let out = &self.bytes[self.offset..self.offset + n];
        self.offset += n;
        Ok(out)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().expect("8 bytes")))
    }
}

/// Decodes an `OSC1` file. Provenance is not stored in this format, so
/// signals come back as `External` entries numbered by position.
pub fn decode_binary(bytes: &[u8]) -> Result<SignalDictionary> {
    let mut r = Reader { bytes, offset: 0 };
    if r.take(4, "magic")? != MAGIC {
        return Err(Error::Parse { offset: 0, message: "bad magic, expected OSC1".into() });
    }
    let p_at = r.offset;
    let p = u64::from(r.u32("p")?);
    let m = PrimeModulus::with_max(p, MAX_FILE_P)
        .map_err(|e| Error::Parse { offset: p_at, message: e.to_string() })?;
    let kind_at = r.offset;
    let code = r.u32("kind")?;
    let kind = SystemKind::from_code(code)
        .ok_or_else(|| Error::Parse { offset: kind_at, message: format!("unknown system kind {code}") })?;
    let count = r.u64("count")?;
    let expected = (count as u128) * (m.size() as u128) * 16;
    let remaining = (bytes.len() - r.offset) as u128;
    if remaining < expected {
        return Err(Error::Parse {
            offset: bytes.len(),
            message: format!("truncated input: {count} signals need {expected} bytes, {remaining} present"),
        });
    }
    if remaining > expected {
        return Err(Error::Parse { offset: r.offset + expected as usize, message: "trailing bytes".into() });
    }
    let mut signals = Vec::with_capacity(count as usize);
    for index in 0..count as usize {
        let mut coeffs = Vec::with_capacity(m.size());
        for _ in 0..m.size() {
            let re = r.f64("sample")?;
            let im = r.f64("sample")?;
            coeffs.push(Complex64::new(re, im));
        }
        signals.push(Signal::new(coeffs, m, Provenance::External { index })?);
    }
    Ok(SignalDictionary::new(m, kind, signals))
}

/// Reads either format, detected by the magic bytes.
pub fn decode_dictionary(bytes: &[u8]) -> Result<SignalDictionary> {
    if bytes.starts_with(MAGIC) {
        decode_binary(bytes)
    } else {
        parse_json::<Document<DictionaryPayload>>(bytes)?.payload.dictionary.into_dictionary()
    }
}

pub fn read_dictionary(path: &Path) -> Result<SignalDictionary> {
    decode_dictionary(&std::fs::read(path)?)
}

/// Copies provenance and metadata from `reference` when every signal
/// matches it entry by entry within `tol`. Returns whether it did.
pub fn restore_provenance(dict: &mut SignalDictionary, reference: &SignalDictionary, tol: f64) -> bool {
    let matches = dict.modulus == reference.modulus
        && dict.kind == reference.kind
        && dict.len() == reference.len()
        && dict
            .iter()
            .zip(reference.iter())
            .all(|(a, b)| a.coeffs().iter().zip(b.coeffs()).all(|(x, y)| (x - y).norm() <= tol));
    if matches {
        for (a, b) in dict.signals.iter_mut().zip(reference.iter()) {
            *a = a.clone().with_provenance(b.provenance().clone());
        }
        dict.metadata = reference.metadata.clone();
    }
    matches
}

/// Writes atomically through a sibling temporary file.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// The payload of a JSON document re-serialized, for comparing runs while
/// ignoring the header.
pub fn payload_bytes(bytes: &[u8]) -> Result<Vec<u8>> {
    let doc: Document<serde_json::Value> = parse_json(bytes)?;
    Ok(serde_json::to_vec(&doc.payload).expect("value"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Tolerance;
    use crate::heisenberg::heisenberg_system;
    use crate::oscillator::{build_oscillator_system, OscillatorKind};
    use crate::tori::TorusCensus;
    use crate::weil::WeilRepresentation;

    fn oscillator(p: u64) -> SignalDictionary {
        let m = PrimeModulus::new(p).unwrap();
        let weil = WeilRepresentation::new(m);
        let census = TorusCensus::new(m).unwrap();
        build_oscillator_system(&weil, &census, OscillatorKind::Both, Tolerance::default()).unwrap()
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let dict = oscillator(5);
        let bytes = write_dictionary_json(&dict, &serde_json::json!({"p": 5}));
        let back = decode_dictionary(&bytes).unwrap();
        assert_eq!(back, dict);
    }

    #[test]
    fn binary_layout() {
        let m = PrimeModulus::new(5).unwrap();
        let dict = heisenberg_system(m, Tolerance::default()).unwrap();
        let bytes = encode_binary(&dict);
        assert_eq!(&bytes[..4], b"OSC1");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 5);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 0);
        assert_eq!(u64::from_le_bytes(bytes[12..20].try_into().unwrap()), 30);
        assert_eq!(bytes.len(), 20 + 30 * 5 * 16);
        let re = f64::from_le_bytes(bytes[20..28].try_into().unwrap());
        let im = f64::from_le_bytes(bytes[28..36].try_into().unwrap());
        assert_eq!(Complex64::new(re, im), dict.signals[0].coeffs()[0]);
        let mut back = decode_binary(&bytes).unwrap();
        assert!(back.iter().zip(dict.iter()).all(|(a, b)| a.coeffs() == b.coeffs()));
        assert!(restore_provenance(&mut back, &dict, 0.0));
        assert_eq!(back, dict);
    }

    #[test]
    fn truncated_binary_reports_offset() {
        let dict = oscillator(5);
        let bytes = encode_binary(&dict);
        let cut = &bytes[..bytes.len() - 3];
        match decode_binary(cut) {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, cut.len()),
            other => panic!("{other:?}"),
        }
        match decode_binary(&bytes[..10]) {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 10),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn truncated_json_reports_offset() {
        let dict = oscillator(5);
        let bytes = write_dictionary_json(&dict, &());
        let cut = &bytes[..1000];
        match decode_dictionary(cut) {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 1000),
            other => panic!("{other:?}"),
        }
        match parse_json::<serde_json::Value>(b"{\n  \"a\": 1,\n  \"b\": x\n}") {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 19),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_modulus_in_binary() {
        let mut bytes = MAGIC.to_vec();
        bytes.extend_from_slice(&9u32.to_le_bytes());
        match decode_binary(&bytes) {
            Err(Error::Parse { offset: 4, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn payload_ignores_header() {
        let dict = oscillator(5);
        let a = write_dictionary_json(&dict, &1);
        let mut doc: Document<serde_json::Value> = parse_json(&a).unwrap();
        doc.header.created += 1000;
        let b = to_json(&doc);
        assert_ne!(a, b);
        assert_eq!(payload_bytes(&a).unwrap(), payload_bytes(&b).unwrap());
    }

    #[test]
    fn atomic_write() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.json");
        write_file(&path, b"abc").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"abc");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
