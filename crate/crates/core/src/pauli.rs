//! Pauli strings, weighted Hamiltonians and the prime/minor term partition.
//!
//! A Hamiltonian is a real-weighted sum of Pauli strings,
//!
//!   H = Σ_k  c_k · P_k
//!
//! and every non-identity string is measured by its own observable circuit.
//! Site `i` of a string acts on qubit `i`; in bitstrings and amplitude
//! indices qubit `i` is bit `i`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from Pauli-string parsing, Hamiltonian ingestion and partitioning.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PauliError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: string has {found} sites, expected {expected}")]
    LengthMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("invalid Pauli symbol {0:?}")]
    InvalidSymbol(char),

    #[error("Pauli string must cover at least one qubit")]
    EmptyString,

    #[error("Hamiltonian has no terms")]
    NoTerms,

    #[error("coefficient {0} is not finite")]
    NonFiniteCoefficient(f64),

    #[error("prime threshold must lie in (0, 1], got {0}")]
    InvalidThreshold(f64),

    #[error("Hamiltonian has no non-identity term with nonzero weight")]
    Degenerate,

    #[error("sample has zero total count")]
    EmptySample,

    #[error("bitstring {bits:?} does not match a {qubits}-qubit observable")]
    BadBitstring { bits: String, qubits: usize },

    #[error("{qubits} qubits exceeds the dense capacity of {max}")]
    Capacity { qubits: usize, max: usize },
}

/// Single-site Pauli operator. Variant order matches the symbol order `I < X < Y < Z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

impl TryFrom<char> for Pauli {
    type Error = PauliError;

    fn try_from(c: char) -> Result<Self, Self::Error> {
        match c {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => Err(PauliError::InvalidSymbol(other)),
        }
    }
}

/// A tensor product of single-site Paulis, one per qubit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PauliString {
    ops: Vec<Pauli>,
}

impl PauliString {
    pub fn new(ops: Vec<Pauli>) -> Result<Self, PauliError> {
        if ops.is_empty() {
            return Err(PauliError::EmptyString);
        }
        Ok(Self { ops })
    }

    pub fn identity(qubits: usize) -> Result<Self, PauliError> {
        Self::new(vec![Pauli::I; qubits])
    }

    pub fn ops(&self) -> &[Pauli] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    /// Always false; a string covers at least one qubit.
    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.ops.iter().all(|&p| p == Pauli::I)
    }

    /// Bits set where the operator flips the computational basis (X or Y).
    pub fn x_mask(&self) -> u64 {
        self.mask(|p| matches!(p, Pauli::X | Pauli::Y))
    }

    /// Bits set where the operator carries a Z-type phase (Z or Y).
    pub fn z_mask(&self) -> u64 {
        self.mask(|p| matches!(p, Pauli::Z | Pauli::Y))
    }

    /// Bits set on every non-identity site; the parity support after basis rotation.
    pub fn support_mask(&self) -> u64 {
        self.mask(|p| p != Pauli::I)
    }

    pub fn y_count(&self) -> usize {
        self.ops.iter().filter(|&&p| p == Pauli::Y).count()
    }

    fn mask(&self, pred: impl Fn(Pauli) -> bool) -> u64 {
        assert!(self.ops.len() <= 64, "bit masks cover at most 64 qubits");
        self.ops
            .iter()
            .enumerate()
            .filter(|(_, &p)| pred(p))
            .fold(0u64, |m, (i, _)| m | (1 << i))
    }
}

impl FromStr for PauliString {
    type Err = PauliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let ops = s.chars().map(Pauli::try_from).collect::<Result<Vec<_>, _>>()?;
        Self::new(ops)
    }
}

impl TryFrom<String> for PauliString {
    type Error = PauliError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<PauliString> for String {
    fn from(p: PauliString) -> Self {
        p.to_string()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.ops {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

/// One weighted term `coefficient · string`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub string: PauliString,
    pub coefficient: f64,
}

impl PauliTerm {
    pub fn new(string: PauliString, coefficient: f64) -> Result<Self, PauliError> {
        if !coefficient.is_finite() {
            return Err(PauliError::NonFiniteCoefficient(coefficient));
        }
        Ok(Self {
            string,
            coefficient,
        })
    }
}

/// A weighted sum of distinct Pauli strings of common length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hamiltonian {
    terms: Vec<PauliTerm>,
    qubit_count: usize,
}

impl Hamiltonian {
    /// Builds a Hamiltonian, merging repeated strings by summing their coefficients.
    /// Terms keep the order of first appearance.
    pub fn from_terms(terms: Vec<PauliTerm>) -> Result<Self, PauliError> {
        let qubit_count = terms.first().ok_or(PauliError::NoTerms)?.string.len();
        let mut merged: Vec<PauliTerm> = Vec::with_capacity(terms.len());
        let mut position: BTreeMap<PauliString, usize> = BTreeMap::new();
        for (i, term) in terms.into_iter().enumerate() {
            if term.string.len() != qubit_count {
                return Err(PauliError::LengthMismatch {
                    line: i + 1,
                    expected: qubit_count,
                    found: term.string.len(),
                });
            }
            if !term.coefficient.is_finite() {
                return Err(PauliError::NonFiniteCoefficient(term.coefficient));
            }
            match position.get(&term.string) {
                Some(&at) => merged[at].coefficient += term.coefficient,
                None => {
                    position.insert(term.string.clone(), merged.len());
                    merged.push(term);
                }
            }
        }
        Ok(Self {
            terms: merged,
            qubit_count,
        })
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    /// Sum of identity-term coefficients; a classical constant added to every estimate.
    pub fn identity_offset(&self) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.string.is_identity())
            .map(|t| t.coefficient)
            .fold(0.0, |a, c| a + c)
    }

    /// Indices (into [`Hamiltonian::terms`]) of the terms that need an observable circuit.
    pub fn observable_indices(&self) -> Vec<usize> {
        self.terms
            .iter()
            .enumerate()
            .filter(|(_, t)| !t.string.is_identity())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn observable_count(&self) -> usize {
        self.terms.iter().filter(|t| !t.string.is_identity()).count()
    }

    /// Canonical text form; `parse_hamiltonian` of the result reproduces `self`.
    pub fn to_text(&self) -> String {
        self.terms
            .iter()
            .map(|t| format!("{} {:?}\n", t.string, t.coefficient))
            .collect()
    }
}

impl FromStr for Hamiltonian {
    type Err = PauliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_hamiltonian(s)
    }
}

/// Parses the plain-text Hamiltonian format: one `<PauliString> <coefficient>`
/// per line, `#` comments and blank lines ignored.
pub fn parse_hamiltonian(text: &str) -> Result<Hamiltonian, PauliError> {
    let mut terms = Vec::new();
    let mut qubits: Option<usize> = None;
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let (Some(string), Some(coeff), None) = (fields.next(), fields.next(), fields.next())
        else {
            return Err(PauliError::Parse {
                line: line_no,
                message: format!("expected `<pauli-string> <coefficient>`, got {line:?}"),
            });
        };
        let string: PauliString = string.parse().map_err(|e: PauliError| PauliError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let coefficient: f64 = coeff.parse().map_err(|_| PauliError::Parse {
            line: line_no,
            message: format!("invalid coefficient {coeff:?}"),
        })?;
        if !coefficient.is_finite() {
            return Err(PauliError::Parse {
                line: line_no,
                message: format!("coefficient {coeff:?} is not finite"),
            });
        }
        match qubits {
            None => qubits = Some(string.len()),
            Some(q) if q != string.len() => {
                return Err(PauliError::LengthMismatch {
                    line: line_no,
                    expected: q,
                    found: string.len(),
                })
            }
            Some(_) => {}
        }
        terms.push(PauliTerm {
            string,
            coefficient,
        });
    }
    Hamiltonian::from_terms(terms)
}

/// Observable circuits split by cumulative coefficient weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetPartition {
    pub prime: Vec<PauliTerm>,
    pub minor: Vec<PauliTerm>,
    /// Indices of `prime` members in the source Hamiltonian, same order.
    pub prime_indices: Vec<usize>,
    /// Indices of `minor` members in the source Hamiltonian, same order.
    pub minor_indices: Vec<usize>,
    pub identity_offset: f64,
    pub threshold: f64,
}

impl SubsetPartition {
    /// Fraction of the non-identity |coefficient| mass carried by the prime subset.
    pub fn prime_share(&self) -> f64 {
        let prime: f64 = self.prime.iter().map(|t| t.coefficient.abs()).sum();
        let minor: f64 = self.minor.iter().map(|t| t.coefficient.abs()).sum();
        prime / (prime + minor)
    }
}

/// Splits the non-identity terms into a prime subset and a minor subset.
///
/// Terms are ranked by descending |coefficient| (ties by string order); the
/// shortest ranked prefix whose |coefficient| sum reaches `th_p` of the total
/// becomes the prime subset. Identity terms are folded into `identity_offset`.
pub fn partition_prime_minor(h: &Hamiltonian, th_p: f64) -> Result<SubsetPartition, PauliError> {
    if !(th_p > 0.0 && th_p <= 1.0) {
        return Err(PauliError::InvalidThreshold(th_p));
    }
    let mut ranked: Vec<usize> = h.observable_indices();
    let terms = h.terms();
    ranked.sort_by(|&a, &b| {
        let (ta, tb) = (&terms[a], &terms[b]);
        tb.coefficient
            .abs()
            .partial_cmp(&ta.coefficient.abs())
            .unwrap_or(Ordering::Equal)
            .then_with(|| ta.string.cmp(&tb.string))
    });
    // Summing in ranked order makes the final prefix sum equal the total bit for bit.
    let total: f64 = ranked.iter().map(|&i| terms[i].coefficient.abs()).sum();
    if total <= 0.0 {
        return Err(PauliError::Degenerate);
    }
    let target = th_p * total;
    let mut acc = 0.0;
    let mut cut = ranked.len();
    for (n, &i) in ranked.iter().enumerate() {
        acc += terms[i].coefficient.abs();
        if acc >= target {
            cut = n + 1;
            break;
        }
    }
    let (prime_idx, minor_idx) = ranked.split_at(cut);
    Ok(SubsetPartition {
        prime: prime_idx.iter().map(|&i| terms[i].clone()).collect(),
        minor: minor_idx.iter().map(|&i| terms[i].clone()).collect(),
        prime_indices: prime_idx.to_vec(),
        minor_indices: minor_idx.to_vec(),
        identity_offset: h.identity_offset(),
        threshold: th_p,
    })
}

/// Z-basis outcome counts keyed by bitstring; character `i` is qubit `i`.
pub type Counts = BTreeMap<String, u64>;

/// Estimates ⟨P⟩ from post-rotation Z-basis counts: the mean parity over the
/// non-identity sites of `p`.
pub fn expectation_from_counts(counts: &Counts, p: &PauliString) -> Result<f64, PauliError> {
    let mut total: u64 = 0;
    let mut signed: i128 = 0;
    for (bits, &count) in counts {
        if bits.len() != p.len() {
            return Err(PauliError::BadBitstring {
                bits: bits.clone(),
                qubits: p.len(),
            });
        }
        let mut odd = false;
        for (c, &op) in bits.chars().zip(p.ops()) {
            let one = match c {
                '0' => false,
                '1' => true,
                _ => {
                    return Err(PauliError::BadBitstring {
                        bits: bits.clone(),
                        qubits: p.len(),
                    })
                }
            };
            if one && op != Pauli::I {
                odd = !odd;
            }
        }
        total += count;
        signed += if odd { -(count as i128) } else { count as i128 };
    }
    if total == 0 {
        return Err(PauliError::EmptySample);
    }
    Ok(signed as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eq11() -> Hamiltonian {
        parse_hamiltonian("XX 1.4\nZI 0.05\nZX 0.02").unwrap()
    }

    #[test]
    fn parses_the_toy_hamiltonian() {
        let h = eq11();
        assert_eq!(h.qubit_count(), 2);
        let coeffs: Vec<f64> = h.terms().iter().map(|t| t.coefficient).collect();
        assert_eq!(coeffs, vec![1.4, 0.05, 0.02]);
        assert_eq!(h.terms()[0].string.to_string(), "XX");
    }

    #[test]
    fn merges_duplicate_strings() {
        let h = parse_hamiltonian("ZZ 1.0\nZZ -1.0").unwrap();
        assert_eq!(h.terms().len(), 1);
        assert_eq!(h.terms()[0].coefficient, 0.0);
    }

    #[test]
    fn rejects_length_mismatch() {
        let err = parse_hamiltonian("XZ 0.3\nXYZ 0.1").unwrap_err();
        assert_eq!(
            err,
            PauliError::LengthMismatch {
                line: 2,
                expected: 2,
                found: 3
            }
        );
    }

    #[test]
    fn from_terms_rejects_non_finite() {
        let t = PauliTerm {
            string: "ZZ".parse().unwrap(),
            coefficient: f64::INFINITY,
        };
        assert!(matches!(
            Hamiltonian::from_terms(vec![t]),
            Err(PauliError::NonFiniteCoefficient(_))
        ));
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let err = parse_hamiltonian("# header\nXX 1.0\nXQ 2.0").unwrap_err();
        assert!(matches!(err, PauliError::Parse { line: 3, .. }), "{err}");
        let err = parse_hamiltonian("XX abc").unwrap_err();
        assert!(matches!(err, PauliError::Parse { line: 1, .. }));
        let err = parse_hamiltonian("XX 1.0 2.0").unwrap_err();
        assert!(matches!(err, PauliError::Parse { line: 1, .. }));
        let err = parse_hamiltonian("XX inf").unwrap_err();
        assert!(matches!(err, PauliError::Parse { line: 1, .. }));
        assert_eq!(parse_hamiltonian("# nothing\n\n").unwrap_err(), PauliError::NoTerms);
    }

    #[test]
    fn accepts_scientific_notation_and_comments() {
        let h = parse_hamiltonian("# c\n  II -1.5e0 \n\nZI 2.5E-2\n").unwrap();
        assert_eq!(h.identity_offset(), -1.5);
        assert_eq!(h.terms()[1].coefficient, 0.025);
        assert_eq!(h.observable_count(), 1);
    }

    #[test]
    fn text_form_round_trips() {
        let h = parse_hamiltonian("II -0.3\nXY 0.1\nZZ 1e-3").unwrap();
        assert_eq!(parse_hamiltonian(&h.to_text()).unwrap(), h);
    }

    #[test]
    fn toy_partition_has_a_single_prime_term() {
        let part = partition_prime_minor(&eq11(), 0.80).unwrap();
        let prime: Vec<String> = part.prime.iter().map(|t| t.string.to_string()).collect();
        let minor: Vec<String> = part.minor.iter().map(|t| t.string.to_string()).collect();
        assert_eq!(prime, vec!["XX"]);
        assert_eq!(minor, vec!["ZI", "ZX"]);
        assert!((part.prime_share() - 1.4 / 1.47).abs() < 1e-15);
        assert!(part.prime_share() > 0.95);
    }

    #[test]
    fn single_term_is_always_prime() {
        let h = parse_hamiltonian("ZZ 1.0").unwrap();
        for th in [0.01, 0.5, 1.0] {
            let part = partition_prime_minor(&h, th).unwrap();
            assert_eq!(part.prime.len(), 1);
            assert!(part.minor.is_empty());
        }
    }

    #[test]
    fn identity_is_excluded_from_partition() {
        let h = parse_hamiltonian("II -0.7\nZI 0.4\nIZ 0.3").unwrap();
        let part = partition_prime_minor(&h, 1.0).unwrap();
        assert_eq!(part.identity_offset, -0.7);
        assert_eq!(part.prime.len() + part.minor.len(), 2);
        assert_eq!(part.prime_indices, vec![1, 2]);
    }

    #[test]
    fn ties_break_by_string_order() {
        let h = parse_hamiltonian("ZI 0.5\nXI -0.5\nIZ 0.5").unwrap();
        let part = partition_prime_minor(&h, 0.5).unwrap();
        let order: Vec<String> = part
            .prime
            .iter()
            .chain(&part.minor)
            .map(|t| t.string.to_string())
            .collect();
        assert_eq!(order, vec!["IZ", "XI", "ZI"]);
        assert_eq!(part.prime.len(), 2);
    }

    #[test]
    fn degenerate_and_invalid_thresholds() {
        let h = parse_hamiltonian("II 1.0").unwrap();
        assert_eq!(partition_prime_minor(&h, 0.8).unwrap_err(), PauliError::Degenerate);
        let h = parse_hamiltonian("ZZ 1.0\nZZ -1.0").unwrap();
        assert_eq!(partition_prime_minor(&h, 0.8).unwrap_err(), PauliError::Degenerate);
        for bad in [0.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(
                partition_prime_minor(&eq11(), bad),
                Err(PauliError::InvalidThreshold(_))
            ));
        }
    }

    #[test]
    fn counts_expectations() {
        let zz: PauliString = "ZZ".parse().unwrap();
        let zi: PauliString = "ZI".parse().unwrap();
        let c = Counts::from([("00".to_string(), 100)]);
        assert_eq!(expectation_from_counts(&c, &zz).unwrap(), 1.0);
        let c = Counts::from([("01".to_string(), 50), ("10".to_string(), 50)]);
        assert_eq!(expectation_from_counts(&c, &zz).unwrap(), -1.0);
        let c = Counts::from([("00".to_string(), 75), ("11".to_string(), 25)]);
        assert_eq!(expectation_from_counts(&c, &zi).unwrap(), 0.5);
    }

    #[test]
    fn counts_error_paths() {
        let zz: PauliString = "ZZ".parse().unwrap();
        assert_eq!(
            expectation_from_counts(&Counts::new(), &zz).unwrap_err(),
            PauliError::EmptySample
        );
        let c = Counts::from([("00".to_string(), 0)]);
        assert_eq!(expectation_from_counts(&c, &zz).unwrap_err(), PauliError::EmptySample);
        let c = Counts::from([("0".to_string(), 3)]);
        assert!(matches!(
            expectation_from_counts(&c, &zz),
            Err(PauliError::BadBitstring { .. })
        ));
        let c = Counts::from([("0a".to_string(), 3)]);
        assert!(expectation_from_counts(&c, &zz).is_err());
    }

    #[test]
    fn masks_follow_site_order() {
        let p: PauliString = "XYZI".parse().unwrap();
        assert_eq!(p.x_mask(), 0b0011);
        assert_eq!(p.z_mask(), 0b0110);
        assert_eq!(p.support_mask(), 0b0111);
        assert_eq!(p.y_count(), 1);
        assert!(!p.is_identity());
        assert!(PauliString::identity(3).unwrap().is_identity());
        assert_eq!("".parse::<PauliString>().unwrap_err(), PauliError::EmptyString);
    }
}
