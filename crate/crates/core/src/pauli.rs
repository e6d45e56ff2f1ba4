//! Pauli strings, weighted Pauli sums and the Hermitian / anti-Hermitian split.
//!
//! Strings are written most-significant qubit first: the string `"IX"` is
//! `I ⊗ X`, acting with `X` on qubit 1 (bit 0 of the basis index) and with `I`
//! on qubit 2.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::DenseMatrix;

/// Relative threshold below which decomposition coefficients are dropped.
pub const PRUNE_RELATIVE: f64 = 1e-14;

/// Largest register for which strings are materialized or decomposed densely.
pub const DENSE_QUBIT_LIMIT: usize = 8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        match self {
            Pauli::I => [[ONE, ZERO], [ZERO, ONE]],
            Pauli::X => [[ZERO, ONE], [ONE, ZERO]],
            Pauli::Y => [[ZERO, -I], [I, ZERO]],
            Pauli::Z => [[ONE, ZERO], [ZERO, -ONE]],
        }
    }

    fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' | 'i' => Some(Pauli::I),
            'X' | 'x' => Some(Pauli::X),
            'Y' | 'y' => Some(Pauli::Y),
            'Z' | 'z' => Some(Pauli::Z),
            _ => None,
        }
    }

    fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Tensor product of single-qubit Paulis, stored most-significant qubit first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    letters: Vec<Pauli>,
}

/// Bit masks describing how a string acts on a computational basis state:
/// `P|b⟩ = i^y_count · (-1)^popcount(b & z_mask) · |b ^ x_mask⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PauliMasks {
    pub x_mask: u64,
    pub z_mask: u64,
    pub y_count: u32,
}

impl PauliMasks {
    /// Phase picked up by basis state `b` (the coefficient of `|b ^ x_mask⟩`).
    #[inline]
    pub fn phase(&self, b: u64) -> Complex64 {
        let sign = if (b & self.z_mask).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        match self.y_count % 4 {
            0 => Complex64::new(sign, 0.0),
            1 => Complex64::new(0.0, sign),
            2 => Complex64::new(-sign, 0.0),
            _ => Complex64::new(0.0, -sign),
        }
    }
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::InvalidParameter(
                "a Pauli string needs at least one qubit".into(),
            ));
        }
        Ok(Self { letters })
    }

    pub fn identity(num_qubits: usize) -> Self {
        Self {
            letters: vec![Pauli::I; num_qubits.max(1)],
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.letters.len()
    }

    /// Letters in written order (qubit Γ first).
    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    /// Letter acting on the qubit at bit position `bit` (qubit `bit + 1`).
    pub fn on_bit(&self, bit: usize) -> Pauli {
        self.letters[self.letters.len() - 1 - bit]
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    /// Masks in register-local bit positions.
    pub fn masks(&self) -> PauliMasks {
        let mut m = PauliMasks {
            x_mask: 0,
            z_mask: 0,
            y_count: 0,
        };
        for bit in 0..self.num_qubits() {
            match self.on_bit(bit) {
                Pauli::I => {}
                Pauli::X => m.x_mask |= 1 << bit,
                Pauli::Z => m.z_mask |= 1 << bit,
                Pauli::Y => {
                    m.x_mask |= 1 << bit;
                    m.z_mask |= 1 << bit;
                    m.y_count += 1;
                }
            }
        }
        m
    }

    /// Dense matrix, as the Kronecker product in written order.
    pub fn to_matrix(&self) -> DenseMatrix {
        let mut out = DenseMatrix::from_element(1, 1, ONE);
        for &p in &self.letters {
            let m = p.matrix();
            let small = DenseMatrix::from_fn(2, 2, |r, c| m[r][c]);
            out = out.kronecker(&small);
        }
        out
    }

    /// Enumerates all `4^n` strings on `n` qubits in lexicographic (I < X < Y < Z) order.
    pub fn all(num_qubits: usize) -> impl Iterator<Item = PauliString> {
        (0..4usize.pow(num_qubits as u32)).map(move |mut code| {
            let mut letters = vec![Pauli::I; num_qubits];
            for slot in letters.iter_mut().rev() {
                *slot = Pauli::ALL[code % 4];
                code /= 4;
            }
            PauliString { letters }
        })
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.letters {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| {
                Pauli::from_char(c).ok_or_else(|| {
                    Error::InvalidParameter(format!("invalid Pauli letter {c:?} in {s:?}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        PauliString::new(letters)
    }
}

/// `Σ c_k P_k` with complex weights and no repeated strings.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedPauliSum {
    num_qubits: usize,
    terms: Vec<(Complex64, PauliString)>,
}

impl WeightedPauliSum {
    /// Builds a sum, merging repeated strings. Terms keep first-appearance order.
    pub fn new(
        num_qubits: usize,
        terms: impl IntoIterator<Item = (Complex64, PauliString)>,
    ) -> Result<Self> {
        let mut order: Vec<PauliString> = Vec::new();
        let mut acc: BTreeMap<PauliString, Complex64> = BTreeMap::new();
        for (c, p) in terms {
            if p.num_qubits() != num_qubits {
                return Err(Error::DimensionMismatch {
                    expected: num_qubits,
                    got: p.num_qubits(),
                });
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::NonFinite("Pauli coefficient"));
            }
            match acc.get_mut(&p) {
                Some(v) => *v += c,
                None => {
                    acc.insert(p.clone(), c);
                    order.push(p);
                }
            }
        }
        let terms = order
            .into_iter()
            .map(|p| {
                let c = acc[&p];
                (c, p)
            })
            .collect();
        Ok(Self { num_qubits, terms })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn terms(&self) -> &[(Complex64, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, p: &PauliString) -> Complex64 {
        self.terms
            .iter()
            .find(|(_, q)| q == p)
            .map(|(c, _)| *c)
            .unwrap_or(ZERO)
    }

    pub fn is_hermitian(&self) -> bool {
        self.terms.iter().all(|(c, _)| c.im == 0.0)
    }

    pub fn to_matrix(&self) -> DenseMatrix {
        let dim = 1usize << self.num_qubits;
        let mut out = DenseMatrix::zeros(dim, dim);
        for (c, p) in &self.terms {
            let masks = p.masks();
            for b in 0..dim as u64 {
                out[((b ^ masks.x_mask) as usize, b as usize)] += c * masks.phase(b);
            }
        }
        out
    }

    /// Serializes to the line format `<re> <im> <string>`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (c, p) in &self.terms {
            s.push_str(&format!("{} {} {}\n", c.re, c.im, p));
        }
        s
    }

    /// Parses the line format `<re> <im> <string>`; `#` starts a comment and
    /// blank lines are skipped. Every string must have the same length.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        let mut width = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!(
                        "expected `<re> <im> <string>`, found {} fields",
                        fields.len()
                    ),
                });
            }
            let parse_f = |s: &str| {
                s.parse::<f64>().map_err(|e| Error::Parse {
                    line: line_no,
                    msg: format!("bad number {s:?}: {e}"),
                })
            };
            let re = parse_f(fields[0])?;
            let im = parse_f(fields[1])?;
            let p: PauliString = fields[2].parse().map_err(|e: Error| Error::Parse {
                line: line_no,
                msg: e.to_string(),
            })?;
            match width {
                None => width = Some(p.num_qubits()),
                Some(w) if w != p.num_qubits() => {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("string {p} has {} qubits, expected {w}", p.num_qubits()),
                    })
                }
                _ => {}
            }
            terms.push((Complex64::new(re, im), p));
        }
        let width = width.ok_or(Error::Parse {
            line: 0,
            msg: "no terms".into(),
        })?;
        WeightedPauliSum::new(width, terms).map_err(|e| Error::Parse {
            line: 0,
            msg: e.to_string(),
        })
    }
}

/// Trace inner-product decomposition: the coefficient of `P` is `Tr[P·M] / 2^Γ`.
///
/// Real and imaginary parts below `PRUNE_RELATIVE · max|c|` are zeroed and
/// vanishing terms dropped.
pub fn pauli_decompose(m: &DenseMatrix, num_qubits: usize) -> Result<WeightedPauliSum> {
    if num_qubits == 0 || num_qubits > DENSE_QUBIT_LIMIT {
        return Err(Error::Capacity {
            what: "dense Pauli decomposition",
            required: num_qubits,
            limit: DENSE_QUBIT_LIMIT,
        });
    }
    let dim = 1usize << num_qubits;
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: m.nrows().max(m.ncols()),
        });
    }
    let scale = 1.0 / dim as f64;
    let raw: Vec<(Complex64, PauliString)> = PauliString::all(num_qubits)
        .map(|p| {
            let masks = p.masks();
            // (P M)_{bb} = phase(b ^ x) · M_{b^x, b}
            let tr: Complex64 = (0..dim as u64)
                .map(|b| {
                    masks.phase(b ^ masks.x_mask) * m[((b ^ masks.x_mask) as usize, b as usize)]
                })
                .sum();
            (tr * scale, p)
        })
        .collect();
    let largest = raw.iter().map(|(c, _)| c.norm()).fold(0.0, f64::max);
    let cut = PRUNE_RELATIVE * largest;
    let kept = raw.into_iter().filter_map(|(c, p)| {
        let c = Complex64::new(
            if c.re.abs() < cut { 0.0 } else { c.re },
            if c.im.abs() < cut { 0.0 } else { c.im },
        );
        (c != ZERO).then_some((c, p))
    });
    WeightedPauliSum::new(num_qubits, kept)
}

/// `H = Σ c_i h_i + i Σ c_j h_j + scalar_offset · I` with real `c`.
#[derive(Clone, Debug, PartialEq)]
pub struct NonHermitianSplit {
    pub num_qubits: usize,
    pub hermitian: Vec<(f64, PauliString)>,
    pub antihermitian: Vec<(f64, PauliString)>,
    pub scalar_offset: Complex64,
}

impl NonHermitianSplit {
    /// Number of anti-Hermitian terms.
    pub fn n(&self) -> usize {
        self.antihermitian.len()
    }

    pub fn to_matrix(&self) -> DenseMatrix {
        let dim = 1usize << self.num_qubits;
        let mut out = DenseMatrix::identity(dim, dim) * self.scalar_offset;
        for (c, p) in &self.hermitian {
            out += p.to_matrix() * Complex64::new(*c, 0.0);
        }
        for (c, p) in &self.antihermitian {
            out += p.to_matrix() * Complex64::new(0.0, *c);
        }
        out
    }

    /// Re-expresses `self` over the term lists of `template`, inserting
    /// zero-coefficient entries for template strings `self` lacks. Strings only
    /// present in `self` are appended after the template's.
    ///
    /// The free system is run through the same circuit layout as the
    /// interacting one this way, with vanishing couplings kept as
    /// zero-angle factors.
    pub fn aligned_to(&self, template: &NonHermitianSplit) -> Result<NonHermitianSplit> {
        if self.num_qubits != template.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: template.num_qubits,
                got: self.num_qubits,
            });
        }
        fn align(
            own: &[(f64, PauliString)],
            tpl: &[(f64, PauliString)],
        ) -> Vec<(f64, PauliString)> {
            let lookup = |p: &PauliString| own.iter().find(|(_, q)| q == p).map(|(c, _)| *c);
            let mut out: Vec<(f64, PauliString)> = tpl
                .iter()
                .map(|(_, p)| (lookup(p).unwrap_or(0.0), p.clone()))
                .collect();
            for (c, p) in own {
                if !tpl.iter().any(|(_, q)| q == p) {
                    out.push((*c, p.clone()));
                }
            }
            out
        }
        Ok(NonHermitianSplit {
            num_qubits: self.num_qubits,
            hermitian: align(&self.hermitian, &template.hermitian),
            antihermitian: align(&self.antihermitian, &template.antihermitian),
            scalar_offset: self.scalar_offset,
        })
    }

    /// Whether both splits carry identical non-identity terms (in order),
    /// differing at most in the scalar offset.
    pub fn same_operator_part(&self, other: &NonHermitianSplit) -> bool {
        self.num_qubits == other.num_qubits
            && self.hermitian == other.hermitian
            && self.antihermitian == other.antihermitian
    }
}

/// Splits each coefficient into its real part (Hermitian group) and imaginary
/// part (anti-Hermitian group); the all-identity term becomes the scalar offset.
pub fn split_hermitian_antihermitian(h: &WeightedPauliSum) -> NonHermitianSplit {
    let mut split = NonHermitianSplit {
        num_qubits: h.num_qubits(),
        hermitian: Vec::new(),
        antihermitian: Vec::new(),
        scalar_offset: ZERO,
    };
    for (c, p) in h.terms() {
        if p.is_identity() {
            split.scalar_offset += c;
            continue;
        }
        if c.re != 0.0 {
            split.hermitian.push((c.re, p.clone()));
        }
        if c.im != 0.0 {
            split.antihermitian.push((c.im, p.clone()));
        }
    }
    split
}
