use serde::{Deserialize, Serialize};

use crate::prob::{
    conditional_entropy_between, induce_joint, mutual_information_between, JointPmf, Pmf,
};
use crate::{Error, Result};

/// Tolerance for the entropy conditions in [`validate_base`].
pub const VALIDATION_TOLERANCE: f64 = 1e-9;

/// A one-shot (2,2) scheme: a deterministic encoder of `(secret, key)` into
/// two shares, and a decoder that may return `None` for pairs outside the
/// encoder's range.
pub trait BaseScheme: Send + Sync {
    fn secret_size(&self) -> usize;
    fn key_size(&self) -> usize;
    fn x_size(&self) -> usize;
    fn y_size(&self) -> usize;
    /// Requires `s < secret_size()` and `u < key_size()`.
    fn encode(&self, s: usize, u: usize) -> (usize, usize);
    fn decode(&self, x: usize, y: usize) -> Option<usize>;
}

/// `f*(s, u) = ((s - u) mod M, u)`, `g*(x, y) = (x + y) mod M` when that is
/// a secret symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModularScheme {
    modulus: usize,
    secret_size: usize,
}

impl ModularScheme {
    /// Requires `modulus >= secret_size >= 1`.
    pub fn new(modulus: usize, secret_size: usize) -> Result<Self> {
        if secret_size == 0 || modulus < secret_size {
            return Err(Error::InvalidParameter(format!(
                "modulus {modulus} must be at least the secret alphabet size {secret_size}, which must be positive"
            )));
        }
        Ok(Self {
            modulus,
            secret_size,
        })
    }

    pub fn modulus(&self) -> usize {
        self.modulus
    }

    pub fn fstar(&self, s: usize, u: usize) -> Result<(usize, usize)> {
        if s >= self.secret_size || u >= self.modulus {
            return Err(Error::InvalidInput(format!(
                "(s, u) = ({s}, {u}) outside [0, {}) x [0, {})",
                self.secret_size, self.modulus
            )));
        }
        Ok(self.encode(s, u))
    }

    pub fn gstar(&self, x: usize, y: usize) -> Option<usize> {
        self.decode(x, y)
    }
}

impl BaseScheme for ModularScheme {
    fn secret_size(&self) -> usize {
        self.secret_size
    }

    fn key_size(&self) -> usize {
        self.modulus
    }

    fn x_size(&self) -> usize {
        self.modulus
    }

    fn y_size(&self) -> usize {
        self.modulus
    }

    fn encode(&self, s: usize, u: usize) -> (usize, usize) {
        debug_assert!(s < self.secret_size && u < self.modulus);
        ((s + self.modulus - u) % self.modulus, u)
    }

    fn decode(&self, x: usize, y: usize) -> Option<usize> {
        if x >= self.modulus || y >= self.modulus {
            return None;
        }
        let s = (x + y) % self.modulus;
        (s < self.secret_size).then_some(s)
    }
}

/// A base scheme given by explicit tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableScheme {
    secret_size: usize,
    key_size: usize,
    x_size: usize,
    y_size: usize,
    encode: Vec<(usize, usize)>,
    decode: Vec<Option<usize>>,
}

impl TableScheme {
    pub fn from_fns<E, D>(
        secret_size: usize,
        key_size: usize,
        x_size: usize,
        y_size: usize,
        enc: E,
        dec: D,
    ) -> Result<Self>
    where
        E: Fn(usize, usize) -> (usize, usize),
        D: Fn(usize, usize) -> Option<usize>,
    {
        if [secret_size, key_size, x_size, y_size].contains(&0) {
            return Err(Error::InvalidParameter("empty alphabet".into()));
        }
        let mut encode = Vec::with_capacity(secret_size * key_size);
        for s in 0..secret_size {
            for u in 0..key_size {
                let (x, y) = enc(s, u);
                if x >= x_size || y >= y_size {
                    return Err(Error::InvalidParameter(format!(
                        "encoder maps ({s}, {u}) to ({x}, {y}) outside the share alphabets"
                    )));
                }
                encode.push((x, y));
            }
        }
        let mut decode = Vec::with_capacity(x_size * y_size);
        for x in 0..x_size {
            for y in 0..y_size {
                let s = dec(x, y);
                if s.is_some_and(|s| s >= secret_size) {
                    return Err(Error::InvalidParameter(format!(
                        "decoder maps ({x}, {y}) outside the secret alphabet"
                    )));
                }
                decode.push(s);
            }
        }
        Ok(Self {
            secret_size,
            key_size,
            x_size,
            y_size,
            encode,
            decode,
        })
    }
}

impl BaseScheme for TableScheme {
    fn secret_size(&self) -> usize {
        self.secret_size
    }

    fn key_size(&self) -> usize {
        self.key_size
    }

    fn x_size(&self) -> usize {
        self.x_size
    }

    fn y_size(&self) -> usize {
        self.y_size
    }

    fn encode(&self, s: usize, u: usize) -> (usize, usize) {
        self.encode[s * self.key_size + u]
    }

    fn decode(&self, x: usize, y: usize) -> Option<usize> {
        if x >= self.x_size || y >= self.y_size {
            return None;
        }
        self.decode[x * self.y_size + y]
    }
}

/// A requirement a base scheme must meet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseCondition {
    /// `H(S|X) = H(S)`.
    SecrecyX,
    /// `H(S|Y) = H(S)`.
    SecrecyY,
    /// `H(S|X,Y) = 0`.
    Decodability,
    /// `min(|X|, |Y|, |U|) >= |S|`.
    AlphabetSize,
    /// The decoder inverts the encoder and returns `None` exactly off its range.
    DecoderConsistency,
}

impl BaseCondition {
    pub fn name(self) -> &'static str {
        match self {
            BaseCondition::SecrecyX => "secrecy_x",
            BaseCondition::SecrecyY => "secrecy_y",
            BaseCondition::Decodability => "decodability",
            BaseCondition::AlphabetSize => "alphabet_size",
            BaseCondition::DecoderConsistency => "decoder_consistency",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseValidation {
    pub h_s: f64,
    pub h_s_given_x: f64,
    pub h_s_given_y: f64,
    pub h_s_given_xy: f64,
    /// `I(X;Y)` under a uniform key.
    pub ell: f64,
    pub sizes_ok: bool,
    pub failures: Vec<BaseCondition>,
}

impl BaseValidation {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Joint of `(S, U, X, Y)` with `U` uniform and independent of `S`.
pub fn induced_base_joint<B: BaseScheme + ?Sized>(scheme: &B, source: &Pmf) -> Result<JointPmf> {
    if source.support_size() != scheme.secret_size() {
        return Err(Error::InvalidInput(format!(
            "source has {} symbols, scheme expects {}",
            source.support_size(),
            scheme.secret_size()
        )));
    }
    let src = JointPmf::product(&[source, &Pmf::uniform(scheme.key_size())])?;
    induce_joint(&src, &[scheme.x_size(), scheme.y_size()], |t| {
        let (x, y) = scheme.encode(t[0], t[1]);
        Some(vec![x, y])
    })
}

/// Evaluates every requirement from the exact joint of `(S, U, X, Y)`.
pub fn validate_base<B: BaseScheme + ?Sized>(scheme: &B, source: &Pmf) -> Result<BaseValidation> {
    let j = induced_base_joint(scheme, source)?;
    let h_s = source.entropy();
    let h_s_given_x = conditional_entropy_between(&j, &[0], &[2]);
    let h_s_given_y = conditional_entropy_between(&j, &[0], &[3]);
    let h_s_given_xy = conditional_entropy_between(&j, &[0], &[2, 3]);
    let ell = mutual_information_between(&j, &[2], &[3]);
    let sizes_ok =
        scheme.x_size().min(scheme.y_size()).min(scheme.key_size()) >= scheme.secret_size();

    let mut failures = Vec::new();
    if (h_s_given_x - h_s).abs() > VALIDATION_TOLERANCE {
        failures.push(BaseCondition::SecrecyX);
    }
    if (h_s_given_y - h_s).abs() > VALIDATION_TOLERANCE {
        failures.push(BaseCondition::SecrecyY);
    }
    if h_s_given_xy > VALIDATION_TOLERANCE {
        failures.push(BaseCondition::Decodability);
    }
    if !sizes_ok {
        failures.push(BaseCondition::AlphabetSize);
    }
    if !decoder_consistent(scheme, source) {
        failures.push(BaseCondition::DecoderConsistency);
    }
    Ok(BaseValidation {
        h_s,
        h_s_given_x,
        h_s_given_y,
        h_s_given_xy,
        ell,
        sizes_ok,
        failures,
    })
}

fn decoder_consistent<B: BaseScheme + ?Sized>(scheme: &B, source: &Pmf) -> bool {
    let mut in_range = vec![false; scheme.x_size() * scheme.y_size()];
    for s in 0..scheme.secret_size() {
        for u in 0..scheme.key_size() {
            let (x, y) = scheme.encode(s, u);
            in_range[x * scheme.y_size() + y] = true;
            if source.prob(s) > 0.0 && scheme.decode(x, y) != Some(s) {
                return false;
            }
        }
    }
    (0..scheme.x_size()).all(|x| {
        (0..scheme.y_size())
            .all(|y| in_range[x * scheme.y_size() + y] || scheme.decode(x, y).is_none())
    })
}

/// `log2 M - H(S)`, the correlation level of the modular scheme.
pub fn correlation_level_fstar(modulus: usize, source: &Pmf) -> Result<f64> {
    if modulus < source.support_size() {
        return Err(Error::InvalidParameter(format!(
            "modulus {modulus} below the source alphabet size {}",
            source.support_size()
        )));
    }
    Ok((modulus as f64).log2() - source.entropy())
}
