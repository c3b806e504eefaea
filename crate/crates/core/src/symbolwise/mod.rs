//! Symbolwise scheme: a one-shot base scheme applied to each symbol, with
//! forged shares caught by a likelihood-ratio test on the share pair.
//!
//! With the modular base scheme `f*` both shares are uniform and independent
//! of the secret, and the correlation level is `log2 M - H(S)`. It is fixed
//! by the modulus and the source, not chosen freely.

mod base;
mod codec;
pub mod counting;

pub use base::{
    correlation_level_fstar, induced_base_joint, validate_base, BaseCondition, BaseScheme,
    BaseValidation, ModularScheme, TableScheme, VALIDATION_TOLERANCE,
};
pub use codec::{
    FstarAttack, SymbolwiseAttack, SymbolwiseCodec, SymbolwiseQuantities, FORGED_TYPE_CAP,
};
