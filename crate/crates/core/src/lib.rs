//! Canonical heights and the Arakelov–Zhang pairing for rational maps of
//! the projective line over Q.
//!
//! The pairing `<φ, ψ>` is estimated by averaging `φ`-heights over the
//! period-`n` points of `ψ`: the points are carried exactly as the roots of
//! an integer binary form, pushed through `φ^k` by resultants, and the
//! average height is read off a log Mahler measure. Closed forms and
//! quadratures for the squaring-map families live in [`families`].

pub mod bigpoly;
pub mod dynmap;
pub mod error;
pub mod families;
pub mod heights;
pub mod mahler;
pub mod pairing;
pub mod util;
pub mod verify;

pub use bigpoly::{
    resultant_binary, resultant_with_parameters, IntBinaryForm, IntPolynomial, Primitive,
};
pub use dynmap::{Lift, MobiusQ, RationalMap, DEFAULT_DEGREE_CAP};
pub use error::{Error, Result};
pub use heights::{
    canonical_height, orbit_average_height, standard_height, HeightValue, ProjPointQ,
};
pub use mahler::{complex_roots, log_mahler, MahlerValue, RootSet};
pub use pairing::{
    pairing_converged, pairing_estimate, periodic_form, pushforward_form, PairingEstimate,
};
