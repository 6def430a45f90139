//! Registry of the named states used by tests and the CLI.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use crate::error::{Error, Result};
use crate::free_sets::basis_vector;
use crate::linalg::hermitian::QuantumState;
use crate::linalg::matrix::C64;

#[derive(Debug, Clone)]
pub struct NamedState {
    pub name: String,
    pub state: QuantumState,
}

fn pure(amplitudes: Vec<C64>) -> QuantumState {
    QuantumState::from_ket(&amplitudes).expect("registry kets are normalized")
}

/// `(|0⟩ + e^{iπ/4}|1⟩)/√2`
pub fn t_ket() -> Vec<C64> {
    vec![C64::new(FRAC_1_SQRT_2, 0.0), C64::from_polar(FRAC_1_SQRT_2, FRAC_PI_4)]
}

/// `Z|T⟩`
pub fn t_bar_ket() -> Vec<C64> {
    vec![C64::new(FRAC_1_SQRT_2, 0.0), -C64::from_polar(FRAC_1_SQRT_2, FRAC_PI_4)]
}

/// `(1/√d) Σ_i |ii⟩`
pub fn phi_plus_ket(d: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        v[i * d + i] = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    }
    v
}

/// `(1/√d) Σ_j |j⟩`
pub fn maximally_coherent_ket(d: usize) -> Vec<C64> {
    vec![C64::new(1.0 / (d as f64).sqrt(), 0.0); d]
}

fn parse_dim(name: &str, arg: Option<&str>, default: Option<usize>) -> Result<usize> {
    match (arg, default) {
        (Some(a), _) => {
            let d: usize = a.parse().map_err(|_| Error::invalid(format!("state '{name}': dimension '{a}' is not an integer")))?;
            if d < 2 {
                return Err(Error::invalid(format!("state '{name}' needs dimension >= 2")));
            }
            Ok(d)
        }
        (None, Some(d)) => Ok(d),
        (None, None) => Err(Error::invalid(format!("state '{name}' needs a dimension, e.g. '{name}:3'"))),
    }
}

/// Looks up `T`, `T_bar`, `plus`, `minus`, `zero`, `one`, `bell`,
/// `phi_plus:d`, `w:d`, `maximally_mixed[:d]`.
pub fn named_state(name: &str) -> Result<QuantumState> {
    let (base, arg) = match name.split_once(':') {
        Some((b, a)) => (b, Some(a)),
        None => (name, None),
    };
    let no_arg = |s: QuantumState| {
        if arg.is_some() {
            Err(Error::invalid(format!("state '{base}' takes no dimension")))
        } else {
            Ok(s)
        }
    };
    let s = FRAC_1_SQRT_2;
    match base {
        "T" => no_arg(pure(t_ket())),
        "T_bar" => no_arg(pure(t_bar_ket())),
        "plus" => no_arg(pure(vec![C64::new(s, 0.0), C64::new(s, 0.0)])),
        "minus" => no_arg(pure(vec![C64::new(s, 0.0), C64::new(-s, 0.0)])),
        "zero" => no_arg(pure(basis_vector(2, 0))),
        "one" => no_arg(pure(basis_vector(2, 1))),
        "bell" => no_arg(pure(phi_plus_ket(2))),
        "phi_plus" => Ok(pure(phi_plus_ket(parse_dim(base, arg, None)?))),
        "w" => Ok(pure(maximally_coherent_ket(parse_dim(base, arg, None)?))),
        "maximally_mixed" => Ok(QuantumState::maximally_mixed(parse_dim(base, arg, Some(2))?)),
        _ => Err(Error::invalid(format!("unknown state name '{name}'"))),
    }
}

/// Every fixed-dimension entry plus `phi_plus:2`, `w:3`.
pub fn registry() -> Vec<NamedState> {
    ["T", "T_bar", "plus", "minus", "zero", "one", "bell", "phi_plus:2", "w:3", "maximally_mixed"]
        .into_iter()
        .map(|n| NamedState { name: n.into(), state: named_state(n).unwrap() })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unitaries::pauli_z;

    #[test]
    fn t_bar_is_z_t() {
        let t = named_state("T").unwrap();
        let tb = named_state("T_bar").unwrap();
        assert!(pauli_z().conjugate(t.matrix()).max_abs_diff(tb.matrix()) < 1e-15);
        assert!(t.expectation(tb.matrix()).abs() < 1e-15);
    }

    #[test]
    fn parametrized_names() {
        assert_eq!(named_state("w:5").unwrap().dim(), 5);
        assert_eq!(named_state("phi_plus:3").unwrap().dim(), 9);
        assert_eq!(named_state("maximally_mixed").unwrap().dim(), 2);
        assert!(named_state("w").is_err());
        assert!(named_state("w:1").is_err());
        assert!(named_state("plus:2").is_err());
        assert!(named_state("nope").is_err());
        assert_eq!(registry().len(), 10);
    }
}
