use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};

/// Default ceiling on the total number of simulated qubits.
///
/// A dense statevector at this size holds 2^22 complex amplitudes (64 MiB),
/// which is the largest allocation this library will make by default. Callers
/// can raise or lower the ceiling through [`RegisterLayout::with_cap`], or
/// process-wide through [`set_default_qubit_cap`].
pub const DEFAULT_QUBIT_CAP: usize = 22;

static DEFAULT_CAP_OVERRIDE: AtomicUsize = AtomicUsize::new(0);

/// Replaces the process-wide default qubit cap used by
/// [`RegisterLayout::new`]. Intended for entry points (such as a CLI honoring
/// an environment variable) that need to widen or tighten every layout built
/// downstream; explicit [`RegisterLayout::with_cap`] calls are unaffected.
/// Passing 0 restores [`DEFAULT_QUBIT_CAP`].
pub fn set_default_qubit_cap(cap: usize) {
    DEFAULT_CAP_OVERRIDE.store(cap, Ordering::Relaxed);
}

/// The cap [`RegisterLayout::new`] currently applies.
pub fn default_qubit_cap() -> usize {
    match DEFAULT_CAP_OVERRIDE.load(Ordering::Relaxed) {
        0 => DEFAULT_QUBIT_CAP,
        cap => cap,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Register {
    name: String,
    width: usize,
}

/// Named partition of the qubits in a statevector.
///
/// Registers are listed most-significant-first: the first register in the
/// layout occupies the top bits of the basis index. Within the whole state,
/// qubit 0 is the least-significant bit of the basis index, so a layout
/// `[("a", 1), ("q", 3)]` places `a` on qubit 3 and `q` on qubits 2..0.
/// Within a register, the register's value is read with its most-significant
/// bit at the highest qubit index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterLayout {
    regs: Vec<Register>,
    total: usize,
    cap: usize,
}

impl RegisterLayout {
    /// Builds a layout with the process-wide default qubit cap.
    pub fn new(regs: &[(&str, usize)]) -> Result<Self> {
        Self::with_cap(regs, default_qubit_cap())
    }

    /// Builds a layout with an explicit qubit cap.
    pub fn with_cap(regs: &[(&str, usize)], cap: usize) -> Result<Self> {
        let mut seen: Vec<&str> = Vec::new();
        let mut total = 0usize;
        for &(name, width) in regs {
            if width == 0 {
                return Err(Error::EmptyRegister(name.to_string()));
            }
            if seen.contains(&name) {
                return Err(Error::DuplicateRegister(name.to_string()));
            }
            seen.push(name);
            total += width;
        }
        if total > cap {
            return Err(Error::QubitCapExceeded {
                requested: total,
                cap,
            });
        }
        Ok(Self {
            regs: regs
                .iter()
                .map(|&(name, width)| Register {
                    name: name.to_string(),
                    width,
                })
                .collect(),
            total,
            cap,
        })
    }

    pub fn total_qubits(&self) -> usize {
        self.total
    }

    pub fn dimension(&self) -> usize {
        1 << self.total
    }

    pub fn qubit_cap(&self) -> usize {
        self.cap
    }

    pub fn register_names(&self) -> Vec<&str> {
        self.regs.iter().map(|r| r.name.as_str()).collect()
    }

    pub fn register_width(&self, name: &str) -> Result<usize> {
        self.find(name).map(|r| r.width)
    }

    fn find(&self, name: &str) -> Result<&Register> {
        self.regs
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| Error::UnknownRegister(name.to_string()))
    }

    fn position(&self, name: &str) -> Result<usize> {
        self.regs
            .iter()
            .position(|r| r.name == name)
            .ok_or_else(|| Error::UnknownRegister(name.to_string()))
    }

    /// Index of the register's lowest qubit (its least-significant bit).
    pub fn register_lsb(&self, name: &str) -> Result<usize> {
        let pos = self.position(name)?;
        // Registers after this one occupy the lower bits.
        Ok(self.regs[pos + 1..].iter().map(|r| r.width).sum())
    }

    /// Qubit indices of a register, most-significant first.
    pub fn register_qubits(&self, name: &str) -> Result<Vec<usize>> {
        let lsb = self.register_lsb(name)?;
        let width = self.register_width(name)?;
        Ok((0..width).map(|k| lsb + width - 1 - k).collect())
    }

    /// The qubit carrying weight `2^weight` inside the register's value.
    pub fn register_qubit_with_weight(&self, name: &str, weight: usize) -> Result<usize> {
        let lsb = self.register_lsb(name)?;
        let width = self.register_width(name)?;
        if weight >= width {
            return Err(Error::QubitOutOfRange {
                index: weight,
                total: width,
            });
        }
        Ok(lsb + weight)
    }

    /// Extracts a register's value from a full basis index.
    pub fn value_of(&self, name: &str, basis_index: usize) -> Result<u64> {
        let lsb = self.register_lsb(name)?;
        let width = self.register_width(name)?;
        Ok(((basis_index >> lsb) as u64) & ((1u64 << width) - 1))
    }

    /// Builds a full basis index from per-register values.
    ///
    /// Registers omitted from `assignments` are set to zero.
    pub fn index_with(&self, assignments: &[(&str, u64)]) -> Result<usize> {
        let mut index = 0usize;
        for &(name, value) in assignments {
            let lsb = self.register_lsb(name)?;
            let width = self.register_width(name)?;
            if value >= (1u64 << width) {
                return Err(Error::BasisIndexOutOfRange {
                    index: value as usize,
                    dim: 1 << width,
                });
            }
            index |= (value as usize) << lsb;
        }
        Ok(index)
    }
}
