use crate::error::{Error, Result};
use crate::measure::Density;
use crate::powercell::Atoms;

/// A semi-discrete transport problem: source density and target atoms.
#[derive(Debug, Clone)]
pub struct Problem {
    pub density: Density,
    pub atoms: Atoms,
}

impl Problem {
    pub fn new(density: Density, atoms: Atoms) -> Result<Self> {
        if density.dim() != atoms.dim() {
            return Err(Error::InvalidInput(format!(
                "density is {}-dimensional but atoms are {}-dimensional",
                density.dim(),
                atoms.dim()
            )));
        }
        Ok(Self { density, atoms })
    }

    pub fn dim(&self) -> usize {
        self.density.dim()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}
