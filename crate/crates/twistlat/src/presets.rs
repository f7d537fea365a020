//! Bundled example inputs.

use crate::input::Setup;
use crate::lattice::{Automorphism, Cocycle, Lattice};

pub const EXAMPLE_61: &str = include_str!("../data/example-6.1.json");
pub const EXAMPLE_62: &str = include_str!("../data/example-6.2.json");
pub const HYPERBOLIC_IDENTITY: &str = include_str!("../data/hyperbolic-identity.json");

pub struct Preset {
    pub setup: Setup,
    pub lattice: Lattice,
    pub phi: Automorphism,
}

impl Preset {
    fn load(text: &str, name: &str) -> Preset {
        let setup = Setup::from_json(text, name).expect("bundled input is valid");
        Preset { lattice: setup.lattice.clone(), phi: setup.phi.clone(), setup }
    }

    /// The sign table shipped with the example.
    pub fn shipped_cocycle(&self) -> Cocycle {
        self.setup.eps.clone()
    }
}

/// Rank 4, unipotent φ with two 2×2 Jordan blocks.
pub fn example_61() -> Preset {
    Preset::load(EXAMPLE_61, "example-6.1")
}

/// Rank 3, φ = t_{α₁}, a single 3×3 Jordan block.
pub fn example_62() -> Preset {
    Preset::load(EXAMPLE_62, "example-6.2")
}

pub fn hyperbolic_identity() -> Preset {
    Preset::load(HYPERBOLIC_IDENTITY, "hyperbolic-identity")
}

pub fn by_name(name: &str) -> Option<&'static str> {
    match name {
        "example-6.1" => Some(EXAMPLE_61),
        "example-6.2" => Some(EXAMPLE_62),
        "hyperbolic-identity" => Some(HYPERBOLIC_IDENTITY),
        _ => None,
    }
}
