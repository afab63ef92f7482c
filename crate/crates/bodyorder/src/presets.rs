//! Named experiment configurations compiled into the binary.

use crate::error::{CliError, CliResult};

pub struct Preset {
    pub name: &'static str,
    /// Subcommand the preset is written for.
    pub command: &'static str,
    pub text: &'static str,
}

macro_rules! preset {
    ($name:literal, $command:literal) => {
        Preset {
            name: $name,
            command: $command,
            text: include_str!(concat!("../presets/", $name, ".toml")),
        }
    };
}

pub const PRESETS: &[Preset] = &[
    preset!("fig-preasymptotic-E1", "converge"),
    preset!("fig-preasymptotic-E2", "converge"),
    preset!("defect-bop", "converge"),
    preset!("chebyshev-metallic", "converge"),
    preset!("truncation-40", "truncate"),
    preset!("locality-40", "locality"),
    preset!("scf-yukawa", "scf"),
    preset!("scf-uncoupled", "scf"),
    preset!("nodes-chebyshev", "nodes"),
    preset!("vacuum-small", "vacuum"),
];

pub fn find(name: &str) -> CliResult<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name).ok_or_else(|| {
        let names: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
        CliError::config(format!("unknown preset `{name}`; known: {}", names.join(", ")))
    })
}
