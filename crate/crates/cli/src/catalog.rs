//! Scenarios shipped with the binary.

pub struct Entry {
    pub name: &'static str,
    pub text: &'static str,
}

macro_rules! entries {
    ($($name:literal),* $(,)?) => {
        &[$(Entry { name: $name, text: include_str!(concat!("../scenarios/", $name, ".toml")) }),*]
    };
}

pub const SCENARIOS: &[Entry] = entries![
    "shannon_onb",
    "gabor_onb",
    "shearlet_property_x",
    "example_bad",
    "semicontinuous_wavelets",
    "anisotropic_dilations",
    "weil_identity",
    "counting_sandwich",
];

pub fn get(name: &str) -> Option<&'static str> {
    SCENARIOS.iter().find(|e| e.name == name).map(|e| e.text)
}
