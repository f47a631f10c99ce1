//! Worked example networks, bundled so tests and the CLI share one copy.

use crate::model::Network;
use crate::parser::parse_network;

pub const MARINE: &str = include_str!("../fixtures/marine.ncdc");
pub const BUILDING_B1: &str = include_str!("../fixtures/building_b1.ncdc");
/// B1 without the director's office constraint.
pub const BUILDING_B1P: &str = include_str!("../fixtures/building_b1p.ncdc");
pub const FORENSICS_D1: &str = include_str!("../fixtures/forensics_d1.ncdc");
pub const FORENSICS_D2: &str = include_str!("../fixtures/forensics_d2.ncdc");
pub const PROJECTION: &str = include_str!("../fixtures/projection.ncdc");

/// Published fact listings, for comparing emitter output.
pub mod golden {
    pub const MARINE: &str = include_str!("../fixtures/golden/marine.lp");
    pub const BUILDING: &str = include_str!("../fixtures/golden/building.lp");
    pub const FORENSICS: &str = include_str!("../fixtures/golden/forensics.lp");
}

/// Every bundled network by name.
pub const ALL: [(&str, &str); 6] = [
    ("marine", MARINE),
    ("building_b1", BUILDING_B1),
    ("building_b1p", BUILDING_B1P),
    ("forensics_d1", FORENSICS_D1),
    ("forensics_d2", FORENSICS_D2),
    ("projection", PROJECTION),
];

pub fn load(text: &str) -> Network {
    parse_network(text).expect("bundled fixture parses")
}

pub fn by_name(name: &str) -> Option<Network> {
    ALL.iter().find(|(n, _)| *n == name).map(|(_, t)| load(t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_parse() {
        for (name, text) in ALL {
            let net = load(text);
            assert!(net.validate().is_ok(), "{name}");
        }
    }

    #[test]
    fn sizes() {
        assert_eq!(by_name("marine").unwrap().objects.len(), 5);
        assert_eq!(by_name("building_b1").unwrap().constraints.len(), 6);
        assert_eq!(by_name("building_b1p").unwrap().constraints.len(), 5);
        assert_eq!(by_name("forensics_d1").unwrap().objects.len(), 16);
        assert_eq!(by_name("forensics_d2").unwrap().objects.len(), 12);
    }
}
