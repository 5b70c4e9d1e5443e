//! Bundled demonstration frame: a sedan-sized steel space frame built
//! from four triangulated modules on a single deck.

use super::{parse_model, FrameModel};

pub const DEMO_NAME: &str = "demo-frame";

/// Source text of the bundled demo model (millimetre units).
pub const DEMO_SOURCE: &str = include_str!("../../assets/demo_frame.json");

pub fn demo_frame() -> FrameModel {
    parse_model(DEMO_SOURCE).expect("bundled demo model parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_is_valid() {
        let m = demo_frame();
        m.ensure_valid().unwrap();
        assert_eq!(m.meta.name, DEMO_NAME);
    }
}
