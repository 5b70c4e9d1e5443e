#![allow(dead_code)]

use spaceframe::model::{parse_model, FrameModel};

/// Straight 40×40×1 mm steel tube along X, `length` and `element_length`
/// in mm. EI = 8310.1 N·m², ρA = 1.2246 kg/m.
pub fn tube(length: f64, element_length: f64) -> FrameModel {
    parse_model(&format!(
        r#"{{
        "meta": {{ "name": "tube", "units": {{ "length": "mm" }}, "wheelbase": 1000, "track_width": 500,
                   "element_length": {element_length} }},
        "materials": {{ "steel": {{ "youngs_modulus": 210000, "poisson_ratio": 0.3, "density": 7850 }} }},
        "sections": {{ "t40": {{ "width": 40, "height": 40, "thickness": 1.0 }} }},
        "nodes": [ {{ "id": 1, "position": [0, 0, 0] }}, {{ "id": 2, "position": [{length}, 0, 0] }} ],
        "members": [ {{ "id": 1, "nodes": [1, 2], "section": "t40", "material": "steel",
                       "orientation": [0, 0, 1], "module": "deck" }} ]
    }}"#
    ))
    .expect("tube model parses")
}

/// Small braced box (mm): 8 corners, 12 edges, one diagonal per face.
pub fn braced_box(lx: f64, ly: f64, lz: f64, width: f64, thickness: f64) -> FrameModel {
    let corners = [
        [0.0, 0.0, 0.0],
        [lx, 0.0, 0.0],
        [lx, ly, 0.0],
        [0.0, ly, 0.0],
        [0.0, 0.0, lz],
        [lx, 0.0, lz],
        [lx, ly, lz],
        [0.0, ly, lz],
    ];
    let edges = [
        (1, 2),
        (2, 3),
        (3, 4),
        (4, 1),
        (5, 6),
        (6, 7),
        (7, 8),
        (8, 5),
        (1, 5),
        (2, 6),
        (3, 7),
        (4, 8),
        (1, 3),
        (5, 7),
        (1, 6),
        (2, 7),
        (3, 8),
        (4, 5),
    ];
    let nodes: Vec<String> = corners
        .iter()
        .enumerate()
        .map(|(i, p)| format!(r#"{{ "id": {}, "position": [{}, {}, {}] }}"#, i + 1, p[0], p[1], p[2]))
        .collect();
    let members: Vec<String> = edges
        .iter()
        .enumerate()
        .map(|(k, &(a, b)): (usize, &(usize, usize))| {
            let pa = corners[a - 1];
            let pb = corners[b - 1];
            let vertical = (pb[2] - pa[2]).abs() > 0.5 * ((pb[0] - pa[0]).abs() + (pb[1] - pa[1]).abs());
            let o = if vertical { "[1, 0, 0]" } else { "[0, 0, 1]" };
            format!(
                r#"{{ "id": {}, "nodes": [{a}, {b}], "section": "s", "material": "steel", "orientation": {o}, "module": "deck" }}"#,
                k + 1
            )
        })
        .collect();
    parse_model(&format!(
        r#"{{
        "meta": {{ "name": "box", "units": {{ "length": "mm" }}, "wheelbase": {lx}, "track_width": {ly},
                   "element_length": 250 }},
        "materials": {{ "steel": {{ "youngs_modulus": 210000, "poisson_ratio": 0.3, "density": 7850 }} }},
        "sections": {{ "s": {{ "width": {width}, "height": {width}, "thickness": {thickness} }} }},
        "nodes": [ {} ],
        "members": [ {} ]
    }}"#,
        nodes.join(", "),
        members.join(", ")
    ))
    .expect("box model parses")
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
