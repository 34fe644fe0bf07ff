//! Built-in examples addressable by name.

use multiwit::algebra::{MultiIndex, PolySystem};
use multiwit::fixtures as fx;

use crate::Failure;

pub enum Fixture {
    /// A system and the slice total of its witness collection.
    System { system: PolySystem, dim: usize },
    /// Multidegrees of general forms and the group sizes.
    Class { degrees: Vec<MultiIndex>, nvec: MultiIndex },
}

pub const NAMES: &[&str] = &[
    "cubic",
    "octahedron-f",
    "octahedron-g",
    "octahedron-h",
    "richardson",
    "richardson-four",
    "hyperboloid",
    "point-times-surface",
    "three-lines",
    "crossing-lines",
    "parallel-lines",
    "six-forms",
    "pentad",
];

/// Fixtures that only load with `--extended`.
pub const EXTENDED: &[&str] = &["pentad"];

fn octahedron(c: char) -> PolySystem {
    let text = fx::octahedron_text(c).expect("known octahedron system");
    multiwit::sysio::parse_system(&text).expect("fixture parses").system
}

/// The fixture `name`; the Richardson matrices are drawn from `seed`.
pub fn lookup(name: &str, seed: u64, extended: bool) -> Result<Fixture, Failure> {
    if EXTENDED.contains(&name) && !extended {
        return Err(Failure::Input(format!("fixture {name} needs --extended")));
    }
    let sys = |system: PolySystem, dim: usize| Fixture::System { system, dim };
    Ok(match name {
        "cubic" => sys(fx::cubic(), 1),
        "octahedron-f" => sys(octahedron('f'), 3),
        "octahedron-g" => sys(fx::octahedron_fg(), 2),
        "octahedron-h" => sys(fx::octahedron_fh(), 2),
        "richardson" => sys(fx::Richardson::new(seed).variety(), 5),
        "richardson-four" => sys(fx::Richardson::new(seed).four_minors(), 5),
        "hyperboloid" => sys(fx::hyperboloid(), 4),
        "point-times-surface" => sys(fx::point_times_surface(), 3),
        "three-lines" => sys(fx::three_lines(), 3),
        "crossing-lines" => sys(fx::crossing_lines(), 1),
        "parallel-lines" => sys(fx::parallel_lines(), 1),
        "pentad" => sys(fx::pentad(), 8),
        "six-forms" => {
            let (degrees, nvec) = fx::six_forms_class();
            Fixture::Class { degrees, nvec }
        }
        _ => return Err(Failure::Input(format!("unknown fixture {name}; known: {}", NAMES.join(", ")))),
    })
}
