//! Atom-chip magnetostatics: thin-filament Biot–Savart fields, magnetic trap
//! search, η-scaled transport and the microwave ac-Zeeman potential.
//!
//! Coordinates: the chip surface is the plane z = 0 and the atoms sit at
//! z > 0, so z is the atom–surface distance. Wires lie at z < 0.

mod config;
mod field;
mod mw;
mod trap;

pub use config::{eta_config, ChipConfig, ConfigWire, TrapConfig, WireGroup, CHIP_CONFIG_VERSION};
pub use field::{biot_savart, field_map, segment_field, ChipGeometry, FieldMap, WireRole, WireSegment};
pub use mw::{mw_components, mw_field, v_mw, MwComponents, MwFieldSample};
pub use trap::{find_trap, transport_trajectory, TrajectoryPoint, TrapSolution};
