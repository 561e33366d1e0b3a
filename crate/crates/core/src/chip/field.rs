use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::constants::MU0_OVER_4PI;
use crate::error::{Error, Result};

/// Minimum distance from a wire filament at which fields are evaluated, m.
pub(crate) const ON_WIRE_TOLERANCE_M: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WireRole {
    Dc,
    Mw,
}

/// Straight filament from `start_m` to `end_m`. For `Mw` segments the
/// current is the peak phasor amplitude with phase `phase_rad`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WireSegment {
    pub start_m: [f64; 3],
    pub end_m: [f64; 3],
    pub current_a: f64,
    pub role: WireRole,
    #[serde(default)]
    pub phase_rad: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChipGeometry {
    pub segments: Vec<WireSegment>,
    pub bias_t: [f64; 3],
}

impl ChipGeometry {
    pub fn validate(&self) -> Result<()> {
        for (i, s) in self.segments.iter().enumerate() {
            let d = sub(&s.end_m, &s.start_m);
            if !(norm(&d) > 0.0) || !s.current_a.is_finite() {
                return Err(Error::invalid(format!("segment {i} needs nonzero length and a finite current")));
            }
        }
        if self.bias_t.iter().any(|b| !b.is_finite()) {
            return Err(Error::invalid("bias field must be finite"));
        }
        Ok(())
    }

    /// Copy shifted rigidly by `offset`.
    pub fn translated(&self, offset: [f64; 3]) -> Self {
        let mut g = self.clone();
        for s in &mut g.segments {
            s.start_m = add(&s.start_m, &offset);
            s.end_m = add(&s.end_m, &offset);
        }
        g
    }
}

pub(crate) fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn add(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub(crate) fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm(a: &[f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Field of one filament per unit current, T/A.
///
/// On the line through the segment but outside it the field vanishes; on
/// the segment itself it is undefined.
pub(crate) fn unit_field(start: &[f64; 3], end: &[f64; 3], p: &[f64; 3]) -> Result<[f64; 3]> {
    let l = sub(end, start);
    let r1 = sub(p, start);
    let r2 = sub(p, end);
    let c = cross(&l, &r1);
    let len = norm(&l);
    let dist = norm(&c) / len;
    if dist < ON_WIRE_TOLERANCE_M {
        let t = dot(&r1, &l) / (len * len);
        if (-ON_WIRE_TOLERANCE_M / len..=1.0 + ON_WIRE_TOLERANCE_M / len).contains(&t) {
            return Err(Error::Domain(format!("point {p:?} lies on a wire")));
        }
        return Ok([0.0; 3]);
    }
    let k = MU0_OVER_4PI / dot(&c, &c) * (dot(&l, &r1) / norm(&r1) - dot(&l, &r2) / norm(&r2));
    Ok(c.map(|v| k * v))
}

/// Field of a single segment at `p`, T.
pub fn segment_field(seg: &WireSegment, p: &[f64; 3]) -> Result<[f64; 3]> {
    Ok(unit_field(&seg.start_m, &seg.end_m, p)?.map(|v| v * seg.current_a))
}

/// Static field: dc segments plus the uniform bias, T.
pub fn biot_savart(geom: &ChipGeometry, p: &[f64; 3]) -> Result<[f64; 3]> {
    let mut b = geom.bias_t;
    for seg in geom.segments.iter().filter(|s| s.role == WireRole::Dc) {
        if seg.current_a == 0.0 {
            continue;
        }
        b = add(&b, &segment_field(seg, p)?);
    }
    Ok(b)
}

/// Rows of (position, static field, |B|, V_mw/h) on a regular grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldMap {
    pub points: Vec<[f64; 3]>,
    pub field_t: Vec<[f64; 3]>,
    pub v_mw_hz: Vec<f64>,
}

impl FieldMap {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let e = |e: csv::Error| Error::Parse(e.to_string());
        w.write_record(["x_m", "y_m", "z_m", "bx_t", "by_t", "bz_t", "b_abs_t", "v_mw_hz"]).map_err(e)?;
        for ((p, b), v) in self.points.iter().zip(&self.field_t).zip(&self.v_mw_hz) {
            let mut row: Vec<String> = p.iter().chain(b.iter()).map(|x| x.to_string()).collect();
            row.push(norm(b).to_string());
            row.push(v.to_string());
            w.write_record(&row).map_err(e)?;
        }
        w.flush().map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Samples the x–z plane at fixed y on an `nx` × `nz` grid spanning
/// `x_range` and `z_range` (inclusive).
pub fn field_map(
    geom: &ChipGeometry,
    y: f64,
    x_range: (f64, f64),
    z_range: (f64, f64),
    nx: usize,
    nz: usize,
) -> Result<FieldMap> {
    if nx < 2 || nz < 2 {
        return Err(Error::invalid("a field map needs at least 2 points per axis"));
    }
    let mut map = FieldMap { points: Vec::new(), field_t: Vec::new(), v_mw_hz: Vec::new() };
    for iz in 0..nz {
        let z = z_range.0 + (z_range.1 - z_range.0) * iz as f64 / (nz - 1) as f64;
        for ix in 0..nx {
            let x = x_range.0 + (x_range.1 - x_range.0) * ix as f64 / (nx - 1) as f64;
            let p = [x, y, z];
            map.field_t.push(biot_savart(geom, &p)?);
            map.v_mw_hz.push(super::v_mw(geom, &p)?);
            map.points.push(p);
        }
    }
    Ok(map)
}
