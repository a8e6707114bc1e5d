use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::ScalarField;
use crate::math::{cos, sin, TAU};
use crate::{Error, Result};

/// Closed triangulated surface of genus 0 carrying a PL function.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangulatedSphere {
    values: Vec<f64>,
    triangles: Vec<[usize; 3]>,
    areas: Vec<f64>,
    total_area: f64,
}

impl TriangulatedSphere {
    /// Validates the combinatorics: every edge lies on exactly two
    /// triangles, the complex is connected and `V - E + F = 2`.
    pub fn new(values: Vec<f64>, triangles: Vec<[usize; 3]>, areas: Vec<f64>) -> Result<Self> {
        let n = values.len();
        if n < 4 {
            return Err(Error::NotSphere(format!("{n} vertices")));
        }
        if triangles.len() != areas.len() {
            return Err(Error::NotSphere(format!(
                "{} triangles but {} areas",
                triangles.len(),
                areas.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NotSphere(format!("vertex value {v}")));
        }
        if let Some(a) = areas.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
            return Err(Error::NotSphere(format!("triangle area {a}")));
        }
        let mut edges = Vec::with_capacity(3 * triangles.len());
        for t in &triangles {
            if t.iter().any(|&v| v >= n) || t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::NotSphere(format!("bad triangle {t:?}")));
            }
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                edges.push((a.min(b), a.max(b)));
            }
        }
        edges.sort_unstable();
        let mut e = 0usize;
        let mut k = 0;
        while k < edges.len() {
            let mut m = k;
            while m < edges.len() && edges[m] == edges[k] {
                m += 1;
            }
            if m - k != 2 {
                return Err(Error::NotSphere(format!(
                    "edge {:?} lies on {} triangles",
                    edges[k],
                    m - k
                )));
            }
            e += 1;
            k = m;
        }
        let chi = n as i64 - e as i64 + triangles.len() as i64;
        if chi != 2 {
            return Err(Error::NotSphere(format!("Euler characteristic {chi}")));
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(a, b) in edges.iter().step_by(2) {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
            }
        }
        let root = find(&mut parent, 0);
        if (0..n).any(|v| find(&mut parent, v) != root) {
            return Err(Error::NotSphere("complex is disconnected".into()));
        }
        let total_area = areas.iter().sum();
        Ok(Self {
            values,
            triangles,
            areas,
            total_area,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn total_area(&self) -> f64 {
        self.total_area
    }

    pub fn vertex_count(&self) -> usize {
        self.values.len()
    }

    /// Same triangulation with the function replaced by `f(value)`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
            triangles: self.triangles.clone(),
            areas: self.areas.clone(),
            total_area: self.total_area,
        }
    }

    /// `∫ F ω` with the vertex average on each triangle.
    pub fn integral(&self) -> f64 {
        self.triangles
            .iter()
            .zip(&self.areas)
            .map(|(t, a)| a * (self.values[t[0]] + self.values[t[1]] + self.values[t[2]]) / 3.0)
            .sum()
    }
}

/// Shape of the cap fans glued to the two ends of the annulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CapOptions {
    pub rings: usize,
    pub sectors: usize,
}

impl Default for CapOptions {
    fn default() -> Self {
        Self {
            rings: 8,
            sectors: 64,
        }
    }
}

/// Sphere of area `2A` obtained by gluing a disk of area `s` below the
/// annulus and one of area `2A - 1 - s` above it. `F = H` on the annulus and
/// 0 on both caps.
pub fn build_sphere(h: &ScalarField, s: f64, a: f64) -> Result<TriangulatedSphere> {
    build_sphere_with(h, s, a, CapOptions::default())
}

pub fn build_sphere_with(
    h: &ScalarField,
    s: f64,
    a: f64,
    caps: CapOptions,
) -> Result<TriangulatedSphere> {
    if !(a > 0.5 && a < 1.0) {
        return Err(Error::OutOfRange(format!("A = {a} must lie in (1/2, 1)")));
    }
    if !(s >= 0.0 && s <= 2.0 * a - 1.0 + 1e-12) {
        return Err(Error::OutOfRange(format!(
            "s = {s} must lie in [0, 2A - 1] = [0, {}]",
            2.0 * a - 1.0
        )));
    }
    if !h.is_autonomous() {
        return Err(Error::NotAutonomous);
    }
    if caps.rings == 0 || caps.sectors < 3 {
        return Err(Error::OutOfRange(format!("cap shape {caps:?}")));
    }
    let g = *h.grid();
    if !g.periodic_x || g.width != 1.0 || g.height != 1.0 {
        return Err(Error::OutOfRange(
            "field is not on the annulus chart".into(),
        ));
    }
    let (nt, nh) = (g.nx, g.ny);
    let samples = h.samples();
    let top = nh * nt;
    if samples[..nt]
        .iter()
        .chain(&samples[top..])
        .any(|&v| v != 0.0)
    {
        return Err(Error::NotCompactlySupported(
            "field does not vanish on the annulus boundary".into(),
        ));
    }

    let mut values = samples.to_vec();
    let cell = 1.0 / (2.0 * (nt * nh) as f64);
    let mut triangles = Vec::with_capacity(2 * nt * nh + 4 * caps.rings * caps.sectors);
    let mut areas = Vec::with_capacity(triangles.capacity());
    for j in 0..nh {
        for i in 0..nt {
            let i1 = (i + 1) % nt;
            let (p00, p10) = (j * nt + i, j * nt + i1);
            let (p01, p11) = (p00 + nt, p10 + nt);
            triangles.push([p00, p10, p11]);
            triangles.push([p00, p11, p01]);
            areas.push(cell);
            areas.push(cell);
        }
    }
    let bottom: Vec<usize> = (0..nt).collect();
    let upper: Vec<usize> = (top..top + nt).collect();
    add_cap(&mut values, &mut triangles, &mut areas, &bottom, s, caps);
    add_cap(
        &mut values,
        &mut triangles,
        &mut areas,
        &upper,
        (2.0 * a - 1.0 - s).max(0.0),
        caps,
    );

    let sphere = TriangulatedSphere::new(values, triangles, areas)?;
    let want = 2.0 * a;
    if (sphere.total_area - want).abs() > 1e-9 * want {
        return Err(Error::NotSphere(format!(
            "total area {} differs from 2A = {want}",
            sphere.total_area
        )));
    }
    Ok(sphere)
}

/// Concentric-ring fan filling the loop `rim` (vertices in angular order)
/// with a disk of the given area.
fn add_cap(
    values: &mut Vec<f64>,
    triangles: &mut Vec<[usize; 3]>,
    areas: &mut Vec<f64>,
    rim: &[usize],
    area: f64,
    caps: CapOptions,
) {
    let (rings, sectors) = (caps.rings, caps.sectors);
    let pole = values.len();
    values.extend(core::iter::repeat(0.0).take(1 + rings * sectors));
    let ring = |r: usize, m: usize| pole + 1 + r * sectors + m % sectors;
    let radius = |r: usize| (r + 1) as f64 / (rings + 1) as f64;

    let mut local: Vec<([usize; 3], [[f64; 2]; 3])> = Vec::new();
    let at = |rad: f64, turn: f64| [rad * cos(TAU * turn), rad * sin(TAU * turn)];
    let ring_pt = |r: usize, m: usize| at(radius(r), m as f64 / sectors as f64);
    for m in 0..sectors {
        local.push((
            [pole, ring(0, m), ring(0, m + 1)],
            [[0.0, 0.0], ring_pt(0, m), ring_pt(0, m + 1)],
        ));
    }
    for r in 0..rings - 1 {
        for m in 0..sectors {
            local.push((
                [ring(r, m), ring(r + 1, m), ring(r + 1, m + 1)],
                [ring_pt(r, m), ring_pt(r + 1, m), ring_pt(r + 1, m + 1)],
            ));
            local.push((
                [ring(r, m), ring(r + 1, m + 1), ring(r, m + 1)],
                [ring_pt(r, m), ring_pt(r + 1, m + 1), ring_pt(r, m + 1)],
            ));
        }
    }
    let nb = rim.len();
    let rim_pt = |k: usize| at(1.0, k as f64 / nb as f64);
    let outer = rings - 1;
    let (mut ia, mut ib) = (0usize, 0usize);
    while ia < sectors || ib < nb {
        let next_a = (ia + 1) as f64 / sectors as f64;
        let next_b = (ib + 1) as f64 / nb as f64;
        if ib == nb || (ia < sectors && next_a <= next_b) {
            local.push((
                [ring(outer, ia), ring(outer, ia + 1), rim[ib % nb]],
                [ring_pt(outer, ia), ring_pt(outer, ia + 1), rim_pt(ib)],
            ));
            ia += 1;
        } else {
            local.push((
                [ring(outer, ia), rim[ib], rim[(ib + 1) % nb]],
                [ring_pt(outer, ia), rim_pt(ib), rim_pt(ib + 1)],
            ));
            ib += 1;
        }
    }
    let planar: Vec<f64> = local.iter().map(|(_, p)| triangle_area(p)).collect();
    let sum: f64 = planar.iter().sum();
    let scale = area / sum;
    for ((t, _), a) in local.into_iter().zip(planar) {
        triangles.push(t);
        areas.push(a * scale);
    }
}

fn triangle_area(p: &[[f64; 2]; 3]) -> f64 {
    let (u, v) = (
        [p[1][0] - p[0][0], p[1][1] - p[0][1]],
        [p[2][0] - p[0][0], p[2][1] - p[0][1]],
    );
    0.5 * (u[0] * v[1] - u[1] * v[0]).abs()
}

/// Tetrahedron with the given vertex values and face areas, for tests.
#[doc(hidden)]
pub fn tetrahedron(values: [f64; 4], areas: [f64; 4]) -> Result<TriangulatedSphere> {
    TriangulatedSphere::new(
        values.to_vec(),
        vec![[0, 1, 2], [0, 3, 1], [1, 3, 2], [0, 2, 3]],
        areas.to_vec(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{parse_field_expression, AnnulusChart, Chart, SamplingOptions};

    fn field(expr: &str, n: usize) -> ScalarField {
        let chart = Chart::Annulus(AnnulusChart {
            collar: 0.05,
            ..AnnulusChart::with_resolution(n)
        });
        parse_field_expression(expr, &chart, SamplingOptions::default()).unwrap()
    }

    #[test]
    fn zero_field_sphere() {
        let s = build_sphere(&field("0", 32), 0.1, 0.75).unwrap();
        assert!((s.total_area() - 1.5).abs() < 1e-12);
        assert!(s.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cap_areas_at_boundary_parameter() {
        let s = build_sphere(&field("0", 16), 0.0, 0.8).unwrap();
        let annulus = 2 * 16 * 16;
        let caps = &s.areas()[annulus..];
        let (bottom, top) = caps.split_at(caps.len() / 2);
        assert_eq!(bottom.iter().sum::<f64>(), 0.0);
        assert!((top.iter().sum::<f64>() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        let f = field("h", 16);
        assert!(matches!(
            build_sphere(&f, 0.6, 0.75),
            Err(Error::OutOfRange(_))
        ));
        assert!(matches!(
            build_sphere(&f, -0.1, 0.75),
            Err(Error::OutOfRange(_))
        ));
        assert!(matches!(
            build_sphere(&f, 0.1, 0.5),
            Err(Error::OutOfRange(_))
        ));
        let unramped =
            ScalarField::from_fn_autonomous(AnnulusChart::with_resolution(8).grid(), |_, h| h)
                .unwrap();
        assert!(matches!(
            build_sphere(&unramped, 0.1, 0.75),
            Err(Error::NotCompactlySupported(_))
        ));
    }

    #[test]
    fn euler_check_rejects_non_spheres() {
        // two triangles glued along their boundary: every edge twice, chi = 2,
        // but fewer than four vertices
        let err = TriangulatedSphere::new(vec![0.0; 3], vec![[0, 1, 2], [0, 2, 1]], vec![1.0, 1.0]);
        assert!(matches!(err, Err(Error::NotSphere(_))));
        // an open fan: boundary edges appear once
        let err = TriangulatedSphere::new(vec![0.0; 4], vec![[0, 1, 2], [0, 2, 3]], vec![1.0, 1.0]);
        assert!(matches!(err, Err(Error::NotSphere(_))));
        assert!(tetrahedron([0.0; 4], [1.0; 4]).is_ok());
    }

    #[test]
    fn integral_of_h() {
        let s = build_sphere(&field("h", 64), 0.2, 0.75).unwrap();
        let direct = field("h", 64).integral_at(0.0);
        assert!((s.integral() - direct).abs() < 1e-9);
    }
}
