//! Nested-polygon skin cluster model over the YCb, YCr and CbCr planes.
//!
//! Training tallies skin pixels into three 256x256 density maps. Each map
//! yields an inner polygon (frequently observed chrominance) and an outer
//! polygon (observed at all). A pixel is `T1` when it projects inside all
//! three inner polygons, `T2` when inside all three outer ones, `T3`
//! otherwise.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MODEL_VERSION: &str = "skinseg-model/1";

const BINS: usize = 256;

/// A point in bin coordinates: `(row, col)` where the row axis is the
/// first component named by the plane.
pub type BinPoint = (i32, i32);

/// Which pair of YCbCr components indexes a density map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlaneId {
    YCb,
    YCr,
    CbCr,
}

impl PlaneId {
    pub const ALL: [PlaneId; 3] = [PlaneId::YCb, PlaneId::YCr, PlaneId::CbCr];

    pub fn name(self) -> &'static str {
        match self {
            PlaneId::YCb => "YCb",
            PlaneId::YCr => "YCr",
            PlaneId::CbCr => "CbCr",
        }
    }

    /// Projects a `(Y, Cb, Cr)` triplet onto this plane as `(row, col)`.
    #[inline]
    pub fn project(self, [y, cb, cr]: [u8; 3]) -> (u8, u8) {
        match self {
            PlaneId::YCb => (y, cb),
            PlaneId::YCr => (y, cr),
            PlaneId::CbCr => (cb, cr),
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for PlaneId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// 256x256 histogram of skin pixels projected onto one plane.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityMap {
    plane: PlaneId,
    bins: Vec<u64>,
    total: u64,
}

impl DensityMap {
    pub fn new(plane: PlaneId) -> Self {
        DensityMap {
            plane,
            bins: vec![0; BINS * BINS],
            total: 0,
        }
    }

    pub fn plane(&self) -> PlaneId {
        self.plane
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    #[inline]
    pub fn get(&self, row: u8, col: u8) -> u64 {
        self.bins[row as usize * BINS + col as usize]
    }

    /// Adds `count` observations at `(row, col)`.
    pub fn add(&mut self, row: u8, col: u8, count: u64) {
        self.bins[row as usize * BINS + col as usize] += count;
        self.total += count;
    }

    pub fn bins(&self) -> &[u64] {
        &self.bins
    }

    fn peak_of(values: &[u64]) -> u64 {
        values.iter().copied().max().unwrap_or(0)
    }

    /// 3x3 box sums with zero padding. The division by 9 is omitted since
    /// only ratios against the peak are used.
    fn box_sums(&self) -> Vec<u64> {
        let mut horiz = vec![0u64; BINS * BINS];
        for r in 0..BINS {
            let row = &self.bins[r * BINS..(r + 1) * BINS];
            for c in 0..BINS {
                let lo = c.saturating_sub(1);
                let hi = (c + 1).min(BINS - 1);
                horiz[r * BINS + c] = row[lo..=hi].iter().sum();
            }
        }
        let mut out = vec![0u64; BINS * BINS];
        for r in 0..BINS {
            let lo = r.saturating_sub(1);
            let hi = (r + 1).min(BINS - 1);
            for c in 0..BINS {
                out[r * BINS + c] = (lo..=hi).map(|rr| horiz[rr * BINS + c]).sum();
            }
        }
        out
    }
}

/// Tallies `(Y, Cb, Cr)` skin pixels into the three density maps, in
/// [`PlaneId::ALL`] order.
pub fn accumulate_density(skin_pixels: &[[u8; 3]]) -> Result<[DensityMap; 3]> {
    if skin_pixels.is_empty() {
        return Err(Error::EmptyTraining);
    }
    let mut maps = PlaneId::ALL.map(DensityMap::new);
    for &px in skin_pixels {
        for map in maps.iter_mut() {
            let (r, c) = map.plane.project(px);
            map.add(r, c, 1);
        }
    }
    Ok(maps)
}

/// Convex polygon in bin coordinates, counter-clockwise, starting at its
/// lexicographically smallest vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<BinPoint>", into = "Vec<BinPoint>")]
pub struct Polygon {
    vertices: Vec<BinPoint>,
}

#[inline]
fn cross(o: BinPoint, a: BinPoint, b: BinPoint) -> i64 {
    (a.0 - o.0) as i64 * (b.1 - o.1) as i64 - (a.1 - o.1) as i64 * (b.0 - o.0) as i64
}

impl Polygon {
    /// Validates and canonicalizes a convex counter-clockwise vertex list.
    pub fn new(vertices: Vec<BinPoint>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::ModelMalformed(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if let Some(p) = vertices
            .iter()
            .find(|p| !(0..=255).contains(&p.0) || !(0..=255).contains(&p.1))
        {
            return Err(Error::ModelMalformed(format!("vertex {p:?} outside [0,255]^2")));
        }
        let n = vertices.len();
        for i in 0..n {
            if cross(vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]) <= 0 {
                return Err(Error::ModelMalformed(
                    "polygon is not strictly convex and counter-clockwise".into(),
                ));
            }
        }
        let start = (0..n).min_by_key(|&i| vertices[i]).unwrap_or(0);
        let mut vertices = vertices;
        vertices.rotate_left(start);
        Ok(Polygon { vertices })
    }

    pub fn vertices(&self) -> &[BinPoint] {
        &self.vertices
    }

    /// Convex hull of `points`, or `None` when fewer than three of them are
    /// non-collinear.
    pub fn convex_hull(points: &[BinPoint]) -> Option<Polygon> {
        let mut pts = points.to_vec();
        pts.sort_unstable();
        pts.dedup();
        if pts.len() < 3 {
            return None;
        }
        // Andrew's monotone chain; collinear points are dropped.
        let mut hull: Vec<BinPoint> = Vec::with_capacity(pts.len() * 2);
        for &p in &pts {
            while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
                hull.pop();
            }
            hull.push(p);
        }
        let lower_len = hull.len() + 1;
        for &p in pts.iter().rev().skip(1) {
            while hull.len() >= lower_len
                && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
        if hull.len() < 3 {
            return None;
        }
        Some(Polygon { vertices: hull })
    }

    /// Axis-aligned square covering the 3x3 bins around `center`, clipped
    /// to the bin grid.
    pub fn square_around(center: BinPoint) -> Polygon {
        let lo = |v: i32| (v - 1).clamp(0, 254);
        let hi = |v: i32| (v + 1).clamp(1, 255);
        let (r0, r1) = (lo(center.0), hi(center.0));
        let (c0, c1) = (lo(center.1), hi(center.1));
        Polygon {
            vertices: vec![(r0, c0), (r1, c0), (r1, c1), (r0, c1)],
        }
    }

    /// Hull of `points`, falling back to the 3x3 square around their
    /// centroid when the set is degenerate.
    fn hull_or_square(points: &[BinPoint]) -> Polygon {
        Polygon::convex_hull(points).unwrap_or_else(|| {
            let n = points.len().max(1) as f64;
            let (sr, sc) = points.iter().fold((0i64, 0i64), |(a, b), p| {
                (a + p.0 as i64, b + p.1 as i64)
            });
            let center = ((sr as f64 / n).round() as i32, (sc as f64 / n).round() as i32);
            Polygon::square_around(center)
        })
    }

    /// Inclusive containment: boundary points count as inside.
    pub fn contains(&self, (x, y): (f64, f64)) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let (ax, ay) = (a.0 as f64, a.1 as f64);
            let (bx, by) = (b.0 as f64, b.1 as f64);
            (bx - ax) * (y - ay) - (by - ay) * (x - ax) >= 0.0
        })
    }
}

impl TryFrom<Vec<BinPoint>> for Polygon {
    type Error = Error;

    fn try_from(v: Vec<BinPoint>) -> Result<Self> {
        Polygon::new(v)
    }
}

impl From<Polygon> for Vec<BinPoint> {
    fn from(p: Polygon) -> Self {
        p.vertices
    }
}

pub fn point_in_polygon(poly: &Polygon, p: (f64, f64)) -> bool {
    poly.contains(p)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolygonPair {
    pub inner: Polygon,
    pub outer: Polygon,
}

impl PolygonPair {
    pub fn new(inner: Polygon, outer: Polygon) -> Result<Self> {
        if let Some(v) = inner
            .vertices()
            .iter()
            .find(|v| !outer.contains((v.0 as f64, v.1 as f64)))
        {
            return Err(Error::ModelMalformed(format!(
                "inner vertex {v:?} lies outside the outer polygon"
            )));
        }
        Ok(PolygonPair { inner, outer })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainParams {
    /// Inner cutoff as a fraction of the (smoothed) peak density.
    pub tau_in: f64,
    /// Outer cutoff as a fraction of the total mass, floored at one count.
    pub tau_out: f64,
    /// Apply a 3x3 box filter before the inner cutoff.
    pub smoothing: bool,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            tau_in: 0.05,
            tau_out: 1e-6,
            smoothing: true,
        }
    }
}

impl TrainParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_in > 0.0 && self.tau_in <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "tau_in must be in (0, 1], got {}",
                self.tau_in
            )));
        }
        if !(0.0..=1.0).contains(&self.tau_out) {
            return Err(Error::InvalidParams(format!(
                "tau_out must be in [0, 1], got {}",
                self.tau_out
            )));
        }
        Ok(())
    }
}

/// Fits the inner and outer polygons of one density map.
///
/// The outer hull is taken over the outer point set together with the
/// inner polygon's vertices, so the pair is always nested.
pub fn estimate_polygons(map: &DensityMap, params: &TrainParams) -> Result<PolygonPair> {
    params.validate()?;
    if map.total == 0 {
        return Err(Error::EmptyTraining);
    }
    let smoothed;
    let density: &[u64] = if params.smoothing {
        smoothed = map.box_sums();
        &smoothed
    } else {
        &map.bins
    };
    let peak = DensityMap::peak_of(density) as f64;
    let inner_cut = params.tau_in * peak;
    let outer_cut = (params.tau_out * map.total as f64).max(1.0);

    let mut inner_pts = Vec::new();
    let mut outer_pts = Vec::new();
    for r in 0..BINS {
        for c in 0..BINS {
            let i = r * BINS + c;
            let p = (r as i32, c as i32);
            if density[i] > 0 && density[i] as f64 >= inner_cut {
                inner_pts.push(p);
            }
            if map.bins[i] as f64 >= outer_cut {
                outer_pts.push(p);
            }
        }
    }

    let inner = Polygon::hull_or_square(&inner_pts);
    outer_pts.extend_from_slice(inner.vertices());
    let outer = Polygon::hull_or_square(&outer_pts);
    PolygonPair::new(inner, outer)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TernaryClass {
    T1,
    T2,
    T3,
}

impl TernaryClass {
    /// Gray level used in ternary images.
    pub fn level(self) -> u8 {
        match self {
            TernaryClass::T1 => 255,
            TernaryClass::T2 => 128,
            TernaryClass::T3 => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkinClusterModel {
    planes: [PolygonPair; 3],
    train_params: TrainParams,
}

impl SkinClusterModel {
    pub fn new(planes: [PolygonPair; 3], train_params: TrainParams) -> Self {
        SkinClusterModel {
            planes,
            train_params,
        }
    }

    /// Trains a model from `(Y, Cb, Cr)` skin pixels.
    pub fn train(skin_pixels: &[[u8; 3]], params: TrainParams) -> Result<Self> {
        params.validate()?;
        let maps = accumulate_density(skin_pixels)?;
        Self::from_density(&maps, params)
    }

    pub fn from_density(maps: &[DensityMap; 3], params: TrainParams) -> Result<Self> {
        let mut pairs = Vec::with_capacity(3);
        for plane in PlaneId::ALL {
            let map = maps
                .iter()
                .find(|m| m.plane == plane)
                .ok_or(Error::ModelMissingPlane(plane))?;
            pairs.push(estimate_polygons(map, &params)?);
        }
        let planes: [PolygonPair; 3] = pairs.try_into().expect("three planes");
        Ok(SkinClusterModel::new(planes, params))
    }

    pub fn plane(&self, id: PlaneId) -> &PolygonPair {
        &self.planes[id.slot()]
    }

    pub fn train_params(&self) -> &TrainParams {
        &self.train_params
    }

    pub fn classify(&self, ycbcr: [u8; 3]) -> TernaryClass {
        let mut all_inner = true;
        for plane in PlaneId::ALL {
            let (r, c) = plane.project(ycbcr);
            let p = (r as f64, c as f64);
            let pair = self.plane(plane);
            if !pair.outer.contains(p) {
                return TernaryClass::T3;
            }
            if all_inner && !pair.inner.contains(p) {
                all_inner = false;
            }
        }
        if all_inner {
            TernaryClass::T1
        } else {
            TernaryClass::T2
        }
    }

    /// Rasterizes the six polygons once for fast per-pixel lookups.
    pub fn lookup_tables(&self) -> ClassifierTables {
        let tables = PlaneId::ALL.map(|plane| {
            let pair = self.plane(plane);
            let mut t = vec![0u8; BINS * BINS];
            for r in 0..BINS {
                for c in 0..BINS {
                    let p = (r as f64, c as f64);
                    t[r * BINS + c] = if pair.inner.contains(p) && pair.outer.contains(p) {
                        2
                    } else if pair.outer.contains(p) {
                        1
                    } else {
                        0
                    };
                }
            }
            t
        });
        ClassifierTables { tables }
    }

    pub fn to_json(&self) -> String {
        let doc = ModelDoc {
            version: MODEL_VERSION.to_string(),
            train_params: self.train_params,
            planes: PlanesDoc {
                ycb: self.planes[0].clone(),
                ycr: self.planes[1].clone(),
                cbcr: self.planes[2].clone(),
            },
        };
        serde_json::to_string_pretty(&doc).expect("model serializes")
    }

    pub fn save(&self, mut w: impl std::io::Write) -> std::io::Result<()> {
        w.write_all(self.to_json().as_bytes())?;
        w.write_all(b"\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::ModelMalformed(e.to_string()))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::ModelMalformed("top level is not an object".into()))?;
        let version = obj
            .get("version")
            .and_then(|v| v.as_str())
            .ok_or_else(|| Error::ModelMalformed("missing version string".into()))?;
        if version != MODEL_VERSION {
            return Err(Error::ModelVersion {
                found: version.to_string(),
                expected: MODEL_VERSION,
            });
        }
        let train_params: TrainParams = serde_json::from_value(
            obj.get("train_params")
                .cloned()
                .ok_or_else(|| Error::ModelMalformed("missing train_params".into()))?,
        )
        .map_err(|e| Error::ModelMalformed(format!("train_params: {e}")))?;
        let planes = obj
            .get("planes")
            .and_then(|v| v.as_object())
            .ok_or_else(|| Error::ModelMalformed("missing planes object".into()))?;
        let mut pairs = Vec::with_capacity(3);
        for plane in PlaneId::ALL {
            let raw = planes
                .get(plane.name())
                .ok_or(Error::ModelMissingPlane(plane))?;
            let pair: PolygonPair = serde_json::from_value(raw.clone())
                .map_err(|e| Error::ModelMalformed(format!("plane {plane}: {e}")))?;
            pairs.push(PolygonPair::new(pair.inner, pair.outer)?);
        }
        let planes: [PolygonPair; 3] = pairs.try_into().expect("three planes");
        Ok(SkinClusterModel::new(planes, train_params))
    }

    pub fn load(mut r: impl std::io::Read) -> Result<Self> {
        let mut text = String::new();
        r.read_to_string(&mut text)
            .map_err(|e| Error::ModelMalformed(format!("not UTF-8 text: {e}")))?;
        Self::from_json(&text)
    }
}

pub fn classify_pixel(model: &SkinClusterModel, ycbcr: [u8; 3]) -> TernaryClass {
    model.classify(ycbcr)
}

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    version: String,
    train_params: TrainParams,
    planes: PlanesDoc,
}

#[derive(Serialize, Deserialize)]
struct PlanesDoc {
    #[serde(rename = "YCb")]
    ycb: PolygonPair,
    #[serde(rename = "YCr")]
    ycr: PolygonPair,
    #[serde(rename = "CbCr")]
    cbcr: PolygonPair,
}

/// Precomputed membership of every bin: 0 outside, 1 outer only, 2 inner.
#[derive(Debug, Clone)]
pub struct ClassifierTables {
    tables: [Vec<u8>; 3],
}

impl ClassifierTables {
    #[inline]
    pub fn classify(&self, ycbcr: [u8; 3]) -> TernaryClass {
        let mut level = 2u8;
        for (plane, table) in PlaneId::ALL.iter().zip(&self.tables) {
            let (r, c) = plane.project(ycbcr);
            level = level.min(table[r as usize * BINS + c as usize]);
            if level == 0 {
                return TernaryClass::T3;
            }
        }
        if level == 2 {
            TernaryClass::T1
        } else {
            TernaryClass::T2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Polygon {
        Polygon::new(vec![(0, 0), (1, 0), (1, 1), (0, 1)]).unwrap()
    }

    #[test]
    fn single_pixel_density() {
        let maps = accumulate_density(&[[100, 120, 140]]).unwrap();
        assert_eq!(maps[0].get(100, 120), 1);
        assert_eq!(maps[0].bins().iter().sum::<u64>(), 1);
        assert_eq!(maps[1].get(100, 140), 1);
        assert_eq!(maps[2].get(120, 140), 1);
        assert!(maps.iter().all(|m| m.total() == 1));
    }

    #[test]
    fn repeated_pixel_density() {
        let maps = accumulate_density(&[[7, 8, 9]; 5]).unwrap();
        assert_eq!(maps[0].get(7, 8), 5);
        assert_eq!(maps[1].get(7, 9), 5);
        assert_eq!(maps[2].get(8, 9), 5);
    }

    #[test]
    fn two_pixel_density() {
        let maps = accumulate_density(&[[10, 20, 30], [10, 20, 31]]).unwrap();
        assert_eq!(maps[0].get(10, 20), 2);
        assert_eq!(maps[2].get(20, 30), 1);
        assert_eq!(maps[2].get(20, 31), 1);
    }

    #[test]
    fn empty_training_is_an_error() {
        assert!(matches!(accumulate_density(&[]), Err(Error::EmptyTraining)));
        let empty = DensityMap::new(PlaneId::YCb);
        assert!(matches!(
            estimate_polygons(&empty, &TrainParams::default()),
            Err(Error::EmptyTraining)
        ));
    }

    #[test]
    fn single_bin_yields_square() {
        let mut map = DensityMap::new(PlaneId::CbCr);
        map.add(100, 150, 3);
        let square = Polygon::new(vec![(99, 149), (101, 149), (101, 151), (99, 151)]).unwrap();
        for smoothing in [true, false] {
            let params = TrainParams {
                smoothing,
                ..TrainParams::default()
            };
            let pair = estimate_polygons(&map, &params).unwrap();
            assert_eq!(pair.inner, square, "smoothing={smoothing}");
            assert_eq!(pair.outer, square, "smoothing={smoothing}");
        }
    }

    #[test]
    fn corner_bin_square_is_clipped() {
        let mut map = DensityMap::new(PlaneId::YCb);
        map.add(0, 255, 1);
        let params = TrainParams {
            smoothing: false,
            ..TrainParams::default()
        };
        let pair = estimate_polygons(&map, &params).unwrap();
        assert_eq!(pair.inner.vertices(), &[(0, 254), (1, 254), (1, 255), (0, 255)]);
    }

    #[test]
    fn uniform_map_covers_everything() {
        let mut map = DensityMap::new(PlaneId::YCr);
        for r in 0..=255u8 {
            for c in 0..=255u8 {
                map.add(r, c, 2);
            }
        }
        let full = vec![(0, 0), (255, 0), (255, 255), (0, 255)];
        let pair = estimate_polygons(&map, &TrainParams::default()).unwrap();
        assert_eq!(pair.inner.vertices(), full.as_slice());
        assert_eq!(pair.outer.vertices(), full.as_slice());
    }

    #[test]
    fn weak_far_bin_excluded_from_inner() {
        let mut map = DensityMap::new(PlaneId::YCb);
        // A small block around the peak so the inner set is non-degenerate.
        map.add(50, 50, 100);
        map.add(51, 50, 60);
        map.add(50, 52, 60);
        map.add(200, 200, 4);
        let params = TrainParams {
            tau_in: 0.05,
            tau_out: 1e-6,
            smoothing: false,
        };
        let pair = estimate_polygons(&map, &params).unwrap();
        // Qualifying inner bins (>= 5): the three near the peak.
        assert_eq!(pair.inner.vertices(), &[(50, 50), (51, 50), (50, 52)]);
        assert!(!pair.inner.contains((200.0, 200.0)));
        assert!(pair.outer.contains((200.0, 200.0)));
    }

    #[test]
    fn point_in_polygon_examples() {
        let sq = unit_square();
        assert!(point_in_polygon(&sq, (0.5, 0.5)));
        assert!(!point_in_polygon(&sq, (1000.0, 1000.0)));
        assert!(point_in_polygon(&sq, (1.0, 0.5)));
        assert!(point_in_polygon(&sq, (0.0, 0.0)));
        assert!(!point_in_polygon(&sq, (1.0001, 0.5)));
    }

    #[test]
    fn polygon_validation() {
        assert!(Polygon::new(vec![(0, 0), (1, 1)]).is_err());
        // Clockwise.
        assert!(Polygon::new(vec![(0, 0), (0, 1), (1, 1), (1, 0)]).is_err());
        assert!(Polygon::new(vec![(0, 0), (300, 0), (0, 1)]).is_err());
        // Rotated start is canonicalized.
        let p = Polygon::new(vec![(1, 1), (0, 1), (0, 0), (1, 0)]).unwrap();
        assert_eq!(p, unit_square());
    }

    #[test]
    fn hull_of_collinear_points_is_none() {
        assert!(Polygon::convex_hull(&[(0, 0), (1, 1), (2, 2), (3, 3)]).is_none());
        let h = Polygon::convex_hull(&[(0, 0), (2, 0), (1, 0), (2, 2), (0, 2), (1, 1)]).unwrap();
        assert_eq!(h.vertices(), &[(0, 0), (2, 0), (2, 2), (0, 2)]);
    }

    fn square_model() -> SkinClusterModel {
        // Inner: [100,150]^2 on every plane; outer: [50,200]^2.
        let inner = Polygon::new(vec![(100, 100), (150, 100), (150, 150), (100, 150)]).unwrap();
        let outer = Polygon::new(vec![(50, 50), (200, 50), (200, 200), (50, 200)]).unwrap();
        let pair = PolygonPair::new(inner, outer).unwrap();
        SkinClusterModel::new([pair.clone(), pair.clone(), pair], TrainParams::default())
    }

    #[test]
    fn classify_examples() {
        let m = square_model();
        assert_eq!(m.classify([120, 120, 120]), TernaryClass::T1);
        assert_eq!(m.classify([120, 120, 10]), TernaryClass::T3);
        // Outside only the YCb / YCr inner (Y = 180) but inside all outer.
        assert_eq!(m.classify([180, 120, 120]), TernaryClass::T2);
        // Outside exactly one inner: CbCr via Cr = 170 (also YCr).
        assert_eq!(m.classify([120, 120, 170]), TernaryClass::T2);
        let tables = m.lookup_tables();
        for px in [[120, 120, 120], [120, 120, 10], [180, 120, 120], [0, 0, 0], [200, 50, 200]] {
            assert_eq!(tables.classify(px), m.classify(px), "{px:?}");
        }
    }

    #[test]
    fn model_round_trip() {
        let m = square_model();
        let text = m.to_json();
        let back = SkinClusterModel::from_json(&text).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn load_errors_are_distinct() {
        let m = square_model();
        let mut doc: serde_json::Value = serde_json::from_str(&m.to_json()).unwrap();

        let mut missing = doc.clone();
        missing["planes"].as_object_mut().unwrap().remove("YCr");
        assert!(matches!(
            SkinClusterModel::from_json(&missing.to_string()),
            Err(Error::ModelMissingPlane(PlaneId::YCr))
        ));

        let mut wrong_version = doc.clone();
        wrong_version["version"] = "skinseg-model/99".into();
        assert!(matches!(
            SkinClusterModel::from_json(&wrong_version.to_string()),
            Err(Error::ModelVersion { .. })
        ));

        assert!(matches!(
            SkinClusterModel::from_json("{not json"),
            Err(Error::ModelMalformed(_))
        ));

        doc["planes"]["YCb"]["inner"] = serde_json::json!([[0, 0], [1, 1]]);
        assert!(matches!(
            SkinClusterModel::from_json(&doc.to_string()),
            Err(Error::ModelMalformed(_))
        ));
    }
}
