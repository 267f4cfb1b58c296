//! Planar geometry for the image-source model.
//!
//! Points carry a `z` coordinate so distances stay three-dimensional, but every
//! reflection, bisector and crossing test works in the `z = 0` plane. Walls are
//! finite segments that reflect from both sides.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum separation for a point pair to define a bisector.
pub const MIN_PAIR_SEPARATION: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Location {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Location {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Location { x, y, z }
    }

    pub const fn planar(x: f64, y: f64) -> Self {
        Location { x, y, z: 0.0 }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    fn dot2(&self, other: &Location) -> f64 {
        self.x * other.x + self.y * other.y
    }

    fn norm2(&self) -> f64 {
        self.dot2(self).sqrt()
    }
}

impl From<[f64; 3]> for Location {
    fn from(v: [f64; 3]) -> Self {
        Location::new(v[0], v[1], v[2])
    }
}

impl From<Location> for [f64; 3] {
    fn from(l: Location) -> Self {
        [l.x, l.y, l.z]
    }
}

impl Add for Location {
    type Output = Location;
    fn add(self, o: Location) -> Location {
        Location::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Location {
    type Output = Location;
    fn sub(self, o: Location) -> Location {
        Location::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Location {
    type Output = Location;
    fn mul(self, s: f64) -> Location {
        Location::new(self.x * s, self.y * s, self.z * s)
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.6}, {:.6}, {:.6})", self.x, self.y, self.z)
    }
}

/// Euclidean distance between two points.
pub fn distance(p: &Location, q: &Location) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    let dz = p.z - q.z;
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// An infinite line in the plane, stored as a point and a unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallLine {
    point: Location,
    normal: Location,
}

impl WallLine {
    /// Builds a line through `point` with the given normal direction. The
    /// normal is rescaled to unit length.
    pub fn new(point: Location, normal: Location) -> Result<Self> {
        let n = Location::planar(normal.x, normal.y);
        let len = n.norm2();
        if !(len.is_finite() && len > 0.0) || !point.is_finite() {
            return Err(Error::InvalidGeometry(format!(
                "line through {point} with normal {normal} is degenerate"
            )));
        }
        Ok(WallLine {
            point: Location::planar(point.x, point.y),
            normal: n * (1.0 / len),
        })
    }

    pub fn point(&self) -> Location {
        self.point
    }

    pub fn unit_normal(&self) -> Location {
        self.normal
    }

    /// Unit direction along the line.
    pub fn tangent(&self) -> Location {
        Location::planar(-self.normal.y, self.normal.x)
    }

    /// Signed distance of `p` from the line, positive on the normal side.
    pub fn signed_distance(&self, p: &Location) -> f64 {
        (*p - self.point).dot2(&self.normal)
    }
}

/// A finite reflecting segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wall {
    pub a: Location,
    pub b: Location,
    pub reflection_coefficient: f64,
}

impl Wall {
    pub fn new(a: Location, b: Location, reflection_coefficient: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidGeometry(
                "wall endpoints must be finite".into(),
            ));
        }
        if distance(&a, &b) < MIN_PAIR_SEPARATION {
            return Err(Error::InvalidGeometry(format!(
                "wall endpoints {a} and {b} coincide"
            )));
        }
        if !(reflection_coefficient > 0.0 && reflection_coefficient <= 1.0) {
            return Err(Error::InvalidGeometry(format!(
                "reflection coefficient {reflection_coefficient} outside (0, 1]"
            )));
        }
        Ok(Wall {
            a,
            b,
            reflection_coefficient,
        })
    }

    pub fn line(&self) -> WallLine {
        let d = self.b - self.a;
        WallLine::new(self.a, Location::planar(-d.y, d.x))
            .expect("wall endpoints are distinct by construction")
    }
}

/// Index of a wall inside an [`Environment`].
pub type WallId = usize;

/// The ordered walls an image was reflected across, first reflection first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default, Hash)]
pub struct WallPath(Vec<WallId>);

impl WallPath {
    pub fn direct() -> Self {
        WallPath(Vec::new())
    }

    /// Builds a path, rejecting consecutive repeats.
    pub fn new(ids: Vec<WallId>) -> Result<Self> {
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidGeometry(format!(
                "wall path {ids:?} repeats a wall consecutively"
            )));
        }
        Ok(WallPath(ids))
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn ids(&self) -> &[WallId] {
        &self.0
    }

    pub fn last(&self) -> Option<WallId> {
        self.0.last().copied()
    }

    pub(crate) fn extended(&self, id: WallId) -> WallPath {
        let mut ids = self.0.clone();
        ids.push(id);
        WallPath(ids)
    }
}

/// Walls plus the rectangular room extent `[0, width] x [0, depth]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    pub walls: Vec<Wall>,
    pub width: f64,
    pub depth: f64,
}

impl Environment {
    pub fn new(walls: Vec<Wall>, width: f64, depth: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite() && depth > 0.0 && depth.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "room extent {width} x {depth} must be positive"
            )));
        }
        Ok(Environment {
            walls,
            width,
            depth,
        })
    }

    /// Rectangular room with walls in counterclockwise order: bottom, right,
    /// top, left, all sharing one reflection coefficient.
    pub fn rectangular_room(width: f64, depth: f64, reflection_coefficient: f64) -> Result<Self> {
        let c = [
            Location::planar(0.0, 0.0),
            Location::planar(width, 0.0),
            Location::planar(width, depth),
            Location::planar(0.0, depth),
        ];
        let walls = (0..4)
            .map(|i| Wall::new(c[i], c[(i + 1) % 4], reflection_coefficient))
            .collect::<Result<Vec<_>>>()?;
        Environment::new(walls, width, depth)
    }

    /// Environment whose extent is the bounding box of the given walls.
    pub fn from_walls(walls: Vec<Wall>) -> Result<Self> {
        let (mut w, mut d) = (0.0f64, 0.0f64);
        for wall in &walls {
            w = w.max(wall.a.x).max(wall.b.x);
            d = d.max(wall.a.y).max(wall.b.y);
        }
        Environment::new(walls, w.max(f64::MIN_POSITIVE), d.max(f64::MIN_POSITIVE))
    }

    pub fn wall(&self, id: WallId) -> Result<&Wall> {
        self.walls.get(id).ok_or(Error::UnknownWall {
            id,
            count: self.walls.len(),
        })
    }

    pub fn contains(&self, p: &Location) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.depth).contains(&p.y)
    }
}

/// Reflects `p` across a line. The `z` coordinate is untouched.
pub fn mirror_point(p: &Location, line: &WallLine) -> Location {
    let d = line.signed_distance(p);
    Location::new(
        p.x - 2.0 * d * line.normal.x,
        p.y - 2.0 * d * line.normal.y,
        p.z,
    )
}

/// The line across which `p` and `q` are mirror images.
pub fn perpendicular_bisector(p: &Location, q: &Location) -> Result<WallLine> {
    let d = Location::planar(q.x - p.x, q.y - p.y);
    if d.norm2() < MIN_PAIR_SEPARATION {
        return Err(Error::DegeneratePair(format!(
            "{p} and {q} are too close to define a bisector"
        )));
    }
    let mid = Location::planar(0.5 * (p.x + q.x), 0.5 * (p.y + q.y));
    WallLine::new(mid, d)
}

fn orient(a: &Location, b: &Location, p: &Location) -> f64 {
    (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)
}

fn opposite(u: f64, v: f64) -> bool {
    (u > 0.0 && v < 0.0) || (u < 0.0 && v > 0.0)
}

/// Proper crossing of the open segment `p`-`q` with the open wall segment.
///
/// Touching an endpoint or running collinear is not a crossing.
pub fn segment_crosses(p: &Location, q: &Location, w: &Wall) -> bool {
    // canonical order makes the predicate exactly symmetric in (p, q)
    let (p, q) = if (p.x, p.y) <= (q.x, q.y) {
        (p, q)
    } else {
        (q, p)
    };
    opposite(orient(&w.a, &w.b, p), orient(&w.a, &w.b, q))
        && opposite(orient(p, q, &w.a), orient(p, q, &w.b))
}

/// Point where the segment `p`-`q` meets the line of `w`. Only meaningful
/// after [`segment_crosses`] returned true.
fn crossing_point(p: &Location, q: &Location, line: &WallLine) -> Location {
    let dp = line.signed_distance(p);
    let dq = line.signed_distance(q);
    let t = dp / (dp - dq);
    Location::planar(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y))
}

/// Convex hull of `points` in the plane, counterclockwise, without collinear
/// vertices. Fewer than three vertices means the points have no interior.
pub fn convex_hull(points: &[Location]) -> Vec<Location> {
    let mut pts: Vec<Location> = points.iter().map(|p| Location::planar(p.x, p.y)).collect();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Location> = Vec::with_capacity(pts.len() + 1);
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Location>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for p in iter {
            while hull.len() >= start + 2
                && orient(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0
            {
                hull.pop();
            }
            hull.push(*p);
        }
        hull.pop();
    }
    hull
}

/// Visibility-sector indicator: whether the image at `image` (generated by
/// reflecting across `path` in order) reaches `query` along a physical
/// specular path.
///
/// The ray is unfolded from the last reflection back to the first; every leg
/// must cross the interior of its wall segment.
pub fn visibility(
    image: &Location,
    path: &WallPath,
    env: &Environment,
    query: &Location,
) -> Result<bool> {
    for &id in path.ids() {
        env.wall(id)?;
    }
    let mut img = *image;
    let mut target = *query;
    for &id in path.ids().iter().rev() {
        let wall = &env.walls[id];
        if !segment_crosses(&img, &target, wall) {
            return Ok(false);
        }
        let line = wall.line();
        target = crossing_point(&img, &target, &line);
        img = mirror_point(&img, &line);
    }
    Ok(true)
}
