//! Generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use nfmimo::channel_db::{infer_wall, ChannelDatabase, GainCompensation};
use nfmimo::estimation::SourceEstimate;
use nfmimo::geometry::{
    distance, mirror_point, segment_crosses, visibility, Environment, Location, Wall, WallPath,
};
use nfmimo::propagation::{
    channel_from_sinks, channel_from_sources, enumerate_virtual_sinks, enumerate_virtual_sources,
    AntennaArray, Steering, Transmitter, VirtualSink,
};
use nfmimo::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Grid resolution of generated oracle cases. Coordinates are multiples of
/// `1 / GRID`, so every orientation test below is exact in both `f64` and
/// integer arithmetic.
pub const GRID: i64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IPoint {
    pub x: i64,
    pub y: i64,
}

impl IPoint {
    pub fn random(rng: &mut impl Rng, half_range: i64) -> Self {
        IPoint {
            x: rng.gen_range(-half_range..=half_range),
            y: rng.gen_range(-half_range..=half_range),
        }
    }

    pub fn loc(self) -> Location {
        Location::planar(self.x as f64 / GRID as f64, self.y as f64 / GRID as f64)
    }
}

fn sub(a: IPoint, b: IPoint) -> (i128, i128) {
    ((a.x - b.x) as i128, (a.y - b.y) as i128)
}

fn cross(u: (i128, i128), v: (i128, i128)) -> i128 {
    u.0 * v.1 - u.1 * v.0
}

fn dot(u: (i128, i128), v: (i128, i128)) -> i128 {
    u.0 * v.0 + u.1 * v.1
}

/// Open-segment intersection by solving `p + t (q - p) = a + u (b - a)` with
/// Cramer's rule, both parameters strictly inside `(0, 1)`. Parallel and
/// collinear segments never cross.
pub fn crosses_oracle(p: IPoint, q: IPoint, a: IPoint, b: IPoint) -> bool {
    let r = sub(q, p);
    let s = sub(b, a);
    let den = cross(r, s);
    if den == 0 {
        return false;
    }
    let ap = sub(a, p);
    let (t, u) = (cross(ap, s), cross(ap, r));
    let inside = |num: i128| {
        if den > 0 {
            num > 0 && num < den
        } else {
            num < 0 && num > den
        }
    };
    inside(t) && inside(u)
}

/// First-order specular path from `source` off wall `a`-`b` to `query`,
/// found without images: both points strictly on the same side of the wall
/// line, and the reflection point (which splits the along-wall projections
/// in the ratio of the two distances) strictly inside the segment.
pub fn reflects_oracle(source: IPoint, query: IPoint, a: IPoint, b: IPoint) -> bool {
    let w = sub(b, a);
    let len2 = dot(w, w);
    let ds = cross(w, sub(source, a));
    let dq = cross(w, sub(query, a));
    if ds == 0 || dq == 0 || (ds > 0) != (dq > 0) {
        return false;
    }
    let (ds, dq) = (ds.abs(), dq.abs());
    let along_s = dot(sub(source, a), w);
    let along_q = dot(sub(query, a), w);
    // reflection parameter times len2 * (ds + dq)
    let t = along_s * (ds + dq) + (along_q - along_s) * ds;
    t > 0 && t < len2 * (ds + dq)
}

/// Same oracle in floating point for arbitrary (off-grid) inputs.
pub fn reflects_oracle_f64(source: Location, query: Location, a: Location, b: Location) -> bool {
    let (wx, wy) = (b.x - a.x, b.y - a.y);
    let len2 = wx * wx + wy * wy;
    let cr = |p: Location| wx * (p.y - a.y) - wy * (p.x - a.x);
    let dt = |p: Location| wx * (p.x - a.x) + wy * (p.y - a.y);
    let (ds, dq) = (cr(source), cr(query));
    if ds == 0.0 || dq == 0.0 || (ds > 0.0) != (dq > 0.0) {
        return false;
    }
    let (ds, dq) = (ds.abs(), dq.abs());
    let t = dt(source) + (dt(query) - dt(source)) * ds / (ds + dq);
    t > 0.0 && t < len2
}

/// A double drawn from a wide mix: ordinary values, huge and tiny
/// magnitudes, subnormals and signed zeros.
pub fn awkward_f64(rng: &mut impl Rng) -> f64 {
    match rng.gen_range(0..6) {
        0 => rng.gen_range(-10.0..10.0),
        1 => f64::from_bits(
            rng.gen::<u64>() & !(0x7ffu64 << 52) | (rng.gen_range(1..0x7feu64) << 52),
        ),
        2 => f64::from_bits(rng.gen_range(1..1u64 << 52)) * if rng.gen() { 1.0 } else { -1.0 },
        3 => {
            if rng.gen() {
                0.0
            } else {
                -0.0
            }
        }
        4 => rng.gen::<f64>() * 1e-300,
        _ => rng.gen_range(-1.0..1.0) * 1e300,
    }
}

fn awkward_loc(rng: &mut impl Rng) -> Location {
    Location::new(awkward_f64(rng), awkward_f64(rng), awkward_f64(rng))
}

/// A random valid database with awkward but finite numbers.
pub fn random_db(rng: &mut impl Rng) -> ChannelDatabase {
    let m = rng.gen_range(1..6);
    let mut antennas: Vec<Location> = Vec::new();
    while antennas.len() < m {
        let l = awkward_loc(rng);
        if antennas.iter().all(|a| distance(a, &l) > 1e-3) {
            antennas.push(l);
        }
    }
    let n_walls = rng.gen_range(0..5);
    let walls: Vec<Wall> = (0..n_walls)
        .map(|_| loop {
            let a = Location::planar(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0));
            let b = Location::planar(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0));
            if let Ok(w) = Wall::new(a, b, rng.gen_range(0.0..=1.0f64).max(1e-12)) {
                break w;
            }
        })
        .collect();
    let sinks = antennas
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let mut list = vec![VirtualSink {
                antenna_index: i,
                location: l,
                gain: Complex64::new(1.0, 0.0),
                path: WallPath::direct(),
            }];
            if n_walls > 0 {
                for _ in 0..rng.gen_range(0..6) {
                    let order = rng.gen_range(1..4);
                    let mut ids: Vec<usize> = Vec::new();
                    while ids.len() < order {
                        let id = rng.gen_range(0..n_walls);
                        if ids.last() != Some(&id) {
                            ids.push(id);
                        } else if n_walls == 1 {
                            break;
                        }
                    }
                    list.push(VirtualSink {
                        antenna_index: i,
                        location: awkward_loc(rng),
                        gain: Complex64::new(awkward_f64(rng), awkward_f64(rng)),
                        path: WallPath::new(ids).unwrap(),
                    });
                }
            }
            list
        })
        .collect();
    ChannelDatabase::new(rng.gen_range(1e-3..10.0), antennas, sinks, walls).unwrap()
}

fn loc_bits(l: &Location) -> [u64; 3] {
    [l.x.to_bits(), l.y.to_bits(), l.z.to_bits()]
}

/// Bitwise equality of every number in two databases (so `-0.0 != 0.0`).
pub fn db_bits_equal(a: &ChannelDatabase, b: &ChannelDatabase) -> bool {
    a.wavelength().to_bits() == b.wavelength().to_bits()
        && a.array_locations().len() == b.array_locations().len()
        && a.array_locations()
            .iter()
            .zip(b.array_locations())
            .all(|(x, y)| loc_bits(x) == loc_bits(y))
        && a.walls().len() == b.walls().len()
        && a.walls().iter().zip(b.walls()).all(|(x, y)| {
            loc_bits(&x.a) == loc_bits(&y.a)
                && loc_bits(&x.b) == loc_bits(&y.b)
                && x.reflection_coefficient.to_bits() == y.reflection_coefficient.to_bits()
        })
        && a.sinks().len() == b.sinks().len()
        && a.sinks().iter().zip(b.sinks()).all(|(xs, ys)| {
            xs.len() == ys.len()
                && xs.iter().zip(ys).all(|(x, y)| {
                    x.antenna_index == y.antenna_index
                        && x.path == y.path
                        && loc_bits(&x.location) == loc_bits(&y.location)
                        && x.gain.re.to_bits() == y.gain.re.to_bits()
                        && x.gain.im.to_bits() == y.gain.im.to_bits()
                })
        })
}

fn random_wall_ipoints(rng: &mut impl Rng, half_range: i64) -> (IPoint, IPoint) {
    loop {
        let a = IPoint::random(rng, half_range);
        let b = IPoint::random(rng, half_range);
        if a != b {
            return (a, b);
        }
    }
}

/// Cases where `segment_crosses` and the Cramer oracle disagree. Half the
/// cases use a coarse grid so touching, collinear and parallel
/// configurations come up often.
pub fn crossing_disagreements(cases: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = Vec::new();
    for i in 0..cases {
        let half = if i % 2 == 0 { 4 } else { 8 * GRID };
        let (a, b) = random_wall_ipoints(&mut rng, half);
        let p = IPoint::random(&mut rng, half);
        let q = IPoint::random(&mut rng, half);
        let wall = Wall::new(a.loc(), b.loc(), 1.0).unwrap();
        let got = segment_crosses(&p.loc(), &q.loc(), &wall);
        let want = crosses_oracle(p, q, a, b);
        if got != want {
            bad.push(format!(
                "p={p:?} q={q:?} a={a:?} b={b:?}: got {got}, oracle {want}"
            ));
        }
    }
    bad
}

/// Cases where first-order `visibility` of an image disagrees with the
/// image-free reflection oracle. Even cases: axis-aligned walls on a coarse
/// grid (exact mirror images, many boundary hits). Odd cases: arbitrary
/// walls and points in general position.
pub fn visibility_disagreements(cases: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = Vec::new();
    for i in 0..cases {
        let (source, query, a, b, want) = if i % 2 == 0 {
            let half = 4;
            let (a, b) = loop {
                let a = IPoint::random(&mut rng, half);
                let b = if rng.gen() {
                    IPoint {
                        x: rng.gen_range(-half..=half),
                        y: a.y,
                    }
                } else {
                    IPoint {
                        x: a.x,
                        y: rng.gen_range(-half..=half),
                    }
                };
                if a != b {
                    break (a, b);
                }
            };
            let s = IPoint::random(&mut rng, half);
            let q = IPoint::random(&mut rng, half);
            (
                s.loc(),
                q.loc(),
                a.loc(),
                b.loc(),
                reflects_oracle(s, q, a, b),
            )
        } else {
            let mut pt = || Location::planar(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            let (a, b, s, q) = (pt(), pt(), pt(), pt());
            (s, q, a, b, reflects_oracle_f64(s, q, a, b))
        };
        let wall = Wall::new(a, b, 1.0).unwrap();
        let image = mirror_point(&source, &wall.line());
        // extra walls elsewhere must not matter for a first-order path
        let far = Wall::new(
            Location::planar(100.0, 100.0),
            Location::planar(101.0, 100.0),
            1.0,
        )
        .unwrap();
        let env = Environment::from_walls(vec![far, wall]).unwrap();
        let got = visibility(&image, &WallPath::new(vec![1]).unwrap(), &env, &query).unwrap();
        if got != want {
            bad.push(format!(
                "source={source} query={query} wall={a}-{b}: got {got}, oracle {want}"
            ));
        }
    }
    bad
}

/// Largest per-coefficient relative difference between the source-form and
/// sink-form channels over random first-order scenes.
pub fn duality_worst(scenes: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut done = 0;
    while done < scenes {
        let (w, d) = (rng.gen_range(1.0..10.0), rng.gen_range(1.0..10.0));
        let lambda = rng.gen_range(0.05..0.5);
        let env = Environment::rectangular_room(w, d, rng.gen_range(0.05..=1.0)).unwrap();
        let array = AntennaArray::perimeter(w, d, rng.gen_range(1..=64)).unwrap();
        let tx = Transmitter::new(
            Location::planar(rng.gen_range(0.0..w), rng.gen_range(0.0..d)),
            Complex64::from_polar(
                rng.gen_range(0.1..2.0),
                rng.gen_range(0.0..std::f64::consts::TAU),
            ),
        )
        .unwrap();
        let steering = Steering::paper(lambda).unwrap();
        let sources = enumerate_virtual_sources(&tx.location, &env, 1);
        let from_sources = match channel_from_sources(&tx, &sources, &array, &env, &steering) {
            Ok(h) => h,
            // a drop inside the steering guard of an antenna: redraw
            Err(nfmimo::Error::TooClose { .. }) => continue,
            Err(e) => panic!("{e}"),
        };
        let sinks = enumerate_virtual_sinks(&array, &env, 1);
        let from_sinks = channel_from_sinks(&tx, &sinks, &env, &steering).unwrap();
        for (x, y) in from_sources
            .coefficients
            .iter()
            .zip(&from_sinks.coefficients)
        {
            worst = worst.max((x - y).norm() / x.norm().max(y.norm()));
        }
        done += 1;
    }
    worst
}

/// Worst (line round-trip error in metres, coefficient error) of
/// `infer_wall` over random points and walls with exact amplitudes.
pub fn wall_identity_worst(pairs: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut line_err, mut coef_err) = (0.0f64, 0.0f64);
    let mut done = 0;
    while done < pairs {
        let mut pt = || Location::planar(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
        let (a, b, p) = (pt(), pt(), pt());
        let Ok(wall) = Wall::new(a, b, 1.0) else {
            continue;
        };
        let line = wall.line();
        if line.signed_distance(&p).abs() < 1e-3 {
            continue;
        }
        let r = rng.gen_range(0.01..=1.0);
        let g = Complex64::from_polar(
            rng.gen_range(0.1..10.0),
            rng.gen_range(0.0..std::f64::consts::TAU),
        );
        let mirror = mirror_point(&p, &line);
        let main = SourceEstimate {
            location: p,
            amplitude: g,
            peak_metric: 0.0,
        };
        let image = SourceEstimate {
            location: mirror,
            amplitude: g * r,
            peak_metric: 0.0,
        };
        let est = infer_wall(&main, &image, GainCompensation::None).unwrap();
        // the inferred line must map the main source onto its image and fix
        // the true wall's endpoints
        let back = mirror_point(&p, &est.line);
        line_err = line_err
            .max(distance(&back, &mirror))
            .max(est.line.signed_distance(&a).abs())
            .max(est.line.signed_distance(&b).abs());
        coef_err = coef_err.max((est.reflection_coefficient - r).abs());
        done += 1;
    }
    (line_err, coef_err)
}
