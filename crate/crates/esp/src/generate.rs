//! Synthetic particle systems: random ±1 charges, a rock-salt lattice and a
//! lattice of rigid three-site water-like molecules.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use esp_core::ParticleSystem;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::CliError;

/// Hydrogen-site charge of the water-like motif; the oxygen site carries `-2 DELTA`.
pub const WATER_DELTA: f64 = 0.4238;
/// Site separation of the water-like motif as a fraction of the lattice spacing.
const WATER_BOND: f64 = 0.32;
/// H-O-H angle of the motif in degrees.
const WATER_ANGLE: f64 = 109.47;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    Random,
    Rocksalt,
    WaterLattice,
}

impl FromStr for GeneratorKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "random" => Ok(Self::Random),
            "rocksalt" => Ok(Self::Rocksalt),
            "water" | "water-like-lattice" => Ok(Self::WaterLattice),
            other => Err(CliError::Usage(format!("unknown generator kind `{other}`"))),
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Random => "random",
            Self::Rocksalt => "rocksalt",
            Self::WaterLattice => "water-like-lattice",
        })
    }
}

/// Everything needed to regenerate a system bit for bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub n: usize,
    pub box_lengths: [f64; 3],
    pub seed: u64,
}

pub fn generate_system(spec: &GeneratorSpec) -> Result<ParticleSystem, CliError> {
    if spec.n < 2 {
        return Err(CliError::Usage(
            "a generated system needs at least 2 particles".into(),
        ));
    }
    if spec.box_lengths.iter().any(|&l| l <= 0.0 || !l.is_finite()) {
        return Err(CliError::Usage("box lengths must be positive".into()));
    }
    let (positions, charges) = match spec.kind {
        GeneratorKind::Random => random(spec)?,
        GeneratorKind::Rocksalt => rocksalt(spec)?,
        GeneratorKind::WaterLattice => water_lattice(spec)?,
    };
    Ok(ParticleSystem::new(positions, charges, spec.box_lengths)?)
}

type Sites = (Vec<[f64; 3]>, Vec<f64>);

fn random(spec: &GeneratorSpec) -> Result<Sites, CliError> {
    if !spec.n.is_multiple_of(2) {
        return Err(CliError::Usage(format!(
            "random ±1 systems need an even particle count, got {}",
            spec.n
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let l = spec.box_lengths;
    let positions = (0..spec.n)
        .map(|_| [0, 1, 2].map(|d| rng.random::<f64>() * l[d]))
        .collect();
    let charges = (0..spec.n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    Ok((positions, charges))
}

/// Integer `m` with `m^3 = n`, if any.
fn cube_root(n: usize) -> Option<usize> {
    let guess = (n as f64).cbrt().round() as usize;
    (guess.saturating_sub(1)..=guess + 1).find(|m| m * m * m == n)
}

fn rocksalt(spec: &GeneratorSpec) -> Result<Sites, CliError> {
    let m = cube_root(spec.n).filter(|m| m % 2 == 0).ok_or_else(|| {
        CliError::Usage(format!(
            "rocksalt needs N = m^3 sites with m even (8 per conventional cell), got {}",
            spec.n
        ))
    })?;
    let a = spec.box_lengths.map(|l| l / m as f64);
    let mut positions = Vec::with_capacity(spec.n);
    let mut charges = Vec::with_capacity(spec.n);
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                positions.push([i as f64 * a[0], j as f64 * a[1], k as f64 * a[2]]);
                charges.push(if (i + j + k) % 2 == 0 { 1.0 } else { -1.0 });
            }
        }
    }
    Ok((positions, charges))
}

/// Uniform random rotation matrix from three uniforms (Shoemake's quaternion).
fn random_rotation(rng: &mut ChaCha8Rng) -> [[f64; 3]; 3] {
    let (u1, u2, u3): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    let (w, x, y, z) = (
        a * (2.0 * PI * u2).sin(),
        a * (2.0 * PI * u2).cos(),
        b * (2.0 * PI * u3).sin(),
        b * (2.0 * PI * u3).cos(),
    );
    [
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - z * w),
            2.0 * (x * z + y * w),
        ],
        [
            2.0 * (x * y + z * w),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - x * w),
        ],
        [
            2.0 * (x * z - y * w),
            2.0 * (y * z + x * w),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ]
}

fn water_lattice(spec: &GeneratorSpec) -> Result<Sites, CliError> {
    let m = spec
        .n
        .is_multiple_of(3)
        .then(|| cube_root(spec.n / 3))
        .flatten()
        .ok_or_else(|| {
            CliError::Usage(format!(
                "water-like lattice needs N = 3 m^3 sites, got {} (nearest: {})",
                spec.n,
                3 * ((spec.n as f64 / 3.0).cbrt().round() as usize).pow(3)
            ))
        })?;
    let a = spec.box_lengths.map(|l| l / m as f64);
    let bond = WATER_BOND * a.iter().cloned().fold(f64::INFINITY, f64::min);
    let half = 0.5 * WATER_ANGLE.to_radians();
    let motif = [
        [0.0, 0.0, 0.0],
        [bond * half.sin(), bond * half.cos(), 0.0],
        [-bond * half.sin(), bond * half.cos(), 0.0],
    ];
    let site_charges = [-2.0 * WATER_DELTA, WATER_DELTA, WATER_DELTA];
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut positions = Vec::with_capacity(spec.n);
    let mut charges = Vec::with_capacity(spec.n);
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let centre = [
                    (i as f64 + 0.5) * a[0],
                    (j as f64 + 0.5) * a[1],
                    (k as f64 + 0.5) * a[2],
                ];
                let rot = random_rotation(&mut rng);
                for (site, &q) in motif.iter().zip(&site_charges) {
                    let r = [0, 1, 2]
                        .map(|d| centre[d] + rot[d][0] * site[0] + rot[d][1] * site[1] + rot[d][2] * site[2]);
                    positions.push(r);
                    charges.push(q);
                }
            }
        }
    }
    Ok((positions, charges))
}
