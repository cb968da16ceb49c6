use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotePosition {
    pub id: u32,
    pub x_m: f64,
    pub y_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub motes: Vec<MotePosition>,
    pub gps_mote: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopologyKind {
    /// `ceil(sqrt(n))` columns, spacing `extent / (columns - 1)` on both axes.
    Grid,
    /// Independent uniform positions in `[0, extent]^2`.
    UniformRandom,
}

impl std::str::FromStr for TopologyKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "grid" => Ok(Self::Grid),
            "uniform-random" | "random" => Ok(Self::UniformRandom),
            _ => Err(format!("unknown topology kind {s:?} (expected grid or uniform-random)")),
        }
    }
}

impl Topology {
    pub fn position(&self, id: u32) -> Option<&MotePosition> {
        self.motes.iter().find(|m| m.id == id)
    }

    pub fn validate(&self) -> Result<(), String> {
        let mut ids: Vec<u32> = self.motes.iter().map(|m| m.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err("duplicate mote id".into());
        }
        if ids.binary_search(&self.gps_mote).is_err() {
            return Err(format!("gps mote {} is not in the topology", self.gps_mote));
        }
        if self.motes.iter().any(|m| !(m.x_m.is_finite() && m.y_m.is_finite())) {
            return Err("non-finite coordinate".into());
        }
        Ok(())
    }
}

/// Mote ids are `0..n`; the GPS mote is id 0.
pub fn generate_topology(kind: TopologyKind, n: usize, extent_m: f64, seed: u64) -> Result<Topology, String> {
    if n < 2 {
        return Err(format!("need at least 2 motes, got {n}"));
    }
    let motes = match kind {
        TopologyKind::Grid => {
            let cols = (n as f64).sqrt().ceil() as usize;
            let spacing = extent_m / (cols.max(2) - 1) as f64;
            (0..n)
                .map(|i| MotePosition {
                    id: i as u32,
                    x_m: (i % cols) as f64 * spacing,
                    y_m: (i / cols) as f64 * spacing,
                })
                .collect()
        }
        TopologyKind::UniformRandom => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n)
                .map(|i| MotePosition {
                    id: i as u32,
                    x_m: rng.random::<f64>() * extent_m,
                    y_m: rng.random::<f64>() * extent_m,
                })
                .collect()
        }
    };
    Ok(Topology { motes, gps_mote: 0 })
}
