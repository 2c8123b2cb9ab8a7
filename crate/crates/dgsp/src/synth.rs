//! Deterministic stand-ins for published raw dataset files.
//!
//! The generators write documents in the same schema the adapters read, so
//! the whole convert → prepare → train pipeline can run offline. Sizes match
//! the published datasets; values are synthetic.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::adapters::DatasetKind;
use crate::error::{Error, Result};

/// Hungarian counties in the order the chickenpox file lists them.
pub const CHICKENPOX_COUNTIES: [&str; 20] = [
    "BUDAPEST", "BARANYA", "BACS", "BEKES", "BORSOD", "CSONGRAD", "FEJER", "GYOR", "HAJDU", "HEVES", "JASZ",
    "KOMAROM", "NOGRAD", "PEST", "SOMOGY", "SZABOLCS", "TOLNA", "VAS", "VESZPREM", "ZALA",
];

/// Shared county borders, by index into [`CHICKENPOX_COUNTIES`].
const COUNTY_BORDERS: [(usize, usize); 41] = [
    (0, 13),
    (1, 14),
    (1, 16),
    (1, 2),
    (2, 16),
    (2, 6),
    (2, 13),
    (2, 10),
    (2, 5),
    (3, 5),
    (3, 10),
    (3, 8),
    (4, 12),
    (4, 9),
    (4, 10),
    (4, 8),
    (4, 15),
    (5, 10),
    (6, 13),
    (6, 11),
    (6, 18),
    (6, 14),
    (6, 16),
    (7, 11),
    (7, 18),
    (7, 17),
    (8, 15),
    (8, 10),
    (9, 12),
    (9, 13),
    (9, 10),
    (10, 13),
    (11, 18),
    (11, 13),
    (12, 13),
    (14, 16),
    (14, 18),
    (14, 19),
    (17, 18),
    (17, 19),
    (18, 19),
];

/// Rough relative case volume per county.
const COUNTY_SCALE: [f64; 20] =
    [60.0, 12.0, 18.0, 12.0, 25.0, 15.0, 15.0, 15.0, 20.0, 10.0, 13.0, 10.0, 7.0, 35.0, 10.0, 20.0, 8.0, 9.0, 11.0, 9.0];

const WEEKS_PER_YEAR: f64 = 52.18;

/// Raw document for `kind`, or an error if no generator exists for it.
pub fn surrogate(kind: DatasetKind, seed: u64) -> Result<Value> {
    match kind {
        DatasetKind::Chickenpox => Ok(chickenpox(seed, 520)),
        DatasetKind::PedalMe => Ok(pedalme(seed, 30)),
        other => Err(Error::Usage(format!("no surrogate generator for {}", other.name()))),
    }
}

/// Undirected county graph stored as both directions plus a self-loop per
/// county: 2 * 41 + 20 = 102 edges.
pub fn chickenpox_edges() -> Vec<[usize; 2]> {
    let mut edges: Vec<[usize; 2]> = Vec::with_capacity(102);
    for &(a, b) in &COUNTY_BORDERS {
        edges.push([a, b]);
        edges.push([b, a]);
    }
    edges.extend((0..20).map(|i| [i, i]));
    edges.sort_unstable();
    edges
}

/// Weekly case counts: a yearly epidemic wave with a per-year peak week and
/// amplitude, modulated by a spatially coupled log-normal process, then
/// Poisson sampled.
pub fn chickenpox(seed: u64, weeks: usize) -> Value {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = COUNTY_SCALE.len();
    let mut neighbours = vec![Vec::new(); n];
    for &(a, b) in &COUNTY_BORDERS {
        neighbours[a].push(b);
        neighbours[b].push(a);
    }
    let years = weeks / 52 + 2;
    let peaks: Vec<f64> = (0..years).map(|_| rng.gen_range(9.0..18.0)).collect();
    let amplitudes: Vec<f64> = (0..years).map(|_| rng.gen_range(0.7..1.4)).collect();
    let phase: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();

    let mut latent = vec![0.0; n];
    let mut rows = Vec::with_capacity(weeks);
    for t in 0..weeks {
        let prev = latent.clone();
        for c in 0..n {
            let coupled = neighbours[c].iter().map(|&j| prev[j]).sum::<f64>() / neighbours[c].len() as f64;
            latent[c] = 0.7 * prev[c] + 0.2 * coupled + 0.25 * normal(&mut rng);
        }
        let year = (t as f64 / WEEKS_PER_YEAR) as usize;
        let week = t as f64 - year as f64 * WEEKS_PER_YEAR;
        let row: Vec<f64> = (0..n)
            .map(|c| {
                let season = (2.0 * PI * (week - peaks[year] - phase[c]) / WEEKS_PER_YEAR).cos();
                let rate = COUNTY_SCALE[c] * amplitudes[year] * (1.6 * season + latent[c]).exp();
                poisson(&mut rng, rate) as f64
            })
            .collect();
        rows.push(row);
    }
    json!({ "edges": chickenpox_edges(), "FX": rows })
}

/// Weekly deliveries for 15 London localities on a complete weighted graph
/// (self-loops included: 225 edges).
pub fn pedalme(seed: u64, weeks: usize) -> Value {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED);
    let n = 15;
    let coords: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0))).collect();
    let mut edges = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let (dx, dy) = (coords[i].0 - coords[j].0, coords[i].1 - coords[j].1);
            edges.push([i, j]);
            weights.push(round3((-(dx * dx + dy * dy).sqrt() / 4.0).exp()));
        }
    }
    let base: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..12.0)).collect();
    let mut level = vec![0.0; n];
    let rows: Vec<Vec<f64>> = (0..weeks)
        .map(|t| {
            let trend = 1.0 + 0.03 * t as f64;
            (0..n)
                .map(|i| {
                    level[i] = 0.6 * level[i] + 0.3 * normal(&mut rng);
                    poisson(&mut rng, base[i] * trend * level[i].exp()) as f64
                })
                .collect()
        })
        .collect();
    json!({ "edges": edges, "weights": weights, "X": rows, "time_periods": weeks })
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Knuth's product method below 30, rounded normal approximation above.
fn poisson<R: Rng>(rng: &mut R, rate: f64) -> u64 {
    if rate < 30.0 {
        let limit = (-rate).exp();
        let mut k = 0;
        let mut p: f64 = rng.gen();
        while p > limit {
            k += 1;
            p *= rng.gen::<f64>();
        }
        k
    } else {
        (rate + rate.sqrt() * normal(rng)).round().max(0.0) as u64
    }
}
