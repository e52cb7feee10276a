//! Cusp counts of the conjugate locus over a band around the equator of the
//! sectoral harmonic surface `r = 1 + 0.1 sin³θ cos 3φ`.
//!
//! Run with `cargo run --release --example sectoral_region_map [n_theta n_phi]`.
//! The default 12×48 grid takes about a minute per core.

use conjloc::scan::{region_map, RegionMapOptions};
use conjloc::SurfaceModel;

fn main() -> conjloc::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("grid sizes are integers"));
    let n_theta = args.next().unwrap_or(12);
    let n_phi = args.next().unwrap_or(48);
    let h = SurfaceModel::sectoral_harmonic(3, 0.1)?;
    let opts = RegionMapOptions {
        n_theta,
        n_phi,
        ..RegionMapOptions::default()
    };
    let map = region_map(&h, &opts)?;
    println!("counts seen: {:?}", map.distinct_counts());
    println!("rows are theta, columns phi in [0, 2pi); 8 cusps '#', 6 cusps '.'");
    for (i, t) in map.theta.iter().enumerate() {
        let row: String = (0..n_phi)
            .map(|j| match map.count(i, j) {
                None => '?',
                Some(8) => '#',
                Some(6) => '.',
                Some(c) => char::from_digit(c as u32 % 10, 10).unwrap(),
            })
            .collect();
        println!("{t:6.3} {row}");
    }
    println!("{} boundary cells", map.boundary.iter().filter(|b| **b).count());
    Ok(())
}
