//! Lists the shortest closed geodesics of the regular octagon surface.
//!
//! Usage: `cargo run --release --example octagon_spectrum [cutoff]`

use geospec::geodesics;
use geospec::octagon_group;

fn main() {
    let cutoff: f64 = std::env::args().nth(1).map(|s| s.parse().expect("cutoff")).unwrap_or(6.0);
    let model = octagon_group();
    let table = geodesics::enumerate(&model, [0; 32], cutoff).expect("enumerate");

    println!("{} classes up to length {cutoff}", table.len());
    let mut groups: Vec<(f64, usize)> = Vec::new();
    for r in &table.records {
        match groups.last_mut() {
            Some((l, n)) if (r.length - *l).abs() <= 1e-9 => *n += 1,
            _ => groups.push((r.length, 1)),
        }
    }
    for (l, n) in groups {
        println!("{l:>12.8}  x{n}");
    }
    println!("systole {:.12}", table.systole().unwrap());
}
