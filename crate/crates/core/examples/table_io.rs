//! Saves a table, reloads it, and mirrors it to CSV.

use geospec::geodesics;
use geospec::surfaces::Model;
use geospec::octagon_group;

fn main() {
    let model = Model::Octagon(octagon_group());
    let digest = model.digest();
    let table = geodesics::enumerate(&octagon_group(), digest, 7.0).expect("enumerate");
    let dir = std::env::temp_dir().join("geospec-table-io");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("octagon.geos");
    geodesics::save(&table, &path).unwrap();

    let back = geodesics::load(&path, &digest, model.rank()).unwrap();
    assert_eq!(back, table);
    println!("{} records, {} bytes at {}", back.len(), std::fs::metadata(&path).unwrap().len(), path.display());

    match geodesics::load(&path, &[0; 32], model.rank()) {
        Err(e) => println!("foreign digest rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    geodesics::write_csv(&back.truncated(4.0), std::io::stdout().lock()).unwrap();
}
