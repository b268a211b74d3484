//! Condition numbers of the transfer matrix for every angle and
//! current combination, printed as CSV.
//!
//! Usage: `cargo run --example condition_table -- [vertices]`

use aet_core::illposed::{condition_table, TableSettings};
use aet_core::mesh::generate_disk_mesh;
use aet_core::phantom::default_phantom;

fn main() -> aet_core::Result<()> {
    let target = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("vertex count"))
        .unwrap_or(500);
    let mesh = generate_disk_mesh(target)?;
    let sigma = default_phantom().on_mesh(&mesh);
    eprintln!("mesh: {} vertices", mesh.num_vertices());
    let table = condition_table(&mesh, &sigma, &TableSettings::default())?;
    print!("{}", table.to_csv());
    Ok(())
}
