// Writes a graph bundle, reads it back and packs it into a zip archive.

use girg_lab::bundle::{export_bundle, file_digest, read_bundle, write_bundle, DATA_FILES};
use girg_lab::{generate, Engine, GirgParams};

pub fn run_example() -> girg_lab::Result<()> {
    let dir = std::env::temp_dir().join(format!("girg-lab-bundle-{}", std::process::id()));
    let params = GirgParams::new(1000.0, 3, 2.6, 1.5)?.with_seed(77);
    let graph = generate(&params, Engine::Grid)?;
    write_bundle(&dir, &graph)?;
    for name in DATA_FILES {
        println!("{name:<13} {}", file_digest(&dir.join(name))?);
    }

    let back = read_bundle(&dir)?;
    assert_eq!(back.edges(), graph.edges());
    assert_eq!(back.vertices(), graph.vertices());

    let first = dir.join("a.zip");
    let second = dir.join("b.zip");
    export_bundle(&dir, &first)?;
    export_bundle(&dir, &second)?;
    assert_eq!(file_digest(&first)?, file_digest(&second)?);
    println!("archive {} is reproducible", file_digest(&first)?);
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

fn main() -> girg_lab::Result<()> {
    run_example()
}
