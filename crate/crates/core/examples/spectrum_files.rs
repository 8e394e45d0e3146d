//! Writing a spectrum with its metadata sidecar and reading it back.

use polariton::io::{read_spectrum, spectrum_to_csv, ArtifactWriter};
use polariton::quantum::{linear_transmission, QmParams};
use polariton::spectrum::uniform_grid;

fn main() -> polariton::Result<()> {
    let dir = std::env::temp_dir().join("polariton-spectrum-files");
    let p = QmParams::w_co6();
    let spectrum = linear_transmission(&p, &uniform_grid(1900.0, 2060.0, 0.1)?)?;

    let mut writer = ArtifactWriter::new(&dir)?;
    let bytes = spectrum_to_csv(&spectrum, 9)?;
    let path = writer.write_with_sidecar("linear.csv", &bytes, &p)?;
    println!("wrote {} ({} bytes)", path.display(), bytes.len());

    let back = read_spectrum(&path)?;
    let worst = spectrum
        .channel("T")
        .unwrap()
        .iter()
        .zip(back.channel("T").unwrap())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("{} rows read back, largest change {worst:.1e}", back.len());
    Ok(())
}
