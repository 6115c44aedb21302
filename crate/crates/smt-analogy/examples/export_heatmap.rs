//! Export an alignment score matrix as a grayscale PGM image.

use smt_analogy::heatmap::export_heatmap;
use smt_analogy::linalg::Mat;

fn main() {
    // A 4x6 score matrix with a bright diagonal band.
    let mut scores = Mat::zeros(4, 6);
    for i in 0..4 {
        for j in 0..6 {
            let distance = (i as f64 - j as f64).abs();
            scores.set(i, j, (1.0 - 0.35 * distance).clamp(0.05, 0.95));
        }
    }

    let path = std::env::temp_dir().join("smt-analogy-heatmap.pgm");
    export_heatmap(&scores, &path).expect("heatmap written");
    let bytes = std::fs::read(&path).unwrap();
    println!(
        "wrote {} ({} bytes, header {:?})",
        path.display(),
        bytes.len(),
        String::from_utf8_lossy(&bytes[..11]).trim_end()
    );
    println!("rows are base nodes, columns target nodes, pixel = round(255 * score)");
}
