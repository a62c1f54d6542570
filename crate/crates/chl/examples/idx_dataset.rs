//! Round-trips a tiny dataset through the IDX binary format used by the
//! classic digit benchmarks: write image and label files, load them back,
//! and get train-ready vectors scaled to [0, 1].

use chl::data::load_idx;

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_be_bytes());
}

fn main() {
    // Three 2x2 images, one byte per pixel, magic 0x803 = unsigned bytes in
    // three dimensions.
    let mut images = Vec::new();
    put_u32(&mut images, 0x0000_0803);
    put_u32(&mut images, 3);
    put_u32(&mut images, 2);
    put_u32(&mut images, 2);
    images.extend_from_slice(&[
        0, 51, 102, 153, // image 0
        255, 204, 153, 102, // image 1
        0, 0, 255, 255, // image 2
    ]);

    let mut labels = Vec::new();
    put_u32(&mut labels, 0x0000_0801);
    put_u32(&mut labels, 3);
    labels.extend_from_slice(&[2, 0, 1]);

    let dir = tempfile::tempdir().unwrap();
    let images_path = dir.path().join("images-idx3-ubyte");
    let labels_path = dir.path().join("labels-idx1-ubyte");
    std::fs::write(&images_path, images).unwrap();
    std::fs::write(&labels_path, labels).unwrap();

    let dataset = load_idx(&images_path, &labels_path).unwrap();
    println!(
        "{} samples, {} inputs each, {} classes",
        dataset.len(),
        dataset.input_dim(),
        dataset.num_classes()
    );
    for i in 0..dataset.len() {
        println!(
            "  label {} pixels {:?}",
            dataset.label(i),
            dataset
                .input(i)
                .iter()
                .map(|p| format!("{p:.2}"))
                .collect::<Vec<_>>()
        );
    }
}
