use std::io::BufReader;

use cswarp_core::*;

#[test]
fn png_round_trip_quantizes_to_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("img.png");
    let img = ImageBuffer::from_fn(13, 9, 3, |x, y, px| {
        px[0] = x as f64 / 12.0;
        px[1] = y as f64 / 8.0;
        px[2] = 0.3;
    })
    .unwrap();
    save_png(&img, &path).unwrap();
    let back = load_png(&path).unwrap();
    assert!(back.same_shape(&img));
    for (a, b) in back.data().iter().zip(img.data()) {
        assert!((a - b).abs() <= 0.5 / 255.0 + 1e-12);
    }
    save_png(&back, &path).unwrap();
    assert_eq!(load_png(&path).unwrap(), back);
}

#[test]
fn missing_png_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let err = load_png(dir.path().join("absent.png")).unwrap_err();
    assert!(err.is_io());
}

#[test]
fn dfield_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.dfield");
    let config = WarpConfig::from_json(
        r#"{"grid":{"rows":3,"cols":3},"frame":{"width":20,"height":16},
            "theta":[[0,0],[0,0],[0,0],[0,0],[0.1,-0.05],[0,0],[0,0],[0,0],[0,0]],
            "kernel":{"family":"wendland31","alpha_hat":0.3}}"#,
    )
    .unwrap();
    let (_, model) = config.build().unwrap();
    let field = model.evaluate_field(&config.frame);
    field.write_dfield(std::fs::File::create(&path).unwrap()).unwrap();
    let back = DisplacementField::read_dfield(BufReader::new(std::fs::File::open(&path).unwrap()), true).unwrap();
    assert_eq!(back.width(), 20);
    for (a, b) in back.data().iter().zip(field.data()) {
        assert_eq!(a.x, a.x as f32 as f64);
        assert!((a.x - b.x).abs() < 1e-6 && (a.y - b.y).abs() < 1e-6);
    }
}

#[test]
fn warp_document_round_trips_losslessly() {
    let config = WarpConfig::from_json(
        r#"{"grid":{"rows":2,"cols":3},"frame":{"width":30,"height":20,"normalized":false},
            "theta":[[0.1,0.2],[0,0],[1.0000000000000002,-3],[0,0],[0.3,0.7],[0,0]],
            "kernel":{"family":"tps"}}"#,
    )
    .unwrap();
    let (_, model) = config.build().unwrap();
    let doc = WarpDocument::new(&config, &model);
    let text = doc.to_json();
    let back = WarpDocument::from_json(&text).unwrap();
    assert_eq!(back.to_json(), text);
    assert_eq!(back.model().unwrap(), model);
    assert_eq!(back.config(), config);
}
