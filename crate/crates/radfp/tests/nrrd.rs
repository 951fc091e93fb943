use std::fs;

use proptest::prelude::*;
use radfp::nrrd::{load_volume, save_volume, save_volume_detached};
use radfp::Error;
use radfp_core::Volume;

fn header(fields: &str) -> Vec<u8> {
    format!("NRRD0004\n{fields}\n").into_bytes()
}

#[test]
fn zeros_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("z.nrrd");
    save_volume(&Volume::filled([2, 2, 2], 0.0).unwrap(), &p).unwrap();
    let v = load_volume(&p).unwrap();
    assert_eq!(v.dims(), [2, 2, 2]);
    assert_eq!(v.voxels(), &[0.0; 8]);
}

#[test]
fn single_voxel() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("one.nrrd");
    save_volume(&Volume::filled([1, 1, 1], 7.25).unwrap(), &p).unwrap();
    assert_eq!(load_volume(&p).unwrap().voxels(), &[7.25]);
}

#[test]
fn sizes_are_fastest_axis_first() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("r.nrrd");
    let v = Volume::new([2, 3, 4], (0..24).map(f64::from).collect(), [3.0, 2.0, 0.5]).unwrap();
    save_volume(&v, &p).unwrap();
    let text = fs::read(&p).unwrap();
    let head = String::from_utf8_lossy(&text[..120]);
    assert!(head.contains("sizes: 4 3 2"), "{head}");
    assert!(head.contains("spacings: 0.5 2 3"), "{head}");
    assert_eq!(load_volume(&p).unwrap(), v);
}

#[test]
fn payload_size_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("short.nrrd");
    let mut bytes = header("type: double\ndimension: 3\nsizes: 4 4 4\nencoding: raw\nendian: little\n");
    bytes.extend((0..63).flat_map(|i| f64::from(i).to_le_bytes()));
    fs::write(&p, bytes).unwrap();
    let err = load_volume(&p).unwrap_err();
    assert!(matches!(err, Error::PayloadSize { expected: 512, actual: 504, .. }));
    assert!(err.to_string().contains("payload size mismatch"));
}

#[test]
fn integer_types_and_big_endian() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.nrrd");
    let vals: [i16; 8] = [-3, 0, 1, 2, 300, -32768, 32767, 5];
    let mut bytes = header("type: short\ndimension: 3\nsizes: 2 2 2\nencoding: raw\nendian: big\n# comment\nkind:=ignored\n");
    bytes.extend(vals.iter().flat_map(|v| v.to_be_bytes()));
    fs::write(&p, bytes).unwrap();
    let v = load_volume(&p).unwrap();
    assert_eq!(v.voxels(), vals.map(f64::from).as_slice());

    let mut bytes = header("type: uchar\ndimension: 3\nsizes: 1 2 1\nencoding: raw\n");
    bytes.extend([200u8, 7]);
    fs::write(&p, bytes).unwrap();
    assert_eq!(load_volume(&p).unwrap().voxels(), &[200.0, 7.0]);
}

#[test]
fn detached_header() {
    let dir = tempfile::tempdir().unwrap();
    let (h, d) = (dir.path().join("v.nhdr"), dir.path().join("v.raw"));
    let v = Volume::new([3, 1, 2], vec![1.5, -2.0, 3.25, 0.0, 1e-300, 9.0], [1.0; 3]).unwrap();
    save_volume_detached(&v, &h, &d).unwrap();
    assert!(fs::read_to_string(&h).unwrap().contains("data file: v.raw"));
    assert_eq!(load_volume(&h).unwrap(), v);

    // float payload with a byte skip
    let mut raw = vec![0xAB; 4];
    raw.extend([1.0f32, 2.0].iter().flat_map(|x| x.to_le_bytes()));
    fs::write(&d, raw).unwrap();
    fs::write(&h, "NRRD0004\ntype: float\ndimension: 3\nsizes: 2 1 1\nencoding: raw\nendian: little\nbyte skip: 4\ndata file: v.raw\n").unwrap();
    assert_eq!(load_volume(&h).unwrap().voxels(), &[1.0, 2.0]);
}

fn field_error(fields: &str) -> String {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.nrrd");
    let mut bytes = header(fields);
    bytes.extend([0u8; 64]);
    fs::write(&p, bytes).unwrap();
    match load_volume(&p).unwrap_err() {
        Error::Parse { field, .. } => field,
        e => panic!("expected a parse error, got {e}"),
    }
}

#[test]
fn malformed_headers_name_the_field() {
    let base = "dimension: 3\nsizes: 2 2 2\nencoding: raw\nendian: little\n";
    assert_eq!(field_error(&format!("type: complex\n{base}")), "type");
    assert_eq!(field_error(&format!("{base}")), "type");
    assert_eq!(field_error("type: double\ndimension: 2\nsizes: 2 2\nencoding: raw\nendian: little\n"), "dimension");
    assert_eq!(field_error("type: double\ndimension: 3\nsizes: 2 0 2\nencoding: raw\nendian: little\n"), "sizes");
    assert_eq!(field_error("type: double\ndimension: 3\nsizes: 2 2 2\nencoding: gzip\nendian: little\n"), "encoding");
    assert_eq!(field_error("type: double\ndimension: 3\nsizes: 2 2 2\nencoding: raw\n"), "endian");
    assert_eq!(field_error("type: double\ndimension: 3\nsizes: 2 2 2\nencoding: raw\nendian: middle\n"), "endian");
    assert_eq!(field_error("type: double\ndimension: 3\nsizes: 2 2 2\nspacings: 1 -1 1\nencoding: raw\nendian: little\n"), "spacings");

    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("x.nrrd");
    fs::write(&p, b"P6\n").unwrap();
    assert!(matches!(load_volume(&p).unwrap_err(), Error::Parse { field, .. } if field == "magic"));
}

#[test]
fn non_finite_voxels_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("nan.nrrd");
    let mut bytes = header("type: double\ndimension: 3\nsizes: 1 1 2\nencoding: raw\nendian: little\n");
    bytes.extend([1.0, f64::NAN].iter().flat_map(|x| x.to_le_bytes()));
    fs::write(&p, bytes).unwrap();
    assert!(matches!(load_volume(&p).unwrap_err(), Error::Core(_)));
}

#[test]
fn io_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(load_volume(&dir.path().join("missing.nrrd")).unwrap_err(), Error::Io { .. }));
    let v = Volume::filled([1, 1, 1], 1.0).unwrap();
    // A path under a regular file cannot be created, even as root.
    let blocker = dir.path().join("file");
    fs::write(&blocker, b"").unwrap();
    assert!(matches!(save_volume(&v, &blocker.join("v.nrrd")).unwrap_err(), Error::Io { .. }));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn round_trip_is_bitwise(
        dims in prop::array::uniform3(1usize..6),
        seed in prop::collection::vec(-1e12f64..1e12, 1..216),
        spacing in prop::array::uniform3(0.01f64..10.0),
    ) {
        let n: usize = dims.iter().product();
        let voxels: Vec<f64> = (0..n).map(|i| seed[i % seed.len()] / (i as f64 + 1.0)).collect();
        let v = Volume::new(dims, voxels, spacing).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.nrrd");
        save_volume(&v, &p).unwrap();
        let back = load_volume(&p).unwrap();
        prop_assert_eq!(back.dims(), v.dims());
        prop_assert_eq!(back.spacing(), v.spacing());
        prop_assert!(back.voxels().iter().zip(v.voxels()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}
