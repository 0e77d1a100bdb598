use proptest::prelude::*;
use regchange::io::{decode_flo, encode_flo, read_mask_png, write_mask_png, decode_raw_raster, encode_raw_raster};
use regchange::net::{init_weights, ArchConfig, WeightStore};
use regchange::numerics::{BinaryMask, FlowField, RasterImage};
use regchange::Error;

#[test]
fn weight_container_round_trip_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let arch = ArchConfig::default();
    let store = init_weights(0, &arch);
    assert_eq!(store, init_weights(0, &arch));
    let (a, b) = (dir.path().join("a.bin"), dir.path().join("b.bin"));
    store.save(&a).unwrap();
    let loaded = WeightStore::load_for(&a, &arch).unwrap();
    loaded.save(&b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(loaded, store);
}

#[test]
fn truncated_container_is_a_format_error() {
    let bytes = init_weights(1, &ArchConfig::default()).encode();
    for cut in [0, 3, 7, 11, 20, bytes.len() / 2, bytes.len() - 1] {
        assert!(matches!(WeightStore::decode(&bytes[..cut]), Err(Error::Format { .. })), "cut {cut}");
    }
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(matches!(WeightStore::decode(&bad), Err(Error::Format { offset: 0, .. })));
}

#[test]
fn foreign_tensor_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let arch = ArchConfig::default();
    let mut store = init_weights(0, &arch);
    store.insert("extra.weight", regchange::net::Tensor::zeros(vec![2]));
    let path = dir.path().join("w.bin");
    store.save(&path).unwrap();
    assert!(matches!(WeightStore::load_for(&path, &arch), Err(Error::Schema(_))));
}

#[test]
fn mask_png_round_trip_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mask = BinaryMask::from_fn(13, 17, |y, x| (y * x) % 5 == 1);
    let (a, b) = (dir.path().join("a.png"), dir.path().join("b.png"));
    write_mask_png(&a, &mask).unwrap();
    let back = read_mask_png(&a).unwrap();
    write_mask_png(&b, &back).unwrap();
    assert_eq!(back, mask);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flo_round_trip(h in 0usize..6, w in 0usize..6, seed in any::<u32>()) {
        let flow = FlowField::<f32>::from_fn(h, w, |y, x| {
            let s = (seed as f32 + (y * 7 + x) as f32) * 0.013;
            (s.sin() * 40.0, s.cos() * -3.0)
        });
        let bytes = encode_flo(&flow);
        let back = decode_flo(&bytes).unwrap();
        prop_assert_eq!(&back, &flow);
        prop_assert_eq!(encode_flo(&back), bytes);
    }

    #[test]
    fn raw_raster_round_trip(h in 0usize..5, w in 0usize..5, c in 1usize..4, seed in any::<u32>()) {
        let r = RasterImage::<f32>::from_fn(h, w, c, |y, x, k| ((seed as usize + y * 31 + x * 7 + k) as f32).sqrt());
        let bytes = encode_raw_raster(&r);
        prop_assert_eq!(decode_raw_raster(&bytes).unwrap(), r);
    }
}
