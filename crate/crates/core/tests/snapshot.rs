use std::path::Path;

use proptest::prelude::*;
use vortex_blob::io::{decode_snapshot, encode_snapshot, read_snapshot, write_snapshot};
use vortex_blob::{Vec2, VortexSheet};

fn sheet_strategy() -> impl Strategy<Value = VortexSheet> {
    (2usize..40, 1e-6f64..10.0, 0.0f64..100.0).prop_flat_map(|(n, eps, time)| {
        let finite = -1e6f64..1e6;
        (
            prop::collection::vec((finite.clone(), finite.clone()), n),
            prop::collection::vec(finite, n),
        )
            .prop_map(move |(xy, weights)| {
                let mut alphas: Vec<f64> = (0..n)
                    .map(|j| std::f64::consts::PI * j as f64 / (n - 1) as f64)
                    .collect();
                // the quotient does not always round back to π exactly
                alphas[n - 1] = std::f64::consts::PI;
                let positions = xy.into_iter().map(|(x, y)| Vec2::new(x, y)).collect();
                VortexSheet::new(alphas, positions, weights, eps, time).unwrap()
            })
    })
}

proptest! {
    #[test]
    fn encode_decode_is_bitwise(sheet in sheet_strategy()) {
        let bytes = encode_snapshot(&sheet);
        let back = decode_snapshot(&bytes, Path::new("mem")).unwrap();
        prop_assert_eq!(encode_snapshot(&back), bytes);
        prop_assert_eq!(back, sheet);
    }

    #[test]
    fn any_truncation_is_rejected(sheet in sheet_strategy(), cut in 1usize..64) {
        let bytes = encode_snapshot(&sheet);
        let keep = bytes.len().saturating_sub(cut);
        prop_assert!(decode_snapshot(&bytes[..keep], Path::new("mem")).is_err());
    }
}

#[test]
fn file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.bin");
    let sheet =
        vortex_blob::sheet::discretize(vortex_blob::InitialDataKind::LoadedWing, 64, 0.1).unwrap();
    write_snapshot(&path, &sheet).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), encode_snapshot(&sheet));
    assert_eq!(read_snapshot(&path).unwrap(), sheet);
}
