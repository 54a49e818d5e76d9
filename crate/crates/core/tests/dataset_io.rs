use proptest::prelude::*;
use satjam_core::dataset::{generate, generate_split, Dataset, PipelineConfig, ScenarioSpec, Split};
use satjam_core::jammer::AttackKind;
use satjam_core::{Error, Exec};

fn small() -> (ScenarioSpec, PipelineConfig) {
    let spec = ScenarioSpec {
        snr_levels: vec![5.0, 15.0],
        sjr_levels: vec![-20.0, 0.0],
        attack_kinds: AttackKind::JAMMING.to_vec(),
        n_train: 8,
        n_test: 6,
        seed: 42,
    };
    let mut pipeline = PipelineConfig::default();
    pipeline.waveform.frames_per_sample = 1;
    (spec, pipeline)
}

fn small_bytes() -> &'static [u8] {
    static BYTES: std::sync::OnceLock<Vec<u8>> = std::sync::OnceLock::new();
    BYTES.get_or_init(|| {
        let (spec, pipeline) = small();
        generate_split(&spec, &pipeline, Split::Test, Exec::Sequential).unwrap().to_bytes()
    })
}

#[test]
fn generation_is_deterministic_and_policy_independent() {
    let (spec, pipeline) = small();
    let (a_train, a_test) = generate(&spec, &pipeline, Exec::Parallel).unwrap();
    let (b_train, b_test) = generate(&spec, &pipeline, Exec::Sequential).unwrap();
    assert_eq!(a_train.to_bytes(), b_train.to_bytes());
    assert_eq!(a_test.to_bytes(), b_test.to_bytes());
    assert_eq!(a_test.to_bytes(), small_bytes());
    assert_ne!(a_train.images[0].pixels, a_test.images[0].pixels);
}

#[test]
fn labels_follow_attack_kind() {
    let (spec, pipeline) = small();
    let ds = generate_split(&spec, &pipeline, Split::Train, Exec::default()).unwrap();
    assert_eq!(ds.len(), 8);
    assert_eq!(ds.manifest.records.len(), ds.len());
    for (label, rec) in ds.labels.iter().zip(&ds.manifest.records) {
        assert_eq!(*label == 1, rec.tag.attack != AttackKind::None);
        assert_eq!(*label == 1, rec.tag.sjr_db.is_some());
    }
    assert_eq!(ds.labels.iter().filter(|&&l| l == 1).count(), 4);
}

#[test]
fn save_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("test.sjd");
    let ds = Dataset::from_bytes(small_bytes()).unwrap();
    ds.save(&path).unwrap();
    let back = Dataset::load(&path).unwrap();
    assert_eq!(back, ds);
    for (a, b) in back.images.iter().zip(&ds.images) {
        assert!(a.pixels.iter().zip(&b.pixels).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}

#[test]
fn format_errors_carry_offsets() {
    let bytes = small_bytes();
    let mut bad = bytes.to_vec();
    bad[0] = b'X';
    assert!(matches!(Dataset::from_bytes(&bad), Err(Error::Format { offset: 0, .. })));

    let mut bad = bytes.to_vec();
    bad[100] ^= 0x10;
    match Dataset::from_bytes(&bad) {
        Err(Error::Format { offset, reason }) => {
            assert_eq!(offset, bytes.len() - 4);
            assert!(reason.contains("checksum"));
        }
        other => panic!("expected checksum error, got {other:?}"),
    }

    let cut = &bytes[..bytes.len() / 2];
    assert!(matches!(Dataset::from_bytes(cut), Err(Error::Format { .. })));
    assert!(matches!(Dataset::from_bytes(&bytes[..10]), Err(Error::Format { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn any_single_byte_corruption_is_rejected(pos in 0usize..100_000, flip in 1u8..=255) {
        let bytes = small_bytes();
        let mut bad = bytes.to_vec();
        let pos = pos % bad.len();
        bad[pos] ^= flip;
        prop_assert!(Dataset::from_bytes(&bad).is_err());
    }
}
