use entmetrics::codec::{read_embeddings, read_labels, write_embeddings, write_labels, decode_embeddings, encode_embeddings, Format};
use entmetrics::{EmbeddingSet, Labels};
use proptest::prelude::*;

fn temp_path(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("entmetrics-codec-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn file_round_trips() {
    let set = EmbeddingSet::from_rows(&[vec![0.5, -1.25, 3.0], vec![1e-3, 2.0, -0.0]]).unwrap();
    let as_f32 = set.map_rows(3, |_, r, o| o.iter_mut().zip(r).for_each(|(o, x)| *o = *x as f32 as f64)).unwrap();
    for (name, want) in [("x.emb", &as_f32), ("x.csv", &set)] {
        let path = temp_path(name);
        write_embeddings(&path, &set).unwrap();
        assert_eq!(&read_embeddings(&path).unwrap(), want);
    }
    let labels = Labels::from_names(["cat", "dog", "cat"]);
    let path = temp_path("x.labels");
    write_labels(&path, &labels).unwrap();
    assert_eq!(read_labels(&path).unwrap(), labels);
}

#[test]
fn missing_file_is_an_error() {
    assert!(read_embeddings(&temp_path("absent.emb")).is_err());
}

#[test]
fn csv_comments_and_blank_lines() {
    let set = decode_embeddings(b"# header\n1,2\n\n3,4\n", Format::Csv).unwrap();
    assert_eq!(set.as_slice(), &[1.0, 2.0, 3.0, 4.0]);
    assert!(decode_embeddings(b"1,2\n3\n", Format::Csv).is_err());
    assert!(decode_embeddings(b"1,nan\n", Format::Csv).is_err());
}

proptest! {
    #[test]
    fn binary_round_trip_is_exact_for_f32(values in proptest::collection::vec(-1e6f32..1e6, 1..64), d in 1usize..5) {
        let n = values.len() / d;
        prop_assume!(n > 0);
        let data: Vec<f64> = values[..n * d].iter().map(|&v| v as f64).collect();
        let set = EmbeddingSet::new(data, d).unwrap();
        for format in [Format::Binary, Format::Csv] {
            let back = decode_embeddings(&encode_embeddings(&set, format), format).unwrap();
            prop_assert_eq!(&back, &set);
        }
    }

    #[test]
    fn truncated_binary_never_panics(cut in 0usize..40) {
        let set = EmbeddingSet::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let bytes = encode_embeddings(&set, Format::Binary);
        let cut = cut.min(bytes.len() - 1);
        prop_assert!(decode_embeddings(&bytes[..cut], Format::Binary).is_err());
    }
}
