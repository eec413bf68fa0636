use noisy_mds::io::{read_matrix, read_matrix_file, write_matrix, write_matrix_file};
use noisy_mds::{Error, Matrix};
use proptest::prelude::*;

#[test]
fn file_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.txt");
    let m = Matrix::from_rows(&[[0.1, -2.5e-300, 1.0 / 3.0], [f64::MAX, -0.0, 7.0]]);
    write_matrix_file(&m, &path).unwrap();
    let back = read_matrix_file(&path).unwrap();
    assert_eq!(back.as_slice(), m.as_slice());
    assert!(std::fs::read_to_string(&path).unwrap().starts_with("2 3\n"));
}

#[test]
fn comments_and_blank_lines_are_skipped() {
    let text = "# shape first\n2 2\n\n0 1\n# middle\n1 0\n";
    let m = read_matrix(text.as_bytes()).unwrap();
    assert_eq!(m.as_slice(), &[0.0, 1.0, 1.0, 0.0]);
}

#[test]
fn malformed_files_are_parse_errors() {
    for text in ["", "2\n1 2\n", "2 2\n1 2 3\n", "1 2\n1 x\n"] {
        assert!(matches!(read_matrix(text.as_bytes()), Err(Error::Parse(_))), "{text:?}");
    }
    let missing = tempfile::tempdir().unwrap().path().join("absent.txt");
    assert!(read_matrix_file(missing).is_err());
}

proptest! {
    #[test]
    fn text_round_trip(rows in 1usize..6, cols in 1usize..6, seed in any::<u64>()) {
        let m = Matrix::from_fn(rows, cols, |i, j| {
            let k = seed.wrapping_mul(6364136223846793005).wrapping_add((i * cols + j) as u64);
            f64::from_bits(k >> 2) * if k & 1 == 0 { 1.0 } else { -1.0 }
        });
        let mut buf = Vec::new();
        write_matrix(&m, &mut buf).unwrap();
        let back = read_matrix(buf.as_slice()).unwrap();
        prop_assert_eq!(back.as_slice(), m.as_slice());
    }
}
