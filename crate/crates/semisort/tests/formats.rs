use proptest::prelude::*;
use semisort::apps::graph::CsrGraph;
use semisort::format::*;
use semisort_core::Record;
use std::path::Path;

proptest! {
    #[test]
    fn record_dump_round_trips(raw in prop::collection::vec(any::<(u64, u64)>(), 0..200)) {
        let recs: Vec<Record<u64, u64>> = raw.iter().map(|&(k, v)| Record::new(k, v)).collect();
        let bytes = encode_records(&recs);
        prop_assert_eq!(bytes.len(), HEADER_LEN + 16 * recs.len());
        prop_assert_eq!(decode_records::<u64, u64>(&bytes).unwrap(), recs);
    }

    #[test]
    fn narrow_and_wide_records_round_trip(raw in prop::collection::vec(any::<(u32, u128)>(), 0..100)) {
        let a: Vec<Record<u32, ()>> = raw.iter().map(|&(k, _)| Record::new(k, ())).collect();
        prop_assert_eq!(decode_records::<u32, ()>(&encode_records(&a)).unwrap(), a);
        let b: Vec<Record<u128, u128>> = raw.iter().map(|&(k, v)| Record::new(v, k as u128)).collect();
        prop_assert_eq!(decode_records::<u128, u128>(&encode_records(&b)).unwrap(), b);
    }

    #[test]
    fn csr_round_trips(n in 1usize..40, e in prop::collection::vec(any::<(u32, u32)>(), 0..200)) {
        let edges: Vec<_> = e.iter().map(|&(u, v)| (u % n as u32, v % n as u32)).collect();
        let g = CsrGraph::from_edges(n, &edges);
        prop_assert_eq!(decode_csr(&encode_csr(&g)).unwrap(), g);
    }
}

#[test]
fn header_layout() {
    let bytes = encode_records(&[Record::new(1u32, 2u32)]);
    assert_eq!(&bytes[..4], b"SMSR");
    assert_eq!(decode_header(&bytes).unwrap(), Header { key_bits: 32, value_bits: 32, n: 1 });
    assert_eq!(&bytes[16..], &[1, 0, 0, 0, 2, 0, 0, 0]);
}

#[test]
fn corrupt_dumps_are_rejected() {
    let good = encode_records(&[Record::new(5u64, ())]);
    assert!(decode_records::<u64, ()>(&good[..10]).is_err());
    let mut bad = good.clone();
    bad[0] = b'X';
    assert!(decode_records::<u64, ()>(&bad).is_err());
    assert!(decode_records::<u64, ()>(&good[..good.len() - 1]).is_err());
    assert!(decode_records::<u32, ()>(&good).is_err());
    let mut weird = good.clone();
    weird[4] = 24;
    assert!(decode_header(&weird).is_err());
}

#[test]
fn corrupt_csr_is_rejected() {
    let g = CsrGraph::from_edges(3, &[(0, 1), (2, 0)]);
    let bytes = encode_csr(&g);
    assert!(decode_csr(&bytes[..bytes.len() - 2]).is_err());
    let mut bad = bytes.clone();
    let last = bad.len() - 4;
    bad[last..].copy_from_slice(&9u32.to_le_bytes());
    assert!(decode_csr(&bad).is_err());
    let mut huge = bytes;
    huge[..8].copy_from_slice(&u64::MAX.to_le_bytes());
    assert!(decode_csr(&huge).is_err());
}

#[test]
fn edge_list_parsing() {
    let text = "# header\n0 1\n\n2 0 # trailing\n 1   2 \n";
    let edges = parse_edge_list(text.as_bytes(), Path::new("mem")).unwrap();
    assert_eq!(edges, [(0, 1), (2, 0), (1, 2)]);
    let err = parse_edge_list("0 1\n3\n".as_bytes(), Path::new("g.txt")).unwrap_err();
    assert!(err.to_string().contains("g.txt:2"), "{err}");
}

#[test]
fn edge_list_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("g.txt");
    let g = CsrGraph::from_edges(4, &[(0, 3), (0, 1), (3, 3)]);
    write_edge_list(&p, &g).unwrap();
    assert_eq!(read_edge_list(&p).unwrap(), g);
    let missing = read_edge_list(&dir.path().join("nope.txt")).unwrap_err();
    assert!(missing.to_string().contains("nope.txt"));
}
