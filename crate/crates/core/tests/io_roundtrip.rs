use polytrack::geometry::BitMask;
use polytrack::io::{
    decode_rle, encode_rle, format_detections, ground_truth_records, parse_detections, parse_detections_str,
    parse_results, records_to_sequence, track_records, write_detections, write_results,
};
use polytrack::metrics::evaluate;
use polytrack::simulator::{generate, perturb, NoiseParams, Scenario, ScenarioKind};
use polytrack::tracker::{run_sequence, TrackerConfig};
use polytrack::Error;

fn scenario(kind: ScenarioKind, seed: u64) -> Scenario {
    Scenario::preset(kind, 4, 30, 256, 192, seed).unwrap()
}

#[test]
fn ground_truth_detections_round_trip_through_text() {
    let gt = generate(&scenario(ScenarioKind::Crossing, 3)).unwrap();
    let dets = perturb(&gt, &NoiseParams::identity(), 1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gt_dets.txt");
    write_detections(&dets, Some((gt.width, gt.height)), &path).unwrap();
    let parsed = parse_detections(&path).unwrap();
    assert_eq!(parsed.image_size, Some((256, 192)));
    assert_eq!(parsed.frames.len(), dets.len());
    for (a, b) in parsed.frames.iter().zip(&dets) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!(x.center.distance(y.center) <= 1e-4);
            assert_eq!(x.class_id, y.class_id);
        }
    }
}

#[test]
fn malformed_line_seventeen_is_named() {
    let gt = generate(&scenario(ScenarioKind::Linear, 8)).unwrap();
    let dets = perturb(&gt, &NoiseParams::identity(), 2).unwrap();
    let text = format_detections(&dets, None).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    lines[16] = lines[16].replacen(' ', " x", 1);
    match parse_detections_str(&lines.join("\n")).unwrap_err() {
        Error::Parse { line, .. } => assert_eq!(line, 17),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn written_results_are_disjoint_and_reparse() {
    let gt = generate(&scenario(ScenarioKind::Crossing, 5)).unwrap();
    let dets = perturb(&gt, &NoiseParams::default(), 6).unwrap();
    let tracks = run_sequence(&dets, &TrackerConfig::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("results.txt");
    write_results(&tracks, gt.width, gt.height, &path).unwrap();
    let records = parse_results(&path).unwrap();
    assert_eq!(records, track_records(&tracks, gt.width, gt.height).unwrap());
    let seq = records_to_sequence(&records, None).unwrap();
    for frame in &seq.frames {
        for (i, a) in frame.iter().enumerate() {
            for b in &frame[i + 1..] {
                assert!((0..seq.height).all(|y| (0..seq.width).all(|x| !(a.mask.get(x, y) && b.mask.get(x, y)))));
            }
        }
    }
}

#[test]
fn perfect_detections_score_perfectly() {
    for kind in [ScenarioKind::Linear, ScenarioKind::Occlusion] {
        let gt = generate(&scenario(kind, 21)).unwrap();
        let gt_seq = records_to_sequence(&ground_truth_records(&gt).unwrap(), Some((gt.width, gt.height))).unwrap();
        let dets = perturb(&gt, &NoiseParams::identity(), 0).unwrap();
        let tracks = run_sequence(&dets, &TrackerConfig::default()).unwrap();
        let hyp = records_to_sequence(
            &track_records(&tracks, gt.width, gt.height).unwrap(),
            Some((gt.width, gt.height)),
        )
        .unwrap();
        let r = evaluate(&gt_seq, &hyp).unwrap();
        assert_eq!((r.fp, r.fn_, r.idsw), (0, 0, 0), "{kind:?}");
        assert_eq!(r.motsa, 1.0);
    }
}

#[test]
fn reference_rle_fixtures() {
    let text =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/rle_reference.txt")).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let mut n = 0;
    while let Some(header) = lines.next() {
        let f: Vec<&str> = header.split_whitespace().collect();
        let (h, w): (usize, usize) = (f[1].parse().unwrap(), f[2].parse().unwrap());
        let bits: Vec<bool> = lines
            .by_ref()
            .take(h)
            .flat_map(|row| row.bytes().map(|b| b == b'1'))
            .collect();
        let m = BitMask::from_bits(w, h, bits).unwrap();
        assert_eq!(encode_rle(&m), f[3], "{}", f[0]);
        assert_eq!(decode_rle(f[3], h, w).unwrap(), m, "{}", f[0]);
        n += 1;
    }
    assert_eq!(n, 10);
    assert_eq!(encode_rle(&BitMask::new(2, 3)), "6");
}
