use std::collections::BTreeSet;
use std::path::PathBuf;

use ndarray::Array2;

use tourlens::diagnostics::knn;
use tourlens::embed::pca_embed;
use tourlens::numerics::{compute_half_range, orthonormality_error, DataMatrix};
use tourlens::session::{
    parse_script, points_in_rect, run_transcript, to_jsonl, Action, ClientMessage, ServerMessage,
    Session, SessionConfig, View, ZOOM_MAX, ZOOM_MIN,
};
use tourlens::simulate::{gen_gaussian_clusters, GaussianClusterParams, SubsampleParams};
use tourlens::Error;

fn clusters(n_per_cluster: usize) -> (DataMatrix, Vec<usize>) {
    let ds = gen_gaussian_clusters(&GaussianClusterParams {
        n_per_cluster,
        ..Default::default()
    })
    .unwrap();
    (ds.data, ds.labels)
}

fn config(n_per_cluster: usize, seed: u64) -> SessionConfig {
    let (data, _) = clusters(n_per_cluster);
    let embedding = pca_embed(&data, 2).unwrap();
    SessionConfig {
        seed,
        ..SessionConfig::new(data, embedding)
    }
}

fn frame_parts(m: &ServerMessage) -> (u64, Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<usize>, Vec<String>) {
    match m {
        ServerMessage::Frame {
            frame,
            basis,
            points,
            selection,
            highlight,
        } => (*frame, basis.clone(), points.clone(), selection.clone(), highlight.clone()),
        other => panic!("expected a frame, got {other:?}"),
    }
}

fn control(action: Action) -> ClientMessage {
    ClientMessage::Control { action }
}

#[test]
fn start_sends_meta_then_frame_zero() {
    let s = Session::new(config(20, 1)).unwrap();
    let msgs = s.start();
    match &msgs[0] {
        ServerMessage::Meta {
            n,
            d,
            labels,
            label_names,
            embedding,
            half_range,
        } => {
            assert_eq!((*n, *d), (100, 2));
            assert_eq!(embedding.len(), 100);
            assert_eq!(labels.len(), 100);
            assert_eq!(label_names, &["0", "1", "2", "3", "4"]);
            assert!(*half_range > 0.0);
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(frame_parts(&msgs[1]).0, 0);
    assert!(s.is_playing());
}

#[test]
fn first_tick_produces_a_frame() {
    let mut s = Session::new(config(20, 1)).unwrap();
    let f = s.tick().unwrap().expect("playing sessions emit on tick");
    assert_eq!(frame_parts(&f).0, 1);
}

#[test]
fn reset_replays_a_fresh_session() {
    let mut used = Session::new(config(20, 7)).unwrap();
    for _ in 0..500 {
        used.tick().unwrap();
    }
    used.handle(&control(Action::Reset)).unwrap();
    let mut fresh = Session::new(config(20, 7)).unwrap();
    assert_eq!(used.frame_payload(), fresh.frame_payload());
    for _ in 0..50 {
        assert_eq!(used.tick().unwrap(), fresh.tick().unwrap());
    }
}

#[test]
fn frames_are_scaled_and_orthonormal() {
    let mut s = Session::new(config(20, 3)).unwrap();
    for _ in 0..200 {
        let (_, basis, points, _, _) = frame_parts(&s.tick().unwrap().unwrap());
        assert!(points.iter().flatten().all(|v| v.abs() <= 1.0 + 1e-9));
        let rows = Array2::from_shape_vec((2, basis[0].len()), basis.concat()).unwrap();
        assert!(orthonormality_error(rows.t()) < 1e-8);
    }
}

#[test]
fn embedding_brush_over_everything_selects_all_and_pauses() {
    let mut s = Session::new(config(20, 1)).unwrap();
    let out = s
        .handle(&ClientMessage::Brush {
            view: View::Embedding,
            rect: [-1e9, -1e9, 1e9, 1e9],
        })
        .unwrap();
    let (frame, _, _, selection, _) = frame_parts(&out[0]);
    assert_eq!(frame, 0);
    assert_eq!(selection, (0..100).collect::<Vec<_>>());
    assert!(!s.is_playing());
    assert_eq!(s.tick().unwrap(), None);
}

#[test]
fn tour_brush_matches_point_in_rect_oracle() {
    let (data, labels) = clusters(100);
    let embedding = pca_embed(&data, 2).unwrap();
    let cfg = SessionConfig {
        seed: 11,
        ..SessionConfig::new(data.clone(), embedding)
    };
    let mut s = Session::new(cfg).unwrap();
    for _ in 0..40 {
        s.tick().unwrap();
    }
    let (_, basis, _, _, _) = frame_parts(&s.frame_payload());
    // Independent projection: rescale, center, project, divide.
    let h = compute_half_range(&data);
    let a = Array2::from_shape_vec((2, 10), basis.concat()).unwrap();
    let pts = h.centered().dot(&a.t()) / h.half_range;
    let members: Vec<usize> = (0..500).filter(|&i| labels[i] == 0).collect();
    let cx = members.iter().map(|&i| pts[[i, 0]]).sum::<f64>() / 100.0;
    let cy = members.iter().map(|&i| pts[[i, 1]]).sum::<f64>() / 100.0;
    let rect = [cx - 0.1, cy - 0.1, cx + 0.1, cy + 0.1];
    let oracle: Vec<usize> = (0..500)
        .filter(|&i| {
            let (x, y) = (pts[[i, 0]], pts[[i, 1]]);
            rect[0] <= x && x <= rect[2] && rect[1] <= y && y <= rect[3]
        })
        .collect();
    assert!(!oracle.is_empty());
    let out = s.handle(&ClientMessage::Brush { view: View::Tour, rect }).unwrap();
    assert_eq!(frame_parts(&out[0]).3, oracle);
}

#[test]
fn legend_toggle_is_an_involution() {
    let mut s = Session::new(config(10, 1)).unwrap();
    let before = s.state().highlighted_labels;
    let toggle = ClientMessage::Legend { label: "3".into() };
    let (_, _, _, _, hl) = frame_parts(&s.handle(&toggle).unwrap()[0]);
    assert_eq!(hl, vec!["3".to_string()]);
    s.handle(&toggle).unwrap();
    assert_eq!(s.state().highlighted_labels, before);
    assert!(matches!(
        s.handle(&ClientMessage::Legend { label: "nope".into() }),
        Err(Error::ConfigInvalid(_))
    ));
}

#[test]
fn zoom_is_clamped() {
    let mut s = Session::new(config(10, 1)).unwrap();
    let hr0 = s.half_range();
    s.handle(&ClientMessage::Zoom { factor: 1e9 }).unwrap();
    assert_eq!(s.half_range(), ZOOM_MAX * hr0);
    s.handle(&ClientMessage::Zoom { factor: 1e-12 }).unwrap();
    assert_eq!(s.half_range(), ZOOM_MIN * hr0);
    assert!(s.handle(&ClientMessage::Zoom { factor: 0.0 }).is_err());
    s.handle(&control(Action::Reset)).unwrap();
    assert_eq!(s.half_range(), hr0);
}

#[test]
fn done_is_terminal() {
    let mut s = Session::new(config(10, 1)).unwrap();
    for _ in 0..7 {
        s.tick().unwrap();
    }
    s.handle(&ClientMessage::Brush {
        view: View::Embedding,
        rect: [-1e9, -1e9, 0.0, 1e9],
    })
    .unwrap();
    let expected_basis = tourlens::numerics::basis_rows(s.current_basis());
    let out = s.handle(&control(Action::Done)).unwrap();
    match &out[0] {
        ServerMessage::Done { basis, selection, .. } => {
            assert_eq!(basis, &expected_basis);
            assert!(!selection.is_empty());
        }
        other => panic!("{other:?}"),
    }
    assert!(s.is_done() && !s.is_playing());
    assert_eq!(s.tick().unwrap(), None);
    for m in [control(Action::Play), ClientMessage::Zoom { factor: 2.0 }] {
        assert_eq!(s.handle(&m).unwrap_err(), Error::EventAfterDone);
    }
}

#[test]
fn knn_brush_expands_and_restores() {
    let mut s = Session::new(config(20, 2)).unwrap();
    let emb = match &s.meta() {
        ServerMessage::Meta { embedding, .. } => embedding.clone(),
        _ => unreachable!(),
    };
    let (x, y) = (emb[17][0], emb[17][1]);
    let rect = [x, y, x, y];
    let raw = clusters(20).0;
    let graph = knn(raw.values(), 4).unwrap();
    s.handle(&ClientMessage::KnnBrush { enabled: true, k: Some(4) }).unwrap();
    let out = s.handle(&ClientMessage::Brush { view: View::Embedding, rect }).unwrap();
    let mut want: BTreeSet<usize> = BTreeSet::from([17]);
    want.extend(graph.neighbors(17));
    assert_eq!(frame_parts(&out[0]).3, want.into_iter().collect::<Vec<_>>());
    let out = s.handle(&ClientMessage::KnnBrush { enabled: false, k: None }).unwrap();
    assert_eq!(frame_parts(&out[0]).3, vec![17]);
}

#[test]
fn knn_brush_of_a_separated_cluster_stays_inside() {
    let (data, labels) = clusters(100);
    let embedding = pca_embed(&data, 2).unwrap();
    let mut s = Session::new(SessionConfig::new(data, embedding.clone())).unwrap();
    s.set_knn_brush(true).unwrap();
    let members: Vec<usize> = (0..500).filter(|&i| labels[i] == 2).collect();
    // The cluster's bounding box in the embedding, checked to contain no
    // other cluster's points.
    let xs = members.iter().map(|&i| embedding[[i, 0]]);
    let ys = members.iter().map(|&i| embedding[[i, 1]]);
    let rect = [
        xs.clone().fold(f64::INFINITY, f64::min),
        ys.clone().fold(f64::INFINITY, f64::min),
        xs.fold(f64::NEG_INFINITY, f64::max),
        ys.fold(f64::NEG_INFINITY, f64::max),
    ];
    let inside = points_in_rect(&embedding, rect);
    assert_eq!(inside, members.iter().copied().collect());
    let out = s.handle(&ClientMessage::Brush { view: View::Embedding, rect }).unwrap();
    assert_eq!(frame_parts(&out[0]).3, members);
}

#[test]
fn graph_must_match_the_session() {
    let mut s = Session::new(config(10, 1)).unwrap();
    let other = knn(clusters(11).0.values(), 3).unwrap();
    assert_eq!(
        s.set_knn_graph(other).unwrap_err(),
        Error::GraphSizeMismatch { graph: 55, session: 50 }
    );
}

#[test]
fn brush_clear_only_clears_its_own_view() {
    let mut s = Session::new(config(10, 1)).unwrap();
    let all = [-1e9, -1e9, 1e9, 1e9];
    s.handle(&ClientMessage::Brush { view: View::Tour, rect: all }).unwrap();
    s.handle(&ClientMessage::BrushClear { view: View::Embedding }).unwrap();
    assert_eq!(s.state().selection.len(), 50);
    s.handle(&ClientMessage::BrushClear { view: View::Tour }).unwrap();
    assert!(s.state().selection.is_empty());
    assert!(s
        .handle(&ClientMessage::Brush { view: View::Tour, rect: [1.0, 0.0, 0.0, 1.0] })
        .is_err());
}

#[test]
fn mismatched_embedding_is_rejected() {
    let (data, _) = clusters(10);
    let cfg = SessionConfig::new(data, Array2::zeros((7, 2)));
    assert!(matches!(Session::new(cfg), Err(Error::ConfigInvalid(_))));
}

#[test]
fn subsampled_session_keeps_about_a_tenth() {
    let (data, labels) = clusters(200);
    let embedding = pca_embed(&data, 2).unwrap();
    let mut cfg = SessionConfig::new(data, embedding);
    cfg.labels = Some(labels.iter().map(|l| l.to_string()).collect());
    cfg.subsample = Some(SubsampleParams::new(0.1, 5));
    let s = Session::new(cfg).unwrap();
    assert_eq!(s.n(), 100);
    assert_eq!(s.rows().len(), 100);
}

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/session_transcript.jsonl")
}

fn golden_script() -> String {
    std::fs::read_to_string(
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/session_script.jsonl"),
    )
    .unwrap()
}

fn golden_config() -> SessionConfig {
    let ds = gen_gaussian_clusters(&GaussianClusterParams {
        n_per_cluster: 6,
        seed: 4,
        ..Default::default()
    })
    .unwrap();
    let embedding = pca_embed(&ds.data, 2).unwrap();
    SessionConfig {
        seed: 19,
        step_angle: 0.2,
        ..SessionConfig::new(ds.data, embedding)
    }
}

#[test]
fn scripted_session_matches_the_golden_transcript() {
    let script = parse_script(&golden_script()).unwrap();
    let first = to_jsonl(&run_transcript(golden_config(), 12, &script).unwrap());
    let second = to_jsonl(&run_transcript(golden_config(), 12, &script).unwrap());
    assert_eq!(first, second);
    if std::env::var_os("TOURLENS_BLESS").is_some() {
        std::fs::write(golden_path(), &first).unwrap();
    }
    let golden = std::fs::read_to_string(golden_path()).unwrap();
    assert_eq!(first, golden);
    for line in golden.lines() {
        ServerMessage::parse(line).unwrap();
    }
}
