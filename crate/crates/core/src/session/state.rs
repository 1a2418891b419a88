use std::collections::BTreeSet;
use std::time::Duration;

use ndarray::{Array2, Axis};

use super::protocol::{Action, ClientMessage, ServerMessage, View};
use crate::diagnostics::{knn, knn_brush, NeighborGraph, DEFAULT_K};
use crate::error::{Error, Result};
use crate::numerics::{basis_rows, compute_half_range, DataMatrix, ProjectionBasis};
use crate::simulate::{weighted_subsample_rows, SubsampleParams};
use crate::tour::{random_basis, TourPath, TourPathState, DEFAULT_FPS, DEFAULT_STEP_ANGLE};

pub const ZOOM_MIN: f64 = 0.01;
pub const ZOOM_MAX: f64 = 100.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    /// Data being toured, typically principal component scores.
    pub tour_input: DataMatrix,
    /// Layout shown in the embedding view, one row per observation.
    pub embedding: Array2<f64>,
    pub labels: Option<Vec<String>>,
    /// Dimension of the tour projection.
    pub projection_dim: usize,
    pub step_angle: f64,
    pub frames_per_second: f64,
    /// Rows are subsampled by class before the session starts.
    pub subsample: Option<SubsampleParams>,
    pub seed: u64,
    /// Neighbor count used when the k-NN brush is enabled without one.
    pub knn_k: usize,
}

impl SessionConfig {
    pub fn new(tour_input: DataMatrix, embedding: Array2<f64>) -> Self {
        let labels = tour_input.labels().map(<[String]>::to_vec);
        Self {
            tour_input,
            embedding,
            labels,
            projection_dim: 2,
            step_angle: DEFAULT_STEP_ANGLE,
            frames_per_second: DEFAULT_FPS,
            subsample: None,
            seed: 0,
            knn_k: DEFAULT_K,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.tour_input.n();
        let bad = |m: String| Err(Error::ConfigInvalid(m));
        if self.embedding.nrows() != n {
            return bad(format!(
                "embedding has {} rows but the tour input has {n}",
                self.embedding.nrows()
            ));
        }
        if self.embedding.ncols() == 0 || self.embedding.iter().any(|v| !v.is_finite()) {
            return bad("embedding must have finite coordinates in at least one column".into());
        }
        if let Some(l) = &self.labels {
            if l.len() != n {
                return bad(format!("{} labels for {n} rows", l.len()));
            }
        }
        if self.projection_dim == 0 || self.projection_dim > self.tour_input.p() {
            return bad(format!(
                "projection dimension {} must be in 1..={}",
                self.projection_dim,
                self.tour_input.p()
            ));
        }
        if !(self.step_angle > 0.0 && self.step_angle.is_finite()) {
            return bad(format!("step angle must be positive, got {}", self.step_angle));
        }
        if !(self.frames_per_second > 0.0 && self.frames_per_second.is_finite()) {
            return bad(format!("frame rate must be positive, got {}", self.frames_per_second));
        }
        if self.knn_k == 0 {
            return bad("knn_k must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionSource {
    None,
    Tour,
    Embedding,
}

/// Observable session state.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionState {
    pub tour: TourPathState,
    pub playing: bool,
    pub half_range: f64,
    pub selection: BTreeSet<usize>,
    pub selection_source: SelectionSource,
    pub highlighted_labels: BTreeSet<String>,
    pub done: bool,
}

/// One client's session. All mutation goes through [`Session::tick`] and
/// [`Session::handle`], so any interleaving is a sequential history.
#[derive(Debug, Clone)]
pub struct Session {
    rows: Vec<usize>,
    raw: Array2<f64>,
    centered: Array2<f64>,
    embedding: Array2<f64>,
    label_codes: Vec<usize>,
    label_names: Vec<String>,
    tour: TourPath,
    initial_half_range: f64,
    half_range: f64,
    playing: bool,
    done: bool,
    brushed: BTreeSet<usize>,
    selection: BTreeSet<usize>,
    selection_source: SelectionSource,
    highlighted: BTreeSet<String>,
    graph: Option<NeighborGraph>,
    knn_enabled: bool,
    frames_per_second: f64,
    default_k: usize,
}

fn encode_labels(labels: &[String]) -> (Vec<usize>, Vec<String>) {
    let mut names: Vec<String> = Vec::new();
    let codes = labels
        .iter()
        .map(|l| match names.iter().position(|x| x == l) {
            Some(i) => i,
            None => {
                names.push(l.clone());
                names.len() - 1
            }
        })
        .collect();
    (codes, names)
}

impl Session {
    pub fn new(config: SessionConfig) -> Result<Self> {
        config.validate()?;
        let n = config.tour_input.n();
        let rows: Vec<usize> = match &config.subsample {
            None => (0..n).collect(),
            Some(params) => {
                let classes = match &config.labels {
                    Some(l) => encode_labels(l).0,
                    None => vec![0; n],
                };
                weighted_subsample_rows(&classes, params)?
            }
        };
        let data = config.tour_input.select_rows(&rows)?;
        let embedding = config.embedding.select(Axis(0), &rows);
        let (label_codes, label_names) = match &config.labels {
            Some(l) => {
                let kept: Vec<String> = rows.iter().map(|&r| l[r].clone()).collect();
                encode_labels(&kept)
            }
            None => (Vec::new(), Vec::new()),
        };
        let scaled = compute_half_range(&data);
        let initial = random_basis(data.p(), config.projection_dim, config.seed)?;
        let tour = TourPath::new(initial, config.step_angle, config.seed)?;
        Ok(Self {
            rows,
            centered: scaled.centered(),
            raw: data.into_values(),
            embedding,
            label_codes,
            label_names,
            tour,
            initial_half_range: scaled.half_range,
            half_range: scaled.half_range,
            playing: true,
            done: false,
            brushed: BTreeSet::new(),
            selection: BTreeSet::new(),
            selection_source: SelectionSource::None,
            highlighted: BTreeSet::new(),
            graph: None,
            knn_enabled: false,
            frames_per_second: config.frames_per_second,
            default_k: config.knn_k,
        })
    }

    pub fn n(&self) -> usize {
        self.centered.nrows()
    }

    /// Rows of the configured input that the session kept.
    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn tick_interval(&self) -> Duration {
        Duration::from_secs_f64(1.0 / self.frames_per_second)
    }

    pub fn is_playing(&self) -> bool {
        self.playing
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn half_range(&self) -> f64 {
        self.half_range
    }

    /// Basis of the most recent frame.
    pub fn current_basis(&self) -> &ProjectionBasis {
        self.tour.current_basis()
    }

    pub fn state(&self) -> SessionState {
        SessionState {
            tour: self.tour.state(),
            playing: self.playing,
            half_range: self.half_range,
            selection: self.selection.clone(),
            selection_source: self.selection_source,
            highlighted_labels: self.highlighted.clone(),
            done: self.done,
        }
    }

    /// The metadata message followed by the initial frame.
    pub fn start(&self) -> Vec<ServerMessage> {
        vec![self.meta(), self.frame_payload()]
    }

    pub fn meta(&self) -> ServerMessage {
        ServerMessage::Meta {
            n: self.n(),
            d: self.tour.current_basis().d(),
            labels: self.label_codes.clone(),
            label_names: self.label_names.clone(),
            embedding: self.embedding.outer_iter().map(|r| r.to_vec()).collect(),
            half_range: self.half_range,
        }
    }

    /// Tour coordinates of the current frame, divided by the half range.
    pub fn current_points(&self) -> Array2<f64> {
        self.centered.dot(&self.tour.current_basis().matrix()) / self.half_range
    }

    pub fn frame_payload(&self) -> ServerMessage {
        ServerMessage::Frame {
            frame: self.tour.frame_index(),
            basis: basis_rows(self.tour.current_basis()),
            points: self.current_points().outer_iter().map(|r| r.to_vec()).collect(),
            selection: self.selection.iter().copied().collect(),
            highlight: self.highlight_list(),
        }
    }

    fn highlight_list(&self) -> Vec<String> {
        // Vocabulary order rather than lexical order.
        self.label_names
            .iter()
            .filter(|l| self.highlighted.contains(*l))
            .cloned()
            .collect()
    }

    fn done_payload(&self) -> ServerMessage {
        ServerMessage::Done {
            basis: basis_rows(self.tour.current_basis()),
            selection: self.selection.iter().copied().collect(),
            highlight: self.highlight_list(),
        }
    }

    /// The final payload once the session is done.
    pub fn final_payload(&self) -> Option<ServerMessage> {
        self.done.then(|| self.done_payload())
    }

    /// Advances the tour by one frame while playing.
    pub fn tick(&mut self) -> Result<Option<ServerMessage>> {
        if self.done || !self.playing {
            return Ok(None);
        }
        self.tour.next_frame()?;
        Ok(Some(self.frame_payload()))
    }

    /// Applies one client message. Every accepted message is answered with
    /// the current frame, or with the final payload for `done`.
    pub fn handle(&mut self, msg: &ClientMessage) -> Result<Vec<ServerMessage>> {
        if self.done {
            return Err(Error::EventAfterDone);
        }
        match msg {
            ClientMessage::Control { action } => match action {
                Action::Play => self.playing = true,
                Action::Pause => self.playing = false,
                Action::Reset => {
                    self.tour.reset()?;
                    self.half_range = self.initial_half_range;
                    self.playing = true;
                }
                Action::Done => {
                    self.done = true;
                    self.playing = false;
                    return Ok(vec![self.done_payload()]);
                }
            },
            ClientMessage::Brush { view, rect } => self.brush(*view, *rect)?,
            ClientMessage::BrushClear { view } => {
                let source = match view {
                    View::Tour => SelectionSource::Tour,
                    View::Embedding => SelectionSource::Embedding,
                };
                if self.selection_source == source {
                    self.brushed.clear();
                    self.selection.clear();
                    self.selection_source = SelectionSource::None;
                }
            }
            ClientMessage::Legend { label } => {
                if !self.label_names.contains(label) {
                    return Err(Error::ConfigInvalid(format!("unknown label {label:?}")));
                }
                if !self.highlighted.remove(label) {
                    self.highlighted.insert(label.clone());
                }
            }
            ClientMessage::Zoom { factor } => {
                if !(*factor > 0.0 && factor.is_finite()) {
                    return Err(Error::ConfigInvalid(format!(
                        "zoom factor must be positive, got {factor}"
                    )));
                }
                let hr0 = self.initial_half_range;
                self.half_range = (self.half_range * factor).clamp(ZOOM_MIN * hr0, ZOOM_MAX * hr0);
            }
            ClientMessage::KnnBrush { enabled, k } => {
                if *enabled {
                    let k = k.unwrap_or(self.default_k);
                    if self.graph.as_ref().is_none_or(|g| g.k() != k) {
                        self.graph = Some(knn(self.raw.view(), k)?);
                    }
                }
                self.knn_enabled = *enabled;
                self.relink()?;
            }
        }
        Ok(vec![self.frame_payload()])
    }

    /// Supplies the graph used by the k-NN brush.
    pub fn set_knn_graph(&mut self, graph: NeighborGraph) -> Result<()> {
        if graph.n() != self.n() {
            return Err(Error::GraphSizeMismatch {
                graph: graph.n(),
                session: self.n(),
            });
        }
        self.graph = Some(graph);
        Ok(())
    }

    /// Turns the one-to-many brush on or off, keeping the current graph.
    pub fn set_knn_brush(&mut self, enabled: bool) -> Result<()> {
        if enabled && self.graph.is_none() {
            self.graph = Some(knn(self.raw.view(), self.default_k)?);
        }
        self.knn_enabled = enabled;
        self.relink()
    }

    fn relink(&mut self) -> Result<()> {
        self.selection = match (&self.graph, self.knn_enabled) {
            (Some(g), true) => knn_brush(&self.brushed, g)?,
            _ => self.brushed.clone(),
        };
        Ok(())
    }

    fn brush(&mut self, view: View, rect: [f64; 4]) -> Result<()> {
        let [x0, y0, x1, y1] = rect;
        if !(x0 <= x1 && y0 <= y1) || rect.iter().any(|v| v.is_nan()) {
            return Err(Error::ConfigInvalid(format!("brush rect {rect:?} is not ordered")));
        }
        let coords = match view {
            View::Tour => self.current_points(),
            View::Embedding => self.embedding.clone(),
        };
        self.brushed = points_in_rect(&coords, rect);
        self.selection_source = match view {
            View::Tour => SelectionSource::Tour,
            View::Embedding => SelectionSource::Embedding,
        };
        self.playing = false;
        self.relink()
    }
}

/// Rows whose first two coordinates fall inside the closed rectangle. A
/// one-column layout is read as lying on `y = 0`.
pub fn points_in_rect(coords: &Array2<f64>, [x0, y0, x1, y1]: [f64; 4]) -> BTreeSet<usize> {
    coords
        .outer_iter()
        .enumerate()
        .filter(|(_, r)| {
            let x = r[0];
            let y = if r.len() > 1 { r[1] } else { 0.0 };
            x0 <= x && x <= x1 && y0 <= y && y <= y1
        })
        .map(|(i, _)| i)
        .collect()
}
