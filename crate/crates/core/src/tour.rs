//! Grand tour path generation.
//!
//! A path is a sequence of geodesic segments between projection bases. Each
//! segment is the Grassmann geodesic between the span of its origin and the
//! span of a randomly proposed target: the two bases are first rotated within
//! their own spans so that they line up along principal directions, and then
//! each principal direction is rotated in its own plane by a fraction of its
//! principal angle.

use ndarray::{Array2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::numerics::{orthonormalize, svd_full, ProjectionBasis};

/// Default angular speed, radians per frame.
pub const DEFAULT_STEP_ANGLE: f64 = 0.05;
/// Default frame rate for live sessions.
pub const DEFAULT_FPS: f64 = 30.0;
/// Segments whose largest principal angle is below this are skipped.
pub const MIN_SEGMENT_ANGLE: f64 = 1e-9;

const MAX_EMPTY_SEGMENTS: usize = 64;

/// A basis drawn uniformly (Haar) from the Stiefel manifold of `p × d`
/// orthonormal frames: a matrix of independent standard normals, orthonormalized.
pub fn random_basis(p: usize, d: usize, seed: u64) -> Result<ProjectionBasis> {
    if d == 0 || d > p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: d,
        });
    }
    match gaussian_frame(p, d, seed) {
        Err(Error::RankDeficient { .. }) => gaussian_frame(p, d, seed.wrapping_add(1)),
        other => other,
    }
}

fn gaussian_frame(p: usize, d: usize, seed: u64) -> Result<ProjectionBasis> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = Array2::from_shape_simple_fn((p, d), || StandardNormal.sample(&mut rng));
    orthonormalize(m.view())
}

/// A precomputed geodesic between the spans of two bases.
#[derive(Debug, Clone, PartialEq)]
pub struct Geodesic {
    /// Start basis expressed in principal directions, `A·W`.
    aligned: Array2<f64>,
    /// Unit directions orthogonal to `aligned`, one per principal plane.
    toward: Array2<f64>,
    /// Principal angles, paired with the columns above (ascending).
    angles: Vec<f64>,
    /// `W`, undone at every step so the path starts exactly at `A`.
    alignment: Array2<f64>,
}

impl Geodesic {
    pub fn new(start: &ProjectionBasis, end: &ProjectionBasis) -> Result<Self> {
        if start.p() != end.p() {
            return Err(Error::DimensionMismatch {
                expected: start.p(),
                found: end.p(),
            });
        }
        if start.d() != end.d() {
            return Err(Error::DimensionMismatch {
                expected: start.d(),
                found: end.d(),
            });
        }
        let (a, b) = (start.matrix(), end.matrix());
        let (w, _cosines, z) = svd_full(a.t().dot(&b).view())?;
        let aligned = a.dot(&w);
        let target = b.dot(&z);
        let (p, d) = aligned.dim();

        let mut toward = Array2::<f64>::zeros((p, d));
        let mut angles = vec![0.0; d];
        for k in 0..d {
            let tk = target.column(k);
            let cos = aligned.column(k).dot(&tk);
            let mut r = tk.to_owned();
            for _pass in 0..2 {
                for j in 0..d {
                    let aj = aligned.column(j);
                    let c = aj.dot(&r);
                    r.scaled_add(-c, &aj);
                }
            }
            let sin = r.dot(&r).sqrt();
            if sin < 1e-12 {
                continue;
            }
            for _pass in 0..2 {
                for j in 0..k {
                    let gj = toward.column(j);
                    let c = gj.dot(&r);
                    r.scaled_add(-c, &gj);
                }
            }
            let norm = r.dot(&r).sqrt();
            toward.column_mut(k).assign(&(r / norm));
            angles[k] = sin.atan2(cos.max(0.0));
        }
        Ok(Self {
            aligned,
            toward,
            angles,
            alignment: w,
        })
    }

    /// Principal angles between the two spans, largest first.
    pub fn principal_angles(&self) -> Vec<f64> {
        let mut a = self.angles.clone();
        a.sort_by(|x, y| y.total_cmp(x));
        a
    }

    pub fn max_angle(&self) -> f64 {
        self.angles.iter().copied().fold(0.0, f64::max)
    }

    /// The frame at fraction `t` of the way along; `t = 0` gives the start
    /// basis and `t = 1` a basis spanning the end subspace.
    pub fn at(&self, t: f64) -> ProjectionBasis {
        let mut frame = self.aligned.clone();
        for (k, (mut col, &theta)) in frame
            .axis_iter_mut(Axis(1))
            .zip(&self.angles)
            .enumerate()
        {
            if theta == 0.0 {
                continue;
            }
            let (s, c) = (t * theta).sin_cos();
            col.mapv_inplace(|v| v * c);
            col.scaled_add(s, &self.toward.column(k));
        }
        ProjectionBasis::new_unchecked(frame.dot(&self.alignment.t()))
    }
}

/// Interpolates along the Grassmann geodesic from `start` to `end`.
pub fn geodesic_interpolate(
    start: &ProjectionBasis,
    end: &ProjectionBasis,
    t: f64,
) -> Result<ProjectionBasis> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::ConfigInvalid(format!(
            "interpolation fraction {t} outside [0, 1]"
        )));
    }
    Ok(Geodesic::new(start, end)?.at(t))
}

/// Principal angles between two spans, largest first.
pub fn principal_angles(a: &ProjectionBasis, b: &ProjectionBasis) -> Result<Vec<f64>> {
    Ok(Geodesic::new(a, b)?.principal_angles())
}

/// Source of target bases for a tour path.
pub trait TargetProposal {
    /// Proposes the `index`-th target, given where the path currently is.
    fn propose(&mut self, current: &ProjectionBasis, index: u64) -> Result<ProjectionBasis>;
}

/// Uniformly random targets: the grand tour.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GrandTour {
    pub seed: u64,
}

impl TargetProposal for GrandTour {
    fn propose(&mut self, current: &ProjectionBasis, index: u64) -> Result<ProjectionBasis> {
        random_basis(current.p(), current.d(), derive_seed(self.seed, index))
    }
}

/// Mixes a base seed with a stream index (splitmix64 finalizer).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Snapshot of where a tour path is.
#[derive(Debug, Clone, PartialEq)]
pub struct TourPathState {
    /// Start of the segment in progress.
    pub current: ProjectionBasis,
    pub target: ProjectionBasis,
    /// Largest first.
    pub principal_angles: Vec<f64>,
    pub fraction: f64,
    pub step_angle: f64,
    pub rng_seed: u64,
    pub frame_index: u64,
}

/// A pausable, resettable stream of tour frames.
#[derive(Debug, Clone)]
pub struct TourPath<P: TargetProposal + Clone = GrandTour> {
    initial: ProjectionBasis,
    initial_proposal: P,
    proposal: P,
    step_angle: f64,
    seed: u64,
    origin: ProjectionBasis,
    target: ProjectionBasis,
    geodesic: Geodesic,
    fraction: f64,
    frame_index: u64,
    targets_drawn: u64,
    emitted: ProjectionBasis,
}

impl TourPath<GrandTour> {
    /// A grand tour starting at `initial`.
    pub fn new(initial: ProjectionBasis, step_angle: f64, seed: u64) -> Result<Self> {
        Self::with_proposal(initial, step_angle, seed, GrandTour { seed })
    }
}

impl<P: TargetProposal + Clone> TourPath<P> {
    pub fn with_proposal(
        initial: ProjectionBasis,
        step_angle: f64,
        seed: u64,
        proposal: P,
    ) -> Result<Self> {
        if !(step_angle > 0.0 && step_angle.is_finite()) {
            return Err(Error::ConfigInvalid(format!(
                "step angle must be positive, got {step_angle}"
            )));
        }
        let mut path = Self {
            geodesic: Geodesic::new(&initial, &initial)?,
            origin: initial.clone(),
            target: initial.clone(),
            emitted: initial.clone(),
            initial,
            initial_proposal: proposal.clone(),
            proposal,
            step_angle,
            seed,
            fraction: 0.0,
            frame_index: 0,
            targets_drawn: 0,
        };
        path.begin_segment()?;
        Ok(path)
    }

    /// Draws targets until one is a non-trivial distance from the origin.
    fn begin_segment(&mut self) -> Result<()> {
        for _ in 0..MAX_EMPTY_SEGMENTS {
            let target = self.proposal.propose(&self.origin, self.targets_drawn)?;
            self.targets_drawn += 1;
            let geodesic = Geodesic::new(&self.origin, &target)?;
            if geodesic.max_angle() >= MIN_SEGMENT_ANGLE {
                self.target = target;
                self.geodesic = geodesic;
                self.fraction = 0.0;
                return Ok(());
            }
        }
        Err(Error::DegenerateInput(
            "target proposals never leave the current span".into(),
        ))
    }

    /// Advances one frame and returns the basis to display.
    ///
    /// The fraction grows by `step_angle / θ_max`; when it would pass 1 the
    /// segment endpoint is emitted and a new target is drawn.
    pub fn next_frame(&mut self) -> Result<ProjectionBasis> {
        self.frame_index += 1;
        let increment = self.step_angle / self.geodesic.max_angle().max(MIN_SEGMENT_ANGLE);
        let next = self.fraction + increment;
        if next >= 1.0 - 1e-12 {
            self.fraction = 1.0;
            self.emitted = self.geodesic.at(1.0);
            self.origin = self.emitted.clone();
            self.begin_segment()?;
        } else {
            self.fraction = next;
            self.emitted = self.geodesic.at(next);
        }
        Ok(self.emitted.clone())
    }

    /// The last emitted basis (the initial basis before any frame).
    pub fn current_basis(&self) -> &ProjectionBasis {
        &self.emitted
    }

    pub fn frame_index(&self) -> u64 {
        self.frame_index
    }

    pub fn step_angle(&self) -> f64 {
        self.step_angle
    }

    pub fn initial_basis(&self) -> &ProjectionBasis {
        &self.initial
    }

    /// Restarts from frame 0; the replayed sequence is identical.
    pub fn reset(&mut self) -> Result<()> {
        *self = Self::with_proposal(
            self.initial.clone(),
            self.step_angle,
            self.seed,
            self.initial_proposal.clone(),
        )?;
        Ok(())
    }

    pub fn state(&self) -> TourPathState {
        TourPathState {
            current: self.origin.clone(),
            target: self.target.clone(),
            principal_angles: self.geodesic.principal_angles(),
            fraction: self.fraction,
            step_angle: self.step_angle,
            rng_seed: self.seed,
            frame_index: self.frame_index,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::projector_distance;
    use ndarray::array;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn e(p: usize, idx: &[usize]) -> ProjectionBasis {
        let mut m = Array2::zeros((p, idx.len()));
        for (c, &r) in idx.iter().enumerate() {
            m[[r, c]] = 1.0;
        }
        ProjectionBasis::new(m).unwrap()
    }

    #[test]
    fn same_seed_same_basis() {
        assert_eq!(random_basis(6, 2, 42).unwrap(), random_basis(6, 2, 42).unwrap());
        assert_ne!(random_basis(6, 2, 42).unwrap(), random_basis(6, 2, 43).unwrap());
    }

    #[test]
    fn square_random_basis_is_orthogonal() {
        let q = random_basis(3, 3, 7).unwrap();
        let m = q.matrix();
        let det = m[[0, 0]] * (m[[1, 1]] * m[[2, 2]] - m[[1, 2]] * m[[2, 1]])
            - m[[0, 1]] * (m[[1, 0]] * m[[2, 2]] - m[[1, 2]] * m[[2, 0]])
            + m[[0, 2]] * (m[[1, 0]] * m[[2, 1]] - m[[1, 1]] * m[[2, 0]]);
        assert!((det.abs() - 1.0).abs() < 1e-10);
        assert!(q.orthonormality_error() < 1e-12);
    }

    #[test]
    fn zero_length_geodesic() {
        let a = random_basis(5, 2, 1).unwrap();
        let g = Geodesic::new(&a, &a).unwrap();
        assert!(g.principal_angles().iter().all(|&t| t.abs() < 1e-7));
        for t in [0.0, 0.3, 1.0] {
            assert!(projector_distance(&g.at(t), &a) < 1e-10);
        }
    }

    #[test]
    fn half_way_between_coordinate_planes() {
        let a = e(4, &[0, 1]);
        let b = e(4, &[0, 2]);
        let g = Geodesic::new(&a, &b).unwrap();
        let angles = g.principal_angles();
        assert!((angles[0] - FRAC_PI_2).abs() < 1e-12);
        assert!(angles[1].abs() < 1e-12);
        let h = 0.5f64.sqrt();
        let expected = ProjectionBasis::new(array![[1.0, 0.0], [0.0, h], [0.0, h], [0.0, 0.0]]).unwrap();
        assert!(projector_distance(&g.at(0.5), &expected) < 1e-10);
        // Starts exactly at the start basis, not merely its span.
        assert_eq!(g.at(0.0).matrix(), a.matrix());
    }

    #[test]
    fn mismatched_bases_are_rejected() {
        let a = e(4, &[0, 1]);
        let b = e(5, &[0, 1]);
        assert!(matches!(
            geodesic_interpolate(&a, &b, 0.5),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(geodesic_interpolate(&a, &e(4, &[0]), 0.5).is_err());
    }

    /// Proposes a fixed list of targets, for driving the path deterministically.
    #[derive(Clone)]
    struct Scripted(Vec<ProjectionBasis>);

    impl TargetProposal for Scripted {
        fn propose(&mut self, _: &ProjectionBasis, index: u64) -> Result<ProjectionBasis> {
            Ok(self.0[(index as usize).min(self.0.len() - 1)].clone())
        }
    }

    #[test]
    fn quarter_pi_steps_reach_a_right_angle_in_two_frames() {
        let targets = vec![e(4, &[0, 2]), e(4, &[3, 1])];
        let mut path =
            TourPath::with_proposal(e(4, &[0, 1]), FRAC_PI_4, 0, Scripted(targets)).unwrap();
        let f1 = path.next_frame().unwrap();
        assert!(projector_distance(&f1, &e(4, &[0, 2])) > 0.1);
        let f2 = path.next_frame().unwrap();
        assert!(projector_distance(&f2, &e(4, &[0, 2])) < 1e-10);
        assert_eq!(path.state().fraction, 0.0);
        assert_eq!(path.frame_index(), 2);
    }

    #[test]
    fn oversized_step_lands_on_target_immediately() {
        let targets = vec![e(4, &[0, 2]), e(4, &[3, 1])];
        let mut path = TourPath::with_proposal(e(4, &[0, 1]), 10.0, 0, Scripted(targets)).unwrap();
        let f1 = path.next_frame().unwrap();
        assert!(projector_distance(&f1, &e(4, &[0, 2])) < 1e-10);
    }

    #[test]
    fn trivial_targets_are_skipped() {
        let start = e(4, &[0, 1]);
        let targets = vec![e(4, &[1, 0]), e(4, &[2, 3])];
        let path = TourPath::with_proposal(start, 0.1, 0, Scripted(targets)).unwrap();
        assert!(projector_distance(&path.state().target, &e(4, &[2, 3])) < 1e-12);
    }

    #[test]
    fn construction_and_reset_expose_the_initial_basis() {
        let start = e(5, &[0, 1]);
        let mut path = TourPath::new(start.clone(), 0.05, 3).unwrap();
        assert_eq!(path.current_basis(), &start);
        let first: Vec<_> = (0..50).map(|_| path.next_frame().unwrap()).collect();
        path.reset().unwrap();
        assert_eq!(path.current_basis(), &start);
        assert_eq!(path.frame_index(), 0);
        let again: Vec<_> = (0..50).map(|_| path.next_frame().unwrap()).collect();
        assert_eq!(first, again);
    }

    #[test]
    fn paused_path_holds_a_mid_segment_basis() {
        let mut path = TourPath::new(e(6, &[0, 1]), 0.01, 9).unwrap();
        for _ in 0..7 {
            path.next_frame().unwrap();
        }
        let held = path.current_basis().clone();
        assert!(path.state().fraction > 0.0 && path.state().fraction < 1.0);
        assert!(held.orthonormality_error() < 1e-12);
        assert_eq!(path.current_basis(), &held);
    }

    #[test]
    fn non_positive_step_is_rejected() {
        assert!(TourPath::new(e(3, &[0, 1]), 0.0, 1).is_err());
    }
}
