//! Shared fixtures for the benchmarks.

use cvlab::geom::{Background, Chart, FdOrder, GridField, MetricField, Sym2Field};
use cvlab::vary::{Direction, DirectionKind};
use std::sync::Arc;

/// Round three-sphere of radius one with `res` nodes per axis.
pub fn round_background(res: usize) -> Arc<Background> {
    let chart = Arc::new(Chart::new(3, 1.0, &[res; 3], FdOrder::Eighth).expect("valid chart"));
    Arc::new(Background::round(&chart).expect("round background"))
}

/// The degree-2 pure-trace direction on `bg`.
pub fn degree2(bg: &Background) -> Sym2Field {
    Direction::build(bg, DirectionKind::Degree2 { index: 4 }).expect("degree-2 direction").h
}

/// `ḡ + t h` for the degree-2 direction.
pub fn perturbed(bg: &Background, t: f64) -> MetricField {
    let h = degree2(bg);
    MetricField::new(bg.metric().field().axpy(t, &h).expect("same chart")).expect("positive definite")
}
