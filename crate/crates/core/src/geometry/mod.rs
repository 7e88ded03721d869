//! Implicit level-set geometry: contour extraction, domain masks, and the
//! measured certificates for the boundary properties.

pub mod certificate;
pub mod contour;
pub mod domain;

pub use certificate::{
    curvature_certificate, min_curvature_trend, starshape_certificate,
    strip_window_min_curvature, CurvatureCertificate, MinCurvatureTrend, StarshapeCertificate,
    TrendEntry,
};
pub use contour::{extract_level_set, Contour, GridWindow};
pub use domain::{
    check_rect_negativity, extract_domain, hausdorff_to_strip, strip_limit_hausdorff,
    strip_window_arcs, superlevel_component_count, ComponentCount, DomainExtract, Mask,
    RectNegativity,
};
