//! Conventions and reading choices that affect reported numbers.

/// `(flag, value)` pairs, echoed into every metadata block.
pub const CONVENTIONS: &[(&str, &str)] = &[
    ("angle", "inner angle theta is the full opening angle, twice the axis-to-edge angle"),
    ("reach_radius", "t*tan(theta/2); t*tan(theta) reported alongside as radius_tan_full"),
    ("page_measure_default", "normalized: Euclidean area / pi, page mass 1"),
    ("page_measure_contact", "dalpha on the page: twice Euclidean area, page mass 2*pi"),
    ("volume_default", "contact: alpha ^ dalpha, total 4*pi^2; round total 2*pi^2"),
    ("metric", "round metric of the unit sphere in C^2; frame (R, J, K) orthonormal"),
    ("collared_field", "half-angle alpha0 * smoothstep(|z2|/collar_eps); default collar_eps 0.3, dtheta_section fails at 0.1"),
    ("prob_radius_law", "area_scaled: t*tan(theta/2)*mu(A); minkowski: t*tan(theta/2) + radius(A); both reported"),
    ("prob_reach_center", "reach disk centered at the Hopf image exp(i t) * center(A)"),
    ("calabi_growth", "raw CAL^n and averaged CAL^n/n both reported"),
    ("page_variance", "interval reading mu(P)^2/12 and measured second central moment both reported"),
    ("sde_interior", "project (default) or reject onto the open cone; recur runs both"),
    ("sde_halfspace_tau", "page coordinate x+iy, pulled inside the unit disk before evaluating tau"),
    ("volatility", "non-negative constant or expression in r = |z1|"),
    ("recurrence_censoring", "paths without a hit by max_returns, or stuck at the binding, are censored"),
];

/// Text printed by `--list-conventions`.
pub fn listing() -> String {
    let width = CONVENTIONS.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    CONVENTIONS.iter().map(|(k, v)| format!("{k:<width$}  {v}\n")).collect()
}
